"""Annotation pipeline: document readers, content flags, output validity."""

from __future__ import annotations

import json

import pytest

from driftscope import DataError, UsageError, load_corpus
from driftscope_annotator import (
    AnnotationJob,
    annotate,
    read_documents,
    verify_output,
)


def job_for(tmp_path, text, embedder="hashed:4", **kwargs) -> AnnotationJob:
    source = tmp_path / "docs.txt"
    source.write_text(text, encoding="utf-8")
    return AnnotationJob(input_path=source, output_path=tmp_path / "out.jsonl",
                         embedder_id=embedder, **kwargs)


class TestReadDocuments:
    def test_text_lines_get_sequential_ids(self, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text("first doc\nsecond doc\n", encoding="utf-8")
        docs = list(read_documents(path, default_domain="news"))
        assert docs == [("doc-0001", "news", None, "first doc"),
                        ("doc-0002", "news", None, "second doc")]

    def test_csv_columns(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("id,domain,correct,text\n"
                        "a1,reviews,true,Great film.\n"
                        ",,false,Awful film.\n"
                        "a3,,,No opinion.\n", encoding="utf-8")
        docs = list(read_documents(path, default_domain="movies"))
        assert docs[0] == ("a1", "reviews", True, "Great film.")
        assert docs[1] == ("doc-0002", "movies", False, "Awful film.")
        assert docs[2] == ("a3", "movies", None, "No opinion.")

    def test_tsv_uses_tab_delimiter(self, tmp_path):
        path = tmp_path / "d.tsv"
        path.write_text("id\ttext\nx\tone, two\n", encoding="utf-8")
        assert list(read_documents(path)) == [("x", "default", None, "one, two")]

    def test_bad_correct_value_cites_line(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("text,correct\nfine,true\nbad,maybe\n", encoding="utf-8")
        with pytest.raises(DataError) as err:
            list(read_documents(path))
        assert "line 3" in str(err.value)

    def test_missing_text_column_rejected(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("body\nhello\n", encoding="utf-8")
        with pytest.raises(DataError) as err:
            list(read_documents(path))
        assert "text" in str(err.value)

    def test_unknown_format_rejected(self, tmp_path):
        with pytest.raises(UsageError):
            read_documents(tmp_path / "d.txt", input_format="parquet")


class TestAnnotate:
    def test_content_flags_on_basic_sentence(self, tmp_path):
        result = annotate(job_for(tmp_path, "The dog ran.\n"))
        _, stream = load_corpus(result.output)
        example = next(stream)
        flags = {t.surface: t.is_content for t in example.tokens}
        assert flags == {"The": False, "dog": True, "ran": True, ".": False}

    def test_open_class_stopwords_are_not_content(self, tmp_path):
        result = annotate(job_for(tmp_path, "very shiny table\n"))
        _, stream = load_corpus(result.output)
        flags = {t.surface: t.is_content for t in next(stream).tokens}
        assert flags["very"] is False  # ADV but a stopword
        assert flags["shiny"] is True

    def test_empty_lines_skipped_and_reported(self, tmp_path):
        result = annotate(job_for(tmp_path, "one doc\n\n   \nlast doc\n"))
        assert result.written == 2
        assert result.skipped == ["doc-0002", "doc-0003"]
        _, stream = load_corpus(result.output)
        assert [e.id for e in stream] == ["doc-0001", "doc-0004"]

    def test_dim_zero_emits_no_embedding_fields(self, tmp_path):
        result = annotate(job_for(tmp_path, "plain words here\n", embedder="none"))
        assert result.dim == 0
        lines = result.output.read_text(encoding="utf-8").splitlines()
        assert json.loads(lines[0])["dim"] == 0
        assert '"emb"' not in lines[1]
        assert json.loads(lines[1])["subwords"]  # subword channel remains

    def test_output_passes_validation(self, tmp_path):
        text = "The dog ran.\nAlice met Bob at 5.30, unbelievable!\nshe said no\n"
        result = annotate(job_for(tmp_path, text))
        summary = verify_output(result.output)
        assert summary.issues == []
        assert summary.examples == 3
        assert summary.dim == 4

    def test_header_declares_pinned_versions(self, tmp_path):
        result = annotate(job_for(tmp_path, "a doc\n"))
        header = json.loads(
            result.output.read_text(encoding="utf-8").splitlines()[0])
        assert header["schema"] == "driftscope/v1"
        meta = header["meta"]
        for key in ("tagger", "tagger_version", "stopwords",
                    "stopwords_version", "embedder", "embedder_version",
                    "subwords", "subwords_version", "layers"):
            assert meta[key], key
        assert meta == result.meta

    def test_labels_from_delimited_input_round_trip(self, tmp_path):
        source = tmp_path / "rows.csv"
        source.write_text("id,domain,correct,text\n"
                          "r1,qa,true,It worked fine.\n"
                          "r2,qa,false,It crashed badly.\n", encoding="utf-8")
        job = AnnotationJob(input_path=source,
                            output_path=tmp_path / "out.jsonl",
                            embedder_id="hashed:4")
        result = annotate(job)
        _, stream = load_corpus(result.output)
        examples = list(stream)
        assert [(e.id, e.domain, e.correct) for e in examples] == [
            ("r1", "qa", True), ("r2", "qa", False)]

    def test_duplicate_ids_rejected_without_partial_output(self, tmp_path):
        source = tmp_path / "rows.csv"
        source.write_text("id,text\nsame,one\nsame,two\n", encoding="utf-8")
        job = AnnotationJob(input_path=source,
                            output_path=tmp_path / "out.jsonl")
        with pytest.raises(DataError) as err:
            annotate(job)
        assert "same" in str(err.value)
        assert not (tmp_path / "out.jsonl").exists()

    def test_unloadable_tagger_fails_before_writing(self, tmp_path):
        job = job_for(tmp_path, "text\n", tagger_id="spacy:en_core_web_sm")
        with pytest.raises(DataError):
            annotate(job)
        assert not (tmp_path / "out.jsonl").exists()


class TestVerifyOutput:
    def test_corrupted_tag_is_located(self, tmp_path):
        result = annotate(job_for(tmp_path, "one\ntwo words\n"))
        lines = result.output.read_text(encoding="utf-8").splitlines()
        lines[2] = lines[2].replace('"pos":"NOUN"', '"pos":"XYZ"', 1)
        result.output.write_text("\n".join(lines) + "\n", encoding="utf-8")
        summary = verify_output(result.output)
        assert len(summary.issues) == 1
        assert "line 3" in summary.issues[0]

    def test_header_dim_vector_mismatch_is_a_violation(self, tmp_path):
        result = annotate(job_for(tmp_path, "one document\n"))
        lines = result.output.read_text(encoding="utf-8").splitlines()
        lines[0] = lines[0].replace('"dim":4', '"dim":5')
        result.output.write_text("\n".join(lines) + "\n", encoding="utf-8")
        assert verify_output(result.output).issues
