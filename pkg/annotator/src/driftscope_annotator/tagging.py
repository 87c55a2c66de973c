"""Deterministic tokenization and UPOS tagging pipelines.

The default pipeline ("builtin:rule-en") is self-contained: a regex
tokenizer, a closed-class lexicon, and suffix heuristics over the 17-tag
Universal POS inventory, plus a pinned English stopword list. It needs
no model downloads and emits identical output across runs, so annotated
corpora are reproducible by construction. A spaCy pipeline can be
selected instead ("spacy:<pipeline>") when that package and the named
model are installed; its own stopword list is used and recorded.
"""

from __future__ import annotations

import re

from driftscope import UNK_TAG, UPOS_TAGS, UsageError

from .errors import ModelLoadError

#: UPOS classes whose members can carry the content flag.
OPEN_CLASS_TAGS = frozenset({"ADJ", "ADV", "INTJ", "NOUN", "PROPN", "VERB"})

#: Words, numbers with internal separators, or single other glyphs.
_TOKEN_RE = re.compile(r"[A-Za-z]+(?:'[A-Za-z]+)?|\d+(?:[.,]\d+)*|[^\sA-Za-z\d]")

_NUMBER_RE = re.compile(r"\d+(?:[.,]\d+)*$")

_SENTENCE_ENDERS = frozenset({".", "!", "?"})

_SYMBOL_GLYPHS = frozenset("$%€£¥+=<>^~|©®°§×µ#&*@/\\_")

_CLOSED_CLASS_WORDS = {
    "DET": """the a an this that these those each every either neither both
              all some any no another such""",
    "PRON": """i you he she it we they me him her us them my your his its our
               their mine yours hers ours theirs myself yourself himself
               herself itself ourselves yourselves themselves who whom whose
               which what someone anyone everyone somebody anybody everybody
               something anything everything nothing nobody none""",
    "ADP": """in on at by for with about against between among into through
              during before after above below to from up down of off over
              under across behind beyond near inside outside onto upon within
              without toward towards until per via""",
    "CCONJ": "and but or nor",
    "SCONJ": """because although though while whereas if unless since whether
                whenever wherever once""",
    "AUX": """am is are was were be been being have has had do does did will
              would shall should can could may might must ought don't won't
              can't isn't aren't wasn't weren't doesn't didn't couldn't
              shouldn't wouldn't it's that's there's i'm you're we're they're
              i've we've they've i'll you'll he'll she'll we'll they'll""",
    "PART": "not",
    "ADV": """very too also just never always often sometimes soon now then
              here there quite rather almost enough again still yet maybe
              perhaps really only even already""",
    "INTJ": "oh hey wow ouch hello goodbye yes please hmm alas",
    "NUM": """zero one two three four five six seven eight nine ten eleven
              twelve twenty hundred thousand million billion""",
    "VERB": """be go see say get make know think take come want use find give
               tell work call try ask need feel leave put mean keep let begin
               seem help talk turn start show hear play run move like live
               believe hold bring happen write provide sit stand lose pay
               meet include continue set learn change lead understand watch
               follow stop create speak read allow add spend grow open walk
               win offer remember love consider appear buy wait serve die
               send expect build stay fall cut reach kill remain ran went
               gone said made took came saw seen got gave given knew thought
               found felt kept told became began brought built bought chose
               drew ate fell fought flew forgot grew heard held hit hurt laid
               led lost meant met paid rode rose sang sat sold sent shook
               shot showed shut slept spoke spent stood swam taught threw
               understood wore won wrote runs walks eats barks sleeps""",
}

_LEXICON: dict[str, str] = {}
for _tag, _words in _CLOSED_CLASS_WORDS.items():
    for _word in _words.split():
        _LEXICON[_word] = _tag

# longest-first so "-ical" wins over "-al" and "-ation" over "-ion"
_SUFFIX_TAGS = [
    ("ly", "ADV"),
    ("ing", "VERB"), ("ed", "VERB"), ("ize", "VERB"), ("ise", "VERB"),
    ("ify", "VERB"),
    ("ation", "NOUN"), ("tion", "NOUN"), ("sion", "NOUN"), ("ment", "NOUN"),
    ("ness", "NOUN"), ("ity", "NOUN"), ("ance", "NOUN"), ("ence", "NOUN"),
    ("ship", "NOUN"), ("hood", "NOUN"), ("ism", "NOUN"), ("ology", "NOUN"),
    ("ical", "ADJ"), ("ous", "ADJ"), ("ful", "ADJ"), ("ive", "ADJ"),
    ("able", "ADJ"), ("ible", "ADJ"), ("ish", "ADJ"), ("less", "ADJ"),
]
_SUFFIX_TAGS.sort(key=lambda pair: -len(pair[0]))

# function-word classes; the VERB and INTJ lexicon entries are tagging
# aids for open-class words and must not become stopwords
_STOPWORD_TAGS = frozenset({"DET", "PRON", "ADP", "CCONJ", "SCONJ", "AUX",
                            "PART", "ADV", "NUM"})

#: Pinned English stopword list; content = open-class tag and not a stopword.
STOPWORDS = frozenset(
    word for word, tag in _LEXICON.items() if tag in _STOPWORD_TAGS
) | frozenset("""
    about above after again against because been before being below between
    both but down during each few for from further had has have here how
    into more most not now off once only other out over own same should so
    such than that then there these this those through too under until up
    very when where which while who whom why will with
""".split())


def tokenize(text: str) -> list[str]:
    """Split text into word, number, and punctuation tokens."""
    return _TOKEN_RE.findall(text)


class RuleTagger:
    """Lexicon-plus-heuristics tagger over the UPOS inventory.

    Closed-class words come from a fixed lexicon; open-class words fall
    through capitalization and suffix heuristics to a NOUN default, so
    every token receives some in-inventory tag.
    """

    id = "builtin:rule-en"
    version = "1.0"
    stopwords_id = "builtin:stopwords-en"
    stopwords_version = "1.0"
    stopwords = STOPWORDS

    def annotate_text(self, text: str) -> list[tuple[str, str]]:
        surfaces = tokenize(text)
        pairs = []
        sentence_initial = True
        for surface in surfaces:
            pairs.append((surface, self._tag(surface, sentence_initial)))
            sentence_initial = surface in _SENTENCE_ENDERS
        return pairs

    def _tag(self, surface: str, sentence_initial: bool) -> str:
        if _NUMBER_RE.fullmatch(surface):
            return "NUM"
        if not any(ch.isalpha() for ch in surface):
            return "SYM" if surface in _SYMBOL_GLYPHS else "PUNCT"
        lowered = surface.lower()
        if lowered in _LEXICON:
            return _LEXICON[lowered]
        if surface[0].isupper() and not sentence_initial:
            return "PROPN"
        for suffix, tag in _SUFFIX_TAGS:
            if lowered.endswith(suffix) and len(lowered) > len(suffix) + 1:
                return tag
        return "NOUN"


class SpacyTagger:
    """Adapter around an installed spaCy pipeline's tokenizer and tagger."""

    def __init__(self, pipeline: str):
        try:
            import spacy
        except ImportError as exc:
            raise ModelLoadError(
                f"tagger 'spacy:{pipeline}' needs the spacy package: {exc}"
            ) from exc
        try:
            self._nlp = spacy.load(pipeline,
                                   exclude=["parser", "ner", "lemmatizer"])
        except OSError as exc:
            raise ModelLoadError(
                f"tagger 'spacy:{pipeline}' could not be loaded: {exc}"
            ) from exc
        self.id = f"spacy:{pipeline}"
        self.version = f"{spacy.__version__}+{self._nlp.meta.get('version', 'unknown')}"
        self.stopwords_id = f"spacy:{pipeline}:stop_words"
        self.stopwords_version = self.version
        self.stopwords = frozenset(self._nlp.Defaults.stop_words)

    def annotate_text(self, text: str) -> list[tuple[str, str]]:
        doc = self._nlp(text)
        return [(token.text,
                 token.pos_ if token.pos_ in UPOS_TAGS else UNK_TAG)
                for token in doc if not token.is_space]


def load_tagger(tagger_id: str):
    """Instantiate the tagger pipeline named by `tagger_id`."""
    if tagger_id == RuleTagger.id:
        return RuleTagger()
    if tagger_id.startswith("spacy:"):
        return SpacyTagger(tagger_id.removeprefix("spacy:"))
    raise UsageError(f"unknown tagger '{tagger_id}' "
                     f"(expected '{RuleTagger.id}' or 'spacy:<pipeline>')")
