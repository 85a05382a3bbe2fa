"""Text cleaning for social media posts.

Method 1 strips noise from the text of each post: URLs, e-mail addresses,
emoticons/emoji, punctuation (in that order), then whitespace normalization.
Both methods drop posts that clean to the empty string and drop exact
duplicates of the cleaned text. Method 2 additionally drops posts whose
script falls outside the configured whitelist and posts outside the length
bounds.

The emoticon lexicon, URL-shortener host list, and emoji ranges ship as
versioned data files next to this module.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, replace
from importlib import resources
from typing import Iterable, Optional, Protocol, Sequence

from .corpus import Post
from .errors import DataError, TranslationError

DEFAULT_WHITELIST = frozenset({"LATIN", "CYRILLIC", "ARABIC"})


def _data_lines(name: str) -> list[str]:
    text = resources.files("claimcheck.data").joinpath(name).read_text(encoding="utf-8")
    return [line for line in text.splitlines() if line and not line.startswith("#")]


def _build_url_re() -> re.Pattern:
    hosts = "|".join(re.escape(h) for h in _data_lines("url_shorteners.txt"))
    return re.compile(r"(?:https?://\S+|\b(?:%s)/\S+)" % hosts)


def _build_emoticon_re() -> re.Pattern:
    # Longest first so ":-)" wins over ":-". Boundaries forbid alphanumeric
    # neighbors (underscore allowed) to keep cleaning idempotent: a token the
    # punctuation pass could expose must already have matched here.
    entries = sorted(_data_lines("emoticons.txt"), key=len, reverse=True)
    body = "|".join(re.escape(e) for e in entries)
    return re.compile(r"(?<![^\W_])(?:%s)(?![^\W_])" % body)


def _build_emoji_re() -> re.Pattern:
    parts = []
    for line in _data_lines("emoji_ranges.txt"):
        lo, _, hi = line.partition("-")
        parts.append("%s-%s" % (chr(int(lo, 16)), chr(int(hi or lo, 16))))
    return re.compile("[%s]" % "".join(parts))


_URL_RE = _build_url_re()
_EMAIL_RE = re.compile(r"\b[\w.+-]+@[\w-]+\.[\w.-]+\b")
_EMOJI_RE = _build_emoji_re()
_EMOTICON_RE = _build_emoticon_re()


@dataclass(frozen=True)
class PreprocessConfig:
    """Pipeline configuration. Method 2 implies all method-1 rules stay on."""

    method: int = 1
    min_len_chars: int = 15
    max_len_chars: int = 500
    min_nondigit_chars: int = 30
    alphabet_whitelist: frozenset[str] = DEFAULT_WHITELIST
    remove_urls: bool = True
    remove_emails: bool = True
    remove_emoticons: bool = True
    remove_punctuation: bool = True
    strip_hashtags_handles: bool = True
    drop_duplicates: bool = True

    def __post_init__(self):
        if self.method not in (1, 2):
            raise DataError(f"preprocess method must be 1 or 2, got {self.method}")
        if self.min_len_chars > self.max_len_chars:
            raise DataError("min_len_chars must not exceed max_len_chars")
        if self.method == 2 and not all(
            (
                self.remove_urls,
                self.remove_emails,
                self.remove_emoticons,
                self.remove_punctuation,
                self.strip_hashtags_handles,
                self.drop_duplicates,
            )
        ):
            raise DataError("method 2 requires every method-1 rule to stay active")


def _is_punct_or_symbol(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("P", "S")


def clean_method1(text: str, config: Optional[PreprocessConfig] = None) -> str:
    """Remove URLs, e-mails, emoticons/emoji, then punctuation; normalize space.

    Idempotent: the output contains nothing any rule could still match.
    """
    cfg = config or PreprocessConfig()
    if cfg.remove_urls:
        text = _URL_RE.sub(" ", text)
    if cfg.remove_emails:
        text = _EMAIL_RE.sub(" ", text)
    if cfg.remove_emoticons:
        text = _EMOJI_RE.sub(" ", text)
        text = _EMOTICON_RE.sub(" ", text)
    if cfg.remove_punctuation:
        text = "".join(" " if _is_punct_or_symbol(ch) else ch for ch in text)
    text = text.replace("\r", " ").replace("\n", " ")
    return " ".join(text.split())


def strip_social(text: str) -> str:
    """Drop every whitespace-separated token starting with '#' or '@', whole."""
    kept = [tok for tok in text.split() if not tok.startswith(("#", "@"))]
    return " ".join(kept)


def dedupe(posts: Sequence[Post]) -> list[Post]:
    """Keep the first post for each exact text value, preserve order otherwise."""
    seen: set[str] = set()
    out: list[Post] = []
    for post in posts:
        if post.text in seen:
            continue
        seen.add(post.text)
        out.append(post)
    return out


def _script_of(ch: str) -> str:
    # The first token of the Unicode character name is the script for letters
    # ("LATIN SMALL LETTER A", "CYRILLIC CAPITAL LETTER ZHE", ...). Bulgarian
    # is covered by the Cyrillic block.
    name = unicodedata.name(ch, "")
    return name.split(" ", 1)[0] if name else ""


def alphabet_keep(text: str, whitelist: Iterable[str] = DEFAULT_WHITELIST) -> bool:
    """True iff a strict majority of alphabetic characters is whitelisted.

    Text without any alphabetic character is rejected.
    """
    allowed = {w.upper() for w in whitelist}
    total = 0
    hits = 0
    for ch in text:
        if not ch.isalpha():
            continue
        total += 1
        if _script_of(ch) in allowed:
            hits += 1
    if total == 0:
        return False
    return hits * 2 > total


def length_keep(text: str, config: PreprocessConfig) -> bool:
    """Length gate: total chars within [min, max] and enough non-digit chars.

    Characters are Unicode scalar values; digits are decimal digits (Nd).
    """
    n = len(text)
    nondigit = sum(1 for ch in text if not ch.isdecimal())
    return (
        n >= config.min_len_chars
        and n <= config.max_len_chars
        and nondigit >= config.min_nondigit_chars
    )


def clean_and_strip(text: str, config: Optional[PreprocessConfig] = None) -> str:
    """Hashtag/handle stripping followed by method-1 cleaning.

    Stripping must see the raw text: the cleaning pass removes '#' and '@' as
    punctuation, which would otherwise leave hashtag keywords behind as plain
    words instead of dropping the whole token.
    """
    cfg = config or PreprocessConfig()
    if cfg.strip_hashtags_handles:
        text = strip_social(text)
    return clean_method1(text, cfg)


def preprocess(posts: Sequence[Post], config: Optional[PreprocessConfig] = None) -> list[Post]:
    """Run the full pipeline; ids and labels are never touched.

    Order: strip hashtags/handles -> clean -> drop empty -> dedupe ->
    (method 2 only) alphabet filter -> length filter.
    """
    cfg = config or PreprocessConfig()
    cleaned: list[Post] = []
    for post in posts:
        text = clean_and_strip(post.text, cfg)
        if not text:
            continue
        cleaned.append(replace(post, text=text))
    if cfg.drop_duplicates:
        cleaned = dedupe(cleaned)
    if cfg.method == 2:
        cleaned = [p for p in cleaned if alphabet_keep(p.text, cfg.alphabet_whitelist)]
        cleaned = [p for p in cleaned if length_keep(p.text, cfg)]
    return cleaned


class Translator(Protocol):
    def translate(self, text: str, source_lang: str, target_lang: str) -> str: ...


class IdentityTranslator:
    """Pass-through stand-in for a real translation service."""

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        return text


class DictionaryTranslator:
    """Deterministic token-for-token replacement from a fixed mapping."""

    def __init__(self, mapping: dict[str, str]):
        self.mapping = dict(mapping)

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        return " ".join(self.mapping.get(tok, tok) for tok in text.split())


def translate_posts(posts: Sequence[Post], translator: Translator, target: str) -> list[Post]:
    """Translate every post not already in the target language; retag it."""
    out: list[Post] = []
    for post in posts:
        if post.language == target:
            out.append(post)
            continue
        try:
            text = translator.translate(post.text, post.language, target)
        except Exception as exc:  # noqa: BLE001 - adapter boundary
            raise TranslationError(post.id, str(exc)) from exc
        out.append(replace(post, text=text, language=target))
    return out
