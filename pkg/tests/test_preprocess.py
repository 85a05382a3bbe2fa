"""Cleaning rules, filters, the golden fixture suite, and translator mocks."""

import random
import re
import unicodedata
from pathlib import Path

import pytest

from claimcheck.corpus import Post, TaskLabels, load_dataset, write_dataset
from claimcheck.errors import DataError, TranslationError
from claimcheck.preprocess import (
    DictionaryTranslator,
    IdentityTranslator,
    PreprocessConfig,
    alphabet_keep,
    clean_method1,
    dedupe,
    length_keep,
    preprocess,
    strip_social,
    translate_posts,
)

DATA = Path(__file__).parent / "data"


def make_post(i, text, language="en", vfc=1, harmful=None):
    return Post(id=f"q{i}", text=text, language=language, source="t",
                labels=TaskLabels(vfc=vfc, harmful=harmful))


# ---------------------------------------------------------------------------
# clean_method1


def test_clean_url_emoji_punctuation():
    assert clean_method1("Great news!!! https://t.co/Ab3 \U0001F600\n\nmore") == "Great news more"


def test_clean_empty():
    assert clean_method1("") == ""


def test_clean_email_then_punctuation():
    assert clean_method1("write me@example.com now.") == "write now"


def test_clean_bare_shortener():
    assert clean_method1("see t.co/xYz then bit.ly/abc done") == "see then done"


def test_clean_emoticons_ascii():
    assert clean_method1("nice :) really :-( hmm ;)") == "nice really hmm"
    assert clean_method1("wow xD (xD) but TexDriver stays") == "wow but TexDriver stays"


def test_clean_newlines_and_whitespace():
    assert clean_method1("a\r\nb\n\n\nc   d\te") == "a b c d e"


_URLISH = re.compile(r"https?://|t\.co/|bit\.ly/")
_EMAILISH = re.compile(r"\b[\w.+-]+@[\w-]+\.[\w.-]+\b")


def _violations(text):
    out = []
    for ch in text:
        if unicodedata.category(ch)[0] in ("P", "S"):
            out.append(f"punct/symbol {ch!r}")
    if _URLISH.search(text):
        out.append("url")
    if _EMAILISH.search(text):
        out.append("email")
    if "  " in text:
        out.append("double space")
    return out


def _random_messy_text(rnd):
    pieces = []
    vocab = ["word", "Tt", "claim", "περίπου", "вест", "جدا", "x2", "co19"]
    noise = [
        "https://ex.com/a?b=1", "t.co/Zz9", "user@mail.org", ":)", ";-)", "xD",
        "\U0001F600", "\U0001F9EA", "!!!", "...", "#tag", "@name", "\n", "\t",
        "—", "<3", "(", "50%",
    ]
    for _ in range(rnd.randrange(1, 14)):
        pool = vocab if rnd.random() < 0.6 else noise
        pieces.append(pool[rnd.randrange(len(pool))])
        if rnd.random() < 0.8:
            pieces.append(" ")
    return "".join(pieces)


def test_clean_idempotent_and_noise_free_on_random_inputs():
    rnd = random.Random(42)
    for _ in range(400):
        text = _random_messy_text(rnd)
        once = clean_method1(text)
        assert clean_method1(once) == once, repr(text)
        assert _violations(once) == [], repr(text)


# ---------------------------------------------------------------------------
# strip_social / dedupe


def test_strip_social_whole_tokens():
    assert strip_social("#COVID19 @WHO vaccines work") == "vaccines work"


def test_strip_social_identity():
    assert strip_social("no tags here") == "no tags here"


def test_strip_social_all_tags():
    assert strip_social("#a #b #c") == ""


def test_dedupe_keeps_first():
    posts = [make_post(1, "x"), make_post(2, "y"), make_post(3, "x")]
    assert [p.id for p in dedupe(posts)] == ["q1", "q2"]


def test_dedupe_distinct_unchanged():
    posts = [make_post(1, "x"), make_post(2, "y")]
    assert dedupe(posts) == posts


def test_dedupe_empty():
    assert dedupe([]) == []


# ---------------------------------------------------------------------------
# alphabet_keep / length_keep


def test_alphabet_bulgarian_kept():
    assert alphabet_keep("Здравей свят днес") is True


def test_alphabet_greek_rejected():
    assert alphabet_keep("Καλημέρα κόσμε σήμερα") is False


def test_alphabet_no_letters_rejected():
    assert alphabet_keep("12345 !!!") is False


def test_alphabet_majority_rule():
    assert alphabet_keep("abcdef αβ") is True  # 6 latin vs 2 greek
    assert alphabet_keep("ab αβγδ") is False  # 2 latin vs 4 greek


def test_alphabet_invariant_under_digits_and_punct():
    rnd = random.Random(9)
    for text in ["Здравей свят", "Καλημέρα", "hello World", "مرحبا هنا"]:
        base = alphabet_keep(text)
        suffix = "".join(rnd.choice("0123456789!?.,;:%") for _ in range(12))
        assert alphabet_keep(text + " " + suffix) == base


def test_length_bounds():
    cfg = PreprocessConfig(method=2)
    assert length_keep("a" * 14, cfg) is False
    assert length_keep("a" * 501, cfg) is False
    assert length_keep("a" * 500, cfg) is True
    assert length_keep("a" * 30, cfg) is True
    # 40 chars with 15 digits -> only 25 non-digit characters
    text = "123456789012345" + "a" * 25
    assert len(text) == 40
    assert length_keep(text, cfg) is False


def test_config_validation():
    with pytest.raises(DataError):
        PreprocessConfig(method=3)
    with pytest.raises(DataError):
        PreprocessConfig(min_len_chars=10, max_len_chars=5)
    with pytest.raises(DataError):
        PreprocessConfig(method=2, remove_urls=False)


# ---------------------------------------------------------------------------
# preprocess pipeline


def ten_post_fixture():
    long_a = "this is a sensible english post about vaccines and testing"
    return [
        make_post(0, long_a),
        make_post(1, "short"),                                   # too short for method 2
        make_post(2, "Καλημέρα κόσμε σήμερα είναι μια όμορφη μέρα"),  # Greek
        make_post(3, long_a + "!!!"),                            # duplicate after cleaning
        make_post(4, "another fine english post discussing numbers today"),
        make_post(5, "completely separate english words about current affairs"),
        make_post(6, "a third distinct english post with plenty of words"),
        make_post(7, "another fine english post discussing numbers today"),  # exact duplicate
        make_post(8, "Здравей свят днес е хубав ден за всички хора тук"),
        make_post(9, "fourth distinct english post talking about events"),
    ]


def test_preprocess_method2_hand_traced_survivors():
    # Hand trace: q3 and q7 are duplicates, q2 fails the script filter,
    # q1 fails the length filter -> exactly these 6 survive.
    out = preprocess(ten_post_fixture(), PreprocessConfig(method=2))
    assert [p.id for p in out] == ["q0", "q4", "q5", "q6", "q8", "q9"]


def test_preprocess_method1_no_script_or_length_drops():
    out = preprocess(ten_post_fixture(), PreprocessConfig(method=1))
    ids = [p.id for p in out]
    assert "q1" in ids and "q2" in ids  # method 1 keeps short and Greek posts
    assert "q3" not in ids and "q7" not in ids  # but duplicates still drop


def test_preprocess_drops_posts_that_clean_to_empty():
    posts = [make_post(0, "#only #tags @here"), make_post(1, "real words survive here")]
    out = preprocess(posts, PreprocessConfig(method=1))
    assert [p.id for p in out] == ["q1"]


def test_preprocess_fixed_point():
    posts = [
        make_post(1, "clean distinct text one two three four five six seven"),
        make_post(2, "another clean distinct text with more than thirty chars"),
    ]
    out = preprocess(posts, PreprocessConfig(method=2))
    assert [p.text for p in out] == [p.text for p in posts]


def test_preprocess_preserves_ids_and_labels():
    posts = ten_post_fixture()
    out = preprocess(posts, PreprocessConfig(method=2))
    originals = {p.id: p for p in posts}
    assert {p.id for p in out} <= set(originals)
    for p in out:
        assert p.labels == originals[p.id].labels
        assert p.language == originals[p.id].language


# ---------------------------------------------------------------------------
# golden suite


@pytest.mark.parametrize("method,golden", [(1, "golden_method1.tsv"), (2, "golden_method2.tsv")])
def test_golden_suite_byte_identical(tmp_path, method, golden):
    posts = load_dataset(DATA / "preprocess_fixture.tsv")
    assert len(posts) >= 20
    out = preprocess(posts, PreprocessConfig(method=method))
    out_path = tmp_path / "out.tsv"
    write_dataset(out, out_path)
    assert out_path.read_bytes() == (DATA / golden).read_bytes()


def test_golden_survivors_idempotent():
    posts = load_dataset(DATA / "preprocess_fixture.tsv")
    for post in preprocess(posts, PreprocessConfig(method=1)):
        assert clean_method1(post.text) == post.text


# ---------------------------------------------------------------------------
# translation


def test_translate_identity_mock():
    posts = [make_post(1, "hola mundo", language="es"), make_post(2, "ok", language="en")]
    out = translate_posts(posts, IdentityTranslator(), "en")
    assert [p.text for p in out] == ["hola mundo", "ok"]
    assert all(p.language == "en" for p in out)


def test_translate_dictionary_mock():
    posts = [make_post(1, "hola mundo", language="es")]
    out = translate_posts(posts, DictionaryTranslator({"hola": "hello"}), "en")
    assert out[0].text == "hello mundo"
    assert out[0].language == "en"


def test_translate_noop_when_in_target():
    posts = [make_post(1, "already english", language="en")]
    assert translate_posts(posts, IdentityTranslator(), "en") == posts


def test_translate_failure_carries_post_id():
    class Boom:
        def translate(self, text, source_lang, target_lang):
            raise RuntimeError("service down")

    posts = [make_post(7, "x", language="tr")]
    with pytest.raises(TranslationError, match="q7"):
        translate_posts(posts, Boom(), "en")
