import pytest
from hypothesis import given
from hypothesis import strategies as st

from chirpconcord.channelid import parse_channel


@pytest.mark.parametrize(
    "raw, prefix, first, number",
    [
        ("MST1", "MST", "M", 1),
        ("LAT7", "LAT", "L", 7),
        ("EKG", "EKG", "E", None),
        ("LAT07", "LAT", "L", 7),
        ("LAT2b", "LAT", "L", None),
        ("G17", "G", "G", 17),
        ("12", "", None, 12),
        ("  lat1 ", "LAT", "L", 1),
    ],
)
def test_parse(raw, prefix, first, number):
    ch = parse_channel(raw)
    assert (ch.prefix, ch.first_char, ch.number) == (prefix, first, number)


def test_normalizes_label():
    assert parse_channel(" rah2\t").raw == "RAH2"


@pytest.mark.parametrize("raw", ["", "   "])
def test_empty_rejected(raw):
    with pytest.raises(ValueError):
        parse_channel(raw)


labels = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1).filter(lambda s: s.strip())


@given(st.from_regex(r"[A-Z]{0,4}[0-9]{1,4}", fullmatch=True))
def test_trailing_digits_give_number(raw):
    digits = raw.lstrip("ABCDEFGHIJKLMNOPQRSTUVWXYZ")
    assert parse_channel(raw).number == int(digits)


@given(labels)
def test_idempotent(raw):
    once = parse_channel(raw)
    assert parse_channel(once.raw) == once


@given(labels)
def test_first_char_iff_prefix(raw):
    ch = parse_channel(raw)
    assert (ch.first_char is not None) == bool(ch.prefix)
