import pytest

from builders import generated
from folires.scenarios import darboux_jouanolou
from folires.scenarios.fileformat import ParseError, parse_scenario, render_scenario, structurally_equal

DJ1 = render_scenario(darboux_jouanolou(1))


def edit(text, old, new):
    assert old in text
    return text.replace(old, new, 1)


def line_of(text, needle):
    return next(n for n, ln in enumerate(text.splitlines(), start=1) if needle in ln)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_dj_round_trip(m):
    cx = darboux_jouanolou(m)
    text = render_scenario(cx)
    back = parse_scenario(text)
    assert structurally_equal(cx, back)
    assert render_scenario(back) == text


@pytest.mark.parametrize("mode", ["free", "all_incomplete", "force_nodal_chain"])
def test_generated_round_trip(mode):
    for seed in range(1, 26):
        cx = generated(seed, mode)
        text = render_scenario(cx)
        assert structurally_equal(cx, parse_scenario(text))
        assert render_scenario(parse_scenario(text)) == text


def test_comments_and_blank_lines_are_ignored():
    text = "# a DJ file\n\n" + DJ1.replace("\n", "\n\n", 3)
    assert structurally_equal(parse_scenario(text), darboux_jouanolou(1))


def test_positive_rational_index_on_a_final_trace():
    text = "\n".join("index T1 side E2 (1,0,0,0)" if ln.startswith("index T1") else ln for ln in DJ1.splitlines())
    with pytest.raises(ParseError, match="positive rational index") as err:
        parse_scenario(text)
    assert err.value.line == line_of(text, "index T1")
    assert err.value.token == "(1,0,0,0)"


def test_zero_index():
    text = "\n".join("index T1 side E2 (0,0,0,0)" if ln.startswith("index T1") else ln for ln in DJ1.splitlines())
    with pytest.raises(ParseError, match="zero index"):
        parse_scenario(text)


def test_duplicate_assignment():
    lines = DJ1.splitlines()
    dup = next(ln for ln in lines if ln.startswith("index T3"))
    text = "\n".join(lines + [dup])
    with pytest.raises(ParseError) as err:
        parse_scenario(text)
    assert err.value.line == len(lines) + 1


def test_truncated_file_reports_a_location():
    lines = DJ1.splitlines()
    cut = line_of(DJ1, "step 3")
    text = "\n".join(lines[: cut - 1] + ["step 3 curve"])
    with pytest.raises(ParseError) as err:
        parse_scenario(text)
    assert err.value.line == cut and err.value.column >= 1


def test_missing_header():
    with pytest.raises(ParseError, match="header"):
        parse_scenario("")


def test_field_mismatch():
    with pytest.raises(ParseError) as err:
        parse_scenario(edit(DJ1, "field qsqrt2i", "field complex"))
    assert err.value.line == 2 and err.value.token == "complex"


def test_unknown_entities():
    with pytest.raises(ParseError) as err:
        parse_scenario(edit(DJ1, "singstar 1 Y1", "singstar 1 Y9"))
    assert err.value.line == line_of(DJ1, "singstar 1 Y1")
    with pytest.raises(ParseError):
        parse_scenario(edit(DJ1, "index T1 side E2", "index T99 side E2"))


def test_unknown_record_and_bad_scalar():
    with pytest.raises(ParseError) as err:
        parse_scenario(edit(DJ1, "germ Y3 at O", "sprout Y3 at O"))
    assert err.value.token == "sprout"
    with pytest.raises(ParseError):
        parse_scenario(edit(DJ1, "index T1 side E2 (", "index T1 side E2 (x,"))


def test_steps_out_of_order():
    with pytest.raises(ParseError):
        parse_scenario(edit(DJ1, "step 2 curve Y1", "step 3 curve Y1"))


def test_structural_equality_ignores_the_name_only():
    a = darboux_jouanolou(1)
    assert structurally_equal(a, parse_scenario(DJ1))
    assert not structurally_equal(a, darboux_jouanolou(2))
