import json
from fractions import Fraction
from importlib import resources

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from levelcross import (
    ModelError,
    NumericMatrix,
    ParametricMatrix,
    ParamTerm,
    build_model_h,
    build_model_h0,
    build_model_hprime,
    evaluate,
    parse_model,
    serialize_model,
)
from levelcross import hydrogen as hy
from levelcross.arith import get_context


def test_h0_at_zero_is_diagonal():
    m = evaluate(build_model_h0(), {"g": 0})
    assert m.rows == tuple(tuple(float(i == j) * (i + 1) for j in range(6)) for i in range(6))


def test_h0_at_one():
    m = evaluate(build_model_h0(), {"g": 1})
    assert (m.entry(1, 2), m.entry(4, 5), m.entry(5, 6)) == (1, 0, 1)


def test_h_couplings():
    m = evaluate(build_model_h(Fraction(3, 10)), {"g": 1})
    assert (m.entry(1, 4), m.entry(1, 6), m.entry(2, 4)) == (0.3, 0.3, 0)
    assert m.entry(4, 1) == m.entry(1, 4)


def test_h_with_zero_c2_equals_h0_entrywise():
    assert build_model_h(0).same_values(build_model_h0())


def test_float_coefficients_become_exact_decimals():
    assert build_model_h(0.3) == build_model_h(Fraction(3, 10))
    assert build_model_h(0.1).terms(1, 4)[0].coefficient == Fraction(1, 10)


def test_missing_parameter_is_named():
    with pytest.raises(ModelError, match="'g'"):
        evaluate(build_model_h0(), {})


@pytest.mark.parametrize("bad", [float("nan"), float("inf")])
def test_non_finite_value_rejected(bad):
    with pytest.raises(ModelError):
        evaluate(build_model_h0(), {"g": bad})


def test_extra_assignment_names_are_ignored():
    assert evaluate(build_model_h0(), {"g": 1, "zzz": 5}) == evaluate(build_model_h0(), {"g": 1})


def test_precision_below_minimum_rejected():
    with pytest.raises(ValueError):
        evaluate(build_model_h0(), {"g": 1}, precision=10)


def test_high_precision_evaluation_is_exact_for_rationals():
    m = evaluate(build_model_h(Fraction(3, 10)), {"g": Fraction(1, 3)}, 60)
    assert m.entry(1, 4) == get_context(60).mpf(1) / 10


def test_construction_validation():
    with pytest.raises(ModelError):
        ParametricMatrix(0, ())
    with pytest.raises(ModelError, match="unknown parameter"):
        ParametricMatrix(2, ("g",), {(1, 2): ((1, "x"),)})
    with pytest.raises(ModelError, match="outside"):
        ParametricMatrix(2, ("g",), {(1, 3): ((1, "g"),)})
    with pytest.raises(ModelError, match="asymmetric"):
        ParametricMatrix(2, ("g",), {(1, 2): ((1, "g"),), (2, 1): ((2, "g"),)})
    with pytest.raises(ModelError, match="reserved"):
        ParametricMatrix(2, ("1",))
    with pytest.raises(ValueError):
        ParamTerm(float("inf"))


def test_numeric_matrix_rejects_asymmetry():
    with pytest.raises(ValueError):
        NumericMatrix.from_rows([[1, 2], [3, 4]])


def test_bind_folds_into_constants():
    sym = hy.subspace_I_symbolic()
    bound = sym.bind({"L": 1000, "H": 60})
    assert bound.params == ("V",)
    assert bound.terms(1, 1) == (ParamTerm(Fraction(2 * 1000) - Fraction(9, 2) * 60),)
    with pytest.raises(ModelError):
        sym.bind({"nope": 1})


# -- model files ---------------------------------------------------------------


HPRIME_FILE = """
{"n": 2, "params": ["g"],
 "entries": [{"i": 1, "j": 1, "terms": [{"c": 1, "p": "1"}]},
             {"i": 1, "j": 2, "terms": [{"c": 1, "p": "g"}]},
             {"i": 2, "j": 2, "terms": [{"c": 2, "p": "1"}]}]}
"""


def test_parse_two_level_model():
    assert parse_model(HPRIME_FILE) == build_model_hprime(1, 2, 1)


def test_parse_empty_entries_is_zero_matrix():
    m = parse_model('{"n": 3, "params": [], "entries": []}')
    assert evaluate(m, {}).rows == ((0.0,) * 3,) * 3


def test_lower_entry_without_mirror_rejected():
    text = '{"n": 2, "params": ["g"], "entries": [{"i": 2, "j": 1, "terms": [{"c": 1, "p": "g"}]}]}'
    with pytest.raises(ModelError, match=r"\(2,1\)"):
        parse_model(text)


def test_full_storage_requires_both_triangles():
    text = '{"n": 2, "params": ["g"], "storage": "full", "entries": [{"i": 1, "j": 2, "terms": [{"c": 1, "p": "g"}]}]}'
    with pytest.raises(ModelError, match=r"\(1,2\)"):
        parse_model(text)
    both = text.replace("]}]}", ']}, {"i": 2, "j": 1, "terms": [{"c": 1, "p": "g"}]}]}')
    assert parse_model(both) == ParametricMatrix(2, ("g",), {(1, 2): ((1, "g"),)})


def test_asymmetric_declarations_rejected():
    text = json.dumps(
        {
            "n": 2,
            "params": ["g"],
            "entries": [
                {"i": 1, "j": 2, "terms": [{"c": 1, "p": "g"}]},
                {"i": 2, "j": 1, "terms": [{"c": 2, "p": "g"}]},
            ],
        }
    )
    with pytest.raises(ModelError, match="asymmetric"):
        parse_model(text)


def test_duplicate_and_unknown_rejected():
    dup = '{"n": 2, "params": [], "entries": [{"i": 1, "j": 1, "terms": []}, {"i": 1, "j": 1, "terms": []}]}'
    with pytest.raises(ModelError, match="duplicate"):
        parse_model(dup)
    unk = '{"n": 2, "params": ["g"], "entries": [{"i": 1, "j": 1, "terms": [{"c": 1, "p": "h"}]}]}'
    with pytest.raises(ModelError, match="unknown parameter"):
        parse_model(unk)
    with pytest.raises(ModelError):
        parse_model("not json")


def test_decimal_coefficients_parse_exactly():
    m = parse_model('{"n": 1, "params": [], "entries": [{"i": 1, "j": 1, "terms": [{"c": 0.1, "p": "1"}, {"c": "1/3", "p": "1"}]}]}')
    assert [t.coefficient for t in m.terms(1, 1)] == [Fraction(1, 10), Fraction(1, 3)]


def _shipped():
    root = resources.files("levelcross") / "models"
    return sorted(p for p in root.iterdir() if p.name.endswith(".json"))


def test_shipped_models_exist():
    names = {p.name for p in _shipped()}
    assert {"h0.json", "h_c2_0.3.json", "hprime.json", "hydrogen_subspace_I.json"} <= names


@pytest.mark.parametrize("path", _shipped(), ids=lambda p: p.name)
def test_shipped_models_round_trip(path):
    text = path.read_text(encoding="utf-8")
    m = parse_model(text)
    assert serialize_model(m) == text
    assert parse_model(serialize_model(m)) == m


def test_shipped_models_match_builders():
    by_name = {p.name: parse_model(p.read_text(encoding="utf-8")) for p in _shipped()}
    assert by_name["h0.json"] == build_model_h0()
    assert by_name["h_c2_0.3.json"] == build_model_h(Fraction(3, 10))
    assert by_name["hprime.json"] == build_model_hprime()
    assert by_name["hydrogen_subspace_I.json"] == hy.build_subspace_I()


# -- properties ----------------------------------------------------------------

fractions = st.fractions(min_value=-100, max_value=100, max_denominator=1000)


@st.composite
def parametric_matrices(draw):
    n = draw(st.integers(1, 5))
    params = ("a", "b")
    entries = {}
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            if draw(st.booleans()):
                names = draw(st.lists(st.sampled_from(("1",) + params), min_size=1, max_size=3, unique=True))
                entries[(i, j)] = tuple(ParamTerm(draw(fractions), p) for p in names)
    return ParametricMatrix(n, params, entries)


@settings(max_examples=60, deadline=None)
@given(parametric_matrices(), fractions, fractions, fractions)
def test_evaluate_is_linear_in_each_parameter(m, x, y, b):
    prec = 40
    ctx = get_context(prec)
    s = evaluate(m, {"a": x + y, "b": b}, prec)
    p = evaluate(m, {"a": x, "b": b}, prec)
    q = evaluate(m, {"a": y, "b": b}, prec)
    z = evaluate(m, {"a": 0, "b": b}, prec)
    for i in range(m.n):
        for j in range(m.n):
            lhs, rhs = s.rows[i][j], p.rows[i][j] + q.rows[i][j] - z.rows[i][j]
            assert abs(lhs - rhs) <= ctx.mpf(10) ** -(prec - 6) * (1 + abs(lhs))


@settings(max_examples=60, deadline=None)
@given(parametric_matrices(), fractions, fractions)
def test_evaluation_is_exactly_symmetric(m, x, y):
    rows = evaluate(m, {"a": x, "b": y}).rows
    assert all(rows[i][j] == rows[j][i] for i in range(m.n) for j in range(m.n))


@settings(max_examples=60, deadline=None)
@given(parametric_matrices())
def test_serialize_round_trip(m):
    assert parse_model(serialize_model(m)) == m
