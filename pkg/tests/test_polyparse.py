import json
import re
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyham.errors import (
    ConstantTermNotAllowed,
    DegreeTooLow,
    DegreeZeroRHS,
    DimMismatch,
    ParseError,
    PolySyntaxError,
    UnknownVariable,
)
from polyham.hamiltonian import PolyHamiltonian, PolySystem, eval_H, eval_rhs, symplectic_J
from polyham.polyparse import (
    emit_hamiltonian,
    emit_system,
    format_coefficient,
    parse_any,
    parse_file,
    parse_hamiltonian,
    parse_system,
)
from polyham.systems import (
    anharmonic_oscillator,
    fput_chain,
    harmonic_oscillator,
    lotka_volterra,
    quadratic_cubic_example,
    random_hamiltonian,
    saddle_center_example,
    saddle_center_hamiltonian,
)
from polyham.tensor import CubicalTensor, make_tensor


def python_rhs(text, names):
    """Evaluate ``d<name> = expr`` lines with Python arithmetic."""
    eqs = {}
    for stmt in re.split(r"[;\n]", text):
        stmt = stmt.split("#")[0].strip()
        if stmt.startswith("d") and "=" in stmt:
            lhs, rhs = stmt.split("=", 1)
            eqs[lhs.strip()[1:]] = rhs.replace("^", "**")
    return lambda x: np.array([eval(eqs[v], {}, dict(zip(names, x))) for v in names])


def same_tensors(a, b, tol=1e-12):
    keys = {j for j in a.tensors if not a.tensors[j].is_zero()} | {
        j for j in b.tensors if not b.tensors[j].is_zero()
    }
    return all(
        np.max(np.abs(a.tensor(j).data - b.tensor(j).data)) <= tol for j in keys
    )


class TestParseSystem:
    def test_quadratic_cubic(self):
        sys = parse_system("dx1 = x1^2 + 2*x2 ; dx2 = -2*x1*x2")
        np.testing.assert_array_equal(sys.tensor(2).data, [[0, 2], [0, 0]])
        assert sys.tensor(3) == make_tensor(3, 2, [((1, 1, 1), 1), ((2, 1, 2), -1), ((2, 2, 1), -1)])

    def test_harmonic(self):
        sys = parse_system("dx1 = x2 ; dx2 = -x1")
        np.testing.assert_array_equal(sys.tensor(2).data, symplectic_J(2))

    def test_constant_term(self):
        with pytest.raises(ConstantTermNotAllowed) as info:
            parse_system("dx1 = 1 + x2 ; dx2 = -x1")
        assert info.value.span is not None
        assert info.value.span.line == 1

    def test_named_variables(self):
        sys = parse_system("vars x, y\ndx = 4*y - y^3\ndy = x")
        assert sys.names == ("x", "y")
        assert same_tensors(sys, saddle_center_example())

    def test_zero_rhs(self):
        sys = parse_system("dim 2\ndx1 = 0\ndx2 = x1")
        assert sys.tensor(2).entry(2, 1) == 1 and sys.tensor(2).entry(1, 1) == 0

    def test_fractions_and_products(self):
        sys = parse_system("dx1 = 1/2*x1*x2*x1 - 3/4*x2^2 ; dx2 = 2.5*x1")
        f = eval_rhs(sys, [2.0, 3.0])
        np.testing.assert_allclose(f, [0.5 * 4 * 3 - 0.75 * 9, 5.0])

    def test_collects_like_terms(self):
        a = parse_system("dx1 = x1*x2 + x2*x1 ; dx2 = x1")
        b = parse_system("dx1 = 2*x1*x2 ; dx2 = x1")
        assert same_tensors(a, b)

    def test_comments_and_blank_lines(self):
        sys = parse_system("# header\n\ndx1 = x2  # velocity\ndx2 = -x1\n")
        np.testing.assert_array_equal(sys.tensor(2).data, symplectic_J(2))

    @pytest.mark.parametrize(
        "text, exc",
        [
            ("dx1 = x1 + ; dx2 = x1", PolySyntaxError),
            ("dx1 = x1^0 ; dx2 = x1", ParseError),
            ("dx1 = x3 ; dx2 = x1", UnknownVariable),
            ("vars a, b\nda = c\ndb = a", UnknownVariable),
            ("dim 3\ndx1 = x2\ndx2 = x1", DimMismatch),
            ("dx1 = x2 ; dx1 = x1", ParseError),
            ("dx1 = x2 ) ; dx2 = x1", PolySyntaxError),
            ("dx1 = x2 + + - ; dx2 = x1", PolySyntaxError),
            ("dx1 = x2*x1^-1 ; dx2 = x1", PolySyntaxError),
            ("dx1 = x2x1 ; dx2 = x1", UnknownVariable),
        ],
    )
    def test_errors(self, text, exc):
        with pytest.raises(exc):
            parse_system(text)

    def test_all_zero(self):
        with pytest.raises(DegreeZeroRHS):
            parse_system("dx1 = 3 ; dx2 = x1")

    def test_matches_python_arithmetic(self, rng):
        texts = [
            ("dx1 = x1^2 + 2*x2\ndx2 = -2*x1*x2", ("x1", "x2")),
            ("dx1 = x1 - x1*x2 + 1/3*x2^4\ndx2 = -x2 + x1*x2 - 7/5*x1^2*x2", ("x1", "x2")),
            (emit_system(fput_chain(3)), tuple(fput_chain(3).names)),
        ]
        for text, names in texts:
            sys = parse_system(text)
            ref = python_rhs(text, names)
            for x in rng.uniform(-1, 1, (100, len(names))):
                r = ref(x)
                assert np.max(np.abs(eval_rhs(sys, x) - r)) <= 1e-12 * max(1.0, np.max(np.abs(r)))

    @given(st.permutations(["x1^2", "2*x2", "-3*x1*x2", "1/2*x2^3", "x1*x2^2"]))
    @settings(max_examples=30, deadline=None)
    def test_permutation_stable(self, terms):
        text = "dx1 = " + " + ".join(terms) + " ; dx2 = x1"
        ref = parse_system("dx1 = x1^2 + 2*x2 + -3*x1*x2 + 1/2*x2^3 + x1*x2^2 ; dx2 = x1")
        sys = parse_system(text)
        assert all(sys.tensor(j) == ref.tensor(j) for j in ref.tensors)


class TestParseHamiltonian:
    def test_quadratic_cubic(self):
        H = parse_hamiltonian("H = x1^2*x2 + x2^2")
        np.testing.assert_array_equal(H.tensor(2).data, [[0, 0], [0, 1]])
        for idx in [(1, 1, 2), (1, 2, 1), (2, 1, 1)]:
            assert H.tensor(3).entry(*idx) == pytest.approx(1 / 3)

    def test_saddle_center(self):
        H = parse_hamiltonian("vars x, y\nH = 2*y^2 - 1/4*y^4 - 1/2*x^2")
        assert same_tensors(H, saddle_center_hamiltonian())

    def test_names_argument(self):
        H = parse_hamiltonian("H = 1/2*p^2 + 1/2*q^2", names=("q", "p"))
        assert H.names == ("q", "p")
        assert eval_H(H, [1.0, 2.0]) == pytest.approx(2.5)

    def test_degree_too_low(self):
        with pytest.raises(DegreeTooLow):
            parse_hamiltonian("H = x1")
        with pytest.raises(DegreeTooLow):
            parse_hamiltonian("H = x1^2 + 3*x2")

    def test_constant(self):
        with pytest.raises(DegreeTooLow):
            parse_hamiltonian("H = x1^2 + x2^2 + 1")

    def test_value_against_python(self, rng):
        src = "x1^2*x2 - 3/7*x2^4 + x1*x2*x3*x4 + 2*x4^2"
        H = parse_hamiltonian("H = " + src)
        for x in rng.uniform(-1, 1, (50, 4)):
            env = {f"x{i + 1}": v for i, v in enumerate(x)}
            assert eval_H(H, x) == pytest.approx(eval(src.replace("^", "**"), {}, env), rel=1e-12, abs=1e-14)


class TestEmit:
    def test_quadratic_cubic(self):
        assert emit_system(quadratic_cubic_example()) == "dx1 = x1^2 + 2*x2\ndx2 = -2*x1*x2\n"
        H = parse_hamiltonian("H = x2^2 + x2*x1^2")
        assert emit_hamiltonian(H) == "H = x1^2*x2 + x2^2\n"

    def test_zero_system(self):
        sys = PolySystem(2, {2: CubicalTensor.zeros(2, 2)})
        assert emit_system(sys) == "dx1 = 0\ndx2 = 0\n"

    def test_fput_eight_equations(self):
        lines = emit_system(fput_chain(4)).strip().splitlines()
        eqs = [ln for ln in lines if "=" in ln]
        assert len(eqs) == 8
        assert "dp1 = -x1 - 1/4*x1*x2 + 1/2*x2 + 1/8*x2^2" in eqs

    @pytest.mark.parametrize(
        "sys",
        [quadratic_cubic_example(), anharmonic_oscillator(), saddle_center_example(),
         harmonic_oscillator(), lotka_volterra(), fput_chain(4), fput_chain(8)],
        ids=["quadratic_cubic", "anharmonic", "saddle_center", "harmonic", "lv", "fput4", "fput8"],
    )
    def test_system_roundtrip(self, sys):
        again = parse_system(emit_system(sys))
        assert again.names == sys.names
        assert same_tensors(again, sys)

    def test_hamiltonian_roundtrip(self, rng):
        for _ in range(20):
            H = random_hamiltonian(4, 4, rng)
            H = PolyHamiltonian(4, {j: CubicalTensor(np.round(B.data * 64) / 64) for j, B in H.tensors.items()})
            assert same_tensors(parse_hamiltonian(emit_hamiltonian(H)), H)

    def test_unused_trailing_variable(self):
        sys = parse_system("dim 4\ndx1 = x2\ndx2 = -x1\ndx3 = 0\ndx4 = 0")
        assert parse_system(emit_system(sys)).dim == 4

    def test_format_coefficient(self):
        assert format_coefficient(0.5) == "1/2"
        assert format_coefficient(-0.25) == "-1/4"
        assert format_coefficient(3.0) == "3"
        assert Fraction(format_coefficient(1 / 3)) == Fraction(1, 3)


class TestFiles:
    def test_text_and_json(self, tmp_path):
        sys = saddle_center_example()
        (tmp_path / "s.txt").write_text(emit_system(sys))
        (tmp_path / "s.json").write_text(json.dumps(sys.to_json()))
        H = saddle_center_hamiltonian()
        (tmp_path / "h.json").write_text(json.dumps(H.to_json()))
        assert same_tensors(parse_file(tmp_path / "s.txt"), sys)
        assert same_tensors(parse_file(tmp_path / "s.json"), sys)
        assert isinstance(parse_file(tmp_path / "h.json"), PolyHamiltonian)
        assert isinstance(parse_any("H = x1*x2"), PolyHamiltonian)

    def test_fixture_files(self, data_dir):
        assert same_tensors(parse_file(data_dir / "quadratic_cubic.txt"), quadratic_cubic_example())
        assert same_tensors(parse_file(data_dir / "anharmonic.txt"), anharmonic_oscillator())
        assert same_tensors(parse_file(data_dir / "fput8.txt"), fput_chain(8))
        assert same_tensors(parse_file(data_dir / "lotka_volterra.txt"), lotka_volterra())
