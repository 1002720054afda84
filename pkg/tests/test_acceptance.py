"""Acceptance gate.

Each ``check_*`` function evaluates one criterion at its stated tolerance and
returns ``(passed, detail)``.  Under pytest every criterion is one test and a
``PASS``/``FAIL`` line per criterion is printed in the terminal summary.  Run
``python3 tests/test_acceptance.py`` for the same lines without pytest.
"""

from __future__ import annotations

import contextlib
import io
import json
import sys
import tempfile
from pathlib import Path

import numpy as np
import pytest

from polyham.bench import run_bench
from polyham.cli import main as cli_main
from polyham.dynamics import energy_drift, simulate
from polyham.errors import NoConvergence, NotHamiltonian
from polyham.hamiltonian import (
    PolySystem,
    build_system,
    decompose,
    eval_H,
    eval_rhs,
    extract_hamiltonian,
    grad_H,
    hessian_H,
    is_hamiltonian_tensor,
    is_hamiltonian_tensor_def,
    symplectic_J,
)
from polyham.polyparse import parse_file
from polyham.stability import classify_equilibrium
from polyham.systems import (
    fput_chain,
    harmonic_oscillator,
    quadratic_cubic_example,
    random_hamiltonian,
)
from polyham.tensor import CubicalTensor, is_supersymmetric, mat_tensor, symmetrize, trace

DATA = Path(__file__).parent / "data"
SEED = 20240611

RESULTS: dict[str, tuple[bool, str]] = {}


def _cli(*argv) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli_main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


def _max_rel(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / np.max(np.abs(b)))


def _fd_grad(f, x, h=1e-5):
    g = np.empty(x.size)
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _fd_jac(F, x, h=1e-5):
    cols = []
    for i in range(x.size):
        e = np.zeros(x.size)
        e[i] = h
        cols.append((F(x + e) - F(x - e)) / (2 * h))
    return np.stack(cols, axis=1)


def _extracted_vs_formula(path, formula, rng):
    code, _, _ = _cli("check", path)
    H = extract_hamiltonian(parse_file(path))
    worst = 0.0
    for x in rng.uniform(-1, 1, (100, 2)):
        ref = formula(*x)
        worst = max(worst, abs(eval_H(H, x) - ref) / (1 + abs(ref)))
    return code, worst


def check_01_quadratic_cubic_fixture():
    rng = np.random.default_rng(SEED)
    code, worst = _extracted_vs_formula(DATA / "quadratic_cubic.txt", lambda x1, x2: x1**2 * x2 + x2**2, rng)
    ok = code == 0 and worst <= 1e-12
    return ok, f"check exit {code}; max |H - (x1^2 x2 + x2^2)|/(1+|H|) = {worst:.2e} (<= 1e-12)"


def check_02_anharmonic_fixture():
    rng = np.random.default_rng(SEED + 1)
    code, worst = _extracted_vs_formula(
        DATA / "anharmonic.txt", lambda x, p: p**2 / 2 + x**2 / 2 + x**4 / 4, rng
    )
    ok = code == 0 and worst <= 1e-12
    return ok, f"check exit {code}; max rel. error vs p^2/2 + x^2/2 + x^4/4 = {worst:.2e} (<= 1e-12)"


def check_03_saddle_center_stability():
    sys_ = parse_file(DATA / "saddle_center.txt")
    H = extract_hamiltonian(sys_)
    verdicts = [classify_equilibrium(H, x).classification.value for x in ([0, 0], [0, 2], [0, -2])]
    hess_err = float(np.max(np.abs(hessian_H(H, [0, 2]) - np.diag([-1.0, -8.0]))))
    eig = np.sort(np.linalg.eigvalsh(hessian_H(H, [0, 0])))
    eig_err = float(np.max(np.abs(eig - [-1.0, 4.0])))
    ok = verdicts == ["Unstable", "Stable", "Stable"] and hess_err <= 1e-9 and eig_err <= 1e-9
    return ok, (
        f"(0,0)/(0,2)/(0,-2) -> {'/'.join(verdicts)}; |Hess(0,2) - diag(-1,-8)| = {hess_err:.1e}; "
        f"origin eigenvalues {eig.round(12).tolist()} (err {eig_err:.1e})"
    )


def check_04_fput_fixture():
    code, _, _ = _cli("check", DATA / "fput8.txt")
    sys_ = parse_file(DATA / "fput8.txt")
    same = all(
        np.array_equal(sys_.tensor(j).data, fput_chain(8).tensor(j).data) for j in (2, 3)
    )
    ok = code == 0 and sys_.dim == 16 and same
    return ok, f"check exit {code}; state dim {sys_.dim}; file matches generated chain: {same}"


def check_05_negative_fixtures():
    code_lv, out_lv, _ = _cli("check", DATA / "lotka_volterra.txt")
    witness = json.loads(out_lv)["witness"]
    odd = []
    code, _, err = _cli("check", DATA / "odd_dim.txt")
    odd.append((3, code, "OddDimension" in err))
    rng = np.random.default_rng(SEED + 5)
    with tempfile.TemporaryDirectory() as tmp:
        for n in (1, 5):
            path = Path(tmp) / f"odd{n}.json"
            tensors = {2: CubicalTensor(rng.uniform(-1, 1, (n, n)))}
            path.write_text(json.dumps(PolySystem(n, tensors).to_json()))
            code, _, err = _cli("check", path)
            odd.append((n, code, "OddDimension" in err))
    ok = code_lv == 1 and witness is not None and all(c == 2 and m for _, c, m in odd)
    return ok, (
        f"Lotka-Volterra exit {code_lv}, witness order {witness and witness['order']}; odd n -> "
        + ", ".join(f"n={n}: exit {c}{' OddDimension' if m else ''}" for n, c, m in odd)
    )


def check_06_equivalence():
    rng = np.random.default_rng(SEED + 6)
    disagreements = 0
    counts = {True: 0, False: 0}
    for t in range(500):
        k, n = int(rng.integers(1, 5)), int(rng.choice([2, 4]))
        kind = t % 3
        A = CubicalTensor(rng.uniform(-1, 1, (n,) * k))
        if kind >= 1:
            A = mat_tensor(symplectic_J(n), symmetrize(A))
        if kind == 2:
            # a single perturbed entry breaks the structure (except in order 1)
            pert = np.zeros((n,) * k)
            pert[tuple(rng.integers(0, n, k))] = 1e-3
            A = CubicalTensor(A.data + pert)
        a = is_hamiltonian_tensor(A)
        b = is_hamiltonian_tensor_def(A)
        try:
            R = decompose(A)
            c = is_supersymmetric(R) and mat_tensor(symplectic_J(n), R).allclose(A)
        except NotHamiltonian:
            c = False
        disagreements += not (a == b == c)
        counts[a] += 1
    ok = disagreements == 0 and min(counts.values()) > 0
    return ok, f"500 tensors ({counts[True]} Hamiltonian, {counts[False]} not): {disagreements} disagreements"


def check_07_derivative_oracles():
    rng = np.random.default_rng(SEED + 7)
    worst_g = worst_h = 0.0
    for _ in range(50):
        n, k = int(rng.choice([2, 4, 6])), int(rng.integers(2, 6))
        H = random_hamiltonian(n, k, rng)
        x = rng.uniform(-1, 1, n)
        worst_g = max(worst_g, _max_rel(_fd_grad(lambda y: eval_H(H, y), x), grad_H(H, x)))
        worst_h = max(worst_h, _max_rel(_fd_jac(lambda y: grad_H(H, y), x), hessian_H(H, x)))
    ok = worst_g <= 1e-6 and worst_h <= 1e-6
    return ok, f"50 random H (k<=5, n<=6), h=1e-5: grad rel. err {worst_g:.1e}, Hessian rel. err {worst_h:.1e} (<= 1e-6)"


def check_08_roundtrips():
    rng = np.random.default_rng(SEED + 8)
    worst_h = 0.0
    for _ in range(50):
        n, k = int(rng.choice([2, 4])), int(rng.integers(2, 6))
        H = random_hamiltonian(n, k, rng)
        H2 = extract_hamiltonian(build_system(H))
        worst_h = max(worst_h, max(np.max(np.abs(H2.tensor(j).data - B.data)) for j, B in H.tensors.items()))
    worst_f = 0.0
    for _ in range(50):
        n, k = int(rng.choice([2, 4])), int(rng.integers(2, 6))
        J = symplectic_J(n)
        tensors = {j: mat_tensor(J, symmetrize(CubicalTensor(rng.uniform(-1, 1, (n,) * j)))) for j in range(2, k + 1)}
        sys_ = PolySystem(n, tensors)
        sys2 = build_system(extract_hamiltonian(sys_))
        for x in rng.uniform(-1, 1, (10, n)):
            worst_f = max(worst_f, float(np.max(np.abs(eval_rhs(sys2, x) - eval_rhs(sys_, x)))))
    ok = worst_h <= 1e-12 and worst_f <= 1e-10
    return ok, f"extract(build(H)) max entry err {worst_h:.1e} (<= 1e-12); build(extract(sys)) max rhs err {worst_f:.1e} (<= 1e-10)"


def check_09_energy_conservation():
    sys8 = quadratic_cubic_example()
    H8 = extract_hamiltonian(sys8)
    try:
        drift8 = energy_drift(H8, simulate(sys8, [0.1, 0.1], 1e-3, 10_000))
        part_a = drift8 <= 1e-6
        msg_a = f"quadratic-cubic drift {drift8:.2e} (<= 1e-6)"
    except NoConvergence as exc:
        part_a = False
        msg_a = (
            f"quadratic-cubic run aborted at step {exc.step} of 10000 "
            f"(the exact solution blows up near t = {exc.step * 1e-3:.2f})"
        )
    sysh = harmonic_oscillator()
    drift_h = energy_drift(extract_hamiltonian(sysh), simulate(sysh, [1.0, 0.0], 1e-2, 100_000))
    part_b = drift_h <= 1e-12
    return part_a and part_b, f"{msg_a}; harmonic 1e5 steps drift {drift_h:.1e} (<= 1e-12)"


def check_10_benchmark():
    r = run_bench(10, 4, trials=5)
    ok = r.speedup >= 10 and r.max_rel_diff <= 1e-5
    return ok, (
        f"n=10 k=4: tensor {r.tensor_median_s:.2e} s, finite differences {r.fd_median_s:.2e} s, "
        f"speedup {r.speedup:.0f}x (>= 10); rel. diff {r.max_rel_diff:.1e} (<= 1e-5)"
    )


def check_11_pinned_discrepancies():
    rng = np.random.default_rng(SEED + 11)
    tr = trace(quadratic_cubic_example().tensor(3))
    worst_tr = 0.0
    for _ in range(100):
        n = int(rng.choice([2, 4, 6]))
        R = rng.standard_normal((n, n))
        worst_tr = max(worst_tr, abs(trace(CubicalTensor(symplectic_J(n) @ (R + R.T)))))
    sys_ = parse_file(DATA / "saddle_center.txt")
    H = extract_hamiltonian(sys_)
    b4 = H.tensor(4).entry(2, 2, 2, 2)
    J = symplectic_J(2)
    worst_id = max(
        float(np.max(np.abs(eval_rhs(sys_, x) - J @ grad_H(H, x))))
        for x in rng.uniform(-3, 3, (100, 2))
    )
    ok = tr == 1.0 and worst_tr <= 1e-12 and abs(b4 + 0.25) <= 1e-12 and worst_id <= 1e-12
    return ok, (
        f"trace(A3) = {tr:g}; max |tr(JR)| = {worst_tr:.1e}; (B4)_2222 = {b4:.15g}; "
        f"max |rhs - J grad H| = {worst_id:.1e}"
    )


CRITERIA = [
    ("AC1  quadratic-cubic fixture", check_01_quadratic_cubic_fixture),
    ("AC2  anharmonic fixture", check_02_anharmonic_fixture),
    ("AC3  saddle-center stability", check_03_saddle_center_stability),
    ("AC4  FPUT fixture", check_04_fput_fixture),
    ("AC5  negative fixtures", check_05_negative_fixtures),
    ("AC6  Hamiltonian tensor equivalence", check_06_equivalence),
    ("AC7  derivative oracles", check_07_derivative_oracles),
    ("AC8  extract/build roundtrips", check_08_roundtrips),
    ("AC9  energy conservation", check_09_energy_conservation),
    ("AC10 Hessian benchmark", check_10_benchmark),
    ("AC11 pinned discrepancy regressions", check_11_pinned_discrepancies),
]


def _line(name: str, ok: bool, detail: str) -> str:
    return f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"


@pytest.mark.parametrize("name, check", CRITERIA, ids=[c[0].split()[0] for c in CRITERIA])
def test_acceptance(name, check):
    ok, detail = check()
    RESULTS[name] = (ok, detail)
    print(_line(name, ok, detail))
    assert ok, detail


def pytest_terminal_summary_lines() -> list[str]:
    return [_line(name, *RESULTS[name]) for name, _ in CRITERIA if name in RESULTS]


if __name__ == "__main__":
    failed = 0
    for name, check in CRITERIA:
        ok, detail = check()
        failed += not ok
        print(_line(name, ok, detail))
    sys.exit(1 if failed else 0)
