"""Acceptance criteria, one test (or group of tests) per criterion.

Run ``pytest tests/test_acceptance.py`` for a per-criterion PASS/FAIL summary.
"""
import math
import timeit

import numpy as np
import pytest

from igo.design import slope_sweep
from igo.hybridsim import simulate
from igo.model import Modulation
from igo.numerics import ChainPlant, eig3, expm_oracle, opitz_apply
from igo.poincare import CycleSpec, detect_cycle, fixed_point_analytic
from igo.sampling import random_case, random_plant
from igo.stability import (
    ScriptQParams,
    compute_JD,
    criterion_det,
    criterion_linear,
    diagonalizer,
    jacobian,
    lemma1_check,
    script_Q,
    stability_report,
    w_modal,
)

SPEC = CycleSpec(300.0, 20.0)
N_SAMPLES = 600
SAMPLE_SEED = 2024


@pytest.fixture(scope="module")
def samples():
    rng = np.random.default_rng(SAMPLE_SEED)
    return [random_case(rng) for _ in range(N_SAMPLES)]


def _report(failures, total, what):
    print(f"{what}: {len(failures)} violations in {total} samples")
    for f in failures[:5]:
        print("  ", f)


@pytest.mark.criterion(1)
def test_c1_fixed_point(plant):
    fp = fixed_point_analytic(plant, SPEC)
    np.testing.assert_allclose(fp.X, [269.5974, 84.5819, 13.6249], rtol=1e-3)


@pytest.mark.criterion(1)
def test_c1_fixed_point_runtime(plant):
    fixed_point_analytic(plant, SPEC)
    best = min(timeit.repeat(lambda: fixed_point_analytic(plant, SPEC), number=100, repeat=5)) / 100
    print(f"fixed_point_analytic: {best * 1e6:.1f} us")
    assert best < 1e-3


@pytest.mark.criterion(2)
def test_c2_J_and_D(plant, fp):
    J, D = compute_JD(plant, fp)
    np.testing.assert_allclose(J, [0.4733, 0.1410, 0.0221], atol=5e-4)
    np.testing.assert_allclose(D, [-10.0829, -2.5705, -0.3633], atol=5e-4)


@pytest.mark.criterion(3)
def test_c3_multipliers_monotone_design(plant, fp):
    ev = eig3(jacobian(plant, fp, -0.1, 0.29)).values
    assert np.all(np.abs(ev.imag) < 1e-12)
    np.testing.assert_allclose(np.sort(ev.real)[::-1], [0.2348, 0.1814, 0.0003], atol=1e-3)


@pytest.mark.criterion(3)
def test_c3_multipliers_overshoot_design(plant, fp):
    res = eig3(jacobian(plant, fp, -1.0, 4.0))
    ev = res.values
    pair = ev[np.abs(ev.imag) > 1e-6]
    real = ev[np.abs(ev.imag) <= 1e-6]
    assert len(pair) == 2 and len(real) == 1
    assert pair.real == pytest.approx([-0.4757] * 2, abs=1e-3)
    assert sorted(np.abs(pair.imag)) == pytest.approx([0.2343] * 2, abs=1e-3)
    assert abs(real[0]) < 1e-3
    assert res.spectral_radius == pytest.approx(0.5302, abs=1e-3)


@pytest.mark.criterion(4)
@pytest.mark.parametrize("slopes,expected", [((-1.0, 4.0), True), ((-1.0, 5.5), False)])
def test_c4_classification(plant, fp, slopes, expected):
    rep = stability_report(plant, fp, *slopes)
    assert rep.verdict_linear == rep.verdict_det == rep.verdict_eigen == expected


@pytest.mark.criterion(4)
def test_c4_recomputed_border_reproduces_dots(plant):
    grid = slope_sweep(plant, SPEC)
    for slopes, expected in [((-1.0, 4.0), True), ((-1.0, 5.5), False)]:
        assert (grid.c_J * slopes[0] + grid.c_D * slopes[1] > -1) == expected
        i, j = grid.cell(*slopes)
        assert grid.stable_linear[i, j] == grid.stable_det[i, j] == grid.stable_eigen[i, j] == expected
    print(f"recomputed border: {grid.c_J:.6g}*Fp + {grid.c_D:.6g}*Phip > -1")


def _mod(fp, Fp, Phip):
    return Modulation.anchored(fp.y0, SPEC.lam, SPEC.T, Fp, Phip)


@pytest.mark.criterion(5)
def test_c5_one_cycle(plant, fp):
    t0 = timeit.default_timer()
    tr = simulate(plant, _mod(fp, -1.0, 4.0), fp.X, n_firings=20)
    elapsed = timeit.default_timer() - t0
    assert len(tr.events) == 20
    np.testing.assert_allclose([e.T for e in tr.events], 20.0, atol=1e-9)
    np.testing.assert_allclose([e.lam for e in tr.events], 300.0, atol=1e-9)
    assert elapsed < 1.0


@pytest.mark.criterion(5)
def test_c5_two_cycle(plant, fp):
    t0 = timeit.default_timer()
    tr = simulate(plant, _mod(fp, -1.0, 5.5), fp.X + [1.0, 0.0, 0.0], n_firings=200)
    m = detect_cycle(tr.event_states())
    elapsed = timeit.default_timer() - t0
    assert m == 2
    assert elapsed < 1.0


@pytest.mark.criterion(6)
def test_c6_verdict_equivalence(samples):
    bad = []
    checked = 0
    for c in samples:
        fp = fixed_point_analytic(c.plant, CycleSpec(c.lam, c.T))
        rho = eig3(jacobian(c.plant, fp, c.Fp, c.Phip)).spectral_radius
        if abs(rho - 1) < 1e-9:
            continue
        checked += 1
        lin = criterion_linear(c.plant, fp, c.Fp, c.Phip)[1]
        det = criterion_det(c.plant, fp, c.Fp, c.Phip)[1]
        if not (lin == det == (rho < 1)):
            bad.append((c, rho, lin, det))
    _report(bad, checked, "verdict disagreements")
    assert checked >= 500
    assert not bad


@pytest.fixture(scope="module")
def spectral_reports(samples):
    return [(c, lemma1_check(c.plant, ScriptQParams(c.T, c.xi, c.eta))) for c in samples]


@pytest.mark.criterion(7)
@pytest.mark.parametrize(
    "statement,field",
    [
        ("a", "no_eigenvalue_above"),
        ("b", "real_eigenvalue_in_band"),
        ("c", "pair_product_bounded"),
        ("d", "det_bounded"),
    ],
)
def test_c7_spectral_statement(spectral_reports, statement, field):
    bad = [(c, r.eigenvalues) for c, r in spectral_reports if not getattr(r, field)]
    _report(bad, len(spectral_reports), f"statement ({statement})")
    assert len(spectral_reports) >= 500
    assert not bad


def _plant_with_separation(rng, sep=1e-3):
    while True:
        a = np.sort(10.0 ** rng.uniform(-2, 0, 3))
        if np.diff(a).min() >= sep:
            return ChainPlant(tuple(a), tuple(10.0 ** rng.uniform(-2, 0, 2)))


@pytest.mark.criterion(8)
def test_c8_exp_vs_series_oracle():
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(1000):
        p = _plant_with_separation(rng)
        T = rng.uniform(0.0, 50.0)
        err = np.abs(opitz_apply("exp", p, T) - expm_oracle(T * p.A)).max()
        worst = max(worst, err)
    print(f"max entrywise |exp(TA) - series| = {worst:.3g}")
    assert worst <= 1e-10


@pytest.mark.criterion(8)
def test_c8_mu_vs_fixed_point():
    rng = np.random.default_rng(88)
    worst = 0.0
    for _ in range(1000):
        p = _plant_with_separation(rng)
        T, lam = rng.uniform(0.5, 50.0), rng.uniform(10.0, 1000.0)
        X = fixed_point_analytic(p, CycleSpec(lam, T)).X
        # independent route: X solves (I - exp(TA)) X = exp(TA) lam B
        E = expm_oracle(T * p.A)
        ref = np.linalg.solve(np.eye(3) - E, E @ (lam * p.B))
        worst = max(worst, np.abs(X - ref).max() / np.abs(ref).max())
    print(f"max relative |mu(TA) lam B - X| = {worst:.3g}")
    assert worst <= 1e-10


@pytest.mark.criterion(9)
def test_c9_diagonalizer():
    rng = np.random.default_rng(9)
    for _ in range(100):
        p = random_plant(rng)
        S, Sinv = diagonalizer(p)
        M = Sinv @ p.A @ S
        assert np.abs(M - np.diag(np.diag(M))).max() <= 1e-12


@pytest.mark.criterion(9)
def test_c9_characteristic_factorization():
    rng = np.random.default_rng(99)
    worst = 0.0
    for _ in range(100):
        c = random_case(rng)
        prm = ScriptQParams(c.T, c.xi, c.eta)
        Q = script_Q(c.plant, prm)
        E = opitz_apply("exp", c.plant, c.T)
        poles = np.exp(-np.array(c.plant.rates) * c.T)
        zs = rng.uniform(-1.5, 1.5, 60)
        zs = [z for z in zs if np.min(np.abs(z - poles)) > 1e-3][:20]
        assert len(zs) == 20
        for z in zs:
            chi = np.linalg.det(z * np.eye(3) - Q)
            rhs = np.linalg.det(z * np.eye(3) - E) * w_modal(c.plant, prm, z)
            worst = max(worst, abs(chi - rhs))
    print(f"max |chi(z) - det(zI - exp(AT)) w(z)| = {worst:.3g}")
    assert worst <= 1e-9
