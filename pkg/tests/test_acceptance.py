"""Exit criteria, one test per criterion, each at its pinned tolerance.

Run ``pytest tests/test_acceptance.py`` to get the per-criterion summary.
"""

import time

import numpy as np
import pytest

from infoframe.covariant import (
    CovariantFamily,
    avg_sq_expectation,
    bell_frame_operator,
    clifford_group,
    closed_form_noise,
    comparison,
    discretize,
)
from infoframe.frames import (
    alternate_dual,
    canonical_dual,
    expansion_and_reconstruct,
    frame_operator,
    noise_discrete,
    optimal_dual,
    outcome_weights,
    qubit_sic_povm,
    random_povm,
)
from infoframe.haar import EnsembleKind, RngStream
from infoframe.mcverify import estimate_expectation, mc_first_term, mc_noise, mc_twirl, simulate_shots
from infoframe.opalg import antisymmetric_projector, dket, symmetric_projector

from conftest import SZ, no_partial_traces, random_operator, record, unit

KINDS = list(EnsembleKind)


def families(d):
    return [CovariantFamily.local(d), CovariantFamily.global_(d), CovariantFamily.bell(d)]


def check_mc_agreement(criterion, op, expected):
    start = time.perf_counter()
    ok, details = True, []
    for i, (fam, exact) in enumerate(zip(families(2), expected)):
        cf = closed_form_noise(fam, op, "a").total
        est = mc_noise(fam, op, "a", 100_000, RngStream(2024, i))
        good = (abs(cf - exact) < 1e-12 and est.within(cf, atol=0.0)
                and abs(est.value - cf) <= 0.02 * abs(cf))
        ok &= good
        details.append(f"{fam.tag.value}={cf:.6g} mc={est.value:.4f}+-{est.stderr:.4f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    assert record(criterion, ok, "; ".join(details) + f" ({elapsed:.1f}s)")


def test_01_zero_noise_identity():
    start = time.perf_counter()
    worst = 0.0
    for d in (2, 3, 4):
        for fam in families(d):
            for kind in KINDS:
                worst = max(worst, abs(closed_form_noise(fam, np.eye(d * d), kind).total))
    elapsed = time.perf_counter() - start
    assert record(1, worst < 1e-12 and elapsed < 1.0, f"max |noise(I)| = {worst:.2e} ({elapsed * 1e3:.1f} ms)")


def test_02_flagship_comparison():
    check_mc_agreement(2, np.kron(SZ, SZ), (8.8, 4.8, 2.8))


def test_03_bell_projector_comparison():
    i2 = dket(np.eye(2))
    check_mc_agreement(3, np.outer(i2, i2) / 2, (1.65, 0.9, 0.525))


def test_04_inequality_chain():
    gen = np.random.default_rng(4)
    violations, total = 0, 0
    for d in (2, 3, 4):
        loc, glob, bell = families(d)
        for _ in range(200):
            o = no_partial_traces(gen, d)
            nb, ng, nl = (closed_form_noise(f, o, "a").total for f in (bell, glob, loc))
            violations += int(nb > ng + 1e-10 or ng > nl + 1e-10)
            total += 1
    assert record(4, violations == 0, f"{violations} violations in {total} operators")


def test_05_diagonal_matrix_elements():
    worst = 0.0
    for d in (2, 3):
        for i in range(d):
            for n in range(d):
                worst = max(worst, abs(comparison(np.kron(unit(d, i, i), unit(d, n, n)), "a", d).loc_minus_glob))
    assert record(5, worst < 1e-12, f"max |loc - glob| = {worst:.2e}")


def test_06_ensemble_average_relation():
    gen = np.random.default_rng(6)
    worst = 0.0
    for d in (2, 3):
        for _ in range(100):
            o = random_operator(gen, d * d)
            avg_e = avg_sq_expectation("e", o, d)
            avg_f = avg_sq_expectation("f", o, d)
            target = (d + 1) / (2 * d) * avg_f
            worst = max(worst, abs(avg_e - target) / abs(target))
    assert record(6, worst < 1e-12, f"max rel |avg_e - (d+1)/(2d) avg_f| = {worst:.3e}")


def test_07_schur_twirls():
    start = time.perf_counter()
    gen = np.random.default_rng(7)
    ok, worst = True, 0.0
    for d in (2, 3):
        x1 = random_operator(gen, d)
        est = mc_twirl(x1, 1, d, 100_000, RngStream(70, d))
        exp1 = np.trace(x1) * np.eye(d)
        ok &= est.within(exp1, atol=0.0)
        worst = max(worst, float(np.max(np.abs(est.value - exp1) / est.stderr)))
        x2 = random_operator(gen, d * d)
        ps, pa = symmetric_projector(d), antisymmetric_projector(d)
        exp2 = 2 / (d + 1) * np.trace(ps @ x2) * ps + 2 / (d - 1) * np.trace(pa @ x2) * pa
        est = mc_twirl(x2, 2, d, 100_000, RngStream(71, d))
        ok &= est.within(exp2, atol=0.0)
        worst = max(worst, float(np.max(np.abs(est.value - exp2) / est.stderr)))
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    assert record(7, ok, f"max |dev| / stderr = {worst:.2f} ({elapsed:.1f}s)")


def test_08_frame_machinery():
    worst = 0.0
    for d, sizes in ((2, range(4, 9)), (3, range(9, 13))):
        basis = [unit(d, i, j) for i in range(d) for j in range(d)]
        for k in range(100):
            n = sizes[k % len(sizes)]
            dual = canonical_dual(random_povm(d, n, RngStream(800 + d, k)))
            worst = max(worst, max(expansion_and_reconstruct(dual, o).residual for o in basis))
    sic = qubit_sic_povm()
    sic_err = np.abs(canonical_dual(sic).elements - (3 * 2 * sic.elements - np.eye(2))).max()
    spectra_ok = True
    for d in (2, 3):
        fop = bell_frame_operator(d)
        ev = np.sort(fop.eigenvalues())
        k = d ** 4 - fop.rank
        spectra_ok &= fop.rank == 1 + (d * d - 1) ** 2
        spectra_ok &= bool(np.allclose(ev[:k], 0, atol=1e-12)
                           and np.allclose(ev[k:-1], d / (d * d - 1), atol=1e-12)
                           and abs(ev[-1] - d) < 1e-12)
    sampled = frame_operator(discretize(CovariantFamily.bell(2), clifford_group(2)))
    spectra_ok &= sampled.rank == 10
    ok = worst < 1e-9 and sic_err < 1e-11 and spectra_ok
    assert record(8, ok, f"max residual {worst:.2e}; SIC dual err {sic_err:.2e}; "
                         f"Bell rank {bell_frame_operator(2).rank} (d=2), spectra ok={spectra_ok}")


def test_09_optimal_dual():
    gen = np.random.default_rng(9)
    ok, worst = True, 0.0
    for seed in range(10):
        povm = random_povm(2, 6, RngStream(900, seed))
        a = random_operator(gen, 2)
        rho_bar = a @ a.conj().T
        rho_bar /= np.trace(rho_bar)
        w = outcome_weights(povm, rho_bar)
        opt = optimal_dual(povm, w)
        lam, gam, pi = povm.synthesis, opt.coefficient_map, np.diag(w)
        gl = gam @ lam
        resid = max(np.abs(lam @ gam @ lam - lam).max(), np.abs(gam @ lam @ gam - gam).max(),
                    np.abs(pi @ gl - gl.conj().T @ pi).max(),
                    np.abs(pi @ gl - gl.conj().T @ pi @ gl).max())
        worst = max(worst, resid)
        uni = optimal_dual(povm, np.full(6, 1 / 6))
        ok &= np.abs(uni.elements - canonical_dual(povm).elements).max() < 1e-10
        for _ in range(50):
            y = np.array([random_operator(gen, 2) for _ in range(6)])
            alt = alternate_dual(povm, opt, y)
            o = random_operator(gen, 2)
            norm = lambda dual: np.sum(w * np.abs(dual.coefficients(o)) ** 2)
            ok &= norm(opt) <= norm(alt) + 1e-12
    ok &= worst < 1e-10
    assert record(9, ok, f"max g-inverse/weighted-condition residual {worst:.2e}")


def test_10_finite_shot_estimator():
    povm = qubit_sic_povm()
    dual = canonical_dual(povm)
    rho = np.diag([1.0 + 0j, 0.0])
    oracle = noise_discrete(povm, dual, SZ, rho)
    est = estimate_expectation(simulate_shots(povm, rho, 100_000, RngStream(10)), dual, SZ)
    ok = est.within(1.0, atol=0.0) and abs(est.sample_variance - 4.0) <= 0.05 * 4.0 and abs(oracle - 4.0) < 1e-12
    assert record(10, ok, f"mean {est.value:.4f}+-{est.stderr:.4f}, single-shot variance {est.sample_variance:.4f}")


@pytest.mark.parametrize("d", [2, 3])
def test_11_first_term_ensemble_independent(d):
    ok, details = True, []
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    o = np.kron(z, z.conj())
    for i, fam in enumerate(families(d)):
        ests = [mc_first_term(fam, o, 40_000, RngStream(1100 + d, 10 * i + j), kind=k)
                for j, k in enumerate(KINDS)]
        for a in range(3):
            for b in range(a + 1, 3):
                diff = abs(ests[a].value - ests[b].value)
                ok &= diff <= 3 * np.hypot(ests[a].stderr, ests[b].stderr)
        details.append(f"{fam.tag.value}: " + "/".join(f"{e.value:.3f}" for e in ests))
    assert record(f"11 d={d}", ok, "; ".join(details))
