"""Monte Carlo estimates of the group integrals and finite-shot simulation.

Samples are split into fixed-size blocks; block ``b`` draws from
``rng.block(b)`` and partial sums are reduced in block order.  Results
depend on ``(seed, stream_id, n, block_size)`` only, never on ``workers``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .covariant import (
    FamilyTag,
    NotInBellSupportError,
    avg_sq_expectation,
    bell_support_contains,
    family_densities,
)
from .haar import EnsembleKind, ensemble_vectors, haar_unitaries
from .opalg import as_operator, is_density_matrix

__all__ = [
    "DEFAULT_BLOCK_SIZE",
    "McEstimate",
    "ShotRecord",
    "mc_first_term",
    "mc_noise",
    "mc_avg_sq",
    "mc_twirl",
    "simulate_shots",
    "estimate_expectation",
]

DEFAULT_BLOCK_SIZE = 10_000


@dataclass(frozen=True, eq=False)
class McEstimate:
    """Sample mean with standard error ``std(ddof=1) / sqrt(n)``.

    ``value`` and ``stderr`` are arrays for matrix-valued estimates; for
    complex samples ``stderr`` is the standard error of the complex mean.
    """

    value: object
    stderr: object
    n_samples: int

    @property
    def sample_variance(self):
        return np.asarray(self.stderr) ** 2 * self.n_samples

    def within(self, expected, k=3.0, atol=1e-12):
        """``|value - expected| <= k * stderr + atol`` (entrywise)."""
        return bool(np.all(np.abs(np.asarray(self.value) - expected)
                           <= k * np.asarray(self.stderr) + atol))


@dataclass(frozen=True)
class ShotRecord:
    counts: dict
    shots: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.shots:
            raise ValueError("counts do not sum to shots")


def _blocks(n, block_size):
    if block_size < 1:
        raise ValueError("block_size must be >= 1")
    full, rest = divmod(n, block_size)
    sizes = [block_size] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def _estimate(sampler, n, rng, block_size, workers):
    """Reduce ``sampler(generator, size) -> (size, ...)`` samples block by block."""
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")

    def run(block):
        block_id, size = block
        x = sampler(rng.block(block_id), size)
        return x.sum(axis=0), (np.abs(x) ** 2).sum(axis=0)

    blocks = _blocks(n, block_size)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    total = sum(p[0] for p in parts)
    total_sq = sum(p[1] for p in parts)
    mean = total / n
    var = np.maximum(total_sq - n * np.abs(mean) ** 2, 0.0) / (n - 1)
    return mean, np.sqrt(var / n)


def _draw_group(family, gen, size):
    return tuple(haar_unitaries(k, size, gen) for k in family.group_dims)


def mc_first_term(family, op, n, rng, kind=None, block_size=DEFAULT_BLOCK_SIZE, workers=1):
    """Haar estimate of the POVM-dependent term of the noise.

    Without ``kind`` the integrand is ``|Tr[D_g^dag O]|^2 Tr[P_g]`` scaled by
    ``total_measure / d^2``.  With ``kind``, an input state is drawn from the
    ensemble alongside each group element and ``Tr[P_g]/d^2`` is replaced by
    ``Tr[P_g rho]``, so the estimate follows the ensemble it is averaged over.
    """
    op = as_operator(op)
    d = family.d
    if family.tag is FamilyTag.BELL:
        inside, res = bell_support_contains(op, d)
        if not inside:
            raise NotInBellSupportError(res)
    kind = None if kind is None else EnsembleKind.parse(kind)
    scale = family.total_measure

    def sampler(gen, size):
        p, dual = family_densities(family, _draw_group(family, gen, size))
        c = np.einsum("nij,ij->n", dual.conj(), op)
        if kind is None:
            weight = np.einsum("nii->n", p).real / d ** 2
        else:
            psi = ensemble_vectors(kind, d, size, gen)
            weight = np.einsum("ni,nij,nj->n", psi.conj(), p, psi).real
        return scale * np.abs(c) ** 2 * weight

    mean, err = _estimate(sampler, n, rng, block_size, workers)
    return McEstimate(float(mean), float(err), n)


def mc_noise(family, op, kind, n, rng, block_size=DEFAULT_BLOCK_SIZE, workers=1):
    """Monte Carlo first term minus the closed-form ensemble term."""
    est = mc_first_term(family, op, n, rng, block_size=block_size, workers=workers)
    avg = avg_sq_expectation(kind, op, family.d)
    return McEstimate(est.value - avg, est.stderr, n)


def mc_avg_sq(kind, op, d, n, rng, block_size=DEFAULT_BLOCK_SIZE, workers=1):
    """Sampled ``|Tr[O rho]|^2`` over an input ensemble."""
    op = as_operator(op)

    def sampler(gen, size):
        psi = ensemble_vectors(kind, d, size, gen)
        return np.abs(np.einsum("ni,ij,nj->n", psi.conj(), op, psi)) ** 2

    mean, err = _estimate(sampler, n, rng, block_size, workers)
    return McEstimate(float(mean), float(err), n)


def mc_twirl(x, order, d, n, rng, block_size=DEFAULT_BLOCK_SIZE, workers=1):
    """``d * mean(U X U^dag)`` (order 1) or ``d * mean(U^(x)2 X U^dag(x)2)`` (order 2)."""
    x = as_operator(x)
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if x.shape[0] != d ** order:
        raise ValueError(f"order-{order} twirl needs a {d ** order}-dim operator")

    def sampler(gen, size):
        u = haar_unitaries(d, size, gen)
        if order == 2:
            u = np.einsum("nij,nkl->nikjl", u, u).reshape(size, d * d, d * d)
        return d * (u @ x @ u.conj().transpose(0, 2, 1))

    mean, err = _estimate(sampler, n, rng, block_size, workers)
    return McEstimate(mean, err, n)


def simulate_shots(povm, rho, shots, rng):
    """Draw ``shots`` outcomes with probabilities ``Tr[P_i rho]``."""
    rho = as_operator(rho)
    if not is_density_matrix(rho):
        raise ValueError("rho is not a density matrix")
    p = povm.probabilities(rho)
    if abs(p.sum() - 1.0) > 1e-10:
        raise ValueError(f"outcome probabilities sum to {p.sum()!r}")
    p = np.clip(p, 0.0, None)
    gen = rng.generator() if hasattr(rng, "generator") else rng
    counts = gen.multinomial(shots, p / p.sum())
    return ShotRecord({i: int(c) for i, c in enumerate(counts) if c}, int(shots))


def estimate_expectation(record, dual, op):
    """Sample mean of ``c_i = Tr[D_i^dag O]`` over the recorded outcomes."""
    if record.shots < 2:
        raise ValueError("need at least 2 shots")
    c = dual.coefficients(op)
    idx = np.fromiter(record.counts.keys(), dtype=int)
    cnt = np.fromiter(record.counts.values(), dtype=float)
    vals = c[idx]
    mean = np.sum(cnt * vals) / record.shots
    var = np.sum(cnt * np.abs(vals - mean) ** 2) / (record.shots - 1)
    value = float(mean.real) if np.allclose(c.imag, 0.0, atol=1e-12) else complex(mean)
    return McEstimate(value, float(np.sqrt(var / record.shots)), record.shots)
