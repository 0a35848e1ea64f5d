"""Seeded Haar unitaries and the three pure-state input ensembles."""

from dataclasses import dataclass, field
import enum

import numpy as np

__all__ = [
    "RngStream",
    "EnsembleKind",
    "haar_unitary",
    "haar_unitaries",
    "ensemble_vectors",
    "sample_ensemble_state",
]


@dataclass
class RngStream:
    """Reproducible random stream keyed by ``(seed, stream_id)``.

    Draws advance the stream.  Sub-streams for block-parallel work come from
    :meth:`block` and are independent of the stream's own position.
    """

    seed: int
    stream_id: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False, default=None)

    def generator(self):
        if self._gen is None:
            self._gen = np.random.Generator(np.random.PCG64(
                np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))))
        return self._gen

    def block(self, block_id):
        return np.random.Generator(np.random.PCG64(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, block_id))))


class EnsembleKind(enum.Enum):
    """Uniform ensembles of pure bipartite input states."""

    ALL_PURE = "a"
    FACTORIZED = "f"
    MAX_ENTANGLED = "e"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown ensemble {value!r}; expected one of a, f, e") from None


def _generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def haar_unitaries(d, n, rng):
    """Draw ``n`` Haar-random ``d x d`` unitaries, shape ``(n, d, d)``.

    Ginibre matrix -> QR, with the phases of ``diag(R)`` moved into ``Q`` so
    the result is exactly Haar distributed.
    """
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    gen = _generator(rng)
    z = (gen.standard_normal((n, d, d)) + 1j * gen.standard_normal((n, d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def haar_unitary(d, rng):
    return haar_unitaries(d, 1, rng)[0]


def ensemble_vectors(kind, d, n, rng):
    """State vectors on ``C^d (x) C^d`` drawn from an ensemble, shape ``(n, d*d)``."""
    kind = EnsembleKind.parse(kind)
    gen = _generator(rng)
    if kind is EnsembleKind.ALL_PURE:
        return haar_unitaries(d * d, n, gen)[:, :, 0]
    if kind is EnsembleKind.FACTORIZED:
        v1 = haar_unitaries(d, n, gen)[:, :, 0]
        v2 = haar_unitaries(d, n, gen)[:, :, 0]
        return np.einsum("ni,nj->nij", v1, v2).reshape(n, d * d)
    # (V (x) I)|I>>/sqrt(d) = |V>>/sqrt(d)
    v = haar_unitaries(d, n, gen)
    return v.reshape(n, d * d) / np.sqrt(d)


def sample_ensemble_state(kind, d, rng):
    """One density matrix on ``C^d (x) C^d`` drawn from ``kind``."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    psi = ensemble_vectors(kind, d, 1, rng)[0]
    return np.outer(psi, psi.conj())
