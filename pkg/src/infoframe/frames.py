"""Frames of operators, their duals, and the estimation noise of a POVM.

A frame is any finite family ``{P_i}`` of operators on ``C^d``.  Stacking
the double-kets as columns gives the synthesis map ``Lam`` (``d^2 x N``) with
``Lam[mn, i] = (P_i)_mn``.  The frame operator is ``F = Lam Lam^dag``.

A dual family ``{D_i}`` is stored the same way and fixes the data
processing: the estimate of ``<O>`` from outcome ``i`` is
``c_i = Tr[D_i^dag O]``.  The coefficient map ``Gam`` (``N x d^2``) has rows
``<<D_i|``, so that ``c = Gam |O>>``.
"""

from dataclasses import dataclass, field
import json

import numpy as np

from .opalg import (
    DEFAULT_TOL,
    as_operator,
    hs_norm,
    is_density_matrix,
    operator_from_json,
    operator_to_json,
    pinv,
)
from .haar import haar_unitaries

__all__ = [
    "SPAN_RTOL",
    "OperatorFrame",
    "DiscretePovm",
    "DualFrame",
    "FrameOperator",
    "Expansion",
    "frame_operator",
    "canonical_dual",
    "alternate_dual",
    "optimal_dual",
    "outcome_weights",
    "expansion_and_reconstruct",
    "noise_discrete",
    "random_povm",
    "qubit_sic_povm",
    "frame_to_json",
    "frame_from_json",
]

#: residual / ||O|| below this counts as "O lies in the span of the frame"
SPAN_RTOL = 1e-8


def _stack(elements):
    arr = np.asarray(elements, dtype=complex)
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2] or arr.shape[0] < 1:
        raise ValueError(f"expected a non-empty list of square operators, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class OperatorFrame:
    elements: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "elements", _stack(self.elements))

    @property
    def dim(self):
        return self.elements.shape[1]

    def __len__(self):
        return self.elements.shape[0]

    @property
    def synthesis(self):
        """``Lam`` with the double-kets ``|P_i>>`` as columns."""
        return self.elements.reshape(len(self), -1).T


class DiscretePovm(OperatorFrame):
    """A frame whose elements are positive and sum to the identity."""

    def __init__(self, elements, atol=1e-10):
        super().__init__(elements)
        for i, p in enumerate(self.elements):
            herm = 0.5 * (p + p.conj().T)
            if np.max(np.abs(p - herm)) > atol or np.linalg.eigvalsh(herm)[0] < -atol:
                raise ValueError(f"POVM element {i} is not positive semidefinite")
        total = self.elements.sum(axis=0)
        if np.max(np.abs(total - np.eye(self.dim))) > atol:
            raise ValueError("POVM elements do not sum to the identity")

    def probabilities(self, rho):
        """``Tr[P_i rho]`` for every outcome (real parts)."""
        return np.einsum("nij,ji->n", self.elements, as_operator(rho)).real


@dataclass(frozen=True, eq=False)
class DualFrame:
    elements: np.ndarray
    frame: OperatorFrame = field(repr=False)
    kind: str = "canonical"

    def __post_init__(self):
        object.__setattr__(self, "elements", _stack(self.elements))
        if self.elements.shape != self.frame.elements.shape:
            raise ValueError("dual and frame shapes differ")

    @property
    def dim(self):
        return self.elements.shape[1]

    def __len__(self):
        return self.elements.shape[0]

    @property
    def coefficient_map(self):
        """``Gam`` with rows ``<<D_i|``."""
        return self.elements.reshape(len(self), -1).conj()

    def coefficients(self, op):
        return self.coefficient_map @ as_operator(op).reshape(-1)


@dataclass(frozen=True, eq=False)
class FrameOperator:
    dim: int
    matrix: np.ndarray
    rank: int
    support_projector: np.ndarray

    @property
    def infocomplete(self):
        return self.rank == self.dim ** 2

    def eigenvalues(self):
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))


class Expansion:
    """Coefficients, reconstruction and residual of one operator expansion."""

    def __init__(self, coefficients, reconstruction, residual, norm):
        self.coefficients = coefficients
        self.reconstruction = reconstruction
        self.residual = residual
        self.norm = norm

    @property
    def in_span(self):
        return bool(self.residual <= SPAN_RTOL * max(self.norm, 1.0))

    def __iter__(self):
        return iter((self.coefficients, self.reconstruction, self.residual))


def frame_operator(frame, tol=DEFAULT_TOL):
    """``F = sum_i |P_i>><<P_i|`` with its numerical rank and support."""
    lam = frame.synthesis
    f = lam @ lam.conj().T
    f_pinv, rank = pinv(f, tol)
    return FrameOperator(frame.dim, f, rank, f @ f_pinv)


def canonical_dual(frame, tol=DEFAULT_TOL):
    """``|D_i>> = F^+ |P_i>>``; equals ``F^-1 |P_i>>`` for an infocomplete frame."""
    lam = frame.synthesis
    f_pinv, _ = pinv(lam @ lam.conj().T, tol)
    dual = (f_pinv @ lam).T.reshape(frame.elements.shape)
    return DualFrame(dual, frame, "canonical")


def alternate_dual(frame, canonical, y):
    """``D'_i = D_i + Y_i - sum_j Tr[P_j^dag D_i] Y_j`` for an arbitrary family ``Y``."""
    y = _stack(y)
    if y.shape != frame.elements.shape or canonical.elements.shape != frame.elements.shape:
        raise ValueError(
            f"Y has shape {y.shape}, frame has shape {frame.elements.shape}")
    n = len(frame)
    # overlaps[j, i] = Tr[P_j^dag D_i]
    overlaps = frame.elements.reshape(n, -1).conj() @ canonical.elements.reshape(n, -1).T
    shift = np.einsum("ji,jab->iab", overlaps, y)
    return DualFrame(canonical.elements + y - shift, frame, "alternate")


def outcome_weights(povm, rho_bar):
    """Prior outcome probabilities ``pi_ii = Tr[P_i rho_bar]``."""
    return povm.probabilities(rho_bar)


def optimal_dual(frame, weights, tol=DEFAULT_TOL):
    """Dual minimising ``sum_i pi_i |Tr[D_i^dag O]|^2`` for every ``O`` in the span.

    Uses ``Gam = Pi^-1 Lam^dag (Lam Pi^-1 Lam^dag)^+``.  Outcomes of zero
    weight are dropped and receive a zero dual element.
    """
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(frame),):
        raise ValueError(f"expected {len(frame)} weights, got shape {w.shape}")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and nonnegative")
    active = w > 0
    if not np.any(active):
        raise ValueError("all outcome weights are zero")
    lam = frame.synthesis[:, active]
    inv_w = 1.0 / w[active]
    m, _ = pinv((lam * inv_w) @ lam.conj().T, tol)
    gam = (inv_w[:, None] * lam.conj().T) @ m
    dual = np.zeros_like(frame.elements)
    dual[active] = gam.conj().reshape(-1, frame.dim, frame.dim)
    return DualFrame(dual, frame, "weighted")


def expansion_and_reconstruct(dual, op):
    """Expand ``op`` with ``c_i = Tr[D_i^dag O]`` and resynthesise ``sum_i c_i P_i``."""
    op = as_operator(op)
    if op.shape[0] != dual.dim:
        raise ValueError(f"operator dim {op.shape[0]} does not match frame dim {dual.dim}")
    c = dual.coefficients(op)
    recon = np.einsum("i,iab->ab", c, dual.frame.elements)
    return Expansion(c, recon, hs_norm(recon - op), hs_norm(op))


def noise_discrete(povm, dual, op, rho):
    """Single-shot variance ``sum_i |Tr[D_i^dag O]|^2 Tr[P_i rho] - |Tr[O rho]|^2``."""
    op, rho = as_operator(op), as_operator(rho)
    if not is_density_matrix(rho):
        raise ValueError("rho is not a density matrix")
    if op.shape != rho.shape or op.shape[0] != povm.dim:
        raise ValueError("dimension mismatch between POVM, operator and state")
    c = dual.coefficients(op)
    p = povm.probabilities(rho)
    return float(np.sum(np.abs(c) ** 2 * p) - abs(np.trace(op @ rho)) ** 2)


def _inv_sqrtm_psd(a):
    vals, vecs = np.linalg.eigh(a)
    return (vecs / np.sqrt(vals)) @ vecs.conj().T


def random_povm(d, n, rng):
    """Random rank-one POVM: ``P_i = A^-1/2 |psi_i><psi_i| A^-1/2`` with ``A = sum_i |psi_i><psi_i|``."""
    if n < d * d:
        raise ValueError(f"need at least d^2 = {d * d} outcomes for an infocomplete POVM, got {n}")
    psi = haar_unitaries(d, n, rng)[:, :, 0]
    a = psi.T @ psi.conj()
    s = _inv_sqrtm_psd(a)
    phi = psi @ s.T
    return DiscretePovm(np.einsum("na,nb->nab", phi, phi.conj()))


def qubit_sic_povm():
    """Tetrahedral SIC-POVM ``P_i = (I + n_i . sigma) / 4`` with ``n_0 = +z``."""
    r = np.sqrt(2.0)
    bloch = np.array([
        [0.0, 0.0, 1.0],
        [2 * r / 3, 0.0, -1 / 3],
        [-r / 3, np.sqrt(2 / 3), -1 / 3],
        [-r / 3, -np.sqrt(2 / 3), -1 / 3],
    ])
    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.diag([1.0 + 0j, -1.0])
    return DiscretePovm([(np.eye(2) + n[0] * sx + n[1] * sy + n[2] * sz) / 4 for n in bloch])


def frame_to_json(frame, kind=None):
    if kind is None:
        kind = frame.kind if isinstance(frame, DualFrame) else (
            "povm" if isinstance(frame, DiscretePovm) else "frame")
    return {
        "dim": int(frame.dim),
        "kind": kind,
        "elements": [operator_to_json(e) for e in frame.elements],
    }


def frame_from_json(obj):
    """Parse a frame encoding; ``kind == "povm"`` is validated as a POVM."""
    if isinstance(obj, (str, bytes)):
        obj = json.loads(obj)
    try:
        dim, kind, raw = int(obj["dim"]), obj.get("kind", "frame"), obj["elements"]
    except (KeyError, TypeError, AttributeError) as exc:
        raise ValueError(f"malformed frame encoding: {exc}") from None
    elements = [operator_from_json(e) for e in raw]
    if any(e.shape[0] != dim for e in elements):
        raise ValueError("frame element dimension disagrees with 'dim'")
    if kind == "povm":
        return DiscretePovm(elements)
    return OperatorFrame(elements)
