"""Dense operator algebra on finite-dimensional Hilbert spaces.

Operators are plain complex ``numpy`` arrays of shape ``(n, n)`` written in a
fixed computational basis.  Transposition and complex conjugation are always
taken in that basis.

The double-ket map flattens an operator row-major::

    |O>> = sum_{m,n} <m|O|n> |m>|n>

so that ``dket(O) == O.reshape(-1)``.  With this convention

* ``(A kron B) @ dket(C) == dket(A @ C @ B.T)``
* ``Tr_1[|A>><<B|] == A.T @ B.conj()``
* ``Tr_2[|A>><<B|] == A @ B.conj().T``
"""

from dataclasses import dataclass
import math

import numpy as np

__all__ = [
    "Tolerance",
    "DEFAULT_TOL",
    "as_operator",
    "dket",
    "undket",
    "partial_trace",
    "pinv",
    "weyl_basis",
    "shift_operator",
    "clock_operator",
    "swap_operator",
    "symmetric_projector",
    "antisymmetric_projector",
    "hs_inner",
    "hs_norm",
    "is_hermitian",
    "is_psd",
    "is_unitary",
    "is_density_matrix",
    "operator_to_json",
    "operator_from_json",
]


@dataclass(frozen=True)
class Tolerance:
    """Numerical thresholds shared by the rank and equality tests.

    A singular value ``s`` is treated as nonzero iff
    ``s > rank_cutoff_factor * eps * max(shape) * s_max``.
    """

    rank_cutoff_factor: float = 10.0
    equality_abs: float = 1e-10

    def __post_init__(self):
        for name in ("rank_cutoff_factor", "equality_abs"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0, got {value!r}")

    def cutoff(self, shape, smax):
        return self.rank_cutoff_factor * np.finfo(float).eps * max(shape) * smax


DEFAULT_TOL = Tolerance()


def as_operator(x):
    """Coerce ``x`` to a square complex128 array."""
    op = np.asarray(x, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1] or op.shape[0] < 1:
        raise ValueError(f"operator must be a non-empty square matrix, got shape {op.shape}")
    return op


def dket(op):
    """Row-major vectorisation ``|O>>`` of an operator (a copy)."""
    return as_operator(op).reshape(-1).copy()


def undket(vec):
    """Inverse of :func:`dket`.

    :raises ValueError: if the length of ``vec`` is not a perfect square.
    """
    vec = np.asarray(vec, dtype=complex)
    if vec.ndim != 1:
        raise ValueError("undket expects a 1-d vector")
    n = math.isqrt(vec.size)
    if n * n != vec.size or n == 0:
        raise ValueError(f"vector length {vec.size} is not a perfect square")
    return vec.reshape(n, n).copy()


def partial_trace(x, subsystem, d):
    """Trace out subsystem 1 or 2 of an operator on ``C^d (x) C^d``."""
    x = as_operator(x)
    if x.shape[0] != d * d:
        raise ValueError(f"operator of size {x.shape[0]} does not act on a {d}x{d} bipartite space")
    t = x.reshape(d, d, d, d)
    if subsystem == 1:
        return np.einsum("ijik->jk", t)
    if subsystem == 2:
        return np.einsum("ijkj->ik", t)
    raise ValueError(f"subsystem must be 1 or 2, got {subsystem!r}")


def pinv(m, tol=DEFAULT_TOL):
    """Moore-Penrose pseudoinverse with an explicit rank cutoff.

    Returns ``(m_pinv, rank)``.
    """
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return np.zeros(m.shape[::-1], dtype=complex), 0
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    smax = s[0] if s.size else 0.0
    keep = s > tol.cutoff(m.shape, smax)
    rank = int(np.count_nonzero(keep))
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (vh.conj().T * s_inv) @ u.conj().T, rank


def shift_operator(d):
    """Cyclic shift ``X|j> = |j+1 mod d>``."""
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


def clock_operator(d):
    """``Z = diag(w^j)`` with ``w = exp(2 pi i / d)``."""
    return np.diag(np.exp(2j * np.pi * np.arange(d) / d))


def weyl_basis(d):
    """Shift-and-multiply operators ``X^a Z^b`` ordered by ``a * d + b``.

    Element 0 is the identity; all elements satisfy
    ``Tr[U_i^dag U_j] = d delta_ij``.
    """
    if d < 2:
        raise ValueError(f"weyl_basis needs d >= 2, got {d}")
    x, z = shift_operator(d), clock_operator(d)
    out = []
    for a in range(d):
        xa = np.linalg.matrix_power(x, a)
        for b in range(d):
            out.append(xa @ np.linalg.matrix_power(z, b))
    return out


def swap_operator(d):
    """Swap ``E|phi>|psi> = |psi>|phi>`` on ``C^d (x) C^d``."""
    e = np.zeros((d, d, d, d), dtype=complex)
    idx = np.arange(d)
    e[idx[:, None], idx[None, :], idx[None, :], idx[:, None]] = 1.0
    return e.reshape(d * d, d * d)


def symmetric_projector(d):
    return 0.5 * (np.eye(d * d) + swap_operator(d))


def antisymmetric_projector(d):
    return 0.5 * (np.eye(d * d) - swap_operator(d))


def hs_inner(a, b):
    """Hilbert-Schmidt product ``Tr[a^dag b]``."""
    return np.vdot(np.asarray(a).reshape(-1), np.asarray(b).reshape(-1))


def hs_norm(a):
    return float(np.linalg.norm(np.asarray(a).reshape(-1)))


def is_hermitian(a, atol=1e-10):
    a = as_operator(a)
    return bool(np.max(np.abs(a - a.conj().T)) <= atol)


def is_psd(a, atol=1e-10):
    a = as_operator(a)
    if not is_hermitian(a, atol):
        return False
    return bool(np.linalg.eigvalsh(0.5 * (a + a.conj().T))[0] > -atol)


def is_unitary(a, atol=1e-10):
    a = as_operator(a)
    return bool(np.max(np.abs(a @ a.conj().T - np.eye(a.shape[0]))) <= atol)


def is_density_matrix(a, atol=1e-10):
    a = as_operator(a)
    return is_psd(a, atol) and abs(np.trace(a) - 1.0) <= atol


def operator_to_json(op):
    """Encode as ``{"dim": n, "entries": [[re, im], ...]}`` (row-major)."""
    op = as_operator(op)
    return {
        "dim": int(op.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in op.reshape(-1)],
    }


def operator_from_json(obj):
    try:
        dim = int(obj["dim"])
        entries = obj["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed operator encoding: {exc}") from None
    if dim < 1 or len(entries) != dim * dim:
        raise ValueError(f"operator encoding has {len(entries)} entries for dim {dim}")
    flat = np.array([complex(re, im) for re, im in entries], dtype=complex)
    return flat.reshape(dim, dim)
