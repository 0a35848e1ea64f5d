"""Covariant infocomplete measurements on ``C^d (x) C^d``.

Three families are covered, all processed with their canonical duals:

* ``LOCAL``:  ``P = U_g nu U_g^dag (x) U_h nu' U_h^dag``, ``g, h`` in SU(d)
* ``GLOBAL``: ``P = U_g nu U_g^dag``, ``g`` in SU(d^2)
* ``BELL``:   ``P = (U_g (x) I)|I>><<I|(U_g^dag (x) I)``, ``g`` in SU(d)

Group measures are normalised to the dimension they act on, which gives the
``total_measure`` stored on :class:`CovariantFamily`.  All closed forms are
functions of three invariants of ``O``::

    T = Tr[O^dag O],  t = Tr[O],  S = Tr[|Tr_1 O|^2] + Tr[|Tr_2 O|^2]
"""

from dataclasses import dataclass
import enum

import numpy as np

from .frames import SPAN_RTOL, DiscretePovm, FrameOperator
from .haar import EnsembleKind
from .opalg import DEFAULT_TOL, as_operator, hs_norm, is_unitary, partial_trace, pinv

__all__ = [
    "FamilyTag",
    "CovariantFamily",
    "NoiseBreakdown",
    "ComparisonReport",
    "NotInBellSupportError",
    "operator_invariants",
    "avg_sq_expectation",
    "first_term",
    "closed_form_noise",
    "noise_differences",
    "povm_and_dual_density",
    "family_densities",
    "bell_support_contains",
    "bell_support_residual",
    "comparison",
    "bell_frame_operator",
    "clifford_group",
    "discretize",
]


class FamilyTag(enum.Enum):
    LOCAL = "local"
    GLOBAL = "global"
    BELL = "bell"


class NotInBellSupportError(ValueError):
    """The operator has a partial trace not proportional to the identity."""

    def __init__(self, residual):
        super().__init__(f"not in Bell support (residual {residual:.3e})")
        self.residual = residual


def _pure_seed(seed, dim, name):
    if seed is None:
        seed = np.zeros((dim, dim), dtype=complex)
        seed[0, 0] = 1.0
    seed = as_operator(seed)
    if seed.shape[0] != dim:
        raise ValueError(f"{name} must act on dimension {dim}")
    if abs(np.trace(seed) - 1) > 1e-12 or abs(np.trace(seed @ seed) - 1) > 1e-12:
        raise ValueError(f"{name} must be a pure state (trace and purity 1)")
    if np.max(np.abs(seed - seed.conj().T)) > 1e-12:
        raise ValueError(f"{name} must be Hermitian")
    return seed


@dataclass(frozen=True, eq=False)
class CovariantFamily:
    tag: FamilyTag
    d: int
    seeds: tuple = ()

    @classmethod
    def local(cls, d, nu=None, nu_prime=None):
        return cls(FamilyTag.LOCAL, d, (_pure_seed(nu, d, "nu"), _pure_seed(nu_prime, d, "nu'")))

    @classmethod
    def global_(cls, d, nu=None):
        return cls(FamilyTag.GLOBAL, d, (_pure_seed(nu, d * d, "nu"),))

    @classmethod
    def bell(cls, d):
        return cls(FamilyTag.BELL, d, ())

    @classmethod
    def from_tag(cls, tag, d):
        tag = FamilyTag(tag)
        return {FamilyTag.LOCAL: cls.local, FamilyTag.GLOBAL: cls.global_,
                FamilyTag.BELL: cls.bell}[tag](d)

    @property
    def total_measure(self):
        return self.d if self.tag is FamilyTag.BELL else self.d ** 2

    @property
    def group_dims(self):
        """Dimension of each unitary needed to index one POVM element."""
        return {FamilyTag.LOCAL: (self.d, self.d), FamilyTag.GLOBAL: (self.d ** 2,),
                FamilyTag.BELL: (self.d,)}[self.tag]


@dataclass(frozen=True)
class NoiseBreakdown:
    first_term: float
    avg_sq: float
    total: float


@dataclass(frozen=True)
class ComparisonReport:
    glob_minus_bell: float
    loc_minus_glob: float
    loc_minus_bell: float
    bell_estimable: bool
    ordering: str
    ensemble: EnsembleKind


def _check_bipartite(op, d):
    op = as_operator(op)
    if op.shape[0] != d * d:
        raise ValueError(f"operator of size {op.shape[0]} does not act on C^{d} (x) C^{d}")
    return op


def operator_invariants(op, d):
    """``(T, |t|^2, S)`` as defined in the module docstring."""
    op = _check_bipartite(op, d)
    t_sq = abs(np.trace(op)) ** 2
    big_t = hs_norm(op) ** 2
    s = hs_norm(partial_trace(op, 1, d)) ** 2 + hs_norm(partial_trace(op, 2, d)) ** 2
    return big_t, t_sq, s


def avg_sq_expectation(kind, op, d):
    """Ensemble average of ``|Tr[O rho]|^2`` over pure input states.

    ``a``: all pure states, ``(T + |t|^2) / (d^2 (d^2 + 1))``.
    ``f``: product states, ``(T + |t|^2 + S) / (d^2 (d + 1)^2)``.
    ``e``: maximally entangled states; twirling the first factors of both
    copies leaves a symmetric and an antisymmetric sector::

        [(T + |t|^2 + S) / (d + 1) + (T + |t|^2 - S) / (d - 1)] / (2 d^3)
    """
    kind = EnsembleKind.parse(kind)
    big_t, t_sq, s = operator_invariants(op, d)
    if kind is EnsembleKind.ALL_PURE:
        return (big_t + t_sq) / (d ** 2 * (d ** 2 + 1))
    if kind is EnsembleKind.FACTORIZED:
        return (big_t + t_sq + s) / (d ** 2 * (d + 1) ** 2)
    return ((big_t + t_sq + s) / (d + 1) + (big_t + t_sq - s) / (d - 1)) / (2 * d ** 3)


def bell_support_residual(op, d):
    """Hilbert-Schmidt distance from ``op`` to ``span{I, V (x) W : Tr V = Tr W = 0}``."""
    op = _check_bipartite(op, d)
    eye = np.eye(d)
    tr = np.trace(op)
    a = partial_trace(op, 2, d) - tr / d * eye
    b = partial_trace(op, 1, d) - tr / d * eye
    return hs_norm(np.kron(a, eye) / d + np.kron(eye, b) / d)


def bell_support_contains(op, d, rtol=SPAN_RTOL):
    """``(inside, residual)``: both partial traces proportional to the identity?"""
    op = _check_bipartite(op, d)
    res = bell_support_residual(op, d)
    return bool(res <= rtol * max(hs_norm(op), 1.0)), res


def first_term(family, op):
    """POVM-dependent term ``(1/d^2) int dg |Tr[D_g^dag O]|^2 Tr[P_g]`` in closed form."""
    d = family.d
    big_t, t_sq, s = operator_invariants(op, d)
    if family.tag is FamilyTag.LOCAL:
        return ((d + 1) ** 2 * big_t + t_sq - (d + 1) * s) / d ** 2
    if family.tag is FamilyTag.GLOBAL:
        return ((d ** 2 + 1) * big_t - t_sq) / d ** 2
    inside, res = bell_support_contains(op, d)
    if not inside:
        raise NotInBellSupportError(res)
    return ((d ** 2 - 1) * big_t + t_sq) / d ** 2 - (d ** 2 - 1) / d ** 3 * s


def closed_form_noise(family, op, kind):
    """Ensemble-averaged estimation variance with the canonical dual."""
    ft = first_term(family, op)
    avg = avg_sq_expectation(kind, op, family.d)
    return NoiseBreakdown(ft, avg, ft - avg)


def noise_differences(op, d):
    """``(glob - bell, loc - glob, loc - bell)``; independent of the input ensemble."""
    big_t, t_sq, s = operator_invariants(op, d)
    glob_bell = 2 / d ** 2 * (big_t - t_sq) + (d ** 2 - 1) / d ** 3 * s
    loc_glob = 2 / d * (big_t + t_sq / d) - (d + 1) / d ** 2 * s
    loc_bell = 2 * (d + 1) / d ** 2 * big_t - (d + 1) / d ** 3 * s
    return glob_bell, loc_glob, loc_bell


def _chain(values, scale):
    # values: list of (name, noise); ties within 1e-12 relative print as "="
    ranked = sorted(values, key=lambda kv: kv[1])
    out = ranked[0][0]
    for (_, prev), (name, cur) in zip(ranked, ranked[1:]):
        out += (" = " if cur - prev <= 1e-12 * scale else " < ") + name
    return out


def comparison(op, kind, d):
    """Pairwise variance differences and the resulting ordering of the families."""
    kind = EnsembleKind.parse(kind)
    glob_bell, loc_glob, loc_bell = noise_differences(op, d)
    inside, _ = bell_support_contains(op, d)
    scale = max(operator_invariants(op, d)[0], 1.0)
    # relative positions only; ensemble term cancels
    values = [("global", 0.0), ("local", loc_glob)]
    if inside:
        values.append(("bell", -glob_bell))
    return ComparisonReport(glob_bell, loc_glob, loc_bell, inside, _chain(values, scale), kind)


def _projector_batch(vecs):
    return np.einsum("na,nb->nab", vecs, vecs.conj())


def _pure_vector(rho):
    vals, vecs = np.linalg.eigh(rho)
    return vecs[:, -1]


def family_densities(family, unitaries):
    """POVM and dual densities for a batch of group elements.

    ``unitaries`` is a tuple with one ``(n, k, k)`` array per entry of
    ``family.group_dims``.  Returns ``(P, D)``, each of shape ``(n, d^2, d^2)``.
    """
    d = family.d
    eye = np.eye(d * d)
    if family.tag is FamilyTag.LOCAL:
        ug, uh = unitaries
        a = _projector_batch(ug @ _pure_vector(family.seeds[0]))
        b = _projector_batch(uh @ _pure_vector(family.seeds[1]))
        n = a.shape[0]
        kron = lambda x, y: np.einsum("nij,nkl->nikjl", x, y).reshape(n, d * d, d * d)
        da = (d + 1) * a - np.eye(d)
        db = (d + 1) * b - np.eye(d)
        return kron(a, b), kron(da, db)
    if family.tag is FamilyTag.GLOBAL:
        (u,) = unitaries
        p = _projector_batch(u @ _pure_vector(family.seeds[0]))
        return p, (d * d + 1) * p - eye
    (u,) = unitaries
    # (U (x) I)|I>> = |U>>
    p = _projector_batch(u.reshape(u.shape[0], d * d))
    return p, (d * d - 1) / d * p - (d * d - 2) / d ** 2 * eye


def povm_and_dual_density(family, g):
    """``(P_g, D_g)`` for one group element (a pair ``(g, h)`` for ``LOCAL``)."""
    elems = tuple(g) if family.tag is FamilyTag.LOCAL else (g,)
    if len(elems) != len(family.group_dims):
        raise ValueError(f"{family.tag.value} family needs {len(family.group_dims)} unitaries")
    batch = []
    for u, k in zip(elems, family.group_dims):
        u = as_operator(u)
        if u.shape[0] != k or not is_unitary(u, 1e-10):
            raise ValueError(f"group element must be a {k}x{k} unitary")
        batch.append(u[None])
    p, dual = family_densities(family, tuple(batch))
    return p[0], dual[0]


def _reorder_13_24(op13, op24, d):
    """``op13 (x) op24`` with factors reordered to (1, 2, 3, 4)."""
    t = np.kron(op13, op24).reshape((d,) * 8)  # axes: 1 3 2 4 | 1' 3' 2' 4'
    return t.transpose(0, 2, 1, 3, 4, 6, 5, 7).reshape(d ** 4, d ** 4)


def bell_frame_operator(d, tol=DEFAULT_TOL):
    """Frame operator of the Bell family, ``d [J13 J24 + (I - J)13 (I - J)24 / (d^2 - 1)]``.

    ``J = |I>><<I| / d``; rank ``1 + (d^2 - 1)^2``.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    j = np.eye(d).reshape(-1)
    j = np.outer(j, j) / d
    q = np.eye(d * d) - j
    f = d * (_reorder_13_24(j, j, d) + _reorder_13_24(q, q, d) / (d * d - 1))
    f_pinv, rank = pinv(f, tol)
    return FrameOperator(d * d, f, rank, f @ f_pinv)


def _canonical_phase(u):
    flat = u.reshape(-1)
    k = np.flatnonzero(np.abs(flat) > 1e-9)[0]
    return u * (abs(flat[k]) / flat[k])


def clifford_group(d):
    """Single-qudit Clifford group modulo phases, for prime ``d``.

    Generated by the Fourier matrix and a quadratic phase gate; used as an
    exact unitary 2-design when discretising a covariant family.
    """
    if d < 2 or any(d % p == 0 for p in range(2, int(d ** 0.5) + 1)):
        raise ValueError(f"clifford_group needs a prime d, got {d}")
    w = np.exp(2j * np.pi / d)
    k = np.arange(d)
    fourier = w ** np.outer(k, k) / np.sqrt(d)
    phase = np.diag([1, 1j]) if d == 2 else np.diag(w ** (k * (k - 1) // 2))
    gens = [fourier, phase]
    key = lambda u: tuple(np.round(u.reshape(-1), 6).view(float))
    start = np.eye(d, dtype=complex)
    seen = {key(start): start}
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for gate in gens:
                v = _canonical_phase(gate @ u)
                kv = key(v)
                if kv not in seen:
                    seen[kv] = v
                    nxt.append(v)
        frontier = nxt
    return [seen[k] for k in sorted(seen)]


def discretize(family, unitaries):
    """Discrete POVM ``{w P_g}`` sampled at the given group elements.

    Each of the ``N`` elements carries weight ``w = total_measure / N``
    (``N`` pairs for ``LOCAL`` are all products of the list with itself).  The
    result is a POVM whenever ``unitaries`` is a unitary 1-design; the
    canonical dual of the discretisation equals ``D_g`` at the sampled points
    when it is a 2-design.
    """
    us = np.asarray(unitaries, dtype=complex)
    if family.tag is FamilyTag.LOCAL:
        n = us.shape[0]
        ug = np.repeat(us, n, axis=0)
        uh = np.tile(us, (n, 1, 1))
        p, _ = family_densities(family, (ug, uh))
    else:
        p, _ = family_densities(family, (us,))
    w = family.total_measure / p.shape[0]
    return DiscretePovm(w * p)
