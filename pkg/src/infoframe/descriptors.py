"""Textual operator descriptors for bipartite operators on ``C^d (x) C^d``.

==========================  =================================================
``pauli:ZZ``                tensor product of I, X, Y, Z (``d = 2`` only)
``weyl:a,bxc,e``            ``X^a Z^b (x) X^c Z^e``
``matelem:i,j,n,m``         ``|i><j| (x) |n><m|``
``bellproj:k``              ``|V_k>><<V_k| / d``, ``V_k`` the k-th Weyl operator
``belloffdiag:k,l``         ``|V_k>><<V_l| / d``
``file:path``               operator JSON file
==========================  =================================================
"""

import json

import numpy as np

from .opalg import operator_from_json, shift_operator, clock_operator, weyl_basis

__all__ = ["DescriptorError", "parse_operator"]

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.diag([1.0 + 0j, -1.0]),
}


class DescriptorError(ValueError):
    def __init__(self, descriptor, token, reason):
        super().__init__(f"bad operator descriptor {descriptor!r}: {reason} (offending token {token!r})")
        self.descriptor = descriptor
        self.token = token


def _ints(desc, body, count, limit):
    parts = body.split(",")
    if len(parts) != count:
        raise DescriptorError(desc, body, f"expected {count} comma-separated integers")
    out = []
    for p in parts:
        try:
            v = int(p)
        except ValueError:
            raise DescriptorError(desc, p, "not an integer") from None
        if not 0 <= v < limit:
            raise DescriptorError(desc, p, f"index out of range [0, {limit})")
        out.append(v)
    return out


def parse_operator(desc, d):
    """Build the ``d^2 x d^2`` operator named by ``desc``."""
    head, sep, body = desc.partition(":")
    if not sep:
        raise DescriptorError(desc, desc, "missing ':'")
    if head == "pauli":
        if d != 2:
            raise DescriptorError(desc, head, "pauli descriptors need --dim 2")
        if len(body) != 2:
            raise DescriptorError(desc, body, "expected two Pauli letters")
        for ch in body:
            if ch not in _PAULI:
                raise DescriptorError(desc, ch, "invalid Pauli letter")
        return np.kron(_PAULI[body[0]], _PAULI[body[1]])
    if head == "weyl":
        halves = body.split("x")
        if len(halves) != 2:
            raise DescriptorError(desc, body, "expected two factors separated by 'x'")
        x, z = shift_operator(d), clock_operator(d)
        factors = []
        for half in halves:
            a, b = _ints(desc, half, 2, d)
            factors.append(np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b))
        return np.kron(*factors)
    if head == "matelem":
        i, j, n, m = _ints(desc, body, 4, d)
        a = np.zeros((d, d), dtype=complex)
        b = np.zeros((d, d), dtype=complex)
        a[i, j] = 1.0
        b[n, m] = 1.0
        return np.kron(a, b)
    if head in ("bellproj", "belloffdiag"):
        k, l = (_ints(desc, body, 1, d * d) * 2) if head == "bellproj" else _ints(desc, body, 2, d * d)
        basis = weyl_basis(d)
        return np.outer(basis[k].reshape(-1), basis[l].reshape(-1).conj()) / d
    if head == "file":
        try:
            with open(body) as fh:
                op = operator_from_json(json.load(fh))
        except (OSError, ValueError) as exc:
            raise DescriptorError(desc, body, str(exc)) from None
        if op.shape[0] != d * d:
            raise DescriptorError(desc, body, f"operator has dim {op.shape[0]}, expected {d * d}")
        return op
    raise DescriptorError(desc, head, "unknown descriptor kind")
