"""Single-qubit Clifford group as 24 indexed 2x2 unitaries.

Index 0 is the identity. Indices follow breadth-first order over the
generators ``H`` and ``S``. Global phase is ignored throughout.
"""
from __future__ import annotations

import numpy as np

__all__ = ["N_CLIFFORD", "IDENTITY", "UNITARIES", "clifford_compose",
           "clifford_inverse", "find_clifford", "same_up_to_phase"]

N_CLIFFORD = 24
IDENTITY = 0

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)


def same_up_to_phase(a: np.ndarray, b: np.ndarray, atol: float = 1e-9) -> bool:
    """True if ``a == e^{i phi} b`` for some phase."""
    # |tr(a^dag b)| = 2 iff the unitaries agree up to phase
    return abs(abs(np.trace(a.conj().T @ b)) - 2.0) < atol


def _canonical(u: np.ndarray) -> np.ndarray:
    flat = u.ravel()
    k = np.flatnonzero(np.abs(flat) > 1e-9)[0]
    return u * (abs(flat[k]) / flat[k])


def _generate() -> tuple:
    elems = [np.eye(2, dtype=complex)]
    frontier = [elems[0]]
    while frontier:
        nxt = []
        for u in frontier:
            for g in (_H, _S):
                v = _canonical(g @ u)
                if not any(same_up_to_phase(v, w) for w in elems):
                    elems.append(v)
                    nxt.append(v)
        frontier = nxt
    assert len(elems) == N_CLIFFORD
    return tuple(elems)


UNITARIES = _generate()
for _u in UNITARIES:
    _u.setflags(write=False)


def find_clifford(u: np.ndarray) -> int:
    """Index of the group element equal to ``u`` up to phase."""
    for i, w in enumerate(UNITARIES):
        if same_up_to_phase(u, w):
            return i
    raise ValueError("matrix is not a single-qubit Clifford")


def _tables():
    compose = np.empty((N_CLIFFORD, N_CLIFFORD), dtype=np.int8)
    for a in range(N_CLIFFORD):
        for b in range(N_CLIFFORD):
            compose[a, b] = find_clifford(UNITARIES[b] @ UNITARIES[a])
    inverse = np.array([int(np.flatnonzero(compose[a] == IDENTITY)[0])
                        for a in range(N_CLIFFORD)], dtype=np.int8)
    compose.setflags(write=False)
    inverse.setflags(write=False)
    return compose, inverse


COMPOSE_TABLE, INVERSE_TABLE = _tables()


def clifford_compose(a: int, b: int) -> int:
    """Element equal to applying ``a`` first and then ``b``."""
    return int(COMPOSE_TABLE[a, b])


def clifford_inverse(a: int) -> int:
    return int(INVERSE_TABLE[a])


X_INDEX = find_clifford(np.array([[0, 1], [1, 0]], dtype=complex))
