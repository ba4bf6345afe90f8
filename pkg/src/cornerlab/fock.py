"""Small fermionic Fock-space helpers shared by the toy models."""

from __future__ import annotations

from functools import lru_cache

import numpy as np

_Z = np.diag([1.0, -1.0]).astype(complex)
_ANNIHILATE = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


@lru_cache(maxsize=None)
def jw_annihilators(n_modes: int) -> tuple[np.ndarray, ...]:
    """Jordan-Wigner annihilation operators on the 2**n_modes Fock space.

    Basis index bit k (most significant first) is the occupation of mode k.
    """
    ops = []
    for k in range(n_modes):
        mats = [_Z] * k + [_ANNIHILATE] + [np.eye(2, dtype=complex)] * (n_modes - k - 1)
        m = np.array([[1.0]], dtype=complex)
        for factor in mats:
            m = np.kron(m, factor)
        m.setflags(write=False)
        ops.append(m)
    return tuple(ops)


def number_op(n_modes: int, k: int) -> np.ndarray:
    c = jw_annihilators(n_modes)[k]
    return c.conj().T @ c


def majorana_pair(n_modes: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """(gamma_A, gamma_B) of mode k with c = (gamma_A + i gamma_B)/2."""
    c = jw_annihilators(n_modes)[k]
    cd = c.conj().T
    return c + cd, 1j * (cd - c)
