"""Shared builders for the test suite: random rotations, screws, and words."""

import numpy as np

from margulis import (
    Dilation,
    MoebiusWord,
    Orthogonal,
    ScrewTranslation,
    Translation,
    UnitInversion,
)


def haar_rotation(rng, d):
    """Haar-ish random special orthogonal matrix from a QR factorization."""
    m = rng.standard_normal((d, d))
    q, r = np.linalg.qr(m)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def block_rotation(d, angles):
    """Rotation of R^d by the given angles on the leading 2-planes."""
    if 2 * len(angles) > d:
        raise ValueError("too many planes")
    A = np.eye(d)
    for k, th in enumerate(angles):
        c, s = np.cos(th), np.sin(th)
        A[2 * k:2 * k + 2, 2 * k:2 * k + 2] = [[c, -s], [s, c]]
    return A


def random_screw(rng, n, angles, conjugate=True, a_norm=None):
    """Screw translation of H^n rotating by `angles`, translating along the
    last boundary coordinate, optionally conjugated by a random rotation."""
    d = n - 1
    if 2 * len(angles) >= d:
        raise ValueError("no room left for the translation axis")
    A = block_rotation(d, angles)
    a = np.zeros(d)
    a[-1] = a_norm if a_norm is not None else rng.uniform(0.5, 2.0)
    if conjugate:
        U = haar_rotation(rng, d)
        A = U @ A @ U.T
        a = U @ a
    return ScrewTranslation(A, a)


def random_word(rng, n, length):
    """Random Moebius word with moderate parameters (no extreme scales)."""
    d = n - 1
    prims = []
    for _ in range(length):
        kind = int(rng.integers(4))
        if kind == 0:
            prims.append(Translation(rng.uniform(-2.0, 2.0, d)))
        elif kind == 1:
            prims.append(Orthogonal(haar_rotation(rng, d)))
        elif kind == 2:
            prims.append(Dilation(float(rng.uniform(0.5, 2.0))))
        else:
            prims.append(UnitInversion())
    return MoebiusWord(tuple(prims), n)


def inverting_word(rng, n):
    """Random word guaranteed to move infinity to a finite point."""
    d = n - 1
    factors = (
        Translation(rng.uniform(-3.0, 3.0, d)),
        UnitInversion(),
        Translation(rng.uniform(-3.0, 3.0, d)),
        Orthogonal(haar_rotation(rng, d)),
        Dilation(float(rng.uniform(0.5, 2.0))),
    )
    return MoebiusWord(factors, n)
