"""Shared test helpers: independent oracles kept deliberately naive."""

from itertools import product

import numpy as np
import pytest


def random_hermitian(rng, n):
    m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (m + m.conj().T) / 2.0


def loop_partial_trace(m, dims, keep):
    """Index-by-index contraction, independent of the reshape-based path."""
    da, db = dims
    if keep == "A":
        out = np.zeros((da, da), dtype=complex)
        for a1 in range(da):
            for a2 in range(da):
                for b in range(db):
                    out[a1, a2] += m[a1 * db + b, a2 * db + b]
        return out
    out = np.zeros((db, db), dtype=complex)
    for b1 in range(db):
        for b2 in range(db):
            for a in range(da):
                out[b1, b2] += m[a * db + b1, a * db + b2]
    return out


def loop_partial_transpose(m, dims):
    """Entry permutation over subsystem B, written as explicit loops."""
    da, db = dims
    out = np.zeros_like(m)
    for a1 in range(da):
        for a2 in range(da):
            for b1 in range(db):
                for b2 in range(db):
                    out[a1 * db + b1, a2 * db + b2] = m[a1 * db + b2, a2 * db + b1]
    return out


def classical_np_oracle(pw, px, n, eps):
    """Randomized Neyman-Pearson value by exhaustive enumeration.

    All n-fold outcomes are ranked by likelihood ratio; groups of equal
    ratio are accepted greedily with a fractional weight on the marginal
    group, which sweeps every randomized likelihood-ratio test.
    """
    outs = list(product(range(len(pw)), repeat=n))
    p = np.array([np.prod([pw[i] for i in o]) for o in outs])
    q = np.array([np.prod([px[i] for i in o]) for o in outs])
    with np.errstate(divide="ignore"):
        ratio = np.where(q > 0, p / np.where(q > 0, q, 1.0), np.inf)
    need = 1.0 - eps
    got, beta = 0.0, 0.0
    remaining = list(range(len(outs)))
    while remaining and got < need - 1e-15:
        rmax = max(ratio[j] for j in remaining)
        if np.isinf(rmax):
            grp = [j for j in remaining if np.isinf(ratio[j])]
        else:
            grp = [j for j in remaining if abs(ratio[j] - rmax) <= 1e-12 * max(1.0, rmax)]
        gp = float(sum(p[j] for j in grp))
        gq = float(sum(q[j] for j in grp))
        if got + gp <= need + 1e-15:
            got += gp
            beta += gq
        else:
            beta += (need - got) / gp * gq
            got = need
        remaining = [j for j in remaining if j not in grp]
    return beta


def random_channel(d, n_kraus, rng):
    """Random trace-preserving completely positive map via a Haar isometry."""
    z = rng.standard_normal((d * n_kraus, d)) + 1j * rng.standard_normal((d * n_kraus, d))
    v, _ = np.linalg.qr(z)
    kraus = [v[i * d:(i + 1) * d, :] for i in range(n_kraus)]

    def channel(x):
        return sum(a @ x @ a.conj().T for a in kraus)

    return channel, kraus


@pytest.fixture
def rng():
    return np.random.default_rng(20240813)
