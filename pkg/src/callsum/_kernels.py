"""Numba-compiled Gibbs sampling inner loops.

Imported lazily by the topics module so the rest of the package never pays
JIT startup cost.  Randomness enters only through pre-generated uniform
arrays, keeping runs bit-reproducible regardless of numba's own RNG state.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def gibbs_sweep(tokens, doc_of, z, n_dk, n_kw, n_k, alpha, beta, uniforms):
    """One collapsed-Gibbs sweep over all tokens, updating counts in place.

    alpha is a per-topic prior vector: constant for LDA, alpha0 * tau for the
    truncated direct-assignment HDP sampler.
    """
    K = n_k.shape[0]
    V = n_kw.shape[1]
    vbeta = V * beta
    p = np.empty(K, dtype=np.float64)
    for i in range(tokens.shape[0]):
        w = tokens[i]
        d = doc_of[i]
        k = z[i]
        n_dk[d, k] -= 1
        n_kw[k, w] -= 1
        n_k[k] -= 1
        total = 0.0
        for t in range(K):
            score = (n_dk[d, t] + alpha[t]) * (n_kw[t, w] + beta) / (n_k[t] + vbeta)
            p[t] = score
            total += score
        r = uniforms[i] * total
        acc = 0.0
        knew = K - 1
        for t in range(K):
            acc += p[t]
            if r < acc:
                knew = t
                break
        z[i] = knew
        n_dk[d, knew] += 1
        n_kw[knew, w] += 1
        n_k[knew] += 1


@njit(cache=True)
def fold_in_sweep(tokens, z, m_k, phi, alpha, uniforms):
    """One fold-in sweep for a single document against fixed topic rows."""
    K = m_k.shape[0]
    p = np.empty(K, dtype=np.float64)
    for i in range(tokens.shape[0]):
        w = tokens[i]
        k = z[i]
        m_k[k] -= 1
        total = 0.0
        for t in range(K):
            score = (m_k[t] + alpha[t]) * phi[t, w]
            p[t] = score
            total += score
        r = uniforms[i] * total
        acc = 0.0
        knew = K - 1
        for t in range(K):
            acc += p[t]
            if r < acc:
                knew = t
                break
        z[i] = knew
        m_k[knew] += 1
