"""Reference computations that share no code path with the package."""

import math

import numpy as np


def cos_sum(coeffs, omega0, t):
    return sum(a * math.cos(n * omega0 * t) for n, a in enumerate(coeffs))


def phi_entrywise(n_max, omega0, T, M):
    return [[math.cos(n * omega0 * m * T) for n in range(n_max + 1)] for m in range(M)]


def sign0(v):
    return 1.0 if v >= 0 else -1.0


def hinge_loop(a, phi, y):
    total = 0.0
    for row, ym in zip(phi, y):
        z = sum(p * x for p, x in zip(row, a))
        total += max(0.0, -ym * z)
    return total


def central_difference(f, x, h):
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _signs(z):
    return np.where(z >= 0, 1.0, -1.0)


def one_sparse_oracle(phi, y, levels=None, amplitudes=None):
    """Exhaustive search over ``c * e_n`` for the support best matching `y`.

    For ZC (``levels is None``) candidates live on the unit sphere and the
    amplitude grid collapses to +-1. For LC every grid amplitude is tried
    against the stacked level signs (highest level first). Returns the set
    of support indices attaining the highest agreement, and that agreement.
    """
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float)
    if amplitudes is None:
        amplitudes = np.linspace(-1.0, 1.0, 1000) if levels is None else np.linspace(-2.0, 2.0, 1000)
    amplitudes = amplitudes[amplitudes != 0]
    if levels is None:
        amplitudes = amplitudes / np.abs(amplitudes)  # project to the unit sphere
        amplitudes = np.unique(amplitudes)
    best, support = -1.0, set()
    for n in range(phi.shape[1]):
        x = np.outer(amplitudes, phi[:, n])  # (grid, M)
        if levels is None:
            cand = _signs(x)
        else:
            desc = np.sort(np.asarray(levels, dtype=float))[::-1]
            cand = np.concatenate([_signs(x - lev) for lev in desc], axis=1)
        agree = float(np.max(np.mean(cand == y, axis=1)))
        if agree > best + 1e-12:
            best, support = agree, {n}
        elif abs(agree - best) <= 1e-12:
            support.add(n)
    return support, best
