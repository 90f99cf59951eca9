"""Pressure estimation over accelerated loop systems and dimension bounds.

Acceleration on a positive loop turns the induction into a full shift over a
countable alphabet of return words.  Truncating that alphabet at a word
length L and summing spectral radii of n-fold products gives finite
approximations of the Gurevic-Sarig partition sums; the parameter kappa at
which the truncated pressure vanishes calibrates Hausdorff dimension bounds
for the surviving sets of subgraphs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import GraphError, find_positive_path, mat_identity, mat_mul

MEMORY_GUARD_FLOATS = 2 * 10**8


@dataclass
class Letter:
    word_labels: tuple  # labels of the return word w (possibly empty)
    word_edges: tuple
    matrix: tuple  # exact integer matrix of gamma_star . w


@dataclass
class PressureEstimate:
    kappa: float
    n: int
    L: int
    letters: int
    base_vertex: str
    gamma_star: tuple  # label sequence
    residual: float
    bracket: tuple
    restricted: bool = False

    def to_dict(self):
        return {
            "kappa": self.kappa,
            "n": self.n,
            "L": self.L,
            "letters": self.letters,
            "base_vertex": self.base_vertex,
            "gamma_star": list(self.gamma_star),
            "residual": self.residual,
            "bracket": list(self.bracket),
            "restricted": self.restricted,
        }


def _kmp_table(pattern):
    t = [0] * len(pattern)
    k = 0
    for i in range(1, len(pattern)):
        while k and pattern[i] != pattern[k]:
            k = t[k - 1]
        if pattern[i] == pattern[k]:
            k += 1
        t[i] = k
    return t


def loop_words(system, base, max_length, avoid, allowed_edges=None):
    """Loops at ``base`` (as edge index tuples) of length <= max_length that
    do not contain the edge sequence ``avoid`` as a factor.  Includes the
    empty loop.  Enumeration is depth-first in edge order."""
    avoid = tuple(avoid)
    table = _kmp_table(avoid) if avoid else []
    out = [()]
    stack = [(base, (), 0)]
    while stack:
        v, path, k = stack.pop()
        if len(path) == max_length:
            continue
        for i in reversed(system.out_edges(v)):
            if allowed_edges is not None and i not in allowed_edges:
                continue
            kk = k
            while kk and avoid[kk] != i:
                kk = table[kk - 1]
            if avoid and avoid[kk] == i:
                kk += 1
            if kk == len(avoid):
                continue  # extension would contain the forbidden factor
            e = system.edges[i]
            p2 = path + (i,)
            if e.dst == base:
                out.append(p2)
            stack.append((e.dst, p2, kk))
    return out


def build_induced_alphabet(system, gamma_star, max_length, allowed_edges=None,
                           max_letters=200000):
    """Return-word letters of the acceleration on the cylinder of gamma_star.

    Matrices always come from ``system`` even when the loops are confined to
    ``allowed_edges``; that is what restricting a larger ambient graph to a
    subgraph means for the roof.
    """
    system.check_path(gamma_star)
    base = system.edges[gamma_star[0]].src
    if system.edges[gamma_star[-1]].dst != base:
        raise GraphError("gamma_star must be a loop")
    m_star = system.path_matrix(gamma_star)
    if any(x == 0 for row in m_star for x in row):
        raise GraphError("gamma_star must have an entrywise positive matrix")
    words = loop_words(system, base, max_length, tuple(gamma_star), allowed_edges)
    if len(words) > max_letters:
        raise GraphError(
            f"induced alphabet has {len(words)} letters, above the guard "
            f"{max_letters}; lower L"
        )
    letters = []
    for w in words:
        m = m_star
        for i in w:
            m = mat_mul(m, system.edge_matrix(i))
        letters.append(Letter(system.path_labels(w), tuple(w), m))
    return letters


def perron_value(matrix, tol=1e-12, max_iter=100000):
    """log of the spectral radius of a nonnegative primitive matrix."""
    a = np.array(matrix, dtype=np.float64)
    scale = a.max()
    if scale <= 0:
        raise GraphError("matrix must be nonnegative and nonzero")
    a = a / scale
    d = a.shape[0]
    v = np.ones(d) / d
    for _ in range(max_iter):
        w = a @ v
        s = w.sum()
        if s <= 0:
            raise GraphError("matrix is not primitive on the positive cone")
        w /= s
        ratios = w / np.maximum(v, 1e-300)
        if ratios.max() - ratios.min() < tol * ratios.max():
            break
        v = w
    lam = (a @ w) .sum() / w.sum()
    return math.log(lam) + math.log(scale)


def _scaled_stack(letters):
    mats = np.array([l.matrix for l in letters], dtype=np.float64)
    scales = mats.max(axis=(1, 2))
    return mats / scales[:, None, None], np.log(scales)


def _batch_perron(stack, tol=1e-12, max_iter=500):
    n, d, _ = stack.shape
    v = np.ones((n, d)) / d
    lam = np.ones(n)
    for _ in range(max_iter):
        w = np.einsum("nij,nj->ni", stack, v)
        s = w.sum(axis=1)
        w /= s[:, None]
        r = w / np.maximum(v, 1e-300)
        if (r.max(axis=1) - r.min(axis=1)).max() < tol:
            v = w
            break
        v = w
    w = np.einsum("nij,nj->ni", stack, v)
    return w.sum(axis=1) / v.sum(axis=1)


def tuple_log_radii(letters, n):
    """log spectral radius of every n-fold product of letter matrices."""
    if not letters:
        raise GraphError("empty induced alphabet")
    k = len(letters)
    d = len(letters[0].matrix)
    if k**n * d * d > MEMORY_GUARD_FLOATS:
        raise GraphError(
            f"{k}^{n} tuple products exceed the memory guard; lower L or n"
        )
    base, base_log = _scaled_stack(letters)
    cur, cur_log = base, base_log
    for _ in range(n - 1):
        prod = np.einsum("aij,bjk->abik", cur, base).reshape(-1, d, d)
        log = (cur_log[:, None] + base_log[None, :]).reshape(-1)
        scale = prod.max(axis=(1, 2))
        cur = prod / scale[:, None, None]
        cur_log = log + np.log(scale)
    lam = _batch_perron(cur)
    return np.log(lam) + cur_log


def partition_sum(letters, n, kappa, log_radii=None):
    """(1/n) log Z_n at inverse dimension parameter kappa."""
    if log_radii is None:
        log_radii = tuple_log_radii(letters, n)
    x = -kappa * log_radii
    m = x.max()
    return (m + math.log(np.exp(x - m).sum())) / n


def solve_kappa(letters, n, bracket=(0.25, 16.0), tol=1e-9, log_radii=None):
    """Root of the truncated pressure in kappa, by bisection.

    The pressure is strictly decreasing in kappa, so a sign change over the
    bracket pins the root; the bracket endpoints are widened hints, not
    certificates.
    """
    if log_radii is None:
        log_radii = tuple_log_radii(letters, n)
    lo, hi = bracket
    flo = partition_sum(letters, n, lo, log_radii)
    fhi = partition_sum(letters, n, hi, log_radii)
    if flo < 0 or fhi > 0:
        raise GraphError(
            f"no pressure sign change over bracket {bracket}: "
            f"P({lo})={flo:.4g}, P({hi})={fhi:.4g}"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = partition_sum(letters, n, mid, log_radii)
        if abs(fm) < tol or hi - lo < 1e-13:
            lo = hi = mid
            break
        if fm > 0:
            lo = mid
        else:
            hi = mid
    kappa = 0.5 * (lo + hi)
    return kappa, partition_sum(letters, n, kappa, log_radii)


def pressure_analysis(system, max_length, n, base=None, gamma_star=None,
                      allowed_edges=None, bracket=(0.25, 16.0)):
    """End-to-end truncated pressure calibration.

    Finds a positive loop when none is given, builds the truncated induced
    alphabet, and solves for the zero of the truncated pressure.
    """
    if gamma_star is None:
        gamma_star = find_positive_path(
            system, start=base, allowed_edges=allowed_edges
        )
        if gamma_star is None:
            raise GraphError("no positive loop found")
    base = system.edges[gamma_star[0]].src
    letters = build_induced_alphabet(
        system, gamma_star, max_length, allowed_edges
    )
    log_radii = tuple_log_radii(letters, n)
    kappa, residual = solve_kappa(letters, n, bracket, log_radii=log_radii)
    return PressureEstimate(
        kappa=kappa,
        n=n,
        L=max_length,
        letters=len(letters),
        base_vertex=base,
        gamma_star=system.path_labels(gamma_star),
        residual=residual,
        bracket=tuple(bracket),
        restricted=allowed_edges is not None,
    )


def hausdorff_bound(kappa, alphabet_size):
    """Dimension bound of a surviving set from its pressure parameter."""
    return alphabet_size - 2 + kappa / alphabet_size


def asymptotic_gasket_bound(d):
    """Large-d upper bound for the d-dimensional gasket family."""
    return d - 1 + math.log(d) / (math.log(2) * (d + 1))
