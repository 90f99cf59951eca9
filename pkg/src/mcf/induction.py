"""Exact win-lose induction on projective simplices.

Points live in the open simplex over the alphabet and are represented by
tuples of nonnegative ``Fraction`` (or int) coordinates.  A step at a vertex
compares the coordinates of the out-labels, declares the smallest one the
loser, follows the edge carrying the loser label and subtracts the loser
coordinate from every other out-label coordinate.  All comparisons are exact;
floating point never decides a branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .graph import GraphError, mat_identity, mat_mul


class BoundaryTieError(ArithmeticError):
    """Two competing coordinates were equal: the point sits on a cell wall."""


class HoleReachedError(RuntimeError):
    """The orbit entered a vertex with no out-edges."""


class MaxStepsExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class StepRecord:
    step: int
    vertex: str
    edge: int
    edge_label: str
    norm_ratio: Fraction  # mass left after the subtraction, in (0, 1)

    @property
    def roof(self):
        return -math.log(self.norm_ratio)

    def to_dict(self):
        return {
            "step": self.step,
            "vertex": self.vertex,
            "edge_label": self.edge_label,
            "roof_rational_num": self.norm_ratio.numerator,
            "roof_rational_den": self.norm_ratio.denominator,
        }


def normalize(point):
    total = sum(point)
    if total <= 0:
        raise GraphError("point must have positive total mass")
    return tuple(Fraction(x) / total for x in point)


def _loser(system, vertex, point):
    """Index of the losing out-edge, or a tie error."""
    out = system.out_edges(vertex)
    if not out:
        raise HoleReachedError(f"vertex {vertex!r} has no out-edges")
    best = None
    best_val = None
    tie = False
    for i in out:
        val = point[system.label_index[system.edges[i].label]]
        if best_val is None or val < best_val:
            best, best_val, tie = i, val, False
        elif val == best_val:
            tie = True
    if tie:
        raise BoundaryTieError(
            f"tied minimum {best_val} among out-labels of {vertex!r}"
        )
    if best_val <= 0:
        raise GraphError("point has a nonpositive competing coordinate")
    return best


def step(system, vertex, point, step_index=0):
    """One induction step.  Returns ``(new_vertex, new_point, record)``.

    The new point is renormalized to total mass 1; the record keeps the exact
    rational mass ratio whose negative logarithm is the roof increment.
    """
    point = tuple(Fraction(x) for x in point)
    i = _loser(system, vertex, point)
    e = system.edges[i]
    li = system.label_index[e.label]
    new = list(point)
    for j in system.out_edges(vertex):
        w = system.label_index[system.edges[j].label]
        if w != li:
            new[w] = new[w] - new[li]
    total = sum(point)
    ratio = Fraction(sum(new)) / total
    rec = StepRecord(step_index, vertex, i, e.label, ratio)
    return e.dst, normalize(new), rec


def orbit(system, vertex, point, n):
    """Iterate ``step`` n times; returns (vertex, point, [records])."""
    point = normalize(point)
    records = []
    for k in range(n):
        vertex, point, rec = step(system, vertex, point, k)
        records.append(rec)
    return vertex, point, records


def code_point(system, vertex, point, n):
    """Label sequence of the first n induction steps."""
    _, _, records = orbit(system, vertex, point, n)
    return tuple(r.edge_label for r in records)


def apply_edge_inverse(system, edge_index, point):
    """Exact ``point - loser`` update on the winner coordinates of one edge."""
    e = system.edges[edge_index]
    li = system.label_index[e.label]
    new = list(point)
    for j in system.out_edges(e.src):
        w = system.label_index[system.edges[j].label]
        if w != li:
            new[w] = new[w] - new[li]
    return tuple(new)


def in_cylinder(system, path, point):
    """Whether ``point`` belongs to the open cone spanned by a path's matrix.

    Equivalent to strict positivity of the pulled-back coordinates; the edge
    inverses are applied in path order.
    """
    system.check_path(path)
    cur = tuple(Fraction(x) for x in point)
    for i in path:
        cur = apply_edge_inverse(system, i, cur)
        if any(x <= 0 for x in cur):
            return False
    return True


def path_norm_ratio(system, path, point):
    """Exact mass ratio left after pulling ``point`` back through a path."""
    cur = tuple(Fraction(x) for x in point)
    total = sum(cur)
    for i in path:
        cur = apply_edge_inverse(system, i, cur)
    left = sum(cur)
    if left <= 0:
        raise GraphError("point is not in the cylinder of the path")
    return Fraction(left) / total


def induced_step(system, vertex, point, gamma_star, max_steps=10**6):
    """First-return step of the induction accelerated on a cylinder path.

    ``gamma_star`` is a loop of edge indices at ``vertex`` whose cylinder
    contains ``point``.  Steps forward until the coding shows the next aligned
    occurrence of ``gamma_star`` (greedy parse: the first occurrence starting
    at an index at least its length), and returns
    ``(new_point, return_word_labels, norm_ratio)`` where ``norm_ratio`` is
    the exact accelerated-roof rational of the consumed path.
    """
    m = len(gamma_star)
    star = tuple(system.edges[i].label for i in gamma_star)
    if not in_cylinder(system, gamma_star, point):
        raise GraphError("point is not in the inducing cylinder")
    coding = []
    v, p = vertex, normalize(point)
    consumed = []
    for k in range(max_steps):
        v, p, rec = step(system, v, p)
        coding.append(rec.edge_label)
        consumed.append(rec)
        if len(coding) >= 2 * m and tuple(coding[-m:]) == star:
            word = tuple(coding[m:-m])
            # The return point is the preimage of the last gamma_star block:
            # rewind by replaying all but the trailing m steps.
            n_keep = len(coding) - m
            v2, p2 = vertex, normalize(point)
            ratio = Fraction(1)
            for _ in range(n_keep):
                v2, p2, r2 = step(system, v2, p2)
                ratio *= r2.norm_ratio
            return p2, word, ratio
    raise MaxStepsExceeded(f"no return within {max_steps} steps")


def hilbert_distance(v, w):
    """Projective distance ``log (max_i v_i/w_i) / (min_i v_i/w_i)``."""
    if len(v) != len(w):
        raise GraphError("dimension mismatch")
    ratios = []
    for a, b in zip(v, w):
        if a <= 0 or b <= 0:
            return math.inf
        ratios.append(Fraction(a) / Fraction(b))
    return math.log(max(ratios) / min(ratios))


def birkhoff_contraction(matrix):
    """Contraction coefficient of a nonnegative matrix on the positive cone.

    ``tanh(D/4)`` with D the projective diameter of the image, i.e. the
    largest pairwise distance between columns.  Returns 1.0 when the matrix
    has a zero entry (no uniform contraction).
    """
    n = len(matrix)
    cols = [tuple(matrix[i][j] for i in range(n)) for j in range(n)]
    diam = 0.0
    for a in range(n):
        for b in range(a + 1, n):
            d = hilbert_distance(cols[a], cols[b])
            if d == math.inf:
                return 1.0
            diam = max(diam, d)
    return math.tanh(diam / 4.0)
