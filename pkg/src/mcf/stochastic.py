"""Distortion-vector walks, projective measures, and Monte Carlo estimators.

The law of a random path is driven by a positive row vector q: at each vertex
an out-edge is drawn with probability proportional to the q-coordinate of its
label, after which the loser coordinate is added to every winner coordinate
(q <- q M_e).  Cylinder masses of the projective measures come in exact
rational form; sampling engines exist in two flavors, an exact per-trial one
and a vectorized float one for large experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .graph import GraphError, vec_mat


def make_rng(seed, stream=None):
    """Counter-based generator; ``stream`` selects a per-trial substream."""
    key = [int(seed), 0 if stream is None else int(stream)]
    return np.random.Generator(np.random.Philox(key=key))


# -- exact samplers --------------------------------------------------------


def sample_simplex_integers(rng, n, bits=62, max_tries=1000):
    """Uniform composition of 2**bits into n positive parts (gap method)."""
    hi = 1 << bits
    for _ in range(max_tries):
        cuts = sorted(int(c) for c in rng.integers(1, hi, size=n - 1))
        parts = []
        prev = 0
        for c in cuts:
            parts.append(c - prev)
            prev = c
        parts.append(hi - prev)
        if all(p > 0 for p in parts):
            return tuple(parts)
    raise GraphError("failed to sample distinct cut points")


def sample_simplex_point(rng, n, bits=62):
    """Uniform dyadic point of the open simplex, as exact Fractions."""
    parts = sample_simplex_integers(rng, n, bits)
    hi = 1 << bits
    return tuple(Fraction(p, hi) for p in parts)


# -- measures --------------------------------------------------------------


def edge_law(system, vertex, q):
    """Exact probabilities of the out-edges at a vertex under distortion q."""
    out = system.out_edges(vertex)
    if not out:
        raise GraphError(f"vertex {vertex!r} is a hole")
    weights = [Fraction(q[system.label_index[system.edges[i].label]]) for i in out]
    total = sum(weights)
    if any(w <= 0 for w in weights):
        raise GraphError("q must be positive on the competing labels")
    return {i: w / total for i, w in zip(out, weights)}


def cylinder_measure(system, path, q):
    """Projective mass of a path cylinder: (1/n!) prod_i 1/(q M_gamma)_i."""
    n = system.dim
    qm = tuple(Fraction(c) for c in q)
    system.check_path(path)
    for i in path:
        qm = vec_mat(qm, system.edge_matrix(i))
    out = Fraction(1, math.factorial(n))
    for c in qm:
        if c <= 0:
            raise GraphError("q must be positive")
        out /= c
    return out


def path_probability(system, path, q):
    """Chance that a q-walk follows the given path: N(q)/N(q M_gamma)."""
    num = Fraction(1)
    den = Fraction(1)
    qm = tuple(Fraction(c) for c in q)
    system.check_path(path)
    for c in qm:
        num *= c
    for i in path:
        qm = vec_mat(qm, system.edge_matrix(i))
    for c in qm:
        den *= c
    return num / den


def is_balanced(q, labels_idx, k):
    """(Lambda, K)-balance: max over all coordinates < K * min over Lambda."""
    mx = max(q)
    mn = min(q[i] for i in labels_idx)
    return mx < k * mn


# -- stopping times --------------------------------------------------------


class StoppingTime:
    """Predicate on walk states, evaluated after every step."""

    def fired(self, walk):
        raise NotImplementedError


@dataclass(frozen=True)
class Jump(StoppingTime):
    tau: int

    def fired(self, walk):
        return max(walk.q) >= self.tau * walk.max_q0


@dataclass(frozen=True)
class JumpCoord(StoppingTime):
    label: str
    tau: int

    def fired(self, walk):
        i = walk.system.label_index[self.label]
        return walk.q[i] >= self.tau * walk.q0[i]


@dataclass(frozen=True)
class Win(StoppingTime):
    label: str

    def fired(self, walk):
        if walk.last_edge is None:
            return False
        e = walk.system.edges[walk.last_edge]
        return e.label != self.label and self.label in walk.system.out_labels(e.src)


@dataclass(frozen=True)
class Lose(StoppingTime):
    label: str

    def fired(self, walk):
        return (
            walk.last_edge is not None
            and walk.system.edges[walk.last_edge].label == self.label
        )


@dataclass(frozen=True)
class Escape(StoppingTime):
    """Some coordinate outside the label set catches the inside ones.

    The default compares current distortion on both sides; the "prose"
    variant compares against the initial inside minimum instead.
    """

    labels: tuple
    variant: str = "display"

    def fired(self, walk):
        sys_ = walk.system
        inside = {sys_.label_index[l] for l in self.labels}
        outside = [i for i in range(sys_.dim) if i not in inside]
        if not outside or not inside:
            raise GraphError("Escape needs a proper nonempty label set")
        lhs = max(walk.q[i] for i in outside)
        ref = walk.q if self.variant == "display" else walk.q0
        return lhs >= min(ref[i] for i in inside)


@dataclass(frozen=True)
class MinMax(StoppingTime):
    labels: tuple

    def fired(self, walk):
        sys_ = walk.system
        inside = [sys_.label_index[l] for l in self.labels]
        return min(walk.q[i] for i in inside) >= walk.max_q0


@dataclass(frozen=True)
class SuffixPattern(StoppingTime):
    labels: tuple

    def fired(self, walk):
        pat = tuple(self.labels)
        if len(walk.path) < len(pat):
            return False
        tail = walk.path[-len(pat):]
        return tuple(walk.system.edges[i].label for i in tail) == pat


@dataclass(frozen=True)
class LeaveSubgraph(StoppingTime):
    edges: frozenset

    def fired(self, walk):
        return walk.last_edge is not None and walk.last_edge not in self.edges


@dataclass(frozen=True)
class StepCount(StoppingTime):
    n: int

    def fired(self, walk):
        return walk.step >= self.n


@dataclass
class WalkState:
    system: object
    vertex: str
    q: tuple
    q0: tuple
    max_q0: object
    step: int = 0
    last_edge: int = None
    path: list = field(default_factory=list)


@dataclass
class WalkOutcome:
    path: list
    final_q: tuple
    fired_at: dict  # stop index -> first step at which it fired
    truncated: bool
    steps: int


def sample_walk(system, vertex, q0, stops, rng, max_steps=10**6):
    """Walk the q-law until every stopping time has fired (or truncation).

    ``rng`` may be a Generator or an integer seed.  Coordinates of q stay
    exact (integers stay integers); the random edge choice inverts the exact
    cumulative law at a dyadic uniform draw.
    """
    if isinstance(rng, (int, np.integer)):
        rng = make_rng(rng)
    q = tuple(Fraction(c) if not isinstance(c, int) else c for c in q0)
    if any(c <= 0 for c in q):
        raise GraphError("q0 must be positive")
    walk = WalkState(system, vertex, q, tuple(q), max(q))
    fired_at = {}
    for j, s in enumerate(stops):
        if s.fired(walk):
            fired_at[j] = 0
    while len(fired_at) < len(stops) and walk.step < max_steps:
        out = system.out_edges(walk.vertex)
        if not out:
            break
        law = edge_law(system, walk.vertex, walk.q)
        u = Fraction(int(rng.integers(0, 1 << 53)), 1 << 53)
        acc = Fraction(0)
        chosen = out[-1]
        for i in out:
            acc += law[i]
            if u < acc:
                chosen = i
                break
        e = system.edges[chosen]
        li = system.label_index[e.label]
        q = list(walk.q)
        # row-vector update q <- q M_e: the losing coordinate absorbs the
        # winners, everything else is unchanged
        q[li] = sum(q[system.label_index[system.edges[j].label]] for j in out)
        walk.q = tuple(q)
        walk.vertex = e.dst
        walk.last_edge = chosen
        walk.path.append(chosen)
        walk.step += 1
        for j, s in enumerate(stops):
            if j not in fired_at and s.fired(walk):
                fired_at[j] = walk.step
    truncated = len(fired_at) < len(stops)
    return WalkOutcome(walk.path, walk.q, fired_at, truncated, walk.step)


def estimate_order_prob(
    system,
    vertex,
    q0,
    stop_a,
    stop_b,
    trials,
    seed,
    max_steps=10**4,
    strict=False,
    engine="auto",
):
    """Monte Carlo frequency of {A fires no later than B} (or strictly before).

    Per-trial substreams are derived from (seed, trial index) in the exact
    engine; the batch engine consumes one deterministic stream per call.
    """
    if engine == "auto":
        engine = "batch" if _batch_supported([stop_a, stop_b]) else "exact"
    if engine == "batch":
        steps = batch_fire_steps(
            system, vertex, q0, [stop_a, stop_b], trials, seed, max_steps
        )
        a, b = steps[0], steps[1]
        both = (a >= 0) & (b >= 0)
        if strict:
            hits = both & (a < b)
            hits |= (a >= 0) & (b < 0)
        else:
            hits = both & (a <= b)
            hits |= (a >= 0) & (b < 0)
        truncated = int(((a < 0) | (b < 0)).sum())
        count = int(hits.sum())
    else:
        count = 0
        truncated = 0
        for t in range(trials):
            out = sample_walk(
                system, vertex, q0, [stop_a, stop_b], make_rng(seed, t), max_steps
            )
            fa = out.fired_at.get(0)
            fb = out.fired_at.get(1)
            if fa is None or fb is None:
                truncated += 1
            if fa is not None and (
                fb is None or (fa < fb if strict else fa <= fb)
            ):
                count += 1
    freq = count / trials
    stderr = math.sqrt(max(freq * (1 - freq), 1e-300) / trials)
    return {
        "trials": trials,
        "fired_counts": {"A": count},
        "truncated": truncated,
        "frequency": freq,
        "stderr": stderr,
        "seed": seed,
    }


# -- vectorized batch engine ----------------------------------------------


_BATCH_KINDS = (Jump, JumpCoord, Win, Lose, Escape, MinMax, StepCount)


def _batch_supported(stops):
    return all(isinstance(s, _BATCH_KINDS) for s in stops)


def _vertex_tables(system):
    tables = {}
    for v in system.vertices:
        out = system.out_edges(v)
        labs = np.array(
            [system.label_index[system.edges[i].label] for i in out], dtype=np.int64
        )
        dsts = np.array(
            [system.vertices.index(system.edges[i].dst) for i in out], dtype=np.int64
        )
        tables[system.vertices.index(v)] = (labs, dsts)
    return tables


def batch_fire_steps(system, vertex, q0, stops, trials, seed, max_steps, renorm=256):
    """First firing step of each stop for each trial; -1 when truncated.

    Float q with a per-trial log offset; comparisons against the initial
    distortion go through logarithms, so rescaling never changes a firing
    decision beyond float precision.
    """
    if not _batch_supported(stops):
        raise GraphError("stopping time not supported by the batch engine")
    n = system.dim
    rng = make_rng(seed)
    tables = _vertex_tables(system)
    v0 = system.vertices.index(vertex)
    q0f = np.array([float(c) for c in q0], dtype=np.float64)
    logq0 = np.log(q0f)
    q = np.tile(q0f, (trials, 1))
    logoff = np.zeros(trials)
    verts = np.full(trials, v0, dtype=np.int64)
    fired = np.full((len(stops), trials), -1, dtype=np.int64)
    active = np.ones(trials, dtype=bool)
    lose_label = np.full(trials, -1, dtype=np.int64)
    src_vertex = np.full(trials, -1, dtype=np.int64)
    # presence[v, a]: label a competes at vertex v
    presence = np.zeros((len(system.vertices), n), dtype=bool)
    for vi, v in enumerate(system.vertices):
        for lab in system.out_labels(v):
            presence[vi, system.label_index[lab]] = True

    for j, s in enumerate(stops):
        if isinstance(s, StepCount) and s.n <= 0:
            fired[j, :] = 0

    for step in range(1, max_steps + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        vsnap = verts[idx].copy()
        for v in np.unique(vsnap):
            labs, dsts = tables[int(v)]
            g = idx[vsnap == v]
            if labs.size == 0:
                active[g] = False
                continue
            qg = q[g][:, labs]
            cum = np.cumsum(qg, axis=1)
            u = rng.random(g.size) * cum[:, -1]
            choice = (u[:, None] >= cum).sum(axis=1)
            loser = labs[choice]
            q[g, loser] = cum[:, -1]
            verts[g] = dsts[choice]
            lose_label[g] = loser
            src_vertex[g] = v
        logq = np.log(np.maximum(q[idx], 1e-300)) + logoff[idx, None]
        for j, s in enumerate(stops):
            un = fired[j, idx] < 0
            if not un.any():
                continue
            sub = idx[un]
            lq = logq[un]
            if isinstance(s, Jump):
                hit = lq.max(axis=1) >= math.log(s.tau) + logq0.max()
            elif isinstance(s, JumpCoord):
                a = system.label_index[s.label]
                hit = lq[:, a] >= math.log(s.tau) + logq0[a]
            elif isinstance(s, Win):
                a = system.label_index[s.label]
                hit = (lose_label[sub] != a) & presence[src_vertex[sub], a]
            elif isinstance(s, Lose):
                a = system.label_index[s.label]
                hit = lose_label[sub] == a
            elif isinstance(s, Escape):
                inside = sorted(system.label_index[l] for l in s.labels)
                outside = [i for i in range(n) if i not in inside]
                lhs = lq[:, outside].max(axis=1)
                if s.variant == "display":
                    hit = lhs >= lq[:, inside].min(axis=1)
                else:
                    hit = lhs >= logq0[inside].min()
            elif isinstance(s, MinMax):
                inside = sorted(system.label_index[l] for l in s.labels)
                hit = lq[:, inside].min(axis=1) >= logq0.max()
            elif isinstance(s, StepCount):
                hit = np.full(sub.size, step >= s.n)
            fired[j, sub[hit]] = step
        active &= (fired < 0).any(axis=0)
        if step % renorm == 0:
            m = q.max(axis=1)
            logoff += np.log(m)
            q /= m[:, None]
    return fired


def batch_record_paths(system, vertex, q0, n_steps, trials, seed):
    """Label index sequences of the first n_steps of q-walks, vectorized."""
    rng = make_rng(seed)
    tables = _vertex_tables(system)
    v0 = system.vertices.index(vertex)
    q = np.tile(np.array([float(c) for c in q0]), (trials, 1))
    verts = np.full(trials, v0, dtype=np.int64)
    rec = np.full((trials, n_steps), -1, dtype=np.int64)
    for step in range(n_steps):
        vsnap = verts.copy()
        for v in np.unique(vsnap):
            labs, dsts = tables[int(v)]
            g = np.flatnonzero(vsnap == v)
            if labs.size == 0:
                continue
            qg = q[g][:, labs]
            cum = np.cumsum(qg, axis=1)
            u = rng.random(g.size) * cum[:, -1]
            choice = (u[:, None] >= cum).sum(axis=1)
            loser = labs[choice]
            q[g, loser] = cum[:, -1]
            verts[g] = dsts[choice]
            rec[g, step] = loser
    return rec


def batch_code_points(system, vertex, n_steps, trials, seed, bits=32):
    """Coding of uniformly sampled simplex points, exact and vectorized.

    Points are integer compositions of 2**bits; the subtractive update only
    ever decreases coordinates so int64 arithmetic stays exact.  Trials that
    hit a tie are marked with -2 from the tie step onward.
    """
    rng = make_rng(seed)
    hi = 1 << bits
    n = system.dim
    cuts = rng.integers(1, hi, size=(trials, n - 1))
    cuts.sort(axis=1)
    pts = np.diff(np.concatenate(
        [np.zeros((trials, 1), np.int64), cuts, np.full((trials, 1), hi, np.int64)],
        axis=1), axis=1)
    bad = (pts <= 0).any(axis=1)
    while bad.any():
        k = int(bad.sum())
        cuts = rng.integers(1, hi, size=(k, n - 1))
        cuts.sort(axis=1)
        pts[bad] = np.diff(np.concatenate(
            [np.zeros((k, 1), np.int64), cuts, np.full((k, 1), hi, np.int64)],
            axis=1), axis=1)
        bad = (pts <= 0).any(axis=1)

    tables = _vertex_tables(system)
    v0 = system.vertices.index(vertex)
    verts = np.full(trials, v0, dtype=np.int64)
    alive = np.ones(trials, dtype=bool)
    rec = np.full((trials, n_steps), -1, dtype=np.int64)
    for step in range(n_steps):
        idx = np.flatnonzero(alive)
        vsnap = verts[idx].copy()
        for v in np.unique(vsnap):
            labs, dsts = tables[int(v)]
            g = idx[vsnap == v]
            if labs.size == 0:
                alive[g] = False
                continue
            vals = pts[g][:, labs]
            order = vals.argsort(axis=1)
            lo = order[:, 0]
            tie = np.take_along_axis(vals, order[:, :2], axis=1)
            tied = tie[:, 0] == tie[:, 1] if labs.size > 1 else np.zeros(g.size, bool)
            if tied.any():
                rec[g[tied], step:] = -2
                alive[g[tied]] = False
                g = g[~tied]
                lo = lo[~tied]
            loser = labs[lo]
            lv = pts[g, loser]
            for k in range(labs.size):
                m = lo != k
                pts[g[m], labs[k]] -= lv[m]
            verts[g] = dsts[lo]
            rec[g, step] = loser
    return rec

