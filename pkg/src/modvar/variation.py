"""Variation norms, jump counting, and the metric chaining cover.

The r-variation of a finite sequence is the supremum of
(sum_k |a_{N_k} - a_{N_{k-1}}|^r)^(1/r) over increasing subsequences.  The
supremum is computed exactly by dynamic programming over end indices; a
brute-force enumerator over all subsequences serves as an oracle at small
lengths.  Vector-valued sequences use l2 increments throughout.

Jump counting asks for the longest chain of times whose consecutive values
differ by at least tau.  A greedy scan is NOT maximal for this problem
(witness values [5, 0, 10] with tau 10: the greedy chain from the first
element is empty, but 0 -> 10 jumps once), so the count uses the same
O(n^2) dynamic program as the variation norm.

The chaining cover organizes the sequence values into greedy 2^-v nets at
dyadic resolutions, each center pointing at a parent in the next coarser
net; telescoping the parent chain reconstructs every value exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .util import DomainError

MAX_DP_LENGTH = 4096
MAX_BRUTE_LENGTH = 18
COVER_RESOLUTION = 1e-6


@dataclass(frozen=True)
class VecSequence:
    """Vectors over a common coordinate set, indexed by increasing times."""

    times: tuple
    values: np.ndarray = field(compare=False)
    coords: tuple = None

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.ndim != 2 or vals.shape[0] != len(self.times):
            raise DomainError("values must be a (times x coords) array")
        if self.coords is not None and len(self.coords) != vals.shape[1]:
            raise DomainError("coordinate labels do not match the dimension")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "times", tuple(self.times))

    def __len__(self):
        return len(self.times)

    @property
    def dim(self):
        return self.values.shape[1]

    def dist(self, i, j):
        return float(np.linalg.norm(self.values[i] - self.values[j]))


def _as_value_matrix(seq):
    """Any accepted sequence form -> complex (n, dim) matrix."""
    if isinstance(seq, VecSequence):
        return seq.values
    arr = np.asarray(seq, dtype=complex)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DomainError("sequence must be 1-d, 2-d, or a VecSequence")
    return arr


def _check_r(r):
    r = float(r)
    if not (r > 1.0):
        raise DomainError("variation exponent r must exceed 1, got %r" % (r,))
    return r


def vr_exact(seq, r) -> float:
    """Exact r-variation by dynamic programming, O(n^2).

    D[i] = best increment-power sum over chains ending at i; every chain's
    last link comes from some earlier end, so maximizing over predecessors
    is exhaustive.
    """
    r = _check_r(r)
    vals = _as_value_matrix(seq)
    n = len(vals)
    if n == 0:
        raise DomainError("empty sequence has no variation")
    if n > MAX_DP_LENGTH:
        raise DomainError("sequence longer than %d; split the call" % MAX_DP_LENGTH)
    if n == 1:
        return 0.0
    D = np.zeros(n)
    for i in range(1, n):
        inc = np.linalg.norm(vals[i] - vals[:i], axis=1)
        D[i] = np.max(D[:i] + inc ** r)
    return float(np.max(D) ** (1.0 / r))


def vr_batch(values, r) -> np.ndarray:
    """r-variation of many scalar sequences at once.

    values has shape (n_times, n_sequences); returns one variation value per
    column.  Same dynamic program as vr_exact, vectorized across columns.
    """
    r = _check_r(r)
    vals = np.asarray(values)
    if vals.ndim != 2:
        raise DomainError("expected a (times x sequences) matrix")
    n = vals.shape[0]
    if n == 0:
        raise DomainError("empty sequence has no variation")
    if n > MAX_DP_LENGTH:
        raise DomainError("sequence longer than %d; split the call" % MAX_DP_LENGTH)
    D = np.zeros(vals.shape, dtype=float)
    for i in range(1, n):
        cand = D[:i] + np.abs(vals[i] - vals[:i]) ** r
        D[i] = cand.max(axis=0)
    return D.max(axis=0) ** (1.0 / r)


def vr_brute(seq, r) -> float:
    """Exhaustive r-variation over all increasing subsequences (oracle)."""
    r = _check_r(r)
    vals = _as_value_matrix(seq)
    n = len(vals)
    if n == 0:
        raise DomainError("empty sequence has no variation")
    if n > MAX_BRUTE_LENGTH:
        raise DomainError(
            "brute-force variation refuses length %d > %d" % (n, MAX_BRUTE_LENGTH)
        )
    dist_pow = np.linalg.norm(vals[:, None, :] - vals[None, :, :], axis=2) ** r
    best = 0.0

    def extend(last, acc):
        nonlocal best
        if acc > best:
            best = acc
        for nxt in range(last + 1, n):
            extend(nxt, acc + dist_pow[last, nxt])

    for start in range(n):
        extend(start, 0.0)
    return float(best ** (1.0 / r))


def _chain_dp(vals, threshold, allowed):
    """Longest chain (edge count) with consecutive l2 gaps >= threshold."""
    idx = list(range(len(vals))) if allowed is None else sorted(set(int(i) for i in allowed))
    for i in idx:
        if not (0 <= i < len(vals)):
            raise DomainError("allowed index %d outside the sequence" % i)
    sub = vals[idx]
    m = len(sub)
    if m <= 1:
        return 0
    best = np.zeros(m, dtype=int)
    for i in range(1, m):
        gaps = np.linalg.norm(sub[i] - sub[:i], axis=1)
        ok = gaps >= threshold
        if np.any(ok):
            best[i] = int(np.max(best[:i][ok])) + 1
    return int(np.max(best))


def jump_count(seq, tau, allowed_indices=None) -> int:
    """Maximal K with times M_0 < ... < M_K, |a_{M_i} - a_{M_{i-1}}| >= tau.

    Chosen times must lie in allowed_indices (all indices when omitted);
    intermediate times are unconstrained.
    """
    tau = float(tau)
    if tau <= 0:
        raise DomainError("jump threshold tau must be positive")
    return _chain_dp(_as_value_matrix(seq), tau, allowed_indices)


def vector_jump_count(vseq: VecSequence, lam) -> int:
    """jump_count for vector values with l2 gaps >= lam."""
    lam = float(lam)
    if lam <= 0:
        raise DomainError("jump threshold must be positive")
    return _chain_dp(_as_value_matrix(vseq), lam, None)


def jump_variation_check(seq, tau, r, allowed_indices=None):
    """Verify tau * K^(1/r) <= V^r on the allowed index set.

    Returns (holds, slack) with slack = vr - tau * K^(1/r).  The inequality
    is an identity of definitions: a K-jump chain is itself a subsequence
    with increment-power sum >= K * tau^r.
    """
    r = _check_r(r)
    vals = _as_value_matrix(seq)
    idx = list(range(len(vals))) if allowed_indices is None else sorted(
        set(int(i) for i in allowed_indices))
    K = jump_count(seq, tau, idx)
    vr = vr_exact(vals[idx], r)
    lhs = float(tau) * K ** (1.0 / r)
    slack = vr - lhs
    return slack >= -1e-12, slack


@dataclass
class ChainingCover:
    """Greedy dyadic nets over a VecSequence, with parent links.

    levels[v] lists center indices of the 2^-v net; parent[(v, i)] is the
    minimal-time center of the (v-1)-net whose 2^(1-v) ball meets the 2^-v
    ball of center i.
    """

    levels: dict
    parent: dict
    v_min: int
    v_max: int
    diameter: float

    def radius(self, v):
        return 2.0 ** (-v)

    def to_json(self):
        return json.dumps({
            "v_min": self.v_min,
            "v_max": self.v_max,
            "diameter": self.diameter,
            "levels": {str(v): list(c) for v, c in self.levels.items()},
            "parent": [[v, t, p] for (v, t), p in sorted(self.parent.items())],
        })


def build_chaining_cover(vseq: VecSequence, resolution=COVER_RESOLUTION) -> ChainingCover:
    """Nets at radii 2^-v from one covering everything down to the floor.

    Centers are chosen greedily in time order: the first element not within
    2^-v of an existing center becomes one.
    """
    vals = _as_value_matrix(vseq)
    n = len(vals)
    if n == 0:
        raise DomainError("cannot cover an empty sequence")
    diam = 0.0
    for i in range(n):
        d = np.linalg.norm(vals[i] - vals[i + 1:], axis=1)
        if len(d):
            diam = max(diam, float(np.max(d)))
    if diam == 0.0:
        return ChainingCover({0: (0,)}, {}, 0, 0, 0.0)
    v_min = int(math.floor(-math.log2(diam)))
    v_max = int(math.floor(-math.log2(resolution * diam)))
    v_max = max(v_max, v_min)

    levels = {}
    for v in range(v_min, v_max + 1):
        rad = 2.0 ** (-v)
        centers = []
        for i in range(n):
            if not centers:
                centers.append(i)
                continue
            d = np.linalg.norm(vals[i] - vals[centers], axis=1)
            if np.min(d) > rad:
                centers.append(i)
        levels[v] = tuple(centers)

    parent = {}
    for v in range(v_min + 1, v_max + 1):
        rad = 2.0 ** (-v)
        for i in levels[v]:
            for c in levels[v - 1]:  # time order; first hit is minimal
                if np.linalg.norm(vals[i] - vals[c]) <= 3.0 * rad:
                    parent[(v, i)] = c
                    break
            else:
                raise AssertionError("cover invariant broken: no parent")
    return ChainingCover(levels, parent, v_min, v_max, diam)


def verify_cover(cover: ChainingCover, vseq: VecSequence):
    """Assert every stated cover invariant; returns the increment-bound max.

    Checks: every element within 2^-v of a center at each level; parents
    exist, live one level up, and sit within 3 * 2^-v.
    """
    vals = _as_value_matrix(vseq)
    worst = 0.0
    for v, centers in cover.levels.items():
        rad = cover.radius(v)
        for i in range(len(vals)):
            d = np.linalg.norm(vals[i] - vals[list(centers)], axis=1)
            if np.min(d) > rad + 1e-12:
                raise AssertionError("point %d uncovered at level %d" % (i, v))
        if v == cover.v_min:
            continue
        for i in centers:
            p = cover.parent[(v, i)]
            if p not in cover.levels[v - 1]:
                raise AssertionError("parent not a center one level up")
            nu = np.linalg.norm(vals[i] - vals[p])
            if nu > 3.0 * rad + 1e-12:
                raise AssertionError("increment bound broken at level %d" % v)
            worst = max(worst, nu / rad)
    return worst


def chaining_telescope_check(cover: ChainingCover, vseq: VecSequence) -> float:
    """Max deviation of value(t) from ancestor value plus telescoped steps."""
    vals = _as_value_matrix(vseq)
    worst = 0.0
    for t in cover.levels[cover.v_max]:
        total = np.zeros(vals.shape[1], dtype=complex)
        v, node = cover.v_max, t
        while v > cover.v_min:
            p = cover.parent[(v, node)]
            total += vals[node] - vals[p]
            node, v = p, v - 1
        recon = vals[node] + total
        worst = max(worst, float(np.linalg.norm(recon - vals[t])))
    return worst
