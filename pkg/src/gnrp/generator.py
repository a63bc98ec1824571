"""Sampling of thinned random geometric graphs on the unit torus.

Pipeline: sample n uniform points, connect all pairs at wrapped distance
<= r (grid-bucketed, identical output to the all-pairs definition), then
keep each geometric edge independently with probability p. Kept edges are
labeled by a two-channel decomposition: independent coins with
probabilities p1, p2 where (1-p1)(1-p2) = 1-p, so an edge survives iff at
least one channel keeps it. Channel 1 and channel 2 marginally look like
the geometric graph thinned by p1 and p2 respectively.

All randomness flows through named substreams derived from a single
64-bit seed, so instances are bit-reproducible and point sets / edge coins
are shared across parameter variations with the same seed (monotone
coupling in p comes for free).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from gnrp.geometry import GridMode, build_grid, group_by_cell, wrapped_abs_delta

SCHEMA_VERSION = 1

# fixed substream labels; changing these changes every sampled instance
_STREAM_LABELS = {"points": 0x706F696E, "thin": 0x7468696E}


def _stream(seed: int, name: str) -> np.random.Generator:
    """Counter-based generator for one named substream of a master seed."""
    ss = np.random.SeedSequence([int(seed), _STREAM_LABELS[name]])
    return np.random.Generator(np.random.Philox(ss))


def trial_seed(master_seed: int, point_index: int, trial_index: int) -> int:
    """Stable 64-bit seed for one (grid point, trial) of a sweep."""
    ss = np.random.SeedSequence([int(master_seed), int(point_index), int(trial_index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def channel_probabilities(p: float, p1: float | None = None) -> tuple[float, float]:
    """Per-channel keep probabilities (p1, p2) with (1-p1)(1-p2) = 1-p.

    Defaults to the symmetric split p1 = p2 = 1 - sqrt(1-p).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if p1 is None:
        p1 = 1.0 - math.sqrt(1.0 - p)
        return p1, p1
    if not 0.0 <= p1 <= p:
        raise ValueError(f"p1 must be in [0, p], got {p1}")
    p2 = 1.0 if p1 == 1.0 else 1.0 - (1.0 - p) / (1.0 - p1)
    if p2 < 0.0 or p2 > 1.0:
        raise ValueError(f"no valid p2 for p={p}, p1={p1}")
    return p1, p2


@dataclass(frozen=True)
class ModelParams:
    """Parameters of one G(n, r, p) instance."""

    n: int
    r: float
    p: float
    seed: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 < self.r < 0.5:
            raise ValueError(f"r must be in (0, 0.5), got {self.r}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must be in [0, 1], got {self.p}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned int, got {self.seed}")

    @property
    def q(self) -> float:
        """Marginal edge probability pi * r^2 * p (valid since r < 1/2)."""
        return math.pi * self.r * self.r * self.p


def sample_points(n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. uniform points on [0, 1)^2 as an (n, 2) float64 array."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return rng.random((n, 2))


def build_rgg(points: np.ndarray, r: float) -> tuple[np.ndarray, np.ndarray]:
    """All pairs at wrapped distance <= r, as sorted int32 arrays (u < v).

    Buckets points into a grid with cell side >= r, so the 3x3 cell
    neighborhood is guaranteed to contain every pair within r; output is
    identical to the O(n^2) definition (ties at exactly r are edges).
    """
    n = len(points)
    if not 0.0 < r:
        raise ValueError(f"r must be positive, got {r}")
    grid = build_grid(min(r, 0.5), GridMode.AT_LEAST)
    m = grid.cells_per_axis
    _, order, starts = group_by_cell(points, grid)
    x = np.ascontiguousarray(points[:, 0])
    y = np.ascontiguousarray(points[:, 1])
    r2 = r * r
    out_u: list[np.ndarray] = []
    out_v: list[np.ndarray] = []

    def cell_members(c):
        return order[starts[c]:starts[c + 1]]

    def emit_cross(a_idx, b_idx):
        dx = wrapped_abs_delta(x[a_idx][:, None] - x[b_idx][None, :])
        dy = wrapped_abs_delta(y[a_idx][:, None] - y[b_idx][None, :])
        ia, ib = np.nonzero(dx * dx + dy * dy <= r2)
        if len(ia):
            out_u.append(a_idx[ia])
            out_v.append(b_idx[ib])

    def emit_self(a_idx):
        k = len(a_idx)
        if k < 2:
            return
        dx = wrapped_abs_delta(x[a_idx][:, None] - x[a_idx][None, :])
        dy = wrapped_abs_delta(y[a_idx][:, None] - y[a_idx][None, :])
        close = dx * dx + dy * dy <= r2
        close &= np.tri(k, k, -1, dtype=bool).T  # keep i < j only
        ia, ib = np.nonzero(close)
        if len(ia):
            out_u.append(a_idx[ia])
            out_v.append(a_idx[ib])

    if m < 3:
        # toy grids: every cell pair is within the 3x3 neighborhood
        cells = [c for c in range(m * m) if starts[c] < starts[c + 1]]
        for ci in cells:
            emit_self(cell_members(ci))
        for i, ci in enumerate(cells):
            for cj in cells[i + 1:]:
                emit_cross(cell_members(ci), cell_members(cj))
    else:
        # forward offsets cover each unordered adjacent cell pair exactly once
        offsets = ((1, 0), (0, 1), (1, 1), (1, -1))
        for c in range(m * m):
            a_idx = cell_members(c)
            if len(a_idx) == 0:
                continue
            emit_self(a_idx)
            ci, cj = divmod(c, m)
            for di, dj in offsets:
                t = ((ci + di) % m) * m + (cj + dj) % m
                b_idx = cell_members(t)
                if len(b_idx):
                    emit_cross(a_idx, b_idx)

    if not out_u:
        e = np.empty(0, np.int32)
        return e, e.copy()
    eu = np.concatenate(out_u).astype(np.int32, copy=False)
    ev = np.concatenate(out_v).astype(np.int32, copy=False)
    lo = np.minimum(eu, ev)
    hi = np.maximum(eu, ev)
    # canonical order: lexicographic by (u, v)
    key = lo.astype(np.int64) << 32 | hi.astype(np.int64)
    idx = np.argsort(key, kind="stable")
    return lo[idx], hi[idx]


def thin_and_label(
    geo_u: np.ndarray,
    geo_v: np.ndarray,
    p: float,
    rng: np.random.Generator,
    p1: float | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Keep each geometric edge with probability p and label channels.

    Returns (kept_u, kept_v, channel) where channel is 1, 2 or 3 meaning
    the edge was kept by channel 1, channel 2, or both. The conditional
    label law given "kept" is {1,2}: p1*p2/p, {1}: p1*(1-p2)/p,
    {2}: (1-p1)*p2/p.
    """
    c_p1, c_p2 = channel_probabilities(p, p1)
    m = len(geo_u)
    in1 = rng.random(m) < c_p1
    in2 = rng.random(m) < c_p2
    kept = in1 | in2
    channel = (in1[kept].astype(np.uint8) | (in2[kept].astype(np.uint8) << 1))
    return geo_u[kept], geo_v[kept], channel


@dataclass(eq=False)
class GnrpInstance:
    """One realized instance: points, geometric edges, kept labeled edges."""

    params: ModelParams
    points: np.ndarray
    geo_u: np.ndarray
    geo_v: np.ndarray
    kept_u: np.ndarray
    kept_v: np.ndarray
    channel: np.ndarray  # uint8, 1 | 2 | 3, aligned with kept_u/kept_v

    @property
    def n_geo_edges(self) -> int:
        return len(self.geo_u)

    @property
    def n_kept_edges(self) -> int:
        return len(self.kept_u)

    @cached_property
    def graph(self):
        """Kept-edge graph as a CSR Graph."""
        from gnrp.graph_core import Graph

        return Graph.from_edges(self.params.n, self.kept_u, self.kept_v)

    @cached_property
    def csr_channel(self) -> np.ndarray:
        """Channel label aligned with graph.indices (per directed CSR entry)."""
        g = self.graph
        lab = np.concatenate([self.channel, self.channel])
        return lab[g.csr_edge_id]

    def geo_edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.geo_u.tolist(), self.geo_v.tolist()))

    def kept_edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.kept_u.tolist(), self.kept_v.tolist()))

    def channel_map(self) -> dict[tuple[int, int], frozenset[int]]:
        """Kept edge -> subset of {1, 2} (convenience view for small n)."""
        decode = {1: frozenset({1}), 2: frozenset({2}), 3: frozenset({1, 2})}
        return {
            (int(u), int(v)): decode[int(c)]
            for u, v, c in zip(self.kept_u, self.kept_v, self.channel)
        }

    def to_json_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "params": {
                "n": self.params.n,
                "r": self.params.r,
                "p": self.params.p,
                "seed": self.params.seed,
            },
            "points": self.points.tolist(),
            "edges": [
                [int(u), int(v), int(c)]
                for u, v, c in zip(self.kept_u, self.kept_v, self.channel)
            ],
        }

    def save_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json_dict(), fh, separators=(",", ":"))
            fh.write("\n")

    def save_edgelist(self, path) -> None:
        """Plain 'u v' lines for the kept edges (drops labels and points)."""
        with open(path, "w") as fh:
            for u, v in zip(self.kept_u.tolist(), self.kept_v.tolist()):
                fh.write(f"{u} {v}\n")


def generate(params: ModelParams, p1: float | None = None) -> GnrpInstance:
    """Sample a full instance from its parameters, deterministically."""
    pts = sample_points(params.n, _stream(params.seed, "points"))
    geo_u, geo_v = build_rgg(pts, params.r)
    kept_u, kept_v, channel = thin_and_label(
        geo_u, geo_v, params.p, _stream(params.seed, "thin"), p1
    )
    return GnrpInstance(params, pts, geo_u, geo_v, kept_u, kept_v, channel)


def load_json(path) -> GnrpInstance:
    """Rebuild an instance from its JSON form.

    Geometric edges are recomputed from the stored points (the construction
    is deterministic given points and r), kept edges come from the file.
    """
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported schema_version {doc.get('schema_version')}")
    prm = doc["params"]
    params = ModelParams(int(prm["n"]), float(prm["r"]), float(prm["p"]), int(prm["seed"]))
    pts = np.asarray(doc["points"], dtype=np.float64).reshape(params.n, 2)
    geo_u, geo_v = build_rgg(pts, params.r)
    edges = doc["edges"]
    kept_u = np.fromiter((e[0] for e in edges), np.int32, len(edges))
    kept_v = np.fromiter((e[1] for e in edges), np.int32, len(edges))
    channel = np.fromiter((e[2] for e in edges), np.uint8, len(edges))
    return GnrpInstance(params, pts, geo_u, geo_v, kept_u, kept_v, channel)
