"""(alpha, theta)-recursive trees, root stripping, the coagulation urn and the stage construction.

Vertex 0 is the root; vertex labels increase along every path away from it.
Vertex m + 1 attaches to a non-root vertex j with weight 1 - alpha + alpha*k_j
and to the root with weight theta + alpha*k_0, where k are child counts.
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from . import config
from .errors import DomainError
from .fenwick import WeightIndex
from .numerics import RngStream
from .partitions import (
    BlockFrequencies,
    MassPartition,
    Params,
    SetPartition,
    Tail,
    empirical_frequencies,
    rank_normalize,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RecursiveTree:
    """Rooted tree on {0..n}; parent[v] < v for v >= 1 and parent[0] = -1."""

    parent: tuple[int, ...]

    def __post_init__(self):
        if len(self.parent) < 2 or self.parent[0] != -1 or self.parent[1] != 0:
            raise DomainError("tree needs parent[0] = -1 and parent[1] = 0")
        for v in range(1, len(self.parent)):
            if not (0 <= self.parent[v] < v):
                raise DomainError(f"parent of {v} must be a smaller label, got {self.parent[v]}")

    @property
    def n(self) -> int:
        """Number of non-root vertices."""
        return len(self.parent) - 1

    @property
    def child_count(self) -> tuple[int, ...]:
        counts = [0] * (self.n + 1)
        for v in range(1, self.n + 1):
            counts[self.parent[v]] += 1
        return tuple(counts)

    def children(self, v: int) -> list[int]:
        return [c for c in range(v + 1, self.n + 1) if self.parent[c] == v]

    def to_dot(self) -> str:
        lines = ["digraph tree {"]
        lines.extend(f"  {self.parent[v]} -> {v};" for v in range(1, self.n + 1))
        lines.append("}")
        return "\n".join(lines) + "\n"

    def parents_csv(self) -> str:
        rows = ["vertex,parent"] + [f"{v},{self.parent[v]}" for v in range(1, self.n + 1)]
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {"n": self.n, "parent": list(self.parent[1:])}


def grow(params: Params, n: int, rng: RngStream) -> RecursiveTree:
    """Grow an (alpha, theta)-recursive tree with n non-root vertices."""
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    alpha, theta = params.alpha, params.theta
    weights = WeightIndex(n + 1)
    parent = [-1, 0]
    weights[0] = theta + alpha
    weights[1] = 1.0 - alpha
    for m in range(1, n):
        # total attachment weight is theta + m
        p = weights.sample(float(rng.uniform()))
        parent.append(p)
        weights.add(p, alpha)
        weights[m + 1] = 1.0 - alpha
    return RecursiveTree(tuple(parent))


def grow_many(params: Params, n: int, count: int, rng: RngStream) -> np.ndarray:
    """Parent arrays of count independent trees, shape (count, n + 1).

    Vectorised across trees. The attachment weight theta + m splits as
    theta + alpha for the root, 1 - alpha for each of vertices 1..m, and alpha
    for the parent of each of vertices 2..m, which sums to the same
    per-vertex weights as grow.
    """
    if n < 1 or count < 1:
        raise DomainError(f"n and count must be positive, got n={n}, count={count}")
    alpha, theta = params.alpha, params.theta
    parents = np.zeros((count, n + 1), dtype=np.int64)
    parents[:, 0] = -1
    rows = np.arange(count)
    root_w = theta + alpha
    for m in range(1, n):
        u = rng.uniform(count) * (theta + m)
        uniform_w = (1.0 - alpha) * m
        pick_vertex = 1 + np.minimum(((u - root_w) / (1.0 - alpha)).astype(np.int64), m - 1)
        if alpha > 0 and m > 1:
            offset = np.clip((u - root_w - uniform_w) / alpha, 0, None)
            pick_child = 2 + np.minimum(offset.astype(np.int64), m - 2)
            via_child = parents[rows, pick_child]
        else:
            via_child = np.zeros(count, dtype=np.int64)
        parents[:, m + 1] = np.where(
            u < root_w, 0, np.where(u < root_w + uniform_w, pick_vertex, via_child)
        )
    return parents


def tree_exact_prob(params: Params, t: RecursiveTree) -> float:
    """Probability that grow produces exactly t."""
    alpha, theta = params.alpha, params.theta
    counts = [0] * (t.n + 1)
    counts[0] = 1
    prob = 1.0
    for m in range(1, t.n):
        p = t.parent[m + 1]
        w = theta + alpha * counts[0] if p == 0 else 1.0 - alpha + alpha * counts[p]
        prob *= w / (theta + m)
        counts[p] += 1
    return prob


def branch_sizes(t: RecursiveTree) -> np.ndarray:
    """Subtree size of every vertex 0..n, counting the vertex itself."""
    sizes = np.ones(t.n + 1, dtype=np.int64)
    for v in range(t.n, 0, -1):
        sizes[t.parent[v]] += sizes[v]
    return sizes


def branch_sizes_many(parents: np.ndarray) -> np.ndarray:
    """branch_sizes for every row of a grow_many parent array."""
    count, width = parents.shape
    sizes = np.ones((count, width), dtype=np.int64)
    rows = np.arange(count)
    for v in range(width - 1, 0, -1):
        sizes[rows, parents[:, v]] += sizes[:, v]
    return sizes


def branch_size(t: RecursiveTree, k: int) -> int:
    """T_{n,k}: vertices in the subtree rooted at k."""
    if not (1 <= k <= t.n):
        raise DomainError(f"k must lie in 1..{t.n}, got {k}")
    return int(branch_sizes(t)[k])


def descendants(t: RecursiveTree, i: int) -> frozenset[int]:
    """Strict descendants of vertex i."""
    if not (1 <= i <= t.n):
        raise DomainError(f"i must lie in 1..{t.n}, got {i}")
    inside = {i}
    for v in range(i + 1, t.n + 1):
        if t.parent[v] in inside:
            inside.add(v)
    inside.discard(i)
    return frozenset(inside)


def strip(t: RecursiveTree, i: int) -> SetPartition:
    """Components left after deleting vertices 0..i, as a partition of {i+1..n}."""
    if not (0 <= i < t.n):
        raise DomainError(f"strip level must lie in 0..{t.n - 1}, got {i}")
    root_of = list(range(t.n + 1))
    blocks: dict[int, list[int]] = {}
    for v in range(i + 1, t.n + 1):
        p = t.parent[v]
        root_of[v] = v if p <= i else root_of[p]
        blocks.setdefault(root_of[v], []).append(v)
    return SetPartition(tuple(tuple(b) for b in blocks.values()), i + 1)


def strip_frequencies_many(parents: np.ndarray, sizes: np.ndarray, i: int) -> np.ndarray:
    """Block sizes of strip level i per tree, zero where a vertex is not a block root."""
    width = parents.shape[1]
    is_root = (parents <= i) & (np.arange(width) > i)
    return np.where(is_root, sizes, 0)


def strip_labels_many(parents: np.ndarray, i: int) -> np.ndarray:
    """Restricted-growth labels of strip level i for labels i+1..n, one row per tree."""
    count, width = parents.shape
    if not (0 <= i < width - 1):
        raise DomainError(f"strip level must lie in 0..{width - 2}, got {i}")
    rows = np.arange(count)
    labels = np.zeros((count, width), dtype=np.int64)
    blocks = np.zeros(count, dtype=np.int64)
    for v in range(i + 1, width):
        p = parents[:, v]
        opens = p <= i
        labels[:, v] = np.where(opens, blocks, labels[rows, np.maximum(p, 0)])
        blocks += opens
    return labels[:, i + 1 :]


def strip_levels_csv(t: RecursiveTree, depth: int) -> str:
    """`level,label,block` rows for strip levels 0..depth."""
    if not (0 <= depth < t.n):
        raise DomainError(f"strip depth must lie in 0..{t.n - 1}, got {depth}")
    rows = ["level,label,block"]
    for level in range(depth + 1):
        p = strip(t, level)
        for offset, block in enumerate(p.restricted_growth()):
            rows.append(f"{level},{p.lo + offset},{block}")
    return "\n".join(rows) + "\n"


def tree_frequency_chain(t: RecursiveTree, depth: int) -> list[BlockFrequencies]:
    """Empirical block frequencies of strip(t, i) for i = 0..depth."""
    if not (0 <= depth < t.n):
        raise DomainError(f"depth must lie in 0..{t.n - 1}, got {depth}")
    return [empirical_frequencies(strip(t, i)) for i in range(depth + 1)]


def urn_indicators(params: Params, i: int, m: int, rng: RngStream) -> np.ndarray:
    """Reinforced 0/1 draws selecting blocks that rejoin vertex i + 1.

    P(I_{k+1} = 1 | I_1..I_k) = (1 - alpha + alpha*S_k) / (theta + i + 1 + alpha*k).
    """
    if i < 0 or m < 1:
        raise DomainError(f"need i >= 0 and m >= 1, got i={i}, m={m}")
    alpha, theta = params.alpha, params.theta
    out = np.zeros(m, dtype=np.int8)
    u = rng.uniform(m)
    hits = 0
    for k in range(m):
        if u[k] < (1.0 - alpha + alpha * hits) / (theta + i + 1 + alpha * k):
            out[k] = 1
            hits += 1
    return out


def urn_limit_fractions(params: Params, i: int, m: int, replicas: int, rng: RngStream) -> np.ndarray:
    """Running fraction (1/m) * sum I_k of independent urns, vectorised over replicas."""
    if i < 0 or m < 1 or replicas < 1:
        raise DomainError(f"need i >= 0, m >= 1, replicas >= 1; got i={i}, m={m}, replicas={replicas}")
    alpha, theta = params.alpha, params.theta
    hits = np.zeros(replicas)
    for k in range(m):
        p = (1.0 - alpha + alpha * hits) / (theta + i + 1 + alpha * k)
        hits += rng.uniform(replicas) < p
    return hits / m


def urn_coagulate(b_next: SetPartition, indicators, i: int) -> SetPartition:
    """Merge {i+1} with the selected blocks of b_next; the merged block comes first."""
    if b_next.lo != i + 2:
        raise DomainError(f"b_next must partition labels from {i + 2}, got lo={b_next.lo}")
    ind = [int(v) for v in indicators]
    if len(ind) != len(b_next.blocks):
        raise DomainError(f"{len(ind)} indicators for {len(b_next.blocks)} blocks")
    merged = [i + 1]
    rest = []
    for block, chosen in zip(b_next.blocks, ind):
        if chosen:
            merged.extend(block)
        else:
            rest.append(block)
    return SetPartition((tuple(sorted(merged)),) + tuple(rest), i + 1)


@dataclass(eq=False)
class StageVertex:
    """A labelled vertex of the stage construction and its lazily extended children."""

    label: int
    parent: int
    weight: float
    law_theta: float
    sticks: list[float] = field(default_factory=list)
    residual: float = 0.0
    child_labels: dict[int, int] = field(default_factory=dict)
    truncated: bool = False

    def discovered(self) -> float:
        return float(np.sum(self.sticks))


@dataclass(eq=False)
class StageTree:
    """Weighted tree built stage by stage; history[i] is G^(i)."""

    params: Params
    vertices: list[StageVertex]
    history: list[MassPartition]

    @property
    def stages(self) -> int:
        return len(self.vertices) - 1

    @property
    def truncated(self) -> bool:
        return any(v.truncated for v in self.vertices)

    def vertex_weight(self, label: int) -> float:
        return self.vertices[label].weight

    def to_recursive_tree(self) -> RecursiveTree:
        return RecursiveTree(tuple([-1] + [v.parent for v in self.vertices[1:]]))


def _extend(vertex: StageVertex, alpha: float, rng: RngStream, count: int) -> None:
    n0 = len(vertex.sticks)
    n = np.arange(n0 + 1, n0 + count + 1)
    b = rng.generator.beta(1.0 - alpha, vertex.law_theta + n * alpha)
    survival = vertex.residual * np.cumprod(1.0 - b)
    vertex.sticks.extend((b * np.concatenate(([vertex.residual], survival[:-1]))).tolist())
    vertex.residual = float(survival[-1])


def _open_vertex(label: int, parent: int, weight: float, law_theta: float, alpha: float, rng, eps: float, max_atoms: int) -> StageVertex:
    vertex = StageVertex(label, parent, weight, law_theta, residual=weight)
    while vertex.residual >= eps * weight and len(vertex.sticks) < max_atoms:
        _extend(vertex, alpha, rng, min(config.CHUNK, max_atoms - len(vertex.sticks)))
    vertex.truncated = vertex.residual >= eps * weight
    return vertex


def _leaves(vertices: list[StageVertex], alpha: float) -> MassPartition:
    atoms = []
    tails = []
    for v in vertices:
        atoms.extend(w for j, w in enumerate(v.sticks) if j not in v.child_labels)
        if v.residual > 0:
            tails.append(Tail(v.residual, v.residual, alpha, v.law_theta + len(v.sticks) * alpha))
    residual = sum(t.mass for t in tails)
    total = sum(atoms) + residual
    return rank_normalize(np.asarray(atoms) / total, residual / total, tails=[t.scaled(1.0 / total) for t in tails])


def stage_tree(
    params: Params,
    stages: int,
    rng: RngStream,
    eps: float = config.STAGE_EPS,
    max_atoms: int = config.MAX_ATOMS,
) -> StageTree:
    """Build the weighted tree of the stage construction.

    The root's children carry GEM(alpha, theta) weights; a newly labelled
    vertex splits its weight among its children by GEM(alpha, 1 - alpha).
    Each stage descends from the root, at every labelled vertex choosing a
    child with probability proportional to its weight, and labels the first
    unlabelled vertex it reaches. Children are discovered in size-biased order
    and sticks are extended lazily. Past max_atoms sticks, a descent landing
    in a vertex's remainder takes the next stick, which is a size-biased
    child of the remainder, and the vertex is flagged truncated.
    """
    if stages < 1:
        raise DomainError(f"stages must be positive, got {stages}")
    if not (0.0 < eps < 1.0):
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    alpha = params.alpha
    vertices = [_open_vertex(0, -1, 1.0, params.theta, alpha, rng, eps, max_atoms)]
    history = [_leaves(vertices, alpha)]

    for label in range(1, stages + 1):
        v = vertices[0]
        while True:
            u = float(rng.uniform()) * v.weight
            while u >= v.discovered() and v.residual > 0 and len(v.sticks) < max_atoms:
                _extend(v, alpha, rng, min(config.CHUNK, max_atoms - len(v.sticks)))
            if u >= v.discovered() and v.residual > 0:
                # a size-biased child of the remainder is its next stick
                _extend(v, alpha, rng, 1)
                v.truncated = True
                j = len(v.sticks) - 1
            else:
                j = int(np.searchsorted(np.cumsum(v.sticks), u, side="right"))
                j = min(j, len(v.sticks) - 1)
            if j in v.child_labels:
                v = vertices[v.child_labels[j]]
                continue
            v.child_labels[j] = label
            vertices.append(_open_vertex(label, v.label, v.sticks[j], 1.0 - alpha, alpha, rng, eps, max_atoms))
            break
        history.append(_leaves(vertices, alpha))

    tree = StageTree(params, vertices, history)
    if tree.truncated:
        logger.debug("stage_tree hit max_atoms=%d while pre-extending sticks", max_atoms)
    return tree
