"""Discrete Bayesian networks: BIC scoring, hill-climbing structure search,
maximum-likelihood CPTs, bootstrap arc strength, and mutual information.

Scores use the higher-is-better BIC convention, log-likelihood minus
(free parameters / 2) * ln N, which decomposes over node families. The
search is deterministic given (data, seed): it starts from the empty graph,
applies the single best operator among {add, delete, reverse} while the
improvement exceeds 1e-9, and breaks ties by operator order then
lexicographic node pair.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError


# ---------------------------------------------------------------------------
# DAG
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Dag:
    node_count: int
    edges: frozenset[tuple[int, int]]

    def __post_init__(self):
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop on node {u}")
            if not (0 <= u < self.node_count and 0 <= v < self.node_count):
                raise ValueError(f"edge ({u}, {v}) out of range")
        if self.topological_order() is None:
            raise ValueError("edge set contains a directed cycle")

    def parents(self, node: int) -> tuple[int, ...]:
        return tuple(sorted(u for u, v in self.edges if v == node))

    def children(self, node: int) -> tuple[int, ...]:
        return tuple(sorted(v for u, v in self.edges if u == node))

    def topological_order(self) -> list[int] | None:
        indeg = [0] * self.node_count
        succ: list[list[int]] = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            indeg[v] += 1
            succ[u].append(v)
        frontier = sorted(i for i in range(self.node_count) if indeg[i] == 0)
        order: list[int] = []
        while frontier:
            node = frontier.pop(0)
            order.append(node)
            for v in sorted(succ[node]):
                indeg[v] -= 1
                if indeg[v] == 0:
                    frontier.append(v)
            frontier.sort()
        return order if len(order) == self.node_count else None

    def skeleton(self) -> frozenset[tuple[int, int]]:
        return frozenset((min(u, v), max(u, v)) for u, v in self.edges)


def empty_dag(node_count: int) -> Dag:
    return Dag(node_count=node_count, edges=frozenset())


# ---------------------------------------------------------------------------
# Data handling
# ---------------------------------------------------------------------------

def _as_table(data) -> np.ndarray:
    table = np.asarray(data)
    if table.ndim != 2 or table.shape[0] == 0:
        raise DataError("data must be a non-empty 2-D table of discrete codes")
    if not np.issubdtype(table.dtype, np.integer):
        rounded = np.rint(np.asarray(table, dtype=float))
        if not np.array_equal(rounded, np.asarray(table, dtype=float)):
            raise DataError("data must contain integer category codes")
        table = rounded.astype(np.int64)
    if table.min() < 0:
        raise DataError("category codes must be non-negative")
    return table.astype(np.int64)


def infer_cardinalities(data) -> tuple[int, ...]:
    table = _as_table(data)
    return tuple(int(c) for c in table.max(axis=0) + 1)


def _check_cards(table: np.ndarray, cardinalities) -> tuple[int, ...]:
    if cardinalities is None:
        return infer_cardinalities(table)
    cards = tuple(int(c) for c in cardinalities)
    if len(cards) != table.shape[1]:
        raise DataError("cardinalities length must match the number of columns")
    if any(table[:, j].max() >= cards[j] for j in range(table.shape[1])):
        raise DataError("data values exceed the declared cardinalities")
    return cards


def _config_index(table: np.ndarray, parents: tuple[int, ...], cards) -> tuple[np.ndarray, int]:
    """Row-major index over the sorted parents' values (last parent fastest)."""
    idx = np.zeros(table.shape[0], dtype=np.int64)
    n_configs = 1
    for p in parents:
        idx = idx * cards[p] + table[:, p]
        n_configs *= cards[p]
    return idx, n_configs


def _family_counts(table: np.ndarray, node: int, parents: tuple[int, ...], cards) -> np.ndarray:
    card = cards[node]
    idx, n_configs = _config_index(table, parents, cards)
    counts = np.bincount(idx * card + table[:, node], minlength=n_configs * card)
    return counts.reshape(n_configs, card)


def _family_score(table: np.ndarray, node: int, parents: tuple[int, ...], cards, log_n: float) -> float:
    counts = _family_counts(table, node, parents, cards)
    row_tot = counts.sum(axis=1, keepdims=True)
    nz = counts > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = counts / row_tot
    loglik = float((counts[nz] * np.log(ratio[nz])).sum())
    n_params = (cards[node] - 1) * counts.shape[0]
    return loglik - 0.5 * n_params * log_n


def bic_score(dag: Dag, data, cardinalities=None) -> float:
    """Decomposed BIC of a DAG: sum over nodes of family log-likelihood minus penalty."""
    table = _as_table(data)
    if table.shape[1] != dag.node_count:
        raise DataError("data column count must match the DAG's node count")
    cards = _check_cards(table, cardinalities)
    log_n = math.log(table.shape[0])
    return sum(
        _family_score(table, node, dag.parents(node), cards, log_n)
        for node in range(dag.node_count)
    )


# ---------------------------------------------------------------------------
# Hill climbing
# ---------------------------------------------------------------------------

def _has_path(succ: list[set[int]], src: int, dst: int) -> bool:
    if src == dst:
        return True
    stack = [src]
    seen = {src}
    while stack:
        node = stack.pop()
        for nxt in succ[node]:
            if nxt == dst:
                return True
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return False


class _Search:
    def __init__(self, table: np.ndarray, cards, max_parents: int):
        self.table = table
        self.cards = cards
        self.max_parents = max_parents
        self.log_n = math.log(table.shape[0])
        self.n = table.shape[1]
        self._cache: dict[tuple[int, tuple[int, ...]], float] = {}

    def family(self, node: int, parents: tuple[int, ...]) -> float:
        key = (node, parents)
        score = self._cache.get(key)
        if score is None:
            score = _family_score(self.table, node, parents, self.cards, self.log_n)
            self._cache[key] = score
        return score

    def climb(self, parents: list[set[int]]) -> tuple[list[set[int]], float]:
        n = self.n
        succ: list[set[int]] = [set() for _ in range(n)]
        for v in range(n):
            for u in parents[v]:
                succ[u].add(v)
        score = sum(self.family(v, tuple(sorted(parents[v]))) for v in range(n))

        while True:
            best_delta = 1e-9
            best_move = None
            # operator order: add < delete < reverse; node pairs lexicographic
            for u in range(n):
                for v in range(n):
                    if u == v or v in succ[u]:
                        continue
                    if len(parents[v]) >= self.max_parents or _has_path(succ, v, u):
                        continue
                    old = tuple(sorted(parents[v]))
                    new = tuple(sorted(parents[v] | {u}))
                    delta = self.family(v, new) - self.family(v, old)
                    if delta > best_delta:
                        best_delta, best_move = delta, ("add", u, v)
            for u in range(n):
                for v in sorted(succ[u]):
                    old = tuple(sorted(parents[v]))
                    new = tuple(sorted(parents[v] - {u}))
                    delta = self.family(v, new) - self.family(v, old)
                    if delta > best_delta:
                        best_delta, best_move = delta, ("delete", u, v)
            for u in range(n):
                for v in sorted(succ[u]):
                    if len(parents[u]) >= self.max_parents:
                        continue
                    succ[u].discard(v)
                    creates_cycle = _has_path(succ, u, v)
                    succ[u].add(v)
                    if creates_cycle:
                        continue
                    old_v = tuple(sorted(parents[v]))
                    new_v = tuple(sorted(parents[v] - {u}))
                    old_u = tuple(sorted(parents[u]))
                    new_u = tuple(sorted(parents[u] | {v}))
                    delta = (
                        self.family(v, new_v)
                        - self.family(v, old_v)
                        + self.family(u, new_u)
                        - self.family(u, old_u)
                    )
                    if delta > best_delta:
                        best_delta, best_move = delta, ("reverse", u, v)

            if best_move is None:
                return parents, score
            op, u, v = best_move
            if op == "add":
                parents[v].add(u)
                succ[u].add(v)
            elif op == "delete":
                parents[v].discard(u)
                succ[u].discard(v)
            else:
                parents[v].discard(u)
                succ[u].discard(v)
                parents[u].add(v)
                succ[v].add(u)
            score += best_delta


def hill_climb(
    data,
    max_parents: int = 4,
    restarts: int = 0,
    seed: int | None = None,
    cardinalities=None,
) -> Dag:
    """Greedy BIC search from the empty graph over {add, delete, reverse}.

    With restarts > 0, restart r (1-based) re-climbs from the empty graph
    perturbed by r random valid edge additions; the best-scoring local
    optimum wins. Deterministic given (data, seed).
    """
    if max_parents < 0:
        raise ValueError("max_parents must be >= 0")
    table = _as_table(data)
    n = table.shape[1]
    if n < 2:
        raise DataError("structure search needs at least 2 columns")
    cards = _check_cards(table, cardinalities)
    search = _Search(table, cards, max_parents)

    parents, best_score = search.climb([set() for _ in range(n)])
    best_parents = parents
    for r in range(1, restarts + 1):
        rng = np.random.default_rng([0 if seed is None else seed, r])
        start: list[set[int]] = [set() for _ in range(n)]
        succ: list[set[int]] = [set() for _ in range(n)]
        for _ in range(r):
            candidates = [
                (u, v)
                for u in range(n)
                for v in range(n)
                if u != v
                and v not in succ[u]
                and len(start[v]) < max_parents
                and not _has_path(succ, v, u)
            ]
            if not candidates:
                break
            u, v = candidates[rng.integers(len(candidates))]
            start[v].add(u)
            succ[u].add(v)
        restart_parents, restart_score = search.climb(start)
        if restart_score > best_score + 1e-9:
            best_score = restart_score
            best_parents = restart_parents

    edges = frozenset((u, v) for v in range(n) for u in best_parents[v])
    return Dag(node_count=n, edges=edges)


# ---------------------------------------------------------------------------
# Maximum-likelihood CPTs and ancestral sampling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteBN:
    """A DAG plus per-node CPTs.

    cpts[v] has shape (prod of parent cardinalities, card(v)); its rows are
    indexed in C order over the values of the node's parents sorted
    ascending (last parent fastest).
    """

    dag: Dag
    cardinalities: tuple[int, ...]
    cpts: tuple[np.ndarray, ...]


def fit_mle(dag: Dag, data, alpha: float = 0.0, cardinalities=None) -> DiscreteBN:
    """CPT entries = (count + alpha) / (row total + alpha * card).

    With alpha = 0, parent configurations never observed get uniform rows.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    table = _as_table(data)
    if table.shape[1] != dag.node_count:
        raise DataError("data column count must match the DAG's node count")
    cards = _check_cards(table, cardinalities)
    cpts = []
    for node in range(dag.node_count):
        counts = _family_counts(table, node, dag.parents(node), cards).astype(float)
        counts += alpha
        row_tot = counts.sum(axis=1, keepdims=True)
        probs = np.full_like(counts, 1.0 / cards[node])
        seen = row_tot[:, 0] > 0
        probs[seen] = counts[seen] / row_tot[seen]
        cpts.append(probs)
    return DiscreteBN(dag=dag, cardinalities=cards, cpts=tuple(cpts))


def ancestral_sample(bn: DiscreteBN, n: int, seed: int | None = None) -> np.ndarray:
    """Sample n rows in topological order (parents before children)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    order = bn.dag.topological_order()
    assert order is not None
    rng = np.random.default_rng(seed)
    out = np.zeros((n, bn.dag.node_count), dtype=np.int64)
    for node in order:
        parents = bn.dag.parents(node)
        if parents:
            rows, _ = _config_index(out, parents, bn.cardinalities)
        else:
            rows = np.zeros(n, dtype=np.int64)
        cum = np.cumsum(bn.cpts[node], axis=1)
        cum[:, -1] = 1.0
        u = rng.random(n)
        out[:, node] = (u[:, None] > cum[rows]).sum(axis=1)
    return out


# ---------------------------------------------------------------------------
# Arc strength
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArcStrength:
    """Bootstrap occurrence frequencies of learned arcs.

    ``directed`` counts an arc with its orientation; ``skeleton`` ignores
    orientation (pairs stored with the smaller node first).
    """

    directed: dict[tuple[int, int], float]
    skeleton: dict[tuple[int, int], float]
    n_boot: int


def bootstrap_arc_strength(
    data,
    n_boot: int = 1000,
    seed: int | None = None,
    max_parents: int = 4,
    restarts: int = 0,
    cardinalities=None,
) -> ArcStrength:
    """Re-learn the structure on n_boot resamples; frequency = occurrences / n_boot."""
    if n_boot < 1:
        raise ValueError("n_boot must be >= 1")
    table = _as_table(data)
    cards = _check_cards(table, cardinalities)
    n_rows = table.shape[0]
    directed: dict[tuple[int, int], int] = {}
    skeleton: dict[tuple[int, int], int] = {}
    for b in range(n_boot):
        rng = np.random.default_rng([0 if seed is None else seed, b])
        idx = rng.integers(0, n_rows, size=n_rows)
        dag = hill_climb(
            table[idx],
            max_parents=max_parents,
            restarts=restarts,
            seed=None if seed is None else int(seed) * 100003 + b,
            cardinalities=cards,
        )
        for u, v in dag.edges:
            directed[(u, v)] = directed.get((u, v), 0) + 1
            pair = (min(u, v), max(u, v))
            skeleton[pair] = skeleton.get(pair, 0) + 1
    return ArcStrength(
        directed={k: c / n_boot for k, c in sorted(directed.items())},
        skeleton={k: c / n_boot for k, c in sorted(skeleton.items())},
        n_boot=n_boot,
    )


def score_loss_strength(dag: Dag, data, cardinalities=None) -> dict[tuple[int, int], float]:
    """Per arc: BIC(dag) - BIC(dag without the arc). Positive means the arc helps."""
    table = _as_table(data)
    cards = _check_cards(table, cardinalities)
    log_n = math.log(table.shape[0])
    losses: dict[tuple[int, int], float] = {}
    for u, v in sorted(dag.edges):
        with_arc = _family_score(table, v, dag.parents(v), cards, log_n)
        without = _family_score(
            table, v, tuple(p for p in dag.parents(v) if p != u), cards, log_n
        )
        losses[(u, v)] = with_arc - without
    return losses


# ---------------------------------------------------------------------------
# Mutual information
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MutualInfo:
    nats: float
    scaled: float   # N * nats, the sample-size-weighted variant


def mutual_information(x, y) -> MutualInfo:
    """Empirical MI in nats (0 * ln 0 := 0), plus the N-scaled value."""
    xv = np.asarray(x, dtype=np.int64)
    yv = np.asarray(y, dtype=np.int64)
    if xv.shape != yv.shape or xv.ndim != 1:
        raise DataError("mutual_information needs two equal-length 1-D columns")
    if xv.size == 0:
        raise DataError("mutual_information needs at least one observation")
    n = xv.size
    cx = int(xv.max()) + 1
    cy = int(yv.max()) + 1
    joint = np.bincount(xv * cy + yv, minlength=cx * cy).reshape(cx, cy) / n
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    nz = joint > 0
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = joint / np.outer(px, py)
    mi = float((joint[nz] * np.log(ratio[nz])).sum())
    mi = max(mi, 0.0)
    return MutualInfo(nats=mi, scaled=mi * n)


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def arcs_csv(dag: Dag, names) -> str:
    lines = ["parent,child"]
    for u, v in sorted(dag.edges):
        lines.append(f"{names[u]},{names[v]}")
    return "\n".join(lines) + "\n"


def strength_csv(
    strength: ArcStrength, losses: dict[tuple[int, int], float], names
) -> str:
    """One row per learned arc: parent,child,boot_frequency,score_loss."""
    lines = ["parent,child,boot_frequency,score_loss"]
    for (u, v), loss in sorted(losses.items()):
        freq = strength.skeleton.get((min(u, v), max(u, v)), 0.0)
        lines.append(f"{names[u]},{names[v]},{freq},{loss}")
    return "\n".join(lines) + "\n"


def cpts_json(bn: DiscreteBN, names) -> str:
    payload = {
        "nodes": list(names),
        "cardinalities": list(bn.cardinalities),
        "parent_row_order": "C order over the parents listed, last parent fastest",
        "cpts": {
            names[v]: {
                "parents": [names[p] for p in bn.dag.parents(v)],
                "table": bn.cpts[v].tolist(),
            }
            for v in range(bn.dag.node_count)
        },
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def to_dot(dag: Dag, names, edge_labels: dict[tuple[int, int], str] | None = None) -> str:
    lines = ["digraph scanpath_model {"]
    for name in names:
        lines.append(f'  "{name}";')
    for u, v in sorted(dag.edges):
        label = (edge_labels or {}).get((u, v))
        suffix = f' [label="{label}"]' if label is not None else ""
        lines.append(f'  "{names[u]}" -> "{names[v]}"{suffix};')
    lines.append("}")
    return "\n".join(lines) + "\n"
