"""Projection families on lines: axioms, modified distances, projection graphs, quasi-trees and bottlenecks"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import (ConfigError, DisconnectedInput, MissingProjection, NotConverged, ProjectionError,
                     ResolutionTooCoarse)
from .groups import GroupOps
from .settings import get_settings

logger = logging.getLogger(__name__)

TRUNCATION_GUARD = 10.0
RADIUS_TOL = 1e-9
EQUIVARIANCE_TOL = 1e-7

Label = Hashable
Node = Tuple[Label, float]


@dataclass
class DomainFamily:
    """Finite index set of lines C(Y) with projection sets π_Y(X) ⊂ R for ordered pairs X ≠ Y.

    Treated as immutable once built; the projection arrays are computed on first use.
    """
    ids: List[Label]
    theta: float
    projections: Dict[Tuple[Label, Label], Tuple[float, ...]]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.theta > 0:
            raise ConfigError(f"theta must be positive, got {self.theta}", field="theta")
        if len(set(self.ids)) != len(self.ids):
            raise ConfigError("Domain ids must be unique", field="domains")
        self.index = {label: i for i, label in enumerate(self.ids)}
        for (on, of), points in self.projections.items():
            if on not in self.index or of not in self.index:
                raise ConfigError(f"Projection references unknown domain ({on!r}, {of!r})", field="projections")
            if on == of or not points:
                raise ConfigError(f"Projection of {of!r} on {on!r} must be a nonempty set on another domain",
                                  field="projections")

    def __len__(self):
        return len(self.ids)

    def projection(self, on: Label, of: Label) -> Tuple[float, ...]:
        try:
            return self.projections[(on, of)]
        except KeyError:
            raise MissingProjection(f"No projection of {of!r} on {on!r}", witness=[repr(on), repr(of)])

    @cached_property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """lo[y, x] = min π_Y(X) and hi[y, x] = max π_Y(X), NaN where undefined."""
        n = len(self.ids)
        lo = np.full((n, n), np.nan)
        hi = np.full((n, n), np.nan)
        for (on, of), points in self.projections.items():
            i, j = self.index[on], self.index[of]
            lo[i, j] = min(points)
            hi[i, j] = max(points)
        return lo, hi

    @cached_property
    def dpi_tensor(self) -> np.ndarray:
        """D[y, x, z] = diam(π_Y(X) ∪ π_Y(Z)), NaN when y ∈ {x, z}."""
        self.require_complete()
        lo, hi = self.bounds
        return np.maximum(hi[:, :, None], hi[:, None, :]) - np.minimum(lo[:, :, None], lo[:, None, :])

    def require_complete(self):
        n = len(self.ids)
        for i in range(n):
            for j in range(n):
                if i != j and (self.ids[i], self.ids[j]) not in self.projections:
                    raise MissingProjection(f"No projection of {self.ids[j]!r} on {self.ids[i]!r}",
                                            witness=[repr(self.ids[i]), repr(self.ids[j])])

    def to_json(self) -> dict:
        return {"theta": self.theta,
                "domains": [{"id": label, "line": True} for label in self.ids],
                "projections": [{"on": on, "of": of, "points": list(points)}
                                for (on, of), points in self.projections.items()],
                **({"metadata": self.metadata} if self.metadata else {})}

    @classmethod
    def from_json(cls, raw: dict) -> "DomainFamily":
        try:
            ids = [d["id"] for d in raw["domains"]]
            projections = {(p["on"], p["of"]): tuple(float(x) for x in p["points"]) for p in raw["projections"]}
            theta = float(raw["theta"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed domain family: {e}", field="family")
        if any(not d.get("line", True) for d in raw["domains"]):
            raise ConfigError("Only line domains are supported", field="domains")
        return cls(ids, theta, projections, dict(raw.get("metadata", {})))


def dpi(fam: DomainFamily, Y: Label, X: Label, Z: Label) -> float:
    """diam(π_Y(X) ∪ π_Y(Z))."""
    if Y == X or Y == Z:
        raise ProjectionError(f"dpi needs X, Z different from Y={Y!r}")
    points = fam.projection(Y, X) + fam.projection(Y, Z)
    return max(points) - min(points)


# ---------------------------------------------------------------------------
# Axioms


@dataclass
class AxiomReport:
    theta: float
    p0_violations: List[Tuple[Label, Label, float]]
    p1_violations: List[Tuple[Label, Label, Label, Tuple[float, float, float]]]
    p2_counts: List[Tuple[Label, Label, int]]

    @property
    def passed(self) -> bool:
        return not self.p0_violations and not self.p1_violations

    @property
    def p2_max(self) -> int:
        return max((c for _, _, c in self.p2_counts), default=0)

    def reverify(self, fam: DomainFamily) -> bool:
        """Every recorded witness still violates its axiom."""
        for on, of, _ in self.p0_violations:
            points = fam.projection(on, of)
            if not max(points) - min(points) > self.theta:
                return False
        for x, y, z, _ in self.p1_violations:
            values = (dpi(fam, x, y, z), dpi(fam, y, x, z), dpi(fam, z, x, y))
            if sum(v > self.theta for v in values) < 2:
                return False
        return True

    def to_json(self) -> dict:
        return {"theta": self.theta, "passed": self.passed,
                "p0_violations": [{"on": a, "of": b, "diameter": d} for a, b, d in self.p0_violations],
                "p1_violations": [{"triple": [x, y, z], "values": list(v)} for x, y, z, v in self.p1_violations],
                "p2_counts": [{"pair": [x, y], "count": c} for x, y, c in self.p2_counts],
                "p2_max": self.p2_max}


def verify_axioms(fam: DomainFamily) -> AxiomReport:
    """Check P0 (projection diameters), P1 (one large value per triple) and count P2 sets."""
    theta = fam.theta
    ids = fam.ids
    lo, hi = fam.bounds
    tol = RADIUS_TOL * max(1.0, theta)
    p0 = [(ids[i], ids[j], float(hi[i, j] - lo[i, j]))
          for i, j in zip(*np.nonzero(np.nan_to_num(hi - lo, nan=0.0) > theta + tol))]

    D = fam.dpi_tensor
    with np.errstate(invalid="ignore"):
        large = np.nan_to_num(D, nan=-1.0) > theta + tol
    # counts[x, y, z] = [D_x(y,z) > θ] + [D_y(x,z) > θ] + [D_z(x,y) > θ]
    counts = large.astype(np.int8) + large.transpose(1, 0, 2) + large.transpose(1, 2, 0)
    p1 = []
    for x, y, z in zip(*np.nonzero(counts >= 2)):
        if x < y < z:
            p1.append((ids[x], ids[y], ids[z], (float(D[x, y, z]), float(D[y, x, z]), float(D[z, x, y]))))

    per_pair = large.sum(axis=0)
    n = len(ids)
    p2 = [(ids[x], ids[y], int(per_pair[x, y])) for x in range(n) for y in range(x + 1, n)]
    report = AxiomReport(theta, p0, p1, p2)
    logger.info("Axioms on %d domains: P0 violations %d, P1 violations %d, max P2 %d",
                n, len(p0), len(p1), report.p2_max)
    return report


# ---------------------------------------------------------------------------
# Modified distances and the projection graph


def _h_pairs(fam: DomainFamily, x: int, z: int) -> np.ndarray:
    """Index pairs (X', Z') of H(X, Z)."""
    D = fam.dpi_tensor
    with np.errstate(invalid="ignore"):
        big = np.nan_to_num(D, nan=-1.0) > 2.0 * fam.theta
    mask = big[x] & big[z]
    mask[x, :] |= big[z, x, :]
    mask[:, z] |= big[x, :, z]
    mask[x, z] = True
    np.fill_diagonal(mask, False)
    return np.argwhere(mask)


def modified_distances(fam: DomainFamily, X: Label, Z: Label) -> np.ndarray:
    """d_Y(X, Z) for every Y, NaN at X and Z."""
    if X == Z:
        raise ProjectionError("Modified distance needs X != Z")
    x, z = fam.index[X], fam.index[Z]
    pairs = _h_pairs(fam, x, z)
    values = fam.dpi_tensor[:, pairs[:, 0], pairs[:, 1]]
    contained = np.zeros(len(fam), dtype=bool)
    contained[pairs.ravel()] = True
    with np.errstate(invalid="ignore"):
        out = np.where(contained, 0.0, np.nanmin(np.where(np.isnan(values), np.inf, values), axis=1))
    out[[x, z]] = np.nan
    return out


def modified_distance(fam: DomainFamily, Y: Label, X: Label, Z: Label) -> float:
    """0 if Y lies in a pair of H(X, Z), otherwise the least dpi_Y over H(X, Z)."""
    if Y in (X, Z):
        raise ProjectionError(f"Modified distance needs Y={Y!r} outside {{X, Z}}")
    for label in (X, Y, Z):
        if label not in fam.index:
            raise MissingProjection(f"Unknown domain {label!r}", witness=repr(label))
    return float(modified_distances(fam, X, Z)[fam.index[Y]])


def modified_distance_violations(fam: DomainFamily) -> List[Tuple[Label, Label, Label]]:
    """Triples (Y, X, Z) with d_Y(X, Z) > dpi_Y(X, Z); empty for every consistent family."""
    D = fam.dpi_tensor
    found = []
    for x in range(len(fam)):
        for z in range(x + 1, len(fam)):
            md = modified_distances(fam, fam.ids[x], fam.ids[z])
            with np.errstate(invalid="ignore"):
                bad = np.flatnonzero(md > D[:, x, z])
            found.extend((fam.ids[y], fam.ids[x], fam.ids[z]) for y in bad)
    return found


@dataclass
class ProjectionGraph:
    graph: nx.Graph
    K: float
    separators: Dict[Tuple[Label, Label], List[Label]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"K": self.K, "vertices": list(self.graph.nodes),
                "edges": [list(e) for e in self.graph.edges],
                "separators": [{"pair": list(p), "Y": ys} for p, ys in self.separators.items()]}

    def to_dot(self) -> str:
        lines = ["graph P_K {", f'  label="K={self.K:g}";']
        lines += [f'  "{v}";' for v in self.graph.nodes]
        lines += [f'  "{u}" -- "{v}";' for u, v in self.graph.edges]
        lines.append("}")
        return "\n".join(lines)


def build_projection_graph(fam: DomainFamily, K: float) -> ProjectionGraph:
    """Vertices are the domains; X and Z are adjacent iff no Y has d_Y(X, Z) > K."""
    if not K > 0:
        raise ConfigError(f"K must be positive, got {K}", field="K")
    graph = nx.Graph()
    graph.add_nodes_from(fam.ids)
    separators = {}
    if len(fam) < 2:
        return ProjectionGraph(graph, K, separators)
    D = fam.dpi_tensor
    n = len(fam)
    for x in range(n):
        for z in range(x + 1, n):
            # d_Y ≤ dpi_Y, so only Y with a large dpi can separate
            column = D[:, x, z]
            if not np.any(np.nan_to_num(column, nan=-1.0) > K):
                graph.add_edge(fam.ids[x], fam.ids[z])
                continue
            values = modified_distances(fam, fam.ids[x], fam.ids[z])
            seps = [fam.ids[y] for y in np.nonzero(np.nan_to_num(values, nan=-1.0) > K)[0]]
            if seps:
                separators[(fam.ids[x], fam.ids[z])] = seps
            else:
                graph.add_edge(fam.ids[x], fam.ids[z])
    logger.info("Projection graph K=%g: %d vertices, %d edges", K, graph.number_of_nodes(), graph.number_of_edges())
    return ProjectionGraph(graph, K, separators)


# ---------------------------------------------------------------------------
# Quasi-tree of lines


@dataclass
class QuasiTreeOfSpaces:
    graph: nx.Graph
    K: float
    L: float
    delta: float
    projection_graph: ProjectionGraph
    domains: Dict[Label, List[Node]]

    def distance(self, u: Node, v: Node) -> float:
        return nx.shortest_path_length(self.graph, u, v, weight="weight")

    def embedding_defect(self, pairs: int = 100, seed: Optional[int] = None) -> float:
        """Largest (internal − complex) distance over sampled same-domain node pairs."""
        rng = np.random.default_rng(get_settings().seed if seed is None else seed)
        labels = [Y for Y, nodes in self.domains.items() if len(nodes) > 1]
        worst = 0.0
        for _ in range(pairs if labels else 0):
            Y = labels[int(rng.integers(len(labels)))]
            nodes = self.domains[Y]
            i, j = rng.choice(len(nodes), size=2, replace=False)
            u, v = nodes[int(i)], nodes[int(j)]
            worst = max(worst, abs(u[1] - v[1]) - self.distance(u, v))
        return worst

    def bridges(self) -> List[Tuple[Node, Node]]:
        return [(u, v) for u, v, kind in self.graph.edges(data="kind") if kind == "bridge"]

    def anchor_graph(self) -> nx.Graph:
        """The same metric graph with each line cut down to its ends and bridge feet.

        Grid vertices in between have degree two; their runs become single line edges, so
        distances between the kept vertices are unchanged.
        """
        feet = {u for edge in self.bridges() for u in edge}
        coarse = nx.Graph()
        for Y, nodes in self.domains.items():
            kept = [nodes[0]] + [v for v in nodes[1:-1] if v in feet]
            if len(nodes) > 1:
                kept.append(nodes[-1])
            coarse.add_nodes_from(kept, domain=Y)
            for u, v in zip(kept, kept[1:]):
                coarse.add_edge(u, v, weight=v[1] - u[1], kind="line")
        for u, v in self.bridges():
            coarse.add_edge(u, v, weight=self.graph.edges[u, v]["weight"], kind="bridge")
        return coarse

    def to_json(self) -> dict:
        return {"K": self.K, "L": self.L, "delta": self.delta,
                "domains": {str(Y): len(nodes) for Y, nodes in self.domains.items()},
                "nodes": self.graph.number_of_nodes(), "edges": self.graph.number_of_edges(),
                "bridges": [[[u[0], u[1]], [v[0], v[1]]] for u, v in self.bridges()]}

    def to_dot(self) -> str:
        def name(node: Node) -> str:
            return f'"{node[0]}@{node[1]:.6g}"'
        lines = ["graph C_K {", f'  label="K={self.K:g} L={self.L:g} delta={self.delta:g}";']
        for u, v, data in self.graph.edges(data=True):
            style = ", style=bold" if data.get("kind") == "bridge" else ""
            lines.append(f'  {name(u)} -- {name(v)} [label="{data["weight"]:.6g}"{style}];')
        lines.append("}")
        return "\n".join(lines)


def _line_grid(points: Sequence[float], theta: float, delta: float) -> np.ndarray:
    if points:
        lo, hi = min(points) - TRUNCATION_GUARD * theta, max(points) + TRUNCATION_GUARD * theta
    else:
        lo, hi = -TRUNCATION_GUARD * theta, TRUNCATION_GUARD * theta
    grid = np.append(np.arange(lo, hi, delta), hi)
    return np.unique(np.concatenate((grid, np.asarray(points, dtype=float))))


def build_quasi_tree(fam: DomainFamily, K: float, L: Optional[float] = None, delta: Optional[float] = None,
                     projection_graph: Optional[ProjectionGraph] = None) -> QuasiTreeOfSpaces:
    """Discretized lines joined by length-L bridges between π_X(Z) and π_Z(X) for adjacent X, Z."""
    L = K if L is None else L
    delta = fam.theta / 4.0 if delta is None else delta
    if not delta > 0 or not L > 0:
        raise ConfigError("delta and L must be positive", field="delta" if not delta > 0 else "L")
    if delta > fam.theta / 4.0 + RADIUS_TOL:
        raise ResolutionTooCoarse(f"delta={delta} exceeds theta/4={fam.theta / 4.0}", witness=delta)
    pk = projection_graph if projection_graph is not None else build_projection_graph(fam, K)
    graph = nx.Graph()
    domains = {}
    for Y in fam.ids:
        points = [p for (on, _), pts in fam.projections.items() if on == Y for p in pts]
        grid = _line_grid(points, fam.theta, delta)
        nodes = [(Y, float(x)) for x in grid]
        graph.add_nodes_from(nodes, domain=Y)
        for u, v in zip(nodes, nodes[1:]):
            graph.add_edge(u, v, weight=v[1] - u[1], kind="line")
        domains[Y] = nodes
    for X, Z in pk.graph.edges:
        for p in fam.projection(X, Z):
            for q in fam.projection(Z, X):
                graph.add_edge((X, float(p)), (Z, float(q)), weight=L, kind="bridge")
    logger.info("Quasi-tree K=%g L=%g delta=%g: %d nodes, %d edges",
                K, L, delta, graph.number_of_nodes(), graph.number_of_edges())
    return QuasiTreeOfSpaces(graph, K, L, delta, pk, domains)


# ---------------------------------------------------------------------------
# Bottleneck criterion


@dataclass
class BottleneckFailure:
    x: Any
    y: Any
    midpoint: dict
    threshold: float
    detour: List[Any]

    def to_json(self) -> dict:
        return {"x": repr(self.x), "y": repr(self.y), "midpoint": self.midpoint,
                "threshold": self.threshold, "detour": [repr(v) for v in self.detour]}


@dataclass
class BottleneckReport:
    delta: float
    delta_pass: Optional[float]
    failures: List[BottleneckFailure]
    pairs_checked: int
    exhaustive: bool

    @property
    def passed(self) -> bool:
        """Only an exhaustive run can pass; a clean sample is inconclusive."""
        return self.exhaustive and not self.failures

    @property
    def verdict(self) -> str:
        if self.failures:
            return "fail"
        return "pass" if self.exhaustive else "inconclusive"

    def to_json(self) -> dict:
        return {"delta": self.delta, "delta_pass": self.delta_pass, "passed": self.passed,
                "verdict": self.verdict, "pairs_checked": self.pairs_checked, "exhaustive": self.exhaustive,
                "failures": [f.to_json() for f in self.failures[:20]], "failure_count": len(self.failures)}


def _midpoint(graph: nx.Graph, path: List[Any], target: float, weight: str):
    """(u, v, offset from u, edge length); v is None when the midpoint is the node u."""
    walked = 0.0
    for u, v in zip(path, path[1:]):
        w = graph.edges[u, v].get(weight, 1.0)
        if target <= walked + RADIUS_TOL:
            return u, None, 0.0, 0.0
        if target < walked + w - RADIUS_TOL:
            return u, v, target - walked, w
        walked += w
    return path[-1], None, 0.0, 0.0


class _PairSplit:
    def __init__(self, graph: nx.Graph, x, y, weight: str):
        self.graph = graph
        self.x = x
        self.y = y
        length, path = nx.single_source_dijkstra(graph, x, y, weight=weight)
        self.u, self.v, self.t, edge_len = _midpoint(graph, path, length / 2.0, weight)
        du = nx.single_source_dijkstra_path_length(graph, self.u, weight=weight)
        if self.v is None:
            self.dz = du
        else:
            dv = nx.single_source_dijkstra_path_length(graph, self.v, weight=weight)
            self.dz = {w: min(self.t + du[w], edge_len - self.t + dv[w]) for w in graph.nodes}

    @property
    def midpoint(self) -> dict:
        if self.v is None:
            return {"node": repr(self.u)}
        return {"edge": [repr(self.u), repr(self.v)], "offset": self.t}

    def remainder(self, radius: float):
        ball = [w for w, d in self.dz.items() if d <= radius + RADIUS_TOL]
        cut = [(self.u, self.v)] if self.v is not None else []
        return nx.restricted_view(self.graph, ball, cut)

    def passes(self, radius: float) -> bool:
        if self.dz[self.x] <= radius + RADIUS_TOL or self.dz[self.y] <= radius + RADIUS_TOL:
            return True
        return not nx.has_path(self.remainder(radius), self.x, self.y)

    def threshold(self) -> float:
        radii = sorted({0.0, *self.dz.values()})
        lo, hi = 0, len(radii) - 1
        while lo < hi:
            mid = (lo + hi) // 2
            if self.passes(radii[mid]):
                hi = mid
            else:
                lo = mid + 1
        return radii[lo]


def _sample_pairs(nodes: List[Any], max_pairs: Optional[int], seed: Optional[int]) -> Tuple[List[Tuple[Any, Any]], bool]:
    n = len(nodes)
    total = n * (n - 1) // 2
    if max_pairs is None or total <= max_pairs:
        return [(nodes[i], nodes[j]) for i in range(n) for j in range(i + 1, n)], True
    rng = np.random.default_rng(get_settings().seed if seed is None else seed)
    chosen = set()
    while len(chosen) < max_pairs:
        i, j = (int(v) for v in rng.integers(n, size=2))
        if i != j:
            chosen.add((min(i, j), max(i, j)))
    return [(nodes[i], nodes[j]) for i, j in sorted(chosen)], False


def bottleneck_check(graph: nx.Graph, delta: float, max_pairs: Optional[int] = None, seed: Optional[int] = None,
                     weight: str = "weight") -> BottleneckReport:
    """Check that every shortest-path midpoint's closed delta-ball separates the endpoints.

    All vertex pairs are checked unless `max_pairs` caps them; a capped run is reported
    as inconclusive and does not pass. Run quasi-trees through `anchor_graph` first.
    """
    if graph.number_of_nodes() == 0:
        raise DisconnectedInput("Empty graph")
    if not nx.is_connected(graph):
        raise DisconnectedInput(f"Graph has {nx.number_connected_components(graph)} components",
                                witness=nx.number_connected_components(graph))
    pairs, exhaustive = _sample_pairs(list(graph.nodes), max_pairs, seed)
    worst = 0.0
    failures = []
    for x, y in pairs:
        split = _PairSplit(graph, x, y, weight)
        threshold = split.threshold()
        worst = max(worst, threshold)
        if threshold > delta + RADIUS_TOL:
            detour = nx.shortest_path(split.remainder(delta), x, y)
            failures.append(BottleneckFailure(x, y, split.midpoint, threshold, detour))
    logger.info("Bottleneck check delta=%g on %d pairs: minimal passing %g, %d failures",
                delta, len(pairs), worst, len(failures))
    if not exhaustive:
        logger.warning("Bottleneck check sampled %d pairs; verdict is inconclusive", len(pairs))
    return BottleneckReport(delta, worst, failures, len(pairs), exhaustive)


@dataclass
class Calibration:
    K: float
    L: float
    delta: float
    bottleneck: float
    trials: List[dict]

    def to_json(self) -> dict:
        return {"K": self.K, "L": self.L, "delta": self.delta, "bottleneck": self.bottleneck, "trials": self.trials}


def calibrate_K(fam: DomainFamily, delta: Optional[float] = None, max_doublings: int = 6, max_pairs: Optional[int] = None,
                embed_pairs: int = 100, seed: Optional[int] = None) -> Calibration:
    """Double K from 4θ (with L = K) until lines embed and the bottleneck constant is at most 2K."""
    delta = fam.theta / 4.0 if delta is None else delta
    K = 4.0 * fam.theta
    trials = []
    for _ in range(max_doublings + 1):
        tree = build_quasi_tree(fam, K, K, delta)
        defect = tree.embedding_defect(embed_pairs, seed)
        connected = nx.is_connected(tree.graph)
        report = bottleneck_check(tree.anchor_graph(), 2.0 * K, max_pairs, seed) if connected else None
        trials.append({"K": K, "embedding_defect": defect,
                       "delta_pass": report.delta_pass if report else None})
        if defect <= RADIUS_TOL and report is not None and report.passed:
            logger.info("Calibrated K=%g (bottleneck %g)", K, report.delta_pass)
            return Calibration(K, K, delta, report.delta_pass, trials)
        K *= 2.0
    raise NotConverged(f"No K up to {K / 2.0:g} passed calibration", witness=trials)


# ---------------------------------------------------------------------------
# Group compatibility


@dataclass
class CompatibilityReport:
    cocycle_failures: List[dict]
    equivariance_failures: List[dict]
    checked: int
    skipped: int

    @property
    def passed(self) -> bool:
        return not self.cocycle_failures and not self.equivariance_failures

    def to_json(self) -> dict:
        return {"passed": self.passed, "checked": self.checked, "skipped": self.skipped,
                "cocycle_failures": self.cocycle_failures[:20],
                "equivariance_failures": self.equivariance_failures[:20]}


def verify_group_compatibility(fam: DomainFamily, group: GroupOps,
                               label_action: Callable[[Any, Label], Label],
                               isometry: Callable[[Any, Label], Callable[[float], float]],
                               samples: Sequence[Any], points: Iterable[float] = (-1.0, 0.0, 2.5)) -> CompatibilityReport:
    """Check F_h^{gX} ∘ F_g^X = F_{hg}^X and π_{gY}(gX) = F_g^Y(π_Y(X)) on samples."""
    points = list(points)
    cocycle, equivariance = [], []
    checked = skipped = 0
    for g in samples:
        for h in samples:
            hg = group.multiply(h, g)
            for X in fam.ids:
                gX = label_action(g, X)
                for x in points:
                    checked += 1
                    lhs = isometry(h, gX)(isometry(g, X)(x))
                    rhs = isometry(hg, X)(x)
                    if abs(lhs - rhs) > EQUIVARIANCE_TOL * max(1.0, abs(rhs)):
                        cocycle.append({"g": repr(g), "h": repr(h), "X": X, "x": x, "lhs": lhs, "rhs": rhs})
        for X in fam.ids:
            for Y in fam.ids:
                if X == Y:
                    continue
                gX, gY = label_action(g, X), label_action(g, Y)
                if gX not in fam.index or gY not in fam.index:
                    skipped += 1
                    continue
                checked += 1
                moved = sorted(isometry(g, Y)(p) for p in fam.projection(Y, X))
                target = sorted(fam.projection(gY, gX))
                if len(moved) != len(target) or any(
                        abs(a - b) > EQUIVARIANCE_TOL * max(1.0, abs(b)) for a, b in zip(moved, target)):
                    equivariance.append({"g": repr(g), "X": X, "Y": Y, "moved": moved, "target": target})
    return CompatibilityReport(cocycle, equivariance, checked, skipped)


def synthetic_chain_family(count: int, theta: float = 1.0, gap: float = 10.0) -> DomainFamily:
    """Domains 0..count−1 with π_j(k) = {0} for k < j and {gap} for k > j."""
    ids = list(range(count))
    projections = {(j, k): (0.0,) if k < j else (float(gap),) for j in ids for k in ids if j != k}
    return DomainFamily(ids, theta, projections, {"kind": "chain", "gap": gap})
