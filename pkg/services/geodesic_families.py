"""Disjoint geodesic configurations, flip trees and the domain families they export"""
import logging
import math
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import (AsymptoticOrCrossing, ConfigError, DisjointnessViolation, SaturationFailure,
                     ScenarioUnavailable, TooClose, TooFewDomains)
from .hyp2 import (Geodesic, HPoint, Isometry, common_perpendicular, dist, nearest_point, project_point,
                   random_point)
from .projection_complex import DomainFamily
from .settings import get_settings

logger = logging.getLogger(__name__)

THINNESS_BOUND = math.log(1.0 + math.sqrt(2.0))


@dataclass
class GeodesicConfig:
    geodesics: List[Geodesic]
    min_separation: float
    seed: Optional[int] = None

    def __len__(self):
        return len(self.geodesics)

    def verify(self) -> float:
        """Re-check pairwise disjointness and separation; returns the smallest perpendicular length."""
        smallest = math.inf
        for i, a in enumerate(self.geodesics):
            for j in range(i + 1, len(self.geodesics)):
                b = self.geodesics[j]
                try:
                    length = common_perpendicular(a, b).length
                except AsymptoticOrCrossing as e:
                    raise DisjointnessViolation(f"Geodesics {i} and {j} are not disjoint: {e.message}",
                                                witness=[i, j])
                if length < self.min_separation - 1e-9:
                    raise DisjointnessViolation(f"Geodesics {i} and {j} are {length:.6g} apart, "
                                                f"below {self.min_separation}", witness=[i, j])
                smallest = min(smallest, length)
        return smallest

    def to_json(self) -> dict:
        return {"seed": self.seed, "min_separation": self.min_separation,
                "geodesics": [g.to_json() for g in self.geodesics]}

    @classmethod
    def from_json(cls, raw: dict) -> "GeodesicConfig":
        try:
            geodesics = [Geodesic.from_json(g) for g in raw["geodesics"]]
            return cls(geodesics, float(raw["min_separation"]), raw.get("seed"))
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed geodesic config: {e}", field="geodesics")


@dataclass(frozen=True)
class ThetaConstants:
    epsilon: float
    R: float
    eta: float
    theta: float

    @classmethod
    def compute(cls, R: float, epsilon: Optional[float] = None) -> "ThetaConstants":
        epsilon = get_settings().epsilon if epsilon is None else epsilon
        eta = eta_of(R, epsilon)
        return cls(epsilon, R, eta, 6.0 * epsilon + 2.0 * eta)

    def to_json(self) -> dict:
        return {"epsilon": self.epsilon, "R": self.R, "eta": self.eta, "theta": self.theta}


def random_disjoint_geodesics(count: int, R: float, seed: Optional[int] = None,
                              max_tries: Optional[int] = None) -> GeodesicConfig:
    """Semicircles over disjoint boundary intervals, pairwise at least R apart."""
    if count < 2 or not R > 0:
        raise ConfigError("Need count >= 2 and R > 0", field="count" if count < 2 else "R")
    seed = get_settings().seed if seed is None else seed
    rng = np.random.default_rng(seed)
    half_width = 4.0 * count + 8.0
    limit = max_tries if max_tries is not None else 200 * count
    geodesics: List[Geodesic] = []
    tries = 0
    while len(geodesics) < count:
        tries += 1
        if tries > limit:
            raise SaturationFailure(f"Placed {len(geodesics)} of {count} geodesics in {limit} tries (R={R})",
                                    witness=len(geodesics))
        radius = math.exp(rng.uniform(math.log(0.5), math.log(2.0)))
        center = rng.uniform(-half_width + radius, half_width - radius)
        candidate = Geodesic.semicircle(center, radius)
        lo, hi = center - radius, center + radius
        if any(not (hi < g.start.value or g.end.value < lo) for g in geodesics):
            continue
        if any(common_perpendicular(candidate, g).length < R for g in geodesics):
            continue
        geodesics.append(candidate)
    config = GeodesicConfig(geodesics, R, seed)
    config.verify()
    logger.debug("Placed %d geodesics with R=%g in %d tries", count, R, tries)
    return config


def d_gamma(gamma: Geodesic, alpha: Geodesic, beta: Geodesic) -> float:
    """Distance along gamma between the closest points to alpha and to beta."""
    if alpha.close_to(beta, 1e-12):
        return 0.0
    return abs(gamma.parameter_of(project_point(gamma, alpha)) - gamma.parameter_of(project_point(gamma, beta)))


def _fellow_width(d: float, epsilon: float) -> float:
    # a point at arc distance s from the perpendicular foot is at distance asinh(sinh d · cosh s)
    ratio = math.sinh(2.0 * epsilon) / math.sinh(d)
    return 2.0 * math.acosh(ratio) if ratio > 1.0 else 0.0


def eta_of(R: float, epsilon: float) -> float:
    """Least η such that geodesics 2ε-close along a length-η segment come within R."""
    if not R > 0 or not epsilon > 0:
        raise ConfigError("R and epsilon must be positive", field="R" if not R > 0 else "epsilon")
    if R >= 2.0 * epsilon:
        return 0.0
    distances = np.linspace(R, 2.0 * epsilon, 64)
    return max(_fellow_width(float(d), epsilon) for d in distances)


@dataclass
class ThinnessEstimate:
    delta: float
    triangles: int
    suggested_epsilon: float

    def to_json(self) -> dict:
        return {"delta": self.delta, "triangles": self.triangles, "suggested_epsilon": self.suggested_epsilon,
                "bound": THINNESS_BOUND}


def _segment_distance(x: HPoint, a: HPoint, b: HPoint) -> float:
    gamma = Geodesic.through(a, b)
    sa, sb = gamma.parameter_of(a), gamma.parameter_of(b)
    s = gamma.parameter_of(nearest_point(gamma, x))
    s = min(max(s, min(sa, sb)), max(sa, sb))
    return dist(x, gamma.point_at(s))


def sample_triangle_thinness(seed: Optional[int] = None, samples: int = 200, spread: float = 4.0,
                             points_per_side: int = 48) -> ThinnessEstimate:
    """Largest distance from a point on one side of a random triangle to the other two sides."""
    rng = np.random.default_rng(get_settings().seed if seed is None else seed)
    worst = 0.0
    used = 0
    for _ in range(samples):
        p, q, r = (random_point(rng, spread) for _ in range(3))
        if min(dist(p, q), dist(q, r), dist(r, p)) < 1e-6:
            continue
        used += 1
        for a, b, c in ((p, q, r), (q, r, p), (r, p, q)):
            side = Geodesic.through(a, b)
            sa, sb = side.parameter_of(a), side.parameter_of(b)
            for s in np.linspace(sa, sb, points_per_side):
                x = side.point_at(float(s))
                worst = max(worst, min(_segment_distance(x, b, c), _segment_distance(x, c, a)))
    return ThinnessEstimate(worst, used, 4.0 * math.ceil(worst * 10.0) / 10.0)


# ---------------------------------------------------------------------------
# Schottky model and flip trees


def schottky_generators(l1: float, l2: float) -> Tuple[Isometry, Isometry]:
    """g1 translates along (−1, 1) towards +1 by l1; g2 along (0, ∞) towards ∞ by l2."""
    if not (l1 > 0 and l2 > 0):
        raise ConfigError("Translation lengths must be positive", field="lengths")
    inner, outer = math.tanh(l1 / 4.0), 1.0 / math.tanh(l1 / 4.0)
    if not (math.exp(-l2 / 2.0) < inner and outer < math.exp(l2 / 2.0)):
        raise DisjointnessViolation(f"Ping-pong intervals overlap for lengths ({l1}, {l2}); "
                                    "increase the translation lengths", witness=[l1, l2])
    g1 = Isometry(math.cosh(l1 / 2.0), math.sinh(l1 / 2.0), math.sinh(l1 / 2.0), math.cosh(l1 / 2.0))
    g2 = Isometry(math.exp(l2 / 2.0), 0.0, 0.0, math.exp(-l2 / 2.0))
    return g1, g2


def _seed_geodesics(l1: float, l2: float) -> List[Geodesic]:
    seeds = []
    for lo, hi in ((math.exp(-l2 / 2.0), math.tanh(l1 / 4.0)), (1.0 / math.tanh(l1 / 4.0), math.exp(l2 / 2.0))):
        a, b = math.log(lo), math.log(hi)
        p, q = math.exp(a + 0.25 * (b - a)), math.exp(a + 0.75 * (b - a))
        seeds.append(Geodesic.from_endpoints(p, q))
        seeds.append(Geodesic.from_endpoints(-q, -p))
    return seeds


def _reduced_words(letters: Sequence[Isometry], word_cap: int) -> List[Isometry]:
    """Products of reduced words of length ≤ word_cap; letters come in inverse pairs (0,1), (2,3)."""
    out = [Isometry.identity()]
    frontier = [(Isometry.identity(), None)]
    for _ in range(word_cap):
        nxt = []
        for element, last in frontier:
            for i, letter in enumerate(letters):
                if last is not None and i == last ^ 1:
                    continue
                image = element @ letter
                out.append(image)
                nxt.append((image, i))
        frontier = nxt
    return out


def schottky_config(lengths: Tuple[float, float] = (4.0, 4.0), word_cap: int = 1) -> Tuple[GeodesicConfig, Tuple[Isometry, Isometry]]:
    """Boundary geodesics of a vertex space: orbit of four seeds under reduced words of length ≤ word_cap."""
    if word_cap < 0:
        raise ConfigError(f"word_cap must be non-negative, got {word_cap}", field="word_cap")
    g1, g2 = schottky_generators(*lengths)
    seeds = _seed_geodesics(*lengths)
    letters = [g1, g1.inverse(), g2, g2.inverse()]
    geodesics = [w.image_of_geodesic(s) for w in _reduced_words(letters, word_cap) for s in seeds]
    config = GeodesicConfig(geodesics, 0.0)
    config.min_separation = config.verify()
    return config, (g1, g2)


@dataclass
class FlipTreeNode:
    id: int
    color: str
    depth: int
    boundary: List[Geodesic]
    gluing: Dict[int, Tuple[int, int]]


@dataclass
class FlipTree:
    """Rooted tree of vertex spaces; every node carries the same boundary configuration.

    Edge attribute `slots` maps each endpoint to the index of the boundary geodesic it is glued along.
    """
    graph: nx.Graph
    config: GeodesicConfig
    depth: int
    lengths: Tuple[float, float]
    generators: Tuple[Isometry, Isometry]
    word_cap: int

    @property
    def branching(self) -> int:
        return len(self.config)

    @staticmethod
    def expected_size(branching: int, depth: int) -> int:
        return 1 + branching * sum((branching - 1) ** k for k in range(depth - 1))

    def color(self, v: int) -> str:
        return self.graph.nodes[v]["color"]

    def slot(self, u: int, neighbor: int) -> int:
        return self.graph.edges[u, neighbor]["slots"][u]

    def node(self, v: int) -> FlipTreeNode:
        gluing = {self.slot(v, w): (w, self.slot(w, v)) for w in self.graph.neighbors(v)}
        data = self.graph.nodes[v]
        return FlipTreeNode(v, data["color"], data["depth"], self.config.geodesics, gluing)

    def nodes_of_color(self, color: str) -> List[int]:
        return sorted((v for v, c in self.graph.nodes(data="color") if c == color),
                      key=lambda v: (self.graph.nodes[v]["depth"], v))

    def to_json(self) -> dict:
        return {"depth": self.depth, "lengths": list(self.lengths), "word_cap": self.word_cap,
                "branching": self.branching, "nodes": self.graph.number_of_nodes(),
                "config": self.config.to_json()}

    def to_dot(self) -> str:
        lines = ["graph flip_tree {"]
        for v, data in sorted(self.graph.nodes(data=True)):
            fill = "black" if data["color"] == "black" else "white"
            font = "white" if fill == "black" else "black"
            lines.append(f'  {v} [style=filled, fillcolor={fill}, fontcolor={font}];')
        for u, v, data in sorted(self.graph.edges(data=True)):
            lines.append(f'  {u} -- {v} [label="{data["slots"][u]}:{data["slots"][v]}"];')
        lines.append("}")
        return "\n".join(lines)


def schottky_flip_tree(lengths: Tuple[float, float] = (4.0, 4.0), depth: int = 3, word_cap: int = 1) -> FlipTree:
    """Depth-limited tree of Schottky vertex spaces glued along boundary geodesics.

    The root uses slots 0..b−1 for its children; every other node uses slot 0
    towards its parent and slots 1..b−1 for its children. Colors alternate
    with depth, black on even depths.
    """
    if depth < 1:
        raise ConfigError(f"depth must be at least 1, got {depth}", field="depth")
    config, generators = schottky_config(lengths, word_cap)
    b = len(config)
    graph = nx.Graph()
    graph.add_node(0, depth=0, color="black")
    frontier = [0]
    next_id = 1
    for level in range(1, depth):
        nxt = []
        for parent in frontier:
            slots = range(b) if parent == 0 else range(1, b)
            for s in slots:
                graph.add_node(next_id, depth=level, color="black" if level % 2 == 0 else "white")
                graph.add_edge(parent, next_id, slots={parent: s, next_id: 0})
                nxt.append(next_id)
                next_id += 1
        frontier = nxt
    logger.info("Flip tree depth %d, branching %d: %d nodes", depth, b, graph.number_of_nodes())
    return FlipTree(graph, config, depth, tuple(lengths), generators, word_cap)


def lift_projection(tree: FlipTree, v: int, w: int) -> float:
    """Flip coordinate on the gluing geodesic into w of the projection of v, computed at w's neighbor."""
    path = nx.shortest_path(tree.graph, v, w)
    if len(path) < 3:
        raise TooClose(f"Nodes {v} and {w} are at tree distance {len(path) - 1} < 2", witness=[v, w])
    u_prev, u, _ = path[-3:]
    target = tree.config.geodesics[tree.slot(u, w)]
    source = tree.config.geodesics[tree.slot(u, u_prev)]
    return target.parameter_of(project_point(target, source))


def family_from_tree(tree: FlipTree, color: str = "black", constants: Optional[ThetaConstants] = None,
                     max_domains: int = 60) -> DomainFamily:
    """Domains are the nodes of one color (breadth-first, at most max_domains); projections via lifts."""
    if color not in ("black", "white"):
        raise ConfigError(f"color must be black or white, got {color!r}", field="color")
    constants = constants or ThetaConstants.compute(max(tree.config.min_separation, 1e-3))
    ids = tree.nodes_of_color(color)[:max_domains]
    if len(ids) < 2:
        raise TooFewDomains(f"Only {len(ids)} {color} node(s) in a depth-{tree.depth} tree", witness=len(ids))
    projections = {(C, A): (lift_projection(tree, A, C),) for C in ids for A in ids if A != C}
    return DomainFamily(ids, constants.theta, projections,
                        {"source": "flip_tree", "color": color, "constants": constants.to_json()})


def family_from_config(config: GeodesicConfig, constants: Optional[ThetaConstants] = None) -> DomainFamily:
    """One domain per geodesic, π_γ(α) the flip coordinate of the closest point of γ to α."""
    constants = constants or ThetaConstants.compute(config.min_separation)
    ids = list(range(len(config)))
    projections = {}
    for i, gamma in enumerate(config.geodesics):
        for j, alpha in enumerate(config.geodesics):
            if i != j:
                projections[(i, j)] = (gamma.parameter_of(project_point(gamma, alpha)),)
    return DomainFamily(ids, constants.theta, projections,
                        {"source": "config", "seed": config.seed, "constants": constants.to_json()})


def geodesic_chain(lam: float, count: int, center: float = 2.0, radius: float = 0.5) -> List[Geodesic]:
    """αₖ = λᵏ·[c − r, c + r] for k = 0..count−1."""
    if not (center - radius > 0 and (center + radius) < lam * (center - radius)):
        raise DisjointnessViolation("Chain translates overlap; use a larger lambda or a smaller radius",
                                    witness=[lam, center, radius])
    return [Geodesic.semicircle(center * lam ** k, radius * lam ** k) for k in range(count)]


def chain_family(lam: float, count: int, theta: Optional[float] = None,
                 center: float = 2.0, radius: float = 0.5) -> Tuple[DomainFamily, Callable, Callable]:
    """Domain family of a geodesic chain with the translation action k ↦ k + g and its coordinate maps."""
    chain = geodesic_chain(lam, count, center, radius)
    config = GeodesicConfig(chain, 0.0)
    config.min_separation = config.verify()
    theta = ThetaConstants.compute(config.min_separation).theta if theta is None else theta
    fam = family_from_config(config, ThetaConstants(0.0, config.min_separation, 0.0, theta))
    fam.metadata.update({"source": "chain", "lambda": lam})
    return fam, (lambda g, k: k + g), (lambda g, k: (lambda x: x))


# ---------------------------------------------------------------------------
# Bounded projections along a translate chain


@dataclass
class ProjectionScan:
    N: int
    max_spread: float
    argmax: dict
    comparator: float
    non_adjacent_contribution: float
    candidates: int

    def to_json(self) -> dict:
        return {"N": self.N, "max_spread": self.max_spread, "argmax": self.argmax, "comparator": self.comparator,
                "non_adjacent_contribution": self.non_adjacent_contribution, "candidates": self.candidates,
                "K_hint": "any K above max_spread bounds these projections"}


def _h_side_positive(geodesic: Geodesic) -> bool:
    # h sends the axis (−1, 1) of g1 to (0, ∞)
    h = Isometry(1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0), -1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))
    images = [h.apply_boundary(x) for x in geodesic.endpoints()]
    return all(not x.is_infinite and x.value > 0 for x in images)


def _non_adjacent_contribution(tree: FlipTree) -> float:
    whites = [v for v in tree.nodes_of_color("white") if tree.graph.nodes[v]["depth"] == 1]
    if len(whites) < 2:
        raise ScenarioUnavailable("Need two depth-1 white nodes; build a deeper tree")
    W, other = whites[0], whites[1]
    neighbors = sorted(n for n in tree.graph.neighbors(W) if tree.color(n) == "black")
    far = sorted(n for n in tree.graph.neighbors(other) if tree.color(n) == "black" and n != 0)
    if len(neighbors) < 2 or not far:
        raise ScenarioUnavailable("Depth-3 tree needed for the non-adjacent case")
    b_m, b_n, C = neighbors[0], neighbors[1], far[0]
    return abs(lift_projection(tree, b_m, C) - lift_projection(tree, b_n, C))


def bounded_projection_scan(tree: FlipTree, N: int = 10, base_slot: int = 0) -> ProjectionScan:
    """Largest d_C(φᵐα₁, φⁿα₁) over |m|, |n| ≤ N and domains C on the side of α₁, with φ = g1."""
    if N < 1:
        raise ConfigError(f"N must be at least 1, got {N}", field="N")
    if tree.depth < 2:
        raise ScenarioUnavailable("The scan needs a white node adjacent to the base domain")
    alpha = tree.config.geodesics[base_slot]
    if not _h_side_positive(alpha):
        raise ScenarioUnavailable(f"Base geodesic in slot {base_slot} is not on the translate side of the axis")
    phi = tree.generators[0]
    translates = {k: phi.power(k).image_of_geodesic(alpha) for k in range(-N, N + 1)}
    candidates: List[Geodesic] = [g for g in tree.config.geodesics if _h_side_positive(g)]
    for g in translates.values():
        if not any(g.close_to(c, 1e-9) for c in candidates):
            candidates.append(g)

    best, argmax = 0.0, {}
    for ci, C in enumerate(candidates):
        for m, n in product(range(-N, N + 1), repeat=2):
            if m >= n:
                continue
            a, b = translates[m], translates[n]
            if C.close_to(a, 1e-9) or C.close_to(b, 1e-9):
                continue
            value = d_gamma(C, a, b)
            if value > best:
                best, argmax = value, {"candidate": ci, "m": m, "n": n}
    comparator = common_perpendicular(alpha, translates[1]).length
    zero = _non_adjacent_contribution(tree) if tree.depth >= 3 else 0.0
    logger.info("Bounded projection scan N=%d: max spread %.6g over %d domains", N, best, len(candidates))
    return ProjectionScan(N, best, argmax, comparator, zero, len(candidates))
