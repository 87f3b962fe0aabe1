"""
Hyperbolic-structure posets for Anosov mapping tori.

Nodes are concrete actions, Hasse edges carry verified dominance witnesses
(coarsely Lipschitz, coarsely equivariant maps) and incomparable pairs carry
certificates built from fixed-point patterns or commuting-element obstructions.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np

from .actions import ActionHandle, anosov_action, check_main_lemma, classify_orbit_growth, point_action, \
    torus_bundle_lineal
from .errors import ConfigError, PatternNotFound, PosetError, WitnessFailed
from .groups import AnosovData, IntMatrix2, TorusBundleGroup, eigen
from .hyp2 import INFINITY, HPoint, I, classify, random_point
from .settings import get_settings

logger = logging.getLogger(__name__)

MAX_EQUIVARIANCE_DEFECT = 5.0
MAX_LIPSCHITZ_C = 1e3
NODE_KINDS = ("elliptic", "lineal", "quasi_parabolic", "general_type")
SCOPE_NOTE = ("Certifies the constructed representatives and the relations between them; "
              "it makes no claim that these are all hyperbolic structures of the group.")


@dataclass
class HypStructureNode:
    label: str
    kind: str
    action: ActionHandle
    evidence: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise ConfigError(f"Unknown node kind {self.kind!r}", field="kind")

    def to_json(self) -> dict:
        return {"label": self.label, "kind": self.kind, "action": self.action.name, "evidence": self.evidence}


@dataclass
class DominanceWitness:
    """A verified map from the greater action's space to the lesser one's."""
    greater: str
    lesser: str
    map_name: str
    lipschitz_C: float
    lipschitz_ratio: float
    equivariance_defect: float
    point_pairs: int
    element_samples: int

    def to_json(self) -> dict:
        return {"greater": self.greater, "lesser": self.lesser, "map": self.map_name,
                "lipschitz_C": self.lipschitz_C, "lipschitz_ratio": self.lipschitz_ratio,
                "equivariance_defect": self.equivariance_defect, "point_pairs": self.point_pairs,
                "element_samples": self.element_samples}


@dataclass
class IncomparabilityCertificate:
    pair: Tuple[str, str]
    strategy: str
    evidence: Dict[str, Any]

    def to_json(self) -> dict:
        return {"pair": list(self.pair), "strategy": self.strategy, "evidence": self.evidence}


@dataclass
class PosetDiagram:
    nodes: Dict[str, HypStructureNode]
    hasse_edges: List[Tuple[str, str]]
    witnesses: Dict[Tuple[str, str], DominanceWitness] = field(default_factory=dict)
    incomparable: Dict[Tuple[str, str], IncomparabilityCertificate] = field(default_factory=dict)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def digraph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(self.nodes)
        graph.add_edges_from(self.hasse_edges)
        return graph

    def validate(self) -> None:
        """Raise PosetError unless the Hasse relation is a reduced order and certificates agree with it."""
        graph = self.digraph()
        for u, v in self.hasse_edges:
            if u not in self.nodes or v not in self.nodes:
                raise PosetError(f"Edge {u} -> {v} names an unknown node")
            if graph.has_edge(v, u):
                raise PosetError(f"Edges {u} -> {v} and {v} -> {u} break antisymmetry")
        if not nx.is_directed_acyclic_graph(graph):
            raise PosetError("Hasse relation has a directed cycle")
        reduced = nx.transitive_reduction(graph)
        extra = sorted(set(graph.edges) - set(reduced.edges))
        if extra:
            raise PosetError(f"Hasse relation is not transitively reduced: {extra}")
        for edge in self.hasse_edges:
            if edge not in self.witnesses:
                raise PosetError(f"Edge {edge[0]} -> {edge[1]} has no dominance witness")
        for x, y in self.incomparable:
            if nx.has_path(graph, x, y) or nx.has_path(graph, y, x):
                raise PosetError(f"{x} and {y} are certified incomparable but comparable in the diagram")

    def to_json(self) -> dict:
        return {
            "nodes": [node.to_json() for node in self.nodes.values()],
            "hasse_edges": [list(e) for e in self.hasse_edges],
            "witnesses": [self.witnesses[e].to_json() for e in self.hasse_edges if e in self.witnesses],
            "incomparable": [c.to_json() for _, c in sorted(self.incomparable.items())],
            "metadata": self.metadata,
        }


# ---------------------------------------------------------------------------
# Dominance witnesses


def dominance_witness(greater: ActionHandle, lesser: ActionHandle, f: Callable[[Any], Any],
                      points: Sequence[Any], elements: Sequence[Any], map_name: str = "f",
                      max_defect: float = MAX_EQUIVARIANCE_DEFECT, max_C: float = MAX_LIPSCHITZ_C) -> DominanceWitness:
    """Fit the coarse Lipschitz constant of f on point pairs and its equivariance defect on elements."""
    if len(points) < 2 or not elements:
        raise ConfigError("dominance_witness needs at least two points and one element", field="samples")
    images = [f(x) for x in points]
    C, ratio, pairs = 0.0, 0.0, 0
    worst_pair = None
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            d1 = greater.metric(points[i], points[j])
            d2 = lesser.metric(images[i], images[j])
            pairs += 1
            if d2 / (d1 + 1.0) > C:
                C, worst_pair = d2 / (d1 + 1.0), (points[i], points[j])
            if d1 > 1e-9:
                ratio = max(ratio, d2 / d1)
    if C > max_C:
        raise WitnessFailed(f"{map_name}: Lipschitz constant {C:.4g} exceeds {max_C}", witness=worst_pair)

    defect, worst_element = 0.0, None
    for g in elements:
        for x, fx in zip(points, images):
            value = lesser.metric(f(greater.orbit(g, x)), lesser.orbit(g, fx))
            if value > defect:
                defect, worst_element = value, (g, x)
    if defect > max_defect:
        raise WitnessFailed(f"{map_name}: equivariance defect {defect:.4g} exceeds {max_defect}",
                            witness=worst_element)
    logger.debug("Witness %s: %s -> %s, C=%.4g ratio=%.4g defect=%.3g", map_name, greater.name, lesser.name,
                 C, ratio, defect)
    return DominanceWitness(greater.name, lesser.name, map_name, C, ratio, defect, pairs, len(elements))


def height_map(data: AnosovData, sign: str = "plus") -> Callable[[HPoint], float]:
    """z ↦ −ln(Im z)/ln λ for H²⁺ and z ↦ ln(Im z)/ln λ for H²⁻."""
    scale = (-1.0 if sign == "plus" else 1.0) / data.log_lambda
    return lambda z: scale * math.log(z.im)


def reverse_templates(data: AnosovData) -> Dict[str, Callable[[float], HPoint]]:
    """Candidate maps R → H²⁺ tried in the reverse direction."""
    lam = data.lam
    return {
        "vertical_geodesic": lambda x: HPoint(0.0, lam ** (-x)),
        "horocycle": lambda x: HPoint(x, 1.0),
        "constant": lambda x: I,
    }


def template_sweep(greater: ActionHandle, lesser: ActionHandle, templates: Dict[str, Callable[[Any], Any]],
                   points: Sequence[Any], elements: Sequence[Any]) -> Dict[str, dict]:
    """Try every template as a dominance witness; reports the outcome of each."""
    outcome = {}
    for name in sorted(templates):
        try:
            witness = dominance_witness(greater, lesser, templates[name], points, elements, map_name=name)
            outcome[name] = {"failed": False, "witness": witness.to_json()}
        except WitnessFailed as e:
            outcome[name] = {"failed": True, "reason": e.message}
    return outcome


# ---------------------------------------------------------------------------
# Incomparability


def _fixed_point_role(act: ActionHandle, conjugates: Sequence[Any]) -> Optional[Tuple[str, Any]]:
    """Which fixed point the conjugates share ('repelling' or 'attracting') while the other one varies."""
    attracting, repelling = [], []
    for c in conjugates:
        cls = classify(act.isometry_of(c))
        if cls.attracting is None:
            return None
        attracting.append(cls.attracting)
        repelling.append(cls.repelling)

    def shared(points):
        return all(p.close_to(points[0]) for p in points)

    if shared(repelling) and not shared(attracting):
        return "repelling", repelling[0]
    if shared(attracting) and not shared(repelling):
        return "attracting", attracting[0]
    return None


def conjugator_sample(group: TorusBundleGroup, count: int = 20, max_length: int = 4) -> List[Any]:
    """Distinct elements of the words of length ≤ max_length in t±1, e1±1, e2±1, in breadth-first order."""
    ops = group.ops
    letters = [group.t, ops.inverse(group.t)]
    for e in (group.lattice(1, 0), group.lattice(0, 1)):
        letters += [e, ops.inverse(e)]
    seen = [ops.identity]
    known = {ops.identity}
    frontier = [ops.identity]
    for _ in range(max_length):
        nxt = []
        for word in frontier:
            for letter in letters:
                h = ops.multiply(word, letter)
                if h not in known:
                    known.add(h)
                    seen.append(h)
                    nxt.append(h)
                    if len(seen) >= count:
                        return seen
        frontier = nxt
    return seen


def incomparability_certificate(act_x: ActionHandle, act_y: ActionHandle, strategy: str,
                                g=None, conjugators: Optional[Sequence[Any]] = None,
                                a=None, b=None, N: Optional[int] = None) -> IncomparabilityCertificate:
    """Certify that two actions are incomparable by `main_lemma` (a, b) or `fixed_point_pattern` (g)."""
    pair = (act_x.name, act_y.name)
    if strategy == "main_lemma":
        if a is None or b is None:
            raise ConfigError("main_lemma needs elements a and b", field="a" if a is None else "b")
        certificate = check_main_lemma(act_x, act_y, a, b, N)
        return IncomparabilityCertificate(pair, strategy, certificate.to_json())
    if strategy != "fixed_point_pattern":
        raise ConfigError(f"Unknown strategy {strategy!r}", field="strategy")
    if g is None or not conjugators:
        raise ConfigError("fixed_point_pattern needs g and a conjugator sample", field="conjugators")
    if act_x.isometry_of is None or act_y.isometry_of is None:
        raise ConfigError("fixed_point_pattern needs actions on H2", field="action")

    conjugates = [act_x.group.conjugate(h, g) for h in conjugators]
    role_x = _fixed_point_role(act_x, conjugates)
    role_y = _fixed_point_role(act_y, conjugates)
    if role_x is None or role_y is None or role_x[0] == role_y[0]:
        raise PatternNotFound(
            f"No opposite fixed-point pattern for {act_x.name} / {act_y.name}: "
            f"{role_x[0] if role_x else None} vs {role_y[0] if role_y else None}", witness=repr(g))
    evidence = {
        "g": repr(g), "conjugators": len(conjugates),
        act_x.name: {"shared": role_x[0], "point": role_x[1].to_json()},
        act_y.name: {"shared": role_y[0], "point": role_y[1].to_json()},
    }
    logger.info("Fixed-point certificate: %s shares its %s point, %s its %s point",
                act_x.name, role_x[0], act_y.name, role_y[0])
    return IncomparabilityCertificate(pair, strategy, evidence)


# ---------------------------------------------------------------------------
# The Anosov mapping torus poset


class PosetBuilder:
    """Assembles and certifies the poset of an Anosov mapping torus."""

    def __init__(self, points: int = 24, elements: int = 24, conjugators: int = 20):
        self.points = points
        self.elements = elements
        self.conjugators = conjugators

    def _h2_points(self, rng: np.random.Generator) -> List[HPoint]:
        vertical = [HPoint(0.0, math.exp(s)) for s in np.linspace(-3.0, 3.0, 7)]
        return vertical + [random_point(rng) for _ in range(self.points)]

    def _elements(self, group: TorusBundleGroup, rng: np.random.Generator) -> List[Any]:
        fixed = [group.t, group.lattice(1, 0), group.lattice(0, 1), group.lattice(10_000, 0),
                 group.lattice(0, 10_000)]
        return fixed + [group.random_element(rng) for _ in range(self.elements)]

    def _check_kind(self, node: HypStructureNode, group: TorusBundleGroup, elements: Sequence[Any],
                    conjugates: Sequence[Any]) -> None:
        act = node.action
        t_tag = classify_orbit_growth(act, group.t).tag
        node.evidence["t"] = t_tag
        if node.kind == "elliptic":
            worst = max(act.displacement(g) for g in elements)
            node.evidence["max_displacement"] = worst
            if worst > 1e-9:
                raise WitnessFailed(f"{node.label} is not elliptic: displacement {worst:.3g}")
        elif node.kind == "lineal":
            tags = {name: classify_orbit_growth(act, e).tag
                    for name, e in (("e1", group.lattice(1, 0)), ("e2", group.lattice(0, 1)))}
            node.evidence.update(tags)
            if t_tag != "loxodromic" or any(tag != "elliptic" for tag in tags.values()):
                raise WitnessFailed(f"{node.label} is not lineal on the sample: t={t_tag}, {tags}")
        elif node.kind == "quasi_parabolic":
            moved = [g for g in elements if not act.isometry_of(g).apply_boundary(INFINITY).close_to(INFINITY)]
            role = _fixed_point_role(act, conjugates)
            node.evidence["fixes_infinity"] = not moved
            node.evidence["loxodromic_axes_share"] = role[0] if role else None
            if t_tag != "loxodromic" or moved or role is None:
                raise WitnessFailed(f"{node.label} is not quasi-parabolic on the sample", witness=moved[:1])
        else:
            raise ConfigError(f"No sampler for node kind {node.kind!r}", field="kind")

    def build(self, data: Union[AnosovData, IntMatrix2], seed: Optional[int] = None) -> PosetDiagram:
        if isinstance(data, IntMatrix2):
            data = eigen(data)
        seed = get_settings().seed if seed is None else seed
        rng = np.random.default_rng(seed)
        group = TorusBundleGroup(data)

        point = HypStructureNode("point", "elliptic", point_action(group.ops))
        line = HypStructureNode("R", "lineal", torus_bundle_lineal(data))
        plus = HypStructureNode("H2+", "quasi_parabolic", anosov_action(data, "plus"))
        minus = HypStructureNode("H2-", "quasi_parabolic", anosov_action(data, "minus"))
        nodes = {n.label: n for n in (point, line, plus, minus)}

        h2_points = self._h2_points(rng)
        line_points = [float(x) for x in np.linspace(-3.0, 3.0, 13)]
        elements = self._elements(group, rng)
        conjugators = conjugator_sample(group, self.conjugators)
        conjugates = [group.conjugate(h, group.t) for h in conjugators]
        for node in nodes.values():
            self._check_kind(node, group, elements, conjugates)

        witnesses = {
            ("H2+", "R"): dominance_witness(plus.action, line.action, height_map(data, "plus"),
                                            h2_points, elements, map_name="-ln(Im z)/ln(lambda)"),
            ("H2-", "R"): dominance_witness(minus.action, line.action, height_map(data, "minus"),
                                            h2_points, elements, map_name="ln(Im z)/ln(lambda)"),
            ("R", "point"): dominance_witness(line.action, point.action, lambda x: 0.0,
                                              line_points, elements, map_name="constant"),
        }
        certificate = incomparability_certificate(plus.action, minus.action, "fixed_point_pattern",
                                                  g=group.t, conjugators=conjugators)
        reverse = template_sweep(line.action, plus.action, reverse_templates(data), line_points, elements)

        diagram = PosetDiagram(
            nodes=nodes,
            hasse_edges=[("H2+", "R"), ("H2-", "R"), ("R", "point")],
            witnesses=witnesses,
            incomparable={("H2+", "H2-"): certificate},
            metadata={"phi": data.phi.rows(), "lambda": data.lam, "trace": data.phi.trace, "seed": seed,
                      "scope": SCOPE_NOTE, "reverse_templates": reverse},
        )
        diagram.validate()
        logger.info("Poset for %s: %d nodes, %d edges", data.phi, len(nodes), len(diagram.hasse_edges))
        return diagram


def emit_dot(diagram: PosetDiagram) -> str:
    """Deterministic DOT rendering; incomparable pairs become dashed no-edge comments."""
    lines = ["digraph hyperbolic_structures {", "  rankdir=TB;"]
    if "scope" in diagram.metadata:
        lines.append(f"  // {diagram.metadata['scope']}")
    for label, node in diagram.nodes.items():
        lines.append(f'  "{label}" [label="{node.kind}: {label}"];')
    for u, v in sorted(diagram.hasse_edges):
        lines.append(f'  "{u}" -> "{v}";')
    for (x, y), cert in sorted(diagram.incomparable.items()):
        lines.append(f'  // incomparable "{x}" .. "{y}" [style=dashed] certified by {cert.strategy}')
    lines.append("}")
    return "\n".join(lines) + "\n"


# Global builder
poset_builder = PosetBuilder()


def anosov_poset(data: Union[AnosovData, IntMatrix2], seed: Optional[int] = None) -> PosetDiagram:
    """Build the certified poset of Z²⋊_φZ."""
    return poset_builder.build(data, seed)
