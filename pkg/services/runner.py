"""
Subcommand execution shared by the command line and the HTTP routers.

Each subcommand turns a validated RunConfig into a ReportStream. Configuration
problems raise ConfigError; failed verifications are written to the report.
"""
import json
import logging
import math
from contextlib import contextmanager
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from schemas.run_config import RunConfig
from .actions import (anosov_action, bs_lineal_actions, compare_classifiers, coordinate_lineal)
from .baumslag_solitar import BSElement, BSGroup
from .errors import ConfigError, GeometryError, GroupError, HypStructError
from .geodesic_families import (FlipTree, GeodesicConfig, ThetaConstants, bounded_projection_scan, family_from_config,
                                family_from_tree, random_disjoint_geodesics, schottky_flip_tree)
from .groups import AnosovData, GroupOps, IntMatrix2, TorusBundleElement, TorusBundleGroup, claim_density_instance, \
    eigen, generating_set_equivalence, verify_confining
from .hyp2 import Isometry, classify, random_isometry
from .poset import anosov_poset, emit_dot, incomparability_certificate
from .projection_complex import (DomainFamily, bottleneck_check, build_projection_graph, build_quasi_tree,
                                 calibrate_K, modified_distance_violations, verify_axioms)
from .quasimorphisms import (QMap, busemann_qmap, defect_estimate, homogenize, qmap_from_descriptor,
                             quasiline_drift)
from .reports import ReportStream

logger = logging.getLogger(__name__)

PARABOLIC_WINDOW = (1.9, 2.1)
BUSEMANN_TOL = 1e-5
SCAN_REFERENCE_BOUND = 3
HOMOGENIZATION_POWER = 8


@contextmanager
def recorded(report: ReportStream, key: str, check: str):
    """Turn a verification error into a failed record; configuration errors pass through."""
    try:
        yield
    except ConfigError:
        raise
    except HypStructError as e:
        logger.warning("%s/%s raised %s: %s", key, check, e.__class__.__name__, e.message)
        report.add_error(key, check, e)


def anosov_data(config: RunConfig) -> AnosovData:
    if config.phi is None:
        raise ConfigError(f"{config.subcommand} needs --phi a,b,c,d", field="phi")
    a, b, c, d = config.phi
    try:
        return eigen(IntMatrix2(a, b, c, d))
    except GroupError as e:
        raise ConfigError(e.message, field="phi")


def load_inputs(paths: Sequence[str]) -> Tuple[List[DomainFamily], List[GeodesicConfig]]:
    """Read domain families and geodesic configurations from JSON files."""
    families, configs = [], []
    for path in paths:
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"Input file not found: {path}", field="inputs")
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: {e.msg}", field="inputs", line=e.lineno)
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}: expected a JSON object", field="inputs", line=1)
        if "geodesics" in raw:
            configs.append(GeodesicConfig.from_json(raw))
        elif "projections" in raw:
            families.append(DomainFamily.from_json(raw))
        else:
            raise ConfigError(f"{path}: neither a domain family nor a geodesic configuration", field="inputs")
    return families, configs


def sample_elements(ops: GroupOps, rng: np.random.Generator, count: int, box: int = 5) -> List[Any]:
    """Random elements of the groups the quasimorphism builders produce."""
    e = ops.identity
    if isinstance(e, TorusBundleElement):
        return [TorusBundleElement((int(rng.integers(-box, box + 1)), int(rng.integers(-box, box + 1))),
                                   int(rng.integers(-3, 4))) for _ in range(count)]
    if isinstance(e, BSElement):
        group = BSGroup(e.m, e.n)
        words = []
        for _ in range(count):
            length = int(rng.integers(1, 7))
            words.append(group.element([(str(rng.choice(["a", "b"])), int(rng.choice([-1, 1])))
                                        for _ in range(length)]))
        return words
    if ops.name == "D_inf":
        return [(int(rng.choice([-1, 1])), int(rng.integers(-box, box + 1))) for _ in range(count)]
    if isinstance(e, tuple):
        return [tuple(int(x) for x in rng.integers(-box, box + 1, size=len(e))) for _ in range(count)]
    if isinstance(e, int):
        return [int(x) for x in rng.integers(-4 * box, 4 * box + 1, size=count)]
    raise ConfigError(f"No element sampler for group {ops.name}", field="qm")


class SubcommandRunner:
    """Dispatches RunConfig subcommands to the services."""

    def __init__(self):
        self.handlers: Dict[str, Callable] = {
            "classify": self.classify,
            "confining": self.confining,
            "axioms": self.axioms,
            "complex": self.complex,
            "flip": self.flip,
            "poset": self.poset,
            "mainlemma": self.mainlemma,
            "qm": self.qm,
        }

    def run(self, config: RunConfig, families: Optional[List[DomainFamily]] = None,
            configs: Optional[List[GeodesicConfig]] = None) -> ReportStream:
        report = ReportStream(config.subcommand)
        loaded_families, loaded_configs = load_inputs(config.inputs)
        families = list(families or []) + loaded_families
        configs = list(configs or []) + loaded_configs
        logger.info("Running %s (seed %d)", config.subcommand, config.seed)
        self.handlers[config.subcommand](config, report, families, configs)
        logger.info("%s finished: %d records, passed=%s", config.subcommand, len(report.records), report.passed)
        return report

    # -- classify ----------------------------------------------------------

    def classify(self, config: RunConfig, report: ReportStream, families, configs):
        if config.isometry is not None:
            try:
                a, b, c, d = config.isometry
                g = Isometry.from_matrix([[a, b], [c, d]], config.reversing, normalize=True)
            except GeometryError as e:
                raise ConfigError(e.message, field="isometry")
            with recorded(report, "isometry", "classifier_agreement"):
                result = compare_classifiers(g)
                report.add("isometry", "classifier_agreement", result.agree,
                           classification=classify(g).to_json(), agreement=result.to_json())
            return
        if config.phi is not None:
            data = anosov_data(config)
            group = TorusBundleGroup(data)
            elements = {"t": group.t, "e1": group.lattice(1, 0), "e2": group.lattice(0, 1)}
            for sign in ("plus", "minus"):
                act = anosov_action(data, sign)
                for name, g in elements.items():
                    key = f"{act.name}/{name}"
                    with recorded(report, key, "classifier_agreement"):
                        iso = act.isometry_of(g)
                        result = compare_classifiers(iso)
                        report.add(key, "classifier_agreement", result.agree,
                                   classification=classify(iso).to_json(), agreement=result.to_json())
            return
        rng = np.random.default_rng(config.seed)
        accepted = 0
        index = 0
        while accepted < config.samples:
            g = random_isometry(rng)
            index += 1
            if PARABOLIC_WINDOW[0] <= abs(g.trace) <= PARABOLIC_WINDOW[1]:
                continue
            accepted += 1
            key = f"random-{accepted:05d}"
            with recorded(report, key, "classifier_agreement"):
                result = compare_classifiers(g)
                report.add(key, "classifier_agreement", result.agree, isometry=g.to_json(),
                           agreement=result.to_json())
        logger.debug("Classifier sweep drew %d matrices for %d samples", index, accepted)

    # -- confining ---------------------------------------------------------

    def confining(self, config: RunConfig, report: ReportStream, families, configs):
        data = anosov_data(config)
        for side in ("plus", "minus"):
            key = f"confining/{side}"
            with recorded(report, key, "confining"):
                result = verify_confining(config.eps, data, config.box, config.k_cap, side)
                reverified = result.reverify(data)
                report.add(key, "confining", result.passed and reverified, reverified=reverified,
                           report=result.to_json())
        if data.sign > 0:
            with recorded(report, "density/claim", "density"):
                density = claim_density_instance(data)
                report.add("density/claim", "density", density.passed, report=density.to_json())
        if config.delta is not None:
            with recorded(report, "generating_sets", "equivalence"):
                result = generating_set_equivalence(data, config.eps, config.delta)
                report.add("generating_sets", "equivalence", result["passed"], report=result)

    # -- projection complexes ----------------------------------------------

    def _generated_families(self, config: RunConfig, report: ReportStream, count: int) -> List[Tuple[str, DomainFamily]]:
        constants = ThetaConstants.compute(config.R)
        out = []
        for i in range(count):
            key = f"family-{i:04d}"
            with recorded(report, key, "generate"):
                geodesics = random_disjoint_geodesics(config.count, config.R, config.seed + i)
                out.append((key, family_from_config(geodesics, constants)))
        return out

    def _families(self, config: RunConfig, report: ReportStream, families, configs, default_count: int):
        keyed = [(f"input-{i:04d}", fam) for i, fam in enumerate(families)]
        keyed += [(f"config-{i:04d}", family_from_config(c)) for i, c in enumerate(configs)]
        return keyed or self._generated_families(config, report, default_count)

    def axioms(self, config: RunConfig, report: ReportStream, families, configs):
        for key, fam in self._families(config, report, families, configs, config.samples):
            with recorded(report, key, "axioms"):
                result = verify_axioms(fam)
                report.add(key, "axioms", result.passed, domains=len(fam), report=result.to_json())
            with recorded(report, key, "modified_distance"):
                violations = modified_distance_violations(fam)
                report.add(key, "modified_distance", not violations, violations=violations[:20],
                           violation_count=len(violations))

    def complex(self, config: RunConfig, report: ReportStream, families, configs):
        keyed = self._families(config, report, families, configs, 1)
        for key, fam in keyed:
            with recorded(report, key, "bottleneck"):
                fam.require_complete()
                if config.K is not None:
                    K, calibration = config.K, None
                else:
                    calibration = calibrate_K(fam, seed=config.seed)
                    K = calibration.K
                L = config.L if config.L is not None else K
                projection_graph = build_projection_graph(fam, K)
                tree = build_quasi_tree(fam, K, L, projection_graph=projection_graph)
                anchors = tree.anchor_graph()
                bottleneck = bottleneck_check(anchors, 2.0 * K, seed=config.seed)
                report.add(key, "bottleneck", bottleneck.passed, K=K, L=L,
                           calibration=calibration.to_json() if calibration else None,
                           projection_graph_edges=projection_graph.graph.number_of_edges(),
                           quasi_tree_nodes=tree.graph.number_of_nodes(),
                           anchor_nodes=anchors.number_of_nodes(), report=bottleneck.to_json())
                if len(keyed) == 1:
                    report.attach("projection_graph", projection_graph.to_dot())
                    report.attach("quasi_tree", tree.to_dot())

    # -- flip trees --------------------------------------------------------

    def flip(self, config: RunConfig, report: ReportStream, families, configs):
        with recorded(report, "flip/tree", "build"):
            tree: FlipTree = schottky_flip_tree(tuple(config.lengths), config.depth, config.word_cap)
            expected = FlipTree.expected_size(tree.branching, tree.depth)
            report.add("flip/tree", "build", tree.graph.number_of_nodes() == expected,
                       nodes=tree.graph.number_of_nodes(), expected=expected, branching=tree.branching)
            report.attach("flip_tree", tree.to_dot())
        if not report.passed:
            return
        for color in ("black", "white"):
            key = f"flip/family/{color}"
            with recorded(report, key, "axioms"):
                fam = family_from_tree(tree, color)
                result = verify_axioms(fam)
                report.add(key, "axioms", result.passed, domains=len(fam), report=result.to_json())
        with recorded(report, "flip/scan", "bounded_projection"):
            scan = bounded_projection_scan(tree, config.scan_bound)
            fields = {"scan": scan.to_json()}
            passed = scan.non_adjacent_contribution == 0.0 and math.isfinite(scan.max_spread)
            if config.scan_bound > SCAN_REFERENCE_BOUND:
                reference = bounded_projection_scan(tree, SCAN_REFERENCE_BOUND)
                fields["reference"] = reference.to_json()
                passed = passed and abs(scan.max_spread - reference.max_spread) <= 1e-9 * max(1.0, scan.max_spread)
            report.add("flip/scan", "bounded_projection", passed, **fields)

    # -- poset and lemmas --------------------------------------------------

    def poset(self, config: RunConfig, report: ReportStream, families, configs):
        data = anosov_data(config)
        with recorded(report, "poset", "assembly"):
            diagram = anosov_poset(data, config.seed)
            report.add("poset", "assembly", True, nodes=len(diagram.nodes), edges=len(diagram.hasse_edges),
                       metadata={k: v for k, v in diagram.metadata.items() if k != "reverse_templates"})
            for label, node in diagram.nodes.items():
                report.add(f"node/{label}", "kind", True, **node.to_json())
            for (u, v), witness in diagram.witnesses.items():
                report.add(f"witness/{u}->{v}", "dominance", True, **witness.to_json())
            for (x, y), cert in diagram.incomparable.items():
                report.add(f"incomparable/{x}|{y}", "certificate", True, **cert.to_json())
            for name, outcome in diagram.metadata["reverse_templates"].items():
                report.add(f"reverse/{name}", "no_witness", outcome["failed"], **outcome)
            report.attach("poset", emit_dot(diagram))

    def mainlemma(self, config: RunConfig, report: ReportStream, families, configs):
        key = f"mainlemma/{config.instance}"
        with recorded(report, key, "certificate"):
            if config.instance == "bs22":
                act_x, act_y = bs_lineal_actions(2, 2)
                bs = BSGroup(2, 2)
                a, b = bs.ops.power(bs.a, 2), bs.b
            else:
                act_x, act_y = coordinate_lineal(0), coordinate_lineal(1)
                a, b = (1, 0), (0, 1)
                if config.instance == "broken":
                    b = a
            certificate = incomparability_certificate(act_x, act_y, "main_lemma", a=a, b=b)
            report.add(key, "certificate", True, **certificate.to_json())

    def qm(self, config: RunConfig, report: ReportStream, families, configs):
        rng = np.random.default_rng(config.seed)
        if config.qm is not None:
            q = qmap_from_descriptor(config.qm)
            self._qm_estimates(q, rng, config.samples, report)
            return
        data = anosov_data(config)
        act = anosov_action(data, "plus")
        q = busemann_qmap(act)
        group = TorusBundleGroup(data)
        with recorded(report, "busemann/t", "value"):
            value = q(group.t)
            report.add("busemann/t", "value", abs(value - data.log_lambda) <= BUSEMANN_TOL,
                       value=value, expected=data.log_lambda)
        with recorded(report, "busemann/lattice", "value"):
            points = [group.lattice(int(x), int(y)) for x, y in rng.integers(-10, 11, size=(10, 2))]
            values = [q(p) for p in points]
            report.add("busemann/lattice", "value", max(abs(v) for v in values) <= BUSEMANN_TOL,
                       max_abs=max(abs(v) for v in values), samples=len(values))
        self._qm_estimates(q, rng, config.samples, report)

    def _qm_estimates(self, q: QMap, rng: np.random.Generator, samples: int, report: ReportStream):
        elements = sample_elements(q.group, rng, samples)
        pairs = list(zip(elements, sample_elements(q.group, rng, samples)))
        with recorded(report, f"qm/{q.name}", "defect"):
            estimate = defect_estimate(q, pairs)
            report.add(f"qm/{q.name}", "defect", True, **estimate.to_json())
        with recorded(report, f"qm/{q.name}", "homogenization"):
            values = [homogenize(q, g, HOMOGENIZATION_POWER).to_json() for g in elements[:5]]
            report.add(f"qm/{q.name}", "homogenization", True, values=values)
        if q.defect == 0.0:
            with recorded(report, f"qm/{q.name}", "drift"):
                drift = quasiline_drift(q, elements[:8])
                report.add(f"qm/{q.name}", "drift", drift.is_action, max_defect=drift.max_defect)


# Global runner
subcommand_runner = SubcommandRunner()


def run(config: RunConfig, families: Optional[List[DomainFamily]] = None,
        configs: Optional[List[GeodesicConfig]] = None) -> ReportStream:
    """Execute one subcommand and return its report."""
    return subcommand_runner.run(config, families, configs)
