"""Group actions on H², lines and trees; orbit-growth classification and QI fits"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .baumslag_solitar import BSElement, BSGroup
from .errors import (BallOverflow, ConfigError, HypothesisFailed, NoFitWithinCap,
                     NotHomomorphism, UnsupportedCase)
from .groups import (AnosovData, GroupOps, IntMatrix2, TorusBundleElement, TorusBundleGroup, dihedral_ops,
                     eigen, eigen_coords, integer_ops, lattice_ops)
from .hyp2 import I, Isometry, classify, dist
from .settings import get_settings

logger = logging.getLogger(__name__)

HOM_TOL = 1e-9
LOX_MIN_RATE = 0.01
LOX_BAND_FRACTION = 0.2
FIXED_TOL = 1e-9
ELLIPTIC_RETURN = 0.25


@dataclass(frozen=True)
class ActionHandle:
    """A group acting by isometries on a metric space.

    kind is one of h2, line, tree_ball, point, graph.
    """
    name: str
    kind: str
    group: GroupOps
    orbit: Callable[[Any, Any], Any]
    metric: Callable[[Any, Any], float]
    base_point: Any
    isometry_of: Optional[Callable[[Any], Isometry]] = None
    descriptor: Dict[str, Any] = field(default_factory=dict)

    def act(self, g, x=None):
        return self.orbit(g, self.base_point if x is None else x)

    def displacement(self, g, x=None) -> float:
        x = self.base_point if x is None else x
        return self.metric(x, self.orbit(g, x))

    def homomorphism_error(self, pairs: Iterable[Tuple[Any, Any]], points: Sequence[Any] = ()) -> float:
        """Largest d(orbit(gh, x), orbit(g, orbit(h, x))) over the samples."""
        points = list(points) or [self.base_point]
        worst = 0.0
        for g, h in pairs:
            gh = self.group.multiply(g, h)
            for x in points:
                worst = max(worst, self.metric(self.orbit(gh, x), self.orbit(g, self.orbit(h, x))))
        return worst


@dataclass
class OrbitGrowthReport:
    tag: str
    rate: float
    max_displacement: float
    powers: List[int]
    band: float = 0.0
    fitted_constant: float = 0.0

    def to_json(self) -> dict:
        return {"tag": self.tag, "rate": self.rate, "max_displacement": self.max_displacement,
                "powers_sampled": len(self.powers), "band": self.band, "fitted_constant": self.fitted_constant}


@dataclass
class QIEstimate:
    C: float
    samples: int
    upper_C: float
    lower_C: float
    violations: int = 0
    skipped: int = 0

    def to_json(self) -> dict:
        return {"C": self.C, "samples": self.samples, "upper_C": self.upper_C,
                "lower_C": self.lower_C, "violations": self.violations, "skipped": self.skipped}


@dataclass
class MainLemmaCertificate:
    action_x: str
    action_y: str
    a: Any
    b: Any
    reports: Dict[str, OrbitGrowthReport]
    conclusion: str = "no hyperbolic action dominates both actions"

    def to_json(self) -> dict:
        return {"action_x": self.action_x, "action_y": self.action_y, "a": repr(self.a), "b": repr(self.b),
                "reports": {k: v.to_json() for k, v in self.reports.items()}, "conclusion": self.conclusion}


# ---------------------------------------------------------------------------
# Concrete actions


def _h2_handle(name: str, group: GroupOps, isometry_of: Callable[[Any], Isometry], descriptor: dict) -> ActionHandle:
    return ActionHandle(name, "h2", group, lambda g, z: isometry_of(g).apply(z), dist, I,
                        isometry_of, descriptor)


def anosov_action(data: AnosovData, sign: str = "plus") -> ActionHandle:
    """Action of Z²⋊_φZ on H²: p·z = z + pi(p), t·z = λ⁻¹z (plus) or p·z = z + rho(p), t·z = λz (minus)."""
    if sign not in ("plus", "minus"):
        raise ConfigError(f"sign must be plus or minus, got {sign!r}", field="sign")
    group = TorusBundleGroup(data)
    factor = 1.0 / data.lam if sign == "plus" else data.lam
    t_iso = Isometry.dilation(factor)
    if data.sign < 0:
        t_iso = t_iso @ Isometry.psi()
    coordinate = 1 if sign == "plus" else 0

    def isometry_of(g: TorusBundleElement) -> Isometry:
        shift = eigen_coords(g.p, data)[coordinate]
        return Isometry.translation(shift) @ t_iso.power(g.n)

    return _h2_handle(f"H2{'+' if sign == 'plus' else '-'}", group.ops, isometry_of,
                      {"action": f"anosov_{sign}", "phi": data.phi.rows()})


def point_action(group: GroupOps, name: str = "point") -> ActionHandle:
    return ActionHandle(name, "point", group, lambda g, x: 0.0, lambda x, y: 0.0, 0.0,
                        descriptor={"action": "point"})


def lineal_from_hom(h: Callable[[Any], float], group: GroupOps, samples: Sequence[Any] = (),
                    name: str = "R") -> ActionHandle:
    """Translation action g·x = x + h(g) on the real line."""
    for g in samples:
        for k in samples:
            defect = abs(h(group.multiply(g, k)) - h(g) - h(k))
            if defect > HOM_TOL:
                raise NotHomomorphism(f"Sampled defect {defect:.3g} exceeds {HOM_TOL}", witness=(g, k))
    return ActionHandle(name, "line", group, lambda g, x: x + h(g), lambda x, y: abs(x - y), 0.0,
                        descriptor={"action": "lineal_hom", "hom": h})


def torus_bundle_lineal(data: AnosovData) -> ActionHandle:
    """The lineal action through (p, n) ↦ n."""
    group = TorusBundleGroup(data)
    return lineal_from_hom(lambda g: float(g.n), group.ops, name="R")


def coordinate_lineal(index: int, rank: int = 2) -> ActionHandle:
    """Z^rank acting on R through one coordinate."""
    return lineal_from_hom(lambda g: float(g[index]), lattice_ops(rank), name=f"R[{index}]")


def bs_h2_action(m: int, n: int) -> ActionHandle:
    """BS(m,n) on H²: a ↦ z + 1, b ↦ (|n|/m)·z, composed with z ↦ −conj(z) when n < 0."""
    if m == abs(n):
        raise UnsupportedCase(f"BS({m},{n}) has m = |n|; use the lineal actions instead")
    if not 1 <= m < abs(n):
        raise UnsupportedCase(f"BS({m},{n}) needs 1 <= m < |n|")
    group = BSGroup(m, n)
    a_iso = Isometry.translation(1.0)
    b_iso = Isometry.dilation(abs(n) / m)
    if n < 0:
        b_iso = b_iso @ Isometry.psi()

    def isometry_of(g: BSElement) -> Isometry:
        result = Isometry.identity()
        for letter, k in g.letters():
            step = Isometry.translation(float(k)) if letter == "a" else b_iso.power(k)
            result = result @ step
        return result

    return _h2_handle(f"BS({m},{n})->H2", group.ops, isometry_of, {"action": "bs_h2", "m": m, "n": n})


def _a_exponent(g: BSElement) -> int:
    return sum(s for s, _ in g.syllables) + g.tail


def _b_exponent(g: BSElement) -> int:
    return sum(e for _, e in g.syllables)


def bs_dihedral_action(m: int) -> ActionHandle:
    """BS(m, −m) on R through D∞: a ↦ x + 1, b ↦ −x."""
    group = BSGroup(m, -m)
    dihedral = dihedral_ops()

    def image(g: BSElement):
        result = dihedral.identity
        for letter, k in g.letters():
            step = dihedral.power((1, 1), k) if letter == "a" else dihedral.power((-1, 0), k)
            result = dihedral.multiply(result, step)
        return result

    def orbit(g, x):
        s, c = image(g)
        return s * x + c

    return ActionHandle(f"BS({m},{-m})->Dinf", "line", group.ops, orbit, lambda x, y: abs(x - y), 0.0,
                        descriptor={"action": "bs_dihedral", "m": m})


def bs_lineal_actions(m: int, n: int) -> Tuple[ActionHandle, ActionHandle]:
    """The two lineal actions of BS(m, n) when m = ±n: (a-side action, b-exponent line)."""
    if abs(m) != abs(n):
        raise UnsupportedCase(f"BS({m},{n}) has no a-homomorphism to R unless m = ±n")
    group = BSGroup(m, n)
    b_line = lineal_from_hom(lambda g: float(_b_exponent(g)), group.ops, name="R_b")
    if m == n:
        a_line = lineal_from_hom(lambda g: float(_a_exponent(g)), group.ops, name="R_a")
    else:
        a_line = bs_dihedral_action(m)
    return a_line, b_line


def bs_tree_action(m: int, n: int, radius: Optional[int] = None) -> ActionHandle:
    """BS(m, n) on its Bass-Serre tree; points are coset representatives, distance from normal forms."""
    group = BSGroup(m, n)
    guard = radius if radius is not None else 4 * get_settings().orbit_powers

    def orbit(g: BSElement, x: BSElement) -> BSElement:
        image = group.coset_rep(group.multiply(g, x))
        if image.b_length > guard:
            raise BallOverflow(f"Orbit point leaves the radius-{guard} ball", witness=str(image))
        return image

    return ActionHandle(f"BS({m},{n})->T", "tree_ball", group.ops, orbit, group.tree_distance, group.identity,
                        descriptor={"action": "bs_tree", "m": m, "n": n, "radius": guard})


def cayley_action(ops: GroupOps, table: Dict[Any, int], name: str = "Cayley") -> ActionHandle:
    """Left multiplication on a computed word ball with its word metric."""
    def metric(x, y) -> float:
        key = ops.multiply(ops.inverse(x), y)
        if key not in table:
            raise BallOverflow("Pair distance falls outside the computed word ball", witness=key)
        return float(table[key])

    return ActionHandle(name, "graph", ops, lambda g, x: ops.multiply(g, x), metric, ops.identity,
                        descriptor={"action": "cayley", "size": len(table)})


# ---------------------------------------------------------------------------
# Classification and lemmas


def classify_orbit_growth(act: ActionHandle, g, N: Optional[int] = None, x=None) -> OrbitGrowthReport:
    """Tag g as loxodromic, elliptic or parabolic_suspect from d(x, gᵏx), k ≤ N.

    An orbit that falls back below its running maximum is bounded: displacements of
    loxodromic and parabolic isometries increase with k. Elliptic orbits whose period
    exceeds twice N look monotone on the window and stay parabolic_suspect.
    """
    N = N if N is not None else get_settings().orbit_powers
    if N < 16:
        raise ConfigError(f"N must be at least 16, got {N}", field="N")
    x = act.base_point if x is None else x
    displacements = []
    point = x
    for _ in range(N):
        point = act.orbit(g, point)
        displacements.append(act.metric(x, point))
    d = np.asarray(displacements, dtype=float)
    powers = list(range(1, N + 1))
    top = float(d.max())
    fall_back = float((np.maximum.accumulate(d) - d).max())
    if top <= FIXED_TOL or fall_back >= ELLIPTIC_RETURN * top:
        return OrbitGrowthReport("elliptic", 0.0, top, powers, top - float(d.min()), top)

    half = N // 2
    d_n, d_half = displacements[-1], displacements[half - 1]
    rate = max((d_n - d_half) / (N - half), 0.0)
    residuals = d - rate * np.arange(1, N + 1)
    band = float(residuals.max() - residuals.min())
    fitted = float(np.abs(residuals).max())
    if rate > LOX_MIN_RATE and band < LOX_BAND_FRACTION * d_n:
        return OrbitGrowthReport("loxodromic", rate, top, powers, band, fitted)
    return OrbitGrowthReport("parabolic_suspect", rate, top, powers, band, fitted)


def check_main_lemma(act_x: ActionHandle, act_y: ActionHandle, a, b, N: Optional[int] = None) -> MainLemmaCertificate:
    """Check the commuting-elements obstruction: ab = ba, a loxodromic and b elliptic in X, b loxodromic in Y."""
    failed = []
    if not act_x.group.commutes(a, b):
        failed.append("commute")
    reports = {
        "a_in_x": classify_orbit_growth(act_x, a, N),
        "b_in_x": classify_orbit_growth(act_x, b, N),
        "b_in_y": classify_orbit_growth(act_y, b, N),
    }
    if reports["a_in_x"].tag != "loxodromic":
        failed.append("a_loxodromic_in_x")
    if reports["b_in_x"].tag != "elliptic":
        failed.append("b_elliptic_in_x")
    if reports["b_in_y"].tag != "loxodromic":
        failed.append("b_loxodromic_in_y")
    if failed:
        raise HypothesisFailed(f"Main Lemma hypotheses failed: {', '.join(failed)}", clauses=failed,
                               witness={k: v.tag for k, v in reports.items()})
    logger.info("Main Lemma certificate for %s / %s", act_x.name, act_y.name)
    return MainLemmaCertificate(act_x.name, act_y.name, a, b, reports)


def qi_estimate(act1: ActionHandle, act2: ActionHandle, elements: Sequence[Any], cap: float = 50.0) -> QIEstimate:
    """Least C ≥ 1 with d₁/C − C ≤ d₂ ≤ C·d₁ + C between the orbit-distance tables of the sample.

    Both tables hold d(g·x₀, h·x₀) for every pair of sample elements and the base point.
    Pairs whose distance a truncated space cannot provide (BallOverflow) are counted as skipped.
    """
    if not elements:
        raise ConfigError("qi_estimate needs a nonempty element sample", field="elements")
    labels = [act1.group.identity] + list(elements)
    points1 = [act1.base_point] + [act1.act(g) for g in elements]
    points2 = [act2.base_point] + [act2.act(g) for g in elements]
    upper, lower = 1.0, 1.0
    worst_upper = worst_lower = None
    pairs, skipped = [], 0
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            try:
                d1, d2 = act1.metric(points1[i], points1[j]), act2.metric(points2[i], points2[j])
            except BallOverflow:
                skipped += 1
                continue
            pairs.append((d1, d2))
            c_up = d2 / (d1 + 1.0)
            c_low = (-d2 + math.sqrt(d2 * d2 + 4.0 * d1)) / 2.0
            if c_up > upper:
                upper, worst_upper = c_up, (labels[i], labels[j])
            if c_low > lower:
                lower, worst_lower = c_low, (labels[i], labels[j])
    if not pairs:
        raise ConfigError("No sample pair has a distance in both actions", field="elements")
    C = max(upper, lower)
    if C > cap:
        which = "upper" if upper >= lower else "lower"
        raise NoFitWithinCap(f"QI constant {C:.4g} exceeds cap {cap} ({which} bound)",
                             witness=worst_upper if which == "upper" else worst_lower)
    if skipped:
        logger.info("qi_estimate: %d of %d pairs outside the computed spaces", skipped, skipped + len(pairs))
    tol = 1e-9 * max(1.0, C)
    violations = sum(1 for d1, d2 in pairs if d2 > C * d1 + C + tol or d2 < d1 / C - C - tol)
    return QIEstimate(C, len(pairs), upper, lower, violations, skipped)


@dataclass
class ClassifierAgreement:
    trace_tag: str
    orbit_tag: str
    agree: bool
    translation_length: float
    rate: float

    def to_json(self) -> dict:
        return {"trace_tag": self.trace_tag, "orbit_tag": self.orbit_tag, "agree": self.agree,
                "translation_length": self.translation_length, "rate": self.rate,
                "length_error": abs(self.rate - self.translation_length) if self.trace_tag == "loxodromic" else 0.0}


_EXPECTED_ORBIT_TAG = {"loxodromic": "loxodromic", "elliptic": "elliptic", "identity": "elliptic",
                       "parabolic": "parabolic_suspect"}
LENGTH_TOL = 1e-4


def cyclic_action(g: Isometry, name: str = "<g>") -> ActionHandle:
    """Z acting on H² through the powers of one isometry."""
    return _h2_handle(name, integer_ops(), lambda k: g.power(k), {"action": "cyclic", "isometry": g.to_json()})


def compare_classifiers(g: Isometry, N: Optional[int] = None) -> ClassifierAgreement:
    """Trace classification of g against the orbit-growth tag of the cyclic action."""
    cls = classify(g)
    tag, length = cls.tag, cls.translation_length
    if cls.reversing_kind == "glide_reflection":
        tag = "loxodromic"
    elif cls.reversing_kind == "reflection":
        tag = "elliptic"
    report = classify_orbit_growth(cyclic_action(g), 1, N)
    agree = report.tag == _EXPECTED_ORBIT_TAG[tag]
    if agree and tag == "loxodromic":
        agree = abs(report.rate - length) <= LENGTH_TOL
    return ClassifierAgreement(tag, report.tag, agree, length, report.rate)


# ---------------------------------------------------------------------------
# Descriptors


def action_from_descriptor(raw: dict) -> ActionHandle:
    """Build an action from {"action": "anosov_plus", "phi": [[2,1],[1,1]]} style descriptors."""
    kind = raw.get("action")
    try:
        if kind in ("anosov_plus", "anosov_minus"):
            data = eigen(IntMatrix2.from_rows(raw["phi"]))
            return anosov_action(data, kind.split("_")[1])
        if kind == "bs_h2":
            return bs_h2_action(int(raw["m"]), int(raw["n"]))
        if kind == "bs_tree":
            return bs_tree_action(int(raw["m"]), int(raw["n"]), raw.get("radius"))
        if kind == "lineal_hom":
            if "phi" in raw:
                return torus_bundle_lineal(eigen(IntMatrix2.from_rows(raw["phi"])))
            coeffs = [float(c) for c in raw["coeffs"]]
            return lineal_from_hom(lambda g: sum(c * x for c, x in zip(coeffs, g)), lattice_ops(len(coeffs)),
                                   name=f"R{coeffs}")
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"Malformed action descriptor {raw!r}: {e}", field="action")
    raise ConfigError(f"Unknown action kind {kind!r}", field="action")
