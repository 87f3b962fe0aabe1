"""Quasimorphisms: defect estimates, homogenization, Busemann functions and induction"""
import logging
import math
import zlib
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .actions import ActionHandle, action_from_descriptor
from .errors import (ConfigError, DefectClaimViolated, NotConverged, NotFixed, NotHomogeneous,
                     PowerNotInSubgroup)
from .groups import GroupOps, dihedral_ops, integer_ops, lattice_ops
from .hyp2 import INFINITY, BoundaryPoint, HPoint, Isometry, dist

logger = logging.getLogger(__name__)

BUSEMANN_TOL = 1e-6
BUSEMANN_DEFECT = 1e-5
HOMOGENEITY_POWER = 8
HOMOGENEITY_TOL = 1e-6


@dataclass(frozen=True)
class QMap:
    """Real-valued map on a group with a claimed defect (None when no claim is made)."""
    name: str
    evaluate: Callable[[Any], float]
    defect: Optional[float]
    group: GroupOps

    def __call__(self, g) -> float:
        return self.evaluate(g)


@dataclass
class DefectEstimate:
    value: float
    claimed: Optional[float]
    witness: Optional[Tuple[Any, Any]]
    pairs: int

    def to_json(self) -> dict:
        return {"value": self.value, "claimed": self.claimed, "pairs": self.pairs,
                "witness": [repr(x) for x in self.witness] if self.witness else None}


@dataclass
class HomogenizationEstimate:
    value: float
    error_bound: float
    power: int

    def to_json(self) -> dict:
        return {"value": self.value, "power": self.power,
                "error_bound": "inf" if math.isinf(self.error_bound) else self.error_bound}


@dataclass
class DriftMap:
    """g ↦ (x ↦ x + q(g)) on the line, with the composition defect of every sampled pair."""
    drift: Dict[Any, float]
    ledger: List[Tuple[Any, Any, float]] = field(default_factory=list)
    flags: Dict[Any, str] = field(default_factory=dict)

    @property
    def max_defect(self) -> float:
        return max((d for _, _, d in self.ledger), default=0.0)

    @property
    def is_action(self) -> bool:
        return self.max_defect <= 1e-12

    def translate(self, g, x: float) -> float:
        return x + self.drift[g]

    def to_json(self) -> dict:
        return {"is_action": self.is_action, "max_defect": self.max_defect,
                "drift": [{"element": repr(g), "q": q, "flag": self.flags[g]} for g, q in self.drift.items()],
                "ledger": [{"g": repr(g), "h": repr(h), "defect": d} for g, h, d in self.ledger]}


def defect_estimate(q: QMap, pairs: Iterable[Tuple[Any, Any]]) -> DefectEstimate:
    """Largest |q(gh) − q(g) − q(h)| over the sampled pairs."""
    worst, witness, count = 0.0, None, 0
    for g, h in pairs:
        count += 1
        value = abs(q(q.group.multiply(g, h)) - q(g) - q(h))
        if value > worst:
            worst, witness = value, (g, h)
    if count == 0:
        raise ConfigError("defect_estimate needs at least one pair", field="pairs")
    if q.defect is not None and worst > q.defect + 1e-9 * (1.0 + q.defect):
        raise DefectClaimViolated(f"Sampled defect {worst:.6g} exceeds the claim {q.defect} for {q.name}",
                                  witness=witness)
    return DefectEstimate(worst, q.defect, witness, count)


def homogenize(q: QMap, g, n: int) -> HomogenizationEstimate:
    """q(gⁿ)/n with the error bound D/n."""
    if n < 1:
        raise ConfigError(f"n must be at least 1, got {n}", field="n")
    value = q(q.group.power(g, n)) / n
    bound = q.defect / n if q.defect is not None else math.inf
    return HomogenizationEstimate(value, bound, n)


# ---------------------------------------------------------------------------
# Concrete quasimorphisms


def hom_qm(h: Callable[[Any], float], group: GroupOps, name: str = "hom") -> QMap:
    return QMap(name, h, 0.0, group)


def floor_qm(h: Callable[[Any], float], group: GroupOps, name: str = "floor") -> QMap:
    """⌊h⌋ for a real-valued homomorphism h; defect at most 1."""
    return QMap(name, lambda g: float(math.floor(h(g))), 1.0, group)


def noisy_qm(h: Callable[[Any], float], group: GroupOps, amplitude: float = 1.0, name: str = "noisy") -> QMap:
    """h plus a bounded perturbation in [−amplitude, amplitude], fixed per element."""
    def noise(g) -> float:
        seed = zlib.crc32(repr(g).encode("utf-8"))
        return float(np.random.default_rng(seed).uniform(-amplitude, amplitude))

    return QMap(name, lambda g: h(g) + noise(g), 3.0 * amplitude, group)


def _ray_point(fixed_pt: BoundaryPoint, height: float) -> HPoint:
    if fixed_pt.is_infinite:
        return HPoint(0.0, height)
    # [[ξ, −1], [1, 0]] sends ∞ to ξ
    return Isometry(fixed_pt.value, -1.0, 1.0, 0.0).apply(HPoint(0.0, height))


def _check_fixed(act: ActionHandle, fixed_pt: BoundaryPoint, g):
    image = act.isometry_of(g).apply_boundary(fixed_pt)
    if not image.close_to(fixed_pt, 1e-9):
        raise NotFixed(f"{g!r} moves {fixed_pt!r} to {image!r}", witness=repr(g))


def busemann_qm(act: ActionHandle, fixed_pt: BoundaryPoint, g, depth: float = 1000.0,
                max_doublings: int = 40, base: Optional[HPoint] = None) -> float:
    """d(g·s, x_k) − d(s, x_k) along a ray x_k toward the fixed point, doubling k until it stabilizes."""
    if act.kind != "h2" or act.isometry_of is None:
        raise ConfigError(f"Busemann functions need an H2 action, got {act.kind}", field="action")
    _check_fixed(act, fixed_pt, g)
    s = base if base is not None else act.base_point
    gs = act.orbit(g, s)

    def value(height: float) -> float:
        x = _ray_point(fixed_pt, height)
        return dist(gs, x) - dist(s, x)

    height = float(depth)
    current = value(height)
    for _ in range(max_doublings):
        height *= 2.0
        nxt = value(height)
        if abs(nxt - current) <= BUSEMANN_TOL:
            return nxt
        current = nxt
    raise NotConverged(f"Busemann value still moving at height {height:.3g}", witness=repr(g))


def busemann_qmap(act: ActionHandle, fixed_pt: BoundaryPoint = INFINITY, depth: float = 1000.0) -> QMap:
    return QMap(f"busemann[{act.name},{fixed_pt!r}]", lambda g: busemann_qm(act, fixed_pt, g, depth),
                BUSEMANN_DEFECT, act.group)


def induce_from_finite_index(q0: QMap, reps: Sequence[Any], k: int, in_subgroup: Callable[[Any], bool],
                             group: GroupOps, average: bool = True) -> QMap:
    """q(g) = (1/k)·Σᵢ q0(hᵢ⁻¹gᵏhᵢ), further divided by the number of representatives when `average`.

    With `average` the sum is divided by k·|reps|, so inducing a homomorphism of the
    subgroup gives back its value on gᵏ averaged over conjugates and scaled by 1/k.
    Without it the divisor is k alone.
    """
    if k < 1 or not reps:
        raise ConfigError("Induction needs k >= 1 and at least one coset representative",
                          field="k" if k < 1 else "reps")
    reps = list(reps)
    scale = k * (len(reps) if average else 1)

    def evaluate(g) -> float:
        gk = group.power(g, k)
        if not in_subgroup(gk):
            raise PowerNotInSubgroup(f"{g!r}^{k} is not in the subgroup", witness=repr(g))
        total = 0.0
        for h in reps:
            conj = group.multiply(group.multiply(group.inverse(h), gk), h)
            if not in_subgroup(conj):
                raise PowerNotInSubgroup(f"conjugate of {g!r}^{k} by {h!r} leaves the subgroup", witness=repr(g))
            total += q0(conj)
        return total / scale

    return QMap(f"induced[{q0.name},k={k}]", evaluate, None, group)


def conjugation_defect(q: QMap, reps: Sequence[Any], samples: Sequence[Any]) -> float:
    """Largest |q(hgh⁻¹) − q(g)| over representatives h and sampled g."""
    return max((abs(q(q.group.conjugate(h, g)) - q(g)) for h in reps for g in samples), default=0.0)


def quasiline_drift(q: QMap, samples: Sequence[Any], pairs: Optional[Iterable[Tuple[Any, Any]]] = None) -> DriftMap:
    """Translation drift of each sampled element with the composition defect ledger."""
    drift = {}
    for g in samples:
        value = q(g)
        powered = q(q.group.power(g, HOMOGENEITY_POWER))
        if abs(powered - HOMOGENEITY_POWER * value) > HOMOGENEITY_POWER * HOMOGENEITY_TOL * (1.0 + abs(value)):
            raise NotHomogeneous(f"{q.name} is not homogeneous at {g!r}: q(g^8)={powered:.6g}, q(g)={value:.6g}",
                                 witness=repr(g))
        drift[g] = value
    if pairs is None:
        pairs = [(g, h) for g in samples for h in samples]
    ledger = [(g, h, abs(q(q.group.multiply(g, h)) - drift[g] - drift[h])) for g, h in pairs]
    flags = {g: "loxodromic" if abs(v) > 1e-9 else "elliptic" for g, v in drift.items()}
    result = DriftMap(drift, ledger, flags)
    logger.debug("Drift map for %s: %d elements, max defect %.3g", q.name, len(drift), result.max_defect)
    return result


# ---------------------------------------------------------------------------
# Stock examples


def even_integers_example() -> Tuple[QMap, Callable[[int], bool]]:
    """Identity on 2Z induced to Z with representatives {0, 1} and k = 2."""
    ops = integer_ops()
    q0 = hom_qm(float, ops, name="id_2Z")
    in_sub = lambda g: g % 2 == 0
    return induce_from_finite_index(q0, [0, 1], 2, in_sub, ops), in_sub


def dihedral_example() -> QMap:
    """Translation length on Z ⊂ D∞ induced to D∞ with representatives {1, reflection}."""
    ops = dihedral_ops()
    q0 = hom_qm(lambda g: float(g[1]), ops, name="translation")
    return induce_from_finite_index(q0, [ops.identity, (-1, 0)], 2, lambda g: g[0] == 1, ops)


def qmap_from_descriptor(raw: dict) -> QMap:
    """{"qm": "busemann", "action": {...}, "fixed": "inf"} | {"qm": "hom", "coeffs": [...]} | {"qm": "induced", "example": ...}."""
    kind = raw.get("qm")
    if kind == "busemann":
        act = action_from_descriptor(raw.get("action") or {})
        return busemann_qmap(act, BoundaryPoint.from_json(raw.get("fixed", "inf")), float(raw.get("depth", 1000.0)))
    if kind in ("hom", "floor", "noisy"):
        try:
            coeffs = [float(c) for c in raw["coeffs"]]
        except (KeyError, TypeError, ValueError):
            raise ConfigError("hom quasimorphism needs numeric coeffs", field="coeffs")
        ops = lattice_ops(len(coeffs))
        h = lambda g: sum(c * x for c, x in zip(coeffs, g))
        if kind == "hom":
            return hom_qm(h, ops, name=f"hom{coeffs}")
        if kind == "floor":
            return floor_qm(h, ops, name=f"floor{coeffs}")
        return noisy_qm(h, ops, float(raw.get("amplitude", 1.0)), name=f"noisy{coeffs}")
    if kind == "induced":
        example = raw.get("example", "dihedral")
        if example == "dihedral":
            return dihedral_example()
        if example == "even_integers":
            return even_integers_example()[0]
        raise ConfigError(f"Unknown induced example {example!r}", field="example")
    raise ConfigError(f"Unknown quasimorphism kind {kind!r}", field="qm")
