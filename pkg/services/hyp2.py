"""Upper half-plane geometry: points, geodesics, isometries and projections"""
import cmath
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Union

import numpy as np

from .errors import AsymptoticOrCrossing, DegenerateMatrix, GeometryError, NonPositiveImaginary

logger = logging.getLogger(__name__)

ALG_TOL = 1e-9
GEOM_TOL = 1e-7
PARABOLIC_BAND = 1e-9


@dataclass(frozen=True)
class HPoint:
    re: float
    im: float

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise GeometryError(f"Non-finite point ({self.re}, {self.im})")
        if self.im <= 0:
            raise NonPositiveImaginary(f"Imaginary part must be positive, got {self.im}")

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(float(z.real), float(z.imag))

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    def to_json(self) -> list:
        return [self.re, self.im]


I = HPoint(0.0, 1.0)


@dataclass(frozen=True)
class BoundaryPoint:
    """Point of the real line or the point at infinity."""
    kind: str
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in ("finite", "infinity"):
            raise GeometryError(f"Unknown boundary point kind {self.kind!r}")
        if self.kind == "finite" and not math.isfinite(self.value):
            raise GeometryError(f"Finite boundary point needs a finite value, got {self.value}")

    @classmethod
    def finite(cls, x: float) -> "BoundaryPoint":
        return cls("finite", float(x))

    @classmethod
    def infinity(cls) -> "BoundaryPoint":
        return cls("infinity")

    @property
    def is_infinite(self) -> bool:
        return self.kind == "infinity"

    def close_to(self, other: "BoundaryPoint", tol: float = GEOM_TOL) -> bool:
        if self.is_infinite or other.is_infinite:
            return self.is_infinite and other.is_infinite
        return abs(self.value - other.value) <= tol * max(1.0, abs(self.value), abs(other.value))

    def to_json(self) -> Union[float, str]:
        return "inf" if self.is_infinite else self.value

    @classmethod
    def from_json(cls, raw) -> "BoundaryPoint":
        if isinstance(raw, str) and raw.lower() in ("inf", "infinity", "oo"):
            return cls.infinity()
        return cls.finite(float(raw))

    def __repr__(self):
        return "∞" if self.is_infinite else f"{self.value:.12g}"


INFINITY = BoundaryPoint.infinity()


def _as_boundary(x) -> BoundaryPoint:
    if isinstance(x, BoundaryPoint):
        return x
    if x is None or (isinstance(x, float) and math.isinf(x)):
        return INFINITY
    return BoundaryPoint.finite(x)


@dataclass(frozen=True)
class Geodesic:
    """Complete geodesic given by its two boundary endpoints.

    Endpoints are stored in canonical order: a vertical geodesic keeps the
    point at infinity as `end`; a semicircle has `start < end`. The
    arc-length parameter grows from `start` towards `end`.
    """
    start: BoundaryPoint
    end: BoundaryPoint

    def __post_init__(self):
        p, q = self.start, self.end
        if p.is_infinite and q.is_infinite:
            raise GeometryError("Geodesic endpoints must be distinct")
        if p.is_infinite:
            p, q = q, p
        elif not q.is_infinite:
            if p.value == q.value:
                raise GeometryError("Geodesic endpoints must be distinct")
            if p.value > q.value:
                p, q = q, p
        object.__setattr__(self, "start", p)
        object.__setattr__(self, "end", q)

    @classmethod
    def from_endpoints(cls, p, q) -> "Geodesic":
        return cls(_as_boundary(p), _as_boundary(q))

    @classmethod
    def vertical(cls, foot: float) -> "Geodesic":
        return cls(BoundaryPoint.finite(foot), INFINITY)

    @classmethod
    def semicircle(cls, center: float, radius: float) -> "Geodesic":
        if radius <= 0:
            raise GeometryError(f"Semicircle radius must be positive, got {radius}")
        return cls(BoundaryPoint.finite(center - radius), BoundaryPoint.finite(center + radius))

    @classmethod
    def through(cls, p: HPoint, q: HPoint) -> "Geodesic":
        """The geodesic through two distinct points."""
        if p == q:
            raise GeometryError("Need two distinct points to determine a geodesic")
        if abs(p.re - q.re) <= 1e-14 * max(1.0, abs(p.re)):
            return cls.vertical(p.re)
        center = (abs(p.z) ** 2 - abs(q.z) ** 2) / (2.0 * (p.re - q.re))
        return cls.semicircle(center, abs(p.z - center))

    @property
    def is_vertical(self) -> bool:
        return self.end.is_infinite

    @property
    def foot(self) -> float:
        if not self.is_vertical:
            raise GeometryError("Semicircle has no foot")
        return self.start.value

    @property
    def center(self) -> float:
        if self.is_vertical:
            raise GeometryError("Vertical geodesic has no center")
        return 0.5 * (self.start.value + self.end.value)

    @property
    def radius(self) -> float:
        if self.is_vertical:
            raise GeometryError("Vertical geodesic has no radius")
        return 0.5 * (self.end.value - self.start.value)

    def endpoints(self):
        return (self.start, self.end)

    def standard_map(self) -> "Isometry":
        """Isometry sending 0 to `start`, infinity to `end` and i·e^s to point_at(s)."""
        if self.is_vertical:
            return Isometry(1.0, self.foot, 0.0, 1.0)
        u, v = self.start.value, self.end.value
        scale = math.sqrt(v - u)
        return Isometry(v / scale, u / scale, 1.0 / scale, 1.0 / scale)

    def point_at(self, s: float) -> HPoint:
        return self.standard_map().apply(HPoint(0.0, math.exp(s)))

    def parameter_of(self, p: HPoint) -> float:
        """Arc-length parameter of a point lying on the geodesic."""
        if self.is_vertical:
            return math.log(p.im)
        u, v = self.start.value, self.end.value
        return math.log(abs((p.z - u) / (v - p.z)))

    def contains(self, p: HPoint, tol: float = GEOM_TOL) -> bool:
        if self.is_vertical:
            return abs(p.re - self.foot) <= tol * max(1.0, abs(self.foot))
        return abs(abs(p.z - self.center) - self.radius) <= tol * max(1.0, self.radius)

    def shares_endpoint(self, other: "Geodesic", tol: float = 1e-12) -> bool:
        return any(x.close_to(y, tol) for x in self.endpoints() for y in other.endpoints())

    def close_to(self, other: "Geodesic", tol: float = GEOM_TOL) -> bool:
        return self.start.close_to(other.start, tol) and self.end.close_to(other.end, tol)

    def to_json(self) -> dict:
        if self.is_vertical:
            return {"type": "vertical", "foot": self.foot}
        return {"type": "semicircle", "center": self.center, "radius": self.radius}

    @classmethod
    def from_json(cls, raw: dict) -> "Geodesic":
        kind = raw.get("type")
        if kind == "vertical":
            return cls.vertical(float(raw["foot"]))
        if kind == "semicircle":
            return cls.semicircle(float(raw["center"]), float(raw["radius"]))
        raise GeometryError(f"Unknown geodesic type {kind!r}")


@dataclass(frozen=True)
class Isometry:
    """z ↦ (a z + b)/(c z + d), preceded by z ↦ −conj(z) when `reversing`."""
    a: float
    b: float
    c: float
    d: float
    reversing: bool = False

    def __post_init__(self):
        det = self.a * self.d - self.b * self.c
        scale = max(1.0, self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d)
        if not math.isfinite(det) or abs(det - 1.0) > ALG_TOL * scale:
            raise DegenerateMatrix(f"Determinant {det!r} is not 1", witness=(self.a, self.b, self.c, self.d))

    @classmethod
    def from_matrix(cls, m, reversing: bool = False, normalize: bool = False) -> "Isometry":
        """Build from [[a, b], [c, d]]; `normalize` rescales a positive determinant to 1."""
        (a, b), (c, d) = m
        a, b, c, d = float(a), float(b), float(c), float(d)
        if normalize:
            det = a * d - b * c
            if det <= 0:
                raise DegenerateMatrix(f"Cannot normalize determinant {det!r}", witness=(a, b, c, d))
            s = math.sqrt(det)
            a, b, c, d = a / s, b / s, c / s, d / s
        return cls(a, b, c, d, reversing)

    @classmethod
    def identity(cls) -> "Isometry":
        return cls(1.0, 0.0, 0.0, 1.0)

    @classmethod
    def psi(cls) -> "Isometry":
        """The reflection z ↦ −conj(z)."""
        return cls(1.0, 0.0, 0.0, 1.0, True)

    @classmethod
    def translation(cls, x: float) -> "Isometry":
        return cls(1.0, x, 0.0, 1.0)

    @classmethod
    def dilation(cls, k: float) -> "Isometry":
        if k <= 0:
            raise DegenerateMatrix(f"Dilation factor must be positive, got {k}")
        s = math.sqrt(k)
        return cls(s, 0.0, 0.0, 1.0 / s)

    @property
    def trace(self) -> float:
        return self.a + self.d

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def apply(self, p: HPoint) -> HPoint:
        z = p.z
        if self.reversing:
            z = -z.conjugate()
        w = (self.a * z + self.b) / (self.c * z + self.d)
        return HPoint(w.real, w.imag)

    def apply_boundary(self, x: BoundaryPoint) -> BoundaryPoint:
        if x.is_infinite:
            if self.c == 0.0:
                return INFINITY
            return BoundaryPoint.finite(self.a / self.c)
        t = -x.value if self.reversing else x.value
        den = self.c * t + self.d
        if den == 0.0:
            return INFINITY
        return BoundaryPoint.finite((self.a * t + self.b) / den)

    def image_of_geodesic(self, g: Geodesic) -> Geodesic:
        return Geodesic(self.apply_boundary(g.start), self.apply_boundary(g.end))

    def _psi_conjugate(self) -> "Isometry":
        return Isometry(self.a, -self.b, -self.c, self.d, self.reversing)

    def compose(self, other: "Isometry") -> "Isometry":
        """self ∘ other."""
        m2 = other._psi_conjugate() if self.reversing else other
        a = self.a * m2.a + self.b * m2.c
        b = self.a * m2.b + self.b * m2.d
        c = self.c * m2.a + self.d * m2.c
        d = self.c * m2.b + self.d * m2.d
        return _renormalized(a, b, c, d, self.reversing != other.reversing)

    def __matmul__(self, other: "Isometry") -> "Isometry":
        return self.compose(other)

    def inverse(self) -> "Isometry":
        if self.reversing:
            return Isometry(self.d, self.b, self.c, self.a, True)
        return Isometry(self.d, -self.b, -self.c, self.a)

    def power(self, n: int) -> "Isometry":
        result = Isometry.identity()
        base = self if n >= 0 else self.inverse()
        n = abs(n)
        while n:
            if n & 1:
                result = result.compose(base)
            base = base.compose(base)
            n >>= 1
        return result

    def conjugate(self, h: "Isometry") -> "Isometry":
        """h ∘ self ∘ h⁻¹."""
        return h.compose(self).compose(h.inverse())

    def is_identity(self, tol: float = ALG_TOL) -> bool:
        if self.reversing:
            return False
        for sign in (1.0, -1.0):
            if (abs(self.a - sign) <= tol and abs(self.d - sign) <= tol
                    and abs(self.b) <= tol and abs(self.c) <= tol):
                return True
        return False

    def same_as(self, other: "Isometry", tol: float = 1e-8) -> bool:
        if self.reversing != other.reversing:
            return False
        mine = np.array([self.a, self.b, self.c, self.d])
        theirs = np.array([other.a, other.b, other.c, other.d])
        return bool(np.allclose(mine, theirs, atol=tol) or np.allclose(mine, -theirs, atol=tol))

    def to_json(self) -> dict:
        return {"m": [self.a, self.b, self.c, self.d], "rev": self.reversing}

    @classmethod
    def from_json(cls, raw: dict) -> "Isometry":
        a, b, c, d = (float(x) for x in raw["m"])
        return cls(a, b, c, d, bool(raw.get("rev", False)))


def _renormalized(a, b, c, d, reversing) -> Isometry:
    # products drift off det 1 slowly; rescale before validating
    det = a * d - b * c
    if det > 0 and math.isfinite(det):
        s = math.sqrt(det)
        a, b, c, d = a / s, b / s, c / s, d / s
    return Isometry(a, b, c, d, reversing)


@dataclass(frozen=True)
class IsometryClass:
    tag: str
    translation_length: float = 0.0
    attracting: Optional[BoundaryPoint] = None
    repelling: Optional[BoundaryPoint] = None
    fixed_point: Optional[Union[HPoint, BoundaryPoint]] = None
    axis: Optional[Geodesic] = None
    reversing_kind: Optional[str] = None
    square_class: Optional["IsometryClass"] = None
    in_tolerance_band: bool = False

    def to_json(self) -> dict:
        out = {"tag": self.tag, "translation_length": self.translation_length}
        if self.attracting is not None:
            out["attracting"] = self.attracting.to_json()
            out["repelling"] = self.repelling.to_json()
        if self.fixed_point is not None:
            out["fixed_point"] = self.fixed_point.to_json()
        if self.axis is not None:
            out["axis"] = self.axis.to_json()
        if self.reversing_kind is not None:
            out["reversing_kind"] = self.reversing_kind
            out["square_class"] = self.square_class.to_json()
        if self.in_tolerance_band:
            out["in_tolerance_band"] = True
        return out


def dist(p: HPoint, q: HPoint) -> float:
    """Hyperbolic distance in the upper half-plane."""
    if p.im <= 0 or q.im <= 0:
        raise NonPositiveImaginary("Points must lie in the upper half-plane")
    return 2.0 * math.asinh(abs(p.z - q.z) / (2.0 * math.sqrt(p.im * q.im)))


def apply(g: Isometry, p: HPoint) -> HPoint:
    """Image of a point under an isometry."""
    return g.apply(p)


def _boundary_fixed_points(a, b, c, d):
    """Roots of c x² + (d − a) x − b = 0 on the extended real line."""
    scale = max(abs(a), abs(b), abs(c), abs(d), 1.0)
    if abs(c) <= ALG_TOL * scale:
        if abs(d - a) <= ALG_TOL * scale:
            return [INFINITY]
        return [INFINITY, BoundaryPoint.finite(b / (d - a))]
    disc = (d - a) ** 2 + 4.0 * b * c
    if disc < 0:
        return []
    root = math.sqrt(disc)
    return [BoundaryPoint.finite(((a - d) + root) / (2.0 * c)),
            BoundaryPoint.finite(((a - d) - root) / (2.0 * c))]


def _is_attracting(g: Isometry, x: BoundaryPoint) -> bool:
    if x.is_infinite:
        return abs(g.a) > abs(g.d)
    return abs(g.c * x.value + g.d) > 1.0


def classify(g: Isometry) -> IsometryClass:
    """Classify an isometry by its trace (orientation-preserving) or its square."""
    if g.reversing:
        return _classify_reversing(g)
    if g.is_identity():
        return IsometryClass("identity")
    a, b, c, d = g.a, g.b, g.c, g.d
    tr = abs(g.trace)
    if tr < 2.0 - PARABOLIC_BAND:
        # c ≠ 0 here, otherwise |a + 1/a| ≥ 2
        root = cmath.sqrt(complex((d - a) ** 2 + 4.0 * b * c))
        z = ((a - d) + root) / (2.0 * c)
        if z.imag <= 0:
            z = ((a - d) - root) / (2.0 * c)
        return IsometryClass("elliptic", fixed_point=HPoint(z.real, abs(z.imag)))
    if tr <= 2.0 + PARABOLIC_BAND:
        band = tr != 2.0
        if band:
            logger.debug("Trace %r inside the parabolic tolerance band", g.trace)
        scale = max(abs(a), abs(b), abs(c), abs(d), 1.0)
        fixed = INFINITY if abs(c) <= ALG_TOL * scale else BoundaryPoint.finite((a - d) / (2.0 * c))
        return IsometryClass("parabolic", fixed_point=fixed, in_tolerance_band=band)
    length = 2.0 * math.acosh(tr / 2.0)
    points = _boundary_fixed_points(a, b, c, d)
    if len(points) != 2:
        raise GeometryError(f"Loxodromic matrix without two fixed points: {g.to_json()}")
    first, second = points
    if _is_attracting(g, first):
        attracting, repelling = first, second
    else:
        attracting, repelling = second, first
    return IsometryClass("loxodromic", translation_length=length, attracting=attracting,
                         repelling=repelling, axis=Geodesic(attracting, repelling))


def _classify_reversing(g: Isometry) -> IsometryClass:
    square = g.compose(g)
    square_class = classify(square)
    # fixed boundary points of x ↦ M(−x): c x² − (a + d) x + b = 0
    a, b, c, d = g.a, g.b, g.c, g.d
    scale = max(abs(a), abs(b), abs(c), abs(d), 1.0)
    if abs(c) <= ALG_TOL * scale:
        ends = [INFINITY, BoundaryPoint.finite(b / (a + d))]
    else:
        root = math.sqrt((a + d) ** 2 - 4.0 * b * c)
        ends = [BoundaryPoint.finite(((a + d) + root) / (2.0 * c)),
                BoundaryPoint.finite(((a + d) - root) / (2.0 * c))]
    axis = Geodesic(ends[0], ends[1])
    if square_class.tag == "identity":
        return IsometryClass("reversing_composite", axis=axis, reversing_kind="reflection",
                             square_class=square_class)
    return IsometryClass("reversing_composite",
                         translation_length=square_class.translation_length / 2.0,
                         attracting=square_class.attracting, repelling=square_class.repelling,
                         axis=axis, reversing_kind="glide_reflection", square_class=square_class)


class Perpendicular(NamedTuple):
    foot_on_alpha: HPoint
    foot_on_beta: HPoint
    length: float


def _normalized_pair(alpha: Geodesic, beta: Geodesic):
    """Standard map of alpha and beta's endpoints after pulling alpha back to (0, ∞)."""
    if alpha.shares_endpoint(beta):
        raise AsymptoticOrCrossing("Geodesics share an endpoint", witness=(alpha.to_json(), beta.to_json()))
    m = alpha.standard_map()
    inv = m.inverse()
    u = inv.apply_boundary(beta.start)
    v = inv.apply_boundary(beta.end)
    if u.is_infinite or v.is_infinite or u.value == 0.0 or v.value == 0.0:
        raise AsymptoticOrCrossing("Geodesics are asymptotic", witness=(alpha.to_json(), beta.to_json()))
    if u.value * v.value < 0:
        raise AsymptoticOrCrossing("Geodesics cross", witness=(alpha.to_json(), beta.to_json()))
    return m, u.value, v.value


def project_point(gamma: Geodesic, alpha: Geodesic) -> HPoint:
    """Closest point of gamma to the disjoint geodesic alpha."""
    m, u, v = _normalized_pair(gamma, alpha)
    return m.apply(HPoint(0.0, math.sqrt(u * v)))


def common_perpendicular(alpha: Geodesic, beta: Geodesic) -> Perpendicular:
    """Feet and length of the common perpendicular of two disjoint, non-asymptotic geodesics."""
    m, u, v = _normalized_pair(alpha, beta)
    r2 = u * v
    mid = 0.5 * (u + v)
    x = r2 / mid
    y = math.sqrt(max(r2 - x * x, 0.0))
    if y <= 0.0:
        raise AsymptoticOrCrossing("Geodesics are numerically asymptotic",
                                   witness=(alpha.to_json(), beta.to_json()))
    foot_a = m.apply(HPoint(0.0, math.sqrt(r2)))
    foot_b = m.apply(HPoint(x, y))
    return Perpendicular(foot_a, foot_b, dist(foot_a, foot_b))


def nearest_point(gamma: Geodesic, p: HPoint) -> HPoint:
    """Closest point of gamma to p."""
    m = gamma.standard_map()
    w = m.inverse().apply(p)
    return m.apply(HPoint(0.0, abs(w.z)))


def random_point(rng: np.random.Generator, spread: float = 3.0) -> HPoint:
    return HPoint(float(rng.uniform(-spread, spread)), float(math.exp(rng.uniform(-spread / 2, spread / 2))))


def random_isometry(rng: np.random.Generator, scale: float = 2.0, reversing: bool = False) -> Isometry:
    """Random element near the identity: rotation about a random point, dilation, translation."""
    theta = float(rng.uniform(0.0, math.pi))
    rotation = Isometry(math.cos(theta), math.sin(theta), -math.sin(theta), math.cos(theta))
    g = (Isometry.translation(float(rng.uniform(-scale, scale)))
         @ Isometry.dilation(math.exp(float(rng.uniform(-scale / 2, scale / 2))))
         @ rotation)
    if reversing:
        g = g @ Isometry.psi()
    return g
