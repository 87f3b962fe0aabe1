"""Group arithmetic for Z²⋊_φZ, word metrics and confinement verification"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

from .errors import CapExceeded, ConfigError, EmptySet, GroupError, NotAnosov, UniverseOverflow
from .settings import get_settings

logger = logging.getLogger(__name__)

EIGEN_TOL = 1e-10


@dataclass(frozen=True)
class IntMatrix2:
    a: int
    b: int
    c: int
    d: int

    @classmethod
    def from_rows(cls, rows) -> "IntMatrix2":
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    @classmethod
    def parse(cls, text: str) -> "IntMatrix2":
        """Parse 'a,b,c,d' (row-major)."""
        parts = [p.strip() for p in str(text).split(",")]
        if len(parts) != 4:
            raise ConfigError(f"Expected four comma-separated integers, got {text!r}", field="phi")
        try:
            return cls(*(int(p) for p in parts))
        except ValueError:
            raise ConfigError(f"Matrix entries must be integers, got {text!r}", field="phi")

    @classmethod
    def identity(cls) -> "IntMatrix2":
        return cls(1, 0, 0, 1)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def rows(self) -> List[List[int]]:
        return [[self.a, self.b], [self.c, self.d]]

    def __matmul__(self, other: "IntMatrix2") -> "IntMatrix2":
        return IntMatrix2(self.a * other.a + self.b * other.c, self.a * other.b + self.b * other.d,
                          self.c * other.a + self.d * other.c, self.c * other.b + self.d * other.d)

    def apply(self, p: Tuple[int, int]) -> Tuple[int, int]:
        x, y = p
        return (self.a * x + self.b * y, self.c * x + self.d * y)

    def inverse(self) -> "IntMatrix2":
        if self.det not in (1, -1):
            raise GroupError(f"Matrix {self.rows()} is not invertible over Z")
        s = self.det
        return IntMatrix2(s * self.d, -s * self.b, -s * self.c, s * self.a)

    def power(self, n: int) -> "IntMatrix2":
        result = IntMatrix2.identity()
        base = self if n >= 0 else self.inverse()
        n = abs(n)
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    def __str__(self):
        return f"{self.a},{self.b},{self.c},{self.d}"


@dataclass(frozen=True)
class AnosovData:
    """Eigen-data of a hyperbolic φ ∈ SL(2,Z).

    `sign` is the sign of the trace: φ·v⁺ = sign·λ·v⁺ and φ·v⁻ = sign·λ⁻¹·v⁻.
    """
    phi: IntMatrix2
    lam: float
    v_plus: Tuple[float, float]
    v_minus: Tuple[float, float]
    sign: int = 1
    dual_plus: Tuple[float, float] = (0.0, 0.0)
    dual_minus: Tuple[float, float] = (0.0, 0.0)

    @property
    def log_lambda(self) -> float:
        return math.log(self.lam)

    def to_json(self) -> dict:
        return {"phi": self.phi.rows(), "lambda": self.lam, "v_plus": list(self.v_plus),
                "v_minus": list(self.v_minus), "sign": self.sign}


def _unit_eigenvector(phi: IntMatrix2, mu: float) -> Tuple[float, float]:
    if phi.b != 0:
        x, y = float(phi.b), mu - phi.a
    else:
        x, y = mu - phi.d, float(phi.c)
    norm = math.hypot(x, y)
    x, y = x / norm, y / norm
    if x < 0 or (x == 0 and y < 0):
        x, y = -x, -y
    return (x, y)


def eigen(phi: IntMatrix2) -> AnosovData:
    """Eigenvalues and eigenvectors of an Anosov matrix."""
    if phi.det != 1:
        raise NotAnosov(f"det {phi.det} != 1 for {phi.rows()}", witness=phi.rows())
    if abs(phi.trace) <= 2:
        raise NotAnosov(f"|trace| = {abs(phi.trace)} <= 2 for {phi.rows()}", witness=phi.rows())
    tr = abs(phi.trace)
    sign = 1 if phi.trace > 0 else -1
    lam = (tr + math.sqrt(tr * tr - 4)) / 2.0
    v_plus = _unit_eigenvector(phi, sign * lam)
    v_minus = _unit_eigenvector(phi, sign / lam)
    det = v_plus[0] * v_minus[1] - v_minus[0] * v_plus[1]
    # rows of the inverse of the column matrix [v⁺ v⁻]
    dual_plus = (v_minus[1] / det, -v_minus[0] / det)
    dual_minus = (-v_plus[1] / det, v_plus[0] / det)
    data = AnosovData(phi, lam, v_plus, v_minus, sign, dual_plus, dual_minus)
    for v, mu in ((v_plus, sign * lam), (v_minus, sign / lam)):
        image = (phi.a * v[0] + phi.b * v[1], phi.c * v[0] + phi.d * v[1])
        if max(abs(image[0] - mu * v[0]), abs(image[1] - mu * v[1])) > EIGEN_TOL * max(1.0, lam):
            raise GroupError(f"Eigenvector check failed for {phi.rows()}")
    logger.debug("eigen(%s): lambda=%.12g sign=%d", phi, lam, sign)
    return data


def eigen_coords(p: Tuple[int, int], data: AnosovData) -> Tuple[float, float]:
    """(rho, pi) with p = rho·v⁺ + pi·v⁻."""
    x, y = p
    rho = data.dual_plus[0] * x + data.dual_plus[1] * y
    pi = data.dual_minus[0] * x + data.dual_minus[1] * y
    return rho, pi


def in_Q(p: Tuple[int, int], eps: float, data: AnosovData, side: str = "plus") -> bool:
    """Membership in Q_ε (|pi| ≤ ε) or, for side='minus', in Q⁻_ε (|rho| ≤ ε)."""
    if eps <= 0:
        raise ConfigError(f"eps must be positive, got {eps}", field="eps")
    rho, pi = eigen_coords(p, data)
    return abs(pi if side == "plus" else rho) <= eps


# ---------------------------------------------------------------------------
# Generic group operations


@dataclass(frozen=True)
class GroupOps:
    name: str
    multiply: Callable[[Any, Any], Any]
    inverse: Callable[[Any], Any]
    identity: Any

    def power(self, g, n: int):
        result = self.identity
        base = g if n >= 0 else self.inverse(g)
        n = abs(n)
        while n:
            if n & 1:
                result = self.multiply(result, base)
            base = self.multiply(base, base)
            n >>= 1
        return result

    def conjugate(self, h, g):
        """h g h⁻¹."""
        return self.multiply(self.multiply(h, g), self.inverse(h))

    def commutes(self, a, b) -> bool:
        return self.multiply(a, b) == self.multiply(b, a)

    def product(self, elements: Iterable):
        result = self.identity
        for g in elements:
            result = self.multiply(result, g)
        return result


def integer_ops() -> GroupOps:
    return GroupOps("Z", lambda x, y: x + y, lambda x: -x, 0)


def lattice_ops(rank: int = 2) -> GroupOps:
    return GroupOps(f"Z^{rank}",
                    lambda x, y: tuple(a + b for a, b in zip(x, y)),
                    lambda x: tuple(-a for a in x),
                    tuple([0] * rank))


def dihedral_ops() -> GroupOps:
    """D∞ as pairs (s, c) acting on R by x ↦ s·x + c."""
    return GroupOps("D_inf",
                    lambda g, h: (g[0] * h[0], g[0] * h[1] + g[1]),
                    lambda g: (g[0], -g[0] * g[1]),
                    (1, 0))


@dataclass(frozen=True)
class TorusBundleElement:
    p: Tuple[int, int]
    n: int

    def rho(self, data: AnosovData) -> float:
        return eigen_coords(self.p, data)[0]

    def pi(self, data: AnosovData) -> float:
        return eigen_coords(self.p, data)[1]

    def to_json(self) -> list:
        return [list(self.p), self.n]

    @classmethod
    def from_json(cls, raw) -> "TorusBundleElement":
        (x, y), n = raw
        return cls((int(x), int(y)), int(n))


class TorusBundleGroup:
    """Z²⋊_φZ with (p,n)·(q,m) = (p + φⁿq, n+m)."""

    def __init__(self, data: AnosovData):
        self.data = data
        self.phi = data.phi
        self.identity = TorusBundleElement((0, 0), 0)
        self.t = TorusBundleElement((0, 0), 1)
        self._power = lru_cache(maxsize=4096)(self.phi.power)
        self.ops = GroupOps(f"Z^2 x| {self.phi}", self.multiply, self.inverse, self.identity)

    def phi_power(self, n: int) -> IntMatrix2:
        return self._power(n)

    def multiply(self, x: TorusBundleElement, y: TorusBundleElement) -> TorusBundleElement:
        qx, qy = self._power(x.n).apply(y.p)
        return TorusBundleElement((x.p[0] + qx, x.p[1] + qy), x.n + y.n)

    def inverse(self, x: TorusBundleElement) -> TorusBundleElement:
        qx, qy = self._power(-x.n).apply(x.p)
        return TorusBundleElement((-qx, -qy), -x.n)

    def conjugate(self, h: TorusBundleElement, g: TorusBundleElement) -> TorusBundleElement:
        return self.ops.conjugate(h, g)

    def lattice(self, x: int, y: int) -> TorusBundleElement:
        return TorusBundleElement((x, y), 0)

    def random_element(self, rng: np.random.Generator, box: int = 5, n_range: int = 3) -> TorusBundleElement:
        return TorusBundleElement((int(rng.integers(-box, box + 1)), int(rng.integers(-box, box + 1))),
                                  int(rng.integers(-n_range, n_range + 1)))


def tb_multiply(x: TorusBundleElement, y: TorusBundleElement, data: AnosovData) -> TorusBundleElement:
    """Product in Z²⋊_φZ."""
    return TorusBundleGroup(data).multiply(x, y)


def tb_inverse(x: TorusBundleElement, data: AnosovData) -> TorusBundleElement:
    return TorusBundleGroup(data).inverse(x)


def tb_conjugate(h: TorusBundleElement, g: TorusBundleElement, data: AnosovData) -> TorusBundleElement:
    return TorusBundleGroup(data).conjugate(h, g)


def torus_bundle_universe(box: int, n_max: int) -> Callable[[TorusBundleElement], bool]:
    """Membership predicate of the truncated universe |x|, |y| ≤ box, |n| ≤ n_max."""
    def inside(g: TorusBundleElement) -> bool:
        return abs(g.p[0]) <= box and abs(g.p[1]) <= box and abs(g.n) <= n_max
    return inside


# ---------------------------------------------------------------------------
# Generating sets and word balls


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    group: GroupOps
    elements: Tuple
    contains: Callable[[Any], bool]

    def is_symmetric(self) -> bool:
        listed = set(self.elements)
        return all(self.group.inverse(s) in listed and self.contains(self.group.inverse(s))
                   for s in self.elements)


def finite_generators(group: GroupOps, elements: Sequence, name: str = "finite",
                      symmetrize: bool = True) -> GeneratorSpec:
    gens = list(dict.fromkeys(elements))
    if symmetrize:
        for s in list(gens):
            inv = group.inverse(s)
            if inv not in gens:
                gens.append(inv)
    members = frozenset(gens)
    return GeneratorSpec(name, group, tuple(gens), lambda g: g in members)


def q_eps_generators(group: TorusBundleGroup, eps: float, side: str = "plus", box: int = 20,
                     include_t: bool = True) -> GeneratorSpec:
    """Q_ε ∪ {t^±1} with the Z² part enumerated on the box [−box, box]²."""
    data = group.data
    lattice = [TorusBundleElement((x, y), 0)
               for x in range(-box, box + 1) for y in range(-box, box + 1)
               if (x, y) != (0, 0) and (math.isinf(eps) or in_Q((x, y), eps, data, side))]
    elements = list(lattice)
    if include_t:
        elements += [group.t, group.inverse(group.t)]

    def contains(g: TorusBundleElement) -> bool:
        if include_t and g.p == (0, 0) and abs(g.n) == 1:
            return True
        return g.n == 0 and g.p != (0, 0) and (math.isinf(eps) or in_Q(g.p, eps, data, side))

    label = f"Q_{eps}{'' if side == 'plus' else '^-'}" + (" u {t,t^-1}" if include_t else "")
    return GeneratorSpec(label, group.ops, tuple(elements), contains)


def generator_spec_from_json(raw: dict, group: TorusBundleGroup, box: int = 20) -> GeneratorSpec:
    kind = raw.get("kind")
    if kind == "Q_eps":
        try:
            eps = float(raw["eps"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("Q_eps generator spec needs a numeric eps", field="eps")
        side = raw.get("side", "plus")
        if side not in ("plus", "minus"):
            raise ConfigError(f"side must be plus or minus, got {side!r}", field="side")
        return q_eps_generators(group, eps, side, box=int(raw.get("box", box)))
    if kind == "finite":
        try:
            elements = [TorusBundleElement.from_json(e) for e in raw["elements"]]
        except (KeyError, TypeError, ValueError):
            raise ConfigError("finite generator spec needs elements [[x, y], n]", field="elements")
        return finite_generators(group.ops, elements)
    raise ConfigError(f"Unknown generator kind {kind!r}", field="kind")


def word_ball(gen: GeneratorSpec, radius: int, universe: Optional[Callable[[Any], bool]] = None,
              max_frontier: Optional[int] = None) -> Dict[Any, int]:
    """Breadth-first word lengths up to `radius`, restricted to `universe`."""
    if radius < 0:
        raise ConfigError(f"radius must be non-negative, got {radius}", field="radius")
    if not gen.is_symmetric():
        raise GroupError(f"Generating set {gen.name} is not symmetric")
    cap = max_frontier if max_frontier is not None else get_settings().ball_cap
    ops = gen.group
    lengths = {ops.identity: 0}
    frontier = [ops.identity]
    for r in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for s in gen.elements:
                h = ops.multiply(g, s)
                if h in lengths or (universe is not None and not universe(h)):
                    continue
                lengths[h] = r
                nxt.append(h)
            if len(nxt) > cap:
                raise UniverseOverflow(f"Frontier at radius {r} exceeds cap {cap}", witness=len(nxt))
        logger.debug("word_ball %s: radius %d frontier %d", gen.name, r, len(nxt))
        frontier = nxt
        if not frontier:
            break
    return lengths


def word_ball_frame(table: Dict[Any, int]) -> pd.DataFrame:
    """Word-ball dump as a DataFrame sorted by length then element."""
    rows = [{"element": g.to_json() if hasattr(g, "to_json") else g, "length": n} for g, n in table.items()]
    frame = pd.DataFrame(rows, columns=["element", "length"])
    frame["key"] = frame["element"].map(repr)
    return frame.sort_values(["length", "key"]).drop(columns="key").reset_index(drop=True)


# ---------------------------------------------------------------------------
# Confinement


@dataclass
class ConditionResult:
    passed: bool
    witness: Any = None
    detail: str = ""

    def to_json(self) -> dict:
        return {"passed": self.passed, "witness": self.witness, "detail": self.detail}


@dataclass
class ConfinementReport:
    eps: float
    side: str
    box: int
    k_cap: int
    condition_a: ConditionResult
    condition_b: ConditionResult
    condition_c: ConditionResult
    k0: Optional[int]
    strictness_witness: Optional[Tuple[int, int]]
    max_k_b: int = 0
    q_size: int = 0
    cap_exceeded: bool = False
    cap_error: Optional[dict] = None

    @property
    def passed(self) -> bool:
        return self.condition_a.passed and self.condition_b.passed and self.condition_c.passed

    @property
    def strict(self) -> bool:
        return self.strictness_witness is not None

    def reverify(self, data: AnosovData) -> bool:
        """Re-evaluate every claim of the report by direct evaluation."""
        alpha = data.phi if self.side == "plus" else data.phi.inverse()
        member = _membership(self.eps, data, self.side)
        if self.strictness_witness is not None:
            p = self.strictness_witness
            # p lies in Q but not in α(Q)
            if not member(p) or member(alpha.inverse().apply(p)):
                return False
        if self.passed and self.k0 is not None and not math.isinf(self.eps):
            q = _q_points(self.eps, data, self.side, self.box)
            sums = _unique_sums(q)
            if not all(member(s) for s in _apply_rows(alpha.power(self.k0), sums)):
                return False
            if self.k0 > 0 and all(member(s) for s in _apply_rows(alpha.power(self.k0 - 1), sums)):
                return False
        return True

    def to_json(self) -> dict:
        return {
            "eps": "inf" if math.isinf(self.eps) else self.eps, "side": self.side, "box": self.box,
            "k_cap": self.k_cap, "condition_a": self.condition_a.to_json(),
            "condition_b": self.condition_b.to_json(), "condition_c": self.condition_c.to_json(),
            "k0": self.k0, "strictness_witness": list(self.strictness_witness) if self.strictness_witness else None,
            "max_k_b": self.max_k_b, "q_size": self.q_size, "cap_exceeded": self.cap_exceeded,
            "cap_error": self.cap_error, "passed": self.passed, "scope": f"verified on the box [-{self.box},{self.box}]^2",
        }


def _membership(eps: float, data: AnosovData, side: str) -> Callable[[Tuple[int, int]], bool]:
    if math.isinf(eps):
        return lambda p: True
    return lambda p: in_Q(p, eps, data, side)


def _q_points(eps, data, side, box) -> np.ndarray:
    member = _membership(eps, data, side)
    pts = [(x, y) for x in range(-box, box + 1) for y in range(-box, box + 1) if member((x, y))]
    return np.array(pts, dtype=np.int64).reshape(-1, 2)


def _unique_sums(q: np.ndarray) -> np.ndarray:
    sums = (q[:, None, :] + q[None, :, :]).reshape(-1, 2)
    return np.unique(sums, axis=0)


def _apply_rows(m: IntMatrix2, rows: np.ndarray) -> List[Tuple[int, int]]:
    bound = max(abs(m.a), abs(m.b), abs(m.c), abs(m.d)) * (int(np.abs(rows).max()) if rows.size else 0)
    if bound < 2 ** 60:
        mat = np.array(m.rows(), dtype=np.int64)
        return [tuple(int(v) for v in row) for row in rows @ mat.T]
    return [m.apply((int(x), int(y))) for x, y in rows]


class ConfiningVerifier:
    def __init__(self, box: int = 50, k_cap: int = 20):
        """Default region and iteration cap for confinement checks."""
        self.box = box
        self.k_cap = k_cap

    def verify(self, eps: float, data: AnosovData, box: Optional[int] = None, k_cap: Optional[int] = None,
               side: str = "plus") -> ConfinementReport:
        box = self.box if box is None else box
        k_cap = self.k_cap if k_cap is None else k_cap
        if not (eps > 0):
            raise ConfigError(f"eps must be positive, got {eps}", field="eps")
        if box <= 0 or k_cap <= 0:
            raise ConfigError("box and k_cap must be positive", field="box" if box <= 0 else "k_cap")
        if side not in ("plus", "minus"):
            raise ConfigError(f"side must be plus or minus, got {side!r}", field="side")
        alpha = data.phi if side == "plus" else data.phi.inverse()
        member = _membership(eps, data, side)
        q = _q_points(eps, data, side, box)
        logger.info("Verifying confinement: eps=%s side=%s box=%d |Q|=%d", eps, side, box, len(q))

        cond_a = ConditionResult(True, detail="alpha(Q) within Q")
        for p in _apply_rows(alpha, q):
            if not member(p):
                cond_a = ConditionResult(False, witness=list(alpha.inverse().apply(p)),
                                         detail="alpha(p) leaves Q")
                break

        cond_b, max_k, cap_hit = self._absorb(alpha, member, box, k_cap)

        k0 = 0 if math.isinf(eps) else None
        sums = _unique_sums(q) if k0 is None else q[:0]
        for k in range(k_cap + 1 if k0 is None else 0):
            if all(member(s) for s in _apply_rows(alpha.power(k), sums)):
                k0 = k
                break
        if k0 is None:
            cap_hit = True
            cond_c = ConditionResult(False, detail=f"no k <= {k_cap} maps Q+Q into Q")
        else:
            cond_c = ConditionResult(True, witness=k0, detail=f"alpha^{k0}(Q+Q) within Q")
        cap_error = None
        if cap_hit:
            logger.warning("k_cap=%d insufficient for eps=%s (reported, not fatal)", k_cap, eps)
            cap_error = CapExceeded(f"k_cap={k_cap} insufficient", witness=k_cap).to_record()

        return ConfinementReport(eps, side, box, k_cap, cond_a, cond_b, cond_c, k0,
                                 self._strictness_witness(eps, data, side, box),
                                 max_k_b=max_k, q_size=len(q), cap_exceeded=cap_hit, cap_error=cap_error)

    def _absorb(self, alpha, member, box, k_cap):
        max_k = 0
        for x in range(-box, box + 1):
            for y in range(-box, box + 1):
                p, k = (x, y), 0
                while not member(p):
                    k += 1
                    if k > k_cap:
                        return ConditionResult(False, witness=[x, y], detail=f"not absorbed within {k_cap} steps"), k_cap, True
                    p = alpha.apply(p)
                max_k = max(max_k, k)
        return ConditionResult(True, witness=max_k, detail="every box point absorbed"), max_k, False

    @staticmethod
    def _strictness_witness(eps, data, side, box) -> Optional[Tuple[int, int]]:
        if math.isinf(eps):
            return None
        inner = eps / data.lam
        for r in range(1, box + 1):
            shell = sorted({(x, y) for x in range(-r, r + 1) for y in (-r, r)}
                           | {(x, y) for x in (-r, r) for y in range(-r, r + 1)})
            for p in shell:
                rho, pi = eigen_coords(p, data)
                value = abs(pi if side == "plus" else rho)
                if inner < value <= eps:
                    return p
        return None


confining_verifier = ConfiningVerifier()


def verify_confining(eps: float, data: AnosovData, box: int = 50, k_cap: int = 20,
                     side: str = "plus") -> ConfinementReport:
    """Check conditions (a)-(c) of confinement for Q_ε on a box."""
    return confining_verifier.verify(eps, data, box, k_cap, side)


def generating_set_equivalence(data: AnosovData, eps: float, delta: float, box: int = 6) -> dict:
    """BFS check that elements of Q_δ have Q_ε ∪ {t±1}-length at most 2k+1, k = ⌈log_λ(δ/ε)⌉."""
    if delta <= eps:
        raise ConfigError("delta must exceed eps", field="delta")
    group = TorusBundleGroup(data)
    k = math.ceil(math.log(delta / eps) / data.log_lambda)
    gen_box = int(math.ceil(data.lam ** k)) * box + 1
    gens = q_eps_generators(group, eps, box=gen_box)
    bound = 2 * k + 1
    table = word_ball(gens, bound, universe=torus_bundle_universe(gen_box, k))
    failures = []
    longest = 0
    for x in range(-box, box + 1):
        for y in range(-box, box + 1):
            if (x, y) == (0, 0) or not in_Q((x, y), delta, data):
                continue
            length = table.get(TorusBundleElement((x, y), 0))
            if length is None or length > bound:
                failures.append([x, y])
            else:
                longest = max(longest, length)
    return {"eps": eps, "delta": delta, "k": k, "bound": bound, "max_length": longest,
            "failures": failures, "passed": not failures}


# ---------------------------------------------------------------------------
# Density


@dataclass
class DensityReport:
    passed: bool
    delta: float
    interval: Tuple[float, float]
    largest_gap: float
    coverage_radius: float
    gaps_exceeding: List[Tuple[float, float]] = field(default_factory=list)
    uncovered: List[Tuple[float, float]] = field(default_factory=list)
    count: int = 0
    metadata: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"passed": self.passed, "delta": self.delta, "interval": list(self.interval),
                "largest_gap": self.largest_gap, "coverage_radius": self.coverage_radius,
                "gaps_exceeding": [list(g) for g in self.gaps_exceeding],
                "uncovered": [list(u) for u in self.uncovered], "count": self.count, **self.metadata}


def density_scan(points: Iterable[float], x0: float, x1: float, delta: float) -> DensityReport:
    """Check that every point of [x0, x1] is within delta of the set."""
    if not x0 < x1:
        raise ConfigError(f"Interval needs x0 < x1, got [{x0}, {x1}]", field="interval")
    values = np.unique(np.asarray(list(points), dtype=float))
    if values.size == 0:
        raise EmptySet("Density scan needs a nonempty point set")
    tol = 1e-9 * max(1.0, abs(x0), abs(x1), delta)

    def distance_to_set(x: float) -> float:
        i = int(np.searchsorted(values, x))
        near = values[max(i - 1, 0):i + 1]
        return float(np.abs(near - x).min())

    checkpoints = [x0, x1] + [float(m) for m in (values[:-1] + values[1:]) / 2.0 if x0 <= m <= x1]
    radius = max(distance_to_set(x) for x in checkpoints)

    inside = values[(values >= x0) & (values <= x1)]
    breaks = np.concatenate(([x0], inside, [x1]))
    gaps = np.diff(breaks)
    largest_gap = float(gaps.max())
    exceeding = [(float(breaks[i]), float(breaks[i + 1])) for i in range(len(gaps)) if gaps[i] > delta + tol]

    uncovered = []
    cursor = x0
    for s in values:
        if s - delta > cursor + tol and cursor < x1:
            uncovered.append((float(cursor), float(min(s - delta, x1))))
        cursor = max(cursor, s + delta)
    if cursor < x1 - tol:
        uncovered.append((float(cursor), float(x1)))

    return DensityReport(not uncovered, delta, (x0, x1), largest_gap, radius, exceeding, uncovered,
                         int(values.size))


def claim_density_instance(data: AnosovData, n: int = 1, r: Optional[int] = None, depth: int = 2,
                           box: int = 20, eps: float = 1.0) -> DensityReport:
    """Density of rho(rP) for the set P grown from a seed u by P ↦ P ∪ φⁿ(P+P)."""
    if data.sign < 0 and n % 2:
        raise ConfigError("Negative-trace matrices need an even power n", field="n")
    r = int(math.floor(data.lam ** n)) if r is None else r
    candidates = [(x, y) for x in range(-box, box + 1) for y in range(-box, box + 1)
                  if (x, y) != (0, 0) and in_Q((x, y), eps, data)]
    if not candidates:
        raise EmptySet(f"No nonzero lattice point with |pi| <= {eps} in the box")
    u = min(candidates, key=lambda p: (abs(eigen_coords(p, data)[1]), abs(p[0]) + abs(p[1]), p))
    if eigen_coords(u, data)[0] < 0:
        u = (-u[0], -u[1])
    a = eigen_coords(u, data)[0]
    phi_n = data.phi.power(n)
    P = {(0, 0), u, (-u[0], -u[1])}
    for _ in range(depth):
        P = P | {phi_n.apply((x[0] + y[0], x[1] + y[1])) for x in P for y in P}
    words = {(0, 0)}
    for _ in range(r):
        words = words | {(w[0] + p[0], w[1] + p[1]) for w in words for p in P}
    rhos = [eigen_coords(w, data)[0] for w in words]
    step = data.lam ** n * a
    report = density_scan(rhos, 0.0, data.lam ** (2 * n) * a, step)
    report.metadata = {"u": list(u), "a": a, "n": n, "r": r, "depth": depth, "P_size": len(P),
                       "rP_size": len(words)}
    logger.info("Density claim instance: u=%s a=%.6g |P|=%d |rP|=%d passed=%s",
                u, a, len(P), len(words), report.passed)
    return report


# ---------------------------------------------------------------------------
# Abelianization


@dataclass(frozen=True)
class Abelianization:
    free_rank: int
    torsion: Tuple[int, ...]

    def to_json(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}


def abelianization(phi: IntMatrix2) -> Abelianization:
    """Abelianization of Z²⋊_φZ from the invariant factors of φ − I."""
    if phi.det != 1:
        raise NotAnosov(f"det {phi.det} != 1", witness=phi.rows())
    relations = Matrix([[phi.a - 1, phi.b], [phi.c, phi.d - 1]])
    snf = smith_normal_form(relations, domain=ZZ)
    factors = [abs(int(snf[i, i])) for i in range(2)]
    zeros = sum(1 for f in factors if f == 0)
    torsion = tuple(sorted(f for f in factors if f > 1))
    return Abelianization(1 + zeros, torsion)


def random_anosov(rng: np.random.Generator, bound: int = 20, attempts: int = 100_000) -> IntMatrix2:
    """Random hyperbolic element of SL(2,Z) with entries in [−bound, bound]."""
    for _ in range(attempts):
        a, b, c = (int(v) for v in rng.integers(-bound, bound + 1, size=3))
        if a == 0 or (1 + b * c) % a:
            continue
        d = (1 + b * c) // a
        if abs(d) <= bound and abs(a + d) > 2:
            return IntMatrix2(a, b, c, d)
    raise GroupError("Could not sample an Anosov matrix")
