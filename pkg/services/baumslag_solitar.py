"""Baumslag-Solitar groups BS(m,n) = <a, b | b a^m b^-1 = a^n>: normal forms and Bass-Serre balls"""
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .errors import BallOverflow, ConfigError, GroupError
from .groups import GroupOps
from .settings import get_settings

logger = logging.getLogger(__name__)

Word = Union[str, Sequence[Tuple[str, int]]]


@dataclass(frozen=True)
class BSElement:
    """Right normal form a^s0 b^e1 a^s1 ... b^ek a^tail.

    Each syllable (s, e) is an a-power followed by b^e with 0 ≤ s < |n| before b
    and 0 ≤ s < |m| before b⁻¹.
    """
    m: int
    n: int
    syllables: Tuple[Tuple[int, int], ...] = ()
    tail: int = 0

    @property
    def b_length(self) -> int:
        return len(self.syllables)

    @property
    def coset_key(self) -> Tuple[Tuple[int, int], ...]:
        """Key of the coset g<a>."""
        return self.syllables

    def letters(self) -> List[Tuple[str, int]]:
        word = []
        for s, e in self.syllables:
            if s:
                word.append(("a", s))
            word.append(("b", e))
        if self.tail:
            word.append(("a", self.tail))
        return word

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "syllables": [list(s) for s in self.syllables], "tail": self.tail}

    def __str__(self):
        parts = [f"{x}^{k}" if k != 1 else x for x, k in self.letters()]
        return " ".join(parts) if parts else "1"


class _NormalFormBuilder:
    def __init__(self, m: int, n: int, start: Optional[BSElement] = None):
        self.m = m
        self.n = n
        self.stack: List[Tuple[int, int]] = list(start.syllables) if start else []
        self.tail = start.tail if start else 0

    def push_a(self, k: int):
        self.tail += k

    def push_b(self, e: int):
        if self.stack and self.stack[-1][1] == -e:
            # b a^{jm} b⁻¹ = a^{jn} and b⁻¹ a^{jn} b = a^{jm}
            divisor, target = (self.m, self.n) if e == -1 else (self.n, self.m)
            if self.tail % divisor == 0:
                s_prev, _ = self.stack.pop()
                self.tail = s_prev + (self.tail // divisor) * target
                return
        if e == 1:
            q, rem = divmod(self.tail, abs(self.n))
            self.stack.append((rem, 1))
            self.tail = q * (1 if self.n > 0 else -1) * self.m
        else:
            q, rem = divmod(self.tail, abs(self.m))
            self.stack.append((rem, -1))
            self.tail = q * (1 if self.m > 0 else -1) * self.n

    def push_letters(self, letters: Iterable[Tuple[str, int]]):
        for letter, k in letters:
            if letter == "a":
                self.push_a(k)
            else:
                step = 1 if k > 0 else -1
                for _ in range(abs(k)):
                    self.push_b(step)

    def element(self) -> BSElement:
        return BSElement(self.m, self.n, tuple(self.stack), self.tail)


def parse_word(word: Word) -> List[Tuple[str, int]]:
    """Letters a, A (a⁻¹), b, B (b⁻¹) with optional integer exponents ('a^3'), or (letter, exp) pairs."""
    if not isinstance(word, str):
        out = []
        for letter, k in word:
            if letter not in ("a", "b"):
                raise ConfigError(f"Unknown generator {letter!r}", field="word")
            out.append((letter, int(k)))
        return out
    out = []
    i = 0
    text = word.replace(" ", "")
    while i < len(text):
        ch = text[i]
        if ch not in "aAbB":
            raise ConfigError(f"Unexpected character {ch!r} in word {word!r}", field="word")
        i += 1
        k = 1
        if i < len(text) and text[i] == "^":
            j = i + 1
            if j < len(text) and text[j] in "+-":
                j += 1
            while j < len(text) and text[j].isdigit():
                j += 1
            try:
                k = int(text[i + 1:j])
            except ValueError:
                raise ConfigError(f"Bad exponent in word {word!r}", field="word")
            i = j
        sign = -1 if ch.isupper() else 1
        out.append((ch.lower(), sign * k))
    return out


def bs_normal_form(word: Word, m: int, n: int) -> BSElement:
    """Britton normal form of a word in BS(m, n)."""
    if m == 0 or n == 0:
        raise ConfigError("BS(m,n) needs nonzero m and n", field="m" if m == 0 else "n")
    builder = _NormalFormBuilder(m, n)
    builder.push_letters(parse_word(word))
    return builder.element()


class BSGroup:
    """BS(m, n) with elements kept in normal form."""

    def __init__(self, m: int, n: int):
        if m == 0 or n == 0:
            raise ConfigError("BS(m,n) needs nonzero m and n", field="m" if m == 0 else "n")
        self.m = m
        self.n = n
        self.identity = BSElement(m, n)
        self.a = self.element("a")
        self.b = self.element("b")
        self.ops = GroupOps(f"BS({m},{n})", self.multiply, self.inverse, self.identity)

    def element(self, word: Word) -> BSElement:
        return bs_normal_form(word, self.m, self.n)

    def multiply(self, x: BSElement, y: BSElement) -> BSElement:
        builder = _NormalFormBuilder(self.m, self.n, x)
        builder.push_letters(y.letters())
        return builder.element()

    def inverse(self, x: BSElement) -> BSElement:
        builder = _NormalFormBuilder(self.m, self.n)
        builder.push_letters((letter, -k) for letter, k in reversed(x.letters()))
        return builder.element()

    def tree_distance(self, x: BSElement, y: BSElement) -> int:
        """Distance between the cosets x<a> and y<a> in the Bass-Serre tree."""
        return self.multiply(self.inverse(x), y).b_length

    def coset_rep(self, x: BSElement) -> BSElement:
        return BSElement(self.m, self.n, x.syllables, 0)

    def affine_image(self, x: BSElement) -> Tuple[Fraction, Fraction]:
        """Image under a ↦ (z ↦ z + 1), b ↦ (z ↦ (n/m) z) as (scale, shift)."""
        ratio = Fraction(self.n, self.m)
        scale, shift = Fraction(1), Fraction(0)
        for letter, k in x.letters():
            if letter == "a":
                shift += scale * k
            else:
                scale *= ratio ** k
        return scale, shift


@dataclass
class BassSerreBall:
    m: int
    n: int
    radius: int
    root: Tuple
    vertices: Dict[Tuple, BSElement]
    depth: Dict[Tuple, int]
    edges: List[Tuple[Tuple, Tuple, str, int]]

    @property
    def group(self) -> BSGroup:
        return BSGroup(self.m, self.n)

    def neighbors(self, key: Tuple) -> List[Tuple]:
        return [w for v, w, _, _ in self.edges if v == key] + [v for v, w, _, _ in self.edges if w == key]

    def degree(self, key: Tuple) -> int:
        return len({image.coset_key for image, _, _ in _coset_neighbors(self.group, self.vertices[key])})

    def act(self, h: BSElement) -> Dict[Tuple, Optional[Tuple]]:
        """Induced map on vertex keys; None where the image leaves the ball."""
        group = self.group
        out = {}
        for key, rep in self.vertices.items():
            image = group.multiply(h, rep).coset_key
            out[key] = image if image in self.vertices else None
        return out

    def orbit_path(self, g: BSElement, k_range: int) -> List[Tuple]:
        """Vertex keys g^k<a> for −k_range ≤ k ≤ k_range."""
        group = self.group
        return [group.ops.power(g, k).coset_key for k in range(-k_range, k_range + 1)]

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "radius": self.radius,
                "vertices": [{"key": [list(s) for s in key], "depth": self.depth[key]}
                             for key in sorted(self.vertices, key=lambda k: (self.depth[k], k))],
                "edges": [{"from": [list(s) for s in v], "to": [list(s) for s in w], "kind": kind, "s": s}
                          for v, w, kind, s in self.edges]}


def _coset_neighbors(group: BSGroup, rep: BSElement) -> List[Tuple[BSElement, str, int]]:
    out = []
    for s in range(abs(group.n)):
        out.append((group.multiply(rep, group.element([("a", s), ("b", 1)])), "out", s))
    for s in range(abs(group.m)):
        out.append((group.multiply(rep, group.element([("a", s), ("b", -1)])), "in", s))
    return out


def bass_serre_ball(m: int, n: int, radius: int, cap: Optional[int] = None) -> BassSerreBall:
    """Ball of the given radius around <a> in the Bass-Serre tree of BS(m, n)."""
    if radius < 1:
        raise ConfigError(f"radius must be at least 1, got {radius}", field="radius")
    cap = cap if cap is not None else get_settings().ball_cap
    group = BSGroup(m, n)
    root = group.identity.coset_key
    vertices = {root: group.identity}
    depth = {root: 0}
    edges = []
    frontier = [root]
    for r in range(1, radius + 1):
        nxt = []
        for key in frontier:
            for image, kind, s in _coset_neighbors(group, vertices[key]):
                child = image.coset_key
                if child in vertices:
                    continue
                vertices[child] = group.coset_rep(image)
                depth[child] = r
                edges.append((key, child, kind, s))
                nxt.append(child)
                if len(vertices) > cap:
                    raise BallOverflow(f"Bass-Serre ball exceeds {cap} vertices at radius {r}",
                                       witness=len(vertices))
        frontier = nxt
    logger.info("Bass-Serre ball BS(%d,%d) radius %d: %d vertices", m, n, radius, len(vertices))
    return BassSerreBall(m, n, radius, root, vertices, depth, edges)


def is_metabelian_on_samples(group: BSGroup, samples: Sequence[BSElement]) -> bool:
    """Commutators of commutators vanish on the samples (solvability of BS(1,n))."""
    ops = group.ops

    def commutator(x, y):
        return ops.multiply(ops.multiply(x, y), ops.multiply(ops.inverse(x), ops.inverse(y)))

    commutators = [commutator(x, y) for x in samples for y in samples]
    return all(commutator(c1, c2) == group.identity for c1 in commutators for c2 in commutators)


def distortion_witness(n: int, k: int) -> Tuple[BSElement, int]:
    """Normal form of b^k a b^-k in BS(1, n) and the expected a-exponent n^k."""
    if k < 0:
        raise GroupError("k must be non-negative")
    element = bs_normal_form([("b", k), ("a", 1), ("b", -k)], 1, n)
    return element, n ** k
