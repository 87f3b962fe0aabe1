"""Braid group images in SL(2,Z) and a bounded chirality search"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

from .errors import ConfigError
from .groups import IntMatrix2

logger = logging.getLogger(__name__)

SIGMA = IntMatrix2(1, 1, 0, 1)
TAU = IntMatrix2(1, 0, -1, 1)

_LETTERS = {
    "s": SIGMA, "S": SIGMA.inverse(),
    "t": TAU, "T": TAU.inverse(),
}


def _tokens(word: Union[str, Sequence[str]]) -> List[str]:
    if isinstance(word, str):
        text = word.replace(" ", "").replace("σ⁻¹", "S").replace("τ⁻¹", "T").replace("σ", "s").replace("τ", "t")
        return list(text)
    return list(word)


def braid_to_sl2(word: Union[str, Sequence[str]]) -> IntMatrix2:
    """Image of a word in σ^±1, τ^±1 (letters s, S, t, T) under σ ↦ [[1,1],[0,1]], τ ↦ [[1,0],[−1,1]]."""
    result = IntMatrix2.identity()
    for token in _tokens(word):
        if token not in _LETTERS:
            raise ConfigError(f"Unknown braid letter {token!r}", field="word")
        result = result @ _LETTERS[token]
    return result


@dataclass(frozen=True)
class ChiralityResult:
    found: bool
    n: Optional[int] = None
    conjugator: Optional[IntMatrix2] = None
    conjugator_word: Optional[str] = None
    searched: int = 0

    def to_json(self) -> dict:
        return {"found": self.found, "n": self.n,
                "conjugator": self.conjugator.rows() if self.conjugator else None,
                "conjugator_word": self.conjugator_word, "searched": self.searched,
                "status": "Found" if self.found else "NotFoundWithinBound"}


def _conjugators(conj_len: int) -> List[Tuple[str, IntMatrix2]]:
    seen = {IntMatrix2.identity(): ""}
    frontier = [("", IntMatrix2.identity())]
    for _ in range(conj_len):
        nxt = []
        for word, matrix in frontier:
            for letter, gen in _LETTERS.items():
                image = matrix @ gen
                if image not in seen:
                    seen[image] = word + letter
                    nxt.append((word + letter, image))
        frontier = nxt
    return [(w, m) for m, w in seen.items()]


def chirality_search(A: IntMatrix2, n_max: int, conj_len: int) -> ChiralityResult:
    """Search for C with C·Aⁿ·C⁻¹ = A⁻ⁿ, n ≤ n_max, C a word of length ≤ conj_len.

    A negative result only means nothing was found within the bounds.
    """
    if n_max < 1 or conj_len < 1:
        raise ConfigError("n_max and conj_len must be at least 1", field="n_max" if n_max < 1 else "conj_len")
    if A.det != 1:
        raise ConfigError(f"Matrix {A.rows()} is not in SL(2,Z)", field="A")
    conjugators = _conjugators(conj_len)
    for n in range(1, n_max + 1):
        power = A.power(n)
        target = A.power(-n)
        for word, C in conjugators:
            if C @ power @ C.inverse() == target:
                logger.info("Chirality conjugator found: n=%d word=%r", n, word)
                return ChiralityResult(True, n, C, word, len(conjugators))
    return ChiralityResult(False, searched=len(conjugators))
