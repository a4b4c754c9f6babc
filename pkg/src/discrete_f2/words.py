"""Reduced words in the free group on two generators ``f`` and ``g``.

Words are stored in written order ``a_r ... a_1``: the rightmost letter is
applied first when a word acts on a point. Text form uses ``f``, ``F``
(= f^-1), ``g``, ``G``; the empty word is ``1``.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

__all__ = [
    "Letter",
    "ReducedWord",
    "WordPair",
    "reduce",
    "concat",
    "inverse",
    "is_suffix",
    "longest_common_suffix",
    "stage_words",
    "words_of_length",
    "iter_words_of_length",
    "iter_pairs",
    "enumerate_pairs",
    "pair_block_count",
    "block_count_formula",
    "EMPTY",
]

# materializing more words than this is refused
MAX_MATERIALIZED_WORDS = 10**7


class Letter(enum.Enum):
    f = ("f", 1)
    F = ("f", -1)
    g = ("g", 1)
    G = ("g", -1)

    @property
    def generator(self) -> str:
        return self.value[0]

    @property
    def exponent(self) -> int:
        return self.value[1]

    @property
    def inverse(self) -> "Letter":
        return _INVERSE[self]

    @property
    def rank(self) -> int:
        # enumeration order f < f^-1 < g < g^-1
        return _RANK[self]

    @classmethod
    def parse(cls, ch: str) -> "Letter":
        try:
            return cls[ch]
        except KeyError:
            raise ValueError(f"unknown letter {ch!r}; expected one of f, F, g, G") from None

    def __str__(self) -> str:
        return self.name


_INVERSE = {Letter.f: Letter.F, Letter.F: Letter.f, Letter.g: Letter.G, Letter.G: Letter.g}
_RANK = {Letter.f: 0, Letter.F: 1, Letter.g: 2, Letter.G: 3}
ALPHABET: tuple[Letter, ...] = (Letter.f, Letter.F, Letter.g, Letter.G)


@dataclass(frozen=True)
class ReducedWord:
    """A freely reduced word; ``letters[0]`` is applied last, ``letters[-1]`` first."""

    letters: tuple[Letter, ...] = ()

    def __post_init__(self) -> None:
        for left, right in zip(self.letters, self.letters[1:]):
            if left.inverse is right:
                raise ValueError(f"word {self._text()} is not freely reduced")

    @classmethod
    def parse(cls, text: str) -> "ReducedWord":
        """Parse ``ffgFG`` style text; the result is freely reduced."""
        text = text.strip()
        if text in ("", "1", "e"):
            return EMPTY
        return reduce(Letter.parse(ch) for ch in text)

    def _text(self) -> str:
        return "".join(letter.name for letter in self.letters) or "1"

    def __str__(self) -> str:
        return self._text()

    def __repr__(self) -> str:
        return f"ReducedWord({self._text()!r})"

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return concat(self, other)

    def __invert__(self) -> "ReducedWord":
        return inverse(self)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def applied_order(self) -> tuple[Letter, ...]:
        """Letters in the order they act: ``a_1, a_2, ..., a_r``."""
        return self.letters[::-1]

    def sort_key(self) -> tuple[int, ...]:
        return tuple(letter.rank for letter in self.letters)


EMPTY = ReducedWord()


def reduce(letters: Iterable[Letter]) -> ReducedWord:
    stack: list[Letter] = []
    for letter in letters:
        if stack and stack[-1].inverse is letter:
            stack.pop()
        else:
            stack.append(letter)
    return ReducedWord(tuple(stack))


def concat(w1: ReducedWord, w2: ReducedWord) -> ReducedWord:
    """Reduced form of ``w1 * w2`` (``w2`` acts first)."""
    left = list(w1.letters)
    right = w2.letters
    i = 0
    while left and i < len(right) and left[-1].inverse is right[i]:
        left.pop()
        i += 1
    return ReducedWord(tuple(left) + right[i:])


def inverse(w: ReducedWord) -> ReducedWord:
    return ReducedWord(tuple(letter.inverse for letter in reversed(w.letters)))


def is_suffix(u: ReducedWord, w: ReducedWord) -> bool:
    """True when ``w = u1 * u`` with ``|w| = |u1| + |u|``."""
    if len(u) > len(w):
        return False
    return len(u) == 0 or w.letters[len(w) - len(u):] == u.letters


def longest_common_suffix(u: ReducedWord, v: ReducedWord) -> tuple[ReducedWord, int]:
    s = 0
    for a, b in zip(reversed(u.letters), reversed(v.letters)):
        if a is not b:
            break
        s += 1
    return ReducedWord(u.letters[len(u) - s:]), s


def stage_words(w: ReducedWord) -> list[ReducedWord]:
    """Partial products ``W(0) = 1, W(1) = a_1, ..., W(r) = w``."""
    r = len(w)
    return [ReducedWord(w.letters[r - k:]) if k else EMPTY for k in range(r + 1)]


def word_count(n: int) -> int:
    if n < 0:
        raise ValueError("length must be non-negative")
    return 1 if n == 0 else 4 * 3 ** (n - 1)


def iter_words_of_length(n: int) -> Iterator[ReducedWord]:
    """All reduced words of length ``n`` in lexicographic order (f < F < g < G)."""

    def extend(prefix: list[Letter]) -> Iterator[ReducedWord]:
        if len(prefix) == n:
            yield ReducedWord(tuple(prefix))
            return
        for letter in ALPHABET:
            if prefix and prefix[-1].inverse is letter:
                continue
            prefix.append(letter)
            yield from extend(prefix)
            prefix.pop()

    yield from extend([])


def words_of_length(n: int, materialize: bool = False) -> tuple[int, list[ReducedWord] | None]:
    """Return ``(4 * 3**(n-1), words)``; ``words`` is ``None`` unless requested."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    count = word_count(n)
    if not materialize:
        return count, None
    if count > MAX_MATERIALIZED_WORDS:
        raise OverflowError(f"refusing to materialize {count} words of length {n}")
    return count, _words_tuple(n)


@lru_cache(maxsize=None)
def _words_tuple(n: int) -> list[ReducedWord]:
    return list(iter_words_of_length(n))


def words_up_to(max_length: int, include_identity: bool = False) -> list[ReducedWord]:
    out = [EMPTY] if include_identity else []
    for n in range(1, max_length + 1):
        out.extend(_words_tuple(n))
    return out


@dataclass(frozen=True)
class WordPair:
    U: ReducedWord
    V: ReducedWord
    index: int
    common_suffix_length: int

    def __post_init__(self) -> None:
        if self.U.is_identity:
            raise ValueError("U must be nontrivial")
        if len(self.U) < len(self.V):
            raise ValueError("|U| must be at least |V|")
        if self.index < 1:
            raise ValueError("pair index starts at 1")

    @property
    def r(self) -> int:
        return len(self.U)

    @property
    def m(self) -> int:
        return len(self.V)

    @property
    def s(self) -> int:
        return self.common_suffix_length

    @property
    def distinct(self) -> bool:
        return self.U != self.V

    def __str__(self) -> str:
        return f"({self.U}, {self.V})"


def make_pair(U: ReducedWord, V: ReducedWord, index: int) -> WordPair:
    _, s = longest_common_suffix(U, V)
    return WordPair(U, V, index, s)


def iter_pairs() -> Iterator[WordPair]:
    """The total enumeration of pairs ``(U, V)``, ``U != 1``, ``|U| >= |V|``.

    Ordered by ``|U|``, then ``|V|``, then lexicographically on ``U``, then ``V``.
    """
    index = 1
    for j in itertools.count(1):
        us = _words_tuple(j)
        for k in range(j + 1):
            vs = [EMPTY] if k == 0 else _words_tuple(k)
            for U in us:
                for V in vs:
                    yield make_pair(U, V, index)
                    index += 1


def enumerate_pairs(count: int) -> list[WordPair]:
    if count < 0:
        raise ValueError("count must be non-negative")
    return list(itertools.islice(iter_pairs(), count))


def block_count_formula(j: int) -> int:
    """Closed form for the number of pairs with ``|U| = j``."""
    return word_count(j) * (2 * 3**j - 1)


def pair_block_count(j: int, horizon: int | Sequence[WordPair]) -> int:
    """Count enumerated pairs with ``|U| = j`` inside a materialized prefix.

    ``horizon`` is either the number of materialized pairs or the pairs themselves.
    The prefix must extend past the end of block ``j``.
    """
    if j < 1:
        raise ValueError("j must be a positive integer")
    pairs = enumerate_pairs(horizon) if isinstance(horizon, int) else list(horizon)
    if not pairs or len(pairs[-1].U) <= j:
        raise ValueError(f"enumeration of {len(pairs)} pairs does not extend beyond block {j}")
    return sum(1 for p in pairs if len(p.U) == j)


def cumulative_block_count(j: int) -> int:
    return sum(block_count_formula(k) for k in range(1, j + 1))
