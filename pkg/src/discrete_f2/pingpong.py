"""Exact piecewise-linear ping-pong generators on a bi-infinite interval chain.

Every check here runs in :class:`fractions.Fraction` arithmetic, so containment
and displacement claims carry no tolerance.
"""

from __future__ import annotations

import hashlib
import heapq
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .certificate import Certificate, frac
from .words import EMPTY, Letter, ReducedWord, concat, inverse, words_up_to

Interval = tuple[Fraction, Fraction]

# middle blocks of the default chain
DEFAULT_MIDDLE: dict[int, tuple[Interval, Interval]] = {
    -1: ((Fraction(3, 20), Fraction(1, 4)), (Fraction(3, 10), Fraction(2, 5))),
    0: ((Fraction(9, 20), Fraction(11, 20)), (Fraction(3, 5), Fraction(7, 10))),
}
SLOTS = 9


class ChainError(ValueError):
    pass


class WindowExhausted(RuntimeError):
    pass


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Exact rational from ``p/q`` or an integer; decimals and floats are refused."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool) or isinstance(text, float):
        raise TypeError(f"exact rational required, got {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    s = str(text).strip()
    if any(ch in s for ch in ".eE"):
        raise ValueError(f"decimal {s!r} rejected; write rationals as p/q")
    return Fraction(s)


def length(iv: Interval) -> Fraction:
    return iv[1] - iv[0]


def contains(outer: Interval, inner: Interval) -> bool:
    """Containment of open intervals."""
    return outer[0] <= inner[0] and inner[1] <= outer[1]


@dataclass(frozen=True)
class IntervalChain:
    """Chain ``... < A_-1 < B_-1 < A_0 < B_0 < A_1 < ...`` materialized on ``|n| <= N_max``."""

    kind: str
    N_max: int
    epsilon: Fraction | None = None
    custom: Mapping[int, tuple[Interval, Interval]] | None = None

    def _default(self, n: int) -> tuple[Interval, Interval]:
        if n in DEFAULT_MIDDLE:
            return DEFAULT_MIDDLE[n]
        if n <= -2:
            k = -n
            return (
                (Fraction(1, 5 * (k + 1)), Fraction(1, 5 * k + 4)),
                (Fraction(1, 5 * k + 4), Fraction(1, 5 * k)),
            )
        return (
            (1 - Fraction(1, 5 * n), 1 - Fraction(1, 5 * n + 1)),
            (1 - Fraction(1, 5 * n + 1), 1 - Fraction(1, 5 * (n + 1))),
        )

    def squeeze(self, x: Fraction) -> Fraction:
        if self.kind != "squeezed":
            return x
        eps = self.epsilon
        return (1 - eps) / 2 + eps * x

    @property
    def support(self) -> Interval:
        return self.squeeze(Fraction(0)), self.squeeze(Fraction(1))

    def blocks(self, n: int) -> tuple[Interval, Interval]:
        if self.kind == "custom":
            try:
                return self.custom[n]
            except KeyError:
                raise WindowExhausted(f"custom chain has no block {n}") from None
        a, b = self._default(n)
        if self.kind == "squeezed":
            sq = self.squeeze
            return (sq(a[0]), sq(a[1])), (sq(b[0]), sq(b[1]))
        return a, b

    def A(self, n: int) -> Interval:
        return self.blocks(n)[0]

    def B(self, n: int) -> Interval:
        return self.blocks(n)[1]

    @property
    def indices(self) -> range:
        return range(-self.N_max, self.N_max + 1)

    def order_violations(self) -> list[str]:
        problems = []
        ns = list(self.indices)
        for n in ns:
            (a0, a1), (b0, b1) = self.blocks(n)
            if not 0 < a0 < a1 <= b0 < b1 < 1:
                problems.append(f"A_{n} < B_{n} fails: {frac((a0, a1))} {frac((b0, b1))}")
            if n + 1 in ns and not b1 <= self.A(n + 1)[0]:
                problems.append(f"B_{n} < A_{n + 1} fails")
        return problems

    def locate(self, x: Fraction) -> tuple[str, int] | None:
        """Which materialized chain interval contains ``x``, if any."""
        for n in self.indices:
            a, b = self.blocks(n)
            if a[0] < x < a[1]:
                return "A", n
            if b[0] < x < b[1]:
                return "B", n
        return None

    def describe(self) -> dict:
        out: dict = {"kind": self.kind, "N_max": self.N_max}
        if self.epsilon is not None:
            out["epsilon"] = frac(self.epsilon)
        if self.custom is not None:
            out["custom"] = {
                str(n): [frac(a), frac(b)] for n, (a, b) in sorted(self.custom.items())
            }
        return out

    @classmethod
    def from_description(cls, d: Mapping) -> "IntervalChain":
        kind = d["kind"]
        if kind == "default":
            return build_chain("default", d["N_max"])
        if kind == "squeezed":
            return build_chain("squeezed", d["N_max"], epsilon=parse_rational(d["epsilon"]))
        custom = {
            int(n): (tuple(map(parse_rational, a)), tuple(map(parse_rational, b)))
            for n, (a, b) in d["custom"].items()
        }
        return build_chain("custom", d["N_max"], custom=custom)


def build_chain(spec: str = "default", N_max: int = 22, epsilon: Fraction | str | None = None, custom: Mapping | None = None) -> IntervalChain:
    if N_max < 2:
        raise ChainError("window must satisfy N_max >= 2")
    if spec == "default":
        chain = IntervalChain("default", N_max)
    elif spec == "squeezed":
        eps = parse_rational(epsilon)
        if not 0 < eps <= 1:
            raise ChainError("epsilon must lie in (0, 1]")
        chain = IntervalChain("squeezed", N_max, eps)
    elif spec == "custom":
        if custom is None:
            raise ChainError("custom chain needs explicit blocks")
        chain = IntervalChain("custom", N_max, None, dict(custom))
        needed = set(range(-N_max - 1, N_max + 2))
        if not needed <= set(chain.custom):
            raise ChainError(f"custom chain must define blocks for n in [{-N_max - 1}, {N_max + 1}]")
    else:
        raise ChainError(f"unknown chain spec {spec!r}")
    problems = chain.order_violations()
    if problems:
        raise ChainError("; ".join(problems))
    return chain


class PLHomeo:
    """Increasing piecewise-linear homeomorphism of [0,1] with rational breakpoints."""

    __slots__ = ("xs", "ys", "__dict__")

    def __init__(self, points: Iterable[tuple[Fraction, Fraction]], simplify: bool = True):
        pts = sorted({(Fraction(x), Fraction(y)) for x, y in points})
        if simplify:
            pts = _drop_collinear(pts)
        xs = tuple(p[0] for p in pts)
        ys = tuple(p[1] for p in pts)
        if len(xs) < 2 or xs[0] != 0 or ys[0] != 0 or xs[-1] != 1 or ys[-1] != 1:
            raise ValueError("a PL homeomorphism must fix 0 and 1")
        for i in range(len(xs) - 1):
            if not (xs[i] < xs[i + 1] and ys[i] < ys[i + 1]):
                raise ValueError(f"breakpoints not strictly increasing near x = {xs[i]}")
        self.xs = xs
        self.ys = ys

    @classmethod
    def identity(cls) -> "PLHomeo":
        return cls([(Fraction(0), Fraction(0)), (Fraction(1), Fraction(1))])

    def __len__(self) -> int:
        return len(self.xs)

    def __eq__(self, other) -> bool:
        return isinstance(other, PLHomeo) and self.xs == other.xs and self.ys == other.ys

    def __hash__(self) -> int:
        return hash((self.xs, self.ys))

    def __repr__(self) -> str:
        return f"PLHomeo({len(self.xs)} breakpoints)"

    def __call__(self, x: Fraction) -> Fraction:
        return apply(self, x)

    @property
    def breakpoints(self) -> list[tuple[Fraction, Fraction]]:
        return list(zip(self.xs, self.ys))

    @cached_property
    def slopes(self) -> tuple[Fraction, ...]:
        return tuple(
            (self.ys[i + 1] - self.ys[i]) / (self.xs[i + 1] - self.xs[i])
            for i in range(len(self.xs) - 1)
        )

    @cached_property
    def inverse(self) -> "PLHomeo":
        return invert(self)

    def digest(self) -> str:
        h = hashlib.sha256()
        for x, y in zip(self.xs, self.ys):
            h.update(f"{x.numerator}/{x.denominator},{y.numerator}/{y.denominator};".encode())
        return h.hexdigest()


def _drop_collinear(pts: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    if len(pts) < 3:
        return pts
    out = [pts[0]]
    for i in range(1, len(pts) - 1):
        (x0, y0), (x1, y1), (x2, y2) = out[-1], pts[i], pts[i + 1]
        if (y1 - y0) * (x2 - x1) != (y2 - y1) * (x1 - x0):
            out.append(pts[i])
    out.append(pts[-1])
    return out


def _interp(xs: Sequence[Fraction], ys: Sequence[Fraction], x: Fraction) -> Fraction:
    if not 0 <= x <= 1:
        raise ValueError(f"{x} outside [0, 1]")
    i = bisect_right(xs, x) - 1
    if i >= len(xs) - 1:
        return ys[-1]
    if xs[i] == x:
        return ys[i]
    return ys[i] + (ys[i + 1] - ys[i]) * (x - xs[i]) / (xs[i + 1] - xs[i])


def apply(p: PLHomeo, x: Fraction) -> Fraction:
    return _interp(p.xs, p.ys, x)


def apply_inverse(p: PLHomeo, y: Fraction) -> Fraction:
    return _interp(p.ys, p.xs, y)


def invert(p: PLHomeo) -> PLHomeo:
    return PLHomeo(zip(p.ys, p.xs), simplify=False)


def compose(p: PLHomeo, q: PLHomeo) -> PLHomeo:
    """``p o q``: apply ``q`` first."""
    # walk the merged breakpoints u of p and of q's image in one pass
    qx, qy, qs = q.xs, q.ys, q.slopes
    px, py, ps = p.xs, p.ys, p.slopes
    i = j = 0
    pts = []
    prev = None
    for u in heapq.merge(qy, px):
        if u == prev:
            continue
        prev = u
        while i < len(qs) - 1 and qy[i + 1] <= u:
            i += 1
        while j < len(ps) - 1 and px[j + 1] <= u:
            j += 1
        pts.append((qx[i] + (u - qy[i]) / qs[i], py[j] + ps[j] * (u - px[j])))
    return PLHomeo(pts)


def image(p: PLHomeo, iv: Interval) -> Interval:
    return apply(p, iv[0]), apply(p, iv[1])


def preimage(p: PLHomeo, iv: Interval) -> Interval:
    return apply_inverse(p, iv[0]), apply_inverse(p, iv[1])


def power(p: PLHomeo, k: int) -> PLHomeo:
    base = p if k >= 0 else p.inverse
    out = PLHomeo.identity()
    for _ in range(abs(k)):
        out = compose(base, out)
    return out


def _support_ends(chain: IntervalChain, pts: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    lo, hi = chain.support
    head = [(Fraction(0), Fraction(0)), (lo, lo)]
    tail = [(hi, hi), (Fraction(1), Fraction(1))]
    return head + pts + tail


def _dedupe(pts: list[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    out: list[tuple[Fraction, Fraction]] = []
    for x, y in pts:
        if out and out[-1][0] == x:
            if out[-1][1] != y:
                raise ChainError(f"conflicting images at {x}")
            continue
        out.append((x, y))
    return out


def build_f(chain: IntervalChain) -> PLHomeo:
    """Nine-slot translation scheme inside every ``B_n``.

    ``f(A_n)`` is the left half of slot 4, slots 4..7 translate onto slots 5..8,
    and slot 8 is stretched over ``A_{n+1}``, so ``f^i(A_n) ⊆ B_n`` and
    ``f^{-i}(A_{n+1}) ⊆ B_n`` for ``i = 1..4``.
    """
    if chain.N_max < 2:
        raise WindowExhausted("window too small")
    pts: list[tuple[Fraction, Fraction]] = []
    for n in chain.indices:
        (a0, a1), (b0, b1) = chain.blocks(n)
        w = (b1 - b0) / SLOTS
        (na0, na1), (nb0, nb1) = chain.blocks(n + 1)
        nw = (nb1 - nb0) / SLOTS
        landing = nb0 + 4 * nw
        y_end = landing if b1 == na0 else (na1 + landing) / 2
        pts += [
            (a0, b0 + 4 * w),
            (a1, b0 + 4 * w + w / 2),
            (b0 + 4 * w, b0 + 5 * w),
            (b0 + 8 * w, b1),
            (b1, y_end),
        ]
    return PLHomeo(_dedupe(_support_ends(chain, pts)))


def _g_windows(chain: IntervalChain) -> tuple[dict[int, Interval], dict[int, Interval]]:
    """Images of ``A_n`` (covering ``B_n``) and of ``B_{n-1}`` (inside ``A_n``).

    ``g`` is linear on every ``A_n`` and ``B_n``.  Where two chain intervals
    touch, their images must touch as well; where they are separated, so are
    the images.  The defaults (``A_n -> B_n``, ``B_n -> A_{n+1}``) are adjusted
    only where that rule demands it.
    """
    lo_n, hi_n = -chain.N_max, chain.N_max + 1
    J = {n: list(chain.B(n)) for n in range(lo_n, hi_n + 1)}
    K = {n: list(chain.A(n)) for n in range(lo_n, hi_n + 1)}
    for n in chain.indices:
        (a0, a1), (b0, b1) = chain.blocks(n)
        (na0, na1), (nb0, _) = chain.blocks(n + 1)
        mid = (na0 + na1) / 2
        # A_n then B_n: g(a1) == g(b0) exactly when a1 == b0
        if a1 == b0 and b1 < na0:
            J[n][1] = na0
        elif a1 < b0 and b1 == na0:
            K[n + 1][0] = mid
        # B_n then A_{n+1}: g(b1) == g(na0) exactly when b1 == na0
        if b1 == na0 and na1 < nb0:
            J[n + 1][0] = K[n + 1][1]
        elif b1 < na0 and na1 == nb0:
            K[n + 1][1] = mid
    return {n: tuple(v) for n, v in J.items()}, {n: tuple(v) for n, v in K.items()}


def build_g(chain: IntervalChain) -> PLHomeo:
    """Shift along the chain: ``g(B_n) ⊆ A_{n+1}`` and ``g^{-1}(B_n) ⊆ A_n``.

    Where neighbouring chain intervals touch, ``g`` maps ``A_n`` onto ``B_n``
    and ``B_n`` onto ``A_{n+1}`` exactly, which keeps the slopes at the
    ratios forced by the containments.
    """
    J, K = _g_windows(chain)
    pts: list[tuple[Fraction, Fraction]] = []
    for n in chain.indices:
        (a0, a1), (b0, b1) = chain.blocks(n)
        pts += [(a0, J[n][0]), (a1, J[n][1]), (b0, K[n + 1][0]), (b1, K[n + 1][1])]
    return PLHomeo(_dedupe(_support_ends(chain, pts)))


@dataclass(frozen=True)
class AdmissibleWordPair:
    U: ReducedWord
    V: ReducedWord

    def __post_init__(self) -> None:
        _check_admissible(self.U, 2, "U")
        _check_admissible(self.V, 1, "V")

    @classmethod
    def default(cls) -> "AdmissibleWordPair":
        return cls(ReducedWord.parse("ffgff"), ReducedWord.parse("fgf"))

    @classmethod
    def parse(cls, u: str, v: str) -> "AdmissibleWordPair":
        return cls(ReducedWord.parse(u), ReducedWord.parse(v))

    @property
    def M(self) -> int:
        return max(len(self.U), len(self.V))

    def describe(self) -> list[str]:
        return [str(self.U), str(self.V)]


def _check_admissible(w: ReducedWord, k: int, name: str) -> None:
    letters = w.letters
    if len(letters) < 2 * k + 1:
        raise ValueError(f"{name} = {w} too short for f^{k} W0 f^{k}")
    if letters[:k] != (Letter.f,) * k or letters[-k:] != (Letter.f,) * k:
        raise ValueError(f"{name} = {w} must begin and end with f^{k}")
    core = letters[k:-k]
    if core[0].generator != "g" or core[-1].generator != "g":
        raise ValueError(f"{name}_0 must start and end with a g-letter")
    for a, b in zip(core, core[1:]):
        if a is b:
            raise ValueError(f"{name}_0 has a letter with exponent other than +-1")


def expand_word(W: ReducedWord, pair: AdmissibleWordPair) -> ReducedWord:
    """Substitute ``f -> U``, ``g -> V`` in a word over ``{U, V}`` and reduce."""
    table = {
        Letter.f: pair.U,
        Letter.F: inverse(pair.U),
        Letter.g: pair.V,
        Letter.G: inverse(pair.V),
    }
    out = EMPTY
    for letter in W.letters:
        out = concat(out, table[letter])
    if not W.is_identity:
        if out.is_identity or out.letters[-1].generator != "f" or out.letters[0].generator != "f":
            raise AssertionError(f"expansion of {W} does not begin and end with f^{{+-1}}")
    return out


@dataclass
class PingPongSystem:
    chain: IntervalChain
    f: PLHomeo
    g: PLHomeo

    @classmethod
    def build(cls, chain: IntervalChain) -> "PingPongSystem":
        return cls(chain, build_f(chain), build_g(chain))

    def letter_map(self, letter: Letter) -> PLHomeo:
        base = self.f if letter.generator == "f" else self.g
        return base if letter.exponent > 0 else base.inverse

    def evaluate(self, w: ReducedWord, x: Fraction) -> Fraction:
        for letter in w.applied_order():
            x = apply(self.letter_map(letter), x)
        return x

    def trajectory(self, w: ReducedWord, x: Fraction) -> list[Fraction]:
        out = [x]
        for letter in w.applied_order():
            x = apply(self.letter_map(letter), x)
            out.append(x)
        return out

    def word_map(self, w: ReducedWord) -> PLHomeo:
        out = PLHomeo.identity()
        for letter in w.applied_order():
            out = compose(self.letter_map(letter), out)
        return out

    @property
    def x0(self) -> Fraction:
        a0, a1 = self.chain.A(0)
        return (a0 + a1) / 2


def verify_conditions(f: PLHomeo, g: PLHomeo, chain: IntervalChain, power_range: Sequence[int] = (1, 2, 3, 4), epsilon: Fraction | str = Fraction(1)) -> Certificate:
    eps = parse_rational(epsilon)
    powers = sorted(set(power_range))
    witnesses: list[dict] = []
    failures = 0

    def record(desc: str, ok: bool, **values) -> None:
        nonlocal failures
        failures += not ok
        witnesses.append({"description": desc, "values": {"ok": ok, **values}})

    problems = chain.order_violations()
    record("(i) chain order", not problems, problems=problems)
    f_pow = {k: power(f, k) for k in powers}
    f_inv = {k: power(f, -k) for k in powers}
    ns = list(chain.indices)
    for n in ns:
        A, B = chain.blocks(n)
        for k in powers:
            im = image(f_pow[k], A)
            record(f"(ii) f^{k}(A_{n}) in B_{n}", contains(B, im), image=im, target=B)
        if n - 1 in ns:
            prevB = chain.B(n - 1)
            for k in powers:
                im = image(f_inv[k], A)
                record(f"(ii) f^-{k}(A_{n}) in B_{n - 1}", contains(prevB, im), image=im, target=prevB)
    for n in ns:
        B = chain.B(n)
        nextA = chain.A(n + 1)
        im = image(g, B)
        record(f"(iii) g(B_{n}) in A_{n + 1}", contains(nextA, im), image=im, target=nextA)
        pre = preimage(g, B)
        record(f"(iii) g^-1(B_{n}) in A_{n}", contains(chain.A(n), pre), image=pre, target=chain.A(n))
    spreads = []
    for n in ns:
        if n + 2 in ns:
            spread = chain.A(n + 2)[1] - chain.A(n)[0]
            spreads.append(spread)
            record(f"(iv) sup |A_{n} - A_{n + 2}| < epsilon", spread < eps, spread=spread)
    return Certificate.make(
        "pingpong.conditions",
        inputs={
            "chain": chain.describe(),
            "powers": powers,
            "epsilon": frac(eps),
            "f_digest": f.digest(),
            "g_digest": g.digest(),
        },
        witnesses=witnesses,
        passed=failures == 0,
        tolerances=[{"name": "containment", "value": 0}],
    )


def required_window(L: int, pair: AdmissibleWordPair) -> int:
    return L * pair.M


def default_window(L: int, pair: AdmissibleWordPair) -> int:
    return required_window(L, pair) + 2


def nontrivial_words(L: int) -> list[ReducedWord]:
    return words_up_to(L)


def discreteness_certificate(pair: AdmissibleWordPair, f: PLHomeo, g: PLHomeo, chain: IntervalChain, L: int) -> Certificate:
    """Exhaustive ping-pong displacement check at the midpoint of ``A_0``."""
    if chain.N_max < required_window(L, pair):
        raise WindowExhausted(f"window {chain.N_max} < L * M = {required_window(L, pair)}")
    system = PingPongSystem(chain, f, g)
    x0 = system.x0
    A0 = chain.A(0)
    bound = length(A0) / 2
    witnesses = []
    failures = 0
    min_disp: Fraction | None = None
    words = nontrivial_words(L)
    for W in words:
        expanded = expand_word(W, pair)
        value = system.evaluate(expanded, x0)
        disp = abs(value - x0)
        outside = not (A0[0] < value < A0[1])
        ok = outside and disp > bound
        failures += not ok
        min_disp = disp if min_disp is None else min(min_disp, disp)
        witnesses.append(
            {
                "description": f"W = {W}",
                "values": {"expanded": str(expanded), "W(x0)": value, "displacement": disp, "ok": ok},
            }
        )
    witnesses.append(
        {
            "description": "distinct W1 != W2: z = W1^-1(x0) gives |W2(z) - W1(z)| = |W(x0) - x0| for W = W2 W1^-1",
            "values": {"min_displacement": min_disp, "bound": bound},
        }
    )
    return Certificate.make(
        "pingpong.discreteness",
        inputs={
            "chain": chain.describe(),
            "pair": pair.describe(),
            "L": L,
            "x0": x0,
            "f_digest": f.digest(),
            "g_digest": g.digest(),
        },
        witnesses=witnesses,
        passed=failures == 0 and bool(words),
        tolerances=[{"name": "displacement", "value": 0}],
        summary={"words": len(words), "bound": bound, "min_displacement": min_disp},
    )


def lipschitz_profile(p: PLHomeo, region: Interval) -> tuple[Fraction, Fraction]:
    """Exact extreme slopes over segments meeting ``region`` in positive length."""
    lo, hi = region
    slopes = [
        s
        for s, x0, x1 in zip(p.slopes, p.xs, p.xs[1:])
        if max(x0, lo) < min(x1, hi)
    ]
    if not slopes:
        raise ValueError("region meets no segment")
    return min(slopes), max(slopes)


def bilipschitz_constant(p: PLHomeo, region: Interval) -> Fraction:
    lo, hi = lipschitz_profile(p, region)
    return max(hi, 1 / lo)


def forced_lipschitz_bound(chain: IntervalChain, n: int) -> Fraction:
    """Lower bound on the bi-Lipschitz constant of any ``g`` near block ``n``.

    ``g^{-1}(B_n) ⊆ A_n`` forces a slope ``>= |B_n|/|A_n|`` and
    ``g(B_n) ⊆ A_{n+1}`` a slope ``<= |A_{n+1}|/|B_n|``.
    """
    A, B = chain.blocks(n)
    return max(length(B) / length(A), length(B) / length(chain.A(n + 1)))


def lipschitz_certificate(g: PLHomeo, chain: IntervalChain, tail_from: int = 3, bound: Fraction = Fraction(5)) -> Certificate:
    witnesses = []
    regions = {"[0, 1/5]": (Fraction(0), Fraction(1, 5)), "[4/5, 1]": (Fraction(4, 5), Fraction(1))}
    for name, region in regions.items():
        lo, hi = lipschitz_profile(g, region)
        witnesses.append(
            {"description": f"g on {name}", "values": {"min_slope": lo, "max_slope": hi, "constant": max(hi, 1 / lo)}}
        )
    failures = 0
    for n in chain.indices:
        if n + 1 > chain.N_max:
            continue
        region = (chain.A(n)[0], chain.B(n)[1])
        const = bilipschitz_constant(g, region)
        forced = forced_lipschitz_bound(chain, n)
        in_tail = abs(n) >= tail_from
        ok = const <= bound if in_tail else True
        failures += not ok
        witnesses.append(
            {
                "description": f"g on A_{n} u B_{n}",
                "values": {"constant": const, "forced_lower_bound": forced, "tail": in_tail, "ok": ok},
            }
        )
    return Certificate.make(
        "pingpong.lipschitz",
        inputs={"chain": chain.describe(), "tail_from": tail_from, "bound": bound, "g_digest": g.digest()},
        witnesses=witnesses,
        passed=failures == 0,
        tolerances=[{"name": "slope", "value": 0}],
    )


def displacement_sup(p: PLHomeo) -> Fraction:
    return max(abs(y - x) for x, y in zip(p.xs, p.ys))


def small_ball_certificate(epsilon: Fraction | str, pair: AdmissibleWordPair | None = None, L: int = 3) -> Certificate:
    eps = parse_rational(epsilon)
    pair = pair or AdmissibleWordPair.default()
    chain = build_chain("squeezed", default_window(L, pair), epsilon=eps)
    system = PingPongSystem.build(chain)
    U = system.word_map(pair.U)
    V = system.word_map(pair.V)
    dU, dV = displacement_sup(U), displacement_sup(V)
    M = pair.M
    disc = discreteness_certificate(pair, system.f, system.g, chain, L)
    bound = length(chain.A(0)) / 2
    checks = {
        "sup|U - id| < 100 eps": dU < 100 * eps,
        "sup|V - id| < 100 eps": dV < 100 * eps,
        "max displacement < eps * M": max(dU, dV) < eps * M,
        "max displacement <= eps": max(dU, dV) <= eps,
        "M < 100": M < 100,
        "discreteness at L": disc.passed,
    }
    witnesses = [
        {"description": "generator displacements", "values": {"U": dU, "V": dV, "M": M}},
        {"description": "discreteness bound |A_0|/2", "values": {"bound": bound, "bound_over_eps": bound / eps}},
        {"description": "checks", "values": checks},
        {"description": "discreteness summary", "values": disc.summary},
    ]
    return Certificate.make(
        "pingpong.small_ball",
        inputs={"epsilon": frac(eps), "pair": pair.describe(), "L": L},
        witnesses=witnesses,
        passed=all(checks.values()),
        tolerances=[{"name": "displacement", "value": 0}],
        summary={"U": dU, "V": dV, "bound": bound},
    )


def breakpoints_csv(p: PLHomeo, path) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "value", "slope_right"])
        slopes = list(p.slopes) + [None]
        for x, y, s in zip(p.xs, p.ys, slopes):
            writer.writerow([frac(x), frac(y), "" if s is None else frac(s)])
