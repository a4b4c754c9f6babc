"""Norms, discreteness checkers and the derivative obstruction report.

Every certificate produced here can be reproduced from its ``inputs`` alone
through :data:`REPRODUCERS`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from . import diffeo
from .certificate import Certificate, frac
from .diffeo import Construction, PiecewiseC1Map
from .pingpong import (
    AdmissibleWordPair,
    IntervalChain,
    PingPongSystem,
    PLHomeo,
    build_chain,
    compose,
    discreteness_certificate,
    expand_word,
    length,
    lipschitz_certificate,
    parse_rational,
    small_ball_certificate,
    verify_conditions,
)
from .words import EMPTY, Letter, ReducedWord, words_up_to

DEFAULT_GRID = 10**4
OBSTRUCTION_TOL = 1e-12


# ---------------------------------------------------------------- word maps


@dataclass
class C1WordMap:
    """A word in the C^1 generators, evaluated numerically."""

    word: ReducedWord
    f: PiecewiseC1Map
    g: PiecewiseC1Map
    extra_points: tuple[float, ...] = ()

    def value(self, x) -> np.ndarray:
        return np.asarray(diffeo.eval_word(self.word, self.f, self.g, x), dtype=float)

    def derivative(self, x) -> np.ndarray:
        return np.asarray(diffeo.deriv_word(self.word, self.f, self.g, x), dtype=float)


def _grid(map_, grid_size: int) -> np.ndarray:
    xs = np.linspace(0.0, 1.0, grid_size)
    extra = getattr(map_, "extra_points", ())
    if len(extra):
        xs = np.unique(np.concatenate([xs, np.asarray(extra, dtype=float)]))
    return xs


def displacement_norm(map_, grid_size: int = DEFAULT_GRID):
    """``sup |W(x) - x|``: exact for PL maps, a grid lower bound otherwise."""
    if isinstance(map_, PLHomeo):
        return max(abs(y - x) for x, y in zip(map_.xs, map_.ys))
    xs = _grid(map_, grid_size)
    return float(np.max(np.abs(map_.value(xs) - xs)))


def derivative_deviation_norm(map_, grid_size: int = DEFAULT_GRID):
    """``sup |W'(x) - 1|``: exact slope deviation for PL maps, a grid lower bound otherwise."""
    if isinstance(map_, PLHomeo):
        return max(abs(s - 1) for s in map_.slopes)
    xs = _grid(map_, grid_size)
    return float(np.max(np.abs(map_.derivative(xs) - 1.0)))


# ------------------------------------------------------------------ actions


class C1Action:
    """The C^1 representation of F_2 built along the pair enumeration."""

    def __init__(self, construction: Construction, C: float, margin: float):
        self.construction = construction
        self.C = C
        self.margin = margin

    @classmethod
    def build(cls, pairs: int, C: float, margin: float = 0.01) -> "C1Action":
        return cls(diffeo.build(pairs, C, margin), C, margin)

    def describe(self) -> dict:
        return {"kind": "c1", "C": self.C, "margin": self.margin, "pairs": len(self.construction.plans)}

    @property
    def default_x0(self) -> float:
        return self.construction.ladder.midpoint(1)

    @property
    def constraint_points(self) -> tuple[float, ...]:
        pts = {x for plan in self.construction.plans for _, x in plan.nodes}
        return tuple(sorted(pts))

    def displacement(self, w: ReducedWord, x0) -> float:
        return abs(float(diffeo.eval_word(w, self.construction.f, self.construction.g, float(x0))) - float(x0))

    def word_maps(self, words: Sequence[ReducedWord]) -> list[C1WordMap]:
        c = self.construction
        pts = self.constraint_points
        return [C1WordMap(w, c.f, c.g, pts) for w in words]


class PLAction:
    """Exact PL action; with a word pair it represents ``<U, V>`` via ``f -> U, g -> V``."""

    def __init__(self, system: PingPongSystem, pair: AdmissibleWordPair | None = None):
        self.system = system
        self.pair = pair

    @classmethod
    def build(cls, chain: IntervalChain, pair: AdmissibleWordPair | None = None) -> "PLAction":
        return cls(PingPongSystem.build(chain), pair)

    def describe(self) -> dict:
        out: dict = {"kind": "pl", "chain": self.system.chain.describe()}
        if self.pair is not None:
            out["pair"] = self.pair.describe()
        return out

    @property
    def default_x0(self) -> Fraction:
        return self.system.x0

    def _expand(self, w: ReducedWord) -> ReducedWord:
        return w if self.pair is None else expand_word(w, self.pair)

    def displacement(self, w: ReducedWord, x0) -> Fraction:
        x0 = Fraction(x0)
        return abs(self.system.evaluate(self._expand(w), x0) - x0)

    def word_maps(self, words: Sequence[ReducedWord]) -> list[PLHomeo]:
        """Exact maps; each word reuses the map of its suffix after the first letter."""
        gens = {
            letter: self.system.word_map(self._expand(ReducedWord((letter,))))
            for letter in (Letter.f, Letter.F, Letter.g, Letter.G)
        }
        cache: dict[ReducedWord, PLHomeo] = {EMPTY: PLHomeo.identity()}

        def get(w: ReducedWord) -> PLHomeo:
            if w not in cache:
                cache[w] = compose(gens[w.letters[0]], get(ReducedWord(w.letters[1:])))
            return cache[w]

        return [get(w) for w in words]


def action_from_description(d: Mapping):
    if d["kind"] == "c1":
        return C1Action.build(int(d["pairs"]), float(d["C"]), float(d["margin"]))
    if d["kind"] == "pl":
        chain = IntervalChain.from_description(d["chain"])
        pair = AdmissibleWordPair.parse(*d["pair"]) if "pair" in d else None
        return PLAction.build(chain, pair)
    raise ValueError(f"unknown action kind {d['kind']!r}")


def _num(x):
    return x if isinstance(x, Fraction) else float(x)


# ----------------------------------------------------------- discreteness


def uniform_discreteness_certificate(construction: Construction, C: float, margin: float | None = None) -> Certificate:
    """Witness ``t = x0^n`` with ``|U_n'(t) - V_n'(t)| > C`` for every pair with ``U_n != V_n``."""
    f, g = construction.f, construction.g
    witnesses = []
    failures = 0
    gaps = []
    skipped = 0
    for plan in construction.plans:
        pair = plan.pair
        if not pair.distinct:
            skipped += 1
            continue
        t = plan.x0
        du = float(diffeo.deriv_word(pair.U, f, g, t))
        dv = float(diffeo.deriv_word(pair.V, f, g, t))
        gap = abs(du - dv)
        ok = gap > C
        failures += not ok
        gaps.append(gap)
        witnesses.append(
            {
                "description": f"pair {pair.index}: U = {pair.U}, V = {pair.V}",
                "values": {"t": t, "dU": du, "dV": dv, "gap": gap, "beta": plan.beta, "ok": ok},
            }
        )
    if skipped:
        witnesses.append({"description": "pairs with U = V name one group element and carry no gap", "values": {"count": skipped}})
    margin = construction.schedule.alphas.margin if margin is None else margin
    return Certificate.make(
        "thm1.uniform_discreteness",
        inputs={"C": C, "margin": margin, "pairs": len(construction.plans)},
        witnesses=witnesses,
        passed=failures == 0,
        tolerances=[{"name": "derivative", "value": "float64 chain rule"}],
        summary={"checked": len(gaps), "skipped_equal": skipped, "min_gap": min(gaps) if gaps else None},
    )


def strong_discreteness_certificate(action, x0=None, C=Fraction(1, 20), L: int = 4) -> Certificate:
    """Pass iff ``|W(x0) - x0| > C`` for every nontrivial reduced ``W`` with ``|W| <= L``."""
    x0 = action.default_x0 if x0 is None else x0
    exact = isinstance(action, PLAction)
    C = parse_rational(C) if exact else float(Fraction(C) if isinstance(C, str) else C)
    witnesses = []
    failures = 0
    min_disp = None
    for w in words_up_to(L):
        disp = action.displacement(w, x0)
        ok = disp > C
        failures += not ok
        min_disp = disp if min_disp is None else min(min_disp, disp)
        witnesses.append({"description": f"W = {w}", "values": {"displacement": disp, "ok": ok}})
    return Certificate.make(
        "discreteness.strong",
        inputs={"action": action.describe(), "x0": _num(x0), "C": C, "L": L},
        witnesses=witnesses,
        passed=failures == 0,
        tolerances=[{"name": "displacement", "value": 0 if exact else "float64"}],
        summary={"words": len(witnesses), "min_displacement": min_disp},
    )


def norm0_discreteness_certificate(action, C=Fraction(1, 20), L: int = 4, grid: int = DEFAULT_GRID) -> Certificate:
    """Pass iff ``||W||_0 > C`` for every nontrivial reduced ``W`` with ``|W| <= L``."""
    exact = isinstance(action, PLAction)
    C = parse_rational(C) if exact else float(Fraction(C) if isinstance(C, str) else C)
    words = words_up_to(L)
    maps = action.word_maps(words)
    witnesses = []
    failures = 0
    min_norm = None
    for w, m in zip(words, maps):
        value = displacement_norm(m, grid)
        ok = value > C
        failures += not ok
        min_norm = value if min_norm is None else min(min_norm, value)
        witnesses.append({"description": f"W = {w}", "values": {"norm0": value, "ok": ok}})
    return Certificate.make(
        "discreteness.norm0",
        inputs={"action": action.describe(), "C": C, "L": L, "grid": grid},
        witnesses=witnesses,
        passed=failures == 0,
        tolerances=[{"name": "sup", "value": "exact" if exact else f"grid lower bound, {grid} points"}],
        summary={"words": len(words), "min_norm0": min_norm},
    )


# -------------------------------------------------------------- obstruction


def _to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(str(x))


@dataclass(frozen=True)
class ObstructionParams:
    """Derivative limit ``p`` of ``f`` at ``1-`` and brackets ``p1 < p < p2``."""

    p: Fraction
    p1: Fraction
    p2: Fraction
    power_count: int = 3

    def __post_init__(self) -> None:
        for name in ("p", "p1", "p2"):
            object.__setattr__(self, name, _to_fraction(getattr(self, name)))
        if self.power_count not in (2, 3):
            raise ValueError("power_count must be 2 or 3")
        if not (self.p > 0 and self.p1 > 0 and self.p2 > 0):
            raise ValueError("p, p1, p2 must be positive")
        if self.p1 >= self.p2:
            raise ValueError("p1 must be smaller than p2")
        if not self.p1 < self.p < self.p2:
            raise ValueError("p must lie strictly between p1 and p2")
        if self.p1 < Fraction(99, 100) * self.p or self.p2 > Fraction(101, 100) * self.p:
            raise ValueError("brackets must satisfy p1 >= 99p/100 and p2 <= 101p/100")

    def describe(self) -> dict:
        return {"p": self.p, "p1": self.p1, "p2": self.p2, "power_count": self.power_count}


def power_sums(p1, p2, power_count: int) -> tuple[Fraction, Fraction]:
    """``S1 = sum p1^k`` and ``S2 = sum p2^-k`` for ``k = 1..power_count``."""
    p1, p2 = _to_fraction(p1), _to_fraction(p2)
    ks = range(1, power_count + 1)
    return sum(p1**k for k in ks), sum(p2 ** (-k) for k in ks)


def obstruction_bound(p1, p2, power_count: int) -> Fraction:
    """``1 / sum (p1/p2)^k``, an upper bound for ``(1/S2)(1/S1)``."""
    if power_count < 1:
        raise ValueError("power_count must be positive")
    q = _to_fraction(p1) / _to_fraction(p2)
    return 1 / sum(q**k for k in range(1, power_count + 1))


def obstruction_report(params: ObstructionParams, chain: IntervalChain | None = None, n_range: Sequence[int] = range(1, 6)) -> Certificate:
    """Mean Value Theorem bound that rules out C^1 generators for the chain conditions."""
    chain = chain or build_chain("default")
    S1, S2 = power_sums(params.p1, params.p2, params.power_count)
    g_bound = 1 / S2
    ginv_bound = 1 / S1
    product = g_bound * ginv_bound
    bound = obstruction_bound(params.p1, params.p2, params.power_count)
    witnesses = []
    for n in n_range:
        A, B = chain.blocks(n)
        fwd = length(chain.A(n + 1)) / length(B)
        bwd = length(A) / length(B)
        witnesses.append(
            {
                "description": f"block {n}: MVT points u_n, v_n in B_{n}",
                "values": {
                    "g'(u_n) <": float(g_bound),
                    "(g^-1)'(v_n) <": float(ginv_bound),
                    "|A_n+1|/|B_n|": fwd,
                    "|A_n|/|B_n|": bwd,
                    "chain ratios below bounds": fwd < g_bound and bwd < ginv_bound,
                },
            }
        )
    product_ok = float(product) <= float(bound) + OBSTRUCTION_TOL
    established = float(bound) < 1 - OBSTRUCTION_TOL and product_ok
    values = {
        "S1": float(S1),
        "S2": float(S2),
        "product": float(product),
        "bound": float(bound),
        "product <= bound": product_ok,
        "bound < 1": established,
    }
    if params.power_count == 3 and params.p1 / params.p2 >= Fraction(98, 101):
        values["bound < 1/2"] = float(bound) < 0.5 - OBSTRUCTION_TOL
    witnesses.append({"description": "limit of g' times limit of (g^-1)' must equal 1", "values": values})
    return Certificate.make(
        "obstruction",
        inputs={**params.describe(), "chain": chain.describe(), "n_range": list(n_range)},
        witnesses=witnesses,
        passed=established,
        tolerances=[{"name": "arithmetic", "value": OBSTRUCTION_TOL}],
        summary={"bound": float(bound), "power_count": params.power_count},
    )


# -------------------------------------------------------------- reproducers


def _pair_from(inputs: Mapping) -> AdmissibleWordPair:
    return AdmissibleWordPair.parse(*inputs["pair"])


def _reproduce_uniform(inputs: Mapping) -> Certificate:
    C, margin, pairs = float(inputs["C"]), float(inputs["margin"]), int(inputs["pairs"])
    return uniform_discreteness_certificate(diffeo.build(pairs, C, margin), C, margin)


def _reproduce_conditions(inputs: Mapping) -> Certificate:
    chain = IntervalChain.from_description(inputs["chain"])
    system = PingPongSystem.build(chain)
    return verify_conditions(system.f, system.g, chain, inputs["powers"], inputs["epsilon"])


def _reproduce_discreteness(inputs: Mapping) -> Certificate:
    chain = IntervalChain.from_description(inputs["chain"])
    system = PingPongSystem.build(chain)
    return discreteness_certificate(_pair_from(inputs), system.f, system.g, chain, int(inputs["L"]))


def _reproduce_lipschitz(inputs: Mapping) -> Certificate:
    chain = IntervalChain.from_description(inputs["chain"])
    system = PingPongSystem.build(chain)
    return lipschitz_certificate(system.g, chain, int(inputs["tail_from"]), parse_rational(inputs["bound"]))


def _reproduce_small_ball(inputs: Mapping) -> Certificate:
    return small_ball_certificate(inputs["epsilon"], _pair_from(inputs), int(inputs["L"]))


def _reproduce_strong(inputs: Mapping) -> Certificate:
    action = action_from_description(inputs["action"])
    x0 = parse_rational(inputs["x0"]) if isinstance(action, PLAction) else float(inputs["x0"])
    return strong_discreteness_certificate(action, x0, inputs["C"], int(inputs["L"]))


def _reproduce_norm0(inputs: Mapping) -> Certificate:
    action = action_from_description(inputs["action"])
    return norm0_discreteness_certificate(action, inputs["C"], int(inputs["L"]), int(inputs["grid"]))


def _reproduce_obstruction(inputs: Mapping) -> Certificate:
    params = ObstructionParams(inputs["p"], inputs["p1"], inputs["p2"], int(inputs["power_count"]))
    chain = IntervalChain.from_description(inputs["chain"])
    return obstruction_report(params, chain, [int(n) for n in inputs["n_range"]])


REPRODUCERS: dict[str, Callable[[Mapping], Certificate]] = {
    "thm1.uniform_discreteness": _reproduce_uniform,
    "pingpong.conditions": _reproduce_conditions,
    "pingpong.discreteness": _reproduce_discreteness,
    "pingpong.lipschitz": _reproduce_lipschitz,
    "pingpong.small_ball": _reproduce_small_ball,
    "discreteness.strong": _reproduce_strong,
    "discreteness.norm0": _reproduce_norm0,
    "obstruction": _reproduce_obstruction,
}


class UnknownClaim(KeyError):
    pass


def reproduce(cert: Certificate) -> Certificate:
    try:
        producer = REPRODUCERS[cert.claim_id]
    except KeyError:
        raise UnknownClaim(cert.claim_id) from None
    return producer(cert.inputs)


def revalidate(cert: Certificate) -> tuple[bool, Certificate]:
    """Rerun the producer on the stored inputs; True iff everything but the timestamp matches."""
    fresh = reproduce(cert)
    stored = json.loads(json.dumps(cert.content(), sort_keys=True))
    again = json.loads(json.dumps(fresh.content(), sort_keys=True))
    return stored == again, fresh
