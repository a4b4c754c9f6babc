"""C^1 generators of the free group built interval by interval on a ladder.

Pair ``n`` of the enumeration owns the ladder interval
``I_n = (1/(2n+1), 1/(2n))``.  On ``I_n`` the two generators interpolate a
finite set of (point, image, derivative) constraints that force
``U_n'(x0) = (1+beta_n)^|U_n|`` and ``V_n'(x0) = (1+beta_n)^s_n`` at the
midpoint ``x0``.  Off the ladder both maps are the identity.
"""

from __future__ import annotations

import csv
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .schedule import BetaSchedule
from .words import Letter, ReducedWord, WordPair

INVERSE_TOL = 1e-14
INVERSE_MAX_ITER = 100
MAX_HALVINGS = 40
# minimum node separation, as a fraction of the spacing delta
MIN_SEPARATION = 1e-3
# width of the identity collars at both ends of each ladder interval
COLLAR_FRACTION = 1.0 / 8.0
# (log-slope exponent of f, of g, translation of g relative to f) tried in turn
_AFFINE_PARAMS = (
    (0.5, -1.0 / 3.0, -0.6180339887498949),
    (1.0 / 3.0, -0.5, 0.7548776662466927),
    (-0.5, 0.25, 1.3247179572447460),
    (0.4, 0.3, -1.4655712318767680),
    (-0.25, -0.6, 0.5698402909980532),
)


class InfeasibleConstruction(RuntimeError):
    """Orbit nodes could not be placed with admissible secant slopes."""


class ConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class Ladder:
    max_index: int

    def interval(self, n: int) -> tuple[float, float]:
        if not 1 <= n:
            raise ValueError("ladder indices start at 1")
        return 1.0 / (2 * n + 1), 1.0 / (2 * n)

    def midpoint(self, n: int) -> float:
        lo, hi = self.interval(n)
        return (lo + hi) / 2

    def width(self, n: int) -> float:
        lo, hi = self.interval(n)
        return hi - lo

    def index_of(self, x: float) -> int | None:
        """Ladder index whose open interval contains ``x``, if materialized."""
        if not 0 < x < 0.5:
            return None
        k = int(1.0 / x) // 2
        for n in (k - 1, k, k + 1):
            if 1 <= n <= self.max_index:
                lo, hi = self.interval(n)
                if lo < x < hi:
                    return n
        return None


def band(beta_n: float, n: int) -> tuple[float, float]:
    """Admissible derivative range on ``I_n``."""
    hi = 1.0 + beta_n + 1.0 / n
    return 1.0 / hi, hi


@dataclass(frozen=True)
class Constraint:
    x: float
    y: float
    d: float


@dataclass
class OrbitPlan:
    pair: WordPair
    beta: float
    delta: float
    nodes: list[tuple[str, float]]
    constraints: dict[str, list[Constraint]]
    scheme: dict = field(default_factory=dict)

    @property
    def x0(self) -> float:
        return self.nodes[0][1]

    def u_orbit(self) -> list[float]:
        return [x for label, x in self.nodes if label.startswith("U") or label == "x0"]

    def to_json(self) -> dict:
        return {
            "pair": [str(self.pair.U), str(self.pair.V)],
            "index": self.pair.index,
            "beta": self.beta,
            "delta": self.delta,
            "nodes": [[label, x] for label, x in self.nodes],
            "constraints": {
                gen: [[c.x, c.y, c.d] for c in cs] for gen, cs in self.constraints.items()
            },
            "scheme": self.scheme,
        }


def _affine_step(letter: Letter, x: float, x0: float, slopes: dict, shifts: dict) -> float:
    sigma, t = slopes[letter.generator], shifts[letter.generator]
    if letter.exponent > 0:
        return x0 + sigma * (x - x0) + t
    return x0 + (x - x0 - t) / sigma


def _collect(pair: WordPair, beta_n: float, x0: float, slopes: dict, shifts: dict):
    up = 1.0 + beta_n
    nodes: list[tuple[str, float]] = [("x0", x0)]
    cons: dict[str, list[Constraint]] = {"f": [], "g": []}

    def record(letter: Letter, src: float, dst: float, d: float) -> None:
        if letter.exponent > 0:
            cons[letter.generator].append(Constraint(src, dst, d))
        else:
            # h^-1(src) = dst  <=>  h(dst) = src, with h'(dst) = 1 / (h^-1)'(src)
            cons[letter.generator].append(Constraint(dst, src, 1.0 / d))

    xs = [x0]
    for k, letter in enumerate(pair.U.applied_order()):
        nxt = _affine_step(letter, xs[-1], x0, slopes, shifts)
        record(letter, xs[-1], nxt, up)
        xs.append(nxt)
        nodes.append((f"U{k + 1}", nxt))
    s = pair.s
    y = xs[s]
    v_letters = pair.V.applied_order()
    for k in range(s, len(v_letters)):
        letter = v_letters[k]
        nxt = _affine_step(letter, y, x0, slopes, shifts)
        record(letter, y, nxt, 1.0)
        y = nxt
        nodes.append((f"V{k + 1}", nxt))
    for gen in cons:
        cons[gen].sort(key=lambda c: c.x)
    return nodes, cons


def _min_gap(values: Sequence[float]) -> float:
    ordered = sorted(values)
    return min((b - a for a, b in zip(ordered, ordered[1:])), default=math.inf)


def plan_orbit(pair: WordPair, beta_n: float, ladder: Ladder) -> OrbitPlan:
    """Place the orbit nodes of ``U_n`` and ``V_n`` inside the middle half of ``I_n``.

    Near ``x0`` each generator acts on the nodes by a fixed affine map, so the
    constraint set of each generator is the graph of one increasing map and all
    secants between its nodes equal that map's slope.
    """
    n = pair.index
    if n > ladder.max_index:
        raise ValueError(f"pair index {n} exceeds ladder size {ladder.max_index}")
    lo, hi = ladder.interval(n)
    width = hi - lo
    x0 = (lo + hi) / 2
    stages = max(pair.r + (pair.m - pair.s), 1)
    delta0 = width / (8 * stages)
    b_lo, b_hi = band(beta_n, n)
    q = 1.0 + beta_n

    for p_f, p_g, t_ratio in _AFFINE_PARAMS:
        slopes = {"f": q**p_f, "g": q**p_g}
        delta = delta0
        for _ in range(MAX_HALVINGS + 1):
            shifts = {"f": delta, "g": t_ratio * delta}
            nodes, cons = _collect(pair, beta_n, x0, slopes, shifts)
            positions = [x for _, x in nodes]
            if _min_gap(positions) < MIN_SEPARATION * delta:
                break  # scale invariant: shrinking delta cannot help
            inside = all(lo + width / 4 <= x <= hi - width / 4 for x in positions)
            if inside and all(
                _knots_feasible(_interval_knots(lo, hi, cons[gen]), b_lo, b_hi)
                for gen in cons
                if cons[gen]
            ):
                _check_partial_injection(cons)
                scheme = {
                    "placement": "affine-local",
                    "slope_f": slopes["f"],
                    "slope_g": slopes["g"],
                    "shift_f": shifts["f"],
                    "shift_g": shifts["g"],
                    "collar_fraction": COLLAR_FRACTION,
                }
                return OrbitPlan(pair, beta_n, delta, nodes, cons, scheme)
            delta /= 2
    raise InfeasibleConstruction(f"cannot place orbit nodes for pair {n} {pair}")


def _check_partial_injection(cons: dict[str, list[Constraint]]) -> None:
    for gen, cs in cons.items():
        xs = [c.x for c in cs]
        ys = [c.y for c in cs]
        if len(set(xs)) != len(xs):
            raise InfeasibleConstruction(f"{gen} has two constraints at one point")
        if any(b <= a for a, b in zip(ys, ys[1:])):
            raise InfeasibleConstruction(f"{gen} constraints are not order preserving")


def _interval_knots(lo: float, hi: float, cons: Sequence[Constraint]) -> list[Constraint]:
    width = hi - lo
    a = lo + COLLAR_FRACTION * width
    b = hi - COLLAR_FRACTION * width
    return [Constraint(lo, lo, 1.0), Constraint(a, a, 1.0), *cons, Constraint(b, b, 1.0), Constraint(hi, hi, 1.0)]


def _knots_feasible(knots: Sequence[Constraint], b_lo: float, b_hi: float) -> bool:
    for k0, k1 in zip(knots, knots[1:]):
        if k1.x <= k0.x or k1.y <= k0.y:
            return False
        m = (k1.y - k0.y) / (k1.x - k0.x)
        if not b_lo < m < b_hi:
            return False
    return True


def _hermite_fits(m: float, d0: float, d1: float, b_lo: float, b_hi: float) -> bool:
    # derivative of a cubic Hermite piece has Bernstein coefficients (d0, 3m - d0 - d1, d1)
    mid = 3 * m - d0 - d1
    return b_lo <= mid <= b_hi


def _connector(k0: Constraint, k1: Constraint, b_lo: float, b_hi: float) -> list[Constraint]:
    """Intermediate knots so every cubic piece between ``k0`` and ``k1`` stays in band."""
    h = k1.x - k0.x
    m = (k1.y - k0.y) / h
    lam = 0.25
    for _ in range(60):
        m_star = (3 * m - lam * (k0.d + k1.d)) / (3 - 2 * lam)
        # keep the plateau slope strictly inside the band
        slack = 1e-3 * (b_hi - b_lo)
        if b_lo + slack < m_star < b_hi - slack or (
            b_lo < m_star < b_hi and lam < 1e-6
        ):
            a = k0.x + lam * h
            b = k1.x - lam * h
            ya = k0.y + lam * h * (k0.d + 2 * m_star) / 3
            yb = k1.y - lam * h * (k1.d + 2 * m_star) / 3
            return [Constraint(a, ya, m_star), Constraint(b, yb, m_star)]
        lam /= 2
    raise InfeasibleConstruction(f"secant {m} cannot be connected inside band [{b_lo}, {b_hi}]")


def interpolation_knots(lo: float, hi: float, cons: Sequence[Constraint], b_lo: float, b_hi: float) -> list[Constraint]:
    """Full knot list on ``[lo, hi]`` whose cubic Hermite pieces have derivative in band."""
    base = _interval_knots(lo, hi, cons)
    out = [base[0]]
    for k0, k1 in zip(base, base[1:]):
        m = (k1.y - k0.y) / (k1.x - k0.x)
        if not _hermite_fits(m, k0.d, k1.d, b_lo, b_hi):
            out.extend(_connector(k0, k1, b_lo, b_hi))
        out.append(k1)
    return out


class PiecewiseC1Map:
    """Global C^1 self-map of [0,1]: cubic Hermite pieces on the ladder, identity elsewhere."""

    def __init__(self, name: str, ladder: Ladder, knots: Sequence[Constraint], identity: Sequence[bool], bands: dict[int, tuple[float, float]] | None = None):
        self.name = name
        self.ladder = ladder
        self.xs = np.array([k.x for k in knots], dtype=float)
        self.ys = np.array([k.y for k in knots], dtype=float)
        self.ds = np.array([k.d for k in knots], dtype=float)
        self.identity = np.array(identity, dtype=bool)
        self.bands = dict(bands or {})
        h = np.diff(self.xs)
        m = np.diff(self.ys) / h
        d0, d1 = self.ds[:-1], self.ds[1:]
        self._h = h
        self._c1 = d0
        self._c2 = 3 * m - 2 * d0 - d1
        self._c3 = d0 + d1 - 2 * m

    @classmethod
    def identity_map(cls, name: str = "id", ladder: Ladder | None = None) -> "PiecewiseC1Map":
        return cls(name, ladder or Ladder(0), [Constraint(0.0, 0.0, 1.0), Constraint(1.0, 1.0, 1.0)], [True])

    @property
    def n_pieces(self) -> int:
        return len(self._h)

    def _locate(self, x: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.xs, x, side="right") - 1
        return np.clip(idx, 0, self.n_pieces - 1)

    def value(self, x) -> np.ndarray:
        x = _as_domain(x)
        i = self._locate(x)
        h = self._h[i]
        t = (x - self.xs[i]) / h
        val = self.ys[i] + h * t * (self._c1[i] + t * (self._c2[i] + t * self._c3[i]))
        return np.where(self.identity[i], x, val)

    def derivative(self, x) -> np.ndarray:
        x = _as_domain(x)
        i = self._locate(x)
        t = (x - self.xs[i]) / self._h[i]
        der = self._c1[i] + t * (2 * self._c2[i] + 3 * t * self._c3[i])
        return np.where(self.identity[i], 1.0, der)

    def inverse_value(self, y, tol: float = INVERSE_TOL) -> np.ndarray:
        """Monotone bisection inside the piece containing ``y``; knot images map back exactly."""
        y = _as_domain(y)
        i = np.clip(np.searchsorted(self.ys, y, side="right") - 1, 0, self.n_pieces - 1)
        x_lo = self.xs[i].copy()
        x_hi = self.xs[i + 1].copy()
        exact = (y == self.ys[i]) | self.identity[i]
        active = ~exact
        for _ in range(INVERSE_MAX_ITER):
            if not active.any():
                break
            mid = 0.5 * (x_lo + x_hi)
            stalled = (mid == x_lo) | (mid == x_hi)
            below = self._piece_value(i, mid) < y
            x_lo = np.where(active & below, mid, x_lo)
            x_hi = np.where(active & ~below, mid, x_hi)
            active = active & ~stalled & ((x_hi - x_lo) > tol)
        else:
            if active.any():
                raise ConvergenceError("inverse bisection did not converge")
        out = 0.5 * (x_lo + x_hi)
        out = np.where(self.identity[i], y, out)
        return np.where(y == self.ys[i], self.xs[i], out)

    def _piece_value(self, i: np.ndarray, x: np.ndarray) -> np.ndarray:
        h = self._h[i]
        t = (x - self.xs[i]) / h
        return self.ys[i] + h * t * (self._c1[i] + t * (self._c2[i] + t * self._c3[i]))

    def bernstein_ranges(self) -> tuple[np.ndarray, np.ndarray]:
        """Per piece (min, max) of the derivative's Bernstein coefficients."""
        m = np.diff(self.ys) / self._h
        d0, d1 = self.ds[:-1], self.ds[1:]
        mid = 3 * m - d0 - d1
        coeffs = np.stack([d0, mid, d1])
        lo = np.where(self.identity, 1.0, coeffs.min(axis=0))
        hi = np.where(self.identity, 1.0, coeffs.max(axis=0))
        return lo, hi


def _as_domain(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0) | (arr > 1)) or np.any(np.isnan(arr)):
        raise ValueError("points must lie in [0, 1]")
    return arr


def _scalar(a):
    return float(a) if np.ndim(a) == 0 else a


def eval(map_: PiecewiseC1Map, x):
    return _scalar(map_.value(x))


def deriv(map_: PiecewiseC1Map, x):
    return _scalar(map_.derivative(x))


def _pick(letter: Letter, f: PiecewiseC1Map, g: PiecewiseC1Map) -> PiecewiseC1Map:
    return f if letter.generator == "f" else g


def eval_word(w: ReducedWord, f: PiecewiseC1Map, g: PiecewiseC1Map, x):
    """Apply ``w`` right to left; inverse letters by bisection."""
    cur = _as_domain(x)
    for letter in w.applied_order():
        h = _pick(letter, f, g)
        cur = h.value(cur) if letter.exponent > 0 else h.inverse_value(cur)
    return _scalar(cur)


def word_orbit(w: ReducedWord, f: PiecewiseC1Map, g: PiecewiseC1Map, x: float) -> list[float]:
    cur = _as_domain(x)
    out = [float(cur)]
    for letter in w.applied_order():
        h = _pick(letter, f, g)
        cur = h.value(cur) if letter.exponent > 0 else h.inverse_value(cur)
        out.append(float(cur))
    return out


def deriv_word(w: ReducedWord, f: PiecewiseC1Map, g: PiecewiseC1Map, x):
    """Chain rule along the orbit of ``x``."""
    cur = _as_domain(x)
    acc = np.ones_like(cur)
    for letter in w.applied_order():
        h = _pick(letter, f, g)
        if letter.exponent > 0:
            acc = acc * h.derivative(cur)
            cur = h.value(cur)
        else:
            cur = h.inverse_value(cur)
            acc = acc / h.derivative(cur)
    return _scalar(acc)


def value_and_deriv_word(w: ReducedWord, f: PiecewiseC1Map, g: PiecewiseC1Map, x):
    cur = _as_domain(x)
    acc = np.ones_like(cur)
    for letter in w.applied_order():
        h = _pick(letter, f, g)
        if letter.exponent > 0:
            acc = acc * h.derivative(cur)
            cur = h.value(cur)
        else:
            cur = h.inverse_value(cur)
            acc = acc / h.derivative(cur)
    return _scalar(cur), _scalar(acc)


@dataclass
class Construction:
    """Generators together with the plans that produced them."""

    f: PiecewiseC1Map
    g: PiecewiseC1Map
    plans: list[OrbitPlan]
    schedule: BetaSchedule
    ladder: Ladder

    @property
    def pairs(self) -> list[WordPair]:
        return [p.pair for p in self.plans]


def build_generators(pairs: Sequence[WordPair], schedule: BetaSchedule, ladder: Ladder | None = None) -> Construction:
    pairs = list(pairs)
    ladder = ladder or Ladder(len(pairs))
    if len(pairs) > ladder.max_index:
        raise ValueError("more pairs than ladder intervals")
    plans = [plan_orbit(p, schedule(p.index), ladder) for p in pairs]
    f = _assemble("f", plans, ladder)
    g = _assemble("g", plans, ladder)
    return Construction(f, g, plans, schedule, ladder)


def build(count: int, C: float, margin: float = 0.01) -> Construction:
    schedule = BetaSchedule.build(count, C, margin)
    return build_generators(schedule.pairs, schedule, Ladder(max(count, 1)))


def _assemble(gen: str, plans: Sequence[OrbitPlan], ladder: Ladder) -> PiecewiseC1Map:
    knots: list[Constraint] = [Constraint(0.0, 0.0, 1.0)]
    identity: list[bool] = []
    bands: dict[int, tuple[float, float]] = {}
    for plan in sorted(plans, key=lambda p: -p.pair.index):
        n = plan.pair.index
        lo, hi = ladder.interval(n)
        b_lo, b_hi = band(plan.beta, n)
        bands[n] = (b_lo, b_hi)
        cons = plan.constraints[gen]
        local = interpolation_knots(lo, hi, cons, b_lo, b_hi) if cons else [Constraint(lo, lo, 1.0), Constraint(hi, hi, 1.0)]
        if local[0].x > knots[-1].x:
            identity.append(True)  # gap between ladder intervals
            knots.append(local[0])
        for k0, k1 in zip(local, local[1:]):
            identity.append(not cons or (k0.x == k0.y and k1.x == k1.y and k0.d == k1.d == 1.0))
            knots.append(k1)
    if knots[-1].x < 1.0:
        identity.append(True)
        knots.append(Constraint(1.0, 1.0, 1.0))
    return PiecewiseC1Map(gen, ladder, knots, identity, bands)


def sample_csv(construction: Construction, path: str | Path, points: int = 2001) -> Path:
    path = Path(path)
    xs = np.linspace(0.0, 1.0, points)
    extra = [p.x0 for p in construction.plans]
    xs = np.unique(np.concatenate([xs, extra]))
    f, g = construction.f, construction.g
    cols = (f.value(xs), f.derivative(xs), g.value(xs), g.derivative(xs))
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "f", "df", "g", "dg"])
        for row in zip(xs, *cols):
            writer.writerow([repr(float(v)) for v in row])
    return path
