import random

import numpy as np
import pytest

from discrete_f2 import diffeo
from discrete_f2.diffeo import Ladder, PiecewiseC1Map, band, plan_orbit
from discrete_f2.schedule import alpha
from discrete_f2.words import EMPTY, ReducedWord, make_pair, words_up_to

W = ReducedWord.parse


def test_ladder_geometry():
    lad = Ladder(10)
    assert lad.interval(3) == (1 / 7, 1 / 6)
    assert lad.midpoint(3) == (1 / 7 + 1 / 6) / 2
    for n in range(1, 10):
        assert lad.interval(n + 1)[1] < lad.interval(n)[0]
    assert lad.index_of(lad.midpoint(4)) == 4
    assert lad.index_of(0.75) is None
    with pytest.raises(ValueError):
        lad.interval(0)


def test_plan_single_letter():
    pair = make_pair(W("f"), EMPTY, 1)
    b = alpha(1, 1.5)
    plan = plan_orbit(pair, b, Ladder(1))
    x0 = Ladder(1).midpoint(1)
    assert plan.nodes[0] == ("x0", x0)
    assert len(plan.nodes) == 2
    assert plan.nodes[1][1] == pytest.approx(x0 + plan.delta, rel=1e-15)
    (c,) = plan.constraints["f"]
    assert (c.x, c.d) == (x0, 1 + b) and c.y == pytest.approx(x0 + plan.delta, rel=1e-15)
    assert plan.constraints["g"] == []


def test_plan_shares_common_suffix():
    pair = make_pair(W("gfg"), W("fg"), 7)
    plan = plan_orbit(pair, alpha(3, 1.5), Ladder(7))
    assert [label for label, _ in plan.nodes] == ["x0", "U1", "U2", "U3"]
    assert sum(len(c) for c in plan.constraints.values()) == 3


def test_plan_branching_pair():
    pair = make_pair(W("fg"), W("gg"), 5)
    b = alpha(2, 1.5)
    lad = Ladder(5)
    plan = plan_orbit(pair, b, lad)
    labels = [label for label, _ in plan.nodes]
    assert labels == ["x0", "U1", "U2", "V2"]
    pos = dict(plan.nodes)
    g_cons = {c.x: c for c in plan.constraints["g"]}
    f_cons = {c.x: c for c in plan.constraints["f"]}
    assert g_cons[pos["x0"]].d == 1 + b  # shared first letter g, on U's schedule
    assert f_cons[pos["U1"]].d == 1 + b
    assert g_cons[pos["U1"]].d == 1.0
    lo, hi = lad.interval(5)
    b_lo, b_hi = band(b, 5)
    for cs in plan.constraints.values():
        assert all(b_lo <= c.d <= b_hi for c in cs)
        ys = [c.y for c in cs]
        assert ys == sorted(ys)
    assert all(lo + (hi - lo) / 4 <= x <= hi - (hi - lo) / 4 for x in pos.values())


def test_plan_rejects_index_beyond_ladder():
    with pytest.raises(ValueError):
        plan_orbit(make_pair(W("f"), EMPTY, 3), 1.0, Ladder(2))


def test_empty_build_is_identity():
    c = diffeo.build(0, 1.5)
    xs = np.linspace(0, 1, 101)
    assert np.array_equal(c.f.value(xs), xs)
    assert np.array_equal(c.g.derivative(xs), np.ones_like(xs))


def test_identity_map_eval():
    ident = PiecewiseC1Map.identity_map()
    assert diffeo.eval(ident, 0.37) == 0.37
    assert diffeo.deriv(ident, 0.37) == 1.0


def test_domain_violation():
    c = diffeo.build(3, 1.5)
    with pytest.raises(ValueError):
        diffeo.eval(c.f, 1.2)
    with pytest.raises(ValueError):
        diffeo.deriv(c.g, -0.1)


def test_endpoints_and_ladder_fixed(thm1_200):
    f, g = thm1_200.f, thm1_200.g
    for h in (f, g):
        assert diffeo.eval(h, 0.0) == 0.0 and diffeo.eval(h, 1.0) == 1.0
        assert diffeo.deriv(h, 0.0) == 1.0
        for n in (1, 2, 50, 200):
            lo, hi = thm1_200.ladder.interval(n)
            assert diffeo.eval(h, hi) == hi and diffeo.eval(h, lo) == lo
            assert diffeo.deriv(h, hi) == 1.0 and diffeo.deriv(h, lo) == 1.0


def test_generator_derivative_at_x0_for_single_letter_pair(thm1_200):
    plan = thm1_200.plans[0]
    assert str(plan.pair.U) == "f"
    assert diffeo.deriv(thm1_200.f, plan.x0) == 1 + plan.beta


def test_word_orbit_follows_plan(thm1_200):
    c = thm1_200
    for plan in c.plans[::9]:
        orbit = diffeo.word_orbit(plan.pair.U, c.f, c.g, plan.x0)
        assert orbit == pytest.approx(plan.u_orbit(), abs=1e-13)


def test_inverse_round_trip(thm1_200):
    c = thm1_200
    xs = np.random.default_rng(1).uniform(0, 0.5, 20000)
    for w in ("fF", "Ff", "gG", "Gg"):
        assert np.max(np.abs(diffeo.eval_word(W(w), c.f, c.g, xs) - xs)) < 1e-12
    assert diffeo.eval_word(EMPTY, c.f, c.g, 0.3) == 0.3
    assert diffeo.deriv_word(EMPTY, c.f, c.g, 0.3) == 1.0


def test_chain_rule_at_x0(thm1_200):
    c = thm1_200
    for plan in c.plans:
        p, q = plan.pair, 1 + plan.beta
        assert diffeo.deriv_word(p.U, c.f, c.g, plan.x0) == pytest.approx(q**p.r, rel=1e-9)
        assert diffeo.deriv_word(p.V, c.f, c.g, plan.x0) == pytest.approx(q**p.s, rel=1e-9)


def test_monotone_on_global_grid(thm1_200):
    xs = np.linspace(0, 1, 10**4)
    for h in (thm1_200.f, thm1_200.g):
        assert np.all(np.diff(h.value(xs)) > 0)


def test_derivative_band_on_interval_grids(thm1_200):
    c = thm1_200
    for plan in c.plans:
        n = plan.pair.index
        lo, hi = c.ladder.interval(n)
        b_lo, b_hi = band(plan.beta, n)
        xs = np.linspace(lo, hi, 1000)
        for h in (c.f, c.g):
            d = h.derivative(xs)
            assert d.min() >= b_lo - 1e-9 and d.max() <= b_hi + 1e-9


def test_bernstein_coefficients_in_band(thm1_200):
    c = thm1_200
    for h in (c.f, c.g):
        lo, hi = h.bernstein_ranges()
        assert lo.min() > 0
        for n, (b_lo, b_hi) in h.bands.items():
            a, b = c.ladder.interval(n)
            inside = (h.xs[:-1] >= a) & (h.xs[1:] <= b)
            assert lo[inside].min() >= b_lo - 1e-12 and hi[inside].max() <= b_hi + 1e-12


def test_seams_have_unit_derivative(thm1_200):
    c = thm1_200
    checked = 0
    for n in range(1, 201):
        lo, hi = c.ladder.interval(n)
        # one-sided limits: offsets that stay within the seam neighbourhood
        reach = min(hi - lo, c.ladder.width(n + 1)) * diffeo.COLLAR_FRACTION
        for end in (lo, hi):
            for k in range(4, 9):
                if 10.0**-k >= reach:
                    continue
                for x in (end - 10.0**-k, end + 10.0**-k):
                    for h in (c.f, c.g):
                        assert abs(diffeo.deriv(h, x) - 1) < 1e-9
                        checked += 1
    assert checked > 3000


def test_inverse_moves_points(thm1_200):
    y = np.random.default_rng(2).uniform(0.3, 0.5, 1000)
    x = thm1_200.f.inverse_value(y)
    assert np.max(np.abs(x - y)) > 1e-3
    assert np.max(np.abs(thm1_200.f.value(x) - y)) < 1e-13


def test_finite_differences_small_sample(thm1_200):
    c = thm1_200
    rng = random.Random(7)
    words = words_up_to(3)
    for _ in range(20):
        w = rng.choice(words)
        x = rng.uniform(0.01, 0.49)
        h = 1e-7
        fd = (diffeo.eval_word(w, c.f, c.g, x + h) - diffeo.eval_word(w, c.f, c.g, x - h)) / (2 * h)
        assert fd == pytest.approx(diffeo.deriv_word(w, c.f, c.g, x), rel=1e-5)


def test_finite_differences_scaled_step_deep_ladder(thm1_200):
    # steps scaled to the local piece width reach every ladder interval
    c = thm1_200
    rng = random.Random(11)
    words = words_up_to(4)
    for _ in range(300):
        w = rng.choice(words)
        x = rng.uniform(1 / 401, 0.5)
        width = min(
            np.diff(m.xs)[min(np.searchsorted(m.xs, y) - 1, m.n_pieces - 1)]
            for y in diffeo.word_orbit(w, c.f, c.g, x)
            for m in (c.f, c.g)
        )
        h = width * 1e-3
        fd = (diffeo.eval_word(w, c.f, c.g, x + h) - diffeo.eval_word(w, c.f, c.g, x - h)) / (2 * h)
        assert fd == pytest.approx(diffeo.deriv_word(w, c.f, c.g, x), rel=1e-3)


def test_faithfulness_witness_up_to_length_3():
    c = diffeo.build(364, 1.5)
    by_pair = {(str(p.pair.U), str(p.pair.V)): p for p in c.plans}
    for U in words_up_to(3):
        plan = by_pair[(str(U), "1")]
        d = diffeo.deriv_word(U, c.f, c.g, plan.x0)
        assert d == pytest.approx((1 + plan.beta) ** len(U), rel=1e-9)
        assert d != 1.0


def test_sample_csv(tmp_path, thm1_200):
    path = diffeo.sample_csv(thm1_200, tmp_path / "s.csv", 101)
    rows = path.read_text().splitlines()
    assert rows[0] == "x,f,df,g,dg"
    assert len(rows) > 101


def test_plan_json_export(thm1_200):
    d = thm1_200.plans[4].to_json()
    assert d["pair"] == ["f", "f"] and d["scheme"]["placement"] == "affine-local"
