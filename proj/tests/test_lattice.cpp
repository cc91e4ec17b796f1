#include <doctest.h>

#include <cmath>
#include <vector>

#include "binlat/errors.hpp"
#include "binlat/lattice.hpp"

using namespace binlat;

namespace {

// exact integer binomial coefficients, n small
double binom(int n, int k) {
  double c = 1;
  for (int i = 0; i < k; ++i) c = c * (n - i) / (i + 1);
  return c;
}

}  // namespace

TEST_CASE("time grids validate and report uniformity") {
  const TimeGrid g = uniform_grid(1.0, 4);
  CHECK(g.steps() == 4);
  CHECK(g.maturity() == 1.0);
  CHECK(g.dt(2) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(g.is_uniform());

  const TimeGrid e = explicit_grid({0.0, 0.1, 0.4, 1.0});
  CHECK_FALSE(e.is_uniform());
  CHECK(e.dt(1) == doctest::Approx(0.3).epsilon(1e-12));

  CHECK_THROWS_AS(uniform_grid(0.0, 4), ValidationError);
  CHECK_THROWS_AS(uniform_grid(1.0, 0), ValidationError);
  CHECK_THROWS_AS(explicit_grid({0.0}), ValidationError);
  CHECK_THROWS_AS(explicit_grid({0.1, 0.2}), ValidationError);
  CHECK_THROWS_AS(explicit_grid({0.0, 0.2, 0.2}), ValidationError);
}

TEST_CASE("branch exponents take their closed-form values") {
  const MarketParams params{0.1, 0.2, 0.03};
  const OneStepMove mv = raw_step_move(params, 0.6, 0.01);
  // frozen from an independent evaluation of the closed forms
  CHECK(mv.up_log == doctest::Approx(0.017196598285221187).epsilon(1e-15));
  CHECK(mv.down_log == doctest::Approx(-0.023794897427831783).epsilon(1e-15));
  CHECK(mv.m1 == doctest::Approx(mv.up_log - 0.1 * 0.01).epsilon(1e-12));
  CHECK(mv.p == 0.6);

  CHECK_THROWS_AS(raw_step_move(params, 0.0, 0.01), ValidationError);
  CHECK_THROWS_AS(raw_step_move(params, 1.0, 0.01), ValidationError);
  CHECK_THROWS_AS(raw_step_move(params, 0.5, 0.0), ValidationError);
  CHECK_THROWS_AS(raw_step_move({0.1, 0.0, 0.03}, 0.5, 0.01), ValidationError);
}

TEST_CASE("two-point moments hit the mean exactly and the variance up to the remainder") {
  const MarketParams params{0.1, 0.2, 0.03};
  for (const double p : {0.05, 0.3, 0.5, 0.6, 0.95}) {
    for (const double dt : {1.0 / 252.0, 0.01, 0.1}) {
      const OneStepMove mv = raw_step_move(params, p, dt);
      const StepMoments sm = step_moment_check(mv, params, dt);
      CHECK(sm.mean == doctest::Approx(sm.mean_target).epsilon(1e-10));
      CHECK(sm.variance ==
            doctest::Approx(sm.variance_target + sm.variance_remainder).epsilon(1e-9));
    }
  }
  // the remainder vanishes at p = 1/2: the two-point variance is sigma^2 dt on the nose
  const StepMoments half = step_moment_check(raw_step_move(params, 0.5, 0.01), params, 0.01);
  CHECK(half.variance_remainder == 0.0);
  CHECK(half.variance == doctest::Approx(half.variance_target).epsilon(1e-14));
  // frozen spot value at p = 0.6, dt = 0.01
  const StepMoments skew = step_moment_check(raw_step_move(params, 0.6, 0.01), params, 0.01);
  CHECK(skew.variance == doctest::Approx(0.00040327265299037752).epsilon(1e-14));
  CHECK(skew.mean == doctest::Approx(0.0008).epsilon(1e-10));
}

TEST_CASE("exact risk-neutral probability makes the one-step tree a martingale") {
  const MarketParams params{0.1, 0.2, 0.03};
  const OneStepMove mv = raw_step_move(params, 0.6, 0.01);
  CHECK(mv.q_exact == doctest::Approx(0.58283062897026072).epsilon(1e-14));
  const double grown = mv.q_exact * std::exp(mv.up_log) +
                       (1.0 - mv.q_exact) * std::exp(mv.down_log);
  CHECK(grown == doctest::Approx(std::exp(params.r * 0.01)).epsilon(1e-15));

  // the identity holds across the parameter box, not just at one point
  for (const double p : {0.1, 0.4, 0.7, 0.9}) {
    for (const double dt : {1.0 / 252.0, 0.05}) {
      const OneStepMove m = raw_step_move(params, p, dt);
      const double g = m.q_exact * std::exp(m.up_log) + (1.0 - m.q_exact) * std::exp(m.down_log);
      CHECK(g == doctest::Approx(std::exp(params.r * dt)).epsilon(1e-14));
    }
  }
}

TEST_CASE("approximate risk-neutral probability is the drift-normalized shift") {
  // theta = (0.23 - 0.03) / 0.2 = 1, so q = 1/2 - sqrt(1/4 * 0.01) = 0.45 exactly
  const MarketParams params{0.23, 0.2, 0.03};
  const OneStepMove mv = raw_step_move(params, 0.5, 0.01);
  CHECK(mv.q_approx == 0.45);
  CHECK(params.theta() == 1.0);
}

TEST_CASE("q range policy either throws or clamps") {
  const MarketParams wild{3.0, 0.2, 0.0};  // theta = 15, q_approx = -0.25 at dt = 0.01
  CHECK_THROWS_AS(one_step_move(wild, 0.5, 0.01, QPolicy::strict, 7), ArbitrageError);
  try {
    one_step_move(wild, 0.5, 0.01, QPolicy::strict, 7);
  } catch (const ArbitrageError& e) {
    CHECK(e.step == 7);
    CHECK(e.q < 0.0);
    CHECK(std::string(e.what()).find("step 7") != std::string::npos);
  }
  const OneStepMove mv = one_step_move(wild, 0.5, 0.01, QPolicy::clamp, 7);
  CHECK(mv.clamped);
  CHECK(mv.q_approx == 1e-12);
  CHECK(mv.q_exact > 0.0);
}

TEST_CASE("exact delta replicates the payoff spread") {
  const MarketParams params{0.1, 0.2, 0.03};
  const double dt = 0.02;
  const double spot = 87.5;
  const OneStepMove mv = raw_step_move(params, 0.55, dt);
  const double s_up = spot * std::exp(mv.up_log);
  const double s_dn = spot * std::exp(mv.down_log);
  const double f_up = 12.25, f_dn = 3.75;
  const double d = delta_position(f_up, f_dn, spot, params, mv, dt, DeltaMode::exact);
  CHECK(d * (s_up - s_dn) == doctest::Approx(f_up - f_dn).epsilon(1e-14));
  // O(sqrt(dt)) agreement between the exact and normalized forms
  const double da = delta_position(f_up, f_dn, spot, params, mv, dt, DeltaMode::approx);
  CHECK(da == doctest::Approx(d).epsilon(0.05));
  CHECK_THROWS_AS(delta_position(f_up, f_dn, 0.0, params, mv, dt), ValidationError);
}

TEST_CASE("constant-move lattices recombine and expose binomial nodes") {
  const MarketParams params{0.08, 0.2, 0.02};
  const Lattice lat = Lattice::build(uniform_grid(1.0, 6), params, UpturnModel{0.55, 0, 0},
                                     100.0, Measure::natural);
  CHECK(lat.recombining());
  CHECK(lat.level_size(6) == 7);
  CHECK(lat.step_prob(3) == 0.55);
  const OneStepMove& mv = lat.moves()[0];
  for (int j = 0; j <= 6; ++j) {
    const double expected = 100.0 * std::exp(j * mv.up_log + (6 - j) * mv.down_log);
    CHECK(lat.node(6, j) == doctest::Approx(expected).epsilon(1e-14));
  }
  const Eigen::ArrayXd lv = lat.level(6);
  REQUIRE(lv.size() == 7);
  for (int j = 0; j <= 6; ++j) CHECK(lv[j] == lat.node(6, j));
  CHECK(lat.node(0, 0) == 100.0);
  CHECK_THROWS_AS(lat.node(7, 0), ValidationError);
  CHECK_THROWS_AS(lat.node(2, 3), ValidationError);

  // dt-dependent upturn probability leaves the exponents constant only through p;
  // a nonzero sqrt(dt) coefficient varies them, so the tree cannot recombine
  const Lattice bent = Lattice::build(uniform_grid(1.0, 3), params,
                                      UpturnModel{0.5, 0.1, 0}, 100.0, Measure::natural);
  CHECK(bent.recombining());  // same dt each step, same p each step
  const Lattice vary = Lattice::build(explicit_grid({0.0, 0.3, 1.0}), params,
                                      UpturnModel{0.5, 0.1, 0}, 100.0, Measure::natural);
  CHECK_FALSE(vary.recombining());
}

TEST_CASE("non-recombining levels enumerate paths with the first step in the top bit") {
  const MarketParams params{0.08, 0.25, 0.02};
  std::vector<OneStepMove> moves;
  moves.push_back(raw_step_move(params, 0.5, 0.1));
  moves.push_back(raw_step_move(params, 0.6, 0.1));
  moves.push_back(raw_step_move(params, 0.7, 0.1));
  const TimeGrid grid = uniform_grid(0.3, 3);
  const Lattice lat =
      Lattice::from_moves(grid, params, moves, 50.0, Measure::natural);
  CHECK_FALSE(lat.recombining());
  CHECK(lat.level_size(3) == 8);
  CHECK(lat.step_prob(1) == 0.6);

  // path 0b101: up at step 0, down at step 1, up at step 2
  const double expected =
      50.0 * std::exp(moves[0].up_log + moves[1].down_log + moves[2].up_log);
  CHECK(lat.node(3, 0b101) == doctest::Approx(expected).epsilon(1e-14));
  const Eigen::ArrayXd lv = lat.level(3);
  REQUIRE(lv.size() == 8);
  for (int j = 0; j < 8; ++j) CHECK(lv[j] == doctest::Approx(lat.node(3, j)).epsilon(1e-15));

  // enumeration cap: 27 distinct-move levels refuse to build
  std::vector<OneStepMove> many;
  for (int k = 0; k < 27; ++k)
    many.push_back(raw_step_move(params, 0.4 + 0.005 * k, 1.0 / 252.0));
  CHECK_THROWS_AS(Lattice::from_moves(uniform_grid(27.0 / 252.0, 27), params, many, 50.0,
                                      Measure::natural),
                  ValidationError);
}

TEST_CASE("lattice clamp counting surfaces the adjusted steps") {
  const MarketParams wild{3.0, 0.2, 0.0};
  TreeBuildOptions opts;
  opts.q_policy = QPolicy::clamp;
  const Lattice lat = Lattice::build(uniform_grid(0.05, 5), wild, UpturnModel{0.5, 0, 0},
                                     100.0, Measure::risk_neutral_approx, opts);
  CHECK(lat.clamp_count() == 5);
  CHECK_THROWS_AS(Lattice::build(uniform_grid(0.05, 5), wild, UpturnModel{0.5, 0, 0}, 100.0,
                                 Measure::risk_neutral_approx),
                  ArbitrageError);
}

TEST_CASE("discounted terminal expectation reproduces the spot under the exact measure") {
  const MarketParams params{0.08, 0.2, 0.02};
  const int n = 10;
  const Lattice lat = Lattice::build(uniform_grid(1.0, n), params, UpturnModel{0.6, 0, 0},
                                     100.0, Measure::risk_neutral_exact);
  const double q = lat.step_prob(0);
  double expectation = 0;
  for (int j = 0; j <= n; ++j)
    expectation += binom(n, j) * std::pow(q, j) * std::pow(1.0 - q, n - j) * lat.node(n, j);
  CHECK(expectation * std::exp(-params.r * 1.0) == doctest::Approx(100.0).epsilon(1e-13));
}

TEST_CASE("backward induction equals the closed-form binomial expectation") {
  const MarketParams params{0.08, 0.2, 0.02};
  const int n = 10;
  const Lattice lat = Lattice::build(uniform_grid(1.0, n), params, UpturnModel{0.55, 0, 0},
                                     100.0, Measure::risk_neutral_exact);
  const OptionSpec call{OptionKind::call, 105.0, 1.0};
  const PriceResult res = price_backward_induction(lat, call, params.r);

  const double q = lat.step_prob(0);
  double expectation = 0;
  for (int j = 0; j <= n; ++j)
    expectation +=
        binom(n, j) * std::pow(q, j) * std::pow(1.0 - q, n - j) * call.payoff(lat.node(n, j));
  const double direct = std::exp(-params.r * 1.0) * expectation;
  CHECK(res.value == doctest::Approx(direct).epsilon(1e-13));

  REQUIRE(res.values.size() == static_cast<std::size_t>(n) + 1);
  REQUIRE(res.deltas.size() == static_cast<std::size_t>(n));
  CHECK(res.values[0][0] == res.value);
  CHECK(res.values[static_cast<std::size_t>(n)].size() == n + 1);

  // every stored layer satisfies the one-step discounted recursion
  const double disc = std::exp(-params.r * lat.grid().dt(0));
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j <= k; ++j) {
      const double expect = disc * (q * res.values[static_cast<std::size_t>(k) + 1][j + 1] +
                                    (1.0 - q) * res.values[static_cast<std::size_t>(k) + 1][j]);
      CHECK(res.values[static_cast<std::size_t>(k)][j] ==
            doctest::Approx(expect).epsilon(1e-14));
    }
  }

  PricingOptions bare;
  bare.store_ladders = false;
  const PriceResult lean = price_backward_induction(lat, call, params.r, bare);
  CHECK(lean.value == res.value);
  CHECK(lean.values.empty());
  CHECK(lean.deltas.empty());
}

TEST_CASE("pricing guards its preconditions") {
  const MarketParams params{0.08, 0.2, 0.02};
  const Lattice nat = Lattice::build(uniform_grid(1.0, 4), params, UpturnModel{0.55, 0, 0},
                                     100.0, Measure::natural);
  const OptionSpec call{OptionKind::call, 100.0, 1.0};
  CHECK_THROWS_AS(price_backward_induction(nat, call, params.r), ValidationError);
  PricingOptions actuarial;
  actuarial.allow_natural = true;
  CHECK_NOTHROW(price_backward_induction(nat, call, params.r, actuarial));

  const Lattice rn = Lattice::build(uniform_grid(1.0, 4), params, UpturnModel{0.55, 0, 0},
                                    100.0, Measure::risk_neutral_exact);
  const OptionSpec wrong{OptionKind::call, 100.0, 2.0};
  CHECK_THROWS_AS(price_backward_induction(rn, wrong, params.r), ValidationError);

  PricingOptions bad_rates;
  bad_rates.r_steps = {0.02, 0.02};
  CHECK_THROWS_AS(price_backward_induction(rn, call, params.r, bad_rates), ValidationError);
}

TEST_CASE("per-step discount rates thread through the induction") {
  const MarketParams params{0.08, 0.2, 0.02};
  const Lattice lat = Lattice::build(uniform_grid(1.0, 2), params, UpturnModel{0.5, 0, 0},
                                     100.0, Measure::risk_neutral_exact);
  const OptionSpec call{OptionKind::call, 95.0, 1.0};

  PricingOptions flat;
  flat.r_steps = {0.02, 0.02};
  const double with_vector = price_backward_induction(lat, call, params.r, flat).value;
  const double with_scalar = price_backward_induction(lat, call, params.r).value;
  CHECK(with_vector == with_scalar);

  PricingOptions tilted;
  tilted.r_steps = {0.01, 0.05};
  const double priced = price_backward_induction(lat, call, params.r, tilted).value;
  const double q = lat.step_prob(0);
  const double dt = 0.5;
  const auto leaf = [&](int j) { return call.payoff(lat.node(2, j)); };
  const double vu = std::exp(-0.05 * dt) * (q * leaf(2) + (1 - q) * leaf(1));
  const double vd = std::exp(-0.05 * dt) * (q * leaf(1) + (1 - q) * leaf(0));
  const double by_hand = std::exp(-0.01 * dt) * (q * vu + (1 - q) * vd);
  CHECK(priced == doctest::Approx(by_hand).epsilon(1e-14));
}

TEST_CASE("lattice prices approach the lognormal limit") {
  const MarketParams params{0.08, 0.2, 0.02};
  const double bsm = bsm_price(OptionKind::call, 100.0, 100.0, 1.0, 0.02, 0.2);
  CHECK(bsm == doctest::Approx(8.9160372785725386).epsilon(1e-14));

  const Lattice lat = Lattice::build(uniform_grid(1.0, 200), params, UpturnModel{0.5, 0, 0},
                                     100.0, Measure::risk_neutral_exact);
  const OptionSpec call{OptionKind::call, 100.0, 1.0};
  const double tree = price_backward_induction(lat, call, params.r).value;
  CHECK(std::abs(tree - bsm) / bsm < 1e-3);

  // put-call parity pins the put price
  const double put = bsm_price(OptionKind::put, 100.0, 100.0, 1.0, 0.02, 0.2);
  CHECK(put == doctest::Approx(bsm - 100.0 + 100.0 * std::exp(-0.02)).epsilon(1e-13));
}

TEST_CASE("implied volatility inverts the pricing formula") {
  const double price = bsm_price(OptionKind::call, 100.0, 110.0, 0.75, 0.03, 0.27);
  CHECK(implied_vol(OptionKind::call, price, 100.0, 110.0, 0.75, 0.03) ==
        doctest::Approx(0.27).epsilon(1e-9));
  const double pprice = bsm_price(OptionKind::put, 100.0, 90.0, 0.25, 0.01, 0.4);
  CHECK(implied_vol(OptionKind::put, pprice, 100.0, 90.0, 0.25, 0.01) ==
        doctest::Approx(0.4).epsilon(1e-9));
  // below intrinsic value: no volatility can produce the quote
  CHECK_THROWS_AS(implied_vol(OptionKind::call, 1e-9, 100.0, 50.0, 0.5, 0.02),
                  ValidationError);
  CHECK_THROWS_AS(implied_vol(OptionKind::call, 101.0, 100.0, 50.0, 0.5, 0.02),
                  ValidationError);
}

TEST_CASE("measure names round-trip") {
  for (const Measure m :
       {Measure::natural, Measure::risk_neutral_exact, Measure::risk_neutral_approx}) {
    CHECK(measure_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(measure_from_string("risk_neutral"), ValidationError);
}
