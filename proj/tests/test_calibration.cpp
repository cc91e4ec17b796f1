#include <cmath>
#include <string>
#include <vector>

#include "binlat/calibration.hpp"
#include "binlat/errors.hpp"
#include "binlat/rng.hpp"
#include "doctest.h"

using namespace binlat;

namespace {

// constant-q tree price with the step exponents implied by that q, the same
// construction the surface solver inverts
double price_at_q(OptionKind kind, double strike, double s0, const MarketParams& params,
                  double q, int n, double dt) {
  const double p = p_from_q(q, params.theta(), dt).p;
  OneStepMove move = raw_step_move(params, p, dt);
  move.q_exact = q;
  move.q_approx = q;
  const TimeGrid grid = uniform_grid(n * dt, n);
  const Lattice lat = Lattice::from_moves(grid, params, std::vector<OneStepMove>(n, move), s0,
                                          Measure::risk_neutral_approx);
  OptionSpec spec;
  spec.kind = kind;
  spec.strike = strike;
  spec.maturity = grid.maturity();
  PricingOptions popts;
  popts.store_ladders = false;
  return price_backward_induction(lat, spec, params.r, popts).value;
}

// success statuses guarantee a finite value; NaN may appear only beside a
// failure tag (failure cells are free to report a best-effort finite value,
// e.g. the scan edge under no_convergence)
void check_no_silent_nan(const SurfaceGrid& grid) {
  for (const SurfaceCell& cell : grid.cells) {
    if (cell.status == CellStatus::ok || cell.status == CellStatus::clamped)
      CHECK(std::isfinite(cell.value));
  }
}

MarketParams unit_theta_params() {
  MarketParams mp;
  mp.mu = 0.23;
  mp.sigma = 0.2;
  mp.r = 0.03;
  return mp;
}

}  // namespace

TEST_CASE("p from q inversion") {
  SUBCASE("frozen scalar") {
    const PFromQ out = p_from_q(0.55, 0.5, 1.0 / 252.0);
    CHECK(out.p == doctest::Approx(0.56561997608859704).epsilon(1e-14));
    CHECK_FALSE(out.clamped);
  }
  SUBCASE("zero market price of risk is the identity") {
    for (double q : {0.1, 0.5, 0.9}) CHECK(p_from_q(q, 0.0, 0.25).p == q);
  }
  SUBCASE("only the magnitude of theta enters") {
    CHECK(p_from_q(0.4, 0.7, 0.1).p == p_from_q(0.4, -0.7, 0.1).p);
  }
  SUBCASE("out-of-range results clamp with the flag set") {
    const PFromQ hi = p_from_q(0.5, 3.0, 1.0);  // p = 0.5 + 1.5 exactly
    CHECK(hi.clamped);
    CHECK(hi.p == 1.0 - 1e-12);
  }
  SUBCASE("composition with the forward map is O(dt^{3/2})") {
    for (double dt : {1.0 / 12, 1.0 / 52, 1.0 / 252, 1.0 / 1008}) {
      for (double p : {0.4, 0.55, 0.7}) {
        for (double theta : {0.3, 0.5, 1.0}) {
          const double q = p - theta * std::sqrt(p * (1.0 - p) * dt);
          REQUIRE(q > 0);
          const double residual = std::abs(p_from_q(q, theta, dt).p - p);
          CHECK(residual <= 0.5 * std::pow(dt, 1.5));
        }
      }
    }
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(p_from_q(0.0, 0.5, 0.1), ValidationError);
    CHECK_THROWS_AS(p_from_q(1.0, 0.5, 0.1), ValidationError);
    CHECK_THROWS_AS(p_from_q(0.5, 0.5, 0.0), ValidationError);
  }
}

TEST_CASE("calendar days to trading steps") {
  const Date quote{2024, 1, 2};
  CHECK(trading_steps(quote, Date{2024, 1, 3}) == 1);
  CHECK(trading_steps(quote, Date{2024, 1, 5}) == 2);
  CHECK(trading_steps(quote, Date{2024, 1, 6}) == 3);
  CHECK(trading_steps(quote, Date{2024, 2, 1}) == 21);
  CHECK(trading_steps(quote, Date{2025, 1, 1}) == 252);
  CHECK(trading_steps(quote, Date{2025, 1, 2}) == 253);
  CHECK_THROWS_AS(trading_steps(quote, quote), ValidationError);
  CHECK_THROWS_AS(trading_steps(quote, Date{2023, 12, 29}), ValidationError);
}

TEST_CASE("status and kind names") {
  CHECK(std::string(to_string(CellStatus::ok)) == "ok");
  CHECK(std::string(to_string(CellStatus::clamped)) == "clamped");
  CHECK(std::string(to_string(CellStatus::bound_violation)) == "bound_violation");
  CHECK(std::string(to_string(CellStatus::no_convergence)) == "no_convergence");
  CHECK(std::string(to_string(CellStatus::unidentified)) == "unidentified");
  CHECK(std::string(to_string(CellStatus::infeasible)) == "infeasible");
  CHECK(std::string(to_string(SurfaceGrid::Kind::q)) == "q");
  CHECK(std::string(to_string(SurfaceGrid::Kind::p)) == "p");
  CHECK(std::string(to_string(SurfaceGrid::Kind::dev)) == "dev");
  CHECK(std::string(to_string(SurfaceGrid::Kind::lambda)) == "lambda");
  CHECK(std::string(to_string(SurfaceGrid::Kind::price)) == "price");
}

TEST_CASE("implied q surface recovers the generator on short maturities") {
  const double s0 = 100.0, dt = 1.0 / 252.0, q_star = 0.53;
  const MarketParams mp = unit_theta_params();

  OptionChain chain;
  chain.quote_date = Date{2024, 1, 2};
  const Date d1{2024, 1, 3};
  const Date d2{2024, 1, 5};
  const Date d3{2024, 1, 6};
  struct Row {
    Date expiry;
    double strike;
    OptionKind kind;
  };
  // short maturities keep the price map smooth in q: no terminal node crosses
  // the strike, so the quote pins q up to one mirrored root that the
  // nearest-to-1/2 tie-break discards
  const std::vector<Row> rows = {
      {d1, 99.0, OptionKind::call},  {d1, 100.5, OptionKind::put},
      {d2, 99.5, OptionKind::call},  {d2, 101.0, OptionKind::put},
      {d3, 99.0, OptionKind::call},  {d3, 100.5, OptionKind::put},
  };
  for (const Row& row : rows) {
    OptionQuote quote;
    quote.expiry = row.expiry;
    quote.strike = row.strike;
    quote.kind = row.kind;
    const int n = trading_steps(chain.quote_date, row.expiry);
    quote.price = price_at_q(row.kind, row.strike, s0, mp, q_star, n, dt);
    chain.quotes.push_back(quote);
  }

  const SurfaceGrid qs = implied_q_surface(chain, s0, mp);
  REQUIRE(qs.cells.size() == chain.quotes.size());
  CHECK(qs.kind == SurfaceGrid::Kind::q);
  check_no_silent_nan(qs);
  for (std::size_t i = 0; i < qs.cells.size(); ++i) {
    const SurfaceCell& cell = qs.cells[i];
    CHECK(cell.status == CellStatus::ok);
    CHECK(cell.moneyness == chain.quotes[i].strike / s0);
    CHECK(std::abs(cell.value - q_star) < 1e-4);
    const double reprice = price_at_q(chain.quotes[i].kind, chain.quotes[i].strike, s0, mp,
                                      cell.value, cell.maturity_steps, dt);
    CHECK(std::abs(reprice - chain.quotes[i].price) / chain.quotes[i].price < 1e-6);
  }
}

TEST_CASE("implied q surface reprices long maturities") {
  // at hundreds of steps the folding geometry packs several exact roots into a
  // narrow band, so only the repricing identity is asserted, not q itself
  const double s0 = 100.0, dt = 1.0 / 252.0, q_star = 0.53;
  const MarketParams mp = unit_theta_params();

  OptionChain chain;
  chain.quote_date = Date{2024, 1, 2};
  const Date half{2024, 7, 3};   // 126 steps
  const Date year{2025, 1, 1};   // 252 steps
  for (const auto& [expiry, strike] :
       std::vector<std::pair<Date, double>>{{half, 90.0}, {half, 100.0}, {year, 100.0}}) {
    OptionQuote quote;
    quote.expiry = expiry;
    quote.strike = strike;
    quote.kind = OptionKind::call;
    const int n = trading_steps(chain.quote_date, expiry);
    quote.price = price_at_q(quote.kind, strike, s0, mp, q_star, n, dt);
    chain.quotes.push_back(quote);
  }
  const SurfaceGrid qs = implied_q_surface(chain, s0, mp);
  for (std::size_t i = 0; i < qs.cells.size(); ++i) {
    const SurfaceCell& cell = qs.cells[i];
    CHECK(cell.status == CellStatus::ok);
    const double reprice = price_at_q(chain.quotes[i].kind, chain.quotes[i].strike, s0, mp,
                                      cell.value, cell.maturity_steps, dt);
    CHECK(std::abs(reprice - chain.quotes[i].price) / chain.quotes[i].price < 1e-6);
  }
}

TEST_CASE("implied q surface marks bound violations") {
  const double s0 = 100.0;
  const MarketParams mp = unit_theta_params();
  OptionChain chain;
  chain.quote_date = Date{2024, 1, 2};
  OptionQuote zero_otm;  // worthless quote carries no information
  zero_otm.expiry = Date{2024, 2, 1};
  zero_otm.strike = 130.0;
  zero_otm.kind = OptionKind::call;
  zero_otm.price = 0.0;
  OptionQuote too_rich;  // call worth more than the stock
  too_rich.expiry = Date{2024, 2, 1};
  too_rich.strike = 100.0;
  too_rich.kind = OptionKind::call;
  too_rich.price = 105.0;
  chain.quotes = {zero_otm, too_rich};

  const SurfaceGrid qs = implied_q_surface(chain, s0, mp);
  REQUIRE(qs.cells.size() == 2);
  for (const SurfaceCell& cell : qs.cells) {
    CHECK(cell.status == CellStatus::bound_violation);
    CHECK(std::isnan(cell.value));
  }
  check_no_silent_nan(qs);

  SUBCASE("guards") {
    CHECK_THROWS_AS(implied_q_surface(chain, 0.0, mp), ValidationError);
    ImpliedQOptions opt;
    opt.scan_points = 3;
    CHECK_THROWS_AS(implied_q_surface(chain, s0, mp, opt), ValidationError);
  }
}

TEST_CASE("p surface from q surface") {
  const MarketParams mp = unit_theta_params();
  const double dt = 1.0 / 252.0;

  SurfaceGrid qs;
  qs.kind = SurfaceGrid::Kind::q;
  SurfaceCell good;
  good.moneyness = 1.0;
  good.maturity_steps = 21;
  good.value = 0.55;
  good.status = CellStatus::ok;
  SurfaceCell bad;
  bad.moneyness = 1.3;
  bad.maturity_steps = 21;
  bad.value = std::numeric_limits<double>::quiet_NaN();
  bad.status = CellStatus::bound_violation;
  qs.cells = {good, bad};

  const SurfaceGrid ps = p_surface_from_q(qs, mp, dt);
  REQUIRE(ps.cells.size() == 2);
  CHECK(ps.kind == SurfaceGrid::Kind::p);
  CHECK(ps.cells[0].value == p_from_q(0.55, mp.theta(), dt).p);
  CHECK(ps.cells[0].status == CellStatus::ok);
  CHECK(ps.cells[1].status == CellStatus::bound_violation);
  CHECK(std::isnan(ps.cells[1].value));
  check_no_silent_nan(ps);

  SUBCASE("a clamped inversion is tagged") {
    MarketParams steep;
    steep.mu = 0.9;
    steep.sigma = 0.05;
    steep.r = 0.0;  // theta = 18
    const SurfaceGrid clamped = p_surface_from_q(qs, steep, dt);
    CHECK(clamped.cells[0].status == CellStatus::clamped);
    CHECK(clamped.cells[0].value == 1.0 - 1e-12);
  }
  SUBCASE("input grid must carry q values") {
    SurfaceGrid wrong = qs;
    wrong.kind = SurfaceGrid::Kind::dev;
    CHECK_THROWS_AS(p_surface_from_q(wrong, mp, dt), ValidationError);
  }
}

TEST_CASE("model price and deviation surfaces") {
  const double s0 = 100.0, dt = 1.0 / 252.0;
  MarketParams mp;
  mp.mu = 0.08;
  mp.sigma = 0.25;
  mp.r = 0.03;

  OptionChain chain;
  chain.quote_date = Date{2024, 1, 2};
  const Date expiry{2024, 7, 3};  // 126 steps
  for (double strike : {95.0, 105.0}) {
    OptionQuote quote;
    quote.expiry = expiry;
    quote.strike = strike;
    quote.kind = OptionKind::call;
    quote.price = 1.0;  // replaced below
    chain.quotes.push_back(quote);
  }

  const SurfaceGrid model =
      model_price_surface(chain, s0, mp, 0.52, Measure::risk_neutral_approx, dt);
  REQUIRE(model.cells.size() == 2);
  CHECK(model.kind == SurfaceGrid::Kind::price);
  for (const SurfaceCell& cell : model.cells) {
    CHECK(cell.status == CellStatus::ok);
    CHECK(cell.value > 0);
  }

  SUBCASE("model quoted back at itself deviates by zero") {
    OptionChain quoted = chain;
    for (std::size_t i = 0; i < quoted.quotes.size(); ++i)
      quoted.quotes[i].price = model.cells[i].value;
    const SurfaceGrid dev = dev_surface(model, quoted, s0, mp.r, dt);
    CHECK(dev.kind == SurfaceGrid::Kind::dev);
    for (const SurfaceCell& cell : dev.cells) {
      CHECK(cell.status == CellStatus::ok);
      CHECK(std::abs(cell.value) < 1e-9);
    }
  }
  SUBCASE("a richer market quote pushes the deviation negative") {
    OptionChain quoted = chain;
    quoted.quotes[0].price = model.cells[0].value * 1.10;
    quoted.quotes[1].price = model.cells[1].value;
    const SurfaceGrid dev = dev_surface(model, quoted, s0, mp.r, dt);
    CHECK(dev.cells[0].value < 0);
    CHECK(std::abs(dev.cells[1].value) < 1e-9);
  }
  SUBCASE("model vol at twice the market vol gives one half") {
    // hand-made price grid so both implied vols are exact closed-form inverses
    const double maturity = 126 * dt;
    SurfaceGrid prices;
    prices.kind = SurfaceGrid::Kind::price;
    SurfaceCell cell;
    cell.moneyness = 1.0;
    cell.maturity_steps = 126;
    cell.value = bsm_price(OptionKind::call, s0, 100.0, maturity, mp.r, 0.4);
    cell.status = CellStatus::ok;
    prices.cells = {cell};
    OptionChain quoted;
    quoted.quote_date = chain.quote_date;
    OptionQuote quote;
    quote.expiry = expiry;
    quote.strike = 100.0;
    quote.kind = OptionKind::call;
    quote.price = bsm_price(OptionKind::call, s0, 100.0, maturity, mp.r, 0.2);
    quoted.quotes = {quote};
    const SurfaceGrid dev = dev_surface(prices, quoted, s0, mp.r, dt);
    CHECK(dev.cells[0].value == doctest::Approx(0.5).epsilon(1e-6));
  }
  SUBCASE("uninvertible quotes are marked") {
    OptionChain quoted = chain;
    quoted.quotes[0].price = s0 * 1.2;  // above the static upper bound
    quoted.quotes[1].price = model.cells[1].value;
    const SurfaceGrid dev = dev_surface(model, quoted, s0, mp.r, dt);
    CHECK(dev.cells[0].status == CellStatus::bound_violation);
    CHECK(std::isnan(dev.cells[0].value));
    CHECK(dev.cells[1].status == CellStatus::ok);
    check_no_silent_nan(dev);
  }
  SUBCASE("failed model cells pass through untouched") {
    SurfaceGrid broken = model;
    broken.cells[0].status = CellStatus::no_convergence;
    broken.cells[0].value = std::numeric_limits<double>::quiet_NaN();
    const SurfaceGrid dev = dev_surface(broken, chain, s0, mp.r, dt);
    CHECK(dev.cells[0].status == CellStatus::no_convergence);
    CHECK(std::isnan(dev.cells[0].value));
  }
  SUBCASE("guards") {
    CHECK_THROWS_AS(model_price_surface(chain, s0, mp, 0.0, Measure::risk_neutral_approx, dt),
                    ValidationError);
    CHECK_THROWS_AS(model_price_surface(chain, -1.0, mp, 0.5, Measure::risk_neutral_approx, dt),
                    ValidationError);
    SurfaceGrid wrong_kind = model;
    wrong_kind.kind = SurfaceGrid::Kind::q;
    CHECK_THROWS_AS(dev_surface(wrong_kind, chain, s0, mp.r, dt), ValidationError);
    SurfaceGrid short_grid = model;
    short_grid.cells.pop_back();
    CHECK_THROWS_AS(dev_surface(short_grid, chain, s0, mp.r, dt), ValidationError);
  }
}

namespace {

struct LambdaFixture {
  CsyParams params;
  IntensitySeries intensity;
  OptionChain chain;
  double s0 = 100.0;
  double r = 0.02;
  double dt = 1.0 / 252.0;
  Date expiry{2024, 1, 12};  // 7 steps
  OptionSpec spec;

  LambdaFixture() {
    params.nu = 0.1;
    params.sigma = 0.2;
    params.gamma = 0.05;
    params.delta = 0.02;
    params.h = Filter::gaussian(1.0);
    params.g = Filter::gaussian(2.0);
    Rng rng(9);
    std::vector<bool> flags(16);
    for (int i = 0; i < 16; ++i) flags[i] = rng.uniform01() < 0.5;
    intensity = intensity_from_flags(flags, 0.5);
    chain.quote_date = Date{2024, 1, 2};
    spec.kind = OptionKind::call;
    spec.strike = 101.0;
  }

  double informed_price(double lambda) const {
    ConditionalTreeInputs inputs;
    inputs.params = params;
    inputs.intensity = intensity;
    inputs.s0 = s0;
    inputs.r_steps = {r};
    inputs.trader.lambda = lambda;
    inputs.pricing.store_ladders = false;
    const int n = trading_steps(chain.quote_date, expiry);
    inputs.grid = uniform_grid(n * dt, n);
    OptionSpec local = spec;
    local.maturity = inputs.grid.maturity();
    return price_informed(inputs, local).value;
  }

  OptionQuote quote_at(double price) const {
    OptionQuote quote;
    quote.expiry = expiry;
    quote.strike = spec.strike;
    quote.kind = spec.kind;
    quote.price = price;
    return quote;
  }
};

}  // namespace

TEST_CASE("implied lambda surface") {
  LambdaFixture fx;

  SUBCASE("recovers the generating signal strength") {
    const double lambda_star = 1e-3;
    fx.chain.quotes = {fx.quote_at(fx.informed_price(lambda_star))};
    const SurfaceGrid grid = implied_lambda_surface(fx.chain, fx.s0, fx.params, fx.intensity, fx.r);
    REQUIRE(grid.cells.size() == 1);
    CHECK(grid.kind == SurfaceGrid::Kind::lambda);
    CHECK(grid.cells[0].status == CellStatus::ok);
    CHECK(std::abs(grid.cells[0].value - lambda_star) / lambda_star < 0.05);
    check_no_silent_nan(grid);
  }
  SUBCASE("a blank generator comes back at zero") {
    fx.chain.quotes = {fx.quote_at(fx.informed_price(0.0))};
    const SurfaceGrid grid = implied_lambda_surface(fx.chain, fx.s0, fx.params, fx.intensity, fx.r);
    CHECK(grid.cells[0].status == CellStatus::ok);
    CHECK(grid.cells[0].value <= 1e-6);
  }
  SUBCASE("a quote below the reachable range fails to converge") {
    // the informed price falls as lambda grows, so half the floor price is
    // out of reach and the search piles up at the top of the scan
    fx.chain.quotes = {fx.quote_at(0.5 * fx.informed_price(1.0))};
    const SurfaceGrid grid = implied_lambda_surface(fx.chain, fx.s0, fx.params, fx.intensity, fx.r);
    CHECK(grid.cells[0].status == CellStatus::no_convergence);
    // the tag still carries the best-effort edge value for inspection
    CHECK(std::isfinite(grid.cells[0].value));
  }
  SUBCASE("a flat objective is reported unidentified") {
    fx.chain.quotes = {fx.quote_at(fx.informed_price(1e-3))};
    ImpliedLambdaOptions opt;
    opt.flat_tol = 1e9;  // force the flatness verdict
    const SurfaceGrid grid =
        implied_lambda_surface(fx.chain, fx.s0, fx.params, fx.intensity, fx.r, opt);
    CHECK(grid.cells[0].status == CellStatus::unidentified);
    CHECK(std::isnan(grid.cells[0].value));
  }
  SUBCASE("maturities the intensity cannot cover are infeasible") {
    LambdaFixture short_fx;
    short_fx.intensity.xi.conservativeResize(3);
    short_fx.chain.quotes = {short_fx.quote_at(1.0)};
    const SurfaceGrid grid = implied_lambda_surface(short_fx.chain, short_fx.s0, short_fx.params,
                                                    short_fx.intensity, short_fx.r);
    CHECK(grid.cells[0].status == CellStatus::infeasible);
  }
  SUBCASE("an inadmissible growth rate is infeasible") {
    LambdaFixture low_fx;
    low_fx.params.nu = 0.021;  // below r + eta^2/2 at every step
    low_fx.chain.quotes = {low_fx.quote_at(1.0)};
    const SurfaceGrid grid = implied_lambda_surface(low_fx.chain, low_fx.s0, low_fx.params,
                                                    low_fx.intensity, low_fx.r);
    CHECK(grid.cells[0].status == CellStatus::infeasible);
  }
  SUBCASE("guards") {
    fx.chain.quotes = {fx.quote_at(1.0)};
    ImpliedLambdaOptions opt;
    opt.scan_points = 3;
    CHECK_THROWS_AS(implied_lambda_surface(fx.chain, fx.s0, fx.params, fx.intensity, fx.r, opt),
                    ValidationError);
    opt = ImpliedLambdaOptions{};
    opt.lambda_lo = 2.0;  // above lambda_hi
    CHECK_THROWS_AS(implied_lambda_surface(fx.chain, fx.s0, fx.params, fx.intensity, fx.r, opt),
                    ValidationError);
    CHECK_THROWS_AS(implied_lambda_surface(fx.chain, 0.0, fx.params, fx.intensity, fx.r),
                    ValidationError);
  }
}

namespace {

struct CsyFitFixture {
  CsyParams truth;
  IntensitySeries intensity;
  Eigen::ArrayXd returns;
  double dt = 1.0 / 252.0;

  explicit CsyFitFixture(int n = 240, std::uint64_t seed = 5) {
    truth.nu = 0.08;
    truth.sigma = 0.2;
    truth.gamma = 0.3;
    truth.delta = 0.15;
    truth.h = Filter::gaussian(0.5);
    truth.g = Filter::gaussian(0.7);
    Rng rng(seed);
    std::vector<bool> flags(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) flags[static_cast<std::size_t>(i)] = rng.uniform01() < 0.5;
    intensity = intensity_from_flags(flags, 0.5);
    returns = stock_path(truth, intensity, dt, 100.0).step_returns;
  }
};

double rms(const Eigen::ArrayXd& v) {
  return std::sqrt(v.square().sum() / static_cast<double>(v.size()));
}

}  // namespace

TEST_CASE("csy fit residuals vanish at the generator") {
  const CsyFitFixture fx;
  const Eigen::ArrayXd resid = csy_fit_residuals(fx.returns, fx.intensity, fx.dt, fx.truth);
  REQUIRE(resid.size() == fx.returns.size());
  CHECK(resid.abs().maxCoeff() < 1e-15);

  SUBCASE("wrong coefficients leave residuals") {
    CsyParams off = fx.truth;
    off.gamma = 0.0;
    CHECK(rms(csy_fit_residuals(fx.returns, fx.intensity, fx.dt, off)) > 1e-4);
  }
  SUBCASE("guards") {
    IntensitySeries short_intensity = fx.intensity;
    short_intensity.xi.conservativeResize(10);
    CHECK_THROWS_AS(csy_fit_residuals(fx.returns, short_intensity, fx.dt, fx.truth),
                    ValidationError);
    CHECK_THROWS_AS(csy_fit_residuals(fx.returns, fx.intensity, 0.0, fx.truth), ValidationError);
  }
}

TEST_CASE("csy fit recovers the generator on clean data") {
  const CsyFitFixture fx;
  CsyFitOptions opt;
  opt.dt = fx.dt;
  const CsyFit fit = fit_csy(fx.returns, fx.intensity, opt);

  // an exactly representable sample has objective floor zero, which the
  // relative spread test of the simplex cannot certify; accuracy is the check
  CHECK(fit.rmse < 1e-6);
  CHECK(fit.best_start >= 0);
  CHECK(std::abs(fit.params.nu - fx.truth.nu) < 1e-3);
  CHECK(std::abs(fit.params.sigma - fx.truth.sigma) < 1e-4);
  CHECK(std::abs(fit.params.gamma - fx.truth.gamma) < 1e-3);
  CHECK(std::abs(fit.params.delta - fx.truth.delta) < 1e-3);
  CHECK(fit.params.h.bandwidth() == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(fit.params.g.bandwidth() == doctest::Approx(0.7).epsilon(1e-2));
  CHECK(fit.boundary_flags.empty());

  // constraint set holds at the solution
  CHECK(fit.params.nu > opt.r);
  CHECK(fit.params.sigma >= 0);
  CHECK(fit.params.gamma >= 0);
  CHECK(fit.params.delta >= 0);
  CHECK(fit.params.h.bandwidth() > 0);
  CHECK(fit.params.g.bandwidth() > 0);

  // the reported rmse is the rms of the residuals at the reported params
  const Eigen::ArrayXd resid = csy_fit_residuals(fx.returns, fx.intensity, fx.dt, fit.params);
  CHECK(fit.rmse == doctest::Approx(rms(resid)).epsilon(1e-10));

  SUBCASE("seed determinism") {
    const CsyFit again = fit_csy(fx.returns, fx.intensity, opt);
    CHECK(again.rmse == fit.rmse);
    CHECK(again.params.nu == fit.params.nu);
    CHECK(again.params.sigma == fit.params.sigma);
    CHECK(again.params.gamma == fit.params.gamma);
    CHECK(again.params.delta == fit.params.delta);
    CHECK(again.params.h.bandwidth() == fit.params.h.bandwidth());
    CHECK(again.params.g.bandwidth() == fit.params.g.bandwidth());
    CHECK(again.best_start == fit.best_start);
  }
}

TEST_CASE("csy fit under noise reaches the noise floor") {
  // generator magnitudes chosen like an equity-index daily fit, time unit one
  // trading day, disturbed by gaussian noise of known scale
  CsyParams truth;
  truth.nu = 0.0016;
  truth.sigma = 0.002;
  truth.gamma = 0.29;
  truth.delta = 0.089;
  truth.h = Filter::gaussian(8.8);
  truth.g = Filter::gaussian(1800.0);
  const int n = 400;
  Rng rng(21);
  std::vector<bool> flags(n);
  for (int i = 0; i < n; ++i) flags[i] = rng.uniform01() < 0.5;
  const IntensitySeries intensity = intensity_from_flags(flags, 0.5);
  Eigen::ArrayXd returns = stock_path(truth, intensity, 1.0, 100.0).step_returns;
  const double noise_sd = 0.02;
  for (int i = 0; i < n; ++i) returns[i] += noise_sd * rng.normal();

  CsyFitOptions opt;
  opt.dt = 1.0;
  const CsyFit fit = fit_csy(returns, intensity, opt);
  CHECK(std::abs(fit.rmse - noise_sd) / noise_sd < 0.10);
}

TEST_CASE("csy fit nests the plain random walk") {
  // gamma = delta = 0 generator: the best two-coefficient fit is exact, and the
  // six-parameter model can only match or improve it
  CsyParams truth;
  truth.nu = 0.08;
  truth.sigma = 0.2;
  const int n = 64;
  Rng rng(3);
  std::vector<bool> flags(n);
  for (int i = 0; i < n; ++i) flags[i] = rng.uniform01() < 0.5;
  const IntensitySeries intensity = intensity_from_flags(flags, 0.5);
  const Eigen::ArrayXd returns =
      stock_path(truth, intensity, 1.0 / 252.0, 100.0).step_returns;

  CsyFitOptions opt;
  opt.dt = 1.0 / 252.0;
  const CsyFit fit = fit_csy(returns, intensity, opt);
  CHECK(fit.rmse <= 1e-8);
}

TEST_CASE("csy fit input guards") {
  const CsyFitFixture fx(32);
  CsyFitOptions opt;
  opt.dt = fx.dt;

  Eigen::ArrayXd short_returns = fx.returns.head(8);
  IntensitySeries short_intensity = fx.intensity;
  short_intensity.xi.conservativeResize(8);
  CHECK_THROWS_AS(fit_csy(short_returns, short_intensity, opt), ValidationError);

  IntensitySeries mismatched = fx.intensity;
  mismatched.xi.conservativeResize(20);
  CHECK_THROWS_AS(fit_csy(fx.returns, mismatched, opt), ValidationError);

  CsyFitOptions bad = opt;
  bad.dt = 0.0;
  CHECK_THROWS_AS(fit_csy(fx.returns, fx.intensity, bad), ValidationError);
  bad = opt;
  bad.bw_lo = 10.0;
  bad.bw_hi = 1.0;
  CHECK_THROWS_AS(fit_csy(fx.returns, fx.intensity, bad), ValidationError);
  bad = opt;
  bad.n_starts = 0;
  CHECK_THROWS_AS(fit_csy(fx.returns, fx.intensity, bad), ValidationError);
  bad = opt;
  bad.grid_per_axis = 1;
  CHECK_THROWS_AS(fit_csy(fx.returns, fx.intensity, bad), ValidationError);

  const Eigen::ArrayXd flat = Eigen::ArrayXd::Constant(32, 0.25);
  IntensitySeries flat_intensity = fx.intensity;
  CHECK_THROWS_AS(fit_csy(flat, flat_intensity, opt), ValidationError);
}
