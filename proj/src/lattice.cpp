#include "binlat/lattice.hpp"

#include <algorithm>
#include <cmath>

#include "binlat/errors.hpp"
#include "binlat/mathutil.hpp"

namespace binlat {

bool TimeGrid::is_uniform(double rel_tol) const {
  if (uniform_dt > 0) return true;
  const int n = steps();
  if (n <= 1) return true;
  const double h = instants[1] - instants[0];
  for (int k = 1; k < n; ++k) {
    const double hk = instants[k + 1] - instants[k];
    if (std::abs(hk - h) > rel_tol * std::max(h, hk)) return false;
  }
  return true;
}

TimeGrid uniform_grid(double maturity, int n_steps) {
  if (!(maturity > 0)) throw ValidationError("time grid: maturity must be positive");
  if (n_steps < 1) throw ValidationError("time grid: need at least one step");
  TimeGrid g;
  g.instants.resize(n_steps + 1);
  for (int k = 0; k <= n_steps; ++k)
    g.instants[k] = maturity * static_cast<double>(k) / n_steps;
  g.instants[n_steps] = maturity;
  g.uniform_dt = maturity / n_steps;
  return g;
}

TimeGrid explicit_grid(const std::vector<double>& instants) {
  if (instants.size() < 2) throw ValidationError("time grid: need at least two instants");
  if (instants.front() != 0.0) throw ValidationError("time grid: must start at t = 0");
  for (std::size_t k = 1; k < instants.size(); ++k)
    if (!(instants[k] > instants[k - 1]))
      throw ValidationError("time grid: instants must increase strictly");
  TimeGrid g;
  g.instants = Eigen::Map<const Eigen::ArrayXd>(instants.data(),
                                                static_cast<Eigen::Index>(instants.size()));
  // grids that are uniform up to float noise get the exact step restored, so a
  // serialization round trip cannot demote a recombining tree
  if (g.is_uniform()) g.uniform_dt = g.maturity() / g.steps();
  return g;
}

void validate(const MarketParams& params) {
  if (!std::isfinite(params.mu) || !std::isfinite(params.sigma) || !std::isfinite(params.r))
    throw ValidationError("market params must be finite");
  if (!(params.sigma > 0)) throw ValidationError("market params: sigma must be positive");
}

OneStepMove raw_step_move(const MarketParams& params, double p, double dt) {
  validate(params);
  if (!(dt > 0)) throw ValidationError("one_step_move: dt must be positive");
  if (!(p > 0 && p < 1)) throw ValidationError("one_step_move: p must lie in (0,1)");
  const double ratio_up = (1.0 - p) / p;
  const double ratio_dn = p / (1.0 - p);
  const double half_var = params.sigma * params.sigma / 2.0;
  OneStepMove mv;
  mv.p = p;
  mv.m1 = -ratio_up * half_var * dt + params.sigma * std::sqrt(ratio_up * dt);
  mv.m2 = -ratio_dn * half_var * dt - params.sigma * std::sqrt(ratio_dn * dt);
  mv.up_log = params.mu * dt + mv.m1;
  mv.down_log = params.mu * dt + mv.m2;
  mv.q_exact = (std::exp((params.r - params.mu) * dt) - std::exp(mv.m2)) /
               (std::exp(mv.m1) - std::exp(mv.m2));
  mv.q_approx = p - params.theta() * std::sqrt(p * (1.0 - p) * dt);
  return mv;
}

namespace {

constexpr double kQClampEps = 1e-12;

void enforce_q(double* q, bool* clamped, QPolicy policy, int step_index, const char* which) {
  if (*q > 0.0 && *q < 1.0) return;
  if (policy == QPolicy::clamp) {
    *q = std::clamp(*q, kQClampEps, 1.0 - kQClampEps);
    *clamped = true;
    return;
  }
  throw ArbitrageError(step_index, *q,
                       std::string("risk-neutral probability ") + which + " = " +
                           std::to_string(*q) + " outside (0,1) at step " +
                           std::to_string(step_index) +
                           ": one-step model admits arbitrage");
}

}  // namespace

OneStepMove one_step_move(const MarketParams& params, double p, double dt, QPolicy policy,
                          int step_index) {
  OneStepMove mv = raw_step_move(params, p, dt);
  enforce_q(&mv.q_exact, &mv.clamped, policy, step_index, "q_exact");
  enforce_q(&mv.q_approx, &mv.clamped, policy, step_index, "q_approx");
  return mv;
}

StepMoments step_moment_check(const OneStepMove& move, const MarketParams& params,
                              double dt) {
  StepMoments sm;
  const double p = move.p;
  sm.mean = p * move.up_log + (1.0 - p) * move.down_log;
  const double spread = move.up_log - move.down_log;
  sm.variance = p * (1.0 - p) * spread * spread;
  const double s2 = params.sigma * params.sigma;
  sm.mean_target = (params.mu - s2 / 2.0) * dt;
  sm.variance_target = s2 * dt;
  const double skew = 2.0 * p - 1.0;
  sm.variance_remainder =
      params.sigma * s2 * std::pow(dt, 1.5) * skew / std::sqrt(p * (1.0 - p)) +
      s2 * s2 * dt * dt * skew * skew / (4.0 * p * (1.0 - p));
  return sm;
}

double delta_position(double f_up, double f_down, double spot, const MarketParams& params,
                      const OneStepMove& move, double dt, DeltaMode mode) {
  if (!(spot > 0)) throw ValidationError("delta_position: spot must be positive");
  const double growth = spot * std::exp(params.mu * dt);
  if (mode == DeltaMode::exact)
    return (f_up - f_down) / (growth * (std::exp(move.m1) - std::exp(move.m2)));
  return (f_up - f_down) * std::sqrt(move.p * (1.0 - move.p)) /
         (growth * params.sigma * std::sqrt(dt));
}

Lattice Lattice::build(const TimeGrid& grid, const MarketParams& params,
                       const UpturnModel& upturn, double s0, Measure measure,
                       const TreeBuildOptions& options) {
  const int n = grid.steps();
  std::vector<OneStepMove> moves;
  moves.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double dt = grid.dt(k);
    const double p = upturn.at(dt);
    if (!(p > 0 && p < 1))
      throw ValidationError("build_tree: upturn probability " + std::to_string(p) +
                            " outside (0,1) at step " + std::to_string(k));
    if (measure == Measure::natural)
      moves.push_back(raw_step_move(params, p, dt));
    else
      moves.push_back(one_step_move(params, p, dt, options.q_policy, k));
  }
  return from_moves(grid, params, std::move(moves), s0, measure, options);
}

Lattice Lattice::from_moves(const TimeGrid& grid, const MarketParams& params,
                            std::vector<OneStepMove> moves, double s0, Measure measure,
                            const TreeBuildOptions& options) {
  if (!(s0 > 0)) throw ValidationError("lattice: s0 must be positive");
  const int n = grid.steps();
  if (static_cast<int>(moves.size()) != n)
    throw ValidationError("lattice: expected " + std::to_string(n) + " moves, got " +
                          std::to_string(moves.size()));
  Lattice lat;
  lat.grid_ = grid;
  lat.params_ = params;
  lat.s0_ = s0;
  lat.measure_ = measure;

  bool constant_moves = true;
  for (int k = 1; k < n; ++k)
    if (moves[static_cast<std::size_t>(k)].up_log != moves[0].up_log ||
        moves[static_cast<std::size_t>(k)].down_log != moves[0].down_log)
      constant_moves = false;
  lat.recombining_ = grid.is_uniform() && constant_moves;

  if (!lat.recombining_ && n > options.max_enumerated_levels)
    throw ValidationError("lattice: non-recombining tree with " + std::to_string(n) +
                          " levels exceeds the enumeration cap of " +
                          std::to_string(options.max_enumerated_levels) +
                          "; use a uniform grid with constant moves");

  for (const auto& mv : moves) lat.clamp_count_ += mv.clamped ? 1 : 0;
  lat.moves_ = std::move(moves);
  return lat;
}

double Lattice::step_prob(int k) const {
  const auto& mv = moves_[static_cast<std::size_t>(k)];
  switch (measure_) {
    case Measure::natural:
      return mv.p;
    case Measure::risk_neutral_exact:
      return mv.q_exact;
    case Measure::risk_neutral_approx:
      return mv.q_approx;
  }
  throw ValidationError("unknown measure");
}

double Lattice::node(int k, int j) const {
  if (k < 0 || k > steps() || j < 0 || j >= level_size(k))
    throw ValidationError("lattice node index out of range");
  if (recombining_) {
    const double up = k > 0 ? moves_[0].up_log : 0.0;
    const double dn = k > 0 ? moves_[0].down_log : 0.0;
    return s0_ * std::exp(j * up + (k - j) * dn);
  }
  double log_sum = 0;
  for (int step = 0; step < k; ++step) {
    const bool went_up = (j >> (k - 1 - step)) & 1;  // bit order: MSB = first step
    log_sum += went_up ? moves_[static_cast<std::size_t>(step)].up_log
                       : moves_[static_cast<std::size_t>(step)].down_log;
  }
  return s0_ * std::exp(log_sum);
}

Eigen::ArrayXd Lattice::level(int k) const {
  if (k < 0 || k > steps()) throw ValidationError("lattice level out of range");
  if (recombining_) {
    Eigen::ArrayXd out(k + 1);
    const double up = k > 0 ? moves_[0].up_log : 0.0;
    const double dn = k > 0 ? moves_[0].down_log : 0.0;
    for (int j = 0; j <= k; ++j) out[j] = s0_ * std::exp(j * up + (k - j) * dn);
    return out;
  }
  // expand forward level by level; children of j are 2j (down) and 2j+1 (up)
  Eigen::ArrayXd cur(1);
  cur[0] = s0_;
  for (int step = 0; step < k; ++step) {
    const double eu = std::exp(moves_[static_cast<std::size_t>(step)].up_log);
    const double ed = std::exp(moves_[static_cast<std::size_t>(step)].down_log);
    Eigen::ArrayXd next(cur.size() * 2);
    for (Eigen::Index j = 0; j < cur.size(); ++j) {
      next[2 * j] = cur[j] * ed;
      next[2 * j + 1] = cur[j] * eu;
    }
    cur.swap(next);
  }
  return cur;
}

namespace {

double discounted_value(const Lattice& lattice, const OptionSpec& option, double r,
                        const PricingOptions& opts, PriceResult* out) {
  const int n = lattice.steps();
  Eigen::ArrayXd spots = lattice.level(n);
  Eigen::ArrayXd values(spots.size());
  for (Eigen::Index j = 0; j < spots.size(); ++j) values[j] = option.payoff(spots[j]);

  if (opts.store_ladders) {
    out->values.assign(static_cast<std::size_t>(n) + 1, Eigen::ArrayXd());
    out->deltas.assign(static_cast<std::size_t>(n), Eigen::ArrayXd());
    out->values[static_cast<std::size_t>(n)] = values;
  }

  for (int k = n - 1; k >= 0; --k) {
    const auto& mv = lattice.moves()[static_cast<std::size_t>(k)];
    const double q = lattice.step_prob(k);
    const double dt = lattice.grid().dt(k);
    const double rk = opts.r_steps.empty() ? r : opts.r_steps[static_cast<std::size_t>(k)];
    const double disc = std::exp(-rk * dt);
    const int m = lattice.level_size(k);
    Eigen::ArrayXd next_values(m);
    Eigen::ArrayXd next_spots(m);
    Eigen::ArrayXd level_deltas(m);
    const double ed = std::exp(mv.down_log);
    for (int j = 0; j < m; ++j) {
      double f_up, f_down, spot;
      if (lattice.recombining()) {
        f_down = values[j];
        f_up = values[j + 1];
        spot = spots[j] / ed;  // down-child spot divided back one step
      } else {
        f_down = values[2 * j];
        f_up = values[2 * j + 1];
        spot = spots[2 * j] / ed;
      }
      next_values[j] = disc * (q * f_up + (1.0 - q) * f_down);
      next_spots[j] = spot;
      level_deltas[j] =
          delta_position(f_up, f_down, spot, lattice.params(), mv, dt, opts.delta_mode);
    }
    values.swap(next_values);
    spots.swap(next_spots);
    if (opts.store_ladders) {
      out->values[static_cast<std::size_t>(k)] = values;
      out->deltas[static_cast<std::size_t>(k)] = level_deltas;
    }
  }
  return values[0];
}

}  // namespace

PriceResult price_backward_induction(const Lattice& lattice, const OptionSpec& option,
                                     double r, const PricingOptions& options) {
  if (lattice.measure() == Measure::natural && !options.allow_natural)
    throw ValidationError(
        "price_backward_induction: lattice carries natural-world probabilities; "
        "build it under a risk-neutral measure or set allow_natural");
  const double T = lattice.grid().maturity();
  if (std::abs(T - option.maturity) > 1e-12 * std::max(1.0, std::abs(T)))
    throw ValidationError("price_backward_induction: option maturity " +
                          std::to_string(option.maturity) + " does not match grid maturity " +
                          std::to_string(T));
  if (!options.r_steps.empty() &&
      options.r_steps.size() != static_cast<std::size_t>(lattice.steps()))
    throw ValidationError("price_backward_induction: r_steps size " +
                          std::to_string(options.r_steps.size()) + " does not match step count " +
                          std::to_string(lattice.steps()));
  for (int k = 0; k < lattice.steps(); ++k) {
    const double q = lattice.step_prob(k);
    if (!(q > 0 && q < 1))
      throw ArbitrageError(k, q,
                           "price_backward_induction: step probability outside (0,1) at step " +
                               std::to_string(k));
  }
  PriceResult result;
  result.value = discounted_value(lattice, option, r, options, &result);
  return result;
}

double bsm_price(OptionKind kind, double s0, double strike, double maturity, double r,
                 double sigma) {
  if (!(s0 > 0) || !(strike > 0)) throw ValidationError("bsm_price: spot/strike must be positive");
  if (!(maturity > 0)) throw ValidationError("bsm_price: maturity must be positive");
  if (!(sigma > 0)) throw ValidationError("bsm_price: sigma must be positive");
  const double vol = sigma * std::sqrt(maturity);
  const double d1 = (std::log(s0 / strike) + (r + sigma * sigma / 2.0) * maturity) / vol;
  const double d2 = d1 - vol;
  const double df = std::exp(-r * maturity);
  if (kind == OptionKind::call) return s0 * norm_cdf(d1) - strike * df * norm_cdf(d2);
  return strike * df * norm_cdf(-d2) - s0 * norm_cdf(-d1);
}

double implied_vol(OptionKind kind, double price, double s0, double strike, double maturity,
                   double r) {
  const double df = std::exp(-r * maturity);
  const double lower =
      kind == OptionKind::call ? std::max(s0 - strike * df, 0.0) : std::max(strike * df - s0, 0.0);
  const double upper = kind == OptionKind::call ? s0 : strike * df;
  if (!(price >= lower && price <= upper))
    throw ValidationError("implied_vol: price " + std::to_string(price) +
                          " violates no-arbitrage bounds [" + std::to_string(lower) + ", " +
                          std::to_string(upper) + "]");

  constexpr double kSigmaLo = 1e-6, kSigmaHi = 5.0, kTol = 1e-10;
  auto f = [&](double sigma) { return bsm_price(kind, s0, strike, maturity, r, sigma) - price; };
  double flo = f(kSigmaLo), fhi = f(kSigmaHi);
  if (std::abs(flo) < kTol) return kSigmaLo;
  if (std::abs(fhi) < kTol) return kSigmaHi;
  if (flo * fhi > 0)
    throw ValidationError("implied_vol: no volatility in [1e-6, 5] reproduces the price");
  double lo = kSigmaLo, hi = kSigmaHi;
  for (int it = 0; it < 200; ++it) {
    const double mid = (lo + hi) / 2.0;
    const double fm = f(mid);
    if (std::abs(fm) < kTol) return mid;
    if (flo * fm <= 0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return (lo + hi) / 2.0;
}

const char* to_string(Measure m) {
  switch (m) {
    case Measure::natural:
      return "natural";
    case Measure::risk_neutral_exact:
      return "risk_neutral_exact";
    case Measure::risk_neutral_approx:
      return "risk_neutral_approx";
  }
  return "unknown";
}

Measure measure_from_string(const std::string& s) {
  if (s == "natural") return Measure::natural;
  if (s == "risk_neutral_exact") return Measure::risk_neutral_exact;
  if (s == "risk_neutral_approx") return Measure::risk_neutral_approx;
  throw ValidationError("unknown measure '" + s + "'");
}

}  // namespace binlat
