#include "binlat/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "binlat/errors.hpp"
#include "binlat/mathutil.hpp"
#include "binlat/rng.hpp"

namespace binlat {

Eigen::ArrayXd simulate_gbm(const MarketParams& params, double s0, double maturity,
                            int n_steps, int n_paths, std::uint64_t seed) {
  validate(params);
  if (!(s0 > 0)) throw ValidationError("simulate_gbm: s0 must be positive");
  if (!(maturity > 0)) throw ValidationError("simulate_gbm: maturity must be positive");
  if (n_steps < 1) throw ValidationError("simulate_gbm: n_steps must be at least 1");
  if (n_paths < 1) throw ValidationError("simulate_gbm: n_paths must be at least 1");

  const double dt = maturity / n_steps;
  const double drift = (params.mu - 0.5 * params.sigma * params.sigma) * dt;
  const double vol = params.sigma * std::sqrt(dt);
  Eigen::ArrayXd out(n_paths);
  for (int i = 0; i < n_paths; ++i) {
    Rng rng(derive_stream(seed, static_cast<std::uint64_t>(i)));
    double x = 0;
    for (int k = 0; k < n_steps; ++k) x += drift + vol * rng.normal();
    out[i] = s0 * std::exp(x);
  }
  return out;
}

namespace {

// Log-space binomial terminal law; staying in logs keeps the tails finite for
// step counts where the top node would overflow exp.
struct LogLaw {
  Eigen::ArrayXd log_s;  // ascending
  Eigen::ArrayXd w;
};

LogLaw binomial_log_law(long long n, double up_log, double down_log, double prob,
                        double log_s0) {
  LogLaw law;
  law.log_s.resize(n + 1);
  law.w.resize(n + 1);
  const double lp = std::log(prob);
  const double lq = std::log1p(-prob);
  for (long long j = 0; j <= n; ++j) {
    law.log_s[j] = log_s0 + static_cast<double>(j) * up_log +
                   static_cast<double>(n - j) * down_log;
    law.w[j] = std::exp(log_binom_coef(n, j) + static_cast<double>(j) * lp +
                        static_cast<double>(n - j) * lq);
  }
  law.w /= law.w.sum();
  return law;
}

double ks_of_log_law(const LogLaw& law, double log_mean, double log_sd) {
  double cum_prev = 0;
  double d = 0;
  for (Eigen::Index j = 0; j < law.log_s.size(); ++j) {
    const double f = norm_cdf((law.log_s[j] - log_mean) / log_sd);
    const double cum = cum_prev + law.w[j];
    d = std::max(d, std::max(std::abs(cum - f), std::abs(cum_prev - f)));
    cum_prev = cum;
  }
  return d;
}

double quantile_coupling_of_log_law(const LogLaw& law, double log_mean, double log_sd,
                                    double s0, double u_trim, double u_step) {
  if (!(u_trim > 0 && u_trim < 0.5)) throw ValidationError("quantile grid trim must lie in (0, 0.5)");
  if (!(u_step > 0)) throw ValidationError("quantile grid step must be positive");
  double d = 0;
  Eigen::Index idx = 0;
  double cum = law.w[0];
  for (double u = u_trim; u <= 1.0 - u_trim + 1e-12; u += u_step) {
    while (cum < u && idx + 1 < law.log_s.size()) {
      ++idx;
      cum += law.w[idx];
    }
    const double q_law = std::exp(law.log_s[idx]);
    const double q_ref = std::exp(log_mean + log_sd * norm_ppf(u));
    d = std::max(d, std::abs(q_law - q_ref) / s0);
  }
  return d;
}

double criterion_value(const LogLaw& law, const ConvergenceCriterion& crit, double log_mean,
                       double log_sd, double s0) {
  if (crit.kind == ConvergenceCriterion::Kind::ks) return ks_of_log_law(law, log_mean, log_sd);
  return quantile_coupling_of_log_law(law, log_mean, log_sd, s0, crit.u_trim, crit.u_step);
}

struct StepEval {
  double value = std::numeric_limits<double>::quiet_NaN();
  bool feasible = false;
  bool met = false;
};

// Smallest n meeting the criterion via doubling then bisection; the cap bounds
// the search and a still-unmet cap is reported as such rather than an error.
template <typename EvalFn>
ConvergencePoint search_required_n(const EvalFn& eval, long long cap, double param) {
  ConvergencePoint point;
  point.param = param;

  long long lo = 0;
  long long hi = 1;
  StepEval at_hi;
  while (true) {
    at_hi = eval(hi);
    if (at_hi.met) break;
    if (hi >= cap) {
      point.n_required = cap;
      point.discrepancy = at_hi.value;
      point.cap_hit = true;
      return point;
    }
    lo = hi;
    hi = std::min(hi * 2, cap);
  }

  double value_at_hi = at_hi.value;
  while (hi - lo > 1) {
    const long long mid = lo + (hi - lo) / 2;
    const StepEval at_mid = eval(mid);
    if (at_mid.met) {
      hi = mid;
      value_at_hi = at_mid.value;
    } else {
      lo = mid;
    }
  }
  point.n_required = hi;
  point.discrepancy = value_at_hi;
  point.cap_hit = false;
  return point;
}

}  // namespace

TerminalDistribution terminal_distribution(const Lattice& lattice) {
  if (!lattice.recombining())
    throw ValidationError(
        "terminal_distribution: exact enumeration needs a recombining lattice with "
        "constant step moves");
  const int n = lattice.steps();
  const double prob = lattice.step_prob(0);
  TerminalDistribution dist;
  dist.s = lattice.level(n);
  dist.w.resize(n + 1);
  const double lp = std::log(prob);
  const double lq = std::log1p(-prob);
  for (int j = 0; j <= n; ++j)
    dist.w[j] = std::exp(log_binom_coef(n, j) + j * lp + (n - j) * lq);
  dist.w /= dist.w.sum();
  return dist;
}

double ks_distance_to_lognormal(const TerminalDistribution& dist, double log_mean,
                                double log_sd) {
  if (!(log_sd > 0)) throw ValidationError("ks_distance_to_lognormal: log_sd must be positive");
  if (dist.s.size() == 0) throw ValidationError("ks_distance_to_lognormal: empty distribution");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dist.s.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return dist.s[a] < dist.s[b]; });
  double cum_prev = 0;
  double d = 0;
  for (const Eigen::Index j : order) {
    const double f = norm_cdf((std::log(dist.s[j]) - log_mean) / log_sd);
    const double cum = cum_prev + dist.w[j];
    d = std::max(d, std::max(std::abs(cum - f), std::abs(cum_prev - f)));
    cum_prev = cum;
  }
  return d;
}

double ks_distance_to_lognormal(const TerminalDistribution& dist, const MarketParams& params,
                                double s0, double maturity) {
  validate(params);
  if (!(s0 > 0)) throw ValidationError("ks_distance_to_lognormal: s0 must be positive");
  const double log_mean =
      std::log(s0) + (params.mu - 0.5 * params.sigma * params.sigma) * maturity;
  return ks_distance_to_lognormal(dist, log_mean, params.sigma * std::sqrt(maturity));
}

double quantile_coupling_distance(const TerminalDistribution& dist, double log_mean,
                                  double log_sd, double s0, double u_trim, double u_step) {
  if (!(log_sd > 0)) throw ValidationError("quantile_coupling_distance: log_sd must be positive");
  std::vector<Eigen::Index> order(static_cast<std::size_t>(dist.s.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return dist.s[a] < dist.s[b]; });
  LogLaw law;
  law.log_s.resize(dist.s.size());
  law.w.resize(dist.s.size());
  for (Eigen::Index i = 0; i < dist.s.size(); ++i) {
    law.log_s[i] = std::log(dist.s[order[static_cast<std::size_t>(i)]]);
    law.w[i] = dist.w[order[static_cast<std::size_t>(i)]];
  }
  return quantile_coupling_of_log_law(law, log_mean, log_sd, s0, u_trim, u_step);
}

std::string ConvergenceCriterion::name() const {
  return kind == Kind::ks ? "ks" : "quantile_coupling";
}

ConvergenceReport required_n_vs_p(const std::vector<double>& p_grid,
                                  const MarketParams& params, double maturity,
                                  const ConvergenceCriterion& criterion, long long cap) {
  validate(params);
  if (!(maturity > 0)) throw ValidationError("required_n_vs_p: maturity must be positive");
  if (cap < 1) throw ValidationError("required_n_vs_p: cap must be at least 1");
  const double log_mean = (params.mu - 0.5 * params.sigma * params.sigma) * maturity;
  const double log_sd = params.sigma * std::sqrt(maturity);

  ConvergenceReport report;
  report.criterion = criterion.name();
  report.threshold = criterion.threshold;
  report.cap = cap;
  for (const double p : p_grid) {
    if (!(p > 0 && p < 1)) throw ValidationError("required_n_vs_p: p must lie in (0,1)");
    const auto eval = [&](long long n) {
      const double dt = maturity / static_cast<double>(n);
      const OneStepMove move = raw_step_move(params, p, dt);
      const LogLaw law = binomial_log_law(n, move.up_log, move.down_log, p, 0.0);
      StepEval e;
      e.value = criterion_value(law, criterion, log_mean, log_sd, 1.0);
      e.feasible = true;
      e.met = e.value <= criterion.threshold;
      return e;
    };
    report.points.push_back(search_required_n(eval, cap, p));
  }
  return report;
}

ConvergenceReport required_n_vs_mu(const std::vector<double>& mu_grid,
                                   const MarketParams& params, double maturity,
                                   const ConvergenceCriterion& criterion, long long cap) {
  validate(params);
  if (!(maturity > 0)) throw ValidationError("required_n_vs_mu: maturity must be positive");
  if (cap < 1) throw ValidationError("required_n_vs_mu: cap must be at least 1");
  const double log_mean = (params.r - 0.5 * params.sigma * params.sigma) * maturity;
  const double log_sd = params.sigma * std::sqrt(maturity);
  const double p = 0.5;

  ConvergenceReport report;
  report.criterion = criterion.name();
  report.threshold = criterion.threshold;
  report.cap = cap;
  for (const double mu : mu_grid) {
    MarketParams local = params;
    local.mu = mu;
    validate(local);
    const auto eval = [&](long long n) {
      const double dt = maturity / static_cast<double>(n);
      const OneStepMove move = raw_step_move(local, p, dt);
      StepEval e;
      if (!(move.q_exact > 0 && move.q_exact < 1)) return e;  // unmet, infeasible q
      const LogLaw law = binomial_log_law(n, move.up_log, move.down_log, move.q_exact, 0.0);
      e.value = criterion_value(law, criterion, log_mean, log_sd, 1.0);
      e.feasible = true;
      e.met = e.value <= criterion.threshold;
      return e;
    };
    report.points.push_back(search_required_n(eval, cap, mu));
  }
  return report;
}

}  // namespace binlat
