#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "binlat/lattice.hpp"

namespace binlat {

// Terminal samples of geometric Brownian motion. Increments are exact per step
// (no discretization error); n_steps only partitions the interval so that seeded
// streams refine consistently.
Eigen::ArrayXd simulate_gbm(const MarketParams& params, double s0, double maturity,
                            int n_steps, int n_paths, std::uint64_t seed);

struct TerminalDistribution {
  Eigen::ArrayXd s;  // ascending support
  Eigen::ArrayXd w;  // probabilities, sum to 1

  double mean() const { return (s * w).sum(); }
};

// Exact binomial enumeration of S_T. Requires a recombining lattice whose
// step probability is constant under its measure.
TerminalDistribution terminal_distribution(const Lattice& lattice);

// sup_x |F_n(x) - F(x)| against the lognormal with the given total log-moments;
// evaluated at the atoms and their left limits, where the sup of a step-vs-
// continuous comparison lives.
double ks_distance_to_lognormal(const TerminalDistribution& dist, double log_mean,
                                double log_sd);

// Natural-measure wrapper: limit law has log-mean ln(s0) + (mu - sigma^2/2) T.
double ks_distance_to_lognormal(const TerminalDistribution& dist, const MarketParams& params,
                                double s0, double maturity);

// sup over a trimmed quantile grid of |F_n^{-1}(u) - F^{-1}(u)| / s0. The grid
// stays strictly inside (0,1): against an unbounded limit law the untrimmed sup
// never converges (the top atom has positive mass).
double quantile_coupling_distance(const TerminalDistribution& dist, double log_mean,
                                  double log_sd, double s0, double u_trim, double u_step);

struct ConvergenceCriterion {
  enum class Kind { ks, quantile_coupling };
  Kind kind = Kind::ks;
  double threshold = 1e-3;
  double u_trim = 5e-3;  // quantile grid: u in {u_trim, u_trim + u_step, ..., 1 - u_trim}
  double u_step = 5e-3;

  std::string name() const;
};

struct ConvergencePoint {
  double param = 0;            // grid value (p or mu)
  long long n_required = 0;    // smallest step count meeting the criterion, or the cap
  double discrepancy = 0;      // criterion value at n_required
  bool cap_hit = false;        // criterion still unmet at the cap; n_required holds the cap
};

struct ConvergenceReport {
  std::string criterion;
  double threshold = 0;
  long long cap = 0;
  std::vector<ConvergencePoint> points;
};

// Required step count per upturn probability, natural-measure tree against its
// lognormal limit. Geometric doubling brackets the answer, bisection tightens it;
// reported n is exact up to local non-monotonicity of the criterion.
ConvergenceReport required_n_vs_p(const std::vector<double>& p_grid,
                                  const MarketParams& params, double maturity,
                                  const ConvergenceCriterion& criterion,
                                  long long cap = 1000000);

// Required step count per growth rate under the exact risk-neutral measure
// (p fixed at 1/2), against the lognormal with drift r. Step counts at which the
// risk-neutral probability leaves (0,1) count as unmet, so the feasibility
// boundary in mu is part of the answer.
ConvergenceReport required_n_vs_mu(const std::vector<double>& mu_grid,
                                   const MarketParams& params, double maturity,
                                   const ConvergenceCriterion& criterion,
                                   long long cap = 1000000);

}  // namespace binlat
