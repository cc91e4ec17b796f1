#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "binlat/market_data.hpp"

namespace binlat {

// Binomial trees whose branch probabilities live in the natural world rather
// than the risk-neutral one. Each step carries the natural upturn probability p
// alongside both risk-neutral variants:
//   q_exact  - the probability that makes the discounted one-step tree a
//              martingale, from the branch exponents themselves;
//   q_approx - its drift-normalized first-order form  p - theta sqrt(p(1-p) dt),
//              theta = (mu - r)/sigma.
// Branch exponents are drift-adjusted per branch so the two-point log-return
// has mean (mu - sigma^2/2) dt exactly:
//   up   = (mu - ((1-p)/p)  sigma^2/2) dt + sigma sqrt(((1-p)/p)  dt)
//   down = (mu - (p/(1-p))  sigma^2/2) dt - sigma sqrt((p/(1-p)) dt)

struct TimeGrid {
  Eigen::ArrayXd instants;  // t0 = 0 < t1 < ... < tn = T
  // Exact common step for uniform grids. Instants alone cannot carry this:
  // maturity * k / n wobbles in the last bit, and recombination detection
  // compares branch exponents bitwise.
  double uniform_dt = 0;  // 0 means irregular spacing

  int steps() const { return static_cast<int>(instants.size()) - 1; }
  double dt(int k) const {
    return uniform_dt > 0 ? uniform_dt : instants[k + 1] - instants[k];
  }
  double maturity() const { return instants[instants.size() - 1]; }
  bool is_uniform(double rel_tol = 1e-12) const;
};

TimeGrid uniform_grid(double maturity, int n_steps);
TimeGrid explicit_grid(const std::vector<double>& instants);

struct MarketParams {
  double mu = 0;     // natural growth rate
  double sigma = 0;  // volatility, > 0
  double r = 0;      // continuously compounded rate

  double theta() const { return (mu - r) / sigma; }
};

void validate(const MarketParams& params);

// Upturn probability as a function of the step length:
// p(dt) = p0 + p1 sqrt(dt) + p2 dt, required to stay inside (0,1) at build time.
struct UpturnModel {
  double p0 = 0.5;
  double p1 = 0;
  double p2 = 0;

  double at(double dt) const { return p0 + p1 * std::sqrt(dt) + p2 * dt; }
};

enum class Measure { natural, risk_neutral_exact, risk_neutral_approx };

// strict: q outside (0,1) raises ArbitrageError. clamp: q is pulled to the
// nearest interior point and counted; calibration searches want that.
enum class QPolicy { strict, clamp };

struct OneStepMove {
  double up_log = 0;    // log-price increment on an upturn
  double down_log = 0;  // log-price increment on a downturn
  double m1 = 0;        // up_log   - mu dt
  double m2 = 0;        // down_log - mu dt
  double p = 0.5;       // natural upturn probability
  double q_exact = 0;
  double q_approx = 0;
  bool clamped = false;
};

// Computes the move without range checks on q (p is always validated).
OneStepMove raw_step_move(const MarketParams& params, double p, double dt);

// The checked constructor: both q variants must land in (0,1) under strict
// policy, else ArbitrageError naming `step_index`.
OneStepMove one_step_move(const MarketParams& params, double p, double dt,
                          QPolicy policy = QPolicy::strict, int step_index = -1);

struct StepMoments {
  double mean = 0;      // exact two-point mean of the log-return
  double variance = 0;  // exact two-point variance
  double mean_target = 0;      // (mu - sigma^2/2) dt, matched exactly
  double variance_target = 0;  // sigma^2 dt, matched up to an O(dt^{3/2}) remainder
  // closed-form remainder: variance - variance_target
  //   = sigma^3 dt^{3/2} (2p-1)/sqrt(p(1-p)) + sigma^4 dt^2 (2p-1)^2 / (4 p (1-p))
  double variance_remainder = 0;
};

StepMoments step_moment_check(const OneStepMove& move, const MarketParams& params, double dt);

enum class DeltaMode { exact, approx };

// Shares of stock replicating the one-step option payoff spread:
//   exact : (f_up - f_down) / (spot e^{mu dt} (e^{m1} - e^{m2}))
//   approx: (f_up - f_down) sqrt(p(1-p)) / (spot e^{mu dt} sigma sqrt(dt))
double delta_position(double f_up, double f_down, double spot, const MarketParams& params,
                      const OneStepMove& move, double dt, DeltaMode mode = DeltaMode::exact);

struct TreeBuildOptions {
  QPolicy q_policy = QPolicy::strict;
  // Non-recombining levels hold 2^k nodes; enumeration stops here.
  int max_enumerated_levels = 26;
};

class Lattice {
 public:
  static Lattice build(const TimeGrid& grid, const MarketParams& params,
                       const UpturnModel& upturn, double s0, Measure measure,
                       const TreeBuildOptions& options = {});

  // Assembles a lattice from externally fixed per-step moves (conditional trees,
  // deserialization). Moves are taken as-is; q range checks follow the policy.
  static Lattice from_moves(const TimeGrid& grid, const MarketParams& params,
                            std::vector<OneStepMove> moves, double s0, Measure measure,
                            const TreeBuildOptions& options = {});

  const TimeGrid& grid() const { return grid_; }
  const MarketParams& params() const { return params_; }
  const std::vector<OneStepMove>& moves() const { return moves_; }
  Measure measure() const { return measure_; }
  double s0() const { return s0_; }
  bool recombining() const { return recombining_; }
  int clamp_count() const { return clamp_count_; }
  int steps() const { return grid_.steps(); }

  // Probability of the up branch at step k under this lattice's measure.
  double step_prob(int k) const;

  int level_size(int k) const { return recombining_ ? k + 1 : 1 << k; }

  // Recombining: j counts up-moves. Non-recombining: j is the path index, one
  // bit per step, least significant bit = latest step, set bit = up.
  double node(int k, int j) const;

  Eigen::ArrayXd level(int k) const;

 private:
  Lattice() = default;

  TimeGrid grid_;
  MarketParams params_;
  std::vector<OneStepMove> moves_;
  double s0_ = 0;
  Measure measure_ = Measure::natural;
  bool recombining_ = false;
  int clamp_count_ = 0;
};

struct OptionSpec {
  OptionKind kind = OptionKind::call;
  double strike = 0;
  double maturity = 0;

  double payoff(double s) const {
    const double intrinsic = kind == OptionKind::call ? s - strike : strike - s;
    return intrinsic > 0 ? intrinsic : 0;
  }
};

struct PricingOptions {
  bool store_ladders = true;
  DeltaMode delta_mode = DeltaMode::exact;
  bool allow_natural = false;  // actuarial valuation override
  // Per-step discount rates (size = steps). Empty means the scalar r argument
  // applies throughout.
  std::vector<double> r_steps;
};

struct PriceResult {
  double value = 0;
  // values[k]: option values across level k (k = 0..n); terminal layer is the
  // raw payoff. deltas[k]: replicating stock position per node (k = 0..n-1).
  // Both empty when store_ladders is off.
  std::vector<Eigen::ArrayXd> values;
  std::vector<Eigen::ArrayXd> deltas;
};

// Discounted expectation step by step under the lattice's own measure; `r` is
// the discount rate. The grid maturity must match the option's.
PriceResult price_backward_induction(const Lattice& lattice, const OptionSpec& option,
                                     double r, const PricingOptions& options = {});

double bsm_price(OptionKind kind, double s0, double strike, double maturity, double r,
                 double sigma);

// Bracketed root-find on sigma in [1e-6, 5]; |model - price| driven below 1e-10.
// Prices violating static no-arbitrage bounds raise ValidationError.
double implied_vol(OptionKind kind, double price, double s0, double strike, double maturity,
                   double r);

const char* to_string(Measure m);
Measure measure_from_string(const std::string& s);

}  // namespace binlat
