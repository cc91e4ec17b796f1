#pragma once

#include <Eigen/Core>
#include <vector>

#include "binlat/csy.hpp"
#include "binlat/lattice.hpp"

namespace binlat {

// A trader holding a private directional signal of per-step accuracy
// (1 + lambda sqrt(dt)) / 2, sized to n_forwards one-step forward contracts.
struct TraderSpec {
  double lambda = 0;
  double n_forwards = 0;
};

void validate(const TraderSpec& trader, double dt);

// Probability the signal calls the step direction correctly.
double signal_accuracy(double lambda, double dt);

// Per-step information ratio of the signal alone: 2 lambda sqrt(p(1-p)).
double information_ratio(double lambda, double p);

// Risk-adjusted growth of stock plus n forwards backed by the signal:
//   (theta + 2 n lambda sqrt(p(1-p))) / sqrt(1 + n^2).
double risk_adjusted_return(double n_forwards, double theta, double lambda, double p);

struct OptimalAllocation {
  double n_opt = 0;    // forwards per share maximizing the ratio
  double theta_opt = 0;  // the maximized ratio, sqrt(theta^2 + 4 lambda^2 p(1-p))
};

OptimalAllocation optimal_allocation(double theta, double lambda, double p);

struct StepInputs {
  double spot = 0;
  double nu = 0;   // growth rate of the step exponent
  double eta = 0;  // step volatility
  double r = 0;
  double p = 0.5;
  double dt = 0;
};

// One-step outcome law over (direction) x (signal correctness).
struct FourOutcomeLaw {
  // order: up/correct, down/correct, up/wrong, down/wrong
  double outcome[4] = {0, 0, 0, 0};
  double prob[4] = {0, 0, 0, 0};

  double mean() const;
  double variance() const;
};

// P&L of n forward contracts settled against F = spot e^{r dt}.
FourOutcomeLaw forward_step(const StepInputs& inputs, const TraderSpec& trader);

// Stock value plus the forward P&L; the "enhanced" one-step price process.
FourOutcomeLaw enhanced_step_distribution(const StepInputs& inputs, const TraderSpec& trader);

// Pricing ingredients for one step. The signal pays a dividend-like excess
// growth; the risk-neutral up weight prices the stock plus that stream.
struct InformedStep {
  double theta_forward = 0;  // (nu - eta^2/2 - r) / eta, positive when admissible
  double dividend = 0;       // eta (sqrt(theta_forward^2 + 4 lambda^2 p(1-p)) - theta_forward)
  double nu_informed = 0;    // nu + dividend
  double theta_pricing = 0;  // (nu_informed - r) / eta
  double q = 0;              // p - theta_pricing sqrt(p(1-p) dt)
  double n_opt = 0;
};

// Requires nu - eta^2/2 > r > 0 and lambda sqrt(dt) < 1. At lambda = 0 the
// dividend vanishes and q reduces to the plain path-dependent pricing weight.
InformedStep informed_step(const StepInputs& inputs, const TraderSpec& trader,
                           int step_index = -1);

// The shared pricing weight: q = p - ((nu - r)/eta) sqrt(p(1-p) dt).
double csy_step_q(double nu, double r, double eta, double p, double dt);

// Conditional pricing tree: the realized intensity path fixes the volatility
// ladder eta_k, each step prices with its own q_k, and the engine is the
// lattice-core backward induction (recombining automatically when the moves
// come out constant).
struct ConditionalTreeInputs {
  TimeGrid grid;  // uniform
  CsyParams params;
  IntensitySeries intensity;  // at least grid.steps() entries
  EtaIndexing eta_indexing = EtaIndexing::previsible;
  double s0 = 0;
  std::vector<double> r_steps;  // size 1 or steps()
  TraderSpec trader;
  TreeBuildOptions tree;
  PricingOptions pricing;
};

struct ConditionalPriceResult {
  double value = 0;
  PriceResult tree;  // ladders when pricing.store_ladders is on
  bool recombining = false;
  int clamp_count = 0;
  // per-step diagnostics
  Eigen::ArrayXd eta;
  Eigen::ArrayXd q;
  Eigen::ArrayXd nu_informed;
  Eigen::ArrayXd dividend;
  Eigen::ArrayXd theta_forward;
  Eigen::ArrayXd n_opt;
};

ConditionalPriceResult price_informed(const ConditionalTreeInputs& inputs,
                                      const OptionSpec& option);

// Identical engine with the trader switched off.
ConditionalPriceResult csy_price(const ConditionalTreeInputs& inputs, const OptionSpec& option);

}  // namespace binlat
