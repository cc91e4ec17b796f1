#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "binlat/market_data.hpp"

namespace binlat {

// Smoothing filter fed with a path statistic. Gaussian is the workhorse;
// constant and piecewise variants exist for reductions and stress shapes.
class Filter {
 public:
  enum class Kind { gaussian, constant, piecewise };

  static Filter gaussian(double bandwidth);
  static Filter constant(double value);
  // pieces.size() == knots.size() + 1; piece i applies on [knots[i-1], knots[i]),
  // so the function is right-continuous at every knot.
  static Filter piecewise(std::vector<double> knots,
                          std::vector<std::function<double(double)>> pieces);

  double operator()(double x) const;
  Kind kind() const { return kind_; }
  double bandwidth() const { return bandwidth_; }
  double value() const { return value_; }
  std::string describe() const;

 private:
  Filter() = default;

  Kind kind_ = Kind::constant;
  double bandwidth_ = 0;
  double value_ = 0;
  std::vector<double> knots_;
  std::vector<std::function<double(double)>> pieces_;
};

struct CsyParams {
  double nu = 0;     // growth rate of the stock exponent
  double sigma = 0;  // loading on the driving walk
  double gamma = 0;  // loading on the level-filtered integral
  double delta = 0;  // loading on the area-filtered integral
  Filter h = Filter::constant(0);  // filter on the running walk level
  Filter g = Filter::constant(0);  // filter on the running time-average (area)
};

void validate(const CsyParams& params, bool allow_zero_sigma = false);

// Returns standardized against the estimated diffusion scale:
//   z_k = (r_k - (mu - sigma^2/2) dt) / (sigma sqrt(dt)).
struct CentralizedReturns {
  Eigen::ArrayXd z;
  double mu = 0;
  double sigma = 0;
  double dt = 0;
};

CentralizedReturns centralize(const Eigen::ArrayXd& returns, double dt, double mu, double sigma);
CentralizedReturns centralize(const LogReturnSeries& returns, double dt);

// The two-valued step intensity recovered from return signs:
//   xi_up = sqrt((1-p)/p) on z >= 0, xi_down = -sqrt(p/(1-p)) otherwise.
// Mean zero and unit variance under upturn probability p by construction.
struct IntensitySeries {
  Eigen::ArrayXd xi;
  double p = 0.5;
  double xi_up = 1;
  double xi_down = -1;
};

// p defaults to the empirical sign frequency of z unless given.
IntensitySeries intensity_from_signs(const Eigen::ArrayXd& z,
                                     std::optional<double> p_given = std::nullopt);
IntensitySeries intensity(const CentralizedReturns& centered,
                          std::optional<double> p_given = std::nullopt);
// Fixture constructor from explicit up/down flags.
IntensitySeries intensity_from_flags(const std::vector<bool>& ups, double p);

// Running sums driving the stock exponent. Index k covers steps 1..k, entry 0
// is the origin. arg_h[k] and arg_g[k] are the filter arguments that the step
// k -> k+1 consumes: the walk level and its time-integral up to t_k.
struct PathAccumulators {
  Eigen::ArrayXd x;  // sqrt(dt) sum of intensities
  Eigen::ArrayXd y;  // sqrt(dt) sum of intensities weighted by h(previous level)
  Eigen::ArrayXd v;  // sqrt(dt) sum of intensities weighted by g(previous area)
  Eigen::ArrayXd arg_h;
  Eigen::ArrayXd arg_g;
};

PathAccumulators accumulate(const IntensitySeries& intensity, double dt, const Filter& h,
                            const Filter& g);

// Which filter arguments the per-step volatility eta_k reads. previsible keeps
// eta_k a function of the path up to t_k only, consistent with the realized
// step returns. contemporaneous pins eta_0 = sigma and shifts the level
// argument one intensity forward; kept as a comparison variant.
enum class EtaIndexing { previsible, contemporaneous };

struct VolatilityLadder {
  Eigen::ArrayXd eta;  // eta[k] scales the step t_k -> t_{k+1}, k = 0..n-1
  EtaIndexing indexing = EtaIndexing::previsible;
};

VolatilityLadder eta_ladder(const CsyParams& params, const IntensitySeries& intensity,
                            double dt, EtaIndexing indexing = EtaIndexing::previsible);

struct CsyPath {
  Eigen::ArrayXd s;             // s[0..n]
  Eigen::ArrayXd step_returns;  // log s[k+1] - log s[k] as the model writes it
};

// Path functional s_k = s0 exp(nu t_k + sigma x_k + gamma y_k + delta v_k);
// step_returns hold the equivalent one-step increments.
CsyPath stock_path(const CsyParams& params, const IntensitySeries& intensity, double dt,
                   double s0);

struct FilterState {
  double h_val = 0;
  double g_val = 0;
};

// Continuous-limit drift and volatility at a frozen filter state, plus the
// market price of risk against rate r:
//   n2 = sigma + gamma h + delta g
//   n1 = nu + n2^2 / 2 (expanded term by term)
//   theta = (n1 - r) / n2
struct SdeCoefficients {
  double n1 = 0;
  double n2 = 0;
  double theta = 0;
};

SdeCoefficients sde_coefficients(const CsyParams& params, const FilterState& state, double r);

struct ContinuumPath {
  Eigen::ArrayXd t;
  Eigen::ArrayXd b;  // Brownian level
  Eigen::ArrayXd c;  // int h(B) dB, left-point
  Eigen::ArrayXd g;  // int g(A) dB with A the running integral of B
  Eigen::ArrayXd s;
};

// Euler scheme with left-point integrands on a uniform grid.
ContinuumPath simulate_continuum(const CsyParams& params, double s0, double maturity,
                                 int n_steps, std::uint64_t seed);
// Same scheme with externally supplied Brownian increments (refinement studies).
ContinuumPath euler_csy_path(const CsyParams& params, double s0, double dt,
                             const Eigen::ArrayXd& db);

struct BandpassTrace {
  double bandwidth = 0;
  Eigen::ArrayXd v;  // area-filtered accumulator along the path
  double max_abs = 0;
};

// Sweeps the g bandwidth and records how much signal the area filter passes;
// wide-open bandwidths recover the plain walk, narrow ones suppress it.
std::vector<BandpassTrace> bandpass_experiment(const IntensitySeries& intensity, double dt,
                                               const std::vector<double>& bandwidths);

}  // namespace binlat
