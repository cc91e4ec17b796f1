#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "binlat/errors.hpp"
#include "binlat/market_data.hpp"

namespace binlat {

enum class Innovation { gaussian, student_t };

const char* to_string(Innovation innovation);
Innovation innovation_from_string(const std::string& s);

// ARMA(1,1) mean with GJR-GARCH(1,1) variance:
//   r_k = mu + phi1 (r_{k-1} - mu) + a_k + theta1 a_{k-1}
//   sigma2_k = alpha0 + (alpha1 + gamma1 1[a_{k-1} < 0]) a_{k-1}^2 + beta1 sigma2_{k-1}
struct ArmaGjrGarchParams {
  double mu = 0;
  double phi1 = 0;
  double theta1 = 0;
  double alpha0 = 0;
  double alpha1 = 0;
  double gamma1 = 0;
  double beta1 = 0;
  double dof = 8;  // student_t innovations only, > 2 so the variance exists
};

// Stationarity and positivity region used by both the filter and the fitter.
bool garch_params_admissible(const ArmaGjrGarchParams& params, Innovation innovation);

struct GarchFilterResult {
  Eigen::ArrayXd sigma2;  // conditional variances, index 1..T-1 used in the likelihood
  Eigen::ArrayXd resid;   // mean-equation residuals a_k
  Eigen::ArrayXd ll_terms;  // per-observation log-likelihood contributions, k = 1..T-1
  double log_likelihood = 0;
};

// Runs the recursions conditioning on the first observation; sigma2_0 is the
// sample variance and a_0 = 0.
GarchFilterResult garch_filter(const Eigen::ArrayXd& returns,
                               const ArmaGjrGarchParams& params, Innovation innovation);

struct GarchFit {
  ArmaGjrGarchParams params;
  Innovation innovation = Innovation::gaussian;
  double log_likelihood = 0;
  std::vector<std::string> param_names;
  Eigen::ArrayXd se;  // outer-product-of-gradients standard errors, NaN when singular
  bool converged = false;
  int best_start = -1;
  Eigen::ArrayXd sigma2;
  Eigen::ArrayXd resid;
};

// Thrown when no start converges; carries the best point found so callers can
// inspect what the search reached.
class GarchFitError : public NumericError {
 public:
  GarchFitError(GarchFit best_found, const std::string& what);
  const GarchFit& best() const { return best_; }

 private:
  GarchFit best_;
};

struct GarchFitOptions {
  int n_starts = 8;
  std::uint64_t seed = 1;
  int max_iter = 6000;
  double f_tol = 1e-10;
  bool fix_gamma1 = false;  // freeze gamma1 = 0 (symmetric GARCH)
  // Extra starting points appended to the generated ones (e.g. a nested
  // model's solution).
  std::vector<ArmaGjrGarchParams> extra_starts;
};

// Quasi-maximum-likelihood over deterministic multi-starts. Constraints are
// enforced by penalty; every generated start is feasible.
GarchFit fit_arma_gjr_garch(const Eigen::ArrayXd& returns, Innovation innovation,
                            const GarchFitOptions& options = {});

// eps_k = a_k / sigma_k for the observations entering the likelihood.
Eigen::ArrayXd standardized_residuals(const GarchFit& fit);

// Fixture generator; burn_in steps are discarded so the start state washes out.
Eigen::ArrayXd simulate_arma_gjr_garch(const ArmaGjrGarchParams& params, Innovation innovation,
                                       int n, std::uint64_t seed, int burn_in = 500);

struct FactorTable {
  std::vector<Date> dates;
  Eigen::ArrayXd mkt_excess;
  Eigen::ArrayXd smb;
  Eigen::ArrayXd hml;
  Eigen::ArrayXd rf;  // per-period rate, same units as the returns
};

// CSV with header date,mkt_excess,smb,hml,rf and strictly increasing dates.
FactorTable load_factor_table(const std::string& path);

struct AlphaResult {
  std::vector<Date> dates;
  Eigen::ArrayXd alpha_series;  // per-period abnormal return: intercept plus residual
  double alpha = 0;             // equals mean(alpha_series) by least-squares orthogonality
  Eigen::VectorXd betas;        // slope coefficients in regressor order
};

// Excess-return regression on the market factor; rates come from the curve as
// annualized levels and are scaled by dt per period.
AlphaResult jensen_alpha_series(const LogReturnSeries& stock, const LogReturnSeries& market,
                                const RateCurve& rates, double dt);

// Three-factor regression; the table's rf is already per period.
AlphaResult ff3_alpha_series(const LogReturnSeries& stock, const FactorTable& factors);

}  // namespace binlat
