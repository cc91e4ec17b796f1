#include "binlat/factors.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "binlat/csv.hpp"
#include "binlat/optimize.hpp"
#include "binlat/rng.hpp"

namespace binlat {

const char* to_string(Innovation innovation) {
  return innovation == Innovation::gaussian ? "gaussian" : "student_t";
}

Innovation innovation_from_string(const std::string& s) {
  if (s == "gaussian") return Innovation::gaussian;
  if (s == "student_t") return Innovation::student_t;
  throw ValidationError("unknown innovation '" + s + "' (gaussian|student_t)");
}

bool garch_params_admissible(const ArmaGjrGarchParams& p, Innovation innovation) {
  const bool finite = std::isfinite(p.mu) && std::isfinite(p.phi1) && std::isfinite(p.theta1) &&
                      std::isfinite(p.alpha0) && std::isfinite(p.alpha1) &&
                      std::isfinite(p.gamma1) && std::isfinite(p.beta1) && std::isfinite(p.dof);
  if (!finite) return false;
  if (!(p.alpha0 > 0)) return false;
  if (p.alpha1 < 0 || p.beta1 < 0) return false;
  if (p.alpha1 + p.gamma1 < 0) return false;
  // gamma1 / 2 because the indicator fires on half the innovations on average
  if (p.alpha1 + p.beta1 + 0.5 * p.gamma1 > 0.9999) return false;
  if (std::abs(p.phi1) > 0.999 || std::abs(p.theta1) > 0.999) return false;
  if (innovation == Innovation::student_t && !(p.dof > 2.05 && p.dof <= 300)) return false;
  return true;
}

GarchFilterResult garch_filter(const Eigen::ArrayXd& returns,
                               const ArmaGjrGarchParams& params, Innovation innovation) {
  const Eigen::Index t_len = returns.size();
  if (t_len < 3) throw ValidationError("garch_filter: need at least 3 observations");
  if (!garch_params_admissible(params, innovation))
    throw ValidationError("garch_filter: parameters outside the admissible region");

  const double mean = returns.mean();
  const double sample_var =
      (returns - mean).square().sum() / static_cast<double>(t_len - 1);
  if (!(sample_var > 0)) throw ValidationError("garch_filter: degenerate constant returns");

  GarchFilterResult out;
  out.sigma2.resize(t_len);
  out.resid.resize(t_len);
  out.ll_terms.resize(t_len - 1);
  out.sigma2[0] = sample_var;
  out.resid[0] = 0;

  double t_const = 0;
  if (innovation == Innovation::student_t) {
    const double nu = params.dof;
    t_const = std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
              0.5 * std::log(std::numbers::pi_v<double> * (nu - 2.0));
  }
  const double gauss_const = -0.5 * std::log(2.0 * std::numbers::pi_v<double>);

  double ll = 0;
  for (Eigen::Index k = 1; k < t_len; ++k) {
    const double a_prev = out.resid[k - 1];
    const double s2_prev = out.sigma2[k - 1];
    const double leverage = a_prev < 0 ? params.gamma1 : 0.0;
    const double s2 = params.alpha0 + (params.alpha1 + leverage) * a_prev * a_prev +
                      params.beta1 * s2_prev;
    if (!(s2 > 0)) throw NumericError("garch_filter: conditional variance not positive");
    const double a = returns[k] - params.mu - params.phi1 * (returns[k - 1] - params.mu) -
                     params.theta1 * a_prev;
    out.sigma2[k] = s2;
    out.resid[k] = a;
    double term;
    if (innovation == Innovation::gaussian) {
      term = gauss_const - 0.5 * std::log(s2) - 0.5 * a * a / s2;
    } else {
      const double nu = params.dof;
      const double eps = a / std::sqrt(s2);
      term = t_const - 0.5 * std::log(s2) -
             0.5 * (nu + 1.0) * std::log1p(eps * eps / (nu - 2.0));
    }
    out.ll_terms[k - 1] = term;
    ll += term;
  }
  out.log_likelihood = ll;
  return out;
}

GarchFitError::GarchFitError(GarchFit best_found, const std::string& what)
    : NumericError(what), best_(std::move(best_found)) {}

namespace {

constexpr double kPenalty = 1e12;

struct FreeLayout {
  Innovation innovation = Innovation::gaussian;
  bool fix_gamma1 = false;

  int size() const {
    return 6 + (fix_gamma1 ? 0 : 1) + (innovation == Innovation::student_t ? 1 : 0);
  }

  // Free coordinates: mu, phi1, theta1, ln(alpha0), alpha1, [gamma1], beta1,
  // [ln(dof - 2)]. The log maps keep alpha0 > 0 and dof > 2 without penalties.
  Eigen::VectorXd pack(const ArmaGjrGarchParams& p) const {
    Eigen::VectorXd x(size());
    int i = 0;
    x[i++] = p.mu;
    x[i++] = p.phi1;
    x[i++] = p.theta1;
    x[i++] = std::log(p.alpha0);
    x[i++] = p.alpha1;
    if (!fix_gamma1) x[i++] = p.gamma1;
    x[i++] = p.beta1;
    if (innovation == Innovation::student_t) x[i++] = std::log(p.dof - 2.0);
    return x;
  }

  ArmaGjrGarchParams unpack(const Eigen::VectorXd& x) const {
    ArmaGjrGarchParams p;
    int i = 0;
    p.mu = x[i++];
    p.phi1 = x[i++];
    p.theta1 = x[i++];
    p.alpha0 = std::exp(x[i++]);
    p.alpha1 = x[i++];
    p.gamma1 = fix_gamma1 ? 0.0 : x[i++];
    p.beta1 = x[i++];
    p.dof = innovation == Innovation::student_t ? 2.0 + std::exp(x[i++]) : 8.0;
    return p;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> n = {"mu", "phi1", "theta1", "alpha0", "alpha1"};
    if (!fix_gamma1) n.push_back("gamma1");
    n.push_back("beta1");
    if (innovation == Innovation::student_t) n.push_back("dof");
    return n;
  }
};

ArmaGjrGarchParams to_standardized_scale(const ArmaGjrGarchParams& p, double loc, double scale) {
  ArmaGjrGarchParams q = p;
  q.mu = (p.mu - loc) / scale;
  q.alpha0 = p.alpha0 / (scale * scale);
  return q;
}

ArmaGjrGarchParams to_original_scale(const ArmaGjrGarchParams& p, double loc, double scale) {
  ArmaGjrGarchParams q = p;
  q.mu = loc + scale * p.mu;
  q.alpha0 = p.alpha0 * scale * scale;
  return q;
}

// OPG covariance at the optimum: per-observation score outer products, scores
// by central differences in the natural parameters.
Eigen::ArrayXd opg_standard_errors(const Eigen::ArrayXd& returns,
                                   const ArmaGjrGarchParams& params, Innovation innovation,
                                   const FreeLayout& layout) {
  const std::vector<std::string> names = layout.names();
  const int m = static_cast<int>(names.size());
  const Eigen::Index t_obs = returns.size() - 1;
  Eigen::MatrixXd scores(t_obs, m);

  auto param_ref = [](ArmaGjrGarchParams& p, const std::string& name) -> double* {
    if (name == "mu") return &p.mu;
    if (name == "phi1") return &p.phi1;
    if (name == "theta1") return &p.theta1;
    if (name == "alpha0") return &p.alpha0;
    if (name == "alpha1") return &p.alpha1;
    if (name == "gamma1") return &p.gamma1;
    if (name == "beta1") return &p.beta1;
    return &p.dof;
  };

  Eigen::ArrayXd nan_result = Eigen::ArrayXd::Constant(m, std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < m; ++j) {
    ArmaGjrGarchParams hi = params;
    ArmaGjrGarchParams lo = params;
    double* p_hi = param_ref(hi, names[j]);
    double* p_lo = param_ref(lo, names[j]);
    const double h = std::max(1e-7, 1e-5 * std::abs(*p_hi));
    *p_hi += h;
    *p_lo -= h;
    if (!garch_params_admissible(hi, innovation) || !garch_params_admissible(lo, innovation))
      return nan_result;
    const Eigen::ArrayXd up = garch_filter(returns, hi, innovation).ll_terms;
    const Eigen::ArrayXd dn = garch_filter(returns, lo, innovation).ll_terms;
    scores.col(j) = ((up - dn) / (2.0 * h)).matrix();
  }

  const Eigen::MatrixXd opg = scores.transpose() * scores;
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(opg);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return nan_result;
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(m, m));
  Eigen::ArrayXd se(m);
  for (int j = 0; j < m; ++j) se[j] = cov(j, j) > 0 ? std::sqrt(cov(j, j)) : std::numeric_limits<double>::quiet_NaN();
  return se;
}

}  // namespace

GarchFit fit_arma_gjr_garch(const Eigen::ArrayXd& returns, Innovation innovation,
                            const GarchFitOptions& options) {
  const Eigen::Index t_len = returns.size();
  if (t_len < 30) throw ValidationError("fit_arma_gjr_garch: need at least 30 observations");
  if (options.n_starts < 1) throw ValidationError("fit_arma_gjr_garch: n_starts must be >= 1");
  const double loc = returns.mean();
  const double scale = std::sqrt((returns - loc).square().sum() / static_cast<double>(t_len - 1));
  if (!(scale > 0)) throw ValidationError("fit_arma_gjr_garch: degenerate constant returns");
  const Eigen::ArrayXd z = (returns - loc) / scale;

  FreeLayout layout;
  layout.innovation = innovation;
  layout.fix_gamma1 = options.fix_gamma1;

  const auto objective = [&](const Eigen::VectorXd& x) -> double {
    const ArmaGjrGarchParams p = layout.unpack(x);
    if (!garch_params_admissible(p, innovation)) return kPenalty;
    try {
      return -garch_filter(z, p, innovation).log_likelihood;
    } catch (const NumericError&) {
      return kPenalty;
    }
  };

  std::vector<ArmaGjrGarchParams> starts;
  {
    ArmaGjrGarchParams base;
    base.mu = 0;
    base.phi1 = 0;
    base.theta1 = 0;
    base.alpha0 = 0.05;
    base.alpha1 = 0.05;
    base.gamma1 = options.fix_gamma1 ? 0.0 : 0.04;
    base.beta1 = 0.85;
    base.dof = 8;
    starts.push_back(base);
  }
  for (int s = 1; s < options.n_starts; ++s) {
    Rng rng(derive_stream(options.seed, static_cast<std::uint64_t>(s)));
    ArmaGjrGarchParams p;
    p.mu = -0.1 + 0.2 * rng.uniform01();
    p.phi1 = -0.4 + 0.8 * rng.uniform01();
    p.theta1 = -0.4 + 0.8 * rng.uniform01();
    p.alpha1 = 0.02 + 0.13 * rng.uniform01();
    p.gamma1 = options.fix_gamma1 ? 0.0 : 0.12 * rng.uniform01();
    p.beta1 = 0.55 + 0.37 * rng.uniform01();
    const double persistence = p.alpha1 + p.beta1 + 0.5 * p.gamma1;
    if (persistence > 0.98) p.beta1 -= persistence - 0.98;
    // alpha0 sized so the unconditional variance sits near the sample variance (1 after scaling)
    p.alpha0 = std::max(1e-8, (1.0 - (p.alpha1 + p.beta1 + 0.5 * p.gamma1)) *
                                  (0.5 + rng.uniform01()));
    p.dof = 4.0 + 26.0 * rng.uniform01();
    starts.push_back(p);
  }
  for (const auto& extra : options.extra_starts)
    starts.push_back(to_standardized_scale(extra, loc, scale));

  NelderMeadOptions nm;
  nm.max_iter = options.max_iter;
  nm.f_tol = options.f_tol;
  nm.init_step = 0.05;

  bool any_converged = false;
  double best_obj = std::numeric_limits<double>::infinity();
  ArmaGjrGarchParams best_params;
  int best_index = -1;
  bool best_converged = false;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    if (!garch_params_admissible(starts[s], innovation)) continue;
    const NelderMeadResult res = nelder_mead(objective, layout.pack(starts[s]), nm);
    const bool better = res.f < best_obj ||
                        (res.converged && !best_converged && res.f < best_obj + 1e-9);
    any_converged = any_converged || res.converged;
    if (better) {
      best_obj = res.f;
      best_params = layout.unpack(res.x);
      best_index = static_cast<int>(s);
      best_converged = res.converged;
    }
  }
  if (best_index < 0)
    throw ValidationError("fit_arma_gjr_garch: no admissible starting point");

  GarchFit fit;
  fit.innovation = innovation;
  fit.params = to_original_scale(best_params, loc, scale);
  fit.param_names = layout.names();
  fit.best_start = best_index;
  fit.converged = best_converged;

  const GarchFilterResult filtered = garch_filter(returns, fit.params, innovation);
  fit.log_likelihood = filtered.log_likelihood;
  fit.sigma2 = filtered.sigma2;
  fit.resid = filtered.resid;

  // standard errors computed on the standardized problem, then delta-mapped
  Eigen::ArrayXd se_std = opg_standard_errors(z, best_params, innovation, layout);
  for (std::size_t j = 0; j < fit.param_names.size(); ++j) {
    if (fit.param_names[j] == "mu") se_std[static_cast<Eigen::Index>(j)] *= scale;
    if (fit.param_names[j] == "alpha0") se_std[static_cast<Eigen::Index>(j)] *= scale * scale;
  }
  fit.se = se_std;

  if (!any_converged)
    throw GarchFitError(fit, "fit_arma_gjr_garch: no start converged within " +
                                 std::to_string(options.max_iter) + " iterations");
  return fit;
}

Eigen::ArrayXd standardized_residuals(const GarchFit& fit) {
  const Eigen::Index t_len = fit.resid.size();
  if (t_len < 2) throw ValidationError("standardized_residuals: empty fit");
  Eigen::ArrayXd eps(t_len - 1);
  for (Eigen::Index k = 1; k < t_len; ++k) {
    const double s2 = fit.sigma2[k];
    if (!(s2 > 0)) throw NumericError("standardized_residuals: nonpositive variance");
    eps[k - 1] = fit.resid[k] / std::sqrt(s2);
  }
  return eps;
}

Eigen::ArrayXd simulate_arma_gjr_garch(const ArmaGjrGarchParams& params, Innovation innovation,
                                       int n, std::uint64_t seed, int burn_in) {
  if (n < 1) throw ValidationError("simulate_arma_gjr_garch: n must be positive");
  if (burn_in < 0) throw ValidationError("simulate_arma_gjr_garch: burn_in must be >= 0");
  if (!garch_params_admissible(params, innovation))
    throw ValidationError("simulate_arma_gjr_garch: parameters outside the admissible region");
  Rng rng(seed);
  const double persistence = params.alpha1 + params.beta1 + 0.5 * params.gamma1;
  double s2 = params.alpha0 / std::max(1e-12, 1.0 - persistence);
  double a_prev = 0;
  double r_prev = params.mu;
  Eigen::ArrayXd out(n);
  for (int k = -burn_in; k < n; ++k) {
    const double leverage = a_prev < 0 ? params.gamma1 : 0.0;
    s2 = params.alpha0 + (params.alpha1 + leverage) * a_prev * a_prev + params.beta1 * s2;
    const double eps = innovation == Innovation::gaussian
                           ? rng.normal()
                           : rng.student_t_unit_variance(params.dof);
    const double a = std::sqrt(s2) * eps;
    const double r = params.mu + params.phi1 * (r_prev - params.mu) + a + params.theta1 * a_prev;
    if (k >= 0) out[k] = r;
    a_prev = a;
    r_prev = r;
  }
  return out;
}

FactorTable load_factor_table(const std::string& path) {
  const CsvTable table = read_csv(path);
  require_header(table, {"date", "mkt_excess", "smb", "hml", "rf"}, path);
  FactorTable out;
  const std::size_t n = table.rows.size();
  if (n == 0) throw ValidationError(path + ": empty factor table");
  out.dates.reserve(n);
  out.mkt_excess.resize(static_cast<Eigen::Index>(n));
  out.smb.resize(static_cast<Eigen::Index>(n));
  out.hml.resize(static_cast<Eigen::Index>(n));
  out.rf.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = table.rows[i];
    const std::string ctx = path + " line " + std::to_string(i + 2);
    const Date d = parse_date(row[0]);
    if (!out.dates.empty() && !(out.dates.back() < d))
      throw ValidationError(path + ": dates must increase strictly at " + row[0]);
    out.dates.push_back(d);
    const Eigen::Index j = static_cast<Eigen::Index>(i);
    out.mkt_excess[j] = parse_double_field(row[1], ctx);
    out.smb[j] = parse_double_field(row[2], ctx);
    out.hml[j] = parse_double_field(row[3], ctx);
    out.rf[j] = parse_double_field(row[4], ctx);
  }
  return out;
}

namespace {

// Least squares with an explicit rank check; the first column must be the
// intercept for the alpha decomposition to hold.
Eigen::VectorXd ols_coefficients(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < x.cols())
    throw ValidationError("regression design matrix is rank-deficient; factors are collinear");
  return qr.solve(y);
}

AlphaResult alpha_from_regression(std::vector<Date> dates, const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& y) {
  const Eigen::VectorXd coef = ols_coefficients(x, y);
  AlphaResult out;
  out.dates = std::move(dates);
  out.alpha = coef[0];
  out.betas = coef.tail(coef.size() - 1);
  const Eigen::VectorXd explained = x.rightCols(x.cols() - 1) * out.betas;
  out.alpha_series = (y - explained).array();
  return out;
}

}  // namespace

AlphaResult jensen_alpha_series(const LogReturnSeries& stock, const LogReturnSeries& market,
                                const RateCurve& rates, double dt) {
  if (!(dt > 0)) throw ValidationError("jensen_alpha_series: dt must be positive");
  std::vector<Date> dates;
  std::vector<double> ys;
  std::vector<double> xs;
  std::size_t j = 0;
  for (std::size_t i = 0; i < stock.dates.size(); ++i) {
    while (j < market.dates.size() && market.dates[j] < stock.dates[i]) ++j;
    if (j == market.dates.size()) break;
    if (!(stock.dates[i] < market.dates[j]) && !(market.dates[j] < stock.dates[i])) {
      const double rf = rates.at(stock.dates[i]) * dt;
      dates.push_back(stock.dates[i]);
      ys.push_back(stock.r[static_cast<Eigen::Index>(i)] - rf);
      xs.push_back(market.r[static_cast<Eigen::Index>(j)] - rf);
    }
  }
  const std::size_t n = dates.size();
  if (n < 3) throw ValidationError("jensen_alpha_series: fewer than 3 overlapping dates");
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(static_cast<Eigen::Index>(i), 0) = 1.0;
    x(static_cast<Eigen::Index>(i), 1) = xs[i];
    y[static_cast<Eigen::Index>(i)] = ys[i];
  }
  return alpha_from_regression(std::move(dates), x, y);
}

AlphaResult ff3_alpha_series(const LogReturnSeries& stock, const FactorTable& factors) {
  std::vector<Date> dates;
  std::vector<double> ys;
  std::vector<std::array<double, 3>> xs;
  std::size_t j = 0;
  for (std::size_t i = 0; i < stock.dates.size(); ++i) {
    while (j < factors.dates.size() && factors.dates[j] < stock.dates[i]) ++j;
    if (j == factors.dates.size()) break;
    if (!(stock.dates[i] < factors.dates[j]) && !(factors.dates[j] < stock.dates[i])) {
      const Eigen::Index jj = static_cast<Eigen::Index>(j);
      dates.push_back(stock.dates[i]);
      ys.push_back(stock.r[static_cast<Eigen::Index>(i)] - factors.rf[jj]);
      xs.push_back({factors.mkt_excess[jj], factors.smb[jj], factors.hml[jj]});
    }
  }
  const std::size_t n = dates.size();
  if (n < 5) throw ValidationError("ff3_alpha_series: fewer than 5 overlapping dates");
  Eigen::MatrixXd x(n, 4);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Index ii = static_cast<Eigen::Index>(i);
    x(ii, 0) = 1.0;
    x(ii, 1) = xs[i][0];
    x(ii, 2) = xs[i][1];
    x(ii, 3) = xs[i][2];
    y[ii] = ys[i];
  }
  return alpha_from_regression(std::move(dates), x, y);
}

}  // namespace binlat
