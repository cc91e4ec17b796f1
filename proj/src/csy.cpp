#include "binlat/csy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>

#include "binlat/errors.hpp"
#include "binlat/rng.hpp"

namespace binlat {

Filter Filter::gaussian(double bandwidth) {
  if (!(bandwidth > 0) || !std::isfinite(bandwidth))
    throw ValidationError("Filter::gaussian: bandwidth must be positive and finite");
  Filter f;
  f.kind_ = Kind::gaussian;
  f.bandwidth_ = bandwidth;
  return f;
}

Filter Filter::constant(double value) {
  if (!std::isfinite(value)) throw ValidationError("Filter::constant: value must be finite");
  Filter f;
  f.kind_ = Kind::constant;
  f.value_ = value;
  return f;
}

Filter Filter::piecewise(std::vector<double> knots,
                         std::vector<std::function<double(double)>> pieces) {
  if (pieces.size() != knots.size() + 1)
    throw ValidationError("Filter::piecewise: need exactly one more piece than knots");
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    if (!(knots[i] < knots[i + 1]))
      throw ValidationError("Filter::piecewise: knots must be strictly increasing");
  for (const auto& piece : pieces)
    if (!piece) throw ValidationError("Filter::piecewise: empty piece");
  Filter f;
  f.kind_ = Kind::piecewise;
  f.knots_ = std::move(knots);
  f.pieces_ = std::move(pieces);
  return f;
}

double Filter::operator()(double x) const {
  switch (kind_) {
    case Kind::gaussian: {
      // bell without the density normalization: peak 1 at the origin for every
      // bandwidth, so the loading that multiplies it keeps its scale
      const double u = x / bandwidth_;
      return std::exp(-0.5 * u * u);
    }
    case Kind::constant:
      return value_;
    case Kind::piecewise: {
      // upper_bound keeps knot points with the right-hand piece
      const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
      return pieces_[static_cast<std::size_t>(it - knots_.begin())](x);
    }
  }
  return 0;
}

std::string Filter::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::gaussian:
      os << "gaussian(bandwidth=" << bandwidth_ << ")";
      break;
    case Kind::constant:
      os << "constant(" << value_ << ")";
      break;
    case Kind::piecewise:
      os << "piecewise(" << knots_.size() << " knots)";
      break;
  }
  return os.str();
}

void validate(const CsyParams& params, bool allow_zero_sigma) {
  if (!std::isfinite(params.nu) || !std::isfinite(params.sigma) ||
      !std::isfinite(params.gamma) || !std::isfinite(params.delta))
    throw ValidationError("CsyParams: coefficients must be finite");
  if (allow_zero_sigma ? params.sigma < 0 : !(params.sigma > 0))
    throw ValidationError("CsyParams: sigma must be positive");
}

CentralizedReturns centralize(const Eigen::ArrayXd& returns, double dt, double mu,
                              double sigma) {
  if (!(dt > 0)) throw ValidationError("centralize: dt must be positive");
  if (!(sigma > 0)) throw ValidationError("centralize: sigma must be positive");
  if (returns.size() == 0) throw ValidationError("centralize: empty return series");
  CentralizedReturns out;
  out.mu = mu;
  out.sigma = sigma;
  out.dt = dt;
  out.z = (returns - (mu - 0.5 * sigma * sigma) * dt) / (sigma * std::sqrt(dt));
  return out;
}

CentralizedReturns centralize(const LogReturnSeries& returns, double dt) {
  const GbmEstimate est = estimate_gbm_params(returns, dt);
  return centralize(returns.r, dt, est.mu_hat, est.sigma_hat);
}

IntensitySeries intensity_from_signs(const Eigen::ArrayXd& z, std::optional<double> p_given) {
  if (z.size() == 0) throw ValidationError("intensity_from_signs: empty series");
  double p;
  if (p_given) {
    p = *p_given;
  } else {
    // zero sits with the upturns, matching the sign-test convention
    p = static_cast<double>((z >= 0).count()) / static_cast<double>(z.size());
  }
  if (!(p > 0 && p < 1))
    throw ValidationError(
        "intensity_from_signs: upturn probability must lie strictly in (0,1); "
        "one-sided sign patterns need an explicit p");
  IntensitySeries out;
  out.p = p;
  out.xi_up = std::sqrt((1.0 - p) / p);
  out.xi_down = -std::sqrt(p / (1.0 - p));
  out.xi = (z >= 0).select(out.xi_up, Eigen::ArrayXd::Constant(z.size(), out.xi_down));
  return out;
}

IntensitySeries intensity(const CentralizedReturns& centered, std::optional<double> p_given) {
  return intensity_from_signs(centered.z, p_given);
}

IntensitySeries intensity_from_flags(const std::vector<bool>& ups, double p) {
  if (ups.empty()) throw ValidationError("intensity_from_flags: empty series");
  if (!(p > 0 && p < 1)) throw ValidationError("intensity_from_flags: p must lie in (0,1)");
  IntensitySeries out;
  out.p = p;
  out.xi_up = std::sqrt((1.0 - p) / p);
  out.xi_down = -std::sqrt(p / (1.0 - p));
  out.xi.resize(static_cast<Eigen::Index>(ups.size()));
  for (std::size_t i = 0; i < ups.size(); ++i)
    out.xi[static_cast<Eigen::Index>(i)] = ups[i] ? out.xi_up : out.xi_down;
  return out;
}

PathAccumulators accumulate(const IntensitySeries& intensity, double dt, const Filter& h,
                            const Filter& g) {
  if (!(dt > 0)) throw ValidationError("accumulate: dt must be positive");
  const Eigen::Index n = intensity.xi.size();
  if (n == 0) throw ValidationError("accumulate: empty intensity series");
  const double sdt = std::sqrt(dt);
  PathAccumulators acc;
  acc.x = Eigen::ArrayXd::Zero(n + 1);
  acc.y = Eigen::ArrayXd::Zero(n + 1);
  acc.v = Eigen::ArrayXd::Zero(n + 1);
  acc.arg_h = Eigen::ArrayXd::Zero(n + 1);
  acc.arg_g = Eigen::ArrayXd::Zero(n + 1);
  for (Eigen::Index k = 1; k <= n; ++k) {
    const double xi_k = intensity.xi[k - 1];
    acc.y[k] = acc.y[k - 1] + sdt * xi_k * h(acc.arg_h[k - 1]);
    acc.v[k] = acc.v[k - 1] + sdt * xi_k * g(acc.arg_g[k - 1]);
    acc.x[k] = acc.x[k - 1] + sdt * xi_k;
    acc.arg_h[k] = acc.x[k];
    acc.arg_g[k] = acc.arg_g[k - 1] + acc.x[k - 1] * dt;
  }
  return acc;
}

VolatilityLadder eta_ladder(const CsyParams& params, const IntensitySeries& intensity,
                            double dt, EtaIndexing indexing) {
  validate(params);
  const PathAccumulators acc = accumulate(intensity, dt, params.h, params.g);
  const Eigen::Index n = intensity.xi.size();
  VolatilityLadder ladder;
  ladder.indexing = indexing;
  ladder.eta.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    double level_term;
    if (indexing == EtaIndexing::previsible) {
      level_term = params.gamma * params.h(acc.arg_h[k]);
    } else if (k == 0) {
      ladder.eta[0] = params.sigma;
      continue;
    } else {
      // level argument shifted one intensity forward, first intensity dropped
      level_term = params.gamma * params.h(acc.x[k + 1] - acc.x[1]);
    }
    ladder.eta[k] = params.sigma + level_term + params.delta * params.g(acc.arg_g[k]);
  }
  for (Eigen::Index k = 0; k < n; ++k)
    if (!(ladder.eta[k] > 0))
      throw NumericError("eta_ladder: volatility not positive at step " + std::to_string(k));
  return ladder;
}

CsyPath stock_path(const CsyParams& params, const IntensitySeries& intensity, double dt,
                   double s0) {
  validate(params);
  if (!(s0 > 0)) throw ValidationError("stock_path: s0 must be positive");
  const PathAccumulators acc = accumulate(intensity, dt, params.h, params.g);
  const Eigen::Index n = intensity.xi.size();
  const double sdt = std::sqrt(dt);
  CsyPath path;
  path.s.resize(n + 1);
  path.step_returns.resize(n);
  for (Eigen::Index k = 0; k <= n; ++k) {
    const double exponent = params.nu * (static_cast<double>(k) * dt) +
                            params.sigma * acc.x[k] + params.gamma * acc.y[k] +
                            params.delta * acc.v[k];
    path.s[k] = s0 * std::exp(exponent);
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double state_vol = params.sigma + params.gamma * params.h(acc.arg_h[k]) +
                             params.delta * params.g(acc.arg_g[k]);
    path.step_returns[k] = params.nu * dt + sdt * intensity.xi[k] * state_vol;
  }
  return path;
}

SdeCoefficients sde_coefficients(const CsyParams& params, const FilterState& state, double r) {
  validate(params);
  const double h = state.h_val;
  const double g = state.g_val;
  SdeCoefficients c;
  c.n2 = params.sigma + params.gamma * h + params.delta * g;
  c.n1 = params.nu + 0.5 * params.sigma * params.sigma +
         0.5 * params.gamma * params.gamma * h * h + 0.5 * params.delta * params.delta * g * g +
         params.sigma * params.gamma * h + params.sigma * params.delta * g +
         params.gamma * params.delta * h * g;
  if (!(c.n2 > 0))
    throw NumericError("sde_coefficients: diffusion coefficient must be positive");
  c.theta = (c.n1 - r) / c.n2;
  return c;
}

ContinuumPath euler_csy_path(const CsyParams& params, double s0, double dt,
                             const Eigen::ArrayXd& db) {
  validate(params);
  if (!(s0 > 0)) throw ValidationError("euler_csy_path: s0 must be positive");
  if (!(dt > 0)) throw ValidationError("euler_csy_path: dt must be positive");
  const Eigen::Index n = db.size();
  if (n == 0) throw ValidationError("euler_csy_path: empty increment series");
  ContinuumPath path;
  path.t.resize(n + 1);
  path.b = Eigen::ArrayXd::Zero(n + 1);
  path.c = Eigen::ArrayXd::Zero(n + 1);
  path.g = Eigen::ArrayXd::Zero(n + 1);
  path.s.resize(n + 1);
  double area = 0;  // running integral of b, left-point
  for (Eigen::Index k = 0; k < n; ++k) {
    path.c[k + 1] = path.c[k] + params.h(path.b[k]) * db[k];
    path.g[k + 1] = path.g[k] + params.g(area) * db[k];
    area += path.b[k] * dt;
    path.b[k + 1] = path.b[k] + db[k];
  }
  for (Eigen::Index k = 0; k <= n; ++k) {
    path.t[k] = static_cast<double>(k) * dt;
    path.s[k] = s0 * std::exp(params.nu * path.t[k] + params.sigma * path.b[k] +
                              params.gamma * path.c[k] + params.delta * path.g[k]);
  }
  return path;
}

ContinuumPath simulate_continuum(const CsyParams& params, double s0, double maturity,
                                 int n_steps, std::uint64_t seed) {
  if (!(maturity > 0)) throw ValidationError("simulate_continuum: maturity must be positive");
  if (n_steps < 1) throw ValidationError("simulate_continuum: n_steps must be at least 1");
  const double dt = maturity / n_steps;
  Rng rng(seed);
  Eigen::ArrayXd db(n_steps);
  const double sdt = std::sqrt(dt);
  for (int k = 0; k < n_steps; ++k) db[k] = sdt * rng.normal();
  return euler_csy_path(params, s0, dt, db);
}

std::vector<BandpassTrace> bandpass_experiment(const IntensitySeries& intensity, double dt,
                                               const std::vector<double>& bandwidths) {
  if (bandwidths.empty()) throw ValidationError("bandpass_experiment: empty bandwidth list");
  std::vector<BandpassTrace> traces;
  traces.reserve(bandwidths.size());
  for (const double bw : bandwidths) {
    const PathAccumulators acc =
        accumulate(intensity, dt, Filter::constant(0), Filter::gaussian(bw));
    BandpassTrace trace;
    trace.bandwidth = bw;
    trace.v = acc.v;
    trace.max_abs = acc.v.abs().maxCoeff();
    traces.push_back(std::move(trace));
  }
  return traces;
}

}  // namespace binlat
