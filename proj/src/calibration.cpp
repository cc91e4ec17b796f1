#include "binlat/calibration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "binlat/errors.hpp"
#include "binlat/optimize.hpp"
#include "binlat/rng.hpp"

namespace binlat {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Squared-relative-error window within which two implied-q roots count as the
// same quality of fit; both then reprice the quote to about 1e-7.
constexpr double kQTieWindow = 1e-14;

}  // namespace

PFromQ p_from_q(double q, double theta, double dt) {
  if (!(q > 0 && q < 1)) throw ValidationError("p_from_q: q must lie in (0,1)");
  if (!(dt > 0)) throw ValidationError("p_from_q: dt must be positive");
  PFromQ out;
  out.p = q + std::abs(theta) * std::sqrt(q * (1.0 - q) * dt) +
          (0.5 - q) * theta * theta * dt;
  if (!(out.p > 0 && out.p < 1)) {
    out.p = std::clamp(out.p, 1e-12, 1.0 - 1e-12);
    out.clamped = true;
  }
  return out;
}

int trading_steps(const Date& quote_date, const Date& expiry) {
  const long long days = days_from_civil(expiry) - days_from_civil(quote_date);
  if (days <= 0) throw ValidationError("trading_steps: expiry must postdate the quote date");
  const long long steps =
      std::llround(static_cast<double>(days) * 252.0 / 365.25);
  return static_cast<int>(std::max(steps, 1ll));
}

const char* to_string(CellStatus status) {
  switch (status) {
    case CellStatus::ok: return "ok";
    case CellStatus::clamped: return "clamped";
    case CellStatus::bound_violation: return "bound_violation";
    case CellStatus::no_convergence: return "no_convergence";
    case CellStatus::unidentified: return "unidentified";
    case CellStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

const char* to_string(SurfaceGrid::Kind kind) {
  switch (kind) {
    case SurfaceGrid::Kind::q: return "q";
    case SurfaceGrid::Kind::p: return "p";
    case SurfaceGrid::Kind::dev: return "dev";
    case SurfaceGrid::Kind::lambda: return "lambda";
    case SurfaceGrid::Kind::price: return "price";
  }
  return "unknown";
}

namespace {

bool within_no_arb_band(const OptionQuote& quote, double s0, double r, double maturity) {
  const double df = std::exp(-r * maturity);
  double lower, upper;
  if (quote.kind == OptionKind::call) {
    lower = std::max(s0 - quote.strike * df, 0.0);
    upper = s0;
  } else {
    lower = std::max(quote.strike * df - s0, 0.0);
    upper = quote.strike * df;
  }
  return quote.price > lower && quote.price < upper;
}

// Constant-q tree price; the step exponents are rebuilt from the p implied by
// the candidate q so the measure change stays consistent with the geometry.
double tree_price_for_q(const OptionQuote& quote, double s0, const MarketParams& params,
                        double q, int n_steps, double dt) {
  const double p = p_from_q(q, params.theta(), dt).p;
  OneStepMove move = raw_step_move(params, p, dt);
  move.q_exact = q;
  move.q_approx = q;
  const TimeGrid grid = uniform_grid(n_steps * dt, n_steps);
  const Lattice lattice =
      Lattice::from_moves(grid, params, std::vector<OneStepMove>(n_steps, move), s0,
                          Measure::risk_neutral_approx);
  OptionSpec spec;
  spec.kind = quote.kind;
  spec.strike = quote.strike;
  spec.maturity = grid.maturity();
  PricingOptions popts;
  popts.store_ladders = false;
  return price_backward_induction(lattice, spec, params.r, popts).value;
}

}  // namespace

SurfaceGrid implied_q_surface(const OptionChain& chain, double s0, const MarketParams& params,
                              const ImpliedQOptions& options) {
  validate(params);
  if (!(s0 > 0)) throw ValidationError("implied_q_surface: s0 must be positive");
  if (options.scan_points < 4)
    throw ValidationError("implied_q_surface: scan_points must be at least 4");
  SurfaceGrid grid;
  grid.kind = SurfaceGrid::Kind::q;
  grid.cells.reserve(chain.quotes.size());
  for (const OptionQuote& quote : chain.quotes) {
    SurfaceCell cell;
    cell.moneyness = quote.strike / s0;
    cell.maturity_steps = trading_steps(chain.quote_date, quote.expiry);
    const double maturity = cell.maturity_steps * options.dt;
    if (!within_no_arb_band(quote, s0, params.r, maturity)) {
      cell.value = kNaN;
      cell.status = CellStatus::bound_violation;
      grid.cells.push_back(cell);
      continue;
    }
    const auto objective = [&](double q) {
      const double model = tree_price_for_q(quote, s0, params, q, cell.maturity_steps,
                                            options.dt);
      const double rel = (model - quote.price) / quote.price;
      return rel * rel;
    };
    const int m = options.scan_points;
    std::vector<double> qs(static_cast<std::size_t>(m));
    std::vector<double> fs(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
      qs[static_cast<std::size_t>(i)] =
          options.q_eps + (1.0 - 2.0 * options.q_eps) * i / (m - 1);
      fs[static_cast<std::size_t>(i)] = objective(qs[static_cast<std::size_t>(i)]);
    }
    // The map q -> price folds back on itself, so an exactly repriceable quote
    // has several roots. Refine every scan basin; among near-exact ties report
    // the root nearest 1/2, the regime the O(dt) inversion behind the tree
    // geometry assumes. Distinct minima still resolve to the global one.
    struct Root {
      double q = 0;
      double f = 0;
      int scan_index = 0;
    };
    std::vector<Root> roots;
    for (int i = 0; i < m; ++i) {
      const bool left_ok = i == 0 || fs[static_cast<std::size_t>(i)] <= fs[static_cast<std::size_t>(i - 1)];
      const bool right_ok =
          i == m - 1 || fs[static_cast<std::size_t>(i)] <= fs[static_cast<std::size_t>(i + 1)];
      if (!left_ok || !right_ok) continue;
      const double lo = qs[static_cast<std::size_t>(std::max(i - 1, 0))];
      const double hi = qs[static_cast<std::size_t>(std::min(i + 1, m - 1))];
      const GoldenSectionResult res = golden_section(objective, lo, hi, options.q_tol);
      roots.push_back(Root{res.x, res.f, i});
    }
    double best_f = std::numeric_limits<double>::infinity();
    for (const Root& root : roots) best_f = std::min(best_f, root.f);
    const Root* chosen = nullptr;
    for (const Root& root : roots) {
      if (root.f > best_f + kQTieWindow) continue;
      if (chosen == nullptr || std::abs(root.q - 0.5) < std::abs(chosen->q - 0.5)) chosen = &root;
    }
    cell.value = chosen->q;
    cell.status = (chosen->scan_index == 0 || chosen->scan_index == m - 1)
                      ? CellStatus::no_convergence
                      : CellStatus::ok;
    grid.cells.push_back(cell);
  }
  return grid;
}

SurfaceGrid p_surface_from_q(const SurfaceGrid& q_surface, const MarketParams& params,
                             double dt) {
  if (q_surface.kind != SurfaceGrid::Kind::q)
    throw ValidationError("p_surface_from_q: input grid must carry q values");
  validate(params);
  SurfaceGrid out;
  out.kind = SurfaceGrid::Kind::p;
  out.maturity_unit = q_surface.maturity_unit;
  out.cells.reserve(q_surface.cells.size());
  for (const SurfaceCell& qc : q_surface.cells) {
    SurfaceCell cell = qc;
    if (qc.status == CellStatus::ok || qc.status == CellStatus::clamped) {
      const PFromQ pf = p_from_q(qc.value, params.theta(), dt);
      cell.value = pf.p;
      cell.status = pf.clamped ? CellStatus::clamped : qc.status;
    } else {
      cell.value = kNaN;
    }
    out.cells.push_back(cell);
  }
  return out;
}

SurfaceGrid model_price_surface(const OptionChain& chain, double s0, const MarketParams& params,
                                double p_natural, Measure measure, double dt) {
  validate(params);
  if (!(s0 > 0)) throw ValidationError("model_price_surface: s0 must be positive");
  if (!(p_natural > 0 && p_natural < 1))
    throw ValidationError("model_price_surface: p must lie in (0,1)");
  SurfaceGrid grid;
  grid.kind = SurfaceGrid::Kind::price;
  grid.cells.reserve(chain.quotes.size());
  UpturnModel upturn;
  upturn.p0 = p_natural;
  for (const OptionQuote& quote : chain.quotes) {
    SurfaceCell cell;
    cell.moneyness = quote.strike / s0;
    cell.maturity_steps = trading_steps(chain.quote_date, quote.expiry);
    const TimeGrid time_grid = uniform_grid(cell.maturity_steps * dt, cell.maturity_steps);
    const Lattice lattice = Lattice::build(time_grid, params, upturn, s0, measure);
    OptionSpec spec;
    spec.kind = quote.kind;
    spec.strike = quote.strike;
    spec.maturity = time_grid.maturity();
    PricingOptions popts;
    popts.store_ladders = false;
    popts.allow_natural = measure == Measure::natural;
    cell.value = price_backward_induction(lattice, spec, params.r, popts).value;
    cell.status = CellStatus::ok;
    grid.cells.push_back(cell);
  }
  return grid;
}

SurfaceGrid dev_surface(const SurfaceGrid& model_prices, const OptionChain& chain, double s0,
                        double r, double dt) {
  if (model_prices.kind != SurfaceGrid::Kind::price)
    throw ValidationError("dev_surface: first grid must carry model prices");
  if (model_prices.cells.size() != chain.quotes.size())
    throw ValidationError("dev_surface: price grid and chain disagree on quote count");
  SurfaceGrid out;
  out.kind = SurfaceGrid::Kind::dev;
  out.cells.reserve(chain.quotes.size());
  for (std::size_t i = 0; i < chain.quotes.size(); ++i) {
    const OptionQuote& quote = chain.quotes[i];
    const SurfaceCell& model_cell = model_prices.cells[i];
    SurfaceCell cell;
    cell.moneyness = model_cell.moneyness;
    cell.maturity_steps = model_cell.maturity_steps;
    cell.value = kNaN;
    if (model_cell.status != CellStatus::ok) {
      cell.status = model_cell.status;
      out.cells.push_back(cell);
      continue;
    }
    const double maturity = cell.maturity_steps * dt;
    try {
      const double iv_model =
          implied_vol(quote.kind, model_cell.value, s0, quote.strike, maturity, r);
      const double iv_market =
          implied_vol(quote.kind, quote.price, s0, quote.strike, maturity, r);
      cell.value = (iv_model - iv_market) / iv_model;
      cell.status = CellStatus::ok;
    } catch (const ValidationError&) {
      cell.status = CellStatus::bound_violation;
    } catch (const NumericError&) {
      cell.status = CellStatus::no_convergence;
    }
    out.cells.push_back(cell);
  }
  return out;
}

SurfaceGrid implied_lambda_surface(const OptionChain& chain, double s0, const CsyParams& params,
                                   const IntensitySeries& intensity, double r,
                                   const ImpliedLambdaOptions& options) {
  validate(params);
  if (!(s0 > 0)) throw ValidationError("implied_lambda_surface: s0 must be positive");
  if (options.scan_points < 4)
    throw ValidationError("implied_lambda_surface: scan_points must be at least 4");
  const double lambda_cap = 0.99 / std::sqrt(options.dt);
  const double lambda_hi = std::min(options.lambda_hi, lambda_cap);
  if (!(options.lambda_lo > 0 && options.lambda_lo < lambda_hi))
    throw ValidationError("implied_lambda_surface: need 0 < lambda_lo < lambda_hi");

  SurfaceGrid grid;
  grid.kind = SurfaceGrid::Kind::lambda;
  grid.cells.reserve(chain.quotes.size());
  for (const OptionQuote& quote : chain.quotes) {
    SurfaceCell cell;
    cell.moneyness = quote.strike / s0;
    cell.maturity_steps = trading_steps(chain.quote_date, quote.expiry);
    cell.value = kNaN;
    const int n = cell.maturity_steps;

    ConditionalTreeInputs inputs;
    inputs.params = params;
    inputs.intensity = intensity;
    inputs.eta_indexing = options.eta_indexing;
    inputs.s0 = s0;
    inputs.r_steps = {r};
    inputs.tree = options.tree;
    inputs.pricing.store_ladders = false;
    OptionSpec spec;
    spec.kind = quote.kind;
    spec.strike = quote.strike;

    const auto price_at = [&](double lambda) {
      ConditionalTreeInputs local = inputs;
      local.trader.lambda = lambda;
      return price_informed(local, spec).value;
    };

    try {
      inputs.grid = uniform_grid(n * options.dt, n);
      spec.maturity = inputs.grid.maturity();
      if (intensity.xi.size() < n)
        throw ValidationError("implied_lambda_surface: intensity series shorter than maturity");

      const auto objective = [&](double lambda) {
        const double rel = (price_at(lambda) - quote.price) / quote.price;
        return rel * rel;
      };

      // geometric scan: the identifiable lambda range spans orders of magnitude
      std::vector<double> scan;
      scan.push_back(0.0);
      const int m = options.scan_points - 1;
      const double ratio = std::pow(lambda_hi / options.lambda_lo, 1.0 / (m - 1));
      double lam = options.lambda_lo;
      for (int i = 0; i < m; ++i, lam *= ratio) scan.push_back(std::min(lam, lambda_hi));

      int best_i = 0;
      double best_f = std::numeric_limits<double>::infinity();
      double worst_f = -std::numeric_limits<double>::infinity();
      std::vector<double> values(scan.size());
      for (std::size_t i = 0; i < scan.size(); ++i) {
        values[i] = objective(scan[i]);
        if (values[i] < best_f) {
          best_f = values[i];
          best_i = static_cast<int>(i);
        }
        worst_f = std::max(worst_f, values[i]);
      }
      if (worst_f - best_f < options.flat_tol) {
        cell.status = CellStatus::unidentified;
        grid.cells.push_back(cell);
        continue;
      }
      const std::size_t last = scan.size() - 1;
      const double lo = scan[static_cast<std::size_t>(std::max(best_i - 1, 0))];
      const double hi = scan[std::min(static_cast<std::size_t>(best_i) + 1, last)];
      const GoldenSectionResult res = golden_section(objective, lo, hi, options.lambda_tol);
      cell.value = res.x;
      cell.status = best_i == static_cast<int>(last) ? CellStatus::no_convergence
                                                     : CellStatus::ok;
    } catch (const ValidationError&) {
      cell.status = CellStatus::infeasible;
    } catch (const ArbitrageError&) {
      cell.status = CellStatus::infeasible;
    }
    grid.cells.push_back(cell);
  }
  return grid;
}

namespace {

// same unnormalized bell as Filter::gaussian; kept inline so the fit objective
// avoids a std::function call per sample
double gaussian_kernel(double x, double bandwidth) {
  const double u = x / bandwidth;
  return std::exp(-0.5 * u * u);
}

struct CsyFitWork {
  Eigen::ArrayXd returns;
  Eigen::ArrayXd xi;
  Eigen::ArrayXd arg_h;  // walk level entering each step
  Eigen::ArrayXd arg_g;  // walk area entering each step
  double dt = 0;
  double sdt = 0;
};

// z layout: [ln(nu - r), sigma, gamma, ln sigma_h, delta, ln sigma_g]
struct CsyBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

double csy_rmse(const CsyFitWork& work, double nu, double sigma, double gamma, double bh,
                double delta, double bg) {
  const Eigen::Index n = work.returns.size();
  double sse = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double vol = sigma + gamma * gaussian_kernel(work.arg_h[k], bh) +
                       delta * gaussian_kernel(work.arg_g[k], bg);
    const double model = nu * work.dt + work.sdt * work.xi[k] * vol;
    const double e = work.returns[k] - model;
    sse += e * e;
  }
  return std::sqrt(sse / static_cast<double>(n));
}

double csy_rmse_z(const CsyFitWork& work, const Eigen::VectorXd& z, double r) {
  return csy_rmse(work, r + std::exp(z[0]), z[1], z[2], std::exp(z[3]), z[4], std::exp(z[5]));
}

// Coefficients are linear given bandwidths; ordinary least squares on
// [dt, sdt xi, sdt xi h, sdt xi g] seeds the simplex well inside the basin.
bool csy_ols(const CsyFitWork& work, double bh, double bg, double* nu, double* sigma,
             double* gamma, double* delta) {
  const Eigen::Index n = work.returns.size();
  Eigen::MatrixXd x(n, 4);
  for (Eigen::Index k = 0; k < n; ++k) {
    x(k, 0) = work.dt;
    x(k, 1) = work.sdt * work.xi[k];
    x(k, 2) = work.sdt * work.xi[k] * gaussian_kernel(work.arg_h[k], bh);
    x(k, 3) = work.sdt * work.xi[k] * gaussian_kernel(work.arg_g[k], bg);
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < 4) return false;
  const Eigen::VectorXd coef = qr.solve(work.returns.matrix());
  *nu = coef[0];
  *sigma = coef[1];
  *gamma = coef[2];
  *delta = coef[3];
  return true;
}

Eigen::VectorXd csy_pack(const CsyBox& box, double r, double nu, double sigma, double gamma,
                         double bh, double delta, double bg) {
  Eigen::VectorXd z(6);
  z[0] = std::log(std::max(nu - r, 1e-12));
  z[1] = std::max(sigma, 0.0);
  z[2] = std::max(gamma, 0.0);
  z[3] = std::log(bh);
  z[4] = std::max(delta, 0.0);
  z[5] = std::log(bg);
  return clamp_box(z, box.lo, box.hi);
}

}  // namespace

Eigen::ArrayXd csy_fit_residuals(const Eigen::ArrayXd& returns,
                                 const IntensitySeries& intensity, double dt,
                                 const CsyParams& params) {
  validate(params, /*allow_zero_sigma=*/true);
  if (!(dt > 0)) throw ValidationError("csy_fit_residuals: dt must be positive");
  if (returns.size() != intensity.xi.size())
    throw ValidationError("csy_fit_residuals: returns and intensity length mismatch");
  const PathAccumulators acc = accumulate(intensity, dt, params.h, params.g);
  const Eigen::Index n = returns.size();
  const double sdt = std::sqrt(dt);
  Eigen::ArrayXd resid(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double vol = params.sigma + params.gamma * params.h(acc.arg_h[k]) +
                       params.delta * params.g(acc.arg_g[k]);
    resid[k] = returns[k] - params.nu * dt - sdt * intensity.xi[k] * vol;
  }
  return resid;
}

CsyFit fit_csy(const Eigen::ArrayXd& returns, const IntensitySeries& intensity,
               const CsyFitOptions& options) {
  const Eigen::Index n = returns.size();
  if (n < 16) throw ValidationError("fit_csy: need at least 16 observations");
  if (intensity.xi.size() != n)
    throw ValidationError("fit_csy: returns and intensity length mismatch");
  if (!(options.dt > 0)) throw ValidationError("fit_csy: dt must be positive");
  if (!(options.bw_lo > 0 && options.bw_lo < options.bw_hi))
    throw ValidationError("fit_csy: need 0 < bw_lo < bw_hi");
  if (options.grid_per_axis < 2 || options.n_starts < 1)
    throw ValidationError("fit_csy: grid_per_axis >= 2 and n_starts >= 1 required");
  const double sd = std::sqrt((returns - returns.mean()).square().sum() /
                              static_cast<double>(n - 1));
  if (!(sd > 0)) throw ValidationError("fit_csy: degenerate constant returns");

  CsyFitWork work;
  work.returns = returns;
  work.xi = intensity.xi;
  work.dt = options.dt;
  work.sdt = std::sqrt(options.dt);
  {
    const PathAccumulators acc =
        accumulate(intensity, options.dt, Filter::constant(0), Filter::constant(0));
    work.arg_h = acc.arg_h.head(n);
    work.arg_g = acc.arg_g.head(n);
  }

  CsyBox box;
  box.lo.resize(6);
  box.hi.resize(6);
  box.lo << std::log(1e-12), 0.0, 0.0, std::log(options.bw_lo), 0.0, std::log(options.bw_lo);
  box.hi << std::log(10.0), options.coef_hi, options.coef_hi, std::log(options.bw_hi),
      options.coef_hi, std::log(options.bw_hi);

  const auto objective = [&](const Eigen::VectorXd& z) {
    return csy_rmse_z(work, clamp_box(z, box.lo, box.hi), options.r);
  };

  // deterministic bandwidth grid, inner least squares per cell
  double best_grid_rmse = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_grid_z;
  const int g_axis = options.grid_per_axis;
  const double log_lo = std::log(options.bw_lo);
  const double log_hi = std::log(options.bw_hi);
  for (int i = 0; i < g_axis; ++i) {
    const double bh = std::exp(log_lo + (log_hi - log_lo) * i / (g_axis - 1));
    for (int j = 0; j < g_axis; ++j) {
      const double bg = std::exp(log_lo + (log_hi - log_lo) * j / (g_axis - 1));
      double nu, sigma, gamma, delta;
      if (!csy_ols(work, bh, bg, &nu, &sigma, &gamma, &delta)) continue;
      const Eigen::VectorXd z = csy_pack(box, options.r, nu, sigma, gamma, bh, delta, bg);
      const double rmse = csy_rmse_z(work, z, options.r);
      if (rmse < best_grid_rmse) {
        best_grid_rmse = rmse;
        best_grid_z = z;
      }
    }
  }
  if (best_grid_z.size() == 0)
    throw NumericError("fit_csy: every bandwidth grid cell was rank-deficient");

  std::vector<Eigen::VectorXd> starts;
  starts.push_back(best_grid_z);
  for (int s = 1; s < options.n_starts; ++s) {
    Rng rng(derive_stream(options.seed, static_cast<std::uint64_t>(s)));
    const double bh = std::exp(log_lo + (log_hi - log_lo) * rng.uniform01());
    const double bg = std::exp(log_lo + (log_hi - log_lo) * rng.uniform01());
    double nu, sigma, gamma, delta;
    if (!csy_ols(work, bh, bg, &nu, &sigma, &gamma, &delta)) continue;
    starts.push_back(csy_pack(box, options.r, nu, sigma, gamma, bh, delta, bg));
  }

  NelderMeadOptions nm;
  nm.max_iter = options.max_iter;
  nm.f_tol = options.f_tol;
  nm.init_step = 0.25;

  struct Candidate {
    Eigen::VectorXd z;
    double rmse = 0;
    bool converged = false;
    int start = -1;
  };
  std::vector<Candidate> candidates;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    const NelderMeadResult res = nelder_mead(objective, starts[s], nm);
    Candidate c;
    c.z = clamp_box(res.x, box.lo, box.hi);
    c.rmse = res.f;
    c.converged = res.converged;
    c.start = static_cast<int>(s);
    candidates.push_back(std::move(c));
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.rmse != b.rmse) return a.rmse < b.rmse;
    return a.start < b.start;
  });
  const Candidate& best = candidates.front();

  CsyFit fit;
  fit.params.nu = options.r + std::exp(best.z[0]);
  fit.params.sigma = best.z[1];
  fit.params.gamma = best.z[2];
  fit.params.delta = best.z[4];
  fit.params.h = Filter::gaussian(std::exp(best.z[3]));
  fit.params.g = Filter::gaussian(std::exp(best.z[5]));
  fit.rmse = best.rmse;
  fit.converged = best.converged;
  fit.best_start = best.start;

  const char* names[6] = {"nu", "sigma", "gamma", "sigma_h", "delta", "sigma_g"};
  for (int i = 0; i < 6; ++i) {
    const double span = box.hi[i] - box.lo[i];
    if (best.z[i] <= box.lo[i] + 1e-9 * span || best.z[i] >= box.hi[i] - 1e-9 * span)
      fit.boundary_flags.push_back(names[i]);
  }

  for (std::size_t i = 1; i < candidates.size(); ++i) {
    const Candidate& c = candidates[i];
    if (c.rmse > best.rmse * (1.0 + options.alternate_rel)) continue;
    bool duplicate = false;
    // compare in z space so bandwidth ratios, not differences, decide novelty
    if ((c.z - best.z).cwiseAbs().maxCoeff() < 1e-3) duplicate = true;
    for (const CsyFitAlternate& seen : fit.alternates) {
      Eigen::VectorXd zs(6);
      zs << std::log(std::max(seen.nu - options.r, 1e-12)), seen.sigma, seen.gamma,
          std::log(seen.sigma_h), seen.delta, std::log(seen.sigma_g);
      if ((c.z - zs).cwiseAbs().maxCoeff() < 1e-3) duplicate = true;
    }
    if (duplicate) continue;
    CsyFitAlternate alt;
    alt.nu = options.r + std::exp(c.z[0]);
    alt.sigma = c.z[1];
    alt.gamma = c.z[2];
    alt.sigma_h = std::exp(c.z[3]);
    alt.delta = c.z[4];
    alt.sigma_g = std::exp(c.z[5]);
    alt.rmse = c.rmse;
    fit.alternates.push_back(alt);
  }
  return fit;
}

}  // namespace binlat
