#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "binlat/csy.hpp"
#include "binlat/informed.hpp"
#include "binlat/lattice.hpp"
#include "binlat/market_data.hpp"

namespace binlat {

struct PFromQ {
  double p = 0;
  bool clamped = false;
};

// Inverts the small-step risk-neutral map back to a natural upturn probability:
//   p = q + |theta| sqrt(q (1-q) dt) + (1/2 - q) theta^2 dt.
// Out-of-range results are clamped into (0,1) with the flag set.
PFromQ p_from_q(double q, double theta, double dt);

// Calendar interval to trading steps: round(days * 252 / 365.25), at least 1.
int trading_steps(const Date& quote_date, const Date& expiry);

enum class CellStatus { ok, clamped, bound_violation, no_convergence, unidentified, infeasible };
const char* to_string(CellStatus status);

struct SurfaceCell {
  double moneyness = 0;     // strike / s0
  int maturity_steps = 0;   // trading days to expiry
  double value = 0;         // NaN unless status is ok or clamped
  CellStatus status = CellStatus::ok;
};

struct SurfaceGrid {
  enum class Kind { q, p, dev, lambda, price };
  Kind kind = Kind::q;
  std::string maturity_unit = "trading_days";
  std::vector<SurfaceCell> cells;  // chain order
};

const char* to_string(SurfaceGrid::Kind kind);

struct ImpliedQOptions {
  double dt = 1.0 / 252.0;
  int scan_points = 64;
  double q_tol = 1e-8;
  double q_eps = 1e-6;  // search interval is [q_eps, 1 - q_eps]
};

// Per-quote risk-neutral upturn probability: the tree reprices the quote under
// a constant q, with the step exponents rebuilt from p_from_q(q) so geometry
// and measure stay consistent. Because the geometry moves with q, several q
// can reprice one quote exactly; near-ties resolve to the root nearest 1/2.
// Quotes violating static no-arbitrage bounds are marked rather than fitted.
SurfaceGrid implied_q_surface(const OptionChain& chain, double s0, const MarketParams& params,
                              const ImpliedQOptions& options = {});

// Natural upturn surface implied by a q surface.
SurfaceGrid p_surface_from_q(const SurfaceGrid& q_surface, const MarketParams& params,
                             double dt = 1.0 / 252.0);

// Tree prices for every quote in the chain under the given measure.
SurfaceGrid model_price_surface(const OptionChain& chain, double s0, const MarketParams& params,
                                double p_natural, Measure measure, double dt = 1.0 / 252.0);

// Deviation of model from market in implied-volatility space:
//   dev = (iv_model - iv_market) / iv_model.
// Prices outside the no-arbitrage band get bound_violation status.
SurfaceGrid dev_surface(const SurfaceGrid& model_prices, const OptionChain& chain, double s0,
                        double r, double dt = 1.0 / 252.0);

struct ImpliedLambdaOptions {
  double dt = 1.0 / 252.0;
  EtaIndexing eta_indexing = EtaIndexing::previsible;
  int scan_points = 48;
  double lambda_lo = 1e-8;  // geometric scan floor (0 is always probed as well)
  double lambda_hi = 1.0;
  double lambda_tol = 1e-10;
  double flat_tol = 1e-18;  // objective range below this is reported unidentified
  TreeBuildOptions tree;
};

// Signal strength per quote that makes the informed price match the market.
// Maturities beyond the tree enumeration cap come back infeasible; quotes the
// model cannot move toward come back unidentified or no_convergence.
SurfaceGrid implied_lambda_surface(const OptionChain& chain, double s0, const CsyParams& params,
                                   const IntensitySeries& intensity, double r,
                                   const ImpliedLambdaOptions& options = {});

struct CsyFitOptions {
  double dt = 1.0;  // returns and fitted coefficients share this time unit
  double r = 0;     // growth-rate floor; nu is searched as r + exp(x)
  int n_starts = 8;
  std::uint64_t seed = 1;
  int grid_per_axis = 8;  // deterministic bandwidth grid for initialization
  double bw_lo = 1e-2;
  double bw_hi = 1e6;
  double coef_hi = 1e3;  // upper box bound for sigma, gamma, delta
  int max_iter = 4000;
  double f_tol = 1e-12;
  double alternate_rel = 0.01;  // report solutions within this relative rmse of the best
};

struct CsyFitAlternate {
  double nu = 0;
  double sigma = 0;
  double gamma = 0;
  double sigma_h = 0;
  double delta = 0;
  double sigma_g = 0;
  double rmse = 0;
};

struct CsyFit {
  CsyParams params;  // gaussian filters at the fitted bandwidths
  double rmse = 0;
  bool converged = false;
  int best_start = -1;
  std::vector<std::string> boundary_flags;  // parameters pinned at their box edge
  std::vector<CsyFitAlternate> alternates;  // near-ties; the objective is multi-modal
};

// One-step residuals of the path-dependent return model at given parameters.
Eigen::ArrayXd csy_fit_residuals(const Eigen::ArrayXd& returns,
                                 const IntensitySeries& intensity, double dt,
                                 const CsyParams& params);

// Least-squares fit of (nu, sigma, gamma, sigma_h, delta, sigma_g). Bandwidth
// grids plus inner least squares seed a simplex polish; coefficients are linear
// given bandwidths, which the initialization exploits.
CsyFit fit_csy(const Eigen::ArrayXd& returns, const IntensitySeries& intensity,
               const CsyFitOptions& options = {});

}  // namespace binlat
