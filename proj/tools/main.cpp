// Command-line front end. Every subcommand reads a declarative config (JSON
// file and/or flags, flags win), writes its artifacts atomically into one
// output directory, and drops a manifest.json recording the resolved config,
// its hash, and the code version, so a run can be reproduced from the
// directory alone. Exit codes: 0 success, 2 bad input, 3 numerical failure.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "binlat/artifacts.hpp"
#include "binlat/calibration.hpp"
#include "binlat/convergence.hpp"
#include "binlat/csv.hpp"
#include "binlat/csy.hpp"
#include "binlat/errors.hpp"
#include "binlat/factors.hpp"
#include "binlat/informed.hpp"
#include "binlat/lattice.hpp"
#include "binlat/market_data.hpp"
#include "binlat/rng.hpp"
#include "binlat/version.hpp"

namespace {

using namespace binlat;
using nlohmann::json;

std::string key_of(std::string flag) {
  while (!flag.empty() && flag.front() == '-') flag.erase(flag.begin());
  std::replace(flag.begin(), flag.end(), '-', '_');
  return flag;
}

// Ties CLI flags to config-file keys: every flag is mirrored by the key with
// dashes turned to underscores, a flag given on the command line overrides the
// file, and the fully resolved config (defaults included, seed included) is
// what the manifest records.
class Binder {
 public:
  Binder(CLI::App* cmd, std::string name) : cmd_(cmd), name_(std::move(name)) {
    cmd_->add_option("--config", config_path_,
                     "JSON config file; keys mirror the flags (flags override)");
    out_dir_ = "out/" + name_;
    out_opt_ = cmd_->add_option("--out", out_dir_, "artifact directory");
  }

  template <class T>
  void add(const std::string& flag, T& var, const std::string& desc, bool required = false) {
    CLI::Option* opt = cmd_->add_option(flag, var, desc);
    entries_.push_back(Entry{opt, key_of(flag), required,
                             [&var](const json& v) { var = v.get<T>(); },
                             [&var] { return json(var); }});
  }

  void add_flag(const std::string& flag, bool& var, const std::string& desc) {
    CLI::Option* opt = cmd_->add_flag(flag, var, desc);
    entries_.push_back(Entry{opt, key_of(flag), false,
                             [&var](const json& v) { var = v.get<bool>(); },
                             [&var] { return json(var); }});
  }

  // Overlay config under flags, enforce required fields, create the output
  // directory, and write the manifest before any artifact so a failed run
  // still documents what was attempted.
  void finish() {
    json cfg = json::object();
    if (!config_path_.empty()) {
      cfg = read_json_file(config_path_);
      if (!cfg.is_object())
        throw ValidationError(config_path_ + ": config root must be a JSON object");
      for (const auto& item : cfg.items()) {
        const std::string& key = item.key();
        if (key == "out") continue;
        const bool known = std::any_of(entries_.begin(), entries_.end(),
                                       [&](const Entry& e) { return e.key == key; });
        if (!known)
          throw ValidationError(name_ + ": unknown config key '" + key + "' in " + config_path_);
      }
      if (cfg.contains("out") && out_opt_->count() == 0) {
        try {
          out_dir_ = cfg.at("out").get<std::string>();
        } catch (const json::exception& ex) {
          throw ValidationError(name_ + ": config key 'out': " + ex.what());
        }
      }
    }
    for (Entry& e : entries_) {
      if (e.opt->count() == 0 && cfg.contains(e.key)) {
        try {
          e.from_config(cfg.at(e.key));
        } catch (const json::exception& ex) {
          throw ValidationError(name_ + ": config key '" + e.key + "': " + ex.what());
        }
      }
    }
    for (Entry& e : entries_) {
      if (e.required && e.opt->count() == 0 && !cfg.contains(e.key))
        throw ValidationError(name_ + ": missing required " + e.opt->get_name() +
                              " (config key '" + e.key + "')");
    }
    json resolved = json::object();
    for (Entry& e : entries_) resolved[e.key] = e.to_json();
    resolved["out"] = out_dir_;
    std::filesystem::create_directories(out_dir_);
    write_json_file(path("manifest.json"), make_manifest(name_, resolved));
  }

  std::string path(const std::string& file) const { return out_dir_ + "/" + file; }
  const std::string& out_dir() const { return out_dir_; }
  const std::string& name() const { return name_; }

 private:
  struct Entry {
    CLI::Option* opt;
    std::string key;
    bool required;
    std::function<void(const json&)> from_config;
    std::function<json()> to_json;
  };

  CLI::App* cmd_;
  std::string name_;
  std::string config_path_;
  std::string out_dir_;
  CLI::Option* out_opt_;
  std::vector<Entry> entries_;
};

json summary_skeleton(const Binder& binder) {
  json j;
  j["format_version"] = kArtifactFormatVersion;
  j["kind"] = "summary";
  j["command"] = binder.name();
  return j;
}

// ---- input parsing helpers ----------------------------------------------

LogReturnSeries load_returns_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  require_header(t, {"date", "log_return"}, path);
  LogReturnSeries out;
  out.r.resize(static_cast<Eigen::Index>(t.rows.size()));
  Eigen::Index k = 0;
  for (const auto& row : t.rows) {
    out.dates.push_back(parse_date(row[0]));
    out.r[k++] = parse_double_field(row[1], path);
  }
  for (std::size_t i = 1; i < out.dates.size(); ++i) {
    if (!(out.dates[i - 1] < out.dates[i]))
      throw ValidationError(path + ": dates must be strictly increasing");
  }
  return out;
}

OptionKind option_kind_from_string(const std::string& s) {
  if (s == "call") return OptionKind::call;
  if (s == "put") return OptionKind::put;
  throw ValidationError("option kind must be 'call' or 'put', got '" + s + "'");
}

QPolicy q_policy_from_string(const std::string& s) {
  if (s == "strict") return QPolicy::strict;
  if (s == "clamp") return QPolicy::clamp;
  throw ValidationError("q policy must be 'strict' or 'clamp', got '" + s + "'");
}

Interval interval_from_string(const std::string& s) {
  if (s == "week") return Interval::week;
  if (s == "month") return Interval::month;
  if (s == "year") return Interval::year;
  throw ValidationError("interval must be 'week', 'month', or 'year', got '" + s + "'");
}

EtaIndexing eta_indexing_from_string(const std::string& s) {
  if (s == "previsible") return EtaIndexing::previsible;
  if (s == "contemporaneous") return EtaIndexing::contemporaneous;
  throw ValidationError("eta indexing must be 'previsible' or 'contemporaneous', got '" + s +
                        "'");
}

ConvergenceCriterion::Kind criterion_kind_from_string(const std::string& s) {
  if (s == "ks") return ConvergenceCriterion::Kind::ks;
  if (s == "quantile_coupling") return ConvergenceCriterion::Kind::quantile_coupling;
  throw ValidationError("criterion must be 'ks' or 'quantile_coupling', got '" + s + "'");
}

// p <= 0 means "estimate from the data"; the resolved value is reported back.
IntensitySeries intensity_from_returns(const LogReturnSeries& returns, double dt, double p) {
  const CentralizedReturns centered = centralize(returns, dt);
  if (p > 0) {
    if (p >= 1) throw ValidationError("--p must lie in (0,1) or be 0 for the empirical value");
    return intensity(centered, p);
  }
  return intensity(centered);
}

json surface_stats(const SurfaceGrid& grid) {
  json j;
  j["n_cells"] = grid.cells.size();
  int n_ok = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (const SurfaceCell& cell : grid.cells) {
    if (cell.status != CellStatus::ok && cell.status != CellStatus::clamped) continue;
    ++n_ok;
    lo = std::min(lo, cell.value);
    hi = std::max(hi, cell.value);
  }
  j["n_valued"] = n_ok;
  if (n_ok > 0) {
    j["value_min"] = lo;
    j["value_max"] = hi;
  } else {
    j["value_min"] = nullptr;
    j["value_max"] = nullptr;
  }
  return j;
}

json reference_band(double lo, double hi, const std::string& note) {
  return json{{"lo", lo}, {"hi", hi}, {"note", note}};
}

// ---- subcommands ---------------------------------------------------------

struct IngestArgs {
  std::string prices;
  double dt = 1.0 / 252.0;
};

void run_ingest(const IngestArgs& a, const Binder& b) {
  const PriceSeries prices = load_price_series(a.prices);
  const LogReturnSeries returns = log_returns(prices);
  std::ostringstream os;
  os << "date,log_return\n";
  for (std::size_t k = 0; k < returns.dates.size(); ++k)
    os << to_string(returns.dates[k]) << ',' << format_double(returns.r[k]) << '\n';
  write_text_file(b.path("returns.csv"), os.str());

  const GbmEstimate est = estimate_gbm_params(returns, a.dt);
  json summary = summary_skeleton(b);
  summary["n_prices"] = prices.close.size();
  summary["n_returns"] = returns.r.size();
  summary["first_date"] = to_string(prices.dates.front());
  summary["last_date"] = to_string(prices.dates.back());
  summary["dt"] = a.dt;
  summary["mu_hat"] = est.mu_hat;
  summary["sigma_hat"] = est.sigma_hat;
  write_json_file(b.path("summary.json"), summary);
  std::cout << "ingest: " << returns.r.size() << " returns from " << prices.close.size()
            << " prices -> " << b.out_dir() << '\n';
}

struct EstimatePArgs {
  std::string returns;
  int window = 0;
};

void run_estimate_p(const EstimatePArgs& a, const Binder& b) {
  const LogReturnSeries returns = load_returns_csv(a.returns);
  const std::vector<WindowEstimate> estimates = rolling_upturn_probability(returns, a.window);
  std::ostringstream os;
  os << "window_end,p_hat,n_up,n_total\n";
  for (const WindowEstimate& e : estimates)
    os << to_string(e.window_end) << ',' << format_double(e.p_hat) << ',' << e.n_up << ','
       << e.n_total << '\n';
  write_text_file(b.path("p_hat.csv"), os.str());

  json summary = summary_skeleton(b);
  summary["window"] = a.window;
  summary["n_windows"] = estimates.size();
  if (!estimates.empty()) {
    double lo = 1, hi = 0;
    for (const WindowEstimate& e : estimates) {
      lo = std::min(lo, e.p_hat);
      hi = std::max(hi, e.p_hat);
    }
    summary["p_hat_min"] = lo;
    summary["p_hat_max"] = hi;
  }
  write_json_file(b.path("summary.json"), summary);
  std::cout << "estimate-p: " << estimates.size() << " windows -> " << b.out_dir() << '\n';
}

struct SignTestArgs {
  std::string returns;
  std::string interval = "week";
  double p0 = 0.5;
};

void run_sign_test(const SignTestArgs& a, const Binder& b) {
  const LogReturnSeries returns = load_returns_csv(a.returns);
  const std::vector<IntervalSignTest> tests =
      interval_sign_tests(returns, interval_from_string(a.interval), a.p0);
  std::ostringstream os;
  os << "start,end,n_up,n_total,p_value\n";
  int n_rejected = 0;
  double min_p = 1;
  for (const IntervalSignTest& t : tests) {
    os << to_string(t.start) << ',' << to_string(t.end) << ',' << t.n_up << ',' << t.n_total
       << ',' << format_double(t.p_value) << '\n';
    if (t.p_value < 0.05) ++n_rejected;
    min_p = std::min(min_p, t.p_value);
  }
  write_text_file(b.path("sign_tests.csv"), os.str());

  json summary = summary_skeleton(b);
  summary["interval"] = a.interval;
  summary["p0"] = a.p0;
  summary["n_intervals"] = tests.size();
  summary["n_rejected_5pct"] = n_rejected;
  summary["min_p_value"] = min_p;
  write_json_file(b.path("summary.json"), summary);
  std::cout << "sign-test: " << tests.size() << " intervals, " << n_rejected
            << " with p < 0.05 -> " << b.out_dir() << '\n';
}

struct PriceArgs {
  double s0 = 0, strike = 0, maturity = 1, mu = 0, sigma = 0, r = 0;
  double p0 = 0.5, p1 = 0, p2 = 0;
  int n = 252;
  std::string kind = "call";
  std::string measure = "risk_neutral_exact";
  std::string q_policy = "strict";
  bool store_ladders = false;
  bool emit_lattice = false;
  bool allow_natural = false;
};

void run_price(const PriceArgs& a, const Binder& b) {
  MarketParams mp;
  mp.mu = a.mu;
  mp.sigma = a.sigma;
  mp.r = a.r;
  UpturnModel upturn;
  upturn.p0 = a.p0;
  upturn.p1 = a.p1;
  upturn.p2 = a.p2;
  TreeBuildOptions topt;
  topt.q_policy = q_policy_from_string(a.q_policy);
  const Lattice lattice = Lattice::build(uniform_grid(a.maturity, a.n), mp, upturn, a.s0,
                                         measure_from_string(a.measure), topt);
  OptionSpec spec;
  spec.kind = option_kind_from_string(a.kind);
  spec.strike = a.strike;
  spec.maturity = lattice.grid().maturity();
  PricingOptions popt;
  popt.store_ladders = a.store_ladders;
  popt.allow_natural = a.allow_natural;
  const PriceResult result = price_backward_induction(lattice, spec, a.r, popt);

  json j = price_result_to_json(result);
  j["measure"] = a.measure;
  j["steps"] = a.n;
  j["recombining"] = lattice.recombining();
  j["clamp_count"] = lattice.clamp_count();
  j["bsm_value"] = bsm_price(spec.kind, a.s0, a.strike, a.maturity, a.r, a.sigma);
  write_json_file(b.path("price.json"), j);
  if (a.emit_lattice) write_json_file(b.path("lattice.json"), lattice_to_json(lattice));
  std::cout << "price: value " << format_double(result.value) << " (n=" << a.n << ", "
            << a.measure << ") -> " << b.out_dir() << '\n';
}

struct ConvergePArgs {
  std::vector<double> p_grid;
  double mu = 0.08, sigma = 0.2, r = 0.02, maturity = 1;
  std::string criterion = "ks";
  double threshold = 1e-3, u_trim = 5e-3, u_step = 5e-3;
  long long cap = 1000000;
};

ConvergenceCriterion make_criterion(const std::string& kind, double threshold, double u_trim,
                                    double u_step) {
  ConvergenceCriterion crit;
  crit.kind = criterion_kind_from_string(kind);
  crit.threshold = threshold;
  crit.u_trim = u_trim;
  crit.u_step = u_step;
  return crit;
}

void run_converge_p(const ConvergePArgs& a, const Binder& b) {
  std::vector<double> grid = a.p_grid;
  if (grid.empty())
    for (int i = 1; i <= 19; ++i) grid.push_back(i * 0.05);
  MarketParams mp;
  mp.mu = a.mu;
  mp.sigma = a.sigma;
  mp.r = a.r;
  const ConvergenceReport report = required_n_vs_p(
      grid, mp, a.maturity, make_criterion(a.criterion, a.threshold, a.u_trim, a.u_step), a.cap);
  write_text_file(b.path("converge_p.csv"), convergence_to_csv(report));
  write_json_file(b.path("converge_p.json"), convergence_to_json(report));
  std::cout << "converge-p: " << report.points.size() << " grid points -> " << b.out_dir()
            << '\n';
}

struct ConvergeMuArgs {
  std::vector<double> mu_grid;
  double sigma = 0.2, r = 0.02, maturity = 1;
  std::string criterion = "ks";
  double threshold = 1e-3, u_trim = 5e-3, u_step = 5e-3;
  long long cap = 1000000;
};

void run_converge_mu(const ConvergeMuArgs& a, const Binder& b) {
  std::vector<double> grid = a.mu_grid;
  if (grid.empty()) grid = {0.5, 1, 2, 5, 10, 20};
  MarketParams mp;
  mp.mu = grid.front();
  mp.sigma = a.sigma;
  mp.r = a.r;
  const ConvergenceReport report = required_n_vs_mu(
      grid, mp, a.maturity, make_criterion(a.criterion, a.threshold, a.u_trim, a.u_step), a.cap);
  write_text_file(b.path("converge_mu.csv"), convergence_to_csv(report));
  write_json_file(b.path("converge_mu.json"), convergence_to_json(report));
  std::cout << "converge-mu: " << report.points.size() << " grid points -> " << b.out_dir()
            << '\n';
}

struct ImpliedQArgs {
  std::string chain;
  double s0 = 0, mu = 0, sigma = 0, r = 0;
  double dt = 1.0 / 252.0;
  int scan_points = 64;
  double q_tol = 1e-8;
};

void run_implied_q(const ImpliedQArgs& a, const Binder& b) {
  const OptionChain chain = load_option_chain(a.chain);
  MarketParams mp;
  mp.mu = a.mu;
  mp.sigma = a.sigma;
  mp.r = a.r;
  ImpliedQOptions opt;
  opt.dt = a.dt;
  opt.scan_points = a.scan_points;
  opt.q_tol = a.q_tol;
  const SurfaceGrid qs = implied_q_surface(chain, a.s0, mp, opt);
  const SurfaceGrid ps = p_surface_from_q(qs, mp, a.dt);
  write_text_file(b.path("q_surface.csv"), surface_to_csv(qs));
  write_json_file(b.path("q_surface.json"), surface_to_json(qs));
  write_text_file(b.path("p_surface.csv"), surface_to_csv(ps));
  write_json_file(b.path("p_surface.json"), surface_to_json(ps));

  json summary = summary_skeleton(b);
  summary["q"] = surface_stats(qs);
  summary["p"] = surface_stats(ps);
  // informational band only, never a gate
  summary["q"]["reference_band"] = reference_band(
      0.5, 0.62, "implied upturn probabilities typically backed out from broad index chains");
  write_json_file(b.path("summary.json"), summary);
  std::cout << "implied-q: " << summary["q"]["n_valued"] << "/" << qs.cells.size()
            << " cells valued -> " << b.out_dir() << '\n';
}

struct CsyFitArgs {
  std::string returns;
  double dt = 1.0;
  double r = 0;
  double p = 0;
  int n_starts = 8;
  std::uint64_t seed = 1;
  int grid_per_axis = 8;
  double bw_lo = 1e-2, bw_hi = 1e6, coef_hi = 1e3;
  int max_iter = 4000;
  double f_tol = 1e-12;
  double alternate_rel = 0.01;
};

json csy_params_to_json(const CsyParams& p) {
  return json{{"nu", p.nu},          {"sigma", p.sigma},
              {"gamma", p.gamma},    {"delta", p.delta},
              {"h_bandwidth", p.h.bandwidth()}, {"g_bandwidth", p.g.bandwidth()}};
}

void run_csy_fit(const CsyFitArgs& a, const Binder& b) {
  const LogReturnSeries returns = load_returns_csv(a.returns);
  const IntensitySeries series = intensity_from_returns(returns, a.dt, a.p);
  CsyFitOptions opt;
  opt.dt = a.dt;
  opt.r = a.r;
  opt.n_starts = a.n_starts;
  opt.seed = a.seed;
  opt.grid_per_axis = a.grid_per_axis;
  opt.bw_lo = a.bw_lo;
  opt.bw_hi = a.bw_hi;
  opt.coef_hi = a.coef_hi;
  opt.max_iter = a.max_iter;
  opt.f_tol = a.f_tol;
  opt.alternate_rel = a.alternate_rel;
  const CsyFit fit = fit_csy(returns.r, series, opt);

  json j;
  j["format_version"] = kArtifactFormatVersion;
  j["kind"] = "csy_fit";
  j["n"] = returns.r.size();
  j["p_used"] = series.p;
  j["params"] = csy_params_to_json(fit.params);
  j["rmse"] = fit.rmse;
  j["converged"] = fit.converged;
  j["best_start"] = fit.best_start;
  j["boundary_flags"] = fit.boundary_flags;
  json alts = json::array();
  for (const CsyFitAlternate& alt : fit.alternates) {
    alts.push_back(json{{"nu", alt.nu},
                        {"sigma", alt.sigma},
                        {"gamma", alt.gamma},
                        {"h_bandwidth", alt.sigma_h},
                        {"delta", alt.delta},
                        {"g_bandwidth", alt.sigma_g},
                        {"rmse", alt.rmse}});
  }
  j["alternates"] = alts;
  write_json_file(b.path("csy_fit.json"), j);

  const Eigen::ArrayXd resid = csy_fit_residuals(returns.r, series, a.dt, fit.params);
  std::ostringstream os;
  os << "date,residual\n";
  for (std::size_t k = 0; k < returns.dates.size(); ++k)
    os << to_string(returns.dates[k]) << ','
       << format_double(resid[static_cast<Eigen::Index>(k)]) << '\n';
  write_text_file(b.path("residuals.csv"), os.str());
  std::cout << "csy-fit: rmse " << format_double(fit.rmse) << " -> " << b.out_dir() << '\n';
}

struct CsySimulateArgs {
  std::string mode = "discrete";
  double nu = 0, sigma = 0, gamma = 0, delta = 0;
  double h_bandwidth = 1, g_bandwidth = 1;
  double s0 = 100;
  double dt = 1.0 / 252.0;
  double maturity = 1;
  int n = 252;
  std::uint64_t seed = 1;
  double p = 0.5;
  std::string eta_indexing = "previsible";
};

CsyParams csy_params_from(double nu, double sigma, double gamma, double delta, double h_bw,
                          double g_bw) {
  CsyParams params;
  params.nu = nu;
  params.sigma = sigma;
  params.gamma = gamma;
  params.delta = delta;
  params.h = Filter::gaussian(h_bw);
  params.g = Filter::gaussian(g_bw);
  return params;
}

void run_csy_simulate(const CsySimulateArgs& a, const Binder& b) {
  const CsyParams params =
      csy_params_from(a.nu, a.sigma, a.gamma, a.delta, a.h_bandwidth, a.g_bandwidth);
  json summary = summary_skeleton(b);
  summary["mode"] = a.mode;
  if (a.mode == "discrete") {
    if (a.p <= 0 || a.p >= 1) throw ValidationError("csy-simulate: --p must lie in (0,1)");
    Rng rng(a.seed);
    std::vector<bool> flags(static_cast<std::size_t>(a.n));
    for (int i = 0; i < a.n; ++i) flags[static_cast<std::size_t>(i)] = rng.uniform01() < a.p;
    const IntensitySeries series = intensity_from_flags(flags, a.p);
    const PathAccumulators acc = accumulate(series, a.dt, params.h, params.g);
    const VolatilityLadder ladder =
        eta_ladder(params, series, a.dt, eta_indexing_from_string(a.eta_indexing));
    const CsyPath path = stock_path(params, series, a.dt, a.s0);
    write_text_file(b.path("trace.csv"), csy_trace_to_csv(acc, ladder, path));
    summary["n_steps"] = a.n;
    summary["terminal_s"] = path.s[path.s.size() - 1];
    summary["max_abs_eta"] = ladder.eta.abs().maxCoeff();
  } else if (a.mode == "continuum") {
    const ContinuumPath path = simulate_continuum(params, a.s0, a.maturity, a.n, a.seed);
    write_text_file(b.path("continuum.csv"), continuum_trace_to_csv(path));
    summary["n_steps"] = a.n;
    summary["terminal_s"] = path.s[path.s.size() - 1];
  } else {
    throw ValidationError("csy-simulate: mode must be 'discrete' or 'continuum', got '" +
                          a.mode + "'");
  }
  write_json_file(b.path("summary.json"), summary);
  std::cout << "csy-simulate: " << a.mode << " path, terminal "
            << format_double(summary["terminal_s"].get<double>()) << " -> " << b.out_dir()
            << '\n';
}

struct GarchFitArgs {
  std::string returns;
  std::string innovation = "gaussian";
  int n_starts = 8;
  std::uint64_t seed = 1;
  int max_iter = 6000;
  double f_tol = 1e-10;
  bool fix_gamma1 = false;
};

double garch_param_by_name(const ArmaGjrGarchParams& p, const std::string& name) {
  if (name == "mu") return p.mu;
  if (name == "phi1") return p.phi1;
  if (name == "theta1") return p.theta1;
  if (name == "alpha0") return p.alpha0;
  if (name == "alpha1") return p.alpha1;
  if (name == "gamma1") return p.gamma1;
  if (name == "beta1") return p.beta1;
  if (name == "dof") return p.dof;
  throw ValidationError("unknown parameter name '" + name + "'");
}

void run_garch_fit(const GarchFitArgs& a, const Binder& b) {
  const LogReturnSeries returns = load_returns_csv(a.returns);
  GarchFitOptions opt;
  opt.n_starts = a.n_starts;
  opt.seed = a.seed;
  opt.max_iter = a.max_iter;
  opt.f_tol = a.f_tol;
  opt.fix_gamma1 = a.fix_gamma1;
  const GarchFit fit =
      fit_arma_gjr_garch(returns.r, innovation_from_string(a.innovation), opt);

  json j;
  j["format_version"] = kArtifactFormatVersion;
  j["kind"] = "garch_fit";
  j["innovation"] = to_string(fit.innovation);
  j["n"] = returns.r.size();
  j["log_likelihood"] = fit.log_likelihood;
  j["converged"] = fit.converged;
  j["best_start"] = fit.best_start;
  json params = json::object();
  json se = json::object();
  for (std::size_t i = 0; i < fit.param_names.size(); ++i) {
    const std::string& name = fit.param_names[i];
    params[name] = garch_param_by_name(fit.params, name);
    const double s = fit.se[static_cast<Eigen::Index>(i)];
    se[name] = std::isnan(s) ? json(nullptr) : json(s);
  }
  j["params"] = params;
  j["se"] = se;
  write_json_file(b.path("garch_fit.json"), j);

  const Eigen::ArrayXd eps = standardized_residuals(fit);
  std::ostringstream os;
  os << "date,sigma2,resid,std_resid\n";
  for (Eigen::Index k = 0; k < fit.sigma2.size(); ++k) {
    os << to_string(returns.dates[static_cast<std::size_t>(k)]) << ','
       << format_double(fit.sigma2[k]) << ',' << format_double(fit.resid[k]) << ',';
    if (k >= 1) os << format_double(eps[k - 1]);
    os << '\n';
  }
  write_text_file(b.path("state.csv"), os.str());
  std::cout << "garch-fit: ll " << format_double(fit.log_likelihood)
            << (fit.converged ? "" : " (not converged)") << " -> " << b.out_dir() << '\n';
}

struct AlphaArgs {
  std::string stock;
  std::string mode = "jensen";
  std::string market;
  std::string rates;
  std::string factors;
  double dt = 1.0 / 252.0;
};

void run_alpha(const AlphaArgs& a, const Binder& b) {
  const LogReturnSeries stock = load_returns_csv(a.stock);
  AlphaResult result;
  if (a.mode == "jensen") {
    if (a.market.empty() || a.rates.empty())
      throw ValidationError("alpha: jensen mode needs --market and --rates");
    result = jensen_alpha_series(stock, load_returns_csv(a.market), load_rate_curve(a.rates),
                                 a.dt);
  } else if (a.mode == "ff3") {
    if (a.factors.empty()) throw ValidationError("alpha: ff3 mode needs --factors");
    result = ff3_alpha_series(stock, load_factor_table(a.factors));
  } else {
    throw ValidationError("alpha: mode must be 'jensen' or 'ff3', got '" + a.mode + "'");
  }

  json j;
  j["format_version"] = kArtifactFormatVersion;
  j["kind"] = "alpha";
  j["mode"] = a.mode;
  j["n"] = result.dates.size();
  j["alpha"] = result.alpha;
  json betas = json::array();
  for (Eigen::Index i = 0; i < result.betas.size(); ++i) betas.push_back(result.betas[i]);
  j["betas"] = betas;
  write_json_file(b.path("alpha.json"), j);

  std::ostringstream os;
  os << "date,alpha\n";
  for (std::size_t k = 0; k < result.dates.size(); ++k)
    os << to_string(result.dates[k]) << ','
       << format_double(result.alpha_series[static_cast<Eigen::Index>(k)]) << '\n';
  write_text_file(b.path("alpha_series.csv"), os.str());
  std::cout << "alpha: " << format_double(result.alpha) << " over " << result.dates.size()
            << " periods -> " << b.out_dir() << '\n';
}

struct ConditionalPriceArgs {
  std::string returns;
  double dt = 1.0 / 252.0;
  double p = 0;
  double nu = 0, sigma = 0, gamma = 0, delta = 0;
  double h_bandwidth = 1, g_bandwidth = 1;
  double s0 = 0, strike = 0, r = 0;
  std::string kind = "call";
  int n = 0;
  std::string eta_indexing = "previsible";
  std::string q_policy = "strict";
  int max_enumerated_levels = 26;
  bool store_ladders = false;
  double lambda = 0, n_forwards = 0;  // read by informed-price only
};

ConditionalTreeInputs conditional_inputs(const ConditionalPriceArgs& a,
                                         const IntensitySeries& series) {
  ConditionalTreeInputs inputs;
  inputs.grid = uniform_grid(a.n * a.dt, a.n);
  inputs.params = csy_params_from(a.nu, a.sigma, a.gamma, a.delta, a.h_bandwidth, a.g_bandwidth);
  inputs.intensity = series;
  inputs.eta_indexing = eta_indexing_from_string(a.eta_indexing);
  inputs.s0 = a.s0;
  inputs.r_steps = {a.r};
  inputs.trader.lambda = a.lambda;
  inputs.trader.n_forwards = a.n_forwards;
  inputs.tree.q_policy = q_policy_from_string(a.q_policy);
  inputs.tree.max_enumerated_levels = a.max_enumerated_levels;
  inputs.pricing.store_ladders = a.store_ladders;
  return inputs;
}

void write_conditional_result(const ConditionalPriceResult& result, const char* kind,
                              const ConditionalPriceArgs& a, const Binder& b,
                              const std::string& json_name) {
  json j;
  j["format_version"] = kArtifactFormatVersion;
  j["kind"] = kind;
  j["value"] = result.value;
  j["steps"] = a.n;
  j["maturity"] = a.n * a.dt;
  j["recombining"] = result.recombining;
  j["clamp_count"] = result.clamp_count;
  write_json_file(b.path(json_name), j);

  std::ostringstream os;
  os << "step,eta,q,nu_informed,dividend,theta_forward,n_opt\n";
  for (Eigen::Index k = 0; k < result.eta.size(); ++k) {
    os << k << ',' << format_double(result.eta[k]) << ',' << format_double(result.q[k]) << ','
       << format_double(result.nu_informed[k]) << ',' << format_double(result.dividend[k])
       << ',' << format_double(result.theta_forward[k]) << ','
       << format_double(result.n_opt[k]) << '\n';
  }
  write_text_file(b.path("steps.csv"), os.str());
}

void run_csy_price(const ConditionalPriceArgs& a, const Binder& b) {
  const LogReturnSeries returns = load_returns_csv(a.returns);
  const IntensitySeries series = intensity_from_returns(returns, a.dt, a.p);
  const ConditionalTreeInputs inputs = conditional_inputs(a, series);
  OptionSpec spec;
  spec.kind = option_kind_from_string(a.kind);
  spec.strike = a.strike;
  spec.maturity = inputs.grid.maturity();
  const ConditionalPriceResult result = csy_price(inputs, spec);
  write_conditional_result(result, "csy_price", a, b, "csy_price.json");
  std::cout << "csy-price: value " << format_double(result.value)
            << (result.recombining ? " (recombining)" : "") << " -> " << b.out_dir() << '\n';
}

void run_informed_price(const ConditionalPriceArgs& a, const Binder& b) {
  const LogReturnSeries returns = load_returns_csv(a.returns);
  const IntensitySeries series = intensity_from_returns(returns, a.dt, a.p);
  const ConditionalTreeInputs inputs = conditional_inputs(a, series);
  OptionSpec spec;
  spec.kind = option_kind_from_string(a.kind);
  spec.strike = a.strike;
  spec.maturity = inputs.grid.maturity();
  const ConditionalPriceResult result = price_informed(inputs, spec);
  write_conditional_result(result, "informed_price", a, b, "informed_price.json");
  std::cout << "informed-price: value " << format_double(result.value) << " (lambda "
            << format_double(a.lambda) << ") -> " << b.out_dir() << '\n';
}

struct DevArgs {
  std::string chain;
  double s0 = 0, mu = 0, sigma = 0, r = 0;
  double p = 0.5;
  std::string measure = "risk_neutral_approx";
  double dt = 1.0 / 252.0;
};

void run_dev(const DevArgs& a, const Binder& b) {
  const OptionChain chain = load_option_chain(a.chain);
  MarketParams mp;
  mp.mu = a.mu;
  mp.sigma = a.sigma;
  mp.r = a.r;
  const SurfaceGrid model =
      model_price_surface(chain, a.s0, mp, a.p, measure_from_string(a.measure), a.dt);
  const SurfaceGrid dev = dev_surface(model, chain, a.s0, a.r, a.dt);
  write_text_file(b.path("model_prices.csv"), surface_to_csv(model));
  write_json_file(b.path("model_prices.json"), surface_to_json(model));
  write_text_file(b.path("dev_surface.csv"), surface_to_csv(dev));
  write_json_file(b.path("dev_surface.json"), surface_to_json(dev));

  json summary = summary_skeleton(b);
  summary["dev"] = surface_stats(dev);
  summary["dev"]["reference_band"] = reference_band(
      -0.68, 2.01, "typical spread of the volatility deviation measure on index chains");
  write_json_file(b.path("summary.json"), summary);
  std::cout << "dev: " << summary["dev"]["n_valued"] << "/" << dev.cells.size()
            << " cells valued -> " << b.out_dir() << '\n';
}

struct ImpliedLambdaArgs {
  std::string chain;
  std::string returns;
  double dt = 1.0 / 252.0;
  double p = 0;
  double nu = 0, sigma = 0, gamma = 0, delta = 0;
  double h_bandwidth = 1, g_bandwidth = 1;
  double s0 = 0, r = 0;
  int scan_points = 48;
  double lambda_lo = 1e-8, lambda_hi = 1.0, lambda_tol = 1e-10, flat_tol = 1e-18;
  std::string eta_indexing = "previsible";
};

void run_implied_lambda(const ImpliedLambdaArgs& a, const Binder& b) {
  const OptionChain chain = load_option_chain(a.chain);
  const LogReturnSeries returns = load_returns_csv(a.returns);
  const IntensitySeries series = intensity_from_returns(returns, a.dt, a.p);
  const CsyParams params =
      csy_params_from(a.nu, a.sigma, a.gamma, a.delta, a.h_bandwidth, a.g_bandwidth);
  ImpliedLambdaOptions opt;
  opt.dt = a.dt;
  opt.eta_indexing = eta_indexing_from_string(a.eta_indexing);
  opt.scan_points = a.scan_points;
  opt.lambda_lo = a.lambda_lo;
  opt.lambda_hi = a.lambda_hi;
  opt.lambda_tol = a.lambda_tol;
  opt.flat_tol = a.flat_tol;
  const SurfaceGrid surface = implied_lambda_surface(chain, a.s0, params, series, a.r, opt);
  write_text_file(b.path("lambda_surface.csv"), surface_to_csv(surface));
  write_json_file(b.path("lambda_surface.json"), surface_to_json(surface));

  json summary = summary_skeleton(b);
  summary["lambda"] = surface_stats(surface);
  summary["lambda"]["reference_band"] = reference_band(
      2.25e-6, 3.2e-3, "implied signal strengths typically backed out from index chains");
  write_json_file(b.path("summary.json"), summary);
  std::cout << "implied-lambda: " << summary["lambda"]["n_valued"] << "/"
            << surface.cells.size() << " cells valued -> " << b.out_dir() << '\n';
}

// ---- wiring ---------------------------------------------------------------

using Runner = std::function<void()>;

template <class Args>
void arm(CLI::App* cmd, std::shared_ptr<Args> args, std::shared_ptr<Binder> binder,
         Runner& runner, void (*run)(const Args&, const Binder&)) {
  cmd->callback([args, binder, &runner, run] {
    runner = [args, binder, run] {
      binder->finish();
      run(*args, *binder);
    };
  });
}

void setup_ingest(CLI::App& app, Runner& runner) {
  CLI::App* cmd = app.add_subcommand("ingest", "turn a price CSV into log returns");
  auto args = std::make_shared<IngestArgs>();
  auto binder = std::make_shared<Binder>(cmd, "ingest");
  binder->add("--prices", args->prices, "CSV with header date,close", true);
  binder->add("--dt", args->dt, "year fraction per observation");
  arm(cmd, args, binder, runner, run_ingest);
}

void setup_estimate_p(CLI::App& app, Runner& runner) {
  CLI::App* cmd = app.add_subcommand("estimate-p", "rolling upturn-probability estimates");
  auto args = std::make_shared<EstimatePArgs>();
  auto binder = std::make_shared<Binder>(cmd, "estimate-p");
  binder->add("--returns", args->returns, "CSV with header date,log_return", true);
  binder->add("--window", args->window, "observations per rolling window", true);
  arm(cmd, args, binder, runner, run_estimate_p);
}

void setup_sign_test(CLI::App& app, Runner& runner) {
  CLI::App* cmd = app.add_subcommand("sign-test", "per-interval exact binomial sign tests");
  auto args = std::make_shared<SignTestArgs>();
  auto binder = std::make_shared<Binder>(cmd, "sign-test");
  binder->add("--returns", args->returns, "CSV with header date,log_return", true);
  binder->add("--interval", args->interval, "week, month, or year");
  binder->add("--p0", args->p0, "null upturn probability");
  arm(cmd, args, binder, runner, run_sign_test);
}

void setup_price(CLI::App& app, Runner& runner) {
  CLI::App* cmd = app.add_subcommand("price", "binomial lattice option price");
  auto args = std::make_shared<PriceArgs>();
  auto binder = std::make_shared<Binder>(cmd, "price");
  binder->add("--s0", args->s0, "spot", true);
  binder->add("--strike", args->strike, "strike", true);
  binder->add("--maturity", args->maturity, "maturity in years");
  binder->add("--mu", args->mu, "natural growth rate", true);
  binder->add("--sigma", args->sigma, "volatility", true);
  binder->add("--r", args->r, "risk-free rate");
  binder->add("--n", args->n, "tree steps");
  binder->add("--kind", args->kind, "call or put");
  binder->add("--measure", args->measure, "natural, risk_neutral_exact, or risk_neutral_approx");
  binder->add("--q-policy", args->q_policy, "strict or clamp");
  binder->add("--p0", args->p0, "upturn probability, constant term");
  binder->add("--p1", args->p1, "upturn probability, sqrt(dt) coefficient");
  binder->add("--p2", args->p2, "upturn probability, dt coefficient");
  binder->add_flag("--store-ladders", args->store_ladders, "keep per-node values and deltas");
  binder->add_flag("--emit-lattice", args->emit_lattice, "also write lattice.json");
  binder->add_flag("--allow-natural", args->allow_natural,
                   "permit discounting under the natural measure");
  arm(cmd, args, binder, runner, run_price);
}

void add_criterion_flags(Binder& binder, std::string* criterion, double* threshold,
                         double* u_trim, double* u_step, long long* cap) {
  binder.add("--criterion", *criterion, "ks or quantile_coupling");
  binder.add("--threshold", *threshold, "convergence threshold");
  binder.add("--u-trim", *u_trim, "quantile grid trim (quantile_coupling)");
  binder.add("--u-step", *u_step, "quantile grid step (quantile_coupling)");
  binder.add("--cap", *cap, "largest step count tried");
}

void setup_converge_p(CLI::App& app, Runner& runner) {
  CLI::App* cmd =
      app.add_subcommand("converge-p", "required step count per upturn probability");
  auto args = std::make_shared<ConvergePArgs>();
  auto binder = std::make_shared<Binder>(cmd, "converge-p");
  binder->add("--p-grid", args->p_grid, "upturn probabilities (default 0.05..0.95)");
  binder->add("--mu", args->mu, "natural growth rate");
  binder->add("--sigma", args->sigma, "volatility");
  binder->add("--r", args->r, "risk-free rate");
  binder->add("--maturity", args->maturity, "maturity in years");
  add_criterion_flags(*binder, &args->criterion, &args->threshold, &args->u_trim, &args->u_step,
                      &args->cap);
  arm(cmd, args, binder, runner, run_converge_p);
}

void setup_converge_mu(CLI::App& app, Runner& runner) {
  CLI::App* cmd = app.add_subcommand("converge-mu", "required step count per growth rate");
  auto args = std::make_shared<ConvergeMuArgs>();
  auto binder = std::make_shared<Binder>(cmd, "converge-mu");
  binder->add("--mu-grid", args->mu_grid, "growth rates (default 0.5 1 2 5 10 20)");
  binder->add("--sigma", args->sigma, "volatility");
  binder->add("--r", args->r, "risk-free rate");
  binder->add("--maturity", args->maturity, "maturity in years");
  add_criterion_flags(*binder, &args->criterion, &args->threshold, &args->u_trim, &args->u_step,
                      &args->cap);
  arm(cmd, args, binder, runner, run_converge_mu);
}

void setup_implied_q(CLI::App& app, Runner& runner) {
  CLI::App* cmd =
      app.add_subcommand("implied-q", "risk-neutral upturn probability per option quote");
  auto args = std::make_shared<ImpliedQArgs>();
  auto binder = std::make_shared<Binder>(cmd, "implied-q");
  binder->add("--chain", args->chain, "CSV with header quote_date,expiry,strike,kind,price",
              true);
  binder->add("--s0", args->s0, "spot on the quote date", true);
  binder->add("--mu", args->mu, "natural growth rate", true);
  binder->add("--sigma", args->sigma, "volatility", true);
  binder->add("--r", args->r, "risk-free rate");
  binder->add("--dt", args->dt, "year fraction per tree step");
  binder->add("--scan-points", args->scan_points, "coarse scan resolution");
  binder->add("--q-tol", args->q_tol, "golden-section tolerance on q");
  arm(cmd, args, binder, runner, run_implied_q);
}

void setup_csy_fit(CLI::App& app, Runner& runner) {
  CLI::App* cmd =
      app.add_subcommand("csy-fit", "least-squares fit of the path-dependent return model");
  auto args = std::make_shared<CsyFitArgs>();
  auto binder = std::make_shared<Binder>(cmd, "csy-fit");
  binder->add("--returns", args->returns, "CSV with header date,log_return", true);
  binder->add("--dt", args->dt, "time unit of the returns");
  binder->add("--r", args->r, "growth-rate floor");
  binder->add("--p", args->p, "upturn probability; 0 uses the empirical sign frequency");
  binder->add("--n-starts", args->n_starts, "simplex restarts");
  binder->add("--seed", args->seed, "start-generation seed");
  binder->add("--grid-per-axis", args->grid_per_axis, "bandwidth grid resolution");
  binder->add("--bw-lo", args->bw_lo, "bandwidth lower bound");
  binder->add("--bw-hi", args->bw_hi, "bandwidth upper bound");
  binder->add("--coef-hi", args->coef_hi, "coefficient upper bound");
  binder->add("--max-iter", args->max_iter, "simplex iteration cap");
  binder->add("--f-tol", args->f_tol, "simplex objective tolerance");
  binder->add("--alternate-rel", args->alternate_rel, "relative window for near-tie reporting");
  arm(cmd, args, binder, runner, run_csy_fit);
}

void setup_csy_simulate(CLI::App& app, Runner& runner) {
  CLI::App* cmd = app.add_subcommand("csy-simulate", "simulate the path-dependent dynamics");
  auto args = std::make_shared<CsySimulateArgs>();
  auto binder = std::make_shared<Binder>(cmd, "csy-simulate");
  binder->add("--mode", args->mode, "discrete or continuum");
  binder->add("--nu", args->nu, "growth rate", true);
  binder->add("--sigma", args->sigma, "loading on the driving walk", true);
  binder->add("--gamma", args->gamma, "loading on the level-filtered integral");
  binder->add("--delta", args->delta, "loading on the area-filtered integral");
  binder->add("--h-bandwidth", args->h_bandwidth, "gaussian bandwidth of the level filter");
  binder->add("--g-bandwidth", args->g_bandwidth, "gaussian bandwidth of the area filter");
  binder->add("--s0", args->s0, "start price");
  binder->add("--dt", args->dt, "step length (discrete mode)");
  binder->add("--maturity", args->maturity, "horizon in years (continuum mode)");
  binder->add("--n", args->n, "step count");
  binder->add("--seed", args->seed, "draw seed");
  binder->add("--p", args->p, "upturn probability (discrete mode)");
  binder->add("--eta-indexing", args->eta_indexing, "previsible or contemporaneous");
  arm(cmd, args, binder, runner, run_csy_simulate);
}

void setup_garch_fit(CLI::App& app, Runner& runner) {
  CLI::App* cmd = app.add_subcommand("garch-fit", "ARMA(1,1)-GJR-GARCH(1,1) likelihood fit");
  auto args = std::make_shared<GarchFitArgs>();
  auto binder = std::make_shared<Binder>(cmd, "garch-fit");
  binder->add("--returns", args->returns, "CSV with header date,log_return", true);
  binder->add("--innovation", args->innovation, "gaussian or student_t");
  binder->add("--n-starts", args->n_starts, "multistart count");
  binder->add("--seed", args->seed, "start-generation seed");
  binder->add("--max-iter", args->max_iter, "simplex iteration cap");
  binder->add("--f-tol", args->f_tol, "simplex objective tolerance");
  binder->add_flag("--fix-gamma1", args->fix_gamma1, "freeze the leverage term at zero");
  arm(cmd, args, binder, runner, run_garch_fit);
}

void setup_alpha(CLI::App& app, Runner& runner) {
  CLI::App* cmd = app.add_subcommand("alpha", "abnormal return against a factor model");
  auto args = std::make_shared<AlphaArgs>();
  auto binder = std::make_shared<Binder>(cmd, "alpha");
  binder->add("--stock", args->stock, "stock returns CSV", true);
  binder->add("--mode", args->mode, "jensen or ff3");
  binder->add("--market", args->market, "market returns CSV (jensen)");
  binder->add("--rates", args->rates, "rate curve CSV with header date,rate (jensen)");
  binder->add("--factors", args->factors,
              "factor CSV with header date,mkt_excess,smb,hml,rf (ff3)");
  binder->add("--dt", args->dt, "year fraction per observation (jensen)");
  arm(cmd, args, binder, runner, run_alpha);
}

void add_conditional_flags(Binder& binder, ConditionalPriceArgs& args) {
  binder.add("--returns", args.returns, "CSV with header date,log_return", true);
  binder.add("--dt", args.dt, "year fraction per step");
  binder.add("--p", args.p, "upturn probability; 0 uses the empirical sign frequency");
  binder.add("--nu", args.nu, "growth rate", true);
  binder.add("--sigma", args.sigma, "loading on the driving walk", true);
  binder.add("--gamma", args.gamma, "loading on the level-filtered integral");
  binder.add("--delta", args.delta, "loading on the area-filtered integral");
  binder.add("--h-bandwidth", args.h_bandwidth, "gaussian bandwidth of the level filter");
  binder.add("--g-bandwidth", args.g_bandwidth, "gaussian bandwidth of the area filter");
  binder.add("--s0", args.s0, "spot", true);
  binder.add("--strike", args.strike, "strike", true);
  binder.add("--kind", args.kind, "call or put");
  binder.add("--n", args.n, "tree steps", true);
  binder.add("--r", args.r, "risk-free rate");
  binder.add("--eta-indexing", args.eta_indexing, "previsible or contemporaneous");
  binder.add("--q-policy", args.q_policy, "strict or clamp");
  binder.add("--max-enumerated-levels", args.max_enumerated_levels,
             "non-recombining enumeration cap");
  binder.add_flag("--store-ladders", args.store_ladders, "keep per-node values and deltas");
}

void setup_csy_price(CLI::App& app, Runner& runner) {
  CLI::App* cmd =
      app.add_subcommand("csy-price", "price on the conditional path-dependent tree");
  auto args = std::make_shared<ConditionalPriceArgs>();
  auto binder = std::make_shared<Binder>(cmd, "csy-price");
  add_conditional_flags(*binder, *args);
  arm(cmd, args, binder, runner, run_csy_price);
}

void setup_informed_price(CLI::App& app, Runner& runner) {
  CLI::App* cmd = app.add_subcommand(
      "informed-price", "conditional tree price with an informed trader's dividend stream");
  auto args = std::make_shared<ConditionalPriceArgs>();
  auto binder = std::make_shared<Binder>(cmd, "informed-price");
  add_conditional_flags(*binder, *args);
  binder->add("--lambda", args->lambda, "signal strength", true);
  binder->add("--n-forwards", args->n_forwards, "forward position per share");
  arm(cmd, args, binder, runner, run_informed_price);
}

void setup_dev(CLI::App& app, Runner& runner) {
  CLI::App* cmd =
      app.add_subcommand("dev", "implied-volatility deviation of model prices from quotes");
  auto args = std::make_shared<DevArgs>();
  auto binder = std::make_shared<Binder>(cmd, "dev");
  binder->add("--chain", args->chain, "CSV with header quote_date,expiry,strike,kind,price",
              true);
  binder->add("--s0", args->s0, "spot on the quote date", true);
  binder->add("--mu", args->mu, "natural growth rate", true);
  binder->add("--sigma", args->sigma, "volatility", true);
  binder->add("--r", args->r, "risk-free rate");
  binder->add("--p", args->p, "natural upturn probability of the model");
  binder->add("--measure", args->measure, "risk_neutral_exact or risk_neutral_approx");
  binder->add("--dt", args->dt, "year fraction per tree step");
  arm(cmd, args, binder, runner, run_dev);
}

void setup_implied_lambda(CLI::App& app, Runner& runner) {
  CLI::App* cmd =
      app.add_subcommand("implied-lambda", "signal strength per quote on the informed tree");
  auto args = std::make_shared<ImpliedLambdaArgs>();
  auto binder = std::make_shared<Binder>(cmd, "implied-lambda");
  binder->add("--chain", args->chain, "CSV with header quote_date,expiry,strike,kind,price",
              true);
  binder->add("--returns", args->returns, "CSV with header date,log_return", true);
  binder->add("--dt", args->dt, "year fraction per step");
  binder->add("--p", args->p, "upturn probability; 0 uses the empirical sign frequency");
  binder->add("--nu", args->nu, "growth rate", true);
  binder->add("--sigma", args->sigma, "loading on the driving walk", true);
  binder->add("--gamma", args->gamma, "loading on the level-filtered integral");
  binder->add("--delta", args->delta, "loading on the area-filtered integral");
  binder->add("--h-bandwidth", args->h_bandwidth, "gaussian bandwidth of the level filter");
  binder->add("--g-bandwidth", args->g_bandwidth, "gaussian bandwidth of the area filter");
  binder->add("--s0", args->s0, "spot on the quote date", true);
  binder->add("--r", args->r, "risk-free rate");
  binder->add("--scan-points", args->scan_points, "coarse scan resolution");
  binder->add("--lambda-lo", args->lambda_lo, "smallest positive lambda scanned");
  binder->add("--lambda-hi", args->lambda_hi, "largest lambda scanned");
  binder->add("--lambda-tol", args->lambda_tol, "golden-section tolerance on lambda");
  binder->add("--flat-tol", args->flat_tol, "objective range below which a cell is unidentified");
  binder->add("--eta-indexing", args->eta_indexing, "previsible or contemporaneous");
  arm(cmd, args, binder, runner, run_implied_lambda);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binomial pricing and calibration toolkit"};
  app.set_version_flag("--version", binlat::kVersion);
  app.require_subcommand(1);

  Runner runner;
  setup_ingest(app, runner);
  setup_estimate_p(app, runner);
  setup_sign_test(app, runner);
  setup_price(app, runner);
  setup_converge_p(app, runner);
  setup_converge_mu(app, runner);
  setup_implied_q(app, runner);
  setup_csy_fit(app, runner);
  setup_csy_simulate(app, runner);
  setup_garch_fit(app, runner);
  setup_alpha(app, runner);
  setup_csy_price(app, runner);
  setup_dev(app, runner);
  setup_informed_price(app, runner);
  setup_implied_lambda(app, runner);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (runner) runner();
  } catch (const binlat::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const binlat::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
