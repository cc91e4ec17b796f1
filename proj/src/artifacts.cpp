#include "binlat/artifacts.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "binlat/csv.hpp"
#include "binlat/errors.hpp"
#include "binlat/mathutil.hpp"
#include "binlat/version.hpp"

namespace binlat {

namespace {

using nlohmann::json;

void require_artifact(const json& j, const char* kind) {
  if (!j.is_object()) throw ValidationError("artifact: expected a JSON object");
  if (!j.contains("format_version") || !j["format_version"].is_number_integer())
    throw ValidationError("artifact: missing format_version");
  const int version = j["format_version"].get<int>();
  if (version != kArtifactFormatVersion)
    throw ValidationError("artifact: format_version " + std::to_string(version) +
                          " not supported (expected " +
                          std::to_string(kArtifactFormatVersion) + ")");
  if (!j.contains("kind") || j["kind"] != kind)
    throw ValidationError(std::string("artifact: expected kind '") + kind + "'");
}

json array_to_json(const Eigen::ArrayXd& a) {
  json out = json::array();
  for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(a[i]);
  return out;
}

}  // namespace

nlohmann::json lattice_to_json(const Lattice& lattice) {
  json j;
  j["format_version"] = kArtifactFormatVersion;
  j["kind"] = "lattice";
  j["s0"] = lattice.s0();
  j["measure"] = to_string(lattice.measure());
  j["grid"] = array_to_json(lattice.grid().instants);
  j["params"] = {{"mu", lattice.params().mu},
                 {"sigma", lattice.params().sigma},
                 {"r", lattice.params().r}};
  json moves = json::array();
  for (const OneStepMove& mv : lattice.moves()) {
    moves.push_back({{"up_log", mv.up_log},
                     {"down_log", mv.down_log},
                     {"m1", mv.m1},
                     {"m2", mv.m2},
                     {"p", mv.p},
                     {"q_exact", mv.q_exact},
                     {"q_approx", mv.q_approx},
                     {"clamped", mv.clamped}});
  }
  j["moves"] = moves;
  return j;
}

Lattice lattice_from_json(const nlohmann::json& j) {
  require_artifact(j, "lattice");
  std::vector<double> instants = j.at("grid").get<std::vector<double>>();
  MarketParams params;
  params.mu = j.at("params").at("mu").get<double>();
  params.sigma = j.at("params").at("sigma").get<double>();
  params.r = j.at("params").at("r").get<double>();
  std::vector<OneStepMove> moves;
  for (const json& m : j.at("moves")) {
    OneStepMove mv;
    mv.up_log = m.at("up_log").get<double>();
    mv.down_log = m.at("down_log").get<double>();
    mv.m1 = m.at("m1").get<double>();
    mv.m2 = m.at("m2").get<double>();
    mv.p = m.at("p").get<double>();
    mv.q_exact = m.at("q_exact").get<double>();
    mv.q_approx = m.at("q_approx").get<double>();
    mv.clamped = m.at("clamped").get<bool>();
    moves.push_back(mv);
  }
  return Lattice::from_moves(explicit_grid(instants), params, std::move(moves),
                             j.at("s0").get<double>(),
                             measure_from_string(j.at("measure").get<std::string>()));
}

nlohmann::json price_result_to_json(const PriceResult& result) {
  json j;
  j["format_version"] = kArtifactFormatVersion;
  j["kind"] = "price_result";
  j["value"] = result.value;
  json values = json::array();
  for (const auto& level : result.values) values.push_back(array_to_json(level));
  j["values"] = values;
  json deltas = json::array();
  for (const auto& level : result.deltas) deltas.push_back(array_to_json(level));
  j["deltas"] = deltas;
  return j;
}

nlohmann::json surface_to_json(const SurfaceGrid& grid) {
  json j;
  j["format_version"] = kArtifactFormatVersion;
  j["kind"] = "surface";
  j["surface_kind"] = to_string(grid.kind);
  j["maturity_unit"] = grid.maturity_unit;
  json cells = json::array();
  for (const SurfaceCell& cell : grid.cells) {
    json c;
    c["moneyness"] = cell.moneyness;
    c["maturity"] = cell.maturity_steps;
    if (std::isnan(cell.value))
      c["value"] = nullptr;
    else
      c["value"] = cell.value;
    c["status"] = to_string(cell.status);
    cells.push_back(c);
  }
  j["cells"] = cells;
  return j;
}

namespace {

SurfaceGrid::Kind surface_kind_from_string(const std::string& s) {
  if (s == "q") return SurfaceGrid::Kind::q;
  if (s == "p") return SurfaceGrid::Kind::p;
  if (s == "dev") return SurfaceGrid::Kind::dev;
  if (s == "lambda") return SurfaceGrid::Kind::lambda;
  if (s == "price") return SurfaceGrid::Kind::price;
  throw ValidationError("surface: unknown kind '" + s + "'");
}

CellStatus cell_status_from_string(const std::string& s) {
  if (s == "ok") return CellStatus::ok;
  if (s == "clamped") return CellStatus::clamped;
  if (s == "bound_violation") return CellStatus::bound_violation;
  if (s == "no_convergence") return CellStatus::no_convergence;
  if (s == "unidentified") return CellStatus::unidentified;
  if (s == "infeasible") return CellStatus::infeasible;
  throw ValidationError("surface: unknown cell status '" + s + "'");
}

}  // namespace

SurfaceGrid surface_from_json(const nlohmann::json& j) {
  require_artifact(j, "surface");
  SurfaceGrid grid;
  grid.kind = surface_kind_from_string(j.at("surface_kind").get<std::string>());
  grid.maturity_unit = j.at("maturity_unit").get<std::string>();
  for (const nlohmann::json& c : j.at("cells")) {
    SurfaceCell cell;
    cell.moneyness = c.at("moneyness").get<double>();
    cell.maturity_steps = c.at("maturity").get<int>();
    cell.value = c.at("value").is_null() ? std::nan("") : c.at("value").get<double>();
    cell.status = cell_status_from_string(c.at("status").get<std::string>());
    grid.cells.push_back(cell);
  }
  return grid;
}

std::string surface_to_csv(const SurfaceGrid& grid) {
  std::ostringstream os;
  os << "moneyness,maturity,value,status\n";
  for (const SurfaceCell& cell : grid.cells) {
    os << format_double(cell.moneyness) << ',' << cell.maturity_steps << ','
       << (std::isnan(cell.value) ? "" : format_double(cell.value)) << ','
       << to_string(cell.status) << '\n';
  }
  return os.str();
}

nlohmann::json convergence_to_json(const ConvergenceReport& report) {
  json j;
  j["format_version"] = kArtifactFormatVersion;
  j["kind"] = "convergence_report";
  j["criterion"] = report.criterion;
  j["threshold"] = report.threshold;
  j["cap"] = report.cap;
  json points = json::array();
  for (const ConvergencePoint& pt : report.points) {
    points.push_back({{"param", pt.param},
                      {"n_required", pt.n_required},
                      {"discrepancy", pt.discrepancy},
                      {"cap_hit", pt.cap_hit}});
  }
  j["points"] = points;
  return j;
}

std::string convergence_to_csv(const ConvergenceReport& report) {
  std::ostringstream os;
  os << "param,n_required,discrepancy,criterion\n";
  for (const ConvergencePoint& pt : report.points) {
    os << format_double(pt.param) << ',' << pt.n_required << ','
       << format_double(pt.discrepancy) << ',' << report.criterion << '\n';
  }
  return os.str();
}

std::string csy_trace_to_csv(const PathAccumulators& acc, const VolatilityLadder& ladder,
                             const CsyPath& path) {
  const Eigen::Index n = ladder.eta.size();
  if (acc.x.size() != n + 1 || path.s.size() != n + 1)
    throw ValidationError("csy_trace_to_csv: accumulator, ladder, and path sizes disagree");
  std::ostringstream os;
  os << "step,x,y,v,eta,s\n";
  for (Eigen::Index k = 0; k <= n; ++k) {
    os << k << ',' << format_double(acc.x[k]) << ',' << format_double(acc.y[k]) << ','
       << format_double(acc.v[k]) << ',';
    if (k < n) os << format_double(ladder.eta[k]);
    os << ',' << format_double(path.s[k]) << '\n';
  }
  return os.str();
}

std::string continuum_trace_to_csv(const ContinuumPath& path) {
  std::ostringstream os;
  os << "t,b,c,g,s\n";
  for (Eigen::Index k = 0; k < path.t.size(); ++k) {
    os << format_double(path.t[k]) << ',' << format_double(path.b[k]) << ','
       << format_double(path.c[k]) << ',' << format_double(path.g[k]) << ','
       << format_double(path.s[k]) << '\n';
  }
  return os.str();
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
  return j;
}

nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config) {
  json j;
  j["format_version"] = kArtifactFormatVersion;
  j["kind"] = "manifest";
  j["code_version"] = kVersion;
  j["command"] = command;
  j["config"] = config;
  j["config_hash"] = hex64(fnv1a64(config.dump()));
  return j;
}

}  // namespace binlat
