#pragma once

#include <json.hpp>
#include <string>

#include "binlat/calibration.hpp"
#include "binlat/convergence.hpp"
#include "binlat/csy.hpp"
#include "binlat/lattice.hpp"

namespace binlat {

// Every JSON artifact carries format_version and a kind tag; readers reject
// versions they do not understand instead of guessing.

nlohmann::json lattice_to_json(const Lattice& lattice);
Lattice lattice_from_json(const nlohmann::json& j);

nlohmann::json price_result_to_json(const PriceResult& result);

nlohmann::json surface_to_json(const SurfaceGrid& grid);
SurfaceGrid surface_from_json(const nlohmann::json& j);
// Long form: moneyness,maturity,value,status. NaN values print as empty fields.
std::string surface_to_csv(const SurfaceGrid& grid);

nlohmann::json convergence_to_json(const ConvergenceReport& report);
// Columns param,n_required,discrepancy,criterion; cap-hit detail lives in the JSON.
std::string convergence_to_csv(const ConvergenceReport& report);

// Per-step path trace: step,x,y,v,eta,s. eta applies to the step leaving the row.
std::string csy_trace_to_csv(const PathAccumulators& acc, const VolatilityLadder& ladder,
                             const CsyPath& path);

// t,b,c,g,s along a simulated continuum path.
std::string continuum_trace_to_csv(const ContinuumPath& path);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

// Run manifest: command, fully resolved config (seed included), a hash of the
// canonical config dump, and the code/artifact versions.
nlohmann::json make_manifest(const std::string& command, const nlohmann::json& config);

}  // namespace binlat
