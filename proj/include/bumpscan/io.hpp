#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bumpscan/arma.hpp"

namespace bumpscan::mc {
struct ExperimentConfig;
struct PowerGrid;
}  // namespace bumpscan::mc

namespace bumpscan::io {

/// Shortest round-trip decimal form ("0.1", "1e-300", "-2.5").
std::string format_double(double x);

/**
 * Model literal {"ar": [...], "ma": [...]}, both keys optional, with
 * phi(z) = 1 + sum ar[i] z^(i+1) and theta(z) = 1 + sum ma[i] z^(i+1).
 * An optional "label" key is accepted and ignored here.
 */
arma::ArmaModel model_from_json(const nlohmann::json& j);
arma::ArmaModel parse_model(std::string_view text);
nlohmann::json model_to_json(const arma::ArmaModel& model);

/**
 * Experiment config schema (all keys optional, defaults from ExperimentConfig):
 *   regime: "small" | "medium" | "large"   (sets n and lambda)
 *   n, lambda, alpha, bumps, trials, seed
 *   rho:    [..]  AR(1) rows, Z_t = rho Z_{t-1} + zeta_t
 *   models: [{"ar": [..], "ma": [..], "label": ".."}, ..]
 *   deltas: [..]
 *   kind:   "scan" | "disjoint"
 * A run manifest is accepted too: its "config" member is used.
 * Throws InputError listing every violation found.
 */
mc::ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const mc::ExperimentConfig& cfg);

/// CSV with a header row; column 0 is the row label ("rho" or "model"),
/// remaining columns are the delta grid.
std::string power_grid_csv(const mc::PowerGrid& grid);
std::string power_grid_se_csv(const mc::PowerGrid& grid);

/// Reads observations from CSV: the "observation" column if the header has
/// one, otherwise the last column. Headerless single-column files work too.
std::vector<double> read_observations(std::istream& in);

std::string read_file(const std::string& path);
/// Writes bytes exactly as given (LF line endings preserved).
void write_file(const std::string& path, std::string_view content);

}  // namespace bumpscan::io
