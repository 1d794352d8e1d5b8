#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bumpscan/arma.hpp"
#include "bumpscan/covtools.hpp"
#include "bumpscan/detect.hpp"
#include "bumpscan/rng.hpp"

namespace bumpscan::mc {

/// Mean vector delta * sum_j 1_{I_j} over pairwise disjoint windows.
struct BumpSignal {
  std::size_t n = 0;
  double delta = 0.0;
  std::vector<cov::WindowIndex> intervals;

  /// Throws InputError unless every window is in range and windows are disjoint.
  void check() const;
  std::vector<double> mean() const;
  void add_to(std::span<double> y) const;
};

inline constexpr std::size_t kPlacementRetryCap = 100'000;

/**
 * k disjoint windows of width w in 1..n. All k starts are drawn uniformly
 * from 1..n-w+1 and the whole draw is rejected unless the windows are
 * pairwise disjoint, so accepted draws are uniform over ordered disjoint
 * configurations. Throws InputError if k*w > n or after kPlacementRetryCap
 * rejected draws.
 */
std::vector<cov::WindowIndex> place_bumps(std::size_t k, std::size_t w, std::size_t n, Rng& rng);

struct Regime {
  std::size_t n;
  double lambda;
};

/// small -> (829, 0.1), medium -> (2157, 0.05), large -> (5312, 0.025).
Regime regime_preset(std::string_view name);

/// One row of a grid. rho is set for AR(1) rows built from a correlation.
struct GridModel {
  std::string label;
  arma::ArmaModel model;
  std::optional<double> rho;

  static GridModel from_rho(double rho);
};

struct ExperimentConfig {
  std::size_t n = 829;
  double lambda = 0.1;
  std::vector<GridModel> models;
  std::vector<double> deltas;
  std::size_t bumps = 1;
  std::size_t trials = 500;
  double alpha = 0.05;
  std::uint64_t seed = 20240101;
  detect::TestKind kind = detect::TestKind::scan;
};

/// Every schema violation, empty when valid.
std::vector<std::string> config_errors(const ExperimentConfig& cfg);
/// Throws InputError listing all of config_errors().
void validate(const ExperimentConfig& cfg);

/// Rejection rates over (model row, delta column), row-major.
struct PowerGrid {
  std::vector<std::string> row_labels;
  std::vector<std::optional<double>> row_rho;
  std::vector<double> deltas;
  std::size_t trials = 0;
  std::vector<std::size_t> rejections;
  std::vector<double> rate;
  std::vector<double> se;

  std::size_t rows() const noexcept { return row_labels.size(); }
  std::size_t cols() const noexcept { return deltas.size(); }
  double rate_at(std::size_t row, std::size_t col) const { return rate[row * cols() + col]; }
  double se_at(std::size_t row, std::size_t col) const { return se[row * cols() + col]; }
};

/// Seed streams of one trial. Noise does not depend on the delta column, so
/// the delta = 0 column reproduces the type-I run exactly.
inline std::uint64_t noise_seed(std::uint64_t master, std::size_t row, std::size_t trial) {
  return derive_seed(master, row, trial, 0u);
}
inline std::uint64_t placement_seed(std::uint64_t master, std::size_t row, std::size_t trial) {
  return derive_seed(master, row, trial, 1u);
}

/// Serial reference implementation: rows, trials, and deltas in order.
PowerGrid estimate_power_grid_serial(const ExperimentConfig& cfg);

/// OpenMP implementation; bit-identical to the serial reference for any
/// worker count (workers <= 0 uses the OpenMP default).
PowerGrid estimate_power_grid(const ExperimentConfig& cfg, int workers = 0);

/// Pure-noise rejection rates: the power grid with a single delta = 0 column.
PowerGrid estimate_type1(const ExperimentConfig& cfg, int workers = 0);

struct ContourPoint {
  double rho;
  double delta;
};

/// sqrt(2)/(1-rho) sqrt(-log(lambda)/(n lambda)) at every AR(1) row of the
/// grid, omitting rows where the contour exceeds the largest grid delta.
std::vector<ContourPoint> boundary_overlay(const PowerGrid& grid, Regime regime);

}  // namespace bumpscan::mc
