#include "bumpscan/mc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <omp.h>

#include "bumpscan/errors.hpp"
#include "bumpscan/io.hpp"

namespace bumpscan::mc {

void BumpSignal::check() const {
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& a = intervals[i];
    if (a.width == 0 || a.start < 1 || a.end() > n) {
      std::ostringstream os;
      os << "bump window [" << a.start << ", " << a.end() << "] outside 1.." << n;
      throw InputError(os.str());
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (a.overlaps(intervals[j])) throw InputError("bump windows overlap");
    }
  }
}

std::vector<double> BumpSignal::mean() const {
  std::vector<double> mu(n, 0.0);
  add_to(mu);
  return mu;
}

void BumpSignal::add_to(std::span<double> y) const {
  for (const auto& w : intervals)
    for (std::size_t i = w.start - 1; i < w.end(); ++i) y[i] += delta;
}

std::vector<cov::WindowIndex> place_bumps(std::size_t k, std::size_t w, std::size_t n, Rng& rng) {
  if (w == 0) throw InputError("bump width must be positive");
  if (k * w > n) {
    std::ostringstream os;
    os << "cannot place " << k << " disjoint bumps of width " << w << " in " << n << " samples";
    throw InputError(os.str());
  }
  std::vector<cov::WindowIndex> out(k);
  const std::uint64_t positions = n - w + 1;
  for (std::size_t attempt = 0; attempt < kPlacementRetryCap; ++attempt) {
    bool disjoint = true;
    for (std::size_t j = 0; j < k; ++j) {
      out[j] = {static_cast<std::size_t>(rng.uniform_below(positions)) + 1, w};
      for (std::size_t i = 0; i < j && disjoint; ++i) disjoint = !out[j].overlaps(out[i]);
    }
    if (disjoint) return out;
  }
  throw InputError("bump placement exceeded the retry cap");
}

Regime regime_preset(std::string_view name) {
  if (name == "small") return {829, 0.1};
  if (name == "medium") return {2157, 0.05};
  if (name == "large") return {5312, 0.025};
  throw InputError("unknown regime '" + std::string(name) + "' (expected small, medium, or large)");
}

GridModel GridModel::from_rho(double rho) {
  return {io::format_double(rho), arma::ArmaModel::ar1(rho), rho};
}

std::vector<std::string> config_errors(const ExperimentConfig& cfg) {
  std::vector<std::string> errs;
  if (cfg.n == 0) errs.emplace_back("n must be positive");
  if (!(cfg.lambda > 0.0 && cfg.lambda < 1.0)) errs.emplace_back("lambda must lie in (0, 1)");
  else if (cfg.n > 0 && cov::window_width(cfg.n, cfg.lambda) == 0)
    errs.emplace_back("floor(n * lambda) must be at least 1");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) errs.emplace_back("alpha must lie in (0, 1)");
  if (cfg.trials == 0) errs.emplace_back("trials must be at least 1");
  if (cfg.models.empty()) errs.emplace_back("model grid (rho or models) must be nonempty");
  if (cfg.deltas.empty()) errs.emplace_back("delta grid must be nonempty");
  for (double d : cfg.deltas)
    if (!std::isfinite(d)) errs.emplace_back("delta values must be finite");
  if (cfg.bumps == 0) errs.emplace_back("bumps must be at least 1");
  for (const auto& m : cfg.models) {
    try {
      const auto report = arma::validate(m.model);
      for (const auto& v : report.violations) errs.push_back("model '" + m.label + "': " + v);
    } catch (const InputError& e) {
      errs.push_back("model '" + m.label + "': " + e.what());
    }
  }
  if (errs.empty()) {
    const std::size_t w = cov::window_width(cfg.n, cfg.lambda);
    if (cfg.bumps * w > cfg.n) errs.emplace_back("bumps * floor(n * lambda) exceeds n");
  }
  return errs;
}

void validate(const ExperimentConfig& cfg) {
  const auto errs = config_errors(cfg);
  if (errs.empty()) return;
  std::string msg = "invalid experiment configuration:";
  for (const auto& e : errs) msg += "\n  - " + e;
  throw InputError(msg);
}

namespace {

struct RowContext {
  arma::NoiseSampler sampler;
  detect::BumpTest test;
};

std::vector<RowContext> prepare_rows(const ExperimentConfig& cfg) {
  std::vector<RowContext> rows;
  rows.reserve(cfg.models.size());
  for (const auto& m : cfg.models) {
    const detect::TestConfig tc{cfg.alpha, cfg.lambda, cfg.n, m.model};
    rows.push_back({arma::NoiseSampler(m.model, cfg.n), detect::BumpTest(cfg.kind, tc)});
  }
  return rows;
}

// One trial of one row: writes a 0/1 decision per delta column into out.
void run_trial(const ExperimentConfig& cfg, const RowContext& ctx, std::size_t row, std::size_t trial,
               std::span<std::uint8_t> out, std::vector<double>& noise, std::vector<double>& y) {
  noise.resize(cfg.n);
  y.resize(cfg.n);
  Rng noise_rng(noise_seed(cfg.seed, row, trial));
  ctx.sampler.draw(noise_rng, noise);

  Rng place_rng(placement_seed(cfg.seed, row, trial));
  const std::size_t w = cov::window_width(cfg.n, cfg.lambda);
  BumpSignal bump{cfg.n, 0.0, place_bumps(cfg.bumps, w, cfg.n, place_rng)};

  for (std::size_t c = 0; c < cfg.deltas.size(); ++c) {
    std::copy(noise.begin(), noise.end(), y.begin());
    if (cfg.deltas[c] != 0.0) {
      bump.delta = cfg.deltas[c];
      bump.add_to(y);
    }
    out[c] = ctx.test(y).reject ? 1 : 0;
  }
}

PowerGrid aggregate(const ExperimentConfig& cfg, const std::vector<std::uint8_t>& decisions) {
  PowerGrid g;
  g.deltas = cfg.deltas;
  g.trials = cfg.trials;
  for (const auto& m : cfg.models) {
    g.row_labels.push_back(m.label);
    g.row_rho.push_back(m.rho);
  }
  const std::size_t rows = cfg.models.size();
  const std::size_t cols = cfg.deltas.size();
  g.rejections.assign(rows * cols, 0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t t = 0; t < cfg.trials; ++t)
      for (std::size_t c = 0; c < cols; ++c)
        g.rejections[r * cols + c] += decisions[(r * cfg.trials + t) * cols + c];
  g.rate.resize(rows * cols);
  g.se.resize(rows * cols);
  const double trials = static_cast<double>(cfg.trials);
  for (std::size_t i = 0; i < rows * cols; ++i) {
    const double r = static_cast<double>(g.rejections[i]) / trials;
    g.rate[i] = r;
    g.se[i] = std::sqrt(r * (1.0 - r) / trials);
  }
  return g;
}

}  // namespace

PowerGrid estimate_power_grid_serial(const ExperimentConfig& cfg) {
  validate(cfg);
  const auto rows = prepare_rows(cfg);
  const std::size_t cols = cfg.deltas.size();
  std::vector<std::uint8_t> decisions(rows.size() * cfg.trials * cols);
  std::vector<double> noise;
  std::vector<double> y;
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t t = 0; t < cfg.trials; ++t)
      run_trial(cfg, rows[r], r, t, std::span(decisions).subspan((r * cfg.trials + t) * cols, cols), noise, y);
  return aggregate(cfg, decisions);
}

PowerGrid estimate_power_grid(const ExperimentConfig& cfg, int workers) {
  validate(cfg);
  const auto rows = prepare_rows(cfg);
  const std::size_t cols = cfg.deltas.size();
  const std::size_t total = rows.size() * cfg.trials;
  std::vector<std::uint8_t> decisions(total * cols);
  const int threads = workers > 0 ? workers : omp_get_max_threads();

  // Exceptions cannot cross the parallel region; the first one is rethrown after it.
  std::exception_ptr failure;
#pragma omp parallel num_threads(threads)
  {
    std::vector<double> noise;
    std::vector<double> y;
#pragma omp for schedule(dynamic, 16)
    for (std::int64_t idx = 0; idx < static_cast<std::int64_t>(total); ++idx) {
      const auto i = static_cast<std::size_t>(idx);
      const std::size_t r = i / cfg.trials;
      const std::size_t t = i % cfg.trials;
      try {
        run_trial(cfg, rows[r], r, t, std::span(decisions).subspan(i * cols, cols), noise, y);
      } catch (...) {
#pragma omp critical(bumpscan_mc_failure)
        if (!failure) failure = std::current_exception();
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
  return aggregate(cfg, decisions);
}

PowerGrid estimate_type1(const ExperimentConfig& cfg, int workers) {
  ExperimentConfig null_cfg = cfg;
  null_cfg.deltas = {0.0};
  return estimate_power_grid(null_cfg, workers);
}

std::vector<ContourPoint> boundary_overlay(const PowerGrid& grid, Regime regime) {
  std::vector<ContourPoint> out;
  if (grid.deltas.empty()) return out;
  const double delta_max = *std::max_element(grid.deltas.begin(), grid.deltas.end());
  const double rate = std::sqrt(-std::log(regime.lambda) / (static_cast<double>(regime.n) * regime.lambda));
  for (const auto& rho : grid.row_rho) {
    if (!rho || *rho >= 1.0) continue;
    const double delta = std::sqrt(2.0) / (1.0 - *rho) * rate;
    if (delta <= delta_max) out.push_back({*rho, delta});
  }
  return out;
}

}  // namespace bumpscan::mc
