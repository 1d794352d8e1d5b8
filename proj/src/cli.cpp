#include "bumpscan/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bumpscan/arma.hpp"
#include "bumpscan/covtools.hpp"
#include "bumpscan/detect.hpp"
#include "bumpscan/errors.hpp"
#include "bumpscan/io.hpp"
#include "bumpscan/mc.hpp"

namespace bumpscan::cli {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 20240101;
constexpr std::uint64_t kSimulateBumpStream = 0xb0b;

struct Options {
  std::string model = "{}";
  std::size_t n = 0;
  double lambda = 0.0;
  double alpha = 0.05;
  std::vector<double> deltas;
  std::size_t bumps = 1;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::string kind = "scan";
  int workers = 0;
  std::string out;
  std::string data;
  std::string config;
  std::string regime;
  std::vector<double> rho;
  bool json_output = false;
};

std::uint64_t env_seed() {
  const char* s = std::getenv("BUMPSCAN_SEED");
  if (!s || !*s) return kDefaultSeed;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(s, &end, 10);
  if (*end != '\0') throw InputError("BUMPSCAN_SEED must be an unsigned integer");
  return v;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void ensure_parent(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty()) std::filesystem::create_directories(parent, ec);
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  ensure_parent(path);
  io::write_file(path, content);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Options& o, bool lambda_given, bool seed_given, std::ostream& out) {
  const auto model = io::parse_model(o.model);
  if (o.n == 0) throw InputError("--n must be at least 1");
  const std::uint64_t seed = seed_given ? o.seed : env_seed();
  const auto noise = arma::sample_path(model, o.n, seed);

  const double delta = o.deltas.empty() ? 0.0 : o.deltas.front();
  if (o.deltas.size() > 1) throw InputError("simulate takes a single --delta");
  std::vector<double> mean(o.n, 0.0);
  if (lambda_given) {
    const std::size_t w = cov::window_width(o.n, o.lambda);
    if (w == 0) throw InputError("floor(n * lambda) must be at least 1");
    Rng rng(derive_seed(seed, kSimulateBumpStream));
    mc::BumpSignal bump{o.n, delta, mc::place_bumps(o.bumps, w, o.n, rng)};
    mean = bump.mean();
  } else if (delta != 0.0) {
    throw InputError("--delta needs --lambda to set the bump length");
  }

  std::string csv = "index,mean,observation\n";
  for (std::size_t i = 0; i < o.n; ++i) {
    csv += std::to_string(i + 1) + ',' + io::format_double(mean[i]) + ',' +
           io::format_double(mean[i] + noise[i]) + '\n';
  }
  emit(o.out, csv, out);
  return kSuccess;
}

int cmd_boundary(const Options& o, std::ostream& out) {
  const auto model = io::parse_model(o.model);
  if (o.n == 0) throw InputError("--n must be at least 1");
  const double f0 = arma::long_run_variance(model);
  const double delta = detect::detection_boundary(model, o.n, o.lambda);
  const double rate = std::sqrt(-2.0 * std::log(o.lambda) / (static_cast<double>(o.n) * o.lambda));

  // AR(1) with correlation rho, standardized to unit marginal variance.
  std::optional<double> rho;
  if (model.is_pure_ar() && model.p() == 1) rho = -model.ar[0];

  if (o.json_output) {
    json j{{"model", io::model_to_json(model)}, {"n", o.n},   {"lambda", o.lambda},
           {"f0", f0},                           {"rate", rate}, {"delta", delta}};
    if (rho) {
      j["standardized_factor"] = std::sqrt((1.0 + *rho) / (1.0 - *rho));
      j["sample_size_ratio_vs_opposite_rho"] = std::pow((1.0 + *rho) / (1.0 - *rho), 2.0);
    }
    out << j.dump() << '\n';
    return kSuccess;
  }
  out << "long-run variance f(0): " << io::format_double(f0) << '\n';
  out << "rate sqrt(-2 log(lambda)/(n lambda)): " << io::format_double(rate) << '\n';
  out << "boundary delta = sqrt(f(0)) * rate: " << io::format_double(delta) << '\n';
  if (rho) {
    const double factor = std::sqrt((1.0 + *rho) / (1.0 - *rho));
    out << "note: AR(1) rho = " << io::format_double(*rho) << " standardized to unit variance has boundary factor "
        << std::setprecision(3) << factor << " and needs " << factor * factor * factor * factor
        << " times the sample size of rho = " << io::format_double(-*rho) << '\n';
  }
  return kSuccess;
}

int cmd_test(const Options& o, bool n_given, std::ostream& out) {
  const auto model = io::parse_model(o.model);
  std::ifstream in(o.data);
  if (!in) throw std::runtime_error("cannot open data file '" + o.data + "'");
  const auto y = io::read_observations(in);
  if (n_given && y.size() != o.n) {
    throw InputError("data has " + std::to_string(y.size()) + " observations but --n is " + std::to_string(o.n));
  }
  const detect::TestConfig cfg{o.alpha, o.lambda, y.size(), model};
  const auto kind = detect::parse_test_kind(o.kind);
  const auto outcome = kind == detect::TestKind::scan ? detect::scan_test(y, cfg) : detect::disjoint_lrt_test(y, cfg);
  out << detect::kOutcomeCsvHeader << '\n' << detect::to_csv_row(outcome) << '\n';
  return outcome.reject ? kReject : kSuccess;
}

int cmd_precision_dump(const Options& o, std::ostream& out) {
  const auto model = io::parse_model(o.model);
  const auto prec = cov::ar_precision(model, o.n);
  std::string csv;
  for (std::size_t i = 0; i < o.n; ++i) {
    for (std::size_t j = 0; j < o.n; ++j) {
      if (j) csv += ',';
      csv += io::format_double(prec(i, j));
    }
    csv += '\n';
  }
  emit(o.out, csv, out);
  return kSuccess;
}

// Builds the experiment from --config (if any) and explicit flags, flags winning.
mc::ExperimentConfig experiment_config(const Options& o, const CLI::App& sub) {
  json j = json::object();
  if (!o.config.empty()) {
    try {
      j = json::parse(io::read_file(o.config));
    } catch (const json::parse_error& e) {
      throw InputError("config '" + o.config + "' is not valid JSON: " + e.what());
    }
    if (j.is_object() && j.contains("config")) j = j.at("config");
  }
  if (!j.is_object()) throw InputError("experiment config must be a JSON object");
  auto given = [&](const char* flag) {
    const auto* opt = sub.get_option_no_throw(flag);
    return opt && opt->count() > 0;
  };

  if (given("--regime")) {
    j.erase("n");
    j.erase("lambda");
    j["regime"] = o.regime;
  }
  if (given("--n")) j["n"] = o.n;
  if (given("--lambda")) j["lambda"] = o.lambda;
  if (given("--alpha")) j["alpha"] = o.alpha;
  if (given("--bumps")) j["bumps"] = o.bumps;
  if (given("--trials")) j["trials"] = o.trials;
  if (given("--kind")) j["kind"] = o.kind;
  if (given("--delta")) j["deltas"] = o.deltas;
  if (given("--rho")) {
    j.erase("models");
    j["rho"] = o.rho;
  }
  if (given("--model")) {
    j.erase("rho");
    auto m = json::parse(o.model);
    j["models"] = json::array({m});
  }
  if (given("--seed"))
    j["seed"] = o.seed;
  else if (!j.contains("seed"))
    j["seed"] = env_seed();
  if (!j.contains("deltas")) j["deltas"] = json::array({0.0});
  return io::config_from_json(j);
}

int cmd_experiment(const Options& o, const CLI::App& sub, bool type1_only, std::ostream& out) {
  auto cfg = experiment_config(o, sub);
  if (type1_only) cfg.deltas = {0.0};
  const auto started = std::chrono::steady_clock::now();
  const std::string started_utc = utc_timestamp();
  const auto grid = type1_only ? mc::estimate_type1(cfg, o.workers) : mc::estimate_power_grid(cfg, o.workers);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const std::string prefix = o.out.empty() ? (type1_only ? "type1" : "power") : o.out;
  const std::string rates_path = prefix + ".csv";
  const std::string se_path = prefix + "_se.csv";
  const std::string manifest_path = prefix + "_manifest.json";
  ensure_parent(rates_path);
  io::write_file(rates_path, io::power_grid_csv(grid));
  io::write_file(se_path, io::power_grid_se_csv(grid));

  json manifest{{"tool", "bumpscan"},
                {"version", BUMPSCAN_VERSION},
                {"command", type1_only ? "type1" : "power"},
                {"config", io::config_to_json(cfg)},
                {"master_seed", cfg.seed},
                {"workers", o.workers},
                {"started_utc", started_utc},
                {"elapsed_seconds", elapsed},
                {"outputs", {{"rates", rates_path}, {"standard_errors", se_path}}}};
  if (cfg.models.size() && std::all_of(cfg.models.begin(), cfg.models.end(), [](const auto& m) { return m.rho; })) {
    json contour = json::array();
    for (const auto& pt : mc::boundary_overlay(grid, {cfg.n, cfg.lambda}))
      contour.push_back({{"rho", pt.rho}, {"delta", pt.delta}});
    manifest["boundary_contour"] = contour;
  }
  io::write_file(manifest_path, manifest.dump(2) + "\n");

  out << io::power_grid_csv(grid);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bump detection in stationary Gaussian ARMA noise"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(BUMPSCAN_VERSION));
  Options o;

  const std::string model_help = R"(model literal {"ar":[..],"ma":[..]} with phi(z)=1+sum ar_i z^i, theta(z)=1+sum ma_i z^i)";

  auto* simulate = app.add_subcommand("simulate", "draw one observation vector (mean + ARMA noise) as CSV");
  simulate->add_option("--model", o.model, model_help);
  simulate->add_option("--n", o.n, "sample count")->required();
  simulate->add_option("--seed", o.seed, "seed (fallback: BUMPSCAN_SEED)");
  simulate->add_option("--delta", o.deltas, "bump height");
  simulate->add_option("--lambda", o.lambda, "bump length in (0,1); places bumps at random");
  simulate->add_option("--bumps", o.bumps, "number of disjoint bumps");
  simulate->add_option("--out", o.out, "output CSV path (default stdout)");

  auto* boundary = app.add_subcommand("boundary", "asymptotic detection boundary for a model");
  boundary->add_option("--model", o.model, model_help);
  boundary->add_option("--n", o.n, "sample count")->required();
  boundary->add_option("--lambda", o.lambda, "bump length in (0,1)")->required();
  boundary->add_flag("--json", o.json_output, "machine-readable output");

  auto* test = app.add_subcommand("test", "run the scan or disjoint-block test on a data file");
  test->add_option("--data", o.data, "CSV with an 'observation' column (or one value per line)")->required();
  test->add_option("--model", o.model, model_help);
  test->add_option("--lambda", o.lambda, "bump length in (0,1)")->required();
  test->add_option("--alpha", o.alpha, "significance level");
  test->add_option("--kind", o.kind, "scan or disjoint");
  test->add_option("--n", o.n, "expected sample count");

  auto add_experiment_options = [&](CLI::App* sub, bool with_delta) {
    sub->add_option("--config", o.config, "JSON experiment config or run manifest");
    sub->add_option("--regime", o.regime, "small, medium, or large");
    sub->add_option("--model", o.model, model_help);
    sub->add_option("--rho", o.rho, "AR(1) correlations (comma separated)")->delimiter(',');
    sub->add_option("--n", o.n, "sample count");
    sub->add_option("--lambda", o.lambda, "bump length in (0,1)");
    sub->add_option("--alpha", o.alpha, "significance level");
    if (with_delta) {
      sub->add_option("--delta", o.deltas, "bump heights (comma separated)")->delimiter(',');
      sub->add_option("--bumps", o.bumps, "number of disjoint bumps per trial");
    }
    sub->add_option("--trials", o.trials, "Monte Carlo trials per grid row");
    sub->add_option("--seed", o.seed, "master seed (fallback: BUMPSCAN_SEED)");
    sub->add_option("--kind", o.kind, "scan or disjoint");
    sub->add_option("--workers", o.workers, "worker threads; results do not depend on it");
    sub->add_option("--out", o.out, "output prefix: <out>.csv, <out>_se.csv, <out>_manifest.json");
  };
  auto* type1 = app.add_subcommand("type1", "empirical type-I error over a model grid");
  add_experiment_options(type1, false);
  auto* power = app.add_subcommand("power", "empirical power over a (model, delta) grid");
  add_experiment_options(power, true);
  power->add_option("config_file", o.config, "experiment config (same as --config)");

  auto* precision = app.add_subcommand("precision-dump", "dense AR(p) precision matrix as CSV");
  precision->add_option("--model", o.model, model_help);
  precision->add_option("--n", o.n, "dimension")->required();
  precision->add_option("--out", o.out, "output CSV path (default stdout)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << BUMPSCAN_VERSION << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kSuccess;
    }
    err << "error: " << e.what() << '\n';
    return kInputError;
  }

  try {
    if (*simulate) return cmd_simulate(o, simulate->count("--lambda") > 0, simulate->count("--seed") > 0, out);
    if (*boundary) return cmd_boundary(o, out);
    if (*test) return cmd_test(o, test->count("--n") > 0, out);
    if (*type1) return cmd_experiment(o, *type1, true, out);
    if (*power) {
      if (o.config.empty() && power->count("--rho") == 0 && power->count("--model") == 0)
        throw InputError("power needs a config file or a --rho/--model grid");
      return cmd_experiment(o, *power, false, out);
    }
    if (*precision) return cmd_precision_dump(o, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const DomainError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const UnsupportedError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kInputError;
}

}  // namespace bumpscan::cli
