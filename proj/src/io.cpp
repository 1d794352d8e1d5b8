#include "bumpscan/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "bumpscan/errors.hpp"
#include "bumpscan/mc.hpp"

namespace bumpscan::io {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::vector<double> number_array(const json& j, const char* key, std::vector<std::string>& errs) {
  std::vector<double> out;
  if (!j.is_array()) {
    errs.push_back(std::string(key) + " must be an array of numbers");
    return out;
  }
  for (const auto& v : j) {
    if (!v.is_number()) {
      errs.push_back(std::string(key) + " must contain only numbers");
      return {};
    }
    out.push_back(v.get<double>());
  }
  return out;
}

arma::ArmaModel model_from_json_collect(const json& j, std::vector<std::string>& errs,
                                        const std::string& where) {
  arma::ArmaModel m;
  if (!j.is_object()) {
    errs.push_back(where + "model must be an object like {\"ar\": [..], \"ma\": [..]}");
    return m;
  }
  for (const auto& [key, value] : j.items()) {
    if (key == "ar")
      m.ar = number_array(value, (where + "ar").c_str(), errs);
    else if (key == "ma")
      m.ma = number_array(value, (where + "ma").c_str(), errs);
    else if (key != "label")
      errs.push_back(where + "unknown model key '" + key + "'");
  }
  return m;
}

[[noreturn]] void throw_all(const std::string& title, const std::vector<std::string>& errs) {
  std::string msg = title;
  for (const auto& e : errs) msg += "\n  - " + e;
  throw InputError(msg);
}

template <class T>
bool read_unsigned(const json& j, const char* key, T& out, std::vector<std::string>& errs) {
  if (!j.contains(key)) return false;
  const auto& v = j.at(key);
  if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    out = v.get<T>();
    return true;
  }
  errs.push_back(std::string(key) + " must be a nonnegative integer");
  return false;
}

bool read_number(const json& j, const char* key, double& out, std::vector<std::string>& errs) {
  if (!j.contains(key)) return false;
  if (!j.at(key).is_number()) {
    errs.push_back(std::string(key) + " must be a number");
    return false;
  }
  out = j.at(key).get<double>();
  return true;
}

}  // namespace

arma::ArmaModel model_from_json(const json& j) {
  std::vector<std::string> errs;
  auto m = model_from_json_collect(j, errs, "");
  if (!errs.empty()) throw_all("invalid model literal:", errs);
  return m;
}

arma::ArmaModel parse_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("model literal is not valid JSON: ") + e.what());
  }
  return model_from_json(j);
}

json model_to_json(const arma::ArmaModel& model) { return json{{"ar", model.ar}, {"ma", model.ma}}; }

mc::ExperimentConfig config_from_json(const json& input) {
  const json& j = (input.is_object() && input.contains("config")) ? input.at("config") : input;
  if (!j.is_object()) throw InputError("experiment config must be a JSON object");

  static const std::set<std::string> known = {"regime", "n",      "lambda", "alpha", "bumps", "trials",
                                              "seed",   "rho",    "models", "deltas", "kind"};
  std::vector<std::string> errs;
  for (const auto& [key, value] : j.items())
    if (!known.contains(key)) errs.push_back("unknown config key '" + key + "'");

  mc::ExperimentConfig cfg;
  if (j.contains("regime")) {
    if (!j.at("regime").is_string()) {
      errs.emplace_back("regime must be a string");
    } else {
      try {
        const auto r = mc::regime_preset(j.at("regime").get<std::string>());
        cfg.n = r.n;
        cfg.lambda = r.lambda;
      } catch (const InputError& e) {
        errs.emplace_back(e.what());
      }
    }
  }
  read_unsigned(j, "n", cfg.n, errs);
  read_number(j, "lambda", cfg.lambda, errs);
  read_number(j, "alpha", cfg.alpha, errs);
  read_unsigned(j, "bumps", cfg.bumps, errs);
  read_unsigned(j, "trials", cfg.trials, errs);
  read_unsigned(j, "seed", cfg.seed, errs);

  if (j.contains("kind")) {
    try {
      cfg.kind = detect::parse_test_kind(j.at("kind").is_string() ? j.at("kind").get<std::string>() : "");
    } catch (const InputError& e) {
      errs.emplace_back(e.what());
    }
  }
  if (j.contains("rho")) {
    for (double rho : number_array(j.at("rho"), "rho", errs)) cfg.models.push_back(mc::GridModel::from_rho(rho));
  }
  if (j.contains("models")) {
    const auto& ms = j.at("models");
    if (!ms.is_array()) {
      errs.emplace_back("models must be an array of model literals");
    } else {
      for (std::size_t i = 0; i < ms.size(); ++i) {
        const std::string where = "models[" + std::to_string(i) + "].";
        auto model = model_from_json_collect(ms[i], errs, where);
        std::string label = "model" + std::to_string(i);
        if (ms[i].is_object() && ms[i].contains("label") && ms[i].at("label").is_string())
          label = ms[i].at("label").get<std::string>();
        cfg.models.push_back({label, std::move(model), std::nullopt});
      }
    }
  }
  if (j.contains("deltas")) cfg.deltas = number_array(j.at("deltas"), "deltas", errs);

  if (errs.empty()) errs = mc::config_errors(cfg);
  if (!errs.empty()) throw_all("invalid experiment configuration:", errs);
  return cfg;
}

json config_to_json(const mc::ExperimentConfig& cfg) {
  json j;
  j["n"] = cfg.n;
  j["lambda"] = cfg.lambda;
  j["alpha"] = cfg.alpha;
  j["bumps"] = cfg.bumps;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["kind"] = std::string(detect::to_string(cfg.kind));
  j["deltas"] = cfg.deltas;
  const bool all_rho = std::all_of(cfg.models.begin(), cfg.models.end(), [](const auto& m) { return m.rho.has_value(); });
  if (all_rho) {
    json rho = json::array();
    for (const auto& m : cfg.models) rho.push_back(*m.rho);
    j["rho"] = rho;
  } else {
    json models = json::array();
    for (const auto& m : cfg.models) {
      auto mj = model_to_json(m.model);
      mj["label"] = m.label;
      models.push_back(mj);
    }
    j["models"] = models;
  }
  return j;
}

namespace {
std::string grid_csv(const mc::PowerGrid& g, const std::vector<double>& values) {
  const bool all_rho = std::all_of(g.row_rho.begin(), g.row_rho.end(), [](const auto& r) { return r.has_value(); });
  std::string out = all_rho ? "rho" : "model";
  for (double d : g.deltas) out += "," + format_double(d);
  out += '\n';
  for (std::size_t r = 0; r < g.rows(); ++r) {
    out += all_rho ? format_double(*g.row_rho[r]) : g.row_labels[r];
    for (std::size_t c = 0; c < g.cols(); ++c) out += "," + format_double(values[r * g.cols() + c]);
    out += '\n';
  }
  return out;
}
}  // namespace

std::string power_grid_csv(const mc::PowerGrid& grid) { return grid_csv(grid, grid.rate); }
std::string power_grid_se_csv(const mc::PowerGrid& grid) { return grid_csv(grid, grid.se); }

std::vector<double> read_observations(std::istream& in) {
  std::vector<double> out;
  std::string line;
  std::optional<std::size_t> column;
  bool first = true;
  std::size_t line_no = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(s);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!s.empty() && s.back() == ',') cells.emplace_back();
    return cells;
  };
  auto parse = [](const std::string& s, double& v) {
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && *b == ' ') ++b;
    while (e > b && e[-1] == ' ') --e;
    if (b < e && *b == '+') ++b;
    const auto res = std::from_chars(b, e, v);
    return res.ec == std::errc() && res.ptr == e;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (first) {
      first = false;
      double probe;
      if (!parse(cells.back(), probe)) {
        column = cells.size() - 1;
        for (std::size_t i = 0; i < cells.size(); ++i)
          if (cells[i] == "observation") column = i;
        continue;
      }
    }
    const std::size_t col = column.value_or(cells.size() - 1);
    double v;
    if (col >= cells.size() || !parse(cells[col], v))
      throw InputError("data file line " + std::to_string(line_no) + ": expected a number");
    out.push_back(v);
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace bumpscan::io
