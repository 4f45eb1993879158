#include "config.hpp"

#include <charconv>
#include <fstream>
#include <initializer_list>
#include <json.hpp>
#include <sstream>
#include <string>

namespace rsput::cli {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& path) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(path, "missing required key");
  return *it;
}

void check_keys(const json& obj, const std::string& prefix,
                std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw SchemaError(prefix.empty() ? it.key() : prefix + "." + it.key(),
                        "unknown key");
  }
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SchemaError(path, "expected a number");
  return j.get<double>();
}

long long as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<long long>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw SchemaError(path, "expected a boolean");
  return j.get<bool>();
}

/// Exact rational "p/q": both sides integral, fully consumed, q nonzero.
double parse_rational(const std::string& s, const std::string& path) {
  const auto slash = s.find('/');
  if (slash == std::string::npos || slash == 0 || slash + 1 == s.size())
    throw SchemaError(path, "malformed rational \"" + s + "\"");
  long long num = 0;
  long long den = 0;
  const char* num_end = s.data() + slash;
  const char* den_end = s.data() + s.size();
  const auto rn = std::from_chars(s.data(), num_end, num);
  const auto rd = std::from_chars(s.data() + slash + 1, den_end, den);
  if (rn.ec != std::errc{} || rn.ptr != num_end || rd.ec != std::errc{} ||
      rd.ptr != den_end || den == 0)
    throw SchemaError(path, "malformed rational \"" + s + "\"");
  return static_cast<double>(num) / static_cast<double>(den);
}

double generator_entry(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return parse_rational(j.get<std::string>(), path);
  throw SchemaError(path, "expected a number or a \"p/q\" string");
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("$", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaError("$", "top level must be an object");
  check_keys(root, "", {"strike", "maturity", "regimes", "generator", "grid",
                        "control", "outputs"});

  RunConfig cfg;
  cfg.model.strike = as_number(require(root, "strike", "strike"), "strike");
  cfg.model.maturity =
      as_number(require(root, "maturity", "maturity"), "maturity");

  const json& regimes = require(root, "regimes", "regimes");
  if (!regimes.is_array() || regimes.empty())
    throw SchemaError("regimes", "expected a non-empty array");
  for (std::size_t i = 0; i < regimes.size(); ++i) {
    const std::string path = "regimes[" + std::to_string(i) + "]";
    const json& reg = regimes[i];
    if (!reg.is_object()) throw SchemaError(path, "expected an object");
    check_keys(reg, path, {"rate", "sigma"});
    RegimeParams params;
    params.rate =
        as_number(require(reg, "rate", path + ".rate"), path + ".rate");
    params.sigma =
        as_number(require(reg, "sigma", path + ".sigma"), path + ".sigma");
    cfg.model.regimes.push_back(params);
  }
  const std::size_t dim = cfg.model.regimes.size();

  const json& generator = require(root, "generator", "generator");
  if (!generator.is_array() || generator.size() != dim)
    throw SchemaError("generator",
                      "expected " + std::to_string(dim) + " rows");
  cfg.model.generator.dim = dim;
  cfg.model.generator.entries.reserve(dim * dim);
  for (std::size_t i = 0; i < dim; ++i) {
    const std::string row_path = "generator[" + std::to_string(i) + "]";
    const json& row = generator[i];
    if (!row.is_array() || row.size() != dim)
      throw SchemaError(row_path,
                        "expected " + std::to_string(dim) + " entries");
    for (std::size_t j = 0; j < dim; ++j)
      cfg.model.generator.entries.push_back(generator_entry(
          row[j], row_path + "[" + std::to_string(j) + "]"));
  }

  if (root.contains("grid")) {
    const json& grid = root["grid"];
    if (!grid.is_object()) throw SchemaError("grid", "expected an object");
    check_keys(grid, "grid", {"x_max", "m"});
    if (grid.contains("x_max"))
      cfg.grid.x_max = as_number(grid["x_max"], "grid.x_max");
    if (grid.contains("m")) {
      const long long m = as_integer(grid["m"], "grid.m");
      if (m < 1) throw SchemaError("grid.m", "expected a positive integer");
      cfg.grid.m = static_cast<std::size_t>(m);
    }
  }

  if (root.contains("control")) {
    const json& control = root["control"];
    if (!control.is_object()) throw SchemaError("control", "expected an object");
    check_keys(control, "control",
               {"tol", "phi", "safety", "initial_dt", "xbar_cells",
                "accept_exponent", "reject_exponent", "standard_controller"});
    if (control.contains("tol"))
      cfg.control.tol = as_number(control["tol"], "control.tol");
    if (control.contains("phi"))
      cfg.control.phi = as_number(control["phi"], "control.phi");
    if (control.contains("safety"))
      cfg.control.safety = as_number(control["safety"], "control.safety");
    if (control.contains("accept_exponent"))
      cfg.control.accept_exponent =
          as_number(control["accept_exponent"], "control.accept_exponent");
    if (control.contains("reject_exponent"))
      cfg.control.reject_exponent =
          as_number(control["reject_exponent"], "control.reject_exponent");
    if (control.contains("standard_controller"))
      cfg.control.standard_controller = as_bool(control["standard_controller"],
                                                "control.standard_controller");
    if (control.contains("xbar_cells")) {
      const long long cells =
          as_integer(control["xbar_cells"], "control.xbar_cells");
      if (cells < 1)
        throw SchemaError("control.xbar_cells", "expected a positive integer");
      cfg.control.xbar_cells = static_cast<std::size_t>(cells);
    }
    if (control.contains("initial_dt")) {
      const json& dt = control["initial_dt"];
      if (dt.is_number()) {
        cfg.control.initial_dt = dt.get<double>();
      } else if (dt.is_string() && dt.get<std::string>() == "h^2") {
        cfg.control.initial_dt.reset();
      } else {
        throw SchemaError("control.initial_dt",
                          "expected a number or the string \"h^2\"");
      }
    }
  }

  if (root.contains("outputs")) {
    const json& outputs = root["outputs"];
    if (!outputs.is_object()) throw SchemaError("outputs", "expected an object");
    check_keys(outputs, "outputs", {"spots", "gamma", "digits"});
    if (outputs.contains("spots")) {
      const json& spots = outputs["spots"];
      if (!spots.is_array()) throw SchemaError("outputs.spots", "expected an array");
      for (std::size_t i = 0; i < spots.size(); ++i) {
        const std::string path = "outputs.spots[" + std::to_string(i) + "]";
        const double spot = as_number(spots[i], path);
        if (!(spot > 0.0)) throw SchemaError(path, "spots must be positive");
        cfg.outputs.spots.push_back(spot);
      }
    }
    if (outputs.contains("gamma"))
      cfg.outputs.gamma = as_bool(outputs["gamma"], "outputs.gamma");
    if (outputs.contains("digits"))
      cfg.outputs.digits = static_cast<int>(
          as_integer(outputs["digits"], "outputs.digits"));
  }

  ensure_valid(cfg.model);
  return cfg;
}

std::string emit_normalized(const RunConfig& config) {
  json root;
  root["strike"] = config.model.strike;
  root["maturity"] = config.model.maturity;

  json regimes = json::array();
  for (const RegimeParams& params : config.model.regimes) {
    json reg;
    reg["rate"] = params.rate;
    reg["sigma"] = params.sigma;
    regimes.push_back(std::move(reg));
  }
  root["regimes"] = std::move(regimes);

  json generator = json::array();
  const std::size_t dim = config.model.generator.dim;
  for (std::size_t i = 0; i < dim; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < dim; ++j)
      row.push_back(config.model.generator.at(i, j));
    generator.push_back(std::move(row));
  }
  root["generator"] = std::move(generator);

  root["grid"]["x_max"] = config.grid.x_max;
  root["grid"]["m"] = config.grid.m;

  json& control = root["control"];
  control["tol"] = config.control.tol;
  control["phi"] = config.control.phi;
  control["safety"] = config.control.safety;
  if (config.control.initial_dt)
    control["initial_dt"] = *config.control.initial_dt;
  else
    control["initial_dt"] = "h^2";
  control["xbar_cells"] = config.control.xbar_cells;
  control["accept_exponent"] = config.control.accept_exponent;
  control["reject_exponent"] = config.control.reject_exponent;
  control["standard_controller"] = config.control.standard_controller;

  root["outputs"]["spots"] = config.outputs.spots;
  root["outputs"]["gamma"] = config.outputs.gamma;
  root["outputs"]["digits"] = config.outputs.digits;

  return root.dump(2) + "\n";
}

std::string load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path, "cannot read file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace rsput::cli
