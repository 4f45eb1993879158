#pragma once

#include <rsput/model.hpp>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsput::cli {

/// Config error carrying the JSON path of the offending key, e.g.
/// "regimes[1].sigma" or "control.tol".
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::string path, const std::string& message)
      : std::runtime_error(path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

struct OutputOptions {
  std::vector<double> spots;
  bool gamma = false;
  /// Decimal places for value columns; 1..16 formats fixed, anything else
  /// emits full-precision shortest form.
  int digits = 17;

  bool operator==(const OutputOptions&) const = default;
};

/// Everything one run needs, parsed and validated.
struct RunConfig {
  MarketModel model;
  GridSpec grid;
  StepControlConfig control;
  OutputOptions outputs;

  bool operator==(const RunConfig&) const = default;
};

/// Parses the documented JSON schema. Unknown keys anywhere, wrong types,
/// missing required fields, and malformed rational strings raise SchemaError;
/// model invariants are enforced afterwards and raise std::invalid_argument.
RunConfig parse_config(const std::string& text);

/// Serializes a RunConfig with every field explicit (defaults materialized),
/// such that parse_config(emit_normalized(c)) == c.
std::string emit_normalized(const RunConfig& config);

/// Reads a whole file; raises SchemaError if it cannot be read.
std::string load_file(const std::string& path);

}  // namespace rsput::cli
