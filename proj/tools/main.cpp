#include <CLI11.hpp>
#include <climits>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "commands.hpp"
#include "config.hpp"

namespace {

using namespace rsput::cli;

/// REGIME_RKF_THREADS caps internal parallelism; unset, empty, or 0 means
/// "pick automatically". Unparsable values fall back to automatic.
std::size_t env_threads() {
  const char* raw = std::getenv("REGIME_RKF_THREADS");
  if (raw == nullptr || *raw == '\0') return 0;
  char* end = nullptr;
  const unsigned long value = std::strtoul(raw, &end, 10);
  if (end == raw || *end != '\0') return 0;
  return static_cast<std::size_t>(value);
}

template <typename Fn>
int with_config(const std::string& path, Fn&& fn) {
  try {
    const RunConfig config = parse_config(load_file(path));
    return fn(config);
  } catch (const SchemaError& error) {
    std::fprintf(stderr, "config error: %s\n", error.what());
    return 2;
  } catch (const std::invalid_argument& error) {
    std::fprintf(stderr, "config error: %s\n", error.what());
    return 2;
  } catch (const std::exception& error) {
    std::fprintf(stderr, "error: %s\n", error.what());
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch pricer for American puts under Markov regime switching"};
  app.require_subcommand(1);

  std::string price_config;
  PriceCommandOptions price_opts;
  int digits_override = INT_MIN;
  CLI::App* price = app.add_subcommand(
      "price", "Solve to maturity; write prices.csv, boundary.csv, steps.csv");
  price->add_option("config", price_config, "JSON config file")->required();
  price->add_option("--out-dir", price_opts.out_dir, "Output directory")
      ->capture_default_str();
  price->add_option("--digits", digits_override,
                    "Override outputs.digits (1..16 fixed decimals)");

  std::string converge_config;
  ConvergeCommandOptions converge_opts;
  converge_opts.max_threads = env_threads();
  CLI::App* converge = app.add_subcommand(
      "converge", "Fixed-step spatial refinement study; write converge.csv");
  converge->add_option("config", converge_config, "JSON config file")
      ->required();
  converge->add_option("--out-dir", converge_opts.out_dir, "Output directory")
      ->capture_default_str();
  converge
      ->add_option("--h-list", converge_opts.h_list,
                   "Halving grid spacings, e.g. 0.2,0.1,0.05")
      ->required()
      ->delimiter(',');
  converge->add_option("--fixed-k", converge_opts.fixed_k, "Fixed time step")
      ->required();
  converge->add_option("--horizon", converge_opts.horizon, "Integration time")
      ->required();
  converge->add_option("--threads", converge_opts.max_threads,
                       "Max concurrent solves (0 = auto)");

  std::string collapse_config;
  CollapseCommandOptions collapse_opts;
  bool no_clone = false;
  CLI::App* collapse = app.add_subcommand(
      "collapse-check", "Regime-collapse diagnostic against a single regime");
  collapse->add_option("config", collapse_config, "JSON config file")
      ->required();
  collapse->add_flag("--no-clone", no_clone,
                     "Keep the configured regimes (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& error) {
    const int code = app.exit(error);
    return code == 0 ? 0 : 2;
  }

  if (*price) {
    if (digits_override != INT_MIN) price_opts.digits = digits_override;
    return with_config(price_config, [&](const RunConfig& config) {
      return cmd_price(config, price_opts);
    });
  }
  if (*converge) {
    return with_config(converge_config, [&](const RunConfig& config) {
      return cmd_converge(config, converge_opts);
    });
  }
  collapse_opts.clone = !no_clone;
  return with_config(collapse_config, [&](const RunConfig& config) {
    return cmd_collapse_check(config, collapse_opts);
  });
}
