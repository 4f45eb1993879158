#include "commands.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <rsput/pricing.hpp>
#include <rsput/rkf.hpp>
#include <sstream>
#include <thread>

namespace rsput::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using steady = std::chrono::steady_clock;

constexpr double kCollapseTolerance = 1e-8;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  out.flush();
  if (!out) throw std::runtime_error("short write to " + path.string());
}

std::string timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buffer;
}

/// Wall-clock facts about a run live here, never inside the data CSVs, so
/// identical configs produce byte-identical data files.
void write_meta(const fs::path& dir, const char* command, double elapsed,
                json extra) {
  json meta;
  meta["command"] = command;
  meta["generated_at"] = timestamp_utc();
  meta["elapsed_seconds"] = elapsed;
  meta["details"] = std::move(extra);
  write_text(dir / "run_meta.json", meta.dump(2) + "\n");
}

double seconds_since(steady::time_point start) {
  return std::chrono::duration<double>(steady::now() - start).count();
}

template <typename Fn>
int run_guarded(Fn&& fn) {
  try {
    return fn();
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

fs::path prepare_out_dir(const std::string& out_dir) {
  fs::path dir(out_dir.empty() ? "." : out_dir);
  fs::create_directories(dir);
  return dir;
}

/// Empty cell for the optional columns of converge.csv.
std::string format_optional(double value) {
  return std::isnan(value) ? std::string() : format_full(value);
}

std::size_t resolve_threads(std::size_t requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace

std::string format_full(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string format_spot(double value) {
  std::string text = format_full(value);
  if (text.find_first_of(".eEni") == std::string::npos) text += ".0";
  return text;
}

std::string format_value(double value, int digits) {
  if (digits < 1 || digits > 16) return format_full(value);
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.*f", digits, value);
  return buffer;
}

int cmd_price(const RunConfig& config, const PriceCommandOptions& options) {
  return run_guarded([&] {
    const fs::path dir = prepare_out_dir(options.out_dir);
    const int digits = options.digits.value_or(config.outputs.digits);
    const bool greeks = config.outputs.gamma;
    const std::size_t regimes = config.model.regime_count();

    const auto start = steady::now();
    const SolveResult result =
        solve(config.model, config.grid, config.control, greeks);
    const double elapsed = seconds_since(start);

    const PriceSurface surface =
        build_surface(result.state, config.model, config.grid);
    const std::vector<TableRow> rows =
        table(surface, config.outputs.spots, greeks);

    std::ostringstream prices;
    prices << "S";
    for (std::size_t m = 0; m < regimes; ++m) prices << ",regime_" << (m + 1);
    if (greeks) {
      for (std::size_t m = 0; m < regimes; ++m) prices << ",delta_" << (m + 1);
      for (std::size_t m = 0; m < regimes; ++m) prices << ",gamma_" << (m + 1);
    }
    prices << "\n";
    for (const TableRow& row : rows) {
      prices << format_spot(row.spot);
      for (double price : row.price) prices << ',' << format_value(price, digits);
      if (greeks) {
        for (double delta : row.delta) prices << ',' << format_value(delta, digits);
        for (double gamma : row.gamma) prices << ',' << format_value(gamma, digits);
      }
      prices << "\n";
    }
    write_text(dir / "prices.csv", prices.str());

    std::ostringstream boundary;
    boundary << "tau";
    for (std::size_t m = 0; m < regimes; ++m) boundary << ",sf_" << (m + 1);
    boundary << "\n";
    for (const TrajectoryPoint& point : result.trajectory) {
      boundary << format_full(point.tau);
      for (double sf : point.sf) boundary << ',' << format_full(sf);
      boundary << "\n";
    }
    write_text(dir / "boundary.csv", boundary.str());

    std::ostringstream steps;
    steps << "t,k,e_u,accepted\n";
    std::size_t accepted = 0;
    for (const StepRecord& record : result.steps) {
      steps << format_full(record.t) << ',' << format_full(record.k) << ','
            << format_full(record.e_u) << ',' << (record.accepted ? '1' : '0')
            << "\n";
      if (record.accepted) ++accepted;
    }
    write_text(dir / "steps.csv", steps.str());

    json extra;
    extra["accepted_steps"] = accepted;
    extra["attempted_steps"] = result.steps.size();
    extra["grid_m"] = config.grid.m;
    extra["with_gamma"] = greeks;
    write_meta(dir, "price", elapsed, std::move(extra));

    std::printf("wrote prices.csv, boundary.csv, steps.csv (%zu accepted steps)\n",
                accepted);
    return 0;
  });
}

int cmd_converge(const RunConfig& config, const ConvergeCommandOptions& options) {
  return run_guarded([&] {
    if (options.h_list.empty())
      throw SchemaError("h_list", "expected at least one grid spacing");
    for (double h : options.h_list)
      if (!(h > 0.0)) throw SchemaError("h_list", "spacings must be positive");
    for (std::size_t i = 0; i + 1 < options.h_list.size(); ++i)
      if (std::abs(options.h_list[i + 1] - 0.5 * options.h_list[i]) >
          1e-12 * options.h_list[i])
        throw SchemaError("h_list", "expected a strictly halving sequence");
    if (!(options.fixed_k > 0.0))
      throw SchemaError("fixed_k", "expected a positive step size");
    if (!(options.horizon > 0.0))
      throw SchemaError("horizon", "expected a positive horizon");

    const fs::path dir = prepare_out_dir(options.out_dir);
    const std::size_t threads = resolve_threads(options.max_threads);

    const auto start = steady::now();
    const std::vector<ConvergenceRow> rows = convergence_study(
        config.model, config.grid.x_max, options.h_list, options.fixed_k,
        options.horizon, config.control.xbar_cells, threads);
    const double elapsed = seconds_since(start);

    std::ostringstream csv;
    csv << "h,max_error_u,order_u,max_error_w,order_w\n";
    for (const ConvergenceRow& row : rows)
      csv << format_full(row.h) << ',' << format_optional(row.err_u) << ','
          << format_optional(row.order_u) << ',' << format_optional(row.err_w)
          << ',' << format_optional(row.order_w) << "\n";
    write_text(dir / "converge.csv", csv.str());

    json extra;
    extra["grids"] = options.h_list.size();
    extra["fixed_k"] = options.fixed_k;
    extra["horizon"] = options.horizon;
    extra["threads"] = threads;
    write_meta(dir, "converge", elapsed, std::move(extra));

    std::printf("wrote converge.csv (%zu grids)\n", rows.size());
    return 0;
  });
}

int cmd_collapse_check(const RunConfig& config,
                       const CollapseCommandOptions& options) {
  return run_guarded([&] {
    if (config.model.regime_count() < 2)
      throw SchemaError("regimes", "collapse check needs at least two regimes");

    MarketModel multi = config.model;
    if (options.clone) {
      const RegimeParams reference = multi.regimes.front();
      for (RegimeParams& params : multi.regimes) params = reference;
    }

    MarketModel single;
    single.strike = multi.strike;
    single.maturity = multi.maturity;
    single.regimes = {multi.regimes.front()};
    single.generator.dim = 1;
    single.generator.entries = {0.0};

    const SolveResult many =
        solve(multi, config.grid, config.control, /*with_gamma=*/false);
    const SolveResult one =
        solve(single, config.grid, config.control, /*with_gamma=*/false);

    double discrepancy = 0.0;
    const std::size_t regimes = multi.regime_count();
    for (std::size_t m = 0; m < regimes; ++m) {
      discrepancy =
          std::max(discrepancy, std::abs(many.state.sf[m] - one.state.sf[0]));
      for (std::size_t i = 0; i < many.state.u[m].size(); ++i) {
        discrepancy = std::max(
            discrepancy, std::abs(many.state.u[m][i] - one.state.u[0][i]));
        discrepancy = std::max(
            discrepancy, std::abs(many.state.w[m][i] - one.state.w[0][i]));
      }
    }

    const bool pass = discrepancy <= kCollapseTolerance;
    std::printf("collapse check: max discrepancy %.3e (tolerance %.1e) -> %s\n",
                discrepancy, kCollapseTolerance, pass ? "pass" : "fail");
    return pass ? 0 : 3;
  });
}

}  // namespace rsput::cli
