#include "rsput/model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "rsput/errors.hpp"

namespace rsput {

std::string StepRejection::describe(Reason reason, std::size_t regime) {
  const char* what = "";
  switch (reason) {
    case Reason::complex_root:
      what = "boundary slope quadratic has complex roots";
      break;
    case Reason::degenerate_sqrt_argument:
      what = "boundary derivative radicand below degeneracy floor";
      break;
    case Reason::negative_radicand:
      what = "sqrt transform of grid value is negative";
      break;
  }
  return std::string(what) + " (regime " + std::to_string(regime) + ")";
}

namespace {

constexpr double kRowSumTol = 1e-12;

}  // namespace

std::vector<Violation> validate(const MarketModel& model) {
  std::vector<Violation> out;
  auto flag = [&out](std::string field, std::string rule) {
    out.push_back({std::move(field), std::move(rule)});
  };

  if (!(model.strike > 0.0)) flag("strike", "must be positive");
  if (!(model.maturity > 0.0)) flag("maturity", "must be positive");
  if (model.regimes.empty()) flag("regimes", "at least one regime required");

  for (std::size_t m = 0; m < model.regimes.size(); ++m) {
    const auto& rp = model.regimes[m];
    const std::string field = "regimes[" + std::to_string(m) + "]";
    if (!(rp.sigma > 0.0)) flag(field + ".sigma", "must be positive");
    if (!(rp.rate > 0.0)) flag(field + ".rate", "must be positive");
    if (!std::isfinite(rp.sigma) || !std::isfinite(rp.rate))
      flag(field, "must be finite");
  }

  const auto& gen = model.generator;
  if (gen.dim != model.regimes.size())
    flag("generator", "dimension must match the regime count");
  if (gen.entries.size() != gen.dim * gen.dim)
    flag("generator", "entry count must equal dim*dim");
  if (gen.entries.size() == gen.dim * gen.dim) {
    for (std::size_t i = 0; i < gen.dim; ++i) {
      double row_sum = 0.0;
      for (std::size_t j = 0; j < gen.dim; ++j) {
        const double q = gen.at(i, j);
        row_sum += q;
        if (!std::isfinite(q))
          flag("generator[" + std::to_string(i) + "]", "entries must be finite");
        if (i != j && q < 0.0)
          flag("generator[" + std::to_string(i) + "][" + std::to_string(j) + "]",
               "off-diagonal entries must be non-negative");
      }
      if (std::abs(row_sum) > kRowSumTol)
        flag("generator[" + std::to_string(i) + "]",
             "row must sum to zero within 1e-12");
    }
  }
  return out;
}

void ensure_valid(const MarketModel& model) {
  const auto violations = validate(model);
  if (violations.empty()) return;
  std::ostringstream msg;
  msg << "invalid model:";
  for (const auto& v : violations) msg << " [" << v.field << ": " << v.rule << "]";
  throw std::invalid_argument(msg.str());
}

SolverState initial_state(const MarketModel& model, const GridSpec& grid,
                          bool with_gamma) {
  SolverState state;
  state.tau = 0.0;
  const std::size_t regimes = model.regime_count();
  const std::size_t n = grid.interior();
  state.sf.assign(regimes, model.strike);
  state.u.assign(regimes, std::vector<double>(n, 0.0));
  state.w.assign(regimes, std::vector<double>(n, 0.0));
  if (with_gamma)
    state.y = std::vector<std::vector<double>>(regimes, std::vector<double>(n, 0.0));
  return state;
}

}  // namespace rsput
