#pragma once

#include <rsput/model.hpp>

namespace fixtures {

/// Two-regime benchmark: high-vol/low-vol regimes with fast switching.
inline rsput::MarketModel two_regime() {
  rsput::MarketModel m;
  m.strike = 9.0;
  m.maturity = 1.0;
  m.regimes = {{0.10, 0.80}, {0.05, 0.30}};
  m.generator = {2, {-6.0, 6.0, 9.0, -9.0}};
  return m;
}

/// Four-regime benchmark with uniform switching rates.
inline rsput::MarketModel four_regime() {
  rsput::MarketModel m;
  m.strike = 9.0;
  m.maturity = 1.0;
  m.regimes = {{0.02, 0.90}, {0.10, 0.50}, {0.06, 0.70}, {0.15, 0.20}};
  const double t = 1.0 / 3.0;
  m.generator = {4,
                 {-1.0, t, t, t,
                  t, -1.0, t, t,
                  t, t, -1.0, t,
                  t, t, t, -1.0}};
  return m;
}

/// Single regime carved out of the two-regime model's low-vol state.
inline rsput::MarketModel single_regime() {
  rsput::MarketModel m;
  m.strike = 9.0;
  m.maturity = 1.0;
  m.regimes = {{0.05, 0.30}};
  m.generator = {1, {0.0}};
  return m;
}

}  // namespace fixtures
