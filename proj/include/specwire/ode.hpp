// Copyright 2026 The specwire Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPECWIRE_ODE_HPP
#define SPECWIRE_ODE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include "specwire/common.hpp"

namespace specwire {

struct OdeOptions {
  double tol = 1e-10;        // error tolerance (relative)
  double abs_tol_floor = 1e-14;
  double max_step_us = 0.0;  // 0 = no cap
  std::int64_t max_steps = 50'000'000;
  // When > 0, the tolerance budget is spread over this time span
  // (error-per-unit-time control), so the accumulated error at the end of the
  // span is of order tol. When 0, tol is a plain per-step bound.
  double span_for_budget = 0.0;
};

struct OdeStats {
  std::int64_t steps_accepted = 0;
  std::int64_t steps_rejected = 0;
};

// Dormand-Prince 5(4) embedded pair. State is any Eigen-style dense object
// supporting linear combinations and cwiseAbs(); the derivative callback has
// signature f(t, y, dydt).

namespace dp5 {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
// 4th-order embedded weights
inline constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                        e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;
}  // namespace dp5

/// Integrates y' = f(t, y) from t0 to t1 with adaptive step control.
/// `observer(t, y)` fires after every accepted step (including the start).
template <class State, class Rhs, class Observer>
OdeStats integrate_adaptive(Rhs&& f, State& y, double t0, double t1, const OdeOptions& opts,
                            Observer&& observer) {
  using namespace dp5;
  OdeStats stats;
  if (t1 <= t0) throw PreconditionError("integration requires t1 > t0");

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y;
  State ytmp = y, ynew = y, yerr = y;

  double t = t0;
  f(t, y, k1);
  observer(t, y);

  // Initial step from the first derivative scale.
  double ynorm = std::sqrt(y.cwiseAbs2().sum());
  double dnorm = std::sqrt(k1.cwiseAbs2().sum());
  double h = (dnorm > 0.0) ? 0.01 * std::max(ynorm, 1.0) / dnorm : (t1 - t0) * 1e-3;
  h = std::min(h, t1 - t0);
  if (opts.max_step_us > 0.0) h = std::min(h, opts.max_step_us);

  bool k1_fresh = true;
  const double safety = 0.9, min_scale = 0.2, max_scale = 5.0;

  while (t < t1) {
    if (stats.steps_accepted + stats.steps_rejected > opts.max_steps)
      throw StiffnessError("step budget exhausted", t);
    if (h < 1e-14 * std::max(1.0, std::abs(t)))
      throw StiffnessError("step size underflow (stiff input?) at t", t);
    if (t + h > t1) h = t1 - t;

    if (!k1_fresh) f(t, y, k1);

    ytmp = y + (h * a21) * k1;
    f(t + c2 * h, ytmp, k2);
    ytmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, ytmp, k3);
    ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, ytmp, k4);
    ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, ytmp, k5);
    ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t + h, ytmp, k6);
    ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t + h, ynew, k7);

    yerr = ynew - (y + h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7));

    const double scale = opts.abs_tol_floor + opts.tol * std::sqrt(ynew.cwiseAbs2().sum());
    const bool budgeted = opts.span_for_budget > 0.0;
    const double budget_factor = budgeted ? h / opts.span_for_budget : 1.0;
    const double err = std::sqrt(yerr.cwiseAbs2().sum()) / (scale * budget_factor);
    const double order_exp = budgeted ? -0.25 : -0.2;

    if (err <= 1.0) {
      t += h;
      y.swap(ynew);
      k1.swap(k7);  // FSAL
      k1_fresh = true;
      ++stats.steps_accepted;
      observer(t, y);
      double grow = (err > 0.0) ? safety * std::pow(err, order_exp) : max_scale;
      h *= std::clamp(grow, min_scale, max_scale);
    } else {
      ++stats.steps_rejected;
      k1_fresh = true;  // k1 still matches (t, y)
      h *= std::clamp(safety * std::pow(err, order_exp), min_scale, 1.0);
    }
    if (opts.max_step_us > 0.0) h = std::min(h, opts.max_step_us);
  }
  return stats;
}

}  // namespace specwire

#endif  // SPECWIRE_ODE_HPP
