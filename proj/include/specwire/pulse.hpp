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

#ifndef SPECWIRE_PULSE_HPP
#define SPECWIRE_PULSE_HPP

#include <cmath>
#include <string>
#include <vector>

#include "specwire/common.hpp"
#include "specwire/levels.hpp"
#include "specwire/units.hpp"

namespace specwire {

enum class Envelope { rect, gaussian, blackman };

inline const char* to_string(Envelope e) {
  switch (e) {
    case Envelope::rect: return "rect";
    case Envelope::gaussian: return "gaussian";
    case Envelope::blackman: return "blackman";
  }
  return "?";
}

/// Dimensionless envelope value in [0,1]. `x` is the position inside the
/// window, x = (t - start)/duration. Gaussian and Blackman shapes vanish
/// below 1e-4 of peak at the window edges.
inline double envelope_value(Envelope e, double x) {
  if (x < 0.0 || x > 1.0) return 0.0;
  switch (e) {
    case Envelope::rect:
      return 1.0;
    case Envelope::gaussian: {
      const double sigma = 1.0 / 9.0;  // edge value exp(-10.125) ~ 4e-5
      const double u = (x - 0.5) / sigma;
      return std::exp(-0.5 * u * u);
    }
    case Envelope::blackman: {
      const double c2 = std::cos(kTwoPi * x);
      const double c4 = std::cos(2.0 * kTwoPi * x);
      double v = 0.42 - 0.5 * c2 + 0.08 * c4;  // peaks at exactly 1 for x = 1/2
      return v < 0.0 ? 0.0 : v;
    }
  }
  return 0.0;
}

/// One driven optical leg of a control pulse.
struct LegDrive {
  Level ground = Level::a;
  Level excited = Level::g;
  double omega_peak_mhz = 0.0;  // peak Rabi frequency of this leg
  double detuning_mhz = 0.0;    // single-photon detuning, transition minus carrier
};

/// One control event: a laser pulse addressing a single atom on one or two
/// legs (two for the non-degenerate case, where each control beam carries a
/// tone per Lambda system). The drive convention, used by every module, is
///
///   H_drive = (Omega(t)/2) e^{i phase} |excited><ground| + h.c.
///
/// phase_rad is carried by the first listed leg only; for a two-tone Raman
/// pair the pump-minus-Stokes phase difference sets the rotation axis.
struct PulseSpec {
  int atom = 0;
  std::vector<LegDrive> legs;
  Envelope envelope = Envelope::rect;
  double duration_us = 1.0;
  double start_us = 0.0;  // window start; center = start + duration/2
  double phase_rad = 0.0;
  std::string label;      // role tag for schedules and traces

  double center_us() const { return start_us + 0.5 * duration_us; }
  double end_us() const { return start_us + duration_us; }

  double envelope_at(double t_us) const {
    if (duration_us <= 0.0) return 0.0;
    return envelope_value(envelope, (t_us - start_us) / duration_us);
  }

  void validate(const LevelScheme& scheme) const {
    if (duration_us <= 0.0) throw PreconditionError("pulse duration must be positive");
    if (legs.empty() || legs.size() > 2)
      throw PreconditionError("a pulse drives one or two legs");
    for (const auto& leg : legs) {
      if (leg.omega_peak_mhz < 0.0) throw PreconditionError("omega_peak must be >= 0");
      if (!scheme.leg_allowed(leg.ground, leg.excited))
        throw PreconditionError(std::string("drive addresses a forbidden leg ") +
                                to_string(leg.ground) + "-" + to_string(leg.excited));
    }
  }
};

}  // namespace specwire

#endif  // SPECWIRE_PULSE_HPP
