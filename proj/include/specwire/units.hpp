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

#ifndef SPECWIRE_UNITS_HPP
#define SPECWIRE_UNITS_HPP

namespace specwire {

// Unit conventions used throughout the library:
//
//   frequency   MHz (ordinary frequency, cycles per microsecond)
//   time        microseconds
//   rates       1/us, angular (a linewidth w in MHz decays at 2*pi*w per us)
//
// Hamiltonian matrices are assembled in angular units (rad/us), so that
// exp(-i H t) with t in microseconds is the propagator. The 2*pi conversion
// happens exactly once, inside the assembly step; every public parameter is
// an ordinary frequency.

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Ordinary frequency in MHz -> angular rate in rad/us.
inline constexpr double angular(double mhz) { return kTwoPi * mhz; }

/// Angular rate in rad/us -> ordinary frequency in MHz.
inline constexpr double ordinary(double rad_per_us) { return rad_per_us / kTwoPi; }

inline constexpr double ghz_to_mhz(double ghz) { return ghz * 1e3; }
inline constexpr double khz_to_mhz(double khz) { return khz * 1e-3; }
inline constexpr double thz_to_mhz(double thz) { return thz * 1e6; }
inline constexpr double ms_to_us(double ms) { return ms * 1e3; }
inline constexpr double s_to_us(double s) { return s * 1e6; }

/// Speed of light in cm*MHz (i.e. cm/us): c = 2.99792458e4 cm/us.
inline constexpr double kSpeedOfLightCmMhz = 2.99792458e4;

}  // namespace specwire

#endif  // SPECWIRE_UNITS_HPP
