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

#ifndef SPECWIRE_LEVELS_HPP
#define SPECWIRE_LEVELS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "specwire/common.hpp"

namespace specwire {

// Per-atom level structure. Each atom has six low-lying spin levels a..f and
// two optically excited levels g,h. The two cavity-capable Lambda systems are
// a-g-c and b-h-d; e,f are the storage levels that hold a qubit between gates.
//
// Basis order inside one atom is fixed everywhere: a,b,c,d,e,f,g,h = 0..7.

enum class Level : int { a = 0, b = 1, c = 2, d = 3, e = 4, f = 5, g = 6, h = 7 };

inline constexpr int kLevelsPerAtom = 8;
inline constexpr int kGroundCount = 6;

inline constexpr int index_of(Level l) { return static_cast<int>(l); }
inline constexpr bool is_ground(Level l) { return index_of(l) < kGroundCount; }
inline constexpr bool is_excited(Level l) { return !is_ground(l); }

inline const char* to_string(Level l) {
  static const char* names[] = {"a", "b", "c", "d", "e", "f", "g", "h"};
  return names[index_of(l)];
}

inline std::optional<Level> level_from_string(const std::string& s) {
  for (int i = 0; i < kLevelsPerAtom; ++i) {
    Level l = static_cast<Level>(i);
    if (s == to_string(l)) return l;
  }
  return std::nullopt;
}

// The six ground levels factor into the spin states of two pseudo-particles:
// a spin-1 register A (up / horizontal / down) and a spin-1/2 register B
// (up / down). The product encoding is fixed:
//
//   a=(A_up,B_up)  b=(A_up,B_dn)  c=(A_dn,B_up)
//   d=(A_dn,B_dn)  e=(A_hz,B_up)  f=(A_hz,B_dn)

enum class ASpin : int { up = 0, horiz = 1, down = 2 };
enum class BSpin : int { up = 0, down = 1 };

struct ABCode {
  ASpin a_spin;
  BSpin b_spin;
};

inline constexpr std::array<ABCode, kGroundCount> kABEncoding = {{
    {ASpin::up, BSpin::up},      // a
    {ASpin::up, BSpin::down},    // b
    {ASpin::down, BSpin::up},    // c
    {ASpin::down, BSpin::down},  // d
    {ASpin::horiz, BSpin::up},   // e
    {ASpin::horiz, BSpin::down}, // f
}};

inline ABCode ab_code(Level ground) { return kABEncoding[index_of(ground)]; }

inline Level level_of(ASpin a, BSpin b) {
  for (int i = 0; i < kGroundCount; ++i) {
    if (kABEncoding[i].a_spin == a && kABEncoding[i].b_spin == b)
      return static_cast<Level>(i);
  }
  throw InternalError("ab encoding is not a bijection");
}

/// Level energies and transition structure of one dopant species.
///
/// ground_offsets_mhz are energies of a..f relative to level a; the two
/// excited offsets are relative to a shared optical reference (the absolute
/// optical carrier is never stored). dipole_allowed marks which
/// (ground, excited) legs may be driven; by default every leg is allowed and
/// the a-g-c / b-h-d wire structure is a convention of the protocol layer,
/// not a selection rule.
struct LevelScheme {
  std::array<double, kGroundCount> ground_offsets_mhz{};
  std::array<double, 2> excited_offsets_mhz{};  // g, h
  std::array<std::array<bool, 2>, kGroundCount> dipole_allowed{};  // [ground][g|h]
  std::string name = "custom";

  double ground_offset(Level l) const { return ground_offsets_mhz[index_of(l)]; }
  double excited_offset(Level l) const {
    return excited_offsets_mhz[index_of(l) - kGroundCount];
  }
  double offset(Level l) const {
    return is_ground(l) ? ground_offset(l) : excited_offset(l);
  }

  /// Splitting of the a-c pair (MHz).
  double epsilon_ac() const { return ground_offset(Level::c) - ground_offset(Level::a); }
  /// Splitting of the b-d pair (MHz).
  double epsilon_bd() const { return ground_offset(Level::d) - ground_offset(Level::b); }

  bool leg_allowed(Level ground, Level excited) const {
    if (!is_ground(ground) || !is_excited(excited)) return false;
    return dipole_allowed[index_of(ground)][index_of(excited) - kGroundCount];
  }

  /// Shared excited level through which a ground pair can be Raman-coupled.
  /// Pairs living entirely on the B-side Lambda (b,d,f) route through h, all
  /// others through g; returns nullopt if the scheme forbids either leg.
  std::optional<Level> shared_excited(Level g1, Level g2) const {
    auto in_b_side = [](Level l) {
      return l == Level::b || l == Level::d || l == Level::f;
    };
    Level preferred = (in_b_side(g1) && in_b_side(g2)) ? Level::h : Level::g;
    Level other = (preferred == Level::g) ? Level::h : Level::g;
    for (Level e : {preferred, other}) {
      if (leg_allowed(g1, e) && leg_allowed(g2, e)) return e;
    }
    return std::nullopt;
  }

  /// Checks the encoding bijection and the splitting invariants:
  /// epsilon_ac > 0, epsilon_bd > 0, |epsilon_ac - epsilon_bd| < epsilon_ac.
  void validate() const {
    std::array<bool, kGroundCount> seen{};
    for (int i = 0; i < kGroundCount; ++i) {
      Level l = level_of(kABEncoding[i].a_spin, kABEncoding[i].b_spin);
      int idx = index_of(l);
      if (seen[idx]) throw InternalError("ab encoding maps two levels to one product");
      seen[idx] = true;
    }
    if (epsilon_ac() <= 0.0) throw PreconditionError("epsilon_ac must be positive");
    if (epsilon_bd() <= 0.0) throw PreconditionError("epsilon_bd must be positive");
    if (std::abs(epsilon_ac() - epsilon_bd()) >= epsilon_ac())
      throw PreconditionError("|epsilon_ac - epsilon_bd| must stay below epsilon_ac");
  }
};

namespace detail {
inline LevelScheme make_scheme(double eps_ac, double eps_bd, double b_split,
                               double storage_gap, const std::string& name) {
  LevelScheme s;
  // Additive A/B energies with the a-c / b-d asymmetry folded into d.
  s.ground_offsets_mhz[index_of(Level::a)] = 0.0;
  s.ground_offsets_mhz[index_of(Level::b)] = b_split;
  s.ground_offsets_mhz[index_of(Level::c)] = eps_ac;
  s.ground_offsets_mhz[index_of(Level::d)] = b_split + eps_bd;
  s.ground_offsets_mhz[index_of(Level::e)] = eps_ac + storage_gap;
  s.ground_offsets_mhz[index_of(Level::f)] = eps_ac + storage_gap + b_split;
  s.excited_offsets_mhz[0] = 0.0;
  // Place h so that the two wire transitions c-g and d-h coincide.
  s.excited_offsets_mhz[1] = (b_split + eps_bd) - eps_ac;
  for (auto& row : s.dipole_allowed) row = {true, true};
  s.name = name;
  s.validate();
  return s;
}
}  // namespace detail

/// NV-diamond at 500 Gauss: 2.8 GHz inter-qubit spacing, with the small
/// nuclear Zeeman contribution (300 Hz/G * 500 G = 0.15 MHz) making the two
/// Lambda systems non-degenerate. Hyperfine B splitting 4.6 MHz.
inline LevelScheme nv_diamond_500g() {
  return detail::make_scheme(/*eps_ac=*/2800.0, /*eps_bd=*/2800.0 - 0.15,
                             /*b_split=*/4.6, /*storage_gap=*/2800.0,
                             "nv-diamond-500G");
}

/// NV-diamond at zero field: 4.6 MHz inter-qubit spacing.
inline LevelScheme nv_diamond_zero_field() {
  return detail::make_scheme(/*eps_ac=*/4.6, /*eps_bd=*/4.45,
                             /*b_split=*/1.4, /*storage_gap=*/4.6,
                             "nv-diamond-0G");
}

inline LevelScheme default_scheme() { return nv_diamond_500g(); }

}  // namespace specwire

#endif  // SPECWIRE_LEVELS_HPP
