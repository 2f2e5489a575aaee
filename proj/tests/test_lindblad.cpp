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

#include <catch2/catch_amalgamated.hpp>

#include "specwire/evolve.hpp"
#include "specwire/hamiltonian.hpp"
#include "specwire/levels.hpp"
#include "specwire/state.hpp"
#include "specwire/units.hpp"

using namespace specwire;

namespace {
FrameConfig resonant_frame() {
  FrameConfig f;
  f.policy = CavityPolicy::resonant;
  return f;
}
}  // namespace

TEST_CASE("cavity-only decay follows exp(-kappa t)") {
  auto scheme = default_scheme();
  auto st = build_space(1, scheme, 2);
  st.psi.setZero();
  st.psi[st.layout.basis_index({Level::a}, 1)] = 1.0;  // one photon

  NoiseParams noise = NoiseParams::none();
  noise.kappa_width_khz = 50.0;  // scaled up so t=1/kappa stays desk-sized
  const double kappa = angular(khz_to_mhz(noise.kappa_width_khz));

  auto h = build_hamiltonian(st.layout, scheme, resonant_frame(), {}, {});
  evolve_lindblad(st, h, noise, 0.0, 1.0 / kappa);

  const double expected = std::exp(-1.0);  // analytic decay oracle at t = 1/kappa
  double photon = photon_population(st, 1);
  CHECK(std::abs(photon - expected) / expected < 0.01);
  CHECK(std::abs(st.rho.trace().real() - 1.0) < 1e-8);
}

TEST_CASE("pure dephasing damps ground coherence at exactly 1/T2") {
  auto scheme = default_scheme();
  auto st = build_space(1, scheme, 2);
  st.psi.setZero();
  st.psi[st.layout.basis_index({Level::a}, 0)] = std::sqrt(0.5);
  st.psi[st.layout.basis_index({Level::c}, 0)] = std::sqrt(0.5);

  NoiseParams noise = NoiseParams::none();
  noise.t2_spin_ms = 0.02;  // 20 us
  const double t2 = ms_to_us(noise.t2_spin_ms);

  auto h = build_hamiltonian(st.layout, scheme, resonant_frame(), {}, {});
  evolve_lindblad(st, h, noise, 0.0, t2);

  long ia = st.layout.basis_index({Level::a}, 0);
  long ic = st.layout.basis_index({Level::c}, 0);
  double coherence = std::abs(st.rho(ia, ic));
  double expected = 0.5 * std::exp(-1.0);  // analytic oracle at t = T2
  CHECK(std::abs(coherence - expected) / expected < 0.02);

  // populations untouched by pure dephasing
  CHECK(st.rho(ia, ia).real() == Catch::Approx(0.5).margin(1e-9));
  CHECK(st.rho(ic, ic).real() == Catch::Approx(0.5).margin(1e-9));
}

TEST_CASE("excited decay branches to the Lambda legs") {
  auto scheme = default_scheme();
  auto st = build_space(1, scheme, 2);
  st.psi.setZero();
  st.psi[st.layout.basis_index({Level::g}, 0)] = 1.0;

  NoiseParams noise = NoiseParams::none();
  noise.gamma_excited_mhz = 5.0;
  const double gamma = angular(noise.gamma_excited_mhz);

  auto h = build_hamiltonian(st.layout, scheme, resonant_frame(), {}, {});
  evolve_lindblad(st, h, noise, 0.0, 5.0 / gamma);

  CHECK(level_population(st, 0, Level::g) < 0.01);
  double pa = level_population(st, 0, Level::a);
  double pc = level_population(st, 0, Level::c);
  CHECK(pa == Catch::Approx(pc).margin(1e-6));  // equal branching
  CHECK(pa + pc == Catch::Approx(1.0).margin(0.01));
}

TEST_CASE("zero noise agrees with unitary evolution") {
  auto scheme = default_scheme();
  const double omega = 5.0;

  PulseSpec p;
  p.atom = 0;
  p.legs = {{Level::a, Level::g, omega, 0.0}};
  p.envelope = Envelope::blackman;
  p.duration_us = 0.7;
  p.start_us = 0.0;

  auto pure = build_space(1, scheme, 2);
  auto h = build_hamiltonian(pure.layout, scheme, resonant_frame(), {p}, {});
  evolve_unitary(pure, h, 0.0, p.duration_us, 1e-12);

  auto open = build_space(1, scheme, 2);
  evolve_lindblad(open, h, NoiseParams::none(), 0.0, p.duration_us, 1e-10);

  double fid = open.fidelity_with(pure.psi);
  CHECK(fid >= 1.0 - 1e-7);
}

TEST_CASE("lindblad output stays a physical density matrix") {
  auto scheme = default_scheme();
  auto st = build_space(1, scheme, 2);
  st.psi.setZero();
  st.psi[st.layout.basis_index({Level::a}, 1)] = std::sqrt(0.5);
  st.psi[st.layout.basis_index({Level::c}, 0)] = std::sqrt(0.5);

  NoiseParams noise;  // full default noise set
  auto h = build_hamiltonian(st.layout, scheme, resonant_frame(), {},
                             {{0, Level::c, Level::g, 4.0}});
  evolve_lindblad(st, h, noise, 0.0, 3.0);
  st.validate();  // Hermitian within 1e-10, trace 1 within 1e-9, positive within -1e-8
}

TEST_CASE("T1 channel relaxes ground populations toward uniform") {
  auto scheme = default_scheme();
  auto st = build_space(1, scheme, 2);  // all population in |a>

  NoiseParams noise = NoiseParams::none();
  noise.t1_spin_s = 1e-5;  // 10 us, scaled down to desk size
  const double t1 = s_to_us(*noise.t1_spin_s);

  auto h = build_hamiltonian(st.layout, scheme, resonant_frame(), {}, {});
  evolve_lindblad(st, h, noise, 0.0, 3.0 * t1);

  double pa = level_population(st, 0, Level::a);
  double expected = 1.0 / 6.0 + (1.0 - 1.0 / 6.0) * std::exp(-3.0);
  CHECK(std::abs(pa - expected) < 0.01);
}
