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

#include <Eigen/Eigenvalues>
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

/// Measured population-transfer time: first maximum of the target-state
/// population under a constant Hamiltonian, located by a coarse scan plus
/// parabolic refinement of exp(-iHt)|from>.
double first_transfer_time(const MatrixXc& h, const VectorXc& from, long target_idx,
                           double t_guess) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
  VectorXc coeff = es.eigenvectors().adjoint() * from;
  auto pop_at = [&](double t) {
    VectorXc c = coeff;
    for (long i = 0; i < c.size(); ++i)
      c[i] *= std::exp(Complex(0.0, -es.eigenvalues()[i] * t));
    VectorXc psi = es.eigenvectors() * c;
    return std::norm(psi[target_idx]);
  };
  const int samples = 4000;
  double best_t = 0.0, best_p = -1.0;
  for (int i = 1; i <= samples; ++i) {
    double t = 1.6 * t_guess * i / samples;
    double p = pop_at(t);
    if (p > best_p) {
      best_p = p;
      best_t = t;
    }
  }
  double dt = 1.6 * t_guess / samples;
  double pl = pop_at(best_t - dt), pc = best_p, pr = pop_at(best_t + dt);
  double denom = pl - 2 * pc + pr;
  if (std::abs(denom) > 1e-30) best_t += 0.5 * dt * (pl - pr) / denom;
  return best_t;
}

}  // namespace

TEST_CASE("bare Jaynes-Cummings block: dressed splitting equals g") {
  auto scheme = default_scheme();
  SpaceLayout lay{1, 2};
  const double g = 3.0;  // MHz

  auto h = build_hamiltonian(lay, scheme, resonant_frame(), {},
                             {{0, Level::a, Level::g, g}});
  MatrixXc hd = h.dense_at(0.0);

  // the |a,1>, |g,0> block
  long ia1 = lay.basis_index({Level::a}, 1);
  long ig0 = lay.basis_index({Level::g}, 0);
  Eigen::Matrix2cd block;
  block << hd(ia1, ia1), hd(ia1, ig0), hd(ig0, ia1), hd(ig0, ig0);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
  double splitting = ordinary(es.eigenvalues()(1) - es.eigenvalues()(0));
  CHECK(std::abs(splitting - g) < 1e-9);
}

TEST_CASE("no drives, no coupling: diagonal matrix of detunings only") {
  auto scheme = default_scheme();
  SpaceLayout lay{1, 2};
  FrameConfig frame;
  frame.policy = CavityPolicy::detuned;
  frame.cavity_detuning_mhz = 25.0;

  auto h = build_hamiltonian(lay, scheme, frame, {}, {{0, Level::c, Level::g, 0.0}});
  MatrixXc hd = h.dense_at(0.0);
  CHECK((hd - MatrixXc(hd.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
  long ig = lay.basis_index({Level::g}, 0);
  CHECK(hd(ig, ig).real() == Catch::Approx(angular(25.0)));
  // no entry anywhere near an optical scale
  CHECK(hd.cwiseAbs().maxCoeff() < angular(100.0));
}

TEST_CASE("resonant pi pulse transfers the population") {
  auto scheme = default_scheme();
  auto st = build_space(1, scheme, 2);
  const double omega = 4.0;  // MHz

  PulseSpec p;
  p.atom = 0;
  p.legs = {{Level::a, Level::g, omega, 0.0}};
  p.envelope = Envelope::rect;
  p.duration_us = 1.0 / (2.0 * omega);  // pi time for Rabi frequency omega
  p.start_us = 0.0;

  SpaceLayout lay = st.layout;
  auto h = build_hamiltonian(lay, scheme, resonant_frame(), {p}, {});
  evolve_unitary(st, h, 0.0, p.duration_us);
  CHECK(level_population(st, 0, Level::g) == Catch::Approx(1.0).margin(1e-8));
}

TEST_CASE("H = 0 leaves the state unchanged") {
  auto scheme = default_scheme();
  auto st = build_space(1, scheme, 2);
  auto h = build_hamiltonian(st.layout, scheme, resonant_frame(), {}, {});
  VectorXc before = st.psi;
  evolve_unitary(st, h, 0.0, 5.0);
  CHECK((st.psi - before).norm() < 1e-12);
}

TEST_CASE("vacuum Rabi oscillation returns after one period") {
  auto scheme = default_scheme();
  auto st = build_space(1, scheme, 2);
  const double g = 2.5;

  long ia1 = st.layout.basis_index({Level::a}, 1);
  st.psi.setZero();
  st.psi[ia1] = 1.0;

  auto h = build_hamiltonian(st.layout, scheme, resonant_frame(), {},
                             {{0, Level::a, Level::g, g}});
  // population period of the vacuum Rabi oscillation at coupling g is 1/g
  evolve_unitary(st, h, 0.0, 1.0 / g);
  CHECK(std::norm(st.psi[ia1]) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("two-photon Raman oscillation matches the adiabatic-elimination rate") {
  // full model: a 3-level Lambda driven on both legs at common detuning Delta;
  // oracle: Omega1*Omega2/(2*Delta) effective Rabi frequency.
  auto scheme = default_scheme();
  SpaceLayout lay{1, 2};
  const double omega = 10.0;

  auto run = [&](double ratio) {
    const double delta = ratio * omega;
    PulseSpec p;
    p.atom = 0;
    p.legs = {{Level::a, Level::g, omega, delta}, {Level::c, Level::g, omega, delta}};
    p.envelope = Envelope::rect;
    p.duration_us = 1e6;  // window large enough to treat H as constant
    p.start_us = 0.0;
    auto h = build_hamiltonian(lay, scheme, resonant_frame(), {p}, {});

    const double f_eff = omega * omega / (2.0 * delta);  // MHz
    VectorXc from = VectorXc::Zero(lay.dim());
    from[lay.basis_index({Level::a}, 0)] = 1.0;
    double t_pi = first_transfer_time(h.dense_at(0.0), from,
                                      lay.basis_index({Level::c}, 0), 1.0 / (2.0 * f_eff));
    double f_measured = 1.0 / (2.0 * t_pi);
    return std::abs(f_measured - f_eff) / f_eff;
  };

  CHECK(run(20.0) < 0.05);
  CHECK(run(50.0) < 0.02);
}

TEST_CASE("laser-plus-cavity Raman matches Omega*g/(2*Delta)") {
  auto scheme = default_scheme();
  SpaceLayout lay{1, 2};
  const double omega = 8.0, g = 7.0, ratio = 25.0;
  const double delta = ratio * omega;

  FrameConfig frame;
  frame.policy = CavityPolicy::detuned;
  frame.cavity_detuning_mhz = delta;

  PulseSpec p;
  p.atom = 0;
  p.legs = {{Level::a, Level::g, omega, delta}};
  p.envelope = Envelope::rect;
  p.duration_us = 1e6;
  p.start_us = 0.0;

  auto h = build_hamiltonian(lay, scheme, frame, {p}, {{0, Level::c, Level::g, g}});

  const double f_eff = omega * g / (2.0 * delta);
  VectorXc from = VectorXc::Zero(lay.dim());
  from[lay.basis_index({Level::a}, 0)] = 1.0;
  double t_pi = first_transfer_time(h.dense_at(0.0), from, lay.basis_index({Level::c}, 1),
                                    1.0 / (2.0 * f_eff));
  double f_measured = 1.0 / (2.0 * t_pi);
  CHECK(std::abs(f_measured - f_eff) / f_eff < 0.05);
}

TEST_CASE("energy expectation conserved under a constant Hamiltonian") {
  auto scheme = default_scheme();
  auto st = build_space(1, scheme, 2);
  st.psi.setZero();
  st.psi[st.layout.basis_index({Level::a}, 0)] = std::sqrt(0.4);
  st.psi[st.layout.basis_index({Level::c}, 0)] = std::sqrt(0.4);
  st.psi[st.layout.basis_index({Level::g}, 0)] = std::sqrt(0.2);

  PulseSpec p;
  p.atom = 0;
  p.legs = {{Level::a, Level::g, 5.0, 40.0}, {Level::c, Level::g, 5.0, 40.0}};
  p.envelope = Envelope::gaussian;  // forces the adaptive stepper
  p.duration_us = 1e9;              // effectively constant over the run
  p.start_us = -0.5e9;
  auto h = build_hamiltonian(st.layout, scheme, resonant_frame(), {p}, {});

  MatrixXc hd = h.dense_at(1.0);
  double e0 = (st.psi.adjoint() * hd * st.psi)(0).real();
  evolve_unitary(st, h, 0.0, 2.0);
  double e1 = (st.psi.adjoint() * hd * st.psi)(0).real();
  CHECK(std::abs(e1 - e0) <= 1e-8 * std::abs(e0));
}

TEST_CASE("halving the tolerance changes the final fidelity by less than tol") {
  auto scheme = default_scheme();
  const double tol = 1e-9;

  auto run = [&](double t) {
    auto st = build_space(1, scheme, 2);
    PulseSpec p;
    p.atom = 0;
    p.legs = {{Level::a, Level::g, 6.0, 0.0}};
    p.envelope = Envelope::blackman;
    p.duration_us = 0.8;
    p.start_us = 0.0;
    auto h = build_hamiltonian(st.layout, scheme, resonant_frame(), {p}, {});
    evolve_unitary(st, h, 0.0, 0.8, t);
    return st;
  };

  auto a = run(tol);
  auto b = run(tol / 2.0);
  double fid = std::norm(a.psi.dot(b.psi));
  CHECK(std::abs(1.0 - fid) < tol);
}

TEST_CASE("drive validation") {
  auto scheme = default_scheme();
  scheme.dipole_allowed[index_of(Level::e)][0] = false;  // forbid e-g
  SpaceLayout lay{1, 2};

  PulseSpec p;
  p.atom = 0;
  p.legs = {{Level::e, Level::g, 1.0, 0.0}};
  p.duration_us = 1.0;
  CHECK_THROWS_AS(build_hamiltonian(lay, scheme, resonant_frame(), {p}, {}),
                  PreconditionError);

  PulseSpec q;
  q.atom = 3;  // nonexistent
  q.legs = {{Level::a, Level::g, 1.0, 0.0}};
  q.duration_us = 1.0;
  CHECK_THROWS_AS(build_hamiltonian(lay, default_scheme(), resonant_frame(), {q}, {}),
                  PreconditionError);
}

TEST_CASE("inconsistent carriers on one level are rejected") {
  auto scheme = default_scheme();
  SpaceLayout lay{1, 2};

  // The cavity pins c at 0 and g at the 30 MHz reference; a drive on the same
  // leg at 99 MHz cannot be made static in the same frame.
  FrameConfig frame;
  frame.policy = CavityPolicy::detuned;
  frame.cavity_detuning_mhz = 30.0;
  PulseSpec clash;
  clash.atom = 0;
  clash.legs = {{Level::c, Level::g, 1.0, 99.0}};
  clash.duration_us = 1.0;
  CHECK_THROWS_AS(build_hamiltonian(lay, scheme, frame, {clash},
                                    {{0, Level::c, Level::g, 2.0}}),
                  PreconditionError);
}
