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

#ifndef SPECWIRE_EVOLVE_HPP
#define SPECWIRE_EVOLVE_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "specwire/common.hpp"
#include "specwire/hamiltonian.hpp"
#include "specwire/ode.hpp"
#include "specwire/state.hpp"
#include "specwire/units.hpp"

namespace specwire {

/// Open-system rates. kappa_width and gamma_excited are linewidths in
/// ordinary frequency units; the corresponding decay rates are 2*pi times the
/// width. t2_spin is a time constant: every ground-pair coherence decays as
/// exp(-t/T2) exactly.
struct NoiseParams {
  double kappa_width_khz = 1.4;          // cavity linewidth (full width)
  double gamma_excited_mhz = 5.0;        // excited-state linewidth
  // branching fractions of g -> (a, c) and h -> (b, d)
  std::array<double, 2> branching_g = {0.5, 0.5};
  std::array<double, 2> branching_h = {0.5, 0.5};
  double t2_spin_ms = 0.1;               // ground spin coherence time
  std::optional<double> t1_spin_s;       // population lifetime; off by default

  void validate() const {
    if (kappa_width_khz < 0 || gamma_excited_mhz < 0 || t2_spin_ms < 0)
      throw PreconditionError("noise rates must be nonnegative");
    if (t1_spin_s && *t1_spin_s <= 0)
      throw PreconditionError("T1 must be positive when given");
    auto sums_to_one = [](const std::array<double, 2>& b) {
      return std::abs(b[0] + b[1] - 1.0) < 1e-12 && b[0] >= 0 && b[1] >= 0;
    };
    if (!sums_to_one(branching_g) || !sums_to_one(branching_h))
      throw PreconditionError("branching fractions must be nonnegative and sum to 1");
  }

  static NoiseParams none() {
    NoiseParams n;
    n.kappa_width_khz = 0.0;
    n.gamma_excited_mhz = 0.0;
    n.t2_spin_ms = 0.0;  // interpreted as no dephasing channel
    return n;
  }
};

/// Builds the Lindblad jump operators for the given noise model:
///  - cavity decay          sqrt(kappa) a,            kappa = 2*pi*width
///  - excited-state decay   sqrt(Gamma*beta) |l><e|,  Gamma = 2*pi*linewidth
///  - pure spin dephasing   sqrt(1/T2) |k><k| per ground level, which makes
///    every ground-pair coherence decay at exactly 1/T2
///  - optional T1 mixing    sqrt(1/(6*T1)) |j><k| over ground pairs, which
///    relaxes ground populations toward uniform at rate 1/T1
inline std::vector<SparseXc> lindblad_operators(const SpaceLayout& layout,
                                                const NoiseParams& noise) {
  noise.validate();
  std::vector<SparseXc> ops;
  const long dim = layout.dim();

  auto add_single_site = [&](int site, const std::vector<Eigen::Triplet<Complex>>& local) {
    const long stride = layout.stride(site);
    const int sd = layout.site_dim(site);
    const long block = stride * sd;
    std::vector<Eigen::Triplet<Complex>> trip;
    for (long base = 0; base < dim; base += block)
      for (const auto& t : local)
        for (long i = 0; i < stride; ++i)
          trip.emplace_back(base + t.row() * stride + i, base + t.col() * stride + i, t.value());
    SparseXc m(dim, dim);
    m.setFromTriplets(trip.begin(), trip.end());
    ops.push_back(std::move(m));
  };

  if (noise.kappa_width_khz > 0.0) {
    const double kappa = angular(khz_to_mhz(noise.kappa_width_khz));
    std::vector<Eigen::Triplet<Complex>> a;
    for (int n = 1; n < layout.cavity_dim; ++n)
      a.emplace_back(n - 1, n, Complex(std::sqrt(kappa) * std::sqrt(double(n)), 0.0));
    add_single_site(layout.cavity_site(), a);
  }

  if (noise.gamma_excited_mhz > 0.0) {
    const double gamma = angular(noise.gamma_excited_mhz);
    struct Branch { Level from, to; double frac; };
    const Branch branches[] = {
        {Level::g, Level::a, noise.branching_g[0]},
        {Level::g, Level::c, noise.branching_g[1]},
        {Level::h, Level::b, noise.branching_h[0]},
        {Level::h, Level::d, noise.branching_h[1]},
    };
    for (int atom = 0; atom < layout.atom_count; ++atom)
      for (const auto& br : branches) {
        if (br.frac <= 0.0) continue;
        std::vector<Eigen::Triplet<Complex>> l;
        l.emplace_back(index_of(br.to), index_of(br.from),
                       Complex(std::sqrt(gamma * br.frac), 0.0));
        add_single_site(atom, l);
      }
  }

  if (noise.t2_spin_ms > 0.0) {
    const double rate = 1.0 / ms_to_us(noise.t2_spin_ms);
    for (int atom = 0; atom < layout.atom_count; ++atom)
      for (int k = 0; k < kGroundCount; ++k) {
        std::vector<Eigen::Triplet<Complex>> l;
        l.emplace_back(k, k, Complex(std::sqrt(rate), 0.0));
        add_single_site(atom, l);
      }
  }

  if (noise.t1_spin_s) {
    const double rate = 1.0 / (6.0 * s_to_us(*noise.t1_spin_s));
    for (int atom = 0; atom < layout.atom_count; ++atom)
      for (int j = 0; j < kGroundCount; ++j)
        for (int k = 0; k < kGroundCount; ++k) {
          if (j == k) continue;
          std::vector<Eigen::Triplet<Complex>> l;
          l.emplace_back(j, k, Complex(std::sqrt(rate), 0.0));
          add_single_site(atom, l);
        }
  }
  return ops;
}

using StepObserver = std::function<void(double, const CompositeState&)>;

namespace detail {

/// Propagates a pure state under a constant Hermitian H over dt via the
/// spectral decomposition; exactly norm-preserving.
inline void propagate_constant(const MatrixXc& h, VectorXc& psi, double dt) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> es(h);
  if (es.info() != Eigen::Success) throw InternalError("eigendecomposition failed");
  VectorXc coeff = es.eigenvectors().adjoint() * psi;
  for (long i = 0; i < coeff.size(); ++i)
    coeff[i] *= std::exp(Complex(0.0, -es.eigenvalues()[i] * dt));
  psi = es.eigenvectors() * coeff;
}

}  // namespace detail

/// Closed-system evolution of a pure state from t0 to t1. Piecewise-constant
/// Hamiltonians go through the exact matrix exponential; anything with a
/// shaped envelope runs through the adaptive Dormand-Prince stepper at local
/// tolerance `tol`. Norm is preserved within 1e-9.
inline OdeStats evolve_unitary(CompositeState& state, const AssembledHamiltonian& h, double t0,
                               double t1, double tol = 1e-10,
                               const StepObserver& observer = nullptr) {
  if (!state.is_pure())
    throw PreconditionError("evolve_unitary expects a pure-vector state");
  if (t1 <= t0) throw PreconditionError("evolve_unitary requires t1 > t0");

  if (h.constant_on(t0, t1)) {
    if (observer) observer(t0, state);
    detail::propagate_constant(h.dense_at(0.5 * (t0 + t1)), state.psi, t1 - t0);
    if (observer) observer(t1, state);
    return OdeStats{1, 0};
  }

  OdeOptions opts;
  opts.tol = tol;
  opts.span_for_budget = t1 - t0;
  auto rhs = [&](double t, const VectorXc& y, VectorXc& dydt) {
    dydt.setZero();
    h.accumulate_apply(t, y, dydt);
    dydt *= Complex(0.0, -1.0);
  };
  OdeStats stats;
  if (observer) {
    stats = integrate_adaptive(rhs, state.psi, t0, t1, opts,
                               [&](double t, const VectorXc&) { observer(t, state); });
  } else {
    stats = integrate_adaptive(rhs, state.psi, t0, t1, opts, [](double, const VectorXc&) {});
  }
  const double drift = std::abs(state.psi.norm() - 1.0);
  if (drift > 1e-9)
    throw InternalError("unitary evolution norm drift " + std::to_string(drift));
  return stats;
}

/// Open-system evolution under the Lindblad master equation
///   drho/dt = -i[H,rho] + sum_j L_j rho L_j^+ - (1/2){L_j^+ L_j, rho}.
/// Pure inputs are promoted to density matrices. Trace is preserved within
/// 1e-8 and Hermiticity within 1e-9.
inline OdeStats evolve_lindblad(CompositeState& state, const AssembledHamiltonian& h,
                                const NoiseParams& noise, double t0, double t1,
                                double tol = 1e-8, const StepObserver& observer = nullptr) {
  if (t1 <= t0) throw PreconditionError("evolve_lindblad requires t1 > t0");
  state.promote_to_density();

  const auto jumps = lindblad_operators(state.layout, noise);
  std::vector<SparseXc> jump_dag, jump_dag_jump;
  jump_dag.reserve(jumps.size());
  jump_dag_jump.reserve(jumps.size());
  for (const auto& l : jumps) {
    jump_dag.push_back(SparseXc(l.adjoint()));
    jump_dag_jump.push_back(jump_dag.back() * l);
  }

  OdeOptions opts;
  opts.tol = tol;
  opts.span_for_budget = t1 - t0;
  auto rhs = [&](double t, const MatrixXc& rho, MatrixXc& drho) {
    SparseXc ht = h.sparse_at(t);
    drho.noalias() = Complex(0.0, -1.0) * (ht * rho);
    drho.noalias() += Complex(0.0, 1.0) * (rho * ht);
    for (size_t j = 0; j < jumps.size(); ++j) {
      drho.noalias() += jumps[j] * (rho * jump_dag[j]);
      drho.noalias() -= 0.5 * (jump_dag_jump[j] * rho);
      drho.noalias() -= 0.5 * (rho * jump_dag_jump[j]);
    }
  };

  OdeStats stats;
  if (observer) {
    stats = integrate_adaptive(rhs, state.rho, t0, t1, opts,
                               [&](double t, const MatrixXc&) { observer(t, state); });
  } else {
    stats = integrate_adaptive(rhs, state.rho, t0, t1, opts, [](double, const MatrixXc&) {});
  }

  const double trace_drift = std::abs(state.rho.trace().real() - 1.0);
  if (trace_drift > 1e-8)
    throw InternalError("Lindblad trace drift " + std::to_string(trace_drift));
  if ((state.rho - state.rho.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
    throw InternalError("Lindblad evolution broke Hermiticity");
  return stats;
}

}  // namespace specwire

#endif  // SPECWIRE_EVOLVE_HPP
