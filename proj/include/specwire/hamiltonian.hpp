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

#ifndef SPECWIRE_HAMILTONIAN_HPP
#define SPECWIRE_HAMILTONIAN_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cmath>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "specwire/common.hpp"
#include "specwire/levels.hpp"
#include "specwire/pulse.hpp"
#include "specwire/state.hpp"
#include "specwire/units.hpp"

namespace specwire {

using SparseXc = Eigen::SparseMatrix<Complex>;

/// Cavity coupling on one wire leg of one atom, in the Jaynes-Cummings form
///
///   H_wire = (g/2) (|excited><ground| a + a^dagger |ground><excited|),
///
/// so the dressed-state splitting of the bare |ground,1>, |excited,0> block
/// equals g.
struct CavityAttachment {
  int atom = 0;
  Level ground = Level::c;
  Level excited = Level::g;
  double g_mhz = 0.0;
};

enum class CavityPolicy { resonant, detuned };

/// Rotating-frame configuration. One rotating frame is chosen per optical
/// carrier so that no optical frequency survives in the Hamiltonian and the
/// only time dependence left is the pulse envelopes.
///
/// The frame is ground-anchored: ground-level diagonals sit at zero between
/// pulses, excited level diagonals carry the reference single-photon
/// detuning, and the cavity contributes cavity_photon_detuning_mhz per
/// photon. Per-drive residual two-photon detunings are expressed through the
/// individual leg detunings of the PulseSpec relative to that reference.
struct FrameConfig {
  std::vector<double> atom_optical_detunings_mhz;  // per atom, cavity vs wire transition
  CavityPolicy policy = CavityPolicy::detuned;
  double cavity_detuning_mhz = 30.0;      // Delta_c, used when policy == detuned
  double cavity_photon_detuning_mhz = 0;  // two-photon mismatch of the cavity itself

  double excited_reference_mhz(int atom) const {
    double base = (policy == CavityPolicy::detuned) ? cavity_detuning_mhz : 0.0;
    if (atom < int(atom_optical_detunings_mhz.size()))
      base += atom_optical_detunings_mhz[atom];
    return base;
  }

  /// Hard check: in the detuned configuration the detuning must stay inside
  /// (0, epsilon_ac). Returns soft warnings when it is not comfortably large
  /// against the homogeneous linewidth or small against epsilon_ac.
  std::vector<std::string> validate(const LevelScheme& scheme,
                                    double homogeneous_linewidth_mhz = 5.0) const {
    std::vector<std::string> warnings;
    if (policy == CavityPolicy::detuned) {
      if (cavity_detuning_mhz <= 0.0 || cavity_detuning_mhz >= scheme.epsilon_ac())
        throw PreconditionError("detuned cavity requires 0 < Delta_c < epsilon_ac");
      if (cavity_detuning_mhz < 3.0 * homogeneous_linewidth_mhz)
        warnings.push_back("cavity detuning is within 3 linewidths of resonance");
      if (cavity_detuning_mhz > scheme.epsilon_ac() / 3.0)
        warnings.push_back("cavity detuning is not small against epsilon_ac");
    }
    return warnings;
  }
};

/// Hamiltonian in the multi-rotating frame, split into a static part and one
/// envelope-scaled coupling term per pulse:
///
///   H(t) = H_static + sum_k env_k(t) * C_k        (all entries in rad/us)
///
/// H_static holds the frame diagonals and the cavity couplings; each C_k is
/// the Hermitian drive coupling of one pulse at peak amplitude.
struct AssembledHamiltonian {
  long dim = 0;
  SparseXc h_static;
  struct Drive {
    SparseXc coupling;  // Hermitian, peak amplitude
    Envelope envelope;
    double start_us;
    double duration_us;
    double env_at(double t) const {
      if (duration_us <= 0.0) return 0.0;
      return envelope_value(envelope, (t - start_us) / duration_us);
    }
  };
  std::vector<Drive> drives;

  bool time_independent() const { return drives.empty(); }

  /// True when H is constant over [t0, t1]: no drives, or every drive is a
  /// rect window covering the whole span (or absent from it entirely).
  bool constant_on(double t0, double t1) const {
    for (const auto& d : drives) {
      const bool outside = (d.start_us >= t1 - 1e-15) || (d.start_us + d.duration_us <= t0 + 1e-15);
      if (outside) continue;
      const bool covers = d.envelope == Envelope::rect && d.start_us <= t0 + 1e-12 &&
                          d.start_us + d.duration_us >= t1 - 1e-12;
      if (!covers) return false;
    }
    return true;
  }

  SparseXc sparse_at(double t) const {
    SparseXc h = h_static;
    for (const auto& d : drives) {
      double e = d.env_at(t);
      if (e != 0.0) h += e * d.coupling;
    }
    return h;
  }

  MatrixXc dense_at(double t) const { return MatrixXc(sparse_at(t)); }

  /// out += H(t) * in, without materialising H.
  void accumulate_apply(double t, const VectorXc& in, VectorXc& out) const {
    out.noalias() += h_static * in;
    for (const auto& d : drives) {
      double e = d.env_at(t);
      if (e != 0.0) out.noalias() += e * (d.coupling * in);
    }
  }
};

namespace detail {

struct FrameSolver {
  // implied frame offsets (rad/us) per (atom, level); nullopt = unconstrained
  std::vector<std::optional<double>> offsets;
  int atoms;

  explicit FrameSolver(int atom_count)
      : offsets(size_t(atom_count) * kLevelsPerAtom), atoms(atom_count) {}

  std::optional<double>& slot(int atom, Level l) {
    return offsets[size_t(atom) * kLevelsPerAtom + index_of(l)];
  }

  void require(int atom, Level l, double value, const char* who) {
    auto& s = slot(atom, l);
    if (!s) {
      s = value;
      return;
    }
    if (std::abs(*s - value) > 1e-9)
      throw PreconditionError(std::string("inconsistent rotating frame at level ") +
                              to_string(l) + " of atom " + std::to_string(atom) +
                              " (" + who + "): carriers cannot be made simultaneously static");
  }
};

}  // namespace detail

/// Assembles the rotating-frame Hamiltonian for the given drives and cavity
/// attachments. Entries are detunings, Rabi envelopes Omega(t)/2 and cavity
/// couplings g/2, in angular units; optical carriers never appear.
inline AssembledHamiltonian build_hamiltonian(const SpaceLayout& layout,
                                              const LevelScheme& scheme,
                                              const FrameConfig& frame,
                                              const std::vector<PulseSpec>& drives,
                                              const std::vector<CavityAttachment>& cavity) {
  const long dim = layout.dim();
  detail::FrameSolver solver(layout.atom_count);

  // Cavity attachments pin their excited level to the frame reference.
  for (const auto& att : cavity) {
    if (att.atom < 0 || att.atom >= layout.atom_count)
      throw PreconditionError("cavity attachment addresses a nonexistent atom");
    if (!scheme.leg_allowed(att.ground, att.excited))
      throw PreconditionError("cavity attachment on a forbidden leg");
    solver.require(att.atom, att.excited, frame.excited_reference_mhz(att.atom), "cavity");
    solver.require(att.atom, att.ground, 0.0, "cavity");
  }

  // Drive legs: the first carrier touching an excited level anchors it; every
  // leg then implies a (small) two-photon offset on its ground level.
  for (const auto& p : drives) {
    p.validate(scheme);
    if (p.atom < 0 || p.atom >= layout.atom_count)
      throw PreconditionError("drive addresses a nonexistent atom");
    for (const auto& leg : p.legs) {
      auto& exc = solver.slot(p.atom, leg.excited);
      if (!exc) exc = leg.detuning_mhz;
      solver.require(p.atom, leg.ground, *exc - leg.detuning_mhz, "drive");
    }
  }

  AssembledHamiltonian out;
  out.dim = dim;

  std::vector<Eigen::Triplet<Complex>> trip;

  // Frame diagonals.
  for (int a = 0; a < layout.atom_count; ++a) {
    for (int l = 0; l < kLevelsPerAtom; ++l) {
      auto& s = solver.slot(a, static_cast<Level>(l));
      double off = s ? *s : 0.0;
      if (off == 0.0) continue;
      const long stride = layout.stride(a);
      const long block = stride * kLevelsPerAtom;
      for (long base = 0; base < dim; base += block)
        for (long i = 0; i < stride; ++i) {
          long idx = base + l * stride + i;
          trip.emplace_back(idx, idx, Complex(angular(off), 0.0));
        }
    }
  }
  if (frame.cavity_photon_detuning_mhz != 0.0) {
    for (long idx = 0; idx < dim; ++idx) {
      int n = layout.site_state_of(idx, layout.cavity_site());
      if (n > 0)
        trip.emplace_back(idx, idx, Complex(n * angular(frame.cavity_photon_detuning_mhz), 0.0));
    }
  }

  // Cavity couplings: (g/2)(|e><w| a + h.c.).
  for (const auto& att : cavity) {
    if (att.g_mhz == 0.0) continue;
    const double amp = 0.5 * angular(att.g_mhz);
    const long astride = layout.stride(att.atom);
    const int cdim = layout.cavity_dim;
    const int gi = index_of(att.ground), ei = index_of(att.excited);
    for (long idx = 0; idx < dim; ++idx) {
      if (layout.site_state_of(idx, att.atom) != gi) continue;
      int n = layout.site_state_of(idx, layout.cavity_site());
      if (n < 1) continue;
      // |ground, n> -> |excited, n-1>
      long jdx = idx + (ei - gi) * astride - 1;
      double elem = amp * std::sqrt(double(n));
      trip.emplace_back(jdx, idx, Complex(elem, 0.0));
      trip.emplace_back(idx, jdx, Complex(elem, 0.0));
      (void)cdim;
    }
  }

  out.h_static.resize(dim, dim);
  out.h_static.setFromTriplets(trip.begin(), trip.end());

  // One envelope-scaled coupling per pulse.
  for (const auto& p : drives) {
    std::vector<Eigen::Triplet<Complex>> dt;
    const long astride = layout.stride(p.atom);
    for (size_t k = 0; k < p.legs.size(); ++k) {
      const auto& leg = p.legs[k];
      if (leg.omega_peak_mhz == 0.0) continue;
      const Complex amp = 0.5 * angular(leg.omega_peak_mhz) *
                          std::exp(Complex(0.0, k == 0 ? p.phase_rad : 0.0));
      const int gi = index_of(leg.ground), ei = index_of(leg.excited);
      for (long idx = 0; idx < dim; ++idx) {
        if (layout.site_state_of(idx, p.atom) != gi) continue;
        long jdx = idx + (ei - gi) * astride;
        dt.emplace_back(jdx, idx, amp);            // |e><u|
        dt.emplace_back(idx, jdx, std::conj(amp)); // h.c.
      }
    }
    AssembledHamiltonian::Drive d;
    d.coupling.resize(dim, dim);
    d.coupling.setFromTriplets(dt.begin(), dt.end());
    d.envelope = p.envelope;
    d.start_us = p.start_us;
    d.duration_us = p.duration_us;
    out.drives.push_back(std::move(d));
  }

  // Hermiticity is guaranteed by construction term-by-term; verify on small
  // spaces where the dense check is free.
  if (dim <= 256) {
    double tmid = out.drives.empty() ? 0.0
                                     : out.drives.front().start_us +
                                           0.5 * out.drives.front().duration_us;
    MatrixXc h = out.dense_at(tmid);
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-9)
      throw InternalError("assembled Hamiltonian is not Hermitian");
  }
  return out;
}

}  // namespace specwire

#endif  // SPECWIRE_HAMILTONIAN_HPP
