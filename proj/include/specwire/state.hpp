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

#ifndef SPECWIRE_STATE_HPP
#define SPECWIRE_STATE_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>
#include <vector>

#include "specwire/common.hpp"
#include "specwire/levels.hpp"

namespace specwire {

using VectorXc = Eigen::VectorXcd;
using MatrixXc = Eigen::MatrixXcd;

// Desk-scale guard: dense states only, up to one million amplitudes.
inline constexpr long kMaxAmplitudes = 1'000'000;

/// Tensor-product layout of (atoms x cavity). Factor order is fixed:
/// atom 0, atom 1, ..., atom n-1, cavity. Atom 0 is the most significant
/// factor and the cavity Fock index is the least significant, i.e.
///   index = ((l0*8 + l1)*8 + ...)*cavity_dim + n_photons.
struct SpaceLayout {
  int atom_count = 0;
  int cavity_dim = 2;  // Fock truncation n_max + 1

  int site_count() const { return atom_count + 1; }
  int cavity_site() const { return atom_count; }

  int site_dim(int site) const {
    return site == cavity_site() ? cavity_dim : kLevelsPerAtom;
  }

  long dim() const {
    long d = 1;
    for (int s = 0; s < site_count(); ++s) d *= site_dim(s);
    return d;
  }

  long stride(int site) const {
    long st = 1;
    for (int s = site_count() - 1; s > site; --s) st *= site_dim(s);
    return st;
  }

  /// Linear index of a basis state given per-site indices.
  long index(const std::vector<int>& site_states) const {
    long idx = 0;
    for (int s = 0; s < site_count(); ++s) idx = idx * site_dim(s) + site_states[s];
    return idx;
  }

  /// Basis index of |l0 l1 ... , n> given atom levels and photon number.
  long basis_index(const std::vector<Level>& levels, int photons) const {
    long idx = 0;
    for (int a = 0; a < atom_count; ++a) idx = idx * kLevelsPerAtom + index_of(levels[a]);
    return idx * cavity_dim + photons;
  }

  int site_state_of(long index, int site) const {
    return static_cast<int>((index / stride(site)) % site_dim(site));
  }

  bool operator==(const SpaceLayout& o) const {
    return atom_count == o.atom_count && cavity_dim == o.cavity_dim;
  }
};

enum class Representation { pure_vector, density_matrix };

/// Joint quantum state of the atoms and the cavity mode; the single source of
/// quantum truth for every simulation in the library. Either a pure vector or
/// a density matrix over the SpaceLayout basis.
struct CompositeState {
  SpaceLayout layout;
  Representation rep = Representation::pure_vector;
  VectorXc psi;   // valid when rep == pure_vector
  MatrixXc rho;   // valid when rep == density_matrix

  bool is_pure() const { return rep == Representation::pure_vector; }
  long dim() const { return layout.dim(); }

  double norm() const {
    return is_pure() ? psi.norm() : std::abs(rho.trace());
  }

  /// Population of one basis state.
  double basis_population(long idx) const {
    return is_pure() ? std::norm(psi[idx]) : rho(idx, idx).real();
  }

  MatrixXc density() const {
    if (!is_pure()) return rho;
    return psi * psi.adjoint();
  }

  /// Promotes a pure state to a density matrix in place.
  void promote_to_density() {
    if (!is_pure()) return;
    rho = psi * psi.adjoint();
    psi.resize(0);
    rep = Representation::density_matrix;
  }

  /// |<other|this>|^2 for pure targets; <other|rho|other> for mixed self.
  double fidelity_with(const VectorXc& target) const {
    if (is_pure()) return std::norm(target.dot(psi));
    return (target.adjoint() * rho * target)(0, 0).real();
  }

  /// Checks the representation invariants: unit norm (1e-9) for vectors;
  /// Hermiticity (1e-10), unit trace (1e-9) and eigenvalues >= -1e-8 for
  /// density matrices.
  void validate() const {
    if (is_pure()) {
      if (std::abs(psi.squaredNorm() - 1.0) > 1e-9)
        throw InternalError("pure state norm drifted beyond 1e-9");
      return;
    }
    if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-10)
      throw InternalError("density matrix is not Hermitian within 1e-10");
    if (std::abs(rho.trace().real() - 1.0) > 1e-9 || std::abs(rho.trace().imag()) > 1e-9)
      throw InternalError("density matrix trace drifted beyond 1e-9");
    Eigen::SelfAdjointEigenSolver<MatrixXc> es(0.5 * (rho + rho.adjoint()),
                                               Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
      throw InternalError("density matrix has an eigenvalue below -1e-8");
  }
};

/// Builds |a a ... a> (x) |0_cavity>. Dimension is 8^atoms * cavity_dim and
/// must stay within the desk-scale amplitude budget.
inline CompositeState build_space(int atoms, const LevelScheme& scheme, int cavity_dim = 2) {
  scheme.validate();
  if (atoms < 1) throw PreconditionError("need at least one atom");
  if (cavity_dim < 2) throw PreconditionError("cavity_dim must be at least 2");
  double dim = std::pow(double(kLevelsPerAtom), atoms) * cavity_dim;
  if (dim > double(kMaxAmplitudes))
    throw DimensionError("state of " + std::to_string((long long)dim) +
                         " amplitudes exceeds the desk-scale limit of 1e6");
  CompositeState st;
  st.layout = SpaceLayout{atoms, cavity_dim};
  st.rep = Representation::pure_vector;
  st.psi = VectorXc::Zero(st.layout.dim());
  st.psi[0] = 1.0;  // |a...a, 0>
  return st;
}

/// Embeds a single-site operator into the composite space: identity on every
/// other tensor factor. `site` is an atom index or layout.cavity_site().
inline MatrixXc embed_operator(const SpaceLayout& layout, const MatrixXc& op, int site) {
  if (site < 0 || site >= layout.site_count())
    throw PreconditionError("site index out of range");
  const int sd = layout.site_dim(site);
  if (op.rows() != sd || op.cols() != sd)
    throw PreconditionError("operator dimension does not match the site");
  const long dim = layout.dim();
  const long stride = layout.stride(site);
  const long outer = dim / (stride * sd);
  MatrixXc out = MatrixXc::Zero(dim, dim);
  for (long o = 0; o < outer; ++o) {
    const long base = o * stride * sd;
    for (int r = 0; r < sd; ++r)
      for (int c = 0; c < sd; ++c) {
        const Complex v = op(r, c);
        if (v == Complex(0.0)) continue;
        for (long i = 0; i < stride; ++i) out(base + r * stride + i, base + c * stride + i) = v;
      }
  }
  return out;
}

/// Traces out every site not listed in `keep`; returns the reduced density
/// matrix on the kept factors in their original relative order.
inline MatrixXc partial_trace(const CompositeState& state, const std::vector<int>& keep) {
  if (keep.empty()) throw PreconditionError("keep set must be nonempty");
  const SpaceLayout& lay = state.layout;
  std::vector<int> kept = keep;
  std::sort(kept.begin(), kept.end());
  if (std::unique(kept.begin(), kept.end()) != kept.end())
    throw PreconditionError("keep set has repeated sites");
  for (int s : kept)
    if (s < 0 || s >= lay.site_count()) throw PreconditionError("keep site out of range");

  std::vector<int> traced;
  for (int s = 0; s < lay.site_count(); ++s)
    if (!std::binary_search(kept.begin(), kept.end(), s)) traced.push_back(s);

  long kdim = 1;
  for (int s : kept) kdim *= lay.site_dim(s);
  long tdim = 1;
  for (int s : traced) tdim *= lay.site_dim(s);

  auto compose = [&](long kept_idx, long traced_idx) {
    long idx = 0;
    long kk = kept_idx, tt = traced_idx;
    std::vector<int> st(lay.site_count());
    for (int i = int(kept.size()) - 1; i >= 0; --i) {
      st[kept[i]] = int(kk % lay.site_dim(kept[i]));
      kk /= lay.site_dim(kept[i]);
    }
    for (int i = int(traced.size()) - 1; i >= 0; --i) {
      st[traced[i]] = int(tt % lay.site_dim(traced[i]));
      tt /= lay.site_dim(traced[i]);
    }
    for (int s = 0; s < lay.site_count(); ++s) idx = idx * lay.site_dim(s) + st[s];
    return idx;
  };

  MatrixXc red = MatrixXc::Zero(kdim, kdim);
  if (state.is_pure()) {
    for (long t = 0; t < tdim; ++t) {
      VectorXc col(kdim);
      for (long k = 0; k < kdim; ++k) col[k] = state.psi[compose(k, t)];
      red.noalias() += col * col.adjoint();
    }
  } else {
    for (long r = 0; r < kdim; ++r)
      for (long c = 0; c < kdim; ++c) {
        Complex sum = 0.0;
        for (long t = 0; t < tdim; ++t) sum += state.rho(compose(r, t), compose(c, t));
        red(r, c) = sum;
      }
  }
  return red;
}

/// Rewrites a pure state under a permutation of the sites: new_order[k] is
/// the old site that becomes factor k. Used for basis re-ordering round trips.
inline CompositeState reorder_sites(const CompositeState& state, const std::vector<int>& new_order) {
  const SpaceLayout& lay = state.layout;
  if (int(new_order.size()) != lay.site_count())
    throw PreconditionError("permutation size mismatch");
  if (!state.is_pure()) throw PreconditionError("reorder_sites expects a pure state");

  CompositeState out = state;
  out.psi = VectorXc::Zero(lay.dim());
  std::vector<int> st(lay.site_count());
  for (long idx = 0; idx < lay.dim(); ++idx) {
    for (int s = 0; s < lay.site_count(); ++s) st[s] = lay.site_state_of(idx, s);
    long nidx = 0;
    for (int k = 0; k < lay.site_count(); ++k)
      nidx = nidx * lay.site_dim(new_order[k]) + st[new_order[k]];
    out.psi[nidx] = state.psi[idx];
  }
  return out;
}

/// Total population in one atom's level across the composite state.
inline double level_population(const CompositeState& state, int atom, Level level) {
  const SpaceLayout& lay = state.layout;
  double pop = 0.0;
  for (long idx = 0; idx < lay.dim(); ++idx)
    if (lay.site_state_of(idx, atom) == index_of(level)) pop += state.basis_population(idx);
  return pop;
}

/// Population with exactly n photons in the cavity.
inline double photon_population(const CompositeState& state, int n) {
  const SpaceLayout& lay = state.layout;
  double pop = 0.0;
  for (long idx = 0; idx < lay.dim(); ++idx)
    if (lay.site_state_of(idx, lay.cavity_site()) == n) pop += state.basis_population(idx);
  return pop;
}

/// Combined population of both excited levels, summed over atoms.
inline double excited_population(const CompositeState& state) {
  double pop = 0.0;
  for (int a = 0; a < state.layout.atom_count; ++a)
    pop += level_population(state, a, Level::g) + level_population(state, a, Level::h);
  return pop;
}

}  // namespace specwire

#endif  // SPECWIRE_STATE_HPP
