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
#include <random>

#include "specwire/levels.hpp"
#include "specwire/state.hpp"

using namespace specwire;

TEST_CASE("build_space dimensions and initial state") {
  auto scheme = default_scheme();

  auto two = build_space(2, scheme, 2);
  CHECK(two.dim() == 128);  // 8*8*2

  auto one = build_space(1, scheme, 2);
  CHECK(one.dim() == 16);
  CHECK(std::abs(one.psi[0] - Complex(1.0, 0.0)) < 1e-15);  // amplitude on |a,0>
  CHECK(one.psi.tail(15).norm() == 0.0);

  auto three = build_space(3, scheme, 3);
  CHECK(three.dim() == 1536);  // 8^3*3

  CHECK_THROWS_AS(build_space(0, scheme, 2), PreconditionError);
  CHECK_THROWS_AS(build_space(1, scheme, 1), PreconditionError);
  CHECK_THROWS_AS(build_space(8, scheme, 2), DimensionError);  // 8^8*2 > 1e6
}

TEST_CASE("level scheme encoding and invariants") {
  auto scheme = default_scheme();
  scheme.validate();
  CHECK(scheme.epsilon_ac() > 0.0);
  CHECK(scheme.epsilon_bd() > 0.0);
  CHECK(std::abs(scheme.epsilon_ac() - scheme.epsilon_bd()) < scheme.epsilon_ac());

  // the six products are hit exactly once
  CHECK(level_of(ASpin::up, BSpin::up) == Level::a);
  CHECK(level_of(ASpin::up, BSpin::down) == Level::b);
  CHECK(level_of(ASpin::down, BSpin::up) == Level::c);
  CHECK(level_of(ASpin::down, BSpin::down) == Level::d);
  CHECK(level_of(ASpin::horiz, BSpin::up) == Level::e);
  CHECK(level_of(ASpin::horiz, BSpin::down) == Level::f);

  LevelScheme bad = scheme;
  bad.ground_offsets_mhz[index_of(Level::c)] = -1.0;
  CHECK_THROWS_AS(bad.validate(), PreconditionError);
}

TEST_CASE("embed_operator structure") {
  SpaceLayout lay{2, 2};

  SECTION("|c><a| on atom 0 has 16 nonzeros") {
    MatrixXc op = MatrixXc::Zero(8, 8);
    op(index_of(Level::c), index_of(Level::a)) = 1.0;
    MatrixXc big = embed_operator(lay, op, 0);
    REQUIRE(big.rows() == 128);
    long nnz = 0;
    for (long r = 0; r < big.rows(); ++r)
      for (long c = 0; c < big.cols(); ++c)
        if (big(r, c) != Complex(0.0)) ++nnz;
    CHECK(nnz == 16);  // identity on atom 1 (8) times cavity (2)
  }

  SECTION("identity on cavity embeds to identity") {
    MatrixXc big = embed_operator(lay, MatrixXc::Identity(2, 2), lay.cavity_site());
    CHECK((big - MatrixXc::Identity(128, 128)).norm() == 0.0);
  }

  SECTION("annihilation operator on a two-level cavity has unit norm") {
    MatrixXc a = MatrixXc::Zero(2, 2);
    a(0, 1) = 1.0;
    MatrixXc big = embed_operator(lay, a, lay.cavity_site());
    Eigen::JacobiSVD<MatrixXc> svd(big);
    CHECK(svd.singularValues()(0) == Catch::Approx(1.0).margin(1e-12));
  }

  SECTION("site and dimension errors") {
    CHECK_THROWS_AS(embed_operator(lay, MatrixXc::Identity(8, 8), 5), PreconditionError);
    CHECK_THROWS_AS(embed_operator(lay, MatrixXc::Identity(3, 3), 0), PreconditionError);
  }

  SECTION("operators on distinct sites commute") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    auto rand_mat = [&](int d) {
      MatrixXc m(d, d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) m(r, c) = Complex(u(rng), u(rng));
      return m;
    };
    for (int trial = 0; trial < 5; ++trial) {
      MatrixXc x = embed_operator(lay, rand_mat(8), 0);
      MatrixXc y = embed_operator(lay, rand_mat(8), 1);
      MatrixXc z = embed_operator(lay, rand_mat(2), lay.cavity_site());
      CHECK((x * y - y * x).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((x * z - z * x).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("partial_trace") {
  auto scheme = default_scheme();

  SECTION("tracing the cavity out of |a,0> leaves pure |a><a|") {
    auto st = build_space(1, scheme, 2);
    MatrixXc red = partial_trace(st, {0});
    REQUIRE(red.rows() == 8);
    CHECK(red(0, 0).real() == Catch::Approx(1.0));
    CHECK(std::abs(red.trace().real() - 1.0) < 1e-12);
    CHECK((red * red - red).cwiseAbs().maxCoeff() < 1e-12);  // pure
  }

  SECTION("Bell reduction: diag(1/2,1/2) on {a,c}") {
    auto st = build_space(2, scheme, 2);
    st.psi.setZero();
    st.psi[st.layout.basis_index({Level::a, Level::a}, 0)] = 1.0 / std::sqrt(2.0);
    st.psi[st.layout.basis_index({Level::c, Level::c}, 0)] = 1.0 / std::sqrt(2.0);
    MatrixXc red = partial_trace(st, {0});
    CHECK(red(index_of(Level::a), index_of(Level::a)).real() == Catch::Approx(0.5));
    CHECK(red(index_of(Level::c), index_of(Level::c)).real() == Catch::Approx(0.5));
    CHECK(std::abs(red(index_of(Level::a), index_of(Level::c))) < 1e-12);
  }

  SECTION("tracing atoms out of (|a,1>+|c,0>)/sqrt2 gives cavity diag(1/2,1/2)") {
    auto st = build_space(1, scheme, 2);
    st.psi.setZero();
    st.psi[st.layout.basis_index({Level::a}, 1)] = 1.0 / std::sqrt(2.0);
    st.psi[st.layout.basis_index({Level::c}, 0)] = 1.0 / std::sqrt(2.0);
    MatrixXc red = partial_trace(st, {st.layout.cavity_site()});
    REQUIRE(red.rows() == 2);
    CHECK(red(0, 0).real() == Catch::Approx(0.5));
    CHECK(red(1, 1).real() == Catch::Approx(0.5));
    CHECK(std::abs(red(0, 1)) < 1e-12);
  }

  SECTION("keep=all returns the full density matrix") {
    auto st = build_space(2, scheme, 2);
    st.psi.setZero();
    st.psi[3] = Complex(0.6, 0.0);
    st.psi[77] = Complex(0.0, 0.8);
    MatrixXc full = partial_trace(st, {0, 1, st.layout.cavity_site()});
    CHECK((full - st.density()).cwiseAbs().maxCoeff() < 1e-14);
  }

  SECTION("empty keep set rejected") {
    auto st = build_space(1, scheme, 2);
    CHECK_THROWS_AS(partial_trace(st, {}), PreconditionError);
  }
}

TEST_CASE("basis re-ordering round trip preserves norm and state") {
  auto scheme = default_scheme();
  auto st = build_space(2, scheme, 3);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0.0, 1.0);
  for (long i = 0; i < st.dim(); ++i) st.psi[i] = Complex(n(rng), n(rng));
  st.psi.normalize();

  auto swapped = reorder_sites(st, {1, 0, 2});
  CHECK(std::abs(swapped.psi.norm() - 1.0) < 1e-12);
  auto back = reorder_sites(swapped, {1, 0, 2});
  CHECK((back.psi - st.psi).norm() < 1e-12);
}

TEST_CASE("state validation catches drifts") {
  auto scheme = default_scheme();
  auto st = build_space(1, scheme, 2);
  st.validate();
  st.psi[0] = 1.1;
  CHECK_THROWS_AS(st.validate(), InternalError);

  auto rho_state = build_space(1, scheme, 2);
  rho_state.promote_to_density();
  rho_state.validate();
  rho_state.rho(2, 3) = Complex(0.5, 0.0);  // breaks Hermiticity
  CHECK_THROWS_AS(rho_state.validate(), InternalError);
}
