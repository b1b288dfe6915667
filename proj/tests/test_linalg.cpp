// Copyright 2026 The qtomo Authors
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

#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace qtomo;
using namespace qtomo::testing;

namespace {

const Complex kI{0.0, 1.0};

ComplexMatrix sigma_x() { return ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix sigma_z() { return ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}; }

ComplexMatrix bell_phi_plus() {
  return named_state("bell-phi+").matrix();
}

}  // namespace

TEST(HermitianEig, IdentityHasUnitSpectrum) {
  const auto s = hermitian_eig(ComplexMatrix::identity(4));
  for (double v : s.values) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(HermitianEig, ReferenceLinearEstimateSpectrum) {
  const auto s = hermitian_eig(reference_qst_plus_pair());
  const std::vector<double> expected{1.0360, 0.0926, -0.0179, -0.1106};
  ASSERT_EQ(s.values.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(s.values[k], expected[k], 5e-4);
}

TEST(HermitianEig, ReferenceMaximumLikelihoodSpectrum) {
  const auto s = hermitian_eig(DensityMatrix::normalized(reference_mle_plus_pair()).matrix());
  const std::vector<double> expected{0.9941, 0.0030, 0.0029, 0.0000};
  for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(s.values[k], expected[k], 5e-4);
}

TEST(HermitianEig, RejectsNonHermitian) {
  ComplexMatrix m = ComplexMatrix::identity(2);
  m(0, 1) = 1e-6;
  try {
    hermitian_eig(m);
    FAIL() << "expected NotHermitian";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotHermitian);
  }
}

TEST(HermitianEig, MatchesIndependentSolverAndReconstructs) {
  std::mt19937_64 rng(11);
  for (std::size_t dim : {1u, 2u, 3u, 4u, 5u, 8u, 16u}) {
    for (int rep = 0; rep < 20; ++rep) {
      const ComplexMatrix m = random_hermitian(dim, rng);
      const Spectrum s = hermitian_eig(m);
      const auto oracle = oracle_eigenvalues(m);
      for (std::size_t k = 0; k < dim; ++k) EXPECT_NEAR(s.values[k], oracle[k], 1e-10);
      EXPECT_LE(max_abs_diff(reconstruct(s), m), 1e-9) << "dim " << dim;
      for (std::size_t k = 1; k < dim; ++k) EXPECT_GE(s.values[k - 1], s.values[k]);
      // Orthonormal columns.
      const ComplexMatrix gram = s.vectors.adjoint() * s.vectors;
      EXPECT_LE(max_abs_diff(gram, ComplexMatrix::identity(dim)), 1e-10);
    }
  }
}

TEST(HermitianEig, DegenerateSpectrumIsDeterministic) {
  // Repeated eigenvalues: the eigenvector basis must be stable run to run.
  const auto bell = bell_phi_plus();
  const auto a = hermitian_eig(partial_transpose(bell, 2, 1));
  const auto b = hermitian_eig(partial_transpose(bell, 2, 1));
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.vectors, b.vectors);
  EXPECT_NEAR(a.values[0], 0.5, 1e-14);
  EXPECT_NEAR(a.values[3], -0.5, 1e-14);
  EXPECT_LE(max_abs_diff(reconstruct(a), partial_transpose(bell, 2, 1)), 1e-12);
}

TEST(HermitianEig, DiagonalInputKeepsBasisVectors) {
  const std::vector<double> d{0.1, 0.7, -0.3};
  const auto s = hermitian_eig(ComplexMatrix::diagonal(d));
  EXPECT_EQ(s.values, (std::vector<double>{0.7, 0.1, -0.3}));
  EXPECT_EQ(s.vectors(1, 0), Complex(1.0));
  EXPECT_EQ(s.vectors(0, 1), Complex(1.0));
  EXPECT_EQ(s.vectors(2, 2), Complex(1.0));
}

TEST(Kron, PauliProducts) {
  const auto zi = kron(sigma_z(), ComplexMatrix::identity(2));
  EXPECT_EQ(zi, ComplexMatrix::diagonal(std::vector<double>{1, 1, -1, -1}));
  EXPECT_EQ(kron(ComplexMatrix::identity(2), ComplexMatrix::identity(2)),
            ComplexMatrix::identity(4));
}

TEST(Kron, BellCorrelation) {
  const auto xx = kron(sigma_x(), sigma_x());
  EXPECT_NEAR(trace_product(xx, bell_phi_plus()).real(), 1.0, 1e-15);
}

TEST(Kron, EntryLayout) {
  std::mt19937_64 rng(3);
  const auto a = random_hermitian(2, rng);
  const auto b = random_hermitian(3, rng);
  const auto k = kron(a, b);
  ASSERT_EQ(k.dim(), 6u);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(k(i * 3 + r, j * 3 + c), a(i, j) * b(r, c));
}

TEST(Kron, Associative) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = random_hermitian(2, rng);
    const auto b = random_hermitian(3, rng);
    const auto c = random_hermitian(2, rng);
    EXPECT_LE(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))), 1e-12);
  }
}

TEST(TraceProduct, ReferenceMatrices) {
  const auto q = reference_qst_plus_pair();
  const auto m = reference_mle_plus_pair();
  EXPECT_NEAR(trace_product(q, q).real(), 1.0944, 1e-3);
  EXPECT_NEAR(trace_product(m, m).real(), 0.9883, 1e-3);
  EXPECT_NEAR(trace_product(ComplexMatrix::identity(4), ComplexMatrix::identity(4)).real() / 4.0,
              1.0, 1e-15);
}

TEST(TraceProduct, MatchesFullProduct) {
  std::mt19937_64 rng(9);
  const auto a = random_hermitian(8, rng);
  const auto b = random_hermitian(8, rng);
  EXPECT_NEAR(std::abs(trace_product(a, b) - (a * b).trace()), 0.0, 1e-12);
}

TEST(TraceProduct, DimensionMismatch) {
  try {
    trace_product(ComplexMatrix::identity(2), ComplexMatrix::identity(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(PartialTranspose, ProductStateUnchanged) {
  const auto zero = named_state("zero").matrix();
  EXPECT_EQ(partial_transpose(zero, 2, 0), zero);
  EXPECT_EQ(partial_transpose(zero, 2, 1), zero);
}

TEST(PartialTranspose, BellMinimumEigenvalue) {
  const auto s = hermitian_eig(partial_transpose(bell_phi_plus(), 2, 1));
  EXPECT_NEAR(s.values.back(), -0.5, 1e-14);
}

TEST(PartialTranspose, KnownEntryMove) {
  // Transposing qubit 1 of |00><11| gives |01><10|.
  ComplexMatrix m(4);
  m(0, 3) = kI;
  const auto pt = partial_transpose(m, 2, 1);
  EXPECT_EQ(pt(1, 2), kI);
  EXPECT_EQ(pt(0, 3), Complex{});
}

TEST(PartialTranspose, InvolutionAndQubitIndependence) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    const auto rho = random_density_matrix(2, 1 + rep % 4, rng).matrix();
    for (int q : {0, 1}) EXPECT_LE(max_abs_diff(partial_transpose(partial_transpose(rho, 2, q), 2, q), rho), 1e-14);
    const auto e0 = oracle_eigenvalues(partial_transpose(rho, 2, 0));
    const auto e1 = oracle_eigenvalues(partial_transpose(rho, 2, 1));
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(e0[k], e1[k], 1e-10);
    EXPECT_LE(hermiticity_defect(partial_transpose(rho, 2, 1)), 1e-15);
  }
  const auto rho3 = random_density_matrix(3, 2, rng).matrix();
  for (int q : {0, 1, 2}) EXPECT_EQ(partial_transpose(partial_transpose(rho3, 3, q), 3, q), rho3);
}

TEST(PartialTranspose, RejectsBadShape) {
  try {
    partial_transpose(ComplexMatrix::identity(3), 2, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(SolveSpd, SolvesDampedSystem) {
  RealMatrix a(2, 2);
  a(0, 0) = 4.0;
  a(0, 1) = a(1, 0) = 1.0;
  a(1, 1) = 3.0;
  std::vector<double> x;
  const std::vector<double> b{1.0, 2.0};
  ASSERT_TRUE(solve_spd(a, 1.0, b, x));
  // (A + I) x = b with A + I = [[5,1],[1,4]].
  EXPECT_NEAR(5 * x[0] + x[1], 1.0, 1e-14);
  EXPECT_NEAR(x[0] + 4 * x[1], 2.0, 1e-14);
  RealMatrix neg(1, 1);
  neg(0, 0) = -1.0;
  EXPECT_FALSE(solve_spd(neg, 0.0, std::vector<double>{1.0}, x));
}
