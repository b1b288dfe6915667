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

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qtomo/error.hpp"
#include "qtomo/linalg.hpp"

namespace qtomo {

inline constexpr double kHermitianTolerance = 1e-8;
inline constexpr double kTraceTolerance = 1e-8;
inline constexpr double kPositivityTolerance = 1e-9;

/// n-qubit state: Hermitian, unit trace, dimension 2^n. Positivity is NOT
/// enforced; linear-inversion output may have negative eigenvalues. Use
/// check_physical() to test for it.
class DensityMatrix {
 public:
  DensityMatrix(int n_qubits, ComplexMatrix matrix)
      : n_qubits_(n_qubits), matrix_(std::move(matrix)) {
    if (n_qubits < 1 || n_qubits > 10 || matrix_.dim() != (std::size_t{1} << n_qubits)) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "matrix dimension " + std::to_string(matrix_.dim()) + " is not 2^" +
                      std::to_string(n_qubits));
    }
    const double defect = hermiticity_defect(matrix_);
    if (defect > kHermitianTolerance) {
      throw Error(ErrorCode::kNotHermitian, "max |m - m^dagger| = " + std::to_string(defect));
    }
    const double tr_err = std::abs(matrix_.trace() - 1.0);
    if (tr_err > kTraceTolerance) {
      throw Error(ErrorCode::kNotNormalized,
                  "trace deviates from 1 by " + std::to_string(tr_err));
    }
  }

  /// Infers n from the dimension and divides by the (real) trace first.
  /// Meant for transcribed matrices whose printed entries were rounded.
  static DensityMatrix normalized(ComplexMatrix m) {
    const double tr = m.trace().real();
    if (!(std::abs(tr) > 1e-300)) throw Error(ErrorCode::kZeroNorm, "trace is zero");
    m *= 1.0 / tr;
    return DensityMatrix(qubits_for_dim(m.dim()), std::move(m));
  }

  static DensityMatrix pure(std::span<const Complex> psi) {
    double norm = 0.0;
    for (const auto& a : psi) norm += std::norm(a);
    if (!(norm > 1e-300)) throw Error(ErrorCode::kZeroNorm, "zero state vector");
    std::vector<Complex> unit(psi.begin(), psi.end());
    for (auto& a : unit) a /= std::sqrt(norm);
    return DensityMatrix(qubits_for_dim(unit.size()), ComplexMatrix::projector(unit));
  }

  static DensityMatrix maximally_mixed(int n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    return DensityMatrix(n_qubits,
                         ComplexMatrix::identity(dim) * Complex(1.0 / static_cast<double>(dim)));
  }

  static int qubits_for_dim(std::size_t dim) {
    int n = 0;
    while ((std::size_t{1} << n) < dim) ++n;
    if ((std::size_t{1} << n) != dim || n == 0) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "dimension " + std::to_string(dim) + " is not a power of two >= 2");
    }
    return n;
  }

  int n_qubits() const noexcept { return n_qubits_; }
  std::size_t dim() const noexcept { return matrix_.dim(); }
  const ComplexMatrix& matrix() const noexcept { return matrix_; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return matrix_(r, c); }

 private:
  int n_qubits_;
  ComplexMatrix matrix_;
};

struct PhysicalityReport {
  bool physical = false;
  double min_eigenvalue = 0.0;
  double trace = 0.0;
  std::vector<double> spectrum;
};

/// Physical iff min eigenvalue >= -tolerance and trace within 1e-8 of one.
inline PhysicalityReport check_physical(const ComplexMatrix& m,
                                        double tolerance = kPositivityTolerance) {
  PhysicalityReport r;
  r.spectrum = hermitian_eig(m).values;
  r.min_eigenvalue = r.spectrum.back();
  r.trace = m.trace().real();
  r.physical = r.min_eigenvalue >= -tolerance && std::abs(r.trace - 1.0) <= kTraceTolerance;
  return r;
}

inline PhysicalityReport check_physical(const DensityMatrix& rho,
                                        double tolerance = kPositivityTolerance) {
  return check_physical(rho.matrix(), tolerance);
}

}  // namespace qtomo
