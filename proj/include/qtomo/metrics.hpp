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
#include <optional>
#include <vector>

#include "qtomo/density_matrix.hpp"
#include "qtomo/error.hpp"
#include "qtomo/linalg.hpp"

namespace qtomo {

/// Normalized Hilbert-Schmidt overlap Tr(a^dagger b) / sqrt(Tr(a^dagger a) Tr(b^dagger b)).
/// Also defined for indefinite matrices.
inline double fidelity(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::kDimensionMismatch, "fidelity on unequal dims");
  Complex overlap = 0.0;
  double na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    overlap += std::conj(a.data()[k]) * b.data()[k];
    na += std::norm(a.data()[k]);
    nb += std::norm(b.data()[k]);
  }
  if (na < 1e-300 || nb < 1e-300) throw Error(ErrorCode::kZeroNorm, "Tr(m^dagger m) is zero");
  return overlap.real() / (std::sqrt(na) * std::sqrt(nb));
}

inline double fidelity(const DensityMatrix& a, const DensityMatrix& b) {
  return fidelity(a.matrix(), b.matrix());
}

/// Tr(rho^2). Exceeds 1 for some indefinite matrices.
inline double purity(const ComplexMatrix& rho) { return trace_product(rho, rho).real(); }
inline double purity(const DensityMatrix& rho) { return purity(rho.matrix()); }

/// 1/2 sum |eigenvalues of a - b|.
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  const auto s = hermitian_eig(a.matrix() - b.matrix());
  double acc = 0.0;
  for (double v : s.values) acc += std::abs(v);
  return 0.5 * acc;
}

/// Two-qubit entanglement parameter: minus the smallest eigenvalue of the
/// partial transpose (second qubit) when it is negative, zero otherwise.
inline double entanglement_eta(const DensityMatrix& rho) {
  if (rho.n_qubits() != 2) {
    throw Error(ErrorCode::kUnsupportedDimension, "entanglement_eta needs a two-qubit state");
  }
  const double e_min = hermitian_eig(partial_transpose(rho.matrix(), 2, 1)).values.back();
  return e_min < 0.0 ? -e_min : 0.0;
}

struct ReconstructionReport {
  std::vector<double> spectrum;
  double purity = 0.0;
  std::optional<double> fidelity;
  std::optional<double> eta;
  bool physical = false;
  double min_eigenvalue = 0.0;
};

inline ReconstructionReport report(const DensityMatrix& rho,
                                   const std::optional<DensityMatrix>& target = std::nullopt) {
  ReconstructionReport out;
  const auto phys = check_physical(rho);
  out.spectrum = phys.spectrum;
  out.min_eigenvalue = phys.min_eigenvalue;
  out.physical = phys.physical;
  out.purity = purity(rho);
  if (target) out.fidelity = fidelity(*target, rho);
  if (rho.n_qubits() == 2) out.eta = entanglement_eta(rho);
  return out;
}

}  // namespace qtomo
