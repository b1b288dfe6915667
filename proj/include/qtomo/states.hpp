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

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "qtomo/density_matrix.hpp"
#include "qtomo/error.hpp"

namespace qtomo {

inline constexpr std::array<std::string_view, 5> kNamedStates = {
    "zero", "plus-pair", "bell-psi+", "bell-phi+", "w3"};

/// Target states by name. Basis index b has qubit 0 as its most significant
/// bit, so |01> is index 1.
///   zero       |0...0> on `n_qubits` qubits
///   plus-pair  (|00> + |01>)/sqrt2
///   bell-psi+  (|01> + |10>)/sqrt2
///   bell-phi+  (|00> + |11>)/sqrt2
///   w3         (i|001> + |010> + |100>)/sqrt3
inline DensityMatrix named_state(std::string_view name, int n_qubits = 2) {
  const Complex i{0.0, 1.0};
  if (name == "zero") {
    if (n_qubits < 1 || n_qubits > 10) {
      throw Error(ErrorCode::kUnsupportedDimension, "zero state needs 1..10 qubits");
    }
    std::vector<Complex> psi(std::size_t{1} << n_qubits);
    psi[0] = 1.0;
    return DensityMatrix::pure(psi);
  }
  if (name == "plus-pair") return DensityMatrix::pure(std::vector<Complex>{1.0, 1.0, 0.0, 0.0});
  if (name == "bell-psi+") return DensityMatrix::pure(std::vector<Complex>{0.0, 1.0, 1.0, 0.0});
  if (name == "bell-phi+") return DensityMatrix::pure(std::vector<Complex>{1.0, 0.0, 0.0, 1.0});
  if (name == "w3") {
    std::vector<Complex> psi(8);
    psi[1] = i;
    psi[2] = 1.0;
    psi[4] = 1.0;
    return DensityMatrix::pure(psi);
  }
  throw Error(ErrorCode::kUnknownState, "unknown state '" + std::string(name) + "'");
}

inline bool is_named_state(std::string_view name) {
  for (auto known : kNamedStates)
    if (known == name) return true;
  return false;
}

/// Haar-random pure state.
template <class Rng>
std::vector<Complex> random_state_vector(int n_qubits, Rng& rng) {
  std::normal_distribution<double> normal;
  std::vector<Complex> psi(std::size_t{1} << n_qubits);
  for (auto& a : psi) a = {normal(rng), normal(rng)};
  return psi;
}

/// Random state G G^dagger / Tr from a Ginibre matrix with `rank` columns.
/// rank == 1 is a Haar-random pure state; rank == 2^n is full rank.
template <class Rng>
DensityMatrix random_density_matrix(int n_qubits, std::size_t rank, Rng& rng) {
  const std::size_t dim = std::size_t{1} << n_qubits;
  std::normal_distribution<double> normal;
  std::vector<Complex> g(dim * rank);
  for (auto& a : g) a = {normal(rng), normal(rng)};
  ComplexMatrix m(dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = 0; c < dim; ++c) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < rank; ++k) acc += g[r * rank + k] * std::conj(g[c * rank + k]);
      m(r, c) = acc;
    }
  return DensityMatrix::normalized(std::move(m));
}

/// Random product of single-qubit pure states.
template <class Rng>
DensityMatrix random_product_state(int n_qubits, Rng& rng) {
  ComplexMatrix m = ComplexMatrix::identity(1);
  for (int q = 0; q < n_qubits; ++q) {
    const auto psi = random_state_vector(1, rng);
    m = kron(m, DensityMatrix::pure(psi).matrix());
  }
  return DensityMatrix(n_qubits, std::move(m));
}

}  // namespace qtomo
