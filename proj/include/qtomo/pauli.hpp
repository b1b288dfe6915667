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

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "qtomo/density_matrix.hpp"
#include "qtomo/error.hpp"
#include "qtomo/linalg.hpp"

namespace qtomo {

/// Single-qubit Pauli index: 0 = I, 1 = X, 2 = Y, 3 = Z.
enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// Tensor product of single-qubit Paulis, qubit 0 first. The text label
/// ("IXZY") is the canonical form used in files and on the command line.
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::vector<Pauli> ops) : ops_(std::move(ops)) {}

  /// The all-identity string on n qubits.
  static PauliString identity(int n_qubits) {
    return PauliString(std::vector<Pauli>(static_cast<std::size_t>(n_qubits), Pauli::I));
  }

  /// Inverse of index(): base-4 digits with qubit 0 most significant.
  static PauliString from_index(int n_qubits, std::size_t index) {
    std::vector<Pauli> ops(static_cast<std::size_t>(n_qubits));
    for (int q = n_qubits - 1; q >= 0; --q) {
      ops[static_cast<std::size_t>(q)] = static_cast<Pauli>(index & 3u);
      index >>= 2;
    }
    return PauliString(std::move(ops));
  }

  static PauliString parse(std::string_view label) {
    if (label.empty()) throw Error(ErrorCode::kParseError, "empty Pauli label");
    std::vector<Pauli> ops;
    ops.reserve(label.size());
    for (char ch : label) {
      switch (ch) {
        case 'I': ops.push_back(Pauli::I); break;
        case 'X': ops.push_back(Pauli::X); break;
        case 'Y': ops.push_back(Pauli::Y); break;
        case 'Z': ops.push_back(Pauli::Z); break;
        default:
          throw Error(ErrorCode::kParseError,
                      "invalid Pauli label '" + std::string(label) + "'");
      }
    }
    return PauliString(std::move(ops));
  }

  std::string label() const {
    static constexpr char kNames[] = {'I', 'X', 'Y', 'Z'};
    std::string out;
    out.reserve(ops_.size());
    for (Pauli p : ops_) out.push_back(kNames[static_cast<int>(p)]);
    return out;
  }

  int n_qubits() const noexcept { return static_cast<int>(ops_.size()); }
  Pauli operator[](std::size_t q) const { return ops_[q]; }
  const std::vector<Pauli>& ops() const noexcept { return ops_; }

  bool is_identity() const {
    for (Pauli p : ops_)
      if (p != Pauli::I) return false;
    return true;
  }

  std::size_t index() const {
    std::size_t idx = 0;
    for (Pauli p : ops_) idx = (idx << 2) | static_cast<std::size_t>(p);
    return idx;
  }

  /// Basis-index bits flipped by this operator (X or Y on that qubit).
  std::size_t flip_mask() const {
    std::size_t mask = 0;
    for (Pauli p : ops_) mask = (mask << 1) | ((p == Pauli::X || p == Pauli::Y) ? 1u : 0u);
    return mask;
  }

  /// The only nonzero entry of row `row` sits in column row ^ flip_mask();
  /// this returns its value.
  Complex row_entry(std::size_t row) const {
    Complex v = 1.0;
    const int n = n_qubits();
    for (int q = 0; q < n; ++q) {
      const bool bit = (row >> (n - 1 - q)) & 1u;
      switch (ops_[static_cast<std::size_t>(q)]) {
        case Pauli::I:
        case Pauli::X: break;
        case Pauli::Y: v *= bit ? Complex(0, 1) : Complex(0, -1); break;
        case Pauli::Z: if (bit) v = -v; break;
      }
    }
    return v;
  }

  friend auto operator<=>(const PauliString&, const PauliString&) = default;
  friend bool operator==(const PauliString&, const PauliString&) = default;

 private:
  std::vector<Pauli> ops_;
};

/// All 4^n strings in lexicographic order (identity first).
inline std::vector<PauliString> all_pauli_strings(int n_qubits) {
  const std::size_t count = std::size_t{1} << (2 * n_qubits);
  std::vector<PauliString> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(PauliString::from_index(n_qubits, i));
  return out;
}

/// The 4^n - 1 non-identity strings in lexicographic order.
inline std::vector<PauliString> non_identity_pauli_strings(int n_qubits) {
  auto all = all_pauli_strings(n_qubits);
  all.erase(all.begin());
  return all;
}

inline ComplexMatrix pauli_matrix(const PauliString& p) {
  const std::size_t dim = std::size_t{1} << p.n_qubits();
  const std::size_t flip = p.flip_mask();
  ComplexMatrix m(dim);
  for (std::size_t r = 0; r < dim; ++r) m(r, r ^ flip) = p.row_entry(r);
  return m;
}

/// Tr(P m) in O(dim) using the one-nonzero-per-row structure of P.
inline Complex pauli_trace(const PauliString& p, const ComplexMatrix& m) {
  const std::size_t dim = std::size_t{1} << p.n_qubits();
  if (m.dim() != dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Pauli string on " + std::to_string(p.n_qubits()) + " qubits vs matrix dim " +
                    std::to_string(m.dim()));
  }
  const std::size_t flip = p.flip_mask();
  Complex t = 0.0;
  for (std::size_t r = 0; r < dim; ++r) t += p.row_entry(r) * m(r ^ flip, r);
  return t;
}

/// Expansion coefficients c_P = Tr(P rho), so rho = 2^-n sum_P c_P P.
struct PauliCoefficients {
  int n_qubits = 0;
  std::map<PauliString, double> coeffs;
};

/// Coefficients of every Pauli string. Hermitian input gives real traces; an
/// imaginary part above 1e-12 means the input was not Hermitian enough.
inline PauliCoefficients expand(const ComplexMatrix& m, int n_qubits) {
  if (n_qubits < 1 || m.dim() != (std::size_t{1} << n_qubits)) {
    throw Error(ErrorCode::kDimensionMismatch, "expand: dimension is not 2^n_qubits");
  }
  const double tr_err = std::abs(m.trace() - 1.0);
  if (tr_err > kTraceTolerance) {
    throw Error(ErrorCode::kNotNormalized, "trace deviates from 1 by " + std::to_string(tr_err));
  }
  const double defect = hermiticity_defect(m);
  if (defect > kHermitianTolerance) {
    throw Error(ErrorCode::kNotHermitian, "max |m - m^dagger| = " + std::to_string(defect));
  }
  PauliCoefficients out{n_qubits, {}};
  for (auto& p : all_pauli_strings(n_qubits)) {
    const Complex c = pauli_trace(p, m);
    // Tolerance scales with the Hermiticity defect the input was allowed.
    if (std::abs(c.imag()) > 1e-12 + static_cast<double>(m.dim()) * defect) {
      throw Error(ErrorCode::kNotHermitian,
                  "Pauli coefficient " + p.label() + " has imaginary part " +
                      std::to_string(c.imag()));
    }
    out.coeffs.emplace(std::move(p), c.real());
  }
  return out;
}

inline PauliCoefficients expand(const DensityMatrix& rho) {
  return expand(rho.matrix(), rho.n_qubits());
}

/// rho = 2^-n sum_P c_P P. Strings absent from the map count as zero, except
/// the identity, which is required. The result is Hermitian with trace c_I
/// but need not be positive.
inline ComplexMatrix assemble_matrix(const PauliCoefficients& c) {
  const int n = c.n_qubits;
  if (n < 1) throw Error(ErrorCode::kDimensionMismatch, "assemble: n_qubits must be >= 1");
  if (!c.coeffs.contains(PauliString::identity(n))) {
    throw Error(ErrorCode::kMissingIdentityCoefficient, "identity coefficient absent");
  }
  const std::size_t dim = std::size_t{1} << n;
  const double norm = 1.0 / static_cast<double>(dim);
  ComplexMatrix m(dim);
  for (const auto& [p, value] : c.coeffs) {
    if (p.n_qubits() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "string " + p.label() + " has wrong length");
    }
    const std::size_t flip = p.flip_mask();
    for (std::size_t r = 0; r < dim; ++r) m(r, r ^ flip) += norm * value * p.row_entry(r);
  }
  return m;
}

inline DensityMatrix assemble(const PauliCoefficients& c) {
  return DensityMatrix(c.n_qubits, assemble_matrix(c));
}

}  // namespace qtomo
