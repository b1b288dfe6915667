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

#include "qtomo/density_matrix.hpp"
#include "qtomo/pauli.hpp"
#include "qtomo/sim.hpp"

namespace qtomo {

/// Linear inversion: rho = 2^-n (I + sum_P e[P] P).
///
/// Hermitian and unit-trace by construction. Negative eigenvalues are left
/// in place; no clipping or identity mixing is applied. Every non-identity
/// string must be present, otherwise IncompleteSet is raised.
inline DensityMatrix reconstruct_linear(const ExpectationSet& e) {
  e.require_complete();
  PauliCoefficients c{e.n_qubits(), {}};
  c.coeffs.emplace(PauliString::identity(e.n_qubits()), 1.0);
  for (const auto& [p, m] : e.records()) c.coeffs.emplace(p, m.value);
  return assemble(c);
}

inline PhysicalityReport is_physical(const DensityMatrix& rho) { return check_physical(rho); }

}  // namespace qtomo
