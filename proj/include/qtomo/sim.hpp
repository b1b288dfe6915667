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

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "qtomo/density_matrix.hpp"
#include "qtomo/error.hpp"
#include "qtomo/linalg.hpp"
#include "qtomo/pauli.hpp"

namespace qtomo {

struct Measurement {
  double value = 0.0;
  double sigma = 1.0;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// Measured Pauli expectation values with their standard deviations. The
/// identity string is implicit (always 1) and cannot be stored.
class ExpectationSet {
 public:
  explicit ExpectationSet(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 10) {
      throw Error(ErrorCode::kUnsupportedDimension, "n_qubits must be in 1..10");
    }
  }

  int n_qubits() const noexcept { return n_qubits_; }

  void set(const PauliString& p, double value, double sigma) {
    if (p.n_qubits() != n_qubits_) {
      throw Error(ErrorCode::kInvalidRecord,
                  "label " + p.label() + " does not have " + std::to_string(n_qubits_) +
                      " qubits");
    }
    if (p.is_identity()) {
      throw Error(ErrorCode::kInvalidRecord, "the identity expectation is implicit");
    }
    if (!std::isfinite(value)) {
      throw Error(ErrorCode::kInvalidRecord, "non-finite value for " + p.label());
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
      throw Error(ErrorCode::kZeroSigma, "sigma for " + p.label() + " must be positive");
    }
    records_[p] = Measurement{value, sigma};
  }

  bool contains(const PauliString& p) const { return records_.contains(p); }

  const Measurement& at(const PauliString& p) const {
    auto it = records_.find(p);
    if (it == records_.end()) {
      throw Error(ErrorCode::kIncompleteSet, "no record for " + p.label());
    }
    return it->second;
  }

  const std::map<PauliString, Measurement>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  std::vector<PauliString> missing() const {
    std::vector<PauliString> out;
    for (auto& p : non_identity_pauli_strings(n_qubits_))
      if (!records_.contains(p)) out.push_back(std::move(p));
    return out;
  }

  bool is_complete() const {
    return records_.size() == (std::size_t{1} << (2 * n_qubits_)) - 1;
  }

  /// Throws IncompleteSet naming the missing strings.
  void require_complete() const {
    if (is_complete()) return;
    const auto miss = missing();
    std::string list;
    for (std::size_t k = 0; k < miss.size() && k < 16; ++k) {
      if (k) list += ",";
      list += miss[k].label();
    }
    if (miss.size() > 16) list += ",...";
    throw Error(ErrorCode::kIncompleteSet,
                std::to_string(miss.size()) + " missing record(s): " + list);
  }

  friend bool operator==(const ExpectationSet&, const ExpectationSet&) = default;

 private:
  int n_qubits_;
  std::map<PauliString, Measurement> records_;
};

/// Complete set of exact expectations Tr(P rho), every sigma set to
/// `default_sigma`.
inline ExpectationSet ideal_expectations(const DensityMatrix& rho, double default_sigma = 1.0) {
  const auto phys = check_physical(rho);
  if (!phys.physical) {
    throw Error(ErrorCode::kNotPhysicalState,
                "min eigenvalue " + std::to_string(phys.min_eigenvalue));
  }
  ExpectationSet out(rho.n_qubits());
  for (const auto& p : non_identity_pauli_strings(rho.n_qubits()))
    out.set(p, pauli_trace(p, rho.matrix()).real(), default_sigma);
  return out;
}

/// Expectations read straight off a Hermitian trace-1 matrix without a
/// positivity check (e.g. a transcribed linear-inversion result).
inline ExpectationSet expectations_of(const DensityMatrix& rho, double default_sigma = 1.0) {
  ExpectationSet out(rho.n_qubits());
  for (const auto& [p, c] : expand(rho).coeffs)
    if (!p.is_identity()) out.set(p, c, default_sigma);
  return out;
}

/// Gaussian noise on every record. The generator is std::mt19937_64 seeded
/// with `seed`; normals come from the cosine branch of Box-Muller on two
/// 53-bit uniforms, consumed in record order, so output is bit-identical
/// across platforms.
struct NoiseSpec {
  double sigma = 0.05;
  std::uint64_t seed = 0;
};

inline constexpr const char* kNoiseAlgorithm = "mt19937_64/box-muller-cos";

class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  // Uniform in (0, 1].
  double uniform_open() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  std::mt19937_64 engine_;
};

inline ExpectationSet add_noise(const ExpectationSet& e, const NoiseSpec& spec) {
  if (!(spec.sigma > 0.0) || !std::isfinite(spec.sigma)) {
    throw Error(ErrorCode::kZeroSigma, "noise sigma must be positive");
  }
  GaussianStream gauss(spec.seed);
  ExpectationSet out(e.n_qubits());
  for (const auto& [p, m] : e.records()) out.set(p, m.value + spec.sigma * gauss.next(), spec.sigma);
  return out;
}

// ---------------------------------------------------------------------------
// Readout pulses

/// 90-degree rf pulse phase applied to one qubit before acquisition.
enum class Rotation : std::uint8_t { kNone, kX90, kY90 };

/// One rotation tag per qubit, e.g. {kNone, kX90} is the "IX" setting.
using ReadoutPulse = std::vector<Rotation>;

/// exp(-i pi sigma / 4) for the pulse axis.
inline ComplexMatrix rotation_matrix(Rotation r) {
  const double h = std::numbers::sqrt2 / 2.0;
  const Complex i{0.0, 1.0};
  switch (r) {
    case Rotation::kNone: return ComplexMatrix::identity(2);
    case Rotation::kX90: return ComplexMatrix{{h, -i * h}, {-i * h, h}};
    case Rotation::kY90: return ComplexMatrix{{h, -h}, {h, h}};
  }
  return ComplexMatrix::identity(2);
}

inline ComplexMatrix pulse_unitary(const ReadoutPulse& pulse) {
  ComplexMatrix u = ComplexMatrix::identity(1);
  for (Rotation r : pulse) u = kron(u, rotation_matrix(r));
  return u;
}

/// U rho U^dagger for the pulse's tensor-product rotation.
inline DensityMatrix apply_readout(const DensityMatrix& rho, const ReadoutPulse& pulse) {
  if (static_cast<int>(pulse.size()) != rho.n_qubits()) {
    throw Error(ErrorCode::kDimensionMismatch, "pulse length != qubit count");
  }
  const ComplexMatrix u = pulse_unitary(pulse);
  return DensityMatrix(rho.n_qubits(), u * rho.matrix() * u.adjoint());
}

/// Parses "IX", "XX", "IY" style pulse labels (I = no pulse).
inline ReadoutPulse parse_pulse(std::string_view label) {
  ReadoutPulse out;
  for (char ch : label) {
    switch (ch) {
      case 'I': out.push_back(Rotation::kNone); break;
      case 'X': out.push_back(Rotation::kX90); break;
      case 'Y': out.push_back(Rotation::kY90); break;
      default: throw Error(ErrorCode::kParseError, "invalid pulse label '" + std::string(label) + "'");
    }
  }
  return out;
}

/// The two-qubit readout settings II, IX, IY, XX.
inline std::vector<ReadoutPulse> standard_two_qubit_readouts() {
  return {parse_pulse("II"), parse_pulse("IX"), parse_pulse("IY"), parse_pulse("XX")};
}

/// Observables resolved in a spectrum after a pulse: transverse (X or Y) on
/// one qubit, longitudinal or identity (Z or I) on the others.
inline std::vector<PauliString> transverse_observables(int n_qubits) {
  std::vector<PauliString> out;
  for (const auto& p : non_identity_pauli_strings(n_qubits)) {
    int transverse = 0;
    for (Pauli op : p.ops())
      if (op == Pauli::X || op == Pauli::Y) ++transverse;
    if (transverse == 1) out.push_back(p);
  }
  return out;
}

/// Sign and string with U^dagger O U = sign * P for Clifford pulses: the
/// pre-pulse operator whose expectation the post-pulse observable reports.
inline std::pair<PauliString, double> heisenberg_image(const PauliString& observable,
                                                       const ReadoutPulse& pulse) {
  if (static_cast<int>(pulse.size()) != observable.n_qubits()) {
    throw Error(ErrorCode::kDimensionMismatch, "pulse length != qubit count");
  }
  std::vector<Pauli> ops;
  double sign = 1.0;
  for (std::size_t q = 0; q < pulse.size(); ++q) {
    const ComplexMatrix u = rotation_matrix(pulse[q]);
    const PauliString single({observable[q]});
    const ComplexMatrix image = u.adjoint() * pauli_matrix(single) * u;
    bool found = false;
    for (int k = 0; k < 4 && !found; ++k) {
      const PauliString cand({static_cast<Pauli>(k)});
      const double c = pauli_trace(cand, image).real() / 2.0;
      if (std::abs(std::abs(c) - 1.0) < 1e-12) {
        ops.push_back(static_cast<Pauli>(k));
        sign *= c > 0 ? 1.0 : -1.0;
        found = true;
      }
    }
    if (!found) throw Error(ErrorCode::kInvalidRecord, "pulse is not Clifford on this operator");
  }
  return {PauliString(std::move(ops)), sign};
}

/// Expectation values collected by acquiring after each pulse and reading
/// the transverse observables, mapped back to pre-pulse Pauli strings. The
/// first pulse that reaches a string wins.
inline ExpectationSet pulsed_expectations(const DensityMatrix& rho,
                                          const std::vector<ReadoutPulse>& pulses,
                                          double default_sigma = 1.0) {
  ExpectationSet out(rho.n_qubits());
  const auto observables = transverse_observables(rho.n_qubits());
  for (const auto& pulse : pulses) {
    const DensityMatrix rotated = apply_readout(rho, pulse);
    for (const auto& o : observables) {
      auto [pre, sign] = heisenberg_image(o, pulse);
      if (pre.is_identity() || out.contains(pre)) continue;
      out.set(pre, sign * pauli_trace(o, rotated.matrix()).real(), default_sigma);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Decoherence channels

enum class ChannelKind { kDephasing, kDepolarizing };

struct ChannelSpec {
  ChannelKind kind = ChannelKind::kDephasing;
  double rate = 0.0;      // 1/s
  double duration = 0.0;  // s
};

/// Dephasing multiplies rho_ab by exp(-rate*duration) once per qubit where a
/// and b differ. Depolarizing mixes toward I/2^n with weight
/// 1 - exp(-rate*duration).
inline DensityMatrix evolve(const DensityMatrix& rho, const ChannelSpec& ch) {
  if (!(ch.rate >= 0.0) || !(ch.duration >= 0.0)) {
    throw Error(ErrorCode::kInvalidRecord, "channel rate and duration must be >= 0");
  }
  const auto phys = check_physical(rho);
  if (!phys.physical) {
    throw Error(ErrorCode::kNotPhysicalState,
                "min eigenvalue " + std::to_string(phys.min_eigenvalue));
  }
  const double decay = std::exp(-ch.rate * ch.duration);
  const std::size_t dim = rho.dim();
  ComplexMatrix out = rho.matrix();
  switch (ch.kind) {
    case ChannelKind::kDephasing: {
      std::vector<double> powers(static_cast<std::size_t>(rho.n_qubits()) + 1, 1.0);
      for (std::size_t k = 1; k < powers.size(); ++k) powers[k] = powers[k - 1] * decay;
      for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
          out(r, c) *= powers[static_cast<std::size_t>(std::popcount(r ^ c))];
      break;
    }
    case ChannelKind::kDepolarizing: {
      const double p = 1.0 - decay;
      out *= (1.0 - p);
      for (std::size_t r = 0; r < dim; ++r) out(r, r) += p / static_cast<double>(dim);
      break;
    }
  }
  return DensityMatrix(rho.n_qubits(), std::move(out));
}

}  // namespace qtomo
