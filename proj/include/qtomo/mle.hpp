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

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "qtomo/density_matrix.hpp"
#include "qtomo/error.hpp"
#include "qtomo/linalg.hpp"
#include "qtomo/pauli.hpp"
#include "qtomo/qst.hpp"
#include "qtomo/sim.hpp"

namespace qtomo {

/// Real parameters of a lower-triangular T with rho = T^dagger T / Tr(T^dagger T).
///
/// Layout for d = 2^n: t[0..d) are the diagonal entries T(k,k); after that
/// come (real, imaginary) pairs for the strictly lower triangle, row by row:
/// T(1,0), T(2,0), T(2,1), T(3,0), ... Total length d^2 = 4^n.
struct TParams {
  int n_qubits = 0;
  std::vector<double> t;

  TParams() = default;
  TParams(int n, std::vector<double> values) : n_qubits(n), t(std::move(values)) {
    const std::size_t expected = std::size_t{1} << (2 * n);
    if (n < 1 || t.size() != expected) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "TParams for " + std::to_string(n) + " qubits needs " +
                      std::to_string(expected) + " entries");
    }
    for (double v : t)
      if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidRecord, "non-finite t entry");
  }

  std::size_t dim() const noexcept { return std::size_t{1} << n_qubits; }

  /// Offset of the real part of T(row, col), row > col.
  static std::size_t lower_offset(std::size_t dim, std::size_t row, std::size_t col) {
    return dim + 2 * (row * (row - 1) / 2 + col);
  }

  /// Diagonal entries 2^{-n/2}: the maximally mixed state.
  static TParams maximally_mixed(int n) {
    const std::size_t d = std::size_t{1} << n;
    std::vector<double> t(d * d, 0.0);
    for (std::size_t k = 0; k < d; ++k) t[k] = 1.0 / std::sqrt(static_cast<double>(d));
    return TParams(n, std::move(t));
  }
};

inline ComplexMatrix lower_triangular(const TParams& p) {
  const std::size_t d = p.dim();
  ComplexMatrix tm(d);
  for (std::size_t k = 0; k < d; ++k) tm(k, k) = p.t[k];
  for (std::size_t r = 1; r < d; ++r)
    for (std::size_t c = 0; c < r; ++c) {
      const std::size_t off = TParams::lower_offset(d, r, c);
      tm(r, c) = {p.t[off], p.t[off + 1]};
    }
  return tm;
}

namespace detail {

// T^dagger T / Tr, with the upper triangle computed and mirrored so the
// result is exactly Hermitian.
inline ComplexMatrix gram_normalized(const ComplexMatrix& tm, double trace) {
  const std::size_t d = tm.dim();
  ComplexMatrix a(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      Complex acc = 0.0;
      for (std::size_t r = j; r < d; ++r) acc += std::conj(tm(r, i)) * tm(r, j);
      acc /= trace;
      a(i, j) = acc;
      a(j, i) = std::conj(acc);
    }
  for (std::size_t i = 0; i < d; ++i) a(i, i) = a(i, i).real();
  return a;
}

inline double squared_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace detail

/// rho = T^dagger T / Tr(T^dagger T). Always Hermitian, positive
/// semidefinite and unit trace.
inline DensityMatrix rho_from_t(const TParams& p) {
  const double trace = detail::squared_norm(p.t);  // Tr(T^dagger T) = sum t_i^2
  if (!(trace >= 1e-300)) throw Error(ErrorCode::kZeroParameters, "Tr(T^dagger T) is zero");
  return DensityMatrix(p.n_qubits, detail::gram_normalized(lower_triangular(p), trace));
}

namespace detail {

// Factor m = T^dagger T with T lower triangular, working from the last row
// up. Negative pivots continue into the complex plane (imaginary diagonal).
// Returns nullopt if any pivot magnitude drops below 1e-12.
inline std::optional<ComplexMatrix> reverse_cholesky(const ComplexMatrix& m) {
  const std::size_t d = m.dim();
  ComplexMatrix tm(d);
  for (std::size_t k = d; k-- > 0;) {
    double pivot = m(k, k).real();
    for (std::size_t r = k + 1; r < d; ++r) pivot -= std::norm(tm(r, k));
    if (std::abs(pivot) < 1e-12) return std::nullopt;
    const Complex z = pivot > 0 ? Complex(std::sqrt(pivot), 0.0) : Complex(0.0, std::sqrt(-pivot));
    tm(k, k) = z;
    for (std::size_t j = 0; j < k; ++j) {
      Complex acc = m(k, j);
      for (std::size_t r = k + 1; r < d; ++r) acc -= std::conj(tm(r, k)) * tm(r, j);
      tm(k, j) = acc / std::conj(z);
    }
  }
  return tm;
}

}  // namespace detail

/// Inverse of rho_from_t for positive-definite rho (exact up to rounding).
///
/// For indefinite input the factorization continues with imaginary diagonal
/// entries; their imaginary parts are dropped, leaving a real parameter
/// vector suitable as an optimizer seed. Near-singular pivots trigger one
/// retry on (rho + eps I)/(1 + eps d).
inline TParams t_from_rho(const DensityMatrix& rho, double regularization = 1e-6) {
  const std::size_t d = rho.dim();
  auto tm = detail::reverse_cholesky(rho.matrix());
  if (!tm) {
    ComplexMatrix reg = rho.matrix();
    for (std::size_t k = 0; k < d; ++k) reg(k, k) += regularization;
    reg *= 1.0 / (1.0 + regularization * static_cast<double>(d));
    tm = detail::reverse_cholesky(reg);
  }
  if (!tm) throw Error(ErrorCode::kSingularPivot, "pivot below 1e-12 after regularization");

  std::vector<double> t(d * d, 0.0);
  for (std::size_t k = 0; k < d; ++k) t[k] = (*tm)(k, k).real();
  for (std::size_t r = 1; r < d; ++r)
    for (std::size_t c = 0; c < r; ++c) {
      const std::size_t off = TParams::lower_offset(d, r, c);
      t[off] = (*tm)(r, c).real();
      t[off + 1] = (*tm)(r, c).imag();
    }
  return TParams(rho.n_qubits(), std::move(t));
}

/// Weighted residuals (model - data)/sigma and total = sum residual^2 / 2.
struct LikelihoodValue {
  double total = 0.0;
  std::map<PauliString, double> residuals;
};

namespace detail {

inline void require_matching(const TParams& p, const ExpectationSet& data) {
  if (p.n_qubits != data.n_qubits()) {
    throw Error(ErrorCode::kDimensionMismatch, "parameters and data disagree on qubit count");
  }
}

// Residual vector in record order.
inline std::vector<double> residual_vector(const TParams& p, const ExpectationSet& data) {
  const DensityMatrix rho = rho_from_t(p);
  std::vector<double> r;
  r.reserve(data.size());
  for (const auto& [pauli, m] : data.records())
    r.push_back((pauli_trace(pauli, rho.matrix()).real() - m.value) / m.sigma);
  return r;
}

}  // namespace detail

/// Gaussian negative log-likelihood over the records present in `data`.
inline LikelihoodValue likelihood(const TParams& p, const ExpectationSet& data) {
  detail::require_matching(p, data);
  const auto r = detail::residual_vector(p, data);
  LikelihoodValue out;
  std::size_t k = 0;
  for (const auto& [pauli, m] : data.records()) {
    out.total += 0.5 * r[k] * r[k];
    out.residuals.emplace(pauli, r[k]);
    ++k;
  }
  return out;
}

/// d residual_P / d t_i, rows in record order, analytic.
///
/// With A = T^dagger T and s = sum t^2: for a parameter that places the unit
/// c (1 or i) at T(a, b), Tr(P dA) = 2 Re(c (P T^dagger)_{ba}) and the
/// normalization contributes -2 t_i Tr(P A)/s^2.
inline RealMatrix jacobian(const TParams& p, const ExpectationSet& data) {
  detail::require_matching(p, data);
  const std::size_t d = p.dim();
  const double s = detail::squared_norm(p.t);
  if (!(s >= 1e-300)) throw Error(ErrorCode::kZeroParameters, "Tr(T^dagger T) is zero");
  const ComplexMatrix tm = lower_triangular(p);
  const ComplexMatrix rho = detail::gram_normalized(tm, s);

  RealMatrix jac(data.size(), d * d);
  std::vector<Complex> entries(d);
  std::size_t row = 0;
  for (const auto& [pauli, m] : data.records()) {
    const std::size_t flip = pauli.flip_mask();
    for (std::size_t b = 0; b < d; ++b) entries[b] = pauli.row_entry(b);
    const double model = pauli_trace(pauli, rho).real();
    const double scale = 1.0 / (s * m.sigma);
    // (P T^dagger)_{ba} = P(b, b^flip) conj(T(a, b^flip)).
    auto pt_dag = [&](std::size_t b, std::size_t a) -> Complex {
      const std::size_t k = b ^ flip;
      return k <= a ? entries[b] * std::conj(tm(a, k)) : Complex{};
    };
    for (std::size_t k = 0; k < d; ++k)
      jac(row, k) = (2.0 * pt_dag(k, k).real() - 2.0 * p.t[k] * model) * scale;
    for (std::size_t r = 1; r < d; ++r)
      for (std::size_t c = 0; c < r; ++c) {
        const std::size_t off = TParams::lower_offset(d, r, c);
        const Complex v = pt_dag(c, r);
        jac(row, off) = (2.0 * v.real() - 2.0 * p.t[off] * model) * scale;
        // c = i: Re(i v) = -Im v.
        jac(row, off + 1) = (-2.0 * v.imag() - 2.0 * p.t[off + 1] * model) * scale;
      }
    ++row;
  }
  return jac;
}

namespace detail {

// Second-order residual term sum_k r_k d^2 r_k / dt^2 of the likelihood
// Hessian, given residuals r and gradient g = J^T r.
//
// Each model value is a Rayleigh quotient t^T M_P t / t^T t, so with
// Q = sum_k (r_k / sigma_k) P_k and M_Q the real quadratic form of
// t -> Tr(Q T^dagger T), the term is (2/s) (M_Q - Tr(Q rho) I - t g^T - g t^T).
inline RealMatrix residual_curvature(const TParams& p, const ExpectationSet& data,
                                     const std::vector<double>& r, const std::vector<double>& g) {
  const std::size_t d = p.dim();
  const std::size_t np = d * d;
  const double s = squared_norm(p.t);
  ComplexMatrix q(d);
  std::size_t k = 0;
  for (const auto& [pauli, m] : data.records()) {
    const double w = r[k++] / m.sigma;
    const std::size_t flip = pauli.flip_mask();
    for (std::size_t b = 0; b < d; ++b) q(b, b ^ flip) += w * pauli.row_entry(b);
  }
  const ComplexMatrix tm = lower_triangular(p);
  const double q_rho = trace_product(q, gram_normalized(tm, s)).real();

  // Row a of T contributes z Q z^dagger, z = (x + iy) over columns c <= a:
  // x^T Re(Q) x + y^T Re(Q) y + 2 x^T Im(Q) y.
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  RealMatrix h(np, np);
  std::vector<std::size_t> xs(d), ys(d);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t c = 0; c < a; ++c) {
      xs[c] = TParams::lower_offset(d, a, c);
      ys[c] = xs[c] + 1;
    }
    xs[a] = a;
    ys[a] = kNone;
    for (std::size_t c = 0; c <= a; ++c)
      for (std::size_t e = 0; e <= a; ++e) {
        const Complex v = q(c, e);
        h(xs[c], xs[e]) += v.real();
        if (ys[c] != kNone && ys[e] != kNone) h(ys[c], ys[e]) += v.real();
        if (ys[e] != kNone) h(xs[c], ys[e]) += v.imag();
        if (ys[c] != kNone) h(ys[c], xs[e]) += q(e, c).imag();
      }
  }
  for (std::size_t i = 0; i < np; ++i) {
    h(i, i) -= q_rho;
    for (std::size_t j = 0; j < np; ++j) h(i, j) -= p.t[i] * g[j] + g[i] * p.t[j];
  }
  for (std::size_t i = 0; i < np; ++i)
    for (std::size_t j = 0; j < np; ++j) h(i, j) *= 2.0 / s;
  return h;
}

}  // namespace detail

enum class Termination { kGradientTol, kStepTol, kMaxIters };

constexpr std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::kGradientTol: return "gradient_tol";
    case Termination::kStepTol: return "step_tol";
    case Termination::kMaxIters: return "max_iters";
  }
  return "unknown";
}

struct FitOptions {
  double gtol = 1e-10;
  double xtol = 1e-12;
  int max_iters = 2000;
  double regularization = 1e-6;
  bool restart_on_failure = true;
  /// Called with the starting point and every accepted iterate.
  std::function<void(const TParams&, double likelihood)> observer;
};

struct FitResult {
  DensityMatrix rho;
  TParams t_opt;
  double final_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  Termination termination = Termination::kMaxIters;
  double gradient_max = 0.0;
  /// max_iters reached with max |gradient| still above 1e-4.
  bool did_not_converge = false;
  bool restarted = false;
};

namespace detail {

inline FitResult levenberg_marquardt(const ExpectationSet& data, TParams t, const FitOptions& opts) {
  const std::size_t np = t.t.size();
  {
    const double norm = std::sqrt(squared_norm(t.t));
    if (!(norm >= 1e-150)) throw Error(ErrorCode::kZeroParameters, "zero initial parameters");
    for (double& v : t.t) v /= norm;
  }

  auto cost_of = [](const std::vector<double>& r) {
    double c = 0.0;
    for (double v : r) c += 0.5 * v * v;
    return c;
  };

  std::vector<double> r = residual_vector(t, data);
  double cost = cost_of(r);
  RealMatrix jac = jacobian(t, data);
  if (opts.observer) opts.observer(t, cost);

  const std::size_t nr = r.size();
  RealMatrix normal(np, np);
  std::vector<double> grad(np), neg_grad(np), step;
  auto build_normal_equations = [&] {
    for (std::size_t i = 0; i < np; ++i) {
      double g = 0.0;
      for (std::size_t k = 0; k < nr; ++k) g += jac(k, i) * r[k];
      grad[i] = g;
      neg_grad[i] = -g;
      for (std::size_t j = i; j < np; ++j) {
        double a = 0.0;
        for (std::size_t k = 0; k < nr; ++k) a += jac(k, i) * jac(k, j);
        normal(i, j) = a;
        normal(j, i) = a;
      }
    }
    const RealMatrix curvature = residual_curvature(t, data, r, grad);
    for (std::size_t i = 0; i < np; ++i)
      for (std::size_t j = 0; j < np; ++j) normal(i, j) += curvature(i, j);
  };
  build_normal_equations();

  double max_diag = 0.0;
  for (std::size_t i = 0; i < np; ++i) max_diag = std::max(max_diag, normal(i, i));
  double lambda = 1e-3 * (max_diag > 0.0 ? max_diag : 1.0);
  double nu = 2.0;

  int iters = 0;
  Termination reason = Termination::kMaxIters;
  double gmax = 0.0;
  while (true) {
    gmax = 0.0;
    for (double g : grad) gmax = std::max(gmax, std::abs(g));
    if (gmax < opts.gtol) {
      reason = Termination::kGradientTol;
      break;
    }
    if (iters >= opts.max_iters) {
      reason = Termination::kMaxIters;
      break;
    }
    ++iters;
    if (!solve_spd(normal, lambda, neg_grad, step)) {
      lambda *= nu;
      nu *= 2.0;
      continue;
    }
    const double step_norm = std::sqrt(squared_norm(step));
    if (step_norm <= opts.xtol * (1.0 + opts.xtol)) {  // ||t|| == 1
      reason = Termination::kStepTol;
      break;
    }
    TParams trial = t;
    for (std::size_t i = 0; i < np; ++i) trial.t[i] += step[i];
    const double trial_norm = std::sqrt(squared_norm(trial.t));
    bool accepted = false;
    double gain = 0.0;
    if (trial_norm >= 1e-150) {
      for (double& v : trial.t) v /= trial_norm;
      const auto r_trial = residual_vector(trial, data);
      const double cost_trial = cost_of(r_trial);
      double predicted = 0.0;
      for (std::size_t i = 0; i < np; ++i) predicted += 0.5 * step[i] * (lambda * step[i] - grad[i]);
      gain = predicted > 0.0 ? (cost - cost_trial) / predicted : -1.0;
      if (gain > 0.0 && cost_trial <= cost) {
        t = std::move(trial);
        r = r_trial;
        cost = cost_trial;
        accepted = true;
      }
    }
    if (accepted) {
      jac = jacobian(t, data);
      build_normal_equations();
      if (opts.observer) opts.observer(t, cost);
      const double f = 2.0 * gain - 1.0;
      lambda *= std::max(1.0 / 3.0, 1.0 - f * f * f);
      nu = 2.0;
    } else {
      lambda *= nu;
      nu *= 2.0;
      if (!std::isfinite(lambda)) {
        reason = Termination::kStepTol;
        break;
      }
    }
  }

  FitResult out{rho_from_t(t), t};
  out.final_likelihood = cost;
  out.iterations = iters;
  out.termination = reason;
  out.converged = reason != Termination::kMaxIters;
  out.gradient_max = gmax;
  out.did_not_converge = !out.converged && gmax > 1e-4;
  return out;
}

}  // namespace detail

/// Maximum-likelihood state: minimizes likelihood() with Levenberg-Marquardt
/// over the T parameterization, so every iterate is a valid state.
///
/// The damped system uses J^T J plus the residual curvature term. Without
/// that term the steps stall when the optimum has zero eigenvalues.
///
/// Without `init` the seed is t_from_rho of the linear-inversion estimate
/// (real parts only). If the run hits max_iters, one restart from the
/// maximally mixed seed is tried and the lower-likelihood result returned.
inline FitResult fit(const ExpectationSet& data, std::optional<TParams> init = std::nullopt,
                     const FitOptions& opts = {}) {
  data.require_complete();
  TParams seed = init ? *init : t_from_rho(reconstruct_linear(data), opts.regularization);
  detail::require_matching(seed, data);
  FitResult best = detail::levenberg_marquardt(data, std::move(seed), opts);
  if (!best.converged && opts.restart_on_failure) {
    FitResult second =
        detail::levenberg_marquardt(data, TParams::maximally_mixed(data.n_qubits()), opts);
    second.restarted = true;
    second.iterations += best.iterations;
    if (second.final_likelihood <= best.final_likelihood) {
      best = std::move(second);
    } else {
      best.restarted = true;
    }
  }
  return best;
}

}  // namespace qtomo
