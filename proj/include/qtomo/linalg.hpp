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
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qtomo/error.hpp"

namespace qtomo {

using Complex = std::complex<double>;

/// Dense square complex matrix, row-major.
class ComplexMatrix {
 public:
  ComplexMatrix() : ComplexMatrix(1) {}

  explicit ComplexMatrix(std::size_t dim) : dim_(dim), data_(dim * dim) {
    if (dim == 0) {
      throw Error(ErrorCode::kDimensionMismatch, "matrix dimension must be >= 1");
    }
  }

  ComplexMatrix(std::size_t dim, std::vector<Complex> data)
      : dim_(dim), data_(std::move(data)) {
    if (dim == 0 || data_.size() != dim * dim) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "expected " + std::to_string(dim * dim) + " entries, got " +
                      std::to_string(data_.size()));
    }
  }

  /// Row-by-row construction; every row must have the same length as the
  /// number of rows.
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
      : dim_(rows.size()) {
    if (dim_ == 0) {
      throw Error(ErrorCode::kDimensionMismatch, "empty matrix literal");
    }
    data_.reserve(dim_ * dim_);
    for (const auto& row : rows) {
      if (row.size() != dim_) {
        throw Error(ErrorCode::kDimensionMismatch, "matrix literal is not square");
      }
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static ComplexMatrix identity(std::size_t dim) {
    ComplexMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  static ComplexMatrix diagonal(std::span<const double> values) {
    ComplexMatrix m(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
  }

  /// |psi><psi| for a state vector.
  static ComplexMatrix projector(std::span<const Complex> psi) {
    ComplexMatrix m(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i)
      for (std::size_t j = 0; j < psi.size(); ++j) m(i, j) = psi[i] * std::conj(psi[j]);
    return m;
  }

  std::size_t dim() const noexcept { return dim_; }

  Complex& operator()(std::size_t row, std::size_t col) { return data_[row * dim_ + col]; }
  const Complex& operator()(std::size_t row, std::size_t col) const {
    return data_[row * dim_ + col];
  }

  std::span<const Complex> data() const noexcept { return data_; }
  std::span<Complex> data() noexcept { return data_; }

  Complex trace() const {
    Complex t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  ComplexMatrix adjoint() const {
    ComplexMatrix out(dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) out(j, i) = std::conj((*this)(i, j));
    return out;
  }

  ComplexMatrix& operator+=(const ComplexMatrix& other) {
    require_same_dim(other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
    return *this;
  }

  ComplexMatrix& operator-=(const ComplexMatrix& other) {
    require_same_dim(other);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
    return *this;
  }

  ComplexMatrix& operator*=(Complex scale) {
    for (auto& v : data_) v *= scale;
    return *this;
  }

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }

  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
    a.require_same_dim(b);
    const std::size_t n = a.dim_;
    ComplexMatrix out(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) {
        const Complex aik = a(i, k);
        if (aik == Complex{}) continue;
        for (std::size_t j = 0; j < n; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  friend bool operator==(const ComplexMatrix&, const ComplexMatrix&) = default;

 private:
  void require_same_dim(const ComplexMatrix& other) const {
    if (other.dim_ != dim_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  std::to_string(dim_) + " vs " + std::to_string(other.dim_));
    }
  }

  std::size_t dim_;
  std::vector<Complex> data_;
};

/// Dense real matrix with arbitrary shape, row-major. Used for Jacobians and
/// normal equations.
class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Largest entrywise |a - b|.
inline double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "max_abs_diff on unequal dimensions");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k)
    worst = std::max(worst, std::abs(a.data()[k] - b.data()[k]));
  return worst;
}

/// Largest entrywise |m - m^dagger|.
inline double hermiticity_defect(const ComplexMatrix& m) {
  double worst = 0.0;
  for (std::size_t i = 0; i < m.dim(); ++i)
    for (std::size_t j = i; j < m.dim(); ++j)
      worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
  return worst;
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  const std::size_t na = a.dim();
  const std::size_t nb = b.dim();
  ComplexMatrix out(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < na; ++j) {
      const Complex aij = a(i, j);
      for (std::size_t k = 0; k < nb; ++k)
        for (std::size_t l = 0; l < nb; ++l) out(i * nb + k, j * nb + l) = aij * b(k, l);
    }
  return out;
}

/// Tr(a b) in O(dim^2) without forming the product.
inline Complex trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "trace_product on unequal dimensions");
  }
  Complex t = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i)
    for (std::size_t j = 0; j < a.dim(); ++j) t += a(i, j) * b(j, i);
  return t;
}

/// Transposes the indices of one qubit. Qubit 0 is the most significant bit
/// of the basis index.
inline ComplexMatrix partial_transpose(const ComplexMatrix& rho, int n_qubits, int subsystem) {
  if (n_qubits < 1 || n_qubits > 30 || rho.dim() != (std::size_t{1} << n_qubits)) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dimension " + std::to_string(rho.dim()) + " is not 2^" +
                    std::to_string(n_qubits));
  }
  if (subsystem < 0 || subsystem >= n_qubits) {
    throw Error(ErrorCode::kDimensionMismatch, "subsystem index out of range");
  }
  const std::size_t bit = std::size_t{1} << (n_qubits - 1 - subsystem);
  ComplexMatrix out(rho.dim());
  for (std::size_t r = 0; r < rho.dim(); ++r)
    for (std::size_t c = 0; c < rho.dim(); ++c) {
      const std::size_t r2 = (r & ~bit) | (c & bit);
      const std::size_t c2 = (c & ~bit) | (r & bit);
      out(r2, c2) = rho(r, c);
    }
  return out;
}

/// Eigenvalues sorted descending; column k of `vectors` belongs to `values[k]`.
struct Spectrum {
  std::vector<double> values;
  ComplexMatrix vectors;
};

namespace detail {

// Implicit QL on a real symmetric tridiagonal matrix (diag, offdiag[i] couples
// i and i+1). The plane rotations are accumulated into the columns of z.
inline void tridiagonal_ql(std::vector<double>& diag, std::vector<double>& offdiag,
                           ComplexMatrix& z) {
  const std::size_t n = diag.size();
  if (n == 1) return;
  offdiag.resize(n, 0.0);
  offdiag[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  const std::size_t max_sweeps = 60 * n;
  double shift = 0.0;
  double tst1 = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(diag[l]) + std::abs(offdiag[l]));
    std::size_t m = l;
    while (m < n - 1 && std::abs(offdiag[m]) > eps * tst1) ++m;
    if (m > l) {
      std::size_t sweeps = 0;
      do {
        if (++sweeps > max_sweeps) {
          throw Error(ErrorCode::kNoConvergence, "tridiagonal QL failed to converge");
        }
        double g = diag[l];
        double p = (diag[l + 1] - g) / (2.0 * offdiag[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        diag[l] = offdiag[l] / (p + r);
        diag[l + 1] = offdiag[l] * (p + r);
        const double dl1 = diag[l + 1];
        double h = g - diag[l];
        for (std::size_t i = l + 2; i < n; ++i) diag[i] -= h;
        shift += h;

        p = diag[m];
        double c = 1.0, c2 = 1.0, c3 = 1.0;
        const double el1 = offdiag[l + 1];
        double s = 0.0, s2 = 0.0;
        for (std::size_t ii = m; ii-- > l;) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * offdiag[ii];
          h = c * p;
          r = std::hypot(p, offdiag[ii]);
          offdiag[ii + 1] = s * r;
          s = offdiag[ii] / r;
          c = p / r;
          p = c * diag[ii] - s * g;
          diag[ii + 1] = h + s * (c * g + s * diag[ii]);
          for (std::size_t k = 0; k < n; ++k) {
            const Complex zk1 = z(k, ii + 1);
            z(k, ii + 1) = s * z(k, ii) + c * zk1;
            z(k, ii) = c * z(k, ii) - s * zk1;
          }
        }
        p = -s * s2 * c3 * el1 * offdiag[l] / dl1;
        offdiag[l] = s * p;
        diag[l] = c * p;
      } while (std::abs(offdiag[l]) > eps * tst1);
    }
    diag[l] += shift;
    offdiag[l] = 0.0;
  }
}

}  // namespace detail

/// Eigendecomposition of a Hermitian matrix.
///
/// Householder reflections bring the matrix to Hermitian tridiagonal form, a
/// diagonal phase transform makes the off-diagonal real, and implicit QL
/// finishes the job. Eigenvalues come back sorted descending; exactly equal
/// eigenvalues are ordered by their eigenvectors, lexicographically (real,
/// then imaginary part). Each eigenvector is phase-fixed so its largest-magnitude
/// component is real and positive.
inline Spectrum hermitian_eig(const ComplexMatrix& m, double hermitian_tol = 1e-8) {
  const double defect = hermiticity_defect(m);
  if (defect > hermitian_tol) {
    throw Error(ErrorCode::kNotHermitian,
                "max |m - m^dagger| = " + std::to_string(defect));
  }
  const std::size_t n = m.dim();
  ComplexMatrix a = m;
  for (std::size_t i = 0; i < n; ++i) {
    a(i, i) = a(i, i).real();
    for (std::size_t j = i + 1; j < n; ++j) {
      const Complex avg = 0.5 * (a(i, j) + std::conj(a(j, i)));
      a(i, j) = avg;
      a(j, i) = std::conj(avg);
    }
  }
  ComplexMatrix q = ComplexMatrix::identity(n);

  std::vector<Complex> v(n), w(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    double tail = 0.0;
    for (std::size_t i = k + 2; i < n; ++i) tail += std::norm(a(i, k));
    if (tail == 0.0) continue;
    const Complex x0 = a(k + 1, k);
    const double xnorm = std::sqrt(tail + std::norm(x0));
    const Complex phase = std::abs(x0) > 0.0 ? x0 / std::abs(x0) : Complex{1.0};
    const Complex alpha = -phase * xnorm;

    std::fill(v.begin(), v.end(), Complex{});
    v[k + 1] = x0 - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
    double vnorm = 0.0;
    for (std::size_t i = k + 1; i < n; ++i) vnorm += std::norm(v[i]);
    vnorm = std::sqrt(vnorm);
    for (std::size_t i = k + 1; i < n; ++i) v[i] /= vnorm;

    // a <- H a H with H = I - 2 v v^dagger.
    for (std::size_t j = 0; j < n; ++j) {
      Complex dot = 0.0;
      for (std::size_t i = k + 1; i < n; ++i) dot += std::conj(v[i]) * a(i, j);
      for (std::size_t i = k + 1; i < n; ++i) a(i, j) -= 2.0 * v[i] * dot;
    }
    for (std::size_t i = 0; i < n; ++i) {
      Complex dot = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) dot += a(i, j) * v[j];
      for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= 2.0 * dot * std::conj(v[j]);
    }
    for (std::size_t i = 0; i < n; ++i) {
      Complex dot = 0.0;
      for (std::size_t j = k + 1; j < n; ++j) dot += q(i, j) * v[j];
      for (std::size_t j = k + 1; j < n; ++j) q(i, j) -= 2.0 * dot * std::conj(v[j]);
    }
  }

  std::vector<double> diag(n), offdiag(n, 0.0);
  std::vector<Complex> phases(n, Complex{1.0});
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i).real();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const Complex e = a(i + 1, i);
    const double mag = std::abs(e);
    offdiag[i] = mag;
    phases[i + 1] = mag > 0.0 ? phases[i] * e / mag : phases[i];
  }
  ComplexMatrix z(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) z(i, j) = q(i, j) * phases[j];

  detail::tridiagonal_ql(diag, offdiag, z);

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t best = 0;
    double best_mag = -1.0;
    for (std::size_t row = 0; row < n; ++row) {
      const double mag = std::abs(z(row, col));
      if (mag > best_mag + 1e-12) {
        best_mag = mag;
        best = row;
      }
    }
    const Complex fix = std::conj(z(best, col)) / std::abs(z(best, col));
    for (std::size_t row = 0; row < n; ++row) z(row, col) *= fix;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return diag[x] > diag[y]; });
  auto lex_greater = [&](std::size_t x, std::size_t y) {
    for (std::size_t row = 0; row < n; ++row) {
      const Complex zx = z(row, x), zy = z(row, y);
      if (zx.real() != zy.real()) return zx.real() > zy.real();
      if (zx.imag() != zy.imag()) return zx.imag() > zy.imag();
    }
    return false;
  };
  for (std::size_t start = 0; start < n;) {
    std::size_t end = start + 1;
    while (end < n && diag[order[end - 1]] == diag[order[end]]) ++end;
    std::stable_sort(order.begin() + static_cast<std::ptrdiff_t>(start),
                     order.begin() + static_cast<std::ptrdiff_t>(end), lex_greater);
    start = end;
  }

  Spectrum out{std::vector<double>(n), ComplexMatrix(n)};
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = diag[order[k]];
    for (std::size_t row = 0; row < n; ++row) out.vectors(row, k) = z(row, order[k]);
  }
  return out;
}

/// V diag(values) V^dagger.
inline ComplexMatrix reconstruct(const Spectrum& s) {
  const std::size_t n = s.values.size();
  ComplexMatrix out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < n; ++k)
        acc += s.vectors(i, k) * s.values[k] * std::conj(s.vectors(j, k));
      out(i, j) = acc;
    }
  return out;
}

/// Solves (a + damping * I) x = b for symmetric positive-definite a via
/// Cholesky. Returns false when the factorization breaks down.
inline bool solve_spd(const RealMatrix& a, double damping, std::span<const double> b,
                      std::vector<double>& x) {
  const std::size_t n = a.rows();
  std::vector<double> l(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j) + damping;
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    l[j * n + j] = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / ljj;
    }
  }
  x.assign(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * x[k];
    x[i] = s / l[i * n + i];
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * x[k];
    x[i] = s / l[i * n + i];
  }
  return true;
}

}  // namespace qtomo
