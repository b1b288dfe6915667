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

// Central differences of the residual vector, step h.
RealMatrix finite_difference_jacobian(const TParams& p, const ExpectationSet& data, double h) {
  RealMatrix out(data.size(), p.t.size());
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    TParams plus = p, minus = p;
    plus.t[i] += h;
    minus.t[i] -= h;
    const auto rp = likelihood(plus, data).residuals;
    const auto rm = likelihood(minus, data).residuals;
    std::size_t row = 0;
    for (const auto& [pauli, m] : data.records()) {
      out(row, i) = (rp.at(pauli) - rm.at(pauli)) / (2 * h);
      ++row;
    }
  }
  return out;
}

// Largest |analytic - numeric| / max(|numeric|, 1e-3 * max |numeric|).
double jacobian_relative_error(const RealMatrix& a, const RealMatrix& f) {
  double scale = 0.0;
  for (std::size_t r = 0; r < f.rows(); ++r)
    for (std::size_t c = 0; c < f.cols(); ++c) scale = std::max(scale, std::abs(f(r, c)));
  double worst = 0.0;
  for (std::size_t r = 0; r < f.rows(); ++r)
    for (std::size_t c = 0; c < f.cols(); ++c) {
      const double denom = std::max(std::abs(f(r, c)), 1e-3 * scale);
      worst = std::max(worst, std::abs(a(r, c) - f(r, c)) / denom);
    }
  return worst;
}

template <class Rng>
ExpectationSet random_expectations(int n, Rng& rng) {
  std::uniform_real_distribution<double> value(-1.0, 1.0), sigma(0.05, 1.0);
  ExpectationSet e(n);
  for (const auto& p : non_identity_pauli_strings(n)) e.set(p, value(rng), sigma(rng));
  return e;
}

}  // namespace

TEST(RhoFromT, DiagonalOnesGiveMaximallyMixed) {
  std::vector<double> t(16, 0.0);
  for (int k = 0; k < 4; ++k) t[static_cast<std::size_t>(k)] = 1.0;
  EXPECT_LE(max_abs_diff(rho_from_t(TParams(2, t)).matrix(),
                         DensityMatrix::maximally_mixed(2).matrix()),
            1e-15);
}

TEST(RhoFromT, FirstEntryGivesGroundState) {
  std::vector<double> t(16, 0.0);
  t[0] = 1.0;
  EXPECT_EQ(rho_from_t(TParams(2, t)).matrix(), named_state("zero").matrix());
}

TEST(RhoFromT, LayoutPlacesLowerEntries) {
  std::vector<double> t(16, 0.0);
  t[TParams::lower_offset(4, 3, 1)] = 2.0;
  t[TParams::lower_offset(4, 3, 1) + 1] = -1.0;
  const auto tm = lower_triangular(TParams(2, t));
  EXPECT_EQ(tm(3, 1), Complex(2.0, -1.0));
  EXPECT_EQ(TParams::lower_offset(4, 1, 0), 4u);
  EXPECT_EQ(TParams::lower_offset(4, 3, 2), 14u);
}

TEST(RhoFromT, AlwaysPhysical) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 1 + rep % 3;
    const auto rho = rho_from_t(random_tparams(n, rng));
    EXPECT_NEAR(rho.matrix().trace().real(), 1.0, 1e-12);
    EXPECT_GE(oracle_eigenvalues(rho.matrix()).back(), -1e-12);
  }
}

TEST(RhoFromT, SignGauge) {
  std::mt19937_64 rng(8);
  auto p = random_tparams(2, rng);
  auto q = p;
  for (double& v : q.t) v = -v;
  EXPECT_EQ(rho_from_t(p).matrix(), rho_from_t(q).matrix());
}

TEST(RhoFromT, ZeroParameters) {
  try {
    rho_from_t(TParams(1, std::vector<double>(4, 0.0)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kZeroParameters);
  }
}

TEST(TParams, ValidatesLength) {
  try {
    TParams(2, std::vector<double>(15, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
}

TEST(TFromRho, MaximallyMixed) {
  const auto p = t_from_rho(DensityMatrix::maximally_mixed(2));
  for (std::size_t k = 0; k < 16; ++k) EXPECT_NEAR(p.t[k], k < 4 ? 0.5 : 0.0, 1e-15);
}

TEST(TFromRho, RoundTripPositiveDefinite) {
  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 1000; ++rep) {
    const auto rho = random_density_matrix(2, 4, rng);
    const auto back = rho_from_t(t_from_rho(rho));
    ASSERT_LE(max_abs_diff(back.matrix(), rho.matrix()), 1e-8) << rep;
  }
  const auto rho3 = random_density_matrix(3, 8, rng);
  EXPECT_LE(max_abs_diff(rho_from_t(t_from_rho(rho3)).matrix(), rho3.matrix()), 1e-8);
}

TEST(TFromRho, IndefiniteInputGivesFiniteSeed) {
  const auto p = t_from_rho(DensityMatrix(2, reference_qst_plus_pair()));
  ASSERT_EQ(p.t.size(), 16u);
  for (double v : p.t) EXPECT_TRUE(std::isfinite(v));
  EXPECT_GT(detail::squared_norm(p.t), 0.0);
}

TEST(TFromRho, SingularInputIsRegularized) {
  // Pure states have zero pivots; the shifted retry must succeed.
  const auto p = t_from_rho(named_state("bell-phi+"));
  EXPECT_GE(fidelity(rho_from_t(p), named_state("bell-phi+")), 1 - 1e-5);
  try {
    t_from_rho(named_state("bell-phi+"), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSingularPivot);
  }
}

TEST(Likelihood, ExactMatchIsZero) {
  std::mt19937_64 rng(10);
  const auto p = random_tparams(2, rng);
  const auto data = ideal_expectations(rho_from_t(p));
  EXPECT_LE(likelihood(p, data).total, 1e-15);
}

TEST(Likelihood, HalvingSigmaQuadruples) {
  std::mt19937_64 rng(11);
  const auto p = random_tparams(2, rng);
  const auto data = random_expectations(2, rng);
  ExpectationSet half(2);
  for (const auto& [pauli, m] : data.records()) half.set(pauli, m.value, m.sigma / 2);
  EXPECT_NEAR(likelihood(p, half).total, 4 * likelihood(p, data).total, 1e-10);
}

TEST(Likelihood, SingleRecordHandValue) {
  // Diagonal T gives rho = diag(0.9, 0.1), so <Z> = 0.8.
  const auto p = TParams(1, {std::sqrt(0.9), std::sqrt(0.1), 0.0, 0.0});
  ASSERT_NEAR(pauli_trace(PauliString::parse("Z"), rho_from_t(p).matrix()).real(), 0.8, 1e-15);
  ExpectationSet e(1);
  e.set(PauliString::parse("Z"), 0.9, 0.1);
  const auto l = likelihood(p, e);
  EXPECT_NEAR(l.total, 0.5, 1e-12);
  EXPECT_NEAR(l.residuals.at(PauliString::parse("Z")), -1.0, 1e-12);
}

TEST(Likelihood, TotalMatchesResiduals) {
  std::mt19937_64 rng(12);
  const auto p = random_tparams(2, rng);
  const auto l = likelihood(p, random_expectations(2, rng));
  double sum = 0.0;
  for (const auto& [pauli, r] : l.residuals) sum += r * r / 2;
  EXPECT_NEAR(l.total, sum, 1e-12);
}

TEST(Jacobian, MatchesFiniteDifferences) {
  std::mt19937_64 rng(13);
  for (int rep = 0; rep < 100; ++rep) {
    const int n = 1 + rep % 2;
    const auto p = random_tparams(n, rng);
    const auto data = random_expectations(n, rng);
    const double err = jacobian_relative_error(jacobian(p, data), finite_difference_jacobian(p, data, 1e-6));
    EXPECT_LE(err, 1e-5) << rep;
  }
}

TEST(Jacobian, StationaryAtExactMatch) {
  std::mt19937_64 rng(14);
  const auto p = random_tparams(2, rng);
  const auto data = ideal_expectations(rho_from_t(p));
  const auto jac = jacobian(p, data);
  const auto res = likelihood(p, data).residuals;
  for (std::size_t i = 0; i < jac.cols(); ++i) {
    double g = 0.0;
    std::size_t row = 0;
    for (const auto& [pauli, m] : data.records()) g += jac(row++, i) * res.at(pauli);
    EXPECT_LE(std::abs(g), 1e-12);
  }
}

TEST(Jacobian, ZeroColumnsForRealSingleQubitPoint) {
  // n = 1: T = [[t0, 0], [t2 + i t3, t1]]. At t3 = 0, <X> and <Z> are even in
  // t3 so their t3 derivatives vanish, while <Y> = 2 t1 t3 / s is not.
  const auto p = TParams(1, {0.7, 0.4, 0.3, 0.0});
  ExpectationSet e(1);
  for (const auto& s : non_identity_pauli_strings(1)) e.set(s, 0.0, 1.0);
  const auto jac = jacobian(p, e);
  EXPECT_EQ(jac(0, 3), 0.0);                              // X
  EXPECT_NEAR(jac(1, 3), 2 * 0.4 / (0.49 + 0.16 + 0.09), 1e-15);  // Y
  EXPECT_EQ(jac(2, 3), 0.0);                              // Z
}

TEST(ResidualCurvature, MatchesFiniteDifferenceHessian) {
  // J^T J + curvature is the exact Hessian of the likelihood.
  std::mt19937_64 rng(15);
  for (int rep = 0; rep < 10; ++rep) {
    const int n = 1 + rep % 2;
    const auto p = random_tparams(n, rng);
    const auto data = random_expectations(n, rng);
    const auto jac = jacobian(p, data);
    const auto res = likelihood(p, data).residuals;
    std::vector<double> r, g(p.t.size(), 0.0);
    for (const auto& [pauli, m] : data.records()) r.push_back(res.at(pauli));
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t k = 0; k < r.size(); ++k) g[i] += jac(k, i) * r[k];
    const auto curv = detail::residual_curvature(p, data, r, g);

    auto gradient = [&](const TParams& q) {
      const auto jq = jacobian(q, data);
      const auto rq = likelihood(q, data).residuals;
      std::vector<double> out(q.t.size(), 0.0);
      std::size_t row = 0;
      for (const auto& [pauli, m] : data.records()) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += jq(row, i) * rq.at(pauli);
        ++row;
      }
      return out;
    };
    const double h = 1e-6;
    for (std::size_t j = 0; j < p.t.size(); ++j) {
      TParams plus = p, minus = p;
      plus.t[j] += h;
      minus.t[j] -= h;
      const auto gp = gradient(plus), gm = gradient(minus);
      for (std::size_t i = 0; i < p.t.size(); ++i) {
        double gn = 0.0;
        for (std::size_t k = 0; k < r.size(); ++k) gn += jac(k, i) * jac(k, j);
        const double numeric = (gp[i] - gm[i]) / (2 * h);
        EXPECT_NEAR(gn + curv(i, j), numeric, 1e-5 * std::max(1.0, std::abs(numeric)));
      }
    }
  }
}

TEST(Fit, ZeroNoiseRecoversState) {
  std::mt19937_64 rng(16);
  for (int n = 1; n <= 2; ++n)
    for (int rep = 0; rep < 20; ++rep) {
      const auto rho = random_state(n, static_cast<std::size_t>(rep), rng);
      const auto result = fit(ideal_expectations(rho));
      EXPECT_GE(fidelity(result.rho, rho), 1 - 1e-8);
      EXPECT_LE(trace_distance(result.rho, rho), 1e-6);
      EXPECT_TRUE(result.converged);
    }
}

TEST(Fit, MaximallyMixedData) {
  const auto result = fit(ideal_expectations(DensityMatrix::maximally_mixed(2)));
  EXPECT_LE(max_abs_diff(result.rho.matrix(), DensityMatrix::maximally_mixed(2).matrix()), 1e-6);
}

TEST(Fit, MatchesNearestStateOracle) {
  // Uniform sigma over a complete set: the optimum is the Frobenius-nearest
  // state to the linear estimate.
  std::mt19937_64 rng(17);
  for (int n = 1; n <= 3; ++n)
    for (int rep = 0; rep < 20; ++rep) {
      const auto rho = random_state(n, static_cast<std::size_t>(rep), rng);
      const auto data = add_noise(ideal_expectations(rho), {0.05, static_cast<std::uint64_t>(rep)});
      const auto result = fit(data);
      const auto oracle = DensityMatrix(n, nearest_state(reconstruct_linear(data).matrix()));
      EXPECT_LE(trace_distance(result.rho, oracle), 1e-6) << n << " " << rep;
      EXPECT_TRUE(result.converged);
      EXPECT_FALSE(result.did_not_converge);
      EXPECT_GE(check_physical(result.rho, 1e-12).min_eigenvalue, -1e-12);
    }
}

TEST(Fit, ReferenceLinearEstimateData) {
  // The fit of data read off the indefinite reference estimate is its
  // nearest state.
  const auto q = DensityMatrix(2, reference_qst_plus_pair());
  const auto result = fit(expectations_of(q));
  const auto oracle = DensityMatrix(2, nearest_state(q.matrix()));
  EXPECT_TRUE(check_physical(result.rho).physical);
  EXPECT_LE(trace_distance(result.rho, oracle), 1e-6);
  EXPECT_NEAR(fidelity(named_state("plus-pair"), result.rho),
              fidelity(named_state("plus-pair"), oracle), 1e-6);
}

TEST(Fit, LikelihoodNonIncreasingAndIteratesPhysical) {
  const auto data = add_noise(ideal_expectations(named_state("w3", 3)), {0.03, 3});
  FitOptions opts;
  std::vector<double> trace;
  double worst = 0.0;
  opts.observer = [&](const TParams& p, double l) {
    trace.push_back(l);
    worst = std::min(worst, oracle_eigenvalues(rho_from_t(p).matrix()).back());
  };
  const auto result = fit(data, std::nullopt, opts);
  ASSERT_GE(trace.size(), 2u);
  for (std::size_t k = 1; k < trace.size(); ++k) EXPECT_LE(trace[k], trace[k - 1]);
  EXPECT_GE(worst, -1e-12);
  EXPECT_EQ(trace.back(), result.final_likelihood);
  EXPECT_TRUE(result.converged);
  EXPECT_GE(fidelity(named_state("w3", 3), result.rho), 0.95);
}

TEST(Fit, ExplicitInitAndMaxIters) {
  const auto data = add_noise(ideal_expectations(named_state("bell-phi+")), {0.05, 1});
  FitOptions opts;
  opts.max_iters = 1;
  opts.restart_on_failure = false;
  const auto result = fit(data, TParams::maximally_mixed(2), opts);
  EXPECT_FALSE(result.converged);
  EXPECT_EQ(result.termination, Termination::kMaxIters);
  EXPECT_TRUE(result.did_not_converge);
  EXPECT_FALSE(result.restarted);

  opts.restart_on_failure = true;
  const auto again = fit(data, TParams::maximally_mixed(2), opts);
  EXPECT_TRUE(again.restarted);
  EXPECT_EQ(again.iterations, 2);
}

TEST(Fit, RequiresCompleteData) {
  ExpectationSet e(1);
  e.set(PauliString::parse("Z"), 1.0, 1.0);
  try {
    fit(e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::kIncompleteSet);
  }
}

TEST(Fit, DeterministicAcrossCalls) {
  const auto data = add_noise(ideal_expectations(named_state("bell-psi+")), {0.05, 5});
  const auto a = fit(data);
  const auto b = fit(data);
  EXPECT_EQ(a.rho.matrix(), b.rho.matrix());
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Termination, Names) {
  EXPECT_EQ(to_string(Termination::kGradientTol), "gradient_tol");
  EXPECT_EQ(to_string(Termination::kStepTol), "step_tol");
  EXPECT_EQ(to_string(Termination::kMaxIters), "max_iters");
}
