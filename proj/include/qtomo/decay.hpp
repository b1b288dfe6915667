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
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "qtomo/density_matrix.hpp"
#include "qtomo/io.hpp"
#include "qtomo/metrics.hpp"
#include "qtomo/mle.hpp"
#include "qtomo/qst.hpp"
#include "qtomo/sim.hpp"

namespace qtomo {

/// SplitMix64 finalizer; turns (seed, counter) into independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Noise seed for trial `trial` at time index `time_index`.
constexpr std::uint64_t trial_seed(std::uint64_t seed, std::size_t time_index, std::size_t trial) {
  return splitmix64(splitmix64(seed ^ splitmix64(time_index)) + trial);
}

struct DecayConfig {
  DensityMatrix state = DensityMatrix::maximally_mixed(2);
  ChannelKind channel = ChannelKind::kDephasing;
  double rate = 5.0;
  std::vector<double> times{0.0, 0.04, 0.08, 0.12, 0.16};
  double sigma = 0.05;  // 0 disables noise
  std::uint64_t seed = 1;
  std::size_t trials = 1;
  FitOptions fit;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct DecaySample {
  double eta_qst = 0.0;
  double eta_mle = 0.0;
  double min_eig_qst = 0.0;
  double min_eig_mle = 0.0;
  bool mle_converged = true;
};

struct DecayPoint {
  double time = 0.0;
  double eta_qst = 0.0;  // means over trials
  double eta_mle = 0.0;
  double min_eig_qst = 0.0;
  double min_eig_mle = 0.0;
  std::vector<DecaySample> samples;

  double fraction_qst_negative() const {
    if (samples.empty()) return 0.0;
    const auto neg = std::count_if(samples.begin(), samples.end(),
                                   [](const DecaySample& s) { return s.min_eig_qst < 0.0; });
    return static_cast<double>(neg) / static_cast<double>(samples.size());
  }
};

inline DecaySample decay_trial(const DensityMatrix& evolved, double sigma, std::uint64_t seed,
                               const FitOptions& fit_opts) {
  ExpectationSet data = ideal_expectations(evolved);
  if (sigma > 0.0) data = add_noise(data, NoiseSpec{sigma, seed});
  const DensityMatrix qst = reconstruct_linear(data);
  const FitResult mle = fit(data, std::nullopt, fit_opts);
  DecaySample s;
  s.eta_qst = entanglement_eta(qst);
  s.eta_mle = entanglement_eta(mle.rho);
  s.min_eig_qst = check_physical(qst).min_eigenvalue;
  s.min_eig_mle = check_physical(mle.rho).min_eigenvalue;
  s.mle_converged = mle.converged;
  return s;
}

/// Evolve, add noise, reconstruct with both methods and score eta, for each
/// time point and trial. Output depends only on the config, not on the
/// thread count.
inline std::vector<DecayPoint> run_decay(const DecayConfig& cfg) {
  if (cfg.state.n_qubits() != 2) {
    throw Error(ErrorCode::kUnsupportedDimension, "decay study needs a two-qubit state");
  }
  if (cfg.trials == 0) throw Error(ErrorCode::kInvalidRecord, "trials must be >= 1");
  if (!(cfg.sigma >= 0.0)) throw Error(ErrorCode::kZeroSigma, "sigma must be >= 0");

  std::vector<DensityMatrix> evolved;
  for (double t : cfg.times) evolved.push_back(evolve(cfg.state, {cfg.channel, cfg.rate, t}));

  std::vector<DecayPoint> points(cfg.times.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    points[i].time = cfg.times[i];
    points[i].samples.resize(cfg.trials);
  }

  const std::size_t jobs = cfg.times.size() * cfg.trials;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      const std::size_t ti = job / cfg.trials;
      const std::size_t k = job % cfg.trials;
      try {
        points[ti].samples[k] =
            decay_trial(evolved[ti], cfg.sigma, trial_seed(cfg.seed, ti, k), cfg.fit);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  unsigned n_threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, jobs));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < n_threads; ++w) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& p : points) {
    for (const auto& s : p.samples) {
      p.eta_qst += s.eta_qst;
      p.eta_mle += s.eta_mle;
      p.min_eig_qst += s.min_eig_qst;
      p.min_eig_mle += s.min_eig_mle;
    }
    const double n = static_cast<double>(p.samples.size());
    p.eta_qst /= n;
    p.eta_mle /= n;
    p.min_eig_qst /= n;
    p.min_eig_mle /= n;
  }
  return points;
}

/// CSV with columns time,eta_qst,eta_mle,min_eig_qst,min_eig_mle (trial
/// means), preceded by '#' lines carrying the metadata.
inline std::string format_decay_csv(const std::vector<DecayPoint>& points,
                                    const io::Metadata& metadata) {
  std::string out;
  for (const auto& [k, v] : metadata) out += "# " + k + "=" + v + "\n";
  out += "time,eta_qst,eta_mle,min_eig_qst,min_eig_mle\n";
  for (const auto& p : points) {
    out += io::format_double(p.time) + "," + io::format_double(p.eta_qst) + "," +
           io::format_double(p.eta_mle) + "," + io::format_double(p.min_eig_qst) + "," +
           io::format_double(p.min_eig_mle) + "\n";
  }
  return out;
}

}  // namespace qtomo
