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

// qtomo: simulate Pauli expectation data, reconstruct states by linear
// inversion or maximum likelihood, score them, and run decay studies.
//
// Exit codes: 0 success, 2 invalid input, 3 optimizer did not converge.

#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#if __has_include(<CLI/CLI.hpp>)
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif
#include <nlohmann/json.hpp>

#include "qtomo/qtomo.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalidInput = 2;
constexpr int kExitNoConvergence = 3;

using qtomo::io::Metadata;
using Json = nlohmann::ordered_json;

struct OptimizerFlags {
  double gtol = 1e-10;
  double xtol = 1e-12;
  int max_iters = 2000;
  double regularization = 1e-6;

  qtomo::FitOptions to_options() const {
    qtomo::FitOptions o;
    o.gtol = gtol;
    o.xtol = xtol;
    o.max_iters = max_iters;
    o.regularization = regularization;
    return o;
  }

  void add_to(CLI::App* cmd) {
    cmd->add_option("--gtol", gtol, "Gradient tolerance (max |J^T r|)")->capture_default_str();
    cmd->add_option("--xtol", xtol, "Relative step tolerance")->capture_default_str();
    cmd->add_option("--max-iters", max_iters, "Iteration cap")->capture_default_str();
    cmd->add_option("--regularization", regularization,
                    "Diagonal shift used when seeding from a singular estimate")
        ->capture_default_str();
  }

  void describe(Metadata& md) const {
    md.emplace_back("gtol", qtomo::io::format_double(gtol));
    md.emplace_back("xtol", qtomo::io::format_double(xtol));
    md.emplace_back("max_iters", std::to_string(max_iters));
    md.emplace_back("regularization", qtomo::io::format_double(regularization));
  }
};

qtomo::ChannelKind parse_channel(const std::string& name) {
  if (name == "dephasing") return qtomo::ChannelKind::kDephasing;
  if (name == "depolarizing") return qtomo::ChannelKind::kDepolarizing;
  throw qtomo::Error(qtomo::ErrorCode::kParseError, "unknown channel '" + name + "'");
}

/// Named state or path to a matrix file (trace-normalized on load).
qtomo::DensityMatrix resolve_state(const std::string& spec, int n_qubits) {
  if (qtomo::is_named_state(spec)) return qtomo::named_state(spec, n_qubits);
  const auto file = qtomo::io::parse_matrix(qtomo::io::read_file(spec));
  return qtomo::DensityMatrix::normalized(file.matrix);
}

Json metadata_json(const Metadata& md) {
  Json j = Json::object();
  for (const auto& [k, v] : md) j[k] = v;
  return j;
}

void emit(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
  } else {
    qtomo::io::write_file(path, contents);
  }
}

// --------------------------------------------------------------------------

struct SimulateArgs {
  std::string state = "zero";
  std::string matrix;
  int qubits = 2;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string channel;
  double rate = 0.0;
  double duration = 0.0;
  std::string pulses;
  bool allow_unphysical = false;
  std::string out;
};

int run_simulate(const SimulateArgs& a) {
  const std::string state_spec = a.matrix.empty() ? a.state : a.matrix;
  qtomo::DensityMatrix rho = resolve_state(state_spec, a.qubits);
  const bool physical = qtomo::check_physical(rho).physical;
  if (!a.channel.empty()) {
    rho = qtomo::evolve(rho, {parse_channel(a.channel), a.rate, a.duration});
  }

  qtomo::ExpectationSet data(rho.n_qubits());
  if (!a.pulses.empty()) {
    std::vector<qtomo::ReadoutPulse> pulses;
    for (auto label : qtomo::io::split(a.pulses, ',')) pulses.push_back(qtomo::parse_pulse(label));
    data = qtomo::pulsed_expectations(rho, pulses);
  } else if (physical) {
    data = qtomo::ideal_expectations(rho);
  } else if (a.allow_unphysical) {
    data = qtomo::expectations_of(rho);
  } else {
    throw qtomo::Error(qtomo::ErrorCode::kNotPhysicalState,
                       "state has negative eigenvalues; pass --allow-unphysical to read its "
                       "expectations anyway");
  }
  if (a.sigma > 0.0) data = qtomo::add_noise(data, {a.sigma, a.seed});

  qtomo::io::ExpectationFile f;
  f.data = std::move(data);
  f.metadata = {{"command", "simulate"},
                {"state", state_spec},
                {"seed", std::to_string(a.seed)},
                {"noise_sigma", qtomo::io::format_double(a.sigma)},
                {"noise_rng", qtomo::kNoiseAlgorithm}};
  if (!a.channel.empty()) {
    f.metadata.emplace_back("channel", a.channel);
    f.metadata.emplace_back("rate", qtomo::io::format_double(a.rate));
    f.metadata.emplace_back("duration", qtomo::io::format_double(a.duration));
  }
  if (!a.pulses.empty()) f.metadata.emplace_back("pulses", a.pulses);
  emit(a.out, qtomo::io::format_expectations(f));
  return kExitOk;
}

// --------------------------------------------------------------------------

struct ReconstructArgs {
  std::string input;
  std::string method = "mle";
  std::string target;
  OptimizerFlags optimizer;
  std::string out;
  std::string report;
};

int run_reconstruct(const ReconstructArgs& a) {
  const auto file = qtomo::io::parse_expectations(qtomo::io::read_file(a.input));
  file.data.require_complete();

  Metadata config{{"command", "reconstruct"}, {"input", a.input}, {"method", a.method}};
  for (const auto& [k, v] : file.metadata)
    if (k == "seed" || k == "noise_sigma" || k == "state") config.emplace_back("input_" + k, v);
  if (!a.target.empty()) config.emplace_back("target", a.target);

  std::optional<qtomo::FitResult> fit;
  std::optional<qtomo::DensityMatrix> rho;
  if (a.method == "qst") {
    rho = qtomo::reconstruct_linear(file.data);
  } else if (a.method == "mle") {
    a.optimizer.describe(config);
    fit = qtomo::fit(file.data, std::nullopt, a.optimizer.to_options());
    rho = fit->rho;
  } else {
    throw qtomo::Error(qtomo::ErrorCode::kParseError, "method must be qst or mle");
  }

  std::optional<qtomo::DensityMatrix> target;
  if (!a.target.empty()) target = resolve_state(a.target, file.n_qubits());
  const auto rep = qtomo::report(*rho, target);

  Json j;
  j["config"] = metadata_json(config);
  j["report"] = qtomo::io::report_json(rep);
  if (fit) {
    Json opt;
    opt["iterations"] = fit->iterations;
    opt["converged"] = fit->converged;
    opt["termination"] = std::string(qtomo::to_string(fit->termination));
    opt["final_likelihood"] = qtomo::io::round12(fit->final_likelihood);
    opt["gradient_max"] = qtomo::io::round12(fit->gradient_max);
    opt["restarted"] = fit->restarted;
    j["optimizer"] = std::move(opt);
  }

  if (!a.out.empty()) qtomo::io::write_file(a.out, qtomo::io::format_matrix({config, rho->matrix()}));
  emit(a.report, j.dump(2) + "\n");

  if (fit && fit->did_not_converge) {
    std::cerr << "qtomo: DidNotConverge: max_iters reached with gradient "
              << fit->gradient_max << "\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

// --------------------------------------------------------------------------

struct MetricsArgs {
  std::string input;
  std::string target;
  bool normalize = false;
  std::string out;
};

int run_metrics(const MetricsArgs& a) {
  const auto file = qtomo::io::parse_matrix(qtomo::io::read_file(a.input));
  const qtomo::DensityMatrix rho =
      a.normalize ? qtomo::DensityMatrix::normalized(file.matrix)
                  : qtomo::DensityMatrix(qtomo::DensityMatrix::qubits_for_dim(file.matrix.dim()),
                                         file.matrix);
  std::optional<qtomo::DensityMatrix> target;
  if (!a.target.empty()) target = resolve_state(a.target, rho.n_qubits());

  Metadata config{{"command", "metrics"}, {"input", a.input}};
  for (const auto& [k, v] : file.metadata)
    if (k == "input_seed" || k == "seed") config.emplace_back("input_seed", v);
  if (!a.target.empty()) config.emplace_back("target", a.target);
  config.emplace_back("normalize", a.normalize ? "true" : "false");

  Json j;
  j["config"] = metadata_json(config);
  j["report"] = qtomo::io::report_json(qtomo::report(rho, target));
  emit(a.out, j.dump(2) + "\n");
  return kExitOk;
}

// --------------------------------------------------------------------------

struct DecayArgs {
  std::string state = "bell-phi+";
  std::string channel = "dephasing";
  double rate = 5.0;
  std::string times = "0:0.04:0.16";
  double sigma = 0.05;
  std::uint64_t seed = 1;
  std::size_t trials = 1;
  unsigned threads = 0;
  OptimizerFlags optimizer;
  std::string out;
};

int run_decay(const DecayArgs& a) {
  qtomo::DecayConfig cfg;
  cfg.state = resolve_state(a.state, 2);
  cfg.channel = parse_channel(a.channel);
  cfg.rate = a.rate;
  cfg.times = qtomo::io::parse_time_grid(a.times);
  cfg.sigma = a.sigma;
  cfg.seed = a.seed;
  cfg.trials = a.trials;
  cfg.threads = a.threads;
  cfg.fit = a.optimizer.to_options();

  const auto points = qtomo::run_decay(cfg);

  Metadata md{{"command", "decay"},
              {"state", a.state},
              {"channel", a.channel},
              {"rate", qtomo::io::format_double(a.rate)},
              {"times", a.times},
              {"noise_sigma", qtomo::io::format_double(a.sigma)},
              {"seed", std::to_string(a.seed)},
              {"trials", std::to_string(a.trials)},
              {"noise_rng", qtomo::kNoiseAlgorithm}};
  a.optimizer.describe(md);
  emit(a.out, qtomo::format_decay_csv(points, md));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qtomo: density-matrix reconstruction from Pauli expectation data"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* cmd_sim = app.add_subcommand("simulate", "Write an expectation file for a target state");
  cmd_sim->add_option("--state", sim.state, "zero, plus-pair, bell-psi+, bell-phi+, w3, or a matrix file")
      ->capture_default_str();
  cmd_sim->add_option("--matrix", sim.matrix, "Matrix file to use as the state");
  cmd_sim->add_option("--qubits", sim.qubits, "Qubit count for --state zero")->capture_default_str();
  cmd_sim->add_option("--sigma", sim.sigma, "Gaussian noise std-dev (0 = exact)")->capture_default_str();
  cmd_sim->add_option("--seed", sim.seed, "Noise seed")->capture_default_str();
  cmd_sim->add_option("--channel", sim.channel, "dephasing or depolarizing");
  cmd_sim->add_option("--rate", sim.rate, "Channel rate (1/s)");
  cmd_sim->add_option("--duration", sim.duration, "Evolution time (s)");
  cmd_sim->add_option("--pulses", sim.pulses, "Readout settings, e.g. II,IX,IY,XX");
  cmd_sim->add_flag("--allow-unphysical", sim.allow_unphysical,
                    "Read expectations off a matrix with negative eigenvalues");
  cmd_sim->add_option("--out", sim.out, "Output path (default stdout)");

  ReconstructArgs rec;
  auto* cmd_rec = app.add_subcommand("reconstruct", "Reconstruct a state from an expectation file");
  cmd_rec->add_option("input", rec.input, "Expectation file")->required();
  cmd_rec->add_option("--method", rec.method, "qst or mle")->capture_default_str();
  cmd_rec->add_option("--target", rec.target, "Named state or matrix file for fidelity");
  rec.optimizer.add_to(cmd_rec);
  cmd_rec->add_option("--out", rec.out, "Matrix output path");
  cmd_rec->add_option("--report", rec.report, "JSON report path (default stdout)");

  MetricsArgs met;
  auto* cmd_met = app.add_subcommand("metrics", "Score a matrix file");
  cmd_met->add_option("input", met.input, "Matrix file")->required();
  cmd_met->add_option("--target", met.target, "Named state or matrix file for fidelity");
  cmd_met->add_flag("--normalize", met.normalize, "Divide by the trace before scoring");
  cmd_met->add_option("--out", met.out, "JSON report path (default stdout)");

  DecayArgs dec;
  auto* cmd_dec = app.add_subcommand("decay", "Entanglement decay study, CSV output");
  cmd_dec->add_option("--state", dec.state, "Two-qubit state")->capture_default_str();
  cmd_dec->add_option("--channel", dec.channel, "dephasing or depolarizing")->capture_default_str();
  cmd_dec->add_option("--rate", dec.rate, "Channel rate (1/s)")->capture_default_str();
  cmd_dec->add_option("--times", dec.times, "start:step:stop or comma list (s)")->capture_default_str();
  cmd_dec->add_option("--sigma", dec.sigma, "Noise std-dev (0 = exact)")->capture_default_str();
  cmd_dec->add_option("--seed", dec.seed, "Base seed")->capture_default_str();
  cmd_dec->add_option("--trials", dec.trials, "Noisy repetitions per time point")->capture_default_str();
  cmd_dec->add_option("--threads", dec.threads, "Worker threads (0 = all cores)")->capture_default_str();
  dec.optimizer.add_to(cmd_dec);
  cmd_dec->add_option("--out", dec.out, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }

  try {
    if (cmd_sim->parsed()) return run_simulate(sim);
    if (cmd_rec->parsed()) return run_reconstruct(rec);
    if (cmd_met->parsed()) return run_metrics(met);
    if (cmd_dec->parsed()) return run_decay(dec);
  } catch (const qtomo::Error& e) {
    std::cerr << "qtomo: " << e.what() << "\n";
    return e.code() == qtomo::ErrorCode::kNoConvergence ? kExitNoConvergence : kExitInvalidInput;
  }
  return kExitInvalidInput;
}
