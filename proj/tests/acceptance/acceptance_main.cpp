// Acceptance gate for the full stack: eight end-to-end checks, one
// [PASS]/[FAIL] line each. The exit code is the number of failures.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "risfd/beamforming.hpp"
#include "risfd/channel.hpp"
#include "risfd/complexity.hpp"
#include "risfd/config.hpp"
#include "risfd/ddpg.hpp"
#include "risfd/errors.hpp"
#include "risfd/harness.hpp"
#include "risfd/hash.hpp"
#include "risfd/neural.hpp"
#include "risfd/rng.hpp"
#include "risfd/sigmodel.hpp"
#include "risfd/stats.hpp"

using namespace risfd;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, const char* spec = "%.3g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

// ---------------------------------------------------------------- 1 --
// Analytic gradients vs central finite differences, every layer kind
// in both network roles.

double rel_error(double fd, double an) {
  const double scale = std::max({std::abs(fd), std::abs(an), 1e-3});
  return std::abs(fd - an) / scale;
}

double relu_margin(const nn::NetworkSpec& spec, const nn::ForwardCache& cache) {
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    if (spec.layers[i].act != nn::Activation::ReLU) continue;
    if (cache.pre[i].size() == 0) continue;
    margin = std::min(margin, cache.pre[i].cwiseAbs().minCoeff());
  }
  return margin;
}

Outcome criterion_gradients() {
  Rng rng = make_rng(0xACC1);
  std::normal_distribution<double> normal(0.0, 1.0);
  const nn::Hyper hyper;
  int cases = 0;
  double worst = 0.0;

  for (int i = 0; i < 220; ++i) {
    nn::NetworkSpec spec;
    switch (i % 4) {
      case 0: spec = nn::actor_spec(4 + i % 5, hyper); break;
      case 1: spec = nn::critic_spec(2 + i % 4, hyper); break;
      case 2: spec = nn::dense_actor_spec(2 + i % 4, {6}); break;
      default: spec = nn::dense_critic_spec(2 + i % 4, {5, 4}); break;
    }
    const nn::ParameterSet params = nn::init_parameters(spec, rng);

    // Keep ReLU pre-activations away from the kink so the central
    // difference sees a differentiable neighborhood.
    nn::Vector input(spec.input_size);
    nn::ForwardCache cache;
    bool smooth = false;
    for (int attempt = 0; attempt < 200 && !smooth; ++attempt) {
      for (int k = 0; k < spec.input_size; ++k) input[k] = normal(rng);
      nn::forward(spec, params, input, &cache);
      smooth = relu_margin(spec, cache) > 1e-4;
    }
    if (!smooth) continue;

    nn::Vector g(spec.output_size());
    for (Eigen::Index k = 0; k < g.size(); ++k) g[k] = normal(rng);
    const nn::Gradients an = nn::backward(spec, params, cache, g);

    const auto objective = [&](const nn::ParameterSet& p, const nn::Vector& x) {
      return g.dot(nn::forward(spec, p, x));
    };

    const int total = static_cast<int>(params.values.size());
    const int probes = std::min(12, total);
    for (int pi = 0; pi < probes; ++pi) {
      const int k = probes == 1 ? 0 : pi * (total - 1) / (probes - 1);
      const double h = 1e-6 * std::max(1.0, std::abs(params.values[k]));
      nn::ParameterSet tweak = params;
      tweak.values[k] = params.values[k] + h;
      const double up = objective(tweak, input);
      tweak.values[k] = params.values[k] - h;
      const double dn = objective(tweak, input);
      worst = std::max(worst, rel_error((up - dn) / (2.0 * h), an.params[k]));
    }
    for (int k = 0; k < spec.input_size; ++k) {
      const double h = 1e-6 * std::max(1.0, std::abs(input[k]));
      nn::Vector tweak = input;
      tweak[k] = input[k] + h;
      const double up = objective(params, tweak);
      tweak[k] = input[k] - h;
      const double dn = objective(params, tweak);
      worst = std::max(worst, rel_error((up - dn) / (2.0 * h), an.input[k]));
    }
    ++cases;
  }

  Outcome o;
  o.pass = cases >= 200 && worst < 1e-5;
  o.detail = std::to_string(cases) + " cases, max rel err " + fmt(worst, "%.2e");
  return o;
}

// ---------------------------------------------------------------- 2 --
// MRT optimality against random feasible beamformers; FD solver power
// feasibility and monotonicity; dual bisection tightness.

Outcome criterion_beamforming() {
  Rng rng = make_rng(0xACC2);
  const LinkBudget budget;
  const double p = budget.max_power_mw();
  const double sigma2 = budget.noise_power_mw();
  std::uniform_real_distribution<double> uphase(-kPi, kPi);
  std::uniform_real_distribution<double> upow(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  int mrt_wins = 0;
  for (int draw = 0; draw < 50; ++draw) {
    const ChannelSet ch = generate_channel_set(Geometry{}, budget, 8, 2, rng);
    RVector angles(8);
    for (int k = 0; k < 8; ++k) angles[k] = uphase(rng);
    const PhaseShiftVector phi(angles);
    const CVector row = effective_channel(ch, phi, 2);
    const Beamformer w = mrt_beamformer(row, p);
    const double best = std::norm(unconjugated_dot(row, w.w));
    bool beaten = false;
    for (int t = 0; t < 1000 && !beaten; ++t) {
      CVector z(2);
      for (int k = 0; k < 2; ++k) z[k] = {normal(rng), normal(rng)};
      if (z.norm() == 0.0) continue;
      const CVector wr = z * (std::sqrt(upow(rng) * p) / z.norm());
      beaten = std::norm(unconjugated_dot(row, wr)) > best;
    }
    if (!beaten) ++mrt_wins;
  }

  int fd_ok = 0;
  double worst_excess = 0.0;
  double worst_drop = 0.0;
  const FdSolverOptions options;
  for (int draw = 0; draw < 20; ++draw) {
    const ChannelSet ch = generate_channel_set(Geometry{}, budget, 8, 2, rng);
    RVector angles(8);
    for (int k = 0; k < 8; ++k) angles[k] = uphase(rng);
    const PhaseShiftVector phi(angles);
    const Beamformer w1i = mrt_beamformer(effective_channel(ch, phi, 2), p);
    const Beamformer w2i = mrt_beamformer(effective_channel(ch, phi, 1), p);
    const double init = sum_rate_fd(ch, phi, w1i, w2i, sigma2);
    const auto [w1, w2] = fd_alternating_solve(ch, phi, p, sigma2, options);
    const double achieved = sum_rate_fd(ch, phi, w1, w2, sigma2);
    worst_excess =
        std::max(worst_excess, std::max(w1.power(), w2.power()) / p - 1.0);
    worst_drop = std::max(worst_drop, init - achieved);
    if (w1.power() <= p * (1.0 + 1e-6) && w2.power() <= p * (1.0 + 1e-6) &&
        achieved >= init - options.tol) {
      ++fd_ok;
    }
  }

  int duals = 0;
  int duals_tight = 0;
  for (int draw = 0; draw < 50; ++draw) {
    CVector h(3), b(3);
    for (int k = 0; k < 3; ++k) {
      h[k] = {normal(rng), normal(rng)};
      b[k] = {normal(rng), normal(rng)};
    }
    b *= 10.0 * std::sqrt(p) / b.norm();  // infeasible unconstrained solution
    const double delta = 0.1 + 3.0 * std::abs(normal(rng));
    const double v = bisection_dual(b, h, delta, p, 1e-8);
    if (v > 0.0) {
      ++duals;
      const CVector w = solve_fd_system(h, delta, v, b);
      if (std::abs(w.squaredNorm() - p) <= 1e-8 * p) ++duals_tight;
    }
  }

  Outcome o;
  o.pass = mrt_wins == 50 && fd_ok == 20 && duals > 0 && duals_tight == duals;
  o.detail = "mrt " + std::to_string(mrt_wins) + "/50, fd " +
             std::to_string(fd_ok) + "/20 (max power excess " +
             fmt(worst_excess, "%.1e") + ", max rate drop " +
             fmt(worst_drop, "%.1e") + "), dual tight " +
             std::to_string(duals_tight) + "/" + std::to_string(duals);
  return o;
}

// ---------------------------------------------------------------- 3 --
// Complexity closed forms vs direct per-layer enumeration, reduction
// range, and the large-N limit.

struct OpCounts {
  std::int64_t p = 0;
  std::int64_t m = 0;
  std::int64_t a = 0;
};

OpCounts direct_ops(const nn::NetworkSpec& spec) {
  OpCounts c;
  int len = spec.input_size;
  int pending_filters = 0;
  int pending_out = 0;
  for (const nn::LayerSpec& layer : spec.layers) {
    switch (layer.kind) {
      case nn::LayerKind::Conv1D: {
        pending_out = nn::conv_output_length(len, layer.width, layer.stride);
        pending_filters = layer.filters;
        c.p += static_cast<std::int64_t>(layer.filters) * (layer.width + 1);
        c.m += static_cast<std::int64_t>(layer.filters) * pending_out *
               layer.width;
        // width-1 sums, one bias, one activation per output element
        c.a += static_cast<std::int64_t>(layer.filters) * pending_out *
               (layer.width + 1);
        break;
      }
      case nn::LayerKind::Flatten:
        len = pending_filters * pending_out;
        break;
      case nn::LayerKind::Dense:
        c.p += static_cast<std::int64_t>(layer.units) * (len + 1);
        c.m += static_cast<std::int64_t>(layer.units) * len;
        c.a += static_cast<std::int64_t>(layer.units) * (len + 1);
        len = layer.units;
        break;
    }
  }
  return c;
}

Outcome criterion_complexity() {
  Rng rng = make_rng(0xACC3);
  std::uniform_int_distribution<int> width(1, 200);
  int exact = 0;

  for (int i = 0; i < 20; ++i) {
    const std::array<std::int64_t, 4> eta = {width(rng), width(rng), width(rng),
                                             width(rng)};
    nn::NetworkSpec spec;
    spec.input_size = static_cast<int>(eta[0]);
    spec.layers = {
        nn::LayerSpec::dense(static_cast<int>(eta[1]), nn::Activation::ReLU),
        nn::LayerSpec::dense(static_cast<int>(eta[2]), nn::Activation::ReLU),
        nn::LayerSpec::dense(static_cast<int>(eta[3]), nn::Activation::Linear)};
    spec.validate();
    const auto rep = complexity::conventional_complexity(eta);
    const OpCounts ops = direct_ops(spec);
    if (rep.c_p == ops.p && rep.c_p == nn::parameter_count(spec) &&
        rep.c_m == ops.m && rep.c_a == ops.a) {
      ++exact;
    }
  }

  std::uniform_int_distribution<int> small(1, 10);
  for (int i = 0; i < 20; ++i) {
    const int fz = small(rng);
    const int fs = 1 + small(rng) % 4;
    const int fn = small(rng);
    const int e1 = fz + small(rng) * 2;
    const int e3 = 1 + small(rng) * 5;
    const int e4 = small(rng);
    nn::NetworkSpec spec;
    spec.input_size = e1;
    spec.layers = {nn::LayerSpec::conv1d(fn, fz, fs, nn::Activation::ReLU),
                   nn::LayerSpec::flatten(),
                   nn::LayerSpec::dense(e3, nn::Activation::Softmax),
                   nn::LayerSpec::dense(e4, nn::Activation::TanhScaledPi)};
    spec.validate();
    const auto rep = complexity::proposed_complexity(e1, e3, e4, fz, fn, fs);
    const OpCounts ops = direct_ops(spec);
    if (rep.c_p == ops.p && rep.c_p == nn::parameter_count(spec) &&
        rep.c_m == ops.m && rep.c_a == ops.a) {
      ++exact;
    }
  }

  const ExperimentConfig defaults;
  std::vector<int> grid;
  for (int n = 20; n <= 60; ++n) grid.push_back(n);
  const auto rows = harness::complexity_table(defaults, grid);
  bool in_range = rows.size() == grid.size();
  for (const auto& row : rows) {
    in_range = in_range && row.red_p > 0.0 && row.red_p < 1.0 &&
               row.red_m > 0.0 && row.red_m < 1.0 && row.red_a > 0.0 &&
               row.red_a < 1.0;
  }

  const auto big = harness::complexity_table(defaults, {100000});
  const nn::Hyper& h = defaults.agent.hyper;
  const double limit = complexity::asymptotic_reduction_mults(
      h.ff_units, h.conv_width, h.conv_filters, h.conv_stride,
      defaults.agent.dense_hidden[0], defaults.agent.dense_hidden[1]);
  const double gap = std::abs(big.front().red_m - limit);

  Outcome o;
  o.pass = exact == 40 && in_range && gap < 1e-3;
  o.detail = std::to_string(exact) + "/40 exact, reductions in (0,1) " +
             (in_range ? "yes" : "NO") + ", |red(1e5) - " + fmt(limit, "%.7f") +
             "| = " + fmt(gap, "%.1e");
  return o;
}

// ---------------------------------------------------------------- 4 --
// Single-element training must rediscover the exhaustive grid optimum.

Outcome criterion_grid_oracle() {
  AgentConfig agent;
  agent.episodes = 10;
  agent.steps_per_episode = 200;
  // One phase shift: the state is two entries, so shrink the conv
  // filter to fit while keeping the architecture family.
  agent.hyper.conv_width = 2;
  agent.hyper.conv_stride = 1;

  EnvConfig env;
  env.n_elements = 1;
  env.m_antennas = 2;
  env.mode = OperatingMode::HD;

  const double p = env.link_budget.max_power_mw();
  const double sigma2 = env.link_budget.noise_power_mw();
  const int grid = 4096;

  int wins = 0;
  std::string ratios;
  for (int s = 0; s < 5; ++s) {
    Rng rng = make_rng(derive_seed(0x51D, static_cast<std::uint64_t>(s)));
    std::vector<ChannelSet> channels;
    TrainObserver observer;
    observer.episode_channel = [&](int, const ChannelSet& ch) {
      channels.push_back(ch);
    };
    AgentNetworks nets = make_networks(1, agent, rng);
    const TrainResult result =
        train_with_networks(env, agent, std::move(nets), rng, &observer);
    if (!result.error.empty()) {
      ratios += " [seed " + std::to_string(s) + ": " + result.error + "]";
      continue;
    }

    double rstar = 0.0;
    for (const ChannelSet& ch : channels) {
      for (int g = 0; g < grid; ++g) {
        RVector angles(1);
        angles << -kPi + 2.0 * kPi * g / grid;
        const PhaseShiftVector phi(angles);
        const CVector row = effective_channel(ch, phi, 2);
        const double rate = rate_hd(ch, phi, mrt_beamformer(row, p), sigma2);
        rstar = std::max(rstar, rate);
      }
    }
    const double ratio = result.best_rate / rstar;
    if (ratio >= 0.95) ++wins;
    ratios += (ratios.empty() ? "" : " ") + fmt(ratio, "%.4f");
  }

  Outcome o;
  o.pass = wins >= 4;
  o.detail = std::to_string(wins) + "/5 seeds at >= 95% of grid optimum (" +
             ratios + ")";
  return o;
}

// ---------------------------------------------------------------- 5 --
// Learning gain over the random-phase baseline in both modes, growing
// with the element count.

Outcome criterion_learning_gain() {
  ExperimentConfig base;
  base.master_seed = 0xA11;
  base.num_seeds = 5;
  // Random-phase draws per training channel; the agent and the baseline
  // are scored on the same channel realizations so that per-seed gains
  // do not inherit the channel-strength spread.
  constexpr int kTrialsPerChannel = 5;

  std::map<std::pair<int, int>, std::vector<double>> drl;
  std::map<std::pair<int, int>, std::vector<double>> rnd;
  for (int n : {16, 24}) {
    for (int m = 0; m < 2; ++m) {
      ExperimentConfig cfg = base;
      cfg.n_elements = n;
      cfg.mode = (m == 0) ? OperatingMode::HD : OperatingMode::FD;
      const double p = cfg.link_budget.max_power_mw();
      const double sigma2 = cfg.link_budget.noise_power_mw();
      EnvConfig env;
      env.geometry = cfg.geometry;
      env.link_budget = cfg.link_budget;
      env.n_elements = n;
      env.m_antennas = cfg.m_antennas;
      env.mode = cfg.mode;
      env.fd_options = cfg.fd_options;
      for (std::uint64_t seed : cfg.run_seeds()) {
        Rng rng = make_rng(seed);
        std::vector<ChannelSet> channels;
        TrainObserver observer;
        observer.episode_channel = [&](int, const ChannelSet& ch) {
          channels.push_back(ch);
        };
        AgentNetworks nets = make_networks(n, cfg.agent, rng);
        const TrainResult result =
            train_with_networks(env, cfg.agent, std::move(nets), rng, &observer);
        if (!result.error.empty()) {
          return {false, "training aborted: " + result.error};
        }
        drl[{n, m}].push_back(result.best_rate);
        Rng brng = make_rng(derive_seed(seed, 0xb));
        double base_sum = 0.0;
        for (const ChannelSet& ch : channels) {
          base_sum += harness::random_phase_baseline(
              ch, cfg.mode, kTrialsPerChannel, brng, p, sigma2, cfg.fd_options);
        }
        rnd[{n, m}].push_back(base_sum / static_cast<double>(channels.size()));
      }
    }
  }

  bool ok = true;
  std::ostringstream detail;
  for (int m = 0; m < 2; ++m) {
    double gain[2] = {0.0, 0.0};
    int idx = 0;
    for (int n : {16, 24}) {
      const auto& d = drl[{n, m}];
      const auto& r = rnd[{n, m}];
      const auto test = stats::paired_one_sided_t(d, r);
      ok = ok && test.significant_95 && stats::mean(d) > stats::mean(r);
      gain[idx++] = test.mean_diff;
      detail << (m == 0 ? "hd" : "fd") << n << " gain " << fmt(test.mean_diff)
             << " (t " << fmt(test.t_stat) << ") ";
    }
    ok = ok && gain[1] > gain[0];
  }

  Outcome o;
  o.pass = ok;
  o.detail = detail.str();
  return o;
}

// ---------------------------------------------------------------- 6 --
// RIS placement: endpoints beat the midpoint; the baselines cannot
// tell the midpoint placements apart.

Outcome criterion_placement() {
  ExperimentConfig cfg;
  cfg.master_seed = 0xD0;
  cfg.num_seeds = 5;
  cfg.d0_grid = {1.0, 25.0, 49.0};
  cfg.workers = 1;

  const harness::SweepResult sweep = harness::sweep_d0(cfg);
  if (!sweep.errors.empty()) {
    return {false, "sweep cell failed: " + sweep.errors.front()};
  }

  std::map<std::pair<double, std::string>, std::vector<double>> cells;
  for (const auto& row : sweep.rows) cells[{row.x, row.method}].push_back(row.rate);

  const double near = stats::mean(cells[{1.0, "drl"}]);
  const double mid = stats::mean(cells[{25.0, "drl"}]);
  const double far = stats::mean(cells[{49.0, "drl"}]);
  const auto ci_random = stats::mean_ci_95(cells[{25.0, "random"}]);
  const auto ci_bare = stats::mean_ci_95(cells[{25.0, "without_ris"}]);
  const bool overlap = stats::intervals_overlap(ci_random, ci_bare);

  Outcome o;
  o.pass = near > mid && far > mid && overlap;
  o.detail = "drl means " + fmt(near) + "/" + fmt(mid) + "/" + fmt(far) +
             " at d0=1/25/49; midpoint random CI [" + fmt(ci_random.lo) + "," +
             fmt(ci_random.hi) + "] vs without-ris CI [" + fmt(ci_bare.lo) +
             "," + fmt(ci_bare.hi) + "] overlap " + (overlap ? "yes" : "NO");
  return o;
}

// ---------------------------------------------------------------- 7 --
// Byte-identical CSVs when any train or sweep invocation repeats with
// the same seed, exercised through the real CLI.

Outcome criterion_determinism() {
  const fs::path root =
      fs::temp_directory_path() /
      ("risfd_accept_" + std::to_string(static_cast<unsigned>(::getpid())));
  std::error_code ec;
  fs::remove_all(root, ec);
  fs::create_directories(root);
  const std::string cfg_path = (root / "tiny.cfg").string();
  {
    std::ofstream out(cfg_path);
    out << "n = 4\n"
           "agent.episodes = 2\n"
           "agent.steps = 10\n"
           "agent.minibatch = 4\n"
           "agent.replay = 64\n"
           "agent.dense_hidden = 8, 8\n"
           "num_seeds = 2\n"
           "sweep.d0 = 1, 25\n"
           "sweep.n = 4, 6\n"
           "baseline.trials = 20\n"
           "workers = 1\n";
  }

  const auto run_cli = [&](std::vector<std::string> args) {
    std::vector<char*> argv;
    argv.reserve(args.size());
    for (std::string& a : args) argv.push_back(a.data());
    // Keep the CLI's progress lines out of the acceptance report.
    std::ostringstream sink;
    std::streambuf* saved = std::cout.rdbuf(sink.rdbuf());
    const int rc =
        harness::cli_main(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(saved);
    return rc;
  };
  const auto out_dir = [&](const char* name) {
    return (root / name).string();
  };

  int rc = 0;
  rc += run_cli({"risfd", "train", "--config", cfg_path, "--seed", "42",
                 "--out", out_dir("t1")});
  rc += run_cli({"risfd", "train", "--config", cfg_path, "--seed", "42",
                 "--out", out_dir("t2")});
  rc += run_cli({"risfd", "sweep-d0", "--config", cfg_path, "--out",
                 out_dir("d1")});
  rc += run_cli({"risfd", "sweep-d0", "--config", cfg_path, "--out",
                 out_dir("d2")});
  rc += run_cli({"risfd", "sweep-n", "--config", cfg_path, "--out",
                 out_dir("n1")});
  rc += run_cli({"risfd", "sweep-n", "--config", cfg_path, "--out",
                 out_dir("n2")});
  if (rc != 0) {
    fs::remove_all(root, ec);
    return {false, "a cli invocation failed"};
  }

  // --seed sets the master seed; train runs under the first derived seed.
  const std::string train_csv =
      "train_hd_seed_" + hex64(derive_seed(42, 0)) + ".csv";
  const std::vector<std::array<std::string, 3>> pairs = {
      {"t1", "t2", train_csv},
      {"d1", "d2", "sweep_d0_hd.csv"},
      {"d1", "d2", "sweep_d0_hd_summary.csv"},
      {"n1", "n2", "sweep_n.csv"},
      {"n1", "n2", "sweep_n_summary.csv"}};
  int identical = 0;
  std::string mismatch;
  for (const auto& [a, b, name] : pairs) {
    if (slurp((root / a / name).string()) == slurp((root / b / name).string())) {
      ++identical;
    } else {
      mismatch += " " + name;
    }
  }
  fs::remove_all(root, ec);

  Outcome o;
  o.pass = identical == static_cast<int>(pairs.size());
  o.detail = std::to_string(identical) + "/" + std::to_string(pairs.size()) +
             " csv outputs byte-identical" +
             (mismatch.empty() ? "" : "; differs:" + mismatch);
  return o;
}

// ---------------------------------------------------------------- 8 --
// Update-order conformance: an instrumented single step must replay as
// target -> critic step -> actor step -> soft updates, with a
// hand-computed scalar network confirming the arithmetic.

Outcome criterion_conformance() {
  // Scalar critic with pinned weights: forward and backward by hand.
  const nn::NetworkSpec cspec = nn::dense_critic_spec(1, {1});
  nn::ParameterSet cparams;
  cparams.values = nn::Vector(6);
  cparams.values << 0.2, -0.3, 0.5, 0.1, 0.7, -0.2;
  cparams.m = nn::Vector::Zero(6);
  cparams.v = nn::Vector::Zero(6);
  nn::Vector x(3);
  x << 1.0, -0.5, 0.25;
  nn::ForwardCache cache;
  const double q = nn::forward(cspec, cparams, x, &cache)(0);
  nn::Vector dq(1);
  dq << -1.595;  // 2 (q - y) at y = 1
  const nn::Gradients grads = nn::backward(cspec, cparams, cache, dq);
  const bool hand_ok = std::abs(q - 0.2025) < 1e-15 &&
                       std::abs(grads.params(4) + 0.917125) < 1e-12 &&
                       std::abs(grads.params(0) + 1.1165) < 1e-12 &&
                       std::abs(grads.input(2) + 0.55825) < 1e-12;

  // One instrumented training step, then a manual replay of the four
  // updates from copies of the initial networks.
  AgentConfig agent;
  agent.episodes = 1;
  agent.steps_per_episode = 1;
  agent.minibatch = 1;
  agent.replay_capacity = 4;
  agent.gamma = 0.9;
  agent.tau = 0.25;
  agent.conventional_dense = true;
  agent.dense_hidden = {3};

  EnvConfig env;
  env.n_elements = 1;
  env.m_antennas = 2;
  env.mode = OperatingMode::HD;

  Rng net_rng = make_rng(0xACC8);
  AgentNetworks nets = make_networks(1, agent, net_rng);
  const nn::ParameterSet actor0 = nets.actor;
  const nn::ParameterSet critic0 = nets.critic;

  std::vector<std::string> events;
  std::vector<Transition> batch;
  nn::Vector y;
  TrainObserver observer;
  observer.event = [&](const std::string& label) { events.push_back(label); };
  observer.sampled = [&](const std::vector<Transition>& b, const nn::Vector& yv) {
    batch = b;
    y = yv;
  };

  Rng rng = make_rng(0xACC9);
  const TrainResult result =
      train_with_networks(env, agent, std::move(nets), rng, &observer);

  const std::vector<std::string> expected = {
      "action",       "env_step",      "store",
      "sample",       "target",        "critic_update",
      "actor_update", "soft_update_critic", "soft_update_actor"};
  const bool order_ok = result.error.empty() && events == expected &&
                        batch.size() == 1 && y.size() == 1;
  if (!order_ok || !hand_ok) {
    return {false, std::string("hand arithmetic ") + (hand_ok ? "ok" : "BAD") +
                       ", event order " + (order_ok ? "ok" : "BAD")};
  }

  const nn::Vector a_next =
      nn::forward(result.actor_spec, actor0, batch[0].s_next);
  nn::Vector sa(3);
  sa << batch[0].s_next, a_next;
  const double q_next = nn::forward(result.critic_spec, critic0, sa)(0);
  const bool target_ok =
      std::abs(y(0) - (batch[0].r + agent.gamma * q_next)) < 1e-15;

  nn::ParameterSet critic_replay = critic0;
  critic_update(result.critic_spec, critic_replay, batch, y, agent.critic_lr);
  nn::ParameterSet actor_replay = actor0;
  actor_update(result.actor_spec, actor_replay, result.critic_spec,
               critic_replay, batch, agent.actor_lr);
  nn::ParameterSet target_critic_replay = critic0;
  nn::soft_update(target_critic_replay, critic_replay, agent.tau);
  nn::ParameterSet target_actor_replay = actor0;
  nn::soft_update(target_actor_replay, actor_replay, agent.tau);

  const bool replay_ok =
      (critic_replay.values - result.critic_params.values).norm() == 0.0 &&
      (actor_replay.values - result.actor_params.values).norm() == 0.0 &&
      (target_critic_replay.values - result.target_critic_params.values)
              .norm() == 0.0 &&
      (target_actor_replay.values - result.target_actor_params.values)
              .norm() == 0.0;

  Outcome o;
  o.pass = target_ok && replay_ok;
  o.detail = std::string("event order ok, target ") +
             (target_ok ? "ok" : "BAD") + ", replayed updates " +
             (replay_ok ? "bit-identical" : "DIVERGED");
  return o;
}

struct Criterion {
  int id;
  const char* name;
  double limit_seconds;  ///< 0 = no budget
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "analytic gradients vs finite differences", 60.0,
       criterion_gradients},
      {2, "beamformer optimality and power feasibility", 60.0,
       criterion_beamforming},
      {3, "complexity closed forms and reduction limit", 0.0,
       criterion_complexity},
      {4, "single-element training vs exhaustive grid", 300.0,
       criterion_grid_oracle},
      {5, "learning gain over random phases", 7200.0, criterion_learning_gain},
      {6, "placement endpoints beat midpoint", 7200.0, criterion_placement},
      {7, "seeded reruns give identical csv bytes", 0.0,
       criterion_determinism},
      {8, "update order conformance", 0.0, criterion_conformance},
  };

  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (c.limit_seconds > 0.0 && seconds > c.limit_seconds) {
      o.pass = false;
      o.detail += " [over the " + fmt(c.limit_seconds, "%.0f") + " s budget]";
    }
    std::printf("[%s] criterion %d (%s): %s [%.1f s]\n",
                o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                seconds);
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d/8 criteria passed\n", 8 - failures);
  return failures;
}
