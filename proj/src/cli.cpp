#include "risfd/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "risfd/errors.hpp"
#include "risfd/hash.hpp"
#include "risfd/neural.hpp"
#include "risfd/stats.hpp"

namespace risfd::harness {
namespace {

namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t parse_seed(const std::string& text) {
  try {
    std::size_t pos = 0;
    const std::uint64_t value = std::stoull(text, &pos, 0);
    if (pos != text.size()) throw ConfigError("");
    return value;
  } catch (const std::exception&) {
    throw ConfigError("cannot parse seed '" + text +
                      "' (decimal or 0x-prefixed hex)");
  }
}

/// "20..60" inclusive range, or a comma list, or a single value.
std::vector<int> parse_n_grid(const std::string& text) {
  const auto to_int = [&](const std::string& piece) {
    try {
      std::size_t pos = 0;
      const int v = std::stoi(piece, &pos, 10);
      if (pos != piece.size() || v < 1) throw ConfigError("");
      return v;
    } catch (const std::exception&) {
      throw ConfigError("bad element count '" + piece + "' in --n " + text);
    }
  };
  std::vector<int> grid;
  const std::size_t dots = text.find("..");
  if (dots != std::string::npos) {
    const int lo = to_int(text.substr(0, dots));
    const int hi = to_int(text.substr(dots + 2));
    if (hi < lo) throw ConfigError("empty range in --n " + text);
    for (int n = lo; n <= hi; ++n) grid.push_back(n);
    return grid;
  }
  std::istringstream iss(text);
  std::string piece;
  while (std::getline(iss, piece, ',')) grid.push_back(to_int(piece));
  if (grid.empty()) throw ConfigError("--n needs at least one value");
  return grid;
}

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string mode;
  std::string seed_text;
  bool full_buffer_gating = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_mode = true) {
  cmd->add_option("--config", args.config_path, "key=value config file")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory");
  if (with_mode) {
    cmd->add_option("--mode", args.mode, "hd or fd")
        ->check(CLI::IsMember({"hd", "fd"}));
  }
  cmd->add_option("--seed", args.seed_text, "master seed (decimal or 0x hex)");
}

ExperimentConfig build_config(const CommonArgs& args) {
  ExperimentConfig cfg = args.config_path.empty()
                             ? ExperimentConfig{}
                             : ExperimentConfig::from_file(args.config_path);
  if (!args.mode.empty()) cfg.mode = parse_mode(args.mode);
  if (!args.seed_text.empty()) {
    cfg.master_seed = parse_seed(args.seed_text);
    cfg.seeds.clear();
  }
  if (args.full_buffer_gating) cfg.agent.full_buffer_gating = true;
  cfg.validate();
  return cfg;
}

fs::path resolve_out_dir(const CommonArgs& args, const ExperimentConfig& cfg) {
  std::string dir = args.out_dir;
  if (dir.empty()) {
    if (const char* env = std::getenv(kOutDirEnvVar); env && *env) dir = env;
  }
  if (dir.empty()) dir = cfg.output_dir;
  fs::create_directories(dir);
  return dir;
}

std::string run_stem(const std::string& prefix, const ExperimentConfig& cfg,
                     std::uint64_t seed) {
  return prefix + "_" + mode_name(cfg.mode) + "_seed_" + hex64(seed);
}

void report_sweep(const std::string& label, const SweepResult& result,
                  const fs::path& csv) {
  for (const std::string& err : result.errors) {
    std::cerr << label << " cell failed: " << err << '\n';
  }
  std::cout << label << " rows=" << result.rows.size()
            << " cell_errors=" << result.errors.size() << " -> " << csv.string()
            << '\n';
}

int cmd_train(const CommonArgs& args) {
  const ExperimentConfig cfg = build_config(args);
  const std::uint64_t seed = cfg.run_seeds().front();
  const fs::path out = resolve_out_dir(args, cfg);
  const RunOutput run = run_train(cfg, seed);

  const std::string stem = run_stem("train", cfg, seed);
  const std::string curve_name = stem + ".csv";
  write_curve_csv((out / curve_name).string(), run.result.curve);
  write_run_record((out / (stem + ".json")).string(), cfg, run, curve_name);
  nn::save_checkpoint((out / (stem + "_actor.ckpt")).string(),
                      run.result.actor_spec, run.result.actor_params);
  nn::save_checkpoint((out / (stem + "_critic.ckpt")).string(),
                      run.result.critic_spec, run.result.critic_params);

  std::cout << "train mode=" << mode_name(cfg.mode) << " n=" << cfg.n_elements
            << " seed=0x" << hex64(seed)
            << " episodes=" << cfg.agent.episodes
            << " steps=" << cfg.agent.steps_per_episode
            << " best_rate_bps_hz=" << fmt(run.result.best_rate)
            << " wall_s=" << fmt(run.wall_seconds) << " -> "
            << (out / curve_name).string() << '\n';
  if (!run.result.error.empty()) {
    std::cerr << "training aborted early: " << run.result.error << '\n';
    return 1;
  }
  return 0;
}

int cmd_eval(const CommonArgs& args, const std::string& actor_path) {
  const ExperimentConfig cfg = build_config(args);
  const auto [spec, params] = nn::load_checkpoint(actor_path);
  const int n = spec.output_size();
  if (spec.input_size != n + 1) {
    throw ConfigError("checkpoint is not a phase actor (input " +
                      std::to_string(spec.input_size) + ", output " +
                      std::to_string(n) + ")");
  }
  if (n != cfg.n_elements) {
    throw ConfigError("actor was trained for n=" + std::to_string(n) +
                      " but the config says n=" +
                      std::to_string(cfg.n_elements));
  }

  const std::uint64_t seed = cfg.run_seeds().front();
  Rng rng = make_rng(seed);
  const ChannelSet ch = generate_channel_set(cfg.geometry, cfg.link_budget,
                                             cfg.n_elements, cfg.m_antennas,
                                             rng);
  const double pmax = cfg.link_budget.max_power_mw();
  const double sigma2 = cfg.link_budget.noise_power_mw();

  std::uniform_real_distribution<double> uniform_phase(-kPi, kPi);
  RVector phi(n);
  for (int i = 0; i < n; ++i) phi[i] = uniform_phase(rng);

  double running_max = 0.0;
  const auto as_state = [&](const StepResult& step) {
    State s(n + 1);
    if (cfg.agent.normalize_rate_state) {
      running_max = std::max(running_max, step.reward);
      s[0] = (running_max > 0.0) ? step.reward / running_max : 0.0;
    } else {
      s[0] = step.reward;
    }
    s.tail(n) = step.s_next.tail(n);
    return s;
  };

  std::vector<CurvePoint> curve;
  StepResult step = env_step(ch, cfg.mode, phi, pmax, sigma2, cfg.fd_options);
  double best = step.reward;
  RVector best_phi = phi;
  State s = as_state(step);
  curve.push_back({1, 0, step.reward, best});
  for (int t = 1; t <= cfg.agent.steps_per_episode; ++t) {
    const Action a = select_action(spec, params, s, 0.0, rng);
    step = env_step(ch, cfg.mode, a, pmax, sigma2, cfg.fd_options);
    if (step.reward > best) {
      best = step.reward;
      best_phi = a;
    }
    s = as_state(step);
    curve.push_back({1, t, step.reward, best});
  }

  const fs::path out = resolve_out_dir(args, cfg);
  const std::string curve_name = run_stem("eval", cfg, seed) + ".csv";
  write_curve_csv((out / curve_name).string(), curve);
  std::cout << "eval mode=" << mode_name(cfg.mode) << " n=" << n << " seed=0x"
            << hex64(seed) << " best_rate_bps_hz=" << fmt(best) << " -> "
            << (out / curve_name).string() << '\n';
  return 0;
}

int cmd_baseline(const CommonArgs& args, int trials_override) {
  ExperimentConfig cfg = build_config(args);
  if (trials_override > 0) cfg.baseline_trials = trials_override;
  const fs::path out = resolve_out_dir(args, cfg);
  const double pmax = cfg.link_budget.max_power_mw();
  const double sigma2 = cfg.link_budget.noise_power_mw();

  std::ostringstream csv;
  csv << "mode,seed,random_rate_bps_hz,without_ris_rate_bps_hz\n";
  std::vector<double> random_rates;
  std::vector<double> bare_rates;
  for (std::uint64_t seed : cfg.run_seeds()) {
    Rng rng = make_rng(seed);
    const ChannelSet ch = generate_channel_set(cfg.geometry, cfg.link_budget,
                                               cfg.n_elements, cfg.m_antennas,
                                               rng);
    const double random_rate = random_phase_baseline(
        ch, cfg.mode, cfg.baseline_trials, rng, pmax, sigma2, cfg.fd_options);
    const double bare_rate =
        without_ris_rate(ch, cfg.mode, pmax, sigma2, cfg.fd_options);
    random_rates.push_back(random_rate);
    bare_rates.push_back(bare_rate);
    csv << mode_name(cfg.mode) << ",0x" << hex64(seed) << ','
        << fmt(random_rate) << ',' << fmt(bare_rate) << '\n';
  }
  const fs::path path =
      out / ("baseline_" + std::string(mode_name(cfg.mode)) + ".csv");
  {
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot open for writing: " + path.string());
    file << csv.str();
  }
  std::cout << "baseline mode=" << mode_name(cfg.mode)
            << " n=" << cfg.n_elements << " seeds=" << random_rates.size()
            << " trials=" << cfg.baseline_trials
            << " mean_random=" << fmt(stats::mean(random_rates))
            << " mean_without_ris=" << fmt(stats::mean(bare_rates)) << " -> "
            << path.string() << '\n';
  return 0;
}

int cmd_sweep_d0(const CommonArgs& args) {
  const ExperimentConfig cfg = build_config(args);
  const fs::path out = resolve_out_dir(args, cfg);
  const SweepResult result = sweep_d0(cfg);
  const std::string mode(mode_name(cfg.mode));
  const fs::path csv = out / ("sweep_d0_" + mode + ".csv");
  write_sweep_csv(csv.string(), "d0_m", result.rows);
  write_sweep_summary_csv((out / ("sweep_d0_" + mode + "_summary.csv")).string(),
                          "d0_m", result.rows);
  report_sweep("sweep-d0", result, csv);
  return result.rows.empty() ? 1 : 0;
}

int cmd_sweep_n(const CommonArgs& args) {
  const ExperimentConfig cfg = build_config(args);
  const fs::path out = resolve_out_dir(args, cfg);
  const SweepResult result = sweep_n(cfg);
  const fs::path csv = out / "sweep_n.csv";
  write_sweep_csv(csv.string(), "n", result.rows);
  write_sweep_summary_csv((out / "sweep_n_summary.csv").string(), "n",
                          result.rows);
  report_sweep("sweep-n", result, csv);
  return result.rows.empty() ? 1 : 0;
}

int cmd_complexity(const CommonArgs& args, const std::string& n_text) {
  const ExperimentConfig cfg = build_config(args);
  const std::vector<int> grid =
      n_text.empty() ? cfg.n_grid : parse_n_grid(n_text);
  const auto rows = complexity_table(cfg, grid);
  const fs::path out = resolve_out_dir(args, cfg);
  const fs::path csv = out / "complexity.csv";
  write_complexity_csv(csv.string(), rows);
  const ComplexityRow& last = rows.back();
  std::cout << "complexity rows=" << rows.size() << " n_last=" << last.n
            << " red_p=" << fmt(last.red_p) << " red_m=" << fmt(last.red_m)
            << " red_a=" << fmt(last.red_a) << " -> " << csv.string() << '\n';
  return 0;
}

}  // namespace

int cli_main(int argc, char** argv) {
  CLI::App app{"RIS phase-shift optimizer for half and full duplex links"};
  app.require_subcommand(1);

  CommonArgs train_args;
  auto* train_cmd =
      app.add_subcommand("train", "train the agent on one seeded link");
  add_common(train_cmd, train_args);
  train_cmd->add_flag("--full-buffer-gating", train_args.full_buffer_gating,
                      "delay updates until the replay buffer is full");

  CommonArgs eval_args;
  std::string actor_path;
  auto* eval_cmd =
      app.add_subcommand("eval", "greedy rollout of a saved actor");
  add_common(eval_cmd, eval_args);
  eval_cmd->add_option("--actor", actor_path, "actor checkpoint")
      ->required()
      ->check(CLI::ExistingFile);

  CommonArgs base_args;
  int baseline_trials = 0;
  auto* base_cmd = app.add_subcommand(
      "baseline", "random-phase and without-RIS reference rates");
  add_common(base_cmd, base_args);
  base_cmd->add_option("--trials", baseline_trials,
                       "random draws per channel");

  CommonArgs d0_args;
  auto* d0_cmd = app.add_subcommand(
      "sweep-d0", "rate vs RIS position for agent and baselines");
  add_common(d0_cmd, d0_args);
  d0_cmd->add_flag("--full-buffer-gating", d0_args.full_buffer_gating,
                   "delay updates until the replay buffer is full");

  CommonArgs n_args;
  auto* n_cmd = app.add_subcommand(
      "sweep-n", "rate vs element count in both modes plus baselines");
  add_common(n_cmd, n_args, /*with_mode=*/false);
  n_cmd->add_flag("--full-buffer-gating", n_args.full_buffer_gating,
                  "delay updates until the replay buffer is full");

  CommonArgs cx_args;
  std::string n_text;
  auto* cx_cmd = app.add_subcommand(
      "complexity", "network cost table for the two architectures");
  add_common(cx_cmd, cx_args, /*with_mode=*/false);
  cx_cmd->add_option("--n", n_text, "grid: single value, a,b,c or lo..hi");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.got_subcommand(train_cmd)) return cmd_train(train_args);
    if (app.got_subcommand(eval_cmd)) return cmd_eval(eval_args, actor_path);
    if (app.got_subcommand(base_cmd))
      return cmd_baseline(base_args, baseline_trials);
    if (app.got_subcommand(d0_cmd)) return cmd_sweep_d0(d0_args);
    if (app.got_subcommand(n_cmd)) return cmd_sweep_n(n_args);
    if (app.got_subcommand(cx_cmd)) return cmd_complexity(cx_args, n_text);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace risfd::harness
