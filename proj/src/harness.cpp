#include "risfd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "risfd/complexity.hpp"
#include "risfd/errors.hpp"
#include "risfd/hash.hpp"
#include "risfd/stats.hpp"

namespace risfd::harness {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  if (!out) throw IoError("failed writing: " + path);
}

std::string curve_csv_text(const std::vector<CurvePoint>& curve) {
  std::ostringstream oss;
  oss << "episode,step,reward_bps_hz,best_so_far\n";
  for (const CurvePoint& p : curve) {
    oss << p.episode << ',' << p.step << ',' << format_double(p.reward) << ','
        << format_double(p.best_so_far) << '\n';
  }
  return oss.str();
}

EnvConfig env_from(const ExperimentConfig& cfg) {
  EnvConfig env;
  env.geometry = cfg.geometry;
  env.link_budget = cfg.link_budget;
  env.n_elements = cfg.n_elements;
  env.m_antennas = cfg.m_antennas;
  env.mode = cfg.mode;
  env.fd_options = cfg.fd_options;
  return env;
}

}  // namespace

double random_phase_baseline(const ChannelSet& ch, OperatingMode mode,
                             int trials, Rng& rng, double pmax_mw,
                             double sigma2_mw,
                             const FdSolverOptions& fd_options) {
  if (trials < 1) throw DomainError("baseline trials must be >= 1");
  std::uniform_real_distribution<double> uniform_phase(-kPi, kPi);
  double acc = 0.0;
  for (int t = 0; t < trials; ++t) {
    RVector phi(ch.n_elements);
    for (int i = 0; i < ch.n_elements; ++i) phi[i] = uniform_phase(rng);
    acc += env_step(ch, mode, phi, pmax_mw, sigma2_mw, fd_options).reward;
  }
  return acc / static_cast<double>(trials);
}

double without_ris_rate(const ChannelSet& ch, OperatingMode mode,
                        double pmax_mw, double sigma2_mw,
                        const FdSolverOptions& fd_options) {
  const ChannelSet bare = ch.without_ris();
  const RVector phi = RVector::Zero(bare.n_elements);
  return env_step(bare, mode, phi, pmax_mw, sigma2_mw, fd_options).reward;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  int pool_size = workers > 0
                      ? workers
                      : static_cast<int>(std::thread::hardware_concurrency());
  pool_size = std::clamp(pool_size, 1, count);
  if (pool_size == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(pool_size));
  for (int t = 0; t < pool_size; ++t) {
    pool.emplace_back([&] {
      while (true) {
        const int i = next.fetch_add(1);
        if (i >= count) break;
        try {
          fn(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

RunOutput run_train(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  cfg.validate();
  Rng rng = make_rng(run_seed);
  const auto start = std::chrono::steady_clock::now();
  TrainResult result = train(env_from(cfg), cfg.agent, rng);
  const auto stop = std::chrono::steady_clock::now();
  RunOutput out;
  out.seed = run_seed;
  out.result = std::move(result);
  out.wall_seconds = std::chrono::duration<double>(stop - start).count();
  return out;
}

void write_curve_csv(const std::string& path,
                     const std::vector<CurvePoint>& curve) {
  write_text_file(path, curve_csv_text(curve));
}

std::vector<CurvePoint> read_curve_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open curve csv: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "episode,step,reward_bps_hz,best_so_far") {
    throw IoError("unrecognized curve csv header in " + path);
  }
  std::vector<CurvePoint> curve;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    CurvePoint p;
    char comma = 0;
    std::istringstream row(line);
    if (!(row >> p.episode >> comma >> p.step >> comma >> p.reward >> comma >>
          p.best_so_far)) {
      throw IoError("malformed curve csv row in " + path + ": " + line);
    }
    curve.push_back(p);
  }
  return curve;
}

void write_run_record(const std::string& path, const ExperimentConfig& cfg,
                      const RunOutput& run, const std::string& curve_csv_name) {
  const std::string curve_text = curve_csv_text(run.result.curve);
  const std::string config_text = cfg.canonical_text();

  std::ostringstream best;
  best << format_double(run.result.best_rate);
  for (Eigen::Index i = 0; i < run.result.best_phases.size(); ++i) {
    best << ',' << format_double(run.result.best_phases[i]);
  }
  const std::string record_basis =
      config_text + "\nseed=" + hex64(run.seed) + "\n" + curve_text + best.str();

  nlohmann::ordered_json j;
  j["format"] = 1;
  j["versions"] = {{"risfd", kVersion}};
  j["config_hash"] = hex64(cfg.config_hash());
  j["seed"] = hex64(run.seed);
  j["mode"] = mode_name(cfg.mode);
  j["n"] = cfg.n_elements;
  j["m"] = cfg.m_antennas;
  j["best_rate_bps_hz"] = run.result.best_rate;
  std::vector<double> phases(run.result.best_phases.data(),
                             run.result.best_phases.data() +
                                 run.result.best_phases.size());
  j["best_phases"] = phases;
  j["curve_points"] = run.result.curve.size();
  j["curve_csv"] = curve_csv_name;
  j["curve_hash"] = hex64(fnv1a64(curve_text));
  j["record_hash"] = hex64(fnv1a64(record_basis));
  j["error"] = run.result.error;
  j["wall_clock_seconds"] = run.wall_seconds;
  write_text_file(path, j.dump(2) + "\n");
}

SweepResult sweep_d0(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<std::uint64_t> seeds = cfg.run_seeds();
  const int grid = static_cast<int>(cfg.d0_grid.size());
  const int cells = grid * static_cast<int>(seeds.size());
  std::vector<std::vector<SweepRow>> cell_rows(
      static_cast<std::size_t>(cells));
  std::vector<std::string> cell_errors(static_cast<std::size_t>(cells));

  parallel_for(cells, cfg.workers, [&](int cell) {
    const int gi = cell / static_cast<int>(seeds.size());
    const int si = cell % static_cast<int>(seeds.size());
    const double d0 = cfg.d0_grid[static_cast<std::size_t>(gi)];
    const std::uint64_t cell_seed =
        derive_seed(seeds[static_cast<std::size_t>(si)],
                    static_cast<std::uint64_t>(gi));
    ExperimentConfig local = cfg;
    local.geometry.d0_m = d0;
    const std::string mode = mode_name(local.mode);
    try {
      const RunOutput run = run_train(local, derive_seed(cell_seed, 0));
      if (!run.result.error.empty()) {
        throw NumericError("training aborted: " + run.result.error);
      }
      auto& rows = cell_rows[static_cast<std::size_t>(cell)];
      rows.push_back({d0, mode, "drl", seeds[static_cast<std::size_t>(si)],
                      run.result.best_rate});

      Rng baseline_rng = make_rng(derive_seed(cell_seed, 1));
      const ChannelSet ch =
          generate_channel_set(local.geometry, local.link_budget,
                               local.n_elements, local.m_antennas, baseline_rng);
      const double pmax = local.link_budget.max_power_mw();
      const double sigma2 = local.link_budget.noise_power_mw();
      rows.push_back({d0, mode, "random", seeds[static_cast<std::size_t>(si)],
                      random_phase_baseline(ch, local.mode, cfg.baseline_trials,
                                            baseline_rng, pmax, sigma2,
                                            local.fd_options)});
      rows.push_back({d0, mode, "without_ris",
                      seeds[static_cast<std::size_t>(si)],
                      without_ris_rate(ch, local.mode, pmax, sigma2,
                                       local.fd_options)});
    } catch (const std::exception& e) {
      std::ostringstream oss;
      oss << "d0=" << format_double(d0) << " seed=0x"
          << hex64(seeds[static_cast<std::size_t>(si)]) << ": " << e.what();
      cell_errors[static_cast<std::size_t>(cell)] = oss.str();
    }
  });

  SweepResult result;
  for (int cell = 0; cell < cells; ++cell) {
    const auto& rows = cell_rows[static_cast<std::size_t>(cell)];
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    if (!cell_errors[static_cast<std::size_t>(cell)].empty()) {
      result.errors.push_back(cell_errors[static_cast<std::size_t>(cell)]);
    }
  }
  return result;
}

SweepResult sweep_n(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::vector<std::uint64_t> seeds = cfg.run_seeds();
  const int grid = static_cast<int>(cfg.n_grid.size());
  const int cells = grid * static_cast<int>(seeds.size());
  std::vector<std::vector<SweepRow>> cell_rows(
      static_cast<std::size_t>(cells));
  std::vector<std::string> cell_errors(static_cast<std::size_t>(cells));

  parallel_for(cells, cfg.workers, [&](int cell) {
    const int gi = cell / static_cast<int>(seeds.size());
    const int si = cell % static_cast<int>(seeds.size());
    const int n = cfg.n_grid[static_cast<std::size_t>(gi)];
    const std::uint64_t seed = seeds[static_cast<std::size_t>(si)];
    const std::uint64_t cell_seed =
        derive_seed(seed, static_cast<std::uint64_t>(gi));
    try {
      auto& rows = cell_rows[static_cast<std::size_t>(cell)];
      const double x = static_cast<double>(n);

      // DRL in both modes with the identical agent configuration.
      for (int m = 0; m < 2; ++m) {
        ExperimentConfig local = cfg;
        local.n_elements = n;
        local.mode = (m == 0) ? OperatingMode::HD : OperatingMode::FD;
        const RunOutput run =
            run_train(local, derive_seed(cell_seed, static_cast<std::uint64_t>(m)));
        if (!run.result.error.empty()) {
          throw NumericError("training aborted: " + run.result.error);
        }
        rows.push_back({x, mode_name(local.mode), "drl", seed,
                        run.result.best_rate});
      }

      // Fully connected baseline agent, HD, longer episodes.
      {
        ExperimentConfig local = cfg;
        local.n_elements = n;
        local.mode = OperatingMode::HD;
        local.agent.conventional_dense = true;
        local.agent.steps_per_episode = 1000;
        const RunOutput run = run_train(local, derive_seed(cell_seed, 2));
        if (!run.result.error.empty()) {
          throw NumericError("training aborted: " + run.result.error);
        }
        rows.push_back({x, "hd", "conventional_drl", seed,
                        run.result.best_rate});
      }

      // Random-phase baselines per mode on fresh channel draws.
      for (int m = 0; m < 2; ++m) {
        ExperimentConfig local = cfg;
        local.n_elements = n;
        local.mode = (m == 0) ? OperatingMode::HD : OperatingMode::FD;
        Rng rng = make_rng(derive_seed(cell_seed, 3 + static_cast<std::uint64_t>(m)));
        const ChannelSet ch =
            generate_channel_set(local.geometry, local.link_budget, n,
                                 local.m_antennas, rng);
        rows.push_back(
            {x, mode_name(local.mode), "random", seed,
             random_phase_baseline(ch, local.mode, cfg.baseline_trials, rng,
                                   local.link_budget.max_power_mw(),
                                   local.link_budget.noise_power_mw(),
                                   local.fd_options)});
      }
    } catch (const std::exception& e) {
      std::ostringstream oss;
      oss << "n=" << n << " seed=0x" << hex64(seed) << ": " << e.what();
      cell_errors[static_cast<std::size_t>(cell)] = oss.str();
    }
  });

  SweepResult result;
  for (int cell = 0; cell < cells; ++cell) {
    const auto& rows = cell_rows[static_cast<std::size_t>(cell)];
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());
    if (!cell_errors[static_cast<std::size_t>(cell)].empty()) {
      result.errors.push_back(cell_errors[static_cast<std::size_t>(cell)]);
    }
  }
  return result;
}

void write_sweep_csv(const std::string& path, const std::string& x_name,
                     const std::vector<SweepRow>& rows) {
  std::ostringstream oss;
  oss << x_name << ",mode,method,seed,rate_bps_hz\n";
  for (const SweepRow& row : rows) {
    oss << format_double(row.x) << ',' << row.mode << ',' << row.method << ','
        << "0x" << hex64(row.seed) << ',' << format_double(row.rate) << '\n';
  }
  write_text_file(path, oss.str());
}

void write_sweep_summary_csv(const std::string& path, const std::string& x_name,
                             const std::vector<SweepRow>& rows) {
  std::map<std::tuple<double, std::string, std::string>, std::vector<double>>
      cells;
  for (const SweepRow& row : rows) {
    cells[{row.x, row.mode, row.method}].push_back(row.rate);
  }
  std::ostringstream oss;
  oss << x_name << ",mode,method,mean_rate_bps_hz,sd_rate_bps_hz,n_seeds\n";
  for (const auto& [key, rates] : cells) {
    const auto& [x, mode, method] = key;
    const double m = stats::mean(rates);
    const double sd = rates.size() > 1 ? stats::sample_sd(rates) : 0.0;
    oss << format_double(x) << ',' << mode << ',' << method << ','
        << format_double(m) << ',' << format_double(sd) << ',' << rates.size()
        << '\n';
  }
  write_text_file(path, oss.str());
}

std::vector<ComplexityRow> complexity_table(const ExperimentConfig& cfg,
                                            const std::vector<int>& n_grid) {
  if (n_grid.empty()) throw ConfigError("complexity grid is empty");
  if (cfg.agent.dense_hidden.size() != 2) {
    throw ConfigError(
        "the conventional closed forms need exactly two hidden widths");
  }
  const std::int64_t h1 = cfg.agent.dense_hidden[0];
  const std::int64_t h2 = cfg.agent.dense_hidden[1];
  const nn::Hyper& hy = cfg.agent.hyper;
  std::vector<ComplexityRow> rows;
  rows.reserve(n_grid.size());
  for (int n : n_grid) {
    if (n < 1) throw ConfigError("complexity grid values must be >= 1");
    using complexity::CostKind;
    const auto prop_actor = complexity::proposed_complexity(
        n + 1, hy.ff_units, n, hy.conv_width, hy.conv_filters, hy.conv_stride);
    const auto prop_critic = complexity::proposed_complexity(
        2 * n + 1, hy.ff_units, 1, hy.conv_width, hy.conv_filters,
        hy.conv_stride);
    const auto conv_actor =
        complexity::conventional_complexity({n + 1, h1, h2, n});
    const auto conv_critic =
        complexity::conventional_complexity({2 * n + 1, h1, h2, 1});
    ComplexityRow row;
    row.n = n;
    row.cp_conv = conv_actor.c_p + conv_critic.c_p;
    row.cp_prop = prop_actor.c_p + prop_critic.c_p;
    row.red_p = complexity::reduction(prop_actor, prop_critic, conv_actor,
                                      conv_critic, CostKind::Parameters);
    row.red_m = complexity::reduction(prop_actor, prop_critic, conv_actor,
                                      conv_critic, CostKind::Multiplications);
    row.red_a = complexity::reduction(prop_actor, prop_critic, conv_actor,
                                      conv_critic, CostKind::Additions);
    rows.push_back(row);
  }
  return rows;
}

void write_complexity_csv(const std::string& path,
                          const std::vector<ComplexityRow>& rows) {
  std::ostringstream oss;
  oss << "n,cp_conv,cp_prop,red_p,red_m,red_a\n";
  for (const ComplexityRow& row : rows) {
    oss << row.n << ',' << row.cp_conv << ',' << row.cp_prop << ','
        << format_double(row.red_p) << ',' << format_double(row.red_m) << ','
        << format_double(row.red_a) << '\n';
  }
  write_text_file(path, oss.str());
}

}  // namespace risfd::harness
