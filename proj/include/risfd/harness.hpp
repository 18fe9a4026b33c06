#ifndef RISFD_HARNESS_HPP
#define RISFD_HARNESS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "risfd/config.hpp"
#include "risfd/ddpg.hpp"

namespace risfd::harness {

inline constexpr const char* kVersion = "0.1.0";
/// Environment variable holding the default output directory.
inline constexpr const char* kOutDirEnvVar = "RISFD_OUT_DIR";

/// Mean rate over `trials` uniform random phase configurations, with
/// the beamformers re-optimized for every draw.
double random_phase_baseline(const ChannelSet& ch, OperatingMode mode,
                             int trials, Rng& rng, double pmax_mw,
                             double sigma2_mw,
                             const FdSolverOptions& fd_options = {});

/// Rate over the direct paths only (RIS-adjacent blocks zeroed), with
/// optimal beamformers.
double without_ris_rate(const ChannelSet& ch, OperatingMode mode,
                        double pmax_mw, double sigma2_mw,
                        const FdSolverOptions& fd_options = {});

/// Runs tasks 0..count-1 on a bounded pool; workers = 0 means one per
/// hardware thread. Exceptions escaping a task are rethrown after join.
void parallel_for(int count, int workers, const std::function<void(int)>& fn);

struct RunOutput {
  std::uint64_t seed = 0;
  TrainResult result;
  double wall_seconds = 0.0;
};

/// One training run with the given per-run seed (environment and agent
/// both consume the stream derived from it).
RunOutput run_train(const ExperimentConfig& cfg, std::uint64_t run_seed);

/// Learning-curve CSV: header episode,step,reward_bps_hz,best_so_far.
void write_curve_csv(const std::string& path,
                     const std::vector<CurvePoint>& curve);
std::vector<CurvePoint> read_curve_csv(const std::string& path);

/// JSON sidecar for one run. The record hash covers config, seed,
/// curve, and the best solution, but not the wall clock.
void write_run_record(const std::string& path, const ExperimentConfig& cfg,
                      const RunOutput& run, const std::string& curve_csv_name);

struct SweepRow {
  double x = 0.0;  ///< grid value (d0 in meters, or N)
  std::string mode;
  std::string method;  ///< drl | random | without_ris | conventional_drl
  std::uint64_t seed = 0;
  double rate = 0.0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<std::string> errors;  ///< per-cell failures, sweep continues
};

/// RIS-placement sweep over cfg.d0_grid in cfg.mode: DRL, random-phase,
/// and without-RIS rates per (d0, seed).
SweepResult sweep_d0(const ExperimentConfig& cfg);

/// Element-count sweep over cfg.n_grid: DRL and random-phase rates in
/// both modes plus the fully connected baseline agent in HD, per
/// (N, seed), all sharing one AgentConfig.
SweepResult sweep_n(const ExperimentConfig& cfg);

void write_sweep_csv(const std::string& path, const std::string& x_name,
                     const std::vector<SweepRow>& rows);
/// Aggregated mean/sd over seeds per (x, mode, method).
void write_sweep_summary_csv(const std::string& path, const std::string& x_name,
                             const std::vector<SweepRow>& rows);

struct ComplexityRow {
  int n = 0;
  std::int64_t cp_conv = 0;  ///< conventional actor + critic parameters
  std::int64_t cp_prop = 0;  ///< proposed actor + critic parameters
  double red_p = 0.0;
  double red_m = 0.0;
  double red_a = 0.0;
};

std::vector<ComplexityRow> complexity_table(const ExperimentConfig& cfg,
                                            const std::vector<int>& n_grid);
void write_complexity_csv(const std::string& path,
                          const std::vector<ComplexityRow>& rows);

/// Subcommands: train, eval, sweep-d0, sweep-n, complexity, baseline.
int cli_main(int argc, char** argv);

}  // namespace risfd::harness

#endif  // RISFD_HARNESS_HPP
