#ifndef RISFD_CONFIG_HPP
#define RISFD_CONFIG_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "risfd/ddpg.hpp"

namespace risfd {

/// Flat key=value configuration text: one `section.key = value` pair
/// per line, `#` starts a comment, blank lines ignored. Values are
/// plain scalars or comma-separated lists. Getters record which keys
/// were consumed so callers can reject unknown keys.
class KeyValueConfig {
 public:
  static KeyValueConfig parse_file(const std::string& path);
  static KeyValueConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_double_list(const std::string& key,
                                      std::vector<double> fallback) const;
  std::vector<int> get_int_list(const std::string& key,
                                std::vector<int> fallback) const;
  std::vector<std::uint64_t> get_u64_list(
      const std::string& key, std::vector<std::uint64_t> fallback) const;

  /// Keys present in the text that no getter has touched.
  std::vector<std::string> unconsumed() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

OperatingMode parse_mode(const std::string& text);
std::string mode_name(OperatingMode mode);

/// One experiment: environment, agent, seed policy, sweep grids, and
/// output location. Field-by-field key names are listed in the README.
struct ExperimentConfig {
  OperatingMode mode = OperatingMode::HD;
  Geometry geometry;
  LinkBudget link_budget;
  int n_elements = 16;
  int m_antennas = 2;
  AgentConfig agent;
  FdSolverOptions fd_options;

  std::uint64_t master_seed = 1;
  int num_seeds = 5;
  /// Explicit per-run seeds; when empty, run seeds derive from the
  /// master seed by counter splitting.
  std::vector<std::uint64_t> seeds;

  std::vector<double> d0_grid = {1.0, 25.0, 49.0};
  std::vector<int> n_grid = {8, 16, 24};
  int baseline_trials = 200;
  std::string output_dir = "out";
  int workers = 0;  ///< 0 = one per hardware thread

  ExperimentConfig();

  std::vector<std::uint64_t> run_seeds() const;
  /// Canonical one-line-per-field rendering; basis of config_hash().
  std::string canonical_text() const;
  std::uint64_t config_hash() const;
  void validate() const;

  static ExperimentConfig from_kv(const KeyValueConfig& kv);
  static ExperimentConfig from_file(const std::string& path);
};

}  // namespace risfd

#endif  // RISFD_CONFIG_HPP
