#include "risfd/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "risfd/errors.hpp"
#include "risfd/hash.hpp"

namespace risfd {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return s;
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream iss(value);
  while (std::getline(iss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const char* kind) {
  std::ostringstream oss;
  oss << "config key '" << key << "' has an invalid " << kind << " value '"
      << value << "'";
  throw ConfigError(oss.str());
}

double to_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &pos);
  } catch (const std::exception&) {
    bad_value(key, value, "number");
  }
  if (pos != value.size()) bad_value(key, value, "number");
  return v;
}

template <typename T>
T to_integer(const std::string& key, const std::string& value) {
  // Accept an explicit 0x prefix so seeds copied from output files
  // (always rendered in hex) parse back unchanged.
  const char* first = value.data();
  const char* last = value.data() + value.size();
  int base = 10;
  if (value.size() > 2 && value[0] == '0' && (value[1] == 'x' || value[1] == 'X')) {
    first += 2;
    base = 16;
  }
  T v{};
  const auto [ptr, ec] = std::from_chars(first, last, v, base);
  if (ec != std::errc{} || ptr != last) bad_value(key, value, "integer");
  return v;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::ostringstream oss;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) oss << ',';
    if constexpr (std::is_same_v<T, double>) {
      oss << format_double(items[i]);
    } else {
      oss << items[i];
    }
  }
  return oss.str();
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_string(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream iss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(iss, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream oss;
      oss << "config line " << line_no << " is not key=value: '" << line << "'";
      throw ConfigError(oss.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream oss;
      oss << "config line " << line_no << " has an empty key";
      throw ConfigError(oss.str());
    }
    if (!cfg.values_.emplace(key, value).second) {
      throw ConfigError("duplicate config key '" + key + "'");
    }
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream oss;
  oss << in.rdbuf();
  return parse_string(oss.str());
}

bool KeyValueConfig::has(const std::string& key) const {
  return values_.count(key) > 0;
}

std::string KeyValueConfig::get_string(const std::string& key,
                                       const std::string& fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double KeyValueConfig::get_double(const std::string& key,
                                  double fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : to_double(key, it->second);
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : to_integer<int>(key, it->second);
}

std::uint64_t KeyValueConfig::get_u64(const std::string& key,
                                      std::uint64_t fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  return it == values_.end() ? fallback
                             : to_integer<std::uint64_t>(key, it->second);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string v = lower(it->second);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, it->second, "boolean");
}

std::vector<double> KeyValueConfig::get_double_list(
    const std::string& key, std::vector<double> fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<double> out;
  for (const std::string& item : split_list(it->second)) {
    out.push_back(to_double(key, item));
  }
  return out;
}

std::vector<int> KeyValueConfig::get_int_list(const std::string& key,
                                              std::vector<int> fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<int> out;
  for (const std::string& item : split_list(it->second)) {
    out.push_back(to_integer<int>(key, item));
  }
  return out;
}

std::vector<std::uint64_t> KeyValueConfig::get_u64_list(
    const std::string& key, std::vector<std::uint64_t> fallback) const {
  consumed_.insert(key);
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::vector<std::uint64_t> out;
  for (const std::string& item : split_list(it->second)) {
    out.push_back(to_integer<std::uint64_t>(key, item));
  }
  return out;
}

std::vector<std::string> KeyValueConfig::unconsumed() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (!consumed_.count(key)) out.push_back(key);
  }
  return out;
}

OperatingMode parse_mode(const std::string& text) {
  const std::string v = lower(trim(text));
  if (v == "hd") return OperatingMode::HD;
  if (v == "fd") return OperatingMode::FD;
  throw ConfigError("mode must be 'hd' or 'fd', got '" + text + "'");
}

std::string mode_name(OperatingMode mode) {
  return mode == OperatingMode::HD ? "hd" : "fd";
}

ExperimentConfig::ExperimentConfig() {
  agent.episodes = 40;  // desk-scale default; the full K=100 is a config away
}

std::vector<std::uint64_t> ExperimentConfig::run_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  out.reserve(static_cast<std::size_t>(num_seeds));
  for (int i = 0; i < num_seeds; ++i) {
    out.push_back(derive_seed(master_seed, static_cast<std::uint64_t>(i)));
  }
  return out;
}

std::string ExperimentConfig::canonical_text() const {
  std::ostringstream oss;
  oss << "mode=" << mode_name(mode) << '\n';
  oss << "geometry.d0_m=" << format_double(geometry.d0_m) << '\n';
  oss << "geometry.d1_m=" << format_double(geometry.d1_m) << '\n';
  oss << "geometry.dv_m=" << format_double(geometry.dv_m) << '\n';
  oss << "link.pl0_db=" << format_double(link_budget.pl0_db) << '\n';
  oss << "link.ref_distance_m=" << format_double(link_budget.ref_distance_m)
      << '\n';
  oss << "link.zeta_bu=" << format_double(link_budget.zeta_bu) << '\n';
  oss << "link.zeta_br=" << format_double(link_budget.zeta_br) << '\n';
  oss << "link.zeta_ur=" << format_double(link_budget.zeta_ur) << '\n';
  oss << "link.rician_k=" << format_double(link_budget.rician_k) << '\n';
  oss << "link.si_pl_db=" << format_double(link_budget.si_pl_db) << '\n';
  oss << "link.bs_gain_dbi=" << format_double(link_budget.bs_gain_dbi) << '\n';
  oss << "link.ue_gain_dbi=" << format_double(link_budget.ue_gain_dbi) << '\n';
  oss << "link.ris_gain_dbi=" << format_double(link_budget.ris_gain_dbi)
      << '\n';
  oss << "link.penetration_db=" << format_double(link_budget.penetration_db)
      << '\n';
  oss << "link.sigma2_dbm=" << format_double(link_budget.sigma2_dbm) << '\n';
  oss << "link.pmax_dbm=" << format_double(link_budget.pmax_dbm) << '\n';
  oss << "n=" << n_elements << '\n';
  oss << "m=" << m_antennas << '\n';
  oss << "agent.gamma=" << format_double(agent.gamma) << '\n';
  oss << "agent.tau=" << format_double(agent.tau) << '\n';
  oss << "agent.actor_lr=" << format_double(agent.actor_lr) << '\n';
  oss << "agent.critic_lr=" << format_double(agent.critic_lr) << '\n';
  oss << "agent.noise_var=" << format_double(agent.noise_var) << '\n';
  oss << "agent.steps=" << agent.steps_per_episode << '\n';
  oss << "agent.episodes=" << agent.episodes << '\n';
  oss << "agent.replay=" << agent.replay_capacity << '\n';
  oss << "agent.minibatch=" << agent.minibatch << '\n';
  oss << "agent.full_buffer_gating=" << (agent.full_buffer_gating ? "true" : "false")
      << '\n';
  oss << "agent.reset_replay="
      << (agent.reset_replay_each_episode ? "true" : "false") << '\n';
  oss << "agent.normalize_state="
      << (agent.normalize_rate_state ? "true" : "false") << '\n';
  oss << "agent.conventional_dense="
      << (agent.conventional_dense ? "true" : "false") << '\n';
  oss << "agent.dense_hidden=" << join(agent.dense_hidden) << '\n';
  oss << "net.filters=" << agent.hyper.conv_filters << '\n';
  oss << "net.width=" << agent.hyper.conv_width << '\n';
  oss << "net.stride=" << agent.hyper.conv_stride << '\n';
  oss << "net.ff_units=" << agent.hyper.ff_units << '\n';
  oss << "net.ff_activation="
      << (agent.hyper.hidden_ff_activation == nn::Activation::ReLU ? "relu"
                                                                   : "softmax")
      << '\n';
  oss << "fd.tol=" << format_double(fd_options.tol) << '\n';
  oss << "fd.max_iter=" << fd_options.max_iterations << '\n';
  oss << "fd.bisect_tol=" << format_double(fd_options.bisection_tol) << '\n';
  oss << "seed=" << master_seed << '\n';
  oss << "num_seeds=" << num_seeds << '\n';
  oss << "seeds=" << join(seeds) << '\n';
  oss << "sweep.d0=" << join(d0_grid) << '\n';
  oss << "sweep.n=" << join(n_grid) << '\n';
  oss << "baseline.trials=" << baseline_trials << '\n';
  oss << "out=" << output_dir << '\n';
  oss << "workers=" << workers << '\n';
  return oss.str();
}

std::uint64_t ExperimentConfig::config_hash() const {
  return fnv1a64(canonical_text());
}

void ExperimentConfig::validate() const {
  geometry.validate();
  link_budget.validate();
  agent.validate();
  if (n_elements < 1) throw ConfigError("n must be >= 1");
  if (m_antennas < 1) throw ConfigError("m must be >= 1");
  if (seeds.empty() && num_seeds < 1) throw ConfigError("num_seeds must be >= 1");
  std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
  if (unique.size() != seeds.size()) throw ConfigError("seeds must be distinct");
  if (d0_grid.empty()) throw ConfigError("sweep.d0 grid is empty");
  if (n_grid.empty()) throw ConfigError("sweep.n grid is empty");
  for (double d0 : d0_grid) {
    if (!(d0 >= 0.0 && d0 <= geometry.d1_m)) {
      throw ConfigError("sweep.d0 values must lie within [0, d1]");
    }
  }
  for (std::size_t i = 1; i < n_grid.size(); ++i) {
    if (n_grid[i] <= n_grid[i - 1]) {
      throw ConfigError("sweep.n grid must be strictly ascending");
    }
  }
  for (int n : n_grid) {
    if (n < 1) throw ConfigError("sweep.n values must be >= 1");
  }
  if (baseline_trials < 1) throw ConfigError("baseline.trials must be >= 1");
  if (workers < 0) throw ConfigError("workers must be >= 0");
  if (!(fd_options.tol > 0.0) || !(fd_options.bisection_tol > 0.0) ||
      fd_options.max_iterations < 1) {
    throw ConfigError("fd solver options out of range");
  }
}

ExperimentConfig ExperimentConfig::from_kv(const KeyValueConfig& kv) {
  ExperimentConfig cfg;
  cfg.mode = parse_mode(kv.get_string("mode", mode_name(cfg.mode)));
  cfg.geometry.d0_m = kv.get_double("geometry.d0_m", cfg.geometry.d0_m);
  cfg.geometry.d1_m = kv.get_double("geometry.d1_m", cfg.geometry.d1_m);
  cfg.geometry.dv_m = kv.get_double("geometry.dv_m", cfg.geometry.dv_m);
  LinkBudget& lb = cfg.link_budget;
  lb.pl0_db = kv.get_double("link.pl0_db", lb.pl0_db);
  lb.ref_distance_m = kv.get_double("link.ref_distance_m", lb.ref_distance_m);
  lb.zeta_bu = kv.get_double("link.zeta_bu", lb.zeta_bu);
  lb.zeta_br = kv.get_double("link.zeta_br", lb.zeta_br);
  lb.zeta_ur = kv.get_double("link.zeta_ur", lb.zeta_ur);
  lb.rician_k = kv.get_double("link.rician_k", lb.rician_k);
  lb.si_pl_db = kv.get_double("link.si_pl_db", lb.si_pl_db);
  lb.bs_gain_dbi = kv.get_double("link.bs_gain_dbi", lb.bs_gain_dbi);
  lb.ue_gain_dbi = kv.get_double("link.ue_gain_dbi", lb.ue_gain_dbi);
  lb.ris_gain_dbi = kv.get_double("link.ris_gain_dbi", lb.ris_gain_dbi);
  lb.penetration_db = kv.get_double("link.penetration_db", lb.penetration_db);
  lb.sigma2_dbm = kv.get_double("link.sigma2_dbm", lb.sigma2_dbm);
  lb.pmax_dbm = kv.get_double("link.pmax_dbm", lb.pmax_dbm);
  cfg.n_elements = kv.get_int("n", cfg.n_elements);
  cfg.m_antennas = kv.get_int("m", cfg.m_antennas);
  AgentConfig& ag = cfg.agent;
  ag.gamma = kv.get_double("agent.gamma", ag.gamma);
  ag.tau = kv.get_double("agent.tau", ag.tau);
  ag.actor_lr = kv.get_double("agent.actor_lr", ag.actor_lr);
  ag.critic_lr = kv.get_double("agent.critic_lr", ag.critic_lr);
  ag.noise_var = kv.get_double("agent.noise_var", ag.noise_var);
  ag.steps_per_episode = kv.get_int("agent.steps", ag.steps_per_episode);
  ag.episodes = kv.get_int("agent.episodes", ag.episodes);
  ag.replay_capacity = kv.get_int("agent.replay", ag.replay_capacity);
  ag.minibatch = kv.get_int("agent.minibatch", ag.minibatch);
  ag.full_buffer_gating =
      kv.get_bool("agent.full_buffer_gating", ag.full_buffer_gating);
  ag.reset_replay_each_episode =
      kv.get_bool("agent.reset_replay", ag.reset_replay_each_episode);
  ag.normalize_rate_state =
      kv.get_bool("agent.normalize_state", ag.normalize_rate_state);
  ag.conventional_dense =
      kv.get_bool("agent.conventional_dense", ag.conventional_dense);
  ag.dense_hidden = kv.get_int_list("agent.dense_hidden", ag.dense_hidden);
  ag.hyper.conv_filters = kv.get_int("net.filters", ag.hyper.conv_filters);
  ag.hyper.conv_width = kv.get_int("net.width", ag.hyper.conv_width);
  ag.hyper.conv_stride = kv.get_int("net.stride", ag.hyper.conv_stride);
  ag.hyper.ff_units = kv.get_int("net.ff_units", ag.hyper.ff_units);
  const std::string act = lower(kv.get_string(
      "net.ff_activation", ag.hyper.hidden_ff_activation == nn::Activation::ReLU
                               ? "relu"
                               : "softmax"));
  if (act == "softmax") {
    ag.hyper.hidden_ff_activation = nn::Activation::Softmax;
  } else if (act == "relu") {
    ag.hyper.hidden_ff_activation = nn::Activation::ReLU;
  } else {
    throw ConfigError("net.ff_activation must be 'softmax' or 'relu'");
  }
  cfg.fd_options.tol = kv.get_double("fd.tol", cfg.fd_options.tol);
  cfg.fd_options.max_iterations =
      kv.get_int("fd.max_iter", cfg.fd_options.max_iterations);
  cfg.fd_options.bisection_tol =
      kv.get_double("fd.bisect_tol", cfg.fd_options.bisection_tol);
  cfg.master_seed = kv.get_u64("seed", cfg.master_seed);
  cfg.num_seeds = kv.get_int("num_seeds", cfg.num_seeds);
  cfg.seeds = kv.get_u64_list("seeds", cfg.seeds);
  cfg.d0_grid = kv.get_double_list("sweep.d0", cfg.d0_grid);
  cfg.n_grid = kv.get_int_list("sweep.n", cfg.n_grid);
  cfg.baseline_trials = kv.get_int("baseline.trials", cfg.baseline_trials);
  cfg.output_dir = kv.get_string("out", cfg.output_dir);
  cfg.workers = kv.get_int("workers", cfg.workers);

  const std::vector<std::string> unknown = kv.unconsumed();
  if (!unknown.empty()) {
    std::ostringstream oss;
    oss << "unknown config key" << (unknown.size() > 1 ? "s" : "") << ":";
    for (const std::string& key : unknown) oss << " '" << key << "'";
    throw ConfigError(oss.str());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_kv(KeyValueConfig::parse_file(path));
}

}  // namespace risfd
