#ifndef RISFD_DDPG_HPP
#define RISFD_DDPG_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "risfd/beamforming.hpp"
#include "risfd/channel.hpp"
#include "risfd/neural.hpp"
#include "risfd/rng.hpp"
#include "risfd/sigmodel.hpp"

namespace risfd {

/// State: [previous rate, previous phases], length N+1.
/// Action: new phases, length N, wrapped to [-pi, pi).
using State = nn::Vector;
using Action = nn::Vector;

struct Transition {
  State s;
  Action a;
  double r = 0.0;
  State s_next;
};

/// Fixed-capacity ring buffer; once full, pushes overwrite the oldest
/// entry. Sampling requires at least `count` stored items.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity);

  void push(Transition t);
  void clear();
  int size() const { return static_cast<int>(items_.size()); }
  int capacity() const { return capacity_; }
  /// Logical index 0 is the oldest stored transition.
  const Transition& at(int index) const;
  /// Uniform sample without replacement.
  std::vector<Transition> sample(int count, Rng& rng) const;

 private:
  std::vector<Transition> items_;
  int capacity_ = 0;
  int next_ = 0;
};

struct AgentConfig {
  double gamma = 0.99;
  double tau = 0.001;
  double actor_lr = 1e-3;
  double critic_lr = 1e-3;
  double noise_var = 0.1;      ///< exploration noise variance per entry
  int steps_per_episode = 800;  ///< T
  int episodes = 100;           ///< K
  int replay_capacity = 10000;  ///< D
  int minibatch = 16;           ///< N_B

  /// Update gating: by default updates start once the buffer holds a
  /// minibatch; full_buffer_gating waits for a completely full buffer.
  bool full_buffer_gating = false;
  bool reset_replay_each_episode = false;
  /// Divide the state's rate entry by the running-max rate (ablation).
  bool normalize_rate_state = false;

  nn::Hyper hyper;
  /// Replace the conv hidden stack with fully connected hidden layers.
  bool conventional_dense = false;
  std::vector<int> dense_hidden = {256, 256};

  void validate() const;
};

struct EnvConfig {
  Geometry geometry;
  LinkBudget link_budget;
  int n_elements = 16;
  int m_antennas = 2;
  OperatingMode mode = OperatingMode::HD;
  FdSolverOptions fd_options;

  void validate() const;
};

/// a = wrap(mu(s) + xi), xi i.i.d. real N(0, noise_var) per entry.
Action select_action(const nn::NetworkSpec& actor,
                     const nn::ParameterSet& actor_params, const State& s,
                     double noise_var, Rng& rng);

struct StepResult {
  double reward = 0.0;
  State s_next;
};

/// Applies the phases, recomputes the optimal beamformers for the
/// requested mode (MRT for HD, alternating semi-closed solver for FD),
/// and returns the achieved rate with the new state [r, a].
StepResult env_step(const ChannelSet& ch, OperatingMode mode, const Action& a,
                    double pmax_mw, double sigma2_mw,
                    const FdSolverOptions& fd_options);

/// y_j = r_j + gamma * Q'(s_{j+1}, mu'(s_{j+1})).
nn::Vector critic_target(const std::vector<Transition>& batch,
                         const nn::NetworkSpec& actor_spec,
                         const nn::ParameterSet& target_actor,
                         const nn::NetworkSpec& critic_spec,
                         const nn::ParameterSet& target_critic, double gamma);

/// One Adam step on the critic against L = mean_j (y_j - Q(s_j,a_j))^2;
/// returns the pre-step loss.
double critic_update(const nn::NetworkSpec& critic_spec,
                     nn::ParameterSet& critic_params,
                     const std::vector<Transition>& batch, const nn::Vector& y,
                     double alpha);

/// One Adam ascent step on the actor along
/// mean_j grad_a Q(s_j, mu(s_j)) * grad_theta mu(s_j), with grad_a Q
/// taken from the critic's input gradient. Returns the norm of the
/// averaged policy gradient.
double actor_update(const nn::NetworkSpec& actor_spec,
                    nn::ParameterSet& actor_params,
                    const nn::NetworkSpec& critic_spec,
                    const nn::ParameterSet& critic_params,
                    const std::vector<Transition>& batch, double alpha);

/// Sum_k gamma^k r_k over the finite horizon.
double discounted_return(const std::vector<double>& rewards, double gamma);

struct CurvePoint {
  int episode = 0;  ///< 1-based
  int step = 0;     ///< 0 is the episode's initial evaluation
  double reward = 0.0;
  double best_so_far = 0.0;
};

struct AgentNetworks {
  nn::NetworkSpec actor_spec;
  nn::NetworkSpec critic_spec;
  nn::ParameterSet actor;
  nn::ParameterSet critic;
};

AgentNetworks make_networks(int n_elements, const AgentConfig& agent, Rng& rng);

/// Optional training instrumentation. `event` receives ordered labels
/// (action, env_step, store, sample, target, critic_update,
/// actor_update, soft_update_critic, soft_update_actor); the payload
/// callbacks expose the stored transition and each sampled batch with
/// its targets.
struct TrainObserver {
  std::function<void(const std::string&)> event;
  std::function<void(const Transition&)> stored;
  std::function<void(const std::vector<Transition>&, const nn::Vector&)>
      sampled;
  /// Fired once per episode with the freshly drawn channel realization.
  std::function<void(int episode, const ChannelSet&)> episode_channel;
};

struct TrainResult {
  RVector best_phases;
  double best_rate = 0.0;
  std::vector<CurvePoint> curve;
  /// Nonempty when training aborted; the curve covers completed steps.
  std::string error;

  nn::NetworkSpec actor_spec;
  nn::NetworkSpec critic_spec;
  nn::ParameterSet actor_params;
  nn::ParameterSet critic_params;
  nn::ParameterSet target_actor_params;
  nn::ParameterSet target_critic_params;
};

/// Runs the full K-episode x T-step loop: per episode, draw a fresh
/// channel set and uniform random phases, evaluate them (step 0), then
/// act / step / store / update / soft-update each step once the gating
/// condition holds. Returns the best (phases, rate) pair ever visited
/// and the learning curve.
TrainResult train(const EnvConfig& env, const AgentConfig& agent, Rng& rng);
TrainResult train_with_networks(const EnvConfig& env, const AgentConfig& agent,
                                AgentNetworks networks, Rng& rng,
                                const TrainObserver* observer = nullptr);

}  // namespace risfd

#endif  // RISFD_DDPG_HPP
