#include "risfd/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "risfd/errors.hpp"

namespace risfd {

namespace {

constexpr double kPi = std::numbers::pi;

nn::Vector concat_state_action(const State& s, const Action& a) {
  nn::Vector x(s.size() + a.size());
  x << s, a;
  return x;
}

}  // namespace

ReplayBuffer::ReplayBuffer(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw DomainError("replay capacity must be >= 1");
  items_.reserve(static_cast<std::size_t>(capacity));
}

void ReplayBuffer::push(Transition t) {
  if (size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[static_cast<std::size_t>(next_)] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

void ReplayBuffer::clear() {
  items_.clear();
  next_ = 0;
}

const Transition& ReplayBuffer::at(int index) const {
  if (index < 0 || index >= size()) throw DomainError("replay index out of range");
  if (size() < capacity_) return items_[static_cast<std::size_t>(index)];
  // When full, next_ points at the oldest entry.
  return items_[static_cast<std::size_t>((next_ + index) % capacity_)];
}

std::vector<Transition> ReplayBuffer::sample(int count, Rng& rng) const {
  if (count < 1) throw DomainError("sample count must be >= 1");
  if (count > size()) {
    throw DomainError("replay buffer holds fewer transitions than requested");
  }
  std::vector<int> indices(static_cast<std::size_t>(size()));
  for (int i = 0; i < size(); ++i) indices[static_cast<std::size_t>(i)] = i;
  std::vector<Transition> batch;
  batch.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    std::uniform_int_distribution<int> pick(i, size() - 1);
    std::swap(indices[static_cast<std::size_t>(i)],
              indices[static_cast<std::size_t>(pick(rng))]);
    batch.push_back(at(indices[static_cast<std::size_t>(i)]));
  }
  return batch;
}

void AgentConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (!(noise_var >= 0.0)) throw ConfigError("noise variance must be >= 0");
  if (steps_per_episode < 1) throw ConfigError("steps per episode must be >= 1");
  if (episodes < 1) throw ConfigError("episode count must be >= 1");
  if (replay_capacity < 1) throw ConfigError("replay capacity must be >= 1");
  if (minibatch < 1) throw ConfigError("minibatch size must be >= 1");
  if (minibatch > replay_capacity) {
    throw ConfigError("minibatch cannot exceed the replay capacity");
  }
  for (int units : dense_hidden) {
    if (units < 1) throw ConfigError("dense hidden widths must be >= 1");
  }
}

void EnvConfig::validate() const {
  geometry.validate();
  link_budget.validate();
  if (n_elements < 1) throw ConfigError("element count must be >= 1");
  if (m_antennas < 1) throw ConfigError("antenna count must be >= 1");
}

Action select_action(const nn::NetworkSpec& actor,
                     const nn::ParameterSet& actor_params, const State& s,
                     double noise_var, Rng& rng) {
  if (!(noise_var >= 0.0)) throw DomainError("noise variance must be >= 0");
  nn::Vector a = nn::forward(actor, actor_params, s);
  if (noise_var > 0.0) {
    std::normal_distribution<double> noise(0.0, std::sqrt(noise_var));
    for (Eigen::Index i = 0; i < a.size(); ++i) a[i] += noise(rng);
  }
  return wrap_phases(a);
}

StepResult env_step(const ChannelSet& ch, OperatingMode mode, const Action& a,
                    double pmax_mw, double sigma2_mw,
                    const FdSolverOptions& fd_options) {
  const PhaseShiftVector phi(a);
  double r = 0.0;
  if (mode == OperatingMode::HD) {
    Beamformer w = Beamformer::zero(ch.m_antennas, pmax_mw);
    try {
      w = mrt_beamformer(effective_channel(ch, phi, 2), pmax_mw);
    } catch (const DegenerateChannelError&) {
      // dead channel: transmitting nothing is as good as anything
    }
    r = rate_hd(ch, phi, w, sigma2_mw);
  } else {
    const auto [w1, w2] = fd_alternating_solve(ch, phi, pmax_mw, sigma2_mw,
                                               fd_options);
    r = sum_rate_fd(ch, phi, w1, w2, sigma2_mw);
  }
  StepResult result;
  result.reward = r;
  result.s_next = nn::Vector(a.size() + 1);
  result.s_next[0] = r;
  result.s_next.tail(a.size()) = phi.angles();
  return result;
}

nn::Vector critic_target(const std::vector<Transition>& batch,
                         const nn::NetworkSpec& actor_spec,
                         const nn::ParameterSet& target_actor,
                         const nn::NetworkSpec& critic_spec,
                         const nn::ParameterSet& target_critic, double gamma) {
  nn::Vector y(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    const nn::Vector a_next =
        nn::forward(actor_spec, target_actor, batch[j].s_next);
    const nn::Vector q = nn::forward(
        critic_spec, target_critic, concat_state_action(batch[j].s_next, a_next));
    y[static_cast<Eigen::Index>(j)] = batch[j].r + gamma * q[0];
  }
  return y;
}

double critic_update(const nn::NetworkSpec& critic_spec,
                     nn::ParameterSet& critic_params,
                     const std::vector<Transition>& batch, const nn::Vector& y,
                     double alpha) {
  if (batch.empty()) throw DomainError("empty minibatch");
  if (y.size() != static_cast<Eigen::Index>(batch.size())) {
    throw ShapeError("target vector length differs from the batch size");
  }
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  nn::Vector grads = nn::Vector::Zero(critic_params.values.size());
  double loss = 0.0;
  for (std::size_t j = 0; j < batch.size(); ++j) {
    nn::ForwardCache cache;
    const nn::Vector q =
        nn::forward(critic_spec, critic_params,
                    concat_state_action(batch[j].s, batch[j].a), &cache);
    const double err = y[static_cast<Eigen::Index>(j)] - q[0];
    loss += err * err * inv_n;
    nn::Vector dq(1);
    dq[0] = -2.0 * err * inv_n;  // dL/dQ_j
    grads += nn::backward(critic_spec, critic_params, cache, dq).params;
  }
  if (!std::isfinite(loss)) throw NumericError("nonfinite critic loss");
  nn::adam_step(critic_params, grads, alpha);
  return loss;
}

double actor_update(const nn::NetworkSpec& actor_spec,
                    nn::ParameterSet& actor_params,
                    const nn::NetworkSpec& critic_spec,
                    const nn::ParameterSet& critic_params,
                    const std::vector<Transition>& batch, double alpha) {
  if (batch.empty()) throw DomainError("empty minibatch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  nn::Vector policy_grad = nn::Vector::Zero(actor_params.values.size());
  for (const Transition& t : batch) {
    nn::ForwardCache actor_cache;
    const nn::Vector a =
        nn::forward(actor_spec, actor_params, t.s, &actor_cache);
    nn::ForwardCache critic_cache;
    nn::forward(critic_spec, critic_params, concat_state_action(t.s, a),
                &critic_cache);
    nn::Vector dq(1);
    dq[0] = 1.0;
    const nn::Vector d_input =
        nn::backward(critic_spec, critic_params, critic_cache, dq).input;
    const nn::Vector da = d_input.tail(a.size());  // grad_a Q
    policy_grad +=
        nn::backward(actor_spec, actor_params, actor_cache, da).params;
  }
  policy_grad *= inv_n;
  const double norm = policy_grad.norm();
  // Ascend: Adam minimizes, so feed the negated policy gradient.
  nn::adam_step(actor_params, -policy_grad, alpha);
  return norm;
}

double discounted_return(const std::vector<double>& rewards, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0, 1]");
  double acc = 0.0;
  for (auto it = rewards.rbegin(); it != rewards.rend(); ++it) {
    acc = *it + gamma * acc;
  }
  return acc;
}

AgentNetworks make_networks(int n_elements, const AgentConfig& agent,
                            Rng& rng) {
  AgentNetworks nets;
  if (agent.conventional_dense) {
    nets.actor_spec = nn::dense_actor_spec(n_elements, agent.dense_hidden);
    nets.critic_spec = nn::dense_critic_spec(n_elements, agent.dense_hidden);
  } else {
    nets.actor_spec = nn::actor_spec(n_elements, agent.hyper);
    nets.critic_spec = nn::critic_spec(n_elements, agent.hyper);
  }
  nets.actor = nn::init_parameters(nets.actor_spec, rng);
  nets.critic = nn::init_parameters(nets.critic_spec, rng);
  return nets;
}

TrainResult train(const EnvConfig& env, const AgentConfig& agent, Rng& rng) {
  AgentNetworks nets = make_networks(env.n_elements, agent, rng);
  return train_with_networks(env, agent, std::move(nets), rng, nullptr);
}

TrainResult train_with_networks(const EnvConfig& env, const AgentConfig& agent,
                                AgentNetworks networks, Rng& rng,
                                const TrainObserver* observer) {
  env.validate();
  agent.validate();
  const int n = env.n_elements;
  if (networks.actor_spec.input_size != n + 1 ||
      networks.actor_spec.output_size() != n ||
      networks.critic_spec.input_size != 2 * n + 1 ||
      networks.critic_spec.output_size() != 1) {
    throw ShapeError("network shapes do not match the element count");
  }

  const auto note = [&](const char* label) {
    if (observer && observer->event) observer->event(label);
  };

  TrainResult result;
  nn::ParameterSet target_actor = networks.actor;    // theta_mu' <- theta_mu
  nn::ParameterSet target_critic = networks.critic;  // theta_q'  <- theta_q
  ReplayBuffer replay(agent.replay_capacity);

  const double pmax = env.link_budget.max_power_mw();
  const double sigma2 = env.link_budget.noise_power_mw();
  double best_rate = -std::numeric_limits<double>::infinity();
  RVector best_phases = RVector::Zero(n);
  double running_max = 0.0;

  const auto as_state = [&](const StepResult& step) {
    State s = step.s_next;
    if (agent.normalize_rate_state) {
      running_max = std::max(running_max, step.reward);
      s[0] = (running_max > 0.0) ? step.reward / running_max : 0.0;
    }
    return s;
  };
  const auto track_best = [&](const RVector& phases, double rate) {
    if (rate > best_rate) {
      best_rate = rate;
      best_phases = wrap_phases(phases);
    }
  };

  try {
    for (int k = 1; k <= agent.episodes; ++k) {
      const ChannelSet ch = generate_channel_set(
          env.geometry, env.link_budget, n, env.m_antennas, rng);
      if (observer && observer->episode_channel) observer->episode_channel(k, ch);
      std::uniform_real_distribution<double> uniform_phase(-kPi, kPi);
      RVector phi0(n);
      for (int i = 0; i < n; ++i) phi0[i] = uniform_phase(rng);

      const StepResult init =
          env_step(ch, env.mode, phi0, pmax, sigma2, env.fd_options);
      State s = as_state(init);
      track_best(phi0, init.reward);
      result.curve.push_back({k, 0, init.reward, best_rate});
      if (agent.reset_replay_each_episode) replay.clear();

      for (int t = 1; t <= agent.steps_per_episode; ++t) {
        note("action");
        const Action a =
            select_action(networks.actor_spec, networks.actor, s,
                          agent.noise_var, rng);
        note("env_step");
        const StepResult step =
            env_step(ch, env.mode, a, pmax, sigma2, env.fd_options);
        const State s_next = as_state(step);
        note("store");
        Transition transition{s, a, step.reward, s_next};
        if (observer && observer->stored) observer->stored(transition);
        replay.push(std::move(transition));
        track_best(a, step.reward);
        result.curve.push_back({k, t, step.reward, best_rate});

        const bool ready = agent.full_buffer_gating
                               ? replay.size() == replay.capacity()
                               : replay.size() >= agent.minibatch;
        if (ready) {
          note("sample");
          const std::vector<Transition> batch =
              replay.sample(agent.minibatch, rng);
          note("target");
          const nn::Vector y =
              critic_target(batch, networks.actor_spec, target_actor,
                            networks.critic_spec, target_critic, agent.gamma);
          if (observer && observer->sampled) observer->sampled(batch, y);
          note("critic_update");
          critic_update(networks.critic_spec, networks.critic, batch, y,
                        agent.critic_lr);
          note("actor_update");
          actor_update(networks.actor_spec, networks.actor,
                       networks.critic_spec, networks.critic, batch,
                       agent.actor_lr);
          note("soft_update_critic");
          nn::soft_update(target_critic, networks.critic, agent.tau);
          note("soft_update_actor");
          nn::soft_update(target_actor, networks.actor, agent.tau);
        }
        s = s_next;
      }
    }
  } catch (const std::exception& e) {
    result.error = e.what();
  }

  if (!std::isfinite(best_rate)) {
    best_rate = 0.0;
    best_phases = RVector::Zero(n);
  }
  result.best_phases = std::move(best_phases);
  result.best_rate = best_rate;
  result.actor_spec = std::move(networks.actor_spec);
  result.critic_spec = std::move(networks.critic_spec);
  result.actor_params = std::move(networks.actor);
  result.critic_params = std::move(networks.critic);
  result.target_actor_params = std::move(target_actor);
  result.target_critic_params = std::move(target_critic);
  return result;
}

}  // namespace risfd
