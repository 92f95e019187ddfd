#include "lmdc/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lmdc {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : storage_(capacity) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: zero capacity");
}

void ReplayBuffer::push(Transition t) {
  storage_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % storage_.size();
  size_ = std::min(size_ + 1, storage_.size());
}

AgentParams make_agent(int state_dim, int action_dim, const std::vector<int>& hidden_dims,
                       Rng& init_rng) {
  if (state_dim < 1 || action_dim < 1) {
    throw std::invalid_argument("make_agent: bad state/action dims");
  }
  std::vector<int> actor_dims{state_dim};
  actor_dims.insert(actor_dims.end(), hidden_dims.begin(), hidden_dims.end());
  actor_dims.push_back(action_dim);
  std::vector<int> critic_dims{state_dim + action_dim};
  critic_dims.insert(critic_dims.end(), hidden_dims.begin(), hidden_dims.end());
  critic_dims.push_back(1);

  AgentParams agent;
  agent.actor = make_mlp(actor_dims, Activation::tanh_bounded, init_rng);
  agent.critic = make_mlp(critic_dims, Activation::identity, init_rng);
  agent.target_actor = agent.actor;
  agent.target_critic = agent.critic;
  return agent;
}

Minibatch sample(const ReplayBuffer& buf, std::size_t k, Rng& rng) {
  if (buf.size() < k) {
    throw std::invalid_argument("sample: buffer smaller than requested batch");
  }
  // Floyd's subset sampling: k distinct indices, uniform over subsets, O(k).
  const std::size_t n = buf.size();
  std::vector<std::size_t> picked;
  picked.reserve(k);
  for (std::size_t j = n - k; j < n; ++j) {
    const std::size_t t = rng.uniform_index(j + 1);
    if (std::find(picked.begin(), picked.end(), t) != picked.end()) {
      picked.push_back(j);
    } else {
      picked.push_back(t);
    }
  }
  Minibatch batch;
  batch.reserve(k);
  for (std::size_t idx : picked) batch.push_back(&buf[idx]);
  return batch;
}

Action select_action(const Mlp& actor, const State& x, double sigma, Rng& rng) {
  if (sigma < 0.0) throw std::invalid_argument("select_action: negative sigma");
  thread_local MlpWorkspace ws;
  thread_local std::vector<double> flat;
  flat.resize(x.dim());
  x.write_flat(flat);
  const auto out = forward_ws(actor, flat, ws);
  if (out.size() != 3) throw std::invalid_argument("select_action: actor output must be 3-d");
  Action a;
  for (int i = 0; i < 3; ++i) {
    double v = out[i];
    if (sigma > 0.0) v += rng.normal(0.0, sigma);
    a.u[i] = std::clamp(v, -1.0, 1.0);
  }
  return a;
}

double critic_value(const Mlp& critic, std::span<const double> state,
                    std::span<const double> action) {
  thread_local MlpWorkspace ws;
  thread_local std::vector<double> joined;
  joined.resize(state.size() + action.size());
  std::copy(state.begin(), state.end(), joined.begin());
  std::copy(action.begin(), action.end(), joined.begin() + state.size());
  return forward_ws(critic, joined, ws)[0];
}

std::vector<double> td_targets(const Minibatch& batch, const Mlp& target_actor,
                               const Mlp& target_critic, double gamma) {
  thread_local MlpWorkspace actor_ws, critic_ws;
  thread_local std::vector<double> next_flat, joined;

  std::vector<double> y(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = *batch[i];
    if (t.terminal) {
      y[i] = t.reward;
      continue;
    }
    next_flat.resize(t.next_state.dim());
    t.next_state.write_flat(next_flat);
    const auto mu = forward_ws(target_actor, next_flat, actor_ws);
    joined.resize(next_flat.size() + mu.size());
    std::copy(next_flat.begin(), next_flat.end(), joined.begin());
    std::copy(mu.begin(), mu.end(), joined.begin() + next_flat.size());
    const double q = forward_ws(target_critic, joined, critic_ws)[0];
    y[i] = t.reward + gamma * q;
  }
  return y;
}

LossGradient critic_loss_gradient(const Mlp& critic, const Minibatch& batch,
                                  const std::vector<double>& targets) {
  if (batch.empty()) throw std::invalid_argument("critic_loss_gradient: empty batch");
  if (targets.size() != batch.size()) {
    throw std::invalid_argument("critic_loss_gradient: targets/batch size mismatch");
  }
  thread_local MlpWorkspace ws;
  thread_local std::vector<double> joined;

  LossGradient out;
  out.grad.resize_like(critic);
  const double k = static_cast<double>(batch.size());
  double upstream[1];

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Transition& t = *batch[i];
    const int sdim = t.state.dim();
    joined.resize(sdim + 3);
    t.state.write_flat({joined.data(), static_cast<std::size_t>(sdim)});
    std::copy(t.action.u.begin(), t.action.u.end(), joined.begin() + sdim);

    const double q = forward_ws(critic, joined, ws)[0];
    const double diff = q - targets[i];
    out.loss += diff * diff / (2.0 * k);
    upstream[0] = diff / k;  // d/dQ of (1/(2k))*(y - Q)^2
    backward_into(critic, joined, {upstream, 1}, &out.grad, {}, ws);
  }
  return out;
}

double critic_update(Mlp& critic, const Minibatch& batch, const std::vector<double>& targets,
                     OptimizerState& opt) {
  LossGradient lg = critic_loss_gradient(critic, batch, targets);
  apply_update(critic, lg.grad, opt, UpdateDirection::descent);
  return lg.loss;
}

namespace {

// Shared core: loss = -(1/k) * sum Q(x_i, mu(x_i)) and its actor gradient,
// with Q supplied either by an Mlp critic or an analytic hook.
template <typename QGradFn>
LossGradient actor_gradient_core(const Mlp& actor,
                                 const std::vector<std::vector<double>>& states,
                                 QGradFn&& q_with_grad) {
  if (states.empty()) throw std::invalid_argument("actor update: empty batch");
  thread_local MlpWorkspace actor_fwd_ws, actor_bwd_ws;
  thread_local std::vector<double> dq_da;

  LossGradient out;
  out.grad.resize_like(actor);
  const double k = static_cast<double>(states.size());
  const int adim = actor.output_dim();
  dq_da.resize(adim);

  for (const std::vector<double>& s : states) {
    const auto mu = forward_ws(actor, s, actor_fwd_ws);
    const double q = q_with_grad(s, mu, std::span<double>(dq_da));
    out.loss -= q / k;
    // d(loss)/d(mu) = -(1/k) * dQ/da, chained through the actor.
    for (int j = 0; j < adim; ++j) dq_da[j] = -dq_da[j] / k;
    backward_into(actor, s, dq_da, &out.grad, {}, actor_bwd_ws);
  }
  return out;
}

std::vector<std::vector<double>> batch_states(const Minibatch& batch) {
  std::vector<std::vector<double>> states;
  states.reserve(batch.size());
  for (const Transition* t : batch) states.push_back(t->state.flatten());
  return states;
}

}  // namespace

LossGradient actor_loss_gradient(const Mlp& actor, const Mlp& critic,
                                 const Minibatch& batch) {
  thread_local MlpWorkspace critic_ws;
  thread_local std::vector<double> joined, critic_input_grad;

  const auto states = batch_states(batch);
  const int adim = actor.output_dim();
  return actor_gradient_core(
      actor, states,
      [&](std::span<const double> s, std::span<const double> a, std::span<double> dq_da) {
        joined.resize(s.size() + a.size());
        std::copy(s.begin(), s.end(), joined.begin());
        std::copy(a.begin(), a.end(), joined.begin() + s.size());
        critic_input_grad.resize(joined.size());
        const double upstream[1] = {1.0};
        // Parameter gradients of the critic are deliberately not computed:
        // the critic is frozen inside the actor step.
        backward_into(critic, joined, {upstream, 1}, nullptr, critic_input_grad, critic_ws);
        const double q = critic_ws.act.back()[0];
        for (int j = 0; j < adim; ++j) dq_da[j] = critic_input_grad[s.size() + j];
        return q;
      });
}

LossGradient actor_loss_gradient(const Mlp& actor, const ActionValueFn& q,
                                 const std::vector<std::vector<double>>& states) {
  return actor_gradient_core(
      actor, states,
      [&](std::span<const double> s, std::span<const double> a, std::span<double> dq_da) {
        return q(s, a, dq_da);
      });
}

double actor_update(Mlp& actor, const Mlp& critic, const Minibatch& batch,
                    OptimizerState& opt) {
  LossGradient lg = actor_loss_gradient(actor, critic, batch);
  // Descending the loss -(1/k)*sum Q is the ascent step on expected Q.
  apply_update(actor, lg.grad, opt, UpdateDirection::descent);
  return lg.loss;
}

double actor_update(Mlp& actor, const ActionValueFn& q,
                    const std::vector<std::vector<double>>& states, OptimizerState& opt) {
  LossGradient lg = actor_loss_gradient(actor, q, states);
  apply_update(actor, lg.grad, opt, UpdateDirection::descent);
  return lg.loss;
}

void soft_update(Mlp& target, const Mlp& online, double tau) {
  if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("soft_update: tau outside (0,1]");
  if (target.dims != online.dims) {
    throw std::invalid_argument("soft_update: network shape mismatch");
  }
  for (std::size_t l = 0; l < target.layers.size(); ++l) {
    auto mix = [tau](std::vector<double>& t, const std::vector<double>& o) {
      for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = tau * o[i] + (1.0 - tau) * t[i];
      }
    };
    mix(target.layers[l].w, online.layers[l].w);
    mix(target.layers[l].b, online.layers[l].b);
  }
}

double noise_sigma_at(const AgentParams& agent, long step) {
  if (agent.noise_decay_steps <= 0) return agent.noise_sigma_end;
  const double f = std::clamp(
      static_cast<double>(step) / static_cast<double>(agent.noise_decay_steps), 0.0, 1.0);
  return agent.noise_sigma_start + f * (agent.noise_sigma_end - agent.noise_sigma_start);
}

void OuNoise::sample(double sigma, Rng& rng, std::span<double> out) {
  if (out.size() != x_.size()) throw std::invalid_argument("OuNoise: size mismatch");
  for (std::size_t i = 0; i < x_.size(); ++i) {
    x_[i] += theta_ * (0.0 - x_[i]) + sigma * rng.normal();
    out[i] = x_[i];
  }
}

}  // namespace lmdc
