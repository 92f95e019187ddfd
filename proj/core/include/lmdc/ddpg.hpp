#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "lmdc/environment.hpp"
#include "lmdc/mlp.hpp"
#include "lmdc/rng.hpp"

namespace lmdc {

struct Transition {
  State state;
  Action action;
  double reward = 0.0;
  State next_state;
  // True for success/collision/out_of_range. Running and timeout transitions
  // keep bootstrapping: a timed-out state is not absorbing.
  bool terminal = false;
};

// Ring buffer; once full, the oldest entries are overwritten first.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return storage_.size(); }
  const Transition& operator[](std::size_t i) const { return storage_[i]; }

 private:
  std::vector<Transition> storage_;
  std::size_t cursor_ = 0;
  std::size_t size_ = 0;
};

// Sampled view into the buffer; valid until the next push.
using Minibatch = std::vector<const Transition*>;

struct AgentParams {
  Mlp actor;
  Mlp critic;
  Mlp target_actor;
  Mlp target_critic;
  double gamma = 0.9;
  double tau = 0.005;
  double noise_sigma_start = 0.3;
  double noise_sigma_end = 0.05;
  long noise_decay_steps = 100000;
};

// Fresh agent with target networks equal to the online networks. The actor
// is state_dim-hidden...-action_dim with bounded output; the critic takes
// the action concatenated to the state at the input layer.
AgentParams make_agent(int state_dim, int action_dim, const std::vector<int>& hidden_dims,
                       Rng& init_rng);

// k distinct indices drawn uniformly without replacement; throws when the
// buffer holds fewer than k transitions.
Minibatch sample(const ReplayBuffer& buf, std::size_t k, Rng& rng);

// u = clamp(actor(x) + eps) with eps ~ iid Gaussian(0, sigma^2) per
// component; sigma = 0 is the deterministic greedy action.
Action select_action(const Mlp& actor, const State& x, double sigma, Rng& rng);

// y_i = r_i for terminal transitions, else r_i + gamma * Q^(x', mu^(x')).
// Reads only the target networks.
std::vector<double> td_targets(const Minibatch& batch, const Mlp& target_actor,
                               const Mlp& target_critic, double gamma);

// Loss (1/(2k)) * sum (y_i - Q(x_i, u_i))^2 over the buffer actions u_i; one
// descent step on the critic. Returns the pre-update loss.
double critic_update(Mlp& critic, const Minibatch& batch, const std::vector<double>& targets,
                     OptimizerState& opt);

// Loss -(1/k) * sum Q(x_i, mu(x_i)); one ascent step on the actor through
// the chain rule (critic action-gradient composed with the actor Jacobian).
// The critic is read-only here. Returns the pre-update loss.
double actor_update(Mlp& actor, const Mlp& critic, const Minibatch& batch,
                    OptimizerState& opt);

// target <- tau * online + (1 - tau) * target, per parameter.
void soft_update(Mlp& target, const Mlp& online, double tau);

// Pre-update loss and parameter gradient of the critic regression loss;
// exposed so the gradient path can be verified by finite differences.
struct LossGradient {
  double loss = 0.0;
  GradientBundle grad;
};

LossGradient critic_loss_gradient(const Mlp& critic, const Minibatch& batch,
                                  const std::vector<double>& targets);

LossGradient actor_loss_gradient(const Mlp& actor, const Mlp& critic,
                                 const Minibatch& batch);

// Differentiable action-value hook: writes dQ/da into dq_da, returns Q.
// Lets tests drive the actor toward an analytically known optimum.
using ActionValueFn =
    std::function<double(std::span<const double> state, std::span<const double> action,
                         std::span<double> dq_da)>;

LossGradient actor_loss_gradient(const Mlp& actor, const ActionValueFn& q,
                                 const std::vector<std::vector<double>>& states);

double actor_update(Mlp& actor, const ActionValueFn& q,
                    const std::vector<std::vector<double>>& states, OptimizerState& opt);

// Q(x, a) through a state||action critic input.
double critic_value(const Mlp& critic, std::span<const double> state,
                    std::span<const double> action);

// Gaussian noise scale at a given training step: linear decay from
// sigma_start to sigma_end over noise_decay_steps.
double noise_sigma_at(const AgentParams& agent, long step);

// Ornstein-Uhlenbeck process, available behind a config switch as an
// alternative to iid Gaussian exploration noise.
class OuNoise {
 public:
  OuNoise(int dim, double theta) : theta_(theta), x_(dim, 0.0) {}
  void reset() { std::fill(x_.begin(), x_.end(), 0.0); }
  // One correlated draw per component, scaled to stationary stddev sigma.
  void sample(double sigma, Rng& rng, std::span<double> out);

 private:
  double theta_;
  std::vector<double> x_;
};

}  // namespace lmdc
