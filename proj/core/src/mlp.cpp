#include "lmdc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lmdc {

namespace {

// y = W x + b with four independent accumulator chains so the compiler can
// vectorize without reassociating a single serial reduction.
inline double dot4(const double* w, const double* x, int n) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 += w[i] * x[i];
    a1 += w[i + 1] * x[i + 1];
    a2 += w[i + 2] * x[i + 2];
    a3 += w[i + 3] * x[i + 3];
  }
  for (; i < n; ++i) a0 += w[i] * x[i];
  return (a0 + a1) + (a2 + a3);
}

inline void matvec(const DenseLayer& l, const double* x, double* y) {
  for (int j = 0; j < l.out; ++j) {
    y[j] = dot4(l.w.data() + static_cast<std::size_t>(j) * l.in, x, l.in) + l.b[j];
  }
}

inline double activate(double z, Activation a) {
  switch (a) {
    case Activation::relu:
      return z > 0.0 ? z : 0.0;
    case Activation::tanh_bounded:
      return std::tanh(z);
    case Activation::identity:
      return z;
  }
  return z;
}

// Derivative expressed through the post-activation value where possible.
inline double activate_grad(double z, double a_val, Activation a) {
  switch (a) {
    case Activation::relu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::tanh_bounded:
      return 1.0 - a_val * a_val;
    case Activation::identity:
      return 1.0;
  }
  return 1.0;
}

void check_net(const Mlp& net) {
  if (net.dims.size() < 2 || net.layers.size() != net.dims.size() - 1) {
    throw std::invalid_argument("mlp: malformed network");
  }
}

}  // namespace

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers) n += l.w.size() + l.b.size();
  return n;
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for (const DenseLayer& l : layers) {
    out.insert(out.end(), l.w.begin(), l.w.end());
    out.insert(out.end(), l.b.begin(), l.b.end());
  }
  return out;
}

void Mlp::unflatten(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw std::invalid_argument("mlp: unflatten size mismatch");
  }
  std::size_t pos = 0;
  for (DenseLayer& l : layers) {
    std::copy_n(params.begin() + pos, l.w.size(), l.w.begin());
    pos += l.w.size();
    std::copy_n(params.begin() + pos, l.b.size(), l.b.begin());
    pos += l.b.size();
  }
}

Mlp make_mlp(const std::vector<int>& dims, Activation output_activation, Rng& rng) {
  if (dims.size() < 2) throw std::invalid_argument("make_mlp: need input and output dims");
  for (int d : dims) {
    if (d < 1) throw std::invalid_argument("make_mlp: non-positive layer dim");
  }
  Mlp net;
  net.dims = dims;
  net.output_activation = output_activation;
  net.layers.resize(dims.size() - 1);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    DenseLayer& layer = net.layers[l];
    layer.in = dims[l];
    layer.out = dims[l + 1];
    layer.w.resize(static_cast<std::size_t>(layer.out) * layer.in);
    layer.b.resize(layer.out);
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    for (double& w : layer.w) w = rng.uniform(-bound, bound);
    for (double& b : layer.b) b = rng.uniform(-bound, bound);
  }
  return net;
}

void GradientBundle::resize_like(const Mlp& net) {
  layers.resize(net.layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    layers[l].dw.assign(net.layers[l].w.size(), 0.0);
    layers[l].db.assign(net.layers[l].b.size(), 0.0);
  }
  input_grad.assign(net.input_dim(), 0.0);
}

void GradientBundle::zero() {
  for (LayerGrad& l : layers) {
    std::fill(l.dw.begin(), l.dw.end(), 0.0);
    std::fill(l.db.begin(), l.db.end(), 0.0);
  }
  std::fill(input_grad.begin(), input_grad.end(), 0.0);
}

std::vector<double> GradientBundle::flatten() const {
  std::vector<double> out;
  for (const LayerGrad& l : layers) {
    out.insert(out.end(), l.dw.begin(), l.dw.end());
    out.insert(out.end(), l.db.begin(), l.db.end());
  }
  return out;
}

void MlpWorkspace::resize_like(const Mlp& net) {
  pre.resize(net.layers.size());
  act.resize(net.layers.size());
  delta.resize(net.layers.size());
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    pre[l].resize(net.layers[l].out);
    act[l].resize(net.layers[l].out);
    delta[l].resize(net.layers[l].out);
  }
}

std::span<const double> forward_ws(const Mlp& net, std::span<const double> input,
                                   MlpWorkspace& ws) {
  check_net(net);
  if (static_cast<int>(input.size()) != net.input_dim()) {
    throw std::invalid_argument("mlp forward: input size mismatch");
  }
  ws.resize_like(net);
  const double* x = input.data();
  const std::size_t last = net.layers.size() - 1;
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const DenseLayer& layer = net.layers[l];
    matvec(layer, x, ws.pre[l].data());
    const Activation a =
        (l == last) ? net.output_activation : net.hidden_activation;
    for (int j = 0; j < layer.out; ++j) ws.act[l][j] = activate(ws.pre[l][j], a);
    x = ws.act[l].data();
  }
  return {ws.act[last].data(), ws.act[last].size()};
}

std::vector<double> forward(const Mlp& net, std::span<const double> input) {
  MlpWorkspace ws;
  auto out = forward_ws(net, input, ws);
  return {out.begin(), out.end()};
}

void backward_into(const Mlp& net, std::span<const double> input,
                   std::span<const double> upstream, GradientBundle* acc,
                   std::span<double> input_grad, MlpWorkspace& ws) {
  check_net(net);
  if (static_cast<int>(upstream.size()) != net.output_dim()) {
    throw std::invalid_argument("mlp backward: upstream size mismatch");
  }
  if (!input_grad.empty() && static_cast<int>(input_grad.size()) != net.input_dim()) {
    throw std::invalid_argument("mlp backward: input_grad size mismatch");
  }
  if (acc && acc->layers.size() != net.layers.size()) {
    throw std::invalid_argument("mlp backward: gradient bundle shape mismatch");
  }

  forward_ws(net, input, ws);

  const std::size_t last = net.layers.size() - 1;
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const DenseLayer& layer = net.layers[li];
    const Activation a =
        (li == last) ? net.output_activation : net.hidden_activation;
    double* delta = ws.delta[li].data();

    if (li == last) {
      for (int j = 0; j < layer.out; ++j) {
        delta[j] = upstream[j] * activate_grad(ws.pre[li][j], ws.act[li][j], a);
      }
    } else {
      // delta_l = (W_{l+1}^T delta_{l+1}) ⊙ act'(z_l), accumulated row-wise
      // so the inner loops stay contiguous.
      const DenseLayer& up = net.layers[li + 1];
      const double* up_delta = ws.delta[li + 1].data();
      std::fill(ws.delta[li].begin(), ws.delta[li].end(), 0.0);
      for (int j = 0; j < up.out; ++j) {
        const double dj = up_delta[j];
        if (dj == 0.0) continue;
        const double* wrow = up.w.data() + static_cast<std::size_t>(j) * up.in;
        for (int i = 0; i < up.in; ++i) delta[i] += dj * wrow[i];
      }
      for (int j = 0; j < layer.out; ++j) {
        delta[j] *= activate_grad(ws.pre[li][j], ws.act[li][j], a);
      }
    }

    if (acc) {
      const double* below =
          (li == 0) ? input.data() : ws.act[li - 1].data();
      LayerGrad& g = acc->layers[li];
      for (int j = 0; j < layer.out; ++j) {
        const double dj = delta[j];
        g.db[j] += dj;
        if (dj == 0.0) continue;
        double* grow = g.dw.data() + static_cast<std::size_t>(j) * layer.in;
        for (int i = 0; i < layer.in; ++i) grow[i] += dj * below[i];
      }
    }
  }

  if (!input_grad.empty()) {
    const DenseLayer& first = net.layers[0];
    const double* d0 = ws.delta[0].data();
    std::fill(input_grad.begin(), input_grad.end(), 0.0);
    for (int j = 0; j < first.out; ++j) {
      const double dj = d0[j];
      if (dj == 0.0) continue;
      const double* wrow = first.w.data() + static_cast<std::size_t>(j) * first.in;
      for (int i = 0; i < first.in; ++i) input_grad[i] += dj * wrow[i];
    }
  }
}

GradientBundle backward(const Mlp& net, std::span<const double> input,
                        std::span<const double> upstream) {
  GradientBundle g;
  g.resize_like(net);
  MlpWorkspace ws;
  backward_into(net, input, upstream, &g, g.input_grad, ws);
  return g;
}

OptimizerState make_optimizer(const Mlp& net, OptimizerMethod method, double step_size) {
  OptimizerState opt;
  opt.method = method;
  opt.step_size = step_size;
  if (method == OptimizerMethod::adam) {
    opt.m.resize(net.layers.size());
    opt.v.resize(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      opt.m[l].dw.assign(net.layers[l].w.size(), 0.0);
      opt.m[l].db.assign(net.layers[l].b.size(), 0.0);
      opt.v[l].dw.assign(net.layers[l].w.size(), 0.0);
      opt.v[l].db.assign(net.layers[l].b.size(), 0.0);
    }
  }
  return opt;
}

namespace {

inline void adam_span(std::span<double> params, std::span<const double> grads,
                      std::span<double> m, std::span<double> v, double sign,
                      const OptimizerState& opt, double bc1, double bc2) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g;
    v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g * g;
    const double mhat = m[i] / bc1;
    const double vhat = v[i] / bc2;
    params[i] += sign * opt.step_size * mhat / (std::sqrt(vhat) + opt.epsilon);
  }
}

inline void sgd_span(std::span<double> params, std::span<const double> grads, double sign,
                     double step_size) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    params[i] += sign * step_size * grads[i];
  }
}

}  // namespace

void apply_update(Mlp& net, const GradientBundle& grads, OptimizerState& opt,
                  UpdateDirection direction) {
  check_net(net);
  if (grads.layers.size() != net.layers.size()) {
    throw std::invalid_argument("apply_update: gradient shape mismatch");
  }
  const double sign = (direction == UpdateDirection::descent) ? -1.0 : 1.0;

  if (opt.method == OptimizerMethod::sgd) {
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      sgd_span(net.layers[l].w, grads.layers[l].dw, sign, opt.step_size);
      sgd_span(net.layers[l].b, grads.layers[l].db, sign, opt.step_size);
    }
    ++opt.step_count;
    return;
  }

  ++opt.step_count;
  const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step_count));
  const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step_count));
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    adam_span(net.layers[l].w, grads.layers[l].dw, opt.m[l].dw, opt.v[l].dw, sign, opt,
              bc1, bc2);
    adam_span(net.layers[l].b, grads.layers[l].db, opt.m[l].db, opt.v[l].db, sign, opt,
              bc1, bc2);
  }
}

double max_relative_fd_error(const Mlp& net, std::span<const double> input,
                             std::span<const double> upstream,
                             const GradientBundle& analytic) {
  constexpr double h = 1e-5;
  Mlp probe = net;
  MlpWorkspace ws;

  const auto objective = [&]() {
    auto out = forward_ws(probe, input, ws);
    double s = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) s += upstream[i] * out[i];
    return s;
  };

  double worst = 0.0;
  for (std::size_t l = 0; l < probe.layers.size(); ++l) {
    auto probe_params = [&](std::vector<double>& params, const std::vector<double>& grads) {
      for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        params[i] = saved + h;
        const double hi = objective();
        params[i] = saved - h;
        const double lo = objective();
        params[i] = saved;
        const double numeric = (hi - lo) / (2.0 * h);
        const double err =
            std::abs(grads[i] - numeric) / std::max(1e-8, std::abs(numeric));
        worst = std::max(worst, err);
      }
    };
    probe_params(probe.layers[l].w, analytic.layers[l].dw);
    probe_params(probe.layers[l].b, analytic.layers[l].db);
  }
  return worst;
}

double finite_difference_check(const Mlp& net, std::span<const double> input,
                               std::span<const double> upstream) {
  const GradientBundle analytic = backward(net, input, upstream);
  return max_relative_fd_error(net, input, upstream, analytic);
}

}  // namespace lmdc
