#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentvec/kernels.hpp"
#include "sentvec/tensor.hpp"

namespace sentvec {

// A named parameter tensor paired with its gradient accumulator. Models hand
// out a vector of these; the optimizer and the grad-check harness both work
// off that list.
template <class T>
struct ParamRef {
  std::string name;
  Tensor<T>* value = nullptr;
  Tensor<T>* grad = nullptr;
};

template <class T>
void zero_grads(std::vector<ParamRef<T>>& params) {
  for (auto& p : params) p.grad->zero();
}

// Global-norm gradient clipping. Returns the pre-clip norm.
template <class T>
double clip_global_norm(std::vector<ParamRef<T>>& params, double max_norm) {
  double sq = 0;
  for (auto& p : params) sq += double(kern::sq_norm(p.grad->size(), p.grad->data.data()));
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw std::runtime_error("clip_global_norm: non-finite gradient");
  if (norm > max_norm && norm > 0) {
    const T s = T(max_norm / norm);
    for (auto& p : params) kern::scale(p.grad->size(), s, p.grad->data.data());
  }
  return norm;
}

enum class OptimKind { SgdDecay, Adam };

// SGD with per-epoch learning-rate decay, or Adam. The decay factor is
// applied once per epoch: lr_t = lr0 * decay^epoch (call begin_epoch as the
// training loop advances). Adam moment buffers are allocated on first use
// and shape-checked against their parameters afterwards.
template <class T>
struct OptimState {
  OptimKind kind = OptimKind::SgdDecay;
  double learning_rate = 0.0005;
  double decay_factor = 0.99;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  long step_count = 0;
  long epoch = 0;
  std::vector<std::vector<T>> moment1, moment2;

  static OptimState sgd_decay(double lr, double decay) {
    if (lr < 0) throw std::invalid_argument("sgd_decay: learning rate must be >= 0");
    if (decay <= 0 || decay > 1) throw std::invalid_argument("sgd_decay: decay must be in (0,1]");
    OptimState s;
    s.kind = OptimKind::SgdDecay;
    s.learning_rate = lr;
    s.decay_factor = decay;
    return s;
  }

  static OptimState adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
                         double eps = 1e-8) {
    if (lr < 0) throw std::invalid_argument("adam: learning rate must be >= 0");
    OptimState s;
    s.kind = OptimKind::Adam;
    s.learning_rate = lr;
    s.decay_factor = 1.0;
    s.adam_beta1 = beta1;
    s.adam_beta2 = beta2;
    s.adam_eps = eps;
    return s;
  }

  void begin_epoch(long e) { epoch = e; }

  double current_lr() const {
    return kind == OptimKind::SgdDecay ? learning_rate * std::pow(decay_factor, double(epoch))
                                       : learning_rate;
  }
};

// One update over the whole parameter list. Gradients are consumed as-is
// (clip first if desired) and left untouched.
template <class T>
void optimizer_step(std::vector<ParamRef<T>>& params, OptimState<T>& state) {
  for (auto& p : params)
    if (!p.value->same_shape(*p.grad))
      throw std::invalid_argument("optimizer_step: shape mismatch for " + p.name);

  state.step_count += 1;
  if (state.kind == OptimKind::SgdDecay) {
    const T lr = T(state.current_lr());
    for (auto& p : params)
      kern::sgd_update(p.value->size(), lr, p.grad->data.data(), p.value->data.data());
    return;
  }

  if (state.moment1.empty()) {
    state.moment1.resize(params.size());
    state.moment2.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.moment1[i].assign(params[i].value->size(), T(0));
      state.moment2[i].assign(params[i].value->size(), T(0));
    }
  }
  if (state.moment1.size() != params.size())
    throw std::invalid_argument("optimizer_step: state built for a different parameter list");

  const T bc1 = T(1.0 - std::pow(state.adam_beta1, double(state.step_count)));
  const T bc2 = T(1.0 - std::pow(state.adam_beta2, double(state.step_count)));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i];
    if (state.moment1[i].size() != p.value->size())
      throw std::invalid_argument("optimizer_step: moment shape mismatch for " + p.name);
    kern::adam_update(p.value->size(), T(state.learning_rate), T(state.adam_beta1),
                      T(state.adam_beta2), T(state.adam_eps), bc1, bc2, p.grad->data.data(),
                      state.moment1[i].data(), state.moment2[i].data(), p.value->data.data());
  }
}

}  // namespace sentvec
