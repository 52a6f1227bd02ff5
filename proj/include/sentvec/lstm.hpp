#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "sentvec/kernels.hpp"
#include "sentvec/tensor.hpp"

namespace sentvec {

// Standard LSTM cell (no peepholes):
//   i = sigmoid(Wi x + Ui h + bi)      f = sigmoid(Wf x + Uf h + bf)
//   g = tanh  (Wg x + Ug h + bg)       o = sigmoid(Wo x + Uo h + bo)
//   c' = f.*c + i.*g                   h' = o.*tanh(c')
// The four gate blocks are stored fused, rows [i | f | g | o], so one gemv
// per input covers all gates. Forget-gate bias starts at 1.

template <class T>
inline T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <class T>
struct LstmParams {
  std::size_t d_in = 0;
  std::size_t d_h = 0;
  Tensor<T> w;  // 4*d_h x d_in
  Tensor<T> u;  // 4*d_h x d_h
  Tensor<T> b;  // 1 x 4*d_h

  static LstmParams init(std::size_t d_in, std::size_t d_h, std::uint64_t seed) {
    LstmParams p;
    p.d_in = d_in;
    p.d_h = d_h;
    p.w = Tensor<T>(4 * d_h, d_in);
    p.u = Tensor<T>(4 * d_h, d_h);
    p.b = Tensor<T>(1, 4 * d_h);
    // Per-gate UniformScaled blocks; the fused layout is storage only.
    for (std::size_t gate = 0; gate < 4; ++gate) {
      auto wg = init_params<T>(d_h, d_in, InitScheme::UniformScaled, seed + gate * 2);
      auto ug = init_params<T>(d_h, d_h, InitScheme::UniformScaled, seed + gate * 2 + 1);
      for (std::size_t r = 0; r < d_h; ++r) {
        std::copy(wg.row(r), wg.row(r) + d_in, p.w.row(gate * d_h + r));
        std::copy(ug.row(r), ug.row(r) + d_h, p.u.row(gate * d_h + r));
      }
    }
    for (std::size_t j = d_h; j < 2 * d_h; ++j) p.b.data[j] = T(1);
    return p;
  }

  LstmParams shaped_zero() const {
    LstmParams g;
    g.d_in = d_in;
    g.d_h = d_h;
    g.w = Tensor<T>(4 * d_h, d_in);
    g.u = Tensor<T>(4 * d_h, d_h);
    g.b = Tensor<T>(1, 4 * d_h);
    return g;
  }
};

// Everything the backward pass needs from one forward step.
template <class T>
struct LstmStepCache {
  std::vector<T> gates;   // 4*d_h, post-activation, [i f g o]
  std::vector<T> c;       // new cell state
  std::vector<T> tanh_c;
  std::vector<T> h;       // new hidden state
};

namespace detail {
template <class T>
inline void check_finite(const T* x, std::size_t n, const char* what) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(double(x[i]))) throw std::runtime_error(std::string("lstm_step: non-finite ") + what);
}
}  // namespace detail

template <class T>
void lstm_step(const LstmParams<T>& p, const T* x, const T* h_prev, const T* c_prev,
               LstmStepCache<T>& out) {
  const std::size_t dh = p.d_h;
  detail::check_finite(x, p.d_in, "input");
  detail::check_finite(h_prev, dh, "hidden state");
  detail::check_finite(c_prev, dh, "cell state");

  out.gates.assign(4 * dh, T(0));
  std::copy(p.b.data.begin(), p.b.data.end(), out.gates.begin());
  kern::gemv_acc(4 * dh, p.d_in, p.w.data.data(), x, out.gates.data());
  kern::gemv_acc(4 * dh, dh, p.u.data.data(), h_prev, out.gates.data());

  T* i = out.gates.data();
  T* f = i + dh;
  T* g = f + dh;
  T* o = g + dh;
  for (std::size_t k = 0; k < dh; ++k) i[k] = sigmoid(i[k]);
  for (std::size_t k = 0; k < dh; ++k) f[k] = sigmoid(f[k]);
  for (std::size_t k = 0; k < dh; ++k) g[k] = std::tanh(g[k]);
  for (std::size_t k = 0; k < dh; ++k) o[k] = sigmoid(o[k]);

  out.c.assign(dh, T(0));
  kern::hadamard(dh, f, c_prev, out.c.data());
  kern::hadamard_acc(dh, i, g, out.c.data());

  out.tanh_c.resize(dh);
  for (std::size_t k = 0; k < dh; ++k) out.tanh_c[k] = std::tanh(out.c[k]);

  out.h.assign(dh, T(0));
  kern::hadamard(dh, o, out.tanh_c.data(), out.h.data());
}

template <class T>
struct LstmGrads {
  Tensor<T>* w = nullptr;
  Tensor<T>* u = nullptr;
  Tensor<T>* b = nullptr;
};

// Accumulates parameter gradients for one step and propagates dh/dc/dx.
// dh/dc are the incoming gradients w.r.t. this step's outputs; dx_acc (may
// be null), dh_prev_out and dc_prev_out receive the upstream gradients.
// dx_acc is accumulated into, the other two are overwritten.
template <class T>
void lstm_step_backward(const LstmParams<T>& p, LstmGrads<T> grads, const T* x,
                        const T* h_prev, const T* c_prev, const LstmStepCache<T>& cache,
                        const T* dh, const T* dc_in, T* dx_acc, T* dh_prev_out,
                        T* dc_prev_out) {
  const std::size_t dh_n = p.d_h;
  const T* i = cache.gates.data();
  const T* f = i + dh_n;
  const T* g = f + dh_n;
  const T* o = g + dh_n;

  std::vector<T> dz(4 * dh_n);
  T* dzi = dz.data();
  T* dzf = dzi + dh_n;
  T* dzg = dzf + dh_n;
  T* dzo = dzg + dh_n;

  for (std::size_t k = 0; k < dh_n; ++k) {
    const T tc = cache.tanh_c[k];
    const T dck = (dc_in ? dc_in[k] : T(0)) + dh[k] * o[k] * (T(1) - tc * tc);
    const T dok = dh[k] * tc;
    dzi[k] = dck * g[k] * i[k] * (T(1) - i[k]);
    dzf[k] = dck * c_prev[k] * f[k] * (T(1) - f[k]);
    dzg[k] = dck * i[k] * (T(1) - g[k] * g[k]);
    dzo[k] = dok * o[k] * (T(1) - o[k]);
    dc_prev_out[k] = dck * f[k];
  }

  kern::ger_acc(4 * dh_n, p.d_in, grads.w->data.data(), dz.data(), x);
  kern::ger_acc(4 * dh_n, dh_n, grads.u->data.data(), dz.data(), h_prev);
  kern::axpy(4 * dh_n, T(1), dz.data(), grads.b->data.data());

  if (dx_acc) kern::gemv_t_acc(4 * dh_n, p.d_in, p.w.data.data(), dz.data(), dx_acc);
  std::fill(dh_prev_out, dh_prev_out + dh_n, T(0));
  kern::gemv_t_acc(4 * dh_n, dh_n, p.u.data.data(), dz.data(), dh_prev_out);
}

}  // namespace sentvec
