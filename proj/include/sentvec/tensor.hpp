#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentvec/kernels.hpp"
#include "sentvec/rng.hpp"

namespace sentvec {

// Dense row-major rows x cols matrix. All weight matrices and bias vectors
// (cols-only, rows = 1) live in this type. Element type is float for
// training and double for the finite-difference harness.
template <class T>
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, T(0)) {}

  std::size_t size() const { return data.size(); }
  T* row(std::size_t i) { return data.data() + i * cols; }
  const T* row(std::size_t i) const { return data.data() + i * cols; }
  T& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  T at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  void fill(T v) { data.assign(data.size(), v); }
  void zero() { fill(T(0)); }

  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (T v : data)
      if (!std::isfinite(double(v))) return false;
    return true;
  }

  template <class U>
  Tensor<U> cast() const {
    Tensor<U> out(rows, cols);
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = U(data[i]);
    return out;
  }
};

enum class InitScheme { UniformScaled, Zero };

// UniformScaled draws from U(-r, r), r = sqrt(6 / (fan_in + fan_out)) with
// fan_in = cols, fan_out = rows. Same seed gives the same tensor.
template <class T>
Tensor<T> init_params(std::size_t rows, std::size_t cols, InitScheme scheme,
                      std::uint64_t seed) {
  if (rows == 0 || cols == 0) throw std::invalid_argument("init_params: empty shape");
  Tensor<T> t(rows, cols);
  if (scheme == InitScheme::Zero) return t;
  const double r = std::sqrt(6.0 / double(rows + cols));
  SplitMix64 rng(seed);
  for (auto& v : t.data) v = T((2.0 * rng.next_double() - 1.0) * r);
  return t;
}

template <class T>
double uniform_scaled_bound(std::size_t rows, std::size_t cols) {
  return std::sqrt(6.0 / double(rows + cols));
}

// Numerically stable softmax (max subtraction). Output sums to 1.
template <class T>
std::vector<T> softmax(const std::vector<T>& logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  const T m = kern::max_value(logits.size(), logits.data());
  std::vector<T> out(logits.size());
  T z = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - m);
    z += out[i];
  }
  const T inv = T(1) / z;
  kern::scale(out.size(), inv, out.data());
  return out;
}

// log(sum(exp(logits))) with the same max-subtraction; used by loss code so
// that loss and probabilities share one stabilization.
template <class T>
T log_sum_exp(const std::vector<T>& logits) {
  if (logits.empty()) throw std::invalid_argument("log_sum_exp: empty input");
  const T m = kern::max_value(logits.size(), logits.data());
  T z = 0;
  for (T v : logits) z += std::exp(v - m);
  return m + std::log(z);
}

}  // namespace sentvec
