#include <cmath>
#include <cstddef>

#include "kernels_impl.hpp"

// Reference kernels. Plain loops, one accumulator, no reassociation tricks:
// these define the numeric behavior the SIMD variants are tested against.

namespace sentvec::kern::scalar {

template <class T>
T dot(std::size_t n, const T* a, const T* b) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

template <class T>
T sum(std::size_t n, const T* x) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

template <class T>
T max_value(std::size_t n, const T* x) {
  T m = x[0];
  for (std::size_t i = 1; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

template <class T>
T sq_norm(std::size_t n, const T* x) {
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <class T>
void scale(std::size_t n, T alpha, T* x) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

template <class T>
void hadamard(std::size_t n, const T* a, const T* b, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = a[i] * b[i];
}

template <class T>
void hadamard_acc(std::size_t n, const T* a, const T* b, T* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

template <class T>
void gemv_acc(std::size_t m, std::size_t n, const T* a, const T* x, T* y) {
  for (std::size_t i = 0; i < m; ++i) y[i] += dot(n, a + i * n, x);
}

template <class T>
void gemv_t_acc(std::size_t m, std::size_t n, const T* a, const T* x, T* y) {
  for (std::size_t i = 0; i < m; ++i) axpy(n, x[i], a + i * n, y);
}

template <class T>
void ger_acc(std::size_t m, std::size_t n, T* a, const T* x, const T* y) {
  for (std::size_t i = 0; i < m; ++i) axpy(n, x[i], y, a + i * n);
}

template <class T>
void sgd_update(std::size_t n, T lr, const T* g, T* p) {
  for (std::size_t i = 0; i < n; ++i) p[i] -= lr * g[i];
}

template <class T>
void adam_update(std::size_t n, T lr, T beta1, T beta2, T eps, T bc1, T bc2, const T* g, T* m,
                 T* v, T* p) {
  const T om1 = T(1) - beta1;
  const T om2 = T(1) - beta2;
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + om1 * g[i];
    v[i] = beta2 * v[i] + om2 * (g[i] * g[i]);
    const T mhat = m[i] / bc1;
    const T vhat = v[i] / bc2;
    p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
  }
}

#define SENTVEC_INSTANTIATE(T)                                                              \
  template T dot<T>(std::size_t, const T*, const T*);                                       \
  template T sum<T>(std::size_t, const T*);                                                 \
  template T max_value<T>(std::size_t, const T*);                                           \
  template T sq_norm<T>(std::size_t, const T*);                                             \
  template void axpy<T>(std::size_t, T, const T*, T*);                                      \
  template void scale<T>(std::size_t, T, T*);                                               \
  template void hadamard<T>(std::size_t, const T*, const T*, T*);                           \
  template void hadamard_acc<T>(std::size_t, const T*, const T*, T*);                       \
  template void gemv_acc<T>(std::size_t, std::size_t, const T*, const T*, T*);              \
  template void gemv_t_acc<T>(std::size_t, std::size_t, const T*, const T*, T*);            \
  template void ger_acc<T>(std::size_t, std::size_t, T*, const T*, const T*);               \
  template void sgd_update<T>(std::size_t, T, const T*, T*);                                \
  template void adam_update<T>(std::size_t, T, T, T, T, T, T, const T*, T*, T*, T*);

SENTVEC_INSTANTIATE(float)
SENTVEC_INSTANTIATE(double)

#undef SENTVEC_INSTANTIATE

}  // namespace sentvec::kern::scalar
