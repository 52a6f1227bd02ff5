#include "sentvec/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace sentvec::kern {

namespace {

bool cpu_has_avx2() {
#if defined(SENTVEC_HAVE_AVX2) && defined(__x86_64__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa initial_isa() {
  Isa best = cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
  if (const char* env = std::getenv("SENTVEC_ISA")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::Scalar;
    if (std::strcmp(env, "avx2") == 0 && best == Isa::Avx2) return Isa::Avx2;
  }
  return best;
}

Isa g_active = initial_isa();

}  // namespace

Isa detected() { return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar; }

Isa active() { return g_active; }

void force(Isa isa) {
  if (isa == Isa::Avx2 && !cpu_has_avx2())
    throw std::runtime_error("kern::force: AVX2 not available on this CPU/build");
  g_active = isa;
}

const char* name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

#ifdef SENTVEC_HAVE_AVX2
#define SENTVEC_DISPATCH(fn, ...) \
  (g_active == Isa::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define SENTVEC_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

template <class T>
T dot(std::size_t n, const T* a, const T* b) {
  return SENTVEC_DISPATCH(dot, n, a, b);
}
template <class T>
T sum(std::size_t n, const T* x) {
  return SENTVEC_DISPATCH(sum, n, x);
}
template <class T>
T max_value(std::size_t n, const T* x) {
  return SENTVEC_DISPATCH(max_value, n, x);
}
template <class T>
T sq_norm(std::size_t n, const T* x) {
  return SENTVEC_DISPATCH(sq_norm, n, x);
}
template <class T>
void axpy(std::size_t n, T alpha, const T* x, T* y) {
  SENTVEC_DISPATCH(axpy, n, alpha, x, y);
}
template <class T>
void scale(std::size_t n, T alpha, T* x) {
  SENTVEC_DISPATCH(scale, n, alpha, x);
}
template <class T>
void hadamard(std::size_t n, const T* a, const T* b, T* y) {
  SENTVEC_DISPATCH(hadamard, n, a, b, y);
}
template <class T>
void hadamard_acc(std::size_t n, const T* a, const T* b, T* y) {
  SENTVEC_DISPATCH(hadamard_acc, n, a, b, y);
}
template <class T>
void gemv_acc(std::size_t m, std::size_t n, const T* a, const T* x, T* y) {
  SENTVEC_DISPATCH(gemv_acc, m, n, a, x, y);
}
template <class T>
void gemv_t_acc(std::size_t m, std::size_t n, const T* a, const T* x, T* y) {
  SENTVEC_DISPATCH(gemv_t_acc, m, n, a, x, y);
}
template <class T>
void ger_acc(std::size_t m, std::size_t n, T* a, const T* x, const T* y) {
  SENTVEC_DISPATCH(ger_acc, m, n, a, x, y);
}
template <class T>
void sgd_update(std::size_t n, T lr, const T* g, T* p) {
  SENTVEC_DISPATCH(sgd_update, n, lr, g, p);
}
template <class T>
void adam_update(std::size_t n, T lr, T beta1, T beta2, T eps, T bc1, T bc2, const T* g, T* m,
                 T* v, T* p) {
  SENTVEC_DISPATCH(adam_update, n, lr, beta1, beta2, eps, bc1, bc2, g, m, v, p);
}

#undef SENTVEC_DISPATCH

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

}  // namespace sentvec::kern
