#pragma once

#include <cstddef>

// Internal: per-ISA kernel entry points. Only kernels.cpp includes this.

namespace sentvec::kern {

#define SENTVEC_KERNEL_DECLS(ns)                                                            \
  namespace ns {                                                                            \
  template <class T> T dot(std::size_t n, const T* a, const T* b);                          \
  template <class T> T sum(std::size_t n, const T* x);                                      \
  template <class T> T max_value(std::size_t n, const T* x);                                \
  template <class T> T sq_norm(std::size_t n, const T* x);                                  \
  template <class T> void axpy(std::size_t n, T alpha, const T* x, T* y);                   \
  template <class T> void scale(std::size_t n, T alpha, T* x);                              \
  template <class T> void hadamard(std::size_t n, const T* a, const T* b, T* y);            \
  template <class T> void hadamard_acc(std::size_t n, const T* a, const T* b, T* y);        \
  template <class T> void gemv_acc(std::size_t m, std::size_t n, const T* a, const T* x,    \
                                   T* y);                                                   \
  template <class T> void gemv_t_acc(std::size_t m, std::size_t n, const T* a, const T* x,  \
                                     T* y);                                                 \
  template <class T> void ger_acc(std::size_t m, std::size_t n, T* a, const T* x,           \
                                  const T* y);                                              \
  template <class T> void sgd_update(std::size_t n, T lr, const T* g, T* p);                \
  template <class T>                                                                        \
  void adam_update(std::size_t n, T lr, T beta1, T beta2, T eps, T bc1, T bc2, const T* g,  \
                   T* m, T* v, T* p);                                                       \
  }

SENTVEC_KERNEL_DECLS(scalar)
#ifdef SENTVEC_HAVE_AVX2
SENTVEC_KERNEL_DECLS(avx2)
#endif

#undef SENTVEC_KERNEL_DECLS

}  // namespace sentvec::kern
