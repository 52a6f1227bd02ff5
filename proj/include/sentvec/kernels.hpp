#pragma once

#include <cstddef>

// Data-parallel inner loops used by every model in this library.
//
// Each kernel has a scalar reference implementation and an AVX2 variant;
// the variant is picked once at startup from CPUID (override with force()
// or the SENTVEC_ISA environment variable, values "scalar" / "avx2").
//
// Determinism notes:
//   - axpy / ger_acc / gemv_t_acc / hadamard* / sgd_update / adam_update are
//     pure elementwise streams evaluated in the same order by both variants,
//     so their results are bit-identical across ISAs.
//   - dot / sum / sq_norm / gemv_acc re-associate the reduction in the AVX2
//     variant; results agree to rounding only.
// Transcendentals (tanh, sigmoid, exp) are not vectorized; both paths call
// libm so activation values never depend on the ISA.

namespace sentvec::kern {

enum class Isa { Scalar, Avx2 };

Isa detected();          // best ISA this CPU supports
Isa active();            // ISA currently used by the kernel entry points
void force(Isa isa);     // override dispatch; throws if unsupported here
const char* name(Isa isa);

template <class T> T dot(std::size_t n, const T* a, const T* b);
template <class T> T sum(std::size_t n, const T* x);
template <class T> T max_value(std::size_t n, const T* x);
template <class T> T sq_norm(std::size_t n, const T* x);

template <class T> void axpy(std::size_t n, T alpha, const T* x, T* y);   // y += alpha*x
template <class T> void scale(std::size_t n, T alpha, T* x);
template <class T> void hadamard(std::size_t n, const T* a, const T* b, T* y);     // y = a.*b
template <class T> void hadamard_acc(std::size_t n, const T* a, const T* b, T* y); // y += a.*b

// A is row-major m x n.
template <class T> void gemv_acc(std::size_t m, std::size_t n, const T* a, const T* x, T* y);   // y += A x
template <class T> void gemv_t_acc(std::size_t m, std::size_t n, const T* a, const T* x, T* y); // y += A' x
template <class T> void ger_acc(std::size_t m, std::size_t n, T* a, const T* x, const T* y);    // A += x y'

template <class T> void sgd_update(std::size_t n, T lr, const T* g, T* p);  // p -= lr*g
// Adam with bias correction; bc1 = 1-beta1^t, bc2 = 1-beta2^t.
template <class T>
void adam_update(std::size_t n, T lr, T beta1, T beta2, T eps, T bc1, T bc2,
                 const T* g, T* m, T* v, T* p);

}  // namespace sentvec::kern
