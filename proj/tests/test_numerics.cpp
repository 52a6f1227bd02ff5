#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sentvec/gradcheck.hpp"
#include "sentvec/optim.hpp"
#include "sentvec/rng.hpp"
#include "sentvec/tensor.hpp"

using namespace sentvec;

TEST_CASE("softmax matches hand-computed values") {
  auto sym = softmax(std::vector<double>{0, 0, 0});
  for (double p : sym) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  auto big = softmax(std::vector<double>{1000, 1000});
  CHECK(big[0] == doctest::Approx(0.5));
  CHECK(big[1] == doctest::Approx(0.5));
  CHECK(std::isfinite(big[0]));

  // e^x / sum e^x computed directly as the oracle.
  std::vector<double> logits{1, 2, 3};
  double z = std::exp(1.0) + std::exp(2.0) + std::exp(3.0);
  auto got = softmax(logits);
  CHECK(got[0] == doctest::Approx(std::exp(1.0) / z).epsilon(1e-12));
  CHECK(got[0] == doctest::Approx(0.09003).epsilon(1e-4));
  CHECK(got[1] == doctest::Approx(0.24473).epsilon(1e-4));
  CHECK(got[2] == doctest::Approx(0.66524).epsilon(1e-4));

  CHECK_THROWS(softmax(std::vector<double>{}));
}

TEST_CASE("softmax sums to 1 within 1e-9 across random lengths") {
  SplitMix64 rng(11);
  for (std::size_t n : {1u, 2u, 17u, 1000u, 100000u}) {
    std::vector<double> logits(n);
    for (auto& v : logits) v = (rng.next_double() - 0.5) * 200.0;
    auto p = softmax(logits);
    double s = 0;
    for (double v : p) {
      CHECK(v >= 0.0);
      s += v;
    }
    CHECK(std::fabs(s - 1.0) < 1e-9);
  }
}

TEST_CASE("sgd with decay applies lr0 * decay^epoch") {
  Tensor<float> p(1, 1), g(1, 1);
  p.data[0] = 1.0f;
  g.data[0] = 0.5f;
  std::vector<ParamRef<float>> params{{"p", &p, &g}};
  auto st = OptimState<float>::sgd_decay(0.1, 0.99);
  st.begin_epoch(0);
  optimizer_step(params, st);
  CHECK(p.data[0] == doctest::Approx(0.95f));

  // 0.0005 * 0.99^2 = 0.00049005
  auto st2 = OptimState<float>::sgd_decay(0.0005, 0.99);
  st2.begin_epoch(2);
  CHECK(st2.current_lr() == doctest::Approx(0.00049005).epsilon(1e-12));

  g.data[0] = 0.0f;
  const float before = p.data[0];
  optimizer_step(params, st);
  CHECK(p.data[0] == before);  // zero grad leaves bits alone
}

TEST_CASE("adam bias-corrected first step and zero-grad stability") {
  Tensor<double> p(1, 2), g(1, 2);
  std::vector<ParamRef<double>> params{{"p", &p, &g}};
  auto st = OptimState<double>::adam(0.001);

  g.fill(0.0);
  optimizer_step(params, st);
  CHECK(p.data[0] == 0.0);  // zero grads + zero moments: bit-identical
  CHECK(p.data[1] == 0.0);

  // Constant g = 1 at the (now) first effective step: m_hat = 1, v_hat = 1,
  // so the update magnitude is lr/(1+eps).
  auto st2 = OptimState<double>::adam(0.001);
  Tensor<double> q(1, 2), gq(1, 2);
  gq.fill(1.0);
  std::vector<ParamRef<double>> params2{{"q", &q, &gq}};
  optimizer_step(params2, st2);
  CHECK(q.data[0] == doctest::Approx(-0.001).epsilon(1e-6));
  CHECK(q.data[0] == q.data[1]);  // equal grads, equal updates
}

TEST_CASE("optimizer rejects shape mismatches") {
  Tensor<float> p(2, 2), g(1, 2);
  std::vector<ParamRef<float>> params{{"p", &p, &g}};
  auto st = OptimState<float>::sgd_decay(0.1, 0.99);
  CHECK_THROWS(optimizer_step(params, st));
}

TEST_CASE("init_params: zero scheme, determinism, uniform bound") {
  auto z = init_params<float>(3, 4, InitScheme::Zero, 9);
  for (float v : z.data) CHECK(v == 0.0f);

  auto a = init_params<float>(5, 7, InitScheme::UniformScaled, 1234);
  auto b = init_params<float>(5, 7, InitScheme::UniformScaled, 1234);
  CHECK(a.data == b.data);

  auto big = init_params<double>(300, 300, InitScheme::UniformScaled, 77);
  const double bound = std::sqrt(6.0 / 600.0);
  for (double v : big.data) CHECK(std::fabs(v) < bound);
  CHECK(big.all_finite());
}

TEST_CASE("grad_check validates and flags gradients") {
  // f(p) = p^2 at p = 3: analytic gradient 6.
  double p = 3.0;
  double analytic = 6.0;
  GradCheckGroup group{"p", &p, &analytic, 1};
  auto ok = grad_check([&] { return p * p; }, {group}, 1e-5);
  CHECK(ok.max_rel_err < 1e-8);

  double corrupted = 6.0 * 1.1;  // +10%
  GradCheckGroup bad{"p", &p, &corrupted, 1};
  auto flagged = grad_check([&] { return p * p; }, {bad}, 1e-5);
  CHECK(flagged.max_rel_err > 1e-2);

  CHECK_THROWS(grad_check([&] { return p * p; }, {group}, 1e-2));  // epsilon range
  CHECK_THROWS(grad_check([&] { return std::nan(""); }, {group}, 1e-5));
}

TEST_CASE("splitmix rng is reproducible and shuffles deterministically") {
  SplitMix64 a(5), b(5);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  std::vector<int> v1{1, 2, 3, 4, 5, 6}, v2{1, 2, 3, 4, 5, 6};
  SplitMix64 r1(9), r2(9);
  shuffle(v1, r1);
  shuffle(v2, r2);
  CHECK(v1 == v2);
}
