#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sentvec/gradcheck.hpp"
#include "sentvec/sampler.hpp"
#include "sentvec/seq2seq.hpp"

using namespace sentvec;
using namespace sentvec::seq2seq;

namespace {

template <class T>
EncoderDecoderModel<T> tiny_model(std::size_t vocab, std::size_t d_h, std::size_t d_w,
                                  std::size_t n_samples, std::uint64_t seed,
                                  bool reverse = true) {
  EncDecConfig cfg;
  cfg.vocab_size = vocab;
  cfg.d_h = d_h;
  cfg.d_w = d_w;
  cfg.n_samples = n_samples;
  cfg.reverse_encoder_input = reverse;
  return EncoderDecoderModel<T>(cfg, seed);
}

}  // namespace

TEST_CASE("lstm_step: zero parameters give a zero hidden state") {
  LstmParams<double> p;
  p.d_in = 3;
  p.d_h = 4;
  p.w = Tensor<double>(16, 3);
  p.u = Tensor<double>(16, 4);
  p.b = Tensor<double>(1, 16);
  std::vector<double> x{0.5, -1.0, 2.0}, h(4, 0.0), c(4, 0.0);
  LstmStepCache<double> out;
  lstm_step(p, x.data(), h.data(), c.data(), out);
  for (double v : out.h) CHECK(v == 0.0);  // o = 0.5, tanh(c)=0
  for (double v : out.c) CHECK(v == 0.0);
  for (double v : out.h) CHECK(std::fabs(v) < 1.0);
}

TEST_CASE("lstm_step: saturated-off input gate keeps the cell near zero") {
  auto p = LstmParams<double>::init(2, 3, 123);
  // Kill the input-gate path: zero weights, strongly negative bias.
  for (std::size_t r = 0; r < 3; ++r) {
    std::fill(p.w.row(r), p.w.row(r) + 2, 0.0);
    std::fill(p.u.row(r), p.u.row(r) + 3, 0.0);
    p.b.data[r] = -50.0;
  }
  std::vector<double> x{1.0, -2.0}, h(3, 0.0), c(3, 0.0);
  LstmStepCache<double> out;
  lstm_step(p, x.data(), h.data(), c.data(), out);
  for (double v : out.c) CHECK(std::fabs(v) < 1e-20);  // i ~ sigmoid(-50)
  for (double v : out.h) CHECK(std::fabs(v) < 1e-20);
}

TEST_CASE("lstm_step rejects non-finite input") {
  auto p = LstmParams<double>::init(2, 2, 5);
  std::vector<double> x{std::nan(""), 0.0}, h(2, 0.0), c(2, 0.0);
  LstmStepCache<double> out;
  CHECK_THROWS(lstm_step(p, x.data(), h.data(), c.data(), out));
}

TEST_CASE("single lstm step + full softmax passes the gradient check") {
  auto model = tiny_model<double>(7, 5, 4, 0, 99);
  std::vector<IdPair> batch{{{4}, {5}}};
  model.compute_batch_grads(batch, 1);
  auto report = grad_check_params(
      model, [&] { return model.batch_loss(batch, 1); }, 1e-5);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("end-to-end gradient check: 2-token encoder, 2-token decoder, d_h=8") {
  auto model = tiny_model<double>(12, 8, 6, 0, 2024);
  std::vector<IdPair> batch{{{4, 7}, {5, 9}}, {{6, 8, 10}, {11, 4}}};
  model.compute_batch_grads(batch, 3);
  auto report = grad_check_params(
      model, [&] { return model.batch_loss(batch, 3); }, 1e-5);
  INFO("worst group: " << report.worst_group);
  CHECK(report.max_rel_err < 1e-4);
  CHECK(report.coords_checked > 500);  // embeddings included
}

TEST_CASE("sampled-softmax path also passes the gradient check at fixed seed") {
  auto model = tiny_model<double>(12, 6, 5, 4, 77);
  std::vector<IdPair> batch{{{4, 5}, {6, 7}}};
  model.compute_batch_grads(batch, 11);
  auto report = grad_check_params(
      model, [&] { return model.batch_loss(batch, 11); }, 1e-5);
  CHECK(report.max_rel_err < 1e-4);
}

TEST_CASE("full-coverage sampled softmax equals full softmax within 1e-6") {
  auto model = tiny_model<double>(5, 4, 3, 0, 31);
  std::vector<double> hidden{0.3, -0.2, 0.8, 0.1};
  for (int target = 0; target < 5; ++target) {
    SplitMix64 rng(9);
    auto sampled = sampled_softmax_loss(model.proj, hidden.data(), target, 4, rng);
    auto full = full_softmax_loss(model.proj, hidden.data(), target);
    CHECK(sampled.loss == doctest::Approx(full.loss).epsilon(1e-6));
    CHECK(sampled.cands.sampled_ids.size() == 4);
    for (std::size_t i = 0; i < sampled.cands.size(); ++i)
      CHECK(sampled.cands.expected_counts[i] == 1.0);
  }
}

TEST_CASE("uniform zero logits with equal counts give loss = ln(m)") {
  EncDecConfig cfg;
  cfg.vocab_size = 6;
  cfg.d_h = 4;
  cfg.d_w = 3;
  EncoderDecoderModel<double> model(cfg, 7);
  model.proj.w.zero();
  model.proj.b.zero();
  std::vector<double> hidden{1.0, 2.0, 3.0, 4.0};
  SplitMix64 rng(5);
  auto pl = sampled_softmax_loss(model.proj, hidden.data(), 2, 5, rng);  // full coverage
  CHECK(pl.loss == doctest::Approx(std::log(6.0)).epsilon(1e-12));
}

TEST_CASE("sampler empirical distribution matches the closed form within 3 sigma") {
  const std::size_t vocab = 50;
  const std::size_t draws = 1000000;
  std::vector<double> counts(vocab, 0.0);
  SplitMix64 rng(20240809);
  for (std::size_t i = 0; i < draws; ++i) counts[std::size_t(log_uniform_draw(rng, vocab))] += 1;

  double total_q = 0;
  for (std::size_t r = 0; r < vocab; ++r) {
    const double q = log_uniform_prob(int(r), vocab);
    total_q += q;
    const double sigma = std::sqrt(q * (1 - q) * double(draws));
    CHECK(std::fabs(counts[r] - q * double(draws)) <= 3.0 * sigma);
  }
  CHECK(total_q == doctest::Approx(1.0).epsilon(1e-12));  // probabilities sum to 1
}

TEST_CASE("sample_candidates excludes the target and validates n_samples") {
  SplitMix64 rng(3);
  auto set = sample_candidates(2, 10, 100, rng);
  CHECK(set.sampled_ids.size() == 10);
  for (int id : set.sampled_ids) CHECK(id != 2);
  std::set<int> uniq(set.sampled_ids.begin(), set.sampled_ids.end());
  CHECK(uniq.size() == 10);
  CHECK(set.expected_counts[0] == 1.0);  // target always present

  CHECK_THROWS(sample_candidates(0, 5, 5, rng));   // n_samples >= |V|
  CHECK_THROWS(sample_candidates(0, 100, 5, rng));
}

TEST_CASE("encode: single step, palindrome reversal, determinism, errors") {
  auto model = tiny_model<float>(9, 6, 4, 0, 55);

  // One token: encode equals a single lstm_step from zeros.
  auto r = model.encode({4});
  std::vector<float> h0(6, 0.0f), c0(6, 0.0f);
  LstmStepCache<float> step;
  lstm_step(model.encoder, model.embedding.row(4), h0.data(), c0.data(), step);
  CHECK(r.h == step.h);
  CHECK(r.c == step.c);

  // Palindrome input: reversal cannot matter.
  auto rev_on = tiny_model<float>(9, 6, 4, 0, 55, true);
  auto rev_off = tiny_model<float>(9, 6, 4, 0, 55, false);
  std::vector<int> pal{4, 5, 6, 5, 4};
  CHECK(rev_on.encode(pal).h == rev_off.encode(pal).h);
  // Non-palindrome: they should differ somewhere.
  CHECK(rev_on.encode({4, 5, 6}).h != rev_off.encode({4, 5, 6}).h);

  CHECK(model.encode({4, 5}).h == model.encode({4, 5}).h);
  CHECK_THROWS(model.encode({}));
  CHECK_THROWS(model.encode({text::kPad, 4}));
}

TEST_CASE("train_step: appending PAD targets leaves the mean loss unchanged") {
  auto a = tiny_model<float>(10, 8, 5, 0, 13);
  auto b = tiny_model<float>(10, 8, 5, 0, 13);
  std::vector<IdPair> batch{{{4, 5}, {6, 7}}, {{5, 6}, {8}}};
  std::vector<IdPair> padded = batch;
  padded[0].second.push_back(text::kPad);
  padded[1].second.insert(padded[1].second.end(), 3, text::kPad);

  auto opt_a = OptimState<float>::adam(0.01);
  auto opt_b = OptimState<float>::adam(0.01);
  const double la = a.train_step(batch, opt_a, 5);
  const double lb = b.train_step(padded, opt_b, 5);
  CHECK(std::fabs(la - lb) < 1e-9);
  CHECK(a.proj.w.data == b.proj.w.data);  // identical updates too

  std::vector<IdPair> all_pad{{{4}, {text::kPad, text::kPad}}};
  CHECK_THROWS(a.train_step(all_pad, opt_a, 5));
  CHECK_THROWS(a.train_step({}, opt_a, 5));
}

TEST_CASE("train_step: zero learning rate leaves parameters and loss constant") {
  auto model = tiny_model<float>(10, 8, 5, 0, 17);
  std::vector<IdPair> batch{{{4, 5, 6}, {7, 8}}};
  auto before = model.proj.w.data;
  auto emb_before = model.embedding.data;
  auto opt = OptimState<float>::sgd_decay(0.0, 0.99);
  const double l1 = model.train_step(batch, opt, 1);
  const double l2 = model.train_step(batch, opt, 1);
  CHECK(model.proj.w.data == before);
  CHECK(model.embedding.data == emb_before);
  CHECK(l1 == l2);
}

TEST_CASE("first-step loss sits near ln|V| for a random init") {
  auto model = tiny_model<float>(40, 16, 8, 0, 21);
  std::vector<IdPair> batch{{{4, 5, 6, 7}, {8, 9, 10}}, {{11, 12}, {13, 14, 15}}};
  const double loss = model.batch_loss(batch, 2);
  const double uniform = std::log(40.0);
  CHECK(loss > uniform * 0.8);
  CHECK(loss < uniform * 1.2);
}

TEST_CASE("fixed seeds give an identical loss trajectory") {
  std::vector<IdPair> batch{{{4, 5}, {6, 7}}, {{7, 6}, {5, 4}}};
  std::vector<double> t1, t2;
  for (int run = 0; run < 2; ++run) {
    auto model = tiny_model<float>(10, 8, 5, 4, 99);
    auto opt = OptimState<float>::adam(0.01);
    auto& tr = run == 0 ? t1 : t2;
    for (int s = 0; s < 5; ++s) tr.push_back(model.train_step(batch, opt, 100 + s));
  }
  CHECK(t1 == t2);
}

TEST_CASE("one pair is memorized within 500 steps at d_h=32") {
  auto model = tiny_model<float>(20, 32, 12, 0, 3);
  std::vector<int> src{4, 5, 6, 7}, tgt{8, 9, 10, 11};
  std::vector<IdPair> batch{{src, tgt}};
  auto opt = OptimState<float>::adam(0.01);
  double loss = 1e9;
  for (int s = 0; s < 500 && loss >= 0.05; ++s) loss = model.train_step(batch, opt, s);
  CHECK(loss < 0.05);
  CHECK(model.generate(src, 10) == tgt);  // greedy reconstruction
}

TEST_CASE("generate respects max_len and never emits PAD/UNK") {
  auto model = tiny_model<float>(15, 8, 5, 0, 1);
  auto one = model.generate({4, 5}, 1);
  CHECK(one.size() <= 1);
  auto out = model.generate({4, 5, 6}, 30);
  for (int id : out) {
    CHECK(id != text::kPad);
    CHECK(id != text::kUnk);
  }
  CHECK(out.size() <= 30);
}

TEST_CASE("the decoder has no attention path: parameter set is closed") {
  auto model = tiny_model<float>(10, 8, 5, 0, 2);
  const std::vector<std::string> expected{"embedding", "encoder.w", "encoder.u", "encoder.b",
                                          "decoder.w", "decoder.u", "decoder.b", "proj.w",
                                          "proj.b"};
  auto params = model.params();
  REQUIRE(params.size() == expected.size());
  for (std::size_t i = 0; i < params.size(); ++i) CHECK(params[i].name == expected[i]);
}

TEST_CASE("forget-gate bias initializes to 1") {
  auto p = LstmParams<float>::init(4, 6, 8);
  for (std::size_t j = 0; j < 6; ++j) CHECK(p.b.data[6 + j] == 1.0f);
  for (std::size_t j = 0; j < 6; ++j) CHECK(p.b.data[j] == 0.0f);
}
