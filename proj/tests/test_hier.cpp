#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sentvec/gradcheck.hpp"
#include "sentvec/hier.hpp"

using namespace sentvec;
using namespace sentvec::hier;

namespace {

template <class T>
HierConfig tiny_cfg() {
  HierConfig cfg;
  cfg.sent_dim = 3;
  cfg.d1 = 4;
  cfg.d2 = 4;
  cfg.d_dec = 3;
  cfg.d_attn = 3;
  cfg.d_w = 3;
  cfg.vocab_size = 9;
  cfg.t_max = 6;
  cfg.chunk_size = 2;
  cfg.stride = 2;
  return cfg;
}

template <class T>
std::vector<std::vector<T>> toy_sentvecs(std::size_t count, std::size_t dim,
                                         std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<std::vector<T>> out(count, std::vector<T>(dim));
  for (auto& v : out)
    for (auto& x : v) x = T(rng.next_double() - 0.5);
  return out;
}

}  // namespace

TEST_CASE("chunk windows follow stride arithmetic") {
  // 20 padded slots, n = 5, s = 5: four disjoint chunks.
  auto w1 = chunk_windows(20, 5, 5);
  REQUIRE(w1.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) CHECK(w1[i].start == i * 5);

  // n = 3, s = 1 over 5 vectors: five overlapping windows.
  auto vecs = toy_sentvecs<double>(5, 2, 1);
  auto chunks = chunk(vecs, 3, 1);
  REQUIRE(chunks.size() == 5);
  for (const auto& c : chunks) CHECK(c.size() == 3);
  // Last window starts at 4, so its tail is zero-padded.
  CHECK(chunks[4][1] == std::vector<double>{0, 0});
  CHECK(chunks[4][2] == std::vector<double>{0, 0});
  CHECK(chunks[4][0] == vecs[4]);

  // n = s = 20: one chunk covering the whole paragraph.
  auto whole = chunk(toy_sentvecs<double>(20, 2, 2), 20, 20);
  CHECK(whole.size() == 1);

  CHECK_THROWS(chunk_windows(20, 0, 5));
  CHECK_THROWS(chunk_windows(20, 5, 0));
}

TEST_CASE("chunk coverage: every position lands in at least one window when n >= s") {
  for (std::size_t n = 1; n <= 6; ++n) {
    for (std::size_t s = 1; s <= n; ++s) {
      std::vector<bool> covered(20, false);
      for (auto& w : chunk_windows(20, n, s))
        for (std::size_t i = 0; i < w.size && w.start + i < 20; ++i)
          covered[w.start + i] = true;
      for (bool c : covered) CHECK(c);
    }
  }
}

TEST_CASE("attend: uniform on identical keys, exact on a single key, v=0 uniform") {
  auto p = AttnParams<double>::init(3, 4, 2, 11);
  std::vector<double> q{0.1, -0.2, 0.3, 0.5};
  std::vector<double> k1{0.7, -0.1}, k2{0.7, -0.1}, k3{0.7, -0.1};
  std::vector<const double*> keys{k1.data(), k2.data(), k3.data()};
  std::vector<double> ctx;
  AttnCache<double> cache;

  attend(p, q.data(), keys, 2, ctx, cache);
  double sum = 0;
  for (double w : cache.weights) {
    CHECK(w == doctest::Approx(1.0 / 3.0));
    sum += w;
  }
  CHECK(std::fabs(sum - 1.0) < 1e-6);
  CHECK(ctx[0] == doctest::Approx(0.7));

  std::vector<const double*> one{k1.data()};
  attend(p, q.data(), one, 2, ctx, cache);
  CHECK(cache.weights.size() == 1);
  CHECK(cache.weights[0] == 1.0);
  CHECK(ctx == k1);

  auto pz = p;
  pz.v.zero();
  std::vector<double> ka{1.0, 0.0}, kb{-1.0, 5.0};
  std::vector<const double*> mixed{ka.data(), kb.data()};
  attend(pz, q.data(), mixed, 2, ctx, cache);
  CHECK(cache.weights[0] == doctest::Approx(0.5));
  CHECK(cache.weights[1] == doctest::Approx(0.5));

  std::vector<const double*> empty;
  CHECK_THROWS(attend(p, q.data(), empty, 2, ctx, cache));
}

TEST_CASE("encode_paragraph: single sentence is deterministic; errors are raised") {
  HierModel<double> model(tiny_cfg<double>(), 42);
  auto vecs = toy_sentvecs<double>(1, 3, 5);
  auto a = model.encode_paragraph(vecs);
  auto b = model.encode_paragraph(vecs);
  CHECK(a.paragraph_vec == b.paragraph_vec);
  CHECK(a.paragraph_vec.size() == 4);
  CHECK(a.layer2_states.size() == 1);  // one valid chunk

  CHECK_THROWS(model.encode_paragraph({}));
  std::vector<std::vector<double>> zeros(2, std::vector<double>(3, 0.0));
  CHECK_THROWS(model.encode_paragraph(zeros));
  CHECK_THROWS(model.encode_paragraph(toy_sentvecs<double>(7, 3, 1)));  // > t_max
}

TEST_CASE("zero-pad neutrality: trailing zero vectors never change paragraph2vec") {
  HierModel<float> model(tiny_cfg<float>(), 314);
  auto vecs = toy_sentvecs<float>(3, 3, 9);
  auto padded = vecs;
  padded.resize(6, std::vector<float>(3, 0.0f));  // up to t_max

  auto plain = model.encode_paragraph(vecs);
  auto pad = model.encode_paragraph(padded);
  CHECK(plain.paragraph_vec == pad.paragraph_vec);  // bit-identical
  CHECK(plain.layer2_states.size() == pad.layer2_states.size());
}

TEST_CASE("attention weights sum to 1 at every encoder and decoder step") {
  HierModel<float> model(tiny_cfg<float>(), 2718);
  auto vecs = toy_sentvecs<float>(6, 3, 4);
  AttnTrace<float> trace;
  model.summarize(vecs, 8, &trace);
  CHECK(trace.encoder.size() >= 3);  // 3 chunks with n=s=2 over 6 slots
  CHECK(!trace.decoder.empty());
  for (const auto& w : trace.encoder) {
    float s = 0;
    for (float x : w) {
      CHECK(x >= 0.0f);
      s += x;
    }
    CHECK(std::fabs(s - 1.0f) < 1e-6f);
  }
  for (const auto& w : trace.decoder) {
    float s = 0;
    for (float x : w) s += x;
    CHECK(std::fabs(s - 1.0f) < 1e-6f);
  }
}

TEST_CASE("full pipeline gradient check at tiny dims") {
  HierModel<double> model(tiny_cfg<double>(), 10007);
  std::vector<HierModel<double>::Record> batch{
      {toy_sentvecs<double>(3, 3, 21), {4, 5}},
      {toy_sentvecs<double>(5, 3, 22), {6, 7, 8}},
  };
  model.compute_batch_grads(batch);
  auto report = grad_check_params(
      model, [&] { return model.batch_loss(batch); }, 1e-5);
  INFO("worst group: " << report.worst_group);
  CHECK(report.max_rel_err < 1e-4);
  CHECK(report.coords_checked > 300);
}

TEST_CASE("train_summarizer: zero lr flat loss; first loss near ln|V|") {
  HierModel<float> model(tiny_cfg<float>(), 5);
  std::vector<HierModel<float>::Record> batch{{toy_sentvecs<float>(4, 3, 31), {4, 5, 6}}};

  const double uniform = std::log(9.0);
  const double first = model.batch_loss(batch);
  CHECK(first > uniform * 0.8);
  CHECK(first < uniform * 1.2);

  auto opt = OptimState<float>::adam(0.0);
  const double l1 = model.train_step(batch, opt);
  const double l2 = model.train_step(batch, opt);
  CHECK(l1 == l2);

  std::vector<HierModel<float>::Record> empty_summary{{toy_sentvecs<float>(2, 3, 1), {}}};
  CHECK_THROWS(model.train_step(empty_summary, opt));
}

TEST_CASE("a small corpus is memorized and reproduced by greedy decoding") {
  auto cfg = tiny_cfg<float>();
  cfg.d1 = 12;
  cfg.d2 = 12;
  cfg.d_dec = 10;
  cfg.d_attn = 8;
  cfg.vocab_size = 12;
  HierModel<float> model(cfg, 8);

  std::vector<HierModel<float>::Record> batch{
      {toy_sentvecs<float>(3, 3, 41), {4, 5}},
      {toy_sentvecs<float>(4, 3, 42), {6, 7}},
      {toy_sentvecs<float>(2, 3, 43), {8, 9, 10}},
  };
  auto opt = OptimState<float>::adam(0.01);
  double loss = 1e9;
  for (int s = 0; s < 600 && loss > 0.02; ++s) loss = model.train_step(batch, opt);
  CHECK(loss < 0.05);
  for (const auto& rec : batch) CHECK(model.summarize(rec.sent_vecs, 10) == rec.summary_ids);

  auto one = model.summarize(batch[0].sent_vecs, 1);
  CHECK(one.size() <= 1);
  CHECK(model.summarize(batch[0].sent_vecs, 10) == model.summarize(batch[0].sent_vecs, 10));
}
