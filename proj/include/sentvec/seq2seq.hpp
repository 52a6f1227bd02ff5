#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sentvec/lstm.hpp"
#include "sentvec/optim.hpp"
#include "sentvec/rng.hpp"
#include "sentvec/sampler.hpp"
#include "sentvec/tensor.hpp"
#include "sentvec/text.hpp"

namespace sentvec::seq2seq {

// Final linear layer, vocab-major so a candidate's row is contiguous:
// logit_v = w.row(v) . h + b[v].
template <class T>
struct OutputProjection {
  Tensor<T> w;  // |V| x d_h
  Tensor<T> b;  // 1 x |V|
};

// Loss at one decoder position. For full softmax, dlogits covers every
// class; for sampled softmax it is aligned with [target, sampled...] of the
// candidate set. Either way dlogits = softmax(corrected logits) - onehot.
template <class T>
struct PositionLoss {
  double loss = 0;
  bool sampled = false;
  CandidateSet cands;
  std::vector<T> dlogits;
};

template <class T>
PositionLoss<T> full_softmax_loss(const OutputProjection<T>& proj, const T* hidden,
                                  int target) {
  const std::size_t v = proj.w.rows;
  const std::size_t dh = proj.w.cols;
  if (target < 0 || std::size_t(target) >= v)
    throw std::invalid_argument("full_softmax_loss: target out of range");
  std::vector<T> logits(proj.b.data);
  kern::gemv_acc(v, dh, proj.w.data.data(), hidden, logits.data());
  const T lse = log_sum_exp(logits);
  PositionLoss<T> out;
  out.loss = double(lse - logits[std::size_t(target)]);
  out.cands.target_id = target;
  out.dlogits.resize(v);
  for (std::size_t i = 0; i < v; ++i) out.dlogits[i] = std::exp(logits[i] - lse);
  out.dlogits[std::size_t(target)] -= T(1);
  return out;
}

// Sampled softmax (candidate sampling): cross-entropy over the union of the
// target class and n_samples log-uniform negatives, with each candidate's
// logit corrected by -log(expected_count). When n_samples = |V|-1 the set is
// the whole vocabulary, the corrections cancel, and the result equals full
// softmax.
template <class T>
PositionLoss<T> sampled_softmax_loss(const OutputProjection<T>& proj, const T* hidden,
                                     int target, std::size_t n_samples, SplitMix64& rng) {
  const std::size_t v = proj.w.rows;
  const std::size_t dh = proj.w.cols;
  if (n_samples < 1 || n_samples >= v)
    throw std::invalid_argument("sampled_softmax_loss: need 1 <= n_samples < |V|");

  PositionLoss<T> out;
  out.sampled = true;
  out.cands = sample_candidates(target, n_samples, v, rng);
  const std::size_t m = out.cands.size();
  std::vector<T> logits(m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t id = std::size_t(out.cands.id_at(i));
    logits[i] = kern::dot(dh, proj.w.row(id), hidden) + proj.b.data[id] -
                T(std::log(out.cands.expected_counts[i]));
  }
  const T lse = log_sum_exp(logits);
  out.loss = double(lse - logits[0]);  // target sits at index 0
  out.dlogits.resize(m);
  for (std::size_t i = 0; i < m; ++i) out.dlogits[i] = std::exp(logits[i] - lse);
  out.dlogits[0] -= T(1);
  return out;
}

// Scatters weight * dlogits into the projection grads and accumulates
// weight * W' dlogits into dh_acc.
template <class T>
void output_backward(const OutputProjection<T>& proj, OutputProjection<T>& grads,
                     const T* hidden, const PositionLoss<T>& pl, T weight, T* dh_acc) {
  const std::size_t dh = proj.w.cols;
  if (!pl.sampled) {
    std::vector<T> wd(pl.dlogits.size());
    for (std::size_t i = 0; i < wd.size(); ++i) wd[i] = weight * pl.dlogits[i];
    kern::ger_acc(proj.w.rows, dh, grads.w.data.data(), wd.data(), hidden);
    kern::axpy(wd.size(), T(1), wd.data(), grads.b.data.data());
    kern::gemv_t_acc(proj.w.rows, dh, proj.w.data.data(), wd.data(), dh_acc);
    return;
  }
  for (std::size_t i = 0; i < pl.cands.size(); ++i) {
    const std::size_t id = std::size_t(pl.cands.id_at(i));
    const T d = weight * pl.dlogits[i];
    kern::axpy(dh, d, hidden, grads.w.row(id));
    grads.b.data[id] += d;
    kern::axpy(dh, d, proj.w.row(id), dh_acc);
  }
}

struct EncDecConfig {
  std::size_t d_h = 300;   // 300 or 1024 in the experiments
  std::size_t d_w = 300;
  std::size_t vocab_size = 0;
  bool reverse_encoder_input = true;  // reversing helped long dependencies
  std::size_t max_len = 30;
  std::size_t n_samples = 512;  // 0 = train with full softmax
  bool freeze_embeddings = false;
  double grad_clip = 5.0;
};

// One (source ids, target ids) training pair. Target may carry trailing PAD
// from fixed-width batching; PAD positions are excluded from the loss.
using IdPair = std::pair<std::vector<int>, std::vector<int>>;

// The paraphrase encoder-decoder. The encoder's final hidden state is the
// sentence vector; the decoder is conditioned on the encoder's final (h, c)
// and nothing else -- there is deliberately no attention path, so every bit
// of information crosses through that single vector.
template <class T>
class EncoderDecoderModel {
 public:
  EncDecConfig cfg;
  Tensor<T> embedding;  // |V| x d_w, shared by encoder and decoder
  LstmParams<T> encoder;
  LstmParams<T> decoder;
  OutputProjection<T> proj;

  EncoderDecoderModel(EncDecConfig config, std::uint64_t seed)
      : EncoderDecoderModel(std::move(config), nullptr, seed) {}

  EncoderDecoderModel(EncDecConfig config, const text::EmbeddingTable* pretrained,
                      std::uint64_t seed)
      : cfg(std::move(config)) {
    if (cfg.vocab_size < 5) throw std::invalid_argument("EncoderDecoderModel: vocab too small");
    SplitMix64 seeds(seed);
    if (pretrained) {
      if (pretrained->matrix.rows != cfg.vocab_size || pretrained->width != cfg.d_w)
        throw std::invalid_argument("EncoderDecoderModel: embedding table shape mismatch");
      embedding = pretrained->matrix.template cast<T>();
      seeds.next_u64();
    } else {
      embedding = init_params<T>(cfg.vocab_size, cfg.d_w, InitScheme::UniformScaled,
                                 seeds.next_u64());
      for (std::size_t j = 0; j < cfg.d_w; ++j) embedding.at(text::kPad, j) = T(0);
    }
    encoder = LstmParams<T>::init(cfg.d_w, cfg.d_h, seeds.next_u64());
    decoder = LstmParams<T>::init(cfg.d_w, cfg.d_h, seeds.next_u64());
    proj.w = init_params<T>(cfg.vocab_size, cfg.d_h, InitScheme::UniformScaled,
                            seeds.next_u64());
    proj.b = Tensor<T>(1, cfg.vocab_size);
    grads_ = make_grads();
  }

  std::vector<ParamRef<T>> params() {
    return {
        {"embedding", &embedding, &grads_.embedding},
        {"encoder.w", &encoder.w, &grads_.encoder.w},
        {"encoder.u", &encoder.u, &grads_.encoder.u},
        {"encoder.b", &encoder.b, &grads_.encoder.b},
        {"decoder.w", &decoder.w, &grads_.decoder.w},
        {"decoder.u", &decoder.u, &grads_.decoder.u},
        {"decoder.b", &decoder.b, &grads_.decoder.b},
        {"proj.w", &proj.w, &grads_.proj.w},
        {"proj.b", &proj.b, &grads_.proj.b},
    };
  }

  std::vector<ParamRef<T>> trainable_params() {
    auto all = params();
    if (cfg.freeze_embeddings) all.erase(all.begin());
    return all;
  }

  struct EncodeResult {
    std::vector<T> h;  // sent2vec
    std::vector<T> c;
  };

  EncodeResult encode(const std::vector<int>& token_ids) const {
    std::vector<int> ids = clip_ids(token_ids);
    if (ids.empty()) throw std::invalid_argument("encode: empty sentence");
    for (int id : ids) {
      if (id == text::kPad) throw std::invalid_argument("encode: PAD in encoder input");
      check_id(id);
    }
    if (cfg.reverse_encoder_input) std::reverse(ids.begin(), ids.end());

    EncodeResult r;
    r.h.assign(cfg.d_h, T(0));
    r.c.assign(cfg.d_h, T(0));
    LstmStepCache<T> cache;
    for (int id : ids) {
      lstm_step(encoder, embedding.row(std::size_t(id)), r.h.data(), r.c.data(), cache);
      r.h = cache.h;
      r.c = cache.c;
    }
    return r;
  }

  // Forward + backward for a batch; gradients accumulate into the model's
  // grad tensors (zeroed first). Returns mean loss per non-PAD target token.
  double compute_batch_grads(const std::vector<IdPair>& batch, std::uint64_t sampler_seed) {
    return run_batch(batch, sampler_seed, true);
  }

  // Forward only, same sampling decisions as compute_batch_grads for the
  // same seed; this is the loss_fn handed to the finite-difference harness.
  double batch_loss(const std::vector<IdPair>& batch, std::uint64_t sampler_seed) {
    return run_batch(batch, sampler_seed, false);
  }

  double train_step(const std::vector<IdPair>& batch, OptimState<T>& opt,
                    std::uint64_t sampler_seed) {
    const double loss = compute_batch_grads(batch, sampler_seed);
    auto trainable = trainable_params();
    clip_global_norm(trainable, cfg.grad_clip);
    optimizer_step(trainable, opt);
    return loss;
  }

  // Greedy decoding from BOS until EOS or max_len tokens. PAD and UNK are
  // never emitted (their logits are pinned to -inf).
  std::vector<int> generate(const std::vector<int>& src_ids, std::size_t max_len) const {
    EncodeResult state = encode(src_ids);
    std::vector<int> out;
    int prev = text::kBos;
    LstmStepCache<T> cache;
    std::vector<T> logits;
    for (std::size_t t = 0; t < max_len; ++t) {
      lstm_step(decoder, embedding.row(std::size_t(prev)), state.h.data(), state.c.data(),
                cache);
      state.h = cache.h;
      state.c = cache.c;
      logits.assign(proj.b.data.begin(), proj.b.data.end());
      kern::gemv_acc(proj.w.rows, proj.w.cols, proj.w.data.data(), state.h.data(),
                     logits.data());
      logits[text::kPad] = -std::numeric_limits<T>::infinity();
      logits[text::kUnk] = -std::numeric_limits<T>::infinity();
      std::size_t best = 0;
      for (std::size_t i = 1; i < logits.size(); ++i)
        if (logits[i] > logits[best]) best = i;
      if (int(best) == text::kEos) break;
      out.push_back(int(best));
      prev = int(best);
    }
    return out;
  }

  void zero_grads() {
    auto p = params();
    sentvec::zero_grads(p);
  }

 private:
  struct Grads {
    Tensor<T> embedding;
    LstmParams<T> encoder;
    LstmParams<T> decoder;
    OutputProjection<T> proj;
  };

  Grads grads_;

  Grads make_grads() const {
    Grads g;
    g.embedding = Tensor<T>(cfg.vocab_size, cfg.d_w);
    g.encoder = encoder.shaped_zero();
    g.decoder = decoder.shaped_zero();
    g.proj.w = Tensor<T>(cfg.vocab_size, cfg.d_h);
    g.proj.b = Tensor<T>(1, cfg.vocab_size);
    return g;
  }

  void check_id(int id) const {
    if (id < 0 || std::size_t(id) >= cfg.vocab_size)
      throw std::invalid_argument("token id " + std::to_string(id) + " out of range");
  }

  std::vector<int> clip_ids(const std::vector<int>& ids) const {
    if (ids.size() <= cfg.max_len) return ids;
    return std::vector<int>(ids.begin(), ids.begin() + std::ptrdiff_t(cfg.max_len));
  }

  // Strips trailing PAD, truncates to max_len. The result is the clean
  // target token run; empty means the pair is unusable.
  std::vector<int> clean_target(const std::vector<int>& ids) const {
    std::size_t end = ids.size();
    while (end > 0 && ids[end - 1] == text::kPad) --end;
    for (std::size_t i = 0; i < end; ++i)
      if (ids[i] == text::kPad)
        throw std::invalid_argument("train_step: interior PAD in target");
    std::vector<int> out(ids.begin(), ids.begin() + std::ptrdiff_t(end));
    if (out.size() > cfg.max_len) out.resize(cfg.max_len);
    return out;
  }

  double run_batch(const std::vector<IdPair>& batch, std::uint64_t sampler_seed,
                   bool with_grads) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");

    // Per-token normalization needs the total count up front.
    std::size_t total_targets = 0;
    std::vector<std::vector<int>> targets(batch.size());
    for (std::size_t e = 0; e < batch.size(); ++e) {
      targets[e] = clean_target(batch[e].second);
      if (targets[e].empty()) throw std::invalid_argument("train_step: all-PAD target");
      total_targets += targets[e].size() + 1;  // +1 for EOS
    }

    if (with_grads) zero_grads();
    const T weight = T(1) / T(total_targets);
    double total_loss = 0;

    for (std::size_t e = 0; e < batch.size(); ++e)
      total_loss += run_example(batch[e].first, targets[e], mix_seed(sampler_seed, e), weight,
                                with_grads);
    return total_loss / double(total_targets);
  }

  static std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
    SplitMix64 r(base + 0x9e3779b97f4a7c15ull * (salt + 1));
    return r.next_u64();
  }

  double run_example(const std::vector<int>& src_in, const std::vector<int>& tgt,
                     std::uint64_t seed, T weight, bool with_grads) {
    std::vector<int> src = clip_ids(src_in);
    if (src.empty()) throw std::invalid_argument("train_step: empty source sentence");
    for (int id : src) {
      if (id == text::kPad) throw std::invalid_argument("train_step: PAD in encoder input");
      check_id(id);
    }
    for (int id : tgt) check_id(id);
    if (cfg.reverse_encoder_input) std::reverse(src.begin(), src.end());

    // Encoder forward.
    const std::size_t hn = cfg.d_h;
    std::vector<LstmStepCache<T>> enc(src.size());
    {
      std::vector<T> h(hn, T(0)), c(hn, T(0));
      for (std::size_t t = 0; t < src.size(); ++t) {
        lstm_step(encoder, embedding.row(std::size_t(src[t])), h.data(), c.data(), enc[t]);
        h = enc[t].h;
        c = enc[t].c;
      }
    }
    const std::vector<T>& enc_h = enc.back().h;
    const std::vector<T>& enc_c = enc.back().c;

    // Decoder forward, teacher forcing: inputs [BOS t1..tk], targets
    // [t1..tk EOS], initial state = encoder finals.
    std::vector<int> dec_in;
    std::vector<int> dec_tgt;
    dec_in.reserve(tgt.size() + 1);
    dec_tgt.reserve(tgt.size() + 1);
    dec_in.push_back(text::kBos);
    for (int id : tgt) dec_in.push_back(id);
    for (int id : tgt) dec_tgt.push_back(id);
    dec_tgt.push_back(text::kEos);

    const std::size_t steps = dec_in.size();
    std::vector<LstmStepCache<T>> dec(steps);
    std::vector<PositionLoss<T>> losses(steps);
    SplitMix64 rng(seed);
    double loss = 0;
    {
      const T* h = enc_h.data();
      const T* c = enc_c.data();
      for (std::size_t t = 0; t < steps; ++t) {
        lstm_step(decoder, embedding.row(std::size_t(dec_in[t])), h, c, dec[t]);
        h = dec[t].h.data();
        c = dec[t].c.data();
        losses[t] = cfg.n_samples == 0
                        ? full_softmax_loss(proj, h, dec_tgt[t])
                        : sampled_softmax_loss(proj, h, dec_tgt[t], cfg.n_samples, rng);
        loss += losses[t].loss;
      }
    }
    if (!with_grads) return loss;

    // Decoder backward.
    std::vector<T> dh(hn, T(0)), dc(hn, T(0)), dh_prev(hn), dc_prev(hn);
    for (std::size_t t = steps; t-- > 0;) {
      output_backward(proj, grads_.proj, dec[t].h.data(), losses[t], weight, dh.data());
      const T* h_prev = t == 0 ? enc_h.data() : dec[t - 1].h.data();
      const T* c_prev = t == 0 ? enc_c.data() : dec[t - 1].c.data();
      lstm_step_backward(decoder, {&grads_.decoder.w, &grads_.decoder.u, &grads_.decoder.b},
                         embedding.row(std::size_t(dec_in[t])), h_prev, c_prev, dec[t],
                         dh.data(), dc.data(), grads_.embedding.row(std::size_t(dec_in[t])),
                         dh_prev.data(), dc_prev.data());
      dh.swap(dh_prev);
      dc.swap(dc_prev);
    }

    // dh/dc now sit on the encoder finals; continue down the encoder.
    for (std::size_t t = src.size(); t-- > 0;) {
      const T* h_prev = t == 0 ? zeros().data() : enc[t - 1].h.data();
      const T* c_prev = t == 0 ? zeros().data() : enc[t - 1].c.data();
      lstm_step_backward(encoder, {&grads_.encoder.w, &grads_.encoder.u, &grads_.encoder.b},
                         embedding.row(std::size_t(src[t])), h_prev, c_prev, enc[t], dh.data(),
                         dc.data(), grads_.embedding.row(std::size_t(src[t])), dh_prev.data(),
                         dc_prev.data());
      dh.swap(dh_prev);
      dc.swap(dc_prev);
    }
    return loss;
  }

  const std::vector<T>& zeros() const {
    static thread_local std::vector<T> z;
    if (z.size() < cfg.d_h) z.assign(cfg.d_h, T(0));
    return z;
  }
};

}  // namespace sentvec::seq2seq
