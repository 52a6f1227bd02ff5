#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "sentvec/lstm.hpp"
#include "sentvec/optim.hpp"
#include "sentvec/rng.hpp"
#include "sentvec/seq2seq.hpp"
#include "sentvec/tensor.hpp"
#include "sentvec/text.hpp"

namespace sentvec::hier {

// Strided windows over a padded sequence of `count` slots: [i*s, i*s + n)
// for i = 0, 1, ... while i*s < count. Positions past the end are zero-pad.
struct ChunkWindow {
  std::size_t start = 0;
  std::size_t size = 0;  // window length n; may reach past count (padded)
};

inline std::vector<ChunkWindow> chunk_windows(std::size_t count, std::size_t n,
                                              std::size_t s) {
  if (n < 1 || s < 1) throw std::invalid_argument("chunk_windows: n and s must be >= 1");
  std::vector<ChunkWindow> out;
  for (std::size_t start = 0; start < count; start += s) out.push_back({start, n});
  return out;
}

// Materialized form of the spec'd chunk operation: windows of the input
// vectors, zero-padded to length n where they run past the end.
template <class T>
std::vector<std::vector<std::vector<T>>> chunk(const std::vector<std::vector<T>>& vectors,
                                               std::size_t n, std::size_t s) {
  std::vector<std::vector<std::vector<T>>> chunks;
  if (vectors.empty()) return chunks;
  const std::size_t width = vectors[0].size();
  for (const auto& w : chunk_windows(vectors.size(), n, s)) {
    std::vector<std::vector<T>> one;
    for (std::size_t i = 0; i < w.size; ++i) {
      const std::size_t pos = w.start + i;
      one.push_back(pos < vectors.size() ? vectors[pos] : std::vector<T>(width, T(0)));
    }
    chunks.push_back(std::move(one));
  }
  return chunks;
}

// Additive (Bahdanau-style) attention: e_i = v . tanh(Ws q + Uh k_i),
// weights = softmax(e), context = sum_i weights_i k_i.
template <class T>
struct AttnParams {
  Tensor<T> w_s;  // d_a x d_q
  Tensor<T> u_h;  // d_a x d_k
  Tensor<T> v;    // 1 x d_a

  static AttnParams init(std::size_t d_a, std::size_t d_q, std::size_t d_k,
                         std::uint64_t seed) {
    AttnParams p;
    p.w_s = init_params<T>(d_a, d_q, InitScheme::UniformScaled, seed);
    p.u_h = init_params<T>(d_a, d_k, InitScheme::UniformScaled, seed + 1);
    p.v = init_params<T>(1, d_a, InitScheme::UniformScaled, seed + 2);
    return p;
  }

  AttnParams shaped_zero() const {
    AttnParams g;
    g.w_s = Tensor<T>(w_s.rows, w_s.cols);
    g.u_h = Tensor<T>(u_h.rows, u_h.cols);
    g.v = Tensor<T>(1, v.cols);
    return g;
  }
};

template <class T>
struct AttnCache {
  std::vector<T> weights;                // one per key, sums to 1
  std::vector<std::vector<T>> tanh_pre;  // tanh(Ws q + Uh k_i), d_a each
};

template <class T>
void attend(const AttnParams<T>& p, const T* query, const std::vector<const T*>& keys,
            std::size_t d_k, std::vector<T>& context, AttnCache<T>& cache) {
  if (keys.empty()) throw std::invalid_argument("attend: empty key list");
  const std::size_t d_a = p.v.cols;

  std::vector<T> wq(d_a, T(0));
  kern::gemv_acc(d_a, p.w_s.cols, p.w_s.data.data(), query, wq.data());

  std::vector<T> scores(keys.size());
  cache.tanh_pre.assign(keys.size(), {});
  for (std::size_t i = 0; i < keys.size(); ++i) {
    std::vector<T> pre = wq;
    kern::gemv_acc(d_a, d_k, p.u_h.data.data(), keys[i], pre.data());
    for (auto& x : pre) x = std::tanh(x);
    scores[i] = kern::dot(d_a, p.v.data.data(), pre.data());
    cache.tanh_pre[i] = std::move(pre);
  }
  cache.weights = softmax(scores);

  context.assign(d_k, T(0));
  for (std::size_t i = 0; i < keys.size(); ++i)
    kern::axpy(d_k, cache.weights[i], keys[i], context.data());
}

// dcontext flows back to the keys (two paths: the convex combination and
// the scores), the query, and the attention parameters. dkeys_acc[i] and
// dquery_acc are accumulated into.
template <class T>
void attend_backward(const AttnParams<T>& p, AttnParams<T>& grads, const T* query,
                     const std::vector<const T*>& keys, std::size_t d_k,
                     const AttnCache<T>& cache, const T* dcontext,
                     const std::vector<T*>& dkeys_acc, T* dquery_acc) {
  const std::size_t d_a = p.v.cols;
  const std::size_t m = keys.size();

  // Through the weighted sum.
  std::vector<T> da(m);
  for (std::size_t i = 0; i < m; ++i) {
    da[i] = kern::dot(d_k, dcontext, keys[i]);
    kern::axpy(d_k, cache.weights[i], dcontext, dkeys_acc[i]);
  }

  // Through the softmax: de_i = a_i (da_i - sum_j a_j da_j).
  T mixed = 0;
  for (std::size_t i = 0; i < m; ++i) mixed += cache.weights[i] * da[i];
  std::vector<T> dpre(d_a);
  std::vector<T> dpre_sum(d_a, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    const T de = cache.weights[i] * (da[i] - mixed);
    const auto& t = cache.tanh_pre[i];
    kern::axpy(d_a, de, t.data(), grads.v.data.data());
    for (std::size_t j = 0; j < d_a; ++j)
      dpre[j] = de * p.v.data[j] * (T(1) - t[j] * t[j]);
    kern::ger_acc(d_a, d_k, grads.u_h.data.data(), dpre.data(), keys[i]);
    kern::gemv_t_acc(d_a, d_k, p.u_h.data.data(), dpre.data(), dkeys_acc[i]);
    kern::axpy(d_a, T(1), dpre.data(), dpre_sum.data());
  }
  kern::ger_acc(d_a, p.w_s.cols, grads.w_s.data.data(), dpre_sum.data(), query);
  kern::gemv_t_acc(d_a, p.w_s.cols, p.w_s.data.data(), dpre_sum.data(), dquery_acc);
}

struct HierConfig {
  std::size_t sent_dim = 1024;  // width of incoming sentence vectors
  std::size_t d1 = 1024;        // chunk-filter LSTM units
  std::size_t d2 = 1024;        // sequence LSTM units; paragraph2vec width
  std::size_t d_dec = 256;      // generation LSTM units
  std::size_t d_attn = 256;
  std::size_t d_w = 300;  // summary-side embedding width
  std::size_t vocab_size = 0;
  std::size_t t_max = 20;
  std::size_t chunk_size = 5;  // n
  std::size_t stride = 5;      // s
  std::size_t max_summary_len = 30;
  double grad_clip = 5.0;
};

// Attention weight vectors recorded during a forward pass, one entry per
// attention application. Each must sum to 1.
template <class T>
struct AttnTrace {
  std::vector<std::vector<T>> encoder;
  std::vector<std::vector<T>> decoder;
};

// Hierarchical paragraph encoder + summary decoder. Layer 1 filters each
// chunk of sentence vectors down to a feature; layer 2 runs over chunk
// features with attention; the final layer-2 hidden state is paragraph2vec.
// A zero sentence vector marks padding; layer 1 skips those steps, which is
// what makes padded and unpadded paragraphs encode identically.
template <class T>
class HierModel {
 public:
  HierConfig cfg;
  LstmParams<T> layer1;       // d_in = sent_dim
  LstmParams<T> layer2;       // d_in = d1 (chunk feature) + d1 (context)
  AttnParams<T> attn_enc;     // q: layer-2 state (d2), k: chunk features (d1)
  AttnParams<T> attn_dec;     // q: decoder state (d_dec), k: layer-2 states (d2)
  Tensor<T> dec_init_w;       // d_dec x d2
  Tensor<T> dec_init_b;       // 1 x d_dec
  Tensor<T> embedding;        // |V| x d_w (summary vocabulary)
  LstmParams<T> decoder;      // d_in = d_w + d2 (token embedding + context)
  seq2seq::OutputProjection<T> proj;

  HierModel(HierConfig config, std::uint64_t seed) : cfg(std::move(config)) {
    if (cfg.vocab_size < 5) throw std::invalid_argument("HierModel: vocab too small");
    if (cfg.chunk_size < 1 || cfg.stride < 1)
      throw std::invalid_argument("HierModel: chunk_size and stride must be >= 1");
    SplitMix64 seeds(seed);
    layer1 = LstmParams<T>::init(cfg.sent_dim, cfg.d1, seeds.next_u64());
    layer2 = LstmParams<T>::init(2 * cfg.d1, cfg.d2, seeds.next_u64());
    attn_enc = AttnParams<T>::init(cfg.d_attn, cfg.d2, cfg.d1, seeds.next_u64());
    attn_dec = AttnParams<T>::init(cfg.d_attn, cfg.d_dec, cfg.d2, seeds.next_u64());
    dec_init_w = init_params<T>(cfg.d_dec, cfg.d2, InitScheme::UniformScaled, seeds.next_u64());
    dec_init_b = Tensor<T>(1, cfg.d_dec);
    embedding = init_params<T>(cfg.vocab_size, cfg.d_w, InitScheme::UniformScaled,
                               seeds.next_u64());
    for (std::size_t j = 0; j < cfg.d_w; ++j) embedding.at(text::kPad, j) = T(0);
    decoder = LstmParams<T>::init(cfg.d_w + cfg.d2, cfg.d_dec, seeds.next_u64());
    proj.w = init_params<T>(cfg.vocab_size, cfg.d_dec, InitScheme::UniformScaled,
                            seeds.next_u64());
    proj.b = Tensor<T>(1, cfg.vocab_size);
    grads_ = make_grads();
  }

  std::vector<ParamRef<T>> params() {
    return {
        {"layer1.w", &layer1.w, &grads_.layer1.w},
        {"layer1.u", &layer1.u, &grads_.layer1.u},
        {"layer1.b", &layer1.b, &grads_.layer1.b},
        {"layer2.w", &layer2.w, &grads_.layer2.w},
        {"layer2.u", &layer2.u, &grads_.layer2.u},
        {"layer2.b", &layer2.b, &grads_.layer2.b},
        {"attn_enc.w_s", &attn_enc.w_s, &grads_.attn_enc.w_s},
        {"attn_enc.u_h", &attn_enc.u_h, &grads_.attn_enc.u_h},
        {"attn_enc.v", &attn_enc.v, &grads_.attn_enc.v},
        {"attn_dec.w_s", &attn_dec.w_s, &grads_.attn_dec.w_s},
        {"attn_dec.u_h", &attn_dec.u_h, &grads_.attn_dec.u_h},
        {"attn_dec.v", &attn_dec.v, &grads_.attn_dec.v},
        {"dec_init.w", &dec_init_w, &grads_.dec_init_w},
        {"dec_init.b", &dec_init_b, &grads_.dec_init_b},
        {"embedding", &embedding, &grads_.embedding},
        {"decoder.w", &decoder.w, &grads_.decoder.w},
        {"decoder.u", &decoder.u, &grads_.decoder.u},
        {"decoder.b", &decoder.b, &grads_.decoder.b},
        {"proj.w", &proj.w, &grads_.proj.w},
        {"proj.b", &proj.b, &grads_.proj.b},
    };
  }

  struct EncodeResult {
    std::vector<T> paragraph_vec;            // final layer-2 hidden (d2)
    std::vector<std::vector<T>> layer2_states;  // one per valid chunk
  };

  EncodeResult encode_paragraph(const std::vector<std::vector<T>>& sent_vecs,
                                AttnTrace<T>* trace = nullptr) const {
    EncForward fwd;
    run_encoder(sent_vecs, fwd, trace);
    EncodeResult r;
    r.layer2_states.reserve(fwd.l2.size());
    for (auto& st : fwd.l2) r.layer2_states.push_back(st.cache.h);
    r.paragraph_vec = fwd.l2.back().cache.h;
    return r;
  }

  // One Adam/SGD step over a batch of (sentence vectors, summary ids)
  // records. Full softmax: summarization vocabularies are small.
  struct Record {
    std::vector<std::vector<T>> sent_vecs;
    std::vector<int> summary_ids;  // without BOS/EOS framing
  };

  double train_step(const std::vector<Record>& batch, OptimState<T>& opt,
                    AttnTrace<T>* trace = nullptr) {
    if (batch.empty()) throw std::invalid_argument("train_step: empty batch");
    std::size_t total_targets = 0;
    for (const auto& r : batch) {
      if (r.summary_ids.empty()) throw std::invalid_argument("train_step: empty summary");
      total_targets += r.summary_ids.size() + 1;
    }
    auto plist = params();
    sentvec::zero_grads(plist);
    const T weight = T(1) / T(total_targets);
    double loss = 0;
    for (const auto& r : batch) loss += train_example(r, weight, trace);
    clip_global_norm(plist, cfg.grad_clip);
    optimizer_step(plist, opt);
    return loss / double(total_targets);
  }

  // Loss without gradient effects (finite-difference harness hook).
  double batch_loss(const std::vector<Record>& batch) {
    std::size_t total = 0;
    for (const auto& r : batch) total += r.summary_ids.size() + 1;
    double loss = 0;
    for (const auto& r : batch) loss += example_loss(r);
    return loss / double(total);
  }

  // Forward + backward without the optimizer update; leaves gradients in
  // place for inspection.
  double compute_batch_grads(const std::vector<Record>& batch) {
    std::size_t total = 0;
    for (const auto& r : batch) {
      if (r.summary_ids.empty()) throw std::invalid_argument("empty summary");
      total += r.summary_ids.size() + 1;
    }
    auto plist = params();
    sentvec::zero_grads(plist);
    const T weight = T(1) / T(total);
    double loss = 0;
    for (const auto& r : batch) loss += train_example(r, weight, nullptr);
    return loss / double(total);
  }

  std::vector<int> summarize(const std::vector<std::vector<T>>& sent_vecs,
                             std::size_t max_len, AttnTrace<T>* trace = nullptr) const {
    EncForward fwd;
    run_encoder(sent_vecs, fwd, trace);
    std::vector<const T*> keys;
    for (auto& st : fwd.l2) keys.push_back(st.cache.h.data());

    std::vector<T> h(cfg.d_dec), c(cfg.d_dec, T(0));
    decoder_init(fwd.l2.back().cache.h.data(), h);

    std::vector<int> out;
    int prev = text::kBos;
    LstmStepCache<T> cache;
    AttnCache<T> attn;
    std::vector<T> ctx, x, logits;
    for (std::size_t t = 0; t < max_len; ++t) {
      attend(attn_dec, h.data(), keys, cfg.d2, ctx, attn);
      if (trace) trace->decoder.push_back(attn.weights);
      build_decoder_input(prev, ctx, x);
      lstm_step(decoder, x.data(), h.data(), c.data(), cache);
      h = cache.h;
      c = cache.c;
      logits.assign(proj.b.data.begin(), proj.b.data.end());
      kern::gemv_acc(proj.w.rows, proj.w.cols, proj.w.data.data(), h.data(), logits.data());
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

 private:
  struct Grads {
    LstmParams<T> layer1, layer2, decoder;
    AttnParams<T> attn_enc, attn_dec;
    Tensor<T> dec_init_w, dec_init_b, embedding;
    seq2seq::OutputProjection<T> proj;
  };

  Grads grads_;

  Grads make_grads() const {
    Grads g;
    g.layer1 = layer1.shaped_zero();
    g.layer2 = layer2.shaped_zero();
    g.decoder = decoder.shaped_zero();
    g.attn_enc = attn_enc.shaped_zero();
    g.attn_dec = attn_dec.shaped_zero();
    g.dec_init_w = Tensor<T>(cfg.d_dec, cfg.d2);
    g.dec_init_b = Tensor<T>(1, cfg.d_dec);
    g.embedding = Tensor<T>(cfg.vocab_size, cfg.d_w);
    g.proj.w = Tensor<T>(cfg.vocab_size, cfg.d_dec);
    g.proj.b = Tensor<T>(1, cfg.vocab_size);
    return g;
  }

  struct L1Step {
    std::size_t slot = 0;  // index into the padded sentence list
    LstmStepCache<T> cache;
  };
  struct L1Chunk {
    std::vector<L1Step> steps;  // valid steps only, in order
  };
  struct L2Step {
    std::size_t chunk_index = 0;  // into fwd.chunks
    AttnCache<T> attn;
    std::vector<T> context;  // d1
    std::vector<T> input;    // [feature ; context], 2*d1
    LstmStepCache<T> cache;
  };
  struct EncForward {
    std::vector<std::vector<T>> padded;  // t_max sentence vectors
    std::vector<bool> valid;
    std::vector<L1Chunk> chunks;         // valid chunks only
    std::vector<L2Step> l2;
  };

  static bool is_zero_vec(const std::vector<T>& v) {
    for (T x : v)
      if (x != T(0)) return false;
    return true;
  }

  void run_encoder(const std::vector<std::vector<T>>& sent_vecs, EncForward& fwd,
                   AttnTrace<T>* trace) const {
    if (sent_vecs.empty()) throw std::invalid_argument("encode_paragraph: empty paragraph");
    if (sent_vecs.size() > cfg.t_max)
      throw std::invalid_argument("encode_paragraph: more than " + std::to_string(cfg.t_max) +
                                  " sentences");
    for (const auto& v : sent_vecs)
      if (v.size() != cfg.sent_dim)
        throw std::invalid_argument("encode_paragraph: sentence vector width mismatch");

    fwd.padded = sent_vecs;
    fwd.padded.resize(cfg.t_max, std::vector<T>(cfg.sent_dim, T(0)));
    fwd.valid.resize(cfg.t_max);
    bool any = false;
    for (std::size_t i = 0; i < cfg.t_max; ++i) {
      fwd.valid[i] = !is_zero_vec(fwd.padded[i]);
      any = any || fwd.valid[i];
    }
    if (!any)
      throw std::invalid_argument("encode_paragraph: paragraph has only zero vectors");

    // Layer 1: one LSTM run per chunk over its valid slots.
    for (const auto& w : chunk_windows(cfg.t_max, cfg.chunk_size, cfg.stride)) {
      L1Chunk chunk;
      std::vector<T> h(cfg.d1, T(0)), c(cfg.d1, T(0));
      for (std::size_t i = 0; i < w.size; ++i) {
        const std::size_t slot = w.start + i;
        if (slot >= cfg.t_max || !fwd.valid[slot]) continue;
        L1Step step;
        step.slot = slot;
        lstm_step(layer1, fwd.padded[slot].data(), h.data(), c.data(), step.cache);
        h = step.cache.h;
        c = step.cache.c;
        chunk.steps.push_back(std::move(step));
      }
      if (!chunk.steps.empty()) fwd.chunks.push_back(std::move(chunk));
    }

    // Layer 2 with attention over all chunk features.
    std::vector<const T*> keys;
    for (auto& ch : fwd.chunks) keys.push_back(ch.steps.back().cache.h.data());
    std::vector<T> h(cfg.d2, T(0)), c(cfg.d2, T(0));
    for (std::size_t k = 0; k < fwd.chunks.size(); ++k) {
      L2Step step;
      step.chunk_index = k;
      attend(attn_enc, h.data(), keys, cfg.d1, step.context, step.attn);
      if (trace) trace->encoder.push_back(step.attn.weights);
      step.input.assign(2 * cfg.d1, T(0));
      std::copy(keys[k], keys[k] + cfg.d1, step.input.begin());
      std::copy(step.context.begin(), step.context.end(), step.input.begin() + cfg.d1);
      lstm_step(layer2, step.input.data(), h.data(), c.data(), step.cache);
      h = step.cache.h;
      c = step.cache.c;
      fwd.l2.push_back(std::move(step));
    }
  }

  void decoder_init(const T* pvec, std::vector<T>& h0) const {
    h0.assign(cfg.d_dec, T(0));
    std::copy(dec_init_b.data.begin(), dec_init_b.data.end(), h0.begin());
    kern::gemv_acc(cfg.d_dec, cfg.d2, dec_init_w.data.data(), pvec, h0.data());
    for (auto& x : h0) x = std::tanh(x);
  }

  void build_decoder_input(int token, const std::vector<T>& ctx, std::vector<T>& x) const {
    x.assign(cfg.d_w + cfg.d2, T(0));
    std::copy(embedding.row(std::size_t(token)), embedding.row(std::size_t(token)) + cfg.d_w,
              x.begin());
    std::copy(ctx.begin(), ctx.end(), x.begin() + std::ptrdiff_t(cfg.d_w));
  }

  struct DecStep {
    int token_in = 0;
    AttnCache<T> attn;
    std::vector<T> context;
    std::vector<T> input;
    std::vector<T> h_prev;  // decoder state the attention query used
    LstmStepCache<T> cache;
    seq2seq::PositionLoss<T> loss;
  };

  double decoder_forward(const EncForward& fwd, const std::vector<int>& summary,
                         std::vector<DecStep>& steps, std::vector<T>& h0,
                         AttnTrace<T>* trace) const {
    std::vector<const T*> keys;
    for (auto& st : fwd.l2) keys.push_back(st.cache.h.data());
    decoder_init(fwd.l2.back().cache.h.data(), h0);

    std::vector<int> dec_in{text::kBos};
    for (int id : summary) {
      if (id < 0 || std::size_t(id) >= cfg.vocab_size)
        throw std::invalid_argument("summary token id out of range");
      if (id == text::kPad || id == text::kBos || id == text::kEos)
        throw std::invalid_argument("summary contains reserved token id");
      dec_in.push_back(id);
    }
    std::vector<int> dec_tgt(summary);
    dec_tgt.push_back(text::kEos);

    steps.resize(dec_in.size());
    const T* h = h0.data();
    std::vector<T> c(cfg.d_dec, T(0));
    double loss = 0;
    for (std::size_t t = 0; t < dec_in.size(); ++t) {
      DecStep& st = steps[t];
      st.token_in = dec_in[t];
      st.h_prev.assign(h, h + cfg.d_dec);
      attend(attn_dec, h, keys, cfg.d2, st.context, st.attn);
      if (trace) trace->decoder.push_back(st.attn.weights);
      build_decoder_input(st.token_in, st.context, st.input);
      lstm_step(decoder, st.input.data(), h, c.data(), st.cache);
      h = st.cache.h.data();
      c = st.cache.c;
      st.loss = seq2seq::full_softmax_loss(proj, h, dec_tgt[t]);
      loss += st.loss.loss;
    }
    return loss;
  }

  double example_loss(const Record& rec) const {
    EncForward fwd;
    run_encoder(rec.sent_vecs, fwd, nullptr);
    std::vector<DecStep> steps;
    std::vector<T> h0;
    return decoder_forward(fwd, rec.summary_ids, steps, h0, nullptr);
  }

  double train_example(const Record& rec, T weight, AttnTrace<T>* trace) {
    zero_buf(std::max({cfg.d1, cfg.d2, cfg.d_dec}));  // size once; pointers stay valid
    EncForward fwd;
    run_encoder(rec.sent_vecs, fwd, trace);
    std::vector<DecStep> steps;
    std::vector<T> h0;
    const double loss = decoder_forward(fwd, rec.summary_ids, steps, h0, trace);

    const std::size_t n_chunks = fwd.chunks.size();
    std::vector<const T*> keys;
    std::vector<T*> dkeys;
    std::vector<std::vector<T>> dl2(n_chunks, std::vector<T>(cfg.d2, T(0)));
    for (std::size_t k = 0; k < n_chunks; ++k) keys.push_back(fwd.l2[k].cache.h.data());
    for (std::size_t k = 0; k < n_chunks; ++k) dkeys.push_back(dl2[k].data());

    // Decoder backward. Attention queries are the previous decoder state,
    // so each step hands its query gradient to the step before it.
    std::vector<T> dh(cfg.d_dec, T(0)), dc(cfg.d_dec, T(0));
    std::vector<T> dh_prev(cfg.d_dec), dc_prev(cfg.d_dec);
    std::vector<T> dx(cfg.d_w + cfg.d2);
    for (std::size_t t = steps.size(); t-- > 0;) {
      DecStep& st = steps[t];
      seq2seq::output_backward(proj, grads_.proj, st.cache.h.data(), st.loss, weight,
                               dh.data());
      const T* h_prev = st.h_prev.data();
      const T* c_prev = t == 0 ? zero_buf(cfg.d_dec) : steps[t - 1].cache.c.data();
      std::fill(dx.begin(), dx.end(), T(0));
      lstm_step_backward(decoder, {&grads_.decoder.w, &grads_.decoder.u, &grads_.decoder.b},
                         st.input.data(), h_prev, c_prev, st.cache, dh.data(), dc.data(),
                         dx.data(), dh_prev.data(), dc_prev.data());
      // Split the input gradient: token embedding part and context part.
      kern::axpy(cfg.d_w, T(1), dx.data(), grads_.embedding.row(std::size_t(st.token_in)));
      attend_backward(attn_dec, grads_.attn_dec, st.h_prev.data(), keys, cfg.d2, st.attn,
                      dx.data() + cfg.d_w, dkeys, dh_prev.data());
      dh.swap(dh_prev);
      dc.swap(dc_prev);
    }

    // dh is now the gradient on h0 = tanh(W p + b).
    {
      std::vector<T> dpre(cfg.d_dec);
      for (std::size_t j = 0; j < cfg.d_dec; ++j)
        dpre[j] = dh[j] * (T(1) - h0[j] * h0[j]);
      const T* pvec = fwd.l2.back().cache.h.data();
      kern::ger_acc(cfg.d_dec, cfg.d2, grads_.dec_init_w.data.data(), dpre.data(), pvec);
      kern::axpy(cfg.d_dec, T(1), dpre.data(), grads_.dec_init_b.data.data());
      kern::gemv_t_acc(cfg.d_dec, cfg.d2, dec_init_w.data.data(), dpre.data(),
                       dl2[n_chunks - 1].data());
    }

    // Layer-2 backward; chunk-feature gradients gather here.
    std::vector<std::vector<T>> dfeat(n_chunks, std::vector<T>(cfg.d1, T(0)));
    std::vector<T*> dfeat_ptrs(n_chunks);
    std::vector<const T*> feat_keys(n_chunks);
    for (std::size_t k = 0; k < n_chunks; ++k) {
      dfeat_ptrs[k] = dfeat[k].data();
      feat_keys[k] = fwd.chunks[k].steps.back().cache.h.data();
    }
    std::vector<T> dh2(cfg.d2, T(0)), dc2(cfg.d2, T(0));
    std::vector<T> dh2_prev(cfg.d2), dc2_prev(cfg.d2);
    std::vector<T> dinput(2 * cfg.d1);
    for (std::size_t k = n_chunks; k-- > 0;) {
      const L2Step& st = fwd.l2[k];
      kern::axpy(cfg.d2, T(1), dl2[k].data(), dh2.data());
      const T* h_prev = k == 0 ? zero_buf(cfg.d2) : fwd.l2[k - 1].cache.h.data();
      const T* c_prev = k == 0 ? zero_buf(cfg.d2) : fwd.l2[k - 1].cache.c.data();
      std::fill(dinput.begin(), dinput.end(), T(0));
      lstm_step_backward(layer2, {&grads_.layer2.w, &grads_.layer2.u, &grads_.layer2.b},
                         st.input.data(), h_prev, c_prev, st.cache, dh2.data(), dc2.data(),
                         dinput.data(), dh2_prev.data(), dc2_prev.data());
      kern::axpy(cfg.d1, T(1), dinput.data(), dfeat[k].data());
      attend_backward(attn_enc, grads_.attn_enc, h_prev, feat_keys, cfg.d1, st.attn,
                      dinput.data() + cfg.d1, dfeat_ptrs, dh2_prev.data());
      dh2.swap(dh2_prev);
      dc2.swap(dc2_prev);
    }

    // Layer-1 backward per chunk (sentence vectors are frozen inputs, no dx).
    std::vector<T> dh1(cfg.d1), dc1(cfg.d1), dh1_prev(cfg.d1), dc1_prev(cfg.d1);
    for (std::size_t k = 0; k < n_chunks; ++k) {
      const auto& chunk = fwd.chunks[k];
      dh1 = dfeat[k];
      std::fill(dc1.begin(), dc1.end(), T(0));
      for (std::size_t sidx = chunk.steps.size(); sidx-- > 0;) {
        const L1Step& st = chunk.steps[sidx];
        const T* h_prev = sidx == 0 ? zero_buf(cfg.d1) : chunk.steps[sidx - 1].cache.h.data();
        const T* c_prev = sidx == 0 ? zero_buf(cfg.d1) : chunk.steps[sidx - 1].cache.c.data();
        lstm_step_backward(layer1, {&grads_.layer1.w, &grads_.layer1.u, &grads_.layer1.b},
                           fwd.padded[st.slot].data(), h_prev, c_prev, st.cache, dh1.data(),
                           dc1.data(), nullptr, dh1_prev.data(), dc1_prev.data());
        dh1.swap(dh1_prev);
        dc1.swap(dc1_prev);
      }
    }
    return loss;
  }

  const T* zero_buf(std::size_t n) const {
    static thread_local std::vector<T> z;
    if (z.size() < n) z.assign(n, T(0));
    return z.data();
  }
};

}  // namespace sentvec::hier
