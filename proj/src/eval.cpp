#include "sentvec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

#include "sentvec/kernels.hpp"
#include "sentvec/optim.hpp"
#include "sentvec/rng.hpp"

namespace sentvec::eval {

namespace {

void require_same_nonempty(const std::vector<double>& x, const std::vector<double>& y,
                           std::size_t min_len, const char* who) {
  if (x.size() != y.size()) throw std::invalid_argument(std::string(who) + ": length mismatch");
  if (x.size() < min_len) throw std::invalid_argument(std::string(who) + ": too few points");
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (double(i) + double(j)) / 2.0 + 1.0;  // 1-based average rank
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

using NgramCounts = std::map<std::string, double>;

std::string join_ngram(const Sentence& s, std::size_t start, std::size_t n) {
  std::string key;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) key.push_back('\x1f');
    key += s[start + i];
  }
  return key;
}

NgramCounts ngram_counts(const Sentence& s, std::size_t n) {
  NgramCounts counts;
  if (s.size() < n) return counts;
  for (std::size_t i = 0; i + n <= s.size(); ++i) counts[join_ngram(s, i, n)] += 1.0;
  return counts;
}

}  // namespace

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  require_same_nonempty(x, y, 2, "pearson");
  const std::size_t n = x.size();
  const double mx = kern::sum(n, x.data()) / double(n);
  const double my = kern::sum(n, y.data()) / double(n);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw std::invalid_argument("pearson: zero variance");
  return sxy / std::sqrt(sxx * syy);
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  require_same_nonempty(x, y, 2, "spearman");
  return pearson(average_ranks(x), average_ranks(y));
}

double mse(const std::vector<double>& pred, const std::vector<double>& gold) {
  require_same_nonempty(pred, gold, 1, "mse");
  double s = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - gold[i];
    s += d * d;
  }
  return s / double(pred.size());
}

std::array<double, 4> bleu(const std::vector<Sentence>& candidates,
                           const std::vector<std::vector<Sentence>>& references) {
  if (candidates.empty() || candidates.size() != references.size())
    throw std::invalid_argument("bleu: empty corpus or candidate/reference count mismatch");

  double matched[4] = {0, 0, 0, 0};
  double total[4] = {0, 0, 0, 0};
  double cand_len = 0, eff_ref_len = 0;

  for (std::size_t item = 0; item < candidates.size(); ++item) {
    const Sentence& cand = candidates[item];
    const auto& refs = references[item];
    if (refs.empty()) throw std::invalid_argument("bleu: item without references");

    cand_len += double(cand.size());
    // Closest reference length; ties prefer the shorter one.
    std::size_t best_ref = refs[0].size();
    for (const auto& r : refs) {
      const auto d = [&](std::size_t len) {
        return len > cand.size() ? len - cand.size() : cand.size() - len;
      };
      if (d(r.size()) < d(best_ref) || (d(r.size()) == d(best_ref) && r.size() < best_ref))
        best_ref = r.size();
    }
    eff_ref_len += double(best_ref);

    for (std::size_t n = 1; n <= 4; ++n) {
      NgramCounts cc = ngram_counts(cand, n);
      NgramCounts max_ref;
      for (const auto& r : refs)
        for (const auto& [k, v] : ngram_counts(r, n))
          max_ref[k] = std::max(max_ref[k], v);
      for (const auto& [k, v] : cc) {
        total[n - 1] += v;
        auto it = max_ref.find(k);
        if (it != max_ref.end()) matched[n - 1] += std::min(v, it->second);
      }
    }
  }

  const double bp = (cand_len == 0) ? 0.0
                    : (cand_len >= eff_ref_len) ? 1.0
                                                : std::exp(1.0 - eff_ref_len / cand_len);
  std::array<double, 4> out{};
  for (std::size_t k = 1; k <= 4; ++k) {
    double log_sum = 0;
    bool zero = false;
    for (std::size_t n = 1; n <= k; ++n) {
      if (matched[n - 1] == 0 || total[n - 1] == 0) {
        zero = true;
        break;
      }
      log_sum += std::log(matched[n - 1] / total[n - 1]);
    }
    out[k - 1] = zero ? 0.0 : bp * std::exp(log_sum / double(k));
  }
  return out;
}

namespace {

std::size_t lcs_length(const Sentence& a, const Sentence& b) {
  const std::size_t m = a.size(), n = b.size();
  std::vector<std::size_t> prev(n + 1, 0), cur(n + 1, 0);
  for (std::size_t i = 1; i <= m; ++i) {
    for (std::size_t j = 1; j <= n; ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    prev.swap(cur);
  }
  return prev[n];
}

}  // namespace

double rouge_l(const std::vector<Sentence>& candidates,
               const std::vector<std::vector<Sentence>>& references, double beta) {
  if (candidates.empty() || candidates.size() != references.size())
    throw std::invalid_argument("rouge_l: empty corpus or count mismatch");
  const double b2 = beta * beta;
  double sum = 0;
  for (std::size_t item = 0; item < candidates.size(); ++item) {
    const Sentence& cand = candidates[item];
    double best = 0;
    for (const auto& ref : references[item]) {
      if (cand.empty() || ref.empty()) continue;
      const double lcs = double(lcs_length(cand, ref));
      if (lcs == 0) continue;
      const double p = lcs / double(cand.size());
      const double r = lcs / double(ref.size());
      best = std::max(best, (1.0 + b2) * p * r / (r + b2 * p));
    }
    sum += best;
  }
  return sum / double(candidates.size());
}

double cider(const std::vector<Sentence>& candidates,
             const std::vector<std::vector<Sentence>>& references) {
  if (candidates.size() != references.size())
    throw std::invalid_argument("cider: candidate/reference count mismatch");
  if (candidates.size() < 2)
    throw std::invalid_argument("cider: needs a corpus of at least 2 items for idf");

  const std::size_t n_items = candidates.size();
  const double log_items = std::log(double(n_items));

  double score_sum = 0;
  for (std::size_t n = 1; n <= 4; ++n) {
    // Document frequency over the reference sets.
    NgramCounts df;
    for (const auto& refs : references) {
      NgramCounts seen;
      for (const auto& r : refs)
        for (const auto& [k, v] : ngram_counts(r, n)) seen[k] = 1.0;
      for (const auto& [k, v] : seen) df[k] += 1.0;
    }
    auto idf = [&](const std::string& k) {
      auto it = df.find(k);
      const double d = it == df.end() ? 1.0 : std::max(1.0, it->second);
      return log_items - std::log(d);
    };
    auto tfidf = [&](const Sentence& s) {
      NgramCounts vec = ngram_counts(s, n);
      double norm_sq = 0;
      for (auto& [k, v] : vec) {
        v *= idf(k);
        norm_sq += v * v;
      }
      return std::make_pair(vec, std::sqrt(norm_sq));
    };

    double sim_sum = 0;
    for (std::size_t item = 0; item < n_items; ++item) {
      auto [cvec, cnorm] = tfidf(candidates[item]);
      const auto& refs = references[item];
      if (refs.empty()) throw std::invalid_argument("cider: item without references");
      double item_sim = 0;
      for (const auto& ref : refs) {
        auto [rvec, rnorm] = tfidf(ref);
        if (cnorm == 0 || rnorm == 0) continue;
        double dot = 0;
        for (const auto& [k, v] : cvec) {
          auto it = rvec.find(k);
          if (it != rvec.end()) dot += v * it->second;
        }
        item_sim += dot / (cnorm * rnorm);
      }
      sim_sum += item_sim / double(refs.size());
    }
    score_sum += sim_sum / double(n_items);
  }
  return 10.0 * (score_sum / 4.0);
}

RelatednessRegressor::RelatednessRegressor(std::size_t feat_dim, std::uint64_t seed) {
  SplitMix64 seeds(seed);
  w1 = init_params<double>(50, feat_dim, InitScheme::UniformScaled, seeds.next_u64());
  b1 = Tensor<double>(1, 50);
  w2 = init_params<double>(5, 50, InitScheme::UniformScaled, seeds.next_u64());
  b2 = Tensor<double>(1, 5);
}

std::vector<double> RelatednessRegressor::pair_features(const std::vector<double>& a,
                                                        const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("pair_features: vector width mismatch");
  std::vector<double> f(2 * a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    f[i] = a[i] * b[i];
    f[a.size() + i] = std::fabs(a[i] - b[i]);
  }
  return f;
}

std::array<double, 5> RelatednessRegressor::sparse_target(double gold) {
  if (gold < 1.0 || gold > 5.0)
    throw std::invalid_argument("sparse_target: score outside [1,5]");
  std::array<double, 5> t{};
  const double fl = std::floor(gold);
  const std::size_t lo = std::size_t(fl) - 1;
  if (gold == fl) {
    t[lo] = 1.0;
  } else {
    t[lo] = (fl + 1.0) - gold;
    t[lo + 1] = gold - fl;
  }
  return t;
}

std::array<double, 5> RelatednessRegressor::class_probs(
    const std::vector<double>& features) const {
  if (features.size() != w1.cols)
    throw std::invalid_argument("class_probs: feature width mismatch");
  std::vector<double> hidden(b1.data);
  kern::gemv_acc(50, w1.cols, w1.data.data(), features.data(), hidden.data());
  for (auto& h : hidden) h = 1.0 / (1.0 + std::exp(-h));
  std::vector<double> logits(b2.data);
  kern::gemv_acc(5, 50, w2.data.data(), hidden.data(), logits.data());
  auto probs = softmax(logits);
  return {probs[0], probs[1], probs[2], probs[3], probs[4]};
}

double RelatednessRegressor::predict(const std::vector<double>& features) const {
  auto p = class_probs(features);
  double score = 0;
  for (std::size_t k = 0; k < 5; ++k) score += double(k + 1) * p[k];
  return score;
}

RelatednessRegressor train_relatedness_regressor(
    const std::vector<data::RelatednessRecord>& records, const SentenceEncoder& encoder,
    const RegressorTrainOpts& opts) {
  if (records.empty())
    throw std::invalid_argument("train_relatedness_regressor: no records");

  std::vector<std::vector<double>> feats;
  std::vector<std::array<double, 5>> targets;
  feats.reserve(records.size());
  for (const auto& r : records) {
    feats.push_back(
        RelatednessRegressor::pair_features(encoder(r.sentence_a), encoder(r.sentence_b)));
    targets.push_back(RelatednessRegressor::sparse_target(r.gold_score));
  }
  const std::size_t feat_dim = feats[0].size();

  RelatednessRegressor reg(feat_dim, opts.seed);
  Tensor<double> gw1(50, feat_dim), gb1(1, 50), gw2(5, 50), gb2(1, 5);
  std::vector<ParamRef<double>> params = {
      {"w1", &reg.w1, &gw1}, {"b1", &reg.b1, &gb1}, {"w2", &reg.w2, &gw2}, {"b2", &reg.b2, &gb2}};
  auto opt = OptimState<double>::adam(opts.learning_rate);

  std::vector<double> hidden(50), logits(5), dz2(5), dz1(50), da(50);
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    zero_grads(params);
    const double w = 1.0 / double(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
      const auto& x = feats[i];
      hidden.assign(reg.b1.data.begin(), reg.b1.data.end());
      kern::gemv_acc(50, feat_dim, reg.w1.data.data(), x.data(), hidden.data());
      for (auto& h : hidden) h = 1.0 / (1.0 + std::exp(-h));
      logits.assign(reg.b2.data.begin(), reg.b2.data.end());
      kern::gemv_acc(5, 50, reg.w2.data.data(), hidden.data(), logits.data());
      const auto probs = softmax(logits);

      for (std::size_t k = 0; k < 5; ++k) dz2[k] = w * (probs[k] - targets[i][k]);
      kern::ger_acc(5, 50, gw2.data.data(), dz2.data(), hidden.data());
      kern::axpy(std::size_t(5), 1.0, dz2.data(), gb2.data.data());
      std::fill(da.begin(), da.end(), 0.0);
      kern::gemv_t_acc(5, 50, reg.w2.data.data(), dz2.data(), da.data());
      for (std::size_t k = 0; k < 50; ++k) dz1[k] = da[k] * hidden[k] * (1.0 - hidden[k]);
      kern::ger_acc(50, feat_dim, gw1.data.data(), dz1.data(), x.data());
      kern::axpy(std::size_t(50), 1.0, dz1.data(), gb1.data.data());
    }
    optimizer_step(params, opt);
  }
  return reg;
}

RelatednessReport evaluate_regressor(const RelatednessRegressor& reg,
                                     const std::vector<data::RelatednessRecord>& records,
                                     const SentenceEncoder& encoder) {
  std::vector<double> pred, gold;
  for (const auto& r : records) {
    pred.push_back(reg.predict(
        RelatednessRegressor::pair_features(encoder(r.sentence_a), encoder(r.sentence_b))));
    gold.push_back(r.gold_score);
  }
  RelatednessReport rep;
  rep.pearson_r = pearson(pred, gold);
  rep.spearman_rho = spearman(pred, gold);
  rep.mse = mse(pred, gold);
  return rep;
}

double distance_relatedness_check(const std::vector<data::RelatednessRecord>& records,
                                  const SentenceEncoder& encoder) {
  if (records.empty()) throw std::invalid_argument("distance_relatedness_check: no records");
  std::vector<double> neg_dist, gold;
  for (const auto& r : records) {
    const auto a = encoder(r.sentence_a);
    const auto b = encoder(r.sentence_b);
    if (a.size() != b.size())
      throw std::invalid_argument("distance_relatedness_check: width mismatch");
    double d2 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
    neg_dist.push_back(-std::sqrt(d2));
    gold.push_back(r.gold_score);
  }
  return spearman(neg_dist, gold);
}

}  // namespace sentvec::eval
