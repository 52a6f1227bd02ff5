#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sentvec/datasets.hpp"
#include "sentvec/tensor.hpp"

namespace sentvec::eval {

double pearson(const std::vector<double>& x, const std::vector<double>& y);
// Pearson of average-ranked data.
double spearman(const std::vector<double>& x, const std::vector<double>& y);
double mse(const std::vector<double>& pred, const std::vector<double>& gold);

using Sentence = std::vector<std::string>;

// Corpus-level BLEU with modified (clipped) n-gram precision and the
// exp(1 - r/c) brevity penalty for c < r; r uses the closest reference
// length per segment (shorter wins ties). bleu[k-1] is BLEU-k, the
// geometric mean of orders 1..k. No smoothing: a zero precision zeroes
// the score, as in the original definition.
std::array<double, 4> bleu(const std::vector<Sentence>& candidates,
                           const std::vector<std::vector<Sentence>>& references);

// LCS F-measure with beta = 1.2 (precision over the candidate, recall over
// the reference), max over references, mean over the corpus.
double rouge_l(const std::vector<Sentence>& candidates,
               const std::vector<std::vector<Sentence>>& references, double beta = 1.2);

// Plain CIDEr (not CIDEr-D): per n in 1..4 the cosine similarity between
// tf-idf n-gram vectors of candidate and each reference, averaged over
// references then over n, scaled by 10. Document frequencies come from the
// reference sets of this corpus, so at least two items are required.
double cider(const std::vector<Sentence>& candidates,
             const std::vector<std::vector<Sentence>>& references);

// Maps a raw sentence to its vector representation; wired by the caller so
// the metric layer stays independent of the model types.
using SentenceEncoder = std::function<std::vector<double>(const std::string&)>;

// Two-layer scorer over sentence-pair features [h_a.*h_b ; |h_a-h_b|]:
// sigmoid hidden layer of 50 units, softmax over the five integer scores,
// prediction = expectation over {1..5} (always inside the scale).
class RelatednessRegressor {
 public:
  RelatednessRegressor() = default;
  RelatednessRegressor(std::size_t feat_dim, std::uint64_t seed);

  static std::vector<double> pair_features(const std::vector<double>& a,
                                           const std::vector<double>& b);
  // Sparse target over {1..5}: mass ceil(y)-y on floor(y), y-floor(y) on
  // ceil(y) (all on y when integral).
  static std::array<double, 5> sparse_target(double gold);

  std::array<double, 5> class_probs(const std::vector<double>& features) const;
  double predict(const std::vector<double>& features) const;

  Tensor<double> w1, b1, w2, b2;
};

struct RegressorTrainOpts {
  std::size_t epochs = 300;
  double learning_rate = 0.01;  // Adam
  std::uint64_t seed = 1;
};

// KL(target || predicted) minimized with Adam over the full record set.
RelatednessRegressor train_relatedness_regressor(
    const std::vector<data::RelatednessRecord>& records, const SentenceEncoder& encoder,
    const RegressorTrainOpts& opts = {});

struct RelatednessReport {
  double pearson_r = 0;
  double spearman_rho = 0;
  double mse = 0;
};

RelatednessReport evaluate_regressor(const RelatednessRegressor& reg,
                                     const std::vector<data::RelatednessRecord>& records,
                                     const SentenceEncoder& encoder);

// Spearman rank correlation between negative Euclidean distance of the two
// sentence vectors and the gold score.
double distance_relatedness_check(const std::vector<data::RelatednessRecord>& records,
                                  const SentenceEncoder& encoder);

}  // namespace sentvec::eval
