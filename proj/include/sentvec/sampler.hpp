#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "sentvec/rng.hpp"

namespace sentvec {

// Log-uniform (Zipfian-over-rank) candidate distribution over [0, vocab):
//   P(id = r) = log(1 + 1/(r+1)) / log(vocab + 1)
// Low ids are frequent tokens when the vocabulary is frequency-ordered,
// which ours is (specials first, then tokens by descending count).

inline double log_uniform_prob(int id, std::size_t vocab) {
  return std::log1p(1.0 / double(id + 1)) / std::log(double(vocab) + 1.0);
}

// Inverse-CDF draw: floor(exp(u * log(V+1))) - 1 is log-uniform on [0, V).
inline int log_uniform_draw(SplitMix64& rng, std::size_t vocab) {
  const double u = rng.next_double();
  int id = int(std::exp(u * std::log(double(vocab) + 1.0))) - 1;
  if (id < 0) id = 0;
  if (std::size_t(id) >= vocab) id = int(vocab) - 1;  // guards u ~ 1 rounding
  return id;
}

// Candidate set for one sampled-softmax position: the target plus n_samples
// distinct non-target ids (rejection sampling, so accidental target hits and
// duplicates are redrawn). expected_counts[i] estimates how often candidate
// i appears in the set: 1 for the target (always present), and the standard
// 1-(1-q)^n inclusion estimate for sampled ids -- except when n_samples
// covers every non-target class, where inclusion is certain and the exact
// value 1 is used. With all counts equal the logit correction cancels under
// softmax, which is what makes the full-coverage case reduce to full softmax.
struct CandidateSet {
  int target_id = 0;
  std::vector<int> sampled_ids;
  std::vector<double> expected_counts;  // [target, sampled...]

  std::size_t size() const { return 1 + sampled_ids.size(); }
  int id_at(std::size_t i) const { return i == 0 ? target_id : sampled_ids[i - 1]; }
};

inline CandidateSet sample_candidates(int target_id, std::size_t n_samples, std::size_t vocab,
                                      SplitMix64& rng) {
  if (n_samples + 1 > vocab)
    throw std::invalid_argument("sample_candidates: n_samples must be < vocab size");
  if (target_id < 0 || std::size_t(target_id) >= vocab)
    throw std::invalid_argument("sample_candidates: target out of range");

  CandidateSet set;
  set.target_id = target_id;
  std::unordered_set<int> taken{target_id};
  while (set.sampled_ids.size() < n_samples) {
    const int id = log_uniform_draw(rng, vocab);
    if (taken.insert(id).second) set.sampled_ids.push_back(id);
  }

  const bool full_coverage = (n_samples == vocab - 1);
  set.expected_counts.reserve(set.size());
  set.expected_counts.push_back(1.0);
  for (int id : set.sampled_ids) {
    if (full_coverage) {
      set.expected_counts.push_back(1.0);
    } else {
      const double q = log_uniform_prob(id, vocab);
      set.expected_counts.push_back(-std::expm1(double(n_samples) * std::log1p(-q)));
    }
  }
  return set;
}

}  // namespace sentvec
