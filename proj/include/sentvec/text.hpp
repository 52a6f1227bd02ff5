#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "sentvec/tensor.hpp"

namespace sentvec::text {

// Reserved token ids. PAD is never embedded into an encoder input and its
// embedding row is pinned to zero.
inline constexpr int kPad = 0;
inline constexpr int kBos = 1;
inline constexpr int kEos = 2;
inline constexpr int kUnk = 3;
inline constexpr int kNumSpecials = 4;

// Lowercases, strips punctuation (apostrophes between word characters
// survive), splits on whitespace. Bytes >= 0x80 pass through untouched so
// UTF-8 content is kept as-is.
std::vector<std::string> tokenize(const std::string& raw);

std::string detokenize(const std::vector<std::string>& tokens);

class Vocabulary {
 public:
  // Specials only; use build_vocab for a real table.
  Vocabulary();

  // token -> id, UNK for out-of-vocabulary tokens.
  int id(const std::string& token) const;
  const std::string& token(int id) const;
  bool contains(const std::string& token) const;
  std::size_t size() const { return id_to_token_.size(); }

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  // Plain-text persistence: one header line ("# ..."), then one token per
  // line where 0-based content line k holds the token with id k + 4.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  // Appends a non-special token (id = current size). Used by the builder
  // and the file loader.
  void push_token(const std::string& token);

 private:
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// Keeps the (cap - 4) most frequent tokens of the corpus; frequency ties
// break lexicographically. cap must be at least 5.
Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t cap);

struct EmbeddingTable {
  Tensor<float> matrix;  // |V| x d_w
  std::size_t width = 0;
};

// Fresh table: every row UniformScaled except PAD, which is zero.
EmbeddingTable init_embeddings(const Vocabulary& vocab, std::size_t d_w, std::uint64_t seed);

// GloVe text format: one line per word, the word then d_w decimals, all
// space-separated. In-vocab words take the file vector; everything else
// (specials included) keeps UniformScaled init; PAD is forced to zero.
EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               std::size_t d_w, std::uint64_t seed = 0x9e11);

// FNV-1a 64-bit over a file's bytes; checkpoints store this next to the
// vocabulary path so a stale vocabulary file is caught at load time.
std::uint64_t file_hash(const std::string& path);

}  // namespace sentvec::text
