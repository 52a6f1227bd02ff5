#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sentvec/hier.hpp"
#include "sentvec/seq2seq.hpp"

namespace sentvec::ckpt {

// On-disk model container, all integers little-endian:
//   bytes 0..3   magic "SVFG"
//   u32          format version (currently 1)
//   u32          model kind (1 = paraphrase encoder-decoder, 2 = hierarchical
//                summarizer)
//   u32          tensor count, then per tensor:
//                  u32 name length, name bytes,
//                  u32 rank, u32 dims[rank],
//                  float32 data (row-major)
//   u32          config length, then that many bytes of "key=value\n" lines.
// The vocabulary is not embedded; config carries vocab_path and vocab_hash
// (FNV-1a 64 of the file, hex) so stale files are detected at load.

inline constexpr std::uint32_t kVersion = 1;
inline constexpr std::uint32_t kKindParaphrase = 1;
inline constexpr std::uint32_t kKindHier = 2;

const char* kind_name(std::uint32_t kind);

struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> dims;
  std::vector<float> data;
};

struct Checkpoint {
  std::uint32_t version = kVersion;
  std::uint32_t kind = 0;
  std::vector<NamedTensor> tensors;
  std::map<std::string, std::string> config;

  const NamedTensor& tensor(const std::string& name) const;
  std::string config_at(const std::string& key) const;
};

void save(const Checkpoint& c, const std::string& path);
Checkpoint load(const std::string& path);

// Key=value text block used both inside checkpoints and for standalone run
// configs. Round-trips exactly (keys sorted, one per line).
std::string serialize_config(const std::map<std::string, std::string>& config);
std::map<std::string, std::string> parse_config(const std::string& block);

// Model converters. extra_config entries (vocab_path, vocab_hash, ...) are
// merged into the checkpoint's config block.
Checkpoint to_checkpoint(const seq2seq::EncoderDecoderModel<float>& model,
                         const std::map<std::string, std::string>& extra_config = {});
seq2seq::EncoderDecoderModel<float> paraphrase_from_checkpoint(const Checkpoint& c);

Checkpoint to_checkpoint(const hier::HierModel<float>& model,
                         const std::map<std::string, std::string>& extra_config = {});
hier::HierModel<float> hier_from_checkpoint(const Checkpoint& c);

// Sentence-vector cache: u32 count, u32 width, then count*width little-endian
// float32 values.
void save_vectors(const std::vector<std::vector<float>>& vecs, const std::string& path);
std::vector<std::vector<float>> load_vectors(const std::string& path);

}  // namespace sentvec::ckpt
