#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sentvec::data {

// All captions describing one image or video clip. A group of k captions
// contributes k*(k-1) ordered paraphrase pairs.
struct CaptionGroup {
  std::string group_id;
  std::vector<std::string> captions;
};

struct SentencePair {
  std::string source;
  std::string target;
  std::string group_id;
};

struct PairDataset {
  std::vector<SentencePair> pairs;
};

struct RelatednessRecord {
  std::string id;
  std::string sentence_a;
  std::string sentence_b;
  double gold_score = 0;  // 1..5
};

struct ParagraphRecord {
  std::vector<std::string> detailed;  // 1..20 sentences
  std::string summary;
};

// File: one caption per line, "group_id<TAB>caption".
std::vector<CaptionGroup> load_caption_groups(const std::string& path);

// All ordered within-group pairs, self-pairs excluded.
PairDataset build_pairs(const std::vector<CaptionGroup>& groups);

void save_pairs(const PairDataset& ds, const std::string& path);  // src\ttgt\tgroup_id
PairDataset load_pairs(const std::string& path);

// Group-level hold-out: every pair of a group lands on one side, so no
// caption leaks across the split. Test side gets round(#groups * fraction)
// groups, chosen by a seeded shuffle of the distinct group ids.
struct SplitPairs {
  PairDataset train;
  PairDataset test;
};
SplitPairs holdout_split(const PairDataset& dataset, double fraction, std::uint64_t seed);

// Record-level split for corpora without grouping (paragraph records).
// Returns the index partition (train, test).
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_records(
    std::size_t count, double fraction, std::uint64_t seed);

// Tab-separated: id, sentence_A, sentence_B, relatedness_score. A header
// line is tolerated. Scores outside [1,5] raise with the record id.
std::vector<RelatednessRecord> load_relatedness(const std::string& path);

// Blank-line separated blocks; within a block every line but the last is a
// detailed sentence, the last line is the summary. Blocks with more than 20
// detailed sentences are skipped and counted in skipped_long.
struct ParagraphCorpus {
  std::vector<ParagraphRecord> records;
  std::size_t skipped_long = 0;
};
ParagraphCorpus load_paragraphs(const std::string& path);

}  // namespace sentvec::data
