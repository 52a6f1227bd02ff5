#include "sentvec/datasets.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "sentvec/rng.hpp"

namespace sentvec::data {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string chomp(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::vector<CaptionGroup> load_caption_groups(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_caption_groups: cannot open " + path);
  std::vector<CaptionGroup> groups;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty())
      throw std::runtime_error("load_caption_groups: expected 'group_id<TAB>caption' at line " +
                               std::to_string(line_no));
    auto it = index.find(fields[0]);
    if (it == index.end()) {
      index.emplace(fields[0], groups.size());
      groups.push_back({fields[0], {fields[1]}});
    } else {
      groups[it->second].captions.push_back(fields[1]);
    }
  }
  return groups;
}

PairDataset build_pairs(const std::vector<CaptionGroup>& groups) {
  PairDataset ds;
  for (const auto& g : groups) {
    const std::size_t k = g.captions.size();
    if (k < 2) continue;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = 0; j < k; ++j)
        if (i != j) ds.pairs.push_back({g.captions[i], g.captions[j], g.group_id});
  }
  return ds;
}

void save_pairs(const PairDataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_pairs: cannot open " + path);
  for (const auto& p : ds.pairs) out << p.source << "\t" << p.target << "\t" << p.group_id << "\n";
  if (!out) throw std::runtime_error("save_pairs: write failed for " + path);
}

PairDataset load_pairs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_pairs: cannot open " + path);
  PairDataset ds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3)
      throw std::runtime_error("load_pairs: expected 'src<TAB>tgt<TAB>group_id' at line " +
                               std::to_string(line_no));
    ds.pairs.push_back({fields[0], fields[1], fields[2]});
  }
  return ds;
}

SplitPairs holdout_split(const PairDataset& dataset, double fraction, std::uint64_t seed) {
  if (fraction <= 0 || fraction >= 1)
    throw std::invalid_argument("holdout_split: fraction must be in (0,1)");

  std::vector<std::string> group_ids;  // first-appearance order
  std::unordered_set<std::string> seen;
  for (const auto& p : dataset.pairs)
    if (seen.insert(p.group_id).second) group_ids.push_back(p.group_id);

  SplitMix64 rng(seed);
  shuffle(group_ids, rng);
  const std::size_t n_test = std::size_t(std::llround(double(group_ids.size()) * fraction));

  std::unordered_set<std::string> test_ids(group_ids.begin(),
                                           group_ids.begin() + std::ptrdiff_t(n_test));
  SplitPairs out;
  for (const auto& p : dataset.pairs)
    (test_ids.count(p.group_id) ? out.test : out.train).pairs.push_back(p);
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_records(
    std::size_t count, double fraction, std::uint64_t seed) {
  if (fraction <= 0 || fraction >= 1)
    throw std::invalid_argument("split_records: fraction must be in (0,1)");
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  SplitMix64 rng(seed);
  shuffle(order, rng);
  const std::size_t n_test = std::size_t(std::llround(double(count) * fraction));
  std::vector<std::size_t> test(order.begin(), order.begin() + std::ptrdiff_t(n_test));
  std::vector<std::size_t> train(order.begin() + std::ptrdiff_t(n_test), order.end());
  return {train, test};
}

std::vector<RelatednessRecord> load_relatedness(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_relatedness: cannot open " + path);
  std::vector<RelatednessRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() < 4)
      throw std::runtime_error("load_relatedness: expected 4 tab-separated fields at line " +
                               std::to_string(line_no));
    double score;
    try {
      std::size_t used = 0;
      score = std::stod(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header line
      throw std::runtime_error("load_relatedness: bad score '" + fields[3] + "' at line " +
                               std::to_string(line_no));
    }
    if (score < 1.0 || score > 5.0)
      throw std::runtime_error("load_relatedness: score out of [1,5] for record " + fields[0]);
    records.push_back({fields[0], fields[1], fields[2], score});
  }
  return records;
}

ParagraphCorpus load_paragraphs(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_paragraphs: cannot open " + path);
  ParagraphCorpus corpus;
  std::vector<std::string> block;
  std::string line;
  bool saw_content = false;
  std::size_t blank_run = 0;  // blank lines since the last flushed block

  auto flush = [&](std::size_t end_line) {
    if (block.empty()) return;
    if (block.size() < 2)
      throw std::runtime_error("load_paragraphs: block ending at line " +
                               std::to_string(end_line) +
                               " has no detailed sentences before its summary");
    std::vector<std::string> detailed(block.begin(), block.end() - 1);
    if (detailed.size() > 20) {
      ++corpus.skipped_long;
    } else {
      corpus.records.push_back({std::move(detailed), block.back()});
    }
    block.clear();
  };

  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty()) {
      flush(line_no);
      if (saw_content) ++blank_run;
      continue;
    }
    // Two or more separators with nothing between them is an empty block,
    // unless the run is only trailing whitespace (checked here, on the next
    // content line, so files may end with extra newlines).
    if (blank_run >= 2)
      throw std::runtime_error("load_paragraphs: empty block before line " +
                               std::to_string(line_no));
    blank_run = 0;
    saw_content = true;
    block.push_back(line);
  }
  flush(line_no);
  if (!saw_content) throw std::runtime_error("load_paragraphs: file has no records: " + path);
  return corpus;
}

}  // namespace sentvec::data
