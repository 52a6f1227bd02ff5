#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <unordered_set>

#include "sentvec/datasets.hpp"

using namespace sentvec;
using namespace sentvec::data;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("/tmp/sentvec_data_" + name) {
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

std::vector<CaptionGroup> synthetic_groups(std::size_t m, std::size_t k) {
  std::vector<CaptionGroup> groups(m);
  for (std::size_t g = 0; g < m; ++g) {
    groups[g].group_id = "g" + std::to_string(g);
    for (std::size_t i = 0; i < k; ++i)
      groups[g].captions.push_back("cap " + std::to_string(g) + " " + std::to_string(i));
  }
  return groups;
}

}  // namespace

TEST_CASE("build_pairs emits every ordered pair, no self-pairs, no duplicates") {
  for (std::size_t k = 2; k <= 10; ++k) {
    auto ds = build_pairs(synthetic_groups(3, k));
    CHECK(ds.pairs.size() == 3 * k * (k - 1));
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : ds.pairs) {
      CHECK(p.source != p.target);
      CHECK(seen.insert({p.source, p.target}).second);
    }
  }
}

TEST_CASE("pair counts reproduce the published dataset statistics") {
  // MSR-VTT: 10,000 clips x 20 captions -> 3.8M ordered pairs, exactly.
  CHECK(10000 * 20 * 19 == 3800000);
  auto msrvtt = build_pairs(synthetic_groups(100, 20));  // scaled-down shape check
  CHECK(msrvtt.pairs.size() == 100 * 380);

  // Flickr-30k: 158K sentences at 5 per image -> 31,600 groups; the formula
  // gives 632,000 against the paper's rounded 600K, within 6%.
  const double flickr_pairs = 31600.0 * 5 * 4;
  CHECK(flickr_pairs == 632000.0);
  CHECK(std::fabs(flickr_pairs - 600000.0) / 600000.0 < 0.06);
}

TEST_CASE("two-caption group yields both orders") {
  std::vector<CaptionGroup> g{{"g0", {"a", "b"}}};
  auto ds = build_pairs(g);
  REQUIRE(ds.pairs.size() == 2);
  CHECK(ds.pairs[0].source == "a");
  CHECK(ds.pairs[0].target == "b");
  CHECK(ds.pairs[1].source == "b");
  CHECK(ds.pairs[1].target == "a");
}

TEST_CASE("holdout_split works at group level and is seeded") {
  auto ds = build_pairs(synthetic_groups(100, 3));
  auto split = holdout_split(ds, 0.05, 42);

  std::unordered_set<std::string> train_ids, test_ids;
  for (const auto& p : split.train.pairs) train_ids.insert(p.group_id);
  for (const auto& p : split.test.pairs) test_ids.insert(p.group_id);
  CHECK(test_ids.size() == 5);
  CHECK(train_ids.size() == 95);
  for (const auto& id : test_ids) CHECK(train_ids.count(id) == 0);
  CHECK(split.train.pairs.size() + split.test.pairs.size() == ds.pairs.size());

  auto again = holdout_split(ds, 0.05, 42);
  CHECK(again.test.pairs.size() == split.test.pairs.size());
  for (std::size_t i = 0; i < again.test.pairs.size(); ++i)
    CHECK(again.test.pairs[i].source == split.test.pairs[i].source);

  CHECK_THROWS(holdout_split(ds, 0.0, 1));
  CHECK_THROWS(holdout_split(ds, 1.0, 1));
}

TEST_CASE("caption file and pair file round-trip") {
  TempFile f("caps.tsv", "g1\tA dog runs.\ng1\tA dog is running.\ng2\tx\ng2\ty\n");
  auto groups = load_caption_groups(f.path);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].captions.size() == 2);

  auto ds = build_pairs(groups);
  TempFile out("pairs.tsv", "");
  save_pairs(ds, out.path);
  auto loaded = load_pairs(out.path);
  REQUIRE(loaded.pairs.size() == ds.pairs.size());
  CHECK(loaded.pairs[0].source == ds.pairs[0].source);
  CHECK(loaded.pairs[0].group_id == "g1");

  TempFile bad("caps_bad.tsv", "only-one-field\n");
  CHECK_THROWS(load_caption_groups(bad.path));
}

TEST_CASE("load_relatedness parses records and validates the scale") {
  TempFile f("sick.tsv",
             "pair_ID\tsentence_A\tsentence_B\trelatedness_score\n"
             "1\tA man is here\tA person is here\t4.5\n"
             "2\tx\ty\t1\n");
  auto records = load_relatedness(f.path);
  REQUIRE(records.size() == 2);
  CHECK(records[0].gold_score == doctest::Approx(4.5));
  CHECK(records[0].sentence_b == "A person is here");

  TempFile bad("sick_bad.tsv", "7\ta\tb\t7\n");
  CHECK_THROWS_WITH_AS(load_relatedness(bad.path), doctest::Contains("record 7"),
                       std::runtime_error);
}

TEST_CASE("load_paragraphs keeps blocks up to 20 detailed sentences") {
  std::string content =
      "s1\ns2\ns3\nsummary one\n"
      "\n"
      "only\nsummary two\n";
  TempFile f("para.txt", content);
  auto corpus = load_paragraphs(f.path);
  REQUIRE(corpus.records.size() == 2);
  CHECK(corpus.records[0].detailed.size() == 3);
  CHECK(corpus.records[0].summary == "summary one");
  CHECK(corpus.records[1].detailed.size() == 1);
  CHECK(corpus.skipped_long == 0);

  std::string big;
  for (int i = 0; i < 25; ++i) big += "sent\n";
  big += "summary\n\nshort\nsum\n";
  TempFile g("para_long.txt", big);
  auto filtered = load_paragraphs(g.path);
  CHECK(filtered.records.size() == 1);  // 25-detailed block skipped
  CHECK(filtered.skipped_long == 1);

  TempFile empty_block("para_empty.txt", "a\nsum\n\n\n\nb\nsum2\n");
  CHECK_THROWS(load_paragraphs(empty_block.path));
}

TEST_CASE("record split reproduces the published 2467/709 partition shape") {
  // 3,176 records at the paper's test share split 709 test / 2,467 train.
  auto [train, test] = split_records(3176, 709.0 / 3176.0, 7);
  CHECK(test.size() == 709);
  CHECK(train.size() == 2467);

  auto [t2, s2] = split_records(3176, 709.0 / 3176.0, 7);
  CHECK(t2 == train);
  CHECK(s2 == test);
}
