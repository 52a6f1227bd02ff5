#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "sentvec/text.hpp"

using namespace sentvec;
using namespace sentvec::text;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path("/tmp/sentvec_test_" + name) {
    std::ofstream out(path, std::ios::binary);
    out << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("tokenize lowercases, strips punctuation, keeps intra-word apostrophes") {
  CHECK(tokenize("A man jumped over the stream.") ==
        std::vector<std::string>{"a", "man", "jumped", "over", "the", "stream"});
  CHECK(tokenize("") == std::vector<std::string>{});
  CHECK(tokenize("Don't RUN!!") == std::vector<std::string>{"don't", "run"});
  CHECK(tokenize("end: 'quoted'") == std::vector<std::string>{"end", "quoted"});
  CHECK(tokenize("  \t\n ") == std::vector<std::string>{});
}

TEST_CASE("tokenize-detokenize is idempotent on already-tokenized text") {
  SUBCASE("hand cases") {
    for (const char* s : {"a man jumped", "don't run", "x", "7 dogs"}) {
      auto toks = tokenize(s);
      CHECK(tokenize(detokenize(toks)) == toks);
    }
  }
  SUBCASE("generated cases") {
    // Any tokenizer output re-tokenizes to itself.
    for (const char* raw : {"Mr. O'Brien's 2nd try!!", "A(b)c -- d_e", "''', ,,"}) {
      auto toks = tokenize(raw);
      CHECK(tokenize(detokenize(toks)) == toks);
    }
  }
}

TEST_CASE("build_vocab keeps cap-4 most frequent with lexicographic ties") {
  std::vector<std::vector<std::string>> corpus{{"a", "a", "a", "b", "b", "c"}};
  auto v = build_vocab(corpus, 6);
  CHECK(v.size() == 6);
  CHECK(v.token(0) == "<pad>");
  CHECK(v.token(1) == "<bos>");
  CHECK(v.token(2) == "<eos>");
  CHECK(v.token(3) == "<unk>");
  CHECK(v.token(4) == "a");
  CHECK(v.token(5) == "b");
  CHECK(v.id("c") == kUnk);  // dropped by the cap

  auto all = build_vocab(corpus, 100);
  CHECK(all.size() == 7);  // cap above distinct count keeps everything

  std::vector<std::vector<std::string>> ties{{"y", "x"}};
  auto vt = build_vocab(ties, 5);
  CHECK(vt.token(4) == "x");  // equal frequency: x before y
  CHECK(vt.id("y") == kUnk);

  CHECK_THROWS(build_vocab(corpus, 4));
}

TEST_CASE("vocabulary ids round-trip and persist") {
  std::vector<std::vector<std::string>> corpus{{"walks", "dog", "dog", "a", "a", "a"}};
  auto v = build_vocab(corpus, 10);
  for (int id = 0; id < int(v.size()); ++id) CHECK(v.id(v.token(id)) == id);

  TempFile f("vocab.txt", "");
  v.save(f.path);
  auto loaded = Vocabulary::load(f.path);
  CHECK(loaded.size() == v.size());
  for (int id = 0; id < int(v.size()); ++id) CHECK(loaded.token(id) == v.token(id));

  // File layout: header line, then tokens from id 4 on.
  std::ifstream in(f.path);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("#", 0) == 0);
  std::getline(in, line);
  CHECK(line == v.token(4));
}

TEST_CASE("load_embeddings reads GloVe text format") {
  std::vector<std::vector<std::string>> corpus{{"hi", "there"}};
  auto v = build_vocab(corpus, 10);

  SUBCASE("covered word takes the file vector exactly") {
    TempFile f("glove_ok.txt", "hi 0.1 0.2\n");
    auto table = load_embeddings(f.path, v, 2);
    CHECK(table.matrix.at(std::size_t(v.id("hi")), 0) == 0.1f);
    CHECK(table.matrix.at(std::size_t(v.id("hi")), 1) == 0.2f);
  }
  SUBCASE("PAD row is zero, uncovered rows stay inside the init bound") {
    TempFile f("glove_pad.txt", "hi 0.1 0.2\n");
    auto table = load_embeddings(f.path, v, 2);
    CHECK(table.matrix.at(kPad, 0) == 0.0f);
    CHECK(table.matrix.at(kPad, 1) == 0.0f);
    const double bound = uniform_scaled_bound<float>(v.size(), 2);
    const auto tid = std::size_t(v.id("there"));
    CHECK(std::fabs(table.matrix.at(tid, 0)) < bound);
    CHECK(std::fabs(table.matrix.at(tid, 1)) < bound);
  }
  SUBCASE("dimension mismatch and malformed lines carry the line number") {
    TempFile f("glove_dim.txt", "hi 0.1 0.2\nthere 0.3\n");
    CHECK_THROWS_WITH_AS(load_embeddings(f.path, v, 2),
                         doctest::Contains("line 2"), std::runtime_error);
    TempFile g("glove_bad.txt", "hi 0.1 zebra\n");
    CHECK_THROWS_AS(load_embeddings(g.path, v, 2), std::runtime_error);
  }
}

TEST_CASE("file_hash changes when content changes") {
  TempFile a("hash_a.txt", "alpha\n");
  TempFile b("hash_b.txt", "alpha\n");
  TempFile c("hash_c.txt", "beta\n");
  CHECK(file_hash(a.path) == file_hash(b.path));
  CHECK(file_hash(a.path) != file_hash(c.path));
}
