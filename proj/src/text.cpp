#include "sentvec/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace sentvec::text {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

std::vector<std::string> tokenize(const std::string& raw) {
  std::vector<std::string> out;
  std::string cur;
  const std::size_t n = raw.size();
  for (std::size_t i = 0; i < n; ++i) {
    unsigned char c = (unsigned char)raw[i];
    if (is_word_char(c)) {
      cur.push_back(char(std::isupper(c) ? std::tolower(c) : c));
    } else if (c == '\'' && !cur.empty() && i + 1 < n && is_word_char((unsigned char)raw[i + 1])) {
      cur.push_back('\'');  // intra-word apostrophe: don't -> don't
    } else {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

Vocabulary::Vocabulary() {
  id_to_token_ = {"<pad>", "<bos>", "<eos>", "<unk>"};
  for (int i = 0; i < kNumSpecials; ++i) token_to_id_[id_to_token_[i]] = i;
}

int Vocabulary::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || std::size_t(id) >= id_to_token_.size())
    throw std::out_of_range("Vocabulary::token: id " + std::to_string(id));
  return id_to_token_[std::size_t(id)];
}

bool Vocabulary::contains(const std::string& token) const {
  return token_to_id_.count(token) > 0;
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> tokens;
  tokens.reserve(ids.size());
  for (int i : ids) tokens.push_back(token(i));
  return tokens;
}

void Vocabulary::push_token(const std::string& token) {
  if (token_to_id_.count(token))
    throw std::invalid_argument("Vocabulary: duplicate token '" + token + "'");
  token_to_id_[token] = int(id_to_token_.size());
  id_to_token_.push_back(token);
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("Vocabulary::save: cannot open " + path);
  out << "# sentvec vocabulary: content line k (0-based) holds the token with id k+4; "
         "ids 0-3 are <pad>,<bos>,<eos>,<unk> and are not listed\n";
  for (std::size_t i = kNumSpecials; i < id_to_token_.size(); ++i) out << id_to_token_[i] << "\n";
  if (!out) throw std::runtime_error("Vocabulary::save: write failed for " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("Vocabulary::load: cannot open " + path);
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    v.push_token(line);
  }
  return v;
}

Vocabulary build_vocab(const std::vector<std::vector<std::string>>& corpus, std::size_t cap) {
  if (cap < std::size_t(kNumSpecials) + 1)
    throw std::invalid_argument("build_vocab: cap must be >= 5");
  std::map<std::string, std::size_t> freq;  // ordered: lexicographic tie-break for free
  for (const auto& sent : corpus)
    for (const auto& tok : sent) ++freq[tok];

  std::vector<std::pair<std::string, std::size_t>> items(freq.begin(), freq.end());
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary v;
  const std::size_t keep = cap - kNumSpecials;
  for (std::size_t i = 0; i < items.size() && i < keep; ++i) v.push_token(items[i].first);
  return v;
}

EmbeddingTable init_embeddings(const Vocabulary& vocab, std::size_t d_w, std::uint64_t seed) {
  EmbeddingTable table;
  table.width = d_w;
  table.matrix = init_params<float>(vocab.size(), d_w, InitScheme::UniformScaled, seed);
  for (std::size_t j = 0; j < d_w; ++j) table.matrix.at(kPad, j) = 0.0f;
  return table;
}

EmbeddingTable load_embeddings(const std::string& path, const Vocabulary& vocab,
                               std::size_t d_w, std::uint64_t seed) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_embeddings: cannot open " + path);

  EmbeddingTable table = init_embeddings(vocab, d_w, seed);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string word;
    if (!(ss >> word))
      throw std::runtime_error("load_embeddings: malformed line " + std::to_string(line_no));
    std::vector<float> vec;
    vec.reserve(d_w);
    double x;
    while (ss >> x) vec.push_back(float(x));
    if (!ss.eof())
      throw std::runtime_error("load_embeddings: malformed line " + std::to_string(line_no));
    if (vec.size() != d_w)
      throw std::runtime_error("load_embeddings: dimension mismatch at line " +
                               std::to_string(line_no) + " (got " + std::to_string(vec.size()) +
                               ", expected " + std::to_string(d_w) + ")");
    if (!vocab.contains(word)) continue;
    const int id = vocab.id(word);
    if (id == kPad) continue;
    std::copy(vec.begin(), vec.end(), table.matrix.row(std::size_t(id)));
  }
  return table;
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file_hash: cannot open " + path);
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 14];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      h ^= (unsigned char)buf[i];
      h *= 0x100000001b3ull;
    }
    if (!in) break;
  }
  return h;
}

}  // namespace sentvec::text
