#include "sentvec/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sentvec::ckpt {

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {(unsigned char)(v & 0xff), (unsigned char)((v >> 8) & 0xff),
                        (unsigned char)((v >> 16) & 0xff), (unsigned char)((v >> 24) & 0xff)};
  out.write((const char*)b, 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read((char*)b, 4)) throw std::runtime_error("checkpoint: truncated file");
  return std::uint32_t(b[0]) | (std::uint32_t(b[1]) << 8) | (std::uint32_t(b[2]) << 16) |
         (std::uint32_t(b[3]) << 24);
}

void write_f32(std::ostream& out, const float* data, std::size_t count) {
  // Little-endian hosts can stream the buffer; others go value by value.
  static_assert(sizeof(float) == 4);
  std::uint32_t probe = 1;
  if (*(unsigned char*)&probe == 1) {
    out.write((const char*)data, std::streamsize(count * 4));
    return;
  }
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &data[i], 4);
    write_u32(out, bits);
  }
}

void read_f32(std::istream& in, float* data, std::size_t count) {
  std::uint32_t probe = 1;
  if (*(unsigned char*)&probe == 1) {
    if (!in.read((char*)data, std::streamsize(count * 4)))
      throw std::runtime_error("checkpoint: truncated tensor data");
    return;
  }
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits = read_u32(in);
    std::memcpy(&data[i], &bits, 4);
  }
}

NamedTensor from_tensor(const std::string& name, const Tensor<float>& t) {
  NamedTensor nt;
  nt.name = name;
  if (t.rows == 1) {
    nt.dims = {std::uint32_t(t.cols)};
  } else {
    nt.dims = {std::uint32_t(t.rows), std::uint32_t(t.cols)};
  }
  nt.data = t.data;
  return nt;
}

Tensor<float> to_tensor(const NamedTensor& nt) {
  Tensor<float> t;
  if (nt.dims.size() == 1) {
    t = Tensor<float>(1, nt.dims[0]);
  } else if (nt.dims.size() == 2) {
    t = Tensor<float>(nt.dims[0], nt.dims[1]);
  } else {
    throw std::runtime_error("checkpoint: unsupported rank for tensor " + nt.name);
  }
  if (t.size() != nt.data.size())
    throw std::runtime_error("checkpoint: size mismatch for tensor " + nt.name);
  t.data = nt.data;
  return t;
}

std::size_t elem_count(const NamedTensor& nt) {
  std::size_t n = 1;
  for (auto d : nt.dims) n *= d;
  return n;
}

std::uint64_t parse_u64(const std::string& s) { return std::stoull(s); }

}  // namespace

const char* kind_name(std::uint32_t kind) {
  switch (kind) {
    case kKindParaphrase:
      return "paraphrase-encdec";
    case kKindHier:
      return "hier-summarizer";
    default:
      return "unknown";
  }
}

const NamedTensor& Checkpoint::tensor(const std::string& name) const {
  for (const auto& t : tensors)
    if (t.name == name) return t;
  throw std::runtime_error("checkpoint: missing tensor " + name);
}

std::string Checkpoint::config_at(const std::string& key) const {
  auto it = config.find(key);
  if (it == config.end()) throw std::runtime_error("checkpoint: missing config key " + key);
  return it->second;
}

std::string serialize_config(const std::map<std::string, std::string>& config) {
  std::string out;
  for (const auto& [k, v] : config) {
    if (k.find('=') != std::string::npos || k.find('\n') != std::string::npos ||
        v.find('\n') != std::string::npos)
      throw std::invalid_argument("config keys/values must not contain '=' or newlines: " + k);
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::map<std::string, std::string> parse_config(const std::string& block) {
  std::map<std::string, std::string> out;
  std::istringstream ss(block);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    auto pos = line.find('=');
    if (pos == std::string::npos)
      throw std::runtime_error("config: malformed line '" + line + "'");
    out[line.substr(0, pos)] = line.substr(pos + 1);
  }
  return out;
}

void save(const Checkpoint& c, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
  out.write("SVFG", 4);
  write_u32(out, c.version);
  write_u32(out, c.kind);
  write_u32(out, std::uint32_t(c.tensors.size()));
  for (const auto& t : c.tensors) {
    write_u32(out, std::uint32_t(t.name.size()));
    out.write(t.name.data(), std::streamsize(t.name.size()));
    write_u32(out, std::uint32_t(t.dims.size()));
    for (auto d : t.dims) write_u32(out, d);
    if (elem_count(t) != t.data.size())
      throw std::runtime_error("checkpoint: dims/data mismatch for " + t.name);
    write_f32(out, t.data.data(), t.data.size());
  }
  const std::string cfg = serialize_config(c.config);
  write_u32(out, std::uint32_t(cfg.size()));
  out.write(cfg.data(), std::streamsize(cfg.size()));
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path);
}

Checkpoint load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "SVFG", 4) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  Checkpoint c;
  c.version = read_u32(in);
  if (c.version != kVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(c.version));
  c.kind = read_u32(in);
  const std::uint32_t count = read_u32(in);
  c.tensors.resize(count);
  for (auto& t : c.tensors) {
    const std::uint32_t name_len = read_u32(in);
    t.name.resize(name_len);
    if (!in.read(t.name.data(), name_len)) throw std::runtime_error("checkpoint: truncated name");
    const std::uint32_t rank = read_u32(in);
    t.dims.resize(rank);
    for (auto& d : t.dims) d = read_u32(in);
    t.data.resize(elem_count(t));
    read_f32(in, t.data.data(), t.data.size());
  }
  const std::uint32_t cfg_len = read_u32(in);
  std::string cfg(cfg_len, '\0');
  if (!in.read(cfg.data(), cfg_len)) throw std::runtime_error("checkpoint: truncated config");
  c.config = parse_config(cfg);
  return c;
}

Checkpoint to_checkpoint(const seq2seq::EncoderDecoderModel<float>& model,
                         const std::map<std::string, std::string>& extra_config) {
  Checkpoint c;
  c.kind = kKindParaphrase;
  c.tensors = {
      from_tensor("embedding", model.embedding),
      from_tensor("encoder.w", model.encoder.w),
      from_tensor("encoder.u", model.encoder.u),
      from_tensor("encoder.b", model.encoder.b),
      from_tensor("decoder.w", model.decoder.w),
      from_tensor("decoder.u", model.decoder.u),
      from_tensor("decoder.b", model.decoder.b),
      from_tensor("proj.w", model.proj.w),
      from_tensor("proj.b", model.proj.b),
  };
  c.config["d_h"] = std::to_string(model.cfg.d_h);
  c.config["d_w"] = std::to_string(model.cfg.d_w);
  c.config["vocab_size"] = std::to_string(model.cfg.vocab_size);
  c.config["reverse_encoder_input"] = model.cfg.reverse_encoder_input ? "1" : "0";
  c.config["max_len"] = std::to_string(model.cfg.max_len);
  c.config["n_samples"] = std::to_string(model.cfg.n_samples);
  c.config["freeze_embeddings"] = model.cfg.freeze_embeddings ? "1" : "0";
  for (const auto& [k, v] : extra_config) c.config[k] = v;
  return c;
}

seq2seq::EncoderDecoderModel<float> paraphrase_from_checkpoint(const Checkpoint& c) {
  if (c.kind != kKindParaphrase)
    throw std::runtime_error(std::string("checkpoint: expected paraphrase model, found ") +
                             kind_name(c.kind));
  seq2seq::EncDecConfig cfg;
  cfg.d_h = parse_u64(c.config_at("d_h"));
  cfg.d_w = parse_u64(c.config_at("d_w"));
  cfg.vocab_size = parse_u64(c.config_at("vocab_size"));
  cfg.reverse_encoder_input = c.config_at("reverse_encoder_input") == "1";
  cfg.max_len = parse_u64(c.config_at("max_len"));
  cfg.n_samples = parse_u64(c.config_at("n_samples"));
  cfg.freeze_embeddings = c.config_at("freeze_embeddings") == "1";

  seq2seq::EncoderDecoderModel<float> model(cfg, 0);
  model.embedding = to_tensor(c.tensor("embedding"));
  model.encoder.w = to_tensor(c.tensor("encoder.w"));
  model.encoder.u = to_tensor(c.tensor("encoder.u"));
  model.encoder.b = to_tensor(c.tensor("encoder.b"));
  model.decoder.w = to_tensor(c.tensor("decoder.w"));
  model.decoder.u = to_tensor(c.tensor("decoder.u"));
  model.decoder.b = to_tensor(c.tensor("decoder.b"));
  model.proj.w = to_tensor(c.tensor("proj.w"));
  model.proj.b = to_tensor(c.tensor("proj.b"));
  if (model.embedding.rows != cfg.vocab_size || model.embedding.cols != cfg.d_w ||
      model.proj.w.rows != cfg.vocab_size || model.proj.w.cols != cfg.d_h)
    throw std::runtime_error("checkpoint: tensor shapes disagree with config");
  return model;
}

Checkpoint to_checkpoint(const hier::HierModel<float>& model,
                         const std::map<std::string, std::string>& extra_config) {
  Checkpoint c;
  c.kind = kKindHier;
  c.tensors = {
      from_tensor("layer1.w", model.layer1.w),
      from_tensor("layer1.u", model.layer1.u),
      from_tensor("layer1.b", model.layer1.b),
      from_tensor("layer2.w", model.layer2.w),
      from_tensor("layer2.u", model.layer2.u),
      from_tensor("layer2.b", model.layer2.b),
      from_tensor("attn_enc.w_s", model.attn_enc.w_s),
      from_tensor("attn_enc.u_h", model.attn_enc.u_h),
      from_tensor("attn_enc.v", model.attn_enc.v),
      from_tensor("attn_dec.w_s", model.attn_dec.w_s),
      from_tensor("attn_dec.u_h", model.attn_dec.u_h),
      from_tensor("attn_dec.v", model.attn_dec.v),
      from_tensor("dec_init.w", model.dec_init_w),
      from_tensor("dec_init.b", model.dec_init_b),
      from_tensor("embedding", model.embedding),
      from_tensor("decoder.w", model.decoder.w),
      from_tensor("decoder.u", model.decoder.u),
      from_tensor("decoder.b", model.decoder.b),
      from_tensor("proj.w", model.proj.w),
      from_tensor("proj.b", model.proj.b),
  };
  c.config["sent_dim"] = std::to_string(model.cfg.sent_dim);
  c.config["d1"] = std::to_string(model.cfg.d1);
  c.config["d2"] = std::to_string(model.cfg.d2);
  c.config["d_dec"] = std::to_string(model.cfg.d_dec);
  c.config["d_attn"] = std::to_string(model.cfg.d_attn);
  c.config["d_w"] = std::to_string(model.cfg.d_w);
  c.config["vocab_size"] = std::to_string(model.cfg.vocab_size);
  c.config["t_max"] = std::to_string(model.cfg.t_max);
  c.config["chunk_size"] = std::to_string(model.cfg.chunk_size);
  c.config["stride"] = std::to_string(model.cfg.stride);
  c.config["max_summary_len"] = std::to_string(model.cfg.max_summary_len);
  for (const auto& [k, v] : extra_config) c.config[k] = v;
  return c;
}

hier::HierModel<float> hier_from_checkpoint(const Checkpoint& c) {
  if (c.kind != kKindHier)
    throw std::runtime_error(std::string("checkpoint: expected hier model, found ") +
                             kind_name(c.kind));
  hier::HierConfig cfg;
  cfg.sent_dim = parse_u64(c.config_at("sent_dim"));
  cfg.d1 = parse_u64(c.config_at("d1"));
  cfg.d2 = parse_u64(c.config_at("d2"));
  cfg.d_dec = parse_u64(c.config_at("d_dec"));
  cfg.d_attn = parse_u64(c.config_at("d_attn"));
  cfg.d_w = parse_u64(c.config_at("d_w"));
  cfg.vocab_size = parse_u64(c.config_at("vocab_size"));
  cfg.t_max = parse_u64(c.config_at("t_max"));
  cfg.chunk_size = parse_u64(c.config_at("chunk_size"));
  cfg.stride = parse_u64(c.config_at("stride"));
  cfg.max_summary_len = parse_u64(c.config_at("max_summary_len"));

  hier::HierModel<float> model(cfg, 0);
  model.layer1.w = to_tensor(c.tensor("layer1.w"));
  model.layer1.u = to_tensor(c.tensor("layer1.u"));
  model.layer1.b = to_tensor(c.tensor("layer1.b"));
  model.layer2.w = to_tensor(c.tensor("layer2.w"));
  model.layer2.u = to_tensor(c.tensor("layer2.u"));
  model.layer2.b = to_tensor(c.tensor("layer2.b"));
  model.attn_enc.w_s = to_tensor(c.tensor("attn_enc.w_s"));
  model.attn_enc.u_h = to_tensor(c.tensor("attn_enc.u_h"));
  model.attn_enc.v = to_tensor(c.tensor("attn_enc.v"));
  model.attn_dec.w_s = to_tensor(c.tensor("attn_dec.w_s"));
  model.attn_dec.u_h = to_tensor(c.tensor("attn_dec.u_h"));
  model.attn_dec.v = to_tensor(c.tensor("attn_dec.v"));
  model.dec_init_w = to_tensor(c.tensor("dec_init.w"));
  model.dec_init_b = to_tensor(c.tensor("dec_init.b"));
  model.embedding = to_tensor(c.tensor("embedding"));
  model.decoder.w = to_tensor(c.tensor("decoder.w"));
  model.decoder.u = to_tensor(c.tensor("decoder.u"));
  model.decoder.b = to_tensor(c.tensor("decoder.b"));
  model.proj.w = to_tensor(c.tensor("proj.w"));
  model.proj.b = to_tensor(c.tensor("proj.b"));
  return model;
}

void save_vectors(const std::vector<std::vector<float>>& vecs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_vectors: cannot open " + path);
  const std::uint32_t count = std::uint32_t(vecs.size());
  const std::uint32_t width = count ? std::uint32_t(vecs[0].size()) : 0;
  write_u32(out, count);
  write_u32(out, width);
  for (const auto& v : vecs) {
    if (v.size() != width) throw std::invalid_argument("save_vectors: ragged rows");
    write_f32(out, v.data(), v.size());
  }
  if (!out) throw std::runtime_error("save_vectors: write failed for " + path);
}

std::vector<std::vector<float>> load_vectors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_vectors: cannot open " + path);
  const std::uint32_t count = read_u32(in);
  const std::uint32_t width = read_u32(in);
  std::vector<std::vector<float>> vecs(count, std::vector<float>(width));
  for (auto& v : vecs) read_f32(in, v.data(), v.size());
  return vecs;
}

}  // namespace sentvec::ckpt
