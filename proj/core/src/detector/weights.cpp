#include "neo/detector/weights.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <random>

#include <json.hpp>

#include "neo/errors.hpp"
#include "neo/stream/checksum.hpp"

namespace neo::detect {

using json = nlohmann::json;

namespace {

constexpr char kMagic[8] = {'N', 'E', 'O', 'W', 'T', 'S', '0', '1'};

json config_to_json(const ModelConfig& c) {
  return json{
      {"input_channels", c.input_channels},
      {"input_samples", c.input_samples},
      {"block1_kernels", c.block1_kernels},
      {"conv_widths", c.conv_widths},
      {"res_kernel", c.res_kernel},
      {"conv_bias", c.conv_bias},
      {"gat_dims", c.gat_dims},
      {"gat_heads", c.gat_heads},
      {"gat_bias", c.gat_bias},
      {"leaky_slope", c.leaky_slope},
      {"dense_dims", c.dense_dims},
      {"activation", c.activation},
      {"gat_activation", c.gat_activation},
      {"bn_eps", c.bn_eps},
      {"zscore", c.zscore},
  };
}

ModelConfig config_from_json(const json& j) {
  ModelConfig c;
  j.at("input_channels").get_to(c.input_channels);
  j.at("input_samples").get_to(c.input_samples);
  j.at("block1_kernels").get_to(c.block1_kernels);
  j.at("conv_widths").get_to(c.conv_widths);
  j.at("res_kernel").get_to(c.res_kernel);
  j.at("conv_bias").get_to(c.conv_bias);
  j.at("gat_dims").get_to(c.gat_dims);
  j.at("gat_heads").get_to(c.gat_heads);
  j.at("gat_bias").get_to(c.gat_bias);
  j.at("leaky_slope").get_to(c.leaky_slope);
  j.at("dense_dims").get_to(c.dense_dims);
  j.at("activation").get_to(c.activation);
  j.at("gat_activation").get_to(c.gat_activation);
  j.at("bn_eps").get_to(c.bn_eps);
  j.at("zscore").get_to(c.zscore);
  return c;
}

}  // namespace

ModelConfig ModelConfig::reference() { return ModelConfig{}; }

int ModelConfig::encoder_time() const {
  int t = input_samples;
  for (int b = 0; b < 4; ++b) t /= 2;
  return t;
}

int ModelConfig::node_features() const {
  return conv_widths[3] * encoder_time();
}

std::int64_t TensorSpec::numel() const {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::vector<TensorSpec> architecture_tensors(const ModelConfig& cfg) {
  std::vector<TensorSpec> t;
  const auto conv = [&](const std::string& name, int out, int in, int k) {
    t.push_back({name + "/w", {out, in, k}, true});
    if (cfg.conv_bias) t.push_back({name + "/b", {out}, true});
  };
  const auto bn = [&](const std::string& name, int f) {
    t.push_back({name + "/gamma", {f}, true});
    t.push_back({name + "/beta", {f}, true});
    t.push_back({name + "/mean", {f}, false});
    t.push_back({name + "/var", {f}, false});
  };

  const auto& w = cfg.conv_widths;
  conv("cnn/block1/conv_a", w[0], 1, cfg.block1_kernels[0]);
  conv("cnn/block1/conv_b", w[0], 1, cfg.block1_kernels[1]);
  bn("cnn/block1/bn", w[0]);

  int prev = w[0];
  for (int b = 1; b < 4; ++b) {
    const std::string base = "cnn/block" + std::to_string(b + 1);
    conv(base + "/conv1", w[b], prev, cfg.res_kernel);
    bn(base + "/bn1", w[b]);
    conv(base + "/conv2", w[b], w[b], cfg.res_kernel);
    bn(base + "/bn2", w[b]);
    if (w[b] != prev) conv(base + "/proj", w[b], prev, 1);
    prev = w[b];
  }

  int fin = cfg.node_features();
  for (int l = 0; l < 3; ++l) {
    const std::string base = "gat/" + std::to_string(l + 1);
    const int fout = cfg.gat_dims[static_cast<std::size_t>(l)];
    t.push_back({base + "/w", {fout, fin}, true});
    t.push_back({base + "/a_src", {fout}, true});
    t.push_back({base + "/a_dst", {fout}, true});
    if (cfg.gat_bias) t.push_back({base + "/b", {fout}, true});
    fin = fout;
  }

  for (int l = 0; l < 3; ++l) {
    const std::string base = "dense/" + std::to_string(l + 1);
    const int fout = cfg.dense_dims[static_cast<std::size_t>(l)];
    t.push_back({base + "/w", {fout, fin}, true});
    t.push_back({base + "/b", {fout}, true});
    fin = fout;
  }
  return t;
}

std::int64_t ModelConfig::expected_learnable() const {
  // Closed-form, layer by layer (kept independent of architecture_tensors).
  std::int64_t n = 0;
  const auto& w = conv_widths;
  const std::int64_t cb = conv_bias ? 1 : 0;
  n += static_cast<std::int64_t>(w[0]) * (block1_kernels[0] + cb);
  n += static_cast<std::int64_t>(w[0]) * (block1_kernels[1] + cb);
  n += 2 * w[0];  // bn gamma/beta
  int prev = w[0];
  for (int b = 1; b < 4; ++b) {
    n += static_cast<std::int64_t>(w[b]) * (prev * res_kernel + cb);
    n += static_cast<std::int64_t>(w[b]) * (w[b] * res_kernel + cb);
    n += 4 * w[b];
    if (w[b] != prev) n += static_cast<std::int64_t>(w[b]) * (prev + cb);
    prev = w[b];
  }
  int fin = node_features();
  for (int l = 0; l < 3; ++l) {
    const int fout = gat_dims[static_cast<std::size_t>(l)];
    n += static_cast<std::int64_t>(fout) * fin;  // W
    n += 2 * fout;                               // a_src, a_dst
    if (gat_bias) n += fout;
    fin = fout;
  }
  for (int l = 0; l < 3; ++l) {
    const int fout = dense_dims[static_cast<std::size_t>(l)];
    n += static_cast<std::int64_t>(fout) * fin + fout;
    fin = fout;
  }
  return n;
}

std::int64_t ModelConfig::expected_non_learnable() const {
  std::int64_t bn_widths = conv_widths[0];
  for (int b = 1; b < 4; ++b) bn_widths += 2 * conv_widths[b];
  return 2 * bn_widths;  // running mean + var
}

std::string ModelConfig::to_json() const { return config_to_json(*this).dump(2); }

ModelConfig ModelConfig::from_json(const std::string& s) {
  return config_from_json(json::parse(s));
}

void WeightContainer::add_tensor(const std::string& name,
                                 std::vector<int> shape,
                                 std::span<const float> data, bool learnable) {
  if (index_.count(name))
    throw NumericError("weight container: duplicate tensor " + name);
  TensorSpec spec{name, std::move(shape), learnable};
  if (static_cast<std::int64_t>(data.size()) != spec.numel())
    throw NumericError("weight container: data size mismatch for " + name);
  while (blob_.size() % 2 != 0) blob_.push_back(0.0f);  // 8-byte alignment
  index_[name] = {blob_.size(), data.size()};
  blob_.insert(blob_.end(), data.begin(), data.end());
  specs_.push_back(std::move(spec));
}

std::span<const float> WeightContainer::tensor(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end())
    throw NumericError("weight container: missing tensor " + name);
  return std::span<const float>(blob_.data() + it->second.first,
                                it->second.second);
}

bool WeightContainer::has_tensor(const std::string& name) const {
  return index_.count(name) != 0;
}

std::int64_t WeightContainer::learnable_count() const {
  std::int64_t n = 0;
  for (const auto& s : specs_)
    if (s.learnable) n += s.numel();
  return n;
}

std::int64_t WeightContainer::non_learnable_count() const {
  std::int64_t n = 0;
  for (const auto& s : specs_)
    if (!s.learnable) n += s.numel();
  return n;
}

void WeightContainer::rebind_adjacency(const MontageGraph& m) {
  adjacency_hash_ = m.hash();
}

WeightContainer WeightContainer::random(const ModelConfig& cfg,
                                        const MontageGraph& m,
                                        std::uint64_t seed) {
  WeightContainer wc;
  wc.cfg_ = cfg;
  wc.adjacency_hash_ = m.hash();
  wc.has_model_ = true;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uni(-1.0f, 1.0f);

  for (const auto& spec : architecture_tensors(cfg)) {
    std::vector<float> data(static_cast<std::size_t>(spec.numel()));
    const auto ends_with = [&](const char* suffix) {
      const std::string s = suffix;
      return spec.name.size() >= s.size() &&
             spec.name.compare(spec.name.size() - s.size(), s.size(), s) == 0;
    };
    if (ends_with("/gamma") || ends_with("/var")) {
      std::fill(data.begin(), data.end(), 1.0f);
    } else if (ends_with("/beta") || ends_with("/mean")) {
      std::fill(data.begin(), data.end(), 0.0f);
    } else if (ends_with("/b")) {
      for (auto& v : data) v = 0.05f * uni(rng);
    } else {
      // glorot-style uniform
      std::int64_t fan_in = 1, fan_out = 1;
      if (spec.shape.size() == 3) {
        fan_in = static_cast<std::int64_t>(spec.shape[1]) * spec.shape[2];
        fan_out = static_cast<std::int64_t>(spec.shape[0]) * spec.shape[2];
      } else if (spec.shape.size() == 2) {
        fan_in = spec.shape[1];
        fan_out = spec.shape[0];
      } else {
        fan_in = fan_out = spec.shape[0];
      }
      const float limit =
          std::sqrt(6.0f / static_cast<float>(fan_in + fan_out));
      for (auto& v : data) v = limit * uni(rng);
    }
    wc.add_tensor(spec.name, spec.shape, data, spec.learnable);
  }
  return wc;
}

void WeightContainer::save(const std::string& path) const {
  json manifest;
  manifest["format"] = 1;
  manifest["kind"] = has_model_ ? "model" : "tensors";
  manifest["model_config"] = config_to_json(cfg_);
  manifest["adjacency_hash"] = adjacency_hash_;
  manifest["blob_size_bytes"] = blob_.size() * sizeof(float);
  manifest["blob_fnv1a"] = stream::fnv1a64(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(blob_.data()),
      blob_.size() * sizeof(float)));
  json dir = json::array();
  for (const auto& s : specs_) {
    const auto& loc = index_.at(s.name);
    dir.push_back({{"name", s.name},
                   {"shape", s.shape},
                   {"dtype", "f32"},
                   {"offset", loc.first * sizeof(float)},
                   {"learnable", s.learnable}});
  }
  manifest["tensors"] = dir;
  const std::string text = manifest.dump();

  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("weight container: cannot open " + path);
  struct Closer {
    std::FILE* f;
    ~Closer() { std::fclose(f); }
  } closer{f};

  const std::uint64_t mlen = text.size();
  if (std::fwrite(kMagic, 1, 8, f) != 8 ||
      std::fwrite(&mlen, sizeof mlen, 1, f) != 1 ||
      std::fwrite(text.data(), 1, text.size(), f) != text.size())
    throw IoError("weight container: write failed");
  const std::size_t pos = 16 + text.size();
  const std::size_t pad = (8 - pos % 8) % 8;
  const char zeros[8] = {};
  if (pad && std::fwrite(zeros, 1, pad, f) != pad)
    throw IoError("weight container: write failed");
  if (std::fwrite(blob_.data(), sizeof(float), blob_.size(), f) !=
      blob_.size())
    throw IoError("weight container: write failed");
}

WeightContainer WeightContainer::load(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("weight container: cannot open " + path);
  struct Closer {
    std::FILE* f;
    ~Closer() { std::fclose(f); }
  } closer{f};

  char magic[8];
  std::uint64_t mlen = 0;
  if (std::fread(magic, 1, 8, f) != 8 ||
      std::memcmp(magic, kMagic, 8) != 0)
    throw IoError("weight container: bad magic in " + path);
  if (std::fread(&mlen, sizeof mlen, 1, f) != 1 || mlen > (1ull << 30))
    throw IoError("weight container: bad manifest length");
  std::string text(mlen, '\0');
  if (std::fread(text.data(), 1, mlen, f) != mlen)
    throw IoError("weight container: truncated manifest");
  const std::size_t pos = 16 + text.size();
  const std::size_t pad = (8 - pos % 8) % 8;
  if (pad) std::fseek(f, static_cast<long>(pad), SEEK_CUR);

  json manifest = json::parse(text);
  WeightContainer wc;
  wc.has_model_ =
      manifest.value("kind", std::string("model")) == "model";
  wc.cfg_ = config_from_json(manifest.at("model_config"));
  wc.adjacency_hash_ = manifest.at("adjacency_hash").get<std::uint64_t>();
  const auto blob_bytes = manifest.at("blob_size_bytes").get<std::size_t>();
  if (blob_bytes % sizeof(float) != 0)
    throw IoError("weight container: blob size not float-aligned");
  wc.blob_.resize(blob_bytes / sizeof(float));
  if (std::fread(wc.blob_.data(), 1, blob_bytes, f) != blob_bytes)
    throw IoError("weight container: truncated blob");

  const auto sum = stream::fnv1a64(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(wc.blob_.data()), blob_bytes));
  if (sum != manifest.at("blob_fnv1a").get<std::uint64_t>())
    throw IoError("weight container: blob checksum mismatch");

  for (const auto& e : manifest.at("tensors")) {
    TensorSpec spec;
    spec.name = e.at("name").get<std::string>();
    spec.shape = e.at("shape").get<std::vector<int>>();
    spec.learnable = e.at("learnable").get<bool>();
    const auto off = e.at("offset").get<std::size_t>();
    if (e.at("dtype").get<std::string>() != "f32")
      throw IoError("weight container: unsupported dtype for " + spec.name);
    if (off % sizeof(float) != 0 ||
        off / sizeof(float) + static_cast<std::size_t>(spec.numel()) >
            wc.blob_.size())
      throw IoError("weight container: tensor " + spec.name +
                    " out of bounds");
    wc.index_[spec.name] = {off / sizeof(float),
                            static_cast<std::size_t>(spec.numel())};
    wc.specs_.push_back(std::move(spec));
  }

  // every tensor the architecture names must exist with the right shape
  if (!wc.has_model_) return wc;
  for (const auto& need : architecture_tensors(wc.cfg_)) {
    const auto it = wc.index_.find(need.name);
    if (it == wc.index_.end())
      throw IoError("weight container: architecture tensor missing: " +
                    need.name);
    for (const auto& s : wc.specs_) {
      if (s.name == need.name && s.shape != need.shape)
        throw IoError("weight container: shape mismatch for " + need.name);
    }
  }
  return wc;
}

}  // namespace neo::detect
