#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "neo/montage.hpp"

namespace neo::detect {

/// Architecture hyperparameters. Stored as data in the weight container so
/// alternates can be trialed without a rebuild.
struct ModelConfig {
  int input_channels = 12;
  int input_samples = 384;

  std::array<int, 2> block1_kernels{5, 7};   // parallel temporal convs
  std::array<int, 4> conv_widths{8, 12, 16, 20};
  int res_kernel = 3;
  bool conv_bias = false;  // BN follows every counted conv

  std::array<int, 3> gat_dims{73, 48, 24};
  int gat_heads = 1;
  bool gat_bias = true;
  double leaky_slope = 0.2;

  std::array<int, 3> dense_dims{32, 16, 1};

  std::string activation = "relu";
  std::string gat_activation = "elu";
  double bn_eps = 1e-5;
  bool zscore = true;

  static ModelConfig reference();

  /// Pooled-by-2 time length after the four encoder blocks.
  int encoder_time() const;
  /// GAT input feature width (final conv width * encoder_time).
  int node_features() const;

  /// Closed-form parameter counts from the layer structure (the container
  /// manifest provides the independent tally).
  std::int64_t expected_learnable() const;
  std::int64_t expected_non_learnable() const;

  std::string to_json() const;
  static ModelConfig from_json(const std::string& json);
};

struct TensorSpec {
  std::string name;
  std::vector<int> shape;
  bool learnable = true;
  std::int64_t numel() const;
};

/// Every tensor the architecture requires, in canonical order.
std::vector<TensorSpec> architecture_tensors(const ModelConfig& cfg);

/// Single-file named-tensor store:
///   magic "NEOWTS01" | u64 manifest bytes | manifest JSON | pad to 8 |
///   float32 blob (every tensor offset 8-byte aligned)
/// The manifest carries the model config, the montage adjacency hash, the
/// tensor directory (name/shape/dtype/offset/learnable) and an FNV-1a
/// checksum of the blob.
class WeightContainer {
 public:
  static WeightContainer random(const ModelConfig& cfg, const MontageGraph& m,
                                std::uint64_t seed);
  static WeightContainer load(const std::string& path);
  void save(const std::string& path) const;

  std::span<const float> tensor(const std::string& name) const;
  bool has_tensor(const std::string& name) const;
  const std::vector<TensorSpec>& tensors() const { return specs_; }

  const ModelConfig& config() const { return cfg_; }
  std::uint64_t adjacency_hash() const { return adjacency_hash_; }

  /// Counts from the manifest directory alone.
  std::int64_t learnable_count() const;
  std::int64_t non_learnable_count() const;

  /// True when the container carries a full model (architecture tensors
  /// validated on load); plain tensor stores skip that check.
  bool has_model() const { return has_model_; }

  /// Re-pins the container to a different montage (same tensors).
  void rebind_adjacency(const MontageGraph& m);

  /// Extra tensors (classifier weights, exported datasets) ride along.
  void add_tensor(const std::string& name, std::vector<int> shape,
                  std::span<const float> data, bool learnable = true);

 private:
  ModelConfig cfg_;
  std::uint64_t adjacency_hash_ = 0;
  bool has_model_ = false;
  std::vector<TensorSpec> specs_;
  std::map<std::string, std::pair<std::size_t, std::size_t>> index_;  // -> (float offset, numel)
  std::vector<float> blob_;
};

}  // namespace neo::detect
