#pragma once

#include <array>
#include <memory>
#include <vector>

#include "neo/detector/weights.hpp"
#include "neo/montage.hpp"
#include "neo/types.hpp"

namespace neo::detect {

/// Per-layer graph-attention parameters (single head).
struct GatParams {
  MatrixRM w;              // F_out x F_in
  Eigen::VectorXd a_src;   // F_out
  Eigen::VectorXd a_dst;   // F_out
  Eigen::VectorXd bias;    // F_out (zero when disabled)
  double leaky_slope = 0.2;
};

struct GatTrace {
  MatrixRM z;      // N x F_out, transformed features
  MatrixRM pre_e;  // N x N, attention logits before LeakyReLU (masked)
  MatrixRM alpha;  // N x N, attention coefficients (row-stochastic on mask)
  MatrixRM pre;    // N x F_out, aggregate + bias (pre-activation)
  MatrixRM out;    // N x F_out, post-activation
};

enum class Activation { relu, elu };

/// One graph-attention layer over a boolean adjacency (self-loops added).
/// Attention: e_ij = LeakyReLU(a_src.(W h_i) + a_dst.(W h_j)), softmax over
/// each node's neighborhood, then aggregation of transformed neighbors.
GatTrace gat_layer(const MatrixRM& node_feats,
                   const std::vector<std::vector<bool>>& adjacency,
                   const GatParams& params, Activation act);

/// Everything the explainability pass needs from one forward run.
struct EncoderActivations {
  MatrixRM gat_in;                  // 12 x node_features (final CNN block,
                                    // feature-major flatten of [F4][T4])
  std::array<GatTrace, 3> gat;      // per-layer traces
  Eigen::VectorXd gap;              // pooled node features
  std::vector<Eigen::VectorXd> dense_pre;  // pre-activations, 3 layers
  double logit = 0.0;
};

struct ForwardResult {
  double probability = 0.0;
  EncoderActivations acts;
};

/// CNN-GAT seizure-probability model (inference only). Pure function of
/// (epoch, weights): batch-norm uses stored running statistics, nothing is
/// mutated, and runs are bit-reproducible.
class CnnGatModel {
 public:
  CnnGatModel(std::shared_ptr<const WeightContainer> weights,
              const MontageGraph& montage);

  /// 12 x 3000 @250 Hz -> 1-16 Hz bandpass -> 32 Hz -> optional per-channel
  /// z-score -> 12 x 384 Epoch.
  Epoch preprocess(const MatrixRM& raw, std::uint64_t t_start_us = 0) const;

  ForwardResult forward(const Epoch& epoch) const;

  const ModelConfig& config() const { return weights_->config(); }
  const WeightContainer& weights() const { return *weights_; }
  const std::vector<std::vector<bool>>& adjacency() const {
    return adjacency_;
  }
  const GatParams& gat_params(int layer) const {
    return gat_[static_cast<std::size_t>(layer)];
  }
  Activation activation() const { return act_; }
  Activation gat_activation() const { return gat_act_; }

 private:
  std::shared_ptr<const WeightContainer> weights_;
  std::vector<std::vector<bool>> adjacency_;
  std::array<GatParams, 3> gat_;
  Activation act_ = Activation::relu;
  Activation gat_act_ = Activation::elu;
};

/// Standalone epoch preprocessing (shape contract 12x3000 -> 12x384).
Epoch preprocess_for_model(const MatrixRM& raw, bool zscore,
                           std::uint64_t t_start_us = 0);

}  // namespace neo::detect
