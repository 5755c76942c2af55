#pragma once

#include <array>
#include <vector>

#include "neo/detector/model.hpp"

namespace neo::detect {

/// Channel and temporal relevance, rectified, max-normalized (max == 1
/// whenever any score is positive).
struct Relevance {
  std::array<double, kMontageChannels> channel_scores{};
  std::vector<double> temporal_scores;  // length 384

  /// Channel indices ordered by descending relevance.
  std::vector<int> top_channels(int k = 3) const;
};

struct LogitGradients {
  MatrixRM d_final_gat;  // 12 x G: d logit / d (final GAT node features)
  MatrixRM d_gat_in;     // 12 x NF: d logit / d (final CNN activations)
};

/// Pre-sigmoid logit from final GAT node features (GAP + dense head only);
/// the function the analytic gradient below differentiates.
double head_logit(const CnnGatModel& model, const MatrixRM& h3);

/// Full forward from the reshaped CNN activations (GAT stack + head).
double logit_from_gat_in(const CnnGatModel& model, const MatrixRM& gat_in);

/// Exact backward pass: dense head, global average pooling, and the three
/// graph-attention layers.
LogitGradients logit_gradients(const CnnGatModel& model,
                               const EncoderActivations& acts);

Relevance grad_cam(const CnnGatModel& model, const ForwardResult& fwd);
Relevance grad_cam(const CnnGatModel& model, const Epoch& epoch);

}  // namespace neo::detect
