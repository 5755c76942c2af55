#include "neo/detector/gradcam.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "neo/errors.hpp"

namespace neo::detect {

namespace {

double act_grad(double pre, Activation a) {
  switch (a) {
    case Activation::relu: return pre > 0 ? 1.0 : 0.0;
    case Activation::elu: return pre > 0 ? 1.0 : std::exp(pre);
  }
  return 1.0;
}

Eigen::VectorXd dense_vec(const WeightContainer& wc, const std::string& name,
                          int n) {
  const auto t = wc.tensor(name);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = t[static_cast<std::size_t>(i)];
  return v;
}

MatrixRM dense_mat(const WeightContainer& wc, const std::string& name,
                   int rows, int cols) {
  const auto t = wc.tensor(name);
  MatrixRM m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      m(r, c) = t[static_cast<std::size_t>(r) * cols + c];
  return m;
}

/// Backward through one GAT layer: gradient w.r.t. its input features.
MatrixRM gat_backward(const GatTrace& tr, const GatParams& p, Activation act,
                      const MatrixRM& d_out) {
  const auto n = d_out.rows();
  const auto fout = d_out.cols();
  const double neg = std::numeric_limits<double>::lowest();

  MatrixRM d_pre(n, fout);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index f = 0; f < fout; ++f)
      d_pre(i, f) = d_out(i, f) * act_grad(tr.pre(i, f), act);

  // pre = alpha * z + bias
  MatrixRM d_alpha = d_pre * tr.z.transpose();        // N x N
  MatrixRM d_z = tr.alpha.transpose() * d_pre;        // N x F_out

  // softmax rows over the neighborhood
  MatrixRM d_raw = MatrixRM::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double dot = 0.0;
    for (Eigen::Index j = 0; j < n; ++j)
      if (tr.pre_e(i, j) != neg) dot += tr.alpha(i, j) * d_alpha(i, j);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (tr.pre_e(i, j) == neg) continue;
      const double de = tr.alpha(i, j) * (d_alpha(i, j) - dot);
      const double slope = tr.pre_e(i, j) > 0 ? 1.0 : p.leaky_slope;
      d_raw(i, j) = de * slope;
    }
  }

  // raw_ij = a_src.z_i + a_dst.z_j
  const Eigen::VectorXd ds = d_raw.rowwise().sum();
  const Eigen::VectorXd dd = d_raw.colwise().sum().transpose();
  d_z.noalias() += ds * p.a_src.transpose();
  d_z.noalias() += dd * p.a_dst.transpose();

  // z = h * w^T
  return d_z * p.w;
}

struct HeadBackward {
  Eigen::VectorXd d_gap;
};

HeadBackward head_backward(const CnnGatModel& model,
                           const EncoderActivations& acts) {
  const auto& cfg = model.config();
  const auto& wc = model.weights();
  const int g = cfg.gat_dims[2];
  const int d1 = cfg.dense_dims[0];
  const int d2 = cfg.dense_dims[1];

  const MatrixRM w1 = dense_mat(wc, "dense/1/w", d1, g);
  const MatrixRM w2 = dense_mat(wc, "dense/2/w", d2, d1);
  const MatrixRM w3 = dense_mat(wc, "dense/3/w", 1, d2);

  // d logit / d h2 (post-activation of layer 2)
  Eigen::VectorXd dh2 = w3.row(0).transpose();
  Eigen::VectorXd dp2(d2);
  for (int i = 0; i < d2; ++i)
    dp2(i) = dh2(i) * act_grad(acts.dense_pre[1](i), model.activation());
  Eigen::VectorXd dh1 = w2.transpose() * dp2;
  Eigen::VectorXd dp1(d1);
  for (int i = 0; i < d1; ++i)
    dp1(i) = dh1(i) * act_grad(acts.dense_pre[0](i), model.activation());
  HeadBackward hb;
  hb.d_gap = w1.transpose() * dp1;
  return hb;
}

}  // namespace

std::vector<int> Relevance::top_channels(int k) const {
  std::vector<int> idx(channel_scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return channel_scores[static_cast<std::size_t>(a)] >
           channel_scores[static_cast<std::size_t>(b)];
  });
  idx.resize(static_cast<std::size_t>(std::min<int>(k, kMontageChannels)));
  return idx;
}

double head_logit(const CnnGatModel& model, const MatrixRM& h3) {
  const auto& cfg = model.config();
  const auto& wc = model.weights();
  const auto act = [&](double x) {
    if (x > 0) return x;
    return model.activation() == Activation::relu ? 0.0 : std::expm1(x);
  };
  Eigen::VectorXd v = h3.colwise().mean().transpose();
  int fin = cfg.gat_dims[2];
  for (int l = 0; l < 3; ++l) {
    const std::string base = "dense/" + std::to_string(l + 1);
    const int fout = cfg.dense_dims[static_cast<std::size_t>(l)];
    const MatrixRM w = dense_mat(wc, base + "/w", fout, fin);
    const Eigen::VectorXd b = dense_vec(wc, base + "/b", fout);
    Eigen::VectorXd next = w * v + b;
    if (l < 2)
      for (int i = 0; i < fout; ++i) next(i) = act(next(i));
    v = next;
    fin = fout;
  }
  return v(0);
}

double logit_from_gat_in(const CnnGatModel& model, const MatrixRM& gat_in) {
  MatrixRM cur = gat_in;
  for (int l = 0; l < 3; ++l) {
    const auto tr = gat_layer(cur, model.adjacency(), model.gat_params(l),
                              model.gat_activation());
    cur = tr.out;
  }
  return head_logit(model, cur);
}

LogitGradients logit_gradients(const CnnGatModel& model,
                               const EncoderActivations& acts) {
  if (acts.dense_pre.size() != 3)
    throw NumericError("grad_cam: forward pass has not been run");
  const auto n = acts.gat_in.rows();

  const auto hb = head_backward(model, acts);

  LogitGradients out;
  // GAP: every node receives d_gap / n
  out.d_final_gat.resize(n, hb.d_gap.size());
  for (Eigen::Index i = 0; i < n; ++i)
    out.d_final_gat.row(i) = hb.d_gap.transpose() / static_cast<double>(n);

  MatrixRM d = out.d_final_gat;
  for (int l = 2; l >= 0; --l)
    d = gat_backward(acts.gat[static_cast<std::size_t>(l)],
                     model.gat_params(l), model.gat_activation(), d);
  out.d_gat_in = std::move(d);
  return out;
}

Relevance grad_cam(const CnnGatModel& model, const ForwardResult& fwd) {
  const auto& acts = fwd.acts;
  const auto grads = logit_gradients(model, acts);
  const auto& cfg = model.config();
  const int n = cfg.input_channels;
  const int f4 = cfg.conv_widths[3];
  const int t4 = cfg.encoder_time();

  Relevance rel;

  // channel scores: gradient-pooled weights over the final GAT features
  const MatrixRM& h3 = acts.gat[2].out;
  Eigen::VectorXd w = grads.d_final_gat.colwise().mean().transpose();
  for (int i = 0; i < n; ++i) {
    const double s = h3.row(i).dot(w);
    rel.channel_scores[static_cast<std::size_t>(i)] = s > 0 ? s : 0.0;
  }
  const double cmax =
      *std::max_element(rel.channel_scores.begin(), rel.channel_scores.end());
  if (cmax > 0)
    for (auto& s : rel.channel_scores) s /= cmax;

  // temporal scores: gradient-weighted final CNN activations, pooled over
  // nodes, upsampled to the epoch length
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(f4);
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < f4; ++f)
      for (int t = 0; t < t4; ++t)
        beta(f) += grads.d_gat_in(i, f * t4 + t);
  beta /= static_cast<double>(n) * t4;

  std::vector<double> coarse(static_cast<std::size_t>(t4), 0.0);
  for (int t = 0; t < t4; ++t) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      for (int f = 0; f < f4; ++f)
        acc += beta(f) * acts.gat_in(i, f * t4 + t);
    acc /= n;
    coarse[static_cast<std::size_t>(t)] = acc > 0 ? acc : 0.0;
  }

  rel.temporal_scores.resize(kEpochSamples);
  for (int t = 0; t < kEpochSamples; ++t) {
    const double src = static_cast<double>(t) * (t4 - 1) / (kEpochSamples - 1);
    const int lo = static_cast<int>(std::floor(src));
    const int hi = std::min(lo + 1, t4 - 1);
    const double frac = src - lo;
    rel.temporal_scores[static_cast<std::size_t>(t)] =
        (1.0 - frac) * coarse[static_cast<std::size_t>(lo)] +
        frac * coarse[static_cast<std::size_t>(hi)];
  }
  const double tmax = *std::max_element(rel.temporal_scores.begin(),
                                        rel.temporal_scores.end());
  if (tmax > 0)
    for (auto& s : rel.temporal_scores) s /= tmax;

  return rel;
}

Relevance grad_cam(const CnnGatModel& model, const Epoch& epoch) {
  return grad_cam(model, model.forward(epoch));
}

}  // namespace neo::detect
