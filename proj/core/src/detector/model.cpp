#include "neo/detector/model.hpp"

#include <cmath>
#include <limits>

#include "neo/dsp/design.hpp"
#include "neo/dsp/resample.hpp"
#include "neo/errors.hpp"

namespace neo::detect {

namespace {

double activate(double x, Activation a) {
  switch (a) {
    case Activation::relu: return x > 0 ? x : 0.0;
    case Activation::elu: return x > 0 ? x : std::expm1(x);
  }
  return x;
}

Activation parse_activation(const std::string& s) {
  if (s == "relu") return Activation::relu;
  if (s == "elu") return Activation::elu;
  throw NumericError("model: unknown activation '" + s + "'");
}

// [feat][time] feature maps for one node
struct FeatureMap {
  int f = 0, t = 0;
  std::vector<double> v;
  FeatureMap() = default;
  FeatureMap(int nf, int nt) : f(nf), t(nt), v(static_cast<std::size_t>(nf) * nt, 0.0) {}
  double& at(int fi, int ti) { return v[static_cast<std::size_t>(fi) * t + ti]; }
  double at(int fi, int ti) const {
    return v[static_cast<std::size_t>(fi) * t + ti];
  }
};

// same-padding 1D convolution along time (shifted-accumulate form keeps
// the inner loop branch-free)
FeatureMap conv1d(const FeatureMap& in, std::span<const float> w,
                  std::span<const float> bias, int out_f, int k) {
  FeatureMap out(out_f, in.t);
  const int half = k / 2;
  for (int of = 0; of < out_f; ++of) {
    double* orow = &out.v[static_cast<std::size_t>(of) * in.t];
    const double b = bias.empty() ? 0.0 : bias[static_cast<std::size_t>(of)];
    for (int t = 0; t < in.t; ++t) orow[t] = b;
    for (int c = 0; c < in.f; ++c) {
      const double* irow = &in.v[static_cast<std::size_t>(c) * in.t];
      const std::size_t wbase = (static_cast<std::size_t>(of) * in.f + c) * k;
      for (int kk = 0; kk < k; ++kk) {
        const double wv = w[wbase + static_cast<std::size_t>(kk)];
        const int shift = kk - half;
        const int t0 = std::max(0, -shift);
        const int t1 = std::min(in.t, in.t - shift);
        for (int t = t0; t < t1; ++t) orow[t] += wv * irow[t + shift];
      }
    }
  }
  return out;
}

void batchnorm_inplace(FeatureMap& x, std::span<const float> gamma,
                       std::span<const float> beta,
                       std::span<const float> mean, std::span<const float> var,
                       double eps) {
  for (int f = 0; f < x.f; ++f) {
    const double g = gamma[static_cast<std::size_t>(f)];
    const double b = beta[static_cast<std::size_t>(f)];
    const double m = mean[static_cast<std::size_t>(f)];
    const double inv = 1.0 / std::sqrt(var[static_cast<std::size_t>(f)] + eps);
    for (int t = 0; t < x.t; ++t) x.at(f, t) = g * (x.at(f, t) - m) * inv + b;
  }
}

FeatureMap avgpool2(const FeatureMap& x) {
  FeatureMap out(x.f, x.t / 2);
  for (int f = 0; f < x.f; ++f)
    for (int t = 0; t < out.t; ++t)
      out.at(f, t) = 0.5 * (x.at(f, 2 * t) + x.at(f, 2 * t + 1));
  return out;
}

void activate_inplace(FeatureMap& x, Activation a) {
  for (auto& v : x.v) v = activate(v, a);
}

}  // namespace

GatTrace gat_layer(const MatrixRM& h,
                   const std::vector<std::vector<bool>>& adjacency,
                   const GatParams& p, Activation act) {
  const auto n = h.rows();
  if (static_cast<std::size_t>(n) != adjacency.size())
    throw NumericError("gat_layer: adjacency size mismatch");
  if (h.cols() != p.w.cols())
    throw NumericError("gat_layer: feature width mismatch");

  GatTrace tr;
  tr.z = h * p.w.transpose();  // N x F_out

  const Eigen::VectorXd s = tr.z * p.a_src;  // per source node
  const Eigen::VectorXd d = tr.z * p.a_dst;  // per neighbor node

  const double neg = std::numeric_limits<double>::lowest();
  tr.pre_e.setConstant(n, n, neg);
  tr.alpha.setZero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double mx = neg;
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool connected =
          i == j || adjacency[static_cast<std::size_t>(i)]
                             [static_cast<std::size_t>(j)];  // self-loop
      if (!connected) continue;
      const double raw = s(i) + d(j);
      const double e = raw > 0 ? raw : p.leaky_slope * raw;
      tr.pre_e(i, j) = raw;
      if (e > mx) mx = e;
    }
    double denom = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (tr.pre_e(i, j) == neg) continue;
      const double raw = tr.pre_e(i, j);
      const double e = raw > 0 ? raw : p.leaky_slope * raw;
      tr.alpha(i, j) = std::exp(e - mx);
      denom += tr.alpha(i, j);
    }
    for (Eigen::Index j = 0; j < n; ++j) tr.alpha(i, j) /= denom;
  }

  tr.pre = tr.alpha * tr.z;
  tr.pre.rowwise() += p.bias.transpose();
  tr.out = tr.pre;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < tr.out.cols(); ++j)
      tr.out(i, j) = activate(tr.out(i, j), act);
  return tr;
}

CnnGatModel::CnnGatModel(std::shared_ptr<const WeightContainer> weights,
                         const MontageGraph& montage)
    : weights_(std::move(weights)), adjacency_(montage.adjacency()) {
  if (weights_->adjacency_hash() != montage.hash())
    throw NumericError(
        "model: weight container was built for a different montage "
        "(adjacency hash mismatch)");
  const auto& cfg = weights_->config();
  if (montage.n_channels() != cfg.input_channels)
    throw NumericError("model: montage channel count mismatch");
  act_ = parse_activation(cfg.activation);
  gat_act_ = parse_activation(cfg.gat_activation);

  int fin = cfg.node_features();
  for (int l = 0; l < 3; ++l) {
    const std::string base = "gat/" + std::to_string(l + 1);
    const int fout = cfg.gat_dims[static_cast<std::size_t>(l)];
    auto& g = gat_[static_cast<std::size_t>(l)];
    const auto wt = weights_->tensor(base + "/w");
    g.w.resize(fout, fin);
    for (int r = 0; r < fout; ++r)
      for (int c = 0; c < fin; ++c)
        g.w(r, c) = wt[static_cast<std::size_t>(r) * fin + c];
    const auto as = weights_->tensor(base + "/a_src");
    const auto ad = weights_->tensor(base + "/a_dst");
    g.a_src.resize(fout);
    g.a_dst.resize(fout);
    for (int r = 0; r < fout; ++r) {
      g.a_src(r) = as[static_cast<std::size_t>(r)];
      g.a_dst(r) = ad[static_cast<std::size_t>(r)];
    }
    g.bias = Eigen::VectorXd::Zero(fout);
    if (cfg.gat_bias) {
      const auto bt = weights_->tensor(base + "/b");
      for (int r = 0; r < fout; ++r) g.bias(r) = bt[static_cast<std::size_t>(r)];
    }
    g.leaky_slope = cfg.leaky_slope;
    fin = fout;
  }
}

Epoch preprocess_for_model(const MatrixRM& raw, bool zscore,
                           std::uint64_t t_start_us) {
  if (raw.rows() != kMontageChannels || raw.cols() != 3000)
    throw NumericError("preprocess_for_model: expected 12x3000, got " +
                       std::to_string(raw.rows()) + "x" +
                       std::to_string(raw.cols()));
  static const dsp::BiquadCascade kModelBand =
      dsp::design_butterworth_bandpass_hz(4, 1.0, 16.0, 250.0);

  Epoch e;
  e.t_start_us = t_start_us;
  e.data.resize(kMontageChannels, kEpochSamples);
  for (int ch = 0; ch < kMontageChannels; ++ch) {
    std::span<const double> row(raw.row(ch).data(), 3000);
    const auto filtered = dsp::filter_signal(kModelBand, row);
    const auto down = dsp::resample_to_32hz(filtered);
    for (int i = 0; i < kEpochSamples; ++i)
      e.data(ch, i) = down[static_cast<std::size_t>(i)];
    if (zscore) {
      const double mean = e.data.row(ch).mean();
      const double var =
          (e.data.row(ch).array() - mean).square().sum() / kEpochSamples;
      const double sd = std::sqrt(var);
      if (sd > 1e-12)
        e.data.row(ch) = (e.data.row(ch).array() - mean) / sd;
      else
        e.data.row(ch).setZero();
    }
  }
  e.validate();
  return e;
}

Epoch CnnGatModel::preprocess(const MatrixRM& raw,
                              std::uint64_t t_start_us) const {
  return preprocess_for_model(raw, weights_->config().zscore, t_start_us);
}

ForwardResult CnnGatModel::forward(const Epoch& epoch) const {
  epoch.validate();
  const auto& cfg = weights_->config();
  const auto& wc = *weights_;
  const int n_nodes = cfg.input_channels;

  ForwardResult res;
  res.acts.gat_in.resize(n_nodes, cfg.node_features());

  const std::span<const float> empty;
  const auto maybe_bias = [&](const std::string& name) {
    return cfg.conv_bias ? wc.tensor(name) : empty;
  };

  for (int node = 0; node < n_nodes; ++node) {
    FeatureMap x(1, cfg.input_samples);
    for (int t = 0; t < cfg.input_samples; ++t) x.at(0, t) = epoch.data(node, t);

    // block 1: parallel temporal convs, add, pool, BN
    auto a = conv1d(x, wc.tensor("cnn/block1/conv_a/w"),
                    maybe_bias("cnn/block1/conv_a/b"), cfg.conv_widths[0],
                    cfg.block1_kernels[0]);
    const auto b = conv1d(x, wc.tensor("cnn/block1/conv_b/w"),
                          maybe_bias("cnn/block1/conv_b/b"),
                          cfg.conv_widths[0], cfg.block1_kernels[1]);
    for (std::size_t i = 0; i < a.v.size(); ++i) a.v[i] += b.v[i];
    auto h = avgpool2(a);
    batchnorm_inplace(h, wc.tensor("cnn/block1/bn/gamma"),
                      wc.tensor("cnn/block1/bn/beta"),
                      wc.tensor("cnn/block1/bn/mean"),
                      wc.tensor("cnn/block1/bn/var"), cfg.bn_eps);

    // blocks 2-4: residual
    int prev_w = cfg.conv_widths[0];
    for (int blk = 1; blk < 4; ++blk) {
      const std::string base = "cnn/block" + std::to_string(blk + 1);
      const int fw = cfg.conv_widths[static_cast<std::size_t>(blk)];
      auto c1 = conv1d(h, wc.tensor(base + "/conv1/w"),
                       maybe_bias(base + "/conv1/b"), fw, cfg.res_kernel);
      batchnorm_inplace(c1, wc.tensor(base + "/bn1/gamma"),
                        wc.tensor(base + "/bn1/beta"),
                        wc.tensor(base + "/bn1/mean"),
                        wc.tensor(base + "/bn1/var"), cfg.bn_eps);
      activate_inplace(c1, act_);
      auto c2 = conv1d(c1, wc.tensor(base + "/conv2/w"),
                       maybe_bias(base + "/conv2/b"), fw, cfg.res_kernel);
      batchnorm_inplace(c2, wc.tensor(base + "/bn2/gamma"),
                        wc.tensor(base + "/bn2/beta"),
                        wc.tensor(base + "/bn2/mean"),
                        wc.tensor(base + "/bn2/var"), cfg.bn_eps);
      FeatureMap shortcut = h;
      if (fw != prev_w)
        shortcut = conv1d(h, wc.tensor(base + "/proj/w"), empty, fw, 1);
      for (std::size_t i = 0; i < c2.v.size(); ++i) c2.v[i] += shortcut.v[i];
      activate_inplace(c2, act_);
      h = avgpool2(c2);
      prev_w = fw;
    }

    // feature-major flatten into the node feature row
    int col = 0;
    for (int f = 0; f < h.f; ++f)
      for (int t = 0; t < h.t; ++t) res.acts.gat_in(node, col++) = h.at(f, t);
  }

  // graph attention stack
  MatrixRM cur = res.acts.gat_in;
  for (int l = 0; l < 3; ++l) {
    res.acts.gat[static_cast<std::size_t>(l)] =
        gat_layer(cur, adjacency_, gat_[static_cast<std::size_t>(l)], gat_act_);
    cur = res.acts.gat[static_cast<std::size_t>(l)].out;
  }

  // global average pooling over nodes
  res.acts.gap = cur.colwise().mean().transpose();

  // dense head
  Eigen::VectorXd v = res.acts.gap;
  res.acts.dense_pre.clear();
  int fin = cfg.gat_dims[2];
  for (int l = 0; l < 3; ++l) {
    const std::string base = "dense/" + std::to_string(l + 1);
    const int fout = cfg.dense_dims[static_cast<std::size_t>(l)];
    const auto wt = wc.tensor(base + "/w");
    const auto bt = wc.tensor(base + "/b");
    Eigen::VectorXd next(fout);
    for (int r = 0; r < fout; ++r) {
      double acc = bt[static_cast<std::size_t>(r)];
      for (int c = 0; c < fin; ++c)
        acc += wt[static_cast<std::size_t>(r) * fin + c] * v(c);
      next(r) = acc;
    }
    res.acts.dense_pre.push_back(next);
    if (l < 2)
      for (int r = 0; r < fout; ++r) next(r) = activate(next(r), act_);
    v = next;
    fin = fout;
  }

  res.acts.logit = v(0);
  res.probability = 1.0 / (1.0 + std::exp(-res.acts.logit));
  return res;
}

}  // namespace neo::detect
