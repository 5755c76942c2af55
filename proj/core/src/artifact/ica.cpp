#include "neo/artifact/ica.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "neo/errors.hpp"

namespace neo::ica {

namespace {

// Symmetric orthonormalization: W <- (W W^T)^-1/2 W.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w * w.transpose());
  const Eigen::VectorXd inv_sqrt =
      es.eigenvalues().cwiseMax(1e-12).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() *
         es.eigenvectors().transpose() * w;
}

std::vector<int> sign_estimate(const Eigen::MatrixXd& u) {
  // excess kurtosis per row with a small super-Gaussian bias, as in the
  // extended algorithm
  std::vector<int> signs(static_cast<std::size_t>(u.rows()), 1);
  for (Eigen::Index i = 0; i < u.rows(); ++i) {
    const double m2 = u.row(i).array().square().mean();
    const double m4 = u.row(i).array().square().square().mean();
    const double kurt = m4 / (m2 * m2 + 1e-300) - 3.0;
    signs[static_cast<std::size_t>(i)] = (kurt + 0.02) >= 0 ? 1 : -1;
  }
  return signs;
}

}  // namespace

IcaModel fit_ica(const Eigen::MatrixXd& x, const IcaConfig& cfg) {
  const auto nch = x.rows();
  const auto nsamp = x.cols();
  if (nch < 2) throw NumericError("ica: need at least 2 channels");
  if (nsamp < nch * 20)
    throw NumericError("ica: window too short for identifiability (" +
                       std::to_string(nsamp) + " samples)");
  if (!x.allFinite()) throw NumericError("ica: non-finite input");

  IcaModel model;
  model.means = x.rowwise().mean();
  Eigen::MatrixXd xc = x.colwise() - model.means;

  // sphering via symmetric C^-1/2 (biased covariance so the whitened
  // sample covariance is exactly identity)
  const Eigen::MatrixXd cov =
      xc * xc.transpose() / static_cast<double>(nsamp);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const auto& evals = es.eigenvalues();
  if (evals(0) <= 0 || evals(0) / evals(nch - 1) < 1e-10)
    throw NumericError(
        "ica: rank-deficient covariance; remove flat or duplicated channels");
  model.sphering = es.eigenvectors() *
                   evals.cwiseSqrt().cwiseInverse().asDiagonal() *
                   es.eigenvectors().transpose();
  const Eigen::MatrixXd xw = model.sphering * xc;

  // random orthonormal start
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd w(nch, nch);
  for (Eigen::Index i = 0; i < nch; ++i)
    for (Eigen::Index j = 0; j < nch; ++j) w(i, j) = gauss(rng);
  w = orthonormalize(w);

  double lrate = cfg.lrate > 0
                     ? cfg.lrate
                     : 0.00065 / std::log(static_cast<double>(nch));
  const int block = std::min<int>(
      static_cast<int>(nsamp),
      cfg.block > 0
          ? cfg.block
          : std::clamp(static_cast<int>(5.0 * std::log(static_cast<double>(
                           nsamp))),
                       8, 256));

  const Eigen::MatrixXd identity =
      Eigen::MatrixXd::Identity(nch, nch);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(nsamp));
  std::iota(order.begin(), order.end(), 0);

  // sign estimation subsample (fixed for the whole fit)
  const int n_sub = std::min<int>(cfg.sign_subsample, static_cast<int>(nsamp));
  std::vector<Eigen::Index> sub(order.begin(), order.end());
  std::shuffle(sub.begin(), sub.end(), rng);
  sub.resize(static_cast<std::size_t>(n_sub));
  Eigen::MatrixXd xsub(nch, n_sub);
  for (int i = 0; i < n_sub; ++i)
    xsub.col(i) = xw.col(sub[static_cast<std::size_t>(i)]);

  std::vector<int> signs(static_cast<std::size_t>(nch), 1);
  Eigen::MatrixXd old_delta = Eigen::MatrixXd::Zero(nch, nch);
  double old_change = 0.0;
  double wchange = 0.0;
  bool converged = false;
  int sweep = 0;

  for (sweep = 0; sweep < cfg.max_iter; ++sweep) {
    signs = sign_estimate(w * xsub);
    Eigen::VectorXd k(nch);
    for (Eigen::Index i = 0; i < nch; ++i)
      k(i) = signs[static_cast<std::size_t>(i)];

    std::shuffle(order.begin(), order.end(), rng);
    const Eigen::MatrixXd w_start = w;

    for (Eigen::Index b0 = 0; b0 + block <= nsamp; b0 += block) {
      Eigen::MatrixXd xb(nch, block);
      for (int i = 0; i < block; ++i)
        xb.col(i) = xw.col(order[static_cast<std::size_t>(b0 + i)]);
      const Eigen::MatrixXd u = w * xb;
      const Eigen::MatrixXd y = u.array().tanh().matrix();
      // natural-gradient step, summed over the block
      const Eigen::MatrixXd grad =
          static_cast<double>(block) * identity -
          k.asDiagonal() * y * u.transpose() - u * u.transpose();
      w += lrate * grad * w;
      if (!w.allFinite() || w.cwiseAbs().maxCoeff() > 1e8) {
        // blow-up: restart colder
        for (Eigen::Index i = 0; i < nch; ++i)
          for (Eigen::Index j = 0; j < nch; ++j) w(i, j) = gauss(rng);
        w = orthonormalize(w);
        lrate *= 0.5;
        break;
      }
    }

    const Eigen::MatrixXd delta = w - w_start;
    wchange = delta.squaredNorm();
    // anneal when the update direction swings past 60 degrees relative to
    // the delta recorded at the previous anneal
    if (sweep == 0) {
      old_delta = delta;
      old_change = wchange;
    } else {
      const double den = std::sqrt(wchange * old_change);
      if (den > 0 &&
          (delta.array() * old_delta.array()).sum() / den < 0.5) {
        lrate *= 0.98;
        old_delta = delta;
        old_change = wchange;
      }
    }
    if (wchange < cfg.tol) {
      converged = true;
      ++sweep;
      break;
    }
  }

  w = orthonormalize(w);

  // presentation: order components by back-projected power, scale so each
  // scalp pattern (mixing column) has unit norm, and fix the sign so its
  // largest element is positive. Activation energy then reflects how much
  // signal a component carries.
  {
    Eigen::MatrixXd mix = (w * model.sphering).inverse();
    std::vector<std::pair<double, Eigen::Index>> power_idx;
    for (Eigen::Index c = 0; c < nch; ++c)
      power_idx.push_back({mix.col(c).squaredNorm(), c});
    std::stable_sort(
        power_idx.begin(), power_idx.end(),
        [](const auto& a, const auto& b) { return a.first > b.first; });
    Eigen::MatrixXd sorted(nch, nch);
    for (Eigen::Index i = 0; i < nch; ++i)
      sorted.row(i) = w.row(power_idx[static_cast<std::size_t>(i)].second);
    w = sorted;

    mix = (w * model.sphering).inverse();
    for (Eigen::Index c = 0; c < nch; ++c) {
      const double norm = mix.col(c).norm();
      if (norm > 0) w.row(c) *= norm;
      Eigen::Index imax = 0;
      mix.col(c).cwiseAbs().maxCoeff(&imax);
      if (mix(imax, c) < 0) w.row(c) = -w.row(c);
    }
  }

  model.rotation = w;
  model.converged = converged;
  model.iterations = sweep;
  model.final_wchange = wchange;

  const Eigen::MatrixXd final_acts = model.rotation * xw;
  const auto final_signs = sign_estimate(final_acts);
  model.source_signs.resize(static_cast<std::size_t>(nch));
  for (Eigen::Index i = 0; i < nch; ++i)
    model.source_signs[static_cast<std::size_t>(i)] =
        final_signs[static_cast<std::size_t>(i)] > 0 ? KurtosisSign::super
                                                     : KurtosisSign::sub;
  return model;
}

Eigen::MatrixXd transform(const IcaModel& m, const Eigen::MatrixXd& x) {
  if (x.rows() != m.means.size())
    throw NumericError("ica transform: channel count mismatch");
  return m.unmixing() * (x.colwise() - m.means);
}

Eigen::MatrixXd inverse_transform(const IcaModel& m,
                                  const Eigen::MatrixXd& sources) {
  if (sources.rows() != m.means.size())
    throw NumericError("ica inverse: component count mismatch");
  return (m.mixing() * sources).colwise() + m.means;
}

}  // namespace neo::ica
