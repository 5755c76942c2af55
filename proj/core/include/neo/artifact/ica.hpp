#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace neo::ica {

enum class KurtosisSign { super, sub };

struct IcaConfig {
  double lrate = 0.0;       // 0 = auto (0.00065 / ln(channels))
  int max_iter = 512;       // sweeps over the data
  double tol = 1e-6;        // stop when the per-sweep weight change is below
  int block = 0;            // 0 = auto (~5 ln T)
  std::uint64_t seed = 1;
  int sign_subsample = 6000;  // samples used for the kurtosis-sign estimate
};

/// Fitted decomposition. `rotation` acts in whitened space: orthogonal
/// directions with per-row scaling chosen so the mixing columns (scalp
/// patterns) have unit norm; unmixing() composes it with the whitener.
struct IcaModel {
  Eigen::VectorXd means;            // per-channel mean removed before sphering
  Eigen::MatrixXd sphering;         // symmetric whitener (C^-1/2)
  Eigen::MatrixXd rotation;         // scaled orthogonal unmixing, whitened space
  std::vector<KurtosisSign> source_signs;
  bool converged = false;
  int iterations = 0;
  double final_wchange = 0.0;

  /// Total unmixing: sources = unmixing() * (x - means).
  Eigen::MatrixXd unmixing() const { return rotation * sphering; }
  /// Total mixing (inverse of unmixing): columns are scalp patterns.
  Eigen::MatrixXd mixing() const { return unmixing().inverse(); }
};

/// Extended-infomax ICA: natural-gradient updates with per-component
/// sub/super-Gaussian switching from a running kurtosis estimate, annealed
/// learning rate, whitened input. Throws NumericError on rank-deficient
/// covariance (advising channel removal); non-convergence returns a model
/// flagged converged == false.
IcaModel fit_ica(const Eigen::MatrixXd& x, const IcaConfig& cfg = {});

/// Component activations: unmixing() * (x - means), shape matches x.
Eigen::MatrixXd transform(const IcaModel& m, const Eigen::MatrixXd& x);

/// Reconstruction from activations: mixing() * s + means.
Eigen::MatrixXd inverse_transform(const IcaModel& m,
                                  const Eigen::MatrixXd& sources);

}  // namespace neo::ica
