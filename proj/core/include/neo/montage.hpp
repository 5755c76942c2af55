#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "neo/types.hpp"

namespace neo {

/// The nine recording sites with 2D scalp coordinates (unit-disc projection
/// of the 10-20 positions), used for topographic maps.
class ElectrodeSet {
 public:
  static const ElectrodeSet& standard_reduced();

  const std::vector<std::string>& labels() const { return labels_; }
  int index_of(const std::string& label) const;  // -1 when absent
  std::pair<double, double> position(const std::string& label) const;
  std::pair<double, double> position(int idx) const { return pos_[static_cast<std::size_t>(idx)]; }
  std::size_t size() const { return labels_.size(); }

 private:
  std::vector<std::string> labels_;
  std::vector<std::pair<double, double>> pos_;
};

struct BipolarPair {
  std::string anode;
  std::string cathode;
  std::string name() const { return anode + "-" + cathode; }
};

/// 12 ordered bipolar derivations over the reduced electrode set plus the
/// shared-electrode adjacency consumed by the graph attention layers.
class MontageGraph {
 public:
  /// The fixed reduced montage: Fp1-T3, T3-O1, Fp2-T4, T4-O2, Fp1-C3,
  /// C3-O1, Fp2-C4, C4-O2, T3-C3, C3-Cz, Cz-C4, C4-T4; reference Cz.
  static MontageGraph standard_reduced();

  /// Plain-text config: one "ANODE-CATHODE" pair per line, optional
  /// "ref LABEL" line, '#' comments.
  static MontageGraph from_config(std::istream& in);
  static MontageGraph from_config_file(const std::string& path);

  const std::vector<BipolarPair>& channels() const { return pairs_; }
  std::vector<std::string> channel_names() const;
  const std::string& reference() const { return reference_; }
  const ElectrodeSet& electrodes() const;

  /// The 8 recorded (non-reference) electrodes in canonical order.
  const std::vector<std::string>& raw_channels() const { return raw_order_; }

  /// Channels are adjacent iff they share a physical electrode; symmetric,
  /// zero diagonal, connected.
  const std::vector<std::vector<bool>>& adjacency() const { return adj_; }

  /// Mean fraction of nodes (self included) reachable within `hops` edges.
  double mean_reachability(int hops = 3) const;

  bool connected() const;

  /// Stable content hash over pairs and adjacency (weight containers pin it).
  std::uint64_t hash() const;

  int n_channels() const { return static_cast<int>(pairs_.size()); }

 private:
  void finalize();  // validates, builds raw order + adjacency

  std::vector<BipolarPair> pairs_;
  std::string reference_ = "Cz";
  std::vector<std::string> raw_order_;
  std::vector<std::vector<bool>> adj_;
};

/// 8-channel referential (vs the montage reference) -> 12-channel bipolar.
/// Each output channel (A,B) is ref(A) - ref(B) with ref(reference) == 0.
Recording derive_bipolar(const Recording& raw8, const MontageGraph& m);

}  // namespace neo
