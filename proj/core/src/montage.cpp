#include "neo/montage.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "neo/errors.hpp"

namespace neo {

namespace {

// FNV-1a 64
std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

const ElectrodeSet& ElectrodeSet::standard_reduced() {
  static const ElectrodeSet set = [] {
    ElectrodeSet s;
    // flat 10-20 projection: Cz at origin, ear-to-ear on x, nasion up
    s.labels_ = {"Fp1", "Fp2", "C3", "C4", "Cz", "T3", "T4", "O1", "O2"};
    s.pos_ = {
        {-0.309, 0.951},   // Fp1
        {0.309, 0.951},    // Fp2
        {-0.5, 0.0},       // C3
        {0.5, 0.0},        // C4
        {0.0, 0.0},        // Cz
        {-1.0, 0.0},       // T3
        {1.0, 0.0},        // T4
        {-0.309, -0.951},  // O1
        {0.309, -0.951},   // O2
    };
    return s;
  }();
  return set;
}

int ElectrodeSet::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels_.size(); ++i)
    if (labels_[i] == label) return static_cast<int>(i);
  return -1;
}

std::pair<double, double> ElectrodeSet::position(
    const std::string& label) const {
  const int i = index_of(label);
  if (i < 0) throw NumericError("electrode set: unknown label " + label);
  return pos_[static_cast<std::size_t>(i)];
}

MontageGraph MontageGraph::standard_reduced() {
  MontageGraph m;
  m.pairs_ = {
      {"Fp1", "T3"}, {"T3", "O1"}, {"Fp2", "T4"}, {"T4", "O2"},
      {"Fp1", "C3"}, {"C3", "O1"}, {"Fp2", "C4"}, {"C4", "O2"},
      {"T3", "C3"},  {"C3", "Cz"}, {"Cz", "C4"},  {"C4", "T4"},
  };
  m.reference_ = "Cz";
  m.finalize();
  return m;
}

MontageGraph MontageGraph::from_config(std::istream& in) {
  MontageGraph m;
  m.reference_ = "Cz";
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "ref") {
      if (!(ls >> m.reference_))
        throw IoError("montage config line " + std::to_string(line_no) +
                      ": ref requires a label");
      continue;
    }
    const auto dash = tok.find('-');
    if (dash == std::string::npos || dash == 0 || dash + 1 >= tok.size())
      throw IoError("montage config line " + std::to_string(line_no) +
                    ": expected ANODE-CATHODE, got '" + tok + "'");
    m.pairs_.push_back({tok.substr(0, dash), tok.substr(dash + 1)});
  }
  m.finalize();
  return m;
}

MontageGraph MontageGraph::from_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("montage config: cannot open " + path);
  return from_config(in);
}

const ElectrodeSet& MontageGraph::electrodes() const {
  return ElectrodeSet::standard_reduced();
}

void MontageGraph::finalize() {
  const auto& es = electrodes();
  if (pairs_.empty()) throw NumericError("montage: no bipolar pairs");
  if (es.index_of(reference_) < 0)
    throw NumericError("montage: unknown reference " + reference_);

  for (const auto& p : pairs_) {
    if (es.index_of(p.anode) < 0 || es.index_of(p.cathode) < 0)
      throw NumericError("montage: unknown electrode in pair " + p.name());
    if (p.anode == p.cathode)
      throw NumericError("montage: degenerate pair " + p.name());
  }

  raw_order_.clear();
  for (const auto& l : es.labels())
    if (l != reference_) raw_order_.push_back(l);

  const int n = n_channels();
  adj_.assign(static_cast<std::size_t>(n),
              std::vector<bool>(static_cast<std::size_t>(n), false));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const auto& a = pairs_[static_cast<std::size_t>(i)];
      const auto& b = pairs_[static_cast<std::size_t>(j)];
      const bool share = a.anode == b.anode || a.anode == b.cathode ||
                         a.cathode == b.anode || a.cathode == b.cathode;
      adj_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = share;
      adj_[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = share;
    }
  }

  if (!connected()) throw NumericError("montage: channel graph not connected");
}

bool MontageGraph::connected() const {
  const int n = n_channels();
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::vector<int> stack{0};
  seen[0] = true;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w = 0; w < n; ++w) {
      if (adj_[static_cast<std::size_t>(v)][static_cast<std::size_t>(w)] &&
          !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = true;
        ++count;
        stack.push_back(w);
      }
    }
  }
  return count == n;
}

double MontageGraph::mean_reachability(int hops) const {
  const int n = n_channels();
  double total = 0.0;
  for (int src = 0; src < n; ++src) {
    std::vector<int> dist(static_cast<std::size_t>(n), -1);
    std::vector<int> queue{src};
    dist[static_cast<std::size_t>(src)] = 0;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      const int v = queue[qi];
      if (dist[static_cast<std::size_t>(v)] >= hops) continue;
      for (int w = 0; w < n; ++w) {
        if (adj_[static_cast<std::size_t>(v)][static_cast<std::size_t>(w)] &&
            dist[static_cast<std::size_t>(w)] < 0) {
          dist[static_cast<std::size_t>(w)] =
              dist[static_cast<std::size_t>(v)] + 1;
          queue.push_back(w);
        }
      }
    }
    int reached = 0;
    for (int w = 0; w < n; ++w)
      if (dist[static_cast<std::size_t>(w)] >= 0) ++reached;  // self included
    total += static_cast<double>(reached) / n;
  }
  return total / n;
}

std::vector<std::string> MontageGraph::channel_names() const {
  std::vector<std::string> names;
  names.reserve(pairs_.size());
  for (const auto& p : pairs_) names.push_back(p.name());
  return names;
}

std::uint64_t MontageGraph::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& p : pairs_) {
    const auto name = p.name();
    h = fnv1a(h, name.data(), name.size());
    h = fnv1a(h, "|", 1);
  }
  h = fnv1a(h, reference_.data(), reference_.size());
  for (const auto& row : adj_) {
    for (bool b : row) {
      const unsigned char c = b ? 1 : 0;
      h = fnv1a(h, &c, 1);
    }
  }
  return h;
}

Recording derive_bipolar(const Recording& raw8, const MontageGraph& m) {
  raw8.validate();
  const auto& order = m.raw_channels();
  if (static_cast<std::size_t>(raw8.n_channels()) != order.size())
    throw NumericError("derive_bipolar: expected " +
                       std::to_string(order.size()) + " channels, got " +
                       std::to_string(raw8.n_channels()));

  // channel label -> row in raw8; the reference reads as zero
  const auto row_of = [&](const std::string& label) -> int {
    if (label == m.reference()) return -1;
    for (std::size_t i = 0; i < order.size(); ++i)
      if (order[i] == label) return static_cast<int>(i);
    throw NumericError("derive_bipolar: electrode " + label +
                       " not in raw channel order");
  };

  Recording out;
  out.fs_hz = raw8.fs_hz;
  out.meta = raw8.meta;
  out.channels = m.channel_names();
  out.data.setZero(m.n_channels(), raw8.n_samples());
  for (int c = 0; c < m.n_channels(); ++c) {
    const auto& p = m.channels()[static_cast<std::size_t>(c)];
    const int ia = row_of(p.anode);
    const int ib = row_of(p.cathode);
    if (ia >= 0) out.data.row(c) += raw8.data.row(ia);
    if (ib >= 0) out.data.row(c) -= raw8.data.row(ib);
  }
  return out;
}

}  // namespace neo
