#include "neo/stream/edf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <vector>

#include "neo/errors.hpp"

namespace neo::stream {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(' ');
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(' ');
  return s.substr(b, e - b + 1);
}

std::string fixed_field(const std::string& s, std::size_t width) {
  std::string out = s.substr(0, width);
  out.resize(width, ' ');
  return out;
}

struct Reader {
  std::FILE* f;
  std::string take(std::size_t n) {
    std::string s(n, '\0');
    if (std::fread(s.data(), 1, n, f) != n)
      throw IoError("edf: truncated header");
    return s;
  }
  double take_num(std::size_t n, const char* what) {
    const std::string s = trim(take(n));
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw IoError(std::string("edf: bad numeric field '") + s + "' for " +
                    what);
    }
  }
};

}  // namespace

Recording read_edf(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("edf: cannot open " + path);
  struct Closer {
    std::FILE* f;
    ~Closer() { std::fclose(f); }
  } closer{f};
  Reader r{f};

  // fixed 256-byte header
  const std::string version = trim(r.take(8));
  if (version != "0") throw IoError("edf: bad version field '" + version + "'");
  r.take(80);  // patient id
  r.take(80);  // recording id
  r.take(8);   // start date
  r.take(8);   // start time
  const auto header_bytes = static_cast<long>(r.take_num(8, "header bytes"));
  const std::string reserved = trim(r.take(44));
  if (reserved.rfind("EDF+D", 0) == 0)
    throw IoError("edf: discontinuous (EDF+D) files are not supported");
  long n_records = static_cast<long>(r.take_num(8, "record count"));
  const double record_dur_s = r.take_num(8, "record duration");
  const auto ns = static_cast<int>(r.take_num(4, "signal count"));
  if (ns <= 0 || ns > 512) throw IoError("edf: implausible signal count");
  if (record_dur_s <= 0) throw IoError("edf: record duration must be > 0");

  struct Sig {
    std::string label, dim;
    double phys_min, phys_max, dig_min, dig_max;
    int samples_per_record;
    bool annotation;
    double scale, offset, unit_to_uv;
  };
  std::vector<Sig> sigs(static_cast<std::size_t>(ns));

  for (auto& s : sigs) s.label = trim(r.take(16));
  for (int i = 0; i < ns; ++i) r.take(80);  // transducer
  for (auto& s : sigs) s.dim = trim(r.take(8));
  for (auto& s : sigs) s.phys_min = r.take_num(8, "physical min");
  for (auto& s : sigs) s.phys_max = r.take_num(8, "physical max");
  for (auto& s : sigs) s.dig_min = r.take_num(8, "digital min");
  for (auto& s : sigs) s.dig_max = r.take_num(8, "digital max");
  for (int i = 0; i < ns; ++i) r.take(80);  // prefiltering
  for (auto& s : sigs)
    s.samples_per_record = static_cast<int>(r.take_num(8, "samples/record"));
  for (int i = 0; i < ns; ++i) r.take(32);  // reserved

  const long expect_header = 256 + 256L * ns;
  if (header_bytes != expect_header)
    throw IoError("edf: header size field mismatch");

  for (auto& s : sigs) {
    s.annotation = s.label == "EDF Annotations";
    if (s.annotation) continue;
    if (s.dig_min >= s.dig_max)
      throw IoError("edf: digital min >= max for signal '" + s.label +
                    "' (inverted scaling)");
    if (s.phys_min == s.phys_max)
      throw IoError("edf: physical min == max for signal '" + s.label + "'");
    if (s.samples_per_record <= 0)
      throw IoError("edf: bad samples/record for signal '" + s.label + "'");
    s.scale = (s.phys_max - s.phys_min) / (s.dig_max - s.dig_min);
    s.offset = s.phys_min - s.scale * s.dig_min;
    if (s.dim == "uV" || s.dim == "µV" || s.dim.empty()) s.unit_to_uv = 1.0;
    else if (s.dim == "mV") s.unit_to_uv = 1e3;
    else if (s.dim == "V") s.unit_to_uv = 1e6;
    else s.unit_to_uv = 1.0;  // pass through unknown dimensions
  }

  // all data signals must share one rate
  double fs = 0.0;
  for (const auto& s : sigs) {
    if (s.annotation) continue;
    const double rate = s.samples_per_record / record_dur_s;
    if (fs == 0.0) fs = rate;
    else if (std::abs(rate - fs) > 1e-9)
      throw IoError("edf: per-channel sampling rates differ (" +
                    std::to_string(fs) + " vs " + std::to_string(rate) + ")");
  }
  if (fs == 0.0) throw IoError("edf: no data signals");

  long record_len = 0;
  for (const auto& s : sigs) record_len += s.samples_per_record;

  if (n_records < 0) {  // unknown: infer from file size
    const long data_start = expect_header;
    std::fseek(f, 0, SEEK_END);
    const long sz = std::ftell(f);
    std::fseek(f, data_start, SEEK_SET);
    n_records = record_len > 0 ? (sz - data_start) / (2 * record_len) : 0;
  }

  std::vector<const Sig*> data_sigs;
  std::vector<std::size_t> data_idx;
  for (std::size_t i = 0; i < sigs.size(); ++i) {
    if (!sigs[i].annotation) {
      data_sigs.push_back(&sigs[i]);
      data_idx.push_back(i);
    }
  }

  Recording rec;
  rec.fs_hz = fs;
  for (const auto* s : data_sigs) rec.channels.push_back(s->label);
  const long spr = data_sigs.empty() ? 0 : data_sigs[0]->samples_per_record;
  rec.data.resize(static_cast<Eigen::Index>(data_sigs.size()),
                  static_cast<Eigen::Index>(n_records * spr));

  std::vector<std::int16_t> buf;
  for (long rec_i = 0; rec_i < n_records; ++rec_i) {
    Eigen::Index out_row = 0;
    for (const auto& s : sigs) {
      buf.resize(static_cast<std::size_t>(s.samples_per_record));
      if (std::fread(buf.data(), 2, buf.size(), f) != buf.size())
        throw IoError("edf: truncated data record " + std::to_string(rec_i));
      if (s.annotation) continue;
      for (int k = 0; k < s.samples_per_record; ++k) {
        const double phys =
            (s.scale * buf[static_cast<std::size_t>(k)] + s.offset) *
            s.unit_to_uv;
        rec.data(out_row, rec_i * spr + k) = phys;
      }
      ++out_row;
    }
  }
  rec.meta.device_id = "edf:" + path;
  if (rec.n_samples() > 0) rec.validate();
  return rec;
}

void write_edf(const std::string& path, const Recording& rec) {
  rec.validate();
  if (std::abs(rec.fs_hz - std::round(rec.fs_hz)) > 1e-9)
    throw IoError("edf writer: integer sampling rates only");
  const int fs = static_cast<int>(std::round(rec.fs_hz));
  const auto nch = rec.n_channels();
  const long n_records = fs > 0 ? rec.n_samples() / fs : 0;

  // symmetric physical range covering the data
  double amax = 1.0;
  if (rec.n_samples() > 0)
    amax = std::max(1.0, std::ceil(rec.data.cwiseAbs().maxCoeff()));

  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("edf writer: cannot open " + path);
  struct Closer {
    std::FILE* f;
    ~Closer() { std::fclose(f); }
  } closer{f};

  std::ostringstream h;
  h << fixed_field("0", 8);
  h << fixed_field("X X X X", 80);
  h << fixed_field("Startdate X X X X", 80);
  h << fixed_field("01.01.00", 8) << fixed_field("00.00.00", 8);
  h << fixed_field(std::to_string(256 + 256 * nch), 8);
  h << fixed_field("", 44);
  h << fixed_field(std::to_string(n_records), 8);
  h << fixed_field("1", 8);
  h << fixed_field(std::to_string(nch), 4);
  for (const auto& c : rec.channels) h << fixed_field(c, 16);
  for (Eigen::Index i = 0; i < nch; ++i) h << fixed_field("", 80);
  for (Eigen::Index i = 0; i < nch; ++i) h << fixed_field("uV", 8);
  for (Eigen::Index i = 0; i < nch; ++i)
    h << fixed_field(std::to_string(-static_cast<long>(amax)), 8);
  for (Eigen::Index i = 0; i < nch; ++i)
    h << fixed_field(std::to_string(static_cast<long>(amax)), 8);
  for (Eigen::Index i = 0; i < nch; ++i) h << fixed_field("-32767", 8);
  for (Eigen::Index i = 0; i < nch; ++i) h << fixed_field("32767", 8);
  for (Eigen::Index i = 0; i < nch; ++i) h << fixed_field("", 80);
  for (Eigen::Index i = 0; i < nch; ++i)
    h << fixed_field(std::to_string(fs), 8);
  for (Eigen::Index i = 0; i < nch; ++i) h << fixed_field("", 32);

  const auto hs = h.str();
  if (std::fwrite(hs.data(), 1, hs.size(), f) != hs.size())
    throw IoError("edf writer: header write failed");

  const double scale = 32767.0 / amax;
  std::vector<std::int16_t> buf(static_cast<std::size_t>(fs));
  for (long r = 0; r < n_records; ++r) {
    for (Eigen::Index ch = 0; ch < nch; ++ch) {
      for (int k = 0; k < fs; ++k) {
        const double v = rec.data(ch, r * fs + k) * scale;
        buf[static_cast<std::size_t>(k)] = static_cast<std::int16_t>(
            std::clamp(std::round(v), -32767.0, 32767.0));
      }
      if (std::fwrite(buf.data(), 2, buf.size(), f) != buf.size())
        throw IoError("edf writer: data write failed");
    }
  }
}

}  // namespace neo::stream
