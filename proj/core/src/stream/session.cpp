#include "neo/stream/session.hpp"

#include <cstring>
#include <sstream>

#include "neo/errors.hpp"

namespace neo::stream {

namespace {

constexpr char kSessionMagic[] = "NEOSES1\n";

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

SessionWriter::SessionWriter(const std::string& path, SessionHeader header)
    : hdr_(std::move(header)) {
  if (hdr_.channels.empty())
    throw IoError("session writer: no channels");
  if (hdr_.chunk_samples <= 0)
    throw IoError("session writer: chunk_samples must be > 0");
  f_ = std::fopen(path.c_str(), "wb");
  if (!f_) throw IoError("session writer: cannot open " + path);

  std::ostringstream h;
  h << kSessionMagic;
  h << "fs_hz=" << hdr_.fs_hz << "\n";
  h << "channels=" << join(hdr_.channels, ',') << "\n";
  h << "chunk_samples=" << hdr_.chunk_samples << "\n";
  h << "gain=" << hdr_.meta.gain << "\n";
  h << "vref_v=" << hdr_.meta.vref_v << "\n";
  h << "device_id=" << hdr_.meta.device_id << "\n";
  h << "montage=" << hdr_.meta.montage << "\n";
  h << "started_at=" << hdr_.meta.started_at << "\n";
  h << "end\n";
  const auto s = h.str();
  if (std::fwrite(s.data(), 1, s.size(), f_) != s.size())
    throw IoError("session writer: header write failed");
  std::fflush(f_);

  const auto nch = hdr_.channels.size();
  eeg_buf_.assign(nch * static_cast<std::size_t>(hdr_.chunk_samples), 0.0f);
  imu_buf_.assign(6 * static_cast<std::size_t>(hdr_.chunk_samples), 0);
}

SessionWriter::~SessionWriter() {
  if (f_) close();
}

void SessionWriter::write_chunk() {
  const char tag = 'D';
  if (std::fwrite(&tag, 1, 1, f_) != 1)
    throw IoError("session writer: chunk write failed");
  if (std::fwrite(&chunk_first_, sizeof chunk_first_, 1, f_) != 1)
    throw IoError("session writer: chunk write failed");
  if (std::fwrite(eeg_buf_.data(), sizeof(float), eeg_buf_.size(), f_) !=
      eeg_buf_.size())
    throw IoError("session writer: chunk write failed");
  if (std::fwrite(imu_buf_.data(), sizeof(std::int16_t), imu_buf_.size(),
                  f_) != imu_buf_.size())
    throw IoError("session writer: chunk write failed");
  std::fflush(f_);  // keeps the file tail-readable
  chunk_first_ = n_samples_;
  buffered_ = 0;
}

void SessionWriter::push(const std::vector<double>& uv,
                         const std::int16_t imu[6]) {
  const auto nch = hdr_.channels.size();
  if (uv.size() != nch)
    throw IoError("session writer: sample has wrong channel count");
  for (std::size_t ch = 0; ch < nch; ++ch)
    eeg_buf_[ch * static_cast<std::size_t>(hdr_.chunk_samples) +
             static_cast<std::size_t>(buffered_)] =
        static_cast<float>(uv[ch]);
  for (int k = 0; k < 6; ++k)
    imu_buf_[static_cast<std::size_t>(k) *
                 static_cast<std::size_t>(hdr_.chunk_samples) +
             static_cast<std::size_t>(buffered_)] = imu[k];
  ++buffered_;
  ++n_samples_;
  if (buffered_ == hdr_.chunk_samples) write_chunk();
}

void SessionWriter::push_frame_uv(const std::vector<double>& uv) {
  static const std::int16_t zeros[6] = {0, 0, 0, 0, 0, 0};
  push(uv, zeros);
}

void SessionWriter::annotate(const AnnotationSpan& span) {
  const char tag = 'A';
  char label[16] = {};
  std::strncpy(label, span.label.c_str(), sizeof(label) - 1);
  if (std::fwrite(&tag, 1, 1, f_) != 1 ||
      std::fwrite(&span.t0_s, sizeof(double), 1, f_) != 1 ||
      std::fwrite(&span.t1_s, sizeof(double), 1, f_) != 1 ||
      std::fwrite(label, 1, sizeof(label), f_) != sizeof(label))
    throw IoError("session writer: annotation write failed");
  std::fflush(f_);
}

void SessionWriter::close() {
  if (!f_) return;
  std::fclose(f_);
  f_ = nullptr;
}

SessionData read_session(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("session reader: cannot open " + path);
  struct Closer {
    std::FILE* f;
    ~Closer() { std::fclose(f); }
  } closer{f};

  // header: text until "end\n"
  SessionData out;
  {
    std::string magic(8, '\0');
    if (std::fread(magic.data(), 1, 8, f) != 8 || magic != kSessionMagic)
      throw IoError("session reader: bad magic in " + path);
    std::string line;
    bool done = false;
    while (!done) {
      line.clear();
      int c;
      while ((c = std::fgetc(f)) != EOF && c != '\n') line += static_cast<char>(c);
      if (c == EOF) throw IoError("session reader: truncated header");
      if (line == "end") break;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw IoError("session reader: malformed header line '" + line + "'");
      const std::string key = line.substr(0, eq);
      const std::string val = line.substr(eq + 1);
      auto& h = out.header;
      if (key == "fs_hz") h.fs_hz = std::stod(val);
      else if (key == "channels") h.channels = split(val, ',');
      else if (key == "chunk_samples") h.chunk_samples = std::stoi(val);
      else if (key == "gain") h.meta.gain = std::stod(val);
      else if (key == "vref_v") h.meta.vref_v = std::stod(val);
      else if (key == "device_id") h.meta.device_id = val;
      else if (key == "montage") h.meta.montage = val;
      else if (key == "started_at") h.meta.started_at = val;
      else throw IoError("session reader: unknown header key '" + key + "'");
    }
  }

  const auto nch = out.header.channels.size();
  const auto cs = static_cast<std::size_t>(out.header.chunk_samples);
  if (nch == 0 || cs == 0) throw IoError("session reader: degenerate header");

  std::vector<float> eeg_chunk(nch * cs);
  std::vector<std::int16_t> imu_chunk(6 * cs);
  std::vector<std::vector<float>> per_channel(nch);
  std::size_t total_samples = 0;

  for (;;) {
    int tag = std::fgetc(f);
    if (tag == EOF) break;
    if (tag == 'D') {
      std::uint64_t first = 0;
      if (std::fread(&first, sizeof first, 1, f) != 1 ||
          std::fread(eeg_chunk.data(), sizeof(float), eeg_chunk.size(), f) !=
              eeg_chunk.size() ||
          std::fread(imu_chunk.data(), sizeof(std::int16_t), imu_chunk.size(),
                     f) != imu_chunk.size()) {
        out.truncated_tail = true;
        break;
      }
      for (std::size_t ch = 0; ch < nch; ++ch)
        per_channel[ch].insert(per_channel[ch].end(),
                               eeg_chunk.begin() + static_cast<std::ptrdiff_t>(ch * cs),
                               eeg_chunk.begin() + static_cast<std::ptrdiff_t>((ch + 1) * cs));
      for (std::size_t i = 0; i < cs; ++i)
        for (int k = 0; k < 6; ++k)
          out.imu.push_back(imu_chunk[static_cast<std::size_t>(k) * cs + i]);
      total_samples += cs;
    } else if (tag == 'A') {
      double t0 = 0, t1 = 0;
      char label[16];
      if (std::fread(&t0, sizeof t0, 1, f) != 1 ||
          std::fread(&t1, sizeof t1, 1, f) != 1 ||
          std::fread(label, 1, sizeof label, f) != sizeof label) {
        out.truncated_tail = true;
        break;
      }
      label[15] = '\0';
      out.annotations.push_back({t0, t1, std::string(label)});
    } else {
      out.truncated_tail = true;  // unknown tag: treat as corrupt tail
      break;
    }
  }

  out.recording.fs_hz = out.header.fs_hz;
  out.recording.channels = out.header.channels;
  out.recording.meta = out.header.meta;
  out.recording.data.resize(static_cast<Eigen::Index>(nch),
                            static_cast<Eigen::Index>(total_samples));
  for (std::size_t ch = 0; ch < nch; ++ch)
    for (std::size_t i = 0; i < total_samples; ++i)
      out.recording.data(static_cast<Eigen::Index>(ch),
                         static_cast<Eigen::Index>(i)) =
          static_cast<double>(per_channel[ch][i]);
  return out;
}

}  // namespace neo::stream
