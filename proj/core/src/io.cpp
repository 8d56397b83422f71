#include "rsac/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "rsac/error.hpp"

namespace rsac {

namespace {

void put_u16le(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32le(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint16_t get_u16le(const unsigned char* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint32_t get_u32le(const unsigned char* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot create file: " + path);
  out.write(data.data(), static_cast<long>(data.size()));
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

} // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return std::string(buf);
}

void write_wav(const std::string& path, const AudioSignal& audio, const std::string& comment) {
  if (audio.sample_rate <= 0.0) fail(ErrorKind::Input, "write_wav: bad sample rate");
  const uint32_t rate = static_cast<uint32_t>(std::lround(audio.sample_rate));
  std::string data;
  data.reserve(audio.samples.size() * 2 + 128);

  std::string pcm;
  pcm.reserve(audio.samples.size() * 2);
  for (double v : audio.samples) {
    const double clamped = std::clamp(v, -1.0, 1.0);
    const int16_t s = static_cast<int16_t>(std::lround(clamped * 32767.0));
    put_u16le(pcm, static_cast<uint16_t>(s));
  }

  std::string info;
  if (!comment.empty()) {
    std::string icmt = comment;
    if (icmt.size() % 2 == 1) icmt.push_back('\0');
    info += "LIST";
    put_u32le(info, static_cast<uint32_t>(4 + 8 + icmt.size()));
    info += "INFO";
    info += "ICMT";
    put_u32le(info, static_cast<uint32_t>(icmt.size()));
    info += icmt;
  }

  data += "RIFF";
  put_u32le(data, static_cast<uint32_t>(4 + 24 + 8 + pcm.size() + info.size()));
  data += "WAVE";
  data += "fmt ";
  put_u32le(data, 16);
  put_u16le(data, 1);  // PCM
  put_u16le(data, 1);  // mono
  put_u32le(data, rate);
  put_u32le(data, rate * 2); // byte rate
  put_u16le(data, 2);  // block align
  put_u16le(data, 16); // bits per sample
  data += info;
  data += "data";
  put_u32le(data, static_cast<uint32_t>(pcm.size()));
  data += pcm;
  write_file(path, data);
}

AudioSignal read_wav(const std::string& path) {
  const std::string raw = read_file(path);
  if (raw.size() < 44 || raw.compare(0, 4, "RIFF") != 0 || raw.compare(8, 4, "WAVE") != 0)
    fail(ErrorKind::Io, "read_wav: not a RIFF/WAVE file: " + path);
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(raw.data());

  size_t pos = 12;
  uint32_t rate = 0;
  uint16_t channels = 0, bits = 0, format = 0;
  bool got_fmt = false;
  AudioSignal audio;
  while (pos + 8 <= raw.size()) {
    const std::string id = raw.substr(pos, 4);
    const uint32_t size = get_u32le(bytes + pos + 4);
    const size_t body = pos + 8;
    if (body + size > raw.size()) fail(ErrorKind::Io, "read_wav: truncated chunk in " + path);
    if (id == "fmt ") {
      if (size < 16) fail(ErrorKind::Io, "read_wav: short fmt chunk");
      format = get_u16le(bytes + body);
      channels = get_u16le(bytes + body + 2);
      rate = get_u32le(bytes + body + 4);
      bits = get_u16le(bytes + body + 14);
      got_fmt = true;
    } else if (id == "data") {
      if (!got_fmt) fail(ErrorKind::Io, "read_wav: data before fmt");
      if (format != 1 || channels != 1 || bits != 16)
        fail(ErrorKind::Io, "read_wav: only PCM16 mono is supported: " + path);
      const size_t count = size / 2;
      audio.samples.resize(count);
      for (size_t i = 0; i < count; ++i) {
        const int16_t s = static_cast<int16_t>(get_u16le(bytes + body + 2 * i));
        audio.samples[i] = static_cast<double>(s) / 32767.0;
      }
    }
    pos = body + size + (size % 2); // chunks are word aligned
  }
  if (!got_fmt) fail(ErrorKind::Io, "read_wav: missing fmt chunk: " + path);
  audio.sample_rate = static_cast<double>(rate);
  return audio;
}

void write_pgm16(const std::string& path, const Grid& image, const std::string& comment) {
  if (image.empty()) fail(ErrorKind::Input, "write_pgm16: empty image");
  std::string data = "P5\n";
  if (!comment.empty()) data += "# " + comment + "\n";
  data += std::to_string(image.cols()) + " " + std::to_string(image.rows()) + "\n65535\n";
  data.reserve(data.size() + image.size() * 2);
  for (int r = 0; r < image.rows(); ++r) {
    const double* row = image.row(r);
    for (int c = 0; c < image.cols(); ++c) {
      const double v = std::clamp(row[c], 0.0, 1.0);
      const uint16_t q = static_cast<uint16_t>(std::lround(v * 65535.0));
      data.push_back(static_cast<char>((q >> 8) & 0xff)); // big endian
      data.push_back(static_cast<char>(q & 0xff));
    }
  }
  write_file(path, data);
}

Grid read_pgm16(const std::string& path) {
  const std::string raw = read_file(path);
  size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < raw.size()) {
      if (raw[pos] == '#') { // comment to end of line
        while (pos < raw.size() && raw[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(raw[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const size_t start = pos;
    while (pos < raw.size() && !std::isspace(static_cast<unsigned char>(raw[pos]))) ++pos;
    return raw.substr(start, pos - start);
  };

  if (next_token() != "P5") fail(ErrorKind::Io, "read_pgm16: not a P5 file: " + path);
  const int cols = std::stoi(next_token());
  const int rows = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (maxval != 65535) fail(ErrorKind::Io, "read_pgm16: expected 16-bit maxval: " + path);
  ++pos; // single whitespace after maxval
  if (pos + static_cast<size_t>(rows) * cols * 2 > raw.size())
    fail(ErrorKind::Io, "read_pgm16: truncated pixel data: " + path);

  Grid image(rows, cols);
  const unsigned char* bytes = reinterpret_cast<const unsigned char*>(raw.data()) + pos;
  for (int r = 0; r < rows; ++r) {
    double* row = image.row(r);
    for (int c = 0; c < cols; ++c) {
      const size_t i = (static_cast<size_t>(r) * cols + c) * 2;
      const uint16_t q = static_cast<uint16_t>((bytes[i] << 8) | bytes[i + 1]);
      row[c] = static_cast<double>(q) / 65535.0;
    }
  }
  return image;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::string data;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) data += ",";
    data += header[i];
  }
  data += "\r\n";
  for (const auto& row : rows) {
    if (row.size() != header.size())
      fail(ErrorKind::Input, "write_csv: row width does not match the header");
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) data += ",";
      data += format_double(row[i]);
    }
    data += "\r\n";
  }
  write_file(path, data);
}

CsvTable read_csv(const std::string& path) {
  const std::string raw = read_file(path);
  CsvTable table;
  std::istringstream in(raw);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (first) {
      table.header = cells;
      first = false;
      continue;
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        row.push_back(std::stod(c));
      } catch (...) {
        fail(ErrorKind::Io, "read_csv: non-numeric cell '" + c + "' in " + path);
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (first) fail(ErrorKind::Io, "read_csv: missing header row: " + path);
  return table;
}

std::vector<double> CsvTable::column(const std::string& name) const {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) {
      std::vector<double> out;
      out.reserve(rows.size());
      for (const auto& row : rows) {
        if (i >= row.size()) fail(ErrorKind::Io, "csv: ragged row");
        out.push_back(row[i]);
      }
      return out;
    }
  }
  fail(ErrorKind::Io, "csv: no column named '" + name + "'");
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::string data;
  for (const auto& [k, v] : entries) data += k + " = " + v + "\n";
  write_file(path, data);
}

std::vector<std::pair<std::string, std::string>> read_manifest(const std::string& path) {
  const std::string raw = read_file(path);
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(raw);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.erase(s.begin());
      while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
      return s;
    };
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return entries;
}

std::string manifest_value(const std::vector<std::pair<std::string, std::string>>& entries,
                           const std::string& key) {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  fail(ErrorKind::Io, "manifest: missing key '" + key + "'");
}

} // namespace rsac
