#pragma once

#include <string>
#include <utility>
#include <vector>

#include "rsac/grid.hpp"
#include "rsac/signal.hpp"

namespace rsac {

/// RIFF WAVE, PCM 16-bit signed little-endian, mono. Unit amplitude maps to
/// sample/32767. An optional comment is stored in a LIST/INFO ICMT chunk.
void write_wav(const std::string& path, const AudioSignal& audio,
               const std::string& comment = "");
AudioSignal read_wav(const std::string& path);

/// Binary portable graymap (P5), 16-bit big-endian samples, maxval 65535.
/// Intensities are clamped to [0, 1] and quantized. An optional '#' comment
/// line is written after the magic.
void write_pgm16(const std::string& path, const Grid& image, const std::string& comment = "");
Grid read_pgm16(const std::string& path);

/// RFC-4180 style CSV with a header row. Numbers are rendered with %.10g.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<double> column(const std::string& name) const;
};
CsvTable read_csv(const std::string& path);

/// Plain-text "key = value" manifest, order preserving.
void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);
std::vector<std::pair<std::string, std::string>> read_manifest(const std::string& path);
std::string manifest_value(const std::vector<std::pair<std::string, std::string>>& entries,
                           const std::string& key);

std::string format_double(double v);

} // namespace rsac
