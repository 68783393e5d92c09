#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace stvf {

/// Shortest round-trip decimal form (17 significant digits).
std::string fmt17(double v);

/// One CSV row of doubles, 17 significant digits, no trailing separator.
void csv_row(std::ostream& os, std::span<const double> values);

/// Minimal CSV table reader: one header row, then numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  int column(const std::string& name) const;  // -1 when absent
};
CsvTable read_csv(std::istream& is);

/// Binary 8-bit grayscale PGM (P5).
void write_pgm(std::ostream& os, const std::vector<std::uint8_t>& pixels, int width,
               int height);

/// 8-bit grayscale PNG (zlib-compressed IDAT).
void write_png(std::ostream& os, const std::vector<std::uint8_t>& pixels, int width,
               int height);

}  // namespace stvf
