#include "stvf/io.hpp"

#include <zlib.h>

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stvf {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void csv_row(std::ostream& os, std::span<const double> values) {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k > 0) os << ',';
    os << fmt17(values[k]);
  }
  os << '\n';
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) return static_cast<int>(k);
  }
  return -1;
}

CsvTable read_csv(std::istream& is) {
  CsvTable table;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty CSV");
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) table.header.push_back(cell);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream rs(line);
    std::vector<double> row;
    while (std::getline(rs, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != table.header.size()) {
      throw std::runtime_error("ragged CSV row");
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_pgm(std::ostream& os, const std::vector<std::uint8_t>& pixels, int width,
               int height) {
  if (static_cast<std::size_t>(width) * height != pixels.size()) {
    throw std::invalid_argument("pixel buffer does not match dimensions");
  }
  os << "P5\n" << width << ' ' << height << "\n255\n";
  os.write(reinterpret_cast<const char*>(pixels.data()),
           static_cast<std::streamsize>(pixels.size()));
}

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>((v >> 24) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>(v & 0xff));
}

void put_chunk(std::ostream& os, const char type[4], const std::string& data) {
  std::string head;
  put_u32(head, static_cast<std::uint32_t>(data.size()));
  os.write(head.data(), 4);
  std::string body(type, 4);
  body += data;
  os.write(body.data(), static_cast<std::streamsize>(body.size()));
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(body.data()),
                         static_cast<uInt>(body.size()));
  std::string tail;
  put_u32(tail, static_cast<std::uint32_t>(crc));
  os.write(tail.data(), 4);
}

}  // namespace

void write_png(std::ostream& os, const std::vector<std::uint8_t>& pixels, int width,
               int height) {
  if (static_cast<std::size_t>(width) * height != pixels.size()) {
    throw std::invalid_argument("pixel buffer does not match dimensions");
  }
  static const unsigned char sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
  os.write(reinterpret_cast<const char*>(sig), 8);

  std::string ihdr;
  put_u32(ihdr, static_cast<std::uint32_t>(width));
  put_u32(ihdr, static_cast<std::uint32_t>(height));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(0);   // grayscale
  ihdr.push_back(0);   // deflate
  ihdr.push_back(0);   // filter method
  ihdr.push_back(0);   // no interlace
  put_chunk(os, "IHDR", ihdr);

  // One filter byte (none) per scanline.
  std::string raw;
  raw.reserve(static_cast<std::size_t>(height) * (width + 1));
  for (int y = 0; y < height; ++y) {
    raw.push_back(0);
    raw.append(reinterpret_cast<const char*>(pixels.data()) +
                   static_cast<std::size_t>(y) * width,
               static_cast<std::size_t>(width));
  }
  uLongf bound = compressBound(static_cast<uLong>(raw.size()));
  std::string idat(bound, '\0');
  if (compress2(reinterpret_cast<Bytef*>(idat.data()), &bound,
                reinterpret_cast<const Bytef*>(raw.data()),
                static_cast<uLong>(raw.size()), 9) != Z_OK) {
    throw std::runtime_error("deflate failed");
  }
  idat.resize(bound);
  put_chunk(os, "IDAT", idat);
  put_chunk(os, "IEND", "");
}

}  // namespace stvf
