#pragma once

// NetPBM grayscale label rasters (P2 ASCII / P5 binary), maxval 2. The line
// right after the magic number is a mandatory comment carrying the grid's
// geometry:
//
//   P5
//   # resolution_m_per_px=0.005 origin_x=0 origin_y=0
//   <width> <height>
//   2
//   <pixels>

#include <array>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>

#include "error.hpp"
#include "field.hpp"

namespace msplan {

enum class RasterEncoding { ascii, binary };

namespace detail {

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), end);
}

class PnmReader {
 public:
  explicit PnmReader(std::string_view data) : data_(data) {}

  std::size_t pos() const noexcept { return pos_; }
  bool at_end() const noexcept { return pos_ >= data_.size(); }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, pos_); }

  std::string_view take(std::size_t n) {
    if (data_.size() - pos_ < n) fail("unexpected end of data");
    auto out = data_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  void skip_space_and_comments() {
    while (!at_end()) {
      char c = data_[pos_];
      if (c == '#') {
        while (!at_end() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view line() {
    std::size_t end = data_.find('\n', pos_);
    if (end == std::string_view::npos) fail("unterminated header line");
    auto out = data_.substr(pos_, end - pos_);
    pos_ = end + 1;
    return out;
  }

  std::uint64_t unsigned_token() {
    skip_space_and_comments();
    std::uint64_t v = 0;
    const char* first = data_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, data_.data() + data_.size(), v);
    if (ec != std::errc() || ptr == first) fail("expected an unsigned integer");
    pos_ += static_cast<std::size_t>(ptr - first);
    if (!at_end() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) {
      fail("expected whitespace after integer");
    }
    return v;
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

struct Geometry {
  double resolution = 0.0;
  Point2 origin;
};

inline Geometry parse_geometry_comment(std::string_view line, std::size_t line_offset) {
  auto fail = [&](const std::string& what) -> Geometry { throw ParseError(what, line_offset); };
  if (line.empty() || line.front() != '#') return fail("missing geometry comment after magic");
  Geometry g;
  bool have_res = false, have_x = false, have_y = false;
  std::size_t i = 1;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::size_t eq = line.find('=', i);
    if (eq == std::string_view::npos) return fail("malformed geometry comment");
    std::string_view key = line.substr(i, eq - i);
    std::size_t vend = line.find(' ', eq + 1);
    if (vend == std::string_view::npos) vend = line.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(line.data() + eq + 1, line.data() + vend, value);
    if (ec != std::errc() || ptr != line.data() + vend) {
      throw ParseError("malformed number in geometry comment", line_offset + eq + 1);
    }
    if (key == "resolution_m_per_px") {
      g.resolution = value;
      have_res = true;
    } else if (key == "origin_x") {
      g.origin.x = value;
      have_x = true;
    } else if (key == "origin_y") {
      g.origin.y = value;
      have_y = true;
    } else {
      throw ParseError("unknown geometry key '" + std::string(key) + "'", line_offset + i);
    }
    i = vend;
  }
  if (!have_res || !have_x || !have_y) return fail("geometry comment is incomplete");
  if (!(g.resolution > 0.0)) return fail("resolution must be positive");
  return g;
}

}  // namespace detail

inline std::string encode_raster(const LabelGrid& grid, RasterEncoding enc) {
  std::string out;
  out.reserve(64 + grid.size() * (enc == RasterEncoding::ascii ? 2 : 1));
  out += enc == RasterEncoding::ascii ? "P2\n" : "P5\n";
  out += "# resolution_m_per_px=" + detail::format_double(grid.resolution()) +
         " origin_x=" + detail::format_double(grid.origin().x) +
         " origin_y=" + detail::format_double(grid.origin().y) + "\n";
  out += std::to_string(grid.width()) + " " + std::to_string(grid.height()) + "\n2\n";
  if (enc == RasterEncoding::binary) {
    for (ClassId c : grid.cells()) out.push_back(static_cast<char>(c));
    return out;
  }
  for (std::size_t r = 0; r < grid.height(); ++r) {
    for (std::size_t c = 0; c < grid.width(); ++c) {
      if (c) out.push_back(' ');
      out.push_back(static_cast<char>('0' + index_of(grid.at(r, c))));
    }
    out.push_back('\n');
  }
  return out;
}

inline LabelGrid decode_raster(std::string_view data) {
  detail::PnmReader in(data);
  std::string_view magic = in.take(2);
  bool binary = false;
  if (magic == "P5") {
    binary = true;
  } else if (magic != "P2") {
    throw ParseError("expected magic P2 or P5", 0);
  }
  if (in.take(1) != "\n") throw ParseError("expected newline after magic", 2);
  const std::size_t comment_offset = in.pos();
  const detail::Geometry geom = detail::parse_geometry_comment(in.line(), comment_offset);

  const std::uint64_t width = in.unsigned_token();
  const std::uint64_t height = in.unsigned_token();
  in.skip_space_and_comments();
  const std::size_t maxval_offset = in.pos();
  const std::uint64_t maxval = in.unsigned_token();
  if (width == 0 || height == 0) in.fail("raster dimensions must be positive");
  if (width > (1u << 16) || height > (1u << 16)) in.fail("raster dimensions exceed 65536");
  if (maxval != 2) throw ParseError("maxval must be 2, got " + std::to_string(maxval), maxval_offset);

  const std::size_t n = static_cast<std::size_t>(width * height);
  std::vector<ClassId> cells(n);
  if (binary) {
    in.take(1);  // single whitespace byte after maxval
    const std::size_t data_offset = in.pos();
    if (data.size() - data_offset != n) {
      throw ParseError("pixel data size mismatch: expected " + std::to_string(n) + " bytes, got " +
                           std::to_string(data.size() - data_offset),
                       data_offset);
    }
    for (std::size_t i = 0; i < n; ++i) {
      auto v = static_cast<unsigned char>(data[data_offset + i]);
      if (v > 2) throw ParseError("pixel value " + std::to_string(v) + " exceeds maxval", data_offset + i);
      cells[i] = static_cast<ClassId>(v);
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      in.skip_space_and_comments();
      if (in.at_end()) in.fail("pixel data size mismatch: too few pixels");
      const std::size_t at = in.pos();
      std::uint64_t v = in.unsigned_token();
      if (v > 2) throw ParseError("pixel value " + std::to_string(v) + " exceeds maxval", at);
      cells[i] = static_cast<ClassId>(v);
    }
    in.skip_space_and_comments();
    if (!in.at_end()) in.fail("pixel data size mismatch: trailing data");
  }
  return LabelGrid(static_cast<std::size_t>(width), static_cast<std::size_t>(height),
                   geom.resolution, geom.origin, std::move(cells));
}

inline void write_raster(const LabelGrid& grid, const std::filesystem::path& path,
                         RasterEncoding enc = RasterEncoding::binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  const std::string bytes = encode_raster(grid, enc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing '" + path.string() + "'");
}

inline LabelGrid read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_raster(bytes);
}

}  // namespace msplan
