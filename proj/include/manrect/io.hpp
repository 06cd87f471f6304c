#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "manrect/geom.hpp"

// File formats: segment CSV (x1,y1,x2,y2 rows), binary PNM rasters (P5/P6,
// maxval 255), and %.17g JSON emission helpers. 17 significant digits
// round-trip every double exactly, so written records re-parse bit-identical.

namespace manrect {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string fmt_point(Point2 p) { return "[" + fmt_double(p.x) + ", " + fmt_double(p.y) + "]"; }

inline std::string fmt_mat3(const Mat3& m) {
  std::string out = "[";
  for (int i = 0; i < 9; ++i) {
    if (i) out += ", ";
    out += fmt_double(m.m[size_t(i)]);
  }
  return out + "]";
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool parse_double(std::string_view field, double& out) {
  const std::string tmp(trim(field));
  if (tmp.empty()) return false;
  char* end = nullptr;
  out = std::strtod(tmp.c_str(), &end);
  return end == tmp.c_str() + tmp.size();
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

}  // namespace detail

// Parse a comma-separated list of doubles; throws IoError naming `what` on
// any malformed field or a count mismatch (when expected >= 0).
inline std::vector<double> parse_double_list(std::string_view text, int expected,
                                             const std::string& what) {
  const std::vector<std::string_view> fields = detail::split(text, ',');
  std::vector<double> out;
  for (std::string_view f : fields) {
    double v = 0.0;
    if (!detail::parse_double(f, v))
      throw IoError(what + ": malformed number '" + std::string(detail::trim(f)) + "'");
    out.push_back(v);
  }
  if (expected >= 0 && int(out.size()) != expected)
    throw IoError(what + ": expected " + std::to_string(expected) + " numbers, got " +
                  std::to_string(out.size()));
  return out;
}

// CSV rows x1,y1,x2,y2; optional header line "x1,y1,x2,y2"; blank lines
// skipped. Errors carry 1-based line numbers.
inline std::vector<Segment> read_segments_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open segment file: " + path);
  std::vector<Segment> out;
  std::string line;
  int lineno = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string_view body = detail::trim(line);
    if (body.empty()) continue;
    if (first_content) {
      first_content = false;
      std::string squeezed;
      for (char ch : body)
        if (!std::isspace(static_cast<unsigned char>(ch))) squeezed += ch;
      if (squeezed == "x1,y1,x2,y2") continue;
    }
    const std::string where = path + ":" + std::to_string(lineno);
    const std::vector<double> v = parse_double_list(body, 4, where);
    try {
      out.emplace_back(Point2{v[0], v[1]}, Point2{v[2], v[3]});
    } catch (const std::invalid_argument& e) {
      throw IoError(where + ": " + e.what());
    }
  }
  return out;
}

inline void write_segments_csv(const std::string& path, std::span<const Segment> segments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "x1,y1,x2,y2\n";
  for (const Segment& s : segments)
    out << fmt_double(s.p1.x) << ',' << fmt_double(s.p1.y) << ',' << fmt_double(s.p2.x) << ','
        << fmt_double(s.p2.y) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << content;
  if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Grayscale (1 channel) or RGB (3 channels) raster, 8 bits per sample,
// row-major top-to-bottom.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int row, int col, int ch) const {
    return pixels[size_t((row * width + col) * channels + ch)];
  }
};

namespace detail {

inline int pnm_token(const std::string& data, size_t& pos) {
  // Skip whitespace and '#' comments between header fields.
  while (pos < data.size()) {
    const char c = data[pos];
    if (c == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  int value = 0;
  bool any = false;
  while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
    value = value * 10 + (data[pos] - '0');
    ++pos;
    any = true;
  }
  if (!any) throw IoError("malformed PNM header");
  return value;
}

}  // namespace detail

// Binary PNM only: P5 grayscale or P6 RGB, maxval 255.
inline Image read_pnm(const std::string& path) {
  const std::string data = read_text_file(path);
  if (data.size() < 2 || data[0] != 'P' || (data[1] != '5' && data[1] != '6'))
    throw IoError(path + ": unsupported image format (binary P5/P6 PNM required)");
  Image img;
  img.channels = data[1] == '5' ? 1 : 3;
  size_t pos = 2;
  img.width = detail::pnm_token(data, pos);
  img.height = detail::pnm_token(data, pos);
  const int maxval = detail::pnm_token(data, pos);
  if (img.width <= 0 || img.height <= 0 || maxval != 255)
    throw IoError(path + ": PNM must have positive dimensions and maxval 255");
  ++pos;  // single whitespace byte after maxval
  const size_t need = size_t(img.width) * size_t(img.height) * size_t(img.channels);
  if (data.size() < pos + need) throw IoError(path + ": truncated PNM pixel data");
  img.pixels.assign(data.begin() + long(pos), data.begin() + long(pos + need));
  return img;
}

inline void write_pnm(const std::string& path, const Image& img) {
  if (img.channels != 1 && img.channels != 3)
    throw IoError("write_pnm: only 1- or 3-channel images");
  if (img.pixels.size() != size_t(img.width) * size_t(img.height) * size_t(img.channels))
    throw IoError("write_pnm: pixel buffer size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << (img.channels == 1 ? "P5\n" : "P6\n") << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), long(img.pixels.size()));
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace manrect
