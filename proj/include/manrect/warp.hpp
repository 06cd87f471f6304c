#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "manrect/geom.hpp"
#include "manrect/io.hpp"

// Raster warping by a homography: inverse mapping with bilinear sampling on
// the pixel-center grid. The output canvas is fitted to the homography image
// of the source rectangle; when that exceeds 4x the source area a uniform
// prescale shrinks it back, and the applied transform is reported so callers
// can relate output pixels to homography coordinates.

namespace manrect {

struct WarpError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct WarpInfo {
  int width;        // output canvas
  int height;
  Point2 offset;    // translation subtracted before prescale: out = prescale * (H * src - offset)
  double prescale;  // 1 unless the fitted canvas exceeded 4x the source area
};

inline std::pair<Image, WarpInfo> warp_image(const Image& src, const Mat3& h) {
  if (src.width <= 0 || src.height <= 0) throw WarpError("empty source image");
  const double w = src.width;
  const double hgt = src.height;
  const Point2 src_corners[4] = {{0.0, 0.0}, {w, 0.0}, {w, hgt}, {0.0, hgt}};
  double minx = 0.0, miny = 0.0, maxx = 0.0, maxy = 0.0;
  for (int i = 0; i < 4; ++i) {
    const std::optional<Point2> m = apply_homography(h, src_corners[i]);
    if (!m || !is_finite(*m))
      throw WarpError("source corner maps to infinity; cannot fit an output canvas");
    minx = i ? std::min(minx, m->x) : m->x;
    maxx = i ? std::max(maxx, m->x) : m->x;
    miny = i ? std::min(miny, m->y) : m->y;
    maxy = i ? std::max(maxy, m->y) : m->y;
  }

  const double fit_w = maxx - minx;
  const double fit_h = maxy - miny;
  if (!(fit_w > 0.0) || !(fit_h > 0.0)) throw WarpError("homography collapses the source image");
  const double max_area = 4.0 * w * hgt;
  const double scale = fit_w * fit_h > max_area ? std::sqrt(max_area / (fit_w * fit_h)) : 1.0;

  // Full output transform: prescale * translate(-min) * H.
  const Mat3 shift = {{1, 0, -minx, 0, 1, -miny, 0, 0, 1}};
  const Mat3 full = Mat3::diagonal(scale, scale, 1.0) * shift * h;
  const Mat3 back = inverse(full);

  Image out;
  out.width = std::max(1, int(std::ceil(scale * fit_w)));
  out.height = std::max(1, int(std::ceil(scale * fit_h)));
  out.channels = src.channels;
  out.pixels.assign(size_t(out.width) * size_t(out.height) * size_t(out.channels), 0);

  for (int oy = 0; oy < out.height; ++oy) {
    for (int ox = 0; ox < out.width; ++ox) {
      const std::optional<Point2> s = apply_homography(back, {ox + 0.5, oy + 0.5});
      if (!s || !(s->x >= 0.0) || !(s->x <= w) || !(s->y >= 0.0) || !(s->y <= hgt))
        continue;  // outside the source: leave black
      // Bilinear on pixel centers (sample (j+0.5, i+0.5) hits pixel (i,j)
      // exactly). Clamping the continuous coordinate keeps the half-pixel
      // border strip on the edge pixel's value instead of extrapolating.
      const double u = std::clamp(s->x - 0.5, 0.0, double(src.width - 1));
      const double v = std::clamp(s->y - 0.5, 0.0, double(src.height - 1));
      const double fu = u - std::floor(u);
      const double fv = v - std::floor(v);
      const int j0 = int(std::floor(u));
      const int i0 = int(std::floor(v));
      const int j1 = std::min(j0 + 1, src.width - 1);
      const int i1 = std::min(i0 + 1, src.height - 1);
      for (int ch = 0; ch < src.channels; ++ch) {
        const double val = (1.0 - fu) * (1.0 - fv) * src.at(i0, j0, ch) +
                           fu * (1.0 - fv) * src.at(i0, j1, ch) +
                           (1.0 - fu) * fv * src.at(i1, j0, ch) + fu * fv * src.at(i1, j1, ch);
        out.pixels[size_t((oy * out.width + ox) * out.channels + ch)] =
            std::uint8_t(std::lround(val));
      }
    }
  }
  const WarpInfo info{out.width, out.height, {minx, miny}, scale};
  return {std::move(out), info};
}

}  // namespace manrect
