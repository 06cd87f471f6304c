#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "manrect/consistency.hpp"
#include "manrect/geom.hpp"
#include "manrect/optimize.hpp"

// Vanishing-point pair detection from noisy segments: hypothesize candidates
// from pairwise intersections of long segments, score them by robust
// consistency inliers, deduplicate, refine with conjugate gradient over each
// candidate's frozen inlier set, and pick the pair of candidates that is
// compatible with two orthogonal directions seen from near the principal
// point while covering the most segment length.

namespace manrect {

struct NoPairError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DetectConfig {
  // Candidate-generation length gate: segments >= t_l_factor * mean length.
  // Gating at the full mean starves the shorter of the two direction families
  // of candidates on elongated objects (its segments all sit below the global
  // mean), so the default admits everything within 2x of the mean.
  double t_l_factor = 0.5;
  double t_d = 4.0;                 // pixels^2 inlier threshold (~1.4 px RMS endpoint residual)
  std::optional<double> t_s;        // pixels; dedup budget, defaults to 0.05 * total length
  double t_d_factor = 0.2;          // principal-point proximity gate, fraction of image diagonal
  double t_alpha1 = 5.0;            // degrees; pair angle must exceed 90 - t_alpha1
  double t_alpha2 = 170.0;          // degrees; pair angle must stay below t_alpha2
  int max_rough_candidates = 2000;  // quadratic blowup guard

  void validate() const {
    if (!(t_l_factor > 0.0) || !(t_d > 0.0) || (t_s && !(*t_s > 0.0)) || !(t_d_factor > 0.0) ||
        max_rough_candidates <= 0)
      throw std::invalid_argument("DetectConfig: thresholds must be positive");
    if (!(t_alpha1 > 0.0 && t_alpha1 < 90.0) || !(t_alpha2 > 90.0 && t_alpha2 <= 180.0))
      throw std::invalid_argument("DetectConfig: need 0 < t_alpha1 < 90 < t_alpha2 <= 180");
  }
};

struct VpCandidate {
  Point2 v;
  std::vector<int> inliers;  // ascending segment indices with consistency <= T_D
  double inlier_length_sum = 0.0;
};

struct VpPair {
  Point2 e_h;  // the candidate whose ray from the principal point leans toward the x-axis
  Point2 e_v;
  std::optional<double> f_estimated;
  std::vector<int> inliers_h;
  std::vector<int> inliers_v;
};

inline std::vector<int> inlier_set(Point2 v, std::span<const Segment> segments, double t_d) {
  std::vector<int> out;
  for (int i = 0; i < int(segments.size()); ++i)
    if (consistency(v, segments[size_t(i)]) <= t_d) out.push_back(i);
  return out;
}

namespace detail {

inline double length_sum(std::span<const Segment> segments, const std::vector<int>& indices) {
  double sum = 0.0;
  for (int i : indices) sum += length(segments[size_t(i)]);
  return sum;
}

inline VpCandidate make_candidate(Point2 v, std::span<const Segment> segments, double t_d) {
  VpCandidate c{v, inlier_set(v, segments, t_d), 0.0};
  c.inlier_length_sum = length_sum(segments, c.inliers);
  return c;
}

}  // namespace detail

// Pairwise carrier-line intersections of segments at least as long as
// t_l_factor * mean length, each with its inlier set. Parallel pairs and
// non-finite intersections are skipped; when over the cap, the survivors are
// an even stride through the pairs ordered by descending segment-length
// product, so pairs from every direction family survive.
inline std::vector<VpCandidate> rough_candidates(std::span<const Segment> segments,
                                                 const DetectConfig& cfg) {
  cfg.validate();
  if (segments.size() < 2) return {};
  std::vector<double> len(segments.size());
  double mean_len = 0.0;
  for (size_t i = 0; i < segments.size(); ++i) {
    len[i] = length(segments[i]);
    mean_len += len[i];
  }
  mean_len /= double(segments.size());
  const double t_l = cfg.t_l_factor * mean_len;

  std::vector<int> eligible;
  for (int i = 0; i < int(segments.size()); ++i)
    if (len[size_t(i)] >= t_l) eligible.push_back(i);

  struct RawHit {
    Point2 v;
    double len_product;
  };
  std::vector<RawHit> hits;
  for (size_t a = 0; a < eligible.size(); ++a) {
    for (size_t b = a + 1; b < eligible.size(); ++b) {
      const Segment& si = segments[size_t(eligible[a])];
      const Segment& sj = segments[size_t(eligible[b])];
      const std::optional<Point2> p = line_intersection(si, sj);
      if (!p || !is_finite(*p)) continue;
      hits.push_back({*p, len[size_t(eligible[a])] * len[size_t(eligible[b])]});
    }
  }
  if (int(hits.size()) > cfg.max_rough_candidates) {
    std::stable_sort(hits.begin(), hits.end(),
                     [](const RawHit& x, const RawHit& y) { return x.len_product > y.len_product; });
    // A plain prefix would starve one direction family as soon as the other
    // family's pairwise count alone exceeds the cap (its segments only need
    // to be slightly longer), leaving no candidate near that family's
    // vanishing point. The stride keeps the highest-product pair and spreads
    // the rest across the whole ordering.
    const size_t n = hits.size();
    const size_t cap = size_t(cfg.max_rough_candidates);
    std::vector<RawHit> kept;
    kept.reserve(cap);
    if (cap == 1) {
      kept.push_back(hits.front());
    } else {
      for (size_t k = 0; k < cap; ++k) kept.push_back(hits[k * (n - 1) / (cap - 1)]);
    }
    hits = std::move(kept);
  }

  std::vector<VpCandidate> out;
  out.reserve(hits.size());
  for (const RawHit& h : hits) out.push_back(detail::make_candidate(h.v, segments, cfg.t_d));
  return out;
}

// Keep the strongest candidate of every cluster of near-identical inlier
// sets: sorted by inlier count (ties: longer inlier length, then earlier
// position), a candidate is dropped when the total length of segments in the
// symmetric difference against some survivor is below t_s.
inline std::vector<VpCandidate> dedup(std::vector<VpCandidate> cands,
                                      std::span<const Segment> segments, double t_s) {
  std::vector<size_t> order(cands.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (cands[a].inliers.size() != cands[b].inliers.size())
      return cands[a].inliers.size() > cands[b].inliers.size();
    return cands[a].inlier_length_sum > cands[b].inlier_length_sum;
  });

  std::vector<double> len(segments.size());
  for (size_t i = 0; i < len.size(); ++i) len[i] = length(segments[i]);
  // Walks the symmetric difference in merge order, accumulating lengths in
  // the same order set_symmetric_difference + length_sum would, and bails as
  // soon as the weight reaches t_s.
  const auto diff_weight_below = [&](const std::vector<int>& a, const std::vector<int>& b) {
    double w = 0.0;
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
      if (j == b.size() || (i < a.size() && a[i] < b[j]))
        w += len[size_t(a[i++])];
      else if (i == a.size() || b[j] < a[i])
        w += len[size_t(b[j++])];
      else {
        ++i;
        ++j;
        continue;
      }
      if (w >= t_s) return false;
    }
    return true;
  };

  std::vector<VpCandidate> survivors;
  for (size_t idx : order) {
    const VpCandidate& c = cands[idx];
    bool duplicate = false;
    for (const VpCandidate& s : survivors) {
      if (diff_weight_below(c.inliers, s.inliers)) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) survivors.push_back(c);
  }
  return survivors;
}

// Minimize the robust cost over each candidate's frozen inlier set, then
// recompute inliers at the refined point and deduplicate again. Candidates
// with fewer than two inliers pass through unchanged: a single segment pins
// no point (any point on its line has zero cost).
inline std::vector<VpCandidate> refine_candidates(const std::vector<VpCandidate>& rough,
                                                  std::span<const Segment> segments,
                                                  const DetectConfig& cfg,
                                                  const OptimizerConfig& opt_cfg = {}) {
  const RobustThreshold t_d(cfg.t_d);
  std::vector<VpCandidate> refined;
  refined.reserve(rough.size());
  std::vector<Segment> subset;
  for (const VpCandidate& c : rough) {
    if (c.inliers.size() < 2) {
      refined.push_back(c);
      continue;
    }
    subset.clear();
    for (int i : c.inliers) subset.push_back(segments[size_t(i)]);
    const auto cost = [&](Point2 v) { return robust_cost_with_gradient(v, subset, t_d); };
    const MinimizeResult r = minimize(cost, c.v, opt_cfg);
    refined.push_back(detail::make_candidate(r.x, segments, cfg.t_d));
  }
  double total = 0.0;
  for (const Segment& s : segments) total += length(s);
  return dedup(std::move(refined), segments, cfg.t_s.value_or(0.05 * total));
}

// Drop candidates closer to the principal point than t_d_factor * diagonal:
// a vanishing point near the principal point implies an implausibly slanted
// plane and is usually a cluster of outlier intersections.
inline std::vector<VpCandidate> filter_near_principal(std::vector<VpCandidate> cands, Point2 p,
                                                      double diag, const DetectConfig& cfg) {
  const double t_d = cfg.t_d_factor * diag;
  std::erase_if(cands, [&](const VpCandidate& c) { return norm(c.v - p) < t_d; });
  return cands;
}

namespace detail {

inline double pair_angle_deg(Point2 v1, Point2 v2, Point2 p) {
  const Point2 a = v1 - p;
  const Point2 b = v2 - p;
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  const double c = std::clamp(dot(a, b) / (na * nb), -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

// Deviation of the ray p->v from the image x-axis, in [0, 90] degrees.
inline double x_axis_deviation_deg(Point2 v, Point2 p) {
  const Point2 d = v - p;
  return std::atan2(std::abs(d.y), std::abs(d.x)) * 180.0 / std::numbers::pi;
}

}  // namespace detail

// Pick the candidate pair with the largest union inlier length (shared
// segments counted once) among pairs whose angle at the principal point lies
// strictly inside (90 - t_alpha1, t_alpha2) degrees. The member leaning
// toward the x-axis becomes e_h.
inline VpPair select_pair(const std::vector<VpCandidate>& cands, Point2 p,
                          std::span<const Segment> segments, const DetectConfig& cfg) {
  if (cands.size() < 2)
    throw NoPairError("need at least two vanishing-point candidates, have " +
                      std::to_string(cands.size()));
  const double lo = 90.0 - cfg.t_alpha1;
  const double hi = cfg.t_alpha2;
  int best_i = -1, best_j = -1;
  double best_score = -1.0;
  int rejected_angle = 0;
  std::vector<int> uni;
  for (size_t i = 0; i < cands.size(); ++i) {
    for (size_t j = i + 1; j < cands.size(); ++j) {
      const double alpha = detail::pair_angle_deg(cands[i].v, cands[j].v, p);
      if (!(alpha > lo && alpha < hi)) {
        ++rejected_angle;
        continue;
      }
      uni.clear();
      std::set_union(cands[i].inliers.begin(), cands[i].inliers.end(), cands[j].inliers.begin(),
                     cands[j].inliers.end(), std::back_inserter(uni));
      const double score = detail::length_sum(segments, uni);
      if (score > best_score) {
        best_score = score;
        best_i = int(i);
        best_j = int(j);
      }
    }
  }
  if (best_i < 0)
    throw NoPairError("angle gate (" + std::to_string(lo) + ", " + std::to_string(hi) +
                      ") degrees rejected all " + std::to_string(rejected_angle) +
                      " candidate pairs");

  const VpCandidate& a = cands[size_t(best_i)];
  const VpCandidate& b = cands[size_t(best_j)];
  const bool a_horizontal =
      detail::x_axis_deviation_deg(a.v, p) <= detail::x_axis_deviation_deg(b.v, p);
  const VpCandidate& h = a_horizontal ? a : b;
  const VpCandidate& v = a_horizontal ? b : a;
  return {h.v, v.v, std::nullopt, h.inliers, v.inliers};
}

// f = sqrt(-(v1 - p) . (v2 - p)): the focal length that makes the two
// back-projected directions orthogonal. Only defined when the angle at the
// principal point is obtuse; returns nullopt otherwise.
inline std::optional<double> estimate_focal(Point2 v1, Point2 v2, Point2 p) {
  const double d = dot(v1 - p, v2 - p);
  if (d >= 0.0) return std::nullopt;
  return std::sqrt(-d);
}

// Full pipeline: candidates -> inliers -> dedup -> refine -> principal-point
// gate -> pair selection. With no intrinsics, the principal point defaults to
// principal_override (for callers who know it without knowing f) or the image
// center, and the pair carries an orthogonality-based focal estimate when the
// geometry admits one.
inline VpPair detect(std::span<const Segment> segments, ImageSize image_size,
                     const std::optional<CameraIntrinsics>& intrinsics, const DetectConfig& cfg = {},
                     std::optional<Point2> principal_override = std::nullopt) {
  cfg.validate();
  if (image_size.width <= 0 || image_size.height <= 0)
    throw std::invalid_argument("detect: image size must be positive");
  if (segments.size() < 4)
    throw NoPairError("need at least 4 segments, have " + std::to_string(segments.size()));

  const Point2 p = intrinsics ? intrinsics->p
                              : principal_override.value_or(
                                    Point2{image_size.width / 2.0, image_size.height / 2.0});
  double total_len = 0.0;
  for (const Segment& s : segments) total_len += length(s);
  DetectConfig eff = cfg;
  eff.t_s = cfg.t_s.value_or(0.05 * total_len);

  std::vector<VpCandidate> cands = rough_candidates(segments, eff);
  if (cands.empty()) throw NoPairError("no intersecting pair of long segments");
  cands = dedup(std::move(cands), segments, *eff.t_s);
  cands = refine_candidates(cands, segments, eff);
  cands = filter_near_principal(std::move(cands), p, diagonal(image_size), eff);

  VpPair pair = select_pair(cands, p, segments, eff);
  if (!intrinsics) pair.f_estimated = estimate_focal(pair.e_h, pair.e_v, p);
  return pair;
}

}  // namespace manrect
