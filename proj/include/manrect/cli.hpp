#pragma once

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "manrect/geom.hpp"
#include "manrect/io.hpp"
#include "manrect/metrics.hpp"
#include "manrect/rectify.hpp"
#include "manrect/synth.hpp"
#include "manrect/vp_detect.hpp"
#include "manrect/warp.hpp"

// Command-line surface: detect (vanishing points as JSON), rectify (full
// homography record, optional raster warp), eval (quality metrics for a known
// quadrangle), synth (scene generation with ground truth). Exit codes:
// 0 success, 1 input/usage error, 2 algorithmic failure (no valid pair).

namespace manrect {

struct DetectOptions {
  std::string segments_path;
  std::string image_size;
  std::optional<double> focal;
  std::optional<std::string> principal;
  std::optional<double> t_d, t_l_factor, t_s, t_d_factor, t_alpha1, t_alpha2;
  std::string out_path;
};

struct RectifyOptions {
  DetectOptions base;
  std::string homography_out;
  std::optional<std::string> image_in;
  std::optional<std::string> warp_out;
};

struct EvalOptions {
  std::string quad;
  double aspect = 0.0;
  std::string homography_path;
};

struct SynthOptions {
  std::optional<std::string> spec_path;
  std::optional<double> focal;
  std::optional<std::string> principal;
  std::string image_size = "640x480";
  double tilt_x = 30.0;
  double tilt_y = 20.0;
  int n_h = 10;
  int n_v = 10;
  double sigma = 0.0;
  double outlier_fraction = 0.0;
  std::uint64_t seed = 0;
  double aspect = 1.5;
  std::string out_path;
  std::optional<std::string> truth_out;
};

namespace cli_detail {

inline ImageSize parse_image_size(const std::string& text) {
  const size_t pos = text.find_first_of("xX");
  if (pos == std::string::npos || pos == 0 || pos + 1 >= text.size())
    throw IoError("--image-size must be WxH, got '" + text + "'");
  double w = 0.0, h = 0.0;
  if (!detail::parse_double(text.substr(0, pos), w) ||
      !detail::parse_double(text.substr(pos + 1), h) || w <= 0.0 || h <= 0.0 ||
      w != double(int(w)) || h != double(int(h)))
    throw IoError("--image-size must be two positive integers WxH, got '" + text + "'");
  return {int(w), int(h)};
}

inline Point2 parse_point_arg(const std::string& text, const std::string& what) {
  const std::vector<double> v = parse_double_list(text, 2, what);
  return {v[0], v[1]};
}

inline DetectConfig make_config(const DetectOptions& o) {
  DetectConfig cfg;
  if (o.t_d) cfg.t_d = *o.t_d;
  if (o.t_l_factor) cfg.t_l_factor = *o.t_l_factor;
  if (o.t_s) cfg.t_s = *o.t_s;
  if (o.t_d_factor) cfg.t_d_factor = *o.t_d_factor;
  if (o.t_alpha1) cfg.t_alpha1 = *o.t_alpha1;
  if (o.t_alpha2) cfg.t_alpha2 = *o.t_alpha2;
  return cfg;
}

struct DetectRun {
  std::vector<Segment> segments;
  ImageSize size{};
  Point2 principal;
  VpPair pair;
};

inline DetectRun run_detection(const DetectOptions& o) {
  const ImageSize size = parse_image_size(o.image_size);
  std::vector<Segment> segments = read_segments_csv(o.segments_path);
  std::optional<Point2> principal;
  if (o.principal) principal = parse_point_arg(*o.principal, "--principal");
  const Point2 p = principal.value_or(Point2{size.width / 2.0, size.height / 2.0});
  std::optional<CameraIntrinsics> intrinsics;
  if (o.focal) intrinsics.emplace(*o.focal, p);
  VpPair pair = detect(segments, size, intrinsics, make_config(o), principal);
  return {std::move(segments), size, p, std::move(pair)};
}

inline std::string pair_json_fields(const VpPair& pair) {
  std::string j;
  j += "  \"v_h\": " + fmt_point(pair.e_h) + ",\n";
  j += "  \"v_v\": " + fmt_point(pair.e_v) + ",\n";
  if (pair.f_estimated) j += "  \"f_estimated\": " + fmt_double(*pair.f_estimated) + ",\n";
  j += "  \"n_inliers_h\": " + std::to_string(pair.inliers_h.size()) + ",\n";
  j += "  \"n_inliers_v\": " + std::to_string(pair.inliers_v.size());
  return j;
}

inline Mat3 read_homography_json(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  const char* key = j.contains("H") ? "H" : "H_true";
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != 9)
    throw IoError(path + ": expected key \"H\" (or \"H_true\") with 9 numbers");
  Mat3 h;
  for (int i = 0; i < 9; ++i) h.m[size_t(i)] = j[key][size_t(i)].get<double>();
  return h;
}

inline SceneSpec scene_from_json(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  try {
    if (!j.contains("focal")) throw IoError(path + ": \"focal\" is required");
    ImageSize size{640, 480};
    if (j.contains("image_size"))
      size = {j["image_size"].at(0).get<int>(), j["image_size"].at(1).get<int>()};
    Point2 principal{size.width / 2.0, size.height / 2.0};
    if (j.contains("principal"))
      principal = {j["principal"].at(0).get<double>(), j["principal"].at(1).get<double>()};
    Mat3 rot;
    if (j.contains("rotation")) {
      if (!j["rotation"].is_array() || j["rotation"].size() != 9)
        throw IoError(path + ": \"rotation\" must hold 9 numbers row-major");
      for (int i = 0; i < 9; ++i) rot.m[size_t(i)] = j["rotation"][size_t(i)].get<double>();
    } else {
      rot = rotation_about_x(j.value("tilt_x", 30.0)) * rotation_about_y(j.value("tilt_y", 20.0));
    }
    return SceneSpec{CameraIntrinsics(j["focal"].get<double>(), principal),
                     rot,
                     j.value("n_h", 10),
                     j.value("n_v", 10),
                     j.value("sigma", 0.0),
                     j.value("outlier_fraction", 0.0),
                     j.value("seed", std::uint64_t{0}),
                     size,
                     j.value("aspect", 1.5)};
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

inline SceneSpec scene_from_flags(const SynthOptions& o) {
  if (!o.focal) throw IoError("--focal is required when no --spec file is given");
  const ImageSize size = parse_image_size(o.image_size);
  Point2 principal{size.width / 2.0, size.height / 2.0};
  if (o.principal) principal = parse_point_arg(*o.principal, "--principal");
  return SceneSpec{CameraIntrinsics(*o.focal, principal),
                   rotation_about_x(o.tilt_x) * rotation_about_y(o.tilt_y),
                   o.n_h,
                   o.n_v,
                   o.sigma,
                   o.outlier_fraction,
                   o.seed,
                   size,
                   o.aspect};
}

inline std::string truth_json(const GroundTruth& truth) {
  std::string j = "{\n";
  j += "  \"v_h\": " + fmt_point(truth.v_h) + ",\n";
  j += "  \"v_v\": " + fmt_point(truth.v_v) + ",\n";
  j += "  \"H_true\": " + fmt_mat3(truth.H_true) + ",\n";
  j += "  \"quad\": [";
  for (int i = 0; i < 4; ++i) {
    if (i) j += ", ";
    j += fmt_double(truth.quad.corners[size_t(i)].x) + ", " +
         fmt_double(truth.quad.corners[size_t(i)].y);
  }
  j += "],\n";
  j += "  \"aspect\": " + fmt_double(truth.aspect) + "\n}\n";
  return j;
}

}  // namespace cli_detail

inline int cmd_detect(const DetectOptions& o) {
  const cli_detail::DetectRun run = cli_detail::run_detection(o);
  write_text_file(o.out_path, "{\n" + cli_detail::pair_json_fields(run.pair) + "\n}\n");
  return 0;
}

inline int cmd_rectify(const RectifyOptions& o) {
  if (o.image_in.has_value() != o.warp_out.has_value())
    throw IoError("--image and --warp-out must be given together");
  const cli_detail::DetectRun run = cli_detail::run_detection(o.base);
  const auto [f, source] = focal_for_rectification(run.pair, o.base.focal, run.size);
  const Rectification rect = rectification_from_vps(
      run.pair.e_h, run.pair.e_v, CameraIntrinsics(f, run.principal), source);

  std::string j = "{\n";
  j += "  \"H\": " + fmt_mat3(rect.H) + ",\n";
  j += cli_detail::pair_json_fields(run.pair) + ",\n";
  j += "  \"beta\": " + fmt_double(rect.beta) + ",\n";
  j += "  \"f_used\": " + fmt_double(rect.f_used) + ",\n";
  j += "  \"f_source\": \"" + std::string(to_string(rect.f_source)) + "\"";
  if (o.image_in) {
    const Image src = read_pnm(*o.image_in);
    const auto [warped, info] = warp_image(src, rect.H);
    write_pnm(*o.warp_out, warped);
    j += ",\n  \"warp\": {\"width\": " + std::to_string(info.width) +
         ", \"height\": " + std::to_string(info.height) + ", \"offset\": " +
         fmt_point(info.offset) + ", \"prescale\": " + fmt_double(info.prescale) + "}";
  }
  j += "\n}\n";
  write_text_file(o.homography_out, j);
  return 0;
}

inline int cmd_eval(const EvalOptions& o) {
  const std::vector<double> q = parse_double_list(o.quad, 8, "--quad");
  std::array<Point2, 4> corners;
  for (int i = 0; i < 4; ++i) corners[size_t(i)] = {q[size_t(2 * i)], q[size_t(2 * i + 1)]};
  const Quadrangle quad(corners);
  const Mat3 h = cli_detail::read_homography_json(o.homography_path);
  const EvalReport r = evaluate(quad, o.aspect, h);
  std::cout << "{\"d_rect\":" << fmt_double(r.d_rect) << ",\"d_rot\":" << fmt_double(r.d_rot)
            << ",\"d_ar\":" << fmt_double(100.0 * r.d_ar)
            << ",\"rotated90\":" << (r.rotated90 ? "true" : "false") << "}\n";
  return 0;
}

inline int cmd_synth(const SynthOptions& o) {
  const SceneSpec spec =
      o.spec_path ? cli_detail::scene_from_json(*o.spec_path) : cli_detail::scene_from_flags(o);
  const auto [segments, truth] = generate(spec);
  write_segments_csv(o.out_path, segments);
  if (o.truth_out) write_text_file(*o.truth_out, cli_detail::truth_json(truth));
  return 0;
}

namespace cli_detail {

inline void add_threshold_options(CLI::App& cmd, DetectOptions& o) {
  cmd.add_option("--t-d", o.t_d, "Inlier consistency threshold, pixels^2");
  cmd.add_option("--t-l-factor", o.t_l_factor,
                 "Candidate length gate as a multiple of the mean segment length");
  cmd.add_option("--t-s", o.t_s, "Dedup symmetric-difference length budget, pixels");
  cmd.add_option("--t-d-factor", o.t_d_factor,
                 "Principal-point proximity gate, fraction of the image diagonal");
  cmd.add_option("--t-alpha1", o.t_alpha1, "Pair angle must exceed 90 minus this, degrees");
  cmd.add_option("--t-alpha2", o.t_alpha2, "Pair angle must stay below this, degrees");
}

inline void add_common_options(CLI::App& cmd, DetectOptions& o) {
  cmd.add_option("--segments", o.segments_path, "Segment CSV: rows x1,y1,x2,y2")->required();
  cmd.add_option("--image-size", o.image_size, "Image dimensions WxH, pixels")->required();
  cmd.add_option("--focal", o.focal, "Known focal length, pixels");
  cmd.add_option("--principal", o.principal, "Principal point X,Y (default: image center)");
  add_threshold_options(cmd, o);
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Vanishing-point detection and metric rectification for planar "
               "Manhattan-structured objects"};
  app.require_subcommand(1);

  DetectOptions detect_opts;
  CLI::App* detect_cmd = app.add_subcommand("detect", "Detect a vanishing-point pair");
  cli_detail::add_common_options(*detect_cmd, detect_opts);
  detect_cmd->add_option("--out", detect_opts.out_path, "Output JSON path")->required();

  RectifyOptions rectify_opts;
  CLI::App* rectify_cmd =
      app.add_subcommand("rectify", "Detect and compute the rectifying homography");
  cli_detail::add_common_options(*rectify_cmd, rectify_opts.base);
  rectify_cmd->add_option("--homography-out", rectify_opts.homography_out, "Output JSON path")
      ->required();
  rectify_cmd->add_option("--image", rectify_opts.image_in, "Source raster (binary P5/P6 PNM)");
  rectify_cmd->add_option("--warp-out", rectify_opts.warp_out, "Warped raster output path");

  EvalOptions eval_opts;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score a homography against a known quadrangle");
  eval_cmd->add_option("--quad", eval_opts.quad,
                       "Quadrangle x0,y0,...,x3,y3 clockwise from top-left")->required();
  eval_cmd->add_option("--aspect", eval_opts.aspect, "Template width/height ratio")->required();
  eval_cmd->add_option("--homography", eval_opts.homography_path,
                       "JSON with key \"H\" (or \"H_true\") of 9 numbers")->required();

  SynthOptions synth_opts;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scene + ground truth");
  synth_cmd->add_option("--spec", synth_opts.spec_path, "Scene spec JSON (overrides flags)");
  synth_cmd->add_option("--focal", synth_opts.focal, "Focal length, pixels");
  synth_cmd->add_option("--principal", synth_opts.principal, "Principal point X,Y");
  synth_cmd->add_option("--image-size", synth_opts.image_size, "Image dimensions WxH");
  synth_cmd->add_option("--tilt-x", synth_opts.tilt_x, "Plane tilt about the x-axis, degrees");
  synth_cmd->add_option("--tilt-y", synth_opts.tilt_y, "Plane tilt about the y-axis, degrees");
  synth_cmd->add_option("--n-h", synth_opts.n_h, "Segments toward the horizontal vanishing point");
  synth_cmd->add_option("--n-v", synth_opts.n_v, "Segments toward the vertical vanishing point");
  synth_cmd->add_option("--sigma", synth_opts.sigma, "Endpoint noise std, pixels");
  synth_cmd->add_option("--outlier-fraction", synth_opts.outlier_fraction,
                        "Outlier segments as a fraction of grid segments");
  synth_cmd->add_option("--seed", synth_opts.seed, "Random seed");
  synth_cmd->add_option("--aspect", synth_opts.aspect, "Object width/height ratio");
  synth_cmd->add_option("--out", synth_opts.out_path, "Segment CSV output path")->required();
  synth_cmd->add_option("--truth-out", synth_opts.truth_out, "Ground-truth JSON output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (detect_cmd->parsed()) return cmd_detect(detect_opts);
    if (rectify_cmd->parsed()) return cmd_rectify(rectify_opts);
    if (eval_cmd->parsed()) return cmd_eval(eval_opts);
    return cmd_synth(synth_opts);
  } catch (const NoPairError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CollinearVpsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegeneratePlaneError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const WarpError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace manrect
