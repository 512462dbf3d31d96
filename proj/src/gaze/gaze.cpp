#include "fsdt/gaze/gaze.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fsdt::gaze {

TileQualityMap tile_quality_map(double gaze_x, double gaze_y,
                                double radius_high, double radius_med) {
  if (gaze_x < 0.0 || gaze_x > 1.0 || gaze_y < 0.0 || gaze_y > 1.0)
    throw std::domain_error("gaze outside [0,1]^2");
  if (radius_high < 0.0 || radius_high >= radius_med)
    throw std::domain_error("require 0 <= radius_high < radius_med");
  TileQualityMap map;
  for (int j = 0; j < kGridSide; ++j)
    for (int i = 0; i < kGridSide; ++i) {
      const double cx = (i + 0.5) / kGridSide;
      const double cy = (j + 0.5) / kGridSide;
      const double d =
          std::max(std::abs(gaze_x - cx), std::abs(gaze_y - cy)) * kGridSide;
      Quality q = Quality::Low;
      if (d <= radius_high)
        q = Quality::High;
      else if (d <= radius_med)
        q = Quality::Med;
      map.grid[j * kGridSide + i] = q;
      if (q == Quality::High)
        ++map.count_high;
      else if (q == Quality::Med)
        ++map.count_med;
      else
        ++map.count_low;
    }
  return map;
}

GazeTrace synth_trace(int video_len, std::mt19937_64& rng, double smoothness) {
  if (video_len <= 0) throw std::invalid_argument("video_len must be positive");
  GazeTrace trace;
  trace.video_id = "synthetic";
  trace.frames.reserve(video_len);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  double x = u01(rng), y = u01(rng);
  std::uniform_real_distribution<double> step(-smoothness, smoothness);
  auto reflect = [](double v) {
    // reflect into [0,1]; steps are bounded so one fold suffices
    if (v < 0.0) return -v;
    if (v > 1.0) return 2.0 - v;
    return v;
  };
  for (int t = 0; t < video_len; ++t) {
    trace.frames.push_back({t, x, y});
    if (smoothness > 0.0) {
      x = reflect(x + step(rng));
      y = reflect(y + step(rng));
    }
  }
  return trace;
}

std::pair<GazeTrace, GazeTrace> temporal_split(const GazeTrace& trace,
                                               double ratio) {
  if (trace.empty()) throw std::invalid_argument("empty trace");
  const auto n = trace.frames.size();
  const auto n_train = static_cast<std::size_t>(
      std::ceil(ratio * static_cast<double>(n)));
  GazeTrace train, test;
  train.video_id = trace.video_id;
  test.video_id = trace.video_id;
  train.frames.assign(trace.frames.begin(), trace.frames.begin() + n_train);
  test.frames.assign(trace.frames.begin() + n_train, trace.frames.end());
  return {std::move(train), std::move(test)};
}

GazeTrace parse_trace(std::istream& in, const std::string& video_id) {
  GazeTrace trace;
  trace.video_id = video_id;
  std::string line;
  int line_no = 0;
  long prev_t = -1;
  bool have_prev = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    GazeFrame f;
    char c1 = 0, c2 = 0;
    if (!(row >> f.t >> c1 >> f.x >> c2 >> f.y) || c1 != ',' || c2 != ',')
      throw TraceParseError(line_no, "expected frame_index,x,y");
    std::string rest;
    if (row >> rest) throw TraceParseError(line_no, "trailing content");
    if (f.x < 0.0 || f.x > 1.0 || f.y < 0.0 || f.y > 1.0)
      throw TraceParseError(line_no, "coordinate outside [0,1]");
    if (have_prev && f.t <= prev_t)
      throw TraceParseError(line_no, "frame index not strictly increasing");
    prev_t = f.t;
    have_prev = true;
    trace.frames.push_back(f);
  }
  return trace;
}

GazeTrace parse_trace_string(const std::string& text,
                             const std::string& video_id) {
  std::istringstream in(text);
  return parse_trace(in, video_id);
}

GazeTrace load_trace_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open gaze trace: " + path);
  return parse_trace(f, path);
}

}  // namespace fsdt::gaze
