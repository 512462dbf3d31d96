#pragma once
// Gaze traces and the Chebyshev tile-quality mapping on the 4x4 grid.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsdt::gaze {

struct GazeFrame {
  long t = 0;       // frame index, strictly increasing
  double x = 0.5;   // normalized [0,1]
  double y = 0.5;
};

struct GazeTrace {
  std::string video_id;
  std::vector<GazeFrame> frames;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
};

enum class Quality : std::uint8_t { Low = 0, Med = 1, High = 2 };

inline constexpr int kGridSide = 4;
inline constexpr int kTileCount = kGridSide * kGridSide;

struct TileQualityMap {
  std::array<Quality, kTileCount> grid{};  // index j * kGridSide + i
  int count_high = 0;
  int count_med = 0;
  int count_low = 0;
};

// Tile (i,j) has its center at ((i+0.5)/4, (j+0.5)/4). Distances are
// continuous Chebyshev distances to the tile center, measured in tile widths.
// d <= radius_high -> High, d <= radius_med -> Med, else Low.
TileQualityMap tile_quality_map(double gaze_x, double gaze_y,
                                double radius_high, double radius_med);

// Bounded random walk on [0,1]^2 with reflection at the borders. Each step is
// uniform in [-smoothness, smoothness] per axis.
GazeTrace synth_trace(int video_len, std::mt19937_64& rng, double smoothness);

// First ceil(ratio * n) frames go to train, the rest to test.
std::pair<GazeTrace, GazeTrace> temporal_split(const GazeTrace& trace,
                                               double ratio = 0.8);

struct TraceParseError : std::runtime_error {
  int line;
  TraceParseError(int l, const std::string& what)
      : std::runtime_error("line " + std::to_string(l) + ": " + what), line(l) {}
};

// Header-less CSV rows: frame_index,x,y
GazeTrace parse_trace(std::istream& in, const std::string& video_id = "");
GazeTrace parse_trace_string(const std::string& text,
                             const std::string& video_id = "");
GazeTrace load_trace_file(const std::string& path);

}  // namespace fsdt::gaze
