#include "fsdt/data/policies.hpp"

#include <algorithm>

namespace fsdt::data {

namespace {
constexpr double kMargin = 1e-3;  // keep raw values strictly inside (0,1)

double clamp_open(double v) {
  return std::clamp(v, kMargin, 1.0 - kMargin);
}
}  // namespace

std::vector<double> behavior_heuristic(const env::EnvObservation& obs,
                                       std::mt19937_64& rng, double noise) {
  const int n = static_cast<int>(obs.users.size());
  std::uniform_real_distribution<double> jitter(-noise, noise);
  std::vector<double> raw;
  raw.reserve(static_cast<std::size_t>(n) * env::kActionPerUser);
  for (const auto& u : obs.users) {
    const double share = 1.0 / n;
    const double high_frac =
        static_cast<double>(u.tiles.high) /
        std::max(1, u.tiles.total());
    raw.push_back(clamp_open(share + (noise > 0.0 ? jitter(rng) : 0.0)));
    raw.push_back(clamp_open(share + (noise > 0.0 ? jitter(rng) : 0.0)));
    raw.push_back(clamp_open(share + (noise > 0.0 ? jitter(rng) : 0.0)));
    // ratio raws, layout (high, med, low): push quality up when the user's
    // FoV holds many high tiles
    raw.push_back(clamp_open(0.5 + 0.4 * high_frac +
                             (noise > 0.0 ? jitter(rng) : 0.0)));
    raw.push_back(clamp_open(0.5 + 0.2 * high_frac +
                             (noise > 0.0 ? jitter(rng) : 0.0)));
    raw.push_back(clamp_open(0.5 + (noise > 0.0 ? jitter(rng) : 0.0)));
  }
  return raw;
}

std::vector<double> uniform_random_action(int n_users, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(kMargin, 1.0 - kMargin);
  std::vector<double> raw(static_cast<std::size_t>(n_users) *
                          env::kActionPerUser);
  for (auto& v : raw) v = u(rng);
  return raw;
}

}  // namespace fsdt::data
