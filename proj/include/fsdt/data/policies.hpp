#pragma once
// Scripted behavior policies used to generate the offline corpus.

#include <random>
#include <vector>

#include "fsdt/env/types.hpp"

namespace fsdt::data {

// Equal resource shares per user perturbed by bounded noise; resolution
// ratios biased toward high quality for users with many high-quality tiles.
// Outputs are raw action values, always strictly inside (0,1).
std::vector<double> behavior_heuristic(const env::EnvObservation& obs,
                                       std::mt19937_64& rng, double noise);

std::vector<double> uniform_random_action(int n_users, std::mt19937_64& rng);

}  // namespace fsdt::data
