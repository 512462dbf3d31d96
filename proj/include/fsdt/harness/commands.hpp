#pragma once
// Subcommand implementations behind the CLI: data collection, training,
// evaluation, report generation and parameter accounting.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fsdt/harness/run_config.hpp"

namespace fsdt::harness {

// Accounting/consistency guard tripped (CLI exit code 3): parameter table
// divergence, dataset/environment provenance mismatch, missing artifacts of
// an earlier stage.
struct GuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Closed-form parameter counts of the split model.
struct SplitCounts {
  std::uint64_t embed = 0;
  std::uint64_t decoder = 0;
  std::uint64_t predict = 0;
  std::uint64_t total() const { return embed + decoder + predict; }
};
SplitCounts split_param_counts(const dt::DtConfig& cfg);

inline constexpr std::uint64_t kTableEmbedParams = 42496;
inline constexpr std::uint64_t kTableDecoderParams = 4738560;
inline constexpr std::uint64_t kTablePredictParams = 15677;

void cmd_collect(const RunConfig& cfg, std::uint64_t seed,
                 const std::string& out);
void cmd_train(const RunConfig& cfg, const std::string& algo,
               const std::vector<std::uint64_t>& seeds, const std::string& out);
void cmd_eval(const RunConfig& cfg, const std::string& algo,
              const std::vector<std::uint64_t>& seeds, const std::string& out);
void cmd_report(const RunConfig& cfg, const std::string& out);
// Prints the split table; throws GuardError when a default-config model
// diverges from the reference counts.
void cmd_params(const RunConfig& cfg, std::ostream& os);

}  // namespace fsdt::harness
