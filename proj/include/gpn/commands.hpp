#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "gpn/config.hpp"

namespace gpn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitTheoryFailed = 2;

struct CommandOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::filesystem::path> data;
  // Directory holding params.bin/params.json for eval and export-latent;
  // defaults to `out`.
  std::optional<std::filesystem::path> params;
  std::filesystem::path out = ".";
  std::optional<std::string> task;  // "ood" or "misc"
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;  // key=value
};

// Runs one of train, eval, synth, ablate, export-latent, theory-check and
// returns the process exit code. Progress goes to `log`, failures to `err`.
int run_command(std::string_view command, const CommandOptions& opts, std::ostream& log,
                std::ostream& err);

// Left-out classes from the config, then the configured split.
Dataset prepare_dataset(Dataset raw, const RunConfig& cfg);

// "ood" needs OOD nodes; "misc" scores misclassification on the test nodes.
EvalReport evaluate_task(const Dataset& ds, const Prediction& pred, std::string_view task);

}  // namespace gpn
