#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gpn/ablation.hpp"
#include "gpn/data.hpp"
#include "gpn/trainer.hpp"

namespace gpn {

// Synthetic dataset generated by the synth command.
struct SynthSpec {
  std::string kind = "sbm";  // "sbm" or "cliques"
  std::size_t nodes_per_class = 100;
  std::size_t num_classes = 5;
  double p_in = 0.1;
  double p_out = 0.003;
  double center_scale = 3.0;
  std::size_t center_dims = 8;
  double noise_sigma = 1.0;
};

// Clique scenario run by theory-check.
struct TheorySpec {
  std::size_t n_per_class = 20;
  double lambda2 = 1e-2;
};

struct RunConfig {
  TrainConfig train;
  SplitSpec split;
  // Explicit OOD classes; when empty the last `left_out_count` classes are used.
  std::vector<int> ood_classes;
  std::size_t left_out_count = 0;
  AblationGrid grid;
  std::size_t threads = 0;
  SynthSpec synth;
  TheorySpec theory;

  void validate() const;
  // ood_classes, or the default choice for a dataset with this many classes.
  std::vector<int> resolved_ood_classes(std::size_t num_classes) const;
};

// Every field, with explicit values, in a stable key order.
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

// Missing keys keep their defaults; unknown keys and ill-typed values throw
// ContractViolation naming the key. "split.seed" defaults to "seed".
RunConfig config_from_json(const nlohmann::json& j);

// Applies "key=value" to a config object. Keys are dotted paths
// ("loss.lambda2"); the bare names lambda1, lambda2, reg_kind and teleport
// address their nested fields. Values are read as JSON when they parse and
// as strings otherwise.
void apply_override(nlohmann::json& j, std::string_view assignment);

// Reads a JSON config file; throws LoadError naming the file.
nlohmann::json read_config_file(const std::filesystem::path& path);

// base, then overrides in order, then `seed` (which sets both the training
// and split seeds).
RunConfig resolve_config(nlohmann::json base, const std::vector<std::string>& overrides,
                         std::optional<std::uint64_t> seed);

}  // namespace gpn
