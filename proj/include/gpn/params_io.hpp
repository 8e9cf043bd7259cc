#pragma once

#include <filesystem>

#include <json.hpp>

#include "gpn/model.hpp"

namespace gpn {

// params.bin: the ASCII magic "GPN1" followed by every tensor of
// ModelParams::named() as little-endian IEEE-754 doubles, row-major, with no
// padding. params.json lists each tensor's name, shape and byte offset, the
// architecture, per-class training counts, the diffusion settings and the
// resolved run config under "config".
void save_model(const std::filesystem::path& dir, ModelParams& params,
                const nlohmann::ordered_json& config);

struct SavedModel {
  ModelParams params;
  nlohmann::json config;
};

// Throws LoadError naming the file on a bad magic, a size mismatch or a
// manifest that does not describe the architecture.
SavedModel load_model(const std::filesystem::path& dir);

}  // namespace gpn
