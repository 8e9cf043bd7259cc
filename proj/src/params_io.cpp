#include "gpn/params_io.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include "gpn/errors.hpp"

namespace gpn {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr char kMagic[4] = {'G', 'P', 'N', '1'};
constexpr std::size_t kHeaderBytes = sizeof(kMagic);

void put_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
}

double get_le(const std::string& in, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + b])) << (8 * b);
  }
  return std::bit_cast<double>(bits);
}

double radial_gamma(const ModelParams& p) {
  double gamma = 1.0;
  bool first = true;
  for (const auto& f : p.flows) {
    for (const auto& layer : f.layers) {
      if (!first && layer.gamma != gamma) {
        throw ContractViolation("save_model: radial layers with different gamma are not supported");
      }
      gamma = layer.gamma;
      first = false;
    }
  }
  return gamma;
}

}  // namespace

void save_model(const fs::path& dir, ModelParams& params, const ordered_json& config) {
  params.validate();
  fs::create_directories(dir);

  std::string blob(kMagic, kHeaderBytes);
  ordered_json manifest = ordered_json::array();
  for (const auto& [name, tensor] : params.named()) {
    manifest.push_back({{"name", name},
                        {"shape", {tensor->rows(), tensor->cols()}},
                        {"offset", blob.size()}});
    for (double v : tensor->values()) put_le(blob, v);
  }

  const EncoderParams& enc = params.encoder;
  ordered_json meta;
  meta["format"] = "GPN1";
  meta["architecture"] = {{"input_dim", enc.input_dim()},
                          {"hidden_dim", enc.linear ? 0 : enc.w1.rows()},
                          {"latent_dim", enc.latent_dim()},
                          {"flow_layers", params.flows.front().layers.size()},
                          {"linear_encoder", enc.linear},
                          {"activation", to_string(enc.activation)},
                          {"radial_gamma", radial_gamma(params)}};
  std::vector<double> counts;
  for (const auto& f : params.flows) counts.push_back(f.class_count);
  meta["class_counts"] = counts;
  meta["diffusion"] = {{"teleport", params.diffusion.teleport}, {"layers", params.diffusion.layers}};
  meta["tensors"] = manifest;
  meta["config"] = config;

  std::ofstream bin(dir / "params.bin", std::ios::binary);
  bin.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!bin) throw LoadError((dir / "params.bin").string() + ": write failed");
  std::ofstream(dir / "params.json") << meta.dump(2) << "\n";
}

SavedModel load_model(const fs::path& dir) {
  const fs::path json_path = dir / "params.json";
  const fs::path bin_path = dir / "params.bin";
  const std::string json_name = json_path.string();

  std::ifstream json_in(json_path);
  if (!json_in) throw LoadError(json_name + ": cannot open file");
  json meta;
  try {
    meta = json::parse(json_in);
  } catch (const json::parse_error& e) {
    throw LoadError(json_name + ": invalid JSON: " + e.what());
  }

  std::ifstream bin_in(bin_path, std::ios::binary);
  if (!bin_in) throw LoadError(bin_path.string() + ": cannot open file");
  const std::string blob((std::istreambuf_iterator<char>(bin_in)), std::istreambuf_iterator<char>());
  if (blob.size() < kHeaderBytes || blob.compare(0, kHeaderBytes, kMagic, kHeaderBytes) != 0) {
    throw LoadError(bin_path.string() + ": missing GPN1 magic");
  }

  SavedModel out;
  std::size_t expected_bytes = kHeaderBytes;
  try {
    const json& arch = meta.at("architecture");
    ModelShape shape;
    shape.input_dim = arch.at("input_dim").get<std::size_t>();
    shape.hidden_dim = arch.at("hidden_dim").get<std::size_t>();
    shape.latent_dim = arch.at("latent_dim").get<std::size_t>();
    shape.flow_layers = arch.at("flow_layers").get<std::size_t>();
    shape.linear_encoder = arch.at("linear_encoder").get<bool>();
    shape.activation = parse_activation(arch.at("activation").get<std::string>());
    const double gamma = arch.at("radial_gamma").get<double>();
    const auto counts = meta.at("class_counts").get<std::vector<double>>();
    DiffusionConfig diffusion;
    diffusion.teleport = meta.at("diffusion").at("teleport").get<double>();
    diffusion.layers = meta.at("diffusion").at("layers").get<std::size_t>();

    out.params = ModelParams::init(shape, counts, diffusion, 0);
    for (auto& f : out.params.flows) {
      for (auto& layer : f.layers) layer.gamma = gamma;
    }

    std::map<std::string, const json*> entries;
    for (const json& e : meta.at("tensors")) entries[e.at("name").get<std::string>()] = &e;
    const auto named = out.params.named();
    if (entries.size() != named.size()) {
      throw LoadError(json_name + ": manifest lists " + std::to_string(entries.size()) +
                      " tensors, architecture needs " + std::to_string(named.size()));
    }
    for (const auto& [name, tensor] : named) {
      auto it = entries.find(name);
      if (it == entries.end()) throw LoadError(json_name + ": manifest has no tensor '" + name + "'");
      const json& e = *it->second;
      const auto shape_vec = e.at("shape").get<std::vector<std::size_t>>();
      if (shape_vec.size() != 2 || shape_vec[0] != tensor->rows() || shape_vec[1] != tensor->cols()) {
        throw LoadError(json_name + ": tensor '" + name + "' has shape " + e.at("shape").dump() +
                        ", expected " + tensor->shape().str());
      }
      const auto offset = e.at("offset").get<std::size_t>();
      const std::size_t bytes = 8 * tensor->size();
      if (offset < kHeaderBytes || offset + bytes > blob.size()) {
        throw LoadError(bin_path.string() + ": tensor '" + name + "' lies outside the file");
      }
      for (std::size_t i = 0; i < tensor->size(); ++i) (*tensor)[i] = get_le(blob, offset + 8 * i);
      expected_bytes += bytes;
    }
    out.config = meta.value("config", json::object());
  } catch (const json::exception& e) {
    throw LoadError(json_name + ": " + e.what());
  } catch (const ContractViolation& e) {
    throw LoadError(json_name + ": " + e.what());
  }
  if (blob.size() != expected_bytes) {
    throw LoadError(bin_path.string() + ": size " + std::to_string(blob.size()) + " bytes, expected " +
                    std::to_string(expected_bytes));
  }
  out.params.validate();
  return out;
}

}  // namespace gpn
