#include "gpn/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "gpn/errors.hpp"

namespace gpn {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads known keys from one JSON object and rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j_.is_object()) throw ContractViolation("config '" + label() + "' must be an object");
  }

  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void real(const std::string& key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(key, "a number");
      out = v->get<double>();
    }
  }

  void count(const std::string& key, std::size_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer() || v->get<long long>() < 0) fail(key, "a non-negative integer");
      out = v->get<std::size_t>();
    }
  }

  void seed(const std::string& key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) fail(key, "a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }

  void flag(const std::string& key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) fail(key, "true or false");
      out = v->get<bool>();
    }
  }

  void text(const std::string& key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(key, "a string");
      out = v->get<std::string>();
    }
  }

  void reals(const std::string& key, std::vector<double>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(key, "an array of numbers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number()) fail(key, "an array of numbers");
        out.push_back(e.get<double>());
      }
    }
  }

  void ints(const std::string& key, std::vector<int>& out) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(key, "an array of integers");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_number_integer()) fail(key, "an array of integers");
        out.push_back(e.get<int>());
      }
    }
  }

  template <class T, class Parse>
  void names(const std::string& key, std::vector<T>& out, Parse parse) {
    if (const json* v = take(key)) {
      if (!v->is_array()) fail(key, "an array of strings");
      out.clear();
      for (const auto& e : *v) {
        if (!e.is_string()) fail(key, "an array of strings");
        out.push_back(parse(e.get<std::string>()));
      }
    }
  }

  std::optional<ObjectReader> child(const std::string& key) {
    if (const json* v = take(key)) return ObjectReader(*v, prefix_ + key + ".");
    return std::nullopt;
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ContractViolation("unknown config key '" + prefix_ + item.key() + "'");
      }
    }
  }

 private:
  std::string label() const { return prefix_.empty() ? "<root>" : prefix_.substr(0, prefix_.size() - 1); }

  [[noreturn]] void fail(const std::string& key, const std::string& expected) const {
    throw ContractViolation("config key '" + prefix_ + key + "' must be " + expected);
  }

  const json& j_;
  std::string prefix_;
  std::set<std::string> seen_;
};

const std::map<std::string, std::string>& shorthands() {
  static const std::map<std::string, std::string> table = {
      {"lambda1", "loss.lambda1"},
      {"lambda2", "loss.lambda2"},
      {"reg_kind", "loss.reg_kind"},
      {"teleport", "diffusion.teleport"},
  };
  return table;
}

}  // namespace

void RunConfig::validate() const {
  train.validate();
  split.validate();
  for (double v : grid.lambda1) {
    if (!(v >= 0.0)) throw ContractViolation("grid.lambda1 entries must be >= 0");
  }
  for (double v : grid.lambda2) {
    if (!(v >= 0.0)) throw ContractViolation("grid.lambda2 entries must be >= 0");
  }
  if (synth.kind != "sbm" && synth.kind != "cliques") {
    throw ContractViolation("synth.kind must be \"sbm\" or \"cliques\", got \"" + synth.kind + "\"");
  }
  if (!(theory.lambda2 > 0.0)) throw ContractViolation("theory.lambda2 must be > 0");
  if (theory.n_per_class < 2) throw ContractViolation("theory.n_per_class must be >= 2");
}

std::vector<int> RunConfig::resolved_ood_classes(std::size_t num_classes) const {
  if (!ood_classes.empty() || left_out_count == 0) return ood_classes;
  return default_ood_classes(num_classes, left_out_count);
}

ordered_json config_to_json(const RunConfig& cfg) {
  const TrainConfig& t = cfg.train;
  ordered_json j;
  j["seed"] = t.seed;
  j["lr"] = t.lr;
  j["max_epochs"] = t.max_epochs;
  j["patience"] = t.patience;
  j["adam_beta1"] = t.adam_beta1;
  j["adam_beta2"] = t.adam_beta2;
  j["adam_eps"] = t.adam_eps;
  j["weight_decay"] = t.weight_decay;
  j["loss"] = {{"lambda1", t.loss.lambda1},
               {"lambda2", t.loss.lambda2},
               {"reg_kind", to_string(t.loss.reg_kind)}};
  j["activation"] = to_string(t.activation);
  j["hidden_dim"] = t.hidden_dim;
  j["latent_dim"] = t.latent_dim;
  j["flow_layers"] = t.flow_layers;
  j["linear_encoder"] = t.linear_encoder;
  j["diffusion"] = {{"teleport", t.diffusion.teleport}, {"layers", t.diffusion.layers}};
  j["split"] = {{"train_frac", cfg.split.train_frac},
                {"val_frac", cfg.split.val_frac},
                {"test_frac", cfg.split.test_frac},
                {"seed", cfg.split.seed}};
  j["ood_classes"] = cfg.ood_classes;
  j["left_out_count"] = cfg.left_out_count;

  ordered_json grid;
  grid["lambda1"] = cfg.grid.lambda1;
  grid["lambda2"] = cfg.grid.lambda2;
  grid["activations"] = ordered_json::array();
  for (Activation a : cfg.grid.activations) grid["activations"].push_back(to_string(a));
  grid["reg_kinds"] = ordered_json::array();
  for (RegKind k : cfg.grid.reg_kinds) grid["reg_kinds"].push_back(to_string(k));
  j["grid"] = grid;
  j["threads"] = cfg.threads;

  const SynthSpec& s = cfg.synth;
  j["synth"] = {{"kind", s.kind},
                {"nodes_per_class", s.nodes_per_class},
                {"num_classes", s.num_classes},
                {"p_in", s.p_in},
                {"p_out", s.p_out},
                {"center_scale", s.center_scale},
                {"center_dims", s.center_dims},
                {"noise_sigma", s.noise_sigma}};
  j["theory"] = {{"n_per_class", cfg.theory.n_per_class}, {"lambda2", cfg.theory.lambda2}};
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  TrainConfig& t = cfg.train;
  ObjectReader root(j, "");
  root.seed("seed", t.seed);
  root.real("lr", t.lr);
  root.count("max_epochs", t.max_epochs);
  root.count("patience", t.patience);
  root.real("adam_beta1", t.adam_beta1);
  root.real("adam_beta2", t.adam_beta2);
  root.real("adam_eps", t.adam_eps);
  root.real("weight_decay", t.weight_decay);
  if (auto loss = root.child("loss")) {
    loss->real("lambda1", t.loss.lambda1);
    loss->real("lambda2", t.loss.lambda2);
    std::string kind = to_string(t.loss.reg_kind);
    loss->text("reg_kind", kind);
    t.loss.reg_kind = parse_reg_kind(kind);
    loss->finish();
  }
  std::string activation = to_string(t.activation);
  root.text("activation", activation);
  t.activation = parse_activation(activation);
  root.count("hidden_dim", t.hidden_dim);
  root.count("latent_dim", t.latent_dim);
  root.count("flow_layers", t.flow_layers);
  root.flag("linear_encoder", t.linear_encoder);
  if (auto diffusion = root.child("diffusion")) {
    diffusion->real("teleport", t.diffusion.teleport);
    diffusion->count("layers", t.diffusion.layers);
    diffusion->finish();
  }

  cfg.split.seed = t.seed;
  if (auto split = root.child("split")) {
    split->real("train_frac", cfg.split.train_frac);
    split->real("val_frac", cfg.split.val_frac);
    split->real("test_frac", cfg.split.test_frac);
    split->seed("seed", cfg.split.seed);
    split->finish();
  }
  root.ints("ood_classes", cfg.ood_classes);
  root.count("left_out_count", cfg.left_out_count);

  if (auto grid = root.child("grid")) {
    grid->reals("lambda1", cfg.grid.lambda1);
    grid->reals("lambda2", cfg.grid.lambda2);
    grid->names("activations", cfg.grid.activations,
                [](const std::string& s) { return parse_activation(s); });
    grid->names("reg_kinds", cfg.grid.reg_kinds,
                [](const std::string& s) { return parse_reg_kind(s); });
    grid->finish();
  }
  root.count("threads", cfg.threads);

  if (auto synth = root.child("synth")) {
    SynthSpec& s = cfg.synth;
    synth->text("kind", s.kind);
    synth->count("nodes_per_class", s.nodes_per_class);
    synth->count("num_classes", s.num_classes);
    synth->real("p_in", s.p_in);
    synth->real("p_out", s.p_out);
    synth->real("center_scale", s.center_scale);
    synth->count("center_dims", s.center_dims);
    synth->real("noise_sigma", s.noise_sigma);
    synth->finish();
  }
  if (auto theory = root.child("theory")) {
    theory->count("n_per_class", cfg.theory.n_per_class);
    theory->real("lambda2", cfg.theory.lambda2);
    theory->finish();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

void apply_override(json& j, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ContractViolation("override '" + std::string(assignment) + "' is not of the form key=value");
  }
  std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  if (auto it = shorthands().find(key); it != shorthands().end()) key = it->second;

  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  if (!j.is_object()) j = json::object();
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ContractViolation("override key '" + key + "' has an empty component");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    json& next = (*node)[part];
    if (next.is_null()) next = json::object();
    if (!next.is_object()) {
      throw ContractViolation("override key '" + key + "': '" + part + "' is not an object");
    }
    node = &next;
    start = dot + 1;
  }
}

json read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LoadError(path.string() + ": cannot open config file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw LoadError(path.string() + ": invalid JSON: " + e.what());
  }
}

RunConfig resolve_config(json base, const std::vector<std::string>& overrides,
                         std::optional<std::uint64_t> seed) {
  if (base.is_null()) base = json::object();
  for (const auto& o : overrides) apply_override(base, o);
  if (seed) {
    base["seed"] = *seed;
    if (!base.contains("split") || !base["split"].is_object()) base["split"] = json::object();
    base["split"]["seed"] = *seed;
  }
  return config_from_json(base);
}

}  // namespace gpn
