#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpn/commands.hpp"
#include "gpn/config.hpp"
#include "gpn/errors.hpp"
#include "gpn/params_io.hpp"
#include "support/fixtures.hpp"
#include "support/temp_dir.hpp"

using namespace gpn;
namespace fs = std::filesystem;
using nlohmann::json;
using fixture::read_file;
using fixture::TempDir;

namespace {

struct Outcome {
  int code = 0;
  std::string log;
  std::string err;
};

Outcome run(std::string_view command, const CommandOptions& opts) {
  std::ostringstream log;
  std::ostringstream err;
  const int code = run_command(command, opts, log, err);
  return {code, log.str(), err.str()};
}

// Small architecture so that each training run takes well under a second.
const char* kSmallConfig = R"({
  "hidden_dim": 8, "latent_dim": 2, "flow_layers": 2, "max_epochs": 40, "patience": 10,
  "left_out_count": 1,
  "synth": {"nodes_per_class": 30, "num_classes": 3, "center_dims": 4, "p_in": 0.2, "p_out": 0.01}
})";

struct Workspace {
  TempDir dir;
  fs::path config;
  fs::path data;

  explicit Workspace(const std::string& tag) : dir(tag) {
    config = dir.path / "config.json";
    data = dir.path / "data";
    fixture::write_file(config, kSmallConfig);
    CommandOptions synth;
    synth.config = config;
    synth.out = data;
    synth.seed = 7;
    REQUIRE(run("synth", synth).code == kExitOk);
  }

  CommandOptions options(const std::string& out) const {
    CommandOptions o;
    o.config = config;
    o.data = data;
    o.out = dir.path / out;
    return o;
  }
};

std::vector<std::vector<std::string>> read_csv(const fs::path& file) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(read_file(file));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    rows.push_back(fields);
  }
  return rows;
}

}  // namespace

TEST_CASE("config json round trip and defaults") {
  const RunConfig defaults = config_from_json(json::object());
  CHECK(defaults.train.lr == 0.01);
  CHECK(defaults.train.max_epochs == 2000);
  CHECK(defaults.train.patience == 50);
  CHECK(defaults.train.hidden_dim == 64);
  CHECK(defaults.train.latent_dim == 16);
  CHECK(defaults.train.flow_layers == 8);
  CHECK(defaults.train.diffusion.teleport == 0.1);
  CHECK(defaults.train.diffusion.layers == 10);
  CHECK(defaults.split.train_frac == 0.05);

  RunConfig cfg;
  cfg.train.seed = 9;
  cfg.train.loss = {0.01, 1e-4, RegKind::kAlpha};
  cfg.train.activation = Activation::kHardTanh;
  cfg.split.seed = 4;
  cfg.ood_classes = {2, 5};
  cfg.grid.activations = {Activation::kGelu, Activation::kLogSigmoid};
  cfg.synth.kind = "cliques";
  const auto j = config_to_json(cfg);
  const RunConfig back = config_from_json(json::parse(j.dump()));
  CHECK(config_to_json(back).dump() == j.dump());
  CHECK(back.train.loss.reg_kind == RegKind::kAlpha);
  CHECK(back.ood_classes == std::vector<int>{2, 5});
}

TEST_CASE("config rejects unknown keys and bad values") {
  CHECK_THROWS_WITH_AS(config_from_json(json::parse(R"({"lamda2": 1})")),
                       doctest::Contains("lamda2"), ContractViolation);
  CHECK_THROWS_WITH_AS(config_from_json(json::parse(R"({"loss": {"weight": 1}})")),
                       doctest::Contains("loss.weight"), ContractViolation);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"lr": "fast"})")), ContractViolation);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"patience": -3})")), ContractViolation);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"activation": "tanh"})")), ContractViolation);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"lr": 0})")), ContractViolation);
  CHECK_THROWS_AS(config_from_json(json::parse(R"([1, 2])")), ContractViolation);
}

TEST_CASE("overrides and seeds") {
  json j = json::object();
  apply_override(j, "lambda2=1e-4");
  apply_override(j, "loss.reg_kind=r_d");
  apply_override(j, "teleport=1");
  apply_override(j, "activation=gelu");
  apply_override(j, "grid.lambda1=[0, 0.001]");
  const RunConfig cfg = config_from_json(j);
  CHECK(cfg.train.loss.lambda2 == 1e-4);
  CHECK(cfg.train.loss.reg_kind == RegKind::kDistance);
  CHECK(cfg.train.diffusion.teleport == 1.0);
  CHECK(cfg.train.activation == Activation::kGelu);
  CHECK(cfg.grid.lambda1 == std::vector<double>{0.0, 0.001});
  CHECK_THROWS_AS(apply_override(j, "no_equals"), ContractViolation);
  apply_override(j, "lr=0.1");
  CHECK_THROWS_AS(apply_override(j, "lr.deep=1"), ContractViolation);
  apply_override(j, "lr_typo.deep=1");
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("lr_typo"), ContractViolation);

  CHECK(config_from_json(json::parse(R"({"seed": 12})")).split.seed == 12);
  CHECK(config_from_json(json::parse(R"({"seed": 12, "split": {"seed": 3}})")).split.seed == 3);
  const RunConfig seeded = resolve_config(json::parse(R"({"seed": 1, "split": {"seed": 3}})"), {}, 5);
  CHECK(seeded.train.seed == 5);
  CHECK(seeded.split.seed == 5);
}

TEST_CASE("default OOD classes are the last ones") {
  RunConfig cfg;
  cfg.left_out_count = 3;
  CHECK(cfg.resolved_ood_classes(7) == std::vector<int>{4, 5, 6});
  cfg.ood_classes = {0};
  CHECK(cfg.resolved_ood_classes(7) == std::vector<int>{0});
}

TEST_CASE("parameter file layout and round trip") {
  TempDir dir("params");
  const Dataset ds = fixture::six_node();
  ModelParams p = fixture::small_model(ds, Activation::kGelu, 3);
  p.diffusion.teleport = 0.25;
  save_model(dir.path, p, config_to_json(RunConfig{}));

  const std::string blob = read_file(dir.path / "params.bin");
  CHECK(blob.substr(0, 4) == "GPN1");
  std::size_t total = 0;
  for (const auto& nt : p.named()) total += nt.tensor->size();
  CHECK(blob.size() == 4 + 8 * total);

  // First value, decoded by hand as little-endian.
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= std::uint64_t(static_cast<unsigned char>(blob[4 + b])) << (8 * b);
  double first = 0.0;
  std::memcpy(&first, &bits, sizeof first);
  CHECK(first == p.encoder.w1[0]);

  const json meta = json::parse(read_file(dir.path / "params.json"));
  CHECK(meta["tensors"][0]["name"] == "encoder.w1");
  CHECK(meta["tensors"][0]["offset"] == 4);
  CHECK(meta["tensors"][1]["offset"] == 4 + 8 * p.encoder.w1.size());

  SavedModel loaded = load_model(dir.path);
  auto a = p.named();
  auto b = loaded.params.named();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(a[i].tensor->values() == b[i].tensor->values());
  }
  CHECK(loaded.params.diffusion.teleport == 0.25);
  CHECK(loaded.params.encoder.activation == Activation::kGelu);
  CHECK(loaded.params.flows[1].class_count == p.flows[1].class_count);

  fixture::write_file(dir.path / "params.bin", blob.substr(0, blob.size() - 8));
  CHECK_THROWS_WITH_AS(load_model(dir.path), doctest::Contains("params.bin"), LoadError);
  fixture::write_file(dir.path / "params.bin", "XXXX" + blob.substr(4));
  CHECK_THROWS_WITH_AS(load_model(dir.path), doctest::Contains("magic"), LoadError);
}

TEST_CASE("train writes artifacts and is reproducible") {
  Workspace ws("train");
  CommandOptions opts = ws.options("run");
  opts.overrides = {"lambda2=1e-4", "reg_kind=r_d"};
  const Outcome first = run("train", opts);
  REQUIRE_MESSAGE(first.code == kExitOk, first.err);
  for (const char* f : {"params.bin", "params.json", "history.csv", "config.resolved.json"}) {
    CHECK(fs::exists(opts.out / f));
  }
  const json resolved = json::parse(read_file(opts.out / "config.resolved.json"));
  CHECK(resolved["loss"]["lambda2"] == 1e-4);
  CHECK(resolved["loss"]["reg_kind"] == "r_d");
  CHECK(read_file(opts.out / "history.csv").rfind("epoch,train_loss,val_ce\n", 0) == 0);

  // Re-running overwrites with identical bytes.
  const std::string params = read_file(opts.out / "params.bin");
  const std::string history = read_file(opts.out / "history.csv");
  REQUIRE(run("train", opts).code == kExitOk);
  CHECK(read_file(opts.out / "params.bin") == params);
  CHECK(read_file(opts.out / "history.csv") == history);

  // The resolved config alone determines the run.
  CommandOptions again;
  again.config = opts.out / "config.resolved.json";
  again.data = ws.data;
  again.out = ws.dir.path / "again";
  REQUIRE(run("train", again).code == kExitOk);
  CHECK(read_file(again.out / "params.bin") == params);
}

TEST_CASE("train reports input errors with exit code 1") {
  Workspace ws("train_err");
  fs::remove(ws.data / "features.csv");
  const Outcome missing = run("train", ws.options("run"));
  CHECK(missing.code == kExitError);
  CHECK(missing.err.find("features.csv") != std::string::npos);

  Workspace ws2("train_key");
  CommandOptions opts = ws2.options("run");
  opts.overrides = {"lamda2=1"};
  const Outcome bad = run("train", opts);
  CHECK(bad.code == kExitError);
  CHECK(bad.err.find("lamda2") != std::string::npos);

  CHECK(run("fly", opts).code == kExitError);
}

TEST_CASE("eval reports, teleport identity and determinism") {
  Workspace ws("eval");
  CommandOptions train_opts = ws.options("run");
  REQUIRE(run("train", train_opts).code == kExitOk);

  CommandOptions eval_opts = ws.options("eval");
  eval_opts.config.reset();
  eval_opts.params = train_opts.out;
  REQUIRE(run("eval", eval_opts).code == kExitOk);
  const std::string report = read_file(eval_opts.out / "report.json");
  const json r = json::parse(report);
  CHECK(r["task"] == "ood");
  for (const char* ch : {"alea_w", "epi_w", "epi_wo"}) {
    CHECK(r[ch].contains("auroc"));
    CHECK(r[ch].contains("aupr"));
  }
  REQUIRE(run("eval", eval_opts).code == kExitOk);
  CHECK(read_file(eval_opts.out / "report.json") == report);

  eval_opts.overrides = {"teleport=1.0"};
  REQUIRE(run("eval", eval_opts).code == kExitOk);
  const json flat = json::parse(read_file(eval_opts.out / "report.json"));
  CHECK(flat["epi_w"] == flat["epi_wo"]);

  eval_opts.overrides.clear();
  eval_opts.task = "misc";
  REQUIRE(run("eval", eval_opts).code == kExitOk);
  const json misc = json::parse(read_file(eval_opts.out / "report.json"));
  CHECK(misc["task"] == "misc");
  CHECK_FALSE(misc.contains("epi_wo"));
}

TEST_CASE("eval rejects mismatched data") {
  Workspace ws("eval_dim");
  REQUIRE(run("train", ws.options("run")).code == kExitOk);

  CommandOptions other;
  other.out = ws.dir.path / "wide";
  other.overrides = {"synth.center_dims=6", "synth.num_classes=3"};
  REQUIRE(run("synth", other).code == kExitOk);

  CommandOptions eval_opts;
  eval_opts.data = other.out;
  eval_opts.params = ws.dir.path / "run";
  eval_opts.out = ws.dir.path / "eval";
  const Outcome o = run("eval", eval_opts);
  CHECK(o.code == kExitError);
  CHECK(o.err.find("dimension mismatch") != std::string::npos);

  CommandOptions no_ood = ws.options("eval2");
  no_ood.params = ws.dir.path / "run";
  no_ood.overrides = {"left_out_count=0"};
  no_ood.task = "ood";
  CHECK(run("eval", no_ood).code == kExitError);
}

TEST_CASE("misclassification report marks undefined metrics") {
  TempDir dir("misc");
  CommandOptions synth;
  synth.out = dir.path / "data";
  synth.overrides = {"synth.nodes_per_class=30", "synth.num_classes=3", "synth.center_dims=3",
                     "synth.p_out=0", "synth.p_in=0.3", "synth.center_scale=8", "synth.noise_sigma=0.3"};
  REQUIRE(run("synth", synth).code == kExitOk);

  CommandOptions opts;
  opts.data = synth.out;
  opts.out = dir.path / "run";
  opts.overrides = {"hidden_dim=8", "latent_dim=2", "flow_layers=2", "max_epochs=200"};
  REQUIRE(run("train", opts).code == kExitOk);
  opts.task = "misc";
  REQUIRE(run("eval", opts).code == kExitOk);
  const json r = json::parse(read_file(opts.out / "report.json"));
  REQUIRE(r["id_acc"] == 1.0);
  CHECK(r["epi_w"]["aupr"].is_null());
  CHECK(r["epi_w"].contains("error"));
  CHECK(r["alea_w"].contains("error"));
}

TEST_CASE("export-latent columns") {
  Workspace ws("latent");
  CommandOptions opts = ws.options("run");
  REQUIRE(run("train", opts).code == kExitOk);
  opts.config.reset();
  REQUIRE(run("export-latent", opts).code == kExitOk);

  const auto rows = read_csv(opts.out / "latent.csv");
  REQUIRE(rows.size() == 91);
  CHECK(rows[0] == std::vector<std::string>{"node_id", "z1", "z2", "label", "ood", "alpha0"});

  SavedModel model = load_model(opts.out);
  RunConfig cfg = config_from_json(model.config);
  const Dataset ds = prepare_dataset(load_dataset(ws.data), cfg);
  const Prediction pred = predict(ds, model.params);
  for (std::size_t i = 0; i < ds.num_nodes(); ++i) {
    const auto& row = rows[i + 1];
    REQUIRE(row.size() == 6);
    CHECK(std::stoul(row[0]) == i);
    CHECK(std::stod(row[1]) == pred.z(i, 0));
    CHECK(std::stoi(row[3]) == ds.original_labels[i]);
    CHECK((row[4] == "1") == ds.ood_mask[i]);
    double sum = 0.0;
    for (std::size_t k = 0; k < pred.alpha.cols(); ++k) sum += pred.alpha(i, k);
    CHECK(std::abs(std::stod(row[5]) - sum) <= 1e-12 * sum);
  }
}

TEST_CASE("synth writes loadable datasets") {
  TempDir dir("synth");
  CommandOptions opts;
  opts.out = dir.path / "clique";
  opts.overrides = {"synth.kind=cliques", "synth.nodes_per_class=5"};
  REQUIRE(run("synth", opts).code == kExitOk);
  const Dataset ds = load_dataset(opts.out);
  CHECK(ds.num_nodes() == 15);
  CHECK(ds.graph.num_edges() == 30);
  CHECK(ds.num_features() == 3);

  opts.overrides = {"synth.kind=ring"};
  CHECK(run("synth", opts).code == kExitError);
}

TEST_CASE("ablate writes one row per grid point") {
  Workspace ws("ablate");
  CommandOptions opts = ws.options("abl");
  opts.overrides = {"grid.lambda1=[0, 0.001]", "grid.lambda2=[0.001]", "max_epochs=20", "threads=2"};
  const Outcome o = run("ablate", opts);
  REQUIRE_MESSAGE(o.code == kExitOk, o.err);
  const auto rows = read_csv(opts.out / "ablation.csv");
  // GPN + 2 CE + 2 CE-ACT + 2 CE-GD.
  CHECK(rows.size() == 1 + 7);
  const json j = json::parse(read_file(opts.out / "ablation.json"));
  CHECK(j["rows"].size() == 7);
  for (const char* label : {"GPN", "GPN-CE", "GPN-CE-ACT", "GPN-CE-GD"}) {
    CHECK(j["selected"].contains(label));
  }
}

TEST_CASE("theory-check outputs and failure exit code") {
  TempDir dir("theory");
  CommandOptions opts;
  opts.out = dir.path / "ok";
  opts.seed = 0;
  const Outcome ok = run("theory-check", opts);
  REQUIRE_MESSAGE(ok.code == kExitOk, ok.err);
  const json summary = json::parse(read_file(opts.out / "theory_check.json"));
  CHECK(summary["passed"] == true);
  CHECK(summary["regularized_ood_row_norm"].get<double>() < summary["unregularized_ood_row_norm"].get<double>());
  for (const char* run_dir : {"unregularized", "regularized"}) {
    const auto latent = read_csv(opts.out / run_dir / "latent.csv");
    CHECK(latent.size() == 1 + 60);
    CHECK(latent[0] == std::vector<std::string>{"node_id", "z1", "z2", "group"});
    CHECK(read_csv(opts.out / run_dir / "weights.csv").size() == 4);
    const json s = json::parse(read_file(opts.out / run_dir / "summary.json"));
    CHECK(s["id_latents_match"] == true);
    CHECK(s["row_norms"].size() == 3);
  }

  // A single epoch keeps both runs at their shared initial weights.
  opts.out = dir.path / "frozen";
  opts.overrides = {"max_epochs=1"};
  const Outcome frozen = run("theory-check", opts);
  CHECK(frozen.code == kExitTheoryFailed);
  CHECK(frozen.err.find("unregularized ood-row norm") != std::string::npos);
  CHECK(frozen.err.find("regularized ood-row norm") != std::string::npos);
}
