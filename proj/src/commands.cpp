#include "gpn/commands.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gpn/errors.hpp"
#include "gpn/format.hpp"
#include "gpn/params_io.hpp"
#include "gpn/scenario.hpp"

namespace gpn {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

json base_config(const CommandOptions& opts, const json& fallback = json::object()) {
  return opts.config ? read_config_file(*opts.config) : fallback;
}

const fs::path& require_data(const CommandOptions& opts) {
  if (!opts.data) throw ContractViolation("--data is required");
  return *opts.data;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  out << text;
  if (!out) throw LoadError(file.string() + ": write failed");
}

void report_warnings(const Dataset& ds, std::ostream& log) {
  for (const auto& w : ds.warnings) log << "warning: " << w << "\n";
}

struct LoadedRun {
  SavedModel model;
  RunConfig cfg;
  Dataset ds;
};

// Model, config (saved one unless --config is given) and prepared dataset,
// with the config's diffusion settings applied to the model.
LoadedRun load_run(const CommandOptions& opts) {
  LoadedRun run;
  run.model = load_model(opts.params.value_or(opts.out));
  run.cfg = resolve_config(base_config(opts, run.model.config), opts.overrides, opts.seed);
  run.ds = prepare_dataset(load_dataset(require_data(opts)), run.cfg);
  ModelParams& p = run.model.params;
  if (p.encoder.input_dim() != run.ds.num_features() || p.num_classes() != run.ds.num_classes) {
    throw ContractViolation("dimension mismatch: model expects " + std::to_string(p.encoder.input_dim()) +
                            " features and " + std::to_string(p.num_classes()) + " classes, dataset has " +
                            std::to_string(run.ds.num_features()) + " and " +
                            std::to_string(run.ds.num_classes));
  }
  p.diffusion = run.cfg.train.diffusion;
  return run;
}

int cmd_train(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(base_config(opts), opts.overrides, opts.seed);
  const Dataset ds = prepare_dataset(load_dataset(require_data(opts)), cfg);
  report_warnings(ds, log);
  TrainResult result = train(ds, cfg.train);

  fs::create_directories(opts.out);
  const ordered_json resolved = config_to_json(cfg);
  save_model(opts.out, result.params, resolved);
  write_text(opts.out / "history.csv", result.history.to_csv());
  write_text(opts.out / "config.resolved.json", resolved.dump(2) + "\n");
  log << "trained " << result.history.epochs.size() << " epochs, best epoch "
      << result.history.best_epoch << " with validation CE " << result.history.best_val_ce() << "\n";
  return kExitOk;
}

int cmd_eval(const CommandOptions& opts, std::ostream& log) {
  LoadedRun run = load_run(opts);
  const Prediction pred = predict(run.ds, run.model.params);
  const bool has_ood = std::find(run.ds.ood_mask.begin(), run.ds.ood_mask.end(), true) != run.ds.ood_mask.end();
  const std::string task = opts.task.value_or(has_ood ? "ood" : "misc");
  const std::string text = report_to_json(evaluate_task(run.ds, pred, task));
  fs::create_directories(opts.out);
  write_text(opts.out / "report.json", text + "\n");
  log << text << "\n";
  return kExitOk;
}

int cmd_export_latent(const CommandOptions& opts, std::ostream& log) {
  LoadedRun run = load_run(opts);
  const Prediction pred = predict(run.ds, run.model.params);
  std::ostringstream csv;
  csv << "node_id";
  for (std::size_t l = 0; l < pred.z.cols(); ++l) csv << ",z" << l + 1;
  csv << ",label,ood,alpha0\n";
  for (std::size_t i = 0; i < run.ds.num_nodes(); ++i) {
    csv << i;
    for (std::size_t l = 0; l < pred.z.cols(); ++l) csv << ',' << format_real(pred.z(i, l));
    double alpha0 = 0.0;
    for (std::size_t k = 0; k < pred.alpha.cols(); ++k) alpha0 += pred.alpha(i, k);
    csv << ',' << run.ds.original_labels[i] << ',' << (run.ds.ood_mask[i] ? 1 : 0) << ','
        << format_real(alpha0) << '\n';
  }
  fs::create_directories(opts.out);
  write_text(opts.out / "latent.csv", csv.str());
  log << "wrote " << run.ds.num_nodes() << " latent rows\n";
  return kExitOk;
}

int cmd_synth(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(base_config(opts), opts.overrides, opts.seed);
  const SynthSpec& s = cfg.synth;
  Dataset ds;
  if (s.kind == "cliques") {
    ds = synth_three_cliques(s.nodes_per_class, cfg.train.seed);
  } else {
    SbmSpec spec;
    spec.nodes_per_class = s.nodes_per_class;
    spec.num_classes = s.num_classes;
    spec.p_in = s.p_in;
    spec.p_out = s.p_out;
    spec.centers = one_hot_centers(s.num_classes, s.center_dims, s.center_scale);
    spec.noise_sigma = s.noise_sigma;
    spec.seed = cfg.train.seed;
    ds = synth_sbm(spec);
  }
  save_dataset(ds, opts.out);
  log << "wrote " << ds.num_nodes() << " nodes and " << ds.graph.num_edges() << " edges to "
      << opts.out.string() << "\n";
  return kExitOk;
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : ""; }

int cmd_ablate(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(base_config(opts), opts.overrides, opts.seed);
  const Dataset ds = prepare_dataset(load_dataset(require_data(opts)), cfg);
  report_warnings(ds, log);
  const auto points = standard_grid(cfg.grid, cfg.train);
  const auto rows = run_ablation(ds, cfg.train, points, cfg.threads);
  const auto best = select_best(rows);

  std::ostringstream csv;
  csv << "label,lambda1,lambda2,reg_kind,activation,best_epoch,best_val_ce,id_acc,"
         "alea_w_auroc,alea_w_aupr,epi_w_auroc,epi_w_aupr,epi_wo_auroc,epi_wo_aupr,error\n";
  ordered_json table = ordered_json::array();
  for (const auto& row : rows) {
    const GridPoint& p = row.point;
    csv << p.label << ',' << format_real(p.lambda1) << ',' << format_real(p.lambda2) << ','
        << to_string(p.reg_kind) << ',' << to_string(p.activation) << ',';
    ordered_json entry = {{"label", p.label},
                          {"lambda1", p.lambda1},
                          {"lambda2", p.lambda2},
                          {"reg_kind", to_string(p.reg_kind)},
                          {"activation", to_string(p.activation)}};
    if (row.report) {
      const EvalReport& r = *row.report;
      const ChannelMetrics none;
      const ChannelMetrics& wo = r.epi_wo ? *r.epi_wo : none;
      csv << row.best_epoch << ',' << format_real(row.best_val_ce) << ',' << format_real(r.id_acc) << ','
          << optional_real(r.alea_w.auroc) << ',' << optional_real(r.alea_w.aupr) << ','
          << optional_real(r.epi_w.auroc) << ',' << optional_real(r.epi_w.aupr) << ','
          << optional_real(wo.auroc) << ',' << optional_real(wo.aupr) << ",\n";
      entry["best_epoch"] = row.best_epoch;
      entry["best_val_ce"] = row.best_val_ce;
      entry["report"] = ordered_json::parse(report_to_json(r));
    } else {
      std::string message = row.error;
      std::replace(message.begin(), message.end(), ',', ';');
      std::replace(message.begin(), message.end(), '\n', ' ');
      csv << ",,,,,,,,," << message << '\n';
      entry["error"] = row.error;
    }
    table.push_back(entry);
  }
  ordered_json selected;
  for (const auto& [label, index] : best) selected[label] = index;
  ordered_json out = {{"rows", table}, {"selected", selected}};

  fs::create_directories(opts.out);
  write_text(opts.out / "ablation.csv", csv.str());
  write_text(opts.out / "ablation.json", out.dump(2) + "\n");
  write_text(opts.out / "config.resolved.json", config_to_json(cfg).dump(2) + "\n");
  for (const auto& [label, index] : best) {
    const auto& r = *rows[index].report;
    log << label << ": row " << index << ", id_acc " << r.id_acc << ", epi_w auroc "
        << optional_real(r.epi_w.auroc) << "\n";
  }
  return kExitOk;
}

int cmd_theory_check(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  const RunConfig cfg = resolve_config(base_config(opts), opts.overrides, opts.seed);
  const TheoryResult result = run_theory_check(cfg);
  fs::create_directories(opts.out);
  write_theory_check(result, opts.out);
  std::ostringstream norms;
  norms << "unregularized ood-row norm " << format_real(result.plain.ood_row_norm)
        << ", regularized ood-row norm " << format_real(result.regularized.ood_row_norm);
  if (!result.passed()) {
    err << "theory-check failed: " << norms.str() << "\n";
    return kExitTheoryFailed;
  }
  log << norms.str() << ", regularized epi_w auroc " << result.regularized.epi_w_auroc << "\n";
  return kExitOk;
}

}  // namespace

Dataset prepare_dataset(Dataset raw, const RunConfig& cfg) {
  const auto ood = cfg.resolved_ood_classes(raw.num_original_classes);
  if (!ood.empty()) raw = leave_out_classes(std::move(raw), ood);
  return make_split(std::move(raw), cfg.split);
}

EvalReport evaluate_task(const Dataset& ds, const Prediction& pred, std::string_view task) {
  if (task == "ood") {
    if (std::find(ds.ood_mask.begin(), ds.ood_mask.end(), true) == ds.ood_mask.end()) {
      throw ContractViolation("--task ood needs left-out classes (set ood_classes or left_out_count)");
    }
    return eval_ood(pred, ds.labels, ds.ood_mask, ds.test_mask);
  }
  if (task == "misc") return eval_misclassification(pred, ds.labels, ds.test_mask);
  throw ContractViolation("unknown task '" + std::string(task) + "', expected ood or misc");
}

int run_command(std::string_view command, const CommandOptions& opts, std::ostream& log,
                std::ostream& err) {
  try {
    if (command == "train") return cmd_train(opts, log);
    if (command == "eval") return cmd_eval(opts, log);
    if (command == "export-latent") return cmd_export_latent(opts, log);
    if (command == "synth") return cmd_synth(opts, log);
    if (command == "ablate") return cmd_ablate(opts, log);
    if (command == "theory-check") return cmd_theory_check(opts, log, err);
    err << "error: unknown command '" << command << "'\n";
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
  }
  return kExitError;
}

}  // namespace gpn
