#include "gpn/scenario.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "gpn/format.hpp"

namespace gpn {

namespace fs = std::filesystem;

namespace {

TheoryRun train_run(const Dataset& ds, TrainConfig cfg, double lambda2) {
  cfg.linear_encoder = true;
  cfg.latent_dim = 2;
  cfg.loss.lambda2 = lambda2;
  cfg.loss.reg_kind = lambda2 > 0.0 ? RegKind::kDistance : RegKind::kNone;

  TrainResult trained = train(ds, cfg);
  TheoryRun run;
  run.lambda2 = lambda2;
  run.best_epoch = trained.history.best_epoch;

  const Tensor& w = trained.params.encoder.w1;  // latent x input
  run.weights = Tensor(w.cols(), w.rows());
  for (std::size_t j = 0; j < w.cols(); ++j) {
    double sq = 0.0;
    for (std::size_t l = 0; l < w.rows(); ++l) {
      run.weights(j, l) = w(l, j);
      sq += w(l, j) * w(l, j);
    }
    run.row_norms.push_back(std::sqrt(sq));
  }
  run.ood_row_norm = run.row_norms.at(2);

  run.prediction = predict(ds, trained.params);
  run.epi_w_auroc = evaluate(ds, run.prediction).epi_w.auroc.value_or(NAN);

  run.id_latents_match = true;
  for (std::size_t i = 0; i < ds.num_nodes(); ++i) {
    const int group = ds.original_labels[i];
    if (group > 1) continue;
    const double sign = group == 0 ? 1.0 : -1.0;
    for (std::size_t l = 0; l < w.rows(); ++l) {
      if (run.prediction.z(i, l) != sign * run.weights(0, l)) run.id_latents_match = false;
    }
  }
  return run;
}

void write_run(const TheoryRun& run, const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir);

  std::ofstream weights(dir / "weights.csv");
  weights << "feature,latent1,latent2\n";
  for (std::size_t j = 0; j < run.weights.rows(); ++j) {
    weights << j + 1;
    for (std::size_t l = 0; l < run.weights.cols(); ++l) weights << ',' << format_real(run.weights(j, l));
    weights << '\n';
  }

  std::ofstream latent(dir / "latent.csv");
  latent << "node_id,z1,z2,group\n";
  for (std::size_t i = 0; i < ds.num_nodes(); ++i) {
    latent << i << ',' << format_real(run.prediction.z(i, 0)) << ','
           << format_real(run.prediction.z(i, 1)) << ',' << ds.original_labels[i] << '\n';
  }

  nlohmann::ordered_json summary;
  summary["lambda2"] = run.lambda2;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (std::size_t j = 0; j < run.weights.rows(); ++j) {
    rows.push_back({run.weights(j, 0), run.weights(j, 1)});
  }
  summary["weights"] = rows;
  summary["row_norms"] = run.row_norms;
  summary["ood_row_norm"] = run.ood_row_norm;
  summary["epi_w_auroc"] = run.epi_w_auroc;
  summary["best_epoch"] = run.best_epoch;
  summary["id_latents_match"] = run.id_latents_match;
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';
}

}  // namespace

TheoryResult run_theory_check(const RunConfig& cfg) {
  cfg.validate();
  TheoryResult result;
  result.dataset = make_split(synth_three_cliques(cfg.theory.n_per_class, cfg.train.seed), cfg.split);
  result.plain = train_run(result.dataset, cfg.train, 0.0);
  result.regularized = train_run(result.dataset, cfg.train, cfg.theory.lambda2);
  return result;
}

void write_theory_check(const TheoryResult& result, const fs::path& dir) {
  write_run(result.plain, result.dataset, dir / "unregularized");
  write_run(result.regularized, result.dataset, dir / "regularized");
  nlohmann::ordered_json j;
  j["unregularized_ood_row_norm"] = result.plain.ood_row_norm;
  j["regularized_ood_row_norm"] = result.regularized.ood_row_norm;
  j["unregularized_epi_w_auroc"] = result.plain.epi_w_auroc;
  j["regularized_epi_w_auroc"] = result.regularized.epi_w_auroc;
  j["passed"] = result.passed();
  std::ofstream(dir / "theory_check.json") << j.dump(2) << '\n';
}

}  // namespace gpn
