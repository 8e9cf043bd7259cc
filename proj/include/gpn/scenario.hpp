#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "gpn/config.hpp"

namespace gpn {

// One training run on the three-clique dataset with a linear encoder.
struct TheoryRun {
  double lambda2 = 0.0;
  Tensor weights;                 // input_dim x latent_dim: row j maps feature j
  std::vector<double> row_norms;  // per feature row
  double ood_row_norm = 0.0;      // row of the feature that only OOD nodes vary in
  double epi_w_auroc = 0.0;
  std::size_t best_epoch = 0;
  // Latent rows of the two ID groups are exactly +/- the first weight row.
  bool id_latents_match = false;
  Prediction prediction;
};

struct TheoryResult {
  Dataset dataset;
  TheoryRun plain;        // lambda2 = 0
  TheoryRun regularized;  // lambda2 = theory.lambda2 with the distance regulariser

  bool passed() const { return regularized.ood_row_norm < plain.ood_row_norm; }
};

// Trains both runs from cfg.train with the encoder forced to linear and a
// two-dimensional latent space. Uses cfg.train.seed for data and init and
// cfg.split for the split.
TheoryResult run_theory_check(const RunConfig& cfg);

// Writes unregularized/ and regularized/ (weights.csv, latent.csv,
// summary.json) plus theory_check.json under `dir`.
void write_theory_check(const TheoryResult& result, const std::filesystem::path& dir);

}  // namespace gpn
