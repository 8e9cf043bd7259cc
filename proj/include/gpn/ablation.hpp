#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gpn/trainer.hpp"

namespace gpn {

// Variant names for the regulariser/activation ablation.
inline constexpr const char* kVariantGpn = "GPN";              // lambda2 = 0, default activation
inline constexpr const char* kVariantCe = "GPN-CE";            // + tuned entropy weight
inline constexpr const char* kVariantCeAct = "GPN-CE-ACT";     // + tuned activation
inline constexpr const char* kVariantCeGd = "GPN-CE-GD";       // + distance regulariser

struct GridPoint {
  std::string label;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  RegKind reg_kind = RegKind::kNone;
  Activation activation = Activation::kRelu;
};

struct AblationGrid {
  std::vector<double> lambda1 = {0.0};
  std::vector<double> lambda2 = {1e-4};
  std::vector<Activation> activations = {Activation::kRelu};
  std::vector<RegKind> reg_kinds = {RegKind::kDistance};
};

// GPN: one point with the base entropy weight and activation.
// GPN-CE: every lambda1, base activation.
// GPN-CE-ACT: every lambda1 x activation.
// GPN-CE-GD: every lambda1 x activation x reg_kind x lambda2.
std::vector<GridPoint> standard_grid(const AblationGrid& grid, const TrainConfig& base);

struct AblationRow {
  GridPoint point;
  std::optional<EvalReport> report;
  double best_val_ce = 0.0;
  std::size_t best_epoch = 0;
  std::string error;  // set when the row failed; other rows still run
};

// Trains and evaluates every grid point on the same dataset. Every row starts
// from base.seed so that variants differ only in their hyperparameters. Rows
// run on up to `threads` worker threads (0 = hardware concurrency); results
// are in grid order regardless of scheduling.
std::vector<AblationRow> run_ablation(const Dataset& ds, const TrainConfig& base,
                                      const std::vector<GridPoint>& grid, std::size_t threads = 0);

// Per label, the index of the successful row with the lowest validation CE
// (first one on ties).
std::map<std::string, std::size_t> select_best(const std::vector<AblationRow>& rows);

TrainConfig apply_point(const TrainConfig& base, const GridPoint& point);

}  // namespace gpn
