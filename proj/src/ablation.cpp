#include "gpn/ablation.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include "gpn/errors.hpp"

namespace gpn {

std::vector<GridPoint> standard_grid(const AblationGrid& grid, const TrainConfig& base) {
  std::vector<GridPoint> points;
  points.push_back({kVariantGpn, base.loss.lambda1, 0.0, RegKind::kNone, base.activation});
  for (double l1 : grid.lambda1) {
    points.push_back({kVariantCe, l1, 0.0, RegKind::kNone, base.activation});
  }
  for (double l1 : grid.lambda1) {
    for (Activation act : grid.activations) {
      points.push_back({kVariantCeAct, l1, 0.0, RegKind::kNone, act});
    }
  }
  for (double l1 : grid.lambda1) {
    for (Activation act : grid.activations) {
      for (RegKind kind : grid.reg_kinds) {
        for (double l2 : grid.lambda2) points.push_back({kVariantCeGd, l1, l2, kind, act});
      }
    }
  }
  return points;
}

TrainConfig apply_point(const TrainConfig& base, const GridPoint& point) {
  TrainConfig cfg = base;
  cfg.loss.lambda1 = point.lambda1;
  cfg.loss.lambda2 = point.lambda2;
  cfg.loss.reg_kind = point.reg_kind;
  cfg.activation = point.activation;
  return cfg;
}

std::vector<AblationRow> run_ablation(const Dataset& ds, const TrainConfig& base,
                                      const std::vector<GridPoint>& grid, std::size_t threads) {
  if (grid.empty()) throw ContractViolation("run_ablation: empty grid");
  std::vector<AblationRow> rows(grid.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      AblationRow& row = rows[i];
      row.point = grid[i];
      try {
        TrainResult result = train(ds, apply_point(base, grid[i]));
        row.best_val_ce = result.history.best_val_ce();
        row.best_epoch = result.history.best_epoch;
        row.report = evaluate(ds, predict(ds, result.params));
      } catch (const std::exception& e) {
        row.error = e.what();
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, grid.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return rows;
}

std::map<std::string, std::size_t> select_best(const std::vector<AblationRow>& rows) {
  std::map<std::string, std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].error.empty()) continue;
    auto it = best.find(rows[i].point.label);
    if (it == best.end() || rows[i].best_val_ce < rows[it->second].best_val_ce) {
      best[rows[i].point.label] = i;
    }
  }
  return best;
}

}  // namespace gpn
