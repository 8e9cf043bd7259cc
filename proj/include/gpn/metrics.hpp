#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gpn/dirichlet.hpp"
#include "gpn/tensor.hpp"

namespace gpn {

// Plain-value snapshot of a forward pass, detached from any tape.
struct Prediction {
  Tensor z;
  Tensor alpha_feat;
  Tensor alpha;
};

namespace metrics {

// Mann-Whitney AUROC: P(score_pos > score_neg) + 0.5 P(tie). Throws
// EvaluationError without at least one positive and one negative.
double auroc(std::span<const double> scores, const std::vector<bool>& positives);

// Average precision over the ranking by descending score; equal scores keep
// their input order. Throws EvaluationError without positives.
double aupr(std::span<const double> scores, const std::vector<bool>& positives);

// Fraction of masked nodes whose argmax concentration (lowest index on ties)
// equals the label. Throws EvaluationError on an empty mask.
double id_accuracy(const ConcentrationMatrix& alpha, const std::vector<int>& labels,
                   const std::vector<bool>& mask);

}  // namespace metrics

struct ChannelMetrics {
  std::optional<double> auroc;
  std::optional<double> aupr;
  std::string error;  // empty unless a metric was undefined
};

struct EvalReport {
  std::string task;  // "ood" or "misc"
  double id_acc = 0.0;
  ChannelMetrics alea_w;
  ChannelMetrics epi_w;
  std::optional<ChannelMetrics> epi_wo;  // OOD task only
};

// Positives are OOD nodes; the evaluation set is every OOD node plus the ID
// nodes selected by id_eval_mask. alea_w and epi_w score the diffused alpha,
// epi_wo the pre-diffusion alpha_feat.
EvalReport eval_ood(const Prediction& pred, const std::vector<int>& labels,
                    const std::vector<bool>& ood_mask, const std::vector<bool>& id_eval_mask);

// Positives are misclassified nodes among eval_mask. epi_w uses the largest
// concentration rather than the Dirichlet strength.
EvalReport eval_misclassification(const Prediction& pred, const std::vector<int>& labels,
                                  const std::vector<bool>& eval_mask);

// Compact JSON text with keys task, id_acc, alea_w, epi_w[, epi_wo]; each
// channel holds auroc and aupr (null plus "error" when undefined).
std::string report_to_json(const EvalReport& report);

}  // namespace gpn
