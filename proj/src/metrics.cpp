#include "gpn/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

#include <json.hpp>

#include "gpn/errors.hpp"

namespace gpn {
namespace metrics {

namespace {

void require_same_length(std::span<const double> scores, const std::vector<bool>& positives) {
  if (scores.size() != positives.size()) {
    throw ContractViolation("metric: " + std::to_string(scores.size()) + " scores but " +
                            std::to_string(positives.size()) + " labels");
  }
}

}  // namespace

double auroc(std::span<const double> scores, const std::vector<bool>& positives) {
  require_same_length(scores, positives);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Count in half-units so that ties contribute exactly 1 and the final ratio
  // is a single division.
  std::uint64_t num_pos = 0;
  std::uint64_t num_neg = 0;
  std::uint64_t half_wins = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    std::uint64_t group_pos = 0;
    std::uint64_t group_neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      if (positives[order[j]]) ++group_pos; else ++group_neg;
      ++j;
    }
    half_wins += 2 * group_pos * num_neg + group_pos * group_neg;
    num_pos += group_pos;
    num_neg += group_neg;
    i = j;
  }
  if (num_pos == 0 || num_neg == 0) {
    throw EvaluationError("auroc undefined: need at least one positive and one negative");
  }
  return static_cast<double>(half_wins) / (2.0 * static_cast<double>(num_pos * num_neg));
}

double aupr(std::span<const double> scores, const std::vector<bool>& positives) {
  require_same_length(scores, positives);
  const auto total_pos = static_cast<std::size_t>(std::count(positives.begin(), positives.end(), true));
  if (total_pos == 0) throw EvaluationError("aupr undefined: no positives");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 1; rank <= order.size(); ++rank) {
    if (!positives[order[rank - 1]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(rank);
  }
  return sum / static_cast<double>(total_pos);
}

double id_accuracy(const ConcentrationMatrix& alpha, const std::vector<int>& labels,
                   const std::vector<bool>& mask) {
  if (labels.size() != alpha.num_nodes() || mask.size() != alpha.num_nodes()) {
    throw ContractViolation("id_accuracy: label/mask length does not match alpha rows");
  }
  std::size_t total = 0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    ++total;
    if (labels[i] >= 0 && alpha.argmax(i) == static_cast<std::size_t>(labels[i])) ++correct;
  }
  if (total == 0) throw EvaluationError("id_accuracy undefined: empty evaluation mask");
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace metrics

namespace {

ChannelMetrics score_channel(const std::vector<double>& scores, const std::vector<bool>& positives) {
  ChannelMetrics m;
  try {
    m.auroc = metrics::auroc(scores, positives);
  } catch (const EvaluationError& e) {
    m.error = e.what();
  }
  try {
    m.aupr = metrics::aupr(scores, positives);
  } catch (const EvaluationError& e) {
    if (m.error.empty()) m.error = e.what();
  }
  return m;
}

std::vector<double> select(const std::vector<double>& values, const std::vector<std::size_t>& idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(values[i]);
  return out;
}

nlohmann::ordered_json channel_json(const ChannelMetrics& m) {
  nlohmann::ordered_json j;
  j["auroc"] = m.auroc ? nlohmann::ordered_json(*m.auroc) : nlohmann::ordered_json(nullptr);
  j["aupr"] = m.aupr ? nlohmann::ordered_json(*m.aupr) : nlohmann::ordered_json(nullptr);
  if (!m.error.empty()) j["error"] = m.error;
  return j;
}

}  // namespace

EvalReport eval_ood(const Prediction& pred, const std::vector<int>& labels,
                    const std::vector<bool>& ood_mask, const std::vector<bool>& id_eval_mask) {
  const std::size_t n = pred.alpha.rows();
  if (ood_mask.size() != n || id_eval_mask.size() != n || labels.size() != n) {
    throw ContractViolation("eval_ood: mask lengths do not match prediction rows");
  }
  const ConcentrationMatrix alpha(pred.alpha);
  const ConcentrationMatrix alpha_feat(pred.alpha_feat);

  std::vector<std::size_t> eval_nodes;
  std::vector<bool> positives;
  std::vector<bool> id_nodes(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (ood_mask[i]) {
      eval_nodes.push_back(i);
      positives.push_back(true);
    } else if (id_eval_mask[i]) {
      eval_nodes.push_back(i);
      positives.push_back(false);
      id_nodes[i] = true;
    }
  }

  EvalReport report;
  report.task = "ood";
  report.id_acc = metrics::id_accuracy(alpha, labels, id_nodes);
  report.alea_w = score_channel(
      select(dirichlet::uncertainty_scores(alpha, UncertaintyChannel::kAleatoric), eval_nodes),
      positives);
  report.epi_w = score_channel(
      select(dirichlet::uncertainty_scores(alpha, UncertaintyChannel::kEpistemicOod), eval_nodes),
      positives);
  report.epi_wo = score_channel(
      select(dirichlet::uncertainty_scores(alpha_feat, UncertaintyChannel::kEpistemicOod),
             eval_nodes),
      positives);
  return report;
}

EvalReport eval_misclassification(const Prediction& pred, const std::vector<int>& labels,
                                  const std::vector<bool>& eval_mask) {
  const std::size_t n = pred.alpha.rows();
  if (eval_mask.size() != n || labels.size() != n) {
    throw ContractViolation("eval_misclassification: mask lengths do not match prediction rows");
  }
  const ConcentrationMatrix alpha(pred.alpha);
  std::vector<std::size_t> eval_nodes;
  std::vector<bool> positives;
  for (std::size_t i = 0; i < n; ++i) {
    if (!eval_mask[i]) continue;
    if (labels[i] < 0) throw ContractViolation("eval_misclassification: unlabeled node in mask");
    eval_nodes.push_back(i);
    positives.push_back(alpha.argmax(i) != static_cast<std::size_t>(labels[i]));
  }
  EvalReport report;
  report.task = "misc";
  report.id_acc = metrics::id_accuracy(alpha, labels, eval_mask);
  report.alea_w = score_channel(
      select(dirichlet::uncertainty_scores(alpha, UncertaintyChannel::kAleatoric), eval_nodes),
      positives);
  report.epi_w = score_channel(
      select(dirichlet::uncertainty_scores(alpha, UncertaintyChannel::kEpistemicMisc), eval_nodes),
      positives);
  return report;
}

std::string report_to_json(const EvalReport& report) {
  nlohmann::ordered_json j;
  j["task"] = report.task;
  j["id_acc"] = report.id_acc;
  j["alea_w"] = channel_json(report.alea_w);
  j["epi_w"] = channel_json(report.epi_w);
  if (report.epi_wo) j["epi_wo"] = channel_json(*report.epi_wo);
  return j.dump(2) + "\n";
}

}  // namespace gpn
