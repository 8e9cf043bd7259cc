#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gpn/dirichlet.hpp"
#include "gpn/graph.hpp"
#include "gpn/tensor.hpp"

namespace gpn {

struct Dataset {
  std::string name;
  Tensor features;                  // NxD
  std::vector<int> original_labels; // as loaded, in [0, num_original_classes)
  std::vector<int> labels;          // ID classes re-indexed to [0, num_classes); -1 for OOD
  Graph graph;
  std::vector<bool> train_mask;
  std::vector<bool> val_mask;
  std::vector<bool> test_mask;
  std::vector<bool> ood_mask;
  std::size_t num_classes = 0;           // ID classes
  std::size_t num_original_classes = 0;  // before any classes were left out
  std::vector<std::string> warnings;

  std::size_t num_nodes() const { return labels.size(); }
  std::size_t num_features() const { return features.cols(); }

  // Masks disjoint, OOD nodes outside train/val, labels in range.
  void validate() const;
  // validate() plus at least one training node for every ID class.
  void require_trainable() const;

  LabelSet train_labels() const { return {labels, train_mask}; }
  LabelSet val_labels() const { return {labels, val_mask}; }
  // N_k: training nodes per ID class.
  std::vector<double> class_counts() const;
};

// Directory layout:
//   meta.json     {"num_nodes", "num_features", "num_classes"[, "name"]}
//   features.csv  one row per node, num_features comma-separated reals
//   labels.csv    node_id,label
//   edges.csv     src,dst
// A non-numeric first line in labels.csv or edges.csv is treated as a header.
// Masks come back all false. Throws LoadError naming the file and line.
Dataset load_dataset(const std::filesystem::path& dir);

// Writes the same layout with labels taken from original_labels. Reals are
// printed with 17 significant digits so that loading reproduces them exactly.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

struct SplitSpec {
  double train_frac = 0.05;
  double val_frac = 0.15;
  double test_frac = 0.80;
  std::uint64_t seed = 0;

  void validate() const;
};

// Stratified train/val/test split over ID nodes. Each class is shuffled with
// its own stream derive_seed(seed, original class), takes
// max(1, round(train_frac * n)) training and round(val_frac * n) validation
// nodes, and leaves the rest for test. If some class cannot be stratified the
// whole split falls back to global sampling and a warning is recorded.
Dataset make_split(Dataset ds, const SplitSpec& spec);

// Marks every node of the given original classes as OOD, removes them from
// all masks and re-indexes the remaining classes in ascending order. The graph
// and features are untouched.
Dataset leave_out_classes(Dataset ds, const std::vector<int>& ood_classes);

// The last `count` original class indices.
std::vector<int> default_ood_classes(std::size_t num_classes, std::size_t count);

// Three cliques of n nodes: class 0 with features [1,0,0], class 1 with
// [-1,0,0] and an OOD group (original label 2) with [0,1,v], v ~ U(-1,1).
Dataset synth_three_cliques(std::size_t n_per_class, std::uint64_t seed);

struct SbmSpec {
  std::size_t nodes_per_class = 100;
  std::size_t num_classes = 5;
  double p_in = 0.1;
  double p_out = 0.003;
  Tensor centers;  // num_classes x D, distinct rows
  double noise_sigma = 1.0;
  std::uint64_t seed = 0;
};

// Stochastic block model with Gaussian features around class centres.
Dataset synth_sbm(const SbmSpec& spec);

// scale * e_k for k < num_classes, in `dims` >= num_classes dimensions.
Tensor one_hot_centers(std::size_t num_classes, std::size_t dims, double scale);

}  // namespace gpn
