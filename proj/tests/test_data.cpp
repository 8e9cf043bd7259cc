#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "gpn/data.hpp"
#include "gpn/errors.hpp"
#include "gpn/random.hpp"
#include "support/temp_dir.hpp"

using namespace gpn;
namespace fs = std::filesystem;

namespace {

using fixture::TempDir;

void write(const fs::path& file, const std::string& text) { fixture::write_file(file, text); }

void write_path_fixture(const fs::path& dir) {
  write(dir / "meta.json", R"({"num_nodes": 3, "num_features": 2, "num_classes": 2, "name": "path"})");
  write(dir / "features.csv", "0.5,1\n-1,2.25\n3,0\n");
  write(dir / "labels.csv", "node_id,label\n0,0\n1,1\n2,1\n");
  write(dir / "edges.csv", "src,dst\n0,1\n1,2\n");
}

std::size_t count(const std::vector<bool>& m) {
  std::size_t c = 0;
  for (bool b : m) c += b ? 1 : 0;
  return c;
}

std::vector<std::size_t> per_class(const Dataset& ds, const std::vector<bool>& mask) {
  std::vector<std::size_t> out(ds.num_original_classes, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) ++out[static_cast<std::size_t>(ds.original_labels[i])];
  }
  return out;
}

Dataset balanced(std::size_t per, std::size_t classes, std::uint64_t seed) {
  SbmSpec spec;
  spec.nodes_per_class = per;
  spec.num_classes = classes;
  spec.p_in = 0.1;
  spec.p_out = 0.01;
  spec.centers = one_hot_centers(classes, classes, 2.0);
  spec.seed = seed;
  return synth_sbm(spec);
}

}  // namespace

TEST_CASE("load the path fixture") {
  TempDir dir("path");
  write_path_fixture(dir.path);
  const Dataset ds = load_dataset(dir.path);
  CHECK(ds.num_nodes() == 3);
  CHECK(ds.graph.num_edges() == 2);
  CHECK(ds.num_features() == 2);
  CHECK(ds.num_classes == 2);
  CHECK(ds.name == "path");
  CHECK(ds.features(1, 1) == 2.25);
  CHECK(ds.labels == std::vector<int>{0, 1, 1});
  CHECK(count(ds.train_mask) == 0);
  CHECK(count(ds.ood_mask) == 0);
}

TEST_CASE("duplicate directions collapse to one edge") {
  TempDir dir("dup");
  write_path_fixture(dir.path);
  write(dir.path / "edges.csv", "0,1\n1,0\n");
  CHECK(load_dataset(dir.path).graph.num_edges() == 1);
}

TEST_CASE("load errors name the file and line") {
  TempDir dir("bad");
  write_path_fixture(dir.path);
  write(dir.path / "labels.csv", "0,0\n1,2\n2,1\n");
  try {
    (void)load_dataset(dir.path);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("labels.csv") != std::string::npos);
    CHECK(msg.find("labels.csv:2") != std::string::npos);
  }

  write_path_fixture(dir.path);
  write(dir.path / "edges.csv", "0,1\n1,7\n");
  try {
    (void)load_dataset(dir.path);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("edges.csv:2") != std::string::npos);
  }

  write_path_fixture(dir.path);
  write(dir.path / "features.csv", "0.5,1\n-1,2.25\n");
  CHECK_THROWS_AS((void)load_dataset(dir.path), LoadError);

  write_path_fixture(dir.path);
  write(dir.path / "features.csv", "0.5,1\n-1,abc\n3,0\n");
  CHECK_THROWS_AS((void)load_dataset(dir.path), LoadError);

  write_path_fixture(dir.path);
  fs::remove(dir.path / "features.csv");
  try {
    (void)load_dataset(dir.path);
    FAIL("expected LoadError");
  } catch (const LoadError& e) {
    CHECK(std::string(e.what()).find("features.csv") != std::string::npos);
  }
}

TEST_CASE("save and load round-trip exactly") {
  TempDir dir("roundtrip");
  Dataset ds = balanced(6, 3, 9);
  ds.name = "rt";
  save_dataset(ds, dir.path);
  const Dataset back = load_dataset(dir.path);
  CHECK(back.features.values() == ds.features.values());
  CHECK(back.original_labels == ds.original_labels);
  CHECK(back.graph.edges() == ds.graph.edges());
  CHECK(back.num_classes == ds.num_classes);
  CHECK(back.name == "rt");
}

TEST_CASE("stratified split arithmetic and determinism") {
  const Dataset ds = balanced(50, 2, 1);
  const SplitSpec spec{0.05, 0.15, 0.80, 42};
  const Dataset a = make_split(ds, spec);
  CHECK(per_class(a, a.train_mask) == std::vector<std::size_t>{3, 3});
  CHECK(per_class(a, a.val_mask) == std::vector<std::size_t>{8, 8});
  CHECK(count(a.test_mask) == 100 - 6 - 16);
  CHECK(a.warnings.empty());
  a.validate();

  const Dataset b = make_split(ds, spec);
  CHECK(a.train_mask == b.train_mask);
  CHECK(a.val_mask == b.val_mask);
  CHECK(a.test_mask == b.test_mask);

  SplitSpec other = spec;
  other.seed = 43;
  const Dataset c = make_split(ds, other);
  CHECK(c.train_mask != a.train_mask);
  CHECK(per_class(c, c.train_mask) == per_class(a, a.train_mask));
  CHECK(per_class(c, c.val_mask) == per_class(a, a.val_mask));
}

TEST_CASE("masks partition the ID nodes") {
  const Dataset ds = make_split(balanced(20, 4, 2), {0.1, 0.2, 0.7, 3});
  for (std::size_t i = 0; i < ds.num_nodes(); ++i) {
    CHECK(int(ds.train_mask[i]) + int(ds.val_mask[i]) + int(ds.test_mask[i]) == 1);
  }
}

TEST_CASE("tiny classes fall back to global sampling") {
  // One node per class cannot hold a training and a validation node.
  Dataset ds = balanced(1, 3, 4);
  const Dataset s = make_split(ds, {0.3, 0.5, 0.2, 5});
  CHECK_FALSE(s.warnings.empty());
  for (std::size_t k : per_class(s, s.train_mask)) CHECK(k >= 1);
  s.validate();
}

TEST_CASE("split fractions are validated") {
  CHECK_THROWS_AS((SplitSpec{0.5, 0.5, 0.5, 0}.validate()), ContractViolation);
  CHECK_THROWS_AS((SplitSpec{-0.1, 0.5, 0.6, 0}.validate()), ContractViolation);
  CHECK_NOTHROW((SplitSpec{}.validate()));
}

TEST_CASE("leave out classes") {
  const Dataset seven = balanced(10, 7, 6);
  const Dataset ood = leave_out_classes(seven, default_ood_classes(7, 3));
  CHECK(ood.num_classes == 4);
  CHECK(count(ood.ood_mask) == 30);
  for (std::size_t i = 0; i < ood.num_nodes(); ++i) {
    if (ood.ood_mask[i]) {
      CHECK(ood.labels[i] == -1);
      CHECK(ood.original_labels[i] >= 4);
    } else {
      CHECK(ood.labels[i] == ood.original_labels[i]);
    }
  }
  CHECK(ood.graph.edges() == seven.graph.edges());
  CHECK(ood.features.values() == seven.features.values());

  const Dataset ten = balanced(10, 10, 7);
  CHECK(count(leave_out_classes(ten, {3}).ood_mask) == 10);

  // Re-indexing keeps ascending order among survivors.
  const Dataset middle = leave_out_classes(balanced(5, 3, 8), {1});
  for (std::size_t i = 0; i < middle.num_nodes(); ++i) {
    if (middle.original_labels[i] == 2) CHECK(middle.labels[i] == 1);
  }

  const Dataset split = make_split(seven, {0.2, 0.2, 0.6, 1});
  const Dataset after = leave_out_classes(split, {6});
  for (std::size_t i = 0; i < after.num_nodes(); ++i) {
    if (after.ood_mask[i]) {
      CHECK_FALSE(after.train_mask[i]);
      CHECK_FALSE(after.val_mask[i]);
    }
  }
  CHECK_THROWS_AS((void)leave_out_classes(seven, {0, 1, 2, 3, 4, 5, 6}), ContractViolation);
  CHECK_THROWS_AS((void)leave_out_classes(seven, {}), ContractViolation);
  CHECK_THROWS_AS((void)leave_out_classes(seven, {9}), ContractViolation);
}

TEST_CASE("leaving out classes commutes with splitting") {
  const Dataset base = balanced(30, 5, 10);
  const SplitSpec spec{0.1, 0.2, 0.7, 77};
  const Dataset first = make_split(leave_out_classes(base, {1, 4}), spec);
  const Dataset second = leave_out_classes(make_split(base, spec), {1, 4});
  CHECK(first.train_mask == second.train_mask);
  CHECK(first.val_mask == second.val_mask);
  CHECK(first.test_mask == second.test_mask);
  CHECK(first.ood_mask == second.ood_mask);
}

TEST_CASE("three-clique generator") {
  const Dataset ds = synth_three_cliques(5, 1);
  CHECK(ds.num_nodes() == 15);
  CHECK(ds.graph.num_edges() == 30);
  CHECK(homophily(ds.graph, ds.original_labels) == 1.0);
  CHECK(ds.num_classes == 2);
  for (std::size_t i = 0; i < 15; ++i) {
    const int g = ds.original_labels[i];
    if (g == 0) {
      CHECK(ds.features(i, 0) == 1.0);
      CHECK(ds.features(i, 1) == 0.0);
      CHECK(ds.features(i, 2) == 0.0);
    } else if (g == 1) {
      CHECK(ds.features(i, 0) == -1.0);
    } else {
      CHECK(ds.ood_mask[i]);
      CHECK(ds.features(i, 1) == 1.0);
      CHECK(std::abs(ds.features(i, 2)) < 1.0);
    }
  }

  const Dataset big = synth_three_cliques(4000, 2);
  double mean = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < big.num_nodes(); ++i) {
    if (big.ood_mask[i]) {
      mean += big.features(i, 2);
      ++n;
    }
  }
  mean /= static_cast<double>(n);
  // U(-1,1) has standard deviation 1/sqrt(3).
  CHECK(std::abs(mean) < 3.0 / std::sqrt(3.0 * static_cast<double>(n)));
  CHECK_THROWS_AS((void)synth_three_cliques(1, 0), ContractViolation);
}

TEST_CASE("sbm homophily responds to block probabilities") {
  SbmSpec spec;
  spec.nodes_per_class = 40;
  spec.num_classes = 4;
  spec.centers = one_hot_centers(4, 4, 1.0);
  spec.p_in = 0.2;
  spec.p_out = 0.0;
  spec.seed = 3;
  const Dataset pure = synth_sbm(spec);
  CHECK(homophily(pure.graph, pure.original_labels) == 1.0);

  spec.p_in = 0.1;
  spec.p_out = 0.1;
  const Dataset mixed = synth_sbm(spec);
  const double h = homophily(mixed.graph, mixed.original_labels);
  // Within-class pairs: 4 * C(40,2); all pairs: C(160,2).
  const double q = 4.0 * 780.0 / 12720.0;
  const double m = static_cast<double>(mixed.graph.num_edges());
  CHECK(std::abs(h - q) < 3.0 * std::sqrt(q * (1 - q) / m));
  CHECK(std::abs(q - 0.25) < 0.01);
}

TEST_CASE("sbm is deterministic and validates inputs") {
  const Dataset a = balanced(15, 3, 99);
  const Dataset b = balanced(15, 3, 99);
  CHECK(a.features.values() == b.features.values());
  CHECK(a.graph.edges() == b.graph.edges());
  const Dataset c = balanced(15, 3, 100);
  CHECK(a.features.values() != c.features.values());

  SbmSpec spec;
  spec.num_classes = 2;
  spec.nodes_per_class = 3;
  spec.centers = Tensor::from_rows({{1, 0}, {1, 0}});
  CHECK_THROWS_AS((void)synth_sbm(spec), ContractViolation);
  spec.centers = one_hot_centers(2, 2, 1.0);
  spec.nodes_per_class = 0;
  CHECK_THROWS_AS((void)synth_sbm(spec), ContractViolation);
  spec.nodes_per_class = 3;
  spec.p_in = 1.5;
  CHECK_THROWS_AS((void)synth_sbm(spec), ContractViolation);
}

TEST_CASE("dataset validation") {
  Dataset ds = make_split(balanced(10, 2, 1), {});
  ds.validate();
  CHECK(ds.class_counts() == std::vector<double>{1, 1});
  Dataset overlap = ds;
  for (std::size_t i = 0; i < overlap.num_nodes(); ++i) {
    if (overlap.train_mask[i]) overlap.val_mask[i] = true;
  }
  CHECK_THROWS_AS(overlap.validate(), ContractViolation);
  Dataset ood_train = leave_out_classes(ds, {1});
  ood_train.train_mask[15] = true;
  CHECK_THROWS_AS(ood_train.validate(), ContractViolation);
  Dataset missing = ds;
  for (std::size_t i = 0; i < missing.num_nodes(); ++i) {
    if (missing.original_labels[i] == 1) missing.train_mask[i] = false;
  }
  CHECK_THROWS_AS(missing.require_trainable(), ContractViolation);
}

TEST_CASE("splitmix reference values and derived streams") {
  // First outputs of SplitMix64 seeded with 0, as published with the algorithm.
  SplitMix64 g(0);
  CHECK(g.next() == 0xE220A8397B1DCDAFull);
  CHECK(g.next() == 0x6E789E6AA1B965F4ull);
  CHECK(g.next() == 0x06C45D188009454Full);
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));

  Rng rng(123);
  std::vector<std::size_t> hits(7, 0);
  for (int i = 0; i < 70000; ++i) ++hits[rng.uniform_index(7)];
  for (std::size_t h : hits) CHECK(std::abs(static_cast<double>(h) - 10000.0) < 400.0);
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  CHECK(std::abs(s / 1e5) < 0.02);
  CHECK(std::abs(s2 / 1e5 - 1.0) < 0.02);
}
