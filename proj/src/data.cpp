#include "gpn/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gpn/errors.hpp"
#include "gpn/format.hpp"
#include "gpn/random.hpp"

namespace gpn {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Dataset invariants

void Dataset::validate() const {
  const std::size_t n = num_nodes();
  if (features.rows() != n || original_labels.size() != n || graph.num_nodes() != n) {
    throw ContractViolation("dataset components disagree on node count");
  }
  for (const auto* m : {&train_mask, &val_mask, &test_mask, &ood_mask}) {
    if (m->size() != n) throw ContractViolation("dataset mask length does not match node count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int set = int(train_mask[i]) + int(val_mask[i]) + int(test_mask[i]);
    if (set > 1) throw ContractViolation("node " + std::to_string(i) + " is in several splits");
    if (ood_mask[i] && (train_mask[i] || val_mask[i])) {
      throw ContractViolation("OOD node " + std::to_string(i) + " is in train/val");
    }
    if (!ood_mask[i] && (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes)) {
      throw ContractViolation("node " + std::to_string(i) + " has label " +
                              std::to_string(labels[i]) + " outside [0, " +
                              std::to_string(num_classes) + ")");
    }
  }
}

void Dataset::require_trainable() const {
  validate();
  const auto counts = class_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 1.0) {
      throw ContractViolation("ID class " + std::to_string(k) + " has no training nodes");
    }
  }
}

std::vector<double> Dataset::class_counts() const {
  std::vector<double> counts(num_classes, 0.0);
  for (std::size_t i = 0; i < num_nodes(); ++i) {
    if (train_mask[i] && labels[i] >= 0) counts[static_cast<std::size_t>(labels[i])] += 1.0;
  }
  return counts;
}

// ---------------------------------------------------------------------------
// On-disk format

namespace {

std::string location(const fs::path& file, std::size_t line) {
  return file.filename().string() + ":" + std::to_string(line);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_real(std::string s, double& out) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
  std::size_t start = s.find_first_not_of(' ');
  if (start == std::string::npos) return false;
  const char* begin = s.c_str() + start;
  char* end = nullptr;
  errno = 0;
  out = std::strtod(begin, &end);
  return end != begin && *end == '\0' && errno != ERANGE;
}

bool parse_index(const std::string& s, long long& out) {
  double v = 0.0;
  if (!parse_real(s, v) || v != std::floor(v)) return false;
  out = static_cast<long long>(v);
  return true;
}

std::ifstream open_input(const fs::path& file) {
  if (!fs::exists(file)) throw LoadError("missing file " + file.string());
  std::ifstream in(file);
  if (!in) throw LoadError("cannot open " + file.string());
  return in;
}

struct IndexRow {
  long long a = 0;
  long long b = 0;
  std::size_t line = 0;
};

// Reads two-column integer rows; a leading non-numeric line is a header.
std::vector<IndexRow> read_pairs(const fs::path& file) {
  std::ifstream in = open_input(file);
  std::vector<IndexRow> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_fields(line);
    long long a = 0;
    long long b = 0;
    if (fields.size() != 2 || !parse_index(fields[0], a) || !parse_index(fields[1], b)) {
      if (lineno == 1) continue;
      throw LoadError(location(file, lineno) + ": expected two integer fields");
    }
    rows.push_back({a, b, lineno});
  }
  return rows;
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
  const fs::path meta_path = dir / "meta.json";
  std::ifstream meta_in = open_input(meta_path);
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(meta_path.string() + ": " + e.what());
  }
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  try {
    n = meta.at("num_nodes").get<std::size_t>();
    d = meta.at("num_features").get<std::size_t>();
    k = meta.at("num_classes").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw LoadError(meta_path.string() + ": " + e.what());
  }

  Dataset ds;
  ds.name = meta.value("name", dir.filename().string());
  ds.num_classes = k;
  ds.num_original_classes = k;

  const fs::path feat_path = dir / "features.csv";
  {
    std::ifstream in = open_input(feat_path);
    std::vector<double> values;
    values.reserve(n * d);
    std::string line;
    std::size_t lineno = 0;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line == "\r") continue;
      const auto fields = split_fields(line);
      if (fields.size() != d) {
        throw LoadError(location(feat_path, lineno) + ": expected " + std::to_string(d) +
                        " values, found " + std::to_string(fields.size()));
      }
      for (const auto& f : fields) {
        double v = 0.0;
        if (!parse_real(f, v)) {
          throw LoadError(location(feat_path, lineno) + ": invalid number '" + f + "'");
        }
        values.push_back(v);
      }
      ++rows;
    }
    if (rows != n) {
      throw LoadError(feat_path.filename().string() + ": " + std::to_string(rows) +
                      " rows but num_nodes is " + std::to_string(n));
    }
    ds.features = Tensor({n, d}, std::move(values));
  }

  const fs::path label_path = dir / "labels.csv";
  {
    const auto rows = read_pairs(label_path);
    if (rows.size() != n) {
      throw LoadError(label_path.filename().string() + ": " + std::to_string(rows.size()) +
                      " rows but num_nodes is " + std::to_string(n));
    }
    ds.original_labels.assign(n, -1);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto [node, label, line] = rows[r];
      const std::string where = location(label_path, line);
      if (node < 0 || static_cast<std::size_t>(node) >= n) {
        throw LoadError(where + ": node id " + std::to_string(node) + " out of range");
      }
      if (label < 0 || static_cast<std::size_t>(label) >= k) {
        throw LoadError(where + ": label " + std::to_string(label) + " outside [0, " +
                        std::to_string(k) + ")");
      }
      if (ds.original_labels[static_cast<std::size_t>(node)] != -1) {
        throw LoadError(where + ": duplicate node id " + std::to_string(node));
      }
      ds.original_labels[static_cast<std::size_t>(node)] = static_cast<int>(label);
    }
    ds.labels = ds.original_labels;
  }

  const fs::path edge_path = dir / "edges.csv";
  {
    const auto rows = read_pairs(edge_path);
    std::vector<Edge> edges;
    edges.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const auto [a, b, line] = rows[r];
      if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= n || static_cast<std::size_t>(b) >= n) {
        throw LoadError(location(edge_path, line) + ": edge (" + std::to_string(a) + "," + std::to_string(b) +
                        ") out of range");
      }
      edges.emplace_back(static_cast<std::size_t>(a), static_cast<std::size_t>(b));
    }
    ds.graph = Graph::build(n, edges);
  }

  ds.train_mask.assign(n, false);
  ds.val_mask.assign(n, false);
  ds.test_mask.assign(n, false);
  ds.ood_mask.assign(n, false);
  return ds;
}

void save_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir);
  nlohmann::ordered_json meta;
  meta["num_nodes"] = ds.num_nodes();
  meta["num_features"] = ds.num_features();
  meta["num_classes"] = ds.num_original_classes;
  meta["name"] = ds.name;
  std::ofstream(dir / "meta.json") << meta.dump(2) << "\n";

  std::ofstream feat(dir / "features.csv");
  for (std::size_t i = 0; i < ds.features.rows(); ++i) {
    for (std::size_t j = 0; j < ds.features.cols(); ++j) {
      if (j) feat << ',';
      feat << format_real(ds.features(i, j));
    }
    feat << '\n';
  }

  std::ofstream labels(dir / "labels.csv");
  for (std::size_t i = 0; i < ds.num_nodes(); ++i) labels << i << ',' << ds.original_labels[i] << '\n';

  std::ofstream edges(dir / "edges.csv");
  for (const auto& [i, j] : ds.graph.edges()) edges << i << ',' << j << '\n';
}

// ---------------------------------------------------------------------------
// Splits and the left-out-classes protocol

void SplitSpec::validate() const {
  const bool ok = train_frac > 0.0 && val_frac >= 0.0 && test_frac >= 0.0 &&
                  std::abs(train_frac + val_frac + test_frac - 1.0) < 1e-9;
  if (!ok) throw ContractViolation("split fractions must be nonnegative, train > 0, and sum to 1");
}

namespace {

std::uint64_t class_stream(int original_class) {
  return static_cast<std::uint64_t>(original_class);
}

constexpr std::uint64_t kGlobalStream = 0xFFFF'FFFFull;

}  // namespace

Dataset make_split(Dataset ds, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = ds.num_nodes();
  ds.train_mask.assign(n, false);
  ds.val_mask.assign(n, false);
  ds.test_mask.assign(n, false);
  if (ds.ood_mask.size() != n) ds.ood_mask.assign(n, false);

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ds.ood_mask[i]) by_class[ds.original_labels[i]].push_back(i);
  }

  struct Plan {
    std::vector<std::size_t> nodes;
    std::size_t train;
    std::size_t val;
  };
  std::vector<Plan> plans;
  bool stratifiable = true;
  std::string offending;
  for (auto& [cls, nodes] : by_class) {
    const double size = static_cast<double>(nodes.size());
    const auto train = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(spec.train_frac * size)));
    const auto val = static_cast<std::size_t>(std::lround(spec.val_frac * size));
    if (train + val > nodes.size()) {
      stratifiable = false;
      offending = "class " + std::to_string(cls) + " has " + std::to_string(nodes.size()) + " nodes";
      break;
    }
    Rng rng(derive_seed(spec.seed, class_stream(cls)));
    rng.shuffle(std::span<std::size_t>(nodes));
    plans.push_back({nodes, train, val});
  }

  if (stratifiable) {
    for (const auto& plan : plans) {
      for (std::size_t r = 0; r < plan.nodes.size(); ++r) {
        const std::size_t v = plan.nodes[r];
        if (r < plan.train) ds.train_mask[v] = true;
        else if (r < plan.train + plan.val) ds.val_mask[v] = true;
        else ds.test_mask[v] = true;
      }
    }
    return ds;
  }

  ds.warnings.push_back("split: " + offending + ", too few to stratify; using global sampling");
  std::vector<std::size_t> id_nodes;
  for (std::size_t i = 0; i < n; ++i) {
    if (!ds.ood_mask[i]) id_nodes.push_back(i);
  }
  Rng rng(derive_seed(spec.seed, kGlobalStream));
  rng.shuffle(std::span<std::size_t>(id_nodes));
  const double total = static_cast<double>(id_nodes.size());
  std::size_t want_train = static_cast<std::size_t>(std::lround(spec.train_frac * total));
  const std::size_t want_val = static_cast<std::size_t>(std::lround(spec.val_frac * total));

  // One training node per class first, in shuffled order.
  std::set<int> covered;
  std::size_t train_count = 0;
  for (std::size_t v : id_nodes) {
    if (covered.insert(ds.original_labels[v]).second) {
      ds.train_mask[v] = true;
      ++train_count;
    }
  }
  want_train = std::max(want_train, train_count);
  std::size_t val_count = 0;
  for (std::size_t v : id_nodes) {
    if (ds.train_mask[v]) continue;
    if (train_count < want_train) {
      ds.train_mask[v] = true;
      ++train_count;
    } else if (val_count < want_val) {
      ds.val_mask[v] = true;
      ++val_count;
    } else {
      ds.test_mask[v] = true;
    }
  }
  return ds;
}

Dataset leave_out_classes(Dataset ds, const std::vector<int>& ood_classes) {
  if (ood_classes.empty()) throw ContractViolation("leave_out_classes: no classes given");
  const std::set<int> left_out(ood_classes.begin(), ood_classes.end());
  for (int c : left_out) {
    if (c < 0 || static_cast<std::size_t>(c) >= ds.num_original_classes) {
      throw ContractViolation("leave_out_classes: class " + std::to_string(c) + " out of range");
    }
  }
  const std::size_t n = ds.num_nodes();
  if (ds.ood_mask.size() != n) ds.ood_mask.assign(n, false);
  for (auto* m : {&ds.train_mask, &ds.val_mask, &ds.test_mask}) {
    if (m->size() != n) m->assign(n, false);
  }

  std::set<int> id_classes;
  for (std::size_t i = 0; i < n; ++i) {
    if (left_out.count(ds.original_labels[i])) ds.ood_mask[i] = true;
    if (!ds.ood_mask[i]) id_classes.insert(ds.original_labels[i]);
  }
  if (id_classes.empty()) {
    throw ContractViolation("leave_out_classes: no in-distribution classes would remain");
  }
  std::map<int, int> remap;
  for (int c : id_classes) remap.emplace(c, static_cast<int>(remap.size()));

  for (std::size_t i = 0; i < n; ++i) {
    if (ds.ood_mask[i]) {
      ds.labels[i] = -1;
      ds.train_mask[i] = false;
      ds.val_mask[i] = false;
      ds.test_mask[i] = false;
    } else {
      ds.labels[i] = remap.at(ds.original_labels[i]);
    }
  }
  ds.num_classes = id_classes.size();
  return ds;
}

std::vector<int> default_ood_classes(std::size_t num_classes, std::size_t count) {
  if (count == 0 || count >= num_classes) {
    throw ContractViolation("default_ood_classes: count must be in [1, num_classes)");
  }
  std::vector<int> out;
  for (std::size_t c = num_classes - count; c < num_classes; ++c) out.push_back(static_cast<int>(c));
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic generators

namespace {

Dataset empty_with_labels(std::vector<int> labels, std::size_t num_classes, Tensor features,
                          std::vector<Edge> edges, std::string name) {
  Dataset ds;
  ds.name = std::move(name);
  const std::size_t n = labels.size();
  ds.features = std::move(features);
  ds.original_labels = labels;
  ds.labels = std::move(labels);
  ds.graph = Graph::build(n, edges);
  ds.train_mask.assign(n, false);
  ds.val_mask.assign(n, false);
  ds.test_mask.assign(n, false);
  ds.ood_mask.assign(n, false);
  ds.num_classes = num_classes;
  ds.num_original_classes = num_classes;
  return ds;
}

}  // namespace

Dataset synth_three_cliques(std::size_t n_per_class, std::uint64_t seed) {
  if (n_per_class < 2) throw ContractViolation("synth_three_cliques: need at least 2 nodes per group");
  Rng rng(seed);
  const std::size_t n = 3 * n_per_class;
  Tensor x(n, 3);
  std::vector<int> labels(n);
  std::vector<Edge> edges;
  for (std::size_t g = 0; g < 3; ++g) {
    const std::size_t first = g * n_per_class;
    for (std::size_t i = first; i < first + n_per_class; ++i) {
      labels[i] = static_cast<int>(g);
      if (g == 0) {
        x(i, 0) = 1.0;
      } else if (g == 1) {
        x(i, 0) = -1.0;
      } else {
        x(i, 1) = 1.0;
        x(i, 2) = rng.uniform(-1.0, 1.0);
      }
      for (std::size_t j = first; j < i; ++j) edges.emplace_back(j, i);
    }
  }
  Dataset ds = empty_with_labels(std::move(labels), 3, std::move(x), std::move(edges), "cliques");
  return leave_out_classes(std::move(ds), {2});
}

Dataset synth_sbm(const SbmSpec& spec) {
  if (spec.nodes_per_class == 0) throw ContractViolation("synth_sbm: classes must have nodes");
  if (spec.num_classes == 0) throw ContractViolation("synth_sbm: need at least one class");
  if (!(spec.p_in >= 0.0 && spec.p_in <= 1.0 && spec.p_out >= 0.0 && spec.p_out <= 1.0)) {
    throw ContractViolation("synth_sbm: probabilities must lie in [0, 1]");
  }
  if (spec.centers.rows() != spec.num_classes) {
    throw ContractViolation("synth_sbm: need one centre per class");
  }
  const std::size_t d = spec.centers.cols();
  for (std::size_t a = 0; a < spec.num_classes; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      bool same = true;
      for (std::size_t j = 0; j < d; ++j) same = same && spec.centers(a, j) == spec.centers(b, j);
      if (same) throw ContractViolation("synth_sbm: class centres must be distinct");
    }
  }

  Rng rng(spec.seed);
  const std::size_t n = spec.nodes_per_class * spec.num_classes;
  Tensor x(n, d);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = i / spec.nodes_per_class;
    labels[i] = static_cast<int>(k);
    for (std::size_t j = 0; j < d; ++j) x(i, j) = spec.centers(k, j) + spec.noise_sigma * rng.normal();
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double p = labels[i] == labels[j] ? spec.p_in : spec.p_out;
      if (rng.bernoulli(p)) edges.emplace_back(i, j);
    }
  }
  return empty_with_labels(std::move(labels), spec.num_classes, std::move(x), std::move(edges), "sbm");
}

Tensor one_hot_centers(std::size_t num_classes, std::size_t dims, double scale) {
  if (dims < num_classes) throw ContractViolation("one_hot_centers: dims < num_classes");
  Tensor c(num_classes, dims);
  for (std::size_t k = 0; k < num_classes; ++k) c(k, k) = scale;
  return c;
}

}  // namespace gpn
