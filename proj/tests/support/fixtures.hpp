#pragma once

#include <vector>

#include "gpn/data.hpp"
#include "gpn/graph.hpp"
#include "gpn/model.hpp"

namespace fixture {

// Six nodes in two triangles joined by one bridge edge; three features with
// the class signal in the first coordinate. Nodes 0,1,3,4 are training
// nodes, 2 and 5 validation nodes.
inline gpn::Dataset six_node() {
  gpn::Dataset ds;
  ds.name = "six";
  ds.features = gpn::Tensor::from_rows({{1.0, 0.2, -0.1},
                                        {0.8, -0.3, 0.4},
                                        {1.2, 0.1, 0.3},
                                        {-0.9, 0.5, -0.2},
                                        {-1.1, -0.4, 0.1},
                                        {-0.7, 0.3, 0.6}});
  ds.original_labels = {0, 0, 0, 1, 1, 1};
  ds.labels = ds.original_labels;
  const std::vector<gpn::Edge> edges = {{0, 1}, {1, 2}, {0, 2}, {3, 4}, {4, 5}, {3, 5}, {2, 3}};
  ds.graph = gpn::Graph::build(6, edges);
  ds.train_mask = {true, true, false, true, true, false};
  ds.val_mask = {false, false, true, false, false, true};
  ds.test_mask = std::vector<bool>(6, false);
  ds.ood_mask = std::vector<bool>(6, false);
  ds.num_classes = 2;
  ds.num_original_classes = 2;
  return ds;
}

// Small model for gradient checks: latent 2, hidden 4, two flow layers, and
// flows pulled off the identity so that every parameter has a live gradient.
inline gpn::ModelParams small_model(const gpn::Dataset& ds, gpn::Activation act,
                                    std::uint64_t seed) {
  gpn::ModelShape shape;
  shape.input_dim = ds.num_features();
  shape.hidden_dim = 4;
  shape.latent_dim = 2;
  shape.flow_layers = 2;
  shape.activation = act;
  gpn::ModelParams p = gpn::ModelParams::init(shape, ds.class_counts(), {}, seed);
  double shift = 0.3;
  for (auto& flow : p.flows) {
    for (auto& layer : flow.layers) {
      layer.beta_raw[0] += shift;
      shift = -shift * 0.8;
    }
  }
  for (gpn::Tensor* b : {&p.encoder.b1, &p.encoder.b2}) {
    for (double& v : b->values()) v = 0.05;
  }
  return p;
}

}  // namespace fixture
