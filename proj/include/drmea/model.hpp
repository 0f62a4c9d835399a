#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "drmea/autodiff.hpp"
#include "drmea/matrix.hpp"

namespace drmea {

enum class Activation { kLeakyRelu, kTanh };

struct ActivationSpec {
    Activation kind = Activation::kLeakyRelu;
    double alpha = 0.2;  // used by leaky_relu only
};

// Parses "leaky_relu:<alpha>" or "tanh"; formats back the same way.
ActivationSpec parse_activation(const std::string& token);
std::string format_activation(const ActivationSpec& spec);

struct EmbeddingLayer {
    Matrix weight;  // d_out x d_in
    Matrix bias;    // d_out x 1
    ActivationSpec activation;
};

// Two fully connected embedding layers plus a linear softmax classifier,
// consuming precomputed stage-1 features.
struct ManifoldNetwork {
    std::vector<EmbeddingLayer> layers;
    Matrix classifier_weight;  // c x d_last
    Matrix classifier_bias;    // c x 1
    std::vector<int> dims;     // [d_in, d_1, ..., d_L, c]
};

struct ForwardPass {
    std::vector<Matrix> h;  // post-activation features per layer, d_l x n
    Matrix logits;          // c x n
    Matrix probs;           // softmax over each column
};

// Tape-node view of the same forward computation.
struct ForwardNodes {
    std::vector<NodeId> h;
    NodeId logits = -1;
    NodeId probs = -1;
};

// Glorot-uniform weights in [-sqrt(6/(d_in+d_out)), +sqrt(6/(d_in+d_out))],
// zero biases; deterministic per seed. dims = [d_in, hidden..., c],
// activations one per hidden layer.
ManifoldNetwork init_network(const std::vector<int>& dims,
                             const std::vector<ActivationSpec>& activations,
                             std::uint64_t seed);

// Records the whole forward pass on the tape starting from input node x.
ForwardNodes forward_nodes(Tape& tape, const ManifoldNetwork& net, NodeId x);

// Plain-value forward; runs the identical graph on a throwaway tape.
ForwardPass forward(const ManifoldNetwork& net, const Matrix& x);

// Tape leaves for every trainable parameter, in optimizer order:
// layer0.weight, layer0.bias, ..., classifier.weight, classifier.bias.
struct NetworkNodes {
    std::vector<NodeId> params;
    ManifoldNetwork const* net = nullptr;
};
NetworkNodes network_inputs(Tape& tape, const ManifoldNetwork& net);
ForwardNodes forward_nodes(Tape& tape, const ManifoldNetwork& net, const NetworkNodes& params, NodeId x);

std::vector<Matrix*> parameter_ptrs(ManifoldNetwork& net);
std::vector<std::string> parameter_names(const ManifoldNetwork& net);

// DRMEA-MODEL v1 text format, 17 significant digits, bit-exact round trip.
void save_model(const ManifoldNetwork& net, std::ostream& out);
void save_model_file(const ManifoldNetwork& net, const std::string& path);
ManifoldNetwork load_model(std::istream& in);
ManifoldNetwork load_model_file(const std::string& path);

}  // namespace drmea
