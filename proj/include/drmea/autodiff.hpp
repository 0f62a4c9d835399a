#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <unordered_map>
#include <vector>

#include "drmea/matrix.hpp"
#include "drmea/numerics.hpp"

namespace drmea {

using NodeId = std::int32_t;

enum class OpKind {
    kInput,  // leaf holding a differentiable variable
    kAdd,
    kMatmul,
    kMatmulConstLeft,   // C * x, C baked as a constant
    kMatmulConstRight,  // x * C
    kAddBias,           // x + b 1^T, b a node (parameter)
    kAddColConst,       // x + v 1^T, v baked as a constant
    kLeakyRelu,
    kTanh,
    kSoftmaxColumns,
    kCrossEntropyFromLogits,
    kNormalizeColumns,
    kCenterColumns,
    kScale,
    kSum,
    kFrobeniusSq,
    kElementwiseMul,
    kElementwiseMulConst,
    kSelectColumns,
    kSubspaceProjector,
};

// One tape entry. Parents always reference earlier-created nodes, so the tape
// is a DAG in creation order. aux_* fields cache op-specific data needed by
// the backward pass (constants, eigenpairs, labels).
struct Node {
    Matrix value;
    OpKind op = OpKind::kInput;
    std::vector<NodeId> parents;

    double aux_scalar = 0.0;        // scale factor / activation alpha / eps
    Matrix aux_matrix;              // baked constant / cached softmax / centered features
    Matrix aux_matrix2;             // projector: eigenvector matrix
    std::vector<double> aux_values; // projector: eigenvalues / normalize: column denoms
    std::vector<int> aux_indices;   // labels / selected column indices
    int aux_count = 0;              // projector d'
};

// Reverse-mode tape over Matrix-valued expressions. Single-owner and
// single-threaded during construction and backward; values are computed
// eagerly at node creation.
class Tape {
  public:
    NodeId input(Matrix value);

    NodeId add(NodeId a, NodeId b);
    NodeId matmul(NodeId a, NodeId b);
    NodeId matmul_const_left(const Matrix& c, NodeId x);
    NodeId matmul_const_right(NodeId x, const Matrix& c);
    NodeId add_bias(NodeId x, NodeId bias);
    NodeId add_col_const(NodeId x, const Matrix& v);
    NodeId leaky_relu(NodeId x, double alpha);
    NodeId tanh_op(NodeId x);
    NodeId softmax_columns(NodeId x);
    NodeId cross_entropy_from_logits(NodeId logits, const std::vector<int>& labels);
    NodeId normalize_columns(NodeId x, double eps);
    NodeId center_columns(NodeId x);
    NodeId scale(NodeId x, double s);
    NodeId sum(NodeId x);
    NodeId frobenius_sq(NodeId x);
    NodeId elementwise_mul(NodeId a, NodeId b);
    NodeId elementwise_mul_const(NodeId x, const Matrix& c);
    NodeId select_columns(NodeId x, const std::vector<int>& indices);

    // P = U U^T with U the top-d' eigenvectors of covariance(x). Throws
    // DegenerateSpectrumError when the eigen-gap at d' is below gap_tol
    // (no gap constraint when d' equals the full dimension).
    NodeId subspace_projector(NodeId x, int d_prime, double gap_tol);

    // References stay valid as further nodes are appended (deque storage).
    const Matrix& value(NodeId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
    const Node& node(NodeId id) const { return nodes_[static_cast<std::size_t>(id)]; }
    std::size_t size() const { return nodes_.size(); }

    // Reverse sweep from a scalar root. The root is seeded with a 1x1 ones
    // matrix; the returned map holds gradients for every node reachable from
    // the root and nothing else.
    std::unordered_map<NodeId, Matrix> backward(NodeId root) const;

  private:
    NodeId push(Node node);
    std::deque<Node> nodes_;
};

// Max relative error between the tape gradient of f and central finite
// differences at x0, over all entries: |g_ad - g_fd| / max(|g_ad|, |g_fd|, 1e-8).
// f builds a scalar expression from an input node.
double grad_check(const std::function<NodeId(Tape&, NodeId)>& f, const Matrix& x0, double step);

}  // namespace drmea
