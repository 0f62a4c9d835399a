#include "drmea/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace drmea {

namespace {

Matrix softmax_columns_value(const Matrix& x) {
    Matrix y(x.rows(), x.cols());
    for (std::size_t j = 0; j < x.cols(); ++j) {
        double mx = x(0, j);
        for (std::size_t i = 1; i < x.rows(); ++i) mx = std::max(mx, x(i, j));
        double denom = 0.0;
        for (std::size_t i = 0; i < x.rows(); ++i) {
            y(i, j) = std::exp(x(i, j) - mx);
            denom += y(i, j);
        }
        for (std::size_t i = 0; i < x.rows(); ++i) y(i, j) /= denom;
    }
    return y;
}

}  // namespace

NodeId Tape::push(Node node) {
    node.value.check_finite("tape node value");
    nodes_.push_back(std::move(node));
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::input(Matrix value) {
    Node n;
    n.value = std::move(value);
    n.op = OpKind::kInput;
    return push(std::move(n));
}

NodeId Tape::add(NodeId a, NodeId b) {
    if (!nodes_[a].value.same_shape(nodes_[b].value)) throw UsageError("add: shape mismatch");
    Node n;
    n.value = nodes_[a].value + nodes_[b].value;
    n.op = OpKind::kAdd;
    n.parents = {a, b};
    return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
    Node n;
    n.value = drmea::matmul(nodes_[a].value, nodes_[b].value);
    n.op = OpKind::kMatmul;
    n.parents = {a, b};
    return push(std::move(n));
}

NodeId Tape::matmul_const_left(const Matrix& c, NodeId x) {
    Node n;
    n.value = drmea::matmul(c, nodes_[x].value);
    n.op = OpKind::kMatmulConstLeft;
    n.parents = {x};
    n.aux_matrix = c;
    return push(std::move(n));
}

NodeId Tape::matmul_const_right(NodeId x, const Matrix& c) {
    Node n;
    n.value = drmea::matmul(nodes_[x].value, c);
    n.op = OpKind::kMatmulConstRight;
    n.parents = {x};
    n.aux_matrix = c;
    return push(std::move(n));
}

NodeId Tape::add_bias(NodeId x, NodeId bias) {
    const Matrix& xv = nodes_[x].value;
    const Matrix& bv = nodes_[bias].value;
    if (bv.cols() != 1 || bv.rows() != xv.rows()) throw UsageError("add_bias: bias must be rows x 1");
    Node n;
    n.value = xv;
    for (std::size_t j = 0; j < xv.cols(); ++j)
        for (std::size_t i = 0; i < xv.rows(); ++i) n.value(i, j) += bv(i, 0);
    n.op = OpKind::kAddBias;
    n.parents = {x, bias};
    return push(std::move(n));
}

NodeId Tape::add_col_const(NodeId x, const Matrix& v) {
    const Matrix& xv = nodes_[x].value;
    if (v.cols() != 1 || v.rows() != xv.rows()) throw UsageError("add_col_const: vector must be rows x 1");
    Node n;
    n.value = xv;
    for (std::size_t j = 0; j < xv.cols(); ++j)
        for (std::size_t i = 0; i < xv.rows(); ++i) n.value(i, j) += v(i, 0);
    n.op = OpKind::kAddColConst;
    n.parents = {x};
    return push(std::move(n));
}

NodeId Tape::leaky_relu(NodeId x, double alpha) {
    Node n;
    n.value = nodes_[x].value;
    for (double& v : n.value.data())
        if (v < 0.0) v *= alpha;
    n.op = OpKind::kLeakyRelu;
    n.parents = {x};
    n.aux_scalar = alpha;
    return push(std::move(n));
}

NodeId Tape::tanh_op(NodeId x) {
    Node n;
    n.value = nodes_[x].value;
    for (double& v : n.value.data()) v = std::tanh(v);
    n.op = OpKind::kTanh;
    n.parents = {x};
    return push(std::move(n));
}

NodeId Tape::softmax_columns(NodeId x) {
    Node n;
    n.value = softmax_columns_value(nodes_[x].value);
    n.op = OpKind::kSoftmaxColumns;
    n.parents = {x};
    return push(std::move(n));
}

NodeId Tape::cross_entropy_from_logits(NodeId logits, const std::vector<int>& labels) {
    const Matrix& lv = nodes_[logits].value;
    if (labels.size() != lv.cols()) throw UsageError("cross_entropy: one label per column required");
    const int c = static_cast<int>(lv.rows());
    for (int lab : labels) {
        if (lab < 0 || lab >= c)
            throw DataError("cross_entropy: label " + std::to_string(lab) + " out of range [0," +
                            std::to_string(c) + ")");
    }
    Matrix probs = softmax_columns_value(lv);
    double loss = 0.0;
    for (std::size_t j = 0; j < lv.cols(); ++j) {
        // log softmax computed stably from the logits directly.
        double mx = lv(0, j);
        for (std::size_t i = 1; i < lv.rows(); ++i) mx = std::max(mx, lv(i, j));
        double lse = 0.0;
        for (std::size_t i = 0; i < lv.rows(); ++i) lse += std::exp(lv(i, j) - mx);
        lse = mx + std::log(lse);
        loss += lse - lv(static_cast<std::size_t>(labels[j]), j);
    }
    loss /= static_cast<double>(lv.cols());

    Node n;
    n.value = Matrix(1, 1, std::vector<double>{loss});
    n.op = OpKind::kCrossEntropyFromLogits;
    n.parents = {logits};
    n.aux_matrix = std::move(probs);
    n.aux_indices = labels;
    return push(std::move(n));
}

NodeId Tape::normalize_columns(NodeId x, double eps) {
    if (!(eps > 0.0)) throw ConfigError("normalize_columns: eps must be positive");
    const Matrix& xv = nodes_[x].value;
    Node n;
    n.value = Matrix(xv.rows(), xv.cols());
    n.aux_values.resize(xv.cols());
    for (std::size_t j = 0; j < xv.cols(); ++j) {
        const double norm = col_norm(xv, j);
        const double denom = std::max(norm, eps);
        n.aux_values[j] = (norm >= eps) ? denom : -denom;  // sign marks the floored case
        for (std::size_t i = 0; i < xv.rows(); ++i) n.value(i, j) = xv(i, j) / denom;
    }
    n.op = OpKind::kNormalizeColumns;
    n.parents = {x};
    n.aux_scalar = eps;
    return push(std::move(n));
}

NodeId Tape::center_columns(NodeId x) {
    Node n;
    n.value = center_columns_value(nodes_[x].value);
    n.op = OpKind::kCenterColumns;
    n.parents = {x};
    return push(std::move(n));
}

NodeId Tape::scale(NodeId x, double s) {
    Node n;
    n.value = nodes_[x].value * s;
    n.op = OpKind::kScale;
    n.parents = {x};
    n.aux_scalar = s;
    return push(std::move(n));
}

NodeId Tape::sum(NodeId x) {
    Node n;
    n.value = Matrix(1, 1, std::vector<double>{sum_entries(nodes_[x].value)});
    n.op = OpKind::kSum;
    n.parents = {x};
    return push(std::move(n));
}

NodeId Tape::frobenius_sq(NodeId x) {
    Node n;
    n.value = Matrix(1, 1, std::vector<double>{drmea::frobenius_sq(nodes_[x].value)});
    n.op = OpKind::kFrobeniusSq;
    n.parents = {x};
    return push(std::move(n));
}

NodeId Tape::elementwise_mul(NodeId a, NodeId b) {
    Node n;
    n.value = hadamard(nodes_[a].value, nodes_[b].value);
    n.op = OpKind::kElementwiseMul;
    n.parents = {a, b};
    return push(std::move(n));
}

NodeId Tape::elementwise_mul_const(NodeId x, const Matrix& c) {
    Node n;
    n.value = hadamard(nodes_[x].value, c);
    n.op = OpKind::kElementwiseMulConst;
    n.parents = {x};
    n.aux_matrix = c;
    return push(std::move(n));
}

NodeId Tape::select_columns(NodeId x, const std::vector<int>& indices) {
    const Matrix& xv = nodes_[x].value;
    if (indices.empty()) throw UsageError("select_columns: empty index list");
    Node n;
    n.value = Matrix(xv.rows(), indices.size());
    for (std::size_t j = 0; j < indices.size(); ++j) {
        const int src = indices[j];
        if (src < 0 || static_cast<std::size_t>(src) >= xv.cols())
            throw UsageError("select_columns: index out of range");
        for (std::size_t i = 0; i < xv.rows(); ++i) n.value(i, j) = xv(i, static_cast<std::size_t>(src));
    }
    n.op = OpKind::kSelectColumns;
    n.parents = {x};
    n.aux_indices = indices;
    return push(std::move(n));
}

NodeId Tape::subspace_projector(NodeId x, int d_prime, double gap_tol) {
    const Matrix& h = nodes_[x].value;
    const int d = static_cast<int>(h.rows());
    const int nn = static_cast<int>(h.cols());
    if (d_prime < 1 || d_prime > std::min(d, nn - 1)) {
        throw UsageError("subspace_projector: d' must be in [1, min(d, n-1)], got " +
                         std::to_string(d_prime));
    }
    Matrix cov = covariance(h);
    SymEig eig = sym_eig(cov);
    if (d_prime < d) {
        const double gap = eig.values[static_cast<std::size_t>(d_prime) - 1] -
                           eig.values[static_cast<std::size_t>(d_prime)];
        if (gap <= gap_tol) {
            throw DegenerateSpectrumError("subspace_projector: eigen-gap at d'=" +
                                              std::to_string(d_prime) + " below tolerance",
                                          gap);
        }
    }

    Matrix p(d, d);
    for (int k = 0; k < d_prime; ++k)
        for (int j = 0; j < d; ++j) {
            const double ujk = eig.vectors(j, k);
            if (ujk == 0.0) continue;
            for (int i = 0; i < d; ++i) p(i, j) += eig.vectors(i, k) * ujk;
        }
    // Exact symmetry for downstream consumers.
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < j; ++i) {
            const double v = 0.5 * (p(i, j) + p(j, i));
            p(i, j) = v;
            p(j, i) = v;
        }

    Node n;
    n.value = std::move(p);
    n.op = OpKind::kSubspaceProjector;
    n.parents = {x};
    n.aux_matrix = center_columns_value(h);
    n.aux_matrix2 = std::move(eig.vectors);
    n.aux_values = std::move(eig.values);
    n.aux_count = d_prime;
    return push(std::move(n));
}

std::unordered_map<NodeId, Matrix> Tape::backward(NodeId root) const {
    const Matrix& rv = nodes_[root].value;
    if (rv.rows() != 1 || rv.cols() != 1)
        throw UsageError("backward: root must be scalar (1x1), got " + std::to_string(rv.rows()) +
                         "x" + std::to_string(rv.cols()));

    std::vector<bool> reachable(nodes_.size(), false);
    reachable[root] = true;
    for (NodeId id = root; id >= 0; --id) {
        if (!reachable[id]) continue;
        for (NodeId p : nodes_[id].parents) reachable[p] = true;
    }

    std::unordered_map<NodeId, Matrix> grads;
    grads.emplace(root, Matrix(1, 1, 1.0));

    auto accumulate = [&grads](NodeId id, Matrix g) {
        auto it = grads.find(id);
        if (it == grads.end()) {
            grads.emplace(id, std::move(g));
        } else {
            it->second += g;
        }
    };

    for (NodeId id = root; id >= 0; --id) {
        if (!reachable[id]) continue;
        auto git = grads.find(id);
        if (git == grads.end()) {
            // Every reachable node carries a grad of matching shape.
            git = grads.emplace(id, Matrix(nodes_[id].value.rows(), nodes_[id].value.cols())).first;
        }
        const Node& n = nodes_[id];
        const Matrix g = git->second;  // copy: map may rehash during accumulation

        switch (n.op) {
            case OpKind::kInput:
                break;
            case OpKind::kAdd:
                accumulate(n.parents[0], g);
                accumulate(n.parents[1], g);
                break;
            case OpKind::kMatmul:
                accumulate(n.parents[0], matmul_nt(g, nodes_[n.parents[1]].value));
                accumulate(n.parents[1], matmul_tn(nodes_[n.parents[0]].value, g));
                break;
            case OpKind::kMatmulConstLeft:
                accumulate(n.parents[0], matmul_tn(n.aux_matrix, g));
                break;
            case OpKind::kMatmulConstRight:
                accumulate(n.parents[0], matmul_nt(g, n.aux_matrix));
                break;
            case OpKind::kAddBias:
                accumulate(n.parents[0], g);
                accumulate(n.parents[1], col_sum(g));
                break;
            case OpKind::kAddColConst:
                accumulate(n.parents[0], g);
                break;
            case OpKind::kLeakyRelu: {
                const Matrix& xv = nodes_[n.parents[0]].value;
                Matrix gx = g;
                for (std::size_t i = 0; i < gx.size(); ++i)
                    if (xv.data()[i] < 0.0) gx.data()[i] *= n.aux_scalar;
                accumulate(n.parents[0], std::move(gx));
                break;
            }
            case OpKind::kTanh: {
                Matrix gx = g;
                for (std::size_t i = 0; i < gx.size(); ++i) {
                    const double y = n.value.data()[i];
                    gx.data()[i] *= (1.0 - y * y);
                }
                accumulate(n.parents[0], std::move(gx));
                break;
            }
            case OpKind::kSoftmaxColumns: {
                const Matrix& y = n.value;
                Matrix gx(y.rows(), y.cols());
                for (std::size_t j = 0; j < y.cols(); ++j) {
                    double dot = 0.0;
                    for (std::size_t i = 0; i < y.rows(); ++i) dot += g(i, j) * y(i, j);
                    for (std::size_t i = 0; i < y.rows(); ++i)
                        gx(i, j) = y(i, j) * (g(i, j) - dot);
                }
                accumulate(n.parents[0], std::move(gx));
                break;
            }
            case OpKind::kCrossEntropyFromLogits: {
                const Matrix& probs = n.aux_matrix;
                const double gs = g(0, 0) / static_cast<double>(probs.cols());
                Matrix gx = probs;
                for (std::size_t j = 0; j < probs.cols(); ++j)
                    gx(static_cast<std::size_t>(n.aux_indices[j]), j) -= 1.0;
                gx *= gs;
                accumulate(n.parents[0], std::move(gx));
                break;
            }
            case OpKind::kNormalizeColumns: {
                const Matrix& y = n.value;
                Matrix gx(y.rows(), y.cols());
                for (std::size_t j = 0; j < y.cols(); ++j) {
                    const double denom = std::fabs(n.aux_values[j]);
                    if (n.aux_values[j] < 0.0) {
                        // Floored column: constant denominator.
                        for (std::size_t i = 0; i < y.rows(); ++i) gx(i, j) = g(i, j) / denom;
                    } else {
                        double dot = 0.0;
                        for (std::size_t i = 0; i < y.rows(); ++i) dot += g(i, j) * y(i, j);
                        for (std::size_t i = 0; i < y.rows(); ++i)
                            gx(i, j) = (g(i, j) - y(i, j) * dot) / denom;
                    }
                }
                accumulate(n.parents[0], std::move(gx));
                break;
            }
            case OpKind::kCenterColumns:
                accumulate(n.parents[0], center_columns_value(g));
                break;
            case OpKind::kScale:
                accumulate(n.parents[0], g * n.aux_scalar);
                break;
            case OpKind::kSum: {
                const Matrix& xv = nodes_[n.parents[0]].value;
                accumulate(n.parents[0], Matrix(xv.rows(), xv.cols(), g(0, 0)));
                break;
            }
            case OpKind::kFrobeniusSq:
                accumulate(n.parents[0], nodes_[n.parents[0]].value * (2.0 * g(0, 0)));
                break;
            case OpKind::kElementwiseMul:
                accumulate(n.parents[0], hadamard(g, nodes_[n.parents[1]].value));
                accumulate(n.parents[1], hadamard(g, nodes_[n.parents[0]].value));
                break;
            case OpKind::kElementwiseMulConst:
                accumulate(n.parents[0], hadamard(g, n.aux_matrix));
                break;
            case OpKind::kSelectColumns: {
                const Matrix& xv = nodes_[n.parents[0]].value;
                Matrix gx(xv.rows(), xv.cols());
                for (std::size_t j = 0; j < n.aux_indices.size(); ++j)
                    for (std::size_t i = 0; i < xv.rows(); ++i)
                        gx(i, static_cast<std::size_t>(n.aux_indices[j])) += g(i, j);
                accumulate(n.parents[0], std::move(gx));
                break;
            }
            case OpKind::kSubspaceProjector: {
                const Matrix& xc = n.aux_matrix;         // centered features, d x n
                const Matrix& u = n.aux_matrix2;         // eigenvectors, d x d
                const std::vector<double>& lam = n.aux_values;
                const int d = static_cast<int>(u.rows());
                const int dp = n.aux_count;
                const int nn = static_cast<int>(xc.cols());

                // dL/dC = sum_{i<=d', j>d'} [u_j^T (G+G^T) u_i / (lam_i - lam_j)] u_j u_i^T,
                // symmetrized, then chained through C = (1/(n-1)) Xc Xc^T.
                Matrix gsym = g + g.transposed();
                if (dp < d) {
                    Matrix t = matmul_tn(u, drmea::matmul(gsym, u));  // t(j,i) = u_j^T (G+G^T) u_i
                    Matrix k(d, d);
                    for (int i = 0; i < dp; ++i)
                        for (int j = dp; j < d; ++j)
                            k(j, i) = t(j, i) / (lam[static_cast<std::size_t>(i)] -
                                                 lam[static_cast<std::size_t>(j)]);
                    Matrix m = drmea::matmul(u, matmul_nt(k, u));  // sum coef u_j u_i^T
                    Matrix msym = (m + m.transposed()) * 0.5;
                    Matrix gx = drmea::matmul(msym, xc) * (2.0 / static_cast<double>(nn - 1));
                    accumulate(n.parents[0], std::move(gx));
                } else {
                    // Full-dimension projector is constant (identity); zero gradient.
                    accumulate(n.parents[0], Matrix(d, nn));
                }
                break;
            }
        }
    }

    return grads;
}

double grad_check(const std::function<NodeId(Tape&, NodeId)>& f, const Matrix& x0, double step) {
    if (!(step > 0.0)) throw ConfigError("grad_check: step must be positive");

    Tape tape;
    NodeId x = tape.input(x0);
    NodeId root = f(tape, x);
    auto grads = tape.backward(root);
    Matrix g_ad = grads.count(x) ? grads.at(x) : Matrix(x0.rows(), x0.cols());

    auto eval = [&f](const Matrix& xv) {
        Tape t;
        NodeId xn = t.input(xv);
        NodeId r = f(t, xn);
        return t.value(r)(0, 0);
    };

    double worst = 0.0;
    Matrix xp = x0;
    for (std::size_t idx = 0; idx < x0.size(); ++idx) {
        const double orig = xp.data()[idx];
        xp.data()[idx] = orig + step;
        const double up = eval(xp);
        xp.data()[idx] = orig - step;
        const double down = eval(xp);
        xp.data()[idx] = orig;
        const double g_fd = (up - down) / (2.0 * step);
        const double g = g_ad.data()[idx];
        const double rel = std::fabs(g - g_fd) / std::max({std::fabs(g), std::fabs(g_fd), 1e-8});
        worst = std::max(worst, rel);
    }
    return worst;
}

}  // namespace drmea
