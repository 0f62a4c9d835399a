#include "drmea/losses.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "drmea/numerics.hpp"

namespace drmea {

TruncationMask topk_mask(const Matrix& p, int k) {
    const int c = static_cast<int>(p.rows());
    if (k < 1 || k > c)
        throw ConfigError("topk_mask: k must be in [1, " + std::to_string(c) + "], got " +
                          std::to_string(k));
    TruncationMask out;
    out.k = k;
    out.mask = Matrix(p.rows(), p.cols());
    std::vector<int> order(p.rows());
    for (std::size_t j = 0; j < p.cols(); ++j) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&p, j](int a, int b) {
            return p(static_cast<std::size_t>(a), j) > p(static_cast<std::size_t>(b), j);
        });
        for (int r = 0; r < k; ++r) out.mask(static_cast<std::size_t>(order[r]), j) = 1.0;
    }
    return out;
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    Tape tape;
    return tape.value(tape.cross_entropy_from_logits(tape.input(logits), labels))(0, 0);
}

namespace {

// n x c matrix averaging batch columns into class means; column i has
// 1/count_i at the rows of class-i samples.
Matrix class_average_matrix(const std::vector<int>& labels, int class_count) {
    std::vector<int> counts(static_cast<std::size_t>(class_count), 0);
    for (int lab : labels) {
        if (lab < 0 || lab >= class_count)
            throw DataError("label " + std::to_string(lab) + " out of range [0," +
                            std::to_string(class_count) + ")");
        ++counts[static_cast<std::size_t>(lab)];
    }
    for (int i = 0; i < class_count; ++i) {
        if (counts[static_cast<std::size_t>(i)] == 0)
            throw DataError("class " + std::to_string(i) +
                            " missing from batch; inter-class loss needs every class present");
    }
    Matrix m(labels.size(), static_cast<std::size_t>(class_count));
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const std::size_t cls = static_cast<std::size_t>(labels[j]);
        m(j, cls) = 1.0 / static_cast<double>(counts[cls]);
    }
    return m;
}

void check_soft_labels(const Matrix& p) {
    for (std::size_t j = 0; j < p.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.rows(); ++i) s += p(i, j);
        if (std::fabs(s - 1.0) > 1e-8)
            throw UsageError("soft-label column " + std::to_string(j) + " sums to " +
                             std::to_string(s) + ", expected 1");
    }
}

NodeId intra_node_impl(Tape& tape, NodeId h_t, const Matrix& p, const Matrix& anchor_class_means,
                       const Matrix& mask, double prefactor, double eps) {
    const Matrix& hv = tape.value(h_t);
    if (anchor_class_means.rows() != hv.rows())
        throw UsageError("intra loss: anchor dimension " + std::to_string(anchor_class_means.rows()) +
                         " does not match features " + std::to_string(hv.rows()));
    if (p.rows() != anchor_class_means.cols() || p.cols() != hv.cols())
        throw UsageError("intra loss: soft labels must be c x n_t");
    check_soft_labels(p);

    Matrix anchors_n = normalize_columns_value(anchor_class_means, eps);
    NodeId h_n = tape.normalize_columns(h_t, eps);
    NodeId sims = tape.matmul_const_left(anchors_n.transposed(), h_n);
    Matrix weights = hadamard(mask, p);
    return tape.scale(tape.sum(tape.elementwise_mul_const(sims, weights)), -prefactor);
}

}  // namespace

NodeId inter_class_loss_node(Tape& tape, NodeId h_s, const std::vector<int>& labels,
                             int class_count, const Matrix& anchor_total_mean, double eps) {
    if (class_count < 2) throw ConfigError("inter-class loss needs at least 2 classes");
    const Matrix& hv = tape.value(h_s);
    if (labels.size() != hv.cols()) throw UsageError("inter loss: one label per column required");
    if (anchor_total_mean.rows() != hv.rows() || anchor_total_mean.cols() != 1)
        throw UsageError("inter loss: anchor total mean must be d x 1");

    Matrix averager = class_average_matrix(labels, class_count);
    NodeId means = tape.matmul_const_right(h_s, averager);
    NodeId centered = tape.add_col_const(means, anchor_total_mean * -1.0);
    NodeId unit = tape.normalize_columns(centered, eps);
    // sum_{i<j} u_i^T u_j = ((||sum_i u_i||^2 - sum_i ||u_i||^2)) / 2.
    NodeId rowsum = tape.matmul_const_right(unit, Matrix(static_cast<std::size_t>(class_count), 1, 1.0));
    NodeId twice_sum = tape.add(tape.frobenius_sq(rowsum), tape.scale(tape.frobenius_sq(unit), -1.0));
    const double cc = static_cast<double>(class_count);
    return tape.scale(twice_sum, 1.0 / (cc * (cc - 1.0)));
}

double inter_class_loss(const Matrix& h_s, const std::vector<int>& labels, int class_count,
                        const Matrix& anchor_total_mean, double eps) {
    Tape tape;
    return tape.value(
        inter_class_loss_node(tape, tape.input(h_s), labels, class_count, anchor_total_mean, eps))(0, 0);
}

NodeId intra_class_loss_node(Tape& tape, NodeId h_t, const Matrix& p,
                             const Matrix& anchor_class_means, int k, double eps) {
    TruncationMask trunc = topk_mask(p, k);
    const double n_t = static_cast<double>(p.cols());
    return intra_node_impl(tape, h_t, p, anchor_class_means, trunc.mask,
                           1.0 / (n_t * static_cast<double>(k)), eps);
}

double intra_class_loss(const Matrix& h_t, const Matrix& p, const Matrix& anchor_class_means,
                        int k, double eps) {
    Tape tape;
    return tape.value(intra_class_loss_node(tape, tape.input(h_t), p, anchor_class_means, k, eps))(0, 0);
}

NodeId intra_class_loss_prob_node(Tape& tape, NodeId h_t, const Matrix& p,
                                  const Matrix& anchor_class_means, double eps) {
    Matrix all_ones(p.rows(), p.cols(), 1.0);
    const double n_t = static_cast<double>(p.cols());
    const double c = static_cast<double>(p.rows());
    return intra_node_impl(tape, h_t, p, anchor_class_means, all_ones, 1.0 / (n_t * c), eps);
}

double intra_class_loss_prob(const Matrix& h_t, const Matrix& p,
                             const Matrix& anchor_class_means, double eps) {
    Tape tape;
    return tape.value(intra_class_loss_prob_node(tape, tape.input(h_t), p, anchor_class_means, eps))(0, 0);
}

double grassmann_distance(const Matrix& c_s, const Matrix& c_t, int d_prime, double gap_tol) {
    if (!c_s.same_shape(c_t) || c_s.rows() != c_s.cols())
        throw UsageError("grassmann_distance: inputs must be square matrices of equal size");
    const int d = static_cast<int>(c_s.rows());
    if (d_prime < 1 || d_prime > d)
        throw UsageError("grassmann_distance: d' must be in [1, d]");

    SymEig es = sym_eig(c_s);
    SymEig et = sym_eig(c_t);
    const double psd_tol = -1e-8 * std::max({es.values[0], et.values[0], 1.0});
    if (es.values.back() < psd_tol || et.values.back() < psd_tol)
        throw UsageError("grassmann_distance: inputs must be PSD");
    if (d_prime < d) {
        const std::size_t i = static_cast<std::size_t>(d_prime);
        const double gap_s = es.values[i - 1] - es.values[i];
        const double gap_t = et.values[i - 1] - et.values[i];
        if (gap_s <= gap_tol)
            throw DegenerateSpectrumError("grassmann_distance: source eigen-gap below tolerance", gap_s);
        if (gap_t <= gap_tol)
            throw DegenerateSpectrumError("grassmann_distance: target eigen-gap below tolerance", gap_t);
    }

    Matrix diff(c_s.rows(), c_s.cols());
    for (int k = 0; k < d_prime; ++k)
        for (int j = 0; j < d; ++j)
            for (int i = 0; i < d; ++i)
                diff(i, j) += es.vectors(i, k) * es.vectors(j, k) - et.vectors(i, k) * et.vectors(j, k);
    return frobenius_sq(diff) / (static_cast<double>(d) * static_cast<double>(d));
}

NodeId alignment_loss_node(Tape& tape, NodeId h_s, NodeId h_t, int d_prime, double gap_tol) {
    const std::size_t dim = tape.value(h_s).rows();
    if (dim != tape.value(h_t).rows())
        throw UsageError("alignment loss: feature dimensions differ");
    NodeId p_s = tape.subspace_projector(h_s, d_prime, gap_tol);
    NodeId p_t = tape.subspace_projector(h_t, d_prime, gap_tol);
    NodeId diff = tape.add(p_s, tape.scale(p_t, -1.0));
    const double d = static_cast<double>(dim);
    return tape.scale(tape.frobenius_sq(diff), 1.0 / (d * d));
}

double alignment_loss(const Matrix& h_s, const Matrix& h_t, int d_prime, double gap_tol) {
    Tape tape;
    return tape.value(alignment_loss_node(tape, tape.input(h_s), tape.input(h_t), d_prime, gap_tol))(0, 0);
}

LossBreakdown total_objective(double ce, std::vector<double> inter, std::vector<double> intra,
                              std::vector<double> align, double lambda1, double lambda2) {
    LossBreakdown b;
    b.ce = ce;
    b.inter = std::move(inter);
    b.intra = std::move(intra);
    b.align = std::move(align);
    for (double v : b.inter) b.ds += v;
    for (double v : b.intra) b.ds += v;
    for (double v : b.align) b.al += v;
    b.total = b.ce + lambda1 * b.ds + lambda2 * b.al;
    return b;
}

}  // namespace drmea
