#pragma once

#include <vector>

#include "drmea/autodiff.hpp"
#include "drmea/matrix.hpp"

namespace drmea {

// Per-term values of one objective evaluation. ds = sum of per-layer
// inter + intra, al = sum of per-layer align, total = ce + l1*ds + l2*al.
struct LossBreakdown {
    double ce = 0.0;
    std::vector<double> inter;
    std::vector<double> intra;
    std::vector<double> align;
    double ds = 0.0;
    double al = 0.0;
    double total = 0.0;
};

// Column j marks the k largest entries of soft-label column j; ties broken
// toward the smaller class index.
struct TruncationMask {
    Matrix mask;  // c x n_t of {0,1}
    int k = 0;
};
TruncationMask topk_mask(const Matrix& p, int k);

// Mean over columns of -log softmax(logits)[label].
double cross_entropy(const Matrix& logits, const std::vector<int>& labels);

// Mean pairwise cosine similarity of the centralized batch class means.
// The anchor total mean enters as a constant; a batch missing any class is an
// error (class-balanced sampling upstream prevents it).
NodeId inter_class_loss_node(Tape& tape, NodeId h_s, const std::vector<int>& labels,
                             int class_count, const Matrix& anchor_total_mean, double eps);
double inter_class_loss(const Matrix& h_s, const std::vector<int>& labels, int class_count,
                        const Matrix& anchor_total_mean, double eps);

// Truncated soft-label agreement between target features and the anchor class
// means: -(1/(n_t k)) sum chi(i,j) P(i,j) S(i,j), S = normalized anchors^T
// normalized features. The soft labels and the mask are constants; gradients
// flow only through the feature similarities.
NodeId intra_class_loss_node(Tape& tape, NodeId h_t, const Matrix& p,
                             const Matrix& anchor_class_means, int k, double eps);
double intra_class_loss(const Matrix& h_t, const Matrix& p, const Matrix& anchor_class_means,
                        int k, double eps);

// Untruncated variant with prefactor 1/(n_t c).
NodeId intra_class_loss_prob_node(Tape& tape, NodeId h_t, const Matrix& p,
                                  const Matrix& anchor_class_means, double eps);
double intra_class_loss_prob(const Matrix& h_t, const Matrix& p,
                             const Matrix& anchor_class_means, double eps);

// (1/d^2) || U_s U_s^T - U_t U_t^T ||_F^2 with U the top-d' eigenvectors.
double grassmann_distance(const Matrix& c_s, const Matrix& c_t, int d_prime,
                          double gap_tol = 1e-6);

// Grassmann distance of batch covariances, differentiable wrt both feature
// matrices. Propagates DegenerateSpectrumError from the projectors.
NodeId alignment_loss_node(Tape& tape, NodeId h_s, NodeId h_t, int d_prime, double gap_tol);
double alignment_loss(const Matrix& h_s, const Matrix& h_t, int d_prime, double gap_tol = 1e-6);

LossBreakdown total_objective(double ce, std::vector<double> inter, std::vector<double> intra,
                              std::vector<double> align, double lambda1, double lambda2);

}  // namespace drmea
