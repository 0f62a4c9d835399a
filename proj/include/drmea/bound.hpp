#pragma once

#include <cstdint>
#include <vector>

#include "drmea/matrix.hpp"

namespace drmea {

// Descending eigenvalue lists of the source/target covariances together with
// the approximation sample size n, the vector-norm bound B, and the
// confidence parameter delta. Eigenvalues below 1e-10 * lambda_1 are floored
// to zero at construction: a batch covariance of b samples has rank at most
// b-1, so the trailing values are numerical noise and the gap at the rank
// boundary is the clean quantity.
struct SpectrumPair {
    std::vector<double> lambdas_s;
    std::vector<double> lambdas_t;
    std::size_t n = 0;
    double B = 0.0;
    double delta = 0.0;

    SpectrumPair(std::vector<double> ls, std::vector<double> lt, std::size_t n_in, double b_in,
                 double delta_in);
};

// E(delta) = (4 B / sqrt(n)) (1 + sqrt(ln(1/delta) / 2)).
double e_delta(double B, std::size_t n, double delta);

// Smallest admissible sample count: (4B/gap (1 + sqrt(ln(1/delta)/2)))^2.
double sample_size_threshold(double B, double delta, double gap);

// e(d') = sqrt(d')/gap_s(d') + sqrt(d')/gap_t(d'); +infinity when either gap
// vanishes (excluded from argmin searches, reported as-is).
double error_index(const SpectrumPair& pair, int d_prime);

// 2 sqrt(2) E(delta) e(d').
double bound_value(const SpectrumPair& pair, int d_prime);

struct DprimeCurvePoint {
    int d_prime = 0;
    double mean_error_index = 0.0;
    double mean_gap_s = 0.0;
    double mean_gap_t = 0.0;
};

struct DprimeRecommendation {
    int best = 0;  // argmin of mean_error_index, ties toward the larger d'
    std::vector<DprimeCurvePoint> curve;
};

// Samples `trials` random batches per domain (per-trial seed = seed + trial),
// averages e(d') over trials for d' in 1..batch_size-1.
DprimeRecommendation recommend_dprime(const Matrix& features_s, const Matrix& features_t,
                                      std::size_t batch_size, int trials, std::uint64_t seed);

}  // namespace drmea
