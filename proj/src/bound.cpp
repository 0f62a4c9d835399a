#include "drmea/bound.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drmea/numerics.hpp"
#include "drmea/rng.hpp"

namespace drmea {

namespace {

void floor_and_check(std::vector<double>& lambdas, const char* which) {
    if (lambdas.empty()) throw ConfigError("spectrum pair: empty eigenvalue list");
    for (std::size_t i = 1; i < lambdas.size(); ++i) {
        if (lambdas[i] > lambdas[i - 1] + 1e-10)
            throw UsageError(std::string("spectrum pair: ") + which +
                             " eigenvalues must be descending");
    }
    const double rank_floor = 1e-10 * std::max(lambdas[0], 0.0);
    for (double& v : lambdas) {
        if (v < -1e-10 * std::max(lambdas[0], 1.0))
            throw UsageError(std::string("spectrum pair: ") + which +
                             " eigenvalues must be non-negative");
        if (v < rank_floor) v = 0.0;
    }
}

// lambda_{d'} - lambda_{d'+1} (1-based); eigenvalues past the end count as 0.
double gap_at(const std::vector<double>& lambdas, int d_prime) {
    const std::size_t i = static_cast<std::size_t>(d_prime);
    if (i > lambdas.size()) return 0.0;
    const double next = (i < lambdas.size()) ? lambdas[i] : 0.0;
    return lambdas[i - 1] - next;
}

}  // namespace

SpectrumPair::SpectrumPair(std::vector<double> ls, std::vector<double> lt, std::size_t n_in,
                           double b_in, double delta_in)
    : lambdas_s(std::move(ls)), lambdas_t(std::move(lt)), n(n_in), B(b_in), delta(delta_in) {
    floor_and_check(lambdas_s, "source");
    floor_and_check(lambdas_t, "target");
}

double e_delta(double B, std::size_t n, double delta) {
    if (!(B > 0.0)) throw ConfigError("e_delta: B must be positive");
    if (n < 1) throw ConfigError("e_delta: n must be at least 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("e_delta: delta must be in (0, 1)");
    return (4.0 * B / std::sqrt(static_cast<double>(n))) *
           (1.0 + std::sqrt(std::log(1.0 / delta) / 2.0));
}

double sample_size_threshold(double B, double delta, double gap) {
    if (!(B > 0.0)) throw ConfigError("sample_size_threshold: B must be positive");
    if (!(delta > 0.0 && delta < 1.0))
        throw ConfigError("sample_size_threshold: delta must be in (0, 1)");
    if (!(gap > 0.0))
        throw DegenerateSpectrumError("sample_size_threshold: gap must be positive", gap);
    const double base = (4.0 * B / gap) * (1.0 + std::sqrt(std::log(1.0 / delta) / 2.0));
    return base * base;
}

double error_index(const SpectrumPair& pair, int d_prime) {
    if (d_prime < 1) throw ConfigError("error_index: d' must be positive");
    const double gap_s = gap_at(pair.lambdas_s, d_prime);
    const double gap_t = gap_at(pair.lambdas_t, d_prime);
    if (gap_s <= 0.0 || gap_t <= 0.0) return std::numeric_limits<double>::infinity();
    const double root = std::sqrt(static_cast<double>(d_prime));
    return root / gap_s + root / gap_t;
}

double bound_value(const SpectrumPair& pair, int d_prime) {
    return 2.0 * std::sqrt(2.0) * e_delta(pair.B, pair.n, pair.delta) * error_index(pair, d_prime);
}

namespace {

std::vector<double> batch_spectrum(const Matrix& features, std::size_t batch_size, Rng& rng) {
    const std::size_t n = features.cols();
    // Sample without replacement via partial Fisher-Yates.
    std::vector<int> idx(n);
    for (std::size_t j = 0; j < n; ++j) idx[j] = static_cast<int>(j);
    for (std::size_t j = 0; j < batch_size; ++j) {
        const std::size_t pick = j + rng.uniform_index(n - j);
        std::swap(idx[j], idx[pick]);
    }
    Matrix batch(features.rows(), batch_size);
    for (std::size_t j = 0; j < batch_size; ++j)
        for (std::size_t i = 0; i < features.rows(); ++i)
            batch(i, j) = features(i, static_cast<std::size_t>(idx[j]));
    return sym_eig(covariance(batch)).values;
}

}  // namespace

DprimeRecommendation recommend_dprime(const Matrix& features_s, const Matrix& features_t,
                                      std::size_t batch_size, int trials, std::uint64_t seed) {
    if (batch_size < 3) throw ConfigError("recommend_dprime: batch_size must be at least 3");
    if (trials < 1) throw ConfigError("recommend_dprime: trials must be positive");
    if (features_s.cols() < batch_size || features_t.cols() < batch_size)
        throw DataError("recommend_dprime: each domain needs at least batch_size samples");

    const int max_dp = static_cast<int>(batch_size) - 1;
    std::vector<DprimeCurvePoint> curve(static_cast<std::size_t>(max_dp));
    for (int dp = 1; dp <= max_dp; ++dp) curve[static_cast<std::size_t>(dp - 1)].d_prime = dp;

    for (int trial = 0; trial < trials; ++trial) {
        // Each domain draws from its own stream keyed only by (seed, trial),
        // so exchanging the domains exchanges the batches verbatim and the
        // averaged curve is exactly symmetric.
        Rng rng_s(seed + static_cast<std::uint64_t>(trial));
        Rng rng_t(seed + static_cast<std::uint64_t>(trial));
        std::vector<double> ls = batch_spectrum(features_s, batch_size, rng_s);
        std::vector<double> lt = batch_spectrum(features_t, batch_size, rng_t);
        SpectrumPair pair(std::move(ls), std::move(lt), batch_size, 1.0, 0.5);
        for (int dp = 1; dp <= max_dp; ++dp) {
            DprimeCurvePoint& pt = curve[static_cast<std::size_t>(dp - 1)];
            pt.mean_error_index += error_index(pair, dp);
            pt.mean_gap_s += gap_at(pair.lambdas_s, dp);
            pt.mean_gap_t += gap_at(pair.lambdas_t, dp);
        }
    }
    for (DprimeCurvePoint& pt : curve) {
        pt.mean_error_index /= static_cast<double>(trials);
        pt.mean_gap_s /= static_cast<double>(trials);
        pt.mean_gap_t /= static_cast<double>(trials);
    }

    DprimeRecommendation out;
    out.curve = std::move(curve);
    double best_val = std::numeric_limits<double>::infinity();
    int best_dp = 0;
    for (const DprimeCurvePoint& pt : out.curve) {
        if (std::isinf(pt.mean_error_index)) continue;
        if (pt.mean_error_index <= best_val) {  // ties resolve toward the larger d'
            best_val = pt.mean_error_index;
            best_dp = pt.d_prime;
        }
    }
    if (best_dp == 0) throw DataError("recommend_dprime: every candidate d' had a degenerate gap");
    out.best = best_dp;
    return out;
}

}  // namespace drmea
