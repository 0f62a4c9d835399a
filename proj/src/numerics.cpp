#include "drmea/numerics.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

namespace drmea {

Matrix covariance(const Matrix& x) {
    const std::size_t n = x.cols();
    if (n < 2) throw DataError("covariance: need at least 2 samples, got " + std::to_string(n));
    Matrix xc = center_columns_value(x);
    Matrix c = matmul_nt(xc, xc);
    const double scale = 1.0 / static_cast<double>(n - 1);
    // Symmetrize to remove accumulation-order asymmetry.
    for (std::size_t j = 0; j < c.cols(); ++j) {
        for (std::size_t i = 0; i <= j; ++i) {
            const double v = 0.5 * scale * (c(i, j) + c(j, i));
            c(i, j) = v;
            c(j, i) = v;
        }
    }
    return c;
}

namespace {

// Householder reduction of a symmetric matrix to tridiagonal form, with the
// accumulated orthogonal transform left in `a`. d receives the diagonal,
// e the subdiagonal (e[0] unused).
void tridiagonalize(Matrix& a, std::vector<double>& d, std::vector<double>& e) {
    const int n = static_cast<int>(a.rows());
    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scale += std::fabs(a(i, k));
            if (scale == 0.0) {
                e[i] = a(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = (f >= 0.0 ? -std::sqrt(h) : std::sqrt(h));
                e[i] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    a(j, i) = a(i, j) / h;
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
                    for (int k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
                    e[j] = g / h;
                    f += e[j] * a(i, j);
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a(i, j);
                    g = e[j] - hh * f;
                    e[j] = g;
                    for (int k = 0; k <= j; ++k) a(j, k) -= (f * e[k] + g * a(i, k));
                }
            }
        } else {
            e[i] = a(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const int l = i - 1;
        if (d[i] != 0.0) {
            for (int j = 0; j <= l; ++j) {
                double g = 0.0;
                for (int k = 0; k <= l; ++k) g += a(i, k) * a(k, j);
                for (int k = 0; k <= l; ++k) a(k, j) -= g * a(k, i);
            }
        }
        d[i] = a(i, i);
        a(i, i) = 1.0;
        for (int j = 0; j <= l; ++j) {
            a(j, i) = 0.0;
            a(i, j) = 0.0;
        }
    }
}

// Implicit-shift QL on the tridiagonal (d, e), rotations applied to the
// columns of z so they end as eigenvectors of the original matrix.
void ql_implicit(std::vector<double>& d, std::vector<double>& e, Matrix& z) {
    const int n = static_cast<int>(d.size());
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= DBL_EPSILON * dd) break;
            }
            if (m != l) {
                if (iter++ == 64) throw NumericError("sym_eig: QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool underflow = false;
                for (int i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z(k, i + 1);
                        z(k, i + 1) = s * z(k, i) + c * f;
                        z(k, i) = c * z(k, i) - s * f;
                    }
                }
                if (underflow) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace

SymEig sym_eig(const Matrix& a) {
    if (a.rows() != a.cols()) throw UsageError("sym_eig: matrix must be square");
    const std::size_t n = a.rows();

    double asym = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) asym = std::max(asym, std::fabs(a(i, j) - a(j, i)));
    if (asym > 1e-9) {
        throw UsageError("sym_eig: matrix asymmetry " + std::to_string(asym) + " exceeds 1e-9");
    }

    Matrix work(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) work(i, j) = 0.5 * (a(i, j) + a(j, i));

    std::vector<double> d(n, 0.0), e(n, 0.0);
    if (n == 1) {
        d[0] = work(0, 0);
        work(0, 0) = 1.0;
    } else {
        tridiagonalize(work, d, e);
        ql_implicit(d, e, work);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&d](std::size_t x, std::size_t y) { return d[x] > d[y]; });

    SymEig out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t src = order[c];
        out.values[c] = d[src];
        // First entry of largest magnitude decides the sign.
        std::size_t lead = 0;
        double best = std::fabs(work(0, src));
        for (std::size_t i = 1; i < n; ++i) {
            const double m = std::fabs(work(i, src));
            if (m > best) {
                best = m;
                lead = i;
            }
        }
        const double flip = (work(lead, src) < 0.0) ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, c) = flip * work(i, src);
    }
    return out;
}

Matrix normalize_columns_value(const Matrix& x, double eps) {
    if (!(eps > 0.0)) throw ConfigError("normalize_columns: eps must be positive");
    Matrix y = x;
    for (std::size_t j = 0; j < x.cols(); ++j) {
        const double denom = std::max(col_norm(x, j), eps);
        for (std::size_t i = 0; i < x.rows(); ++i) y(i, j) = x(i, j) / denom;
    }
    return y;
}

}  // namespace drmea
