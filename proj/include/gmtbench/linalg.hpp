#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gmtbench/errors.hpp"

namespace gmtbench::linalg {

using Matrix = std::vector<std::vector<double>>;

/// Solve A x = b in place by Gaussian elimination with partial pivoting.
/// Singularity is declared when a pivot falls below 1e-12 times the largest
/// absolute entry of A.
inline std::vector<double> solve(Matrix a, std::vector<double> b) {
    const std::size_t k = a.size();
    if (k == 0 || b.size() != k) throw SingularRegression("solve: empty or mismatched system");

    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) throw SingularRegression("solve: zero matrix");
    const double tol = 1e-12 * scale;

    for (std::size_t i = 0; i < k; ++i) {
        std::size_t pivot = i;
        for (std::size_t j = i + 1; j < k; ++j)
            if (std::abs(a[j][i]) > std::abs(a[pivot][i])) pivot = j;
        if (std::abs(a[pivot][i]) < tol) throw SingularRegression("solve: singular pivot");
        if (pivot != i) {
            std::swap(a[i], a[pivot]);
            std::swap(b[i], b[pivot]);
        }
        for (std::size_t j = i + 1; j < k; ++j) {
            const double f = a[j][i] / a[i][i];
            if (f == 0.0) continue;
            for (std::size_t l = i; l < k; ++l) a[j][l] -= f * a[i][l];
            b[j] -= f * b[i];
        }
    }
    std::vector<double> x(k);
    for (std::size_t ii = k; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < k; ++j) s -= a[ii][j] * x[j];
        x[ii] = s / a[ii][ii];
    }
    return x;
}

/// Least squares of y on the rows of X via the normal equations.
struct OlsFit {
    std::vector<double> coef;
    std::vector<double> residuals;
    double rss = 0.0;
};

inline Matrix gram(const Matrix& x) {
    const std::size_t k = x.empty() ? 0 : x[0].size();
    Matrix g(k, std::vector<double>(k, 0.0));
    for (const auto& row : x)
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i; j < k; ++j) g[i][j] += row[i] * row[j];
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < i; ++j) g[i][j] = g[j][i];
    return g;
}

inline OlsFit ols(const Matrix& x, std::span<const double> y) {
    const std::size_t n = x.size();
    if (n == 0 || y.size() != n) throw SingularRegression("ols: empty or mismatched data");
    const std::size_t k = x[0].size();

    Matrix xtx = gram(x);
    std::vector<double> xty(k, 0.0);
    for (std::size_t t = 0; t < n; ++t)
        for (std::size_t i = 0; i < k; ++i) xty[i] += x[t][i] * y[t];

    OlsFit fit;
    fit.coef = solve(xtx, xty);
    fit.residuals.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        double fitted = 0.0;
        for (std::size_t i = 0; i < k; ++i) fitted += x[t][i] * fit.coef[i];
        fit.residuals[t] = y[t] - fitted;
        fit.rss += fit.residuals[t] * fit.residuals[t];
    }
    return fit;
}

/// Column `idx` of inv(X'X), needed for a single-coefficient standard error.
inline std::vector<double> gram_inverse_column(const Matrix& x, std::size_t idx) {
    Matrix xtx = gram(x);
    std::vector<double> e(xtx.size(), 0.0);
    e[idx] = 1.0;
    return solve(std::move(xtx), std::move(e));
}

inline double mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

/// Population (n-denominator) variance.
inline double variance(std::span<const double> v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace gmtbench::linalg
