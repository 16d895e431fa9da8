#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "gmtbench/errors.hpp"
#include "gmtbench/forecast.hpp"
#include "gmtbench/linalg.hpp"

namespace gmtbench::lagreg {

/// Lag-window embedding of a univariate series: row i holds
/// series[i..i+W) (oldest lag first) and y[i] = series[i+W].
struct LagMatrix {
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    int window = 0;

    std::size_t rows() const { return y.size(); }
};

inline LagMatrix embed(std::span<const double> series, int window) {
    if (window < 1 || series.size() <= static_cast<std::size_t>(window))
        throw WindowTooLarge("embed requires series length > window >= 1");
    const auto w = static_cast<std::size_t>(window);
    LagMatrix m;
    m.window = window;
    const std::size_t rows = series.size() - w;
    m.X.resize(rows);
    m.y.resize(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        m.X[i].assign(series.begin() + static_cast<std::ptrdiff_t>(i),
                      series.begin() + static_cast<std::ptrdiff_t>(i + w));
        m.y[i] = series[i + w];
    }
    return m;
}

// ---------------------------------------------------------------------------
// linear fits; coefficient vectors are [intercept, w_1 .. w_W]

inline std::vector<double> fit_ols(const LagMatrix& m) {
    const std::size_t w = static_cast<std::size_t>(m.window);
    linalg::Matrix design(m.rows(), std::vector<double>(w + 1));
    for (std::size_t i = 0; i < m.rows(); ++i) {
        design[i][0] = 1.0;
        std::copy(m.X[i].begin(), m.X[i].end(), design[i].begin() + 1);
    }
    return linalg::ols(design, m.y).coef;
}

/// Ridge with an unpenalized intercept: columns and target are centered,
/// (Xc'Xc + alpha I) beta = Xc'y is solved, and the intercept recovered.
inline std::vector<double> fit_ridge(const LagMatrix& m, double alpha) {
    if (alpha < 0.0) throw SingularRegression("ridge penalty must be non-negative");
    if (m.rows() < 2) throw TooShort("ridge requires at least 2 rows");
    if (alpha == 0.0) return fit_ols(m);

    const auto w = static_cast<std::size_t>(m.window);
    const auto n = m.rows();
    std::vector<double> xbar(w, 0.0);
    for (const auto& row : m.X)
        for (std::size_t j = 0; j < w; ++j) xbar[j] += row[j];
    for (double& v : xbar) v /= static_cast<double>(n);
    const double ybar = linalg::mean(m.y);

    linalg::Matrix xtx(w, std::vector<double>(w, 0.0));
    std::vector<double> xty(w, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            const double xc = m.X[i][j] - xbar[j];
            xty[j] += xc * (m.y[i] - ybar);
            for (std::size_t l = j; l < w; ++l) xtx[j][l] += xc * (m.X[i][l] - xbar[l]);
        }
    for (std::size_t j = 0; j < w; ++j) {
        for (std::size_t l = 0; l < j; ++l) xtx[j][l] = xtx[l][j];
        xtx[j][j] += alpha;
    }
    const auto slopes = linalg::solve(std::move(xtx), std::move(xty));

    std::vector<double> coef(w + 1);
    coef[0] = ybar;
    for (std::size_t j = 0; j < w; ++j) {
        coef[j + 1] = slopes[j];
        coef[0] -= slopes[j] * xbar[j];
    }
    return coef;
}

inline double predict_linear(std::span<const double> coef, std::span<const double> q) {
    double yhat = coef[0];
    for (std::size_t j = 0; j < q.size(); ++j) yhat += coef[j + 1] * q[j];
    return yhat;
}

// ---------------------------------------------------------------------------
// k-nearest neighbours

enum class KnnWeighting { Uniform, InverseDistance };

/// Euclidean k-NN over the embedded rows. Distance ties break toward the
/// lower row index; an exact match (distance 0) under inverse-distance
/// weighting returns that row's target directly.
inline double predict_knn(const LagMatrix& m, std::span<const double> q, int k,
                          KnnWeighting weighting) {
    if (k < 1 || static_cast<std::size_t>(k) > m.rows())
        throw KTooLarge("k must satisfy 1 <= k <= rows");
    if (q.size() != static_cast<std::size_t>(m.window))
        throw LengthMismatch("query length must equal the window");

    std::vector<std::pair<double, std::size_t>> dist(m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double e = m.X[i][j] - q[j];
            d2 += e * e;
        }
        dist[i] = {std::sqrt(d2), i};
    }
    std::sort(dist.begin(), dist.end());  // (distance, row index) lexicographic

    if (weighting == KnnWeighting::Uniform) {
        double s = 0.0;
        for (int i = 0; i < k; ++i) s += m.y[dist[static_cast<std::size_t>(i)].second];
        return s / k;
    }
    if (dist[0].first == 0.0) return m.y[dist[0].second];
    double num = 0.0, den = 0.0;
    for (int i = 0; i < k; ++i) {
        const auto& [d, idx] = dist[static_cast<std::size_t>(i)];
        num += m.y[idx] / d;
        den += 1.0 / d;
    }
    return num / den;
}

// ---------------------------------------------------------------------------
// regression tree

/// Binary regression tree grown by greedy variance reduction over all
/// (feature, midpoint-between-sorted-values) candidates. Split ties break by
/// (lower feature index, lower threshold); leaves predict the mean target.
struct CartTree {
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        double value = 0.0;
        int left = -1, right = -1;
    };
    std::vector<Node> nodes;
    int root = -1;
};

namespace detail {

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double sse_after = 0.0;
};

inline SplitChoice best_split(const LagMatrix& m, const std::vector<std::size_t>& idx,
                              int min_leaf) {
    SplitChoice best;
    const auto n = idx.size();
    const auto w = static_cast<std::size_t>(m.window);

    double total = 0.0, total2 = 0.0;
    for (auto i : idx) {
        total += m.y[i];
        total2 += m.y[i] * m.y[i];
    }
    const double parent_sse = total2 - total * total / static_cast<double>(n);

    std::vector<std::pair<double, double>> pts(n);  // (feature value, target)
    for (std::size_t f = 0; f < w; ++f) {
        for (std::size_t r = 0; r < n; ++r) pts[r] = {m.X[idx[r]][f], m.y[idx[r]]};
        std::sort(pts.begin(), pts.end());

        double lsum = 0.0, lsum2 = 0.0;
        for (std::size_t r = 0; r + 1 < n; ++r) {
            lsum += pts[r].second;
            lsum2 += pts[r].second * pts[r].second;
            if (pts[r].first == pts[r + 1].first) continue;  // no midpoint between equals
            const auto nl = static_cast<double>(r + 1);
            const auto nr = static_cast<double>(n - r - 1);
            if (nl < min_leaf || nr < min_leaf) continue;
            const double rsum = total - lsum;
            const double rsum2 = total2 - lsum2;
            const double sse = (lsum2 - lsum * lsum / nl) + (rsum2 - rsum * rsum / nr);
            // candidates are visited in ascending (feature, threshold) order,
            // so keeping the first strict minimum realizes the tie rule
            if (!best.found || sse < best.sse_after) {
                best.found = true;
                best.feature = static_cast<int>(f);
                best.threshold = 0.5 * (pts[r].first + pts[r + 1].first);
                best.sse_after = sse;
            }
        }
    }
    if (best.found && !(best.sse_after < parent_sse * (1.0 - 1e-12)))
        best.found = false;  // no genuine variance reduction
    return best;
}

inline int grow(CartTree& tree, const LagMatrix& m, std::vector<std::size_t> idx, int depth,
                int max_depth, int min_leaf) {
    CartTree::Node node;
    double mean = 0.0;
    for (auto i : idx) mean += m.y[i];
    node.value = mean / static_cast<double>(idx.size());

    if (depth < max_depth && idx.size() >= 2 * static_cast<std::size_t>(min_leaf)) {
        const auto split = best_split(m, idx, min_leaf);
        if (split.found) {
            std::vector<std::size_t> left, right;
            for (auto i : idx)
                (m.X[i][static_cast<std::size_t>(split.feature)] < split.threshold ? left : right)
                    .push_back(i);
            node.feature = split.feature;
            node.threshold = split.threshold;
            const int self = static_cast<int>(tree.nodes.size());
            tree.nodes.push_back(node);
            const int l = grow(tree, m, std::move(left), depth + 1, max_depth, min_leaf);
            const int r = grow(tree, m, std::move(right), depth + 1, max_depth, min_leaf);
            tree.nodes[static_cast<std::size_t>(self)].left = l;
            tree.nodes[static_cast<std::size_t>(self)].right = r;
            return self;
        }
    }
    tree.nodes.push_back(node);
    return static_cast<int>(tree.nodes.size()) - 1;
}

}  // namespace detail

inline CartTree fit_cart(const LagMatrix& m, int max_depth, int min_leaf) {
    if (max_depth < 1 || min_leaf < 1) throw TooShort("max_depth and min_leaf must be >= 1");
    if (m.rows() < 2 * static_cast<std::size_t>(min_leaf))
        throw TooShort("fit_cart requires at least 2*min_leaf rows");
    CartTree tree;
    std::vector<std::size_t> idx(m.rows());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    tree.root = detail::grow(tree, m, std::move(idx), 0, max_depth, min_leaf);
    return tree;
}

inline double predict_cart(const CartTree& tree, std::span<const double> q) {
    int i = tree.root;
    while (tree.nodes[static_cast<std::size_t>(i)].feature >= 0) {
        const auto& node = tree.nodes[static_cast<std::size_t>(i)];
        i = q[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right;
    }
    return tree.nodes[static_cast<std::size_t>(i)].value;
}

// ---------------------------------------------------------------------------
// recursive multi-step forecasting

/// Step k predicts from the last W values of (history ++ predictions so far),
/// appends the prediction, and repeats h times.
inline forecast::Forecast recursive_forecast(
    const std::function<double(std::span<const double>)>& one_step, std::span<const double> history,
    int window, int h) {
    if (window < 1 || history.size() < static_cast<std::size_t>(window))
        throw WindowTooLarge("recursive_forecast requires history length >= window >= 1");
    if (h < 1) throw TooShort("horizon must be >= 1");

    std::vector<double> buf(history.begin(), history.end());
    forecast::Forecast f;
    f.origin = static_cast<long>(history.size()) - 1;
    f.values.reserve(static_cast<std::size_t>(h));
    for (int k = 0; k < h; ++k) {
        const std::span<const double> q(buf.data() + buf.size() - static_cast<std::size_t>(window),
                                        static_cast<std::size_t>(window));
        const double yhat = one_step(q);
        buf.push_back(yhat);
        f.values.push_back(yhat);
    }
    return f;
}

}  // namespace gmtbench::lagreg
