#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmtbench/errors.hpp"
#include "gmtbench/linalg.hpp"
#include "gmtbench/rng.hpp"

namespace gmtbench::ingest {

/// An annual series of temperature anomalies: consecutive calendar years with
/// one finite value each.
struct AnnualSeries {
    std::vector<int> years;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

struct DescriptiveStats {
    long count = 0;
    double mean = 0, std = 0, min = 0, q25 = 0, median = 0, q75 = 0, max = 0;
    double kurtosis = 0, skewness = 0;
};

enum class OutlierMethod { Iqr, IsolationForest };

struct OutlierReport {
    OutlierMethod method = OutlierMethod::Iqr;
    std::vector<int> flagged_years;
    std::vector<double> scores;  // one per observation, series order
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
}

inline bool parse_number(const std::string& cell, double& out) {
    const char* s = cell.c_str();
    char* end = nullptr;
    const double v = std::strtod(s, &end);
    if (end == s || !std::isfinite(v)) return false;
    while (*end == ' ' || *end == '\r' || *end == '\t') ++end;
    if (*end != '\0') return false;
    out = v;
    return true;
}

/// Type-7 quantile (linear interpolation between order statistics).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const std::size_t n = sorted.size();
    const double pos = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= n) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace detail

inline void validate(const AnnualSeries& s) {
    if (s.years.size() != s.values.size() || s.size() < 2)
        throw EmptySeries("series must hold at least two (year, value) rows");
    for (std::size_t i = 1; i < s.years.size(); ++i)
        if (s.years[i] != s.years[i - 1] + 1)
            throw NonConsecutiveYears("gap between " + std::to_string(s.years[i - 1]) + " and " +
                                      std::to_string(s.years[i]));
    for (double v : s.values)
        if (!std::isfinite(v)) throw EmptySeries("non-finite value in series");
}

/// Parse a GISTEMP "Land-Ocean Temperature Index" CSV. Preamble lines before
/// the "Year,..." header are skipped, the requested column is selected by
/// name, and rows whose cell is the missing marker "***" (or otherwise not a
/// number) are dropped; such rows are only tolerated at the tail, since an
/// interior drop would leave a gap in the years.
inline AnnualSeries parse_gistemp(std::istream& in, const std::string& column = "J-D") {
    std::string line;
    std::ptrdiff_t col = -1;
    while (std::getline(in, line)) {
        if (line.rfind("Year,", 0) != 0) continue;
        const auto header = detail::split_csv(line);
        for (std::size_t i = 0; i < header.size(); ++i) {
            std::string name = header[i];
            while (!name.empty() && (name.back() == '\r' || name.back() == ' ')) name.pop_back();
            if (name == column) {
                col = static_cast<std::ptrdiff_t>(i);
                break;
            }
        }
        if (col < 0) throw MissingColumn("column \"" + column + "\" not found in header");
        break;
    }
    if (col < 0) throw MissingColumn("no \"Year,...\" header row found");

    AnnualSeries s;
    while (std::getline(in, line)) {
        if (line.empty() || line.rfind("Year,", 0) == 0) continue;
        const auto cells = detail::split_csv(line);
        double year = 0, value = 0;
        if (cells.empty() || !detail::parse_number(cells[0], year)) continue;
        if (static_cast<std::size_t>(col) >= cells.size() ||
            !detail::parse_number(cells[static_cast<std::size_t>(col)], value))
            continue;  // missing marker; legal only at the tail, checked below
        s.years.push_back(static_cast<int>(year));
        s.values.push_back(value);
    }
    if (s.size() == 0) throw EmptySeries("no parsable data rows");
    if (s.size() == 1) throw EmptySeries("only one parsable data row");
    validate(s);
    return s;
}

inline AnnualSeries parse_gistemp(const std::string& text, const std::string& column = "J-D") {
    std::istringstream in(text);
    return parse_gistemp(in, column);
}

/// Serialize with round-trip precision; parse_gistemp reads this back.
inline std::string to_csv(const AnnualSeries& s) {
    std::string out = "Year,J-D\n";
    char buf[64];
    for (std::size_t i = 0; i < s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%.17g\n", s.years[i], s.values[i]);
        out += buf;
    }
    return out;
}

/// Descriptive statistics matching the conventions of mainstream data-frame
/// tools: sample std (n-1), adjusted Fisher-Pearson skewness, unbiased excess
/// kurtosis, type-7 quartiles. A zero-variance series reports skewness and
/// kurtosis as 0.
inline DescriptiveStats describe(const AnnualSeries& s) {
    const std::size_t n = s.size();
    if (n < 4) throw TooShort("describe requires at least 4 observations");
    const auto nd = static_cast<double>(n);

    DescriptiveStats d;
    d.count = static_cast<long>(n);
    d.mean = linalg::mean(s.values);

    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : s.values) {
        const double e = v - d.mean;
        m2 += e * e;
        m3 += e * e * e;
        m4 += e * e * e * e;
    }
    d.std = std::sqrt(m2 / (nd - 1.0));
    m2 /= nd;
    m3 /= nd;
    m4 /= nd;
    if (m2 > 0) {
        d.skewness = std::sqrt(nd * (nd - 1.0)) / (nd - 2.0) * m3 / std::pow(m2, 1.5);
        const double g2 = m4 / (m2 * m2) - 3.0;
        d.kurtosis = ((nd + 1.0) * g2 + 6.0) * (nd - 1.0) / ((nd - 2.0) * (nd - 3.0));
    }

    std::vector<double> sorted = s.values;
    std::sort(sorted.begin(), sorted.end());
    d.min = sorted.front();
    d.max = sorted.back();
    d.q25 = detail::quantile_sorted(sorted, 0.25);
    d.median = detail::quantile_sorted(sorted, 0.50);
    d.q75 = detail::quantile_sorted(sorted, 0.75);
    return d;
}

/// Tukey fences: flag observations outside [q25 - 1.5 IQR, q75 + 1.5 IQR].
/// Scores are the signed distance beyond the nearest fence, 0 inside.
inline OutlierReport detect_outliers_iqr(const AnnualSeries& s) {
    if (s.size() < 4) throw TooShort("detect_outliers_iqr requires at least 4 observations");
    std::vector<double> sorted = s.values;
    std::sort(sorted.begin(), sorted.end());
    const double q25 = detail::quantile_sorted(sorted, 0.25);
    const double q75 = detail::quantile_sorted(sorted, 0.75);
    const double iqr = q75 - q25;
    const double lo = q25 - 1.5 * iqr;
    const double hi = q75 + 1.5 * iqr;

    OutlierReport r;
    r.method = OutlierMethod::Iqr;
    r.scores.resize(s.size(), 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double v = s.values[i];
        if (v > hi) {
            r.scores[i] = v - hi;
            r.flagged_years.push_back(s.years[i]);
        } else if (v < lo) {
            r.scores[i] = v - lo;
            r.flagged_years.push_back(s.years[i]);
        }
    }
    return r;
}

namespace detail {

struct IsoNode {
    double split = 0;
    int left = -1, right = -1;  // -1 marks a leaf
    int size = 0;
};

inline double avg_path_length(int m) {
    if (m <= 1) return 0.0;
    if (m == 2) return 1.0;
    const double h = std::log(m - 1.0) + 0.5772156649015329;
    return 2.0 * h - 2.0 * (m - 1.0) / m;
}

struct IsoTree {
    std::vector<IsoNode> nodes;

    int build(std::vector<double>& pts, int lo, int hi, int depth, int max_depth,
              std::mt19937_64& gen) {
        IsoNode node;
        node.size = hi - lo;
        const auto [mn, mx] = std::minmax_element(pts.begin() + lo, pts.begin() + hi);
        if (node.size <= 1 || depth >= max_depth || *mn == *mx) {
            nodes.push_back(node);
            return static_cast<int>(nodes.size()) - 1;
        }
        node.split = rng::uniform_real(gen, *mn, *mx);
        const auto mid = std::partition(pts.begin() + lo, pts.begin() + hi,
                                        [&](double v) { return v < node.split; });
        int cut = static_cast<int>(mid - pts.begin());
        if (cut == lo || cut == hi) {  // degenerate random split, fall back to midpoint
            node.split = 0.5 * (*mn + *mx);
            const auto mid2 = std::partition(pts.begin() + lo, pts.begin() + hi,
                                             [&](double v) { return v < node.split; });
            cut = static_cast<int>(mid2 - pts.begin());
        }
        const int self = static_cast<int>(nodes.size());
        nodes.push_back(node);
        const int l = build(pts, lo, cut, depth + 1, max_depth, gen);
        const int r = build(pts, cut, hi, depth + 1, max_depth, gen);
        nodes[self].left = l;
        nodes[self].right = r;
        return self;
    }

    double path_from_root(double v) const { return path_from(root, v, 0); }

    int root = -1;

private:
    double path_from(int idx, double v, int depth) const {
        const IsoNode& n = nodes[idx];
        if (n.left < 0) return depth + avg_path_length(n.size);
        return path_from(v < n.split ? n.left : n.right, v, depth + 1);
    }
};

}  // namespace detail

/// Standard isolation forest on the univariate values: per-tree subsample of
/// min(64, n), random splits, path-length anomaly score in [0,1]. Flags the
/// top-k scores where k is the number of IQR flags, so the two methods yield
/// comparable sets. Deterministic for a fixed seed.
inline OutlierReport detect_outliers_iforest(const AnnualSeries& s, int trees,
                                             std::uint64_t seed) {
    const std::size_t n = s.size();
    if (n < 8) throw TooShort("detect_outliers_iforest requires at least 8 observations");
    if (trees < 1) throw TooShort("detect_outliers_iforest requires at least one tree");

    const int psi = static_cast<int>(std::min<std::size_t>(64, n));
    const int max_depth = static_cast<int>(std::ceil(std::log2(static_cast<double>(psi))));
    std::mt19937_64 gen(seed);

    std::vector<double> total_path(n, 0.0);
    std::vector<std::size_t> idx(n);
    for (int t = 0; t < trees; ++t) {
        // partial Fisher-Yates: subsample of psi points without replacement
        std::iota(idx.begin(), idx.end(), 0);
        std::vector<double> sample(psi);
        for (int i = 0; i < psi; ++i) {
            const auto j = static_cast<std::size_t>(rng::uniform_int(
                gen, i, static_cast<long>(n) - 1));
            std::swap(idx[static_cast<std::size_t>(i)], idx[j]);
            sample[static_cast<std::size_t>(i)] = s.values[idx[static_cast<std::size_t>(i)]];
        }
        detail::IsoTree tree;
        tree.root = tree.build(sample, 0, psi, 0, max_depth, gen);
        for (std::size_t i = 0; i < n; ++i) total_path[i] += tree.path_from_root(s.values[i]);
    }

    OutlierReport r;
    r.method = OutlierMethod::IsolationForest;
    r.scores.resize(n);
    const double c = detail::avg_path_length(psi);
    for (std::size_t i = 0; i < n; ++i)
        r.scores[i] = std::pow(2.0, -(total_path[i] / trees) / c);

    const auto k = detect_outliers_iqr(s).flagged_years.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (r.scores[a] != r.scores[b]) return r.scores[a] > r.scores[b];
        return s.years[a] < s.years[b];
    });
    for (std::size_t i = 0; i < k && i < n; ++i)
        r.flagged_years.push_back(s.years[order[i]]);
    std::sort(r.flagged_years.begin(), r.flagged_years.end());
    return r;
}

inline void to_json(nlohmann::json& j, const DescriptiveStats& d) {
    j = nlohmann::json{{"count", d.count},       {"mean", d.mean},
                       {"std", d.std},           {"min", d.min},
                       {"q25", d.q25},           {"median", d.median},
                       {"q75", d.q75},           {"max", d.max},
                       {"kurtosis", d.kurtosis}, {"skewness", d.skewness}};
}

inline void to_json(nlohmann::json& j, const OutlierReport& r) {
    j = nlohmann::json{
        {"method", r.method == OutlierMethod::Iqr ? "IQR" : "IsolationForest"},
        {"flagged_years", r.flagged_years},
        {"scores", r.scores}};
}

}  // namespace gmtbench::ingest
