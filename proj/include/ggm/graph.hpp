#pragma once

// Concentration graph selection: one conditional-independence test per
// unordered pair, optionally with a family-wise correction.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ggm/ci_tests.hpp"
#include "ggm/estimators.hpp"

namespace ggm {

/// Family-wise corrections. These sit outside the optimality argument for
/// the per-edge tests; `none` tests every edge at exactly alpha.
enum class Correction { none, bonferroni, holm };

inline std::string_view to_string(Correction c) {
    switch (c) {
        case Correction::none: return "none";
        case Correction::bonferroni: return "bonferroni";
        case Correction::holm: return "holm";
    }
    return "unknown";
}

inline Correction parse_correction(std::string_view s) {
    if (s == "none") return Correction::none;
    if (s == "bonferroni") return Correction::bonferroni;
    if (s == "holm") return Correction::holm;
    throw DomainError("unknown correction '" + std::string(s) + "' (expected none, bonferroni or holm)");
}

using Edge = std::pair<std::size_t, std::size_t>;

/// All pairs (i, j), i < j, in lexicographic order.
inline std::vector<Edge> all_edges(std::size_t dim) {
    std::vector<Edge> out;
    out.reserve(dim * (dim > 0 ? dim - 1 : 0) / 2);
    for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i + 1; j < dim; ++j) out.emplace_back(i, j);
    }
    return out;
}

struct ConcentrationGraph {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<std::string> names;
    double alpha = 0.05;
    Method method = Method::umpu;
    Correction correction = Correction::none;
    /// Rejected pairs, lexicographic.
    std::vector<Edge> edges;
    /// One decision per pair, lexicographic.
    std::vector<EdgeDecision> decisions;

    bool has_edge(std::size_t i, std::size_t j) const {
        const Edge e{std::min(i, j), std::max(i, j)};
        return std::binary_search(edges.begin(), edges.end(), e);
    }
};

namespace detail {

inline SymmetricMatrix checked_covariance(const Dataset& d) {
    ggm::require_sample(static_cast<std::int64_t>(d.n()), static_cast<std::int64_t>(d.dim()));
    if (d.dim() < 2) throw DomainError("graph selection needs at least two variables");
    SymmetricMatrix s = sample_covariance(d);
    require_positive_definite(s, "sample covariance");
    return s;
}

}  // namespace detail

/// Tests every pair and keeps the rejected ones as edges.
///
/// With Bonferroni each pair is tested at alpha / M. With Holm the p-values
/// are stepped down in increasing order; each decision is then re-evaluated
/// at the level Holm effectively assigned to it, so that the stored
/// thresholds stay consistent with the reject flag.
inline ConcentrationGraph select_graph(const Dataset& d, const TestConfig& cfg,
                                       Correction correction = Correction::none) {
    require_alpha(cfg.alpha);
    const SymmetricMatrix s = detail::checked_covariance(d);
    const auto n = static_cast<std::int64_t>(d.n());
    const auto pairs = all_edges(d.dim());
    const double m = static_cast<double>(pairs.size());

    ConcentrationGraph g;
    g.n = d.n();
    g.dim = d.dim();
    g.names = d.names();
    g.alpha = cfg.alpha;
    g.method = cfg.method;
    g.correction = correction;
    g.decisions.reserve(pairs.size());

    switch (correction) {
        case Correction::none:
        case Correction::bonferroni: {
            const double level = correction == Correction::none ? cfg.alpha : cfg.alpha / m;
            for (const auto& [i, j] : pairs) g.decisions.push_back(run_test(cfg.method, s, i, j, n, level));
            break;
        }
        case Correction::holm: {
            std::vector<EdgeDecision> raw;
            raw.reserve(pairs.size());
            for (const auto& [i, j] : pairs) raw.push_back(run_test(cfg.method, s, i, j, n, cfg.alpha));
            std::vector<std::size_t> order(raw.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
                return raw[x].p_value < raw[y].p_value;
            });
            std::vector<double> level(raw.size());
            std::vector<bool> holm_reject(raw.size(), false);
            bool stopped = false;
            double stop_level = 0.0;
            for (std::size_t k = 0; k < order.size(); ++k) {
                const double step = cfg.alpha / (m - static_cast<double>(k));
                if (!stopped && raw[order[k]].p_value <= step) {
                    holm_reject[order[k]] = true;
                    level[order[k]] = step;
                } else {
                    if (!stopped) stop_level = step;
                    stopped = true;
                    level[order[k]] = stop_level;
                }
            }
            for (std::size_t k = 0; k < raw.size(); ++k) {
                EdgeDecision dec = run_test(cfg.method, s, raw[k].i, raw[k].j, n, level[k]);
                dec.reject = holm_reject[k];
                g.decisions.push_back(dec);
            }
            break;
        }
    }

    for (const auto& dec : g.decisions) {
        if (dec.reject) g.edges.emplace_back(dec.i, dec.j);
    }
    return g;
}

struct EdgePValue {
    std::size_t i = 0;
    std::size_t j = 0;
    double p_value = 1.0;
};

/// p-value of every pair under the method's null law, lexicographic order.
inline std::vector<EdgePValue> edge_pvalues(const Dataset& d, Method method) {
    const SymmetricMatrix s = detail::checked_covariance(d);
    const auto n = static_cast<std::int64_t>(d.n());
    std::vector<EdgePValue> out;
    for (const auto& [i, j] : all_edges(d.dim())) {
        out.push_back({i, j, run_test(method, s, i, j, n, 0.05).p_value});
    }
    return out;
}

}  // namespace ggm
