#pragma once

// CSV ingestion and serialization of graphs, equivalence checks and Monte
// Carlo reports (JSON, DOT, TSV).

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ggm/ci_tests.hpp"
#include "ggm/errors.hpp"
#include "ggm/estimators.hpp"
#include "ggm/graph.hpp"
#include "ggm/simulate.hpp"

namespace ggm::io {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

/// 17 significant digits, the text form used for every numeric output.
inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Header row of variable names followed by one comma-separated row per
/// observation. Empty lines are skipped; empty or non-numeric cells are
/// errors naming the 1-based line and column.
inline Dataset read_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> names;
    while (std::getline(in, line)) {
        ++line_no;
        if (!detail::trim(line).empty()) break;
    }
    if (detail::trim(line).empty()) throw ParseError("empty input: no header row");
    for (auto cell : detail::split(line)) {
        if (cell.empty()) throw ParseError("line " + std::to_string(line_no) + ": empty variable name");
        names.emplace_back(cell);
    }
    const std::size_t dim = names.size();
    std::vector<double> values;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto cells = detail::split(line);
        if (cells.size() != dim) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                             " columns, found " + std::to_string(cells.size()));
        }
        for (std::size_t col = 0; col < dim; ++col) {
            const auto cell = cells[col];
            double v = 0.0;
            const auto* begin = cell.data();
            const auto* end = cell.data() + cell.size();
            if (!cell.empty() && *begin == '+') ++begin;
            const auto [ptr, ec] = std::from_chars(begin, end, v);
            if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
                throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(col + 1) +
                                 " (" + names[col] + "): non-numeric cell '" + std::string(cell) + "'");
            }
            values.push_back(v);
        }
        ++rows;
    }
    if (rows < 2 || rows <= dim) {
        throw InsufficientSample(std::to_string(rows) + " observation rows for " + std::to_string(dim) +
                                 " variables (need more rows than variables)");
    }
    try {
        return Dataset(rows, dim, std::move(values), std::move(names));
    } catch (const DomainError& e) {
        throw ParseError(e.what());
    }
}

inline Dataset read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    return read_csv(in);
}

inline void write_csv(std::ostream& out, const Dataset& d) {
    for (std::size_t k = 0; k < d.dim(); ++k) out << (k ? "," : "") << d.names()[k];
    out << '\n';
    for (std::size_t t = 0; t < d.n(); ++t) {
        for (std::size_t k = 0; k < d.dim(); ++k) out << (k ? "," : "") << format_number(d(t, k));
        out << '\n';
    }
}

inline Json decision_json(const EdgeDecision& d) {
    Json j;
    j["i"] = d.i;
    j["j"] = d.j;
    j["statistic"] = d.statistic;
    j["lower"] = d.lower;
    j["upper"] = d.upper;
    j["p_value"] = d.p_value;
    j["reject"] = d.reject;
    j["level"] = d.level;
    j["p_value_kind"] = d.asymptotic ? "asymptotic" : "exact";
    return j;
}

inline Json graph_json(const ConcentrationGraph& g) {
    Json j;
    j["n"] = g.n;
    j["N"] = g.dim;
    j["alpha"] = g.alpha;
    j["method"] = std::string(to_string(g.method));
    j["correction"] = std::string(to_string(g.correction));
    j["variables"] = g.names;
    Json edges = Json::array();
    for (const auto& [a, b] : g.edges) {
        edges.push_back(Json{{"i", a}, {"j", b}, {"source", g.names[a]}, {"target", g.names[b]}});
    }
    j["edges"] = std::move(edges);
    Json decisions = Json::array();
    for (const auto& d : g.decisions) decisions.push_back(decision_json(d));
    j["decisions"] = std::move(decisions);
    return j;
}

/// JSON text with every floating value printed to 17 significant digits.
inline std::string dump(const Json& j) {
    // nlohmann prints the shortest round-trip form; re-serialize numbers
    // ourselves so the digit count is fixed.
    std::string out;
    const auto emit = [&](const auto& self, const Json& v, int indent) -> void {
        const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
        const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
        if (v.is_object()) {
            if (v.empty()) {
                out += "{}";
                return;
            }
            out += "{\n";
            bool first = true;
            for (const auto& [key, val] : v.items()) {
                if (!first) out += ",\n";
                first = false;
                out += inner + Json(key).dump() + ": ";
                self(self, val, indent + 1);
            }
            out += "\n" + pad + "}";
        } else if (v.is_array()) {
            if (v.empty()) {
                out += "[]";
                return;
            }
            out += "[\n";
            bool first = true;
            for (const auto& val : v) {
                if (!first) out += ",\n";
                first = false;
                out += inner;
                self(self, val, indent + 1);
            }
            out += "\n" + pad + "]";
        } else if (v.is_number_float()) {
            const double x = v.get<double>();
            out += std::isfinite(x) ? format_number(x) : "null";
        } else {
            out += v.dump();
        }
    };
    emit(emit, j, 0);
    out += '\n';
    return out;
}

inline std::string dot_quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

/// Undirected DOT graph listing every vertex and the selected edges.
inline std::string graph_dot(const ConcentrationGraph& g) {
    std::ostringstream out;
    out << "graph concentration {\n";
    for (const auto& name : g.names) out << "  " << dot_quote(name) << ";\n";
    for (const auto& [a, b] : g.edges) {
        out << "  " << dot_quote(g.names[a]) << " -- " << dot_quote(g.names[b]) << ";\n";
    }
    out << "}\n";
    return out.str();
}

inline std::string graph_tsv(const ConcentrationGraph& g) {
    std::ostringstream out;
    out << "i\tj\tsource\ttarget\tstatistic\tlower\tupper\tp_value\treject\n";
    for (const auto& d : g.decisions) {
        out << d.i << '\t' << d.j << '\t' << g.names[d.i] << '\t' << g.names[d.j] << '\t'
            << format_number(d.statistic) << '\t' << format_number(d.lower) << '\t' << format_number(d.upper)
            << '\t' << format_number(d.p_value) << '\t' << (d.reject ? 1 : 0) << '\n';
    }
    return out.str();
}

inline Json rates_json(const std::vector<MethodRate>& rates) {
    Json arr = Json::array();
    for (const auto& r : rates) {
        arr.push_back(Json{{"method", std::string(to_string(r.method))},
                           {"rejections", r.rejections},
                           {"rejection_rate", r.rejection_rate},
                           {"std_error", r.std_error}});
    }
    return arr;
}

inline Json report_json(const MonteCarloReport& r) {
    Json j;
    j["replications"] = r.replications;
    j["seed"] = r.seed;
    j["n"] = r.n;
    j["N"] = r.dim;
    j["i"] = r.i;
    j["j"] = r.j;
    j["alpha"] = r.alpha;
    j["true_partial_correlation"] = r.true_partial_correlation;
    j["rejection_rate"] = r.rejection_rate;
    j["std_error"] = r.std_error;
    j["methods"] = rates_json(r.methods);
    j["ks_statistic"] = r.ks_statistic ? Json(*r.ks_statistic) : Json(nullptr);
    j["fisher_exact_agreement"] = r.fisher_exact_agreement ? Json(*r.fisher_exact_agreement) : Json(nullptr);
    j["matched_null"] = r.matched_null ? rates_json(*r.matched_null) : Json(nullptr);
    return j;
}

inline Json summary_json(const EquivalenceSummary& s, double tolerance) {
    Json j;
    j["instances"] = s.instances;
    j["edges_checked"] = s.edges_checked;
    j["rejections"] = s.rejections;
    j["disagreements"] = s.disagreements;
    j["max_statistic_gap"] = s.max_statistic_gap;
    j["max_magnitude_gap"] = s.max_magnitude_gap;
    j["max_threshold_gap"] = s.max_threshold_gap;
    j["tolerance"] = tolerance;
    j["passed"] = s.passed(tolerance);
    return j;
}

}  // namespace ggm::io
