// ggm: concentration-graph selection from the command line.
//
//   ggm select     --input data.csv [--alpha A] [--method M] [--correction C] [--format F]
//   ggm verify     [--input data.csv] [--reps K] [--seed S]
//   ggm montecarlo [--dim N] [--n n] [--rho R] [--reps K] [--seed S]
//   ggm quantile   --alpha A --n n --dim N  |  --prob P --shape M
//
// Exit status: 0 success, 1 usage, 2 data, 3 equivalence-check failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"

#include "ggm/ggm.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitVerify = 3;

struct RunConfig {
    std::string input;
    std::string out;
    double alpha = 0.05;
    std::string method = "umpu";
    std::string correction = "none";
    std::string format = "json";
    std::uint64_t seed = 20240601;
    std::uint32_t reps = 0;
    std::size_t n = 25;
    std::size_t dim = 5;
    double rho = 0.0;
    double prob = 0.0;
    double shape = 0.0;
    unsigned threads = 0;
    bool sign_flip = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void emit(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(cfg.out);
    if (!f) throw UsageError("cannot write '" + cfg.out + "'");
    f << text;
}

const CLI::Validator open_unit = CLI::Validator(
    [](const std::string& s) -> std::string {
        double v = 0.0;
        try {
            v = std::stod(s);
        } catch (...) {
            return "not a number: " + s;
        }
        return (v > 0.0 && v < 1.0) ? std::string() : "value must lie strictly inside (0, 1)";
    },
    "(0,1)");

int run_select(const RunConfig& cfg) {
    const ggm::Method method = ggm::parse_method(cfg.method);
    const ggm::Correction correction = ggm::parse_correction(cfg.correction);
    const ggm::Dataset data = ggm::io::read_csv_file(cfg.input);
    const auto graph = ggm::select_graph(data, ggm::TestConfig::make(cfg.alpha, method), correction);
    if (cfg.format == "json") {
        emit(cfg, ggm::io::dump(ggm::io::graph_json(graph)));
    } else if (cfg.format == "dot") {
        emit(cfg, ggm::io::graph_dot(graph));
    } else {
        emit(cfg, ggm::io::graph_tsv(graph));
    }
    return 0;
}

int run_verify(const RunConfig& cfg) {
    constexpr double tolerance = 1e-9;
    if (!cfg.input.empty()) {
        const ggm::Dataset data = ggm::io::read_csv_file(cfg.input);
        const ggm::SymmetricMatrix s = ggm::sample_covariance(data);
        ggm::require_sample(static_cast<std::int64_t>(data.n()), static_cast<std::int64_t>(data.dim()));
        const auto n = static_cast<std::int64_t>(data.n());
        using ggm::io::format_number;
        std::ostringstream out;
        out << "i\tj\tsource\ttarget\ts_ij\tumpu_t\tpartial_r\tlower\tupper\tc_lower\tc_upper\t"
               "umpu_reject\tpartial_reject\tgap\n";
        ggm::EquivalenceSummary summary;
        summary.instances = 1;
        for (const auto& [i, j] : ggm::all_edges(data.dim())) {
            const auto rep = ggm::verify_equivalence(s, i, j, n, cfg.alpha, cfg.sign_flip);
            const auto detail = ggm::umpu_detail(s, i, j, n, cfg.alpha);
            ggm::accumulate(summary, rep);
            out << i << '\t' << j << '\t' << data.names()[i] << '\t' << data.names()[j] << '\t'
                << format_number(detail.raw_value) << '\t' << format_number(rep.umpu.statistic) << '\t'
                << format_number(rep.partial_corr.statistic) << '\t' << format_number(rep.umpu.lower) << '\t'
                << format_number(rep.umpu.upper) << '\t' << format_number(detail.raw_lower) << '\t'
                << format_number(detail.raw_upper) << '\t' << rep.umpu.reject << '\t'
                << rep.partial_corr.reject << '\t' << format_number(rep.statistic_gap) << '\n';
        }
        out << "# edges " << summary.edges_checked << ", disagreements " << summary.disagreements
            << ", max gap " << format_number(summary.max_statistic_gap) << ", "
            << (summary.passed(tolerance) ? "PASS" : "FAIL") << '\n';
        emit(cfg, out.str());
        return summary.passed(tolerance) ? 0 : kExitVerify;
    }
    const std::size_t count = cfg.reps ? cfg.reps : 10000;
    const auto summary = ggm::run_equivalence_suite(count, cfg.seed, cfg.sign_flip, cfg.threads);
    auto j = ggm::io::summary_json(summary, tolerance);
    j["seed"] = cfg.seed;
    emit(cfg, ggm::io::dump(j));
    return summary.passed(tolerance) ? 0 : kExitVerify;
}

int run_montecarlo(const RunConfig& cfg) {
    if (cfg.dim < 2) throw UsageError("--dim must be at least 2");
    if (cfg.n <= cfg.dim) throw UsageError("insufficient sample: --n must exceed --dim");
    if (!(std::abs(cfg.rho) < 1.0)) throw UsageError("--rho must lie in (-1, 1)");
    ggm::MonteCarloConfig mc;
    mc.n = cfg.n;
    mc.alpha = cfg.alpha;
    mc.replications = cfg.reps ? cfg.reps : 20000;
    if (mc.replications < 1000) throw UsageError("--reps must be at least 1000");
    mc.seed = cfg.seed;
    mc.threads = cfg.threads;
    const ggm::Method primary = ggm::parse_method(cfg.method);
    mc.methods = {primary};
    for (auto m : {ggm::Method::umpu, ggm::Method::partial_corr, ggm::Method::fisher}) {
        if (m != primary) mc.methods.push_back(m);
    }
    const auto spec = ggm::PrecisionSpec::single_edge(cfg.dim, 0, 1, cfg.rho);
    const auto report = cfg.rho == 0.0 ? ggm::estimate_size(spec, mc) : ggm::estimate_power(spec, mc);
    auto j = ggm::io::report_json(report);
    j["primary_method"] = std::string(ggm::to_string(primary));
    emit(cfg, ggm::io::dump(j));
    return 0;
}

int run_quantile(const RunConfig& cfg, bool have_prob) {
    ggm::io::Json j;
    if (have_prob) {
        if (!(cfg.shape > 0.0)) throw UsageError("--shape must be positive");
        j["prob"] = cfg.prob;
        j["shape"] = cfg.shape;
        j["beta_sym_quantile"] = ggm::beta_sym_quantile(cfg.prob, cfg.shape);
    } else {
        if (cfg.n <= cfg.dim) throw UsageError("insufficient sample: --n must exceed --dim");
        const double m = ggm::null_shape(static_cast<std::int64_t>(cfg.n), static_cast<std::int64_t>(cfg.dim));
        const double q = ggm::beta_sym_quantile(0.5 * cfg.alpha, m);
        j["alpha"] = cfg.alpha;
        j["n"] = cfg.n;
        j["N"] = cfg.dim;
        j["shape"] = m;
        j["beta_sym_quantile"] = q;
        j["null_corr_quantile"] =
            ggm::null_corr_quantile(cfg.alpha, static_cast<std::int64_t>(cfg.n), static_cast<std::int64_t>(cfg.dim));
        j["normal_quantile"] = ggm::std_normal_quantile(1.0 - 0.5 * cfg.alpha);
    }
    emit(cfg, ggm::io::dump(j));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian concentration graph selection by pairwise conditional-independence tests"};
    app.require_subcommand(1);
    RunConfig cfg;

    const std::vector<std::string> methods{"umpu", "partial-corr", "fisher"};

    auto* select = app.add_subcommand("select", "Select a concentration graph from a CSV dataset");
    select->add_option("--input", cfg.input, "CSV file: header row of names, one observation per row")
        ->required()
        ->check(CLI::ExistingFile);
    select->add_option("--alpha", cfg.alpha, "Significance level")->check(open_unit);
    select->add_option("--method", cfg.method, "Test")->check(CLI::IsMember(methods));
    select->add_option("--correction", cfg.correction, "Multiple-testing correction")
        ->check(CLI::IsMember({"none", "bonferroni", "holm"}));
    select->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"json", "dot", "tsv"}));
    select->add_option("--out", cfg.out, "Output file (default: stdout)");

    auto* verify = app.add_subcommand("verify", "Check that the UMPU and partial-correlation tests coincide");
    verify->add_option("--input", cfg.input, "CSV dataset for a single-instance side-by-side report")
        ->check(CLI::ExistingFile);
    verify->add_option("--alpha", cfg.alpha, "Significance level for single-instance mode")->check(open_unit);
    verify->add_option("--reps", cfg.reps, "Number of random instances (default 10000)");
    verify->add_option("--seed", cfg.seed, "Master seed");
    verify->add_option("--threads", cfg.threads, "Worker threads (0 = hardware)");
    verify->add_option("--out", cfg.out, "Output file (default: stdout)");
    verify->add_flag("--inject-sign-flip", cfg.sign_flip, "Negate the UMPU statistic (negative control)");

    auto* mc = app.add_subcommand("montecarlo", "Estimate size or power by simulation");
    mc->add_option("--dim", cfg.dim, "Number of variables N");
    mc->add_option("--n", cfg.n, "Observations per replication");
    mc->add_option("--alpha", cfg.alpha, "Significance level")->check(open_unit);
    mc->add_option("--method", cfg.method, "Primary test (all three are reported)")->check(CLI::IsMember(methods));
    mc->add_option("--rho", cfg.rho, "True partial correlation of pair (0, 1); 0 estimates size");
    mc->add_option("--reps", cfg.reps, "Replications (default 20000, minimum 1000)");
    mc->add_option("--seed", cfg.seed, "Master seed");
    mc->add_option("--threads", cfg.threads, "Worker threads (0 = hardware)");
    mc->add_option("--out", cfg.out, "Output file (default: stdout)");

    auto* quant = app.add_subcommand("quantile", "Print beta and null-correlation quantiles");
    quant->add_option("--alpha", cfg.alpha, "Significance level")->check(open_unit);
    quant->add_option("--n", cfg.n, "Sample size");
    quant->add_option("--dim", cfg.dim, "Number of variables N");
    auto* prob_opt = quant->add_option("--prob", cfg.prob, "Probability for a direct Be(m, m) quantile")
                         ->check(open_unit);
    auto* shape_opt = quant->add_option("--shape", cfg.shape, "Shape m of Be(m, m)");
    prob_opt->needs(shape_opt);
    shape_opt->needs(prob_opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    const bool data_command = select->parsed() || verify->parsed();
    try {
        if (select->parsed()) return run_select(cfg);
        if (verify->parsed()) return run_verify(cfg);
        if (mc->parsed()) return run_montecarlo(cfg);
        return run_quantile(cfg, prob_opt->count() > 0);
    } catch (const UsageError& e) {
        std::cerr << "ggm: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ggm::Error& e) {
        std::cerr << "ggm: " << e.what() << '\n';
        return data_command ? kExitData : kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "ggm: " << e.what() << '\n';
        return kExitUsage;
    }
}
