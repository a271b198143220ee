// pmatrix: P-matrix violation search laboratory.
//
// Subcommands: check, forge, simulate, mi, schur-study, repro-appendix-b.
// Exit codes: 0 = P-matrix / all checks pass, 2 = violations found,
// 1 = error or failed reproduction.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pmatrix/forge.hpp"
#include "pmatrix/infotheory.hpp"
#include "pmatrix/io.hpp"
#include "pmatrix/matrix.hpp"
#include "pmatrix/minors.hpp"
#include "pmatrix/oracle.hpp"
#include "pmatrix/rng.hpp"
#include "pmatrix/schurlab.hpp"

namespace {

using nlohmann::json;
using namespace pmatrix;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitViolations = 2;

struct SharedFlags {
    std::uint64_t seed = 0;
    double tol = 0.0;
    std::string out;    // empty = stdout
    std::string format = "json";
};

void add_shared(CLI::App* cmd, SharedFlags& flags) {
    cmd->add_option("--seed", flags.seed, "Random seed");
    cmd->add_option("--tol", flags.tol, "Sign tolerance tau");
    cmd->add_option("--out", flags.out, "Output path (default stdout)");
    cmd->add_option("--format", flags.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}));
}

void emit(const SharedFlags& flags, const std::string& text) {
    if (flags.out.empty())
        std::cout << text;
    else
        io::write_text(flags.out, text);
}

json with_header(const std::string& command, const json& config, json payload) {
    json j;
    j["artifact_version"] = io::kArtifactVersion;
    j["command"] = command;
    j["config"] = config;
    j["report"] = std::move(payload);
    return j;
}

int cmd_check(const std::string& path, const SharedFlags& flags) {
    const Instance inst = io::load_instance(path);
    const Matrix a = apply_perturbation(inst);
    const ViolationReport report = violation_set(a, flags.tol);

    json config{{"instance", path}, {"tol", flags.tol}};
    if (flags.format == "csv") {
        emit(flags, io::minors_csv(report.violations,
                                   "check instance=" + path + " tol=" + io::format_double(flags.tol)));
    } else {
        emit(flags, with_header("check", config, io::violation_report_to_json(report)).dump(2) + "\n");
    }
    return report.regime == Regime::p_matrix ? kExitOk : kExitViolations;
}

int cmd_forge(const std::string& base_path, const std::string& instance_out, double epsilon,
              int steps, double max_lambda_factor, const SharedFlags& flags) {
    const Instance base = io::load_instance(base_path);
    for (double x : base.u)
        if (x != 0.0) throw std::invalid_argument("forge: base file already carries a perturbation");
    for (double x : base.v)
        if (x != 0.0) throw std::invalid_argument("forge: base file already carries a perturbation");

    ForgeConfig cfg;
    cfg.epsilon = epsilon;
    cfg.lambda_search_steps = steps;
    cfg.max_lambda_factor = max_lambda_factor;

    json config{{"base", base_path},
                {"epsilon", epsilon},
                {"lambda_search_steps", steps},
                {"max_lambda_factor", max_lambda_factor},
                {"out_instance", instance_out}};
    try {
        const ForgeResult result = forge_single_violation(base.m, cfg);
        io::save_instance(result.instance, instance_out);
        emit(flags, with_header("forge", config, io::forge_result_to_json(result)).dump(2) + "\n");
        return kExitOk;
    } catch (const ForgeError& e) {
        json scan = json::array();
        for (const auto& pt : e.scan())
            scan.push_back({{"lambda", pt.lambda}, {"violations", pt.violation_count}});
        json diag{{"error", e.what()}, {"scan", scan}};
        std::cerr << with_header("forge", config, diag).dump(2) << "\n";
        return kExitError;
    }
}

int cmd_simulate(int n, int p, std::uint64_t trials, const std::string& strategy_name,
                 const std::string& mode_name, const std::string& instance_path,
                 const std::string& hist_path, const SharedFlags& flags) {
    const auto strategy = strategy_by_name(strategy_name);
    const OracleMode mode = mode_name == "value" ? OracleMode::value : OracleMode::sign;
    if (mode == OracleMode::value && instance_path.empty())
        throw std::invalid_argument("simulate: --mode value requires --instance");

    FirstHitReport report;
    if (instance_path.empty()) {
        report = first_hit_experiment(n, p, trials, *strategy, flags.seed);
    } else {
        // Fixed-instance mode: trials vary only through strategy randomness.
        const Instance inst = io::load_instance(instance_path);
        const Matrix a = apply_perturbation(inst);
        const int dim = a.dim();
        const int max_rounds = default_max_rounds(*strategy, dim, p);
        report.n = dim;
        report.p = p;
        report.trials = trials;
        report.strategy = std::string(strategy->name());
        report.seed = flags.seed;
        report.mode = mode;
        double sum_rounds = 0.0;
        double sum_queries = 0.0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            auto session = OracleSession::for_matrix(a, flags.tol, mode);
            const auto run = run_strategy(session, *strategy, p, max_rounds,
                                          rng::substream_seed(flags.seed, t));
            sum_rounds += run.hit_round.value_or(max_rounds);
            sum_queries += static_cast<double>(run.transcript.total_queries());
            ++report.histogram[run.hit_round.value_or(0)];
        }
        report.mean_rounds = sum_rounds / static_cast<double>(trials);
        report.mean_queries = sum_queries / static_cast<double>(trials);
    }

    if (!hist_path.empty()) io::write_text(hist_path, io::histogram_csv(report));

    json config{{"n", report.n},       {"p", p},
                {"trials", trials},    {"strategy", strategy_name},
                {"seed", flags.seed},  {"mode", mode_name},
                {"instance", instance_path}};
    if (flags.format == "csv")
        emit(flags, io::histogram_csv(report));
    else
        emit(flags,
             with_header("simulate", config, io::first_hit_report_to_json(report)).dump(2) + "\n");
    return kExitOk;
}

int cmd_mi(int n, std::uint64_t q, const std::string& strategy_name, std::uint64_t samples,
           const std::string& sweep, const SharedFlags& flags) {
    const auto strategy = strategy_by_name(strategy_name);

    if (!sweep.empty()) {
        const auto dots = sweep.find("..");
        if (dots == std::string::npos)
            throw std::invalid_argument("mi: --sweep-n expects the form a..b");
        const int lo = std::stoi(sweep.substr(0, dots));
        const int hi = std::stoi(sweep.substr(dots + 2));
        if (lo < 2 || hi < lo) throw std::invalid_argument("mi: bad sweep range");
        std::ostringstream os;
        os << "# artifact_version=" << io::kArtifactVersion << "\n";
        os << "# mi sweep n=" << lo << ".." << hi << " q=" << q << " (capped at 2^n-1)\n";
        os << "n,q,mi_exact,mi_bound,fano_lower,all_zero_exact\n";
        for (int nn = lo; nn <= hi; ++nn) {
            const std::uint64_t cand = (1ULL << nn) - 1;
            const std::uint64_t qq = std::min<std::uint64_t>(q, cand);
            const double exact = mi_exact_nonadaptive_bits(nn, qq);
            const double bound = mi_chain_bound_bits(nn, qq);
            os << nn << "," << qq << "," << io::format_double(exact) << ","
               << io::format_double(bound) << ","
               << io::format_double(fano_error_lower_bound(exact, cand)) << ","
               << io::format_double(all_zero_probability(nn, qq).exact) << "\n";
        }
        emit(flags, os.str());
        return kExitOk;
    }

    std::optional<double> mi_exact;
    if (strategy->tv_model() == TvModel::deterministic)
        mi_exact = mi_exact_nonadaptive_bits(n, q);

    std::optional<MiEstimate> estimate;
    if (samples > 0) {
        const std::uint64_t cand = (1ULL << n) - 1;
        std::vector<std::pair<SubsetMask, Transcript>> drawn;
        drawn.reserve(samples);
        for (std::uint64_t s = 0; s < samples; ++s) {
            rng::Engine wr(rng::substream_seed(flags.seed, 2 * s));
            const SubsetMask witness(1 + wr.next_below(cand), n);
            auto session = OracleSession::synthetic(witness);
            const auto run = run_strategy(session, *strategy, 1, static_cast<int>(q),
                                          rng::substream_seed(flags.seed, 2 * s + 1));
            drawn.emplace_back(witness, run.transcript);
        }
        estimate = mi_estimate_bits(drawn);
    }

    const InfoReport report = make_info_report(n, q, mi_exact, estimate);
    json config{{"n", n},
                {"q", q},
                {"strategy", strategy_name},
                {"samples", samples},
                {"seed", flags.seed}};
    emit(flags, with_header("mi", config, io::info_report_to_json(report)).dump(2) + "\n");
    return kExitOk;
}

int cmd_schur_study(int n, const std::string& ensemble, std::uint64_t samples,
                    const std::string& overlap, const SharedFlags& flags) {
    EnsembleConfig cfg;
    cfg.n = n;
    cfg.kind = ensemble_by_name(ensemble);
    cfg.samples = samples;
    cfg.seed = flags.seed;

    std::vector<std::pair<SubsetMask, SubsetMask>> pairs;
    auto add = [&](OverlapPattern p) { pairs.push_back(overlap_pair(p, n)); };
    if (overlap == "all") {
        add(OverlapPattern::disjoint);
        add(OverlapPattern::overlap_one);
        add(OverlapPattern::overlap_all_but_one);
        add(OverlapPattern::containment);
    } else if (overlap == "disjoint") {
        add(OverlapPattern::disjoint);
    } else if (overlap == "one") {
        add(OverlapPattern::overlap_one);
    } else if (overlap == "all-but-one") {
        add(OverlapPattern::overlap_all_but_one);
    } else if (overlap == "containment") {
        add(OverlapPattern::containment);
    } else {
        throw std::invalid_argument("schur-study: unknown overlap pattern " + overlap);
    }

    const ConditionalSignReport report = conditional_sign_study(cfg, pairs);
    json config{{"n", n},
                {"ensemble", ensemble},
                {"samples", samples},
                {"seed", flags.seed},
                {"overlap", overlap}};
    if (flags.format == "csv")
        emit(flags, io::sign_report_csv(report));
    else
        emit(flags,
             with_header("schur-study", config, io::sign_report_to_json(report)).dump(2) + "\n");
    return kExitOk;
}

int cmd_repro_appendix_b(const SharedFlags& flags) {
    struct Row {
        const char* subset;
        double printed;
    };
    // Published neighborhood table for the violating subset {1,5}.
    const Row rows[15] = {
        {"{1}", 1.865},     {"{1,2}", 18.820},  {"{1,3}", 7.554},  {"{1,4}", 10.070},
        {"{1,5}", -0.001},  {"{1,6}", 13.986},  {"{5}", 1.419},    {"{2,5}", 4.823},
        {"{3,5}", 9.505},   {"{4,5}", 7.660},   {"{5,6}", 7.260},  {"{1,2,5}", 12.270},
        {"{1,3,5}", 8.006}, {"{1,4,5}", 0.617}, {"{1,5,6}", 14.244}};

    const Instance inst = appendix_b_fixture();
    const Matrix a = apply_perturbation(inst);
    const SubsetMask center = SubsetMask::of_indices({1, 5}, 6);
    const auto neighborhood = neighborhood_minors(a, center, 2);

    std::ostringstream os;
    bool all_pass = true;
    auto check = [&](bool ok, const std::string& line) {
        os << (ok ? "PASS " : "FAIL ") << line << "\n";
        all_pass = all_pass && ok;
    };

    os << "6x6 fixture reproduction (neighborhood of {1,5}, tolerance 0.001)\n";
    char buf[128];
    for (int i = 0; i < 15; ++i) {
        double got = 0.0;
        bool found = false;
        for (const auto& rec : neighborhood) {
            if (rec.alpha.to_string() == rows[i].subset) {
                got = rec.value;
                found = true;
                break;
            }
        }
        std::snprintf(buf, sizeof buf, "row %2d  %-9s  printed % 8.3f  computed % 9.6f", i + 1,
                      rows[i].subset, rows[i].printed, got);
        check(found && std::abs(got - rows[i].printed) <= 0.001, buf);
    }
    check(neighborhood.size() == 15, "neighborhood has exactly 15 subsets");

    const ViolationReport base_report = violation_set(inst.m, 0.0);
    check(base_report.regime == Regime::p_matrix, "all 63 principal minors of the base are positive");
    std::snprintf(buf, sizeof buf, "smallest base minor %.6f at %s (expect 0.272 at {2,3,4})",
                  base_report.min_minor.value, base_report.min_minor.alpha.to_string().c_str());
    check(std::abs(base_report.min_minor.value - 0.272) <= 0.001 &&
              base_report.min_minor.alpha.to_string() == "{2,3,4}",
          buf);

    const double unperturbed = det(principal_submatrix(inst.m, center));
    std::snprintf(buf, sizeof buf, "det(M_{1,5}) = %.6f (expect 11.27 +- 0.005)", unperturbed);
    check(std::abs(unperturbed - 11.27) <= 0.005, buf);

    const ViolationReport report = violation_set(a, 0.0);
    check(report.regime == Regime::single_violation, "perturbed matrix has exactly one violation");
    const bool witness_ok = report.violations.size() == 1 &&
                            report.violations[0].alpha.to_string() == "{1,5}" &&
                            report.violations[0].value >= -0.0015 &&
                            report.violations[0].value <= -0.0005;
    std::snprintf(buf, sizeof buf, "violation at %s with value %.6f (expect {1,5} in [-0.0015,-0.0005])",
                  report.violations.empty() ? "-" : report.violations[0].alpha.to_string().c_str(),
                  report.violations.empty() ? 0.0 : report.violations[0].value);
    check(witness_ok, buf);

    os << (all_pass ? "ALL CHECKS PASSED\n" : "REPRODUCTION FAILED\n");
    emit(flags, os.str());
    return all_pass ? kExitOk : kExitError;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"P-matrix violation search laboratory"};
    app.require_subcommand(1);

    SharedFlags flags;

    auto* check = app.add_subcommand("check", "Enumerate principal minors of an instance");
    std::string check_instance;
    check->add_option("instance", check_instance, "Instance JSON file")->required();
    add_shared(check, flags);

    auto* forge = app.add_subcommand("forge", "Construct a single-violation perturbation");
    std::string forge_base;
    std::string forge_out_instance = "forged_instance.json";
    double forge_epsilon = 1e-3;
    int forge_steps = 64;
    double forge_max_lambda = 1.0;
    forge->add_option("base", forge_base, "Base matrix JSON file")->required();
    forge->add_option("--out-instance", forge_out_instance, "Where to write the forged instance");
    forge->add_option("--epsilon", forge_epsilon, "Target violation magnitude");
    forge->add_option("--steps", forge_steps, "Lambda search steps");
    forge->add_option("--max-lambda-factor", forge_max_lambda, "Scan start multiple of lambda0");
    add_shared(forge, flags);

    auto* simulate = app.add_subcommand("simulate", "First-hit search experiments");
    int sim_n = 8, sim_p = 1;
    std::uint64_t sim_trials = 10000;
    std::string sim_strategy = "uniform-norepeat";
    std::string sim_mode = "sign";
    std::string sim_instance;
    std::string sim_hist;
    simulate->add_option("--n", sim_n, "Dimension (synthetic mode)");
    simulate->add_option("--p", sim_p, "Parallel queries per round");
    simulate->add_option("--trials", sim_trials, "Number of trials");
    simulate->add_option("--strategy", sim_strategy, "Query strategy");
    simulate->add_option("--mode", sim_mode, "Oracle mode")->check(CLI::IsMember({"sign", "value"}));
    simulate->add_option("--instance", sim_instance, "Run against a fixed instance file");
    simulate->add_option("--hist", sim_hist, "Write histogram CSV here");
    add_shared(simulate, flags);

    auto* mi = app.add_subcommand("mi", "Information quantities of the query transcript");
    int mi_n = 8;
    std::uint64_t mi_q = 10;
    std::string mi_strategy = "lexicographic";
    std::uint64_t mi_samples = 0;
    std::string mi_sweep;
    mi->add_option("--n", mi_n, "Dimension");
    mi->add_option("--q", mi_q, "Query budget");
    mi->add_option("--strategy", mi_strategy, "Query strategy");
    mi->add_option("--samples", mi_samples, "Monte Carlo samples for the plug-in estimate");
    mi->add_option("--sweep-n", mi_sweep, "Emit a CSV sweep over n=a..b");
    add_shared(mi, flags);

    auto* schur = app.add_subcommand("schur-study", "Conditional sign study of overlapping minors");
    int schur_n = 6;
    std::string schur_ensemble = "iid_uniform";
    std::uint64_t schur_samples = 10000;
    std::string schur_overlap = "all";
    schur->add_option("--n", schur_n, "Dimension");
    schur->add_option("--ensemble", schur_ensemble, "Matrix ensemble");
    schur->add_option("--samples", schur_samples, "Sample count");
    schur->add_option("--overlap", schur_overlap,
                      "Pair pattern: disjoint|one|all-but-one|containment|all");
    add_shared(schur, flags);

    auto* repro = app.add_subcommand("repro-appendix-b", "Reproduce the 6x6 fixture tables");
    add_shared(repro, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed()) return cmd_check(check_instance, flags);
        if (forge->parsed())
            return cmd_forge(forge_base, forge_out_instance, forge_epsilon, forge_steps,
                             forge_max_lambda, flags);
        if (simulate->parsed())
            return cmd_simulate(sim_n, sim_p, sim_trials, sim_strategy, sim_mode, sim_instance,
                                sim_hist, flags);
        if (mi->parsed()) return cmd_mi(mi_n, mi_q, mi_strategy, mi_samples, mi_sweep, flags);
        if (schur->parsed())
            return cmd_schur_study(schur_n, schur_ensemble, schur_samples, schur_overlap, flags);
        if (repro->parsed()) return cmd_repro_appendix_b(flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
