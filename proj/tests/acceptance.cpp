// Acceptance suite: runs every release criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero if any fail.
//
// Usage: acceptance [--cli /path/to/pmatrix]

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "pmatrix/forge.hpp"
#include "pmatrix/infotheory.hpp"
#include "pmatrix/io.hpp"
#include "pmatrix/minors.hpp"
#include "pmatrix/oracle.hpp"
#include "pmatrix/rng.hpp"
#include "pmatrix/schurlab.hpp"

using namespace pmatrix;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

class Criterion {
public:
    Criterion(int number, std::string title, double time_limit_s)
        : number_(number), title_(std::move(title)), limit_(time_limit_s), start_(Clock::now()) {}

    void require(bool ok, const std::string& what) {
        if (!ok) problems_.push_back(what);
    }

    void finish() {
        const double elapsed =
            std::chrono::duration_cast<std::chrono::duration<double>>(Clock::now() - start_)
                .count();
        if (elapsed > limit_) {
            std::ostringstream os;
            os << "runtime " << elapsed << "s exceeds limit " << limit_ << "s";
            problems_.push_back(os.str());
        }
        const bool pass = problems_.empty();
        std::printf("%s criterion %2d [%5.2fs] %s\n", pass ? "PASS" : "FAIL", number_, elapsed,
                    title_.c_str());
        for (const auto& p : problems_) std::printf("       - %s\n", p.c_str());
        if (!pass) ++g_failures;
    }

private:
    int number_;
    std::string title_;
    double limit_;
    Clock::time_point start_;
    std::vector<std::string> problems_;
};

Matrix random_dominant(int n, rng::Engine& rng) {
    Matrix a(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j) a(i, j) = rng.next_double(-1.0, 1.0);
    for (int i = 0; i < n; ++i) {
        double off = 0.0;
        for (int j = 0; j < n; ++j)
            if (j != i) off += std::abs(a(i, j));
        a(i, i) = off + rng.next_double(0.1, 1.1);
    }
    return a;
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(10);
    os << x;
    return os.str();
}

// ---------------------------------------------------------------------------

void criterion_1_fixture_reproduction() {
    Criterion c(1, "fixture reproduction: published table, base minimum, violation", 1.0);

    const Instance fix = appendix_b_fixture();
    const Matrix a = apply_perturbation(fix);
    const struct {
        const char* subset;
        double printed;
    } rows[15] = {{"{1}", 1.865},     {"{1,2}", 18.820},  {"{1,3}", 7.554},  {"{1,4}", 10.070},
                  {"{1,5}", -0.001},  {"{1,6}", 13.986},  {"{5}", 1.419},    {"{2,5}", 4.823},
                  {"{3,5}", 9.505},   {"{4,5}", 7.660},   {"{5,6}", 7.260},  {"{1,2,5}", 12.270},
                  {"{1,3,5}", 8.006}, {"{1,4,5}", 0.617}, {"{1,5,6}", 14.244}};

    const auto neighborhood = neighborhood_minors(a, SubsetMask::of_indices({1, 5}, 6), 2);
    c.require(neighborhood.size() == 15, "neighborhood is not 15 subsets");
    for (const auto& row : rows) {
        bool matched = false;
        for (const auto& rec : neighborhood)
            if (rec.alpha.to_string() == row.subset && std::abs(rec.value - row.printed) <= 0.001)
                matched = true;
        c.require(matched, std::string("table row mismatch at ") + row.subset);
    }

    const auto base = violation_set(fix.m, 0.0);
    c.require(base.regime == Regime::p_matrix, "base matrix is not a P-matrix");
    c.require(base.total_minors == 63, "base minor count is not 63");
    c.require(std::abs(base.min_minor.value - 0.272) <= 0.001 &&
                  base.min_minor.alpha.to_string() == "{2,3,4}",
              "base minimum is not 0.272 at {2,3,4}");

    const double m15 = det(principal_submatrix(fix.m, SubsetMask::of_indices({1, 5}, 6)));
    c.require(std::abs(m15 - 11.27) <= 0.005, "det(M_{1,5}) is not 11.27 +- 0.005");

    const auto report = violation_set(a, 0.0);
    c.require(report.regime == Regime::single_violation, "perturbed matrix not single-violation");
    c.require(!report.violations.empty() && report.violations[0].alpha.to_string() == "{1,5}" &&
                  report.violations[0].value >= -0.0015 && report.violations[0].value <= -0.0005,
              "violation is not {1,5} in [-0.0015, -0.0005]");
    c.finish();
}

std::vector<ForgeResult> g_forged; // reused by criterion 3

void criterion_2_forge_property() {
    Criterion c(2, "forge: verified single violation or structured failure, >= 50% success", 30.0);
    int successes = 0, failures = 0, total = 0;
    rng::Engine rng(20240601);
    for (int n = 4; n <= 8; ++n) {
        for (int rep = 0; rep < 20; ++rep) {
            const Matrix m = random_dominant(n, rng);
            ++total;
            try {
                const ForgeResult result = forge_single_violation(m);
                // Independent re-verification by full enumeration.
                const auto report = violation_set(apply_perturbation(result.instance), 0.0);
                c.require(report.regime == Regime::single_violation,
                          "forged instance fails re-verification at n=" + std::to_string(n));
                c.require(report.violations.size() == 1 &&
                              report.violations[0].alpha.bits == result.witness.bits,
                          "forged witness mismatch at n=" + std::to_string(n));
                g_forged.push_back(result);
                ++successes;
            } catch (const ForgeError& e) {
                c.require(!e.scan().empty(), "forge failure carries no scan diagnostics");
                ++failures;
            }
        }
    }
    const double rate = static_cast<double>(successes) / total;
    std::printf("       forge success rate: %d/%d = %.1f%%\n", successes, total, 100.0 * rate);
    c.require(rate >= 0.5, "success rate below 50%: " + fmt(100.0 * rate) + "%");
    c.finish();
}

void criterion_3_oracle_reduction() {
    Criterion c(3, "oracle reduction: sign oracle fires exactly on the witness", 10.0);

    auto exhaustive_check = [&](const Matrix& a, std::uint64_t witness_bits, const char* label) {
        const int n = a.dim();
        auto session = OracleSession::for_matrix(a, 0.0);
        bool ok = true;
        for (std::uint64_t bits = 1; bits < (1ULL << n); ++bits)
            if (session.query(SubsetMask(bits, n)) != (bits == witness_bits ? 1 : 0)) ok = false;
        c.require(ok, std::string("oracle mismatch on ") + label);
    };

    exhaustive_check(apply_perturbation(appendix_b_fixture()), 0b10001, "the 6x6 fixture");

    int checked = 0;
    for (const auto& result : g_forged) {
        if (result.instance.dim() > 10) continue;
        exhaustive_check(apply_perturbation(result.instance), result.witness.bits, "forged instance");
        ++checked;
    }
    // A couple of dimensions the forge loop above did not cover.
    rng::Engine rng(888);
    for (int n : {9, 10}) {
        for (int attempt = 0; attempt < 5; ++attempt) {
            try {
                const ForgeResult r = forge_single_violation(random_dominant(n, rng));
                exhaustive_check(apply_perturbation(r.instance), r.witness.bits, "forged instance");
                ++checked;
                break;
            } catch (const ForgeError&) {
            }
        }
    }
    c.require(checked >= 20, "too few forged instances exercised: " + std::to_string(checked));
    c.finish();
}

void criterion_4_first_hit_law() {
    Criterion c(4, "first-hit law: Monte Carlo within 2% of E[ceil(U/p)], Omega(2^n/p)", 60.0);
    const auto strat = strategy_by_name("uniform-norepeat");
    const struct {
        int n, p;
    } grid[3] = {{8, 1}, {10, 4}, {12, 16}};
    for (const auto& g : grid) {
        const auto report = first_hit_experiment(g.n, g.p, 100000, *strat, 31337);
        const double exact = exact_mean_rounds(g.n, g.p);
        const double rel = std::abs(report.mean_rounds - exact) / exact;
        std::printf("       n=%2d p=%2d: mc=%.4f exact=%.4f rel=%.5f\n", g.n, g.p,
                    report.mean_rounds, exact, rel);
        c.require(rel <= 0.02, "Monte Carlo off by more than 2% at n=" + std::to_string(g.n));
        c.require(report.exact_expectation.has_value() && *report.exact_expectation == exact,
                  "report carries a different exact expectation");
    }
    for (int n = 2; n <= 16; ++n)
        for (int p : {1, 2, 4, 8, 16, 32, 64})
            c.require(exact_mean_rounds(n, p) >= static_cast<double>((1ULL << n) - 1) / (2.0 * p),
                      "E[T] < (2^n-1)/(2p) at n=" + std::to_string(n) + " p=" + std::to_string(p));
    c.finish();
}

void criterion_5_mi_sandwich() {
    Criterion c(5, "mutual information: exact <= chain bound, full identification, estimator", 30.0);
    for (int n = 2; n <= 12; ++n) {
        const std::uint64_t k = (1ULL << n) - 1;
        for (std::uint64_t q : {std::uint64_t{1}, std::uint64_t{10}, std::uint64_t{100}}) {
            const std::uint64_t qq = std::min(q, k);
            c.require(mi_exact_nonadaptive_bits(n, qq) <= mi_chain_bound_bits(n, qq) + 1e-12,
                      "sandwich violated at n=" + std::to_string(n) + " q=" + std::to_string(qq));
        }
        const double full = mi_exact_nonadaptive_bits(n, k);
        const double prior = prior_entropy_bits(n);
        c.require(std::abs(full - prior) <= 1e-12 * std::max(1.0, std::abs(prior)),
                  "full identification differs from the prior entropy at n=" + std::to_string(n));
    }

    // Plug-in estimate vs closed form at n=4, q=3, fixed lexicographic queries.
    const int n = 4;
    const std::uint64_t k = 15, q = 3;
    std::vector<std::pair<SubsetMask, Transcript>> samples;
    samples.reserve(100000);
    const auto lex = strategy_by_name("lexicographic");
    for (std::uint64_t s = 0; s < 100000; ++s) {
        rng::Engine wr(rng::substream_seed(77, 2 * s));
        const SubsetMask witness(1 + wr.next_below(k), n);
        auto session = OracleSession::synthetic(witness);
        const auto run = run_strategy(session, *lex, 1, static_cast<int>(q),
                                      rng::substream_seed(77, 2 * s + 1));
        samples.emplace_back(witness, run.transcript);
    }
    const double estimate = mi_estimate_bits(samples).bits;
    const double closed = mi_exact_nonadaptive_bits(n, q);
    std::printf("       estimator n=4 q=3: estimate=%.5f closed=%.5f\n", estimate, closed);
    c.require(std::abs(estimate - closed) < 0.02, "plug-in estimate off by 0.02 bits or more");
    c.finish();
}

void criterion_6_vanishing_trend() {
    Criterion c(6, "vanishing information: mi_chain_bound(n, n^3) over n=8..20", 1.0);
    // As stated: strictly decreasing over n = 8..20 and < 1e-3 bits at n = 20.
    // At n = 8 and 9 the call violates the operation's own precondition
    // (n^3 > 2^n - 1), so those points are evaluated at q = min(n^3, K).
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    double at_20 = 0.0;
    for (int n = 8; n <= 20; ++n) {
        const std::uint64_t k = (1ULL << n) - 1;
        const std::uint64_t q = static_cast<std::uint64_t>(n) * n * n;
        const std::uint64_t qq = std::min(q, k);
        const double bound = mi_chain_bound_bits(n, qq);
        std::printf("       n=%2d q=%6llu%s bound=%.6f\n", n, static_cast<unsigned long long>(q),
                    q > k ? " (capped)" : "", bound);
        if (bound >= prev) decreasing = false;
        prev = bound;
        if (n == 20) at_20 = bound;
    }
    c.require(decreasing, "sequence is not strictly decreasing over n=8..20");
    c.require(at_20 < 1e-3, "bound at n=20 is " + fmt(at_20) + ", not < 1e-3");
    c.finish();
}

void criterion_7_fano_consistency() {
    Criterion c(7, "Fano consistency: MAP success within the information bound", 60.0);
    const int n = 8;
    const std::uint64_t k = 255, q = 20, trials = 100000;
    std::uint64_t successes = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        rng::Engine rng(rng::substream_seed(4242, t));
        const std::uint64_t witness = 1 + rng.next_below(k);
        std::vector<std::uint64_t> pool(k);
        for (std::uint64_t i = 0; i < k; ++i) pool[i] = i + 1;
        bool hit = false;
        for (std::uint64_t j = 0; j < q && !hit; ++j) {
            const std::uint64_t pick = j + rng.next_below(k - j);
            std::swap(pool[j], pool[pick]);
            hit = pool[j] == witness;
        }
        if (hit) {
            ++successes; // MAP guess is the hit subset itself
        } else {
            // MAP guess: uniform over the K - q unqueried candidates.
            const std::uint64_t guess_index = q + rng.next_below(k - q);
            if (pool[guess_index] == witness) ++successes;
        }
    }
    const double observed = static_cast<double>(successes) / trials;
    const double mi = mi_exact_nonadaptive_bits(n, q);
    const double fano_lower = fano_error_lower_bound(mi, k);
    const double allowed =
        (1.0 - fano_lower) + 3.0 * std::sqrt(observed * (1.0 - observed) / trials);
    std::printf("       observed=%.5f allowed=%.5f (mi=%.4f fano_lower=%.4f)\n", observed,
                allowed, mi, fano_lower);
    c.require(observed <= allowed, "MAP success rate exceeds the Fano-allowed ceiling");
    c.finish();
}

void criterion_8_indistinguishability() {
    Criterion c(8, "indistinguishability: TV = q/K and all-zero transcript law", 10.0);
    const auto norepeat = strategy_by_name("uniform-norepeat");
    const double tv =
        transcript_tv_distance(6, *norepeat, 10, SubsetMask(3, 6), SubsetMask(17, 6));
    c.require(std::abs(tv - 10.0 / 63.0) <= 1e-12, "TV at n=6 q=10 is not 10/63: " + fmt(tv));

    const auto zero = all_zero_probability(6, 10);
    c.require(std::abs(zero.exact - 53.0 / 63.0) <= 1e-15, "all-zero exact is not 53/63");

    for (int n = 2; n <= 16; ++n) {
        const std::uint64_t k = (1ULL << n) - 1;
        for (std::uint64_t q : {std::uint64_t{1}, k / 4, k / 2, k}) {
            if (q == 0) continue;
            const auto p = all_zero_probability(n, q);
            c.require(p.exact >= 1.0 - p.hit_union_bound - 1e-12,
                      "union bound invalid at n=" + std::to_string(n) + " q=" + std::to_string(q));
        }
    }
    c.finish();
}

void criterion_9_schur_identity() {
    Criterion c(9, "Schur determinant identity to 1e-8 on well-conditioned samples", 10.0);
    for (int n = 2; n <= 8; ++n) {
        const double max_rel = verify_schur_identity(1000, n, 6060 + n);
        std::printf("       n=%d max_rel=%.3e\n", n, max_rel);
        c.require(max_rel < 1e-8, "identity error too large at n=" + std::to_string(n));
    }
    c.finish();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void criterion_10_determinism(const std::string& cli) {
    Criterion c(10, "determinism: identical flags and seed give byte-identical outputs", 60.0);
    if (cli.empty()) {
        c.require(false, "no --cli path given");
        c.finish();
        return;
    }
    const fs::path dir = fs::temp_directory_path() / "pmatrix_acceptance";
    fs::create_directories(dir);
    const fs::path fixture = dir / "fixture.json";
    io::save_instance(appendix_b_fixture(), fixture);
    const fs::path base = dir / "base.json";
    {
        rng::Engine rng(5150);
        Instance b;
        b.m = random_dominant(5, rng);
        b.u.assign(5, 0.0);
        b.v.assign(5, 0.0);
        io::save_instance(b, base);
    }

    struct Command {
        std::string name;
        std::string args;
        std::vector<std::string> outputs;
        bool exit_may_be_nonzero = false;
    };
    const std::vector<Command> commands = {
        {"check", "check " + fixture.string() + " --out OUT.json", {"OUT.json"}, true},
        {"repro", "repro-appendix-b --out OUT.txt", {"OUT.txt"}},
        {"forge",
         "forge " + base.string() + " --epsilon 1e-3 --out-instance OUT.inst.json --out OUT.json",
         {"OUT.inst.json", "OUT.json"}},
        {"simulate",
         "simulate --n 8 --p 2 --trials 2000 --strategy uniform-norepeat --seed 9 "
         "--hist OUT.csv --out OUT.json",
         {"OUT.csv", "OUT.json"}},
        {"mi", "mi --n 6 --q 10 --strategy lexicographic --samples 2000 --seed 3 --out OUT.json",
         {"OUT.json"}},
        {"mi-sweep", "mi --q 64 --sweep-n 2..10 --out OUT.csv", {"OUT.csv"}},
        {"schur",
         "schur-study --n 6 --ensemble iid_uniform --samples 3000 --seed 4 --format csv "
         "--out OUT.csv",
         {"OUT.csv"}},
    };

    for (const auto& cmd : commands) {
        // Both passes use byte-identical flags (same output paths); outputs
        // are read off between the runs.
        const fs::path run_dir = dir / cmd.name;
        fs::create_directories(run_dir);
        std::string args = cmd.args;
        std::string::size_type pos;
        while ((pos = args.find("OUT")) != std::string::npos)
            args.replace(pos, 3, (run_dir / "out").string());
        const std::string shell = cli + " " + args + " >/dev/null 2>&1";

        std::vector<std::string> digests[2];
        for (int pass = 0; pass < 2; ++pass) {
            const int rc = std::system(shell.c_str());
            if (!cmd.exit_may_be_nonzero)
                c.require(rc == 0, cmd.name + " exited with " + std::to_string(rc));
            for (const auto& out : cmd.outputs) {
                std::string resolved = out;
                resolved.replace(resolved.find("OUT"), 3, (run_dir / "out").string());
                digests[pass].push_back(read_file(resolved));
                c.require(!digests[pass].back().empty(), cmd.name + " wrote no output");
            }
        }
        c.require(digests[0] == digests[1], cmd.name + " output differs between reruns");
    }

    // The shipped fixture must be accepted by check with exit code 2
    // (violations found) and the forged instance round-trips through check.
    const int rc_fixture =
        std::system((cli + " check " + fixture.string() + " >/dev/null 2>&1").c_str());
    c.require(WIFEXITED(rc_fixture) && WEXITSTATUS(rc_fixture) == 2,
              "check on the fixture did not exit 2");
    const fs::path forged = dir / "forge" / "out.inst.json";
    const int rc_forged =
        std::system((cli + " check " + forged.string() + " >/dev/null 2>&1").c_str());
    c.require(WIFEXITED(rc_forged) && WEXITSTATUS(rc_forged) == 2,
              "check on a forged instance did not exit 2");
    c.finish();
}

} // namespace

int main(int argc, char** argv) {
    std::string cli;
    for (int i = 1; i + 1 < argc; ++i)
        if (std::string(argv[i]) == "--cli") cli = argv[i + 1];

    criterion_1_fixture_reproduction();
    criterion_2_forge_property();
    criterion_3_oracle_reduction();
    criterion_4_first_hit_law();
    criterion_5_mi_sandwich();
    criterion_6_vanishing_trend();
    criterion_7_fano_consistency();
    criterion_8_indistinguishability();
    criterion_9_schur_identity();
    criterion_10_determinism(cli);

    if (g_failures == 0) {
        std::printf("ALL CRITERIA PASSED\n");
        return 0;
    }
    std::printf("%d CRITERIA FAILED\n", g_failures);
    return 1;
}
