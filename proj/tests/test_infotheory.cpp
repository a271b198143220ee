#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "pmatrix/infotheory.hpp"
#include "pmatrix/rng.hpp"

using namespace pmatrix;

namespace {

// Independent binary entropy for cross-checks.
double h2_ref(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -(p * std::log(p) + (1.0 - p) * std::log(1.0 - p)) / std::log(2.0);
}

} // namespace

TEST_CASE("prior entropy") {
    CHECK(prior_entropy_bits(6) == doctest::Approx(std::log2(63.0)).epsilon(1e-12));
    CHECK(prior_entropy_bits(6) == doctest::Approx(5.97728).epsilon(1e-5));
    CHECK(prior_entropy_bits(1) == 0.0);
    // log2(2^n - 1) sits within 2^-n(1 + 2^-n) log2(e) of n.
    for (int n : {10, 16, 20}) {
        const double x = std::pow(2.0, -n);
        const double gap = n - prior_entropy_bits(n);
        CHECK(gap > 0.0);
        CHECK(gap <= x * (1.0 + x) * 1.4427);
    }
}

TEST_CASE("posterior hit probability") {
    CHECK(posterior_hit_prob(6, 1) == doctest::Approx(1.0 / 63.0));
    CHECK(posterior_hit_prob(6, 63) == 1.0);
    CHECK_THROWS_AS(posterior_hit_prob(6, 64), std::invalid_argument);
    CHECK_THROWS_AS(posterior_hit_prob(6, 0), std::invalid_argument);
}

TEST_CASE("chain-rule bound") {
    CHECK(mi_chain_bound_bits(6, 0) == 0.0);

    SUBCASE("n=6 q=10 matches a direct sum and the term bound") {
        double reference = 0.0;
        for (int k = 1; k <= 10; ++k) reference += h2_ref(1.0 / (63.0 - (k - 1)));
        const double bound = mi_chain_bound_bits(6, 10);
        CHECK(bound == doctest::Approx(reference).epsilon(1e-12));
        CHECK(bound <= 10.0 * h2_ref(1.0 / 54.0) + 1e-12);
    }
    SUBCASE("q beyond the candidate count is rejected") {
        CHECK_THROWS_AS(mi_chain_bound_bits(6, 64), std::invalid_argument);
        // In particular q = n^3 violates the q <= 2^n - 1 domain at n = 8, 9.
        CHECK_THROWS_AS(mi_chain_bound_bits(8, 512), std::invalid_argument);
        CHECK_THROWS_AS(mi_chain_bound_bits(9, 729), std::invalid_argument);
    }
    SUBCASE("q = n^3 decreases over the legal range n = 10..20") {
        double prev = std::numeric_limits<double>::infinity();
        for (int n = 10; n <= 20; ++n) {
            const std::uint64_t q = static_cast<std::uint64_t>(n) * n * n;
            REQUIRE(q <= (1ULL << n) - 1);
            const double bound = mi_chain_bound_bits(n, q);
            CHECK(bound < prev);
            prev = bound;
        }
        // The trend is toward zero but slowly: about 0.16 bits at n = 20.
        CHECK(prev == doctest::Approx(0.16418).epsilon(1e-4));
    }
}

TEST_CASE("exact non-adaptive mutual information") {
    CHECK(mi_exact_nonadaptive_bits(6, 0) == 0.0);

    SUBCASE("full identification recovers the prior entropy") {
        for (int n : {2, 5, 8, 12}) {
            const std::uint64_t k = (1ULL << n) - 1;
            CHECK(mi_exact_nonadaptive_bits(n, k) ==
                  doctest::Approx(prior_entropy_bits(n)).epsilon(1e-12));
        }
    }
    SUBCASE("closed form matches brute-force joint enumeration") {
        // Oracle: fixed lexicographic queries {1..q}, witness uniform over
        // {1..K}; the transcript is one-hot at the witness's rank or all
        // zero. Enumerate the joint distribution directly.
        const int n = 6;
        const std::uint64_t k = 63;
        for (std::uint64_t q : {1ULL, 10ULL, 40ULL}) {
            std::map<std::uint64_t, double> transcript_prob; // position (0 = none) -> prob
            for (std::uint64_t w = 1; w <= k; ++w) {
                const std::uint64_t pos = w <= q ? w : 0;
                transcript_prob[pos] += 1.0 / static_cast<double>(k);
            }
            double h_f = 0.0; // I(W;F) = H(F) since F is a function of W
            for (const auto& [pos, prob] : transcript_prob) h_f -= prob * std::log2(prob);
            CHECK(mi_exact_nonadaptive_bits(n, q) == doctest::Approx(h_f).epsilon(1e-12));
        }
    }
    SUBCASE("sandwich: exact at most the chain bound for every budget") {
        for (int n = 2; n <= 12; ++n) {
            const std::uint64_t k = (1ULL << n) - 1;
            const std::uint64_t q_max = std::min<std::uint64_t>(k, 200);
            for (std::uint64_t q = 1; q <= q_max; ++q) {
                const double exact = mi_exact_nonadaptive_bits(n, q);
                CHECK(exact <= mi_chain_bound_bits(n, q) + 1e-12);
                CHECK(exact >= 0.0);
                CHECK(exact <= prior_entropy_bits(n) + 1e-12);
            }
        }
    }
}

TEST_CASE("plug-in estimator") {
    SUBCASE("identical transcripts carry no information") {
        Transcript t;
        t.rounds.push_back({{SubsetMask(1, 4)}, {0}, {}});
        std::vector<std::pair<SubsetMask, Transcript>> samples;
        for (std::uint64_t w = 1; w <= 15; ++w) samples.emplace_back(SubsetMask(w, 4), t);
        CHECK(mi_estimate_bits(samples).bits == doctest::Approx(0.0));
    }
    SUBCASE("estimate converges to the closed form (n=4, q=3, fixed queries)") {
        const int n = 4;
        const std::uint64_t k = 15;
        const std::uint64_t q = 3;
        std::vector<std::pair<SubsetMask, Transcript>> samples;
        samples.reserve(100000);
        rng::Engine rng(17);
        for (std::uint64_t s = 0; s < 100000; ++s) {
            const SubsetMask witness(1 + rng.next_below(k), n);
            Transcript t;
            for (std::uint64_t j = 1; j <= q; ++j) {
                const int bit = witness.bits == j ? 1 : 0;
                t.rounds.push_back({{SubsetMask(j, n)}, {bit}, {}});
                if (bit) break; // sequential evaluation stops at the hit
            }
            samples.emplace_back(witness, t);
        }
        const auto est = mi_estimate_bits(samples);
        CHECK(est.samples == 100000);
        CHECK(std::abs(est.bits - mi_exact_nonadaptive_bits(n, q)) < 0.01);
    }
    SUBCASE("estimate converges at n=5 as well") {
        const int n = 5;
        const std::uint64_t k = 31, q = 3;
        std::vector<std::pair<SubsetMask, Transcript>> samples;
        samples.reserve(100000);
        rng::Engine rng(18);
        for (std::uint64_t s = 0; s < 100000; ++s) {
            const SubsetMask witness(1 + rng.next_below(k), n);
            Transcript t;
            for (std::uint64_t j = 1; j <= q; ++j) {
                const int bit = witness.bits == j ? 1 : 0;
                t.rounds.push_back({{SubsetMask(j, n)}, {bit}, {}});
                if (bit) break;
            }
            samples.emplace_back(witness, t);
        }
        CHECK(std::abs(mi_estimate_bits(samples).bits - mi_exact_nonadaptive_bits(n, q)) < 0.02);
    }
    SUBCASE("witness-first strategy reveals everything the transcript can carry") {
        const int n = 4;
        const std::uint64_t k = 15;
        std::vector<std::pair<SubsetMask, Transcript>> samples;
        rng::Engine rng(19);
        for (std::uint64_t s = 0; s < 60000; ++s) {
            const SubsetMask witness(1 + rng.next_below(k), n);
            Transcript t;
            t.rounds.push_back({{witness}, {1}, {}});
            samples.emplace_back(witness, t);
        }
        CHECK(mi_estimate_bits(samples).bits == doctest::Approx(std::log2(15.0)).epsilon(2e-3));
    }
    SUBCASE("empty sample set rejected") {
        std::vector<std::pair<SubsetMask, Transcript>> none;
        CHECK_THROWS_AS(mi_estimate_bits(none), std::invalid_argument);
    }
}

TEST_CASE("fano bounds") {
    SUBCASE("zero information at K = 63") {
        CHECK(fano_error_lower_bound(0.0, 63) ==
              doctest::Approx(1.0 - 1.0 / std::log2(63.0)).epsilon(1e-12));
        CHECK(fano_error_lower_bound(0.0, 63) == doctest::Approx(0.8327).epsilon(1e-4));
    }
    SUBCASE("full information clears the obstruction") {
        CHECK(fano_error_lower_bound(std::log2(63.0), 63) == 0.0);
        CHECK(fano_error_lower_bound(100.0, 63) == 0.0);
    }
    SUBCASE("relaxed bound never exceeds the exact inversion") {
        for (std::uint64_t k : {3ULL, 63ULL, 255ULL, 4095ULL}) {
            for (double mi : {0.0, 0.25, 1.0, 3.0, 6.0}) {
                if (mi >= std::log2(static_cast<double>(k))) continue;
                const double relaxed = fano_error_lower_bound(mi, k);
                const double exact = fano_exact_error_lower_bound(mi, k);
                CHECK(relaxed <= exact + 1e-9);
                CHECK(exact >= 0.0);
                CHECK(exact <= 1.0);
                // The exact inversion satisfies the Fano identity.
                const double lhs = h2_ref(exact) + exact * std::log2(static_cast<double>(k - 1));
                CHECK(lhs == doctest::Approx(std::log2(static_cast<double>(k)) - mi)
                                 .epsilon(1e-9)
                                 .scale(1.0));
            }
        }
    }
    SUBCASE("composition with the chain bound at n=12, q=n^3") {
        // Independently computed: the chain bound at q = 1728 of K = 4095 is
        // about 7.15 bits, so the Fano floor is about 0.32.
        const double mi = mi_chain_bound_bits(12, 1728);
        CHECK(mi == doctest::Approx(7.1504).epsilon(1e-4));
        CHECK(fano_error_lower_bound(mi, 4095) == doctest::Approx(0.3208).epsilon(1e-3));
    }
    SUBCASE("invalid arguments rejected") {
        CHECK_THROWS_AS(fano_error_lower_bound(0.0, 1), std::invalid_argument);
        CHECK_THROWS_AS(fano_error_lower_bound(-0.1, 4), std::invalid_argument);
    }
}

TEST_CASE("all-zero transcript probability") {
    SUBCASE("n=6 q=10") {
        const auto p = all_zero_probability(6, 10);
        CHECK(p.exact == doctest::Approx(53.0 / 63.0).epsilon(1e-15));
        double sum = 0.0;
        for (int k = 1; k <= 10; ++k) sum += 1.0 / (63.0 - (k - 1));
        CHECK(p.hit_union_bound == doctest::Approx(sum).epsilon(1e-12));
    }
    SUBCASE("no queries, no hits") {
        const auto p = all_zero_probability(9, 0);
        CHECK(p.exact == 1.0);
        CHECK(p.hit_union_bound == 0.0);
    }
    SUBCASE("union bound is valid across the grid") {
        for (int n = 2; n <= 16; ++n) {
            const std::uint64_t k = (1ULL << n) - 1;
            for (std::uint64_t q : {std::uint64_t{1}, k / 4, k / 2, k}) {
                const auto p = all_zero_probability(n, q);
                CHECK(p.exact >= 1.0 - p.hit_union_bound - 1e-12);
            }
        }
    }
    SUBCASE("monte carlo agreement at n=8, q=32") {
        const int n = 8;
        const std::uint64_t k = 255, q = 32, trials = 100000;
        std::uint64_t all_zero = 0;
        for (std::uint64_t t = 0; t < trials; ++t) {
            rng::Engine rng(rng::substream_seed(29, t));
            const std::uint64_t witness = 1 + rng.next_below(k);
            // q distinct random queries via partial shuffle of 1..K.
            std::vector<std::uint64_t> pool(k);
            for (std::uint64_t i = 0; i < k; ++i) pool[i] = i + 1;
            bool hit = false;
            for (std::uint64_t j = 0; j < q && !hit; ++j) {
                const std::uint64_t pick = j + rng.next_below(k - j);
                std::swap(pool[j], pool[pick]);
                hit = pool[j] == witness;
            }
            if (!hit) ++all_zero;
        }
        const double expected = all_zero_probability(n, q).exact;
        const double observed = static_cast<double>(all_zero) / static_cast<double>(trials);
        const double se = std::sqrt(expected * (1.0 - expected) / static_cast<double>(trials));
        CHECK(std::abs(observed - expected) <= 3.0 * se);
    }
}

TEST_CASE("transcript total variation distance") {
    const auto norepeat = strategy_by_name("uniform-norepeat");
    const auto lex = strategy_by_name("lexicographic");

    SUBCASE("uniform without replacement: q/K, cross-checked at n=6 q=10") {
        const double tv =
            transcript_tv_distance(6, *norepeat, 10, SubsetMask(3, 6), SubsetMask(17, 6));
        CHECK(tv == doctest::Approx(10.0 / 63.0).epsilon(1e-12));
    }
    SUBCASE("literal enumeration over ordered query pairs at n=3, q=2") {
        // Exhaustive oracle: all 7*6 ordered distinct query pairs, equally
        // likely; episode outcome = (hit position, hit mask) or no hit.
        const std::uint64_t k = 7;
        const std::uint64_t w1 = 5, w2 = 3;
        std::map<std::string, double> dist1, dist2;
        for (std::uint64_t q1 = 1; q1 <= k; ++q1) {
            for (std::uint64_t q2 = 1; q2 <= k; ++q2) {
                if (q1 == q2) continue;
                const double prob = 1.0 / (7.0 * 6.0);
                auto outcome = [&](std::uint64_t w) {
                    if (q1 == w) return std::string("hit1@") + std::to_string(w);
                    if (q2 == w) return std::string("hit2@") + std::to_string(w);
                    return std::string("none");
                };
                dist1[outcome(w1)] += prob;
                dist2[outcome(w2)] += prob;
            }
        }
        double tv_ref = 0.0;
        for (const auto& [key, p1] : dist1) {
            const double p2 = dist2.contains(key) ? dist2[key] : 0.0;
            tv_ref += std::abs(p1 - p2);
        }
        for (const auto& [key, p2] : dist2)
            if (!dist1.contains(key)) tv_ref += p2;
        tv_ref /= 2.0;
        CHECK(tv_ref == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
        CHECK(transcript_tv_distance(3, *norepeat, 2, SubsetMask(w1, 3), SubsetMask(w2, 3)) ==
              doctest::Approx(tv_ref).epsilon(1e-12));
    }
    SUBCASE("deterministic sweep missing both witnesses is indistinguishable") {
        // Lexicographic with q=10 never reaches masks 20 and 40.
        CHECK(transcript_tv_distance(6, *lex, 10, SubsetMask(20, 6), SubsetMask(40, 6)) == 0.0);
    }
    SUBCASE("exhaustive deterministic sweep fully separates witnesses") {
        CHECK(transcript_tv_distance(6, *lex, 63, SubsetMask(20, 6), SubsetMask(40, 6)) == 1.0);
    }
    SUBCASE("with replacement: 1 - (1 - 1/K)^q") {
        const auto repeat = strategy_by_name("uniform-repeat");
        const double tv =
            transcript_tv_distance(6, *repeat, 10, SubsetMask(3, 6), SubsetMask(17, 6));
        CHECK(tv == doctest::Approx(1.0 - std::pow(62.0 / 63.0, 10.0)).epsilon(1e-12));
    }
    SUBCASE("identical witnesses rejected") {
        CHECK_THROWS_AS(
            transcript_tv_distance(6, *norepeat, 5, SubsetMask(3, 6), SubsetMask(3, 6)),
            std::invalid_argument);
    }
    SUBCASE("value-mode descent has no enumerable transcript law") {
        const auto descent = strategy_by_name("neighbor-descent");
        CHECK_THROWS_AS(
            transcript_tv_distance(6, *descent, 5, SubsetMask(3, 6), SubsetMask(17, 6)),
            std::invalid_argument);
    }
}

TEST_CASE("info report assembly") {
    const auto report = make_info_report(6, 10, mi_exact_nonadaptive_bits(6, 10), std::nullopt);
    CHECK(report.candidates == 63);
    CHECK(report.prior_entropy_bits == doctest::Approx(std::log2(63.0)));
    REQUIRE(report.mi_exact_bits.has_value());
    CHECK(*report.mi_exact_bits <= report.mi_upper_bound_bits);
    CHECK(*report.mi_exact_bits >= 0.0);
    CHECK(*report.mi_exact_bits <= report.prior_entropy_bits);
    CHECK(report.fano_error_lower >= 0.0);
    CHECK(report.fano_error_lower <= 1.0);
    CHECK(report.all_zero_prob_exact == doctest::Approx(53.0 / 63.0));
    CHECK(report.all_zero_prob_exact >= report.all_zero_prob_union_bound);
}
