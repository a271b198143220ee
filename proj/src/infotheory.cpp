#include "pmatrix/infotheory.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace pmatrix {

namespace {

std::uint64_t candidates(int n) {
    if (n < 1 || n > 62) throw std::invalid_argument("infotheory: dimension out of range");
    return (1ULL << n) - 1;
}

} // namespace

double prior_entropy_bits(int n) {
    return std::log2(static_cast<double>(candidates(n)));
}

double posterior_hit_prob(int n, std::uint64_t k) {
    const std::uint64_t cand = candidates(n);
    if (k < 1 || k > cand) throw std::invalid_argument("posterior_hit_prob: k out of range");
    return 1.0 / static_cast<double>(cand - (k - 1));
}

double binary_entropy_bits(double p) {
    if (p <= 0.0 || p >= 1.0) return 0.0;
    return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double mi_chain_bound_bits(int n, std::uint64_t q) {
    const std::uint64_t cand = candidates(n);
    if (q > cand) throw std::invalid_argument("mi_chain_bound: q exceeds the candidate count");
    double sum = 0.0;
    for (std::uint64_t k = 1; k <= q; ++k)
        sum += binary_entropy_bits(1.0 / static_cast<double>(cand - (k - 1)));
    return sum;
}

double mi_exact_nonadaptive_bits(int n, std::uint64_t q) {
    const std::uint64_t cand = candidates(n);
    if (q > cand) throw std::invalid_argument("mi_exact_nonadaptive: q exceeds the candidate count");
    if (q == 0) return 0.0;
    const double k = static_cast<double>(cand);
    const double miss = static_cast<double>(cand - q) / k;
    const double log2k = std::log2(k);
    double h = q * (1.0 / k) * log2k;
    if (miss > 0.0) h -= miss * std::log2(miss);
    return h;
}

MiEstimate mi_estimate_bits(std::span<const std::pair<SubsetMask, Transcript>> samples) {
    if (samples.empty()) throw std::invalid_argument("mi_estimate: empty sample set");

    std::unordered_map<std::uint64_t, std::uint64_t> witness_counts;
    std::unordered_map<std::string, std::uint64_t> transcript_counts;
    std::map<std::pair<std::uint64_t, std::string>, std::uint64_t> joint_counts;
    for (const auto& [witness, transcript] : samples) {
        const std::string key = transcript.byte_key();
        ++witness_counts[witness.bits];
        ++transcript_counts[key];
        ++joint_counts[{witness.bits, key}];
    }

    const double total = static_cast<double>(samples.size());
    double mi = 0.0;
    for (const auto& [wf, count] : joint_counts) {
        const double p_joint = static_cast<double>(count) / total;
        const double p_w = static_cast<double>(witness_counts[wf.first]) / total;
        const double p_f = static_cast<double>(transcript_counts[wf.second]) / total;
        mi += p_joint * std::log2(p_joint / (p_w * p_f));
    }
    return MiEstimate{std::max(mi, 0.0), samples.size()};
}

double fano_error_lower_bound(double mi_bits, std::uint64_t k_candidates) {
    if (k_candidates < 2) throw std::invalid_argument("fano: need at least two candidates");
    if (mi_bits < 0.0) throw std::invalid_argument("fano: negative mutual information");
    const double bound = 1.0 - (mi_bits + 1.0) / std::log2(static_cast<double>(k_candidates));
    return std::clamp(bound, 0.0, 1.0);
}

double fano_exact_error_lower_bound(double mi_bits, std::uint64_t k_candidates) {
    if (k_candidates < 2) throw std::invalid_argument("fano: need at least two candidates");
    const double k = static_cast<double>(k_candidates);
    const double target = std::log2(k) - mi_bits; // required H(W | guess)
    if (target <= 0.0) return 0.0;
    // h2(Pe) + Pe log2(K-1) is increasing on [0, (K-1)/K] and reaches log2 K
    // there; bisect for the smallest Pe meeting the target.
    auto lhs = [&](double pe) { return binary_entropy_bits(pe) + pe * std::log2(k - 1.0); };
    double lo = 0.0;
    double hi = (k - 1.0) / k;
    if (target >= lhs(hi)) return hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (lhs(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

AllZeroProbability all_zero_probability(int n, std::uint64_t q) {
    const std::uint64_t cand = candidates(n);
    if (q > cand) throw std::invalid_argument("all_zero_probability: q exceeds the candidate count");
    AllZeroProbability out;
    out.exact = static_cast<double>(cand - q) / static_cast<double>(cand);
    double sum = 0.0;
    for (std::uint64_t k = 1; k <= q; ++k) sum += 1.0 / static_cast<double>(cand - (k - 1));
    out.hit_union_bound = sum;
    return out;
}

namespace {

// Episode outcomes for a fixed witness w: either "hit at flattened position
// j on w" (j = 1..q) or "no hit". For witness-symmetric random strategies
// the hit atoms of two witnesses are disjoint while the no-hit outcome is
// shared, so TV = (P1(hit) + P2(hit)) / 2 with the position masses summed
// explicitly.
double tv_uniform_without_replacement(std::uint64_t cand, std::uint64_t q) {
    // P(position j hosts the witness) for sampling without replacement,
    // accumulated term by term: prod_{i<j} (K-i)/(K-i+1) * 1/(K-j+1) = 1/K.
    double survive = 1.0;
    double mass_w = 0.0;
    for (std::uint64_t j = 1; j <= q; ++j) {
        const double remaining = static_cast<double>(cand - (j - 1));
        mass_w += survive / remaining;
        survive *= (remaining - 1.0) / remaining;
    }
    return mass_w; // = (mass_w + mass_w2) / 2 by symmetry
}

double tv_uniform_with_replacement(std::uint64_t cand, std::uint64_t q) {
    const double miss = 1.0 - 1.0 / static_cast<double>(cand);
    return 1.0 - std::pow(miss, static_cast<double>(q));
}

// Deterministic strategies: simulate the run under each witness; episodes
// are point masses, so TV is 0 when both miss and 1 otherwise.
double tv_deterministic(int n, const Strategy& strategy, std::uint64_t q, const SubsetMask& w,
                        const SubsetMask& w2) {
    auto episode = [&](const SubsetMask& witness) -> std::optional<std::uint64_t> {
        auto session = OracleSession::synthetic(witness);
        auto run = strategy.start(n, 1, 0);
        for (std::uint64_t j = 1; j <= q; ++j) {
            const auto batch = run->next_batch(session.transcript());
            if (batch.empty()) return std::nullopt;
            if (session.run_round(batch)[0]) return j;
        }
        return std::nullopt;
    };
    const auto e1 = episode(w);
    const auto e2 = episode(w2);
    if (!e1 && !e2) return 0.0;
    return 1.0; // distinct atoms: different positions or different hit masks
}

} // namespace

double transcript_tv_distance(int n, const Strategy& strategy, std::uint64_t q,
                              const SubsetMask& w, const SubsetMask& w2) {
    const std::uint64_t cand = candidates(n);
    if (q > cand) throw std::invalid_argument("transcript_tv_distance: q exceeds candidates");
    w.validate();
    w2.validate();
    if (w.n != n || w2.n != n)
        throw std::invalid_argument("transcript_tv_distance: witness dimension mismatch");
    if (w.bits == w2.bits)
        throw std::invalid_argument("transcript_tv_distance: witnesses must differ");
    if (q == 0) return 0.0;

    switch (strategy.tv_model()) {
        case TvModel::uniform_without_replacement:
            return tv_uniform_without_replacement(cand, q);
        case TvModel::uniform_with_replacement:
            return tv_uniform_with_replacement(cand, q);
        case TvModel::deterministic:
            return tv_deterministic(n, strategy, q, w, w2);
        case TvModel::none:
            break;
    }
    throw std::invalid_argument(
        "transcript_tv_distance: exact enumeration unavailable for this strategy");
}

InfoReport make_info_report(int n, std::uint64_t q, std::optional<double> mi_exact,
                            std::optional<MiEstimate> estimate) {
    InfoReport report;
    report.n = n;
    report.candidates = candidates(n);
    report.q = q;
    report.prior_entropy_bits = prior_entropy_bits(n);
    report.mi_exact_bits = mi_exact;
    if (estimate) {
        report.mi_estimate_bits = estimate->bits;
        report.mi_estimate_samples = estimate->samples;
    }
    report.mi_upper_bound_bits = mi_chain_bound_bits(n, q);
    report.fano_error_lower =
        fano_error_lower_bound(mi_exact.value_or(report.mi_upper_bound_bits), report.candidates);
    const auto zero = all_zero_probability(n, q);
    report.all_zero_prob_exact = zero.exact;
    report.all_zero_prob_union_bound = 1.0 - zero.hit_union_bound;
    return report;
}

} // namespace pmatrix
