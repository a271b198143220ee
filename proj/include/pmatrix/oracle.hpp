#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pmatrix/matrix.hpp"

namespace pmatrix {

// sign: the bit oracle [det(A_alpha) <= tau]. value: an extended mode that
// also reveals the minor itself; it exists to probe whether raw minor
// values carry directional information, and is never used by the
// information-theoretic computations.
enum class OracleMode { sign, value };

struct TranscriptRound {
    std::vector<SubsetMask> queries;
    std::vector<int> responses;  // bits
    std::vector<double> values;  // value mode only, parallel to queries
};

struct Transcript {
    OracleMode mode = OracleMode::sign;
    std::vector<TranscriptRound> rounds;

    std::size_t total_queries() const {
        std::size_t q = 0;
        for (const auto& r : rounds) q += r.queries.size();
        return q;
    }
    // F_q: responses flattened across rounds in emission order.
    std::vector<int> flattened() const {
        std::vector<int> out;
        out.reserve(total_queries());
        for (const auto& r : rounds) out.insert(out.end(), r.responses.begin(), r.responses.end());
        return out;
    }
    // Canonical byte string for exact-equality bucketing.
    std::string byte_key() const;
};

// One hidden target plus a growing transcript. Responses are a pure
// function of (target, query, tau). Synthetic sessions hold only a hidden
// witness mask and answer equality; they behave exactly like a verified
// single-violation matrix at a fraction of the cost.
class OracleSession {
public:
    static OracleSession for_matrix(Matrix target, double tau, OracleMode mode = OracleMode::sign);
    static OracleSession synthetic(SubsetMask witness);

    int n() const { return n_; }
    OracleMode mode() const { return transcript_.mode; }
    std::uint64_t query_count() const { return query_count_; }
    const Transcript& transcript() const { return transcript_; }

    // Single query, recorded as a one-query round.
    int query(const SubsetMask& alpha);
    // One round of parallel queries.
    std::vector<int> run_round(std::span<const SubsetMask> batch);

private:
    OracleSession() = default;
    int respond(const SubsetMask& alpha, double* value_out);

    int n_ = 0;
    double tau_ = 0.0;
    bool synthetic_ = false;
    Matrix target_;
    SubsetMask witness_;
    std::uint64_t query_count_ = 0;
    Transcript transcript_;
};

// Per-run strategy state: emits the next batch given the transcript so
// far. An empty batch means the strategy is done (e.g. a descent stuck in
// a local minimum).
class StrategyRun {
public:
    virtual ~StrategyRun() = default;
    virtual std::vector<SubsetMask> next_batch(const Transcript& history) = 0;
};

// Exactly computable transcript-distribution families (see infotheory).
enum class TvModel { none, deterministic, uniform_without_replacement, uniform_with_replacement };

class Strategy {
public:
    virtual ~Strategy() = default;
    virtual std::string_view name() const = 0;
    virtual bool needs_values() const { return false; }
    virtual TvModel tv_model() const { return TvModel::none; }
    virtual std::unique_ptr<StrategyRun> start(int n, int batch_limit,
                                               std::uint64_t seed) const = 0;
};

// lexicographic: ascending mask sweep.
// uniform-norepeat: uniform over not-yet-queried masks.
// uniform-repeat: i.i.d. uniform masks.
// neighbor-descent: greedy walk on observed minor values (value mode).
const std::vector<std::shared_ptr<const Strategy>>& builtin_strategies();
std::shared_ptr<const Strategy> strategy_by_name(std::string_view name);

// Descent from a fixed start mask; used to study whether minor values
// carry a monotone trend toward the witness.
std::shared_ptr<const Strategy> neighbor_descent_from(const SubsetMask& start);

struct RunResult {
    Transcript transcript;
    std::optional<int> hit_round;      // 1-based round of the first positive response
    std::optional<SubsetMask> hit_mask;
};

// Executes rounds of at most p queries until the first positive response,
// strategy exhaustion, or max_rounds. Fully reproducible from the seed.
RunResult run_strategy(OracleSession& session, const Strategy& strategy, int p, int max_rounds,
                       std::uint64_t seed);
RunResult run_strategy(const Instance& inst, const Strategy& strategy, int p, int max_rounds,
                       std::uint64_t seed, double tau = 0.0, OracleMode mode = OracleMode::sign);
RunResult run_strategy(const SubsetMask& witness, const Strategy& strategy, int p, int max_rounds,
                       std::uint64_t seed);

// ceil(K/p) for strategies that never repeat, 100*K/p otherwise.
int default_max_rounds(const Strategy& strategy, int n, int p);

struct FirstHitReport {
    int n = 0;
    int p = 0;
    std::uint64_t trials = 0;
    std::string strategy;
    std::uint64_t seed = 0;
    OracleMode mode = OracleMode::sign;
    double mean_rounds = 0.0;
    double mean_queries = 0.0;
    // E[ceil(U/p)], U uniform on {1..K}; present for non-repeating uniform
    // sweeps where the hit position is exactly uniform.
    std::optional<double> exact_expectation;
    std::map<int, std::uint64_t> histogram; // hit round -> trials (0 = never hit)
};

// Synthetic-mode Monte Carlo: per trial the witness is uniform over the
// K = 2^n - 1 nonempty masks. Trials use independent substreams of `seed`
// and may run on several threads; the report does not depend on the count.
FirstHitReport first_hit_experiment(int n, int p, std::uint64_t trials, const Strategy& strategy,
                                    std::uint64_t seed, int threads = 0);

// E[ceil(U/p)] for U uniform on {1..K}, K = 2^n - 1, by direct summation.
double exact_mean_rounds(int n, int p);

} // namespace pmatrix
