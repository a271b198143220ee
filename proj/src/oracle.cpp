#include "pmatrix/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <thread>

#include "pmatrix/minors.hpp"
#include "pmatrix/rng.hpp"

namespace pmatrix {

std::string Transcript::byte_key() const {
    // Queries and responses both enter the key: for randomized strategies
    // the queried masks are part of what the algorithm observed.
    std::string key;
    key.reserve(rounds.size() * 8 + 1);
    key.push_back(mode == OracleMode::sign ? 's' : 'v');
    char buf[32];
    for (const auto& r : rounds) {
        key.push_back('|');
        for (std::size_t i = 0; i < r.queries.size(); ++i) {
            const int len = std::snprintf(buf, sizeof buf, "%llx:%d;",
                                          static_cast<unsigned long long>(r.queries[i].bits),
                                          r.responses[i]);
            key.append(buf, static_cast<std::size_t>(len));
        }
    }
    return key;
}

OracleSession OracleSession::for_matrix(Matrix target, double tau, OracleMode mode) {
    OracleSession s;
    s.n_ = target.dim();
    s.tau_ = tau;
    s.target_ = std::move(target);
    s.transcript_.mode = mode;
    return s;
}

OracleSession OracleSession::synthetic(SubsetMask witness) {
    witness.validate();
    OracleSession s;
    s.n_ = witness.n;
    s.synthetic_ = true;
    s.witness_ = witness;
    return s;
}

int OracleSession::respond(const SubsetMask& alpha, double* value_out) {
    alpha.validate();
    if (alpha.n != n_) throw std::invalid_argument("oracle query: mask dimension mismatch");
    ++query_count_;
    if (synthetic_) {
        return alpha.bits == witness_.bits ? 1 : 0;
    }
    const double value = det(principal_submatrix(target_, alpha));
    if (value_out) *value_out = value;
    return value <= tau_ ? 1 : 0;
}

int OracleSession::query(const SubsetMask& alpha) {
    const SubsetMask batch[1] = {alpha};
    return run_round(batch)[0];
}

std::vector<int> OracleSession::run_round(std::span<const SubsetMask> batch) {
    if (batch.empty()) throw std::invalid_argument("oracle round: empty batch");
    TranscriptRound round;
    round.queries.assign(batch.begin(), batch.end());
    const bool want_values = transcript_.mode == OracleMode::value;
    if (want_values && synthetic_)
        throw std::logic_error("oracle: value mode requires a matrix target");
    for (const auto& alpha : batch) {
        double value = 0.0;
        const int bit = respond(alpha, want_values ? &value : nullptr);
        round.responses.push_back(bit);
        if (want_values) round.values.push_back(value);
    }
    auto out = round.responses;
    transcript_.rounds.push_back(std::move(round));
    return out;
}

namespace {

std::uint64_t candidate_count(int n) {
    if (n < 1 || n > 62) throw std::invalid_argument("oracle: dimension out of range");
    return (1ULL << n) - 1;
}

class LexicographicRun : public StrategyRun {
public:
    LexicographicRun(int n, int limit) : k_(candidate_count(n)), n_(n), limit_(limit) {}
    std::vector<SubsetMask> next_batch(const Transcript&) override {
        std::vector<SubsetMask> batch;
        while (static_cast<int>(batch.size()) < limit_ && next_ <= k_)
            batch.emplace_back(next_++, n_);
        return batch;
    }

private:
    std::uint64_t k_;
    std::uint64_t next_ = 1;
    int n_;
    int limit_;
};

class LexicographicStrategy : public Strategy {
public:
    std::string_view name() const override { return "lexicographic"; }
    TvModel tv_model() const override { return TvModel::deterministic; }
    std::unique_ptr<StrategyRun> start(int n, int limit, std::uint64_t) const override {
        return std::make_unique<LexicographicRun>(n, limit);
    }
};

class UniformNoRepeatRun : public StrategyRun {
public:
    UniformNoRepeatRun(int n, int limit, std::uint64_t seed)
        : n_(n), limit_(limit), rng_(seed) {
        const std::uint64_t k = candidate_count(n);
        if (k > (1ULL << 22))
            throw std::invalid_argument("uniform-norepeat: candidate pool too large");
        pool_.resize(k);
        for (std::uint64_t i = 0; i < k; ++i) pool_[i] = i + 1;
    }

    std::vector<SubsetMask> next_batch(const Transcript&) override {
        std::vector<SubsetMask> batch;
        while (static_cast<int>(batch.size()) < limit_ && drawn_ < pool_.size()) {
            const std::uint64_t j = drawn_ + rng_.next_below(pool_.size() - drawn_);
            std::swap(pool_[drawn_], pool_[j]);
            batch.emplace_back(pool_[drawn_], n_);
            ++drawn_;
        }
        return batch;
    }

private:
    int n_;
    int limit_;
    rng::Engine rng_;
    std::vector<std::uint64_t> pool_;
    std::size_t drawn_ = 0;
};

class UniformNoRepeatStrategy : public Strategy {
public:
    std::string_view name() const override { return "uniform-norepeat"; }
    TvModel tv_model() const override { return TvModel::uniform_without_replacement; }
    std::unique_ptr<StrategyRun> start(int n, int limit, std::uint64_t seed) const override {
        return std::make_unique<UniformNoRepeatRun>(n, limit, seed);
    }
};

class UniformRepeatRun : public StrategyRun {
public:
    UniformRepeatRun(int n, int limit, std::uint64_t seed)
        : k_(candidate_count(n)), n_(n), limit_(limit), rng_(seed) {}
    std::vector<SubsetMask> next_batch(const Transcript&) override {
        std::vector<SubsetMask> batch;
        batch.reserve(static_cast<std::size_t>(limit_));
        for (int i = 0; i < limit_; ++i) batch.emplace_back(1 + rng_.next_below(k_), n_);
        return batch;
    }

private:
    std::uint64_t k_;
    int n_;
    int limit_;
    rng::Engine rng_;
};

class UniformRepeatStrategy : public Strategy {
public:
    std::string_view name() const override { return "uniform-repeat"; }
    TvModel tv_model() const override { return TvModel::uniform_with_replacement; }
    std::unique_ptr<StrategyRun> start(int n, int limit, std::uint64_t seed) const override {
        return std::make_unique<UniformRepeatRun>(n, limit, seed);
    }
};

// Greedy minimum-value walk over single-index neighbors. Emits one query
// per round: first the current subset, then each neighbor; moves to the
// best neighbor only on strict improvement, stops in local minima.
class NeighborDescentRun : public StrategyRun {
public:
    NeighborDescentRun(int n, std::uint64_t start_bits, std::uint64_t seed) : n_(n) {
        if (start_bits == 0) {
            rng::Engine rng(seed);
            start_bits = 1 + rng.next_below(candidate_count(n));
        }
        current_ = start_bits;
    }

    std::vector<SubsetMask> next_batch(const Transcript& history) override {
        if (!history.rounds.empty()) {
            const auto& last = history.rounds.back();
            if (last.values.empty())
                throw std::invalid_argument("neighbor-descent: requires value mode");
            last_value_ = last.values.back();
        }
        if (!current_queried_) {
            current_queried_ = true;
            return {SubsetMask(current_, n_)};
        }
        if (!neighbors_built_) {
            current_value_ = last_value_;
            build_neighbors();
        } else {
            neighbor_values_.push_back(last_value_);
        }
        if (next_neighbor_ < neighbors_.size()) {
            return {SubsetMask(neighbors_[next_neighbor_++], n_)};
        }
        // All neighbors observed: move to the best on strict improvement.
        std::size_t best = 0;
        for (std::size_t i = 1; i < neighbor_values_.size(); ++i) {
            if (neighbor_values_[i] < neighbor_values_[best] ||
                (neighbor_values_[i] == neighbor_values_[best] && neighbors_[i] < neighbors_[best]))
                best = i;
        }
        if (!neighbor_values_.empty() && neighbor_values_[best] < current_value_) {
            current_ = neighbors_[best];
            current_value_ = neighbor_values_[best];
            build_neighbors();
            if (next_neighbor_ < neighbors_.size())
                return {SubsetMask(neighbors_[next_neighbor_++], n_)};
        }
        return {}; // local minimum
    }

private:
    void build_neighbors() {
        neighbors_.clear();
        neighbor_values_.clear();
        next_neighbor_ = 0;
        neighbors_built_ = true;
        for (int b = 0; b < n_; ++b) {
            const std::uint64_t nb = current_ ^ (1ULL << b);
            if (nb != 0) neighbors_.push_back(nb);
        }
        // First neighbor's value arrives with the next round; account for the
        // query we are about to emit.
        neighbor_values_.reserve(neighbors_.size());
    }

    int n_;
    std::uint64_t current_ = 0;
    double current_value_ = 0.0;
    double last_value_ = 0.0;
    bool current_queried_ = false;
    bool neighbors_built_ = false;
    std::vector<std::uint64_t> neighbors_;
    std::vector<double> neighbor_values_;
    std::size_t next_neighbor_ = 0;
};

class NeighborDescentStrategy : public Strategy {
public:
    explicit NeighborDescentStrategy(std::uint64_t start_bits = 0) : start_bits_(start_bits) {}
    std::string_view name() const override { return "neighbor-descent"; }
    bool needs_values() const override { return true; }
    std::unique_ptr<StrategyRun> start(int n, int, std::uint64_t seed) const override {
        return std::make_unique<NeighborDescentRun>(n, start_bits_, seed);
    }

private:
    std::uint64_t start_bits_;
};

} // namespace

const std::vector<std::shared_ptr<const Strategy>>& builtin_strategies() {
    static const std::vector<std::shared_ptr<const Strategy>> all = {
        std::make_shared<LexicographicStrategy>(),
        std::make_shared<UniformNoRepeatStrategy>(),
        std::make_shared<UniformRepeatStrategy>(),
        std::make_shared<NeighborDescentStrategy>(),
    };
    return all;
}

std::shared_ptr<const Strategy> strategy_by_name(std::string_view name) {
    for (const auto& s : builtin_strategies())
        if (s->name() == name) return s;
    throw std::invalid_argument("unknown strategy: " + std::string(name));
}

std::shared_ptr<const Strategy> neighbor_descent_from(const SubsetMask& start) {
    start.validate();
    return std::make_shared<NeighborDescentStrategy>(start.bits);
}

RunResult run_strategy(OracleSession& session, const Strategy& strategy, int p, int max_rounds,
                       std::uint64_t seed) {
    if (p < 1) throw std::invalid_argument("run_strategy: p must be at least 1");
    if (strategy.needs_values() && session.mode() != OracleMode::value)
        throw std::invalid_argument("run_strategy: strategy requires a value-mode session");

    auto run = strategy.start(session.n(), p, seed);
    RunResult result;
    for (int round = 1; round <= max_rounds; ++round) {
        const auto batch = run->next_batch(session.transcript());
        if (batch.empty()) break;
        if (static_cast<int>(batch.size()) > p)
            throw std::invalid_argument("run_strategy: strategy emitted an oversized batch");
        for (const auto& alpha : batch) {
            alpha.validate();
            if (alpha.n != session.n())
                throw std::invalid_argument("run_strategy: strategy emitted a foreign mask");
        }
        const auto responses = session.run_round(batch);
        for (std::size_t i = 0; i < responses.size(); ++i) {
            if (responses[i]) {
                result.hit_round = round;
                result.hit_mask = batch[i];
                break;
            }
        }
        if (result.hit_round) break;
    }
    result.transcript = session.transcript();
    return result;
}

RunResult run_strategy(const Instance& inst, const Strategy& strategy, int p, int max_rounds,
                       std::uint64_t seed, double tau, OracleMode mode) {
    auto session = OracleSession::for_matrix(apply_perturbation(inst), tau, mode);
    return run_strategy(session, strategy, p, max_rounds, seed);
}

RunResult run_strategy(const SubsetMask& witness, const Strategy& strategy, int p, int max_rounds,
                       std::uint64_t seed) {
    auto session = OracleSession::synthetic(witness);
    return run_strategy(session, strategy, p, max_rounds, seed);
}

int default_max_rounds(const Strategy& strategy, int n, int p) {
    const std::uint64_t k = candidate_count(n);
    const std::uint64_t per_round = static_cast<std::uint64_t>(p);
    if (strategy.tv_model() == TvModel::uniform_with_replacement) {
        const std::uint64_t r = 100 * k / per_round;
        return static_cast<int>(std::min<std::uint64_t>(r, 1u << 30));
    }
    return static_cast<int>((k + per_round - 1) / per_round);
}

FirstHitReport first_hit_experiment(int n, int p, std::uint64_t trials, const Strategy& strategy,
                                    std::uint64_t seed, int threads) {
    if (trials == 0) throw std::invalid_argument("first_hit_experiment: trials must be positive");
    if (p < 1) throw std::invalid_argument("first_hit_experiment: p must be at least 1");
    const std::uint64_t k = candidate_count(n);
    const int max_rounds = default_max_rounds(strategy, n, p);

    std::vector<int> hit_rounds(trials, 0);
    std::vector<std::uint64_t> query_totals(trials, 0);

    auto work = [&](std::uint64_t lo, std::uint64_t hi) {
        for (std::uint64_t t = lo; t < hi; ++t) {
            rng::Engine witness_rng(rng::substream_seed(seed, 2 * t));
            const SubsetMask witness(1 + witness_rng.next_below(k), n);
            auto session = OracleSession::synthetic(witness);
            const auto run =
                run_strategy(session, strategy, p, max_rounds, rng::substream_seed(seed, 2 * t + 1));
            hit_rounds[t] = run.hit_round.value_or(0);
            query_totals[t] = run.transcript.total_queries();
        }
    };

    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp<int>(workers, 1, 16);
    workers = static_cast<int>(std::min<std::uint64_t>(workers, trials));
    if (workers <= 1) {
        work(0, trials);
    } else {
        std::vector<std::thread> pool;
        const std::uint64_t chunk = (trials + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::uint64_t lo = chunk * static_cast<std::uint64_t>(w);
            const std::uint64_t hi = std::min<std::uint64_t>(trials, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    FirstHitReport report;
    report.n = n;
    report.p = p;
    report.trials = trials;
    report.strategy = std::string(strategy.name());
    report.seed = seed;
    double sum_rounds = 0.0;
    double sum_queries = 0.0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        // A trial that never hit (possible with replacement) counts the cap.
        sum_rounds += hit_rounds[t] == 0 ? max_rounds : hit_rounds[t];
        sum_queries += static_cast<double>(query_totals[t]);
        ++report.histogram[hit_rounds[t]];
    }
    report.mean_rounds = sum_rounds / static_cast<double>(trials);
    report.mean_queries = sum_queries / static_cast<double>(trials);
    const TvModel model = strategy.tv_model();
    if (model == TvModel::uniform_without_replacement || model == TvModel::deterministic)
        report.exact_expectation = exact_mean_rounds(n, p);
    return report;
}

double exact_mean_rounds(int n, int p) {
    const std::uint64_t k = candidate_count(n);
    std::uint64_t sum = 0;
    for (std::uint64_t u = 1; u <= k; ++u) sum += (u + p - 1) / static_cast<std::uint64_t>(p);
    return static_cast<double>(sum) / static_cast<double>(k);
}

} // namespace pmatrix
