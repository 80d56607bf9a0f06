#pragma once

// Monte Carlo driver. Replicates are grouped in fixed-size chunks; each chunk
// is summed sequentially with its own per-replicate streams, and chunk sums
// are combined by a pairwise tree in chunk order. The result therefore does
// not depend on the number of worker threads.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "sbe/errors.hpp"
#include "sbe/random.hpp"

namespace sbe {

struct MonteCarloConfig {
    std::size_t reps = 10'000;
    std::uint64_t seed = 42;
    std::size_t workers = 1;
    std::size_t chunk_size = 1024;
    std::size_t min_reps = 1000;
    std::vector<std::size_t> n_grid;
    std::vector<double> x_grid;

    void validate() const {
        if (reps < min_reps)
            throw ContractViolation("Monte Carlo needs at least " + std::to_string(min_reps) + " replicates, got " +
                                    std::to_string(reps));
        if (chunk_size == 0) throw ContractViolation("chunk size must be positive");
    }
};

/// Column-wise sums and sums of squares.
class MomentAccumulator {
public:
    MomentAccumulator() = default;
    explicit MomentAccumulator(std::size_t width) : sum_(width, 0.0), sumsq_(width, 0.0) {}

    std::size_t width() const { return sum_.size(); }
    std::size_t count() const { return count_; }

    void add(std::span<const double> row) {
        for (std::size_t k = 0; k < sum_.size(); ++k) {
            sum_[k] += row[k];
            sumsq_[k] += row[k] * row[k];
        }
        ++count_;
    }

    /// Weighted row for exact enumeration (weights sum to one, no SE).
    void add_weighted(std::span<const double> row, double w) {
        for (std::size_t k = 0; k < sum_.size(); ++k) {
            sum_[k] += w * row[k];
            sumsq_[k] += w * row[k] * row[k];
        }
        weighted_ = true;
    }

    void merge(const MomentAccumulator& o) {
        for (std::size_t k = 0; k < sum_.size(); ++k) {
            sum_[k] += o.sum_[k];
            sumsq_[k] += o.sumsq_[k];
        }
        count_ += o.count_;
        weighted_ = weighted_ || o.weighted_;
    }

    double mean(std::size_t k) const { return weighted_ ? sum_[k] : sum_[k] / static_cast<double>(count_); }

    /// Standard error of the column mean; zero for exact (weighted) sums.
    double se(std::size_t k) const {
        if (weighted_ || count_ < 2) return 0.0;
        const double n = static_cast<double>(count_);
        const double m = sum_[k] / n;
        const double var = std::max(0.0, (sumsq_[k] / n - m * m) * n / (n - 1));
        return std::sqrt(var / n);
    }

    bool exact() const { return weighted_; }

private:
    std::vector<double> sum_, sumsq_;
    std::size_t count_ = 0;
    bool weighted_ = false;
};

namespace detail {
inline MomentAccumulator pairwise_merge(std::vector<MomentAccumulator>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return parts[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    MomentAccumulator left = pairwise_merge(parts, lo, mid);
    left.merge(pairwise_merge(parts, mid, hi));
    return left;
}
}  // namespace detail

/// Runs fn(rep, rng, row) for every replicate; row has `width` entries.
/// If `keep` is non-null, the columns `keep_cols` of every replicate are
/// stored row-major at keep[rep * keep_cols.size() + k].
template <class Fn>
MomentAccumulator run_monte_carlo(const MonteCarloConfig& cfg, std::size_t width, Fn&& fn,
                                  std::vector<double>* keep = nullptr, std::vector<std::size_t> keep_cols = {0}) {
    cfg.validate();
    const std::size_t chunks = (cfg.reps + cfg.chunk_size - 1) / cfg.chunk_size;
    std::vector<MomentAccumulator> parts(chunks, MomentAccumulator(width));
    if (keep) keep->assign(cfg.reps * keep_cols.size(), 0.0);
    auto work = [&](std::size_t worker, std::size_t stride) {
        std::vector<double> row(width);
        for (std::size_t c = worker; c < chunks; c += stride) {
            const std::size_t begin = c * cfg.chunk_size;
            const std::size_t end = std::min(cfg.reps, begin + cfg.chunk_size);
            for (std::size_t rep = begin; rep < end; ++rep) {
                auto rng = Xoshiro256::substream(cfg.seed, rep);
                std::fill(row.begin(), row.end(), 0.0);
                fn(rep, rng, std::span<double>(row));
                parts[c].add(row);
                if (keep)
                    for (std::size_t k = 0; k < keep_cols.size(); ++k)
                        (*keep)[rep * keep_cols.size() + k] = row[keep_cols[k]];
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.workers, chunks));
    if (workers == 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                try {
                    work(w, workers);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        for (auto& e : errors)
            if (e) std::rethrow_exception(e);
    }
    return detail::pairwise_merge(parts, 0, chunks);
}

}  // namespace sbe
