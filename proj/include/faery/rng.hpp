#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace faery {

/// Random stream used by every stochastic operation. Streams are derived from
/// a master seed plus logical keys, never from thread identity or wall clock.
class Rng {
public:
    using engine_type = std::mt19937_64;

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on [0, n). n must be positive.
    std::size_t index(std::size_t n);
    /// Uniform integer on [lo, hi].
    long long integer(long long lo, long long hi);
    double normal(double mean, double stddev);
    bool bernoulli(double p) { return uniform() < p; }

    std::uint64_t next() { return engine_(); }
    engine_type& engine() { return engine_; }

private:
    engine_type engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Hashes (master, keys...) into a stream seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys);

inline Rng derive_stream(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
    return Rng(derive_seed(master, keys));
}

/// Logical stream tags. Values are part of the determinism contract.
enum class Stream : std::uint64_t {
    init_prior = 1,
    train_tasks = 2,
    prior_variation = 3,
    train_qd = 4,
    test_tasks = 5,
    test_qd = 6,
    dataset = 7,
    eval_tasks = 8,
    eval_qd = 9,
    ablation = 10,
    task_noise = 11,
};

constexpr std::uint64_t key(Stream s) { return static_cast<std::uint64_t>(s); }

} // namespace faery
