#pragma once

// Bounded real-valued genomes decoded as fully connected tanh networks.
//
// Flat parameter layout, fixed for checkpoint portability: for each pair of
// consecutive layers (n_in -> n_out), the n_out x n_in weight matrix in
// row-major order, followed by the n_out biases.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "faery/rng.hpp"

namespace faery::policy {

struct NetworkShape {
    std::size_t input_dim = 0;
    std::vector<std::size_t> hidden_dims;
    std::size_t output_dim = 0;

    std::vector<std::size_t> layer_sizes() const;
    std::size_t parameter_count() const;
    /// Throws ConfigError on zero-width layers.
    void validate() const;

    bool operator==(const NetworkShape&) const = default;
};

struct Bounds {
    double lo = -1.0;
    double hi = 1.0;

    bool contains(double x) const { return x >= lo && x <= hi; }
    bool operator==(const Bounds&) const = default;
};

class Genome {
public:
    Genome() = default;
    /// Throws Error if lo >= hi or a coordinate lies outside the bounds.
    Genome(std::vector<double> params, Bounds bounds);

    static Genome zeros(std::size_t n, Bounds bounds = {});
    /// Coordinate-wise uniform in [lo, hi].
    static Genome uniform(std::size_t n, Bounds bounds, Rng& rng);

    std::span<const double> params() const { return params_; }
    const Bounds& bounds() const { return bounds_; }
    std::size_t size() const { return params_.size(); }
    double operator[](std::size_t i) const { return params_[i]; }

    bool operator==(const Genome&) const = default;

private:
    std::vector<double> params_;
    Bounds bounds_;
};

struct MutationConfig {
    double eta = 15.0;
    /// Unset means 1 / parameter_count.
    std::optional<double> per_gene_prob;

    double gene_probability(std::size_t n) const;
    void validate() const;
};

/// Forward evaluator bound to one genome. Reuses internal buffers, so a single
/// instance must not be shared across threads.
class FeedForward {
public:
    FeedForward(const Genome& genome, const NetworkShape& shape);

    /// Writes output_dim actions, each in (-1, 1).
    void operator()(std::span<const double> observation, std::span<double> action) const;
    std::vector<double> operator()(std::span<const double> observation) const;

    const NetworkShape& shape() const { return shape_; }

private:
    const Genome* genome_;
    NetworkShape shape_;
    std::vector<std::size_t> sizes_;
    mutable std::vector<double> a_;
    mutable std::vector<double> b_;
};

std::vector<double> decode_and_forward(const Genome& genome, const NetworkShape& shape,
                                       std::span<const double> observation);

/// Bounded polynomial perturbation of one coordinate for a given uniform draw u.
/// u <= 0.5 moves toward lo by (2u)^(1/(eta+1)) - 1 times (x - lo); u > 0.5
/// moves toward hi by 1 - (2(1-u))^(1/(eta+1)) times (hi - x).
double polynomial_perturb(double x, double lo, double hi, double eta, double u);

Genome mutate(const Genome& genome, const MutationConfig& cfg, Rng& rng);

template <typename G>
struct Offspring {
    std::vector<G> genomes;
    std::vector<std::size_t> parents;
};

/// Round-robin parent assignment: offspring j descends from pop[j mod |pop|].
template <typename G, typename MutateFn>
Offspring<G> delta_population(std::span<const G> pop, std::size_t lambda, MutateFn&& mutate_one, Rng& rng);

Offspring<Genome> delta_population(std::span<const Genome> pop, std::size_t lambda, const MutationConfig& cfg,
                                   Rng& rng);

} // namespace faery::policy

#include "faery/error.hpp"

namespace faery::policy {

template <typename G, typename MutateFn>
Offspring<G> delta_population(std::span<const G> pop, std::size_t lambda, MutateFn&& mutate_one, Rng& rng) {
    if (pop.empty()) {
        throw Error("delta_population: empty population");
    }
    Offspring<G> out;
    out.genomes.reserve(lambda);
    out.parents.reserve(lambda);
    for (std::size_t j = 0; j < lambda; ++j) {
        const std::size_t p = j % pop.size();
        out.genomes.push_back(mutate_one(pop[p], rng));
        out.parents.push_back(p);
    }
    return out;
}

} // namespace faery::policy
