#include "faery/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "faery/error.hpp"

namespace faery::policy {

std::vector<std::size_t> NetworkShape::layer_sizes() const {
    std::vector<std::size_t> sizes;
    sizes.reserve(hidden_dims.size() + 2);
    sizes.push_back(input_dim);
    sizes.insert(sizes.end(), hidden_dims.begin(), hidden_dims.end());
    sizes.push_back(output_dim);
    return sizes;
}

std::size_t NetworkShape::parameter_count() const {
    const auto sizes = layer_sizes();
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
        n += sizes[l] * sizes[l + 1] + sizes[l + 1];
    }
    return n;
}

void NetworkShape::validate() const {
    for (auto s : layer_sizes()) {
        if (s == 0) {
            throw ConfigError("network shape: every layer width must be positive");
        }
    }
}

Genome::Genome(std::vector<double> params, Bounds bounds) : params_(std::move(params)), bounds_(bounds) {
    if (!(bounds_.lo < bounds_.hi)) {
        throw Error("genome bounds: lo must be < hi");
    }
    for (std::size_t i = 0; i < params_.size(); ++i) {
        if (!bounds_.contains(params_[i])) {
            throw Error("genome coordinate " + std::to_string(i) + " outside bounds");
        }
    }
}

Genome Genome::zeros(std::size_t n, Bounds bounds) {
    return Genome(std::vector<double>(n, std::clamp(0.0, bounds.lo, bounds.hi)), bounds);
}

Genome Genome::uniform(std::size_t n, Bounds bounds, Rng& rng) {
    std::vector<double> p(n);
    for (auto& x : p) {
        x = rng.uniform(bounds.lo, bounds.hi);
    }
    return Genome(std::move(p), bounds);
}

double MutationConfig::gene_probability(std::size_t n) const {
    if (per_gene_prob) {
        return *per_gene_prob;
    }
    return n == 0 ? 0.0 : 1.0 / static_cast<double>(n);
}

void MutationConfig::validate() const {
    if (!(eta > 0.0)) {
        throw ConfigError("mutation.eta must be positive");
    }
    if (per_gene_prob && !(*per_gene_prob >= 0.0 && *per_gene_prob <= 1.0)) {
        throw ConfigError("mutation.per_gene_prob must lie in [0, 1]");
    }
}

FeedForward::FeedForward(const Genome& genome, const NetworkShape& shape)
    : genome_(&genome), shape_(shape), sizes_(shape.layer_sizes()) {
    const std::size_t expected = shape.parameter_count();
    if (genome.size() != expected) {
        throw DimensionMismatch("genome", expected, genome.size());
    }
    const std::size_t widest = *std::max_element(sizes_.begin(), sizes_.end());
    a_.resize(widest);
    b_.resize(widest);
}

void FeedForward::operator()(std::span<const double> observation, std::span<double> action) const {
    if (observation.size() != shape_.input_dim) {
        throw DimensionMismatch("observation", shape_.input_dim, observation.size());
    }
    if (action.size() != shape_.output_dim) {
        throw DimensionMismatch("action", shape_.output_dim, action.size());
    }
    const double* w = genome_->params().data();
    std::copy(observation.begin(), observation.end(), a_.begin());
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        const std::size_t n_in = sizes_[l];
        const std::size_t n_out = sizes_[l + 1];
        const double* bias = w + n_in * n_out;
        for (std::size_t o = 0; o < n_out; ++o) {
            const double* row = w + o * n_in;
            double z = bias[o];
            for (std::size_t i = 0; i < n_in; ++i) {
                z += row[i] * a_[i];
            }
            b_[o] = std::tanh(z);
        }
        w = bias + n_out;
        std::swap(a_, b_);
    }
    std::copy_n(a_.begin(), shape_.output_dim, action.begin());
}

std::vector<double> FeedForward::operator()(std::span<const double> observation) const {
    std::vector<double> out(shape_.output_dim);
    (*this)(observation, out);
    return out;
}

std::vector<double> decode_and_forward(const Genome& genome, const NetworkShape& shape,
                                       std::span<const double> observation) {
    return FeedForward(genome, shape)(observation);
}

double polynomial_perturb(double x, double lo, double hi, double eta, double u) {
    const double exponent = 1.0 / (eta + 1.0);
    double y;
    if (u <= 0.5) {
        const double delta = std::pow(2.0 * u, exponent) - 1.0;
        y = x + delta * (x - lo);
    } else {
        const double delta = 1.0 - std::pow(2.0 * (1.0 - u), exponent);
        y = x + delta * (hi - x);
    }
    return std::clamp(y, lo, hi);
}

Genome mutate(const Genome& genome, const MutationConfig& cfg, Rng& rng) {
    const double p = cfg.gene_probability(genome.size());
    const auto& b = genome.bounds();
    std::vector<double> out(genome.params().begin(), genome.params().end());
    for (auto& x : out) {
        if (rng.uniform() < p) {
            x = polynomial_perturb(x, b.lo, b.hi, cfg.eta, rng.uniform());
        }
    }
    return Genome(std::move(out), b);
}

Offspring<Genome> delta_population(std::span<const Genome> pop, std::size_t lambda, const MutationConfig& cfg,
                                   Rng& rng) {
    return delta_population<Genome>(
        pop, lambda, [&cfg](const Genome& g, Rng& r) { return mutate(g, cfg, r); }, rng);
}

} // namespace faery::policy
