#pragma once

// Multi-objective selection and novelty scoring. All objectives are maximized.
// The worst sentinel is -infinity; it compares below every finite value and
// equal to itself.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "faery/rng.hpp"

namespace faery::evo {

using ObjectiveVector = std::vector<double>;
using Descriptor = std::vector<double>;

inline constexpr double kWorst = -std::numeric_limits<double>::infinity();

/// a >= b everywhere and a > b somewhere.
bool dominates(std::span<const double> a, std::span<const double> b);

/// Fronts of indices, rank 0 first. Indices inside a front are ascending.
std::vector<std::vector<std::size_t>> non_dominated_sort(std::span<const ObjectiveVector> points);

/// Boundary points of every objective get +inf. Interior gaps are normalized by
/// the finite range of the objective; an objective with no spread contributes 0.
/// A gap between a sentinel and a finite neighbour is infinite.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

/// Indices (ascending) of the mu survivors: whole fronts in rank order, the
/// splitting front truncated by descending crowding distance, ties to the lower
/// index.
std::vector<std::size_t> nsga2_select(std::span<const ObjectiveVector> points, std::size_t mu);

enum class EvictionPolicy { uniform_random, fifo };

class NoveltyArchive {
public:
    NoveltyArchive(std::size_t capacity, std::size_t k, EvictionPolicy policy = EvictionPolicy::uniform_random);

    std::size_t capacity() const { return capacity_; }
    std::size_t k() const { return k_; }
    std::size_t size() const { return behaviors_.size(); }
    bool empty() const { return behaviors_.empty(); }
    /// 0 while empty.
    std::size_t dimension() const { return dim_; }
    const std::vector<Descriptor>& behaviors() const { return behaviors_; }

    /// Appends every descriptor, then evicts until size <= capacity.
    void insert(std::span<const Descriptor> batch, Rng& rng);

private:
    std::size_t capacity_;
    std::size_t k_;
    EvictionPolicy policy_;
    std::size_t dim_ = 0;
    std::vector<Descriptor> behaviors_;
};

/// Value-semantics form of NoveltyArchive::insert.
NoveltyArchive archive_insert(NoveltyArchive archive, std::span<const Descriptor> batch, Rng& rng);

/// Mean Euclidean distance from each population member to its k nearest
/// neighbours in (population minus itself) plus the archive. When fewer than k
/// references exist the mean runs over all of them; no references gives 0.
std::vector<double> novelty_scores(std::span<const Descriptor> population, const NoveltyArchive& archive);

std::vector<double> novelty_scores(std::span<const Descriptor> population, std::span<const Descriptor> archive,
                                   std::size_t k);

} // namespace faery::evo
