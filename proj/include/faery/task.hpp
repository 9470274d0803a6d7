#pragma once

#include <functional>
#include <string>

#include "faery/evo.hpp"

namespace faery {

struct Evaluation {
    double fitness = 0.0;
    evo::Descriptor behavior;
    bool solved = false;
};

/// One environment instance: evaluate runs an episode and reports fitness,
/// behavior descriptor and the solve predicate. Must be deterministic and safe
/// to call concurrently.
template <typename G>
struct Task {
    std::string name;
    std::function<Evaluation(const G&)> evaluate;
};

template <typename G>
using MutateFn = std::function<G(const G&, Rng&)>;

} // namespace faery
