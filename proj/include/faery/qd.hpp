#pragma once

// One inner QD optimization: NSGA-II over (novelty, fitness) with a capped
// novelty archive, mutation-only variation and full lineage tracking.

#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "faery/error.hpp"
#include "faery/evo.hpp"
#include "faery/lineage.hpp"
#include "faery/policy.hpp"
#include "faery/task.hpp"

namespace faery::qd {

struct QdConfig {
    std::size_t g_qd_max = 200;
    std::size_t s_max = 1;
    double c_lambda = 1.0;
    std::size_t novelty_k = 15;
    std::size_t archive_capacity = 5000;
    evo::EvictionPolicy eviction = evo::EvictionPolicy::uniform_random;

    void validate() const {
        if (s_max < 1) throw ConfigError("qd.s_max must be >= 1");
        if (!(c_lambda > 0.0)) throw ConfigError("qd.c_lambda must be positive");
        if (novelty_k < 1) throw ConfigError("qd.novelty_k must be >= 1");
        if (archive_capacity < 1) throw ConfigError("qd.archive_capacity must be >= 1");
    }
};

template <typename G>
struct Seed {
    G genome;
    std::size_t prior_index = 0;
};

template <typename G>
struct Solution {
    lineage::NodeId node_id = 0;
    G genome;
};

template <typename G>
struct QdOutcome {
    std::vector<Solution<G>> solutions;
    /// Generation the run stopped at, set when at least one solution exists:
    /// the generation of the s_max-th solution, or g_qd_max when the budget ran
    /// out first. Seeds are generation 0.
    std::optional<std::size_t> generations_used;
    lineage::EvolutionForest forest;
    bool solved = false;
    std::size_t evaluations = 0;

    std::vector<lineage::NodeId> solved_nodes() const {
        std::vector<lineage::NodeId> ids;
        ids.reserve(solutions.size());
        for (const auto& s : solutions) ids.push_back(s.node_id);
        return ids;
    }
};

/// A task evaluation failed; carries the node being evaluated.
class EvaluationError : public Error {
public:
    EvaluationError(lineage::NodeId node, const std::string& what)
        : Error("evaluation of node " + std::to_string(node) + " failed: " + what), node_(node) {}
    lineage::NodeId node() const noexcept { return node_; }

private:
    lineage::NodeId node_;
};

namespace detail {

template <typename G>
struct Member {
    G genome;
    lineage::NodeId node = 0;
    double fitness = 0.0;
    evo::Descriptor behavior;
};

template <typename G>
Evaluation evaluate_node(const Task<G>& task, const G& genome, lineage::NodeId node) {
    try {
        return task.evaluate(genome);
    } catch (const std::exception& e) {
        throw EvaluationError(node, e.what());
    }
}

} // namespace detail

inline std::size_t inner_offspring_count(double c_lambda, std::size_t pop_size) {
    return static_cast<std::size_t>(std::ceil(c_lambda * static_cast<double>(pop_size) - 1e-9));
}

template <typename G>
QdOutcome<G> run_qd_instance(const Task<G>& task, std::span<const Seed<G>> seeds, const QdConfig& cfg,
                             const MutateFn<G>& mutate, Rng& rng) {
    using Member = detail::Member<G>;
    if (seeds.empty()) {
        throw Error("run_qd_instance: empty seed population");
    }
    cfg.validate();

    QdOutcome<G> out;
    std::set<std::size_t> seen_priors;
    std::vector<Member> pop;
    pop.reserve(seeds.size());
    for (const auto& s : seeds) {
        if (!seen_priors.insert(s.prior_index).second) {
            throw Error("run_qd_instance: prior index " + std::to_string(s.prior_index) + " seeded twice");
        }
        pop.push_back({s.genome, out.forest.register_root(s.prior_index), 0.0, {}});
    }

    auto finish_if_satisfied = [&](std::size_t generation) {
        if (out.solutions.size() >= cfg.s_max) {
            out.generations_used = generation;
            out.solved = true;
            return true;
        }
        return false;
    };

    evo::NoveltyArchive archive(cfg.archive_capacity, cfg.novelty_k, cfg.eviction);
    {
        std::vector<evo::Descriptor> batch;
        batch.reserve(pop.size());
        for (auto& m : pop) {
            const auto ev = detail::evaluate_node(task, m.genome, m.node);
            ++out.evaluations;
            m.fitness = ev.fitness;
            m.behavior = ev.behavior;
            if (ev.solved) out.solutions.push_back({m.node, m.genome});
            batch.push_back(ev.behavior);
        }
        if (finish_if_satisfied(0)) return out;
        archive.insert(batch, rng);
    }

    const std::size_t mu = pop.size();
    const std::size_t lambda = inner_offspring_count(cfg.c_lambda, mu);
    std::vector<G> parents_view;
    for (std::size_t gen = 1; gen <= cfg.g_qd_max; ++gen) {
        parents_view.clear();
        for (const auto& m : pop) parents_view.push_back(m.genome);
        auto offspring = policy::delta_population<G>(std::span<const G>(parents_view), lambda, mutate, rng);

        std::vector<Member> combined = pop;
        combined.reserve(mu + lambda);
        std::vector<evo::Descriptor> batch;
        batch.reserve(lambda);
        for (std::size_t j = 0; j < lambda; ++j) {
            const auto node = out.forest.register_child(pop[offspring.parents[j]].node);
            const auto ev = detail::evaluate_node(task, offspring.genomes[j], node);
            ++out.evaluations;
            if (ev.solved) out.solutions.push_back({node, offspring.genomes[j]});
            batch.push_back(ev.behavior);
            combined.push_back({std::move(offspring.genomes[j]), node, ev.fitness, ev.behavior});
        }
        if (finish_if_satisfied(gen)) return out;
        if (gen == cfg.g_qd_max) break;

        archive.insert(batch, rng);
        std::vector<evo::Descriptor> behaviors;
        behaviors.reserve(combined.size());
        for (const auto& m : combined) behaviors.push_back(m.behavior);
        const auto novelty = evo::novelty_scores(behaviors, archive);

        std::vector<evo::ObjectiveVector> objectives;
        objectives.reserve(combined.size());
        for (std::size_t i = 0; i < combined.size(); ++i) {
            objectives.push_back({novelty[i], combined[i].fitness});
        }
        const auto keep = evo::nsga2_select(objectives, mu);
        std::vector<Member> next;
        next.reserve(mu);
        for (auto i : keep) next.push_back(std::move(combined[i]));
        pop = std::move(next);
    }
    if (!out.solutions.empty()) {
        out.solved = true;
        out.generations_used = cfg.g_qd_max;
    }
    return out;
}

} // namespace faery::qd
