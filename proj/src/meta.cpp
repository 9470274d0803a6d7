#include "faery/meta.hpp"

#include <cmath>
#include <numeric>

namespace faery::meta {

std::string to_string(ObjectiveMode mode) {
    switch (mode) {
    case ObjectiveMode::joint:
        return "joint";
    case ObjectiveMode::f0_only:
        return "f0_only";
    case ObjectiveMode::f1_only:
        return "f1_only";
    }
    return "joint";
}

ObjectiveMode parse_objective_mode(const std::string& name) {
    if (name == "joint") return ObjectiveMode::joint;
    if (name == "f0_only") return ObjectiveMode::f0_only;
    if (name == "f1_only") return ObjectiveMode::f1_only;
    throw ConfigError("unknown objective mode '" + name + "' (expected joint, f0_only or f1_only)");
}

void MetaConfig::validate() const {
    if (mu == 0) throw ConfigError("meta.mu must be positive");
    if (lambda == 0) throw ConfigError("meta.lambda must be positive");
    if (m_train == 0) throw ConfigError("meta.m_train must be positive");
    if (parallelism == 0) throw ConfigError("parallelism must be positive");
    qd.validate();
}

std::vector<MetaScore> compute_meta_scores(std::span<const InstanceLineage> instances, std::size_t candidate_count) {
    std::vector<std::size_t> counts(candidate_count, 0);
    std::vector<std::size_t> depth_sums(candidate_count, 0);
    for (const auto& inst : instances) {
        for (const auto& rec : inst.forest->nodes()) {
            if (rec.root_index >= candidate_count) {
                throw Error("compute_meta_scores: node " + std::to_string(rec.node_id) + " rooted at candidate " +
                            std::to_string(rec.root_index) + ", only " + std::to_string(candidate_count) +
                            " candidates");
            }
        }
        for (const auto& [root, stats] : lineage::root_stats(*inst.forest, inst.solved)) {
            counts[root] += stats.solution_count;
            depth_sums[root] += std::accumulate(stats.solution_depths.begin(), stats.solution_depths.end(),
                                                std::size_t{0});
        }
    }
    std::vector<MetaScore> scores(candidate_count);
    for (std::size_t j = 0; j < candidate_count; ++j) {
        scores[j].f0 = counts[j];
        if (counts[j] > 0) {
            scores[j].f1 = depth_sums[j] == 0 ? 0.0 : -static_cast<double>(depth_sums[j]) / static_cast<double>(counts[j]);
        }
    }
    return scores;
}

evo::ObjectiveVector objectives_for(const MetaScore& s, ObjectiveMode mode) {
    const double f0 = static_cast<double>(s.f0);
    switch (mode) {
    case ObjectiveMode::f0_only:
        return {f0};
    case ObjectiveMode::f1_only:
        return {s.f1};
    case ObjectiveMode::joint:
        break;
    }
    return {f0, s.f1};
}

std::vector<std::size_t> select_prior(std::span<const MetaScore> scores, std::size_t mu, ObjectiveMode mode) {
    std::vector<evo::ObjectiveVector> points;
    points.reserve(scores.size());
    for (const auto& s : scores) points.push_back(objectives_for(s, mode));
    return evo::nsga2_select(points, mu);
}

ScoreSummary summarize(std::span<const MetaScore> scores) {
    ScoreSummary out;
    if (scores.empty()) return out;
    double f0_sum = 0.0;
    double f1_sum = 0.0;
    for (const auto& s : scores) {
        f0_sum += static_cast<double>(s.f0);
        out.f0_max = std::max(out.f0_max, s.f0);
        if (s.f0 > 0) {
            ++out.with_solutions;
            f1_sum += s.f1;
            out.f1_best = std::max(out.f1_best, s.f1);
        }
    }
    out.f0_mean = f0_sum / static_cast<double>(scores.size());
    if (out.with_solutions > 0) out.f1_mean_finite = f1_sum / static_cast<double>(out.with_solutions);
    return out;
}

} // namespace faery::meta
