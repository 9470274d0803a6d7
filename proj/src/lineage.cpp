#include "faery/lineage.hpp"

#include <algorithm>
#include <string>

#include "faery/error.hpp"

namespace faery::lineage {

NodeId EvolutionForest::register_root(std::size_t prior_index) {
    const NodeId id = nodes_.size();
    nodes_.push_back({id, std::nullopt, prior_index, 0});
    return id;
}

NodeId EvolutionForest::register_child(NodeId parent_id) {
    if (!contains(parent_id)) {
        throw Error("register_child: unknown parent node " + std::to_string(parent_id));
    }
    const NodeId id = nodes_.size();
    const auto& parent = nodes_[parent_id];
    nodes_.push_back({id, parent_id, parent.root_index, parent.depth + 1});
    return id;
}

const LineageRecord& EvolutionForest::node(NodeId id) const {
    if (!contains(id)) {
        throw Error("unknown lineage node " + std::to_string(id));
    }
    return nodes_[id];
}

const LineageRecord& EvolutionForest::get_root(NodeId id) const {
    const LineageRecord* rec = &node(id);
    while (rec->parent_id) {
        rec = &nodes_[*rec->parent_id];
    }
    return *rec;
}

void EvolutionForest::write_csv(std::ostream& out, std::span<const NodeId> solved) const {
    std::vector<bool> is_solved(nodes_.size(), false);
    for (auto id : solved) {
        if (contains(id)) {
            is_solved[id] = true;
        }
    }
    out << "id,parent,root_index,depth,solved\n";
    for (const auto& n : nodes_) {
        out << n.node_id << ',';
        if (n.parent_id) {
            out << *n.parent_id;
        }
        out << ',' << n.root_index << ',' << n.depth << ',' << (is_solved[n.node_id] ? 1 : 0) << '\n';
    }
}

std::map<std::size_t, RootStats> root_stats(const EvolutionForest& forest, std::span<const NodeId> solved) {
    std::map<std::size_t, RootStats> stats;
    for (const auto& n : forest.nodes()) {
        if (!n.parent_id) {
            stats.try_emplace(n.root_index);
        }
    }
    for (auto id : solved) {
        const auto& rec = forest.node(id);
        auto& s = stats[rec.root_index];
        ++s.solution_count;
        s.solution_depths.push_back(rec.depth);
    }
    return stats;
}

} // namespace faery::lineage
