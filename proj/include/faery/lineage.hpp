#pragma once

// Evolution forest of one QD instance: every evaluated individual is a node
// whose tree root is the prior-population member it descends from.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

namespace faery::lineage {

using NodeId = std::size_t;

struct LineageRecord {
    NodeId node_id = 0;
    std::optional<NodeId> parent_id;
    std::size_t root_index = 0;
    std::size_t depth = 0;
};

struct RootStats {
    std::size_t solution_count = 0;
    std::vector<std::size_t> solution_depths;

    bool operator==(const RootStats&) const = default;
};

class EvolutionForest {
public:
    /// New depth-0 node tagged with prior_index.
    NodeId register_root(std::size_t prior_index);
    /// Throws Error on unknown parent.
    NodeId register_child(NodeId parent_id);

    const LineageRecord& node(NodeId id) const;
    /// Walks parent links up to the tree root.
    const LineageRecord& get_root(NodeId id) const;
    std::size_t size() const { return nodes_.size(); }
    bool contains(NodeId id) const { return id < nodes_.size(); }
    std::span<const LineageRecord> nodes() const { return nodes_; }

    /// Node table as CSV: id,parent,root_index,depth,solved.
    void write_csv(std::ostream& out, std::span<const NodeId> solved = {}) const;

private:
    std::vector<LineageRecord> nodes_;
};

/// Solved-descendant count and depths per prior index. Every prior index that
/// roots a tree in the forest appears in the result, solved or not.
std::map<std::size_t, RootStats> root_stats(const EvolutionForest& forest, std::span<const NodeId> solved);

} // namespace faery::lineage
