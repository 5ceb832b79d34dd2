#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hiforead/forecast_set.hpp"

namespace hiforead {

using NodeId = std::string;

inline constexpr std::size_t no_node = std::numeric_limits<std::size_t>::max();

/// A K-level tree of named nodes.
///
/// Node indices are level-major: all level-1 nodes (just the root), then
/// level 2 in input order, and so on. Leaves are exactly the level-K nodes.
/// Immutable after construction and safe to share across threads.
class Hierarchy {
public:
    int levels() const { return levels_; }
    std::size_t node_count() const { return ids_.size(); }
    std::size_t leaf_count() const { return level_nodes_.back().size(); }

    const std::vector<NodeId>& node_ids() const { return ids_; }
    const NodeId& id_of(std::size_t node) const { return ids_[node]; }

    /// 1-based level of a node.
    int level_of(std::size_t node) const { return level_of_[node]; }

    bool contains(const NodeId& id) const { return index_.count(id) != 0; }

    /// Index of a node id; throws Error for unknown ids.
    std::size_t index_of(const NodeId& id) const;

    /// Parent index, or no_node for the root.
    std::size_t parent_of(std::size_t node) const { return parent_[node]; }

    const std::vector<std::size_t>& children_of(std::size_t node) const {
        return children_[node];
    }

    /// Node indices at 1-based level k, in level-major order.
    const std::vector<std::size_t>& level_nodes(int k) const {
        return level_nodes_[static_cast<std::size_t>(k) - 1];
    }

    const std::vector<std::size_t>& leaves() const { return level_nodes_.back(); }

    std::size_t root() const { return 0; }

    bool is_leaf(std::size_t node) const { return level_of_[node] == levels_; }

    /// Leaf indices (into leaves()) that descend from `node`; a leaf is its
    /// own descendant.
    std::vector<std::size_t> descendant_leaf_positions(std::size_t node) const;

private:
    friend Hierarchy build_hierarchy(
        const std::vector<std::pair<NodeId, NodeId>>& edges);
    friend Hierarchy restrict_to_levels(const Hierarchy& h, int max_level);

    Hierarchy() = default;

    std::vector<NodeId> ids_;
    std::unordered_map<NodeId, std::size_t> index_;
    std::vector<std::size_t> parent_;
    std::vector<std::vector<std::size_t>> children_;
    std::vector<int> level_of_;
    std::vector<std::vector<std::size_t>> level_nodes_;
    int levels_ = 0;
};

/// Builds a hierarchy from (parent, child) edges.
///
/// Levels are assigned by distance from the root. Throws Error on cycles,
/// multiple roots, duplicate parents, duplicate edges, or leaves that do not
/// all sit at the bottom level.
Hierarchy build_hierarchy(const std::vector<std::pair<NodeId, NodeId>>& edges);

/// Loads a two-column `parent_id,child_id` CSV (header required).
Hierarchy load_hierarchy_csv(const std::string& path);

/// The sub-hierarchy spanning levels 1..max_level, preserving node order.
/// Level max_level nodes become the leaves. Requires 2 <= max_level <= K.
Hierarchy restrict_to_levels(const Hierarchy& h, int max_level);

/// Binary aggregation matrix: one row per node (level-major), one column per
/// leaf (bottom-level order). Entry (i, j) is 1 iff leaf j descends from
/// (or is) node i.
struct SummingMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> entries; // row-major

    std::uint8_t at(std::size_t r, std::size_t c) const {
        return entries[r * cols + c];
    }
};

SummingMatrix summing_matrix(const Hierarchy& h);

/// Sums leaf vectors up the tree. `leaf_values` is indexed by leaf order and
/// all vectors must have equal length; returns one vector per node (leaf rows
/// pass through unchanged).
std::vector<std::vector<double>> aggregate_bottom_up(
    const Hierarchy& h, const std::vector<std::vector<double>>& leaf_values);

struct CoherenceViolation {
    std::size_t parent = 0;
    std::size_t step = 0;
    double abs_diff = 0.0;
};

/// Result of checking parent = sum(children) across the hierarchy.
///
/// A (parent, step) pair violates when |parent - sum(children)| exceeds
/// tolerance * max(1, |parent|); `coherent` holds iff no pair violates.
struct CoherenceReport {
    double max_abs_violation = 0.0;
    double max_rel_violation = 0.0;
    double tolerance = 0.0;
    bool coherent = true;
    std::size_t violation_count = 0;
    std::vector<CoherenceViolation> violations; // capped at 1000 entries
};

CoherenceReport check_coherence(const Hierarchy& h, const ForecastSet& f,
                                double tolerance = 1e-8);

} // namespace hiforead
