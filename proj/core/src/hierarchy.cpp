#include "hiforead/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>

#include "hiforead/errors.hpp"
#include "csv_util.hpp"

namespace hiforead {

const char* stage_name(Stage stage) {
    switch (stage) {
        case Stage::BO: return "BO";
        case Stage::TD: return "TD";
        case Stage::HHAFA: return "HHAFA";
        case Stage::MINT: return "MINT";
        case Stage::SSWFS: return "SSWFS";
        case Stage::FINAL: return "FINAL";
    }
    return "?";
}

std::size_t Hierarchy::index_of(const NodeId& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error("unknown node id '" + id + "'");
    return it->second;
}

std::vector<std::size_t> Hierarchy::descendant_leaf_positions(
    std::size_t node) const {
    std::vector<std::size_t> leaf_position(node_count(), no_node);
    const auto& bottom = leaves();
    for (std::size_t j = 0; j < bottom.size(); ++j) leaf_position[bottom[j]] = j;

    std::vector<std::size_t> out;
    std::vector<std::size_t> stack{node};
    while (!stack.empty()) {
        const std::size_t n = stack.back();
        stack.pop_back();
        if (is_leaf(n)) {
            out.push_back(leaf_position[n]);
        } else {
            const auto& ch = children_[n];
            stack.insert(stack.end(), ch.rbegin(), ch.rend());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Hierarchy build_hierarchy(const std::vector<std::pair<NodeId, NodeId>>& edges) {
    if (edges.empty()) throw Error("hierarchy edge list is empty");

    // Collect ids in first-appearance order; map child -> parent.
    std::vector<NodeId> order;
    std::unordered_map<NodeId, std::size_t> seen;
    auto note = [&](const NodeId& id) {
        if (seen.emplace(id, order.size()).second) order.push_back(id);
    };
    std::unordered_map<NodeId, NodeId> parent_of;
    std::set<std::pair<NodeId, NodeId>> unique_edges;
    for (const auto& [parent, child] : edges) {
        note(parent);
        note(child);
        if (!unique_edges.emplace(parent, child).second) {
            throw Error("duplicate edge " + parent + " -> " + child);
        }
        auto [it, inserted] = parent_of.emplace(child, parent);
        if (!inserted) {
            throw Error("duplicate parent for node '" + child + "' ('" +
                        it->second + "' and '" + parent + "')");
        }
    }

    // The root is the unique node that never appears as a child.
    std::vector<NodeId> roots;
    for (const auto& id : order) {
        if (parent_of.find(id) == parent_of.end()) roots.push_back(id);
    }
    if (roots.empty()) throw Error("cycle detected: no root node");
    if (roots.size() > 1) {
        std::string msg = "multiple roots:";
        for (const auto& r : roots) msg += " '" + r + "'";
        throw Error(msg);
    }

    // Breadth-first levels from the root.
    std::unordered_map<NodeId, std::vector<NodeId>> children_of;
    for (const auto& [child, parent] : parent_of) {
        children_of[parent].push_back(child);
    }
    std::unordered_map<NodeId, int> depth;
    std::deque<NodeId> queue{roots[0]};
    depth[roots[0]] = 0;
    while (!queue.empty()) {
        const NodeId id = queue.front();
        queue.pop_front();
        auto it = children_of.find(id);
        if (it == children_of.end()) continue;
        for (const auto& child : it->second) {
            depth[child] = depth[id] + 1;
            queue.push_back(child);
        }
    }
    if (depth.size() != order.size()) {
        std::string msg = "cycle detected: unreachable nodes:";
        for (const auto& id : order) {
            if (depth.find(id) == depth.end()) msg += " '" + id + "'";
        }
        throw Error(msg);
    }

    int max_depth = 0;
    for (const auto& [id, d] : depth) max_depth = std::max(max_depth, d);
    const int levels = max_depth + 1;
    if (levels < 2) throw Error("hierarchy must have at least 2 levels");

    // Leaves must all sit at the bottom level.
    for (const auto& id : order) {
        const bool leaf = children_of.find(id) == children_of.end();
        if (leaf && depth[id] != max_depth) {
            throw Error("leaf '" + id + "' sits at level " +
                        std::to_string(depth[id] + 1) + " but the hierarchy has " +
                        std::to_string(levels) + " levels");
        }
    }

    // Level-major index, stable by first appearance within a level.
    Hierarchy h;
    h.levels_ = levels;
    h.level_nodes_.resize(static_cast<std::size_t>(levels));
    for (int k = 0; k < levels; ++k) {
        for (const auto& id : order) {
            if (depth[id] != k) continue;
            const std::size_t idx = h.ids_.size();
            h.ids_.push_back(id);
            h.index_.emplace(id, idx);
            h.level_of_.push_back(k + 1);
            h.level_nodes_[static_cast<std::size_t>(k)].push_back(idx);
        }
    }
    h.parent_.assign(h.ids_.size(), no_node);
    h.children_.resize(h.ids_.size());
    for (const auto& [child, parent] : parent_of) {
        h.parent_[h.index_.at(child)] = h.index_.at(parent);
    }
    // Children listed in level-major (= input) order.
    for (std::size_t idx = 0; idx < h.ids_.size(); ++idx) {
        if (h.parent_[idx] != no_node) h.children_[h.parent_[idx]].push_back(idx);
    }
    return h;
}

Hierarchy load_hierarchy_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open hierarchy file " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("hierarchy file " + path + " is empty");
    const auto header = csv::split_line(line);
    const std::size_t parent_col = csv::column_index(header, "parent_id", path);
    const std::size_t child_col = csv::column_index(header, "child_id", path);

    std::vector<std::pair<NodeId, NodeId>> edges;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty() || line == "\r") continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != header.size()) {
            throw DataError(path + ":" + std::to_string(line_number) +
                            ": expected " + std::to_string(header.size()) +
                            " fields, got " + std::to_string(fields.size()));
        }
        edges.emplace_back(fields[parent_col], fields[child_col]);
    }
    if (edges.empty()) throw DataError("hierarchy file " + path + " has no edges");
    return build_hierarchy(edges);
}

Hierarchy restrict_to_levels(const Hierarchy& h, int max_level) {
    if (max_level < 2 || max_level > h.levels()) {
        throw Error("restrict_to_levels: max_level " + std::to_string(max_level) +
                    " out of range for a " + std::to_string(h.levels()) +
                    "-level hierarchy");
    }
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (int k = 2; k <= max_level; ++k) {
        for (std::size_t node : h.level_nodes(k)) {
            edges.emplace_back(h.id_of(h.parent_of(node)), h.id_of(node));
        }
    }
    return build_hierarchy(edges);
}

SummingMatrix summing_matrix(const Hierarchy& h) {
    SummingMatrix s;
    s.rows = h.node_count();
    s.cols = h.leaf_count();
    s.entries.assign(s.rows * s.cols, 0);

    // Fill leaf unit rows, then propagate upward level by level.
    const auto& bottom = h.leaves();
    for (std::size_t j = 0; j < bottom.size(); ++j) {
        s.entries[bottom[j] * s.cols + j] = 1;
    }
    for (int k = h.levels() - 1; k >= 1; --k) {
        for (std::size_t node : h.level_nodes(k)) {
            auto* row = &s.entries[node * s.cols];
            for (std::size_t child : h.children_of(node)) {
                const auto* child_row = &s.entries[child * s.cols];
                for (std::size_t j = 0; j < s.cols; ++j) row[j] |= child_row[j];
            }
        }
    }
    return s;
}

std::vector<std::vector<double>> aggregate_bottom_up(
    const Hierarchy& h, const std::vector<std::vector<double>>& leaf_values) {
    if (leaf_values.size() != h.leaf_count()) {
        throw Error("aggregate_bottom_up: got " +
                    std::to_string(leaf_values.size()) + " leaf vectors for " +
                    std::to_string(h.leaf_count()) + " leaves");
    }
    const std::size_t length = leaf_values.empty() ? 0 : leaf_values[0].size();
    for (const auto& v : leaf_values) {
        if (v.size() != length) {
            throw Error("aggregate_bottom_up: leaf vector length mismatch");
        }
    }

    std::vector<std::vector<double>> out(h.node_count());
    const auto& bottom = h.leaves();
    for (std::size_t j = 0; j < bottom.size(); ++j) out[bottom[j]] = leaf_values[j];
    for (int k = h.levels() - 1; k >= 1; --k) {
        for (std::size_t node : h.level_nodes(k)) {
            auto& acc = out[node];
            acc.assign(length, 0.0);
            for (std::size_t child : h.children_of(node)) {
                const auto& cv = out[child];
                for (std::size_t t = 0; t < length; ++t) acc[t] += cv[t];
            }
        }
    }
    return out;
}

CoherenceReport check_coherence(const Hierarchy& h, const ForecastSet& f,
                                double tolerance) {
    constexpr std::size_t max_listed = 1000;
    CoherenceReport report;
    report.tolerance = tolerance;

    for (std::size_t node = 0; node < h.node_count(); ++node) {
        if (h.is_leaf(node)) continue;
        if (!f.covers(node)) {
            throw Error("missing forecast for node '" + h.id_of(node) + "'");
        }
        const auto& parent = f.at(node);
        const auto& children = h.children_of(node);
        for (std::size_t child : children) {
            if (!f.covers(child)) {
                throw Error("missing forecast for node '" + h.id_of(child) + "'");
            }
            if (f.at(child).size() != parent.size()) {
                throw Error("forecast length mismatch at node '" +
                            h.id_of(child) + "'");
            }
        }
        for (std::size_t t = 0; t < parent.size(); ++t) {
            double sum = 0.0;
            for (std::size_t child : children) sum += f.at(child)[t];
            const double diff = std::abs(parent[t] - sum);
            const double rel = diff / std::max(1.0, std::abs(parent[t]));
            report.max_abs_violation = std::max(report.max_abs_violation, diff);
            report.max_rel_violation = std::max(report.max_rel_violation, rel);
            if (rel > tolerance) {
                ++report.violation_count;
                if (report.violations.size() < max_listed) {
                    report.violations.push_back({node, t, diff});
                }
            }
        }
    }
    report.coherent = report.violation_count == 0;
    return report;
}

} // namespace hiforead
