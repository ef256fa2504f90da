#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dgc/ast.hpp"
#include "dgc/diagnostics.hpp"

namespace dgc {

/// What a pattern node expanded into; kept for loop-style lowering.
struct expansion_info {
    pattern_spec pattern;
    offset_spec base; // template offset folded into grid instances
    std::vector<std::string> instances;
};

/// Semantically checked graph. Immutable once built; share freely.
struct validated_graph {
    graph_ast ast; // nodes in source order (instance order once expanded)
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::pair<std::string, std::string>> parent_edges; // (parent, child)
    std::vector<std::pair<std::string, std::string>> order_edges;  // (before, after)
    std::map<std::string, material_def> materials;
    std::map<std::string, expansion_info> expanded; // template -> instances
    std::vector<std::string> roots;

    const node_record* find(const std::string& id) const;
    std::vector<std::string> children_of(const std::string& id) const;

    /// Declared assembly_order, or all children as one source-order group.
    std::vector<std::vector<std::string>> effective_groups(const node_record& parent) const;

    /// Ids a star/averaged target expands to: the pattern instances of
    /// `template_id`, or the id itself when it exists un-expanded.
    std::vector<std::string> instances_of(const std::string& template_id) const;
};

struct validate_result {
    std::optional<validated_graph> graph;
    std::vector<diagnostic> diagnostics;

    bool ok() const { return graph.has_value() && diagnostics.empty(); }
};

validate_result validate(const graph_ast& ast);

/// Replaces each pattern node with its `<id>[k]` instances. Grid instances
/// gain (x0 + c*dx, y0 + r*dy, 0) on top of the template offset; polar
/// instances get pos=polar(start + k*step; dr=radius). Expanding an
/// already-expanded graph is a no-op.
validate_result expand_patterns(const validated_graph& vg);

// ---------------------------------------------------------------------------
// Build ordering, shared by the resolver and the planner
// ---------------------------------------------------------------------------

struct build_group {
    std::string parent;               // owning node id; "" for the root group
    std::vector<std::string> members; // topological order, source order on ties
};

/// Topological order over (before, after) edges restricted to `members`,
/// stable w.r.t. member order among incomparable nodes.
/// Throws OrderingCycle.
std::vector<std::string> order_steps(
    const std::vector<std::string>& members,
    const std::vector<std::pair<std::string, std::string>>& order_edges);

/// Depth-first group sequence: the root group, then per parent its
/// assembly_order groups with each member's subtree visited before the
/// parent's next group.
std::vector<build_group> build_sequence(const validated_graph& vg);

} // namespace dgc
