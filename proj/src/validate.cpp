#include "dgc/validate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

#include "dgc/geometry.hpp"

namespace dgc {

const node_record* validated_graph::find(const std::string& id) const {
    auto it = index.find(id);
    return it == index.end() ? nullptr : &ast.nodes[it->second];
}

std::vector<std::string> validated_graph::children_of(const std::string& id) const {
    std::vector<std::string> out;
    for (const auto& n : ast.nodes)
        if (n.parent && *n.parent == id) out.push_back(n.id);
    return out;
}

std::vector<std::vector<std::string>> validated_graph::effective_groups(
    const node_record& parent) const {
    if (parent.assembly_order) return *parent.assembly_order;
    auto kids = children_of(parent.id);
    if (kids.empty()) return {};
    return {kids};
}

std::vector<std::string> validated_graph::instances_of(const std::string& template_id) const {
    auto it = expanded.find(template_id);
    if (it != expanded.end()) return it->second.instances;
    std::vector<std::string> out;
    // expanded instances survive re-validation as literal `<id>[k]` nodes
    std::string prefix = template_id + "[";
    for (const auto& n : ast.nodes)
        if (n.id.rfind(prefix, 0) == 0) out.push_back(n.id);
    if (out.empty() && index.count(template_id)) out.push_back(template_id);
    return out;
}

namespace {

struct checker {
    const graph_ast& ast;
    std::vector<diagnostic>& diags;
    validated_graph& vg;

    void error(diag_code code, const node_record& n, std::string msg) {
        diags.push_back({code, std::move(msg), n.span.first_line, 1});
    }

    bool id_exists(const std::string& id) const { return vg.index.count(id) != 0; }

    static bool same_group(const node_record& parent, const std::string& a,
                           const std::string& b) {
        for (const auto& grp : *parent.assembly_order) {
            bool has_a = std::find(grp.begin(), grp.end(), a) != grp.end();
            bool has_b = std::find(grp.begin(), grp.end(), b) != grp.end();
            if (has_a && has_b) return true;
            if (has_a != has_b) return false;
        }
        return false;
    }

    /// A target id is addressable if it names a node, a pattern instance
    /// (`B[k]` with k within the pattern), or a template kept for expansion.
    bool target_addressable(const feature_ref& fr) const {
        const node_record* base = vg.find(fr.node_id);
        if (fr.all_instances) {
            if (base && base->pattern) return true;
            return !vg.instances_of(fr.node_id).empty();
        }
        if (fr.index) {
            std::string literal = fr.node_id + "[" + std::to_string(*fr.index) + "]";
            if (id_exists(literal)) return true;
            if (base && base->pattern) {
                int count = 0;
                if (std::holds_alternative<grid_pattern>(*base->pattern)) {
                    const auto& g = std::get<grid_pattern>(*base->pattern);
                    count = g.rows * g.cols;
                } else {
                    count = std::get<polar_pattern>(*base->pattern).count;
                }
                return *fr.index < count;
            }
            return false;
        }
        return base != nullptr;
    }

    void check_target(const node_record& n, const target_ref& t) {
        auto one = [&](const feature_ref& fr) {
            if (!target_addressable(fr))
                error(diag_code::dangling_reference, n,
                      "node '" + n.id + "' references unknown target '" + fr.node_id + "'");
        };
        if (t.k == target_ref::kind::average)
            for (const auto& fr : t.avg) one(fr);
        else
            one(t.ref);
    }

    void run() {
        // ids
        for (std::size_t i = 0; i < ast.nodes.size(); ++i) {
            const auto& n = ast.nodes[i];
            if (vg.index.count(n.id))
                error(diag_code::duplicate_node_id, n, "node id '" + n.id + "' defined twice");
            else
                vg.index[n.id] = i;
        }
        for (const auto& m : ast.materials) vg.materials[m.name] = m;

        for (const auto& n : ast.nodes) {
            // parent
            if (n.parent) {
                if (!id_exists(*n.parent)) {
                    error(diag_code::dangling_reference, n,
                          "parent '" + *n.parent + "' of '" + n.id + "' does not exist");
                } else {
                    vg.parent_edges.emplace_back(*n.parent, n.id);
                }
            } else {
                vg.roots.push_back(n.id);
            }

            // material
            if (n.material && !vg.materials.count(*n.material))
                error(diag_code::dangling_reference, n,
                      "node '" + n.id + "' uses undefined material '" + *n.material + "'");

            // order edges; `after` only runs between same-group siblings
            for (const auto& a : n.after) {
                if (!id_exists(a)) {
                    error(diag_code::dangling_reference, n,
                          "after target '" + a + "' of '" + n.id + "' does not exist");
                    continue;
                }
                if (vg.find(a)->parent != n.parent) {
                    error(diag_code::dangling_reference, n,
                          "after target '" + a + "' is not a sibling of '" + n.id + "'");
                } else if (n.parent) {
                    const node_record* par = vg.find(*n.parent);
                    if (par && par->assembly_order && !same_group(*par, a, n.id))
                        error(diag_code::dangling_reference, n,
                              "after target '" + a + "' sits in a different assembly group than '" +
                                  n.id + "'");
                }
                vg.order_edges.emplace_back(a, n.id);
            }
            for (const auto& d : n.depends_on) {
                if (!id_exists(d)) {
                    error(diag_code::dangling_reference, n,
                          "depends_on target '" + d + "' of '" + n.id + "' does not exist");
                    continue;
                }
                vg.order_edges.emplace_back(d, n.id);
            }

            // booleans carry exactly tool + target
            if (n.is_boolean()) {
                if (!n.tool_id || !n.target_id) {
                    error(diag_code::boolean_missing_operands, n,
                          "boolean node '" + n.id + "' needs tool_id and target_id");
                } else {
                    for (const auto& ref : {*n.tool_id, *n.target_id})
                        if (!id_exists(ref))
                            error(diag_code::dangling_reference, n,
                                  "boolean operand '" + ref + "' does not exist");
                }
            } else if (n.tool_id || n.target_id) {
                error(diag_code::boolean_missing_operands, n,
                      "tool_id/target_id are only valid on boolean nodes ('" + n.id + "')");
            }

            // sizes
            if (n.size.is_auto()) {
                if (n.method == create_method::primitive ||
                    n.method == create_method::auto_connect ||
                    n.method == create_method::extrude_from_sketch)
                    error(diag_code::non_positive_dimension, n,
                          "size=AUTO is only valid on group or boolean nodes ('" + n.id + "')");
            } else if (!n.is_group() && !n.is_boolean()) {
                try {
                    (void)extent_of({shape_kind_of(n.size), n.size});
                } catch (const domain_error& e) {
                    error(diag_code::non_positive_dimension, n,
                          "node '" + n.id + "': " + e.what());
                }
            }

            if (n.method == create_method::auto_connect && !n.connect)
                error(diag_code::dangling_reference, n,
                      "auto_connect node '" + n.id + "' needs a connect= field");

            // placement references
            for (const auto& a : n.align) check_target(n, a.target);
            if (n.connect) {
                for (const auto& fr : {n.connect->a, n.connect->b})
                    if (!target_addressable(fr))
                        error(diag_code::dangling_reference, n,
                              "connect endpoint '" + fr.node_id + "' does not exist");
            }
            if (n.orientation && !n.orientation->ref_id.empty() &&
                !id_exists(n.orientation->ref_id) &&
                vg.instances_of(n.orientation->ref_id).empty())
                error(diag_code::dangling_reference, n,
                      "orientation references unknown node '" + n.orientation->ref_id + "'");

            // assembly_order covers the children exactly once
            if (n.assembly_order) {
                auto kids = vg.children_of(n.id);
                std::set<std::string> kid_set(kids.begin(), kids.end());
                std::set<std::string> seen;
                for (const auto& grp : *n.assembly_order) {
                    for (const auto& m : grp) {
                        if (!kid_set.count(m))
                            error(diag_code::assembly_order_gap, n,
                                  "assembly_order of '" + n.id + "' names '" + m +
                                      "', which is not a child");
                        else if (!seen.insert(m).second)
                            error(diag_code::assembly_order_gap, n,
                                  "assembly_order of '" + n.id + "' lists '" + m + "' twice");
                    }
                }
                for (const auto& k : kid_set)
                    if (!seen.count(k))
                        error(diag_code::assembly_order_gap, n,
                              "child '" + k + "' of '" + n.id +
                                  "' is missing from assembly_order");
            }
        }

        check_cycles();
    }

    void check_cycles() {
        // DFS over the union of parent/after/depends_on edges
        std::map<std::string, std::vector<std::string>> adj;
        for (const auto& [u, v] : vg.parent_edges) adj[u].push_back(v);
        for (const auto& [u, v] : vg.order_edges) adj[u].push_back(v);

        std::map<std::string, int> state; // 0 unseen, 1 on stack, 2 done
        std::vector<std::string> stack;
        bool reported = false;

        std::function<bool(const std::string&)> dfs = [&](const std::string& u) -> bool {
            state[u] = 1;
            stack.push_back(u);
            for (const auto& v : adj[u]) {
                if (state[v] == 1) {
                    if (!reported) {
                        std::string path = v;
                        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
                            path = *it + " -> " + path;
                            if (*it == v) break;
                        }
                        const node_record* n = vg.find(v);
                        diags.push_back({diag_code::cycle_detected, "cycle: " + path,
                                         n ? n->span.first_line : 0, 1});
                        reported = true;
                    }
                    return true;
                }
                if (state[v] == 0 && dfs(v)) return true;
            }
            stack.pop_back();
            state[u] = 2;
            return false;
        };

        for (const auto& n : ast.nodes)
            if (state[n.id] == 0 && dfs(n.id)) return;
    }
};

} // namespace

validate_result validate(const graph_ast& ast) {
    validate_result out;
    validated_graph vg;
    vg.ast = ast;
    checker c{ast, out.diagnostics, vg};
    c.run();
    if (out.diagnostics.empty()) out.graph = std::move(vg);
    return out;
}

// ---------------------------------------------------------------------------
// Pattern expansion
// ---------------------------------------------------------------------------

namespace {

/// Rewrites a bare reference to an expanded template. Single-instance
/// templates collapse to `<id>[0]`; star/indexed refs already resolve.
void rewrite_ref(feature_ref& fr, const std::map<std::string, std::vector<std::string>>& expanded) {
    if (fr.index || fr.all_instances) return;
    auto it = expanded.find(fr.node_id);
    if (it == expanded.end()) return;
    if (it->second.size() == 1) {
        fr.node_id = it->second.front().substr(0, it->second.front().find('['));
        fr.index = 0;
    } else {
        fr.all_instances = true; // mean over every instance
    }
}

void rewrite_id_list(std::vector<std::string>& ids,
                     const std::map<std::string, std::vector<std::string>>& expanded) {
    std::vector<std::string> out;
    for (const auto& id : ids) {
        auto it = expanded.find(id);
        if (it == expanded.end()) out.push_back(id);
        else out.insert(out.end(), it->second.begin(), it->second.end());
    }
    ids = std::move(out);
}

} // namespace

validate_result expand_patterns(const validated_graph& vg) {
    std::vector<diagnostic> diags;
    graph_ast out_ast;
    out_ast.materials = vg.ast.materials;
    std::map<std::string, expansion_info> newly_expanded;
    std::map<std::string, std::vector<std::string>> id_map;

    for (const auto& n : vg.ast.nodes) {
        if (!n.pattern) {
            out_ast.nodes.push_back(n);
            continue;
        }

        std::vector<node_record> instances;
        offset_spec base;
        auto add_instance = [&](int k, std::optional<pos_spec> pos) {
            node_record inst = n;
            inst.id = n.id + "[" + std::to_string(k) + "]";
            inst.pattern.reset();
            inst.pos = pos;
            instances.push_back(std::move(inst));
        };

        if (std::holds_alternative<grid_pattern>(*n.pattern)) {
            const auto& g = std::get<grid_pattern>(*n.pattern);
            if (g.rows < 1 || g.cols < 1) {
                diags.push_back({diag_code::non_positive_count,
                                 "grid pattern on '" + n.id + "' needs rows, cols >= 1",
                                 n.span.first_line, 1});
                continue;
            }
            if ((g.cols > 1 && g.x_spacing == 0) || (g.rows > 1 && g.y_spacing == 0)) {
                diags.push_back({diag_code::zero_spacing_with_multiple_cells,
                                 "grid pattern on '" + n.id + "' has zero spacing",
                                 n.span.first_line, 1});
                continue;
            }
            if (n.pos) {
                if (!std::holds_alternative<offset_spec>(*n.pos)) {
                    diags.push_back({diag_code::degenerate_placement,
                                     "grid pattern on '" + n.id + "' cannot combine with polar pos",
                                     n.span.first_line, 1});
                    continue;
                }
                base = std::get<offset_spec>(*n.pos);
            }
            for (int r = 0; r < g.rows; ++r)
                for (int c = 0; c < g.cols; ++c)
                    add_instance(r * g.cols + c,
                                 offset_spec{base.dx + g.x0 + c * g.x_spacing,
                                             base.dy + g.y0 + r * g.y_spacing, base.dz});
        } else {
            const auto& p = std::get<polar_pattern>(*n.pattern);
            if (p.count < 1) {
                diags.push_back({diag_code::non_positive_count,
                                 "polar pattern on '" + n.id + "' needs count >= 1",
                                 n.span.first_line, 1});
                continue;
            }
            for (int k = 0; k < p.count; ++k)
                add_instance(k, polar_spec{p.start_angle_deg + k * p.angle_step_deg, p.radius});
        }

        expansion_info info{*n.pattern, base, {}};
        for (auto& inst : instances) {
            info.instances.push_back(inst.id);
            out_ast.nodes.push_back(std::move(inst));
        }
        id_map[n.id] = info.instances;
        newly_expanded[n.id] = std::move(info);
    }

    if (newly_expanded.empty() && diags.empty()) {
        validate_result out;
        out.graph = vg; // already expanded; no-op
        return out;
    }

    // references to templates now point at instances
    for (auto& n : out_ast.nodes) {
        for (auto& a : n.align) {
            if (a.target.k == target_ref::kind::average)
                for (auto& fr : a.target.avg) rewrite_ref(fr, id_map);
            else
                rewrite_ref(a.target.ref, id_map);
        }
        if (n.connect) {
            rewrite_ref(n.connect->a, id_map);
            rewrite_ref(n.connect->b, id_map);
        }
        rewrite_id_list(n.after, id_map);
        rewrite_id_list(n.depends_on, id_map);
        if (n.assembly_order)
            for (auto& grp : *n.assembly_order) rewrite_id_list(grp, id_map);
        auto rewrite_single = [&](std::optional<std::string>& id) {
            if (!id) return;
            auto it = id_map.find(*id);
            if (it != id_map.end() && it->second.size() == 1) id = it->second.front();
        };
        rewrite_single(n.tool_id);
        rewrite_single(n.target_id);
        if (n.orientation) {
            auto it = id_map.find(n.orientation->ref_id);
            if (it != id_map.end() && it->second.size() == 1)
                n.orientation->ref_id = it->second.front();
        }
    }

    validate_result out = validate(out_ast);
    for (auto& d : diags) out.diagnostics.push_back(d);
    if (!out.diagnostics.empty()) out.graph.reset();
    if (out.graph) {
        out.graph->expanded = vg.expanded;
        for (auto& [k, v] : newly_expanded) out.graph->expanded[k] = v;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Build ordering
// ---------------------------------------------------------------------------

std::vector<std::string> order_steps(
    const std::vector<std::string>& members,
    const std::vector<std::pair<std::string, std::string>>& order_edges) {
    std::map<std::string, int> indegree;
    std::map<std::string, std::vector<std::string>> adj;
    std::set<std::string> in_group(members.begin(), members.end());
    for (const auto& m : members) indegree[m] = 0;
    for (const auto& [u, v] : order_edges) {
        if (!in_group.count(u) || !in_group.count(v)) continue;
        adj[u].push_back(v);
        ++indegree[v];
    }

    std::vector<std::string> out;
    std::vector<bool> done(members.size(), false);
    while (out.size() < members.size()) {
        bool advanced = false;
        for (std::size_t i = 0; i < members.size(); ++i) {
            if (done[i] || indegree[members[i]] != 0) continue;
            done[i] = true;
            out.push_back(members[i]);
            for (const auto& v : adj[members[i]]) --indegree[v];
            advanced = true;
            break; // restart scan to keep source order among the now-ready
        }
        if (!advanced)
            throw domain_error(diag_code::ordering_cycle,
                               "after/depends_on edges form a cycle inside a group");
    }
    return out;
}

std::vector<build_group> build_sequence(const validated_graph& vg) {
    std::vector<build_group> out;

    std::function<void(const std::string&)> visit = [&](const std::string& id) {
        const node_record* n = vg.find(id);
        if (!n) return;
        for (const auto& grp : vg.effective_groups(*n)) {
            auto ordered = order_steps(grp, vg.order_edges);
            out.push_back({id, ordered});
            for (const auto& m : ordered) visit(m);
        }
    };

    if (!vg.roots.empty()) {
        auto ordered = order_steps(vg.roots, vg.order_edges);
        out.push_back({"", ordered});
        for (const auto& r : ordered) visit(r);
    }
    return out;
}

} // namespace dgc
