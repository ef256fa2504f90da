#include "dgc/plan.hpp"

#include <set>

#include "dgc/geometry.hpp"

namespace dgc {

const char* verb_name(verb v) {
    switch (v) {
        case verb::create: return "Create";
        case verb::rotate: return "Rotate";
        case verb::align: return "Align";
        case verb::anchor: return "Anchor";
        case verb::offset: return "Offset";
        case verb::polar: return "Polar";
        case verb::connect: return "Connect";
        case verb::boolean_subtract: return "BooleanSubtract";
        case verb::boolean_union: return "BooleanUnion";
        case verb::bevel: return "Bevel";
        case verb::snap: return "Snap";
        case verb::validate: return "Validate";
        case verb::assign_material: return "AssignMaterial";
    }
    return "";
}

verb verb_of(const step& s) {
    return std::visit(
        [](const auto& v) -> verb {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, create_step>) return verb::create;
            else if constexpr (std::is_same_v<T, rotate_step>) return verb::rotate;
            else if constexpr (std::is_same_v<T, align_step>) return verb::align;
            else if constexpr (std::is_same_v<T, anchor_step>) return verb::anchor;
            else if constexpr (std::is_same_v<T, offset_step>) return verb::offset;
            else if constexpr (std::is_same_v<T, polar_step>) return verb::polar;
            else if constexpr (std::is_same_v<T, connect_step>) return verb::connect;
            else if constexpr (std::is_same_v<T, boolean_step>)
                return v.subtract ? verb::boolean_subtract : verb::boolean_union;
            else if constexpr (std::is_same_v<T, bevel_step>) return verb::bevel;
            else if constexpr (std::is_same_v<T, snap_step>) return verb::snap;
            else if constexpr (std::is_same_v<T, validate_step>) return verb::validate;
            else return verb::assign_material;
        },
        s);
}

std::string object_of(const step& s) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, bevel_step>) return v.target;
            else if constexpr (std::is_same_v<T, validate_step>) return "";
            else return v.id;
        },
        s);
}

namespace {

struct planner {
    const validated_graph& vg;
    action_plan out;
    std::set<std::string> cutters; // tools of boolean_subtract nodes

    explicit planner(const validated_graph& g) : vg(g) {
        for (const auto& n : g.ast.nodes)
            if (n.method == create_method::boolean_subtract && n.tool_id)
                cutters.insert(*n.tool_id);
    }

    /// Frame reference for offset/polar text: the first align target's base
    /// node, else the parent when it exists as a script object (a sizing
    /// Empty); AUTO groups have no object, so their frame reads as world.
    std::string pos_ref_of(const node_record& n) const {
        if (!n.align.empty()) {
            const target_ref& t = n.align.front().target;
            const feature_ref& fr = t.k == target_ref::kind::average ? t.avg.front() : t.ref;
            std::string id = fr.node_id;
            if (fr.index) id += "[" + std::to_string(*fr.index) + "]";
            if (fr.all_instances) {
                auto ids = vg.instances_of(fr.node_id);
                if (!ids.empty()) id = ids.front();
            }
            return id;
        }
        if (n.parent) {
            const node_record* p = vg.find(*n.parent);
            if (p && p->is_group() && !p->size.is_auto()) return *n.parent;
        }
        return "";
    }

    std::string anchor_ref_of(const node_record& n) const {
        if (n.parent) {
            const node_record* p = vg.find(*n.parent);
            if (p && p->is_group() && !p->size.is_auto()) return *n.parent;
        }
        return "";
    }

    /// Steps for one node, in the strict per-object order.
    std::vector<step> steps_for(const node_record& n) {
        std::vector<step> out_steps;

        if (n.is_boolean()) {
            out_steps.push_back(boolean_step{n.id, n.method == create_method::boolean_subtract,
                                             *n.tool_id, *n.target_id});
            return out_steps;
        }

        if (n.is_group()) {
            if (n.size.is_auto()) return {}; // no object; purely structural
            out_steps.push_back(
                create_step{n.id, shape_kind::empty, n.size, /*empty_anchor=*/true, false});
        } else {
            out_steps.push_back(create_step{n.id, shape_kind_of(n.size), n.size, false,
                                            cutters.count(n.id) > 0});
        }

        if (n.orientation || n.rotation)
            out_steps.push_back(rotate_step{n.id, n.orientation, n.rotation});

        if (n.connect) {
            out_steps.push_back(connect_step{n.id, *n.connect});
        } else {
            if (!n.align.empty())
                for (const auto& a : n.align) out_steps.push_back(align_step{n.id, a});
            else
                out_steps.push_back(anchor_step{n.id, anchor_ref_of(n)});

            if (n.pos) {
                if (std::holds_alternative<offset_spec>(*n.pos))
                    out_steps.push_back(
                        offset_step{n.id, std::get<offset_spec>(*n.pos), pos_ref_of(n)});
                else
                    out_steps.push_back(
                        polar_step{n.id, std::get<polar_spec>(*n.pos), pos_ref_of(n)});
            }
        }

        if (n.material && !n.is_group())
            out_steps.push_back(material_step{n.id, *n.material});
        return out_steps;
    }

    std::string heading_for(const std::vector<std::string>& members) const {
        std::string h = "Create ";
        std::size_t shown = std::min<std::size_t>(members.size(), 3);
        for (std::size_t i = 0; i < shown; ++i) {
            if (i) h += ", ";
            h += members[i];
        }
        if (members.size() > shown) h += ", ...";
        return h;
    }

    /// A section covering exactly the instances of one template becomes a
    /// counted loop when there is more than one instance.
    std::optional<loop_block> try_loop(const std::vector<std::string>& members) {
        if (members.size() < 2) return std::nullopt;
        std::string first = members.front();
        auto lb = first.find('[');
        if (lb == std::string::npos) return std::nullopt;
        std::string templ = first.substr(0, lb);
        auto it = vg.expanded.find(templ);
        if (it == vg.expanded.end()) return std::nullopt;
        if (it->second.instances != members) return std::nullopt;

        const node_record* inst0 = vg.find(members.front());
        if (!inst0) return std::nullopt;

        loop_block loop;
        loop.template_id = templ;
        loop.count = static_cast<int>(members.size());
        loop.pattern = it->second.pattern;
        loop.base = it->second.base;
        loop.pos_ref = pos_ref_of(*inst0);
        for (auto& s : steps_for(*inst0)) {
            // placement comes from the pattern arithmetic inside the loop
            if (std::holds_alternative<offset_step>(s) || std::holds_alternative<polar_step>(s))
                continue;
            loop.body.push_back(std::move(s));
        }
        return loop;
    }

    void emit_group(const std::string& parent, const std::vector<std::string>& members) {
        plan_section sec;
        if (auto loop = try_loop(members)) {
            sec.heading = "Create " + loop->template_id + " pattern (" +
                          std::to_string(loop->count) + " instances)";
            sec.items.push_back(std::move(*loop));
        } else {
            std::vector<std::string> created;
            for (const auto& m : members) {
                const node_record* n = vg.find(m);
                if (!n) continue;
                auto steps = steps_for(*n);
                if (steps.empty()) continue;
                created.push_back(m);
                for (auto& s : steps) sec.items.push_back(std::move(s));
            }
            if (sec.items.empty()) return; // nothing concrete (e.g. AUTO group only)
            sec.heading = heading_for(created);
        }
        (void)parent;
        sec.number = static_cast<int>(out.sections.size()) + 1;
        out.sections.push_back(std::move(sec));
    }

    void visit(const std::string& id) {
        const node_record* n = vg.find(id);
        if (!n) return;
        for (const auto& grp : vg.effective_groups(*n)) {
            auto ordered = order_steps(grp, vg.order_edges);
            emit_group(id, ordered);
            for (const auto& m : ordered) visit(m);
        }
        // a parent guideline closes its assembly with a Validate section
        if (n->constraint && !vg.children_of(id).empty()) {
            plan_section sec;
            sec.number = static_cast<int>(out.sections.size()) + 1;
            sec.heading = "Complete " + id + " assembly";
            sec.items.push_back(step{validate_step{*n->constraint}});
            out.sections.push_back(std::move(sec));
        }
    }

    void run() {
        out.materials = vg.ast.materials;
        if (vg.roots.empty()) return;
        auto ordered = order_steps(vg.roots, vg.order_edges);
        emit_group("", ordered);
        for (const auto& r : ordered) visit(r);
    }
};

} // namespace

action_plan plan(const validated_graph& vg) {
    planner p(vg);
    p.run();
    return std::move(p.out);
}

} // namespace dgc
