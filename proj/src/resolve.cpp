#include "dgc/resolve.hpp"

#include <cmath>
#include <functional>
#include <set>

#include <json.hpp>

#include "dgc/numfmt.hpp"

namespace dgc {

namespace {
constexpr double kDegToRad = M_PI / 180.0;
}

const instance* resolved_scene::find(const std::string& id) const {
    for (const auto& i : instances)
        if (i.id == id) return &i;
    return nullptr;
}

const anchor* resolved_scene::find_anchor(const std::string& id) const {
    for (const auto& a : anchors)
        if (a.id == id) return &a;
    return nullptr;
}

vec3 apply_align(const oriented_box& current, const align_spec& spec,
                 const feature_point_fn& point_of) {
    vec3 target;
    if (spec.target.k == target_ref::kind::average) {
        target = vec3::Zero();
        for (const auto& fr : spec.target.avg) target += point_of(fr);
        target /= static_cast<double>(spec.target.avg.size());
    } else {
        target = point_of(spec.target.ref);
    }
    vec3 here = face_center_world(current.f, current.box, spec.this_feature);
    vec3 delta = target - here;
    if (!spec.axes.x) delta.x() = 0;
    if (!spec.axes.y) delta.y() = 0;
    if (!spec.axes.z) delta.z() = 0;
    return delta;
}

connect_placement apply_connect(const vec3& a, const vec3& b) {
    vec3 d = b - a;
    double len = d.norm();
    if (len < 1e-9)
        throw domain_error(diag_code::coincident_endpoints,
                           "connect endpoints coincide");
    connect_placement out;
    out.f.position = 0.5 * (a + b);
    out.f.rotation = rotation_aligning(vec3::UnitZ(), d / len);
    out.length = len;
    return out;
}

// ---------------------------------------------------------------------------
// Scene resolution
// ---------------------------------------------------------------------------

namespace {

struct resolver {
    const validated_graph& vg;
    resolved_scene scene;
    std::map<std::string, oriented_box> resolved; // nodes with final geometry
    std::map<std::string, std::size_t> anchor_slot;
    std::set<std::string> pending_extent; // AUTO groups before their subtree finishes

    explicit resolver(const validated_graph& g) : vg(g) {}

    std::optional<oriented_box> lookup(const std::string& id) const {
        auto it = resolved.find(id);
        if (it == resolved.end()) return std::nullopt;
        return it->second;
    }

    vec3 feature_point(const feature_ref& fr, const std::string& for_node) const {
        if (fr.all_instances) {
            auto ids = vg.instances_of(fr.node_id);
            if (ids.empty())
                throw domain_error(diag_code::empty_star_set,
                                   "'" + fr.node_id + "[*]' matches no instances (placing '" +
                                       for_node + "')");
            // the mean is over every instance, so all of them must exist
            vec3 sum = vec3::Zero();
            for (const auto& id : ids) {
                auto ob = lookup(id);
                if (!ob)
                    throw domain_error(diag_code::forward_reference,
                                       "'" + for_node + "' averages over '" + fr.node_id +
                                           "[*]' before instance '" + id + "' is resolved");
                sum += face_center_world(ob->f, ob->box, fr.feat);
            }
            return sum / static_cast<double>(ids.size());
        }
        std::string id = fr.node_id;
        if (fr.index) id += "[" + std::to_string(*fr.index) + "]";
        auto ob = lookup(id);
        if (!ob) {
            if (vg.find(id))
                throw domain_error(diag_code::forward_reference,
                                   "'" + for_node + "' is placed against '" + id +
                                       "', which is not resolved yet; add after=/depends_on=");
            throw domain_error(diag_code::unknown_target,
                               "'" + for_node + "' references unknown node '" + id + "'");
        }
        if (fr.feat != feature::center && pending_extent.count(id))
            throw domain_error(diag_code::forward_reference,
                               "'" + for_node + "' reads a face of '" + id +
                                   "' before its AUTO extent is known");
        return face_center_world(ob->f, ob->box, fr.feat);
    }

    /// Frame whose local axes offsets/polar moves are expressed in: the first
    /// align target's base object, else the parent anchor, else world.
    std::optional<oriented_box> reference_box(const node_record& n) const {
        if (!n.align.empty()) {
            const target_ref& t = n.align.front().target;
            const feature_ref& fr =
                t.k == target_ref::kind::average ? t.avg.front() : t.ref;
            std::string id = fr.node_id;
            if (fr.index) id += "[" + std::to_string(*fr.index) + "]";
            if (fr.all_instances) {
                auto ids = vg.instances_of(fr.node_id);
                if (!ids.empty()) id = ids.front();
            }
            return lookup(id);
        }
        if (n.parent) return lookup(*n.parent);
        return std::nullopt;
    }

    /// Placement stages 3-4 against an already-oriented box.
    vec3 run_placement(const node_record& n, const oriented_box& start) {
        oriented_box cur = start;

        if (!n.align.empty()) {
            for (const auto& a : n.align) {
                vec3 delta = apply_align(
                    cur, a, [&](const feature_ref& fr) { return feature_point(fr, n.id); });
                cur.f.position += delta;
            }
        } else if (n.parent) {
            // anchor to the parent, centre-to-centre
            if (auto pb = lookup(*n.parent)) cur.f.position = pb->f.position;
        }

        if (n.pos) {
            auto ref = reference_box(n);
            quat ref_rot = ref ? ref->f.rotation : quat::Identity();
            if (std::holds_alternative<offset_spec>(*n.pos)) {
                const auto& o = std::get<offset_spec>(*n.pos);
                cur.f.position += ref_rot * vec3{o.dx, o.dy, o.dz};
            } else {
                const auto& p = std::get<polar_spec>(*n.pos);
                double th = p.theta_deg * kDegToRad;
                cur.f.position +=
                    ref_rot * vec3{p.dr * std::cos(th), p.dr * std::sin(th), 0.0};
            }
        }
        return cur.f.position;
    }

    void resolve_node(const node_record& n) {
        if (n.is_boolean()) {
            resolve_boolean(n);
            return;
        }

        primitive_shape shape{n.is_group() ? shape_kind::empty : shape_kind_of(n.size), n.size};
        extent_box box = extent_of(shape);

        // pass A: placement with native rotation fixes the nominal position
        oriented_box ob{{}, box};
        vec3 nominal = run_placement(n, ob);

        // pass B: orientation (radial/tangent/nearest-face read the nominal
        // position), optional free spin, then the placement chain again
        quat rot = quat::Identity();
        if (n.orientation)
            rot = resolve_orientation(*n.orientation, nominal,
                                      [&](const std::string& id) { return lookup(id); });
        if (n.connect) {
            vec3 a = feature_point(n.connect->a, n.id);
            vec3 b = feature_point(n.connect->b, n.id);
            connect_placement cp = apply_connect(a, b);
            // auto length: the local Z span stretches to |b - a|
            double half = cp.length / 2;
            box.lo.z() = -half;
            box.hi.z() = half;
            if (shape.dims.k == size_spec::kind::box) shape.dims.c = cp.length;
            else if (shape.dims.k != size_spec::kind::auto_size &&
                     shape.dims.k != size_spec::kind::sphere &&
                     shape.dims.k != size_spec::kind::hemisphere)
                shape.dims.b = cp.length;
            ob = {cp.f, box};
        } else {
            if (n.rotation) {
                vec3 axis = n.rotation->axis == 'X'   ? vec3::UnitX()
                            : n.rotation->axis == 'Y' ? vec3::UnitY()
                                                      : vec3::UnitZ();
                rot = rot * quat(Eigen::AngleAxisd(n.rotation->angle_deg * kDegToRad, axis));
            }
            ob = {{vec3::Zero(), rot}, box};
            ob.f.position = run_placement(n, ob);
        }

        if (n.is_group()) {
            anchor a;
            a.id = n.id;
            a.class_name = n.node_type;
            a.f = ob.f;
            a.box = box;
            a.declared_size = !n.size.is_auto();
            a.parent = n.parent;
            anchor_slot[n.id] = scene.anchors.size();
            scene.anchors.push_back(a);
            resolved[n.id] = ob;
            // AUTO extents stay a point anchor until the subtree finishes
            if (!a.declared_size) pending_extent.insert(n.id);
            return;
        }

        instance inst;
        inst.id = n.id;
        inst.class_name = n.node_type;
        inst.shape = shape;
        inst.f = ob.f;
        inst.box = box;
        inst.material = n.material;
        inst.parent = n.parent;
        scene.instances.push_back(inst);
        scene.provenance[n.id] = {n.id};
        resolved[n.id] = ob;
    }

    void resolve_boolean(const node_record& n) {
        // geometry untouched: the target keeps its extent (conservative),
        // the tool becomes a cutter / both become union members
        instance* tool = find_instance(*n.tool_id);
        instance* target = find_instance(*n.target_id);
        if (!tool || !target)
            throw domain_error(diag_code::forward_reference,
                               "boolean '" + n.id + "' runs before its operands are resolved");
        if (n.method == create_method::boolean_subtract) {
            tool->csg = csg_role::cutter;
            tool->csg_ref = *n.target_id;
        } else {
            tool->csg = csg_role::union_member;
            tool->csg_ref = n.id;
            target->csg = csg_role::union_member;
            target->csg_ref = n.id;
        }
        scene.provenance[n.id] = {*n.target_id};
        resolved[n.id] = target->obox();
    }

    instance* find_instance(const std::string& id) {
        for (auto& i : scene.instances)
            if (i.id == id) return &i;
        return nullptr;
    }

    void finalize_auto_group(const std::string& id) {
        auto slot = anchor_slot.find(id);
        if (slot == anchor_slot.end()) return;
        anchor& a = scene.anchors[slot->second];
        if (a.declared_size) return;

        // union of the subtree's world boxes, expressed in the anchor frame
        bool any = false;
        extent_box acc;
        quat inv = a.f.rotation.inverse();
        std::function<void(const std::string&)> gather = [&](const std::string& nid) {
            for (const auto& child : vg.children_of(nid)) {
                auto ob = lookup(child);
                if (ob) {
                    for (const auto& corner : world_corners(ob->f, ob->box)) {
                        vec3 local = inv * (corner - a.f.position);
                        if (!any) {
                            acc = {local, local};
                            any = true;
                        } else {
                            acc.lo = acc.lo.cwiseMin(local);
                            acc.hi = acc.hi.cwiseMax(local);
                        }
                    }
                }
                gather(child);
            }
        };
        gather(id);
        if (any) a.box = acc;
        resolved[id] = a.obox();
        pending_extent.erase(id);
    }

    /// Mirrors build_sequence: the whole group resolves first, then each
    /// member's subtree in member order, before the parent's next group.
    void visit_subtree(const std::string& id) {
        const node_record* n = vg.find(id);
        if (!n) return;
        for (const auto& grp : vg.effective_groups(*n)) {
            auto ordered = order_steps(grp, vg.order_edges);
            for (const auto& m : ordered) resolve_node(*vg.find(m));
            for (const auto& m : ordered) {
                visit_subtree(m);
                const node_record* mn = vg.find(m);
                if (mn && mn->is_group() && mn->size.is_auto()) finalize_auto_group(m);
            }
        }
    }

    void run() {
        if (vg.roots.empty()) return;
        auto ordered = order_steps(vg.roots, vg.order_edges);
        for (const auto& r : ordered) resolve_node(*vg.find(r));
        for (const auto& r : ordered) {
            visit_subtree(r);
            const node_record* rn = vg.find(r);
            if (rn && rn->is_group() && rn->size.is_auto()) finalize_auto_group(r);
        }
    }
};

} // namespace

resolved_scene resolve_scene(const validated_graph& vg) {
    resolver r(vg);
    r.run();
    // pattern templates point at their instance set
    for (const auto& [templ, info] : vg.expanded) r.scene.provenance[templ] = info.instances;
    return std::move(r.scene);
}

// ---------------------------------------------------------------------------
// Scene JSON
// ---------------------------------------------------------------------------

namespace {

nlohmann::json vec_json(const vec3& v) { return {v.x(), v.y(), v.z()}; }
nlohmann::json quat_json(const quat& q) { return {q.w(), q.x(), q.y(), q.z()}; }

vec3 vec_from(const nlohmann::json& j) {
    return vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>());
}
quat quat_from(const nlohmann::json& j) {
    return quat(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(),
                j.at(3).get<double>());
}

nlohmann::json dims_json(const primitive_shape& s) {
    switch (s.dims.k) {
        case size_spec::kind::box: return {s.dims.a, s.dims.b, s.dims.c};
        case size_spec::kind::cylinder:
        case size_spec::kind::cone:
        case size_spec::kind::disc: return {s.dims.a, s.dims.b};
        case size_spec::kind::sphere:
        case size_spec::kind::hemisphere: return {s.dims.a};
        case size_spec::kind::auto_size: return nlohmann::json::array();
    }
    return nlohmann::json::array();
}

} // namespace

std::string scene_to_json(const resolved_scene& scene) {
    nlohmann::json root;
    auto& insts = root["instances"] = nlohmann::json::array();
    for (const auto& i : scene.instances) {
        nlohmann::json j;
        j["id"] = i.id;
        j["class"] = i.class_name;
        j["kind"] = shape_kind_name(i.shape.kind);
        j["dims"] = dims_json(i.shape);
        j["position"] = vec_json(i.f.position);
        j["rotation"] = quat_json(i.f.rotation); // [w, x, y, z]
        j["extent"] = {{"lo", vec_json(i.box.lo)}, {"hi", vec_json(i.box.hi)}};
        if (i.material) j["material"] = *i.material;
        else j["material"] = nullptr;
        switch (i.csg) {
            case csg_role::solid: j["csg"] = {{"role", "solid"}}; break;
            case csg_role::cutter: j["csg"] = {{"role", "cutter"}, {"target", i.csg_ref}}; break;
            case csg_role::union_member:
                j["csg"] = {{"role", "union"}, {"group", i.csg_ref}};
                break;
        }
        if (i.parent) j["parent"] = *i.parent;
        else j["parent"] = nullptr;
        insts.push_back(std::move(j));
    }
    auto& anchors = root["anchors"] = nlohmann::json::array();
    for (const auto& a : scene.anchors) {
        nlohmann::json j;
        j["id"] = a.id;
        j["class"] = a.class_name;
        j["position"] = vec_json(a.f.position);
        j["rotation"] = quat_json(a.f.rotation);
        j["extent"] = {{"lo", vec_json(a.box.lo)}, {"hi", vec_json(a.box.hi)}};
        j["declared"] = a.declared_size;
        if (a.parent) j["parent"] = *a.parent;
        else j["parent"] = nullptr;
        anchors.push_back(std::move(j));
    }
    root["provenance"] = scene.provenance;
    return root.dump(2);
}

resolved_scene scene_from_json(const std::string& text) {
    nlohmann::json root = nlohmann::json::parse(text);
    resolved_scene scene;
    for (const auto& j : root.at("instances")) {
        instance i;
        i.id = j.at("id");
        i.class_name = j.value("class", "");
        std::string kind = j.value("kind", "cube");
        for (shape_kind k : {shape_kind::cube, shape_kind::cylinder, shape_kind::cone,
                             shape_kind::sphere, shape_kind::hemisphere, shape_kind::disc,
                             shape_kind::empty})
            if (kind == shape_kind_name(k)) i.shape.kind = k;
        i.f.position = vec_from(j.at("position"));
        i.f.rotation = quat_from(j.at("rotation"));
        i.box.lo = vec_from(j.at("extent").at("lo"));
        i.box.hi = vec_from(j.at("extent").at("hi"));
        if (j.contains("material") && !j.at("material").is_null())
            i.material = j.at("material").get<std::string>();
        if (j.contains("csg")) {
            std::string role = j.at("csg").value("role", "solid");
            if (role == "cutter") {
                i.csg = csg_role::cutter;
                i.csg_ref = j.at("csg").value("target", "");
            } else if (role == "union") {
                i.csg = csg_role::union_member;
                i.csg_ref = j.at("csg").value("group", "");
            }
        }
        if (j.contains("parent") && !j.at("parent").is_null())
            i.parent = j.at("parent").get<std::string>();
        scene.instances.push_back(std::move(i));
    }
    if (root.contains("anchors")) {
        for (const auto& j : root.at("anchors")) {
            anchor a;
            a.id = j.at("id");
            a.class_name = j.value("class", "");
            a.f.position = vec_from(j.at("position"));
            a.f.rotation = quat_from(j.at("rotation"));
            a.box.lo = vec_from(j.at("extent").at("lo"));
            a.box.hi = vec_from(j.at("extent").at("hi"));
            a.declared_size = j.value("declared", false);
            if (j.contains("parent") && !j.at("parent").is_null())
                a.parent = j.at("parent").get<std::string>();
            scene.anchors.push_back(std::move(a));
        }
    }
    if (root.contains("provenance"))
        scene.provenance =
            root.at("provenance").get<std::map<std::string, std::vector<std::string>>>();
    return scene;
}

} // namespace dgc
