#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dgc/geometry.hpp"
#include "dgc/validate.hpp"

namespace dgc {

enum class csg_role { solid, cutter, union_member };

struct instance {
    std::string id;
    std::string class_name;
    primitive_shape shape;
    frame f;
    extent_box box; // local extent, includes any connect length override
    std::optional<std::string> material;
    csg_role csg = csg_role::solid;
    std::string csg_ref; // cutter: target node; union_member: owning boolean node
    std::optional<std::string> parent;

    oriented_box obox() const { return {f, box}; }
};

/// Sizing Empty standing in for a group node.
struct anchor {
    std::string id;
    std::string class_name;
    frame f;
    extent_box box;
    bool declared_size = false; // false: union extent of resolved children
    std::optional<std::string> parent;

    oriented_box obox() const { return {f, box}; }
};

struct resolved_scene {
    std::vector<instance> instances; // creation order
    std::vector<anchor> anchors;
    std::map<std::string, std::vector<std::string>> provenance; // node id -> instance ids

    const instance* find(const std::string& id) const;
    const anchor* find_anchor(const std::string& id) const;
};

/// Resolves a world-space feature point. Star refs average all pattern
/// instances; Avg(...) averages the listed points.
/// Throws UnknownTarget / EmptyStarSet.
using feature_point_fn = std::function<vec3(const feature_ref&)>;

/// Translation an align clause produces: (target - this_feature) with
/// components outside the axis set zeroed.
vec3 apply_align(const oriented_box& current, const align_spec& spec,
                 const feature_point_fn& point_of);

struct connect_placement {
    frame f;
    double length = 0;
};

/// Midpoint placement with local +Z along (b - a); length = |b - a|.
/// Throws CoincidentEndpoints.
connect_placement apply_connect(const vec3& a, const vec3& b);

/// Executes placement semantics over a validated, pattern-expanded graph.
/// Deterministic: two runs produce bit-identical scenes.
/// Throws domain_error (ForwardReference, DegeneratePlacement, ...).
resolved_scene resolve_scene(const validated_graph& vg);

std::string scene_to_json(const resolved_scene& scene);
resolved_scene scene_from_json(const std::string& text); // throws on malformed input

} // namespace dgc
