#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "dgc/ast.hpp"
#include "dgc/diagnostics.hpp"

namespace dgc {

using vec3 = Eigen::Vector3d;
using quat = Eigen::Quaterniond;

/// Rigid local-to-world transform.
struct frame {
    vec3 position{0, 0, 0};
    quat rotation{1, 0, 0, 0};

    vec3 apply(const vec3& local) const { return position + rotation * local; }
    vec3 rotate(const vec3& local) const { return rotation * local; }
};

/// Axis-aligned extent in the owning object's local frame, metres.
struct extent_box {
    vec3 lo{0, 0, 0};
    vec3 hi{0, 0, 0};

    vec3 center() const { return 0.5 * (lo + hi); }
    vec3 half() const { return 0.5 * (hi - lo); }
    vec3 sizes() const { return hi - lo; }
};

struct primitive_shape {
    shape_kind kind = shape_kind::empty;
    size_spec dims;
};

/// Shape kind implied by a size spec (auto -> empty).
shape_kind shape_kind_of(const size_spec& s);

/// Centered local extent of a primitive. Hemispheres sit on Z=0 with the dome
/// up; empties use their declared box size when present, else a zero box.
/// Throws NonPositiveDimension.
extent_box extent_of(const primitive_shape& shape);

/// Local face-center point: extreme on the face axis, midpoint on the others.
vec3 face_point_local(const extent_box& box, feature f);

/// Outward unit normal of a face in local coordinates; `center` is invalid.
vec3 face_normal_local(feature f);

vec3 face_center_world(const frame& fr, const extent_box& box, feature f);

vec3 axis_dir_vector(axis_dir d);

/// Minimal rotation taking `local_axis` onto `target` (both unit length).
/// Near-identity (< 1e-6 rad) returns identity; near-antiparallel rotates pi
/// about X^ x axis unless the axis is within 0.99 of +-X^, then Y^ x axis.
/// Throws NonUnitInput.
quat rotation_aligning(const vec3& local_axis, const vec3& target);

struct oriented_box {
    frame f;
    extent_box box;

    vec3 world_center() const { return f.apply(box.center()); }
};

using box_lookup = std::function<std::optional<oriented_box>(const std::string&)>;

/// Rotation for an orientation directive. `nominal_pos` is the node's
/// tentative world position (used by radial/tangent/nearest-face families).
/// Throws UnresolvedReference / DegenerateDirection.
quat resolve_orientation(const orientation_directive& dir, const vec3& nominal_pos,
                         const box_lookup& lookup);

/// Nearest face of `ob` to a query point, by world face-center distance.
feature nearest_face(const oriented_box& ob, const vec3& query);

std::array<vec3, 8> world_corners(const frame& fr, const extent_box& box);

extent_box world_aabb(const frame& fr, const extent_box& box);

/// Euclidean distance between the convex hulls of two point sets (GJK);
/// zero when they intersect or touch.
double convex_distance(std::span<const vec3> a, std::span<const vec3> b);

} // namespace dgc
