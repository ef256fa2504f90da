#pragma once

#include <array>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dgc {

// ---------------------------------------------------------------------------
// Materials
// ---------------------------------------------------------------------------

struct material_def {
    std::string name;
    std::array<double, 4> rgba{0, 0, 0, 1};

    bool operator==(const material_def&) const = default;
};

// ---------------------------------------------------------------------------
// Sizes and shapes
// ---------------------------------------------------------------------------

enum class shape_kind { cube, cylinder, cone, sphere, hemisphere, disc, empty };

const char* shape_kind_name(shape_kind k);

/// Declared size of a node. Box carries (lx,ly,lz); the cylinder family
/// carries (d,h); the sphere family carries (d). `auto_size` defers sizing
/// to the resolver (union of children). All lengths in metres.
struct size_spec {
    enum class kind { auto_size, box, cylinder, cone, disc, sphere, hemisphere };
    kind k = kind::auto_size;
    double a = 0, b = 0, c = 0; // box: lx,ly,lz; cyl family: d,h; sphere family: d

    bool is_auto() const { return k == kind::auto_size; }
    static size_spec make_auto() { return {}; }
    static size_spec make_box(double lx, double ly, double lz) {
        return {kind::box, lx, ly, lz};
    }

    bool operator==(const size_spec&) const = default;
};

// ---------------------------------------------------------------------------
// Features and placement expressions
// ---------------------------------------------------------------------------

/// Face-center features of a local extent box, plus the box midpoint.
enum class feature { left, right, front, back, top, bottom, center };

const char* feature_name(feature f);

/// Reference to a feature point on another node. `index` selects one pattern
/// instance (`B[k]`); `all_instances` averages over every instance (`B[*]`).
struct feature_ref {
    std::string node_id;
    std::optional<int> index;
    bool all_instances = false;
    feature feat = feature::center;

    bool operator==(const feature_ref&) const = default;
};

struct target_ref {
    enum class kind { single, average };
    kind k = kind::single;
    feature_ref ref;              // kind::single
    std::vector<feature_ref> avg; // kind::average

    bool operator==(const target_ref&) const = default;
};

/// Axis subset for an align move; omitted axis lists normalize to all three.
struct axis_mask {
    bool x = true, y = true, z = true;

    bool any() const { return x || y || z; }
    bool all() const { return x && y && z; }

    bool operator==(const axis_mask&) const = default;
};

struct align_spec {
    axis_mask axes;
    feature this_feature = feature::center;
    target_ref target;

    bool operator==(const align_spec&) const = default;
};

struct offset_spec {
    double dx = 0, dy = 0, dz = 0;

    bool operator==(const offset_spec&) const = default;
};

struct polar_spec {
    double theta_deg = 0;
    double dr = 0;

    bool operator==(const polar_spec&) const = default;
};

using pos_spec = std::variant<offset_spec, polar_spec>;

struct connect_spec {
    feature_ref a;
    feature_ref b;

    bool operator==(const connect_spec&) const = default;
};

// ---------------------------------------------------------------------------
// Orientation directives
// ---------------------------------------------------------------------------

/// One of the six axis-aligned world directions.
enum class axis_dir { pos_x, neg_x, pos_y, neg_y, pos_z, neg_z };

const char* axis_dir_name(axis_dir d);

/// Box face addressed by its outward normal (`+X_face` et al.).
feature face_of_axis(axis_dir d);
axis_dir axis_of_face(feature f); // center is invalid

struct orientation_directive {
    enum class kind {
        fixed_axis,   // axis:+Z            local +Z -> fixed world direction
        radial_from,  // axis:radial_from O local +Z -> away from O's center
        tangent_to,   // axis:tangent_to O  local +Z -> perpendicular to radial, in O's XY
        normal_to,    // normal:O           local +Z -> O's nearest face normal
        face_normal,  // +X_face:normal_to O   named local face normal -> O's nearest face normal
        face_align,   // +Z_face:align O.+Z_face
    };
    kind k = kind::fixed_axis;
    axis_dir axis = axis_dir::pos_z;     // fixed_axis; or the named local face for face_* kinds
    std::string ref_id;                  // referenced object, when the kind uses one
    axis_dir ref_face = axis_dir::pos_z; // face_align only

    bool operator==(const orientation_directive&) const = default;
};

/// Free-angle spin about a local axis, applied after the orientation step.
struct rotation_spec {
    char axis = 'Z'; // 'X' | 'Y' | 'Z'
    double angle_deg = 0;

    bool operator==(const rotation_spec&) const = default;
};

// ---------------------------------------------------------------------------
// Patterns
// ---------------------------------------------------------------------------

struct grid_pattern {
    int rows = 1, cols = 1;
    double x_spacing = 0, y_spacing = 0;
    double x0 = 0, y0 = 0;

    bool operator==(const grid_pattern&) const = default;
};

struct polar_pattern {
    int count = 1;
    double radius = 0;
    double start_angle_deg = 0;
    double angle_step_deg = 0;

    bool operator==(const polar_pattern&) const = default;
};

using pattern_spec = std::variant<grid_pattern, polar_pattern>;

/// Any single placement-grammar production, as returned by parse_placement.
using placement_expr = std::variant<align_spec, offset_spec, polar_spec, connect_spec,
                                    orientation_directive, pattern_spec>;

// ---------------------------------------------------------------------------
// Node records and the graph
// ---------------------------------------------------------------------------

enum class create_method {
    primitive,
    boolean_subtract,
    boolean_union,
    group,
    extrude_from_sketch,
    auto_connect,
};

const char* create_method_name(create_method m);

struct source_span {
    int first_line = 0;
    int last_line = 0;

    bool operator==(const source_span&) const = default;
};

struct node_record {
    std::string id;
    std::optional<std::string> parent;
    std::string node_type;
    size_spec size;
    std::vector<align_spec> align;
    std::optional<pos_spec> pos;
    std::optional<connect_spec> connect;
    std::optional<orientation_directive> orientation;
    std::optional<rotation_spec> rotation;
    std::optional<std::string> material;
    create_method method = create_method::primitive;
    std::optional<std::vector<std::vector<std::string>>> assembly_order;
    std::optional<std::string> constraint;
    std::vector<std::string> after;
    std::vector<std::string> depends_on;
    std::optional<std::string> tool_id;
    std::optional<std::string> target_id;
    std::optional<pattern_spec> pattern;
    int layer = 0;
    source_span span;

    bool is_group() const { return method == create_method::group; }
    bool is_boolean() const {
        return method == create_method::boolean_subtract ||
               method == create_method::boolean_union;
    }

    bool operator==(const node_record& o) const {
        // span is diagnostic metadata, not structure
        return id == o.id && parent == o.parent && node_type == o.node_type && size == o.size &&
               align == o.align && pos == o.pos && connect == o.connect &&
               orientation == o.orientation && rotation == o.rotation &&
               material == o.material && method == o.method &&
               assembly_order == o.assembly_order && constraint == o.constraint &&
               after == o.after && depends_on == o.depends_on && tool_id == o.tool_id &&
               target_id == o.target_id && pattern == o.pattern && layer == o.layer;
    }
};

struct graph_ast {
    std::vector<material_def> materials;
    std::vector<node_record> nodes; // source order

    bool operator==(const graph_ast&) const = default;
};

} // namespace dgc
