#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dgc/ast.hpp"
#include "dgc/validate.hpp"

namespace dgc {

enum class verb {
    create,
    rotate,
    align,
    anchor,
    offset,
    polar,
    connect,
    boolean_subtract,
    boolean_union,
    bevel,
    snap,
    validate,
    assign_material,
};

const char* verb_name(verb v);

struct create_step {
    std::string id;
    shape_kind kind = shape_kind::cube;
    size_spec dims;
    bool empty_anchor = false; // sizing Empty for a group node
    bool cutter = false;       // tool of a boolean_subtract
};

struct rotate_step {
    std::string id;
    std::optional<orientation_directive> dir;
    std::optional<rotation_spec> spin;
};

struct align_step {
    std::string id;
    align_spec spec;
};

struct anchor_step {
    std::string id;
    std::string ref; // "" = world.origin
};

struct offset_step {
    std::string id;
    offset_spec off;
    std::string ref; // frame the offset is expressed in; "" = world
};

struct polar_step {
    std::string id;
    polar_spec pol;
    std::string ref;
};

struct connect_step {
    std::string id;
    connect_spec spec;
};

struct boolean_step {
    std::string id; // the boolean node
    bool subtract = true;
    std::string tool;
    std::string target;
};

struct bevel_step {
    std::string target;
    double radius = 0;
    int segments = 0;
};

struct snap_step {
    std::string id;
    std::string text;
};

struct validate_step {
    std::string text; // quoted guideline
};

struct material_step {
    std::string id;
    std::string material;
};

using step = std::variant<create_step, rotate_step, align_step, anchor_step, offset_step,
                          polar_step, connect_step, boolean_step, bevel_step, snap_step,
                          validate_step, material_step>;

verb verb_of(const step& s);
std::string object_of(const step& s);

/// Counted emission of one pattern template: body steps apply per instance k,
/// with the grid/polar arithmetic regenerated inside the loop.
struct loop_block {
    std::string template_id;
    int count = 0;
    pattern_spec pattern;
    offset_spec base; // template offset folded into grid placement
    std::string pos_ref;
    std::vector<step> body; // per-instance steps; placement comes from the pattern
};

using section_item = std::variant<step, loop_block>;

struct plan_section {
    int number = 0;
    std::string heading;
    std::vector<section_item> items;
};

struct action_plan {
    std::vector<material_def> materials; // BLOCK 1
    std::vector<plan_section> sections;  // BLOCK 2; BLOCK 0 is fixed boilerplate
};

/// Lowers a validated, pattern-expanded graph. One section per assembly
/// group in build_sequence order; parents with a guideline constraint get a
/// closing Validate section. Throws OrderingCycle (unreachable after
/// validation).
action_plan plan(const validated_graph& vg);

} // namespace dgc
