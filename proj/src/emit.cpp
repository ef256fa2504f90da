#include "dgc/emit.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include "dgc/numfmt.hpp"
#include "dgc/serialize.hpp"

namespace dgc {

namespace {

std::string feature_word(feature f) { return feature_name(f); }

std::string size_phrase(const create_step& c) {
    const auto& d = c.dims;
    switch (c.kind) {
        case shape_kind::cube:
        case shape_kind::empty:
            return "size " + fmt_num(d.a) + "×" + fmt_num(d.b) + "×" + fmt_num(d.c) +
                   " m";
        case shape_kind::cylinder:
        case shape_kind::cone:
        case shape_kind::disc:
            return "diameter " + fmt_num(d.a) + " m and height " + fmt_num(d.b) + " m";
        case shape_kind::sphere:
        case shape_kind::hemisphere: return "diameter " + fmt_num(d.a) + " m";
    }
    return "";
}

std::string shape_word(shape_kind k) {
    switch (k) {
        case shape_kind::cube: return "cuboid";
        case shape_kind::cylinder: return "cylinder";
        case shape_kind::cone: return "cone";
        case shape_kind::sphere: return "sphere";
        case shape_kind::hemisphere: return "hemisphere";
        case shape_kind::disc: return "disc";
        case shape_kind::empty: return "empty";
    }
    return "";
}

std::string cutter_name(const std::string& id) {
    return id.ends_with("_cutter") ? id : id + "_cutter";
}

std::string display_name(const create_step& c) {
    return c.cutter ? cutter_name(c.id) : c.id;
}

// ---------------------------------------------------------------------------
// Action text
// ---------------------------------------------------------------------------

struct action_writer {
    std::string out;
    std::string loop_id; // when set, body steps print `<template>[k]`

    std::string name_of(const std::string& id) const {
        if (!loop_id.empty()) {
            auto lb = id.find('[');
            if (lb != std::string::npos && id.substr(0, lb) == loop_id)
                return loop_id + "[k]";
        }
        return id;
    }

    void line(const std::string& text) {
        if (!loop_id.empty()) out += "  ";
        out += text + "\n";
    }

    void write(const step& s) {
        std::visit([this](const auto& v) { this->render(v); }, s);
    }

    void render(const create_step& c) {
        std::string name = name_of(display_name(c));
        if (c.empty_anchor) {
            line("Create an invisible Empty helper named " + name + " with " + size_phrase(c) +
                 ".");
        } else {
            line("Create primitive " + shape_word(c.kind) + " with " + size_phrase(c) +
                 " and name it " + name + ".");
        }
    }

    void render(const rotate_step& r) {
        std::string name = name_of(r.id);
        if (r.dir) {
            using k = orientation_directive::kind;
            switch (r.dir->k) {
                case k::fixed_axis:
                    line("Rotate " + name + " so its axis aligns " +
                         axis_dir_name(r.dir->axis) + " (world).");
                    break;
                case k::radial_from:
                    line("Rotate " + name + " so its local +Z points radially from " +
                         r.dir->ref_id + ".");
                    break;
                case k::tangent_to:
                    line("Rotate " + name + " so its local +Z runs tangent to " + r.dir->ref_id +
                         ".");
                    break;
                case k::normal_to:
                    line("Rotate " + name + " so its local +Z matches the nearest face normal of " +
                         r.dir->ref_id + ".");
                    break;
                case k::face_normal:
                    line("Rotate " + name + " so its " + axis_dir_name(r.dir->axis) +
                         "_face normal matches the nearest face normal of " + r.dir->ref_id + ".");
                    break;
                case k::face_align:
                    line("Rotate " + name + " so its " + axis_dir_name(r.dir->axis) +
                         "_face aligns with " + r.dir->ref_id + "." +
                         axis_dir_name(r.dir->ref_face) + "_face.");
                    break;
            }
        }
        if (r.spin)
            line("Rotate " + name + " by " + fmt_num(r.spin->angle_deg) +
                 " degrees about its local " + std::string(1, r.spin->axis) + " axis.");
    }

    void render(const align_step& a) {
        line(to_text(a.spec, name_of(a.id)) + ".");
    }

    void render(const anchor_step& a) {
        line("Anchor " + name_of(a.id) + " to " + (a.ref.empty() ? "world" : a.ref) + ".origin.");
    }

    void render(const offset_step& o) {
        line("Then move by " + to_text(pos_spec{o.off}) + ".");
    }

    void render(const polar_step& p) {
        std::string about = p.ref.empty() ? "" : " about " + p.ref;
        line("Then move by " + to_text(pos_spec{p.pol}) + about + ".");
    }

    void render(const connect_step& c) {
        line("Connect " + to_text(c.spec.a) + " + " + to_text(c.spec.b) + " (auto length).");
    }

    void render(const boolean_step& b) {
        if (b.subtract)
            line("Boolean-subtract " + cutter_name(b.tool) + " from " + b.target + ".");
        else
            line("Boolean-union " + b.tool + " with " + b.target + ".");
    }

    void render(const bevel_step& b) {
        line("Add bevel to " + b.target + " with radius " + fmt_num(b.radius) + " and " +
             std::to_string(b.segments) + " segments.");
    }

    void render(const snap_step& s) { line("Snap " + name_of(s.id) + " " + s.text + "."); }

    void render(const validate_step& v) {
        line("Validate that " + v.text + ".");
        line("Assembly guideline satisfied.");
    }

    void render(const material_step& m) {
        line("Assign material " + m.material + " to " + name_of(m.id) + ".");
    }

    void write_loop(const loop_block& loop) {
        out += "Repeat for k = 0 to " + std::to_string(loop.count - 1) + ":\n";
        loop_id = loop.template_id;

        // placement goes right before the material assignment
        std::vector<step> head, tail;
        bool seen_material = false;
        for (const auto& s : loop.body) {
            if (std::holds_alternative<material_step>(s)) seen_material = true;
            (seen_material ? tail : head).push_back(s);
        }
        for (const auto& s : head) write(s);

        if (std::holds_alternative<grid_pattern>(loop.pattern)) {
            const auto& g = std::get<grid_pattern>(loop.pattern);
            std::string ox = fmt_num(loop.base.dx + g.x0);
            std::string oy = fmt_num(loop.base.dy + g.y0);
            line("Then move by offset(" + ox + " + (k mod " + std::to_string(g.cols) + ")*" +
                 fmt_num(g.x_spacing) + ", " + oy + " + (k div " + std::to_string(g.cols) + ")*" +
                 fmt_num(g.y_spacing) + ", " + fmt_num(loop.base.dz) + ").");
        } else {
            const auto& p = std::get<polar_pattern>(loop.pattern);
            std::string about = loop.pos_ref.empty() ? "" : " about " + loop.pos_ref;
            line("Then move by polar(" + fmt_num(p.start_angle_deg) + " + k*" +
                 fmt_num(p.angle_step_deg) + "; dr=" + fmt_num(p.radius) + ")" + about + ".");
        }
        for (const auto& s : tail) write(s);

        loop_id.clear();
        out += "End repeat.\n";
    }
};

} // namespace

std::string emit_actions(const action_plan& plan) {
    action_writer w;
    w.out += "BLOCK 0 – Scene Reset & Units\n\n";
    w.out += "Delete every existing object to start from a clean scene.\n";
    w.out += "Set the length unit to **metres**.\n";

    if (!plan.materials.empty()) {
        w.out += "\n---\n\nBLOCK 1 – Materials\n\n";
        for (const auto& m : plan.materials) {
            w.out += "Define material " + m.name + "; diffuse_color = (" + fmt_num(m.rgba[0]) +
                     ", " + fmt_num(m.rgba[1]) + ", " + fmt_num(m.rgba[2]) + ", " +
                     fmt_num(m.rgba[3]) + ").\n";
        }
    }

    if (!plan.sections.empty()) {
        w.out += "\n---\n\nBLOCK 2 – Stage-by-Stage Operations\n";
        for (const auto& sec : plan.sections) {
            w.out += "\n---  SECTION " + std::to_string(sec.number) + " – " + sec.heading +
                     "  ---\n";
            std::string last_object;
            for (const auto& item : sec.items) {
                if (std::holds_alternative<loop_block>(item)) {
                    w.write_loop(std::get<loop_block>(item));
                    continue;
                }
                const step& s = std::get<step>(item);
                // blank line between per-object step runs
                std::string obj = object_of(s);
                if (verb_of(s) == verb::create && !last_object.empty() && obj != last_object)
                    w.out += "\n";
                if (!obj.empty()) last_object = obj;
                w.write(s);
            }
            w.out += "Stage " + std::to_string(sec.number) + " complete.\n";
        }
    }

    w.out += "\nAll stages complete.\n";
    return w.out;
}

// ---------------------------------------------------------------------------
// bpy script
// ---------------------------------------------------------------------------

namespace {

// Helper block shared by every generated script; emitted verbatim so the
// output is self-contained.
constexpr const char* kBpyHelpers = R"PY(import bpy
import math
from mathutils import Vector, Matrix
import mathutils as mu

# ---------------------------------------------------------------
# Helper Functions
# ---------------------------------------------------------------

def make_material(name, rgba):
    mat = bpy.data.materials.new(name)
    mat.diffuse_color = rgba
    return mat

def add_cube(obj_name, size_xyz_m):
    bpy.ops.mesh.primitive_cube_add(size=1)
    obj = bpy.context.active_object
    obj.name = obj_name
    obj.scale = (size_xyz_m[0], size_xyz_m[1], size_xyz_m[2])
    bpy.ops.object.transform_apply(scale=True)
    return obj

def add_cylinder(obj_name, d_m, h_m):
    bpy.ops.mesh.primitive_cylinder_add(radius=d_m * 0.5, depth=h_m)
    obj = bpy.context.active_object
    obj.name = obj_name
    return obj

def add_cone(obj_name, d_m, h_m):
    bpy.ops.mesh.primitive_cone_add(radius1=d_m * 0.5, radius2=0, depth=h_m)
    obj = bpy.context.active_object
    obj.name = obj_name
    return obj

def add_disc(obj_name, d_m, h_m):
    return add_cylinder(obj_name, d_m, h_m)

def add_sphere(obj_name, d_m):
    bpy.ops.mesh.primitive_uv_sphere_add(radius=d_m * 0.5)
    obj = bpy.context.active_object
    obj.name = obj_name
    return obj

def add_hemisphere(obj_name, d_m):
    obj = add_sphere(obj_name, d_m)
    bpy.ops.object.mode_set(mode='EDIT')
    bpy.ops.mesh.select_all(action='SELECT')
    bpy.ops.mesh.bisect(plane_co=(0, 0, 0), plane_no=(0, 0, -1),
                        clear_inner=True, use_fill=True)
    bpy.ops.object.mode_set(mode='OBJECT')
    return obj

def add_empty(obj_name, size_xyz_m):
    bpy.ops.object.empty_add(type='PLAIN_AXES')
    obj = bpy.context.active_object
    obj.name = obj_name
    obj.empty_display_size = max(size_xyz_m) * 0.5
    return obj

def align_axis_to_vector(obj, local_axis, target_vec):
    axis_vec = {'X': Vector((1, 0, 0)), 'Y': Vector((0, 1, 0)),
                'Z': Vector((0, 0, 1))}[local_axis]
    tgt_vec = Vector(target_vec).normalized()
    angle = axis_vec.angle(tgt_vec)

    if angle < 1e-6:
        return
    elif abs(angle - math.pi) < 1e-6:
        if abs(axis_vec.x) < 0.99:
            rot_axis = Vector((1, 0, 0)).cross(axis_vec).normalized()
        else:
            rot_axis = Vector((0, 1, 0)).cross(axis_vec).normalized()
    else:
        rot_axis = axis_vec.cross(tgt_vec).normalized()

    rot_matrix = Matrix.Rotation(angle, 4, rot_axis)
    obj.matrix_world = rot_matrix @ obj.matrix_world

_FACE = {'left': ('X', 'min'),  'right': ('X', 'max'),
         'back': ('Y', 'min'),  'front': ('Y', 'max'),
         'bottom': ('Z', 'min'), 'top': ('Z', 'max')}

class Locator:
    def __init__(self, obj: bpy.types.Object):
        self.obj = obj
        self._make_bbox()

    def _make_bbox(self):
        if self.obj.type in {'MESH', 'CURVE', 'SURFACE', 'META', 'FONT'}:
            dg = bpy.context.evaluated_depsgraph_get()
            eval_me = self.obj.evaluated_get(dg).to_mesh()
            xs = [v.co.x for v in eval_me.vertices]
            ys = [v.co.y for v in eval_me.vertices]
            zs = [v.co.z for v in eval_me.vertices]
            self.obj.evaluated_get(dg).to_mesh_clear()
            if xs:
                self.bb = {
                    'minX': min(xs), 'maxX': max(xs),
                    'minY': min(ys), 'maxY': max(ys),
                    'minZ': min(zs), 'maxZ': max(zs),
                }
                return
        dim = getattr(self.obj, "dimensions", Vector((0, 0, 0)))
        hx, hy, hz = dim.x * 0.5, dim.y * 0.5, dim.z * 0.5
        self.bb = {
            'minX': -hx, 'maxX': hx,
            'minY': -hy, 'maxY': hy,
            'minZ': -hz, 'maxZ': hz,
        }

    def center_world(self):
        p_local = mu.Vector(((self.bb['minX'] + self.bb['maxX']) * 0.5,
                             (self.bb['minY'] + self.bb['maxY']) * 0.5,
                             (self.bb['minZ'] + self.bb['maxZ']) * 0.5))
        return self.obj.matrix_world @ p_local

    def face_center_world(self, face_key: str):
        key = face_key.lower()
        if key == 'center':
            return self.center_world()
        axis, ext = _FACE[key]
        val = self.bb[f"{ext}{axis}"]
        if axis == 'X':
            p_local = mu.Vector((val, (self.bb['minY'] + self.bb['maxY']) * 0.5,
                                 (self.bb['minZ'] + self.bb['maxZ']) * 0.5))
        elif axis == 'Y':
            p_local = mu.Vector(((self.bb['minX'] + self.bb['maxX']) * 0.5, val,
                                 (self.bb['minZ'] + self.bb['maxZ']) * 0.5))
        else:
            p_local = mu.Vector(((self.bb['minX'] + self.bb['maxX']) * 0.5,
                                 (self.bb['minY'] + self.bb['maxY']) * 0.5, val))
        return self.obj.matrix_world @ p_local

def mean_point(points):
    acc = Vector((0.0, 0.0, 0.0))
    for p in points:
        acc += p
    return acc / len(points)

def offset_in(ref_obj, v):
    if ref_obj is None:
        return Vector(v)
    return ref_obj.matrix_world.to_3x3() @ Vector(v)

def polar_offset(ref_obj, theta_deg, dr):
    th = math.radians(theta_deg)
    return offset_in(ref_obj, (dr * math.cos(th), dr * math.sin(th), 0.0))

def world_axis(obj, axis, sign=1.0):
    v = {'X': Vector((1, 0, 0)), 'Y': Vector((0, 1, 0)), 'Z': Vector((0, 0, 1))}[axis]
    return obj.matrix_world.to_3x3() @ (v * sign)

def nearest_face_normal(ref_obj, query):
    loc = Locator(ref_obj)
    best, best_d = 'top', None
    for key in _FACE:
        p = loc.face_center_world(key)
        d = (p - query).length
        if best_d is None or d < best_d:
            best, best_d = key, d
    axis, ext = _FACE[best]
    sign = 1.0 if ext == 'max' else -1.0
    return world_axis(ref_obj, axis, sign)

def rotate_in_place(obj, local_axis, target_vec):
    # reorient about the object's own origin: the matrix rotation alone
    # would swing the location around the world origin
    loc = Vector(obj.location)
    align_axis_to_vector(obj, local_axis, target_vec)
    obj.location = loc

def orient_radial_from(obj, ref_obj):
    d = obj.location - Locator(ref_obj).center_world()
    rotate_in_place(obj, 'Z', d)

def orient_tangent_to(obj, ref_obj):
    rot = ref_obj.matrix_world.to_3x3()
    d = rot.inverted() @ (obj.location - Locator(ref_obj).center_world())
    d.z = 0.0
    t = Vector((0, 0, 1)).cross(d.normalized())
    rotate_in_place(obj, 'Z', rot @ t)

def orient_normal_to(obj, ref_obj, local_axis='Z', flip=1.0):
    rotate_in_place(obj, local_axis,
                    nearest_face_normal(ref_obj, obj.location) * flip)

def connect_between(obj, a, b):
    a = Vector(a)
    b = Vector(b)
    d = b - a
    align_axis_to_vector(obj, 'Z', d.normalized())
    dims = obj.dimensions
    obj.dimensions = (dims.x, dims.y, d.length)
    obj.location = (a + b) * 0.5

def boolean_subtract(target, tool):
    mod = target.modifiers.new(name="bool_sub", type='BOOLEAN')
    mod.operation = 'DIFFERENCE'
    mod.object = tool
    bpy.context.view_layer.objects.active = target
    bpy.ops.object.modifier_apply(modifier=mod.name)
    tool.hide_set(True)
    tool.hide_render = True

def boolean_union(target, tool):
    mod = target.modifiers.new(name="bool_union", type='BOOLEAN')
    mod.operation = 'UNION'
    mod.object = tool
    bpy.context.view_layer.objects.active = target
    bpy.ops.object.modifier_apply(modifier=mod.name)
    tool.hide_set(True)
    tool.hide_render = True

def add_bevel(target, radius, segments):
    mod = target.modifiers.new(name="bevel", type='BEVEL')
    mod.width = radius
    mod.segments = segments
    bpy.context.view_layer.objects.active = target
    bpy.ops.object.modifier_apply(modifier=mod.name)

# ---------------------------------------------------------------
# Scene Reset & Units
# ---------------------------------------------------------------

bpy.ops.object.select_all(action='SELECT')
bpy.ops.object.delete()
bpy.context.scene.unit_settings.system = 'METRIC'
bpy.context.scene.unit_settings.scale_length = 1
)PY";

std::string py_tuple3(double a, double b, double c) {
    return "(" + fmt_py(a) + ", " + fmt_py(b) + ", " + fmt_py(c) + ")";
}

std::string axis_tuple(axis_dir d) {
    switch (d) {
        case axis_dir::pos_x: return "(1, 0, 0)";
        case axis_dir::neg_x: return "(-1, 0, 0)";
        case axis_dir::pos_y: return "(0, 1, 0)";
        case axis_dir::neg_y: return "(0, -1, 0)";
        case axis_dir::pos_z: return "(0, 0, 1)";
        case axis_dir::neg_z: return "(0, 0, -1)";
    }
    return "(0, 0, 1)";
}

char axis_letter(axis_dir d) {
    switch (d) {
        case axis_dir::pos_x:
        case axis_dir::neg_x: return 'X';
        case axis_dir::pos_y:
        case axis_dir::neg_y: return 'Y';
        default: return 'Z';
    }
}

bool axis_negative(axis_dir d) {
    return d == axis_dir::neg_x || d == axis_dir::neg_y || d == axis_dir::neg_z;
}

bool rotate_needs_position(const rotate_step& r) {
    if (!r.dir) return false;
    using k = orientation_directive::kind;
    return r.dir->k == k::radial_from || r.dir->k == k::tangent_to ||
           r.dir->k == k::normal_to || r.dir->k == k::face_normal;
}

struct script_writer {
    std::string out;
    std::map<std::string, std::string> var_of; // object id -> python variable
    std::set<std::string> used_vars;
    bool use_objs = false;
    std::string indent;
    std::string loop_template; // template id when writing a loop body

    void line(const std::string& text) { out += indent + text + "\n"; }
    void blank() { out += "\n"; }

    std::string fresh_var(const std::string& id) {
        std::string v;
        for (char c : id)
            v += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
        while (!v.empty() && v.back() == '_') v.pop_back();
        if (v.empty() || std::isdigit(static_cast<unsigned char>(v[0]))) v = "obj_" + v;
        std::string base = v;
        int k = 2;
        while (used_vars.count(v)) v = base + "_" + std::to_string(k++);
        used_vars.insert(v);
        return v;
    }

    bool in_loop() const { return !loop_template.empty(); }

    /// Python expression for the object carrying `id`.
    std::string obj_expr(const std::string& id) const {
        if (in_loop()) {
            auto lb = id.find('[');
            if (lb != std::string::npos && id.substr(0, lb) == loop_template) return "obj";
        }
        auto it = var_of.find(id);
        if (it != var_of.end()) return it->second;
        return "objs[\"" + id + "\"]"; // loop-created instances
    }

    std::string point_expr(const feature_ref& fr) const {
        if (fr.all_instances) {
            return "mean_point([Locator(o).face_center_world(\"" + feature_word(fr.feat) +
                   "\") for name, o in objs.items() if name.startswith(\"" + fr.node_id +
                   "[\")])";
        }
        std::string id = fr.node_id;
        if (fr.index) id += "[" + std::to_string(*fr.index) + "]";
        return "Locator(" + obj_expr(id) + ").face_center_world(\"" + feature_word(fr.feat) +
               "\")";
    }

    std::string target_expr(const target_ref& t) const {
        if (t.k == target_ref::kind::average) {
            std::string e = "mean_point([";
            for (std::size_t i = 0; i < t.avg.size(); ++i) {
                if (i) e += ", ";
                e += point_expr(t.avg[i]);
            }
            return e + "])";
        }
        return point_expr(t.ref);
    }

    std::string ref_obj_expr(const std::string& ref) const {
        return ref.empty() ? "None" : obj_expr(ref);
    }

    // ---- step renderers ------------------------------------------------

    void render(const create_step& c) {
        std::string name = display_name(c);
        std::string var;
        std::string name_literal;
        if (in_loop()) {
            var = "obj";
            name_literal = "f\"" + loop_template + "[{k}]\"";
        } else {
            var = fresh_var(c.id);
            var_of[c.id] = var;
            name_literal = "\"" + name + "\"";
        }
        const auto& d = c.dims;
        switch (c.kind) {
            case shape_kind::cube:
                line(var + " = add_cube(" + name_literal + ", " +
                     py_tuple3(d.a, d.b, d.c) + ")");
                break;
            case shape_kind::cylinder:
                line(var + " = add_cylinder(" + name_literal + ", " + fmt_py(d.a) + ", " +
                     fmt_py(d.b) + ")");
                break;
            case shape_kind::cone:
                line(var + " = add_cone(" + name_literal + ", " + fmt_py(d.a) + ", " +
                     fmt_py(d.b) + ")");
                break;
            case shape_kind::disc:
                line(var + " = add_disc(" + name_literal + ", " + fmt_py(d.a) + ", " +
                     fmt_py(d.b) + ")");
                break;
            case shape_kind::sphere:
                line(var + " = add_sphere(" + name_literal + ", " + fmt_py(d.a) + ")");
                break;
            case shape_kind::hemisphere:
                line(var + " = add_hemisphere(" + name_literal + ", " + fmt_py(d.a) + ")");
                break;
            case shape_kind::empty:
                line(var + " = add_empty(" + name_literal + ", " +
                     py_tuple3(d.k == size_spec::kind::box ? d.a : 0.1,
                               d.k == size_spec::kind::box ? d.b : 0.1,
                               d.k == size_spec::kind::box ? d.c : 0.1) +
                     ")");
                break;
        }
        if (use_objs) {
            if (in_loop())
                line("objs[f\"" + loop_template + "[{k}]\"] = obj");
            else
                line("objs[\"" + c.id + "\"] = " + var);
        }
    }

    void render(const rotate_step& r) {
        std::string var = obj_expr(r.id);
        if (r.dir) {
            using k = orientation_directive::kind;
            switch (r.dir->k) {
                case k::fixed_axis:
                    line("align_axis_to_vector(" + var + ", 'Z', " + axis_tuple(r.dir->axis) +
                         ")");
                    break;
                case k::radial_from:
                    line("orient_radial_from(" + var + ", " + obj_expr(r.dir->ref_id) + ")");
                    break;
                case k::tangent_to:
                    line("orient_tangent_to(" + var + ", " + obj_expr(r.dir->ref_id) + ")");
                    break;
                case k::normal_to:
                    line("orient_normal_to(" + var + ", " + obj_expr(r.dir->ref_id) + ")");
                    break;
                case k::face_normal:
                    line("orient_normal_to(" + var + ", " + obj_expr(r.dir->ref_id) + ", '" +
                         std::string(1, axis_letter(r.dir->axis)) + "', " +
                         (axis_negative(r.dir->axis) ? "-1.0" : "1.0") + ")");
                    break;
                case k::face_align:
                    line("align_axis_to_vector(" + var + ", '" +
                         std::string(1, axis_letter(r.dir->axis)) + "', world_axis(" +
                         obj_expr(r.dir->ref_id) + ", '" +
                         std::string(1, axis_letter(r.dir->ref_face)) + "', " +
                         (axis_negative(r.dir->ref_face) ? "-1.0" : "1.0") + ")" +
                         (axis_negative(r.dir->axis) ? " * -1.0" : "") + ")");
                    break;
            }
        }
        if (r.spin)
            line(var + ".matrix_world = " + var + ".matrix_world @ Matrix.Rotation(math.radians(" +
                 fmt_py(r.spin->angle_deg) + "), 4, '" + std::string(1, r.spin->axis) + "')");
    }

    void render(const align_step& a) {
        std::string var = obj_expr(a.id);
        line("ref = " + target_expr(a.spec.target));
        line("offs = Locator(" + var + ").face_center_world(\"" +
             feature_word(a.spec.this_feature) + "\")");
        line("delta = ref - offs");
        if (!a.spec.axes.all()) {
            std::string x = a.spec.axes.x ? "delta.x" : "0.0";
            std::string y = a.spec.axes.y ? "delta.y" : "0.0";
            std::string z = a.spec.axes.z ? "delta.z" : "0.0";
            line("delta = Vector((" + x + ", " + y + ", " + z + "))");
        }
        line(var + ".location += delta");
    }

    void render(const anchor_step& a) {
        if (a.ref.empty()) return; // created at the world origin already
        line(obj_expr(a.id) + ".location = Vector(" + obj_expr(a.ref) + ".location)");
    }

    void render(const offset_step& o) {
        std::string var = obj_expr(o.id);
        if (o.ref.empty())
            line(var + ".location += Vector(" + py_tuple3(o.off.dx, o.off.dy, o.off.dz) + ")");
        else
            line(var + ".location += offset_in(" + obj_expr(o.ref) + ", " +
                 py_tuple3(o.off.dx, o.off.dy, o.off.dz) + ")");
    }

    void render(const polar_step& p) {
        line(obj_expr(p.id) + ".location += polar_offset(" + ref_obj_expr(p.ref) + ", " +
             fmt_py(p.pol.theta_deg) + ", " + fmt_py(p.pol.dr) + ")");
    }

    void render(const connect_step& c) {
        line("a = " + point_expr(c.spec.a));
        line("b = " + point_expr(c.spec.b));
        line("connect_between(" + obj_expr(c.id) + ", a, b)");
    }

    void render(const boolean_step& b) {
        if (b.subtract)
            line("boolean_subtract(" + obj_expr(b.target) + ", " + obj_expr(b.tool) + ")");
        else
            line("boolean_union(" + obj_expr(b.target) + ", " + obj_expr(b.tool) + ")");
    }

    void render(const bevel_step& b) {
        line("add_bevel(" + obj_expr(b.target) + ", " + fmt_py(b.radius) + ", " +
             std::to_string(b.segments) + ")");
    }

    void render(const snap_step& s) { line("# Snap " + s.id + ": " + s.text); }

    void render(const validate_step& v) {
        line("# Validate: " + v.text + " -- assembly guideline satisfied.");
    }

    void render(const material_step& m) {
        line(obj_expr(m.id) + ".data.materials.append(mat_" + m.material + ")");
    }

    void write(const step& s) {
        std::visit([this](const auto& v) { this->render(v); }, s);
    }
};

} // namespace

std::string emit_script(const action_plan& plan, const std::string& dialect) {
    if (dialect != "bpy")
        throw domain_error(diag_code::unsupported_dialect,
                           "unsupported dialect '" + dialect + "'");

    script_writer w;

    // objs registry only when something must be looked up dynamically
    for (const auto& sec : plan.sections) {
        for (const auto& item : sec.items) {
            if (std::holds_alternative<loop_block>(item)) w.use_objs = true;
            else {
                const step& s = std::get<step>(item);
                if (const auto* a = std::get_if<align_step>(&s)) {
                    if (a->spec.target.k == target_ref::kind::average) w.use_objs = true;
                    else if (a->spec.target.ref.all_instances || a->spec.target.ref.index)
                        w.use_objs = true;
                }
                if (const auto* c = std::get_if<connect_step>(&s)) {
                    if (c->spec.a.index || c->spec.a.all_instances || c->spec.b.index ||
                        c->spec.b.all_instances)
                        w.use_objs = true;
                }
            }
        }
    }

    w.out += kBpyHelpers;

    if (!plan.materials.empty()) {
        w.blank();
        w.line("# ---------------------------------------------------------------");
        w.line("# Materials");
        w.line("# ---------------------------------------------------------------");
        w.blank();
        for (const auto& m : plan.materials) {
            w.line("mat_" + m.name + " = make_material(\"" + m.name + "\", (" +
                   fmt_py(m.rgba[0]) + ", " + fmt_py(m.rgba[1]) + ", " + fmt_py(m.rgba[2]) +
                   ", " + fmt_py(m.rgba[3]) + "))");
        }
    }

    if (w.use_objs) {
        w.blank();
        w.line("objs = {}");
    }

    for (const auto& sec : plan.sections) {
        w.blank();
        w.line("# ---------------------------------------------------------------");
        w.line("# SECTION " + std::to_string(sec.number) + " – " + sec.heading);
        w.line("# ---------------------------------------------------------------");
        std::optional<step> deferred_rotate;

        // count created objects to decide on per-object comments
        int created = 0;
        for (const auto& item : sec.items)
            if (std::holds_alternative<step>(item) &&
                std::holds_alternative<create_step>(std::get<step>(item)))
                ++created;

        for (const auto& item : sec.items) {
            if (std::holds_alternative<loop_block>(item)) {
                const auto& loop = std::get<loop_block>(item);
                w.blank();
                w.line("for k in range(" + std::to_string(loop.count) + "):");
                w.indent = "    ";
                w.loop_template = loop.template_id;

                std::vector<step> head, tail;
                std::vector<step> deferred;
                bool seen_material = false;
                for (const auto& s : loop.body) {
                    if (std::holds_alternative<material_step>(s)) seen_material = true;
                    if (const auto* r = std::get_if<rotate_step>(&s);
                        r && rotate_needs_position(*r)) {
                        deferred.push_back(s);
                        continue;
                    }
                    (seen_material ? tail : head).push_back(s);
                }
                for (const auto& s : head) w.write(s);

                if (std::holds_alternative<grid_pattern>(loop.pattern)) {
                    const auto& g = std::get<grid_pattern>(loop.pattern);
                    w.line("row, col = divmod(k, " + std::to_string(g.cols) + ")");
                    std::string x = fmt_py(loop.base.dx + g.x0) + " + col * " + fmt_py(g.x_spacing);
                    std::string y = fmt_py(loop.base.dy + g.y0) + " + row * " + fmt_py(g.y_spacing);
                    w.line("obj.location += offset_in(" + w.ref_obj_expr(loop.pos_ref) + ", (" +
                           x + ", " + y + ", " + fmt_py(loop.base.dz) + "))");
                } else {
                    const auto& p = std::get<polar_pattern>(loop.pattern);
                    w.line("obj.location += polar_offset(" + w.ref_obj_expr(loop.pos_ref) + ", " +
                           fmt_py(p.start_angle_deg) + " + k * " + fmt_py(p.angle_step_deg) +
                           ", " + fmt_py(p.radius) + ")");
                }
                for (const auto& s : deferred) w.write(s); // position-dependent orientation
                for (const auto& s : tail) w.write(s);

                w.loop_template.clear();
                w.indent.clear();
                continue;
            }

            const step& s = std::get<step>(item);
            if (std::holds_alternative<create_step>(s)) {
                // position-dependent rotation of the previous object flushes first
                if (deferred_rotate) {
                    w.write(*deferred_rotate);
                    deferred_rotate.reset();
                }
                w.blank();
                if (created > 1)
                    w.line("# " + std::get<create_step>(s).id);
            }
            if (const auto* r = std::get_if<rotate_step>(&s); r && rotate_needs_position(*r)) {
                deferred_rotate = s; // needs the final location; emit after placement
                continue;
            }
            if (deferred_rotate && std::holds_alternative<material_step>(s) &&
                object_of(s) == object_of(*deferred_rotate)) {
                w.write(*deferred_rotate);
                deferred_rotate.reset();
            }
            w.write(s);
        }
        if (deferred_rotate) {
            w.write(*deferred_rotate);
            deferred_rotate.reset();
        }
    }

    w.blank();
    return w.out;
}

} // namespace dgc
