#include "dgc/serialize.hpp"

#include "dgc/numfmt.hpp"

namespace dgc {

namespace {

/// Face features serialize in the `<name>_face` spelling of the prompt grammar.
std::string feature_text(feature f) {
    if (f == feature::center) return "center";
    return std::string(feature_name(f)) + "_face";
}

std::string axis_face_text(axis_dir d) {
    return std::string(axis_dir_name(d)) + "_face";
}

std::string join_ids(const std::vector<std::string>& ids) {
    std::string out;
    for (size_t i = 0; i < ids.size(); ++i) {
        if (i) out += ", ";
        out += ids[i];
    }
    return out;
}

} // namespace

std::string to_text(const size_spec& s) {
    using k = size_spec::kind;
    switch (s.k) {
        case k::auto_size: return "AUTO";
        case k::box:
            return "box(" + fmt_num(s.a) + ", " + fmt_num(s.b) + ", " + fmt_num(s.c) + ")";
        case k::cylinder: return "cylinder(" + fmt_num(s.a) + ", " + fmt_num(s.b) + ")";
        case k::cone: return "cone(" + fmt_num(s.a) + ", " + fmt_num(s.b) + ")";
        case k::disc: return "disc(" + fmt_num(s.a) + ", " + fmt_num(s.b) + ")";
        case k::sphere: return "sphere(" + fmt_num(s.a) + ")";
        case k::hemisphere: return "hemisphere(" + fmt_num(s.a) + ")";
    }
    return "AUTO";
}

std::string to_text(const feature_ref& f) {
    std::string out = f.node_id;
    if (f.all_instances) out += "[*]";
    else if (f.index) out += "[" + std::to_string(*f.index) + "]";
    out += "." + feature_text(f.feat);
    return out;
}

std::string to_text(const target_ref& t) {
    if (t.k == target_ref::kind::average) {
        std::string out = "Avg(";
        for (size_t i = 0; i < t.avg.size(); ++i) {
            if (i) out += ", ";
            out += to_text(t.avg[i]);
        }
        return out + ")";
    }
    return to_text(t.ref);
}

std::string to_text(const align_spec& a, const std::string& owner_id) {
    std::string out = "Align";
    if (!a.axes.all()) {
        out += "(";
        if (a.axes.x) out += "X";
        if (a.axes.y) out += "Y";
        if (a.axes.z) out += "Z";
        out += ")";
    }
    out += " " + owner_id + "." + feature_text(a.this_feature) + " to " + to_text(a.target);
    return out;
}

std::string to_text(const pos_spec& p) {
    if (std::holds_alternative<offset_spec>(p)) {
        const auto& o = std::get<offset_spec>(p);
        return "offset(" + fmt_num(o.dx) + ", " + fmt_num(o.dy) + ", " + fmt_num(o.dz) + ")";
    }
    const auto& pl = std::get<polar_spec>(p);
    return "polar(" + fmt_num(pl.theta_deg) + "; dr=" + fmt_num(pl.dr) + ")";
}

std::string to_text(const connect_spec& c) {
    return to_text(c.a) + " + " + to_text(c.b);
}

std::string to_text(const orientation_directive& o) {
    using k = orientation_directive::kind;
    switch (o.k) {
        case k::fixed_axis: return std::string("axis:") + axis_dir_name(o.axis);
        case k::radial_from: return "axis:radial_from " + o.ref_id;
        case k::tangent_to: return "axis:tangent_to " + o.ref_id;
        case k::normal_to: return "normal:" + o.ref_id;
        case k::face_normal: return axis_face_text(o.axis) + ":normal_to " + o.ref_id;
        case k::face_align:
            return axis_face_text(o.axis) + ":align " + o.ref_id + "." + axis_face_text(o.ref_face);
    }
    return "";
}

std::string to_text(const rotation_spec& r) {
    return std::string(1, r.axis) + ":" + fmt_num(r.angle_deg);
}

std::string to_text(const pattern_spec& p) {
    if (std::holds_alternative<grid_pattern>(p)) {
        const auto& g = std::get<grid_pattern>(p);
        return "grid(rows:" + std::to_string(g.rows) + ", cols:" + std::to_string(g.cols) +
               ", x_spacing:" + fmt_num(g.x_spacing) + ", y_spacing:" + fmt_num(g.y_spacing) +
               ", start_offset:(" + fmt_num(g.x0) + ", " + fmt_num(g.y0) + "))";
    }
    const auto& pl = std::get<polar_pattern>(p);
    return "polar(count:" + std::to_string(pl.count) + ", radius:" + fmt_num(pl.radius) +
           ", start_angle:" + fmt_num(pl.start_angle_deg) +
           ", angle_step:" + fmt_num(pl.angle_step_deg) + ")";
}

std::string serialize_graph(const graph_ast& g) {
    std::string out;
    out += "-- MATERIAL LIBRARY --\n";
    for (const auto& m : g.materials) {
        out += m.name + " | diffuse_color=(" + fmt_num(m.rgba[0]) + "," + fmt_num(m.rgba[1]) +
               "," + fmt_num(m.rgba[2]) + "," + fmt_num(m.rgba[3]) + ")\n";
    }
    out += "#END_MATERIALS\n";
    out += "# ----------  BEGIN_GRAPH  ----------\n";

    for (const auto& n : g.nodes) {
        std::string line = "L" + std::to_string(n.layer) + ": id=" + n.id;
        line += " | parent=" + (n.parent ? *n.parent : "-");
        line += " | type=" + (n.node_type.empty() ? "-" : n.node_type);
        line += " | size=" + to_text(n.size);

        if (n.align.empty()) {
            line += " | align=-";
        } else {
            line += " | align=";
            for (size_t i = 0; i < n.align.size(); ++i) {
                if (i) line += "; ";
                line += to_text(n.align[i], n.id);
            }
        }

        line += " | pos=" + (n.pos ? to_text(*n.pos) : "-");
        line += " | connect=" + (n.connect ? to_text(*n.connect) : "-");
        line += " | orientation=" + (n.orientation ? to_text(*n.orientation) : "-");
        line += " | rotation=" + (n.rotation ? to_text(*n.rotation) : "-");
        line += " | mat=" + (n.material ? *n.material : "-");
        line += " | create_method=" + std::string(create_method_name(n.method));

        if (n.assembly_order) {
            line += " | assembly_order=[";
            for (size_t i = 0; i < n.assembly_order->size(); ++i) {
                if (i) line += ", ";
                line += "[" + join_ids((*n.assembly_order)[i]) + "]";
            }
            line += "]";
        } else {
            line += " | assembly_order=-";
        }

        line += " | constraint=" + (n.constraint ? *n.constraint : "-");
        line += " | after=" + (n.after.empty() ? "-" : "[" + join_ids(n.after) + "]");
        line += " | depends_on=" +
                (n.depends_on.empty() ? "-" : "[" + join_ids(n.depends_on) + "]");
        line += " | tool_id=" + (n.tool_id ? *n.tool_id : "-");
        line += " | target_id=" + (n.target_id ? *n.target_id : "-");
        line += " | pattern=" + (n.pattern ? to_text(*n.pattern) : "-");

        out += line + "\n";
    }

    out += "# ----------  END_GRAPH  ----------\n";
    return out;
}

} // namespace dgc
