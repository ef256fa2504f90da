#include "dgc/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace dgc {
namespace {

// ---------------------------------------------------------------------------
// Small lexical helpers
// ---------------------------------------------------------------------------

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool ieq(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

bool starts_with_ci(std::string_view s, std::string_view prefix) {
    return s.size() >= prefix.size() && ieq(s.substr(0, prefix.size()), prefix);
}

bool is_ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

/// Identifier with an optional pattern-instance suffix: `leg`, `leg[3]`.
bool is_valid_id(std::string_view s) {
    if (s.empty() || !is_ident_start(s[0])) return false;
    size_t i = 1;
    while (i < s.size() && is_ident_char(s[i])) ++i;
    if (i == s.size()) return true;
    if (s[i] != '[') return false;
    size_t j = i + 1;
    if (j == s.size()) return false;
    while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
    return j > i + 1 && j + 1 == s.size() && s[j] == ']';
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_int(std::string_view s, int& out) {
    s = trim(s);
    if (s.empty()) return false;
    auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size();
}

/// Splits on `sep` at paren/bracket depth zero.
std::vector<std::string_view> split_top(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    int depth = 0;
    size_t start = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '(' || c == '[') ++depth;
        else if (c == ')' || c == ']') --depth;
        else if (c == sep && depth == 0) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    out.push_back(s.substr(start));
    return out;
}

/// `name(args)` -> args, or nullopt when the shape does not match.
std::optional<std::string_view> call_args(std::string_view s, std::string_view name) {
    s = trim(s);
    if (!starts_with_ci(s, name)) return std::nullopt;
    std::string_view rest = trim(s.substr(name.size()));
    if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')') return std::nullopt;
    return rest.substr(1, rest.size() - 2);
}

bool parse_number_list(std::string_view args, std::vector<double>& out) {
    out.clear();
    for (auto part : split_top(args, ',')) {
        double v;
        if (!parse_double(part, v)) return false;
        out.push_back(v);
    }
    return true;
}

// ---------------------------------------------------------------------------
// Diagnostics sink with a position cursor
// ---------------------------------------------------------------------------

struct diag_sink {
    std::vector<diagnostic>& diags;
    int line = 0;
    int column = 0;

    void error(diag_code code, std::string message) {
        diags.push_back({code, std::move(message), line, column});
    }
};

// ---------------------------------------------------------------------------
// Feature names
// ---------------------------------------------------------------------------

std::optional<feature> lookup_feature(std::string_view s) {
    s = trim(s);
    // `<name>_face` and signed-axis forms are aliases of the plain face names
    if (s.size() > 5 && ieq(s.substr(s.size() - 5), "_face")) {
        std::string_view stem = s.substr(0, s.size() - 5);
        if (ieq(stem, "left") || ieq(stem, "-X")) return feature::left;
        if (ieq(stem, "right") || ieq(stem, "+X")) return feature::right;
        if (ieq(stem, "front") || ieq(stem, "+Y")) return feature::front;
        if (ieq(stem, "back") || ieq(stem, "-Y")) return feature::back;
        if (ieq(stem, "top") || ieq(stem, "+Z")) return feature::top;
        if (ieq(stem, "bottom") || ieq(stem, "-Z")) return feature::bottom;
        return std::nullopt;
    }
    if (ieq(s, "left")) return feature::left;
    if (ieq(s, "right")) return feature::right;
    if (ieq(s, "front")) return feature::front;
    if (ieq(s, "back")) return feature::back;
    if (ieq(s, "top")) return feature::top;
    if (ieq(s, "bottom")) return feature::bottom;
    if (ieq(s, "center") || ieq(s, "centre")) return feature::center;
    return std::nullopt;
}

std::optional<axis_dir> lookup_axis_dir(std::string_view s) {
    s = trim(s);
    if (s.size() != 2 || (s[0] != '+' && s[0] != '-')) return std::nullopt;
    bool neg = s[0] == '-';
    switch (std::toupper(static_cast<unsigned char>(s[1]))) {
        case 'X': return neg ? axis_dir::neg_x : axis_dir::pos_x;
        case 'Y': return neg ? axis_dir::neg_y : axis_dir::pos_y;
        case 'Z': return neg ? axis_dir::neg_z : axis_dir::pos_z;
        default: return std::nullopt;
    }
}

/// `B`, `B.feature`, `B[3].feature`, `B[*].feature`.
std::optional<feature_ref> parse_feature_ref(std::string_view s, diag_sink& sink) {
    s = trim(s);
    feature_ref out;
    size_t dot = s.rfind('.');
    std::string_view node_part = dot == std::string_view::npos ? s : s.substr(0, dot);
    node_part = trim(node_part);

    // instance selector
    if (node_part.size() > 2 && node_part.back() == ']') {
        size_t lb = node_part.rfind('[');
        if (lb == std::string_view::npos) {
            sink.error(diag_code::syntax_error, "malformed instance selector in feature reference");
            return std::nullopt;
        }
        std::string_view inside = node_part.substr(lb + 1, node_part.size() - lb - 2);
        if (trim(inside) == "*") {
            out.all_instances = true;
            node_part = node_part.substr(0, lb);
        } else {
            int k;
            if (!parse_int(inside, k) || k < 0) {
                sink.error(diag_code::syntax_error, "instance index must be a nonnegative integer");
                return std::nullopt;
            }
            out.index = k;
            node_part = node_part.substr(0, lb);
        }
    }

    if (!is_valid_id(node_part)) {
        sink.error(diag_code::syntax_error,
                   "expected node identifier, got '" + std::string(node_part) + "'");
        return std::nullopt;
    }
    out.node_id = std::string(node_part);

    if (dot == std::string_view::npos) {
        out.feat = feature::center;
    } else {
        auto f = lookup_feature(s.substr(dot + 1));
        if (!f) {
            sink.error(diag_code::unknown_feature_name,
                       "unknown feature '" + std::string(trim(s.substr(dot + 1))) + "'");
            return std::nullopt;
        }
        out.feat = *f;
    }
    return out;
}

std::optional<target_ref> parse_target_ref(std::string_view s, diag_sink& sink) {
    s = trim(s);
    if (starts_with_ci(s, "Avg")) {
        auto args = call_args(s, "Avg");
        if (!args) {
            sink.error(diag_code::syntax_error, "malformed Avg(...) target");
            return std::nullopt;
        }
        target_ref out;
        out.k = target_ref::kind::average;
        for (auto item : split_top(*args, ',')) {
            auto fr = parse_feature_ref(item, sink);
            if (!fr) return std::nullopt;
            out.avg.push_back(*fr);
        }
        if (out.avg.empty()) {
            sink.error(diag_code::syntax_error, "Avg(...) needs at least one feature");
            return std::nullopt;
        }
        return out;
    }
    auto fr = parse_feature_ref(s, sink);
    if (!fr) return std::nullopt;
    target_ref out;
    out.k = target_ref::kind::single;
    out.ref = *fr;
    return out;
}

// ---------------------------------------------------------------------------
// Placement productions
// ---------------------------------------------------------------------------

std::optional<align_spec> parse_align_one(std::string_view s, diag_sink& sink) {
    s = trim(s);
    if (!starts_with_ci(s, "Align")) {
        sink.error(diag_code::syntax_error, "expected 'Align' clause");
        return std::nullopt;
    }
    s = trim(s.substr(5));

    align_spec out;
    if (!s.empty() && s.front() == '(') {
        size_t close = s.find(')');
        if (close == std::string_view::npos) {
            sink.error(diag_code::syntax_error, "unterminated axis list in Align(");
            return std::nullopt;
        }
        std::string_view axes = s.substr(1, close - 1);
        bool saw = false;
        axis_mask m{false, false, false};
        for (char c : axes) {
            switch (std::toupper(static_cast<unsigned char>(c))) {
                case 'X': m.x = true; saw = true; break;
                case 'Y': m.y = true; saw = true; break;
                case 'Z': m.z = true; saw = true; break;
                case ' ': case ',': break;
                default:
                    sink.error(diag_code::syntax_error, "bad axis letter in Align(...)");
                    return std::nullopt;
            }
        }
        // empty axis list normalizes to all three
        out.axes = saw ? m : axis_mask{};
        s = trim(s.substr(close + 1));
    }

    size_t to_pos = std::string_view::npos;
    for (size_t i = 0; i + 4 <= s.size(); ++i) {
        if (ieq(s.substr(i, 4), " to ")) {
            to_pos = i;
            break;
        }
    }
    if (to_pos == std::string_view::npos) {
        sink.error(diag_code::syntax_error, "Align clause is missing ' to '");
        return std::nullopt;
    }

    std::string_view lhs = trim(s.substr(0, to_pos));
    // lhs may be `id.feature` or a bare feature; the id is cosmetic here
    size_t dot = lhs.rfind('.');
    std::string_view feat_text = dot == std::string_view::npos ? lhs : lhs.substr(dot + 1);
    auto f = lookup_feature(feat_text);
    if (!f) {
        sink.error(diag_code::unknown_feature_name,
                   "unknown feature '" + std::string(trim(feat_text)) + "' in Align");
        return std::nullopt;
    }
    out.this_feature = *f;

    auto tgt = parse_target_ref(s.substr(to_pos + 4), sink);
    if (!tgt) return std::nullopt;
    out.target = *tgt;
    return out;
}

std::optional<offset_spec> parse_offset(std::string_view args, diag_sink& sink) {
    std::vector<double> v;
    if (!parse_number_list(args, v) || v.size() != 3) {
        sink.error(diag_code::syntax_error, "offset needs three numeric components");
        return std::nullopt;
    }
    return offset_spec{v[0], v[1], v[2]};
}

/// `polar(theta; dr=R)` -- also tolerates `,` and a bare second number.
std::optional<polar_spec> parse_polar_pos(std::string_view args, diag_sink& sink) {
    std::vector<std::string_view> parts = split_top(args, ';');
    if (parts.size() == 1) parts = split_top(args, ',');
    if (parts.size() != 2) {
        sink.error(diag_code::syntax_error, "polar placement needs theta and dr");
        return std::nullopt;
    }
    polar_spec out;
    std::string_view theta = trim(parts[0]);
    if (starts_with_ci(theta, "theta:")) theta = trim(theta.substr(6));
    if (!parse_double(theta, out.theta_deg)) {
        sink.error(diag_code::syntax_error, "bad polar angle");
        return std::nullopt;
    }
    std::string_view dr = trim(parts[1]);
    if (starts_with_ci(dr, "dr=")) dr = trim(dr.substr(3));
    else if (starts_with_ci(dr, "dr:")) dr = trim(dr.substr(3));
    if (!parse_double(dr, out.dr)) {
        sink.error(diag_code::syntax_error, "bad polar radius");
        return std::nullopt;
    }
    return out;
}

std::optional<connect_spec> parse_connect(std::string_view s, diag_sink& sink) {
    auto parts = split_top(s, '+');
    if (parts.size() != 2) {
        sink.error(diag_code::syntax_error, "connect needs 'A.feature + B.feature'");
        return std::nullopt;
    }
    auto a = parse_feature_ref(parts[0], sink);
    if (!a) return std::nullopt;
    auto b = parse_feature_ref(parts[1], sink);
    if (!b) return std::nullopt;
    return connect_spec{*a, *b};
}

std::optional<orientation_directive> parse_orientation(std::string_view s, diag_sink& sink) {
    s = trim(s);
    size_t colon = s.find(':');
    if (colon == std::string_view::npos) {
        sink.error(diag_code::unknown_directive, "orientation directive needs 'head:body'");
        return std::nullopt;
    }
    std::string_view head = trim(s.substr(0, colon));
    std::string_view body = trim(s.substr(colon + 1));
    orientation_directive out;

    if (ieq(head, "axis")) {
        if (auto d = lookup_axis_dir(body)) {
            out.k = orientation_directive::kind::fixed_axis;
            out.axis = *d;
            return out;
        }
        if (starts_with_ci(body, "radial_from")) {
            std::string_view ref = trim(body.substr(11));
            if (!ref.empty() && ref.front() == ':') ref = trim(ref.substr(1));
            if (!is_valid_id(ref)) {
                sink.error(diag_code::syntax_error, "radial_from needs a node id");
                return std::nullopt;
            }
            out.k = orientation_directive::kind::radial_from;
            out.ref_id = std::string(ref);
            return out;
        }
        if (starts_with_ci(body, "tangent_to")) {
            std::string_view ref = trim(body.substr(10));
            if (!ref.empty() && ref.front() == ':') ref = trim(ref.substr(1));
            if (!is_valid_id(ref)) {
                sink.error(diag_code::syntax_error, "tangent_to needs a node id");
                return std::nullopt;
            }
            out.k = orientation_directive::kind::tangent_to;
            out.ref_id = std::string(ref);
            return out;
        }
        sink.error(diag_code::unknown_directive,
                   "unknown axis directive '" + std::string(body) + "'");
        return std::nullopt;
    }

    if (ieq(head, "normal")) {
        if (!is_valid_id(body)) {
            sink.error(diag_code::syntax_error, "normal: needs a node id");
            return std::nullopt;
        }
        out.k = orientation_directive::kind::normal_to;
        out.ref_id = std::string(body);
        return out;
    }

    // `<±A>_face:normal_to <obj>` / `<±A>_face:align <obj>.<±A>_face`
    if (head.size() > 5 && ieq(head.substr(head.size() - 5), "_face")) {
        auto face = lookup_axis_dir(head.substr(0, head.size() - 5));
        if (!face) {
            sink.error(diag_code::unknown_directive,
                       "unknown face '" + std::string(head) + "' in orientation");
            return std::nullopt;
        }
        if (starts_with_ci(body, "normal_to")) {
            std::string_view ref = trim(body.substr(9));
            if (!is_valid_id(ref)) {
                sink.error(diag_code::syntax_error, "normal_to needs a node id");
                return std::nullopt;
            }
            out.k = orientation_directive::kind::face_normal;
            out.axis = *face;
            out.ref_id = std::string(ref);
            return out;
        }
        if (starts_with_ci(body, "align")) {
            std::string_view rest = trim(body.substr(5));
            size_t dot = rest.rfind('.');
            if (dot == std::string_view::npos) {
                sink.error(diag_code::syntax_error, "face align needs '<obj>.<face>'");
                return std::nullopt;
            }
            std::string_view ref = trim(rest.substr(0, dot));
            std::string_view face_txt = trim(rest.substr(dot + 1));
            std::optional<axis_dir> ref_face;
            if (face_txt.size() > 5 && ieq(face_txt.substr(face_txt.size() - 5), "_face"))
                ref_face = lookup_axis_dir(face_txt.substr(0, face_txt.size() - 5));
            if (!is_valid_id(ref) || !ref_face) {
                sink.error(diag_code::syntax_error, "face align needs '<obj>.<±A>_face'");
                return std::nullopt;
            }
            out.k = orientation_directive::kind::face_align;
            out.axis = *face;
            out.ref_id = std::string(ref);
            out.ref_face = *ref_face;
            return out;
        }
        sink.error(diag_code::unknown_directive,
                   "unknown face directive '" + std::string(body) + "'");
        return std::nullopt;
    }

    sink.error(diag_code::unknown_directive, "unknown orientation directive '" + std::string(s) + "'");
    return std::nullopt;
}

std::optional<double> named_param(std::string_view part, std::string_view name, diag_sink& sink) {
    part = trim(part);
    if (!starts_with_ci(part, name)) return std::nullopt;
    std::string_view rest = trim(part.substr(name.size()));
    if (rest.empty() || rest.front() != ':') return std::nullopt;
    double v;
    if (!parse_double(rest.substr(1), v)) {
        sink.error(diag_code::syntax_error, "bad numeric value for '" + std::string(name) + "'");
        return std::nullopt;
    }
    return v;
}

std::optional<pattern_spec> parse_pattern(std::string_view s, diag_sink& sink) {
    s = trim(s);
    if (auto args = call_args(s, "grid")) {
        grid_pattern g;
        bool rows = false, cols = false, xs = false, ys = false, off = false;
        for (auto part : split_top(*args, ',')) {
            part = trim(part);
            if (auto v = named_param(part, "rows", sink)) { g.rows = static_cast<int>(*v); rows = true; }
            else if (auto v2 = named_param(part, "cols", sink)) { g.cols = static_cast<int>(*v2); cols = true; }
            else if (auto v3 = named_param(part, "x_spacing", sink)) { g.x_spacing = *v3; xs = true; }
            else if (auto v4 = named_param(part, "y_spacing", sink)) { g.y_spacing = *v4; ys = true; }
            else if (starts_with_ci(part, "start_offset")) {
                std::string_view rest = trim(part.substr(12));
                if (rest.size() < 3 || rest.front() != ':' ) {
                    sink.error(diag_code::syntax_error, "start_offset needs ':(x0,y0)'");
                    return std::nullopt;
                }
                rest = trim(rest.substr(1));
                if (rest.size() < 2 || rest.front() != '(' || rest.back() != ')') {
                    sink.error(diag_code::syntax_error, "start_offset needs '(x0,y0)'");
                    return std::nullopt;
                }
                std::vector<double> v;
                if (!parse_number_list(rest.substr(1, rest.size() - 2), v) || v.size() != 2) {
                    sink.error(diag_code::syntax_error, "start_offset needs two numbers");
                    return std::nullopt;
                }
                g.x0 = v[0];
                g.y0 = v[1];
                off = true;
            } else {
                sink.error(diag_code::syntax_error,
                           "unknown grid parameter '" + std::string(part) + "'");
                return std::nullopt;
            }
        }
        if (!(rows && cols && xs && ys && off)) {
            sink.error(diag_code::syntax_error,
                       "grid pattern needs rows, cols, x_spacing, y_spacing, start_offset");
            return std::nullopt;
        }
        return pattern_spec{g};
    }
    if (auto args = call_args(s, "polar")) {
        polar_pattern p;
        bool cnt = false, rad = false, sa = false, step = false;
        for (auto part : split_top(*args, ',')) {
            if (auto v = named_param(part, "count", sink)) { p.count = static_cast<int>(*v); cnt = true; }
            else if (auto v2 = named_param(part, "radius", sink)) { p.radius = *v2; rad = true; }
            else if (auto v3 = named_param(part, "start_angle", sink)) { p.start_angle_deg = *v3; sa = true; }
            else if (auto v4 = named_param(part, "angle_step", sink)) { p.angle_step_deg = *v4; step = true; }
            else {
                sink.error(diag_code::syntax_error,
                           "unknown polar parameter '" + std::string(trim(part)) + "'");
                return std::nullopt;
            }
        }
        if (!(cnt && rad && sa && step)) {
            sink.error(diag_code::syntax_error,
                       "polar pattern needs count, radius, start_angle, angle_step");
            return std::nullopt;
        }
        return pattern_spec{p};
    }
    sink.error(diag_code::syntax_error, "pattern must be grid(...) or polar(...)");
    return std::nullopt;
}

std::optional<size_spec> parse_size(std::string_view s, diag_sink& sink) {
    s = trim(s);
    if (ieq(s, "AUTO")) return size_spec::make_auto();

    auto dims = [&](std::string_view args, size_t n) -> std::optional<std::vector<double>> {
        std::vector<double> v;
        if (!parse_number_list(args, v) || v.size() != n) {
            sink.error(diag_code::syntax_error, "wrong arity in size spec");
            return std::nullopt;
        }
        return v;
    };

    if (auto a = call_args(s, "box")) {
        auto v = dims(*a, 3);
        if (!v) return std::nullopt;
        return size_spec{size_spec::kind::box, (*v)[0], (*v)[1], (*v)[2]};
    }
    for (auto [name, kind] : {std::pair{"cylinder", size_spec::kind::cylinder},
                              std::pair{"cyl", size_spec::kind::cylinder},
                              std::pair{"cone", size_spec::kind::cone},
                              std::pair{"disc", size_spec::kind::disc}}) {
        if (auto a = call_args(s, name)) {
            auto v = dims(*a, 2);
            if (!v) return std::nullopt;
            return size_spec{kind, (*v)[0], (*v)[1], 0};
        }
    }
    for (auto [name, kind] : {std::pair{"sphere", size_spec::kind::sphere},
                              std::pair{"hemisphere", size_spec::kind::hemisphere}}) {
        if (auto a = call_args(s, name)) {
            auto v = dims(*a, 1);
            if (!v) return std::nullopt;
            return size_spec{kind, (*v)[0], 0, 0};
        }
    }
    // bare tuple is box shorthand
    if (!s.empty() && s.front() == '(' && s.back() == ')') {
        auto v = dims(s.substr(1, s.size() - 2), 3);
        if (!v) return std::nullopt;
        return size_spec{size_spec::kind::box, (*v)[0], (*v)[1], (*v)[2]};
    }
    sink.error(diag_code::syntax_error, "unrecognized size spec '" + std::string(s) + "'");
    return std::nullopt;
}

std::optional<std::vector<std::string>> parse_id_list(std::string_view s, diag_sink& sink) {
    s = trim(s);
    if (!s.empty() && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
    std::vector<std::string> out;
    for (auto part : split_top(s, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        if (!is_valid_id(part)) {
            sink.error(diag_code::syntax_error, "bad identifier '" + std::string(part) + "'");
            return std::nullopt;
        }
        out.emplace_back(part);
    }
    return out;
}

std::optional<std::vector<std::vector<std::string>>> parse_groups(std::string_view s,
                                                                  diag_sink& sink) {
    s = trim(s);
    // accept both `[[a],[b,c]]` and `[a],[b,c]`
    if (s.size() >= 4 && s.front() == '[' && s[1] == '[' && s.back() == ']')
        s = trim(s.substr(1, s.size() - 2));
    std::vector<std::vector<std::string>> out;
    for (auto part : split_top(s, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        if (part.front() != '[' || part.back() != ']') {
            sink.error(diag_code::syntax_error, "assembly_order groups must be bracketed");
            return std::nullopt;
        }
        auto ids = parse_id_list(part, sink);
        if (!ids) return std::nullopt;
        if (ids->empty()) {
            sink.error(diag_code::syntax_error, "empty assembly_order group");
            return std::nullopt;
        }
        out.push_back(std::move(*ids));
    }
    return out;
}

std::optional<rotation_spec> parse_rotation(std::string_view s, diag_sink& sink) {
    s = trim(s);
    size_t colon = s.find(':');
    if (colon == std::string_view::npos || colon == 0) {
        sink.error(diag_code::syntax_error, "rotation needs '<axis>:<degrees>'");
        return std::nullopt;
    }
    std::string_view axis = trim(s.substr(0, colon));
    rotation_spec out;
    if (axis.size() != 1) {
        sink.error(diag_code::syntax_error, "rotation axis must be X, Y or Z");
        return std::nullopt;
    }
    out.axis = static_cast<char>(std::toupper(static_cast<unsigned char>(axis[0])));
    if (out.axis != 'X' && out.axis != 'Y' && out.axis != 'Z') {
        sink.error(diag_code::syntax_error, "rotation axis must be X, Y or Z");
        return std::nullopt;
    }
    if (!parse_double(s.substr(colon + 1), out.angle_deg)) {
        sink.error(diag_code::syntax_error, "bad rotation angle");
        return std::nullopt;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Record assembly
// ---------------------------------------------------------------------------

bool is_absent(std::string_view v) { return trim(v) == "-"; }

struct record_builder {
    node_record rec;
    std::vector<std::string> seen_keys;
    bool saw_id = false;

    bool key_seen(std::string_view key) const {
        return std::find(seen_keys.begin(), seen_keys.end(), key) != seen_keys.end();
    }

    // returns false when the key is unknown
    bool apply(std::string_view key, std::string_view value, diag_sink& sink) {
        if (key_seen(key)) {
            sink.error(diag_code::syntax_error,
                       "key '" + std::string(key) + "' appears more than once in this record");
            return true;
        }
        seen_keys.emplace_back(key);
        value = trim(value);

        if (key == "id") {
            if (!is_valid_id(value)) {
                sink.error(diag_code::syntax_error, "bad node id '" + std::string(value) + "'");
                return true;
            }
            rec.id = std::string(value);
            saw_id = true;
        } else if (key == "parent") {
            if (!is_absent(value)) {
                if (!is_valid_id(value)) {
                    sink.error(diag_code::syntax_error, "bad parent id");
                    return true;
                }
                rec.parent = std::string(value);
            }
        } else if (key == "type") {
            if (!is_absent(value)) rec.node_type = std::string(value);
        } else if (key == "size") {
            if (!is_absent(value)) {
                if (auto sz = parse_size(value, sink)) rec.size = *sz;
            }
        } else if (key == "align") {
            if (!is_absent(value)) {
                for (auto clause : split_top(value, ';')) {
                    if (trim(clause).empty()) continue;
                    if (auto a = parse_align_one(clause, sink)) rec.align.push_back(*a);
                }
            }
        } else if (key == "pos") {
            if (!is_absent(value)) {
                if (auto args = call_args(value, "offset")) {
                    if (auto o = parse_offset(*args, sink)) rec.pos = *o;
                } else if (auto args2 = call_args(value, "polar")) {
                    if (auto p = parse_polar_pos(*args2, sink)) rec.pos = *p;
                } else if (!value.empty() && value.front() == '(' && value.back() == ')') {
                    if (auto o = parse_offset(value.substr(1, value.size() - 2), sink))
                        rec.pos = *o;
                } else {
                    sink.error(diag_code::syntax_error,
                               "pos must be offset(...), polar(...) or a bare tuple");
                }
            }
        } else if (key == "connect") {
            if (!is_absent(value)) {
                if (auto c = parse_connect(value, sink)) rec.connect = *c;
            }
        } else if (key == "orientation") {
            if (!is_absent(value)) {
                if (auto o = parse_orientation(value, sink)) rec.orientation = *o;
            }
        } else if (key == "rotation") {
            if (!is_absent(value)) {
                if (auto r = parse_rotation(value, sink)) rec.rotation = *r;
            }
        } else if (key == "mat") {
            if (!is_absent(value)) {
                if (!is_valid_id(value)) {
                    sink.error(diag_code::syntax_error, "bad material name");
                    return true;
                }
                rec.material = std::string(value);
            }
        } else if (key == "create_method") {
            if (ieq(value, "primitive")) rec.method = create_method::primitive;
            else if (ieq(value, "boolean_subtract")) rec.method = create_method::boolean_subtract;
            else if (ieq(value, "boolean_union")) rec.method = create_method::boolean_union;
            else if (ieq(value, "group")) rec.method = create_method::group;
            else if (ieq(value, "extrude_from_sketch")) rec.method = create_method::extrude_from_sketch;
            else if (ieq(value, "auto_connect")) rec.method = create_method::auto_connect;
            else
                sink.error(diag_code::syntax_error,
                           "unknown create_method '" + std::string(value) + "'");
        } else if (key == "assembly_order") {
            if (!is_absent(value)) {
                if (auto g = parse_groups(value, sink)) rec.assembly_order = std::move(*g);
            }
        } else if (key == "constraint") {
            if (!is_absent(value)) rec.constraint = std::string(value);
        } else if (key == "after") {
            if (!is_absent(value)) {
                if (auto ids = parse_id_list(value, sink)) rec.after = std::move(*ids);
            }
        } else if (key == "depends_on") {
            if (!is_absent(value)) {
                if (auto ids = parse_id_list(value, sink)) rec.depends_on = std::move(*ids);
            }
        } else if (key == "tool_id") {
            if (!is_absent(value)) rec.tool_id = std::string(value);
        } else if (key == "target_id") {
            if (!is_absent(value)) rec.target_id = std::string(value);
        } else if (key == "pattern") {
            if (!is_absent(value)) {
                if (auto p = parse_pattern(value, sink)) rec.pattern = *p;
            }
        } else {
            return false;
        }
        return true;
    }
};

struct line_ref {
    std::string_view text;
    int number; // 1-based
};

std::vector<line_ref> split_lines(std::string_view text) {
    std::vector<line_ref> out;
    int n = 1;
    size_t start = 0;
    for (size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == '\n') {
            std::string_view line = text.substr(start, i - start);
            if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
            out.push_back({line, n++});
            start = i + 1;
        }
    }
    return out;
}

bool is_comment_or_blank(std::string_view line) {
    auto t = trim(line);
    return t.empty() || t.front() == '#';
}

/// `L<k>:` prefix; returns the layer and the remainder, or nullopt.
std::optional<std::pair<int, std::string_view>> match_record_start(std::string_view line) {
    auto t = trim(line);
    if (t.size() < 3 || (t[0] != 'L' && t[0] != 'l')) return std::nullopt;
    size_t i = 1;
    while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
    if (i == 1 || i >= t.size() || t[i] != ':') return std::nullopt;
    int layer;
    if (!parse_int(t.substr(1, i - 1), layer)) return std::nullopt;
    return std::make_pair(layer, t.substr(i + 1));
}

} // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

materials_result parse_materials(std::string_view region, int first_line) {
    materials_result out;
    diag_sink sink{out.diagnostics};

    for (auto [line, offset] : [&] {
             std::vector<std::pair<std::string_view, int>> lines;
             int k = 0;
             for (auto& lr : split_lines(region)) lines.push_back({lr.text, k++});
             return lines;
         }()) {
        sink.line = first_line + offset;
        sink.column = 1;
        if (is_comment_or_blank(line)) continue;

        auto parts = split_top(line, '|');
        if (parts.size() != 2) {
            sink.error(diag_code::syntax_error,
                       "material line must be '<name> | diffuse_color=(R,G,B,A)'");
            continue;
        }
        std::string_view name = trim(parts[0]);
        if (!is_valid_id(name)) {
            sink.error(diag_code::syntax_error, "bad material name '" + std::string(name) + "'");
            continue;
        }
        std::string_view rhs = trim(parts[1]);
        sink.column = static_cast<int>(parts[0].size()) + 2;
        if (!starts_with_ci(rhs, "diffuse_color")) {
            sink.error(diag_code::syntax_error, "expected diffuse_color=(R,G,B,A)");
            continue;
        }
        rhs = trim(rhs.substr(13));
        if (rhs.empty() || rhs.front() != '=') {
            sink.error(diag_code::syntax_error, "expected '=' after diffuse_color");
            continue;
        }
        rhs = trim(rhs.substr(1));
        if (rhs.size() < 2 || rhs.front() != '(' || rhs.back() != ')') {
            sink.error(diag_code::malformed_rgba, "diffuse_color needs a parenthesized tuple");
            continue;
        }
        std::vector<double> ch;
        if (!parse_number_list(rhs.substr(1, rhs.size() - 2), ch) || ch.size() != 4) {
            sink.error(diag_code::malformed_rgba, "diffuse_color needs exactly four channels");
            continue;
        }
        bool in_range = true;
        for (double c : ch)
            if (c < 0.0 || c > 1.0) in_range = false;
        if (!in_range) {
            sink.error(diag_code::malformed_rgba, "diffuse_color channels must lie in [0,1]");
            continue;
        }

        material_def def;
        def.name = std::string(name);
        def.rgba = {ch[0], ch[1], ch[2], ch[3]};
        bool dup = false;
        for (auto& m : out.materials)
            if (m.name == def.name) dup = true;
        if (dup) {
            sink.column = 1;
            sink.error(diag_code::duplicate_material_name,
                       "material '" + def.name + "' defined twice");
            continue;
        }
        out.materials.push_back(std::move(def));
    }
    return out;
}

parse_result parse_graph(std::string_view text) {
    parse_result out;
    diag_sink sink{out.diagnostics};
    graph_ast ast;

    auto lines = split_lines(text);

    // material block (optional)
    int mat_begin = -1, mat_end = -1;
    for (auto& lr : lines) {
        if (mat_begin < 0 && lr.text.find("MATERIAL LIBRARY") != std::string_view::npos)
            mat_begin = lr.number;
        else if (mat_begin >= 0 && trim(lr.text) == "#END_MATERIALS") {
            mat_end = lr.number;
            break;
        }
    }
    if (mat_begin >= 0 && mat_end < 0) {
        sink.line = mat_begin;
        sink.column = 1;
        sink.error(diag_code::unterminated_block, "material library is missing #END_MATERIALS");
        return out;
    }
    if (mat_begin >= 0) {
        size_t region_start = 0, region_end = 0;
        {
            // recover byte offsets for the region between the markers
            std::vector<size_t> starts;
            size_t pos = 0;
            for (auto& lr : lines) {
                starts.push_back(pos);
                pos += lr.text.size() + 1;
                (void)lr;
            }
            region_start = starts[static_cast<size_t>(mat_begin)]; // line after header
            region_end = starts[static_cast<size_t>(mat_end - 1)];
        }
        auto mats = parse_materials(
            text.substr(region_start, region_end > region_start ? region_end - region_start : 0),
            mat_begin + 1);
        for (auto& d : mats.diagnostics) out.diagnostics.push_back(d);
        ast.materials = std::move(mats.materials);
    }

    // graph block
    int graph_begin = -1, graph_end = -1;
    for (auto& lr : lines) {
        if (graph_begin < 0 && lr.text.find("BEGIN_GRAPH") != std::string_view::npos)
            graph_begin = lr.number;
        else if (graph_begin >= 0 && lr.text.find("END_GRAPH") != std::string_view::npos) {
            graph_end = lr.number;
            break;
        }
    }
    if (graph_begin < 0) {
        sink.line = 1;
        sink.column = 1;
        sink.error(diag_code::syntax_error, "no BEGIN_GRAPH block found");
        return out;
    }
    if (graph_end < 0) {
        sink.line = graph_begin;
        sink.column = 1;
        sink.error(diag_code::unterminated_block, "graph block is missing END_GRAPH");
        return out;
    }

    record_builder* current = nullptr;
    std::vector<std::pair<record_builder, int>> builders; // builder + first line

    auto parse_fields = [&](std::string_view fields, int line_no, int col0) {
        size_t cursor = 0;
        for (auto seg : split_top(fields, '|')) {
            size_t seg_off = cursor;
            cursor += seg.size() + 1;
            auto kv = trim(seg);
            if (kv.empty()) continue;
            sink.line = line_no;
            sink.column = col0 + static_cast<int>(seg_off);
            size_t eq = kv.find('=');
            if (eq == std::string_view::npos) {
                sink.error(diag_code::syntax_error,
                           "expected key=value, got '" + std::string(kv) + "'");
                continue;
            }
            std::string_view key = trim(kv.substr(0, eq));
            std::string_view value = kv.substr(eq + 1);
            if (!current->apply(key, value, sink))
                sink.error(diag_code::unknown_key, "unknown key '" + std::string(key) + "'");
        }
    };

    for (auto& lr : lines) {
        if (lr.number <= graph_begin || lr.number >= graph_end) continue;
        if (is_comment_or_blank(lr.text)) continue;

        if (auto start = match_record_start(lr.text)) {
            builders.emplace_back(record_builder{}, lr.number);
            current = &builders.back().first;
            current->rec.layer = start->first;
            current->rec.span.first_line = lr.number;
            current->rec.span.last_line = lr.number;
            parse_fields(start->second, lr.number,
                         static_cast<int>(lr.text.size() - start->second.size()) + 1);
        } else if (current) {
            // continuation line of the open record
            std::string_view t = trim(lr.text);
            if (!t.empty() && t.front() == '|') t.remove_prefix(1);
            current->rec.span.last_line = lr.number;
            parse_fields(t, lr.number, static_cast<int>(lr.text.size() - t.size()) + 1);
        } else {
            sink.line = lr.number;
            sink.column = 1;
            sink.error(diag_code::syntax_error, "expected a record starting with 'L<k>:'");
        }
    }

    for (auto& [b, first_line] : builders) {
        sink.line = first_line;
        sink.column = 1;
        if (!b.saw_id) {
            sink.error(diag_code::missing_id_field, "record has no id field");
            continue;
        }
        bool dup = false;
        for (auto& n : ast.nodes)
            if (n.id == b.rec.id) dup = true;
        if (dup) {
            sink.error(diag_code::duplicate_node_id, "node id '" + b.rec.id + "' defined twice");
            continue;
        }
        ast.nodes.push_back(std::move(b.rec));
    }

    out.ast = std::move(ast);
    return out;
}

placement_result parse_placement(std::string_view text) {
    placement_result out;
    diag_sink sink{out.diagnostics};
    sink.line = 1;
    sink.column = 1;

    std::string_view s = trim(text);
    // a leading `key=` from the record grammar is tolerated
    for (std::string_view prefix : {"align=", "pos=", "connect=", "orientation=", "pattern="}) {
        if (starts_with_ci(s, prefix)) {
            s = trim(s.substr(prefix.size()));
            break;
        }
    }
    // `connect = A.f + B.f` spells the key with spaces in the prompt grammar
    if (starts_with_ci(s, "connect ")) {
        auto rest = trim(s.substr(7));
        if (!rest.empty() && rest.front() == '=') s = trim(rest.substr(1));
    }

    if (starts_with_ci(s, "Align")) {
        if (auto a = parse_align_one(s, sink)) out.expr = *a;
        return out;
    }
    if (auto args = call_args(s, "offset")) {
        if (auto o = parse_offset(*args, sink)) out.expr = *o;
        return out;
    }
    if (auto args = call_args(s, "grid")) {
        (void)args;
        if (auto p = parse_pattern(s, sink)) out.expr = *p;
        return out;
    }
    if (auto args = call_args(s, "polar")) {
        // `polar(count: ...)` is the pattern form; `polar(theta; dr)` is positional
        if (args->find(':') != std::string_view::npos &&
            split_top(*args, ',').size() >= 3) {
            if (auto p = parse_pattern(s, sink)) out.expr = *p;
        } else {
            if (auto p = parse_polar_pos(*args, sink)) out.expr = *p;
        }
        return out;
    }
    if (s.find('+') != std::string_view::npos && s.find('.') != std::string_view::npos &&
        s.find(':') == std::string_view::npos) {
        if (auto c = parse_connect(s, sink)) out.expr = *c;
        return out;
    }
    if (s.find(':') != std::string_view::npos) {
        if (auto o = parse_orientation(s, sink)) out.expr = *o;
        return out;
    }
    sink.error(diag_code::syntax_error, "unrecognized placement expression");
    return out;
}

} // namespace dgc
