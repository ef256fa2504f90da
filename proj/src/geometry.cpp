#include "dgc/geometry.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace dgc {

namespace {

constexpr double kAngleTol = 1e-6; // identity / antiparallel branch tolerance

void require_positive(double v, const char* what) {
    if (!(v > 0.0))
        throw domain_error(diag_code::non_positive_dimension,
                           std::string(what) + " must be positive");
}

} // namespace

shape_kind shape_kind_of(const size_spec& s) {
    using k = size_spec::kind;
    switch (s.k) {
        case k::box: return shape_kind::cube;
        case k::cylinder: return shape_kind::cylinder;
        case k::cone: return shape_kind::cone;
        case k::disc: return shape_kind::disc;
        case k::sphere: return shape_kind::sphere;
        case k::hemisphere: return shape_kind::hemisphere;
        case k::auto_size: return shape_kind::empty;
    }
    return shape_kind::empty;
}

extent_box extent_of(const primitive_shape& shape) {
    const auto& d = shape.dims;
    switch (shape.kind) {
        case shape_kind::cube: {
            require_positive(d.a, "box lx");
            require_positive(d.b, "box ly");
            require_positive(d.c, "box lz");
            vec3 h{d.a / 2, d.b / 2, d.c / 2};
            return {-h, h};
        }
        case shape_kind::cylinder:
        case shape_kind::cone:
        case shape_kind::disc: {
            require_positive(d.a, "diameter");
            require_positive(d.b, "height");
            vec3 h{d.a / 2, d.a / 2, d.b / 2};
            return {-h, h};
        }
        case shape_kind::sphere: {
            require_positive(d.a, "diameter");
            vec3 h{d.a / 2, d.a / 2, d.a / 2};
            return {-h, h};
        }
        case shape_kind::hemisphere: {
            require_positive(d.a, "diameter");
            double r = d.a / 2;
            return {{-r, -r, 0}, {r, r, r}}; // flat face on Z=0, dome up
        }
        case shape_kind::empty: {
            if (d.k == size_spec::kind::box) {
                require_positive(d.a, "box lx");
                require_positive(d.b, "box ly");
                require_positive(d.c, "box lz");
                vec3 h{d.a / 2, d.b / 2, d.c / 2};
                return {-h, h};
            }
            return {};
        }
    }
    return {};
}

vec3 face_point_local(const extent_box& box, feature f) {
    vec3 c = box.center();
    switch (f) {
        case feature::left: return {box.lo.x(), c.y(), c.z()};
        case feature::right: return {box.hi.x(), c.y(), c.z()};
        case feature::back: return {c.x(), box.lo.y(), c.z()};
        case feature::front: return {c.x(), box.hi.y(), c.z()};
        case feature::bottom: return {c.x(), c.y(), box.lo.z()};
        case feature::top: return {c.x(), c.y(), box.hi.z()};
        case feature::center: return c;
    }
    return c;
}

vec3 face_normal_local(feature f) {
    switch (f) {
        case feature::left: return {-1, 0, 0};
        case feature::right: return {1, 0, 0};
        case feature::back: return {0, -1, 0};
        case feature::front: return {0, 1, 0};
        case feature::bottom: return {0, 0, -1};
        case feature::top: return {0, 0, 1};
        case feature::center:
            throw domain_error(diag_code::unknown_feature, "'center' has no face normal");
    }
    return {0, 0, 1};
}

vec3 face_center_world(const frame& fr, const extent_box& box, feature f) {
    return fr.apply(face_point_local(box, f));
}

vec3 axis_dir_vector(axis_dir d) {
    switch (d) {
        case axis_dir::pos_x: return {1, 0, 0};
        case axis_dir::neg_x: return {-1, 0, 0};
        case axis_dir::pos_y: return {0, 1, 0};
        case axis_dir::neg_y: return {0, -1, 0};
        case axis_dir::pos_z: return {0, 0, 1};
        case axis_dir::neg_z: return {0, 0, -1};
    }
    return {0, 0, 1};
}

quat rotation_aligning(const vec3& local_axis, const vec3& target) {
    if (std::abs(local_axis.norm() - 1.0) > 1e-6 || std::abs(target.norm() - 1.0) > 1e-6)
        throw domain_error(diag_code::non_unit_input, "rotation_aligning needs unit vectors");

    double dot = std::clamp(local_axis.dot(target), -1.0, 1.0);
    double angle = std::acos(dot);
    if (angle < kAngleTol) return quat::Identity();

    vec3 axis;
    if (std::abs(angle - M_PI) < kAngleTol) {
        if (std::abs(local_axis.x()) < 0.99)
            axis = vec3::UnitX().cross(local_axis).normalized();
        else
            axis = vec3::UnitY().cross(local_axis).normalized();
        return quat(Eigen::AngleAxisd(M_PI, axis));
    }
    axis = local_axis.cross(target).normalized();
    return quat(Eigen::AngleAxisd(angle, axis));
}

feature nearest_face(const oriented_box& ob, const vec3& query) {
    constexpr feature faces[] = {feature::left,  feature::right, feature::front,
                                 feature::back,  feature::top,   feature::bottom};
    feature best = feature::top;
    double best_d = std::numeric_limits<double>::infinity();
    for (feature f : faces) {
        double d = (face_center_world(ob.f, ob.box, f) - query).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = f;
        }
    }
    return best;
}

quat resolve_orientation(const orientation_directive& dir, const vec3& nominal_pos,
                         const box_lookup& lookup) {
    using k = orientation_directive::kind;

    auto ref = [&](const std::string& id) -> oriented_box {
        auto ob = lookup(id);
        if (!ob)
            throw domain_error(diag_code::unresolved_reference,
                               "orientation references unresolved node '" + id + "'");
        return *ob;
    };

    switch (dir.k) {
        case k::fixed_axis:
            return rotation_aligning(vec3::UnitZ(), axis_dir_vector(dir.axis));
        case k::radial_from: {
            oriented_box ob = ref(dir.ref_id);
            vec3 d = nominal_pos - ob.world_center();
            if (d.norm() < 1e-9)
                throw domain_error(diag_code::degenerate_direction,
                                   "radial direction from '" + dir.ref_id + "' is zero-length");
            return rotation_aligning(vec3::UnitZ(), d.normalized());
        }
        case k::tangent_to: {
            oriented_box ob = ref(dir.ref_id);
            vec3 d = nominal_pos - ob.world_center();
            vec3 d_local = ob.f.rotation.inverse() * d;
            d_local.z() = 0;
            if (d_local.norm() < 1e-9)
                throw domain_error(diag_code::degenerate_direction,
                                   "tangent direction about '" + dir.ref_id + "' is undefined");
            // right-handed: tangent = ref local +Z x radial
            vec3 t_local = vec3::UnitZ().cross(d_local.normalized());
            vec3 t = ob.f.rotation * t_local;
            return rotation_aligning(vec3::UnitZ(), t.normalized());
        }
        case k::normal_to: {
            oriented_box ob = ref(dir.ref_id);
            vec3 n = ob.f.rotate(face_normal_local(nearest_face(ob, nominal_pos)));
            return rotation_aligning(vec3::UnitZ(), n.normalized());
        }
        case k::face_normal: {
            oriented_box ob = ref(dir.ref_id);
            vec3 n = ob.f.rotate(face_normal_local(nearest_face(ob, nominal_pos)));
            return rotation_aligning(axis_dir_vector(dir.axis), n.normalized());
        }
        case k::face_align: {
            oriented_box ob = ref(dir.ref_id);
            vec3 n = ob.f.rotate(axis_dir_vector(dir.ref_face));
            return rotation_aligning(axis_dir_vector(dir.axis), n.normalized());
        }
    }
    return quat::Identity();
}

std::array<vec3, 8> world_corners(const frame& fr, const extent_box& box) {
    std::array<vec3, 8> out;
    int i = 0;
    for (int xi = 0; xi < 2; ++xi)
        for (int yi = 0; yi < 2; ++yi)
            for (int zi = 0; zi < 2; ++zi)
                out[static_cast<size_t>(i++)] = fr.apply({xi ? box.hi.x() : box.lo.x(),
                                                          yi ? box.hi.y() : box.lo.y(),
                                                          zi ? box.hi.z() : box.lo.z()});
    return out;
}

extent_box world_aabb(const frame& fr, const extent_box& box) {
    auto corners = world_corners(fr, box);
    extent_box out{corners[0], corners[0]};
    for (const auto& c : corners) {
        out.lo = out.lo.cwiseMin(c);
        out.hi = out.hi.cwiseMax(c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// GJK distance between convex point clouds
// ---------------------------------------------------------------------------

namespace {

vec3 support(std::span<const vec3> pts, const vec3& d) {
    const vec3* best = &pts[0];
    double best_dot = pts[0].dot(d);
    for (const auto& p : pts) {
        double v = p.dot(d);
        if (v > best_dot) {
            best_dot = v;
            best = &p;
        }
    }
    return *best;
}

vec3 minkowski_support(std::span<const vec3> a, std::span<const vec3> b, const vec3& d) {
    return support(a, d) - support(b, -d);
}

/// Closest point to the origin on a segment; reduces the simplex in place.
vec3 closest_on_segment(std::vector<vec3>& s) {
    vec3 a = s[0], b = s[1];
    vec3 ab = b - a;
    double denom = ab.squaredNorm();
    if (denom < 1e-30) {
        s = {a};
        return a;
    }
    double t = -a.dot(ab) / denom;
    if (t <= 0) {
        s = {a};
        return a;
    }
    if (t >= 1) {
        s = {b};
        return b;
    }
    return a + t * ab;
}

/// Closest point to the origin on a triangle (Ericson); reduces the simplex.
vec3 closest_on_triangle(std::vector<vec3>& s) {
    vec3 a = s[0], b = s[1], c = s[2];
    vec3 ab = b - a, ac = c - a, ap = -a;
    double d1 = ab.dot(ap), d2 = ac.dot(ap);
    if (d1 <= 0 && d2 <= 0) {
        s = {a};
        return a;
    }
    vec3 bp = -b;
    double d3 = ab.dot(bp), d4 = ac.dot(bp);
    if (d3 >= 0 && d4 <= d3) {
        s = {b};
        return b;
    }
    double vc = d1 * d4 - d3 * d2;
    if (vc <= 0 && d1 >= 0 && d3 <= 0) {
        double t = d1 / (d1 - d3);
        s = {a, b};
        return a + t * ab;
    }
    vec3 cp = -c;
    double d5 = ab.dot(cp), d6 = ac.dot(cp);
    if (d6 >= 0 && d5 <= d6) {
        s = {c};
        return c;
    }
    double vb = d5 * d2 - d1 * d6;
    if (vb <= 0 && d2 >= 0 && d6 <= 0) {
        double t = d2 / (d2 - d6);
        s = {a, c};
        return a + t * ac;
    }
    double va = d3 * d6 - d5 * d4;
    if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) {
        double t = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        s = {b, c};
        return b + t * (c - b);
    }
    double sum = va + vb + vc;
    if (std::abs(sum) < 1e-30) {
        // collinear points: the region tests cannot route; take the best edge
        std::vector<vec3> e1{a, b}, e2{a, c}, e3{b, c};
        vec3 p1 = closest_on_segment(e1), p2 = closest_on_segment(e2),
             p3 = closest_on_segment(e3);
        double n1 = p1.squaredNorm(), n2 = p2.squaredNorm(), n3 = p3.squaredNorm();
        if (n1 <= n2 && n1 <= n3) {
            s = e1;
            return p1;
        }
        if (n2 <= n3) {
            s = e2;
            return p2;
        }
        s = e3;
        return p3;
    }
    double denom = 1.0 / sum;
    double v = vb * denom, w = vc * denom;
    return a + ab * v + ac * w;
}

bool outside_plane(const vec3& a, const vec3& b, const vec3& c, const vec3& d) {
    vec3 n = (b - a).cross(c - a);
    double signp = (-a).dot(n);
    double signd = (d - a).dot(n);
    return signp * signd < 0;
}

vec3 closest_on_tetrahedron(std::vector<vec3>& s) {
    vec3 a = s[0], b = s[1], c = s[2], d = s[3];

    // a flat tetrahedron cannot enclose the origin; the sign tests below are
    // meaningless for it, so fall through to the per-face minimum instead
    double edge = std::max({(b - a).norm(), (c - a).norm(), (d - a).norm()});
    double vol = (b - a).cross(c - a).dot(d - a);
    bool degenerate = std::abs(vol) < 1e-12 * edge * edge * edge;

    bool out_abc = outside_plane(a, b, c, d);
    bool out_acd = outside_plane(a, c, d, b);
    bool out_adb = outside_plane(a, d, b, c);
    bool out_bdc = outside_plane(b, d, c, a);
    if (!degenerate && !out_abc && !out_acd && !out_adb && !out_bdc)
        return vec3::Zero(); // origin enclosed

    double best = std::numeric_limits<double>::infinity();
    vec3 best_pt = a;
    std::vector<vec3> best_simplex{a};
    auto consider = [&](vec3 p, vec3 q, vec3 r) {
        std::vector<vec3> tri{p, q, r};
        vec3 cp = closest_on_triangle(tri);
        double dist = cp.squaredNorm();
        if (dist < best) {
            best = dist;
            best_pt = cp;
            best_simplex = tri;
        }
    };
    if (degenerate || out_abc) consider(a, b, c);
    if (degenerate || out_acd) consider(a, c, d);
    if (degenerate || out_adb) consider(a, d, b);
    if (degenerate || out_bdc) consider(b, d, c);
    s = best_simplex;
    return best_pt;
}

vec3 closest_simplex(std::vector<vec3>& s) {
    switch (s.size()) {
        case 1: return s[0];
        case 2: return closest_on_segment(s);
        case 3: return closest_on_triangle(s);
        default: return closest_on_tetrahedron(s);
    }
}

} // namespace

double convex_distance(std::span<const vec3> a, std::span<const vec3> b) {
    std::vector<vec3> simplex{minkowski_support(a, b, vec3::UnitX())};
    double scale = 1.0;
    for (const auto& p : a) scale = std::max(scale, p.cwiseAbs().maxCoeff());
    for (const auto& p : b) scale = std::max(scale, p.cwiseAbs().maxCoeff());

    vec3 v = simplex[0];
    for (int iter = 0; iter < 64; ++iter) {
        v = closest_simplex(simplex);
        double vlen2 = v.squaredNorm();
        if (vlen2 < 1e-24 * scale * scale) return 0.0;
        vec3 w = minkowski_support(a, b, -v);
        // no further progress toward the origin
        if (vlen2 - v.dot(w) <= 1e-12 * scale * vlen2 + 1e-30) break;
        bool known = false;
        for (const auto& p : simplex)
            if ((p - w).squaredNorm() < 1e-30) known = true;
        if (known) break;
        simplex.push_back(w);
    }
    return v.norm();
}

} // namespace dgc
