#include "dgc/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

#include <json.hpp>

namespace dgc {

// ---------------------------------------------------------------------------
// Descriptors
// ---------------------------------------------------------------------------

vec3 size_vec(const size_spec& s) {
    switch (s.k) {
        case size_spec::kind::box: return {s.a, s.b, s.c};
        case size_spec::kind::cylinder:
        case size_spec::kind::cone:
        case size_spec::kind::disc: return {s.a, s.a, s.b};
        default: return {0, 0, 0};
    }
}

double angle_deg(const vec3& a, const vec3& b) {
    double d = std::clamp(a.dot(b) / (a.norm() * b.norm()), -1.0, 1.0);
    return std::acos(d) * 180.0 / M_PI;
}

std::vector<node_descriptor> node_descriptors(const graph_ast& g, bool include_groups) {
    std::vector<node_descriptor> out;
    for (const auto& n : g.nodes) {
        if (n.is_group() && !include_groups) continue;
        node_descriptor d;
        d.id = n.id;
        d.cls = n.node_type;
        d.size = n.size;
        if (n.pos) {
            if (std::holds_alternative<offset_spec>(*n.pos)) {
                const auto& o = std::get<offset_spec>(*n.pos);
                d.position = {o.dx, o.dy, o.dz};
            } else {
                const auto& p = std::get<polar_spec>(*n.pos);
                double th = p.theta_deg * M_PI / 180.0;
                d.position = {p.dr * std::cos(th), p.dr * std::sin(th), 0.0};
            }
        }
        if (n.orientation && n.orientation->k == orientation_directive::kind::fixed_axis)
            d.orientation = n.orientation->axis;
        d.material = n.material;
        out.push_back(std::move(d));
    }
    return out;
}

double global_scale(const std::vector<node_descriptor>& gt) {
    double s = 0;
    for (const auto& d : gt) s = std::max(s, size_vec(d.size).maxCoeff());
    return s;
}

cost_matrix build_cost_matrix(const std::vector<node_descriptor>& pred,
                              const std::vector<node_descriptor>& gt, double s_max,
                              const metric_weights& w) {
    if (s_max <= 0)
        throw domain_error(diag_code::zero_scale, "global GT scale is zero");

    cost_matrix out(pred.size(), std::vector<double>(gt.size(), 0.0));
    for (std::size_t i = 0; i < pred.size(); ++i) {
        vec3 ps = size_vec(pred[i].size) / s_max;
        vec3 px = pred[i].position;
        vec3 po = axis_dir_vector(pred[i].orientation);
        for (std::size_t j = 0; j < gt.size(); ++j) {
            vec3 gs = size_vec(gt[j].size) / s_max;
            vec3 gx = gt[j].position;
            vec3 go = axis_dir_vector(gt[j].orientation);

            double c_size = (ps - gs).lpNorm<1>();
            double c_pos = (px - gx).lpNorm<1>() / std::max(1.0, s_max);
            double c_ori = angle_deg(po, go) / 180.0;
            double c_attr = 0;
            if (pred[i].material && gt[j].material && *pred[i].material != *gt[j].material)
                c_attr = w.gamma;

            out[i][j] = w.w_s * c_size + w.w_p * c_pos + w.w_o * c_ori + w.w_a * c_attr;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hungarian assignment (potentials formulation, rectangular)
// ---------------------------------------------------------------------------

namespace {

/// Requires rows <= cols. Returns col assignment p[j] = row+1 (1-based).
assignment hungarian_rect(const cost_matrix& a, std::size_t n, std::size_t m) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0), v(m + 1, 0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);

    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            std::size_t i0 = p[j0], j1 = 0;
            double delta = kInf;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = a[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    assignment out;
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] == 0) continue;
        out.pairs.emplace_back(static_cast<int>(p[j] - 1), static_cast<int>(j - 1));
        out.total_cost += a[p[j] - 1][j - 1];
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

} // namespace

assignment hungarian(const cost_matrix& cost) {
    std::size_t n = cost.size();
    if (n == 0 || cost[0].empty())
        throw domain_error(diag_code::empty_matrix, "cost matrix has no entries");
    std::size_t m = cost[0].size();

    if (n <= m) return hungarian_rect(cost, n, m);

    cost_matrix t(m, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) t[j][i] = cost[i][j];
    assignment flipped = hungarian_rect(t, m, n);
    assignment out;
    out.total_cost = flipped.total_cost;
    for (auto [r, c] : flipped.pairs) out.pairs.emplace_back(c, r);
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

// ---------------------------------------------------------------------------
// Aliasing
// ---------------------------------------------------------------------------

std::string normalize_part_name(const std::string& name) {
    std::string out;
    bool in_brackets = false;
    for (char c : name) {
        if (c == '[') in_brackets = true;
        else if (c == ']') in_brackets = false;
        else if (!in_brackets && std::isalnum(static_cast<unsigned char>(c)))
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

alias_mapping default_alias_mapping(const graph_ast& gt, const graph_ast& pred) {
    alias_mapping m;
    std::set<std::string> gt_taken;

    std::set<std::string> gt_ids;
    for (const auto& n : gt.nodes) gt_ids.insert(n.id);

    // exact ids
    for (const auto& p : pred.nodes) {
        if (gt_ids.count(p.id) && !gt_taken.count(p.id)) {
            m.pred_to_gt[p.id] = p.id;
            gt_taken.insert(p.id);
        }
    }

    // unique normalized match
    std::map<std::string, std::vector<std::string>> gt_norm, pred_norm;
    for (const auto& n : gt.nodes)
        if (!gt_taken.count(n.id)) gt_norm[normalize_part_name(n.id)].push_back(n.id);
    for (const auto& p : pred.nodes)
        if (!m.pred_to_gt.count(p.id)) pred_norm[normalize_part_name(p.id)].push_back(p.id);
    for (const auto& [norm, pids] : pred_norm) {
        auto it = gt_norm.find(norm);
        if (it == gt_norm.end()) continue;
        if (pids.size() == 1 && it->second.size() == 1) {
            m.pred_to_gt[pids[0]] = it->second[0];
            gt_taken.insert(it->second[0]);
        }
    }

    // class-wise greedy nearest position over the rest
    auto gt_desc = node_descriptors(gt, true);
    auto pred_desc = node_descriptors(pred, true);
    struct cand {
        double dist;
        std::string pid, gid;
    };
    std::vector<cand> cands;
    for (const auto& p : pred_desc) {
        if (m.pred_to_gt.count(p.id)) continue;
        for (const auto& g : gt_desc) {
            if (gt_taken.count(g.id) || g.cls != p.cls) continue;
            cands.push_back({(p.position - g.position).norm(), p.id, g.id});
        }
    }
    std::sort(cands.begin(), cands.end(), [](const cand& a, const cand& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.pid != b.pid) return a.pid < b.pid;
        return a.gid < b.gid;
    });
    for (const auto& c : cands) {
        if (m.pred_to_gt.count(c.pid) || gt_taken.count(c.gid)) continue;
        m.pred_to_gt[c.pid] = c.gid;
        gt_taken.insert(c.gid);
    }
    return m;
}

// ---------------------------------------------------------------------------
// NLA
// ---------------------------------------------------------------------------

nla_report nla(const graph_ast& gt, const graph_ast& pred, const alias_mapping& mapping,
               const metric_weights& w) {
    auto gt_desc = node_descriptors(gt);
    auto pred_desc = node_descriptors(pred);
    // the global scale reads every GT node, sized groups included
    double s_max = global_scale(node_descriptors(gt, true));

    // rename mapped pred nodes into the GT namespace, class included
    std::map<std::string, const node_descriptor*> gt_by_id;
    for (const auto& g : gt_desc) gt_by_id[g.id] = &g;
    for (auto& p : pred_desc) {
        auto it = mapping.pred_to_gt.find(p.id);
        if (it == mapping.pred_to_gt.end()) continue;
        p.id = it->second;
        auto git = gt_by_id.find(it->second);
        if (git != gt_by_id.end()) p.cls = git->second->cls;
    }

    std::vector<std::string> classes;
    for (const auto& d : gt_desc)
        if (std::find(classes.begin(), classes.end(), d.cls) == classes.end())
            classes.push_back(d.cls);
    for (const auto& d : pred_desc)
        if (std::find(classes.begin(), classes.end(), d.cls) == classes.end())
            classes.push_back(d.cls);

    nla_report out;
    double total_cost = 0;
    int total_pairs = 0;
    std::set<std::string> matched_pred, matched_gt;

    for (const auto& cls : classes) {
        std::vector<node_descriptor> pc, gc;
        for (const auto& d : pred_desc)
            if (d.cls == cls) pc.push_back(d);
        for (const auto& d : gt_desc)
            if (d.cls == cls) gc.push_back(d);
        if (pc.empty() || gc.empty()) continue; // class absent on one side

        auto cost = build_cost_matrix(pc, gc, s_max, w);
        auto asg = hungarian(cost);
        for (auto [r, c] : asg.pairs) {
            total_cost += cost[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            ++total_pairs;
            out.pairs.emplace_back(pc[static_cast<std::size_t>(r)].id,
                                   gc[static_cast<std::size_t>(c)].id);
            matched_pred.insert(pc[static_cast<std::size_t>(r)].id);
            matched_gt.insert(gc[static_cast<std::size_t>(c)].id);
        }
    }

    out.score = total_cost / std::max(1, total_pairs);
    out.unmatched_pred = static_cast<int>(pred_desc.size()) - static_cast<int>(matched_pred.size());
    out.unmatched_gt = static_cast<int>(gt_desc.size()) - static_cast<int>(matched_gt.size());
    return out;
}

// ---------------------------------------------------------------------------
// HLA
// ---------------------------------------------------------------------------

std::map<std::string, int> compute_depths(const std::vector<std::string>& nodes,
                                          const edge_list& edges,
                                          const std::map<std::string, int>* layers) {
    std::set<std::string> children;
    for (const auto& [u, v] : edges) {
        (void)u;
        children.insert(v);
    }
    std::vector<std::string> roots;
    for (const auto& n : nodes)
        if (!children.count(n)) roots.push_back(n);
    if (roots.empty() && layers) {
        for (const auto& n : nodes) {
            auto it = layers->find(n);
            if (it != layers->end() && it->second == 0) roots.push_back(n);
        }
    }
    if (roots.empty()) roots = nodes;

    std::map<std::string, int> depth;
    std::deque<std::string> queue;
    for (const auto& r : roots) {
        depth[r] = 0;
        queue.push_back(r);
    }
    while (!queue.empty()) {
        std::string u = queue.front();
        queue.pop_front();
        for (const auto& [a, b] : edges) {
            if (a != u) continue;
            if (!depth.count(b)) {
                depth[b] = depth[u] + 1;
                queue.push_back(b);
            }
        }
    }
    for (const auto& n : nodes)
        if (!depth.count(n)) depth[n] = 0;
    return depth;
}

double edge_f1(const edge_list& pred_edges, const edge_list& gt_edges,
               const alias_mapping& mapping) {
    std::set<std::pair<std::string, std::string>> gt_set(gt_edges.begin(), gt_edges.end());
    int hits = 0;
    for (const auto& [p_par, p_ch] : pred_edges) {
        auto par = mapping.pred_to_gt.find(p_par);
        auto ch = mapping.pred_to_gt.find(p_ch);
        if (par == mapping.pred_to_gt.end() || ch == mapping.pred_to_gt.end()) continue;
        if (gt_set.count({par->second, ch->second})) ++hits;
    }
    double prec =
        pred_edges.empty() ? 0.0 : double(hits) / static_cast<double>(pred_edges.size());
    double rec = gt_edges.empty() ? 0.0 : double(hits) / static_cast<double>(gt_edges.size());
    if (prec + rec <= 0) return 0.0;
    return 2.0 * prec * rec / (prec + rec);
}

double depth_consistency(const std::vector<std::string>& pred_nodes,
                         const std::map<std::string, int>& pred_depths,
                         const std::map<std::string, int>& gt_depths,
                         const alias_mapping& mapping) {
    double sum = 0;
    int count = 0;
    for (const auto& p : pred_nodes) {
        auto it = mapping.pred_to_gt.find(p);
        if (it == mapping.pred_to_gt.end()) continue;
        auto dp = pred_depths.find(p);
        auto dg = gt_depths.find(it->second);
        if (dp == pred_depths.end() || dg == gt_depths.end()) continue;
        sum += std::exp(-std::abs(dp->second - dg->second));
        ++count;
    }
    return count > 0 ? sum / count : 0.0;
}

hla_report hla(const std::vector<std::string>& gt_nodes, const edge_list& gt_edges,
               const std::vector<std::string>& pred_nodes, const edge_list& pred_edges,
               const alias_mapping& mapping, const hla_config& cfg,
               const std::map<std::string, int>* gt_layers,
               const std::map<std::string, int>* pred_layers) {
    auto d_g = compute_depths(gt_nodes, gt_edges, gt_layers);
    auto d_p = compute_depths(pred_nodes, pred_edges, pred_layers);
    hla_report out;
    out.edge_f1 = edge_f1(pred_edges, gt_edges, mapping);
    out.depth_score = depth_consistency(pred_nodes, d_p, d_g, mapping);
    out.hla = cfg.alpha * out.edge_f1 + (1.0 - cfg.alpha) * out.depth_score;
    return out;
}

edge_list parent_edges_of(const graph_ast& g) {
    edge_list out;
    for (const auto& n : g.nodes)
        if (n.parent) out.emplace_back(*n.parent, n.id);
    return out;
}

hla_report hla_graphs(const graph_ast& gt, const graph_ast& pred, const alias_mapping& mapping,
                      const hla_config& cfg) {
    std::vector<std::string> gt_nodes, pred_nodes;
    std::map<std::string, int> gt_layers, pred_layers;
    for (const auto& n : gt.nodes) {
        gt_nodes.push_back(n.id);
        gt_layers[n.id] = n.layer;
    }
    for (const auto& n : pred.nodes) {
        pred_nodes.push_back(n.id);
        pred_layers[n.id] = n.layer;
    }
    return hla(gt_nodes, parent_edges_of(gt), pred_nodes, parent_edges_of(pred), mapping, cfg,
               &gt_layers, &pred_layers);
}

// ---------------------------------------------------------------------------
// GCS
// ---------------------------------------------------------------------------

namespace {

struct part_view {
    oriented_box ob;
};

std::optional<part_view> scene_part(const resolved_scene& scene, const std::string& id) {
    for (const auto& i : scene.instances)
        if (i.id == id && i.csg != csg_role::cutter) return part_view{i.obox()};
    for (const auto& a : scene.anchors)
        if (a.id == id) return part_view{a.obox()};
    return std::nullopt;
}

bool interval_overlap(double lo1, double hi1, double lo2, double hi2, double slack) {
    return lo1 <= hi2 + slack && lo2 <= hi1 + slack;
}

} // namespace

name_mapper default_name_mapper() {
    return [](const std::string& name, const resolved_scene& scene) -> std::optional<std::string> {
        std::vector<std::string> ids;
        for (const auto& i : scene.instances)
            if (i.csg != csg_role::cutter) ids.push_back(i.id);
        for (const auto& a : scene.anchors) ids.push_back(a.id);

        for (const auto& id : ids)
            if (id == name) return id;

        std::string norm = normalize_part_name(name);
        std::vector<std::string> hits;
        for (const auto& id : ids)
            if (normalize_part_name(id) == norm) hits.push_back(id);
        if (hits.size() == 1) return hits[0];
        return std::nullopt; // missing or ambiguous
    };
}

gcs_sample gcs_eval(const resolved_scene& scene, const std::vector<gcs_constraint>& constraints,
                    const name_mapper& mapper) {
    gcs_sample out;
    out.has_constraints = !constraints.empty();

    for (std::size_t idx = 0; idx < constraints.size(); ++idx) {
        const auto& c = constraints[idx];
        gcs_bit bit;
        bit.index = idx;

        auto a_id = mapper(c.part_a, scene);
        auto b_id = mapper(c.part_b, scene);
        if (!a_id || !b_id) {
            bit.status = gcs_status::skipped;
            bit.note = std::string(diag_code_name(diag_code::unmappable_part_name)) + ": '" +
                       (a_id ? c.part_b : c.part_a) + "'";
            out.bits.push_back(std::move(bit));
            continue;
        }
        auto a = scene_part(scene, *a_id);
        auto b = scene_part(scene, *b_id);
        if (!a || !b) {
            bit.status = gcs_status::skipped;
            bit.note = std::string(diag_code_name(diag_code::unmappable_part_name)) + ": '" +
                       (a ? *b_id : *a_id) + "'";
            out.bits.push_back(std::move(bit));
            continue;
        }

        bool ok = false;
        switch (c.kind) {
            case gcs_kind::contact: {
                auto ca = world_corners(a->ob.f, a->ob.box);
                auto cb = world_corners(b->ob.f, b->ob.box);
                ok = convex_distance(ca, cb) <= c.tolerance;
                break;
            }
            case gcs_kind::above:
            case gcs_kind::below: {
                extent_box wa = world_aabb(a->ob.f, a->ob.box);
                extent_box wb = world_aabb(b->ob.f, b->ob.box);
                double za = a->ob.world_center().z();
                double zb = b->ob.world_center().z();
                bool ordered = c.kind == gcs_kind::above ? za > zb : za < zb;
                bool xy = interval_overlap(wa.lo.x(), wa.hi.x(), wb.lo.x(), wb.hi.x(),
                                           c.tolerance) &&
                          interval_overlap(wa.lo.y(), wa.hi.y(), wb.lo.y(), wb.hi.y(),
                                           c.tolerance);
                ok = ordered && xy;
                break;
            }
            case gcs_kind::aligned_axis: {
                vec3 ca = a->ob.world_center();
                vec3 cb = b->ob.world_center();
                vec3 d = ca - cb;
                switch (c.axis) {
                    case 'X': ok = std::abs(d.y()) <= c.tolerance && std::abs(d.z()) <= c.tolerance; break;
                    case 'Y': ok = std::abs(d.x()) <= c.tolerance && std::abs(d.z()) <= c.tolerance; break;
                    default: ok = std::abs(d.x()) <= c.tolerance && std::abs(d.y()) <= c.tolerance; break;
                }
                break;
            }
            case gcs_kind::relative_orientation: {
                vec3 va = a->ob.f.rotate(axis_dir_vector(c.axis_a));
                vec3 vb = b->ob.f.rotate(axis_dir_vector(c.axis_b));
                ok = std::abs(angle_deg(va, vb) - c.angle_deg) <= c.tolerance_deg;
                break;
            }
        }
        bit.status = ok ? gcs_status::pass : gcs_status::fail;
        ++out.evaluated;
        if (ok) ++out.passed;
        out.bits.push_back(std::move(bit));
    }
    return out;
}

std::vector<gcs_constraint> parse_constraints(const std::string& text, const gcs_defaults& defs) {
    nlohmann::json root = nlohmann::json::parse(text);
    std::vector<gcs_constraint> out;
    for (const auto& j : root) {
        gcs_constraint c;
        std::string kind = j.at("kind");
        if (kind == "contact") c.kind = gcs_kind::contact;
        else if (kind == "above") c.kind = gcs_kind::above;
        else if (kind == "below") c.kind = gcs_kind::below;
        else if (kind == "aligned_axis") c.kind = gcs_kind::aligned_axis;
        else if (kind == "relative_orientation") c.kind = gcs_kind::relative_orientation;
        else throw domain_error(diag_code::unknown_directive, "unknown constraint kind '" + kind + "'");

        c.part_a = j.contains("part_a") ? j.at("part_a") : j.at("a");
        c.part_b = j.contains("part_b") ? j.at("part_b") : j.at("b");
        c.tolerance = j.value("tol", j.value("tolerance", defs.contact_tol));
        if (j.contains("axis")) {
            std::string ax = j.at("axis");
            if (!ax.empty()) c.axis = static_cast<char>(std::toupper(ax.back()));
        }
        auto axis_of = [](const std::string& s) {
            for (axis_dir d :
                 {axis_dir::pos_x, axis_dir::neg_x, axis_dir::pos_y, axis_dir::neg_y,
                  axis_dir::pos_z, axis_dir::neg_z})
                if (s == axis_dir_name(d)) return d;
            return axis_dir::pos_z;
        };
        if (j.contains("axis_a")) c.axis_a = axis_of(j.at("axis_a"));
        if (j.contains("axis_b")) c.axis_b = axis_of(j.at("axis_b"));
        c.angle_deg = j.value("angle_deg", 0.0);
        c.tolerance_deg = j.value("tol_deg", j.value("tolerance_deg", defs.angle_tol_deg));
        out.push_back(std::move(c));
    }
    return out;
}

alias_mapping parse_mapping(const std::string& text) {
    nlohmann::json root = nlohmann::json::parse(text);
    alias_mapping m;
    std::set<std::string> images;
    for (auto it = root.begin(); it != root.end(); ++it) {
        std::string gt_id = it.value().get<std::string>();
        if (!images.insert(gt_id).second)
            throw domain_error(diag_code::unknown_target,
                               "mapping is not injective: '" + gt_id + "' mapped twice");
        m.pred_to_gt[it.key()] = gt_id;
    }
    return m;
}

} // namespace dgc
