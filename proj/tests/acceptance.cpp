// Acceptance suite: one check per release criterion, each printing a
// [PASS]/[FAIL] line. The process exits nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Geometry>
#include <json.hpp>

#include "dgc/curriculum.hpp"
#include "dgc/emit.hpp"
#include "dgc/metrics.hpp"
#include "dgc/parser.hpp"
#include "dgc/plan.hpp"
#include "dgc/resolve.hpp"
#include "dgc/serialize.hpp"
#include "dgc/validate.hpp"

using namespace dgc;

namespace {

struct criterion_run {
    int failures = 0;
    std::string detail;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            ++failures;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

struct harness {
    int failed = 0;

    void run(int number, const std::string& name, double budget_seconds,
             const std::function<void(criterion_run&)>& body) {
        criterion_run cr;
        auto start = std::chrono::steady_clock::now();
        try {
            body(cr);
        } catch (const std::exception& e) {
            cr.expect(false, std::string("exception: ") + e.what());
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (budget_seconds > 0)
            cr.expect(elapsed < budget_seconds,
                      "runtime " + std::to_string(elapsed) + "s exceeds budget");
        if (cr.failures == 0) {
            std::printf("[PASS] criterion %d: %s (%.3fs)\n", number, name.c_str(), elapsed);
        } else {
            std::printf("[FAIL] criterion %d: %s (%.3fs) -- %s\n", number, name.c_str(), elapsed,
                        cr.detail.c_str());
            ++failed;
        }
        std::fflush(stdout);
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string corpus(const std::string& name) { return std::string(DGC_CORPUS_DIR) + "/" + name; }
std::string golden(const std::string& name) { return std::string(DGC_GOLDEN_DIR) + "/" + name; }

validated_graph load_graph(const std::string& path) {
    auto parsed = parse_graph(read_file(path));
    if (!parsed.ok())
        throw std::runtime_error("parse failed: " + render_diagnostics(parsed.diagnostics));
    auto validated = validate(*parsed.ast);
    if (!validated.ok())
        throw std::runtime_error("validate failed: " + render_diagnostics(validated.diagnostics));
    auto expanded = expand_patterns(*validated.graph);
    if (!expanded.ok())
        throw std::runtime_error("expand failed: " + render_diagnostics(expanded.diagnostics));
    return *expanded.graph;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

vec3 random_unit(std::mt19937_64& rng) {
    for (;;) {
        vec3 v{uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1)};
        double n = v.norm();
        if (n > 1e-3 && n <= 1.0) return v / n;
    }
}

double brute_force_min(const cost_matrix& c) {
    std::size_t n = c.size(), m = c[0].size();
    if (n > m) {
        cost_matrix t(m, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) t[j][i] = c[i][j];
        return brute_force_min(t);
    }
    std::vector<std::size_t> cols(m);
    std::iota(cols.begin(), cols.end(), 0u);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += c[i][cols[i]];
        best = std::min(best, s);
    } while (std::next_permutation(cols.begin(), cols.end()));
    return best;
}

/// Brute-force optimum returned as row-ascending pairs, for exact-sum
/// comparison against the implementation's choice.
std::vector<std::pair<int, int>> brute_force_pairs(const cost_matrix& c) {
    std::size_t n = c.size(), m = c[0].size();
    if (n > m) {
        cost_matrix t(m, std::vector<double>(n));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < m; ++j) t[j][i] = c[i][j];
        auto flipped = brute_force_pairs(t);
        std::vector<std::pair<int, int>> out;
        for (auto [r, col] : flipped) out.emplace_back(col, r);
        std::sort(out.begin(), out.end());
        return out;
    }
    std::vector<std::size_t> cols(m);
    std::iota(cols.begin(), cols.end(), 0u);
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, int>> best_pairs;
    do {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += c[i][cols[i]];
        if (s < best) {
            best = s;
            best_pairs.clear();
            for (std::size_t i = 0; i < n; ++i)
                best_pairs.emplace_back(static_cast<int>(i), static_cast<int>(cols[i]));
        }
    } while (std::next_permutation(cols.begin(), cols.end()));
    return best_pairs;
}

double canonical_sum(const cost_matrix& c, std::vector<std::pair<int, int>> pairs) {
    std::sort(pairs.begin(), pairs.end());
    double s = 0;
    for (auto [r, col] : pairs)
        s += c[static_cast<std::size_t>(r)][static_cast<std::size_t>(col)];
    return s;
}

node_record* find_node(graph_ast& g, const std::string& id) {
    for (auto& n : g.nodes)
        if (n.id == id) return &n;
    return nullptr;
}

alias_mapping identity_mapping(const graph_ast& g) {
    alias_mapping m;
    for (const auto& n : g.nodes) m.pred_to_gt[n.id] = n.id;
    return m;
}

const std::vector<std::string> kCorpus = {"dining_table.graph", "stool.graph",
                                          "pegboard.graph", "bracket.graph", "wheel.graph"};

// --------------------------------------------------------------------------
// Criteria
// --------------------------------------------------------------------------

void criterion_golden_pipeline(criterion_run& cr) {
    auto vg = load_graph(corpus("dining_table.graph"));
    auto scene = resolve_scene(vg);

    const instance* leg = scene.find("leg_fl");
    cr.expect(leg != nullptr, "leg_fl resolved");
    if (leg)
        cr.expect((leg->f.position - vec3{-0.96, 0.46, 0.37}).norm() < 1e-9,
                  "leg_fl center (-0.96, 0.46, 0.37)");

    const instance* top = scene.find("tabletop");
    cr.expect(top != nullptr, "tabletop resolved");
    if (top) {
        vec3 bottom = face_center_world(top->f, top->box, feature::bottom);
        cr.expect(std::abs(bottom.z() - 0.73) < 1e-9, "tabletop bottom face at z = 0.73");
    }

    auto p = plan(vg);
    auto actions = emit_actions(p);
    cr.expect(actions.find("SECTION") != std::string::npos, "actions contain SECTION");
    cr.expect(actions.find("Stage 1 complete.") != std::string::npos,
              "actions contain 'Stage 1 complete.'");
    cr.expect(actions.find("All stages complete.") != std::string::npos,
              "actions contain 'All stages complete.'");

    auto script = emit_script(p, "bpy");
    cr.expect(script == read_file(golden("dining_table.bpy.py")),
              "emitted script is byte-identical to the golden");
}

void criterion_roundtrip_and_fuzz(criterion_run& cr) {
    for (const auto& name : kCorpus) {
        auto first = parse_graph(read_file(corpus(name)));
        cr.expect(first.ok(), name + " parses");
        if (!first.ok()) continue;
        auto canonical = serialize_graph(*first.ast);
        auto second = parse_graph(canonical);
        cr.expect(second.ok(), name + " canonical form re-parses");
        if (!second.ok()) continue;
        cr.expect(*first.ast == *second.ast, name + " parse-serialize-parse is idempotent");
        cr.expect(serialize_graph(*second.ast) == canonical, name + " canonical fixed point");
    }

    auto base = read_file(corpus("dining_table.graph"));
    std::mt19937_64 rng(0xFADE);
    const std::string printable = "abcdefghijklmnopqrstuvwxyz0123456789|=()-.,:[]* _";
    int bad_span = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::string text = base;
        int edits = 1 + uniform_int(rng, 0, 3);
        for (int e = 0; e < edits && !text.empty(); ++e) {
            std::size_t pos =
                static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(text.size()) - 1));
            switch (uniform_int(rng, 0, 3)) {
                case 0: text.erase(pos, 1); break;
                case 1:
                    text.insert(pos, 1,
                                printable[static_cast<std::size_t>(
                                    uniform_int(rng, 0, static_cast<int>(printable.size()) - 1))]);
                    break;
                case 2:
                    text[pos] = printable[static_cast<std::size_t>(
                        uniform_int(rng, 0, static_cast<int>(printable.size()) - 1))];
                    break;
                default: text.erase(pos, std::min<std::size_t>(11, text.size() - pos)); break;
            }
        }
        auto res = parse_graph(text); // any crash fails the whole criterion
        for (const auto& d : res.diagnostics)
            if (d.line < 1 || d.column < 1) ++bad_span;
    }
    cr.expect(bad_span == 0, "every diagnostic carries a line/column");
}

void criterion_hungarian_oracle(criterion_run& cr) {
    std::mt19937_64 rng(271828);
    int mismatches = 0;
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t n = static_cast<std::size_t>(uniform_int(rng, 1, 6));
        std::size_t m = static_cast<std::size_t>(uniform_int(rng, 1, 6));
        cost_matrix c(n, std::vector<double>(m));
        for (auto& row : c)
            for (auto& x : row) x = uniform(rng, 0, 10);
        auto a = hungarian(c);
        // exact equality: both choices re-summed in one canonical order
        if (canonical_sum(c, a.pairs) != canonical_sum(c, brute_force_pairs(c))) ++mismatches;
    }
    cr.expect(mismatches == 0, "assignment equals the brute-force minimum on all 500 matrices");
}

void criterion_nla(criterion_run& cr) {
    metric_weights unit{1, 1, 1, 1, 1.0};
    for (const auto& name : kCorpus) {
        auto parsed = parse_graph(read_file(corpus(name)));
        cr.expect(parsed.ok(), name + " parses");
        if (!parsed.ok()) continue;
        auto rep = nla(*parsed.ast, *parsed.ast, identity_mapping(*parsed.ast), unit);
        cr.expect(rep.score == 0.0, name + " identity NLA is zero");
    }

    auto gt = *parse_graph(read_file(corpus("dining_table.graph"))).ast;

    auto pred_pos = gt;
    std::get<offset_spec>(*find_node(pred_pos, "leg_fl")->pos).dx += 0.1;
    auto rep_pos = nla(gt, pred_pos, identity_mapping(gt), unit);
    cr.expect(std::abs(rep_pos.score - 0.01) < 1e-12,
              "position case reproduces 0.01 within 1e-12");
    cr.expect(rep_pos.pairs.size() == 5, "five matched pairs");

    auto pred_mat = gt;
    find_node(pred_mat, "tabletop")->material = "wood_dark";
    auto rep_mat = nla(gt, pred_mat, identity_mapping(gt), unit);
    cr.expect(std::abs(rep_mat.score - 0.2) < 1e-12, "material case reproduces 0.2 within 1e-12");
}

void criterion_hla(criterion_run& cr) {
    auto g = *parse_graph(read_file(corpus("dining_table.graph"))).ast;
    auto perfect = hla_graphs(g, g, identity_mapping(g), {0.5});
    cr.expect(perfect.hla == 1.0 && perfect.edge_f1 == 1.0 && perfect.depth_score == 1.0,
              "identity triple is (1, 1, 1)");

    std::vector<std::string> gt_nodes{"a", "b", "c", "d", "e"};
    edge_list gt_edges{{"a", "b"}, {"b", "c"}, {"a", "d"}, {"e", "c"}};
    std::vector<std::string> pred_nodes{"a", "b", "c", "d"};
    edge_list pred_edges{{"a", "b"}, {"b", "c"}, {"a", "d"}};
    alias_mapping m;
    for (const auto& n : pred_nodes) m.pred_to_gt[n] = n;

    auto rep = hla(gt_nodes, gt_edges, pred_nodes, pred_edges, m, {0.5});
    cr.expect(std::abs(rep.edge_f1 - 6.0 / 7.0) < 1e-9, "EdgeF1 = 6/7");
    cr.expect(std::abs(rep.depth_score - (3.0 + std::exp(-1.0)) / 4.0) < 1e-9,
              "DepthScore = (3 + 1/e)/4");
    double expect = 0.5 * (6.0 / 7.0) + 0.5 * (3.0 + std::exp(-1.0)) / 4.0;
    cr.expect(std::abs(rep.hla - expect) < 1e-9, "HLA(alpha=0.5) ~ 0.849556");

    cr.expect(edge_f1({}, gt_edges, m) == 0.0, "empty pred edges give 0");
    auto depths = compute_depths(pred_nodes, pred_edges);
    cr.expect(depth_consistency(pred_nodes, depths, depths, alias_mapping{}) == 0.0,
              "empty mapping gives 0");
}

void criterion_gcs(criterion_run& cr) {
    auto cons = parse_constraints(read_file(corpus("dining_table.constraints.json")), {});
    cr.expect(cons.size() == 5, "five contact constraints");

    auto scene = resolve_scene(load_graph(corpus("dining_table.graph")));
    auto sample = gcs_eval(scene, cons);
    cr.expect(sample.evaluated == 5 && sample.score() == 1.0, "golden dining table scores 1.0");

    const char* legs[] = {"leg_fl", "leg_fr", "leg_bl", "leg_br"};
    for (int i = 0; i < 4; ++i) {
        auto parsed = parse_graph(read_file(corpus("dining_table.graph")));
        auto ast = *parsed.ast;
        std::get<offset_spec>(*find_node(ast, legs[i])->pos).dz = -0.05;
        auto lowered = expand_patterns(*validate(ast).graph);
        auto lowered_scene = resolve_scene(*lowered.graph);
        auto s = gcs_eval(lowered_scene, cons);
        bool exactly_that_bit = s.bits[static_cast<std::size_t>(i)].status == gcs_status::fail;
        for (std::size_t b = 0; b < s.bits.size(); ++b)
            if (b != static_cast<std::size_t>(i) && s.bits[b].status != gcs_status::pass)
                exactly_that_bit = false;
        cr.expect(exactly_that_bit && std::abs(s.score() - 0.8) < 1e-12,
                  std::string("lowering ") + legs[i] + " flips exactly its own bit to 0.8");
    }

    auto first = gcs_eval(scene, cons);
    for (int run = 0; run < 10; ++run) {
        auto again = gcs_eval(scene, cons);
        bool same = again.bits.size() == first.bits.size();
        for (std::size_t b = 0; same && b < first.bits.size(); ++b)
            same = first.bits[b].status == again.bits[b].status;
        if (!same) {
            cr.expect(false, "bit vector changed across repeated runs");
            break;
        }
    }
}

void criterion_resolver_properties(criterion_run& cr) {
    std::mt19937_64 rng(0xACCE5);
    int align_failures = 0;
    for (int trial = 0; trial < 200; ++trial) {
        extent_box box{{-uniform(rng, 0.1, 1), -uniform(rng, 0.1, 1), -uniform(rng, 0.1, 1)},
                       {uniform(rng, 0.1, 1), uniform(rng, 0.1, 1), uniform(rng, 0.1, 1)}};
        frame f{{uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, -3, 3)},
                quat(Eigen::AngleAxisd(uniform(rng, -M_PI, M_PI), random_unit(rng)))};
        vec3 target{uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, -3, 3)};

        align_spec spec;
        spec.axes = {uniform_int(rng, 0, 1) == 1, uniform_int(rng, 0, 1) == 1,
                     uniform_int(rng, 0, 1) == 1};
        if (!spec.axes.any()) spec.axes = {};
        constexpr feature feats[] = {feature::left,   feature::right, feature::front,
                                     feature::back,   feature::top,   feature::bottom,
                                     feature::center};
        spec.this_feature = feats[uniform_int(rng, 0, 6)];
        spec.target.ref = {"t", std::nullopt, false, feature::center};

        oriented_box ob{f, box};
        ob.f.position += apply_align(ob, spec, [&](const feature_ref&) { return target; });
        vec3 after = face_center_world(ob.f, ob.box, spec.this_feature);
        if (spec.axes.x && std::abs(after.x() - target.x()) >= 1e-9) ++align_failures;
        if (spec.axes.y && std::abs(after.y() - target.y()) >= 1e-9) ++align_failures;
        if (spec.axes.z && std::abs(after.z() - target.z()) >= 1e-9) ++align_failures;
    }
    cr.expect(align_failures == 0, "align postcondition holds on 200 randomized cases");

    auto stool = resolve_scene(load_graph(corpus("stool.graph")));
    int legs = 0;
    for (const auto& inst : stool.instances)
        if (inst.id.rfind("leg[", 0) == 0) ++legs;
    cr.expect(legs == 4, "polar pattern instance count exact");

    auto pegboard = resolve_scene(load_graph(corpus("pegboard.graph")));
    int pegs = 0;
    for (const auto& inst : pegboard.instances)
        if (inst.id.rfind("peg[", 0) == 0) ++pegs;
    cr.expect(pegs == 6, "grid pattern instance count exact");

    int rot_failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        vec3 a = random_unit(rng);
        vec3 b;
        if (trial % 10 == 0) {
            b = -a; // exactly antiparallel: the fixed-axis pi branch
        } else if (trial % 10 == 1) {
            // nearly antiparallel but outside the 1e-6 snap window
            vec3 jitter = random_unit(rng) * 1e-4;
            b = (-a + jitter).normalized();
        } else {
            b = random_unit(rng);
        }
        quat q = rotation_aligning(a, b);
        if ((q * a - b).norm() >= 1e-9) ++rot_failures;
    }
    cr.expect(rot_failures == 0,
              "rotation_aligning maps source to target on 1000 pairs incl. antiparallel");
}

void criterion_sapcl(criterion_run& cr) {
    auto script = read_file(corpus("sapcl_mock.json"));
    nlohmann::json root = nlohmann::json::parse(script);
    auto dataset = dataset_from_json(root.at("dataset").dump());

    curriculum_config cfg;
    cfg.sample_proportion = 1.0;
    cfg.tau = 0.8;
    cfg.variants_per_level = 5;
    cfg.max_iterations = 2;
    cfg.rng_seed = 2024;

    scripted_providers mock(script);
    auto report = run_sapcl(dataset, mock.providers(), cfg);

    cr.expect(report.iterations.size() == 2, "two iterations");
    for (const auto& it : report.iterations)
        for (const auto& s : it.seeds) {
            cr.expect(s.level == 2, "seed " + s.id + " reports L=2");
            cr.expect(s.targets == std::vector<int>{2, 3}, "seed " + s.id + " targets {2,3}");
        }

    // each seed contributes 2 valid level-2 + 2 valid level-3 candidates
    if (report.iterations.size() == 2) {
        cr.expect(report.iterations[0].dataset_size_before == 4 &&
                      report.iterations[0].dataset_size_after == 20,
                  "iteration 1 grows 4 -> 20");
        cr.expect(report.iterations[1].dataset_size_after == 100, "iteration 2 grows to 100");
    }

    scripted_providers mock2(script);
    auto report2 = run_sapcl(dataset_from_json(root.at("dataset").dump()), mock2.providers(), cfg);
    cr.expect(report_to_json(report) == report_to_json(report2),
              "identical reports under the same seed");
}

} // namespace

int main() {
    harness h;
    h.run(1, "golden pipeline (dining table frames, markers, byte-stable script)", 1.0,
          criterion_golden_pipeline);
    h.run(2, "parser round-trip and 1000-case mutation fuzz", 30.0, criterion_roundtrip_and_fuzz);
    h.run(3, "Hungarian matches brute force on 500 random matrices", 10.0,
          criterion_hungarian_oracle);
    h.run(4, "NLA identity and hand-derived perturbation scores", 0.0, criterion_nla);
    h.run(5, "HLA identity, hand-derived case and guard cases", 0.0, criterion_hla);
    h.run(6, "GCS golden constraints, leg perturbations, bit determinism", 0.0, criterion_gcs);
    h.run(7, "resolver properties (align, pattern counts, rotation alignment)", 0.0,
          criterion_resolver_properties);
    h.run(8, "SAPCL mock run (boundaries, dataset arithmetic, determinism)", 5.0,
          criterion_sapcl);

    if (h.failed > 0) {
        std::printf("%d criterion(s) failed\n", h.failed);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
