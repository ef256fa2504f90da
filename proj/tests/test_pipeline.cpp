#include <doctest.h>

#include <map>

#include "dgc/emit.hpp"
#include "dgc/parser.hpp"
#include "dgc/plan.hpp"
#include "dgc/resolve.hpp"
#include "dgc/serialize.hpp"
#include "test_util.hpp"

using namespace dgc;

namespace {

/// Random but well-formed graphs: a root group, a base part, then a handful
/// of parts that align/offset against earlier ones, sometimes patterned.
graph_ast random_graph(std::mt19937_64& rng) {
    graph_ast g;
    g.materials.push_back({"matte", {0.5, 0.5, 0.5, 1}});

    auto rnd_size = [&](bool boxy) {
        if (boxy)
            return size_spec::make_box(dgc_test::uniform(rng, 0.05, 0.6),
                                       dgc_test::uniform(rng, 0.05, 0.6),
                                       dgc_test::uniform(rng, 0.05, 0.6));
        size_spec s;
        s.k = size_spec::kind::cylinder;
        s.a = dgc_test::uniform(rng, 0.05, 0.4);
        s.b = dgc_test::uniform(rng, 0.05, 0.6);
        return s;
    };

    node_record root;
    root.id = "asm";
    root.node_type = "assembly";
    root.method = create_method::group;
    g.nodes.push_back(root);

    node_record base;
    base.id = "part0";
    base.parent = "asm";
    base.node_type = "base";
    base.size = rnd_size(true);
    base.pos = offset_spec{dgc_test::uniform(rng, -1, 1), dgc_test::uniform(rng, -1, 1),
                           dgc_test::uniform(rng, 0, 1)};
    base.material = "matte";
    g.nodes.push_back(base);

    int parts = dgc_test::uniform_int(rng, 1, 5);
    constexpr feature feats[] = {feature::left,   feature::right, feature::front,
                                 feature::back,   feature::top,   feature::bottom,
                                 feature::center};
    for (int i = 1; i <= parts; ++i) {
        node_record n;
        n.id = "part" + std::to_string(i);
        n.parent = "asm";
        n.node_type = "part";
        n.size = rnd_size(dgc_test::uniform_int(rng, 0, 1) == 0);
        n.depends_on = {"part" + std::to_string(dgc_test::uniform_int(rng, 0, i - 1))};

        align_spec a;
        a.axes = {dgc_test::uniform_int(rng, 0, 1) == 1, dgc_test::uniform_int(rng, 0, 1) == 1,
                  true};
        a.this_feature = feats[dgc_test::uniform_int(rng, 0, 6)];
        a.target.ref = {n.depends_on[0], std::nullopt, false,
                        feats[dgc_test::uniform_int(rng, 0, 6)]};
        n.align = {a};

        if (dgc_test::uniform_int(rng, 0, 2) == 0)
            n.pos = offset_spec{dgc_test::uniform(rng, -0.5, 0.5),
                                dgc_test::uniform(rng, -0.5, 0.5),
                                dgc_test::uniform(rng, -0.5, 0.5)};
        if (dgc_test::uniform_int(rng, 0, 3) == 0) {
            orientation_directive d;
            constexpr axis_dir dirs[] = {axis_dir::pos_x, axis_dir::neg_x, axis_dir::pos_y,
                                         axis_dir::neg_y, axis_dir::pos_z, axis_dir::neg_z};
            d.axis = dirs[dgc_test::uniform_int(rng, 0, 5)];
            n.orientation = d;
        }
        if (i == parts && dgc_test::uniform_int(rng, 0, 2) == 0) {
            n.pattern = polar_pattern{dgc_test::uniform_int(rng, 1, 5),
                                      dgc_test::uniform(rng, 0.2, 0.8),
                                      dgc_test::uniform(rng, 0, 90),
                                      dgc_test::uniform(rng, 30, 120)};
        }
        g.nodes.push_back(std::move(n));
    }
    return g;
}

} // namespace

TEST_SUITE("pipeline") {
    TEST_CASE("randomized graphs run the whole pipeline deterministically") {
        std::mt19937_64 rng(0xD15EA5E);
        for (int trial = 0; trial < 100; ++trial) {
            auto g = random_graph(rng);

            // canonical text round-trips structurally
            auto text = serialize_graph(g);
            auto reparsed = parse_graph(text);
            REQUIRE_MESSAGE(reparsed.ok(), render_diagnostics(reparsed.diagnostics));
            REQUIRE(*reparsed.ast == g);

            auto validated = validate(*reparsed.ast);
            REQUIRE_MESSAGE(validated.ok(), render_diagnostics(validated.diagnostics));
            auto expanded = expand_patterns(*validated.graph);
            REQUIRE_MESSAGE(expanded.ok(), render_diagnostics(expanded.diagnostics));

            auto scene_a = resolve_scene(*expanded.graph);
            auto scene_b = resolve_scene(*expanded.graph);
            REQUIRE(scene_to_json(scene_a) == scene_to_json(scene_b));

            // align postcondition holds inside full scenes too: the first
            // align of every node pins the listed axes (later moves are only
            // offsets, which the generator never emits when checking = all Z)
            for (const auto& n : expanded.graph->ast.nodes) {
                if (n.align.empty() || n.pos || n.is_group()) continue;
                const instance* inst = scene_a.find(n.id);
                REQUIRE(inst != nullptr);
                const auto& spec = n.align.front();
                const feature_ref& fr = spec.target.ref;
                const instance* tgt_inst = scene_a.find(fr.node_id);
                const anchor* tgt_anchor = scene_a.find_anchor(fr.node_id);
                REQUIRE((tgt_inst || tgt_anchor));
                oriented_box tb = tgt_inst ? tgt_inst->obox() : tgt_anchor->obox();
                vec3 target = face_center_world(tb.f, tb.box, fr.feat);
                vec3 here = face_center_world(inst->f, inst->box, spec.this_feature);
                if (spec.axes.x) CHECK(std::abs(here.x() - target.x()) < 1e-9);
                if (spec.axes.y) CHECK(std::abs(here.y() - target.y()) < 1e-9);
                if (spec.axes.z) CHECK(std::abs(here.z() - target.z()) < 1e-9);
            }

            auto p = plan(*expanded.graph);
            auto actions = emit_actions(p);
            auto script = emit_script(p, "bpy");
            CHECK(actions == emit_actions(p));
            CHECK(script == emit_script(p, "bpy"));
            CHECK(actions.find("All stages complete.") != std::string::npos);

            // every non-group node is created somewhere in the script
            for (const auto& n : expanded.graph->ast.nodes) {
                if (n.is_group() || n.is_boolean()) continue;
                bool found = script.find("\"" + n.id + "\"") != std::string::npos ||
                             script.find("[{k}]") != std::string::npos;
                CHECK_MESSAGE(found, "missing ", n.id);
            }
        }
    }
}
