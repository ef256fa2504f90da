#include <doctest.h>

#include "dgc/parser.hpp"
#include "dgc/serialize.hpp"
#include "test_util.hpp"

using namespace dgc;

TEST_SUITE("parser/materials") {
    TEST_CASE("material line with padded columns") {
        auto res = parse_materials("table_wood     | diffuse_color=(0.60,0.40,0.25,1)");
        REQUIRE(res.ok());
        REQUIRE(res.materials.size() == 1);
        CHECK(res.materials[0].name == "table_wood");
        CHECK(res.materials[0].rgba[0] == doctest::Approx(0.60));
        CHECK(res.materials[0].rgba[3] == 1.0);
    }

    TEST_CASE("empty region gives an empty list") {
        auto res = parse_materials("");
        CHECK(res.ok());
        CHECK(res.materials.empty());
    }

    TEST_CASE("out-of-range channel is MalformedRgba") {
        auto res = parse_materials("m | diffuse_color=(1,2,0,1)");
        REQUIRE_FALSE(res.ok());
        CHECK(res.diagnostics[0].code == diag_code::malformed_rgba);
    }

    TEST_CASE("wrong channel count is MalformedRgba") {
        auto res = parse_materials("m | diffuse_color=(1,0,0)");
        REQUIRE_FALSE(res.ok());
        CHECK(res.diagnostics[0].code == diag_code::malformed_rgba);
    }

    TEST_CASE("duplicate names rejected") {
        auto res = parse_materials("m | diffuse_color=(1,0,0,1)\nm | diffuse_color=(0,1,0,1)");
        REQUIRE_FALSE(res.ok());
        CHECK(res.diagnostics[0].code == diag_code::duplicate_material_name);
        CHECK(res.diagnostics[0].line == 2);
    }
}

TEST_SUITE("parser/graph") {
    TEST_CASE("dining table corpus parses") {
        auto res = parse_graph(dgc_test::read_file(dgc_test::corpus_path("dining_table.graph")));
        REQUIRE(res.ok());
        const auto& g = *res.ast;
        REQUIRE(g.materials.size() == 2);
        REQUIRE(g.nodes.size() == 6);

        const auto& root = g.nodes[0];
        CHECK(root.id == "dining_table");
        CHECK_FALSE(root.parent.has_value());
        CHECK(root.method == create_method::group);
        REQUIRE(root.assembly_order.has_value());
        REQUIRE(root.assembly_order->size() == 2);
        CHECK((*root.assembly_order)[0] == std::vector<std::string>{"tabletop"});
        CHECK((*root.assembly_order)[1] ==
              std::vector<std::string>{"leg_fl", "leg_fr", "leg_bl", "leg_br"});

        const auto& top = g.nodes[1];
        CHECK(top.layer == 1);
        REQUIRE(top.pos.has_value());
        const auto& off = std::get<offset_spec>(*top.pos);
        CHECK(off.dz == 0.75);
        CHECK(top.material == "table_wood");
        CHECK(top.method == create_method::primitive);
        REQUIRE(top.orientation.has_value());
        CHECK(top.orientation->k == orientation_directive::kind::fixed_axis);
        CHECK(top.orientation->axis == axis_dir::pos_z);

        const auto& leg = g.nodes[2];
        REQUIRE(leg.align.size() == 1);
        CHECK(leg.align[0].axes.all());
        CHECK(leg.align[0].this_feature == feature::top);
        CHECK(leg.align[0].target.ref.node_id == "tabletop");
        CHECK(leg.align[0].target.ref.feat == feature::bottom);
    }

    TEST_CASE("parent=- means root") {
        auto res = parse_graph("# BEGIN_GRAPH\nL0: id=a | parent=- | type=t | size=box(1,1,1)\n"
                               "# END_GRAPH\n");
        REQUIRE(res.ok());
        CHECK_FALSE(res.ast->nodes[0].parent.has_value());
    }

    TEST_CASE("duplicate node id") {
        auto res = parse_graph(
            "# BEGIN_GRAPH\n"
            "L0: id=leg_fl | parent=- | type=t | size=box(1,1,1)\n"
            "L0: id=leg_fl | parent=- | type=t | size=box(1,1,1)\n"
            "# END_GRAPH\n");
        REQUIRE_FALSE(res.ok());
        CHECK(res.diagnostics[0].code == diag_code::duplicate_node_id);
        CHECK(res.diagnostics[0].line == 3);
    }

    TEST_CASE("unknown keys rejected with position") {
        auto res = parse_graph("# BEGIN_GRAPH\nL0: id=a | wat=1\n# END_GRAPH\n");
        REQUIRE_FALSE(res.ok());
        CHECK(res.diagnostics[0].code == diag_code::unknown_key);
        CHECK(res.diagnostics[0].line == 2);
        CHECK(res.diagnostics[0].column > 1);
    }

    TEST_CASE("missing id field") {
        auto res = parse_graph("# BEGIN_GRAPH\nL0: parent=- | type=t\n# END_GRAPH\n");
        REQUIRE_FALSE(res.ok());
        CHECK(res.diagnostics[0].code == diag_code::missing_id_field);
    }

    TEST_CASE("unterminated graph block") {
        auto res = parse_graph("# BEGIN_GRAPH\nL0: id=a\n");
        REQUIRE_FALSE(res.ok());
        CHECK(res.diagnostics[0].code == diag_code::unterminated_block);
    }

    TEST_CASE("unterminated material block") {
        auto res = parse_graph("-- MATERIAL LIBRARY --\nm | diffuse_color=(1,1,1,1)\n");
        REQUIRE_FALSE(res.ok());
        CHECK(res.diagnostics[0].code == diag_code::unterminated_block);
    }

    TEST_CASE("bare tuple pos is offset shorthand") {
        auto res = parse_graph("# BEGIN_GRAPH\n"
                               "L0: id=tabletop | parent=- | type=t | size=box(2,1,0.04) | "
                               "pos=(0,0,0.75)\n"
                               "# END_GRAPH\n");
        REQUIRE(res.ok());
        const auto& off = std::get<offset_spec>(*res.ast->nodes[0].pos);
        CHECK(off.dz == 0.75);
    }

    TEST_CASE("rotation, size aliases and bare-id targets") {
        auto res = parse_graph(
            "# BEGIN_GRAPH\n"
            "L0: id=a | parent=- | type=t | size=cyl(0.1, 0.4) | rotation=Z:45 | "
            "align=Align a.centre to b\n"
            "L0: id=b | parent=- | type=t | size=box(1,1,1)\n"
            "# END_GRAPH\n");
        REQUIRE_MESSAGE(res.ok(), render_diagnostics(res.diagnostics));
        const auto& a = res.ast->nodes[0];
        CHECK(a.size.k == size_spec::kind::cylinder);
        REQUIRE(a.rotation.has_value());
        CHECK(a.rotation->axis == 'Z');
        CHECK(a.rotation->angle_deg == 45.0);
        REQUIRE(a.align.size() == 1);
        CHECK(a.align[0].this_feature == feature::center);
        CHECK(a.align[0].target.ref.feat == feature::center); // bare id -> center
    }

    TEST_CASE("expanded instance ids parse and round-trip") {
        auto res = parse_graph("# BEGIN_GRAPH\n"
                               "L0: id=leg[2] | parent=- | type=leg | size=box(1,1,1)\n"
                               "# END_GRAPH\n");
        REQUIRE(res.ok());
        CHECK(res.ast->nodes[0].id == "leg[2]");
        auto canonical = serialize_graph(*res.ast);
        auto again = parse_graph(canonical);
        REQUIRE(again.ok());
        CHECK(*again.ast == *res.ast);
    }

    TEST_CASE("records may wrap onto continuation lines") {
        auto res = parse_graph(
            "# BEGIN_GRAPH\n"
            "L0: id=a | parent=- | type=t\n"
            "    | size=box(1,2,3) | mat=-\n"
            "# END_GRAPH\n");
        REQUIRE(res.ok());
        CHECK(res.ast->nodes[0].size.k == size_spec::kind::box);
        CHECK(res.ast->nodes[0].size.b == 2.0);
    }

    TEST_CASE("duplicate key in one record is an error") {
        auto res = parse_graph("# BEGIN_GRAPH\nL0: id=a | type=t | type=u\n# END_GRAPH\n");
        REQUIRE_FALSE(res.ok());
        CHECK(res.diagnostics[0].code == diag_code::syntax_error);
    }
}

TEST_SUITE("parser/placement") {
    TEST_CASE("offset expression") {
        auto res = parse_placement("offset(-0.96, 0.46, 0)");
        REQUIRE(res.ok());
        const auto& o = std::get<offset_spec>(*res.expr);
        CHECK(o.dx == -0.96);
        CHECK(o.dy == 0.46);
        CHECK(o.dz == 0.0);
    }

    TEST_CASE("align without an axis list covers all axes") {
        auto res = parse_placement("Align leg_fl.top_face to tabletop.bottom_face");
        REQUIRE(res.ok());
        const auto& a = std::get<align_spec>(*res.expr);
        CHECK(a.axes.all());
        CHECK(a.this_feature == feature::top);
        CHECK(a.target.ref.node_id == "tabletop");
        CHECK(a.target.ref.feat == feature::bottom);
    }

    TEST_CASE("axis subset align") {
        auto res = parse_placement("Align(XZ) a.left_face to b.right_face");
        REQUIRE(res.ok());
        const auto& a = std::get<align_spec>(*res.expr);
        CHECK(a.axes.x);
        CHECK_FALSE(a.axes.y);
        CHECK(a.axes.z);
    }

    TEST_CASE("polar pattern with named parameters") {
        auto res =
            parse_placement("pattern=polar(count:4, radius:0.5, start_angle:0, angle_step:90)");
        REQUIRE(res.ok());
        const auto& p = std::get<polar_pattern>(std::get<pattern_spec>(*res.expr));
        CHECK(p.count == 4);
        CHECK(p.radius == 0.5);
        CHECK(p.start_angle_deg == 0.0);
        CHECK(p.angle_step_deg == 90.0);
    }

    TEST_CASE("grid pattern") {
        auto res = parse_placement(
            "grid(rows:2, cols:3, x_spacing:0.1, y_spacing:0.2, start_offset:(0,0))");
        REQUIRE(res.ok());
        const auto& g = std::get<grid_pattern>(std::get<pattern_spec>(*res.expr));
        CHECK(g.rows == 2);
        CHECK(g.cols == 3);
        CHECK(g.x_spacing == 0.1);
    }

    TEST_CASE("polar position form") {
        auto res = parse_placement("polar(30; dr=0.5)");
        REQUIRE(res.ok());
        const auto& p = std::get<polar_spec>(*res.expr);
        CHECK(p.theta_deg == 30.0);
        CHECK(p.dr == 0.5);
    }

    TEST_CASE("connect form") {
        auto res = parse_placement("connect = post.top_face + ball.center");
        REQUIRE(res.ok());
        const auto& c = std::get<connect_spec>(*res.expr);
        CHECK(c.a.node_id == "post");
        CHECK(c.a.feat == feature::top);
        CHECK(c.b.feat == feature::center);
    }

    TEST_CASE("orientation directives") {
        auto fixed = parse_placement("axis:-Y");
        REQUIRE(fixed.ok());
        CHECK(std::get<orientation_directive>(*fixed.expr).axis == axis_dir::neg_y);

        auto radial = parse_placement("axis:radial_from hub");
        REQUIRE(radial.ok());
        CHECK(std::get<orientation_directive>(*radial.expr).k ==
              orientation_directive::kind::radial_from);
        CHECK(std::get<orientation_directive>(*radial.expr).ref_id == "hub");

        auto face = parse_placement("+Z_face:align lid.+Z_face");
        REQUIRE(face.ok());
        CHECK(std::get<orientation_directive>(*face.expr).k ==
              orientation_directive::kind::face_align);
    }

    TEST_CASE("unknown feature name carries the right code") {
        auto res = parse_placement("Align a.topmost to b.bottom_face");
        REQUIRE_FALSE(res.ok());
        CHECK(res.diagnostics[0].code == diag_code::unknown_feature_name);
    }

    TEST_CASE("unknown directive carries the right code") {
        auto res = parse_placement("axis:spiral_about hub");
        REQUIRE_FALSE(res.ok());
        CHECK(res.diagnostics[0].code == diag_code::unknown_directive);
    }

    TEST_CASE("star and average targets") {
        auto star = parse_placement("Align(Z) cap.bottom_face to peg[*].top_face");
        REQUIRE(star.ok());
        CHECK(std::get<align_spec>(*star.expr).target.ref.all_instances);

        auto avg = parse_placement("Align a.center to Avg(b.top_face, c[2].top_face)");
        REQUIRE(avg.ok());
        const auto& t = std::get<align_spec>(*avg.expr).target;
        CHECK(t.k == target_ref::kind::average);
        REQUIRE(t.avg.size() == 2);
        CHECK(t.avg[1].index == 2);
    }
}

TEST_SUITE("parser/roundtrip") {
    static void check_roundtrip(const std::string& name) {
        auto text = dgc_test::read_file(dgc_test::corpus_path(name));
        auto first = parse_graph(text);
        REQUIRE_MESSAGE(first.ok(), name, ": ", render_diagnostics(first.diagnostics));
        auto canonical = serialize_graph(*first.ast);
        auto second = parse_graph(canonical);
        REQUIRE_MESSAGE(second.ok(), name, " reparse: ", render_diagnostics(second.diagnostics));
        CHECK_MESSAGE(*first.ast == *second.ast, name, " round-trip mismatch");
        // canonical form is a fixed point
        CHECK(serialize_graph(*second.ast) == canonical);
    }

    TEST_CASE("corpus graphs round-trip") {
        for (const char* name : {"dining_table.graph", "stool.graph", "pegboard.graph",
                                 "bracket.graph", "wheel.graph"})
            check_roundtrip(name);
    }

    TEST_CASE("empty graph serializes to bare markers") {
        graph_ast g;
        auto text = serialize_graph(g);
        CHECK(text.find("MATERIAL LIBRARY") != std::string::npos);
        CHECK(text.find("BEGIN_GRAPH") != std::string::npos);
        CHECK(text.find("END_GRAPH") != std::string::npos);
        auto res = parse_graph(text);
        REQUIRE(res.ok());
        CHECK(res.ast->nodes.empty());
    }

    TEST_CASE("pattern clause keeps all five grid parameters") {
        auto text = dgc_test::read_file(dgc_test::corpus_path("pegboard.graph"));
        auto parsed = parse_graph(text);
        REQUIRE(parsed.ok());
        auto canonical = serialize_graph(*parsed.ast);
        CHECK(canonical.find("grid(rows:2, cols:3, x_spacing:0.1, y_spacing:0.12, "
                             "start_offset:(-0.1, -0.06))") != std::string::npos);
    }
}

TEST_SUITE("parser/fuzz") {
    /// Mutated records must either parse or produce spanned diagnostics.
    TEST_CASE("record mutations never crash and always carry spans") {
        auto base = dgc_test::read_file(dgc_test::corpus_path("dining_table.graph"));
        std::mt19937_64 rng(20250811);
        const std::string printable =
            "abcdefghijklmnopqrstuvwxyz0123456789|=()-.,:[]* _";

        for (int trial = 0; trial < 1000; ++trial) {
            std::string text = base;
            int edits = 1 + dgc_test::uniform_int(rng, 0, 3);
            for (int e = 0; e < edits; ++e) {
                if (text.empty()) break;
                std::size_t pos = static_cast<std::size_t>(
                    dgc_test::uniform_int(rng, 0, static_cast<int>(text.size()) - 1));
                switch (dgc_test::uniform_int(rng, 0, 3)) {
                    case 0: text.erase(pos, 1); break;
                    case 1:
                        text.insert(pos, 1,
                                    printable[static_cast<std::size_t>(dgc_test::uniform_int(
                                        rng, 0, static_cast<int>(printable.size()) - 1))]);
                        break;
                    case 2:
                        text[pos] = printable[static_cast<std::size_t>(dgc_test::uniform_int(
                            rng, 0, static_cast<int>(printable.size()) - 1))];
                        break;
                    case 3: text.erase(pos, std::min<std::size_t>(17, text.size() - pos)); break;
                }
            }
            auto res = parse_graph(text); // must not throw
            if (!res.diagnostics.empty()) {
                for (const auto& d : res.diagnostics) {
                    CHECK(d.line >= 1);
                    CHECK(d.column >= 1);
                }
            }
        }
    }
}
