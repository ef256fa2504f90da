#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include "dgc/curriculum.hpp"
#include "dgc/emit.hpp"
#include "dgc/metrics.hpp"
#include "dgc/parser.hpp"
#include "dgc/plan.hpp"
#include "dgc/resolve.hpp"
#include "dgc/serialize.hpp"
#include "dgc/validate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << content;
}

void write_or_print(const std::string& path, const std::string& content) {
    if (path.empty()) std::cout << content;
    else write_file(path, content);
}

struct pipeline_error {
    std::vector<dgc::diagnostic> diagnostics;
};

/// parse + validate + expand, or throw pipeline_error with the report.
dgc::validated_graph load_graph(const std::string& path) {
    auto parsed = dgc::parse_graph(read_file(path));
    if (!parsed.diagnostics.empty() || !parsed.ast) throw pipeline_error{parsed.diagnostics};
    auto validated = dgc::validate(*parsed.ast);
    if (!validated.ok()) throw pipeline_error{validated.diagnostics};
    auto expanded = dgc::expand_patterns(*validated.graph);
    if (!expanded.ok()) throw pipeline_error{expanded.diagnostics};
    return std::move(*expanded.graph);
}

dgc::graph_ast load_ast(const std::string& path) {
    auto parsed = dgc::parse_graph(read_file(path));
    if (!parsed.diagnostics.empty() || !parsed.ast) throw pipeline_error{parsed.diagnostics};
    return std::move(*parsed.ast);
}

struct eval_config {
    dgc::metric_weights weights;
    dgc::hla_config hla;
    dgc::gcs_defaults gcs;
};

eval_config load_config(const std::string& path) {
    eval_config cfg;
    if (path.empty()) return cfg;
    json root = json::parse(read_file(path));
    if (root.contains("weights")) {
        const auto& w = root.at("weights");
        cfg.weights.w_s = w.value("w_s", cfg.weights.w_s);
        cfg.weights.w_p = w.value("w_p", cfg.weights.w_p);
        cfg.weights.w_o = w.value("w_o", cfg.weights.w_o);
        cfg.weights.w_a = w.value("w_a", cfg.weights.w_a);
        cfg.weights.gamma = w.value("gamma", cfg.weights.gamma);
    }
    if (root.contains("hla")) cfg.hla.alpha = root.at("hla").value("alpha", cfg.hla.alpha);
    if (root.contains("gcs")) {
        cfg.gcs.contact_tol = root.at("gcs").value("contact_tol", cfg.gcs.contact_tol);
        cfg.gcs.angle_tol_deg = root.at("gcs").value("angle_tol_deg", cfg.gcs.angle_tol_deg);
    }
    return cfg;
}

dgc::alias_mapping mapping_for(const std::string& path, const dgc::graph_ast& gt,
                               const dgc::graph_ast& pred) {
    if (!path.empty()) return dgc::parse_mapping(read_file(path));
    return dgc::default_alias_mapping(gt, pred);
}

json gcs_sample_json(const dgc::gcs_sample& sample) {
    json out;
    out["status"] = sample.has_constraints ? "ok" : "no_constraints";
    out["evaluated"] = sample.evaluated;
    out["passed"] = sample.passed;
    out["score"] = sample.score();
    json bits = json::array();
    for (const auto& b : sample.bits) {
        json jb;
        jb["index"] = b.index;
        jb["status"] = b.status == dgc::gcs_status::pass   ? "pass"
                       : b.status == dgc::gcs_status::fail ? "fail"
                                                           : "skipped";
        if (!b.note.empty()) jb["note"] = b.note;
        bits.push_back(std::move(jb));
    }
    out["bits"] = bits;
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"decomposition-graph compiler and evaluation toolkit"};
    app.require_subcommand(1);

    std::string in_path, out_path, out_dir = ".";
    std::string gt_path, pred_path, mapping_path, config_path;
    std::string scene_path, constraints_path, scene_dir, constraints_dir;
    std::string dialect = "bpy", mock_path, dataset_path, graph_path;
    double alpha_flag = -1;
    double w_s = -1, w_p = -1, w_o = -1, w_a = -1, gamma = -1;
    double contact_tol = -1, angle_tol = -1;
    dgc::curriculum_config cur_cfg;
    int jobs = 4;

    auto* cmd_parse = app.add_subcommand("parse", "parse a graph file, print canonical text");
    cmd_parse->add_option("file", in_path)->required();
    cmd_parse->add_option("-o,--out", out_path, "write canonical text here");

    auto* cmd_check = app.add_subcommand("check", "parse and validate; report diagnostics");
    cmd_check->add_option("file", in_path)->required();

    auto* cmd_resolve = app.add_subcommand("resolve", "resolve placements into a scene JSON");
    cmd_resolve->add_option("file", in_path)->required();
    cmd_resolve->add_option("-o,--out", out_path);

    auto* cmd_plan = app.add_subcommand("plan", "lower a graph to action text");
    cmd_plan->add_option("file", in_path)->required();
    cmd_plan->add_option("-o,--out", out_path);

    auto* cmd_emit = app.add_subcommand("emit", "emit an executable script");
    cmd_emit->add_option("file", in_path)->required();
    cmd_emit->add_option("--dialect", dialect, "target dialect (bpy)");
    cmd_emit->add_option("-o,--out", out_path);

    auto* cmd_compile = app.add_subcommand("compile", "full pipeline, all artifacts");
    cmd_compile->add_option("file", in_path)->required();
    cmd_compile->add_option("--out-dir", out_dir);

    auto* cmd_eval = app.add_subcommand("eval", "graph/scene metrics");
    auto* cmd_nla = cmd_eval->add_subcommand("nla", "node-level assignment cost");
    cmd_nla->add_option("--gt", gt_path)->required();
    cmd_nla->add_option("--pred", pred_path)->required();
    cmd_nla->add_option("--mapping", mapping_path);
    cmd_nla->add_option("--config", config_path);
    cmd_nla->add_option("--w-s", w_s, "size weight");
    cmd_nla->add_option("--w-p", w_p, "position weight");
    cmd_nla->add_option("--w-o", w_o, "orientation weight");
    cmd_nla->add_option("--w-a", w_a, "attribute weight");
    cmd_nla->add_option("--gamma", gamma, "attribute penalty");
    cmd_nla->add_option("-o,--out", out_path);

    auto* cmd_hla = cmd_eval->add_subcommand("hla", "hierarchy-level accuracy");
    cmd_hla->add_option("--gt", gt_path)->required();
    cmd_hla->add_option("--pred", pred_path)->required();
    cmd_hla->add_option("--mapping", mapping_path);
    cmd_hla->add_option("--config", config_path);
    cmd_hla->add_option("--alpha", alpha_flag, "EdgeF1 weight in [0,1]");
    cmd_hla->add_option("-o,--out", out_path);

    auto* cmd_gcs = cmd_eval->add_subcommand("gcs", "geometric constraint satisfaction");
    cmd_gcs->add_option("--scene", scene_path, "scene JSON (resolver export)");
    cmd_gcs->add_option("--graph", graph_path, "graph file, resolved in-process");
    cmd_gcs->add_option("--constraints", constraints_path);
    cmd_gcs->add_option("--scene-dir", scene_dir);
    cmd_gcs->add_option("--constraints-dir", constraints_dir);
    cmd_gcs->add_option("--config", config_path);
    cmd_gcs->add_option("--contact-tol", contact_tol, "default contact tolerance, metres");
    cmd_gcs->add_option("--angle-tol", angle_tol, "default orientation tolerance, degrees");
    cmd_gcs->add_option("--jobs", jobs);
    cmd_gcs->add_option("-o,--out", out_path);

    auto* cmd_cur = app.add_subcommand("curriculum", "curriculum control loop");
    auto* cmd_run = cmd_cur->add_subcommand("run", "run the loop with scripted providers");
    cmd_run->add_option("--mock", mock_path, "scripted provider JSON")->required();
    cmd_run->add_option("--dataset", dataset_path, "dataset JSON (overrides the script's)");
    cmd_run->add_option("--alpha", cur_cfg.sample_proportion);
    cmd_run->add_option("--tau", cur_cfg.tau);
    cmd_run->add_option("-k,--variants", cur_cfg.variants_per_level);
    cmd_run->add_option("--max-iterations", cur_cfg.max_iterations);
    cmd_run->add_option("--seed", cur_cfg.rng_seed);
    cmd_run->add_option("-o,--out", out_path);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (*cmd_parse) {
            auto parsed = dgc::parse_graph(read_file(in_path));
            if (!parsed.diagnostics.empty() || !parsed.ast) {
                std::cout << dgc::diagnostics_to_json(parsed.diagnostics) << "\n";
                return kExitDomain;
            }
            write_or_print(out_path, dgc::serialize_graph(*parsed.ast));
            return kExitOk;
        }
        if (*cmd_check) {
            try {
                (void)load_graph(in_path);
            } catch (const pipeline_error& pe) {
                std::cout << dgc::diagnostics_to_json(pe.diagnostics) << "\n";
                return kExitDomain;
            }
            std::cout << "[]\n"; // empty diagnostics report
            return kExitOk;
        }
        if (*cmd_resolve) {
            auto vg = load_graph(in_path);
            write_or_print(out_path, dgc::scene_to_json(dgc::resolve_scene(vg)) + "\n");
            return kExitOk;
        }
        if (*cmd_plan) {
            auto vg = load_graph(in_path);
            write_or_print(out_path, dgc::emit_actions(dgc::plan(vg)));
            return kExitOk;
        }
        if (*cmd_emit) {
            auto vg = load_graph(in_path);
            write_or_print(out_path, dgc::emit_script(dgc::plan(vg), dialect));
            return kExitOk;
        }
        if (*cmd_compile) {
            auto ast = load_ast(in_path); // canonical text keeps pattern templates
            auto vg = load_graph(in_path);
            fs::create_directories(out_dir);
            std::string stem = fs::path(in_path).stem().string();
            auto base = fs::path(out_dir) / stem;
            write_file(base.string() + ".canonical.graph", dgc::serialize_graph(ast));
            write_file(base.string() + ".scene.json",
                       dgc::scene_to_json(dgc::resolve_scene(vg)) + "\n");
            auto p = dgc::plan(vg);
            write_file(base.string() + ".actions.txt", dgc::emit_actions(p));
            write_file(base.string() + ".bpy.py", dgc::emit_script(p, "bpy"));
            std::cout << "wrote 4 artifacts to " << fs::path(out_dir).string() << "\n";
            return kExitOk;
        }
        if (*cmd_nla) {
            auto cfg = load_config(config_path);
            if (w_s >= 0) cfg.weights.w_s = w_s;
            if (w_p >= 0) cfg.weights.w_p = w_p;
            if (w_o >= 0) cfg.weights.w_o = w_o;
            if (w_a >= 0) cfg.weights.w_a = w_a;
            if (gamma >= 0) cfg.weights.gamma = gamma;
            auto gt = load_ast(gt_path);
            auto pred = load_ast(pred_path);
            auto mapping = mapping_for(mapping_path, gt, pred);
            auto rep = dgc::nla(gt, pred, mapping, cfg.weights);
            json out;
            out["nla"] = rep.score;
            out["matched_pairs"] = rep.pairs.size();
            json pairs = json::array();
            for (const auto& [p, g] : rep.pairs) pairs.push_back({p, g});
            out["pairs"] = pairs;
            out["unmatched_pred"] = rep.unmatched_pred;
            out["unmatched_gt"] = rep.unmatched_gt;
            write_or_print(out_path, out.dump(2) + "\n");
            return kExitOk;
        }
        if (*cmd_hla) {
            auto cfg = load_config(config_path);
            if (alpha_flag >= 0) cfg.hla.alpha = alpha_flag;
            auto gt = load_ast(gt_path);
            auto pred = load_ast(pred_path);
            auto mapping = mapping_for(mapping_path, gt, pred);
            auto rep = dgc::hla_graphs(gt, pred, mapping, cfg.hla);
            json out;
            out["hla"] = rep.hla;
            out["edge_f1"] = rep.edge_f1;
            out["depth_score"] = rep.depth_score;
            out["alpha"] = cfg.hla.alpha;
            write_or_print(out_path, out.dump(2) + "\n");
            return kExitOk;
        }
        if (*cmd_gcs) {
            auto cfg = load_config(config_path);
            if (contact_tol >= 0) cfg.gcs.contact_tol = contact_tol;
            if (angle_tol >= 0) cfg.gcs.angle_tol_deg = angle_tol;
            if (!scene_dir.empty() || !constraints_dir.empty()) {
                if (scene_dir.empty() || constraints_dir.empty()) {
                    std::cerr << "--scene-dir and --constraints-dir go together\n";
                    return kExitUsage;
                }
                std::vector<std::pair<std::string, fs::path>> samples;
                for (const auto& entry : fs::directory_iterator(scene_dir)) {
                    if (entry.path().extension() != ".json") continue;
                    std::string stem = entry.path().stem().string();
                    // strip a trailing ".scene" from "<name>.scene.json"
                    if (stem.size() > 6 && stem.ends_with(".scene"))
                        stem = stem.substr(0, stem.size() - 6);
                    fs::path cpath = fs::path(constraints_dir) / (stem + ".constraints.json");
                    if (!fs::exists(cpath)) cpath = fs::path(constraints_dir) / (stem + ".json");
                    if (fs::exists(cpath)) samples.emplace_back(entry.path().string(), cpath);
                }
                std::sort(samples.begin(), samples.end());

                std::vector<std::future<dgc::gcs_sample>> futures;
                std::vector<json> rows(samples.size());
                std::size_t next = 0;
                while (next < samples.size()) {
                    std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(jobs),
                                                              samples.size() - next);
                    futures.clear();
                    for (std::size_t i = 0; i < batch; ++i) {
                        auto [spath, cpath] = samples[next + i];
                        futures.push_back(std::async(std::launch::async, [&, spath, cpath] {
                            auto scene = dgc::scene_from_json(read_file(spath));
                            auto cons = dgc::parse_constraints(read_file(cpath.string()), cfg.gcs);
                            return dgc::gcs_eval(scene, cons);
                        }));
                    }
                    for (std::size_t i = 0; i < batch; ++i) {
                        auto sample = futures[i].get();
                        json row = gcs_sample_json(sample);
                        row["scene"] = samples[next + i].first;
                        rows[next + i] = std::move(row);
                    }
                    next += batch;
                }
                double sum = 0;
                int counted = 0;
                json out;
                out["samples"] = rows;
                for (const auto& row : rows) {
                    if (row.at("status") == "ok") {
                        sum += row.at("score").get<double>();
                        ++counted;
                    }
                }
                out["corpus_gcs"] = counted > 0 ? sum / counted : 0.0;
                out["counted_samples"] = counted;
                write_or_print(out_path, out.dump(2) + "\n");
                return kExitOk;
            }
            if ((scene_path.empty() && graph_path.empty()) || constraints_path.empty()) {
                std::cerr
                    << "eval gcs needs --scene or --graph, plus --constraints (or the -dir pair)\n";
                return kExitUsage;
            }
            dgc::resolved_scene scene;
            if (!graph_path.empty())
                scene = dgc::resolve_scene(load_graph(graph_path));
            else
                scene = dgc::scene_from_json(read_file(scene_path));
            auto cons = dgc::parse_constraints(read_file(constraints_path), cfg.gcs);
            auto sample = dgc::gcs_eval(scene, cons);
            write_or_print(out_path, gcs_sample_json(sample).dump(2) + "\n");
            return kExitOk;
        }
        if (*cmd_run) {
            std::string script = read_file(mock_path);
            dgc::scripted_providers mock(script);
            std::vector<dgc::seed_record> dataset;
            if (!dataset_path.empty()) {
                dataset = dgc::dataset_from_json(read_file(dataset_path));
            } else {
                json root = json::parse(script);
                if (!root.contains("dataset")) {
                    std::cerr << "no --dataset given and the mock script embeds none\n";
                    return kExitUsage;
                }
                dataset = dgc::dataset_from_json(root.at("dataset").dump());
            }
            auto report = dgc::run_sapcl(std::move(dataset), mock.providers(), cur_cfg);
            write_or_print(out_path, dgc::report_to_json(report) + "\n");
            return kExitOk;
        }
    } catch (const pipeline_error& pe) {
        std::cout << dgc::diagnostics_to_json(pe.diagnostics) << "\n";
        return kExitDomain;
    } catch (const dgc::domain_error& e) {
        json out = json::array();
        out.push_back({{"code", dgc::diag_code_name(e.code())},
                       {"message", e.what()},
                       {"line", 0},
                       {"column", 0}});
        std::cout << out.dump(2) << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }

    std::cerr << "no subcommand handled\n";
    return kExitUsage;
}
