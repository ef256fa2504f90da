#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dgc/ast.hpp"
#include "dgc/geometry.hpp"
#include "dgc/resolve.hpp"

namespace dgc {

// ---------------------------------------------------------------------------
// Node-level alignment (NLA)
// ---------------------------------------------------------------------------

struct metric_weights {
    double w_s = 0.25, w_p = 0.25, w_o = 0.25, w_a = 0.25;
    double gamma = 1.0;
};

/// Flat view of one node for cost computation: class, size source fields,
/// position from the pos attribute, orientation restricted to the six
/// axis directions (default +Z), material.
struct node_descriptor {
    std::string id;
    std::string cls;
    size_spec size;
    vec3 position{0, 0, 0};
    axis_dir orientation = axis_dir::pos_z;
    std::optional<std::string> material;
};

/// Box sizes pass through, (d,h) kinds become (d,d,h), everything else zero.
vec3 size_vec(const size_spec& s);

double angle_deg(const vec3& a, const vec3& b);

/// Descriptors of the parts in a graph. Group nodes are structural rather
/// than parts and are excluded unless asked for.
std::vector<node_descriptor> node_descriptors(const graph_ast& g, bool include_groups = false);

/// S_max: largest SizeVec component over the ground-truth nodes.
double global_scale(const std::vector<node_descriptor>& gt);

using cost_matrix = std::vector<std::vector<double>>;

/// C[i][j] over (pred i, gt j); sizes are divided by s_max, positions by
/// max(1, s_max), orientation angle by 180. Throws ZeroScale.
cost_matrix build_cost_matrix(const std::vector<node_descriptor>& pred,
                              const std::vector<node_descriptor>& gt, double s_max,
                              const metric_weights& w);

struct assignment {
    std::vector<std::pair<int, int>> pairs; // (row, col)
    double total_cost = 0;
};

/// Min-cost assignment of min(rows, cols) pairs. Throws EmptyMatrix.
assignment hungarian(const cost_matrix& cost);

/// Injective partial mapping pred_id -> gt_id.
struct alias_mapping {
    std::map<std::string, std::string> pred_to_gt;
};

/// Lowercase, bracket indices and non-alphanumerics stripped.
std::string normalize_part_name(const std::string& name);

/// Deterministic stand-in for the judgement-based aliasing: exact id match,
/// then unique normalized match, then class-wise greedy nearest position.
alias_mapping default_alias_mapping(const graph_ast& gt, const graph_ast& pred);

struct nla_report {
    double score = 0; // mean assignment cost; lower is better
    std::vector<std::pair<std::string, std::string>> pairs; // (pred id, gt id)
    int unmatched_pred = 0;
    int unmatched_gt = 0;
};

nla_report nla(const graph_ast& gt, const graph_ast& pred, const alias_mapping& mapping,
               const metric_weights& w);

// ---------------------------------------------------------------------------
// Hierarchy-level accuracy (HLA)
// ---------------------------------------------------------------------------

struct hla_config {
    double alpha = 0.5;
};

using edge_list = std::vector<std::pair<std::string, std::string>>; // (parent, child)

/// Breadth-first depths from the root set (nodes that never appear as a
/// child; falling back to layer-0 nodes, then all nodes). Unreached -> 0.
std::map<std::string, int> compute_depths(const std::vector<std::string>& nodes,
                                          const edge_list& edges,
                                          const std::map<std::string, int>* layers = nullptr);

double edge_f1(const edge_list& pred_edges, const edge_list& gt_edges,
               const alias_mapping& mapping);

/// Mean of exp(-|d_P - d_G|) over mapped pred nodes; 0 when none map.
double depth_consistency(const std::vector<std::string>& pred_nodes,
                         const std::map<std::string, int>& pred_depths,
                         const std::map<std::string, int>& gt_depths,
                         const alias_mapping& mapping);

struct hla_report {
    double hla = 0;
    double edge_f1 = 0;
    double depth_score = 0;
};

hla_report hla(const std::vector<std::string>& gt_nodes, const edge_list& gt_edges,
               const std::vector<std::string>& pred_nodes, const edge_list& pred_edges,
               const alias_mapping& mapping, const hla_config& cfg,
               const std::map<std::string, int>* gt_layers = nullptr,
               const std::map<std::string, int>* pred_layers = nullptr);

/// Graph-file flavor: parent edges, record layers.
hla_report hla_graphs(const graph_ast& gt, const graph_ast& pred, const alias_mapping& mapping,
                      const hla_config& cfg);

edge_list parent_edges_of(const graph_ast& g);

// ---------------------------------------------------------------------------
// Geometric constraint satisfaction (GCS)
// ---------------------------------------------------------------------------

enum class gcs_kind { contact, above, below, aligned_axis, relative_orientation };

struct gcs_constraint {
    gcs_kind kind = gcs_kind::contact;
    std::string part_a;
    std::string part_b;
    double tolerance = 1e-3; // metres: contact gap / XY-overlap slack / axis offset
    char axis = 'Z';         // aligned_axis: centers coincide on the other two axes
    axis_dir axis_a = axis_dir::pos_z; // relative_orientation local axes
    axis_dir axis_b = axis_dir::pos_z;
    double angle_deg = 0;      // relative_orientation target angle
    double tolerance_deg = 5.0;
};

struct gcs_defaults {
    double contact_tol = 1e-3;
    double angle_tol_deg = 5.0;
};

enum class gcs_status { pass, fail, skipped };

struct gcs_bit {
    std::size_t index = 0;
    gcs_status status = gcs_status::skipped;
    std::string note;
};

struct gcs_sample {
    std::vector<gcs_bit> bits;
    int evaluated = 0;
    int passed = 0;
    bool has_constraints = false;

    double score() const { return evaluated > 0 ? double(passed) / evaluated : 0.0; }
};

/// Maps a constraint part name to a scene part id (instances and anchors;
/// cutters are not parts). Returns nullopt when unmappable.
using name_mapper =
    std::function<std::optional<std::string>(const std::string&, const resolved_scene&)>;

name_mapper default_name_mapper();

/// Numeric evaluation on world-space oriented extent boxes; each constraint
/// yields pass/fail, unmappable names skip the bit with a note.
gcs_sample gcs_eval(const resolved_scene& scene, const std::vector<gcs_constraint>& constraints,
                    const name_mapper& mapper = default_name_mapper());

/// Constraint file: JSON array of {kind, a|part_a, b|part_b, tol, ...}.
std::vector<gcs_constraint> parse_constraints(const std::string& text, const gcs_defaults& defs);

/// Mapping file: JSON object {"pred_id": "gt_id", ...}.
alias_mapping parse_mapping(const std::string& text);

} // namespace dgc
