#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "dgc/ast.hpp"
#include "dgc/diagnostics.hpp"

namespace dgc {

struct parse_result {
    std::optional<graph_ast> ast;
    std::vector<diagnostic> diagnostics;

    bool ok() const { return ast.has_value() && diagnostics.empty(); }
};

struct materials_result {
    std::vector<material_def> materials;
    std::vector<diagnostic> diagnostics;

    bool ok() const { return diagnostics.empty(); }
};

struct placement_result {
    std::optional<placement_expr> expr;
    std::vector<diagnostic> diagnostics;

    bool ok() const { return expr.has_value() && diagnostics.empty(); }
};

/// Parses the region between the material-library header and #END_MATERIALS:
/// one `name | diffuse_color=(R,G,B,A)` definition per nonempty line.
/// `first_line` anchors diagnostics when the region sits inside a larger file.
materials_result parse_materials(std::string_view region, int first_line = 1);

/// Parses a full document: an optional material-library block followed by the
/// BEGIN_GRAPH/END_GRAPH record block. Never throws; malformed input turns
/// into diagnostics (parsing continues per record where possible).
parse_result parse_graph(std::string_view text);

/// Parses a single placement production: align / offset / polar / connect /
/// orientation / pattern. A leading `key=` (e.g. "pattern=") is accepted.
placement_result parse_placement(std::string_view text);

} // namespace dgc
