#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace dgc {

enum class diag_code {
    // parser
    malformed_rgba,
    duplicate_material_name,
    unknown_key,
    duplicate_node_id,
    missing_id_field,
    unterminated_block,
    syntax_error,
    unknown_feature_name,
    unknown_directive,
    // validation
    cycle_detected,
    dangling_reference,
    assembly_order_gap,
    boolean_missing_operands,
    non_positive_count,
    zero_spacing_with_multiple_cells,
    non_positive_dimension,
    // resolution
    forward_reference,
    degenerate_placement,
    coincident_endpoints,
    unknown_target,
    empty_star_set,
    unknown_feature,
    degenerate_direction,
    unresolved_reference,
    non_unit_input,
    // planning / emission
    ordering_cycle,
    unsupported_dialect,
    unsupported_verb,
    // metrics
    zero_scale,
    empty_matrix,
    unmappable_part_name,
    // curriculum
    empty_dataset,
    provider_failure,
    non_monotone_dataset,
};

const char* diag_code_name(diag_code code);

/// One user-facing problem, anchored to a source location when known.
/// Lines and columns are 1-based; 0 means "no location".
struct diagnostic {
    diag_code code;
    std::string message;
    int line = 0;
    int column = 0;
};

std::string render_diagnostics(const std::vector<diagnostic>& diags);

/// JSON report shared by the parse/check CLI paths:
/// [{"code": "...", "message": "...", "line": n, "column": n}, ...]
std::string diagnostics_to_json(const std::vector<diagnostic>& diags);

/// Thrown by operations whose failures are single-shot (no span to report):
/// geometry preconditions, resolver execution, metric guards.
class domain_error : public std::runtime_error {
  public:
    domain_error(diag_code code, const std::string& message)
        : std::runtime_error(std::string(diag_code_name(code)) + ": " + message), code_(code) {}

    diag_code code() const { return code_; }

  private:
    diag_code code_;
};

} // namespace dgc
