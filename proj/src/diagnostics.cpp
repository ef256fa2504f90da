#include "dgc/diagnostics.hpp"

#include <json.hpp>

namespace dgc {

const char* diag_code_name(diag_code code) {
    switch (code) {
        case diag_code::malformed_rgba: return "MalformedRgba";
        case diag_code::duplicate_material_name: return "DuplicateMaterialName";
        case diag_code::unknown_key: return "UnknownKey";
        case diag_code::duplicate_node_id: return "DuplicateNodeId";
        case diag_code::missing_id_field: return "MissingIdField";
        case diag_code::unterminated_block: return "UnterminatedBlock";
        case diag_code::syntax_error: return "SyntaxError";
        case diag_code::unknown_feature_name: return "UnknownFeatureName";
        case diag_code::unknown_directive: return "UnknownDirective";
        case diag_code::cycle_detected: return "CycleDetected";
        case diag_code::dangling_reference: return "DanglingReference";
        case diag_code::assembly_order_gap: return "AssemblyOrderGap";
        case diag_code::boolean_missing_operands: return "BooleanMissingOperands";
        case diag_code::non_positive_count: return "NonPositiveCount";
        case diag_code::zero_spacing_with_multiple_cells: return "ZeroSpacingWithMultipleCells";
        case diag_code::non_positive_dimension: return "NonPositiveDimension";
        case diag_code::forward_reference: return "ForwardReference";
        case diag_code::degenerate_placement: return "DegeneratePlacement";
        case diag_code::coincident_endpoints: return "CoincidentEndpoints";
        case diag_code::unknown_target: return "UnknownTarget";
        case diag_code::empty_star_set: return "EmptyStarSet";
        case diag_code::unknown_feature: return "UnknownFeature";
        case diag_code::degenerate_direction: return "DegenerateDirection";
        case diag_code::unresolved_reference: return "UnresolvedReference";
        case diag_code::non_unit_input: return "NonUnitInput";
        case diag_code::ordering_cycle: return "OrderingCycle";
        case diag_code::unsupported_dialect: return "UnsupportedDialect";
        case diag_code::unsupported_verb: return "UnsupportedVerb";
        case diag_code::zero_scale: return "ZeroScale";
        case diag_code::empty_matrix: return "EmptyMatrix";
        case diag_code::unmappable_part_name: return "UnmappablePartName";
        case diag_code::empty_dataset: return "EmptyDataset";
        case diag_code::provider_failure: return "ProviderFailure";
        case diag_code::non_monotone_dataset: return "NonMonotoneDataset";
    }
    return "Unknown";
}

std::string render_diagnostics(const std::vector<diagnostic>& diags) {
    std::string out;
    for (const auto& d : diags) {
        out += diag_code_name(d.code);
        if (d.line > 0) {
            out += " at " + std::to_string(d.line) + ":" + std::to_string(d.column);
        }
        out += ": " + d.message + "\n";
    }
    return out;
}

std::string diagnostics_to_json(const std::vector<diagnostic>& diags) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : diags) {
        arr.push_back({{"code", diag_code_name(d.code)},
                       {"message", d.message},
                       {"line", d.line},
                       {"column", d.column}});
    }
    return arr.dump(2);
}

} // namespace dgc
