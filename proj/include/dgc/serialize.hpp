#pragma once

#include <string>

#include "dgc/ast.hpp"

namespace dgc {

/// Canonical text form: one `Lk: key=value | ...` line per record, every key
/// present (absent values spelled `-`), numbers in shortest round-trip form.
/// parse_graph(serialize_graph(g)) is structurally equal to g.
std::string serialize_graph(const graph_ast& g);

// Individual value renderers, shared with the planner/emitter.
std::string to_text(const size_spec& s);
std::string to_text(const align_spec& a, const std::string& owner_id);
std::string to_text(const target_ref& t);
std::string to_text(const feature_ref& f);
std::string to_text(const pos_spec& p);
std::string to_text(const connect_spec& c);
std::string to_text(const orientation_directive& o);
std::string to_text(const rotation_spec& r);
std::string to_text(const pattern_spec& p);

} // namespace dgc
