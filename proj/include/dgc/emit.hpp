#pragma once

#include <string>

#include "dgc/plan.hpp"

namespace dgc {

/// Action-script text: BLOCK 0/1/2 with section headings, stage markers and
/// the closing "All stages complete." line. Deterministic and byte-stable.
std::string emit_actions(const action_plan& plan);

/// Executable script text. `bpy` is the only dialect; the skeleton is
/// helpers, scene reset + metric units, materials, per-section geometry.
/// Throws UnsupportedDialect.
std::string emit_script(const action_plan& plan, const std::string& dialect);

} // namespace dgc
