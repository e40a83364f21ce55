#pragma once

#include <string>

#include "closure/instance.hpp"

namespace closure {

/// Parses a fixed- or free-format MPS document. Sections NAME, ROWS,
/// COLUMNS (with INTORG/INTEND markers), RHS are honored; OBJSENSE, RANGES,
/// BOUNDS and ENDATA are optional. Ranged rows are translated to a companion
/// row appended after all base rows. Throws ParseError naming the offending
/// line.
MilpInstance parse_mps(const std::string& text);

}  // namespace closure
