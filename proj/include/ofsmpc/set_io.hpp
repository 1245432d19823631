#pragma once

// Plain-text set blocks:
//
//   hpolytope <name> rows=<m> dim=<n>
//   <h_i> : <H_i1> ... <H_in>          (one line per row)
//   end
//
//   zonotope <name> generators=<m> dim=<n>
//   center : <c_1> ... <c_n>
//   generator : <g_1> ... <g_n>        (one line per generator)
//   end
//
// Numbers are written with 17 significant digits so a dump reads back
// bit-exactly. Lines starting with '#' and blank lines are ignored.

#include <iosfwd>
#include <map>
#include <string>
#include <variant>

#include "ofsmpc/set_algebra.hpp"

namespace ofsmpc {

void write_hpolytope(std::ostream& os, const std::string& name, const HPolytope& p);
void write_zonotope(std::ostream& os, const std::string& name, const Zonotope& z);
void write_matrix(std::ostream& os, const std::string& name, const Mat& m);

using SetBlock = std::variant<HPolytope, Zonotope, Mat>;

/// Parses every block of a dump, keyed by name. Throws ConfigError on
/// malformed input.
std::map<std::string, SetBlock> read_set_blocks(std::istream& is);

}  // namespace ofsmpc
