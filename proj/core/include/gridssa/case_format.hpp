#pragma once

#include <string>
#include <string_view>

#include "gridssa/grid_case.hpp"

namespace gridssa {

/// Parses the sectioned text case format:
///
///   BASE_MVA                       single value on the next line
///   BUS                            id kind p_load q_load v_setpoint v_min v_max
///   GEN                            bus p_gen p_min p_max
///   GEN_DYNAMICS                   bus inertia_h damping_d xd_prime
///   BRANCH                         from to r x b_shunt rating
///
/// `#` starts a comment, columns are whitespace-separated, v_setpoint is `-`
/// when absent. GEN and GEN_DYNAMICS rows pair up positionally and must name
/// the same bus; a GEN without dynamics is a parse error. Unknown sections
/// are rejected. The returned case satisfies every GridCase invariant.
GridCase parse_case(std::string_view text);

/// Inverse of parse_case. Numeric fields use 17 significant digits so that
/// parse_case(serialize_case(c)) reproduces c bit-exactly.
std::string serialize_case(const GridCase& c);

/// Reads a whole file into memory; throws Error when unreadable.
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace gridssa
