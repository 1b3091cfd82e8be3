#pragma once

#include <string>

namespace bitsi {

/// Shortest decimal string that round-trips the double (e.g. "89.6").
std::string fmt_double(double v);

/// Fixed-point with the given number of decimals.
std::string fmt_fixed(double v, int decimals);

/// Fixed-point with trailing zeros (and a bare dot) stripped:
/// 3.220 -> "3.22", 2.000 -> "2".
std::string fmt_trim(double v, int decimals);

} // namespace bitsi
