#pragma once

#include <string>

namespace pucopula {

/// Shortest decimal text that round-trips to `value`; integral values keep a
/// trailing ".0" (1 -> "1.0", 0.5 -> "0.5").
std::string format_double(double value);

}  // namespace pucopula
