#include "pucopula/series.hpp"

#include <cstdlib>
#include <string>

namespace pucopula {

void SeriesPolicy::validate() const {
  if (!(rel_tolerance > 0.0 && rel_tolerance <= 1e-3)) {
    throw ParameterError("series tolerance must lie in (0, 1e-3]");
  }
  if (max_terms < 10) throw ParameterError("series max_terms must be at least 10");
}

SeriesPolicy SeriesPolicy::from_environment() {
  SeriesPolicy policy;
  if (const char* raw = std::getenv("PUCOPULA_MAX_TERMS"); raw != nullptr && *raw != '\0') {
    char* end = nullptr;
    const unsigned long long value = std::strtoull(raw, &end, 10);
    if (end == raw || *end != '\0') {
      throw ParameterError(std::string("PUCOPULA_MAX_TERMS is not an integer: ") + raw);
    }
    policy.max_terms = static_cast<std::size_t>(value);
    policy.validate();
  }
  return policy;
}

}  // namespace pucopula
