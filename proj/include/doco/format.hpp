#pragma once

#include <string>

namespace doco {

/// Shortest round-trip decimal representation; stable across runs.
std::string format_double(double v);

}  // namespace doco
