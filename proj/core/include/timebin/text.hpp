#pragma once

#include <string>

namespace timebin {

/// Shortest decimal rendering that parses back to the same double;
/// locale-independent, so CSV output is byte-deterministic.
std::string format_double(double value);

}  // namespace timebin
