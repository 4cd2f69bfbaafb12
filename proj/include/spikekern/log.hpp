#pragma once

#include <cstdint>
#include <string_view>

namespace spikekern {

/// Prints to stderr unless silenced; always counted.
void warn(std::string_view msg);
void set_quiet_warnings(bool quiet);
std::uint64_t warning_count();

}  // namespace spikekern
