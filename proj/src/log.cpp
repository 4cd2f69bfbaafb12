#include "spikekern/log.hpp"

#include <atomic>
#include <iostream>

namespace spikekern {

namespace {
std::atomic<bool> g_quiet{false};
std::atomic<std::uint64_t> g_warnings{0};
}  // namespace

void warn(std::string_view msg)
{
    ++g_warnings;
    if (!g_quiet) std::cerr << "spikekern: warning: " << msg << '\n';
}

void set_quiet_warnings(bool quiet)
{
    g_quiet = quiet;
}

std::uint64_t warning_count()
{
    return g_warnings;
}

}  // namespace spikekern
