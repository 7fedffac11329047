#include "rdkg/log.hpp"

#include <atomic>
#include <iostream>

namespace rdkg::log {

namespace {
std::atomic<bool> g_quiet{false};
}

void set_quiet(bool quiet) { g_quiet = quiet; }
bool quiet() { return g_quiet; }

void warn(std::string_view msg) {
    if (g_quiet) return;
    std::cerr << "warning: " << msg << '\n';
}

}  // namespace rdkg::log
