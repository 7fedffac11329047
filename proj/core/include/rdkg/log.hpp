#pragma once

#include <string_view>

namespace rdkg::log {

/// Silences warnings (tests and benchmarks flip this).
void set_quiet(bool quiet);
bool quiet();

/// "warning: <msg>" on stderr.
void warn(std::string_view msg);

}  // namespace rdkg::log
