#pragma once

// Line-delimited key=value logging on standard error.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace atomgrid::detail {

using LogFields = std::vector<std::pair<std::string, std::string>>;

/// Writes `level=<level> event=<event> k=v ...` as one line. Values with
/// spaces are quoted. Thread-safe.
void log(std::string_view level, std::string_view event, const LogFields& fields = {});

void set_log_enabled(bool enabled);

} // namespace atomgrid::detail
