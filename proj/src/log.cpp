#include "atomgrid/detail/log.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>

#include <fmt/format.h>

namespace atomgrid::detail {

namespace {

std::mutex log_mutex;
std::atomic<bool> log_enabled{true};

std::string quote(std::string_view v)
{
    if (!v.empty() && v.find_first_of(" \t\"=") == std::string_view::npos) {
        return std::string(v);
    }
    std::string out = "\"";
    for (const char c : v) {
        if (c == '"' || c == '\\') out += '\\';
        out += c == '\n' ? ' ' : c;
    }
    return out + "\"";
}

} // namespace

void set_log_enabled(bool enabled)
{
    log_enabled = enabled;
}

void log(std::string_view level, std::string_view event, const LogFields& fields)
{
    if (!log_enabled) {
        return;
    }
    std::string line = fmt::format("level={} event={}", level, event);
    for (const auto& [k, v] : fields) {
        line += fmt::format(" {}={}", k, quote(v));
    }
    line += '\n';
    std::lock_guard lock(log_mutex);
    std::fputs(line.c_str(), stderr);
}

} // namespace atomgrid::detail
