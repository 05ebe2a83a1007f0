#pragma once

#include <cstdint>
#include <string_view>

namespace autolaw::log {

// Thin wrapper over spdlog so warnings are also counted; tests and reports
// use the counter to assert a warning event was emitted.
void info(std::string_view msg);
void warn(std::string_view msg);
void error(std::string_view msg);

std::uint64_t warning_count() noexcept;

/// "trace", "debug", "info", "warn", "error", "off"
void set_level(std::string_view level);

}  // namespace autolaw::log
