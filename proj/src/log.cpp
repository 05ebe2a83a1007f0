#include "autolaw/log.hpp"

#include <atomic>
#include <memory>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace autolaw::log {
namespace {

std::atomic<std::uint64_t> g_warnings{0};

spdlog::logger& logger() {
    static std::shared_ptr<spdlog::logger> instance = [] {
        auto l = spdlog::stderr_color_mt("autolaw");
        l->set_pattern("%Y-%m-%dT%H:%M:%S.%e %^%l%$ %v");
        l->set_level(spdlog::level::warn);
        return l;
    }();
    return *instance;
}

}  // namespace

void info(std::string_view msg) { logger().info("{}", msg); }

void warn(std::string_view msg) {
    g_warnings.fetch_add(1, std::memory_order_relaxed);
    logger().warn("{}", msg);
}

void error(std::string_view msg) { logger().error("{}", msg); }

std::uint64_t warning_count() noexcept { return g_warnings.load(std::memory_order_relaxed); }

void set_level(std::string_view level) {
    logger().set_level(spdlog::level::from_str(std::string(level)));
}

}  // namespace autolaw::log
