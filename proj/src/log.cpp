#include "ponsim/log.hpp"

#include <cstdlib>
#include <string_view>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace ponsim {

void configure_logging() {
  static const bool once = [] {
    auto logger = spdlog::stderr_color_mt("ponsim");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* env = std::getenv("PONSIM_LOG")) {
      const std::string_view v(env);
      if (v == "info") spdlog::set_level(spdlog::level::info);
      else if (v == "debug") spdlog::set_level(spdlog::level::debug);
      else if (v == "error") spdlog::set_level(spdlog::level::err);
    }
    return true;
  }();
  (void)once;
}

}  // namespace ponsim
