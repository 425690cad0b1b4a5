#pragma once

#include <cstdlib>
#include <memory>
#include <string_view>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

namespace tempoframe::detail {

/// Diagnostics logger on standard error; TEMPOFRAME_LOG picks the level
/// (error, warn, info, debug; default warn).
inline spdlog::logger& log() {
  static const std::shared_ptr<spdlog::logger> logger = [] {
    auto l = spdlog::stderr_color_mt("tempoframe");
    auto level = spdlog::level::warn;
    if (const char* env = std::getenv("TEMPOFRAME_LOG")) {
      const std::string_view v = env;
      if (v == "error") level = spdlog::level::err;
      if (v == "info") level = spdlog::level::info;
      if (v == "debug") level = spdlog::level::debug;
    }
    l->set_level(level);
    l->set_pattern("[%l] %v");
    return l;
  }();
  return *logger;
}

}  // namespace tempoframe::detail
