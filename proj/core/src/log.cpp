#include "bmvdr/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace bmvdr::log {
namespace {
std::atomic<Level> g_level{Level::kWarning};
std::mutex g_mutex;

const char* tag(Level level) {
  switch (level) {
    case Level::kDebug: return "DEBUG";
    case Level::kInfo: return "INFO";
    case Level::kWarning: return "WARN";
    case Level::kError: return "ERROR";
    case Level::kOff: break;
  }
  return "";
}
}  // namespace

void set_level(Level level) { g_level = level; }
Level level() { return g_level; }

void write(Level lvl, const std::string& message) {
  if (lvl < g_level.load() || lvl == Level::kOff) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::cerr << "[bmvdr " << tag(lvl) << "] " << message << '\n';
}

}  // namespace bmvdr::log
