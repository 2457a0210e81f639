#include "truvar/common.hpp"

#include <cstdlib>
#include <cstring>

namespace truvar::log {

Level level() {
  static const Level lvl = [] {
    const char* env = std::getenv("TRUVAR_LOG");
    if (env == nullptr || *env == '\0') return Level::kQuiet;
    if (std::strcmp(env, "2") == 0 || std::strcmp(env, "debug") == 0) return Level::kDebug;
    if (std::strcmp(env, "1") == 0 || std::strcmp(env, "info") == 0) return Level::kInfo;
    return Level::kQuiet;
  }();
  return lvl;
}

void info(const std::string& msg) {
  if (level() >= Level::kInfo) std::fprintf(stderr, "[truvar] %s\n", msg.c_str());
}

void debug(const std::string& msg) {
  if (level() >= Level::kDebug) std::fprintf(stderr, "[truvar:debug] %s\n", msg.c_str());
}

}  // namespace truvar::log
