#include "trifuse/log.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace trifuse::log {

namespace {

Level g_level = Level::Warn;
bool g_loaded = false;

Level from_env() {
    const char* v = std::getenv("TRIFUSE_LOG");
    if (!v) return Level::Warn;
    if (std::strcmp(v, "debug") == 0) return Level::Debug;
    if (std::strcmp(v, "info") == 0) return Level::Info;
    if (std::strcmp(v, "warn") == 0) return Level::Warn;
    if (std::strcmp(v, "error") == 0) return Level::Error;
    if (std::strcmp(v, "none") == 0) return Level::None;
    std::fprintf(stderr, "[trifuse][warn] unknown TRIFUSE_LOG value '%s'; using warn\n", v);
    return Level::Warn;
}

void emit(Level l, const char* tag, const std::string& msg) {
    if (l < level()) return;
    std::fprintf(stderr, "[trifuse][%s] %s\n", tag, msg.c_str());
}

}  // namespace

Level level() {
    if (!g_loaded) {
        g_level = from_env();
        g_loaded = true;
    }
    return g_level;
}

void set_level(Level l) {
    g_level = l;
    g_loaded = true;
}

void debug(const std::string& msg) { emit(Level::Debug, "debug", msg); }
void info(const std::string& msg) { emit(Level::Info, "info", msg); }
void warn(const std::string& msg) { emit(Level::Warn, "warn", msg); }
void error(const std::string& msg) { emit(Level::Error, "error", msg); }

}  // namespace trifuse::log
