#pragma once

#include <string>

namespace trifuse::log {

enum class Level { Debug = 0, Info = 1, Warn = 2, Error = 3, None = 4 };

// Level comes from TRIFUSE_LOG (debug|info|warn|error|none) the first time
// it is needed; warn when unset. Messages go to stderr, never to report
// files, so logging cannot perturb byte-deterministic outputs.
Level level();
void set_level(Level l);

void debug(const std::string& msg);
void info(const std::string& msg);
void warn(const std::string& msg);
void error(const std::string& msg);

}  // namespace trifuse::log
