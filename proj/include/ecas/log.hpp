#pragma once

#include <string>

namespace ecas {

enum class LogLevel { Error = 0, Info = 1, Debug = 2 };

// Verbosity from the ECAS_LOG environment variable {error|info|debug},
// defaulting to error. Messages go to stderr.
LogLevel log_level();

void log_error(const std::string& msg);
void log_info(const std::string& msg);
void log_debug(const std::string& msg);

}  // namespace ecas
