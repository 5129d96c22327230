#pragma once

#include <cstdio>
#include <string>

namespace ecas {

// Shortest exact decimal form; identical input bits give identical text, and
// parsing the text restores the exact double. All CSV artifacts use this.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace ecas
