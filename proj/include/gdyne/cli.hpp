#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gdyne::cli {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 numerical failure, 2 configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

// "start:stop:step", comma lists, or a single value. Throws on bad syntax.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace gdyne::cli
