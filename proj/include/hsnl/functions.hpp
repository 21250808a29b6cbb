#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "hsnl/fem1d.hpp"

namespace hsnl {

// Built-in functions on (0, 1) selectable by name from the command line.
Fn named_function(std::string_view name);  // throws ConfigError
std::vector<std::string> function_names();

// "const:c" or "func:name".
Fn parse_function(std::string_view spec);

}  // namespace hsnl
