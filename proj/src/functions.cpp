#include "hsnl/functions.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <numbers>

#include "hsnl/errors.hpp"

namespace hsnl {

namespace {

const std::map<std::string, Fn, std::less<>>& registry() {
    static const std::map<std::string, Fn, std::less<>> table = {
        {"zero", [](double) { return 0.0; }},
        {"one", [](double) { return 1.0; }},
        {"x", [](double x) { return x; }},
        {"quad", [](double x) { return 0.5 * x * (1.0 - x); }},  // solves -u'' = 1 with zero ends
        {"sin", [](double x) { return std::sin(std::numbers::pi * x); }},
        {"sin2", [](double x) { return std::sin(2.0 * std::numbers::pi * x); }},
        {"bump", [](double x) { return (1.0 - x * x) * (1.0 - x * x); }},
        {"varcoef", [](double x) { return 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * x); }},
    };
    return table;
}

}  // namespace

Fn named_function(std::string_view name) {
    const auto& t = registry();
    const auto it = t.find(name);
    if (it == t.end()) throw ConfigError("unknown function name: " + std::string(name));
    return it->second;
}

std::vector<std::string> function_names() {
    std::vector<std::string> out;
    for (const auto& [k, v] : registry()) out.push_back(k);
    return out;
}

Fn parse_function(std::string_view spec) {
    if (spec.starts_with("const:")) {
        const auto text = spec.substr(6);
        double c = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), c);
        if (ec != std::errc() || ptr != text.data() + text.size())
            throw ConfigError("malformed constant in function spec: " + std::string(spec));
        return [c](double) { return c; };
    }
    if (spec.starts_with("func:")) return named_function(spec.substr(5));
    return named_function(spec);
}

}  // namespace hsnl
