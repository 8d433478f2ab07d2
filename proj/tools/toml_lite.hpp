#pragma once

#include <filesystem>
#include <string_view>

#include <nlohmann/json.hpp>

namespace pikan::cli::toml {

// Reads the TOML subset used by experiment configs: comments, [table] and
// [a.b] headers, dotted keys, basic and literal strings, integers, floats
// (inf/nan included), booleans, bare dates (kept as strings), arrays and
// inline tables. Array-of-tables headers are rejected. Throws ConfigError
// with the line number on malformed input.
nlohmann::json parse(std::string_view text);
nlohmann::json parse_file(const std::filesystem::path& path);

// Parses a single right-hand-side value; anything that is not a valid TOML
// value comes back as a plain string. Used for command-line overrides.
nlohmann::json parse_value(std::string_view text);

}  // namespace pikan::cli::toml
