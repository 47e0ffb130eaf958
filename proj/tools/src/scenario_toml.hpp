#pragma once

#include <toml++/toml.hpp>

#include "kslab/app/scenario.hpp"

namespace kslab::app {

Scenario parse_scenario_table(const toml::table& table, const std::filesystem::path& base_dir);

/// Parses TOML text; syntax errors become ValidationError with line and column.
toml::table parse_toml(std::string_view text, const std::string& source);

}  // namespace kslab::app
