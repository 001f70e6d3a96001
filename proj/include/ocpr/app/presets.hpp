#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ocpr/app/config.hpp"

namespace ocpr::app {

struct Preset {
  std::string name;
  std::string description;
  std::string yaml;
};

// Bundled scenarios, sorted by name.
const std::vector<Preset>& presets();
const Preset* find_preset(const std::string& name);

}  // namespace ocpr::app
