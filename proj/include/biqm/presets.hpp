#pragma once

#include "biqm/config.hpp"

#include <string>
#include <vector>

namespace biqm {

std::vector<std::string> preset_names();

/// Configuration of one named experiment; throws unknown_preset.
ReconstructionConfig preset_config(const std::string& name);

}  // namespace biqm
