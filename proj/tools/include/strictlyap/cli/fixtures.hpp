#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace strictlyap::cli {

/// Names of the built-in problem files.
std::vector<std::string> fixture_names();

/// Config text of a built-in problem, or nullopt.
std::optional<std::string> fixture_text(std::string_view name);

/// Default rigid-body reference trajectory (w1r, w2r, w3r).
inline constexpr std::string_view kDefaultReference = "sin(t), 0, 0";

}  // namespace strictlyap::cli
