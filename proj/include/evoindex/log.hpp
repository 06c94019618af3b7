#pragma once

#include <functional>
#include <string_view>

namespace evoindex {

/// Receives notices about degenerate-but-handled inputs. Defaults to stderr.
using WarningSink = std::function<void(std::string_view)>;

/// Installs a sink and returns the previous one. An empty sink silences warnings.
WarningSink set_warning_sink(WarningSink sink);

void warn(std::string_view message);

}  // namespace evoindex
