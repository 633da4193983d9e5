#pragma once

#include <functional>
#include <string_view>

namespace sentinel {

/// Called at every durable write boundary with the boundary's name. Tests
/// install a hook that kills the process at a chosen boundary.
using FaultHook = std::function<void(std::string_view point)>;

} // namespace sentinel
