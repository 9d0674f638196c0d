#pragma once

#include <cstdint>
#include <string_view>

namespace xfer::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Entry point behind the xfer executable. Returns 0 on success, 2 for
/// configuration errors and unknown commands, 3 for numerical failures.
int run(int argc, const char* const* argv);

/// 64-bit FNV-1a, used as the scenario hash in run manifests.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace xfer::cli
