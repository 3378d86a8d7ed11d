#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tcf {

inline constexpr const char* kVersion = "0.1.0";

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);

/// Writes <dir>/manifest.json: command, seed, FNV-1a hash of the
/// canonical config, tool and library versions, the effective config and
/// the report files. Contains no timestamps, so reruns are byte-identical.
void write_manifest(const std::string& dir, const std::string& command, std::uint64_t seed,
                    const std::string& canonical_config, const std::vector<std::string>& files);

}  // namespace tcf
