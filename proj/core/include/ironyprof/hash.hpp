#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace ironyprof {

/// 64-bit FNV-1a; used for fingerprints and config hashes, never for
/// anything security related.
std::uint64_t fnv1a64(std::string_view data,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// Lowercase 16-digit hex rendering.
std::string hex64(std::uint64_t value);

}  // namespace ironyprof
