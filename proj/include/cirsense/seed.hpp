#pragma once

#include <cstdint>
#include <initializer_list>

namespace cirsense {

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Derives an independent stream seed from a base seed and a path of indices,
/// e.g. derive_seed(run_seed, bin, hypothesis). Order of the path matters.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept;

}  // namespace cirsense
