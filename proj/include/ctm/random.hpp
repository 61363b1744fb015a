#pragma once

#include <cstdint>
#include <random>

namespace ctm {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer; used to derive independent per-task seeds.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for task `index` under a base seed. Results depend only on (seed, index),
/// never on which worker runs the task.
inline std::uint64_t task_seed(std::uint64_t seed, std::uint64_t index) {
    return mix_seed(seed ^ mix_seed(index + 0x5851f42d4c957f2dULL));
}

} // namespace ctm
