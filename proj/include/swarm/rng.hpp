#ifndef SWARM_RNG_HPP
#define SWARM_RNG_HPP

#include <cstdint>
#include <random>

namespace swarm {

using Engine = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Engine for substream (seed, a, b). Streams depend only on their ids, so a
/// replica draws the same numbers whichever thread runs it.
Engine substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace swarm

#endif  // SWARM_RNG_HPP
