#pragma once

#include <cstdint>
#include <string>

#include "coopcheck/configuration.hpp"

namespace coopcheck {

// Dedup key for explored configurations: a 128-bit digest of the canonical
// serialization. Debug callers can keep the serialization itself to rule out
// digest collisions.
struct CanonicalKey {
  uint64_t lo = 0;
  uint64_t hi = 0;
  std::string bytes;  // canonical serialization; kept only on request

  bool operator==(const CanonicalKey& other) const {
    return lo == other.lo && hi == other.hi;
  }
  bool operator!=(const CanonicalKey& other) const { return !(*this == other); }
  bool operator<(const CanonicalKey& other) const {
    return lo != other.lo ? lo < other.lo : hi < other.hi;
  }
};

struct CanonicalKeyHash {
  size_t operator()(const CanonicalKey& k) const {
    return static_cast<size_t>(k.lo ^ (k.hi * 0x9e3779b97f4a7c15ULL));
  }
};

// Renumbers processors and objects by first occurrence along a fixed
// traversal (chain order; within a processor: frames top-down, then the
// region's object graph in slot order, then queued requests), serializes the
// renumbered configuration, and digests it. Configurations identical up to
// id naming along this traversal collide to one key.
CanonicalKey canonical_key(const Configuration& config, bool keep_bytes = false);

// The serialization alone, for tests.
std::string canonical_bytes(const Configuration& config);

}  // namespace coopcheck
