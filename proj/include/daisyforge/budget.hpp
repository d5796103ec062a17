#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>

#include "daisyforge/errors.hpp"

namespace daisyforge {

// Resource limits threaded through enumeration and search.
//   member_slots caps how many r-sets a layer may hold before materialization
//   is refused (LayerTooLarge / ScaleExceeded).
//   nodes caps search-tree nodes; 0 means unlimited.
struct Budget {
    std::uint64_t member_slots;
    std::uint64_t nodes;

    Budget() : member_slots(default_member_slots()), nodes(0) {}
    Budget(std::uint64_t slots, std::uint64_t node_cap) : member_slots(slots), nodes(node_cap) {}

    static std::uint64_t default_member_slots() {
        static const std::uint64_t cached = [] {
            const char* env = std::getenv("DAISYFORGE_BUDGET");
            if (env && *env) {
                char* end = nullptr;
                unsigned long long v = std::strtoull(env, &end, 10);
                if (end && *end == '\0' && v > 0) return static_cast<std::uint64_t>(v);
            }
            return std::uint64_t(1) << 28;
        }();
        return cached;
    }
};

// Shared node counter for searches; throws once the cap is hit.
struct NodeCounter {
    std::uint64_t nodes = 0;
    std::uint64_t cap = 0;

    void tick() {
        ++nodes;
        if (cap && nodes > cap) fail(errc::budget_exceeded, "search node budget exhausted");
    }
};

}  // namespace daisyforge
