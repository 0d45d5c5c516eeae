#pragma once

#include <cstdint>

#include "depnet/graph.hpp"

namespace depnet {

/// Knobs for the seeded ecosystem generator.
struct SynthParams {
    int library_count = 0;
    int max_versions_per_library = 1;
    double dependency_probability = 0.0;  ///< per (library, earlier library) pair
    int vulnerability_count = 0;
    double fix_release_probability = 0.0;  ///< chance a vulnerability gets fixed versions
    std::uint64_t seed = 0;

    void validate() const;  ///< throws Error{invalid_params}
};

/// Deterministic synthetic ecosystem with matched vulnerabilities. Release
/// timestamps strictly increase per library, every dependency edge is
/// temporally sound, and library-level dependencies only point at
/// earlier-created libraries (acyclic).
Graph generate_ecosystem(const SynthParams& params);

}  // namespace depnet
