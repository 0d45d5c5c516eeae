#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depnet/types.hpp"

namespace depnet {

/// Lenient semantic version. Accepts git-tag shapes: an optional leading
/// "v"/"V", dot-separated numeric components (missing ones default to 0),
/// extra components beyond patch, and a prerelease after "-". Build
/// metadata after "+" is kept in `raw` but ignored for ordering.
struct Version {
    std::int64_t major = 0;
    std::int64_t minor = 0;
    std::int64_t patch = 0;
    std::vector<std::int64_t> extra;  ///< components beyond patch
    std::string prerelease;           ///< empty means "no prerelease"
    std::string raw;                  ///< original text, preserved verbatim

    /// Throws Error{malformed_version} when no leading numeric component exists.
    static Version parse(std::string_view text);

    /// "major.minor.patch[.extra...][-prerelease]"; parsing this is lossless.
    std::string canonical() const;

    bool has_prerelease() const { return !prerelease.empty(); }
};

/// Total order: numeric components compared respectively with zero padding;
/// equal numerics order a prerelease before the bare version; prereleases
/// compare by dot-segments, numeric segments numerically and before
/// alphanumeric ones.
std::strong_ordering compare_versions(const Version& a, const Version& b);

inline std::strong_ordering operator<=>(const Version& a, const Version& b) {
    return compare_versions(a, b);
}
inline bool operator==(const Version& a, const Version& b) {
    return compare_versions(a, b) == std::strong_ordering::equal;
}

/// Half-open/closed interval over versions; an absent bound is unbounded.
struct VersionRange {
    std::optional<Version> start;
    bool start_inclusive = true;
    std::optional<Version> end;
    bool end_inclusive = false;

    bool contains(const Version& v) const;
};

/// True iff `v` satisfies at least one of `ranges`.
bool version_in_range(const Version& v, const std::vector<VersionRange>& ranges);

}  // namespace depnet
