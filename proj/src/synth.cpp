#include "depnet/synth.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "depnet/matcher.hpp"

namespace depnet {

namespace {

// mt19937_64 with hand-rolled bounded draws keeps one stream of raw outputs,
// so generated ecosystems depend on the seed alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : next() % n; }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return unit() < p; }

private:
    std::mt19937_64 engine_;
};

std::string padded(int value, int width) {
    std::ostringstream out;
    out << value;
    std::string digits = out.str();
    while (static_cast<int>(digits.size()) < width) digits.insert(digits.begin(), '0');
    return digits;
}

struct SynthLibrary {
    LibraryId id;
    std::string language;
    std::vector<Version> versions;
    std::vector<std::int64_t> released;
};

const char* pick_language(Rng& rng) {
    double roll = rng.unit();
    if (roll < 0.35) return "Swift";
    if (roll < 0.60) return "Objective-C";
    if (roll < 0.75) return "C";
    if (roll < 0.85) return "C++";
    if (roll < 0.93) return "Go";
    return "JavaScript";
}

Severity pick_severity(Rng& rng) {
    double roll = rng.unit();
    if (roll < 0.20) return Severity::critical;
    if (roll < 0.60) return Severity::high;
    if (roll < 0.90) return Severity::medium;
    if (roll < 0.95) return Severity::low;
    return Severity::unknown;
}

}  // namespace

void SynthParams::validate() const {
    if (library_count < 0 || max_versions_per_library < 0 || vulnerability_count < 0) {
        throw Error(ErrorKind::invalid_params, "counts must be non-negative");
    }
    if (dependency_probability < 0.0 || dependency_probability > 1.0 ||
        fix_release_probability < 0.0 || fix_release_probability > 1.0) {
        throw Error(ErrorKind::invalid_params, "probabilities must be within [0, 1]");
    }
}

Graph generate_ecosystem(const SynthParams& params) {
    params.validate();
    Rng rng(params.seed);

    int width = std::max(4, static_cast<int>(std::to_string(std::max(params.library_count, 1)).size()));
    std::vector<SynthLibrary> libraries(static_cast<std::size_t>(params.library_count));

    // version plans per library
    for (int i = 0; i < params.library_count; ++i) {
        auto& lib = libraries[static_cast<std::size_t>(i)];
        lib.id = LibraryId("lib" + padded(i, width));
        lib.language = pick_language(rng);

        int count = params.max_versions_per_library == 0
                        ? 0
                        : 1 + static_cast<int>(rng.below(
                                  static_cast<std::uint64_t>(params.max_versions_per_library)));
        std::int64_t major = 1, minor = 0, patch = 0;
        for (int j = 0; j < count; ++j) {
            if (j > 0) {
                double bump = rng.unit();
                if (bump < 0.10) {
                    ++major;
                    minor = patch = 0;
                } else if (bump < 0.55) {
                    ++minor;
                    patch = 0;
                } else {
                    ++patch;
                }
            }
            std::ostringstream text;
            text << major << '.' << minor << '.' << patch;
            lib.versions.push_back(Version::parse(text.str()));
            lib.released.push_back(0);  // assigned below
        }
    }

    // interleaved release clock: round j releases every library's j-th version,
    // so later libraries still find earlier-released dependency targets
    std::int64_t clock = 1'500'000'000;
    std::size_t max_rounds = 0;
    for (const auto& lib : libraries) max_rounds = std::max(max_rounds, lib.versions.size());
    for (std::size_t round = 0; round < max_rounds; ++round) {
        for (auto& lib : libraries) {
            if (round < lib.versions.size()) {
                clock += 3600 + static_cast<std::int64_t>(rng.below(86400));
                lib.released[round] = clock;
            }
        }
    }

    GraphBuilder builder;
    for (const auto& lib : libraries) {
        LibraryMeta meta;
        meta.library = lib.id;
        meta.language = lib.language;
        builder.add_metadata(meta);
        for (std::size_t j = 0; j < lib.versions.size(); ++j) {
            builder.add_version(lib.id, lib.versions[j], lib.released[j]);
        }
    }

    // dependencies: each library picks earlier-created targets; successive
    // versions keep the target set (mostly) and re-resolve to newer versions
    for (int i = 0; i < params.library_count; ++i) {
        auto& lib = libraries[static_cast<std::size_t>(i)];
        if (lib.versions.empty()) continue;

        std::vector<int> targets;
        for (int t = 0; t < i; ++t) {
            if (rng.chance(params.dependency_probability)) targets.push_back(t);
        }

        for (std::size_t j = 0; j < lib.versions.size(); ++j) {
            if (j > 0) {
                // occasional churn in the dependency set
                if (!targets.empty() && rng.chance(0.10)) {
                    targets.erase(targets.begin() +
                                  static_cast<std::ptrdiff_t>(rng.below(targets.size())));
                }
                if (i > 0 && rng.chance(0.10)) {
                    int extra = static_cast<int>(rng.below(static_cast<std::uint64_t>(i)));
                    if (std::find(targets.begin(), targets.end(), extra) == targets.end()) {
                        targets.push_back(extra);
                    }
                }
            }
            std::sort(targets.begin(), targets.end());

            for (int t : targets) {
                const auto& dep = libraries[static_cast<std::size_t>(t)];
                // versions released strictly before this one are eligible
                int latest = -1;
                for (std::size_t k = 0; k < dep.versions.size(); ++k) {
                    if (dep.released[k] < lib.released[j]) latest = static_cast<int>(k);
                }
                if (latest < 0) continue;
                // maintainers lag: often pin an older version than the latest
                int pick = latest;
                if (latest > 0 && rng.chance(0.45)) {
                    pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(latest) + 1));
                }
                Provenance provenance =
                    rng.chance(0.85) ? Provenance::lockfile : Provenance::manifest_resolved;
                builder.add_dependency(lib.id, lib.versions[j], lib.released[j], dep.id,
                                       dep.versions[static_cast<std::size_t>(pick)], provenance);
            }
        }
    }

    // vulnerabilities over version prefixes; a fix release leaves the tail clean
    std::vector<VulnRecord> vulns;
    for (int v = 0; v < params.vulnerability_count; ++v) {
        if (params.library_count == 0) break;
        const auto& lib = libraries[rng.below(static_cast<std::uint64_t>(params.library_count))];
        if (lib.versions.empty()) continue;

        std::size_t first = rng.below(std::max<std::uint64_t>(1, lib.versions.size() / 2 + 1));
        std::size_t last = lib.versions.size() - 1;  // affected through the end by default
        bool has_fix = lib.versions.size() > first + 1 && rng.chance(params.fix_release_probability);
        if (has_fix) {
            last = first + rng.below(lib.versions.size() - first - 1);
        }

        VulnRecord record;
        record.id = "SYN-" + padded(v, 4);
        record.severity = pick_severity(rng);
        record.published = 1'500'000'000 + static_cast<std::int64_t>(rng.below(200'000'000));
        record.description = "synthetic vulnerability " + std::to_string(v) + " in " +
                             lib.id.canonical;

        AffectedLibrary affected;
        affected.library = lib.id;
        if (rng.chance(0.5)) {
            for (std::size_t k = first; k <= last; ++k) {
                affected.exact_versions.push_back(lib.versions[k]);
            }
        } else {
            VersionRange range;
            range.start = lib.versions[first];
            range.start_inclusive = true;
            if (last + 1 < lib.versions.size()) {
                range.end = lib.versions[last + 1];
                range.end_inclusive = false;
            }
            affected.ranges.push_back(std::move(range));
        }
        record.affected.push_back(std::move(affected));
        vulns.push_back(std::move(record));
    }

    Graph base = builder.build();
    return match_vulnerabilities(base, vulns).graph;
}

}  // namespace depnet
