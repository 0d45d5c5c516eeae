#include <algorithm>
#include <cctype>
#include <regex>

#include "depnet/ingest.hpp"

namespace depnet {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        std::string_view line =
            nl == std::string_view::npos ? text.substr(start) : text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        lines.emplace_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines;
}

std::optional<Version> try_version(std::string_view text) {
    try {
        return Version::parse(text);
    } catch (const Error&) {
        return std::nullopt;
    }
}

// "~>" upper bound: drop the last written component and bump the one before
// it ("~> 1.2" -> < 2.0, "~> 1.2.3" -> < 1.3.0). The written precision comes
// from the raw text.
Version optimistic_upper_bound(const Version& low) {
    std::string_view text = low.raw;
    if (!text.empty() && (text.front() == 'v' || text.front() == 'V')) text.remove_prefix(1);
    if (auto dash = text.find('-'); dash != std::string_view::npos) text = text.substr(0, dash);
    int written = 1;
    for (char c : text) {
        if (c == '.') ++written;
    }

    std::vector<std::int64_t> components = {low.major, low.minor, low.patch};
    components.insert(components.end(), low.extra.begin(), low.extra.end());
    int bump_index = std::max(written - 2, 0);  // "~> 2" behaves like "< 3"
    components.resize(static_cast<std::size_t>(bump_index) + 1, 0);
    components[bump_index] += 1;

    Version high;
    high.major = components[0];
    high.minor = components.size() > 1 ? components[1] : 0;
    high.patch = components.size() > 2 ? components[2] : 0;
    for (std::size_t i = 3; i < components.size(); ++i) high.extra.push_back(components[i]);
    high.raw = high.canonical();
    return high;
}

Requirement make_requirement(LibraryId library, Constraint constraint) {
    return Requirement{std::move(library), std::move(constraint)};
}

void parse_podfile_into(std::string_view text, RequirementSet& out, Warnings* warnings) {
    // pod 'Name' | pod 'Name', '~> 1.0' | pod 'Name', '>= 1.0', '< 2.0' | pod 'Name', '1.2.3'
    static const std::regex pod_line(R"re(^\s*pod\s+['"]([^'"]+)['"](.*)$)re");
    static const std::regex quoted(R"re(['"]([^'"]+)['"])re");

    for (const auto& line : lines_of(text)) {
        std::smatch m;
        if (!std::regex_match(line, m, pod_line)) continue;
        LibraryId library = LibraryId::from_name(m[1].str());
        std::string rest = m[2].str();

        std::vector<std::string> specs;
        for (auto it = std::sregex_iterator(rest.begin(), rest.end(), quoted);
             it != std::sregex_iterator(); ++it) {
            std::string spec = (*it)[1].str();
            // skip keyword arguments like :git => '...'
            if (spec.find("://") != std::string::npos) continue;
            specs.push_back(std::move(spec));
        }

        Constraint constraint = Constraint::at_least(Version::parse("0"));
        std::optional<Version> lower, upper;
        bool unresolvable = false;
        for (const auto& spec : specs) {
            std::string_view body = trim(spec);
            std::string op;
            while (!body.empty() && !std::isdigit(static_cast<unsigned char>(body.front())) &&
                   body.front() != 'v' && body.front() != 'V') {
                op.push_back(body.front());
                body.remove_prefix(1);
            }
            op = std::string(trim(op));
            auto version = try_version(trim(body));
            if (!version) {
                unresolvable = true;
                break;
            }
            if (op == "~>") {
                constraint = Constraint::optimistic(*version);
            } else if (op == ">=" || op == ">") {
                lower = version;
            } else if (op == "<" || op == "<=") {
                upper = version;
            } else if (op.empty() || op == "=" || op == "==") {
                constraint = Constraint::exact(*version);
            } else {
                unresolvable = true;
                break;
            }
        }
        if (unresolvable) {
            out.requirements.push_back(make_requirement(std::move(library), Constraint::unresolvable()));
            warn(warnings, "podfile", "unsupported requirement, recorded as unresolvable");
            continue;
        }
        if (lower && upper) {
            constraint = Constraint::between(*lower, *upper);
        } else if (lower) {
            constraint = Constraint::at_least(*lower);
        } else if (upper) {
            constraint = Constraint::less_than(*upper);
        }
        out.requirements.push_back(make_requirement(std::move(library), std::move(constraint)));
    }
}

void parse_cartfile_into(std::string_view text, RequirementSet& out, Warnings*) {
    // github "o/r" ~> 1.0 | == 1.0 | >= 1.0 | "branch-or-tag" | bare
    static const std::regex dep_line(
        R"re(^\s*(github|git)\s+"([^"]+)"\s*(.*)$)re");

    for (const auto& line : lines_of(text)) {
        std::smatch m;
        if (!std::regex_match(line, m, dep_line)) continue;
        LibraryId library = LibraryId::from_repo_url(m[2].str());
        std::string rest = std::string(trim(m[3].str()));

        Constraint constraint = Constraint::at_least(Version::parse("0"));
        if (!rest.empty()) {
            if (rest.front() == '"') {
                // quoted pin: version tag or branch/commit
                auto close = rest.find('"', 1);
                std::string pin = close == std::string::npos ? rest.substr(1)
                                                             : rest.substr(1, close - 1);
                auto version = try_version(pin);
                bool hex = pin.size() == 40 &&
                           std::all_of(pin.begin(), pin.end(),
                                       [](unsigned char c) { return std::isxdigit(c) != 0; });
                constraint = (version && !hex) ? Constraint::exact(*version) : Constraint::unresolvable();
            } else {
                std::string op;
                std::size_t i = 0;
                while (i < rest.size() && !std::isspace(static_cast<unsigned char>(rest[i]))) {
                    op.push_back(rest[i]);
                    ++i;
                }
                auto version = try_version(trim(rest.substr(i)));
                if (!version) {
                    constraint = Constraint::unresolvable();
                } else if (op == "~>") {
                    constraint = Constraint::optimistic(*version);
                } else if (op == "==") {
                    constraint = Constraint::exact(*version);
                } else if (op == ">=") {
                    constraint = Constraint::at_least(*version);
                } else {
                    constraint = Constraint::unresolvable();
                }
            }
        }
        out.requirements.push_back(make_requirement(std::move(library), std::move(constraint)));
    }
}

void parse_package_swift_into(std::string_view text, RequirementSet& out, Warnings*) {
    std::string body(text);
    // .package(url: "...", <requirement>) — pattern extraction only.
    static const std::regex package_call(
        R"re(\.package\s*\(\s*(?:name\s*:\s*"[^"]*"\s*,\s*)?url\s*:\s*"([^"]+)"\s*,\s*([^)]*)\))re");

    for (auto it = std::sregex_iterator(body.begin(), body.end(), package_call);
         it != std::sregex_iterator(); ++it) {
        LibraryId library = LibraryId::from_repo_url((*it)[1].str());
        std::string req = (*it)[2].str();

        Constraint constraint = Constraint::unresolvable();
        std::smatch vm;
        static const std::regex from_form(R"re((?:^|[^A-Za-z])from\s*:\s*"([^"]+)")re");
        static const std::regex exact_form(R"re(exact\s*:\s*"([^"]+)")re");
        static const std::regex next_major(R"re(\.upToNextMajor\s*\(\s*from\s*:\s*"([^"]+)")re");
        static const std::regex next_minor(R"re(\.upToNextMinor\s*\(\s*from\s*:\s*"([^"]+)")re");
        static const std::regex range_form(R"re("([^"]+)"\s*\.\.<\s*"([^"]+)")re");
        static const std::regex branch_form(R"re((branch|revision)\s*:)re");

        auto bounded = [&](const Version& low, bool to_minor) {
            Version high;
            if (to_minor) {
                high.major = low.major;
                high.minor = low.minor + 1;
            } else {
                high.major = low.major + 1;
            }
            high.raw = high.canonical();
            Constraint c = Constraint::between(low, high);
            return c;
        };

        if (std::regex_search(req, vm, next_minor)) {
            if (auto low = try_version(vm[1].str())) constraint = bounded(*low, true);
        } else if (std::regex_search(req, vm, next_major)) {
            if (auto low = try_version(vm[1].str())) constraint = bounded(*low, false);
        } else if (std::regex_search(req, vm, exact_form)) {
            if (auto low = try_version(vm[1].str())) constraint = Constraint::exact(*low);
        } else if (std::regex_search(req, vm, range_form)) {
            auto low = try_version(vm[1].str());
            auto high = try_version(vm[2].str());
            if (low && high) constraint = Constraint::between(*low, *high);
        } else if (std::regex_search(req, vm, from_form)) {
            // from: caps below the next major, like .upToNextMajor
            if (auto low = try_version(vm[1].str())) constraint = bounded(*low, false);
        } else if (std::regex_search(req, vm, branch_form)) {
            constraint = Constraint::unresolvable();
        }
        out.requirements.push_back(make_requirement(std::move(library), std::move(constraint)));
    }
}

}  // namespace

std::string_view to_string(ConstraintKind kind) {
    switch (kind) {
        case ConstraintKind::exact: return "exact";
        case ConstraintKind::optimistic: return "optimistic";
        case ConstraintKind::at_least: return "at_least";
        case ConstraintKind::less_than: return "less_than";
        case ConstraintKind::range: return "range";
        case ConstraintKind::unresolvable: return "unresolvable";
    }
    return "?";
}

Constraint Constraint::exact(Version v) {
    return Constraint{ConstraintKind::exact, std::move(v), std::nullopt};
}

Constraint Constraint::at_least(Version v) {
    return Constraint{ConstraintKind::at_least, std::move(v), std::nullopt};
}

Constraint Constraint::less_than(Version v) {
    return Constraint{ConstraintKind::less_than, std::nullopt, std::move(v)};
}

Constraint Constraint::between(Version low, Version high) {
    if (compare_versions(low, high) == std::strong_ordering::greater) {
        std::swap(low, high);
    }
    return Constraint{ConstraintKind::range, std::move(low), std::move(high)};
}

Constraint Constraint::optimistic(const Version& low) {
    Constraint c;
    c.kind = ConstraintKind::optimistic;
    c.low = low;
    c.high = optimistic_upper_bound(low);
    return c;
}

Constraint Constraint::unresolvable() {
    return Constraint{ConstraintKind::unresolvable, std::nullopt, std::nullopt};
}

bool Constraint::satisfied_by(const Version& v) const {
    switch (kind) {
        case ConstraintKind::exact:
            return low && v == *low;
        case ConstraintKind::at_least:
            return low && compare_versions(v, *low) >= 0;
        case ConstraintKind::less_than:
            return high && compare_versions(v, *high) < 0;
        case ConstraintKind::optimistic:
        case ConstraintKind::range:
            return low && high && compare_versions(v, *low) >= 0 && compare_versions(v, *high) < 0;
        case ConstraintKind::unresolvable:
            return false;
    }
    return false;
}

RequirementSet parse_manifest_requirements(std::string_view text, ManifestKind kind,
                                           Warnings* warnings) {
    RequirementSet out;
    switch (kind) {
        case ManifestKind::cocoapods:
            out.source_kind = SourceKind::podfile;
            parse_podfile_into(text, out, warnings);
            break;
        case ManifestKind::carthage:
            out.source_kind = SourceKind::cartfile;
            parse_cartfile_into(text, out, warnings);
            break;
        case ManifestKind::swiftpm:
            out.source_kind = SourceKind::package_swift;
            parse_package_swift_into(text, out, warnings);
            break;
    }

    // one constraint per library per file: first declaration wins
    std::vector<Requirement> unique;
    for (auto& req : out.requirements) {
        auto dup = std::find_if(unique.begin(), unique.end(),
                                [&](const Requirement& r) { return r.library == req.library; });
        if (dup == unique.end()) {
            unique.push_back(std::move(req));
        } else {
            warn(warnings, std::string(to_string(out.source_kind)),
                 "duplicate requirement for '" + req.library.canonical + "' ignored");
        }
    }
    out.requirements = std::move(unique);

    if (out.requirements.empty() && !trim(text).empty()) {
        throw Error(ErrorKind::malformed_manifest, "no requirement declarations found");
    }
    return out;
}

}  // namespace depnet
