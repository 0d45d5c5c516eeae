#include "depnet/version.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace depnet {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

std::int64_t parse_number(std::string_view s) {
    std::int64_t value = 0;
    std::from_chars(s.data(), s.data() + s.size(), value);
    return value;
}

// Prerelease segments: numeric segments compare numerically and sort before
// alphanumeric ones; alphanumeric segments compare bytewise. A longer
// segment list wins over an equal prefix ("alpha" < "alpha.1").
std::strong_ordering compare_prerelease(std::string_view a, std::string_view b) {
    if (a.empty() && b.empty()) return std::strong_ordering::equal;
    if (a.empty()) return std::strong_ordering::greater;  // bare > prerelease
    if (b.empty()) return std::strong_ordering::less;

    auto next_segment = [](std::string_view& rest) {
        auto dot = rest.find('.');
        std::string_view seg = rest.substr(0, dot);
        rest = dot == std::string_view::npos ? std::string_view{} : rest.substr(dot + 1);
        return seg;
    };

    std::string_view ra = a;
    std::string_view rb = b;
    while (true) {
        if (ra.empty() && rb.empty()) return std::strong_ordering::equal;
        if (ra.empty()) return std::strong_ordering::less;
        if (rb.empty()) return std::strong_ordering::greater;
        std::string_view sa = next_segment(ra);
        std::string_view sb = next_segment(rb);
        bool na = all_digits(sa);
        bool nb = all_digits(sb);
        if (na && nb) {
            auto cmp = parse_number(sa) <=> parse_number(sb);
            if (cmp != 0) return cmp;
        } else if (na != nb) {
            return na ? std::strong_ordering::less : std::strong_ordering::greater;
        } else {
            auto cmp = sa.compare(sb);
            if (cmp != 0) return cmp < 0 ? std::strong_ordering::less : std::strong_ordering::greater;
        }
    }
}

}  // namespace

Version Version::parse(std::string_view text) {
    if (text.empty()) {
        throw Error(ErrorKind::malformed_version, "empty version text");
    }
    Version v;
    v.raw = std::string(text);

    std::string_view rest = text;
    if (rest.front() == 'v' || rest.front() == 'V') {
        rest.remove_prefix(1);
    }
    // Build metadata carries no ordering information.
    if (auto plus = rest.find('+'); plus != std::string_view::npos) {
        rest = rest.substr(0, plus);
    }
    if (auto dash = rest.find('-'); dash != std::string_view::npos) {
        v.prerelease = std::string(rest.substr(dash + 1));
        rest = rest.substr(0, dash);
    }

    std::vector<std::int64_t> numbers;
    while (!rest.empty()) {
        auto dot = rest.find('.');
        std::string_view component = rest.substr(0, dot);
        rest = dot == std::string_view::npos ? std::string_view{} : rest.substr(dot + 1);

        std::size_t digits = 0;
        while (digits < component.size() &&
               std::isdigit(static_cast<unsigned char>(component[digits]))) {
            ++digits;
        }
        if (digits == 0) {
            if (numbers.empty()) {
                throw Error(ErrorKind::malformed_version,
                            "no leading numeric component in '" + std::string(text) + "'");
            }
            // Tag shapes like "1.2.beta": the residue becomes the prerelease.
            std::string residue(component);
            if (!rest.empty()) residue += "." + std::string(rest);
            if (!v.prerelease.empty()) residue += "." + v.prerelease;
            v.prerelease = residue;
            break;
        }
        numbers.push_back(parse_number(component.substr(0, digits)));
        if (digits < component.size()) {
            // Partially numeric component ("3rc1"): numeric prefix counts,
            // the residue and everything after it joins the prerelease.
            std::string residue(component.substr(digits));
            if (!rest.empty()) residue += "." + std::string(rest);
            if (!v.prerelease.empty()) residue += "." + v.prerelease;
            v.prerelease = residue;
            break;
        }
    }
    if (numbers.empty()) {
        throw Error(ErrorKind::malformed_version,
                    "no leading numeric component in '" + std::string(text) + "'");
    }
    v.major = numbers[0];
    v.minor = numbers.size() > 1 ? numbers[1] : 0;
    v.patch = numbers.size() > 2 ? numbers[2] : 0;
    for (std::size_t i = 3; i < numbers.size(); ++i) {
        v.extra.push_back(numbers[i]);
    }
    return v;
}

std::string Version::canonical() const {
    std::ostringstream out;
    out << major << '.' << minor << '.' << patch;
    for (auto component : extra) {
        out << '.' << component;
    }
    if (!prerelease.empty()) {
        out << '-' << prerelease;
    }
    return out.str();
}

std::strong_ordering compare_versions(const Version& a, const Version& b) {
    if (auto cmp = a.major <=> b.major; cmp != 0) return cmp;
    if (auto cmp = a.minor <=> b.minor; cmp != 0) return cmp;
    if (auto cmp = a.patch <=> b.patch; cmp != 0) return cmp;
    std::size_t n = std::max(a.extra.size(), b.extra.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::int64_t ea = i < a.extra.size() ? a.extra[i] : 0;
        std::int64_t eb = i < b.extra.size() ? b.extra[i] : 0;
        if (auto cmp = ea <=> eb; cmp != 0) return cmp;
    }
    return compare_prerelease(a.prerelease, b.prerelease);
}

bool VersionRange::contains(const Version& v) const {
    if (start) {
        auto cmp = compare_versions(v, *start);
        if (cmp == std::strong_ordering::less) return false;
        if (cmp == std::strong_ordering::equal && !start_inclusive) return false;
    }
    if (end) {
        auto cmp = compare_versions(v, *end);
        if (cmp == std::strong_ordering::greater) return false;
        if (cmp == std::strong_ordering::equal && !end_inclusive) return false;
    }
    return true;
}

bool version_in_range(const Version& v, const std::vector<VersionRange>& ranges) {
    for (const auto& range : ranges) {
        if (range.contains(v)) return true;
    }
    return false;
}

}  // namespace depnet
