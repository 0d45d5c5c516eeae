#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>

#include <json.hpp>

#include "depnet/ingest.hpp"

namespace depnet {

namespace {

using nlohmann::json;

// "2020-01-14T18:15Z" or "...T18:15:30Z" -> UTC seconds.
std::int64_t parse_feed_timestamp(const std::string& text) {
    int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
    int fields = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d", &year, &month, &day, &hour,
                             &minute, &second);
    if (fields < 3) return 0;

    // days-from-civil (Howard Hinnant's algorithm)
    auto y = static_cast<std::int64_t>(year) - (month <= 2 ? 1 : 0);
    auto era = (y >= 0 ? y : y - 399) / 400;
    auto yoe = y - era * 400;
    auto doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    auto doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    auto days = era * 146097 + doe - 719468;
    return days * 86400 + hour * 3600 + minute * 60 + second;
}

// cpe:2.3:a:vendor:product:version:... -> {"vendor:product", "version"}
struct CpeFields {
    std::string product_key;
    std::string version;
};

std::optional<CpeFields> split_cpe(const std::string& uri) {
    std::vector<std::string> parts;
    std::string current;
    for (std::size_t i = 0; i < uri.size(); ++i) {
        if (uri[i] == '\\' && i + 1 < uri.size()) {
            current.push_back(uri[i + 1]);
            ++i;
        } else if (uri[i] == ':') {
            parts.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(uri[i]);
        }
    }
    parts.push_back(std::move(current));
    if (parts.size() < 6 || parts[0] != "cpe") return std::nullopt;
    CpeFields out;
    out.product_key = parts[3] + ":" + parts[4];
    out.version = parts[5];
    std::transform(out.product_key.begin(), out.product_key.end(), out.product_key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::optional<Version> try_version(const std::string& text) {
    try {
        return Version::parse(text);
    } catch (const Error&) {
        return std::nullopt;
    }
}

void collect_cpe_matches(const json& node, std::vector<const json*>& out) {
    if (node.contains("cpe_match") && node["cpe_match"].is_array()) {
        for (const auto& m : node["cpe_match"]) out.push_back(&m);
    }
    if (node.contains("children") && node["children"].is_array()) {
        for (const auto& child : node["children"]) collect_cpe_matches(child, out);
    }
}

json parse_ndjson_line(std::string_view line, std::size_t line_no, const char* what) {
    json record = json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
        throw Error(ErrorKind::malformed_record,
                    std::string(what) + " line " + std::to_string(line_no) + " is not a JSON object");
    }
    return record;
}

}  // namespace

NvdImport import_nvd_feed(std::string_view text, const std::vector<ProductMapping>& mapping,
                          Warnings* warnings) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("CVE_Items") ||
        !doc["CVE_Items"].is_array()) {
        throw Error(ErrorKind::malformed_feed, "document has no CVE_Items array");
    }

    std::map<std::string, LibraryId> products;
    for (const auto& entry : mapping) {
        std::string key = entry.product_key;
        std::transform(key.begin(), key.end(), key.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        products[key] = entry.library;
    }

    NvdImport out;
    std::vector<std::string> seen_ids;
    for (const auto& item : doc["CVE_Items"]) {
        if (!item.is_object() || !item.contains("cve")) {
            warn(warnings, "nvd", "feed item without cve object skipped");
            continue;
        }
        const json& cve = item["cve"];

        VulnRecord record;
        record.id = cve.contains("CVE_data_meta") ? cve["CVE_data_meta"].value("ID", "") : "";
        if (record.id.empty()) {
            warn(warnings, "nvd", "feed item without CVE id skipped");
            continue;
        }
        if (std::find(seen_ids.begin(), seen_ids.end(), record.id) != seen_ids.end()) {
            warn(warnings, "nvd", "duplicate feed id " + record.id + " skipped");
            continue;
        }
        seen_ids.push_back(record.id);

        if (cve.contains("description") && cve["description"].contains("description_data")) {
            for (const auto& d : cve["description"]["description_data"]) {
                if (d.value("lang", "") == "en") {
                    record.description = d.value("value", "");
                    break;
                }
            }
        }

        if (item.contains("impact")) {
            const json& impact = item["impact"];
            if (impact.contains("baseMetricV3") && impact["baseMetricV3"].contains("cvssV3")) {
                std::string label = impact["baseMetricV3"]["cvssV3"].value("baseSeverity", "");
                record.severity = severity_from_string(label);
            } else if (impact.contains("baseMetricV2") && impact["baseMetricV2"].contains("cvssV2")) {
                double score = impact["baseMetricV2"]["cvssV2"].value("baseScore", -1.0);
                record.severity = score < 0 ? Severity::unknown : severity_from_score(score);
            }
        }

        record.published = parse_feed_timestamp(item.value("publishedDate", ""));

        if (cve.contains("references") && cve["references"].contains("reference_data")) {
            for (const auto& ref : cve["references"]["reference_data"]) {
                VulnReference reference;
                reference.url = ref.value("url", "");
                if (ref.contains("tags") && ref["tags"].is_array()) {
                    for (const auto& tag : ref["tags"]) {
                        if (tag.is_string()) reference.tags.push_back(tag.get<std::string>());
                    }
                }
                record.references.push_back(std::move(reference));
            }
        }

        std::vector<const json*> matches;
        if (item.contains("configurations") && item["configurations"].contains("nodes")) {
            for (const auto& node : item["configurations"]["nodes"]) {
                collect_cpe_matches(node, matches);
            }
        }

        std::map<LibraryId, AffectedLibrary> affected;
        bool saw_product = false;
        for (const json* m : matches) {
            if (!m->value("vulnerable", true)) continue;
            std::string uri = m->value("cpe23Uri", "");
            auto cpe = split_cpe(uri);
            if (!cpe) continue;
            saw_product = true;
            auto mapped = products.find(cpe->product_key);
            if (mapped == products.end()) continue;

            AffectedLibrary& slot = affected[mapped->second];
            slot.library = mapped->second;

            VersionRange range;
            bool has_bound = false;
            if (m->contains("versionStartIncluding")) {
                range.start = try_version(m->value("versionStartIncluding", ""));
                range.start_inclusive = true;
                has_bound = range.start.has_value();
            } else if (m->contains("versionStartExcluding")) {
                range.start = try_version(m->value("versionStartExcluding", ""));
                range.start_inclusive = false;
                has_bound = range.start.has_value();
            }
            if (m->contains("versionEndIncluding")) {
                range.end = try_version(m->value("versionEndIncluding", ""));
                range.end_inclusive = true;
                has_bound = has_bound || range.end.has_value();
            } else if (m->contains("versionEndExcluding")) {
                range.end = try_version(m->value("versionEndExcluding", ""));
                range.end_inclusive = false;
                has_bound = has_bound || range.end.has_value();
            }

            if (has_bound) {
                slot.ranges.push_back(std::move(range));
            } else if (cpe->version != "*" && cpe->version != "-" && !cpe->version.empty()) {
                if (auto exact = try_version(cpe->version)) {
                    slot.exact_versions.push_back(std::move(*exact));
                } else {
                    warn(warnings, "nvd",
                         record.id + ": unparseable cpe version '" + cpe->version + "' ignored");
                }
            } else {
                // wildcard with no bounds: every version is affected
                slot.ranges.push_back(VersionRange{});
            }
        }

        if (affected.empty()) {
            if (saw_product) {
                ++out.unmapped_dropped;
            } else {
                warn(warnings, "nvd", record.id + ": no affected products listed, dropped");
            }
            continue;
        }
        for (auto& [library, slot] : affected) {
            record.affected.push_back(std::move(slot));
        }
        out.records.push_back(std::move(record));
    }
    return out;
}

std::vector<LibraryMeta> load_library_metadata(std::string_view text, Warnings* warnings) {
    std::vector<LibraryMeta> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        std::string_view line =
            nl == std::string_view::npos ? text.substr(start) : text.substr(start, nl - start);
        ++line_no;
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (line.empty() || line == "\r") continue;

        json record = parse_ndjson_line(line, line_no, "metadata");
        if (!record.contains("library") || !record["library"].is_string()) {
            throw Error(ErrorKind::malformed_record,
                        "metadata line " + std::to_string(line_no) + " has no library field");
        }
        LibraryMeta meta;
        meta.library = LibraryId::from_repo_url(record["library"].get<std::string>());
        meta.language = record.value("language", "");
        meta.repository_url = record.value("repository_url", "");

        auto existing = std::find_if(out.begin(), out.end(), [&](const LibraryMeta& m) {
            return m.library == meta.library;
        });
        if (existing != out.end()) {
            warn(warnings, "metadata:" + std::to_string(line_no),
                 "duplicate record for '" + meta.library.canonical + "', last wins");
            *existing = std::move(meta);
        } else {
            out.push_back(std::move(meta));
        }
    }
    return out;
}

std::vector<ProductMapping> load_product_mapping(std::string_view text, Warnings* warnings) {
    std::vector<ProductMapping> out;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto nl = text.find('\n', start);
        std::string_view line =
            nl == std::string_view::npos ? text.substr(start) : text.substr(start, nl - start);
        ++line_no;
        start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        if (line.empty() || line == "\r") continue;

        json record = parse_ndjson_line(line, line_no, "mapping");
        if (!record.contains("product_key") || !record.contains("library")) {
            throw Error(ErrorKind::malformed_record,
                        "mapping line " + std::to_string(line_no) +
                            " needs product_key and library fields");
        }
        ProductMapping mapping;
        mapping.product_key = record["product_key"].get<std::string>();
        mapping.library = LibraryId::from_repo_url(record["library"].get<std::string>());
        if (mapping.library.empty()) {
            warn(warnings, "mapping:" + std::to_string(line_no), "empty library id skipped");
            continue;
        }
        out.push_back(std::move(mapping));
    }
    return out;
}

}  // namespace depnet
