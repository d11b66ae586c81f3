#include "xmodal/report_io.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

namespace xmodal {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

}  // namespace

nlohmann::json report_to_json(const EvalReport& report) {
    nlohmann::json recall = nlohmann::json::object();
    for (const auto& [k, value] : report.recall) {
        recall[std::to_string(k)] = value;
    }
    return nlohmann::json{
        {"task", report.task},         {"method", report.method},
        {"params", report.params},     {"sparsity", report.sparsity},
        {"r_m", report.r_m},           {"recall", recall},
        {"queries", report.queries},   {"unretrievable", report.unretrievable},
    };
}

void write_reports_json(std::span<const EvalReport> reports,
                        const std::filesystem::path& path) {
    nlohmann::json root;
    root["meta"] = {{"generated_at", utc_timestamp()}};
    nlohmann::json list = nlohmann::json::array();
    for (const EvalReport& r : reports) {
        list.push_back(report_to_json(r));
    }
    root["reports"] = std::move(list);

    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << root.dump(2) << '\n';
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

void write_reports_csv(std::span<const EvalReport> reports,
                       const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open for writing: " + path.string());
    }
    out << "task,method,sparsity,r_m,k,recall\n";
    char buf[64];
    for (const EvalReport& r : reports) {
        for (const auto& [k, value] : r.recall) {
            std::snprintf(buf, sizeof(buf), "%g,%u,%u,%.6f", r.sparsity, r.r_m, k, value);
            out << r.task << ',' << r.method << ',' << buf << '\n';
        }
    }
    if (!out) {
        throw IoError("write failed: " + path.string());
    }
}

}  // namespace xmodal
