#include "nearzero/report.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace nearzero {

namespace {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::ofstream open_out(const std::string& file) {
    std::ofstream out(file);
    if (!out)
        throw std::runtime_error("report: cannot write " + file);
    return out;
}

} // namespace

StatReport report_le(const std::string& name, double value, double threshold,
                     std::int64_t sample_a, std::int64_t sample_b) {
    StatReport r;
    r.name = name;
    r.value = value;
    r.threshold = threshold;
    r.relation = "<=";
    r.pass = (value <= threshold);
    r.sample_a = sample_a;
    r.sample_b = sample_b;
    return r;
}

StatReport report_ge(const std::string& name, double value, double threshold,
                     std::int64_t sample_a, std::int64_t sample_b) {
    StatReport r;
    r.name = name;
    r.value = value;
    r.threshold = threshold;
    r.relation = ">=";
    r.pass = (value >= threshold);
    r.sample_a = sample_a;
    r.sample_b = sample_b;
    return r;
}

StatReport report_not_run(const std::string& name, const std::string& reason) {
    StatReport r;
    r.name = name;
    r.relation = "";
    r.pass = false;
    r.ran = false;
    r.note = reason;
    return r;
}

std::string format_report_line(const StatReport& r) {
    std::string line = r.name;
    if (line.size() < 32)
        line.append(32 - line.size(), ' ');
    if (!r.ran)
        return line + " NOT RUN (" + r.note + ")";
    line += " " + format_double(r.value) + " " + r.relation + " " + format_double(r.threshold);
    line += r.pass ? "  PASS" : "  FAIL";
    if (!r.note.empty())
        line += "  (" + r.note + ")";
    return line;
}

void write_report_csv(const std::vector<StatReport>& rows, const std::string& file) {
    std::ofstream out = open_out(file);
    out << "name,value,threshold,relation,pass,ran,sample_a,sample_b\n";
    for (const StatReport& r : rows) {
        out << r.name << ',' << format_double(r.value) << ',' << format_double(r.threshold)
            << ',' << r.relation << ',' << (r.pass ? 1 : 0) << ',' << (r.ran ? 1 : 0) << ','
            << r.sample_a << ',' << r.sample_b << '\n';
    }
    if (!out.flush())
        throw std::runtime_error("report: short write to " + file);
}

void write_summary_json(const std::vector<StatReport>& rows, const std::string& file) {
    nlohmann::json doc = nlohmann::json::array();
    for (const StatReport& r : rows) {
        nlohmann::json row;
        row["name"] = r.name;
        row["value"] = r.value;
        row["threshold"] = r.threshold;
        row["relation"] = r.relation;
        row["pass"] = r.pass;
        row["ran"] = r.ran;
        row["sample_a"] = r.sample_a;
        row["sample_b"] = r.sample_b;
        row["runtime_seconds"] = r.runtime_seconds;
        if (!r.note.empty())
            row["note"] = r.note;
        doc.push_back(std::move(row));
    }
    std::ofstream out = open_out(file);
    out << doc.dump(2) << '\n';
    if (!out.flush())
        throw std::runtime_error("report: short write to " + file);
}

void write_column_csv(const std::string& file, const std::string& header,
                      const std::vector<double>& column) {
    write_columns_csv(file, {header}, {column});
}

void write_columns_csv(const std::string& file, const std::vector<std::string>& headers,
                       const std::vector<std::vector<double>>& columns) {
    if (headers.empty() || headers.size() != columns.size())
        throw std::invalid_argument("report: header/column mismatch");
    const std::size_t rows = columns[0].size();
    for (const auto& c : columns)
        if (c.size() != rows)
            throw std::invalid_argument("report: ragged columns");
    std::ofstream out = open_out(file);
    for (std::size_t j = 0; j < headers.size(); ++j)
        out << (j ? "," : "") << headers[j];
    out << '\n';
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < columns.size(); ++j)
            out << (j ? "," : "") << format_double(columns[j][i]);
        out << '\n';
    }
    if (!out.flush())
        throw std::runtime_error("report: short write to " + file);
}

} // namespace nearzero
