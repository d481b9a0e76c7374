#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace nearzero {

// One verified statistic. `relation` states how value and threshold compare
// when the row passes ("<=" for statistics bounded above, ">=" for p-values
// and the like); `ran` is false when the row's computation was skipped, with
// the reason in `note`.
struct StatReport {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation = "<=";
    bool pass = false;
    bool ran = true;
    std::int64_t sample_a = 0;
    std::int64_t sample_b = 0;
    double runtime_seconds = 0.0;
    std::string note;
};

StatReport report_le(const std::string& name, double value, double threshold,
                     std::int64_t sample_a = 0, std::int64_t sample_b = 0);
StatReport report_ge(const std::string& name, double value, double threshold,
                     std::int64_t sample_a = 0, std::int64_t sample_b = 0);
StatReport report_not_run(const std::string& name, const std::string& reason);

// "name value relation threshold PASS|FAIL", aligned for terminals;
// rows that did not run print "NOT RUN" with the reason.
std::string format_report_line(const StatReport& r);

// Deterministic artifact: no runtimes, doubles in shortest round-trip form.
void write_report_csv(const std::vector<StatReport>& rows, const std::string& file);
// Full record including runtimes.
void write_summary_json(const std::vector<StatReport>& rows, const std::string& file);

// Small deterministic CSV writers for per-run sample dumps.
void write_column_csv(const std::string& file, const std::string& header,
                      const std::vector<double>& column);
void write_columns_csv(const std::string& file, const std::vector<std::string>& headers,
                       const std::vector<std::vector<double>>& columns);

} // namespace nearzero
