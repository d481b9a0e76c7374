#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace nearzero {

// Flat key=value text, one pair per line; lines starting with '#' and blank
// lines are skipped. Reads are tracked so callers can reject typo keys once
// setup is done: any key never consumed by a getter is reported by
// unused_keys / require_all_used.
class Config {
  public:
    Config() = default;
    static Config from_file(const std::string& path);
    static Config from_string(const std::string& text);

    bool has(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    std::uint64_t get_u64(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    // comma separated; an empty value is an empty list
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;
    std::vector<std::string> get_string_list(const std::string& key) const;
    std::vector<std::string> get_string_list(const std::string& key,
                                             const std::vector<std::string>& fallback) const;

    // insert or override one pair (command line flags funnel through here)
    void set(const std::string& key, const std::string& value);

    std::vector<std::string> unused_keys() const;
    void require_all_used() const;

    const std::map<std::string, std::string>& entries() const { return kv_; }

  private:
    std::string raw(const std::string& key) const;

    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> seen_;
};

} // namespace nearzero
