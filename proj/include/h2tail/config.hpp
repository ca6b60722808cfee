/*
  Plain-text key-value configuration.

  Files are organized in [section] blocks of `key = value` lines with `#`
  comments. Keys are stored flattened as "section.key". Some sections
  (mission plans, failure schedules) are ordered line lists instead of
  key-value maps and are kept verbatim, in order.

  Consumers access keys through the typed getters; every access is
  recorded so that reject_unknown() can flag keys nobody consumed.
*/
#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace h2tail {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class KeyValueConfig {
  public:
    KeyValueConfig() = default;

    // list_sections: section names whose content is an ordered list of raw
    // lines rather than key=value pairs.
    static KeyValueConfig parse_file(const std::string& path,
                                     const std::set<std::string>& list_sections = {});
    static KeyValueConfig parse_string(const std::string& text,
                                       const std::set<std::string>& list_sections = {},
                                       const std::string& origin = "<string>");

    bool has(const std::string& key) const;

    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    // whitespace-separated list of doubles
    std::vector<double> get_doubles(const std::string& key) const;

    const std::vector<std::string>& list_section(const std::string& section) const;

    // `key=value` or `section.key=value`; applied on top of file content
    void apply_override(const std::string& assignment);

    // throws ConfigError naming every key that was never read
    void reject_unknown() const;

    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

  private:
    std::map<std::string, std::string> values_;
    std::map<std::string, std::vector<std::string>> lists_;
    mutable std::set<std::string> accessed_;
    std::string origin_;

    const std::string& raw(const std::string& key) const;
};

}  // namespace h2tail
