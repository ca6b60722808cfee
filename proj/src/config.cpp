#include "h2tail/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace h2tail {

namespace {

std::string trim(const std::string& s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
    auto pos = line.find('#');
    return pos == std::string::npos ? line : line.substr(0, pos);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse_file(const std::string& path,
                                          const std::set<std::string>& list_sections) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str(), list_sections, path);
}

KeyValueConfig KeyValueConfig::parse_string(const std::string& text,
                                            const std::set<std::string>& list_sections,
                                            const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    std::string section;
    bool section_is_list = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string body = trim(strip_comment(line));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']')
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section header");
            section = trim(body.substr(1, body.size() - 2));
            if (section.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
            section_is_list = list_sections.count(section) > 0;
            if (section_is_list) cfg.lists_[section];  // section may stay empty
            continue;
        }
        if (section_is_list) {
            cfg.lists_[section].push_back(body);
            continue;
        }
        auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected `key = value`, got: " + body);
        std::string key = trim(body.substr(0, eq));
        std::string value = trim(body.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        std::string full = section.empty() ? key : section + "." + key;
        if (cfg.values_.count(full))
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key: " + full);
        cfg.values_[full] = value;
    }
    return cfg;
}

bool KeyValueConfig::has(const std::string& key) const {
    return values_.count(key) > 0;
}

const std::string& KeyValueConfig::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(origin_ + ": missing config key: " + key);
    accessed_.insert(key);
    return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
    const std::string& v = raw(key);
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(origin_ + ": key " + key + ": not a number: " + v);
    return d;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long KeyValueConfig::get_int(const std::string& key) const {
    const std::string& v = raw(key);
    char* end = nullptr;
    long long i = std::strtoll(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(origin_ + ": key " + key + ": not an integer: " + v);
    return i;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = raw(key);
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError(origin_ + ": key " + key + ": not a boolean: " + v);
}

std::string KeyValueConfig::get_string(const std::string& key) const {
    return raw(key);
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw(key) : fallback;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
    std::istringstream in(raw(key));
    std::vector<double> out;
    double d;
    while (in >> d) out.push_back(d);
    if (!in.eof())
        throw ConfigError(origin_ + ": key " + key + ": expected numbers");
    return out;
}

const std::vector<std::string>& KeyValueConfig::list_section(const std::string& section) const {
    static const std::vector<std::string> empty;
    auto it = lists_.find(section);
    return it == lists_.end() ? empty : it->second;
}

void KeyValueConfig::apply_override(const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must be key=value: " + assignment);
    std::string key = trim(assignment.substr(0, eq));
    std::string value = trim(assignment.substr(eq + 1));
    if (key.empty()) throw ConfigError("override has empty key: " + assignment);
    values_[key] = value;
}

void KeyValueConfig::reject_unknown() const {
    std::string unknown;
    for (const auto& [key, value] : values_) {
        (void)value;
        if (!accessed_.count(key)) {
            if (!unknown.empty()) unknown += ", ";
            unknown += key;
        }
    }
    if (!unknown.empty())
        throw ConfigError(origin_ + ": unknown config keys: " + unknown);
}

std::vector<std::string> KeyValueConfig::keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    for (const auto& [key, value] : values_) {
        (void)value;
        if (key.rfind(prefix, 0) == 0) out.push_back(key);
    }
    return out;
}

}  // namespace h2tail
