#include "guirise/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "guirise/errors.hpp"
#include "guirise/util.hpp"

namespace guirise {

KvConfig KvConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

KvConfig KvConfig::parse_text(const std::string& text) {
    KvConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        size_t eq = s.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("expected 'key = value', got '" + std::string(s) + "'", lineno);
        std::string key(trim(s.substr(0, eq)));
        std::string value(trim(s.substr(eq + 1)));
        if (key.empty()) throw ConfigError("empty key", lineno);
        cfg.values_[key] = {value, lineno};
    }
    return cfg;
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second.first;
}

int64_t KvConfig::get_int(const std::string& key, int64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second.first;
    int64_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ConfigError("field '" + key + "' is not an integer: '" + v + "'", it->second.second);
    return out;
}

uint64_t KvConfig::get_u64(const std::string& key, uint64_t fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second.first;
    uint64_t out = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
        throw ConfigError("field '" + key + "' is not an unsigned integer: '" + v + "'",
                          it->second.second);
    return out;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second.first;
    try {
        size_t used = 0;
        double out = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("field '" + key + "' is not a number: '" + v + "'", it->second.second);
    }
}

bool KvConfig::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string v = to_lower(it->second.first);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("field '" + key + "' is not a boolean: '" + v + "'", it->second.second);
}

void KvConfig::check_known_keys(const std::vector<std::string>& known) const {
    for (const auto& [key, entry] : values_) {
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown field '" + key + "'", entry.second);
    }
}

std::string KvConfig::dump() const {
    std::string out;
    for (const auto& [key, entry] : values_) out += key + " = " + entry.first + "\n";
    return out;
}

} // namespace guirise
