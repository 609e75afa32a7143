#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace guirise {

// key = value text, one pair per line, '#' comments. Lookups that fail to
// parse raise ConfigError with the offending line number.
class KvConfig {
public:
    static KvConfig parse_file(const std::filesystem::path& path);
    static KvConfig parse_text(const std::string& text);

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    void set(const std::string& key, const std::string& value) { values_[key] = {value, -1}; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    int64_t get_int(const std::string& key, int64_t fallback) const;
    uint64_t get_u64(const std::string& key, uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;

    // Rejects keys outside the known set; keeps config typos loud.
    void check_known_keys(const std::vector<std::string>& known) const;

    // Sorted key = value lines; the resolved-config artifact.
    std::string dump() const;
    const std::map<std::string, std::pair<std::string, int>>& entries() const { return values_; }

private:
    std::map<std::string, std::pair<std::string, int>> values_; // key -> (value, source line)
};

} // namespace guirise
