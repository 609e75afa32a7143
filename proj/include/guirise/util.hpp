#pragma once

#include <atomic>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace guirise {

inline std::string_view trim(std::string_view s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
    return out;
}

inline std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r' || s[i] == '\n')) ++i;
        size_t b = i;
        while (i < s.size() && !(s[i] == ' ' || s[i] == '\t' || s[i] == '\r' || s[i] == '\n')) ++i;
        if (i > b) out.emplace_back(s.substr(b, i - b));
    }
    return out;
}

// Shortest decimal string that round-trips the double exactly.
inline std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// Coordinates on the wire carry at most 4 decimal places.
inline std::string format_coord(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", x);
    std::string s(buf);
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Runs fn(i) for i in [0, n). Results must be written to pre-sized,
// index-addressed storage so the outcome is independent of scheduling.
inline void parallel_for(size_t n, int workers, const std::function<void(size_t)>& fn) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    size_t nthreads = std::min<size_t>(static_cast<size_t>(workers), n);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    std::atomic<size_t> next{0};
    for (size_t w = 0; w < nthreads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= n) return;
                fn(i);
            }
        });
    }
    for (auto& t : pool) t.join();
}

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

// Verbosity from the GUIRISE_LOG environment variable: quiet|info|debug.
inline LogLevel log_level() {
    static LogLevel lvl = [] {
        const char* env = std::getenv("GUIRISE_LOG");
        if (!env) return LogLevel::Info;
        std::string v = to_lower(env);
        if (v == "quiet" || v == "0") return LogLevel::Quiet;
        if (v == "debug" || v == "2") return LogLevel::Debug;
        return LogLevel::Info;
    }();
    return lvl;
}

} // namespace guirise
