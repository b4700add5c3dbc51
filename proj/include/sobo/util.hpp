#pragma once

#include <cerrno>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fcntl.h>
#include <map>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <atomic>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace sobo {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r' || s.front() == '\n'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '\n'))
        s.remove_suffix(1);
    return s;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    return out;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            parts.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return parts;
}

inline std::vector<std::string> split_lines(std::string_view s) {
    std::vector<std::string> lines;
    size_t start = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\n') {
            size_t end = i;
            if (end > start && s[end - 1] == '\r') --end;
            lines.emplace_back(s.substr(start, end - start));
            start = i + 1;
        }
    }
    if (start < s.size()) {
        std::string_view last = s.substr(start);
        if (!last.empty() && last.back() == '\r') last.remove_suffix(1);
        lines.emplace_back(last);
    }
    return lines;
}

// Value escaping for the line-delimited record files: keeps records one per
// line and fields free of the key=value separators.
inline std::string encode_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    static const char* hex = "0123456789ABCDEF";
    for (unsigned char c : s) {
        if (c == '%' || c == ' ' || c == '=' || c == '\t' || c == '\n' || c == '\r') {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xF];
        } else {
            out += static_cast<char>(c);
        }
    }
    return out;
}

inline int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

inline std::string decode_field(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '%' && i + 2 < s.size() && hex_val(s[i + 1]) >= 0 && hex_val(s[i + 2]) >= 0) {
            out += static_cast<char>(hex_val(s[i + 1]) * 16 + hex_val(s[i + 2]));
            i += 2;
        } else {
            out += s[i];
        }
    }
    return out;
}

inline std::string replace_all(std::string text, std::string_view needle,
                               std::string_view replacement) {
    if (needle.empty()) return text;
    std::string out;
    out.reserve(text.size());
    size_t pos = 0;
    while (true) {
        size_t hit = text.find(needle, pos);
        if (hit == std::string::npos) {
            out.append(text, pos, std::string::npos);
            return out;
        }
        out.append(text, pos, hit - pos);
        out.append(replacement);
        pos = hit + needle.size();
    }
}

// Parses one "v1 key=value key=value" record line; empty map when the line is
// not a well-formed v1 record (torn tail, foreign text, later schema).
inline std::map<std::string, std::string> parse_kv_line(std::string_view line) {
    std::map<std::string, std::string> out;
    std::vector<std::string> parts = split(line, ' ');
    if (parts.empty() || parts[0] != "v1") return {};
    for (size_t i = 1; i < parts.size(); ++i) {
        if (parts[i].empty()) continue;
        size_t eq = parts[i].find('=');
        if (eq == std::string::npos) return {};
        out[parts[i].substr(0, eq)] = parts[i].substr(eq + 1);
    }
    return out;
}

inline std::optional<std::string> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline bool write_file(const std::filesystem::path& p, std::string_view content) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    return static_cast<bool>(out);
}

// Write-then-rename so readers never observe a half-written file.
inline bool atomic_write_file(const std::filesystem::path& p, std::string_view content) {
    std::filesystem::path tmp = p;
    tmp += ".tmp";
    if (!write_file(tmp, content)) return false;
    std::error_code ec;
    std::filesystem::rename(tmp, p, ec);
    return !ec;
}

// One line, one write(2), then fsync: a concurrent reader sees either the
// whole line or nothing, and the data survives a crash after return.
inline bool append_line_durable(const std::filesystem::path& p, std::string_view line) {
    std::string buf(line);
    buf += '\n';
    int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
    if (fd < 0) return false;
    bool ok = true;
    const char* data = buf.data();
    size_t left = buf.size();
    while (left > 0) {
        ssize_t n = ::write(fd, data, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            ok = false;
            break;
        }
        data += n;
        left -= static_cast<size_t>(n);
    }
    if (ok && ::fsync(fd) != 0) ok = false;
    ::close(fd);
    return ok;
}

inline std::string csv_field(std::string_view s) {
    bool needs_quote = s.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quote) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline std::string utc_date(std::int64_t epoch_seconds) {
    std::time_t t = static_cast<std::time_t>(epoch_seconds);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday);
    return buf;
}

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 1469598103934665603ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::mutex& log_mutex() {
    static std::mutex m;
    return m;
}

// Process-wide switch; harnesses that assert on noisy failure paths turn
// logging off so their own output stays readable.
inline std::atomic<bool>& log_enabled() {
    static std::atomic<bool> on{true};
    return on;
}

inline void log_line(const char* level, std::string_view msg) {
    if (!log_enabled().load(std::memory_order_relaxed)) return;
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::snprintf(stamp, sizeof(stamp), "%04d-%02d-%02d %02d:%02d:%02d", tm.tm_year + 1900, tm.tm_mon + 1,
                  tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
    std::lock_guard<std::mutex> lock(log_mutex());
    std::cerr << stamp << " [" << level << "] " << msg << "\n";
}

inline void log_info(std::string_view msg) { log_line("info", msg); }
inline void log_warn(std::string_view msg) { log_line("warn", msg); }

} // namespace sobo
