#pragma once

#include "sobo/rules.hpp"
#include "sobo/util.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobo {

struct ViolationRecord {
    std::string user;
    std::string assignment;
    RuleId rule = RuleId::S109;
    std::string file;
    int line = 0;
    std::string commit;
    long long timestamp = 0; // commit UTC seconds

    // the record key; appending a duplicate is a no-op
    std::string key() const {
        return encode_field(user) + "\x1f" + encode_field(assignment) + "\x1f" +
               rule_name(rule) + "\x1f" + encode_field(file) + "\x1f" + std::to_string(line) +
               "\x1f" + commit;
    }

    friend bool operator==(const ViolationRecord& a, const ViolationRecord& b) {
        return a.user == b.user && a.assignment == b.assignment && a.rule == b.rule &&
               a.file == b.file && a.line == b.line && a.commit == b.commit &&
               a.timestamp == b.timestamp;
    }
};

struct CommandRecord {
    std::string user;
    long long timestamp = 0;
    std::string task; // assignment-id
    std::string kind; // help|stop|go|more|rule|select
    std::string arg;
    // plumbing, not part of the key: where the command came from, for
    // crash-replay detection
    std::string repo;
    long long comment_id = 0;

    std::string key() const {
        return encode_field(user) + "\x1f" + std::to_string(timestamp) + "\x1f" +
               encode_field(task);
    }

    friend bool operator==(const CommandRecord& a, const CommandRecord& b) {
        return a.user == b.user && a.timestamp == b.timestamp && a.task == b.task &&
               a.kind == b.kind && a.arg == b.arg && a.repo == b.repo &&
               a.comment_id == b.comment_id;
    }
};

// One marker per analyzed commit, so commits with zero violations still
// appear in effectiveness timelines.
struct AnalyzedMarker {
    std::string user;
    std::string assignment;
    std::string commit;
    long long timestamp = 0;

    std::string key() const {
        return encode_field(user) + "\x1f" + encode_field(assignment) + "\x1f" + commit;
    }

    friend bool operator==(const AnalyzedMarker& a, const AnalyzedMarker& b) {
        return a.user == b.user && a.assignment == b.assignment && a.commit == b.commit &&
               a.timestamp == b.timestamp;
    }
};

class StoreError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Append-only store over three newline-delimited record files. Every line is
// `v1 key=value ...` with percent-escaped values, one fsync per append batch.
// On open, a torn trailing line (no final newline: a crash mid-append) is
// truncated away; fully written records are never touched.
class Datastore {
public:
    explicit Datastore(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
        load();
    }

    // ---- appends ----

    size_t append_violations(const std::vector<ViolationRecord>& records) {
        std::lock_guard<std::mutex> lock(mu_);
        std::vector<std::string> lines;
        std::vector<ViolationRecord> fresh;
        std::set<std::string> batch_keys;
        for (const ViolationRecord& r : records) {
            if (violation_keys_.count(r.key()) || !batch_keys.insert(r.key()).second) continue;
            lines.push_back(violation_line(r));
            fresh.push_back(r);
        }
        if (!lines.empty()) append_all(violations_path(), lines);
        for (ViolationRecord& r : fresh) {
            violation_keys_.insert(r.key());
            violations_.push_back(std::move(r));
        }
        return lines.size();
    }

    bool append_command(const CommandRecord& record) {
        std::lock_guard<std::mutex> lock(mu_);
        if (command_keys_.count(record.key())) return false;
        append_all(commands_path(), {command_line(record)});
        command_keys_.insert(record.key());
        commands_.push_back(record);
        return true;
    }

    bool append_analyzed(const AnalyzedMarker& marker) {
        std::lock_guard<std::mutex> lock(mu_);
        if (analyzed_keys_.count(marker.key())) return false;
        append_all(analyzed_path(), {analyzed_line(marker)});
        analyzed_keys_.insert(marker.key());
        analyzed_.push_back(marker);
        return true;
    }

    // ---- queries ----

    std::vector<ViolationRecord> query_by_commit(const std::string& assignment,
                                                 const std::string& commit) const {
        std::lock_guard<std::mutex> lock(mu_);
        std::vector<ViolationRecord> out;
        for (const ViolationRecord& r : violations_)
            if (r.assignment == assignment && r.commit == commit) out.push_back(r);
        sort_records(out);
        return out;
    }

    std::vector<ViolationRecord> query_by_rule(const std::string& assignment, RuleId rule) const {
        std::lock_guard<std::mutex> lock(mu_);
        std::vector<ViolationRecord> out;
        for (const ViolationRecord& r : violations_)
            if (r.assignment == assignment && r.rule == rule) out.push_back(r);
        sort_records(out);
        return out;
    }

    std::vector<ViolationRecord> query_timeline(const std::string& user, RuleId rule) const {
        std::lock_guard<std::mutex> lock(mu_);
        std::vector<ViolationRecord> out;
        for (const ViolationRecord& r : violations_)
            if (r.user == user && r.rule == rule) out.push_back(r);
        std::sort(out.begin(), out.end(), [](const ViolationRecord& a, const ViolationRecord& b) {
            if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
            return a.commit < b.commit;
        });
        return out;
    }

    // Resolves a commit hash or unique prefix (>= 4 chars) among analyzed
    // commits of one assignment.
    std::optional<std::string> resolve_commit(const std::string& assignment,
                                              const std::string& ref) const {
        std::lock_guard<std::mutex> lock(mu_);
        std::optional<std::string> match;
        for (const AnalyzedMarker& m : analyzed_) {
            if (m.assignment != assignment) continue;
            if (m.commit == ref) return m.commit;
            if (ref.size() >= 4 && m.commit.compare(0, ref.size(), ref) == 0) {
                if (match && *match != m.commit) return std::nullopt; // ambiguous
                match = m.commit;
            }
        }
        return match;
    }

    bool has_command_comment(const std::string& repo, long long comment_id) const {
        std::lock_guard<std::mutex> lock(mu_);
        for (const CommandRecord& c : commands_)
            if (c.repo == repo && c.comment_id == comment_id) return true;
        return false;
    }

    std::vector<ViolationRecord> violations() const {
        std::lock_guard<std::mutex> lock(mu_);
        return violations_;
    }

    std::vector<CommandRecord> commands() const {
        std::lock_guard<std::mutex> lock(mu_);
        return commands_;
    }

    std::vector<AnalyzedMarker> analyzed() const {
        std::lock_guard<std::mutex> lock(mu_);
        return analyzed_;
    }

    std::filesystem::path violations_path() const { return dir_ / "violations.log"; }
    std::filesystem::path commands_path() const { return dir_ / "commands.log"; }
    std::filesystem::path analyzed_path() const { return dir_ / "analyzed.log"; }

private:
    std::filesystem::path dir_;
    mutable std::mutex mu_;
    std::vector<ViolationRecord> violations_;
    std::vector<CommandRecord> commands_;
    std::vector<AnalyzedMarker> analyzed_;
    std::set<std::string> violation_keys_;
    std::set<std::string> command_keys_;
    std::set<std::string> analyzed_keys_;

    static void sort_records(std::vector<ViolationRecord>& out) {
        std::sort(out.begin(), out.end(), [](const ViolationRecord& a, const ViolationRecord& b) {
            if (a.file != b.file) return a.file < b.file;
            if (a.line != b.line) return a.line < b.line;
            return a.rule < b.rule;
        });
    }

    static std::string violation_line(const ViolationRecord& r) {
        return "v1 user=" + encode_field(r.user) + " assignment=" + encode_field(r.assignment) +
               " rule=" + rule_name(r.rule) + " file=" + encode_field(r.file) +
               " line=" + std::to_string(r.line) + " commit=" + encode_field(r.commit) +
               " ts=" + std::to_string(r.timestamp);
    }

    static std::string command_line(const CommandRecord& r) {
        return "v1 user=" + encode_field(r.user) + " ts=" + std::to_string(r.timestamp) +
               " task=" + encode_field(r.task) + " kind=" + encode_field(r.kind) +
               " arg=" + encode_field(r.arg) + " repo=" + encode_field(r.repo) +
               " comment=" + std::to_string(r.comment_id);
    }

    static std::string analyzed_line(const AnalyzedMarker& r) {
        return "v1 user=" + encode_field(r.user) + " assignment=" + encode_field(r.assignment) +
               " commit=" + encode_field(r.commit) + " ts=" + std::to_string(r.timestamp);
    }

    void append_all(const std::filesystem::path& path, const std::vector<std::string>& lines) {
        std::string buf;
        for (const std::string& line : lines) {
            buf += line;
            buf += '\n';
        }
        int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
        if (fd < 0) throw StoreError("cannot open " + path.string());
        const char* data = buf.data();
        size_t left = buf.size();
        while (left > 0) {
            ssize_t n = ::write(fd, data, left);
            if (n < 0) {
                if (errno == EINTR) continue;
                ::close(fd);
                throw StoreError("write failed on " + path.string());
            }
            data += n;
            left -= static_cast<size_t>(n);
        }
        if (::fsync(fd) != 0) {
            ::close(fd);
            throw StoreError("fsync failed on " + path.string());
        }
        ::close(fd);
    }

    // Drops a torn trailing line (crash mid-append) from the file, then
    // parses the remainder; malformed interior lines are skipped with a
    // warning but never rewritten.
    std::vector<std::string> recover_lines(const std::filesystem::path& path) {
        auto content = read_file(path);
        if (!content || content->empty()) return {};
        if (content->back() != '\n') {
            size_t keep = content->rfind('\n');
            keep = keep == std::string::npos ? 0 : keep + 1;
            log_warn("datastore: dropping torn trailing line in " + path.string());
            std::error_code ec;
            std::filesystem::resize_file(path, keep, ec);
            content->resize(keep);
        }
        return split_lines(*content);
    }

    void load() {
        for (const std::string& line : recover_lines(violations_path())) {
            auto f = parse_kv_line(line);
            auto rule = f.count("rule") ? rule_from_string(f["rule"]) : std::nullopt;
            if (f.empty() || !rule || !f.count("user") || !f.count("line")) {
                log_warn("datastore: skipping malformed violation record");
                continue;
            }
            ViolationRecord r;
            r.user = decode_field(f["user"]);
            r.assignment = decode_field(f["assignment"]);
            r.rule = *rule;
            r.file = decode_field(f["file"]);
            r.line = std::atoi(f["line"].c_str());
            r.commit = decode_field(f["commit"]);
            r.timestamp = std::atoll(f["ts"].c_str());
            if (violation_keys_.insert(r.key()).second) violations_.push_back(std::move(r));
        }
        for (const std::string& line : recover_lines(commands_path())) {
            auto f = parse_kv_line(line);
            if (f.empty() || !f.count("user") || !f.count("kind")) {
                log_warn("datastore: skipping malformed command record");
                continue;
            }
            CommandRecord r;
            r.user = decode_field(f["user"]);
            r.timestamp = std::atoll(f["ts"].c_str());
            r.task = decode_field(f["task"]);
            r.kind = decode_field(f["kind"]);
            r.arg = decode_field(f["arg"]);
            r.repo = decode_field(f["repo"]);
            r.comment_id = std::atoll(f["comment"].c_str());
            if (command_keys_.insert(r.key()).second) commands_.push_back(std::move(r));
        }
        for (const std::string& line : recover_lines(analyzed_path())) {
            auto f = parse_kv_line(line);
            if (f.empty() || !f.count("user") || !f.count("commit")) {
                log_warn("datastore: skipping malformed analyzed marker");
                continue;
            }
            AnalyzedMarker r;
            r.user = decode_field(f["user"]);
            r.assignment = decode_field(f["assignment"]);
            r.commit = decode_field(f["commit"]);
            r.timestamp = std::atoll(f["ts"].c_str());
            if (analyzed_keys_.insert(r.key()).second) analyzed_.push_back(std::move(r));
        }
    }
};

} // namespace sobo
