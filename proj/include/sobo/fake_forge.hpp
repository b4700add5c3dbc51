#pragma once

#include "sobo/forge.hpp"
#include "sobo/util.hpp"

#include <algorithm>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace sobo {

// Directory-backed forge. The layout is a stable fixture format:
//
//   <root>/<owner>/<name>/
//     commits.log               one commit per line, push order:
//                               v1 hash=<hex> ts=<secs> author=<enc> parents=<h1,h2>
//     trees/<hash>/...          full working-tree snapshot at that commit
//     issues/<n>/meta           v1 title=<enc>
//     issues/<n>/comments.log   v1 id=<n> ts=<secs> author=<enc> body=<enc>
//
// Comment id 0 is the opening post (the issue body). Values use the same
// percent escaping as the datastore, so everything stays one record per line
// and greppable. Lines are appended with a single write each; readers skip a
// torn trailing line, which makes the directory safe to inspect (and to
// script pushes into) while a bot process is running.
class FakeForge : public Forge {
public:
    explicit FakeForge(std::filesystem::path root, std::string self = "sobo")
        : root_(std::move(root)), self_(std::move(self)) {
        std::filesystem::create_directories(root_);
    }

    // Wall clock for comment timestamps; tests inject a deterministic one.
    void set_clock(std::function<long long()> clock) { clock_ = std::move(clock); }

    std::string self_login() const override { return self_; }

    // ---- scripting interface (test/course-simulation side) ----

    void create_repo(const RepoRef& repo) {
        std::lock_guard<std::mutex> lock(mu_);
        std::filesystem::create_directories(repo_dir(repo) / "trees");
        std::filesystem::create_directories(repo_dir(repo) / "issues");
    }

    // Applies `changes` on top of the current head tree (value = new content,
    // nullopt = delete) and appends a commit. Returns the new hash.
    std::string push_commit(const RepoRef& repo, const std::string& author, long long timestamp,
                            const std::map<std::string, std::optional<std::string>>& changes) {
        std::lock_guard<std::mutex> lock(mu_);
        std::filesystem::create_directories(repo_dir(repo) / "trees");
        std::filesystem::create_directories(repo_dir(repo) / "issues");
        std::vector<CommitInfo> log = read_log(repo);
        std::string parent = log.empty() ? "" : log.back().hash;

        std::uint64_t h = fnv1a64(parent);
        h = fnv1a64(author, h);
        h = fnv1a64(std::to_string(timestamp), h);
        for (const auto& [path, content] : changes) {
            h = fnv1a64(path, h);
            h = fnv1a64(content ? *content : "\x01(deleted)", h);
        }
        h = fnv1a64(std::to_string(log.size()), h);
        std::string hash = hex64(h);

        std::filesystem::path tree = repo_dir(repo) / "trees" / hash;
        if (!parent.empty())
            std::filesystem::copy(repo_dir(repo) / "trees" / parent, tree,
                                  std::filesystem::copy_options::recursive);
        else
            std::filesystem::create_directories(tree);
        for (const auto& [path, content] : changes) {
            std::filesystem::path target = tree / path;
            if (content) {
                std::filesystem::create_directories(target.parent_path());
                write_file(target, *content);
            } else {
                std::filesystem::remove(target);
            }
        }

        // tree first, log line second: a reader never sees a commit without its snapshot
        std::string line = "v1 hash=" + hash + " ts=" + std::to_string(timestamp) +
                           " author=" + encode_field(author) + " parents=" + parent;
        append_line_durable(repo_dir(repo) / "commits.log", line);
        return hash;
    }

    long long post_comment_as(const IssueRef& issue, const std::string& author,
                              const std::string& body, long long timestamp = -1) {
        std::lock_guard<std::mutex> lock(mu_);
        return append_comment(issue, author, body, timestamp);
    }

    // Next N calls of `op` throw; for retry and degraded-mode tests.
    void fail_next(const std::string& op, int times,
                   ForgeError::Kind kind = ForgeError::Kind::Unreachable) {
        std::lock_guard<std::mutex> lock(mu_);
        faults_[op] = {times, kind};
    }

    int attempt_count(const std::string& op) const {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = attempts_.find(op);
        return it == attempts_.end() ? 0 : it->second;
    }

    std::optional<IssueRef> find_issue(const RepoRef& repo, const std::string& title) const {
        std::lock_guard<std::mutex> lock(mu_);
        return scan_for_title(repo, title);
    }

    // ---- Forge interface ----

    std::vector<CommitInfo> list_new_commits(const RepoRef& repo,
                                             const std::optional<std::string>& since) override {
        std::lock_guard<std::mutex> lock(mu_);
        trip("list_new_commits");
        if (!std::filesystem::exists(repo_dir(repo)))
            throw ForgeError(ForgeError::Kind::Unreachable,
                             "no such repository: " + repo.full_name());
        std::vector<CommitInfo> log = read_log(repo);
        std::stable_sort(log.begin(), log.end(),
                         [](const CommitInfo& a, const CommitInfo& b) {
                             return a.timestamp < b.timestamp;
                         });
        if (!since || since->empty()) return log;
        auto it = std::find_if(log.begin(), log.end(),
                               [&](const CommitInfo& c) { return c.hash == *since; });
        if (it == log.end())
            throw ForgeError(ForgeError::Kind::UnknownSince,
                             "commit " + *since + " not in history of " + repo.full_name());
        return std::vector<CommitInfo>(it + 1, log.end());
    }

    std::map<std::string, std::string> read_tree(const RepoRef& repo,
                                                 const std::string& commit) override {
        std::lock_guard<std::mutex> lock(mu_);
        trip("read_tree");
        std::filesystem::path tree = repo_dir(repo) / "trees" / commit;
        if (!std::filesystem::is_directory(tree))
            throw ForgeError(ForgeError::Kind::UnknownCommit,
                             "unknown commit " + commit + " in " + repo.full_name());
        std::map<std::string, std::string> files;
        for (const auto& entry : std::filesystem::recursive_directory_iterator(tree)) {
            if (!entry.is_regular_file()) continue;
            std::string rel = entry.path().lexically_relative(tree).generic_string();
            if (rel.size() < 5 || rel.compare(rel.size() - 5, 5, ".java") != 0) continue;
            if (auto content = read_file(entry.path())) files[rel] = std::move(*content);
        }
        return files;
    }

    IssueRef open_issue(const RepoRef& repo, const std::string& title,
                        const std::string& body) override {
        std::lock_guard<std::mutex> lock(mu_);
        trip("open_issue");
        if (!std::filesystem::exists(repo_dir(repo)))
            throw ForgeError(ForgeError::Kind::Unreachable,
                             "no such repository: " + repo.full_name());
        if (auto existing = scan_for_title(repo, title)) return *existing;
        std::filesystem::create_directories(repo_dir(repo) / "issues");
        int number = 1;
        for (const auto& entry : std::filesystem::directory_iterator(repo_dir(repo) / "issues")) {
            int n = std::atoi(entry.path().filename().string().c_str());
            if (n >= number) number = n + 1;
        }
        std::filesystem::path dir = repo_dir(repo) / "issues" / std::to_string(number);
        std::filesystem::create_directories(dir);
        write_file(dir / "meta", "v1 title=" + encode_field(title) + "\n");
        IssueRef ref{repo, number, title};
        append_comment(ref, self_, body, -1); // opening post, id 0
        return ref;
    }

    long long post_comment(const IssueRef& issue, const std::string& body) override {
        std::lock_guard<std::mutex> lock(mu_);
        trip("post_comment");
        return append_comment(issue, self_, body, -1);
    }

    std::vector<CommentInfo> list_comments(const IssueRef& issue,
                                           std::optional<long long> since) override {
        std::lock_guard<std::mutex> lock(mu_);
        trip("list_comments");
        std::filesystem::path log = issue_dir(issue) / "comments.log";
        if (!std::filesystem::exists(log))
            throw ForgeError(ForgeError::Kind::UnknownIssue,
                             "unknown issue #" + std::to_string(issue.number) + " in " +
                                 issue.repo.full_name());
        std::vector<CommentInfo> out;
        for (const std::string& line : split_lines(read_file(log).value_or(""))) {
            auto fields = parse_kv_line(line);
            if (fields.empty()) continue; // torn or foreign line
            CommentInfo c;
            c.id = std::atoll(fields["id"].c_str());
            c.timestamp = std::atoll(fields["ts"].c_str());
            c.author_login = decode_field(fields["author"]);
            c.body = decode_field(fields["body"]);
            if (!since || c.id > *since) out.push_back(std::move(c));
        }
        std::sort(out.begin(), out.end(),
                  [](const CommentInfo& a, const CommentInfo& b) { return a.id < b.id; });
        return out;
    }

private:
    std::filesystem::path root_;
    std::string self_;
    std::function<long long()> clock_ = [] { return static_cast<long long>(std::time(nullptr)); };
    mutable std::mutex mu_;
    std::map<std::string, std::pair<int, ForgeError::Kind>> faults_;
    std::map<std::string, int> attempts_;

    std::filesystem::path repo_dir(const RepoRef& repo) const {
        return root_ / repo.owner / repo.name;
    }
    std::filesystem::path issue_dir(const IssueRef& issue) const {
        return repo_dir(issue.repo) / "issues" / std::to_string(issue.number);
    }

    void trip(const std::string& op) {
        ++attempts_[op];
        auto it = faults_.find(op);
        if (it != faults_.end() && it->second.first > 0) {
            --it->second.first;
            throw ForgeError(it->second.second, "injected fault on " + op);
        }
    }

    std::vector<CommitInfo> read_log(const RepoRef& repo) const {
        std::vector<CommitInfo> log;
        auto content = read_file(repo_dir(repo) / "commits.log");
        if (!content) return log;
        for (const std::string& line : split_lines(*content)) {
            auto fields = parse_kv_line(line);
            if (fields.empty() || fields["hash"].empty()) continue;
            CommitInfo c;
            c.hash = fields["hash"];
            c.timestamp = std::atoll(fields["ts"].c_str());
            c.author_login = decode_field(fields["author"]);
            for (const std::string& p : split(fields["parents"], ','))
                if (!p.empty()) c.parents.push_back(p);
            log.push_back(std::move(c));
        }
        return log;
    }

    std::optional<IssueRef> scan_for_title(const RepoRef& repo, const std::string& title) const {
        std::filesystem::path issues = repo_dir(repo) / "issues";
        if (!std::filesystem::is_directory(issues)) return std::nullopt;
        std::optional<IssueRef> found;
        for (const auto& entry : std::filesystem::directory_iterator(issues)) {
            auto meta = read_file(entry.path() / "meta");
            if (!meta) continue;
            auto fields = parse_kv_line(trim(*meta));
            if (decode_field(fields["title"]) != title) continue;
            int n = std::atoi(entry.path().filename().string().c_str());
            if (!found || n < found->number) found = IssueRef{repo, n, title};
        }
        return found;
    }

    long long append_comment(const IssueRef& issue, const std::string& author,
                             const std::string& body, long long timestamp) {
        std::filesystem::path dir = issue_dir(issue);
        if (!std::filesystem::is_directory(dir))
            throw ForgeError(ForgeError::Kind::UnknownIssue,
                             "unknown issue #" + std::to_string(issue.number) + " in " +
                                 issue.repo.full_name());
        long long next = 0;
        for (const std::string& line : split_lines(read_file(dir / "comments.log").value_or(""))) {
            auto fields = parse_kv_line(line);
            if (fields.empty()) continue;
            long long id = std::atoll(fields["id"].c_str());
            if (id >= next) next = id + 1;
        }
        long long ts = timestamp >= 0 ? timestamp : clock_();
        std::string line = "v1 id=" + std::to_string(next) + " ts=" + std::to_string(ts) +
                           " author=" + encode_field(author) + " body=" + encode_field(body);
        append_line_durable(dir / "comments.log", line);
        return next;
    }
};

} // namespace sobo
