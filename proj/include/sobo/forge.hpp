#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace sobo {

struct RepoRef {
    std::string host;  // base URL, or "fake" for the directory-backed forge
    std::string owner;
    std::string name;

    std::string full_name() const { return owner + "/" + name; }
    // stable key for state files and maps
    std::string key() const { return owner + "__" + name; }

    friend bool operator==(const RepoRef& a, const RepoRef& b) {
        return a.host == b.host && a.owner == b.owner && a.name == b.name;
    }
    friend bool operator<(const RepoRef& a, const RepoRef& b) {
        if (a.host != b.host) return a.host < b.host;
        if (a.owner != b.owner) return a.owner < b.owner;
        return a.name < b.name;
    }
};

struct CommitInfo {
    std::string hash;
    std::string author_login;
    long long timestamp = 0; // UTC seconds
    std::vector<std::string> parents;
};

struct IssueRef {
    RepoRef repo;
    int number = 0;
    std::string title;
};

struct CommentInfo {
    long long id = 0;
    std::string author_login;
    std::string body;
    long long timestamp = 0;
};

class ForgeError : public std::runtime_error {
public:
    enum class Kind {
        Unreachable,   // network / IO trouble, retryable
        UnknownSince,  // history rewrite: the commit cursor no longer exists
        UnknownCommit,
        UnknownIssue,
        AuthFailure,
        RateLimited,   // retryable after backoff
    };

    ForgeError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }
    bool retryable() const { return kind_ == Kind::Unreachable || kind_ == Kind::RateLimited; }

private:
    Kind kind_;
};

// A place that hosts git repositories and issues. The opening post of an
// issue is comment id 0, so the first comment added with post_comment gets
// id 1 and a caller listing with empty `since` always sees the issue body
// first.
class Forge {
public:
    virtual ~Forge() = default;

    // Commits strictly after `since`, oldest first. Empty `since` means the
    // full history. Throws UnknownSince when the cursor hash is gone.
    virtual std::vector<CommitInfo>
    list_new_commits(const RepoRef& repo, const std::optional<std::string>& since) = 0;

    // Snapshot of the Java source files at one commit: path -> content.
    virtual std::map<std::string, std::string> read_tree(const RepoRef& repo,
                                                         const std::string& commit) = 0;

    // Idempotent per (repo, title): an existing open issue with the exact
    // title is returned instead of a duplicate.
    virtual IssueRef open_issue(const RepoRef& repo, const std::string& title,
                                const std::string& body) = 0;

    virtual long long post_comment(const IssueRef& issue, const std::string& body) = 0;

    // Comments with id strictly greater than `since`, in id order; empty
    // `since` includes the opening post (id 0).
    virtual std::vector<CommentInfo> list_comments(const IssueRef& issue,
                                                   std::optional<long long> since) = 0;

    // Login the adapter authenticates as; used to skip the bot's own commits
    // and comments.
    virtual std::string self_login() const = 0;
};

// Runs `fn`, retrying retryable forge errors with doubling backoff. The final
// attempt's error propagates.
template <typename Fn>
auto with_retry(Fn&& fn, int attempts = 3,
                std::chrono::milliseconds base_delay = std::chrono::milliseconds(250))
    -> decltype(fn()) {
    for (int attempt = 1;; ++attempt) {
        try {
            return fn();
        } catch (const ForgeError& e) {
            if (!e.retryable() || attempt >= attempts) throw;
            if (base_delay.count() > 0)
                std::this_thread::sleep_for(base_delay * (1 << (attempt - 1)));
        }
    }
}

} // namespace sobo
