#pragma once

#include "sobo/forge.hpp"
#include "sobo/util.hpp"

#include <httplib.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sobo {

namespace detail {

// strict base64, whitespace tolerated (blob contents arrive with newlines)
inline std::string base64_decode(const std::string& in) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::string out;
    out.reserve(in.size() / 4 * 3);
    int buffer = 0, bits = 0;
    for (char c : in) {
        if (c == '=' || c == '\n' || c == '\r' || c == ' ' || c == '\t') continue;
        int v = val(c);
        if (v < 0) continue;
        buffer = (buffer << 6) | v;
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out += static_cast<char>((buffer >> bits) & 0xff);
        }
    }
    return out;
}

// "2024-01-15T10:03:00Z" -> UTC seconds. The GitHub API always reports UTC.
inline long long parse_iso8601(const std::string& s) {
    std::tm tm{};
    if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                    &tm.tm_hour, &tm.tm_min, &tm.tm_sec) != 6)
        return 0;
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    return static_cast<long long>(timegm(&tm));
}

} // namespace detail

// REST v3 adapter. Works against public GitHub and enterprise installations
// (base_url like https://ghe.example.com/api/v3). The token comes from an
// environment variable at construction and lives only in memory: it is never
// logged and never written anywhere.
class GithubForge : public Forge {
public:
    struct Options {
        std::string base_url = "https://api.github.com";
        std::string token_env = "SOBO_TOKEN";
        std::string login = "sobo";
        int per_page = 100;
        int timeout_seconds = 30;
    };

    explicit GithubForge(Options options) : opts_(std::move(options)) {
        const char* tok = std::getenv(opts_.token_env.c_str());
        if (tok) token_ = tok;
        split_base_url();
    }

    std::vector<CommitInfo> list_new_commits(const RepoRef& repo,
                                             const std::optional<std::string>& since) override {
        std::vector<CommitInfo> newest_first;
        bool found_since = false;
        for (int page = 1; !found_since; ++page) {
            std::string path = repo_path(repo) + "/commits?per_page=" +
                               std::to_string(opts_.per_page) + "&page=" + std::to_string(page);
            auto res = get(path);
            if (res.status == 409) break; // GitHub's marker for an empty repository
            check_status(res, path, ForgeError::Kind::Unreachable);
            auto body = parse_json(res.body, path);
            if (!body.is_array())
                throw ForgeError(ForgeError::Kind::Unreachable, path + ": unexpected shape");
            for (const auto& c : body) {
                std::string sha = c.value("sha", "");
                if (since && sha == *since) {
                    found_since = true;
                    break;
                }
                newest_first.push_back(parse_commit(c));
            }
            if (found_since || static_cast<int>(body.size()) < opts_.per_page) break;
        }
        if (since && !found_since)
            throw ForgeError(ForgeError::Kind::UnknownSince,
                             "commit " + *since + " not in " + repo.full_name());
        std::vector<CommitInfo> commits(newest_first.rbegin(), newest_first.rend());
        std::stable_sort(commits.begin(), commits.end(),
                         [](const CommitInfo& a, const CommitInfo& b) {
                             return a.timestamp < b.timestamp;
                         });
        return commits;
    }

    std::map<std::string, std::string> read_tree(const RepoRef& repo,
                                                 const std::string& commit) override {
        std::string path = repo_path(repo) + "/git/trees/" + commit + "?recursive=1";
        auto res = get(path);
        check_status(res, path, ForgeError::Kind::UnknownCommit);
        auto body = parse_json(res.body, path);
        std::map<std::string, std::string> files;
        for (const auto& entry : body.value("tree", nlohmann::json::array())) {
            if (entry.value("type", "") != "blob") continue;
            std::string file_path = entry.value("path", "");
            if (file_path.size() < 5 || file_path.substr(file_path.size() - 5) != ".java")
                continue;
            files[file_path] = read_blob(repo, entry.value("sha", ""));
        }
        return files;
    }

    IssueRef open_issue(const RepoRef& repo, const std::string& title,
                        const std::string& body) override {
        for (int page = 1;; ++page) {
            std::string path = repo_path(repo) + "/issues?state=open&per_page=" +
                               std::to_string(opts_.per_page) + "&page=" + std::to_string(page);
            auto res = get(path);
            check_status(res, path, ForgeError::Kind::Unreachable);
            auto list = parse_json(res.body, path);
            if (!list.is_array()) break;
            for (const auto& issue : list) {
                if (issue.contains("pull_request")) continue; // the endpoint mixes PRs in
                if (issue.value("title", "") == title)
                    return IssueRef{repo, issue.value("number", 0), title};
            }
            if (static_cast<int>(list.size()) < opts_.per_page) break;
        }
        std::string path = repo_path(repo) + "/issues";
        nlohmann::json payload = {{"title", title}, {"body", body}};
        auto res = post(path, payload.dump());
        check_status(res, path, ForgeError::Kind::Unreachable);
        auto created = parse_json(res.body, path);
        return IssueRef{repo, created.value("number", 0), title};
    }

    long long post_comment(const IssueRef& issue, const std::string& body) override {
        std::string path =
            repo_path(issue.repo) + "/issues/" + std::to_string(issue.number) + "/comments";
        nlohmann::json payload = {{"body", body}};
        auto res = post(path, payload.dump());
        check_status(res, path, ForgeError::Kind::UnknownIssue);
        return parse_json(res.body, path).value("id", 0ll);
    }

    std::vector<CommentInfo> list_comments(const IssueRef& issue,
                                           std::optional<long long> since) override {
        std::vector<CommentInfo> out;
        std::string issue_path =
            repo_path(issue.repo) + "/issues/" + std::to_string(issue.number);
        if (!since) {
            // the opening post is comment id 0; real comment ids are all larger
            auto res = get(issue_path);
            check_status(res, issue_path, ForgeError::Kind::UnknownIssue);
            auto body = parse_json(res.body, issue_path);
            out.push_back(CommentInfo{0, login_of(body), body.value("body", ""),
                                      detail::parse_iso8601(body.value("created_at", ""))});
        }
        for (int page = 1;; ++page) {
            std::string path = issue_path + "/comments?per_page=" +
                               std::to_string(opts_.per_page) + "&page=" + std::to_string(page);
            auto res = get(path);
            check_status(res, path, ForgeError::Kind::UnknownIssue);
            auto list = parse_json(res.body, path);
            if (!list.is_array()) break;
            for (const auto& c : list) {
                long long id = c.value("id", 0ll);
                if (since && id <= *since) continue;
                out.push_back(CommentInfo{id, login_of(c), c.value("body", ""),
                                          detail::parse_iso8601(c.value("created_at", ""))});
            }
            if (static_cast<int>(list.size()) < opts_.per_page) break;
        }
        std::sort(out.begin(), out.end(),
                  [](const CommentInfo& a, const CommentInfo& b) { return a.id < b.id; });
        return out;
    }

    std::string self_login() const override { return opts_.login; }

private:
    Options opts_;
    std::string token_;
    std::string scheme_host_;  // e.g. https://ghe.example.com
    std::string path_prefix_;  // e.g. /api/v3

    // httplib clients take scheme://host:port only; a path in the base URL
    // (enterprise /api/v3) becomes a per-request prefix
    void split_base_url() {
        const std::string& url = opts_.base_url;
        size_t scheme = url.find("://");
        size_t slash = scheme == std::string::npos ? url.find('/') : url.find('/', scheme + 3);
        if (slash == std::string::npos) {
            scheme_host_ = url;
        } else {
            scheme_host_ = url.substr(0, slash);
            path_prefix_ = url.substr(slash);
            while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
        }
    }

    std::string repo_path(const RepoRef& repo) const {
        return path_prefix_ + "/repos/" + repo.owner + "/" + repo.name;
    }

    httplib::Headers headers() const {
        httplib::Headers h{{"Accept", "application/vnd.github+json"},
                           {"User-Agent", "sobo-bot"}};
        if (!token_.empty()) h.emplace("Authorization", "Bearer " + token_);
        return h;
    }

    httplib::Result request(const std::string& path, const std::string* payload) const {
        httplib::Client cli(scheme_host_);
        cli.set_connection_timeout(opts_.timeout_seconds);
        cli.set_read_timeout(opts_.timeout_seconds);
        cli.enable_server_certificate_verification(true);
        if (payload) return cli.Post(path, headers(), *payload, "application/json");
        return cli.Get(path, headers());
    }

    httplib::Response get(const std::string& path) const { return roundtrip(path, nullptr); }
    httplib::Response post(const std::string& path, const std::string& payload) const {
        return roundtrip(path, &payload);
    }

    httplib::Response roundtrip(const std::string& path, const std::string* payload) const {
        auto res = request(path, payload);
        if (!res)
            throw ForgeError(ForgeError::Kind::Unreachable,
                             path + ": " + httplib::to_string(res.error()));
        return *res;
    }

    // Maps status codes to error kinds. `not_found` names what a 404 means at
    // this endpoint. Error text carries path and status only: responses to
    // failed calls never belong in logs wholesale and headers never at all.
    static void check_status(const httplib::Response& res, const std::string& path,
                             ForgeError::Kind not_found) {
        if (res.status >= 200 && res.status < 300) return;
        std::string where = path + ": HTTP " + std::to_string(res.status);
        if (res.status == 401) throw ForgeError(ForgeError::Kind::AuthFailure, where);
        if (res.status == 403) {
            // primary rate limiting arrives as 403 with a zeroed quota header
            if (res.get_header_value("X-RateLimit-Remaining") == "0")
                throw ForgeError(ForgeError::Kind::RateLimited, where);
            throw ForgeError(ForgeError::Kind::AuthFailure, where);
        }
        if (res.status == 429) throw ForgeError(ForgeError::Kind::RateLimited, where);
        if (res.status == 404) throw ForgeError(not_found, where);
        if (res.status >= 500) throw ForgeError(ForgeError::Kind::Unreachable, where);
        throw ForgeError(ForgeError::Kind::Unreachable, where);
    }

    static nlohmann::json parse_json(const std::string& body, const std::string& path) {
        auto parsed = nlohmann::json::parse(body, nullptr, false);
        if (parsed.is_discarded())
            throw ForgeError(ForgeError::Kind::Unreachable, path + ": malformed response");
        return parsed;
    }

    static std::string login_of(const nlohmann::json& obj) {
        if (obj.contains("user") && obj["user"].is_object())
            return obj["user"].value("login", "");
        return "";
    }

    static CommitInfo parse_commit(const nlohmann::json& c) {
        CommitInfo info;
        info.hash = c.value("sha", "");
        if (c.contains("author") && c["author"].is_object())
            info.author_login = c["author"].value("login", "");
        if (c.contains("commit") && c["commit"].is_object()) {
            const auto& meta = c["commit"];
            if (meta.contains("author") && meta["author"].is_object()) {
                if (info.author_login.empty())
                    info.author_login = meta["author"].value("name", "");
                info.timestamp = detail::parse_iso8601(meta["author"].value("date", ""));
            }
        }
        for (const auto& p : c.value("parents", nlohmann::json::array()))
            info.parents.push_back(p.value("sha", ""));
        return info;
    }

    std::string read_blob(const RepoRef& repo, const std::string& sha) {
        std::string path = repo_path(repo) + "/git/blobs/" + sha;
        auto res = get(path);
        check_status(res, path, ForgeError::Kind::UnknownCommit);
        auto body = parse_json(res.body, path);
        std::string content = body.value("content", "");
        if (body.value("encoding", "") == "base64") return detail::base64_decode(content);
        return content;
    }
};

} // namespace sobo
