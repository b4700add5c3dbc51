// Forge adapters. The FakeForge contract suite pins the semantics the bot
// depends on (cursor discipline, opening post id 0, idempotent issues); the
// GithubForge suite replays the same conduct against an in-process HTTP
// server speaking canned REST v3, including pagination and error mapping.

#include <catch2/catch_amalgamated.hpp>

#include <sobo/fake_forge.hpp>
#include <sobo/forge.hpp>
#include <sobo/github_forge.hpp>

#include <httplib.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

using namespace sobo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("sobo-forge-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

const RepoRef kRepo{"fake", "inda-24", "alice-task-3"};

ForgeError::Kind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ForgeError& e) {
        return e.kind();
    }
    FAIL("expected a ForgeError");
    return ForgeError::Kind::Unreachable;
}

} // namespace

// ---------------------------------------------------------------------------
// FakeForge contract
// ---------------------------------------------------------------------------

TEST_CASE("fake forge lists commits oldest first and honors the cursor") {
    TempDir tmp;
    FakeForge forge(tmp.path);
    forge.create_repo(kRepo);

    CHECK(forge.list_new_commits(kRepo, std::nullopt).empty());

    std::string c1 = forge.push_commit(kRepo, "alice", 1000, {{"A.java", "class A {}"}});
    std::string c2 = forge.push_commit(kRepo, "alice", 2000, {{"A.java", "class A { int x; }"}});
    std::string c3 = forge.push_commit(kRepo, "bob", 3000, {{"B.java", "class B {}"}});

    auto all = forge.list_new_commits(kRepo, std::nullopt);
    REQUIRE(all.size() == 3);
    CHECK(all[0].hash == c1);
    CHECK(all[1].hash == c2);
    CHECK(all[2].hash == c3);
    CHECK(all[0].author_login == "alice");
    CHECK(all[2].author_login == "bob");
    CHECK(all[0].timestamp == 1000);
    CHECK(all[1].parents == std::vector<std::string>{c1});
    CHECK(all[0].parents.empty());

    auto after_c1 = forge.list_new_commits(kRepo, c1);
    REQUIRE(after_c1.size() == 2);
    CHECK(after_c1[0].hash == c2);

    CHECK(forge.list_new_commits(kRepo, c3).empty());

    CHECK(kind_of([&] { forge.list_new_commits(kRepo, "0000000000000000"); }) ==
          ForgeError::Kind::UnknownSince);

    RepoRef missing{"fake", "inda-24", "nobody-task-1"};
    CHECK(kind_of([&] { forge.list_new_commits(missing, std::nullopt); }) ==
          ForgeError::Kind::Unreachable);
}

TEST_CASE("fake forge orders by timestamp even when pushes arrive out of order") {
    TempDir tmp;
    FakeForge forge(tmp.path);
    forge.create_repo(kRepo);
    std::string late = forge.push_commit(kRepo, "alice", 5000, {{"A.java", "class A {}"}});
    std::string early = forge.push_commit(kRepo, "alice", 1000, {{"B.java", "class B {}"}});
    auto all = forge.list_new_commits(kRepo, std::nullopt);
    REQUIRE(all.size() == 2);
    CHECK(all[0].hash == early);
    CHECK(all[1].hash == late);
}

TEST_CASE("fake forge trees snapshot java files only, at the right commit") {
    TempDir tmp;
    FakeForge forge(tmp.path);
    forge.create_repo(kRepo);
    std::string c1 = forge.push_commit(kRepo, "alice", 1000,
                                       {{"src/Main.java", "class Main {}"},
                                        {"README.md", "# hi"},
                                        {"docs/notes.txt", "notes"}});
    std::string c2 = forge.push_commit(kRepo, "alice", 2000,
                                       {{"src/Main.java", "class Main { int x; }"},
                                        {"src/util/Helper.java", "class Helper {}"}});
    std::string c3 = forge.push_commit(kRepo, "alice", 3000, {{"src/Main.java", std::nullopt}});

    auto t1 = forge.read_tree(kRepo, c1);
    REQUIRE(t1.size() == 1);
    CHECK(t1.at("src/Main.java") == "class Main {}");

    auto t2 = forge.read_tree(kRepo, c2);
    REQUIRE(t2.size() == 2);
    CHECK(t2.at("src/Main.java") == "class Main { int x; }");
    CHECK(t2.at("src/util/Helper.java") == "class Helper {}");

    auto t3 = forge.read_tree(kRepo, c3);
    REQUIRE(t3.size() == 1);
    CHECK(t3.count("src/util/Helper.java") == 1);

    CHECK(kind_of([&] { forge.read_tree(kRepo, "doesnotexist1234"); }) ==
          ForgeError::Kind::UnknownCommit);
}

TEST_CASE("fake forge issues are idempotent per title with opening post id 0") {
    TempDir tmp;
    FakeForge forge(tmp.path, "sobo");
    forge.create_repo(kRepo);

    IssueRef feedback = forge.open_issue(kRepo, "SOBO - Commit Analyzer", "greetings!");
    IssueRef commands = forge.open_issue(kRepo, "SOBO - Commands", "command me");
    CHECK(feedback.number == 1);
    CHECK(commands.number == 2);

    IssueRef again = forge.open_issue(kRepo, "SOBO - Commit Analyzer", "different body");
    CHECK(again.number == feedback.number);

    auto opening = forge.list_comments(feedback, std::nullopt);
    REQUIRE(opening.size() == 1);
    CHECK(opening[0].id == 0);
    CHECK(opening[0].author_login == "sobo");
    CHECK(opening[0].body == "greetings!"); // the original body stands

    CHECK(kind_of([&] { forge.list_comments(IssueRef{kRepo, 99, "?"}, std::nullopt); }) ==
          ForgeError::Kind::UnknownIssue);
    CHECK(kind_of([&] { forge.post_comment(IssueRef{kRepo, 99, "?"}, "hello"); }) ==
          ForgeError::Kind::UnknownIssue);
}

TEST_CASE("fake forge comment ids grow from 1 and the since filter is strict") {
    TempDir tmp;
    FakeForge forge(tmp.path, "sobo");
    forge.set_clock([] { return 7777LL; });
    forge.create_repo(kRepo);
    IssueRef issue = forge.open_issue(kRepo, "SOBO - Commands", "opening");

    CHECK(forge.post_comment(issue, "first") == 1);
    CHECK(forge.post_comment_as(issue, "alice", "<help>", 4242) == 2);
    CHECK(forge.post_comment(issue, "third") == 3);

    auto all = forge.list_comments(issue, std::nullopt);
    REQUIRE(all.size() == 4);
    CHECK(all[0].id == 0);
    CHECK(all[3].id == 3);
    CHECK(all[1].timestamp == 7777);
    CHECK(all[2].author_login == "alice");
    CHECK(all[2].body == "<help>");
    CHECK(all[2].timestamp == 4242);

    auto after1 = forge.list_comments(issue, 1);
    REQUIRE(after1.size() == 2);
    CHECK(after1[0].id == 2);

    CHECK(forge.list_comments(issue, 0).size() == 3);   // excludes the opening post
    CHECK(forge.list_comments(issue, 3).empty());       // strictly greater
}

TEST_CASE("fake forge comments round-trip awkward bodies on one line each") {
    TempDir tmp;
    FakeForge forge(tmp.path);
    forge.create_repo(kRepo);
    IssueRef issue = forge.open_issue(kRepo, "SOBO - Commands", "opening");
    std::string body = "| File | Line |\n| --- | --- |\nuse `x = 100%`\n\nand a\ttab";
    forge.post_comment(issue, body);

    auto got = forge.list_comments(issue, 0);
    REQUIRE(got.size() == 1);
    CHECK(got[0].body == body);

    std::ifstream log(tmp.path / kRepo.owner / kRepo.name / "issues/1/comments.log");
    std::string text((std::istreambuf_iterator<char>(log)), std::istreambuf_iterator<char>());
    CHECK(split_lines(text).size() == 2); // opening post + one comment
}

TEST_CASE("fake forge readers skip a torn trailing comment line") {
    TempDir tmp;
    FakeForge forge(tmp.path);
    forge.create_repo(kRepo);
    IssueRef issue = forge.open_issue(kRepo, "SOBO - Commands", "opening");
    forge.post_comment(issue, "intact");
    {
        std::ofstream log(tmp.path / kRepo.owner / kRepo.name / "issues/1/comments.log",
                          std::ios::app | std::ios::binary);
        log << "v1 id=9 ts"; // crash mid-append
    }
    auto got = forge.list_comments(issue, std::nullopt);
    REQUIRE(got.size() == 2);
    CHECK(got[1].body == "intact");
    // and the next append continues past it with a fresh id
    CHECK(forge.post_comment(issue, "after the tear") >= 2);
}

TEST_CASE("injected faults trip the chosen operation then clear") {
    TempDir tmp;
    FakeForge forge(tmp.path);
    forge.create_repo(kRepo);
    forge.push_commit(kRepo, "alice", 1000, {{"A.java", "class A {}"}});

    forge.fail_next("list_new_commits", 2);
    CHECK(kind_of([&] { forge.list_new_commits(kRepo, std::nullopt); }) ==
          ForgeError::Kind::Unreachable);
    CHECK(kind_of([&] { forge.list_new_commits(kRepo, std::nullopt); }) ==
          ForgeError::Kind::Unreachable);
    CHECK(forge.list_new_commits(kRepo, std::nullopt).size() == 1);
    CHECK(forge.attempt_count("list_new_commits") == 3);
    // other operations are untouched
    CHECK(forge.attempt_count("read_tree") == 0);

    forge.fail_next("open_issue", 1, ForgeError::Kind::RateLimited);
    CHECK(kind_of([&] { forge.open_issue(kRepo, "t", "b"); }) == ForgeError::Kind::RateLimited);
}

TEST_CASE("with_retry retries retryable kinds and gives up on the rest") {
    int calls = 0;
    auto flaky = [&calls](int fail_times, ForgeError::Kind kind) {
        return [&calls, fail_times, kind] {
            ++calls;
            if (calls <= fail_times) throw ForgeError(kind, "boom");
            return calls;
        };
    };

    calls = 0;
    CHECK(with_retry(flaky(2, ForgeError::Kind::Unreachable), 3,
                     std::chrono::milliseconds(0)) == 3);

    calls = 0;
    CHECK(with_retry(flaky(1, ForgeError::Kind::RateLimited), 3,
                     std::chrono::milliseconds(0)) == 2);

    calls = 0;
    CHECK_THROWS_AS(with_retry(flaky(3, ForgeError::Kind::Unreachable), 3,
                               std::chrono::milliseconds(0)),
                    ForgeError);
    CHECK(calls == 3); // all attempts spent

    calls = 0;
    CHECK_THROWS_AS(with_retry(flaky(1, ForgeError::Kind::AuthFailure), 3,
                               std::chrono::milliseconds(0)),
                    ForgeError);
    CHECK(calls == 1); // non-retryable: no second attempt

    calls = 0;
    CHECK_THROWS_AS(with_retry(flaky(1, ForgeError::Kind::UnknownSince), 3,
                               std::chrono::milliseconds(0)),
                    ForgeError);
    CHECK(calls == 1);
}

TEST_CASE("fake forge survives concurrent pushes and comments") {
    TempDir tmp;
    FakeForge forge(tmp.path);
    forge.create_repo(kRepo);
    IssueRef issue = forge.open_issue(kRepo, "SOBO - Commands", "opening");

    std::vector<std::thread> workers;
    for (int t = 0; t < 4; ++t) {
        workers.emplace_back([&forge, &issue, t] {
            for (int i = 0; i < 10; ++i)
                forge.post_comment_as(issue, "user" + std::to_string(t), "c", 100 + i);
        });
    }
    for (auto& w : workers) w.join();

    auto all = forge.list_comments(issue, std::nullopt);
    REQUIRE(all.size() == 41); // opening post + 40 comments
    for (size_t i = 0; i < all.size(); ++i) CHECK(all[i].id == static_cast<long long>(i));
}

// ---------------------------------------------------------------------------
// GithubForge against a canned REST server
// ---------------------------------------------------------------------------

namespace {

class MockGithub {
public:
    httplib::Server server;

    MockGithub() {
        server.set_pre_routing_handler([this](const httplib::Request& req, httplib::Response&) {
            std::lock_guard<std::mutex> lock(mu_);
            std::string line = req.method + " " + req.path;
            for (const auto& [k, v] : req.params) line += " " + k + "=" + v;
            requests_.push_back(line);
            auth_.push_back(req.get_header_value("Authorization"));
            agent_.push_back(req.get_header_value("User-Agent"));
            accept_.push_back(req.get_header_value("Accept"));
            return httplib::Server::HandlerResponse::Unhandled;
        });
        port_ = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port_ > 0);
        thread_ = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }

    ~MockGithub() {
        server.stop();
        if (thread_.joinable()) thread_.join();
    }

    std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

    std::vector<std::string> requests() const {
        std::lock_guard<std::mutex> lock(mu_);
        return requests_;
    }
    std::vector<std::string> auth_headers() const {
        std::lock_guard<std::mutex> lock(mu_);
        return auth_;
    }
    std::vector<std::string> user_agents() const {
        std::lock_guard<std::mutex> lock(mu_);
        return agent_;
    }
    std::vector<std::string> accepts() const {
        std::lock_guard<std::mutex> lock(mu_);
        return accept_;
    }

    size_t hits(const std::string& needle) const {
        std::lock_guard<std::mutex> lock(mu_);
        size_t n = 0;
        for (const std::string& r : requests_)
            if (r.find(needle) != std::string::npos) ++n;
        return n;
    }

private:
    int port_ = 0;
    std::thread thread_;
    mutable std::mutex mu_;
    std::vector<std::string> requests_;
    std::vector<std::string> auth_;
    std::vector<std::string> agent_;
    std::vector<std::string> accept_;
};

GithubForge make_forge(const std::string& base_url, const char* token = "hush-hush-token",
                       int per_page = 100) {
    static int serial = 0;
    std::string var = "SOBO_TEST_TOKEN_" + std::to_string(serial++);
    if (token)
        ::setenv(var.c_str(), token, 1);
    else
        ::unsetenv(var.c_str());
    GithubForge::Options opts;
    opts.base_url = base_url;
    opts.token_env = var;
    opts.login = "sobo";
    opts.per_page = per_page;
    opts.timeout_seconds = 5;
    return GithubForge(opts);
}

json commit_json(const std::string& sha, const std::string& login, const std::string& date,
                 std::vector<std::string> parents = {}) {
    json parr = json::array();
    for (const std::string& p : parents) parr.push_back({{"sha", p}});
    return json{{"sha", sha},
                {"author", {{"login", login}}},
                {"commit", {{"author", {{"name", login}, {"date", date}}}}},
                {"parents", parr}};
}

std::string base64_of(std::string_view bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    size_t i = 0;
    while (i + 2 < bytes.size()) {
        unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                     static_cast<unsigned char>(bytes[i + 2]);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += alphabet[v & 63];
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += "==";
    } else if (i + 2 == bytes.size()) {
        unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                     (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += "=";
    }
    return out;
}

const RepoRef kGhRepo{"github.com", "inda-24", "alice-task-3"};

} // namespace

TEST_CASE("github adapter paginates commits and returns them oldest first") {
    MockGithub mock;
    // newest first across pages, page size 2: [c5, c4], [c3, c2], [c1]
    mock.server.Get("/repos/inda-24/alice-task-3/commits",
                    [](const httplib::Request& req, httplib::Response& res) {
                        int page = std::atoi(req.get_param_value("page").c_str());
                        json body = json::array();
                        if (page == 1) {
                            body.push_back(commit_json("c5", "alice", "2024-01-15T10:05:00Z",
                                                       {"c4"}));
                            body.push_back(commit_json("c4", "alice", "2024-01-15T10:04:00Z",
                                                       {"c3"}));
                        } else if (page == 2) {
                            body.push_back(commit_json("c3", "bob", "2024-01-15T10:03:00Z",
                                                       {"c2"}));
                            body.push_back(commit_json("c2", "alice", "2024-01-15T10:02:00Z",
                                                       {"c1"}));
                        } else if (page == 3) {
                            body.push_back(commit_json("c1", "alice", "2024-01-15T10:01:00Z"));
                        }
                        res.set_content(body.dump(), "application/json");
                    });

    GithubForge forge = make_forge(mock.base_url(), "hush-hush-token", 2);
    auto commits = forge.list_new_commits(kGhRepo, std::nullopt);
    REQUIRE(commits.size() == 5);
    CHECK(commits[0].hash == "c1");
    CHECK(commits[4].hash == "c5");
    CHECK(commits[0].timestamp == 1705312860); // 2024-01-15T10:01:00Z
    CHECK(commits[2].author_login == "bob");
    CHECK(commits[4].parents == std::vector<std::string>{"c4"});
    CHECK(mock.hits("GET /repos/inda-24/alice-task-3/commits") == 3);

    // every request authenticated and labeled
    for (const std::string& a : mock.auth_headers()) CHECK(a == "Bearer hush-hush-token");
    for (const std::string& a : mock.user_agents()) CHECK(a == "sobo-bot");
    for (const std::string& a : mock.accepts()) CHECK(a == "application/vnd.github+json");
}

TEST_CASE("github adapter stops at the since cursor and detects rewrites") {
    MockGithub mock;
    mock.server.Get("/repos/inda-24/alice-task-3/commits",
                    [](const httplib::Request& req, httplib::Response& res) {
                        int page = std::atoi(req.get_param_value("page").c_str());
                        json body = json::array();
                        if (page == 1) {
                            body.push_back(commit_json("c3", "alice", "2024-01-15T10:03:00Z"));
                            body.push_back(commit_json("c2", "alice", "2024-01-15T10:02:00Z"));
                        } else if (page == 2) {
                            body.push_back(commit_json("c1", "alice", "2024-01-15T10:01:00Z"));
                        }
                        res.set_content(body.dump(), "application/json");
                    });

    GithubForge forge = make_forge(mock.base_url(), "hush-hush-token", 2);

    auto fresh = forge.list_new_commits(kGhRepo, "c2");
    REQUIRE(fresh.size() == 1);
    CHECK(fresh[0].hash == "c3");
    CHECK(mock.hits("GET /repos") == 1); // cursor found on page 1, no more pages

    CHECK(kind_of([&] { forge.list_new_commits(kGhRepo, "gone"); }) ==
          ForgeError::Kind::UnknownSince);
}

TEST_CASE("github adapter treats HTTP 409 as an empty repository") {
    MockGithub mock;
    mock.server.Get("/repos/inda-24/alice-task-3/commits",
                    [](const httplib::Request&, httplib::Response& res) {
                        res.status = 409;
                        res.set_content("{\"message\":\"Git Repository is empty.\"}",
                                        "application/json");
                    });
    GithubForge forge = make_forge(mock.base_url());
    CHECK(forge.list_new_commits(kGhRepo, std::nullopt).empty());
}

TEST_CASE("github adapter reads java blobs only and decodes base64") {
    MockGithub mock;
    mock.server.Get("/repos/inda-24/alice-task-3/git/trees/abc123",
                    [](const httplib::Request& req, httplib::Response& res) {
                        CHECK(req.get_param_value("recursive") == "1");
                        json body = {
                            {"sha", "abc123"},
                            {"tree",
                             json::array(
                                 {{{"path", "src"}, {"type", "tree"}, {"sha", "t1"}},
                                  {{"path", "src/Main.java"}, {"type", "blob"}, {"sha", "b1"}},
                                  {{"path", "README.md"}, {"type", "blob"}, {"sha", "b2"}},
                                  {{"path", "Plain.java"}, {"type", "blob"}, {"sha", "b3"}}})}};
                        res.set_content(body.dump(), "application/json");
                    });
    mock.server.Get("/repos/inda-24/alice-task-3/git/blobs/b1",
                    [](const httplib::Request&, httplib::Response& res) {
                        // GitHub wraps base64 in newlines; the decoder must cope
                        std::string b64 = base64_of("class Main { int x = 42; }\n");
                        b64.insert(10, "\n");
                        json body = {{"content", b64}, {"encoding", "base64"}};
                        res.set_content(body.dump(), "application/json");
                    });
    mock.server.Get("/repos/inda-24/alice-task-3/git/blobs/b3",
                    [](const httplib::Request&, httplib::Response& res) {
                        json body = {{"content", "class Plain {}"}, {"encoding", "utf-8"}};
                        res.set_content(body.dump(), "application/json");
                    });

    GithubForge forge = make_forge(mock.base_url());
    auto files = forge.read_tree(kGhRepo, "abc123");
    REQUIRE(files.size() == 2);
    CHECK(files.at("src/Main.java") == "class Main { int x = 42; }\n");
    CHECK(files.at("Plain.java") == "class Plain {}");
    CHECK(mock.hits("git/blobs/b2") == 0); // the markdown blob is never fetched

    CHECK(kind_of([&] { forge.read_tree(kGhRepo, "nope"); }) == ForgeError::Kind::UnknownCommit);
}

TEST_CASE("github adapter finds existing issues by exact title, skipping PRs") {
    MockGithub mock;
    std::mutex mu;
    std::vector<std::string> posted_bodies;
    mock.server.Get("/repos/inda-24/alice-task-3/issues",
                    [](const httplib::Request&, httplib::Response& res) {
                        json body = json::array(
                            {{{"number", 4},
                              {"title", "SOBO - Commit Analyzer"},
                              {"pull_request", {{"url", "..."}}}},
                             {{"number", 7}, {"title", "SOBO - Commit Analyzer (old)"}},
                             {{"number", 9}, {"title", "SOBO - Commit Analyzer"}}});
                        res.set_content(body.dump(), "application/json");
                    });
    mock.server.Post("/repos/inda-24/alice-task-3/issues",
                     [&](const httplib::Request& req, httplib::Response& res) {
                         {
                             std::lock_guard<std::mutex> lock(mu);
                             posted_bodies.push_back(req.body);
                         }
                         res.status = 201;
                         res.set_content(json{{"number", 12}}.dump(), "application/json");
                     });

    GithubForge forge = make_forge(mock.base_url());

    IssueRef existing = forge.open_issue(kGhRepo, "SOBO - Commit Analyzer", "body");
    CHECK(existing.number == 9); // PR with the same title must not win
    {
        std::lock_guard<std::mutex> lock(mu);
        CHECK(posted_bodies.empty());
    }

    IssueRef created = forge.open_issue(kGhRepo, "SOBO - Commands", "write commands here");
    CHECK(created.number == 12);
    {
        std::lock_guard<std::mutex> lock(mu);
        REQUIRE(posted_bodies.size() == 1);
        json payload = json::parse(posted_bodies[0]);
        CHECK(payload["title"] == "SOBO - Commands");
        CHECK(payload["body"] == "write commands here");
    }
}

TEST_CASE("github adapter posts comments and returns the forge id") {
    MockGithub mock;
    mock.server.Post("/repos/inda-24/alice-task-3/issues/9/comments",
                     [](const httplib::Request& req, httplib::Response& res) {
                         json payload = json::parse(req.body);
                         CHECK(payload["body"] == "nice push!");
                         res.status = 201;
                         res.set_content(json{{"id", 31337}}.dump(), "application/json");
                     });
    GithubForge forge = make_forge(mock.base_url());
    CHECK(forge.post_comment(IssueRef{kGhRepo, 9, "t"}, "nice push!") == 31337);
}

TEST_CASE("github adapter synthesizes the opening post as comment id 0") {
    MockGithub mock;
    mock.server.Get("/repos/inda-24/alice-task-3/issues/9",
                    [](const httplib::Request&, httplib::Response& res) {
                        json body = {{"number", 9},
                                     {"title", "SOBO - Commands"},
                                     {"body", "opening text"},
                                     {"user", {{"login", "sobo"}}},
                                     {"created_at", "2024-01-15T10:00:00Z"}};
                        res.set_content(body.dump(), "application/json");
                    });
    mock.server.Get("/repos/inda-24/alice-task-3/issues/9/comments",
                    [](const httplib::Request&, httplib::Response& res) {
                        json body = json::array(
                            {{{"id", 510},
                              {"body", "<help>"},
                              {"user", {{"login", "alice"}}},
                              {"created_at", "2024-01-15T10:05:00Z"}},
                             {{"id", 222},
                              {"body", "hello"},
                              {"user", {{"login", "bob"}}},
                              {"created_at", "2024-01-15T10:01:00Z"}}});
                        res.set_content(body.dump(), "application/json");
                    });

    GithubForge forge = make_forge(mock.base_url());
    IssueRef issue{kGhRepo, 9, "SOBO - Commands"};

    auto all = forge.list_comments(issue, std::nullopt);
    REQUIRE(all.size() == 3);
    CHECK(all[0].id == 0);
    CHECK(all[0].author_login == "sobo");
    CHECK(all[0].body == "opening text");
    CHECK(all[0].timestamp == 1705312800);
    CHECK(all[1].id == 222); // sorted by id regardless of response order
    CHECK(all[2].id == 510);

    auto after = forge.list_comments(issue, 222);
    REQUIRE(after.size() == 1);
    CHECK(after[0].id == 510);
    // with a cursor there is no reason to fetch the issue body
    auto log = mock.requests();
    CHECK(std::count(log.begin(), log.end(), "GET /repos/inda-24/alice-task-3/issues/9") == 1);
}

TEST_CASE("github adapter maps status codes to error kinds without leaking") {
    MockGithub mock;
    mock.server.Get("/repos/inda-24/alice-task-3/commits",
                    [](const httplib::Request&, httplib::Response& res) { res.status = 401; });
    mock.server.Get("/repos/inda-24/limited/commits",
                    [](const httplib::Request&, httplib::Response& res) {
                        res.status = 403;
                        res.set_header("X-RateLimit-Remaining", "0");
                        res.set_content("{\"message\":\"API rate limit exceeded\"}",
                                        "application/json");
                    });
    mock.server.Get("/repos/inda-24/forbidden/commits",
                    [](const httplib::Request&, httplib::Response& res) {
                        res.status = 403;
                        res.set_header("X-RateLimit-Remaining", "4999");
                    });
    mock.server.Get("/repos/inda-24/throttled/commits",
                    [](const httplib::Request&, httplib::Response& res) { res.status = 429; });
    mock.server.Get("/repos/inda-24/broken/commits",
                    [](const httplib::Request&, httplib::Response& res) { res.status = 502; });
    mock.server.Get("/repos/inda-24/alice-task-3/issues/404",
                    [](const httplib::Request&, httplib::Response& res) { res.status = 404; });

    GithubForge forge = make_forge(mock.base_url(), "topsecret-token-value");
    auto repo_named = [&](const std::string& name) { return RepoRef{"github.com", "inda-24", name}; };

    CHECK(kind_of([&] { forge.list_new_commits(kGhRepo, std::nullopt); }) ==
          ForgeError::Kind::AuthFailure);
    CHECK(kind_of([&] { forge.list_new_commits(repo_named("limited"), std::nullopt); }) ==
          ForgeError::Kind::RateLimited);
    CHECK(kind_of([&] { forge.list_new_commits(repo_named("forbidden"), std::nullopt); }) ==
          ForgeError::Kind::AuthFailure);
    CHECK(kind_of([&] { forge.list_new_commits(repo_named("throttled"), std::nullopt); }) ==
          ForgeError::Kind::RateLimited);
    CHECK(kind_of([&] { forge.list_new_commits(repo_named("broken"), std::nullopt); }) ==
          ForgeError::Kind::Unreachable);
    CHECK(kind_of([&] {
              forge.list_comments(IssueRef{kGhRepo, 404, "t"}, 5);
          }) == ForgeError::Kind::UnknownIssue);

    // the error text names the endpoint and status, never the token or body
    try {
        forge.list_new_commits(repo_named("limited"), std::nullopt);
        FAIL("expected throw");
    } catch (const ForgeError& e) {
        std::string what = e.what();
        CHECK(what.find("/repos/inda-24/limited/commits") != std::string::npos);
        CHECK(what.find("HTTP 403") != std::string::npos);
        CHECK(what.find("topsecret") == std::string::npos);
        CHECK(what.find("rate limit exceeded") == std::string::npos);
        CHECK(e.retryable());
    }
}

TEST_CASE("an unreachable host surfaces as a retryable Unreachable error") {
    std::string dead_url;
    {
        MockGithub mock;
        dead_url = mock.base_url();
    }
    GithubForge forge = make_forge(dead_url);
    try {
        forge.list_new_commits(kGhRepo, std::nullopt);
        FAIL("expected throw");
    } catch (const ForgeError& e) {
        CHECK(e.kind() == ForgeError::Kind::Unreachable);
        CHECK(e.retryable());
    }
}

TEST_CASE("enterprise base urls keep their path prefix on every request") {
    MockGithub mock;
    mock.server.Get("/api/v3/repos/inda-24/alice-task-3/commits",
                    [](const httplib::Request&, httplib::Response& res) {
                        res.set_content("[]", "application/json");
                    });
    GithubForge forge = make_forge(mock.base_url() + "/api/v3/");
    CHECK(forge.list_new_commits(kGhRepo, std::nullopt).empty());
    CHECK(mock.hits("GET /api/v3/repos/inda-24/alice-task-3/commits") == 1);
}

TEST_CASE("a missing token env var means unauthenticated requests") {
    MockGithub mock;
    mock.server.Get("/repos/inda-24/alice-task-3/commits",
                    [](const httplib::Request&, httplib::Response& res) {
                        res.set_content("[]", "application/json");
                    });
    GithubForge forge = make_forge(mock.base_url(), nullptr);
    CHECK(forge.list_new_commits(kGhRepo, std::nullopt).empty());
    REQUIRE(mock.auth_headers().size() == 1);
    CHECK(mock.auth_headers()[0].empty());
    CHECK(forge.self_login() == "sobo");
}
