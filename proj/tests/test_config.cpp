// Configuration loading: defaults, overrides, precise error lines, repo list
// parsing, assignment derivation, and the shipped deployment directory.

#include <catch2/catch_amalgamated.hpp>

#include <sobo/config.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

using namespace sobo;
namespace fs = std::filesystem;

namespace {

struct ConfigDir {
    fs::path path;
    ConfigDir() {
        path = fs::temp_directory_path() /
               ("sobo-cfg-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~ConfigDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int n = 0;
        return n;
    }

    void settings(const std::string& text) const { write("settings.conf", text); }
    void write(const std::string& name, const std::string& text) const {
        std::ofstream out(path / name, std::ios::binary);
        out << text;
    }
};

std::string error_of(const fs::path& dir) {
    try {
        load_settings(dir);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("an empty settings file yields the documented defaults") {
    ConfigDir dir;
    dir.settings("");
    Settings s = load_settings(dir.path);
    CHECK(s.poll_interval_seconds == 5.0);
    CHECK(s.forge_base_url.empty());
    CHECK(s.bot_login == "sobo");
    CHECK(s.token_env == "SOBO_TOKEN");
    CHECK(s.assignment_pattern == "(task-[0-9]+)$");
    CHECK(s.store_while_muted == true);
    CHECK(s.templates_dir == dir.path / "templates");
    CHECK(s.store_dir == dir.path / "store");
    CHECK(s.state_dir == dir.path / "state");
    CHECK(s.repos_file == dir.path / "repos.list");
}

TEST_CASE("every key can be overridden; comments and blanks are ignored") {
    ConfigDir dir;
    dir.settings(R"(# deployment tuning
poll_interval_seconds = 0.5

forge_base_url = https://git.example.edu/api/v3
bot_login = feedbackbot
token_env = COURSE_TOKEN
assignment_pattern = ([a-z]+-lab-[0-9]+)
store_while_muted = false
templates_dir = tpl
store_dir = /var/lib/sobo/store
state_dir = st
repos_file = course.list
)");
    Settings s = load_settings(dir.path);
    CHECK(s.poll_interval_seconds == 0.5);
    CHECK(s.forge_base_url == "https://git.example.edu/api/v3");
    CHECK(s.bot_login == "feedbackbot");
    CHECK(s.token_env == "COURSE_TOKEN");
    CHECK(s.assignment_pattern == "([a-z]+-lab-[0-9]+)");
    CHECK(s.store_while_muted == false);
    // relative paths resolve against the config dir, absolute ones stand
    CHECK(s.templates_dir == dir.path / "tpl");
    CHECK(s.store_dir == fs::path("/var/lib/sobo/store"));
    CHECK(s.state_dir == dir.path / "st");
    CHECK(s.repos_file == dir.path / "course.list");
}

TEST_CASE("config errors cite file and line") {
    ConfigDir dir;

    dir.settings("bot_login = sobo\nnot a key value line\n");
    std::string e1 = error_of(dir.path);
    CHECK(e1.find("settings.conf:2: expected key = value") != std::string::npos);

    dir.settings("\n\nmystery_knob = 7\n");
    std::string e2 = error_of(dir.path);
    CHECK(e2.find("settings.conf:3: unknown key \"mystery_knob\"") != std::string::npos);

    dir.settings("poll_interval_seconds = never\n");
    std::string e3 = error_of(dir.path);
    CHECK(e3.find("settings.conf:1: poll_interval_seconds must be a positive number") !=
          std::string::npos);

    dir.settings("poll_interval_seconds = -2\n");
    CHECK(error_of(dir.path).find("must be a positive number") != std::string::npos);

    dir.settings("poll_interval_seconds = 0\n");
    CHECK(error_of(dir.path).find("must be a positive number") != std::string::npos);

    dir.settings("store_while_muted = yes\n");
    CHECK(error_of(dir.path).find("settings.conf:1: store_while_muted must be true or false") !=
          std::string::npos);

    dir.settings("assignment_pattern = (unclosed\n");
    CHECK(error_of(dir.path).find("assignment_pattern is not a valid regex") !=
          std::string::npos);
}

TEST_CASE("a missing settings file is a config error") {
    ConfigDir dir;
    std::string e = error_of(dir.path);
    CHECK(e.find("cannot read") != std::string::npos);
    CHECK(e.find("settings.conf") != std::string::npos);
}

TEST_CASE("repo lists parse hosts, comments and report bad lines precisely") {
    ConfigDir dir;
    dir.write("repos.list", R"(# course roster
github.com inda-24/alice-task-3
gits-15.sys.kth.se inda-24/bob-task-3   # enterprise host

this-line-is-junk
github.com not-a-repo-path
github.com owner/
github.com /name
)");
    RepoListResult r = parse_repo_list(dir.path / "repos.list");
    REQUIRE(r.repos.size() == 2);
    CHECK(r.repos[0].host == "github.com");
    CHECK(r.repos[0].owner == "inda-24");
    CHECK(r.repos[0].name == "alice-task-3");
    CHECK(r.repos[1].host == "gits-15.sys.kth.se");
    CHECK(r.repos[1].name == "bob-task-3");

    REQUIRE(r.errors.size() == 4);
    CHECK(r.errors[0].find("repos.list:5: expected `host owner/name`") != std::string::npos);
    CHECK(r.errors[1].find("repos.list:6: repository must be owner/name") != std::string::npos);
    CHECK(r.errors[2].find("repos.list:7") != std::string::npos);
    CHECK(r.errors[3].find("repos.list:8") != std::string::npos);
}

TEST_CASE("a missing repo list reports one error and no repos") {
    RepoListResult r = parse_repo_list("/nonexistent/nowhere.list");
    CHECK(r.repos.empty());
    REQUIRE(r.errors.size() == 1);
    CHECK(r.errors[0].find("cannot read") != std::string::npos);
}

TEST_CASE("assignment ids come from the pattern's first capture group") {
    const std::string pat = "(task-[0-9]+)$";
    CHECK(assignment_from_repo("alice-task-3", pat) == "task-3");
    CHECK(assignment_from_repo("bob-task-12", pat) == "task-12");
    // no match: the repo name itself is the assignment id
    CHECK(assignment_from_repo("playground", pat) == "playground");
    // a group-less pattern uses the whole match
    CHECK(assignment_from_repo("alice-task-3", "task-[0-9]+$") == "task-3");
    // and the anchor matters: name must end with the task id
    CHECK(assignment_from_repo("task-3-scratch", pat) == "task-3-scratch");
}

TEST_CASE("the shipped deployment directory loads") {
    fs::path shipped{SOBO_CONFIG_DIR};

    Settings s = load_settings(shipped);
    CHECK(s.poll_interval_seconds > 0);
    CHECK_FALSE(s.bot_login.empty());
    CHECK_FALSE(s.token_env.empty());
    CHECK(s.templates_dir == shipped / "templates");

    RepoListResult r = parse_repo_list(s.repos_file);
    CHECK(r.errors.empty()); // all-comments roster parses clean
}
