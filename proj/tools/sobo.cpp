// sobo: feedback bot for student Java repositories.
//
//   sobo run --config DIR [--interval SECONDS] [--test-forge DIR]
//   sobo analyze TARGET [--commit HASH] [--test-forge DIR]
//   sobo report --config DIR [--assignment ID] [--out DIR]
//   sobo check-config --config DIR [--test-forge DIR]

#include <CLI11.hpp>

#include "sobo/bot.hpp"
#include "sobo/config.hpp"
#include "sobo/datastore.hpp"
#include "sobo/effectiveness.hpp"
#include "sobo/fake_forge.hpp"
#include "sobo/github_forge.hpp"
#include "sobo/runner.hpp"
#include "sobo/rules.hpp"
#include "sobo/templates.hpp"

#include <atomic>
#include <csignal>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

std::unique_ptr<sobo::Forge> make_forge(const sobo::Settings& settings,
                                        const std::string& test_forge_dir) {
    if (!test_forge_dir.empty())
        return std::make_unique<sobo::FakeForge>(test_forge_dir, settings.bot_login);
    sobo::GithubForge::Options opts;
    if (!settings.forge_base_url.empty()) opts.base_url = settings.forge_base_url;
    opts.token_env = settings.token_env;
    opts.login = settings.bot_login;
    return std::make_unique<sobo::GithubForge>(opts);
}

void print_table(const std::vector<sobo::Violation>& violations) {
    std::printf("%-6s  %-40s  %5s  %s\n", "RULE", "FILE", "LINE", "CODE");
    for (const sobo::Violation& v : violations) {
        std::string code(sobo::trim(v.line_text));
        std::printf("%-6s  %-40s  %5d  %s\n", sobo::rule_name(v.rule).c_str(), v.file.c_str(),
                    v.line, code.c_str());
    }
}

int cmd_run(const std::string& config_dir, std::optional<double> interval,
            const std::string& test_forge_dir) {
    sobo::Settings settings = sobo::load_settings(config_dir);
    // templates are validated up front so a broken deployment fails loudly
    sobo::TemplateSet templates = sobo::TemplateSet::load(settings.templates_dir);
    auto forge = make_forge(settings, test_forge_dir);
    sobo::Datastore store(settings.store_dir);

    sobo::BotOptions bot_opts;
    bot_opts.store_while_muted = settings.store_while_muted;
    bot_opts.assignment_pattern = settings.assignment_pattern;
    sobo::Bot bot(*forge, store, templates, settings.state_dir, bot_opts);
    bot.load_states();

    double seconds = interval ? *interval
                     : !test_forge_dir.empty() ? 0.1 // simulations poll fast
                                               : settings.poll_interval_seconds;
    sobo::Runner runner(bot, settings.repos_file, std::chrono::duration<double>(seconds));

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    sobo::log_info("sobo daemon starting, polling every " + std::to_string(seconds) + "s");
    runner.run([] { return g_stop.load(); });
    sobo::log_info("sobo daemon stopped");
    return 0;
}

int cmd_analyze(const std::string& target, const std::string& commit,
                const std::string& test_forge_dir) {
    namespace fs = std::filesystem;
    std::vector<sobo::Violation> violations;

    if (!test_forge_dir.empty()) {
        // owner/name inside a fake forge directory; --commit defaults to head
        size_t slash = target.find('/');
        if (slash == std::string::npos) {
            std::fprintf(stderr, "error: expected owner/name with --test-forge\n");
            return 2;
        }
        sobo::RepoRef repo{"fake", target.substr(0, slash), target.substr(slash + 1)};
        sobo::FakeForge forge(test_forge_dir);
        try {
            std::string hash = commit;
            if (hash.empty()) {
                auto commits = forge.list_new_commits(repo, std::nullopt);
                if (commits.empty()) {
                    print_table({});
                    return 0;
                }
                hash = commits.back().hash;
            }
            violations = sobo::Bot::analyze_tree(forge.read_tree(repo, hash));
        } catch (const sobo::ForgeError& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 2;
        }
    } else {
        fs::path path(target);
        std::vector<fs::path> files;
        if (fs::is_regular_file(path)) {
            files.push_back(path);
        } else if (fs::is_directory(path)) {
            for (const auto& entry : fs::recursive_directory_iterator(path))
                if (entry.is_regular_file() && entry.path().extension() == ".java")
                    files.push_back(entry.path());
            std::sort(files.begin(), files.end());
        } else {
            std::fprintf(stderr, "error: cannot read %s\n", target.c_str());
            return 2;
        }
        for (const fs::path& f : files) {
            auto content = sobo::read_file(f);
            if (!content) {
                std::fprintf(stderr, "error: cannot read %s\n", f.string().c_str());
                return 2;
            }
            sobo::SyntaxModel model = sobo::parse_source(f.string(), *content);
            for (sobo::Violation& v : sobo::check_all(model, sobo::all_rules_set()))
                violations.push_back(std::move(v));
        }
    }

    print_table(violations);
    return violations.empty() ? 0 : 1;
}

int cmd_report(const std::string& config_dir, const std::string& assignment,
               const std::string& out_dir) {
    sobo::Settings settings = sobo::load_settings(config_dir);
    sobo::Datastore store(settings.store_dir);
    std::optional<std::string> filter;
    if (!assignment.empty()) filter = assignment;
    std::vector<sobo::DeltaRow> rows = sobo::compute_deltas(store, filter);
    auto totals = sobo::summarize(rows);
    std::filesystem::path out =
        out_dir.empty() ? settings.store_dir / "report" : std::filesystem::path(out_dir);
    for (const auto& p : sobo::emit_report(totals, rows, out))
        std::printf("wrote %s\n", p.string().c_str());
    return 0;
}

int cmd_check_config(const std::string& config_dir, const std::string& test_forge_dir) {
    std::vector<std::string> problems;
    std::optional<sobo::Settings> settings;
    try {
        settings = sobo::load_settings(config_dir);
    } catch (const sobo::ConfigError& e) {
        problems.push_back(e.what());
    }
    if (settings) {
        sobo::RepoListResult repos = sobo::parse_repo_list(settings->repos_file);
        for (const std::string& err : repos.errors) problems.push_back(err);
        if (!std::filesystem::exists(settings->repos_file))
            problems.push_back("repository list missing: " + settings->repos_file.string());
        for (const std::string& p : sobo::TemplateSet::collect_problems(settings->templates_dir))
            problems.push_back(p);
        if (test_forge_dir.empty() && !std::getenv(settings->token_env.c_str()))
            problems.push_back("token environment variable " + settings->token_env +
                               " is not set");
        std::error_code ec;
        std::filesystem::create_directories(settings->store_dir, ec);
        auto probe = settings->store_dir / ".write-probe";
        if (ec || !sobo::atomic_write_file(probe, "ok\n"))
            problems.push_back("store directory not writable: " + settings->store_dir.string());
        else
            std::filesystem::remove(probe, ec);
    }
    for (const std::string& p : problems) std::printf("problem: %s\n", p.c_str());
    if (problems.empty()) {
        std::printf("configuration OK\n");
        return 0;
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"sobo: code quality feedback bot for student Java repositories"};
    app.require_subcommand(1);

    std::string config_dir, test_forge_dir, target, commit, assignment, out_dir;
    double interval = -1;

    CLI::App* run = app.add_subcommand("run", "monitor repositories and post feedback");
    run->add_option("--config", config_dir, "configuration directory")->required();
    run->add_option("--interval", interval, "poll interval in seconds");
    run->add_option("--test-forge", test_forge_dir, "use a directory-backed fake forge");

    CLI::App* analyze = app.add_subcommand("analyze", "one-shot analysis of a path or repo");
    analyze->add_option("target", target, "Java file, directory, or owner/name")->required();
    analyze->add_option("--commit", commit, "commit hash (repo targets only)");
    analyze->add_option("--test-forge", test_forge_dir, "fake forge directory for repo targets");

    CLI::App* report = app.add_subcommand("report", "emit the added/fixed effectiveness report");
    report->add_option("--config", config_dir, "configuration directory")->required();
    report->add_option("--assignment", assignment, "restrict to one assignment");
    report->add_option("--out", out_dir, "output directory (default: <store>/report)");

    CLI::App* check = app.add_subcommand("check-config", "validate a configuration directory");
    check->add_option("--config", config_dir, "configuration directory")->required();
    check->add_option("--test-forge", test_forge_dir, "skip the token check for fake runs");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run)
            return cmd_run(config_dir, interval < 0 ? std::nullopt : std::optional(interval),
                           test_forge_dir);
        if (*analyze) return cmd_analyze(target, commit, test_forge_dir);
        if (*report) return cmd_report(config_dir, assignment, out_dir);
        if (*check) return cmd_check_config(config_dir, test_forge_dir);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return *analyze ? 2 : 1;
    }
    return 0;
}
