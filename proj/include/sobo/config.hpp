#pragma once

#include "sobo/forge.hpp"
#include "sobo/util.hpp"

#include <filesystem>
#include <regex>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobo {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One deployment = one directory: settings.conf, repos.list, templates/,
// store/, state/. Paths in settings.conf resolve relative to the directory,
// so a whole deployment can be copied or checked in as a unit.
struct Settings {
    std::filesystem::path config_dir;
    double poll_interval_seconds = 5.0; // feedback cadence; 5 s unless overridden
    std::string forge_base_url;         // e.g. https://api.github.com; empty for fake-forge runs
    std::string bot_login = "sobo";
    std::string token_env = "SOBO_TOKEN"; // name of the env var, never the token itself
    std::string assignment_pattern = "(task-[0-9]+)$";
    bool store_while_muted = true;
    std::filesystem::path templates_dir;
    std::filesystem::path store_dir;
    std::filesystem::path state_dir;
    std::filesystem::path repos_file;
};

inline Settings load_settings(const std::filesystem::path& config_dir) {
    Settings s;
    s.config_dir = config_dir;
    s.templates_dir = config_dir / "templates";
    s.store_dir = config_dir / "store";
    s.state_dir = config_dir / "state";
    s.repos_file = config_dir / "repos.list";

    std::filesystem::path conf = config_dir / "settings.conf";
    auto content = read_file(conf);
    if (!content) throw ConfigError("cannot read " + conf.string());

    auto resolve = [&](const std::string& value) {
        std::filesystem::path p(value);
        return p.is_absolute() ? p : config_dir / p;
    };

    std::vector<std::string> lines = split_lines(*content);
    for (size_t i = 0; i < lines.size(); ++i) {
        std::string_view line = trim(lines[i]);
        if (line.empty() || line.front() == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(conf.string() + ":" + std::to_string(i + 1) +
                              ": expected key = value");
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));
        if (key == "poll_interval_seconds") {
            char* end = nullptr;
            double v = std::strtod(value.c_str(), &end);
            if (!end || *end != '\0' || v <= 0)
                throw ConfigError(conf.string() + ":" + std::to_string(i + 1) +
                                  ": poll_interval_seconds must be a positive number");
            s.poll_interval_seconds = v;
        } else if (key == "forge_base_url") {
            s.forge_base_url = value;
        } else if (key == "bot_login") {
            s.bot_login = value;
        } else if (key == "token_env") {
            s.token_env = value;
        } else if (key == "assignment_pattern") {
            s.assignment_pattern = value;
        } else if (key == "store_while_muted") {
            if (value != "true" && value != "false")
                throw ConfigError(conf.string() + ":" + std::to_string(i + 1) +
                                  ": store_while_muted must be true or false");
            s.store_while_muted = value == "true";
        } else if (key == "templates_dir") {
            s.templates_dir = resolve(value);
        } else if (key == "store_dir") {
            s.store_dir = resolve(value);
        } else if (key == "state_dir") {
            s.state_dir = resolve(value);
        } else if (key == "repos_file") {
            s.repos_file = resolve(value);
        } else {
            throw ConfigError(conf.string() + ":" + std::to_string(i + 1) + ": unknown key \"" +
                              key + "\"");
        }
    }

    try {
        std::regex probe(s.assignment_pattern);
    } catch (const std::regex_error& e) {
        throw ConfigError("assignment_pattern is not a valid regex: " + std::string(e.what()));
    }
    return s;
}

struct RepoListResult {
    std::vector<RepoRef> repos;
    std::vector<std::string> errors; // each cites path:line
};

// One repository per line: `host owner/name`. `#` starts a comment. The host
// column records which forge the repo lives on; the running process serves
// every listed repo through its single configured adapter.
inline RepoListResult parse_repo_list(const std::filesystem::path& path) {
    RepoListResult result;
    auto content = read_file(path);
    if (!content) {
        result.errors.push_back("cannot read " + path.string());
        return result;
    }
    std::vector<std::string> lines = split_lines(*content);
    for (size_t i = 0; i < lines.size(); ++i) {
        std::string cite = path.filename().string() + ":" + std::to_string(i + 1);
        std::string_view line = trim(lines[i]);
        size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = trim(line.substr(0, hash));
        if (line.empty()) continue;
        std::vector<std::string> cols;
        for (const std::string& c : split(line, ' '))
            if (!trim(c).empty()) cols.emplace_back(trim(c));
        if (cols.size() != 2) {
            result.errors.push_back(cite + ": expected `host owner/name`, got \"" +
                                    std::string(line) + "\"");
            continue;
        }
        std::vector<std::string> parts = split(cols[1], '/');
        if (parts.size() != 2 || parts[0].empty() || parts[1].empty()) {
            result.errors.push_back(cite + ": repository must be owner/name, got \"" + cols[1] +
                                    "\"");
            continue;
        }
        result.repos.push_back(RepoRef{cols[0], parts[0], parts[1]});
    }
    return result;
}

// Derives the assignment id from the repository name (capture group 1, or the
// whole match when the pattern has no groups). No match: the name itself.
inline std::string assignment_from_repo(const std::string& repo_name,
                                        const std::string& pattern) {
    std::regex re(pattern);
    std::smatch m;
    if (std::regex_search(repo_name, m, re)) {
        if (m.size() > 1 && m[1].matched) return m[1].str();
        return m[0].str();
    }
    return repo_name;
}

} // namespace sobo
