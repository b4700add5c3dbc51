#pragma once

#include "sobo/util.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sobo {

enum class CommandKind { Help, Stop, Go, More, Rule, Select, NotACommand };

struct Command {
    CommandKind kind = CommandKind::NotACommand;
    std::string arg; // commit id or rule id; empty for help/stop/go
};

inline const char* command_kind_name(CommandKind k) {
    switch (k) {
    case CommandKind::Help: return "help";
    case CommandKind::Stop: return "stop";
    case CommandKind::Go: return "go";
    case CommandKind::More: return "more";
    case CommandKind::Rule: return "rule";
    case CommandKind::Select: return "select";
    case CommandKind::NotACommand: return "not-a-command";
    }
    return "?";
}

// Recognizes exactly `<help>`, `<stop>`, `<go>`, `<more X>`, `<rule X>`,
// `<select X>` after trimming the comment; keyword matching is
// case-insensitive and the argument is a single token. Everything else is
// not-a-command and stays silently ignored, because students also chat on
// the issue.
inline Command parse_command(std::string_view body) {
    std::string_view text = trim(body);
    if (text.size() < 2 || text.front() != '<' || text.back() != '>') return {};
    std::string_view inner = text.substr(1, text.size() - 2);
    if (inner.find('<') != std::string_view::npos || inner.find('>') != std::string_view::npos)
        return {};

    std::vector<std::string> tokens;
    size_t i = 0;
    while (i < inner.size()) {
        while (i < inner.size() && (inner[i] == ' ' || inner[i] == '\t')) ++i;
        size_t start = i;
        while (i < inner.size() && inner[i] != ' ' && inner[i] != '\t') ++i;
        if (i > start) tokens.emplace_back(inner.substr(start, i - start));
    }
    if (tokens.empty() || tokens.size() > 2) return {};

    std::string keyword = to_lower(tokens[0]);
    bool has_arg = tokens.size() == 2;
    if (keyword == "help" && !has_arg) return {CommandKind::Help, ""};
    if (keyword == "stop" && !has_arg) return {CommandKind::Stop, ""};
    if (keyword == "go" && !has_arg) return {CommandKind::Go, ""};
    if (keyword == "more" && has_arg) return {CommandKind::More, tokens[1]};
    if (keyword == "rule" && has_arg) return {CommandKind::Rule, tokens[1]};
    if (keyword == "select" && has_arg) return {CommandKind::Select, tokens[1]};
    return {};
}

} // namespace sobo
