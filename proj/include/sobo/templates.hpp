#pragma once

#include "sobo/rules.hpp"
#include "sobo/util.hpp"

#include <algorithm>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobo {

struct FeedbackMessage {
    RuleId rule = RuleId::S109;
    std::vector<Violation> rows; // table rows, sorted by (file, line)
    std::string rendered;
};

class TemplateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// The message templates of one deployment: one file per rule plus greeting,
// clean and help. Validated fully at load so a typo fails at startup, not in
// front of a student.
class TemplateSet {
public:
    // Every problem as one human-readable line; empty means loadable.
    static std::vector<std::string> collect_problems(const std::filesystem::path& dir) {
        std::vector<std::string> problems;
        for (RuleId r : all_rules()) {
            auto text = read_file(dir / (rule_name(r) + ".md"));
            if (!text) {
                problems.push_back("missing template for rule " + rule_name(r) + ": " +
                                   (dir / (rule_name(r) + ".md")).string());
                continue;
            }
            check_placeholders(*text, rule_name(r) + ".md", true, problems);
            if (text->find("{{VIOLATION_TABLE}}") == std::string::npos)
                problems.push_back(rule_name(r) + ".md: missing required {{VIOLATION_TABLE}}");
        }
        for (const char* name : {"greeting", "clean", "help"}) {
            auto text = read_file(dir / (std::string(name) + ".md"));
            if (!text) {
                problems.push_back("missing template: " +
                                   (dir / (std::string(name) + ".md")).string());
                continue;
            }
            check_placeholders(*text, std::string(name) + ".md", false, problems);
            if (trim(*text).empty())
                problems.push_back(std::string(name) + ".md: template is empty");
        }
        if (auto clean = read_file(dir / "clean.md")) {
            for (RuleId r : all_rules())
                if (clean->find(rule_name(r)) != std::string::npos)
                    problems.push_back("clean.md: must not mention rule id " + rule_name(r));
        }
        return problems;
    }

    static TemplateSet load(const std::filesystem::path& dir) {
        std::vector<std::string> problems = collect_problems(dir);
        if (!problems.empty()) {
            std::string what = "template validation failed:";
            for (const std::string& p : problems) what += "\n  " + p;
            throw TemplateError(what);
        }
        TemplateSet set;
        for (RuleId r : all_rules())
            set.rule_templates_[r] = *read_file(dir / (rule_name(r) + ".md"));
        set.greeting_ = *read_file(dir / "greeting.md");
        set.clean_ = *read_file(dir / "clean.md");
        set.help_ = *read_file(dir / "help.md");
        return set;
    }

    FeedbackMessage render_feedback(RuleId rule, std::vector<Violation> violations) const {
        FeedbackMessage msg;
        msg.rule = rule;
        std::sort(violations.begin(), violations.end(),
                  [](const Violation& a, const Violation& b) {
                      if (a.file != b.file) return a.file < b.file;
                      return a.line < b.line;
                  });
        msg.rows = std::move(violations);

        std::string body = rule_templates_.at(rule);
        body = replace_all(std::move(body), "{{RULE_ID}}", rule_name(rule));
        body = replace_all(std::move(body), "{{RULE_TITLE}}", rule_title(rule));
        body = replace_all(std::move(body), "{{VIOLATION_TABLE}}", violation_table(msg.rows));
        body = replace_all(std::move(body), "{{EXAMPLE}}", rule_example(rule));
        msg.rendered = std::move(body);
        return msg;
    }

    std::string render_clean() const { return clean_; }
    std::string greeting() const { return greeting_; }
    std::string help_text() const { return help_; }

    static std::string violation_table(const std::vector<Violation>& rows) {
        std::string table = "| File | Line | Code |\n| --- | --- | --- |\n";
        for (const Violation& v : rows) {
            std::string code = replace_all(v.line_text, "|", "\\|");
            code = replace_all(std::move(code), "`", "'");
            table += "| " + v.file + " | " + std::to_string(v.line) + " | `" + code + "` |\n";
        }
        return table;
    }

private:
    std::map<RuleId, std::string> rule_templates_;
    std::string greeting_;
    std::string clean_;
    std::string help_;

    static void check_placeholders(const std::string& text, const std::string& file,
                                   bool rule_template, std::vector<std::string>& problems) {
        size_t pos = 0;
        while ((pos = text.find("{{", pos)) != std::string::npos) {
            size_t end = text.find("}}", pos);
            if (end == std::string::npos) {
                problems.push_back(file + ": unterminated placeholder");
                return;
            }
            std::string name = text.substr(pos + 2, end - pos - 2);
            bool known = name == "RULE_ID" || name == "RULE_TITLE" ||
                         name == "VIOLATION_TABLE" || name == "EXAMPLE";
            if (!rule_template)
                problems.push_back(file + ": placeholders not allowed here, found {{" + name +
                                   "}}");
            else if (!known)
                problems.push_back(file + ": unknown placeholder {{" + name + "}}");
            pos = end + 2;
        }
    }
};

} // namespace sobo
