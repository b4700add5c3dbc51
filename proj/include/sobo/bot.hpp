#pragma once

#include "sobo/commands.hpp"
#include "sobo/config.hpp"
#include "sobo/datastore.hpp"
#include "sobo/forge.hpp"
#include "sobo/rules.hpp"
#include "sobo/templates.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sobo {

inline constexpr const char* kFeedbackIssueTitle = "SOBO - Commit Analyzer";
inline constexpr const char* kCommandsIssueTitle = "SOBO - Commands";

struct RepoState {
    RepoRef repo;
    std::string assignment;
    std::optional<std::string> last_analyzed;
    std::optional<IssueRef> feedback_issue;
    std::optional<IssueRef> command_issue;
    long long last_command_comment = 0; // the opening post (id 0) is the bot's own help text
    bool muted = false;
    bool baseline_computed = false;
    std::set<std::string> baseline; // (rule, file, line-text) triples
};

struct CommitAnalysis {
    RepoRef repo;
    std::string commit;
    std::string author;
    std::map<RuleId, std::vector<Violation>> by_rule;
    size_t total = 0;
};

struct BotOptions {
    int retry_attempts = 3;
    std::chrono::milliseconds retry_base_delay{250};
    bool store_while_muted = true;
    std::string assignment_pattern = "(task-[0-9]+)$";
};

// The per-repository workflow: enroll (greeting + command issues, template
// baseline), then on every tick analyze new commits, persist tuples, post at
// most one feedback comment, and answer commands. One Bot instance serves
// many repos; the caller must not run two ticks for the same repo
// concurrently (distinct repos are fine).
class Bot {
public:
    Bot(Forge& forge, Datastore& store, const TemplateSet& templates,
        std::filesystem::path state_dir, BotOptions options = {})
        : forge_(forge), store_(store), templates_(templates),
          state_dir_(std::move(state_dir)), opts_(std::move(options)) {
        std::filesystem::create_directories(state_dir_);
    }

    // ---- pure pieces (unit-testable in isolation) ----

    static std::string baseline_key(const Violation& v) {
        return rule_name(v.rule) + "|" + encode_field(v.file) + "|" + encode_field(v.line_text);
    }

    static std::vector<Violation> filter_baseline(std::vector<Violation> violations,
                                                  const std::set<std::string>& baseline) {
        std::vector<Violation> out;
        out.reserve(violations.size());
        for (Violation& v : violations)
            if (!baseline.count(baseline_key(v))) out.push_back(std::move(v));
        return out;
    }

    static std::optional<RuleId> select_prevalent(const CommitAnalysis& analysis) {
        std::optional<RuleId> best;
        size_t best_count = 0;
        for (RuleId r : all_rules()) {
            auto it = analysis.by_rule.find(r);
            size_t n = it == analysis.by_rule.end() ? 0 : it->second.size();
            if (n > best_count) { // strict: ties keep the smaller rule id
                best = r;
                best_count = n;
            }
        }
        return best;
    }

    static std::vector<Violation> analyze_tree(const std::map<std::string, std::string>& files) {
        std::vector<Violation> all;
        for (const auto& [path, content] : files) {
            SyntaxModel model = parse_source(path, content);
            std::vector<Violation> vs = check_all(model, all_rules_set());
            all.insert(all.end(), std::make_move_iterator(vs.begin()),
                       std::make_move_iterator(vs.end()));
        }
        std::sort(all.begin(), all.end(), [](const Violation& a, const Violation& b) {
            if (a.file != b.file) return a.file < b.file;
            if (a.line != b.line) return a.line < b.line;
            return a.rule < b.rule;
        });
        return all;
    }

    static CommitAnalysis build_analysis(const RepoRef& repo, const CommitInfo& commit,
                                         std::vector<Violation> violations) {
        CommitAnalysis a;
        a.repo = repo;
        a.commit = commit.hash;
        a.author = commit.author_login;
        for (Violation& v : violations) {
            a.by_rule[v.rule].push_back(std::move(v));
            ++a.total;
        }
        return a;
    }

    // ---- lifecycle ----

    RepoState* state_for(const RepoRef& repo) {
        std::lock_guard<std::mutex> lock(states_mu_);
        auto it = states_.find(repo.key());
        return it == states_.end() ? nullptr : &it->second;
    }

    bool is_enrolled(const RepoRef& repo) {
        std::lock_guard<std::mutex> lock(states_mu_);
        auto it = states_.find(repo.key());
        return it != states_.end() && it->second.feedback_issue && it->second.command_issue;
    }

    // Opens the two issues (idempotent), computes the template baseline from
    // the earliest commit if one exists, persists state. Safe to call again:
    // an enrolled repo is reloaded, a half-enrolled one is completed.
    RepoState& enroll(const RepoRef& repo) {
        RepoState& st = ensure_state(repo);
        if (!st.feedback_issue)
            st.feedback_issue = retry([&] {
                return forge_.open_issue(repo, kFeedbackIssueTitle, templates_.greeting());
            });
        if (!st.command_issue)
            st.command_issue = retry([&] {
                return forge_.open_issue(repo, kCommandsIssueTitle, templates_.help_text());
            });
        if (!st.baseline_computed) {
            std::vector<CommitInfo> history =
                retry([&] { return forge_.list_new_commits(repo, std::nullopt); });
            if (!history.empty()) compute_baseline(st, history.front());
        }
        persist_state(st);
        return st;
    }

    // One full cycle for one repo: analyze new commits, then answer commands.
    // Forge errors are logged and leave the state unchanged for the next tick.
    void tick(const RepoRef& repo) {
        RepoState* st = state_for(repo);
        if (!st || !st->feedback_issue || !st->command_issue) {
            try {
                st = &enroll(repo);
            } catch (const ForgeError& e) {
                log_warn("enroll " + repo.full_name() + " failed: " + e.what());
                return;
            }
        }
        try {
            analyze_phase(*st);
        } catch (const ForgeError& e) {
            log_warn("tick " + repo.full_name() + " analysis: " + e.what());
        } catch (const StoreError& e) {
            log_warn("tick " + repo.full_name() + " store: " + e.what());
        }
        try {
            command_phase(*st);
        } catch (const ForgeError& e) {
            log_warn("tick " + repo.full_name() + " commands: " + e.what());
        } catch (const StoreError& e) {
            log_warn("tick " + repo.full_name() + " store: " + e.what());
        }
    }

    // Loads previously persisted states from disk (daemon restart).
    void load_states() {
        std::lock_guard<std::mutex> lock(states_mu_);
        if (!std::filesystem::is_directory(state_dir_)) return;
        for (const auto& entry : std::filesystem::directory_iterator(state_dir_)) {
            if (entry.path().extension() != ".state") continue;
            if (auto st = read_state_file(entry.path())) states_[st->repo.key()] = std::move(*st);
        }
    }

private:
    Forge& forge_;
    Datastore& store_;
    const TemplateSet& templates_;
    std::filesystem::path state_dir_;
    BotOptions opts_;
    std::mutex states_mu_;
    std::map<std::string, RepoState> states_; // key: RepoRef::key()

    template <typename Fn> auto retry(Fn&& fn) -> decltype(fn()) {
        return with_retry(std::forward<Fn>(fn), opts_.retry_attempts, opts_.retry_base_delay);
    }

    RepoState& ensure_state(const RepoRef& repo) {
        std::lock_guard<std::mutex> lock(states_mu_);
        auto it = states_.find(repo.key());
        if (it != states_.end()) return it->second;
        if (auto loaded = read_state_file(state_file(repo)))
            return states_.emplace(repo.key(), std::move(*loaded)).first->second;
        RepoState st;
        st.repo = repo;
        st.assignment = assignment_from_repo(repo.name, opts_.assignment_pattern);
        return states_.emplace(repo.key(), std::move(st)).first->second;
    }

    void compute_baseline(RepoState& st, const CommitInfo& first_commit) {
        auto tree = retry([&] { return forge_.read_tree(st.repo, first_commit.hash); });
        for (const Violation& v : analyze_tree(tree)) st.baseline.insert(baseline_key(v));
        st.baseline_computed = true;
        // the template commit is consumed by the baseline: no tuples, no feedback
        st.last_analyzed = first_commit.hash;
    }

    void analyze_phase(RepoState& st) {
        std::vector<CommitInfo> commits;
        try {
            commits = retry([&] { return forge_.list_new_commits(st.repo, st.last_analyzed); });
        } catch (const ForgeError& e) {
            if (e.kind() != ForgeError::Kind::UnknownSince) throw;
            // history rewrite: relist everything; the store's key dedup makes
            // re-analysis harmless
            log_warn("history rewritten in " + st.repo.full_name() + ", relisting");
            commits = retry([&] { return forge_.list_new_commits(st.repo, std::nullopt); });
        }
        if (commits.empty()) return;

        size_t start = 0;
        if (!st.baseline_computed) {
            compute_baseline(st, commits.front());
            start = 1;
        }

        std::optional<CommitAnalysis> head_analysis;
        for (size_t i = start; i < commits.size(); ++i) {
            const CommitInfo& c = commits[i];
            if (c.author_login == forge_.self_login()) continue; // never analyze the bot itself
            std::map<std::string, std::string> tree;
            try {
                tree = retry([&] { return forge_.read_tree(st.repo, c.hash); });
            } catch (const ForgeError& e) {
                if (e.kind() == ForgeError::Kind::UnknownCommit) {
                    log_warn("commit " + c.hash + " vanished from " + st.repo.full_name());
                    continue;
                }
                throw; // cursor not advanced; the whole batch is retried next tick
            }
            std::vector<Violation> violations =
                filter_baseline(analyze_tree(tree), st.baseline);
            CommitAnalysis analysis = build_analysis(st.repo, c, std::move(violations));
            if (opts_.store_while_muted || !st.muted) {
                std::vector<ViolationRecord> records;
                for (const auto& [rule, vs] : analysis.by_rule)
                    for (const Violation& v : vs)
                        records.push_back(ViolationRecord{c.author_login, st.assignment, rule,
                                                          v.file, v.line, c.hash, c.timestamp});
                store_.append_violations(records);
                store_.append_analyzed(
                    AnalyzedMarker{c.author_login, st.assignment, c.hash, c.timestamp});
            }
            head_analysis = std::move(analysis);
        }

        // Persist the cursor before posting: a crash between the two re-posts
        // nothing (tuples are idempotent; a missing comment costs less than a
        // duplicate one).
        st.last_analyzed = commits.back().hash;
        persist_state(st);

        if (!st.muted && head_analysis) {
            std::string body;
            if (auto rule = select_prevalent(*head_analysis))
                body = templates_.render_feedback(*rule, head_analysis->by_rule[*rule]).rendered;
            else
                body = templates_.render_clean();
            retry([&] { return forge_.post_comment(*st.feedback_issue, body); });
        }
    }

    void command_phase(RepoState& st) {
        std::vector<CommentInfo> comments = retry(
            [&] { return forge_.list_comments(*st.command_issue, st.last_command_comment); });
        bool cursor_moved = false;
        for (const CommentInfo& c : comments) {
            if (c.author_login == forge_.self_login()) {
                st.last_command_comment = c.id;
                cursor_moved = true;
                continue;
            }
            Command cmd = parse_command(c.body);
            if (cmd.kind == CommandKind::NotACommand) {
                st.last_command_comment = c.id;
                cursor_moved = true;
                continue;
            }
            if (store_.has_command_comment(st.repo.full_name(), c.id)) {
                // crash-replay: executed and logged before, cursor was lost
                st.last_command_comment = c.id;
                cursor_moved = true;
                continue;
            }
            // reply, then log, then advance the cursor: at-most-once execution
            std::string reply = execute_command(cmd, c, st);
            retry([&] { return forge_.post_comment(*st.command_issue, reply); });
            CommandRecord record;
            record.user = c.author_login;
            record.timestamp = c.timestamp;
            record.task = st.assignment;
            record.kind = command_kind_name(cmd.kind);
            record.arg = cmd.arg;
            record.repo = st.repo.full_name();
            record.comment_id = c.id;
            store_.append_command(record);
            st.last_command_comment = c.id;
            persist_state(st);
            cursor_moved = false;
        }
        if (cursor_moved) persist_state(st);
    }

    std::string execute_command(const Command& cmd, const CommentInfo& comment, RepoState& st) {
        switch (cmd.kind) {
        case CommandKind::Help:
            return templates_.help_text();
        case CommandKind::Stop:
            st.muted = true;
            return "Automatic feedback is now **paused** for this repository. "
                   "Write `<go>` here whenever you want it back.";
        case CommandKind::Go:
            st.muted = false;
            return "Automatic feedback is **active** again for this repository. "
                   "Happy coding!";
        case CommandKind::More:
            return reply_more(cmd.arg, st);
        case CommandKind::Rule:
            return reply_rule(cmd.arg, st);
        case CommandKind::Select:
            return reply_select(cmd.arg, comment, st);
        case CommandKind::NotACommand:
            break;
        }
        return "";
    }

    std::string reply_more(const std::string& ref, const RepoState& st) {
        auto commit = store_.resolve_commit(st.assignment, ref);
        if (!commit)
            return "I have no analyzed commit matching `" + ref +
                   "` on this assignment. Use the full commit hash or a unique prefix of at "
                   "least 4 characters.";
        std::vector<ViolationRecord> rows = store_.query_by_commit(st.assignment, *commit);
        if (rows.empty())
            return "Commit `" + *commit + "` was analyzed and has **no recorded violations**.";
        std::string body =
            "All recorded violations for commit `" + *commit + "`:\n\n| Rule | File | Line |\n"
            "| --- | --- | --- |\n";
        for (const ViolationRecord& r : rows)
            body += "| " + rule_name(r.rule) + " | " + r.file + " | " + std::to_string(r.line) +
                    " |\n";
        return body;
    }

    std::string reply_rule(const std::string& arg, RepoState& st) {
        auto rule = parse_rule_arg(arg);
        if (!rule) return unknown_rule_reply(arg);
        if (!st.last_analyzed)
            return "No commits have been analyzed on this repository yet, so there is nothing "
                   "to report for " +
                   rule_name(*rule) + ".";
        auto tree = retry([&] { return forge_.read_tree(st.repo, *st.last_analyzed); });
        std::vector<Violation> all = filter_baseline(analyze_tree(tree), st.baseline);
        std::vector<Violation> matching;
        for (Violation& v : all)
            if (v.rule == *rule) matching.push_back(std::move(v));
        if (matching.empty())
            return "The latest analyzed commit `" + *st.last_analyzed + "` has no " +
                   rule_name(*rule) + " violations. " + rule_title(*rule) + ".";
        std::string body = "**" + rule_name(*rule) + ": " + rule_title(*rule) +
                           "** on the latest analyzed commit `" + *st.last_analyzed + "`:\n\n" +
                           TemplateSet::violation_table(matching);
        return body;
    }

    std::string reply_select(const std::string& arg, const CommentInfo& comment,
                             const RepoState& st) {
        auto rule = parse_rule_arg(arg);
        if (!rule) return unknown_rule_reply(arg);
        // Synthetic rows shaped like datastore records; clearly labeled so
        // nobody mistakes them for measurements.
        std::string body = "**Synthetic sample data** for rule " + rule_name(*rule) +
                           " (generated on request, not real measurements):\n\n"
                           "| User | Assignment | Rule | File | Line | Commit |\n"
                           "| --- | --- | --- | --- | --- | --- |\n";
        for (int line : {10, 20, 30})
            body += "| " + comment.author_login + " | " + st.assignment + " | " +
                    rule_name(*rule) + " | Example.java | " + std::to_string(line) +
                    " | 0000000000000000 |\n";
        return body;
    }

    static std::optional<RuleId> parse_rule_arg(const std::string& arg) {
        std::string up;
        for (char c : arg) up += (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
        return rule_from_string(up);
    }

    static std::string unknown_rule_reply(const std::string& arg) {
        std::string body = "`" + arg + "` is not a rule I know. Valid rule ids:";
        for (RuleId r : all_rules()) body += " `" + rule_name(r) + "`";
        return body + ".";
    }

    // ---- state persistence ----

    std::filesystem::path state_file(const RepoRef& repo) const {
        return state_dir_ / (repo.key() + ".state");
    }

    void persist_state(const RepoState& st) {
        std::string out;
        out += "host=" + encode_field(st.repo.host) + "\n";
        out += "owner=" + encode_field(st.repo.owner) + "\n";
        out += "name=" + encode_field(st.repo.name) + "\n";
        out += "assignment=" + encode_field(st.assignment) + "\n";
        out += "last_analyzed=" + (st.last_analyzed ? *st.last_analyzed : "") + "\n";
        out += "feedback_issue=" +
               (st.feedback_issue ? std::to_string(st.feedback_issue->number) : "") + "\n";
        out += "command_issue=" +
               (st.command_issue ? std::to_string(st.command_issue->number) : "") + "\n";
        out += "last_command_comment=" + std::to_string(st.last_command_comment) + "\n";
        out += std::string("muted=") + (st.muted ? "1" : "0") + "\n";
        out += std::string("baseline_computed=") + (st.baseline_computed ? "1" : "0") + "\n";
        for (const std::string& b : st.baseline) out += "baseline=" + encode_field(b) + "\n";
        if (!atomic_write_file(state_file(st.repo), out))
            log_warn("cannot persist state for " + st.repo.full_name());
    }

    std::optional<RepoState> read_state_file(const std::filesystem::path& path) const {
        auto content = read_file(path);
        if (!content) return std::nullopt;
        RepoState st;
        for (const std::string& line : split_lines(*content)) {
            size_t eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(0, eq);
            std::string value = line.substr(eq + 1);
            if (key == "host") st.repo.host = decode_field(value);
            else if (key == "owner") st.repo.owner = decode_field(value);
            else if (key == "name") st.repo.name = decode_field(value);
            else if (key == "assignment") st.assignment = decode_field(value);
            else if (key == "last_analyzed" && !value.empty()) st.last_analyzed = value;
            else if (key == "feedback_issue" && !value.empty())
                st.feedback_issue = IssueRef{st.repo, std::atoi(value.c_str()),
                                             kFeedbackIssueTitle};
            else if (key == "command_issue" && !value.empty())
                st.command_issue = IssueRef{st.repo, std::atoi(value.c_str()),
                                            kCommandsIssueTitle};
            else if (key == "last_command_comment") st.last_command_comment = std::atoll(value.c_str());
            else if (key == "muted") st.muted = value == "1";
            else if (key == "baseline_computed") st.baseline_computed = value == "1";
            else if (key == "baseline") st.baseline.insert(decode_field(value));
        }
        if (st.repo.owner.empty() || st.repo.name.empty()) return std::nullopt;
        // repo fields load after the issue lines; fix the refs up
        if (st.feedback_issue) st.feedback_issue->repo = st.repo;
        if (st.command_issue) st.command_issue->repo = st.repo;
        return st;
    }
};

} // namespace sobo
