#pragma once

#include "sobo/datastore.hpp"
#include "sobo/rules.hpp"
#include "sobo/util.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

namespace sobo {

// One adjacent-commit comparison for one (user, assignment, rule). Emitted
// for every rule on every pair, including 0 -> 0, so downstream consumers see
// the full grid. Counts compare, identities do not: fixing one magic number
// while adding another nets to zero.
struct DeltaRow {
    std::string user;
    std::string assignment;
    RuleId rule = RuleId::S109;
    std::string from_commit;
    std::string to_commit;
    int prev_count = 0;
    int curr_count = 0;
    int added = 0; // max(0, curr - prev)
    int fixed = 0; // max(0, prev - curr)
    long long to_timestamp = 0; // plumbing for the date-bucketed series

    friend bool operator==(const DeltaRow& a, const DeltaRow& b) {
        return a.user == b.user && a.assignment == b.assignment && a.rule == b.rule &&
               a.from_commit == b.from_commit && a.to_commit == b.to_commit &&
               a.prev_count == b.prev_count && a.curr_count == b.curr_count &&
               a.added == b.added && a.fixed == b.fixed;
    }
};

struct RuleTotals {
    long long added = 0;
    long long fixed = 0;
};

// Per (user, assignment): commits ordered by (timestamp, hash); per rule one
// DeltaRow per adjacent pair. The commit sequence comes from the analyzed
// markers, so zero-violation commits participate; counts come from the stored
// violation records.
inline std::vector<DeltaRow> compute_deltas(const Datastore& store,
                                            const std::optional<std::string>& assignment = {}) {
    struct CommitPoint {
        long long timestamp;
        std::string hash;
        bool operator<(const CommitPoint& o) const {
            return std::tie(timestamp, hash) < std::tie(o.timestamp, o.hash);
        }
    };
    std::map<std::pair<std::string, std::string>, std::vector<CommitPoint>> sequences;
    for (const AnalyzedMarker& m : store.analyzed()) {
        if (assignment && m.assignment != *assignment) continue;
        sequences[{m.user, m.assignment}].push_back(CommitPoint{m.timestamp, m.commit});
    }
    std::map<std::tuple<std::string, std::string, std::string, RuleId>, int> counts;
    for (const ViolationRecord& v : store.violations()) {
        if (assignment && v.assignment != *assignment) continue;
        ++counts[{v.user, v.assignment, v.commit, v.rule}];
    }
    auto count_of = [&](const std::string& user, const std::string& task,
                        const std::string& commit, RuleId rule) {
        auto it = counts.find({user, task, commit, rule});
        return it == counts.end() ? 0 : it->second;
    };

    std::vector<DeltaRow> rows;
    for (auto& [key, commits] : sequences) {
        std::sort(commits.begin(), commits.end());
        const auto& [user, task] = key;
        for (RuleId rule : all_rules()) {
            for (size_t i = 1; i < commits.size(); ++i) {
                DeltaRow row;
                row.user = user;
                row.assignment = task;
                row.rule = rule;
                row.from_commit = commits[i - 1].hash;
                row.to_commit = commits[i].hash;
                row.prev_count = count_of(user, task, commits[i - 1].hash, rule);
                row.curr_count = count_of(user, task, commits[i].hash, rule);
                row.added = std::max(0, row.curr_count - row.prev_count);
                row.fixed = std::max(0, row.prev_count - row.curr_count);
                row.to_timestamp = commits[i].timestamp;
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

inline std::map<RuleId, RuleTotals> summarize(const std::vector<DeltaRow>& rows) {
    std::map<RuleId, RuleTotals> totals;
    for (const DeltaRow& row : rows) {
        totals[row.rule].added += row.added;
        totals[row.rule].fixed += row.fixed;
    }
    return totals;
}

// Writes summary.csv, deltas.csv and series.csv under dir. Byte-identical
// across runs over the same store: every table is emitted in sorted order.
inline std::vector<std::filesystem::path>
emit_report(const std::map<RuleId, RuleTotals>& totals, const std::vector<DeltaRow>& rows,
            const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    std::string summary = "rule,added,fixed\n";
    for (const auto& [rule, t] : totals)
        summary += rule_name(rule) + "," + std::to_string(t.added) + "," +
                   std::to_string(t.fixed) + "\n";

    std::string deltas =
        "user,assignment,rule,from_commit,to_commit,prev_count,curr_count,added,fixed\n";
    for (const DeltaRow& r : rows)
        deltas += csv_field(r.user) + "," + csv_field(r.assignment) + "," + rule_name(r.rule) +
                  "," + r.from_commit + "," + r.to_commit + "," + std::to_string(r.prev_count) +
                  "," + std::to_string(r.curr_count) + "," + std::to_string(r.added) + "," +
                  std::to_string(r.fixed) + "\n";

    std::map<std::pair<std::string, RuleId>, RuleTotals> buckets;
    for (const DeltaRow& r : rows) {
        RuleTotals& b = buckets[{utc_date(r.to_timestamp), r.rule}];
        b.added += r.added;
        b.fixed += r.fixed;
    }
    std::string series = "date,rule,added,fixed\n";
    for (const auto& [key, t] : buckets)
        series += key.first + "," + rule_name(key.second) + "," + std::to_string(t.added) + "," +
                  std::to_string(t.fixed) + "\n";

    std::vector<std::filesystem::path> written;
    for (const auto& [name, content] :
         std::initializer_list<std::pair<const char*, const std::string*>>{
             {"summary.csv", &summary}, {"deltas.csv", &deltas}, {"series.csv", &series}}) {
        std::filesystem::path p = dir / name;
        if (!atomic_write_file(p, *content))
            throw StoreError("cannot write report file " + p.string());
        written.push_back(p);
    }
    return written;
}

} // namespace sobo
