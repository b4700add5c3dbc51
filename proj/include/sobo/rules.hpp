#pragma once

#include "sobo/parser.hpp"

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sobo {

// Order matches lexicographic rule-id order so enum comparison sorts like the id string.
enum class RuleId { S109, S1155, S1213, S1481, S2119 };

inline const std::vector<RuleId>& all_rules() {
    static const std::vector<RuleId> rules{RuleId::S109, RuleId::S1155, RuleId::S1213,
                                           RuleId::S1481, RuleId::S2119};
    return rules;
}

inline std::string rule_name(RuleId r) {
    switch (r) {
    case RuleId::S109: return "S109";
    case RuleId::S1155: return "S1155";
    case RuleId::S1213: return "S1213";
    case RuleId::S1481: return "S1481";
    case RuleId::S2119: return "S2119";
    }
    return "?";
}

inline std::optional<RuleId> rule_from_string(std::string_view s) {
    for (RuleId r : all_rules())
        if (rule_name(r) == s) return r;
    return std::nullopt;
}

inline std::string rule_title(RuleId r) {
    switch (r) {
    case RuleId::S109: return "Magic numbers should not be used";
    case RuleId::S1155: return "Collection.isEmpty() should be used to test for emptiness";
    case RuleId::S1213:
        return "The members of an interface or class declaration should appear in a "
               "pre-defined order";
    case RuleId::S1481: return "Unused local variables should be removed";
    case RuleId::S2119: return "\"Random\" objects should be reused";
    }
    return "?";
}

struct Violation {
    RuleId rule = RuleId::S109;
    std::string file;
    int line = 0;
    std::string line_text;
    std::string message;

    friend bool operator==(const Violation& a, const Violation& b) {
        return a.rule == b.rule && a.file == b.file && a.line == b.line &&
               a.line_text == b.line_text && a.message == b.message;
    }
};

namespace detail {

// Numeric value of a Java literal, tolerant of underscores, radix prefixes and
// one type suffix. nullopt when the text does not reduce to a clean number.
inline std::optional<double> literal_value(std::string_view text) {
    std::string s;
    s.reserve(text.size());
    bool neg = false;
    size_t i = 0;
    if (i < text.size() && (text[i] == '-' || text[i] == '+')) {
        neg = text[i] == '-';
        ++i;
    }
    for (; i < text.size(); ++i)
        if (text[i] != '_') s.push_back(text[i]);
    if (s.empty()) return std::nullopt;

    auto finish = [&](double v) { return neg ? -v : v; };

    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        if (s.back() == 'l' || s.back() == 'L') s.pop_back();
        char* end = nullptr;
        if (s.find('.') != std::string::npos || s.find('p') != std::string::npos ||
            s.find('P') != std::string::npos) {
            double v = std::strtod(s.c_str(), &end); // hex float
            if (end && *end == '\0') return finish(v);
            return std::nullopt;
        }
        unsigned long long v = std::strtoull(s.c_str() + 2, &end, 16);
        if (end && *end == '\0' && end != s.c_str() + 2) return finish(static_cast<double>(v));
        return std::nullopt;
    }
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'b' || s[1] == 'B')) {
        if (s.back() == 'l' || s.back() == 'L') s.pop_back();
        char* end = nullptr;
        unsigned long long v = std::strtoull(s.c_str() + 2, &end, 2);
        if (end && *end == '\0' && end != s.c_str() + 2) return finish(static_cast<double>(v));
        return std::nullopt;
    }

    char suffix = s.back();
    bool floaty = false;
    if (suffix == 'l' || suffix == 'L') s.pop_back();
    else if (suffix == 'f' || suffix == 'F' || suffix == 'd' || suffix == 'D') {
        s.pop_back();
        floaty = true;
    }
    if (s.empty()) return std::nullopt;
    if (floaty || s.find('.') != std::string::npos || s.find('e') != std::string::npos ||
        s.find('E') != std::string::npos) {
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (end && *end == '\0') return finish(v);
        return std::nullopt;
    }
    // octal when it has a leading zero and more digits, decimal otherwise
    int base = (s.size() > 1 && s[0] == '0') ? 8 : 10;
    char* end = nullptr;
    unsigned long long v = std::strtoull(s.c_str(), &end, base);
    if (end && *end == '\0') return finish(static_cast<double>(v));
    return std::nullopt;
}

inline bool literal_is(std::string_view text, double want) {
    auto v = literal_value(text);
    return v && *v == want;
}

inline bool is_allowed_magic(std::string_view text) {
    auto v = literal_value(text);
    return v && (*v == -1.0 || *v == 0.0 || *v == 1.0);
}

template <typename Fn> void walk_expr(const Expr* e, Fn&& fn) {
    if (!e) return;
    fn(*e);
    walk_expr(e->lhs.get(), fn);
    walk_expr(e->rhs.get(), fn);
    for (const auto& a : e->args) walk_expr(a.get(), fn);
}

struct RuleSink {
    const SyntaxModel& model;
    RuleId rule;
    std::vector<Violation>& out;

    void emit(int line, std::string message) {
        if (model.line_in_error_span(line)) return;
        Violation v;
        v.rule = rule;
        v.file = model.file_path;
        v.line = line;
        v.line_text = model.line_text(line);
        v.message = std::move(message);
        out.push_back(std::move(v));
    }
};

// ---- S109 ----

struct S109Walker {
    RuleSink sink;

    void expr(const Expr* e) {
        walk_expr(e, [&](const Expr& n) {
            if (n.kind == ExprKind::NumberLiteral && !is_allowed_magic(n.text))
                sink.emit(n.line, "Assign this magic number " + n.text +
                                      " to a well-named constant");
        });
    }

    void stmts(const std::vector<Statement>& list) {
        for (const Statement& s : list) {
            if (s.kind == StmtKind::LocalVarDecl) {
                if (!s.is_final) expr(s.init.get());
                continue;
            }
            for (const auto& e : s.exprs) expr(e.get());
            stmts(s.init_stmts);
            stmts(s.body);
            stmts(s.else_body);
        }
    }

    void type(const TypeDecl& t) {
        for (const Member& m : t.members) {
            switch (m.kind) {
            case MemberKind::StaticField:
            case MemberKind::InstanceField:
                if (!m.is_final) expr(m.initializer.get());
                break;
            case MemberKind::NestedType:
                if (m.nested) type(*m.nested);
                break;
            default:
                stmts(m.body);
                break;
            }
        }
    }
};

// ---- S1155 ----

inline bool is_size_call(const Expr* e) {
    return e && e->kind == ExprKind::MethodCall && e->text == "size" && e->args.empty() &&
           e->lhs != nullptr;
}

inline bool is_emptiness_test(const Expr& e) {
    if (e.kind != ExprKind::BinaryOp) return false;
    const std::string& op = e.text;
    const Expr* l = e.lhs.get();
    const Expr* r = e.rhs.get();
    auto lit = [&](const Expr* n, double v) {
        return n && n->kind == ExprKind::NumberLiteral && literal_is(n->text, v);
    };
    if (is_size_call(l) && lit(r, 0))
        return op == "==" || op == "!=" || op == ">" || op == "<=";
    if (is_size_call(l) && lit(r, 1)) return op == ">=" || op == "<";
    if (lit(l, 0) && is_size_call(r))
        return op == "==" || op == "!=" || op == "<" || op == ">=";
    if (lit(l, 1) && is_size_call(r)) return op == "<=" || op == ">";
    return false;
}

struct S1155Walker {
    RuleSink sink;

    void expr(const Expr* e) {
        walk_expr(e, [&](const Expr& n) {
            if (is_emptiness_test(n))
                sink.emit(n.line, "Use isEmpty() to check whether the collection is empty or not");
        });
    }

    void stmts(const std::vector<Statement>& list) {
        for (const Statement& s : list) {
            expr(s.init.get());
            for (const auto& e : s.exprs) expr(e.get());
            stmts(s.init_stmts);
            stmts(s.body);
            stmts(s.else_body);
        }
    }

    void type(const TypeDecl& t) {
        for (const Member& m : t.members) {
            if (m.kind == MemberKind::NestedType) {
                if (m.nested) type(*m.nested);
                continue;
            }
            expr(m.initializer.get());
            stmts(m.body);
        }
    }
};

// ---- S1213 ----

inline int member_rank(MemberKind k) {
    switch (k) {
    case MemberKind::StaticField: return 1;
    case MemberKind::StaticInit: return 2;
    case MemberKind::InstanceField: return 3;
    case MemberKind::InstanceInit: return 4;
    case MemberKind::Constructor: return 5;
    case MemberKind::Method: return 6;
    case MemberKind::NestedType: return 0;
    }
    return 0;
}

inline const char* member_category(MemberKind k) {
    switch (k) {
    case MemberKind::StaticField: return "static field";
    case MemberKind::StaticInit: return "static initializer";
    case MemberKind::InstanceField: return "field";
    case MemberKind::InstanceInit: return "initializer";
    case MemberKind::Constructor: return "constructor";
    case MemberKind::Method: return "method";
    case MemberKind::NestedType: return "nested type";
    }
    return "member";
}

struct S1213Walker {
    RuleSink sink;

    void type(const TypeDecl& t) {
        int max_rank = 0;
        for (const Member& m : t.members) {
            if (m.kind == MemberKind::NestedType) {
                if (m.nested) type(*m.nested);
                continue;
            }
            int rank = member_rank(m.kind);
            if (rank < max_rank) {
                std::string what = member_category(m.kind);
                if (!m.name.empty()) what += " \"" + m.name + "\"";
                sink.emit(m.line, "Move this " + what +
                                      " to match the expected member order (static fields, "
                                      "static initializers, fields, initializers, "
                                      "constructors, methods)");
            } else {
                max_rank = rank;
            }
        }
    }
};

// ---- S1481 ----

struct S1481Walker {
    RuleSink sink;

    // Counts read occurrences of one name across a statement span. A
    // same-name redeclaration ends visibility for the rest of its list; the
    // shadowing initializer itself is evaluated with the new variable in
    // scope, so it is not counted either.
    struct ReadScan {
        const std::string& name;
        int reads = 0;

        void expr(const Expr* e) {
            if (!e) return;
            walk_expr(e, [&](const Expr& n) {
                if (n.kind == ExprKind::IdentifierUse && n.text == name) ++reads;
            });
        }

        // returns false when a shadowing declaration cut the list short
        bool stmts(const std::vector<Statement>& list, size_t start = 0) {
            for (size_t i = start; i < list.size(); ++i) {
                const Statement& s = list[i];
                if (s.kind == StmtKind::LocalVarDecl) {
                    if (s.name == name) return false;
                    expr(s.init.get());
                    continue;
                }
                bool header_shadows = false;
                for (const Statement& h : s.init_stmts)
                    if (h.kind == StmtKind::LocalVarDecl && h.name == name) header_shadows = true;
                if (header_shadows) {
                    // header decls are visible to the whole loop/resource
                    // statement; scan only the non-shadowed header prefix
                    for (const Statement& h : s.init_stmts) {
                        if (h.kind == StmtKind::LocalVarDecl && h.name == name) break;
                        if (h.kind == StmtKind::LocalVarDecl) expr(h.init.get());
                        else
                            for (const auto& e : h.exprs) expr(e.get());
                    }
                    continue;
                }
                stmts(s.init_stmts);
                for (const auto& e : s.exprs) expr(e.get());
                stmts(s.body);
                stmts(s.else_body);
            }
            return true;
        }
    };

    void maybe_flag(const Statement& decl, ReadScan& scan) {
        if (scan.reads == 0)
            sink.emit(decl.line, "Remove this unused local variable \"" + decl.name + "\"");
    }

    void stmts(const std::vector<Statement>& list) {
        for (size_t i = 0; i < list.size(); ++i) {
            const Statement& s = list[i];
            if (s.kind == StmtKind::LocalVarDecl) {
                ReadScan scan{s.name};
                scan.stmts(list, i + 1);
                maybe_flag(s, scan);
                continue;
            }
            // declarations in a loop header live for the whole statement;
            // try-with-resources declarations are closed by the runtime and
            // deliberately not tracked
            if (s.kind == StmtKind::Loop) {
                for (size_t h = 0; h < s.init_stmts.size(); ++h) {
                    const Statement& d = s.init_stmts[h];
                    if (d.kind != StmtKind::LocalVarDecl) continue;
                    ReadScan scan{d.name};
                    if (scan.stmts(s.init_stmts, h + 1)) {
                        for (const auto& e : s.exprs) scan.expr(e.get());
                        scan.stmts(s.body);
                    }
                    maybe_flag(d, scan);
                }
            }
            stmts(s.body);
            stmts(s.else_body);
        }
    }

    void type(const TypeDecl& t) {
        for (const Member& m : t.members) {
            if (m.kind == MemberKind::NestedType) {
                if (m.nested) type(*m.nested);
                continue;
            }
            stmts(m.body);
        }
    }
};

// ---- S2119 ----

inline bool creates_random(const Expr& e) {
    if (e.kind != ExprKind::ObjectCreation) return false;
    const std::string& n = e.text;
    if (n == "Random") return true;
    return n.size() > 7 && n.compare(n.size() - 7, 7, ".Random") == 0;
}

struct S2119Walker {
    RuleSink sink;

    void expr(const Expr* e) {
        walk_expr(e, [&](const Expr& n) {
            if (creates_random(n))
                sink.emit(n.line, "Create this \"Random\" once and reuse it");
        });
    }

    void stmts(const std::vector<Statement>& list) {
        for (const Statement& s : list) {
            expr(s.init.get());
            for (const auto& e : s.exprs) expr(e.get());
            stmts(s.init_stmts);
            stmts(s.body);
            stmts(s.else_body);
        }
    }

    void type(const TypeDecl& t) {
        for (const Member& m : t.members) {
            switch (m.kind) {
            case MemberKind::Constructor:
            case MemberKind::Method:
                stmts(m.body);
                break;
            case MemberKind::NestedType:
                if (m.nested) type(*m.nested);
                break;
            default:
                break; // field initializers and initializer blocks are reuse
            }
        }
    }
};

} // namespace detail

inline std::vector<Violation> check_s109_magic_numbers(const SyntaxModel& model) {
    std::vector<Violation> out;
    detail::S109Walker w{{model, RuleId::S109, out}};
    for (const TypeDecl& t : model.type_declarations) w.type(t);
    return out;
}

inline std::vector<Violation> check_s1155_is_empty(const SyntaxModel& model) {
    std::vector<Violation> out;
    detail::S1155Walker w{{model, RuleId::S1155, out}};
    for (const TypeDecl& t : model.type_declarations) w.type(t);
    return out;
}

inline std::vector<Violation> check_s1213_member_order(const SyntaxModel& model) {
    std::vector<Violation> out;
    detail::S1213Walker w{{model, RuleId::S1213, out}};
    for (const TypeDecl& t : model.type_declarations) w.type(t);
    return out;
}

inline std::vector<Violation> check_s1481_unused_locals(const SyntaxModel& model) {
    std::vector<Violation> out;
    detail::S1481Walker w{{model, RuleId::S1481, out}};
    for (const TypeDecl& t : model.type_declarations) w.type(t);
    return out;
}

inline std::vector<Violation> check_s2119_random_reuse(const SyntaxModel& model) {
    std::vector<Violation> out;
    detail::S2119Walker w{{model, RuleId::S2119, out}};
    for (const TypeDecl& t : model.type_declarations) w.type(t);
    return out;
}

inline std::vector<Violation> check_rule(const SyntaxModel& model, RuleId rule) {
    switch (rule) {
    case RuleId::S109: return check_s109_magic_numbers(model);
    case RuleId::S1155: return check_s1155_is_empty(model);
    case RuleId::S1213: return check_s1213_member_order(model);
    case RuleId::S1481: return check_s1481_unused_locals(model);
    case RuleId::S2119: return check_s2119_random_reuse(model);
    }
    return {};
}

inline std::vector<Violation> check_all(const SyntaxModel& model, const std::set<RuleId>& enabled) {
    std::vector<Violation> out;
    for (RuleId r : all_rules()) {
        if (!enabled.count(r)) continue;
        std::vector<Violation> part = check_rule(model, r);
        out.insert(out.end(), std::make_move_iterator(part.begin()),
                   std::make_move_iterator(part.end()));
    }
    std::stable_sort(out.begin(), out.end(), [](const Violation& a, const Violation& b) {
        if (a.file != b.file) return a.file < b.file;
        if (a.line != b.line) return a.line < b.line;
        return a.rule < b.rule;
    });
    return out;
}

inline std::set<RuleId> all_rules_set() {
    return std::set<RuleId>(all_rules().begin(), all_rules().end());
}

// Actionable before/after snippet shown in feedback, keyed by rule.
inline std::string rule_example(RuleId r) {
    switch (r) {
    case RuleId::S109:
        return "```java\n"
               "// Noncompliant\n"
               "int capacity = 42;\n"
               "\n"
               "// Compliant\n"
               "static final int DEFAULT_CAPACITY = 42;\n"
               "int capacity = DEFAULT_CAPACITY;\n"
               "```";
    case RuleId::S1155:
        return "```java\n"
               "// Noncompliant\n"
               "if (items.size() == 0) { return; }\n"
               "\n"
               "// Compliant\n"
               "if (items.isEmpty()) { return; }\n"
               "```";
    case RuleId::S1213:
        return "```java\n"
               "// Noncompliant: field declared after a method\n"
               "class Point { void move() {} int x; }\n"
               "\n"
               "// Compliant: fields, then constructors, then methods\n"
               "class Point { int x; void move() {} }\n"
               "```";
    case RuleId::S1481:
        return "```java\n"
               "// Noncompliant\n"
               "int total = compute();\n"
               "return 0;\n"
               "\n"
               "// Compliant\n"
               "return 0;\n"
               "```";
    case RuleId::S2119:
        return "```java\n"
               "// Noncompliant: a fresh generator every call\n"
               "int roll() { return new Random().nextInt(6); }\n"
               "\n"
               "// Compliant: one generator, reused\n"
               "private final Random random = new Random();\n"
               "int roll() { return random.nextInt(6); }\n"
               "```";
    }
    return "";
}

} // namespace sobo
