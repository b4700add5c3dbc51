#pragma once

#include "sobo/lexer.hpp"
#include "sobo/util.hpp"

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sobo {

enum class ExprKind {
    NumberLiteral,
    IdentifierUse,
    MethodCall,
    ObjectCreation,
    BinaryOp,
    Assignment,
    Unary,
    FieldAccess,
    Index,
    Other,
};

struct Expr {
    ExprKind kind = ExprKind::Other;
    int line = 0;
    // role depends on kind: literal text, used name, method name, created class
    // name, operator, assignment target, accessed member
    std::string text;
    std::string receiver_text; // MethodCall only, printable form
    std::unique_ptr<Expr> lhs;
    std::unique_ptr<Expr> rhs;
    std::vector<std::unique_ptr<Expr>> args;
};

using ExprPtr = std::unique_ptr<Expr>;

enum class StmtKind { Block, LocalVarDecl, ExprStmt, If, Loop, Return, Other };

struct Statement {
    StmtKind kind = StmtKind::Other;
    int line = 0;
    std::string name;      // LocalVarDecl: declared variable
    bool is_final = false; // LocalVarDecl
    ExprPtr init;          // LocalVarDecl initializer
    std::vector<ExprPtr> exprs;        // condition / payload / loop updates / case labels
    std::vector<Statement> init_stmts; // Loop: for-header declarations
    std::vector<Statement> body;
    std::vector<Statement> else_body;
};

enum class MemberKind {
    StaticField,
    InstanceField,
    StaticInit,
    InstanceInit,
    Constructor,
    Method,
    NestedType,
};

struct TypeDecl;

struct Member {
    MemberKind kind = MemberKind::Method;
    std::string name; // empty for initializer blocks
    int line = 0;
    bool is_final = false;
    ExprPtr initializer; // fields
    std::vector<Statement> body;
    std::unique_ptr<TypeDecl> nested;
};

enum class TypeKind { Class, Interface, Enum };

struct TypeDecl {
    std::string name;
    TypeKind kind = TypeKind::Class;
    int line = 0;
    std::vector<Member> members;
};

struct ParseError {
    int line = 0;     // first line of the skipped span
    int end_line = 0; // last line touched by recovery
    std::string message;
};

struct SyntaxModel {
    std::string file_path;
    std::vector<TypeDecl> type_declarations;
    std::vector<ParseError> parse_errors;
    std::vector<std::string> source_lines;

    bool line_in_error_span(int line) const {
        for (const ParseError& e : parse_errors)
            if (line >= e.line && line <= e.end_line) return true;
        return false;
    }

    std::string line_text(int line) const {
        if (line < 1 || static_cast<size_t>(line) > source_lines.size()) return {};
        return std::string(trim(source_lines[line - 1]));
    }
};

namespace detail {

inline bool is_modifier_kw(std::string_view t) {
    return t == "public" || t == "private" || t == "protected" || t == "static" || t == "final" ||
           t == "abstract" || t == "synchronized" || t == "native" || t == "transient" ||
           t == "volatile" || t == "strictfp" || t == "default";
}

inline bool is_primitive_kw(std::string_view t) {
    return t == "int" || t == "long" || t == "short" || t == "byte" || t == "char" ||
           t == "boolean" || t == "float" || t == "double" || t == "void";
}

inline std::string printable(const Expr* e);

inline std::string printable(const Expr* e) {
    if (!e) return "expr";
    switch (e->kind) {
    case ExprKind::IdentifierUse:
    case ExprKind::NumberLiteral:
        return e->text;
    case ExprKind::FieldAccess:
        return printable(e->lhs.get()) + "." + e->text;
    case ExprKind::MethodCall:
        return (e->receiver_text.empty() ? e->text : e->receiver_text + "." + e->text) + "()";
    case ExprKind::Index:
        return printable(e->lhs.get()) + "[]";
    case ExprKind::Other:
        if (!e->text.empty()) return e->text;
        return "expr";
    default:
        return "expr";
    }
}

// Recursive-descent parser over the token stream, comments skipped via cursor.
// Never throws: malformed regions are recorded as ParseErrors and skipped by
// statement/member-level resynchronization.
class Parser {
public:
    Parser(const std::vector<Token>& tokens, std::string file_path, std::string_view source)
        : model_() {
        model_.file_path = std::move(file_path);
        model_.source_lines = split_lines(source);
        for (const Token& t : tokens)
            if (t.kind != TokenKind::Comment) toks_.push_back(&t);
    }

    SyntaxModel run() {
        while (!eof()) {
            size_t before = pos_;
            top_level_item();
            if (pos_ == before) bump(); // always make progress
        }
        return std::move(model_);
    }

private:
    SyntaxModel model_;
    std::vector<const Token*> toks_;
    size_t pos_ = 0;
    int depth_ = 0;
    static constexpr int kMaxDepth = 220;

    struct DepthGuard {
        Parser& p;
        bool ok;
        explicit DepthGuard(Parser& parser) : p(parser), ok(++p.depth_ <= kMaxDepth) {}
        ~DepthGuard() { --p.depth_; }
    };

    // ---- cursor helpers ----
    bool eof() const { return pos_ >= toks_.size(); }
    const Token& tok(size_t off = 0) const {
        static const Token eof_tok{TokenKind::Punct, "", 0, 0};
        return pos_ + off < toks_.size() ? *toks_[pos_ + off] : eof_tok;
    }
    int cur_line() const { return eof() ? last_line() : tok().line; }
    int last_line() const { return toks_.empty() ? 1 : toks_.back()->line; }
    void bump() {
        if (!eof()) ++pos_;
    }
    bool at_text(std::string_view t, size_t off = 0) const { return tok(off).text == t; }
    bool at_kw(std::string_view t, size_t off = 0) const {
        return tok(off).kind == TokenKind::Keyword && tok(off).text == t;
    }
    bool at_ident(size_t off = 0) const { return tok(off).kind == TokenKind::Identifier; }
    bool accept(std::string_view t) {
        if (at_text(t)) {
            bump();
            return true;
        }
        return false;
    }

    void error_at(int start_line, int end_line, std::string message) {
        model_.parse_errors.push_back({start_line, end_line, std::move(message)});
    }

    // Skip to the next ';' at the current brace depth, or just before the '}'
    // closing the current region. Returns the last line touched.
    int sync_statement() {
        int depth = 0;
        int last = cur_line();
        while (!eof()) {
            const Token& t = tok();
            last = t.line;
            if (t.text == ";" && depth == 0) {
                bump();
                return last;
            }
            if (t.text == "{") ++depth;
            if (t.text == "}") {
                if (depth == 0) return last;
                --depth;
            }
            bump();
        }
        return last;
    }

    // false when EOF arrived before the closer
    bool skip_balanced(std::string_view open, std::string_view close) {
        if (!at_text(open)) return true;
        int depth = 0;
        while (!eof()) {
            if (at_text(open)) ++depth;
            else if (at_text(close)) {
                --depth;
                if (depth == 0) {
                    bump();
                    return true;
                }
            }
            bump();
        }
        return false;
    }

    // Angle-bracket skip for generic argument/parameter lists; tolerates the
    // shift operators produced by nested closers.
    void skip_generics() {
        if (!at_text("<")) return;
        int depth = 0;
        while (!eof()) {
            const std::string& t = tok().text;
            if (t == "<") depth += 1;
            else if (t == ">") depth -= 1;
            else if (t == ">>") depth -= 2;
            else if (t == ">>>") depth -= 3;
            bump();
            if (depth <= 0) return;
        }
    }

    void skip_annotation() {
        // '@' ident(.ident)* optional (...)
        bump(); // '@'
        if (at_kw("interface")) return; // @interface declaration, caller handles
        while (at_ident()) {
            bump();
            if (!accept(".")) break;
        }
        if (at_text("(")) skip_balanced("(", ")");
    }

    // ---- speculative scans (no side effects) ----

    bool scan_type(size_t& i) const {
        if (tok_at(i).kind == TokenKind::Keyword && is_primitive_kw(tok_at(i).text)) {
            ++i;
        } else if (tok_at(i).kind == TokenKind::Identifier) {
            ++i;
            while (text_at(i) == "." && tok_at(i + 1).kind == TokenKind::Identifier) i += 2;
            if (text_at(i) == "<" && !scan_generic_args(i)) return false;
        } else {
            return false;
        }
        while (text_at(i) == "[" && text_at(i + 1) == "]") i += 2;
        return true;
    }

    bool scan_generic_args(size_t& i) const {
        // strictly type-shaped contents; anything else means "not a type"
        int depth = 0;
        size_t guard = 0;
        while (i < toks_.size() && guard++ < 512) {
            const std::string& t = text_at(i);
            if (t == "<") depth += 1;
            else if (t == ">") depth -= 1;
            else if (t == ">>") depth -= 2;
            else if (t == ">>>") depth -= 3;
            else if (t == "," || t == "." || t == "?" || t == "[" || t == "]") {
                // fine
            } else if (tok_at(i).kind == TokenKind::Identifier) {
                // fine
            } else if (tok_at(i).kind == TokenKind::Keyword &&
                       (tok_at(i).text == "extends" || tok_at(i).text == "super" ||
                        is_primitive_kw(tok_at(i).text))) {
                // fine
            } else {
                return false;
            }
            ++i;
            if (depth <= 0) return true;
        }
        return false;
    }

    const Token& tok_at(size_t i) const {
        static const Token eof_tok{TokenKind::Punct, "", 0, 0};
        return i < toks_.size() ? *toks_[i] : eof_tok;
    }
    const std::string& text_at(size_t i) const {
        static const std::string empty;
        return i < toks_.size() ? toks_[i]->text : empty;
    }

    // local variable declaration lookahead: [final] Type name (= | ; | , | :)
    bool looks_like_decl() const {
        size_t i = pos_;
        while (true) {
            if (tok_at(i).kind == TokenKind::Keyword && tok_at(i).text == "final") {
                ++i;
            } else if (text_at(i) == "@") {
                ++i;
                while (tok_at(i).kind == TokenKind::Identifier) {
                    ++i;
                    if (text_at(i) == ".") ++i;
                    else break;
                }
                if (text_at(i) == "(") return false; // too exotic for a decl scan
            } else {
                break;
            }
        }
        if (!scan_type(i)) return false;
        if (tok_at(i).kind != TokenKind::Identifier) return false;
        ++i;
        while (text_at(i) == "[" && text_at(i + 1) == "]") i += 2;
        const std::string& next = text_at(i);
        return next == "=" || next == ";" || next == "," || next == ":";
    }

    // ---- top level ----

    void top_level_item() {
        if (at_kw("package") || at_kw("import")) {
            int start = cur_line();
            while (!eof() && !at_text(";")) bump();
            accept(";");
            (void)start;
            return;
        }
        if (at_text(";")) {
            bump();
            return;
        }
        if (at_text("@")) {
            size_t save = pos_;
            skip_annotation();
            if (at_kw("interface")) {
                // @interface: skip the whole annotation-type declaration
                int start = toks_[save]->line;
                while (!eof() && !at_text("{")) bump();
                skip_balanced("{", "}");
                error_at(start, cur_line(), "annotation type skipped");
            }
            return;
        }
        if (tok().kind == TokenKind::Keyword &&
            (is_modifier_kw(tok().text) || tok().text == "class" || tok().text == "interface" ||
             tok().text == "enum")) {
            std::vector<std::string> mods;
            while (tok().kind == TokenKind::Keyword && is_modifier_kw(tok().text)) {
                mods.push_back(tok().text);
                bump();
                while (at_text("@")) skip_annotation();
            }
            if (at_kw("class") || at_kw("interface") || at_kw("enum")) {
                auto decl = parse_type_decl();
                if (decl) model_.type_declarations.push_back(std::move(*decl));
                return;
            }
            int start = cur_line();
            int end = sync_statement();
            error_at(start, end, "expected type declaration");
            return;
        }
        int start = cur_line();
        int end = sync_statement();
        error_at(start, end, "stray tokens outside any type declaration");
    }

    std::optional<TypeDecl> parse_type_decl() {
        DepthGuard guard(*this);
        TypeDecl decl;
        decl.line = cur_line();
        if (at_kw("class")) decl.kind = TypeKind::Class;
        else if (at_kw("interface")) decl.kind = TypeKind::Interface;
        else if (at_kw("enum")) decl.kind = TypeKind::Enum;
        else return std::nullopt;
        bump();
        if (!at_ident()) {
            int end = sync_statement();
            error_at(decl.line, end, "type declaration without a name");
            return std::nullopt;
        }
        decl.name = tok().text;
        bump();
        skip_generics();
        while (!eof() && !at_text("{") && !at_text(";")) bump(); // extends/implements/permits
        if (!guard.ok) {
            int start = cur_line();
            skip_balanced("{", "}");
            error_at(start, cur_line(), "nesting too deep");
            return decl;
        }
        if (!accept("{")) {
            error_at(decl.line, cur_line(), "type body missing");
            return decl;
        }
        if (decl.kind == TypeKind::Enum) parse_enum_constants();
        while (!eof() && !at_text("}")) {
            size_t before = pos_;
            parse_member(decl);
            if (pos_ == before) bump();
        }
        if (!accept("}")) error_at(last_line(), last_line(), "type body not closed");
        return decl;
    }

    void parse_enum_constants() {
        // IDENT [(...)] [{...}] (',' ...)* [';']  — constant arguments and
        // bodies are outside the analyzed subset
        while (!eof()) {
            while (at_text("@")) skip_annotation();
            if (at_text(";")) {
                bump();
                return;
            }
            if (at_text("}")) return;
            if (at_ident()) bump();
            else {
                int start = cur_line();
                int end = sync_statement();
                error_at(start, end, "malformed enum constant list");
                return;
            }
            if (at_text("(")) skip_balanced("(", ")");
            if (at_text("{")) skip_balanced("{", "}");
            if (at_text(",")) {
                bump();
                continue;
            }
        }
    }

    void parse_member(TypeDecl& decl) {
        int start_line = cur_line();
        bool has_static = false, has_final = false;
        while (true) {
            if (at_text("@")) {
                skip_annotation();
                continue;
            }
            if (tok().kind == TokenKind::Keyword && is_modifier_kw(tok().text)) {
                if (tok().text == "static") has_static = true;
                if (tok().text == "final") has_final = true;
                bump();
                continue;
            }
            break;
        }

        if (at_text(";")) {
            bump();
            return;
        }
        if (at_text("{")) {
            Member m;
            m.kind = has_static ? MemberKind::StaticInit : MemberKind::InstanceInit;
            m.line = start_line;
            m.is_final = has_final;
            m.body = parse_block_body();
            decl.members.push_back(std::move(m));
            return;
        }
        if (at_kw("class") || at_kw("interface") || at_kw("enum")) {
            auto nested = parse_type_decl();
            if (nested) {
                Member m;
                m.kind = MemberKind::NestedType;
                m.name = nested->name;
                m.line = start_line;
                m.is_final = has_final;
                m.nested = std::make_unique<TypeDecl>(std::move(*nested));
                decl.members.push_back(std::move(m));
            }
            return;
        }
        if (at_text("<")) skip_generics(); // generic method type parameters

        // constructor: Name '('
        if (at_ident() && tok().text == decl.name && at_text("(", 1)) {
            Member m;
            m.kind = MemberKind::Constructor;
            m.name = decl.name;
            m.line = start_line;
            m.is_final = has_final;
            bump();
            if (!skip_balanced("(", ")"))
                error_at(start_line, last_line(), "unbalanced parameter list");
            while (!eof() && !at_text("{") && !at_text(";")) bump(); // throws
            if (at_text("{")) m.body = parse_block_body();
            else accept(";");
            decl.members.push_back(std::move(m));
            return;
        }

        size_t probe = pos_;
        if (!scan_type(probe) || tok_at(probe).kind != TokenKind::Identifier) {
            int end = sync_member();
            error_at(start_line, end, "unrecognized member");
            return;
        }

        // committed: consume the type
        consume_type();
        std::string name = tok().text;
        bump();

        if (at_text("(")) {
            Member m;
            m.kind = MemberKind::Method;
            m.name = name;
            m.line = start_line;
            m.is_final = has_final;
            if (!skip_balanced("(", ")"))
                error_at(start_line, last_line(), "unbalanced parameter list");
            while (!eof() && !at_text("{") && !at_text(";")) bump(); // throws / default value
            if (at_text("{")) m.body = parse_block_body();
            else accept(";");
            decl.members.push_back(std::move(m));
            return;
        }

        // field declarator list
        int declarator_line = start_line;
        while (true) {
            Member m;
            m.kind = has_static ? MemberKind::StaticField : MemberKind::InstanceField;
            m.name = name;
            m.line = declarator_line;
            m.is_final = has_final;
            while (at_text("[") && at_text("]", 1)) {
                bump();
                bump();
            }
            if (accept("=")) m.initializer = parse_init_expr();
            decl.members.push_back(std::move(m));
            if (accept(",")) {
                if (!at_ident()) {
                    int end = sync_member();
                    error_at(cur_line(), end, "malformed field declarator");
                    return;
                }
                declarator_line = cur_line();
                name = tok().text;
                bump();
                continue;
            }
            if (!accept(";")) {
                int end = sync_member();
                error_at(declarator_line, end, "field declaration not terminated");
            }
            return;
        }
    }

    int sync_member() {
        int depth = 0;
        int last = cur_line();
        while (!eof()) {
            const Token& t = tok();
            last = t.line;
            if (t.text == ";" && depth == 0) {
                bump();
                return last;
            }
            if (t.text == "{") ++depth;
            if (t.text == "}") {
                if (depth == 0) return last;
                --depth;
                if (depth == 0) {
                    bump();
                    return last;
                }
            }
            bump();
        }
        return last;
    }

    void consume_type() {
        if (tok().kind == TokenKind::Keyword && is_primitive_kw(tok().text)) {
            bump();
        } else {
            bump(); // identifier
            while (at_text(".") && at_ident(1)) {
                bump();
                bump();
            }
            if (at_text("<")) skip_generics();
        }
        while (at_text("[") && at_text("]", 1)) {
            bump();
            bump();
        }
    }

    // ---- statements ----

    std::vector<Statement> parse_block_body() {
        std::vector<Statement> stmts;
        if (!accept("{")) return stmts;
        DepthGuard guard(*this);
        if (!guard.ok) {
            int start = cur_line();
            // rewind conceptually: we already consumed '{'; skip to its '}'
            int depth = 1;
            while (!eof() && depth > 0) {
                if (at_text("{")) ++depth;
                if (at_text("}")) --depth;
                bump();
            }
            error_at(start, cur_line(), "nesting too deep");
            return stmts;
        }
        while (!eof() && !at_text("}")) {
            size_t before = pos_;
            parse_statement_into(stmts);
            if (pos_ == before) bump();
        }
        accept("}");
        return stmts;
    }

    void parse_statement_into(std::vector<Statement>& out) {
        DepthGuard guard(*this);
        int line = cur_line();
        if (!guard.ok) {
            int end = sync_statement();
            error_at(line, end, "nesting too deep");
            return;
        }

        if (at_text("{")) {
            Statement s;
            s.kind = StmtKind::Block;
            s.line = line;
            s.body = parse_block_body();
            out.push_back(std::move(s));
            return;
        }
        if (at_text(";")) {
            bump();
            return;
        }
        if (at_text("@")) {
            skip_annotation();
            return;
        }
        if (at_kw("if")) {
            bump();
            Statement s;
            s.kind = StmtKind::If;
            s.line = line;
            if (accept("(")) {
                s.exprs.push_back(parse_expr());
                expect_closing(")");
            }
            parse_statement_into(s.body);
            if (at_kw("else")) {
                bump();
                parse_statement_into(s.else_body);
            }
            out.push_back(std::move(s));
            return;
        }
        if (at_kw("while")) {
            bump();
            Statement s;
            s.kind = StmtKind::Loop;
            s.line = line;
            if (accept("(")) {
                s.exprs.push_back(parse_expr());
                expect_closing(")");
            }
            parse_statement_into(s.body);
            out.push_back(std::move(s));
            return;
        }
        if (at_kw("do")) {
            bump();
            Statement s;
            s.kind = StmtKind::Loop;
            s.line = line;
            parse_statement_into(s.body);
            if (at_kw("while")) {
                bump();
                if (accept("(")) {
                    s.exprs.push_back(parse_expr());
                    expect_closing(")");
                }
                accept(";");
            }
            out.push_back(std::move(s));
            return;
        }
        if (at_kw("for")) {
            bump();
            out.push_back(parse_for(line));
            return;
        }
        if (at_kw("return")) {
            bump();
            Statement s;
            s.kind = StmtKind::Return;
            s.line = line;
            if (!at_text(";") && !at_text("}") && !eof()) s.exprs.push_back(parse_expr());
            accept(";");
            out.push_back(std::move(s));
            return;
        }
        if (at_kw("throw")) {
            bump();
            Statement s;
            s.kind = StmtKind::Other;
            s.line = line;
            s.exprs.push_back(parse_expr());
            accept(";");
            out.push_back(std::move(s));
            return;
        }
        if (at_kw("break") || at_kw("continue")) {
            bump();
            if (at_ident()) bump(); // label, not a variable read
            accept(";");
            return;
        }
        if (at_kw("switch")) {
            bump();
            out.push_back(parse_switch(line));
            return;
        }
        if (at_kw("try")) {
            bump();
            out.push_back(parse_try(line));
            return;
        }
        if (at_kw("synchronized")) {
            bump();
            Statement s;
            s.kind = StmtKind::Block;
            s.line = line;
            if (accept("(")) {
                s.exprs.push_back(parse_expr());
                expect_closing(")");
            }
            s.body = parse_block_body();
            out.push_back(std::move(s));
            return;
        }
        if (at_kw("assert")) {
            bump();
            Statement s;
            s.kind = StmtKind::Other;
            s.line = line;
            s.exprs.push_back(parse_expr());
            if (accept(":")) s.exprs.push_back(parse_expr());
            accept(";");
            out.push_back(std::move(s));
            return;
        }
        if (at_kw("class") || at_kw("interface") || at_kw("enum")) {
            // local type declarations are outside the analyzed subset
            parse_type_decl();
            return;
        }
        // labeled statement: IDENT ':' (but not 'a ? b : c' — ternary needs '?')
        if (at_ident() && at_text(":", 1) && !at_text("?", 2)) {
            bump();
            bump();
            parse_statement_into(out);
            return;
        }

        if (looks_like_decl()) {
            parse_local_decls(out, /*in_for_header=*/false);
            return;
        }

        // expression statement
        Statement s;
        s.kind = StmtKind::ExprStmt;
        s.line = line;
        s.exprs.push_back(parse_expr());
        if (!accept(";")) {
            if (!at_text("}")) {
                int end = sync_statement();
                error_at(line, end, "statement not terminated");
                return;
            }
        }
        out.push_back(std::move(s));
    }

    void expect_closing(std::string_view close) {
        if (!accept(close)) {
            int start = cur_line();
            int depth = 0;
            while (!eof()) {
                if (at_text("(")) ++depth;
                else if (at_text(")")) {
                    if (depth == 0) {
                        bump();
                        break;
                    }
                    --depth;
                } else if (at_text("{") || at_text(";") || at_text("}")) {
                    // '}' closes an enclosing block; never scan past it
                    break;
                }
                bump();
            }
            error_at(start, cur_line(), "expected ')'");
        }
    }

    void parse_local_decls(std::vector<Statement>& out, bool in_for_header) {
        int stmt_line = cur_line();
        bool is_final = false;
        while (true) {
            if (at_kw("final")) {
                is_final = true;
                bump();
                continue;
            }
            if (at_text("@")) {
                skip_annotation();
                continue;
            }
            break;
        }
        consume_type();
        bool first = true;
        while (true) {
            if (!at_ident()) {
                int end = sync_statement();
                error_at(stmt_line, end, "malformed variable declaration");
                return;
            }
            Statement s;
            s.kind = StmtKind::LocalVarDecl;
            s.line = first ? stmt_line : cur_line();
            s.name = tok().text;
            s.is_final = is_final;
            bump();
            while (at_text("[") && at_text("]", 1)) {
                bump();
                bump();
            }
            if (at_text(":")) {
                // foreach header: caller consumes the ':' and iterable
                out.push_back(std::move(s));
                return;
            }
            if (accept("=")) s.init = parse_init_expr();
            out.push_back(std::move(s));
            first = false;
            if (accept(",")) continue;
            if (!in_for_header) {
                if (!accept(";")) {
                    int end = sync_statement();
                    error_at(stmt_line, end, "variable declaration not terminated");
                }
            }
            return;
        }
    }

    Statement parse_for(int line) {
        Statement s;
        s.kind = StmtKind::Loop;
        s.line = line;
        if (!accept("(")) {
            parse_statement_into(s.body);
            return s;
        }
        if (looks_like_decl()) {
            parse_local_decls(s.init_stmts, /*in_for_header=*/true);
            if (accept(":")) {
                // foreach
                s.exprs.push_back(parse_expr());
                expect_closing(")");
                parse_statement_into(s.body);
                return s;
            }
            accept(";");
        } else if (accept(";")) {
            // empty init
        } else {
            Statement init;
            init.kind = StmtKind::ExprStmt;
            init.line = cur_line();
            init.exprs.push_back(parse_expr());
            while (accept(",")) init.exprs.push_back(parse_expr());
            s.init_stmts.push_back(std::move(init));
            accept(";");
        }
        if (!at_text(";")) s.exprs.push_back(parse_expr()); // condition
        accept(";");
        while (!at_text(")") && !eof() && !at_text("{")) {
            s.exprs.push_back(parse_expr()); // updates
            if (!accept(",")) break;
        }
        expect_closing(")");
        parse_statement_into(s.body);
        return s;
    }

    Statement parse_switch(int line) {
        Statement s;
        s.kind = StmtKind::If;
        s.line = line;
        if (accept("(")) {
            s.exprs.push_back(parse_expr());
            expect_closing(")");
        }
        Statement block;
        block.kind = StmtKind::Block;
        block.line = cur_line();
        if (accept("{")) {
            while (!eof() && !at_text("}")) {
                size_t before = pos_;
                if (at_kw("case")) {
                    bump();
                    Statement label;
                    label.kind = StmtKind::Other;
                    label.line = cur_line();
                    label.exprs.push_back(parse_expr());
                    while (accept(",")) label.exprs.push_back(parse_expr());
                    accept(":");
                    accept("->");
                    block.body.push_back(std::move(label));
                } else if (at_kw("default")) {
                    bump();
                    accept(":");
                    accept("->");
                } else {
                    parse_statement_into(block.body);
                }
                if (pos_ == before) bump();
            }
            accept("}");
        }
        s.body.push_back(std::move(block));
        return s;
    }

    Statement parse_try(int line) {
        Statement s;
        s.kind = StmtKind::Other;
        s.line = line;
        if (at_text("(")) {
            // try-with-resources: resource declarations
            bump();
            while (!eof() && !at_text(")")) {
                if (looks_like_decl()) {
                    parse_local_decls(s.init_stmts, /*in_for_header=*/true);
                } else {
                    s.exprs.push_back(parse_expr());
                }
                if (!accept(";")) break;
            }
            accept(")");
        }
        {
            Statement b;
            b.kind = StmtKind::Block;
            b.line = cur_line();
            b.body = parse_block_body();
            s.body.push_back(std::move(b));
        }
        while (at_kw("catch")) {
            bump();
            skip_balanced("(", ")"); // catch parameter is not a tracked local
            Statement b;
            b.kind = StmtKind::Block;
            b.line = cur_line();
            b.body = parse_block_body();
            s.body.push_back(std::move(b));
        }
        if (at_kw("finally")) {
            bump();
            Statement b;
            b.kind = StmtKind::Block;
            b.line = cur_line();
            b.body = parse_block_body();
            s.body.push_back(std::move(b));
        }
        return s;
    }

    // ---- expressions ----

    ExprPtr make_expr(ExprKind kind, int line, std::string text = {}) {
        auto e = std::make_unique<Expr>();
        e->kind = kind;
        e->line = line;
        e->text = std::move(text);
        return e;
    }

    ExprPtr parse_init_expr() {
        if (at_text("{")) return parse_array_init();
        return parse_expr();
    }

    ExprPtr parse_array_init() {
        int line = cur_line();
        auto e = make_expr(ExprKind::Other, line, "{...}");
        if (!accept("{")) return e;
        DepthGuard guard(*this);
        if (!guard.ok) {
            int depth = 1;
            while (!eof() && depth > 0) {
                if (at_text("{")) ++depth;
                if (at_text("}")) --depth;
                bump();
            }
            error_at(line, cur_line(), "nesting too deep");
            return e;
        }
        while (!eof() && !at_text("}")) {
            size_t before = pos_;
            if (at_text("{")) e->args.push_back(parse_array_init());
            else e->args.push_back(parse_expr());
            accept(",");
            if (pos_ == before) bump();
        }
        accept("}");
        return e;
    }

    ExprPtr parse_expr() {
        DepthGuard guard(*this);
        if (!guard.ok) {
            int line = cur_line();
            bump();
            return make_expr(ExprKind::Other, line);
        }
        return parse_assignment();
    }

    bool at_assign_op() const {
        const std::string& t = tok().text;
        return tok().kind == TokenKind::Operator &&
               (t == "=" || t == "+=" || t == "-=" || t == "*=" || t == "/=" || t == "%=" ||
                t == "&=" || t == "|=" || t == "^=" || t == "<<=" || t == ">>=" || t == ">>>=");
    }

    // True when the '(' at the cursor closes into a '->', i.e. starts a
    // lambda parameter list rather than a cast or parenthesized expression.
    bool lambda_params_ahead() const {
        size_t i = pos_;
        int depth = 0;
        while (i < toks_.size()) {
            const Token& t = *toks_[i];
            if (t.kind == TokenKind::Operator || t.kind == TokenKind::Punct) {
                if (t.text == "(") {
                    ++depth;
                } else if (t.text == ")") {
                    if (--depth == 0)
                        return i + 1 < toks_.size() && toks_[i + 1]->text == "->";
                } else if (t.text == ";" || t.text == "{" || t.text == "}") {
                    return false; // parameter lists never span statements
                }
            }
            ++i;
        }
        return false;
    }

    // Lambdas are consumed structurally: parameter names are declarations,
    // not reads, so they are skipped, while every expression in the body is
    // hoisted into the lambda node's args to stay visible to the rules.
    ExprPtr try_lambda() {
        int line = cur_line();
        if (at_ident() && at_text("->", 1)) {
            bump(); // parameter name
            bump(); // ->
            return parse_lambda_body(line);
        }
        if (at_text("(") && lambda_params_ahead()) {
            skip_balanced("(", ")");
            bump(); // ->
            return parse_lambda_body(line);
        }
        return nullptr;
    }

    ExprPtr parse_lambda_body(int line) {
        auto e = make_expr(ExprKind::Other, line, "lambda");
        if (at_text("{")) {
            std::vector<Statement> body;
            size_t before = pos_;
            parse_statement_into(body);
            if (pos_ == before) bump();
            for (Statement& s : body) hoist_exprs(s, e->args);
        } else {
            e->args.push_back(parse_expr());
        }
        return e;
    }

    static void hoist_exprs(Statement& s, std::vector<ExprPtr>& out) {
        if (s.init) out.push_back(std::move(s.init));
        for (ExprPtr& x : s.exprs)
            if (x) out.push_back(std::move(x));
        s.exprs.clear();
        for (Statement& c : s.init_stmts) hoist_exprs(c, out);
        for (Statement& c : s.body) hoist_exprs(c, out);
        for (Statement& c : s.else_body) hoist_exprs(c, out);
    }

    ExprPtr parse_assignment() {
        if (ExprPtr lam = try_lambda()) return lam;
        ExprPtr lhs = parse_ternary();
        if (!at_assign_op()) return lhs;
        std::string op = tok().text;
        int line = tok().line;
        bump();
        ExprPtr value = parse_assignment();
        auto e = make_expr(ExprKind::Assignment, line);
        e->text = printable(lhs.get());
        if (op == "=" && lhs->kind == ExprKind::IdentifierUse) {
            // plain assignment target is not a read; drop the node
        } else {
            e->lhs = std::move(lhs);
        }
        e->receiver_text = op;
        e->rhs = std::move(value);
        return e;
    }

    ExprPtr parse_ternary() {
        ExprPtr cond = parse_binary(0);
        if (!at_text("?")) return cond;
        int line = tok().line;
        bump();
        auto e = make_expr(ExprKind::Other, line, "?:");
        ExprPtr then_e = parse_expr();
        accept(":");
        ExprPtr else_e = parse_ternary();
        e->args.push_back(std::move(cond));
        e->args.push_back(std::move(then_e));
        e->args.push_back(std::move(else_e));
        return e;
    }

    int binary_prec(const Token& t) const {
        if (t.kind == TokenKind::Keyword && t.text == "instanceof") return 7;
        if (t.kind != TokenKind::Operator) return -1;
        const std::string& s = t.text;
        if (s == "->") return 0;
        if (s == "||") return 1;
        if (s == "&&") return 2;
        if (s == "|") return 3;
        if (s == "^") return 4;
        if (s == "&") return 5;
        if (s == "==" || s == "!=") return 6;
        if (s == "<" || s == ">" || s == "<=" || s == ">=") return 7;
        if (s == "<<" || s == ">>" || s == ">>>") return 8;
        if (s == "+" || s == "-") return 9;
        if (s == "*" || s == "/" || s == "%") return 10;
        return -1;
    }

    ExprPtr parse_binary(int min_prec) {
        ExprPtr lhs = parse_unary();
        while (true) {
            int prec = binary_prec(tok());
            if (prec < min_prec) return lhs;
            std::string op = tok().text;
            int line = tok().line;
            bump();
            if (op == "instanceof") {
                // right side is a type, not an expression
                auto rhs = make_expr(ExprKind::Other, cur_line());
                size_t probe = pos_;
                if (scan_type(probe)) {
                    rhs->text = "type";
                    consume_type();
                    if (at_ident()) bump(); // pattern binding
                }
                auto e = make_expr(ExprKind::BinaryOp, line, op);
                e->lhs = std::move(lhs);
                e->rhs = std::move(rhs);
                lhs = std::move(e);
                continue;
            }
            ExprPtr rhs = parse_binary(prec + 1);
            auto e = make_expr(ExprKind::BinaryOp, line, op);
            e->lhs = std::move(lhs);
            e->rhs = std::move(rhs);
            lhs = std::move(e);
        }
    }

    ExprPtr parse_unary() {
        DepthGuard guard(*this);
        if (!guard.ok) {
            int line = cur_line();
            bump();
            return make_expr(ExprKind::Other, line);
        }
        const Token& t = tok();
        if (t.kind == TokenKind::Operator &&
            (t.text == "+" || t.text == "-" || t.text == "!" || t.text == "~" || t.text == "++" ||
             t.text == "--")) {
            std::string op = t.text;
            int line = t.line;
            bump();
            ExprPtr operand = parse_unary();
            if (op == "-" && operand->kind == ExprKind::NumberLiteral &&
                !operand->text.empty() && operand->text[0] != '-') {
                operand->text = "-" + operand->text;
                operand->line = line;
                return operand;
            }
            if (op == "+" && operand->kind == ExprKind::NumberLiteral) return operand;
            auto e = make_expr(ExprKind::Unary, line, op);
            e->lhs = std::move(operand);
            return e;
        }
        if (t.text == "(" && is_cast()) {
            int line = t.line;
            bump();
            consume_type();
            accept(")");
            auto e = make_expr(ExprKind::Other, line, "cast");
            e->args.push_back(parse_unary());
            return e;
        }
        return parse_postfix();
    }

    bool is_cast() const {
        size_t i = pos_ + 1;
        size_t probe = i;
        if (!scan_type(probe)) return false;
        bool primitive = tok_at(i).kind == TokenKind::Keyword;
        if (text_at(probe) != ")") return false;
        const Token& after = tok_at(probe + 1);
        if (primitive) {
            return after.kind == TokenKind::Identifier || after.kind == TokenKind::Number ||
                   after.kind == TokenKind::String || after.kind == TokenKind::CharLit ||
                   after.text == "(" || after.text == "-" || after.text == "+" ||
                   after.text == "!" || after.text == "~" ||
                   (after.kind == TokenKind::Keyword &&
                    (after.text == "new" || after.text == "this" || after.text == "super" ||
                     after.text == "true" || after.text == "false" || after.text == "null"));
        }
        // reference cast: ambiguous with parenthesized expression; require an
        // operand that cannot continue a binary expression
        return after.kind == TokenKind::Identifier || after.kind == TokenKind::Number ||
               after.kind == TokenKind::String || after.kind == TokenKind::CharLit ||
               after.text == "(" || after.text == "!" || after.text == "~" ||
               (after.kind == TokenKind::Keyword &&
                (after.text == "new" || after.text == "this" || after.text == "super" ||
                 after.text == "true" || after.text == "false" || after.text == "null"));
    }

    ExprPtr parse_postfix() {
        ExprPtr e = parse_primary();
        while (!eof()) {
            if (at_text(".")) {
                int line = tok().line;
                bump();
                if (at_text("<")) skip_generics(); // explicit type args on calls
                if (!at_ident() && tok().kind != TokenKind::Keyword) break;
                std::string name = tok().text;
                bump();
                if (at_text("(")) {
                    auto call = make_expr(ExprKind::MethodCall, line, name);
                    call->receiver_text = printable(e.get());
                    call->lhs = std::move(e);
                    parse_args(call->args);
                    e = std::move(call);
                    if (at_text("{")) skip_balanced("{", "}"); // obj.new Inner(){...} tail
                } else {
                    auto fa = make_expr(ExprKind::FieldAccess, line, name);
                    fa->lhs = std::move(e);
                    e = std::move(fa);
                }
                continue;
            }
            if (at_text("(")) {
                int line = tok().line;
                if (e->kind == ExprKind::IdentifierUse) {
                    // bare call: the name is a method, not a variable read
                    auto call = make_expr(ExprKind::MethodCall, e->line, e->text);
                    parse_args(call->args);
                    e = std::move(call);
                } else if (e->kind == ExprKind::FieldAccess) {
                    auto call = make_expr(ExprKind::MethodCall, line, e->text);
                    call->receiver_text = printable(e->lhs.get());
                    call->lhs = std::move(e->lhs);
                    parse_args(call->args);
                    e = std::move(call);
                } else {
                    auto call = make_expr(ExprKind::MethodCall, line, "");
                    call->receiver_text = printable(e.get());
                    call->lhs = std::move(e);
                    parse_args(call->args);
                    e = std::move(call);
                }
                continue;
            }
            if (at_text("[")) {
                int line = tok().line;
                bump();
                auto idx = make_expr(ExprKind::Index, line);
                idx->lhs = std::move(e);
                if (!at_text("]")) idx->rhs = parse_expr();
                accept("]");
                e = std::move(idx);
                continue;
            }
            if (tok().kind == TokenKind::Operator && (at_text("++") || at_text("--"))) {
                auto u = make_expr(ExprKind::Unary, tok().line, tok().text);
                bump();
                u->lhs = std::move(e);
                e = std::move(u);
                continue;
            }
            if (at_text("::")) {
                int line = tok().line;
                bump();
                std::string name = at_ident() || tok().kind == TokenKind::Keyword ? tok().text : "";
                if (!name.empty()) bump();
                auto mr = make_expr(ExprKind::Other, line, "::" + name);
                mr->args.push_back(std::move(e));
                e = std::move(mr);
                continue;
            }
            break;
        }
        return e;
    }

    void parse_args(std::vector<ExprPtr>& out) {
        if (!accept("(")) return;
        while (!eof() && !at_text(")")) {
            size_t before = pos_;
            out.push_back(parse_expr());
            if (!accept(",") && !at_text(")")) {
                // garbled argument list; bail to the closing paren
                int start = cur_line();
                int depth = 0;
                while (!eof()) {
                    if (at_text("(")) ++depth;
                    else if (at_text(")")) {
                        if (depth == 0) break;
                        --depth;
                    } else if (at_text(";")) {
                        break;
                    }
                    bump();
                }
                error_at(start, cur_line(), "malformed argument list");
                break;
            }
            if (pos_ == before) bump();
        }
        accept(")");
    }

    ExprPtr parse_primary() {
        const Token& t = tok();
        int line = t.line;
        switch (t.kind) {
        case TokenKind::Number: {
            auto e = make_expr(ExprKind::NumberLiteral, line, t.text);
            bump();
            return e;
        }
        case TokenKind::String:
        case TokenKind::CharLit: {
            auto e = make_expr(ExprKind::Other, line, "literal");
            bump();
            return e;
        }
        case TokenKind::Identifier: {
            auto e = make_expr(ExprKind::IdentifierUse, line, t.text);
            bump();
            return e;
        }
        case TokenKind::Keyword: {
            if (t.text == "new") {
                bump();
                return parse_creation(line);
            }
            if (t.text == "this" || t.text == "super" || t.text == "true" || t.text == "false" ||
                t.text == "null" || t.text == "class") {
                auto e = make_expr(ExprKind::Other, line, t.text);
                bump();
                if ((e->text == "this" || e->text == "super") && at_text("(")) {
                    auto call = make_expr(ExprKind::MethodCall, line, e->text);
                    parse_args(call->args);
                    return call;
                }
                return e;
            }
            if (is_primitive_kw(t.text)) {
                // e.g. int.class, double[]::new
                auto e = make_expr(ExprKind::Other, line, t.text);
                bump();
                while (at_text("[") && at_text("]", 1)) {
                    bump();
                    bump();
                }
                return e;
            }
            if (t.text == "switch") {
                // switch expression: consume structurally
                bump();
                auto e = make_expr(ExprKind::Other, line, "switch");
                if (at_text("(")) {
                    accept("(");
                    e->args.push_back(parse_expr());
                    expect_closing(")");
                }
                if (at_text("{")) skip_balanced("{", "}");
                return e;
            }
            break;
        }
        case TokenKind::Operator:
        case TokenKind::Punct: {
            if (t.text == "(") {
                bump();
                if (at_text(")")) {
                    // empty parens: lambda parameter list
                    bump();
                    return make_expr(ExprKind::Other, line, "()");
                }
                ExprPtr inner = parse_expr();
                expect_closing(")");
                return inner;
            }
            if (t.text == "{") return parse_array_init();
            break;
        }
        default:
            break;
        }
        error_at(line, line, "unexpected token '" + t.text + "' in expression");
        // Closers and separators belong to an enclosing construct; leave them
        // in place so that construct still sees them. Every calling loop has a
        // no-progress guard, so refusing to consume here cannot hang.
        if (t.text != "}" && t.text != ")" && t.text != "]" && t.text != ";" && t.text != ",")
            bump();
        return make_expr(ExprKind::Other, line);
    }

    ExprPtr parse_creation(int line) {
        // type name
        std::string name;
        if (tok().kind == TokenKind::Keyword && is_primitive_kw(tok().text)) {
            name = tok().text;
            bump();
        } else if (at_ident()) {
            name = tok().text;
            bump();
            while (at_text(".") && at_ident(1)) {
                bump();
                name += ".";
                name += tok().text;
                bump();
            }
        }
        if (at_text("<")) skip_generics();
        auto e = make_expr(ExprKind::ObjectCreation, line, name);
        if (at_text("[")) {
            e->text += "[]";
            while (at_text("[")) {
                bump();
                if (!at_text("]")) e->args.push_back(parse_expr());
                accept("]");
            }
            if (at_text("{")) e->args.push_back(parse_array_init());
            return e;
        }
        parse_args(e->args);
        if (at_text("{")) skip_balanced("{", "}"); // anonymous class body: skipped subset
        return e;
    }
};

} // namespace detail

// Best-effort model; records unparseable spans in parse_errors and keeps
// going. `source` must be the same (sanitized) text the tokens come from.
inline SyntaxModel parse(const std::vector<Token>& tokens, std::string file_path,
                         std::string_view source) {
    return detail::Parser(tokens, std::move(file_path), source).run();
}

inline SyntaxModel parse_source(std::string file_path, std::string_view source) {
    std::string clean = sanitize_utf8(source);
    std::vector<Token> tokens = detail::Scanner(clean).run();
    return detail::Parser(tokens, std::move(file_path), clean).run();
}

} // namespace sobo
