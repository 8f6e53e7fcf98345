#include "qmt/script.hpp"

#include <cctype>
#include <sstream>

namespace qmt {

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1, col = 1;

    void advance() {
        if (pos >= text.size()) return;
        if (text[pos] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++pos;
    }
    void skip_ws_and_comments() {
        while (pos < text.size()) {
            if (std::isspace(static_cast<unsigned char>(text[pos]))) advance();
            else if (text[pos] == '#') {
                while (pos < text.size() && text[pos] != '\n') advance();
            } else {
                break;
            }
        }
    }
    bool eof() {
        skip_ws_and_comments();
        return pos >= text.size();
    }
};

struct RawStatement {
    std::string text;
    int line, col;
};

std::vector<RawStatement> split_statements(const std::string& text) {
    Cursor c{text};
    std::vector<RawStatement> out;
    while (!c.eof()) {
        RawStatement st;
        st.line = c.line;
        st.col = c.col;
        std::string body;
        bool terminated = false;
        while (c.pos < c.text.size()) {
            char ch = c.text[c.pos];
            if (ch == '#') {
                while (c.pos < c.text.size() && c.text[c.pos] != '\n') c.advance();
                continue;
            }
            if (ch == ';') {
                c.advance();
                terminated = true;
                break;
            }
            body.push_back(ch == '\n' ? ' ' : ch);
            c.advance();
        }
        if (!terminated && body.find_first_not_of(' ') != std::string::npos)
            throw script_error("missing ';' at end of statement", st.line, st.col);
        st.text = body;
        if (body.find_first_not_of(' ') != std::string::npos) out.push_back(std::move(st));
    }
    return out;
}

// Tokens within one statement.
struct StmtLexer {
    std::string s;
    std::size_t pos = 0;
    int line, col0;

    void skip() {
        while (pos < s.size() && s[pos] == ' ') ++pos;
    }
    bool eof() {
        skip();
        return pos >= s.size();
    }
    [[noreturn]] void fail(const std::string& msg) {
        throw script_error(msg, line, col0 + static_cast<int>(pos));
    }
    std::string word() {
        skip();
        std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
            ++pos;
        if (pos == start) fail("expected an identifier");
        return s.substr(start, pos - start);
    }
    bool accept(char ch) {
        skip();
        if (pos < s.size() && s[pos] == ch) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char ch, const std::string& what) {
        if (!accept(ch)) fail("expected '" + std::string(1, ch) + "' " + what);
    }
    bool accept_word(const std::string& w) {
        skip();
        if (s.compare(pos, w.size(), w) == 0) {
            std::size_t end = pos + w.size();
            if (end >= s.size() || !(std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_')) {
                pos = end;
                return true;
            }
        }
        return false;
    }
    Rational rational(const std::string& what) {
        skip();
        std::size_t start = pos;
        if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
        while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '/'))
            ++pos;
        auto q = parse_rational(s.substr(start, pos - start));
        if (!q) fail("expected a rational for " + what);
        return *q;
    }
    int integer(const std::string& what) {
        Rational q = rational(what);
        if (q.get_den() != 1) fail(what + " must be an integer");
        return static_cast<int>(q.get_num().get_si());
    }
    // Text up to a top-level occurrence of one of the given single-char
    // delimiters (parentheses tracked), used for polynomial payloads.
    std::string until(const std::string& delims) {
        skip();
        int depth = 0;
        std::size_t start = pos;
        while (pos < s.size()) {
            char ch = s[pos];
            if (ch == '(') ++depth;
            if (ch == ')') {
                if (depth == 0) break;
                --depth;
            }
            if (depth == 0 && delims.find(ch) != std::string::npos) break;
            ++pos;
        }
        return s.substr(start, pos - start);
    }
};

}  // namespace

ProblemScript parse_script(const std::string& text) {
    ProblemScript script;
    bool have_domain = false;
    bool tower_started = false;
    std::vector<std::string>& names = script.symbol_names;

    auto parse_expr = [&](StmtLexer& lx, const std::string& raw) {
        try {
            return parse_polynomial(raw, names);
        } catch (const std::exception& e) {
            throw script_error(e.what(), lx.line, lx.col0);
        }
    };

    auto raws = split_statements(text);
    if (raws.empty()) throw script_error("expected domain", 1, 1);

    for (const auto& raw : raws) {
        StmtLexer lx{raw.text, 0, raw.line, raw.col};
        Statement st;
        st.line = raw.line;
        st.col = raw.col;
        std::string head = lx.word();

        if (head == "domain") {
            if (have_domain) lx.fail("duplicate domain statement");
            st.kind = Statement::Kind::Domain;
            if (lx.accept('(')) {
                do {
                    st.var_names.push_back(lx.word());
                } while (lx.accept(','));
                lx.expect(')', "after variable list");
            } else {
                st.var_names.push_back(lx.word());
            }
            for (const auto& n : st.var_names) {
                for (const auto& seen : names)
                    if (seen == n) lx.fail("duplicate symbol '" + n + "'");
                names.push_back(n);
            }
            if (!lx.accept_word("in")) lx.fail("expected 'in'");
            for (std::size_t i = 0; i < st.var_names.size(); ++i) {
                if (i > 0) lx.expect('x', "between box intervals");
                if (lx.accept_word("R")) {
                    st.ranges.push_back(std::nullopt);
                } else {
                    lx.expect('[', "to open an interval");
                    Rational lo = lx.rational("interval bound");
                    lx.expect(',', "in the interval");
                    Rational hi = lx.rational("interval bound");
                    lx.expect(']', "to close the interval");
                    st.ranges.emplace_back(std::make_pair(lo, hi));
                }
            }
            if (lx.accept_word("sample_box")) {
                lx.expect('=', "after sample_box");
                std::vector<std::pair<Rational, Rational>> box;
                for (std::size_t i = 0; i < st.var_names.size(); ++i) {
                    if (i > 0) lx.expect('x', "between box intervals");
                    lx.expect('[', "to open an interval");
                    Rational lo = lx.rational("interval bound");
                    lx.expect(',', "in the interval");
                    Rational hi = lx.rational("interval bound");
                    lx.expect(']', "to close the interval");
                    box.emplace_back(lo, hi);
                }
                st.sample_box = std::move(box);
            }
            have_domain = true;
        } else if (!have_domain) {
            lx.fail("expected domain");
        } else if (head == "base_gen") {
            if (tower_started) lx.fail("base_gen must precede adjunctions");
            st.kind = Statement::Kind::BaseGen;
            st.exprs.push_back(parse_expr(lx, lx.until(";")));
        } else if (head == "ball_bound") {
            if (tower_started) lx.fail("ball_bound must precede adjunctions");
            st.kind = Statement::Kind::BallBound;
            st.rat_arg = lx.rational("ball bound");
        } else if (head == "adjoin") {
            st.kind = Statement::Kind::Adjoin;
            tower_started = true;
            st.name = lx.word();
            for (const auto& seen : names)
                if (seen == st.name) lx.fail("duplicate symbol '" + st.name + "'");
            lx.expect('=', "after the new symbol");
            std::string kind = lx.word();
            lx.expect('(', "after the adjunction kind");
            if (kind == "oddroot" || kind == "evenroot") {
                st.adjoin_kind = kind == "oddroot" ? SymbolKind::OddRoot : SymbolKind::EvenRoot;
                st.exprs.push_back(parse_expr(lx, lx.until(",")));
                lx.expect(',', "before the root exponent");
                st.int_arg = lx.integer("root exponent");
                lx.expect(')', "to close the adjunction");
            } else if (kind == "recip") {
                st.adjoin_kind = SymbolKind::Reciprocal;
                st.exprs.push_back(parse_expr(lx, lx.until(")")));
                lx.expect(')', "to close the adjunction");
                if (lx.accept_word("bound")) {
                    lx.expect('=', "after bound");
                    st.rat_arg = lx.rational("bound");
                }
            } else if (kind == "piecewise") {
                st.adjoin_kind = SymbolKind::Piecewise;
                st.exprs.push_back(parse_expr(lx, lx.until(",")));
                lx.expect(',', "between piecewise arguments");
                st.exprs.push_back(parse_expr(lx, lx.until(",")));
                lx.expect(',', "between piecewise arguments");
                st.exprs.push_back(parse_expr(lx, lx.until(")")));
                lx.expect(')', "to close the adjunction");
                if (!lx.accept_word("mode")) lx.fail("piecewise needs mode=exact|closure");
                lx.expect('=', "after mode");
                st.mode_arg = lx.word();
                if (st.mode_arg != "exact" && st.mode_arg != "closure")
                    lx.fail("piecewise mode must be exact or closure");
            } else if (kind == "chi") {
                st.adjoin_kind = SymbolKind::Characteristic;
                st.exprs.push_back(parse_expr(lx, lx.until(")")));
                lx.expect(')', "to close the adjunction");
                if (!lx.accept_word("mode")) lx.fail("chi needs mode=compact|closure");
                lx.expect('=', "after mode");
                st.mode_arg = lx.word();
                if (st.mode_arg != "compact" && st.mode_arg != "closure")
                    lx.fail("chi mode must be compact or closure");
            } else if (kind == "poly") {
                st.adjoin_kind = SymbolKind::BasePoly;
                st.exprs.push_back(parse_expr(lx, lx.until(")")));
                lx.expect(')', "to close the adjunction");
            } else {
                lx.fail("unknown adjunction kind '" + kind + "'");
            }
            if (lx.accept_word("force")) st.flag = true;
            names.push_back(st.name);
        } else if (head == "add_gen") {
            st.kind = Statement::Kind::AddGen;
            tower_started = true;
            std::string expr = lx.until(";");
            // Optional trailing 'nonneg' keyword.
            std::size_t kw = expr.rfind(" nonneg");
            if (kw != std::string::npos && expr.find_first_not_of(' ', kw + 7) == std::string::npos) {
                st.flag = true;
                expr = expr.substr(0, kw);
            }
            st.exprs.push_back(parse_expr(lx, expr));
        } else if (head == "hide") {
            st.kind = Statement::Kind::Hide;
            tower_started = true;
            st.name = lx.word();
            bool known = false;
            for (const auto& seen : names) known = known || seen == st.name;
            if (!known) lx.fail("unknown symbol '" + st.name + "'");
        } else if (head == "exclude") {
            st.kind = Statement::Kind::Exclude;
            tower_started = true;
            lx.expect('(', "to open the point");
            do {
                st.point.push_back(lx.rational("point coordinate"));
            } while (lx.accept(','));
            lx.expect(')', "to close the point");
            if (!lx.accept_word("eps")) lx.fail("exclude needs eps=");
            lx.expect('=', "after eps");
            st.rat_arg = lx.rational("eps");
        } else if (head == "explore") {
            st.kind = Statement::Kind::Explore;
            tower_started = true;
            while (!lx.eof()) {
                if (lx.accept_word("samples")) {
                    lx.expect('=', "after samples");
                    st.samples = lx.integer("samples");
                } else if (lx.accept_word("delta")) {
                    lx.expect('=', "after delta");
                    st.delta = lx.rational("delta");
                } else if (lx.accept_word("seed")) {
                    lx.expect('=', "after seed");
                    st.seed = static_cast<std::uint64_t>(lx.integer("seed"));
                } else {
                    lx.fail("unknown explore option");
                }
            }
        } else if (head == "certify") {
            st.kind = Statement::Kind::Certify;
            tower_started = true;
            std::string expr = lx.until(";");
            std::size_t at = expr.find(" eps=");
            if (at == std::string::npos) lx.fail("certify needs eps=");
            std::string tail = expr.substr(at);
            expr = expr.substr(0, at);
            st.exprs.push_back(parse_expr(lx, expr));
            StmtLexer tl{tail, 0, raw.line, raw.col};
            if (!tl.accept_word("eps")) tl.fail("certify needs eps=");
            tl.expect('=', "after eps");
            st.rat_arg = tl.rational("eps");
            if (!tl.accept_word("dmax")) tl.fail("certify needs dmax=");
            tl.expect('=', "after dmax");
            st.int_arg = tl.integer("dmax");
        } else if (head == "report") {
            st.kind = Statement::Kind::Report;
        } else {
            lx.fail("unknown statement '" + head + "'");
        }
        if (!lx.eof()) lx.fail("unexpected trailing input");
        script.statements.push_back(std::move(st));
    }
    return script;
}

namespace {

std::string range_text(const std::optional<std::pair<Rational, Rational>>& r) {
    if (!r) return "R";
    return "[" + to_string(r->first) + ", " + to_string(r->second) + "]";
}

}  // namespace

std::string print_script(const ProblemScript& script) {
    std::ostringstream out;
    std::vector<std::string> names;
    for (const auto& st : script.statements) {
        switch (st.kind) {
            case Statement::Kind::Domain: {
                out << "domain ";
                if (st.var_names.size() > 1) {
                    out << "(";
                    for (std::size_t i = 0; i < st.var_names.size(); ++i)
                        out << (i ? ", " : "") << st.var_names[i];
                    out << ")";
                } else {
                    out << st.var_names[0];
                }
                out << " in ";
                for (std::size_t i = 0; i < st.ranges.size(); ++i)
                    out << (i ? "x" : "") << range_text(st.ranges[i]);
                if (st.sample_box) {
                    out << " sample_box=";
                    for (std::size_t i = 0; i < st.sample_box->size(); ++i)
                        out << (i ? "x" : "")
                            << range_text(std::make_optional((*st.sample_box)[i]));
                }
                for (const auto& n : st.var_names) names.push_back(n);
                break;
            }
            case Statement::Kind::BaseGen:
                out << "base_gen " << to_string(st.exprs[0], names);
                break;
            case Statement::Kind::BallBound:
                out << "ball_bound " << to_string(*st.rat_arg);
                break;
            case Statement::Kind::Adjoin: {
                out << "adjoin " << st.name << " = ";
                switch (st.adjoin_kind) {
                    case SymbolKind::OddRoot:
                        out << "oddroot(" << to_string(st.exprs[0], names) << ", " << st.int_arg
                            << ")";
                        break;
                    case SymbolKind::EvenRoot:
                        out << "evenroot(" << to_string(st.exprs[0], names) << ", " << st.int_arg
                            << ")";
                        break;
                    case SymbolKind::Reciprocal:
                        out << "recip(" << to_string(st.exprs[0], names) << ")";
                        if (st.rat_arg) out << " bound=" << to_string(*st.rat_arg);
                        break;
                    case SymbolKind::Piecewise:
                        out << "piecewise(" << to_string(st.exprs[0], names) << ", "
                            << to_string(st.exprs[1], names) << ", "
                            << to_string(st.exprs[2], names) << ") mode=" << st.mode_arg;
                        break;
                    case SymbolKind::Characteristic:
                        out << "chi(" << to_string(st.exprs[0], names) << ") mode=" << st.mode_arg;
                        break;
                    default:
                        out << "poly(" << to_string(st.exprs[0], names) << ")";
                        break;
                }
                if (st.flag) out << " force";
                names.push_back(st.name);
                break;
            }
            case Statement::Kind::AddGen:
                out << "add_gen " << to_string(st.exprs[0], names);
                if (st.flag) out << " nonneg";
                break;
            case Statement::Kind::Hide:
                out << "hide " << st.name;
                break;
            case Statement::Kind::Exclude: {
                out << "exclude (";
                for (std::size_t i = 0; i < st.point.size(); ++i)
                    out << (i ? ", " : "") << to_string(st.point[i]);
                out << ") eps=" << to_string(*st.rat_arg);
                break;
            }
            case Statement::Kind::Explore:
                out << "explore";
                if (st.samples) out << " samples=" << *st.samples;
                if (st.delta) out << " delta=" << to_string(*st.delta);
                if (st.seed) out << " seed=" << *st.seed;
                break;
            case Statement::Kind::Certify:
                out << "certify " << to_string(st.exprs[0], names)
                    << " eps=" << to_string(*st.rat_arg) << " dmax=" << st.int_arg;
                break;
            case Statement::Kind::Report:
                out << "report";
                break;
        }
        out << ";\n";
    }
    return out.str();
}

}  // namespace qmt
