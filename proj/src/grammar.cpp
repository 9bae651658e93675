#include "cfgrepair/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <fstream>
#include <optional>
#include <sstream>

namespace cfgrepair {

std::vector<std::size_t> Grammar::productions_of(const std::string& lhs) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < productions.size(); ++i)
        if (productions[i].lhs == lhs) out.push_back(i);
    return out;
}

std::string RankedSymbol::name() const {
    return "(" + sym + "," + std::to_string(rank) + ")";
}

GrammarError::GrammarError(const std::string& msg, std::size_t line, std::size_t column)
    : std::runtime_error(line ? msg + " at line " + std::to_string(line) + ", column " +
                                    std::to_string(column)
                              : msg),
      line_(line),
      column_(column) {}

bool is_valid_symbol_name(std::string_view s) {
    if (s.empty()) return false;
    auto c0 = static_cast<unsigned char>(s[0]);
    if (!(std::isalpha(c0) || c0 == '_')) return false;
    return std::all_of(s.begin() + 1, s.end(), [](char c) {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || u == '_';
    });
}

namespace {

struct Pos {
    std::size_t line;
    std::size_t col;
};

struct RawAlt {
    std::string lhs;
    std::vector<std::string> rhs;
    std::vector<Pos> rhs_pos;
    Pos pos;
    bool pass_through = false;
};

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace

Grammar parse_grammar(std::string_view text) {
    Grammar g;
    std::vector<RawAlt> alts;
    std::set<std::string> tokens;
    std::optional<Pos> start_pos;
    std::string start;

    enum class St { Idle, HaveLhs, InAlt };
    St st = St::Idle;
    RawAlt cur;
    std::string cur_lhs;
    Pos lhs_pos{0, 0};

    std::size_t line_no = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
        std::size_t end = text.find('\n', begin);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(begin, end - begin);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;

        std::size_t first = 0;
        while (first < line.size() && std::isspace(static_cast<unsigned char>(line[first]))) ++first;
        if (first < line.size() && line[first] == '%') {
            if (st != St::Idle)
                throw GrammarError("directive inside a production", line_no, first + 1);
            std::string_view body = line.substr(first);
            auto hash = body.find('#');
            if (hash != std::string_view::npos) body = body.substr(0, hash);
            std::istringstream in{std::string(body)};
            std::string directive;
            in >> directive;
            std::vector<std::string> names;
            for (std::string w; in >> w;) names.push_back(w);
            if (directive == "%start") {
                if (start_pos) throw GrammarError("duplicate %start", line_no, first + 1);
                if (names.size() != 1)
                    throw GrammarError("%start takes exactly one name", line_no, first + 1);
                if (!is_valid_symbol_name(names[0]))
                    throw GrammarError("invalid symbol name '" + names[0] + "'", line_no, first + 1);
                start = names[0];
                start_pos = Pos{line_no, first + 1};
            } else if (directive == "%token") {
                if (names.empty()) throw GrammarError("%token needs at least one name", line_no, first + 1);
                for (auto& n : names) {
                    if (!is_valid_symbol_name(n))
                        throw GrammarError("invalid symbol name '" + n + "'", line_no, first + 1);
                    tokens.insert(n);
                }
            } else {
                throw GrammarError("unknown directive '" + directive + "'", line_no, first + 1);
            }
        } else {
            bool touched_open = false;       // current alternative received symbols on this line
            std::optional<std::size_t> closed;  // alternative closed on this line
            std::size_t i = 0;
            while (i < line.size()) {
                char c = line[i];
                if (std::isspace(static_cast<unsigned char>(c))) {
                    ++i;
                    continue;
                }
                Pos p{line_no, i + 1};
                if (c == '#') {
                    if (trim(line.substr(i + 1)) == "pass-through") {
                        if (st == St::InAlt && touched_open)
                            cur.pass_through = true;
                        else if (closed)
                            alts[*closed].pass_through = true;
                        else
                            throw GrammarError("pass-through marker without a production", p.line, p.col);
                    }
                    break;
                }
                if (c == ':') {
                    if (st != St::HaveLhs) throw GrammarError("unexpected ':'", p.line, p.col);
                    cur = RawAlt{cur_lhs, {}, {}, p, false};
                    st = St::InAlt;
                    touched_open = true;
                    ++i;
                } else if (c == '|' || c == ';') {
                    if (st != St::InAlt)
                        throw GrammarError(std::string("unexpected '") + c + "'", p.line, p.col);
                    alts.push_back(cur);
                    closed = alts.size() - 1;
                    touched_open = false;
                    if (c == '|') {
                        cur = RawAlt{cur_lhs, {}, {}, p, false};
                        touched_open = true;
                    } else {
                        st = St::Idle;
                    }
                    ++i;
                } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                    std::size_t j = i;
                    while (j < line.size() &&
                           (std::isalnum(static_cast<unsigned char>(line[j])) || line[j] == '_'))
                        ++j;
                    std::string name(line.substr(i, j - i));
                    if (st == St::Idle) {
                        cur_lhs = name;
                        lhs_pos = p;
                        st = St::HaveLhs;
                    } else if (st == St::InAlt) {
                        cur.rhs.push_back(name);
                        cur.rhs_pos.push_back(p);
                        touched_open = true;
                    } else {
                        throw GrammarError("expected ':' after '" + cur_lhs + "'", p.line, p.col);
                    }
                    i = j;
                } else {
                    throw GrammarError(std::string("unexpected character '") + c + "'", p.line, p.col);
                }
            }
        }
        if (end == text.size()) break;
        begin = end + 1;
    }
    if (st == St::HaveLhs) throw GrammarError("expected ':' after '" + cur_lhs + "'", lhs_pos.line, lhs_pos.col);
    if (st == St::InAlt) throw GrammarError("unterminated production for '" + cur_lhs + "'", cur.pos.line, cur.pos.col);
    if (!start_pos) throw GrammarError("missing %start");

    for (auto& a : alts) g.nonterminals.insert(a.lhs);
    g.terminals = tokens;
    g.start = start;
    for (auto& t : tokens)
        if (g.nonterminals.count(t))
            throw GrammarError("symbol '" + t + "' is both a token and a nonterminal");
    if (!g.nonterminals.count(start))
        throw GrammarError("start symbol '" + start + "' has no productions", start_pos->line, start_pos->col);
    for (auto& a : alts) {
        for (std::size_t k = 0; k < a.rhs.size(); ++k)
            if (!g.nonterminals.count(a.rhs[k]) && !tokens.count(a.rhs[k]))
                throw GrammarError("undeclared symbol '" + a.rhs[k] + "'", a.rhs_pos[k].line, a.rhs_pos[k].col);
        Production p{a.lhs, a.rhs, a.pass_through};
        if (p.pass_through && (p.rhs.size() != 1 || !g.nonterminals.count(p.rhs[0])))
            throw GrammarError("pass-through production must have a single nonterminal", a.pos.line, a.pos.col);
        for (auto& q : g.productions)
            if (q.lhs == p.lhs && q.rhs == p.rhs)
                throw GrammarError("duplicate production for '" + p.lhs + "'", a.pos.line, a.pos.col);
        g.productions.push_back(std::move(p));
    }
    return g;
}

Grammar load_grammar(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw GrammarError("cannot read grammar file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_grammar(ss.str());
}

void validate_grammar(const Grammar& g) {
    if (!g.nonterminals.count(g.start)) throw GrammarError("start symbol is not a nonterminal");
    for (auto& t : g.terminals) {
        if (g.nonterminals.count(t)) throw GrammarError("symbol '" + t + "' is both a token and a nonterminal");
        if (!is_valid_symbol_name(t)) throw GrammarError("invalid symbol name '" + t + "'");
    }
    std::set<std::string> lhs;
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
        auto& p = g.productions[i];
        if (!g.nonterminals.count(p.lhs)) throw GrammarError("lhs '" + p.lhs + "' is not a nonterminal");
        lhs.insert(p.lhs);
        for (auto& s : p.rhs)
            if (!g.nonterminals.count(s) && !g.terminals.count(s))
                throw GrammarError("undeclared symbol '" + s + "'");
        if (p.pass_through && (p.rhs.size() != 1 || !g.nonterminals.count(p.rhs[0])))
            throw GrammarError("pass-through production must have a single nonterminal");
        for (std::size_t j = 0; j < i; ++j)
            if (g.productions[j].lhs == p.lhs && g.productions[j].rhs == p.rhs)
                throw GrammarError("duplicate production for '" + p.lhs + "'");
    }
    for (auto& n : g.nonterminals) {
        if (!is_valid_symbol_name(n)) throw GrammarError("invalid symbol name '" + n + "'");
        if (!lhs.count(n)) throw GrammarError("nonterminal '" + n + "' has no productions");
    }
}

std::string serialize_grammar(const Grammar& g) {
    std::ostringstream out;
    out << "%start " << g.start << "\n";
    if (!g.terminals.empty()) {
        out << "%token";
        for (auto& t : g.terminals) out << ' ' << t;
        out << "\n";
    }
    out << "\n";
    for (auto& p : g.productions) {
        out << p.lhs << " :";
        for (auto& s : p.rhs) out << ' ' << s;
        out << " ;";
        if (p.pass_through) out << " # pass-through";
        out << "\n";
    }
    return out.str();
}

std::vector<RankedSymbol> ranked_alphabet(const Grammar& g) {
    std::vector<RankedSymbol> out;
    std::map<std::pair<std::string, std::size_t>, std::size_t> seen;
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
        auto& p = g.productions[i];
        std::string base;
        if (p.pass_through) {
            base = kEpsilon;
        } else {
            base = kDelta;
            for (auto& s : p.rhs)
                if (g.is_terminal(s)) {
                    base = s;
                    break;
                }
        }
        std::size_t k = seen[{base, p.rhs.size()}]++;
        std::string sym = k == 0 ? base : base + "#" + std::to_string(k);
        out.push_back(RankedSymbol{sym, p.rhs.size(), i});
    }
    return out;
}

std::map<std::string, RankedSymbol> symbol_table(const Grammar& g) {
    std::map<std::string, RankedSymbol> out;
    for (auto& s : ranked_alphabet(g)) out.emplace(s.name(), s);
    return out;
}

std::set<std::string> pass_through_closure(const Grammar& g, const std::string& nt) {
    std::set<std::string> seen{nt};
    std::deque<std::string> work{nt};
    while (!work.empty()) {
        auto x = work.front();
        work.pop_front();
        for (auto& p : g.productions)
            if (p.pass_through && p.lhs == x && seen.insert(p.rhs[0]).second) work.push_back(p.rhs[0]);
    }
    return seen;
}

std::set<std::string> productive_nonterminals(const Grammar& g) {
    std::set<std::string> prod;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& p : g.productions) {
            if (prod.count(p.lhs)) continue;
            bool ok = std::all_of(p.rhs.begin(), p.rhs.end(),
                                  [&](const std::string& s) { return g.is_terminal(s) || prod.count(s); });
            if (ok) {
                prod.insert(p.lhs);
                changed = true;
            }
        }
    }
    return prod;
}

std::set<std::string> reachable_nonterminals(const Grammar& g) {
    std::set<std::string> seen{g.start};
    std::deque<std::string> work{g.start};
    while (!work.empty()) {
        auto x = work.front();
        work.pop_front();
        for (auto& p : g.productions)
            if (p.lhs == x)
                for (auto& s : p.rhs)
                    if (g.is_nonterminal(s) && seen.insert(s).second) work.push_back(s);
    }
    return seen;
}

bool is_trivial_production(const Grammar& g, std::size_t prod) {
    auto single_terminal = [&](const Production& p) {
        return !p.pass_through && p.rhs.size() == 1 && g.is_terminal(p.rhs[0]);
    };
    const auto& p = g.productions.at(prod);
    if (p.lhs == g.start || !single_terminal(p)) return false;
    for (auto& q : g.productions)
        if (q.lhs == p.lhs && !single_terminal(q)) return false;
    return true;
}

}  // namespace cfgrepair
