#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cfgrepair/grammar.hpp"
#include "cfgrepair/intersection.hpp"
#include "cfgrepair/learning.hpp"
#include "cfgrepair/lr1.hpp"
#include "cfgrepair/session.hpp"
#include "cfgrepair/tree_automaton.hpp"
#include "cfgrepair/tree_examples.hpp"

namespace testsupport {

using namespace cfgrepair;

inline std::string grammar_path(const std::string& name) { return std::string(GRAMMAR_DIR) + "/" + name; }
inline Grammar grammar(const std::string& name) { return load_grammar(grammar_path(name)); }

inline std::vector<std::string> benchmark_names() {
    return {"stmt_expr.cfg", "cycle.cfg", "trivial.cfg", "nullable.cfg", "threeway.cfg", "if_star.cfg", "if_expr.cfg"};
}

/// "(SYM,n)" -> ranked symbol of g.
inline RankedSymbol sym(const Grammar& g, const std::string& name) { return symbol_table(g).at(name); }

inline OrderedSymbol os(const Grammar& g, const std::string& name, std::size_t order) {
    return {sym(g, name), order};
}

/// Transitions written as "target <- (SYM,n) child child ..."; children found in `states` are states.
inline Transition parse_transition(const std::string& line, const std::set<std::string>& states) {
    std::istringstream in(line);
    Transition t;
    std::string arrow, label;
    in >> t.target >> arrow >> label;
    auto comma = label.rfind(',');
    t.label.sym = label.substr(1, comma - 1);
    t.label.rank = std::stoul(label.substr(comma + 1, label.size() - comma - 2));
    std::string c;
    while (in >> c) t.children.push_back(states.count(c) ? Child::state(c) : Child::terminal(c));
    return t;
}

inline TreeAutomaton make_automaton(const std::set<std::string>& states, const std::string& final_state,
                                    const std::set<std::string>& terminals, const std::vector<std::string>& lines) {
    TreeAutomaton a;
    a.states = states;
    a.finals = {final_state};
    a.terminals = terminals;
    for (auto& l : lines) {
        auto t = parse_transition(l, states);
        a.alphabet.insert(t.label);
        a.add(t);
    }
    return a;
}

inline const std::set<std::string> kStmtExprTerminals = {"SEMI", "IF",     "THEN", "ELSE", "PLUS", "STAR", "INT",
                                                     "LPAREN", "RPAREN", "TINT", "EQ",  "IDENT"};

/// Automaton of stmt_expr.cfg.
inline TreeAutomaton grammar_automaton_golden() {
    return make_automaton({"stmt", "decl", "expr", "ident"}, "stmt", kStmtExprTerminals,
                          {"stmt <- (SEMI,2) decl SEMI", "stmt <- (IF,4) IF expr THEN stmt",
                           "stmt <- (IF,6) IF expr THEN stmt ELSE stmt", "decl <- (TINT,4) TINT ident EQ expr",
                           "ident <- (IDENT,1) IDENT", "expr <- (PLUS,3) expr PLUS expr",
                           "expr <- (STAR,3) expr STAR expr", "expr <- (INT,1) INT",
                           "expr <- (LPAREN,3) LPAREN expr RPAREN", "expr <- (δ,1) ident"});
}

/// The 23 printed transitions of the learned automaton (TINT rule at e2 read as TINT ident EQ e2).
inline std::vector<std::string> learned_lines_golden() {
    return {"e0 <- (IF,4) IF e0 THEN e0",       "e0 <- (SEMI,2) e0 SEMI",
            "e0 <- (ε,1) e1",                   "e1 <- (IF,6) IF e1 THEN e1 ELSE e1",
            "e1 <- (SEMI,2) e1 SEMI",           "e1 <- (ε,1) e2",
            "e2 <- (PLUS,3) e2 PLUS e3",        "e2 <- (TINT,4) TINT ident EQ e2",
            "e2 <- (INT,1) INT",                "e2 <- (LPAREN,3) LPAREN e2 RPAREN",
            "e2 <- (δ,1) ident",                "e2 <- (ε,1) e3",
            "e3 <- (STAR,3) e3 STAR e4",        "e3 <- (TINT,4) TINT ident EQ e3",
            "e3 <- (INT,1) INT",                "e3 <- (LPAREN,3) LPAREN e3 RPAREN",
            "e3 <- (δ,1) ident",                "e3 <- (ε,1) e4",
            "e4 <- (TINT,4) TINT ident EQ e4",  "e4 <- (INT,1) INT",
            "e4 <- (LPAREN,3) LPAREN e4 RPAREN", "e4 <- (δ,1) ident",
            "ident <- (IDENT,1) IDENT"};
}

/// The printed transitions plus the two cycle transitions back to the expression root level.
inline TreeAutomaton learned_automaton_golden() {
    auto lines = learned_lines_golden();
    lines.push_back("e4 <- (LPAREN,3) LPAREN e2 RPAREN");
    lines.push_back("e4 <- (TINT,4) TINT ident EQ e2");
    return make_automaton({"e0", "e1", "e2", "e3", "e4", "ident"}, "e0", kStmtExprTerminals, lines);
}

/// Repaired automaton for the left-associative answers (δ on expr2 <- ident).
inline TreeAutomaton repaired_automaton_golden() {
    return make_automaton(
        {"stmt0", "stmt1", "expr0", "expr1", "expr2", "ident", "decl"}, "stmt0", kStmtExprTerminals,
        {"stmt0 <- (IF,4) IF expr0 THEN stmt0", "stmt0 <- (ε,1) stmt1", "stmt1 <- (SEMI,2) decl SEMI",
         "stmt1 <- (IF,6) IF expr0 THEN stmt1 ELSE stmt1", "decl <- (TINT,4) TINT ident EQ expr0",
         "ident <- (IDENT,1) IDENT", "expr0 <- (PLUS,3) expr0 PLUS expr1", "expr0 <- (ε,1) expr1",
         "expr1 <- (STAR,3) expr1 STAR expr2", "expr1 <- (ε,1) expr2", "expr2 <- (INT,1) INT",
         "expr2 <- (δ,1) ident", "expr2 <- (LPAREN,3) LPAREN expr0 RPAREN"});
}

/// Structural equality up to a bijective renaming of states, found by backtracking.
inline bool isomorphic(const TreeAutomaton& a, const TreeAutomaton& b) {
    if (a.states.size() != b.states.size() || a.transitions.size() != b.transitions.size() ||
        a.finals.size() != b.finals.size() || a.terminals != b.terminals)
        return false;
    std::vector<std::string> qa(a.states.begin(), a.states.end());
    std::map<std::string, std::string> map;
    std::set<std::string> used;
    auto tb = b.transition_set();
    auto consistent = [&]() {
        for (auto& t : a.transitions) {
            if (!map.count(t.target)) continue;
            bool full = std::all_of(t.children.begin(), t.children.end(),
                                    [&](const Child& c) { return !c.is_state || map.count(c.name); });
            if (!full) continue;
            Transition r = t;
            r.target = map.at(t.target);
            for (auto& c : r.children)
                if (c.is_state) c.name = map.at(c.name);
            if (!tb.count(r)) return false;
        }
        return true;
    };
    std::function<bool(std::size_t)> go = [&](std::size_t i) {
        if (i == qa.size()) {
            std::set<std::string> fa;
            for (auto& f : a.finals) fa.insert(map.at(f));
            return fa == b.finals;
        }
        for (auto& q : b.states) {
            if (used.count(q)) continue;
            map[qa[i]] = q;
            used.insert(q);
            if (consistent() && go(i + 1)) return true;
            used.erase(q);
            map.erase(qa[i]);
        }
        return false;
    };
    return go(0);
}

/// Bottom-up exploration of tree signatures up to a depth: root label, reachable states per automaton,
/// forbidden-match flag. Trees with equal signatures are interchangeable as subtrees.
class Explorer {
public:
    struct Sig {
        Label label;
        std::vector<std::set<std::string>> states;
        bool forbidden = false;

        auto operator<=>(const Sig&) const = default;
    };

    /// generator: index of the automaton whose trees form the universe; npos keeps any tree some automaton can run on.
    Explorer(std::vector<const TreeAutomaton*> autos, std::vector<TreeExample> forbidden = {},
             std::size_t generator = static_cast<std::size_t>(-1))
        : autos_(std::move(autos)), forbidden_(std::move(forbidden)), generator_(generator) {
        for (auto* a : autos_) {
            std::map<std::string, std::set<std::string>> up;
            for (auto& q : a->states) up[q] = epsilon_coclosure(*a, q);
            up_.push_back(std::move(up));
            for (auto& t : a->transitions)
                if (!t.label.is_epsilon()) shapes_.insert(shape_of(t));
        }
    }

    /// All signatures of trees with depth <= depth.
    const std::set<Sig>& run(std::size_t depth) {
        std::set<Sig> fresh;
        for (std::size_t d = levels_; d < depth; ++d) {
            std::set<Sig> next;
            for (auto& sh : shapes_) expand(sh, next);
            fresh.clear();
            for (auto& s : next)
                if (all_.insert(s).second) fresh.insert(s);
            newest_ = fresh;
            ++levels_;
            if (fresh.empty()) break;
        }
        return all_;
    }

    bool accepted(const Sig& s, std::size_t automaton) const {
        for (auto& f : autos_[automaton]->finals)
            if (s.states[automaton].count(f)) return true;
        return false;
    }

    static Sig signature_of(const Tree& t, const std::vector<const TreeAutomaton*>& autos,
                            const std::vector<TreeExample>& forbidden) {
        Sig s;
        s.label = t->label;
        for (auto* a : autos) s.states.push_back(run_states(*a, t));
        s.forbidden = std::any_of(forbidden.begin(), forbidden.end(),
                                  [&](const TreeExample& e) { return matches_forbidden(t, e); });
        return s;
    }

private:
    struct Shape {
        Label label;
        std::vector<std::optional<std::string>> slots;  // terminal, or nullopt for a subtree

        auto operator<=>(const Shape&) const = default;
    };

    static Shape shape_of(const Transition& t) {
        Shape s{t.label, {}};
        for (auto& c : t.children) s.slots.push_back(c.is_state ? std::nullopt : std::optional<std::string>(c.name));
        return s;
    }

    bool live(const Sig& s) const {
        if (generator_ != static_cast<std::size_t>(-1)) return !s.states[generator_].empty();
        return std::any_of(s.states.begin(), s.states.end(), [](auto& x) { return !x.empty(); });
    }

    Sig build(const Shape& sh, const std::vector<const Sig*>& kids) const {
        Sig out;
        out.label = sh.label;
        for (std::size_t i = 0; i < autos_.size(); ++i) {
            std::set<std::string> st;
            for (auto& t : autos_[i]->transitions) {
                if (t.label != sh.label || t.children.size() != sh.slots.size()) continue;
                bool ok = true;
                std::size_t k = 0;
                for (std::size_t j = 0; ok && j < sh.slots.size(); ++j) {
                    if (sh.slots[j]) ok = !t.children[j].is_state && t.children[j].name == *sh.slots[j];
                    else ok = t.children[j].is_state && kids[k++]->states[i].count(t.children[j].name);
                }
                if (ok) {
                    auto& u = up_[i].at(t.target);
                    st.insert(u.begin(), u.end());
                }
            }
            out.states.push_back(std::move(st));
        }
        out.forbidden = std::any_of(kids.begin(), kids.end(), [](const Sig* k) { return k->forbidden; });
        for (auto& e : forbidden_) {
            if (out.forbidden) break;
            if (Label::of(e.top) != sh.label) continue;
            if (e.kind == ExampleKind::associativity) {
                if (e.idx < sh.slots.size() && !sh.slots[e.idx]) {
                    std::size_t k = 0;
                    for (std::size_t j = 0; j < e.idx; ++j)
                        if (!sh.slots[j]) ++k;
                    out.forbidden = kids[k]->label == Label::of(e.bottom);
                }
            } else {
                out.forbidden = std::any_of(kids.begin(), kids.end(),
                                            [&](const Sig* k) { return k->label == Label::of(e.bottom); });
            }
        }
        return out;
    }

    void expand(const Shape& sh, std::set<Sig>& next) const {
        std::size_t n = static_cast<std::size_t>(std::count(sh.slots.begin(), sh.slots.end(), std::nullopt));
        if (n == 0) {
            if (levels_ == 0) {
                auto s = build(sh, {});
                if (live(s)) next.insert(s);
            }
            return;
        }
        if (newest_.empty()) return;
        std::vector<const Sig*> all, fresh, old;
        for (auto& s : all_) {
            all.push_back(&s);
            (newest_.count(s) ? fresh : old).push_back(&s);
        }
        // every combination with at least one child from the newest level
        std::vector<const Sig*> kids(n);
        for (std::size_t pivot = 0; pivot < n; ++pivot) {
            std::function<void(std::size_t)> go = [&](std::size_t j) {
                if (j == n) {
                    auto s = build(sh, kids);
                    if (live(s)) next.insert(s);
                    return;
                }
                const auto& pool = j < pivot ? old : j == pivot ? fresh : all;
                for (auto* c : pool) {
                    kids[j] = c;
                    go(j + 1);
                }
            };
            go(0);
        }
    }

    std::vector<const TreeAutomaton*> autos_;
    std::vector<TreeExample> forbidden_;
    std::size_t generator_;
    std::vector<std::map<std::string, std::set<std::string>>> up_;
    std::set<Shape> shapes_;
    std::set<Sig> all_;
    std::set<Sig> newest_;
    std::size_t levels_ = 0;
};

/// Bounded-language equality of several automata over a shared alphabet.
inline bool bounded_equal(const std::vector<const TreeAutomaton*>& autos, std::size_t depth,
                          std::string* witness = nullptr) {
    Explorer ex(autos);
    for (auto& s : ex.run(depth)) {
        bool first = ex.accepted(s, 0);
        for (std::size_t i = 1; i < autos.size(); ++i)
            if (ex.accepted(s, i) != first) {
                if (witness) *witness = s.label.name() + " differs for automaton " + std::to_string(i);
                return false;
            }
    }
    return true;
}

/// Relabels the grammar automaton of a repaired grammar with the labels of the grammar it came from.
inline TreeAutomaton relabel_to_previous(const Grammar& repaired, const TreeAutomaton& a_res) {
    auto conv = ta_to_cfg_traced(a_res);
    auto alphabet = ranked_alphabet(repaired);
    std::map<Label, Label> to_old;
    for (std::size_t i = 0; i < alphabet.size(); ++i)
        if (!conv.source_labels[i].is_epsilon()) to_old[Label::of(alphabet[i])] = conv.source_labels[i];
    auto a = cfg_to_ta(repaired);
    TreeAutomaton out = a;
    out.transitions.clear();
    out.alphabet.clear();
    for (auto t : a.transitions) {
        if (!t.label.is_epsilon()) t.label = to_old.at(t.label);
        out.alphabet.insert(t.label);
        out.add(t);
    }
    return out;
}

struct Shrinkage {
    bool included = true;
    bool strict = false;
};

/// L(newer) vs L(older) up to depth: inclusion and whether some tree was dropped.
inline Shrinkage bounded_shrinkage(const TreeAutomaton& older, const TreeAutomaton& newer, std::size_t depth) {
    Explorer ex({&older, &newer});
    Shrinkage out;
    for (auto& s : ex.run(depth)) {
        bool o = ex.accepted(s, 0), n = ex.accepted(s, 1);
        if (n && !o) out.included = false;
        if (o && !n) out.strict = true;
    }
    return out;
}

/// Every answer sequence of a grammar, walked depth-first; `visit` sees each finished session and its answers.
template <class Visit>
void sweep_scenarios(const Grammar& g, Visit&& visit, IntersectMode mode = IntersectMode::standard) {
    std::function<void(RepairSession, std::vector<int>)> go = [&](RepairSession s, std::vector<int> answers) {
        while (true) {
            auto next = s.next_prompt();
            if (next.kind == NextPrompt::Kind::done) {
                visit(s, answers);
                return;
            }
            if (next.kind == NextPrompt::Kind::round_complete) {
                s.step_repair();
                continue;
            }
            for (int c = 0; c < 2; ++c) {
                auto t = s;
                t.answer_prompt(next.prompt->id, c);
                auto a = answers;
                a.push_back(c);
                go(t, a);
            }
            return;
        }
    };
    go(RepairSession(g, mode), {});
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testsupport
