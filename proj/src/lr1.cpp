#include "cfgrepair/lr1.hpp"

#include <algorithm>
#include <optional>
#include <deque>
#include <tuple>

namespace cfgrepair {

std::string to_string(ConflictKind k) {
    return k == ConflictKind::shift_reduce ? "shift-reduce" : "reduce-reduce";
}

std::string to_string(ExampleKind k) {
    return k == ExampleKind::associativity ? "associativity" : "precedence";
}

std::string ConflictClass::key() const {
    return first.name() + "|" + second.name() + "|" + to_string(kind);
}

const std::vector<std::string>& Lr1Automaton::rhs(std::size_t prod) const {
    static thread_local std::vector<std::string> augmented;
    if (prod < grammar.productions.size()) return grammar.productions[prod].rhs;
    augmented = {grammar.start};
    return augmented;
}

namespace {

// Integer encoding: terminals 0..T-1, end marker T, nonterminals T+1...
struct Encoded {
    std::vector<std::string> names;
    std::size_t num_terminals = 0;  // excluding the end marker
    std::vector<std::vector<int>> rhs;  // per production incl. augmented
    std::vector<int> lhs;
    std::vector<std::vector<std::size_t>> prods_of;  // by nonterminal code
    std::vector<bool> nullable;
    std::vector<std::set<int>> first;  // by nonterminal code

    int end_marker() const { return static_cast<int>(num_terminals); }
    bool is_terminal(int s) const { return s <= end_marker(); }
};

Encoded encode(const Grammar& g) {
    Encoded e;
    std::map<std::string, int> code;
    for (auto& t : g.terminals) {
        code[t] = static_cast<int>(e.names.size());
        e.names.push_back(t);
    }
    e.num_terminals = e.names.size();
    e.names.push_back(kEndMarker);
    for (auto& n : g.nonterminals) {
        code[n] = static_cast<int>(e.names.size());
        e.names.push_back(n);
    }
    int aug = static_cast<int>(e.names.size());
    e.names.push_back("<start>");
    e.prods_of.resize(e.names.size());
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
        auto& p = g.productions[i];
        std::vector<int> r;
        for (auto& s : p.rhs) r.push_back(code.at(s));
        e.rhs.push_back(r);
        e.lhs.push_back(code.at(p.lhs));
        e.prods_of[code.at(p.lhs)].push_back(i);
    }
    e.rhs.push_back({code.at(g.start)});
    e.lhs.push_back(aug);
    e.prods_of[aug].push_back(g.productions.size());

    e.nullable.assign(e.names.size(), false);
    e.first.assign(e.names.size(), {});
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i < e.rhs.size(); ++i) {
            int a = e.lhs[i];
            bool all_nullable = true;
            for (int s : e.rhs[i]) {
                if (e.is_terminal(s)) {
                    changed |= e.first[a].insert(s).second;
                    all_nullable = false;
                    break;
                }
                for (int f : e.first[s]) changed |= e.first[a].insert(f).second;
                if (!e.nullable[s]) {
                    all_nullable = false;
                    break;
                }
            }
            if (all_nullable && !e.nullable[a]) {
                e.nullable[a] = true;
                changed = true;
            }
        }
    }
    return e;
}

using Item = std::tuple<std::size_t, std::size_t, int>;  // prod, dot, lookahead

std::vector<Item> closure(const Encoded& e, std::vector<Item> items) {
    std::set<Item> seen(items.begin(), items.end());
    std::deque<Item> work(items.begin(), items.end());
    while (!work.empty()) {
        auto [p, d, la] = work.front();
        work.pop_front();
        const auto& r = e.rhs[p];
        if (d >= r.size() || e.is_terminal(r[d])) continue;
        std::set<int> looks;
        bool rest_nullable = true;
        for (std::size_t k = d + 1; k < r.size(); ++k) {
            int s = r[k];
            if (e.is_terminal(s)) {
                looks.insert(s);
                rest_nullable = false;
                break;
            }
            looks.insert(e.first[s].begin(), e.first[s].end());
            if (!e.nullable[s]) {
                rest_nullable = false;
                break;
            }
        }
        if (rest_nullable) looks.insert(la);
        for (std::size_t q : e.prods_of[r[d]])
            for (int b : looks) {
                Item it{q, 0, b};
                if (seen.insert(it).second) work.push_back(it);
            }
    }
    return {seen.begin(), seen.end()};
}

}  // namespace

Lr1Automaton build_lr1(const Grammar& g) {
    Encoded e = encode(g);
    Lr1Automaton a;
    a.grammar = g;
    std::map<std::vector<Item>, std::size_t> index;
    std::vector<std::vector<Item>> states;
    auto start = closure(e, {Item{g.productions.size(), 0, e.end_marker()}});
    index[start] = 0;
    states.push_back(start);
    for (std::size_t s = 0; s < states.size(); ++s) {
        std::map<int, std::vector<Item>> kernels;
        for (auto& [p, d, la] : states[s]) {
            const auto& r = e.rhs[p];
            if (d < r.size()) kernels[r[d]].push_back(Item{p, d + 1, la});
        }
        for (auto& [sym, kernel] : kernels) {
            auto c = closure(e, kernel);
            auto it = index.find(c);
            std::size_t target;
            if (it == index.end()) {
                target = states.size();
                index.emplace(c, target);
                states.push_back(std::move(c));
            } else {
                target = it->second;
            }
            a.transitions[{s, e.names[sym]}] = target;
        }
    }
    for (auto& st : states) {
        std::vector<Lr1Item> items;
        for (auto& [p, d, la] : st) items.push_back(Lr1Item{p, d, e.names[la]});
        a.states.push_back(std::move(items));
    }
    return a;
}

std::vector<Conflict> detect_conflicts(const Lr1Automaton& a) {
    std::vector<Conflict> out;
    const auto& g = a.grammar;
    for (std::size_t s = 0; s < a.states.size(); ++s) {
        std::map<std::string, Conflict> by_la;
        for (auto& it : a.states[s]) {
            const auto& r = a.rhs(it.prod);
            if (it.dot < r.size()) {
                if (g.is_terminal(r[it.dot])) {
                    auto& c = by_la[r[it.dot]];
                    c.shift_productions.insert(it.prod);
                    c.shift_dots[it.prod].insert(it.dot);
                }
            } else {
                by_la[it.lookahead].reduce_productions.insert(it.prod);
            }
        }
        for (auto& [la, c] : by_la) {
            bool sr = !c.shift_productions.empty() && !c.reduce_productions.empty();
            bool rr = c.reduce_productions.size() >= 2;
            if (!sr && !rr) continue;
            c.state = s;
            c.lookahead = la;
            c.kind = sr ? ConflictKind::shift_reduce : ConflictKind::reduce_reduce;
            c.involved_productions = c.reduce_productions;
            c.involved_productions.insert(c.shift_productions.begin(), c.shift_productions.end());
            out.push_back(c);
        }
    }
    return out;
}

bool realizable(const Grammar& g, std::size_t top_prod, std::size_t bottom_prod, std::size_t idx) {
    const auto& top = g.productions.at(top_prod);
    const auto& bottom = g.productions.at(bottom_prod);
    if (top.pass_through || bottom.pass_through) return false;
    if (idx >= top.rhs.size() || !g.is_nonterminal(top.rhs[idx])) return false;
    if (!pass_through_closure(g, top.rhs[idx]).count(bottom.lhs)) return false;
    auto productive = productive_nonterminals(g);
    auto reachable = reachable_nonterminals(g);
    if (!reachable.count(top.lhs)) return false;
    for (const auto* p : {&top, &bottom})
        for (auto& s : p->rhs)
            if (g.is_nonterminal(s) && !productive.count(s)) return false;
    return productive.count(top.lhs) && productive.count(bottom.lhs);
}

std::vector<std::size_t> realizable_positions(const Grammar& g, std::size_t top_prod, std::size_t bottom_prod) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < g.productions.at(top_prod).rhs.size(); ++i)
        if (realizable(g, top_prod, bottom_prod, i)) out.push_back(i);
    return out;
}

namespace {

std::optional<std::size_t> pick(const Grammar& g, std::size_t top, std::size_t bottom,
                                std::optional<std::size_t> preferred) {
    if (preferred && realizable(g, top, bottom, *preferred)) return preferred;
    auto all = realizable_positions(g, top, bottom);
    if (all.empty()) return std::nullopt;
    return all.front();
}

}  // namespace

Classification classify_conflicts(const Grammar& g, const std::vector<Conflict>& conflicts) {
    Classification out;
    auto alphabet = ranked_alphabet(g);
    std::map<std::string, std::size_t> class_index;
    for (auto& c : conflicts) {
        auto reject = [&](std::string why) { out.non_addressable.push_back({c, std::move(why)}); };
        if (c.involved_productions.count(g.productions.size())) {
            reject("conflict involves the accepting item");
            continue;
        }
        const auto& prods = c.involved_productions;
        if (prods.size() > 2) {
            reject("more than two productions");
            continue;
        }
        if (std::any_of(prods.begin(), prods.end(), [&](std::size_t p) { return g.productions[p].rhs.empty(); })) {
            reject("nullable production");
            continue;
        }
        if (std::any_of(prods.begin(), prods.end(), [&](std::size_t p) { return g.productions[p].pass_through; })) {
            reject("pass-through production");
            continue;
        }
        if (std::any_of(prods.begin(), prods.end(), [&](std::size_t p) { return is_trivial_production(g, p); })) {
            reject("trivial symbol");
            continue;
        }

        ConflictClass cls;
        if (prods.size() == 1) {
            std::size_t p = *prods.begin();
            std::size_t last = g.productions[p].rhs.size() - 1;
            std::optional<std::size_t> left;
            auto dots = c.shift_dots.find(p);
            if (dots != c.shift_dots.end() && *dots->second.begin() > 0) left = *dots->second.begin() - 1;
            auto all = realizable_positions(g, p, p);
            std::optional<std::size_t> l = left && realizable(g, p, p, *left) ? left : std::nullopt;
            std::optional<std::size_t> r = realizable(g, p, p, last) ? std::optional<std::size_t>(last) : std::nullopt;
            if (!l && !all.empty()) l = all.front();
            if (!r && !all.empty()) r = all.back();
            if (!l || !r || *l == *r) {
                reject("unrealizable example");
                continue;
            }
            if (*l > *r) std::swap(l, r);
            cls.first = cls.second = alphabet[p];
            cls.kind = ExampleKind::associativity;
            cls.hint = NestingHint{*l, *r};
        } else {
            std::size_t a = *prods.begin(), b = *std::next(prods.begin());
            std::optional<std::size_t> a_under_b, b_under_a;
            if (c.kind == ConflictKind::shift_reduce) {
                // reduce R then continue S: R nests at the symbol before the dot of S;
                // shift: S nests at the last position of R.
                std::size_t r = *c.reduce_productions.begin();
                std::size_t s = r == a ? b : a;
                std::optional<std::size_t> r_in_s, s_in_r;
                auto dots = c.shift_dots.find(s);
                if (dots != c.shift_dots.end() && *dots->second.begin() > 0)
                    r_in_s = *dots->second.begin() - 1;
                s_in_r = g.productions[r].rhs.size() - 1;
                r_in_s = pick(g, s, r, r_in_s);
                s_in_r = pick(g, r, s, s_in_r);
                if (r == a) {
                    a_under_b = r_in_s;
                    b_under_a = s_in_r;
                } else {
                    a_under_b = s_in_r;
                    b_under_a = r_in_s;
                }
            } else {
                a_under_b = pick(g, b, a, std::nullopt);
                b_under_a = pick(g, a, b, std::nullopt);
            }
            if (!a_under_b || !b_under_a) {
                reject("unrealizable example");
                continue;
            }
            RankedSymbol sa = alphabet[a], sb = alphabet[b];
            cls.kind = ExampleKind::precedence;
            if (sa.name() <= sb.name()) {
                cls.first = sa;
                cls.second = sb;
                cls.hint = NestingHint{*a_under_b, *b_under_a};
            } else {
                cls.first = sb;
                cls.second = sa;
                cls.hint = NestingHint{*b_under_a, *a_under_b};
            }
        }
        auto key = cls.key();
        auto it = class_index.find(key);
        if (it == class_index.end()) {
            cls.source_conflicts.push_back({c.state, c.lookahead});
            class_index.emplace(key, out.addressable.size());
            out.addressable.push_back(cls);
        } else {
            out.addressable[it->second].source_conflicts.push_back({c.state, c.lookahead});
        }
    }
    return out;
}

}  // namespace cfgrepair
