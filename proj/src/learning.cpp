#include "cfgrepair/learning.hpp"

#include <algorithm>
#include <deque>
#include <functional>

namespace cfgrepair {

std::map<std::string, std::size_t> nonterminal_levels(const Grammar& g, std::vector<std::string>* warnings) {
    std::map<std::string, std::size_t> d{{g.start, 0}};
    std::deque<std::string> work{g.start};
    while (!work.empty()) {
        auto x = work.front();
        work.pop_front();
        for (auto& p : g.productions)
            if (p.lhs == x)
                for (auto& s : p.rhs)
                    if (g.is_nonterminal(s) && !d.count(s)) {
                        d[s] = d[x] + 1;
                        work.push_back(s);
                    }
    }
    if (warnings)
        for (auto& n : g.nonterminals)
            if (!d.count(n)) warnings->push_back("nonterminal '" + n + "' is unreachable; its productions are ignored");
    return d;
}

std::set<RankedSymbol> trivial_symbols(const Grammar& g) {
    std::set<RankedSymbol> out;
    auto alphabet = ranked_alphabet(g);
    for (std::size_t i = 0; i < g.productions.size(); ++i)
        if (is_trivial_production(g, i)) out.insert(alphabet[i]);
    return out;
}

OrderSet base_precedence(const Grammar& g, std::vector<std::string>* warnings) {
    auto d = nonterminal_levels(g, warnings);
    auto alphabet = ranked_alphabet(g);
    OrderSet out;
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
        auto& p = g.productions[i];
        if (p.pass_through || is_trivial_production(g, i)) continue;
        auto it = d.find(p.lhs);
        if (it == d.end()) continue;
        out.insert({alphabet[i], it->second});
    }
    return out;
}

namespace {

std::size_t max_order(const OrderSet& s) {
    std::size_t m = 0;
    for (auto& [sym, o] : s) m = std::max(m, o);
    return m;
}

OrderSet push_n(const OrderSet& s, std::size_t from, std::size_t n) {
    OrderSet out;
    for (auto& [sym, o] : s) out.insert({sym, o >= from ? o + n : o});
    return out;
}

OrderSet compact(const OrderSet& s) {
    std::set<std::size_t> used;
    for (auto& [sym, o] : s) used.insert(o);
    std::map<std::size_t, std::size_t> renumber;
    for (auto o : used) renumber.emplace(o, renumber.size());
    OrderSet out;
    for (auto& [sym, o] : s) out.insert({sym, renumber[o]});
    return out;
}

}  // namespace

OrderMap build_mto(const Facts& facts, const ConflictPartition& partition, const OrderSet& o_bp,
                   const std::vector<ConflictClass>& classes, const SymbolKey& key) {
    OrderMap out;
    for (auto& c : classes)
        if (c.kind == ExampleKind::precedence && !facts.decides(key(c.first), key(c.second)))
            throw IncompleteFacts("no answer orders " + c.first.name() + " and " + c.second.name());
    for (auto& group : partition.classes) {
        std::vector<RankedSymbol> members;
        std::size_t order = SIZE_MAX;
        for (auto& s : group) {
            auto it = std::find_if(o_bp.begin(), o_bp.end(), [&](const OrderedSymbol& e) { return e.first == s; });
            if (it == o_bp.end()) continue;
            members.push_back(s);
            order = std::min(order, it->second);
        }
        if (members.empty()) continue;
        std::map<RankedSymbol, std::size_t> layer;
        std::function<std::size_t(const RankedSymbol&)> depth = [&](const RankedSymbol& s) -> std::size_t {
            auto it = layer.find(s);
            if (it != layer.end()) return it->second;
            std::size_t d = 0;
            for (auto& x : members)
                if (!(x == s) && facts.derives_less(key(x), key(s))) d = std::max(d, depth(x) + 1);
            return layer[s] = d;
        };
        std::vector<std::vector<RankedSymbol>> layers;
        for (auto& s : members) {
            auto d = depth(s);
            if (layers.size() <= d) layers.resize(d + 1);
            layers[d].push_back(s);
        }
        layers.erase(std::remove_if(layers.begin(), layers.end(), [](auto& l) { return l.empty(); }), layers.end());
        std::size_t width = 0;
        for (auto& l : layers) width = std::max(width, l.size());
        for (std::size_t k = 0; k < width; ++k) {
            std::vector<RankedSymbol> chain;
            for (auto& l : layers) chain.push_back(l[std::min(k, l.size() - 1)]);
            out[order].push_back(chain);
        }
    }
    return out;
}

OrderSet learn_oa(const Grammar& g, const std::vector<TreeExample>& t_minus) {
    OrderSet o_a;
    for (auto& t : t_minus)
        if (t.top == t.bottom) o_a.insert({t.top, nonterminal_ordinal(g, t.top.prod_index, t.idx)});
    return o_a;
}

OrderSet learn_op(const OrderSet& o_tmp_in, const OrderMap& m_to, const OrderSet& o_a) {
    OrderSet o_tmp = o_tmp_in;
    auto in_oa = [&](const RankedSymbol& s) {
        return std::any_of(o_a.begin(), o_a.end(), [&](const OrderedSymbol& e) { return e.first == s; });
    };
    for (auto it = m_to.rbegin(); it != m_to.rend(); ++it) {
        auto o = it->first;
        const auto& groups = it->second;
        std::size_t size = 0;
        std::set<RankedSymbol> members;
        for (auto& chain : groups) {
            size = std::max(size, chain.size());
            members.insert(chain.begin(), chain.end());
        }
        if (size == 0) continue;
        std::set<RankedSymbol> rest;
        for (auto& [s, so] : o_tmp)
            if (so == o && !members.count(s)) rest.insert(s);
        OrderSet kept;
        for (auto& e : o_tmp)
            if (!members.count(e.first) && e.second != o) kept.insert(e);
        o_tmp = push_n(kept, o + 1, size - 1);
        for (std::size_t i = 0; i < size; ++i) {
            std::set<RankedSymbol> ith;
            for (auto& chain : groups)
                if (i < chain.size()) ith.insert(chain[i]);
            for (auto& s : ith) o_tmp.insert({s, o + i});
            for (auto& s : rest) o_tmp.insert({s, o + i});
            if (i == size - 1 && std::any_of(ith.begin(), ith.end(), in_oa)) {
                o_tmp = push_n(o_tmp, o + i + 1, 1);
                for (auto& s : rest) o_tmp.insert({s, o + i + 1});
            }
        }
        o_tmp = compact(o_tmp);
    }
    return o_tmp;
}

std::pair<OrderSet, OrderSet> learn_oa_op(const std::vector<TreeExample>& t_minus, const OrderMap& m_to,
                                          const Grammar& g) {
    auto o_a = learn_oa(g, t_minus);
    return {o_a, learn_op(base_precedence(g), m_to, o_a)};
}

namespace {

std::set<std::string> trivial_nonterminals(const Grammar& g) {
    std::set<std::string> out;
    for (std::size_t i = 0; i < g.productions.size(); ++i)
        if (is_trivial_production(g, i)) out.insert(g.productions[i].lhs);
    return out;
}

std::pair<std::size_t, std::size_t> order_range(const OrderSet& o_p, const RankedSymbol& s) {
    std::size_t lo = SIZE_MAX, hi = 0;
    for (auto& [x, o] : o_p)
        if (x == s) {
            lo = std::min(lo, o);
            hi = std::max(hi, o);
        }
    return {lo, hi};
}

}  // namespace

std::vector<HighLowPair> high_to_low(const Grammar& g, const OrderSet& o_p, const std::vector<TreeExample>& t_minus) {
    std::vector<HighLowPair> out;
    auto trivial = trivial_nonterminals(g);
    std::set<RankedSymbol> syms;
    for (auto& [s, o] : o_p) syms.insert(s);
    for (auto& high : syms) {
        auto oh = order_range(o_p, high).second;
        std::set<std::string> below;
        for (auto& x : g.productions[high.prod_index].rhs)
            if (g.is_nonterminal(x) && !trivial.count(x)) {
                auto c = pass_through_closure(g, x);
                below.insert(c.begin(), c.end());
            }
        for (auto& n : below) {
            std::size_t ol = SIZE_MAX;
            for (auto& s : syms)
                if (g.productions[s.prod_index].lhs == n) ol = std::min(ol, order_range(o_p, s).first);
            if (ol == SIZE_MAX || oh <= ol) continue;
            // skip when a rejected example has `high` on top and its bottom at order >= ol
            bool unsafe = std::any_of(t_minus.begin(), t_minus.end(), [&](const TreeExample& t) {
                auto r = order_range(o_p, t.bottom);
                return t.top == high && r.first != SIZE_MAX && r.second >= ol;
            });
            if (unsafe) continue;
            for (auto& s : syms)
                if (g.productions[s.prod_index].lhs == n && order_range(o_p, s).first == ol) {
                    HighLowPair p{{s, ol}, {high, oh}};
                    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
                }
        }
    }
    return out;
}

std::string order_state(const Grammar& g, std::size_t i) {
    std::string prefix = "e";
    auto clashes = [&](const std::string& p) {
        for (auto& n : g.nonterminals)
            if (n.size() > p.size() && n.compare(0, p.size(), p) == 0 &&
                std::all_of(n.begin() + p.size(), n.end(), [](char c) { return c >= '0' && c <= '9'; }))
                return true;
        return false;
    };
    while (clashes(prefix)) prefix += "_";
    return prefix + std::to_string(i);
}

TreeAutomaton gen_ta(const OrderSet& o_a, const OrderSet& o_p, const Grammar& g,
                     const std::vector<TreeExample>& t_minus) {
    TreeAutomaton a;
    auto alphabet = ranked_alphabet(g);
    auto trivial = trivial_nonterminals(g);
    std::size_t m = max_order(o_p);
    std::vector<std::string> e;
    for (std::size_t i = 0; i <= m + 1; ++i) e.push_back(order_state(g, i));
    for (std::size_t i = 0; i <= m; ++i) a.states.insert(e[i]);
    a.finals = {e[0]};
    a.terminals = g.terminals;
    for (std::size_t i = 0; i < g.productions.size(); ++i)
        if (!g.productions[i].pass_through) a.alphabet.insert(Label::of(alphabet[i]));
    a.alphabet.insert(Label::epsilon());

    // δ-generator: nonterminal positions take states from `pick`, trivial ones keep their own state.
    auto generate = [&](const std::string& target, const RankedSymbol& s,
                        const std::function<std::string(std::size_t)>& pick) {
        Transition t;
        t.target = target;
        t.label = Label::of(s);
        const auto& rhs = g.productions[s.prod_index].rhs;
        std::size_t ordinal = 0;
        for (auto& x : rhs) {
            if (g.is_terminal(x)) {
                t.children.push_back(Child::terminal(x));
            } else {
                t.children.push_back(Child::state(trivial.count(x) ? x : pick(ordinal)));
                ++ordinal;
            }
        }
        for (auto& c : t.children)
            if (c.is_state) a.states.insert(c.name);
        a.add(t);
    };

    std::vector<OrderedSymbol> ordered(o_p.begin(), o_p.end());
    std::stable_sort(ordered.begin(), ordered.end(), [](const OrderedSymbol& x, const OrderedSymbol& y) {
        return std::tie(x.second, x.first.prod_index) < std::tie(y.second, y.first.prod_index);
    });
    for (auto& [s, i] : ordered) {
        std::set<std::size_t> restricted;
        for (auto& [x, p] : o_a)
            if (x == s) restricted.insert(p);
        generate(e[i], s, [&](std::size_t ord) { return restricted.count(ord) ? e[i + 1] : e[i]; });
    }
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
        if (!is_trivial_production(g, i)) continue;
        const auto& p = g.productions[i];
        a.states.insert(p.lhs);
        generate(p.lhs, alphabet[i], [](std::size_t) { return std::string(); });
    }
    for (std::size_t i = 0; i < m; ++i) a.add(Transition{e[i], Label::epsilon(), {Child::state(e[i + 1])}});
    for (auto& pair : high_to_low(g, o_p, t_minus))
        generate(e[pair.high.second], pair.high.first, [&](std::size_t) { return e[pair.low.second]; });
    return a;
}

std::string to_string(const OrderSet& s) {
    std::string out = "{";
    bool first = true;
    for (auto& [sym, o] : s) {
        out += (first ? " (" : ", (") + sym.name() + "," + std::to_string(o) + ")";
        first = false;
    }
    return out + " }";
}

nlohmann::json precedence_state_to_json(const PrecedenceState& s) {
    auto set_json = [](const OrderSet& set) {
        nlohmann::json j = nlohmann::json::array();
        for (auto& [sym, o] : set) j.push_back({sym.name(), o});
        return j;
    };
    nlohmann::json mto = nlohmann::json::object();
    for (auto& [o, groups] : s.m_to) {
        nlohmann::json gj = nlohmann::json::array();
        for (auto& chain : groups) {
            nlohmann::json cj = nlohmann::json::array();
            for (auto& sym : chain) cj.push_back(sym.name());
            gj.push_back(cj);
        }
        mto[std::to_string(o)] = gj;
    }
    return {{"o_bp", set_json(s.o_bp)}, {"o_a", set_json(s.o_a)}, {"o_p", set_json(s.o_p)},
            {"m_to", mto},          {"levels", s.levels}, {"warnings", s.warnings}};
}

}  // namespace cfgrepair
