#include "cfgrepair/intersection.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

namespace cfgrepair {

std::string to_string(IntersectMode m) {
    switch (m) {
        case IntersectMode::standard: return "default";
        case IntersectMode::no_reach: return "no_reach";
        case IntersectMode::no_dedup: return "no_dedup";
        case IntersectMode::no_eps: return "no_eps";
        case IntersectMode::none: return "none";
    }
    return "default";
}

IntersectMode parse_intersect_mode(const std::string& s) {
    for (auto m : all_intersect_modes())
        if (to_string(m) == s) return m;
    throw std::invalid_argument("unknown intersect mode '" + s + "'");
}

std::vector<IntersectMode> all_intersect_modes() {
    return {IntersectMode::standard, IntersectMode::no_reach, IntersectMode::no_dedup, IntersectMode::no_eps,
            IntersectMode::none};
}

bool transitions_match(const Transition& tg, const Transition& tr) {
    if (tg.children.size() != tr.children.size()) return false;
    for (std::size_t i = 0; i < tg.children.size(); ++i) {
        auto& a = tg.children[i];
        auto& b = tr.children[i];
        if (a.is_state != b.is_state) return false;
        if (!a.is_state && a.name != b.name) return false;
    }
    return true;
}

namespace {

std::string pair_name(const std::string& g, const std::string& r) { return "(" + g + "," + r + ")"; }

using StatePair = std::pair<std::string, std::string>;

struct Product {
    const TreeAutomaton& ag;
    const TreeAutomaton& ar;
    std::map<std::string, std::set<std::string>> down_g, down_r;

    Product(const TreeAutomaton& g, const TreeAutomaton& r) : ag(g), ar(r) {
        for (auto& q : ag.states) down_g[q] = epsilon_closure(ag, q);
        for (auto& q : ar.states) down_r[q] = epsilon_closure(ar, q);
    }

    std::vector<Transition> transitions(const StatePair& p, std::vector<StatePair>& reached) const {
        std::vector<Transition> out;
        const auto& dg = down_g.at(p.first);
        const auto& dr = down_r.at(p.second);
        for (auto& tg : ag.transitions) {
            if (tg.label.is_epsilon() || !dg.count(tg.target)) continue;
            for (auto& tr : ar.transitions) {
                if (tr.label != tg.label || !dr.count(tr.target) || !transitions_match(tg, tr)) continue;
                Transition t;
                t.target = pair_name(p.first, p.second);
                t.label = tg.label;
                for (std::size_t i = 0; i < tg.children.size(); ++i) {
                    if (tg.children[i].is_state) {
                        StatePair c{tg.children[i].name, tr.children[i].name};
                        t.children.push_back(Child::state(pair_name(c.first, c.second)));
                        reached.push_back(c);
                    } else {
                        t.children.push_back(tg.children[i]);
                    }
                }
                if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
            }
        }
        return out;
    }
};

std::map<std::string, std::vector<const Transition*>> by_target(const std::vector<Transition>& ts) {
    std::map<std::string, std::vector<const Transition*>> out;
    for (auto& t : ts) out[t.target].push_back(&t);
    return out;
}

Transition substitute(const Transition& t, const std::string& from, const std::string& to) {
    Transition out = t;
    if (out.target == from) out.target = to;
    for (auto& c : out.children)
        if (c.is_state && c.name == from) c.name = to;
    return out;
}

using Rhs = std::pair<Label, std::vector<Child>>;

std::set<Rhs> rhs_set(const std::vector<Transition>& ts, const std::string& q) {
    std::set<Rhs> out;
    for (auto& t : ts)
        if (t.target == q) out.insert({t.label, t.children});
    return out;
}

std::set<std::string> closure_without(const std::vector<Transition>& ts, const std::string& q, std::size_t skip) {
    std::set<std::string> seen{q};
    std::deque<std::string> work{q};
    while (!work.empty()) {
        auto x = work.front();
        work.pop_front();
        for (std::size_t i = 0; i < ts.size(); ++i)
            if (i != skip && ts[i].label.is_epsilon() && ts[i].target == x && seen.insert(ts[i].children[0].name).second)
                work.push_back(ts[i].children[0].name);
    }
    return seen;
}

/// Renames states breadth-first from the final state: stem + ordinal, or the bare stem when unique.
IntersectResult canonical_rename(const TreeAutomaton& a, const std::map<std::string, std::string>& left,
                                 const std::map<std::string, std::string>& base_names) {
    IntersectResult res;
    auto targets = by_target(a.transitions);
    auto sorted_of = [&](const std::string& q) {
        std::vector<const Transition*> ts;
        auto it = targets.find(q);
        if (it != targets.end()) ts = it->second;
        std::sort(ts.begin(), ts.end(), [](const Transition* x, const Transition* y) {
            return std::tie(x->label, x->children) < std::tie(y->label, y->children);
        });
        return ts;
    };
    std::vector<std::string> order;
    std::set<std::string> seen;
    std::deque<std::string> work;
    for (auto& f : a.finals) {
        seen.insert(f);
        work.push_back(f);
    }
    while (!work.empty()) {
        auto q = work.front();
        work.pop_front();
        order.push_back(q);
        for (auto* t : sorted_of(q))
            for (auto& c : t->children)
                if (c.is_state && seen.insert(c.name).second) work.push_back(c.name);
    }
    for (auto& q : a.states)
        if (!seen.count(q)) order.push_back(q);

    auto stem = [&](const std::string& q) {
        auto l = left.count(q) ? left.at(q) : q;
        auto b = base_names.find(l);
        return b == base_names.end() ? l : b->second;
    };
    std::map<std::string, std::size_t> stem_count, stem_seen;
    for (auto& q : order) ++stem_count[stem(q)];
    std::set<std::string> used(a.terminals.begin(), a.terminals.end());
    std::map<std::string, std::string> rename;
    for (auto& q : order) {
        auto s = stem(q);
        std::string name = stem_count[s] == 1 ? s : s + std::to_string(stem_seen[s]++);
        while (used.count(name)) name += "_";
        used.insert(name);
        rename[q] = name;
        res.left_of[name] = left.count(q) ? left.at(q) : q;
    }

    auto& out = res.automaton;
    out.alphabet = a.alphabet;
    out.terminals = a.terminals;
    for (auto& q : a.states) out.states.insert(rename.at(q));
    for (auto& f : a.finals) out.finals.insert(rename.at(f));
    for (auto& q : order)
        for (auto* t : sorted_of(q)) {
            Transition n = *t;
            n.target = rename.at(n.target);
            for (auto& c : n.children)
                if (c.is_state) c.name = rename.at(c.name);
            out.add(n);
        }
    return res;
}

}  // namespace

TreeAutomaton trim(const TreeAutomaton& a) {
    std::set<std::string> productive;
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto& t : a.transitions) {
            if (productive.count(t.target)) continue;
            bool ok = std::all_of(t.children.begin(), t.children.end(),
                                  [&](const Child& c) { return !c.is_state || productive.count(c.name); });
            if (ok) {
                productive.insert(t.target);
                changed = true;
            }
        }
    }
    auto live = [&](const Transition& t) {
        if (!productive.count(t.target)) return false;
        return std::all_of(t.children.begin(), t.children.end(),
                           [&](const Child& c) { return !c.is_state || productive.count(c.name); });
    };
    std::set<std::string> reachable;
    std::deque<std::string> work;
    for (auto& f : a.finals) {
        reachable.insert(f);
        work.push_back(f);
    }
    while (!work.empty()) {
        auto q = work.front();
        work.pop_front();
        for (auto& t : a.transitions)
            if (t.target == q && live(t))
                for (auto& c : t.children)
                    if (c.is_state && reachable.insert(c.name).second) work.push_back(c.name);
    }
    TreeAutomaton out;
    out.alphabet = a.alphabet;
    out.terminals = a.terminals;
    out.finals = a.finals;
    for (auto& q : a.states)
        if (reachable.count(q) && (productive.count(q) || a.finals.count(q))) out.states.insert(q);
    for (auto& t : a.transitions)
        if (live(t) && reachable.count(t.target)) out.add(t);
    return out;
}

std::vector<std::pair<std::string, std::string>> find_dup_states(const std::vector<std::string>& order,
                                                                 const std::vector<Transition>& transitions) {
    static const std::string placeholder = "\x01";
    auto targets = by_target(transitions);
    std::vector<std::pair<std::string, std::multiset<std::pair<Label, std::size_t>>>> shape;
    for (auto& q : order) {
        auto it = targets.find(q);
        if (it == targets.end()) continue;
        std::multiset<std::pair<Label, std::size_t>> s;
        for (auto* t : it->second) s.insert({t->label, t->children.size()});
        shape.push_back({q, std::move(s)});
    }
    auto rename_pair = [&](const std::string& q, const std::string& x, const std::string& y) {
        std::set<Transition> s;
        for (auto* t : targets.at(q)) s.insert(substitute(substitute(*t, x, placeholder), y, placeholder));
        return s;
    };
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < shape.size(); ++i)
        for (std::size_t j = i + 1; j < shape.size(); ++j) {
            if (shape[i].second != shape[j].second) continue;
            const auto& x = shape[i].first;
            const auto& y = shape[j].first;
            if (rename_pair(x, x, y) == rename_pair(y, x, y)) out.push_back({x, y});
        }
    return out;
}

TreeAutomaton remove_duplicates(const TreeAutomaton& a, const std::vector<std::string>& order_in) {
    TreeAutomaton cur = a;
    std::vector<std::string> order = order_in;
    for (auto& q : a.states)
        if (std::find(order.begin(), order.end(), q) == order.end()) order.push_back(q);
    while (true) {
        auto dups = find_dup_states(order, cur.transitions);
        if (dups.empty()) break;
        std::map<std::string, std::string> alias;
        auto resolve = [&](std::string q) {
            while (alias.count(q)) q = alias.at(q);
            return q;
        };
        for (auto& [x, y] : dups) {
            auto rx = resolve(x), ry = resolve(y);
            if (rx == ry) continue;
            auto pos = [&](const std::string& q) { return std::find(order.begin(), order.end(), q) - order.begin(); };
            if (pos(ry) < pos(rx)) std::swap(rx, ry);
            alias[ry] = rx;
        }
        TreeAutomaton next;
        next.alphabet = cur.alphabet;
        next.terminals = cur.terminals;
        for (auto& q : cur.states) next.states.insert(resolve(q));
        for (auto& f : cur.finals) next.finals.insert(resolve(f));
        for (auto& t : cur.transitions) {
            if (alias.count(t.target)) continue;
            Transition n = t;
            for (auto& c : n.children)
                if (c.is_state) c.name = resolve(c.name);
            next.add(n);
        }
        std::vector<std::string> next_order;
        for (auto& q : order)
            if (!alias.count(q)) next_order.push_back(q);
        order = std::move(next_order);
        cur = std::move(next);
    }
    return cur;
}

TreeAutomaton introduce_epsilons(const TreeAutomaton& a) {
    TreeAutomaton cur = a;
    std::vector<std::pair<std::size_t, std::string>> lq;
    for (auto& q : cur.states) {
        auto n = rhs_set(cur.transitions, q).size();
        if (n) lq.push_back({n, q});
    }
    std::sort(lq.begin(), lq.end());
    for (std::size_t i = 0; i < lq.size(); ++i) {
        const auto& qi = lq[i].second;
        auto di = rhs_set(cur.transitions, qi);
        if (di.empty()) continue;
        for (std::size_t j = i + 1; j < lq.size(); ++j) {
            const auto& qj = lq[j].second;
            auto dj = rhs_set(cur.transitions, qj);
            if (di.size() >= dj.size() || !std::includes(dj.begin(), dj.end(), di.begin(), di.end())) continue;
            std::vector<Transition> kept;
            for (auto& t : cur.transitions)
                if (!(t.target == qj && di.count({t.label, t.children}))) kept.push_back(t);
            cur.transitions = std::move(kept);
            cur.add(Transition{qj, Label::epsilon(), {Child::state(qi)}});
        }
    }
    return cur;
}

TreeAutomaton prune_subsumed(const TreeAutomaton& a) {
    TreeAutomaton cur = a;
    bool changed = true;
    while (changed) {
        changed = false;
        std::map<std::string, std::set<std::string>> down;
        for (auto& q : cur.states) down[q] = epsilon_closure(cur, q);
        auto below = [&](const std::string& lo, const std::string& hi) {
            auto it = down.find(hi);
            return lo == hi || (it != down.end() && it->second.count(lo));
        };
        for (std::size_t k = 0; k < cur.transitions.size() && !changed; ++k) {
            const auto& t = cur.transitions[k];
            bool redundant = false;
            if (t.label.is_epsilon()) {
                redundant = closure_without(cur.transitions, t.target, k).count(t.children[0].name) != 0;
            } else {
                for (std::size_t m = 0; m < cur.transitions.size() && !redundant; ++m) {
                    if (m == k) continue;
                    const auto& o = cur.transitions[m];
                    if (o.label != t.label || o.children.size() != t.children.size()) continue;
                    if (!below(o.target, t.target)) continue;
                    bool covers = true;
                    for (std::size_t i = 0; covers && i < t.children.size(); ++i) {
                        auto& c = t.children[i];
                        auto& d = o.children[i];
                        if (c.is_state != d.is_state) covers = false;
                        else if (!c.is_state) covers = c.name == d.name;
                        else covers = below(c.name, d.name);
                    }
                    redundant = covers;
                }
            }
            if (redundant) {
                cur.transitions.erase(cur.transitions.begin() + static_cast<std::ptrdiff_t>(k));
                changed = true;
            }
        }
    }
    return cur;
}

IntersectResult intersect_traced(const TreeAutomaton& a_g, const TreeAutomaton& a_r, IntersectMode mode,
                                 const std::map<std::string, std::string>& base_names) {
    const auto& fg = a_g.final_state();
    const auto& fr = a_r.final_state();
    Product prod(a_g, a_r);

    std::map<StatePair, std::vector<Transition>> table;
    if (mode == IntersectMode::no_reach) {
        for (auto& g : a_g.states)
            for (auto& r : a_r.states) {
                std::vector<StatePair> ignored;
                table[{g, r}] = prod.transitions({g, r}, ignored);
            }
    }

    TreeAutomaton raw;
    raw.alphabet = a_g.alphabet;
    raw.alphabet.insert(a_r.alphabet.begin(), a_r.alphabet.end());
    raw.terminals = a_g.terminals;
    raw.terminals.insert(a_r.terminals.begin(), a_r.terminals.end());
    raw.finals = {pair_name(fg, fr)};
    std::map<std::string, std::string> left;
    std::vector<std::string> order;
    std::set<StatePair> seen{{fg, fr}};
    std::deque<StatePair> work{{fg, fr}};
    while (!work.empty()) {
        auto p = work.front();
        work.pop_front();
        auto name = pair_name(p.first, p.second);
        raw.states.insert(name);
        left[name] = p.first;
        order.push_back(name);
        std::vector<StatePair> reached;
        std::vector<Transition> ts;
        if (mode == IntersectMode::no_reach) {
            ts = table.at(p);
            prod.transitions(p, reached);
        } else {
            ts = prod.transitions(p, reached);
        }
        for (auto& t : ts) raw.add(t);
        for (auto& c : reached)
            if (seen.insert(c).second) work.push_back(c);
    }

    TreeAutomaton cur = trim(raw);
    std::vector<std::string> live_order;
    for (auto& q : order)
        if (cur.states.count(q)) live_order.push_back(q);
    bool dedup = mode == IntersectMode::standard || mode == IntersectMode::no_reach || mode == IntersectMode::no_eps;
    bool eps = mode == IntersectMode::standard || mode == IntersectMode::no_reach || mode == IntersectMode::no_dedup;
    if (dedup) cur = remove_duplicates(cur, live_order);
    if (eps) {
        cur = introduce_epsilons(cur);
        cur = prune_subsumed(cur);
    }
    cur = trim(cur);
    return canonical_rename(cur, left, base_names);
}

TreeAutomaton intersect(const TreeAutomaton& a_g, const TreeAutomaton& a_r, IntersectMode mode) {
    return intersect_traced(a_g, a_r, mode).automaton;
}

TreeAutomaton naive_intersect(const TreeAutomaton& a_g, const TreeAutomaton& a_r) {
    TreeAutomaton out;
    out.alphabet = a_g.alphabet;
    out.alphabet.insert(a_r.alphabet.begin(), a_r.alphabet.end());
    out.terminals = a_g.terminals;
    out.terminals.insert(a_r.terminals.begin(), a_r.terminals.end());
    for (auto& g : a_g.states)
        for (auto& r : a_r.states) out.states.insert(pair_name(g, r));
    for (auto& g : a_g.finals)
        for (auto& r : a_r.finals) out.finals.insert(pair_name(g, r));
    for (auto& tg : a_g.transitions) {
        if (tg.label.is_epsilon()) {
            for (auto& r : a_r.states)
                out.add({pair_name(tg.target, r), tg.label, {Child::state(pair_name(tg.children[0].name, r))}});
            continue;
        }
        for (auto& tr : a_r.transitions) {
            if (tr.label != tg.label || !transitions_match(tg, tr)) continue;
            Transition t;
            t.target = pair_name(tg.target, tr.target);
            t.label = tg.label;
            for (std::size_t i = 0; i < tg.children.size(); ++i)
                t.children.push_back(tg.children[i].is_state
                                         ? Child::state(pair_name(tg.children[i].name, tr.children[i].name))
                                         : tg.children[i]);
            out.add(t);
        }
    }
    for (auto& tr : a_r.transitions)
        if (tr.label.is_epsilon())
            for (auto& g : a_g.states)
                out.add({pair_name(g, tr.target), tr.label, {Child::state(pair_name(g, tr.children[0].name))}});
    return out;
}

}  // namespace cfgrepair
