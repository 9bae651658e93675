#include "cfgrepair/tree_automaton.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>
#include <unordered_map>

namespace cfgrepair {

std::string to_string(const Transition& t) {
    std::string s = t.target + " <-" + t.label.name();
    for (auto& c : t.children) s += " " + c.name;
    return s;
}

bool TreeAutomaton::add(const Transition& t) {
    if (std::find(transitions.begin(), transitions.end(), t) != transitions.end()) return false;
    transitions.push_back(t);
    return true;
}

const std::string& TreeAutomaton::final_state() const {
    if (finals.size() != 1)
        throw AutomatonError("expected exactly one final state, found " + std::to_string(finals.size()));
    return *finals.begin();
}

bool same_structure(const TreeAutomaton& a, const TreeAutomaton& b) {
    return a.states == b.states && a.finals == b.finals && a.terminals == b.terminals &&
           a.transition_set() == b.transition_set();
}

void validate_automaton(const TreeAutomaton& a) {
    for (auto& f : a.finals)
        if (!a.states.count(f)) throw AutomatonError("final state '" + f + "' is not a state");
    for (auto& t : a.transitions) {
        if (!a.states.count(t.target)) throw AutomatonError("unknown target in " + to_string(t));
        for (auto& c : t.children) {
            if (c.is_state ? !a.states.count(c.name) : !a.terminals.count(c.name))
                throw AutomatonError("unknown child '" + c.name + "' in " + to_string(t));
        }
        if (t.label.is_epsilon()) {
            if (t.children.size() != 1 || !t.children[0].is_state)
                throw AutomatonError("ε-transition needs one state child: " + to_string(t));
        } else if (t.children.size() != t.label.rank) {
            throw AutomatonError("arity mismatch in " + to_string(t));
        }
    }
}

TreeAutomaton cfg_to_ta(const Grammar& g) {
    TreeAutomaton a;
    a.states = g.nonterminals;
    a.terminals = g.terminals;
    a.finals = {g.start};
    auto alphabet = ranked_alphabet(g);
    for (std::size_t i = 0; i < g.productions.size(); ++i) {
        auto& p = g.productions[i];
        Transition t;
        t.target = p.lhs;
        t.label = p.pass_through ? Label::epsilon() : Label::of(alphabet[i]);
        for (auto& s : p.rhs)
            t.children.push_back(g.is_terminal(s) ? Child::terminal(s) : Child::state(s));
        if (!t.label.is_epsilon()) a.alphabet.insert(t.label);
        a.add(t);
    }
    a.alphabet.insert(Label::epsilon());
    return a;
}

CfgConversion ta_to_cfg_traced(const TreeAutomaton& a) {
    if (a.finals.size() != 1)
        throw AutomatonError("conversion needs exactly one final state, found " + std::to_string(a.finals.size()));
    CfgConversion out;
    Grammar& g = out.grammar;
    g.start = *a.finals.begin();
    g.terminals = a.terminals;
    g.nonterminals = a.states;
    for (auto& t : a.transitions) {
        Production p;
        p.lhs = t.target;
        p.pass_through = t.label.is_epsilon();
        for (auto& c : t.children) p.rhs.push_back(c.name);
        bool dup = std::any_of(g.productions.begin(), g.productions.end(),
                               [&](const Production& q) { return q.lhs == p.lhs && q.rhs == p.rhs; });
        if (dup) continue;
        g.productions.push_back(std::move(p));
        out.source_labels.push_back(t.label);
    }
    try {
        validate_grammar(g);
    } catch (const GrammarError& e) {
        throw AutomatonError(std::string("automaton does not form a grammar: ") + e.what());
    }
    return out;
}

Grammar ta_to_cfg(const TreeAutomaton& a) { return ta_to_cfg_traced(a).grammar; }

std::set<std::string> epsilon_closure(const TreeAutomaton& a, const std::string& q) {
    std::set<std::string> seen{q};
    std::deque<std::string> work{q};
    while (!work.empty()) {
        auto x = work.front();
        work.pop_front();
        for (auto& t : a.transitions)
            if (t.label.is_epsilon() && t.target == x && seen.insert(t.children[0].name).second)
                work.push_back(t.children[0].name);
    }
    return seen;
}

std::set<std::string> epsilon_coclosure(const TreeAutomaton& a, const std::string& from) {
    std::set<std::string> seen{from};
    std::deque<std::string> work{from};
    while (!work.empty()) {
        auto x = work.front();
        work.pop_front();
        for (auto& t : a.transitions)
            if (t.label.is_epsilon() && t.children[0].name == x && seen.insert(t.target).second)
                work.push_back(t.target);
    }
    return seen;
}

Tree make_leaf(std::string terminal) {
    auto n = std::make_shared<TreeNode>();
    n->leaf = true;
    n->name = std::move(terminal);
    return n;
}

Tree make_wildcard(std::string nonterminal) {
    auto n = std::make_shared<TreeNode>();
    n->leaf = true;
    n->wildcard = true;
    n->name = std::move(nonterminal);
    return n;
}

Tree make_node(Label label, std::vector<Tree> children) {
    auto n = std::make_shared<TreeNode>();
    n->label = std::move(label);
    std::size_t d = 0;
    for (auto& c : children) d = std::max(d, c->depth);
    n->depth = d + 1;
    n->children = std::move(children);
    return n;
}

std::size_t tree_depth(const Tree& t) { return t->depth; }

std::size_t tree_size(const Tree& t) {
    std::size_t n = 1;
    for (auto& c : t->children) n += tree_size(c);
    return n;
}

int compare_trees(const Tree& a, const Tree& b) {
    if (a == b) return 0;
    if (a->depth != b->depth) return a->depth < b->depth ? -1 : 1;
    if (a->leaf != b->leaf) return a->leaf ? -1 : 1;
    if (a->leaf) {
        if (a->wildcard != b->wildcard) return a->wildcard ? 1 : -1;
        return a->name.compare(b->name) < 0 ? -1 : (a->name == b->name ? 0 : 1);
    }
    if (a->label != b->label) return a->label < b->label ? -1 : 1;
    if (a->children.size() != b->children.size()) return a->children.size() < b->children.size() ? -1 : 1;
    for (std::size_t i = 0; i < a->children.size(); ++i)
        if (int c = compare_trees(a->children[i], b->children[i])) return c;
    return 0;
}

bool trees_equal(const Tree& a, const Tree& b) { return compare_trees(a, b) == 0; }

std::string tree_to_string(const Tree& t) {
    if (t->leaf) return t->name;
    std::string s = t->label.name() + "[";
    for (std::size_t i = 0; i < t->children.size(); ++i) {
        if (i) s += " ";
        s += tree_to_string(t->children[i]);
    }
    return s + "]";
}

namespace {

void ascii(const Tree& t, std::size_t indent, std::string& out) {
    out.append(indent * 2, ' ');
    out += t->leaf ? t->name : t->label.name();
    out += "\n";
    for (auto& c : t->children) ascii(c, indent + 1, out);
}

}  // namespace

std::string tree_to_ascii(const Tree& t) {
    std::string out;
    ascii(t, 0, out);
    return out;
}

nlohmann::json tree_to_json(const Tree& t) {
    if (t->leaf) {
        nlohmann::json j{{"leaf", t->name}};
        if (t->wildcard) j["wildcard"] = true;
        return j;
    }
    nlohmann::json kids = nlohmann::json::array();
    for (auto& c : t->children) kids.push_back(tree_to_json(c));
    return {{"sym", t->label.sym}, {"rank", t->label.rank}, {"children", kids}};
}

Tree tree_from_json(const nlohmann::json& j) {
    if (j.contains("leaf")) {
        auto name = j.at("leaf").get<std::string>();
        return j.value("wildcard", false) ? make_wildcard(name) : make_leaf(name);
    }
    std::vector<Tree> kids;
    for (auto& c : j.at("children")) kids.push_back(tree_from_json(c));
    Label l{j.at("sym").get<std::string>(), j.at("rank").get<std::size_t>()};
    if (l.rank != kids.size()) throw std::invalid_argument("rank does not match child count");
    return make_node(l, std::move(kids));
}

std::vector<std::string> tree_yield(const Tree& t) {
    std::vector<std::string> out;
    std::function<void(const Tree&)> go = [&](const Tree& n) {
        if (n->leaf) {
            out.push_back(n->name);
            return;
        }
        for (auto& c : n->children) go(c);
    };
    go(t);
    return out;
}

namespace {

struct Runner {
    const TreeAutomaton& a;
    std::map<Label, std::vector<const Transition*>> by_label;
    std::map<std::string, std::set<std::string>> up;
    std::unordered_map<const TreeNode*, std::set<std::string>> memo;

    explicit Runner(const TreeAutomaton& aut) : a(aut) {
        for (auto& t : a.transitions)
            if (!t.label.is_epsilon()) by_label[t.label].push_back(&t);
        for (auto& q : a.states) up[q] = epsilon_coclosure(a, q);
    }

    const std::set<std::string>& run(const Tree& t) {
        auto it = memo.find(t.get());
        if (it != memo.end()) return it->second;
        std::set<std::string> out;
        if (!t->leaf) {
            std::vector<const std::set<std::string>*> kid_states;
            for (auto& c : t->children) kid_states.push_back(c->leaf ? nullptr : &run(c));
            auto found = by_label.find(t->label);
            if (found != by_label.end()) {
                for (auto* tr : found->second) {
                    if (tr->children.size() != t->children.size()) continue;
                    bool ok = true;
                    for (std::size_t i = 0; ok && i < tr->children.size(); ++i) {
                        const auto& want = tr->children[i];
                        const auto& have = t->children[i];
                        if (want.is_state)
                            ok = !have->leaf && kid_states[i]->count(want.name);
                        else
                            ok = have->leaf && !have->wildcard && have->name == want.name;
                    }
                    if (ok) {
                        auto u = up.find(tr->target);
                        out.insert(u->second.begin(), u->second.end());
                    }
                }
            }
        }
        return memo.emplace(t.get(), std::move(out)).first->second;
    }
};

}  // namespace

std::set<std::string> run_states(const TreeAutomaton& a, const Tree& t) {
    Runner r(a);
    return r.run(t);
}

bool accepts(const TreeAutomaton& a, const Tree& t) {
    auto s = run_states(a, t);
    return std::any_of(a.finals.begin(), a.finals.end(), [&](const std::string& f) { return s.count(f) != 0; });
}

namespace {

struct KeyHash {
    std::size_t operator()(const std::pair<std::size_t, std::vector<std::size_t>>& k) const {
        std::size_t h = std::hash<std::size_t>{}(k.first);
        for (auto v : k.second) h ^= std::hash<std::size_t>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

}  // namespace

std::vector<Tree> enumerate_trees(const TreeAutomaton& a, std::size_t max_depth, std::size_t cap) {
    std::vector<Tree> nodes;
    std::map<std::string, std::size_t> leaf_ids;
    std::vector<Label> labels(a.alphabet.begin(), a.alphabet.end());
    std::map<Label, std::size_t> label_ids;
    for (std::size_t i = 0; i < labels.size(); ++i) label_ids[labels[i]] = i;
    std::unordered_map<std::pair<std::size_t, std::vector<std::size_t>>, std::size_t, KeyHash> interned;

    for (auto& t : a.terminals) {
        leaf_ids[t] = nodes.size();
        nodes.push_back(make_leaf(t));
    }
    std::map<std::string, std::set<std::string>> down;
    for (auto& q : a.states) down[q] = epsilon_closure(a, q);

    std::map<std::string, std::set<std::size_t>> at;
    for (std::size_t d = 1; d <= max_depth; ++d) {
        std::map<std::string, std::set<std::size_t>> next = at;
        for (auto& t : a.transitions) {
            if (t.label.is_epsilon()) continue;
            auto lid = label_ids.find(t.label);
            std::size_t label_id;
            if (lid == label_ids.end()) {
                label_id = labels.size();
                labels.push_back(t.label);
                label_ids[t.label] = label_id;
            } else {
                label_id = lid->second;
            }
            std::vector<std::vector<std::size_t>> options;
            bool empty = false;
            for (auto& c : t.children) {
                if (!c.is_state) {
                    options.push_back({leaf_ids.at(c.name)});
                    continue;
                }
                auto f = at.find(c.name);
                if (f == at.end() || f->second.empty()) {
                    empty = true;
                    break;
                }
                options.emplace_back(f->second.begin(), f->second.end());
            }
            if (empty) continue;
            std::vector<std::size_t> pick(options.size(), 0);
            auto& bucket = next[t.target];
            while (true) {
                std::vector<std::size_t> ids(options.size());
                for (std::size_t i = 0; i < options.size(); ++i) ids[i] = options[i][pick[i]];
                auto key = std::make_pair(label_id, ids);
                auto found = interned.find(key);
                std::size_t id;
                if (found == interned.end()) {
                    if (interned.size() >= cap)
                        throw ResourceLimitError("tree enumeration exceeded cap of " + std::to_string(cap));
                    std::vector<Tree> kids;
                    for (auto k : ids) kids.push_back(nodes[k]);
                    id = nodes.size();
                    nodes.push_back(make_node(t.label, std::move(kids)));
                    interned.emplace(std::move(key), id);
                } else {
                    id = found->second;
                }
                bucket.insert(id);
                std::size_t i = 0;
                while (i < pick.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
                if (i == pick.size()) break;
            }
        }
        for (auto& q : a.states) {
            auto& bucket = next[q];
            for (auto& r : down[q])
                if (r != q) {
                    auto f = next.find(r);
                    if (f != next.end()) bucket.insert(f->second.begin(), f->second.end());
                }
        }
        bool grew = next != at;
        at = std::move(next);
        if (!grew) break;
    }
    std::set<std::size_t> result;
    for (auto& f : a.finals) {
        auto it = at.find(f);
        if (it != at.end()) result.insert(it->second.begin(), it->second.end());
    }
    std::vector<Tree> out;
    for (auto id : result) out.push_back(nodes[id]);
    std::sort(out.begin(), out.end(), [](const Tree& x, const Tree& y) { return compare_trees(x, y) < 0; });
    return out;
}

nlohmann::json automaton_to_json(const TreeAutomaton& a) {
    nlohmann::json tr = nlohmann::json::array();
    for (auto& t : a.transitions) {
        nlohmann::json kids = nlohmann::json::array();
        for (auto& c : t.children) kids.push_back({{"name", c.name}, {"state", c.is_state}});
        tr.push_back({{"target", t.target}, {"sym", t.label.sym}, {"rank", t.label.rank}, {"children", kids}});
    }
    return {{"states", a.states}, {"finals", a.finals}, {"terminals", a.terminals}, {"transitions", tr}};
}

std::string automaton_to_string(const TreeAutomaton& a) {
    std::ostringstream out;
    out << "Q = {";
    bool first = true;
    for (auto& q : a.states) {
        out << (first ? " " : ", ") << q;
        first = false;
    }
    out << " }\nQf = {";
    first = true;
    for (auto& q : a.finals) {
        out << (first ? " " : ", ") << q;
        first = false;
    }
    out << " }\n";
    for (auto& t : a.transitions) out << "  " << to_string(t) << "\n";
    return out.str();
}

}  // namespace cfgrepair
