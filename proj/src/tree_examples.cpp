#include "cfgrepair/tree_examples.hpp"

#include <algorithm>
#include <deque>
#include <tuple>

namespace cfgrepair {

TreeExample make_example(const Grammar& g, const RankedSymbol& top, const RankedSymbol& bottom, std::size_t idx) {
    if (idx >= top.rank)
        throw UnrealizableExample("position " + std::to_string(idx) + " is outside " + top.name());
    if (!realizable(g, top.prod_index, bottom.prod_index, idx))
        throw UnrealizableExample(bottom.name() + " cannot appear at position " + std::to_string(idx) + " of " +
                                  top.name());
    TreeExample e;
    e.top = top;
    e.bottom = bottom;
    e.idx = idx;
    e.kind = top == bottom ? ExampleKind::associativity : ExampleKind::precedence;
    return e;
}

namespace {

std::vector<Tree> skeleton_children(const Grammar& g, std::size_t prod) {
    std::vector<Tree> kids;
    for (auto& s : g.productions.at(prod).rhs) kids.push_back(g.is_terminal(s) ? make_leaf(s) : make_wildcard(s));
    return kids;
}

}  // namespace

Tree render_example(const Grammar& g, const TreeExample& e) {
    auto kids = skeleton_children(g, e.top.prod_index);
    kids.at(e.idx) = make_node(Label::of(e.bottom), skeleton_children(g, e.bottom.prod_index));
    return make_node(Label::of(e.top), std::move(kids));
}

std::string to_string(const TreeExample& e) {
    return "Eg(" + e.top.name() + ", " + e.bottom.name() + ", " + std::to_string(e.idx) + ")";
}

std::size_t nonterminal_ordinal(const Grammar& g, std::size_t prod, std::size_t idx) {
    const auto& rhs = g.productions.at(prod).rhs;
    std::size_t n = 0;
    for (std::size_t i = 0; i < idx && i < rhs.size(); ++i)
        if (g.is_nonterminal(rhs[i])) ++n;
    return n;
}

std::size_t position_of_ordinal(const Grammar& g, std::size_t prod, std::size_t ordinal) {
    const auto& rhs = g.productions.at(prod).rhs;
    std::size_t n = 0;
    for (std::size_t i = 0; i < rhs.size(); ++i)
        if (g.is_nonterminal(rhs[i]) && n++ == ordinal) return i;
    throw std::out_of_range("no nonterminal with ordinal " + std::to_string(ordinal));
}

namespace {

const TreeNode* skip_epsilon(const TreeNode* n) {
    while (!n->leaf && n->label.is_epsilon() && n->children.size() == 1) n = n->children[0].get();
    return n;
}

bool has_label(const TreeNode* n, const Label& l) { return !n->leaf && n->label == l; }

bool match_at(const TreeNode* n, const TreeExample& e, const Label& top, const Label& bottom) {
    if (!has_label(n, top)) return false;
    if (e.kind == ExampleKind::associativity) {
        if (e.idx >= n->children.size()) return false;
        return has_label(skip_epsilon(n->children[e.idx].get()), bottom);
    }
    return std::any_of(n->children.begin(), n->children.end(),
                       [&](const Tree& c) { return has_label(skip_epsilon(c.get()), bottom); });
}

bool match_any(const TreeNode* n, const TreeExample& e, const Label& top, const Label& bottom) {
    if (n->leaf) return false;
    if (match_at(n, e, top, bottom)) return true;
    return std::any_of(n->children.begin(), n->children.end(),
                       [&](const Tree& c) { return match_any(c.get(), e, top, bottom); });
}

}  // namespace

bool matches_forbidden(const Tree& t, const TreeExample& e) {
    return match_any(t.get(), e, Label::of(e.top), Label::of(e.bottom));
}

ConflictPartition partition_conflicts(const Grammar& g, const std::vector<ConflictClass>& classes) {
    ConflictPartition out;
    for (auto& c : classes) {
        out.all_conflicting.insert(c.first);
        out.all_conflicting.insert(c.second);
    }
    std::vector<RankedSymbol> syms(out.all_conflicting.begin(), out.all_conflicting.end());
    std::sort(syms.begin(), syms.end(), [](auto& a, auto& b) { return a.name() < b.name(); });
    std::vector<std::size_t> parent(syms.size());
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        return parent[x] == x ? x : parent[x] = find(parent[x]);
    };
    auto index = [&](const RankedSymbol& s) {
        return static_cast<std::size_t>(std::find(syms.begin(), syms.end(), s) - syms.begin());
    };
    auto unite = [&](std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    };
    for (auto& c : classes) unite(index(c.first), index(c.second));
    for (std::size_t i = 0; i < syms.size(); ++i)
        for (std::size_t j = i + 1; j < syms.size(); ++j) {
            auto a = syms[i].prod_index, b = syms[j].prod_index;
            if (!realizable_positions(g, a, b).empty() && !realizable_positions(g, b, a).empty()) unite(i, j);
        }
    std::map<std::size_t, std::set<RankedSymbol>> groups;
    for (std::size_t i = 0; i < syms.size(); ++i) groups[find(i)].insert(syms[i]);
    for (auto& [root, members] : groups) out.classes.push_back(members);
    return out;
}

bool Facts::derives_less(const std::string& a, const std::string& b) const {
    std::set<std::string> seen{a};
    std::deque<std::string> work{a};
    while (!work.empty()) {
        auto x = work.front();
        work.pop_front();
        for (auto it = less.lower_bound({x, ""}); it != less.end() && it->first == x; ++it) {
            if (it->second == b) return true;
            if (seen.insert(it->second).second) work.push_back(it->second);
        }
    }
    return false;
}

void Facts::add_less(const std::string& a, const std::string& b) {
    if (a == b) throw ContradictionError(a + " cannot sit above itself");
    if (derives_less(b, a))
        throw ContradictionError("placing " + a + " above " + b + " contradicts earlier answers (" + b + " < " + a +
                                 ")");
    less.insert({a, b});
}

std::string symbol_name_key(const RankedSymbol& s) { return s.name(); }

nlohmann::json prompt_to_json(const Prompt& p) {
    return {{"id", p.id},
            {"kind", to_string(p.cls.kind)},
            {"pair", {p.cls.first.name(), p.cls.second.name()}},
            {"options", {tree_to_json(p.rendered0), tree_to_json(p.rendered1)}}};
}

Prompt make_prompt(const Grammar& g, const ConflictClass& c, std::size_t id) {
    Prompt p;
    p.id = id;
    p.cls = c;
    if (c.kind == ExampleKind::associativity) {
        p.option0 = make_example(g, c.first, c.first, c.hint.first_under_second);
        p.option1 = make_example(g, c.first, c.first, c.hint.second_under_first);
    } else {
        p.option0 = make_example(g, c.first, c.second, c.hint.second_under_first);
        p.option1 = make_example(g, c.second, c.first, c.hint.first_under_second);
    }
    p.rendered0 = render_example(g, p.option0);
    p.rendered1 = render_example(g, p.option1);
    return p;
}

std::optional<int> implied_choice(const Prompt& p, const Facts& facts, const SymbolKey& key) {
    if (p.cls.kind == ExampleKind::associativity) {
        auto it = facts.assoc.find(key(p.cls.first));
        if (it == facts.assoc.end()) return std::nullopt;
        if (it->second == p.option1.idx) return 0;
        if (it->second == p.option0.idx) return 1;
        return std::nullopt;
    }
    auto a = key(p.cls.first), b = key(p.cls.second);
    if (facts.derives_less(a, b)) return 0;
    if (facts.derives_less(b, a)) return 1;
    return std::nullopt;
}

std::vector<ConflictClass> order_classes(const ConflictPartition& p, const std::vector<ConflictClass>& classes) {
    auto group_of = [&](const RankedSymbol& s) {
        for (std::size_t i = 0; i < p.classes.size(); ++i)
            if (p.classes[i].count(s)) return i;
        return p.classes.size();
    };
    std::set<std::pair<std::string, std::string>> prec_pairs;
    for (auto& c : classes)
        if (c.kind == ExampleKind::precedence) {
            prec_pairs.insert({c.first.name(), c.second.name()});
            prec_pairs.insert({c.second.name(), c.first.name()});
        }
    // deferrable: some third symbol forms precedence classes with both members
    auto deferrable = [&](const ConflictClass& c) {
        if (c.kind != ExampleKind::precedence) return false;
        std::set<std::string> others;
        for (auto& [x, y] : prec_pairs) others.insert(x);
        for (auto& o : others) {
            if (o == c.first.name() || o == c.second.name()) continue;
            if (prec_pairs.count({o, c.first.name()}) && prec_pairs.count({o, c.second.name()})) return true;
        }
        return false;
    };
    // variants of one construct (same sym) go last among deferrable classes
    auto sort_key = [&](const ConflictClass& c) {
        bool d = deferrable(c);
        return std::make_tuple(group_of(c.first), d && c.first.sym == c.second.sym, d,
                               c.kind != ExampleKind::precedence, c.first.name(), c.second.name());
    };
    std::vector<ConflictClass> out = classes;
    std::stable_sort(out.begin(), out.end(),
                     [&](const ConflictClass& a, const ConflictClass& b) { return sort_key(a) < sort_key(b); });
    return out;
}

std::vector<Prompt> plan_prompts(const Grammar& g, const ConflictPartition& p, const std::vector<ConflictClass>& classes,
                                 const Facts& facts, const SymbolKey& key) {
    std::vector<Prompt> out;
    for (auto& c : order_classes(p, classes)) {
        auto prompt = make_prompt(g, c, out.size());
        if (!implied_choice(prompt, facts, key)) out.push_back(std::move(prompt));
    }
    return out;
}

AnswerOutcome record_answer(const Prompt& p, int choice, Facts& facts, const SymbolKey& key) {
    if (choice != 0 && choice != 1) throw std::invalid_argument("choice must be 0 or 1");
    AnswerOutcome out;
    out.selected = choice == 0 ? p.option0 : p.option1;
    out.rejected = choice == 0 ? p.option1 : p.option0;
    if (p.cls.kind == ExampleKind::associativity) {
        auto k = key(p.cls.first);
        auto it = facts.assoc.find(k);
        if (it != facts.assoc.end() && it->second != out.rejected.idx)
            throw ContradictionError("associativity of " + k + " was already decided the other way");
        facts.assoc[k] = out.rejected.idx;
    } else {
        facts.add_less(key(out.selected.top), key(out.selected.bottom));
    }
    return out;
}

}  // namespace cfgrepair
