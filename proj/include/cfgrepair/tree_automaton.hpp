#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfgrepair/grammar.hpp"

namespace cfgrepair {

/// Transition label: a ranked symbol's printable parts, or (ε,1).
struct Label {
    std::string sym;
    std::size_t rank = 0;

    static Label epsilon() { return Label{kEpsilon, 1}; }
    static Label of(const RankedSymbol& s) { return Label{s.sym, s.rank}; }
    bool is_epsilon() const { return sym == kEpsilon && rank == 1; }
    std::string name() const { return "(" + sym + "," + std::to_string(rank) + ")"; }

    bool operator==(const Label&) const = default;
    auto operator<=>(const Label&) const = default;
};

struct Child {
    std::string name;
    bool is_state = true;

    static Child state(std::string n) { return Child{std::move(n), true}; }
    static Child terminal(std::string n) { return Child{std::move(n), false}; }

    bool operator==(const Child&) const = default;
    auto operator<=>(const Child&) const = default;
};

struct Transition {
    std::string target;
    Label label;
    std::vector<Child> children;

    bool operator==(const Transition&) const = default;
    auto operator<=>(const Transition&) const = default;
};

std::string to_string(const Transition& t);

struct TreeAutomaton {
    std::set<std::string> states;
    std::set<Label> alphabet;
    std::set<std::string> terminals;
    std::set<std::string> finals;
    /// Insertion-ordered, duplicate-free.
    std::vector<Transition> transitions;

    /// Appends unless already present; returns true when added.
    bool add(const Transition& t);
    std::set<Transition> transition_set() const { return {transitions.begin(), transitions.end()}; }
    const std::string& final_state() const;
};

/// Same states, finals, terminals and transition sets (names taken literally).
bool same_structure(const TreeAutomaton& a, const TreeAutomaton& b);

class AutomatonError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ResourceLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void validate_automaton(const TreeAutomaton& a);

TreeAutomaton cfg_to_ta(const Grammar& g);

struct CfgConversion {
    Grammar grammar;
    /// Label of the transition each production came from (ε for pass-through).
    std::vector<Label> source_labels;
};

CfgConversion ta_to_cfg_traced(const TreeAutomaton& a);
Grammar ta_to_cfg(const TreeAutomaton& a);

std::set<std::string> epsilon_closure(const TreeAutomaton& a, const std::string& q);
/// States q with q <-ε ... <-ε `from`, including `from`.
std::set<std::string> epsilon_coclosure(const TreeAutomaton& a, const std::string& from);

struct TreeNode;
using Tree = std::shared_ptr<const TreeNode>;

struct TreeNode {
    bool leaf = false;
    bool wildcard = false;  ///< leaf standing for any subtree of the named nonterminal
    std::string name;       ///< terminal or wildcard nonterminal for leaves
    Label label;            ///< internal nodes
    std::vector<Tree> children;
    std::size_t depth = 0;  ///< internal nodes on the longest root-leaf path
};

Tree make_leaf(std::string terminal);
Tree make_wildcard(std::string nonterminal);
Tree make_node(Label label, std::vector<Tree> children);

std::size_t tree_depth(const Tree& t);
std::size_t tree_size(const Tree& t);
int compare_trees(const Tree& a, const Tree& b);
bool trees_equal(const Tree& a, const Tree& b);
std::string tree_to_string(const Tree& t);
std::string tree_to_ascii(const Tree& t);
nlohmann::json tree_to_json(const Tree& t);
Tree tree_from_json(const nlohmann::json& j);
/// Concatenated leaves.
std::vector<std::string> tree_yield(const Tree& t);

bool accepts(const TreeAutomaton& a, const Tree& t);
/// States assignable to the root of t (ε-promotions included).
std::set<std::string> run_states(const TreeAutomaton& a, const Tree& t);

inline constexpr std::size_t kDefaultTreeCap = 1'000'000;

/// Trees of depth <= max_depth accepted by a, in canonical order.
std::vector<Tree> enumerate_trees(const TreeAutomaton& a, std::size_t max_depth,
                                  std::size_t cap = kDefaultTreeCap);

nlohmann::json automaton_to_json(const TreeAutomaton& a);
std::string automaton_to_string(const TreeAutomaton& a);

}  // namespace cfgrepair
