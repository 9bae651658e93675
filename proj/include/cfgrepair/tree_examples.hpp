#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cfgrepair/grammar.hpp"
#include "cfgrepair/lr1.hpp"
#include "cfgrepair/tree_automaton.hpp"

namespace cfgrepair {

/// Eg(top, bottom, idx): bottom nested at rhs position idx of top.
struct TreeExample {
    RankedSymbol top;
    RankedSymbol bottom;
    std::size_t idx = 0;
    ExampleKind kind = ExampleKind::precedence;

    bool operator==(const TreeExample&) const = default;
};

class UnrealizableExample : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ContradictionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

TreeExample make_example(const Grammar& g, const RankedSymbol& top, const RankedSymbol& bottom, std::size_t idx);

/// Skeleton tree: wildcards everywhere except the nested bottom production.
Tree render_example(const Grammar& g, const TreeExample& e);

std::string to_string(const TreeExample& e);

/// Number of nonterminals before rhs position idx.
std::size_t nonterminal_ordinal(const Grammar& g, std::size_t prod, std::size_t idx);
/// Inverse of nonterminal_ordinal.
std::size_t position_of_ordinal(const Grammar& g, std::size_t prod, std::size_t ordinal);

/// Whether t lies in P⁻(e).
bool matches_forbidden(const Tree& t, const TreeExample& e);

struct ConflictPartition {
    std::vector<std::set<RankedSymbol>> classes;  ///< S_E
    std::set<RankedSymbol> all_conflicting;       ///< S_C
};

ConflictPartition partition_conflicts(const Grammar& g, const std::vector<ConflictClass>& classes);

/// Precedence and associativity facts keyed by symbol names.
struct Facts {
    /// (a, b): a sits above b, i.e. a has the lower order.
    std::set<std::pair<std::string, std::string>> less;
    /// Associative symbols and the rhs position whose self-nesting is forbidden.
    std::map<std::string, std::size_t> assoc;

    bool derives_less(const std::string& a, const std::string& b) const;
    bool decides(const std::string& a, const std::string& b) const {
        return derives_less(a, b) || derives_less(b, a);
    }
    /// Throws ContradictionError when the fact closes a cycle.
    void add_less(const std::string& a, const std::string& b);
};

using SymbolKey = std::function<std::string(const RankedSymbol&)>;

/// Default key: the printable name.
std::string symbol_name_key(const RankedSymbol& s);

struct Prompt {
    std::size_t id = 0;
    ConflictClass cls;
    TreeExample option0;
    TreeExample option1;
    Tree rendered0;
    Tree rendered1;
};

nlohmann::json prompt_to_json(const Prompt& p);

Prompt make_prompt(const Grammar& g, const ConflictClass& c, std::size_t id);

/// Whether facts already settle a class; the implied choice when they do.
std::optional<int> implied_choice(const Prompt& p, const Facts& facts, const SymbolKey& key = symbol_name_key);

/// Prompts for the classes that facts leave open, in asking order.
std::vector<Prompt> plan_prompts(const Grammar& g, const ConflictPartition& p, const std::vector<ConflictClass>& classes,
                                 const Facts& facts, const SymbolKey& key = symbol_name_key);

/// All classes in asking order, settled or not.
std::vector<ConflictClass> order_classes(const ConflictPartition& p, const std::vector<ConflictClass>& classes);

struct AnswerOutcome {
    TreeExample selected;
    TreeExample rejected;
};

/// Applies choice to facts; facts stay unchanged on ContradictionError.
AnswerOutcome record_answer(const Prompt& p, int choice, Facts& facts, const SymbolKey& key = symbol_name_key);

}  // namespace cfgrepair
