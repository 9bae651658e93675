#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cfgrepair/grammar.hpp"
#include "cfgrepair/tree_automaton.hpp"
#include "cfgrepair/tree_examples.hpp"

namespace cfgrepair {

using OrderedSymbol = std::pair<RankedSymbol, std::size_t>;
using OrderSet = std::set<OrderedSymbol>;
/// order -> chains of symbols, lowest order first
using OrderMap = std::map<std::size_t, std::vector<std::vector<RankedSymbol>>>;

struct PrecedenceState {
    OrderSet o_bp;
    /// (symbol, nonterminal ordinal)
    OrderSet o_a;
    OrderSet o_p;
    OrderMap m_to;
    std::map<std::string, std::size_t> levels;
    std::vector<std::string> warnings;
};

nlohmann::json precedence_state_to_json(const PrecedenceState& s);

class IncompleteFacts : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest distance from the start symbol; unreachable ones are left out.
std::map<std::string, std::size_t> nonterminal_levels(const Grammar& g, std::vector<std::string>* warnings = nullptr);

std::set<RankedSymbol> trivial_symbols(const Grammar& g);

OrderSet base_precedence(const Grammar& g, std::vector<std::string>* warnings = nullptr);

OrderMap build_mto(const Facts& facts, const ConflictPartition& partition, const OrderSet& o_bp,
                   const std::vector<ConflictClass>& classes, const SymbolKey& key = symbol_name_key);

/// O_a from the rejected associativity examples.
OrderSet learn_oa(const Grammar& g, const std::vector<TreeExample>& t_minus);

/// O_p learned from an explicit O_tmp.
OrderSet learn_op(const OrderSet& o_tmp, const OrderMap& m_to, const OrderSet& o_a);

std::pair<OrderSet, OrderSet> learn_oa_op(const std::vector<TreeExample>& t_minus, const OrderMap& m_to,
                                          const Grammar& g);

struct HighLowPair {
    OrderedSymbol low;
    OrderedSymbol high;

    auto operator<=>(const HighLowPair&) const = default;
};

std::vector<HighLowPair> high_to_low(const Grammar& g, const OrderSet& o_p,
                                     const std::vector<TreeExample>& t_minus = {});

/// Name of the state for order i.
std::string order_state(const Grammar& g, std::size_t i);

TreeAutomaton gen_ta(const OrderSet& o_a, const OrderSet& o_p, const Grammar& g,
                     const std::vector<TreeExample>& t_minus = {});

std::string to_string(const OrderSet& s);

}  // namespace cfgrepair
