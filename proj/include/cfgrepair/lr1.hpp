#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cfgrepair/grammar.hpp"

namespace cfgrepair {

/// End-of-input lookahead.
inline const std::string kEndMarker = "$";

struct Lr1Item {
    std::size_t prod;  ///< production index; g.productions.size() is the augmented start production
    std::size_t dot;
    std::string lookahead;

    auto operator<=>(const Lr1Item&) const = default;
};

struct Lr1Automaton {
    Grammar grammar;
    std::vector<std::vector<Lr1Item>> states;
    std::map<std::pair<std::size_t, std::string>, std::size_t> transitions;

    std::size_t augmented_production() const { return grammar.productions.size(); }
    /// rhs of a production, the augmented one included.
    const std::vector<std::string>& rhs(std::size_t prod) const;
};

enum class ConflictKind { shift_reduce, reduce_reduce };
enum class ExampleKind { associativity, precedence };

std::string to_string(ConflictKind k);
std::string to_string(ExampleKind k);

struct Conflict {
    std::size_t state = 0;
    std::string lookahead;
    ConflictKind kind = ConflictKind::shift_reduce;
    std::set<std::size_t> involved_productions;
    std::set<std::size_t> reduce_productions;
    /// Productions of the items that would shift the lookahead.
    std::set<std::size_t> shift_productions;
    /// For each shift production, the dot positions of its shifting items.
    std::map<std::size_t, std::set<std::size_t>> shift_dots;

    bool operator==(const Conflict&) const = default;
};

/// Child positions proposed for the two nestings of a class.
struct NestingHint {
    std::size_t first_under_second = 0;  ///< position in Prod(second) holding first
    std::size_t second_under_first = 0;  ///< position in Prod(first) holding second
};

struct ConflictClass {
    RankedSymbol first;   ///< the pair, ordered by printable name
    RankedSymbol second;
    ExampleKind kind = ExampleKind::precedence;
    std::vector<std::pair<std::size_t, std::string>> source_conflicts;
    NestingHint hint;

    std::string key() const;
};

struct UnaddressedConflict {
    Conflict conflict;
    std::string reason;
};

struct Classification {
    std::vector<ConflictClass> addressable;
    std::vector<UnaddressedConflict> non_addressable;
};

Lr1Automaton build_lr1(const Grammar& g);
std::vector<Conflict> detect_conflicts(const Lr1Automaton& a);
Classification classify_conflicts(const Grammar& g, const std::vector<Conflict>& conflicts);

/// True when child position `idx` of Prod(top) can hold a node built by Prod(bottom).
bool realizable(const Grammar& g, std::size_t top_prod, std::size_t bottom_prod, std::size_t idx);

/// Realizable positions of bottom under top, ascending.
std::vector<std::size_t> realizable_positions(const Grammar& g, std::size_t top_prod, std::size_t bottom_prod);

}  // namespace cfgrepair
