#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cfgrepair/tree_automaton.hpp"

namespace cfgrepair {

enum class IntersectMode { standard, no_reach, no_dedup, no_eps, none };

std::string to_string(IntersectMode m);
/// Accepts default, no_reach, no_dedup, no_eps, none.
IntersectMode parse_intersect_mode(const std::string& s);
std::vector<IntersectMode> all_intersect_modes();

bool transitions_match(const Transition& tg, const Transition& tr);

struct IntersectResult {
    TreeAutomaton automaton;
    /// Final state name -> state of the left operand it came from.
    std::map<std::string, std::string> left_of;
};

/// `base_names` maps left states to the stem used when renaming (default: the left state itself).
IntersectResult intersect_traced(const TreeAutomaton& a_g, const TreeAutomaton& a_r,
                                 IntersectMode mode = IntersectMode::standard,
                                 const std::map<std::string, std::string>& base_names = {});

TreeAutomaton intersect(const TreeAutomaton& a_g, const TreeAutomaton& a_r,
                        IntersectMode mode = IntersectMode::standard);

/// Pairs (x, y) whose producing transitions agree once x and y are identified; x precedes y in `order`.
std::vector<std::pair<std::string, std::string>> find_dup_states(const std::vector<std::string>& order,
                                                                 const std::vector<Transition>& transitions);

/// Merges duplicate states until none remain; the earlier state in `order` survives.
TreeAutomaton remove_duplicates(const TreeAutomaton& a, const std::vector<std::string>& order);

TreeAutomaton introduce_epsilons(const TreeAutomaton& a);

/// Drops transitions whose trees another transition of the same or an ε-lower state already covers.
TreeAutomaton prune_subsumed(const TreeAutomaton& a);

/// Removes unproductive states and states unreachable from the final ones.
TreeAutomaton trim(const TreeAutomaton& a);

TreeAutomaton naive_intersect(const TreeAutomaton& a_g, const TreeAutomaton& a_r);

}  // namespace cfgrepair
