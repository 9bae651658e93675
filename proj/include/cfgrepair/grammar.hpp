#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfgrepair {

/// Label used for productions whose rhs holds no terminal.
inline const std::string kDelta = "\xCE\xB4";    // δ
/// Label of ε-transitions and of pass-through productions.
inline const std::string kEpsilon = "\xCE\xB5";  // ε

struct Production {
    std::string lhs;
    std::vector<std::string> rhs;
    /// Unit production introduced by repair from an ε-transition.
    bool pass_through = false;

    bool operator==(const Production&) const = default;
};

struct Grammar {
    std::set<std::string> nonterminals;
    std::set<std::string> terminals;
    std::string start;
    std::vector<Production> productions;

    bool operator==(const Grammar&) const = default;

    bool is_terminal(const std::string& s) const { return terminals.count(s) != 0; }
    bool is_nonterminal(const std::string& s) const { return nonterminals.count(s) != 0; }

    /// Indices of the productions of `lhs`, in file order.
    std::vector<std::size_t> productions_of(const std::string& lhs) const;
};

/// Sym(p) and Rank(p) of one production.
struct RankedSymbol {
    std::string sym;
    std::size_t rank = 0;
    std::size_t prod_index = 0;

    /// Printable name, e.g. "(PLUS,3)".
    std::string name() const;

    bool operator==(const RankedSymbol&) const = default;
    auto operator<=>(const RankedSymbol&) const = default;
};

class GrammarError : public std::runtime_error {
public:
    GrammarError(const std::string& msg, std::size_t line = 0, std::size_t column = 0);
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

Grammar parse_grammar(std::string_view text);
Grammar load_grammar(const std::string& path);
std::string serialize_grammar(const Grammar& g);

/// Throws GrammarError when an invariant of Grammar is violated.
void validate_grammar(const Grammar& g);

std::vector<RankedSymbol> ranked_alphabet(const Grammar& g);

/// Printable name -> ranked symbol.
std::map<std::string, RankedSymbol> symbol_table(const Grammar& g);

/// Nonterminals reachable from `nt` through pass-through productions only (including `nt`).
std::set<std::string> pass_through_closure(const Grammar& g, const std::string& nt);

/// Nonterminals that derive at least one finite terminal string.
std::set<std::string> productive_nonterminals(const Grammar& g);

/// Nonterminals reachable from the start symbol.
std::set<std::string> reachable_nonterminals(const Grammar& g);

bool is_valid_symbol_name(std::string_view s);

/// Rank-1 production with a terminal child whose lhs (not the start symbol) only has such productions.
bool is_trivial_production(const Grammar& g, std::size_t prod);

}  // namespace cfgrepair
