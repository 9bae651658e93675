#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace cfgrepair;
using namespace testsupport;

namespace {

std::vector<std::string> rendered(const std::vector<Tree>& ts) {
    std::vector<std::string> out;
    for (auto& t : ts) out.push_back(tree_to_string(t));
    std::sort(out.begin(), out.end());
    return out;
}

/// Grammar automaton and learned automaton of every finished scenario of a benchmark.
std::vector<std::pair<TreeAutomaton, TreeAutomaton>> operand_pairs(const std::string& name) {
    std::vector<std::pair<TreeAutomaton, TreeAutomaton>> out;
    sweep_scenarios(grammar(name), [&](const RepairSession& s, const std::vector<int>&) {
        if (s.round() > 0) out.push_back({s.last_a_g(), s.last_a_r()});
    });
    return out;
}

}  // namespace

TEST_CASE("intersection of the left-associative answers") {
    auto a_g = grammar_automaton_golden();
    auto a_r = learned_automaton_golden();
    auto res = intersect(a_g, a_r);
    auto golden = repaired_automaton_golden();
    CHECK(res.transitions.size() == 13);
    CHECK(same_structure(res, golden));
    CHECK(isomorphic(res, golden));
    CHECK(res.finals == std::set<std::string>{"stmt0"});
    auto traced = intersect_traced(a_g, a_r);
    CHECK(traced.left_of.at("expr2") == "expr");
    CHECK(traced.left_of.at("stmt1") == "stmt");
    CHECK(traced.left_of.at("decl") == "decl");
}

TEST_CASE("modes") {
    for (auto m : all_intersect_modes()) CHECK(parse_intersect_mode(to_string(m)) == m);
    CHECK(parse_intersect_mode("default") == IntersectMode::standard);
    CHECK_THROWS_AS(parse_intersect_mode("fast"), std::invalid_argument);
    CHECK(all_intersect_modes().size() == 5);
}

TEST_CASE("transition matching") {
    std::set<std::string> st = {"stmt", "decl", "e0", "e1"};
    auto tg = parse_transition("stmt <- (SEMI,2) decl SEMI", st);
    CHECK(transitions_match(tg, parse_transition("e0 <- (SEMI,2) e1 SEMI", st)));
    CHECK(!transitions_match(tg, parse_transition("e0 <- (SEMI,2) e1 PLUS", st)));
    CHECK(!transitions_match(tg, parse_transition("e0 <- (SEMI,2) SEMI e1", st)));
    CHECK(!transitions_match(tg, parse_transition("e0 <- (SEMI,3) e1 SEMI e1", st)));
}

TEST_CASE("duplicate states") {
    std::set<std::string> st = {"s", "x", "y", "z"};
    auto a = make_automaton(st, "s", {"P", "I", "J"},
                            {"s <- (F,2) x y", "x <- (P,3) x P y", "x <- (I,1) I", "y <- (P,3) x P y",
                             "y <- (I,1) I", "z <- (P,3) x P z", "z <- (J,1) J"});
    std::vector<std::string> order = {"s", "x", "y", "z"};
    auto dups = find_dup_states(order, a.transitions);
    CHECK(dups == std::vector<std::pair<std::string, std::string>>{{"x", "y"}});

    auto merged = remove_duplicates(a, order);
    CHECK(merged.states == std::set<std::string>{"s", "x", "z"});
    CHECK(merged.transition_set().count(parse_transition("s <- (F,2) x x", st)));
    CHECK(merged.transition_set().count(parse_transition("x <- (P,3) x P x", st)));
    CHECK(merged.transitions.size() == 5);
    CHECK(bounded_equal({&a, &merged}, 4));

    // the surviving state is the earlier one in the order
    auto flipped = remove_duplicates(a, {"s", "y", "x", "z"});
    CHECK(flipped.states == std::set<std::string>{"s", "y", "z"});
}

TEST_CASE("epsilon introduction and pruning") {
    std::set<std::string> st = {"s", "p", "q"};
    auto a = make_automaton(st, "s", {"A", "B", "C"},
                            {"s <- (G,2) p q", "p <- (A,1) A", "q <- (A,1) A", "q <- (B,1) B"});
    auto e = introduce_epsilons(a);
    CHECK(e.transition_set().count(parse_transition("q <- (ε,1) p", st)));
    CHECK(!e.transition_set().count(parse_transition("q <- (A,1) A", st)));
    CHECK(bounded_equal({&a, &e}, 3));

    auto b = make_automaton(st, "s", {"A", "B"},
                            {"s <- (ε,1) p", "s <- (ε,1) q", "p <- (ε,1) q", "p <- (A,1) A", "q <- (A,1) A",
                             "q <- (B,1) B", "s <- (A,1) A"});
    auto pruned = prune_subsumed(b);
    CHECK(pruned.transition_set() == std::set<Transition>{parse_transition("s <- (ε,1) p", st),
                                                          parse_transition("p <- (ε,1) q", st),
                                                          parse_transition("q <- (A,1) A", st),
                                                          parse_transition("q <- (B,1) B", st)});
    CHECK(bounded_equal({&b, &pruned}, 3));
}

TEST_CASE("trim") {
    std::set<std::string> st = {"s", "p", "dead", "lost"};
    auto a = make_automaton(st, "s", {"A"},
                            {"s <- (A,1) A", "s <- (G,2) p dead", "p <- (A,1) A", "dead <- (G,2) dead p",
                             "lost <- (A,1) A"});
    auto t = trim(a);
    CHECK(t.states == std::set<std::string>{"s"});
    CHECK(t.transitions.size() == 1);
}

TEST_CASE("golden operands: every mode agrees with the naive product and with both operands") {
    auto a_g = grammar_automaton_golden();
    auto a_r = learned_automaton_golden();
    auto naive = naive_intersect(a_g, a_r);
    std::string why;
    for (auto m : all_intersect_modes()) {
        auto res = intersect(a_g, a_r, m);
        CHECK_NOTHROW(validate_automaton(res));
        CHECK_MESSAGE(bounded_equal({&res, &naive}, 6, &why), to_string(m) << ": " << why);
    }
    // intersection language = trees accepted by both operands
    Explorer ex({&naive, &a_g, &a_r});
    for (auto& s : ex.run(6)) CHECK(ex.accepted(s, 0) == (ex.accepted(s, 1) && ex.accepted(s, 2)));

    auto direct = enumerate_trees(a_g, 4);
    std::vector<Tree> both;
    for (auto& t : direct)
        if (accepts(a_r, t)) both.push_back(t);
    CHECK(rendered(both) == rendered(enumerate_trees(intersect(a_g, a_r), 4)));
}

TEST_CASE("reachability pruning does not change the result") {
    for (auto& name : {"stmt_expr.cfg", "cycle.cfg", "trivial.cfg", "if_star.cfg"})
        for (auto& [a_g, a_r] : operand_pairs(name))
            CHECK_MESSAGE(same_structure(intersect(a_g, a_r), intersect(a_g, a_r, IntersectMode::no_reach)), name);
}

TEST_CASE("benchmark operands: modes and the naive product accept the same bounded trees") {
    for (auto& name : {"stmt_expr.cfg", "cycle.cfg", "trivial.cfg", "if_star.cfg"}) {
        auto pairs = operand_pairs(name);
        CHECK(!pairs.empty());
        for (auto& [a_g, a_r] : pairs) {
            auto naive = naive_intersect(a_g, a_r);
            std::vector<TreeAutomaton> results;
            for (auto m : all_intersect_modes()) results.push_back(intersect(a_g, a_r, m));
            std::vector<const TreeAutomaton*> autos = {&naive};
            for (auto& r : results) autos.push_back(&r);
            std::string why;
            CHECK_MESSAGE(bounded_equal(autos, 5, &why), name << ": " << why);
            CHECK(results.front().transitions.size() <= results.back().transitions.size());
        }
    }
}
