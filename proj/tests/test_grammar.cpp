#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "support.hpp"

using namespace cfgrepair;
using namespace testsupport;

namespace {

std::set<std::string> names_of(const std::vector<RankedSymbol>& a) {
    std::set<std::string> out;
    for (auto& s : a) out.insert(s.name());
    return out;
}

/// Random valid grammar: every nonterminal gets at least one production.
Grammar random_grammar(std::mt19937& rng) {
    Grammar g;
    std::uniform_int_distribution<int> nt_count(1, 4), t_count(1, 4), prod_count(1, 3), len(0, 4), coin(0, 1);
    int nn = nt_count(rng), nt = t_count(rng);
    std::vector<std::string> nts, ts;
    for (int i = 0; i < nn; ++i) nts.push_back("n" + std::to_string(i));
    for (int i = 0; i < nt; ++i) ts.push_back("T" + std::to_string(i));
    g.nonterminals = {nts.begin(), nts.end()};
    g.terminals = {ts.begin(), ts.end()};
    g.start = nts[0];
    for (auto& n : nts) {
        int k = prod_count(rng);
        for (int i = 0; i < k; ++i) {
            Production p;
            p.lhs = n;
            int l = len(rng);
            for (int j = 0; j < l; ++j) {
                if (coin(rng)) p.rhs.push_back(nts[std::uniform_int_distribution<int>(0, nn - 1)(rng)]);
                else p.rhs.push_back(ts[std::uniform_int_distribution<int>(0, nt - 1)(rng)]);
            }
            if (p.rhs.size() == 1 && g.is_nonterminal(p.rhs[0]) && coin(rng)) p.pass_through = true;
            bool dup = std::any_of(g.productions.begin(), g.productions.end(),
                                   [&](const Production& q) { return q.lhs == p.lhs && q.rhs == p.rhs; });
            if (!dup) g.productions.push_back(p);
        }
    }
    return g;
}

}  // namespace

TEST_CASE("stmt_expr grammar parses with the declared symbols") {
    auto g = grammar("stmt_expr.cfg");
    CHECK(g.start == "stmt");
    CHECK(g.nonterminals == std::set<std::string>{"stmt", "decl", "expr", "ident"});
    CHECK(g.terminals == kStmtExprTerminals);
    CHECK(g.productions.size() == 10);
    CHECK(g.productions[2].rhs == std::vector<std::string>{"IF", "expr", "THEN", "stmt", "ELSE", "stmt"});
}

TEST_CASE("ranked alphabet of stmt_expr") {
    auto g = grammar("stmt_expr.cfg");
    auto a = ranked_alphabet(g);
    CHECK(a.size() == g.productions.size());
    CHECK(names_of(a) == std::set<std::string>{"(SEMI,2)", "(IF,4)", "(IF,6)", "(TINT,4)", "(PLUS,3)", "(STAR,3)",
                                               "(INT,1)", "(LPAREN,3)", "(δ,1)", "(IDENT,1)"});
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].prod_index == i);
}

TEST_CASE("ranked symbol naming rules") {
    SUBCASE("single production") {
        auto g = parse_grammar("%start s\n%token A\ns : A ;\n");
        CHECK(names_of(ranked_alphabet(g)) == std::set<std::string>{"(A,1)"});
    }
    SUBCASE("same first terminal, different rank: no suffix") {
        auto g = parse_grammar("%start e\n%token A\ne : A e | A e e | A ;\n");
        CHECK(names_of(ranked_alphabet(g)) == std::set<std::string>{"(A,2)", "(A,3)", "(A,1)"});
    }
    SUBCASE("collision on first terminal and rank gets ordinals") {
        auto g = parse_grammar("%start e\n%token A B\ne : A e | A B | B ;\n");
        auto a = ranked_alphabet(g);
        CHECK(a[0].name() == "(A,2)");
        CHECK(a[1].name() == "(A#1,2)");
        CHECK(a[2].name() == "(B,1)");
    }
    SUBCASE("no terminal gives delta; pass-through gives epsilon") {
        auto g = parse_grammar("%start s\n%token A\ns : t t | t ; # pass-through\nt : A ;\n");
        auto a = ranked_alphabet(g);
        CHECK(a[0].name() == "(δ,2)");
        CHECK(a[1].name() == "(ε,1)");
        CHECK(g.productions[1].pass_through);
    }
    SUBCASE("empty rhs has rank zero") {
        auto g = parse_grammar("%start s\n%token A\ns : A | ;\n");
        CHECK(ranked_alphabet(g)[1].rank == 0);
    }
}

TEST_CASE("serialization round trips") {
    for (auto& name : benchmark_names()) {
        auto g = grammar(name);
        CHECK(parse_grammar(serialize_grammar(g)) == g);
    }
    auto empty = parse_grammar("%start s\n%token A\ns : A | ;\n");
    CHECK(serialize_grammar(empty).find("s : ;") != std::string::npos);
}

TEST_CASE("round trip over random grammars") {
    std::mt19937 rng(20261018);
    for (int i = 0; i < 300; ++i) {
        auto g = random_grammar(rng);
        REQUIRE_NOTHROW(validate_grammar(g));
        auto text = serialize_grammar(g);
        auto back = parse_grammar(text);
        CHECK_MESSAGE(back == g, text);
        auto a = ranked_alphabet(g);
        CHECK(a.size() == g.productions.size());
        CHECK(names_of(a).size() == a.size());
    }
}

TEST_CASE("pass-through annotation survives serialization") {
    auto g = parse_grammar("%start s\n%token A\ns : t ; # pass-through\nt : A ;\n");
    auto text = serialize_grammar(g);
    CHECK(text.find("s : t ; # pass-through") != std::string::npos);
    CHECK(parse_grammar(text).productions[0].pass_through);
}

TEST_CASE("malformed grammars are rejected with positions") {
    CHECK_THROWS_AS(parse_grammar("%token A\ns : A ;\n"), GrammarError);
    CHECK_THROWS_AS(parse_grammar("%start s\n%token A\ns : B ;\n"), GrammarError);
    CHECK_THROWS_AS(parse_grammar("%start s\n%token A\ns : A\n"), GrammarError);
    CHECK_THROWS_AS(parse_grammar("%start s\n%token s\ns : s ;\n"), GrammarError);
    CHECK_THROWS_AS(parse_grammar("%start s\n%token A\ns : A ; s : A ;\n"), GrammarError);
    CHECK_THROWS_AS(parse_grammar("%start s\n%token A\ns : A A ; # pass-through\n"), GrammarError);
    CHECK_THROWS_AS(parse_grammar("%start s\n%token A\ns : 9x ;\n"), GrammarError);
    CHECK_THROWS_AS(load_grammar(grammar_path("missing.cfg")), GrammarError);
    try {
        parse_grammar("%start s\n%token A\ns : A B ;\n");
        FAIL("expected an error");
    } catch (const GrammarError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 7);
    }
}

TEST_CASE("comments and alternatives") {
    auto g = parse_grammar("# header\n%start s # start\n%token A B\ns : A # first\n  | B\n  ;\n");
    CHECK(g.productions.size() == 2);
    CHECK(g.productions[1].rhs == std::vector<std::string>{"B"});
}

TEST_CASE("closures and trivial productions") {
    auto g = grammar("stmt_expr.cfg");
    CHECK(productive_nonterminals(g) == g.nonterminals);
    CHECK(reachable_nonterminals(g) == g.nonterminals);
    CHECK(is_trivial_production(g, 4));   // ident : IDENT
    CHECK(!is_trivial_production(g, 7));  // expr : INT shares expr with non-trivial productions
    auto t = grammar("trivial.cfg");
    std::size_t trivial = 0;
    for (std::size_t i = 0; i < t.productions.size(); ++i) trivial += is_trivial_production(t, i);
    CHECK(trivial == 2);
    auto p = parse_grammar("%start s\n%token A\ns : t ; # pass-through\nt : u ; # pass-through\nu : A ;\n");
    CHECK(pass_through_closure(p, "s") == std::set<std::string>{"s", "t", "u"});
}
