#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "cfgrepair/grammar.hpp"
#include "cfgrepair/intersection.hpp"
#include "cfgrepair/learning.hpp"
#include "cfgrepair/lr1.hpp"
#include "cfgrepair/tree_automaton.hpp"
#include "cfgrepair/tree_examples.hpp"

namespace cfgrepair {

enum class Verdict { in_progress, repaired, non_addressable, stalled };

std::string to_string(Verdict v);

class SessionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RoundIncomplete : public SessionError {
public:
    using SessionError::SessionError;
};

class AnswerMismatch : public SessionError {
public:
    using SessionError::SessionError;
};

enum class PromptStatus { pending, answered, inferred };

struct PromptRecord {
    Prompt prompt;
    std::size_t round = 0;
    PromptStatus status = PromptStatus::pending;
    /// The user's choice, or the one implied by earlier facts.
    std::optional<int> choice;
};

struct PhaseTimings {
    double conversion = 0;
    double learning = 0;
    double intersection = 0;
};

struct ResidualConflict {
    Conflict conflict;
    std::string reason;
};

struct NextPrompt {
    enum class Kind { prompt, round_complete, done };
    Kind kind = Kind::done;
    std::optional<Prompt> prompt;
    Verdict verdict = Verdict::in_progress;
};

class RepairSession {
public:
    explicit RepairSession(Grammar g, IntersectMode mode = IntersectMode::standard);

    const Grammar& original() const { return original_; }
    const Grammar& current() const { return current_; }
    std::size_t round() const { return round_; }
    Verdict verdict() const { return verdict_; }
    const std::vector<std::string>& verdict_reasons() const { return reasons_; }
    const Facts& facts() const { return facts_; }
    /// Every rejected example so far, answered or inferred.
    const std::vector<TreeExample>& t_minus() const { return t_minus_; }
    const std::vector<PromptRecord>& prompts() const { return prompts_; }
    std::vector<Prompt> pending() const;
    std::size_t prompts_issued() const;
    std::size_t classes_seen() const { return classes_seen_; }
    const std::vector<ResidualConflict>& residual_conflicts() const { return residual_; }
    const PhaseTimings& timings() const { return timings_; }
    std::size_t round_cap() const { return round_cap_; }
    /// Messages about reused facts and inferred prompts.
    const std::vector<std::string>& log() const { return log_; }

    /// Artifacts of the last step.
    const PrecedenceState& last_learning() const { return last_state_; }
    const TreeAutomaton& last_a_g() const { return last_a_g_; }
    const TreeAutomaton& last_a_r() const { return last_a_r_; }
    const TreeAutomaton& last_a_res() const { return last_a_res_; }
    const std::vector<TreeExample>& last_round_t_minus() const { return last_round_t_minus_; }

    /// Name of the original symbol a current symbol descends from.
    std::string origin_name(const RankedSymbol& s) const;

    NextPrompt next_prompt() const;
    void answer_prompt(std::size_t id, int choice);
    void step_repair();

private:
    void analyze();
    std::string key_of(const RankedSymbol& s) const;
    void settle_inferred();
    std::vector<std::string> fingerprint() const;
    bool stale(const std::vector<Conflict>& conflicts) const;

    Grammar original_;
    Grammar current_;
    IntersectMode mode_;
    std::size_t round_ = 0;
    std::size_t round_cap_ = 0;
    Verdict verdict_ = Verdict::in_progress;
    std::vector<std::string> reasons_;
    Facts facts_;
    std::vector<TreeExample> t_minus_;
    std::vector<TreeExample> round_t_minus_;
    std::vector<PromptRecord> prompts_;
    std::vector<ConflictClass> classes_;
    std::vector<Conflict> conflicts_;
    std::vector<ResidualConflict> residual_;
    std::vector<std::string> fingerprint_;
    std::size_t classes_seen_ = 0;
    PhaseTimings timings_;
    std::vector<std::string> log_;

    std::vector<RankedSymbol> original_alphabet_;
    /// current production -> original production (npos for pass-through)
    std::vector<std::size_t> origin_prod_;
    /// current nonterminal -> original nonterminal
    std::map<std::string, std::string> origin_nt_;
    /// symbols whose class partner shares their origin this round
    std::set<RankedSymbol> local_keys_;

    PrecedenceState last_state_;
    TreeAutomaton last_a_g_, last_a_r_, last_a_res_;
    std::vector<TreeExample> last_round_t_minus_;
};

RepairSession start_session(const Grammar& g, IntersectMode mode = IntersectMode::standard);

struct RepairReport {
    std::size_t rounds = 0;
    std::size_t prompts_issued = 0;
    Verdict verdict = Verdict::in_progress;
    std::vector<std::string> reasons;
    Grammar final;
    std::vector<ResidualConflict> residual_conflicts;
    PhaseTimings timings;
};

RepairReport make_report(const RepairSession& s);
nlohmann::json report_to_json(const RepairReport& r);
nlohmann::json conflict_to_json(const Conflict& c);

/// One 0 or 1 per line; `#` starts a comment.
std::vector<int> parse_answers(const std::string& text);
std::vector<int> load_answers(const std::string& path);

RepairReport run_scripted(const Grammar& g, const std::vector<int>& answers,
                          IntersectMode mode = IntersectMode::standard);

}  // namespace cfgrepair
