#include "cfgrepair/session.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

namespace cfgrepair {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::in_progress: return "in-progress";
        case Verdict::repaired: return "repaired";
        case Verdict::non_addressable: return "non-addressable";
        case Verdict::stalled: return "stalled";
    }
    return "in-progress";
}

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace

RepairSession::RepairSession(Grammar g, IntersectMode mode) : original_(std::move(g)), mode_(mode) {
    validate_grammar(original_);
    current_ = original_;
    original_alphabet_ = ranked_alphabet(original_);
    for (std::size_t i = 0; i < original_.productions.size(); ++i)
        origin_prod_.push_back(original_.productions[i].pass_through ? npos : i);
    for (auto& n : original_.nonterminals) origin_nt_[n] = n;
    round_cap_ = std::max<std::size_t>(1, original_alphabet_.size() * original_alphabet_.size());
    analyze();
    if (verdict_ == Verdict::in_progress) fingerprint_ = fingerprint();
}

RepairSession start_session(const Grammar& g, IntersectMode mode) { return RepairSession(g, mode); }

std::string RepairSession::origin_name(const RankedSymbol& s) const {
    auto o = origin_prod_.at(s.prod_index);
    if (o == npos) return "r" + std::to_string(round_) + ":" + s.name();
    return original_alphabet_.at(o).name();
}

std::string RepairSession::key_of(const RankedSymbol& s) const {
    if (local_keys_.count(s)) return "r" + std::to_string(round_) + ":" + s.name();
    return origin_name(s);
}

void RepairSession::analyze() {
    conflicts_ = detect_conflicts(build_lr1(current_));
    auto cls = classify_conflicts(current_, conflicts_);
    classes_ = cls.addressable;
    residual_.clear();
    for (auto& u : cls.non_addressable) residual_.push_back({u.conflict, u.reason});
    local_keys_.clear();
    for (auto& c : classes_)
        if (c.kind == ExampleKind::precedence && origin_name(c.first) == origin_name(c.second)) {
            local_keys_.insert(c.first);
            local_keys_.insert(c.second);
        }
    round_t_minus_.clear();
    reasons_.clear();
    if (conflicts_.empty()) {
        verdict_ = Verdict::repaired;
        return;
    }
    if (classes_.empty()) {
        verdict_ = Verdict::non_addressable;
        for (auto& r : residual_) reasons_.push_back(r.reason);
        return;
    }
    verdict_ = Verdict::in_progress;
    classes_seen_ += classes_.size();
    auto partition = partition_conflicts(current_, classes_);
    for (auto& c : order_classes(partition, classes_)) {
        PromptRecord rec;
        rec.prompt = make_prompt(current_, c, prompts_.size());
        rec.round = round_;
        prompts_.push_back(std::move(rec));
    }
    settle_inferred();
}

void RepairSession::settle_inferred() {
    auto key = [this](const RankedSymbol& s) { return key_of(s); };
    for (auto& rec : prompts_) {
        if (rec.round != round_ || rec.status != PromptStatus::pending) continue;
        auto implied = implied_choice(rec.prompt, facts_, key);
        if (!implied) continue;
        rec.status = PromptStatus::inferred;
        rec.choice = *implied;
        const auto& rejected = *implied == 0 ? rec.prompt.option1 : rec.prompt.option0;
        round_t_minus_.push_back(rejected);
        t_minus_.push_back(rejected);
        log_.push_back("prompt " + std::to_string(rec.prompt.id) + " (" + rec.prompt.cls.key() +
                       ") settled by earlier answers: option " + std::to_string(*implied));
    }
}

std::vector<Prompt> RepairSession::pending() const {
    std::vector<Prompt> out;
    for (auto& rec : prompts_)
        if (rec.round == round_ && rec.status == PromptStatus::pending) out.push_back(rec.prompt);
    return out;
}

std::size_t RepairSession::prompts_issued() const {
    return static_cast<std::size_t>(std::count_if(prompts_.begin(), prompts_.end(), [](const PromptRecord& r) {
        return r.status == PromptStatus::answered;
    }));
}

NextPrompt RepairSession::next_prompt() const {
    NextPrompt out;
    out.verdict = verdict_;
    if (verdict_ != Verdict::in_progress) {
        out.kind = NextPrompt::Kind::done;
        return out;
    }
    for (auto& rec : prompts_)
        if (rec.round == round_ && rec.status == PromptStatus::pending) {
            out.kind = NextPrompt::Kind::prompt;
            out.prompt = rec.prompt;
            return out;
        }
    out.kind = NextPrompt::Kind::round_complete;
    return out;
}

void RepairSession::answer_prompt(std::size_t id, int choice) {
    if (choice != 0 && choice != 1) throw SessionError("choice must be 0 or 1");
    if (id >= prompts_.size()) throw SessionError("unknown prompt id " + std::to_string(id));
    auto& rec = prompts_[id];
    if (rec.round != round_) throw SessionError("prompt " + std::to_string(id) + " belongs to an earlier round");
    if (rec.status == PromptStatus::answered) throw SessionError("prompt " + std::to_string(id) + " was already answered");
    if (rec.status == PromptStatus::inferred) {
        if (rec.choice != choice)
            throw ContradictionError("prompt " + std::to_string(id) + " is settled by earlier answers as option " +
                                     std::to_string(*rec.choice));
        return;
    }
    auto key = [this](const RankedSymbol& s) { return key_of(s); };
    auto outcome = record_answer(rec.prompt, choice, facts_, key);
    rec.status = PromptStatus::answered;
    rec.choice = choice;
    round_t_minus_.push_back(outcome.rejected);
    t_minus_.push_back(outcome.rejected);
    settle_inferred();
}

std::vector<std::string> RepairSession::fingerprint() const {
    std::vector<std::string> out;
    for (auto& c : classes_)
        out.push_back(key_of(c.first) + "|" + key_of(c.second) + "|" + to_string(c.kind));
    std::sort(out.begin(), out.end());
    out.push_back("#" + std::to_string(conflicts_.size()));
    return out;
}

bool RepairSession::stale(const std::vector<Conflict>& conflicts) const {
    if (conflicts.empty()) return false;
    for (auto& c : conflicts) {
        std::set<std::string> origins;
        for (auto p : c.involved_productions) {
            if (p >= current_.productions.size()) return false;
            if (current_.productions[p].pass_through) continue;
            auto o = origin_prod_.at(p);
            if (o == npos) return false;
            origins.insert(original_alphabet_.at(o).name());
        }
        if (origins.empty()) return false;
        if (origins.size() == 1) {
            auto& o = *origins.begin();
            bool known = facts_.assoc.count(o) != 0;
            for (auto& [a, b] : facts_.less) known = known || a == o || b == o;
            if (!known) return false;
            continue;
        }
        for (auto i = origins.begin(); i != origins.end(); ++i)
            for (auto j = std::next(i); j != origins.end(); ++j)
                if (!facts_.decides(*i, *j)) return false;
    }
    return true;
}

void RepairSession::step_repair() {
    if (verdict_ != Verdict::in_progress) return;
    if (!pending().empty()) throw RoundIncomplete("round " + std::to_string(round_) + " still has pending prompts");

    auto key = [this](const RankedSymbol& s) { return key_of(s); };
    Stopwatch learn_clock;
    PrecedenceState st;
    st.o_bp = base_precedence(current_, &st.warnings);
    st.levels = nonterminal_levels(current_);
    auto partition = partition_conflicts(current_, classes_);
    st.m_to = build_mto(facts_, partition, st.o_bp, classes_, key);
    auto [o_a, o_p] = learn_oa_op(round_t_minus_, st.m_to, current_);
    st.o_a = o_a;
    st.o_p = o_p;
    auto a_r = gen_ta(o_a, o_p, current_, round_t_minus_);
    timings_.learning += learn_clock.ms();

    Stopwatch convert_clock;
    auto a_g = cfg_to_ta(current_);
    timings_.conversion += convert_clock.ms();

    Stopwatch intersect_clock;
    std::map<std::string, std::string> base_names;
    for (auto& n : current_.nonterminals) base_names[n] = origin_nt_.count(n) ? origin_nt_.at(n) : n;
    auto res = intersect_traced(a_g, a_r, mode_, base_names);
    timings_.intersection += intersect_clock.ms();

    Stopwatch back_clock;
    CfgConversion conv;
    try {
        conv = ta_to_cfg_traced(res.automaton);
    } catch (const AutomatonError& e) {
        throw SessionError(std::string("repair produced an unusable automaton: ") + e.what());
    }
    timings_.conversion += back_clock.ms();

    auto table = symbol_table(current_);
    std::vector<std::size_t> origin_prod;
    for (auto& l : conv.source_labels) {
        if (l.is_epsilon()) {
            origin_prod.push_back(npos);
            continue;
        }
        auto it = table.find(l.name());
        origin_prod.push_back(it == table.end() ? npos : origin_prod_.at(it->second.prod_index));
    }
    std::map<std::string, std::string> origin_nt;
    for (auto& [name, left] : res.left_of) origin_nt[name] = origin_nt_.count(left) ? origin_nt_.at(left) : left;

    last_state_ = std::move(st);
    last_a_g_ = std::move(a_g);
    last_a_r_ = std::move(a_r);
    last_a_res_ = res.automaton;
    last_round_t_minus_ = round_t_minus_;

    current_ = std::move(conv.grammar);
    origin_prod_ = std::move(origin_prod);
    origin_nt_ = std::move(origin_nt);
    ++round_;

    auto previous = fingerprint_;
    analyze();
    if (verdict_ == Verdict::repaired) return;
    auto now = fingerprint();
    fingerprint_ = now;
    if (now == previous) {
        verdict_ = Verdict::stalled;
        reasons_ = {"conflicts unchanged by the last round"};
    } else if (classes_.empty() && stale(conflicts_)) {
        verdict_ = Verdict::stalled;
        reasons_ = {"remaining conflicts involve only symbols whose order is already decided"};
    } else if (verdict_ == Verdict::in_progress && round_ >= round_cap_) {
        verdict_ = Verdict::stalled;
        reasons_ = {"round cap"};
    }
    if (verdict_ == Verdict::stalled) {
        residual_.clear();
        auto cls = classify_conflicts(current_, conflicts_);
        for (auto& u : cls.non_addressable) residual_.push_back({u.conflict, u.reason});
        for (auto& c : cls.addressable)
            for (auto& [state, la] : c.source_conflicts)
                for (auto& conflict : conflicts_)
                    if (conflict.state == state && conflict.lookahead == la)
                        residual_.push_back({conflict, "unresolved class " + c.key()});
        std::erase_if(prompts_, [&](const PromptRecord& r) {
            return r.round == round_ && r.status == PromptStatus::pending;
        });
    }
}

RepairReport make_report(const RepairSession& s) {
    RepairReport r;
    r.rounds = s.round();
    r.prompts_issued = s.prompts_issued();
    r.verdict = s.verdict();
    r.reasons = s.verdict_reasons();
    r.final = s.current();
    r.residual_conflicts = s.residual_conflicts();
    r.timings = s.timings();
    return r;
}

nlohmann::json conflict_to_json(const Conflict& c) {
    return {{"state", c.state},
            {"lookahead", c.lookahead},
            {"kind", to_string(c.kind)},
            {"productions", std::vector<std::size_t>(c.involved_productions.begin(), c.involved_productions.end())}};
}

nlohmann::json report_to_json(const RepairReport& r) {
    auto residual = nlohmann::json::array();
    for (auto& c : r.residual_conflicts) {
        auto j = conflict_to_json(c.conflict);
        j["reason"] = c.reason;
        residual.push_back(j);
    }
    nlohmann::json out = {{"rounds", r.rounds},
                          {"prompts_issued", r.prompts_issued},
                          {"verdict", to_string(r.verdict)},
                          {"timings_ms",
                           {{"conversion", r.timings.conversion},
                            {"learning", r.timings.learning},
                            {"intersection", r.timings.intersection}}},
                          {"residual_conflicts", residual}};
    if (!r.reasons.empty()) out["reasons"] = r.reasons;
    return out;
}

std::vector<int> parse_answers(const std::string& text) {
    std::vector<int> out;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        auto tok = line.substr(b, e - b + 1);
        if (tok != "0" && tok != "1")
            throw AnswerMismatch("line " + std::to_string(lineno) + ": expected 0 or 1, got '" + tok + "'");
        out.push_back(tok == "1");
    }
    return out;
}

std::vector<int> load_answers(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw AnswerMismatch("cannot read answers file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_answers(ss.str());
}

RepairReport run_scripted(const Grammar& g, const std::vector<int>& answers, IntersectMode mode) {
    RepairSession s(g, mode);
    std::size_t k = 0;
    while (true) {
        auto next = s.next_prompt();
        if (next.kind == NextPrompt::Kind::done) break;
        if (next.kind == NextPrompt::Kind::round_complete) {
            s.step_repair();
            continue;
        }
        if (k >= answers.size())
            throw AnswerMismatch("no answer left for prompt " + std::to_string(next.prompt->id) + " (" +
                                 next.prompt->cls.key() + ")");
        s.answer_prompt(next.prompt->id, answers[k++]);
    }
    if (k < answers.size())
        throw AnswerMismatch(std::to_string(answers.size() - k) + " surplus answer(s) after the session ended");
    return make_report(s);
}

}  // namespace cfgrepair
