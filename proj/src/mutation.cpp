/*
 * SPDX-License-Identifier: Apache-2.0
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "heterotest/mutation.hpp"

#include "heterotest/error.hpp"
#include "heterotest/json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

namespace heterotest {

namespace {

const std::vector<std::pair<MutationOperator, const char*>> kNames = {
    {MutationOperator::RuleDelete, "rule-delete"},
    {MutationOperator::RhsTargetSwap, "rhs-target-swap"},
    {MutationOperator::SymbolSubstitute, "symbol-substitute"},
    {MutationOperator::LhsMultiplicityChange, "lhs-multiplicity-change"},
    {MutationOperator::TransitionRetarget, "transition-retarget"},
    {MutationOperator::TransitionDelete, "transition-delete"},
    {MutationOperator::CaseOutputSwap, "case-output-swap"},
    {MutationOperator::MemoryUpdatePerturb, "memory-update-perturb"},
};

struct Candidate {
    MutationOperator op;
    std::string location;
    MutableModel model;
};

bool wanted(const std::vector<MutationOperator>& ops, MutationOperator op)
{
    return std::find(ops.begin(), ops.end(), op) != ops.end();
}

std::string target_name(int t)
{
    return t == 0 ? "here" : std::to_string(t);
}

void psystem_candidates(const PSystem& ps, const std::vector<MutationOperator>& ops,
                        std::vector<Candidate>& out)
{
    for (std::size_t i = 0; i < ps.rules.size(); ++i) {
        const PRule& r = ps.rules[i];
        if (wanted(ops, MutationOperator::RuleDelete)) {
            PSystem m = ps;
            m.rules.erase(m.rules.begin() + static_cast<std::ptrdiff_t>(i));
            out.push_back({MutationOperator::RuleDelete, r.name, std::move(m)});
        }
        for (std::size_t k = 0; k < r.rhs.size(); ++k) {
            const RhsItem& item = r.rhs[k];
            const std::string at = r.name + ".rhs[" + std::to_string(k) + "]";
            if (wanted(ops, MutationOperator::RhsTargetSwap)) {
                std::vector<int> targets;
                if (item.target != 0) {
                    targets.push_back(0);
                } else if (const Membrane* home = ps.membrane(r.compartment)) {
                    targets = home->children;
                    if (home->parent != 0)
                        targets.push_back(home->parent);
                }
                for (int t : targets) {
                    PSystem m = ps;
                    m.rules[i].rhs[k].target = t;
                    out.push_back({MutationOperator::RhsTargetSwap,
                                   at + " (" + item.symbol + "," + target_name(item.target) +
                                       ") -> (" + item.symbol + "," + target_name(t) + ")",
                                   std::move(m)});
                }
            }
            if (wanted(ops, MutationOperator::SymbolSubstitute)) {
                for (const auto& s : ps.alphabet) {
                    if (s == item.symbol)
                        continue;
                    PSystem m = ps;
                    m.rules[i].rhs[k].symbol = s;
                    out.push_back({MutationOperator::SymbolSubstitute,
                                   at + " " + item.symbol + " -> " + s, std::move(m)});
                }
            }
        }
        if (wanted(ops, MutationOperator::LhsMultiplicityChange)) {
            for (const auto& [sym, n] : r.lhs.counts()) {
                for (int delta : {1, -1}) {
                    if (delta < 0 && r.lhs.size() <= 1)
                        continue;
                    PSystem m = ps;
                    Multiset lhs;
                    for (const auto& [s2, n2] : r.lhs.counts())
                        lhs.add(s2, s2 == sym ? n2 + delta : n2);
                    m.rules[i].lhs = lhs;
                    out.push_back({MutationOperator::LhsMultiplicityChange,
                                   r.name + ".lhs " + sym + (delta > 0 ? " +1" : " -1") + " (" +
                                       r.lhs.canonical() + " -> " + lhs.canonical() + ")",
                                   std::move(m)});
                }
            }
        }
    }
}

std::string arc_name(const std::pair<std::string, std::string>& key)
{
    return "(" + key.first + "," + key.second + ")";
}

// Every single-operator variant of one SXM, as (operator, location, model).
void sxm_variants(const Sxm& model, const std::vector<MutationOperator>& ops,
                  const std::function<void(MutationOperator, std::string, Sxm)>& emit)
{
    for (const auto& [key, targets] : model.next_state) {
        for (std::size_t t = 0; t < targets.size(); ++t) {
            if (wanted(ops, MutationOperator::TransitionRetarget)) {
                for (const auto& s : model.states) {
                    if (std::find(targets.begin(), targets.end(), s) != targets.end())
                        continue;
                    Sxm m = model;
                    auto& ts = m.next_state[key];
                    ts[t] = s;
                    std::sort(ts.begin(), ts.end());
                    emit(MutationOperator::TransitionRetarget,
                         arc_name(key) + " -> " + targets[t] + " => " + s, std::move(m));
                }
            }
            if (wanted(ops, MutationOperator::TransitionDelete)) {
                Sxm m = model;
                auto& ts = m.next_state[key];
                ts.erase(ts.begin() + static_cast<std::ptrdiff_t>(t));
                if (ts.empty())
                    m.next_state.erase(key);
                emit(MutationOperator::TransitionDelete, arc_name(key) + " -> " + targets[t],
                     std::move(m));
            }
        }
    }
    for (std::size_t f = 0; f < model.functions.size(); ++f) {
        const ProcessingFunction& fn = model.functions[f];
        const CaseTable* table = fn.case_table();
        if (!table)
            continue;
        const auto& cases = table->cases();
        auto with_row = [&](std::size_t r, Case row) {
            auto rows = cases;
            rows[r] = std::move(row);
            Sxm m = model;
            m.functions[f] = ProcessingFunction(fn.name(), std::make_shared<CaseTable>(rows),
                                                fn.target());
            return m;
        };
        for (std::size_t r = 0; r < cases.size(); ++r) {
            const Case& row = cases[r];
            const std::string at = fn.name() + ".cases[" + std::to_string(r) + "]";
            if (wanted(ops, MutationOperator::CaseOutputSwap) && row.output) {
                for (const auto& o : model.outputs) {
                    if (row.output->kind() == Term::Kind::Literal && row.output->literal_value() == o)
                        continue;
                    Case c = row;
                    c.output = Term::literal(o);
                    emit(MutationOperator::CaseOutputSwap, at + ".output => " + o.to_string(),
                         with_row(r, std::move(c)));
                }
            }
            if (wanted(ops, MutationOperator::MemoryUpdatePerturb)) {
                std::optional<Term> base = row.memory_next;
                if (!base) {
                    if (row.memory.kind() == Pattern::Kind::Variable)
                        base = Term::variable(row.memory.variable_name());
                    else if (row.memory.kind() == Pattern::Kind::Literal)
                        base = Term::literal(row.memory.literal_value());
                }
                if (!base)
                    continue;
                for (const char* op : {"+", "-"}) {
                    Case c = row;
                    c.memory_next = Term::apply(op, {*base, Term::literal(Value::integer(1))});
                    emit(MutationOperator::MemoryUpdatePerturb,
                         at + ".mem_next " + op + "1", with_row(r, std::move(c)));
                }
            }
        }
    }
}

void sxm_candidates(const Sxm& model, const std::vector<MutationOperator>& ops,
                    std::vector<Candidate>& out)
{
    sxm_variants(model, ops, [&](MutationOperator op, std::string loc, Sxm m) {
        out.push_back({op, std::move(loc), std::move(m)});
    });
}

void system_candidates(const CsxmSystem& sys, const std::vector<MutationOperator>& ops,
                       std::vector<Candidate>& out)
{
    for (std::size_t i = 0; i < sys.components.size(); ++i) {
        sxm_variants(sys.components[i].base, ops, [&](MutationOperator op, std::string loc, Sxm m) {
            CsxmSystem s = sys;
            s.components[i].base = std::move(m);
            out.push_back({op, "component " + std::to_string(i + 1) + ": " + loc, std::move(s)});
        });
    }
}

bool is_valid(const MutableModel& m)
{
    if (const auto* ps = std::get_if<PSystem>(&m))
        return validate_psystem(*ps).empty();
    if (const auto* sxm = std::get_if<Sxm>(&m))
        return validate_sxm(*sxm).empty();
    return validate_system(std::get<CsxmSystem>(m)).empty();
}

bool same_model(const MutableModel& a, const MutableModel& b)
{
    if (a.index() != b.index())
        return false;
    if (const auto* ps = std::get_if<PSystem>(&a))
        return *ps == std::get<PSystem>(b);
    if (const auto* sxm = std::get_if<Sxm>(&a))
        return structurally_equal(*sxm, std::get<Sxm>(b));
    return structurally_equal(std::get<CsxmSystem>(a), std::get<CsxmSystem>(b));
}

nlohmann::ordered_json outputs_json(const std::vector<std::vector<Value>>& outs)
{
    auto j = nlohmann::ordered_json::array();
    for (const auto& o : outs) {
        auto seq = nlohmann::ordered_json::array();
        for (const auto& v : o)
            seq.push_back(value_to_ojson(v));
        j.push_back(std::move(seq));
    }
    return j;
}

nlohmann::ordered_json input_json(const std::vector<Value>& in)
{
    auto j = nlohmann::ordered_json::array();
    for (const auto& v : in)
        j.push_back(value_to_ojson(v));
    return j;
}

CsxmSystem ensure_extended(const CsxmSystem& sys)
{
    for (const auto& c : sys.components) {
        if (!c.extended)
            return extend_for_testing(sys);
    }
    return sys;
}

// Systems are observed through their product, whose step graph matches theirs.
Sxm observable(const MutableModel& m)
{
    if (const auto* sxm = std::get_if<Sxm>(&m))
        return *sxm;
    return build_product_sxm(ensure_extended(std::get<CsxmSystem>(m)));
}

using Relation = std::vector<std::vector<Value>>;

struct CaseDifference {
    std::size_t prefix_length = 0;
    bool complete = false;  // terminal-run relation rather than the output stream
    Relation expected;
    Relation observed;
};

std::optional<CaseDifference> case_difference(const Sxm& m, const TestCase& tc)
{
    if (!tc.prefix_outputs.empty()) {
        auto obs = observe_prefixes(m, tc.input);
        for (std::size_t i = 0; i < obs.size(); ++i)
            if (obs[i] != tc.prefix_outputs[i])
                return CaseDifference{i, false, tc.prefix_outputs[i], std::move(obs[i])};
    }
    auto full = observe(m, tc.input);
    if (full != tc.expected_outputs)
        return CaseDifference{tc.input.size(), true, tc.expected_outputs, std::move(full)};
    return std::nullopt;
}

using Frontier = std::set<SxmConfiguration>;

Frontier initial_frontier(const Sxm& m)
{
    Frontier f;
    for (const auto& q : m.initial_states)
        f.insert(initial_configuration(m, q, {}));
    return f;
}

std::set<std::vector<Value>> relation_at(const Sxm& m, const Frontier& f)
{
    std::set<std::vector<Value>> out;
    for (const auto& c : f) {
        if (m.is_terminal(c.state))
            out.insert(c.output);
    }
    return out;
}

Frontier advance(const Sxm& m, const Frontier& f, const Value& sym)
{
    Frontier next;
    for (auto c : f) {
        c.remaining_input = {sym};
        for (auto& n : sxm_step(m, c)) {
            if (n.remaining_input.empty())
                next.insert(std::move(n));
        }
    }
    return next;
}

std::vector<Value> merged_inputs(const Sxm& a, const Sxm& b)
{
    std::set<Value> s(a.inputs.begin(), a.inputs.end());
    s.insert(b.inputs.begin(), b.inputs.end());
    return {s.begin(), s.end()};
}

void count_verdict(ScoreReport& r, Verdict v)
{
    if (v == Verdict::Killed)
        ++r.killed;
    else
        ++r.survived;
    if (v == Verdict::NotKilledBounded)
        ++r.not_killed_bounded;
}

}  // namespace

std::string operator_name(MutationOperator op)
{
    for (const auto& [o, n] : kNames) {
        if (o == op)
            return n;
    }
    return "?";
}

std::optional<MutationOperator> parse_operator(const std::string& name)
{
    for (const auto& [o, n] : kNames) {
        if (name == n)
            return o;
    }
    if (name == "target-swap")
        return MutationOperator::RhsTargetSwap;
    return std::nullopt;
}

std::vector<MutationOperator> psystem_operators()
{
    return {MutationOperator::RuleDelete, MutationOperator::RhsTargetSwap,
            MutationOperator::SymbolSubstitute, MutationOperator::LhsMultiplicityChange};
}

std::vector<MutationOperator> sxm_operators()
{
    return {MutationOperator::TransitionRetarget, MutationOperator::TransitionDelete,
            MutationOperator::CaseOutputSwap, MutationOperator::MemoryUpdatePerturb};
}

MutantSet mutate_model(const MutableModel& model, const std::vector<MutationOperator>& ops_in,
                       std::uint64_t seed, std::size_t count)
{
    if (count < 1)
        throw std::invalid_argument("mutant count must be at least 1");
    const bool is_ps = std::holds_alternative<PSystem>(model);
    std::vector<MutationOperator> ops = ops_in;
    if (ops.empty())
        ops = is_ps ? psystem_operators() : sxm_operators();

    std::vector<Candidate> candidates;
    if (const auto* ps = std::get_if<PSystem>(&model))
        psystem_candidates(*ps, ops, candidates);
    else if (const auto* sxm = std::get_if<Sxm>(&model))
        sxm_candidates(*sxm, ops, candidates);
    else
        system_candidates(std::get<CsxmSystem>(model), ops, candidates);

    std::vector<std::size_t> order(candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng() % i]);

    MutantSet set;
    set.candidates = candidates.size();
    for (std::size_t idx : order) {
        if (set.mutants.size() >= count)
            break;
        Candidate& c = candidates[idx];
        if (!is_valid(c.model)) {
            ++set.invalid;
            continue;
        }
        bool dup = same_model(c.model, model);
        for (const auto& m : set.mutants) {
            if (dup)
                break;
            dup = same_model(c.model, m.model);
        }
        if (dup) {
            ++set.duplicates;
            continue;
        }
        char id[32];
        std::snprintf(id, sizeof id, "m%04zu", set.mutants.size() + 1);
        set.mutants.push_back({id, c.op, std::move(c.location), std::move(c.model)});
    }
    if (set.mutants.empty())
        throw Error(ErrorCode::NoValidMutants,
                    "no valid mutant among " + std::to_string(set.candidates) + " candidates",
                    {{"candidates", set.candidates},
                     {"invalid", set.invalid},
                     {"duplicates", set.duplicates}});
    return set;
}

std::string verdict_name(Verdict v)
{
    switch (v) {
    case Verdict::Killed:
        return "killed";
    case Verdict::Survived:
        return "survived";
    case Verdict::NotKilledBounded:
        return "not killed (bounded)";
    }
    return "?";
}

double ScoreReport::score() const
{
    return total == 0 ? 0.0 : static_cast<double>(killed) / static_cast<double>(total);
}

double ScoreReport::non_equivalent_score() const
{
    const std::size_t denom = total - not_killed_bounded;
    return denom == 0 ? 1.0 : static_cast<double>(killed) / static_cast<double>(denom);
}

std::optional<std::vector<Value>> distinguishing_input(const Sxm& a, const Sxm& b,
                                                       std::size_t bound,
                                                       std::size_t max_prefixes)
{
    struct Node {
        std::vector<Value> prefix;
        Frontier fa, fb;
    };
    const auto alphabet = merged_inputs(a, b);
    std::vector<Node> layer{{{}, initial_frontier(a), initial_frontier(b)}};
    std::size_t explored = 0;
    for (std::size_t len = 0;; ++len) {
        for (const auto& n : layer) {
            if (relation_at(a, n.fa) != relation_at(b, n.fb))
                return n.prefix;
        }
        if (len == bound)
            return std::nullopt;
        std::vector<Node> next;
        for (const auto& n : layer) {
            for (const auto& sym : alphabet) {
                if (++explored > max_prefixes)
                    return std::nullopt;
                Node child{n.prefix, advance(a, n.fa, sym), advance(b, n.fb, sym)};
                if (child.fa.empty() && child.fb.empty())
                    continue;  // every extension is empty on both sides
                child.prefix.push_back(sym);
                next.push_back(std::move(child));
            }
        }
        if (next.empty())
            return std::nullopt;
        layer = std::move(next);
    }
}

ScoreReport mutation_score(const MutableModel& spec, const MutantSet& mutants,
                           const TestSuite& suite, const ScoreOptions& options)
{
    if (mutants.mutants.empty())
        throw Error(ErrorCode::EmptyMutantSet, "mutant set is empty");
    if (std::holds_alternative<PSystem>(spec))
        throw std::invalid_argument("P systems are scored against coverage sets");
    ScoreReport r;
    r.invalid = mutants.invalid;
    const Sxm spec_sxm = observable(spec);
    for (const auto& m : mutants.mutants) {
        MutantVerdict v{m.id, operator_name(m.op), m.location, Verdict::Survived, nullptr};
        try {
            const Sxm mutant = observable(m.model);
            for (std::size_t i = 0; i < suite.cases.size(); ++i) {
                const auto& tc = suite.cases[i];
                if (auto diff = case_difference(mutant, tc)) {
                    v.verdict = Verdict::Killed;
                    v.witness = {{"case", i},
                                 {"input", input_json(tc.input)},
                                 {"prefix_length", diff->prefix_length},
                                 {"observation", diff->complete ? "complete-runs" : "output-stream"},
                                 {"expected", outputs_json(diff->expected)},
                                 {"observed", outputs_json(diff->observed)}};
                    break;
                }
            }
            if (v.verdict != Verdict::Killed) {
                const auto diff = distinguishing_input(spec_sxm, mutant, options.equivalence_bound,
                                                       options.max_prefixes);
                if (diff) {
                    v.witness = {{"distinguishing_input", input_json(*diff)}};
                } else {
                    v.verdict = Verdict::NotKilledBounded;
                    v.witness = {{"bound", options.equivalence_bound}};
                }
            }
        } catch (const Error& e) {
            v.verdict = Verdict::Survived;
            v.witness = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
        }
        count_verdict(r, v.verdict);
        r.per_mutant.push_back(std::move(v));
    }
    r.total = r.per_mutant.size();
    return r;
}

ScoreReport mutation_score(const PSystem& spec, const MutantSet& mutants,
                           const CoverageTestSet& set, const ScoreOptions& options)
{
    if (mutants.mutants.empty())
        throw Error(ErrorCode::EmptyMutantSet, "mutant set is empty");
    ScoreReport r;
    r.invalid = mutants.invalid;
    const auto spec_traces = psystem_run(spec, set.depth, RunMode::AllBranches);
    std::optional<std::set<PConfiguration>> spec_bounded;
    for (const auto& m : mutants.mutants) {
        const auto* mps = std::get_if<PSystem>(&m.model);
        if (!mps)
            throw std::invalid_argument("mutant " + m.id + " is not a P system");
        MutantVerdict v{m.id, operator_name(m.op), m.location, Verdict::Survived, nullptr};
        try {
            const auto reach = reachable_configurations(*mps, set.depth);
            const std::set<PConfiguration> rs(reach.begin(), reach.end());
            auto missing = nlohmann::ordered_json::array();
            for (const auto& member : set.members) {
                if (!rs.count(member))
                    missing.push_back(canonical(member));
            }
            for (const auto& member : set.members) {
                if (rs.count(member))
                    continue;
                v.verdict = Verdict::Killed;
                v.witness = {{"unreachable", configuration_to_json(spec, member)},
                             {"text", canonical(member)},
                             {"depth", set.depth},
                             {"all_unreachable", missing},
                             {"mutant_reachable", reach.size()}};
                for (const auto& t : spec_traces) {
                    bool hit = t.start == member;
                    for (const auto& s : t.steps)
                        hit = hit || s.result == member;
                    if (hit) {
                        v.witness["spec_trace"] = render_trace(spec, t);
                        break;
                    }
                }
                break;
            }
            if (v.verdict != Verdict::Killed) {
                if (!spec_bounded) {
                    auto s = reachable_configurations(spec, options.equivalence_bound);
                    spec_bounded.emplace(s.begin(), s.end());
                }
                auto mr = reachable_configurations(*mps, options.equivalence_bound);
                std::set<PConfiguration> ms(mr.begin(), mr.end());
                std::vector<PConfiguration> diff;
                std::set_symmetric_difference(spec_bounded->begin(), spec_bounded->end(),
                                              ms.begin(), ms.end(), std::back_inserter(diff));
                if (!diff.empty()) {
                    v.witness = {{"differing_configuration", canonical(diff.front())},
                                 {"reachable_in", ms.count(diff.front()) ? "mutant" : "spec"},
                                 {"depth", options.equivalence_bound}};
                } else {
                    v.verdict = Verdict::NotKilledBounded;
                    v.witness = {{"bound", options.equivalence_bound}};
                }
            }
        } catch (const Error& e) {
            v.verdict = Verdict::Survived;
            v.witness = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
        }
        count_verdict(r, v.verdict);
        r.per_mutant.push_back(std::move(v));
    }
    r.total = r.per_mutant.size();
    return r;
}

std::string replay_kill(const MutableModel& spec, const Mutant& mutant,
                        const MutantVerdict& verdict, const TestSuite& suite)
{
    if (verdict.verdict != Verdict::Killed)
        return "verdict is not a kill";
    const std::size_t i = verdict.witness.at("case").get<std::size_t>();
    if (i >= suite.cases.size())
        return "witness case is out of range";
    const auto& tc = suite.cases[i];
    if (case_difference(observable(spec), tc))
        return "spec does not reproduce the expected outputs";
    const auto diff = case_difference(observable(mutant.model), tc);
    if (!diff)
        return "mutant matches the expected outputs";
    if (diff->prefix_length != verdict.witness.at("prefix_length").get<std::size_t>() ||
        outputs_json(diff->observed) != verdict.witness.at("observed"))
        return "mutant outputs differ from the recorded witness";
    return {};
}

std::string replay_kill(const PSystem& spec, const Mutant& mutant, const MutantVerdict& verdict,
                        std::size_t depth)
{
    if (verdict.verdict != Verdict::Killed)
        return "verdict is not a kill";
    const auto* mps = std::get_if<PSystem>(&mutant.model);
    if (!mps)
        return "mutant is not a P system";
    const PConfiguration member = configuration_from_json(spec, verdict.witness.at("unreachable"));
    const auto spec_reach = reachable_configurations(spec, depth);
    if (std::find(spec_reach.begin(), spec_reach.end(), member) == spec_reach.end())
        return "configuration is not reachable in the spec";
    const auto mut_reach = reachable_configurations(*mps, depth);
    if (std::find(mut_reach.begin(), mut_reach.end(), member) != mut_reach.end())
        return "configuration is reachable in the mutant";
    return {};
}

nlohmann::ordered_json mutant_set_to_json(const MutantSet& set, std::uint64_t seed)
{
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["seed"] = seed;
    j["candidates"] = set.candidates;
    j["invalid"] = set.invalid;
    j["duplicates"] = set.duplicates;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& m : set.mutants) {
        nlohmann::ordered_json x;
        x["id"] = m.id;
        x["operator"] = operator_name(m.op);
        x["location"] = m.location;
        try {
            if (const auto* ps = std::get_if<PSystem>(&m.model))
                x["model"] = to_ordered(psystem_to_json(*ps));
            else if (const auto* sxm = std::get_if<Sxm>(&m.model))
                x["model"] = to_ordered(sxm_to_json(*sxm));
            else
                x["model"] = to_ordered(system_to_json(std::get<CsxmSystem>(m.model)));
        } catch (const Error&) {
            x["model"] = nullptr;  // native function bodies have no JSON form
        }
        arr.push_back(std::move(x));
    }
    j["mutants"] = arr;
    return j;
}

nlohmann::ordered_json score_report_to_json(const ScoreReport& r)
{
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["total"] = r.total;
    j["killed"] = r.killed;
    j["survived"] = r.survived;
    j["not_killed_bounded"] = r.not_killed_bounded;
    j["invalid"] = r.invalid;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& v : r.per_mutant) {
        nlohmann::ordered_json x;
        x["id"] = v.id;
        x["operator"] = v.op;
        x["location"] = v.location;
        x["verdict"] = verdict_name(v.verdict);
        x["witness"] = v.witness;
        arr.push_back(std::move(x));
    }
    j["per_mutant"] = arr;
    j["score"] = r.score();
    j["non_equivalent_score"] = r.non_equivalent_score();
    return j;
}

std::string render_score_report(const ScoreReport& r)
{
    std::ostringstream os;
    for (const auto& v : r.per_mutant) {
        os << v.id << "  " << v.op << "  " << v.location << "  " << verdict_name(v.verdict);
        if (v.verdict == Verdict::Killed) {
            if (v.witness.contains("text"))
                os << "  (" << v.witness["text"].get<std::string>() << " unreachable)";
            else if (v.witness.contains("case"))
                os << "  (case " << v.witness["case"].get<std::size_t>() << ")";
        }
        os << '\n';
    }
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "total %zu, killed %zu, survived %zu (%zu not killed within bound), invalid %zu\n"
                  "score %.4f, non-equivalent score %.4f\n",
                  r.total, r.killed, r.survived, r.not_killed_bounded, r.invalid, r.score(),
                  r.non_equivalent_score());
    os << buf;
    return os.str();
}

}  // namespace heterotest
