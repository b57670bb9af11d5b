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
#include "heterotest/psystem.hpp"

#include "heterotest/error.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <set>
#include <sstream>

namespace heterotest {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string multiset_text(const Multiset& m)
{
    return m.empty() ? std::string("λ") : m.canonical();
}

// All maximal rule-instance multisets of one compartment.
void enumerate_compartment(const PSystem& ps, const std::vector<std::size_t>& rules,
                           std::size_t pos, Multiset& left, std::map<std::size_t, std::int64_t>& cur,
                           std::vector<std::map<std::size_t, std::int64_t>>& out, std::size_t cap)
{
    if (pos == rules.size()) {
        for (auto r : rules) {
            if (left.contains(ps.rules[r].lhs))
                return;  // not maximal
        }
        out.push_back(cur);
        if (out.size() > cap)
            throw Error(ErrorCode::ExplosionBound,
                        "more than " + std::to_string(cap) + " maximal rule multisets");
        return;
    }
    const auto r = rules[pos];
    const std::int64_t most = left.max_copies(ps.rules[r].lhs);
    for (std::int64_t k = most; k >= 0; --k) {
        if (k > 0) {
            left.subtract(ps.rules[r].lhs, k);
            cur[r] = k;
        }
        enumerate_compartment(ps, rules, pos + 1, left, cur, out, cap);
        if (k > 0) {
            left.add(ps.rules[r].lhs, k);
            cur.erase(r);
        }
    }
}

nlohmann::ordered_json fired_to_json(const PSystem& ps, const Assignment& a)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < a.size(); ++c) {
        auto names = nlohmann::ordered_json::array();
        for (const auto& [r, k] : a[c]) {
            for (std::int64_t i = 0; i < k; ++i)
                names.push_back(ps.rules[r].name);
        }
        j[std::to_string(ps.membranes[c].id)] = names;
    }
    return j;
}

std::string fired_text(const PSystem& ps, const Assignment& a)
{
    std::string s = "(";
    for (std::size_t c = 0; c < a.size(); ++c) {
        if (c)
            s += ",";
        if (a[c].empty()) {
            s += "∅";
            continue;
        }
        s += "{";
        bool first = true;
        for (const auto& [r, k] : a[c]) {
            if (!first)
                s += ",";
            first = false;
            s += ps.rules[r].name;
            if (k > 1)
                s += "×" + std::to_string(k);
        }
        s += "}";
    }
    return s + ")";
}

bool assignment_empty(const Assignment& a)
{
    return std::all_of(a.begin(), a.end(), [](const auto& m) { return m.empty(); });
}

}  // namespace

std::optional<std::size_t> PSystem::index_of(int id) const
{
    for (std::size_t i = 0; i < membranes.size(); ++i) {
        if (membranes[i].id == id)
            return i;
    }
    return std::nullopt;
}

const Membrane* PSystem::membrane(int id) const
{
    auto i = index_of(id);
    return i ? &membranes[*i] : nullptr;
}

std::vector<std::size_t> PSystem::rules_of(int compartment) const
{
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < rules.size(); ++r) {
        if (rules[r].compartment == compartment)
            out.push_back(r);
    }
    return out;
}

const PRule* PSystem::rule(const std::string& name) const
{
    for (const auto& r : rules) {
        if (r.name == name)
            return &r;
    }
    return nullptr;
}

ValidationReport validate_psystem(const PSystem& ps)
{
    ValidationReport report;
    std::set<std::string> alpha(ps.alphabet.begin(), ps.alphabet.end());
    if (ps.alphabet.empty())
        report.push_back({"alphabet", "alphabet is empty"});
    for (const auto& s : ps.alphabet) {
        if (s.empty() || is_reserved_atom(s))
            report.push_back({"alphabet", "invalid symbol '" + s + "'"});
    }
    if (ps.membranes.empty())
        report.push_back({"structure", "no compartments"});
    std::set<int> ids;
    int roots = 0;
    for (const auto& m : ps.membranes) {
        if (m.id <= 0)
            report.push_back({"structure", "compartment ids must be positive"});
        if (!ids.insert(m.id).second)
            report.push_back({"structure", "duplicate compartment id " + std::to_string(m.id)});
        if (m.parent == 0)
            ++roots;
        else if (!ps.membrane(m.parent))
            report.push_back({"structure", "compartment " + std::to_string(m.id) +
                                               " has unknown parent " +
                                               std::to_string(m.parent)});
    }
    if (!ps.membranes.empty() && roots != 1)
        report.push_back({"structure", "membrane tree must have exactly one root"});
    for (const auto& [id, ms] : ps.initial) {
        const auto loc = "initial[" + std::to_string(id) + "]";
        if (!ps.membrane(id))
            report.push_back({loc, "unknown compartment"});
        for (const auto& [s, k] : ms.counts()) {
            if (!alpha.count(s))
                report.push_back({loc, "symbol '" + s + "' is not in the alphabet"});
        }
    }
    std::set<std::string> names;
    for (const auto& r : ps.rules) {
        const auto loc = "rules[" + r.name + "]";
        if (r.name.empty())
            report.push_back({"rules", "rule without a name"});
        if (!names.insert(r.name).second)
            report.push_back({loc, "duplicate rule name"});
        const Membrane* home = ps.membrane(r.compartment);
        if (!home)
            report.push_back({loc, "unknown compartment " + std::to_string(r.compartment)});
        if (r.lhs.empty())
            report.push_back({loc, "empty left-hand side"});
        for (const auto& [s, k] : r.lhs.counts()) {
            if (!alpha.count(s))
                report.push_back({loc, "symbol '" + s + "' is not in the alphabet"});
        }
        for (const auto& item : r.rhs) {
            if (!alpha.count(item.symbol))
                report.push_back({loc, "symbol '" + item.symbol + "' is not in the alphabet"});
            if (item.target == 0 || !home)
                continue;
            const bool parent = home->parent == item.target && item.target != 0;
            const bool child = std::find(home->children.begin(), home->children.end(),
                                         item.target) != home->children.end();
            if (!ps.membrane(item.target) || (!parent && !child))
                report.push_back({loc, "target " + std::to_string(item.target) +
                                           " is neither the parent nor a child of compartment " +
                                           std::to_string(r.compartment)});
        }
    }
    std::sort(report.begin(), report.end());
    report.erase(std::unique(report.begin(), report.end()), report.end());
    return report;
}

PConfiguration initial_p_configuration(const PSystem& ps)
{
    PConfiguration c;
    for (const auto& m : ps.membranes) {
        auto it = ps.initial.find(m.id);
        c.push_back(it == ps.initial.end() ? Multiset() : it->second);
    }
    return c;
}

std::string canonical(const PConfiguration& c)
{
    std::string s = "(";
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (i)
            s += ",";
        s += multiset_text(c[i]);
    }
    return s + ")";
}

Value configuration_to_value(const PConfiguration& c)
{
    std::vector<Value> items;
    for (const auto& m : c)
        items.push_back(Value::multiset(m));
    return Value::sequence(std::move(items));
}

std::optional<PConfiguration> configuration_from_value(const PSystem& ps, const Value& v)
{
    if (!v.is_sequence() || v.as_sequence().size() != ps.membranes.size())
        return std::nullopt;
    PConfiguration c;
    for (const auto& item : v.as_sequence()) {
        if (!item.is_multiset())
            return std::nullopt;
        c.push_back(item.as_multiset());
    }
    if (!check_configuration(ps, c).empty())
        return std::nullopt;
    return c;
}

std::string check_configuration(const PSystem& ps, const PConfiguration& c)
{
    if (c.size() != ps.membranes.size())
        return "configuration has " + std::to_string(c.size()) + " compartments, expected " +
               std::to_string(ps.membranes.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        for (const auto& [s, k] : c[i].counts()) {
            if (!std::binary_search(ps.alphabet.begin(), ps.alphabet.end(), s))
                return "symbol '" + s + "' in compartment " + std::to_string(ps.membranes[i].id) +
                       " is not in the alphabet";
        }
    }
    return {};
}

std::vector<Assignment> maximal_rule_multisets(const PSystem& ps, const PConfiguration& cfg,
                                               const PsOptions& options)
{
    std::vector<std::vector<std::map<std::size_t, std::int64_t>>> per;
    for (std::size_t c = 0; c < ps.membranes.size(); ++c) {
        std::vector<std::map<std::size_t, std::int64_t>> choices;
        Multiset left = cfg.at(c);
        std::map<std::size_t, std::int64_t> cur;
        enumerate_compartment(ps, ps.rules_of(ps.membranes[c].id), 0, left, cur, choices,
                              options.max_assignments);
        std::sort(choices.begin(), choices.end());
        per.push_back(std::move(choices));
    }
    std::vector<Assignment> out;
    Assignment cur(per.size());
    std::function<void(std::size_t)> rec = [&](std::size_t c) {
        if (c == per.size()) {
            out.push_back(cur);
            if (out.size() > options.max_assignments)
                throw Error(ErrorCode::ExplosionBound,
                            "more than " + std::to_string(options.max_assignments) +
                                " maximal assignments");
            return;
        }
        for (const auto& choice : per[c]) {
            cur[c] = choice;
            rec(c + 1);
        }
    };
    rec(0);
    return out;
}

PConfiguration apply_assignment(const PSystem& ps, const PConfiguration& cfg,
                                const Assignment& a)
{
    PConfiguration next = cfg;
    std::vector<Multiset> deposits(cfg.size());
    for (std::size_t c = 0; c < a.size(); ++c) {
        for (const auto& [r, k] : a[c]) {
            const PRule& rule = ps.rules.at(r);
            next[c].subtract(rule.lhs, k);
            for (const auto& item : rule.rhs) {
                const std::size_t to = item.target == 0 ? c : *ps.index_of(item.target);
                deposits[to].add(item.symbol, k);
            }
        }
    }
    for (std::size_t c = 0; c < next.size(); ++c)
        next[c].add(deposits[c]);
    return next;
}

bool is_halted(const PSystem& ps, const PConfiguration& cfg)
{
    for (std::size_t c = 0; c < ps.membranes.size(); ++c) {
        for (auto r : ps.rules_of(ps.membranes[c].id)) {
            if (cfg.at(c).contains(ps.rules[r].lhs))
                return false;
        }
    }
    return true;
}

std::size_t seeded_choice(std::uint64_t seed, const PConfiguration& cfg, std::size_t n)
{
    if (n <= 1)
        return 0;
    return static_cast<std::size_t>(splitmix64(seed ^ fnv1a(canonical(cfg))) % n);
}

std::optional<PStep> seeded_step(const PSystem& ps, const PConfiguration& cfg,
                                 std::uint64_t seed, const PsOptions& options)
{
    if (is_halted(ps, cfg))
        return std::nullopt;
    auto as = maximal_rule_multisets(ps, cfg, options);
    const auto& pick = as[seeded_choice(seed, cfg, as.size())];
    return PStep{pick, apply_assignment(ps, cfg, pick)};
}

std::vector<ComputationTrace> psystem_run(const PSystem& ps, std::size_t depth, RunMode mode,
                                          std::uint64_t seed, const PsOptions& options,
                                          std::optional<PConfiguration> start)
{
    ComputationTrace root;
    root.start = start ? *start : initial_p_configuration(ps);
    std::vector<ComputationTrace> out;

    if (mode == RunMode::SingleSeeded) {
        ComputationTrace t = root;
        for (std::size_t d = 0; d < depth; ++d) {
            auto step = seeded_step(ps, t.final_configuration(), seed, options);
            if (!step)
                break;
            t.steps.push_back(std::move(*step));
        }
        t.halted = is_halted(ps, t.final_configuration());
        out.push_back(std::move(t));
        return out;
    }

    std::function<void(ComputationTrace&)> rec = [&](ComputationTrace& t) {
        const PConfiguration cfg = t.final_configuration();  // steps may reallocate
        if (is_halted(ps, cfg)) {
            t.halted = true;
            out.push_back(t);
            t.halted = false;
        } else if (t.steps.size() >= depth) {
            out.push_back(t);
        } else {
            for (const auto& a : maximal_rule_multisets(ps, cfg, options)) {
                t.steps.push_back(PStep{a, apply_assignment(ps, cfg, a)});
                rec(t);
                t.steps.pop_back();
            }
        }
        if (out.size() > options.max_traces)
            throw Error(ErrorCode::ExplosionBound,
                        "more than " + std::to_string(options.max_traces) + " traces",
                        {{"partial_traces", out.size()}});
    };
    rec(root);
    return out;
}

std::string replay_trace(const PSystem& ps, const ComputationTrace& t)
{
    PConfiguration cur = t.start;
    if (auto msg = check_configuration(ps, cur); !msg.empty())
        return msg;
    for (std::size_t i = 0; i < t.steps.size(); ++i) {
        const auto& step = t.steps[i];
        if (step.fired.size() != cur.size())
            return "step " + std::to_string(i + 1) + ": wrong compartment count";
        // Applicability and maximality.
        for (std::size_t c = 0; c < cur.size(); ++c) {
            Multiset left = cur[c];
            for (const auto& [r, k] : step.fired[c]) {
                if (r >= ps.rules.size() || ps.rules[r].compartment != ps.membranes[c].id)
                    return "step " + std::to_string(i + 1) + ": rule in wrong compartment";
                if (!left.contains(ps.rules[r].lhs, k))
                    return "step " + std::to_string(i + 1) + ": rule " + ps.rules[r].name +
                           " is not applicable";
                left.subtract(ps.rules[r].lhs, k);
            }
            for (auto r : ps.rules_of(ps.membranes[c].id)) {
                if (left.contains(ps.rules[r].lhs))
                    return "step " + std::to_string(i + 1) + ": assignment is not maximal (" +
                           ps.rules[r].name + ")";
            }
        }
        if (assignment_empty(step.fired))
            return "step " + std::to_string(i + 1) + ": empty step";
        auto next = apply_assignment(ps, cur, step.fired);
        if (next != step.result)
            return "step " + std::to_string(i + 1) + ": result " + canonical(step.result) +
                   " differs from " + canonical(next);
        cur = next;
    }
    return {};
}

std::vector<PConfiguration> reachable_configurations(const PSystem& ps, std::size_t depth,
                                                     const PsOptions& options)
{
    std::set<PConfiguration> seen;
    std::vector<PConfiguration> layer{initial_p_configuration(ps)};
    seen.insert(layer.front());
    for (std::size_t d = 0; d < depth && !layer.empty(); ++d) {
        std::vector<PConfiguration> next;
        for (const auto& c : layer) {
            if (is_halted(ps, c))
                continue;
            for (const auto& a : maximal_rule_multisets(ps, c, options)) {
                auto n = apply_assignment(ps, c, a);
                if (seen.insert(n).second)
                    next.push_back(std::move(n));
            }
        }
        layer = std::move(next);
    }
    return {seen.begin(), seen.end()};
}

bool fires(const ComputationTrace& t, std::size_t rule_index)
{
    for (const auto& s : t.steps) {
        for (const auto& m : s.fired) {
            if (m.count(rule_index))
                return true;
        }
    }
    return false;
}

namespace {

bool better_witness(const ComputationTrace& a, const ComputationTrace& b)
{
    if (a.steps.size() != b.steps.size())
        return a.steps.size() < b.steps.size();
    return canonical(a.final_configuration()) < canonical(b.final_configuration());
}

}  // namespace

CoverageReport rule_coverage(const PSystem& ps, const std::vector<ComputationTrace>& traces)
{
    for (std::size_t i = 0; i < traces.size(); ++i) {
        auto msg = replay_trace(ps, traces[i]);
        if (!msg.empty())
            throw Error(ErrorCode::TraceReplayMismatch,
                        "trace " + std::to_string(i) + ": " + msg, {{"trace", i}});
    }
    CoverageReport report;
    for (std::size_t r = 0; r < ps.rules.size(); ++r) {
        RuleCoverage rc;
        rc.rule = ps.rules[r].name;
        for (const auto& t : traces) {
            if (fires(t, r) && (!rc.witness || better_witness(t, *rc.witness)))
                rc.witness = t;
        }
        if (rc.witness) {
            rc.covered = true;
            rc.configuration = rc.witness->final_configuration();
        }
        report.push_back(std::move(rc));
    }
    return report;
}

CoverageTestSet generate_coverage_test_set(const PSystem& ps, std::size_t depth,
                                           const PsOptions& options)
{
    if (depth < 1)
        throw std::invalid_argument("depth must be at least 1");
    const auto traces = psystem_run(ps, depth, RunMode::AllBranches, 0, options);

    // Leaf configuration -> rules fired on some trace ending there.
    std::map<std::string, std::pair<PConfiguration, std::set<std::size_t>>> leaves;
    for (const auto& t : traces) {
        auto& entry = leaves[canonical(t.final_configuration())];
        entry.first = t.final_configuration();
        for (std::size_t r = 0; r < ps.rules.size(); ++r) {
            if (fires(t, r))
                entry.second.insert(r);
        }
    }

    std::set<std::size_t> uncovered;
    for (std::size_t r = 0; r < ps.rules.size(); ++r)
        uncovered.insert(r);
    std::vector<std::string> chosen;
    while (!uncovered.empty()) {
        std::string best;
        std::size_t gain = 0;
        for (const auto& [key, entry] : leaves) {
            std::size_t g = 0;
            for (auto r : entry.second)
                g += uncovered.count(r);
            if (g > gain) {
                gain = g;
                best = key;
            }
        }
        if (gain == 0)
            break;
        chosen.push_back(best);
        for (auto r : leaves[best].second)
            uncovered.erase(r);
    }

    CoverageTestSet set;
    set.depth = depth;
    for (const auto& key : chosen)
        set.members.push_back(leaves[key].first);
    std::sort(set.members.begin(), set.members.end(),
              [](const PConfiguration& a, const PConfiguration& b) {
                  return canonical(a) < canonical(b);
              });
    for (std::size_t r = 0; r < ps.rules.size(); ++r) {
        RuleCoverage rc;
        rc.rule = ps.rules[r].name;
        for (const auto& key : chosen) {
            if (!leaves[key].second.count(r))
                continue;
            rc.covered = true;
            rc.configuration = leaves[key].first;
            for (const auto& t : traces) {
                if (canonical(t.final_configuration()) == key && fires(t, r) &&
                    (!rc.witness || better_witness(t, *rc.witness)))
                    rc.witness = t;
            }
            break;
        }
        set.report.push_back(std::move(rc));
    }
    return set;
}

nlohmann::ordered_json configuration_to_json(const PSystem& ps, const PConfiguration& c)
{
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < c.size() && i < ps.membranes.size(); ++i)
        j[std::to_string(ps.membranes[i].id)] = c[i].canonical();
    return j;
}

PConfiguration configuration_from_json(const PSystem& ps, const nlohmann::json& j)
{
    PConfiguration c;
    if (j.is_array()) {
        for (const auto& s : j)
            c.push_back(Multiset::parse(s.get<std::string>()));
    } else if (j.is_object()) {
        for (const auto& m : ps.membranes) {
            auto key = std::to_string(m.id);
            c.push_back(j.contains(key) ? Multiset::parse(j.at(key).get<std::string>())
                                        : Multiset());
        }
        for (auto it = j.begin(); it != j.end(); ++it) {
            int id = 0;
            try {
                id = std::stoi(it.key());
            } catch (...) {
                id = 0;
            }
            if (!ps.membrane(id))
                throw Error(ErrorCode::Parse, "configuration: unknown compartment '" + it.key() + "'");
        }
    } else {
        throw Error(ErrorCode::Parse, "configuration must be an array or an object");
    }
    return c;
}

nlohmann::ordered_json trace_to_json(const PSystem& ps, const ComputationTrace& t)
{
    nlohmann::ordered_json j;
    j["start"] = configuration_to_json(ps, t.start);
    auto steps = nlohmann::ordered_json::array();
    for (const auto& s : t.steps)
        steps.push_back({{"fired", fired_to_json(ps, s.fired)},
                         {"result", configuration_to_json(ps, s.result)}});
    j["steps"] = steps;
    j["final"] = configuration_to_json(ps, t.final_configuration());
    j["halted"] = t.halted;
    j["text"] = render_trace(ps, t);
    return j;
}

std::string render_trace(const PSystem& ps, const ComputationTrace& t)
{
    std::string s = canonical(t.start);
    for (const auto& step : t.steps)
        s += " ⟹" + fired_text(ps, step.fired) + " " + canonical(step.result);
    return s;
}

nlohmann::ordered_json coverage_report_to_json(const PSystem& ps, const CoverageReport& r)
{
    auto rules = nlohmann::ordered_json::array();
    for (const auto& rc : r) {
        nlohmann::ordered_json j;
        j["rule"] = rc.rule;
        j["covered"] = rc.covered;
        if (rc.configuration)
            j["configuration"] = configuration_to_json(ps, *rc.configuration);
        if (rc.witness)
            j["witness"] = trace_to_json(ps, *rc.witness);
        rules.push_back(std::move(j));
    }
    return rules;
}

nlohmann::ordered_json coverage_to_json(const PSystem& ps, const CoverageTestSet& set)
{
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["kind"] = "rule-coverage";
    j["depth"] = set.depth;
    auto members = nlohmann::ordered_json::array();
    for (const auto& m : set.members)
        members.push_back(configuration_to_json(ps, m));
    j["test_set"] = members;
    std::size_t covered = 0;
    for (const auto& rc : set.report)
        covered += rc.covered ? 1 : 0;
    j["covered"] = covered;
    j["rules"] = set.report.size();
    j["coverage"] = coverage_report_to_json(ps, set.report);
    return j;
}

}  // namespace heterotest
