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
#include "heterotest/sxm.hpp"

#include "heterotest/error.hpp"

#include <algorithm>
#include <set>

namespace heterotest {

// --- case tables ---------------------------------------------------------

std::optional<Effect> CaseTable::apply_row(std::size_t row, const Value& memory,
                                           const Value& input, const Value& in_port) const
{
    const Case& c = cases_.at(row);
    Bindings b;
    if (!c.memory.match(memory, b) || !c.input.match(input, b))
        return std::nullopt;
    if (c.in_port) {
        if (!c.in_port->match(in_port, b))
            return std::nullopt;
    } else if (!in_port.is_nomem()) {
        return std::nullopt;
    }
    if (c.guard) {
        auto g = c.guard->evaluate(b);
        if (!g || !is_true(*g))
            return std::nullopt;
    }
    Effect e;
    if (c.output) {
        auto o = c.output->evaluate(b);
        if (!o)
            return std::nullopt;
        e.output = std::move(*o);
    } else {
        e.output = Value::lambda();
    }
    if (c.memory_next) {
        auto m = c.memory_next->evaluate(b);
        if (!m)
            return std::nullopt;
        e.memory = std::move(*m);
    } else {
        e.memory = memory;
    }
    if (c.out_port) {
        auto p = c.out_port->evaluate(b);
        if (!p)
            return std::nullopt;
        e.out_port = std::move(*p);
    }
    return e;
}

std::vector<std::size_t> CaseTable::matching_rows(const Value& memory, const Value& input,
                                                  const Value& in_port) const
{
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < cases_.size(); ++r) {
        const Case& c = cases_[r];
        Bindings b;
        if (!c.memory.match(memory, b) || !c.input.match(input, b))
            continue;
        if (c.in_port ? !c.in_port->match(in_port, b) : !in_port.is_nomem())
            continue;
        if (c.guard) {
            auto g = c.guard->evaluate(b);
            if (!g || !is_true(*g))
                continue;
        }
        rows.push_back(r);
    }
    return rows;
}

std::vector<Effect> CaseTable::apply(const Value& memory, const Value& input,
                                     const Value& in_port) const
{
    std::vector<Effect> out;
    for (std::size_t r = 0; r < cases_.size(); ++r) {
        if (auto e = apply_row(r, memory, input, in_port))
            out.push_back(std::move(*e));
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool structurally_equal(const ProcessingFunction& a, const ProcessingFunction& b)
{
    if (a.name() != b.name() || a.target() != b.target())
        return false;
    if (a.body() == b.body())
        return true;
    const CaseTable* ta = a.case_table();
    const CaseTable* tb = b.case_table();
    return ta && tb && ta->cases() == tb->cases();
}

// --- memory domains ------------------------------------------------------

namespace {

std::vector<Value> sorted_unique(std::vector<Value> vs)
{
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    return vs;
}

}  // namespace

MemoryDomain MemoryDomain::values(std::vector<Value> vs)
{
    MemoryDomain d;
    d.kind_ = Kind::Values;
    d.values_ = sorted_unique(std::move(vs));
    return d;
}

MemoryDomain MemoryDomain::range(std::int64_t lo, std::int64_t hi)
{
    MemoryDomain d;
    d.kind_ = Kind::Range;
    d.lo_ = lo;
    d.hi_ = hi;
    return d;
}

MemoryDomain MemoryDomain::open(std::vector<Value> sample)
{
    MemoryDomain d;
    d.kind_ = Kind::Open;
    d.values_ = sorted_unique(std::move(sample));
    return d;
}

std::vector<Value> MemoryDomain::enumerate() const
{
    if (kind_ != Kind::Range)
        return values_;
    std::vector<Value> out;
    for (std::int64_t v = lo_; v <= hi_; ++v)
        out.push_back(Value::integer(v));
    return out;
}

bool MemoryDomain::contains(const Value& v) const
{
    switch (kind_) {
    case Kind::Values:
        return std::binary_search(values_.begin(), values_.end(), v);
    case Kind::Range:
        return v.is_integer() && v.as_integer() >= lo_ && v.as_integer() <= hi_;
    case Kind::Open:
        return true;
    }
    return false;
}

// --- machines ------------------------------------------------------------

const ProcessingFunction* Sxm::function(const std::string& name) const
{
    for (const auto& f : functions) {
        if (f.name() == name)
            return &f;
    }
    return nullptr;
}

bool Sxm::is_terminal(const std::string& state) const
{
    return std::find(terminal_states.begin(), terminal_states.end(), state) !=
           terminal_states.end();
}

bool Sxm::has_state(const std::string& state) const
{
    return std::find(states.begin(), states.end(), state) != states.end();
}

std::vector<std::string> Sxm::functions_at(const std::string& state) const
{
    std::vector<std::string> out;
    for (auto it = next_state.lower_bound({state, std::string()});
         it != next_state.end() && it->first.first == state; ++it)
        out.push_back(it->first.second);
    return out;
}

bool structurally_equal(const Sxm& a, const Sxm& b)
{
    if (a.inputs != b.inputs || a.outputs != b.outputs || a.states != b.states ||
        a.initial_states != b.initial_states || a.terminal_states != b.terminal_states ||
        !(a.memory_domain == b.memory_domain) || a.initial_memory != b.initial_memory ||
        a.next_state != b.next_state || a.functions.size() != b.functions.size())
        return false;
    for (std::size_t i = 0; i < a.functions.size(); ++i) {
        if (!structurally_equal(a.functions[i], b.functions[i]))
            return false;
    }
    return true;
}

std::vector<std::string> Automaton::labels() const
{
    std::set<std::string> ls;
    for (const auto& a : arcs)
        ls.insert(a.label);
    return {ls.begin(), ls.end()};
}

bool Automaton::is_deterministic() const
{
    if (initial_states.size() > 1)
        return false;
    for (std::size_t i = 1; i < arcs.size(); ++i) {
        if (arcs[i].from == arcs[i - 1].from && arcs[i].label == arcs[i - 1].label)
            return false;
    }
    return true;
}

bool Automaton::is_terminal(const std::string& state) const
{
    return std::find(terminal_states.begin(), terminal_states.end(), state) !=
           terminal_states.end();
}

std::optional<std::string> Automaton::successor(const std::string& state,
                                                const std::string& label) const
{
    auto it = std::lower_bound(arcs.begin(), arcs.end(), Arc{state, label, std::string()});
    if (it != arcs.end() && it->from == state && it->label == label)
        return it->to;
    return std::nullopt;
}

// --- validation ----------------------------------------------------------

namespace {

bool contains_value(const std::vector<Value>& sorted, const Value& v)
{
    return std::binary_search(sorted.begin(), sorted.end(), v);
}

template <typename T>
bool contains(const std::vector<T>& xs, const T& x)
{
    return std::find(xs.begin(), xs.end(), x) != xs.end();
}

std::string row_location(const ProcessingFunction& f, std::size_t row)
{
    return "functions[" + f.name() + "].cases[" + std::to_string(row) + "]";
}

void check_unique(const std::vector<std::string>& xs, const std::string& what,
                  ValidationReport& report)
{
    std::set<std::string> seen;
    for (const auto& x : xs) {
        if (!seen.insert(x).second)
            report.push_back({what, "duplicate entry '" + x + "'"});
    }
}

void check_case_table(const Sxm& model, const ProcessingFunction& f, const CaseTable& table,
                      const SxmValidationOptions& options, ValidationReport& report)
{
    const auto& rows = table.cases();
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Case& c = rows[r];
        const auto loc = row_location(f, r);
        if (!options.allow_ports && (c.in_port || c.out_port))
            report.push_back({loc, "port fields are only allowed in communicating machines"});
        if (c.input.kind() == Pattern::Kind::Literal &&
            !contains_value(model.inputs, c.input.literal_value()))
            report.push_back({loc, "input " + c.input.literal_value().to_string() +
                                       " is not in the input alphabet"});
        if (c.output && c.output->kind() == Term::Kind::Literal &&
            !contains_value(model.outputs, c.output->literal_value()))
            report.push_back({loc, "output " + c.output->literal_value().to_string() +
                                       " is not in the output alphabet"});

        std::set<std::string> bound;
        for (const auto& v : c.memory.variables())
            bound.insert(v);
        for (const auto& v : c.input.variables())
            bound.insert(v);
        if (c.in_port) {
            for (const auto& v : c.in_port->variables())
                bound.insert(v);
        }
        if (!f.target() && !c.output)
            report.push_back({loc, "case emits no output symbol"});
        std::vector<std::string> used;
        for (const auto* t : {c.guard ? &*c.guard : nullptr, c.output ? &*c.output : nullptr,
                              c.memory_next ? &*c.memory_next : nullptr,
                              c.out_port ? &*c.out_port : nullptr}) {
            if (t) {
                auto vs = t->variables();
                used.insert(used.end(), vs.begin(), vs.end());
            }
        }
        for (const auto& v : used) {
            if (!bound.count(v)) {
                report.push_back({loc, "variable ?" + v + " is not bound by any pattern"});
                break;
            }
        }
    }

    if (!model.memory_domain.has_sample())
        return;

    std::vector<Value> ports{Value::nomem()};
    for (const auto& p : options.in_port_values) {
        if (!p.is_nomem())
            ports.push_back(p);
    }
    const auto memories = model.memory_domain.enumerate();

    // Pairwise row overlap, confirmed by enumeration.
    for (std::size_t r1 = 0; r1 < rows.size(); ++r1) {
        for (std::size_t r2 = r1 + 1; r2 < rows.size(); ++r2) {
            const Case& a = rows[r1];
            const Case& b = rows[r2];
            if (!a.memory.may_overlap(b.memory) || !a.input.may_overlap(b.input))
                continue;
            bool found = false;
            for (const auto& m : memories) {
                for (const auto& in : model.inputs) {
                    for (const auto& p : ports) {
                        auto hit = table.matching_rows(m, in, p);
                        if (contains(hit, r1) && contains(hit, r2)) {
                            report.push_back(
                                {"functions[" + f.name() + "]",
                                 "cases " + std::to_string(r1) + " and " + std::to_string(r2) +
                                     " both match memory " + m.to_string() + ", input " +
                                     in.to_string() +
                                     (p.is_nomem() ? std::string() : ", in-port " + p.to_string())});
                            found = true;
                            break;
                        }
                    }
                    if (found)
                        break;
                }
                if (found)
                    break;
            }
        }
    }

    // Closure: every matching row evaluates into the alphabets and domain.
    std::set<std::pair<std::size_t, int>> reported;
    for (const auto& m : memories) {
        for (const auto& in : model.inputs) {
            for (const auto& p : ports) {
                for (auto r : table.matching_rows(m, in, p)) {
                    auto e = table.apply_row(r, m, in, p);
                    const auto loc = row_location(f, r);
                    if (!e) {
                        if (reported.insert({r, 0}).second)
                            report.push_back({loc, "row matches memory " + m.to_string() +
                                                       ", input " + in.to_string() +
                                                       " but its terms fail to evaluate"});
                        continue;
                    }
                    if (rows[r].output && !contains_value(model.outputs, e->output) &&
                        reported.insert({r, 1}).second)
                        report.push_back({loc, "output " + e->output.to_string() +
                                                   " is not in the output alphabet"});
                    if (model.memory_domain.exhaustive() &&
                        !model.memory_domain.contains(e->memory) && reported.insert({r, 2}).second)
                        report.push_back({loc, "memory update " + m.to_string() + " -> " +
                                                   e->memory.to_string() +
                                                   " leaves the memory domain"});
                }
            }
        }
    }
}

}  // namespace

ValidationReport validate_sxm(const Sxm& model, const SxmValidationOptions& options)
{
    ValidationReport report;

    if (model.inputs.empty())
        report.push_back({"inputs", "input alphabet is empty"});
    if (model.outputs.empty())
        report.push_back({"outputs", "output alphabet is empty"});
    for (const auto& v : model.inputs) {
        if (v.is_reserved())
            report.push_back({"inputs", "reserved atom " + v.to_string() + " in input alphabet"});
    }
    for (const auto& v : model.outputs) {
        if (v.is_reserved())
            report.push_back(
                {"outputs", "reserved atom " + v.to_string() + " in output alphabet"});
    }

    if (model.states.empty())
        report.push_back({"states", "state set is empty"});
    check_unique(model.states, "states", report);
    if (model.initial_states.empty())
        report.push_back({"initial_states", "no initial state"});
    for (const auto& q : model.initial_states) {
        if (!model.has_state(q))
            report.push_back({"initial_states", "unknown state '" + q + "'"});
    }
    for (const auto& q : model.terminal_states) {
        if (!model.has_state(q))
            report.push_back({"terminal_states", "unknown state '" + q + "'"});
    }

    std::vector<std::string> names;
    for (const auto& f : model.functions)
        names.push_back(f.name());
    check_unique(names, "functions", report);

    for (const auto& [key, targets] : model.next_state) {
        const auto loc = "next_state[" + key.first + "," + key.second + "]";
        if (!model.has_state(key.first))
            report.push_back({loc, "unknown state '" + key.first + "'"});
        if (!model.function(key.second))
            report.push_back({loc, "unknown function '" + key.second + "'"});
        if (targets.empty())
            report.push_back({loc, "empty target set"});
        for (const auto& t : targets) {
            if (!model.has_state(t))
                report.push_back({loc, "unknown target state '" + t + "'"});
        }
    }

    const auto& dom = model.memory_domain;
    if (dom.kind() == MemoryDomain::Kind::Range && dom.lo() > dom.hi())
        report.push_back({"memory_domain", "empty integer range"});
    if (!dom.has_sample())
        report.push_back({"memory_domain", "open memory domain declares no test sample"});
    if (!dom.contains(model.initial_memory))
        report.push_back({"initial_memory", "initial memory " + model.initial_memory.to_string() +
                                                " is outside the memory domain"});

    for (const auto& f : model.functions) {
        if (!f.body()) {
            report.push_back({"functions[" + f.name() + "]", "function has no body"});
            continue;
        }
        if (f.target() && !options.allow_ports)
            report.push_back({"functions[" + f.name() + "]",
                              "targets are only allowed in communicating machines"});
        if (const CaseTable* table = f.case_table())
            check_case_table(model, f, *table, options, report);
    }

    std::sort(report.begin(), report.end());
    report.erase(std::unique(report.begin(), report.end()), report.end());
    return report;
}

// --- semantics -----------------------------------------------------------

std::vector<SxmConfiguration> sxm_step(const Sxm& model, const SxmConfiguration& cfg)
{
    std::vector<SxmConfiguration> out;
    if (cfg.remaining_input.empty())
        return out;
    const Value& head = cfg.remaining_input.front();
    for (auto it = model.next_state.lower_bound({cfg.state, std::string()});
         it != model.next_state.end() && it->first.first == cfg.state; ++it) {
        const ProcessingFunction* f = model.function(it->first.second);
        if (!f)
            continue;
        for (const auto& e : f->apply(cfg.memory, head)) {
            for (const auto& target : it->second) {
                SxmConfiguration next;
                next.memory = e.memory;
                next.state = target;
                next.remaining_input.assign(cfg.remaining_input.begin() + 1,
                                            cfg.remaining_input.end());
                next.output = cfg.output;
                next.output.push_back(e.output);
                out.push_back(std::move(next));
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

SxmConfiguration initial_configuration(const Sxm& model, const std::string& initial_state,
                                       std::vector<Value> input)
{
    return SxmConfiguration{model.initial_memory, initial_state, std::move(input), {}};
}

namespace {

nlohmann::json configuration_to_json(const SxmConfiguration& c)
{
    auto in = nlohmann::json::array();
    for (const auto& v : c.remaining_input)
        in.push_back(value_to_json(v));
    auto out = nlohmann::json::array();
    for (const auto& v : c.output)
        out.push_back(value_to_json(v));
    return {{"memory", value_to_json(c.memory)},
            {"state", c.state},
            {"remaining_input", in},
            {"output", out}};
}

}  // namespace

std::vector<RunResult> sxm_run(const Sxm& model, const std::vector<Value>& input,
                               std::size_t branch_bound)
{
    if (branch_bound == 0)
        throw std::invalid_argument("branch_bound must be at least 1");

    std::set<SxmConfiguration> frontier;
    for (const auto& q : model.initial_states)
        frontier.insert(initial_configuration(model, q, input));

    auto check_bound = [&](std::size_t consumed) {
        if (frontier.size() <= branch_bound)
            return;
        auto partial = nlohmann::json::array();
        for (const auto& c : frontier)
            partial.push_back(configuration_to_json(c));
        throw Error(ErrorCode::BranchBoundExceeded,
                    "more than " + std::to_string(branch_bound) + " live branches after " +
                        std::to_string(consumed) + " input symbols",
                    {{"consumed", consumed}, {"frontier", partial}});
    };
    check_bound(0);

    for (std::size_t k = 0; k < input.size() && !frontier.empty(); ++k) {
        std::set<SxmConfiguration> next;
        for (const auto& c : frontier) {
            for (auto& n : sxm_step(model, c))
                next.insert(std::move(n));
        }
        frontier = std::move(next);
        check_bound(k + 1);
    }

    std::vector<RunResult> results;
    for (const auto& c : frontier) {
        if (c.remaining_input.empty() && model.is_terminal(c.state))
            results.push_back(RunResult{c.output, c});
    }
    return results;
}

std::vector<std::vector<Value>> sxm_outputs(const Sxm& model, const std::vector<Value>& input,
                                            std::size_t branch_bound)
{
    std::set<std::vector<Value>> outs;
    for (const auto& r : sxm_run(model, input, branch_bound))
        outs.insert(r.output);
    return {outs.begin(), outs.end()};
}

Automaton associated_automaton(const Sxm& model)
{
    Automaton a;
    a.states = model.states;
    a.initial_states = model.initial_states;
    a.terminal_states = model.terminal_states;
    for (const auto& [key, targets] : model.next_state) {
        for (const auto& t : targets)
            a.arcs.push_back(Arc{key.first, key.second, t});
    }
    std::sort(a.arcs.begin(), a.arcs.end());
    return a;
}

}  // namespace heterotest
