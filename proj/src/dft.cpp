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
#include "heterotest/dft.hpp"

#include "heterotest/error.hpp"

#include <algorithm>
#include <sstream>

namespace heterotest {

namespace {

struct InputPoint {
    Value input;
    Value in_port;
};

std::vector<InputPoint> input_points(const Sxm& model, const DftOptions& options)
{
    std::vector<Value> ports{Value::nomem()};
    for (const auto& p : options.in_port_values) {
        if (!p.is_nomem())
            ports.push_back(p);
    }
    std::sort(ports.begin(), ports.end());
    ports.erase(std::unique(ports.begin(), ports.end()), ports.end());
    std::vector<InputPoint> points;
    for (const auto& in : model.inputs) {
        for (const auto& p : ports)
            points.push_back({in, p});
    }
    return points;
}

std::vector<std::string> sorted_function_names(const Sxm& model)
{
    std::vector<std::string> names;
    for (const auto& f : model.functions)
        names.push_back(f.name());
    std::sort(names.begin(), names.end());
    return names;
}

}  // namespace

bool DftReport::complete() const
{
    return std::all_of(completeness.begin(), completeness.end(),
                       [](const CompletenessEntry& e) { return e.pass; });
}

DftReport check_dft(const Sxm& model, const DftOptions& options)
{
    if (!model.memory_domain.has_sample())
        throw Error(ErrorCode::MissingSample,
                    "open memory domain without a test sample; DFT conditions cannot be checked");

    DftReport report;
    report.exhaustive = model.memory_domain.exhaustive();
    const auto memories = model.memory_domain.enumerate();
    report.memory_values = memories.size();
    const auto points = input_points(model, options);
    const auto names = sorted_function_names(model);

    // Determinism.
    if (model.initial_states.size() != 1) {
        DeterminismWitness w;
        w.kind = DeterminismWitness::Kind::InitialStates;
        w.targets = model.initial_states;
        report.determinism.push_back(std::move(w));
    }
    for (const auto& [key, targets] : model.next_state) {
        if (targets.size() > 1) {
            DeterminismWitness w;
            w.kind = DeterminismWitness::Kind::AutomatonBranch;
            w.state = key.first;
            w.function1 = key.second;
            w.targets = targets;
            report.determinism.push_back(std::move(w));
        }
    }
    for (const auto& q : model.states) {
        auto at = model.functions_at(q);
        for (std::size_t i = 0; i < at.size(); ++i) {
            for (std::size_t j = i + 1; j < at.size(); ++j) {
                const ProcessingFunction* f1 = model.function(at[i]);
                const ProcessingFunction* f2 = model.function(at[j]);
                if (!f1 || !f2)
                    continue;
                bool found = false;
                for (const auto& m : memories) {
                    for (const auto& p : points) {
                        if (!f1->apply(m, p.input, p.in_port).empty() &&
                            !f2->apply(m, p.input, p.in_port).empty()) {
                            DeterminismWitness w;
                            w.kind = DeterminismWitness::Kind::DomainOverlap;
                            w.state = q;
                            w.function1 = at[i];
                            w.function2 = at[j];
                            w.memory = m;
                            w.input = p.input;
                            w.in_port = p.in_port;
                            report.determinism.push_back(std::move(w));
                            found = true;
                            break;
                        }
                    }
                    if (found)
                        break;
                }
            }
        }
    }
    report.deterministic = report.determinism.empty();

    // Completeness.
    for (const auto& name : names) {
        const ProcessingFunction* f = model.function(name);
        CompletenessEntry entry{name, true, std::nullopt};
        for (const auto& m : memories) {
            bool fires = std::any_of(points.begin(), points.end(), [&](const InputPoint& p) {
                return !f->apply(m, p.input, p.in_port).empty();
            });
            if (!fires) {
                entry.pass = false;
                entry.witness_memory = m;
                break;
            }
        }
        report.completeness.push_back(std::move(entry));
    }

    // Output distinguishability.
    for (std::size_t i = 0; i < names.size(); ++i) {
        const ProcessingFunction* f1 = model.function(names[i]);
        for (std::size_t j = i + 1; j < names.size(); ++j) {
            const ProcessingFunction* f2 = model.function(names[j]);
            bool found = false;
            for (const auto& m : memories) {
                for (const auto& p : points) {
                    auto e1s = f1->apply(m, p.input, p.in_port);
                    if (e1s.empty())
                        continue;
                    auto e2s = f2->apply(m, p.input, p.in_port);
                    for (const auto& e1 : e1s) {
                        for (const auto& e2 : e2s) {
                            if (e1.output == e2.output) {
                                report.distinguishability.push_back(
                                    {names[i], names[j], m, e1.memory, e2.memory, p.input,
                                     p.in_port, e1.output});
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
                if (found)
                    break;
            }
        }
    }
    report.output_distinguishable = report.distinguishability.empty();
    return report;
}

bool replay_witness(const Sxm& model, const DeterminismWitness& w)
{
    switch (w.kind) {
    case DeterminismWitness::Kind::InitialStates:
        return model.initial_states.size() != 1;
    case DeterminismWitness::Kind::AutomatonBranch: {
        auto it = model.next_state.find({w.state, w.function1});
        return it != model.next_state.end() && it->second.size() > 1;
    }
    case DeterminismWitness::Kind::DomainOverlap: {
        const ProcessingFunction* f1 = model.function(w.function1);
        const ProcessingFunction* f2 = model.function(w.function2);
        if (!f1 || !f2 || w.function1 == w.function2)
            return false;
        if (!model.next_state.count({w.state, w.function1}) ||
            !model.next_state.count({w.state, w.function2}))
            return false;
        return !f1->apply(w.memory, w.input, w.in_port).empty() &&
               !f2->apply(w.memory, w.input, w.in_port).empty();
    }
    }
    return false;
}

bool replay_witness(const Sxm& model, const CompletenessEntry& e, const DftOptions& options)
{
    if (e.pass || !e.witness_memory)
        return false;
    const ProcessingFunction* f = model.function(e.function);
    if (!f)
        return false;
    for (const auto& p : input_points(model, options)) {
        if (!f->apply(*e.witness_memory, p.input, p.in_port).empty())
            return false;
    }
    return true;
}

bool replay_witness(const Sxm& model, const DistinguishabilityWitness& w)
{
    const ProcessingFunction* f1 = model.function(w.function1);
    const ProcessingFunction* f2 = model.function(w.function2);
    if (!f1 || !f2 || w.function1 == w.function2)
        return false;
    auto has = [&](const ProcessingFunction* f, const Value& mem_next) {
        for (const auto& e : f->apply(w.memory, w.input, w.in_port)) {
            if (e.output == w.output && e.memory == mem_next)
                return true;
        }
        return false;
    };
    return has(f1, w.memory1) && has(f2, w.memory2);
}

nlohmann::json dft_report_to_json(const DftReport& report)
{
    using nlohmann::json;
    auto det = json::array();
    for (const auto& w : report.determinism) {
        json j;
        switch (w.kind) {
        case DeterminismWitness::Kind::InitialStates:
            j = {{"kind", "initial-states"}, {"initial_states", w.targets}};
            break;
        case DeterminismWitness::Kind::AutomatonBranch:
            j = {{"kind", "automaton-branch"},
                 {"state", w.state},
                 {"function", w.function1},
                 {"targets", w.targets}};
            break;
        case DeterminismWitness::Kind::DomainOverlap:
            j = {{"kind", "domain-overlap"},
                 {"state", w.state},
                 {"function1", w.function1},
                 {"function2", w.function2},
                 {"memory", value_to_json(w.memory)},
                 {"input", value_to_json(w.input)}};
            if (!w.in_port.is_nomem())
                j["in_port"] = value_to_json(w.in_port);
            break;
        }
        det.push_back(std::move(j));
    }
    auto comp = json::array();
    for (const auto& e : report.completeness) {
        json j = {{"function", e.function}, {"pass", e.pass}};
        if (e.witness_memory)
            j["witness_memory"] = value_to_json(*e.witness_memory);
        comp.push_back(std::move(j));
    }
    auto dist = json::array();
    for (const auto& w : report.distinguishability) {
        json j = {{"function1", w.function1}, {"function2", w.function2},
                  {"memory", value_to_json(w.memory)}, {"memory1", value_to_json(w.memory1)},
                  {"memory2", value_to_json(w.memory2)}, {"input", value_to_json(w.input)},
                  {"output", value_to_json(w.output)}};
        if (!w.in_port.is_nomem())
            j["in_port"] = value_to_json(w.in_port);
        dist.push_back(std::move(j));
    }
    return {{"schema", 1},
            {"passed", report.passed()},
            {"exhaustive", report.exhaustive},
            {"memory_values", report.memory_values},
            {"deterministic", {{"pass", report.deterministic}, {"witnesses", det}}},
            {"complete", {{"pass", report.complete()}, {"functions", comp}}},
            {"output_distinguishable",
             {{"pass", report.output_distinguishable}, {"witnesses", dist}}}};
}

std::string render_dft_report(const DftReport& report)
{
    std::ostringstream os;
    const char* pass_text = report.exhaustive ? "pass" : "no violation found (sampled)";
    auto row = [&](const std::string& name, bool pass, const std::string& witness) {
        os << "  " << name;
        for (std::size_t i = name.size(); i < 28; ++i)
            os << ' ';
        os << (pass ? pass_text : "FAIL");
        if (!witness.empty())
            os << "  " << witness;
        os << '\n';
    };
    os << "design-for-test conditions ("
       << (report.exhaustive ? "exhaustive" : "sampled, not exhaustive") << ", "
       << report.memory_values << " memory values)\n";

    if (report.determinism.empty())
        row("deterministic", true, "");
    for (const auto& w : report.determinism) {
        std::string text;
        switch (w.kind) {
        case DeterminismWitness::Kind::InitialStates:
            text = std::to_string(w.targets.size()) + " initial states";
            break;
        case DeterminismWitness::Kind::AutomatonBranch:
            text = "F(" + w.state + "," + w.function1 + ") has " +
                   std::to_string(w.targets.size()) + " targets";
            break;
        case DeterminismWitness::Kind::DomainOverlap:
            text = "state " + w.state + ": " + w.function1 + " and " + w.function2 +
                   " both defined at m=" + w.memory.to_string() + ", input " +
                   w.input.to_string() +
                   (w.in_port.is_nomem() ? "" : ", in-port " + w.in_port.to_string());
            break;
        }
        row("deterministic", false, text);
    }
    for (const auto& e : report.completeness)
        row("complete[" + e.function + "]", e.pass,
            e.pass ? "" : "no input fires it at m=" + e.witness_memory->to_string());
    if (report.distinguishability.empty())
        row("output-distinguishable", true, "");
    for (const auto& w : report.distinguishability)
        row("output-distinguishable", false,
            w.function1 + "/" + w.function2 + " both emit " + w.output.to_string() + " at m=" +
                w.memory.to_string() + ", input " + w.input.to_string() + " (m1=" +
                w.memory1.to_string() + ", m2=" + w.memory2.to_string() + ")");
    os << (report.passed() ? "result: pass" : "result: FAIL") << '\n';
    return os.str();
}

}  // namespace heterotest
