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
#include "heterotest/fsm_testing.hpp"

#include "heterotest/dft.hpp"
#include "heterotest/error.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace heterotest {

namespace {

void require_deterministic(const Automaton& a)
{
    if (a.initial_states.size() != 1)
        throw Error(ErrorCode::NondeterministicInput,
                    "automaton has " + std::to_string(a.initial_states.size()) +
                        " initial states");
    for (std::size_t i = 1; i < a.arcs.size(); ++i) {
        if (a.arcs[i].from == a.arcs[i - 1].from && a.arcs[i].label == a.arcs[i - 1].label)
            throw Error(ErrorCode::NondeterministicInput,
                        "state " + a.arcs[i].from + " has several '" + a.arcs[i].label + "' arcs",
                        {{"state", a.arcs[i].from}, {"label", a.arcs[i].label}});
    }
}

bool shorter_first(const PhiSequence& a, const PhiSequence& b)
{
    if (a.size() != b.size())
        return a.size() < b.size();
    return a < b;
}

// Breadth-first order from the initial state, labels expanded in sorted order.
std::vector<std::string> bfs_order(const Automaton& a)
{
    std::vector<std::string> order;
    std::set<std::string> seen;
    std::deque<std::string> queue;
    for (const auto& q : a.initial_states) {
        if (seen.insert(q).second) {
            queue.push_back(q);
            order.push_back(q);
        }
    }
    while (!queue.empty()) {
        auto q = queue.front();
        queue.pop_front();
        for (auto it = std::lower_bound(a.arcs.begin(), a.arcs.end(), Arc{q, "", ""});
             it != a.arcs.end() && it->from == q; ++it) {
            if (seen.insert(it->to).second) {
                queue.push_back(it->to);
                order.push_back(it->to);
            }
        }
    }
    return order;
}

// (position where the walk dies or |w|, accepted at the end).
std::pair<std::size_t, bool> walk_signature(const Automaton& a, const std::string& s,
                                            const PhiSequence& w)
{
    std::string q = s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        auto n = a.successor(q, w[i]);
        if (!n)
            return {i, false};
        q = *n;
    }
    return {w.size(), a.is_terminal(q)};
}

}  // namespace

Automaton prune_unreachable(const Automaton& a)
{
    auto order = bfs_order(a);
    std::set<std::string> keep(order.begin(), order.end());
    Automaton out;
    for (const auto& q : a.states) {
        if (keep.count(q))
            out.states.push_back(q);
    }
    out.initial_states = a.initial_states;
    for (const auto& q : a.terminal_states) {
        if (keep.count(q))
            out.terminal_states.push_back(q);
    }
    for (const auto& arc : a.arcs) {
        if (keep.count(arc.from))
            out.arcs.push_back(arc);
    }
    return out;
}

namespace {

// keep_dead: states that cannot reach a terminal state stay distinct from the
// missing-transition sink, since refusals are observable while testing.
Automaton minimize(const Automaton& input, bool keep_dead)
{
    require_deterministic(input);
    const Automaton a = prune_unreachable(input);
    const auto labels = a.labels();
    const auto order = bfs_order(a);

    // Moore refinement with an implicit non-terminal sink; block 0 always
    // holds the sink, so states landing there are dead.
    std::map<std::string, int> block;
    std::set<int> initial_blocks{0};
    for (const auto& q : order) {
        block[q] = a.is_terminal(q) ? 1 : (keep_dead ? 2 : 0);
        initial_blocks.insert(block[q]);
    }
    std::size_t count = initial_blocks.size();
    for (;;) {
        std::map<std::vector<int>, int> ids;
        ids.emplace(std::vector<int>(labels.size() + 1, 0), 0);
        std::map<std::string, int> next;
        for (const auto& q : order) {
            std::vector<int> sig{block[q]};
            for (const auto& l : labels) {
                auto t = a.successor(q, l);
                sig.push_back(t ? block[*t] : 0);
            }
            next[q] = ids.emplace(sig, static_cast<int>(ids.size())).first->second;
        }
        block = std::move(next);
        if (ids.size() == count)
            break;
        count = ids.size();
    }

    // Name each block after its first member in BFS order.
    std::map<int, std::string> name;
    for (const auto& q : order) {
        if (!name.count(block[q]))
            name[block[q]] = q;
    }
    const std::string& init = a.initial_states.front();

    Automaton out;
    for (const auto& q : order) {
        if (name[block[q]] != q)
            continue;
        if (block[q] == 0 && q != init)
            continue;  // sink-equivalent
        out.states.push_back(q);
        if (a.is_terminal(q))
            out.terminal_states.push_back(q);
    }
    out.initial_states = {name[block[init]]};
    std::set<Arc> arcs;
    for (const auto& arc : a.arcs) {
        if (name[block[arc.from]] != arc.from)
            continue;
        if (block[arc.from] == 0 && arc.from != init)
            continue;
        if (block[arc.to] == 0 && name[0] != init)
            continue;
        arcs.insert(Arc{arc.from, arc.label, name[block[arc.to]]});
    }
    out.arcs.assign(arcs.begin(), arcs.end());
    std::sort(out.terminal_states.begin(), out.terminal_states.end());
    return out;
}

}  // namespace

Automaton minimize_automaton(const Automaton& a)
{
    return minimize(a, false);
}

Automaton minimize_observable(const Automaton& a)
{
    return minimize(a, true);
}

std::vector<PhiSequence> state_cover(const Automaton& a)
{
    require_deterministic(a);
    std::map<std::string, PhiSequence> path;
    std::vector<std::string> order;
    std::deque<std::string> queue;
    const auto& init = a.initial_states.front();
    path[init] = {};
    order.push_back(init);
    queue.push_back(init);
    while (!queue.empty()) {
        auto q = queue.front();
        queue.pop_front();
        for (auto it = std::lower_bound(a.arcs.begin(), a.arcs.end(), Arc{q, "", ""});
             it != a.arcs.end() && it->from == q; ++it) {
            if (path.count(it->to))
                continue;
            auto p = path[q];
            p.push_back(it->label);
            path[it->to] = p;
            order.push_back(it->to);
            queue.push_back(it->to);
        }
    }
    for (const auto& q : a.states) {
        if (!path.count(q))
            throw Error(ErrorCode::UnreachableState, "state " + q + " is unreachable",
                        {{"state", q}});
    }
    std::vector<PhiSequence> cover;
    for (const auto& q : order)
        cover.push_back(path[q]);
    return cover;
}

bool separates(const Automaton& a, const std::string& s, const std::string& t,
               const PhiSequence& w)
{
    return walk_signature(a, s, w) != walk_signature(a, t, w);
}

std::vector<PhiSequence> characterization_set(const Automaton& a)
{
    require_deterministic(a);
    if (a.states.size() <= 1)
        return {PhiSequence{}};
    const auto labels = a.labels();

    // Shortest, lexicographically least separator per pair: breadth-first
    // search over state pairs ("" marks the sink).
    auto separator = [&](const std::string& s, const std::string& t)
        -> std::optional<PhiSequence> {
        using Pair = std::pair<std::string, std::string>;
        std::map<Pair, PhiSequence> seen;
        std::deque<Pair> queue;
        seen[{s, t}] = {};
        queue.push_back({s, t});
        while (!queue.empty()) {
            auto [x, y] = queue.front();
            queue.pop_front();
            const auto& w = seen[{x, y}];
            bool xs = x.empty(), ys = y.empty();
            if (xs != ys || (!xs && a.is_terminal(x) != a.is_terminal(y)))
                return w;
            if (xs && ys)
                continue;
            for (const auto& l : labels) {
                auto nx = a.successor(x, l);
                auto ny = a.successor(y, l);
                Pair p{nx.value_or(""), ny.value_or("")};
                if (p.first.empty() && p.second.empty())
                    continue;
                if (seen.count(p))
                    continue;
                auto nw = w;
                nw.push_back(l);
                seen[p] = nw;
                queue.push_back(p);
            }
        }
        return std::nullopt;
    };

    std::vector<std::pair<std::string, std::string>> pairs;
    std::vector<PhiSequence> seps;
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        for (std::size_t j = i + 1; j < a.states.size(); ++j) {
            auto w = separator(a.states[i], a.states[j]);
            if (!w)
                throw Error(ErrorCode::NotMinimal,
                            "states " + a.states[i] + " and " + a.states[j] + " are equivalent",
                            {{"states", {a.states[i], a.states[j]}}});
            pairs.push_back({a.states[i], a.states[j]});
            seps.push_back(*w);
        }
    }
    std::vector<std::size_t> idx(pairs.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t x, std::size_t y) { return shorter_first(seps[x], seps[y]); });

    std::vector<PhiSequence> w_set;
    std::vector<bool> done(pairs.size(), false);
    for (auto i : idx) {
        if (done[i])
            continue;
        w_set.push_back(seps[i]);
        for (std::size_t p = 0; p < pairs.size(); ++p) {
            if (!done[p] && separates(a, pairs[p].first, pairs[p].second, seps[i]))
                done[p] = true;
        }
    }
    std::sort(w_set.begin(), w_set.end(), shorter_first);
    w_set.erase(std::unique(w_set.begin(), w_set.end()), w_set.end());
    return w_set;
}

std::vector<PhiSequence> w_method_phi_sequences(const Automaton& a, std::size_t k)
{
    const auto cover = state_cover(a);
    const auto w_set = characterization_set(a);
    const auto labels = a.labels();

    std::vector<PhiSequence> middle{PhiSequence{}};
    std::vector<PhiSequence> layer{PhiSequence{}};
    for (std::size_t len = 1; len <= k + 1; ++len) {
        std::vector<PhiSequence> next;
        for (const auto& p : layer) {
            for (const auto& l : labels) {
                auto q = p;
                q.push_back(l);
                next.push_back(std::move(q));
            }
        }
        middle.insert(middle.end(), next.begin(), next.end());
        layer = std::move(next);
    }

    std::set<PhiSequence> out;
    for (const auto& c : cover) {
        for (const auto& m : middle) {
            for (const auto& w : w_set) {
                PhiSequence s = c;
                s.insert(s.end(), m.begin(), m.end());
                s.insert(s.end(), w.begin(), w.end());
                out.insert(std::move(s));
            }
        }
    }
    std::vector<PhiSequence> result(out.begin(), out.end());
    std::stable_sort(result.begin(), result.end(), shorter_first);
    return result;
}

FundamentalInputs fundamental_test_inputs_detailed(const Sxm& model, const PhiSequence& seq)
{
    FundamentalInputs out;
    if (seq.empty())
        return out;
    if (model.inputs.empty())
        throw Error(ErrorCode::InvalidModel, "empty input alphabet");
    const Value& smallest = model.inputs.front();
    Value memory = model.initial_memory;
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (out.fallback_from) {
            out.input.push_back(smallest);
            continue;
        }
        const ProcessingFunction* f = model.function(seq[i]);
        if (!f)
            throw Error(ErrorCode::InvalidModel, "unknown function '" + seq[i] + "'");
        bool found = false;
        for (const auto& in : model.inputs) {
            auto effects = f->apply(memory, in);
            if (effects.empty())
                continue;
            out.input.push_back(in);
            memory = effects.front().memory;
            found = true;
            break;
        }
        if (!found) {
            out.fallback_from = i;
            out.input.push_back(smallest);
        }
    }
    return out;
}

std::vector<Value> fundamental_test_inputs(const Sxm& model, const PhiSequence& seq)
{
    return fundamental_test_inputs_detailed(model, seq).input;
}

std::vector<std::vector<Value>> observe(const Sxm& model, const std::vector<Value>& input)
{
    return sxm_outputs(model, input);
}

std::vector<std::vector<std::vector<Value>>> observe_prefixes(const Sxm& model,
                                                              const std::vector<Value>& input,
                                                              std::size_t branch_bound)
{
    std::set<SxmConfiguration> frontier;
    for (const auto& q : model.initial_states)
        frontier.insert(initial_configuration(model, q, {}));
    std::vector<std::vector<std::vector<Value>>> out;
    for (std::size_t i = 0;; ++i) {
        std::set<std::vector<Value>> outs;
        for (const auto& c : frontier)
            outs.insert(c.output);
        out.emplace_back(outs.begin(), outs.end());
        if (i == input.size())
            break;
        std::set<SxmConfiguration> next;
        for (auto c : frontier) {
            c.remaining_input = {input[i]};
            for (auto& n : sxm_step(model, c))
                if (n.remaining_input.empty())
                    next.insert(std::move(n));
        }
        if (next.size() > branch_bound)
            throw Error(ErrorCode::BranchBoundExceeded,
                        "more than " + std::to_string(branch_bound) + " live runs");
        frontier = std::move(next);
    }
    return out;
}

TestSuite build_w_suite(const Sxm& model, std::size_t k)
{
    const Automaton assoc = associated_automaton(model);
    if (!assoc.is_deterministic())
        throw Error(ErrorCode::NondeterministicAutomaton,
                    "the associated automaton is nondeterministic");
    const Automaton minimal = minimize_observable(assoc);
    const auto cover = state_cover(minimal);
    const auto w_set = characterization_set(minimal);
    const auto seqs = w_method_phi_sequences(minimal, k);

    std::map<std::vector<Value>, TestCase> cases;
    std::size_t fallbacks = 0;
    for (const auto& s : seqs) {
        auto t = fundamental_test_inputs_detailed(model, s);
        if (t.fallback_from)
            ++fallbacks;
        if (cases.count(t.input))
            continue;
        TestCase c;
        c.input = t.input;
        c.expected_outputs = observe(model, t.input);
        c.prefix_outputs = observe_prefixes(model, t.input);
        cases.emplace(t.input, std::move(c));
    }

    TestSuite suite;
    suite.method = "W";
    suite.k = k;
    for (auto& [in, c] : cases)
        suite.cases.push_back(std::move(c));
    auto& md = suite.metadata;
    md["states"] = assoc.states.size();
    md["minimal_states"] = minimal.states.size();
    md["state_cover"] = cover.size();
    md["characterization_set"] = w_set.size();
    md["phi_sequences"] = seqs.size();
    md["infeasible_fallbacks"] = fallbacks;
    md["fallback_policy"] = "lexicographically smallest input from the first infeasible step";
    md["memory_exhaustive"] = model.memory_domain.exhaustive();
    return suite;
}

TestSuite generate_sxm_test_suite(const Sxm& model, std::size_t k)
{
    const auto report = check_dft(model);
    if (!report.passed())
        throw Error(ErrorCode::DftFailure, "model fails the design-for-test conditions",
                    dft_report_to_json(report));
    if (!associated_automaton(model).is_deterministic())
        throw Error(ErrorCode::NondeterministicAutomaton,
                    "the associated automaton is nondeterministic");
    auto suite = build_w_suite(model, k);
    if (!report.exhaustive)
        suite.metadata["warning"] = "design-for-test conditions checked on a sample only";
    return suite;
}

nlohmann::ordered_json suite_to_json(const TestSuite& suite)
{
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["method"] = suite.method;
    j["k"] = suite.k;
    j["metadata"] = suite.metadata;
    auto cases = nlohmann::ordered_json::array();
    for (const auto& c : suite.cases) {
        nlohmann::ordered_json in = nlohmann::ordered_json::array();
        for (const auto& v : c.input)
            in.push_back(value_to_ojson(v));
        auto rel = [](const std::vector<std::vector<Value>>& r) {
            nlohmann::ordered_json outs = nlohmann::ordered_json::array();
            for (const auto& o : r) {
                nlohmann::ordered_json seq = nlohmann::ordered_json::array();
                for (const auto& v : o)
                    seq.push_back(value_to_ojson(v));
                outs.push_back(std::move(seq));
            }
            return outs;
        };
        nlohmann::ordered_json prefixes = nlohmann::ordered_json::array();
        for (const auto& r : c.prefix_outputs)
            prefixes.push_back(rel(r));
        cases.push_back(
            {{"input", in}, {"expected_outputs", rel(c.expected_outputs)}, {"prefix_outputs", prefixes}});
    }
    j["cases"] = cases;
    return j;
}

TestSuite suite_from_json(const nlohmann::json& j)
{
    try {
        TestSuite s;
        for (auto it = j.begin(); it != j.end(); ++it) {
            static const std::set<std::string> known{"schema", "method", "k", "metadata", "cases"};
            if (!known.count(it.key()))
                throw Error(ErrorCode::Parse, "test suite: unknown key '" + it.key() + "'");
        }
        s.method = j.at("method").get<std::string>();
        s.k = j.at("k").get<std::size_t>();
        if (j.contains("metadata"))
            s.metadata = nlohmann::ordered_json::parse(j.at("metadata").dump());
        for (const auto& c : j.at("cases")) {
            TestCase tc;
            for (const auto& v : c.at("input"))
                tc.input.push_back(value_from_json(v));
            auto rel = [](const nlohmann::json& r) {
                std::vector<std::vector<Value>> outs;
                for (const auto& o : r) {
                    std::vector<Value> seq;
                    for (const auto& v : o)
                        seq.push_back(value_from_json(v));
                    outs.push_back(std::move(seq));
                }
                return outs;
            };
            tc.expected_outputs = rel(c.at("expected_outputs"));
            if (c.contains("prefix_outputs")) {
                for (const auto& r : c.at("prefix_outputs"))
                    tc.prefix_outputs.push_back(rel(r));
                if (tc.prefix_outputs.size() != tc.input.size() + 1)
                    throw Error(ErrorCode::Parse,
                                "test suite: prefix_outputs needs one entry per prefix");
            }
            s.cases.push_back(std::move(tc));
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("test suite: ") + e.what());
    }
}

}  // namespace heterotest
