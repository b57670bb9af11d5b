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
#include "fixtures.hpp"

#include "heterotest/error.hpp"
#include "heterotest/fsm_testing.hpp"

#include <doctest.h>

#include <set>

using namespace heterotest;
using fixtures::atoms;
using fixtures::automaton;
using nlohmann::json;

namespace {

std::size_t block_count(const Automaton& a) { return a.states.size(); }

}  // namespace

TEST_CASE("minimize_automaton")
{
    SUBCASE("1-state loop is already minimal")
    {
        const auto a = automaton({"q0"}, {"q0"}, {{"q0", "a", "q0"}});
        const auto m = minimize_automaton(a);
        CHECK(m.states == a.states);
        CHECK(m.arcs == a.arcs);
        CHECK(m.terminal_states == a.terminal_states);
    }
    SUBCASE("two equivalent states merge")
    {
        const auto a = automaton({"q0", "q1", "q2"}, {"q1", "q2"}, {{"q0", "a", "q1"}, {"q0", "b", "q2"}});
        const auto m = minimize_automaton(a);
        CHECK(block_count(m) == 2);
        CHECK(m.arcs == std::vector<Arc>{{"q0", "a", "q1"}, {"q0", "b", "q1"}});
    }
    SUBCASE("unreachable state dropped")
    {
        const auto a = automaton({"q0", "q1", "lost"}, {"q0", "q1", "lost"},
                                 {{"q0", "a", "q1"}, {"lost", "a", "q0"}});
        const auto m = minimize_automaton(a);
        CHECK(std::find(m.states.begin(), m.states.end(), "lost") == m.states.end());
    }
    SUBCASE("idempotent")
    {
        const auto a = automaton({"q0", "q1", "q2", "q3"}, {"q0", "q2"},
                                 {{"q0", "a", "q1"}, {"q1", "a", "q2"}, {"q2", "a", "q3"}, {"q3", "a", "q0"}});
        const auto once = minimize_automaton(a);
        const auto twice = minimize_automaton(once);
        CHECK(once.states == twice.states);
        CHECK(once.arcs == twice.arcs);
        CHECK(block_count(once) == 2);
    }
    SUBCASE("dead states merge with the sink but stay observable")
    {
        const auto a = automaton({"q0", "dead"}, {"q0"}, {{"q0", "a", "q0"}, {"q0", "b", "dead"}});
        CHECK(block_count(minimize_automaton(a)) == 1);
        CHECK(block_count(minimize_observable(a)) == 2);
    }
}

TEST_CASE("state_cover")
{
    CHECK(state_cover(automaton({"q0"}, {"q0"}, {})) == std::vector<PhiSequence>{{}});
    const auto chain = automaton({"q0", "q1", "q2"}, {"q0", "q1", "q2"}, {{"q0", "a", "q1"}, {"q1", "b", "q2"}});
    CHECK(state_cover(chain) == std::vector<PhiSequence>{{}, {"a"}, {"a", "b"}});
    const auto tie = automaton({"q0", "q1"}, {"q0", "q1"}, {{"q0", "b", "q1"}, {"q0", "a", "q1"}});
    CHECK(state_cover(tie) == std::vector<PhiSequence>{{}, {"a"}});
}

TEST_CASE("characterization_set")
{
    CHECK(characterization_set(automaton({"q0"}, {"q0"}, {{"q0", "a", "q0"}})) ==
          std::vector<PhiSequence>{{}});
    const auto two = automaton({"q0", "q1"}, {"q0", "q1"},
                               {{"q0", "a", "q1"}, {"q1", "a", "q1"}, {"q1", "b", "q0"}});
    CHECK(characterization_set(two) == std::vector<PhiSequence>{{"b"}});

    const auto cycle = automaton({"q0", "q1", "q2"}, {"q0", "q1", "q2"},
                                 {{"q0", "a", "q1"}, {"q1", "b", "q2"}, {"q2", "c", "q0"}});
    const auto w = characterization_set(cycle);
    CHECK(w.size() <= 2);
    for (const auto& s : cycle.states)
        for (const auto& t : cycle.states) {
            if (s >= t)
                continue;
            bool separated = false;
            for (const auto& seq : w)
                separated = separated || separates(cycle, s, t, seq);
            CHECK_MESSAGE(separated, s << " vs " << t);
        }

    const auto not_minimal = automaton({"q0", "q1", "q2"}, {"q1", "q2"}, {{"q0", "a", "q1"}, {"q0", "b", "q2"}});
    try {
        characterization_set(not_minimal);
        FAIL("expected not-minimal");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NotMinimal);
    }
}

TEST_CASE("w_method_phi_sequences")
{
    const auto one = automaton({"q0"}, {"q0"}, {{"q0", "phi", "q0"}});
    CHECK(w_method_phi_sequences(one, 0) == std::vector<PhiSequence>{{}, {"phi"}});

    const auto chain = automaton({"q0", "q1", "q2"}, {"q0", "q1", "q2"}, {{"q0", "a", "q1"}, {"q1", "b", "q2"}});
    const auto c = state_cover(chain);
    const auto w = characterization_set(chain);
    const auto labels = chain.labels();
    CHECK(w_method_phi_sequences(chain, 0).size() <= c.size() * (labels.size() + 1) * w.size());

    // Independent expansion of C · Φ^{≤2} · W.
    std::vector<PhiSequence> middles{{}};
    for (std::size_t len = 1; len <= 2; ++len) {
        std::vector<PhiSequence> grown;
        for (const auto& m : middles)
            if (m.size() == len - 1)
                for (const auto& l : labels) {
                    auto g = m;
                    g.push_back(l);
                    grown.push_back(g);
                }
        middles.insert(middles.end(), grown.begin(), grown.end());
    }
    std::set<PhiSequence> expected;
    for (const auto& p : c)
        for (const auto& m : middles)
            for (const auto& s : w) {
                PhiSequence seq = p;
                seq.insert(seq.end(), m.begin(), m.end());
                seq.insert(seq.end(), s.begin(), s.end());
                expected.insert(seq);
            }
    std::vector<PhiSequence> ordered(expected.begin(), expected.end());
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const PhiSequence& x, const PhiSequence& y) { return x.size() < y.size(); });
    CHECK(w_method_phi_sequences(chain, 1) == ordered);
}

TEST_CASE("fundamental_test_inputs")
{
    const Sxm m = fixtures::counter();
    CHECK(fundamental_test_inputs(m, {}).empty());
    CHECK(fundamental_test_inputs(m, {"phi_inc", "phi_reset"}) == atoms({"i", "r"}));
    const auto capped = fundamental_test_inputs_detailed(m, {"phi_inc", "phi_inc", "phi_inc", "phi_inc"});
    CHECK(capped.input == atoms({"i", "i", "i", "i"}));
    CHECK(capped.fallback_from == 3);
}

TEST_CASE("generate_sxm_test_suite")
{
    SUBCASE("DFT-failing model is rejected with its report")
    {
        try {
            generate_sxm_test_suite(fixtures::counter(), 0);
            FAIL("expected dft-failure");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DftFailure);
            CHECK(e.detail().contains("deterministic"));
        }
    }
    SUBCASE("cases are self-consistent")
    {
        const Sxm m = parse_sxm(fixtures::dft_counter_json());
        const auto suite = generate_sxm_test_suite(m, 0);
        REQUIRE_FALSE(suite.cases.empty());
        bool has_reset = false;
        for (const auto& c : suite.cases) {
            CHECK(c.expected_outputs == sxm_outputs(m, c.input));
            CHECK(c.prefix_outputs.size() == c.input.size() + 1);
            has_reset = has_reset || std::find(c.input.begin(), c.input.end(), Value::atom("r")) != c.input.end();
        }
        CHECK(has_reset);
        CHECK(std::is_sorted(suite.cases.begin(), suite.cases.end()));

        const auto back = suite_from_json(suite_to_json(suite));
        CHECK(back.cases == suite.cases);
        CHECK(back.k == suite.k);
    }
    SUBCASE("1 state, 1 function, k=0 -> at most 2 cases")
    {
        const auto j = json::parse(R"({
          "schema": 1, "inputs": ["x"], "outputs": ["o"],
          "states": ["q0"], "initial_states": ["q0"], "terminal_states": ["q0"],
          "memory_domain": {"values": [0]}, "initial_memory": 0,
          "functions": [{"name": "phi", "cases": [{"mem_pattern": "_", "input": "x", "output": "o"}]}],
          "next_state": [{"from": "q0", "fn": "phi", "to": ["q0"]}]})");
        CHECK(generate_sxm_test_suite(parse_sxm(j), 0).cases.size() <= 2);
    }
}

TEST_CASE("observe_prefixes sees runs in every state")
{
    const auto j = json::parse(R"({
      "schema": 1, "inputs": ["x"], "outputs": ["a", "b"],
      "states": ["q0", "qa", "qb"], "initial_states": ["q0"], "terminal_states": ["qa"],
      "memory_domain": {"values": [0]}, "initial_memory": 0,
      "functions": [
        {"name": "phi_a", "cases": [{"mem_pattern": "_", "input": "x", "output": "a"}]},
        {"name": "phi_b", "cases": [{"mem_pattern": "_", "input": "x", "output": "b"}]}],
      "next_state": [{"from": "q0", "fn": "phi_a", "to": ["qa"]},
                     {"from": "q0", "fn": "phi_b", "to": ["qb"]}]})");
    const Sxm m = parse_sxm(j);
    const auto p = observe_prefixes(m, atoms({"x", "x"}));
    REQUIRE(p.size() == 3);
    CHECK(p[0] == std::vector<std::vector<Value>>{{}});
    CHECK(p[1] == std::vector<std::vector<Value>>{atoms({"a"}), atoms({"b"})});
    CHECK(p[2].empty());
    CHECK(observe(m, atoms({"x"})) == std::vector<std::vector<Value>>{atoms({"a"})});
}
