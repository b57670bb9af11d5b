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
#pragma once

#include "heterotest/sxm.hpp"

#include <json.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace heterotest {

using PhiSequence = std::vector<std::string>;

struct TestCase {
    std::vector<Value> input;
    /// Sorted distinct output sequences; empty when no run reaches a terminal state.
    std::vector<std::vector<Value>> expected_outputs;
    /// Output streams observed while the input is consumed: for each prefix
    /// input[0..i), i = 0..n, the sorted distinct outputs of every run that
    /// consumes it, whatever state it ends in.
    std::vector<std::vector<std::vector<Value>>> prefix_outputs;

    friend auto operator<=>(const TestCase&, const TestCase&) = default;
    friend bool operator==(const TestCase&, const TestCase&) = default;
};

struct TestSuite {
    std::string method = "W";
    std::size_t k = 0;
    std::vector<TestCase> cases;  // sorted by input, unique
    nlohmann::ordered_json metadata = nlohmann::ordered_json::object();
};

/// Drops states unreachable from the initial states.
Automaton prune_unreachable(const Automaton& a);

/// Minimal language-equivalent automaton. States are named after the
/// first member of each block met by a breadth-first walk.
Automaton minimize_automaton(const Automaton& a);

/// As minimize_automaton, but states with no path to a terminal state are kept
/// apart from missing transitions (refusals are observable). Used for test
/// generation.
Automaton minimize_observable(const Automaton& a);

/// Shortest (then lexicographically least) path to every state, in
/// breadth-first discovery order; starts with ε.
std::vector<PhiSequence> state_cover(const Automaton& a);

/// True iff `w` distinguishes `s` and `t` (defined-ness or acceptance).
bool separates(const Automaton& a, const std::string& s, const std::string& t,
               const PhiSequence& w);

std::vector<PhiSequence> characterization_set(const Automaton& a);

/// C · Φ^{≤k+1} · W, deduplicated, ordered by length then lexicographically.
std::vector<PhiSequence> w_method_phi_sequences(const Automaton& a, std::size_t k);

struct FundamentalInputs {
    std::vector<Value> input;
    /// Index of the first infeasible step, if the fallback was used.
    std::optional<std::size_t> fallback_from;
};

FundamentalInputs fundamental_test_inputs_detailed(const Sxm& model, const PhiSequence& seq);
std::vector<Value> fundamental_test_inputs(const Sxm& model, const PhiSequence& seq);

/// Full pipeline without the DFT gate (requires a deterministic automaton).
TestSuite build_w_suite(const Sxm& model, std::size_t k);

/// DFT-gated pipeline; throws DftFailure carrying the report.
TestSuite generate_sxm_test_suite(const Sxm& model, std::size_t k);

/// Distinct output sequences observed by running `input` (empty when none).
std::vector<std::vector<Value>> observe(const Sxm& model, const std::vector<Value>& input);
/// Outputs of every run consuming input[0..i), i = 0..n, regardless of the
/// final state. Throws BranchBoundExceeded past `branch_bound` live runs.
std::vector<std::vector<std::vector<Value>>> observe_prefixes(const Sxm& model,
                                                              const std::vector<Value>& input,
                                                              std::size_t branch_bound = 1024);

nlohmann::ordered_json suite_to_json(const TestSuite& suite);
TestSuite suite_from_json(const nlohmann::json& j);

}  // namespace heterotest
