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

#include "heterotest/csxms.hpp"
#include "heterotest/json_io.hpp"
#include "heterotest/psystem.hpp"
#include "heterotest/sxm.hpp"

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <string>
#include <vector>

namespace fixtures {

using nlohmann::json;

inline std::filesystem::path models_dir() { return HETEROTEST_MODELS_DIR; }

inline json model_json(const std::string& name) { return heterotest::read_json_file(models_dir() / name); }

inline heterotest::PSystem ps2() { return heterotest::parse_psystem(model_json("ps2.json")); }

inline heterotest::Value atom(const std::string& s) { return heterotest::Value::atom(s); }

inline std::vector<heterotest::Value> atoms(std::initializer_list<const char*> names)
{
    std::vector<heterotest::Value> out;
    for (const char* n : names)
        out.push_back(atom(n));
    return out;
}

inline heterotest::PConfiguration pcfg(const std::string& one, const std::string& two)
{
    return {heterotest::Multiset::parse(one), heterotest::Multiset::parse(two)};
}

/// Counter SXM: memory 0..3; phi_inc (m<3, "i" -> "o", m+1) loops on q0,
/// phi_reset (any m, "r" -> "z", 0) moves q0 -> q1.
inline json counter_json()
{
    return json::parse(R"({
      "schema": 1,
      "inputs": ["i", "r"], "outputs": ["o", "z"],
      "states": ["q0", "q1"], "initial_states": ["q0"], "terminal_states": ["q0", "q1"],
      "memory_domain": {"range": [0, 3]}, "initial_memory": 0,
      "functions": [
        {"name": "phi_inc", "cases": [
          {"mem_pattern": "?m", "input": "i", "guard": {"op": "<", "args": ["?m", 3]},
           "output": "o", "mem_next": {"op": "+", "args": ["?m", 1]}}]},
        {"name": "phi_reset", "cases": [
          {"mem_pattern": "_", "input": "r", "output": "z", "mem_next": 0}]}
      ],
      "next_state": [
        {"from": "q0", "fn": "phi_inc", "to": ["q0"]},
        {"from": "q0", "fn": "phi_reset", "to": ["q1"]}
      ]
    })");
}

inline heterotest::Sxm counter() { return heterotest::parse_sxm(counter_json()); }

/// Counter whose functions are complete and output-distinguishable: the
/// DFT-satisfying variant used for suite generation.
inline json dft_counter_json()
{
    auto j = counter_json();
    j["inputs"] = {"i", "r", "s"};
    j["outputs"] = {"o", "z"};
    j["functions"][0]["cases"].push_back(json::parse(
        R"({"mem_pattern": 3, "input": "s", "output": "o", "mem_next": 3})"));
    j["next_state"].push_back(json::parse(R"({"from": "q1", "fn": "phi_inc", "to": ["q0"]})"));
    return j;
}

inline heterotest::Automaton automaton(std::vector<std::string> states, std::vector<std::string> terminal,
                                       std::vector<heterotest::Arc> arcs)
{
    heterotest::Automaton a;
    a.states = std::move(states);
    a.initial_states = {a.states.front()};
    a.terminal_states = std::move(terminal);
    std::sort(a.terminal_states.begin(), a.terminal_states.end());
    a.arcs = std::move(arcs);
    std::sort(a.arcs.begin(), a.arcs.end());
    return a;
}

}  // namespace fixtures
