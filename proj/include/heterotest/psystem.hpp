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
#include "heterotest/value.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace heterotest {

/// Rule target: 0 means "here", otherwise a compartment id.
struct RhsItem {
    std::string symbol;
    int target = 0;

    friend auto operator<=>(const RhsItem&, const RhsItem&) = default;
};

struct PRule {
    std::string name;
    int compartment = 0;
    Multiset lhs;
    std::vector<RhsItem> rhs;

    friend bool operator==(const PRule&, const PRule&) = default;
};

struct Membrane {
    int id = 0;
    int parent = 0;  // 0 for the skin
    std::vector<int> children;

    friend bool operator==(const Membrane&, const Membrane&) = default;
};

struct PSystem {
    std::vector<std::string> alphabet;  // sorted
    std::vector<Membrane> membranes;    // sorted by id
    std::map<int, Multiset> initial;
    std::vector<PRule> rules;           // compartment order, then declared order

    /// Position of a compartment id in configurations, if it exists.
    std::optional<std::size_t> index_of(int id) const;
    const Membrane* membrane(int id) const;
    std::vector<std::size_t> rules_of(int compartment) const;
    const PRule* rule(const std::string& name) const;

    friend bool operator==(const PSystem&, const PSystem&) = default;
};

/// Per-compartment multisets, ordered by compartment id.
using PConfiguration = std::vector<Multiset>;

/// Rule index -> instance count, one map per compartment.
using Assignment = std::vector<std::map<std::size_t, std::int64_t>>;

struct PStep {
    Assignment fired;
    PConfiguration result;

    friend bool operator==(const PStep&, const PStep&) = default;
};

struct ComputationTrace {
    PConfiguration start;
    std::vector<PStep> steps;
    bool halted = false;

    const PConfiguration& final_configuration() const
    {
        return steps.empty() ? start : steps.back().result;
    }

    friend bool operator==(const ComputationTrace&, const ComputationTrace&) = default;
};

ValidationReport validate_psystem(const PSystem& ps);

PConfiguration initial_p_configuration(const PSystem& ps);
std::string canonical(const PConfiguration& c);  // "(abe,b)"; empty compartments as λ
Value configuration_to_value(const PConfiguration& c);
std::optional<PConfiguration> configuration_from_value(const PSystem& ps, const Value& v);
/// Empty when the configuration fits the system's alphabet and structure.
std::string check_configuration(const PSystem& ps, const PConfiguration& c);

struct PsOptions {
    std::size_t max_assignments = 100000;  // per configuration
    std::size_t max_traces = 200000;
};

/// Every maximal, applicable assignment, in deterministic order.
std::vector<Assignment> maximal_rule_multisets(const PSystem& ps, const PConfiguration& cfg,
                                               const PsOptions& options = {});

PConfiguration apply_assignment(const PSystem& ps, const PConfiguration& cfg,
                                const Assignment& a);
bool is_halted(const PSystem& ps, const PConfiguration& cfg);

/// Deterministic branch index for a seed and a configuration.
std::size_t seeded_choice(std::uint64_t seed, const PConfiguration& cfg, std::size_t n);

/// One maximal-parallel step picked by seeded choice; nullopt when halted.
std::optional<PStep> seeded_step(const PSystem& ps, const PConfiguration& cfg,
                                 std::uint64_t seed, const PsOptions& options = {});

enum class RunMode { AllBranches, SingleSeeded };

std::vector<ComputationTrace> psystem_run(const PSystem& ps, std::size_t depth, RunMode mode,
                                          std::uint64_t seed = 0, const PsOptions& options = {},
                                          std::optional<PConfiguration> start = std::nullopt);

/// Replays a trace; returns an error message or empty.
std::string replay_trace(const PSystem& ps, const ComputationTrace& t);

/// Every configuration reachable within `depth` steps (including the start).
std::vector<PConfiguration> reachable_configurations(const PSystem& ps, std::size_t depth,
                                                     const PsOptions& options = {});

struct RuleCoverage {
    std::string rule;
    bool covered = false;
    std::optional<PConfiguration> configuration;
    std::optional<ComputationTrace> witness;
};

using CoverageReport = std::vector<RuleCoverage>;

CoverageReport rule_coverage(const PSystem& ps, const std::vector<ComputationTrace>& traces);

struct CoverageTestSet {
    std::vector<PConfiguration> members;
    CoverageReport report;
    std::size_t depth = 0;
};

CoverageTestSet generate_coverage_test_set(const PSystem& ps, std::size_t depth,
                                           const PsOptions& options = {});

/// True iff some step of the trace fires the rule.
bool fires(const ComputationTrace& t, std::size_t rule_index);

nlohmann::ordered_json trace_to_json(const PSystem& ps, const ComputationTrace& t);
std::string render_trace(const PSystem& ps, const ComputationTrace& t);
nlohmann::ordered_json coverage_to_json(const PSystem& ps, const CoverageTestSet& set);
nlohmann::ordered_json coverage_report_to_json(const PSystem& ps, const CoverageReport& r);
nlohmann::ordered_json configuration_to_json(const PSystem& ps, const PConfiguration& c);
PConfiguration configuration_from_json(const PSystem& ps, const nlohmann::json& j);

}  // namespace heterotest
