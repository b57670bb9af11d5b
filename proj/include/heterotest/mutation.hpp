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
#include "heterotest/fsm_testing.hpp"
#include "heterotest/psystem.hpp"
#include "heterotest/sxm.hpp"

#include <json.hpp>

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace heterotest {

enum class MutationOperator {
    // P systems
    RuleDelete,
    RhsTargetSwap,
    SymbolSubstitute,
    LhsMultiplicityChange,
    // SXMs (and every component of a communicating system)
    TransitionRetarget,
    TransitionDelete,
    CaseOutputSwap,
    MemoryUpdatePerturb,
};

std::string operator_name(MutationOperator op);
std::optional<MutationOperator> parse_operator(const std::string& name);
std::vector<MutationOperator> psystem_operators();
std::vector<MutationOperator> sxm_operators();

using MutableModel = std::variant<PSystem, Sxm, CsxmSystem>;

struct Mutant {
    std::string id;  // "m0001", in selection order
    MutationOperator op = MutationOperator::RuleDelete;
    std::string location;
    MutableModel model;
};

struct MutantSet {
    std::vector<Mutant> mutants;
    std::size_t candidates = 0;  // operator applications before filtering
    std::size_t invalid = 0;     // failed validation
    std::size_t duplicates = 0;  // structurally equal to an earlier mutant
};

inline constexpr std::size_t kAllMutants = std::numeric_limits<std::size_t>::max();

/// Seeded sample of at most `count` valid, distinct single-operator
/// mutants. Operators that do not apply to the model kind are ignored.
/// Throws NoValidMutants when none survive filtering.
MutantSet mutate_model(const MutableModel& model, const std::vector<MutationOperator>& ops,
                       std::uint64_t seed, std::size_t count);

enum class Verdict { Killed, Survived, NotKilledBounded };

std::string verdict_name(Verdict v);

struct MutantVerdict {
    std::string id;
    std::string op;
    std::string location;
    Verdict verdict = Verdict::Survived;
    /// Killed: the distinguishing case or unreachable member. Survived: the
    /// input or configuration separating mutant and spec beyond the suite.
    nlohmann::ordered_json witness;
};

struct ScoreReport {
    std::size_t total = 0;
    std::size_t killed = 0;
    std::size_t survived = 0;            // every mutant not killed
    std::size_t not_killed_bounded = 0;  // survivors equal to the spec within the bound
    std::size_t invalid = 0;
    std::vector<MutantVerdict> per_mutant;

    double score() const;
    /// Kills over mutants not shown equivalent within the bound.
    double non_equivalent_score() const;
};

struct ScoreOptions {
    /// SXMs: inputs up to this length; P systems: reachability up to this depth.
    std::size_t equivalence_bound = 6;
    /// Stop bounded comparison after this many explored prefixes.
    std::size_t max_prefixes = 2000000;
};

/// SXM / system suite: killed iff some case's observed outputs differ.
ScoreReport mutation_score(const MutableModel& spec, const MutantSet& mutants,
                           const TestSuite& suite, const ScoreOptions& options = {});

/// P-system coverage set: killed iff some member is unreachable in the
/// mutant within the set's depth.
ScoreReport mutation_score(const PSystem& spec, const MutantSet& mutants,
                           const CoverageTestSet& set, const ScoreOptions& options = {});

/// First input of length ≤ bound on which the relations differ (shortest,
/// then lexicographic), or nullopt if none within the bound.
std::optional<std::vector<Value>> distinguishing_input(const Sxm& a, const Sxm& b,
                                                       std::size_t bound,
                                                       std::size_t max_prefixes = 2000000);

/// Re-checks a kill verdict; empty when it replays, else the reason.
std::string replay_kill(const MutableModel& spec, const Mutant& mutant,
                        const MutantVerdict& verdict, const TestSuite& suite);
std::string replay_kill(const PSystem& spec, const Mutant& mutant, const MutantVerdict& verdict,
                        std::size_t depth);

nlohmann::ordered_json mutant_set_to_json(const MutantSet& set, std::uint64_t seed);
nlohmann::ordered_json score_report_to_json(const ScoreReport& r);
std::string render_score_report(const ScoreReport& r);

}  // namespace heterotest
