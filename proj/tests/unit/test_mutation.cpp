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
#include "heterotest/mutation.hpp"

#include <doctest.h>

#include <set>

using namespace heterotest;
using nlohmann::json;

namespace {

const Mutant& find_mutant(const MutantSet& set, MutationOperator op, const std::string& location_prefix)
{
    for (const auto& m : set.mutants)
        if (m.op == op && m.location.rfind(location_prefix, 0) == 0)
            return m;
    throw std::logic_error("no mutant at " + location_prefix);
}

std::set<std::string> reachable(const PSystem& ps, std::size_t depth)
{
    std::set<std::string> out;
    for (const auto& c : reachable_configurations(ps, depth))
        out.insert(canonical(c));
    return out;
}

}  // namespace

TEST_CASE("operators")
{
    for (auto op : psystem_operators())
        CHECK(parse_operator(operator_name(op)) == op);
    for (auto op : sxm_operators())
        CHECK(parse_operator(operator_name(op)) == op);
    CHECK(parse_operator("target-swap") == MutationOperator::RhsTargetSwap);
    CHECK_FALSE(parse_operator("frobnicate"));
}

TEST_CASE("PS2 mutants")
{
    const PSystem ps = fixtures::ps2();
    const auto set = mutate_model(ps, psystem_operators(), 1, kAllMutants);
    const auto coverage = generate_coverage_test_set(ps, 3);

    const Mutant& r21 = find_mutant(set, MutationOperator::RuleDelete, "r21");
    const Mutant& r13 = find_mutant(set, MutationOperator::RhsTargetSwap, "r13.rhs[1] (a,2) -> (a,here)");
    CHECK(reachable(std::get<PSystem>(r21.model), 3).count("(ccf,c)") == 0);
    bool r22_fires = false;
    const PSystem& swapped = std::get<PSystem>(r13.model);
    for (const auto& t : psystem_run(swapped, 3, RunMode::AllBranches))
        r22_fires = r22_fires || fires(t, 6);
    CHECK_FALSE(r22_fires);

    MutantSet pair;
    pair.mutants = {r21, r13};
    const auto report = mutation_score(ps, pair, coverage);
    CHECK(report.killed == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(report.per_mutant[i].verdict == Verdict::Killed);
        CHECK(replay_kill(ps, pair.mutants[i], report.per_mutant[i], coverage.depth).empty());
    }
    CHECK(report.per_mutant[0].witness["all_unreachable"].dump().find("(ccf,c)") != std::string::npos);
}

TEST_CASE("mutant sets are deterministic and filtered")
{
    const PSystem ps = fixtures::ps2();
    const auto a = mutant_set_to_json(mutate_model(ps, psystem_operators(), 42, 10), 42).dump();
    const auto b = mutant_set_to_json(mutate_model(ps, psystem_operators(), 42, 10), 42).dump();
    CHECK(a == b);
    CHECK(a != mutant_set_to_json(mutate_model(ps, psystem_operators(), 43, 10), 43).dump());

    const auto set = mutate_model(ps, psystem_operators(), 42, kAllMutants);
    for (const auto& m : set.mutants) {
        CHECK(validate_psystem(std::get<PSystem>(m.model)).empty());
        CHECK_FALSE(std::get<PSystem>(m.model) == ps);
    }
    CHECK(set.mutants.size() + set.invalid + set.duplicates == set.candidates);

    auto j = fixtures::model_json("ps2.json");
    j["rules"] = json::object();
    try {
        mutate_model(parse_psystem(j), {MutationOperator::RuleDelete}, 0, 5);
        FAIL("expected no-valid-mutants");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoValidMutants);
    }
}

TEST_CASE("SXM scoring")
{
    const Sxm spec = parse_sxm(fixtures::dft_counter_json());
    const auto suite = generate_sxm_test_suite(spec, 1);

    SUBCASE("equivalent mutant survives, excluded from the non-equivalent score")
    {
        MutantSet same;
        same.mutants.push_back(Mutant{"m0001", MutationOperator::TransitionDelete, "none", spec});
        const auto r = mutation_score(spec, same, suite);
        CHECK(r.killed == 0);
        CHECK(r.not_killed_bounded == 1);
        CHECK(r.per_mutant[0].verdict == Verdict::NotKilledBounded);
        CHECK(r.score() == 0.0);
    }
    SUBCASE("every kill replays")
    {
        const auto set = mutate_model(spec, sxm_operators(), 3, kAllMutants);
        const auto r = mutation_score(spec, set, suite);
        CHECK(r.total == set.mutants.size());
        CHECK(r.killed > 0);
        for (std::size_t i = 0; i < set.mutants.size(); ++i) {
            if (r.per_mutant[i].verdict != Verdict::Killed)
                continue;
            CHECK(replay_kill(spec, set.mutants[i], r.per_mutant[i], suite).empty());
            CHECK(distinguishing_input(spec, std::get<Sxm>(set.mutants[i].model), 8));
        }
        const auto j = score_report_to_json(r);
        CHECK(j["total"] == r.total);
        CHECK(j["per_mutant"].size() == r.total);
    }
    SUBCASE("empty mutant set")
    {
        try {
            mutation_score(spec, MutantSet{}, suite);
            FAIL("expected empty-mutant-set");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::EmptyMutantSet);
        }
    }
}

TEST_CASE("system mutants")
{
    const auto sys = parse_system(fixtures::model_json("relay.json"));
    const auto set = mutate_model(sys, sxm_operators(), 5, kAllMutants);
    for (const auto& m : set.mutants)
        CHECK(m.location.rfind("component ", 0) == 0);
    const auto suite = generate_csxms_test_suite(sys, 0);
    const auto r = mutation_score(sys, set, suite);
    for (std::size_t i = 0; i < set.mutants.size(); ++i)
        if (r.per_mutant[i].verdict == Verdict::Killed)
            CHECK(replay_kill(sys, set.mutants[i], r.per_mutant[i], suite).empty());
}

TEST_CASE("distinguishing_input")
{
    const Sxm spec = fixtures::counter();
    CHECK_FALSE(distinguishing_input(spec, spec, 5));
    auto j = fixtures::counter_json();
    j["functions"][1]["cases"][0]["output"] = "o";
    CHECK(distinguishing_input(spec, parse_sxm(j), 5) == fixtures::atoms({"r"}));
}
