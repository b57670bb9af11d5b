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
// Acceptance checks: one PASS/FAIL line per criterion.
#include "../support/random_models.hpp"

#include "heterotest/cli.hpp"
#include "heterotest/csxms.hpp"
#include "heterotest/dft.hpp"
#include "heterotest/fsm_testing.hpp"
#include "heterotest/heterotic.hpp"
#include "heterotest/json_io.hpp"
#include "heterotest/mutation.hpp"
#include "heterotest/psystem.hpp"

#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

using namespace heterotest;

namespace {

const std::string kModels = HETEROTEST_MODELS_DIR;
const std::string kBinary = HETEROTEST_BINARY;

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_s(double s)
{
    std::ostringstream os;
    os.precision(3);
    os << std::fixed << s << "s";
    return os.str();
}

PSystem ps2()
{
    return parse_psystem(read_json_file(kModels + "/ps2.json"));
}

PConfiguration cfg(const PSystem& ps, const std::string& one, const std::string& two)
{
    return configuration_from_json(ps, nlohmann::json{{"1", one}, {"2", two}});
}

std::vector<std::string> fired_names(const PSystem& ps, const PStep& step, std::size_t c)
{
    std::vector<std::string> out;
    for (const auto& [r, k] : step.fired[c])
        for (std::int64_t i = 0; i < k; ++i)
            out.push_back(ps.rules[r].name);
    return out;
}

Outcome criterion1()
{
    const auto t0 = Clock::now();
    std::ostringstream out, err;
    const int rc = run_cli({"simulate", "--depth", "3", "--all-branches", "--format", "json",
                            kModels + "/ps2.json"},
                           out, err);
    const double elapsed = seconds_since(t0);
    if (rc != 0)
        return {false, "simulate exited " + std::to_string(rc) + ": " + err.str()};
    const auto art = nlohmann::json::parse(out.str());
    const PSystem ps = ps2();
    // Expected: (s,t) => (abe,b) => (bcf,ab) => (ccf,c).
    const std::vector<std::pair<std::string, std::string>> states{
        {"abe", "b"}, {"bcf", "ab"}, {"ccf", "c"}};
    const std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>> fired{
        {{"r11"}, {"r21"}}, {{"r13", "r15"}, {}}, {{"r14"}, {"r22"}}};
    bool found = false;
    for (const auto& t : psystem_run(ps, 3, RunMode::AllBranches)) {
        if (t.start != cfg(ps, "s", "t") || t.steps.size() != 3)
            continue;
        bool ok = true;
        for (std::size_t i = 0; i < 3 && ok; ++i) {
            ok = t.steps[i].result == cfg(ps, states[i].first, states[i].second) &&
                 fired_names(ps, t.steps[i], 0) == fired[i].first &&
                 fired_names(ps, t.steps[i], 1) == fired[i].second;
        }
        if (ok && replay_trace(ps, t).empty())
            found = true;
    }
    bool in_cli = false;
    for (const auto& t : art.at("traces"))
        in_cli = in_cli || t.at("text").get<std::string>() ==
                               "(s,t) ⟹({r11},{r21}) (abe,b) ⟹({r13,r15},∅) (bcf,ab) ⟹({r14},{r22}) (ccf,c)";
    const bool pass = found && in_cli && elapsed < 1.0;
    return {pass, std::string(found && in_cli ? "trace (s,t)⟹(abe,b)⟹(bcf,ab)⟹(ccf,c) present"
                                              : "expected trace missing") +
                      ", runtime " + fmt_s(elapsed)};
}

Outcome criterion2()
{
    std::ostringstream out, err;
    const int rc = run_cli({"gen-tests", "psystem", "--depth", "3", "--format", "json",
                            kModels + "/ps2.json"},
                           out, err);
    if (rc != 0)
        return {false, "gen-tests exited " + std::to_string(rc)};
    const auto art = nlohmann::json::parse(out.str());
    const PSystem ps = ps2();
    const auto set = generate_coverage_test_set(ps, 3);
    std::size_t covered = 0;
    bool r12_ok = false;
    for (const auto& rc2 : set.report) {
        covered += rc2.covered;
        if (rc2.rule == "r12")
            r12_ok = rc2.covered && *rc2.configuration == cfg(ps, "bdf", "b") &&
                     replay_trace(ps, *rc2.witness).empty();
    }
    const bool has_ccf =
        std::find(set.members.begin(), set.members.end(), cfg(ps, "ccf", "c")) != set.members.end();
    bool cli_ccf = false;
    for (const auto& m : art.at("test_set"))
        cli_ccf = cli_ccf || (m.at("1") == "ccf" && m.at("2") == "c");
    const auto reach = reachable_configurations(ps, 3);
    const bool dbe_unreachable =
        std::find(reach.begin(), reach.end(), cfg(ps, "dbe", "b")) == reach.end();
    const bool pass = covered == 7 && has_ccf && cli_ccf && r12_ok && dbe_unreachable &&
                      art.at("covered").get<std::size_t>() == 7;
    std::ostringstream d;
    d << covered << "/7 rules covered, (ccf,c) " << (has_ccf && cli_ccf ? "in" : "NOT in")
      << " set, r12 witness " << (r12_ok ? "(bdf,b)" : "wrong") << ", (dbe,b) "
      << (dbe_unreachable ? "unreachable" : "REACHABLE") << " at depth 3";
    return {pass, d.str()};
}

Outcome criterion3()
{
    const CsxmSystem sys = parse_system(read_json_file(kModels + "/xy-system.json"));
    const Sxm product = build_product_sxm(extend_for_testing(sys));
    const std::size_t q1 = sys.components[0].base.states.size();
    const std::size_t q2 = sys.components[1].base.states.size();
    const bool pass = product.inputs.size() == 8 && product.states.size() == q1 * q2;
    std::ostringstream d;
    d << product.inputs.size() << " product inputs (expected 8), |Q| = " << product.states.size()
      << " = " << q1 << "·" << q2;
    return {pass, d.str()};
}

Outcome criterion4()
{
    const auto t0 = Clock::now();
    std::size_t accepted = 0, skipped = 0, failures = 0, max_nodes = 0;
    std::string first_failure;
    for (std::uint64_t seed = 1; accepted < 50 && seed < 10000; ++seed) {
        CsxmSystem sys;
        try {
            sys = testing::random_system(seed);
        } catch (const Error&) {
            ++skipped;
            continue;
        }
        if (!validate_system(sys).empty()) {
            ++skipped;
            continue;
        }
        const CsxmSystem ext = extend_for_testing(sys);
        if (testing::reachable_system_configurations(ext, 200) > 200) {
            ++skipped;
            continue;
        }
        ++accepted;
        const Sxm product = build_product_sxm(ext);
        const auto iso = testing::product_isomorphism(ext, product);
        max_nodes = std::max(max_nodes, iso.nodes);
        if (!iso.isomorphic) {
            ++failures;
            if (first_failure.empty())
                first_failure = "seed " + std::to_string(seed) + ": " + iso.reason;
        }
    }
    const double elapsed = seconds_since(t0);
    const bool pass = accepted == 50 && failures == 0 && elapsed < 120.0;
    std::ostringstream d;
    d << accepted << " systems (" << skipped << " seeds skipped), " << failures
      << " non-isomorphic, largest " << max_nodes << " configurations, runtime " << fmt_s(elapsed);
    if (!first_failure.empty())
        d << "; " << first_failure;
    return {pass, d.str()};
}

// Extra states of the mutant's observable automaton over the spec's.
std::ptrdiff_t extra_states(const Sxm& spec, const Sxm& mutant)
{
    const auto size = [](const Sxm& m) {
        return static_cast<std::ptrdiff_t>(
            minimize_observable(associated_automaton(m)).states.size());
    };
    return size(mutant) - size(spec);
}

Outcome criterion5()
{
    struct Tally {
        std::size_t scoped = 0, killed = 0, missed = 0, bounded = 0, other = 0;
    };
    const auto t0 = Clock::now();
    std::size_t models = 0, mutants = 0, out_of_scope = 0;
    std::map<std::string, Tally> by_class;  // "transition" / "function"
    std::string first_problem;
    for (std::uint64_t seed = 1; models < 100 && seed < 10000; ++seed) {
        const Sxm spec = testing::random_dft_sxm(seed);
        if (!validate_sxm(spec).empty() || !check_dft(spec).passed())
            continue;
        ++models;
        const TestSuite suite = generate_sxm_test_suite(spec, 1);
        std::size_t suite_max = 0;
        for (const auto& c : suite.cases)
            suite_max = std::max(suite_max, c.input.size());
        MutantSet set;
        try {
            set = mutate_model(spec, sxm_operators(), seed, kAllMutants);
        } catch (const Error&) {
            continue;
        }
        ScoreOptions so;
        so.equivalence_bound = std::max<std::size_t>(6, suite_max);
        const auto report = mutation_score(spec, set, suite, so);
        mutants += report.total;
        for (std::size_t i = 0; i < report.per_mutant.size(); ++i) {
            const auto& v = report.per_mutant[i];
            const Sxm& m = std::get<Sxm>(set.mutants[i].model);
            if (extra_states(spec, m) > 1) {
                ++out_of_scope;
                continue;
            }
            auto& t = by_class[v.op.rfind("transition", 0) == 0 ? "transition" : "function"];
            ++t.scoped;
            if (v.verdict == Verdict::Killed) {
                ++t.killed;
                continue;
            }
            const auto note = [&](const std::string& what) {
                if (first_problem.empty())
                    first_problem = "seed " + std::to_string(seed) + " " + v.id + " " + v.op +
                                    " " + v.location + " " + what;
            };
            if (distinguishing_input(spec, m, suite_max)) {
                ++t.missed;
                note("differs within |suite-max| = " + std::to_string(suite_max));
            } else if (v.verdict == Verdict::NotKilledBounded) {
                ++t.bounded;
            } else {
                ++t.other;
                note("survives but differs beyond the suite");
            }
        }
    }
    const double elapsed = seconds_since(t0);
    bool pass = models == 100 && elapsed < 300.0;
    std::ostringstream d;
    d << models << " models, " << mutants << " mutants, " << out_of_scope
      << " with >1 extra state excluded";
    for (const auto& [cls, t] : by_class) {
        pass = pass && t.missed == 0 && t.other == 0;
        d << "; " << cls << " faults: " << t.killed << "/" << t.scoped << " killed, " << t.missed
          << " differ within |suite-max| unkilled, " << t.other
          << " differ beyond the suite, " << t.bounded << " equivalent up to max(6,|suite-max|)";
    }
    d << "; runtime " << fmt_s(elapsed);
    if (!first_problem.empty())
        d << "; first: " << first_problem;
    return {pass, d.str()};
}

Outcome criterion6()
{
    std::size_t models = 0, witnesses = 0, bogus = 0, skipped = 0;
    for (std::uint64_t seed = 1; models < 100 && seed < 10000; ++seed) {
        Sxm m;
        try {
            m = testing::random_faulty_sxm(seed);
        } catch (const Error&) {
            ++skipped;
            continue;
        }
        if (!validate_sxm(m).empty()) {
            ++skipped;
            continue;
        }
        ++models;
        const auto r = check_dft(m);
        for (const auto& w : r.determinism) {
            ++witnesses;
            bogus += !replay_witness(m, w);
        }
        for (const auto& e : r.completeness) {
            if (e.pass)
                continue;
            ++witnesses;
            bogus += !replay_witness(m, e);
        }
        for (const auto& w : r.distinguishability) {
            ++witnesses;
            bogus += !replay_witness(m, w);
        }
    }
    const bool pass = models == 100 && witnesses > 0 && bogus == 0;
    std::ostringstream d;
    d << models << " models (" << skipped << " seeds skipped), " << witnesses << " witnesses, "
      << bogus << " failed to replay";
    return {pass, d.str()};
}

Outcome criterion7()
{
    const auto t0 = Clock::now();
    const auto h = load_heterotic(read_json_file(kModels + "/heterotic_ps2.json"), kModels);
    const auto trace = run_heterotic(h, 3);
    const std::string native = heterotic_trace_to_json(h, trace).dump();
    OracleBinding oracle;
    oracle.argv = {kBinary,  "oracle-serve", kModels + "/heterotic_ps2.json", "--seed",
                   std::to_string(h.wrap.seed), "--depth-cap", std::to_string(h.wrap.depth_cap)};
    const auto otrace = run_heterotic(h, 3, oracle);
    const std::string via_oracle = heterotic_trace_to_json(h, otrace).dump();
    const double elapsed = seconds_since(t0);

    bool alternating = !trace.exchanges.empty() && trace.exchanges.front().base_to_control;
    for (std::size_t i = 1; i < trace.exchanges.size(); ++i)
        alternating = alternating &&
                      trace.exchanges[i].base_to_control != trace.exchanges[i - 1].base_to_control;
    const bool both = trace.exchanges.size() >= 2;
    const bool identical = native == via_oracle;
    const bool pass = alternating && both && identical && elapsed < 1.0;
    std::ostringstream d;
    d << trace.exchanges.size() << " exchanges, "
      << (alternating ? "strictly alternating" : "NOT alternating") << ", oracle trace "
      << (identical ? "byte-identical" : "DIFFERS") << ", runtime " << fmt_s(elapsed);
    return {pass, d.str()};
}

Outcome criterion8()
{
    const PSystem ps = ps2();
    const auto set = generate_coverage_test_set(ps, 3);
    MutantSet all = mutate_model(
        ps, {MutationOperator::RuleDelete, MutationOperator::RhsTargetSwap}, 0, kAllMutants);
    MutantSet chosen;
    for (auto& m : all.mutants) {
        const bool del21 = m.op == MutationOperator::RuleDelete && m.location == "r21";
        const bool swap13 = m.op == MutationOperator::RhsTargetSwap &&
                            m.location.rfind("r13.rhs[1] (a,2) -> (a,here)", 0) == 0;
        if (del21 || swap13)
            chosen.mutants.push_back(m);
    }
    if (chosen.mutants.size() != 2)
        return {false, "expected 2 mutants, found " + std::to_string(chosen.mutants.size())};
    const auto report = mutation_score(ps, chosen, set);
    bool ok = report.killed == 2;
    std::ostringstream d;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& v = report.per_mutant[i];
        const auto replay = replay_kill(ps, chosen.mutants[i], v, set.depth);
        ok = ok && v.verdict == Verdict::Killed && replay.empty();
        d << v.op << "(" << v.location.substr(0, 3) << ") " << verdict_name(v.verdict);
        if (v.verdict == Verdict::Killed)
            d << " [" << v.witness["all_unreachable"].dump() << " unreachable, replay "
              << (replay.empty() ? "ok" : replay) << "]";
        d << (i == 0 ? "; " : "");
        if (chosen.mutants[i].location == "r21") {
            bool ccf = false;
            for (const auto& u : v.witness["all_unreachable"])
                ccf = ccf || u == "(ccf,c)";
            ok = ok && ccf;
        } else {
            // r22 can never fire once compartment 2 stops receiving a.
            const auto& mps = std::get<PSystem>(chosen.mutants[i].model);
            const auto cov = rule_coverage(mps, psystem_run(mps, 10, RunMode::AllBranches));
            for (const auto& rc : cov)
                if (rc.rule == "r22")
                    ok = ok && !rc.covered;
        }
    }
    return {ok, d.str()};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 PS2 all-branches trace", criterion1},
        {"2 PS2 rule-coverage test set", criterion2},
        {"3 product alphabet and states", criterion3},
        {"4 product/system step-graph isomorphism", criterion4},
        {"5 W-method mutation adequacy", criterion5},
        {"6 DFT witnesses replay", criterion6},
        {"7 heterotic alternation and oracle", criterion7},
        {"8 PS2 mutants killed by coverage set", criterion8},
    };
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << " — " << o.detail
                  << std::endl;
        failed += !o.pass;
    }
    return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
