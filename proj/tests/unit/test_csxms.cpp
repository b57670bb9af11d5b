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

using namespace heterotest;
using fixtures::atom;
using fixtures::atoms;
using nlohmann::json;

namespace {

CsxmSystem relay() { return parse_system(fixtures::model_json("relay.json")); }

/// Relay where component 2 answers back, so both components communicate.
json ping_pong_json()
{
    auto j = fixtures::model_json("relay.json");
    auto& c2 = j["components"][1];
    c2["states"] = {"wait", "reply"};
    c2["terminal_states"] = {"wait"};
    c2["ordinary_states"] = {"wait"};
    c2["communicating_states"] = {"reply"};
    c2["functions"][0]["cases"][0]["out_port"] = "?v";
    c2["functions"].push_back(json::parse(R"({"name": "phi_back", "target": 1,
        "cases": [{"mem_pattern": "_", "input": "_"}]})"));
    c2["next_state"] = json::parse(R"([{"from": "wait", "fn": "phi_recv", "to": ["reply"]},
                                       {"from": "reply", "fn": "phi_back", "to": ["wait"]}])");
    c2["out_port_domain"] = {0, 1};
    c2["ordinary_functions"] = {"phi_recv"};
    c2["communicating_functions"] = {"phi_back"};
    j["components"][0]["in_port_domain"] = {0, 1};
    return j;
}

}  // namespace

TEST_CASE("validate shipped systems")
{
    CHECK(validate_system(relay()).empty());
    CHECK(validate_system(parse_system(fixtures::model_json("xy-system.json"))).empty());
    CHECK(validate_system(parse_system(ping_pong_json())).empty());
}

TEST_CASE("system_step")
{
    const CsxmSystem sys = relay();
    const auto init = initial_system_configuration(sys, {atoms({"x"}), atoms({"y"})});

    SUBCASE("initial configuration: only ordinary changes")
    {
        const auto ts = system_transitions(sys, init);
        REQUIRE_FALSE(ts.empty());
        for (const auto& t : ts)
            CHECK(t.kind == SystemTransition::Kind::Ordinary);
    }
    SUBCASE("communicating change moves the out-port value")
    {
        SystemConfiguration after_ping;
        for (const auto& t : system_transitions(sys, init))
            if (t.component == 1 && t.function == "phi_ping")
                after_ping = t.successor;
        REQUIRE(after_ping.size() == 2);
        CHECK(after_ping[0].out_port == Value::integer(0));
        CHECK(after_ping[0].state == "sending");

        std::vector<SystemTransition> comms;
        for (const auto& t : system_transitions(sys, after_ping))
            if (t.kind == SystemTransition::Kind::Communicating)
                comms.push_back(t);
        REQUIRE(comms.size() == 1);
        const auto& next = comms[0].successor;
        CHECK(next[0].out_port.is_nomem());
        CHECK(next[1].in_port == Value::integer(0));
        CHECK(next[0].remaining_input == after_ping[0].remaining_input);
        CHECK(next[1].remaining_input == after_ping[1].remaining_input);
        CHECK(next[0].output == after_ping[0].output);
        CHECK(next[1].output == after_ping[1].output);
    }
    SUBCASE("nothing enabled -> no successors")
    {
        CHECK(system_step(sys, initial_system_configuration(sys)).empty());
    }
}

TEST_CASE("extend_for_testing")
{
    SUBCASE("communicating functions gain the comm symbol and [i,j] outputs")
    {
        const auto ext = extend_for_testing(parse_system(ping_pong_json()));
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& b = ext.components[i].base;
            CHECK(std::find(b.inputs.begin(), b.inputs.end(), atom("a")) != b.inputs.end());
            CHECK(std::find(b.outputs.begin(), b.outputs.end(), comm_output(i + 1, 1)) != b.outputs.end());
            CHECK(std::find(b.outputs.begin(), b.outputs.end(), comm_output(i + 1, 2)) == b.outputs.end());
        }
        CHECK(comm_output(2, 1).to_string() == "[2,1]");
    }
    SUBCASE("no communicating functions -> structurally identical")
    {
        const auto sys = parse_system(fixtures::model_json("xy-system.json"));
        CHECK(structurally_equal(extend_for_testing(sys), sys));
    }
}

TEST_CASE("build_product_sxm")
{
    const auto sys = parse_system(fixtures::model_json("xy-system.json"));
    const Sxm p = build_product_sxm(sys);
    CHECK(p.inputs.size() == 8);
    CHECK(p.states.size() == 2 * 2);
    CHECK(associated_automaton(p).arcs.size() == [&] {
        std::size_t n = 0;
        for (const auto& [key, targets] : p.next_state)
            n += targets.size();
        return n;
    }());
}

TEST_CASE("generate_csxms_test_suite")
{
    SUBCASE("relay suite replays on the system")
    {
        const auto sys = relay();
        const auto suite = generate_csxms_test_suite(sys, 0);
        REQUIRE_FALSE(suite.cases.empty());
        const auto ext = extend_for_testing(sys);
        for (const auto& c : suite.cases) {
            auto got = replay_on_system(ext, c.input);
            std::sort(got.begin(), got.end());
            got.erase(std::unique(got.begin(), got.end()), got.end());
            CHECK(got == c.expected_outputs);
        }
    }
    SUBCASE("component failing determinism -> dft-failure")
    {
        auto j = fixtures::model_json("relay.json");
        auto& c2 = j["components"][1];
        auto twin = c2["functions"][0];
        twin["name"] = "phi_recv2";
        c2["functions"].push_back(twin);
        c2["next_state"].push_back(json::parse(R"({"from": "wait", "fn": "phi_recv2", "to": ["wait"]})"));
        c2["ordinary_functions"].push_back("phi_recv2");
        try {
            generate_csxms_test_suite(parse_system(j), 0);
            FAIL("expected dft-failure");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::DftFailure);
        }
    }
}
