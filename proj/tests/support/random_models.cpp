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
#include "random_models.hpp"

#include "heterotest/json_io.hpp"

#include <map>
#include <random>
#include <set>
#include <tuple>

namespace heterotest::testing {

using nlohmann::json;

namespace {

struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    int pick(int lo, int hi) { return lo + static_cast<int>(gen() % static_cast<std::uint64_t>(hi - lo + 1)); }
    bool chance(double p) { return std::uniform_real_distribution<double>(0, 1)(gen) < p; }
};

std::string nm(const char* prefix, int i)
{
    return prefix + std::to_string(i);
}

json op(const char* name, json a, json b)
{
    return {{"op", name}, {"args", json::array({std::move(a), std::move(b)})}};
}

json mod_expr(json e, int n)
{
    return op("mod", std::move(e), n);
}

// Deterministic automaton with every state reachable from q0.
std::map<std::pair<int, int>, int> random_arcs(Rng& rng, int states, int functions)
{
    std::map<std::pair<int, int>, int> arcs;
    for (int i = 1; i < states; ++i) {
        for (int tries = 0;; ++tries) {
            int parent = rng.pick(0, i - 1);
            int f = rng.pick(0, functions - 1);
            if (!arcs.count({parent, f}) || tries > 50) {
                if (arcs.count({parent, f})) {
                    // Fall back to the first free (state, function) pair.
                    bool placed = false;
                    for (int p = 0; p < i && !placed; ++p)
                        for (int g = 0; g < functions && !placed; ++g)
                            if (!arcs.count({p, g})) {
                                arcs[{p, g}] = i;
                                placed = true;
                            }
                    if (!placed)
                        arcs[{parent, f}] = i;
                } else {
                    arcs[{parent, f}] = i;
                }
                break;
            }
        }
    }
    for (int q = 0; q < states; ++q)
        for (int f = 0; f < functions; ++f)
            if (!arcs.count({q, f}) && rng.chance(0.5))
                arcs[{q, f}] = rng.pick(0, states - 1);
    return arcs;
}

struct Shape {
    int states, functions, memory;
    std::vector<int> threshold;
};

json base_sxm(Rng& rng, Shape& s)
{
    s.states = rng.pick(2, 5);
    s.functions = rng.pick(1, 4);
    s.memory = rng.pick(2, 8);
    json j;
    j["schema"] = 1;
    j["inputs"] = json::array();
    j["outputs"] = json::array();
    for (int f = 0; f < s.functions; ++f) {
        j["inputs"].push_back(nm("x", f));
        j["inputs"].push_back(nm("y", f));
        j["outputs"].push_back(nm("o", f));
        j["outputs"].push_back(nm("p", f));
    }
    j["states"] = json::array();
    for (int q = 0; q < s.states; ++q)
        j["states"].push_back(nm("q", q));
    j["initial_states"] = {"q0"};
    j["terminal_states"] = json::array();
    const bool all_terminal = rng.chance(0.75);
    for (int q = 0; q < s.states; ++q)
        if (all_terminal || q == 0 || rng.chance(0.6))
            j["terminal_states"].push_back(nm("q", q));
    j["memory_domain"] = {{"range", {0, s.memory - 1}}};
    j["initial_memory"] = rng.pick(0, s.memory - 1);
    j["functions"] = json::array();
    s.threshold.clear();
    for (int f = 0; f < s.functions; ++f) {
        const int b = rng.pick(1, s.memory - 1);
        s.threshold.push_back(b);
        json a = {{"mem_pattern", "?m"},
                  {"guard", op("<", "?m", b)},
                  {"input", nm("x", f)},
                  {"output", nm("o", f)},
                  {"mem_next", mod_expr(op("+", "?m", rng.pick(0, s.memory - 1)), s.memory)}};
        json bcase = {{"mem_pattern", "?m"},
                      {"guard", op(">=", "?m", b)},
                      {"input", nm("y", f)},
                      {"output", nm("p", f)}};
        if (rng.chance(0.5))
            bcase["mem_next"] = rng.pick(0, s.memory - 1);
        else
            bcase["mem_next"] = mod_expr(op("*", "?m", rng.pick(1, 3)), s.memory);
        j["functions"].push_back({{"name", nm("phi", f)}, {"cases", {a, bcase}}});
    }
    j["next_state"] = json::array();
    for (const auto& [key, to] : random_arcs(rng, s.states, s.functions))
        j["next_state"].push_back(
            {{"from", nm("q", key.first)}, {"fn", nm("phi", key.second)}, {"to", {nm("q", to)}}});
    return j;
}

}  // namespace

json random_dft_sxm_json(std::uint64_t seed)
{
    Rng rng(seed * 0x9e3779b97f4a7c15ULL + 1);
    Shape s{};
    return base_sxm(rng, s);
}

Sxm random_dft_sxm(std::uint64_t seed)
{
    return parse_sxm(random_dft_sxm_json(seed));
}

Sxm random_faulty_sxm(std::uint64_t seed)
{
    Rng rng(seed * 0xbf58476d1ce4e5b9ULL + 7);
    Shape s{};
    json j = base_sxm(rng, s);
    auto& fs = j["functions"];
    for (int f = 0; f < s.functions; ++f) {
        auto& cases = fs[f]["cases"];
        if (f > 0 && rng.chance(0.3))  // shared input: domain overlap
            cases[0]["input"] = nm("x", f - 1);
        if (f > 0 && rng.chance(0.3))  // shared output
            cases[1]["output"] = nm("o", rng.pick(0, f - 1));
        if (rng.chance(0.3))  // gap at the threshold: incompleteness
            cases[1]["guard"] = op(">", "?m", s.threshold[f]);
        if (rng.chance(0.2))  // overlapping guards inside one function
            cases[1]["input"] = nm("x", f);
    }
    if (rng.chance(0.2) && !j["next_state"].empty()) {
        auto& arc = j["next_state"][rng.pick(0, static_cast<int>(j["next_state"].size()) - 1)];
        const auto extra = nm("q", rng.pick(0, s.states - 1));
        if (arc["to"][0] != extra)
            arc["to"].push_back(extra);
    }
    if (rng.chance(0.1) && s.states > 1)
        j["initial_states"].push_back("q1");
    return parse_sxm(j);
}

json random_system_json(std::uint64_t seed)
{
    Rng rng(seed * 0x94d049bb133111ebULL + 3);
    const int n = rng.pick(2, 3);
    auto values = json::array();
    for (int v = 0; v < n; ++v)
        values.push_back(v);

    // Component 1: ordinary states r*, one communicating state s.
    const int k1 = rng.pick(1, 2), f1 = rng.pick(1, 2);
    json c1;
    c1["inputs"] = json::array();
    c1["outputs"] = json::array();
    c1["functions"] = json::array();
    for (int f = 0; f < f1; ++f) {
        c1["inputs"].push_back(nm("x", f));
        c1["outputs"].push_back(nm("o", f));
        c1["functions"].push_back(
            {{"name", nm("phi", f)},
             {"cases",
              {{{"mem_pattern", "?m"},
                {"input", nm("x", f)},
                {"output", nm("o", f)},
                {"mem_next", mod_expr(op("+", "?m", f + 1), n)},
                {"out_port", "?m"}}}}});
    }
    c1["functions"].push_back(
        {{"name", "send"}, {"target", 2}, {"cases", {{{"mem_pattern", "_"}, {"input", "_"}}}}});
    c1["states"] = json::array();
    c1["ordinary_states"] = json::array();
    for (int q = 0; q < k1; ++q) {
        c1["states"].push_back(nm("r", q));
        c1["ordinary_states"].push_back(nm("r", q));
    }
    c1["states"].push_back("s");
    c1["initial_states"] = {"r0"};
    c1["terminal_states"] = c1["ordinary_states"];
    c1["memory_domain"] = {{"values", values}};
    c1["initial_memory"] = rng.pick(0, n - 1);
    c1["next_state"] = json::array();
    c1["next_state"].push_back({{"from", "r0"}, {"fn", "phi0"}, {"to", {"s"}}});
    for (int q = 0; q < k1; ++q)
        for (int f = 0; f < f1; ++f) {
            if (q == 0 && f == 0)
                continue;
            if (rng.chance(0.7)) {
                const int t = rng.pick(0, k1);
                c1["next_state"].push_back(
                    {{"from", nm("r", q)}, {"fn", nm("phi", f)}, {"to", {t == k1 ? "s" : nm("r", t)}}});
            }
        }
    c1["next_state"].push_back({{"from", "s"}, {"fn", "send"}, {"to", {nm("r", rng.pick(0, k1 - 1))}}});
    c1["in_port_domain"] = json::array();
    c1["out_port_domain"] = values;
    c1["communicating_states"] = {"s"};
    c1["ordinary_functions"] = json::array();
    for (int f = 0; f < f1; ++f)
        c1["ordinary_functions"].push_back(nm("phi", f));
    c1["communicating_functions"] = {"send"};

    // Component 2: ordinary states only; `recv` consumes the in-port.
    const int k2 = rng.pick(1, 3), f2 = rng.pick(1, 2);
    json c2;
    c2["inputs"] = {"z"};
    c2["outputs"] = {"got"};
    c2["functions"] = json::array();
    for (int f = 0; f < f2; ++f) {
        c2["inputs"].push_back(nm("y", f));
        c2["outputs"].push_back(nm("u", f));
        c2["functions"].push_back({{"name", nm("psi", f)},
                                   {"cases",
                                    {{{"mem_pattern", "?m"},
                                      {"input", nm("y", f)},
                                      {"output", nm("u", f)},
                                      {"mem_next", mod_expr(op("*", "?m", f + 2), n)}}}}});
    }
    c2["functions"].push_back({{"name", "recv"},
                               {"cases",
                                {{{"mem_pattern", "_"},
                                  {"input", "z"},
                                  {"in_port", "?v"},
                                  {"output", "got"},
                                  {"mem_next", "?v"}}}}});
    c2["states"] = json::array();
    for (int q = 0; q < k2; ++q)
        c2["states"].push_back(nm("p", q));
    c2["initial_states"] = {"p0"};
    c2["terminal_states"] = c2["states"];
    c2["memory_domain"] = {{"values", values}};
    c2["initial_memory"] = rng.pick(0, n - 1);
    c2["next_state"] = json::array();
    for (int q = 0; q < k2; ++q) {
        for (int f = 0; f < f2; ++f)
            if (rng.chance(0.7))
                c2["next_state"].push_back(
                    {{"from", nm("p", q)}, {"fn", nm("psi", f)}, {"to", {nm("p", rng.pick(0, k2 - 1))}}});
        if (q == 0 || rng.chance(0.8))
            c2["next_state"].push_back(
                {{"from", nm("p", q)}, {"fn", "recv"}, {"to", {nm("p", rng.pick(0, k2 - 1))}}});
    }
    c2["in_port_domain"] = values;
    c2["out_port_domain"] = json::array();
    c2["ordinary_states"] = c2["states"];
    c2["communicating_states"] = json::array();
    c2["ordinary_functions"] = {"recv"};
    for (int f = 0; f < f2; ++f)
        c2["ordinary_functions"].push_back(nm("psi", f));
    c2["communicating_functions"] = json::array();

    return {{"schema", 1}, {"components", {c1, c2}}};
}

CsxmSystem random_system(std::uint64_t seed)
{
    return parse_system(random_system_json(seed));
}

namespace {

Value lambda_tuple(std::size_t n, std::size_t idx, const Value& v)
{
    std::vector<Value> items(n, Value::lambda());
    items[idx] = v;
    return Value::sequence(std::move(items));
}

SystemConfiguration normalised(SystemConfiguration c)
{
    for (auto& x : c) {
        x.remaining_input.clear();
        x.output.clear();
    }
    return c;
}

using SysEdge = std::tuple<SystemConfiguration, Value, Value, SystemConfiguration>;

std::vector<SysEdge> system_edges(const CsxmSystem& sys, const SystemConfiguration& cfg)
{
    std::vector<SysEdge> out;
    const std::size_t n = sys.components.size();
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::vector<Value> symbols = sys.components[idx].base.inputs;
        symbols.push_back(sys.comm_symbol);
        for (const auto& sym : symbols) {
            auto fed = cfg;
            fed[idx].remaining_input = {sym};
            for (const auto& tr : system_transitions(sys, fed)) {
                if (tr.component != idx + 1)
                    continue;
                const bool ok = tr.kind == SystemTransition::Kind::Ordinary ? tr.input == sym
                                                                            : sym == sys.comm_symbol;
                if (!ok)
                    continue;
                out.emplace_back(cfg, lambda_tuple(n, idx, sym), lambda_tuple(n, idx, tr.output),
                                 normalised(tr.successor));
            }
        }
    }
    return out;
}

}  // namespace

std::size_t reachable_system_configurations(const CsxmSystem& sys, std::size_t cap)
{
    std::set<SystemConfiguration> seen{normalised(initial_system_configuration(sys))};
    std::vector<SystemConfiguration> work(seen.begin(), seen.end());
    while (!work.empty() && seen.size() <= cap) {
        auto c = work.back();
        work.pop_back();
        for (auto& e : system_edges(sys, c)) {
            auto& succ = std::get<3>(e);
            if (seen.insert(succ).second)
                work.push_back(succ);
        }
    }
    return seen.size();
}

IsomorphismResult product_isomorphism(const CsxmSystem& sys, const Sxm& product)
{
    using Node = std::pair<std::string, Value>;
    using Edge = std::tuple<Node, Value, Value, Node>;
    IsomorphismResult r;
    auto key = [](const SystemConfiguration& c) { return Node{product_state(c), product_memory(c)}; };

    // System side.
    std::map<Node, SystemConfiguration> preimage;
    std::set<Edge> sys_edges;
    {
        auto init = normalised(initial_system_configuration(sys));
        std::set<SystemConfiguration> seen{init};
        std::vector<SystemConfiguration> work{init};
        preimage[key(init)] = init;
        while (!work.empty()) {
            auto c = work.back();
            work.pop_back();
            for (auto& [from, in, out, to] : system_edges(sys, c)) {
                sys_edges.insert({key(from), in, out, key(to)});
                if (seen.insert(to).second) {
                    auto [it, fresh] = preimage.emplace(key(to), to);
                    if (!fresh && it->second != to) {
                        r.reason = "two system configurations share the product node " + key(to).first;
                        return r;
                    }
                    work.push_back(to);
                }
            }
        }
    }

    // Product side.
    std::set<Node> prod_nodes;
    std::set<Edge> prod_edges;
    {
        if (product.initial_states.size() != 1) {
            r.reason = "product has several initial states";
            return r;
        }
        Node init{product.initial_states[0], product.initial_memory};
        prod_nodes.insert(init);
        std::vector<Node> work{init};
        while (!work.empty()) {
            auto nd = work.back();
            work.pop_back();
            for (const auto& in : product.inputs) {
                SxmConfiguration c{nd.second, nd.first, {in}, {}};
                for (const auto& s : sxm_step(product, c)) {
                    if (!s.remaining_input.empty() || s.output.size() != 1)
                        continue;
                    Node to{s.state, s.memory};
                    prod_edges.insert({nd, in, s.output[0], to});
                    if (prod_nodes.insert(to).second)
                        work.push_back(to);
                }
            }
        }
    }

    std::set<Node> sys_nodes;
    for (const auto& [k, _] : preimage)
        sys_nodes.insert(k);
    r.nodes = sys_nodes.size();
    r.edges = sys_edges.size();
    if (sys_nodes != prod_nodes) {
        r.reason = "node sets differ: system " + std::to_string(sys_nodes.size()) + ", product " +
                   std::to_string(prod_nodes.size());
        return r;
    }
    if (sys_edges != prod_edges) {
        r.reason = "edge sets differ: system " + std::to_string(sys_edges.size()) + ", product " +
                   std::to_string(prod_edges.size());
        return r;
    }
    r.isomorphic = true;
    return r;
}

}  // namespace heterotest::testing
