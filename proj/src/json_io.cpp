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
#include "heterotest/json_io.hpp"

#include "heterotest/error.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace heterotest {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg)
{
    throw Error(ErrorCode::Parse, path + ": " + msg, {{"path", path}});
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed)
{
    if (!j.is_object())
        fail(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            fail(path, "unknown key '" + it.key() + "'");
    }
}

const json& need(const json& j, const std::string& path, const std::string& key)
{
    if (!j.contains(key))
        fail(path, "missing key '" + key + "'");
    return j.at(key);
}

std::string get_string(const json& j, const std::string& path)
{
    if (!j.is_string())
        fail(path, "expected a string");
    return j.get<std::string>();
}

std::vector<std::string> string_list(const json& j, const std::string& path)
{
    if (!j.is_array())
        fail(path, "expected an array of strings");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(get_string(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
}

std::vector<Value> value_list(const json& j, const std::string& path)
{
    if (!j.is_array())
        fail(path, "expected an array");
    std::vector<Value> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        try {
            out.push_back(value_from_json(j[i]));
        } catch (const Error& e) {
            fail(path + "[" + std::to_string(i) + "]", e.what());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Value value_at(const json& j, const std::string& path)
{
    try {
        return value_from_json(j);
    } catch (const Error& e) {
        fail(path, e.what());
    }
}

json values_to_json(const std::vector<Value>& vs)
{
    auto arr = json::array();
    for (const auto& v : vs)
        arr.push_back(value_to_json(v));
    return arr;
}

MemoryDomain parse_domain(const json& j, const std::string& path)
{
    check_keys(j, path, {"values", "range", "open", "sample"});
    if (j.contains("values")) {
        if (j.size() != 1)
            fail(path, "'values' excludes other keys");
        return MemoryDomain::values(value_list(j["values"], path + ".values"));
    }
    if (j.contains("range")) {
        const auto& r = j["range"];
        if (j.size() != 1 || !r.is_array() || r.size() != 2 || !r[0].is_number_integer() ||
            !r[1].is_number_integer())
            fail(path, "'range' must be [lo, hi]");
        return MemoryDomain::range(r[0].get<std::int64_t>(), r[1].get<std::int64_t>());
    }
    if (j.contains("open")) {
        if (!j["open"].is_boolean() || !j["open"].get<bool>())
            fail(path, "'open' must be true");
        std::vector<Value> sample;
        if (j.contains("sample"))
            sample = value_list(j["sample"], path + ".sample");
        return MemoryDomain::open(std::move(sample));
    }
    fail(path, "expected one of 'values', 'range', 'open'");
}

json domain_to_json(const MemoryDomain& d)
{
    switch (d.kind()) {
    case MemoryDomain::Kind::Values:
        return {{"values", values_to_json(d.enumerate())}};
    case MemoryDomain::Kind::Range:
        return {{"range", {d.lo(), d.hi()}}};
    case MemoryDomain::Kind::Open:
        return {{"open", true}, {"sample", values_to_json(d.enumerate())}};
    }
    return nullptr;
}

template <typename T, typename F>
T guarded(const std::string& path, F&& f)
{
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Parse)
            throw;
        fail(path, e.what());
    } catch (const json::exception& e) {
        fail(path, e.what());
    }
}

Case parse_case(const json& j, const std::string& path)
{
    check_keys(j, path, {"mem_pattern", "input", "in_port", "guard", "output", "mem_next", "out_port"});
    Case c;
    if (j.contains("mem_pattern"))
        c.memory = guarded<Pattern>(path + ".mem_pattern",
                                    [&] { return pattern_from_json(j["mem_pattern"]); });
    if (j.contains("input"))
        c.input = guarded<Pattern>(path + ".input", [&] { return pattern_from_json(j["input"]); });
    if (j.contains("in_port"))
        c.in_port =
            guarded<Pattern>(path + ".in_port", [&] { return pattern_from_json(j["in_port"]); });
    if (j.contains("guard"))
        c.guard = guarded<Term>(path + ".guard", [&] { return term_from_json(j["guard"]); });
    if (j.contains("output"))
        c.output = guarded<Term>(path + ".output", [&] { return term_from_json(j["output"]); });
    if (j.contains("mem_next"))
        c.memory_next =
            guarded<Term>(path + ".mem_next", [&] { return term_from_json(j["mem_next"]); });
    if (j.contains("out_port"))
        c.out_port =
            guarded<Term>(path + ".out_port", [&] { return term_from_json(j["out_port"]); });
    return c;
}

json case_to_json(const Case& c)
{
    json j;
    j["mem_pattern"] = pattern_to_json(c.memory);
    j["input"] = pattern_to_json(c.input);
    if (c.in_port)
        j["in_port"] = pattern_to_json(*c.in_port);
    if (c.guard)
        j["guard"] = term_to_json(*c.guard);
    if (c.output)
        j["output"] = term_to_json(*c.output);
    if (c.memory_next)
        j["mem_next"] = term_to_json(*c.memory_next);
    if (c.out_port)
        j["out_port"] = term_to_json(*c.out_port);
    return j;
}

const std::set<std::string> kSxmKeys{"schema",         "inputs",          "outputs",
                                     "states",         "initial_states",  "terminal_states",
                                     "memory_domain",  "initial_memory",  "functions",
                                     "next_state"};
const std::set<std::string> kCsxmExtra{"in_port_domain",        "out_port_domain",
                                       "ordinary_states",       "communicating_states",
                                       "ordinary_functions",    "communicating_functions",
                                       "extended"};

Sxm parse_sxm_body(const json& j, const std::string& path)
{
    Sxm m;
    m.inputs = value_list(need(j, path, "inputs"), path + ".inputs");
    m.outputs = value_list(need(j, path, "outputs"), path + ".outputs");
    m.states = string_list(need(j, path, "states"), path + ".states");
    m.initial_states = string_list(need(j, path, "initial_states"), path + ".initial_states");
    m.terminal_states = string_list(need(j, path, "terminal_states"), path + ".terminal_states");
    std::sort(m.terminal_states.begin(), m.terminal_states.end());
    m.memory_domain = parse_domain(need(j, path, "memory_domain"), path + ".memory_domain");
    m.initial_memory = value_at(need(j, path, "initial_memory"), path + ".initial_memory");

    const auto& fs = need(j, path, "functions");
    if (!fs.is_array())
        fail(path + ".functions", "expected an array");
    for (std::size_t i = 0; i < fs.size(); ++i) {
        const auto fp = path + ".functions[" + std::to_string(i) + "]";
        check_keys(fs[i], fp, {"name", "target", "cases"});
        const auto name = get_string(need(fs[i], fp, "name"), fp + ".name");
        std::optional<int> target;
        if (fs[i].contains("target")) {
            if (!fs[i]["target"].is_number_integer())
                fail(fp + ".target", "expected an integer");
            target = fs[i]["target"].get<int>();
        }
        const auto& cs = need(fs[i], fp, "cases");
        if (!cs.is_array())
            fail(fp + ".cases", "expected an array");
        std::vector<Case> cases;
        for (std::size_t r = 0; r < cs.size(); ++r)
            cases.push_back(parse_case(cs[r], fp + ".cases[" + std::to_string(r) + "]"));
        m.functions.emplace_back(name, std::make_shared<CaseTable>(std::move(cases)), target);
    }

    const auto& ns = need(j, path, "next_state");
    if (!ns.is_array())
        fail(path + ".next_state", "expected an array");
    for (std::size_t i = 0; i < ns.size(); ++i) {
        const auto np = path + ".next_state[" + std::to_string(i) + "]";
        check_keys(ns[i], np, {"from", "fn", "to"});
        const auto from = get_string(need(ns[i], np, "from"), np + ".from");
        const auto fn = get_string(need(ns[i], np, "fn"), np + ".fn");
        auto to = string_list(need(ns[i], np, "to"), np + ".to");
        auto& slot = m.next_state[{from, fn}];
        slot.insert(slot.end(), to.begin(), to.end());
        std::sort(slot.begin(), slot.end());
        slot.erase(std::unique(slot.begin(), slot.end()), slot.end());
    }
    return m;
}

json sxm_body_to_json(const Sxm& m)
{
    json j;
    j["inputs"] = values_to_json(m.inputs);
    j["outputs"] = values_to_json(m.outputs);
    j["states"] = m.states;
    j["initial_states"] = m.initial_states;
    j["terminal_states"] = m.terminal_states;
    j["memory_domain"] = domain_to_json(m.memory_domain);
    j["initial_memory"] = value_to_json(m.initial_memory);
    auto fs = json::array();
    for (const auto& f : m.functions) {
        json fj;
        fj["name"] = f.name();
        if (f.target())
            fj["target"] = *f.target();
        const CaseTable* table = f.case_table();
        if (!table)
            throw Error(ErrorCode::InvalidModel,
                        "function '" + f.name() + "' has a built-in body and cannot be serialised");
        auto cs = json::array();
        for (const auto& c : table->cases())
            cs.push_back(case_to_json(c));
        fj["cases"] = cs;
        fs.push_back(std::move(fj));
    }
    j["functions"] = fs;
    auto ns = json::array();
    for (const auto& [key, targets] : m.next_state)
        ns.push_back({{"from", key.first}, {"fn", key.second}, {"to", targets}});
    j["next_state"] = ns;
    return j;
}

Csxm parse_csxm_at(const json& j, const std::string& path)
{
    std::set<std::string> keys = kSxmKeys;
    keys.insert(kCsxmExtra.begin(), kCsxmExtra.end());
    check_keys(j, path, keys);
    Csxm c;
    c.base = parse_sxm_body(j, path);
    c.in_port_domain = value_list(need(j, path, "in_port_domain"), path + ".in_port_domain");
    c.out_port_domain = value_list(need(j, path, "out_port_domain"), path + ".out_port_domain");
    c.ordinary_states = string_list(need(j, path, "ordinary_states"), path + ".ordinary_states");
    c.communicating_states =
        string_list(need(j, path, "communicating_states"), path + ".communicating_states");
    c.ordinary_functions =
        string_list(need(j, path, "ordinary_functions"), path + ".ordinary_functions");
    c.communicating_functions =
        string_list(need(j, path, "communicating_functions"), path + ".communicating_functions");
    if (j.contains("extended")) {
        if (!j["extended"].is_boolean())
            fail(path + ".extended", "expected a boolean");
        c.extended = j["extended"].get<bool>();
    }
    return c;
}

int parse_membrane(const json& j, const std::string& path, int parent, PSystem& ps)
{
    check_keys(j, path, {"id", "children"});
    const auto& id = need(j, path, "id");
    if (!id.is_number_integer())
        fail(path + ".id", "expected an integer");
    Membrane m;
    m.id = id.get<int>();
    m.parent = parent;
    ps.membranes.push_back(m);
    const std::size_t slot = ps.membranes.size() - 1;
    if (j.contains("children")) {
        const auto& ch = j["children"];
        if (!ch.is_array())
            fail(path + ".children", "expected an array");
        for (std::size_t i = 0; i < ch.size(); ++i) {
            int cid = parse_membrane(ch[i], path + ".children[" + std::to_string(i) + "]", m.id, ps);
            ps.membranes[slot].children.push_back(cid);
        }
    }
    return m.id;
}

int parse_target(const json& j, const std::string& path)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "here")
            return 0;
        try {
            std::size_t used = 0;
            int v = std::stoi(s, &used);
            if (used == s.size() && v > 0)
                return v;
        } catch (...) {
        }
        fail(path, "target must be \"here\" or a compartment id");
    }
    if (j.is_number_integer() && j.get<int>() > 0)
        return j.get<int>();
    fail(path, "target must be \"here\" or a compartment id");
}

int parse_id_key(const std::string& key, const std::string& path)
{
    try {
        std::size_t used = 0;
        int v = std::stoi(key, &used);
        if (used == key.size())
            return v;
    } catch (...) {
    }
    fail(path, "'" + key + "' is not a compartment id");
}

void structure_to_json(const PSystem& ps, int id, json& out)
{
    out["id"] = id;
    const Membrane* m = ps.membrane(id);
    if (m && !m->children.empty()) {
        out["children"] = json::array();
        for (int c : m->children) {
            json child;
            structure_to_json(ps, c, child);
            out["children"].push_back(child);
        }
    }
}

}  // namespace

nlohmann::json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::Io, "cannot open " + path.string(), {{"path", path.string()}});
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Parse, path.string() + ": " + e.what(), {{"path", path.string()}});
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::Io, "cannot write " + path.string(), {{"path", path.string()}});
    out << text;
    if (!out)
        throw Error(ErrorCode::Io, "write failed for " + path.string(), {{"path", path.string()}});
}

Sxm parse_sxm(const nlohmann::json& j)
{
    check_keys(j, "$", kSxmKeys);
    return parse_sxm_body(j, "$");
}

nlohmann::json sxm_to_json(const Sxm& model)
{
    json j = sxm_body_to_json(model);
    j["schema"] = 1;
    return j;
}

Csxm parse_csxm(const nlohmann::json& j)
{
    return parse_csxm_at(j, "$");
}

nlohmann::json csxm_to_json(const Csxm& c)
{
    json j = sxm_body_to_json(c.base);
    j["in_port_domain"] = values_to_json(c.in_port_domain);
    j["out_port_domain"] = values_to_json(c.out_port_domain);
    j["ordinary_states"] = c.ordinary_states;
    j["communicating_states"] = c.communicating_states;
    j["ordinary_functions"] = c.ordinary_functions;
    j["communicating_functions"] = c.communicating_functions;
    if (c.extended)
        j["extended"] = true;
    return j;
}

CsxmSystem parse_system(const nlohmann::json& j)
{
    check_keys(j, "$", {"schema", "components", "comm_symbol"});
    CsxmSystem sys;
    const auto& cs = need(j, "$", "components");
    if (!cs.is_array())
        fail("$.components", "expected an array");
    for (std::size_t i = 0; i < cs.size(); ++i)
        sys.components.push_back(parse_csxm_at(cs[i], "$.components[" + std::to_string(i) + "]"));
    if (j.contains("comm_symbol"))
        sys.comm_symbol = value_at(j["comm_symbol"], "$.comm_symbol");
    return sys;
}

nlohmann::json system_to_json(const CsxmSystem& sys)
{
    json j;
    j["schema"] = 1;
    j["comm_symbol"] = value_to_json(sys.comm_symbol);
    j["components"] = json::array();
    for (const auto& c : sys.components)
        j["components"].push_back(csxm_to_json(c));
    return j;
}

PSystem parse_psystem(const nlohmann::json& j)
{
    check_keys(j, "$", {"schema", "alphabet", "structure", "initial", "rules"});
    PSystem ps;
    ps.alphabet = string_list(need(j, "$", "alphabet"), "$.alphabet");
    std::sort(ps.alphabet.begin(), ps.alphabet.end());
    ps.alphabet.erase(std::unique(ps.alphabet.begin(), ps.alphabet.end()), ps.alphabet.end());
    parse_membrane(need(j, "$", "structure"), "$.structure", 0, ps);
    std::sort(ps.membranes.begin(), ps.membranes.end(),
              [](const Membrane& a, const Membrane& b) { return a.id < b.id; });

    const auto& init = need(j, "$", "initial");
    if (!init.is_object())
        fail("$.initial", "expected an object");
    for (auto it = init.begin(); it != init.end(); ++it) {
        const auto p = "$.initial." + it.key();
        ps.initial[parse_id_key(it.key(), p)] = Multiset::parse(get_string(it.value(), p));
    }

    const auto& rules = need(j, "$", "rules");
    if (!rules.is_object())
        fail("$.rules", "expected an object");
    std::vector<std::pair<int, std::vector<PRule>>> grouped;
    for (auto it = rules.begin(); it != rules.end(); ++it) {
        const auto p = "$.rules." + it.key();
        const int id = parse_id_key(it.key(), p);
        if (!it.value().is_array())
            fail(p, "expected an array");
        std::vector<PRule> list;
        for (std::size_t i = 0; i < it.value().size(); ++i) {
            const auto rp = p + "[" + std::to_string(i) + "]";
            const auto& rj = it.value()[i];
            check_keys(rj, rp, {"name", "lhs", "rhs"});
            PRule r;
            r.name = get_string(need(rj, rp, "name"), rp + ".name");
            r.compartment = id;
            r.lhs = Multiset::parse(get_string(need(rj, rp, "lhs"), rp + ".lhs"));
            const auto& rhs = need(rj, rp, "rhs");
            if (!rhs.is_array())
                fail(rp + ".rhs", "expected an array");
            for (std::size_t k = 0; k < rhs.size(); ++k) {
                const auto ip = rp + ".rhs[" + std::to_string(k) + "]";
                if (!rhs[k].is_array() || rhs[k].size() != 2)
                    fail(ip, "expected [symbol, target]");
                r.rhs.push_back({get_string(rhs[k][0], ip), parse_target(rhs[k][1], ip)});
            }
            list.push_back(std::move(r));
        }
        grouped.push_back({id, std::move(list)});
    }
    std::stable_sort(grouped.begin(), grouped.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [id, list] : grouped)
        for (auto& r : list)
            ps.rules.push_back(std::move(r));
    return ps;
}

nlohmann::json psystem_to_json(const PSystem& ps)
{
    json j;
    j["schema"] = 1;
    j["alphabet"] = ps.alphabet;
    for (const auto& m : ps.membranes) {
        if (m.parent == 0) {
            json s;
            structure_to_json(ps, m.id, s);
            j["structure"] = s;
        }
    }
    j["initial"] = json::object();
    for (const auto& [id, ms] : ps.initial)
        j["initial"][std::to_string(id)] = ms.canonical();
    j["rules"] = json::object();
    for (const auto& r : ps.rules) {
        auto rhs = json::array();
        for (const auto& item : r.rhs)
            rhs.push_back({item.symbol, item.target == 0 ? json("here") : json(item.target)});
        j["rules"][std::to_string(r.compartment)].push_back(
            {{"name", r.name}, {"lhs", r.lhs.canonical()}, {"rhs", rhs}});
    }
    return j;
}

ModelKind detect_model_kind(const nlohmann::json& j)
{
    if (!j.is_object())
        throw Error(ErrorCode::Parse, "model file must contain a JSON object");
    if (j.contains("components"))
        return ModelKind::System;
    if (j.contains("alphabet") && j.contains("structure"))
        return ModelKind::PSystem;
    if (j.contains("psystem") || j.contains("control"))
        return ModelKind::Heterotic;
    return ModelKind::Sxm;
}

}  // namespace heterotest
