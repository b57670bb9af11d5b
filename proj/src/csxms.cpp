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
#include "heterotest/csxms.hpp"

#include "heterotest/dft.hpp"
#include "heterotest/error.hpp"
#include "heterotest/json_io.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

namespace heterotest {

namespace {

template <typename T>
bool contains(const std::vector<T>& xs, const T& x)
{
    return std::find(xs.begin(), xs.end(), x) != xs.end();
}

void insert_sorted(std::vector<Value>& xs, const Value& v)
{
    auto it = std::lower_bound(xs.begin(), xs.end(), v);
    if (it == xs.end() || *it != v)
        xs.insert(it, v);
}

std::vector<Value> with_nomem(const std::vector<Value>& port_values)
{
    std::vector<Value> out{Value::nomem()};
    for (const auto& v : port_values) {
        if (!v.is_nomem())
            out.push_back(v);
    }
    return out;
}

// Communicating body after extension: consumes only the comm symbol and
// emits [i,j].
class ExtendedCommBody final : public FunctionBody {
public:
    ExtendedCommBody(std::shared_ptr<const FunctionBody> inner, Value symbol, Value output)
        : inner_(std::move(inner)), symbol_(std::move(symbol)), output_(std::move(output))
    {
    }

    std::vector<Effect> apply(const Value& memory, const Value& input,
                              const Value& in_port) const override
    {
        if (input != symbol_)
            return {};
        auto effects = inner_->apply(memory, input, in_port);
        for (auto& e : effects)
            e.output = output_;
        std::sort(effects.begin(), effects.end());
        effects.erase(std::unique(effects.begin(), effects.end()), effects.end());
        return effects;
    }

private:
    std::shared_ptr<const FunctionBody> inner_;
    Value symbol_;
    Value output_;
};

struct ComponentView {
    Value ip;
    Value m;
    Value op;
};

std::vector<ComponentView> split_memory(const Value& memory, std::size_t n)
{
    std::vector<ComponentView> out;
    if (!memory.is_sequence() || memory.as_sequence().size() != n)
        return out;
    for (const auto& part : memory.as_sequence()) {
        if (!part.is_sequence() || part.as_sequence().size() != 3)
            return {};
        const auto& s = part.as_sequence();
        out.push_back({s[0], s[1], s[2]});
    }
    return out;
}

Value join_memory(const std::vector<ComponentView>& parts)
{
    std::vector<Value> items;
    for (const auto& p : parts)
        items.push_back(Value::sequence({p.ip, p.m, p.op}));
    return Value::sequence(std::move(items));
}

Value lambda_tuple(std::size_t n, std::size_t i, const Value& v)
{
    std::vector<Value> items(n, Value::lambda());
    items[i] = v;
    return Value::sequence(std::move(items));
}

// Product body for a label moving exactly one component.
class ProductBody final : public FunctionBody {
public:
    ProductBody(std::size_t n, std::size_t index, ProcessingFunction function, bool communicating,
                Value comm_symbol)
        : n_(n), index_(index), function_(std::move(function)), communicating_(communicating),
          comm_symbol_(std::move(comm_symbol))
    {
    }

    std::vector<Effect> apply(const Value& memory, const Value& input,
                              const Value& in_port) const override
    {
        std::vector<Effect> out;
        if (!in_port.is_nomem() || !input.is_sequence() || input.as_sequence().size() != n_)
            return out;
        const auto& tuple = input.as_sequence();
        for (std::size_t j = 0; j < n_; ++j) {
            if (j != index_ && !tuple[j].is_lambda())
                return out;
        }
        const Value& symbol = tuple[index_];
        if (symbol.is_lambda())
            return out;
        auto parts = split_memory(memory, n_);
        if (parts.empty())
            return out;
        const ComponentView self = parts[index_];

        if (communicating_) {
            const std::size_t k = static_cast<std::size_t>(*function_.target()) - 1;
            if (symbol != comm_symbol_ || self.op.is_nomem() || k >= n_ ||
                !parts[k].ip.is_nomem())
                return out;
            for (const auto& e : function_.apply(self.m, symbol, self.ip)) {
                auto next = parts;
                next[index_].m = e.memory;
                next[index_].op = Value::nomem();
                next[k].ip = self.op;
                out.push_back({lambda_tuple(n_, index_, e.output), join_memory(next), std::nullopt});
            }
        } else {
            auto emit = [&](const Value& port_arg, bool consume) {
                for (const auto& e : function_.apply(self.m, symbol, port_arg)) {
                    auto next = parts;
                    next[index_].m = e.memory;
                    if (consume)
                        next[index_].ip = Value::nomem();
                    if (e.out_port)
                        next[index_].op = *e.out_port;
                    out.push_back(
                        {lambda_tuple(n_, index_, e.output), join_memory(next), std::nullopt});
                }
            };
            emit(Value::nomem(), false);
            if (!self.ip.is_nomem())
                emit(self.ip, true);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

private:
    std::size_t n_;
    std::size_t index_;
    ProcessingFunction function_;
    bool communicating_;
    Value comm_symbol_;
};

bool has_communicating(const CsxmSystem& sys)
{
    for (const auto& c : sys.components) {
        if (!c.communicating_functions.empty())
            return true;
    }
    return false;
}

// Cartesian product of per-position choices, in lexicographic order.
template <typename T, typename F>
void for_each_product(const std::vector<std::vector<T>>& choices, F&& f)
{
    const std::size_t n = choices.size();
    for (const auto& c : choices) {
        if (c.empty())
            return;
    }
    std::vector<std::size_t> idx(n, 0);
    std::vector<T> cur(n);
    for (;;) {
        for (std::size_t i = 0; i < n; ++i)
            cur[i] = choices[i][idx[i]];
        f(cur);
        std::size_t p = n;
        while (p > 0) {
            --p;
            if (++idx[p] < choices[p].size())
                break;
            idx[p] = 0;
            if (p == 0)
                return;
        }
        if (n == 0)
            return;
    }
}

}  // namespace

bool Csxm::is_communicating_state(const std::string& q) const
{
    return contains(communicating_states, q);
}

bool Csxm::is_communicating_function(const std::string& f) const
{
    return contains(communicating_functions, f);
}

std::size_t Csxm::communicating_position(const std::string& f) const
{
    auto it = std::find(communicating_functions.begin(), communicating_functions.end(), f);
    return it == communicating_functions.end()
               ? 0
               : static_cast<std::size_t>(it - communicating_functions.begin()) + 1;
}

bool structurally_equal(const Csxm& a, const Csxm& b)
{
    return structurally_equal(a.base, b.base) && a.in_port_domain == b.in_port_domain &&
           a.out_port_domain == b.out_port_domain && a.ordinary_states == b.ordinary_states &&
           a.communicating_states == b.communicating_states &&
           a.ordinary_functions == b.ordinary_functions &&
           a.communicating_functions == b.communicating_functions && a.extended == b.extended;
}

bool structurally_equal(const CsxmSystem& a, const CsxmSystem& b)
{
    if (a.components.size() != b.components.size() || a.comm_symbol != b.comm_symbol)
        return false;
    for (std::size_t i = 0; i < a.components.size(); ++i) {
        if (!structurally_equal(a.components[i], b.components[i]))
            return false;
    }
    return true;
}

Value comm_output(std::size_t component, std::size_t position)
{
    return Value::atom("[" + std::to_string(component) + "," + std::to_string(position) + "]");
}

// --- validation ----------------------------------------------------------

ValidationReport validate_csxm(const Csxm& c, std::size_t index, std::size_t system_size)
{
    const std::string prefix = "components[" + std::to_string(index) + "].";
    ValidationReport report;
    SxmValidationOptions opts;
    opts.allow_ports = true;
    opts.in_port_values = c.in_port_domain;
    for (auto v : validate_sxm(c.base, opts)) {
        v.location = prefix + v.location;
        report.push_back(std::move(v));
    }
    auto add = [&](const std::string& loc, const std::string& msg) {
        report.push_back({prefix + loc, msg});
    };

    for (const auto& q : c.base.states) {
        bool o = contains(c.ordinary_states, q);
        bool m = contains(c.communicating_states, q);
        if (o == m)
            add("ordinary_states", "state '" + q + "' must be in exactly one of ordinary/communicating");
    }
    for (const auto& q : c.ordinary_states) {
        if (!c.base.has_state(q))
            add("ordinary_states", "unknown state '" + q + "'");
    }
    for (const auto& q : c.communicating_states) {
        if (!c.base.has_state(q))
            add("communicating_states", "unknown state '" + q + "'");
    }
    for (const auto& f : c.base.functions) {
        bool o = contains(c.ordinary_functions, f.name());
        bool m = contains(c.communicating_functions, f.name());
        if (o == m)
            add("ordinary_functions",
                "function '" + f.name() + "' must be in exactly one of ordinary/communicating");
        if (m) {
            if (!f.target())
                add("functions[" + f.name() + "]", "communicating function has no target");
            else if (*f.target() < 1 || static_cast<std::size_t>(*f.target()) > system_size ||
                     static_cast<std::size_t>(*f.target()) == index)
                add("functions[" + f.name() + "]",
                    "target " + std::to_string(*f.target()) + " is not another component");
        } else if (f.target()) {
            add("functions[" + f.name() + "]", "ordinary function declares a target");
        }
    }
    for (const auto& name : c.ordinary_functions) {
        if (!c.base.function(name))
            add("ordinary_functions", "unknown function '" + name + "'");
    }
    for (const auto& name : c.communicating_functions) {
        if (!c.base.function(name))
            add("communicating_functions", "unknown function '" + name + "'");
    }
    for (const auto& [key, targets] : c.base.next_state) {
        const auto loc = "next_state[" + key.first + "," + key.second + "]";
        bool q_comm = c.is_communicating_state(key.first);
        bool f_comm = c.is_communicating_function(key.second);
        if (q_comm != f_comm)
            add(loc, "ordinary and communicating states and functions may not mix");
        if (f_comm) {
            for (const auto& t : targets) {
                if (c.is_communicating_state(t))
                    add(loc, "communicating function must lead to an ordinary state");
            }
        }
    }
    for (const auto& q : c.base.initial_states) {
        if (c.is_communicating_state(q))
            add("initial_states", "initial state '" + q + "' is communicating");
    }
    for (const auto* dom : {&c.in_port_domain, &c.out_port_domain}) {
        const char* name = dom == &c.in_port_domain ? "in_port_domain" : "out_port_domain";
        for (const auto& v : *dom) {
            if (v.is_reserved())
                add(name, "reserved atom " + v.to_string() + " in port domain");
            else if (!c.base.memory_domain.contains(v) && c.base.memory_domain.exhaustive())
                add(name, "port value " + v.to_string() + " is outside the memory domain");
        }
    }
    for (const auto& name : c.communicating_functions) {
        const ProcessingFunction* f = c.base.function(name);
        const CaseTable* table = f ? f->case_table() : nullptr;
        if (!table)
            continue;
        for (std::size_t r = 0; r < table->cases().size(); ++r) {
            const Case& row = table->cases()[r];
            const auto loc = "functions[" + name + "].cases[" + std::to_string(r) + "]";
            if (row.input.kind() == Pattern::Kind::Sequence ||
                (row.input.kind() == Pattern::Kind::Literal && !c.extended))
                add(loc, "communicating rows must accept any input symbol");
            if (row.out_port)
                add(loc, "communicating rows may not set the out-port");
            if (row.output && !c.extended)
                add(loc, "communicating rows emit no output symbol");
        }
    }
    // Out-port writes stay inside the declared out-port domain.
    if (c.base.memory_domain.has_sample()) {
        const auto memories = c.base.memory_domain.enumerate();
        const auto ports = with_nomem(c.in_port_domain);
        for (const auto& name : c.ordinary_functions) {
            const ProcessingFunction* f = c.base.function(name);
            if (!f || !f->body())
                continue;
            bool reported = false;
            for (const auto& m : memories) {
                for (const auto& in : c.base.inputs) {
                    for (const auto& p : ports) {
                        for (const auto& e : f->apply(m, in, p)) {
                            if (!reported && e.out_port && !e.out_port->is_nomem() &&
                                !std::binary_search(c.out_port_domain.begin(),
                                                    c.out_port_domain.end(), *e.out_port)) {
                                add("functions[" + name + "]",
                                    "out-port value " + e.out_port->to_string() +
                                        " is outside the out-port domain");
                                reported = true;
                            }
                        }
                    }
                }
            }
        }
    }
    std::sort(report.begin(), report.end());
    report.erase(std::unique(report.begin(), report.end()), report.end());
    return report;
}

ValidationReport validate_system(const CsxmSystem& sys)
{
    ValidationReport report;
    const std::size_t n = sys.components.size();
    if (n == 0)
        report.push_back({"components", "system has no components"});
    if (sys.comm_symbol.is_reserved())
        report.push_back({"comm_symbol", "communication symbol is a reserved atom"});
    for (std::size_t i = 0; i < n; ++i) {
        const Csxm& c = sys.components[i];
        auto r = validate_csxm(c, i + 1, n);
        report.insert(report.end(), r.begin(), r.end());
        if (!c.extended && std::binary_search(c.base.inputs.begin(), c.base.inputs.end(),
                                              sys.comm_symbol))
            report.push_back({"components[" + std::to_string(i + 1) + "].inputs",
                              "input alphabet contains the communication symbol " +
                                  sys.comm_symbol.to_string()});
        for (const auto& name : c.communicating_functions) {
            const ProcessingFunction* f = c.base.function(name);
            if (!f || !f->target() || *f->target() < 1 || static_cast<std::size_t>(*f->target()) > n)
                continue;
            const Csxm& target = sys.components[static_cast<std::size_t>(*f->target()) - 1];
            for (const auto& v : c.out_port_domain) {
                if (!std::binary_search(target.in_port_domain.begin(), target.in_port_domain.end(),
                                        v))
                    report.push_back({"components[" + std::to_string(i + 1) + "].out_port_domain",
                                      "value " + v.to_string() + " sent by " + name +
                                          " is outside the in-port domain of component " +
                                          std::to_string(*f->target())});
            }
        }
    }
    std::sort(report.begin(), report.end());
    report.erase(std::unique(report.begin(), report.end()), report.end());
    return report;
}

// --- semantics -----------------------------------------------------------

SystemConfiguration initial_system_configuration(const CsxmSystem& sys,
                                                 std::vector<std::vector<Value>> inputs)
{
    SystemConfiguration cfg;
    for (std::size_t i = 0; i < sys.components.size(); ++i) {
        const Csxm& c = sys.components[i];
        ComponentConfiguration cc;
        cc.memory = c.base.initial_memory;
        cc.state = c.base.initial_states.empty() ? std::string() : c.base.initial_states.front();
        if (i < inputs.size())
            cc.remaining_input = std::move(inputs[i]);
        cfg.push_back(std::move(cc));
    }
    return cfg;
}

std::vector<SystemTransition> system_transitions(const CsxmSystem& sys,
                                                 const SystemConfiguration& cfg)
{
    std::vector<SystemTransition> out;
    const std::size_t n = sys.components.size();
    for (std::size_t i = 0; i < n && i < cfg.size(); ++i) {
        const Csxm& c = sys.components[i];
        const ComponentConfiguration& cc = cfg[i];
        for (const auto& fname : c.base.functions_at(cc.state)) {
            const ProcessingFunction* f = c.base.function(fname);
            const auto& targets = c.base.next_state.at({cc.state, fname});
            if (!f)
                continue;
            if (c.is_communicating_function(fname)) {
                if (!f->target() || cc.out_port.is_nomem())
                    continue;
                const std::size_t k = static_cast<std::size_t>(*f->target()) - 1;
                if (k >= n || k == i || !cfg[k].in_port.is_nomem())
                    continue;
                for (const auto& e : f->apply(cc.memory, sys.comm_symbol, cc.in_port)) {
                    for (const auto& t : targets) {
                        SystemTransition tr;
                        tr.kind = SystemTransition::Kind::Communicating;
                        tr.component = i + 1;
                        tr.function = fname;
                        tr.target = k + 1;
                        tr.input = sys.comm_symbol;
                        tr.output = e.output;
                        tr.successor = cfg;
                        tr.successor[i].memory = e.memory;
                        tr.successor[i].state = t;
                        tr.successor[i].out_port = Value::nomem();
                        tr.successor[k].in_port = cc.out_port;
                        out.push_back(std::move(tr));
                    }
                }
                continue;
            }
            if (cc.remaining_input.empty())
                continue;
            const Value& head = cc.remaining_input.front();
            auto fire = [&](const Value& port_arg, bool consume) {
                for (const auto& e : f->apply(cc.memory, head, port_arg)) {
                    for (const auto& t : targets) {
                        SystemTransition tr;
                        tr.kind = SystemTransition::Kind::Ordinary;
                        tr.component = i + 1;
                        tr.function = fname;
                        tr.input = head;
                        tr.output = e.output;
                        tr.consumed_port = consume;
                        tr.successor = cfg;
                        auto& s = tr.successor[i];
                        s.memory = e.memory;
                        s.state = t;
                        s.remaining_input.erase(s.remaining_input.begin());
                        s.output.push_back(e.output);
                        if (consume)
                            s.in_port = Value::nomem();
                        if (e.out_port)
                            s.out_port = *e.out_port;
                        out.push_back(std::move(tr));
                    }
                }
            };
            fire(Value::nomem(), false);
            if (!cc.in_port.is_nomem())
                fire(cc.in_port, true);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<SystemConfiguration> system_step(const CsxmSystem& sys, const SystemConfiguration& cfg)
{
    std::set<SystemConfiguration> out;
    for (auto& t : system_transitions(sys, cfg))
        out.insert(std::move(t.successor));
    return {out.begin(), out.end()};
}

// --- extension -----------------------------------------------------------

CsxmSystem extend_for_testing(const CsxmSystem& sys)
{
    if (!has_communicating(sys))
        return sys;
    const Value& a = sys.comm_symbol;
    CsxmSystem out = sys;
    // Alphabet-collision check against every component.
    std::vector<Value> fresh{a};
    for (std::size_t i = 0; i < sys.components.size(); ++i) {
        for (std::size_t j = 1; j <= sys.components[i].communicating_functions.size(); ++j)
            fresh.push_back(comm_output(i + 1, j));
    }
    for (std::size_t i = 0; i < sys.components.size(); ++i) {
        const Csxm& c = sys.components[i];
        if (c.extended)
            continue;
        for (const auto& v : fresh) {
            if (std::binary_search(c.base.inputs.begin(), c.base.inputs.end(), v) ||
                std::binary_search(c.base.outputs.begin(), c.base.outputs.end(), v))
                throw Error(ErrorCode::AlphabetCollision,
                            "symbol " + v.to_string() + " already occurs in component " +
                                std::to_string(i + 1),
                            {{"component", i + 1}, {"symbol", value_to_json(v)}});
        }
    }

    for (std::size_t i = 0; i < out.components.size(); ++i) {
        Csxm& c = out.components[i];
        if (c.extended)
            continue;
        c.extended = true;
        if (c.communicating_functions.empty())
            continue;
        insert_sorted(c.base.inputs, a);
        for (auto& f : c.base.functions) {
            std::size_t j = c.communicating_position(f.name());
            if (j == 0)
                continue;
            const Value out_sym = comm_output(i + 1, j);
            insert_sorted(c.base.outputs, out_sym);
            if (const CaseTable* table = f.case_table()) {
                auto rows = table->cases();
                for (auto& row : rows) {
                    if (row.input.kind() == Pattern::Kind::Wildcard)
                        row.input = Pattern::literal(a);
                    row.output = Term::literal(out_sym);
                }
                f = ProcessingFunction(f.name(), std::make_shared<CaseTable>(std::move(rows)),
                                       f.target());
            } else {
                f = ProcessingFunction(
                    f.name(), std::make_shared<ExtendedCommBody>(f.body(), a, out_sym), f.target());
            }
        }
    }
    return out;
}

// --- product -------------------------------------------------------------

std::string tuple_name(const std::vector<std::string>& parts)
{
    std::string s = "(";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i)
            s += ",";
        s += parts[i];
    }
    return s + ")";
}

std::string product_label(std::size_t n, std::size_t component, const std::string& function)
{
    std::vector<std::string> parts;
    for (std::size_t j = 1; j <= n; ++j)
        parts.push_back(j == component ? function : "id_" + std::to_string(j));
    return tuple_name(parts);
}

Value product_memory(const SystemConfiguration& cfg)
{
    std::vector<ComponentView> parts;
    for (const auto& c : cfg)
        parts.push_back({c.in_port, c.memory, c.out_port});
    return join_memory(parts);
}

std::string product_state(const SystemConfiguration& cfg)
{
    std::vector<std::string> parts;
    for (const auto& c : cfg)
        parts.push_back(c.state);
    return tuple_name(parts);
}

Sxm build_product_sxm(const CsxmSystem& sys, const ProductOptions& options)
{
    const std::size_t n = sys.components.size();
    if (n == 0)
        throw Error(ErrorCode::InvalidModel, "system has no components");
    if (has_communicating(sys)) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!sys.components[i].extended)
                throw Error(ErrorCode::UnextendedSystem,
                            "component " + std::to_string(i + 1) +
                                " has not been extended for testing",
                            {{"component", i + 1}});
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = sys.components[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i)
                continue;
            for (std::size_t p = 1; p <= sys.components[j].communicating_functions.size(); ++p) {
                const Value sym = comm_output(j + 1, p);
                if (std::binary_search(c.base.outputs.begin(), c.base.outputs.end(), sym))
                    throw Error(ErrorCode::AlphabetCollision,
                                "component " + std::to_string(i + 1) + " emits " + sym.to_string(),
                                {{"component", i + 1}, {"symbol", value_to_json(sym)}});
            }
        }
    }

    Sxm p;
    // Alphabets: ∏(Σᵢ ∪ {a, λ}) minus the all-λ tuple; Γ analogously.
    std::vector<std::vector<Value>> in_choices, out_choices;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = sys.components[i];
        std::vector<Value> ins = c.base.inputs;
        insert_sorted(ins, sys.comm_symbol);
        insert_sorted(ins, Value::lambda());
        in_choices.push_back(ins);
        std::vector<Value> outs = c.base.outputs;
        for (std::size_t j = 1; j <= c.communicating_functions.size(); ++j)
            insert_sorted(outs, comm_output(i + 1, j));
        insert_sorted(outs, Value::lambda());
        out_choices.push_back(outs);
    }
    auto build_alphabet = [&](const std::vector<std::vector<Value>>& choices) {
        std::vector<Value> alpha;
        for_each_product(choices, [&](const std::vector<Value>& t) {
            if (std::all_of(t.begin(), t.end(), [](const Value& v) { return v.is_lambda(); }))
                return;
            alpha.push_back(Value::sequence(t));
        });
        std::sort(alpha.begin(), alpha.end());
        return alpha;
    };
    p.inputs = build_alphabet(in_choices);
    p.outputs = build_alphabet(out_choices);

    std::vector<std::vector<std::string>> state_choices, init_choices, term_choices;
    for (const auto& c : sys.components) {
        state_choices.push_back(c.base.states);
        init_choices.push_back(c.base.initial_states);
        term_choices.push_back(c.base.terminal_states);
    }
    for_each_product(state_choices,
                     [&](const std::vector<std::string>& t) { p.states.push_back(tuple_name(t)); });
    for_each_product(init_choices, [&](const std::vector<std::string>& t) {
        p.initial_states.push_back(tuple_name(t));
    });
    for_each_product(term_choices, [&](const std::vector<std::string>& t) {
        p.terminal_states.push_back(tuple_name(t));
    });
    std::sort(p.terminal_states.begin(), p.terminal_states.end());

    {
        std::vector<ComponentView> parts;
        for (const auto& c : sys.components)
            parts.push_back({Value::nomem(), c.base.initial_memory, Value::nomem()});
        p.initial_memory = join_memory(parts);
    }

    // Functions and next-state relation.
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = sys.components[i];
        for (const auto& f : c.base.functions) {
            p.functions.emplace_back(
                product_label(n, i + 1, f.name()),
                std::make_shared<ProductBody>(n, i, f, c.is_communicating_function(f.name()),
                                              sys.comm_symbol));
        }
    }
    std::sort(p.functions.begin(), p.functions.end(),
              [](const ProcessingFunction& x, const ProcessingFunction& y) {
                  return x.name() < y.name();
              });
    for_each_product(state_choices, [&](const std::vector<std::string>& t) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& c = sys.components[i];
            for (const auto& fname : c.base.functions_at(t[i])) {
                std::vector<std::string> targets;
                for (const auto& q : c.base.next_state.at({t[i], fname})) {
                    auto u = t;
                    u[i] = q;
                    targets.push_back(tuple_name(u));
                }
                std::sort(targets.begin(), targets.end());
                p.next_state[{tuple_name(t), product_label(n, i + 1, fname)}] = targets;
            }
        }
    });

    // Memory: open, sampled by the reachable product memories.
    std::set<std::pair<std::string, Value>> seen;
    std::deque<std::pair<std::string, Value>> queue;
    for (const auto& q : p.initial_states) {
        if (seen.insert({q, p.initial_memory}).second)
            queue.push_back({q, p.initial_memory});
    }
    std::set<Value> memories;
    while (!queue.empty()) {
        auto [q, m] = queue.front();
        queue.pop_front();
        memories.insert(m);
        for (auto it = p.next_state.lower_bound({q, std::string()});
             it != p.next_state.end() && it->first.first == q; ++it) {
            const ProcessingFunction* f = p.function(it->first.second);
            for (const auto& in : p.inputs) {
                for (const auto& e : f->apply(m, in)) {
                    for (const auto& t : it->second) {
                        if (seen.insert({t, e.memory}).second) {
                            if (seen.size() > options.max_configurations)
                                throw Error(ErrorCode::ExplosionBound,
                                            "product has more than " +
                                                std::to_string(options.max_configurations) +
                                                " reachable configurations");
                            queue.push_back({t, e.memory});
                        }
                    }
                }
            }
        }
    }
    p.memory_domain = MemoryDomain::open({memories.begin(), memories.end()});
    return p;
}

std::vector<ProductConflict> product_conflicts(const Sxm& product)
{
    std::vector<ProductConflict> out;
    const Automaton a = associated_automaton(product);
    for (const auto& [key, targets] : product.next_state) {
        if (targets.size() > 1)
            out.push_back({key.first, key.second, "", Value(), Value()});
    }
    // Behavioural scan over reachable configurations.
    std::set<std::pair<std::string, Value>> seen;
    std::deque<std::pair<std::string, Value>> queue;
    for (const auto& q : product.initial_states) {
        seen.insert({q, product.initial_memory});
        queue.push_back({q, product.initial_memory});
    }
    std::set<std::string> reported_states;
    while (!queue.empty()) {
        auto [q, m] = queue.front();
        queue.pop_front();
        for (const auto& in : product.inputs) {
            std::vector<std::string> defined;
            for (auto it = product.next_state.lower_bound({q, std::string()});
                 it != product.next_state.end() && it->first.first == q; ++it) {
                const ProcessingFunction* f = product.function(it->first.second);
                auto effects = f->apply(m, in);
                if (effects.empty())
                    continue;
                defined.push_back(it->first.second);
                if (effects.size() > 1 && !reported_states.count(q)) {
                    out.push_back({q, it->first.second, "", m, in});
                    reported_states.insert(q);
                }
                for (const auto& e : effects) {
                    for (const auto& t : it->second) {
                        if (seen.insert({t, e.memory}).second)
                            queue.push_back({t, e.memory});
                    }
                }
            }
            if (defined.size() > 1 && !reported_states.count(q)) {
                out.push_back({q, defined[0], defined[1], m, in});
                reported_states.insert(q);
            }
        }
    }
    (void)a;
    return out;
}

TestSuite generate_csxms_test_suite(const CsxmSystem& sys, std::size_t k,
                                    const ProductOptions& options)
{
    auto report = validate_system(sys);
    if (!report.empty()) {
        auto detail = nlohmann::json::array();
        for (const auto& v : report)
            detail.push_back({{"location", v.location}, {"message", v.message}});
        throw Error(ErrorCode::InvalidModel, "system fails validation", detail);
    }
    const CsxmSystem ext = extend_for_testing(sys);
    for (std::size_t i = 0; i < ext.components.size(); ++i) {
        const Csxm& c = ext.components[i];
        DftOptions dopts;
        dopts.in_port_values = c.in_port_domain;
        const auto dft = check_dft(c.base, dopts);
        if (!dft.passed()) {
            auto detail = dft_report_to_json(dft);
            detail["component"] = i + 1;
            throw Error(ErrorCode::DftFailure,
                        "component " + std::to_string(i + 1) +
                            " fails the design-for-test conditions",
                        detail);
        }
    }
    const Sxm product = build_product_sxm(ext, options);
    const auto conflicts = product_conflicts(product);
    if (!conflicts.empty()) {
        const auto& c = conflicts.front();
        nlohmann::json detail = {{"state", c.state}, {"label", c.label1}};
        if (!c.label2.empty())
            detail["label2"] = c.label2;
        if (c.input.is_sequence()) {
            detail["memory"] = value_to_json(c.memory);
            detail["input"] = value_to_json(c.input);
        }
        throw Error(ErrorCode::NondeterministicProduct,
                    "product is nondeterministic at state " + c.state + " (" + c.label1 +
                        (c.label2.empty() ? "" : " / " + c.label2) + ")",
                    detail);
    }
    TestSuite suite = build_w_suite(product, k);
    suite.metadata["subject"] = "product";
    suite.metadata["comm_symbol"] = value_to_json(ext.comm_symbol);
    auto comps = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < ext.components.size(); ++i) {
        const auto& c = ext.components[i];
        nlohmann::ordered_json cj;
        cj["index"] = i + 1;
        cj["tuple_position"] = i;
        cj["communicating_outputs"] = nlohmann::ordered_json::array();
        for (const auto& f : c.communicating_functions)
            cj["communicating_outputs"].push_back(
                {{"function", f},
                 {"output", comm_output(i + 1, c.communicating_position(f)).as_atom()}});
        comps.push_back(std::move(cj));
    }
    suite.metadata["components"] = comps;
    suite.metadata["product_states"] = product.states.size();
    suite.metadata["product_memory_sample"] = product.memory_domain.enumerate().size();
    return suite;
}

std::vector<std::vector<Value>> replay_on_system(const CsxmSystem& sys,
                                                 const std::vector<Value>& input)
{
    const std::size_t n = sys.components.size();
    std::set<std::pair<SystemConfiguration, std::vector<Value>>> frontier;
    frontier.insert({initial_system_configuration(sys), {}});
    for (const auto& tuple : input) {
        if (!tuple.is_sequence() || tuple.as_sequence().size() != n)
            return {};
        std::size_t idx = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (!tuple.as_sequence()[i].is_lambda()) {
                if (idx != n)
                    return {};
                idx = i;
            }
        }
        if (idx == n)
            return {};
        const Value& sym = tuple.as_sequence()[idx];
        std::set<std::pair<SystemConfiguration, std::vector<Value>>> next;
        for (const auto& [cfg, outs] : frontier) {
            auto fed = cfg;
            fed[idx].remaining_input = {sym};
            for (auto& tr : system_transitions(sys, fed)) {
                if (tr.component != idx + 1)
                    continue;
                bool ok = tr.kind == SystemTransition::Kind::Ordinary
                              ? tr.input == sym
                              : sym == sys.comm_symbol;
                if (!ok)
                    continue;
                auto succ = tr.successor;
                succ[idx].remaining_input.clear();
                auto o = outs;
                o.push_back(lambda_tuple(n, idx, tr.output));
                next.insert({std::move(succ), std::move(o)});
            }
        }
        frontier = std::move(next);
    }
    std::set<std::vector<Value>> results;
    for (const auto& [cfg, outs] : frontier) {
        bool terminal = true;
        for (std::size_t i = 0; i < n; ++i)
            terminal = terminal && sys.components[i].base.is_terminal(cfg[i].state);
        if (terminal)
            results.insert(outs);
    }
    return {results.begin(), results.end()};
}

nlohmann::json product_to_json(const Sxm& product, std::size_t max_rows)
{
    Sxm literal = product;
    std::size_t rows_total = 0;
    const auto memories = product.memory_domain.enumerate();
    for (auto& f : literal.functions) {
        std::vector<Case> rows;
        for (const auto& m : memories) {
            for (const auto& in : product.inputs) {
                for (const auto& e : f.apply(m, in)) {
                    Case c;
                    c.memory = Pattern::literal(m);
                    c.input = Pattern::literal(in);
                    c.output = Term::literal(e.output);
                    c.memory_next = Term::literal(e.memory);
                    rows.push_back(std::move(c));
                    if (++rows_total > max_rows)
                        throw Error(ErrorCode::ExplosionBound,
                                    "product serialisation exceeds " + std::to_string(max_rows) +
                                        " case rows");
                }
            }
        }
        f = ProcessingFunction(f.name(), std::make_shared<CaseTable>(std::move(rows)));
    }
    return sxm_to_json(literal);
}

}  // namespace heterotest
