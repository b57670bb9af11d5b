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

#include "heterotest/term.hpp"
#include "heterotest/value.hpp"

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace heterotest {

/// Result of applying a processing function once.
struct Effect {
    Value output;
    Value memory;
    std::optional<Value> out_port;  // nullopt: out-port left unchanged

    friend auto operator<=>(const Effect&, const Effect&) = default;
};

/// Behaviour of a processing function: memory x input ⇸ output x memory.
///
/// `in_port` is ⊥M when the function ignores the port and the port value
/// otherwise; bodies that never look at ports simply require ⊥M. A body
/// may return several effects, in which case the function is not a
/// function and any machine using it is nondeterministic.
class FunctionBody {
public:
    virtual ~FunctionBody() = default;
    virtual std::vector<Effect> apply(const Value& memory, const Value& input,
                                      const Value& in_port) const = 0;
};

/// One row of a case table.
struct Case {
    Pattern memory = Pattern::wildcard();
    Pattern input = Pattern::wildcard();
    std::optional<Pattern> in_port;  // absent: the row sees ⊥M (ignores the port)
    std::optional<Term> guard;
    std::optional<Term> output;      // absent: λ
    std::optional<Term> memory_next;  // absent: memory unchanged
    std::optional<Term> out_port;

    friend bool operator==(const Case&, const Case&) = default;
};

class CaseTable final : public FunctionBody {
public:
    explicit CaseTable(std::vector<Case> cases) : cases_(std::move(cases)) {}

    const std::vector<Case>& cases() const { return cases_; }

    std::vector<Effect> apply(const Value& memory, const Value& input,
                              const Value& in_port) const override;

    /// Indices of rows whose patterns and guard accept the arguments.
    std::vector<std::size_t> matching_rows(const Value& memory, const Value& input,
                                           const Value& in_port) const;

    /// Evaluates one row; nullopt if it does not match or fails to evaluate.
    std::optional<Effect> apply_row(std::size_t row, const Value& memory, const Value& input,
                                    const Value& in_port) const;

private:
    std::vector<Case> cases_;
};

class ProcessingFunction {
public:
    ProcessingFunction() = default;
    ProcessingFunction(std::string name, std::shared_ptr<const FunctionBody> body,
                       std::optional<int> target = std::nullopt)
        : name_(std::move(name)), body_(std::move(body)), target_(target) {}

    const std::string& name() const { return name_; }
    /// Receiving component (1-based) of a communicating function.
    std::optional<int> target() const { return target_; }
    const std::shared_ptr<const FunctionBody>& body() const { return body_; }
    /// nullptr when the body is not a case table.
    const CaseTable* case_table() const { return dynamic_cast<const CaseTable*>(body_.get()); }

    std::vector<Effect> apply(const Value& memory, const Value& input,
                              const Value& in_port = Value::nomem()) const
    {
        return body_->apply(memory, input, in_port);
    }

private:
    std::string name_;
    std::shared_ptr<const FunctionBody> body_;
    std::optional<int> target_;
};

bool structurally_equal(const ProcessingFunction& a, const ProcessingFunction& b);

class MemoryDomain {
public:
    enum class Kind { Values, Range, Open };

    MemoryDomain() = default;
    static MemoryDomain values(std::vector<Value> vs);
    static MemoryDomain range(std::int64_t lo, std::int64_t hi);
    static MemoryDomain open(std::vector<Value> sample);

    Kind kind() const { return kind_; }
    /// Values and ranges are enumerated fully; open domains only by sample.
    bool exhaustive() const { return kind_ != Kind::Open; }
    bool has_sample() const { return kind_ != Kind::Open || !values_.empty(); }
    std::int64_t lo() const { return lo_; }
    std::int64_t hi() const { return hi_; }

    /// Every declared value, or the sample of an open domain; sorted.
    std::vector<Value> enumerate() const;
    /// Declared membership; open domains accept everything.
    bool contains(const Value& v) const;

    friend bool operator==(const MemoryDomain&, const MemoryDomain&) = default;

private:
    Kind kind_ = Kind::Values;
    std::vector<Value> values_;
    std::int64_t lo_ = 0;
    std::int64_t hi_ = -1;
};

/// Stream X-machine (Σ, Γ, Q, M, Φ, I, T, m₀, F).
struct Sxm {
    std::vector<Value> inputs;   // sorted, unique
    std::vector<Value> outputs;  // sorted, unique
    std::vector<std::string> states;
    std::vector<std::string> initial_states;
    std::vector<std::string> terminal_states;
    MemoryDomain memory_domain;
    Value initial_memory;
    std::vector<ProcessingFunction> functions;
    /// (state, function name) -> target states, sorted.
    std::map<std::pair<std::string, std::string>, std::vector<std::string>> next_state;

    const ProcessingFunction* function(const std::string& name) const;
    bool is_terminal(const std::string& state) const;
    bool has_state(const std::string& state) const;
    /// Functions labelling some next_state entry leaving `state`, by name.
    std::vector<std::string> functions_at(const std::string& state) const;
};

bool structurally_equal(const Sxm& a, const Sxm& b);

struct SxmConfiguration {
    Value memory;
    std::string state;
    std::vector<Value> remaining_input;
    std::vector<Value> output;

    friend auto operator<=>(const SxmConfiguration&, const SxmConfiguration&) = default;
    friend bool operator==(const SxmConfiguration&, const SxmConfiguration&) = default;
};

struct Arc {
    std::string from;
    std::string label;
    std::string to;

    friend auto operator<=>(const Arc&, const Arc&) = default;
};

struct Automaton {
    std::vector<std::string> states;
    std::vector<std::string> initial_states;
    std::vector<std::string> terminal_states;
    std::vector<Arc> arcs;  // sorted

    /// Sorted distinct arc labels.
    std::vector<std::string> labels() const;
    bool is_deterministic() const;
    bool is_terminal(const std::string& state) const;
    /// Target of the unique `label` arc from `state`, if any.
    std::optional<std::string> successor(const std::string& state, const std::string& label) const;
};

struct Violation {
    std::string location;
    std::string message;

    friend auto operator<=>(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

struct SxmValidationOptions {
    /// Allow in_port/out_port rows and function targets (CSXM components).
    bool allow_ports = false;
    /// Extra input-port values to enumerate when checking row overlap.
    std::vector<Value> in_port_values;
};

ValidationReport validate_sxm(const Sxm& model, const SxmValidationOptions& options = {});

/// All configurations reachable in one configuration change.
std::vector<SxmConfiguration> sxm_step(const Sxm& model, const SxmConfiguration& cfg);

SxmConfiguration initial_configuration(const Sxm& model, const std::string& initial_state,
                                       std::vector<Value> input);

struct RunResult {
    std::vector<Value> output;
    SxmConfiguration final_configuration;

    friend auto operator<=>(const RunResult&, const RunResult&) = default;
    friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Relation computed by the machine on one input: every (output, final
/// configuration) reachable from an initial configuration. Throws
/// BranchBoundExceeded when more than `branch_bound` configurations are
/// live at once; the error detail holds the frontier.
std::vector<RunResult> sxm_run(const Sxm& model, const std::vector<Value>& input,
                               std::size_t branch_bound = 1024);

/// Distinct output sequences of sxm_run.
std::vector<std::vector<Value>> sxm_outputs(const Sxm& model, const std::vector<Value>& input,
                                            std::size_t branch_bound = 1024);

Automaton associated_automaton(const Sxm& model);

}  // namespace heterotest
