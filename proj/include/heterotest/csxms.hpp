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

#include "heterotest/fsm_testing.hpp"
#include "heterotest/sxm.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace heterotest {

/// SXM with one input port and one output port.
struct Csxm {
    Sxm base;
    std::vector<Value> in_port_domain;   // sorted, excludes ⊥M
    std::vector<Value> out_port_domain;  // sorted, excludes ⊥M
    std::vector<std::string> ordinary_states;
    std::vector<std::string> communicating_states;
    std::vector<std::string> ordinary_functions;
    std::vector<std::string> communicating_functions;
    /// Set by extend_for_testing.
    bool extended = false;

    bool is_communicating_state(const std::string& q) const;
    bool is_communicating_function(const std::string& f) const;
    /// 1-based position among the communicating functions, 0 if not one.
    std::size_t communicating_position(const std::string& f) const;
};

struct CsxmSystem {
    std::vector<Csxm> components;
    /// Extra input symbol consumed by extended communicating functions.
    Value comm_symbol = Value::atom("a");
};

bool structurally_equal(const Csxm& a, const Csxm& b);
bool structurally_equal(const CsxmSystem& a, const CsxmSystem& b);

/// Output atom [i,j] of the j-th communicating function of component i.
Value comm_output(std::size_t component, std::size_t position);

struct ComponentConfiguration {
    Value memory;
    std::string state;
    std::vector<Value> remaining_input;
    std::vector<Value> output;
    Value in_port = Value::nomem();
    Value out_port = Value::nomem();

    friend auto operator<=>(const ComponentConfiguration&, const ComponentConfiguration&) = default;
    friend bool operator==(const ComponentConfiguration&, const ComponentConfiguration&) = default;
};

using SystemConfiguration = std::vector<ComponentConfiguration>;

struct SystemTransition {
    enum class Kind { Ordinary, Communicating };
    Kind kind = Kind::Ordinary;
    std::size_t component = 0;  // 1-based
    std::string function;
    std::size_t target = 0;     // receiving component of a communicating change
    Value input;                // consumed symbol (ordinary) or the comm symbol
    Value output;               // emitted symbol (ordinary) or λ / [i,j]
    bool consumed_port = false;
    SystemConfiguration successor;

    friend auto operator<=>(const SystemTransition&, const SystemTransition&) = default;
    friend bool operator==(const SystemTransition&, const SystemTransition&) = default;
};

ValidationReport validate_csxm(const Csxm& c, std::size_t index, std::size_t system_size);
ValidationReport validate_system(const CsxmSystem& sys);

/// Ports empty, first initial state, given input streams (may be empty).
SystemConfiguration initial_system_configuration(const CsxmSystem& sys,
                                                 std::vector<std::vector<Value>> inputs = {});

/// Every labelled one-step change, sorted by component then function.
std::vector<SystemTransition> system_transitions(const CsxmSystem& sys,
                                                 const SystemConfiguration& cfg);
/// Distinct successor configurations.
std::vector<SystemConfiguration> system_step(const CsxmSystem& sys,
                                             const SystemConfiguration& cfg);

CsxmSystem extend_for_testing(const CsxmSystem& sys);

/// Caps the reachable-configuration scan used to sample the product memory.
struct ProductOptions {
    std::size_t max_configurations = 20000;
};

Sxm build_product_sxm(const CsxmSystem& sys, const ProductOptions& options = {});

std::string tuple_name(const std::vector<std::string>& parts);
/// Product label with `function` at `component` (1-based) and id_j elsewhere.
std::string product_label(std::size_t n, std::size_t component, const std::string& function);
/// Product memory value of a system configuration (streams dropped).
Value product_memory(const SystemConfiguration& cfg);
std::string product_state(const SystemConfiguration& cfg);

/// Conflict found while scanning the product for nondeterminism.
struct ProductConflict {
    std::string state;
    std::string label1;
    std::string label2;  // empty when one label has several results
    Value memory;
    Value input;
};

std::vector<ProductConflict> product_conflicts(const Sxm& product);

/// Test-suite generation for the system's product; components are DFT-gated.
TestSuite generate_csxms_test_suite(const CsxmSystem& sys, std::size_t k,
                                    const ProductOptions& options = {});

/// Replays a product-suite case on the system. Returns the output tuples
/// of every run that consumes the whole case and ends in terminal states.
std::vector<std::vector<Value>> replay_on_system(const CsxmSystem& sys,
                                                 const std::vector<Value>& input);

/// Serialises the product as case tables over its sampled memory.
nlohmann::json product_to_json(const Sxm& product, std::size_t max_rows = 200000);

}  // namespace heterotest
