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

#include <optional>
#include <string>
#include <vector>

namespace heterotest {

struct DeterminismWitness {
    enum class Kind {
        InitialStates,   // |I| != 1
        AutomatonBranch, // F(state, function1) has several targets
        DomainOverlap,   // function1 and function2 both defined at (memory, input)
    };
    Kind kind = Kind::DomainOverlap;
    std::string state;
    std::string function1;
    std::string function2;
    Value memory;
    Value input;
    Value in_port = Value::nomem();
    std::vector<std::string> targets;
};

struct CompletenessEntry {
    std::string function;
    bool pass = true;
    std::optional<Value> witness_memory;  // a memory no input can fire from
};

struct DistinguishabilityWitness {
    std::string function1;
    std::string function2;
    Value memory;
    Value memory1;
    Value memory2;
    Value input;
    Value in_port = Value::nomem();
    Value output;
};

/// Outcome of the three design-for-test conditions. Passes over a sampled
/// (non-exhaustive) domain mean only that no violation was found.
struct DftReport {
    bool deterministic = true;
    std::vector<DeterminismWitness> determinism;
    std::vector<CompletenessEntry> completeness;  // one per function, by name
    bool output_distinguishable = true;
    std::vector<DistinguishabilityWitness> distinguishability;
    bool exhaustive = true;
    std::size_t memory_values = 0;

    bool complete() const;
    bool passed() const { return deterministic && complete() && output_distinguishable; }
};

struct DftOptions {
    /// Port values paired with every input symbol, in addition to ⊥M.
    std::vector<Value> in_port_values;
};

/// Enumerates (memory domain or sample) x inputs. Throws MissingSample for
/// an open memory domain without a sample.
DftReport check_dft(const Sxm& model, const DftOptions& options = {});

/// Replays a witness through the function bodies; true iff it is a
/// genuine violation.
bool replay_witness(const Sxm& model, const DeterminismWitness& w);
bool replay_witness(const Sxm& model, const CompletenessEntry& e,
                    const DftOptions& options = {});
bool replay_witness(const Sxm& model, const DistinguishabilityWitness& w);

nlohmann::json dft_report_to_json(const DftReport& report);
std::string render_dft_report(const DftReport& report);

}  // namespace heterotest
