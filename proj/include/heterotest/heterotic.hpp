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

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace heterotest {

/// Input symbols of the wrapped Base. The driver only feeds `tick`;
/// `flush` is a design-for-test probe.
inline const char* const kTick = "tick";
inline const char* const kFlush = "flush";

struct WrapOptions {
    std::size_t depth_cap = 100;
    std::uint64_t seed = 0;
    RunMode mode = RunMode::SingleSeeded;
    /// Configurations Control may send back (the Base in-port domain).
    std::vector<PConfiguration> restarts;
};

/// CSXM with states exec / send / wait simulating `ps`. Throws
/// DepthCapExceeded when some sampled start does not halt within the cap.
Csxm wrap_psystem_as_csxm(const PSystem& ps, const WrapOptions& options);

struct HeteroticSystem {
    PSystem psystem;
    WrapOptions wrap;
    Csxm base;
    Csxm control;
    CsxmSystem as_system;  // components: base (1), control (2)
};

/// Wraps `ps` and pairs it with `control`; throws PortIncompatibility.
HeteroticSystem build_heterotic_system(const PSystem& ps, const Csxm& control,
                                       const WrapOptions& options);

/// Loads a heterotic system file: {"psystem", "control", "seed", "depth_cap", "mode"}.
/// Paths are resolved against `base_dir`; inline objects are accepted too.
HeteroticSystem load_heterotic(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// External executor: one JSON request line in, one JSON response line out.
struct OracleBinding {
    std::vector<std::string> argv;
    int timeout_ms = 5000;
    int retries = 0;
};

struct OracleResult {
    PConfiguration final;
    std::size_t steps = 0;
};

/// Runs the oracle once per attempt; throws OracleTimeout or OracleInvalidResult.
OracleResult call_oracle(const OracleBinding& oracle, const PSystem& ps,
                         const PConfiguration& initial);

/// Serves oracle requests on the given streams using the built-in simulator.
void serve_oracle(const PSystem& ps, std::uint64_t seed, std::size_t depth_cap, std::istream& in,
                  std::ostream& out);

struct Exchange {
    std::size_t index = 0;
    std::size_t round = 0;
    bool base_to_control = true;
    PConfiguration configuration;
    std::size_t base_steps = 0;
};

struct HeteroticTrace {
    std::uint64_t seed = 0;
    std::string mode;
    std::size_t rounds = 0;
    std::vector<Exchange> exchanges;
    SystemConfiguration final;
};

HeteroticTrace run_heterotic(const HeteroticSystem& h, std::size_t rounds,
                             const std::optional<OracleBinding>& oracle = std::nullopt);

nlohmann::ordered_json heterotic_trace_to_json(const HeteroticSystem& h, const HeteroticTrace& t);
std::string render_heterotic_trace(const HeteroticSystem& h, const HeteroticTrace& t);

TestSuite generate_integration_tests(const HeteroticSystem& h, std::size_t k);

}  // namespace heterotest
