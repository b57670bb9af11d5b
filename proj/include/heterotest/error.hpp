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

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace heterotest {

enum class ErrorCode {
    Parse,
    Io,
    InvalidModel,
    BranchBoundExceeded,
    MissingSample,
    NondeterministicInput,
    UnreachableState,
    NotMinimal,
    DftFailure,
    NondeterministicAutomaton,
    AlphabetCollision,
    UnextendedSystem,
    NondeterministicProduct,
    ExplosionBound,
    TraceReplayMismatch,
    DepthCapExceeded,
    PortIncompatibility,
    OracleTimeout,
    OracleInvalidResult,
    Deadlock,
    NoValidMutants,
    EmptyMutantSet,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library. `detail` carries the structured
/// payload (partial frontier, DFT report, conflicting state, ...).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::json detail = nullptr)
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    nlohmann::json detail_;
};

}  // namespace heterotest
