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

#include "heterotest/error.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace heterotest {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 1,  // validation or DFT failure
    kExitGeneration = 2,  // nondeterministic product, explosion bound, ...
    kExitIo = 3,          // I/O, parse or usage error
};

int exit_code_for(ErrorCode code);

/// Runs one invocation; `args` excludes the program name. `self` is the
/// path of the running binary (used for the built-in oracle).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::string& self = "/proc/self/exe");

}  // namespace heterotest
