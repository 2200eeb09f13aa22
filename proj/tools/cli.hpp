// Copyright 2026 The DPPF Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPPF_TOOLS_CLI_HPP_
#define DPPF_TOOLS_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

#include "dppf/errors.hpp"

namespace dppf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitNoConvergence = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitData = 65;

int ExitCodeFor(ErrorCode code);

// args excludes the program name.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dppf::cli

#endif  // DPPF_TOOLS_CLI_HPP_
