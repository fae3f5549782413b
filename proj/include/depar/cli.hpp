// Copyright 2026 The depar Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEPAR_CLI_HPP_
#define DEPAR_CLI_HPP_

#include <ostream>

namespace depar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDiagnostics = 1;
inline constexpr int kExitUsage = 2;

// Runs one command. Reports go to out, diagnostics and usage errors to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace depar::cli

#endif  // DEPAR_CLI_HPP_
