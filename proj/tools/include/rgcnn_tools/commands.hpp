// Copyright 2026 The rgcnn Authors
// SPDX-License-Identifier: Apache-2.0
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

// Command-line front end. Each command reads its inputs from files, writes
// results to the given streams, and maps library errors to exit codes.

#ifndef RGCNN_TOOLS_COMMANDS_HPP_
#define RGCNN_TOOLS_COMMANDS_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace rgcnn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;    // numerical breakdown or unexpected error
inline constexpr int kExitContract = 2;   // bad arguments or violated preconditions
inline constexpr int kExitIo = 3;         // unreadable, unwritable or malformed files

// Verbosity from RGCNN_LOG: "quiet" (0), "info" (1, default) or "debug" (2).
int log_level_from_env();

// Keeps freed n x n buffers inside the process instead of returning them to
// the kernel after every forward pass. A no-op outside glibc.
void tune_allocator();

// Runs the tool with `args` excluding the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rgcnn::cli

#endif  // RGCNN_TOOLS_COMMANDS_HPP_
