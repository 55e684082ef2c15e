// Copyright (c) 2026 The unifyspeech-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UNIFYSPEECH_TOOLS_CLI_H_
#define UNIFYSPEECH_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace unifyspeech::cli {

// Runs one uspc invocation. argv[0] is the program name. Returns the process
// exit code: 0 on success, 2 on usage errors, 1 on runtime failures.
int RunCli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace unifyspeech::cli

#endif  // UNIFYSPEECH_TOOLS_CLI_H_
