// Copyright (c) 2026 The emovc Authors
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

#ifndef EMOVC_CLI_H_
#define EMOVC_CLI_H_

#include <string>
#include <vector>

namespace emovc::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitRuntime = 1,
  kExitUsage = 2,   // unknown subcommand or flag, missing argument
  kExitConfig = 3,  // invalid configuration
};

// Parses and runs one subcommand. Errors are reported on stderr.
int Dispatch(int argc, const char* const* argv);
// Same, for arguments that exclude the program name.
int Dispatch(const std::vector<std::string>& args);

// Where the provenance record of an output lands: `<dir>/run.json` for a
// directory output, `<file>.run.json` for a file output.
std::string ProvenancePath(const std::string& out, bool out_is_dir);

}  // namespace emovc::cli

#endif  // EMOVC_CLI_H_
