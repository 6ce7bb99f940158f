// Copyright 2026 The tovd authors
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

#ifndef TOVD_CLI_HPP
#define TOVD_CLI_HPP

namespace tovd {

// Subcommands: stats, train, eval, influence, cleanse, sweep, gradcheck,
// synth. Exit codes: 0 success, 2 input error, 3 training error,
// 4 contract error, 5 verification failure.
int cli_main(int argc, char** argv);

}  // namespace tovd

#endif  // TOVD_CLI_HPP
