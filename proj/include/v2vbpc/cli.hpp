// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace v2vbpc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;      // config, input file or IO problem
inline constexpr int kExitNumerical = 3;  // numerical failure or failed verification

/// Entry point for the `v2vbpc` executable: run | sweep | calibrate.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace v2vbpc
