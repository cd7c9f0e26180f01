#pragma once

namespace curvelab {

// Entry point of the `curvelab` command line tool. Exit codes: 0 success,
// 1 runtime failure, 2 configuration error, 3 failed acceptance guard under --check.
int cli_main(int argc, char** argv);

}  // namespace curvelab
