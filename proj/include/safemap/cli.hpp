#pragma once

namespace safemap {

/// Entry point of the safemap command line tool. Exit codes: 0 ok,
/// 2 configuration error, 3 episode abort.
int run_cli(int argc, char** argv);

}  // namespace safemap
