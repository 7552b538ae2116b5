#pragma once

// Entry point shared by the qctf_cli binary and its tests. Exit codes:
// 0 success, 2 usage error, 3 numeric-contract violation, 1 anything else.
int run_cli(int argc, char** argv);
