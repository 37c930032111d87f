#include <benchmark/benchmark.h>

// The distro's libbenchmark_main.a ships slim-LTO bytecode from an older
// compiler and cannot be linked here, so the entry point lives in-tree.
BENCHMARK_MAIN();
