// Method comparison tables and parallel-vs-serial kernel timings.
#include "hyreach/bench.hpp"

#include <CLI11.hpp>

#include <exception>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

int main(int argc, char** argv) {
    CLI::App app{"hyreach benchmark: intersection methods and OpenMP kernels against their serial references"};
    std::string out = "bench_out";
    bool quick = false;
    hyreach::BenchConfig config;
    app.add_option("--out", out, "output directory")->capture_default_str();
    app.add_option("--samples", config.kernelSamples, "containment samples in the kernel timing")->capture_default_str();
    app.add_flag("--quick", quick, "two comparison cases and a small kernel grid");
    CLI11_PARSE(app, argc, argv);

    if (quick) {
        config.masses = {4.5, 8.0};
        config.speeds = {0.55};
        config.kernelSamples = std::min(config.kernelSamples, 50);
        config.kernelMasses = {4.5, 8.0};
        config.kernelSpeeds = {0.45, 0.55};
    }
    try {
#ifdef _OPENMP
        std::cout << "threads " << omp_get_max_threads() << '\n';
#endif
        hyreach::runBench(config, out, &std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
