#pragma once

#include "hyreach/scenario.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace hyreach {

/// Base scenario of the method comparison: unsynced chain only and no step
/// refinement, so every method sees the same coarse step.
Scenario comparisonBase();

/// One grid cell per (method, mass, speed), method-major.
std::vector<GridCell> compareMethods(const Scenario& base, const std::vector<double>& masses,
                                     const std::vector<double>& speeds, const std::vector<IntersectionMethod>& methods);

/// Measures of the second and third intersection (x 1e3) per case and method,
/// with a failed flag per method.
void writeMeasureTable(std::ostream& out, const std::vector<GridCell>& cells,
                       const std::vector<IntersectionMethod>& methods);

/// Mean intersection wall time per method for the second and third
/// intersection, over the cases where every method that completes anywhere completed.
void writeTimeTable(std::ostream& out, const std::vector<GridCell>& cells,
                    const std::vector<IntersectionMethod>& methods);

struct KernelTiming {
    std::string kernel;
    int threads = 1;
    double parallelSeconds = 0.0;
    double serialSeconds = 0.0;
    bool identical = false;  // parallel and serial outputs agree exactly
};

/// Times the containment sampler and the grid runner against their serial
/// references on the given case and grid.
std::vector<KernelTiming> timeKernels(const Scenario& scenario, int samples, const std::vector<double>& masses,
                                      const std::vector<double>& speeds);
void writeKernelTable(std::ostream& out, const std::vector<KernelTiming>& rows);

/// Writes measures.csv, times.csv and kernels.csv into dir.
struct BenchConfig {
    std::vector<double> masses = kGridMasses;
    std::vector<double> speeds = kGridSpeeds;
    std::vector<IntersectionMethod> methods{IntersectionMethod::Geometric, IntersectionMethod::Mapping,
                                            IntersectionMethod::Scaling, IntersectionMethod::Tsm,
                                            IntersectionMethod::Trinal};
    int kernelSamples = 200;
    double kernelMass = 4.5;
    double kernelSpeed = 0.55;
    std::vector<double> kernelMasses{4.5, 8.0};
    std::vector<double> kernelSpeeds{0.35, 0.45, 0.55};
};
void runBench(const BenchConfig& config, const std::string& dir, std::ostream* log = nullptr);

}  // namespace hyreach
