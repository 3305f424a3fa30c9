#pragma once

// Driving-point kernels: for every angular frequency, factor Y(w) once and
// solve Y x = e_k for each requested node row k (1 A injected at that node).
//
// The serial and OpenMP variants call the same per-frequency routine and
// write disjoint output slots, so their results are bitwise identical.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "loopscope/mna.hpp"

namespace loopscope::kernels {

struct DrivingPointSample {
  mna::Complex v;     // node voltage for 1 A injection
  double scale = 0.;  // ||x||inf of the same solve
};

struct DrivingPointTable {
  std::size_t n_rows = 0;
  std::size_t n_freq = 0;
  std::vector<DrivingPointSample> samples;   // [row slot][frequency]
  std::vector<std::string> failures;         // per frequency; empty = solved

  const DrivingPointSample& at(std::size_t slot, std::size_t freq) const { return samples[slot * n_freq + freq]; }
  bool failed(std::size_t freq) const { return !failures[freq].empty(); }
};

// Solves one frequency into `out` (one sample per row). Returns the name of
// the singular unknown, or an empty string on success.
std::string evaluate_frequency(const mna::MnaPattern& pattern, double omega, std::span<const std::size_t> rows,
                               const mna::AssemblyOptions& options, std::span<DrivingPointSample> out);

DrivingPointTable driving_points_serial(const mna::MnaPattern& pattern, std::span<const double> omegas,
                                        std::span<const std::size_t> rows, const mna::AssemblyOptions& options);

// jobs <= 0 uses the OpenMP default team size.
DrivingPointTable driving_points_parallel(const mna::MnaPattern& pattern, std::span<const double> omegas,
                                          std::span<const std::size_t> rows, const mna::AssemblyOptions& options,
                                          int jobs = 0);

int default_jobs();

}  // namespace loopscope::kernels
