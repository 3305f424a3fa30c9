#include "loopscope/kernels.hpp"

#include <omp.h>

#include <exception>
#include <vector>

#include "loopscope/error.hpp"

namespace loopscope::kernels {

namespace {

DrivingPointTable make_table(std::size_t rows, std::size_t freqs) {
  DrivingPointTable t;
  t.n_rows = rows;
  t.n_freq = freqs;
  t.samples.resize(rows * freqs);
  t.failures.resize(freqs);
  return t;
}

// Samples for one frequency are strided by n_freq in the table.
void evaluate_into(const mna::MnaPattern& pattern, double omega, std::span<const std::size_t> rows,
                   const mna::AssemblyOptions& options, DrivingPointTable& t, std::size_t fi) {
  std::vector<DrivingPointSample> local(rows.size());
  t.failures[fi] = evaluate_frequency(pattern, omega, rows, options, local);
  for (std::size_t s = 0; s < rows.size(); ++s) t.samples[s * t.n_freq + fi] = local[s];
}

}  // namespace

std::string evaluate_frequency(const mna::MnaPattern& pattern, double omega, std::span<const std::size_t> rows,
                               const mna::AssemblyOptions& options, std::span<DrivingPointSample> out) {
  try {
    const auto y = mna::assemble_matrix(pattern, omega, options);
    const linalg::LuFactorization lu(y, pattern.unknown_names);
    std::vector<mna::Complex> b(pattern.dim);
    for (std::size_t s = 0; s < rows.size(); ++s) {
      b[rows[s]] = 1.0;
      auto sol = mna::solve(lu, y, b);
      b[rows[s]] = 0.0;
      out[s] = {sol.x[rows[s]], linalg::norm_inf(sol.x)};
    }
    return {};
  } catch (const SingularSystemError& e) {
    return e.unknown().empty() ? "unknown " + std::to_string(e.pivot()) : e.unknown();
  }
}

DrivingPointTable driving_points_serial(const mna::MnaPattern& pattern, std::span<const double> omegas,
                                        std::span<const std::size_t> rows, const mna::AssemblyOptions& options) {
  auto t = make_table(rows.size(), omegas.size());
  for (std::size_t fi = 0; fi < omegas.size(); ++fi) evaluate_into(pattern, omegas[fi], rows, options, t, fi);
  return t;
}

DrivingPointTable driving_points_parallel(const mna::MnaPattern& pattern, std::span<const double> omegas,
                                          std::span<const std::size_t> rows, const mna::AssemblyOptions& options,
                                          int jobs) {
  auto t = make_table(rows.size(), omegas.size());
  const auto n = static_cast<std::ptrdiff_t>(omegas.size());
  const int threads = jobs > 0 ? jobs : default_jobs();
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 4) num_threads(threads)
  for (std::ptrdiff_t fi = 0; fi < n; ++fi) {
    try {
      evaluate_into(pattern, omegas[static_cast<std::size_t>(fi)], rows, options, t, static_cast<std::size_t>(fi));
    } catch (...) {
#pragma omp critical(loopscope_kernel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return t;
}

int default_jobs() { return omp_get_max_threads(); }

}  // namespace loopscope::kernels
