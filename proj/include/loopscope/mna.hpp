#pragma once

// Complex Modified Nodal Analysis: Y(w) x = b.
//
// Unknowns are the non-ground node voltages (row = node index - 1) followed
// by branch currents of voltage-defined elements (V, E, H, and L in branch
// form). Branch current flows from n+ through the element to n-.

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "loopscope/linalg.hpp"
#include "loopscope/netlist.hpp"

namespace loopscope::mna {

using linalg::Complex;
using linalg::ComplexMatrix;

enum class StampRole {
  Conductance,         // coeff
  Capacitance,         // j w coeff
  InductorBranch,      // -j w coeff on the branch diagonal
  InductorAdmittance,  // coeff / (j w)
  Incidence,           // coeff (+-1)
  Gain,                // coeff (signed gain)
};

enum class InductorForm { Branch, Admittance };

struct Stamp {
  std::size_t row = 0;
  std::size_t col = 0;
  double coeff = 0.0;
  StampRole role = StampRole::Conductance;
  std::size_t element = 0;
};

struct MnaPattern {
  std::size_t n_nodes = 0;
  std::size_t n_branches = 0;
  std::size_t dim = 0;
  std::map<std::size_t, std::size_t> branch_map;  // element index -> row
  std::vector<Stamp> stamps;
  // "V(node)" rows use the bare node name; branch rows are "I(element)".
  std::vector<std::string> unknown_names;
  InductorForm inductor_form = InductorForm::Branch;

  static std::size_t node_row(std::size_t node_index) { return node_index - 1; }
};

MnaPattern build_pattern(const netlist::Netlist& net, InductorForm inductor_form = InductorForm::Branch);

// 1 A (by default) flowing from ground into `node`. Independent sources are
// auto-zeroed: V sources become shorts, I sources opens.
struct NodeInjection {
  std::string node;
  double current = 1.0;
};

// Drive the circuit with the independent sources' own AC values instead.
struct SourceDrive {};

using InjectionSpec = std::variant<NodeInjection, SourceDrive>;

inline constexpr double kDefaultGmin = 1e-12;

struct AssemblyOptions {
  double gmin = kDefaultGmin;
};

struct MnaSystem {
  ComplexMatrix y;
  std::vector<Complex> b;
};

// Source-free matrix at angular frequency `omega`, gmin included.
ComplexMatrix assemble_matrix(const MnaPattern& pattern, double omega, const AssemblyOptions& options = {});

MnaSystem assemble(const MnaPattern& pattern, const netlist::Netlist& net, double omega, const InjectionSpec& rhs,
                   const AssemblyOptions& options = {});

struct ComplexSolution {
  std::vector<Complex> x;
  double omega = 0.0;
  double residual = 0.0;  // ||Y x - b||inf
};

// LU with partial pivoting plus up to two steps of iterative refinement when
// the residual exceeds 1e-9 ||b||inf.
ComplexSolution solve(const ComplexMatrix& y, std::span<const Complex> b,
                      std::span<const std::string> unknown_names = {});

// Same, reusing an existing factorization of `y`.
ComplexSolution solve(const linalg::LuFactorization& lu, const ComplexMatrix& y, std::span<const Complex> b);

}  // namespace loopscope::mna
