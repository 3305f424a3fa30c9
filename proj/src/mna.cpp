#include "loopscope/mna.hpp"

#include <cmath>
#include <numbers>
#include <optional>

#include "loopscope/error.hpp"

namespace loopscope::mna {

using netlist::ElementKind;

namespace {

class PatternBuilder {
 public:
  explicit PatternBuilder(MnaPattern& p) : p_(p) {}

  // Node index 0 is ground and has no row.
  static std::optional<std::size_t> row_of(std::size_t node) {
    if (node == netlist::NodeTable::ground) return std::nullopt;
    return MnaPattern::node_row(node);
  }

  void add(std::optional<std::size_t> r, std::optional<std::size_t> c, double coeff, StampRole role,
           std::size_t element) {
    if (r && c) p_.stamps.push_back({*r, *c, coeff, role, element});
  }

  // Symmetric two-terminal admittance-type stamp.
  void two_terminal(std::size_t a, std::size_t b, double coeff, StampRole role, std::size_t element) {
    add(row_of(a), row_of(a), coeff, role, element);
    add(row_of(b), row_of(b), coeff, role, element);
    add(row_of(a), row_of(b), -coeff, role, element);
    add(row_of(b), row_of(a), -coeff, role, element);
  }

  // KCL coupling of a branch current plus the V(a) - V(b) part of its equation.
  void incidence(std::size_t a, std::size_t b, std::size_t branch, std::size_t element) {
    add(row_of(a), branch, 1.0, StampRole::Incidence, element);
    add(row_of(b), branch, -1.0, StampRole::Incidence, element);
    add(branch, row_of(a), 1.0, StampRole::Incidence, element);
    add(branch, row_of(b), -1.0, StampRole::Incidence, element);
  }

 private:
  MnaPattern& p_;
};

bool needs_branch(ElementKind kind, InductorForm form) {
  switch (kind) {
    case ElementKind::VSource:
    case ElementKind::Vcvs:
    case ElementKind::Ccvs:
      return true;
    case ElementKind::Inductor:
      return form == InductorForm::Branch;
    default:
      return false;
  }
}

Complex role_value(StampRole role, double coeff, double omega) {
  switch (role) {
    case StampRole::Conductance:
    case StampRole::Incidence:
    case StampRole::Gain:
      return coeff;
    case StampRole::Capacitance:
      return {0.0, omega * coeff};
    case StampRole::InductorBranch:
      return {0.0, -omega * coeff};
    case StampRole::InductorAdmittance:
      return {0.0, -coeff / omega};
  }
  return {};
}

}  // namespace

MnaPattern build_pattern(const netlist::Netlist& net, InductorForm inductor_form) {
  MnaPattern p;
  p.inductor_form = inductor_form;
  p.n_nodes = net.nodes.size() - 1;
  for (std::size_t i = 1; i < net.nodes.size(); ++i) p.unknown_names.push_back(net.nodes.name(i));

  for (std::size_t e = 0; e < net.elements.size(); ++e) {
    const auto& el = net.elements[e];
    if (!needs_branch(el.kind, inductor_form)) continue;
    p.branch_map[e] = p.n_nodes + p.n_branches++;
    p.unknown_names.push_back("I(" + el.name + ")");
  }
  p.dim = p.n_nodes + p.n_branches;

  PatternBuilder b(p);
  for (std::size_t e = 0; e < net.elements.size(); ++e) {
    const auto& el = net.elements[e];
    const auto& n = el.node_ids;
    const double v = el.value.number;
    switch (el.kind) {
      case ElementKind::Resistor:
        b.two_terminal(n[0], n[1], 1.0 / v, StampRole::Conductance, e);
        break;
      case ElementKind::Capacitor:
        b.two_terminal(n[0], n[1], v, StampRole::Capacitance, e);
        break;
      case ElementKind::Inductor:
        if (inductor_form == InductorForm::Branch) {
          auto k = p.branch_map.at(e);
          b.incidence(n[0], n[1], k, e);
          b.add(k, k, v, StampRole::InductorBranch, e);
        } else {
          b.two_terminal(n[0], n[1], 1.0 / v, StampRole::InductorAdmittance, e);
        }
        break;
      case ElementKind::VSource:
        b.incidence(n[0], n[1], p.branch_map.at(e), e);
        break;
      case ElementKind::ISource:
        break;
      case ElementKind::Vcvs: {
        auto k = p.branch_map.at(e);
        b.incidence(n[0], n[1], k, e);
        b.add(k, PatternBuilder::row_of(n[2]), -v, StampRole::Gain, e);
        b.add(k, PatternBuilder::row_of(n[3]), v, StampRole::Gain, e);
        break;
      }
      case ElementKind::Vccs: {
        auto ra = PatternBuilder::row_of(n[0]), rb = PatternBuilder::row_of(n[1]);
        auto rc = PatternBuilder::row_of(n[2]), rd = PatternBuilder::row_of(n[3]);
        b.add(ra, rc, v, StampRole::Gain, e);
        b.add(ra, rd, -v, StampRole::Gain, e);
        b.add(rb, rc, -v, StampRole::Gain, e);
        b.add(rb, rd, v, StampRole::Gain, e);
        break;
      }
      case ElementKind::Cccs: {
        auto kc = p.branch_map.at(*net.find_element(el.control));
        b.add(PatternBuilder::row_of(n[0]), kc, v, StampRole::Gain, e);
        b.add(PatternBuilder::row_of(n[1]), kc, -v, StampRole::Gain, e);
        break;
      }
      case ElementKind::Ccvs: {
        auto k = p.branch_map.at(e);
        auto kc = p.branch_map.at(*net.find_element(el.control));
        b.incidence(n[0], n[1], k, e);
        b.add(k, kc, -v, StampRole::Gain, e);
        break;
      }
    }
  }
  return p;
}

ComplexMatrix assemble_matrix(const MnaPattern& pattern, double omega, const AssemblyOptions& options) {
  ComplexMatrix y(pattern.dim);
  for (const auto& s : pattern.stamps) y(s.row, s.col) += role_value(s.role, s.coeff, omega);
  if (options.gmin > 0.0)
    for (std::size_t i = 0; i < pattern.n_nodes; ++i) y(i, i) += options.gmin;
  return y;
}

MnaSystem assemble(const MnaPattern& pattern, const netlist::Netlist& net, double omega, const InjectionSpec& rhs,
                   const AssemblyOptions& options) {
  if (!(omega > 0.0) || !std::isfinite(omega)) throw Error(Errc::BadRange, "angular frequency must be positive");
  MnaSystem sys{assemble_matrix(pattern, omega, options), std::vector<Complex>(pattern.dim)};

  if (const auto* inj = std::get_if<NodeInjection>(&rhs)) {
    auto node = net.nodes.find(inj->node);
    if (!node) throw Error(Errc::UnknownNode, "unknown node '" + inj->node + "'");
    if (*node == netlist::NodeTable::ground) throw Error(Errc::UnknownNode, "cannot inject at the ground node");
    sys.b[MnaPattern::node_row(*node)] = inj->current;
    return sys;
  }

  for (std::size_t e = 0; e < net.elements.size(); ++e) {
    const auto& el = net.elements[e];
    if (!netlist::is_independent_source(el.kind)) continue;
    const Complex value =
        std::polar(el.ac_magnitude.number, el.ac_phase_deg.number * std::numbers::pi / 180.0);
    if (el.kind == ElementKind::VSource) {
      sys.b[pattern.branch_map.at(e)] += value;
    } else {
      if (auto a = PatternBuilder::row_of(el.node_ids[0])) sys.b[*a] -= value;
      if (auto c = PatternBuilder::row_of(el.node_ids[1])) sys.b[*c] += value;
    }
  }
  return sys;
}

ComplexSolution solve(const ComplexMatrix& y, std::span<const Complex> b, std::span<const std::string> unknown_names) {
  linalg::LuFactorization lu(y, unknown_names);
  return solve(lu, y, b);
}

ComplexSolution solve(const linalg::LuFactorization& lu, const ComplexMatrix& y, std::span<const Complex> b) {
  ComplexSolution sol;
  sol.x = lu.solve(b);
  sol.residual = linalg::residual_inf(y, sol.x, b);
  const double bound = 1e-9 * linalg::norm_inf(b);
  for (int step = 0; step < 2 && sol.residual > bound; ++step) {
    auto r = linalg::multiply(y, sol.x);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
    lu.solve_in_place(r);
    for (std::size_t i = 0; i < r.size(); ++i) sol.x[i] += r[i];
    sol.residual = linalg::residual_inf(y, sol.x, b);
  }
  return sol;
}

}  // namespace loopscope::mna
