#pragma once

// SPICE-subset netlists of linear small-signal elements.
//
// Supported cards:
//   Rname n+ n- value          Cname n+ n- value        Lname n+ n- value
//   Vname n+ n- [DC v] [AC mag [phase]]
//   Iname n+ n- [DC v] [AC mag [phase]]
//   Ename n+ n- nc+ nc- gain   Gname n+ n- nc+ nc- gm
//   Fname n+ n- Vctrl gain     Hname n+ n- Vctrl r
//   Xname n1 ... subckt [k=v ...]
//   .param k=v ...   .subckt name ports... [params: k=v ...]   .ends   .end
//
// Names are case-insensitive; the spelling of the first occurrence is kept
// for display. Ground is "0" ("gnd" is an alias).

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace loopscope::netlist {

enum class ElementKind { Resistor, Capacitor, Inductor, VSource, ISource, Vcvs, Vccs, Cccs, Ccvs };

char prefix_of(ElementKind kind);
std::optional<ElementKind> kind_from_prefix(char prefix);
std::string_view kind_name(ElementKind kind);
bool is_controlled_by_current(ElementKind kind);
bool is_independent_source(ElementKind kind);

// Numeric field that may still name a .param before elaboration.
struct Value {
  double number = 0.0;
  std::string param;

  static Value of(double v) { return Value{v, {}}; }
  static Value ref(std::string name) { return Value{0.0, std::move(name)}; }
  bool resolved() const { return param.empty(); }

  friend bool operator==(const Value&, const Value&) = default;
};

struct Element {
  std::string name;
  ElementKind kind = ElementKind::Resistor;
  std::vector<std::string> nodes;
  Value value;
  Value ac_magnitude;
  Value ac_phase_deg;
  std::string control;
  // Dense node indices, filled in by elaborate().
  std::vector<std::size_t> node_ids;
  int line = 0;

  // Element identity ignores the source line.
  friend bool operator==(const Element& a, const Element& b) {
    return a.name == b.name && a.kind == b.kind && a.nodes == b.nodes && a.value == b.value &&
           a.ac_magnitude == b.ac_magnitude && a.ac_phase_deg == b.ac_phase_deg &&
           a.control == b.control && a.node_ids == b.node_ids;
  }
};

using ParamList = std::vector<std::pair<std::string, Value>>;

struct Instance {
  std::string name;
  std::vector<std::string> nodes;
  std::string subckt;
  ParamList params;
  int line = 0;
};

struct ParamDef {
  std::string name;
  Value value;
  int line = 0;
};

struct Subckt {
  std::string name;
  std::vector<std::string> ports;
  ParamList defaults;
  std::vector<ParamDef> params;
  std::vector<Element> elements;
  std::vector<Instance> instances;
  int line = 0;
};

// Bijective node-name <-> dense index map. Index 0 is ground ("0").
class NodeTable {
 public:
  static constexpr std::size_t ground = 0;

  NodeTable();

  std::size_t intern(std::string_view name);
  std::optional<std::size_t> find(std::string_view name) const;
  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t size() const { return names_.size(); }

  friend bool operator==(const NodeTable& a, const NodeTable& b) { return a.names_ == b.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Netlist {
  std::string title;
  std::vector<Element> elements;
  std::vector<Instance> instances;
  std::map<std::string, Subckt> subckts;  // keyed by lower-case name
  std::vector<ParamDef> param_defs;
  std::map<std::string, double> params;   // resolved, lower-case keys
  NodeTable nodes;
  std::vector<std::string> warnings;
  bool elaborated = false;

  std::optional<std::size_t> find_element(std::string_view name) const;
};

std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool is_ground_name(std::string_view name);

// Scaled value of a SPICE numeral ("1k", "2.2u", "3meg", "10pF").
double parse_value(std::string_view token);

Netlist parse(std::string_view source);
Netlist parse_file(const std::filesystem::path& path);

// Flatten subcircuits, substitute parameters and build the node table.
// `overrides` replace (or add) global .param values.
Netlist elaborate(const Netlist& parsed, const std::map<std::string, double>& overrides = {});

// Canonical text of an elaborated netlist; parse() + elaborate() of the
// result reproduces the same element list and node table.
std::string render(const Netlist& flat);

}  // namespace loopscope::netlist
