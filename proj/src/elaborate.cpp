#include <algorithm>
#include <charconv>
#include <cmath>
#include <iterator>
#include <numeric>
#include <set>
#include <sstream>

#include "loopscope/error.hpp"
#include "loopscope/netlist.hpp"

namespace loopscope::netlist {

namespace {

class ParamScope {
 public:
  explicit ParamScope(const ParamScope* parent = nullptr) : parent_(parent) {}

  void define(const std::string& name, Value value) { raw_[to_lower(name)] = std::move(value); }

  double resolve(const Value& v, int line) const {
    if (v.resolved()) return v.number;
    return lookup(v.param, line);
  }

  double lookup(const std::string& name, int line) const {
    auto key = to_lower(name);
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    if (auto it = raw_.find(key); it != raw_.end()) {
      if (!visiting_.insert(key).second)
        throw Error(Errc::UnresolvedParam, "circular definition of parameter '" + name + "'", line);
      double v = resolve(it->second, line);
      visiting_.erase(key);
      cache_[key] = v;
      return v;
    }
    if (parent_) return parent_->lookup(name, line);
    throw Error(Errc::UnresolvedParam, "undefined parameter '" + name + "'", line);
  }

  std::map<std::string, double> resolved_all(int line) const {
    std::map<std::string, double> out;
    for (const auto& [key, _] : raw_) out[key] = lookup(key, line);
    return out;
  }

 private:
  const ParamScope* parent_;
  std::map<std::string, Value> raw_;
  mutable std::map<std::string, double> cache_;
  mutable std::set<std::string> visiting_;
};

struct Context {
  std::string path;
  std::map<std::string, std::string> ports;  // lower-case local port -> actual node
  const ParamScope* scope = nullptr;
  const Subckt* def = nullptr;
  std::vector<std::string> stack;
};

class Flattener {
 public:
  Flattener(const Netlist& parsed, std::set<std::string> top_nodes)
      : parsed_(parsed), top_nodes_(std::move(top_nodes)) {}

  void expand(const std::vector<Element>& elements, const std::vector<Instance>& instances, const Context& ctx) {
    // Keep source order between primitive cards and instances.
    std::vector<std::pair<int, std::size_t>> cards, insts, order;
    for (std::size_t i = 0; i < elements.size(); ++i) cards.emplace_back(elements[i].line, i);
    for (std::size_t i = 0; i < instances.size(); ++i) insts.emplace_back(instances[i].line, elements.size() + i);
    std::merge(cards.begin(), cards.end(), insts.begin(), insts.end(), std::back_inserter(order),
               [](auto& a, auto& b) { return a.first < b.first; });

    for (auto [line, idx] : order) {
      if (idx < elements.size())
        add_element(elements[idx], ctx);
      else
        add_instance(instances[idx - elements.size()], ctx);
    }
  }

  std::vector<Element> take() { return std::move(out_); }

 private:
  std::string map_node(const std::string& local, const Context& ctx, int line) const {
    if (is_ground_name(local)) return "0";
    if (ctx.path.empty()) return local;
    if (auto it = ctx.ports.find(to_lower(local)); it != ctx.ports.end()) return it->second;
    std::string name = ctx.path + "." + local;
    if (top_nodes_.count(to_lower(name)))
      throw Error(Errc::NameCollision, "internal node '" + name + "' collides with a top-level node", line);
    return name;
  }

  std::string map_element_name(const std::string& local, const Context& ctx) const {
    if (ctx.path.empty()) return local;
    return std::string(1, local.front()) + "." + ctx.path + "." + local;
  }

  void add_element(const Element& src, const Context& ctx) {
    Element el = src;
    el.name = map_element_name(src.name, ctx);
    for (auto& n : el.nodes) n = map_node(n, ctx, src.line);
    el.value = Value::of(ctx.scope->resolve(src.value, src.line));
    el.ac_magnitude = Value::of(ctx.scope->resolve(src.ac_magnitude, src.line));
    el.ac_phase_deg = Value::of(ctx.scope->resolve(src.ac_phase_deg, src.line));
    if (is_controlled_by_current(el.kind) && ctx.def) {
      bool local = std::any_of(ctx.def->elements.begin(), ctx.def->elements.end(),
                               [&](const Element& e) { return iequals(e.name, src.control); });
      if (local) el.control = map_element_name(src.control, ctx);
    }
    el.node_ids.clear();
    out_.push_back(std::move(el));
  }

  void add_instance(const Instance& inst, const Context& ctx) {
    auto it = parsed_.subckts.find(to_lower(inst.subckt));
    if (it == parsed_.subckts.end())
      throw Error(Errc::UnknownSubcircuit, "unknown subcircuit '" + inst.subckt + "' in " + inst.name, inst.line);
    const Subckt& def = it->second;
    auto key = to_lower(def.name);
    if (std::find(ctx.stack.begin(), ctx.stack.end(), key) != ctx.stack.end())
      throw Error(Errc::RecursiveSubcircuit, "subcircuit '" + def.name + "' instantiates itself", inst.line);
    if (inst.nodes.size() != def.ports.size()) {
      throw Error(Errc::SyntaxError,
                  inst.name + " connects " + std::to_string(inst.nodes.size()) + " nodes but '" + def.name +
                      "' has " + std::to_string(def.ports.size()) + " ports",
                  inst.line);
    }

    ParamScope scope(&global_scope());
    for (const auto& [name, value] : def.defaults) scope.define(name, value);
    for (const auto& p : def.params) scope.define(p.name, p.value);
    for (const auto& [name, value] : inst.params) scope.define(name, Value::of(ctx.scope->resolve(value, inst.line)));

    Context child;
    child.path = ctx.path.empty() ? inst.name : ctx.path + "." + inst.name;
    for (std::size_t i = 0; i < def.ports.size(); ++i)
      child.ports[to_lower(def.ports[i])] = map_node(inst.nodes[i], ctx, inst.line);
    child.scope = &scope;
    child.def = &def;
    child.stack = ctx.stack;
    child.stack.push_back(key);
    expand(def.elements, def.instances, child);
  }

 public:
  void set_global_scope(const ParamScope* g) { global_ = g; }

 private:
  const ParamScope& global_scope() const { return *global_; }

  const Netlist& parsed_;
  std::set<std::string> top_nodes_;
  const ParamScope* global_ = nullptr;
  std::vector<Element> out_;
};

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

void check_values(const std::vector<Element>& elements) {
  for (const auto& el : elements) {
    if (!std::isfinite(el.value.number) || !std::isfinite(el.ac_magnitude.number))
      throw Error(Errc::InvalidValue, "non-finite value on " + el.name, el.line);
    bool passive = el.kind == ElementKind::Resistor || el.kind == ElementKind::Capacitor ||
                   el.kind == ElementKind::Inductor;
    if (passive && el.value.number <= 0.0)
      throw Error(Errc::InvalidValue, std::string(kind_name(el.kind)) + " " + el.name + " must be positive", el.line);
    if (is_independent_source(el.kind) && el.ac_magnitude.number < 0.0)
      throw Error(Errc::InvalidValue, "negative AC magnitude on " + el.name, el.line);
  }
}

void connectivity_warnings(const Netlist& net, std::vector<std::string>& warnings) {
  std::vector<int> degree(net.nodes.size(), 0);
  DisjointSet sets(net.nodes.size());
  for (const auto& el : net.elements) {
    for (auto id : el.node_ids) ++degree[id];
    sets.unite(el.node_ids[0], el.node_ids[1]);
    if (el.node_ids.size() == 4) sets.unite(el.node_ids[2], el.node_ids[3]);
  }
  auto ground_root = sets.find(NodeTable::ground);
  for (std::size_t i = 1; i < net.nodes.size(); ++i) {
    if (degree[i] < 2) warnings.push_back("node '" + net.nodes.name(i) + "' has only one connection");
    if (sets.find(i) != ground_root) warnings.push_back("node '" + net.nodes.name(i) + "' has no path to ground");
  }
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

Netlist elaborate(const Netlist& parsed, const std::map<std::string, double>& overrides) {
  Netlist out;
  out.title = parsed.title;
  out.subckts = parsed.subckts;
  out.warnings = parsed.warnings;

  ParamScope globals;
  for (const auto& p : parsed.param_defs) globals.define(p.name, p.value);
  for (const auto& [name, value] : overrides) globals.define(name, Value::of(value));
  out.params = globals.resolved_all(0);
  for (const auto& [name, value] : out.params) out.param_defs.push_back({name, Value::of(value), 0});

  std::set<std::string> top_nodes;
  for (const auto& el : parsed.elements)
    for (const auto& n : el.nodes) top_nodes.insert(to_lower(n));
  for (const auto& inst : parsed.instances)
    for (const auto& n : inst.nodes) top_nodes.insert(to_lower(n));

  Flattener flat(parsed, std::move(top_nodes));
  flat.set_global_scope(&globals);
  Context top;
  top.scope = &globals;
  flat.expand(parsed.elements, parsed.instances, top);
  out.elements = flat.take();

  std::set<std::string> seen;
  for (const auto& el : out.elements) {
    if (!seen.insert(to_lower(el.name)).second)
      throw Error(Errc::DuplicateElement, "duplicate element name '" + el.name + "' after expansion", el.line);
  }
  check_values(out.elements);

  for (auto& el : out.elements) {
    if (!is_controlled_by_current(el.kind)) continue;
    auto ctrl = out.find_element(el.control);
    if (!ctrl || out.elements[*ctrl].kind != ElementKind::VSource) {
      throw Error(Errc::UnknownControlSource,
                  el.name + " references '" + el.control + "', which is not a voltage source", el.line);
    }
    el.control = out.elements[*ctrl].name;
  }

  for (auto& el : out.elements) {
    el.node_ids.clear();
    for (auto& n : el.nodes) {
      auto id = out.nodes.intern(n);
      el.node_ids.push_back(id);
      n = out.nodes.name(id);
    }
  }

  if (!parsed.elaborated) connectivity_warnings(out, out.warnings);
  out.elaborated = true;
  return out;
}

std::string render(const Netlist& flat) {
  std::ostringstream os;
  os << flat.title << '\n';
  for (const auto& [name, value] : flat.params) os << ".param " << name << '=' << shortest(value) << '\n';
  for (const auto& el : flat.elements) {
    os << el.name;
    for (const auto& n : el.nodes) os << ' ' << n;
    switch (el.kind) {
      case ElementKind::VSource:
      case ElementKind::ISource:
        os << " DC " << shortest(el.value.number) << " AC " << shortest(el.ac_magnitude.number) << ' '
           << shortest(el.ac_phase_deg.number);
        break;
      case ElementKind::Cccs:
      case ElementKind::Ccvs:
        os << ' ' << el.control << ' ' << shortest(el.value.number);
        break;
      default:
        os << ' ' << shortest(el.value.number);
        break;
    }
    os << '\n';
  }
  os << ".end\n";
  return os.str();
}

}  // namespace loopscope::netlist
