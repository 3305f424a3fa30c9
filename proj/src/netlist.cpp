#include "loopscope/netlist.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "loopscope/error.hpp"

namespace loopscope::netlist {

namespace {

constexpr std::array<std::pair<char, ElementKind>, 9> kPrefixes{{
    {'R', ElementKind::Resistor},
    {'C', ElementKind::Capacitor},
    {'L', ElementKind::Inductor},
    {'V', ElementKind::VSource},
    {'I', ElementKind::ISource},
    {'E', ElementKind::Vcvs},
    {'G', ElementKind::Vccs},
    {'F', ElementKind::Cccs},
    {'H', ElementKind::Ccvs},
}};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }

bool is_identifier(std::string_view s) {
  if (s.empty() || !is_ident_start(s.front())) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

bool all_alpha(std::string_view s) {
  return std::all_of(s.begin(), s.end(),
                     [](char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; });
}

struct LogicalLine {
  std::string text;
  int line = 0;
};

// Joins '+' continuations, drops comments and the title line.
std::vector<LogicalLine> logical_lines(std::string_view source, std::string& title) {
  std::vector<LogicalLine> out;
  std::size_t pos = 0;
  int line_no = 0;
  bool have_title = false;
  while (pos <= source.size()) {
    auto end = source.find('\n', pos);
    if (end == std::string_view::npos) end = source.size();
    std::string raw(source.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (!have_title) {
      title = raw;
      have_title = true;
      if (end == source.size()) break;
      continue;
    }
    if (auto semi = raw.find(';'); semi != std::string::npos) raw.erase(semi);
    auto first = raw.find_first_not_of(" \t");
    if (first == std::string::npos) {
      if (end == source.size()) break;
      continue;
    }
    if (raw[first] == '*') {
      if (end == source.size()) break;
      continue;
    }
    if (raw[first] == '+') {
      if (out.empty()) throw Error(Errc::SyntaxError, "continuation line without a preceding card", line_no);
      out.back().text += ' ';
      out.back().text += raw.substr(first + 1);
    } else {
      out.push_back({raw.substr(first), line_no});
    }
    if (end == source.size()) break;
  }
  return out;
}

// Whitespace, '(' ')' ',' separate tokens; '=' is a token of its own;
// "{...}" is kept whole with interior blanks removed.
std::vector<std::string> tokenize(const std::string& text, int line) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '{') {
      auto close = text.find('}', i);
      if (close == std::string::npos) throw Error(Errc::SyntaxError, "unterminated '{'", line);
      for (std::size_t k = i; k <= close; ++k)
        if (!std::isspace(static_cast<unsigned char>(text[k]))) cur += text[k];
      i = close;
    } else if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == ',') {
      flush();
    } else if (c == '=') {
      flush();
      tokens.emplace_back("=");
    } else {
      cur += c;
    }
  }
  flush();
  return tokens;
}

Value value_token(const std::string& tok, int line) {
  std::string_view body = tok;
  if (body.size() >= 2 && body.front() == '{' && body.back() == '}') {
    body = body.substr(1, body.size() - 2);
    if (body.empty()) throw Error(Errc::SyntaxError, "empty '{}' value", line);
  }
  if (is_identifier(body)) return Value::ref(std::string(body));
  try {
    return Value::of(parse_value(body));
  } catch (const Error& e) {
    if (body.size() != tok.size())
      throw Error(Errc::SyntaxError, "unsupported expression '" + tok + "' (only numbers and parameter names)", line);
    throw Error(Errc::MalformedNumber, e.what(), line);
  }
}

// Consumes trailing `name = value` groups starting at `from`.
ParamList key_values(const std::vector<std::string>& tokens, std::size_t from, int line) {
  ParamList out;
  std::size_t i = from;
  while (i < tokens.size()) {
    if (i + 2 >= tokens.size() || tokens[i + 1] != "=" || !is_identifier(tokens[i]))
      throw Error(Errc::SyntaxError, "expected name=value near '" + tokens[i] + "'", line);
    out.emplace_back(tokens[i], value_token(tokens[i + 2], line));
    i += 3;
  }
  return out;
}

bool is_transient_function(std::string_view word) {
  static constexpr std::array<std::string_view, 6> kFuncs{"sin", "pulse", "pwl", "exp", "sffm", "am"};
  auto lw = to_lower(word);
  return std::find(kFuncs.begin(), kFuncs.end(), lw) != kFuncs.end();
}

void parse_source_tail(Element& el, const std::vector<std::string>& t, std::vector<std::string>& warnings,
                       int line) {
  std::size_t i = 3;
  while (i < t.size()) {
    auto word = to_lower(t[i]);
    if (word == "dc") {
      if (i + 1 >= t.size()) throw Error(Errc::SyntaxError, "DC without a value", line);
      el.value = value_token(t[i + 1], line);
      i += 2;
    } else if (word == "ac") {
      el.ac_magnitude = Value::of(1.0);
      ++i;
      // A following numeral or {param} is the magnitude, then the phase.
      auto numeric = [&](std::size_t k) {
        return k < t.size() && !std::isalpha(static_cast<unsigned char>(t[k].front()));
      };
      if (numeric(i)) {
        el.ac_magnitude = value_token(t[i++], line);
        if (numeric(i)) el.ac_phase_deg = value_token(t[i++], line);
      }
    } else if (is_transient_function(word)) {
      warnings.push_back("line " + std::to_string(line) + ": transient specification on " + el.name +
                         " ignored");
      return;
    } else if (i == 3) {
      el.value = value_token(t[i], line);
      ++i;
    } else {
      throw Error(Errc::SyntaxError, "unexpected token '" + t[i] + "' on source " + el.name, line);
    }
  }
}

Element parse_element(const std::vector<std::string>& t, ElementKind kind, std::vector<std::string>& warnings,
                      int line) {
  Element el;
  el.name = t[0];
  el.kind = kind;
  el.line = line;
  auto need = [&](std::size_t n, const char* form) {
    if (t.size() < n) throw Error(Errc::SyntaxError, "expected '" + std::string(form) + "'", line);
  };
  switch (kind) {
    case ElementKind::Resistor:
    case ElementKind::Capacitor:
    case ElementKind::Inductor: {
      need(4, "name n+ n- value");
      el.nodes = {t[1], t[2]};
      el.value = value_token(t[3], line);
      if (t.size() > 4) {
        // Instance options such as ic= or tc= have no small-signal meaning.
        key_values(t, 4, line);
        warnings.push_back("line " + std::to_string(line) + ": options on " + el.name + " ignored");
      }
      break;
    }
    case ElementKind::VSource:
    case ElementKind::ISource:
      need(3, "name n+ n- [DC v] [AC mag]");
      el.nodes = {t[1], t[2]};
      parse_source_tail(el, t, warnings, line);
      break;
    case ElementKind::Vcvs:
    case ElementKind::Vccs:
      need(6, "name n+ n- nc+ nc- gain");
      if (t.size() > 6) throw Error(Errc::SyntaxError, "unexpected tokens after gain of " + el.name, line);
      el.nodes = {t[1], t[2], t[3], t[4]};
      el.value = value_token(t[5], line);
      break;
    case ElementKind::Cccs:
    case ElementKind::Ccvs:
      need(5, "name n+ n- vcontrol gain");
      if (t.size() > 5) throw Error(Errc::SyntaxError, "unexpected tokens after gain of " + el.name, line);
      el.nodes = {t[1], t[2]};
      el.control = t[3];
      el.value = value_token(t[4], line);
      break;
  }
  return el;
}

Instance parse_instance(const std::vector<std::string>& t, int line) {
  Instance inst;
  inst.name = t[0];
  inst.line = line;
  std::size_t kv = t.size();
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (t[i] == "=") {
      kv = i - 1;
      break;
    }
  }
  if (kv < 3) throw Error(Errc::SyntaxError, "expected 'Xname nodes... subckt [k=v ...]'", line);
  inst.subckt = t[kv - 1];
  inst.nodes.assign(t.begin() + 1, t.begin() + static_cast<std::ptrdiff_t>(kv - 1));
  inst.params = key_values(t, kv, line);
  return inst;
}

std::vector<ParamDef> parse_param_card(const std::vector<std::string>& t, int line) {
  std::vector<ParamDef> defs;
  for (auto& [name, value] : key_values(t, 1, line)) defs.push_back({name, value, line});
  if (defs.empty()) throw Error(Errc::SyntaxError, ".param without definitions", line);
  return defs;
}

template <typename Range>
void check_duplicate(const Range& existing, const std::string& name, int line) {
  for (const auto& item : existing)
    if (iequals(item.name, name)) throw Error(Errc::DuplicateElement, "duplicate element name '" + name + "'", line);
}

}  // namespace

char prefix_of(ElementKind kind) {
  for (auto [c, k] : kPrefixes)
    if (k == kind) return c;
  return '?';
}

std::optional<ElementKind> kind_from_prefix(char prefix) {
  char up = static_cast<char>(std::toupper(static_cast<unsigned char>(prefix)));
  for (auto [c, k] : kPrefixes)
    if (c == up) return k;
  return std::nullopt;
}

std::string_view kind_name(ElementKind kind) {
  switch (kind) {
    case ElementKind::Resistor: return "resistor";
    case ElementKind::Capacitor: return "capacitor";
    case ElementKind::Inductor: return "inductor";
    case ElementKind::VSource: return "vsource";
    case ElementKind::ISource: return "isource";
    case ElementKind::Vcvs: return "vcvs";
    case ElementKind::Vccs: return "vccs";
    case ElementKind::Cccs: return "cccs";
    case ElementKind::Ccvs: return "ccvs";
  }
  return "?";
}

bool is_controlled_by_current(ElementKind kind) { return kind == ElementKind::Cccs || kind == ElementKind::Ccvs; }

bool is_independent_source(ElementKind kind) { return kind == ElementKind::VSource || kind == ElementKind::ISource; }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

bool is_ground_name(std::string_view name) { return name == "0" || iequals(name, "gnd"); }

NodeTable::NodeTable() {
  names_.emplace_back("0");
  index_.emplace("0", ground);
}

std::size_t NodeTable::intern(std::string_view name) {
  if (is_ground_name(name)) return ground;
  auto key = to_lower(name);
  if (auto it = index_.find(key); it != index_.end()) return it->second;
  auto idx = names_.size();
  names_.emplace_back(name);
  index_.emplace(std::move(key), idx);
  return idx;
}

std::optional<std::size_t> NodeTable::find(std::string_view name) const {
  if (is_ground_name(name)) return ground;
  if (auto it = index_.find(to_lower(name)); it != index_.end()) return it->second;
  return std::nullopt;
}

std::optional<std::size_t> Netlist::find_element(std::string_view name) const {
  for (std::size_t i = 0; i < elements.size(); ++i)
    if (iequals(elements[i].name, name)) return i;
  return std::nullopt;
}

double parse_value(std::string_view token) {
  auto malformed = [&] { return Error(Errc::MalformedNumber, "malformed number '" + std::string(token) + "'"); };
  std::size_t i = 0;
  if (i < token.size() && (token[i] == '+' || token[i] == '-')) ++i;
  std::size_t digits = 0;
  while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) ++i, ++digits;
  if (i < token.size() && token[i] == '.') {
    ++i;
    while (i < token.size() && std::isdigit(static_cast<unsigned char>(token[i]))) ++i, ++digits;
  }
  if (digits == 0) throw malformed();
  if (i < token.size() && (token[i] == 'e' || token[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < token.size() && (token[j] == '+' || token[j] == '-')) ++j;
    std::size_t exp_digits = 0;
    while (j < token.size() && std::isdigit(static_cast<unsigned char>(token[j]))) ++j, ++exp_digits;
    if (exp_digits > 0) i = j;
  }
  std::string_view numeral = token.substr(0, i);
  if (numeral.front() == '+') numeral.remove_prefix(1);
  double mantissa = 0.0;
  auto [ptr, ec] = std::from_chars(numeral.data(), numeral.data() + numeral.size(), mantissa);
  if (ec != std::errc() || ptr != numeral.data() + numeral.size()) throw malformed();

  std::string rest = to_lower(token.substr(i));
  if (rest.empty()) return mantissa;
  if (!all_alpha(rest)) throw malformed();
  double scale = 1.0;
  if (rest.rfind("meg", 0) == 0) {
    scale = 1e6;
    rest.erase(0, 3);
  } else {
    switch (rest.front()) {
      case 't': scale = 1e12; break;
      case 'g': scale = 1e9; break;
      case 'k': scale = 1e3; break;
      case 'm': scale = 1e-3; break;
      case 'u': scale = 1e-6; break;
      case 'n': scale = 1e-9; break;
      case 'p': scale = 1e-12; break;
      case 'f': scale = 1e-15; break;
      default: {
        static constexpr std::array<std::string_view, 8> kUnits{"v", "a", "ohm", "ohms", "hz", "s", "sec", "h"};
        if (std::find(kUnits.begin(), kUnits.end(), rest) == kUnits.end()) throw malformed();
        return mantissa;
      }
    }
    rest.erase(0, 1);
  }
  // Any letters after a scale suffix are unit text.
  return mantissa * scale;
}

Netlist parse(std::string_view source) {
  if (source.find_first_not_of(" \t\r\n") == std::string_view::npos)
    throw Error(Errc::SyntaxError, "empty netlist", 1);

  Netlist net;
  auto lines = logical_lines(source, net.title);
  Subckt* open = nullptr;
  Subckt pending;

  for (const auto& ll : lines) {
    auto t = tokenize(ll.text, ll.line);
    if (t.empty()) continue;
    const std::string& head = t[0];

    if (head.front() == '.') {
      auto dir = to_lower(head);
      if (dir == ".end") break;
      if (dir == ".param") {
        auto defs = parse_param_card(t, ll.line);
        auto& dst = open ? pending.params : net.param_defs;
        dst.insert(dst.end(), defs.begin(), defs.end());
      } else if (dir == ".subckt") {
        if (open) throw Error(Errc::SyntaxError, "nested .subckt definitions are not supported", ll.line);
        if (t.size() < 2) throw Error(Errc::SyntaxError, ".subckt without a name", ll.line);
        pending = Subckt{};
        pending.name = t[1];
        pending.line = ll.line;
        std::size_t i = 2;
        for (; i < t.size(); ++i) {
          if (iequals(t[i], "params:")) {
            ++i;
            break;
          }
          if (i + 1 < t.size() && t[i + 1] == "=") break;
          pending.ports.push_back(t[i]);
        }
        pending.defaults = key_values(t, i, ll.line);
        if (net.subckts.count(to_lower(pending.name)))
          throw Error(Errc::SyntaxError, "subcircuit '" + pending.name + "' defined twice", ll.line);
        open = &pending;
      } else if (dir == ".ends") {
        if (!open) throw Error(Errc::SyntaxError, ".ends without .subckt", ll.line);
        net.subckts.emplace(to_lower(pending.name), std::move(pending));
        open = nullptr;
      } else {
        net.warnings.push_back("line " + std::to_string(ll.line) + ": directive " + head + " ignored");
      }
      continue;
    }

    auto& elements = open ? pending.elements : net.elements;
    auto& instances = open ? pending.instances : net.instances;
    char prefix = static_cast<char>(std::toupper(static_cast<unsigned char>(head.front())));
    if (prefix == 'X') {
      check_duplicate(instances, head, ll.line);
      instances.push_back(parse_instance(t, ll.line));
      continue;
    }
    auto kind = kind_from_prefix(prefix);
    if (!kind) {
      throw Error(Errc::UnknownElementPrefix,
                  "unknown element '" + head + "' (only R C L V I E G F H X are supported; linearize devices into "
                  "small-signal macromodels)",
                  ll.line);
    }
    check_duplicate(elements, head, ll.line);
    elements.push_back(parse_element(t, *kind, net.warnings, ll.line));
  }
  if (open) throw Error(Errc::SyntaxError, "missing .ends for subcircuit '" + pending.name + "'", pending.line);
  return net;
}

Netlist parse_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open netlist '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

}  // namespace loopscope::netlist
