#include "tnf/circuit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <queue>

#include "tnf/errors.hpp"

namespace tnf {

namespace {

constexpr std::size_t kNoWire = std::numeric_limits<std::size_t>::max();

struct Arity {
  std::size_t in;
  std::size_t out;
};

Arity arity(GateKind k) {
  switch (k) {
    case GateKind::Xor:
    case GateKind::And:
    case GateKind::Or:
    case GateKind::Plus:
    case GateKind::Times: return {2, 1};
    case GateKind::Delta: return {1, 2};
    case GateKind::ConstBit:
    case GateKind::ConstFloat: return {0, 1};
    case GateKind::Table: return {1, 1};
  }
  return {0, 0};
}

bool is_basis(const Tensor& v) {
  std::size_t ones = 0;
  for (const Complex& x : v.data()) {
    if (x == Complex{1.0, 0.0}) {
      ++ones;
    } else if (x != Complex{0.0, 0.0}) {
      return false;
    }
  }
  return ones == 1;
}

Tensor one_hot(std::size_t extent, std::size_t index) {
  Tensor v({extent});
  v({index}) = 1.0;
  return v;
}

// DELTA applied to a product-state input: returns both copies.
std::pair<Tensor, Tensor> copy_through_delta(const Tensor& x) {
  const std::size_t n = x.extent(0);
  Tensor delta({n, n, n});
  for (std::size_t i = 0; i < n; ++i) delta({i, i, i}) = 1.0;
  const Tensor m = contract(delta, x, {{0, 0}});  // (out, out)
  Tensor a({n}), b({n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      a({i}) += m({i, j});
      b({j}) += m({i, j});
    }
  }
  if (!(outer(a, b) == m)) throw DataError("DELTA output is not a product state");
  return {a, b};
}

GateNode gate(GateKind kind, std::vector<std::size_t> inputs) {
  GateNode node;
  node.kind = kind;
  node.inputs = std::move(inputs);
  return node;
}

Tensor apply_binary(const Tensor& gate, const Tensor& a, const Tensor& b) {
  return contract(contract(gate, a, {{0, 0}}), b, {{0, 0}});
}

}  // namespace

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::Xor: return "XOR";
    case GateKind::And: return "AND";
    case GateKind::Or: return "OR";
    case GateKind::Delta: return "DELTA";
    case GateKind::Plus: return "PLUS";
    case GateKind::Times: return "TIMES";
    case GateKind::ConstBit: return "CONST_BIT";
    case GateKind::ConstFloat: return "CONST_FLOAT";
    case GateKind::Table: return "TABLE";
  }
  return "?";
}

GateKind gate_kind_from_string(const std::string& s) {
  for (auto k : {GateKind::Xor, GateKind::And, GateKind::Or, GateKind::Delta, GateKind::Plus, GateKind::Times,
                 GateKind::ConstBit, GateKind::ConstFloat, GateKind::Table}) {
    if (to_string(k) == s) return k;
  }
  throw DataError("unknown gate kind: " + s);
}

std::string to_string(WireType type) {
  switch (type) {
    case WireType::Bit: return "bit";
    case WireType::Amp: return "amp";
    case WireType::Var: return "var";
  }
  return "?";
}

namespace {
WireType wire_type_from_string(const std::string& s) {
  for (auto t : {WireType::Bit, WireType::Amp, WireType::Var}) {
    if (to_string(t) == s) return t;
  }
  throw DataError("unknown wire type: " + s);
}
}  // namespace

Tensor gate_tensor(GateKind kind, int bit, double value) {
  Tensor t({2, 2, 2});
  switch (kind) {
    case GateKind::Xor:
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) t({a, b, a ^ b}) = 1.0;
      return t;
    case GateKind::And:
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) t({a, b, a & b}) = 1.0;
      return t;
    case GateKind::Or:
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b) t({a, b, a | b}) = 1.0;
      return t;
    case GateKind::Delta:
    case GateKind::Times:
      t({0, 0, 0}) = 1.0;
      t({1, 1, 1}) = 1.0;
      return t;
    case GateKind::Plus:
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; i + j < 2; ++j) t({i, j, i + j}) = 1.0;
      return t;
    case GateKind::ConstBit:
      if (bit != 0 && bit != 1) throw ArgumentError("constant bit must be 0 or 1");
      return one_hot(2, static_cast<std::size_t>(bit));
    case GateKind::ConstFloat: return float_encode(value);
    case GateKind::Table: throw ArgumentError("TABLE tensors come from function_tensor");
  }
  throw ArgumentError("unknown gate kind");
}

std::size_t CircuitGraph::add_wire(WireType type, std::size_t extent) {
  if (extent == 0) throw ArgumentError("wire extent must be positive");
  wires_.push_back({type, extent});
  return wires_.size() - 1;
}

std::vector<std::size_t> CircuitGraph::add_input(WireType type, std::size_t width, std::size_t extent) {
  std::vector<std::size_t> ids;
  for (std::size_t i = 0; i < width; ++i) ids.push_back(add_wire(type, extent));
  inputs_.push_back(ids);
  return ids;
}

std::vector<std::size_t> CircuitGraph::add_node(GateNode node, WireType output_type, std::size_t n_outputs,
                                                std::size_t output_extent) {
  node.outputs.clear();
  for (std::size_t i = 0; i < n_outputs; ++i) node.outputs.push_back(add_wire(output_type, output_extent));
  nodes_.push_back(std::move(node));
  return nodes_.back().outputs;
}

void CircuitGraph::add_output(std::vector<std::size_t> wires) {
  for (auto w : wires) {
    if (w >= wires_.size()) throw ArgumentError("output wire out of range");
  }
  outputs_.push_back(std::move(wires));
}

CircuitGraph CircuitGraph::from_parts(std::vector<Wire> wires, std::vector<GateNode> nodes,
                                      std::vector<std::vector<std::size_t>> inputs,
                                      std::vector<std::vector<std::size_t>> outputs) {
  CircuitGraph g;
  g.wires_ = std::move(wires);
  g.nodes_ = std::move(nodes);
  g.inputs_ = std::move(inputs);
  for (auto& group : outputs) {
    for (auto w : group) {
      if (w >= g.wires_.size()) throw StructureError("output wire out of range");
    }
  }
  g.outputs_ = std::move(outputs);
  g.topological_order();
  return g;
}

std::vector<std::size_t> CircuitGraph::topological_order() const {
  const std::size_t nw = wires_.size();
  std::vector<std::size_t> producer(nw, kNoWire);
  std::vector<std::size_t> produced(nw, 0), consumed(nw, 0), as_output(nw, 0);
  const std::size_t kInput = kNoWire - 1;
  for (const auto& group : inputs_) {
    for (auto w : group) {
      if (w >= nw) throw StructureError("input wire out of range");
      ++produced[w];
      producer[w] = kInput;
    }
  }
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    const GateNode& node = nodes_[n];
    const Arity a = arity(node.kind);
    if (node.inputs.size() != a.in || node.outputs.size() != a.out) {
      throw StructureError(to_string(node.kind) + " node has the wrong number of legs");
    }
    for (auto w : node.inputs) {
      if (w >= nw) throw StructureError("node input wire out of range");
      ++consumed[w];
    }
    for (auto w : node.outputs) {
      if (w >= nw) throw StructureError("node output wire out of range");
      ++produced[w];
      producer[w] = n;
    }
    auto type_of = [&](std::size_t w) { return wires_[w].type; };
    bool ok = true;
    switch (node.kind) {
      case GateKind::Xor:
      case GateKind::And:
      case GateKind::Or:
        for (auto w : node.inputs) ok = ok && type_of(w) == WireType::Bit;
        ok = ok && type_of(node.outputs[0]) == WireType::Bit;
        break;
      case GateKind::Plus:
      case GateKind::Times:
        for (auto w : node.inputs) ok = ok && type_of(w) == WireType::Amp;
        ok = ok && type_of(node.outputs[0]) == WireType::Amp;
        break;
      case GateKind::Delta:
        ok = type_of(node.inputs[0]) != WireType::Amp;
        for (auto w : node.outputs) {
          ok = ok && type_of(w) == type_of(node.inputs[0]) && wires_[w].extent == wires_[node.inputs[0]].extent;
        }
        break;
      case GateKind::ConstBit: ok = type_of(node.outputs[0]) == WireType::Bit; break;
      case GateKind::ConstFloat: ok = type_of(node.outputs[0]) == WireType::Amp; break;
      case GateKind::Table:
        ok = type_of(node.inputs[0]) == WireType::Var && type_of(node.outputs[0]) == WireType::Amp &&
             node.table.rank() == 2 && node.table.extent(0) == wires_[node.inputs[0]].extent &&
             node.table.extent(1) == 2;
        break;
    }
    if (!ok) throw StructureError(to_string(node.kind) + " node has mistyped legs");
  }
  for (const auto& group : outputs_) {
    for (auto w : group) ++as_output[w];
  }
  for (std::size_t w = 0; w < nw; ++w) {
    if (produced[w] != 1) throw StructureError("wire " + std::to_string(w) + " must have exactly one producer");
    if (as_output[w] > 1) throw StructureError("wire listed twice as output");
    if (wires_[w].type == WireType::Amp) {
      if (consumed[w] == 0 && as_output[w] == 0) throw StructureError("dangling amplitude wire");
    } else if (consumed[w] + as_output[w] != 1) {
      throw StructureError("bit/variable wire " + std::to_string(w) + " needs exactly one consumer or output slot");
    }
  }

  std::vector<std::size_t> pending(nodes_.size(), 0);
  std::vector<std::vector<std::size_t>> dependents(nodes_.size());
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    for (auto w : nodes_[n].inputs) {
      if (producer[w] != kInput) {
        ++pending[n];
        dependents[producer[w]].push_back(n);
      }
    }
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    if (pending[n] == 0) ready.push(n);
  }
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t n = ready.top();
    ready.pop();
    order.push_back(n);
    for (auto d : dependents[n]) {
      if (--pending[d] == 0) ready.push(d);
    }
  }
  if (order.size() != nodes_.size()) throw StructureError("circuit graph has a cycle");
  return order;
}

BitVec BitVec::from_uint(std::uint64_t value, std::size_t width) {
  if (width > 64 || (width < 64 && (value >> width) != 0)) throw ArgumentError("value does not fit in width");
  BitVec b;
  for (std::size_t i = 0; i < width; ++i) b.bits.push_back(static_cast<std::uint8_t>((value >> i) & 1u));
  return b;
}

std::uint64_t BitVec::to_uint() const {
  if (bits.size() > 64) throw ArgumentError("bit string wider than 64 bits");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) throw ArgumentError("bit entries must be binary");
    v |= static_cast<std::uint64_t>(bits[i]) << i;
  }
  return v;
}

std::vector<std::size_t> fan_out(CircuitGraph& g, std::size_t wire, std::size_t k) {
  if (k == 0) throw ArgumentError("fan-out needs at least one copy");
  const Wire w = g.wires().at(wire);
  std::vector<std::size_t> copies;
  std::size_t current = wire;
  for (std::size_t i = 1; i < k; ++i) {
    GateNode d = gate(GateKind::Delta, {current});
    const auto out = g.add_node(std::move(d), w.type, 2, w.extent);
    copies.push_back(out[0]);
    current = out[1];
  }
  copies.push_back(current);
  return copies;
}

SumCarry half_adder(CircuitGraph& g, std::size_t a, std::size_t b) {
  const auto ac = fan_out(g, a, 2);
  const auto bc = fan_out(g, b, 2);
  const std::size_t sum = g.add_node(gate(GateKind::Xor, {ac[0], bc[0]}), WireType::Bit)[0];
  const std::size_t carry = g.add_node(gate(GateKind::And, {ac[1], bc[1]}), WireType::Bit)[0];
  return {sum, carry};
}

SumCarry full_adder(CircuitGraph& g, std::size_t a, std::size_t b, std::size_t carry_in) {
  const SumCarry first = half_adder(g, a, b);
  const SumCarry second = half_adder(g, first.sum, carry_in);
  const std::size_t carry = g.add_node(gate(GateKind::Or, {first.carry, second.carry}), WireType::Bit)[0];
  return {second.sum, carry};
}

std::vector<std::size_t> ripple_add(CircuitGraph& g, std::span<const std::size_t> x, std::span<const std::size_t> y) {
  const std::size_t n = std::max(x.size(), y.size());
  std::vector<std::size_t> out;
  std::optional<std::size_t> carry;
  for (std::size_t i = 0; i < n; ++i) {
    const bool hx = i < x.size(), hy = i < y.size();
    if (hx && hy) {
      const SumCarry sc = carry ? full_adder(g, x[i], y[i], *carry) : half_adder(g, x[i], y[i]);
      out.push_back(sc.sum);
      carry = sc.carry;
    } else {
      const std::size_t a = hx ? x[i] : y[i];
      if (carry) {
        const SumCarry sc = half_adder(g, a, *carry);
        out.push_back(sc.sum);
        carry = sc.carry;
      } else {
        out.push_back(a);
      }
    }
  }
  if (carry) {
    out.push_back(*carry);
  } else {
    GateNode zero = gate(GateKind::ConstBit, {});
    out.push_back(g.add_node(std::move(zero), WireType::Bit)[0]);
  }
  return out;
}

CircuitGraph build_half_adder() {
  CircuitGraph g;
  const std::size_t a = g.add_input(WireType::Bit, 1)[0];
  const std::size_t b = g.add_input(WireType::Bit, 1)[0];
  const SumCarry sc = half_adder(g, a, b);
  g.add_output({sc.sum});
  g.add_output({sc.carry});
  return g;
}

CircuitGraph build_full_adder() {
  CircuitGraph g;
  const std::size_t a = g.add_input(WireType::Bit, 1)[0];
  const std::size_t b = g.add_input(WireType::Bit, 1)[0];
  const std::size_t c = g.add_input(WireType::Bit, 1)[0];
  const SumCarry sc = full_adder(g, a, b, c);
  g.add_output({sc.sum});
  g.add_output({sc.carry});
  return g;
}

CircuitGraph build_adder(std::size_t n_bits) {
  if (n_bits < 1) throw ArgumentError("adder needs at least one bit");
  CircuitGraph g;
  const auto x = g.add_input(WireType::Bit, n_bits);
  const auto y = g.add_input(WireType::Bit, n_bits);
  g.add_output(ripple_add(g, x, y));
  return g;
}

namespace {

// Shift-and-add product of x and y given n copies of every x bit and m
// copies of every y bit (xc[i][j] feeds row j, yc[j][i] feeds column i).
std::vector<std::size_t> shift_and_add(CircuitGraph& g, const std::vector<std::vector<std::size_t>>& xc,
                                       const std::vector<std::vector<std::size_t>>& yc) {
  const std::size_t m = xc.size(), n = yc.size();
  std::vector<std::size_t> acc;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::size_t> row;
    for (std::size_t i = 0; i < m; ++i) {
      row.push_back(g.add_node(gate(GateKind::And, {xc[i][j], yc[j][i]}), WireType::Bit)[0]);
    }
    if (j == 0) {
      acc = row;
      continue;
    }
    std::vector<std::size_t> next(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(std::min(j, acc.size())));
    const std::span<const std::size_t> high =
        acc.size() > j ? std::span<const std::size_t>(acc).subspan(j) : std::span<const std::size_t>();
    const auto sum = ripple_add(g, high, row);
    next.insert(next.end(), sum.begin(), sum.end());
    acc = std::move(next);
  }
  return acc;
}

}  // namespace

CircuitGraph build_multiplier(std::size_t m_bits, std::size_t n_bits) {
  if (m_bits < 1 || n_bits < 1) throw ArgumentError("multiplier operands need at least one bit");
  CircuitGraph g;
  const auto x = g.add_input(WireType::Bit, m_bits);
  const auto y = g.add_input(WireType::Bit, n_bits);
  std::vector<std::vector<std::size_t>> xc, yc;
  for (auto w : x) xc.push_back(fan_out(g, w, n_bits));
  for (auto w : y) yc.push_back(fan_out(g, w, m_bits));
  g.add_output(shift_and_add(g, xc, yc));
  return g;
}

CircuitGraph build_square(std::size_t n_bits) {
  if (n_bits < 1) throw ArgumentError("square needs at least one bit");
  CircuitGraph g;
  const auto x = g.add_input(WireType::Bit, n_bits);
  // Each bit serves n times as a multiplicand bit and n times as a multiplier bit.
  std::vector<std::vector<std::size_t>> xc, yc;
  for (auto w : x) {
    const auto copies = fan_out(g, w, 2 * n_bits);
    xc.emplace_back(copies.begin(), copies.begin() + static_cast<std::ptrdiff_t>(n_bits));
    yc.emplace_back(copies.begin() + static_cast<std::ptrdiff_t>(n_bits), copies.end());
  }
  g.add_output(shift_and_add(g, xc, yc));
  return g;
}

std::vector<BitVec> eval_binary(const CircuitGraph& g, std::span<const BitVec> inputs) {
  const auto order = g.topological_order();
  if (inputs.size() != g.inputs().size()) throw ArgumentError("wrong number of input operands");
  std::vector<std::optional<Tensor>> value(g.wires().size());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    const auto& group = g.inputs()[k];
    if (inputs[k].bits.size() != group.size()) throw ArgumentError("input operand width does not match manifest");
    for (std::size_t i = 0; i < group.size(); ++i) {
      if (g.wires()[group[i]].type != WireType::Bit) throw ArgumentError("eval_binary needs bit inputs");
      if (inputs[k].bits[i] > 1) throw ArgumentError("bit entries must be binary");
      value[group[i]] = one_hot(2, inputs[k].bits[i]);
    }
  }
  for (auto n : order) {
    const GateNode& node = g.nodes()[n];
    switch (node.kind) {
      case GateKind::Xor:
      case GateKind::And:
      case GateKind::Or:
        value[node.outputs[0]] = apply_binary(gate_tensor(node.kind), *value[node.inputs[0]], *value[node.inputs[1]]);
        break;
      case GateKind::Delta: {
        auto [a, b] = copy_through_delta(*value[node.inputs[0]]);
        value[node.outputs[0]] = std::move(a);
        value[node.outputs[1]] = std::move(b);
        break;
      }
      case GateKind::ConstBit: value[node.outputs[0]] = gate_tensor(node.kind, node.bit); break;
      default: throw StructureError(to_string(node.kind) + " node in a binary circuit");
    }
    for (auto w : node.outputs) {
      if (!is_basis(*value[w])) throw DataError("intermediate wire left the product-state basis");
    }
  }
  std::vector<BitVec> out;
  for (const auto& group : g.outputs()) {
    BitVec b;
    for (auto w : group) {
      const Tensor& v = *value[w];
      b.bits.push_back(v({1}) == Complex{1.0, 0.0} ? 1 : 0);
    }
    out.push_back(std::move(b));
  }
  return out;
}

Tensor float_encode(double x) { return Tensor({2}, {Complex{1.0, 0.0}, Complex{x, 0.0}}); }

double float_decode(const Tensor& v) {
  if (v.rank() != 1 || v.extent(0) != 2) throw RepresentationError("encoded float must be a length-2 vector");
  if (std::abs(v({0}) - Complex{1.0, 0.0}) > 1e-12) throw RepresentationError("leading component is not 1");
  if (v({1}).imag() != 0.0) throw RepresentationError("encoded float has an imaginary part");
  return v({1}).real();
}

Tensor function_tensor(const GridFunction& f) {
  if (f.grid.size() != f.values.size() || f.grid.empty()) throw ArgumentError("grid and values must match");
  Tensor t({f.grid.size(), 2});
  for (std::size_t p = 0; p < f.grid.size(); ++p) {
    t({p, 0}) = 1.0;
    t({p, 1}) = f.values[p];
  }
  return t;
}

std::size_t AmpFunctionBuilder::variable(std::vector<double> grid) {
  if (grid.empty()) throw ArgumentError("variable grid is empty");
  var_wires_.push_back(g_.add_input(WireType::Var, 1, grid.size())[0]);
  grids_.push_back(std::move(grid));
  uses_.emplace_back();
  return grids_.size() - 1;
}

std::size_t AmpFunctionBuilder::function(std::size_t variable, const GridFunction& f) {
  if (variable >= grids_.size()) throw ArgumentError("unknown variable");
  if (f.grid != grids_[variable]) throw ArgumentError("function grid does not match the variable grid");
  GateNode node = gate(GateKind::Table, {kNoWire});
  node.table = function_tensor(f);
  const std::size_t out = g_.add_node(std::move(node), WireType::Amp)[0];
  uses_[variable].push_back(g_.nodes().size() - 1);
  return out;
}

std::size_t AmpFunctionBuilder::constant(double x) {
  GateNode node = gate(GateKind::ConstFloat, {});
  node.value = x;
  return g_.add_node(std::move(node), WireType::Amp)[0];
}

std::size_t AmpFunctionBuilder::plus(std::size_t a, std::size_t b) {
  return g_.add_node(gate(GateKind::Plus, {a, b}), WireType::Amp)[0];
}

std::size_t AmpFunctionBuilder::times(std::size_t a, std::size_t b) {
  return g_.add_node(gate(GateKind::Times, {a, b}), WireType::Amp)[0];
}

void AmpFunctionBuilder::output(std::size_t amp) { out_.push_back(amp); }

CircuitGraph AmpFunctionBuilder::build() {
  CircuitGraph g = g_;
  for (std::size_t v = 0; v < grids_.size(); ++v) {
    if (uses_[v].empty()) throw ArgumentError("variable is never used");
    const auto copies = fan_out(g, var_wires_[v], uses_[v].size());
    for (std::size_t k = 0; k < copies.size(); ++k) g.mutable_nodes()[uses_[v][k]].inputs = {copies[k]};
  }
  for (auto w : out_) g.add_output({w});
  g.topological_order();
  return g;
}

void validate(const FnnSpec& s) {
  if (s.widths.size() < 2) throw ArgumentError("network needs at least one layer");
  const std::size_t layers = s.widths.size() - 1;
  if (s.weights.size() != layers || s.biases.size() != layers || s.activations.size() != layers) {
    throw ArgumentError("per-layer weights, biases and activations required");
  }
  for (std::size_t k = 0; k < layers; ++k) {
    if (s.widths[k] == 0 || s.widths[k + 1] == 0) throw ArgumentError("layer widths must be positive");
    if (s.weights[k].size() != s.widths[k + 1] * s.widths[k]) throw ArgumentError("weight matrix shape mismatch");
    if (s.biases[k].size() != s.widths[k + 1]) throw ArgumentError("bias vector shape mismatch");
    if (s.activations[k].size() < 2) throw ArgumentError("activation polynomial must have degree >= 1");
  }
}

std::vector<double> fnn_forward(const FnnSpec& s, std::span<const double> x) {
  validate(s);
  if (x.size() != s.widths[0]) throw ArgumentError("input size does not match network");
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t k = 0; k + 1 < s.widths.size(); ++k) {
    std::vector<double> next(s.widths[k + 1]);
    for (std::size_t i = 0; i < next.size(); ++i) {
      double u = s.biases[k][i];
      for (std::size_t j = 0; j < y.size(); ++j) u += s.weights[k][i * y.size() + j] * y[j];
      double power = 1.0, sum = 0.0;
      for (double c : s.activations[k]) {
        sum += c * power;
        power *= u;
      }
      next[i] = sum;
    }
    y = std::move(next);
  }
  return y;
}

CircuitGraph compile_fnn(const FnnSpec& s) {
  validate(s);
  CircuitGraph g;
  auto constant = [&](double x) {
    GateNode node = gate(GateKind::ConstFloat, {});
    node.value = x;
    return g.add_node(std::move(node), WireType::Amp)[0];
  };
  auto plus = [&](std::size_t a, std::size_t c) { return g.add_node(gate(GateKind::Plus, {a, c}), WireType::Amp)[0]; };
  auto times = [&](std::size_t a, std::size_t c) { return g.add_node(gate(GateKind::Times, {a, c}), WireType::Amp)[0]; };

  std::vector<std::size_t> y = g.add_input(WireType::Amp, s.widths[0]);
  for (std::size_t k = 0; k + 1 < s.widths.size(); ++k) {
    std::vector<std::size_t> next;
    for (std::size_t i = 0; i < s.widths[k + 1]; ++i) {
      std::size_t u = constant(s.biases[k][i]);
      for (std::size_t j = 0; j < y.size(); ++j) u = plus(u, times(constant(s.weights[k][i * y.size() + j]), y[j]));
      const auto& c = s.activations[k];
      std::size_t r = constant(c.back());
      for (std::size_t m = c.size() - 1; m-- > 0;) r = plus(times(r, u), constant(c[m]));
      next.push_back(r);
    }
    y = std::move(next);
  }
  for (auto w : y) g.add_output({w});
  return g;
}

std::vector<double> eval_amp_circuit(const CircuitGraph& g, std::span<const double> inputs, bool memo,
                                     AmpEvalStats* stats) {
  g.topological_order();
  const auto& wires = g.wires();
  std::size_t n_inputs = 0;
  for (const auto& group : g.inputs()) n_inputs += group.size();
  if (inputs.size() != n_inputs) throw ArgumentError("every input wire must be bound");

  std::vector<std::optional<Tensor>> input_value(wires.size());
  std::vector<std::size_t> producer(wires.size(), kNoWire);
  std::size_t k = 0;
  for (const auto& group : g.inputs()) {
    for (auto w : group) {
      const double x = inputs[k++];
      if (wires[w].type == WireType::Amp) {
        input_value[w] = float_encode(x);
      } else if (wires[w].type == WireType::Var) {
        if (!(x >= 0.0) || x != std::floor(x) || x >= static_cast<double>(wires[w].extent)) {
          throw ArgumentError("variable input must be a grid index");
        }
        input_value[w] = one_hot(wires[w].extent, static_cast<std::size_t>(x));
      } else {
        throw ArgumentError("amplitude circuits take amp or var inputs");
      }
    }
  }
  for (std::size_t n = 0; n < g.nodes().size(); ++n) {
    for (auto w : g.nodes()[n].outputs) producer[w] = n;
  }

  std::size_t contractions = 0;
  std::vector<std::optional<std::vector<Tensor>>> cache(g.nodes().size());
  std::function<Tensor(std::size_t)> wire_value = [&](std::size_t w) -> Tensor {
    if (input_value[w]) return *input_value[w];
    const std::size_t n = producer[w];
    const GateNode& node = g.nodes()[n];
    const std::size_t slot =
        static_cast<std::size_t>(std::find(node.outputs.begin(), node.outputs.end(), w) - node.outputs.begin());
    if (memo && cache[n]) return (*cache[n])[slot];
    std::vector<Tensor> out;
    switch (node.kind) {
      case GateKind::Plus:
      case GateKind::Times:
        out.push_back(apply_binary(gate_tensor(node.kind), wire_value(node.inputs[0]), wire_value(node.inputs[1])));
        break;
      case GateKind::ConstFloat: out.push_back(gate_tensor(node.kind, 0, node.value)); break;
      case GateKind::Table: out.push_back(contract(wire_value(node.inputs[0]), node.table, {{0, 0}})); break;
      case GateKind::Delta: {
        auto [a, b] = copy_through_delta(wire_value(node.inputs[0]));
        out.push_back(std::move(a));
        out.push_back(std::move(b));
        break;
      }
      default: throw StructureError(to_string(node.kind) + " node in an amplitude circuit");
    }
    ++contractions;
    Tensor result = out[slot];
    if (memo) cache[n] = std::move(out);
    return result;
  };

  std::vector<double> result;
  for (const auto& group : g.outputs()) {
    for (auto w : group) result.push_back(float_decode(wire_value(w)));
  }
  if (stats) stats->contractions = contractions;
  return result;
}

nlohmann::json to_json(const CircuitGraph& g) {
  nlohmann::json j;
  j["version"] = 1;
  j["wires"] = nlohmann::json::array();
  for (const auto& w : g.wires()) j["wires"].push_back({{"type", to_string(w.type)}, {"extent", w.extent}});
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : g.nodes()) {
    nlohmann::json node{{"kind", to_string(n.kind)}, {"inputs", n.inputs}, {"outputs", n.outputs}};
    if (n.kind == GateKind::ConstBit) node["bit"] = n.bit;
    if (n.kind == GateKind::ConstFloat) node["value"] = n.value;
    if (n.kind == GateKind::Table) {
      std::vector<double> values;
      for (std::size_t p = 0; p < n.table.extent(0); ++p) values.push_back(n.table({p, 1}).real());
      node["table"] = values;
    }
    j["nodes"].push_back(std::move(node));
  }
  j["inputs"] = g.inputs();
  j["outputs"] = g.outputs();
  return j;
}

CircuitGraph circuit_from_json(const nlohmann::json& j) {
  try {
    if (j.at("version").get<int>() != 1) throw DataError("unsupported circuit version");
    std::vector<Wire> wires;
    for (const auto& w : j.at("wires")) {
      wires.push_back({wire_type_from_string(w.at("type").get<std::string>()), w.at("extent").get<std::size_t>()});
    }
    std::vector<GateNode> nodes;
    for (const auto& n : j.at("nodes")) {
      GateNode node;
      node.kind = gate_kind_from_string(n.at("kind").get<std::string>());
      node.inputs = n.at("inputs").get<std::vector<std::size_t>>();
      node.outputs = n.at("outputs").get<std::vector<std::size_t>>();
      if (node.kind == GateKind::ConstBit) node.bit = n.at("bit").get<int>();
      if (node.kind == GateKind::ConstFloat) node.value = n.at("value").get<double>();
      if (node.kind == GateKind::Table) {
        const auto values = n.at("table").get<std::vector<double>>();
        node.table = function_tensor({values, values});
      }
      nodes.push_back(std::move(node));
    }
    return CircuitGraph::from_parts(std::move(wires), std::move(nodes),
                                    j.at("inputs").get<std::vector<std::vector<std::size_t>>>(),
                                    j.at("outputs").get<std::vector<std::vector<std::size_t>>>());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed circuit JSON: ") + e.what());
  }
}

nlohmann::json to_json(const FnnSpec& s) {
  return {{"widths", s.widths}, {"weights", s.weights}, {"biases", s.biases}, {"activations", s.activations}};
}

FnnSpec fnn_from_json(const nlohmann::json& j) {
  FnnSpec s;
  try {
    s.widths = j.at("widths").get<std::vector<std::size_t>>();
    s.weights = j.at("weights").get<std::vector<std::vector<double>>>();
    s.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    for (const auto& a : j.at("activations")) {
      if (a.is_string()) {
        const auto name = a.get<std::string>();
        if (name == "identity") {
          s.activations.push_back({0.0, 1.0});
        } else if (name == "square") {
          s.activations.push_back({0.0, 0.0, 1.0});
        } else {
          throw UnsupportedFeature("activation '" + name + "' is not a polynomial");
        }
      } else {
        s.activations.push_back(a.get<std::vector<double>>());
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed network JSON: ") + e.what());
  }
  validate(s);
  return s;
}

}  // namespace tnf
