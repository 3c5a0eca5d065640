#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tnf/tensor.hpp"

namespace tnf {

/// TABLE is a discretised single-variable function F_{p,i} = (1, f(x_p))_i
/// mapping a variable leg to an amplitude leg.
enum class GateKind { Xor, And, Or, Delta, Plus, Times, ConstBit, ConstFloat, Table };
std::string to_string(GateKind kind);
GateKind gate_kind_from_string(const std::string& s);

/// Bit legs carry basis vectors, amplitude legs carry (1, x), variable legs
/// carry a one-hot vector over a grid.
enum class WireType { Bit, Amp, Var };
std::string to_string(WireType type);

struct Wire {
  WireType type = WireType::Bit;
  std::size_t extent = 2;
};

struct GateNode {
  GateKind kind = GateKind::Xor;
  std::vector<std::size_t> inputs;
  std::vector<std::size_t> outputs;
  int bit = 0;         // ConstBit
  double value = 0.0;  // ConstFloat
  Tensor table;        // Table, extents (grid, 2)
};

/// (2,2,2) tensor for the binary gates, PLUS and TIMES; (2) for constants.
/// XOR/AND/OR/PLUS/TIMES have axes (in, in, out); DELTA is copy (in, out, out).
Tensor gate_tensor(GateKind kind, int bit = 0, double value = 0.0);

/// Directed acyclic gate graph. Wires have one producer: a node or the input
/// manifest. Bit and variable wires have exactly one consumer unless they are
/// outputs (then none); fan-out goes through DELTA. Amplitude wires may have
/// several consumers: a shared subgraph is referenced, not copied, and
/// evaluated once under memoisation.
class CircuitGraph {
 public:
  std::size_t add_wire(WireType type, std::size_t extent = 2);
  /// New input operand of `width` wires; returns the wire ids.
  std::vector<std::size_t> add_input(WireType type, std::size_t width, std::size_t extent = 2);
  /// Appends a node (its `outputs` are ignored), creating n_outputs wires of
  /// one type; returns them.
  std::vector<std::size_t> add_node(GateNode node, WireType output_type, std::size_t n_outputs = 1,
                                    std::size_t output_extent = 2);
  void add_output(std::vector<std::size_t> wires);
  /// Graph from stored parts (deserialisation); validated with topological_order.
  static CircuitGraph from_parts(std::vector<Wire> wires, std::vector<GateNode> nodes,
                                 std::vector<std::vector<std::size_t>> inputs,
                                 std::vector<std::vector<std::size_t>> outputs);

  const std::vector<Wire>& wires() const { return wires_; }
  const std::vector<GateNode>& nodes() const { return nodes_; }
  std::vector<GateNode>& mutable_nodes() { return nodes_; }
  const std::vector<std::vector<std::size_t>>& inputs() const { return inputs_; }
  const std::vector<std::vector<std::size_t>>& outputs() const { return outputs_; }

  /// Node indices in Kahn order (ties by index). StructureError on cycles,
  /// missing or duplicate producers and consumer-count violations.
  std::vector<std::size_t> topological_order() const;

 private:
  std::vector<Wire> wires_;
  std::vector<GateNode> nodes_;
  std::vector<std::vector<std::size_t>> inputs_;
  std::vector<std::vector<std::size_t>> outputs_;
};

/// Little-endian bit string: bit i weighs 2^i.
struct BitVec {
  std::vector<std::uint8_t> bits;

  static BitVec from_uint(std::uint64_t value, std::size_t width);
  std::uint64_t to_uint() const;
  friend bool operator==(const BitVec&, const BitVec&) = default;
};

// Fragment builders: append gates to `g` and return the produced wires.
struct SumCarry {
  std::size_t sum;
  std::size_t carry;
};
/// k copies of a bit or variable wire through a chain of DELTA nodes.
std::vector<std::size_t> fan_out(CircuitGraph& g, std::size_t wire, std::size_t k);
SumCarry half_adder(CircuitGraph& g, std::size_t a, std::size_t b);
SumCarry full_adder(CircuitGraph& g, std::size_t a, std::size_t b, std::size_t carry_in);
/// Ripple addition of little-endian operands of any widths; result has
/// max(width) + 1 bits.
std::vector<std::size_t> ripple_add(CircuitGraph& g, std::span<const std::size_t> x, std::span<const std::size_t> y);

CircuitGraph build_half_adder();  // inputs a, b; outputs sum, carry
CircuitGraph build_full_adder();  // inputs a, b, c; outputs sum, carry
CircuitGraph build_adder(std::size_t n_bits);
CircuitGraph build_multiplier(std::size_t m_bits, std::size_t n_bits);
CircuitGraph build_square(std::size_t n_bits);

/// Propagates basis vectors gate by gate in topological order. One BitVec per
/// input operand, one per output group. Non-basis intermediates raise
/// DataError.
std::vector<BitVec> eval_binary(const CircuitGraph& g, std::span<const BitVec> inputs);

Tensor float_encode(double x);
/// Requires component 0 == 1 within 1e-12 and a real value, else RepresentationError.
double float_decode(const Tensor& v);

/// Function sampled on a grid: values[p] = f(grid[p]).
struct GridFunction {
  std::vector<double> grid;
  std::vector<double> values;
};
Tensor function_tensor(const GridFunction& f);

/// Builds sums and products of single-variable functions. A variable used by
/// several TABLE nodes is copied on its variable leg with DELTA tensors; a
/// product of two functions of the same variable therefore multiplies two
/// separate TABLE tensors, one per copy.
class AmpFunctionBuilder {
 public:
  std::size_t variable(std::vector<double> grid);
  std::size_t function(std::size_t variable, const GridFunction& f);
  std::size_t constant(double x);
  std::size_t plus(std::size_t a, std::size_t b);
  std::size_t times(std::size_t a, std::size_t b);
  void output(std::size_t amp);
  CircuitGraph build();

 private:
  CircuitGraph g_;
  std::vector<std::size_t> var_wires_;
  std::vector<std::vector<double>> grids_;
  std::vector<std::vector<std::size_t>> uses_;  // TABLE node ids per variable
  std::vector<std::size_t> out_;
};

/// Feed-forward network y^(k) = sigma_k(W_k y^(k-1) + b_k) with polynomial
/// activations sigma_k(u) = sum_m activations[k][m] u^m.
struct FnnSpec {
  std::vector<std::size_t> widths;                    // widths[0] = input size
  std::vector<std::vector<double>> weights;           // layer k: widths[k+1] x widths[k], row-major
  std::vector<std::vector<double>> biases;            // layer k: widths[k+1]
  std::vector<std::vector<double>> activations;       // layer k: coefficients, degree >= 1
};
/// ArgumentError on inconsistent shapes or degree-0 activations.
void validate(const FnnSpec& spec);
std::vector<double> fnn_forward(const FnnSpec& spec, std::span<const double> x);
/// Amplitude circuit with one Amp input wire per network input and one output
/// group per network output. Activations use Horner form.
CircuitGraph compile_fnn(const FnnSpec& spec);

struct AmpEvalStats {
  /// Gate contractions performed.
  std::size_t contractions = 0;
};

/// Evaluates every output wire. `inputs` holds one number per input wire in
/// manifest order: the value for Amp wires, the grid index for Var wires.
/// With memo each node is contracted once; without it every consumer
/// re-evaluates its producers recursively.
std::vector<double> eval_amp_circuit(const CircuitGraph& g, std::span<const double> inputs, bool memo = true,
                                     AmpEvalStats* stats = nullptr);

nlohmann::json to_json(const CircuitGraph& g);
CircuitGraph circuit_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FnnSpec& spec);
/// UnsupportedFeature for a non-polynomial activation, DataError for malformed input.
FnnSpec fnn_from_json(const nlohmann::json& j);

}  // namespace tnf
