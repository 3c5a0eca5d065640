#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tnf/circuit.hpp"
#include "tnf/errors.hpp"

using namespace tnf;

namespace {

BitVec bits(std::uint64_t v, std::size_t w) { return BitVec::from_uint(v, w); }

Tensor bit_vector(int b) {
  Tensor v({2});
  v({static_cast<std::size_t>(b)}) = 1.0;
  return v;
}

Tensor apply2(const Tensor& gate, const Tensor& a, const Tensor& b) {
  return contract(contract(gate, a, {{0, 0}}), b, {{0, 0}});
}

std::uint64_t eval_uint(const CircuitGraph& g, std::vector<BitVec> in) {
  const auto out = eval_binary(g, in);
  EXPECT_EQ(out.size(), 1u);
  return out[0].to_uint();
}

FnnSpec random_fnn(std::vector<std::size_t> widths, std::size_t degree, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FnnSpec s;
  s.widths = widths;
  for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
    std::vector<double> w(widths[k + 1] * widths[k]), b(widths[k + 1]), a(degree + 1);
    for (auto& x : w) x = u(rng);
    for (auto& x : b) x = u(rng);
    for (auto& x : a) x = u(rng);
    s.weights.push_back(w);
    s.biases.push_back(b);
    s.activations.push_back(a);
  }
  return s;
}

}  // namespace

TEST(GateTensor, LogicEntries) {
  const Tensor x = gate_tensor(GateKind::Xor), a = gate_tensor(GateKind::And), o = gate_tensor(GateKind::Or);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q) {
      EXPECT_EQ(apply2(x, bit_vector(p), bit_vector(q)), bit_vector(p ^ q));
      EXPECT_EQ(apply2(a, bit_vector(p), bit_vector(q)), bit_vector(p & q));
      EXPECT_EQ(apply2(o, bit_vector(p), bit_vector(q)), bit_vector(p | q));
    }
  EXPECT_EQ(x({1, 1, 0}), Complex(1.0, 0.0));
  EXPECT_EQ(a({1, 1, 1}), Complex(1.0, 0.0));
}

TEST(GateTensor, DeltaCopiesBits) {
  const Tensor d = gate_tensor(GateKind::Delta);
  for (int b = 0; b < 2; ++b) {
    const Tensor m = contract(d, bit_vector(b), {{0, 0}});
    EXPECT_EQ(m, outer(bit_vector(b), bit_vector(b)));
  }
}

TEST(GateTensor, PlusAndTimesOnEncodedFloats) {
  EXPECT_EQ(apply2(gate_tensor(GateKind::Plus), float_encode(2.0), float_encode(3.0)), float_encode(5.0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0.0, 10.0);
  for (int k = 0; k < 100; ++k) {
    const double x = n(rng), y = n(rng);
    EXPECT_EQ(float_decode(apply2(gate_tensor(GateKind::Plus), float_encode(x), float_encode(y))), x + y);
    EXPECT_EQ(float_decode(apply2(gate_tensor(GateKind::Times), float_encode(x), float_encode(y))), x * y);
  }
}

TEST(FloatEncoding, RoundTripAndErrors) {
  const Tensor e = float_encode(2.5);
  EXPECT_EQ(e({0}), Complex(1.0, 0.0));
  EXPECT_EQ(e({1}), Complex(2.5, 0.0));
  EXPECT_EQ(float_encode(0.0)({1}), Complex(0.0, 0.0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0.0, 1e3);
  for (int k = 0; k < 100; ++k) {
    const double x = n(rng);
    EXPECT_EQ(float_decode(float_encode(x)), x);
  }
  EXPECT_THROW(float_decode(Tensor({2}, {Complex{2.0, 0.0}, Complex{1.0, 0.0}})), RepresentationError);
  EXPECT_THROW(float_decode(Tensor({3})), RepresentationError);
}

TEST(Adders, HalfAdderTruthTable) {
  const CircuitGraph g = build_half_adder();
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const auto out = eval_binary(g, std::vector<BitVec>{bits(a, 1), bits(b, 1)});
      EXPECT_EQ(out[0].to_uint(), static_cast<std::uint64_t>(a ^ b));
      EXPECT_EQ(out[1].to_uint(), static_cast<std::uint64_t>(a & b));
    }
}

TEST(Adders, FullAdderTruthTable) {
  const CircuitGraph g = build_full_adder();
  for (int v = 0; v < 8; ++v) {
    const int a = v & 1, b = (v >> 1) & 1, c = (v >> 2) & 1;
    const auto out = eval_binary(g, std::vector<BitVec>{bits(a, 1), bits(b, 1), bits(c, 1)});
    EXPECT_EQ(out[0].to_uint() + 2 * out[1].to_uint(), static_cast<std::uint64_t>(a + b + c));
  }
}

TEST(Adders, ExamplesAndExhaustiveSixBits) {
  EXPECT_EQ(eval_uint(build_adder(3), {bits(5, 3), bits(3, 3)}), 8u);
  for (std::size_t n = 1; n <= 6; ++n) {
    const CircuitGraph g = build_adder(n);
    std::size_t errors = 0;
    for (std::uint64_t x = 0; x < (1u << n); ++x)
      for (std::uint64_t y = 0; y < (1u << n); ++y) errors += eval_uint(g, {bits(x, n), bits(y, n)}) != x + y;
    EXPECT_EQ(errors, 0u) << n;
  }
}

TEST(Multiplier, ExamplesAndExhaustiveFiveBits) {
  EXPECT_EQ(eval_uint(build_multiplier(4, 3), {bits(13, 4), bits(5, 3)}), 65u);
  EXPECT_EQ(eval_uint(build_multiplier(4, 3), {bits(13, 4), bits(0, 3)}), 0u);
  for (std::size_t m = 1; m <= 5; ++m)
    for (std::size_t n = 1; n <= 5; ++n) {
      const CircuitGraph g = build_multiplier(m, n);
      std::size_t errors = 0;
      for (std::uint64_t x = 0; x < (1u << m); ++x)
        for (std::uint64_t y = 0; y < (1u << n); ++y) errors += eval_uint(g, {bits(x, m), bits(y, n)}) != x * y;
      EXPECT_EQ(errors, 0u) << m << "x" << n;
    }
}

TEST(Square, SingleInputAndExhaustiveFiveBits) {
  EXPECT_EQ(eval_uint(build_square(2), {bits(3, 2)}), 9u);
  EXPECT_EQ(eval_uint(build_square(3), {bits(0, 3)}), 0u);
  for (std::size_t n = 1; n <= 5; ++n) {
    const CircuitGraph g = build_square(n);
    ASSERT_EQ(g.inputs().size(), 1u);
    ASSERT_EQ(g.inputs()[0].size(), n);
    std::size_t errors = 0;
    for (std::uint64_t x = 0; x < (1u << n); ++x) errors += eval_uint(g, {bits(x, n)}) != x * x;
    EXPECT_EQ(errors, 0u) << n;
  }
}

TEST(CircuitGraph, IdentityWireAndCycles) {
  CircuitGraph id;
  id.add_output(id.add_input(WireType::Bit, 3));
  EXPECT_EQ(eval_binary(id, std::vector<BitVec>{bits(5, 3)})[0], bits(5, 3));

  // XOR whose output feeds its own input through a DELTA.
  std::vector<Wire> wires(4, Wire{WireType::Bit, 2});
  GateNode x;
  x.kind = GateKind::Xor;
  x.inputs = {0, 3};
  x.outputs = {1};
  GateNode d;
  d.kind = GateKind::Delta;
  d.inputs = {1};
  d.outputs = {2, 3};
  EXPECT_THROW(CircuitGraph::from_parts(wires, {x, d}, {{0}}, {{2}}), StructureError);
}

TEST(CircuitGraph, RejectsUncopiedFanOut) {
  CircuitGraph g;
  const auto a = g.add_input(WireType::Bit, 1);
  GateNode x;
  x.kind = GateKind::Xor;
  x.inputs = {a[0], a[0]};
  g.add_output(g.add_node(x, WireType::Bit));
  EXPECT_THROW(g.topological_order(), StructureError);
}

TEST(CircuitGraph, JsonRoundTrip) {
  const CircuitGraph g = build_multiplier(3, 2);
  const CircuitGraph back = circuit_from_json(nlohmann::json::parse(to_json(g).dump()));
  EXPECT_EQ(to_json(back), to_json(g));
  EXPECT_EQ(eval_uint(back, {bits(7, 3), bits(3, 2)}), 21u);
  EXPECT_THROW(circuit_from_json(nlohmann::json{{"version", 1}}), DataError);
}

TEST(AmpFunction, SumWithZeroIsIdentity) {
  std::vector<double> grid;
  for (int p = 0; p < 16; ++p) grid.push_back(-1.0 + p / 8.0);
  GridFunction f{grid, {}};
  for (double x : grid) f.values.push_back(std::sin(x));
  AmpFunctionBuilder b;
  const auto v = b.variable(grid);
  b.output(b.plus(b.function(v, f), b.constant(0.0)));
  const CircuitGraph g = b.build();
  for (std::size_t p = 0; p < 16; ++p) {
    const double idx = static_cast<double>(p);
    EXPECT_EQ(eval_amp_circuit(g, std::span<const double>(&idx, 1))[0], f.values[p]);
  }
}

TEST(AmpFunction, SameVariableProductUsesCopies) {
  std::vector<double> grid;
  for (int p = 0; p < 16; ++p) grid.push_back(0.25 * p - 2.0);
  const GridFunction f{grid, grid};
  AmpFunctionBuilder b;
  const auto v = b.variable(grid);
  b.output(b.times(b.function(v, f), b.function(v, f)));
  const CircuitGraph g = b.build();
  std::size_t tables = 0, deltas = 0;
  for (const auto& n : g.nodes()) {
    tables += n.kind == GateKind::Table;
    deltas += n.kind == GateKind::Delta;
  }
  EXPECT_EQ(tables, 2u);
  EXPECT_EQ(deltas, 1u);
  for (std::size_t p = 0; p < 16; ++p) {
    const double idx = static_cast<double>(p);
    EXPECT_NEAR(eval_amp_circuit(g, std::span<const double>(&idx, 1))[0], grid[p] * grid[p], 1e-12);
  }
}

TEST(AmpFunction, PolynomialCombinationMatchesPointwise) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> grid;
  for (int p = 0; p < 32; ++p) grid.push_back(-1.5 + 3.0 * p / 31.0);
  double cf[4], cg[4];
  for (auto& c : cf) c = u(rng);
  for (auto& c : cg) c = u(rng);
  auto poly = [](const double* c, double x) { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); };
  GridFunction f{grid, {}}, h{grid, {}};
  for (double x : grid) {
    f.values.push_back(poly(cf, x));
    h.values.push_back(poly(cg, x));
  }
  AmpFunctionBuilder b;
  const auto v = b.variable(grid);
  const auto fx = b.function(v, f);
  b.output(b.plus(b.times(fx, b.function(v, h)), fx));
  const CircuitGraph g = b.build();
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const double idx = static_cast<double>(p);
    const double expect = f.values[p] * h.values[p] + f.values[p];
    EXPECT_NEAR(eval_amp_circuit(g, std::span<const double>(&idx, 1))[0], expect, 1e-12);
  }
}

TEST(AmpFunction, GridMismatchRejected) {
  AmpFunctionBuilder b;
  const auto v = b.variable({0.0, 1.0, 2.0});
  EXPECT_THROW(b.function(v, GridFunction{{0.0, 1.0}, {0.0, 1.0}}), ArgumentError);
  EXPECT_THROW(b.function(v, GridFunction{{0.0, 1.0, 3.0}, {0.0, 1.0, 2.0}}), ArgumentError);
}

TEST(CompileFnn, SingleNeuron) {
  FnnSpec s{{1, 1}, {{2.0}}, {{1.0}}, {{0.0, 0.0, 1.0}}};
  const double x = 3.0;
  EXPECT_EQ(eval_amp_circuit(compile_fnn(s), std::span<const double>(&x, 1))[0], 49.0);
}

TEST(CompileFnn, ZeroWeightsGiveActivationOfBias) {
  FnnSpec s{{3, 2}, {std::vector<double>(6, 0.0)}, {{0.5, -2.0}}, {{1.0, 2.0, 3.0}}};
  const std::vector<double> x{0.3, -4.0, 7.0};
  const auto y = eval_amp_circuit(compile_fnn(s), x);
  EXPECT_EQ(y[0], 1.0 + 2.0 * 0.5 + 3.0 * 0.25);
  EXPECT_EQ(y[1], 1.0 - 4.0 + 12.0);
}

TEST(CompileFnn, RandomCubicNetworkMatchesForwardPass) {
  std::mt19937_64 rng(4);
  const FnnSpec s = random_fnn({2, 4, 1}, 3, rng);
  const CircuitGraph g = compile_fnn(s);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const std::vector<double> x{u(rng), u(rng)};
    const double direct = fnn_forward(s, x)[0];
    const double circuit = eval_amp_circuit(g, x)[0];
    worst = std::max(worst, std::abs(direct - circuit));
  }
  EXPECT_LT(worst, 1e-12);
}

TEST(CompileFnn, RejectsBadSpecs) {
  EXPECT_THROW(compile_fnn(FnnSpec{{1, 1}, {{1.0}}, {{0.0}}, {{1.0}}}), ArgumentError);
  EXPECT_THROW(compile_fnn(FnnSpec{{2, 1}, {{1.0}}, {{0.0}}, {{0.0, 1.0}}}), ArgumentError);
  EXPECT_THROW(fnn_from_json(nlohmann::json::parse(
                   R"({"widths":[1,1],"weights":[[1.0]],"biases":[[0.0]],"activations":["tanh"]})")),
               UnsupportedFeature);
}

TEST(CompileFnn, JsonRoundTrip) {
  std::mt19937_64 rng(5);
  const FnnSpec s = random_fnn({3, 2, 2}, 2, rng);
  const FnnSpec back = fnn_from_json(nlohmann::json::parse(to_json(s).dump()));
  EXPECT_EQ(back.widths, s.widths);
  EXPECT_EQ(back.weights, s.weights);
  EXPECT_EQ(back.biases, s.biases);
  EXPECT_EQ(back.activations, s.activations);
}

TEST(AmpEval, MemoMatchesNaiveAndCountsNodesOnce) {
  std::mt19937_64 rng(6);
  const FnnSpec s = random_fnn({3, 3, 2}, 2, rng);
  const CircuitGraph g = compile_fnn(s);
  const std::vector<double> x{0.1, -0.7, 1.3};
  AmpEvalStats memo, naive;
  const auto a = eval_amp_circuit(g, x, true, &memo);
  const auto b = eval_amp_circuit(g, x, false, &naive);
  EXPECT_EQ(a, b);
  EXPECT_LE(memo.contractions, g.nodes().size());
  EXPECT_GT(naive.contractions, memo.contractions);
}

TEST(AmpEval, DeepCompositionIsLinearWithMemo) {
  // f(u) = u*u - u, composed `depth` times; u is shared by both consumers.
  auto build = [](std::size_t depth) {
    CircuitGraph g;
    std::size_t u = g.add_input(WireType::Amp, 1)[0];
    for (std::size_t k = 0; k < depth; ++k) {
      GateNode c;
      c.kind = GateKind::ConstFloat;
      c.value = -1.0;
      const std::size_t minus_one = g.add_node(c, WireType::Amp)[0];
      GateNode sq;
      sq.kind = GateKind::Times;
      sq.inputs = {u, u};
      const std::size_t uu = g.add_node(sq, WireType::Amp)[0];
      GateNode neg;
      neg.kind = GateKind::Times;
      neg.inputs = {minus_one, u};
      const std::size_t mu = g.add_node(neg, WireType::Amp)[0];
      GateNode p;
      p.kind = GateKind::Plus;
      p.inputs = {uu, mu};
      u = g.add_node(p, WireType::Amp)[0];
    }
    g.add_output({u});
    return g;
  };
  const CircuitGraph g = build(20);
  const double x = 0.5;
  AmpEvalStats stats;
  double expect = x;
  for (int k = 0; k < 20; ++k) expect = expect * expect + (-1.0) * expect;
  EXPECT_EQ(eval_amp_circuit(g, std::span<const double>(&x, 1), true, &stats)[0], expect);
  EXPECT_EQ(stats.contractions, 20u * 4u);

  // Without the memo the count doubles with every level.
  AmpEvalStats s10, s11;
  eval_amp_circuit(build(10), std::span<const double>(&x, 1), false, &s10);
  eval_amp_circuit(build(11), std::span<const double>(&x, 1), false, &s11);
  EXPECT_GT(s11.contractions, 2 * s10.contractions);
}

TEST(AmpEval, UnboundInputRejected) {
  const CircuitGraph g = compile_fnn(FnnSpec{{2, 1}, {{1.0, 1.0}}, {{0.0}}, {{0.0, 1.0}}});
  const double x = 1.0;
  EXPECT_THROW(eval_amp_circuit(g, std::span<const double>(&x, 1)), ArgumentError);
}
