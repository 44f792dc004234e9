#include <doctest.h>

#include <cmath>

#include "artbank/errors.hpp"
#include "artbank/grad_check.hpp"
#include "artbank/ops.hpp"
#include "artbank/optimizer.hpp"
#include "artbank/rng.hpp"
#include "oracles.hpp"

using namespace artbank;

namespace {

Tensor random_matrix(Rng& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  return rng.normal_tensor({r, c}, scale);
}

}  // namespace

TEST_CASE("tensor construction and shape checks") {
  Tensor t({2, 3}, 1.5);
  CHECK(t.size() == 6);
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 3);
  CHECK_THROWS_AS(Tensor({2, 0}), DimensionError);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  CHECK_THROWS_AS(t.reshaped({4}), DimensionError);
  CHECK(t.reshaped({3, 2}).shape() == Shape{3, 2});
  CHECK(Tensor::identity(3).at(1, 1) == 1.0);
  CHECK(Tensor::identity(3).at(1, 2) == 0.0);
}

TEST_CASE("matmul matches the naive oracle") {
  Rng rng(1);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t m = 1 + rng.index(5), k = 1 + rng.index(5), n = 1 + rng.index(5);
    const Tensor a = random_matrix(rng, m, k), b = random_matrix(rng, k, n);
    const Tensor got = matmul(a, b);
    const Tensor want = oracle::to_tensor(oracle::matmul(oracle::from_tensor(a), oracle::from_tensor(b)));
    CHECK(max_abs_diff(got, want) <= 1e-12);
  }
  CHECK_THROWS_AS(matmul(Tensor({2, 3}), Tensor({2, 3})), DimensionError);
}

TEST_CASE("softmax rows sum to one and survive large inputs") {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor a = random_matrix(rng, 4, 7, 50.0);
    const Tensor s = softmax_rows(a);
    for (std::size_t i = 0; i < 4; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < 7; ++j) {
        CHECK(s.at(i, j) >= 0.0);
        row += s.at(i, j);
      }
      CHECK(std::abs(row - 1.0) <= 1e-9);
    }
    CHECK(max_abs_diff(s, oracle::to_tensor(oracle::softmax_rows(oracle::from_tensor(a)))) <= 1e-12);
  }
  const Tensor big = Tensor::matrix({{1000.0, 999.0}});
  CHECK(softmax_rows(big).all_finite());
  CHECK_THROWS_AS(softmax_rows(Tensor::matrix({{NAN, 1.0}})), NumericError);
}

TEST_CASE("channel_norm standardizes each row") {
  Rng rng(3);
  const Tensor x = random_matrix(rng, 3, 10, 2.0);
  const Tensor y = channel_norm(x, 1e-8);
  CHECK(max_abs_diff(y, oracle::to_tensor(oracle::channel_norm(oracle::from_tensor(x), 1e-8))) <= 1e-12);
  for (std::size_t i = 0; i < 3; ++i) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t j = 0; j < 10; ++j) mean += y.at(i, j);
    for (std::size_t j = 0; j < 10; ++j) sq += y.at(i, j) * y.at(i, j);
    CHECK(std::abs(mean / 10) <= 1e-12);
    CHECK(std::abs(sq / 10 - 1.0) <= 1e-6);
  }
}

TEST_CASE("conv2d matches a direct convolution for stride 1 and 2") {
  Rng rng(4);
  for (std::size_t stride : {1u, 2u}) {
    const Tensor in = rng.normal_tensor({2, 6, 6});
    const Tensor w = rng.normal_tensor({3, 2, 3, 3});
    const Tensor b = rng.normal_tensor({3});
    const Tensor got = conv2d(in, w, b, stride);
    oracle::Volume vin(2, oracle::Mat(6, std::vector<double>(6)));
    for (std::size_t c = 0; c < 2; ++c)
      for (std::size_t y = 0; y < 6; ++y)
        for (std::size_t x = 0; x < 6; ++x) vin[c][y][x] = in[(c * 6 + y) * 6 + x];
    std::vector<oracle::Volume> vw(3, oracle::Volume(2, oracle::Mat(3, std::vector<double>(3))));
    for (std::size_t o = 0; o < 3; ++o)
      for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t ky = 0; ky < 3; ++ky)
          for (std::size_t kx = 0; kx < 3; ++kx) vw[o][i][ky][kx] = w[((o * 2 + i) * 3 + ky) * 3 + kx];
    const auto want = oracle::conv2d(vin, vw, {b[0], b[1], b[2]}, static_cast<int>(stride));
    REQUIRE(got.dim(1) == want[0].size());
    double diff = 0.0;
    for (std::size_t o = 0; o < 3; ++o)
      for (std::size_t y = 0; y < want[o].size(); ++y)
        for (std::size_t x = 0; x < want[o][y].size(); ++x)
          diff = std::max(diff, std::abs(got[(o * got.dim(1) + y) * got.dim(2) + x] - want[o][y][x]));
    CHECK(diff <= 1e-12);
  }
}

TEST_CASE("every differentiable op passes grad_check") {
  Rng rng(5);
  ParameterSet p;
  p.add("a", rng.normal_tensor({3, 4}));
  p.add("b", rng.normal_tensor({4, 3}));
  p.add("c", rng.normal_tensor({3, 4}));
  p.add("col", rng.normal_tensor({3, 1}));
  p.add("row", rng.normal_tensor({1, 4}));
  p.add("f", Tensor::matrix({{0.3}}));
  p.add("img", rng.normal_tensor({2, 4, 4}));
  p.add("w", rng.normal_tensor({3, 2, 3, 3}, 0.5));
  p.add("bias", rng.normal_tensor({3}));
  const auto g = [&](const char* n) { return p.get(n); };

  SUBCASE("matrix ops") {
    const auto r = grad_check(
        [&] {
          const Var m = matmul(g("a"), g("b"));
          const Var s = softmax_rows(add(m, transpose(matmul(transpose(g("b")), transpose(g("a"))))));
          const Var n = channel_norm(mul(g("a"), g("c")), 1e-8);
          const Var mixed = mix(mul_rows(g("a"), g("col")), mul_cols(g("c"), g("row")), g("f"));
          const Var pos = sqrt(add_scalar(clamp_min(g("c"), -0.5), 1.0));
          return add(add(sum_squares(s), sum(mul(n, mixed))),
                     add(sum(scale(pos, 0.7)), sum(gelu(sub(g("a"), g("c"))))));
        },
        p);
    CHECK(r.max_rel_error < 1e-6);
    CHECK(r.elements_checked == p.element_count());
  }
  SUBCASE("spatial ops") {
    const auto r = grad_check(
        [&] {
          const Var c1 = conv2d(g("img"), g("w"), g("bias"), 1);
          const Var c2 = conv2d(g("img"), g("w"), g("bias"), 2);
          const Var up = upsample_nearest2x(c2);
          const Var flat = reshape(add_channel_bias(add(c1, up), g("bias")), {3, 16});
          return add(sum_squares(flat),
                     mse(gelu(c1), Tensor({3, 4, 4}, 0.1)));
        },
        p);
    CHECK(r.max_rel_error < 1e-6);
  }
  SUBCASE("concat_rows") {
    const auto r = grad_check([&] { return sum_squares(concat_rows({g("a"), g("c"), transpose(g("b"))})); }, p);
    CHECK(r.max_rel_error < 1e-6);
  }
}

TEST_CASE("grad_check reports a wrong gradient with the parameter name") {
  ParameterSet p;
  p.add("x", Tensor::matrix({{0.5, -1.0}}));
  // A deliberately wrong backward rule (gradient doubled).
  const auto broken = [&] {
    const Var x = p.get("x");
    Tensor v = x.value();
    for (double& e : v.data()) e = e * e;
    const Var sq = Var::from_op("broken_square", v, {x}, [](const BackwardContext& c) {
      for (std::size_t i = 0; i < c.gout.size(); ++i) (*c.gin[0])[i] += 4.0 * (*c.in[0])[i] * c.gout[i];
    });
    return sum(sq);
  };
  const auto r = grad_check(broken, p);
  CHECK(r.max_rel_error > 0.1);
  CHECK(r.worst_parameter == "x");
}

TEST_CASE("non-finite op outputs raise NumericError naming the op") {
  const Var x = Var::leaf(Tensor::matrix({{-1.0}}));
  try {
    (void)sqrt(x);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("sqrt") != std::string::npos);
  }
}

TEST_CASE("autograd accumulates through shared subexpressions") {
  const Var x = Var::leaf(Tensor::matrix({{3.0}}));
  const Var y = mul(x, x);
  const Var z = add(y, y);  // 2 x^2
  z.backward();
  CHECK(x.grad()[0] == doctest::Approx(12.0));
}

TEST_CASE("constant inputs produce constant nodes") {
  const Var a = Var::constant(Tensor::matrix({{1.0, 2.0}}));
  const Var b = scale(a, 2.0);
  CHECK_FALSE(b.requires_grad());
  CHECK(b.value()[1] == 4.0);
}

TEST_CASE("parameter sets reject duplicates and clone deeply") {
  ParameterSet p;
  p.add("w", Tensor::matrix({{1.0}}));
  CHECK_THROWS_AS(p.add("w", Tensor::matrix({{2.0}})), ContractError);
  CHECK_THROWS_AS(p.get("missing"), NotFoundError);
  ParameterSet q = p.clone();
  q.get("w").mutable_value()[0] = 5.0;
  CHECK(p.get("w").value()[0] == 1.0);
}

TEST_CASE("adam first step moves by the learning rate") {
  ParameterSet p;
  p.add("x", Tensor::matrix({{0.0}}));
  sum(p.get("x")).backward();
  Adam adam;
  adam.step(p);
  CHECK(p.get("x").value()[0] == doctest::Approx(-0.001).epsilon(1e-9));
  CHECK(adam.steps_taken() == 1);
}

TEST_CASE("adam requires populated gradients") {
  ParameterSet p;
  p.add("x", Tensor::matrix({{0.0}}));
  Adam adam;
  CHECK_THROWS_AS(adam.step(p), ContractError);
}

TEST_CASE("adam minimizes a quadratic") {
  ParameterSet p;
  p.add("x", Tensor::matrix({{2.0, -3.0}}));
  Adam adam(AdamConfig{0.05});
  for (int i = 0; i < 2000; ++i) {
    sum_squares(p.get("x")).backward();
    adam.step(p);
    p.zero_grad();
  }
  CHECK(std::abs(p.get("x").value()[0]) < 1e-2);
  CHECK(std::abs(p.get("x").value()[1]) < 1e-2);
}

TEST_CASE("rng streams are reproducible and labelled seeds differ") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  CHECK(derive_seed(1, "i_m") != derive_seed(1, "attention"));
  CHECK(derive_seed(1, "i_m") != derive_seed(2, "i_m"));
  CHECK(derive_seed(7, std::uint64_t{0}) != derive_seed(7, std::uint64_t{1}));
  Rng r(9);
  double s = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = r.normal();
    s += v;
    sq += v * v;
  }
  CHECK(std::abs(s / n) < 0.03);
  CHECK(std::abs(sq / n - 1.0) < 0.04);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    CHECK(r.index(7) < 7);
  }
}
