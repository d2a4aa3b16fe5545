#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "ssan/errors.hpp"
#include "ssan/grad_check.hpp"
#include "ssan/matrix.hpp"
#include "ssan/rng.hpp"
#include "ssan/tape.hpp"

using namespace ssan;

TEST_CASE("affine forward") {
  Matrix x = Matrix::from_rows({{1, 2}});
  Matrix eye = Matrix::from_rows({{1, 0}, {0, 1}});
  Matrix b0(1, 2);
  CHECK(affine(x, eye, b0) == x);

  Matrix zero(1, 2);
  Matrix w = Matrix::from_rows({{5, -2}, {7, 3}});
  Matrix b = Matrix::from_rows({{3, 4}});
  CHECK(affine(zero, w, b) == b);

  Matrix x2 = Matrix::from_rows({{1, 1}});
  Matrix w2 = Matrix::from_rows({{2, 3}, {4, 5}});
  Matrix b2 = Matrix::from_rows({{1, 1}});
  CHECK(affine(x2, w2, b2) == Matrix::from_rows({{7, 9}}));

  CHECK_THROWS_AS(affine(x, Matrix(3, 2), b0), DimensionError);
  CHECK_THROWS_WITH_AS(affine(x, Matrix(3, 2), b0),
                       doctest::Contains("1x2"), DimensionError);
  CHECK_THROWS_AS(affine(x, eye, Matrix(2, 2)), DimensionError);
}

TEST_CASE("leaky_relu forward and slope domain") {
  Matrix x = Matrix::from_rows({{2, -1, 0}});
  Matrix y = leaky_relu(x, 0.01);
  CHECK(y(0, 0) == 2.0);
  CHECK(y(0, 1) == -0.01);
  CHECK(y(0, 2) == 0.0);
  CHECK_THROWS_AS(leaky_relu(x, 0.0), ParameterError);
  CHECK_THROWS_AS(leaky_relu(x, 1.0), ParameterError);
  CHECK_THROWS_AS(leaky_relu(x, -0.5), ParameterError);
}

TEST_CASE("leaky_relu gradient is 1 at exactly zero") {
  Tape t;
  auto x = t.param("x", Matrix::from_rows({{0.0, -2.0, 3.0}}));
  auto loss = t.sum_all(t.leaky_relu(x, 0.01));
  GradientMap g = t.backward(loss);
  CHECK(g.at("x")(0, 0) == 1.0);
  CHECK(g.at("x")(0, 1) == 0.01);
  CHECK(g.at("x")(0, 2) == 1.0);
}

TEST_CASE("softmax_rows oracle values") {
  Matrix z(1, 3);  // [0,0,0]
  Matrix u = softmax_rows(z, 5.0);
  for (int j = 0; j < 3; ++j) CHECK(u(0, j) == doctest::Approx(1.0 / 3).epsilon(1e-15));

  Matrix c = Matrix::from_rows({{4.2, 4.2, 4.2, 4.2}});
  Matrix uc = softmax_rows(c, 0.7);
  for (int j = 0; j < 4; ++j) CHECK(uc(0, j) == doctest::Approx(0.25).epsilon(1e-15));

  Matrix r = Matrix::from_rows({{std::log(4.0), 0, 0}});
  Matrix p = softmax_rows(r, 1.0);
  CHECK(p(0, 0) == doctest::Approx(4.0 / 6).epsilon(1e-14));
  CHECK(p(0, 1) == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK(p(0, 2) == doctest::Approx(1.0 / 6).epsilon(1e-14));

  CHECK_THROWS_AS(softmax_rows(r, 0.0), ParameterError);
  CHECK_THROWS_AS(softmax_rows(r, -1.0), ParameterError);
}

TEST_CASE("softmax_rows invariants: row sums, range, shift invariance") {
  Rng rng(99, Rng::Stream::Init);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix x(3, 5);
    for (auto& v : x.data()) v = rng.uniform(-8, 8);
    const double T = 0.5 + trial;
    Matrix p = softmax_rows(x, T);
    for (std::size_t i = 0; i < p.rows(); ++i) {
      double s = 0;
      for (double v : p.row(i)) {
        CHECK(v > 0.0);
        CHECK(v < 1.0);
        s += v;
      }
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
    // adding a per-row constant must not change the result
    Matrix shifted = x;
    for (std::size_t i = 0; i < shifted.rows(); ++i)
      for (double& v : shifted.row(i)) v += 3.75 * (1 + static_cast<double>(i));
    Matrix q = softmax_rows(shifted, T);
    for (std::size_t i = 0; i < p.size(); ++i)
      CHECK(std::abs(p.data()[i] - q.data()[i]) < 1e-12);
  }
}

TEST_CASE("matrix kernels are deterministic (bit-identical reruns)") {
  Rng rng(7, Rng::Stream::Init);
  Matrix a(7, 11), b(11, 5);
  for (auto& v : a.data()) v = rng.gaussian();
  for (auto& v : b.data()) v = rng.gaussian();
  CHECK(matmul(a, b) == matmul(a, b));
  CHECK(softmax_rows(a, 3.0) == softmax_rows(a, 3.0));
  CHECK(mean_rows(a) == mean_rows(a));
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  std::vector<double> v{1.0, 3.0, 3.0, 2.0};
  CHECK(argmax(v) == 1);
  std::vector<double> w{5.0, 5.0};
  CHECK(argmax(w) == 0);
}

TEST_CASE("gather_cols validates labels and names the row") {
  Matrix x = Matrix::from_rows({{1, 2}, {3, 4}});
  std::vector<int> good{1, 0};
  Matrix g = gather_cols(x, good);
  CHECK(g(0, 0) == 2);
  CHECK(g(1, 0) == 3);
  std::vector<int> bad{0, 2};
  CHECK_THROWS_WITH_AS(gather_cols(x, bad), doctest::Contains("row 1"), LabelError);
}

TEST_CASE("backward: sum of squares gives 2w") {
  Tape t;
  auto w = t.param("w", Matrix::from_rows({{1, 2}}));
  auto loss = t.sum_squares(w);
  CHECK(t.scalar(loss) == 5.0);
  GradientMap g = t.backward(loss);
  CHECK(g.at("w") == Matrix::from_rows({{2, 4}}));
}

TEST_CASE("backward: untouched leaf receives zeros") {
  Tape t;
  auto w = t.param("w", Matrix::from_rows({{1, 2}}));
  t.param("unused", Matrix::from_rows({{3, 4, 5}}));
  GradientMap g = t.backward(t.sum_squares(w));
  CHECK(g.at("unused") == Matrix(1, 3));
}

TEST_CASE("backward: constants never appear in the gradient map") {
  Tape t;
  auto w = t.param("w", Matrix::from_rows({{1, 2}}));
  auto c = t.constant(Matrix::from_rows({{10, 20}}));
  GradientMap g = t.backward(t.sum_all(t.hadamard(w, c)));
  CHECK(g.size() == 1);
  CHECK(g.count("w") == 1);
  CHECK(g.at("w") == Matrix::from_rows({{10, 20}}));
}

TEST_CASE("backward rejects non-scalar loss") {
  Tape t;
  auto w = t.param("w", Matrix::from_rows({{1, 2}}));
  CHECK_THROWS_AS(t.backward(t.scale(w, 2.0)), DimensionError);
}

TEST_CASE("backward twice on the same tape gives identical gradients") {
  Tape t;
  auto w = t.param("w", Matrix::from_rows({{1.5, -2}}));
  auto loss = t.sum_squares(t.leaky_relu(w, 0.01));
  GradientMap g1 = t.backward(loss);
  GradientMap g2 = t.backward(loss);
  CHECK(g1.at("w") == g2.at("w"));
}

TEST_CASE("duplicate parameter names are rejected") {
  Tape t;
  t.param("w", Matrix(1, 1));
  CHECK_THROWS_AS(t.param("w", Matrix(1, 1)), ParameterError);
}

namespace {

// A loss touching every differentiable op exposed by the tape, with
// shapes drawn from the seed.
Tape::NodeId everything_loss(Tape& t, const ParamMap& p,
                             const std::vector<int>& labels) {
  auto x = t.param("x", p.at("x"));
  auto w = t.param("w", p.at("w"));
  auto b = t.param("b", p.at("b"));
  auto v = t.param("v", p.at("v"));
  auto c = t.param("c", p.at("c"));
  auto d = t.param("d", p.at("d"));
  auto db = t.param("db", p.at("db"));

  auto z = t.leaky_relu(t.affine(x, w, b), 0.01);
  auto logits = t.affine(z, v, c);
  auto probs = t.softmax_rows(logits, 2.5);
  auto ce = t.scale(t.mean_all(t.gather_cols(t.log_clamped(probs), labels)), -1.0);

  auto dprob = t.logistic_clamped(t.affine(z, d, db));
  auto ld = t.mean_all(t.log_clamped(dprob));

  auto head = t.select_rows(z, {0});
  auto pair = t.select_rows(z, {1, 0});
  auto mu = t.mean_rows(t.concat_rows(head, pair));
  auto gap = t.sub(mu, t.mean_rows(z));
  auto l2 = t.sum_squares(gap);
  auto extra = t.sum_all(t.hadamard(t.add(mu, gap), t.scale(mu, 0.5)));

  auto lhs = t.add(ce, t.scale(ld, -0.3));
  auto rhs = t.add(l2, t.scale(extra, 0.21));
  return t.add(lhs, rhs);
}

}  // namespace

TEST_CASE("finite differences agree for every op across random shapes") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 24; ++seed) {
    Rng rng(seed, Rng::Stream::Init);
    const std::size_t n = 2 + seed % 3;
    const std::size_t din = 2 + (seed / 3) % 3;
    const std::size_t h = 2 + (seed / 2) % 2;
    const std::size_t K = 2 + seed % 2;

    ParamMap p;
    p["x"] = Matrix(n, din);
    p["w"] = Matrix(din, h);
    p["b"] = Matrix(1, h);
    p["v"] = Matrix(h, K);
    p["c"] = Matrix(1, K);
    p["d"] = Matrix(h, 1);
    p["db"] = Matrix(1, 1);
    for (auto& [name, m] : p)
      for (auto& val : m.data()) val = rng.gaussian() * 0.7;

    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i)
      labels[i] = static_cast<int>(rng.below(K));

    auto build = [&labels](Tape& t, const ParamMap& q) {
      return everything_loss(t, q, labels);
    };
    const double err = grad_check(build, p, 1e-5);
    CHECK_MESSAGE(err < 1e-4, "seed ", seed, " max rel error ", err);
    ++checked;
  }
  CHECK(checked >= 20);
}

TEST_CASE("grad_check oracle cases") {
  ParamMap p;
  p["w"] = Matrix::from_rows({{0.3, -1.2, 2.0}});

  auto quadratic = [](Tape& t, const ParamMap& q) {
    return t.sum_squares(t.param("w", q.at("w")));
  };
  CHECK(grad_check(quadratic, p, 1e-5) < 1e-6);

  auto zero_loss = [](Tape& t, const ParamMap& q) {
    auto w = t.param("w", q.at("w"));
    return t.sum_all(t.scale(w, 0.0));
  };
  CHECK(grad_check(zero_loss, p, 1e-5) == 0.0);

  int calls = 0;
  auto jitter = [&calls](Tape& t, const ParamMap& q) {
    auto w = t.param("w", q.at("w"));
    return t.scale(t.sum_squares(w), 1.0 + 0.5 * (calls++));
  };
  CHECK_THROWS_AS(grad_check(jitter, p, 1e-5), DeterminismError);

  CHECK_THROWS_AS(grad_check(quadratic, p, 0.0), ParameterError);
}

TEST_CASE("composite cross-entropy gradient matches finite differences") {
  Rng rng(42, Rng::Stream::Init);
  ParamMap p;
  p["w"] = Matrix(3, 4);
  p["b"] = Matrix(1, 4);
  for (auto& [name, m] : p)
    for (auto& v : m.data()) v = rng.gaussian() * 0.5;
  Matrix x(5, 3);
  for (auto& v : x.data()) v = rng.gaussian();
  std::vector<int> y{0, 3, 1, 2, 0};

  auto build = [&x, &y](Tape& t, const ParamMap& q) {
    auto w = t.param("w", q.at("w"));
    auto b = t.param("b", q.at("b"));
    auto logits = t.affine(t.constant(x), w, b);
    auto act = t.leaky_relu(logits, 0.01);
    auto probs = t.softmax_rows(act, 1.0);
    return t.scale(t.mean_all(t.gather_cols(t.log_clamped(probs), y)), -1.0);
  };
  CHECK(grad_check(build, p, 1e-5) < 1e-4);
}

TEST_CASE("rng streams are deterministic and distinct") {
  Rng a(123, Rng::Stream::Init);
  Rng b(123, Rng::Stream::Init);
  for (int i = 0; i < 16; ++i) CHECK(a.next() == b.next());

  Rng c(123, Rng::Stream::Split);
  Rng d(123, Rng::Stream::Init);
  bool all_equal = true;
  for (int i = 0; i < 16; ++i)
    if (c.next() != d.next()) all_equal = false;
  CHECK_FALSE(all_equal);
}

TEST_CASE("rng mappings stay in range") {
  Rng r(2024, Rng::Stream::Synth);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double g = r.gaussian();
    CHECK(std::isfinite(g));
    CHECK(r.below(7) < 7);
  }
  CHECK_THROWS_AS(r.below(0), ParameterError);
}
