#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "lemon/ad/graph.hpp"
#include "lemon/util/rng.hpp"

using namespace lemon;
using ad::Graph;
using ad::Var;

namespace {

Tensor<double> random_tensor(Rng& rng, std::vector<std::int64_t> shape, double lo = -1,
                             double hi = 1, double keepout = 0.0) {
  Tensor<double> t(std::move(shape));
  for (std::int64_t i = 0; i < t.numel(); ++i) {
    double v = rng.uniform(lo, hi);
    while (keepout > 0 && std::abs(v) < keepout) v = rng.uniform(lo, hi);
    t[i] = v;
  }
  return t;
}

// Projects any output to a scalar with fixed pseudo-random weights so the
// gradient exercises every element.
template <typename T>
Var<T> project(Graph<T>& g, const Var<T>& v) {
  Tensor<T> w(v.value.shape());
  Rng rng(99);
  for (std::int64_t i = 0; i < w.numel(); ++i) w[i] = static_cast<T>(rng.uniform(0.5, 1.5));
  return ad::reduce_sum(ad::mul(v, g.constant(w)));
}

using BuildFn = std::function<Var<double>(Graph<double>&, const Var<double>&)>;

// Central finite differences against the tape gradient.
void check_grad(const char* name, const Tensor<double>& x0, const BuildFn& build,
                double tol = 5e-6) {
  CAPTURE(name);
  Graph<double> g;
  auto x = g.leaf(x0.clone(), true);
  auto loss = build(g, x);
  REQUIRE(loss.value.numel() == 1);
  g.backward(loss);
  const Tensor<double> ga = g.grad(x);

  auto eval = [&](const Tensor<double>& xt) {
    Graph<double> gg;
    auto xv = gg.leaf(xt.clone(), true);
    return build(gg, xv).value[0];
  };
  for (std::int64_t i = 0; i < x0.numel(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(x0[i]));
    Tensor<double> xp = x0.clone();
    Tensor<double> xm = x0.clone();
    xp[i] += h;
    xm[i] -= h;
    const double fd = (eval(xp) - eval(xm)) / (2 * h);
    const double err = std::abs(fd - ga[i]) / std::max({std::abs(fd), std::abs(ga[i]), 1e-8});
    CHECK(err <= tol);
  }
}

}  // namespace

TEST_CASE("elementwise and reduction gradients match finite differences") {
  Rng rng(3);
  const auto x0 = random_tensor(rng, {3, 4}, -1, 1, 0.05);
  const auto other = random_tensor(rng, {3, 4}, 0.2, 1.2);

  check_grad("add", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::add(x, g.constant(other)));
  });
  check_grad("sub", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::sub(g.constant(other), x));
  });
  check_grad("mul", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::mul(x, g.constant(other)));
  });
  check_grad("div", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::div(g.constant(other), ad::adds(ad::square(x), 0.5)));
  });
  check_grad("muls", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::muls(x, -1.7));
  });
  check_grad("reduce_mean", x0, [&](Graph<double>& g, const Var<double>& x) {
    (void)g;
    return ad::reduce_mean(ad::square(x));
  });
  check_grad("leaky_relu", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::leaky_relu(x, 0.2));
  });
  check_grad("gelu", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::gelu(x));
  });
  check_grad("sigmoid", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::sigmoid(x));
  });
  check_grad("exp", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::expv(x));
  });
  check_grad("log", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::logv(ad::adds(ad::square(x), 0.3)));
  });
  check_grad("sqrt", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::sqrtv(ad::adds(ad::square(x), 0.3)));
  });
  check_grad("pow", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::powc(ad::adds(ad::square(x), 0.3), 1.7));
  });
  check_grad("abs", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::absv(x));
  });
  check_grad("clamp", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::clampv(x, -0.7, 0.7));
  }, 5e-5);  // clamp boundaries are kinks; keepout only protects zero
}

TEST_CASE("matmul gradients across transpose flags") {
  Rng rng(5);
  for (const bool ta : {false, true})
    for (const bool tb : {false, true}) {
      const auto x0 = random_tensor(rng, {3, 4});
      const auto w = random_tensor(rng, tb ? std::vector<std::int64_t>{5, 4}
                                           : std::vector<std::int64_t>{4, 5});
      // d/dx with x as left operand (possibly transposed)
      const auto xl = ta ? random_tensor(rng, {4, 3}) : x0;
      check_grad("matmul_left", xl, [&](Graph<double>& g, const Var<double>& x) {
        return project(g, ad::matmul(x, g.constant(w), ta, tb, 0.7));
      });
      // d/dw with w as right operand
      check_grad("matmul_right", w, [&](Graph<double>& g, const Var<double>& x) {
        return project(g, ad::matmul(g.constant(xl), x, ta, tb, 1.3));
      });
    }
}

TEST_CASE("structural op gradients") {
  Rng rng(9);
  const auto x0 = random_tensor(rng, {4, 6}, -1, 1, 0.02);

  check_grad("add_rowvec", random_tensor(rng, {1, 6}), [&](Graph<double>& g, const Var<double>& v) {
    return project(g, ad::add_rowvec(g.constant(x0), v));
  });
  check_grad("concat_slice", x0, [&](Graph<double>& g, const Var<double>& x) {
    auto c = ad::concat_rows<double>({ad::slice_rows(x, 2, 4), ad::slice_rows(x, 0, 2)});
    auto cc = ad::concat_cols<double>({ad::slice_cols(c, 3, 6), ad::slice_cols(c, 0, 3)});
    return project(g, cc);
  });
  check_grad("gather", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::gather_rows(x, {2, 0, 0, 3, 1}));
  });
  check_grad("edge_features", x0, [&](Graph<double>& g, const Var<double>& x) {
    const std::vector<std::vector<std::int64_t>> nbrs = {{1, 2}, {0, 3}, {3, 0}, {2, 1}};
    return project(g, ad::edge_features(x, nbrs));
  });
  check_grad("rowgroup_max", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::rowgroup_max(x, 2));
  });
  check_grad("colwise_max", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::colwise_max(x));
  });
  check_grad("colwise_mean", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::colwise_mean(x));
  });
  check_grad("softmax", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::softmax_rows(x));
  });
}

TEST_CASE("layernorm, losses and norm gradients") {
  Rng rng(13);
  const auto x0 = random_tensor(rng, {4, 6});
  const auto gamma = random_tensor(rng, {6}, 0.5, 1.5);
  const auto beta = random_tensor(rng, {6});

  check_grad("layernorm_x", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::layernorm_rows(x, g.constant(gamma), g.constant(beta), 1e-5));
  });
  check_grad("layernorm_gamma", gamma, [&](Graph<double>& g, const Var<double>& v) {
    return project(g, ad::layernorm_rows(g.constant(x0), v, g.constant(beta), 1e-5));
  });
  check_grad("layernorm_beta", beta, [&](Graph<double>& g, const Var<double>& v) {
    return project(g, ad::layernorm_rows(g.constant(x0), g.constant(gamma), v, 1e-5));
  });
  check_grad("cross_entropy", random_tensor(rng, {5}), [&](Graph<double>& g, const Var<double>& x) {
    (void)g;
    return ad::cross_entropy_logits(x, 2);
  });
  check_grad("l2norm", random_tensor(rng, {3}), [&](Graph<double>& g, const Var<double>& x) {
    (void)g;
    return ad::l2norm(x);
  });
  const auto a = random_tensor(rng, {8});
  const auto b = random_tensor(rng, {8});
  check_grad("cosine_a", a, [&](Graph<double>& g, const Var<double>& x) {
    return ad::cosine_sim(x, g.constant(b));
  });
  check_grad("cosine_b", b, [&](Graph<double>& g, const Var<double>& x) {
    return ad::cosine_sim(g.constant(a), x);
  });
}

TEST_CASE("conv2d value and gradients") {
  Rng rng(17);
  const std::int64_t h = 6, w = 6, cin = 2, cout = 3;
  const auto x0 = random_tensor(rng, {h * w, cin});
  const auto wt = random_tensor(rng, {cout, cin * 9});
  const auto bias = random_tensor(rng, {cout});

  check_grad("conv_x", x0, [&](Graph<double>& g, const Var<double>& x) {
    return project(g, ad::conv2d(x, g.constant(wt), g.constant(bias), h, w, 3, 3, 2, 1));
  });
  check_grad("conv_w", wt, [&](Graph<double>& g, const Var<double>& v) {
    return project(g, ad::conv2d(g.constant(x0), v, g.constant(bias), h, w, 3, 3, 2, 1));
  });
  check_grad("conv_b", bias, [&](Graph<double>& g, const Var<double>& v) {
    return project(g, ad::conv2d(g.constant(x0), g.constant(wt), v, h, w, 3, 3, 2, 1));
  });
}

TEST_CASE("softmax rows sum to one and sigmoid(0) is one half") {
  Graph<double> g(false);
  Rng rng(21);
  auto s = ad::softmax_rows(g.constant(random_tensor(rng, {5, 7}, -3, 3)));
  for (std::int64_t i = 0; i < 5; ++i) {
    double sum = 0;
    for (std::int64_t j = 0; j < 7; ++j) sum += s.value.at(i, j);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  auto sig = ad::sigmoid(g.constant(Tensor<double>::zeros({3})));
  for (std::int64_t i = 0; i < 3; ++i) CHECK(sig.value[i] == 0.5);
}

TEST_CASE("non-recording graphs keep no tape") {
  Graph<float> g(false);
  auto a = g.constant(Tensor<float>::full({4, 4}, 2.f));
  auto b = ad::square(a);
  CHECK(b.value[0] == 4.f);
  CHECK(g.size() == 0);
  CHECK(!b.recorded());
}
