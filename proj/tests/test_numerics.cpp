#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cwrs/autodiff.hpp"
#include "cwrs/checkpoint.hpp"
#include "cwrs/errors.hpp"
#include "cwrs/params.hpp"
#include "cwrs/rng.hpp"

using namespace cwrs;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (size_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-scale, scale);
  return t;
}

}  // namespace

TEST_CASE("tensor shape bookkeeping") {
  Tensor t({2, 3});
  CHECK(t.rank() == 2);
  CHECK(t.numel() == 6);
  t.at(1, 2) = 5.0;
  CHECK(t[5] == 5.0);
  Tensor r = t.reshaped({3, 2});
  CHECK(r.at(2, 1) == 5.0);
  CHECK_THROWS_AS(t.reshaped({4, 2}), ShapeMismatch);
  CHECK(Tensor::scalar(7.0).scalar_value() == 7.0);
  CHECK(Tensor::scalar(7.0).rank() == 0);
  CHECK_THROWS_AS(t.scalar_value(), ShapeMismatch);
  Tensor f = Tensor::full({2, 2}, 3.5);
  CHECK(f[3] == 3.5);
  Tensor inf = Tensor::vec({1.0, INFINITY});
  CHECK_FALSE(inf.all_finite());
}

TEST_CASE("activation values match the standard definitions") {
  Var sm = softmax(constant(Tensor::vec({0.0, 0.0})));
  CHECK(sm->value.at(0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sm->value.at(1) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK(sigmoid(constant(Tensor::scalar(0.0)))->value.scalar_value() == doctest::Approx(0.5));

  Var lr = leaky_relu(constant(Tensor::vec({-1.0, 2.0})), 0.01);
  CHECK(lr->value.at(0) == doctest::Approx(-0.01));
  CHECK(lr->value.at(1) == doctest::Approx(2.0));

  // softplus at large negative/positive inputs stays finite and tight
  CHECK(softplus(constant(Tensor::scalar(-800.0)))->value.scalar_value() ==
        doctest::Approx(0.0).epsilon(1e-300));
  CHECK(softplus(constant(Tensor::scalar(800.0)))->value.scalar_value() ==
        doctest::Approx(800.0));
}

TEST_CASE("softmax is a shift-invariant probability vector") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor x = random_tensor({7}, rng, 5.0);
    Tensor shifted = x;
    for (size_t i = 0; i < shifted.numel(); ++i) shifted[i] += 123.25;
    Tensor a = softmax(constant(x))->value;
    Tensor b = softmax(constant(shifted))->value;
    double sum = 0;
    for (int i = 0; i < 7; ++i) {
      sum += a.at(i);
      CHECK(a.at(i) == doctest::Approx(b.at(i)).epsilon(1e-12));
      CHECK(a.at(i) > 0);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("softmax on a matrix acts row-wise") {
  Rng rng(5);
  Tensor x = random_tensor({3, 4}, rng, 3.0);
  Tensor y = softmax(constant(x))->value;
  for (int i = 0; i < 3; ++i) {
    double mx = x.at(i, 0);
    for (int j = 1; j < 4; ++j) mx = std::max(mx, x.at(i, j));
    double z = 0;
    for (int j = 0; j < 4; ++j) z += std::exp(x.at(i, j) - mx);
    for (int j = 0; j < 4; ++j)
      CHECK(y.at(i, j) == doctest::Approx(std::exp(x.at(i, j) - mx) / z).epsilon(1e-14));
  }
}

TEST_CASE("matmul equals the literal triple loop") {
  Rng rng(3);
  Tensor a = random_tensor({3, 4}, rng);
  Tensor b = random_tensor({4, 2}, rng);
  Tensor c = matmul(constant(a), constant(b))->value;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = 0;
      for (int k = 0; k < 4; ++k) s += a.at(i, k) * b.at(k, j);
      CHECK(c.at(i, j) == s);  // identical accumulation order -> bitwise equal
    }

  Tensor v = random_tensor({4}, rng);
  Tensor mv = matmul(constant(a), constant(v))->value;
  CHECK(mv.shape() == std::vector<int>{3});
  for (int i = 0; i < 3; ++i) {
    double s = 0;
    for (int k = 0; k < 4; ++k) s += a.at(i, k) * v.at(k);
    CHECK(mv.at(i) == s);
  }

  CHECK_THROWS_AS(matmul(constant(a), constant(random_tensor({3, 2}, rng))), ShapeMismatch);
}

TEST_CASE("linear equals x*W + b row by row") {
  Rng rng(8);
  Tensor x = random_tensor({2, 3}, rng);
  Tensor w = random_tensor({3, 2}, rng);
  Tensor b = random_tensor({2}, rng);
  Tensor y = linear(constant(x), constant(w), constant(b))->value;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      double s = b.at(j);
      for (int k = 0; k < 3; ++k) s += x.at(i, k) * w.at(k, j);
      CHECK(y.at(i, j) == doctest::Approx(s).epsilon(1e-15));
    }
}

TEST_CASE("backward of sum(W x) broadcasts x into the weight gradient") {
  ParamStore ps(1);
  Param& w = ps.get_or_create("w", {3, 4}, Init::uniform_symmetric, 0.5);
  Rng rng(2);
  Tensor x = random_tensor({4}, rng);
  Var loss = sum(matmul(leaf(w), constant(x)));
  ps.zero_all_grads();
  backward(loss);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) CHECK(w.grad.at(i, j) == doctest::Approx(x.at(j)).epsilon(1e-15));
}

TEST_CASE("params outside the graph keep zero gradients") {
  ParamStore ps(1);
  Param& used = ps.get_or_create("used", {2}, Init::uniform_symmetric, 1.0);
  Param& unused = ps.get_or_create("unused", {2}, Init::uniform_symmetric, 1.0);
  ps.zero_all_grads();
  backward(sum(mul(leaf(used), leaf(used))));
  CHECK(unused.grad.at(0) == 0.0);
  CHECK(unused.grad.at(1) == 0.0);
  CHECK(used.grad.at(0) == doctest::Approx(2 * used.value.at(0)));
}

TEST_CASE("gradients flow through shared subexpressions") {
  // loss = sum(x*x + x) => dloss/dx = 2x + 1
  ParamStore ps(4);
  Param& x = ps.get_or_create("x", {3}, Init::uniform_symmetric, 2.0);
  Var lx = leaf(x);
  ps.zero_all_grads();
  backward(sum(add(mul(lx, lx), lx)));
  for (int i = 0; i < 3; ++i)
    CHECK(x.grad.at(i) == doctest::Approx(2 * x.value.at(i) + 1).epsilon(1e-14));
}

TEST_CASE("backward is additive across losses") {
  ParamStore ps(9);
  Param& p = ps.get_or_create("p", {4}, Init::uniform_symmetric, 1.0);
  auto f = [&] { return sum(mul(leaf(p), leaf(p))); };
  auto g = [&] { return dot(leaf(p), constant(Tensor::vec({1, 2, 3, 4}))); };
  ps.zero_all_grads();
  backward(f());
  Tensor gf = p.grad;
  ps.zero_all_grads();
  backward(g());
  Tensor gg = p.grad;
  ps.zero_all_grads();
  backward(add(f(), g()));
  for (int i = 0; i < 4; ++i)
    CHECK(p.grad.at(i) == doctest::Approx(gf.at(i) + gg.at(i)).epsilon(1e-14));
}

TEST_CASE("softmax cross-entropy gradient vanishes at a confident truth") {
  // pick the true class; with the input already putting ~all mass there the
  // gradient wrt the logits tends to zero
  ParamStore ps(0);
  Param& z = ps.get_or_create("z", {3}, Init::zeros);
  z.value = Tensor::vec({40.0, 0.0, 0.0});
  ps.zero_all_grads();
  backward(neg(logv(pick(softmax(leaf(z)), 0))));
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(z.grad.at(i)) < 1e-12);
}

TEST_CASE("every exposed op passes the finite-difference check") {
  ParamStore ps(13);
  Param& a = ps.get_or_create("a", {3, 4}, Init::uniform_symmetric, 0.8);
  Param& b = ps.get_or_create("b", {3, 4}, Init::uniform_symmetric, 0.8);
  Param& m = ps.get_or_create("m", {4, 3}, Init::uniform_symmetric, 0.8);
  Param& v = ps.get_or_create("v", {4}, Init::uniform_symmetric, 0.8);
  Param& w = ps.get_or_create("w", {4, 2}, Init::uniform_symmetric, 0.8);
  Param& bias = ps.get_or_create("bias", {2}, Init::uniform_symmetric, 0.8);
  std::vector<Param*> params = ps.all();

  auto check = [&](const char* tag, const std::function<Var()>& build) {
    GradCheckReport rep = grad_check(build, params, 1e-4);
    INFO(tag, ": worst ", rep.worst.param, "[", rep.worst.index, "] analytic ",
         rep.worst.analytic, " numeric ", rep.worst.numeric);
    CHECK(rep.pass);
  };

  check("add/scale", [&] { return sum(scale(add(leaf(a), leaf(b)), 1.7)); });
  check("sub/mul", [&] { return sum(mul(sub(leaf(a), leaf(b)), leaf(b))); });
  check("neg/mean", [&] { return mean(neg(leaf(a))); });
  check("matmul", [&] { return sum(matmul(leaf(a), leaf(m))); });
  check("matvec", [&] { return sum(matmul(leaf(a), leaf(v))); });
  check("transpose", [&] { return sum(matmul(transpose(leaf(a)), leaf(a))); });
  check("linear/leaky", [&] {
    return sum(leaky_relu(linear(leaf(a), leaf(w), leaf(bias)), 0.01));
  });
  check("sigmoid", [&] { return sum(sigmoid(leaf(a))); });
  check("softmax/log/pick", [&] { return neg(logv(pick(softmax(leaf(v)), 2))); });
  check("softplus", [&] { return mean(softplus(leaf(b))); });
  check("dot", [&] { return dot(leaf(v), leaf(v)); });
  check("concat rows", [&] { return sum(concat({leaf(a), leaf(b)}, 0)); });
  check("concat cols/mul", [&] {
    Var c = concat({leaf(a), leaf(b)}, 1);
    return sum(mul(c, c));
  });
  check("stack/pack/reshape", [&] {
    Var rows = stack_rows({leaf(v), leaf(v)});
    Var s = pack_scalars({sum(rows), dot(leaf(v), leaf(v)), mean(leaf(a))});
    return sum(mul(reshape(s, {3}), s));
  });
}

TEST_CASE("quadratic loss gradient check is near machine precision") {
  ParamStore ps(21);
  Param& x = ps.get_or_create("x", {5}, Init::uniform_symmetric, 2.0);
  auto build = [&] { return dot(leaf(x), leaf(x)); };
  GradCheckReport rep = grad_check(build, {&x}, 1e-7);
  CHECK(rep.pass);
  CHECK(rep.max_rel_err < 1e-7);
}

TEST_CASE("adam leaves params alone on zero gradients") {
  ParamStore ps(2);
  Param& p = ps.get_or_create("p", {3}, Init::uniform_symmetric, 1.0);
  Tensor before = p.value;
  AdamState st;
  ps.zero_all_grads();
  adam_step(st, {&p});
  CHECK(p.value == before);
}

TEST_CASE("first adam step moves by about lr against the gradient sign") {
  ParamStore ps(2);
  Param& p = ps.get_or_create("p", {2}, Init::zeros);
  p.value = Tensor::vec({1.0, -1.0});
  p.grad = Tensor::vec({0.3, -0.2});
  AdamState st;  // lr 0.001
  adam_step(st, {&p});
  // bias-corrected first step: delta = -lr * g / (|g| + eps) ~= -lr * sign(g)
  CHECK(p.value.at(0) == doctest::Approx(1.0 - 0.001 * (0.3 / (0.3 + 1e-8))).epsilon(1e-12));
  CHECK(p.value.at(1) == doctest::Approx(-1.0 + 0.001 * (0.2 / (0.2 + 1e-8))).epsilon(1e-12));
  CHECK(st.lr == 0.001);  // the default the training loop relies on
}

TEST_CASE("adam minimizes a separable quadratic") {
  ParamStore ps(3);
  Param& x = ps.get_or_create("x", {2}, Init::zeros);
  x.value = Tensor::vec({4.0, -7.0});
  AdamState st;
  st.lr = 0.05;
  Tensor target = Tensor::vec({3.0, 1.0});
  for (int step = 0; step < 2000; ++step) {
    Var d = sub(leaf(x), constant(target));
    ps.zero_all_grads();
    backward(dot(d, d));
    adam_step(st, {&x});
  }
  CHECK(x.value.at(0) == doctest::Approx(3.0).epsilon(1e-4));
  CHECK(x.value.at(1) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("non-finite values and gradients are hard errors") {
  CHECK_THROWS_AS(logv(constant(Tensor::vec({0.0}))), NonFiniteValue);
  CHECK_THROWS_AS(logv(constant(Tensor::vec({-1.0}))), NonFiniteValue);
  ParamStore ps(6);
  Param& p = ps.get_or_create("p", {1}, Init::zeros);
  p.value = Tensor::vec({1e308});
  CHECK_THROWS_AS(backward(sum(mul(leaf(p), leaf(p)))), NonFiniteValue);
}

TEST_CASE("parameter initialization is name-seeded, not order-seeded") {
  ParamStore first(42);
  Param& a1 = first.get_or_create("alpha", {4}, Init::uniform_symmetric, 0.5);
  Param& b1 = first.get_or_create("beta", {4}, Init::uniform_symmetric, 0.5);
  ParamStore second(42);
  Param& b2 = second.get_or_create("beta", {4}, Init::uniform_symmetric, 0.5);
  Param& a2 = second.get_or_create("alpha", {4}, Init::uniform_symmetric, 0.5);
  CHECK(a1.value == a2.value);
  CHECK(b1.value == b2.value);
  ParamStore third(43);
  CHECK_FALSE(third.get_or_create("alpha", {4}, Init::uniform_symmetric, 0.5).value == a1.value);
  CHECK_THROWS_AS(first.get_or_create("alpha", {5}, Init::zeros), ShapeMismatch);
}

TEST_CASE("checkpoints round-trip bitwise with their manifest") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "cwrs_ckpt_test";
  fs::create_directories(dir);
  std::string path = (dir / "weights.ckpt").string();

  ParamStore ps(7);
  ps.get_or_create("entity/W1/e", {4}, Init::uniform_symmetric, 0.5);
  ps.get_or_create("relation/mod/p", {2, 3}, Init::fan_in);
  ps.get_or_create("cf/h", {5}, Init::fan_in);
  save_checkpoint(path, ps, {{"n_emb", "4"}, {"note", "round trip"}});

  LoadedCheckpoint lc = load_checkpoint(path);
  CHECK(lc.tensors.size() == 3);
  CHECK(lc.manifest.at("n_emb") == "4");
  CHECK(lc.manifest.at("note") == "round trip");
  for (const auto& [name, t] : lc.tensors) CHECK(t == ps.find(name)->value);

  ParamStore fresh(0);
  for (const auto& [name, t] : lc.tensors) fresh.adopt(name, t);
  restore_params(fresh, lc.tensors);
  CHECK(fresh.find("cf/h")->value == ps.find("cf/h")->value);

  // re-saving restored params reproduces the file byte-for-byte
  std::string path2 = (dir / "weights2.ckpt").string();
  save_checkpoint(path2, fresh, lc.manifest);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);

  // corrupting the magic is detected
  s1[0] = 'X';
  std::ofstream bad((dir / "bad.ckpt").string(), std::ios::binary);
  bad << s1;
  bad.close();
  CHECK_THROWS_AS(load_checkpoint((dir / "bad.ckpt").string()), CheckpointError);
  CHECK_THROWS_AS(load_checkpoint((dir / "missing.ckpt").string()), IoFailure);
  fs::remove_all(dir);
}
