#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cilfair/error.hpp"
#include "cilfair/nn.hpp"
#include "cilfair/rng.hpp"

using namespace cilfair;

namespace {

Tensor2 random_batch(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor2 t(rows, cols);
  for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-1.5, 1.5);
  return t;
}

// central finite differences of a scalar loss with respect to every network
// parameter, compared against backward()'s analytic gradients
template <typename LossFn>
void check_param_gradients(Mlp net, const Tensor2& batch, LossFn loss_fn,
                           const std::optional<DropoutSpec>& dropout,
                           double rel_tol) {
  const ForwardResult fr = forward(net, batch, dropout);
  const LossGrad lg = loss_fn(fr.logits);
  const Gradients grads = backward(net, fr.cache, lg.grad_logits);

  const double h = 1e-6;
  auto loss_at = [&]() {
    const ForwardResult f = forward(net, batch, dropout);
    return loss_fn(f.logits).loss;
  };
  auto check_one = [&](double& param, double analytic) {
    const double keep = param;
    param = keep + h;
    const double up = loss_at();
    param = keep - h;
    const double down = loss_at();
    param = keep;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({1e-6, std::abs(fd), std::abs(analytic)});
    CHECK(std::abs(fd - analytic) / scale < rel_tol);
  };

  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    for (std::size_t i = 0; i < net.weights[l].size(); ++i) {
      check_one(net.weights[l].data()[i], grads.weights[l].data()[i]);
    }
    for (std::size_t i = 0; i < net.biases[l].size(); ++i) {
      check_one(net.biases[l][i], grads.biases[l][i]);
    }
  }
}

}  // namespace

TEST_CASE("init shapes, bound, zero biases, determinism") {
  const Mlp net = Mlp::init({3, 5, 2}, 9);
  REQUIRE(net.layer_count() == 2);
  CHECK(net.input_dim() == 3);
  CHECK(net.class_count() == 2);
  CHECK(net.weights[0].rows() == 5);
  CHECK(net.weights[0].cols() == 3);
  CHECK(net.weights[1].rows() == 2);
  CHECK(net.weights[1].cols() == 5);
  const double bound0 = std::sqrt(6.0 / (3 + 5));
  for (std::size_t i = 0; i < net.weights[0].size(); ++i) {
    CHECK(std::abs(net.weights[0].data()[i]) <= bound0);
  }
  for (const auto& b : net.biases) {
    for (double v : b) CHECK(v == 0.0);
  }
  CHECK(Mlp::init({3, 5, 2}, 9).weights[0] == net.weights[0]);
  CHECK_THROWS_AS(Mlp::init({4}, 0), ParamError);
  CHECK_THROWS_AS(Mlp::init({4, 0, 2}, 0), ParamError);
}

TEST_CASE("forward: zero weights give bias logits") {
  Mlp net = Mlp::init({2, 3, 2}, 1);
  for (auto& w : net.weights) {
    for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = 0.0;
  }
  net.biases[1] = {0.25, -0.75};
  Rng rng(2);
  const Tensor2 batch = random_batch(4, 2, rng);
  const ForwardResult fr = forward(net, batch);
  for (std::size_t r = 0; r < 4; ++r) {
    CHECK(fr.logits.at(r, 0) == 0.25);
    CHECK(fr.logits.at(r, 1) == -0.75);
  }
}

TEST_CASE("forward: hand-computed one-hidden-layer case") {
  Mlp net = Mlp::init({2, 2, 2}, 0);
  // W0 rows are output units over the 2 inputs
  net.weights[0] = Tensor2(2, 2, {1.0, -1.0, 0.5, 0.25});
  net.biases[0] = {0.1, -0.2};
  net.weights[1] = Tensor2(2, 2, {2.0, 0.0, 1.0, 1.0});
  net.biases[1] = {0.0, 0.5};
  Tensor2 in(1, 2, {1.0, 1.0});
  const ForwardResult fr = forward(net, in);
  // hidden pre = (0.1, 0.55), both positive so relu passes them through
  CHECK(fr.logits.at(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(fr.logits.at(0, 1) == doctest::Approx(1.15).epsilon(1e-12));
}

TEST_CASE("forward: dropout rate 0 equals no dropout; masks are seed-stable") {
  const Mlp net = Mlp::init({3, 6, 4}, 5);
  Rng rng(6);
  const Tensor2 batch = random_batch(5, 3, rng);
  const ForwardResult plain = forward(net, batch);
  const ForwardResult rate0 = forward(net, batch, DropoutSpec{0.0, 99});
  CHECK(plain.logits == rate0.logits);

  const ForwardResult d1 = forward(net, batch, DropoutSpec{0.5, 42});
  const ForwardResult d2 = forward(net, batch, DropoutSpec{0.5, 42});
  CHECK(d1.logits == d2.logits);
  const ForwardResult d3 = forward(net, batch, DropoutSpec{0.5, 43});
  CHECK(d1.logits != d3.logits);

  CHECK_THROWS_AS(forward(net, batch, DropoutSpec{1.0, 0}), ParamError);
  CHECK_THROWS_AS(forward(net, Tensor2(2, 2)), InputError);  // dim mismatch
}

TEST_CASE("softmax closed forms") {
  const std::vector<double> zeros = {0.0, 0.0, 0.0};
  const auto thirds = softmax(zeros, 1.0);
  for (double p : thirds) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  // shift invariance
  Rng rng(1);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> v = {rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
    std::vector<double> shifted = v;
    for (double& x : shifted) x += 7.25;
    const auto a = softmax(v, 2.0);
    const auto b = softmax(shifted, 2.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
  }

  // (2,0) at T=2 equals softmax of (1,0): (e/(e+1), 1/(e+1))
  const auto half = softmax(std::vector<double>{2.0, 0.0}, 2.0);
  const double e = std::exp(1.0);
  CHECK(half[0] == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
  CHECK(half[1] == doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-12));

  CHECK_THROWS_AS(softmax(std::vector<double>{1.0}, 0.0), ParamError);
}

TEST_CASE("softmax_rows restriction equals renormalized softened distribution") {
  Rng rng(4);
  const Tensor2 logits = random_batch(6, 5, rng);
  const Tensor2 restricted = softmax_rows(logits, 2.0, 3);
  for (std::size_t r = 0; r < 6; ++r) {
    const auto full = softmax(logits.row(r), 2.0);
    const double mass = full[0] + full[1] + full[2];
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(restricted.at(r, c) == doctest::Approx(full[c] / mass).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(softmax_rows(logits, 2.0, 9), InputError);
}

TEST_CASE("cross_entropy closed forms and finite differences") {
  // uniform logits -> ln C
  Tensor2 logits(2, 4);
  const LossGrad uniform = cross_entropy(logits, {0, 3});
  CHECK(uniform.loss == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  // hugely confident correct prediction -> loss near 0
  Tensor2 confident(1, 3);
  confident.at(0, 1) = 50.0;
  CHECK(cross_entropy(confident, {1}).loss < 1e-12);

  CHECK_THROWS_AS(cross_entropy(confident, {5}), InputError);
  CHECK_THROWS_AS(cross_entropy(confident, {0, 1}), InputError);

  // finite differences on a random 3x4 case
  Rng rng(7);
  Tensor2 z = random_batch(3, 4, rng);
  const std::vector<int> labels = {2, 0, 3};
  const LossGrad lg = cross_entropy(z, labels);
  const double h = 1e-6;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double keep = z.data()[i];
    z.data()[i] = keep + h;
    const double up = cross_entropy(z, labels).loss;
    z.data()[i] = keep - h;
    const double down = cross_entropy(z, labels).loss;
    z.data()[i] = keep;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({1e-6, std::abs(fd), std::abs(lg.grad_logits.data()[i])});
    CHECK(std::abs(fd - lg.grad_logits.data()[i]) / scale < 1e-5);
  }
}

TEST_CASE("distillation_loss closed forms and finite differences") {
  // teacher equals softened student -> zero loss, zero gradient
  Rng rng(8);
  const Tensor2 z = random_batch(3, 4, rng);
  const Tensor2 probs = softmax_rows(z, 2.0);
  const LossGrad zero = distillation_loss(z, probs, 2.0);
  CHECK(std::abs(zero.loss) < 1e-12);
  for (std::size_t i = 0; i < zero.grad_logits.size(); ++i) {
    CHECK(std::abs(zero.grad_logits.data()[i]) < 1e-12);
  }

  // teacher (1,0) against uniform student logits at T=1 -> KL = ln 2
  Tensor2 uniform_logits(1, 2);
  Tensor2 teacher(1, 2, {1.0, 0.0});
  CHECK(distillation_loss(uniform_logits, teacher, 1.0).loss ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // shared-range restriction: gradient on non-shared columns is zero
  Tensor2 wide = random_batch(2, 5, rng);
  Tensor2 narrow_teacher = softmax_rows(random_batch(2, 3, rng), 2.0);
  const LossGrad restricted = distillation_loss(wide, narrow_teacher, 2.0);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(restricted.grad_logits.at(r, 3) == 0.0);
    CHECK(restricted.grad_logits.at(r, 4) == 0.0);
  }

  // finite differences through the student logits
  Tensor2 student = random_batch(3, 4, rng);
  const Tensor2 t_probs = softmax_rows(random_batch(3, 4, rng), 1.0);
  const LossGrad lg = distillation_loss(student, t_probs, 2.0);
  const double h = 1e-6;
  for (std::size_t i = 0; i < student.size(); ++i) {
    const double keep = student.data()[i];
    student.data()[i] = keep + h;
    const double up = distillation_loss(student, t_probs, 2.0).loss;
    student.data()[i] = keep - h;
    const double down = distillation_loss(student, t_probs, 2.0).loss;
    student.data()[i] = keep;
    const double fd = (up - down) / (2.0 * h);
    const double scale = std::max({1e-6, std::abs(fd), std::abs(lg.grad_logits.data()[i])});
    CHECK(std::abs(fd - lg.grad_logits.data()[i]) / scale < 1e-5);
  }

  Tensor2 bad(1, 2, {0.7, 0.7});
  CHECK_THROWS_AS(distillation_loss(uniform_logits, bad, 1.0), InputError);
}

TEST_CASE("backward: zero and linear in grad_logits") {
  const Mlp net = Mlp::init({3, 4, 2}, 11);
  Rng rng(12);
  const Tensor2 batch = random_batch(4, 3, rng);
  const ForwardResult fr = forward(net, batch);

  const Gradients zero = backward(net, fr.cache, Tensor2(4, 2));
  for (const auto& w : zero.weights) {
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(w.data()[i] == 0.0);
  }

  Tensor2 g = random_batch(4, 2, rng);
  Tensor2 g2 = g;
  for (std::size_t i = 0; i < g2.size(); ++i) g2.data()[i] *= 2.0;
  const Gradients once = backward(net, fr.cache, g);
  const Gradients twice = backward(net, fr.cache, g2);
  for (std::size_t l = 0; l < once.weights.size(); ++l) {
    for (std::size_t i = 0; i < once.weights[l].size(); ++i) {
      CHECK(twice.weights[l].data()[i] ==
            doctest::Approx(2.0 * once.weights[l].data()[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("backward rejects a stale cache") {
  Mlp net = Mlp::init({3, 4, 2}, 13);
  Rng rng(14);
  const Tensor2 batch = random_batch(2, 3, rng);
  const ForwardResult fr = forward(net, batch);
  net.weights[0].at(0, 0) += 1.0;  // mutate after the forward pass
  CHECK_THROWS_AS(backward(net, fr.cache, Tensor2(2, 2)), ContractError);
}

TEST_CASE("full-chain gradients match finite differences") {
  const Mlp net = Mlp::init({3, 4, 3}, 21);
  Rng rng(22);
  const Tensor2 batch = random_batch(5, 3, rng);
  const std::vector<int> labels = {0, 2, 1, 2, 0};
  auto ce = [&](const Tensor2& logits) { return cross_entropy(logits, labels); };

  check_param_gradients(net, batch, ce, std::nullopt, 1e-5);
  check_param_gradients(net, batch, ce, DropoutSpec{0.5, 77}, 1e-5);
}

TEST_CASE("sgd_step arithmetic") {
  Mlp net = Mlp::init({1, 1}, 0);
  net.weights[0] = Tensor2(1, 1, {1.0});
  net.biases[0] = {0.5};
  Gradients g;
  g.weights = {Tensor2(1, 1, {2.0})};
  g.biases = {{1.0}};

  const Mlp same = sgd_step(net, g, 0.0);
  CHECK(same.weights[0].at(0, 0) == 1.0);

  const Mlp stepped = sgd_step(net, g, 0.1);
  CHECK(stepped.weights[0].at(0, 0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(stepped.biases[0][0] == doctest::Approx(0.4).epsilon(1e-15));

  // two successive steps equal one step with summed updates
  const Mlp twice = sgd_step(sgd_step(net, g, 0.1), g, 0.1);
  const Mlp once = sgd_step(net, g, 0.2);
  CHECK(twice.weights[0].at(0, 0) == doctest::Approx(once.weights[0].at(0, 0)));
}

TEST_CASE("expand_output_layer preserves old behavior") {
  const Mlp net = Mlp::init({3, 4, 4}, 31);
  CHECK_THROWS_AS(expand_output_layer(net, 4, 0), ParamError);
  CHECK_THROWS_AS(expand_output_layer(net, 3, 0), ParamError);

  const Mlp grown = expand_output_layer(net, 6, 55);
  CHECK(grown.class_count() == 6);
  Rng rng(32);
  const Tensor2 batch = random_batch(4, 3, rng);
  const Tensor2 old_logits = forward(net, batch).logits;
  const Tensor2 new_logits = forward(grown, batch).logits;
  for (std::size_t r = 0; r < 4; ++r) {
    for (std::size_t c = 0; c < 4; ++c) {
      CHECK(new_logits.at(r, c) == old_logits.at(r, c));
    }
  }
  const Mlp again = expand_output_layer(net, 6, 55);
  CHECK(again.weights[1] == grown.weights[1]);
}

TEST_CASE("param_stamp tracks parameter changes") {
  Mlp net = Mlp::init({2, 3, 2}, 41);
  const std::uint64_t before = net.param_stamp();
  CHECK(before == net.param_stamp());
  net.biases[0][1] += 1e-9;
  CHECK(net.param_stamp() != before);
}
