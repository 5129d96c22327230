#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "ecas/autodiff.hpp"

using namespace ecas;
using Eigen::MatrixXd;

namespace {

// Central finite differences of a scalar function of one matrix input.
MatrixXd fd_gradient(const std::function<double(const MatrixXd&)>& f, const MatrixXd& x,
                     double eps = 1e-6) {
  MatrixXd g(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      MatrixXd hi = x, lo = x;
      hi(r, c) += eps;
      lo(r, c) -= eps;
      g(r, c) = (f(hi) - f(lo)) / (2.0 * eps);
    }
  }
  return g;
}

double rel_err(const MatrixXd& a, const MatrixXd& b) {
  const double scale = std::max(1.0, std::max(a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()));
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("tape gradients match finite differences for a composite expression") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> gauss(0.0, 0.7);
  auto randm = [&](int r, int c) {
    MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = gauss(rng);
    return m;
  };

  const MatrixXd W = randm(3, 4);
  const MatrixXd x = randm(4, 1);
  const MatrixXd b = randm(3, 1);

  // f(W, x, b) = || tanh(Wx + b) .* sigmoid(Wx + b) ||^2
  ad::Tape tape;
  const int Wn = tape.input(W);
  const int xn = tape.input(x);
  const int bn = tape.input(b);
  const int z = tape.add(tape.matmul(Wn, xn), bn);
  const int y = tape.cwise_mul(tape.tanh_op(z), tape.sigmoid(z));
  const int loss = tape.squared_norm(y);
  tape.backward(loss);

  const MatrixXd gW_fd = fd_gradient(
      [&](const MatrixXd& Wv) {
        ad::Tape t;
        const int a = t.input(Wv), b2 = t.input(x), c = t.input(b);
        const int zz = t.add(t.matmul(a, b2), c);
        const int yy = t.cwise_mul(t.tanh_op(zz), t.sigmoid(zz));
        return t.value(t.squared_norm(yy))(0, 0);
      },
      W);
  CHECK(rel_err(tape.gradient(Wn), gW_fd) < 1e-7);

  const MatrixXd gx_fd = fd_gradient(
      [&](const MatrixXd& xv) {
        ad::Tape t;
        const int a = t.input(W), b2 = t.input(xv), c = t.input(b);
        const int zz = t.add(t.matmul(a, b2), c);
        const int yy = t.cwise_mul(t.tanh_op(zz), t.sigmoid(zz));
        return t.value(t.squared_norm(yy))(0, 0);
      },
      x);
  CHECK(rel_err(tape.gradient(xn), gx_fd) < 1e-7);
}

TEST_CASE("softmax, slicing, and concatenation backpropagate correctly") {
  const MatrixXd x = (MatrixXd(4, 1) << 0.3, -1.2, 0.7, 0.1).finished();
  const MatrixXd w = (MatrixXd(4, 1) << 1.0, 2.0, -0.5, 0.25).finished();

  // f(x) = w . softmax(vcat(x_top, x_bottom)), with a row slice mixed in
  auto build = [&](ad::Tape& tape, const MatrixXd& xv, int* x_id) {
    const int xn = tape.input(xv);
    if (x_id) *x_id = xn;
    const int top = tape.rows(xn, 0, 2);
    const int bottom = tape.rows(xn, 2, 2);
    const int joined = tape.vcat(top, bottom);
    const int soft = tape.softmax_col(joined);
    return tape.matmul(tape.input(MatrixXd(w.transpose())), soft);
  };

  ad::Tape tape;
  int xn_id = -1;
  const int out = build(tape, x, &xn_id);
  tape.backward(out);
  const MatrixXd analytic = tape.gradient(xn_id);

  const MatrixXd fd = fd_gradient(
      [&](const MatrixXd& xv) {
        ad::Tape t;
        return t.value(build(t, xv, nullptr))(0, 0);
      },
      x);
  CHECK(rel_err(analytic, fd) < 1e-7);

  // Attention weights sum to one.
  ad::Tape t2;
  const int soft = t2.softmax_col(t2.input(x));
  CHECK(t2.value(soft).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("scalar_mul combines a 1x1 score with a vector message") {
  const MatrixXd s = MatrixXd::Constant(1, 1, 0.8);
  const MatrixXd v = (MatrixXd(3, 1) << 1.0, -2.0, 0.5).finished();

  ad::Tape tape;
  const int sn = tape.input(s);
  const int vn = tape.input(v);
  const int scaled = tape.scalar_mul(sn, vn);
  const int loss = tape.squared_norm(scaled);
  tape.backward(loss);

  // d/ds ||s v||^2 = 2 s ||v||^2;  d/dv = 2 s^2 v
  CHECK(tape.gradient(sn)(0, 0) ==
        doctest::Approx(2.0 * 0.8 * v.squaredNorm()).epsilon(1e-12));
  for (int i = 0; i < 3; ++i) {
    CHECK(tape.gradient(vn)(i, 0) == doctest::Approx(2.0 * 0.64 * v(i, 0)).epsilon(1e-12));
  }
}
