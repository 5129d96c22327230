#include "ecas/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace ecas::ad {

int Tape::push(Matrix value, std::function<void(Tape&)> pull) {
  Node node;
  node.grad = Matrix::Zero(value.rows(), value.cols());
  node.value = std::move(value);
  node.pull = std::move(pull);
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::input(Matrix value) { return push(std::move(value), nullptr); }

int Tape::add(int a, int b) {
  return push(value(a) + value(b), [a, b, id = static_cast<int>(nodes_.size())](Tape& t) {
    t.grad(a) += t.grad(id);
    t.grad(b) += t.grad(id);
  });
}

int Tape::sub(int a, int b) {
  return push(value(a) - value(b), [a, b, id = static_cast<int>(nodes_.size())](Tape& t) {
    t.grad(a) += t.grad(id);
    t.grad(b) -= t.grad(id);
  });
}

int Tape::matmul(int a, int b) {
  return push(value(a) * value(b), [a, b, id = static_cast<int>(nodes_.size())](Tape& t) {
    t.grad(a) += t.grad(id) * t.value(b).transpose();
    t.grad(b) += t.value(a).transpose() * t.grad(id);
  });
}

int Tape::cwise_mul(int a, int b) {
  return push(value(a).cwiseProduct(value(b)),
              [a, b, id = static_cast<int>(nodes_.size())](Tape& t) {
                t.grad(a) += t.grad(id).cwiseProduct(t.value(b));
                t.grad(b) += t.grad(id).cwiseProduct(t.value(a));
              });
}

int Tape::scale(int a, double s) {
  return push(s * value(a), [a, s, id = static_cast<int>(nodes_.size())](Tape& t) {
    t.grad(a) += s * t.grad(id);
  });
}

int Tape::sigmoid(int a) {
  Matrix y = value(a).unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
  return push(std::move(y), [a, id = static_cast<int>(nodes_.size())](Tape& t) {
    const Matrix& y = t.value(id);
    t.grad(a) += t.grad(id).cwiseProduct(y.cwiseProduct(Matrix::Ones(y.rows(), y.cols()) - y));
  });
}

int Tape::tanh_op(int a) {
  Matrix y = value(a).array().tanh().matrix();
  return push(std::move(y), [a, id = static_cast<int>(nodes_.size())](Tape& t) {
    const Matrix& y = t.value(id);
    t.grad(a) += t.grad(id).cwiseProduct(Matrix::Ones(y.rows(), y.cols()) - y.cwiseProduct(y));
  });
}

int Tape::vcat(int a, int b) {
  const Matrix& va = value(a);
  const Matrix& vb = value(b);
  if (va.cols() != vb.cols()) throw std::invalid_argument("vcat column mismatch");
  Matrix y(va.rows() + vb.rows(), va.cols());
  y.topRows(va.rows()) = va;
  y.bottomRows(vb.rows()) = vb;
  const auto ra = va.rows();
  return push(std::move(y), [a, b, ra, id = static_cast<int>(nodes_.size())](Tape& t) {
    t.grad(a) += t.grad(id).topRows(ra);
    t.grad(b) += t.grad(id).bottomRows(t.grad(id).rows() - ra);
  });
}

int Tape::rows(int a, int first, int n) {
  return push(value(a).middleRows(first, n),
              [a, first, n, id = static_cast<int>(nodes_.size())](Tape& t) {
                t.grad(a).middleRows(first, n) += t.grad(id);
              });
}

int Tape::softmax_col(int a) {
  const Matrix& x = value(a);
  if (x.cols() != 1) throw std::invalid_argument("softmax expects a column vector");
  const double m = x.maxCoeff();
  Matrix e = (x.array() - m).exp().matrix();
  Matrix y = e / e.sum();
  return push(std::move(y), [a, id = static_cast<int>(nodes_.size())](Tape& t) {
    const Matrix& y = t.value(id);
    const Matrix& g = t.grad(id);
    const double dot = (y.array() * g.array()).sum();
    t.grad(a) += y.cwiseProduct(g) - dot * y;
  });
}

int Tape::scalar_mul(int s, int a) {
  if (value(s).size() != 1) throw std::invalid_argument("scalar_mul expects a 1x1 scalar node");
  return push(value(s)(0, 0) * value(a), [s, a, id = static_cast<int>(nodes_.size())](Tape& t) {
    t.grad(s)(0, 0) += (t.grad(id).array() * t.value(a).array()).sum();
    t.grad(a) += t.value(s)(0, 0) * t.grad(id);
  });
}

int Tape::squared_norm(int a) {
  Matrix y(1, 1);
  y(0, 0) = value(a).squaredNorm();
  return push(std::move(y), [a, id = static_cast<int>(nodes_.size())](Tape& t) {
    t.grad(a) += 2.0 * t.grad(id)(0, 0) * t.value(a);
  });
}

void Tape::backward(int output) {
  if (value(output).size() != 1) throw std::invalid_argument("backward output must be 1x1");
  grad(output)(0, 0) = 1.0;
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    auto& node = nodes_[static_cast<std::size_t>(i)];
    if (node.pull) node.pull(*this);
  }
}

}  // namespace ecas::ad
