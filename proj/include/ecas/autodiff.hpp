#pragma once

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace ecas::ad {

// Dynamic reverse-mode tape over dense matrices. Node handles are indices;
// building ops records a backward closure, and backward() sweeps the tape in
// reverse accumulating gradients into every node (leaves included). Sized for
// desk-scale recurrent graphs, not large-scale training.
class Tape {
 public:
  using Matrix = Eigen::MatrixXd;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  int input(Matrix value);

  int add(int a, int b);
  int sub(int a, int b);
  int matmul(int a, int b);
  int cwise_mul(int a, int b);
  int scale(int a, double s);
  int sigmoid(int a);
  int tanh_op(int a);
  int vcat(int a, int b);             // stack a on top of b (same cols)
  int rows(int a, int first, int n);  // row slice
  int softmax_col(int a);             // column-vector softmax, max-shifted
  int scalar_mul(int s, int a);       // (1x1 node) * matrix node
  int squared_norm(int a);            // 1x1

  const Matrix& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Matrix& gradient(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

  // Seeds d(output)/d(output) = 1 and propagates to every node. `output`
  // must be 1x1. May be called once per tape.
  void backward(int output);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&)> pull;  // adds this node's grad into its parents
  };

  int push(Matrix value, std::function<void(Tape&)> pull);

  Matrix& grad(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }

  std::vector<Node> nodes_;
};

}  // namespace ecas::ad
