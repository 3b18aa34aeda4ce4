#pragma once
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cwrs/tensor.hpp"

namespace cwrs {

// Trainable tensor. backward() accumulates into grad; adam_step consumes it.
struct Param {
  std::string name;
  Tensor value;
  Tensor grad;  // same shape as value, kept zeroed between steps

  Param() = default;
  Param(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros(value.shape())) {}
};

// One recorded operation. Graphs are DAGs of shared_ptr nodes; backward()
// topologically sorts from the loss and runs each node's backprop hook, which
// reads this node's grad and accumulates into parents (or a bound Param).
class Node {
 public:
  Tensor value;
  Tensor grad;  // allocated lazily during backward
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backprop;  // empty for leaves/constants
  Param* param = nullptr;               // set when this leaf mirrors a Param
  bool requires_grad = true;

  Tensor& ensure_grad();
};

using Var = std::shared_ptr<Node>;

// --- graph construction ---------------------------------------------------

Var constant(Tensor v);   // no gradient tracked
Var leaf(Param& p);       // backward adds into p.grad
Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backprop);

// for custom nodes: add g into parent's grad (no-op on constants)
void accumulate_grad(const Var& parent, const Tensor& g);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);  // elementwise
Var neg(const Var& a);
Var scale(const Var& a, double c);
Var matmul(const Var& a, const Var& b);  // (m,n)x(n,p) or (m,n)x(n)
Var transpose(const Var& a);             // 2-D
Var linear(const Var& x, const Var& w, const Var& b);  // rows(x) * w + b
Var leaky_relu(const Var& x, double slope);
Var sigmoid(const Var& x);
Var softmax(const Var& x);  // 1-D, or row-wise for 2-D; max-subtracted
Var logv(const Var& x);
Var softplus(const Var& x);  // ln(1 + e^x), overflow-safe
Var concat(const std::vector<Var>& xs, int axis);
Var stack_rows(const std::vector<Var>& rows);     // 1-D vars -> (n, d)
Var pack_scalars(const std::vector<Var>& xs);     // scalar vars -> (n)
Var sum(const Var& x);
Var mean(const Var& x);
Var dot(const Var& a, const Var& b);  // 1-D
Var pick(const Var& x, int index);    // single element of a 1-D var
Var reshape(const Var& x, std::vector<int> shape);

// --- backward pass --------------------------------------------------------

// Populates grads of every Param reachable from the scalar loss. Params not
// touched by the graph keep whatever their grad held (zero after zero_grads).
void backward(const Var& loss);

// --- optimizer ------------------------------------------------------------

struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::map<std::string, std::pair<Tensor, Tensor>> moments;  // name -> (m, v)
};

void adam_step(AdamState& state, const std::vector<Param*>& params);
void zero_grads(const std::vector<Param*>& params);

// --- gradient checking ----------------------------------------------------

struct GradCheckEntry {
  std::string param;
  size_t index = 0;
  double analytic = 0, numeric = 0, rel_err = 0;
};

struct GradCheckReport {
  double max_rel_err = 0;
  bool pass = true;
  GradCheckEntry worst;
};

// build must construct a fresh scalar-loss graph from the params' current
// values every time it is called (it is invoked O(elements) times).
GradCheckReport grad_check(const std::function<Var()>& build, const std::vector<Param*>& params,
                           double rel_tol, double step = 1e-5);

}  // namespace cwrs
