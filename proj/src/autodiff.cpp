#include "cwrs/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "cwrs/errors.hpp"

namespace cwrs {

namespace {

void check_finite_value(const Tensor& t, const char* op) {
  if (!t.all_finite()) throw NonFiniteValue(std::string(op) + " produced a non-finite value");
}

void require(bool cond, const std::string& msg) {
  if (!cond) throw ShapeMismatch(msg);
}

// C += A * B for row-major 2-D blocks; k ascends so the element-wise
// accumulation order matches a naive triple loop (the test oracles compare
// against literal loops at full precision).
void gemm_acc(const double* a, const double* b, double* c, int m, int n, int p) {
  for (int i = 0; i < m; ++i) {
    const double* arow = a + static_cast<size_t>(i) * n;
    double* crow = c + static_cast<size_t>(i) * p;
    for (int k = 0; k < n; ++k) {
      double av = arow[k];
      if (av == 0.0) continue;
      const double* brow = b + static_cast<size_t>(k) * p;
      for (int j = 0; j < p; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

Tensor& Node::ensure_grad() {
  if (grad.numel() == 0 && value.numel() > 0) grad = Tensor::zeros(value.shape());
  return grad;
}

Var constant(Tensor v) {
  auto n = std::make_shared<Node>();
  n->value = std::move(v);
  n->requires_grad = false;
  return n;
}

Var leaf(Param& p) {
  auto n = std::make_shared<Node>();
  n->value = p.value;
  n->param = &p;
  return n;
}

Var make_node(Tensor value, std::vector<Var> parents, std::function<void(Node&)> backprop) {
  check_finite_value(value, "op");
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  n->backprop = std::move(backprop);
  n->requires_grad =
      std::any_of(n->parents.begin(), n->parents.end(), [](const Var& p) { return p->requires_grad; });
  return n;
}

namespace {

// accumulate g into parent's grad unless the parent is a constant
void acc(const Var& parent, const Tensor& g) {
  if (!parent->requires_grad) return;
  Tensor& pg = parent->ensure_grad();
  require(pg.same_shape(g), "gradient shape mismatch");
  double* d = pg.data();
  const double* s = g.data();
  for (size_t i = 0; i < g.numel(); ++i) d[i] += s[i];
}

}  // namespace

void accumulate_grad(const Var& parent, const Tensor& g) { acc(parent, g); }

Var add(const Var& a, const Var& b) {
  require(a->value.same_shape(b->value), "add: shapes " + a->value.shape_str() + " vs " + b->value.shape_str());
  Tensor out = a->value;
  for (size_t i = 0; i < out.numel(); ++i) out[i] += b->value[i];
  return make_node(std::move(out), {a, b}, [](Node& n) {
    acc(n.parents[0], n.grad);
    acc(n.parents[1], n.grad);
  });
}

Var sub(const Var& a, const Var& b) {
  require(a->value.same_shape(b->value), "sub: shapes " + a->value.shape_str() + " vs " + b->value.shape_str());
  Tensor out = a->value;
  for (size_t i = 0; i < out.numel(); ++i) out[i] -= b->value[i];
  return make_node(std::move(out), {a, b}, [](Node& n) {
    acc(n.parents[0], n.grad);
    Tensor gneg = n.grad;
    for (size_t i = 0; i < gneg.numel(); ++i) gneg[i] = -gneg[i];
    acc(n.parents[1], gneg);
  });
}

Var mul(const Var& a, const Var& b) {
  require(a->value.same_shape(b->value), "mul: shapes " + a->value.shape_str() + " vs " + b->value.shape_str());
  Tensor out = a->value;
  for (size_t i = 0; i < out.numel(); ++i) out[i] *= b->value[i];
  return make_node(std::move(out), {a, b}, [](Node& n) {
    Tensor ga = n.grad, gb = n.grad;
    const Tensor& av = n.parents[0]->value;
    const Tensor& bv = n.parents[1]->value;
    for (size_t i = 0; i < n.grad.numel(); ++i) {
      ga[i] = n.grad[i] * bv[i];
      gb[i] = n.grad[i] * av[i];
    }
    acc(n.parents[0], ga);
    acc(n.parents[1], gb);
  });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var scale(const Var& a, double c) {
  Tensor out = a->value;
  for (size_t i = 0; i < out.numel(); ++i) out[i] *= c;
  return make_node(std::move(out), {a}, [c](Node& n) {
    Tensor g = n.grad;
    for (size_t i = 0; i < g.numel(); ++i) g[i] *= c;
    acc(n.parents[0], g);
  });
}

Var matmul(const Var& a, const Var& b) {
  const Tensor& av = a->value;
  const Tensor& bv = b->value;
  require(av.rank() == 2, "matmul: lhs must be 2-D, got " + av.shape_str());
  if (bv.rank() == 1) {
    // (m,n) x (n) -> (m)
    require(av.dim(1) == bv.dim(0), "matmul: inner dims " + av.shape_str() + " x " + bv.shape_str());
    int m = av.dim(0), k = av.dim(1);
    Tensor out({m});
    for (int i = 0; i < m; ++i) {
      double s = 0;
      for (int j = 0; j < k; ++j) s += av.at(i, j) * bv.at(j);
      out.at(i) = s;
    }
    return make_node(std::move(out), {a, b}, [m, k](Node& n) {
      const Tensor& avp = n.parents[0]->value;
      const Tensor& bvp = n.parents[1]->value;
      Tensor ga(avp.shape()), gb(bvp.shape());
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < k; ++j) {
          ga.at(i, j) = n.grad.at(i) * bvp.at(j);
          gb.at(j) += avp.at(i, j) * n.grad.at(i);
        }
      acc(n.parents[0], ga);
      acc(n.parents[1], gb);
    });
  }
  require(bv.rank() == 2, "matmul: rhs must be 1-D or 2-D, got " + bv.shape_str());
  require(av.dim(1) == bv.dim(0), "matmul: inner dims " + av.shape_str() + " x " + bv.shape_str());
  int m = av.dim(0), k = av.dim(1), p = bv.dim(1);
  Tensor out({m, p});
  gemm_acc(av.data(), bv.data(), out.data(), m, k, p);
  return make_node(std::move(out), {a, b}, [m, k, p](Node& n) {
    const Tensor& avp = n.parents[0]->value;
    const Tensor& bvp = n.parents[1]->value;
    // dA = dC * B^T      (m,p) x (p,k) via explicit loops on B row-major
    if (n.parents[0]->requires_grad) {
      Tensor ga(avp.shape());
      for (int i = 0; i < m; ++i)
        for (int kk = 0; kk < k; ++kk) {
          double s = 0;
          for (int j = 0; j < p; ++j) s += n.grad.at(i, j) * bvp.at(kk, j);
          ga.at(i, kk) = s;
        }
      acc(n.parents[0], ga);
    }
    // dB = A^T * dC
    if (n.parents[1]->requires_grad) {
      Tensor gb(bvp.shape());
      for (int i = 0; i < m; ++i) {
        for (int kk = 0; kk < k; ++kk) {
          double av_ik = avp.at(i, kk);
          if (av_ik == 0.0) continue;
          for (int j = 0; j < p; ++j) gb.at(kk, j) += av_ik * n.grad.at(i, j);
        }
      }
      acc(n.parents[1], gb);
    }
  });
}

Var transpose(const Var& a) {
  const Tensor& av = a->value;
  require(av.rank() == 2, "transpose: need 2-D, got " + av.shape_str());
  int m = av.dim(0), p = av.dim(1);
  Tensor out({p, m});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; ++j) out.at(j, i) = av.at(i, j);
  return make_node(std::move(out), {a}, [m, p](Node& n) {
    Tensor g({m, p});
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < p; ++j) g.at(i, j) = n.grad.at(j, i);
    acc(n.parents[0], g);
  });
}

Var linear(const Var& x, const Var& w, const Var& b) {
  const Tensor& xv = x->value;
  const Tensor& wv = w->value;
  const Tensor& bv = b->value;
  require(wv.rank() == 2 && bv.rank() == 1 && wv.dim(1) == bv.dim(0),
          "linear: weight " + wv.shape_str() + " vs bias " + bv.shape_str());
  bool vec_in = xv.rank() == 1;
  int m = vec_in ? 1 : xv.dim(0);
  int k = vec_in ? xv.dim(0) : xv.dim(1);
  int p = wv.dim(1);
  require(k == wv.dim(0), "linear: input " + xv.shape_str() + " vs weight " + wv.shape_str());
  Tensor out(vec_in ? std::vector<int>{p} : std::vector<int>{m, p});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < p; ++j) out[static_cast<size_t>(i) * p + j] = bv.at(j);
  gemm_acc(xv.data(), wv.data(), out.data(), m, k, p);
  return make_node(std::move(out), {x, w, b}, [m, k, p](Node& n) {
    const Tensor& xvp = n.parents[0]->value;
    const Tensor& wvp = n.parents[1]->value;
    const double* g = n.grad.data();
    if (n.parents[0]->requires_grad) {
      Tensor gx(xvp.shape());
      for (int i = 0; i < m; ++i)
        for (int kk = 0; kk < k; ++kk) {
          double s = 0;
          for (int j = 0; j < p; ++j) s += g[static_cast<size_t>(i) * p + j] * wvp.at(kk, j);
          gx[static_cast<size_t>(i) * k + kk] = s;
        }
      acc(n.parents[0], gx);
    }
    if (n.parents[1]->requires_grad) {
      Tensor gw(wvp.shape());
      for (int i = 0; i < m; ++i)
        for (int kk = 0; kk < k; ++kk) {
          double xv_ik = xvp[static_cast<size_t>(i) * k + kk];
          if (xv_ik == 0.0) continue;
          for (int j = 0; j < p; ++j) gw.at(kk, j) += xv_ik * g[static_cast<size_t>(i) * p + j];
        }
      acc(n.parents[1], gw);
    }
    if (n.parents[2]->requires_grad) {
      Tensor gb({p});
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < p; ++j) gb.at(j) += g[static_cast<size_t>(i) * p + j];
      acc(n.parents[2], gb);
    }
  });
}

Var leaky_relu(const Var& x, double slope) {
  Tensor out = x->value;
  for (size_t i = 0; i < out.numel(); ++i)
    if (out[i] < 0) out[i] *= slope;
  return make_node(std::move(out), {x}, [slope](Node& n) {
    const Tensor& xv = n.parents[0]->value;
    Tensor g = n.grad;
    for (size_t i = 0; i < g.numel(); ++i)
      if (xv[i] < 0) g[i] *= slope;
    acc(n.parents[0], g);
  });
}

Var sigmoid(const Var& x) {
  Tensor out = x->value;
  for (size_t i = 0; i < out.numel(); ++i) out[i] = 1.0 / (1.0 + std::exp(-out[i]));
  Tensor saved = out;
  return make_node(std::move(out), {x}, [saved](Node& n) {
    Tensor g = n.grad;
    for (size_t i = 0; i < g.numel(); ++i) g[i] *= saved[i] * (1.0 - saved[i]);
    acc(n.parents[0], g);
  });
}

Var softmax(const Var& x) {
  const Tensor& xv = x->value;
  require(xv.rank() == 1 || xv.rank() == 2, "softmax: need 1-D or 2-D, got " + xv.shape_str());
  int rows = xv.rank() == 1 ? 1 : xv.dim(0);
  int cols = xv.rank() == 1 ? xv.dim(0) : xv.dim(1);
  Tensor out = xv;
  for (int i = 0; i < rows; ++i) {
    double* row = out.data() + static_cast<size_t>(i) * cols;
    double mx = row[0];
    for (int j = 1; j < cols; ++j) mx = std::max(mx, row[j]);
    double s = 0;
    for (int j = 0; j < cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      s += row[j];
    }
    for (int j = 0; j < cols; ++j) row[j] /= s;
  }
  Tensor saved = out;
  return make_node(std::move(out), {x}, [saved, rows, cols](Node& n) {
    Tensor g = n.grad;
    for (int i = 0; i < rows; ++i) {
      const double* y = saved.data() + static_cast<size_t>(i) * cols;
      double* gr = g.data() + static_cast<size_t>(i) * cols;
      double inner = 0;
      for (int j = 0; j < cols; ++j) inner += gr[j] * y[j];
      for (int j = 0; j < cols; ++j) gr[j] = y[j] * (gr[j] - inner);
    }
    acc(n.parents[0], g);
  });
}

Var logv(const Var& x) {
  Tensor out = x->value;
  for (size_t i = 0; i < out.numel(); ++i) out[i] = std::log(out[i]);
  return make_node(std::move(out), {x}, [](Node& n) {
    const Tensor& xv = n.parents[0]->value;
    Tensor g = n.grad;
    for (size_t i = 0; i < g.numel(); ++i) g[i] /= xv[i];
    acc(n.parents[0], g);
  });
}

Var softplus(const Var& x) {
  Tensor out = x->value;
  for (size_t i = 0; i < out.numel(); ++i) {
    double v = out[i];
    out[i] = v > 0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
  }
  return make_node(std::move(out), {x}, [](Node& n) {
    const Tensor& xv = n.parents[0]->value;
    Tensor g = n.grad;
    for (size_t i = 0; i < g.numel(); ++i) g[i] *= 1.0 / (1.0 + std::exp(-xv[i]));
    acc(n.parents[0], g);
  });
}

Var concat(const std::vector<Var>& xs, int axis) {
  require(!xs.empty(), "concat: empty input list");
  int rank = xs[0]->value.rank();
  require(axis >= 0 && axis < rank, "concat: bad axis");
  if (rank == 1) {
    size_t total = 0;
    for (const Var& v : xs) {
      require(v->value.rank() == 1, "concat: mixed ranks");
      total += v->value.numel();
    }
    Tensor out({static_cast<int>(total)});
    size_t off = 0;
    for (const Var& v : xs) {
      std::copy(v->value.data(), v->value.data() + v->value.numel(), out.data() + off);
      off += v->value.numel();
    }
    return make_node(std::move(out), xs, [](Node& n) {
      size_t off = 0;
      for (const Var& p : n.parents) {
        size_t cnt = p->value.numel();
        if (p->requires_grad) {
          Tensor g(p->value.shape());
          std::copy(n.grad.data() + off, n.grad.data() + off + cnt, g.data());
          acc(p, g);
        }
        off += cnt;
      }
    });
  }
  require(rank == 2, "concat: only 1-D and 2-D supported");
  if (axis == 0) {
    int cols = xs[0]->value.dim(1), rows = 0;
    for (const Var& v : xs) {
      require(v->value.rank() == 2 && v->value.dim(1) == cols, "concat axis 0: column mismatch");
      rows += v->value.dim(0);
    }
    Tensor out({rows, cols});
    size_t off = 0;
    for (const Var& v : xs) {
      std::copy(v->value.data(), v->value.data() + v->value.numel(), out.data() + off);
      off += v->value.numel();
    }
    return make_node(std::move(out), xs, [](Node& n) {
      size_t off = 0;
      for (const Var& p : n.parents) {
        size_t cnt = p->value.numel();
        if (p->requires_grad) {
          Tensor g(p->value.shape());
          std::copy(n.grad.data() + off, n.grad.data() + off + cnt, g.data());
          acc(p, g);
        }
        off += cnt;
      }
    });
  }
  // axis == 1
  int rows = xs[0]->value.dim(0), cols = 0;
  std::vector<int> widths;
  for (const Var& v : xs) {
    require(v->value.rank() == 2 && v->value.dim(0) == rows, "concat axis 1: row mismatch");
    widths.push_back(v->value.dim(1));
    cols += v->value.dim(1);
  }
  Tensor out({rows, cols});
  int coff = 0;
  for (size_t vi = 0; vi < xs.size(); ++vi) {
    const Tensor& v = xs[vi]->value;
    for (int i = 0; i < rows; ++i)
      std::copy(v.data() + static_cast<size_t>(i) * widths[vi],
                v.data() + static_cast<size_t>(i + 1) * widths[vi],
                out.data() + static_cast<size_t>(i) * cols + coff);
    coff += widths[vi];
  }
  return make_node(std::move(out), xs, [rows, cols, widths](Node& n) {
    int coff = 0;
    for (size_t vi = 0; vi < n.parents.size(); ++vi) {
      const Var& p = n.parents[vi];
      if (p->requires_grad) {
        Tensor g(p->value.shape());
        for (int i = 0; i < rows; ++i)
          std::copy(n.grad.data() + static_cast<size_t>(i) * cols + coff,
                    n.grad.data() + static_cast<size_t>(i) * cols + coff + widths[vi],
                    g.data() + static_cast<size_t>(i) * widths[vi]);
        acc(p, g);
      }
      coff += widths[vi];
    }
  });
}

Var stack_rows(const std::vector<Var>& rows) {
  require(!rows.empty(), "stack_rows: empty input list");
  int d = rows[0]->value.dim(0);
  for (const Var& r : rows)
    require(r->value.rank() == 1 && r->value.dim(0) == d, "stack_rows: length mismatch");
  Tensor out({static_cast<int>(rows.size()), d});
  for (size_t i = 0; i < rows.size(); ++i)
    std::copy(rows[i]->value.data(), rows[i]->value.data() + d, out.data() + i * d);
  return make_node(std::move(out), rows, [d](Node& n) {
    for (size_t i = 0; i < n.parents.size(); ++i) {
      const Var& p = n.parents[i];
      if (!p->requires_grad) continue;
      Tensor g({d});
      std::copy(n.grad.data() + i * d, n.grad.data() + (i + 1) * d, g.data());
      acc(p, g);
    }
  });
}

Var pack_scalars(const std::vector<Var>& xs) {
  require(!xs.empty(), "pack_scalars: empty input list");
  Tensor out({static_cast<int>(xs.size())});
  for (size_t i = 0; i < xs.size(); ++i) {
    require(xs[i]->value.numel() == 1, "pack_scalars: inputs must be scalar");
    out[i] = xs[i]->value[0];
  }
  return make_node(std::move(out), xs, [](Node& n) {
    for (size_t i = 0; i < n.parents.size(); ++i) {
      const Var& p = n.parents[i];
      if (!p->requires_grad) continue;
      Tensor g(p->value.shape());
      g[0] = n.grad[static_cast<size_t>(i)];
      acc(p, g);
    }
  });
}

Var sum(const Var& x) {
  double s = 0;
  for (size_t i = 0; i < x->value.numel(); ++i) s += x->value[i];
  return make_node(Tensor::scalar(s), {x}, [](Node& n) {
    Tensor g(n.parents[0]->value.shape());
    g.fill(n.grad[0]);
    acc(n.parents[0], g);
  });
}

Var mean(const Var& x) {
  size_t cnt = x->value.numel();
  require(cnt > 0, "mean: empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(cnt));
}

Var dot(const Var& a, const Var& b) {
  require(a->value.rank() == 1 && b->value.rank() == 1 && a->value.same_shape(b->value),
          "dot: need equal-length vectors");
  double s = 0;
  for (size_t i = 0; i < a->value.numel(); ++i) s += a->value[i] * b->value[i];
  return make_node(Tensor::scalar(s), {a, b}, [](Node& n) {
    const Tensor& av = n.parents[0]->value;
    const Tensor& bv = n.parents[1]->value;
    double g = n.grad[0];
    Tensor ga(av.shape()), gb(bv.shape());
    for (size_t i = 0; i < av.numel(); ++i) {
      ga[i] = g * bv[i];
      gb[i] = g * av[i];
    }
    acc(n.parents[0], ga);
    acc(n.parents[1], gb);
  });
}

Var pick(const Var& x, int index) {
  require(x->value.rank() == 1 && index >= 0 && index < x->value.dim(0), "pick: index out of range");
  return make_node(Tensor::scalar(x->value.at(index)), {x}, [index](Node& n) {
    Tensor g(n.parents[0]->value.shape());
    g.at(index) = n.grad[0];
    acc(n.parents[0], g);
  });
}

Var reshape(const Var& x, std::vector<int> shape) {
  Tensor out = x->value.reshaped(shape);
  return make_node(std::move(out), {x}, [](Node& n) {
    acc(n.parents[0], n.grad.reshaped(n.parents[0]->value.shape()));
  });
}

void backward(const Var& loss) {
  if (loss->value.numel() != 1) throw ShapeMismatch("backward: loss must be scalar");
  // iterative post-order DFS
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto& [node, idx] = stack.back();
    if (idx < node->parents.size()) {
      Node* p = node->parents[idx].get();
      ++idx;
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  loss->ensure_grad();
  loss->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->grad.numel() == 0) continue;  // never received gradient
    if (!n->grad.all_finite()) throw NonFiniteGradient("non-finite gradient in backward");
    if (n->param) {
      Tensor& pg = n->param->grad;
      if (!pg.same_shape(n->grad)) throw ShapeMismatch("param grad shape drifted: " + n->param->name);
      for (size_t i = 0; i < pg.numel(); ++i) pg[i] += n->grad[i];
    }
    if (n->backprop) n->backprop(*n);
  }
}

void zero_grads(const std::vector<Param*>& params) {
  for (Param* p : params) p->grad.fill(0.0);
}

void adam_step(AdamState& state, const std::vector<Param*>& params) {
  state.step += 1;
  double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (Param* p : params) {
    if (!p->grad.all_finite()) throw NonFiniteGradient("non-finite gradient for param " + p->name);
    auto it = state.moments.find(p->name);
    if (it == state.moments.end())
      it = state.moments
               .emplace(p->name, std::make_pair(Tensor::zeros(p->value.shape()), Tensor::zeros(p->value.shape())))
               .first;
    Tensor& m = it->second.first;
    Tensor& v = it->second.second;
    for (size_t i = 0; i < p->value.numel(); ++i) {
      double g = p->grad[i];
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g * g;
      double mhat = m[i] / bc1;
      double vhat = v[i] / bc2;
      p->value[i] -= state.lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

GradCheckReport grad_check(const std::function<Var()>& build, const std::vector<Param*>& params,
                           double rel_tol, double step) {
  zero_grads(params);
  Var loss = build();
  backward(loss);
  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (Param* p : params) analytic.push_back(p->grad);

  GradCheckReport report;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Param* p = params[pi];
    for (size_t i = 0; i < p->value.numel(); ++i) {
      double orig = p->value[i];
      p->value[i] = orig + step;
      double fp = build()->value.scalar_value();
      p->value[i] = orig - step;
      double fm = build()->value.scalar_value();
      p->value[i] = orig;
      double numeric = (fp - fm) / (2.0 * step);
      double a = analytic[pi][i];
      // the floor turns the test absolute for near-zero gradients, where the
      // central difference is dominated by cancellation noise
      double rel = std::fabs(a - numeric) / std::max({std::fabs(a), std::fabs(numeric), 1e-4});
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst = {p->name, i, a, numeric, rel};
      }
    }
  }
  report.pass = report.max_rel_err <= rel_tol;
  return report;
}

}  // namespace cwrs
