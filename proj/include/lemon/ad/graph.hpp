#pragma once

// Reverse-mode autodiff over a flat tape. Ops compute values eagerly through
// the kernels module and, when the graph is recording, push a backward
// closure. With recording off the ops return bare values and the tape stays
// empty, so inference never retains intermediates.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "lemon/core/tensor.hpp"
#include "lemon/kern/kernels.hpp"
#include "lemon/util/errors.hpp"

namespace lemon::ad {

template <typename T>
class Graph;

template <typename T>
struct Var {
  Tensor<T> value;
  std::int32_t node = -1;
  Graph<T>* graph = nullptr;

  bool recorded() const { return node >= 0; }
  std::int64_t rows() const { return value.rows(); }
  std::int64_t cols() const { return value.cols(); }
  T item() const { return value[0]; }
};

template <typename T>
class Graph {
 public:
  explicit Graph(bool recording = true) : recording_(recording) {}

  bool recording() const { return recording_; }

  Var<T> leaf(Tensor<T> value, bool needs_grad) {
    Var<T> v;
    v.value = std::move(value);
    if (recording_) {
      v.node = push(v.value, needs_grad, nullptr);
      v.graph = this;
    }
    return v;
  }

  Var<T> constant(Tensor<T> value) { return leaf(std::move(value), false); }

  bool needs_grad(const Var<T>& v) const {
    return v.recorded() && nodes_[static_cast<size_t>(v.node)].needs_grad;
  }

  // Gradient buffer of a node, allocated on first touch.
  T* grad_buf(std::int32_t node) {
    Node& n = nodes_[static_cast<size_t>(node)];
    if (!n.grad.defined()) n.grad = Tensor<T>::zeros(n.value.shape());
    return n.grad.data();
  }

  bool grad_defined(std::int32_t node) const {
    return nodes_[static_cast<size_t>(node)].grad.defined();
  }

  Tensor<T> grad(const Var<T>& v) const {
    require(v.recorded(), "grad requested for an unrecorded var");
    const Node& n = nodes_[static_cast<size_t>(v.node)];
    if (n.grad.defined()) return n.grad;
    return Tensor<T>::zeros(n.value.shape());
  }

  void backward(const Var<T>& root) {
    require(recording_, "backward on a non-recording graph");
    require(root.recorded() && root.value.numel() == 1, "backward root must be a recorded scalar");
    grad_buf(root.node)[0] = T(1);
    for (std::int64_t i = root.node; i >= 0; --i) {
      Node& n = nodes_[static_cast<size_t>(i)];
      if (n.backward && n.needs_grad && n.grad.defined()) n.backward(*this);
    }
  }

  size_t size() const { return nodes_.size(); }

  // --- used by op implementations ---
  std::int32_t push(Tensor<T> value, bool needs_grad, std::function<void(Graph&)> backward) {
    nodes_.push_back(Node{std::move(value), Tensor<T>(), needs_grad, std::move(backward)});
    return static_cast<std::int32_t>(nodes_.size() - 1);
  }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool needs_grad = false;
    std::function<void(Graph&)> backward;
  };
  bool recording_ = true;
  std::vector<Node> nodes_;
};

namespace detail {

template <typename T>
Graph<T>* graph_of(const Var<T>& a) {
  return a.graph;
}

template <typename T, typename... Rest>
Graph<T>* graph_of(const Var<T>& a, const Rest&... rest) {
  Graph<T>* g = a.graph;
  Graph<T>* r = graph_of(rest...);
  if (g && r) require(g == r, "vars belong to different graphs");
  return g ? g : r;
}

template <typename T>
bool any_needs(Graph<T>* g, std::initializer_list<const Var<T>*> vars) {
  if (!g) return false;
  for (const Var<T>* v : vars)
    if (g->needs_grad(*v)) return true;
  return false;
}

// Wraps a computed value into a Var, recording the backward closure only when
// needed. The closure receives (graph, out_node) through capture.
template <typename T, typename MakeBackward>
Var<T> make_op(Graph<T>* g, Tensor<T> value, std::initializer_list<const Var<T>*> parents,
               MakeBackward&& make_backward) {
  Var<T> out;
  out.value = std::move(value);
  if (!g || !g->recording()) return out;
  for (const Var<T>* p : parents)
    require(p->recorded(), "op input was created outside the recording graph");
  const bool needs = any_needs(g, parents);
  out.graph = g;
  if (!needs) {
    out.node = g->push(out.value, false, nullptr);
    return out;
  }
  // out.node is assigned after push; capture via shared slot.
  auto node_slot = std::make_shared<std::int32_t>(-1);
  auto fn = make_backward(node_slot);
  out.node = g->push(out.value, true, std::move(fn));
  *node_slot = out.node;
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------- binary ---

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require(a.value.same_shape(b.value), "add: shape mismatch");
  Graph<T>* g = detail::graph_of(a, b);
  Tensor<T> out(a.value.shape());
  kern::vadd(a.value.data(), b.value.data(), out.data(), out.numel());
  const std::int64_t n = out.numel();
  auto an = a.node, bn = b.node;
  return detail::make_op(
      g, std::move(out), {&a, &b}, [=](auto slot) {
        return [=](Graph<T>& gg) {
          const T* dy = gg.grad_buf(*slot);
          kern::axpy(T(1), dy, gg.grad_buf(an), n);
          kern::axpy(T(1), dy, gg.grad_buf(bn), n);
        };
      });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require(a.value.same_shape(b.value), "sub: shape mismatch");
  Graph<T>* g = detail::graph_of(a, b);
  Tensor<T> out(a.value.shape());
  kern::vsub(a.value.data(), b.value.data(), out.data(), out.numel());
  const std::int64_t n = out.numel();
  auto an = a.node, bn = b.node;
  return detail::make_op(
      g, std::move(out), {&a, &b}, [=](auto slot) {
        return [=](Graph<T>& gg) {
          const T* dy = gg.grad_buf(*slot);
          kern::axpy(T(1), dy, gg.grad_buf(an), n);
          kern::axpy(T(-1), dy, gg.grad_buf(bn), n);
        };
      });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require(a.value.same_shape(b.value), "mul: shape mismatch");
  Graph<T>* g = detail::graph_of(a, b);
  Tensor<T> out(a.value.shape());
  kern::vmul(a.value.data(), b.value.data(), out.data(), out.numel());
  const std::int64_t n = out.numel();
  auto an = a.node, bn = b.node;
  Tensor<T> av = a.value, bv = b.value;
  return detail::make_op(
      g, std::move(out), {&a, &b}, [=](auto slot) {
        return [=](Graph<T>& gg) {
          const T* dy = gg.grad_buf(*slot);
          T* da = gg.grad_buf(an);
          T* db = gg.grad_buf(bn);
          const T* ap = av.data();
          const T* bp = bv.data();
          for (std::int64_t i = 0; i < n; ++i) {
            da[i] += dy[i] * bp[i];
            db[i] += dy[i] * ap[i];
          }
        };
      });
}

template <typename T>
Var<T> div(const Var<T>& a, const Var<T>& b) {
  require(a.value.same_shape(b.value), "div: shape mismatch");
  Graph<T>* g = detail::graph_of(a, b);
  Tensor<T> out(a.value.shape());
  const std::int64_t n = out.numel();
  for (std::int64_t i = 0; i < n; ++i) out[i] = a.value[i] / b.value[i];
  auto an = a.node, bn = b.node;
  Tensor<T> av = a.value, bv = b.value;
  return detail::make_op(
      g, std::move(out), {&a, &b}, [=](auto slot) {
        return [=](Graph<T>& gg) {
          const T* dy = gg.grad_buf(*slot);
          T* da = gg.grad_buf(an);
          T* db = gg.grad_buf(bn);
          for (std::int64_t i = 0; i < n; ++i) {
            const T inv = T(1) / bv[i];
            da[i] += dy[i] * inv;
            db[i] -= dy[i] * av[i] * inv * inv;
          }
        };
      });
}

// ----------------------------------------------------------- with scalars ---

template <typename T>
Var<T> adds(const Var<T>& a, T s) {
  Graph<T>* g = detail::graph_of(a);
  Tensor<T> out(a.value.shape());
  const std::int64_t n = out.numel();
  for (std::int64_t i = 0; i < n; ++i) out[i] = a.value[i] + s;
  auto an = a.node;
  return detail::make_op(g, std::move(out), {&a}, [=](auto slot) {
    return [=](Graph<T>& gg) { kern::axpy(T(1), gg.grad_buf(*slot), gg.grad_buf(an), n); };
  });
}

template <typename T>
Var<T> muls(const Var<T>& a, T s) {
  Graph<T>* g = detail::graph_of(a);
  Tensor<T> out(a.value.shape());
  const std::int64_t n = out.numel();
  for (std::int64_t i = 0; i < n; ++i) out[i] = a.value[i] * s;
  auto an = a.node;
  return detail::make_op(g, std::move(out), {&a}, [=](auto slot) {
    return [=](Graph<T>& gg) { kern::axpy(s, gg.grad_buf(*slot), gg.grad_buf(an), n); };
  });
}

template <typename T>
Var<T> neg(const Var<T>& a) {
  return muls(a, T(-1));
}

// ---------------------------------------------------------------- matmul ---

// C = alpha * op(A) @ op(B); shapes follow the ops.
template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b, bool ta = false, bool tb = false,
              T alpha = T(1)) {
  const std::int64_t m = ta ? a.cols() : a.rows();
  const std::int64_t k = ta ? a.rows() : a.cols();
  const std::int64_t kb = tb ? b.cols() : b.rows();
  const std::int64_t n = tb ? b.rows() : b.cols();
  require(k == kb, "matmul: inner dimensions differ");
  Graph<T>* g = detail::graph_of(a, b);
  Tensor<T> out({m, n});
  kern::gemm(ta, tb, m, n, k, alpha, a.value.data(), a.cols(), b.value.data(), b.cols(), T(0),
             out.data(), n);
  auto an = a.node, bn = b.node;
  Tensor<T> av = a.value, bv = b.value;
  const bool need_a = g && g->needs_grad(a);
  const bool need_b = g && g->needs_grad(b);
  return detail::make_op(
      g, std::move(out), {&a, &b}, [=](auto slot) {
        return [=](Graph<T>& gg) {
          const T* dy = gg.grad_buf(*slot);
          if (need_a) {
            T* da = gg.grad_buf(an);
            if (!ta)  // dA(m,k) += alpha * dC @ op_b(B)^T
              kern::gemm(false, !tb, m, k, n, alpha, dy, n, bv.data(), bv.cols(), T(1), da,
                         av.cols());
            else  // dA(k,m) += alpha * op_b(B) @ dC^T
              kern::gemm(tb, true, k, m, n, alpha, bv.data(), bv.cols(), dy, n, T(1), da,
                         av.cols());
          }
          if (need_b) {
            T* db = gg.grad_buf(bn);
            if (!tb)  // dB(k,n) += alpha * op_a(A)^T @ dC
              kern::gemm(!ta, false, k, n, m, alpha, av.data(), av.cols(), dy, n, T(1), db,
                         bv.cols());
            else  // dB(n,k) += alpha * dC^T @ op_a(A)
              kern::gemm(true, ta, n, k, m, alpha, dy, n, av.data(), av.cols(), T(1), db,
                         bv.cols());
          }
        };
      });
}

// ------------------------------------------------------------- broadcast ---

// x (N,C) + v (numel C), broadcast over rows.
template <typename T>
Var<T> add_rowvec(const Var<T>& x, const Var<T>& v) {
  const std::int64_t n = x.rows(), c = x.cols();
  require(v.value.numel() == c, "add_rowvec: vector length mismatch");
  Graph<T>* g = detail::graph_of(x, v);
  Tensor<T> out({n, c});
  for (std::int64_t i = 0; i < n; ++i)
    kern::vadd(x.value.data() + i * c, v.value.data(), out.data() + i * c, c);
  auto xn = x.node, vn = v.node;
  return detail::make_op(
      g, std::move(out), {&x, &v}, [=](auto slot) {
        return [=](Graph<T>& gg) {
          const T* dy = gg.grad_buf(*slot);
          kern::axpy(T(1), dy, gg.grad_buf(xn), n * c);
          T* dv = gg.grad_buf(vn);
          for (std::int64_t i = 0; i < n; ++i) kern::axpy(T(1), dy + i * c, dv, c);
        };
      });
}

// ------------------------------------------------------ concat and slice ---

template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts) {
  require(!parts.empty(), "concat_rows: empty input");
  const std::int64_t c = parts[0].cols();
  std::int64_t n = 0;
  Graph<T>* g = nullptr;
  for (const auto& p : parts) {
    require(p.cols() == c, "concat_rows: column mismatch");
    n += p.rows();
    if (p.graph) g = p.graph;
  }
  Tensor<T> out({n, c});
  std::int64_t row = 0;
  for (const auto& p : parts) {
    std::copy(p.value.data(), p.value.data() + p.value.numel(), out.data() + row * c);
    row += p.rows();
  }
  Var<T> o;
  o.value = std::move(out);
  if (!g || !g->recording()) return o;
  bool needs = false;
  for (const auto& p : parts) needs |= g->needs_grad(p);
  o.graph = g;
  if (!needs) {
    o.node = g->push(o.value, false, nullptr);
    return o;
  }
  std::vector<std::pair<std::int32_t, std::int64_t>> spans;  // node, rows
  for (const auto& p : parts) spans.emplace_back(p.node, p.rows());
  auto slot = std::make_shared<std::int32_t>(-1);
  o.node = g->push(o.value, true, [=](Graph<T>& gg) {
    const T* dy = gg.grad_buf(*slot);
    std::int64_t r = 0;
    for (const auto& [pn, pr] : spans) {
      kern::axpy(T(1), dy + r * c, gg.grad_buf(pn), pr * c);
      r += pr;
    }
  });
  *slot = o.node;
  return o;
}

template <typename T>
Var<T> slice_rows(const Var<T>& a, std::int64_t r0, std::int64_t r1) {
  require(0 <= r0 && r0 < r1 && r1 <= a.rows(), "slice_rows: bad range");
  const std::int64_t c = a.cols();
  Graph<T>* g = detail::graph_of(a);
  Tensor<T> out({r1 - r0, c});
  std::copy(a.value.data() + r0 * c, a.value.data() + r1 * c, out.data());
  auto an = a.node;
  return detail::make_op(g, std::move(out), {&a}, [=](auto slot) {
    return [=](Graph<T>& gg) {
      kern::axpy(T(1), gg.grad_buf(*slot), gg.grad_buf(an) + r0 * c, (r1 - r0) * c);
    };
  });
}

template <typename T>
Var<T> slice_cols(const Var<T>& a, std::int64_t c0, std::int64_t c1) {
  require(0 <= c0 && c0 < c1 && c1 <= a.cols(), "slice_cols: bad range");
  const std::int64_t n = a.rows(), c = a.cols(), w = c1 - c0;
  Graph<T>* g = detail::graph_of(a);
  Tensor<T> out({n, w});
  for (std::int64_t i = 0; i < n; ++i)
    std::copy(a.value.data() + i * c + c0, a.value.data() + i * c + c1, out.data() + i * w);
  auto an = a.node;
  return detail::make_op(g, std::move(out), {&a}, [=](auto slot) {
    return [=](Graph<T>& gg) {
      const T* dy = gg.grad_buf(*slot);
      T* da = gg.grad_buf(an);
      for (std::int64_t i = 0; i < n; ++i) kern::axpy(T(1), dy + i * w, da + i * c + c0, w);
    };
  });
}

template <typename T>
Var<T> concat_cols(const std::vector<Var<T>>& parts) {
  require(!parts.empty(), "concat_cols: empty input");
  const std::int64_t n = parts[0].rows();
  std::int64_t c = 0;
  Graph<T>* g = nullptr;
  for (const auto& p : parts) {
    require(p.rows() == n, "concat_cols: row mismatch");
    c += p.cols();
    if (p.graph) g = p.graph;
  }
  Tensor<T> out({n, c});
  std::int64_t col = 0;
  for (const auto& p : parts) {
    const std::int64_t w = p.cols();
    for (std::int64_t i = 0; i < n; ++i)
      std::copy(p.value.data() + i * w, p.value.data() + (i + 1) * w,
                out.data() + i * c + col);
    col += w;
  }
  Var<T> o;
  o.value = std::move(out);
  if (!g || !g->recording()) return o;
  bool needs = false;
  for (const auto& p : parts) needs |= g->needs_grad(p);
  o.graph = g;
  if (!needs) {
    o.node = g->push(o.value, false, nullptr);
    return o;
  }
  std::vector<std::pair<std::int32_t, std::int64_t>> spans;
  for (const auto& p : parts) spans.emplace_back(p.node, p.cols());
  auto slot = std::make_shared<std::int32_t>(-1);
  o.node = g->push(o.value, true, [=](Graph<T>& gg) {
    const T* dy = gg.grad_buf(*slot);
    std::int64_t cc = 0;
    for (const auto& [pn, pw] : spans) {
      T* dp = gg.grad_buf(pn);
      for (std::int64_t i = 0; i < n; ++i) kern::axpy(T(1), dy + i * c + cc, dp + i * pw, pw);
      cc += pw;
    }
  });
  *slot = o.node;
  return o;
}

// ------------------------------------------------------- gather / edges ---

template <typename T>
Var<T> gather_rows(const Var<T>& a, std::vector<std::int64_t> idx) {
  const std::int64_t c = a.cols();
  Graph<T>* g = detail::graph_of(a);
  Tensor<T> out({static_cast<std::int64_t>(idx.size()), c});
  for (size_t i = 0; i < idx.size(); ++i) {
    require(idx[i] >= 0 && idx[i] < a.rows(), "gather_rows: index out of range");
    std::copy(a.value.data() + idx[i] * c, a.value.data() + (idx[i] + 1) * c,
              out.data() + static_cast<std::int64_t>(i) * c);
  }
  auto an = a.node;
  auto ids = std::make_shared<std::vector<std::int64_t>>(std::move(idx));
  return detail::make_op(g, std::move(out), {&a}, [=](auto slot) {
    return [=](Graph<T>& gg) {
      const T* dy = gg.grad_buf(*slot);
      T* da = gg.grad_buf(an);
      for (size_t i = 0; i < ids->size(); ++i)
        kern::axpy(T(1), dy + static_cast<std::int64_t>(i) * c, da + (*ids)[i] * c, c);
    };
  });
}

// Edge tensor for graph convolutions: row (i*k + j) = [x_i, x_nbr - x_i].
template <typename T>
Var<T> edge_features(const Var<T>& x, const std::vector<std::vector<std::int64_t>>& nbrs) {
  const std::int64_t n = x.rows(), c = x.cols();
  require(static_cast<std::int64_t>(nbrs.size()) == n, "edge_features: neighbor list size");
  const std::int64_t k = static_cast<std::int64_t>(nbrs.empty() ? 0 : nbrs[0].size());
  Graph<T>* g = detail::graph_of(x);
  Tensor<T> out({n * k, 2 * c});
  const T* xp = x.value.data();
  for (std::int64_t i = 0; i < n; ++i) {
    require(static_cast<std::int64_t>(nbrs[i].size()) == k, "edge_features: ragged neighbors");
    for (std::int64_t j = 0; j < k; ++j) {
      const std::int64_t nb = nbrs[i][j];
      T* row = out.data() + (i * k + j) * 2 * c;
      std::copy(xp + i * c, xp + (i + 1) * c, row);
      kern::vsub(xp + nb * c, xp + i * c, row + c, c);
    }
  }
  auto xn = x.node;
  auto ids = std::make_shared<std::vector<std::vector<std::int64_t>>>(nbrs);
  return detail::make_op(g, std::move(out), {&x}, [=](auto slot) {
    return [=](Graph<T>& gg) {
      const T* dy = gg.grad_buf(*slot);
      T* dx = gg.grad_buf(xn);
      for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = 0; j < k; ++j) {
          const T* row = dy + (i * k + j) * 2 * c;
          const std::int64_t nb = (*ids)[i][j];
          kern::axpy(T(1), row, dx + i * c, c);
          kern::axpy(T(-1), row + c, dx + i * c, c);
          kern::axpy(T(1), row + c, dx + nb * c, c);
        };
    };
  });
}

// Max over each group of k consecutive rows: (G*k, C) -> (G, C).
template <typename T>
Var<T> rowgroup_max(const Var<T>& a, std::int64_t k) {
  const std::int64_t nk = a.rows(), c = a.cols();
  require(k > 0 && nk % k == 0, "rowgroup_max: rows not divisible by group size");
  const std::int64_t groups = nk / k;
  Graph<T>* g = detail::graph_of(a);
  Tensor<T> out({groups, c});
  auto arg = std::make_shared<std::vector<std::int32_t>>(static_cast<size_t>(groups * c));
  const T* ap = a.value.data();
  for (std::int64_t gi = 0; gi < groups; ++gi) {
    T* orow = out.data() + gi * c;
    std::int32_t* argrow = arg->data() + gi * c;
    std::copy(ap + gi * k * c, ap + (gi * k + 1) * c, orow);
    std::fill(argrow, argrow + c, 0);
    for (std::int64_t j = 1; j < k; ++j) {
      const T* row = ap + (gi * k + j) * c;
      for (std::int64_t cc = 0; cc < c; ++cc)
        if (row[cc] > orow[cc]) {
          orow[cc] = row[cc];
          argrow[cc] = static_cast<std::int32_t>(j);
        }
    }
  }
  auto an = a.node;
  return detail::make_op(g, std::move(out), {&a}, [=](auto slot) {
    return [=](Graph<T>& gg) {
      const T* dy = gg.grad_buf(*slot);
      T* da = gg.grad_buf(an);
      for (std::int64_t gi = 0; gi < groups; ++gi)
        for (std::int64_t cc = 0; cc < c; ++cc)
          da[(gi * k + (*arg)[gi * c + cc]) * c + cc] += dy[gi * c + cc];
    };
  });
}

// Column-wise max over all rows: (N, C) -> (1, C).
template <typename T>
Var<T> colwise_max(const Var<T>& a) {
  return rowgroup_max(a, a.rows());
}

// Column-wise mean over all rows: (N, C) -> (1, C).
template <typename T>
Var<T> colwise_mean(const Var<T>& a) {
  const std::int64_t n = a.rows(), c = a.cols();
  Graph<T>* g = detail::graph_of(a);
  Tensor<T> out({1, c});
  const T inv = T(1) / static_cast<T>(n);
  for (std::int64_t i = 0; i < n; ++i) kern::axpy(inv, a.value.data() + i * c, out.data(), c);
  auto an = a.node;
  return detail::make_op(g, std::move(out), {&a}, [=](auto slot) {
    return [=](Graph<T>& gg) {
      const T* dy = gg.grad_buf(*slot);
      T* da = gg.grad_buf(an);
      for (std::int64_t i = 0; i < n; ++i) kern::axpy(inv, dy, da + i * c, c);
    };
  });
}

// ------------------------------------------------------------ reductions ---

template <typename T>
Var<T> reduce_sum(const Var<T>& a) {
  Graph<T>* g = detail::graph_of(a);
  Tensor<T> out = Tensor<T>::scalar(kern::vsum(a.value.data(), a.value.numel()));
  const std::int64_t n = a.value.numel();
  auto an = a.node;
  return detail::make_op(g, std::move(out), {&a}, [=](auto slot) {
    return [=](Graph<T>& gg) {
      const T dy = gg.grad_buf(*slot)[0];
      T* da = gg.grad_buf(an);
      for (std::int64_t i = 0; i < n; ++i) da[i] += dy;
    };
  });
}

template <typename T>
Var<T> reduce_mean(const Var<T>& a) {
  return muls(reduce_sum(a), T(1) / static_cast<T>(a.value.numel()));
}

// ----------------------------------------------------------- activations ---

namespace detail {

// Shared scaffold for elementwise unary ops with backward df(x, y).
template <typename T, typename Fwd, typename Bwd>
Var<T> unary(const Var<T>& a, Fwd fwd, Bwd bwd) {
  Graph<T>* g = graph_of(a);
  const std::int64_t n = a.value.numel();
  Tensor<T> out(a.value.shape());
  for (std::int64_t i = 0; i < n; ++i) out[i] = fwd(a.value[i]);
  auto an = a.node;
  Tensor<T> av = a.value, ov = out;
  return make_op(g, std::move(out), {&a}, [=](auto slot) {
    return [=](Graph<T>& gg) {
      const T* dy = gg.grad_buf(*slot);
      T* da = gg.grad_buf(an);
      for (std::int64_t i = 0; i < n; ++i) da[i] += dy[i] * bwd(av[i], ov[i]);
    };
  });
}

}  // namespace detail

template <typename T>
Var<T> relu(const Var<T>& a) {
  return detail::unary(
      a, [](T x) { return x > T(0) ? x : T(0); },
      [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> leaky_relu(const Var<T>& a, T slope) {
  return detail::unary(
      a, [=](T x) { return x > T(0) ? x : slope * x; },
      [=](T x, T) { return x > T(0) ? T(1) : slope; });
}

template <typename T>
Var<T> gelu(const Var<T>& a) {
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  constexpr double inv_sqrt2pi = 0.3989422804014326779;
  return detail::unary(
      a,
      [](T x) {
        return static_cast<T>(0.5 * double(x) * (1.0 + std::erf(double(x) * inv_sqrt2)));
      },
      [](T x, T) {
        const double xd = double(x);
        const double cdf = 0.5 * (1.0 + std::erf(xd * inv_sqrt2));
        return static_cast<T>(cdf + xd * inv_sqrt2pi * std::exp(-0.5 * xd * xd));
      });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  return detail::unary(
      a, [](T x) { return T(1) / (T(1) + std::exp(-x)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> logv(const Var<T>& a) {
  return detail::unary(a, [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

template <typename T>
Var<T> expv(const Var<T>& a) {
  return detail::unary(a, [](T x) { return std::exp(x); }, [](T, T y) { return y; });
}

template <typename T>
Var<T> sqrtv(const Var<T>& a) {
  return detail::unary(
      a, [](T x) { return std::sqrt(x); },
      [](T, T y) { return y > T(0) ? T(1) / (T(2) * y) : T(0); });
}

template <typename T>
Var<T> square(const Var<T>& a) {
  return detail::unary(a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
}

template <typename T>
Var<T> powc(const Var<T>& a, T p) {
  return detail::unary(
      a, [=](T x) { return std::pow(x, p); },
      [=](T x, T) { return p * std::pow(x, p - T(1)); });
}

template <typename T>
Var<T> absv(const Var<T>& a) {
  return detail::unary(
      a, [](T x) { return std::abs(x); },
      [](T x, T) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Var<T> clampv(const Var<T>& a, T lo, T hi) {
  return detail::unary(
      a, [=](T x) { return x < lo ? lo : (x > hi ? hi : x); },
      [=](T x, T) { return (x >= lo && x <= hi) ? T(1) : T(0); });
}

// ------------------------------------------------------------- softmax ---

template <typename T>
Var<T> softmax_rows(const Var<T>& a) {
  const std::int64_t n = a.rows(), c = a.cols();
  Graph<T>* g = detail::graph_of(a);
  Tensor<T> out({n, c});
  for (std::int64_t i = 0; i < n; ++i) {
    const T* row = a.value.data() + i * c;
    T* orow = out.data() + i * c;
    const T m = kern::vmax(row, c, nullptr);
    T s = T(0);
    for (std::int64_t j = 0; j < c; ++j) {
      orow[j] = std::exp(row[j] - m);
      s += orow[j];
    }
    const T inv = T(1) / s;
    for (std::int64_t j = 0; j < c; ++j) orow[j] *= inv;
  }
  auto an = a.node;
  Tensor<T> ov = out;
  return detail::make_op(g, std::move(out), {&a}, [=](auto slot) {
    return [=](Graph<T>& gg) {
      const T* dy = gg.grad_buf(*slot);
      T* da = gg.grad_buf(an);
      for (std::int64_t i = 0; i < n; ++i) {
        const T* yrow = ov.data() + i * c;
        const T* dyrow = dy + i * c;
        const T dotv = kern::dot(dyrow, yrow, c);
        for (std::int64_t j = 0; j < c; ++j) da[i * c + j] += yrow[j] * (dyrow[j] - dotv);
      }
    };
  });
}

// ------------------------------------------------------------ layernorm ---

// Per-row normalization over the channel axis with learnable gain and bias.
template <typename T>
Var<T> layernorm_rows(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps) {
  const std::int64_t n = x.rows(), c = x.cols();
  require(gamma.value.numel() == c && beta.value.numel() == c, "layernorm: param length");
  Graph<T>* g = detail::graph_of(x, gamma, beta);
  Tensor<T> out({n, c});
  Tensor<T> xhat({n, c});
  Tensor<T> inv_std({n});
  const T* xp = x.value.data();
  for (std::int64_t i = 0; i < n; ++i) {
    const T* row = xp + i * c;
    T mu = kern::vsum(row, c) / static_cast<T>(c);
    T var = T(0);
    for (std::int64_t j = 0; j < c; ++j) {
      const T d = row[j] - mu;
      var += d * d;
    }
    var /= static_cast<T>(c);
    const T istd = T(1) / std::sqrt(var + eps);
    inv_std[i] = istd;
    for (std::int64_t j = 0; j < c; ++j) {
      const T xh = (row[j] - mu) * istd;
      xhat.at(i, j) = xh;
      out.at(i, j) = gamma.value[j] * xh + beta.value[j];
    }
  }
  auto xnode = x.node, gnode = gamma.node, bnode = beta.node;
  return detail::make_op(
      g, std::move(out), {&x, &gamma, &beta}, [=](auto slot) {
        return [=](Graph<T>& gg) {
          const T* dy = gg.grad_buf(*slot);
          T* dx = gg.grad_buf(xnode);
          T* dgamma = gg.grad_buf(gnode);
          T* dbeta = gg.grad_buf(bnode);
          for (std::int64_t i = 0; i < n; ++i) {
            const T* dyrow = dy + i * c;
            const T* xhrow = xhat.data() + i * c;
            T mean_dxhat = T(0), mean_dxhat_xhat = T(0);
            for (std::int64_t j = 0; j < c; ++j) {
              dgamma[j] += dyrow[j] * xhrow[j];
              dbeta[j] += dyrow[j];
              const T dxh = dyrow[j] * gamma.value[j];
              mean_dxhat += dxh;
              mean_dxhat_xhat += dxh * xhrow[j];
            }
            mean_dxhat /= static_cast<T>(c);
            mean_dxhat_xhat /= static_cast<T>(c);
            for (std::int64_t j = 0; j < c; ++j) {
              const T dxh = dyrow[j] * gamma.value[j];
              dx[i * c + j] += inv_std[i] * (dxh - mean_dxhat - xhrow[j] * mean_dxhat_xhat);
            }
          }
        };
      });
}

// --------------------------------------------------------------- norms ---

// Euclidean norm of all elements, safe gradient at zero.
template <typename T>
Var<T> l2norm(const Var<T>& a) {
  Graph<T>* g = detail::graph_of(a);
  const std::int64_t n = a.value.numel();
  const T ss = kern::dot(a.value.data(), a.value.data(), n);
  const T norm = std::sqrt(ss);
  Tensor<T> out = Tensor<T>::scalar(norm);
  auto an = a.node;
  Tensor<T> av = a.value;
  return detail::make_op(g, std::move(out), {&a}, [=](auto slot) {
    return [=](Graph<T>& gg) {
      if (norm <= T(0)) return;
      const T dy = gg.grad_buf(*slot)[0];
      kern::axpy(dy / norm, av.data(), gg.grad_buf(an), n);
    };
  });
}

// Cosine similarity between two vectors, denominator clamped away from zero.
template <typename T>
Var<T> cosine_sim(const Var<T>& a, const Var<T>& b) {
  require(a.value.numel() == b.value.numel(), "cosine_sim: length mismatch");
  Graph<T>* g = detail::graph_of(a, b);
  const std::int64_t n = a.value.numel();
  const T* ap = a.value.data();
  const T* bp = b.value.data();
  const T dotv = kern::dot(ap, bp, n);
  const T na = std::sqrt(kern::dot(ap, ap, n));
  const T nb = std::sqrt(kern::dot(bp, bp, n));
  const T denom = std::max(na * nb, T(1e-12));
  const T phi = dotv / denom;
  Tensor<T> out = Tensor<T>::scalar(phi);
  auto anode = a.node, bnode = b.node;
  Tensor<T> av = a.value, bv = b.value;
  return detail::make_op(
      g, std::move(out), {&a, &b}, [=](auto slot) {
        return [=](Graph<T>& gg) {
          const T dy = gg.grad_buf(*slot)[0];
          T* da = gg.grad_buf(anode);
          T* db = gg.grad_buf(bnode);
          const T na2 = std::max(na * na, T(1e-12));
          const T nb2 = std::max(nb * nb, T(1e-12));
          for (std::int64_t i = 0; i < n; ++i) {
            da[i] += dy * (bv[i] / denom - phi * av[i] / na2);
            db[i] += dy * (av[i] / denom - phi * bv[i] / nb2);
          }
        };
      });
}

// ---------------------------------------------------------- cross entropy ---

// logits: numel K; returns -log softmax(logits)[label].
template <typename T>
Var<T> cross_entropy_logits(const Var<T>& logits, std::int64_t label) {
  const std::int64_t k = logits.value.numel();
  require(label >= 0 && label < k, "cross_entropy: label out of range");
  Graph<T>* g = detail::graph_of(logits);
  const T* lp = logits.value.data();
  const T m = kern::vmax(lp, k, nullptr);
  T s = T(0);
  for (std::int64_t i = 0; i < k; ++i) s += std::exp(lp[i] - m);
  const T lse = m + std::log(s);
  Tensor<T> out = Tensor<T>::scalar(lse - lp[label]);
  auto lnode = logits.node;
  Tensor<T> lv = logits.value;
  return detail::make_op(g, std::move(out), {&logits}, [=](auto slot) {
    return [=](Graph<T>& gg) {
      const T dy = gg.grad_buf(*slot)[0];
      T* dl = gg.grad_buf(lnode);
      for (std::int64_t i = 0; i < k; ++i) {
        const T p = std::exp(lv[i] - lse);
        dl[i] += dy * (p - (i == label ? T(1) : T(0)));
      }
    };
  });
}

// ---------------------------------------------------------------- conv2d ---

// x: (H*W, Cin) pixel rows; weight: (Cout, Cin*kh*kw); bias: (Cout).
// Returns (Ho*Wo, Cout) with Ho = (H + 2*pad - kh)/stride + 1.
template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, std::int64_t h,
              std::int64_t w, std::int64_t kh, std::int64_t kw, std::int64_t stride,
              std::int64_t pad) {
  const std::int64_t cin = x.cols();
  require(x.rows() == h * w, "conv2d: input rows != H*W");
  require(weight.cols() == cin * kh * kw, "conv2d: weight columns mismatch");
  const std::int64_t cout = weight.rows();
  require(bias.value.numel() == cout, "conv2d: bias length mismatch");
  const std::int64_t ho = (h + 2 * pad - kh) / stride + 1;
  const std::int64_t wo = (w + 2 * pad - kw) / stride + 1;
  require(ho > 0 && wo > 0, "conv2d: empty output");
  Graph<T>* g = detail::graph_of(x, weight, bias);

  // im2col: one row per output pixel.
  const std::int64_t patch = cin * kh * kw;
  Tensor<T> cols({ho * wo, patch});
  const T* xp = x.value.data();
  for (std::int64_t oy = 0; oy < ho; ++oy)
    for (std::int64_t ox = 0; ox < wo; ++ox) {
      T* crow = cols.data() + (oy * wo + ox) * patch;
      std::int64_t off = 0;
      for (std::int64_t dy = 0; dy < kh; ++dy)
        for (std::int64_t dx = 0; dx < kw; ++dx, off += cin) {
          const std::int64_t iy = oy * stride - pad + dy;
          const std::int64_t ix = ox * stride - pad + dx;
          if (iy < 0 || iy >= h || ix < 0 || ix >= w) {
            std::fill(crow + off, crow + off + cin, T(0));
          } else {
            std::copy(xp + (iy * w + ix) * cin, xp + (iy * w + ix + 1) * cin, crow + off);
          }
        }
    }

  Tensor<T> out({ho * wo, cout});
  kern::gemm(false, true, ho * wo, cout, patch, T(1), cols.data(), patch, weight.value.data(),
             patch, T(0), out.data(), cout);
  for (std::int64_t i = 0; i < ho * wo; ++i)
    kern::vadd(out.data() + i * cout, bias.value.data(), out.data() + i * cout, cout);

  auto xn = x.node, wn = weight.node, bn = bias.node;
  const bool need_x = g && g->needs_grad(x);
  Tensor<T> wv = weight.value;
  return detail::make_op(
      g, std::move(out), {&x, &weight, &bias}, [=](auto slot) {
        return [=](Graph<T>& gg) {
          const T* dy = gg.grad_buf(*slot);
          // dW += dY^T @ cols
          kern::gemm(true, false, cout, patch, ho * wo, T(1), dy, cout, cols.data(), patch, T(1),
                     gg.grad_buf(wn), patch);
          T* db = gg.grad_buf(bn);
          for (std::int64_t i = 0; i < ho * wo; ++i) kern::axpy(T(1), dy + i * cout, db, cout);
          if (!need_x) return;
          // dcols = dY @ W, then scatter back through the im2col map.
          Tensor<T> dcols({ho * wo, patch});
          kern::gemm(false, false, ho * wo, patch, cout, T(1), dy, cout, wv.data(), patch, T(0),
                     dcols.data(), patch);
          T* dx = gg.grad_buf(xn);
          for (std::int64_t oy = 0; oy < ho; ++oy)
            for (std::int64_t ox = 0; ox < wo; ++ox) {
              const T* crow = dcols.data() + (oy * wo + ox) * patch;
              std::int64_t off = 0;
              for (std::int64_t ddy = 0; ddy < kh; ++ddy)
                for (std::int64_t ddx = 0; ddx < kw; ++ddx, off += cin) {
                  const std::int64_t iy = oy * stride - pad + ddy;
                  const std::int64_t ix = ox * stride - pad + ddx;
                  if (iy < 0 || iy >= h || ix < 0 || ix >= w) continue;
                  kern::axpy(T(1), crow + off, dx + (iy * w + ix) * cin, cin);
                }
            }
        };
      });
}

// Linear layer helper: x (N, Cin) @ W^T (Cin, Cout) + b.
template <typename T>
Var<T> linear(const Var<T>& x, const Var<T>& weight, const Var<T>& bias) {
  return add_rowvec(matmul(x, weight, false, true), bias);
}

}  // namespace lemon::ad
