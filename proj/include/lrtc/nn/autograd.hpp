#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <unordered_set>
#include <vector>

#include "lrtc/nn/tensor.hpp"

namespace lrtc::nn {

struct Node;
using NodePtr = std::shared_ptr<Node>;

/// A value in the computation graph. Parents are held strongly, so a loss
/// keeps its whole graph alive until it is dropped.
struct Node {
    Tensor value;
    Tensor grad;  // allocated on first accumulation
    bool requires_grad = false;
    std::vector<NodePtr> parents;
    std::function<void(Node &)> backward;

    Tensor &grad_buffer() {
        if (grad.empty()) grad = Tensor(value.shape(), 0.0);
        return grad;
    }
};

class Var {
   public:
    Var() = default;
    explicit Var(NodePtr n) : node_(std::move(n)) {}

    const Tensor &value() const { return node_->value; }
    Tensor &mutable_value() { return node_->value; }
    const Shape &shape() const { return node_->value.shape(); }
    std::size_t rows() const { return node_->value.rows(); }
    std::size_t cols() const { return node_->value.cols(); }
    double item() const { return node_->value.item(); }

    bool requires_grad() const { return node_ && node_->requires_grad; }

    /// Gradient accumulated by backward(); zeros when none has flowed yet.
    const Tensor &grad() const { return node_->grad_buffer(); }
    void zero_grad() {
        if (!node_->grad.empty()) node_->grad.fill(0.0);
    }

    Node *node() const { return node_.get(); }
    const NodePtr &ptr() const { return node_; }
    explicit operator bool() const { return static_cast<bool>(node_); }

   private:
    NodePtr node_;
};

inline Var constant(Tensor t) {
    auto n = std::make_shared<Node>();
    n->value = std::move(t);
    return Var(std::move(n));
}

inline Var parameter(Tensor t) {
    auto n = std::make_shared<Node>();
    n->value = std::move(t);
    n->requires_grad = true;
    return Var(std::move(n));
}

namespace detail {

inline Var make_result(Tensor value, std::vector<Var> parents, std::function<void(Node &)> backward) {
    auto n = std::make_shared<Node>();
    n->value = std::move(value);
    for (const auto &p : parents) n->requires_grad = n->requires_grad || p.requires_grad();
    if (n->requires_grad) {
        for (auto &p : parents) n->parents.push_back(p.ptr());
        n->backward = std::move(backward);
    }
    return Var(std::move(n));
}

inline void require(bool ok, const std::string &what) {
    if (!ok) throw ShapeError(what);
}

inline void require_matrix(const Var &a, const char *op) {
    require(a.value().is_matrix(), std::string(op) + ": expected a matrix, got " + shape_str(a.shape()));
}

}  // namespace detail

/// Reverse-mode sweep from a scalar root. Every reachable node that needs a
/// gradient is visited exactly once, in reverse topological order.
inline void backward(const Var &root) {
    if (root.value().size() != 1) throw ShapeError("backward() needs a scalar root, got " + shape_str(root.shape()));
    if (!root.requires_grad()) return;

    std::vector<Node *> order;
    std::unordered_set<Node *> seen;
    std::vector<std::pair<Node *, std::size_t>> stack{{root.node(), 0}};
    seen.insert(root.node());
    while (!stack.empty()) {
        auto &[node, next] = stack.back();
        if (next < node->parents.size()) {
            Node *p = node->parents[next++].get();
            if (p->requires_grad && seen.insert(p).second) stack.push_back({p, 0});
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    root.node()->grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node *n = *it;
        if (n->backward) n->backward(*n);
    }
}

// ---------------------------------------------------------------------------
// Elementwise

inline Var add(const Var &a, const Var &b) {
    detail::require(a.shape() == b.shape(), "add: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
    return detail::make_result(std::move(out), {a, b}, [](Node &n) {
        for (auto &p : n.parents) {
            if (!p->requires_grad) continue;
            Tensor &g = p->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i];
        }
    });
}

inline Var sub(const Var &a, const Var &b) {
    detail::require(a.shape() == b.shape(), "sub: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
    return detail::make_result(std::move(out), {a, b}, [](Node &n) {
        const double sign[2] = {1.0, -1.0};
        for (std::size_t k = 0; k < 2; ++k) {
            auto &p = n.parents[k];
            if (!p->requires_grad) continue;
            Tensor &g = p->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += sign[k] * n.grad[i];
        }
    });
}

inline Var mul(const Var &a, const Var &b) {
    detail::require(a.shape() == b.shape(), "mul: " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
    return detail::make_result(std::move(out), {a, b}, [](Node &n) {
        Node &x = *n.parents[0];
        Node &y = *n.parents[1];
        if (x.requires_grad) {
            Tensor &g = x.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * y.value[i];
        }
        if (y.requires_grad) {
            Tensor &g = y.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * x.value[i];
        }
    });
}

inline Var scale(const Var &a, double s) {
    Tensor out = a.value();
    for (double &v : out.values()) v *= s;
    return detail::make_result(std::move(out), {a}, [s](Node &n) {
        Tensor &g = n.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += s * n.grad[i];
    });
}

/// m x n plus a 1 x n row broadcast over every row.
inline Var add_row(const Var &a, const Var &row) {
    detail::require_matrix(a, "add_row");
    detail::require(row.value().size() == a.cols(),
                    "add_row: row " + shape_str(row.shape()) + " vs matrix " + shape_str(a.shape()));
    Tensor out = a.value();
    const std::size_t m = a.rows(), n = a.cols();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) out(i, j) += row.value()[j];
    }
    return detail::make_result(std::move(out), {a, row}, [m, n](Node &node) {
        Node &x = *node.parents[0];
        Node &r = *node.parents[1];
        if (x.requires_grad) {
            Tensor &g = x.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += node.grad[i];
        }
        if (r.requires_grad) {
            Tensor &g = r.grad_buffer();
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < n; ++j) g[j] += node.grad[i * n + j];
            }
        }
    });
}

namespace detail {

template <typename F, typename DF>
Var unary(const Var &a, F f, DF df_from_xy) {
    Tensor out = a.value();
    for (double &v : out.values()) v = f(v);
    return make_result(std::move(out), {a}, [df_from_xy](Node &n) {
        Node &x = *n.parents[0];
        Tensor &g = x.grad_buffer();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += n.grad[i] * df_from_xy(x.value[i], n.value[i]);
    });
}

}  // namespace detail

inline Var relu(const Var &a) {
    return detail::unary(
        a, [](double x) { return x > 0.0 ? x : 0.0; }, [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

inline Var tanh(const Var &a) {
    return detail::unary(
        a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

inline Var sigmoid(const Var &a) {
    return detail::unary(
        a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); }, [](double, double y) { return y * (1.0 - y); });
}

/// Exact (erf-based) GELU.
inline Var gelu(const Var &a) {
    return detail::unary(
        a, [](double x) { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); },
        [](double x, double) {
            const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
            const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
            return cdf + x * pdf;
        });
}

inline Var log(const Var &a) {
    return detail::unary(
        a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

// ---------------------------------------------------------------------------
// Linear algebra and layout

inline Var matmul(const Var &a, const Var &b) {
    detail::require_matrix(a, "matmul");
    detail::require_matrix(b, "matmul");
    const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
    detail::require(b.rows() == k, "matmul: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    Tensor out = Tensor::matrix(m, n);
    kernel::gemm(false, false, m, n, k, a.value().values().data(), b.value().values().data(), out.values().data(),
                 false);
    return detail::make_result(std::move(out), {a, b}, [m, n, k](Node &node) {
        Node &x = *node.parents[0];
        Node &y = *node.parents[1];
        const double *dc = node.grad.values().data();
        if (x.requires_grad) {  // dA = dC * B^T
            kernel::gemm(false, true, m, k, n, dc, y.value.values().data(), x.grad_buffer().values().data(), true);
        }
        if (y.requires_grad) {  // dB = A^T * dC
            kernel::gemm(true, false, k, n, m, x.value.values().data(), dc, y.grad_buffer().values().data(), true);
        }
    });
}

inline Var transpose(const Var &a) {
    detail::require_matrix(a, "transpose");
    const std::size_t m = a.rows(), n = a.cols();
    Tensor out = Tensor::matrix(n, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) out(j, i) = a.value()(i, j);
    }
    return detail::make_result(std::move(out), {a}, [m, n](Node &node) {
        Tensor &g = node.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) g(i, j) += node.grad(j, i);
        }
    });
}

/// Embedding lookup: rows of `table` selected by `ids`.
inline Var gather_rows(const Var &table, const std::vector<int> &ids) {
    detail::require_matrix(table, "gather_rows");
    detail::require(!ids.empty(), "gather_rows: no ids");
    const std::size_t d = table.cols();
    Tensor out = Tensor::matrix(ids.size(), d);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        detail::require(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < table.rows(),
                        "gather_rows: id " + std::to_string(ids[i]) + " out of range");
        const auto src = table.value().row(static_cast<std::size_t>(ids[i]));
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return detail::make_result(std::move(out), {table}, [ids, d](Node &node) {
        Tensor &g = node.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < ids.size(); ++i) {
            double *dst = g.values().data() + static_cast<std::size_t>(ids[i]) * d;
            for (std::size_t j = 0; j < d; ++j) dst[j] += node.grad(i, j);
        }
    });
}

inline Var slice_rows(const Var &a, std::size_t start, std::size_t count) {
    detail::require_matrix(a, "slice_rows");
    detail::require(count > 0 && start + count <= a.rows(), "slice_rows: out of range");
    const std::size_t n = a.cols();
    std::vector<double> data(a.value().values().begin() + static_cast<std::ptrdiff_t>(start * n),
                             a.value().values().begin() + static_cast<std::ptrdiff_t>((start + count) * n));
    return detail::make_result(Tensor({count, n}, std::move(data)), {a}, [start, n](Node &node) {
        Tensor &g = node.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < node.grad.size(); ++i) g[start * n + i] += node.grad[i];
    });
}

inline Var slice_cols(const Var &a, std::size_t start, std::size_t count) {
    detail::require_matrix(a, "slice_cols");
    detail::require(count > 0 && start + count <= a.cols(), "slice_cols: out of range");
    const std::size_t m = a.rows();
    Tensor out = Tensor::matrix(m, count);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < count; ++j) out(i, j) = a.value()(i, start + j);
    }
    return detail::make_result(std::move(out), {a}, [start, m, count](Node &node) {
        Tensor &g = node.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < count; ++j) g(i, start + j) += node.grad(i, j);
        }
    });
}

inline Var concat_cols(const std::vector<Var> &parts) {
    detail::require(!parts.empty(), "concat_cols: no inputs");
    const std::size_t m = parts[0].rows();
    std::size_t total = 0;
    for (const auto &p : parts) {
        detail::require_matrix(p, "concat_cols");
        detail::require(p.rows() == m, "concat_cols: row mismatch");
        total += p.cols();
    }
    Tensor out = Tensor::matrix(m, total);
    std::size_t off = 0;
    for (const auto &p : parts) {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < p.cols(); ++j) out(i, off + j) = p.value()(i, j);
        }
        off += p.cols();
    }
    return detail::make_result(std::move(out), parts, [m, total](Node &node) {
        std::size_t off = 0;
        for (auto &p : node.parents) {
            const std::size_t w = p->value.cols();
            if (p->requires_grad) {
                Tensor &g = p->grad_buffer();
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < w; ++j) g(i, j) += node.grad[i * total + off + j];
                }
            }
            off += w;
        }
    });
}

inline Var concat_rows(const std::vector<Var> &parts) {
    detail::require(!parts.empty(), "concat_rows: no inputs");
    const std::size_t n = parts[0].cols();
    std::vector<double> data;
    std::size_t rows = 0;
    for (const auto &p : parts) {
        detail::require_matrix(p, "concat_rows");
        detail::require(p.cols() == n, "concat_rows: column mismatch");
        data.insert(data.end(), p.value().values().begin(), p.value().values().end());
        rows += p.rows();
    }
    return detail::make_result(Tensor({rows, n}, std::move(data)), parts, [](Node &node) {
        std::size_t off = 0;
        for (auto &p : node.parents) {
            const std::size_t sz = p->value.size();
            if (p->requires_grad) {
                Tensor &g = p->grad_buffer();
                for (std::size_t i = 0; i < sz; ++i) g[i] += node.grad[off + i];
            }
            off += sz;
        }
    });
}

// ---------------------------------------------------------------------------
// Reductions and pooling

inline Var sum(const Var &a) {
    double s = 0.0;
    for (double v : a.value().values()) s += v;
    return detail::make_result(Tensor::scalar(s), {a}, [](Node &node) {
        Tensor &g = node.parents[0]->grad_buffer();
        const double d = node.grad[0];
        for (double &v : g.values()) v += d;
    });
}

inline Var mean(const Var &a) { return scale(sum(a), 1.0 / static_cast<double>(a.value().size())); }

/// Column-wise mean over rows: m x n -> 1 x n.
inline Var mean_rows(const Var &a) {
    detail::require_matrix(a, "mean_rows");
    const std::size_t m = a.rows(), n = a.cols();
    Tensor out = Tensor::matrix(1, n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) out[j] += a.value()(i, j);
    }
    for (double &v : out.values()) v /= static_cast<double>(m);
    return detail::make_result(std::move(out), {a}, [m, n](Node &node) {
        Tensor &g = node.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) g(i, j) += node.grad[j] / static_cast<double>(m);
        }
    });
}

/// Max pooling over windows of rows: m x n -> ((m - window) / stride + 1) x n.
/// Ties route the gradient to the first maximal row.
inline Var max_pool_rows(const Var &a, std::size_t window, std::size_t stride) {
    detail::require_matrix(a, "max_pool_rows");
    detail::require(window >= 1 && stride >= 1 && window <= a.rows(), "max_pool_rows: bad window");
    const std::size_t m = a.rows(), n = a.cols();
    const std::size_t out_rows = (m - window) / stride + 1;
    Tensor out = Tensor::matrix(out_rows, n);
    std::vector<std::size_t> argmax(out_rows * n);
    for (std::size_t o = 0; o < out_rows; ++o) {
        for (std::size_t j = 0; j < n; ++j) {
            std::size_t best = o * stride;
            for (std::size_t i = o * stride + 1; i < o * stride + window; ++i) {
                if (a.value()(i, j) > a.value()(best, j)) best = i;
            }
            argmax[o * n + j] = best;
            out(o, j) = a.value()(best, j);
        }
    }
    return detail::make_result(std::move(out), {a}, [argmax = std::move(argmax), n](Node &node) {
        Tensor &g = node.parents[0]->grad_buffer();
        for (std::size_t k = 0; k < argmax.size(); ++k) g(argmax[k], k % n) += node.grad[k];
    });
}

/// Column-wise max over all rows: m x n -> 1 x n.
inline Var max_rows(const Var &a) { return max_pool_rows(a, a.rows(), 1); }

// ---------------------------------------------------------------------------
// Normalization, softmax, losses

/// Per-row normalization with learned gain and bias (each 1 x n).
inline Var layer_norm(const Var &x, const Var &gain, const Var &bias, double eps = 1e-5) {
    detail::require_matrix(x, "layer_norm");
    const std::size_t m = x.rows(), n = x.cols();
    detail::require(gain.value().size() == n && bias.value().size() == n, "layer_norm: parameter size");
    Tensor out = Tensor::matrix(m, n);
    Tensor xhat = Tensor::matrix(m, n);
    std::vector<double> inv_std(m);
    for (std::size_t i = 0; i < m; ++i) {
        double mu = 0.0;
        for (double v : x.value().row(i)) mu += v;
        mu /= static_cast<double>(n);
        double var = 0.0;
        for (double v : x.value().row(i)) var += (v - mu) * (v - mu);
        var /= static_cast<double>(n);
        inv_std[i] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < n; ++j) {
            xhat(i, j) = (x.value()(i, j) - mu) * inv_std[i];
            out(i, j) = xhat(i, j) * gain.value()[j] + bias.value()[j];
        }
    }
    return detail::make_result(
        std::move(out), {x, gain, bias},
        [xhat = std::move(xhat), inv_std = std::move(inv_std), m, n](Node &node) {
            Node &xn = *node.parents[0];
            Node &gn = *node.parents[1];
            Node &bn = *node.parents[2];
            if (gn.requires_grad || bn.requires_grad) {
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t j = 0; j < n; ++j) {
                        if (gn.requires_grad) gn.grad_buffer()[j] += node.grad(i, j) * xhat(i, j);
                        if (bn.requires_grad) bn.grad_buffer()[j] += node.grad(i, j);
                    }
                }
            }
            if (!xn.requires_grad) return;
            Tensor &g = xn.grad_buffer();
            std::vector<double> dxhat(n);
            for (std::size_t i = 0; i < m; ++i) {
                double s1 = 0.0, s2 = 0.0;
                for (std::size_t j = 0; j < n; ++j) {
                    dxhat[j] = node.grad(i, j) * gn.value[j];
                    s1 += dxhat[j];
                    s2 += dxhat[j] * xhat(i, j);
                }
                const double inv_n = 1.0 / static_cast<double>(n);
                for (std::size_t j = 0; j < n; ++j) {
                    g(i, j) += inv_std[i] * (dxhat[j] - inv_n * s1 - xhat(i, j) * inv_n * s2);
                }
            }
        });
}

namespace detail {

// Row softmax over the entries whose mask flag is set (all when mask is empty).
// A row with no unmasked entries yields zeros.
inline Tensor softmax_rows_values(const Tensor &x, const std::vector<char> &key_mask) {
    const std::size_t m = x.rows(), n = x.cols();
    Tensor out = Tensor::matrix(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (key_mask.empty() || key_mask[j]) mx = std::max(mx, x(i, j));
        }
        if (mx == -std::numeric_limits<double>::infinity()) continue;
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (key_mask.empty() || key_mask[j]) {
                out(i, j) = std::exp(x(i, j) - mx);
                z += out(i, j);
            }
        }
        for (std::size_t j = 0; j < n; ++j) out(i, j) /= z;
    }
    return out;
}

inline Var softmax_rows(const Var &x, std::vector<char> key_mask) {
    require_matrix(x, "softmax");
    require(key_mask.empty() || key_mask.size() == x.cols(), "softmax: mask size");
    Tensor y = softmax_rows_values(x.value(), key_mask);
    const std::size_t m = x.rows(), n = x.cols();
    return make_result(std::move(y), {x}, [m, n](Node &node) {
        Tensor &g = node.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < m; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < n; ++j) dot += node.grad(i, j) * node.value(i, j);
            for (std::size_t j = 0; j < n; ++j) g(i, j) += node.value(i, j) * (node.grad(i, j) - dot);
        }
    });
}

}  // namespace detail

enum class Axis { rows = 0, cols = 1 };

/// Softmax of a matrix along `axis` (cols: each row sums to 1).
/// Max-subtracted for stability.
inline Var softmax(const Var &x, Axis axis = Axis::cols) {
    if (axis == Axis::cols) return detail::softmax_rows(x, {});
    return transpose(detail::softmax_rows(transpose(x), {}));
}

/// Row softmax that gives zero weight to columns whose `key_mask` entry is 0,
/// equivalent to adding -inf to those scores.
inline Var masked_softmax(const Var &x, const std::vector<char> &key_mask) {
    return detail::softmax_rows(x, key_mask);
}

inline constexpr int kIgnoreIndex = -1;

/// Mean negative log-likelihood of `targets` under row-softmax(logits),
/// skipping rows whose target equals `ignore_index`.
inline Var cross_entropy(const Var &logits, const std::vector<int> &targets, int ignore_index = kIgnoreIndex) {
    detail::require_matrix(logits, "cross_entropy");
    const std::size_t b = logits.rows(), n = logits.cols();
    detail::require(targets.size() == b, "cross_entropy: target count mismatch");
    Tensor probs = detail::softmax_rows_values(logits.value(), {});
    double loss = 0.0;
    std::size_t counted = 0;
    for (std::size_t i = 0; i < b; ++i) {
        if (targets[i] == ignore_index) continue;
        detail::require(targets[i] >= 0 && static_cast<std::size_t>(targets[i]) < n,
                        "cross_entropy: target " + std::to_string(targets[i]) + " out of range");
        // log-sum-exp form keeps the exact log-probability for extreme logits.
        double mx = -std::numeric_limits<double>::infinity();
        for (double v : logits.value().row(i)) mx = std::max(mx, v);
        double z = 0.0;
        for (double v : logits.value().row(i)) z += std::exp(v - mx);
        loss -= logits.value()(i, static_cast<std::size_t>(targets[i])) - mx - std::log(z);
        ++counted;
    }
    if (counted == 0) throw UndefinedLoss("every position is ignored");
    loss /= static_cast<double>(counted);
    return detail::make_result(
        Tensor::scalar(loss), {logits},
        [probs = std::move(probs), targets, ignore_index, counted, n](Node &node) {
            Tensor &g = node.parents[0]->grad_buffer();
            const double d = node.grad[0] / static_cast<double>(counted);
            for (std::size_t i = 0; i < targets.size(); ++i) {
                if (targets[i] == ignore_index) continue;
                for (std::size_t j = 0; j < n; ++j) g(i, j) += d * probs(i, j);
                g(i, static_cast<std::size_t>(targets[i])) -= d;
            }
        });
}

/// Inverted dropout; identity outside training or when p == 0.
template <UniformSource R>
Var dropout(const Var &x, double p, R &rng, bool training) {
    if (!training || p <= 0.0) return x;
    Tensor mask(x.shape(), 0.0);
    const double keep = 1.0 - p;
    for (double &v : mask.values()) v = rng.uniform01() < keep ? 1.0 / keep : 0.0;
    return mul(x, constant(std::move(mask)));
}

}  // namespace lrtc::nn
