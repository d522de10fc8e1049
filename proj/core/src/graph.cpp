#include "rift/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rift/errors.hpp"

namespace rift::autodiff {

namespace {

constexpr double kRmsEps = 1e-5;

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
    if (a.shape != b.shape) {
        throw InputError(std::string(what) + ": shape mismatch");
    }
}

}  // namespace

const char* op_name(Op op) {
    switch (op) {
        case Op::leaf: return "leaf";
        case Op::add: return "add";
        case Op::mul: return "mul";
        case Op::scale: return "scale";
        case Op::matmul: return "matmul";
        case Op::matmul_nt: return "matmul_nt";
        case Op::exp: return "exp";
        case Op::log: return "log";
        case Op::relu: return "relu";
        case Op::softmax_rows: return "softmax_rows";
        case Op::log_softmax_rows: return "log_softmax_rows";
        case Op::rms_norm_rows: return "rms_norm_rows";
        case Op::gather_rows: return "gather_rows";
        case Op::take_per_row: return "take_per_row";
        case Op::slice_rows: return "slice_rows";
        case Op::sum_all: return "sum_all";
        case Op::mean_all: return "mean_all";
        case Op::detach: return "detach";
    }
    return "?";
}

Graph::Graph() {
    nodes_.reserve(64);
}

NodeId Graph::push(Node n) {
    NodeId id{static_cast<std::uint32_t>(nodes_.size())};
    nodes_.push_back(std::move(n));
    return id;
}

const Graph::Node& Graph::node(NodeId id) const {
    return nodes_.at(id.index);
}

Graph::Node& Graph::node(NodeId id) {
    return nodes_.at(id.index);
}

NodeId Graph::leaf(Tensor t) {
    Node n{};
    n.op = Op::leaf;
    n.needs_grad = t.requires_grad;
    n.value = std::move(t);
    return push(std::move(n));
}

NodeId Graph::constant(Tensor t) {
    t.requires_grad = false;
    return leaf(std::move(t));
}

NodeId Graph::constant_scalar(double v) {
    return constant(Tensor::scalar(v));
}

NodeId Graph::add(NodeId a, NodeId b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    require_same_shape(na.value, nb.value, "add");
    Node n{};
    n.op = Op::add;
    n.a = a;
    n.b = b;
    n.needs_grad = na.needs_grad || nb.needs_grad;
    n.value = Tensor(na.value.shape, na.value.values);
    for (std::size_t i = 0; i < n.value.values.size(); ++i) {
        n.value.values[i] += nb.value.values[i];
    }
    return push(std::move(n));
}

NodeId Graph::mul(NodeId a, NodeId b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    require_same_shape(na.value, nb.value, "mul");
    Node n{};
    n.op = Op::mul;
    n.a = a;
    n.b = b;
    n.needs_grad = na.needs_grad || nb.needs_grad;
    n.value = Tensor(na.value.shape, na.value.values);
    for (std::size_t i = 0; i < n.value.values.size(); ++i) {
        n.value.values[i] *= nb.value.values[i];
    }
    return push(std::move(n));
}

NodeId Graph::scale(NodeId a, double c) {
    const Node& na = node(a);
    Node n{};
    n.op = Op::scale;
    n.a = a;
    n.b = a;
    n.scalar_arg = c;
    n.needs_grad = na.needs_grad;
    n.value = Tensor(na.value.shape, na.value.values);
    for (double& v : n.value.values) v *= c;
    return push(std::move(n));
}

NodeId Graph::matmul(NodeId a, NodeId b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.value.rank() != 2 || nb.value.rank() != 2 || na.value.shape[1] != nb.value.shape[0]) {
        throw InputError("matmul: incompatible shapes");
    }
    std::size_t m = na.value.shape[0];
    std::size_t k = na.value.shape[1];
    std::size_t p = nb.value.shape[1];
    Node n{};
    n.op = Op::matmul;
    n.a = a;
    n.b = b;
    n.needs_grad = na.needs_grad || nb.needs_grad;
    n.value = Tensor::zeros({m, p});
    const double* av = na.value.values.data();
    const double* bv = nb.value.values.data();
    double* out = n.value.values.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) {
            double aik = av[i * k + kk];
            if (aik == 0.0) continue;
            const double* brow = bv + kk * p;
            double* orow = out + i * p;
            for (std::size_t j = 0; j < p; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return push(std::move(n));
}

NodeId Graph::matmul_nt(NodeId a, NodeId b) {
    const Node& na = node(a);
    const Node& nb = node(b);
    if (na.value.rank() != 2 || nb.value.rank() != 2 || na.value.shape[1] != nb.value.shape[1]) {
        throw InputError("matmul_nt: incompatible shapes");
    }
    std::size_t m = na.value.shape[0];
    std::size_t k = na.value.shape[1];
    std::size_t p = nb.value.shape[0];
    Node n{};
    n.op = Op::matmul_nt;
    n.a = a;
    n.b = b;
    n.needs_grad = na.needs_grad || nb.needs_grad;
    n.value = Tensor::zeros({m, p});
    const double* av = na.value.values.data();
    const double* bv = nb.value.values.data();
    double* out = n.value.values.data();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            double acc = 0.0;
            const double* arow = av + i * k;
            const double* brow = bv + j * k;
            for (std::size_t kk = 0; kk < k; ++kk) {
                acc += arow[kk] * brow[kk];
            }
            out[i * p + j] = acc;
        }
    }
    return push(std::move(n));
}

NodeId Graph::exp(NodeId a) {
    const Node& na = node(a);
    Node n{};
    n.op = Op::exp;
    n.a = a;
    n.b = a;
    n.needs_grad = na.needs_grad;
    n.value = Tensor(na.value.shape, na.value.values);
    for (double& v : n.value.values) v = std::exp(v);
    return push(std::move(n));
}

NodeId Graph::log(NodeId a) {
    const Node& na = node(a);
    Node n{};
    n.op = Op::log;
    n.a = a;
    n.b = a;
    n.needs_grad = na.needs_grad;
    n.value = Tensor(na.value.shape, na.value.values);
    for (double& v : n.value.values) v = std::log(v);
    return push(std::move(n));
}

NodeId Graph::relu(NodeId a) {
    const Node& na = node(a);
    Node n{};
    n.op = Op::relu;
    n.a = a;
    n.b = a;
    n.needs_grad = na.needs_grad;
    n.value = Tensor(na.value.shape, na.value.values);
    for (double& v : n.value.values) v = v > 0.0 ? v : 0.0;
    return push(std::move(n));
}

NodeId Graph::softmax_rows(NodeId a) {
    const Node& na = node(a);
    std::size_t cols = na.value.cols();
    std::size_t rows = na.value.numel() / cols;
    Node n{};
    n.op = Op::softmax_rows;
    n.a = a;
    n.b = a;
    n.needs_grad = na.needs_grad;
    n.value = Tensor(na.value.shape, na.value.values);
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = n.value.values.data() + r * cols;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            row[c] = std::exp(row[c] - mx);
            sum += row[c];
        }
        for (std::size_t c = 0; c < cols; ++c) row[c] /= sum;
    }
    return push(std::move(n));
}

NodeId Graph::log_softmax_rows(NodeId a) {
    const Node& na = node(a);
    std::size_t cols = na.value.cols();
    std::size_t rows = na.value.numel() / cols;
    Node n{};
    n.op = Op::log_softmax_rows;
    n.a = a;
    n.b = a;
    n.needs_grad = na.needs_grad;
    n.value = Tensor(na.value.shape, na.value.values);
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = n.value.values.data() + r * cols;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < cols; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) sum += std::exp(row[c] - mx);
        double lse = mx + std::log(sum);
        for (std::size_t c = 0; c < cols; ++c) row[c] -= lse;
    }
    return push(std::move(n));
}

NodeId Graph::rms_norm_rows(NodeId a) {
    const Node& na = node(a);
    std::size_t cols = na.value.cols();
    std::size_t rows = na.value.numel() / cols;
    Node n{};
    n.op = Op::rms_norm_rows;
    n.a = a;
    n.b = a;
    n.needs_grad = na.needs_grad;
    n.value = Tensor(na.value.shape, na.value.values);
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = n.value.values.data() + r * cols;
        double ms = 0.0;
        for (std::size_t c = 0; c < cols; ++c) ms += row[c] * row[c];
        ms = ms / static_cast<double>(cols) + kRmsEps;
        double inv = 1.0 / std::sqrt(ms);
        for (std::size_t c = 0; c < cols; ++c) row[c] *= inv;
    }
    return push(std::move(n));
}

NodeId Graph::gather_rows(NodeId a, std::vector<std::int32_t> ids) {
    const Node& na = node(a);
    if (na.value.rank() != 2) {
        throw InputError("gather_rows: rank-2 input required");
    }
    std::size_t rows = na.value.shape[0];
    std::size_t cols = na.value.shape[1];
    for (std::int32_t id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= rows) {
            throw InputError("gather_rows: row index out of range");
        }
    }
    Node n{};
    n.op = Op::gather_rows;
    n.a = a;
    n.b = a;
    n.needs_grad = na.needs_grad;
    n.value = Tensor::zeros({ids.size(), cols});
    for (std::size_t r = 0; r < ids.size(); ++r) {
        const double* src = na.value.values.data() + static_cast<std::size_t>(ids[r]) * cols;
        std::copy(src, src + cols, n.value.values.data() + r * cols);
    }
    n.index_args = std::move(ids);
    return push(std::move(n));
}

NodeId Graph::take_per_row(NodeId a, std::vector<std::int32_t> ids) {
    const Node& na = node(a);
    std::size_t cols = na.value.cols();
    std::size_t rows = na.value.numel() / cols;
    if (ids.size() != rows) {
        throw InputError("take_per_row: one index per row required");
    }
    for (std::int32_t id : ids) {
        if (id < 0 || static_cast<std::size_t>(id) >= cols) {
            throw InputError("take_per_row: column index out of range");
        }
    }
    Node n{};
    n.op = Op::take_per_row;
    n.a = a;
    n.b = a;
    n.needs_grad = na.needs_grad;
    n.value = Tensor::zeros({rows});
    for (std::size_t r = 0; r < rows; ++r) {
        n.value.values[r] = na.value.values[r * cols + static_cast<std::size_t>(ids[r])];
    }
    n.index_args = std::move(ids);
    return push(std::move(n));
}

NodeId Graph::slice_rows(NodeId a, std::size_t begin, std::size_t end) {
    const Node& na = node(a);
    std::size_t cols = na.value.cols();
    std::size_t rows = na.value.numel() / cols;
    if (begin > end || end > rows) {
        throw InputError("slice_rows: range out of bounds");
    }
    Node n{};
    n.op = Op::slice_rows;
    n.a = a;
    n.b = a;
    n.needs_grad = na.needs_grad;
    n.row_begin = begin;
    n.value = Tensor::zeros({end - begin, cols});
    std::copy(na.value.values.data() + begin * cols,
              na.value.values.data() + end * cols,
              n.value.values.data());
    return push(std::move(n));
}

NodeId Graph::sum_all(NodeId a) {
    const Node& na = node(a);
    Node n{};
    n.op = Op::sum_all;
    n.a = a;
    n.b = a;
    n.needs_grad = na.needs_grad;
    double acc = 0.0;
    for (double v : na.value.values) acc += v;
    n.value = Tensor::scalar(acc);
    return push(std::move(n));
}

NodeId Graph::mean_all(NodeId a) {
    const Node& na = node(a);
    if (na.value.numel() == 0) {
        throw InputError("mean_all: empty tensor");
    }
    Node n{};
    n.op = Op::mean_all;
    n.a = a;
    n.b = a;
    n.needs_grad = na.needs_grad;
    double acc = 0.0;
    for (double v : na.value.values) acc += v;
    n.value = Tensor::scalar(acc / static_cast<double>(na.value.numel()));
    return push(std::move(n));
}

NodeId Graph::detach(NodeId a) {
    const Node& na = node(a);
    Node n{};
    n.op = Op::detach;
    n.a = a;
    n.b = a;
    n.needs_grad = false;
    n.value = Tensor(na.value.shape, na.value.values);
    return push(std::move(n));
}

const Tensor& Graph::value(NodeId id) const {
    return node(id).value;
}

double Graph::scalar_value(NodeId id) const {
    const Tensor& t = node(id).value;
    if (t.numel() != 1) {
        throw PreconditionError("scalar_value: node is not scalar");
    }
    return t.values[0];
}

void Graph::check_finite(const Node& n, std::uint32_t index) const {
    for (double v : n.value.values) {
        if (std::isnan(v)) {
            throw NumericError("NaN value in node " + std::to_string(index) + " (" + op_name(n.op) + ")");
        }
    }
    for (double g : n.grad) {
        if (std::isnan(g)) {
            throw NumericError("NaN gradient in node " + std::to_string(index) + " (" + op_name(n.op) + ")");
        }
    }
}

void Graph::accumulate_input_grads(Node& n) {
    Node& ia = node(n.a);
    const std::vector<double>& g = n.grad;
    switch (n.op) {
        case Op::leaf:
            return;
        case Op::add: {
            Node& ib = node(n.b);
            if (ia.needs_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) ia.grad[i] += g[i];
            }
            if (ib.needs_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) ib.grad[i] += g[i];
            }
            return;
        }
        case Op::mul: {
            Node& ib = node(n.b);
            if (ia.needs_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) ia.grad[i] += g[i] * ib.value.values[i];
            }
            if (ib.needs_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) ib.grad[i] += g[i] * ia.value.values[i];
            }
            return;
        }
        case Op::scale: {
            if (ia.needs_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) ia.grad[i] += g[i] * n.scalar_arg;
            }
            return;
        }
        case Op::matmul: {
            Node& ib = node(n.b);
            std::size_t m = ia.value.shape[0];
            std::size_t k = ia.value.shape[1];
            std::size_t p = ib.value.shape[1];
            // dA = g @ B^T, dB = A^T @ g
            if (ia.needs_grad) {
                for (std::size_t i = 0; i < m; ++i) {
                    for (std::size_t kk = 0; kk < k; ++kk) {
                        double acc = 0.0;
                        const double* grow = g.data() + i * p;
                        const double* brow = ib.value.values.data() + kk * p;
                        for (std::size_t j = 0; j < p; ++j) acc += grow[j] * brow[j];
                        ia.grad[i * k + kk] += acc;
                    }
                }
            }
            if (ib.needs_grad) {
                for (std::size_t i = 0; i < m; ++i) {
                    const double* arow = ia.value.values.data() + i * k;
                    const double* grow = g.data() + i * p;
                    for (std::size_t kk = 0; kk < k; ++kk) {
                        double aik = arow[kk];
                        if (aik == 0.0) continue;
                        double* brow = ib.grad.data() + kk * p;
                        for (std::size_t j = 0; j < p; ++j) brow[j] += aik * grow[j];
                    }
                }
            }
            return;
        }
        case Op::matmul_nt: {
            Node& ib = node(n.b);
            std::size_t m = ia.value.shape[0];
            std::size_t k = ia.value.shape[1];
            std::size_t p = ib.value.shape[0];
            // out = A @ B^T; dA = g @ B, dB = g^T @ A
            if (ia.needs_grad) {
                for (std::size_t i = 0; i < m; ++i) {
                    const double* grow = g.data() + i * p;
                    double* arow = ia.grad.data() + i * k;
                    for (std::size_t j = 0; j < p; ++j) {
                        double gij = grow[j];
                        if (gij == 0.0) continue;
                        const double* brow = ib.value.values.data() + j * k;
                        for (std::size_t kk = 0; kk < k; ++kk) arow[kk] += gij * brow[kk];
                    }
                }
            }
            if (ib.needs_grad) {
                for (std::size_t i = 0; i < m; ++i) {
                    const double* grow = g.data() + i * p;
                    const double* arow = ia.value.values.data() + i * k;
                    for (std::size_t j = 0; j < p; ++j) {
                        double gij = grow[j];
                        if (gij == 0.0) continue;
                        double* brow = ib.grad.data() + j * k;
                        for (std::size_t kk = 0; kk < k; ++kk) brow[kk] += gij * arow[kk];
                    }
                }
            }
            return;
        }
        case Op::exp: {
            if (ia.needs_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) ia.grad[i] += g[i] * n.value.values[i];
            }
            return;
        }
        case Op::log: {
            if (ia.needs_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) ia.grad[i] += g[i] / ia.value.values[i];
            }
            return;
        }
        case Op::relu: {
            if (ia.needs_grad) {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    if (ia.value.values[i] > 0.0) ia.grad[i] += g[i];
                }
            }
            return;
        }
        case Op::softmax_rows: {
            if (!ia.needs_grad) return;
            std::size_t cols = n.value.cols();
            std::size_t rows = n.value.numel() / cols;
            for (std::size_t r = 0; r < rows; ++r) {
                const double* y = n.value.values.data() + r * cols;
                const double* gr = g.data() + r * cols;
                double dot = 0.0;
                for (std::size_t c = 0; c < cols; ++c) dot += gr[c] * y[c];
                double* da = ia.grad.data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) da[c] += y[c] * (gr[c] - dot);
            }
            return;
        }
        case Op::log_softmax_rows: {
            if (!ia.needs_grad) return;
            std::size_t cols = n.value.cols();
            std::size_t rows = n.value.numel() / cols;
            for (std::size_t r = 0; r < rows; ++r) {
                const double* y = n.value.values.data() + r * cols;  // log-probs
                const double* gr = g.data() + r * cols;
                double gsum = 0.0;
                for (std::size_t c = 0; c < cols; ++c) gsum += gr[c];
                double* da = ia.grad.data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) da[c] += gr[c] - std::exp(y[c]) * gsum;
            }
            return;
        }
        case Op::rms_norm_rows: {
            if (!ia.needs_grad) return;
            std::size_t cols = n.value.cols();
            std::size_t rows = n.value.numel() / cols;
            for (std::size_t r = 0; r < rows; ++r) {
                const double* x = ia.value.values.data() + r * cols;
                const double* gr = g.data() + r * cols;
                double ms = 0.0;
                for (std::size_t c = 0; c < cols; ++c) ms += x[c] * x[c];
                ms = ms / static_cast<double>(cols) + kRmsEps;
                double s = std::sqrt(ms);
                double gx = 0.0;
                for (std::size_t c = 0; c < cols; ++c) gx += gr[c] * x[c];
                double coeff = gx / (static_cast<double>(cols) * s * s * s);
                double* da = ia.grad.data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) {
                    da[c] += gr[c] / s - x[c] * coeff;
                }
            }
            return;
        }
        case Op::gather_rows: {
            if (!ia.needs_grad) return;
            std::size_t cols = n.value.shape[1];
            for (std::size_t r = 0; r < n.index_args.size(); ++r) {
                double* dst = ia.grad.data() + static_cast<std::size_t>(n.index_args[r]) * cols;
                const double* src = g.data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
            }
            return;
        }
        case Op::take_per_row: {
            if (!ia.needs_grad) return;
            std::size_t cols = ia.value.cols();
            for (std::size_t r = 0; r < n.index_args.size(); ++r) {
                ia.grad[r * cols + static_cast<std::size_t>(n.index_args[r])] += g[r];
            }
            return;
        }
        case Op::slice_rows: {
            if (!ia.needs_grad) return;
            std::size_t cols = ia.value.cols();
            double* dst = ia.grad.data() + n.row_begin * cols;
            for (std::size_t i = 0; i < g.size(); ++i) dst[i] += g[i];
            return;
        }
        case Op::sum_all: {
            if (!ia.needs_grad) return;
            double gv = g[0];
            for (double& d : ia.grad) d += gv;
            return;
        }
        case Op::mean_all: {
            if (!ia.needs_grad) return;
            double gv = g[0] / static_cast<double>(ia.value.numel());
            for (double& d : ia.grad) d += gv;
            return;
        }
        case Op::detach:
            return;
    }
}

void Graph::backward(NodeId root) {
    Node& r = node(root);
    if (r.value.numel() != 1) {
        throw PreconditionError("backward: root must be scalar");
    }
    for (Node& n : nodes_) {
        if (n.needs_grad) {
            n.grad.assign(n.value.numel(), 0.0);
        } else {
            n.grad.clear();
        }
    }
    if (!r.needs_grad) {
        // Root does not depend on any differentiable leaf; gradients are all zero.
        for (std::uint32_t i = 0; i < nodes_.size(); ++i) check_finite(nodes_[i], i);
        return;
    }
    r.grad.assign(1, 1.0);
    for (std::uint32_t i = root.index + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.needs_grad || n.grad.empty()) continue;
        accumulate_input_grads(n);
    }
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) check_finite(nodes_[i], i);
}

const std::vector<double>& Graph::grad(NodeId id) const {
    const Node& n = node(id);
    if (!n.grad.empty()) return n.grad;
    // Node that took no part in backward; report zeros of the right size.
    empty_grad_.assign(n.value.numel(), 0.0);
    return empty_grad_;
}

}  // namespace rift::autodiff
