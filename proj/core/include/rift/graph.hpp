#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rift/tensor.hpp"

namespace rift::autodiff {

struct NodeId {
    std::uint32_t index = 0;
};

enum class Op : std::uint8_t {
    leaf,
    add,
    mul,
    scale,
    matmul,
    matmul_nt,
    exp,
    log,
    relu,
    softmax_rows,
    log_softmax_rows,
    rms_norm_rows,
    gather_rows,
    take_per_row,
    slice_rows,
    sum_all,
    mean_all,
    detach,
};

const char* op_name(Op op);

/// Reverse-mode tape over dense double tensors. Nodes are recorded in
/// topological (creation) order; backward walks the tape in reverse and
/// accumulates gradients additively across fan-out. Ops record their input
/// node ids, so a graph is also a readable trace of the computation.
///
/// A graph is single-threaded during forward/backward; independent graphs may
/// run in parallel.
class Graph {
public:
    Graph();

    /// Leaf carrying requires_grad from the tensor.
    NodeId leaf(Tensor t);
    /// Leaf that never receives gradient.
    NodeId constant(Tensor t);
    NodeId constant_scalar(double v);

    NodeId add(NodeId a, NodeId b);
    NodeId mul(NodeId a, NodeId b);
    /// Elementwise multiply by a compile-time constant.
    NodeId scale(NodeId a, double c);
    NodeId matmul(NodeId a, NodeId b);
    /// a @ b^T without materializing the transpose.
    NodeId matmul_nt(NodeId a, NodeId b);
    NodeId exp(NodeId a);
    NodeId log(NodeId a);
    NodeId relu(NodeId a);
    /// Stable softmax over the last axis (max subtraction).
    NodeId softmax_rows(NodeId a);
    /// Exact log-probabilities; preferred over log(softmax(x)) which loses
    /// precision for near-zero probabilities.
    NodeId log_softmax_rows(NodeId a);
    /// x / sqrt(mean(x^2) + 1e-5) per row.
    NodeId rms_norm_rows(NodeId a);
    /// Select whole rows by index; duplicate indices accumulate gradient.
    NodeId gather_rows(NodeId a, std::vector<std::int32_t> ids);
    /// One element per row: out[r] = a[r, ids[r]].
    NodeId take_per_row(NodeId a, std::vector<std::int32_t> ids);
    NodeId slice_rows(NodeId a, std::size_t begin, std::size_t end);
    NodeId sum_all(NodeId a);
    NodeId mean_all(NodeId a);
    /// Identity forward; propagates exactly zero gradient to its input.
    NodeId detach(NodeId a);

    const Tensor& value(NodeId id) const;
    double scalar_value(NodeId id) const;

    /// Populates gradients of `root` w.r.t. every node that needs them.
    /// Throws PreconditionError for a non-scalar root and NumericError if a
    /// NaN is found in any value or gradient, naming the offending node.
    void backward(NodeId root);

    /// Gradient array of a node after backward(); zeros if the node did not
    /// participate in the root's computation.
    const std::vector<double>& grad(NodeId id) const;

    std::size_t size() const { return nodes_.size(); }
    void reserve(std::size_t n) { nodes_.reserve(n); }

private:
    struct Node {
        Op op;
        NodeId a;
        NodeId b;
        Tensor value;
        std::vector<double> grad;
        std::vector<std::int32_t> index_args;
        double scalar_arg = 0.0;
        std::size_t row_begin = 0;
        bool needs_grad = false;
    };

    NodeId push(Node n);
    const Node& node(NodeId id) const;
    Node& node(NodeId id);
    void accumulate_input_grads(Node& n);
    void check_finite(const Node& n, std::uint32_t index) const;

    std::vector<Node> nodes_;
    mutable std::vector<double> empty_grad_;
};

}  // namespace rift::autodiff
