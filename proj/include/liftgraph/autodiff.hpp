#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "liftgraph/matrix.hpp"

namespace liftgraph {

using NodeId = std::size_t;

enum class OpKind {
    Leaf,
    Matmul,
    Spmm,
    Relu,
    Tanh,
    Add,
    Sub,
    Hadamard,
    Scale,
    ColScale,
    RowScale,
    AddRowVector,
    RowSelect,
    ConcatCols,
    ConcatRows,
    MeanRows,
    MaxRows,
    Sum,
    SoftmaxCrossEntropy,
};

std::string_view op_name(OpKind kind);

class Tape;

/// Dense matrix value, optionally bound to a node of a Tape. Constants carry
/// no node id and receive no gradient. Cheap to copy; the value is shared.
class DiffMatrix {
   public:
    DiffMatrix() = default;

    static DiffMatrix constant(Matrix value);

    const Matrix& value() const { return *value_; }
    std::size_t rows() const { return value_ ? value_->rows() : 0; }
    std::size_t cols() const { return value_ ? value_->cols() : 0; }
    double operator()(std::size_t r, std::size_t c) const { return (*value_)(r, c); }

    std::optional<NodeId> node_id() const { return node_; }
    bool is_constant() const { return !node_.has_value(); }
    Tape* tape() const { return tape_; }

   private:
    friend class Tape;
    std::shared_ptr<const Matrix> value_;
    Tape* tape_ = nullptr;
    std::optional<NodeId> node_;
};

/// Result of Tape::backward: one accumulated gradient per reached node.
class Gradients {
   public:
    Gradients() = default;
    explicit Gradients(std::vector<Matrix> grads) : grads_(std::move(grads)) {}

    /// nullptr when the node received no gradient.
    const Matrix* find(NodeId id) const;
    /// Gradient with the shape of x; zeros for constants or unreached nodes.
    Matrix of(const DiffMatrix& x) const;

   private:
    std::vector<Matrix> grads_;
};

/// Records operations of one forward pass in topological order. A tape must
/// outlive every DiffMatrix bound to it; it is neither copyable nor movable.
class Tape {
   public:
    /// Accumulates into pre-zeroed gradients of the inputs; entries are
    /// nullptr for constant inputs.
    using BackwardFn = std::function<void(const Matrix& grad_out, std::span<Matrix* const> input_grads)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    DiffMatrix leaf(Matrix value);

    /// Records an op over inputs. When no input is tape-bound the result is a
    /// constant and nothing is recorded.
    DiffMatrix record(OpKind kind, Matrix value, std::initializer_list<const DiffMatrix*> inputs, BackwardFn backward);
    DiffMatrix record(OpKind kind, Matrix value, std::span<const DiffMatrix* const> inputs, BackwardFn backward);

    /// Reverse sweep from a 1x1 root seeded with 1.
    Gradients backward(const DiffMatrix& root) const;

    std::size_t size() const { return nodes_.size(); }
    OpKind kind(NodeId id) const { return nodes_.at(id).kind; }
    std::span<const NodeId> inputs(NodeId id) const { return nodes_.at(id).inputs; }

    /// Folds a discrete forward decision (ReLU mask, argmax, selected set)
    /// into a running signature. Two passes whose signatures agree took the
    /// same smooth branch everywhere.
    void note_branch(std::uint64_t value);
    template <typename Range>
    void note_branch_range(const Range& values) {
        for (const auto& v : values) note_branch(static_cast<std::uint64_t>(v));
        note_branch(0xb4a9c4e1d2f3a5b7ULL);
    }
    std::uint64_t branch_signature() const { return signature_; }

    static constexpr NodeId kNoNode = static_cast<NodeId>(-1);

   private:
    struct Node {
        OpKind kind;
        std::shared_ptr<const Matrix> value;
        std::vector<NodeId> inputs;
        BackwardFn backward;
    };
    std::vector<Node> nodes_;
    std::uint64_t signature_ = 0xcbf29ce484222325ULL;
};

// Differentiable operations. None of them broadcasts: every shape rule is
// exact and violations raise ShapeError or IndexError.

DiffMatrix matmul(const DiffMatrix& a, const DiffMatrix& b);
/// Constant sparse matrix times a dense operand.
DiffMatrix spmm(std::shared_ptr<const CsrMatrix> a, const DiffMatrix& b);
DiffMatrix relu(const DiffMatrix& a);
DiffMatrix tanh_elem(const DiffMatrix& a);
DiffMatrix add(const DiffMatrix& a, const DiffMatrix& b);
DiffMatrix sub(const DiffMatrix& a, const DiffMatrix& b);
DiffMatrix hadamard(const DiffMatrix& a, const DiffMatrix& b);
DiffMatrix scale(const DiffMatrix& a, double c);
/// a · diag(v) with v a 1 x a.cols row vector.
DiffMatrix col_scale(const DiffMatrix& a, const DiffMatrix& v);
/// diag(v) · a with v an a.rows x 1 column vector.
DiffMatrix row_scale(const DiffMatrix& a, const DiffMatrix& v);
/// Adds the 1 x a.cols row vector v to every row of a.
DiffMatrix add_row_vector(const DiffMatrix& a, const DiffMatrix& v);
DiffMatrix row_select(const DiffMatrix& a, std::span<const std::size_t> idx);
DiffMatrix concat_cols(const DiffMatrix& a, const DiffMatrix& b);
DiffMatrix concat_rows(std::span<const DiffMatrix> parts);
DiffMatrix mean_rows(const DiffMatrix& a);
/// Column-wise max; gradient goes to the first maximal row.
DiffMatrix max_rows(const DiffMatrix& a);
DiffMatrix sum(const DiffMatrix& a);
/// Mean negative log-likelihood of labels under row-wise softmax.
DiffMatrix softmax_cross_entropy(const DiffMatrix& logits, std::span<const int> labels);

}  // namespace liftgraph
