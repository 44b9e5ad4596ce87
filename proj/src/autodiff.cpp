#include "liftgraph/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "liftgraph/errors.hpp"

namespace liftgraph {

std::string_view op_name(OpKind kind) {
    switch (kind) {
        case OpKind::Leaf: return "leaf";
        case OpKind::Matmul: return "matmul";
        case OpKind::Spmm: return "spmm";
        case OpKind::Relu: return "relu";
        case OpKind::Tanh: return "tanh";
        case OpKind::Add: return "add";
        case OpKind::Sub: return "sub";
        case OpKind::Hadamard: return "hadamard";
        case OpKind::Scale: return "scale";
        case OpKind::ColScale: return "col_scale";
        case OpKind::RowScale: return "row_scale";
        case OpKind::AddRowVector: return "add_row_vector";
        case OpKind::RowSelect: return "row_select";
        case OpKind::ConcatCols: return "concat_cols";
        case OpKind::ConcatRows: return "concat_rows";
        case OpKind::MeanRows: return "mean_rows";
        case OpKind::MaxRows: return "max_rows";
        case OpKind::Sum: return "sum";
        case OpKind::SoftmaxCrossEntropy: return "softmax_cross_entropy";
    }
    return "unknown";
}

DiffMatrix DiffMatrix::constant(Matrix value) {
    DiffMatrix d;
    d.value_ = std::make_shared<const Matrix>(std::move(value));
    return d;
}

const Matrix* Gradients::find(NodeId id) const {
    if (id >= grads_.size() || grads_[id].empty()) return nullptr;
    return &grads_[id];
}

Matrix Gradients::of(const DiffMatrix& x) const {
    if (auto id = x.node_id()) {
        if (const Matrix* g = find(*id)) return *g;
    }
    return Matrix(x.rows(), x.cols());
}

DiffMatrix Tape::leaf(Matrix value) {
    DiffMatrix d;
    d.value_ = std::make_shared<const Matrix>(std::move(value));
    d.tape_ = this;
    d.node_ = nodes_.size();
    nodes_.push_back(Node{OpKind::Leaf, d.value_, {}, {}});
    return d;
}

DiffMatrix Tape::record(OpKind kind, Matrix value, std::initializer_list<const DiffMatrix*> inputs,
                        BackwardFn backward) {
    return record(kind, std::move(value), std::span<const DiffMatrix* const>(inputs.begin(), inputs.size()),
                  std::move(backward));
}

DiffMatrix Tape::record(OpKind kind, Matrix value, std::span<const DiffMatrix* const> inputs, BackwardFn backward) {
    DiffMatrix out;
    out.value_ = std::make_shared<const Matrix>(std::move(value));
    bool any_bound = false;
    for (const DiffMatrix* in : inputs) {
        if (in->tape_ == nullptr) continue;
        if (in->tape_ != this) throw std::logic_error("operands recorded on different tapes");
        any_bound = true;
    }
    if (!any_bound) return out;

    Node node{kind, out.value_, {}, std::move(backward)};
    node.inputs.reserve(inputs.size());
    for (const DiffMatrix* in : inputs) node.inputs.push_back(in->node_ ? *in->node_ : kNoNode);
    out.tape_ = this;
    out.node_ = nodes_.size();
    nodes_.push_back(std::move(node));
    return out;
}

Gradients Tape::backward(const DiffMatrix& root) const {
    if (root.rows() != 1 || root.cols() != 1) {
        throw ShapeError("backward root must be 1x1, got " + root.value().shape_string());
    }
    std::vector<Matrix> grads(nodes_.size());
    if (!root.node_id()) return Gradients(std::move(grads));
    if (root.tape() != this) throw std::logic_error("backward root belongs to another tape");

    const NodeId root_id = *root.node_id();
    grads[root_id] = Matrix(1, 1, 1.0);
    std::vector<Matrix*> input_grads;
    for (NodeId k = root_id + 1; k-- > 0;) {
        if (grads[k].empty()) continue;
        const Node& node = nodes_[k];
        if (node.kind == OpKind::Leaf) continue;
        input_grads.assign(node.inputs.size(), nullptr);
        for (std::size_t i = 0; i < node.inputs.size(); ++i) {
            const NodeId in = node.inputs[i];
            if (in == kNoNode) continue;
            if (grads[in].empty()) {
                const Matrix& v = *nodes_[in].value;
                grads[in] = Matrix(v.rows(), v.cols());
            }
            input_grads[i] = &grads[in];
        }
        node.backward(grads[k], input_grads);
    }
    return Gradients(std::move(grads));
}

void Tape::note_branch(std::uint64_t value) {
    // FNV-1a over the 8 bytes of value.
    for (int i = 0; i < 8; ++i) {
        signature_ ^= (value >> (8 * i)) & 0xffU;
        signature_ *= 0x100000001b3ULL;
    }
}

namespace {

Tape* tape_of(const DiffMatrix& a) { return a.tape(); }

Tape* tape_of(const DiffMatrix& a, const DiffMatrix& b) {
    if (a.tape() && b.tape() && a.tape() != b.tape()) throw std::logic_error("operands recorded on different tapes");
    return a.tape() ? a.tape() : b.tape();
}

void require_same_shape(const char* op, const DiffMatrix& a, const DiffMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ShapeError(std::string(op) + ": shape mismatch " + a.value().shape_string() + " vs " +
                         b.value().shape_string());
    }
}

DiffMatrix finish(Tape* tape, OpKind kind, Matrix value, std::initializer_list<const DiffMatrix*> inputs,
                  Tape::BackwardFn backward) {
    if (tape == nullptr) return DiffMatrix::constant(std::move(value));
    return tape->record(kind, std::move(value), inputs, std::move(backward));
}

// out += a * b (i-k-j loop order, fixed summation order).
void gemm_acc(const Matrix& a, const Matrix& b, Matrix& out) {
    const std::size_t n = a.rows(), inner = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* o = out.data().data() + i * m;
        for (std::size_t k = 0; k < inner; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            const double* br = b.data().data() + k * m;
            for (std::size_t j = 0; j < m; ++j) o[j] += aik * br[j];
        }
    }
}

// out += a * b^T
void gemm_nt_acc(const Matrix& a, const Matrix& b, Matrix& out) {
    const std::size_t n = a.rows(), inner = a.cols(), m = b.rows();
    for (std::size_t i = 0; i < n; ++i) {
        const double* ar = a.data().data() + i * inner;
        for (std::size_t j = 0; j < m; ++j) {
            const double* br = b.data().data() + j * inner;
            double s = 0.0;
            for (std::size_t k = 0; k < inner; ++k) s += ar[k] * br[k];
            out(i, j) += s;
        }
    }
}

// out += a^T * b
void gemm_tn_acc(const Matrix& a, const Matrix& b, Matrix& out) {
    const std::size_t inner = a.rows(), n = a.cols(), m = b.cols();
    for (std::size_t k = 0; k < inner; ++k) {
        const double* br = b.data().data() + k * m;
        for (std::size_t i = 0; i < n; ++i) {
            const double aki = a(k, i);
            if (aki == 0.0) continue;
            double* o = out.data().data() + i * m;
            for (std::size_t j = 0; j < m; ++j) o[j] += aki * br[j];
        }
    }
}

}  // namespace

DiffMatrix matmul(const DiffMatrix& a, const DiffMatrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: cannot multiply " + a.value().shape_string() + " by " + b.value().shape_string());
    }
    Matrix out(a.rows(), b.cols());
    gemm_acc(a.value(), b.value(), out);
    Tape* tape = tape_of(a, b);
    return finish(tape, OpKind::Matmul, std::move(out), {&a, &b},
                  [av = a, bv = b](const Matrix& g, std::span<Matrix* const> in) {
                      if (in[0]) gemm_nt_acc(g, bv.value(), *in[0]);
                      if (in[1]) gemm_tn_acc(av.value(), g, *in[1]);
                  });
}

DiffMatrix spmm(std::shared_ptr<const CsrMatrix> a, const DiffMatrix& b) {
    if (a->cols != b.rows()) {
        throw ShapeError("spmm: cannot multiply " + shape_string(a->rows, a->cols) + " by " + b.value().shape_string());
    }
    const std::size_t m = b.cols();
    Matrix out(a->rows, m);
    const Matrix& bv = b.value();
    for (std::size_t r = 0; r < a->rows; ++r) {
        double* o = out.data().data() + r * m;
        for (std::size_t k = a->row_ptr[r]; k < a->row_ptr[r + 1]; ++k) {
            const double v = a->values[k];
            const double* br = bv.data().data() + a->col_idx[k] * m;
            for (std::size_t j = 0; j < m; ++j) o[j] += v * br[j];
        }
    }
    return finish(tape_of(b), OpKind::Spmm, std::move(out), {&b},
                  [a = std::move(a), m](const Matrix& g, std::span<Matrix* const> in) {
                      if (!in[0]) return;
                      Matrix& gb = *in[0];
                      for (std::size_t r = 0; r < a->rows; ++r) {
                          const double* gr = g.data().data() + r * m;
                          for (std::size_t k = a->row_ptr[r]; k < a->row_ptr[r + 1]; ++k) {
                              const double v = a->values[k];
                              double* o = gb.data().data() + a->col_idx[k] * m;
                              for (std::size_t j = 0; j < m; ++j) o[j] += v * gr[j];
                          }
                      }
                  });
}

DiffMatrix relu(const DiffMatrix& a) {
    Matrix out = a.value();
    for (double& x : out.data()) x = x > 0.0 ? x : 0.0;
    Tape* tape = tape_of(a);
    if (tape) {
        std::vector<std::uint64_t> mask((a.value().size() + 63) / 64, 0);
        for (std::size_t i = 0; i < a.value().size(); ++i)
            if (a.value().data()[i] > 0.0) mask[i / 64] |= 1ULL << (i % 64);
        tape->note_branch_range(mask);
    }
    return finish(tape, OpKind::Relu, std::move(out), {&a}, [av = a](const Matrix& g, std::span<Matrix* const> in) {
        if (!in[0]) return;
        const auto& x = av.value().data();
        auto& o = in[0]->data();
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] > 0.0) o[i] += g.data()[i];
    });
}

DiffMatrix tanh_elem(const DiffMatrix& a) {
    Matrix out = a.value();
    for (double& x : out.data()) x = std::tanh(x);
    auto y = std::make_shared<const Matrix>(out);
    return finish(tape_of(a), OpKind::Tanh, std::move(out), {&a},
                  [y](const Matrix& g, std::span<Matrix* const> in) {
                      if (!in[0]) return;
                      auto& o = in[0]->data();
                      for (std::size_t i = 0; i < o.size(); ++i) {
                          const double t = y->data()[i];
                          o[i] += g.data()[i] * (1.0 - t * t);
                      }
                  });
}

DiffMatrix add(const DiffMatrix& a, const DiffMatrix& b) {
    require_same_shape("add", a, b);
    Matrix out = a.value();
    out.add_in_place(b.value());
    return finish(tape_of(a, b), OpKind::Add, std::move(out), {&a, &b},
                  [](const Matrix& g, std::span<Matrix* const> in) {
                      if (in[0]) in[0]->add_in_place(g);
                      if (in[1]) in[1]->add_in_place(g);
                  });
}

DiffMatrix sub(const DiffMatrix& a, const DiffMatrix& b) {
    require_same_shape("sub", a, b);
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.value().data()[i];
    return finish(tape_of(a, b), OpKind::Sub, std::move(out), {&a, &b},
                  [](const Matrix& g, std::span<Matrix* const> in) {
                      if (in[0]) in[0]->add_in_place(g);
                      if (in[1]) {
                          auto& o = in[1]->data();
                          for (std::size_t i = 0; i < o.size(); ++i) o[i] -= g.data()[i];
                      }
                  });
}

DiffMatrix hadamard(const DiffMatrix& a, const DiffMatrix& b) {
    require_same_shape("hadamard", a, b);
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] *= b.value().data()[i];
    return finish(tape_of(a, b), OpKind::Hadamard, std::move(out), {&a, &b},
                  [av = a, bv = b](const Matrix& g, std::span<Matrix* const> in) {
                      for (std::size_t i = 0; i < g.size(); ++i) {
                          if (in[0]) in[0]->data()[i] += g.data()[i] * bv.value().data()[i];
                          if (in[1]) in[1]->data()[i] += g.data()[i] * av.value().data()[i];
                      }
                  });
}

DiffMatrix scale(const DiffMatrix& a, double c) {
    Matrix out = a.value();
    for (double& x : out.data()) x *= c;
    return finish(tape_of(a), OpKind::Scale, std::move(out), {&a}, [c](const Matrix& g, std::span<Matrix* const> in) {
        if (!in[0]) return;
        auto& o = in[0]->data();
        for (std::size_t i = 0; i < o.size(); ++i) o[i] += c * g.data()[i];
    });
}

DiffMatrix col_scale(const DiffMatrix& a, const DiffMatrix& v) {
    if (v.rows() != 1 || v.cols() != a.cols()) {
        throw ShapeError("col_scale: " + a.value().shape_string() + " with diagonal " + v.value().shape_string());
    }
    Matrix out = a.value();
    const std::size_t m = a.cols();
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t j = 0; j < m; ++j) out(r, j) *= v(0, j);
    return finish(tape_of(a, v), OpKind::ColScale, std::move(out), {&a, &v},
                  [av = a, vv = v](const Matrix& g, std::span<Matrix* const> in) {
                      const std::size_t m = g.cols();
                      for (std::size_t r = 0; r < g.rows(); ++r) {
                          for (std::size_t j = 0; j < m; ++j) {
                              if (in[0]) (*in[0])(r, j) += g(r, j) * vv(0, j);
                              if (in[1]) (*in[1])(0, j) += g(r, j) * av(r, j);
                          }
                      }
                  });
}

DiffMatrix row_scale(const DiffMatrix& a, const DiffMatrix& v) {
    if (v.cols() != 1 || v.rows() != a.rows()) {
        throw ShapeError("row_scale: " + a.value().shape_string() + " with column " + v.value().shape_string());
    }
    Matrix out = a.value();
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (double& x : out.row_span(r)) x *= v(r, 0);
    return finish(tape_of(a, v), OpKind::RowScale, std::move(out), {&a, &v},
                  [av = a, vv = v](const Matrix& g, std::span<Matrix* const> in) {
                      for (std::size_t r = 0; r < g.rows(); ++r) {
                          double acc = 0.0;
                          for (std::size_t j = 0; j < g.cols(); ++j) {
                              if (in[0]) (*in[0])(r, j) += g(r, j) * vv(r, 0);
                              acc += g(r, j) * av(r, j);
                          }
                          if (in[1]) (*in[1])(r, 0) += acc;
                      }
                  });
}

DiffMatrix add_row_vector(const DiffMatrix& a, const DiffMatrix& v) {
    if (v.rows() != 1 || v.cols() != a.cols()) {
        throw ShapeError("add_row_vector: " + a.value().shape_string() + " with row " + v.value().shape_string());
    }
    Matrix out = a.value();
    for (std::size_t r = 0; r < out.rows(); ++r)
        for (std::size_t j = 0; j < out.cols(); ++j) out(r, j) += v(0, j);
    return finish(tape_of(a, v), OpKind::AddRowVector, std::move(out), {&a, &v},
                  [](const Matrix& g, std::span<Matrix* const> in) {
                      if (in[0]) in[0]->add_in_place(g);
                      if (in[1])
                          for (std::size_t r = 0; r < g.rows(); ++r)
                              for (std::size_t j = 0; j < g.cols(); ++j) (*in[1])(0, j) += g(r, j);
                  });
}

DiffMatrix row_select(const DiffMatrix& a, std::span<const std::size_t> idx) {
    std::vector<char> seen(a.rows(), 0);
    for (std::size_t i : idx) {
        if (i >= a.rows()) {
            throw IndexError("row_select: index " + std::to_string(i) + " out of range for " + a.value().shape_string());
        }
        if (seen[i]) throw IndexError("row_select: duplicate index " + std::to_string(i));
        seen[i] = 1;
    }
    Matrix out(idx.size(), a.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto src = a.value().row_span(idx[r]);
        std::copy(src.begin(), src.end(), out.row_span(r).begin());
    }
    return finish(tape_of(a), OpKind::RowSelect, std::move(out), {&a},
                  [rows = std::vector<std::size_t>(idx.begin(), idx.end())](const Matrix& g,
                                                                            std::span<Matrix* const> in) {
                      if (!in[0]) return;
                      for (std::size_t r = 0; r < rows.size(); ++r) {
                          auto dst = in[0]->row_span(rows[r]);
                          const auto src = g.row_span(r);
                          for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
                      }
                  });
}

DiffMatrix concat_cols(const DiffMatrix& a, const DiffMatrix& b) {
    if (a.rows() != b.rows()) {
        throw ShapeError("concat_cols: row mismatch " + a.value().shape_string() + " vs " + b.value().shape_string());
    }
    const std::size_t ca = a.cols(), cb = b.cols();
    Matrix out(a.rows(), ca + cb);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        auto dst = out.row_span(r);
        const auto ra = a.value().row_span(r);
        const auto rb = b.value().row_span(r);
        std::copy(ra.begin(), ra.end(), dst.begin());
        std::copy(rb.begin(), rb.end(), dst.begin() + static_cast<std::ptrdiff_t>(ca));
    }
    return finish(tape_of(a, b), OpKind::ConcatCols, std::move(out), {&a, &b},
                  [ca, cb](const Matrix& g, std::span<Matrix* const> in) {
                      for (std::size_t r = 0; r < g.rows(); ++r) {
                          if (in[0])
                              for (std::size_t j = 0; j < ca; ++j) (*in[0])(r, j) += g(r, j);
                          if (in[1])
                              for (std::size_t j = 0; j < cb; ++j) (*in[1])(r, j) += g(r, ca + j);
                      }
                  });
}

DiffMatrix concat_rows(std::span<const DiffMatrix> parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no operands");
    const std::size_t cols = parts.front().cols();
    std::size_t rows = 0;
    Tape* tape = nullptr;
    std::vector<const DiffMatrix*> inputs;
    std::vector<std::size_t> offsets;
    for (const DiffMatrix& p : parts) {
        if (p.cols() != cols) {
            throw ShapeError("concat_rows: column mismatch " + parts.front().value().shape_string() + " vs " +
                             p.value().shape_string());
        }
        if (p.tape()) {
            if (tape && tape != p.tape()) throw std::logic_error("operands recorded on different tapes");
            tape = p.tape();
        }
        inputs.push_back(&p);
        offsets.push_back(rows * cols);
        rows += p.rows();
    }
    Matrix out(rows, cols);
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const auto& src = parts[i].value().data();
        std::copy(src.begin(), src.end(), out.data().begin() + static_cast<std::ptrdiff_t>(offsets[i]));
    }
    if (tape == nullptr) return DiffMatrix::constant(std::move(out));
    return tape->record(OpKind::ConcatRows, std::move(out), inputs,
                        [offsets = std::move(offsets)](const Matrix& g, std::span<Matrix* const> in) {
                            for (std::size_t i = 0; i < in.size(); ++i) {
                                if (!in[i]) continue;
                                auto& dst = in[i]->data();
                                for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += g.data()[offsets[i] + k];
                            }
                        });
}

DiffMatrix mean_rows(const DiffMatrix& a) {
    if (a.rows() == 0) throw ShapeError("mean_rows: empty matrix");
    const double inv = 1.0 / static_cast<double>(a.rows());
    Matrix out(1, a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t j = 0; j < a.cols(); ++j) out(0, j) += a(r, j);
    for (double& x : out.data()) x *= inv;
    return finish(tape_of(a), OpKind::MeanRows, std::move(out), {&a},
                  [inv](const Matrix& g, std::span<Matrix* const> in) {
                      if (!in[0]) return;
                      for (std::size_t r = 0; r < in[0]->rows(); ++r)
                          for (std::size_t j = 0; j < g.cols(); ++j) (*in[0])(r, j) += g(0, j) * inv;
                  });
}

DiffMatrix max_rows(const DiffMatrix& a) {
    if (a.rows() == 0) throw ShapeError("max_rows: empty matrix");
    Matrix out(1, a.cols());
    std::vector<std::size_t> arg(a.cols(), 0);
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double best = a(0, j);
        for (std::size_t r = 1; r < a.rows(); ++r) {
            if (a(r, j) > best) {
                best = a(r, j);
                arg[j] = r;
            }
        }
        out(0, j) = best;
    }
    Tape* tape = tape_of(a);
    if (tape) tape->note_branch_range(arg);
    return finish(tape, OpKind::MaxRows, std::move(out), {&a},
                  [arg = std::move(arg)](const Matrix& g, std::span<Matrix* const> in) {
                      if (!in[0]) return;
                      for (std::size_t j = 0; j < arg.size(); ++j) (*in[0])(arg[j], j) += g(0, j);
                  });
}

DiffMatrix sum(const DiffMatrix& a) {
    double s = 0.0;
    for (double x : a.value().data()) s += x;
    return finish(tape_of(a), OpKind::Sum, Matrix(1, 1, s), {&a}, [](const Matrix& g, std::span<Matrix* const> in) {
        if (!in[0]) return;
        for (double& x : in[0]->data()) x += g(0, 0);
    });
}

DiffMatrix softmax_cross_entropy(const DiffMatrix& logits, std::span<const int> labels) {
    if (logits.rows() != labels.size()) {
        throw ShapeError("softmax_cross_entropy: " + logits.value().shape_string() + " logits for " +
                         std::to_string(labels.size()) + " labels");
    }
    if (logits.rows() == 0) throw ShapeError("softmax_cross_entropy: empty batch");
    const std::size_t n = logits.rows(), c = logits.cols();
    for (int y : labels) {
        if (y < 0 || static_cast<std::size_t>(y) >= c) {
            throw IndexError("softmax_cross_entropy: label " + std::to_string(y) + " outside [0, " +
                             std::to_string(c) + ")");
        }
    }
    Matrix probs(n, c);
    double loss = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        const auto row = logits.value().row_span(r);
        const double mx = *std::max_element(row.begin(), row.end());
        double z = 0.0;
        for (std::size_t j = 0; j < c; ++j) z += std::exp(row[j] - mx);
        const double log_z = std::log(z);
        for (std::size_t j = 0; j < c; ++j) probs(r, j) = std::exp(row[j] - mx - log_z);
        loss -= row[static_cast<std::size_t>(labels[r])] - mx - log_z;
    }
    loss /= static_cast<double>(n);
    return finish(tape_of(logits), OpKind::SoftmaxCrossEntropy, Matrix(1, 1, loss), {&logits},
                  [probs = std::move(probs), ys = std::vector<int>(labels.begin(), labels.end())](
                      const Matrix& g, std::span<Matrix* const> in) {
                      if (!in[0]) return;
                      const double s = g(0, 0) / static_cast<double>(probs.rows());
                      for (std::size_t r = 0; r < probs.rows(); ++r)
                          for (std::size_t j = 0; j < probs.cols(); ++j) {
                              const double onehot = static_cast<std::size_t>(ys[r]) == j ? 1.0 : 0.0;
                              (*in[0])(r, j) += s * (probs(r, j) - onehot);
                          }
                  });
}

}  // namespace liftgraph
