#include "ntc/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace ntc {

Tensor::Tensor(size_t r, size_t c, std::vector<double> d) : rows(r), cols(c), data(std::move(d)) {
    if (data.size() != rows * cols) throw std::invalid_argument("tensor: shape/data mismatch");
}

Tensor Tensor::scalar(double v) {
    Tensor t(1, 1);
    t.data[0] = v;
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

double softplus_value(double x) {
    // stable: log(1+e^x) = max(x,0) + log1p(e^-|x|)
    return (x > 0.0 ? x : 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

namespace {

// C += A * B
void mm_acc(const Tensor& A, const Tensor& B, Tensor& C) {
    const size_t m = A.rows, k = A.cols, n = B.cols;
    for (size_t i = 0; i < m; ++i) {
        const double* arow = &A.data[i * k];
        double* crow = &C.data[i * n];
        for (size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = &B.data[p * n];
            for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C += A^T * B   (A: m x k used as k x m)
void mm_at_b_acc(const Tensor& A, const Tensor& B, Tensor& C) {
    const size_t m = A.rows, k = A.cols, n = B.cols;
    for (size_t i = 0; i < m; ++i) {
        const double* arow = &A.data[i * k];
        const double* brow = &B.data[i * n];
        for (size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            if (av == 0.0) continue;
            double* crow = &C.data[p * n];
            for (size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C += A * B^T   (B: n x k used as k x n)
void mm_a_bt_acc(const Tensor& A, const Tensor& B, Tensor& C) {
    const size_t m = A.rows, k = A.cols, n = B.rows;
    for (size_t i = 0; i < m; ++i) {
        const double* arow = &A.data[i * k];
        double* crow = &C.data[i * n];
        for (size_t j = 0; j < n; ++j) {
            const double* brow = &B.data[j * k];
            double s = 0.0;
            for (size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
            crow[j] += s;
        }
    }
}

}  // namespace

Graph::Id Graph::push(Tensor value, bool needs_grad, std::function<void(Graph&, Id)> back) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = track_ && needs_grad;
    if (n.needs_grad) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return static_cast<Id>(nodes_.size() - 1);
}

Tensor& Graph::grad_ref(Id id) {
    Node& n = nodes_[id];
    if (n.grad.size() == 0) n.grad = Tensor(n.value.rows, n.value.cols);
    return n.grad;
}

Graph::Id Graph::leaf(Tensor value, bool needs_grad) {
    return push(std::move(value), needs_grad, nullptr);
}

Graph::Id Graph::matmul(Id a, Id b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.cols != B.rows) throw std::invalid_argument("matmul: inner dimension mismatch");
    Tensor out(A.rows, B.cols);
    mm_acc(A, B, out);
    return push(std::move(out), wants_grad(a) || wants_grad(b), [a, b](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        if (g.wants_grad(a)) mm_a_bt_acc(d, g.value(b), g.grad_ref(a));
        if (g.wants_grad(b)) mm_at_b_acc(g.value(a), d, g.grad_ref(b));
    });
}

Graph::Id Graph::add(Id a, Id b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (!A.same_shape(B)) throw std::invalid_argument("add: shape mismatch");
    Tensor out = A;
    for (size_t i = 0; i < out.size(); ++i) out.data[i] += B.data[i];
    return push(std::move(out), wants_grad(a) || wants_grad(b), [a, b](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        if (g.wants_grad(a)) {
            Tensor& da = g.grad_ref(a);
            for (size_t i = 0; i < d.size(); ++i) da.data[i] += d.data[i];
        }
        if (g.wants_grad(b)) {
            Tensor& db = g.grad_ref(b);
            for (size_t i = 0; i < d.size(); ++i) db.data[i] += d.data[i];
        }
    });
}

Graph::Id Graph::add_rowvec(Id a, Id v) {
    const Tensor& A = value(a);
    const Tensor& V = value(v);
    if (V.rows != 1 || V.cols != A.cols) throw std::invalid_argument("add_rowvec: shape mismatch");
    Tensor out = A;
    for (size_t i = 0; i < A.rows; ++i)
        for (size_t j = 0; j < A.cols; ++j) out.data[i * A.cols + j] += V.data[j];
    return push(std::move(out), wants_grad(a) || wants_grad(v), [a, v](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        if (g.wants_grad(a)) {
            Tensor& da = g.grad_ref(a);
            for (size_t i = 0; i < d.size(); ++i) da.data[i] += d.data[i];
        }
        if (g.wants_grad(v)) {
            Tensor& dv = g.grad_ref(v);
            for (size_t i = 0; i < d.rows; ++i)
                for (size_t j = 0; j < d.cols; ++j) dv.data[j] += d.data[i * d.cols + j];
        }
    });
}

Graph::Id Graph::sub(Id a, Id b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (!A.same_shape(B)) throw std::invalid_argument("sub: shape mismatch");
    Tensor out = A;
    for (size_t i = 0; i < out.size(); ++i) out.data[i] -= B.data[i];
    return push(std::move(out), wants_grad(a) || wants_grad(b), [a, b](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        if (g.wants_grad(a)) {
            Tensor& da = g.grad_ref(a);
            for (size_t i = 0; i < d.size(); ++i) da.data[i] += d.data[i];
        }
        if (g.wants_grad(b)) {
            Tensor& db = g.grad_ref(b);
            for (size_t i = 0; i < d.size(); ++i) db.data[i] -= d.data[i];
        }
    });
}

Graph::Id Graph::mul(Id a, Id b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (!A.same_shape(B)) throw std::invalid_argument("mul: shape mismatch");
    Tensor out = A;
    for (size_t i = 0; i < out.size(); ++i) out.data[i] *= B.data[i];
    return push(std::move(out), wants_grad(a) || wants_grad(b), [a, b](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        if (g.wants_grad(a)) {
            Tensor& da = g.grad_ref(a);
            const Tensor& B_ = g.value(b);
            for (size_t i = 0; i < d.size(); ++i) da.data[i] += d.data[i] * B_.data[i];
        }
        if (g.wants_grad(b)) {
            Tensor& db = g.grad_ref(b);
            const Tensor& A_ = g.value(a);
            for (size_t i = 0; i < d.size(); ++i) db.data[i] += d.data[i] * A_.data[i];
        }
    });
}

Graph::Id Graph::scale(Id a, double s) {
    Tensor out = value(a);
    for (double& x : out.data) x *= s;
    return push(std::move(out), wants_grad(a), [a, s](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        Tensor& da = g.grad_ref(a);
        for (size_t i = 0; i < d.size(); ++i) da.data[i] += s * d.data[i];
    });
}

Graph::Id Graph::add_const(Id a, double c) {
    Tensor out = value(a);
    for (double& x : out.data) x += c;
    return push(std::move(out), wants_grad(a), [a](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        Tensor& da = g.grad_ref(a);
        for (size_t i = 0; i < d.size(); ++i) da.data[i] += d.data[i];
    });
}

Graph::Id Graph::one_minus(Id a) {
    Tensor out = value(a);
    for (double& x : out.data) x = 1.0 - x;
    return push(std::move(out), wants_grad(a), [a](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        Tensor& da = g.grad_ref(a);
        for (size_t i = 0; i < d.size(); ++i) da.data[i] -= d.data[i];
    });
}

Graph::Id Graph::tanh_op(Id a) {
    Tensor out = value(a);
    for (double& x : out.data) x = std::tanh(x);
    return push(std::move(out), wants_grad(a), [a](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        const Tensor& y = g.value(self);
        Tensor& da = g.grad_ref(a);
        for (size_t i = 0; i < d.size(); ++i) da.data[i] += d.data[i] * (1.0 - y.data[i] * y.data[i]);
    });
}

Graph::Id Graph::sigmoid(Id a) {
    Tensor out = value(a);
    for (double& x : out.data) x = 1.0 / (1.0 + std::exp(-x));
    return push(std::move(out), wants_grad(a), [a](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        const Tensor& y = g.value(self);
        Tensor& da = g.grad_ref(a);
        for (size_t i = 0; i < d.size(); ++i) da.data[i] += d.data[i] * y.data[i] * (1.0 - y.data[i]);
    });
}

Graph::Id Graph::softplus(Id a) {
    Tensor out = value(a);
    for (double& x : out.data) x = softplus_value(x);
    return push(std::move(out), wants_grad(a), [a](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        const Tensor& x = g.value(a);
        Tensor& da = g.grad_ref(a);
        for (size_t i = 0; i < d.size(); ++i)
            da.data[i] += d.data[i] / (1.0 + std::exp(-x.data[i]));
    });
}

Graph::Id Graph::abs_op(Id a) {
    Tensor out = value(a);
    for (double& x : out.data) x = std::fabs(x);
    return push(std::move(out), wants_grad(a), [a](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        const Tensor& x = g.value(a);
        Tensor& da = g.grad_ref(a);
        for (size_t i = 0; i < d.size(); ++i) {
            const double s = x.data[i] > 0.0 ? 1.0 : (x.data[i] < 0.0 ? -1.0 : 0.0);
            da.data[i] += d.data[i] * s;
        }
    });
}

Graph::Id Graph::log_op(Id a) {
    Tensor out = value(a);
    for (double& x : out.data) x = std::log(x);
    return push(std::move(out), wants_grad(a), [a](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        const Tensor& x = g.value(a);
        Tensor& da = g.grad_ref(a);
        for (size_t i = 0; i < d.size(); ++i) da.data[i] += d.data[i] / x.data[i];
    });
}

Graph::Id Graph::reciprocal(Id a) {
    Tensor out = value(a);
    for (double& x : out.data) x = 1.0 / x;
    return push(std::move(out), wants_grad(a), [a](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        const Tensor& y = g.value(self);
        Tensor& da = g.grad_ref(a);
        for (size_t i = 0; i < d.size(); ++i) da.data[i] -= d.data[i] * y.data[i] * y.data[i];
    });
}

Graph::Id Graph::concat_cols(Id a, Id b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.rows != B.rows) throw std::invalid_argument("concat_cols: row mismatch");
    Tensor out(A.rows, A.cols + B.cols);
    for (size_t i = 0; i < A.rows; ++i) {
        for (size_t j = 0; j < A.cols; ++j) out.at(i, j) = A.at(i, j);
        for (size_t j = 0; j < B.cols; ++j) out.at(i, A.cols + j) = B.at(i, j);
    }
    return push(std::move(out), wants_grad(a) || wants_grad(b), [a, b](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        const size_t ac = g.value(a).cols;
        if (g.wants_grad(a)) {
            Tensor& da = g.grad_ref(a);
            for (size_t i = 0; i < da.rows; ++i)
                for (size_t j = 0; j < da.cols; ++j) da.at(i, j) += d.at(i, j);
        }
        if (g.wants_grad(b)) {
            Tensor& db = g.grad_ref(b);
            for (size_t i = 0; i < db.rows; ++i)
                for (size_t j = 0; j < db.cols; ++j) db.at(i, j) += d.at(i, ac + j);
        }
    });
}

Graph::Id Graph::slice_cols(Id a, size_t first, size_t count) {
    const Tensor& A = value(a);
    if (first + count > A.cols) throw std::invalid_argument("slice_cols: out of range");
    Tensor out(A.rows, count);
    for (size_t i = 0; i < A.rows; ++i)
        for (size_t j = 0; j < count; ++j) out.at(i, j) = A.at(i, first + j);
    return push(std::move(out), wants_grad(a), [a, first, count](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        Tensor& da = g.grad_ref(a);
        for (size_t i = 0; i < d.rows; ++i)
            for (size_t j = 0; j < count; ++j) da.at(i, first + j) += d.at(i, j);
    });
}

Graph::Id Graph::neighbor_sum(Id a, const LinkGraph& graph) {
    const Tensor& A = value(a);
    if (A.rows != graph.num_links()) throw std::invalid_argument("neighbor_sum: row/link mismatch");
    const LinkGraph* gptr = &graph;
    Tensor out(A.rows, A.cols);
    for (size_t l = 0; l < A.rows; ++l) {
        double* orow = &out.data[l * A.cols];
        for (uint32_t n : graph.neighbors(static_cast<uint32_t>(l))) {
            const double* arow = &A.data[static_cast<size_t>(n) * A.cols];
            for (size_t j = 0; j < A.cols; ++j) orow[j] += arow[j];
        }
    }
    // union adjacency is symmetric, so the adjoint is the same aggregation
    return push(std::move(out), wants_grad(a), [a, gptr](Graph& g, Id self) {
        const Tensor& d = g.gradient(self);
        Tensor& da = g.grad_ref(a);
        for (size_t l = 0; l < d.rows; ++l) {
            double* darow = &da.data[l * d.cols];
            for (uint32_t n : gptr->neighbors(static_cast<uint32_t>(l))) {
                const double* drow = &d.data[static_cast<size_t>(n) * d.cols];
                for (size_t j = 0; j < d.cols; ++j) darow[j] += drow[j];
            }
        }
    });
}

Graph::Id Graph::masked_mean(Id a, std::vector<uint8_t> row_selected) {
    const Tensor& A = value(a);
    if (A.cols != 1) throw std::invalid_argument("masked_mean: expects a column");
    if (row_selected.size() != A.rows) throw std::invalid_argument("masked_mean: mask size");
    size_t k = 0;
    double sum = 0.0;
    for (size_t i = 0; i < A.rows; ++i)
        if (row_selected[i]) {
            sum += A.data[i];
            ++k;
        }
    if (k == 0) throw std::invalid_argument("masked_mean: empty selection");
    Tensor out = Tensor::scalar(sum / static_cast<double>(k));
    return push(std::move(out), wants_grad(a),
                [a, rows = std::move(row_selected), k](Graph& g, Id self) {
                    const double d = g.gradient(self).data[0] / static_cast<double>(k);
                    Tensor& da = g.grad_ref(a);
                    for (size_t i = 0; i < rows.size(); ++i)
                        if (rows[i]) da.data[i] += d;
                });
}

void Graph::backward(Id root) {
    if (value(root).size() != 1) throw std::invalid_argument("backward: root must be scalar");
    for (Node& n : nodes_)
        if (n.grad.size() != 0) std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
    grad_ref(root).data[0] = 1.0;
    for (Id id = root; id >= 0; --id) {
        Node& n = nodes_[id];
        if (n.needs_grad && n.back && n.grad.size() != 0) n.back(*this, id);
    }
}

}  // namespace ntc
