#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ntc/core.hpp"

namespace ntc {

// Dense row-major matrix of doubles. Vectors are 1 x n, scalars 1 x 1.
struct Tensor {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
    Tensor(size_t r, size_t c, std::vector<double> d);

    static Tensor scalar(double v);

    double& at(size_t r, size_t c) { return data[r * cols + c]; }
    double at(size_t r, size_t c) const { return data[r * cols + c]; }
    size_t size() const { return data.size(); }
    bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
    bool all_finite() const;
};

// Reverse-mode autodiff tape. Ops evaluate eagerly; backward() replays the
// tape in reverse creation order. Node granularity is whole matrices, so the
// tape stays short and the flops live in the op kernels.
class Graph {
public:
    using Id = int32_t;

    explicit Graph(bool track_gradients = true) : track_(track_gradients) {}

    Id leaf(Tensor value, bool needs_grad = false);

    Id matmul(Id a, Id b);
    Id add(Id a, Id b);           // same shape
    Id add_rowvec(Id a, Id v);    // (m x n) + (1 x n), broadcast over rows
    Id sub(Id a, Id b);
    Id mul(Id a, Id b);           // elementwise
    Id scale(Id a, double s);
    Id add_const(Id a, double c);
    Id one_minus(Id a);
    Id tanh_op(Id a);
    Id sigmoid(Id a);
    Id softplus(Id a);
    Id abs_op(Id a);
    Id log_op(Id a);
    Id reciprocal(Id a);
    Id concat_cols(Id a, Id b);
    Id slice_cols(Id a, size_t first, size_t count);
    // rows = links; out[l] = sum of in[n] over n in neighbors(l).
    // The graph must outlive this Graph object.
    Id neighbor_sum(Id a, const LinkGraph& graph);
    // mean over selected rows of a 1-column tensor -> scalar
    Id masked_mean(Id a, std::vector<uint8_t> row_selected);

    const Tensor& value(Id id) const { return nodes_[id].value; }
    const Tensor& gradient(Id id) const { return nodes_[id].grad; }

    void backward(Id root);  // root must be scalar
    size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool needs_grad = false;
        std::function<void(Graph&, Id)> back;
    };

    Id push(Tensor value, bool needs_grad, std::function<void(Graph&, Id)> back);
    bool wants_grad(Id id) const { return nodes_[id].needs_grad; }
    Tensor& grad_ref(Id id);  // allocates on first touch

    std::vector<Node> nodes_;
    bool track_ = true;
};

double softplus_value(double x);

}  // namespace ntc
