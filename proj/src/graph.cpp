#include "r2m/graph.hpp"

#include <algorithm>
#include <cmath>

#include "r2m/errors.hpp"

namespace r2m {

namespace {

void require_rank2(const Tensor& t, const char* op) {
    if (t.rank() != 2) {
        throw DimensionError(std::string(op) + ": expected rank-2 tensor, got shape " +
                             shape_str(t.shape));
    }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape != b.shape) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape) +
                             " vs " + shape_str(b.shape));
    }
}

} // namespace

void Graph::check_node(Node n) const {
    if (n < 0 || static_cast<std::size_t>(n) >= nodes_.size()) {
        throw ContractError("graph: node id " + std::to_string(n) + " out of range");
    }
}

Graph::Node Graph::push(Entry e) {
    nodes_.push_back(std::move(e));
    return static_cast<Node>(nodes_.size() - 1);
}

Graph::Node Graph::constant(Tensor value) {
    Entry e;
    e.op = Op::Constant;
    e.value = std::move(value);
    return push(std::move(e));
}

Graph::Node Graph::scalar(double v) {
    return constant(Tensor({1, 1}, {v}));
}

Graph::Node Graph::param(Parameter& p) {
    Entry e;
    e.op = Op::Param;
    e.value = p.value;  // copy of the data; grads flow back through `bound`
    e.value.grad.clear();
    e.bound = &p;
    return push(std::move(e));
}

Graph::Node Graph::matmul(Node a, Node b) {
    check_node(a);
    check_node(b);
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require_rank2(A, "matmul");
    require_rank2(B, "matmul");
    if (A.cols() != B.rows()) {
        throw DimensionError("matmul: inner extents differ: " + shape_str(A.shape) + " vs " +
                             shape_str(B.shape));
    }
    const int m = A.rows(), k = A.cols(), n = B.cols();
    Tensor out = Tensor::zeros({m, n});
    for (int i = 0; i < m; ++i) {
        const double* arow = &A.data[static_cast<std::size_t>(i) * k];
        double* orow = &out.data[static_cast<std::size_t>(i) * n];
        for (int kk = 0; kk < k; ++kk) {
            const double av = arow[kk];
            if (av == 0.0) continue;
            const double* brow = &B.data[static_cast<std::size_t>(kk) * n];
            for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    Entry e;
    e.op = Op::MatMul;
    e.inputs = {a, b};
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::add(Node a, Node b) {
    check_node(a);
    check_node(b);
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require_same_shape(A, B, "add");
    Tensor out = A;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += B.data[i];
    Entry e;
    e.op = Op::Add;
    e.inputs = {a, b};
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::sub(Node a, Node b) {
    check_node(a);
    check_node(b);
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require_same_shape(A, B, "sub");
    Tensor out = A;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= B.data[i];
    Entry e;
    e.op = Op::Sub;
    e.inputs = {a, b};
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::mul(Node a, Node b) {
    check_node(a);
    check_node(b);
    const Tensor& A = val(a);
    const Tensor& B = val(b);
    require_same_shape(A, B, "mul");
    Tensor out = A;
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= B.data[i];
    Entry e;
    e.op = Op::Mul;
    e.inputs = {a, b};
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::scale(Node a, double s) {
    check_node(a);
    Tensor out = val(a);
    for (double& v : out.data) v *= s;
    Entry e;
    e.op = Op::Scale;
    e.inputs = {a};
    e.attr = s;
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::tanh_of(Node a) {
    check_node(a);
    Tensor out = val(a);
    for (double& v : out.data) v = std::tanh(v);
    Entry e;
    e.op = Op::Tanh;
    e.inputs = {a};
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::sigmoid_of(Node a) {
    check_node(a);
    Tensor out = val(a);
    for (double& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
    Entry e;
    e.op = Op::Sigmoid;
    e.inputs = {a};
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::relu(Node a) {
    check_node(a);
    Tensor out = val(a);
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    Entry e;
    e.op = Op::Relu;
    e.inputs = {a};
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::softmax_rows(Node a) {
    check_node(a);
    const Tensor& A = val(a);
    require_rank2(A, "softmax_rows");
    if (!A.all_finite()) throw NumericError("softmax_rows: non-finite input");
    const int m = A.rows(), n = A.cols();
    Tensor out = Tensor::zeros({m, n});
    for (int i = 0; i < m; ++i) {
        double mx = A.at(i, 0);
        for (int j = 1; j < n; ++j) mx = std::max(mx, A.at(i, j));
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
            double ex = std::exp(A.at(i, j) - mx);
            out.at(i, j) = ex;
            sum += ex;
        }
        for (int j = 0; j < n; ++j) out.at(i, j) /= sum;
    }
    Entry e;
    e.op = Op::SoftmaxRows;
    e.inputs = {a};
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::log_softmax_rows(Node a) {
    check_node(a);
    const Tensor& A = val(a);
    require_rank2(A, "log_softmax_rows");
    if (!A.all_finite()) throw NumericError("log_softmax_rows: non-finite input");
    const int m = A.rows(), n = A.cols();
    Tensor out = Tensor::zeros({m, n});
    for (int i = 0; i < m; ++i) {
        double mx = A.at(i, 0);
        for (int j = 1; j < n; ++j) mx = std::max(mx, A.at(i, j));
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += std::exp(A.at(i, j) - mx);
        double lse = mx + std::log(sum);
        for (int j = 0; j < n; ++j) out.at(i, j) = A.at(i, j) - lse;
    }
    Entry e;
    e.op = Op::LogSoftmaxRows;
    e.inputs = {a};
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::layer_norm(Node x, Node gain, Node bias, double eps) {
    check_node(x);
    check_node(gain);
    check_node(bias);
    const Tensor& X = val(x);
    const Tensor& G = val(gain);
    const Tensor& B = val(bias);
    require_rank2(X, "layer_norm");
    const int m = X.rows(), n = X.cols();
    if (n == 0) throw DimensionError("layer_norm: zero-width row");
    if (G.numel() != static_cast<std::size_t>(n) || B.numel() != static_cast<std::size_t>(n)) {
        throw DimensionError("layer_norm: gain/bias width mismatch: row " + shape_str(X.shape) +
                             " gain " + shape_str(G.shape) + " bias " + shape_str(B.shape));
    }
    if (eps <= 0.0) throw ContractError("layer_norm: eps must be positive");
    Tensor out = Tensor::zeros({m, n});
    Entry e;
    e.aux.resize(static_cast<std::size_t>(m) * 2);
    for (int i = 0; i < m; ++i) {
        double mean = 0.0;
        for (int j = 0; j < n; ++j) mean += X.at(i, j);
        mean /= n;
        double var = 0.0;
        for (int j = 0; j < n; ++j) {
            double dv = X.at(i, j) - mean;
            var += dv * dv;
        }
        var /= n;
        // Variance clamped from below by eps; rows with var >= eps are
        // normalized to exactly unit variance.
        double denom = std::sqrt(std::max(var, eps));
        e.aux[static_cast<std::size_t>(i) * 2] = mean;
        e.aux[static_cast<std::size_t>(i) * 2 + 1] = var >= eps ? denom : -denom;
        for (int j = 0; j < n; ++j) {
            out.at(i, j) = G.data[static_cast<std::size_t>(j)] * (X.at(i, j) - mean) / denom +
                           B.data[static_cast<std::size_t>(j)];
        }
    }
    e.op = Op::LayerNorm;
    e.inputs = {x, gain, bias};
    e.attr = eps;
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::concat_rows(const std::vector<Node>& parts) {
    if (parts.empty()) throw ContractError("concat_rows: no inputs");
    int n = -1, m = 0;
    for (Node p : parts) {
        check_node(p);
        const Tensor& T = val(p);
        require_rank2(T, "concat_rows");
        if (n < 0) n = T.cols();
        if (T.cols() != n) {
            throw DimensionError("concat_rows: column mismatch " + shape_str(T.shape) +
                                 " vs expected width " + std::to_string(n));
        }
        m += T.rows();
    }
    Tensor out = Tensor::zeros({m, n});
    std::size_t off = 0;
    for (Node p : parts) {
        const Tensor& T = val(p);
        std::copy(T.data.begin(), T.data.end(), out.data.begin() + static_cast<long>(off));
        off += T.data.size();
    }
    Entry e;
    e.op = Op::ConcatRows;
    e.inputs = parts;
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::concat_cols(const std::vector<Node>& parts) {
    if (parts.empty()) throw ContractError("concat_cols: no inputs");
    int m = -1, n = 0;
    for (Node p : parts) {
        check_node(p);
        const Tensor& T = val(p);
        require_rank2(T, "concat_cols");
        if (m < 0) m = T.rows();
        if (T.rows() != m) {
            throw DimensionError("concat_cols: row mismatch " + shape_str(T.shape) +
                                 " vs expected height " + std::to_string(m));
        }
        n += T.cols();
    }
    Tensor out = Tensor::zeros({m, n});
    int col = 0;
    for (Node p : parts) {
        const Tensor& T = val(p);
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < T.cols(); ++j) out.at(i, col + j) = T.at(i, j);
        }
        col += T.cols();
    }
    Entry e;
    e.op = Op::ConcatCols;
    e.inputs = parts;
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::embed_rows(Node table, std::vector<int> ids) {
    check_node(table);
    const Tensor& T = val(table);
    require_rank2(T, "embed_rows");
    if (ids.empty()) throw ContractError("embed_rows: no ids");
    const int rows = T.rows(), d = T.cols();
    for (int id : ids) {
        if (id < 0 || id >= rows) {
            throw VocabError("embed_rows: id " + std::to_string(id) + " out of range [0," +
                             std::to_string(rows) + ")");
        }
    }
    Tensor out = Tensor::zeros({static_cast<int>(ids.size()), d});
    for (std::size_t i = 0; i < ids.size(); ++i) {
        for (int j = 0; j < d; ++j) {
            out.data[i * static_cast<std::size_t>(d) + j] = T.at(ids[i], j);
        }
    }
    Entry e;
    e.op = Op::EmbedRows;
    e.inputs = {table};
    e.ids = std::move(ids);
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::mean_all(Node a) {
    check_node(a);
    const Tensor& A = val(a);
    double s = 0.0;
    for (double v : A.data) s += v;
    Entry e;
    e.op = Op::MeanAll;
    e.inputs = {a};
    e.value = Tensor({1, 1}, {s / static_cast<double>(A.numel())});
    return push(std::move(e));
}

Graph::Node Graph::sum_squares(Node a) {
    check_node(a);
    const Tensor& A = val(a);
    double s = 0.0;
    for (double v : A.data) s += v * v;
    Entry e;
    e.op = Op::SumSquares;
    e.inputs = {a};
    e.value = Tensor({1, 1}, {s});
    return push(std::move(e));
}

Graph::Node Graph::pick(Node a, int r, int c) {
    check_node(a);
    const Tensor& A = val(a);
    require_rank2(A, "pick");
    if (r < 0 || r >= A.rows() || c < 0 || c >= A.cols()) {
        throw ContractError("pick: index (" + std::to_string(r) + "," + std::to_string(c) +
                            ") out of range for " + shape_str(A.shape));
    }
    Entry e;
    e.op = Op::Pick;
    e.inputs = {a};
    e.ids = {r, c};
    e.value = Tensor({1, 1}, {A.at(r, c)});
    return push(std::move(e));
}

Graph::Node Graph::reshape(Node a, std::vector<int> new_shape) {
    check_node(a);
    const Tensor& A = val(a);
    if (shape_numel(new_shape) != A.numel()) {
        throw DimensionError("reshape: cannot view " + shape_str(A.shape) + " as " +
                             shape_str(new_shape));
    }
    Entry e;
    e.op = Op::Reshape;
    e.inputs = {a};
    e.value = Tensor(std::move(new_shape), A.data);
    return push(std::move(e));
}

Graph::Node Graph::transpose(Node a) {
    check_node(a);
    const Tensor& A = val(a);
    require_rank2(A, "transpose");
    const int m = A.rows(), n = A.cols();
    Tensor out = Tensor::zeros({n, m});
    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < n; ++j) out.at(j, i) = A.at(i, j);
    }
    Entry e;
    e.op = Op::Transpose;
    e.inputs = {a};
    e.value = std::move(out);
    return push(std::move(e));
}

Graph::Node Graph::normalize_rows(Node a, double eps) {
    check_node(a);
    const Tensor& A = val(a);
    require_rank2(A, "normalize_rows");
    if (eps <= 0.0) throw ContractError("normalize_rows: eps must be positive");
    const int m = A.rows(), n = A.cols();
    Tensor out = Tensor::zeros({m, n});
    Entry e;
    e.aux.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        double ss = 0.0;
        for (int j = 0; j < n; ++j) ss += A.at(i, j) * A.at(i, j);
        double norm = std::sqrt(ss);
        double denom = std::max(norm, eps);
        e.aux[static_cast<std::size_t>(i)] = norm >= eps ? denom : -denom;
        for (int j = 0; j < n; ++j) out.at(i, j) = A.at(i, j) / denom;
    }
    e.op = Op::NormalizeRows;
    e.inputs = {a};
    e.attr = eps;
    e.value = std::move(out);
    return push(std::move(e));
}

void Graph::backward(Node loss) {
    check_node(loss);
    if (backward_done_) {
        throw ContractError("backward: already called on this graph; build a new graph");
    }
    const Tensor& L = val(loss);
    if (L.numel() != 1) {
        throw ContractError("backward: loss must be scalar, got shape " + shape_str(L.shape));
    }
    backward_done_ = true;

    for (Entry& e : nodes_) e.grad.assign(e.value.numel(), 0.0);
    nodes_[static_cast<std::size_t>(loss)].grad[0] = 1.0;

    for (int ni = static_cast<int>(nodes_.size()) - 1; ni >= 0; --ni) {
        Entry& e = nodes_[static_cast<std::size_t>(ni)];
        const std::vector<double>& g = e.grad;
        switch (e.op) {
        case Op::Constant:
            break;
        case Op::Param: {
            std::vector<double>& pg = e.bound->value.grad;
            for (std::size_t i = 0; i < g.size(); ++i) pg[i] += g[i];
            break;
        }
        case Op::MatMul: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            Entry& eb = nodes_[static_cast<std::size_t>(e.inputs[1])];
            const int m = ea.value.rows(), k = ea.value.cols(), n = eb.value.cols();
            // dA += dC * B^T
            for (int i = 0; i < m; ++i) {
                for (int kk = 0; kk < k; ++kk) {
                    double s = 0.0;
                    const double* grow = &g[static_cast<std::size_t>(i) * n];
                    const double* brow = &eb.value.data[static_cast<std::size_t>(kk) * n];
                    for (int j = 0; j < n; ++j) s += grow[j] * brow[j];
                    ea.grad[static_cast<std::size_t>(i) * k + kk] += s;
                }
            }
            // dB += A^T * dC
            for (int kk = 0; kk < k; ++kk) {
                for (int i = 0; i < m; ++i) {
                    const double av = ea.value.data[static_cast<std::size_t>(i) * k + kk];
                    if (av == 0.0) continue;
                    const double* grow = &g[static_cast<std::size_t>(i) * n];
                    double* brow = &eb.grad[static_cast<std::size_t>(kk) * n];
                    for (int j = 0; j < n; ++j) brow[j] += av * grow[j];
                }
            }
            break;
        }
        case Op::Add: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            Entry& eb = nodes_[static_cast<std::size_t>(e.inputs[1])];
            for (std::size_t i = 0; i < g.size(); ++i) {
                ea.grad[i] += g[i];
                eb.grad[i] += g[i];
            }
            break;
        }
        case Op::Sub: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            Entry& eb = nodes_[static_cast<std::size_t>(e.inputs[1])];
            for (std::size_t i = 0; i < g.size(); ++i) {
                ea.grad[i] += g[i];
                eb.grad[i] -= g[i];
            }
            break;
        }
        case Op::Mul: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            Entry& eb = nodes_[static_cast<std::size_t>(e.inputs[1])];
            for (std::size_t i = 0; i < g.size(); ++i) {
                ea.grad[i] += g[i] * eb.value.data[i];
                eb.grad[i] += g[i] * ea.value.data[i];
            }
            break;
        }
        case Op::Scale: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            for (std::size_t i = 0; i < g.size(); ++i) ea.grad[i] += g[i] * e.attr;
            break;
        }
        case Op::Tanh: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double y = e.value.data[i];
                ea.grad[i] += g[i] * (1.0 - y * y);
            }
            break;
        }
        case Op::Sigmoid: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            for (std::size_t i = 0; i < g.size(); ++i) {
                const double y = e.value.data[i];
                ea.grad[i] += g[i] * y * (1.0 - y);
            }
            break;
        }
        case Op::Relu: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (ea.value.data[i] > 0.0) ea.grad[i] += g[i];
            }
            break;
        }
        case Op::SoftmaxRows: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            const int m = e.value.rows(), n = e.value.cols();
            for (int i = 0; i < m; ++i) {
                const double* yrow = &e.value.data[static_cast<std::size_t>(i) * n];
                const double* grow = &g[static_cast<std::size_t>(i) * n];
                double dot = 0.0;
                for (int j = 0; j < n; ++j) dot += grow[j] * yrow[j];
                double* arow = &ea.grad[static_cast<std::size_t>(i) * n];
                for (int j = 0; j < n; ++j) arow[j] += yrow[j] * (grow[j] - dot);
            }
            break;
        }
        case Op::LogSoftmaxRows: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            const int m = e.value.rows(), n = e.value.cols();
            for (int i = 0; i < m; ++i) {
                const double* yrow = &e.value.data[static_cast<std::size_t>(i) * n];
                const double* grow = &g[static_cast<std::size_t>(i) * n];
                double gsum = 0.0;
                for (int j = 0; j < n; ++j) gsum += grow[j];
                double* arow = &ea.grad[static_cast<std::size_t>(i) * n];
                for (int j = 0; j < n; ++j) arow[j] += grow[j] - std::exp(yrow[j]) * gsum;
            }
            break;
        }
        case Op::LayerNorm: {
            Entry& ex = nodes_[static_cast<std::size_t>(e.inputs[0])];
            Entry& eg = nodes_[static_cast<std::size_t>(e.inputs[1])];
            Entry& eb = nodes_[static_cast<std::size_t>(e.inputs[2])];
            const int m = e.value.rows(), n = e.value.cols();
            for (int i = 0; i < m; ++i) {
                const double mean = e.aux[static_cast<std::size_t>(i) * 2];
                const double signed_denom = e.aux[static_cast<std::size_t>(i) * 2 + 1];
                const bool clamped = signed_denom < 0.0;
                const double denom = std::abs(signed_denom);
                const double* grow = &g[static_cast<std::size_t>(i) * n];
                const double* xrow = &ex.value.data[static_cast<std::size_t>(i) * n];
                double* dxrow = &ex.grad[static_cast<std::size_t>(i) * n];
                // dxhat, and the two row means needed for the chain rule
                double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double xhat = (xrow[j] - mean) / denom;
                    const double dxhat = grow[j] * eg.value.data[static_cast<std::size_t>(j)];
                    eg.grad[static_cast<std::size_t>(j)] += grow[j] * xhat;
                    eb.grad[static_cast<std::size_t>(j)] += grow[j];
                    mean_dxhat += dxhat;
                    mean_dxhat_xhat += dxhat * xhat;
                }
                mean_dxhat /= n;
                mean_dxhat_xhat /= n;
                for (int j = 0; j < n; ++j) {
                    const double xhat = (xrow[j] - mean) / denom;
                    const double dxhat = grow[j] * eg.value.data[static_cast<std::size_t>(j)];
                    double dx = dxhat - mean_dxhat;
                    if (!clamped) dx -= xhat * mean_dxhat_xhat;
                    dxrow[j] += dx / denom;
                }
            }
            break;
        }
        case Op::ConcatRows: {
            std::size_t off = 0;
            for (Node p : e.inputs) {
                Entry& ep = nodes_[static_cast<std::size_t>(p)];
                for (std::size_t i = 0; i < ep.value.numel(); ++i) ep.grad[i] += g[off + i];
                off += ep.value.numel();
            }
            break;
        }
        case Op::ConcatCols: {
            const int m = e.value.rows(), n = e.value.cols();
            int col = 0;
            for (Node p : e.inputs) {
                Entry& ep = nodes_[static_cast<std::size_t>(p)];
                const int pc = ep.value.cols();
                for (int i = 0; i < m; ++i) {
                    for (int j = 0; j < pc; ++j) {
                        ep.grad[static_cast<std::size_t>(i) * pc + j] +=
                            g[static_cast<std::size_t>(i) * n + col + j];
                    }
                }
                col += pc;
            }
            break;
        }
        case Op::EmbedRows: {
            Entry& et = nodes_[static_cast<std::size_t>(e.inputs[0])];
            const int d = et.value.cols();
            for (std::size_t i = 0; i < e.ids.size(); ++i) {
                double* trow = &et.grad[static_cast<std::size_t>(e.ids[i]) * d];
                const double* grow = &g[i * static_cast<std::size_t>(d)];
                for (int j = 0; j < d; ++j) trow[j] += grow[j];
            }
            break;
        }
        case Op::MeanAll: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            const double gv = g[0] / static_cast<double>(ea.value.numel());
            for (std::size_t i = 0; i < ea.value.numel(); ++i) ea.grad[i] += gv;
            break;
        }
        case Op::SumSquares: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            for (std::size_t i = 0; i < ea.value.numel(); ++i) {
                ea.grad[i] += 2.0 * ea.value.data[i] * g[0];
            }
            break;
        }
        case Op::Pick: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            const int n = ea.value.cols();
            ea.grad[static_cast<std::size_t>(e.ids[0]) * n + e.ids[1]] += g[0];
            break;
        }
        case Op::Reshape: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            for (std::size_t i = 0; i < g.size(); ++i) ea.grad[i] += g[i];
            break;
        }
        case Op::Transpose: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            const int m = ea.value.rows(), n = ea.value.cols();
            for (int i = 0; i < m; ++i) {
                for (int j = 0; j < n; ++j) {
                    ea.grad[static_cast<std::size_t>(i) * n + j] +=
                        g[static_cast<std::size_t>(j) * m + i];
                }
            }
            break;
        }
        case Op::NormalizeRows: {
            Entry& ea = nodes_[static_cast<std::size_t>(e.inputs[0])];
            const int m = e.value.rows(), n = e.value.cols();
            for (int i = 0; i < m; ++i) {
                const double signed_denom = e.aux[static_cast<std::size_t>(i)];
                const bool clamped = signed_denom < 0.0;
                const double denom = std::abs(signed_denom);
                const double* yrow = &e.value.data[static_cast<std::size_t>(i) * n];
                const double* grow = &g[static_cast<std::size_t>(i) * n];
                double* arow = &ea.grad[static_cast<std::size_t>(i) * n];
                if (clamped) {
                    for (int j = 0; j < n; ++j) arow[j] += grow[j] / denom;
                } else {
                    double dot = 0.0;
                    for (int j = 0; j < n; ++j) dot += grow[j] * yrow[j];
                    for (int j = 0; j < n; ++j) arow[j] += (grow[j] - yrow[j] * dot) / denom;
                }
            }
            break;
        }
        }
    }
}

} // namespace r2m
