#ifndef SGCN_SGCN_MODEL_HPP
#define SGCN_SGCN_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "error.hpp"
#include "random.hpp"
#include "signed_graph.hpp"

namespace sgcn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class Variant { standard, plus };
enum class Activation { tanh, sigmoid };

inline std::string_view to_string(Variant v) noexcept { return v == Variant::standard ? "standard" : "plus"; }
inline std::string_view to_string(Activation a) noexcept { return a == Activation::tanh ? "tanh" : "sigmoid"; }

inline Variant parse_variant(std::string_view s) {
    if (s == "standard") return Variant::standard;
    if (s == "plus") return Variant::plus;
    throw ArgumentError("unknown variant '" + std::string(s) + "'");
}

inline Activation parse_activation(std::string_view s) {
    if (s == "tanh") return Activation::tanh;
    if (s == "sigmoid") return Activation::sigmoid;
    throw ArgumentError("unknown activation '" + std::string(s) + "'");
}

struct SgcnConfig {
    Index d_in = 64;
    Index d_hidden = 32;
    int layers = 2;
    Variant variant = Variant::standard;
    Activation activation = Activation::tanh;

    Index embedding_width() const noexcept { return 2 * d_hidden; }

    /// Width of the concatenated aggregation input at layer l (1-based).
    Index input_width(int l) const noexcept { return l == 1 ? 2 * d_in : 3 * d_hidden; }

    void validate() const {
        if (d_in < 1) throw ArgumentError("d_in must be >= 1");
        if (d_hidden < 1) throw ArgumentError("d_hidden must be >= 1");
        if (layers < 1) throw ArgumentError("layers must be >= 1");
        if (variant == Variant::plus && layers != 2) throw ArgumentError("the plus variant requires exactly 2 layers");
    }
};

/// Per-layer weights of the balanced and unbalanced tracks; index l-1 holds
/// layer l. Layer 1 maps 2*d_in -> d_hidden, deeper layers 3*d_hidden -> d_hidden.
struct SgcnParams {
    std::vector<Matrix> w_balanced;
    std::vector<Matrix> w_unbalanced;
    std::uint64_t rng_seed = 0;

    int layers() const noexcept { return static_cast<int>(w_balanced.size()); }
};

/// Hidden representations per layer (index l-1), each n x d_hidden.
struct HiddenState {
    std::vector<Matrix> balanced;
    std::vector<Matrix> unbalanced;
};

/// Uniform Glorot-range init: every entry iid U[-s, s], s = sqrt(6 / (fan_in + fan_out)).
inline SgcnParams init_params(const SgcnConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    SgcnParams params;
    params.rng_seed = seed;
    auto rng = make_rng(seed, streams::init);
    for (int l = 1; l <= cfg.layers; ++l) {
        const Index fan_in = cfg.input_width(l);
        const double s = std::sqrt(6.0 / static_cast<double>(fan_in + cfg.d_hidden));
        std::uniform_real_distribution<double> dist(-s, s);
        for (auto* track : {&params.w_balanced, &params.w_unbalanced}) {
            Matrix w(cfg.d_hidden, fan_in);
            for (Index c = 0; c < w.cols(); ++c)
                for (Index r = 0; r < w.rows(); ++r) w(r, c) = dist(rng);
            track->push_back(std::move(w));
        }
    }
    return params;
}

inline void check_params(const SgcnConfig& cfg, const SgcnParams& params) {
    cfg.validate();
    if (params.layers() != cfg.layers || params.w_unbalanced.size() != params.w_balanced.size())
        throw ShapeError("parameter layer count does not match config");
    for (int l = 1; l <= cfg.layers; ++l) {
        for (const auto* w : {&params.w_balanced[l - 1], &params.w_unbalanced[l - 1]}) {
            if (w->rows() != cfg.d_hidden || w->cols() != cfg.input_width(l))
                throw ShapeError("layer " + std::to_string(l) + " weight is " + std::to_string(w->rows()) + "x" +
                                 std::to_string(w->cols()) + ", expected " + std::to_string(cfg.d_hidden) + "x" +
                                 std::to_string(cfg.input_width(l)));
        }
    }
}

/// Row-normalised neighbour-mean operators. Row i of `positive()` averages
/// over N+_i; a node with no such neighbours has an empty row, so its mean is
/// the zero vector.
class MeanAggregator {
public:
    explicit MeanAggregator(const SignedGraph& g)
        : n_(static_cast<Index>(g.num_nodes())), pos_(build(g, Sign::positive)), neg_(build(g, Sign::negative)) {}

    Index num_nodes() const noexcept { return n_; }
    const SparseMatrix& positive() const noexcept { return pos_; }
    const SparseMatrix& negative() const noexcept { return neg_; }

private:
    static SparseMatrix build(const SignedGraph& g, Sign sign) {
        const auto n = static_cast<Index>(g.num_nodes());
        std::vector<Eigen::Triplet<double>> entries;
        for (Index i = 0; i < n; ++i) {
            const auto nbrs = sign == Sign::positive ? g.positive_neighbors(static_cast<NodeId>(i))
                                                     : g.negative_neighbors(static_cast<NodeId>(i));
            const double w = nbrs.empty() ? 0.0 : 1.0 / static_cast<double>(nbrs.size());
            for (NodeId j : nbrs) entries.emplace_back(i, j, w);
        }
        SparseMatrix m(n, n);
        m.setFromTriplets(entries.begin(), entries.end());
        return m;
    }

    Index n_;
    SparseMatrix pos_;
    SparseMatrix neg_;
};

namespace detail {

inline void activate(Matrix& m, Activation a) {
    if (a == Activation::tanh)
        m = m.array().tanh().matrix();
    else
        m = (1.0 / (1.0 + (-m.array()).exp())).matrix();
}

/// d act / d pre, expressed through the activation output.
inline Matrix activation_slope(const Matrix& out, Activation a) {
    if (a == Activation::tanh) return (1.0 - out.array().square()).matrix();
    return (out.array() * (1.0 - out.array())).matrix();
}

/// Concatenated inputs [slot0, slot1, self] for both tracks at a layer > 1.
/// `cross` = false zeroes the cross-sign slot (plus variant).
inline std::pair<Matrix, Matrix> deep_inputs(const MeanAggregator& agg, const Matrix& prev_b, const Matrix& prev_u,
                                             bool cross) {
    const Index n = prev_b.rows();
    const Index d = prev_b.cols();
    Matrix in_b(n, 3 * d), in_u(n, 3 * d);
    in_b.leftCols(d) = agg.positive() * prev_b;
    if (cross) {
        in_b.middleCols(d, d) = agg.negative() * prev_u;
        in_u.leftCols(d) = agg.positive() * prev_u;
        in_u.middleCols(d, d) = agg.negative() * prev_b;
    } else {
        in_b.middleCols(d, d).setZero();
        in_u.leftCols(d).setZero();
        in_u.middleCols(d, d) = agg.negative() * prev_u;
    }
    in_b.rightCols(d) = prev_b;
    in_u.rightCols(d) = prev_u;
    return {std::move(in_b), std::move(in_u)};
}

inline std::pair<Matrix, Matrix> first_inputs(const MeanAggregator& agg, const Matrix& x) {
    const Index n = x.rows();
    const Index d = x.cols();
    Matrix in_b(n, 2 * d), in_u(n, 2 * d);
    in_b.leftCols(d) = agg.positive() * x;
    in_b.rightCols(d) = x;
    in_u.leftCols(d) = agg.negative() * x;
    in_u.rightCols(d) = x;
    return {std::move(in_b), std::move(in_u)};
}

inline Matrix apply_layer(const Matrix& input, const Matrix& weight, Activation a) {
    Matrix out = input * weight.transpose();
    activate(out, a);
    return out;
}

} // namespace detail

/// First aggregation layer:
///   h_B = σ(W_B [mean_{N+} x, x]),  h_U = σ(W_U [mean_{N-} x, x]).
inline std::pair<Matrix, Matrix> forward_layer1(const MeanAggregator& agg, const Matrix& x, const SgcnParams& params,
                                                const SgcnConfig& cfg) {
    check_params(cfg, params);
    if (x.rows() != agg.num_nodes() || x.cols() != cfg.d_in)
        throw ShapeError("feature matrix is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                         ", expected " + std::to_string(agg.num_nodes()) + "x" + std::to_string(cfg.d_in));
    const auto [in_b, in_u] = detail::first_inputs(agg, x);
    return {detail::apply_layer(in_b, params.w_balanced[0], cfg.activation),
            detail::apply_layer(in_u, params.w_unbalanced[0], cfg.activation)};
}

/// Balance-theory layer l >= 2. The balanced track reads friends' balanced
/// state and enemies' unbalanced state; the unbalanced track the reverse.
inline std::pair<Matrix, Matrix> forward_layer(const MeanAggregator& agg, const HiddenState& state,
                                               const SgcnParams& params, int l, const SgcnConfig& cfg) {
    check_params(cfg, params);
    if (l < 2 || l > cfg.layers) throw ArgumentError("forward_layer needs 2 <= l <= layers");
    if (static_cast<int>(state.balanced.size()) < l - 1) throw ArgumentError("hidden state lacks layer l-1");
    const Matrix& prev_b = state.balanced[l - 2];
    const Matrix& prev_u = state.unbalanced[l - 2];
    if (prev_b.rows() != agg.num_nodes() || prev_b.cols() != cfg.d_hidden || prev_u.rows() != prev_b.rows() ||
        prev_u.cols() != prev_b.cols())
        throw ShapeError("hidden state shape mismatch at layer " + std::to_string(l - 1));
    const auto [in_b, in_u] = detail::deep_inputs(agg, prev_b, prev_u, true);
    return {detail::apply_layer(in_b, params.w_balanced[l - 1], cfg.activation),
            detail::apply_layer(in_u, params.w_unbalanced[l - 1], cfg.activation)};
}

/// Second layer of the plus variant: the layer-1 aggregation repeated along
/// positive links for the balanced track and negative links for the
/// unbalanced track, with the cross-sign slot held at zero.
inline std::pair<Matrix, Matrix> forward_layer_plus(const MeanAggregator& agg, const HiddenState& state,
                                                    const SgcnParams& params, const SgcnConfig& cfg) {
    if (cfg.variant != Variant::plus) throw UsageError("forward_layer_plus called with the standard variant");
    check_params(cfg, params);
    if (state.balanced.empty()) throw ArgumentError("hidden state lacks layer 1");
    const Matrix& prev_b = state.balanced[0];
    const Matrix& prev_u = state.unbalanced[0];
    if (prev_b.rows() != agg.num_nodes() || prev_b.cols() != cfg.d_hidden)
        throw ShapeError("hidden state shape mismatch at layer 1");
    const auto [in_b, in_u] = detail::deep_inputs(agg, prev_b, prev_u, false);
    return {detail::apply_layer(in_b, params.w_balanced[1], cfg.activation),
            detail::apply_layer(in_u, params.w_unbalanced[1], cfg.activation)};
}

/// Runs every layer and keeps all hidden states.
inline HiddenState forward_all(const MeanAggregator& agg, const Matrix& x, const SgcnParams& params,
                               const SgcnConfig& cfg) {
    HiddenState state;
    auto [b1, u1] = forward_layer1(agg, x, params, cfg);
    state.balanced.push_back(std::move(b1));
    state.unbalanced.push_back(std::move(u1));
    for (int l = 2; l <= cfg.layers; ++l) {
        auto [b, u] = cfg.variant == Variant::plus ? forward_layer_plus(agg, state, params, cfg)
                                                   : forward_layer(agg, state, params, l, cfg);
        state.balanced.push_back(std::move(b));
        state.unbalanced.push_back(std::move(u));
    }
    return state;
}

/// Z = [h_B(L), h_U(L)] row-wise, n x 2*d_hidden.
inline Matrix concat_tracks(const HiddenState& state) {
    const Matrix& b = state.balanced.back();
    const Matrix& u = state.unbalanced.back();
    Matrix z(b.rows(), b.cols() + u.cols());
    z << b, u;
    return z;
}

inline Matrix embed_all(const MeanAggregator& agg, const Matrix& x, const SgcnParams& params, const SgcnConfig& cfg) {
    return concat_tracks(forward_all(agg, x, params, cfg));
}

inline Matrix embed_all(const SignedGraph& g, const Matrix& x, const SgcnParams& params, const SgcnConfig& cfg) {
    return embed_all(MeanAggregator(g), x, params, cfg);
}

/// Reverse pass: given dLoss/dZ, returns dLoss/dW for every layer of both
/// tracks (same layout as SgcnParams). X is treated as a constant.
inline std::pair<std::vector<Matrix>, std::vector<Matrix>> backprop_embedding(const MeanAggregator& agg,
                                                                              const Matrix& x,
                                                                              const HiddenState& state,
                                                                              const SgcnParams& params,
                                                                              const SgcnConfig& cfg,
                                                                              const Matrix& grad_z) {
    const Index d = cfg.d_hidden;
    if (grad_z.rows() != agg.num_nodes() || grad_z.cols() != 2 * d) throw ShapeError("dZ has the wrong shape");

    std::vector<Matrix> grad_wb(cfg.layers), grad_wu(cfg.layers);
    Matrix grad_b = grad_z.leftCols(d);
    Matrix grad_u = grad_z.rightCols(d);
    const bool cross = cfg.variant == Variant::standard;

    for (int l = cfg.layers; l >= 1; --l) {
        const Matrix pre_b = grad_b.cwiseProduct(detail::activation_slope(state.balanced[l - 1], cfg.activation));
        const Matrix pre_u = grad_u.cwiseProduct(detail::activation_slope(state.unbalanced[l - 1], cfg.activation));
        const auto [in_b, in_u] = l == 1 ? detail::first_inputs(agg, x)
                                         : detail::deep_inputs(agg, state.balanced[l - 2], state.unbalanced[l - 2], cross);
        grad_wb[l - 1] = pre_b.transpose() * in_b;
        grad_wu[l - 1] = pre_u.transpose() * in_u;
        if (l == 1) break;

        const Matrix g_in_b = pre_b * params.w_balanced[l - 1];
        const Matrix g_in_u = pre_u * params.w_unbalanced[l - 1];
        // slots: [mean over N+, mean over N-, self]
        Matrix next_b = g_in_b.rightCols(d);
        Matrix next_u = g_in_u.rightCols(d);
        next_b.noalias() += agg.positive().transpose() * g_in_b.leftCols(d);
        if (cross) {
            next_u.noalias() += agg.negative().transpose() * g_in_b.middleCols(d, d);
            next_u.noalias() += agg.positive().transpose() * g_in_u.leftCols(d);
            next_b.noalias() += agg.negative().transpose() * g_in_u.middleCols(d, d);
        } else {
            next_u.noalias() += agg.negative().transpose() * g_in_u.middleCols(d, d);
        }
        grad_b = std::move(next_b);
        grad_u = std::move(next_u);
    }
    return {std::move(grad_wb), std::move(grad_wu)};
}

} // namespace sgcn

#endif // SGCN_SGCN_MODEL_HPP
