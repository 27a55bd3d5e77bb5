#ifndef SGCN_TRAINING_HPP
#define SGCN_TRAINING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "random.hpp"
#include "sgcn_model.hpp"
#include "signed_graph.hpp"

namespace sgcn {

/// Pair label for the multinomial classifier: positive link, negative link, no link.
enum class LinkClass : int { positive = 0, negative = 1, none = 2 };

inline constexpr int kNumLinkClasses = 3;

/// Softmax classifier over concatenated pair embeddings [z_i, z_j].
/// `theta` is 3 x (2 * embedding width), one row per class.
struct MlgParams {
    Matrix theta;
    Eigen::Vector3d bias = Eigen::Vector3d::Zero();
    bool use_bias = true;
};

inline MlgParams init_mlg(Index embedding_width, bool use_bias = true) {
    MlgParams mlg;
    mlg.theta = Matrix::Zero(kNumLinkClasses, 2 * embedding_width);
    mlg.use_bias = use_bias;
    return mlg;
}

struct LabeledPair {
    NodeId i = 0;
    NodeId j = 0;
    LinkClass label = LinkClass::none;
};

/// (anchor, linked neighbour, node with no link to the anchor).
struct Triplet {
    NodeId anchor = 0;
    NodeId linked = 0;
    NodeId unlinked = 0;
};

struct TrainBatch {
    std::vector<LabeledPair> pairs;            // M
    std::vector<Triplet> positive_triplets;    // M(+,?)
    std::vector<Triplet> negative_triplets;    // M(-,?)
    std::array<double, kNumLinkClasses> class_weights{1.0, 1.0, 1.0};
};

struct TrainConfig {
    double lambda = 5.0;
    double reg_coeff = 1e-4;
    double learning_rate = 0.05;
    int batch_nodes = 500;
    int pairs_per_class = 5;
    int epochs = 100;
    std::uint64_t seed = 0;
    bool mlg_bias = true;

    void validate() const {
        if (!(lambda >= 0.0)) throw ArgumentError("lambda must be >= 0");
        if (!(reg_coeff >= 0.0)) throw ArgumentError("reg_coeff must be >= 0");
        if (!(learning_rate >= 0.0)) throw ArgumentError("learning_rate must be >= 0");
        if (batch_nodes < 1) throw ArgumentError("batch_nodes must be >= 1");
        if (pairs_per_class < 1) throw ArgumentError("pairs_per_class must be >= 1");
        if (epochs < 0) throw ArgumentError("epochs must be >= 0");
    }
};

namespace detail {

inline constexpr int kRejectionTries = 64;

/// A node with no edge to `anchor`. Rejection sampling first; when that
/// keeps hitting neighbours, draw uniformly from the explicit complement.
inline NodeId sample_unlinked(const SignedGraph& g, NodeId anchor, Rng& rng) {
    const std::size_t n = g.num_nodes();
    for (int t = 0; t < kRejectionTries; ++t) {
        const auto k = static_cast<NodeId>(uniform_index(rng, n));
        if (k != anchor && !g.has_edge(anchor, k)) return k;
    }
    std::vector<NodeId> candidates;
    for (std::size_t k = 0; k < n; ++k) {
        const auto id = static_cast<NodeId>(k);
        if (id != anchor && !g.has_edge(anchor, id)) candidates.push_back(id);
    }
    if (candidates.empty())
        throw SamplingError("node " + std::to_string(anchor) + " is linked to every other node; no no-link partner exists");
    return candidates[uniform_index(rng, candidates.size())];
}

/// Up to `count` distinct elements of `pool`, in random order.
inline std::vector<NodeId> sample_without_replacement(std::span<const NodeId> pool, std::size_t count, Rng& rng) {
    std::vector<NodeId> v(pool.begin(), pool.end());
    const std::size_t take = std::min(count, v.size());
    for (std::size_t i = 0; i < take; ++i) std::swap(v[i], v[i + uniform_index(rng, v.size() - i)]);
    v.resize(take);
    return v;
}

} // namespace detail

/// Draws the pair and triplet sets for one epoch.
///
/// `batch_nodes` anchors are chosen uniformly without replacement. Each anchor
/// contributes up to `pairs_per_class` positive and negative neighbours (each
/// paired with a fresh no-link node for the margin terms) and
/// `pairs_per_class` no-link pairs. Class weights are
/// |M| / (3 * count_s), so rarer classes weigh more. Deterministic in
/// (seed, epoch).
inline TrainBatch sample_batch(const SignedGraph& train, const TrainConfig& cfg, int epoch) {
    cfg.validate();
    const std::size_t n = train.num_nodes();
    if (n < 2) throw SamplingError("training graph needs at least two nodes");

    auto rng = make_rng(cfg.seed, streams::batch, static_cast<std::uint64_t>(epoch));
    std::vector<NodeId> anchors(n);
    for (std::size_t i = 0; i < n; ++i) anchors[i] = static_cast<NodeId>(i);
    const std::size_t n_anchors = std::min(n, static_cast<std::size_t>(cfg.batch_nodes));
    for (std::size_t i = 0; i < n_anchors; ++i) std::swap(anchors[i], anchors[i + uniform_index(rng, n - i)]);
    anchors.resize(n_anchors);

    const auto per_class = static_cast<std::size_t>(cfg.pairs_per_class);
    TrainBatch batch;
    std::array<std::size_t, kNumLinkClasses> counts{0, 0, 0};
    for (NodeId i : anchors) {
        for (NodeId j : detail::sample_without_replacement(train.positive_neighbors(i), per_class, rng)) {
            batch.pairs.push_back({i, j, LinkClass::positive});
            batch.positive_triplets.push_back({i, j, detail::sample_unlinked(train, i, rng)});
            ++counts[0];
        }
        for (NodeId j : detail::sample_without_replacement(train.negative_neighbors(i), per_class, rng)) {
            batch.pairs.push_back({i, j, LinkClass::negative});
            batch.negative_triplets.push_back({i, j, detail::sample_unlinked(train, i, rng)});
            ++counts[1];
        }
        for (std::size_t t = 0; t < per_class; ++t) {
            batch.pairs.push_back({i, detail::sample_unlinked(train, i, rng), LinkClass::none});
            ++counts[2];
        }
    }
    const auto total = static_cast<double>(batch.pairs.size());
    for (int s = 0; s < kNumLinkClasses; ++s)
        batch.class_weights[s] = counts[s] > 0 ? total / (3.0 * static_cast<double>(counts[s])) : 1.0;
    return batch;
}

/// Objective split into its terms; `margin` is the un-weighted sum of the two
/// hinge averages, so total = mlg + lambda * margin + reg.
struct LossBreakdown {
    double mlg = 0.0;
    double margin = 0.0;
    double reg = 0.0;
    double total = 0.0;
};

struct Gradients {
    std::vector<Matrix> w_balanced;
    std::vector<Matrix> w_unbalanced;
    Matrix theta;
    Eigen::Vector3d bias = Eigen::Vector3d::Zero();
};

namespace detail {

inline void check_loss_inputs(const Matrix& z, const MlgParams& mlg, const TrainBatch& batch) {
    if (batch.pairs.empty()) throw ArgumentError("loss needs a non-empty pair set");
    if (mlg.theta.rows() != kNumLinkClasses || mlg.theta.cols() != 2 * z.cols())
        throw ShapeError("classifier width " + std::to_string(mlg.theta.cols()) + " does not match 2 x embedding width " +
                         std::to_string(2 * z.cols()));
    const auto n = z.rows();
    auto in_range = [n](NodeId v) { return v >= 0 && v < n; };
    for (const auto& p : batch.pairs)
        if (!in_range(p.i) || !in_range(p.j)) throw ArgumentError("batch pair references an unknown node");
    for (const auto* set : {&batch.positive_triplets, &batch.negative_triplets})
        for (const auto& t : *set)
            if (!in_range(t.anchor) || !in_range(t.linked) || !in_range(t.unlinked))
                throw ArgumentError("batch triplet references an unknown node");
}

/// Loss terms and, when `grad_z` / `grads` are non-null, their gradients with
/// respect to Z and the classifier (plus the regulariser on everything).
inline LossBreakdown evaluate(const Matrix& z, const MlgParams& mlg, const TrainBatch& batch, const SgcnParams& params,
                              const TrainConfig& cfg, Matrix* grad_z, Gradients* grads) {
    check_loss_inputs(z, mlg, batch);
    const Index w = z.cols();
    LossBreakdown out;

    if (grad_z) *grad_z = Matrix::Zero(z.rows(), w);
    if (grads) {
        grads->theta = Matrix::Zero(mlg.theta.rows(), mlg.theta.cols());
        grads->bias.setZero();
    }

    // weighted multinomial logistic term
    const double inv_m = 1.0 / static_cast<double>(batch.pairs.size());
    Vector features(2 * w);
    for (const auto& p : batch.pairs) {
        features.head(w) = z.row(p.i).transpose();
        features.tail(w) = z.row(p.j).transpose();
        Eigen::Vector3d logits = mlg.theta * features;
        if (mlg.use_bias) logits += mlg.bias;
        const double top = logits.maxCoeff();
        const Eigen::Vector3d shifted = (logits.array() - top).matrix();
        const double log_norm = std::log(shifted.array().exp().sum());
        const int s = static_cast<int>(p.label);
        const double omega = batch.class_weights[s];
        out.mlg -= inv_m * omega * (shifted(s) - log_norm);

        if (grad_z || grads) {
            Eigen::Vector3d dlogits = (shifted.array() - log_norm).exp().matrix();
            dlogits(s) -= 1.0;
            dlogits *= inv_m * omega;
            if (grads) {
                grads->theta.noalias() += dlogits * features.transpose();
                if (mlg.use_bias) grads->bias += dlogits;
            }
            if (grad_z) {
                const Vector dfeat = mlg.theta.transpose() * dlogits;
                grad_z->row(p.i) += dfeat.head(w).transpose();
                grad_z->row(p.j) += dfeat.tail(w).transpose();
            }
        }
    }

    // extended structural balance margins: d(i,j) < d(i,k) for positive links,
    // d(i,k) < d(i,j) for negative links
    const double lambda = cfg.lambda;
    auto hinge_term = [&](const std::vector<Triplet>& set, bool linked_closer) {
        if (set.empty()) return 0.0;
        const double inv = 1.0 / static_cast<double>(set.size());
        double sum = 0.0;
        for (const auto& t : set) {
            const auto d_ij = (z.row(t.anchor) - z.row(t.linked)).eval();
            const auto d_ik = (z.row(t.anchor) - z.row(t.unlinked)).eval();
            const double gap = linked_closer ? d_ij.squaredNorm() - d_ik.squaredNorm()
                                             : d_ik.squaredNorm() - d_ij.squaredNorm();
            if (gap <= 0.0) continue;
            sum += gap;
            if (grad_z && lambda != 0.0) {
                const double c = lambda * inv * (linked_closer ? 2.0 : -2.0);
                // gap' = ±(2 d_ij dd_ij - 2 d_ik dd_ik)
                grad_z->row(t.anchor) += c * (d_ij - d_ik);
                grad_z->row(t.linked) -= c * d_ij;
                grad_z->row(t.unlinked) += c * d_ik;
            }
        }
        return inv * sum;
    };
    out.margin = hinge_term(batch.positive_triplets, true) + hinge_term(batch.negative_triplets, false);

    // L2 on all layer weights and the class parameters
    double sq = mlg.theta.squaredNorm();
    for (const auto& m : params.w_balanced) sq += m.squaredNorm();
    for (const auto& m : params.w_unbalanced) sq += m.squaredNorm();
    out.reg = cfg.reg_coeff * sq;
    if (grads) grads->theta += 2.0 * cfg.reg_coeff * mlg.theta;

    out.total = out.mlg + lambda * out.margin + out.reg;
    return out;
}

} // namespace detail

inline LossBreakdown loss_breakdown(const Matrix& z, const MlgParams& mlg, const TrainBatch& batch,
                                    const SgcnParams& params, const TrainConfig& cfg) {
    return detail::evaluate(z, mlg, batch, params, cfg, nullptr, nullptr);
}

/// Full objective: weighted MLG + lambda * margins + reg_coeff * ||params||^2.
inline double loss(const Matrix& z, const MlgParams& mlg, const TrainBatch& batch, const SgcnParams& params,
                   const TrainConfig& cfg) {
    return loss_breakdown(z, mlg, batch, params, cfg).total;
}

/// Loss and exact gradient of loss(embed_all(X), ...) with respect to every
/// layer weight and the classifier. Hinge kinks take subgradient 0.
inline std::pair<LossBreakdown, Gradients> loss_and_gradients(const MeanAggregator& agg, const Matrix& x,
                                                              const SgcnParams& params, const MlgParams& mlg,
                                                              const TrainBatch& batch, const TrainConfig& cfg,
                                                              const SgcnConfig& model_cfg) {
    const HiddenState state = forward_all(agg, x, params, model_cfg);
    const Matrix z = concat_tracks(state);
    Matrix grad_z;
    Gradients grads;
    const LossBreakdown parts = detail::evaluate(z, mlg, batch, params, cfg, &grad_z, &grads);
    auto [gb, gu] = backprop_embedding(agg, x, state, params, model_cfg, grad_z);
    for (int l = 0; l < model_cfg.layers; ++l) {
        gb[l] += 2.0 * cfg.reg_coeff * params.w_balanced[l];
        gu[l] += 2.0 * cfg.reg_coeff * params.w_unbalanced[l];
    }
    grads.w_balanced = std::move(gb);
    grads.w_unbalanced = std::move(gu);
    return {parts, std::move(grads)};
}

inline Gradients gradients(const MeanAggregator& agg, const Matrix& x, const SgcnParams& params, const MlgParams& mlg,
                           const TrainBatch& batch, const TrainConfig& cfg, const SgcnConfig& model_cfg) {
    return loss_and_gradients(agg, x, params, mlg, batch, cfg, model_cfg).second;
}

/// One plain SGD update in place.
inline void sgd_step(SgcnParams& params, MlgParams& mlg, const Gradients& grads, double learning_rate) {
    for (std::size_t l = 0; l < params.w_balanced.size(); ++l) {
        params.w_balanced[l] -= learning_rate * grads.w_balanced[l];
        params.w_unbalanced[l] -= learning_rate * grads.w_unbalanced[l];
    }
    mlg.theta -= learning_rate * grads.theta;
    if (mlg.use_bias) mlg.bias -= learning_rate * grads.bias;
}

struct EpochLoss {
    int epoch = 0;
    LossBreakdown loss;
};

struct FitResult {
    SgcnParams params;
    MlgParams mlg;
    Matrix embedding;
    std::vector<EpochLoss> history;
};

/// Trains from a fresh init: per epoch, sample a batch, evaluate the loss and
/// its gradient at the current parameters, and take one SGD step. History
/// entries hold the pre-step loss of each epoch's batch.
inline FitResult fit(const SignedGraph& train, const Matrix& x, const TrainConfig& cfg, const SgcnConfig& model_cfg,
                     const std::function<void(const EpochLoss&)>& on_epoch = {}) {
    cfg.validate();
    model_cfg.validate();
    if (train.num_nodes() == 0) throw ArgumentError("training graph is empty");
    const MeanAggregator agg(train);

    FitResult result;
    result.params = init_params(model_cfg, cfg.seed);
    result.mlg = init_mlg(model_cfg.embedding_width(), cfg.mlg_bias);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const TrainBatch batch = sample_batch(train, cfg, epoch);
        const auto [parts, grads] = loss_and_gradients(agg, x, result.params, result.mlg, batch, cfg, model_cfg);
        if (!std::isfinite(parts.total)) throw DivergenceError(epoch, "loss is not finite");
        result.history.push_back({epoch, parts});
        if (on_epoch) on_epoch(result.history.back());
        sgd_step(result.params, result.mlg, grads, cfg.learning_rate);
    }
    result.embedding = embed_all(agg, x, result.params, model_cfg);
    if (!result.embedding.allFinite()) throw DivergenceError(cfg.epochs, "embedding is not finite");
    return result;
}

} // namespace sgcn

#endif // SGCN_TRAINING_HPP
