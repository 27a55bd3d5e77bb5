#ifndef SGCN_EVALUATION_HPP
#define SGCN_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "error.hpp"
#include "sgcn_model.hpp"
#include "signed_graph.hpp"
#include "sse.hpp"
#include "training.hpp"

namespace sgcn {

/// Edge-level classification data: row k is [z_u, z_v] for edge k, label 1
/// for a positive edge and 0 for a negative one.
struct PairDataset {
    Matrix features;
    std::vector<int> labels;

    std::size_t size() const noexcept { return labels.size(); }
};

/// One row per edge, oriented (min id, max id).
inline PairDataset build_pairs(const Matrix& z, std::span<const SignedEdge> edges) {
    const Index w = z.cols();
    PairDataset out;
    out.features.resize(static_cast<Index>(edges.size()), 2 * w);
    out.labels.reserve(edges.size());
    for (std::size_t k = 0; k < edges.size(); ++k) {
        const auto& e = edges[k];
        if (e.u < 0 || e.v < 0 || e.u >= z.rows() || e.v >= z.rows())
            throw ArgumentError("edge (" + std::to_string(e.u) + "," + std::to_string(e.v) + ") references an unknown node");
        const NodeId a = std::min(e.u, e.v);
        const NodeId b = std::max(e.u, e.v);
        const auto row = static_cast<Index>(k);
        out.features.row(row).head(w) = z.row(a);
        out.features.row(row).tail(w) = z.row(b);
        out.labels.push_back(e.sign == Sign::positive ? 1 : 0);
    }
    return out;
}

struct LogisticModel {
    Vector weights;
    double intercept = 0.0;
    int iterations = 0;
    double gradient_norm = 0.0;

    Vector predict_proba(const Matrix& features) const {
        if (features.cols() != weights.size()) throw ShapeError("feature width does not match the classifier");
        const Vector margin = (features * weights).array() + intercept;
        return (1.0 / (1.0 + (-margin.array()).exp())).matrix();
    }
};

namespace detail {

inline double log1p_exp(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

} // namespace detail

/// L2-regularised binary logistic regression fitted by damped Newton steps.
///
/// Minimises (1/m) sum_k logloss_k + l2 * ||w||^2 / m (intercept unpenalised)
/// until the gradient 2-norm falls below 1e-6 or `max_iter` steps.
inline LogisticModel fit_logreg(const PairDataset& data, double l2 = 1.0, int max_iter = 500) {
    const auto m = static_cast<Index>(data.size());
    if (m == 0) throw DegenerateDataError("no training rows");
    if (data.features.rows() != m) throw ShapeError("feature rows do not match labels");
    const std::size_t positives = static_cast<std::size_t>(std::count(data.labels.begin(), data.labels.end(), 1));
    if (positives == 0 || positives == data.size()) throw DegenerateDataError("training labels contain a single class");
    if (l2 < 0.0) throw ArgumentError("l2 must be >= 0");

    const Index k = data.features.cols();
    // augmented design [X, 1]
    Matrix design(m, k + 1);
    design.leftCols(k) = data.features;
    design.col(k).setOnes();
    Vector y(m);
    for (Index r = 0; r < m; ++r) y(r) = data.labels[static_cast<std::size_t>(r)] == 1 ? 1.0 : 0.0;

    const double inv_m = 1.0 / static_cast<double>(m);
    Vector penalty = Vector::Constant(k + 1, 2.0 * l2 * inv_m);
    penalty(k) = 0.0;

    auto objective = [&](const Vector& beta) {
        const Vector s = design * beta;
        double sum = 0.0;
        for (Index r = 0; r < m; ++r) sum += detail::log1p_exp(s(r)) - y(r) * s(r);
        return inv_m * sum + 0.5 * beta.dot(penalty.cwiseProduct(beta));
    };

    Vector beta = Vector::Zero(k + 1);
    // start the intercept at the log-odds of the prior
    const double prior = static_cast<double>(positives) * inv_m;
    beta(k) = std::log(prior / (1.0 - prior));
    double current = objective(beta);

    LogisticModel model;
    for (int it = 0; it < max_iter; ++it) {
        const Vector s = design * beta;
        const Vector p = (1.0 / (1.0 + (-s.array()).exp())).matrix();
        const Vector grad = inv_m * (design.transpose() * (p - y)) + penalty.cwiseProduct(beta);
        model.gradient_norm = grad.norm();
        model.iterations = it;
        if (model.gradient_norm < 1e-6) break;

        const Vector curvature = (p.array() * (1.0 - p.array())).matrix();
        Matrix hessian = inv_m * (design.transpose() * curvature.asDiagonal() * design);
        hessian.diagonal() += penalty;
        hessian.diagonal().array() += 1e-10;
        const Vector step = hessian.ldlt().solve(grad);

        double t = 1.0;
        Vector candidate = beta - step;
        double next = objective(candidate);
        while (next > current - 1e-4 * t * grad.dot(step) && t > 1e-10) {
            t *= 0.5;
            candidate = beta - t * step;
            next = objective(candidate);
        }
        if (!(next <= current)) break;
        beta = std::move(candidate);
        current = next;
        model.iterations = it + 1;
    }
    model.weights = beta.head(k);
    model.intercept = beta(k);
    return model;
}

/// Area under the ROC curve as the Mann-Whitney statistic: the probability a
/// random positive outscores a random negative, ties counted one half.
inline double auc(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size()) throw ArgumentError("scores and labels differ in length");
    std::size_t n_pos = 0;
    for (int l : labels) n_pos += l == 1 ? 1 : 0;
    const std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("AUC needs both positive and negative labels");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // rank sum of positives, tied blocks share their mean rank
    double rank_sum = 0.0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double mean_rank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t t = i; t < j; ++t)
            if (labels[order[t]] == 1) rank_sum += mean_rank;
        i = j;
    }
    const double np = static_cast<double>(n_pos);
    return (rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

/// F1 of `positive_class`; 0 when precision + recall = 0.
inline double f1_score(std::span<const int> predictions, std::span<const int> labels, int positive_class = 1) {
    if (predictions.size() != labels.size()) throw ArgumentError("predictions and labels differ in length");
    if (predictions.empty()) throw ArgumentError("F1 needs at least one prediction");
    std::size_t tp = 0, fp = 0, fn = 0;
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const bool pred = predictions[k] == positive_class;
        const bool truth = labels[k] == positive_class;
        tp += pred && truth;
        fp += pred && !truth;
        fn += !pred && truth;
    }
    if (tp == 0) return 0.0;
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return 2.0 * precision * recall / (precision + recall);
}

// ---------------------------------------------------------------------------
// Experiment protocol

enum class Method { sse, sgcn_1, sgcn_1_plus, sgcn_2 };

inline std::string_view to_string(Method m) noexcept {
    switch (m) {
    case Method::sse: return "sse";
    case Method::sgcn_1: return "sgcn-1";
    case Method::sgcn_1_plus: return "sgcn-1+";
    case Method::sgcn_2: return "sgcn-2";
    }
    return "?";
}

inline Method parse_method(std::string_view s) {
    for (Method m : {Method::sse, Method::sgcn_1, Method::sgcn_1_plus, Method::sgcn_2})
        if (s == to_string(m)) return m;
    throw ArgumentError("unknown method '" + std::string(s) + "' (expected sse, sgcn-1, sgcn-1+ or sgcn-2)");
}

/// Layer count and variant implied by a method name; other fields from `base`.
inline SgcnConfig model_config_for(Method m, SgcnConfig base) {
    switch (m) {
    case Method::sgcn_1: base.layers = 1; base.variant = Variant::standard; break;
    case Method::sgcn_1_plus: base.layers = 2; base.variant = Variant::plus; break;
    case Method::sgcn_2: base.layers = 2; base.variant = Variant::standard; break;
    case Method::sse: break;
    }
    return base;
}

struct ExperimentConfig {
    double test_fraction = 0.2;
    Index sse_dim = 64;
    SgcnConfig model;
    TrainConfig train;
    double logreg_l2 = 1.0;
    int logreg_max_iter = 500;
    double threshold = 0.5;
};

struct EvalReport {
    double auc = 0.0;
    double f1 = 0.0;
    double threshold = 0.5;
    std::size_t n_test_pos = 0;
    std::size_t n_test_neg = 0;
};

/// Input features from the training graph: the signed spectral embedding of
/// its largest connected component, each column scaled to unit RMS over that
/// component. Nodes outside it get zero rows.
inline Matrix sse_features(const SignedGraph& g, Index dim) {
    const auto lcc = largest_component(g);
    const auto n_lcc = static_cast<Index>(lcc.size());
    if (dim < 1 || dim > n_lcc)
        throw ArgumentError("feature dimension " + std::to_string(dim) + " exceeds the largest component (" +
                            std::to_string(n_lcc) + " nodes)");
    const Eigenpairs pairs = spectral_embedding(induced_subgraph(g, lcc), dim);
    Matrix x = Matrix::Zero(static_cast<Index>(g.num_nodes()), dim);
    const double scale = std::sqrt(static_cast<double>(n_lcc));
    for (Index k = 0; k < n_lcc; ++k) x.row(lcc[static_cast<std::size_t>(k)]) = scale * pairs.vectors.row(k);
    return x;
}

/// Fits the link-sign classifier on train-edge pairs and scores the test edges.
inline EvalReport evaluate_embedding(const Matrix& z, const EdgeSplit& split, const ExperimentConfig& cfg) {
    const auto train_edges = split.train.edges();
    const PairDataset train = build_pairs(z, train_edges);
    const PairDataset test = build_pairs(z, split.test);
    const LogisticModel model = fit_logreg(train, cfg.logreg_l2, cfg.logreg_max_iter);
    const Vector proba = model.predict_proba(test.features);

    std::vector<double> scores(proba.data(), proba.data() + proba.size());
    std::vector<int> predicted(scores.size());
    for (std::size_t k = 0; k < scores.size(); ++k) predicted[k] = scores[k] >= cfg.threshold ? 1 : 0;

    EvalReport report;
    report.threshold = cfg.threshold;
    report.n_test_pos = static_cast<std::size_t>(std::count(test.labels.begin(), test.labels.end(), 1));
    report.n_test_neg = test.size() - report.n_test_pos;
    report.auc = auc(scores, test.labels);
    report.f1 = f1_score(predicted, test.labels, 1);
    return report;
}

/// Node embedding for `method`, computed from the training graph alone.
inline Matrix train_side_embedding(const SignedGraph& train, Method method, const ExperimentConfig& cfg,
                                   std::uint64_t seed) {
    Matrix x = sse_features(train, cfg.sse_dim);
    if (method == Method::sse) return x;
    SgcnConfig model = model_config_for(method, cfg.model);
    model.d_in = cfg.sse_dim;
    TrainConfig tcfg = cfg.train;
    tcfg.seed = seed;
    return fit(train, x, tcfg, model).embedding;
}

/// Full protocol on an undirected graph: split, build features and (for SGCN
/// methods) train on the training graph only, then fit and score the
/// link-sign classifier.
inline EvalReport run_experiment(const SignedGraph& graph, Method method, const ExperimentConfig& cfg,
                                 std::uint64_t seed) {
    const EdgeSplit split = split_train_test(graph, cfg.test_fraction, seed);
    const Matrix z = train_side_embedding(split.train, method, cfg, seed);
    return evaluate_embedding(z, split, cfg);
}

inline EvalReport run_experiment(std::span<const EdgeRecord> records, Method method, const ExperimentConfig& cfg,
                                 std::uint64_t seed) {
    return run_experiment(to_undirected(records).graph, method, cfg, seed);
}

} // namespace sgcn

#endif // SGCN_EVALUATION_HPP
