#include <random>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "sgcn/balance_paths.hpp"
#include "sgcn/sgcn_model.hpp"
#include "support/oracles.hpp"
#include "support/properties.hpp"

using namespace sgcn;

namespace {

constexpr Sign P = Sign::positive;
constexpr Sign N = Sign::negative;

SgcnConfig small_cfg(Index d_in, Index d_hidden, int layers, Variant v = Variant::standard) {
    SgcnConfig c;
    c.d_in = d_in;
    c.d_hidden = d_hidden;
    c.layers = layers;
    c.variant = v;
    return c;
}

Matrix rows(std::initializer_list<std::initializer_list<double>> r) {
    Matrix m(static_cast<Index>(r.size()), static_cast<Index>(r.begin()->size()));
    Index i = 0;
    for (const auto& row : r) {
        Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

std::vector<std::vector<double>> to_nested(const Matrix& m) {
    std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) out[r].push_back(m(r, c));
    return out;
}

// nodes whose input row changes h (track, layer, node) when perturbed
std::set<NodeId> numeric_influence(const SignedGraph& g, const Matrix& x, const SgcnParams& params,
                                   const SgcnConfig& cfg, bool balanced_track, int layer, NodeId i) {
    const MeanAggregator agg(g);
    const HiddenState base = forward_all(agg, x, params, cfg);
    std::set<NodeId> out;
    for (NodeId j = 0; j < static_cast<NodeId>(g.num_nodes()); ++j) {
        Matrix x2 = x;
        x2.row(j).array() += 0.5;
        const HiddenState s = forward_all(agg, x2, params, cfg);
        const auto& a = balanced_track ? base.balanced[layer - 1] : base.unbalanced[layer - 1];
        const auto& b = balanced_track ? s.balanced[layer - 1] : s.unbalanced[layer - 1];
        if ((a.row(i) - b.row(i)).cwiseAbs().maxCoeff() > 1e-12) out.insert(j);
    }
    return out;
}

} // namespace

TEST(InitParams, ShapesBoundsDeterminism) {
    const SgcnConfig cfg; // d_in 64, d_hidden 32, L 2
    const auto a = init_params(cfg, 42);
    const auto b = init_params(cfg, 42);
    ASSERT_EQ(a.layers(), 2);
    EXPECT_EQ(a.w_balanced[0].rows(), 32);
    EXPECT_EQ(a.w_balanced[0].cols(), 128);
    EXPECT_EQ(a.w_balanced[1].rows(), 32);
    EXPECT_EQ(a.w_balanced[1].cols(), 96);
    EXPECT_EQ(a.w_unbalanced[1].cols(), 96);
    for (int l = 0; l < 2; ++l) {
        EXPECT_EQ(a.w_balanced[l], b.w_balanced[l]);
        EXPECT_EQ(a.w_unbalanced[l], b.w_unbalanced[l]);
        const double s = std::sqrt(6.0 / static_cast<double>(a.w_balanced[l].cols() + 32));
        EXPECT_LE(a.w_balanced[l].cwiseAbs().maxCoeff(), s);
        EXPECT_LE(a.w_unbalanced[l].cwiseAbs().maxCoeff(), s);
    }
    EXPECT_NE(init_params(cfg, 43).w_balanced[0], a.w_balanced[0]);
}

TEST(SgcnConfig, Validation) {
    EXPECT_THROW(small_cfg(0, 2, 1).validate(), ArgumentError);
    EXPECT_THROW(small_cfg(2, 0, 1).validate(), ArgumentError);
    EXPECT_THROW(small_cfg(2, 2, 0).validate(), ArgumentError);
    EXPECT_THROW(small_cfg(2, 2, 3, Variant::plus).validate(), ArgumentError);
    EXPECT_NO_THROW(small_cfg(2, 2, 2, Variant::plus).validate());
}

TEST(ForwardLayer1, DeskExample) {
    // edges 0-1 (+), 1-2 (-), 0-2 (+)
    const SignedGraph g(3, {{0, 1, P}, {1, 2, N}, {0, 2, P}});
    const Matrix x = rows({{0.5, -1.0}, {2.0, 0.25}, {-0.75, 1.5}});
    SgcnParams params;
    params.w_balanced = {rows({{0.1, -0.2, 0.3, 0.4}, {0.5, 0.6, -0.7, 0.8}})};
    params.w_unbalanced = {rows({{-0.3, 0.2, 0.1, -0.5}, {0.4, -0.1, 0.6, 0.2}})};
    const auto [hb, hu] = forward_layer1(MeanAggregator(g), x, params, small_cfg(2, 2, 1));

    // frozen from a scalar recomputation
    const Matrix want_b = rows({{-0.34741419890904285, -0.3027097293321085},
                                {0.7397830512740043, -0.9137854901178277},
                                {0.5545997223493823, 0.8798266996519848}});
    const Matrix want_u = rows({{0.5005202111902353, 0.09966799462495579},
                                {0.5370495669980353, 0.6640367702678489},
                                {-0.8798266996519848, 0.5545997223493824}});
    EXPECT_LT((hb - want_b).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((hu - want_u).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(ForwardLayer1, MatchesScalarRecomputation) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int t = 0; t < 30; ++t) {
        const auto g = oracle::random_signed_graph(9, 0.35, 0.4, rng);
        const auto cfg = small_cfg(3, 4, 1);
        const Matrix x = Matrix::NullaryExpr(9, 3, [&] { return normal(rng); });
        const auto params = init_params(cfg, static_cast<std::uint64_t>(t));
        const auto [hb, hu] = forward_layer1(MeanAggregator(g), x, params, cfg);
        const auto xs = to_nested(x);
        for (NodeId i = 0; i < 9; ++i) {
            const auto pb = g.positive_neighbors(i);
            const auto nb = g.negative_neighbors(i);
            const auto b = oracle::scalar_layer1(xs, {pb.begin(), pb.end()}, i, to_nested(params.w_balanced[0]));
            const auto u = oracle::scalar_layer1(xs, {nb.begin(), nb.end()}, i, to_nested(params.w_unbalanced[0]));
            for (Index c = 0; c < 4; ++c) {
                EXPECT_NEAR(hb(i, c), b[c], 1e-13);
                EXPECT_NEAR(hu(i, c), u[c], 1e-13);
            }
        }
    }
}

TEST(ForwardLayer1, EmptyAndSingletonNeighbourhoods) {
    // node 2 isolated; node 0 has the single positive neighbour 1
    const SignedGraph g(3, {{0, 1, P}});
    const Matrix x = rows({{1.0, 2.0}, {-3.0, 0.5}, {0.25, -0.75}});
    const auto cfg = small_cfg(2, 4, 1);
    SgcnParams params;
    Matrix id = Matrix::Zero(4, 4);
    id.setIdentity(); // [mean slot, self slot] passed straight through
    params.w_balanced = {id};
    params.w_unbalanced = {id};
    const auto [hb, hu] = forward_layer1(MeanAggregator(g), x, params, cfg);
    for (Index c = 0; c < 2; ++c) {
        EXPECT_EQ(hb(2, c), 0.0);
        EXPECT_EQ(hb(2, 2 + c), std::tanh(x(2, c)));
        EXPECT_EQ(hb(0, c), std::tanh(x(1, c)));
        EXPECT_EQ(hu(0, c), 0.0);
    }
}

TEST(ForwardLayer1, ShapeErrors) {
    const SignedGraph g(3, {{0, 1, P}});
    const auto cfg = small_cfg(2, 2, 1);
    const auto params = init_params(cfg, 1);
    EXPECT_THROW(forward_layer1(MeanAggregator(g), Matrix::Zero(3, 3), params, cfg), ShapeError);
    EXPECT_THROW(forward_layer1(MeanAggregator(g), Matrix::Zero(2, 2), params, cfg), ShapeError);
    EXPECT_THROW(forward_layer1(MeanAggregator(g), Matrix::Zero(3, 2), params, small_cfg(2, 3, 1)), ShapeError);
}

TEST(ForwardLayer, ZeroWeightsGiveTanhOfZero) {
    std::mt19937_64 rng(1);
    const auto g = oracle::random_signed_graph(6, 0.5, 0.5, rng);
    const auto cfg = small_cfg(3, 2, 2);
    auto params = init_params(cfg, 3);
    for (auto& w : params.w_balanced) w.setZero();
    for (auto& w : params.w_unbalanced) w.setZero();
    const Matrix z = embed_all(g, Matrix::Random(6, 3), params, cfg);
    EXPECT_EQ(z, Matrix::Zero(6, 4));
}

TEST(ForwardLayer, PositiveOnlyGraphIgnoresCrossSlot) {
    std::mt19937_64 rng(2);
    const auto g = oracle::random_signed_graph(8, 0.4, 0.0, rng);
    const auto cfg = small_cfg(3, 4, 2);
    auto params = init_params(cfg, 5);
    const Matrix x = Matrix::Random(8, 3);
    const Matrix z = embed_all(g, x, params, cfg);
    params.w_balanced[1].middleCols(4, 4).setZero();
    params.w_unbalanced[1].middleCols(4, 4).setZero();
    EXPECT_EQ(embed_all(g, x, params, cfg), z);
}

TEST(ForwardLayer, EnemyOfEnemyReachesBalancedTrack) {
    // path 0 -(-)- 1 -(-)- 2
    const SignedGraph g(3, {{0, 1, N}, {1, 2, N}});
    const auto cfg = small_cfg(2, 3, 2);
    const auto params = init_params(cfg, 11);
    const Matrix x = Matrix::Random(3, 2);
    EXPECT_EQ(numeric_influence(g, x, params, cfg, true, 2, 0), (std::set<NodeId>{0, 1, 2}));
    // node 2 is an enemy of an enemy: it reaches node 0's balanced track only
    EXPECT_EQ(numeric_influence(g, x, params, cfg, false, 2, 0), (std::set<NodeId>{0, 1}));
}

TEST(ForwardLayer, InfluenceFollowsBalanceComposition) {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 25; ++t) {
        const auto g = oracle::random_signed_graph(7, 0.3, 0.5, rng);
        const int layers = 1 + t % 3;
        const auto cfg = small_cfg(2, 3, layers);
        const auto params = init_params(cfg, static_cast<std::uint64_t>(t));
        const Matrix x = Matrix::Random(7, 2);
        const auto sym = oracle::influence_sets(g, layers);
        for (int l = 1; l <= layers; ++l) {
            for (NodeId i = 0; i < 7; ++i) {
                const auto nb = numeric_influence(g, x, params, cfg, true, l, i);
                const auto nu = numeric_influence(g, x, params, cfg, false, l, i);
                EXPECT_EQ(nb, sym.balanced[l - 1][i]) << "trial " << t << " layer " << l << " node " << i;
                EXPECT_EQ(nu, sym.unbalanced[l - 1][i]) << "trial " << t << " layer " << l << " node " << i;
                // every balanced / unbalanced walk endpoint feeds the matching track
                const auto r = reach_sets(g, i, static_cast<std::size_t>(l));
                for (NodeId j : r.balanced_at(l)) EXPECT_TRUE(sym.balanced[l - 1][i].count(j));
                for (NodeId j : r.unbalanced_at(l)) EXPECT_TRUE(sym.unbalanced[l - 1][i].count(j));
            }
        }
    }
}

TEST(ForwardLayer, TrackSeparationAtLayerOne) {
    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const auto g = oracle::random_signed_graph(8, 0.4, 0.5, rng);
        const auto cfg = small_cfg(2, 3, 1);
        const auto params = init_params(cfg, static_cast<std::uint64_t>(t));
        const Matrix x = Matrix::Random(8, 2);
        for (NodeId i = 0; i < 8; ++i) {
            const auto nb = numeric_influence(g, x, params, cfg, true, 1, i);
            const auto nu = numeric_influence(g, x, params, cfg, false, 1, i);
            for (NodeId k : g.negative_neighbors(i)) EXPECT_FALSE(nb.count(k));
            for (NodeId j : g.positive_neighbors(i)) EXPECT_FALSE(nu.count(j));
        }
    }
}

TEST(ForwardLayerPlus, RequiresPlusVariant) {
    const SignedGraph g(2, {{0, 1, P}});
    const auto cfg = small_cfg(2, 2, 2);
    const auto params = init_params(cfg, 1);
    const MeanAggregator agg(g);
    HiddenState s;
    auto [b, u] = forward_layer1(agg, Matrix::Ones(2, 2), params, cfg);
    s.balanced.push_back(b);
    s.unbalanced.push_back(u);
    EXPECT_THROW(forward_layer_plus(agg, s, params, cfg), UsageError);
}

TEST(ForwardLayerPlus, MixedSignInstanceSlotByslot) {
    // 0 -(+)- 1 -(-)- 2 -(+)- 0
    const SignedGraph g(3, {{0, 1, P}, {1, 2, N}, {0, 2, P}});
    const auto plus = small_cfg(2, 2, 2, Variant::plus);
    const auto standard = small_cfg(2, 2, 2, Variant::standard);
    const auto params = init_params(plus, 17);
    const Matrix x = rows({{0.3, -0.2}, {1.1, 0.4}, {-0.6, 0.9}});
    const MeanAggregator agg(g);
    HiddenState s;
    auto [b1, u1] = forward_layer1(agg, x, params, plus);
    s.balanced.push_back(b1);
    s.unbalanced.push_back(u1);
    const auto [pb, pu] = forward_layer_plus(agg, s, params, plus);
    const auto [sb, su] = forward_layer(agg, s, params, 2, standard);

    auto mean = [](const Matrix& h, std::span<const NodeId> ids) {
        Eigen::RowVectorXd m = Eigen::RowVectorXd::Zero(h.cols());
        for (NodeId j : ids) m += h.row(j) / static_cast<double>(ids.size());
        return m;
    };
    for (NodeId i = 0; i < 3; ++i) {
        const auto pos = g.positive_neighbors(i);
        const auto neg = g.negative_neighbors(i);
        Eigen::VectorXd in_pb(6), in_pu(6), in_sb(6), in_su(6);
        in_pb << mean(b1, pos).transpose(), Eigen::Vector2d::Zero(), b1.row(i).transpose();
        in_pu << Eigen::Vector2d::Zero(), mean(u1, neg).transpose(), u1.row(i).transpose();
        in_sb << mean(b1, pos).transpose(), mean(u1, neg).transpose(), b1.row(i).transpose();
        in_su << mean(u1, pos).transpose(), mean(b1, neg).transpose(), u1.row(i).transpose();
        const Eigen::VectorXd want_pb = (params.w_balanced[1] * in_pb).array().tanh();
        const Eigen::VectorXd want_pu = (params.w_unbalanced[1] * in_pu).array().tanh();
        const Eigen::VectorXd want_sb = (params.w_balanced[1] * in_sb).array().tanh();
        const Eigen::VectorXd want_su = (params.w_unbalanced[1] * in_su).array().tanh();
        EXPECT_LT((pb.row(i).transpose() - want_pb).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((pu.row(i).transpose() - want_pu).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((sb.row(i).transpose() - want_sb).cwiseAbs().maxCoeff(), 1e-14);
        EXPECT_LT((su.row(i).transpose() - want_su).cwiseAbs().maxCoeff(), 1e-14);
    }
    // node 0 has no negative neighbour: the plus B-track equals the standard one there
    EXPECT_LT((pb.row(0) - sb.row(0)).cwiseAbs().maxCoeff(), 1e-15);
    // nodes 1 and 2 have one: the two variants disagree on the balanced track
    EXPECT_GT((pb.row(1) - sb.row(1)).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(ForwardLayerPlus, NoNegativeNeighbourUsesSelfOnly) {
    const SignedGraph g(3, {{0, 1, P}, {1, 2, P}});
    const auto cfg = small_cfg(2, 3, 2, Variant::plus);
    const auto params = init_params(cfg, 23);
    const Matrix x = Matrix::Random(3, 2);
    const MeanAggregator agg(g);
    const HiddenState s = forward_all(agg, x, params, cfg);
    for (Index i = 0; i < 3; ++i) {
        const Eigen::VectorXd want =
            (params.w_unbalanced[1].rightCols(3) * s.unbalanced[0].row(i).transpose()).array().tanh();
        EXPECT_LT((s.unbalanced[1].row(i).transpose() - want).cwiseAbs().maxCoeff(), 1e-15);
    }
}

TEST(ForwardLayerPlus, AllPositiveGraphMatchesStandardBalancedTrack) {
    std::mt19937_64 rng(6);
    const auto g = oracle::random_signed_graph(9, 0.4, 0.0, rng);
    const auto plus = small_cfg(2, 3, 2, Variant::plus);
    const auto params = init_params(plus, 29);
    const Matrix x = Matrix::Random(9, 2);
    const Matrix zp = embed_all(g, x, params, plus);
    const Matrix zs = embed_all(g, x, params, small_cfg(2, 3, 2));
    EXPECT_EQ(zp.leftCols(3), zs.leftCols(3));
}

TEST(EmbedAll, ShapesAndRange) {
    std::mt19937_64 rng(7);
    const auto g = oracle::random_signed_graph(10, 0.3, 0.4, rng);
    for (int layers : {1, 2, 3}) {
        SgcnConfig cfg = small_cfg(5, 32, layers);
        const Matrix x = 10.0 * Matrix::Random(10, 5);
        const Matrix z = embed_all(g, x, init_params(cfg, 1), cfg);
        EXPECT_EQ(z.rows(), 10);
        EXPECT_EQ(z.cols(), 64);
        EXPECT_LT(z.cwiseAbs().maxCoeff(), 1.0);
    }
    const auto cfg1 = small_cfg(5, 4, 1);
    const auto p1 = init_params(cfg1, 2);
    const Matrix x = Matrix::Random(10, 5);
    const auto [b, u] = forward_layer1(MeanAggregator(g), x, p1, cfg1);
    const Matrix z = embed_all(g, x, p1, cfg1);
    EXPECT_EQ(z.leftCols(4), b);
    EXPECT_EQ(z.rightCols(4), u);
}

TEST(EmbedAll, PermutationEquivarianceAndLocality) {
    const auto r = oracle::embedding_equivariance_and_locality();
    EXPECT_TRUE(r.passed) << r.detail;
}

TEST(EmbedAll, Deterministic) {
    std::mt19937_64 rng(9);
    const auto g = oracle::random_signed_graph(10, 0.3, 0.4, rng);
    const auto cfg = small_cfg(4, 3, 2);
    const Matrix x = Matrix::Random(10, 4);
    EXPECT_EQ(embed_all(g, x, init_params(cfg, 5), cfg), embed_all(g, x, init_params(cfg, 5), cfg));
}
