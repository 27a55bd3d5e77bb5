#ifndef SGCN_CHECKPOINT_HPP
#define SGCN_CHECKPOINT_HPP

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "error.hpp"
#include "evaluation.hpp"
#include "sgcn_model.hpp"
#include "training.hpp"

namespace sgcn {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to rebuild a trained model's embedding on its split.
struct Checkpoint {
    Method method = Method::sgcn_2;
    std::uint64_t seed = 0;
    std::string dataset_hash; // content hash of the edge list trained on; may be empty
    ExperimentConfig experiment;
    SgcnParams params;
    MlgParams mlg;
};

namespace detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json data = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Index>();
    const auto cols = j.at("cols").get<Index>();
    const auto& data = j.at("data");
    if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols))
        throw IoError("checkpoint matrix has inconsistent size");
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(r * cols + c)].get<double>();
    return m;
}

} // namespace detail

inline nlohmann::json to_json(const Checkpoint& ck) {
    const auto& e = ck.experiment;
    nlohmann::json balanced = nlohmann::json::array();
    nlohmann::json unbalanced = nlohmann::json::array();
    for (const auto& w : ck.params.w_balanced) balanced.push_back(detail::matrix_to_json(w));
    for (const auto& w : ck.params.w_unbalanced) unbalanced.push_back(detail::matrix_to_json(w));
    return {
        {"format", "sgcn-checkpoint"},
        {"version", kCheckpointVersion},
        {"method", std::string(to_string(ck.method))},
        {"seed", ck.seed},
        {"dataset_hash", ck.dataset_hash},
        {"model",
         {{"d_in", e.model.d_in},
          {"d_hidden", e.model.d_hidden},
          {"layers", e.model.layers},
          {"variant", std::string(to_string(e.model.variant))},
          {"activation", std::string(to_string(e.model.activation))}}},
        {"train",
         {{"lambda", e.train.lambda},
          {"reg_coeff", e.train.reg_coeff},
          {"learning_rate", e.train.learning_rate},
          {"batch_nodes", e.train.batch_nodes},
          {"pairs_per_class", e.train.pairs_per_class},
          {"epochs", e.train.epochs},
          {"seed", e.train.seed},
          {"mlg_bias", e.train.mlg_bias}}},
        {"protocol",
         {{"test_fraction", e.test_fraction},
          {"sse_dim", e.sse_dim},
          {"logreg_l2", e.logreg_l2},
          {"logreg_max_iter", e.logreg_max_iter},
          {"threshold", e.threshold}}},
        {"weights", {{"rng_seed", ck.params.rng_seed}, {"balanced", balanced}, {"unbalanced", unbalanced}}},
        {"mlg",
         {{"theta", detail::matrix_to_json(ck.mlg.theta)},
          {"bias", {ck.mlg.bias(0), ck.mlg.bias(1), ck.mlg.bias(2)}},
          {"use_bias", ck.mlg.use_bias}}},
    };
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "sgcn-checkpoint") throw IoError("not an sgcn checkpoint");
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion)
            throw IoError("unsupported checkpoint version " + std::to_string(version));

        Checkpoint ck;
        ck.method = parse_method(j.at("method").get<std::string>());
        ck.seed = j.at("seed").get<std::uint64_t>();
        ck.dataset_hash = j.value("dataset_hash", std::string());
        auto& e = ck.experiment;
        const auto& m = j.at("model");
        e.model.d_in = m.at("d_in").get<Index>();
        e.model.d_hidden = m.at("d_hidden").get<Index>();
        e.model.layers = m.at("layers").get<int>();
        e.model.variant = parse_variant(m.at("variant").get<std::string>());
        e.model.activation = parse_activation(m.at("activation").get<std::string>());
        const auto& t = j.at("train");
        e.train.lambda = t.at("lambda").get<double>();
        e.train.reg_coeff = t.at("reg_coeff").get<double>();
        e.train.learning_rate = t.at("learning_rate").get<double>();
        e.train.batch_nodes = t.at("batch_nodes").get<int>();
        e.train.pairs_per_class = t.at("pairs_per_class").get<int>();
        e.train.epochs = t.at("epochs").get<int>();
        e.train.seed = t.at("seed").get<std::uint64_t>();
        e.train.mlg_bias = t.at("mlg_bias").get<bool>();
        const auto& p = j.at("protocol");
        e.test_fraction = p.at("test_fraction").get<double>();
        e.sse_dim = p.at("sse_dim").get<Index>();
        e.logreg_l2 = p.at("logreg_l2").get<double>();
        e.logreg_max_iter = p.at("logreg_max_iter").get<int>();
        e.threshold = p.at("threshold").get<double>();

        const auto& w = j.at("weights");
        ck.params.rng_seed = w.at("rng_seed").get<std::uint64_t>();
        for (const auto& mj : w.at("balanced")) ck.params.w_balanced.push_back(detail::matrix_from_json(mj));
        for (const auto& mj : w.at("unbalanced")) ck.params.w_unbalanced.push_back(detail::matrix_from_json(mj));
        check_params(e.model, ck.params);

        const auto& mlg = j.at("mlg");
        ck.mlg.theta = detail::matrix_from_json(mlg.at("theta"));
        const auto bias = mlg.at("bias").get<std::vector<double>>();
        if (bias.size() != 3) throw IoError("checkpoint classifier bias must have 3 entries");
        ck.mlg.bias = Eigen::Vector3d(bias[0], bias[1], bias[2]);
        ck.mlg.use_bias = mlg.at("use_bias").get<bool>();
        if (ck.mlg.theta.rows() != kNumLinkClasses || ck.mlg.theta.cols() != 2 * e.model.embedding_width())
            throw IoError("checkpoint classifier has the wrong shape");
        return ck;
    } catch (const nlohmann::json::exception& ex) {
        throw IoError(std::string("malformed checkpoint: ") + ex.what());
    } catch (const ShapeError& ex) {
        throw IoError(std::string("malformed checkpoint: ") + ex.what());
    }
}

inline void write_checkpoint(std::ostream& out, const Checkpoint& ck) { out << to_json(ck).dump(1) << '\n'; }

inline Checkpoint read_checkpoint(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw IoError(std::string("checkpoint is not valid JSON: ") + ex.what());
    }
    return checkpoint_from_json(j);
}

} // namespace sgcn

#endif // SGCN_CHECKPOINT_HPP
