// sgcn: command-line driver for ingestion, the spectral baseline, SGCN
// training, link-sign evaluation and triangle diagnostics.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sgcn/sgcn.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunConfig {
    std::string dataset;
    std::string format = "weighted-csv";
    std::string method = "sgcn-2";
    std::string out = "sgcn-out";
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<double> lambdas{0.0, 1.0, 5.0, 10.0};
    std::string checkpoint;
    bool from_scratch = false;
    bool quiet = false;
    sgcn::ExperimentConfig experiment;

    std::vector<std::uint64_t> seed_list() const { return seeds.empty() ? std::vector<std::uint64_t>{seed} : seeds; }
};

/// Files written by one command. Each file is written to a temporary name and
/// renamed once its stream closed cleanly; anything written is removed again
/// unless commit() is reached.
class OutputSet {
  public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;
    ~OutputSet() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& p : written_) fs::remove(p, ec);
    }

    fs::path write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        const fs::path target = dir_ / name;
        const fs::path partial = dir_ / ("." + name + ".partial");
        {
            std::ofstream out(partial, std::ios::binary | std::ios::trunc);
            if (!out) throw sgcn::IoError("cannot write " + partial.string());
            body(out);
            out.flush();
            if (!out) {
                out.close();
                std::error_code ec;
                fs::remove(partial, ec);
                throw sgcn::IoError("failed while writing " + target.string());
            }
        }
        std::error_code ec;
        fs::rename(partial, target, ec);
        if (ec) {
            fs::remove(partial);
            throw sgcn::IoError("cannot move output into place at " + target.string() + ": " + ec.message());
        }
        written_.push_back(target);
        return target;
    }

    const std::vector<fs::path>& files() const noexcept { return written_; }
    const fs::path& dir() const noexcept { return dir_; }
    void commit() noexcept { committed_ = true; }

  private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool committed_ = false;
};

std::string join_seeds(const std::vector<std::uint64_t>& seeds) {
    std::string s;
    for (std::size_t i = 0; i < seeds.size(); ++i) s += (i ? "," : "") + std::to_string(seeds[i]);
    return s;
}

std::string join_doubles(const std::vector<double>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + sgcn::detail::format_double(xs[i]);
    return s;
}

fs::path checkpoint_path(const RunConfig& cfg) {
    return cfg.checkpoint.empty() ? fs::path(cfg.out) / "checkpoint.json" : fs::path(cfg.checkpoint);
}

/// Command line that reproduces the run, with every setting spelled out.
std::vector<std::string> replay_argv(const std::string& command, const RunConfig& cfg) {
    using sgcn::detail::format_double;
    const auto& e = cfg.experiment;
    std::vector<std::string> argv{"sgcn", command, "--dataset", fs::absolute(cfg.dataset).string(), "--format",
                                  cfg.format, "--method", cfg.method, "--out", fs::absolute(cfg.out).string()};
    auto add = [&](std::string flag, std::string value) {
        argv.push_back(std::move(flag));
        argv.push_back(std::move(value));
    };
    if (cfg.seeds.empty()) add("--seed", std::to_string(cfg.seed));
    else add("--seeds", join_seeds(cfg.seeds));
    add("--lambda", format_double(e.train.lambda));
    add("--epochs", std::to_string(e.train.epochs));
    add("--lr", format_double(e.train.learning_rate));
    add("--reg", format_double(e.train.reg_coeff));
    add("--batch-nodes", std::to_string(e.train.batch_nodes));
    add("--pairs-per-class", std::to_string(e.train.pairs_per_class));
    add("--d-hidden", std::to_string(e.model.d_hidden));
    add("--sse-dim", std::to_string(e.sse_dim));
    add("--test-fraction", format_double(e.test_fraction));
    add("--logreg-l2", format_double(e.logreg_l2));
    if (command == "sweep-lambda") add("--lambdas", join_doubles(cfg.lambdas));
    if (command == "eval" && cfg.method != "sse") {
        if (cfg.from_scratch) argv.push_back("--from-scratch");
        else add("--checkpoint", fs::absolute(checkpoint_path(cfg)).string());
    }
    return argv;
}

json config_json(const RunConfig& cfg) {
    const auto& e = cfg.experiment;
    return {{"dataset", fs::absolute(cfg.dataset).string()},
            {"format", cfg.format},
            {"method", cfg.method},
            {"seeds", cfg.seed_list()},
            {"model", {{"d_hidden", e.model.d_hidden}, {"activation", std::string(sgcn::to_string(e.model.activation))}}},
            {"train",
             {{"lambda", e.train.lambda},
              {"reg_coeff", e.train.reg_coeff},
              {"learning_rate", e.train.learning_rate},
              {"batch_nodes", e.train.batch_nodes},
              {"pairs_per_class", e.train.pairs_per_class},
              {"epochs", e.train.epochs},
              {"mlg_bias", e.train.mlg_bias}}},
            {"protocol",
             {{"test_fraction", e.test_fraction},
              {"sse_dim", e.sse_dim},
              {"logreg_l2", e.logreg_l2},
              {"logreg_max_iter", e.logreg_max_iter},
              {"threshold", e.threshold}}}};
}

struct Input {
    std::string role;
    fs::path path;
    std::string hash;
};

/// Writes manifest-<command>.json listing config, replay command, input and
/// output hashes. Outputs are re-read from disk so the hashes describe what
/// actually landed there.
void write_manifest(OutputSet& outputs, const std::string& command, const RunConfig& cfg,
                    const std::vector<Input>& inputs) {
    json files = json::array();
    for (const auto& p : outputs.files())
        files.push_back({{"file", p.filename().string()}, {"hash", sgcn::content_hash(sgcn::read_file_bytes(p))}});
    json in = json::array();
    for (const auto& i : inputs) in.push_back({{"role", i.role}, {"path", fs::absolute(i.path).string()}, {"hash", i.hash}});
    const json manifest{{"tool", "sgcn"},
                        {"manifest_version", 1},
                        {"command", command},
                        {"argv", replay_argv(command, cfg)},
                        {"config", config_json(cfg)},
                        {"inputs", in},
                        {"outputs", files}};
    outputs.write("manifest-" + command + ".json", [&](std::ostream& o) { o << manifest.dump(2) << '\n'; });
}

struct Dataset {
    sgcn::CompactedGraph compacted;
    std::string name;
    std::string hash;
    std::size_t records = 0;
};

Dataset load_dataset(const RunConfig& cfg) {
    if (cfg.dataset.empty()) throw sgcn::ArgumentError("--dataset is required");
    const auto format = sgcn::parse_edge_format(cfg.format);
    const std::string bytes = sgcn::read_file_bytes(cfg.dataset);
    std::istringstream in(bytes);
    const auto records = sgcn::load_edge_list(in, format);
    if (records.empty()) throw sgcn::ArgumentError(cfg.dataset + " contains no edges");
    Dataset d{sgcn::to_undirected(records), fs::path(cfg.dataset).filename().string(), sgcn::content_hash(bytes),
              records.size()};
    for (const char* ext : {".gz", ".csv", ".tsv", ".txt"})
        if (d.name.ends_with(ext)) d.name.resize(d.name.size() - std::string_view(ext).size());
    return d;
}

void log(const RunConfig& cfg, const std::string& line) {
    if (!cfg.quiet) std::cerr << line << '\n';
}

std::function<void(const sgcn::EpochLoss&)> epoch_logger(const RunConfig& cfg, std::uint64_t seed) {
    if (cfg.quiet) return {};
    return [seed, epochs = cfg.experiment.train.epochs](const sgcn::EpochLoss& h) {
        if (h.epoch == 1 || h.epoch % 10 == 0 || h.epoch == epochs)
            std::cerr << "seed " << seed << " epoch " << h.epoch << " loss " << h.loss.total << " (mlg " << h.loss.mlg
                      << ", margin " << h.loss.margin << ", reg " << h.loss.reg << ")\n";
    };
}

sgcn::SgcnConfig model_for(const RunConfig& cfg, sgcn::Method method) {
    sgcn::SgcnConfig m = sgcn::model_config_for(method, cfg.experiment.model);
    m.d_in = cfg.experiment.sse_dim;
    return m;
}

// ---------------------------------------------------------------------------
// Commands

void cmd_ingest(const RunConfig& cfg) {
    const Dataset d = load_dataset(cfg);
    const auto& g = d.compacted.graph;
    OutputSet out(cfg.out);
    out.write("graph.tsv", [&](std::ostream& o) { sgcn::write_graph_tsv(o, g); });
    out.write("id_map.csv", [&](std::ostream& o) { sgcn::write_id_map(o, d.compacted.ids); });
    write_manifest(out, "ingest", cfg, {{"dataset", cfg.dataset, d.hash}});
    out.commit();
    std::cout << "records " << d.records << "\nnodes " << g.num_nodes() << "\npositive_edges " << g.num_positive_edges()
              << "\nnegative_edges " << g.num_negative_edges() << '\n';
}

void cmd_triangles(const RunConfig& cfg) {
    const Dataset d = load_dataset(cfg);
    const auto census = sgcn::triangle_census(d.compacted.graph);
    OutputSet out(cfg.out);
    out.write("triangles.csv", [&](std::ostream& o) {
        o << "type,count\nA," << census.a << "\nB," << census.b << "\nC," << census.c << "\nD," << census.d << '\n';
    });
    write_manifest(out, "triangles", cfg, {{"dataset", cfg.dataset, d.hash}});
    out.commit();
    std::cout << "A " << census.a << "\nB " << census.b << "\nC " << census.c << "\nD " << census.d << '\n';
}

void cmd_sse(const RunConfig& cfg) {
    const Dataset d = load_dataset(cfg);
    OutputSet out(cfg.out);
    for (std::uint64_t seed : cfg.seed_list()) {
        const auto split = sgcn::split_train_test(d.compacted.graph, cfg.experiment.test_fraction, seed);
        const sgcn::Matrix x = sgcn::sse_features(split.train, cfg.experiment.sse_dim);
        out.write("sse_embedding_seed" + std::to_string(seed) + ".csv",
                  [&](std::ostream& o) { sgcn::write_embedding_csv(o, x, d.compacted.ids); });
    }
    write_manifest(out, "sse", cfg, {{"dataset", cfg.dataset, d.hash}});
    out.commit();
}

void cmd_train(const RunConfig& cfg) {
    const auto method = sgcn::parse_method(cfg.method);
    if (method == sgcn::Method::sse) throw sgcn::UsageError("method sse has no trainable parameters; use `sgcn sse`");
    if (cfg.seed_list().size() != 1) throw sgcn::UsageError("train takes a single --seed");
    const std::uint64_t seed = cfg.seed_list().front();
    const Dataset d = load_dataset(cfg);

    const auto split = sgcn::split_train_test(d.compacted.graph, cfg.experiment.test_fraction, seed);
    const sgcn::Matrix x = sgcn::sse_features(split.train, cfg.experiment.sse_dim);
    sgcn::TrainConfig tcfg = cfg.experiment.train;
    tcfg.seed = seed;
    const sgcn::SgcnConfig model = model_for(cfg, method);
    const auto result = sgcn::fit(split.train, x, tcfg, model, epoch_logger(cfg, seed));

    sgcn::Checkpoint ck;
    ck.method = method;
    ck.seed = seed;
    ck.dataset_hash = d.hash;
    ck.experiment = cfg.experiment;
    ck.experiment.model = model;
    ck.experiment.train = tcfg;
    ck.params = result.params;
    ck.mlg = result.mlg;

    OutputSet out(cfg.out);
    out.write("checkpoint.json", [&](std::ostream& o) { sgcn::write_checkpoint(o, ck); });
    out.write("embedding.csv", [&](std::ostream& o) { sgcn::write_embedding_csv(o, result.embedding, d.compacted.ids); });
    out.write("loss_history.csv", [&](std::ostream& o) { sgcn::write_loss_history_csv(o, result.history); });
    write_manifest(out, "train", cfg, {{"dataset", cfg.dataset, d.hash}});
    out.commit();
}

void write_reports(OutputSet& out, const std::string& prefix, const std::vector<sgcn::ReportRow>& rows) {
    out.write(prefix + "report.csv", [&](std::ostream& o) { sgcn::write_report_csv(o, rows); });
    out.write(prefix + "aggregate.csv",
              [&](std::ostream& o) { sgcn::write_aggregate_csv(o, sgcn::aggregate_reports(rows)); });
}

void print_row(const sgcn::ReportRow& r) {
    std::cout << r.dataset << ' ' << r.method << " seed " << r.seed << " auc " << r.report.auc << " f1 " << r.report.f1
              << '\n';
}

void cmd_eval(const RunConfig& cfg, bool method_given) {
    const Dataset d = load_dataset(cfg);
    std::vector<sgcn::ReportRow> rows;
    std::vector<Input> inputs{{"dataset", cfg.dataset, d.hash}};
    auto method = sgcn::parse_method(cfg.method);

    if (method == sgcn::Method::sse || cfg.from_scratch) {
        for (std::uint64_t seed : cfg.seed_list()) {
            const auto split = sgcn::split_train_test(d.compacted.graph, cfg.experiment.test_fraction, seed);
            sgcn::ExperimentConfig e = cfg.experiment;
            if (method != sgcn::Method::sse) e.model = model_for(cfg, method);
            const sgcn::Matrix z = method == sgcn::Method::sse
                                       ? sgcn::sse_features(split.train, e.sse_dim)
                                       : [&] {
                                             sgcn::TrainConfig t = e.train;
                                             t.seed = seed;
                                             const sgcn::Matrix x = sgcn::sse_features(split.train, e.sse_dim);
                                             return sgcn::fit(split.train, x, t, e.model, epoch_logger(cfg, seed))
                                                 .embedding;
                                         }();
            rows.push_back({d.name, cfg.method, seed, sgcn::evaluate_embedding(z, split, e)});
            print_row(rows.back());
        }
    } else {
        const fs::path path = checkpoint_path(cfg);
        if (!fs::exists(path))
            throw sgcn::UsageError("no checkpoint at " + path.string() +
                                   "; run `sgcn train` first, or pass --from-scratch to train inside eval");
        std::ifstream in(path);
        const auto ck = sgcn::read_checkpoint(in);
        if (method_given && ck.method != method)
            throw sgcn::UsageError("checkpoint holds method " + std::string(sgcn::to_string(ck.method)) + ", not " +
                                   cfg.method);
        if (!ck.dataset_hash.empty() && ck.dataset_hash != d.hash)
            throw sgcn::UsageError("checkpoint was trained on a different dataset (hash " + ck.dataset_hash + ")");
        method = ck.method;
        const auto split = sgcn::split_train_test(d.compacted.graph, ck.experiment.test_fraction, ck.seed);
        const sgcn::Matrix x = sgcn::sse_features(split.train, ck.experiment.sse_dim);
        const sgcn::Matrix z = sgcn::embed_all(split.train, x, ck.params, ck.experiment.model);
        rows.push_back({d.name, std::string(sgcn::to_string(method)), ck.seed, sgcn::evaluate_embedding(z, split, ck.experiment)});
        print_row(rows.back());
        inputs.push_back({"checkpoint", path, sgcn::content_hash(sgcn::read_file_bytes(path))});
    }

    OutputSet out(cfg.out);
    write_reports(out, "", rows);
    write_manifest(out, "eval", cfg, inputs);
    out.commit();
}

void cmd_sweep_lambda(const RunConfig& cfg) {
    const auto method = sgcn::parse_method(cfg.method);
    if (method == sgcn::Method::sse) throw sgcn::UsageError("lambda has no effect on the sse baseline");
    if (cfg.lambdas.empty()) throw sgcn::UsageError("--lambdas is empty");
    const Dataset d = load_dataset(cfg);

    std::vector<sgcn::ReportRow> rows;
    for (std::uint64_t seed : cfg.seed_list()) {
        const auto split = sgcn::split_train_test(d.compacted.graph, cfg.experiment.test_fraction, seed);
        const sgcn::Matrix x = sgcn::sse_features(split.train, cfg.experiment.sse_dim);
        for (double lambda : cfg.lambdas) {
            sgcn::ExperimentConfig e = cfg.experiment;
            e.model = model_for(cfg, method);
            e.train.lambda = lambda;
            e.train.seed = seed;
            const auto z = sgcn::fit(split.train, x, e.train, e.model, epoch_logger(cfg, seed)).embedding;
            const std::string label = cfg.method + "/lambda=" + sgcn::detail::format_double(lambda);
            rows.push_back({d.name, label, seed, sgcn::evaluate_embedding(z, split, e)});
            print_row(rows.back());
        }
    }
    OutputSet out(cfg.out);
    write_reports(out, "sweep_", rows);
    write_manifest(out, "sweep-lambda", cfg, {{"dataset", cfg.dataset, d.hash}});
    out.commit();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Signed graph convolutional networks: ingestion, training and link-sign evaluation"};
    app.fallthrough();
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option values; command-line flags take precedence");

    RunConfig cfg;
    auto& e = cfg.experiment;
    app.add_option("--dataset", cfg.dataset, "Edge list file (gzip accepted)");
    app.add_option("--format", cfg.format, "weighted-csv or signed-tsv")->capture_default_str();
    auto* method_opt = app.add_option("--method", cfg.method, "sse, sgcn-1, sgcn-1+ or sgcn-2")->capture_default_str();
    app.add_option("--out", cfg.out, "Output directory")->envname("SGCN_OUT_DIR")->capture_default_str();
    auto* seed_opt = app.add_option("--seed", cfg.seed, "Split and initialisation seed")->capture_default_str();
    app.add_option("--seeds", cfg.seeds, "Comma-separated seed list")->delimiter(',')->excludes(seed_opt);
    app.add_option("--lambda", e.train.lambda, "Weight of the balance-theory margin term")->capture_default_str();
    app.add_option("--epochs", e.train.epochs, "SGD epochs")->capture_default_str();
    app.add_option("--lr", e.train.learning_rate, "SGD learning rate")->capture_default_str();
    app.add_option("--reg", e.train.reg_coeff, "L2 coefficient on weights and classifier")->capture_default_str();
    app.add_option("--batch-nodes", e.train.batch_nodes, "Anchor nodes per batch")->capture_default_str();
    app.add_option("--pairs-per-class", e.train.pairs_per_class, "Pairs drawn per class per anchor")->capture_default_str();
    app.add_option("--d-hidden", e.model.d_hidden, "Hidden width per track")->capture_default_str();
    app.add_option("--sse-dim", e.sse_dim, "Spectral feature dimension")->capture_default_str();
    app.add_option("--test-fraction", e.test_fraction, "Fraction of edges held out")->capture_default_str();
    app.add_option("--logreg-l2", e.logreg_l2, "L2 strength of the link-sign classifier")->capture_default_str();
    app.add_option("--lambdas", cfg.lambdas, "Lambda grid for sweep-lambda")->delimiter(',')->capture_default_str();
    app.add_option("--checkpoint", cfg.checkpoint, "Checkpoint for eval (default <out>/checkpoint.json)");
    app.add_flag("--from-scratch", cfg.from_scratch, "eval: train each seed instead of loading a checkpoint");
    app.add_flag("--quiet", cfg.quiet, "No progress output");

    std::string command;
    for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"ingest", "Compact an edge list; print node and edge counts"},
             {"triangles", "Count triangles by sign pattern"},
             {"sse", "Spectral embedding of each seed's training graph"},
             {"train", "Train an SGCN on one seed's training graph"},
             {"eval", "Link-sign prediction AUC/F1 on held-out edges"},
             {"sweep-lambda", "Evaluate over a grid of lambda values"}})
        app.add_subcommand(name, help)->callback([&command, name = name] { command = name; });

    CLI11_PARSE(app, argc, argv);

    try {
        if (command == "ingest") cmd_ingest(cfg);
        else if (command == "triangles") cmd_triangles(cfg);
        else if (command == "sse") cmd_sse(cfg);
        else if (command == "train") cmd_train(cfg);
        else if (command == "eval") cmd_eval(cfg, method_opt->count() > 0);
        else if (command == "sweep-lambda") cmd_sweep_lambda(cfg);
    } catch (const sgcn::ParseError& ex) {
        std::cerr << "sgcn " << command << ": " << cfg.dataset << ": " << ex.what() << '\n';
        return 1;
    } catch (const std::exception& ex) {
        std::cerr << "sgcn " << command << ": " << ex.what() << '\n';
        return 1;
    }
    return 0;
}
