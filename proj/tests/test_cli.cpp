#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "sgcn/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliRun {
    int code = -1;
    std::string output;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("sgcn_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        write_dataset(dir_ / "graph.csv");
    }
    void TearDown() override { fs::remove_all(dir_); }

    /// 80 users; edges touching one of the "bad" users are mostly negative.
    static void write_dataset(const fs::path& path) {
        std::mt19937_64 rng(5);
        std::bernoulli_distribution edge(0.12), bad(0.15), flip(0.05);
        std::vector<bool> is_bad(80);
        for (auto&& b : is_bad) b = bad(rng);
        std::ofstream out(path);
        for (int u = 0; u < 80; ++u)
            for (int v = u + 1; v < 80; ++v)
                if (edge(rng)) {
                    const bool friendly = (!is_bad[u] && !is_bad[v]) != flip(rng);
                    out << 100 + u << ',' << 100 + v << ',' << (friendly ? 3 : -4) << ",1400000000\n";
                }
    }

    CliRun run(const std::string& args) const {
        const fs::path log = dir_ / "log.txt";
        const std::string cmd = "cd " + quote(dir_.string()) + " && " + quote(SGCN_CLI_PATH) + " " + args + " >" +
                                quote(log.string()) + " 2>&1";
        const int status = std::system(cmd.c_str());
        CliRun r;
        r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        std::ifstream in(log);
        r.output.assign(std::istreambuf_iterator<char>(in), {});
        return r;
    }

    std::string hash(const fs::path& relative) const { return sgcn::content_hash(sgcn::read_file_bytes(dir_ / relative)); }

    static constexpr const char* kSmall = " --sse-dim 4 --d-hidden 4 --epochs 5 --batch-nodes 40 --quiet";

    fs::path dir_;
};

std::size_t count_lines(const fs::path& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

} // namespace

TEST_F(Cli, NoArgumentsIsUsageError) {
    const auto r = run("");
    EXPECT_NE(r.code, 0);
}

TEST_F(Cli, IngestReportsCounts) {
    const auto r = run("ingest --dataset graph.csv --out o");
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_NE(r.output.find("records "), std::string::npos);
    EXPECT_TRUE(fs::exists(dir_ / "o/graph.tsv"));
    EXPECT_TRUE(fs::exists(dir_ / "o/id_map.csv"));
    EXPECT_TRUE(fs::exists(dir_ / "o/manifest-ingest.json"));
}

TEST_F(Cli, EmptyDatasetFailsWithoutOutputs) {
    std::ofstream(dir_ / "empty.csv").close();
    const auto r = run("ingest --dataset empty.csv --out o");
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.output.find("no edges"), std::string::npos) << r.output;
    EXPECT_FALSE(fs::exists(dir_ / "o/graph.tsv"));
}

TEST_F(Cli, MissingDatasetFails) {
    const auto r = run("ingest --dataset nowhere.csv --out o");
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.output.find("nowhere.csv"), std::string::npos) << r.output;
}

TEST_F(Cli, UnknownMethodFails) {
    const auto r = run(std::string("train --dataset graph.csv --out o --method gcn") + kSmall);
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.output.find("gcn"), std::string::npos) << r.output;
}

TEST_F(Cli, TrianglesCensus) {
    std::ofstream(dir_ / "tri.csv") << "1,2,10,0\n2,3,-5,0\n1,3,1,0\n3,4,2,0\n4,5,-1,0\n5,1,3,0\n2,5,4,0\n";
    const auto r = run("triangles --dataset tri.csv --out o");
    ASSERT_EQ(r.code, 0) << r.output;
    std::ifstream in(dir_ / "o/triangles.csv");
    const std::string text((std::istreambuf_iterator<char>(in)), {});
    EXPECT_EQ(text, "type,count\nA,1\nB,0\nC,1\nD,0\n");
}

TEST_F(Cli, EvalBeforeTrainAsksForCheckpoint) {
    const auto r = run(std::string("eval --dataset graph.csv --out o") + kSmall);
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.output.find("run `sgcn train` first"), std::string::npos) << r.output;
    EXPECT_FALSE(fs::exists(dir_ / "o/report.csv"));
}

TEST_F(Cli, TrainIsReproducible) {
    ASSERT_EQ(run(std::string("train --dataset graph.csv --out a --seed 3") + kSmall).code, 0);
    ASSERT_EQ(run(std::string("train --dataset graph.csv --out b --seed 3") + kSmall).code, 0);
    EXPECT_EQ(hash("a/checkpoint.json"), hash("b/checkpoint.json"));
    EXPECT_EQ(hash("a/embedding.csv"), hash("b/embedding.csv"));
    EXPECT_EQ(count_lines(dir_ / "a/loss_history.csv"), 6u);
}

TEST_F(Cli, ManifestReplaysToSameOutputs) {
    ASSERT_EQ(run(std::string("train --dataset graph.csv --out a --seed 2") + kSmall).code, 0);
    nlohmann::json manifest;
    std::ifstream(dir_ / "a/manifest-train.json") >> manifest;
    EXPECT_EQ(manifest.at("inputs").at(0).at("hash"), hash("graph.csv"));
    std::string checkpoint_hash;
    for (const auto& o : manifest.at("outputs"))
        if (o.at("file") == "checkpoint.json") checkpoint_hash = o.at("hash");
    EXPECT_EQ(checkpoint_hash, hash("a/checkpoint.json"));

    const auto argv = manifest.at("argv").get<std::vector<std::string>>();
    std::string args;
    for (std::size_t k = 1; k < argv.size(); ++k) args += " " + quote(argv[k]);
    fs::remove_all(dir_ / "a");
    ASSERT_EQ(run(args).code, 0);
    EXPECT_EQ(hash("a/checkpoint.json"), checkpoint_hash);
}

TEST_F(Cli, TrainThenEvalWritesReports) {
    ASSERT_EQ(run(std::string("train --dataset graph.csv --out o --seed 1") + kSmall).code, 0);
    const auto r = run(std::string("eval --dataset graph.csv --out o"));
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(count_lines(dir_ / "o/report.csv"), 2u);
    std::ifstream in(dir_ / "o/report.csv");
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "dataset,method,seed,auc,f1,n_test_pos,n_test_neg");
    EXPECT_TRUE(row.starts_with("graph,sgcn-2,1,")) << row;
}

TEST_F(Cli, EvalRejectsCheckpointFromOtherData) {
    ASSERT_EQ(run(std::string("train --dataset graph.csv --out o") + kSmall).code, 0);
    std::ofstream(dir_ / "graph.csv", std::ios::app) << "500,501,1,0\n";
    const auto r = run("eval --dataset graph.csv --out o");
    EXPECT_NE(r.code, 0);
    EXPECT_NE(r.output.find("hash"), std::string::npos) << r.output;
}

TEST_F(Cli, EvalFromScratchOverSeeds) {
    const auto r = run(std::string("eval --dataset graph.csv --out o --method sgcn-1 --from-scratch --seeds 1,2") + kSmall);
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(count_lines(dir_ / "o/report.csv"), 3u);
    EXPECT_EQ(count_lines(dir_ / "o/aggregate.csv"), 2u);
}

TEST_F(Cli, SseEvalNeedsNoCheckpoint) {
    const auto r = run("eval --dataset graph.csv --out o --method sse --sse-dim 4 --seeds 0,1,2");
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(count_lines(dir_ / "o/report.csv"), 4u);
}

TEST_F(Cli, SweepLambdaCoversGrid) {
    const auto r = run(std::string("sweep-lambda --dataset graph.csv --out o --lambdas 0,5 --seeds 0,1") + kSmall);
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(count_lines(dir_ / "o/sweep_report.csv"), 5u);
    std::ifstream in(dir_ / "o/sweep_aggregate.csv");
    const std::string text((std::istreambuf_iterator<char>(in)), {});
    EXPECT_NE(text.find("sgcn-2/lambda=0,"), std::string::npos) << text;
    EXPECT_NE(text.find("sgcn-2/lambda=5,"), std::string::npos) << text;
}

TEST_F(Cli, ConfigFileWithFlagsTakingPrecedence) {
    std::ofstream(dir_ / "run.toml") << "dataset = \"graph.csv\"\nepochs = 4\nlambda = 2.5\nsse-dim = 4\nd-hidden = 4\n";
    const auto r = run("train --config run.toml --out o --epochs 2 --quiet");
    ASSERT_EQ(r.code, 0) << r.output;
    EXPECT_EQ(count_lines(dir_ / "o/loss_history.csv"), 3u);
    nlohmann::json ck;
    std::ifstream(dir_ / "o/checkpoint.json") >> ck;
    EXPECT_EQ(ck.at("train").at("lambda"), 2.5);
    EXPECT_EQ(ck.at("train").at("epochs"), 2);
}

TEST_F(Cli, FailedWriteLeavesNoPartialOutputs) {
    // a non-empty directory squatting on loss_history.csv makes the last rename fail
    fs::create_directories(dir_ / "o/loss_history.csv/occupied");
    const auto r = run(std::string("train --dataset graph.csv --out o") + kSmall);
    EXPECT_NE(r.code, 0);
    for (const auto& entry : fs::directory_iterator(dir_ / "o"))
        EXPECT_EQ(entry.path().filename(), "loss_history.csv") << "left behind: " << entry.path();
}
