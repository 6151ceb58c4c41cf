#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#ifndef SUBFOREST_CLI_PATH
#error "SUBFOREST_CLI_PATH must point at the subforest binary"
#endif

namespace {

struct RunResult {
    int status = 0;
    std::string output; // stdout + stderr
};

RunResult run_cli(const std::string& args, const std::string& extra_env = "") {
    const std::string log = testing::TempDir() + "/cli_out.txt";
    std::string cmd = extra_env;
    if (!cmd.empty()) cmd += " ";
    cmd += std::string(SUBFOREST_CLI_PATH) + " " + args + " > " + log + " 2>&1";
    const int raw = std::system(cmd.c_str());
    RunResult res;
    res.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    std::ifstream in(log);
    std::stringstream buf;
    buf << in.rdbuf();
    res.output = buf.str();
    return res;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    EXPECT_TRUE(in.good()) << path;
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string tmp(const std::string& name) { return testing::TempDir() + "/" + name; }

} // namespace

TEST(Cli, GenerateWritesDataAndManifest) {
    const auto out = tmp("gen.csv");
    const auto res = run_cli("generate --model 5 --n 30 --seed 4 --out " + out);
    ASSERT_EQ(res.status, 0) << res.output;
    const auto csv = slurp(out);
    EXPECT_EQ(csv.substr(0, 6), "x1,x2,");
    const auto manifest = slurp(out + ".manifest");
    EXPECT_NE(manifest.find("subcommand = generate"), std::string::npos);
    EXPECT_NE(manifest.find("seed = 4"), std::string::npos);
    EXPECT_NE(manifest.find("n = 30"), std::string::npos);

    // rerun: byte-identical artifact
    const auto first = csv;
    ASSERT_EQ(run_cli("generate --model 5 --n 30 --seed 4 --out " + out).status, 0);
    EXPECT_EQ(slurp(out), first);
}

TEST(Cli, UnknownModelFailsWithOneLineError) {
    const auto res = run_cli("generate --model 9 --out " + tmp("x.csv"));
    EXPECT_NE(res.status, 0);
    EXPECT_NE(res.output.find("error: unknown model id 9"), std::string::npos);
}

TEST(Cli, TrainDefaultsMirrorTheStandardForest) {
    const auto data = tmp("train_data.csv");
    ASSERT_EQ(run_cli("generate --model 5 --n 40 --seed 1 --out " + data).status, 0);
    const auto forest = tmp("forest.txt");
    const auto res =
        run_cli("train --data " + data + " --kind cart --trees 3 --seed 2 --out " + forest);
    ASSERT_EQ(res.status, 0) << res.output;
    const auto manifest = slurp(forest + ".manifest");
    EXPECT_NE(manifest.find("resample = bootstrap"), std::string::npos);
    EXPECT_NE(manifest.find("mtry = 7"), std::string::npos); // ceil(20/3)
    EXPECT_NE(manifest.find("nodesize = 5"), std::string::npos);

    // default tree count is 500
    const auto probe = run_cli("train --data " + data + " --kind cart --seed 2 --out " + forest);
    ASSERT_EQ(probe.status, 0);
    EXPECT_NE(slurp(forest + ".manifest").find("trees = 500"), std::string::npos);
}

TEST(Cli, MedianRejectsCartOnlyFlags) {
    const auto data = tmp("med_data.csv");
    ASSERT_EQ(run_cli("generate --model 5 --n 40 --seed 1 --out " + data).status, 0);
    const auto res = run_cli("train --data " + data + " --kind median --depth 2 --mtry 3 --out " +
                             tmp("f.txt"));
    EXPECT_NE(res.status, 0);
    EXPECT_NE(res.output.find("error:"), std::string::npos);
    EXPECT_NE(res.output.find("cart-forest parameters"), std::string::npos);
}

TEST(Cli, MedianForestTrainsAndScores) {
    const auto data = tmp("med_ok_data.csv");
    ASSERT_EQ(run_cli("generate --model 5 --n 40 --seed 1 --out " + data).status, 0);
    const auto forest = tmp("med_ok.txt");
    const auto res = run_cli("train --data " + data +
                             " --kind median --resample subsample --sampsize 32 --depth 2 "
                             "--trees 4 --seed 2 --out " +
                             forest);
    ASSERT_EQ(res.status, 0) << res.output;
    const auto manifest = slurp(forest + ".manifest");
    EXPECT_NE(manifest.find("kind = median"), std::string::npos);
    EXPECT_NE(manifest.find("depth = 2"), std::string::npos);
    EXPECT_NE(manifest.find("sampsize = 32"), std::string::npos);
    EXPECT_EQ(run_cli("risk --forest " + forest + " --data " + data).status, 0);

    // infeasible depth for the subsample size
    const auto bad = run_cli("train --data " + data +
                             " --kind median --resample subsample --sampsize 32 --depth 4 "
                             "--out " + tmp("bad.txt"));
    EXPECT_NE(bad.status, 0);
    EXPECT_NE(bad.output.find("a_n * 2^-k >= 4"), std::string::npos);
}

TEST(Cli, PredictAndRiskAgree) {
    const auto data = tmp("pr_data.csv");
    ASSERT_EQ(run_cli("generate --model 5 --n 50 --seed 6 --out " + data).status, 0);
    const auto forest = tmp("pr_forest.txt");
    ASSERT_EQ(run_cli("train --data " + data + " --kind cart --trees 5 --seed 7 --out " + forest)
                  .status,
              0);
    const auto preds = tmp("preds.csv");
    ASSERT_EQ(run_cli("predict --forest " + forest + " --data " + data + " --out " + preds)
                  .status,
              0);
    EXPECT_EQ(slurp(preds).substr(0, 6), "y_hat\n");

    const auto res = run_cli("risk --forest " + forest + " --data " + data);
    ASSERT_EQ(res.status, 0);
    EXPECT_NE(res.output.find("risk = "), std::string::npos);
}

TEST(Cli, ConfigFileFillsDefaultsAndFlagsWin) {
    const auto data = tmp("cfg_data.csv");
    ASSERT_EQ(run_cli("generate --model 5 --n 40 --seed 1 --out " + data).status, 0);
    const auto cfg = tmp("run.cfg");
    {
        std::ofstream out(cfg);
        out << "# shared experiment settings\n";
        out << "trees = 100\n";
        out << "seed = 9\n";
    }
    const auto forest = tmp("cfg_forest.txt");
    ASSERT_EQ(run_cli("train --data " + data + " --kind cart --config " + cfg + " --out " +
                      forest)
                  .status,
              0);
    auto manifest = slurp(forest + ".manifest");
    EXPECT_NE(manifest.find("trees = 100"), std::string::npos);
    EXPECT_NE(manifest.find("seed = 9"), std::string::npos);

    // explicit flag beats the file
    ASSERT_EQ(run_cli("train --data " + data + " --kind cart --config " + cfg +
                      " --trees 50 --out " + forest)
                  .status,
              0);
    manifest = slurp(forest + ".manifest");
    EXPECT_NE(manifest.find("trees = 50"), std::string::npos);
}

TEST(Cli, ManifestReplayIsByteIdentical) {
    const auto out = tmp("sweep.csv");
    const auto res = run_cli(
        "sweep --model 1 --n 60 --param maxnodes --grid-values 4,16,32 --reps 2 --trees 4 "
        "--seed 7 --out " +
        out);
    ASSERT_EQ(res.status, 0) << res.output;
    const auto csv = slurp(out);
    const auto manifest = slurp(out + ".manifest");

    ASSERT_EQ(run_cli("--from-manifest " + out + ".manifest").status, 0);
    EXPECT_EQ(slurp(out), csv);
    EXPECT_EQ(slurp(out + ".manifest"), manifest);
}

TEST(Cli, SeedRequiredUnderCi) {
    const auto out = tmp("ci.csv");
    const auto res = run_cli("generate --model 5 --n 10 --out " + out, "CI=1");
    EXPECT_NE(res.status, 0);
    EXPECT_NE(res.output.find("--seed is required"), std::string::npos);
    EXPECT_EQ(run_cli("generate --model 5 --n 10 --seed 3 --out " + out, "CI=1").status, 0);
}

TEST(Cli, BoundEmitsConstantsAndTable) {
    const auto out = tmp("bound.csv");
    ASSERT_EQ(run_cli("bound --d 1 --sigma2 1 --L 1 --n 1024 --out " + out).status, 0);
    const auto csv = slurp(out);
    EXPECT_NE(csv.find("# beta = 0.25"), std::string::npos);
    EXPECT_NE(csv.find("# C3 = 12"), std::string::npos);
    EXPECT_NE(csv.find("# k_star_real = 9.104113"), std::string::npos);
    EXPECT_NE(csv.find("# rate_exponent = -0.6666666666666"), std::string::npos);
    EXPECT_NE(csv.find("k,bound,estimation_term,approximation_term"), std::string::npos);
}

TEST(Cli, VerifyLemmaRuns) {
    const auto out = tmp("lemma.csv");
    const auto res =
        run_cli("verify-lemma --d 2 --k 2 --a-n 64 --trials 500 --seed 3 --out " + out);
    ASSERT_EQ(res.status, 0) << res.output;
    EXPECT_NE(res.output.find("estimate = "), std::string::npos);
    EXPECT_NE(slurp(out).find("bound_ok"), std::string::npos);
}

TEST(Cli, OptimalEmitsSummaryTable) {
    const auto out = tmp("optimal.csv");
    const auto res = run_cli(
        "optimal --model 1 --param maxnodes --n-list 60,100 --grid 0.2,0.6,1.0 --reps 2 "
        "--trees 4 --seed 13 --out " +
        out);
    ASSERT_EQ(res.status, 0) << res.output;
    const auto csv = slurp(out);
    EXPECT_EQ(csv.substr(0, 16), "n,optimum,ratio\n");
    EXPECT_NE(csv.find("\n60,"), std::string::npos);
    EXPECT_NE(csv.find("\n100,"), std::string::npos);
}

TEST(Cli, RateStudyReportsSlope) {
    const auto out = tmp("rate.csv");
    const auto res = run_cli(
        "rate-study --n-list 64,128,256 --reps 2 --test-points 200 --seed 21 --out " + out);
    ASSERT_EQ(res.status, 0) << res.output;
    EXPECT_NE(res.output.find("slope = "), std::string::npos);
    const auto csv = slurp(out);
    EXPECT_NE(csv.find("# slope = "), std::string::npos);
    EXPECT_NE(csv.find("n,k,k_real,clipped,mean_risk,std_risk"), std::string::npos);
}

TEST(Cli, TrainIsThreadCountInvariant) {
    const auto data = tmp("thr_data.csv");
    ASSERT_EQ(run_cli("generate --model 5 --n 60 --seed 8 --out " + data).status, 0);
    const auto f1 = tmp("thr1.txt"), f8 = tmp("thr8.txt");
    ASSERT_EQ(run_cli("train --data " + data +
                      " --kind cart --trees 12 --seed 5 --threads 1 --out " + f1)
                  .status,
              0);
    ASSERT_EQ(run_cli("train --data " + data +
                      " --kind cart --trees 12 --seed 5 --threads 8 --out " + f8)
                  .status,
              0);
    EXPECT_EQ(slurp(f1), slurp(f8));
}
