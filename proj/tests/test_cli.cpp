#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dsm/cli.hpp"

using nlohmann::json;

namespace {

struct CliRun {
    int code;
    std::string out;
    std::string err;
};

CliRun run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = dsm::cli::run_subcommand(args, out, err);
    return {code, out.str(), err.str()};
}

json run_json(std::vector<std::string> args, int expect_code = 0) {
    const CliRun r = run(std::move(args));
    EXPECT_EQ(r.code, expect_code) << r.err;
    return json::parse(r.out);
}

}  // namespace

TEST(Cli, ClassifyRecord) {
    const json j = run_json({"classify", "--a", "0.5", "--b", "0.75"});
    const std::vector<std::string> keys{"a",     "b",     "period",  "type_k", "lambda",  "nu",
                                        "xi_re", "xi_im", "t_lower", "t_star", "t_upper", "status"};
    std::vector<std::string> got;
    for (auto it = j.begin(); it != j.end(); ++it) got.push_back(it.key());
    std::sort(got.begin(), got.end());
    auto want = keys;
    std::sort(want.begin(), want.end());
    EXPECT_EQ(got, want);
    EXPECT_EQ(j["a"].get<double>(), -0.5);
    EXPECT_EQ(j["b"].get<double>(), 0.75);
    EXPECT_EQ(j["period"].get<int>(), 1);
    EXPECT_EQ(j["type_k"].get<int>(), 0);
    EXPECT_NEAR(j["lambda"].get<double>(), 0.5, 1e-12);
    EXPECT_NEAR(j["nu"].get<double>(), M_PI / 2, 1e-6);
    EXPECT_NEAR(j["xi_re"].get<double>(), -0.5, 1e-6);
    EXPECT_TRUE(j["t_star"].is_null());
    EXPECT_EQ(j["status"], "ok");

    const json none = run_json({"classify", "--a", "0", "--b", "0.3"});
    EXPECT_EQ(none["status"], "no_attracting_cycle");
    EXPECT_TRUE(none["period"].is_null());
}

TEST(Cli, UniformizeAndInvertRoundTrip) {
    const json u = run_json({"uniformize", "--a", "0.45", "--b", "0.9"});
    ASSERT_EQ(u["status"], "ok");
    const double re = u["xi_re"], im = u["xi_im"];
    EXPECT_NEAR(std::hypot(re, im), u["lambda"].get<double>(), 1e-10);
    const json inv = run_json({"invert", "--xi-re", std::to_string(re), "--xi-im", std::to_string(im)});
    EXPECT_NEAR(inv["a"].get<double>(), 0.45, 1e-5);
    EXPECT_NEAR(inv["b"].get<double>(), 0.9, 1e-5);
    EXPECT_NEAR(inv["xi_re"].get<double>(), re, 1e-6);

    const json sym = run_json({"invert", "--xi-re", "-0.2", "--xi-im", "0"});
    EXPECT_NEAR(std::abs(sym["a"].get<double>()), 0.5, 1e-6);
    EXPECT_NEAR(sym["b"].get<double>(), 0.9, 1e-6);
}

TEST(Cli, DomainErrorsExitTwo) {
    const CliRun r = run({"uniformize", "--a", "0", "--b", "0.3"});
    EXPECT_EQ(r.code, 2);
    EXPECT_EQ(json::parse(r.out)["status"], "not_in_tongue");
    EXPECT_FALSE(r.err.empty());
    EXPECT_EQ(run({"classify", "--a", "0", "--b", "1.5"}).code, 2);
    EXPECT_EQ(json::parse(run({"invert", "--xi-re", "0.3", "--xi-im", "0"}).out)["status"], "invalid_argument");
}

TEST(Cli, UsageErrorsExitOne) {
    EXPECT_EQ(run({}).code, 1);
    EXPECT_EQ(run({"classify", "--a", "0.5"}).code, 1);
    EXPECT_EQ(run({"classify", "--a", "x", "--b", "0.5"}).code, 1);
    EXPECT_EQ(run({"frobnicate"}).code, 1);
    EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, Superattracting) {
    const json one = run_json({"superattracting", "--q", "1"});
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0]["a"].get<double>(), -0.5);
    EXPECT_EQ(one[0]["type_k"].get<int>(), 0);
    EXPECT_EQ(run_json({"superattracting", "--q", "3"}).size(), 6u);
}

TEST(Cli, DimensionRayFieldSmoothness) {
    const json d = run_json({"dimension", "--a", "0.5", "--b", "0.75", "--tol", "1e-2"});
    EXPECT_EQ(d["status"], "ok");
    EXPECT_LE(d["t_upper"].get<double>() - d["t_lower"].get<double>(), 1e-2);
    EXPECT_GT(d["t_star"].get<double>(), 0.6);
    EXPECT_LT(d["t_star"].get<double>(), 0.8);

    const CliRun ray = run({"ray", "--nu", "1.5707963267948966", "--steps", "3"});
    ASSERT_EQ(ray.code, 0) << ray.err;
    std::istringstream rs(ray.out);
    std::string line;
    std::getline(rs, line);
    EXPECT_EQ(line, "lambda,a,b");
    int rows = 0;
    while (std::getline(rs, line)) {
        double lam, a, b;
        ASSERT_EQ(std::sscanf(line.c_str(), "%lf,%lf,%lf", &lam, &a, &b), 3);
        EXPECT_NEAR(b, 1 - lam / 2, 1e-6);
        ++rows;
    }
    EXPECT_EQ(rows, 3);

    const std::string csv = ::testing::TempDir() + "dsm_field.csv";
    const CliRun field = run({"dimension-field", "--n", "8", "--workers", "2", "--out", csv});
    ASSERT_EQ(field.code, 0) << field.err;
    const json sm = run_json({"smoothness", "--in", csv});
    EXPECT_TRUE(sm["pass"].get<bool>());
    EXPECT_EQ(sm["samples"].get<int>(), 8);
    EXPECT_FALSE(sm["fits"].empty());
    std::remove(csv.c_str());
    EXPECT_EQ(run({"smoothness", "--in", "/nonexistent.csv"}).code, 2);
}

TEST(Cli, ScanWritesPpmAndProvenance) {
    const std::string ppm = ::testing::TempDir() + "dsm_scan.ppm";
    const json j = run_json({"scan", "--width", "20", "--height", "10", "--qmax", "4", "--workers", "2", "--out", ppm});
    EXPECT_EQ(j["width"].get<int>(), 20);
    EXPECT_EQ(j["content_hash"].get<std::string>().size(), 40u);
    std::ifstream f(ppm, std::ios::binary);
    std::string magic;
    f >> magic;
    EXPECT_EQ(magic, "P6");
    std::remove(ppm.c_str());
    EXPECT_EQ(run({"scan", "--bmax", "2", "--out", ppm}).code, 2);
}
