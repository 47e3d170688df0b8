#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hardy/cli.hpp"

using namespace hardy;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome run_mode(const std::string& mode, const json& file, json overrides)
{
    std::ostringstream out, err;
    Outcome o;
    o.code = cli::run_guarded(mode, file, overrides, out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override
    {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("hardy_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path sub(const std::string& name) const
    {
        fs::create_directories(dir_ / name);
        return dir_ / name;
    }

    static std::string slurp(const fs::path& p)
    {
        std::ifstream is(p, std::ios::binary);
        std::stringstream ss;
        ss << is.rdbuf();
        return ss.str();
    }

    fs::path dir_;
};

} // namespace

TEST_F(CliTest, ConstantClassicalHardy)
{
    const Outcome o = run_mode("constant", json::object(),
                               {{"out", dir_.string()}, {"params", {{"p", 2.0}, {"alpha", -2.0}, {"k", 3}}}});
    ASSERT_EQ(o.code, cli::kOk) << o.err;
    EXPECT_NE(o.out.find("achieved=4 "), std::string::npos) << o.out;
    const std::string csv = slurp(dir_ / "constant.csv");
    EXPECT_EQ(csv, "p,alpha,k,constant,infimum\n2,-2,3,4,0.25\n");
}

TEST_F(CliTest, JsonTablesCarrySchemaVersion)
{
    const Outcome o = run_mode("constant", json::object(), {{"out", dir_.string()}, {"format", "json"}});
    ASSERT_EQ(o.code, cli::kOk) << o.err;
    const json j = json::parse(slurp(dir_ / "constant.json"));
    EXPECT_EQ(j.at("schema_version"), cli::kSchemaVersion);
    EXPECT_EQ(j.at("columns").at(3), "constant");
    EXPECT_DOUBLE_EQ(j.at("rows").at(0).at(3).get<double>(), 4.0 / 9.0);
}

TEST_F(CliTest, EmptyLadderIsRejected)
{
    Outcome o = run_mode("eps-sweep", json::object(), {{"out", dir_.string()}, {"eps", json::array()}});
    EXPECT_EQ(o.code, cli::kValidation);
    EXPECT_NE(o.err.find("eps ladder must not be empty"), std::string::npos) << o.err;
    o = run_mode("split-demo", json::object(), {{"out", dir_.string()}, {"lambda", json::array()}});
    EXPECT_EQ(o.code, cli::kValidation);
    EXPECT_TRUE(fs::is_empty(dir_));
}

TEST_F(CliTest, EveryParameterClauseIsReachable)
{
    struct Case {
        const char* mode;
        json params;
        const char* message;
    };
    const Case cases[] = {
        {"symmetrize", {{"N", 0}, {"k", 0}, {"p", 2.0}, {"beta", 0.0}}, "N >= 1 violated"},
        {"symmetrize", {{"N", 4}, {"k", 5}}, "1 <= k <= N violated"},
        {"constant", {{"p", 1.0}}, "p > 1 violated"},
        {"eps-sweep", {{"p", 0.5}}, "p > 1 violated"},
        {"constant", {{"alpha", -3.0}, {"k", 3}}, "alpha + k > 0 violated"},
        {"minimize", {{"beta", -1.0}}, "beta >= 0 violated"},
        {"symmetrize", {{"N", 4}, {"k", 2}, {"p", 2.0}, {"beta", 2.0}}, "beta < k violated"},
        {"product-sweep", {{"N", 5}, {"k", 4}, {"p", 2.0}, {"beta", 3.0}}, "beta <= p violated"},
        {"minimize", {{"N", 4}, {"k", 4}, {"p", 4.5}, {"beta", 1.0}}, "p < N violated"},
        {"minimize", {{"q", 5.0}}, "q = p(N-beta)/(N-p) violated"},
        {"constant", {{"k", 2.5}}, "params.k must be an integer"},
        {"symmetrize", {{"beta", nullptr}}, "params.beta missing"},
    };
    for (const auto& c : cases) {
        const Outcome o = run_mode(c.mode, json::object(), {{"out", dir_.string()}, {"params", c.params}});
        EXPECT_EQ(o.code, cli::kValidation) << c.mode << " " << c.params.dump();
        EXPECT_NE(o.err.find(c.message), std::string::npos) << o.err;
    }
    EXPECT_TRUE(fs::is_empty(dir_));
}

TEST_F(CliTest, OtherValidationErrors)
{
    const json out{{"out", dir_.string()}};
    json o = out;
    o["format"] = "xml";
    EXPECT_EQ(run_mode("constant", json::object(), o).code, cli::kValidation);
    o = out;
    o["refine"] = -1;
    EXPECT_EQ(run_mode("constant", json::object(), o).code, cli::kValidation);
    o = out;
    o["eps"] = {0.1, -0.1};
    EXPECT_EQ(run_mode("eps-sweep", json::object(), o).code, cli::kValidation);
    o = out;
    o["eps"] = {0.1, 0.05};
    EXPECT_EQ(run_mode("product-sweep", json::object(), o).code, cli::kValidation);
    o = out;
    o["trials"] = 0;
    EXPECT_EQ(run_mode("symmetrize", json::object(), o).code, cli::kValidation);
    EXPECT_EQ(run_mode("constant", {{"mode", "minimize"}}, out).code, cli::kValidation);
    EXPECT_EQ(run_mode("eps-sweep", json::object(), {{"out", dir_.string()}, {"params", {{"N", 4}}}}).code,
              cli::kValidation);
    EXPECT_EQ(run_mode("constant", json::object(), {{"out", dir_.string()}, {"seed", "seven"}}).code,
              cli::kValidation);
    EXPECT_EQ(run_mode("constant", json::object(), {{"out", dir_.string()}, {"seed", -3}}).code, cli::kValidation);
}

TEST_F(CliTest, MissingOutputDirectoryIsAnIoError)
{
    const Outcome o = run_mode("constant", json::object(), {{"out", (dir_ / "missing").string()}});
    EXPECT_EQ(o.code, cli::kIo);
    EXPECT_NE(o.err.find("output directory does not exist"), std::string::npos);
    EXPECT_THROW(cli::load_config_file((dir_ / "none.json").string()), IoError);
}

TEST_F(CliTest, ConfigFileLoadingAndFlagPrecedence)
{
    const fs::path cfg = dir_ / "cfg.json";
    std::ofstream(cfg) << R"({"mode": "constant", "params": {"p": 3.0, "alpha": 0.0, "k": 3}})";
    const json file = cli::load_config_file(cfg.string());

    const fs::path a = sub("a");
    Outcome o = run_mode("constant", file, {{"out", a.string()}});
    ASSERT_EQ(o.code, cli::kOk) << o.err;
    EXPECT_NE(o.out.find("achieved=1 "), std::string::npos) << o.out;

    o = run_mode("constant", file, {{"out", a.string()}, {"params", {{"p", 2.0}}}});
    ASSERT_EQ(o.code, cli::kOk) << o.err;
    EXPECT_NE(o.out.find("achieved=0.4444444444"), std::string::npos) << o.out;

    std::ofstream(dir_ / "broken.json") << "{ not json";
    EXPECT_THROW(cli::load_config_file((dir_ / "broken.json").string()), ValidationError);
}

TEST_F(CliTest, RunsAreByteIdentical)
{
    for (const char* name : {"a", "b"}) {
        const fs::path d = sub(name);
        const json common{{"out", d.string()}, {"seed", 11}};
        json m = common;
        m["inits"] = 2;
        m["grid"] = {{"n", 12}};
        ASSERT_EQ(run_mode("minimize", json::object(), m).code, cli::kOk);
        json e = common;
        e["grid"] = {{"n", 256}};
        ASSERT_EQ(run_mode("eps-sweep", json::object(), e).code, cli::kOk);
        json s = common;
        s["trials"] = 3;
        s["grid"] = {{"n", 16}};
        ASSERT_EQ(run_mode("symmetrize", json::object(), s).code, cli::kOk);
    }
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
        const fs::path other = dir_ / "b" / entry.path().filename();
        ASSERT_TRUE(fs::exists(other)) << other;
        EXPECT_EQ(slurp(entry.path()), slurp(other)) << entry.path().filename();
        ++files;
    }
    EXPECT_GE(files, 10u);
    const json trace = json::parse(slurp(dir_ / "a" / "minimize_trace_0.json"));
    EXPECT_EQ(trace.at("seed"), 11);
    EXPECT_TRUE(trace.at("monotone").get<bool>());
}

TEST_F(CliTest, EveryModeRunsOnSmallInputs)
{
    const json out{{"out", dir_.string()}};
    json o = out;
    o["eps"] = {0.5};
    o["lambda"] = {2.0};
    o["grid"] = {{"n_s", 128}, {"n_t", 16}};
    EXPECT_EQ(run_mode("product-sweep", json::object(), o).code, cli::kOk);
    EXPECT_TRUE(fs::exists(dir_ / "product_sweep.csv"));

    o = out;
    o["lambda"] = {4.0};
    o["grid"] = {{"n_s", 32}, {"n_t", 16}};
    const Outcome split = run_mode("split-demo", json::object(), o);
    EXPECT_EQ(split.code, cli::kOk) << split.err;
    EXPECT_TRUE(fs::exists(dir_ / "split_demo_summary.json"));

    o = out;
    o["samples"] = 100;
    o["trials"] = 5;
    o["grid"] = {{"n", 8}};
    const Outcome props = run_mode("properties", json::object(), o);
    EXPECT_EQ(props.code, cli::kOk) << props.err;
    const json pj = json::parse(slurp(dir_ / "properties.json"));
    EXPECT_EQ(pj.at("convexity").at("violations"), 0);
    EXPECT_NE(props.out.find("achieved=0 "), std::string::npos) << props.out;
}
