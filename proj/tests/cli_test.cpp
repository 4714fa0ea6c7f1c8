#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli_app.hpp"

using velliptic::cli::json;
using velliptic::cli::run;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = run(std::move(args), out, err);
    return {code, out.str(), err.str()};
}

std::string config(const std::string& name) { return std::string(VELLIPTIC_CONFIG_DIR) + "/" + name; }

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

bool has_line(const std::string& text, const std::string& line) {
    std::istringstream is(text);
    for (std::string l; std::getline(is, l);) {
        if (l == line) return true;
    }
    return false;
}

}  // namespace

TEST(Cli, SelftestPassesOnDefaults) {
    const Outcome o = invoke({"selftest"});
    EXPECT_EQ(o.code, 0) << o.out << o.err;
    EXPECT_NE(o.out.find("status=pass"), std::string::npos);
    EXPECT_EQ(o.out.find("status=fail"), std::string::npos);
}

TEST(Cli, SelftestPassesOnSampleConfigs) {
    for (const char* name : {"epsilon.json", "nonrigid.json", "expressions.json", "classical.json"}) {
        const Outcome o = invoke({"selftest", "--config", config(name)});
        EXPECT_EQ(o.code, 0) << name << "\n" << o.out << o.err;
    }
}

TEST(Cli, RigidityScanReportsNonRigidStructure) {
    const Outcome o = invoke({"rigidity", "scan", "--config", config("nonrigid.json"), "--json"});
    ASSERT_EQ(o.code, 0) << o.err;
    const json rec = json::parse(o.out);
    EXPECT_GT(rec["max_residual"].get<double>(), 0.1);
    EXPECT_FALSE(rec["rigid"].get<bool>());
}

TEST(Cli, CpReconstructRefusesNonRigid) {
    const Outcome o = invoke({"cp", "reconstruct", "--config", config("nonrigid.json")});
    EXPECT_EQ(o.code, 4);
    EXPECT_NE(o.err.find("not-rigid"), std::string::npos) << o.err;
    EXPECT_NE(o.err.find("max |G|"), std::string::npos) << o.err;
}

TEST(Cli, CpReconstructDefaultAndClassical) {
    const Outcome a = invoke({"cp", "reconstruct"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_TRUE(has_line(a.out, "pass=true")) << a.out;
    const Outcome b = invoke({"cp", "reconstruct", "--config", config("classical.json"), "--json"});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_LE(json::parse(b.out)["residual"].get<double>(), 1e-6);
}

TEST(Cli, CsvHeaders) {
    const Outcome a = invoke({"structure", "eval"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(first_line(a.out), "x,y,alpha,beta,delta,g0,g1,re_lambda,im_lambda");
    std::size_t lines = 0;
    for (char c : a.out) lines += c == '\n';
    EXPECT_EQ(lines, 26U);
    const Outcome b = invoke({"burgers", "solve"});
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(first_line(b.out), "x,y,re_lambda,im_lambda,jacobian_modulus");
    EXPECT_NE(b.err.find("command=burgers solve"), std::string::npos);
}

TEST(Cli, OutputFileReceivesTable) {
    const std::filesystem::path path = std::filesystem::temp_directory_path() / "velliptic_cli_test.csv";
    const Outcome o = invoke({"structure", "eval", "--output", path.string()});
    ASSERT_EQ(o.code, 0) << o.err;
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header, "x,y,alpha,beta,delta,g0,g1,re_lambda,im_lambda");
    EXPECT_TRUE(has_line(o.out, "command=structure eval")) << o.out;
    std::filesystem::remove(path);
}

TEST(Cli, JsonIsASingleRecord) {
    for (std::vector<std::string> cmd : {std::vector<std::string>{"residue"}, {"weight", "solve"}, {"burgers", "solve"},
                                         {"second-order", "verify"}, {"jets", "check"}}) {
        cmd.push_back("--json");
        const Outcome o = invoke(cmd);
        ASSERT_EQ(o.code, 0) << cmd[0] << ": " << o.err;
        ASSERT_EQ(std::count(o.out.begin(), o.out.end(), '\n'), 1) << o.out;
        const json rec = json::parse(o.out);
        EXPECT_TRUE(rec.is_object());
        EXPECT_TRUE(rec.contains("command"));
    }
    const json b = json::parse(invoke({"burgers", "solve", "--json"}).out);
    EXPECT_EQ(b["table"].size(), 25U);
}

TEST(Cli, DottedOverrides) {
    const Outcome a = invoke({"weight", "solve", "--json", "--numerics.point", "[0.3,-0.2]"});
    ASSERT_EQ(a.code, 0) << a.err;
    const json rec = json::parse(a.out);
    EXPECT_DOUBLE_EQ(rec["point"][0].get<double>(), 0.3);
    EXPECT_DOUBLE_EQ(rec["point"][1].get<double>(), -0.2);
    const Outcome b = invoke({"structure", "eval", "--structure.epsilon=0", "--json"});
    ASSERT_EQ(b.code, 0) << b.err;
    for (const auto& row : json::parse(b.out)["table"]) EXPECT_EQ(row["alpha"].get<double>(), 1.0);
}

TEST(Cli, AffineProfileCrossing) {
    const Outcome o = invoke({"burgers", "solve", "--config", config("affine_crossing.json"), "--json"});
    const json rec = json::parse(o.out);
    ASSERT_TRUE(rec["crossing"].get<bool>()) << o.out;
    EXPECT_NEAR(rec["crossing_x"].get<double>(), 1.0, 1e-3);
}

TEST(Cli, ConfigErrorsExitThree) {
    EXPECT_EQ(invoke({"structure", "eval", "--structure.kind", "bogus"}).code, 3);
    EXPECT_EQ(invoke({"structure", "eval", "--config", "/nonexistent/config.json"}).code, 3);
    EXPECT_EQ(invoke({"frobnicate"}).code, 3);
    EXPECT_EQ(invoke({}).code, 3);
    const Outcome p = invoke({"structure", "eval", "--structure.kind", "expressions", "--structure.alpha", "1 +",
                              "--structure.beta", "0"});
    EXPECT_EQ(p.code, 3);
    EXPECT_NE(p.err.find("parse-error"), std::string::npos) << p.err;
}

TEST(Cli, DomainViolationsExitFour) {
    EXPECT_EQ(invoke({"cp", "reconstruct", "--numerics.zeta", "[20,0]"}).code, 4);
    EXPECT_EQ(invoke({"structure", "eval", "--structure.epsilon", "2", "--numerics.grid.x", "[0.5,0.5,1]",
                      "--numerics.grid.y", "[0,0,1]"})
                  .code,
              4);
}

TEST(Cli, OutputIsDeterministic) {
    for (std::vector<std::string> cmd : {std::vector<std::string>{"cp", "reconstruct"}, {"selftest"},
                                         {"structure", "eval"}, {"jets", "check", "--json"}}) {
        const Outcome a = invoke(cmd);
        const Outcome b = invoke(cmd);
        EXPECT_EQ(a.code, b.code);
        EXPECT_EQ(a.out, b.out) << cmd[0];
        EXPECT_EQ(a.err, b.err) << cmd[0];
    }
}

TEST(Cli, HelpExitsZero) {
    const Outcome o = invoke({"--help"});
    EXPECT_EQ(o.code, 0);
    EXPECT_NE(o.out.find("selftest"), std::string::npos);
}
