#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "jetforms/cli.hpp"

using namespace jetforms;

static std::string problems_dir() {
  return (std::filesystem::path(__FILE__).parent_path().parent_path() / "problems").string();
}

static int run_cli(std::vector<std::string> args) {
  std::vector<const char*> argv{"jetforms"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

static std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) {
    path = (std::filesystem::temp_directory_path() / name).string();
  }
  ~TempFile() { std::remove(path.c_str()); }
};

TEST_CASE("el outputs the source form") {
  TempFile out("jf_el.txt");
  CHECK(run_cli({"el", problems_dir() + "/mech_oscillator.jf", "--out", out.path}) == 0);
  std::string doc = slurp(out.path);
  CHECK(doc.find("q:") != std::string::npos);
  CHECK(doc.find("D(q,0,0)") != std::string::npos);
}

TEST_CASE("json output round-trips through the parser") {
  TempFile out("jf_lepage.json");
  std::string file = problems_dir() + "/mech_oscillator.jf";
  CHECK(run_cli({"lepage", "--kind", "principal", file, "--format", "json", "--out", out.path}) ==
        0);
  auto j = nlohmann::json::parse(slurp(out.path));
  CHECK(j["degree"] == 1);
  // rebuild the chart and compare against a direct computation
  dsl::Problem pr = dsl::elaborate(dsl::parse(slurp(file)));
  DiffForm direct = principal_lepage(*pr.lagrangian).form;
  DiffForm parsed = form_from_json(j, pr.chart);
  CHECK((parsed - direct).is_zero());
}

TEST_CASE("json output is deterministic") {
  TempFile a("jf_det_a.json"), b("jf_det_b.json");
  std::string file = problems_dir() + "/kg.jf";
  std::vector<std::string> args{"check", "--closure", "--numeric", "5", "--seed", "9",
                                file,    "--format",  "json"};
  auto with_out = [&](const std::string& o) {
    auto v = args;
    v.push_back("--out");
    v.push_back(o);
    return v;
  };
  CHECK(run_cli(with_out(a.path)) == 0);
  CHECK(run_cli(with_out(b.path)) == 0);
  CHECK(slurp(a.path) == slurp(b.path));
  CHECK(!slurp(a.path).empty());
}

TEST_CASE("latex output for the canonical form") {
  TempFile out("jf_phi.tex");
  CHECK(run_cli({"lepage", "--kind", "canonical", problems_dir() + "/kg.jf", "--format", "latex",
                 "--out", out.path}) == 0);
  std::string doc = slurp(out.path);
  CHECK(doc.find("\\omega^{\\phi}") != std::string::npos);
  CHECK(doc.find("\\wedge") != std::string::npos);
  CHECK(doc.find("_{,") != std::string::npos);  // first derivatives of phi
}

TEST_CASE("split decomposes the Lagrangian") {
  TempFile out("jf_split.txt");
  CHECK(run_cli({"split", problems_dir() + "/mech_oscillator.jf", "--out", out.path}) == 0);
  std::string doc = slurp(out.path);
  CHECK(doc.find("lambda_VT:") != std::string::npos);
  CHECK(doc.find("d_alpha:") != std::string::npos);
}

TEST_CASE("noether current via --xi") {
  TempFile out("jf_noether.txt");
  CHECK(run_cli({"noether", "--xi", "base:0", problems_dir() + "/mech_oscillator.jf", "--out",
                 out.path}) == 0);
  std::string doc = slurp(out.path);
  CHECK(doc.find("D(q,0)^2") != std::string::npos);
  // vertical symmetry spec parses
  TempFile out2("jf_noether2.txt");
  CHECK(run_cli({"noether", "--xi", "q=q", problems_dir() + "/mech_oscillator.jf", "--out",
                 out2.path}) == 0);
}

TEST_CASE("verification suites succeed on shipped problems") {
  CHECK(run_cli({"check", "--homotopy", "--numeric", "5", "--seed", "3",
                 problems_dir() + "/mech_oscillator.jf", "--out", "/dev/null"}) == 0);
  CHECK(run_cli({"check", "--lepage", "--numeric", "5", "--seed", "3",
                 problems_dir() + "/mech_oscillator.jf", "--out", "/dev/null"}) == 0);
}

TEST_CASE("input errors exit with code 2") {
  CHECK(run_cli({"el", "/nonexistent/file.jf"}) == 2);
  CHECK(run_cli({"frobnicate", "x.jf"}) == 2);
  CHECK(run_cli({"check", problems_dir() + "/kg.jf"}) == 2);  // no suite selected
  TempFile bad("jf_bad.jf");
  std::ofstream(bad.path) << "chart { base x; field u; }\nlagrangian v;\n";
  CHECK(run_cli({"el", bad.path}) == 2);
}

TEST_CASE("max order cap applies") {
  TempFile bad("jf_deep.jf");
  std::ofstream(bad.path) << "chart { base x; field u; }\nlagrangian D(u,0,0,0);\n";
  CHECK(run_cli({"el", bad.path, "--out", "/dev/null"}) == 0);
  CHECK(run_cli({"el", bad.path, "--max-order", "2", "--out", "/dev/null"}) == 2);
}
