#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cqrk/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cqrk::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  return line;
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cqrk-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string str(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("check-tableau") {
  auto r = call({"check-tableau", "lobatto-iiic-2"});
  CHECK(r.code == cqrk::cli::kOk);
  CHECK(contains(r.out, "algebraically stable: yes; growth |1-b'A^{-1}e| = 0"));
  CHECK(contains(r.out, "det A = 0.5"));

  r = call({"check-tableau", "rk4"});
  CHECK(r.code == cqrk::cli::kOk);
  CHECK(contains(r.out, "algebraically stable: no"));
  CHECK(contains(r.out, "singular"));

  r = call({"check-tableau", "no-such-tableau"});
  CHECK(r.code == cqrk::cli::kUsage);
}

TEST_CASE("check-tableau reads a tableau file") {
  TempDir dir;
  {
    std::ofstream f(dir.path / "be.txt");
    f << "1\n1\n1\n1\n";
  }
  {
    std::ofstream f(dir.path / "bad.txt");
    f << "2\n0.5 oops\n";
  }
  auto r = call({"check-tableau", dir.str("be.txt")});
  CHECK(r.code == cqrk::cli::kOk);
  CHECK(contains(r.out, "algebraically stable: yes"));
  r = call({"check-tableau", dir.str("bad.txt")});
  CHECK(r.code == cqrk::cli::kUsage);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("check-conditions") {
  auto r = call({"check-conditions", "--example", "ex2", "--mu", "2.5"});
  CHECK(r.code == cqrk::cli::kOk);
  CHECK(contains(r.out, "asymptotic: NOT satisfied"));
  CHECK(contains(r.out, "4.703846e+02"));

  r = call({"check-conditions", "--example", "2"});
  CHECK(r.code == cqrk::cli::kOk);
  CHECK(contains(r.out, "mu = 1.14867"));
  CHECK(contains(r.out, "global: satisfied"));
  CHECK(contains(r.out, "-7.234488e+01"));
  CHECK(contains(r.out, "reference values mu = 5/2"));

  r = call({"check-conditions", "--example", "ex1", "--mu", "2.5", "--gamma", "1.3333333333333333"});
  CHECK(contains(r.out, "asymptotic: satisfied"));
  CHECK(contains(r.out, "-1.088"));

  r = call({"check-conditions", "--example", "ex2", "--mu", "2.5", "--record"});
  CHECK(contains(r.out, "asymptotic.satisfied = false"));

  r = call({"check-conditions", "--L1", "1"});
  CHECK(r.code == cqrk::cli::kUsage);
  CHECK(contains(r.err, "missing constants: --alpha, --L2"));

  r = call({"check-conditions", "--example", "ex2", "--mu", "abc"});
  CHECK(r.code == cqrk::cli::kUsage);
  r = call({"check-conditions", "--example", "ex3"});
  CHECK(r.code == cqrk::cli::kUsage);
}

TEST_CASE("run writes csv files and a replayable manifest") {
  TempDir dir;
  auto r = call({"run", "ex2", "--m", "10", "--t-end", "1", "--perturbed", "--out", dir.str("a")});
  REQUIRE(r.code == cqrk::cli::kOk);
  CHECK(first_line(dir.path / "a" / "trajectory.csv") == "t,u_1,u_2,v_1,v_2");
  CHECK(first_line(dir.path / "a" / "errors.csv") == "t,w_norm,r_norm,e_inf,ea_inf");
  const std::string manifest = slurp(dir.path / "a" / "manifest.txt");
  CHECK(contains(manifest, "example = ex2"));
  CHECK(contains(manifest, "diverged = false"));
  CHECK(contains(manifest, "steps = 10"));

  r = call({"rerun", dir.str("a/manifest.txt"), "--out", dir.str("b")});
  REQUIRE(r.code == cqrk::cli::kOk);
  CHECK(slurp(dir.path / "a" / "trajectory.csv") == slurp(dir.path / "b" / "trajectory.csv"));
  CHECK(slurp(dir.path / "a" / "errors.csv") == slurp(dir.path / "b" / "errors.csv"));

  r = call({"run", "ex1", "--m", "10", "--t-end", "1.5707963267948966", "--out", dir.str("c")});
  REQUIRE(r.code == cqrk::cli::kOk);
  CHECK(first_line(dir.path / "c" / "trajectory.csv").rfind("t,u_1,", 0) == 0);
  CHECK_FALSE(fs::exists(dir.path / "c" / "errors.csv"));
}

TEST_CASE("run reports divergence in the manifest") {
  TempDir dir;
  auto r = call({"run", "ex1", "--m", "100", "--tableau", "rk4", "--perturbed", "--out", dir.str("rk")});
  CHECK(r.code == cqrk::cli::kOk);
  CHECK(contains(r.out, "blow-up"));
  const std::string manifest = slurp(dir.path / "rk" / "manifest.txt");
  CHECK(contains(manifest, "diverged = true"));
  CHECK(contains(manifest, "divergence_time = 1.57"));
}

TEST_CASE("usage and I/O errors") {
  CHECK(call({}).code == cqrk::cli::kUsage);
  CHECK(call({"bogus"}).code == cqrk::cli::kUsage);
  CHECK(call({"--help"}).code == cqrk::cli::kOk);
  CHECK(call({"run", "ex9"}).code == cqrk::cli::kUsage);
  CHECK(call({"run", "ex2", "--m", "0"}).code == cqrk::cli::kUsage);
  CHECK(call({"rerun", "/nonexistent/manifest.txt"}).code != cqrk::cli::kOk);

  TempDir dir;
  {
    std::ofstream f(dir.path / "file");
    f << "x";
  }
  // output directory path runs through a regular file
  const auto r = call({"run", "ex2", "--m", "10", "--t-end", "0.5", "--out", dir.str("file/sub")});
  CHECK(r.code == cqrk::cli::kFailure);
}

TEST_CASE("tables and convergence") {
  TempDir dir;
  auto r = call({"tables", "--which", "2", "--out", dir.str("t")});
  CHECK(r.code == cqrk::cli::kOk);
  CHECK(first_line(dir.path / "t" / "table2.csv") == "example,m,h,t,e_inf,ea_inf,reference_e_inf,reference_ea_inf");
  std::ifstream f(dir.path / "t" / "table2.csv");
  int lines = 0;
  for (std::string line; std::getline(f, line);) ++lines;
  CHECK(lines == 1 + 2 * 4);
  CHECK(contains(r.out, "ref"));

  r = call({"convergence", "ex2", "--m", "10,20,40", "--out", dir.str("c")});
  CHECK(r.code == cqrk::cli::kOk);
  CHECK(first_line(dir.path / "c" / "convergence.csv") == "m,h,u_error,v_error,u_order,v_order");
  CHECK(call({"convergence", "ex2", "--m", "10,20"}).code == cqrk::cli::kUsage);
}

TEST_CASE("info") {
  const auto r = call({"info"});
  CHECK(r.code == cqrk::cli::kOk);
  CHECK(contains(r.out, "lobatto-iiic-2"));
  CHECK(contains(r.out, "ex2: n1 = 2"));
}
