#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome qr(std::vector<std::string> args) {
  args.insert(args.begin(), "qrecover");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = qrecover::cli::run_command(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// Fresh scratch directory, entered for the lifetime of the object.
struct Scratch {
  fs::path dir;
  fs::path old;
  explicit Scratch(const std::string& name) {
    dir = fs::temp_directory_path() / ("qrecover_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    old = fs::current_path();
    fs::current_path(dir);
  }
  ~Scratch() {
    fs::current_path(old);
    fs::remove_all(dir);
  }
};

}  // namespace

TEST_CASE("run: bell under complete recovery", "[cli]") {
  const auto o = qr({"run", "--state", "bell", "--p", "0.5", "--r", "0.5", "--q", "complete"});
  CHECK(o.code == 0);
  CHECK(o.out.find("q=0.5 ") != std::string::npos);
  CHECK(o.out.find("g_total=0.390625") != std::string::npos);
  CHECK(o.out.find("branch 11:") != std::string::npos);

  const auto same = qr({"run", "--state", "bell", "--p", "0.5", "--r", "0.5", "--q-mode", "complete"});
  CHECK(same.code == 0);
  CHECK(same.out == o.out);
}

TEST_CASE("run: explicit amplitudes and numeric q", "[cli]") {
  const auto o = qr({"run", "--amplitudes", "0", "0", "0", "0", "0", "0", "1", "0", "--p", "0", "--q", "0.4", "--r", "0.5"});
  CHECK(o.code == 0);
  // |11> at p = 0: success (1 - qr)^2 = 0.64
  CHECK(o.out.find("g_total=0.64") != std::string::npos);
  CHECK(o.out.find("baseline_fid=0.25") != std::string::npos);
}

TEST_CASE("run: density matrix file", "[cli]") {
  Scratch s("density");
  {
    std::ofstream f("mixed.txt");
    f << "# I/4\n0.25 0 0 0\n0 0.25 0 0\n0 0 0.25 0\n0 0 0 0.25\n";
  }
  const auto o = qr({"run", "--density", "mixed.txt", "--p", "0.5", "--r", "0.5", "--q", "complete"});
  CHECK(o.code == 0);
  CHECK(o.out.find("g_total=0.390625") != std::string::npos);
  CHECK(o.out.find("purity 0.25") != std::string::npos);

  {
    std::ofstream f("bad.txt");
    f << "0.5 0 0 0\n0 0.25 0 0\n0 0 0.25 0\n0 0 0 0.25\n";  // trace 1.25
  }
  CHECK(qr({"run", "--density", "bad.txt", "--p", "0.5", "--r", "0.5", "--q", "0.1"}).code == 1);
  {
    std::ofstream f("short.txt");
    f << "1 0 0\n";
  }
  CHECK(qr({"run", "--density", "short.txt", "--p", "0.5", "--r", "0.5", "--q", "0.1"}).code == 4);
  CHECK(qr({"run", "--density", "missing.txt", "--p", "0.5", "--r", "0.5", "--q", "0.1"}).code == 4);
}

TEST_CASE("exit codes", "[cli]") {
  const auto infeasible = qr({"run", "--state", "bell", "--p", "0.2", "--r", "0.5", "--q", "complete"});
  CHECK(infeasible.code == 2);
  CHECK(infeasible.err.find("0.333333333333") != std::string::npos);
  CHECK(qr({"run", "--state", "bell", "--p", "0", "--r", "0.5", "--q", "complete"}).code == 2);
  CHECK(qr({"run", "--state", "bell", "--p", "1", "--r", "0.5", "--q", "1"}).code == 2);

  CHECK(qr({}).code == 1);
  CHECK(qr({"frobnicate"}).code == 1);
  CHECK(qr({"run", "--state", "bell", "--p", "1.5", "--r", "0.5", "--q", "0"}).code == 1);
  CHECK(qr({"run", "--state", "bell", "--p", "0.5", "--r", "0.5"}).code == 1);
  CHECK(qr({"run", "--state", "bell", "--p", "0.5", "--r", "0.5", "--q", "0.3", "--q-mode", "complete"}).code == 1);
  CHECK(qr({"run", "--state", "bell", "--p", "0.5", "--r", "0.5", "--q", "abc"}).code == 1);
  // squared norm 1.01: rejected, not renormalized
  CHECK(qr({"run", "--amplitudes", "1.005", "0", "0", "0", "0", "0", "0", "0", "--p", "0.5", "--r", "0.5", "--q", "0"})
            .code == 1);
  CHECK(qr({"sweep", "--q-mode", "complete", "--q-grid", "0:1:0.1", "--out", "x.csv"}).code == 1);
  CHECK(qr({"pareto", "--in", "/nonexistent/sweep.csv"}).code == 4);
  CHECK(qr({"sweep", "--n", "5", "--out", "/nonexistent/dir/x.csv", "--p-grid", "0.5", "--q-grid", "0.5"}).code == 4);
  CHECK(qr({"--help"}).code == 0);
}

TEST_CASE("validate reports every check", "[cli]") {
  const auto o = qr({"validate"});
  CHECK(o.code == 0);
  CHECK(o.out.find("FAIL") == std::string::npos);
  CHECK(o.out.find("10/10 checks passed") != std::string::npos);
}

TEST_CASE("sweep, pareto, plot round trip on default flags", "[cli]") {
  Scratch s("roundtrip");
  // default flags except a smaller ensemble to keep the test quick
  const auto sw = qr({"sweep", "--n", "200"});
  REQUIRE(sw.code == 0);
  const std::string csv = slurp("sweep.csv");
  CHECK(csv.find(std::string(qrecover::kSweepHeader)) != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2 + 51 * 51);

  const auto pa = qr({"pareto"});
  REQUIRE(pa.code == 0);
  CHECK(slurp("pareto.csv").rfind("fidelity,success,p,q\n", 0) == 0);

  const auto pl = qr({"plot"});
  REQUIRE(pl.code == 0);
  const std::string svg = slurp("plot.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);

  REQUIRE(qr({"plot", "--in", "sweep.csv", "--out", "surface.svg"}).code == 0);
  CHECK(slurp("surface.svg").find("<rect x=") != std::string::npos);
}

TEST_CASE("sweep in complete mode over r, with presets and baseline", "[cli]") {
  Scratch s("presets");
  const auto o = qr({"sweep", "--q-mode", "complete", "--r-grid", "0.1:0.9:0.1", "--p-preset", "max-fidelity", "--n",
                     "100", "--ensemble", "mixed", "--baseline-out", "base.csv", "--out", "best.csv"});
  REQUIRE(o.code == 0);
  std::istringstream in(slurp("best.csv"));
  const auto rows = qrecover::read_sweep_csv(in);
  CHECK(rows.size() == 9);
  const std::string base = slurp("base.csv");
  CHECK(base.rfind("r,fid_mean,fid_std,n_states\n", 0) == 0);
  CHECK(qr({"plot", "--in", "best.csv", "--out", "best.svg"}).code == 0);
  CHECK(qr({"pareto", "--in", "best.csv"}).code == 1);  // several r values
  CHECK(qr({"pareto", "--in", "best.csv", "--r", "0.5", "--out", "p.csv"}).code == 0);
  CHECK(qr({"sweep", "--p-preset", "max-success", "--n", "5"}).code == 1);  // needs complete mode
}

TEST_CASE("sweep CSV bytes repeat for equal seeds", "[cli]") {
  Scratch s("determinism");
  const std::vector<std::string> base{"sweep", "--r", "0.6", "--p-grid", "0:1:0.1", "--q-grid", "0:1:0.1",
                                      "--n", "300", "--ensemble", "mixed", "--seed", "17"};
  auto a = base;
  a.insert(a.end(), {"--out", "a.csv"});
  auto b = base;
  b.insert(b.end(), {"--out", "b.csv", "--threads", "2"});
  REQUIRE(qr(a).code == 0);
  REQUIRE(qr(b).code == 0);
  CHECK(slurp("a.csv") == slurp("b.csv"));
  auto c = base;
  c[c.size() - 1] = "18";
  c.insert(c.end(), {"--out", "c.csv"});
  REQUIRE(qr(c).code == 0);
  CHECK(slurp("a.csv") != slurp("c.csv"));
}
