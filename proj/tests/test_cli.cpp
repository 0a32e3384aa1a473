#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "wagi/corpus.hpp"
#include "wagi/imageio.hpp"

using namespace wagi;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("wagi_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == 2);
  CHECK(run({"nonsense"}).code == 2);
  CHECK(run({"analyze"}).code == 2);
  CHECK(run({"verify", "--samples", "-5"}).code == 2);
  CHECK(run({"regress", "--gen", "bogus", "--target", "x.ppm"}).code == 2);
  CHECK(run({"regress"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("analyze skips bad pairs and reports I/O failures") {
  const fs::path d = scratch("analyze");
  write_file((d / "a.ppm").string(), write_pnm(procedural_texture(32, 1)));
  write_file((d / "b.ppm").string(), write_pnm(procedural_texture(32, 2)));
  write_file((d / "small.ppm").string(), write_pnm(procedural_texture(8, 2)));
  write_file((d / "m.tsv").string(), "# comment\na.ppm\tb.ppm\na.ppm\tsmall.ppm\nmissing.ppm\tb.ppm\n");
  const Run r = run({"analyze", "--pairs", (d / "m.tsv").string(), "--out", (d / "r.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out.rfind("wagi 0.1.0 analyze ", 0) == 0);
  CHECK(r.err.find("line 3") != std::string::npos);
  CHECK(r.err.find("line 4") != std::string::npos);
  const auto j = nlohmann::json::parse(read_file((d / "r.json").string()));
  CHECK(j["pair_count"] == 1);
  CHECK(j["header"].get<std::string>().find("seed=") != std::string::npos);

  write_file((d / "gone.tsv").string(), "x.ppm\ty.ppm\n");
  CHECK(run({"analyze", "--pairs", (d / "gone.tsv").string()}).code == 3);
  write_file((d / "shape.tsv").string(), "a.ppm\tsmall.ppm\n");
  CHECK(run({"analyze", "--pairs", (d / "shape.tsv").string()}).code == 1);
  write_file((d / "bad.tsv").string(), "a.ppm b.ppm\n");
  CHECK(run({"analyze", "--pairs", (d / "bad.tsv").string()}).code == 2);
  CHECK(run({"analyze", "--pairs", (d / "nothing.tsv").string()}).code == 3);
}

TEST_CASE("spectrum writes one row per bin") {
  const fs::path d = scratch("spectrum");
  write_file((d / "t.ppm").string(), write_pnm(procedural_texture(32, 3)));
  CHECK(run({"spectrum", "--in", (d / "t.ppm").string(), "--out", (d / "s.csv").string()}).code == 0);
  const std::string csv = read_file((d / "s.csv").string());
  CHECK(csv.rfind("# wagi 0.1.0 spectrum", 0) == 0);
  CHECK(csv.find("bin,radius,power,log_power\n") != std::string::npos);
  write_file((d / "bad.ppm").string(), "P6 nope");
  CHECK(run({"spectrum", "--in", (d / "bad.ppm").string()}).code == 3);
}

TEST_CASE("verify reports insufficient samples without failing") {
  const Run r = run({"verify", "--samples", "10", "--pairs", "5"});
  CHECK(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["pass"] == true);
  CHECK(j["checks"].size() == 5);
  CHECK(r.out.find("insufficient samples") != std::string::npos);
}

TEST_CASE("regress honours config with flag overrides") {
  const fs::path d = scratch("regress");
  write_file((d / "t.ppm").string(), write_pnm(procedural_texture(32, 4)));
  write_file((d / "job.cfg").string(), "target = " + (d / "t.ppm").string() + "\nsteps = 50\nwidth = 8\n");
  const Run r = run({"regress", "--config", (d / "job.cfg").string(), "--steps", "3", "--out-dir", (d / "o").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("steps=3 ") != std::string::npos);
  for (const char* f : {"trace.csv", "final.ppm", "spectrum_target.csv", "spectrum_result.csv", "summary.json"}) {
    CHECK(fs::exists(d / "o" / f));
  }
  const std::string trace = read_file((d / "o" / "trace.csv").string());
  CHECK(std::count(trace.begin(), trace.end(), '\n') == 2 + 3);
  write_file((d / "typo.cfg").string(), "stepz = 3\n");
  CHECK(run({"regress", "--config", (d / "typo.cfg").string()}).code == 2);
  write_file((d / "odd.ppm").string(), write_pnm(procedural_texture(24, 4)));
  CHECK(run({"regress", "--target", (d / "odd.ppm").string(), "--steps", "1"}).code == 2);
}

TEST_CASE("demos emit the expected rows") {
  const fs::path d = scratch("demos");
  REQUIRE(run({"ada-demo", "--count", "6", "--size", "16", "--epochs", "1", "--holdout", "2", "--out",
               (d / "ada.csv").string()})
              .code == 0);
  const std::string ada = read_file((d / "ada.csv").string());
  CHECK(ada.find("config,lambda_wave_ada,heldout_l1,heldout_wave,baseline_l1,baseline_wave\n") != std::string::npos);
  CHECK(ada.find("\nl1_only,0,") != std::string::npos);
  CHECK(ada.find("\nl1_plus_wavelet,0.1,") != std::string::npos);

  REQUIRE(run({"fuse-demo", "--count", "4", "--holdout", "2", "--epochs", "1", "--width", "8", "--force-identity",
               "--out", (d / "fuse.csv").string()})
              .code == 0);
  std::istringstream in(read_file((d / "fuse.csv").string()));
  std::string line, base;
  std::vector<std::string> rows;
  while (std::getline(in, line)) {
    if (line.rfind("# no_fusion ", 0) == 0) base = line.substr(12);
    if (!line.empty() && line[0] != '#' && line.rfind("config", 0) != 0) rows.push_back(line);
  }
  REQUIRE(rows.size() == 3);
  // Identity gates reproduce the no-fusion l2 and ssim exactly.
  const std::string l2 = base.substr(3, base.find(' ') - 3);
  for (const std::string& row : rows) CHECK(row.find("," + l2 + ",") != std::string::npos);
}

TEST_CASE("fuse-demo ladder: wavelet loss lowers held-out detail wavelet loss") {
  const fs::path d = scratch("ladder");
  REQUIRE(run({"fuse-demo", "--out", (d / "ladder.csv").string()}).code == 0);
  std::istringstream in(read_file((d / "ladder.csv").string()));
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("config", 0) == 0) continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  REQUIRE(rows.size() == 3);
  CHECK(rows[0][0] == "no_wavelet_loss");
  for (const auto& r : rows) {
    REQUIRE(r.size() == 5);
    for (std::size_t k = 1; k < 5; ++k) CHECK(std::isfinite(std::stod(r[k])));
  }
  CHECK(std::stod(rows[1][2]) <= std::stod(rows[0][2]));
}
