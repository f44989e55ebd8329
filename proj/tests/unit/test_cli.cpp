#include "wave/io.hpp"

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <map>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

fs::path const root = fs::temp_directory_path() / "wave_epi_cli_test";

int run(std::string const &args, std::string const &env = "") {
  std::string const cmd = env + " " + WAVE_EPI_BIN + " " + args + " >/dev/null 2>&1";
  int const st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string write_config(std::string const &name, std::string const &body) {
  fs::create_directories(root);
  auto const p = root / name;
  wave::write_file_atomic(p.string(), body);
  return p.string();
}

std::map<std::string, std::string> snapshot(fs::path const &dir) {
  std::map<std::string, std::string> out;
  for (auto const &e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = wave::read_file(e.path().string());
  return out;
}

std::string const small = R"({"grid": {"nx": 16, "ny": 16, "nz": 3}, "coils": {"ncoils": 4},
  "sampling": {"R_in": 2, "R_sms": 3}, "recon": {"max_iters": 20}, "analysis": {"snr": 20}, "io": {"output_dir": "x"}})";

} // namespace

TEST_CASE("exit codes", "[cli]") {
  fs::remove_all(root);
  auto const out = (root / "o").string();
  CHECK(run("phantom --io.output_dir=" + out) == 0);
  CHECK(run("phantom --coils.n=4 --io.output_dir=" + out) == 2);
  CHECK(run("phantom " + write_config("bad.json", "{not json") ) == 2);
  CHECK(run("phantom " + (root / "absent.json").string()) != 0);
  CHECK(run("phantom --sampling.pf=0.5 --io.output_dir=" + out) == 2);
  CHECK(run("frobnicate") == 2);

  auto const slew = "--wave.G_w_y=400 --io.output_dir=" + out;
  CHECK(run("simulate " + slew) == 3);
  CHECK(run("phantom --allow-slew-violation " + slew) == 0);

  auto const div = write_config("div.json", R"({"grid": {"nx": 16, "ny": 16, "nz": 3},
    "phantom": {"preset": "custom", "ellipsoids": [{"center": [0, 0, 0], "semi": [60, 60, 60], "amplitude": 1e305}]},
    "io": {"output_dir": ")" + (root / "div").string() + R"("}})");
  CHECK(run("recon " + div) == 4);
  fs::remove_all(root);
}

TEST_CASE("outputs are byte-identical across runs and thread counts", "[cli]") {
  fs::remove_all(root);
  auto const cfg = write_config("small.json", small);
  auto const a = root / "a", b = root / "b";
  REQUIRE(run("recon " + cfg + " --io.output_dir=" + a.string(), "WAVE_EPI_THREADS=1") == 0);
  REQUIRE(run("recon " + cfg + " --io.output_dir=" + b.string(), "WAVE_EPI_THREADS=3") == 0);
  auto const sa = snapshot(a), sb = snapshot(b);
  CHECK(sa.size() > 4);
  std::size_t differing = 0;
  for (auto const &[name, bytes] : sa) {
    if (name == "resolved_config.json") continue;
    CHECK(name.find(".tmp.") == std::string::npos);
    REQUIRE(sb.count(name) == 1);
    if (sb.at(name) != bytes) ++differing;
  }
  CHECK(differing == 0);
  fs::remove_all(root);
}
