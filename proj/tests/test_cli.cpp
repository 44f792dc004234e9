#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "artbank/bank.hpp"
#include "artbank/cli.hpp"
#include "artbank/data_io.hpp"

using namespace artbank;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

std::vector<char> file_bytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// A tiny trained pipeline shared by the tests below.
struct Workspace {
  fs::path root = fs::temp_directory_path() / "artbank_test_cli";
  std::vector<std::string> dims{"--seed", "3", "--channels", "8", "--positions", "4", "--width", "8", "--timesteps", "20"};

  Workspace() {
    fs::remove_all(root);
    fs::create_directories(root);
    REQUIRE(run_cli(with({"gen-data", "--family", "all", "--count", "4", "--size", "8", "--out", path("data")})).code == 0);
    REQUIRE(run_cli(with({"gen-data", "--what", "content", "--count", "2", "--size", "8", "--out", path("content")})).code == 0);
    REQUIRE(run_cli(with({"pretrain", "--data", path("data"), "--checkpoint", path("d.abdn"), "--steps", "20"})).code == 0);
    REQUIRE(run_cli(with({"train-bank", "--data", path("data"), "--checkpoint", path("d.abdn"), "--bank", path("b.ispb"),
                          "--steps", "10", "--styles", "stripes"}))
                .code == 0);
  }
  ~Workspace() { fs::remove_all(root); }

  std::string path(const std::string& name) const { return (root / name).string(); }
  std::vector<std::string> with(std::vector<std::string> args) const {
    std::vector<std::string> all = dims;
    all.insert(all.end(), args.begin(), args.end());
    return all;
  }
};

}  // namespace

TEST_CASE("help exits cleanly and bad usage exits with 2") {
  const Result help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(contains(help.out, "stylize"));
  const fs::path p = fs::temp_directory_path() / "artbank_test_usage.ispb";
  save_bank(StyleBank{}, p);
  const Result unknown = run_cli({"--seed", "1", "bank", "inspect", "--bank", p.string(), "--bogus"});
  CHECK(unknown.code == 2);
  CHECK(contains(unknown.err, "--bogus"));
  fs::remove(p);
  CHECK(run_cli({}).code == 2);
}

TEST_CASE("bank inspect on an empty bank lists zero entries") {
  const fs::path p = fs::temp_directory_path() / "artbank_test_empty.ispb";
  save_bank(StyleBank{}, p);
  const Result r = run_cli({"bank", "inspect", "--bank", p.string()});
  CHECK(r.code == 0);
  CHECK(contains(r.out, "entries: 0"));
  CHECK(contains(r.out, "# resolved config"));
  fs::remove(p);
}

TEST_CASE("missing and corrupt files are reported") {
  const Result missing = run_cli({"bank", "inspect", "--bank", "/nonexistent/bank.ispb"});
  CHECK(missing.code != 0);
  CHECK(contains(missing.err, "/nonexistent/bank.ispb"));
  const fs::path p = fs::temp_directory_path() / "artbank_test_corrupt.ispb";
  std::ofstream(p) << "NOPE";
  const Result bad = run_cli({"bank", "inspect", "--bank", p.string()});
  CHECK(bad.code == 1);
  CHECK(contains(bad.err, "bad file format"));
  fs::remove(p);
}

TEST_CASE("commands that draw randomness require a seed") {
  const Result r = run_cli({"gen-data", "--out", (fs::temp_directory_path() / "artbank_test_noseed").string()});
  CHECK(r.code == 1);
  CHECK(contains(r.err, "--seed"));
}

TEST_CASE("cli pipeline") {
  Workspace ws;

  SUBCASE("inspect shows the trained entry and the resolved seed") {
    const Result r = run_cli(ws.with({"bank", "inspect", "--bank", ws.path("b.ispb")}));
    CHECK(r.code == 0);
    CHECK(contains(r.out, "entries: 1"));
    CHECK(contains(r.out, "style_id: stripes"));
    CHECK(contains(r.out, "# seed = 3"));
  }
  SUBCASE("stylize writes a valid image and is reproducible") {
    const auto args = ws.with({"stylize", "--checkpoint", ws.path("d.abdn"), "--bank", ws.path("b.ispb"), "--style-id",
                               "stripes", "--content", ws.path("content/000.ppm"), "--out", ws.path("out/a.ppm")});
    REQUIRE(run_cli(args).code == 0);
    const ImageSample img = read_ppm(ws.path("out/a.ppm"));
    CHECK(img.width == 8);
    CHECK(img.channels == 3);
    const auto first = file_bytes(ws.path("out/a.ppm"));
    REQUIRE(run_cli(args).code == 0);
    CHECK(file_bytes(ws.path("out/a.ppm")) == first);
  }
  SUBCASE("stylize with an unknown style id names it") {
    const Result r = run_cli(ws.with({"stylize", "--checkpoint", ws.path("d.abdn"), "--bank", ws.path("b.ispb"),
                                      "--style-id", "cubism", "--content", ws.path("content/000.ppm"), "--out",
                                      ws.path("out/b.ppm")}));
    CHECK(r.code == 1);
    CHECK(contains(r.err, "not found"));
    CHECK(contains(r.err, "cubism"));
    CHECK_FALSE(fs::exists(ws.path("out/b.ppm")));
  }
  SUBCASE("checkpoint and bank widths must agree") {
    StyleBank narrow;
    narrow.create_entry("stripes", "x", 4, 4, 1);
    save_bank(narrow, ws.path("narrow.ispb"));
    const Result r = run_cli(ws.with({"stylize", "--checkpoint", ws.path("d.abdn"), "--bank", ws.path("narrow.ispb"),
                                      "--style-id", "stripes", "--content", ws.path("content/000.ppm"), "--out",
                                      ws.path("out/c.ppm")}));
    CHECK(r.code == 1);
    CHECK(contains(r.err, "dimension mismatch"));
    std::vector<std::string> wrong = ws.with({"train-bank", "--data", ws.path("data"), "--checkpoint", ws.path("d.abdn"),
                                              "--bank", ws.path("other.ispb"), "--steps", "1"});
    wrong[3] = "16";
    const Result w = run_cli(wrong);
    CHECK(w.code == 1);
    CHECK(contains(w.err, "dimension mismatch"));
  }
  SUBCASE("retraining one style keeps the other entries") {
    REQUIRE(run_cli(ws.with({"train-bank", "--data", ws.path("data"), "--checkpoint", ws.path("d.abdn"), "--bank",
                             ws.path("b.ispb"), "--steps", "5", "--styles", "waves"}))
                .code == 0);
    const StyleBank bank = load_bank(ws.path("b.ispb"));
    CHECK(bank.size() == 2);
    CHECK(bank.contains("stripes"));
    const Result r = run_cli(ws.with({"train-bank", "--data", ws.path("data"), "--checkpoint", ws.path("d.abdn"),
                                      "--bank", ws.path("b.ispb"), "--steps", "5", "--styles", "cubism"}));
    CHECK(r.code == 1);
    CHECK(contains(r.err, "cubism"));
  }
  SUBCASE("training is byte-for-byte reproducible") {
    const auto args = ws.with({"train-bank", "--data", ws.path("data"), "--checkpoint", ws.path("d.abdn"), "--bank",
                               ws.path("again.ispb"), "--steps", "10", "--styles", "stripes", "--loss-csv",
                               ws.path("loss")});
    REQUIRE(run_cli(args).code == 0);
    CHECK(file_bytes(ws.path("again.ispb")) == file_bytes(ws.path("b.ispb")));
    CHECK(file_bytes(ws.path("loss/stripes.csv")).size() > 10);
  }
  SUBCASE("drop-text entries use the bare placeholder") {
    REQUIRE(run_cli(ws.with({"train-bank", "--data", ws.path("data"), "--checkpoint", ws.path("d.abdn"), "--bank",
                             ws.path("drop.ispb"), "--steps", "2", "--styles", "blobs", "--drop-text"}))
                .code == 0);
    CHECK(load_bank(ws.path("drop.ispb")).at("blobs").prompt_template == "*");
  }
  SUBCASE("config files supply values and flags override them") {
    std::ofstream(ws.path("run.conf")) << "seed = 11\nchannels = 8\n";
    const Result r = run_cli({"--config", ws.path("run.conf"), "bank", "inspect", "--bank", ws.path("b.ispb")});
    CHECK(r.code == 0);
    CHECK(contains(r.out, "# seed = 11"));
    const Result o = run_cli({"--config", ws.path("run.conf"), "--seed", "12", "bank", "inspect", "--bank",
                              ws.path("b.ispb")});
    CHECK(contains(o.out, "# seed = 12"));
  }
  SUBCASE("bench-attn and eval write csv reports") {
    const Result b = run_cli(ws.with({"bench-attn", "--checkpoint", ws.path("d.abdn"), "--data", ws.path("data/stripes"),
                                      "--seeds", "1,2,3", "--max-iters", "12", "--window", "4", "--csv",
                                      ws.path("bench.csv")}));
    CHECK(b.code == 0);
    const auto csv = file_bytes(ws.path("bench.csv"));
    CHECK(contains(std::string(csv.begin(), csv.end()), "sanet"));
    REQUIRE(run_cli(ws.with({"stylize", "--checkpoint", ws.path("d.abdn"), "--bank", ws.path("b.ispb"), "--style-id",
                             "stripes", "--content", ws.path("content/001.ppm"), "--out", ws.path("styled/001.ppm")}))
                .code == 0);
    const Result e = run_cli({"eval", "--content", ws.path("content/001.ppm"), "--stylized", ws.path("styled/001.ppm"),
                              "--style-data", ws.path("data/stripes"), "--csv", ws.path("eval.csv")});
    CHECK(e.code == 0);
    const auto ev = file_bytes(ws.path("eval.csv"));
    CHECK(contains(std::string(ev.begin(), ev.end()), "index,ssim"));
  }
}
