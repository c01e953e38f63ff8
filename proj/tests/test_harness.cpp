#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <sstream>

#include "anhgibbs/harness.hpp"

using namespace anhgibbs;

TEST_CASE("run record json round-trip and exit codes") {
  RunRecord rec;
  rec.subcommand = "weyl";
  rec.params["d"] = "1";
  rec.params["s"] = "2.0";
  rec.seed = 12345;
  rec.wall_seconds = 1.5;
  rec.add("exponent", 1.0001, Verdict::pass, 0.05, 0.002);
  rec.add("prefactor", 0.52, Verdict::inconclusive, 0.05);

  auto j = rec.to_json();
  RunRecord back = RunRecord::from_json(j);
  CHECK(back.subcommand == "weyl");
  CHECK(back.params.at("s") == "2.0");
  CHECK(back.seed == 12345);
  REQUIRE(back.results.size() == 2);
  CHECK(back.results[0].value == doctest::Approx(1.0001));
  CHECK(back.results[0].stderr_ == doctest::Approx(0.002));
  CHECK(back.results[1].verdict == Verdict::inconclusive);

  SUBCASE("exit code semantics") {
    CHECK(rec.exit_code() == 0);  // has a pass, no fail
    rec.add("bad", 9.0, Verdict::fail);
    CHECK(rec.exit_code() == 2);
    RunRecord only_inc;
    only_inc.add("maybe", 0.0, Verdict::inconclusive);
    CHECK(only_inc.exit_code() == 3);
    RunRecord empty;
    CHECK(empty.exit_code() == 0);
  }
  SUBCASE("file save/load") {
    auto path = std::filesystem::temp_directory_path() / "anhgibbs-test-run.json";
    rec.save(path);
    std::ifstream in(path);
    auto loaded = RunRecord::from_json(nlohmann::json::parse(in));
    CHECK(loaded.results.size() == rec.results.size());
    std::filesystem::remove(path);
  }
}

TEST_CASE("strict config parsing") {
  SUBCASE("sections, comments, whitespace") {
    std::istringstream in(
        "# comment\n"
        "top = 1\n"
        "[spectrum]\n"
        "  d = 3 \n"
        "s=2.0\n"
        "[mc]\n"
        "samples = 20000\n");
    auto cfg = ConfigFile::parse(in);
    CHECK(cfg.kv.at("top") == "1");
    CHECK(cfg.kv.at("spectrum.d") == "3");
    CHECK(cfg.kv.at("spectrum.s") == "2.0");
    CHECK(cfg.kv.at("mc.samples") == "20000");
    CHECK(cfg.kv.size() == 4);
  }
  SUBCASE("malformed line rejected") {
    std::istringstream in("just some words\n");
    CHECK_THROWS(ConfigFile::parse(in));
  }
  SUBCASE("duplicate key rejected") {
    std::istringstream in("a = 1\na = 2\n");
    CHECK_THROWS(ConfigFile::parse(in));
  }
  SUBCASE("empty key rejected") {
    std::istringstream in("= 2\n");
    CHECK_THROWS(ConfigFile::parse(in));
  }
  SUBCASE("missing file rejected") { CHECK_THROWS(ConfigFile::load("/nonexistent/x.cfg")); }
}

TEST_CASE("spectral cache reproducibility") {
  TrapConfig cfg{1, 2.0, 0.0, 512, 6};
  auto a = get_spectrum(cfg);
  auto b = get_spectrum(cfg);
  CHECK(a.get() == b.get());  // memoized: identical object
  SUBCASE("disk artifact exists and reloads bit-identically") {
    auto full = with_adaptive_box(cfg);
    char name[32];
    std::snprintf(name, sizeof name, "%016llx.spec",
                  static_cast<unsigned long long>(config_key(full)));
    auto file = cache_dir() / name;
    REQUIRE(std::filesystem::exists(file));
    SpectralDecomposition fresh;
    REQUIRE(load_decomposition(file.string(), fresh));
    REQUIRE(fresh.lambda_sq.size() == a->lambda_sq.size());
    for (std::size_t n = 0; n < fresh.lambda_sq.size(); ++n)
      CHECK(fresh.lambda_sq[n] == a->lambda_sq[n]);  // exact, not approximate
    for (std::size_t n = 0; n < fresh.eigfun.size(); ++n)
      for (std::size_t i = 0; i < fresh.eigfun[n].size(); ++i)
        REQUIRE(fresh.eigfun[n][i] == a->eigfun[n][i]);
  }
  SUBCASE("values-only variant cached under a distinct key") {
    auto v = get_spectrum(cfg, true);
    CHECK(v.get() != a.get());
    CHECK(v->eigfun.empty());
    CHECK(v->lambda_sq[0] == doctest::Approx(a->lambda_sq[0]).epsilon(1e-12));
  }
}

TEST_CASE("csv writer plain format") {
  auto path = std::filesystem::temp_directory_path() / "anhgibbs-test.csv";
  {
    CsvWriter csv(path);
    csv.header({"n", "lambda_sq"});
    csv.row({0, 1.0});
    csv.row({1, 3.25});
  }
  std::ifstream in(path);
  std::string l1, l2, l3;
  std::getline(in, l1);
  std::getline(in, l2);
  std::getline(in, l3);
  CHECK(l1 == "n,lambda_sq");
  CHECK(l2 == "0,1");
  CHECK(l3 == "1,3.25");
  std::filesystem::remove(path);
}
