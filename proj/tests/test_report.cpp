#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "hdc/matgen.hpp"
#include "hdc/report.hpp"

using namespace hdc;

namespace {

// A report filled from a real run, the way the command line tool builds one.
SolveReport make_report(PathOverride path, std::uint64_t seed) {
  SymTridiagonal T = matgen::hermite(160);
  SolveReport r;
  r.options.base_size = 32;
  r.options.leaf_size = 32;
  r.options.switch_threshold = 64;
  r.options.r0 = 16;
  r.options.p = 8;
  r.options.rank_increment = 16;
  r.options.path = path;
  r.options.seed = seed;
  r.threads = 1;
  r.n = T.n();
  r.input = ordered_json{{"kind", "hermite"}, {"n", T.n()}};
  EigenDecomposition E = solve(T, r.options, r.stats);
  r.verification = verify(T, E);
  r.passed = r.verification.ascending &&
             r.verification.orthogonality <= r.orth_threshold &&
             r.verification.max_residual <= r.resid_threshold;
  r.wall_time_ms = 12.5;
  return r;
}

}  // namespace

TEST_CASE("report serialization is lossless") {
  for (PathOverride path : {PathOverride::ForceDense, PathOverride::ForceHss}) {
    SolveReport r = make_report(path, 99);
    ordered_json j1 = report_to_json(r);
    SolveReport back = report_from_json(j1);
    ordered_json j2 = report_to_json(back);
    REQUIRE(j1.dump(2) == j2.dump(2));
  }
}

TEST_CASE("report echoes the run parameters") {
  SolveReport r = make_report(PathOverride::ForceHss, 424242);
  ordered_json j = report_to_json(r);

  REQUIRE(j["rng"]["seed"].get<std::uint64_t>() == 424242);
  REQUIRE(j["rng"]["generator"].get<std::string>() == rng_name());
  REQUIRE(j["program"]["name"].get<std::string>() == "hdc");
  REQUIRE(j["options"]["path"].get<std::string>() == "force-hss");
  REQUIRE(j["options"]["threads"].get<int>() == 1);
  REQUIRE(j["input"]["kind"].get<std::string>() == "hermite");
  REQUIRE(j["n"].get<Index>() == 160);
  REQUIRE(j["verification"]["passed"].get<bool>() == r.passed);
}

TEST_CASE("structured statistics appear only on structured merges") {
  SolveReport dense = make_report(PathOverride::ForceDense, 5);
  ordered_json jd = report_to_json(dense);
  for (const auto& m : jd["merges"]) {
    REQUIRE(m["path"].get<std::string>() == "dense");
    REQUIRE(!m.contains("hss_rank"));
    REQUIRE(!m.contains("hss_samples"));
    REQUIRE(!m.contains("hss_fallback"));
  }

  SolveReport hss = make_report(PathOverride::ForceHss, 5);
  ordered_json jh = report_to_json(hss);
  bool saw_hss = false;
  for (const auto& m : jh["merges"]) {
    if (m["path"].get<std::string>() != "hss") continue;
    saw_hss = true;
    REQUIRE(m.contains("hss_rank"));
    REQUIRE(m.contains("hss_samples"));
    REQUIRE(m.contains("hss_fallback"));
  }
  REQUIRE(saw_hss);
}

TEST_CASE("top level keys keep a stable order") {
  SolveReport r = make_report(PathOverride::ForceDense, 1);
  ordered_json j = report_to_json(r);
  const std::vector<std::string> expect = {
      "format_version", "program", "input",        "options",      "rng",
      "n",              "merges",  "totals",       "verification", "wall_time_ms"};
  std::vector<std::string> got;
  for (auto it = j.begin(); it != j.end(); ++it) got.push_back(it.key());
  REQUIRE(got == expect);
}

TEST_CASE("version gate accepts minor revisions and rejects major ones") {
  SolveReport r = make_report(PathOverride::ForceDense, 2);
  ordered_json j = report_to_json(r);

  REQUIRE(j["format_version"].get<std::string>() == std::string(kReportFormatVersion));
  REQUIRE_NOTHROW(report_from_json(j));

  ordered_json minor = j;
  minor["format_version"] = "1.7";
  REQUIRE_NOTHROW(report_from_json(minor));

  ordered_json major = j;
  major["format_version"] = "2.0";
  REQUIRE_THROWS_AS(report_from_json(major), ParseError);

  ordered_json missing = j;
  missing.erase("format_version");
  REQUIRE_THROWS_AS(report_from_json(missing), ParseError);
}

TEST_CASE("malformed reports are rejected") {
  SolveReport r = make_report(PathOverride::ForceDense, 3);
  ordered_json j = report_to_json(r);

  ordered_json no_totals = j;
  no_totals.erase("totals");
  REQUIRE_THROWS_AS(report_from_json(no_totals), ParseError);

  ordered_json bad_merge = j;
  bad_merge["merges"][0].erase("K");
  REQUIRE_THROWS_AS(report_from_json(bad_merge), ParseError);

  ordered_json bad_type = j;
  bad_type["totals"]["flops"] = "a lot";
  REQUIRE_THROWS_AS(report_from_json(bad_type), ParseError);

  ordered_json not_report = ordered_json{{"hello", 1}};
  REQUIRE_THROWS_AS(report_from_json(not_report), ParseError);
}
