// Command-line front end: matrix generation, solves with machine-readable
// reports, dense/structured benchmarking, and standalone compression checks.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hdc/dc.hpp"
#include "hdc/hss.hpp"
#include "hdc/matgen.hpp"
#include "hdc/report.hpp"
#include "hdc/tridiagonal.hpp"

namespace {

using namespace hdc;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerifyFailed = 2;

int resolve_threads(const std::optional<int>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("HDC_THREADS")) {
    try {
      return std::stoi(env);
    } catch (...) {
      return 0;
    }
  }
  return 0;
}

std::uint64_t entropy_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ static_cast<std::uint64_t>(rd());
}

bool is_tridiag_kind(const std::string& k) {
  return k == "clement" || k == "hermite" || k == "toeplitz211" || k == "sht";
}

bool is_dense_kind(const std::string& k) { return k == "toeplitz-dense" || k == "kinetic"; }

SymTridiagonal make_tridiag(const std::string& kind, Index n, Index m) {
  if (kind == "clement") return matgen::clement(n);
  if (kind == "hermite") return matgen::hermite(n);
  if (kind == "toeplitz211") return matgen::toeplitz211(n);
  if (kind == "sht") return matgen::sht(n, m);
  throw InvalidParameter("'" + kind + "' is not a tridiagonal generator");
}

Matrix make_dense(const std::string& kind, Index n, double d) {
  if (kind == "toeplitz-dense")
    return matgen::toeplitz_dense(n, matgen::ToeplitzKind::DiagDominant, d);
  if (kind == "kinetic") return matgen::toeplitz_dense(n, matgen::ToeplitzKind::Kinetic, d);
  throw InvalidParameter("'" + kind + "' is not a dense generator");
}

struct GenArgs {
  std::string kind;
  Index n = 0;
  Index m = -1;
  double d = 0.1;
  std::string out;
};

int run_gen(const GenArgs& a) {
  std::string text;
  if (is_tridiag_kind(a.kind)) {
    const SymTridiagonal T = make_tridiag(a.kind, a.n, a.m >= 0 ? a.m : a.n);
    text = serialize_tridiag(T);
  } else if (is_dense_kind(a.kind)) {
    text = serialize_dense(make_dense(a.kind, a.n, a.d));
  } else {
    throw InvalidParameter("unknown generator '" + a.kind + "'");
  }
  std::ofstream out(a.out, std::ios::binary);
  if (!out) throw IoError("cannot open '" + a.out + "' for writing");
  out << text;
  if (!out.flush()) throw IoError("write to '" + a.out + "' failed");
  std::printf("n %lld\n", static_cast<long long>(a.n));
  std::printf("checksum %016llx\n", static_cast<unsigned long long>(content_checksum(text)));
  return kExitOk;
}

struct SolveArgs {
  std::string in;
  std::string kind;
  Index n = 0;
  Index m = -1;
  DCOptions opts;
  std::string path_name = "auto";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string report_path;
  std::string evals_path;
  double max_orth = 5e-13;
  double max_residual = 1e-12;
};

SolveReport solve_to_report(const SymTridiagonal& T, const ordered_json& input,
                            const DCOptions& opts, int threads, double max_orth,
                            double max_residual, EigenDecomposition* out_e = nullptr) {
  SolveReport r;
  r.input = input;
  r.options = opts;
  r.threads = threads;
  r.n = T.n();
  r.orth_threshold = max_orth;
  r.resid_threshold = max_residual;

  const auto t0 = std::chrono::steady_clock::now();
  EigenDecomposition E = solve(T, opts, r.stats);
  r.verification = verify(T, E);
  const auto t1 = std::chrono::steady_clock::now();
  r.wall_time_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
  r.passed = r.verification.ascending && r.verification.orthogonality <= max_orth &&
             r.verification.max_residual <= max_residual;
  if (out_e) *out_e = std::move(E);
  return r;
}

int run_solve(SolveArgs& a) {
  a.opts.path = path_override_from_string(a.path_name);
  a.opts.seed = a.seed ? *a.seed : entropy_seed();

  SymTridiagonal T;
  ordered_json input;
  if (!a.in.empty() && !a.kind.empty())
    throw InvalidParameter("solve takes --in or --kind, not both");
  if (!a.in.empty()) {
    T = read_tridiag(a.in);
    input["file"] = a.in;
    input["n"] = T.n();
  } else {
    if (a.kind.empty()) throw InvalidParameter("solve needs --in or --kind");
    T = make_tridiag(a.kind, a.n, a.m >= 0 ? a.m : a.n);
    input["kind"] = a.kind;
    input["n"] = a.n;
    if (a.kind == "sht") input["m"] = a.m >= 0 ? a.m : a.n;
  }

  EigenDecomposition E;
  SolveReport r = solve_to_report(T, input, a.opts, resolve_threads(a.threads), a.max_orth,
                                  a.max_residual, &E);

  const std::string text = report_to_json(r).dump(2) + "\n";
  if (a.report_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream out(a.report_path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + a.report_path + "' for writing");
    out << text;
  }
  if (!a.evals_path.empty()) {
    std::ofstream out(a.evals_path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + a.evals_path + "' for writing");
    for (Index i = 0; i < E.values.size(); ++i) out << detail::format_double(E.values[i]) << "\n";
  }
  if (!r.passed)
    std::fprintf(stderr, "verification failed: orthogonality %.3e max_residual %.3e ascending %d\n",
                 r.verification.orthogonality, r.verification.max_residual,
                 static_cast<int>(r.verification.ascending));
  return r.passed ? kExitOk : kExitVerifyFailed;
}

struct BenchArgs {
  std::string kind = "clement";
  std::vector<Index> ns;
  std::string format = "csv";
  std::string out;
  DCOptions opts;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool no_verify = false;
  bool crossover = false;
  Index cross_min = 256;
  Index cross_max = 8192;
};

struct BenchRow {
  Index n = 0;
  std::string path;
  std::uint64_t flops_update_top = 0;
  std::uint64_t flops_total = 0;
  Index hss_rank = 0;
  double deflation_fraction = 0.0;
  double wall_ms = 0.0;
  bool verified = true;
  double orthogonality = 0.0;
  double max_residual = 0.0;
};

BenchRow bench_one(const BenchArgs& a, Index n, PathOverride path, bool do_verify) {
  SymTridiagonal T = make_tridiag(a.kind, n, n);
  DCOptions opts = a.opts;
  opts.path = path;
  opts.seed = a.seed ? *a.seed : 0;

  BenchRow row;
  row.n = n;
  row.path = path == PathOverride::ForceHss ? "hss" : "dense";

  SolveStats stats;
  const auto t0 = std::chrono::steady_clock::now();
  EigenDecomposition E = solve(T, opts, stats);
  const auto t1 = std::chrono::steady_clock::now();
  row.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

  for (const auto& m : stats.merges) {
    if (m.level == 0) {
      row.flops_update_top = m.flops_update;
      row.hss_rank = m.hss_rank;
      row.deflation_fraction = m.deflation_fraction;
    }
  }
  row.flops_total = stats.flops_total;
  if (do_verify) {
    const VerifyMetrics v = verify(T, E);
    row.orthogonality = v.orthogonality;
    row.max_residual = v.max_residual;
    row.verified = v.ascending && v.orthogonality <= 5e-13 && v.max_residual <= 1e-12;
  }
  return row;
}

int run_bench(BenchArgs& a) {
  if (!is_tridiag_kind(a.kind)) throw InvalidParameter("bench needs a tridiagonal generator");

  if (a.crossover) {
    if (a.cross_min < 4 || a.cross_min > a.cross_max)
      throw InvalidParameter("crossover range is empty");
    auto hss_below_dense = [&](Index n) {
      const BenchRow d = bench_one(a, n, PathOverride::ForceDense, false);
      const BenchRow h = bench_one(a, n, PathOverride::ForceHss, false);
      std::fprintf(stderr, "n %lld dense %llu hss %llu\n", static_cast<long long>(n),
                   static_cast<unsigned long long>(d.flops_update_top),
                   static_cast<unsigned long long>(h.flops_update_top));
      return h.flops_update_top < d.flops_update_top;
    };
    if (!hss_below_dense(a.cross_max)) {
      std::printf("no crossover up to n = %lld\n", static_cast<long long>(a.cross_max));
      return kExitOk;
    }
    Index lo = a.cross_min, hi = a.cross_max;
    while (lo < hi) {
      const Index mid = lo + (hi - lo) / 2;
      if (hss_below_dense(mid))
        hi = mid;
      else
        lo = mid + 1;
    }
    std::printf("crossover n = %lld\n", static_cast<long long>(lo));
    return kExitOk;
  }

  if (a.ns.empty()) throw InvalidParameter("bench needs at least one --n value");
  const bool do_verify = !a.no_verify;

  std::vector<BenchRow> rows;
  for (Index n : a.ns) {
    rows.push_back(bench_one(a, n, PathOverride::ForceDense, do_verify));
    rows.push_back(bench_one(a, n, PathOverride::ForceHss, do_verify));
  }

  std::string text;
  if (a.format == "csv") {
    text = "n,path,flops_update_top_merge,flops_total,hss_rank,deflation_fraction,wall_ms";
    if (do_verify) text += ",orthogonality,max_residual";
    text += "\n";
    char buf[512];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%lld,%s,%llu,%llu,%lld,%s,%.3f",
                    static_cast<long long>(r.n), r.path.c_str(),
                    static_cast<unsigned long long>(r.flops_update_top),
                    static_cast<unsigned long long>(r.flops_total),
                    static_cast<long long>(r.hss_rank),
                    detail::format_double(r.deflation_fraction).c_str(), r.wall_ms);
      text += buf;
      if (do_verify) {
        std::snprintf(buf, sizeof buf, ",%s,%s", detail::format_double(r.orthogonality).c_str(),
                      detail::format_double(r.max_residual).c_str());
        text += buf;
      }
      text += "\n";
    }
  } else if (a.format == "json") {
    ordered_json j = ordered_json::array();
    for (const auto& r : rows) {
      ordered_json e;
      e["n"] = r.n;
      e["path"] = r.path;
      e["flops_update_top_merge"] = r.flops_update_top;
      e["flops_total"] = r.flops_total;
      e["hss_rank"] = r.hss_rank;
      e["deflation_fraction"] = r.deflation_fraction;
      e["wall_ms"] = r.wall_ms;
      if (do_verify) {
        e["orthogonality"] = r.orthogonality;
        e["max_residual"] = r.max_residual;
      }
      j.push_back(std::move(e));
    }
    text = j.dump(2) + "\n";
  } else {
    throw InvalidParameter("unknown bench format '" + a.format + "'");
  }

  if (a.out.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream out(a.out, std::ios::binary);
    if (!out) throw IoError("cannot open '" + a.out + "' for writing");
    out << text;
  }
  for (const auto& r : rows)
    if (!r.verified) return kExitVerifyFailed;
  return kExitOk;
}

struct HssTestArgs {
  std::string kind = "toeplitz-dense";
  Index n = 0;
  double tol = 1e-14;
  double d = 0.1;
  Index leaf_size = 128;
  Index r0 = 32;
  Index p = 10;
  Index rank_increment = 32;
  std::optional<std::uint64_t> seed;
};

int run_hss_test(const HssTestArgs& a) {
  const Matrix A = make_dense(a.kind, a.n, a.d);
  const MatrixSource src = dense_source(A);
  const ClusterTree tree = build_cluster_tree(a.n, std::min(a.leaf_size, a.n));
  const std::uint64_t seed = a.seed ? *a.seed : entropy_seed();

  FlopCounter fc;
  const auto t0 = std::chrono::steady_clock::now();
  const HSSMatrix H =
      compress_randomized(src, tree, a.r0, a.p, a.tol, a.rank_increment, seed, &fc);
  const auto t1 = std::chrono::steady_clock::now();

  ordered_json j;
  j["kind"] = a.kind;
  j["n"] = a.n;
  j["tol"] = a.tol;
  j["rng"] = {{"generator", rng_name()}, {"seed", seed}};
  j["hss_rank"] = H.diag.hss_rank;
  j["level_ranks"] = H.diag.level_ranks;
  j["samples"] = H.diag.samples_used;
  j["adaptive_growths"] = H.diag.adaptive_growths;
  j["exact_fallback"] = H.diag.exact_fallback;
  j["memory_entries"] = H.diag.memory_entries;
  j["construction_flops"] = H.diag.construction_flops;
  if (a.n <= 4000) {
    const Matrix R = hss_to_dense(H);
    j["rel_error"] = (R - A).norm() / A.norm();
  }
  j["wall_time_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
  std::fputs((j.dump(2) + "\n").c_str(), stdout);
  return kExitOk;
}

void add_dc_options(CLI::App* cmd, DCOptions& o, std::string& path_name,
                    std::optional<std::uint64_t>& seed, std::optional<int>& threads) {
  cmd->add_option("--base-size", o.base_size, "direct-solve size for recursion leaves");
  cmd->add_option("--switch-threshold", o.switch_threshold,
                  "smallest non-deflated size handled by the structured path");
  cmd->add_option("--hss-tol", o.hss_tol, "compression tolerance");
  cmd->add_option("--leaf-size", o.leaf_size, "cluster tree leaf size");
  cmd->add_option("--r0", o.r0, "initial rank guess for sampling");
  cmd->add_option("--oversample", o.p, "oversampling columns");
  cmd->add_option("--rank-increment", o.rank_increment, "adaptive sample growth step");
  cmd->add_option("--tol-factor", o.tol_factor, "deflation tolerance multiplier");
  cmd->add_option("--path", path_name, "auto | force-dense | force-hss")
      ->check(CLI::IsMember({"auto", "force-dense", "force-hss"}));
  cmd->add_option("--seed", seed, "random seed (drawn from entropy when omitted)");
  cmd->add_option("--threads", threads, "worker thread cap (0 = auto; HDC_THREADS honored)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid dense/structured divide-and-conquer symmetric tridiagonal eigensolver"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* cgen = app.add_subcommand("gen", "generate a matrix file");
  cgen->add_option("--kind", gen.kind,
                   "clement | hermite | toeplitz211 | sht | toeplitz-dense | kinetic")
      ->required();
  cgen->add_option("--n", gen.n, "dimension")->required();
  cgen->add_option("--m", gen.m, "second size parameter (sht)");
  cgen->add_option("--d", gen.d, "grid spacing (kinetic)");
  cgen->add_option("--out", gen.out, "output file")->required();

  SolveArgs sol;
  auto* csolve = app.add_subcommand("solve", "solve and emit a JSON report");
  csolve->add_option("--in", sol.in, "tridiagonal matrix file");
  csolve->add_option("--kind", sol.kind, "inline generator: clement | hermite | toeplitz211 | sht");
  csolve->add_option("--n", sol.n, "dimension for inline generators");
  csolve->add_option("--m", sol.m, "second size parameter (sht)");
  csolve->add_option("--report", sol.report_path, "report file (stdout when omitted)");
  csolve->add_option("--evals", sol.evals_path, "write eigenvalues, one per line");
  csolve->add_option("--max-orth", sol.max_orth, "orthogonality threshold");
  csolve->add_option("--max-residual", sol.max_residual, "residual threshold");
  std::optional<std::uint64_t> solve_seed;
  std::optional<int> solve_threads;
  add_dc_options(csolve, sol.opts, sol.path_name, solve_seed, solve_threads);

  BenchArgs ben;
  auto* cbench = app.add_subcommand("bench", "dense vs structured flop comparison");
  cbench->add_option("--kind", ben.kind, "tridiagonal generator");
  cbench->add_option("--n", ben.ns, "problem sizes")->delimiter(',');
  cbench->add_option("--format", ben.format, "csv | json");
  cbench->add_option("--out", ben.out, "output file (stdout when omitted)");
  cbench->add_flag("--no-verify", ben.no_verify, "skip verification columns");
  cbench->add_flag("--crossover", ben.crossover, "bisect for the flop crossover size");
  cbench->add_option("--min", ben.cross_min, "crossover search lower bound");
  cbench->add_option("--max", ben.cross_max, "crossover search upper bound");
  std::string bench_path_ignored = "auto";
  std::optional<std::uint64_t> bench_seed;
  std::optional<int> bench_threads;
  add_dc_options(cbench, ben.opts, bench_path_ignored, bench_seed, bench_threads);

  HssTestArgs ht;
  auto* chss = app.add_subcommand("hss-test", "compression fidelity check on dense generators");
  chss->add_option("--kind", ht.kind, "toeplitz-dense | kinetic")->required();
  chss->add_option("--n", ht.n, "dimension")->required();
  chss->add_option("--tol", ht.tol, "compression tolerance");
  chss->add_option("--d", ht.d, "grid spacing (kinetic)");
  chss->add_option("--leaf-size", ht.leaf_size, "cluster tree leaf size");
  chss->add_option("--r0", ht.r0, "initial rank guess");
  chss->add_option("--oversample", ht.p, "oversampling columns");
  chss->add_option("--rank-increment", ht.rank_increment, "adaptive growth step");
  chss->add_option("--seed", ht.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (cgen->parsed()) return run_gen(gen);
    if (csolve->parsed()) {
      sol.seed = solve_seed;
      sol.threads = solve_threads;
      return run_solve(sol);
    }
    if (cbench->parsed()) {
      ben.seed = bench_seed;
      ben.threads = bench_threads;
      return run_bench(ben);
    }
    if (chss->parsed()) return run_hss_test(ht);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
