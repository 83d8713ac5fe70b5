// Acceptance gate: one PASS/FAIL line per shipped guarantee, nonzero exit
// if anything fails. Run through ctest or directly from the build tree.

#include <sys/wait.h>

#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hdc/dc.hpp"
#include "hdc/hss.hpp"
#include "hdc/matgen.hpp"
#include "oracles.hpp"

#ifndef HDC_CLI_PATH
#error "HDC_CLI_PATH must point at the command line binary"
#endif
#ifndef HDC_TEST_TMPDIR
#error "HDC_TEST_TMPDIR must point at a scratch directory"
#endif

using namespace hdc;

namespace {

int g_failures = 0;

void report(int idx, bool ok, const std::string& detail) {
  std::printf("%s  %2d  %s\n", ok ? "PASS" : "FAIL", idx, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SymTridiagonal make_family(const std::string& kind, Index n) {
  if (kind == "clement") return matgen::clement(n);
  if (kind == "hermite") return matgen::hermite(n);
  return matgen::toeplitz211(n);
}

DCOptions structured_opts(Index switch_threshold, Index leaf_size) {
  DCOptions o;
  o.path = PathOverride::ForceHss;
  o.switch_threshold = switch_threshold;
  o.leaf_size = leaf_size;
  if (leaf_size < 32) {
    o.r0 = 16;
    o.p = 8;
    o.rank_increment = 16;
  }
  return o;
}

// 1. Structured-path orthogonality on the three stock families at n = 2000.
void criterion_orthogonality() {
  const Index n = 2000;
  double worst = 0.0;
  double slowest = 0.0;
  std::string detail;
  for (const std::string kind : {"clement", "hermite", "toeplitz211"}) {
    SymTridiagonal T = make_family(kind, n);
    DCOptions opts = structured_opts(256, 128);
    opts.seed = 1;
    SolveStats st;
    const auto t0 = std::chrono::steady_clock::now();
    EigenDecomposition E = solve(T, opts, st);
    const double secs = seconds_since(t0);
    VerifyMetrics m = verify(T, E);
    worst = std::max(worst, m.orthogonality);
    slowest = std::max(slowest, secs);
    detail += fmt("%s %.2e/%.1fs ", kind.c_str(), m.orthogonality, secs);
  }
  report(1, worst <= 5e-13, detail + fmt("(bound 5e-13, worst %.2e)", worst));
}

// 2. Exactly known spectra: the second difference stencil and the integer
// ladder.
void criterion_known_spectra() {
  const Index n1 = 2000;
  SymTridiagonal T1 = matgen::toeplitz211(n1);
  SolveStats st;
  DCOptions opts;
  opts.seed = 1;
  EigenDecomposition E1 = solve(T1, opts, st);
  double err1 = 0.0;
  for (Index k = 0; k < n1; ++k)
    err1 = std::max(err1, std::abs(E1.values[k] - matgen::toeplitz211_eigenvalue(n1, n1 - k)));

  const Index n2 = 200;
  SymTridiagonal T2 = matgen::clement(n2);
  EigenDecomposition E2 = solve(T2, opts, st);
  double err2 = 0.0;
  for (Index k = 0; k < n2; ++k) {
    const double ladder = static_cast<double>(-(n2 - 1) + 2 * k);
    err2 = std::max(err2, std::abs(E2.values[k] - ladder));
  }

  report(2, err1 <= 1e-12 && err2 <= 1e-9,
         fmt("stencil n=2000 max err %.2e (1e-12), ladder n=200 max err %.2e (1e-9)", err1,
             err2));
}

// 3. Fifty seeded random tridiagonals against the rotation-based dense
// solver, values and residuals both tied to the input norm.
void criterion_random_oracle() {
  double worst_gap = 0.0, worst_resid = 0.0;
  bool ok = true;
  for (int s = 1; s <= 50; ++s) {
    std::mt19937_64 gen(1000 + s);
    std::uniform_int_distribution<Index> pick(5, 200);
    const Index n = pick(gen);
    SymTridiagonal T = oracle::random_tridiag(9000 + s, n);
    const double scale = T.frobenius_norm();

    Vector dj;
    Matrix Uj;
    jacobi_eigensolve(T.to_dense(), dj, Uj, nullptr);

    DCOptions opts;
    opts.seed = s;
    SolveStats st;
    EigenDecomposition E = solve(T, opts, st);

    const double gap = (E.values - dj).cwiseAbs().maxCoeff() / scale;
    const double resid = verify(T, E).max_residual;
    worst_gap = std::max(worst_gap, gap);
    worst_resid = std::max(worst_resid, resid);
    ok = ok && gap <= 1e-12 && resid <= 1e-12;
  }
  report(3, ok,
         fmt("50 runs n in [5,200]: worst value gap %.2e, worst residual %.2e (1e-12)",
             worst_gap, worst_resid));
}

// 4. Dense and structured paths land in the same eigenspaces.
void criterion_path_equivalence() {
  double worst = 0.0;
  for (const std::string kind : {"clement", "hermite", "toeplitz211"}) {
    for (Index n : {Index(128), Index(256), Index(512)}) {
      SymTridiagonal T = make_family(kind, n);
      DCOptions od;
      od.path = PathOverride::ForceDense;
      od.seed = 2;
      DCOptions oh = structured_opts(64, 16);
      oh.seed = 2;
      SolveStats sd, sh;
      EigenDecomposition Ed = solve(T, od, sd);
      EigenDecomposition Eh = solve(T, oh, sh);
      worst = std::max(worst, oracle::subspace_alignment(Ed.vectors, Eh.vectors));
    }
  }
  report(4, worst <= 1e-10, fmt("9 family/size pairs, worst alignment %.2e (1e-10)", worst));
}

// 5. Compression fidelity on the two dense generators at n = 2000.
void criterion_compression() {
  const Index n = 2000;
  ClusterTree tree = build_cluster_tree(n, 128);

  Matrix A1 = matgen::toeplitz_dense(n, matgen::ToeplitzKind::DiagDominant);
  HSSMatrix H1 = compress_randomized(dense_source(A1), tree, 32, 10, 1e-14, 32, 5);
  const double err1 = (hss_to_dense(H1) - A1).norm() / A1.norm();

  Matrix A2 = matgen::toeplitz_dense(n, matgen::ToeplitzKind::Kinetic, 0.1);
  HSSMatrix H2 = compress_randomized(dense_source(A2), tree, 32, 10, 1e-14, 32, 5);
  const double err2 = (hss_to_dense(H2) - A2).norm() / A2.norm();

  report(5, H1.hss_rank() <= 5 && err1 <= 1e-13 && err2 <= 1e-13,
         fmt("diag-dominant rank %lld (<=5) err %.2e, kinetic rank %lld (recorded) err %.2e "
             "(1e-13)",
             static_cast<long long>(H1.hss_rank()), err1,
             static_cast<long long>(H2.hss_rank()), err2));
}

// 6. The rank-one eigenvector matrix has numerically low-rank off-diagonal
// blocks, and compression sees that rank.
void criterion_offdiag_rank() {
  const Index N = 1000;
  SecularSystem sys;
  sys.d.resize(N);
  for (Index i = 0; i < N; ++i) sys.d[i] = static_cast<double>(i + 1) / static_cast<double>(N);
  std::mt19937_64 gen(1234);
  std::normal_distribution<double> dist(0.0, 1.0);
  sys.z.resize(N);
  for (Index i = 0; i < N; ++i) sys.z[i] = dist(gen);
  sys.z /= sys.z.norm();
  sys.rho = 1.0;
  sys.validate();

  auto roots = solve_secular(sys);
  Vector z_hat = lowner_reweight(sys, roots);
  Matrix Q = qhat_apply(sys, z_hat, roots, Matrix::Identity(N, N), false, nullptr);

  Eigen::BDCSVD<Matrix> svd(Q.block(0, N / 2, N / 2, N / 2));
  const Vector& sv = svd.singularValues();
  const double ratio = sv[99] / sv[0];

  ClusterTree tree = build_cluster_tree(N, 128);
  HSSMatrix H = compress_randomized(dense_source(Q), tree, 32, 10, 1e-14, 32, 6);

  report(6, ratio <= 1e-10 && H.hss_rank() <= 200,
         fmt("sigma_100/sigma_1 = %.2e (1e-10), hss rank %lld (<=200)", ratio,
             static_cast<long long>(H.hss_rank())));
}

// 7. Structured update beats the dense update in flops at the top merge,
// with a monotonically improving ratio.
void criterion_flop_crossover() {
  std::vector<double> ratios;
  bool hss_wins_at_4096 = false;
  std::string detail;
  for (Index n : {Index(512), Index(1024), Index(2048), Index(4096)}) {
    SymTridiagonal T = matgen::clement(n);

    DCOptions od;
    od.path = PathOverride::ForceDense;
    od.seed = 3;
    SolveStats sd;
    solve(T, od, sd);

    DCOptions oh = structured_opts(256, 128);
    oh.seed = 3;
    SolveStats sh;
    solve(T, oh, sh);

    std::uint64_t fd = 0, fh = 0;
    for (const auto& m : sd.merges)
      if (m.level == 0) fd = m.flops_update;
    for (const auto& m : sh.merges)
      if (m.level == 0) fh = m.flops_update;

    const double ratio = static_cast<double>(fh) / static_cast<double>(fd);
    ratios.push_back(ratio);
    if (n == 4096) hss_wins_at_4096 = fh < fd;
    detail += fmt("n=%lld %.3f ", static_cast<long long>(n), ratio);
  }
  bool monotone = true;
  for (std::size_t i = 1; i < ratios.size(); ++i) monotone = monotone && ratios[i] < ratios[i - 1];
  report(7, hss_wins_at_4096 && monotone,
         "top-merge hss/dense flop ratios " + detail + "(monotone down, < 1 at 4096)");
}

// 8. A nearly decoupled matrix deflates the top merge almost entirely and
// stays orthogonal.
void criterion_deflation() {
  const Index n = 1000;
  SymTridiagonal T;
  T.diag = Vector::Constant(n, 1.0);
  T.offdiag = Vector::Zero(n - 1);
  T.offdiag[n / 2 - 1] = 0.01;

  DCOptions opts;
  opts.seed = 4;
  SolveStats st;
  EigenDecomposition E = solve(T, opts, st);

  double top_fraction = 0.0;
  for (const auto& m : st.merges)
    if (m.level == 0) top_fraction = m.deflation_fraction;
  VerifyMetrics m = verify(T, E);

  report(8, top_fraction >= 0.9 && m.orthogonality <= 5e-13,
         fmt("top-merge deflation %.3f (>=0.9), orthogonality %.2e (5e-13)", top_fraction,
             m.orthogonality));
}

// 9. Same seed, same bytes: reports differ only in wall time.
void criterion_determinism() {
  auto run = [&](const std::string& rep) {
    const std::string cmd = std::string(HDC_CLI_PATH) +
                            " solve --kind clement --n 300 --seed 7 --path force-hss"
                            " --leaf-size 32 --switch-threshold 64 --r0 16 --report " +
                            rep + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return status != -1 && WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  auto strip = [](const std::string& path) {
    std::ifstream in(path);
    std::ostringstream kept;
    std::string line;
    while (std::getline(in, line))
      if (line.find("wall_time_ms") == std::string::npos) kept << line << "\n";
    return kept.str();
  };

  const std::string a = std::string(HDC_TEST_TMPDIR) + "/accept_det_a.json";
  const std::string b = std::string(HDC_TEST_TMPDIR) + "/accept_det_b.json";
  const bool ran = run(a) && run(b);
  const std::string ta = strip(a), tb = strip(b);
  report(9, ran && !ta.empty() && ta == tb,
         fmt("two seed-7 runs, %zu report bytes compared ignoring wall time", ta.size()));
}

// 10. The spherical harmonic family at n = m = 2000 passes verification on
// both paths.
void criterion_sht() {
  const Index n = 2000;
  SymTridiagonal T = matgen::sht(n, n);
  double worst_orth = 0.0, worst_resid = 0.0;
  for (bool hss : {false, true}) {
    DCOptions opts = hss ? structured_opts(256, 128) : DCOptions{};
    if (!hss) opts.path = PathOverride::ForceDense;
    opts.seed = 5;
    SolveStats st;
    EigenDecomposition E = solve(T, opts, st);
    VerifyMetrics m = verify(T, E);
    worst_orth = std::max(worst_orth, m.orthogonality);
    worst_resid = std::max(worst_resid, m.max_residual);
  }
  report(10, worst_orth <= 5e-13 && worst_resid <= 1e-12,
         fmt("both paths: orthogonality %.2e (5e-13), residual %.2e (1e-12)", worst_orth,
             worst_resid));
}

}  // namespace

int main() {
  criterion_orthogonality();
  criterion_known_spectra();
  criterion_random_oracle();
  criterion_path_equivalence();
  criterion_compression();
  criterion_offdiag_rank();
  criterion_flop_crossover();
  criterion_deflation();
  criterion_determinism();
  criterion_sht();

  if (g_failures) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
