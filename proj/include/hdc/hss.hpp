#ifndef HDC_HSS_HPP
#define HDC_HSS_HPP

#include <algorithm>
#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <utility>
#include <vector>

#include "hdc/cluster_tree.hpp"
#include "hdc/common.hpp"
#include "hdc/flops.hpp"
#include "hdc/interp_decomp.hpp"
#include "hdc/rng.hpp"

namespace hdc {

/// Access abstraction over the matrix being compressed: a block multiply
/// (A*X and A^T*X) to produce samples, and an entry oracle for diagonal
/// and coupling blocks.
struct MatrixSource {
  Index n = 0;
  std::function<Matrix(const Matrix&, bool transpose, FlopCounter*)> multiply;
  std::function<double(Index, Index)> entry;

  void validate() const {
    if (n < 1) throw InvalidDimension("matrix source: n must be positive");
    if (!multiply || !entry) throw InvalidParameter("matrix source: missing capability");
  }

  Matrix entries(const std::vector<Index>& rows, const std::vector<Index>& cols) const {
    Matrix B(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
    for (Index j = 0; j < B.cols(); ++j)
      for (Index i = 0; i < B.rows(); ++i) B(i, j) = entry(rows[i], cols[j]);
    return B;
  }
};

inline MatrixSource dense_source(const Matrix& A) {
  if (A.rows() != A.cols()) throw InvalidDimension("dense source: matrix must be square");
  auto Ap = std::make_shared<Matrix>(A);
  MatrixSource src;
  src.n = Ap->rows();
  src.multiply = [Ap](const Matrix& X, bool transpose, FlopCounter* fc) {
    Matrix Y = transpose ? Matrix(Ap->transpose() * X) : Matrix(*Ap * X);
    if (fc) fc->add_gemm(Ap->rows(), X.cols(), Ap->cols());
    return Y;
  };
  src.entry = [Ap](Index i, Index j) { return (*Ap)(i, j); };
  return src;
}

/// Generators of one tree node. Leaves hold the diagonal block D and tall
/// interpolation bases U, V; internal nodes hold the small transfer blocks
/// (acting on stacked child ranks) and the sibling coupling blocks B1
/// (left rows vs right columns) and B2 (right rows vs left columns).
/// Selected row/column index sets are kept both as global matrix indices
/// (for entry extraction) and as local positions (the identity rows of the
/// interpolation bases).
struct HSSNode {
  Matrix D;
  Matrix U, V;
  Matrix B1, B2;
  std::vector<Index> row_global, col_global;
  std::vector<Index> row_local, col_local;
  bool exact_fallback = false;

  Index row_rank() const { return static_cast<Index>(row_global.size()); }
  Index col_rank() const { return static_cast<Index>(col_global.size()); }
};

struct HSSDiagnostics {
  Index hss_rank = 0;
  std::vector<Index> level_ranks;  // max selected-set size per level, root level 0
  std::uint64_t memory_entries = 0;
  std::uint64_t construction_flops = 0;
  Index samples_used = 0;
  Index adaptive_growths = 0;
  bool exact_fallback = false;
};

struct HSSMatrix {
  ClusterTree tree;
  std::vector<HSSNode> nodes;
  Index n = 0;
  HSSDiagnostics diag;

  Index hss_rank() const { return diag.hss_rank; }
};

/// Per-node sampling workspace carried between levels of the construction:
/// local sample residuals restricted to the selected rows/columns, the
/// compressed carries, and the random blocks themselves.
struct SamplingState {
  Index samples = 0;  // current column count (rank guess + oversampling)
  Matrix omega1, omega2;
  Matrix Y, Z;  // A*omega1, A^T*omega2
  std::vector<Matrix> phi_sel;    // per node, row_rank x samples
  std::vector<Matrix> theta_sel;  // per node, col_rank x samples
  std::vector<Matrix> yhat;       // per node, col_rank x samples
  std::vector<Matrix> zhat;       // per node, row_rank x samples
};

namespace detail {

inline Matrix gather_rows(const Matrix& M, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), M.cols());
  for (Index i = 0; i < out.rows(); ++i) out.row(i) = M.row(rows[i]);
  return out;
}

class RandCompressor {
 public:
  RandCompressor(const MatrixSource& src, const ClusterTree& tree, Index p, double tol,
                 Index rank_increment, std::uint64_t seed)
      : src_(src),
        tree_(tree),
        p_(p),
        tol_(tol),
        inc_(rank_increment),
        g1_(seed, 1),
        g2_(seed, 2) {}

  HSSMatrix run(Index r0) {
    HSSMatrix H;
    H.tree = tree_;
    H.n = tree_.n;
    H.nodes.assign(tree_.nodes.size(), HSSNode{});
    H_ = &H;

    if (tree_.size() == 1) {
      // single leaf: the representation is just the dense block
      std::vector<Index> all(tree_.n);
      std::iota(all.begin(), all.end(), Index(0));
      H.nodes[0].D = src_.entries(all, all);
      finalize_diag(H);
      return H;
    }

    init_samples(std::min(r0 + p_, src_.n));

    const auto groups = tree_.levels_bottom_up();
    std::size_t gi = 0;
    while (gi < groups.size()) {
      bool regrow = false;
      for (Index i : groups[gi]) {
        if (process_node(i, gi)) {
          regrow = true;
          break;
        }
      }
      if (regrow) continue;  // same level again with more samples
      ++gi;
    }

    finalize_diag(H);
    return H;
  }

 private:
  void init_samples(Index s) {
    st_.samples = s;
    st_.omega1.resize(src_.n, s);
    st_.omega2.resize(src_.n, s);
    g1_.fill(st_.omega1, 0, 0);
    g2_.fill(st_.omega2, 0, 0);
    st_.Y = src_.multiply(st_.omega1, false, &cf_);
    st_.Z = src_.multiply(st_.omega2, true, &cf_);
    update_scale();
    const Index nn = tree_.size();
    st_.phi_sel.assign(nn, Matrix());
    st_.theta_sel.assign(nn, Matrix());
    st_.yhat.assign(nn, Matrix());
    st_.zhat.assign(nn, Matrix());
  }

  // E‖AΩ‖_F² = s·‖A‖_F² for Gaussian Ω, so ‖Y‖_F/√s estimates the norm of the
  // whole matrix.
  void update_scale() {
    scale_ = std::max(st_.Y.norm(), st_.Z.norm()) / std::sqrt(static_cast<double>(st_.samples));
  }

  // The compression tolerance is relative to the whole matrix, while the ID
  // truncates relative to its own first pivot (the largest row norm).  Convert
  // so that truncation happens at the absolute level tol·‖A‖: residuals of
  // blocks that are computed by cancellation against large diagonal entries
  // carry roundoff noise far above their own relative floor, and truncating
  // against it would select noise vectors until the sample budget is gone.
  // The 1/2 absorbs accumulation over the tree's many truncations, keeping the
  // end-to-end reconstruction error comfortably below 10·tol·‖A‖_F.
  double block_tol(const Matrix& M) const {
    double r00 = 0.0;
    for (Index i = 0; i < M.rows(); ++i) r00 = std::max(r00, M.row(i).norm());
    if (!(r00 > 0.0) || !(scale_ > 0.0)) return tol_;
    return 0.5 * tol_ * scale_ / r00;
  }

  // Returns true if the sample set grew (caller restarts the level).
  bool process_node(Index i, std::size_t level_group) {
    const auto& tn = tree_.nodes[i];
    HSSNode& node = H_->nodes[i];

    if (tn.parent < 0) {  // root: only the child coupling blocks
      store_b(node, tn);
      return false;
    }

    Matrix Phi, Theta;
    if (tn.is_leaf()) {
      const Index b = tn.begin, m = tn.span();
      if (node.D.size() == 0) {
        std::vector<Index> idx(m);
        std::iota(idx.begin(), idx.end(), b);
        node.D = src_.entries(idx, idx);
      }
      Phi = st_.Y.middleRows(b, m) - node.D * st_.omega1.middleRows(b, m);
      Theta = st_.Z.middleRows(b, m) - node.D.transpose() * st_.omega2.middleRows(b, m);
      cf_.add_gemm(m, st_.samples, m);
      cf_.add_gemm(m, st_.samples, m);
    } else {
      store_b(node, tn);
      const Index c1 = tn.left, c2 = tn.right;
      const HSSNode &n1 = H_->nodes[c1], &n2 = H_->nodes[c2];
      Phi.resize(n1.row_rank() + n2.row_rank(), st_.samples);
      Phi.topRows(n1.row_rank()) = st_.phi_sel[c1] - node.B1 * st_.yhat[c2];
      Phi.bottomRows(n2.row_rank()) = st_.phi_sel[c2] - node.B2 * st_.yhat[c1];
      cf_.add_gemm(n1.row_rank(), st_.samples, n2.col_rank());
      cf_.add_gemm(n2.row_rank(), st_.samples, n1.col_rank());
      Theta.resize(n1.col_rank() + n2.col_rank(), st_.samples);
      Theta.topRows(n1.col_rank()) = st_.theta_sel[c1] - node.B2.transpose() * st_.zhat[c2];
      Theta.bottomRows(n2.col_rank()) = st_.theta_sel[c2] - node.B1.transpose() * st_.zhat[c1];
      cf_.add_gemm(n1.col_rank(), st_.samples, n2.row_rank());
      cf_.add_gemm(n2.col_rank(), st_.samples, n1.row_rank());
    }

    auto idU = interpolative_decomposition(Phi, block_tol(Phi), -1, &cf_);
    auto idV = interpolative_decomposition(Theta, block_tol(Theta), -1, &cf_);

    const Index margin = st_.samples - p_;
    if (idU.rank() > margin || idV.rank() > margin) {
      if (st_.samples + inc_ > src_.n) {
        // cannot certify with more samples: keep this node exact
        node.exact_fallback = true;
        H_->diag.exact_fallback = true;
        const Index rows = Phi.rows(), cols = Theta.rows();
        idU.interp = Matrix::Identity(rows, rows);
        idU.selected.resize(rows);
        std::iota(idU.selected.begin(), idU.selected.end(), Index(0));
        idV.interp = Matrix::Identity(cols, cols);
        idV.selected.resize(cols);
        std::iota(idV.selected.begin(), idV.selected.end(), Index(0));
      } else {
        grow(level_group);
        return true;
      }
    }

    node.U = std::move(idU.interp);
    node.V = std::move(idV.interp);
    node.row_local = std::move(idU.selected);
    node.col_local = std::move(idV.selected);
    node.row_global = to_global_rows(tn, node.row_local);
    node.col_global = to_global_cols(tn, node.col_local);

    st_.phi_sel[i] = gather_rows(Phi, node.row_local);
    st_.theta_sel[i] = gather_rows(Theta, node.col_local);
    if (tn.is_leaf()) {
      const Index b = tn.begin, m = tn.span();
      st_.yhat[i] = node.V.transpose() * st_.omega1.middleRows(b, m);
      st_.zhat[i] = node.U.transpose() * st_.omega2.middleRows(b, m);
      cf_.add_gemm(node.col_rank(), st_.samples, m);
      cf_.add_gemm(node.row_rank(), st_.samples, m);
    } else {
      const Index c1 = tn.left, c2 = tn.right;
      Matrix ys(st_.yhat[c1].rows() + st_.yhat[c2].rows(), st_.samples);
      ys << st_.yhat[c1], st_.yhat[c2];
      st_.yhat[i] = node.V.transpose() * ys;
      Matrix zs(st_.zhat[c1].rows() + st_.zhat[c2].rows(), st_.samples);
      zs << st_.zhat[c1], st_.zhat[c2];
      st_.zhat[i] = node.U.transpose() * zs;
      cf_.add_gemm(node.col_rank(), st_.samples, ys.rows());
      cf_.add_gemm(node.row_rank(), st_.samples, zs.rows());
    }
    return false;
  }

  void store_b(HSSNode& node, const ClusterNode& tn) {
    if (node.B1.size() != 0) return;  // children fixed since last time
    const HSSNode& n1 = H_->nodes[tn.left];
    const HSSNode& n2 = H_->nodes[tn.right];
    node.B1 = src_.entries(n1.row_global, n2.col_global);
    node.B2 = src_.entries(n2.row_global, n1.col_global);
  }

  std::vector<Index> to_global_rows(const ClusterNode& tn, const std::vector<Index>& local) const {
    std::vector<Index> out(local.size());
    if (tn.is_leaf()) {
      for (std::size_t k = 0; k < local.size(); ++k) out[k] = tn.begin + local[k];
    } else {
      const auto& g1 = H_->nodes[tn.left].row_global;
      const auto& g2 = H_->nodes[tn.right].row_global;
      for (std::size_t k = 0; k < local.size(); ++k) {
        const Index l = local[k];
        out[k] = l < static_cast<Index>(g1.size()) ? g1[l] : g2[l - g1.size()];
      }
    }
    return out;
  }

  std::vector<Index> to_global_cols(const ClusterNode& tn, const std::vector<Index>& local) const {
    std::vector<Index> out(local.size());
    if (tn.is_leaf()) {
      for (std::size_t k = 0; k < local.size(); ++k) out[k] = tn.begin + local[k];
    } else {
      const auto& g1 = H_->nodes[tn.left].col_global;
      const auto& g2 = H_->nodes[tn.right].col_global;
      for (std::size_t k = 0; k < local.size(); ++k) {
        const Index l = local[k];
        out[k] = l < static_cast<Index>(g1.size()) ? g1[l] : g2[l - g1.size()];
      }
    }
    return out;
  }

  // Append rank_increment fresh sample columns and extend every completed
  // node's carries to the new width; nodes of the current level are then
  // recomputed from scratch by the caller.
  void grow(std::size_t level_group) {
    ++H_->diag.adaptive_growths;
    const Index s_old = st_.samples;
    const Index s_new = s_old + inc_;

    Matrix ext1(src_.n, inc_), ext2(src_.n, inc_);
    g1_.fill(ext1, 0, s_old);
    g2_.fill(ext2, 0, s_old);
    st_.omega1.conservativeResize(Eigen::NoChange, s_new);
    st_.omega2.conservativeResize(Eigen::NoChange, s_new);
    st_.omega1.rightCols(inc_) = ext1;
    st_.omega2.rightCols(inc_) = ext2;

    Matrix Yext = src_.multiply(ext1, false, &cf_);
    Matrix Zext = src_.multiply(ext2, true, &cf_);
    st_.Y.conservativeResize(Eigen::NoChange, s_new);
    st_.Z.conservativeResize(Eigen::NoChange, s_new);
    st_.Y.rightCols(inc_) = Yext;
    st_.Z.rightCols(inc_) = Zext;
    st_.samples = s_new;
    update_scale();

    const auto groups = tree_.levels_bottom_up();
    for (std::size_t g = 0; g < level_group; ++g)
      for (Index i : groups[g]) extend_node(i, s_old, inc_);
  }

  void extend_node(Index i, Index s_old, Index inc) {
    const auto& tn = tree_.nodes[i];
    if (tn.parent < 0) return;
    HSSNode& node = H_->nodes[i];

    Matrix phi_ext, theta_ext;
    if (tn.is_leaf()) {
      const Index b = tn.begin, m = tn.span();
      phi_ext = st_.Y.block(b, s_old, m, inc) - node.D * st_.omega1.block(b, s_old, m, inc);
      theta_ext = st_.Z.block(b, s_old, m, inc) -
                  node.D.transpose() * st_.omega2.block(b, s_old, m, inc);
      cf_.add_gemm(m, inc, m);
      cf_.add_gemm(m, inc, m);
    } else {
      const Index c1 = tn.left, c2 = tn.right;
      const HSSNode &n1 = H_->nodes[c1], &n2 = H_->nodes[c2];
      phi_ext.resize(n1.row_rank() + n2.row_rank(), inc);
      phi_ext.topRows(n1.row_rank()) =
          st_.phi_sel[c1].rightCols(inc) - node.B1 * st_.yhat[c2].rightCols(inc);
      phi_ext.bottomRows(n2.row_rank()) =
          st_.phi_sel[c2].rightCols(inc) - node.B2 * st_.yhat[c1].rightCols(inc);
      theta_ext.resize(n1.col_rank() + n2.col_rank(), inc);
      theta_ext.topRows(n1.col_rank()) =
          st_.theta_sel[c1].rightCols(inc) - node.B2.transpose() * st_.zhat[c2].rightCols(inc);
      theta_ext.bottomRows(n2.col_rank()) =
          st_.theta_sel[c2].rightCols(inc) - node.B1.transpose() * st_.zhat[c1].rightCols(inc);
      cf_.add_gemm(n1.row_rank(), inc, n2.col_rank());
      cf_.add_gemm(n2.row_rank(), inc, n1.col_rank());
      cf_.add_gemm(n1.col_rank(), inc, n2.row_rank());
      cf_.add_gemm(n2.col_rank(), inc, n1.row_rank());
    }

    append_cols(st_.phi_sel[i], gather_rows(phi_ext, node.row_local));
    append_cols(st_.theta_sel[i], gather_rows(theta_ext, node.col_local));

    Matrix yext, zext;
    if (tn.is_leaf()) {
      const Index b = tn.begin, m = tn.span();
      yext = node.V.transpose() * st_.omega1.block(b, s_old, m, inc);
      zext = node.U.transpose() * st_.omega2.block(b, s_old, m, inc);
      cf_.add_gemm(node.col_rank(), inc, m);
      cf_.add_gemm(node.row_rank(), inc, m);
    } else {
      const Index c1 = tn.left, c2 = tn.right;
      Matrix ys(st_.yhat[c1].rows() + st_.yhat[c2].rows(), inc);
      ys << st_.yhat[c1].rightCols(inc), st_.yhat[c2].rightCols(inc);
      yext = node.V.transpose() * ys;
      Matrix zs(st_.zhat[c1].rows() + st_.zhat[c2].rows(), inc);
      zs << st_.zhat[c1].rightCols(inc), st_.zhat[c2].rightCols(inc);
      zext = node.U.transpose() * zs;
      cf_.add_gemm(node.col_rank(), inc, ys.rows());
      cf_.add_gemm(node.row_rank(), inc, zs.rows());
    }
    append_cols(st_.yhat[i], yext);
    append_cols(st_.zhat[i], zext);
  }

  static void append_cols(Matrix& M, const Matrix& ext) {
    M.conservativeResize(Eigen::NoChange, M.cols() + ext.cols());
    M.rightCols(ext.cols()) = ext;
  }

  void finalize_diag(HSSMatrix& H) {
    auto& d = H.diag;
    d.samples_used = st_.samples;
    d.construction_flops = cf_.flops;
    d.level_ranks.assign(tree_.num_levels(), 0);
    d.hss_rank = 0;
    d.memory_entries = 0;
    for (Index i = 0; i < tree_.size(); ++i) {
      const auto& node = H.nodes[i];
      const Index r = std::max(node.row_rank(), node.col_rank());
      if (tree_.nodes[i].parent >= 0) {
        d.hss_rank = std::max(d.hss_rank, r);
        d.level_ranks[tree_.nodes[i].level] = std::max(d.level_ranks[tree_.nodes[i].level], r);
      }
      d.memory_entries += static_cast<std::uint64_t>(node.D.size()) + node.U.size() +
                          node.V.size() + node.B1.size() + node.B2.size();
    }
  }

  const MatrixSource& src_;
  const ClusterTree& tree_;
  Index p_;
  double tol_;
  double scale_ = 0.0;
  Index inc_;
  GaussianSampler g1_, g2_;
  SamplingState st_;
  FlopCounter cf_;
  HSSMatrix* H_ = nullptr;
};

}  // namespace detail

/// Randomized bottom-up HSS construction: sample blocks through the
/// multiply capability, compress per-node residuals with row/column IDs,
/// extract B generators through the entry capability. The sample count
/// starts at r0 + p and grows by rank_increment whenever some node's ID
/// rank exceeds the certified margin (samples - p); completed levels keep
/// their generators and only extend their carries. Deterministic for a
/// fixed seed and adaptivity trace.
inline HSSMatrix compress_randomized(const MatrixSource& src, const ClusterTree& tree, Index r0,
                                     Index p, double tol, Index rank_increment,
                                     std::uint64_t seed, FlopCounter* fc = nullptr) {
  src.validate();
  tree.validate();
  if (src.n != tree.n) throw DimensionMismatch("compress: source and tree dimensions differ");
  if (r0 < 1) throw InvalidParameter("compress: r0 must be >= 1");
  if (p < 0) throw InvalidParameter("compress: oversampling must be >= 0");
  if (rank_increment < 1) throw InvalidParameter("compress: rank_increment must be >= 1");
  if (!(tol >= 0.0)) throw InvalidParameter("compress: tol must be >= 0");

  detail::RandCompressor comp(src, tree, p, tol, rank_increment, seed);
  HSSMatrix H = comp.run(r0);
  count(fc, H.diag.construction_flops);
  return H;
}

/// Column-blocked structured multiply Y = A*X (or A^T*X). Each column's
/// summation order is fixed by the tree and independent of the blocking,
/// so results are bit-stable across block widths.
inline Matrix hss_matmat(const HSSMatrix& H, const Matrix& X, bool transpose,
                         FlopCounter* fc = nullptr, Index block_width = 64) {
  if (X.rows() != H.n) throw DimensionMismatch("hss_matmat: X row count mismatch");
  if (block_width < 1) throw InvalidParameter("hss_matmat: block width must be positive");
  const Index nn = H.tree.size();
  Matrix Y(H.n, X.cols());

  std::vector<Matrix> xt(nn), g(nn), xloc(nn);
  for (Index b0 = 0; b0 < X.cols(); b0 += block_width) {
    const Index w = std::min(block_width, X.cols() - b0);
    const Matrix Xb = X.middleCols(b0, w);

    // upward: gather carries through the column bases
    for (Index i = 0; i < nn; ++i) {
      const auto& tn = H.tree.nodes[i];
      const auto& node = H.nodes[i];
      if (tn.parent < 0) continue;
      const Matrix& basis = transpose ? node.U : node.V;
      if (tn.is_leaf()) {
        xloc[i] = Xb.middleRows(tn.begin, tn.span());
        xt[i] = Matrix::Zero(basis.cols(), w);
        kernel::gemm_trans_acc(basis, xloc[i], xt[i], fc);
      } else {
        Matrix stacked(xt[tn.left].rows() + xt[tn.right].rows(), w);
        stacked << xt[tn.left], xt[tn.right];
        xt[i] = Matrix::Zero(basis.cols(), w);
        kernel::gemm_trans_acc(basis, stacked, xt[i], fc);
      }
    }

    // downward: sibling coupling plus parent pass-through
    for (Index i = nn - 1; i >= 0; --i) {
      const auto& tn = H.tree.nodes[i];
      const auto& node = H.nodes[i];
      if (tn.is_leaf()) {
        const Index b = tn.begin, m = tn.span();
        Matrix yloc = Matrix::Zero(m, w);
        if (tn.parent < 0)
          xloc[i] = Xb.middleRows(b, m);  // single-leaf tree: no up pass ran
        if (transpose)
          kernel::gemm_trans_acc(node.D, xloc[i], yloc, fc);
        else
          kernel::gemm_acc(node.D, xloc[i], yloc, fc);
        if (tn.parent >= 0) {
          const Matrix& basis = transpose ? node.V : node.U;
          kernel::gemm_acc(basis, g[i], yloc, fc);
        }
        Y.block(b, b0, m, w) = yloc;
        continue;
      }
      const Index c1 = tn.left, c2 = tn.right;
      const Index r1 = transpose ? H.nodes[c1].col_rank() : H.nodes[c1].row_rank();
      const Index r2 = transpose ? H.nodes[c2].col_rank() : H.nodes[c2].row_rank();
      g[c1] = Matrix::Zero(r1, w);
      g[c2] = Matrix::Zero(r2, w);
      if (transpose) {
        kernel::gemm_trans_acc(node.B2, xt[c2], g[c1], fc);
        kernel::gemm_trans_acc(node.B1, xt[c1], g[c2], fc);
      } else {
        kernel::gemm_acc(node.B1, xt[c2], g[c1], fc);
        kernel::gemm_acc(node.B2, xt[c1], g[c2], fc);
      }
      if (tn.parent >= 0) {
        const Matrix& basis = transpose ? node.V : node.U;
        Matrix through = Matrix::Zero(basis.rows(), w);
        kernel::gemm_acc(basis, g[i], through, fc);
        g[c1] += through.topRows(r1);
        g[c2] += through.bottomRows(r2);
        count(fc, static_cast<std::uint64_t>(r1 + r2) * w);
      }
    }
  }
  return Y;
}

inline Vector hss_matvec(const HSSMatrix& H, const Vector& x, bool transpose,
                         FlopCounter* fc = nullptr) {
  if (x.size() != H.n) throw DimensionMismatch("hss_matvec: length mismatch");
  Matrix X(x.size(), 1);
  X.col(0) = x;
  return hss_matmat(H, X, transpose, fc).col(0);
}

/// Exact expansion of the representation (testing oracle): telescopes the
/// nested bases and places every coupling block.
inline Matrix hss_to_dense(const HSSMatrix& H) {
  const Index nn = H.tree.size();
  std::vector<Matrix> Uhat(nn), Vhat(nn);
  for (Index i = 0; i < nn; ++i) {
    const auto& tn = H.tree.nodes[i];
    const auto& node = H.nodes[i];
    if (tn.parent < 0) continue;
    if (tn.is_leaf()) {
      Uhat[i] = node.U;
      Vhat[i] = node.V;
    } else {
      const Index r1 = H.nodes[tn.left].row_rank(), c1 = H.nodes[tn.left].col_rank();
      Uhat[i].resize(tn.span(), node.U.cols());
      Uhat[i] << Uhat[tn.left] * node.U.topRows(r1), Uhat[tn.right] * node.U.bottomRows(node.U.rows() - r1);
      Vhat[i].resize(tn.span(), node.V.cols());
      Vhat[i] << Vhat[tn.left] * node.V.topRows(c1), Vhat[tn.right] * node.V.bottomRows(node.V.rows() - c1);
    }
  }
  Matrix A = Matrix::Zero(H.n, H.n);
  for (Index i = 0; i < nn; ++i) {
    const auto& tn = H.tree.nodes[i];
    if (tn.is_leaf()) {
      A.block(tn.begin, tn.begin, tn.span(), tn.span()) = H.nodes[i].D;
      continue;
    }
    const auto& l = H.tree.nodes[tn.left];
    const auto& r = H.tree.nodes[tn.right];
    A.block(l.begin, r.begin, l.span(), r.span()) =
        Uhat[tn.left] * H.nodes[i].B1 * Vhat[tn.right].transpose();
    A.block(r.begin, l.begin, r.span(), l.span()) =
        Uhat[tn.right] * H.nodes[i].B2 * Vhat[tn.left].transpose();
  }
  return A;
}

inline HSSDiagnostics hss_diagnostics(const HSSMatrix& H) { return H.diag; }

}  // namespace hdc

#endif  // HDC_HSS_HPP
