//! Block-tridiagonal operators of unbounded size and the matrix continued
//! fraction for the top-left corner of their inverse.
//!
//! With diagonal blocks `D_i`, super-diagonal blocks `U_i = A[i][i+1]` and
//! sub-diagonal blocks `L_i = A[i+1][i]`, truncating at depth `K` and running
//! the backward recursion
//!
//! ```text
//! C_K = D_K,    C_i = D_i - U_i C_{i+1}^{-1} L_i
//! ```
//!
//! folds everything below block `p` into `C_p`. The corner of the inverse
//! is then the inverse of the leading `p + 1` blocks with `D_p` replaced by
//! `C_p`, and `det A_K = det(prefix) * prod_{i > p} det C_i`.

use std::sync::Arc;

use num_complex::Complex64;

use super::{ComplexMatrix, LogDet, Lu};
use crate::error::{FvError, Result};

/// An infinite block-tridiagonal operator, generated block by block.
pub trait BlockTridiagonal: Sync {
    fn block_size(&self) -> usize;

    /// Returns `(D_i, U_i, L_i)`.
    fn blocks(&self, i: usize) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix);

    fn diagonal_block(&self, i: usize) -> ComplexMatrix {
        self.blocks(i).0
    }
}

type TailRule = dyn Fn(usize) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) + Send + Sync;

/// Stored prefix of blocks followed by a generating rule for the tail.
#[derive(Clone)]
pub struct BlockTridiagonalOperator {
    block_size: usize,
    diagonal: Vec<ComplexMatrix>,
    upper: Vec<ComplexMatrix>,
    lower: Vec<ComplexMatrix>,
    tail_rule: Arc<TailRule>,
}

impl BlockTridiagonalOperator {
    /// `diagonal[i]`, `upper[i]` (block `(i, i+1)`) and `lower[i]`
    /// (block `(i+1, i)`) must have equal lengths; indices past the prefix are
    /// served by `tail_rule`.
    pub fn new(
        diagonal: Vec<ComplexMatrix>,
        upper: Vec<ComplexMatrix>,
        lower: Vec<ComplexMatrix>,
        tail_rule: impl Fn(usize) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix)
            + Send
            + Sync
            + 'static,
    ) -> Result<Self> {
        let block_size = diagonal
            .first()
            .map(|d| d.rows())
            .ok_or_else(|| FvError::Dimension("empty block prefix".into()))?;
        if upper.len() != diagonal.len() || lower.len() != diagonal.len() {
            return Err(FvError::Dimension(
                "diagonal, super and sub prefixes must have equal length".into(),
            ));
        }
        for m in diagonal.iter().chain(&upper).chain(&lower) {
            if m.rows() != block_size || m.cols() != block_size {
                return Err(FvError::Dimension(format!(
                    "block of shape {}x{} in an operator with block size {block_size}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self {
            block_size,
            diagonal,
            upper,
            lower,
            tail_rule: Arc::new(tail_rule),
        })
    }

    /// Operator whose every block comes from the rule.
    pub fn from_rule(
        block_size: usize,
        rule: impl Fn(usize) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) + Send + Sync + 'static,
    ) -> Result<Self> {
        let (d, u, l) = rule(0);
        let op = Self::new(vec![d], vec![u], vec![l], rule)?;
        if op.block_size != block_size {
            return Err(FvError::Dimension("rule disagrees with block size".into()));
        }
        Ok(op)
    }

    /// Infinite scalar Toeplitz tridiagonal operator.
    pub fn scalar_toeplitz(diag: Complex64, upper: Complex64, lower: Complex64) -> Self {
        let one = |z: Complex64| ComplexMatrix::diagonal(&[z]);
        Self::from_rule(1, move |_| (one(diag), one(upper), one(lower)))
            .expect("1x1 blocks are consistent")
    }
}

impl BlockTridiagonal for BlockTridiagonalOperator {
    fn block_size(&self) -> usize {
        self.block_size
    }

    fn blocks(&self, i: usize) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        if i < self.diagonal.len() {
            (
                self.diagonal[i].clone(),
                self.upper[i].clone(),
                self.lower[i].clone(),
            )
        } else {
            let (d, u, l) = (self.tail_rule)(i);
            debug_assert!(d.rows() == self.block_size && u.rows() == self.block_size);
            (d, u, l)
        }
    }
}

/// The tail of a truncated operator folded into its last corner block.
#[derive(Clone, Debug)]
pub struct TailReduction {
    /// Number of leading blocks kept explicitly.
    pub corner_blocks: usize,
    /// Truncation depth `K` (index of the last block included).
    pub depth: usize,
    /// `C_p` for `p = corner_blocks - 1`.
    pub closing_block: ComplexMatrix,
    /// `prod_{p < i <= K} det C_i`.
    pub tail_log_det: LogDet,
}

/// Runs the backward recursion from depth `depth` up to the last corner block.
pub fn reduce_tail<B: BlockTridiagonal + ?Sized>(
    op: &B,
    corner_blocks: usize,
    depth: usize,
) -> Result<TailReduction> {
    if corner_blocks == 0 {
        return Err(FvError::Precondition(
            "corner_blocks must be at least 1".into(),
        ));
    }
    let p = corner_blocks - 1;
    let depth = depth.max(p);
    let mut c = op.diagonal_block(depth);
    let mut log_det = LogDet::ONE;
    for i in (p..depth).rev() {
        let (d, u, l) = op.blocks(i);
        let lu = Lu::factor(&c)?;
        let x = lu.solve(&l).map_err(|e| match e {
            FvError::Singular { pivot, .. } => FvError::Singular {
                pivot,
                context: format!(" in continued fraction at block {}", i + 1),
            },
            other => other,
        })?;
        log_det = log_det.mul(lu.log_determinant());
        c = d.sub(&u.matmul(&x)?)?;
    }
    Ok(TailReduction {
        corner_blocks,
        depth,
        closing_block: c,
        tail_log_det: log_det,
    })
}

/// Leading `corner_blocks` blocks with the last diagonal block replaced by
/// the folded tail.
pub fn effective_prefix<B: BlockTridiagonal + ?Sized>(
    op: &B,
    tail: &TailReduction,
) -> ComplexMatrix {
    let bs = op.block_size();
    let p = tail.corner_blocks - 1;
    let mut m = ComplexMatrix::zeros(bs * (p + 1), bs * (p + 1));
    for i in 0..=p {
        let (d, u, l) = op.blocks(i);
        if i < p {
            m.set_block(i * bs, i * bs, &d);
            m.set_block(i * bs, (i + 1) * bs, &u);
            m.set_block((i + 1) * bs, i * bs, &l);
        } else {
            m.set_block(i * bs, i * bs, &tail.closing_block);
        }
    }
    m
}

/// Row/column balanced change `max |a_ij - b_ij| / sqrt(r_i c_j)`, with
/// `r_i`, `c_j` the largest moduli in row `i` and column `j` of `b`.
///
/// Blocks mixing particle and antiparticle components carry entries that
/// differ by `2 mc^2`; a plain max-norm would hide changes in the small ones.
fn balanced_change(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = b.rows();
    let m = b.cols();
    let row_max: Vec<f64> = (0..n)
        .map(|i| (0..m).map(|j| b[(i, j)].norm()).fold(0.0, f64::max))
        .collect();
    let col_max: Vec<f64> = (0..m)
        .map(|j| (0..n).map(|i| b[(i, j)].norm()).fold(0.0, f64::max))
        .collect();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..m {
            let d = (a[(i, j)] - b[(i, j)]).norm();
            if d == 0.0 {
                continue;
            }
            let s = (row_max[i] * col_max[j]).sqrt();
            worst = worst.max(if s > 0.0 { d / s } else { d });
        }
    }
    worst
}

fn initial_depth(corner_blocks: usize) -> usize {
    (2 * corner_blocks).max(corner_blocks + 16)
}

/// Folds the tail with a doubling schedule until the closing block is stable.
///
/// Returns the reduction at the accepted depth.
pub fn converge_tail<B: BlockTridiagonal + ?Sized>(
    op: &B,
    corner_blocks: usize,
    tol: f64,
    max_depth: usize,
) -> Result<TailReduction> {
    if !(tol > 0.0) {
        return Err(FvError::Precondition("tolerance must be positive".into()));
    }
    let mut depth = initial_depth(corner_blocks);
    let mut prev = reduce_tail(op, corner_blocks, depth)?;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let next_depth = 2 * depth;
        if next_depth > max_depth {
            let last = reduce_tail(op, corner_blocks, max_depth.max(depth))?;
            return Err(FvError::Convergence {
                what: format!("continued fraction tail not stable up to depth {max_depth}"),
                iterations,
                history: Vec::new(),
                corners: Some(Box::new((prev.closing_block, last.closing_block))),
            });
        }
        let next = reduce_tail(op, corner_blocks, next_depth)?;
        if balanced_change(&next.closing_block, &prev.closing_block) < tol {
            return Ok(next);
        }
        prev = next;
        depth = next_depth;
    }
}

/// Top-left `corner_blocks * block_size` square corner of the inverse.
///
/// Depth doubles until the corner's relative max-norm change between
/// successive depths drops below `tol`. Returns the corner and the depth used.
pub fn continued_fraction_corner<B: BlockTridiagonal + ?Sized>(
    op: &B,
    corner_blocks: usize,
    tol: f64,
    max_depth: usize,
) -> Result<(ComplexMatrix, usize)> {
    if !(tol > 0.0) {
        return Err(FvError::Precondition("tolerance must be positive".into()));
    }
    let corner_at = |depth: usize| -> Result<ComplexMatrix> {
        let tail = reduce_tail(op, corner_blocks, depth)?;
        Lu::factor(&effective_prefix(op, &tail))?.inverse()
    };
    let mut depth = initial_depth(corner_blocks);
    let mut prev = corner_at(depth)?;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let next_depth = 2 * depth;
        if next_depth > max_depth {
            let last = corner_at(max_depth.max(depth))?;
            return Err(FvError::Convergence {
                what: format!("continued fraction corner not stable up to depth {max_depth}"),
                iterations,
                history: Vec::new(),
                corners: Some(Box::new((prev, last))),
            });
        }
        let next = corner_at(next_depth)?;
        if next.relative_change(&prev) < tol {
            return Ok((next, next_depth));
        }
        prev = next;
        depth = next_depth;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn decoupled_blocks_invert_blockwise() {
        let d0 = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[0.0, 4.0]]).unwrap();
        let d1 = ComplexMatrix::from_real_rows(&[&[3.0, 0.0], &[1.0, 5.0]]).unwrap();
        let z = ComplexMatrix::zeros(2, 2);
        let tail_d = ComplexMatrix::identity(2);
        let op = BlockTridiagonalOperator::new(
            vec![d0.clone(), d1.clone()],
            vec![z.clone(), z.clone()],
            vec![z.clone(), z.clone()],
            move |_| (tail_d.clone(), z.clone(), z.clone()),
        )
        .unwrap();
        let (g, _) = continued_fraction_corner(&op, 2, 1e-12, 1000).unwrap();
        let inv0 = Lu::factor(&d0).unwrap().inverse().unwrap();
        let inv1 = Lu::factor(&d1).unwrap().inverse().unwrap();
        assert!(g.submatrix(0, 0, 2, 2).relative_change(&inv0) < 1e-15);
        assert!(g.submatrix(2, 2, 2, 2).relative_change(&inv1) < 1e-15);
        assert!(g.submatrix(0, 2, 2, 2).max_norm() == 0.0);
    }

    #[test]
    fn toeplitz_corner_is_fixed_point() {
        // x = 1/(2 - x) has the double root x = 1; convergence is algebraic.
        let op = BlockTridiagonalOperator::scalar_toeplitz(c(2.0), c(-1.0), c(-1.0));
        let tail = reduce_tail(&op, 1, 1 << 20).unwrap();
        let g = 1.0 / tail.closing_block[(0, 0)];
        assert!((g - c(1.0)).norm() < 1e-5);
    }

    #[test]
    fn convergence_failure_carries_iterates() {
        let op = BlockTridiagonalOperator::scalar_toeplitz(c(2.0), c(-1.0), c(-1.0));
        let err = continued_fraction_corner(&op, 1, 1e-14, 64).unwrap_err();
        match err {
            FvError::Convergence {
                corners: Some(c), ..
            } => {
                assert_eq!(c.0.rows(), 1);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn singular_closing_block_is_reported() {
        let op = BlockTridiagonalOperator::scalar_toeplitz(c(0.0), c(1.0), c(1.0));
        assert!(matches!(
            reduce_tail(&op, 1, 4),
            Err(FvError::Singular { .. })
        ));
    }
}
