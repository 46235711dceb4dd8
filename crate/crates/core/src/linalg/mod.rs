//! Dense complex linear algebra, block-tridiagonal continued fractions and
//! scalar root finders.

mod block;
mod lu;
mod matrix;
mod roots;

pub use block::{
    continued_fraction_corner, converge_tail, effective_prefix, reduce_tail, BlockTridiagonal,
    BlockTridiagonalOperator, TailReduction,
};
pub use lu::{lu_determinant, lu_log_determinant, solve_linear, LogDet, Lu};
pub use matrix::ComplexMatrix;
pub use roots::{find_complex_root, find_complex_root_with_step, find_real_root, RootBracket};
