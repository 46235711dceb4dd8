//! Angular-momentum projected FV0 and FV1/2 Hamiltonians in the Sturmian
//! basis.
//!
//! Energies are measured from the rest mass, `eps = E - mc^2`. For a radial
//! pair `(n, m)` the long-range part of `J(eps) = E S - H` in one channel is
//!
//! ```text
//! schrodinger:  eps S - K - V
//! fv0:          [ eps S - K - V        -K                 ]
//!               [ K                    (eps + 2mc^2) S + K - V ]
//! ```
//!
//! with `K = T_l + U_LR`. The FV1/2 problem stacks the `l+ = j - 1/2` and
//! `l- = j + 1/2` channels; they are coupled by
//! `H' = -P (i / 2mc) <l+-| dV/dr |l-+>`, `P = [[1, 1], [-1, -1]]`.
//!
//! Basis vectors are ordered radial-index major: row `n * cd + comp` with
//! `comp = channel * fv + fv_component` and `cd` the component dimension.

use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::csbasis::{band_entry, cross_band_entry, BandOperator, BasisSpec};
use crate::error::{FvError, Result};
use crate::linalg::{
    converge_tail, effective_prefix, reduce_tail, BlockTridiagonal, ComplexMatrix, LogDet, Lu,
    TailReduction,
};
use crate::potentials::{PhysicalSystem, PowerSeries, SplitModel};

/// `tau_3 + i tau_2`.
pub const P_MATRIX: [[f64; 2]; 2] = [[1.0, 1.0], [-1.0, -1.0]];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Schrodinger,
    Fv0,
    Fv12,
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Schrodinger => "schrodinger",
            Kind::Fv0 => "fv0",
            Kind::Fv12 => "fv12",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        match s {
            "schrodinger" | "schr" => Some(Kind::Schrodinger),
            "fv0" => Some(Kind::Fv0),
            "fv12" => Some(Kind::Fv12),
            _ => None,
        }
    }
}

/// The angular structure of a problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelSpace {
    Schrodinger {
        l: u32,
    },
    Fv0 {
        l: u32,
    },
    /// `j = l_plus + 1/2`.
    Fv12 {
        l_plus: u32,
    },
}

/// `(l+, l-) = (j - 1/2, j + 1/2)`.
pub fn project_channels(j: f64) -> Result<(u32, u32)> {
    let twice = 2.0 * j;
    if !(j >= 0.5) || twice.fract() != 0.0 || (twice as i64) % 2 != 1 || twice > 1e6 {
        return Err(FvError::Domain(format!(
            "j = {j} is not a positive half-integer"
        )));
    }
    let l_plus = (j - 0.5) as u32;
    Ok((l_plus, l_plus + 1))
}

/// Angular factor `<Phi(a)| e_r . sigma |Phi(b)>` between the spin-orbit
/// states of one `j` (`true` for `l+`, `false` for `l-`).
///
/// The operator flips `l+ <-> l-` with unit amplitude and has no diagonal
/// element because it is parity odd.
pub fn coupling_strength(bra_plus: bool, ket_plus: bool) -> f64 {
    if bra_plus != ket_plus {
        1.0
    } else {
        0.0
    }
}

impl ChannelSpace {
    pub fn fv12(j: f64) -> Result<Self> {
        let (l_plus, _) = project_channels(j)?;
        Ok(ChannelSpace::Fv12 { l_plus })
    }

    pub fn kind(&self) -> Kind {
        match self {
            ChannelSpace::Schrodinger { .. } => Kind::Schrodinger,
            ChannelSpace::Fv0 { .. } => Kind::Fv0,
            ChannelSpace::Fv12 { .. } => Kind::Fv12,
        }
    }

    /// Orbital momenta of the channels, in storage order.
    pub fn ls(&self) -> Vec<u32> {
        match *self {
            ChannelSpace::Schrodinger { l } | ChannelSpace::Fv0 { l } => vec![l],
            ChannelSpace::Fv12 { l_plus } => vec![l_plus, l_plus + 1],
        }
    }

    /// FV components per channel.
    pub fn fv_components(&self) -> usize {
        match self {
            ChannelSpace::Schrodinger { .. } => 1,
            _ => 2,
        }
    }

    pub fn component_dim(&self) -> usize {
        self.fv_components() * self.ls().len()
    }

    pub fn j(&self) -> Option<f64> {
        match self {
            ChannelSpace::Fv12 { l_plus } => Some(*l_plus as f64 + 0.5),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ChannelSpace::Schrodinger { l } => format!("schrodinger l={l}"),
            ChannelSpace::Fv0 { l } => format!("fv0 l={l}"),
            ChannelSpace::Fv12 { l_plus } => {
                format!(
                    "fv12 j={}/2 (l+={l_plus}, l-={})",
                    2 * l_plus + 1,
                    l_plus + 1
                )
            }
        }
    }
}

/// Numerical controls.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Numerics {
    pub cf_tol: f64,
    pub cf_max_depth: usize,
    pub refine_tol: f64,
    /// Quadrature order is `quadrature_factor * (n_max + 20)`.
    pub quadrature_factor: usize,
    /// Fixed continued-fraction depth in radial indices; chosen
    /// automatically when `None`.
    pub depth: Option<usize>,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            cf_tol: 1e-12,
            cf_max_depth: 200_000,
            refine_tol: 1e-10,
            quadrature_factor: 3,
            depth: None,
        }
    }
}

/// Long-range band blocks `(S, H)` for radial indices up to a depth.
struct BlockTable {
    overlap: Vec<[ComplexMatrix; 3]>,
    hamiltonian: Vec<[ComplexMatrix; 3]>,
}

/// Largest number of blocks kept in the cache.
const TABLE_CAP: usize = 4096;

/// A projected Hamiltonian with its basis and potential split.
pub struct FvProblem {
    pub system: PhysicalSystem,
    pub channel: ChannelSpace,
    pub split: SplitModel,
    /// Shared `b`, `n_max` and rotation angle; `l` is taken per channel.
    pub basis: BasisSpec,
    pub numerics: Numerics,
    table: Mutex<Option<Arc<BlockTable>>>,
    short_range: Mutex<Option<Arc<ShortRangeMatrix>>>,
}

impl Clone for FvProblem {
    fn clone(&self) -> Self {
        Self::new(
            self.system,
            self.channel,
            self.split.clone(),
            self.basis,
            self.numerics,
        )
        .expect("a valid problem clones to a valid problem")
    }
}

impl std::fmt::Debug for FvProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FvProblem")
            .field("channel", &self.channel)
            .field("basis", &self.basis)
            .field("system", &self.system)
            .finish()
    }
}

/// Short-range part of `H` on the first `n_max + 1` radial indices.
#[derive(Clone, Debug)]
pub struct ShortRangeMatrix {
    pub matrix: ComplexMatrix,
    pub component_dim: usize,
    pub radial_size: usize,
    zero: bool,
}

impl ShortRangeMatrix {
    pub fn is_zero(&self) -> bool {
        self.zero
    }
}

/// One `cd x cd` radial block.
type Block = ComplexMatrix;

impl FvProblem {
    pub fn new(
        system: PhysicalSystem,
        channel: ChannelSpace,
        split: SplitModel,
        basis: BasisSpec,
        numerics: Numerics,
    ) -> Result<Self> {
        if split.system != system {
            return Err(FvError::Assembly(
                "potential split was made for a different physical system".into(),
            ));
        }
        if basis.is_rotated() && !split.is_analytic() {
            return Err(FvError::Domain(
                "complex rotation needs analytic potentials (no tabulated terms)".into(),
            ));
        }
        if !(numerics.cf_tol > 0.0)
            || !(numerics.refine_tol > 0.0)
            || numerics.quadrature_factor == 0
        {
            return Err(FvError::Domain(
                "numerical tolerances must be positive".into(),
            ));
        }
        Ok(Self {
            system,
            channel,
            split,
            basis,
            numerics,
            table: Mutex::new(None),
            short_range: Mutex::new(None),
        })
    }

    pub fn kind(&self) -> Kind {
        self.channel.kind()
    }

    pub fn component_dim(&self) -> usize {
        self.channel.component_dim()
    }

    /// Basis spec of each channel.
    pub fn specs(&self) -> Vec<BasisSpec> {
        self.channel
            .ls()
            .into_iter()
            .map(|l| self.basis.with_l(l))
            .collect()
    }

    /// Same problem with another basis (new `n_max`, `b` or angle).
    pub fn with_basis(&self, basis: BasisSpec) -> Result<Self> {
        Self::new(
            self.system,
            self.channel,
            self.split.clone(),
            basis,
            self.numerics,
        )
    }

    pub fn with_numerics(&self, numerics: Numerics) -> Result<Self> {
        Self::new(
            self.system,
            self.channel,
            self.split.clone(),
            self.basis,
            numerics,
        )
    }

    fn quadrature_order(&self) -> usize {
        self.numerics.quadrature_factor * (self.basis.n_max + 20)
    }

    fn has_long_range_coupling(&self) -> bool {
        self.kind() == Kind::Fv12 && self.split.long_range.coupling.degree().is_some()
    }

    /// Radial half-bandwidth of the long-range operator.
    pub fn half_bandwidth(&self) -> usize {
        let lr = &self.split.long_range;
        let mut w = 1usize;
        for series in [&lr.vector, &lr.scalar] {
            if let Some(p) = series.degree() {
                if p >= 1 {
                    w = w.max(p as usize + 1);
                }
            }
        }
        if self.has_long_range_coupling() {
            let p = lr.coupling.degree().unwrap_or(0).max(0) as usize;
            w = w.max(p + 2);
        }
        w
    }

    /// Radial indices per continued-fraction block.
    pub fn block_radial(&self) -> usize {
        self.half_bandwidth()
    }

    pub fn block_size(&self) -> usize {
        self.block_radial() * self.component_dim()
    }

    /// Blocks needed to hold radial indices `0..=n_max`.
    pub fn corner_blocks(&self) -> usize {
        self.basis.size().div_ceil(self.block_radial())
    }

    fn series_entry(series: &PowerSeries, l: u32, b: Complex64, n: usize, m: usize) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for (p, c) in series.terms() {
            let op = match p {
                -1 => BandOperator::InverseR,
                0 => BandOperator::Overlap,
                p => BandOperator::Power(p as u32),
            };
            sum += c * band_entry(op, l, b, n, m);
        }
        sum
    }

    /// `(S, H)` long-range blocks for the radial pair `(n, m)`, with `H`
    /// measured from `mc^2` so that `J(eps) = eps S - H`.
    fn radial_pair(&self, n: usize, m: usize) -> (Block, Block) {
        let cd = self.component_dim();
        let fv = self.channel.fv_components();
        let b = self.basis.complex_scale();
        let lr = &self.split.long_range;
        let mass = self.system.mass;
        let two_mc2 = 2.0 * self.system.rest_energy();
        let mut s_blk = ComplexMatrix::zeros(cd, cd);
        let mut h_blk = ComplexMatrix::zeros(cd, cd);
        for (ch, l) in self.channel.ls().into_iter().enumerate() {
            let s = band_entry(BandOperator::Overlap, l, b, n, m);
            let k = band_entry(BandOperator::Kinetic { mass }, l, b, n, m)
                + Self::series_entry(&lr.scalar, l, b, n, m);
            let v = Self::series_entry(&lr.vector, l, b, n, m);
            let o = ch * fv;
            if fv == 1 {
                s_blk[(o, o)] = s;
                h_blk[(o, o)] = k + v;
            } else {
                for a in 0..2 {
                    s_blk[(o + a, o + a)] = s;
                    for c in 0..2 {
                        h_blk[(o + a, o + c)] = P_MATRIX[a][c] * k;
                    }
                    h_blk[(o + a, o + a)] += v;
                }
                h_blk[(o + 1, o + 1)] -= two_mc2 * s;
            }
        }
        if self.has_long_range_coupling() {
            let l_plus = self.channel.ls()[0];
            let factor = Complex64::new(0.0, -1.0 / (2.0 * mass * self.system.c));
            let mut up = Complex64::new(0.0, 0.0);
            let mut down = Complex64::new(0.0, 0.0);
            for (p, c) in lr.coupling.terms() {
                let p = p as u32;
                up += c * cross_band_entry(p, l_plus, b, n, m);
                down += c * cross_band_entry(p, l_plus, b, m, n);
            }
            let flip = coupling_strength(true, false);
            for a in 0..2 {
                for c in 0..2 {
                    let pf = P_MATRIX[a][c] * factor * flip;
                    h_blk[(a, 2 + c)] += pf * up;
                    h_blk[(2 + a, c)] += pf * down;
                }
            }
        }
        (s_blk, h_blk)
    }

    /// `(S, H)` block triples for continued-fraction block `i`.
    fn block_pair(&self, i: usize) -> ([ComplexMatrix; 3], [ComplexMatrix; 3]) {
        let w = self.block_radial();
        let cd = self.component_dim();
        let bs = w * cd;
        let mut s = [
            ComplexMatrix::zeros(bs, bs),
            ComplexMatrix::zeros(bs, bs),
            ComplexMatrix::zeros(bs, bs),
        ];
        let mut h = s.clone();
        let band = w;
        // (row block, col block) offsets for D, U, L.
        let shifts = [(0usize, 0usize), (0, 1), (1, 0)];
        for (slot, (rb, cb)) in shifts.into_iter().enumerate() {
            for a in 0..w {
                for c in 0..w {
                    let n = (i + rb) * w + a;
                    let m = (i + cb) * w + c;
                    if n.abs_diff(m) > band {
                        continue;
                    }
                    let (sb, hb) = self.radial_pair(n, m);
                    s[slot].set_block(a * cd, c * cd, &sb);
                    h[slot].set_block(a * cd, c * cd, &hb);
                }
            }
        }
        (s, h)
    }

    fn block_table(&self, blocks: usize) -> Arc<BlockTable> {
        let want = blocks.min(TABLE_CAP);
        let mut guard = self.table.lock().expect("block table poisoned");
        if let Some(t) = guard.as_ref() {
            if t.overlap.len() >= want {
                return t.clone();
            }
        }
        let (overlap, hamiltonian) = (0..want).map(|i| self.block_pair(i)).unzip();
        let table = Arc::new(BlockTable {
            overlap,
            hamiltonian,
        });
        *guard = Some(table.clone());
        table
    }

    /// The long-range operator `J(eps)` as an infinite block-tridiagonal
    /// operator. `depth_hint` (in blocks) sizes the block cache.
    pub fn long_range(&self, eps: Complex64, depth_hint: usize) -> LongRangeOperator<'_> {
        LongRangeOperator {
            problem: self,
            eps,
            table: self.block_table(depth_hint + 2),
            cutoff: None,
        }
    }

    /// Short-range Hamiltonian on the first `n_max + 1` radial indices.
    ///
    /// On-channel blocks are `P U_s + I V_s` (`U_s + V_s` for the
    /// Schrodinger kind); for FV1/2 the off-channel blocks are the short-range
    /// part of the spin coupling.
    pub fn short_range(&self) -> Result<Arc<ShortRangeMatrix>> {
        if let Some(s) = self.short_range.lock().expect("poisoned").as_ref() {
            return Ok(s.clone());
        }
        let built = Arc::new(self.assemble_short_range()?);
        *self.short_range.lock().expect("poisoned") = Some(built.clone());
        Ok(built)
    }

    fn assemble_short_range(&self) -> Result<ShortRangeMatrix> {
        let cd = self.component_dim();
        let fv = self.channel.fv_components();
        let size = self.basis.size();
        let order = self.quadrature_order();
        let specs = self.specs();
        let mut out = ComplexMatrix::zeros(cd * size, cd * size);
        let mut zero = true;
        let place =
            |out: &mut ComplexMatrix, radial: &ComplexMatrix, r: usize, c: usize, f: Complex64| {
                for n in 0..size {
                    for m in 0..size {
                        out[(n * cd + r, m * cd + c)] += f * radial[(n, m)];
                    }
                }
            };
        for (ch, spec) in specs.iter().enumerate() {
            let o = ch * fv;
            if !self.split.vector.is_zero() {
                zero = false;
                let v = self.split.vector.matrix(spec, spec, order)?;
                for a in 0..fv {
                    place(&mut out, &v, o + a, o + a, Complex64::new(1.0, 0.0));
                }
            }
            if !self.split.scalar.is_zero() {
                zero = false;
                let u = self.split.scalar.matrix(spec, spec, order)?;
                for a in 0..fv {
                    for c in 0..fv {
                        let f = if fv == 1 { 1.0 } else { P_MATRIX[a][c] };
                        place(&mut out, &u, o + a, o + c, Complex64::new(f, 0.0));
                    }
                }
            }
        }
        if self.kind() == Kind::Fv12 && !self.split.coupling.is_zero() {
            zero = false;
            let factor = Complex64::new(0.0, -1.0 / (2.0 * self.system.mass * self.system.c));
            let up = self.split.coupling.matrix(&specs[0], &specs[1], order)?;
            let down = self.split.coupling.matrix(&specs[1], &specs[0], order)?;
            for a in 0..2 {
                for c in 0..2 {
                    let pf = P_MATRIX[a][c] * factor;
                    place(&mut out, &up, a, 2 + c, pf * coupling_strength(true, false));
                    place(
                        &mut out,
                        &down,
                        2 + a,
                        c,
                        pf * coupling_strength(false, true),
                    );
                }
            }
        }
        Ok(ShortRangeMatrix {
            matrix: out,
            component_dim: cd,
            radial_size: size,
            zero,
        })
    }

    /// `W` padded to the corner of `corner_blocks` blocks.
    fn padded_short_range(&self, corner_blocks: usize) -> Result<ComplexMatrix> {
        let w = self.short_range()?;
        let dim = corner_blocks * self.block_size();
        let mut out = ComplexMatrix::zeros(dim, dim);
        out.set_block(0, 0, &w.matrix);
        Ok(out)
    }

    /// Index of the last block holding radial indices below `radial_depth`.
    fn depth_blocks(&self, radial_depth: usize) -> usize {
        radial_depth
            .div_ceil(self.block_radial())
            .max(self.corner_blocks())
            - 1
    }

    /// Continued-fraction depth (radial indices) at which the folded tail is
    /// stable at `eps`.
    pub fn select_depth(&self, eps: Complex64) -> Result<usize> {
        if let Some(d) = self.numerics.depth {
            return Ok(d.max(self.basis.size()));
        }
        let cb = self.corner_blocks();
        let max_blocks = self.numerics.cf_max_depth / self.block_radial();
        let op = self.long_range(eps, 4 * cb + 64);
        let tail = converge_tail(&op, cb, self.numerics.cf_tol, max_blocks)
            .map_err(|e| e.at_energy(eps))?;
        Ok((tail.depth + 1) * self.block_radial())
    }

    /// Folds the operator truncated to radial indices `0..radial_depth`.
    fn reduce(
        &self,
        eps: Complex64,
        corner_blocks: usize,
        radial_depth: usize,
    ) -> Result<(LongRangeOperator<'_>, TailReduction)> {
        let depth = self.depth_blocks(radial_depth);
        let mut op = self.long_range(eps, depth);
        op.cutoff = Some(radial_depth);
        let tail = reduce_tail(&op, corner_blocks, depth).map_err(|e| e.at_energy(eps))?;
        Ok((op, tail))
    }

    /// `det(J_K(eps) - W)` at truncation depth `radial_depth`, in log form.
    ///
    /// Zeros in `eps` are the bound and resonant energies. The value is
    /// `det(J_eff - W) * prod det C_i`, with the tail of the long-range
    /// operator folded into `J_eff`; it has no poles.
    pub fn secular_determinant(&self, eps: Complex64, radial_depth: usize) -> Result<LogDet> {
        let w = self.short_range()?;
        let cb = if w.is_zero() { 1 } else { self.corner_blocks() };
        let (op, tail) = self.reduce(eps, cb, radial_depth)?;
        let mut m = effective_prefix(&op, &tail);
        if !w.is_zero() {
            m = m.sub(&self.padded_short_range(cb)?)?;
        }
        let ld = Lu::factor(&m)?.log_determinant();
        Ok(ld.mul(tail.tail_log_det))
    }

    /// Approximate null vector of `J_eff - W` at `eps` (inverse iteration),
    /// restricted to radial indices `0..=n_max`.
    pub fn null_vector(&self, eps: Complex64, radial_depth: usize) -> Result<Vec<Complex64>> {
        let cb = self.corner_blocks();
        let (op, tail) = self.reduce(eps, cb, radial_depth)?;
        let mut m = effective_prefix(&op, &tail).sub(&self.padded_short_range(cb)?)?;
        // Nudge off the exact root so the solve stays regular.
        let shift = 1e-12 * m.max_norm();
        let dim = m.rows();
        for i in 0..dim {
            m[(i, i)] += shift;
        }
        let lu = Lu::factor(&m)?;
        let mut x = ComplexMatrix::from_fn(dim, 1, |i, _| {
            Complex64::new(1.0 + 0.1 * ((i * 7919) % 13) as f64, 0.0)
        });
        for _ in 0..3 {
            x = match lu.solve(&x) {
                Ok(v) => v,
                Err(_) => break,
            };
            let norm = x.max_norm();
            if norm > 0.0 && norm.is_finite() {
                x = x.scale(Complex64::new(1.0 / norm, 0.0));
            }
        }
        let keep = self.basis.size() * self.component_dim();
        Ok(x.as_slice()[..keep].to_vec())
    }

    /// Squared norm of the null vector in each channel.
    pub fn channel_weights(&self, eps: Complex64, radial_depth: usize) -> Result<Vec<f64>> {
        let x = self.null_vector(eps, radial_depth)?;
        let cd = self.component_dim();
        let fv = self.channel.fv_components();
        let mut w = vec![0.0; self.channel.ls().len()];
        for (i, v) in x.iter().enumerate() {
            w[(i % cd) / fv] += v.norm_sqr();
        }
        Ok(w)
    }

    /// Corner of the long-range Green's operator `J(eps)^{-1}` on the first
    /// `n_max + 1` radial indices, with the continued-fraction depth used
    /// (in radial indices).
    pub fn greens_corner(&self, eps: Complex64) -> Result<(ComplexMatrix, usize)> {
        let (prefix, depth) = self.converged_prefix(eps)?;
        let g = Lu::factor(&prefix)
            .and_then(|lu| lu.inverse())
            .map_err(|e| e.at_energy(eps))?;
        let keep = self.basis.size() * self.component_dim();
        Ok((g.submatrix(0, 0, keep, keep), depth))
    }

    /// Leading blocks of `J(eps)` with the converged tail folded in.
    pub fn converged_prefix(&self, eps: Complex64) -> Result<(ComplexMatrix, usize)> {
        let cb = self.corner_blocks();
        if let Some(d) = self.numerics.depth {
            let d = d.max(self.basis.size());
            let (op, tail) = self.reduce(eps, cb, d)?;
            return Ok((effective_prefix(&op, &tail), d));
        }
        let max_blocks = self.numerics.cf_max_depth / self.block_radial();
        let op = self.long_range(eps, 4 * cb + 64);
        let tail = converge_tail(&op, cb, self.numerics.cf_tol, max_blocks)
            .map_err(|e| e.at_energy(eps))?;
        Ok((
            effective_prefix(&op, &tail),
            (tail.depth + 1) * self.block_radial(),
        ))
    }

    /// `D(eps) = det(I - G(eps) W)`.
    pub fn fredholm_determinant(&self, eps: Complex64) -> Result<Complex64> {
        let w = self.short_range()?;
        if w.is_zero() {
            return Ok(Complex64::new(1.0, 0.0));
        }
        let cb = self.corner_blocks();
        let (prefix, _) = self.converged_prefix(eps)?;
        let full = prefix.sub(&self.padded_short_range(cb)?)?;
        let num = Lu::factor(&full)?.log_determinant();
        let den = Lu::factor(&prefix)?.log_determinant();
        if den.is_zero() {
            return Err(FvError::Singular {
                pivot: 0.0,
                context: " in the long-range operator".into(),
            }
            .at_energy(eps));
        }
        Ok(num.div(den).value())
    }

    /// Dense `(H, S)` on the first `n_max + 1` radial indices, `H` measured
    /// from `mc^2`. Long-range and short-range parts are both included.
    pub fn dense_matrices(&self) -> Result<(ComplexMatrix, ComplexMatrix)> {
        let cd = self.component_dim();
        let size = self.basis.size();
        let w = self.half_bandwidth();
        let mut h = ComplexMatrix::zeros(cd * size, cd * size);
        let mut s = h.clone();
        for n in 0..size {
            for m in n.saturating_sub(w)..(n + w + 1).min(size) {
                let (sb, hb) = self.radial_pair(n, m);
                s.set_block(n * cd, m * cd, &sb);
                h.set_block(n * cd, m * cd, &hb);
            }
        }
        let sr = self.short_range()?;
        if !sr.is_zero() {
            h = h.add(&sr.matrix)?;
        }
        Ok((h, s))
    }
}

/// `J(eps)` for one problem, served block by block.
pub struct LongRangeOperator<'a> {
    problem: &'a FvProblem,
    eps: Complex64,
    table: Arc<BlockTable>,
    /// Radial indices from here on are replaced by the identity.
    cutoff: Option<usize>,
}

impl LongRangeOperator<'_> {
    pub fn energy(&self) -> Complex64 {
        self.eps
    }

    /// Applies the radial cutoff to block `(row, col)`.
    fn mask(&self, m: &mut ComplexMatrix, row: usize, col: usize) {
        let Some(cut) = self.cutoff else { return };
        let w = self.problem.block_radial();
        if (row.max(col) + 1) * w <= cut {
            return;
        }
        let cd = self.problem.component_dim();
        for a in 0..m.rows() {
            for c in 0..m.cols() {
                let rn = row * w + a / cd;
                let cn = col * w + c / cd;
                if rn >= cut || cn >= cut {
                    m[(a, c)] = if row == col && a == c {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    };
                }
            }
        }
    }
}

fn combine(eps: Complex64, s: &ComplexMatrix, h: &ComplexMatrix) -> ComplexMatrix {
    let data: Vec<Complex64> = s
        .as_slice()
        .iter()
        .zip(h.as_slice())
        .map(|(a, b)| eps * a - b)
        .collect();
    ComplexMatrix::from_row_major(s.rows(), s.cols(), data).expect("finite blocks")
}

impl BlockTridiagonal for LongRangeOperator<'_> {
    fn block_size(&self) -> usize {
        self.problem.block_size()
    }

    fn blocks(&self, i: usize) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
        let (s, h);
        let owned;
        if i < self.table.overlap.len() {
            s = &self.table.overlap[i];
            h = &self.table.hamiltonian[i];
        } else {
            owned = self.problem.block_pair(i);
            s = &owned.0;
            h = &owned.1;
        }
        let mut d = combine(self.eps, &s[0], &h[0]);
        let mut u = combine(self.eps, &s[1], &h[1]);
        let mut l = combine(self.eps, &s[2], &h[2]);
        self.mask(&mut d, i, i);
        self.mask(&mut u, i, i + 1);
        self.mask(&mut l, i + 1, i);
        (d, u, l)
    }

    fn diagonal_block(&self, i: usize) -> ComplexMatrix {
        let mut d = if i < self.table.overlap.len() {
            combine(
                self.eps,
                &self.table.overlap[i][0],
                &self.table.hamiltonian[i][0],
            )
        } else {
            let (s, h) = self.problem.block_pair(i);
            combine(self.eps, &s[0], &h[0])
        };
        self.mask(&mut d, i, i);
        d
    }
}
