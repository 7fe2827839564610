//! Collocation systems, interpolants and Lagrange (cardinal) functions.
//!
//! Positive definite kernels are factorized with a dense Cholesky routine.
//! Surface splines use the augmented saddle system
//!
//! ```text
//! [ K  P ] [a]   [v]
//! [ Pᵀ 0 ] [b] = [0]
//! ```
//!
//! with a symmetric-indefinite (Bunch–Kaufman) factorization, where `P`
//! holds monomials of degree ≤ m−1 in coordinates shifted and scaled to the
//! box center and half-width.

use std::sync::Arc;

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{Accum, Mat, MatRef, Par, Side};

use crate::error::{KilabError, Result};
use crate::exec::{clear_upper_simd, Exec};
use crate::geometry::{self, ManifoldDescriptor, Point, DUPLICATE_TOL};
use crate::kernels::Kernel;
use crate::pointsets::PointSet;

/// Relative residual tolerance of every solve.
pub const SOLVE_TOL: f64 = 1e-9;

/// Singular-value ratio below which the polynomial block counts as rank deficient.
const RANK_TOL: f64 = 1e-10;

/// Monomial basis of total degree ≤ `degree` in shifted/scaled coordinates.
#[derive(Clone, Debug)]
pub struct PolyBasis {
    exponents: Vec<Vec<u32>>,
    center: Vec<f64>,
    half_width: Vec<f64>,
}

impl PolyBasis {
    pub fn new(dim: usize, degree: u32, center: Vec<f64>, half_width: Vec<f64>) -> Self {
        let mut exponents = Vec::new();
        for total in 0..=degree {
            let mut current = vec![0u32; dim];
            push_compositions(total, 0, &mut current, &mut exponents);
        }
        PolyBasis {
            exponents,
            center,
            half_width,
        }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exponents
    }

    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        let scaled: Vec<f64> = x
            .iter()
            .zip(&self.center)
            .zip(&self.half_width)
            .map(|((x, c), h)| (x - c) / h)
            .collect();
        for (slot, e) in out.iter_mut().zip(&self.exponents) {
            *slot = scaled.iter().zip(e).map(|(s, &k)| s.powi(k as i32)).product();
        }
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        self.eval_into(x, &mut out);
        out
    }
}

fn push_compositions(remaining: u32, axis: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if axis + 1 == current.len() {
        current[axis] = remaining;
        out.push(current.clone());
        return;
    }
    for k in (0..=remaining).rev() {
        current[axis] = k;
        push_compositions(remaining - k, axis + 1, current, out);
    }
    current[axis] = 0;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AssembleOptions {
    /// Opt-in diagonal regularization `τ·I`.
    pub jitter: Option<f64>,
    pub exec: Exec,
}

enum Factorization {
    Cholesky(faer::linalg::solvers::Llt<f64>),
    Saddle(faer::linalg::solvers::Lblt<f64>),
}

/// Assembled and factorized collocation system. Immutable after assembly;
/// solves only read the factorization.
pub struct CollocationSystem {
    kernel: Arc<Kernel>,
    xi: Arc<PointSet>,
    matrix: Mat<f64>,
    poly: Option<Arc<PolyBasis>>,
    poly_block: Option<Mat<f64>>,
    factor: Factorization,
    jitter: f64,
}

impl std::fmt::Debug for CollocationSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CollocationSystem")
            .field("kernel", &self.kernel.spec().to_string())
            .field("n", &self.xi.len())
            .field("poly_terms", &self.poly_terms())
            .field("jitter", &self.jitter)
            .finish()
    }
}

/// Kernel matrix `(κ(ξ_i, ξ_j))`. Each entry is written once; the lower
/// triangle mirrors the upper one bitwise.
pub fn kernel_matrix(kernel: &Kernel, nodes: &[Point], exec: Exec) -> Mat<f64> {
    let n = nodes.len();
    let rows: Vec<Vec<f64>> = exec.map(n, |i| {
        let x = nodes[i].coords();
        nodes[i..].iter().map(|y| kernel.eval_coords(x, y.coords())).collect()
    });
    let mut m = Mat::<f64>::zeros(n, n);
    for (i, row) in rows.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            m[(i, i + k)] = v;
            m[(i + k, i)] = v;
        }
    }
    m
}

pub fn assemble(kernel: Arc<Kernel>, xi: Arc<PointSet>) -> Result<CollocationSystem> {
    assemble_with(kernel, xi, AssembleOptions::default())
}

pub fn assemble_with(kernel: Arc<Kernel>, xi: Arc<PointSet>, opts: AssembleOptions) -> Result<CollocationSystem> {
    let man = xi.manifold();
    kernel.spec().compatible_with(man)?;
    let n = xi.len();
    if n == 0 {
        return Err(KilabError::Degenerate("empty node set".into()));
    }
    if n > 1 {
        let min_pair = geometry::min_pairwise_distance(xi.nodes(), man.kind(), opts.exec);
        if min_pair < DUPLICATE_TOL {
            return Err(KilabError::Degenerate(format!("duplicate nodes (distance {min_pair:e})")));
        }
    }
    let mut matrix = kernel_matrix(&kernel, xi.nodes(), opts.exec);
    let jitter = opts.jitter.unwrap_or(0.0);
    if jitter < 0.0 || !jitter.is_finite() {
        return Err(KilabError::Config(format!("jitter must be a finite non-negative number, got {jitter}")));
    }
    if jitter > 0.0 {
        for i in 0..n {
            matrix[(i, i)] += jitter;
        }
    }

    match kernel.spec().poly_degree() {
        None => {
            let llt = matrix.llt(Side::Lower);
            clear_upper_simd();
            let llt = llt
                .map_err(|faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index }| {
                    KilabError::Factorization { pivot: index }
                })?;
            Ok(CollocationSystem {
                kernel,
                xi,
                matrix,
                poly: None,
                poly_block: None,
                factor: Factorization::Cholesky(llt),
                jitter,
            })
        }
        Some(degree) => {
            let (center, half_width) = man.center_and_half_width();
            let basis = PolyBasis::new(man.dimension(), degree, center, half_width);
            let terms = basis.len();
            if n < terms {
                return Err(KilabError::Rank { rank: n, required: terms });
            }
            let mut p = Mat::<f64>::zeros(n, terms);
            let mut buf = vec![0.0; terms];
            for (i, node) in xi.nodes().iter().enumerate() {
                basis.eval_into(node.coords(), &mut buf);
                for (k, &v) in buf.iter().enumerate() {
                    p[(i, k)] = v;
                }
            }
            let sv = p.singular_values();
            clear_upper_simd();
            let sv = sv.map_err(|_| KilabError::Rank { rank: 0, required: terms })?;
            let top = sv.first().copied().unwrap_or(0.0);
            let rank = sv.iter().filter(|&&s| s > RANK_TOL * top).count();
            if rank < terms {
                return Err(KilabError::Rank { rank, required: terms });
            }
            let size = n + terms;
            let mut saddle = Mat::<f64>::zeros(size, size);
            for j in 0..n {
                for i in 0..n {
                    saddle[(i, j)] = matrix[(i, j)];
                }
            }
            for k in 0..terms {
                for i in 0..n {
                    saddle[(i, n + k)] = p[(i, k)];
                    saddle[(n + k, i)] = p[(i, k)];
                }
            }
            let lblt = saddle.lblt(Side::Lower);
            clear_upper_simd();
            Ok(CollocationSystem {
                kernel,
                xi,
                matrix,
                poly: Some(Arc::new(basis)),
                poly_block: Some(p),
                factor: Factorization::Saddle(lblt),
                jitter,
            })
        }
    }
}

impl CollocationSystem {
    pub fn n(&self) -> usize {
        self.xi.len()
    }

    pub fn poly_terms(&self) -> usize {
        self.poly.as_ref().map_or(0, |p| p.len())
    }

    /// `n + M`, the size of the (possibly augmented) system.
    pub fn size(&self) -> usize {
        self.n() + self.poly_terms()
    }

    pub fn kernel(&self) -> &Arc<Kernel> {
        &self.kernel
    }

    pub fn points(&self) -> &Arc<PointSet> {
        &self.xi
    }

    pub fn manifold(&self) -> &ManifoldDescriptor {
        self.xi.manifold()
    }

    /// Kernel block (jitter included).
    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.matrix.as_ref()
    }

    pub fn poly_block(&self) -> Option<MatRef<'_, f64>> {
        self.poly_block.as_ref().map(|p| p.as_ref())
    }

    pub fn poly_basis(&self) -> Option<&Arc<PolyBasis>> {
        self.poly.as_ref()
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// `S·X` for the full (augmented) system matrix `S`.
    fn apply(&self, x: MatRef<'_, f64>) -> Mat<f64> {
        let n = self.n();
        let mut out = Mat::<f64>::zeros(self.size(), x.ncols());
        matmul(
            out.as_mut().subrows_mut(0, n),
            Accum::Replace,
            self.matrix.as_ref(),
            x.subrows(0, n),
            1.0,
            Par::Seq,
        );
        if let Some(p) = &self.poly_block {
            let m = p.ncols();
            matmul(
                out.as_mut().subrows_mut(0, n),
                Accum::Add,
                p.as_ref(),
                x.subrows(n, m),
                1.0,
                Par::Seq,
            );
            matmul(
                out.as_mut().subrows_mut(n, m),
                Accum::Replace,
                p.as_ref().transpose(),
                x.subrows(0, n),
                1.0,
                Par::Seq,
            );
        }
        clear_upper_simd();
        out
    }

    /// Solves `S X = B` for a `size × k` right-hand side and checks the
    /// residual column by column.
    pub fn solve_many(&self, rhs: MatRef<'_, f64>) -> Result<Mat<f64>> {
        if rhs.nrows() != self.size() {
            return Err(KilabError::Dimension {
                expected: self.size(),
                got: rhs.nrows(),
            });
        }
        let mut x = rhs.to_owned();
        match &self.factor {
            Factorization::Cholesky(f) => f.solve_in_place(x.as_mut()),
            Factorization::Saddle(f) => f.solve_in_place(x.as_mut()),
        }
        clear_upper_simd();
        let applied = self.apply(x.as_ref());
        for j in 0..rhs.ncols() {
            let mut scale: f64 = 0.0;
            let mut residual: f64 = 0.0;
            for i in 0..rhs.nrows() {
                scale = scale.max(rhs[(i, j)].abs());
                residual = residual.max((applied[(i, j)] - rhs[(i, j)]).abs());
            }
            let tolerance = SOLVE_TOL * (1.0 + scale);
            if !(residual < tolerance) {
                return Err(KilabError::Residual { residual, tolerance });
            }
        }
        Ok(x)
    }

    /// `S⁻¹` restricted to the first n columns: column j holds the kernel and
    /// polynomial coefficients of the Lagrange function centered at ξ_j.
    pub fn lagrange_coefficients(&self) -> Result<Mat<f64>> {
        let n = self.n();
        let size = self.size();
        if self.poly.is_none() {
            let inv = match &self.factor {
                Factorization::Cholesky(f) => f.inverse(),
                Factorization::Saddle(_) => unreachable!(),
            };
            clear_upper_simd();
            let applied = self.apply(inv.as_ref());
            let mut residual: f64 = 0.0;
            for j in 0..n {
                for i in 0..n {
                    let target = if i == j { 1.0 } else { 0.0 };
                    residual = residual.max((applied[(i, j)] - target).abs());
                }
            }
            let tolerance = SOLVE_TOL * 2.0;
            if !(residual < tolerance) {
                return Err(KilabError::Residual { residual, tolerance });
            }
            Ok(inv)
        } else {
            let rhs = Mat::<f64>::from_fn(size, n, |i, j| if i == j { 1.0 } else { 0.0 });
            self.solve_many(rhs.as_ref())
        }
    }

    fn interpolant_from(&self, coeffs: &[f64]) -> Interpolant {
        let n = self.n();
        Interpolant {
            xi: Arc::clone(&self.xi),
            kernel: Arc::clone(&self.kernel),
            kernel_coeffs: coeffs[..n].to_vec(),
            poly_coeffs: coeffs[n..].to_vec(),
            poly: self.poly.clone(),
        }
    }

    /// Evaluation functionals stored column-wise: column `g` holds
    /// `κ(x_g, ξ_j)` for `j < n` followed by the `M` polynomial values.
    pub fn eval_columns(&self, points: &[Point], exec: Exec) -> Mat<f64> {
        let n = self.n();
        let size = self.size();
        let flat = flat_coords(self.xi.nodes());
        let cols: Vec<Vec<f64>> = exec.map(points.len(), |g| {
            let x = points[g].coords();
            let mut col = vec![0.0; size];
            self.kernel.eval_row(x, &flat, &mut col[..n]);
            if let Some(p) = &self.poly {
                p.eval_into(x, &mut col[n..]);
            }
            col
        });
        let mut out = Mat::<f64>::zeros(size, points.len());
        for (g, col) in cols.iter().enumerate() {
            out.col_as_slice_mut(g).copy_from_slice(col);
        }
        out
    }
}

pub(crate) fn flat_coords(points: &[Point]) -> Vec<f64> {
    points.iter().flat_map(|p| p.coords().iter().copied()).collect()
}

/// `s(x) = Σ A_ζ κ(x, ζ) + Σ b_k p_k(x)`.
#[derive(Clone, Debug)]
pub struct Interpolant {
    xi: Arc<PointSet>,
    kernel: Arc<Kernel>,
    kernel_coeffs: Vec<f64>,
    poly_coeffs: Vec<f64>,
    poly: Option<Arc<PolyBasis>>,
}

impl Interpolant {
    pub fn kernel_coeffs(&self) -> &[f64] {
        &self.kernel_coeffs
    }

    pub fn poly_coeffs(&self) -> &[f64] {
        &self.poly_coeffs
    }

    pub fn points(&self) -> &PointSet {
        &self.xi
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    /// Unchecked evaluation; summation in ascending node order.
    pub fn eval_coords(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (a, node) in self.kernel_coeffs.iter().zip(self.xi.nodes()) {
            s += a * self.kernel.eval_coords(x, node.coords());
        }
        self.add_poly(x, s)
    }

    fn add_poly(&self, x: &[f64], mut s: f64) -> f64 {
        if let Some(p) = &self.poly {
            let vals = p.eval(x);
            for (b, v) in self.poly_coeffs.iter().zip(vals) {
                s += b * v;
            }
        }
        s
    }

    /// Batched evaluation at many points; each value equals
    /// [`eval_coords`](Self::eval_coords) bitwise.
    pub fn eval_many(&self, points: &[Point], exec: Exec) -> Vec<f64> {
        let flat = flat_coords(self.xi.nodes());
        const BLOCK: usize = 64;
        let blocks: Vec<Vec<f64>> = exec.map(points.len().div_ceil(BLOCK), |b| {
            let mut row = vec![0.0; self.kernel_coeffs.len()];
            points[b * BLOCK..((b + 1) * BLOCK).min(points.len())]
                .iter()
                .map(|x| {
                    self.kernel.eval_row(x.coords(), &flat, &mut row);
                    let mut s = 0.0;
                    for (a, k) in self.kernel_coeffs.iter().zip(&row) {
                        s += a * k;
                    }
                    self.add_poly(x.coords(), s)
                })
                .collect()
        });
        blocks.concat()
    }

    /// `Aᵀ K A`, the squared native-space norm of the kernel part.
    pub fn native_norm_sq(&self, sys: &CollocationSystem) -> f64 {
        let a = &self.kernel_coeffs;
        let k = sys.matrix();
        let mut total = 0.0;
        for (i, ai) in a.iter().enumerate() {
            let row: f64 = a.iter().enumerate().map(|(j, aj)| k[(i, j)] * aj).sum();
            total += ai * row;
        }
        total
    }
}

pub fn interpolate(sys: &CollocationSystem, values: &[f64]) -> Result<Interpolant> {
    let n = sys.n();
    if values.len() != n {
        return Err(KilabError::Dimension {
            expected: n,
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(KilabError::Argument("interpolation values must be finite".into()));
    }
    let rhs = Mat::<f64>::from_fn(sys.size(), 1, |i, _| if i < n { values[i] } else { 0.0 });
    let x = sys.solve_many(rhs.as_ref())?;
    let coeffs: Vec<f64> = (0..sys.size()).map(|i| x[(i, 0)]).collect();
    Ok(sys.interpolant_from(&coeffs))
}

pub fn evaluate(interp: &Interpolant, x: &Point, man: &ManifoldDescriptor) -> Result<f64> {
    if !man.contains(x) {
        return Err(KilabError::Argument(format!("point {:?} is not on the manifold", x.coords())));
    }
    if man != interp.xi.manifold() {
        return Err(KilabError::Config("interpolant lives on a different manifold".into()));
    }
    Ok(interp.eval_coords(x.coords()))
}

/// Cardinal function `χ_ξ` with `χ_ξ(ζ) = δ(ξ, ζ)` on the nodes.
#[derive(Clone, Debug)]
pub struct LagrangeFunction {
    pub base: Interpolant,
    pub center_index: usize,
}

impl LagrangeFunction {
    pub fn center(&self) -> &Point {
        &self.base.xi.nodes()[self.center_index]
    }

    pub fn eval_coords(&self, x: &[f64]) -> f64 {
        self.base.eval_coords(x)
    }

    pub fn eval_many(&self, points: &[Point], exec: Exec) -> Vec<f64> {
        self.base.eval_many(points, exec)
    }
}

pub fn lagrange(sys: &CollocationSystem, center: usize) -> Result<LagrangeFunction> {
    if center >= sys.n() {
        return Err(KilabError::Argument(format!("center {center} out of range 0..{}", sys.n())));
    }
    let mut e = vec![0.0; sys.n()];
    e[center] = 1.0;
    Ok(LagrangeFunction {
        base: interpolate(sys, &e)?,
        center_index: center,
    })
}

pub fn all_lagrange(sys: &CollocationSystem) -> Result<Vec<LagrangeFunction>> {
    let coeffs = sys.lagrange_coefficients()?;
    Ok((0..sys.n())
        .map(|j| {
            let col: Vec<f64> = (0..sys.size()).map(|i| coeffs[(i, j)]).collect();
            LagrangeFunction {
                base: sys.interpolant_from(&col),
                center_index: j,
            }
        })
        .collect())
}
