//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use kilab::diagnostics::{self, Target};
use kilab::geometry::{self, evaluation_grid, GridScheme, ManifoldDescriptor, Point};
use kilab::interpolation::{self, all_lagrange, assemble, interpolate, lagrange, CollocationSystem};
use kilab::kernels::{matern_eval, zonal_coefficients, Kernel, KernelSpec};
use kilab::pointsets::{fibonacci_sphere, halton_box, random_sphere, PointSet};

const BIHARM: &str = "s2-sobolev:m=2,rule=biharm";
const POWER: &str = "s2-sobolev:m=2,rule=power";
const SIZES: [usize; 4] = [100, 400, 1600, 6400];
const GRID_FACTOR: usize = 40;

// pinned tolerances
const C1_MAX_SPREAD: f64 = 1.5;
const C2_RATE: (f64, f64) = (3.5, 4.5);
const C3_MIN_R2: f64 = 0.9;
const C3_MAX_REL_DIFF: f64 = 0.30;
const C4_MIN_RATE: f64 = 1.0;
const C5_COEFF_TOL: f64 = 1e-10;
const C5_LEBESGUE_TOL: f64 = 1e-9;
const C6_TOL: f64 = 1e-12;
const C7_REL_TOL: f64 = 1e-10;
const C8_MAX_STEP: f64 = 0.10;
const C9_TOL: f64 = 1e-6;
const C10_TOL: f64 = 1e-7;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn kernel(s: &str) -> Arc<Kernel> {
    Arc::new(Kernel::new(s.parse().unwrap()).unwrap())
}

fn sphere() -> ManifoldDescriptor {
    ManifoldDescriptor::sphere()
}

/// Rule-(b) Fibonacci systems and their grids, shared by criteria 1 and 2.
struct Cache {
    grids: Vec<Vec<Point>>,
}

impl Cache {
    fn new() -> Self {
        let grids = SIZES
            .iter()
            .map(|&n| evaluation_grid(&sphere(), GRID_FACTOR * n, GridScheme::Fibonacci).unwrap())
            .collect();
        Cache { grids }
    }

    fn system(n: usize, spec: &str) -> CollocationSystem {
        assemble(kernel(spec), Arc::new(fibonacci_sphere(n).unwrap())).unwrap()
    }
}

fn c1_lebesgue_bounded(cache: &Cache) -> Outcome {
    let mut values = Vec::new();
    for (i, &n) in SIZES.iter().enumerate() {
        let sys = Cache::system(n, BIHARM);
        let r = diagnostics::lebesgue_report(&sys, &cache.grids[i]).unwrap();
        eprintln!("  [C1] n={n:5} grid={:6} h={:.4e} L_est={:.6}", r.grid_size, r.mesh.mesh_norm_h, r.l_est);
        values.push(r.l_est);
    }
    let max = values.iter().copied().fold(f64::MIN, f64::max);
    let min = values.iter().copied().fold(f64::MAX, f64::min);
    let spread = max / min;
    outcome(
        spread <= C1_MAX_SPREAD,
        format!("L_est={values:.4?} spread factor {spread:.4} (limit {C1_MAX_SPREAD})"),
    )
}

fn c2_h4_convergence(cache: &Cache) -> Outcome {
    let spec: KernelSpec = BIHARM.parse().unwrap();
    let target = Target::parse("exp-dot", &sphere(), None).unwrap();
    let study = diagnostics::convergence_study(&spec, &target, &SIZES, &sphere(), &cache.grids[3]).unwrap();
    for r in &study.rows {
        eprintln!("  [C2] n={:5} h={:.4e} sup_err={:.4e} local rate={:.3}", r.n, r.h, r.sup_err, r.rate_local);
    }
    outcome(
        study.rate >= C2_RATE.0 && study.rate <= C2_RATE.1,
        format!("fitted rate {:.4} (target [{}, {}])", study.rate, C2_RATE.0, C2_RATE.1),
    )
}

fn c3_lagrange_decay() -> Outcome {
    let mut fits = Vec::new();
    for n in [400usize, 1600] {
        let xi = Arc::new(fibonacci_sphere(n).unwrap());
        let sys = assemble(kernel(BIHARM), Arc::clone(&xi)).unwrap();
        let grid = evaluation_grid(&sphere(), GRID_FACTOR * n, GridScheme::Fibonacci).unwrap();
        let mesh = geometry::mesh_stats(&xi, &grid).unwrap();
        let chi = lagrange(&sys, 0).unwrap();
        let fit = diagnostics::decay_profile(&chi, &grid, &mesh, 40).unwrap();
        let literal = diagnostics::decay_profile_with(
            &chi,
            &grid,
            &mesh,
            40,
            diagnostics::DecayOptions {
                fit_range: Some((1.0, 0.8 * fit.s_max)),
                ..Default::default()
            },
        )
        .unwrap();
        eprintln!(
            "  [C3] n={n:5} nu={:.4} r2={:.4} range=[{:.2}, {:.2}] bins={}; over [1, 0.8 s_max]: nu={:.4} r2={:.4}",
            fit.nu_fit, fit.r_squared, fit.fit_range.0, fit.fit_range.1, fit.bins_in_fit, literal.nu_fit, literal.r_squared
        );
        fits.push(fit);
    }
    let (a, b) = (&fits[0], &fits[1]);
    let rel = (a.nu_fit - b.nu_fit).abs() / b.nu_fit;
    let pass = a.nu_fit > 0.0 && b.nu_fit > 0.0 && a.r_squared > C3_MIN_R2 && b.r_squared > C3_MIN_R2 && rel <= C3_MAX_REL_DIFF;
    outcome(
        pass,
        format!(
            "nu(400)={:.4} r2={:.4}; nu(1600)={:.4} r2={:.4}; relative difference {:.3} (limit {C3_MAX_REL_DIFF})",
            a.nu_fit, a.r_squared, b.nu_fit, b.r_squared, rel
        ),
    )
}

fn c4_native_rate() -> Outcome {
    let spec: KernelSpec = POWER.parse().unwrap();
    let sizes = [100usize, 400, 1600];
    let grid = evaluation_grid(&sphere(), GRID_FACTOR * 1600, GridScheme::Fibonacci).unwrap();
    let target = Target::parse("exp-dot", &sphere(), None).unwrap();
    let study = diagnostics::convergence_study(&spec, &target, &sizes, &sphere(), &grid).unwrap();
    for r in &study.rows {
        eprintln!("  [C4] n={:5} h={:.4e} sup_err={:.4e}", r.n, r.h, r.sup_err);
    }
    outcome(study.rate >= C4_MIN_RATE, format!("rule (a) fitted rate {:.4} (floor {C4_MIN_RATE})", study.rate))
}

/// Gauss–Jordan inverse with partial pivoting.
fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs())).unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        for v in m[col].iter_mut() {
            *v /= d;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                for c in 0..2 * n {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

fn c5_small_oracle() -> Outcome {
    let k = kernel(BIHARM);
    let grid = evaluation_grid(&sphere(), 500, GridScheme::Fibonacci).unwrap();
    let (mut worst_coeff, mut worst_leb) = (0.0f64, 0.0f64);
    for n in 1..=8usize {
        for seed in 0..3u64 {
            let xi = Arc::new(random_sphere(n, 100 * n as u64 + seed).unwrap());
            let nodes = xi.nodes();
            let sys = assemble(Arc::clone(&k), Arc::clone(&xi)).unwrap();
            let dense: Vec<Vec<f64>> = nodes
                .iter()
                .map(|a| nodes.iter().map(|b| k.eval_points(a, b)).collect())
                .collect();
            let inv = gauss_jordan_inverse(&dense);
            for (j, chi) in all_lagrange(&sys).unwrap().iter().enumerate() {
                for i in 0..n {
                    worst_coeff = worst_coeff.max((chi.base.kernel_coeffs()[i] - inv[i][j]).abs());
                }
            }
            let report = diagnostics::lebesgue_report(&sys, &grid).unwrap();
            let mut oracle_max = 0.0f64;
            for (g, x) in grid.iter().enumerate() {
                let kx: Vec<f64> = nodes.iter().map(|p| k.eval_points(x, p)).collect();
                let lam: f64 = (0..n).map(|j| (0..n).map(|i| inv[i][j] * kx[i]).sum::<f64>().abs()).sum();
                worst_leb = worst_leb.max((lam - report.lambda_samples[g]).abs());
                oracle_max = oracle_max.max(lam);
            }
            worst_leb = worst_leb.max((oracle_max - report.l_est).abs());
        }
    }
    outcome(
        worst_coeff < C5_COEFF_TOL && worst_leb < C5_LEBESGUE_TOL,
        format!("max coefficient deviation {worst_coeff:.2e} (tol {C5_COEFF_TOL:e}), max Lebesgue deviation {worst_leb:.2e} (tol {C5_LEBESGUE_TOL:e})"),
    )
}

fn c6_single_center() -> Outcome {
    let mut worst = 0.0f64;
    let s = sphere();
    let grid = evaluation_grid(&s, 500, GridScheme::Fibonacci).unwrap();
    for spec in [BIHARM, POWER, "s2-sobolev:m=3,rule=power"] {
        let xi = Arc::new(PointSet::new(vec![grid[17].clone()], s.clone(), "one").unwrap());
        let r = diagnostics::lebesgue_report(&assemble(kernel(spec), xi).unwrap(), &grid).unwrap();
        worst = worst.max((r.l_est - 1.0).abs());
    }
    let b = ManifoldDescriptor::unit_box(2).unwrap();
    let bgrid = evaluation_grid(&b, 500, GridScheme::Random(1)).unwrap();
    let xi = Arc::new(PointSet::new(vec![bgrid[3].clone()], b, "one").unwrap());
    let r = diagnostics::lebesgue_report(&assemble(kernel("matern:m=2,d=2"), xi).unwrap(), &bgrid).unwrap();
    worst = worst.max((r.l_est - 1.0).abs());
    outcome(worst < C6_TOL, format!("max |L_est − 1| = {worst:.2e} over 4 kernels (tol {C6_TOL:e})"))
}

fn c7_matern_half() -> Outcome {
    let mut worst = 0.0f64;
    for spec in ["matern:m=1,d=1", "matern:m=2,d=3"] {
        let spec: KernelSpec = spec.parse().unwrap();
        for i in 0..100 {
            let r = 10f64.powf(-3.0 + i as f64 * (30f64.log10() + 3.0) / 99.0);
            let v = matern_eval(&spec, r).unwrap();
            worst = worst.max((v - (-r).exp()).abs() / (-r).exp());
        }
    }
    outcome(worst < C7_REL_TOL, format!("max relative error {worst:.2e} (tol {C7_REL_TOL:e})"))
}

fn c8_log_singularity() -> Outcome {
    let z = zonal_coefficients(&BIHARM.parse().unwrap()).unwrap();
    let k1 = z.eval_w(0.0);
    let deltas = [1e-2, 1e-3, 1e-4, 1e-5];
    let ratios: Vec<f64> = deltas.iter().map(|&d: &f64| (k1 - z.eval_w(0.5 * d)) / (d * d.ln().abs())).collect();
    let steps: Vec<f64> = ratios.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).collect();
    // extrapolate R = α₀ + b/|ln δ|
    let pts: Vec<(f64, f64)> = deltas.iter().zip(&ratios).map(|(d, r)| (1.0 / d.ln().abs(), *r)).collect();
    let alpha0 = diagnostics::least_squares(&pts).unwrap().intercept;
    let pass = steps.iter().all(|&s| s <= C8_MAX_STEP) && alpha0.abs() > 1e-3;
    outcome(
        pass,
        format!(
            "ratios {ratios:.5?}, successive changes {steps:.4?} (limit {C8_MAX_STEP}); extrapolated α₀ = {alpha0:.5} (1/(8π) = {:.5})",
            1.0 / (8.0 * PI)
        ),
    )
}

/// Gauss–Legendre nodes and weights on [−1, 1].
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, t);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let p2 = ((2 * k + 1) as f64 * t * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    (p1, n as f64 * (t * p1 - p0) / (t * t - 1.0))
}

/// `(g, g', g'')` for `g(t) = Σ a_ℓ P_ℓ(t)`, using the derivative recurrences
/// `P'_{ℓ+1} = P'_{ℓ−1} + (2ℓ+1) P_ℓ` and the same for `P''`.
fn series_with_derivatives(a: &[f64], t: f64) -> (f64, f64, f64) {
    let l = a.len();
    let mut p = vec![0.0; l + 1];
    let mut dp = vec![0.0; l + 1];
    let mut ddp = vec![0.0; l + 1];
    p[0] = 1.0;
    if l >= 1 {
        p[1] = t;
        dp[1] = 1.0;
    }
    for k in 1..l {
        p[k + 1] = ((2 * k + 1) as f64 * t * p[k] - k as f64 * p[k - 1]) / (k + 1) as f64;
        dp[k + 1] = dp[k - 1] + (2 * k + 1) as f64 * p[k];
        ddp[k + 1] = ddp[k - 1] + (2 * k + 1) as f64 * dp[k];
    }
    let mut out = (0.0, 0.0, 0.0);
    for k in 0..l {
        out.0 += a[k] * p[k];
        out.1 += a[k] * dp[k];
        out.2 += a[k] * ddp[k];
    }
    out
}

/// Riemannian gradient and Hessian at `p ∈ S²` of `x ↦ g(x·y)`:
/// `∇ = g' P y`, `Hess = g'' (Py)(Py)ᵀ − (p·y) g' P` with `P = I − p pᵀ`.
fn grad_hess(p: [f64; 3], y: [f64; 3], g1: f64, g2: f64) -> ([f64; 3], [[f64; 3]; 3]) {
    let t = p[0] * y[0] + p[1] * y[1] + p[2] * y[2];
    let py = [y[0] - t * p[0], y[1] - t * p[1], y[2] - t * p[2]];
    let mut h = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let proj = if i == j { 1.0 } else { 0.0 } - p[i] * p[j];
            h[i][j] = g2 * py[i] * py[j] - t * g1 * proj;
        }
    }
    ([g1 * py[0], g1 * py[1], g1 * py[2]], h)
}

#[derive(Clone, Copy, PartialEq)]
enum InnerProduct {
    /// Hessian + gradient + value terms.
    N,
    /// `∫ (1−Δ)u (1−Δ)v`.
    OneMinusLaplaceSquared,
}

/// `max_{ℓ ≤ 5, x} |⟨P_ℓ(··z), κ(·, x)⟩ − P_ℓ(x·z)|` by exact product quadrature.
fn reproducing_defect(spec: &str, ip: InnerProduct) -> f64 {
    let series = zonal_coefficients(&spec.parse().unwrap()).unwrap();
    let a: Vec<f64> = series
        .coeffs()
        .iter()
        .enumerate()
        .map(|(l, c)| (2 * l + 1) as f64 / (4.0 * PI) * c)
        .collect();
    let degree = a.len() + 8;
    let n_theta = degree / 2 + 4;
    let n_phi = degree + 4;
    let (zs, ws) = gauss_legendre(n_theta);
    let north = [0.0, 0.0, 1.0];
    let xs = [[0.0, 0.0, 1.0], [0.48, -0.6, 0.64], [-0.8, 0.0, -0.6]];
    let mut worst = 0.0f64;
    for ell in 0..=5usize {
        let mut f_coeffs = vec![0.0; ell + 1];
        f_coeffs[ell] = 1.0;
        for x in xs {
            let mut acc = 0.0;
            for (z, wz) in zs.iter().zip(&ws) {
                let rho = (1.0 - z * z).sqrt();
                for k in 0..n_phi {
                    let phi = 2.0 * PI * k as f64 / n_phi as f64;
                    let p = [rho * phi.cos(), rho * phi.sin(), *z];
                    let w = wz * 2.0 * PI / n_phi as f64;
                    let tf = p[2];
                    let tk = p[0] * x[0] + p[1] * x[1] + p[2] * x[2];
                    let (f0, f1, f2) = series_with_derivatives(&f_coeffs, tf);
                    let (k0, k1, k2) = series_with_derivatives(&a, tk);
                    let integrand = match ip {
                        InnerProduct::N => {
                            let (gf, hf) = grad_hess(p, north, f1, f2);
                            let (gk, hk) = grad_hess(p, x, k1, k2);
                            let hh: f64 = (0..3).map(|i| (0..3).map(|j| hf[i][j] * hk[i][j]).sum::<f64>()).sum();
                            let gg: f64 = (0..3).map(|i| gf[i] * gk[i]).sum();
                            hh + gg + f0 * k0
                        }
                        InnerProduct::OneMinusLaplaceSquared => {
                            let lap_f = f2 * (1.0 - tf * tf) - 2.0 * tf * f1;
                            let lap_k = k2 * (1.0 - tk * tk) - 2.0 * tk * k1;
                            (f0 - lap_f) * (k0 - lap_k)
                        }
                    };
                    acc += w * integrand;
                }
            }
            let exact = series_with_derivatives(&f_coeffs, x[2]).0;
            worst = worst.max((acc - exact).abs());
        }
    }
    worst
}

/// `max_{ℓ ≤ 5} |2π ∫ κ(t) P_ℓ(t) dt / c_ℓ − 1|` for the evaluated kernel,
/// with `t = 1 − 2u²` to smooth the endpoint singularity.
fn projection_defect(spec: &str) -> f64 {
    let series = zonal_coefficients(&spec.parse().unwrap()).unwrap();
    let (us, ws) = gauss_legendre(400);
    let mut worst = 0.0f64;
    for ell in 0..=5usize {
        let mut pc = vec![0.0; ell + 1];
        pc[ell] = 1.0;
        let mut acc = 0.0;
        for (x, w) in us.iter().zip(&ws) {
            let u = 0.5 * (x + 1.0);
            let wt = 0.5 * w;
            let t = 1.0 - 2.0 * u * u;
            acc += wt * series.eval_w(u * u) * series_with_derivatives(&pc, t).0 * 4.0 * u;
        }
        worst = worst.max((2.0 * PI * acc / series.coeffs()[ell] - 1.0).abs());
    }
    worst
}

fn c9_multiplier_validation() -> Outcome {
    let shipped = reproducing_defect(BIHARM, InnerProduct::N);
    let projection = projection_defect(BIHARM);
    let rule_a_own = reproducing_defect(POWER, InnerProduct::OneMinusLaplaceSquared);
    let rule_a_under_n = reproducing_defect(POWER, InnerProduct::N);
    eprintln!("  [C9] rule (a) under its own (1−Δ)² product: defect {rule_a_own:.2e}; rule (a) under the N product: defect {rule_a_under_n:.2e}");
    eprintln!("  [C9] evaluated rule-(b) kernel, P_ℓ projections vs c_ℓ: max relative defect {projection:.2e}");
    outcome(
        shipped < C9_TOL && projection < C9_TOL,
        format!("rule (b) under the N product: max defect {shipped:.2e} for ℓ ≤ 5 (tol {C9_TOL:e}); shipped kernel: rule (b)"),
    )
}

fn c10_reproduction() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;

    let s = sphere();
    let xi = Arc::new(fibonacci_sphere(300).unwrap());
    let grid = evaluation_grid(&s, 1000, GridScheme::Fibonacci).unwrap();
    for spec in [BIHARM, POWER] {
        let k = kernel(spec);
        let f = |x: &Point| k.eval_points(x, &xi.nodes()[0]);
        let err = fit_error(assemble(Arc::clone(&k), Arc::clone(&xi)).unwrap(), &f, &grid);
        pass &= err < C10_TOL;
        parts.push(format!("{spec}: {err:.2e}"));
    }

    let b = ManifoldDescriptor::unit_box(2).unwrap();
    let xb = Arc::new(halton_box(300, &b).unwrap());
    let bgrid = evaluation_grid(&b, 1000, GridScheme::Random(7)).unwrap();
    let k = kernel("matern:m=2,d=2");
    let f = |x: &Point| k.eval_points(x, &xb.nodes()[0]);
    let err = fit_error(assemble(Arc::clone(&k), Arc::clone(&xb)).unwrap(), &f, &bgrid);
    pass &= err < C10_TOL;
    parts.push(format!("matern:m=2,d=2: {err:.2e}"));

    // thin-plate spline: the interpolation space only holds kernel
    // combinations with vanishing linear moments, so the translate at ξ₁ is
    // completed by three further nodes carrying the compensating weights
    let k = kernel("tps:m=2,d=2");
    let sys = assemble(Arc::clone(&k), Arc::clone(&xb)).unwrap();
    let nodes = xb.nodes();
    let p = |x: &Point| [1.0, 2.0 * x.coords()[0] - 1.0, 2.0 * x.coords()[1] - 1.0];
    let basis: Vec<[f64; 3]> = (1..4).map(|j| p(&nodes[j])).collect();
    let rhs = p(&nodes[0]).map(|v| -v);
    let m: Vec<Vec<f64>> = (0..3).map(|r| (0..3).map(|c| basis[c][r]).collect()).collect();
    let inv = gauss_jordan_inverse(&m);
    let w: Vec<f64> = (0..3).map(|i| (0..3).map(|j| inv[i][j] * rhs[j]).sum()).collect();
    let f = |x: &Point| {
        k.eval_points(x, &nodes[0]) + (0..3).map(|j| w[j] * k.eval_points(x, &nodes[j + 1])).sum::<f64>()
    };
    let err = fit_error(sys, &f, &bgrid);
    pass &= err < C10_TOL;
    parts.push(format!("tps:m=2,d=2 (moment-free combination at ξ₁): {err:.2e}"));

    let sys = assemble(Arc::clone(&k), Arc::clone(&xb)).unwrap();
    let bare = |x: &Point| k.eval_points(x, &nodes[0]);
    eprintln!("  [C10] tps, bare translate κ(·,ξ₁) (not in the interpolation space): sup error {:.2e}", fit_error(sys, &bare, &bgrid));

    outcome(pass, format!("sup errors on 10³ grids: {} (tol {C10_TOL:e})", parts.join(", ")))
}

fn fit_error(sys: CollocationSystem, f: &dyn Fn(&Point) -> f64, grid: &[Point]) -> f64 {
    let data: Vec<f64> = sys.points().nodes().iter().map(f).collect();
    let s = interpolate(&sys, &data).unwrap();
    grid.iter()
        .map(|x| (s.eval_coords(x.coords()) - f(x)).abs())
        .fold(0.0, f64::max)
}

fn main() {
    // `cargo test -- --list` and friends pass flags; nothing to list here
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let _ = interpolation::SOLVE_TOL;
    let started = Instant::now();
    let cache = Cache::new();
    type Check<'a> = (&'a str, Box<dyn Fn() -> Outcome + 'a>);
    let checks: Vec<Check> = vec![
        ("bounded Lebesgue constant", Box::new(|| c1_lebesgue_bounded(&cache))),
        ("h^4 convergence", Box::new(|| c2_h4_convergence(&cache))),
        ("exponential Lagrange decay", Box::new(c3_lagrange_decay)),
        ("native-space error rate", Box::new(c4_native_rate)),
        ("small-instance oracle", Box::new(c5_small_oracle)),
        ("single-center Lebesgue constant", Box::new(c6_single_center)),
        ("Matern closed form", Box::new(c7_matern_half)),
        ("logarithmic kernel singularity", Box::new(c8_log_singularity)),
        ("multiplier validation", Box::new(c9_multiplier_validation)),
        ("exact reproduction", Box::new(c10_reproduction)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in checks.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "{} [{}] {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        checks.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
