//! Geodesic distance, evaluation grids and mesh statistics on the two
//! supported manifolds: the unit sphere S² (embedded in ℝ³) and closed
//! axis-aligned boxes in ℝᵈ with the Euclidean metric.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{KilabError, Result};
use crate::exec::Exec;
use crate::pointsets::PointSet;

/// Nodes closer than this are treated as duplicates.
pub const DUPLICATE_TOL: f64 = 1e-14;

/// Grids sparser than this multiple of the node count trigger a warning in
/// [`mesh_stats`].
pub const MIN_GRID_DENSITY: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ManifoldKind {
    UnitSphere2,
    FlatBox,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifoldDescriptor {
    kind: ManifoldKind,
    dimension: usize,
    box_bounds: Vec<(f64, f64)>,
}

impl ManifoldDescriptor {
    pub fn sphere() -> Self {
        ManifoldDescriptor {
            kind: ManifoldKind::UnitSphere2,
            dimension: 2,
            box_bounds: Vec::new(),
        }
    }

    /// A closed box `∏ [lo_i, hi_i]`; every interval must have positive width.
    pub fn flat_box(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(KilabError::Config("box needs at least one axis".into()));
        }
        for (i, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(KilabError::Config(format!(
                    "box axis {i} has non-positive width [{lo}, {hi}]"
                )));
            }
        }
        Ok(ManifoldDescriptor {
            kind: ManifoldKind::FlatBox,
            dimension: bounds.len(),
            box_bounds: bounds,
        })
    }

    /// `[0, 1]^d`.
    pub fn unit_box(d: usize) -> Result<Self> {
        Self::flat_box(vec![(0.0, 1.0); d])
    }

    pub fn kind(&self) -> ManifoldKind {
        self.kind
    }

    /// Intrinsic dimension (2 for the sphere).
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Length of the coordinate vectors (3 for the sphere).
    pub fn ambient_dimension(&self) -> usize {
        match self.kind {
            ManifoldKind::UnitSphere2 => 3,
            ManifoldKind::FlatBox => self.dimension,
        }
    }

    pub fn box_bounds(&self) -> &[(f64, f64)] {
        &self.box_bounds
    }

    /// π on the unit sphere, `+∞` for flat boxes.
    pub fn injectivity_radius(&self) -> f64 {
        match self.kind {
            ManifoldKind::UnitSphere2 => PI,
            ManifoldKind::FlatBox => f64::INFINITY,
        }
    }

    /// Box center and half-widths (empty for the sphere).
    pub fn center_and_half_width(&self) -> (Vec<f64>, Vec<f64>) {
        self.box_bounds
            .iter()
            .map(|&(lo, hi)| (0.5 * (lo + hi), 0.5 * (hi - lo)))
            .unzip()
    }

    /// Validates raw coordinates; sphere points are renormalized.
    pub fn point(&self, coords: Vec<f64>) -> Result<Point> {
        let dim = self.ambient_dimension();
        if coords.len() != dim {
            return Err(KilabError::Dimension {
                expected: dim,
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(KilabError::Argument("non-finite coordinate".into()));
        }
        match self.kind {
            ManifoldKind::UnitSphere2 => {
                let norm = coords.iter().map(|c| c * c).sum::<f64>().sqrt();
                if norm < 1e-300 {
                    return Err(KilabError::Argument("zero vector is not on the sphere".into()));
                }
                Ok(Point(coords.into_iter().map(|c| c / norm).collect()))
            }
            ManifoldKind::FlatBox => {
                for (i, (&c, &(lo, hi))) in coords.iter().zip(&self.box_bounds).enumerate() {
                    // tolerate rounding from affine maps
                    let slack = 1e-12 * (hi - lo);
                    if c < lo - slack || c > hi + slack {
                        return Err(KilabError::Argument(format!(
                            "coordinate {i} = {c} outside [{lo}, {hi}]"
                        )));
                    }
                }
                Ok(Point(coords))
            }
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        if p.dim() != self.ambient_dimension() {
            return false;
        }
        match self.kind {
            ManifoldKind::UnitSphere2 => (p.norm() - 1.0).abs() <= 1e-12,
            ManifoldKind::FlatBox => p
                .coords()
                .iter()
                .zip(&self.box_bounds)
                .all(|(&c, &(lo, hi))| c >= lo - 1e-12 * (hi - lo) && c <= hi + 1e-12 * (hi - lo)),
        }
    }
}

/// Coordinates of a point, in the ambient space of its manifold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point(pub(crate) Vec<f64>);

impl Point {
    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn dot(&self, other: &Point) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Great-circle angle between unit vectors. Uses `atan2(|a×b|, a·b)`, which
/// equals `acos(clamp(a·b))` but stays accurate for nearly equal points.
#[inline]
pub(crate) fn sphere_angle(a: &[f64], b: &[f64]) -> f64 {
    let d = (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]).clamp(-1.0, 1.0);
    let cx = a[1] * b[2] - a[2] * b[1];
    let cy = a[2] * b[0] - a[0] * b[2];
    let cz = a[0] * b[1] - a[1] * b[0];
    (cx * cx + cy * cy + cz * cz).sqrt().atan2(d)
}

pub fn geodesic_distance(a: &Point, b: &Point, man: &ManifoldDescriptor) -> Result<f64> {
    let dim = man.ambient_dimension();
    for p in [a, b] {
        if p.dim() != dim {
            return Err(KilabError::Dimension {
                expected: dim,
                got: p.dim(),
            });
        }
    }
    Ok(distance_unchecked(a.coords(), b.coords(), man.kind()))
}

#[inline]
pub(crate) fn distance_unchecked(a: &[f64], b: &[f64], kind: ManifoldKind) -> f64 {
    match kind {
        ManifoldKind::UnitSphere2 => sphere_angle(a, b),
        ManifoldKind::FlatBox => dist2(a, b).sqrt(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridScheme {
    Fibonacci,
    Tensor,
    Random(u64),
}

pub(crate) fn fibonacci_coords(n: usize) -> Vec<Vec<f64>> {
    let golden_angle = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2 * k + 1) as f64 / n as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = k as f64 * golden_angle;
            let (s, c) = phi.sin_cos();
            vec![r * c, r * s, z]
        })
        .collect()
}

/// Per-axis resolution of a tensor grid asked to hold about `n` points:
/// `round(n^(1/d))`, at least 1. The grid has `k^d` points, which equals `n`
/// whenever `n` is a perfect d-th power.
pub fn tensor_axis_count(n: usize, d: usize) -> usize {
    let k = (n as f64).powf(1.0 / d as f64).round() as usize;
    // guard against powf rounding just below an exact power
    let k = k.max(1);
    if (k + 1).checked_pow(d as u32) == Some(n) {
        k + 1
    } else {
        k
    }
}

/// Dense point cloud used to estimate suprema over the manifold.
///
/// Sphere: `Fibonacci` or `Random(seed)`. Box: `Tensor` (includes the
/// corners; `tensor_axis_count(n, d)^d` points) or `Random(seed)`.
pub fn evaluation_grid(man: &ManifoldDescriptor, n: usize, scheme: GridScheme) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(KilabError::Argument("grid needs n >= 1".into()));
    }
    let raw: Vec<Vec<f64>> = match (man.kind(), scheme) {
        (ManifoldKind::UnitSphere2, GridScheme::Fibonacci) => fibonacci_coords(n),
        (ManifoldKind::UnitSphere2, GridScheme::Random(seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n)
                .map(|_| loop {
                    let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
                    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    if norm > 1e-12 {
                        break v.iter().map(|c| c / norm).collect();
                    }
                })
                .collect()
        }
        (ManifoldKind::FlatBox, GridScheme::Tensor) => {
            let d = man.dimension();
            let k = tensor_axis_count(n, d);
            let axes: Vec<Vec<f64>> = man
                .box_bounds()
                .iter()
                .map(|&(lo, hi)| {
                    if k == 1 {
                        vec![0.5 * (lo + hi)]
                    } else {
                        (0..k)
                            .map(|i| {
                                if i == k - 1 {
                                    hi
                                } else {
                                    lo + (hi - lo) * i as f64 / (k - 1) as f64
                                }
                            })
                            .collect()
                    }
                })
                .collect();
            let total = k.pow(d as u32);
            (0..total)
                .map(|mut idx| {
                    let mut p = vec![0.0; d];
                    for (axis, slot) in p.iter_mut().enumerate() {
                        *slot = axes[axis][idx % k];
                        idx /= k;
                    }
                    p
                })
                .collect()
        }
        (ManifoldKind::FlatBox, GridScheme::Random(seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dists: Vec<Uniform<f64>> = man
                .box_bounds()
                .iter()
                .map(|&(lo, hi)| Uniform::new_inclusive(lo, hi).expect("validated bounds"))
                .collect();
            (0..n)
                .map(|_| dists.iter().map(|u| u.sample(&mut rng)).collect())
                .collect()
        }
        (kind, scheme) => {
            return Err(KilabError::Config(format!(
                "grid scheme {scheme:?} is not supported on {kind:?}"
            )))
        }
    };
    Ok(raw.into_iter().map(Point).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshStats {
    /// Largest grid-to-node distance; a lower bound for the true fill distance.
    pub mesh_norm_h: f64,
    /// Half the minimum pairwise node distance; `NaN` for a single node.
    pub separation_q: f64,
    /// `h / q`; `+∞` for a single node.
    pub mesh_ratio_rho: f64,
    pub grid_size_used: usize,
}

/// Index of the nearest node and its distance.
pub(crate) fn nearest_node(x: &[f64], nodes: &[Point], kind: ManifoldKind) -> (usize, f64) {
    match kind {
        ManifoldKind::UnitSphere2 => {
            // geodesic distance is monotone in the dot product
            let (mut best, mut best_dot) = (0, f64::NEG_INFINITY);
            for (j, p) in nodes.iter().enumerate() {
                let d = dot(x, p.coords());
                if d > best_dot {
                    best_dot = d;
                    best = j;
                }
            }
            (best, sphere_angle(x, nodes[best].coords()))
        }
        ManifoldKind::FlatBox => {
            let (mut best, mut best_d2) = (0, f64::INFINITY);
            for (j, p) in nodes.iter().enumerate() {
                let d2 = dist2(x, p.coords());
                if d2 < best_d2 {
                    best_d2 = d2;
                    best = j;
                }
            }
            (best, best_d2.sqrt())
        }
    }
}

/// Minimum pairwise distance between nodes (`+∞` for fewer than two).
pub(crate) fn min_pairwise_distance(nodes: &[Point], kind: ManifoldKind, exec: Exec) -> f64 {
    let n = nodes.len();
    exec.map(n, |i| {
        let a = nodes[i].coords();
        nodes[i + 1..]
            .iter()
            .map(|b| distance_unchecked(a, b.coords(), kind))
            .fold(f64::INFINITY, f64::min)
    })
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

pub fn mesh_stats(xi: &PointSet, grid: &[Point]) -> Result<MeshStats> {
    mesh_stats_with(xi, grid, Exec::default())
}

pub fn mesh_stats_with(xi: &PointSet, grid: &[Point], exec: Exec) -> Result<MeshStats> {
    let man = xi.manifold();
    let nodes = xi.nodes();
    if nodes.is_empty() {
        return Err(KilabError::Degenerate("empty node set".into()));
    }
    if grid.is_empty() {
        return Err(KilabError::Argument("empty evaluation grid".into()));
    }
    let dim = man.ambient_dimension();
    if let Some(p) = grid.iter().find(|p| p.dim() != dim) {
        return Err(KilabError::Dimension {
            expected: dim,
            got: p.dim(),
        });
    }
    if grid.len() < MIN_GRID_DENSITY * nodes.len() {
        log::warn!(
            "evaluation grid ({} points) is less than {}x denser than the node set ({} nodes); h is underestimated",
            grid.len(),
            MIN_GRID_DENSITY,
            nodes.len()
        );
    }
    let kind = man.kind();
    let min_pair = min_pairwise_distance(nodes, kind, exec);
    if min_pair < DUPLICATE_TOL {
        return Err(KilabError::Degenerate(format!(
            "duplicate nodes (distance {min_pair:e})"
        )));
    }
    let h = exec
        .map(grid.len(), |g| nearest_node(grid[g].coords(), nodes, kind).1)
        .into_iter()
        .fold(0.0, f64::max);
    let (q, rho) = if nodes.len() == 1 {
        (f64::NAN, f64::INFINITY)
    } else {
        let q = 0.5 * min_pair;
        (q, h / q)
    };
    Ok(MeshStats {
        mesh_norm_h: h,
        separation_q: q,
        mesh_ratio_rho: rho,
        grid_size_used: grid.len(),
    })
}
