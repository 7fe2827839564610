//! Node-set generators: spherical Fibonacci lattices, uniform random sphere
//! samples, Halton sequences in boxes, and greedy thinning.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{KilabError, Result};
use crate::exec::Exec;
use crate::geometry::{
    self, distance_unchecked, fibonacci_coords, ManifoldDescriptor, ManifoldKind, MeshStats, Point,
    DUPLICATE_TOL,
};

/// Resample attempts for a colliding random node before giving up.
const MAX_RESAMPLE: usize = 100;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// A finite node set Ξ on a manifold. Immutable apart from the cached
/// [`MeshStats`].
#[derive(Clone, Debug)]
pub struct PointSet {
    nodes: Vec<Point>,
    man: ManifoldDescriptor,
    stats: Option<MeshStats>,
    label: String,
}

impl PointSet {
    /// Validates every node against `man` and rejects duplicates.
    pub fn new(nodes: Vec<Point>, man: ManifoldDescriptor, label: impl Into<String>) -> Result<Self> {
        for p in &nodes {
            if !man.contains(p) {
                return Err(KilabError::Argument(format!(
                    "node {:?} is not a valid point of {:?}",
                    p.coords(),
                    man.kind()
                )));
            }
        }
        let set = Self::from_nodes_unchecked(nodes, man, label);
        let minimum = geometry::min_pairwise_distance(&set.nodes, set.man.kind(), Exec::default());
        if minimum < DUPLICATE_TOL {
            return Err(KilabError::Degenerate(format!(
                "nodes closer than {DUPLICATE_TOL:e} (min distance {minimum:e})"
            )));
        }
        Ok(set)
    }

    pub(crate) fn from_nodes_unchecked(nodes: Vec<Point>, man: ManifoldDescriptor, label: impl Into<String>) -> Self {
        PointSet {
            nodes,
            man,
            stats: None,
            label: label.into(),
        }
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn manifold(&self) -> &ManifoldDescriptor {
        &self.man
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn stats(&self) -> Option<&MeshStats> {
        self.stats.as_ref()
    }

    /// Computes and caches mesh statistics against `grid`.
    pub fn compute_stats(&mut self, grid: &[Point]) -> Result<MeshStats> {
        let st = geometry::mesh_stats(self, grid)?;
        self.stats = Some(st);
        Ok(st)
    }

    /// Separation radius q (half the minimum pairwise distance); `NaN` for one node.
    pub fn separation(&self) -> f64 {
        if self.nodes.len() < 2 {
            f64::NAN
        } else {
            0.5 * geometry::min_pairwise_distance(&self.nodes, self.man.kind(), Exec::default())
        }
    }

    /// Same nodes in a new order.
    pub fn permuted(&self, perm: &[usize]) -> Result<PointSet> {
        if perm.len() != self.len() {
            return Err(KilabError::Argument("permutation length mismatch".into()));
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(KilabError::Argument("not a permutation".into()));
            }
        }
        Ok(PointSet::from_nodes_unchecked(
            perm.iter().map(|&i| self.nodes[i].clone()).collect(),
            self.man.clone(),
            self.label.clone(),
        ))
    }
}

/// Spherical Fibonacci lattice: golden-angle azimuth, `z_k = 1 − (2k+1)/n`.
pub fn fibonacci_sphere(n: usize) -> Result<PointSet> {
    if n == 0 {
        return Err(KilabError::Argument("fibonacci_sphere needs n >= 1".into()));
    }
    let nodes = fibonacci_coords(n).into_iter().map(Point).collect();
    Ok(PointSet::from_nodes_unchecked(
        nodes,
        ManifoldDescriptor::sphere(),
        format!("fibonacci-{n}"),
    ))
}

/// I.i.d. uniform points on S² (normalized standard Gaussians), seeded.
pub fn random_sphere(n: usize, seed: u64) -> Result<PointSet> {
    if n == 0 {
        return Err(KilabError::Argument("random_sphere needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || loop {
        let v: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if norm > 1e-12 {
            break Point(v.iter().map(|c| c / norm).collect());
        }
    };
    let mut nodes: Vec<Point> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut accepted = None;
        for _ in 0..MAX_RESAMPLE {
            let cand = draw();
            let clash = nodes
                .iter()
                .any(|p| distance_unchecked(p.coords(), cand.coords(), ManifoldKind::UnitSphere2) < DUPLICATE_TOL);
            if !clash {
                accepted = Some(cand);
                break;
            }
        }
        match accepted {
            Some(p) => nodes.push(p),
            None => {
                return Err(KilabError::Degenerate(format!(
                    "random node collided {MAX_RESAMPLE} times in a row"
                )))
            }
        }
    }
    Ok(PointSet::from_nodes_unchecked(
        nodes,
        ManifoldDescriptor::sphere(),
        format!("random-{n}-seed{seed}"),
    ))
}

/// Radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// First `n` Halton points (indices `1..=n`, bases = first d primes), mapped into the box.
pub fn halton_box(n: usize, man: &ManifoldDescriptor) -> Result<PointSet> {
    if man.kind() != ManifoldKind::FlatBox {
        return Err(KilabError::Config("halton_box needs a flat box manifold".into()));
    }
    if n == 0 {
        return Err(KilabError::Argument("halton_box needs n >= 1".into()));
    }
    let d = man.dimension();
    if d > PRIMES.len() {
        return Err(KilabError::Config(format!("halton_box supports d <= {}", PRIMES.len())));
    }
    let nodes = (1..=n as u64)
        .map(|i| {
            Point(
                man.box_bounds()
                    .iter()
                    .zip(PRIMES)
                    .map(|(&(lo, hi), b)| lo + (hi - lo) * radical_inverse(i, b))
                    .collect(),
            )
        })
        .collect();
    Ok(PointSet::from_nodes_unchecked(nodes, man.clone(), format!("halton-{n}")))
}

/// Greedy pass in input order: keep a node iff it is at least `2·q_min`
/// from every node kept so far.
pub fn thin_to_separation(xi: &PointSet, q_min: f64) -> Result<PointSet> {
    if !(q_min > 0.0) {
        return Err(KilabError::Argument("q_min must be positive".into()));
    }
    let kind = xi.manifold().kind();
    let mut kept: Vec<Point> = Vec::new();
    for p in xi.nodes() {
        if kept
            .iter()
            .all(|k| distance_unchecked(k.coords(), p.coords(), kind) >= 2.0 * q_min)
        {
            kept.push(p.clone());
        }
    }
    if kept.is_empty() {
        return Err(KilabError::Degenerate("thinning removed every node".into()));
    }
    Ok(PointSet::from_nodes_unchecked(
        kept,
        xi.manifold().clone(),
        format!("{}-thin{q_min}", xi.label()),
    ))
}
