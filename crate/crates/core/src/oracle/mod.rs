//! Ground truth for the closed-form kernel.
//!
//! Two routes that never touch the Bessel-product formula: direct time
//! evolution on a finite box `[-L, L]^d □ G_F`, and the Floquet fiber
//! integral `int e^{2 pi i theta . nu} e^{itH(theta)}(p, q) dtheta`.

mod evolve;

pub use evolve::{Chebyshev, DenseSpectral, Evolver, EvolverRegistry, DENSE_LIMIT};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::FiniteGraph;
use crate::kernel::{ProductGraph, ProductPoint};
use crate::spectral::FiberPoint;

/// Default cap on the number of sites in a truncated box.
pub const DEFAULT_MAX_SITES: usize = 4_000_000;

/// Extra lattice layers kept beyond the ballistic front `2t`.
pub const BOX_MARGIN: usize = 25;

/// Box radius that keeps the wave away from the boundary up to time `t`.
pub fn default_radius(t: f64) -> usize {
    (2.0 * t.abs()).ceil() as usize + BOX_MARGIN
}

/// Flat indexing of the sites of `[-L, L]^d □ G_F`.
///
/// Flat index is `cell * k + p`, where `cell` enumerates `n` with the first
/// coordinate varying fastest.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeBox {
    d: usize,
    radius: usize,
    k: usize,
}

impl LatticeBox {
    pub fn new(d: usize, radius: usize, k: usize) -> Self {
        LatticeBox { d, radius, k }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn cells(&self) -> usize {
        self.side().pow(self.d as u32)
    }

    /// `N = (2L + 1)^d k`.
    pub fn size(&self) -> usize {
        self.cells() * self.k
    }

    pub fn contains(&self, n: &[i64]) -> bool {
        n.len() == self.d && n.iter().all(|&c| c.unsigned_abs() as usize <= self.radius)
    }

    pub fn index(&self, n: &[i64], p: usize) -> Option<usize> {
        if !self.contains(n) || p >= self.k {
            return None;
        }
        let l = self.radius as i64;
        let side = self.side();
        let cell = n
            .iter()
            .rev()
            .fold(0usize, |acc, &c| acc * side + (c + l) as usize);
        Some(cell * self.k + p)
    }

    pub fn point(&self, flat: usize) -> ProductPoint {
        let p = flat % self.k;
        let mut cell = flat / self.k;
        let side = self.side();
        let l = self.radius as i64;
        let n = (0..self.d)
            .map(|_| {
                let c = (cell % side) as i64 - l;
                cell /= side;
                c
            })
            .collect();
        ProductPoint { n, p }
    }

    /// `sum |psi|^2` over sites whose lattice coordinate has
    /// `||n - center||_inf > distance`.
    pub fn mass_beyond(&self, psi: &[Complex64], center: &[i64], distance: f64) -> f64 {
        psi.iter()
            .enumerate()
            .filter(|(flat, _)| {
                let x = self.point(*flat);
                let r = x
                    .n
                    .iter()
                    .zip(center)
                    .map(|(a, b)| (a - b).unsigned_abs())
                    .max()
                    .unwrap_or(0);
                r as f64 > distance
            })
            .map(|(_, z)| z.norm_sqr())
            .sum()
    }
}

/// `H` of `Z^d □ G_F` restricted to a box, open boundary, sparse row storage.
#[derive(Debug, Clone)]
pub struct TruncatedHamiltonian {
    lattice: LatticeBox,
    row_start: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    spectral_bound: f64,
}

impl TruncatedHamiltonian {
    pub fn lattice(&self) -> &LatticeBox {
        &self.lattice
    }

    pub fn size(&self) -> usize {
        self.lattice.size()
    }

    /// Gershgorin bound `2d + max deg(G_F) + max |Q|` on the spectral radius.
    pub fn spectral_bound(&self) -> f64 {
        self.spectral_bound
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_start[i]..self.row_start[i + 1];
        self.cols[range.clone()].iter().copied().zip(self.vals[range].iter().copied())
    }

    /// Number of off-diagonal entries in row `i`.
    pub fn degree(&self, i: usize) -> usize {
        self.row(i).filter(|&(j, _)| j != i).count()
    }

    /// Undirected off-diagonal edges `(i, j)`, `i < j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.size())
            .flat_map(|i| self.row(i).filter(move |&(j, _)| j > i).map(move |(j, _)| (i, j)))
            .collect()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; x.len()];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for (j, v) in self.row(i) {
                m[(i, j)] = v;
            }
        }
        m
    }
}

/// Assembles the truncated Hamiltonian on `[-L, L]^d □ G_F`.
pub fn assemble_truncated(g: &FiniteGraph, d: usize, radius: usize) -> Result<TruncatedHamiltonian> {
    assemble_truncated_capped(g, d, radius, DEFAULT_MAX_SITES)
}

pub fn assemble_truncated_capped(
    g: &FiniteGraph,
    d: usize,
    radius: usize,
    max_sites: usize,
) -> Result<TruncatedHamiltonian> {
    if d == 0 {
        return Err(Error::InvalidArgument("lattice dimension d must be at least 1".into()));
    }
    let side = 2 * radius + 1;
    let size = (0..d)
        .try_fold(g.k(), |acc: usize, _| acc.checked_mul(side))
        .filter(|&n| n <= max_sites)
        .ok_or_else(|| {
            Error::InvalidArgument(format!(
                "box [-{radius}, {radius}]^{d} x {} vertices exceeds the cap of {max_sites} sites",
                g.k()
            ))
        })?;
    let lattice = LatticeBox::new(d, radius, g.k());
    debug_assert_eq!(lattice.size(), size);

    let mut row_start = Vec::with_capacity(size + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_start.push(0);
    let mut entries: Vec<(usize, f64)> = Vec::new();
    for flat in 0..size {
        let x = lattice.point(flat);
        entries.clear();
        let q = g.potential()[x.p];
        if q != 0.0 {
            entries.push((flat, q));
        }
        for nb in g.neighbors(x.p) {
            entries.push((flat - x.p + nb, 1.0));
        }
        let mut n = x.n.clone();
        for j in 0..d {
            for step in [-1i64, 1] {
                n[j] += step;
                if let Some(idx) = lattice.index(&n, x.p) {
                    entries.push((idx, 1.0));
                }
                n[j] -= step;
            }
        }
        entries.sort_by_key(|&(j, _)| j);
        for &(j, v) in &entries {
            cols.push(j);
            vals.push(v);
        }
        row_start.push(cols.len());
    }
    let spectral_bound = (2 * d + g.max_degree()) as f64 + g.max_abs_potential();
    Ok(TruncatedHamiltonian {
        lattice,
        row_start,
        cols,
        vals,
        spectral_bound,
    })
}

/// Settings for [`compare_kernel_vs_oracle`].
#[derive(Debug, Clone)]
pub struct CompareOptions {
    /// Box radius; defaults to `ceil(2t) + 25`.
    pub radius: Option<usize>,
    pub random_probes: usize,
    pub seed: u64,
    pub evolver: String,
    pub max_sites: usize,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions {
            radius: None,
            random_probes: 50,
            seed: 0,
            evolver: "chebyshev".into(),
            max_sites: DEFAULT_MAX_SITES,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub t: f64,
    pub radius: usize,
    pub evolver: String,
    /// Number of `(offset, p, q)` entries compared.
    pub entries: usize,
    pub max_error: f64,
    /// Entry attaining `max_error`: offset `n - m`, target vertex, source vertex.
    pub worst: Option<(Vec<i64>, usize, usize)>,
    /// Largest column-norm deviation `| ||psi||_2 - 1 |` over the sources.
    pub norm_defect: f64,
}

impl ComparisonReport {
    pub fn check(&self, tolerance: f64) -> Result<()> {
        if self.max_error < tolerance {
            return Ok(());
        }
        let detail = match &self.worst {
            Some((nu, p, q)) => format!("offset {nu:?}, p = {p}, q = {q}"),
            None => "no entries compared".into(),
        };
        Err(Error::BoundViolation {
            t: self.t,
            value: self.max_error,
            bound: tolerance,
            detail,
        })
    }
}

/// Lattice offsets probed by the comparison: a stretch of one axis through
/// the lightcone plus uniformly random offsets in the box.
pub fn probe_offsets(d: usize, t: f64, radius: usize, random: usize, seed: u64) -> Vec<Vec<i64>> {
    let reach = ((2.0 * t.abs()).ceil() as usize + 5).min(radius.saturating_sub(10)) as i64;
    let mut probes: Vec<Vec<i64>> = (-reach..=reach)
        .map(|a| {
            let mut nu = vec![0; d];
            nu[0] = a;
            nu
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let l = radius as i64;
    for _ in 0..random {
        probes.push((0..d).map(|_| rng.gen_range(-l..=l)).collect());
    }
    probes
}

/// Max entrywise gap between the closed-form kernel and direct evolution on
/// a truncated box.
pub fn compare_kernel_vs_oracle(
    pg: &ProductGraph,
    t: f64,
    registry: &EvolverRegistry,
    options: &CompareOptions,
) -> Result<ComparisonReport> {
    let evolver = registry.get(&options.evolver)?;
    let d = pg.d();
    let radius = options.radius.unwrap_or_else(|| default_radius(t));
    let h = assemble_truncated_capped(pg.graph(), d, radius, options.max_sites)?;
    let lattice = *h.lattice();
    let probes = probe_offsets(d, t, radius, options.random_probes, options.seed);
    let blocks = probes
        .iter()
        .map(|nu| pg.kernel_block(nu, t))
        .collect::<Result<Vec<_>>>()?;

    let mut max_error: f64 = 0.0;
    let mut worst = None;
    let mut entries = 0;
    let mut norm_defect: f64 = 0.0;
    let origin = vec![0i64; d];
    for q in 0..pg.k() {
        let source = lattice.index(&origin, q).expect("origin is inside the box");
        let psi = evolver.evolve(&h, source, t)?;
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        norm_defect = norm_defect.max((norm - 1.0).abs());
        for (nu, block) in probes.iter().zip(&blocks) {
            for p in 0..pg.k() {
                let idx = lattice.index(nu, p).expect("probes lie inside the box");
                let err = (psi[idx] - block.get(p, q)).norm();
                entries += 1;
                if err > max_error || worst.is_none() {
                    max_error = max_error.max(err);
                    worst = Some((nu.clone(), p, q));
                }
            }
        }
    }
    Ok(ComparisonReport {
        t,
        radius,
        evolver: evolver.name().to_string(),
        entries,
        max_error,
        worst,
        norm_defect,
    })
}

/// `int_{[0,1)^d} e^{2 pi i theta . nu} e^{itH(theta)}(p, q) dtheta` by the
/// tensor trapezoid rule with `nodes` points per axis.
pub fn kernel_via_fiber_quadrature(
    pg: &ProductGraph,
    nu: &[i64],
    p: usize,
    q: usize,
    t: f64,
    nodes: usize,
) -> Result<Complex64> {
    let d = pg.d();
    if nu.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: nu.len(),
        });
    }
    for v in [p, q] {
        if v >= pg.k() {
            return Err(Error::VertexOutOfRange { index: v, k: pg.k() });
        }
    }
    let reach = nu.iter().map(|v| v.unsigned_abs() as usize).max().unwrap_or(0);
    let need = 2 * (reach + (2.0 * t.abs()).ceil() as usize) + 16;
    if nodes < need {
        return Err(Error::InsufficientResolution {
            what: "fiber quadrature nodes per axis",
            got: nodes,
            need,
        });
    }
    let total = nodes.pow(d as u32);
    let step = std::f64::consts::TAU / nodes as f64;
    let spectrum = pg.spectrum();
    let mut sum = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let theta = FiberPoint::new(idx.iter().map(|&j| j as f64 / nodes as f64).collect())?;
        let fourier: usize = idx
            .iter()
            .zip(nu)
            .map(|(&j, &v)| (v * j as i64).rem_euclid(nodes as i64) as usize)
            .sum();
        let phase = Complex64::from_polar(1.0, (fourier % nodes) as f64 * step);
        sum += phase * spectrum.fiber_propagator(&theta, t).get(p, q);
        for slot in idx.iter_mut() {
            *slot += 1;
            if *slot < nodes {
                break;
            }
            *slot = 0;
        }
    }
    Ok(sum / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_j;
    use crate::graph::{build_finite_graph, GraphSpec};
    use crate::kernel::lattice_factor_1d;

    fn graph(kind: &str, size: usize) -> FiniteGraph {
        build_finite_graph(&GraphSpec::new(kind, size)).unwrap()
    }

    #[test]
    fn box_indexing_is_a_bijection() {
        let b = LatticeBox::new(2, 3, 4);
        assert_eq!(b.size(), 49 * 4);
        for flat in 0..b.size() {
            let x = b.point(flat);
            assert_eq!(b.index(&x.n, x.p), Some(flat));
        }
        assert_eq!(b.index(&[4, 0], 0), None);
        assert_eq!(b.index(&[0, 0], 4), None);
    }

    #[test]
    fn ladder_three_rungs() {
        let h = assemble_truncated(&graph("path", 2), 1, 1).unwrap();
        assert_eq!(h.size(), 6);
        assert_eq!(h.edges().len(), 7);
    }

    #[test]
    fn single_layer_is_the_crystal() {
        let g = build_finite_graph(&GraphSpec::new("star", 3).with_potential(vec![0.1, 0.0, -2.0, 3.0])).unwrap();
        let h = assemble_truncated(&g, 1, 0).unwrap();
        assert_eq!(h.to_dense(), g.hamiltonian_matrix());
    }

    #[test]
    fn grid_three_by_three() {
        let h = assemble_truncated(&FiniteGraph::single_vertex(0.0), 2, 1).unwrap();
        assert_eq!(h.size(), 9);
        assert_eq!(h.edges().len(), 12);
    }

    #[test]
    fn truncated_invariants() {
        let g = build_finite_graph(&GraphSpec::new("cycle", 3).with_potential(vec![0.7, -0.3, 1.1])).unwrap();
        let h = assemble_truncated(&g, 2, 3).unwrap();
        let dense = h.to_dense();
        assert_eq!(dense, dense.transpose());
        for i in 0..h.size() {
            assert!(h.degree(i) <= 2 * 2 + g.max_degree());
        }
        assert!((h.spectral_bound() - (4.0 + 2.0 + 1.1)).abs() < 1e-15);
        let rho = nalgebra::SymmetricEigen::new(dense)
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(rho <= h.spectral_bound());
    }

    #[test]
    fn box_cap_is_enforced() {
        let err = assemble_truncated_capped(&graph("path", 2), 3, 50, 10_000).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn evolution_at_zero_is_the_source() {
        let h = assemble_truncated(&graph("path", 2), 1, 3).unwrap();
        for name in ["chebyshev", "dense"] {
            let psi = EvolverRegistry::default().get(name).unwrap().evolve(&h, 5, 0.0).unwrap();
            for (i, z) in psi.iter().enumerate() {
                let want = if i == 5 { 1.0 } else { 0.0 };
                assert!((z - want).norm() < 1e-14, "{name}");
            }
        }
    }

    #[test]
    fn free_lattice_column_is_bessel() {
        let t = 3.0;
        let h = assemble_truncated(&FiniteGraph::single_vertex(0.0), 1, 40).unwrap();
        let lattice = *h.lattice();
        let source = lattice.index(&[0], 0).unwrap();
        let psi = Chebyshev.evolve(&h, source, t).unwrap();
        for nu in -15i64..=15 {
            let want = lattice_factor_1d(nu, t);
            let got = psi[lattice.index(&[nu], 0).unwrap()];
            assert!((got - want).norm() < 1e-12, "nu = {nu}");
            assert!((got.norm() - bessel_j(nu, 2.0 * t).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn chebyshev_and_dense_agree() {
        let g = build_finite_graph(&GraphSpec::new("cycle", 3).with_potential(vec![0.7, -0.3, 1.1])).unwrap();
        let h = assemble_truncated(&g, 1, 12).unwrap();
        for t in [0.7, -2.2, 4.0] {
            let a = Chebyshev.evolve(&h, 37, t).unwrap();
            let b = DenseSpectral.evolve(&h, 37, t).unwrap();
            let gap = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(gap < 1e-11, "t = {t}: {gap:e}");
        }
    }

    #[test]
    fn unknown_evolver() {
        assert!(matches!(
            EvolverRegistry::default().get("rk4"),
            Err(Error::UnknownEvolver(_))
        ));
    }

    #[test]
    fn dense_rejects_large_boxes() {
        let h = assemble_truncated(&FiniteGraph::single_vertex(0.0), 2, 30).unwrap();
        assert!(DenseSpectral.evolve(&h, 0, 1.0).is_err());
    }

    #[test]
    fn fiber_quadrature_trivial_and_rejects_coarse_grid() {
        let pg = ProductGraph::new(graph("path", 2), 1).unwrap();
        let z = kernel_via_fiber_quadrature(&pg, &[0], 1, 1, 0.0, 16).unwrap();
        assert!((z - 1.0).norm() < 1e-15);
        assert!(matches!(
            kernel_via_fiber_quadrature(&pg, &[3], 0, 0, 2.0, 29),
            Err(Error::InsufficientResolution { need: 30, .. })
        ));
    }
}
