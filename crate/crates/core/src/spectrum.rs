//! Finite open-boundary spectra: eigendecomposition with corner-resolved
//! degenerate subspaces, region weights, spatial distributions, spectral
//! flow in `t_a / t_b`, and the non-Hermitian protection check.

use log::warn;
use nalgebra::Schur;
use serde::{Deserialize, Serialize};

use crate::bands::{band_gap, topological_indices, PhaseLabel};
use crate::error::{Error, Result};
use crate::lattice::{
    finite_hamiltonian, BulkModel, Couplings, FiniteHamiltonian, LatticeSpec, Region, SiteGrid,
    SymmetryClass,
};
use crate::linalg::{c, degenerate_groups, eigh, fix_phase, CMatrix, CVector, C64};

/// Relative tolerance (times the spectral range) for grouping degeneracies.
pub const DEGENERACY_RELATIVE_TOLERANCE: f64 = 1e-9;
/// Relative half-width of the default zero-energy window.
pub const ZERO_WINDOW_RELATIVE: f64 = 1e-6;
pub const DEFAULT_CORNER_THRESHOLD: f64 = 0.5;
pub const DEFAULT_EDGE_THRESHOLD: f64 = 0.5;
const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Probability of a state on the corner, edge and bulk site sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionWeights {
    pub corner: f64,
    pub edge: f64,
    pub bulk: f64,
}

impl RegionWeights {
    pub fn of(grid: &SiteGrid, state: impl Iterator<Item = C64>) -> Self {
        let mut w = [0.0; 3];
        for (i, a) in state.enumerate() {
            let slot = match grid.region(i) {
                Region::Corner => 0,
                Region::Edge => 1,
                Region::Bulk => 2,
            };
            w[slot] += a.norm_sqr();
        }
        let total: f64 = w.iter().sum();
        Self {
            corner: w[0] / total,
            edge: w[1] / total,
            bulk: w[2] / total,
        }
    }

    pub fn get(&self, region: Region) -> f64 {
        match region {
            Region::Corner => self.corner,
            Region::Edge => self.edge,
            Region::Bulk => self.bulk,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenSolution {
    pub grid: SiteGrid,
    /// Ascending.
    pub energies: Vec<f64>,
    /// Orthonormal eigenvectors as columns.
    pub states: CMatrix,
    pub weights: Vec<RegionWeights>,
    pub labels: Vec<Region>,
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn spectral_range(&self) -> f64 {
        match (self.energies.first(), self.energies.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    pub fn state(&self, j: usize) -> CVector {
        self.states.column(j).into_owned()
    }

    pub fn indices_labelled(&self, region: Region) -> Vec<usize> {
        (0..self.len()).filter(|&j| self.labels[j] == region).collect()
    }

    /// The `count` states with the largest corner weight, in ascending energy.
    pub fn most_corner_like(&self, count: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.weights[b].corner.total_cmp(&self.weights[a].corner));
        idx.truncate(count);
        idx.sort_unstable();
        idx
    }

    /// Degenerate groups at the default relative tolerance.
    pub fn degenerate_groups(&self) -> Vec<std::ops::Range<usize>> {
        degenerate_groups(
            &self.energies,
            DEGENERACY_RELATIVE_TOLERANCE * self.spectral_range(),
        )
    }
}

/// Dense Hermitian eigendecomposition of a finite lattice.
///
/// Inside every degenerate eigenspace the basis is rotated to diagonalize
/// the corner-site projector, ordered by descending corner weight. Corner
/// modes that are degenerate with bulk modes therefore come out as separate,
/// maximally localized eigenvectors.
pub fn eigendecompose(h: &FiniteHamiltonian) -> Result<EigenSolution> {
    let violation = h.hermitian_violation();
    if violation > 1e-12 {
        return Err(Error::NotHermitian(violation));
    }
    let (energies, mut states) = eigh(&h.matrix);
    let range = energies.last().unwrap_or(&0.0) - energies.first().unwrap_or(&0.0);
    let corners = h.grid.corners();

    for group in degenerate_groups(&energies, DEGENERACY_RELATIVE_TOLERANCE * range) {
        if group.len() < 2 {
            continue;
        }
        let block = states.columns(group.start, group.len()).into_owned();
        let mut corner_rows = CMatrix::zeros(corners.len(), group.len());
        for (r, &site) in corners.iter().enumerate() {
            corner_rows.set_row(r, &block.row(site));
        }
        let projected = corner_rows.adjoint() * &corner_rows;
        let (_, rot) = eigh(&projected);
        let rotated = &block * rot;
        // eigh is ascending; largest corner weight first
        for (offset, col) in (0..group.len()).rev().enumerate() {
            let v = fix_phase(rotated.column(col).into_owned());
            states.set_column(group.start + offset, &v);
        }
    }

    let mut worst = 0.0_f64;
    for (j, &e) in energies.iter().enumerate() {
        let v = states.column(j);
        worst = worst.max((&h.matrix * v - v * c(e, 0.0)).norm());
    }
    if worst > RESIDUAL_TOLERANCE * range.max(1.0) {
        return Err(Error::NonConvergence { delta: worst });
    }

    let weights: Vec<RegionWeights> = (0..energies.len())
        .map(|j| RegionWeights::of(&h.grid, states.column(j).iter().copied()))
        .collect();
    let solution = EigenSolution {
        grid: h.grid,
        energies,
        states,
        labels: vec![Region::Bulk; weights.len()],
        weights,
    };
    Ok(classify_states(
        solution,
        DEFAULT_CORNER_THRESHOLD,
        DEFAULT_EDGE_THRESHOLD,
    ))
}

/// Label each state corner, edge or bulk from its region weights.
pub fn classify_states(mut sol: EigenSolution, corner_threshold: f64, edge_threshold: f64) -> EigenSolution {
    sol.labels = sol
        .weights
        .iter()
        .map(|w| {
            if w.corner >= corner_threshold {
                Region::Corner
            } else if w.edge >= edge_threshold {
                Region::Edge
            } else {
                Region::Bulk
            }
        })
        .collect();
    sol
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialDistribution {
    pub energy_window: (f64, f64),
    pub grid: SiteGrid,
    pub state_count: usize,
    /// `Σ_m |φ_n^(m)|²` over states in the window, per site.
    pub site_density: Vec<f64>,
}

impl SpatialDistribution {
    pub fn total(&self) -> f64 {
        self.site_density.iter().sum()
    }
}

/// Site-resolved density of the eigenstates whose energy lies in `[lo, hi]`.
pub fn spatial_distribution(sol: &EigenSolution, window: (f64, f64)) -> SpatialDistribution {
    let (lo, hi) = window;
    let mut density = vec![0.0; sol.grid.len()];
    let mut count = 0;
    for (j, &e) in sol.energies.iter().enumerate() {
        if e < lo || e > hi {
            continue;
        }
        count += 1;
        for (d, a) in density.iter_mut().zip(sol.states.column(j).iter()) {
            *d += a.norm_sqr();
        }
    }
    if count == 0 {
        warn!("energy window [{lo}, {hi}] contains no eigenstates");
    }
    SpatialDistribution {
        energy_window: window,
        grid: sol.grid,
        state_count: count,
        site_density: density,
    }
}

/// Window of relative half-width [`ZERO_WINDOW_RELATIVE`] around `center`.
pub fn zero_energy_window(sol: &EigenSolution, center: f64) -> (f64, f64) {
    let half = ZERO_WINDOW_RELATIVE * sol.spectral_range();
    (center - half, center + half)
}

/// Density summed over all states carrying one label.
pub fn label_distribution(sol: &EigenSolution, label: Region) -> SpatialDistribution {
    let mut density = vec![0.0; sol.grid.len()];
    let idx = sol.indices_labelled(label);
    for &j in &idx {
        for (d, a) in density.iter_mut().zip(sol.states.column(j).iter()) {
            *d += a.norm_sqr();
        }
    }
    let (lo, hi) = idx.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &j| {
        (lo.min(sol.energies[j]), hi.max(sol.energies[j]))
    });
    SpatialDistribution {
        energy_window: (lo, hi),
        grid: sol.grid,
        state_count: idx.len(),
        site_density: density,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowPoint {
    pub ratio: f64,
    /// Energies of the four most corner-localized states.
    pub corner_energies: Vec<f64>,
    /// Mean corner weight of those four states.
    pub corner_weight: f64,
    pub corner_count: usize,
    pub gap_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralFlow {
    pub points: Vec<FlowPoint>,
    /// First ratio at which the mean corner weight drops below 1/2.
    pub crossover_ratio: Option<f64>,
}

/// Sweep `t_a = ratio · t_b` on a C4 lattice of `cells × cells` unit cells.
/// Negative ratios are accepted here only.
pub fn spectral_flow(cells: usize, t_b: f64, ratios: &[f64]) -> Result<SpectralFlow> {
    if ratios.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSpec("ratio grid must be strictly increasing".into()));
    }
    let mut points = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let t = Couplings::isotropic(ratio * t_b, t_b);
        let sol = eigendecompose(&FiniteHamiltonian::from_couplings(cells, cells, &t, 0.0))?;
        let top = sol.most_corner_like(4);
        let corner_weight = top.iter().map(|&j| sol.weights[j].corner).sum::<f64>() / 4.0;
        points.push(FlowPoint {
            ratio,
            corner_energies: top.iter().map(|&j| sol.energies[j]).collect(),
            corner_weight,
            corner_count: sol.indices_labelled(Region::Corner).len(),
            gap_ratio: band_gap(&BulkModel::new(t), 101).gap_ratio,
        });
    }
    let crossover_ratio = points
        .iter()
        .find(|p| p.ratio >= 0.0 && p.corner_weight < 0.5)
        .map(|p| p.ratio);
    Ok(SpectralFlow {
        points,
        crossover_ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BicReport {
    pub gamma: f64,
    /// Complex eigenvalues, sorted by real part.
    pub energies: Vec<(f64, f64)>,
    /// Corner weight of each eigenvector.
    pub corner_weights: Vec<f64>,
    /// Indices of the four most corner-localized states.
    pub corner_states: Vec<usize>,
    pub max_corner_imag: f64,
    pub median_bulk_imag: f64,
}

/// Add `-iγ` on every non-corner site of a C4 SOTI lattice and compare the
/// imaginary parts of the corner-localized eigenvalues with the rest.
pub fn bic_non_hermitian_check(spec: &LatticeSpec, gamma: f64) -> Result<BicReport> {
    if !(gamma >= 0.0) {
        return Err(Error::InvalidSpec(format!("gamma must be non-negative, got {gamma}")));
    }
    let model = spec.bulk_model()?;
    if model.symmetry_class() != SymmetryClass::C4 {
        return Err(Error::SymmetryMismatch("the protection check needs a C4 lattice".into()));
    }
    if topological_indices(&model)?.phase_label != PhaseLabel::Soti {
        return Err(Error::Unsupported("the protection check needs the SOTI phase".into()));
    }

    let h = finite_hamiltonian(spec)?;
    let mut m = h.matrix.clone();
    for i in 0..h.len() {
        if h.grid.region(i) != Region::Corner {
            m[(i, i)] -= c(0.0, gamma);
        }
    }

    // machine-epsilon deflation can stall; 1e-14 is far below the physics
    let schur = Schur::try_new(m.clone(), 1e-14, 100_000)
        .ok_or(Error::NonConvergence { delta: f64::NAN })?;
    let (_, t) = schur.unpack();
    let mut eigenvalues: Vec<C64> = t.diagonal().iter().copied().collect();
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let scale = m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm())).max(1.0);
    let corner_weights: Vec<f64> = eigenvalues
        .iter()
        .map(|&lambda| {
            let v = inverse_iteration(&m, lambda, scale);
            let total: f64 = v.iter().map(|a| a.norm_sqr()).sum();
            h.grid.corners().iter().map(|&s| v[s].norm_sqr()).sum::<f64>() / total
        })
        .collect();

    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&a, &b| corner_weights[b].total_cmp(&corner_weights[a]));
    let mut corner_states = order[..4].to_vec();
    corner_states.sort_unstable();

    let max_corner_imag = corner_states
        .iter()
        .map(|&j| eigenvalues[j].im.abs())
        .fold(0.0, f64::max);
    let mut bulk: Vec<f64> = order[4..].iter().map(|&j| eigenvalues[j].im.abs()).collect();
    bulk.sort_by(f64::total_cmp);
    let median_bulk_imag = if bulk.is_empty() {
        0.0
    } else if bulk.len() % 2 == 1 {
        bulk[bulk.len() / 2]
    } else {
        0.5 * (bulk[bulk.len() / 2 - 1] + bulk[bulk.len() / 2])
    };

    Ok(BicReport {
        gamma,
        energies: eigenvalues.iter().map(|z| (z.re, z.im)).collect(),
        corner_weights,
        corner_states,
        max_corner_imag,
        median_bulk_imag,
    })
}

/// Right eigenvector for an eigenvalue estimate, by shifted inverse iteration.
fn inverse_iteration(m: &CMatrix, lambda: C64, scale: f64) -> CVector {
    let n = m.nrows();
    let shift = lambda + c(1e-10 * scale, 1e-10 * scale);
    let lu = (m - CMatrix::identity(n, n) * shift).lu();
    // fixed, non-symmetric start vector so the result is reproducible
    let mut v = CVector::from_fn(n, |i, _| c(1.0 + (i as f64 * 0.37).sin(), 0.0));
    v /= c(v.norm(), 0.0);
    for _ in 0..3 {
        if let Some(next) = lu.solve(&v) {
            v = &next / c(next.norm(), 0.0);
        }
    }
    v
}
