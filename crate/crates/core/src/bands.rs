//! Momentum-space diagnostics: band structures, gaps, rotation eigenvalues,
//! symmetry-indicator invariants and Wilson-loop polarization.
//!
//! The Bloch Hamiltonian separates as `H = Hx ⊗ 1 + 1 ⊗ Hy`, so its bands
//! are `±|hx| ± |hy|`. The two middle bands touch wherever `|hx| = |hy|`,
//! which in the C4 model is the whole diagonal `kx = ±ky`. The only gap that
//! stays open throughout a gapped phase is the one above the lowest band,
//! so one band is counted as occupied throughout this module.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Matrix4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    bloch_hamiltonian, Axis, BlochVector, BulkModel, SymmetryClass, CHIRAL_SIGNS,
};
use crate::linalg::{c, degenerate_groups, eigh, unitary_part, CMatrix, C64};

/// Bands below the gap used for all invariants.
pub const OCCUPIED_BANDS: usize = 1;
/// Gaps below this are treated as a phase transition.
pub const GAPLESS_TOLERANCE: f64 = 1e-8;
/// Default k-grid per axis for gap scans.
pub const GAP_GRID: usize = 201;
/// Default Wilson-loop grid.
pub const WILSON_GRID: usize = 101;
pub const MIN_WILSON_GRID: usize = 21;
const DEGENERACY_TOLERANCE: f64 = 1e-8;
const WILSON_CONVERGENCE: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Hsp {
    Gamma,
    X,
    Y,
    M,
}

impl Hsp {
    pub fn k(self) -> BlochVector {
        match self {
            Hsp::Gamma => BlochVector::new(0.0, 0.0),
            Hsp::X => BlochVector::new(PI, 0.0),
            Hsp::Y => BlochVector::new(0.0, PI),
            Hsp::M => BlochVector::new(PI, PI),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Hsp::Gamma => "G",
            Hsp::X => "X",
            Hsp::Y => "Y",
            Hsp::M => "M",
        }
    }
}

fn hsp_coords(h: Hsp) -> (f64, f64) {
    match h {
        Hsp::Gamma => (0.0, 0.0),
        Hsp::X => (PI, 0.0),
        Hsp::Y => (0.0, PI),
        Hsp::M => (PI, PI),
    }
}

/// Piecewise-linear path through high-symmetry points.
#[derive(Clone, Debug, PartialEq)]
pub struct KPath {
    pub nodes: Vec<Hsp>,
    /// Cumulative path length at each point.
    pub distance: Vec<f64>,
    pub points: Vec<BlochVector>,
}

impl KPath {
    pub fn through(nodes: &[Hsp], points_per_segment: usize) -> Self {
        assert!(nodes.len() >= 2 && points_per_segment >= 1);
        let mut distance = Vec::new();
        let mut points = Vec::new();
        let mut s0 = 0.0;
        for (seg, pair) in nodes.windows(2).enumerate() {
            let (ax, ay) = hsp_coords(pair[0]);
            let (bx, by) = hsp_coords(pair[1]);
            let len = ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt();
            // include the segment start only for the first segment
            let first = if seg == 0 { 0 } else { 1 };
            for i in first..=points_per_segment {
                let f = i as f64 / points_per_segment as f64;
                points.push(BlochVector::new(ax + f * (bx - ax), ay + f * (by - ay)));
                distance.push(s0 + f * len);
            }
            s0 += len;
        }
        Self {
            nodes: nodes.to_vec(),
            distance,
            points,
        }
    }

    /// Γ–X–M–Γ.
    pub fn standard(points_per_segment: usize) -> Self {
        Self::through(&[Hsp::Gamma, Hsp::X, Hsp::M, Hsp::Gamma], points_per_segment)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct BandStructure {
    pub k_points: Vec<BlochVector>,
    /// Ascending energies per k.
    pub energies: Vec<[f64; 4]>,
    /// Eigenvectors as columns, matching `energies`.
    pub eigenvectors: Vec<Matrix4<C64>>,
}

pub fn bloch_matrix(model: &BulkModel, k: BlochVector) -> CMatrix {
    let m = bloch_hamiltonian(model, k).matrix;
    CMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

fn bloch_eigen(model: &BulkModel, k: BlochVector) -> ([f64; 4], CMatrix) {
    let (e, v) = eigh(&bloch_matrix(model, k));
    ([e[0], e[1], e[2], e[3]], v)
}

pub fn band_structure(model: &BulkModel, k_points: &[BlochVector]) -> BandStructure {
    let solved: Vec<_> = k_points
        .par_iter()
        .map(|&k| bloch_eigen(model, k))
        .collect();
    let mut energies = Vec::with_capacity(solved.len());
    let mut eigenvectors = Vec::with_capacity(solved.len());
    for (e, v) in solved {
        energies.push(e);
        eigenvectors.push(Matrix4::from_fn(|i, j| v[(i, j)]));
    }
    BandStructure {
        k_points: k_points.to_vec(),
        energies,
        eigenvectors,
    }
}

/// Uniform `n × n` grid including both zone edges, `k = -π + 2π i / (n - 1)`.
pub fn closed_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| -PI + 2.0 * PI * i as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandGap {
    /// Minimum over the grid of `E_{occ+1} - E_occ`.
    pub gap_size: f64,
    /// Full spectral width `max E_4 - min E_1`.
    pub energy_range: f64,
    pub gap_ratio: f64,
    /// Where the minimum was found.
    pub k_min: (f64, f64),
}

/// Gap above the occupied band, minimized over a `grid × grid` mesh.
pub fn band_gap(model: &BulkModel, grid: usize) -> BandGap {
    band_gap_above(model, OCCUPIED_BANDS, grid)
}

/// Gap between band `lower` and band `lower + 1` (1-based counting).
pub fn band_gap_above(model: &BulkModel, lower: usize, grid: usize) -> BandGap {
    assert!((1..4).contains(&lower));
    let ks = closed_grid(grid);
    // one row per ky; rows are merged in order so the result is deterministic
    let rows: Vec<(f64, (f64, f64), f64, f64)> = ks
        .par_iter()
        .map(|&ky| {
            let mut best = (f64::INFINITY, (0.0, 0.0), f64::INFINITY, f64::NEG_INFINITY);
            for &kx in &ks {
                let (e, _) = bloch_eigen(model, BlochVector::new(kx, ky));
                let g = e[lower] - e[lower - 1];
                if g < best.0 {
                    best.0 = g;
                    best.1 = (kx, ky);
                }
                best.2 = best.2.min(e[0]);
                best.3 = best.3.max(e[3]);
            }
            best
        })
        .collect();
    let mut gap = f64::INFINITY;
    let mut k_min = (0.0, 0.0);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (g, k, l, h) in rows {
        if g < gap {
            gap = g;
            k_min = k;
        }
        lo = lo.min(l);
        hi = hi.max(h);
    }
    let gap = gap.max(0.0);
    let range = hi - lo;
    BandGap {
        gap_size: gap,
        energy_range: range,
        gap_ratio: if range > 0.0 { gap / range } else { 0.0 },
        k_min,
    }
}

/// Point-group generator used for the symmetry indicators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rotation {
    C2,
    C4,
}

impl Rotation {
    pub fn order(self) -> usize {
        match self {
            Rotation::C2 => 2,
            Rotation::C4 => 4,
        }
    }

    /// Representation on the four sublattices.
    ///
    /// A quarter turn about the cell centre maps sites 1→3→4→2→1 and keeps
    /// every site in its own cell, so the matrix is a plain permutation
    /// satisfying `R H(kx, ky) R^T = H(-ky, kx)`.
    pub fn matrix(self) -> CMatrix {
        let mut p = CMatrix::zeros(4, 4);
        for (from, to) in [(0, 2), (1, 0), (2, 3), (3, 1)] {
            p[(to, from)] = c(1.0, 0.0);
        }
        match self {
            Rotation::C4 => p,
            Rotation::C2 => &p * &p,
        }
    }
}

/// `Π_p = exp(2πi (p - 1) / n)`.
pub fn rotation_eigenvalue(order: usize, p: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI * (p - 1) as f64 / order as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationEigendata {
    pub hsp: Hsp,
    pub rotation: Rotation,
    pub occupied_band_count: usize,
    /// `counts[p - 1]` occupied states with eigenvalue `Π_p`.
    pub counts: Vec<usize>,
}

impl RotationEigendata {
    pub fn count(&self, p: usize) -> usize {
        self.counts[p - 1]
    }
}

pub fn rotation_eigenvalues_at_hsp(
    model: &BulkModel,
    hsp: Hsp,
    rotation: Rotation,
    occupied_band_count: usize,
) -> Result<RotationEigendata> {
    assert!((1..=4).contains(&occupied_band_count));
    let h = bloch_matrix(model, hsp.k());
    let r = rotation.matrix();
    let comm = (&r * &h - &h * &r).norm();
    if comm > 1e-8 {
        return Err(Error::SymmetryMismatch(format!(
            "H at {} does not commute with {:?} (|[R,H]| = {comm:e})",
            hsp.label(),
            rotation
        )));
    }

    let (e, v) = eigh(&h);
    let n = rotation.order();
    // character projectors P_p = (1/n) Σ_m conj(Π_p)^m R^m
    let mut powers = vec![CMatrix::identity(4, 4)];
    for m in 1..n {
        powers.push(&powers[m - 1] * &r);
    }
    let projectors: Vec<CMatrix> = (1..=n)
        .map(|p| {
            let pi = rotation_eigenvalue(n, p).conj();
            let mut acc = CMatrix::zeros(4, 4);
            for (m, rm) in powers.iter().enumerate() {
                acc += rm * pi.powu(m as u32);
            }
            acc / c(n as f64, 0.0)
        })
        .collect();

    let mut weights = vec![0.0; n];
    for group in degenerate_groups(&e, DEGENERACY_TOLERANCE) {
        if group.start >= occupied_band_count {
            break;
        }
        if group.end > occupied_band_count {
            return Err(Error::Gapless {
                gap: e[occupied_band_count] - e[occupied_band_count - 1],
                tolerance: DEGENERACY_TOLERANCE,
                context: format!("degenerate bands straddle the filling at {}", hsp.label()),
            });
        }
        let block = v.columns(group.start, group.len());
        for (p, proj) in projectors.iter().enumerate() {
            weights[p] += (block.adjoint() * proj * block).trace().re;
        }
    }

    let mut counts = Vec::with_capacity(n);
    for w in weights {
        let rounded = w.round();
        if (w - rounded).abs() > 1e-8 || rounded < 0.0 {
            return Err(Error::SymmetryMismatch(format!(
                "non-integer rotation multiplicity {w} at {}",
                hsp.label()
            )));
        }
        counts.push(rounded as usize);
    }
    Ok(RotationEigendata {
        hsp,
        rotation,
        occupied_band_count,
        counts,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseLabel {
    Trivial,
    /// Polarized along one axis only.
    Polarized,
    Soti,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub symmetry: SymmetryClass,
    pub occupied_band_count: usize,
    pub rotation_data: Vec<RotationEigendata>,
    /// Keys `X1`, `M1`, `M2` (C4) or `X1`, `Y1`, `M1` (C2).
    pub indices: BTreeMap<String, i64>,
    /// `(P_x, P_y)`, each 0 or 1/2.
    pub polarization: (f64, f64),
    /// `Q_c` in {0, 1/4, 1/2, 3/4}.
    pub corner_index: f64,
    pub phase_label: PhaseLabel,
    pub gap: BandGap,
}

impl InvariantReport {
    pub fn index(&self, key: &str) -> i64 {
        self.indices[key]
    }
}

fn diff(a: &RotationEigendata, b: &RotationEigendata, p: usize) -> i64 {
    a.count(p) as i64 - b.count(p) as i64
}

pub fn topological_indices(model: &BulkModel) -> Result<InvariantReport> {
    let symmetry = model.symmetry_class();
    if symmetry == SymmetryClass::C1 {
        return Err(Error::Unsupported(
            "symmetry indicators need a C2- or C4-symmetric model".into(),
        ));
    }
    let gap = band_gap(model, GAP_GRID);
    if gap.gap_size < GAPLESS_TOLERANCE {
        return Err(Error::Gapless {
            gap: gap.gap_size,
            tolerance: GAPLESS_TOLERANCE,
            context: "topological indices requested at a phase transition".into(),
        });
    }

    let occ = OCCUPIED_BANDS;
    let at = |h, r| rotation_eigenvalues_at_hsp(model, h, r, occ);
    let mut indices = BTreeMap::new();
    let (rotation_data, corner_quarters, px_halves, py_halves);
    match symmetry {
        SymmetryClass::C4 => {
            let g2 = at(Hsp::Gamma, Rotation::C2)?;
            let x2 = at(Hsp::X, Rotation::C2)?;
            let g4 = at(Hsp::Gamma, Rotation::C4)?;
            let m4 = at(Hsp::M, Rotation::C4)?;
            let x1 = diff(&x2, &g2, 1);
            let m1 = diff(&m4, &g4, 1);
            let m2 = diff(&m4, &g4, 2);
            indices.insert("X1".to_string(), x1);
            indices.insert("M1".to_string(), m1);
            indices.insert("M2".to_string(), m2);
            corner_quarters = (x1 + 2 * m1 + 3 * m2).rem_euclid(4);
            px_halves = x1.rem_euclid(2);
            py_halves = px_halves;
            rotation_data = vec![g2, x2, g4, m4];
        }
        _ => {
            let g = at(Hsp::Gamma, Rotation::C2)?;
            let x = at(Hsp::X, Rotation::C2)?;
            let y = at(Hsp::Y, Rotation::C2)?;
            let m = at(Hsp::M, Rotation::C2)?;
            let x1 = diff(&x, &g, 1);
            let y1 = diff(&y, &g, 1);
            let m1 = diff(&m, &g, 1);
            indices.insert("X1".to_string(), x1);
            indices.insert("Y1".to_string(), y1);
            indices.insert("M1".to_string(), m1);
            corner_quarters = (-x1 - y1 + m1).rem_euclid(4);
            px_halves = (-(y1 + m1)).rem_euclid(2);
            py_halves = (-(x1 + m1)).rem_euclid(2);
            rotation_data = vec![g, x, y, m];
        }
    }

    let phase_label = match (px_halves, py_halves) {
        (1, 1) => PhaseLabel::Soti,
        (0, 0) => PhaseLabel::Trivial,
        _ => PhaseLabel::Polarized,
    };
    Ok(InvariantReport {
        symmetry,
        occupied_band_count: occ,
        rotation_data,
        indices,
        polarization: (px_halves as f64 / 2.0, py_halves as f64 / 2.0),
        corner_index: corner_quarters as f64 / 4.0,
        phase_label,
        gap,
    })
}

/// Rotation-eigenvalue label `p` of the lowest band at `hsp`.
pub fn lowest_band_character(model: &BulkModel, hsp: Hsp, rotation: Rotation) -> Result<usize> {
    let data = rotation_eigenvalues_at_hsp(model, hsp, rotation, 1)?;
    Ok(data.counts.iter().position(|&n| n == 1).expect("one band") + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WilsonLoopData {
    pub direction: Axis,
    pub grid_size: usize,
    /// Transverse momenta at which the loops were taken.
    pub transverse_k: Vec<f64>,
    /// Polarization `-arg det W / 2π` per transverse momentum, in [-1/2, 1/2).
    pub berry_phase_per_transverse_k: Vec<f64>,
    /// Average polarization, in [-1/2, 1/2).
    pub polarization: f64,
}

/// Reduce to the branch [-1/2, 1/2).
pub fn canonical_branch(p: f64) -> f64 {
    let r = p - (p + 0.5).floor();
    if r >= 0.5 {
        r - 1.0
    } else {
        r
    }
}

/// Distance between two polarizations on the circle R/Z.
pub fn mod1_distance(a: f64, b: f64) -> f64 {
    canonical_branch(a - b).abs()
}

fn occupied_frame(model: &BulkModel, k: BlochVector, occ: usize) -> CMatrix {
    let (_, v) = bloch_eigen(model, k);
    v.columns(0, occ).into_owned()
}

/// Berry phase `-arg det Π F_j` of a closed loop of frames; the loop closes
/// back onto `frames[0]`.
fn loop_polarization(frames: &[CMatrix]) -> f64 {
    let n = frames.len();
    let occ = frames[0].ncols();
    let mut w = CMatrix::identity(occ, occ);
    for j in 0..n {
        let next = &frames[(j + 1) % n];
        let link = unitary_part(&(frames[j].adjoint() * next));
        w *= link;
    }
    let det = w.determinant();
    canonical_branch(-det.arg() / (2.0 * PI))
}

fn circular_mean(values: &[f64]) -> f64 {
    let anchor = values[0];
    let mean = values
        .iter()
        .map(|&v| anchor + canonical_branch(v - anchor))
        .sum::<f64>()
        / values.len() as f64;
    canonical_branch(mean)
}

fn wilson_at_grid(model: &BulkModel, direction: Axis, grid: usize) -> (Vec<f64>, Vec<f64>) {
    let step = 2.0 * PI / grid as f64;
    let transverse: Vec<f64> = (0..grid).map(|j| -PI + step * j as f64).collect();
    let phases: Vec<f64> = transverse
        .par_iter()
        .map(|&kt| {
            let frames: Vec<CMatrix> = (0..grid)
                .map(|i| {
                    let kl = -PI + step * i as f64;
                    let k = match direction {
                        Axis::X => BlochVector::new(kl, kt),
                        Axis::Y => BlochVector::new(kt, kl),
                    };
                    occupied_frame(model, k, OCCUPIED_BANDS)
                })
                .collect();
            loop_polarization(&frames)
        })
        .collect();
    (transverse, phases)
}

/// Polarization along `direction` from a discretized Wilson loop over the
/// occupied band, averaged over the transverse momentum.
///
/// The result is compared against a half-resolution grid; a difference
/// above 1e-3 is reported as [`Error::NonConvergence`].
pub fn wilson_loop_polarization(
    model: &BulkModel,
    direction: Axis,
    grid_size: usize,
) -> Result<WilsonLoopData> {
    if grid_size < MIN_WILSON_GRID {
        return Err(Error::InvalidSpec(format!(
            "Wilson grid must be at least {MIN_WILSON_GRID}, got {grid_size}"
        )));
    }
    let gap = band_gap(model, GAP_GRID);
    if gap.gap_size < GAPLESS_TOLERANCE {
        return Err(Error::Gapless {
            gap: gap.gap_size,
            tolerance: GAPLESS_TOLERANCE,
            context: "Wilson loop across a closed gap".into(),
        });
    }
    let (transverse, phases) = wilson_at_grid(model, direction, grid_size);
    let polarization = circular_mean(&phases);

    let (_, coarse) = wilson_at_grid(model, direction, (grid_size / 2).max(MIN_WILSON_GRID / 2));
    let delta = mod1_distance(polarization, circular_mean(&coarse));
    if delta > WILSON_CONVERGENCE {
        return Err(Error::NonConvergence { delta });
    }
    Ok(WilsonLoopData {
        direction,
        grid_size,
        transverse_k: transverse,
        berry_phase_per_transverse_k: phases,
        polarization,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiralCheck {
    pub symmetric: bool,
    pub max_violation: f64,
}

/// Check `Γ (H(k) - β) Γ = -(H(k) - β)` on a `samples × samples` k-grid.
pub fn chiral_symmetry_check(model: &BulkModel, samples: usize) -> ChiralCheck {
    let ks = closed_grid(samples.max(2));
    let mut worst = 0.0_f64;
    for &ky in &ks {
        for &kx in &ks {
            let h = bloch_matrix(model, BlochVector::new(kx, ky));
            for i in 0..4 {
                for j in 0..4 {
                    let mut hij = h[(i, j)];
                    if i == j {
                        hij -= model.onsite;
                    }
                    let s = CHIRAL_SIGNS[i] * CHIRAL_SIGNS[j];
                    worst = worst.max((hij * s + hij).norm());
                }
            }
        }
    }
    ChiralCheck {
        symmetric: worst < 1e-10,
        max_violation: worst,
    }
}
