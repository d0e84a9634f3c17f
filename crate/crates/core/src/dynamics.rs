//! Single-photon propagation through a finite lattice.
//!
//! The propagation distance `z` plays the role of time: `ψ(z) = e^{-iHz} ψ(0)`
//! is synthesized exactly in the eigenbasis.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{FiniteHamiltonian, Region, SiteGrid};
use crate::linalg::{c, CVector, C64};
use crate::spectrum::{eigendecompose, EigenSolution};

/// Sample distances of the fabricated lattices, mm.
pub const DEFAULT_Z_GRID: [f64; 5] = [10.0, 15.0, 20.0, 25.0, 30.0];
const NORM_TOLERANCE: f64 = 1e-12;
const RATIO_FLOOR: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct PhotonState {
    amplitudes: CVector,
}

impl PhotonState {
    /// Wrap amplitudes that are already normalized.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("state norm is {norm}, expected 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Normalize arbitrary amplitudes; zero or non-finite input is rejected.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("amplitudes cannot be normalized".into()));
        }
        Ok(Self {
            amplitudes: amplitudes / c(norm, 0.0),
        })
    }

    pub fn basis(len: usize, site: usize) -> Self {
        let mut a = CVector::zeros(len);
        a[site] = c(1.0, 0.0);
        Self { amplitudes: a }
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn intensities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// How light is launched into the lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Injection {
    SingleSite(usize),
    /// Amplitude 1/2 with equal phase on each of the four corner sites.
    CornerSuperposition,
    /// `[re, im]` per site, normalized on construction.
    Custom(Vec<[f64; 2]>),
}

impl Injection {
    /// Sites carrying amplitude at `z = 0`.
    pub fn sites(&self, grid: &SiteGrid) -> Vec<usize> {
        match self {
            Injection::SingleSite(s) => vec![*s],
            Injection::CornerSuperposition => grid.corners().to_vec(),
            Injection::Custom(a) => (0..a.len())
                .filter(|&i| a[i][0] != 0.0 || a[i][1] != 0.0)
                .collect(),
        }
    }
}

pub fn make_injection(grid: &SiteGrid, kind: &Injection) -> Result<PhotonState> {
    let n = grid.len();
    match kind {
        Injection::SingleSite(site) => {
            if *site >= n {
                return Err(Error::InvalidState(format!("site {site} outside a {n}-site lattice")));
            }
            Ok(PhotonState::basis(n, *site))
        }
        Injection::CornerSuperposition => {
            let mut a = CVector::zeros(n);
            for s in grid.corners() {
                a[s] = c(0.5, 0.0);
            }
            PhotonState::new(a)
        }
        Injection::Custom(values) => {
            if values.len() != n {
                return Err(Error::InvalidState(format!(
                    "custom injection has {} amplitudes for {n} sites",
                    values.len()
                )));
            }
            PhotonState::normalized(CVector::from_iterator(
                n,
                values.iter().map(|v| c(v[0], v[1])),
            ))
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub distances: Vec<f64>,
    pub states: Vec<PhotonState>,
    pub intensities: Vec<Vec<f64>>,
}

/// Eigenbasis propagator of one lattice.
#[derive(Clone, Debug)]
pub struct Propagator {
    pub solution: EigenSolution,
}

impl Propagator {
    pub fn new(h: &FiniteHamiltonian) -> Result<Self> {
        Ok(Self {
            solution: eigendecompose(h)?,
        })
    }

    pub fn from_solution(solution: EigenSolution) -> Self {
        Self { solution }
    }

    pub fn grid(&self) -> SiteGrid {
        self.solution.grid
    }

    fn check(&self, psi: &PhotonState) -> Result<()> {
        if psi.len() != self.solution.len() {
            return Err(Error::InvalidState(format!(
                "state has {} sites, lattice has {}",
                psi.len(),
                self.solution.len()
            )));
        }
        Ok(())
    }

    /// Eigenbasis coefficients `c_j = <φ_j|ψ>`.
    pub fn coefficients(&self, psi: &PhotonState) -> Result<CVector> {
        self.check(psi)?;
        Ok(self.solution.states.adjoint() * &psi.amplitudes)
    }

    pub fn evolve(&self, psi0: &PhotonState, z: f64) -> Result<PhotonState> {
        let coeffs = self.coefficients(psi0)?;
        Ok(self.evolve_coefficients(&coeffs, z))
    }

    fn evolve_coefficients(&self, coeffs: &CVector, z: f64) -> PhotonState {
        let phased = CVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(&self.solution.energies)
                .map(|(cj, &e)| cj * C64::from_polar(1.0, -e * z)),
        );
        PhotonState {
            amplitudes: &self.solution.states * phased,
        }
    }

    pub fn evolve_many(&self, psi0: &PhotonState, distances: &[f64]) -> Result<EvolutionResult> {
        if distances.iter().any(|&z| !(z >= 0.0)) {
            return Err(Error::InvalidState("propagation distances must be non-negative".into()));
        }
        let coeffs = self.coefficients(psi0)?;
        let states: Vec<PhotonState> = distances
            .iter()
            .map(|&z| self.evolve_coefficients(&coeffs, z))
            .collect();
        Ok(EvolutionResult {
            distances: distances.to_vec(),
            intensities: states.iter().map(PhotonState::intensities).collect(),
            states,
        })
    }

    /// `<ψ|H|ψ>` evaluated in the eigenbasis.
    pub fn energy(&self, psi: &PhotonState) -> Result<f64> {
        let coeffs = self.coefficients(psi)?;
        Ok(coeffs
            .iter()
            .zip(&self.solution.energies)
            .map(|(cj, e)| cj.norm_sqr() * e)
            .sum())
    }

    pub fn mode_decomposition(&self, psi0: &PhotonState) -> Result<ModeDecomposition> {
        Ok(ModeDecomposition {
            coefficients: self.coefficients(psi0)?.iter().copied().collect(),
            energies: self.solution.energies.clone(),
            labels: self.solution.labels.clone(),
        })
    }

    /// `η(z) = c_j / c_k · e^{-i(E_j - E_k) z}`.
    pub fn amplitude_ratio_trace(
        &self,
        psi0: &PhotonState,
        j: usize,
        k: usize,
        distances: &[f64],
    ) -> Result<Vec<C64>> {
        let coeffs = self.coefficients(psi0)?;
        let n = coeffs.len();
        if j >= n || k >= n {
            return Err(Error::InvalidState(format!("mode index outside 0..{n}")));
        }
        if coeffs[k].norm() < RATIO_FLOOR {
            return Err(Error::UndefinedRatio(coeffs[k].norm()));
        }
        let ratio = coeffs[j] / coeffs[k];
        let de = self.solution.energies[j] - self.solution.energies[k];
        Ok(distances
            .iter()
            .map(|&z| ratio * C64::from_polar(1.0, -de * z))
            .collect())
    }
}

pub fn evolve(h: &FiniteHamiltonian, psi0: &PhotonState, z: f64) -> Result<PhotonState> {
    Propagator::new(h)?.evolve(psi0, z)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeDecomposition {
    pub coefficients: Vec<C64>,
    pub energies: Vec<f64>,
    pub labels: Vec<Region>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeProportions {
    pub corner: f64,
    pub edge: f64,
    pub bulk: f64,
}

impl ModeDecomposition {
    pub fn weights(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn total(&self) -> f64 {
        self.weights().iter().sum()
    }

    /// Excitation weight grouped by the label of each eigenmode.
    pub fn proportions(&self) -> ModeProportions {
        let mut p = ModeProportions {
            corner: 0.0,
            edge: 0.0,
            bulk: 0.0,
        };
        for (w, label) in self.weights().into_iter().zip(&self.labels) {
            match label {
                Region::Corner => p.corner += w,
                Region::Edge => p.edge += w,
                Region::Bulk => p.bulk += w,
            }
        }
        p
    }

    /// Most strongly excited mode and its weight.
    pub fn dominant(&self) -> (usize, f64) {
        self.weights()
            .into_iter()
            .enumerate()
            .fold((0, -1.0), |best, (j, w)| if w > best.1 { (j, w) } else { best })
    }
}

/// Generalized return probability: intensity within Chebyshev distance
/// `width` of any of `sites`, over the total, per distance.
pub fn return_probability(
    result: &EvolutionResult,
    grid: &SiteGrid,
    sites: &[usize],
    width: usize,
) -> Result<Vec<f64>> {
    if let Some(&bad) = sites.iter().find(|&&s| s >= grid.len()) {
        return Err(Error::InvalidState(format!("site {bad} outside the lattice")));
    }
    let window: Vec<usize> = (0..grid.len())
        .filter(|&i| sites.iter().any(|&s| grid.chebyshev_distance(i, s) <= width))
        .collect();
    Ok(result
        .intensities
        .iter()
        .map(|row| {
            let total: f64 = row.iter().sum();
            window.iter().map(|&i| row[i]).sum::<f64>() / total
        })
        .collect())
}

/// Corner intensities normalized within the four-corner subspace, in
/// [`SiteGrid::corners`] order.
pub fn corner_shares(grid: &SiteGrid, intensities: &[f64]) -> [f64; 4] {
    let c = grid.corners().map(|s| intensities[s]);
    let total: f64 = c.iter().sum();
    if total > 0.0 {
        c.map(|v| v / total)
    } else {
        [0.0; 4]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerSplit {
    pub z: f64,
    pub shares: [f64; 4],
    /// Raw intensity on the four corners at `z`.
    pub corner_intensity: [f64; 4],
    /// `max |share - 1/4|`.
    pub deviation: f64,
}

/// Distance among `distances` where the corner-subspace distribution is
/// closest to uniform.
pub fn most_uniform_corner_split(
    propagator: &Propagator,
    psi0: &PhotonState,
    distances: &[f64],
) -> Result<CornerSplit> {
    if distances.is_empty() {
        return Err(Error::InvalidState("empty distance grid".into()));
    }
    let grid = propagator.grid();
    let result = propagator.evolve_many(psi0, distances)?;
    let mut best: Option<CornerSplit> = None;
    for (&z, row) in distances.iter().zip(&result.intensities) {
        let shares = corner_shares(&grid, row);
        let deviation = shares.iter().map(|s| (s - 0.25).abs()).fold(0.0, f64::max);
        if best.is_none_or(|b| deviation < b.deviation) {
            best = Some(CornerSplit {
                z,
                shares,
                corner_intensity: grid.corners().map(|s| row[s]),
                deviation,
            });
        }
    }
    Ok(best.expect("non-empty grid"))
}
