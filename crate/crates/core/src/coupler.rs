//! The 1×4 star coupler that splits one photon equally over four outputs.
//!
//! With `|B> = (e1 + e2 + e3 + e4) / 2`, the Hamiltonian `H = c Σ_j (|0><j| + h.c.)`
//! acts as `2c σ_x` on `span{e0, B}` and vanishes on the three dark states,
//! so `U = e^{-iHL}` has the closed form
//!
//! ```text
//! U_00 = cos 2cL,  U_0j = U_j0 = -(i/2) sin 2cL,  U_jk = δ_jk - 1/4 + cos(2cL) / 4.
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::PhotonState;
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, C64};

pub const PORTS: usize = 5;
const UNIFORM_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplerSpec {
    /// Entry-to-output coupling `c`, 1/mm.
    pub coupling_strength: f64,
    /// Interaction length `L`, mm.
    pub length: f64,
}

impl CouplerSpec {
    pub fn new(coupling_strength: f64, length: f64) -> Result<Self> {
        let spec = Self {
            coupling_strength,
            length,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Length `π / (4c)` giving an even four-way split.
    pub fn canonical(coupling_strength: f64) -> Result<Self> {
        if !(coupling_strength > 0.0) {
            return Err(Error::InvalidSpec("canonical length needs c > 0".into()));
        }
        Self::new(coupling_strength, PI / (4.0 * coupling_strength))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.coupling_strength >= 0.0 && self.coupling_strength.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "coupler strength must be non-negative, got {}",
                self.coupling_strength
            )));
        }
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(Error::InvalidSpec(format!(
                "coupler length must be non-negative, got {}",
                self.length
            )));
        }
        Ok(())
    }

    pub fn is_canonical(&self) -> bool {
        self.coupling_strength > 0.0
            && (self.length * 4.0 * self.coupling_strength - PI).abs() < 1e-12 * PI
    }
}

pub fn coupler_hamiltonian(spec: &CouplerSpec) -> CMatrix {
    let mut h = CMatrix::zeros(PORTS, PORTS);
    for j in 1..PORTS {
        h[(0, j)] = c(spec.coupling_strength, 0.0);
        h[(j, 0)] = c(spec.coupling_strength, 0.0);
    }
    h
}

pub fn coupler_unitary(spec: &CouplerSpec) -> CMatrix {
    let theta = 2.0 * spec.coupling_strength * spec.length;
    let (s, co) = theta.sin_cos();
    CMatrix::from_fn(PORTS, PORTS, |i, j| match (i, j) {
        (0, 0) => c(co, 0.0),
        (0, _) | (_, 0) => c(0.0, -0.5 * s),
        _ if i == j => c(0.75 + 0.25 * co, 0.0),
        _ => c(-0.25 + 0.25 * co, 0.0),
    })
}

/// Output of the coupler handed to the lattice corners.
#[derive(Clone, Debug, PartialEq)]
pub struct Superposition {
    /// Coupler output for a photon launched into the entry port.
    pub port_amplitudes: CVector,
    /// Probability that reaches the four outputs.
    pub transmitted: f64,
    /// Entry port empty and all four outputs equal.
    pub uniform: bool,
    /// Lattice state: outputs placed on the corner sites, common phase
    /// removed, renormalized to the transmitted part.
    pub state: PhotonState,
}

pub fn prepare_superposition(
    spec: &CouplerSpec,
    lattice_sites: usize,
    corner_sites: &[usize],
) -> Result<Superposition> {
    spec.validate()?;
    if corner_sites.len() != PORTS - 1 {
        return Err(Error::InvalidState(format!(
            "the coupler feeds 4 sites, got {}",
            corner_sites.len()
        )));
    }
    for (i, &s) in corner_sites.iter().enumerate() {
        if s >= lattice_sites || corner_sites[..i].contains(&s) {
            return Err(Error::InvalidState(format!("invalid or repeated corner site {s}")));
        }
    }

    let u = coupler_unitary(spec);
    let out: CVector = u.column(0).into_owned();
    let transmitted: f64 = out.iter().skip(1).map(|a| a.norm_sqr()).sum();
    if transmitted < 1e-24 {
        return Err(Error::InvalidState("no light reaches the coupler outputs".into()));
    }
    let uniform = out[0].norm() < UNIFORM_TOLERANCE
        && out
            .iter()
            .skip(1)
            .all(|a| (a - out[1]).norm() < UNIFORM_TOLERANCE);

    let phase = out[1] / out[1].norm();
    let mut amplitudes = CVector::zeros(lattice_sites);
    for (port, &site) in corner_sites.iter().enumerate() {
        amplitudes[site] = out[port + 1] / phase / c(transmitted.sqrt(), 0.0);
    }
    Ok(Superposition {
        port_amplitudes: out,
        transmitted,
        uniform,
        state: PhotonState::normalized(amplitudes)?,
    })
}

/// `|<a|b>|` of two normalized vectors; 1 when they agree up to a global phase.
pub fn ray_overlap(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).norm() / (a.norm() * b.norm())
}

/// Matrix printed in closed form at the canonical length, for reference output.
pub fn canonical_reference() -> CMatrix {
    let i2 = c(0.0, 2.0);
    let rows: [[C64; 5]; 5] = [
        [c(0.0, 0.0), i2, i2, i2, i2],
        [i2, c(-3.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        [i2, c(1.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)],
        [i2, c(1.0, 0.0), c(1.0, 0.0), c(-3.0, 0.0), c(1.0, 0.0)],
        [i2, c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(-3.0, 0.0)],
    ];
    CMatrix::from_fn(5, 5, |i, j| rows[i][j] * -0.25)
}
