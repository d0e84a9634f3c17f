//! Two-qubit entanglement metrics and a white-noise channel whose visibility
//! follows how well a lattice keeps the photon at its injection site.

use nalgebra::Matrix4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{make_injection, return_probability, Injection, Propagator};
use crate::error::{Error, Result};
use crate::lattice::{
    apply_disorder, finite_hamiltonian, CouplingLaw, DisorderSpec, FiniteHamiltonian,
    LatticeSpec, SiteGrid,
};
use crate::linalg::{c, eigh, CMatrix, C64};

pub type Matrix4c = Matrix4<C64>;

const HERMITIAN_TOLERANCE: f64 = 1e-12;
const TRACE_TOLERANCE: f64 = 1e-12;
const POSITIVITY_TOLERANCE: f64 = 1e-10;

/// Density matrix of two qubits in the basis |00>, |01>, |10>, |11>.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitState {
    rho: Matrix4c,
}

fn to_dynamic(m: &Matrix4c) -> CMatrix {
    CMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

impl TwoQubitState {
    pub fn new(rho: Matrix4c) -> Result<Self> {
        let herm = (rho - rho.adjoint()).iter().fold(0.0_f64, |a, z| a.max(z.norm()));
        if herm > HERMITIAN_TOLERANCE {
            return Err(Error::InvalidState(format!("density matrix not Hermitian ({herm:e})")));
        }
        let trace = rho.trace();
        if (trace - c(1.0, 0.0)).norm() > TRACE_TOLERANCE {
            return Err(Error::InvalidState(format!("density matrix trace is {trace}")));
        }
        let (e, _) = eigh(&to_dynamic(&rho));
        if e[0] < -POSITIVITY_TOLERANCE {
            return Err(Error::InvalidState(format!(
                "density matrix has negative eigenvalue {}",
                e[0]
            )));
        }
        Ok(Self { rho })
    }

    /// `|ψ><ψ|` for a normalized pure state.
    pub fn pure(psi: [C64; 4]) -> Result<Self> {
        let v = nalgebra::Vector4::from(psi);
        let norm = v.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = v / c(norm, 0.0);
        Self::new(v * v.adjoint())
    }

    /// `(|00> + |11>) / √2`.
    pub fn bell_phi_plus() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::pure([c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).expect("valid")
    }

    pub fn maximally_mixed() -> Self {
        Self {
            rho: Matrix4c::identity() * c(0.25, 0.0),
        }
    }

    /// `v |Φ+><Φ+| + (1 - v) I/4`.
    pub fn werner(v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidState(format!("visibility {v} outside [0, 1]")));
        }
        Ok(white_noise(&Self::bell_phi_plus(), v))
    }

    pub fn rho(&self) -> &Matrix4c {
        &self.rho
    }

    /// `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)^†`.
    pub fn apply_local(&self, u_a: &nalgebra::Matrix2<C64>, u_b: &nalgebra::Matrix2<C64>) -> Self {
        let u = u_a.kronecker(u_b);
        Self {
            rho: u * self.rho * u.adjoint(),
        }
    }
}

/// `ρ → v ρ + (1 - v) I/4`.
pub fn white_noise(state: &TwoQubitState, v: f64) -> TwoQubitState {
    TwoQubitState {
        rho: state.rho * c(v, 0.0) + Matrix4c::identity() * c((1.0 - v) / 4.0, 0.0),
    }
}

fn hermitian_sqrt(m: &CMatrix) -> CMatrix {
    let (e, v) = eigh(m);
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        e.len(),
        e.iter().map(|&x| c(x.max(0.0).sqrt(), 0.0)),
    ));
    &v * d * v.adjoint()
}

/// Wootters concurrence.
///
/// The eigenvalues of `ρ ρ̃` with `ρ̃ = (σy⊗σy) ρ* (σy⊗σy)` coincide with
/// those of the Hermitian `√ρ ρ̃ √ρ`, which is diagonalized instead.
pub fn concurrence(state: &TwoQubitState) -> f64 {
    let sy = nalgebra::Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0));
    let yy = sy.kronecker(&sy);
    let flipped = yy * state.rho.conjugate() * yy;
    let root = hermitian_sqrt(&to_dynamic(&state.rho));
    let r = &root * to_dynamic(&flipped) * &root;
    let r = (&r + r.adjoint()) * c(0.5, 0.0);
    let (e, _) = eigh(&r);
    let mut lambda: Vec<f64> = e.iter().map(|&x| x.max(0.0).sqrt()).collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    (lambda[0] - lambda[1] - lambda[2] - lambda[3]).max(0.0)
}

/// `Tr ρ²`.
pub fn purity(state: &TwoQubitState) -> f64 {
    (state.rho * state.rho).trace().re
}

/// Confinement-to-visibility map. Every variant is monotone with `v(1) = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VisibilityMap {
    /// `v = ξ`.
    Identity,
    /// `v = ξ^exponent`.
    Power(f64),
}

impl VisibilityMap {
    pub fn visibility(&self, xi: f64) -> f64 {
        let xi = xi.clamp(0.0, 1.0);
        match *self {
            VisibilityMap::Identity => xi,
            VisibilityMap::Power(p) => xi.powf(p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            VisibilityMap::Power(p) if !(p > 0.0 && p.is_finite()) => Err(Error::InvalidSpec(
                format!("visibility exponent must be positive, got {p}"),
            )),
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    WhiteNoiseAdmixture,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub kind: ChannelKind,
    pub visibility_map: VisibilityMap,
}

impl Default for ChannelModel {
    fn default() -> Self {
        Self {
            kind: ChannelKind::WhiteNoiseAdmixture,
            visibility_map: VisibilityMap::Identity,
        }
    }
}

impl ChannelModel {
    pub fn with_map(visibility_map: VisibilityMap) -> Self {
        Self {
            visibility_map,
            ..Self::default()
        }
    }

    pub fn apply(&self, state: &TwoQubitState, xi: f64) -> TwoQubitState {
        match self.kind {
            ChannelKind::WhiteNoiseAdmixture => {
                white_noise(state, self.visibility_map.visibility(xi))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelOutput {
    pub xi: f64,
    pub visibility: f64,
    pub state: TwoQubitState,
}

fn confinement(h: &FiniteHamiltonian, injection: &Injection, z: &[f64]) -> Result<Vec<f64>> {
    let p = Propagator::new(h)?;
    let psi = make_injection(&h.grid, injection)?;
    let result = p.evolve_many(&psi, z)?;
    return_probability(&result, &h.grid, &injection.sites(&h.grid), 0)
}

/// Send one photon of the pair through the lattice and degrade the
/// two-photon state according to the confinement `ξ(z)` at the input.
pub fn lattice_channel(
    input: &TwoQubitState,
    spec: &LatticeSpec,
    injection: &Injection,
    z: f64,
    model: &ChannelModel,
) -> Result<ChannelOutput> {
    model.visibility_map.validate()?;
    let h = finite_hamiltonian(spec)?;
    let xi = confinement(&h, injection, &[z])?[0];
    Ok(ChannelOutput {
        xi,
        visibility: model.visibility_map.visibility(xi),
        state: model.apply(input, xi),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Scenario {
    /// A clean lattice, or the ensemble mean over the spec's disorder.
    Lattice {
        name: String,
        spec: LatticeSpec,
        injection: Injection,
    },
    /// Gapless walk on a uniform `width × height` array, injected and
    /// measured at one site (the centre by default).
    UniformWalk {
        name: String,
        width: usize,
        height: usize,
        separation: f64,
        #[serde(default)]
        coupling_law: CouplingLaw,
        #[serde(default)]
        site: Option<usize>,
    },
}

/// Separation of the uniform comparison array, µm.
pub const UNIFORM_WALK_SEPARATION: f64 = 15.0;
pub const UNIFORM_WALK_SIZE: usize = 21;

impl Scenario {
    pub fn name(&self) -> &str {
        match self {
            Scenario::Lattice { name, .. } | Scenario::UniformWalk { name, .. } => name,
        }
    }

    /// Topological, disordered topological, trivial and uniform-walk cases.
    pub fn standard(seed: u64) -> Vec<Scenario> {
        let corner = Injection::SingleSite(0);
        vec![
            Scenario::Lattice {
                name: "topological".into(),
                spec: LatticeSpec::sample_c4(),
                injection: corner.clone(),
            },
            Scenario::Lattice {
                name: "topological_disordered".into(),
                spec: LatticeSpec::sample_c4().with_disorder(DisorderSpec {
                    level: 0.1,
                    seed,
                    realization_count: 50,
                }),
                injection: corner.clone(),
            },
            Scenario::Lattice {
                name: "trivial".into(),
                spec: LatticeSpec::sample_trivial(),
                injection: corner,
            },
            Scenario::UniformWalk {
                name: "uniform_walk".into(),
                width: UNIFORM_WALK_SIZE,
                height: UNIFORM_WALK_SIZE,
                separation: UNIFORM_WALK_SEPARATION,
                coupling_law: CouplingLaw::calibrated(),
                site: None,
            },
        ]
    }

    /// `ξ(z)` per realization (one row for clean systems).
    fn confinement(&self, z: &[f64]) -> Result<Vec<Vec<f64>>> {
        match self {
            Scenario::Lattice { spec, injection, .. } => match spec.disorder {
                Some(d) if d.level > 0.0 => (0..d.realization_count)
                    .into_par_iter()
                    .map(|i| {
                        let h = finite_hamiltonian(&apply_disorder(spec, i)?)?;
                        confinement(&h, injection, z)
                    })
                    .collect(),
                _ => Ok(vec![confinement(&finite_hamiltonian(spec)?, injection, z)?]),
            },
            Scenario::UniformWalk {
                width,
                height,
                separation,
                coupling_law,
                site,
                ..
            } => {
                coupling_law.validate()?;
                let grid = SiteGrid::new(*width, *height);
                let site = site.unwrap_or_else(|| grid.index(width / 2, height / 2));
                let h = FiniteHamiltonian::uniform(*width, *height, coupling_law.coupling(*separation), 0.0);
                Ok(vec![confinement(&h, &Injection::SingleSite(site), z)?])
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: String,
    pub z: f64,
    /// Ensemble means where the scenario is disordered.
    pub xi: f64,
    pub visibility: f64,
    pub concurrence: f64,
    pub purity: f64,
    pub realizations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub model: ChannelModel,
    pub rows: Vec<SweepRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub z: f64,
    /// `(scenario, concurrence, purity)` in the tested order.
    pub values: Vec<(String, f64, f64)>,
    /// Each entry strictly better than the next, comparing concurrence and
    /// then purity (concurrence saturates at 0 for strongly mixed states).
    pub holds: bool,
}

impl SweepReport {
    pub fn row(&self, scenario: &str, z: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && (r.z - z).abs() < 1e-12)
    }

    /// Check a strictly decreasing order of scenarios at distance `z`.
    pub fn ordering(&self, order: &[&str], z: f64) -> Result<OrderingCheck> {
        let mut values = Vec::with_capacity(order.len());
        for name in order {
            let row = self.row(name, z).ok_or_else(|| {
                Error::InvalidState(format!("no sweep row for {name} at z = {z}"))
            })?;
            values.push((row.scenario.clone(), row.concurrence, row.purity));
        }
        let holds = values.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            a.1 > b.1 || (a.1 == b.1 && a.2 > b.2)
        });
        Ok(OrderingCheck { z, values, holds })
    }
}

/// Bell pair with one photon routed through each scenario's lattice.
pub fn entanglement_sweep(
    scenarios: &[Scenario],
    z_grid: &[f64],
    model: &ChannelModel,
) -> Result<SweepReport> {
    model.visibility_map.validate()?;
    let bell = TwoQubitState::bell_phi_plus();
    let per_scenario: Vec<Vec<Vec<f64>>> = scenarios
        .par_iter()
        .map(|s| s.confinement(z_grid))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (scenario, xi) in scenarios.iter().zip(per_scenario) {
        let n = xi.len() as f64;
        for (iz, &z) in z_grid.iter().enumerate() {
            let (mut sx, mut sv, mut sc, mut sp) = (0.0, 0.0, 0.0, 0.0);
            for member in &xi {
                let out = model.apply(&bell, member[iz]);
                sx += member[iz];
                sv += model.visibility_map.visibility(member[iz]);
                sc += concurrence(&out);
                sp += purity(&out);
            }
            rows.push(SweepRow {
                scenario: scenario.name().to_string(),
                z,
                xi: sx / n,
                visibility: sv / n,
                concurrence: sc / n,
                purity: sp / n,
                realizations: xi.len(),
            });
        }
    }
    Ok(SweepReport {
        model: *model,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn from_dynamic(m: &CMatrix) -> Matrix4c {
        Matrix4c::from_fn(|i, j| m[(i, j)])
    }

    fn random_unitary(rng: &mut ChaCha8Rng) -> Matrix2<C64> {
        // Euler-angle parametrization of U(2)
        let (a, b, g, d): (f64, f64, f64, f64) = (
            rng.random_range(0.0..6.3),
            rng.random_range(0.0..6.3),
            rng.random_range(0.0..6.3),
            rng.random_range(0.0..1.58),
        );
        let e = |x: f64| C64::from_polar(1.0, x);
        Matrix2::new(
            e(a) * e(b) * d.cos(),
            e(a) * e(g) * d.sin(),
            -e(a) * e(-g) * d.sin(),
            e(a) * e(-b) * d.cos(),
        )
    }

    fn random_state(rng: &mut ChaCha8Rng) -> TwoQubitState {
        let a = CMatrix::from_fn(4, 4, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let rho = &a * a.adjoint();
        let tr = rho.trace();
        TwoQubitState::new(from_dynamic(&(rho / tr))).unwrap()
    }

    #[test]
    fn bell_and_mixed() {
        let bell = TwoQubitState::bell_phi_plus();
        assert!((concurrence(&bell) - 1.0).abs() < 1e-10);
        assert!((purity(&bell) - 1.0).abs() < 1e-12);
        let mixed = TwoQubitState::maximally_mixed();
        assert!(concurrence(&mixed).abs() < 1e-10);
        assert!((purity(&mixed) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn werner_closed_forms() {
        for v in [0.2, 0.5, 0.8, 0.9] {
            let w = TwoQubitState::werner(v).unwrap();
            let expected_c = ((3.0 * v - 1.0) / 2.0).max(0.0);
            assert!((concurrence(&w) - expected_c).abs() < 1e-10, "v = {v}");
            assert!((purity(&w) - (1.0 + 3.0 * v * v) / 4.0).abs() < 1e-12);
        }
        // direct matrix product at v = 0.8
        let w = TwoQubitState::werner(0.8).unwrap();
        let mut tr = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                tr += (w.rho()[(i, j)] * w.rho()[(j, i)]).re;
            }
        }
        assert!((tr - (1.0 + 3.0 * 0.64) / 4.0).abs() < 1e-12);
        assert!((tr - 0.73).abs() < 1e-12);
    }

    #[test]
    fn concurrence_uses_textbook_definition() {
        // eigenvalues of ρ ρ̃ directly, via a general (non-Hermitian) solver
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let sy = Matrix2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0));
        let yy = sy.kronecker(&sy);
        for _ in 0..20 {
            let s = random_state(&mut rng);
            let prod = s.rho() * yy * s.rho().conjugate() * yy;
            let eig = nalgebra::Schur::new(prod).unpack().1;
            let mut l: Vec<f64> = (0..4).map(|i| eig[(i, i)].re.max(0.0).sqrt()).collect();
            l.sort_by(|a, b| b.total_cmp(a));
            let oracle = (l[0] - l[1] - l[2] - l[3]).max(0.0);
            assert!((concurrence(&s) - oracle).abs() < 1e-8);
        }
    }

    #[test]
    fn rejects_invalid_states() {
        let mut rho = Matrix4c::identity() * c(0.25, 0.0);
        rho[(0, 1)] = c(0.1, 0.0);
        assert!(TwoQubitState::new(rho).is_err());
        assert!(TwoQubitState::new(Matrix4c::identity() * c(0.3, 0.0)).is_err());
        let neg = Matrix4c::from_diagonal(&nalgebra::Vector4::new(
            c(1.2, 0.0),
            c(-0.2, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ));
        assert!(TwoQubitState::new(neg).is_err());
        assert!(TwoQubitState::werner(1.5).is_err());
    }

    #[test]
    fn local_unitaries_preserve_concurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let s = random_state(&mut rng);
            let ua = random_unitary(&mut rng);
            let ub = random_unitary(&mut rng);
            assert!((ua.adjoint() * ua - Matrix2::identity()).norm() < 1e-12);
            let t = s.apply_local(&ua, &ub);
            assert!((concurrence(&s) - concurrence(&t)).abs() < 1e-10);
        }
    }

    #[test]
    fn channel_anchor_points() {
        let bell = TwoQubitState::bell_phi_plus();
        let model = ChannelModel::default();
        assert_eq!(model.apply(&bell, 1.0), bell);
        let half = model.apply(&bell, 0.5);
        assert!((concurrence(&half) - 0.25).abs() < 1e-10);
        let squared = ChannelModel::with_map(VisibilityMap::Power(2.0));
        assert!((squared.visibility_map.visibility(0.5) - 0.25).abs() < 1e-15);
        assert!(VisibilityMap::Power(0.0).validate().is_err());
    }

    #[test]
    fn topological_channel_keeps_entanglement() {
        let out = lattice_channel(
            &TwoQubitState::bell_phi_plus(),
            &LatticeSpec::sample_c4(),
            &Injection::SingleSite(0),
            11.0,
            &ChannelModel::default(),
        )
        .unwrap();
        assert!(out.xi > 0.94);
        assert!(concurrence(&out.state) > 0.9);
        assert!(purity(&out.state) > 0.9);
    }

    #[test]
    fn zero_distance_keeps_bell_state() {
        let scenarios: Vec<Scenario> = Scenario::standard(1)
            .into_iter()
            .filter(|s| s.name() != "topological_disordered")
            .collect();
        let report = entanglement_sweep(&scenarios, &[0.0], &ChannelModel::default()).unwrap();
        for row in &report.rows {
            assert!((row.concurrence - 1.0).abs() < 1e-10, "{}", row.scenario);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn channel_output_is_valid_and_monotone(v1 in 0.0f64..1.0, v2 in 0.0f64..1.0, seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(&mut rng);
            let (lo, hi) = if v1 < v2 { (v1, v2) } else { (v2, v1) };
            let a = white_noise(&s, lo);
            let b = white_noise(&s, hi);
            prop_assert!(TwoQubitState::new(*a.rho()).is_ok());
            prop_assert!(concurrence(&a) <= concurrence(&b) + 1e-10);
            prop_assert!(purity(&a) <= purity(&b) + 1e-12);
        }
    }
}
