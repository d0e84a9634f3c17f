//! Command runners shared by the binary and the examples. Each command
//! writes its artifacts plus a `manifest.json` into one output directory.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::bands::{
    band_gap, band_gap_above, band_structure, lowest_band_character, mod1_distance,
    topological_indices, wilson_loop_polarization, BandGap, Hsp, InvariantReport, KPath, Rotation,
};
use crate::config::{ExperimentConfig, RunConfig};
use crate::coupler::{coupler_unitary, prepare_superposition, CouplerSpec, Superposition};
use crate::dynamics::{
    make_injection, most_uniform_corner_split, return_probability, CornerSplit, Injection,
    ModeProportions, Propagator, DEFAULT_Z_GRID,
};
use crate::entanglement::{
    entanglement_sweep, white_noise, ChannelModel, OrderingCheck, Scenario, SweepReport,
    TwoQubitState, VisibilityMap,
};
use crate::error::{Error, Result};
use crate::lattice::{
    apply_disorder, finite_hamiltonian, Axis, DisorderSpec, LatticeSpec, Region, SymmetryClass,
};
use crate::output::{RunManifest, Sink, Table};
use crate::spectrum::{
    classify_states, eigendecompose, label_distribution, spatial_distribution, spectral_flow,
    zero_energy_window, EigenSolution,
};

pub const FIGURE_IDS: [&str; 6] = ["fig1", "fig2", "fig3", "fig4", "entanglement", "robustness"];

/// Scenario order expected for the entanglement protection.
pub const PROTECTION_ORDER: [&str; 3] = ["topological", "trivial", "uniform_walk"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Command {
    Bands,
    Invariants,
    Spectrum,
    Evolve,
    DisorderSweep,
    Coupler,
    Entangle,
    Reproduce(String),
}

impl Command {
    pub fn name(&self) -> String {
        match self {
            Command::Bands => "bands".into(),
            Command::Invariants => "invariants".into(),
            Command::Spectrum => "spectrum".into(),
            Command::Evolve => "evolve".into(),
            Command::DisorderSweep => "disorder-sweep".into(),
            Command::Coupler => "coupler".into(),
            Command::Entangle => "entangle".into(),
            Command::Reproduce(id) => format!("reproduce {id}"),
        }
    }
}

/// Validate, run one command into `out`, and write its manifest.
pub fn run(command: &Command, config: &ExperimentConfig, out: &Path) -> Result<RunManifest> {
    config.validate()?;
    if let Command::Reproduce(id) = command {
        if !FIGURE_IDS.contains(&id.as_str()) {
            return Err(Error::Config(format!(
                "unknown figure id {id:?}; valid ids: {}",
                FIGURE_IDS.join(", ")
            )));
        }
    }
    let mut sink = Sink::create(out, config.output.format)?;
    let spec = &config.lattice;
    let run = &config.run;
    match command {
        Command::Bands => bands(&mut sink, "", spec, run).map(drop)?,
        Command::Invariants => invariants(&mut sink, "", spec, run).map(drop)?,
        Command::Spectrum => spectrum(&mut sink, "", spec, run).map(drop)?,
        Command::Evolve => evolve(&mut sink, "", spec, run, &run.injection).map(drop)?,
        Command::DisorderSweep => disorder_sweep(&mut sink, "", spec, run).map(drop)?,
        Command::Coupler => coupler(&mut sink, "", spec, run).map(drop)?,
        Command::Entangle => {
            entangle(&mut sink, "", run, &ChannelModel::with_map(run.visibility_map)).map(drop)?
        }
        Command::Reproduce(id) => reproduce(&mut sink, id, config)?,
    }
    sink.finish(&command.name(), config)
}

fn region_name(r: Region) -> &'static str {
    match r {
        Region::Corner => "corner",
        Region::Edge => "edge",
        Region::Bulk => "bulk",
    }
}

fn z_tag(z: f64) -> String {
    format!("z{z}")
}

#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub symmetry: SymmetryClass,
    pub ratio_x: f64,
    pub ratio_y: f64,
    /// Gap above the lowest band, the one the invariants use.
    pub lowest_gap: BandGap,
    /// Gap at half filling, between bands 2 and 3.
    pub half_filling_gap: BandGap,
    /// Rotation label of the lowest band at M, when defined.
    pub m_point_character: Option<usize>,
    pub path_points: usize,
}

pub fn bands(sink: &mut Sink, prefix: &str, spec: &LatticeSpec, run: &RunConfig) -> Result<GapReport> {
    let model = spec.bulk_model()?;
    let path = KPath::standard(run.k_points_per_segment);
    let bs = band_structure(&model, &path.points);
    let mut t = Table::new(["index", "distance", "kx", "ky", "E1", "E2", "E3", "E4"]);
    for (i, (k, e)) in bs.k_points.iter().zip(&bs.energies).enumerate() {
        t.push(vec![
            i.into(),
            path.distance[i].into(),
            k.kx().into(),
            k.ky().into(),
            e[0].into(),
            e[1].into(),
            e[2].into(),
            e[3].into(),
        ]);
    }
    sink.table(&format!("{prefix}bands"), &t)?;

    let rotation = match model.symmetry_class() {
        SymmetryClass::C4 => Some(Rotation::C4),
        SymmetryClass::C2 => Some(Rotation::C2),
        SymmetryClass::C1 => None,
    };
    let t = model.couplings;
    let report = GapReport {
        symmetry: model.symmetry_class(),
        ratio_x: t.t_a_x / t.t_b_x,
        ratio_y: t.t_a_y / t.t_b_y,
        lowest_gap: band_gap(&model, run.gap_grid),
        half_filling_gap: band_gap_above(&model, 2, run.gap_grid),
        m_point_character: rotation.and_then(|r| lowest_band_character(&model, Hsp::M, r).ok()),
        path_points: path.len(),
    };
    sink.json(&format!("{prefix}gap"), &report)?;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantsOutput {
    pub report: InvariantReport,
    /// Wilson-loop `(P_x, P_y)`.
    pub wilson_polarization: (f64, f64),
    /// Largest mod-1 distance between the two polarization estimates.
    pub polarization_mismatch: f64,
}

pub fn invariants(
    sink: &mut Sink,
    prefix: &str,
    spec: &LatticeSpec,
    run: &RunConfig,
) -> Result<InvariantsOutput> {
    let model = spec.bulk_model()?;
    let report = topological_indices(&model)?;
    let wx = wilson_loop_polarization(&model, Axis::X, run.wilson_grid)?;
    let wy = wilson_loop_polarization(&model, Axis::Y, run.wilson_grid)?;
    let mut t = Table::new(["direction", "transverse_k", "polarization"]);
    for w in [&wx, &wy] {
        let dir = if w.direction == Axis::X { "x" } else { "y" };
        for (k, p) in w.transverse_k.iter().zip(&w.berry_phase_per_transverse_k) {
            t.push(vec![dir.into(), (*k).into(), (*p).into()]);
        }
    }
    sink.table(&format!("{prefix}wilson"), &t)?;
    let out = InvariantsOutput {
        polarization_mismatch: mod1_distance(wx.polarization, report.polarization.0)
            .max(mod1_distance(wy.polarization, report.polarization.1)),
        wilson_polarization: (wx.polarization, wy.polarization),
        report,
    };
    sink.json(&format!("{prefix}invariants"), &out)?;
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSummary {
    pub sites: usize,
    pub spectral_range: f64,
    pub energy_window: (f64, f64),
    pub states_in_window: usize,
    pub window_density_total: f64,
    pub corner_count: usize,
    pub edge_count: usize,
    pub bulk_count: usize,
    pub corner_energies: Vec<f64>,
}

fn solve(spec: &LatticeSpec, run: &RunConfig) -> Result<EigenSolution> {
    let h = finite_hamiltonian(spec)?;
    Ok(classify_states(eigendecompose(&h)?, run.corner_threshold, run.edge_threshold))
}

pub fn spectrum(
    sink: &mut Sink,
    prefix: &str,
    spec: &LatticeSpec,
    run: &RunConfig,
) -> Result<SpectrumSummary> {
    let sol = solve(spec, run)?;
    let mut t = Table::new(["index", "energy", "w_corner", "w_edge", "w_bulk", "label"]);
    for j in 0..sol.len() {
        let w = sol.weights[j];
        t.push(vec![
            j.into(),
            sol.energies[j].into(),
            w.corner.into(),
            w.edge.into(),
            w.bulk.into(),
            region_name(sol.labels[j]).into(),
        ]);
    }
    sink.table(&format!("{prefix}spectrum"), &t)?;

    let window = match run.energy_window {
        Some([lo, hi]) => (lo, hi),
        None => zero_energy_window(&sol, spec.onsite_energy),
    };
    let dist = spatial_distribution(&sol, window);
    sink.field(&format!("{prefix}window_density"), &sol.grid, "density", &dist.site_density)?;
    for region in [Region::Corner, Region::Edge, Region::Bulk] {
        let d = label_distribution(&sol, region);
        let name = format!("{prefix}{}_density", region_name(region));
        sink.field(&name, &sol.grid, "density", &d.site_density)?;
    }

    let corners = sol.indices_labelled(Region::Corner);
    let summary = SpectrumSummary {
        sites: sol.len(),
        spectral_range: sol.spectral_range(),
        energy_window: window,
        states_in_window: dist.state_count,
        window_density_total: dist.total(),
        corner_count: corners.len(),
        edge_count: sol.indices_labelled(Region::Edge).len(),
        bulk_count: sol.indices_labelled(Region::Bulk).len(),
        corner_energies: corners.iter().map(|&j| sol.energies[j]).collect(),
    };
    sink.json(&format!("{prefix}spectrum_summary"), &summary)?;
    Ok(summary)
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolveSummary {
    pub injection: Injection,
    pub distances: Vec<f64>,
    pub return_probability: Vec<f64>,
    pub mode_proportions: ModeProportions,
    /// Largest change of any site intensity relative to the first distance.
    pub max_intensity_drift: f64,
}

pub fn evolve(
    sink: &mut Sink,
    prefix: &str,
    spec: &LatticeSpec,
    run: &RunConfig,
    injection: &Injection,
) -> Result<EvolveSummary> {
    let h = finite_hamiltonian(spec)?;
    let grid = h.grid;
    let prop = Propagator::from_solution(classify_states(
        eigendecompose(&h)?,
        run.corner_threshold,
        run.edge_threshold,
    ));
    let psi = make_injection(&grid, injection)?;
    let res = prop.evolve_many(&psi, &run.z_grid)?;
    for (z, row) in res.distances.iter().zip(&res.intensities) {
        sink.field(&format!("{prefix}intensity_{}", z_tag(*z)), &grid, "intensity", row)?;
    }
    let xi = return_probability(&res, &grid, &injection.sites(&grid), run.return_width)?;
    let mut t = Table::new(["z", "xi"]);
    for (z, x) in res.distances.iter().zip(&xi) {
        t.push(vec![(*z).into(), (*x).into()]);
    }
    sink.table(&format!("{prefix}return_probability"), &t)?;

    let drift = match res.intensities.first() {
        Some(first) => res
            .intensities
            .iter()
            .flat_map(|row| row.iter().zip(first).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max),
        None => 0.0,
    };
    let summary = EvolveSummary {
        injection: injection.clone(),
        distances: res.distances.clone(),
        return_probability: xi,
        mode_proportions: prop.mode_decomposition(&psi)?.proportions(),
        max_intensity_drift: drift,
    };
    sink.json(&format!("{prefix}evolve_summary"), &summary)?;
    Ok(summary)
}

/// Per-realization outcome of the disorder sweep.
#[derive(Clone, Debug, Serialize)]
pub struct RealizationResult {
    pub level: f64,
    pub index: usize,
    pub corner_count: usize,
    pub xi: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EnsembleRow {
    pub level: f64,
    pub realizations: usize,
    pub clean_corner_count: usize,
    pub corner_count_min: usize,
    pub corner_count_max: usize,
    /// Fraction of realizations keeping the clean corner count.
    pub corner_count_preserved: f64,
    pub xi_mean: Vec<f64>,
    pub xi_std: Vec<f64>,
}

fn realization_result(
    spec: &LatticeSpec,
    run: &RunConfig,
    level: f64,
    index: usize,
) -> Result<RealizationResult> {
    let sol = solve(spec, run)?;
    let corner_count = sol.indices_labelled(Region::Corner).len();
    let grid = sol.grid;
    let prop = Propagator::from_solution(sol);
    let psi = make_injection(&grid, &run.injection)?;
    let res = prop.evolve_many(&psi, &run.z_grid)?;
    Ok(RealizationResult {
        level,
        index,
        corner_count,
        xi: return_probability(&res, &grid, &run.injection.sites(&grid), run.return_width)?,
    })
}

/// Ensemble statistics of `spec` over `run.disorder_levels`. Level 0 is the
/// clean lattice and is evaluated once.
pub fn disorder_ensemble(spec: &LatticeSpec, run: &RunConfig) -> Result<(Vec<EnsembleRow>, Vec<RealizationResult>)> {
    let mut clean_spec = spec.clone();
    clean_spec.disorder = None;
    clean_spec.realization = None;
    let clean = realization_result(&clean_spec, run, 0.0, 0)?;

    let mut rows = Vec::new();
    let mut members = Vec::new();
    for &level in &run.disorder_levels {
        let results: Vec<RealizationResult> = if level == 0.0 {
            vec![clean.clone()]
        } else {
            let dis = clean_spec.clone().with_disorder(DisorderSpec {
                level,
                seed: run.seed,
                realization_count: run.realizations,
            });
            (0..run.realizations)
                .into_par_iter()
                .map(|i| realization_result(&apply_disorder(&dis, i)?, run, level, i))
                .collect::<Result<_>>()?
        };
        let n = results.len() as f64;
        let nz = run.z_grid.len();
        let mut mean = vec![0.0; nz];
        for r in &results {
            for (m, x) in mean.iter_mut().zip(&r.xi) {
                *m += x / n;
            }
        }
        let mut std = vec![0.0; nz];
        for r in &results {
            for ((s, x), m) in std.iter_mut().zip(&r.xi).zip(&mean) {
                *s += (x - m).powi(2) / n;
            }
        }
        let counts = results.iter().map(|r| r.corner_count);
        rows.push(EnsembleRow {
            level,
            realizations: results.len(),
            clean_corner_count: clean.corner_count,
            corner_count_min: counts.clone().min().unwrap_or(0),
            corner_count_max: counts.clone().max().unwrap_or(0),
            corner_count_preserved: counts.filter(|&c| c == clean.corner_count).count() as f64 / n,
            xi_mean: mean,
            xi_std: std.into_iter().map(f64::sqrt).collect(),
        });
        members.extend(results);
    }
    Ok((rows, members))
}

pub fn disorder_sweep(
    sink: &mut Sink,
    prefix: &str,
    spec: &LatticeSpec,
    run: &RunConfig,
) -> Result<Vec<EnsembleRow>> {
    let (rows, members) = disorder_ensemble(spec, run)?;
    let z_cols = |stem: &str| -> Vec<String> {
        run.z_grid.iter().map(|z| format!("{stem}_{}", z_tag(*z))).collect()
    };

    let mut cols: Vec<String> = ["level", "realization", "corner_count"].map(String::from).to_vec();
    cols.extend(z_cols("xi"));
    let mut t = Table::new(cols);
    for m in &members {
        let mut row = vec![m.level.into(), m.index.into(), m.corner_count.into()];
        row.extend(m.xi.iter().map(|&x| x.into()));
        t.push(row);
    }
    sink.table(&format!("{prefix}realizations"), &t)?;

    let mut cols: Vec<String> = [
        "level",
        "realizations",
        "clean_corner_count",
        "corner_count_min",
        "corner_count_max",
        "corner_count_preserved",
    ]
    .map(String::from)
    .to_vec();
    cols.extend(z_cols("xi_mean"));
    cols.extend(z_cols("xi_std"));
    let mut t = Table::new(cols);
    for r in &rows {
        let mut row = vec![
            r.level.into(),
            r.realizations.into(),
            r.clean_corner_count.into(),
            r.corner_count_min.into(),
            r.corner_count_max.into(),
            r.corner_count_preserved.into(),
        ];
        row.extend(r.xi_mean.iter().map(|&x| x.into()));
        row.extend(r.xi_std.iter().map(|&x| x.into()));
        t.push(row);
    }
    sink.table(&format!("{prefix}ensemble"), &t)?;
    Ok(rows)
}

pub fn coupler_spec(run: &RunConfig) -> Result<CouplerSpec> {
    match run.coupler_length {
        Some(length) => CouplerSpec::new(run.coupler_strength, length),
        None => CouplerSpec::canonical(run.coupler_strength),
    }
}

#[derive(Clone, Debug, Serialize)]
struct CouplerSummary {
    coupling_strength: f64,
    length: f64,
    canonical: bool,
    uniform: bool,
    transmitted: f64,
    /// `[re, im]` per port, entry port first.
    output: Vec<[f64; 2]>,
}

pub fn coupler(
    sink: &mut Sink,
    prefix: &str,
    spec: &LatticeSpec,
    run: &RunConfig,
) -> Result<Superposition> {
    let cs = coupler_spec(run)?;
    let u = coupler_unitary(&cs);
    let mut t = Table::new(["row", "col", "re", "im", "abs", "arg"]);
    for i in 0..u.nrows() {
        for j in 0..u.ncols() {
            let v = u[(i, j)];
            t.push(vec![i.into(), j.into(), v.re.into(), v.im.into(), v.norm().into(), v.arg().into()]);
        }
    }
    sink.table(&format!("{prefix}coupler_unitary"), &t)?;

    let grid = spec.grid();
    let s = prepare_superposition(&cs, grid.len(), &grid.corners())?;
    let mut t = Table::new(["site", "x", "y", "re", "im"]);
    for (i, a) in s.state.amplitudes().iter().enumerate() {
        if a.norm() > 0.0 {
            let (x, y) = grid.coords(i);
            t.push(vec![i.into(), x.into(), y.into(), a.re.into(), a.im.into()]);
        }
    }
    sink.table(&format!("{prefix}lattice_injection"), &t)?;
    sink.json(
        &format!("{prefix}coupler"),
        &CouplerSummary {
            coupling_strength: cs.coupling_strength,
            length: cs.length,
            canonical: cs.is_canonical(),
            uniform: s.uniform,
            transmitted: s.transmitted,
            output: s.port_amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        },
    )?;
    Ok(s)
}

#[derive(Clone, Debug, Serialize)]
struct DensityMatrixRecord {
    scenario: String,
    z: f64,
    visibility: f64,
    re: Vec<[f64; 4]>,
    im: Vec<[f64; 4]>,
}

fn matrix_record(scenario: &str, z: f64, visibility: f64, state: &TwoQubitState) -> DensityMatrixRecord {
    let rho = state.rho();
    DensityMatrixRecord {
        scenario: scenario.to_string(),
        z,
        visibility,
        re: (0..4).map(|i| [0, 1, 2, 3].map(|j| rho[(i, j)].re)).collect(),
        im: (0..4).map(|i| [0, 1, 2, 3].map(|j| rho[(i, j)].im)).collect(),
    }
}

/// Entanglement sweep over the standard scenarios, plus the ordering check
/// at every distance.
pub fn entangle(
    sink: &mut Sink,
    prefix: &str,
    run: &RunConfig,
    model: &ChannelModel,
) -> Result<(SweepReport, Vec<OrderingCheck>)> {
    let report = entanglement_sweep(&Scenario::standard(run.seed), &run.entangle_z_grid, model)?;
    let mut t = Table::new(["scenario", "z", "xi", "visibility", "concurrence", "purity", "realizations"]);
    let mut matrices = Vec::new();
    let bell = TwoQubitState::bell_phi_plus();
    for r in &report.rows {
        t.push(vec![
            r.scenario.as_str().into(),
            r.z.into(),
            r.xi.into(),
            r.visibility.into(),
            r.concurrence.into(),
            r.purity.into(),
            r.realizations.into(),
        ]);
        // the channel is affine in v, so the ensemble-mean state is the
        // channel at the mean visibility
        matrices.push(matrix_record(&r.scenario, r.z, r.visibility, &white_noise(&bell, r.visibility)));
    }
    sink.table(&format!("{prefix}entanglement"), &t)?;
    sink.json(&format!("{prefix}density_matrices"), &matrices)?;
    let checks = run
        .entangle_z_grid
        .iter()
        .map(|&z| report.ordering(&PROTECTION_ORDER, z))
        .collect::<Result<Vec<_>>>()?;
    sink.json(&format!("{prefix}ordering"), &checks)?;
    Ok((report, checks))
}

fn reproduce(sink: &mut Sink, id: &str, config: &ExperimentConfig) -> Result<()> {
    let run = &config.run;
    match id {
        "fig1" => reproduce_fig1(sink, run),
        "fig2" => reproduce_fig2(sink, run),
        "fig3" => reproduce_fig3(sink, run),
        "fig4" => reproduce_fig4(sink, run).map(drop),
        "entanglement" => {
            for (tag, map) in [
                ("identity", VisibilityMap::Identity),
                ("power2", VisibilityMap::Power(2.0)),
            ] {
                entangle(sink, &format!("{tag}/"), run, &ChannelModel::with_map(map))?;
            }
            Ok(())
        }
        "robustness" => {
            let run = RunConfig {
                injection: Injection::SingleSite(0),
                ..run.clone()
            };
            disorder_sweep(sink, "topological/", &LatticeSpec::sample_c4(), &run)?;
            disorder_sweep(sink, "trivial/", &LatticeSpec::sample_trivial(), &run)?;
            Ok(())
        }
        _ => unreachable!("figure ids are checked in run"),
    }
}

/// Band inversion through `t_a = t_b`.
fn reproduce_fig1(sink: &mut Sink, run: &RunConfig) -> Result<()> {
    let regimes = [
        ("ta_lt_tb", LatticeSpec::square(4, 13.0, 11.0)),
        ("ta_eq_tb", LatticeSpec::square(4, 12.0, 12.0)),
        ("ta_gt_tb", LatticeSpec::square(4, 11.0, 13.0)),
    ];
    let mut t = Table::new(["regime", "ratio", "gap", "gap_ratio", "m_point_character", "corner_index"]);
    for (name, spec) in regimes {
        let gap = bands(sink, &format!("{name}/"), &spec, run)?;
        let corner_index = match invariants(sink, &format!("{name}/"), &spec, run) {
            Ok(inv) => inv.report.corner_index,
            Err(Error::Gapless { .. }) => f64::NAN,
            Err(e) => return Err(e),
        };
        t.push(vec![
            name.into(),
            gap.ratio_x.into(),
            gap.lowest_gap.gap_size.into(),
            gap.lowest_gap.gap_ratio.into(),
            gap.m_point_character.map_or(-1, |p| p as i64).into(),
            corner_index.into(),
        ]);
    }
    sink.table("band_inversion", &t)
}

/// Separations along x of the five C2 samples.
pub const C2_SAMPLE_SEPARATIONS: [f64; 5] = [11.0, 11.75, 12.5, 13.25, 14.0];

/// Spectral flow, the C4 and C2 spectra, and the thirty-lattice grid.
fn reproduce_fig2(sink: &mut Sink, run: &RunConfig) -> Result<()> {
    let sample = LatticeSpec::sample_c4();
    let t_b = sample.couplings()?.t_b_x;
    let ratios: Vec<f64> = (0..=80).map(|i| -1.0 + 0.025 * i as f64).collect();
    let flow = spectral_flow(sample.nx_cells, t_b, &ratios)?;
    let mut t = Table::new(["ratio", "E_c1", "E_c2", "E_c3", "E_c4", "corner_weight", "corner_count", "gap_ratio"]);
    for p in &flow.points {
        let mut row = vec![p.ratio.into()];
        row.extend(p.corner_energies.iter().map(|&e| e.into()));
        row.extend([p.corner_weight.into(), p.corner_count.into(), p.gap_ratio.into()]);
        t.push(row);
    }
    sink.table("spectral_flow", &t)?;

    spectrum(sink, "c4/", &sample, run)?;
    spectrum(sink, "c2/", &LatticeSpec::sample_c2(C2_SAMPLE_SEPARATIONS[2]), run)?;

    let run_grid = RunConfig {
        z_grid: DEFAULT_Z_GRID.to_vec(),
        ..run.clone()
    };
    let mut specs = vec![("c4".to_string(), sample)];
    for d in C2_SAMPLE_SEPARATIONS {
        specs.push((format!("c2_dbx{d}"), LatticeSpec::sample_c2(d)));
    }
    let mut t = Table::new(["sample", "d_b_x", "z", "xi"]);
    for (name, spec) in &specs {
        let s = evolve(sink, &format!("lattices/{name}/"), spec, &run_grid, &Injection::SingleSite(0))?;
        for (z, xi) in s.distances.iter().zip(&s.return_probability) {
            t.push(vec![name.as_str().into(), spec.d_b_x.into(), (*z).into(), (*xi).into()]);
        }
    }
    sink.table("lattice_grid", &t)
}

/// Coupler-fed corner superposition on the C4 sample.
fn reproduce_fig3(sink: &mut Sink, run: &RunConfig) -> Result<()> {
    let sample = LatticeSpec::sample_c4();
    let s = coupler(sink, "", &sample, run)?;
    let amps: Vec<[f64; 2]> = s.state.amplitudes().iter().map(|a| [a.re, a.im]).collect();
    evolve(sink, "superposition/", &sample, run, &Injection::Custom(amps))?;
    evolve(sink, "single_corner/", &sample, run, &Injection::SingleSite(0))?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct FiniteGapRow {
    pub d_a: f64,
    pub d_b: f64,
    pub ratio: f64,
    pub split: CornerSplit,
}

/// Intra-cell separations of the finite-gap samples, µm.
pub fn finite_gap_separations() -> Vec<f64> {
    (0..=4).map(|i| 13.0 + 0.1 * i as f64).collect()
}

/// Single-corner injection near the gap closing; best four-corner split
/// over a fine z scan of the sampled range.
pub fn finite_gap_scan(spec: &LatticeSpec, z_range: (f64, f64), steps: usize) -> Result<CornerSplit> {
    let h = finite_hamiltonian(spec)?;
    let prop = Propagator::new(&h)?;
    let psi = make_injection(&h.grid, &Injection::SingleSite(0))?;
    let z: Vec<f64> = (0..=steps)
        .map(|i| z_range.0 + (z_range.1 - z_range.0) * i as f64 / steps as f64)
        .collect();
    most_uniform_corner_split(&prop, &psi, &z)
}

fn reproduce_fig4(sink: &mut Sink, run: &RunConfig) -> Result<Vec<FiniteGapRow>> {
    let d_b = 11.0;
    let (z_lo, z_hi) = (DEFAULT_Z_GRID[0], DEFAULT_Z_GRID[4]);
    let mut rows = Vec::new();
    let mut t = Table::new([
        "d_a", "d_b", "ratio", "best_z", "share_1", "share_2", "share_3", "share_4", "deviation",
    ]);
    for d_a in finite_gap_separations() {
        let spec = LatticeSpec::square(4, d_a, d_b);
        let c = spec.couplings()?;
        let split = finite_gap_scan(&spec, (z_lo, z_hi), 200)?;
        let mut row = vec![d_a.into(), d_b.into(), (c.t_a_x / c.t_b_x).into(), split.z.into()];
        row.extend(split.shares.iter().map(|&s| s.into()));
        row.push(split.deviation.into());
        t.push(row);
        let r = RunConfig {
            z_grid: vec![split.z],
            ..run.clone()
        };
        evolve(sink, &format!("da{d_a:.1}/"), &spec, &r, &Injection::SingleSite(0))?;
        rows.push(FiniteGapRow {
            d_a,
            d_b,
            ratio: c.t_a_x / c.t_b_x,
            split,
        });
    }
    sink.table("finite_gap", &t)?;
    Ok(rows)
}
