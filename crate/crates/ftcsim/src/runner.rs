//! Command implementations behind the CLI: each one loads a run config,
//! executes the requested analysis, and writes deterministic data files.

use std::path::{Path, PathBuf};

use crate::circuit::{self, CircuitSpec, NodeKind};
use crate::config::{config_hash, ConfigError, GateBlock, RunConfig};
use crate::drive;
use crate::metrics;
use crate::optim::{self, OptimizationProblem};
use crate::propagate::{self, DressedFrame, PropagateOptions};
use crate::pulse::ToneSpec;
use crate::quantize::{self, HamiltonianModel};
use crate::report::{fmt_f64, ReportError, Table};
use crate::spectrum::{self, DressedSpectrum};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum RunnerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Circuit(#[from] circuit::CircuitError),
    #[error(transparent)]
    Quantize(#[from] quantize::QuantizeError),
    #[error(transparent)]
    Spectrum(#[from] spectrum::SpectrumError),
    #[error(transparent)]
    Drive(#[from] drive::DriveError),
    #[error(transparent)]
    Propagate(#[from] propagate::PropagateError),
    #[error(transparent)]
    Optim(#[from] optim::OptimError),
    #[error(transparent)]
    Metrics(#[from] metrics::MetricsError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{0}")]
    Invalid(String),
}

/// Shared context for one command invocation.
pub struct RunContext {
    pub config: RunConfig,
    pub config_bytes: Vec<u8>,
    pub config_dir: PathBuf,
    pub out_dir: PathBuf,
    pub threads: usize,
    pub seed_override: Option<u64>,
    pub levels_override: Option<usize>,
}

impl RunContext {
    pub fn load(
        config_path: &Path,
        out_dir: &Path,
        threads: usize,
        seed: Option<u64>,
        levels: Option<usize>,
    ) -> Result<Self, RunnerError> {
        let bytes = std::fs::read(config_path)
            .map_err(|e| ConfigError::Io(config_path.to_path_buf(), e))?;
        let config = crate::config::load_run(config_path)?;
        Ok(RunContext {
            config,
            config_bytes: bytes,
            config_dir: config_path.parent().unwrap_or(Path::new(".")).to_path_buf(),
            out_dir: out_dir.to_path_buf(),
            threads: threads.max(1),
            seed_override: seed,
            levels_override: levels,
        })
    }

    pub fn rng_seed(&self) -> u64 {
        self.seed_override.unwrap_or(self.config.rng_seed)
    }

    pub fn levels(&self) -> usize {
        self.levels_override.unwrap_or(self.config.levels)
    }

    fn stamp(&self, t: &mut Table) {
        t.meta("generator", format!("ftcsim {VERSION}"));
        t.meta("config_hash", format!("{:016x}", config_hash(&self.config_bytes)));
        t.meta("rng_seed", self.rng_seed());
        t.meta("levels", self.levels());
    }

    pub fn build_model(
        &self,
    ) -> Result<(CircuitSpec, HamiltonianModel, DressedSpectrum), RunnerError> {
        let spec = self.config.circuit_spec(&self.config_dir)?;
        let (model, ds) = build_pipeline(&spec, self.levels())?;
        Ok((spec, model, ds))
    }
}

/// Standard assembly pipeline at uniform per-node truncation.
pub fn build_pipeline(
    spec: &CircuitSpec,
    levels: usize,
) -> Result<(HamiltonianModel, DressedSpectrum), RunnerError> {
    let charging = circuit::reduced_charging_energy(spec)?;
    let dims = vec![levels; charging.mode_order.len()];
    let model = quantize::assemble_hamiltonian(spec, &charging, &dims)?;
    let ds = spectrum::dressed_spectrum(&model, spec, &[])?;
    Ok((model, ds))
}

fn label_string(label: &[usize]) -> String {
    label.iter().map(|l| l.to_string()).collect::<Vec<_>>().join("")
}

/// Static spectrum report: dressed energies, labels, overlaps, ZZ, and
/// delocalization of the computational set.
pub fn cmd_spectrum(ctx: &RunContext) -> Result<Vec<PathBuf>, RunnerError> {
    let (spec, model, ds) = ctx.build_model()?;
    let mut files = Vec::new();

    let mut t = Table::new(&["label", "energy_ghz", "overlap"]);
    ctx.stamp(&mut t);
    let mut rows: Vec<(Vec<usize>, usize)> =
        ds.labels.iter().map(|(l, &k)| (l.clone(), k)).collect();
    rows.sort_by(|a, b| a.1.cmp(&b.1));
    let g = ds.ground_energy();
    for (label, k) in rows.iter().take(64.min(model.dim())) {
        t.row(&[
            label_string(label),
            fmt_f64(ds.energies[*k] - g),
            fmt_f64(ds.overlaps[label]),
        ]);
    }
    files.push(t.write(&ctx.out_dir.join("spectrum.csv"))?);

    let mut s = Table::new(&["quantity", "value", "unit"]);
    ctx.stamp(&mut s);
    let nq = ds.qubit_count();
    for q in 0..nq {
        let mut bits = vec![0usize; nq];
        bits[q] = 1;
        let f = ds.energy(&ds.computational_label(&bits))?;
        s.row(&[format!("f01_qubit{}", q + 1), fmt_f64(f), "GHz".into()]);
    }
    if nq == 2 {
        s.row(&["zeta".into(), fmt_f64(spectrum::zz_crosstalk(&ds)?), "kHz".into()]);
    } else if nq >= 2 {
        for q in 0..nq - 1 {
            s.row(&[
                format!("zeta_{}{}", q + 1, q + 2),
                fmt_f64(spectrum::zz_crosstalk_pair(&ds, q, q + 1)?),
                "kHz".into(),
            ]);
        }
        if nq == 3 {
            s.row(&[
                "zeta_13".into(),
                fmt_f64(spectrum::zz_crosstalk_pair(&ds, 0, 2)?),
                "kHz".into(),
            ]);
            s.row(&[
                "zeta_zzz".into(),
                fmt_f64(spectrum::zzz_interaction(&ds)?),
                "Hz".into(),
            ]);
        }
    }
    for (label, eps) in sorted_map(spectrum::delocalization(&ds)?) {
        s.row(&[format!("delocalization_{}", label_string(&label)), fmt_f64(eps), "1".into()]);
    }
    let _ = spec;
    files.push(s.write(&ctx.out_dir.join("summary.csv"))?);
    Ok(files)
}

fn sorted_map(m: std::collections::HashMap<Vec<usize>, f64>) -> Vec<(Vec<usize>, f64)> {
    let mut v: Vec<(Vec<usize>, f64)> = m.into_iter().collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

fn grid(center: f64, halfwidth: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![center];
    }
    (0..points)
        .map(|i| center - halfwidth + 2.0 * halfwidth * i as f64 / (points - 1) as f64)
        .collect()
}

/// Pairwise ZZ over a one- or two-coupler flux grid.
pub fn cmd_zz_map(ctx: &RunContext) -> Result<Vec<PathBuf>, RunnerError> {
    let block = ctx
        .config
        .sweep
        .clone()
        .ok_or(ConfigError::MissingSection("sweep"))?;
    let (spec, model, _) = ctx.build_model()?;
    let couplers: Vec<&str> = block.couplers.iter().map(|s| s.as_str()).collect();
    let centers: Vec<f64> = match &block.center {
        Some(c) => c.clone(),
        None => couplers
            .iter()
            .map(|c| spec.node(c).map(|n| n.external_flux()).unwrap_or(0.0))
            .collect(),
    };
    let grids: Vec<Vec<f64>> = centers
        .iter()
        .map(|&c| grid(c, block.halfwidth, block.points))
        .collect();
    let rows = parallel_sweep(&model, &spec, &couplers, &grids, ctx.threads)?;

    let mut names: Vec<String> = couplers.iter().map(|c| format!("flux_{c}")).collect();
    let nq = spec.qubit_names().len();
    for q in 0..nq.saturating_sub(1) {
        names.push(format!("zeta_{}{}_khz", q + 1, q + 2));
    }
    names.push("dominant_pair".into());
    let cols: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let mut t = Table::new(&cols);
    ctx.stamp(&mut t);
    for r in rows {
        let mut cells: Vec<String> = r.fluxes.iter().map(|v| fmt_f64(*v)).collect();
        cells.extend(r.zetas.iter().map(|v| fmt_f64(*v)));
        cells.push(format!("{}", r.dominant + 1));
        t.row(&cells);
    }
    Ok(vec![t.write(&ctx.out_dir.join("zz_map.csv"))?])
}

fn parallel_sweep(
    model: &HamiltonianModel,
    spec: &CircuitSpec,
    couplers: &[&str],
    grids: &[Vec<f64>],
    threads: usize,
) -> Result<Vec<spectrum::SweepRow>, RunnerError> {
    // expand the grid points, chunk across scoped worker threads
    let points: Vec<Vec<f64>> = match grids {
        [g] => g.iter().map(|&f| vec![f]).collect(),
        [ga, gb] => {
            let mut v = Vec::new();
            for &fa in ga {
                for &fb in gb {
                    v.push(vec![fa, fb]);
                }
            }
            v
        }
        _ => return Err(RunnerError::Invalid("sweeps support one or two couplers".into())),
    };
    let workers = threads.min(points.len()).max(1);
    let chunk = points.len().div_ceil(workers);
    let mut out: Vec<Option<spectrum::SweepRow>> = vec![None; points.len()];
    std::thread::scope(|scope| -> Result<(), RunnerError> {
        let mut handles = Vec::new();
        for (w, slice) in points.chunks(chunk).enumerate() {
            let handle = scope.spawn(move || -> Result<Vec<spectrum::SweepRow>, String> {
                let mut rows = Vec::with_capacity(slice.len());
                for fluxes in slice {
                    let overrides: Vec<(&str, f64)> =
                        couplers.iter().copied().zip(fluxes.iter().copied()).collect();
                    let ds = spectrum::dressed_spectrum(model, spec, &overrides)
                        .map_err(|e| e.to_string())?;
                    let nq = ds.qubit_count();
                    let mut zetas = Vec::new();
                    for q in 0..nq.saturating_sub(1) {
                        zetas.push(
                            spectrum::zz_crosstalk_pair(&ds, q, q + 1)
                                .map_err(|e| e.to_string())?,
                        );
                    }
                    let dominant = zetas
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
                        .map(|(i, _)| i)
                        .unwrap_or(0);
                    rows.push(spectrum::SweepRow { fluxes: fluxes.clone(), zetas, dominant });
                }
                Ok(rows)
            });
            handles.push((w, handle));
        }
        for (w, h) in handles {
            let rows = h.join().expect("sweep worker").map_err(RunnerError::Invalid)?;
            for (i, r) in rows.into_iter().enumerate() {
                out[w * chunk + i] = Some(r);
            }
        }
        Ok(())
    })?;
    Ok(out.into_iter().map(|r| r.unwrap()).collect())
}

/// Fabrication-robustness maps over coupler E_J and E_C errors.
pub fn cmd_robustness(ctx: &RunContext) -> Result<Vec<PathBuf>, RunnerError> {
    let block = ctx
        .config
        .robustness
        .clone()
        .ok_or(ConfigError::MissingSection("robustness"))?;
    let spec = ctx.config.circuit_spec(&ctx.config_dir)?;
    let n = block.grid.max(2);
    let deltas: Vec<f64> = (0..n)
        .map(|i| -block.delta_max + 2.0 * block.delta_max * i as f64 / (n - 1) as f64)
        .collect();
    let levels = vec![ctx.levels(); spec.nodes.len()];
    let maps = spectrum::robustness_scan(
        &spec,
        &levels,
        &block.coupler,
        &deltas,
        &deltas,
        block.flux_halfwidth,
    )?;
    let mut t = Table::new(&[
        "delta_ej",
        "delta_ec",
        "zeta_at_sweet_spot_khz",
        "zeta_readjusted_khz",
        "flux_readjusted_rad",
    ]);
    ctx.stamp(&mut t);
    for (i, &dej) in maps.delta_ej.iter().enumerate() {
        for (j, &dec) in maps.delta_ec.iter().enumerate() {
            t.row_f64(&[
                dej,
                dec,
                maps.at_sweet_spot[[i, j]],
                maps.readjusted[[i, j]],
                maps.readjusted_flux[[i, j]],
            ]);
        }
    }
    Ok(vec![t.write(&ctx.out_dir.join("robustness.csv"))?])
}

fn gate_outputs(
    ctx: &RunContext,
    spec: &CircuitSpec,
    model: &HamiltonianModel,
    ds: &DressedSpectrum,
    block: &GateBlock,
    tag: &str,
) -> Result<Vec<PathBuf>, RunnerError> {
    let frame = DressedFrame::new(model, ds, &block.pulse.coupler, block.retain_states)?;
    let res = propagate::simulate_gate(
        ds,
        &frame,
        &block.pulse,
        &PropagateOptions { rtol: block.rtol, record_populations: true },
    )?;
    let mut files = Vec::new();

    let mut t = Table::new(&["quantity", "value"]);
    ctx.stamp(&mut t);
    t.row(&["infidelity".into(), fmt_f64(res.infidelity)]);
    for (q, th) in res.phase_corrections.iter().enumerate() {
        t.row(&[format!("virtual_z_qubit{}", q + 1), fmt_f64(*th)]);
    }
    for (i, total) in res.leakage_totals.iter().enumerate() {
        t.row(&[format!("leakage_input_{i}"), fmt_f64(*total)]);
    }
    for (i, items) in res.leakage.iter().enumerate() {
        for (label, pop) in items.iter().take(4) {
            t.row(&[format!("leakage_input_{i}_state_{}", label_string(label)), fmt_f64(*pop)]);
        }
    }
    if let Some(avg) = &res.avg_population {
        for (label, pop) in sorted_map(avg.clone()) {
            if pop > 1e-6 {
                t.row(&[format!("avg_population_{}", label_string(&label)), fmt_f64(pop)]);
            }
        }
        let kinds: Vec<NodeKind> = model
            .basis_order
            .iter()
            .map(|n| spec.node(n).unwrap().kind.clone())
            .collect();
        let rates = propagate::default_decay_rates(ds, &kinds);
        let dec = propagate::decoherence_error(avg, &rates, block.pulse.gate_time)?;
        t.row(&["decoherence_error".into(), fmt_f64(dec)]);
    }
    files.push(t.write(&ctx.out_dir.join(format!("{tag}_report.csv")))?);

    if block.timeseries {
        let rows = propagate::trajectory(
            &frame,
            &block.pulse,
            propagate::computational_rows(ds, &frame)?[(1 << ds.qubit_count()) - 1],
            &PropagateOptions { rtol: block.rtol, record_populations: false },
            2000,
        )?;
        let comp_rows = propagate::computational_rows(ds, &frame)?;
        let mut names = vec!["t_ns".to_string(), "flux_rad".to_string()];
        for label in ds.computational_labels() {
            names.push(format!("p_{}", label_string(&label)));
        }
        let cols: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let mut ts = Table::new(&cols);
        ctx.stamp(&mut ts);
        for (time, pops) in rows {
            let mut cells = vec![time, crate::pulse::flux_waveform(&block.pulse, time)];
            for &r in &comp_rows {
                cells.push(pops[r]);
            }
            ts.row_f64(&cells);
        }
        files.push(ts.write(&ctx.out_dir.join(format!("{tag}_timeseries.csv")))?);
    }
    Ok(files)
}

/// Single gate simulation from a fully specified pulse.
pub fn cmd_gate(ctx: &RunContext) -> Result<Vec<PathBuf>, RunnerError> {
    let block = ctx.config.gate.clone().ok_or(ConfigError::MissingSection("gate"))?;
    let (spec, model, ds) = ctx.build_model()?;
    gate_outputs(ctx, &spec, &model, &ds, &block, "gate")
}

/// Amplitude-aware analytic seed: the closed-form resonance of the
/// three-level theory when the chain is a single fluxonium-coupler-transmon
/// cell, else half the dressed pair gap.
pub fn analytic_seed_frequency(
    spec: &CircuitSpec,
    model: &HamiltonianModel,
    ds: &DressedSpectrum,
    amplitude: f64,
) -> Result<f64, RunnerError> {
    if let Ok(m) = drive::numerical_a_matrix(model, ds) {
        if let Some(coupler) = spec.coupler_names().first() {
            if let Some(node) = spec.node(coupler) {
                if let crate::circuit::NodeKind::Coupler {
                    josephson_upper, josephson_lower, ..
                } = node.kind
                {
                    let dc = drive::jacobi_anger_coefficients(
                        josephson_upper + josephson_lower,
                        josephson_upper - josephson_lower,
                        amplitude.clamp(0.0, 1.5),
                    )?;
                    if let Ok(w) = drive::analytic_drive_frequency(&m, &dc) {
                        return Ok(w);
                    }
                }
            }
        }
    }
    seed_drive_frequency(spec, ds)
}

/// Bare seed frequency for the parametric CZ on the first qubit pair:
/// half the dressed gap between the doubly-excited pair state and the
/// fluxonium's second level.
pub fn seed_drive_frequency(
    spec: &CircuitSpec,
    ds: &DressedSpectrum,
) -> Result<f64, RunnerError> {
    let qubits = spec.qubit_names();
    if qubits.len() < 2 {
        return Err(RunnerError::Invalid("need at least two qubits".into()));
    }
    let fluxonium_q = (0..2)
        .find(|&q| {
            matches!(
                spec.node(qubits[q]).map(|n| &n.kind),
                Some(NodeKind::Fluxonium { .. })
            )
        })
        .ok_or_else(|| RunnerError::Invalid("gate pair lacks a fluxonium".into()))?;
    let mut bits_11 = vec![0usize; qubits.len()];
    bits_11[0] = 1;
    bits_11[1] = 1;
    let mut bits_20 = vec![0usize; qubits.len()];
    bits_20[fluxonium_q] = 2;
    let e11 = ds.energy(&ds.computational_label(&bits_11))?;
    let e20 = ds.energy(&ds.computational_label(&bits_20))?;
    Ok((e11 - e20).abs() / 2.0)
}

/// Pulse optimization (single-tone, optionally refined by a second tone).
pub fn cmd_optimize(ctx: &RunContext) -> Result<Vec<PathBuf>, RunnerError> {
    let block = ctx
        .config
        .optimize
        .clone()
        .ok_or(ConfigError::MissingSection("optimize"))?;
    let (spec, model, ds) = ctx.build_model()?;
    let frame = DressedFrame::new(&model, &ds, &block.coupler, block.retain_states)?;
    let dc_offset = spec
        .node(&block.coupler)
        .map(|n| n.external_flux())
        .ok_or_else(|| RunnerError::Invalid(format!("unknown coupler {}", block.coupler)))?;

    let seed_freq = if block.seed_frequency > 0.0 {
        block.seed_frequency
    } else {
        analytic_seed_frequency(&spec, &model, &ds, block.seed_amplitude)?
    };
    let seed =
        ToneSpec { frequency: seed_freq, amplitude: block.seed_amplitude, ramp_time: block.seed_ramp, phase: 0.0 };
    let target = (block.target > 0.0).then_some(block.target);
    let problem = OptimizationProblem {
        ds: &ds,
        frame: &frame,
        coupler: block.coupler.clone(),
        dc_offset,
        gate_time: block.gate_time,
        seed,
        budget: block.budget,
        rtol_search: block.rtol_search,
        rtol_final: block.rtol_final,
        target,
        rng_seed: ctx.rng_seed(),
    };
    let single = optim::optimize_single_tone(&problem)?;
    let mut files = Vec::new();

    let mut t = Table::new(&["quantity", "value"]);
    ctx.stamp(&mut t);
    t.row(&["seed_frequency_ghz".into(), fmt_f64(seed_freq)]);
    t.row(&["seed_infidelity".into(), fmt_f64(single.seed_infidelity)]);
    t.row(&["single_tone_infidelity".into(), fmt_f64(single.best_infidelity)]);
    t.row(&["single_tone_evaluations".into(), format!("{}", single.evaluations)]);
    let st = &single.best_pulse.tones[0];
    t.row(&["single_tone_frequency_ghz".into(), fmt_f64(st.frequency)]);
    t.row(&["single_tone_amplitude_rad".into(), fmt_f64(st.amplitude)]);
    t.row(&["single_tone_ramp_ns".into(), fmt_f64(st.ramp_time)]);

    let mut trace = Table::new(&["evaluation", "infidelity"]);
    ctx.stamp(&mut trace);
    for (i, (_, v)) in single.trace.iter().enumerate() {
        trace.row(&[format!("{i}"), fmt_f64(*v)]);
    }
    files.push(trace.write(&ctx.out_dir.join("optimize_trace_single.csv"))?);

    let mut best_pulse = single.best_pulse.clone();
    if block.two_tone {
        let candidates = second_tone_candidates(&spec, &ds, st.frequency)?;
        let two_problem = OptimizationProblem {
            budget: block.two_tone_budget,
            target,
            ..problem
        };
        let two = optim::optimize_two_tone(
            &two_problem,
            st,
            &candidates,
            block.two_tone_starts,
        )?;
        t.row(&["two_tone_infidelity".into(), fmt_f64(two.best_infidelity)]);
        t.row(&["two_tone_evaluations".into(), format!("{}", two.evaluations)]);
        for (i, tone) in two.best_pulse.tones.iter().enumerate() {
            t.row(&[format!("two_tone_{}_frequency_ghz", i + 1), fmt_f64(tone.frequency)]);
            t.row(&[format!("two_tone_{}_amplitude_rad", i + 1), fmt_f64(tone.amplitude)]);
            t.row(&[format!("two_tone_{}_ramp_ns", i + 1), fmt_f64(tone.ramp_time)]);
        }
        let mut trace2 = Table::new(&["evaluation", "infidelity"]);
        ctx.stamp(&mut trace2);
        for (i, (_, v)) in two.trace.iter().enumerate() {
            trace2.row(&[format!("{i}"), fmt_f64(*v)]);
        }
        files.push(trace2.write(&ctx.out_dir.join("optimize_trace_two.csv"))?);
        if two.best_infidelity < single.best_infidelity {
            best_pulse = two.best_pulse.clone();
        }
    }
    files.push(t.write(&ctx.out_dir.join("optimize_report.csv"))?);

    let pulse_text = toml::to_string_pretty(&best_pulse)
        .map_err(|e| RunnerError::Invalid(format!("serialize pulse: {e}")))?;
    let pulse_path = ctx.out_dir.join("best_pulse.toml");
    std::fs::write(&pulse_path, pulse_text)
        .map_err(|e| ReportError::Io(pulse_path.clone(), e))?;
    files.push(pulse_path);
    Ok(files)
}

/// Physics-motivated second-tone frequency candidates: the dominant leakage
/// transitions out of the doubly-excited state.
pub fn second_tone_candidates(
    spec: &CircuitSpec,
    ds: &DressedSpectrum,
    first_tone: f64,
) -> Result<Vec<f64>, RunnerError> {
    let qubits = spec.qubit_names();
    let nq = qubits.len();
    let couplers = spec.coupler_names();
    let mut bits_11 = vec![0usize; nq];
    bits_11[0] = 1;
    bits_11[1] = 1;
    let e11 = ds.energy(&ds.computational_label(&bits_11))?;
    // |110>-type label: first qubit excited plus the gate coupler excited
    let mut l110 = ds.computational_label(&{
        let mut b = vec![0usize; nq];
        b[0] = 1;
        b
    });
    if let Some(c0) = couplers.first() {
        if let Some(pos) = ds.basis_order.iter().position(|n| n == c0) {
            l110[pos] = 1;
        }
    }
    let e110 = ds.energy(&l110)?;
    let gap = (e11 - e110).abs();
    // coupler-swap channel out of the single-excitation sector
    let mut b01 = vec![0usize; nq];
    b01[1] = 1;
    let e001 = ds.energy(&ds.computational_label(&b01))?;
    let mut l010 = vec![0usize; ds.node_dims.len()];
    if let Some(c0) = couplers.first() {
        if let Some(pos) = ds.basis_order.iter().position(|n| n == c0) {
            l010[pos] = 1;
        }
    }
    let e010 = ds.energy(&l010)?;
    let swap = (e001 - e010).abs();
    Ok(vec![gap / 2.0, swap / 2.0, swap, gap, 2.0 * first_tone])
}

/// Analytic gate report: drive coefficients, coupling matrix, closed-form
/// drive frequency and gate time at both expansion orders.
pub fn cmd_analyze(ctx: &RunContext) -> Result<Vec<PathBuf>, RunnerError> {
    let amplitude = ctx.config.analyze.as_ref().map(|a| a.amplitude).unwrap_or(0.25);
    let (spec, model, ds) = ctx.build_model()?;
    let m = drive::numerical_a_matrix(&model, &ds)?;
    let coupler = spec.coupler_names().first().cloned().unwrap_or_default().to_string();
    let node = spec.node(&coupler).ok_or_else(|| RunnerError::Invalid("no coupler".into()))?;
    let (e_sum, e_diff) = match node.kind {
        crate::circuit::NodeKind::Coupler { josephson_upper, josephson_lower, .. } => {
            (josephson_upper + josephson_lower, josephson_upper - josephson_lower)
        }
        _ => return Err(RunnerError::Invalid("no coupler".into())),
    };
    let dc = drive::jacobi_anger_coefficients(e_sum, e_diff, amplitude)?;
    let mut t = Table::new(&["quantity", "value"]);
    ctx.stamp(&mut t);
    t.row(&["phi_ac_rad".into(), fmt_f64(amplitude)]);
    t.row(&["alpha_ghz".into(), fmt_f64(dc.alpha)]);
    t.row(&["beta_ghz".into(), fmt_f64(dc.beta)]);
    t.row(&["asymmetry_d".into(), fmt_f64(dc.d)]);
    for i in 0..3 {
        for j in 0..3 {
            t.row(&[format!("a_matrix_{i}{j}"), fmt_f64(m.a_matrix[[i, j]])]);
        }
    }
    t.row(&["e_101_ghz".into(), fmt_f64(m.energies[0])]);
    t.row(&["e_110_ghz".into(), fmt_f64(m.energies[1])]);
    t.row(&["e_200_ghz".into(), fmt_f64(m.energies[2])]);
    for order in [1u8, 2] {
        match drive::effective_gate(&m, &dc, order) {
            Ok(g) => {
                t.row(&[format!("omega_d_order{order}_ghz"), fmt_f64(g.omega_d)]);
                t.row(&[format!("g_eff_order{order}_ghz"), fmt_f64(g.g_eff)]);
                t.row(&[format!("t_gate_order{order}_ns"), fmt_f64(g.t_gate)]);
                if order == 1 {
                    t.row(&["kick_amplitude".into(), fmt_f64(g.kick_amplitude)]);
                }
            }
            Err(e) => {
                t.row(&[format!("order{order}_error"), format!("{e}")]);
            }
        }
    }
    Ok(vec![t.write(&ctx.out_dir.join("gate_analysis.csv"))?])
}

/// Spectator-chain analysis: static crosstalk, optional driven gate with the
/// spectator traced out, and the ranked Pauli error table.
pub fn cmd_spectator(ctx: &RunContext) -> Result<Vec<PathBuf>, RunnerError> {
    let block = ctx
        .config
        .spectator
        .clone()
        .ok_or(ConfigError::MissingSection("spectator"))?;
    let (_spec, model, ds) = ctx.build_model()?;
    let nq = ds.qubit_count();
    if nq != 3 {
        return Err(RunnerError::Invalid(format!("spectator analysis needs 3 qubits, got {nq}")));
    }
    let mut files = Vec::new();

    let mut t = Table::new(&["quantity", "value", "unit"]);
    ctx.stamp(&mut t);
    for (qa, qb) in [(0usize, 1usize), (1, 2), (0, 2)] {
        t.row(&[
            format!("zeta_{}{}", qa + 1, qb + 1),
            fmt_f64(spectrum::zz_crosstalk_pair(&ds, qa, qb)?),
            "kHz".into(),
        ]);
    }
    t.row(&["zeta_zzz".into(), fmt_f64(spectrum::zzz_interaction(&ds)?), "Hz".into()]);
    for (label, eps) in sorted_map(spectrum::delocalization(&ds)?) {
        t.row(&[format!("delocalization_{}", label_string(&label)), fmt_f64(eps), "1".into()]);
    }

    if let Some(gate) = &block.gate {
        let frame = DressedFrame::new(&model, &ds, &gate.pulse.coupler, gate.retain_states)?;
        let res = propagate::simulate_gate(
            &ds,
            &frame,
            &gate.pulse,
            &PropagateOptions { rtol: gate.rtol, record_populations: false },
        )?;
        let spectator = block.spectator.unwrap_or(2);
        let traced = metrics::trace_out_spectator(&res.process_matrix, spectator)?;
        let pair_inf = propagate::gate_infidelity(&traced, &propagate::cz_target(2));
        t.row(&["process_infidelity_8x8".into(), fmt_f64(res.infidelity), "1".into()]);
        t.row(&["pair_infidelity_traced".into(), fmt_f64(pair_inf), "1".into()]);

        let weights = metrics::pauli_error_weights(&res.process_matrix, &propagate::cz_target(3))?;
        let mut w = Table::new(&["pauli", "probability"]);
        ctx.stamp(&mut w);
        for (name, p) in weights.ranked() {
            w.row(&[name, fmt_f64(p)]);
        }
        files.push(w.write(&ctx.out_dir.join("pauli_weights.csv"))?);
    }
    files.push(t.write(&ctx.out_dir.join("spectator_report.csv"))?);
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_symmetric() {
        let g = grid(1.5, 0.1, 5);
        assert_eq!(g.len(), 5);
        assert!((g[0] - 1.4).abs() < 1e-15);
        assert!((g[4] - 1.6).abs() < 1e-15);
        assert!((g[2] - 1.5).abs() < 1e-15);
    }
}
