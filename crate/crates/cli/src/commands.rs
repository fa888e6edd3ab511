use std::path::{Path, PathBuf};

use chirpdyn::algebra::{Drive, SpinSystem};
use chirpdyn::experiments::{
    central_band, chorus, circular_std, circular_variance, composite, phase_spread, psyche, zq,
    ScanResult,
};
use chirpdyn::integrator::{Stats, Trajectory};
use chirpdyn::io::config::RunConfig;
use chirpdyn::io::svg::Heatmap;
use chirpdyn::io::{emit_csv, emit_json, emit_svg, load_config, LinePlot, Plot, Summary, Table};
use chirpdyn::lvn::{
    self, cartesian_to_ladder, simulate_ensemble, simulate_single_spin, simulate_two_spin, unit,
    EnsembleResult, Samples, SimOptions,
};
use chirpdyn::pulse::{SampledWaveform, Sampling};
use chirpdyn::weinorman::{propagate_bloch, solve_propagator, unitarity_defect, WnOptions};
use chirpdyn::{Complex64, Error, Result};
use serde_json::json;

/// Collects the files of one run and its JSON summary.
struct Output {
    dir: PathBuf,
    svg: bool,
    summary: Summary,
}

impl Output {
    fn new(dir: &Path, command: &str, cfg: &RunConfig) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Output {
            dir: dir.to_path_buf(),
            svg: cfg.svg,
            summary: Summary::new(command, Some(&cfg.raw)),
        })
    }

    fn csv(&mut self, name: &str, table: &Table) -> Result<()> {
        emit_csv(table, self.dir.join(name))?;
        self.summary.output(name);
        Ok(())
    }

    fn plot(&mut self, name: &str, plot: Plot) -> Result<()> {
        if self.svg {
            emit_svg(&plot, self.dir.join(name))?;
            self.summary.output(name);
        }
        Ok(())
    }

    fn finish(mut self, stats: Option<Stats>) -> Result<()> {
        self.summary.stats = stats;
        emit_json(&self.summary, self.dir.join("summary.json"))
    }
}

fn wn_options(cfg: &RunConfig) -> WnOptions {
    WnOptions::with_tol(cfg.tol).samples(Samples::Uniform(cfg.samples))
}

fn sim_options(cfg: &RunConfig) -> SimOptions {
    SimOptions::with_tol(cfg.tol).samples(Samples::Uniform(cfg.samples))
}

fn bloch_c0(cfg: &RunConfig, default: [f64; 3]) -> [Complex64; 3] {
    cfg.initial_bloch.unwrap_or(default).map(Complex64::from)
}

fn scan_plot(title: &str, y_label: &str, scan: &ScanResult, names: &[&str]) -> Plot {
    let mut plot = LinePlot::new(title, scan.axis_name.clone(), y_label);
    for n in names {
        if let Some(v) = scan.values(n) {
            plot = plot.line(*n, scan.axis.clone(), v);
        }
    }
    Plot::Lines(plot)
}

fn magnitude_plot(title: &str, traj: &Trajectory) -> Plot {
    let n = traj.states.first().map_or(0, Vec::len);
    let mut plot = LinePlot::new(title, "t (s)", "|g|");
    for k in 0..n {
        let y: Vec<f64> = traj.component(k).iter().map(|z| z.norm()).collect();
        if y.iter().any(|v| *v > 1e-12) {
            plot = plot.line(format!("g{}", k + 1), traj.times.clone(), y);
        }
    }
    Plot::Lines(plot)
}

fn sampled(cfg: &RunConfig) -> Result<SampledWaveform> {
    if !cfg.pulses.is_empty() {
        return cfg.sequence()?.sample(Sampling::Count(cfg.samples));
    }
    if let Some(c) = &cfg.chorus {
        return c.sequence()?.sample(Sampling::Count(cfg.samples));
    }
    if let Some(s) = cfg.saltire {
        let times = chirpdyn::pulse::linspace(0.0, s.saltire.tau_p, cfg.samples);
        let cx = times.iter().map(|&t| s.saltire.evaluate(t)).collect();
        let cy = vec![0.0; times.len()];
        return Ok(SampledWaveform { times, cx, cy });
    }
    Err(Error::Config {
        field: "pulse".into(),
        message: "no [[pulse]], [chorus] or [saltire] block to sample".into(),
    })
}

pub fn waveform(config: &Path, out: &Path, svg: Option<&Path>) -> Result<()> {
    let cfg = load_config(config)?;
    let w = sampled(&cfg)?;
    for path in std::iter::once(out).chain(svg) {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
    }
    let table = Table::from_waveform(&w);
    emit_csv(&table, out)?;
    if let Some(path) = svg {
        let amp = w.amplitude();
        let plot = LinePlot::new("waveform", "t (s)", "rad/s")
            .line("cx", w.times.clone(), w.cx.clone())
            .line("cy", w.times.clone(), w.cy.clone())
            .line("amp", w.times.clone(), amp);
        emit_svg(&Plot::Lines(plot), path)?;
    }
    Ok(())
}

fn write_ensemble(out: &mut Output, prefix: &str, e: &EnsembleResult) -> Result<()> {
    let width = e.slices.len().to_string().len();
    for (s, traj) in e.slices.iter().enumerate() {
        out.csv(&format!("{prefix}_slice{:0width$}.csv", s + 1), &Table::from_trajectory(traj))?;
    }
    out.csv(&format!("{prefix}_mean.csv"), &Table::from_trajectory(&e.ensemble_mean))?;
    out.plot(&format!("{prefix}_mean.svg"), magnitude_plot("ensemble mean", &e.ensemble_mean))
}

pub fn simulate_lvn(config: &Path, out_dir: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let system = cfg.require_spin()?;
    let opts = sim_options(&cfg);
    let mut out = Output::new(out_dir, "simulate lvn", &cfg)?;
    match system {
        SpinSystem::Single { offset } => {
            let g0 = match cfg.initial_index {
                Some(k) if k < 3 => unit(3, k),
                Some(k) => {
                    return Err(Error::Config {
                        field: "state.index".into(),
                        message: format!("{} exceeds the 3 single-spin coefficients", k + 1),
                    })
                }
                None => cartesian_to_ladder(&bloch_c0(&cfg, [0.0, 0.0, 1.0])),
            };
            let traj = simulate_single_spin(offset, &cfg.sequence()?, &g0, &opts)?;
            let (p, f) = lvn::purity_drift(lvn::single_spin_basis(), &traj);
            out.summary.metric("purity_drift", p).metric("frobenius_drift", f);
            out.summary.metric("final", traj.last().map(|g| g.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()));
            out.csv("lvn.csv", &Table::from_trajectory(&traj))?;
            out.plot("lvn.svg", magnitude_plot("coefficients", &traj))?;
            out.finish(Some(traj.stats))
        }
        SpinSystem::Coupled { .. } => {
            let drive = match (cfg.saltire, cfg.pulses.is_empty()) {
                (Some(s), _) => Drive::Saltire(s.saltire),
                (None, false) => Drive::Sequence(cfg.sequence()?),
                (None, true) => {
                    return Err(Error::Config {
                        field: "pulse".into(),
                        message: "a [[pulse]] or [saltire] block is required".into(),
                    })
                }
            };
            let k = match (cfg.initial_index, &drive, cfg.gradient) {
                (Some(k), _, _) if k < 15 => k,
                (Some(k), _, _) => {
                    return Err(Error::Config {
                        field: "state.index".into(),
                        message: format!("{} exceeds the 15 two-spin coefficients", k + 1),
                    })
                }
                (None, Drive::Saltire(_), _) => psyche::PSYCHE_INITIAL,
                (None, _, Some(_)) => zq::ZQ_INITIAL,
                (None, _, None) => {
                    return Err(Error::Config {
                        field: "state.index".into(),
                        message: "missing (no default initial state for this scenario)".into(),
                    })
                }
            };
            let g0 = unit(15, k);
            match cfg.gradient {
                Some(g) => {
                    let e = simulate_ensemble(system, &drive, &g0, &g, &opts)?;
                    out.summary.metric("n_slices", e.slices.len());
                    out.summary.metric(
                        "final_mean_abs",
                        (0..15).map(|k| e.final_mean(k).norm()).collect::<Vec<_>>(),
                    );
                    write_ensemble(&mut out, "lvn", &e)?;
                    out.finish(Some(e.stats()))
                }
                None => {
                    let traj = simulate_two_spin(system, &drive, &g0, None, &opts)?;
                    let (p, f) = lvn::purity_drift(lvn::two_spin_basis(), &traj);
                    out.summary.metric("purity_drift", p).metric("frobenius_drift", f);
                    out.csv("lvn.csv", &Table::from_trajectory(&traj))?;
                    out.plot("lvn.svg", magnitude_plot("coefficients", &traj))?;
                    out.finish(Some(traj.stats))
                }
            }
        }
    }
}

pub fn simulate_wn(config: &Path, out_dir: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let SpinSystem::Single { offset } = cfg.require_spin()? else {
        return Err(Error::Config {
            field: "spin".into(),
            message: "the Wei-Norman engine needs a single spin (offset_hz)".into(),
        });
    };
    let seq = cfg.sequence()?;
    let opts = wn_options(&cfg);
    let mut out = Output::new(out_dir, "simulate wn", &cfg)?;
    let sol = solve_propagator(&seq, offset, &opts)?;
    let bloch = propagate_bloch(&seq, offset, bloch_c0(&cfg, [0.0, 0.0, 1.0]), &opts)?;
    let defect = sol.propagators().iter().map(unitarity_defect).fold(0.0, f64::max);
    out.summary
        .metric("restarts", sol.restarts())
        .metric("max_unitarity_defect", defect);
    if let Some((c, phase)) = bloch.last() {
        out.summary
            .metric("final_bloch", c.map(|z| z.re))
            .metric("final_phase_deg", phase.to_degrees());
    }
    out.csv("wn.csv", &Table::from_trajectory(&sol.coefficients()))?;
    out.csv("bloch.csv", &Table::from_bloch(&bloch))?;
    let t = bloch.times.clone();
    let comp = |k: usize| bloch.c.iter().map(|c| c[k].re).collect::<Vec<_>>();
    let plot = LinePlot::new("Bloch vector", "t (s)", "c")
        .line("c1", t.clone(), comp(0))
        .line("c2", t.clone(), comp(1))
        .line("c3", t, comp(2));
    out.plot("bloch.svg", Plot::Lines(plot))?;
    out.finish(Some(sol.stats))
}

pub fn demo_zq(config: &Path, out_dir: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let system = cfg.require_spin()?;
    let gradient = cfg.require_gradient()?;
    let pulse = *cfg.sequence()?.pulses.first().expect("sequence is non-empty");
    let opts = sim_options(&cfg);
    let mut out = Output::new(out_dir, "demo zq", &cfg)?;
    let point = zq::zq_point(system, &pulse, &gradient, &opts)?;
    out.summary
        .metric("tau_p", point.tau_p)
        .metric("xi", lvn::xi(system, &pulse)?)
        .metric("g4_gradient", point.with_gradient)
        .metric("g4_no_gradient", point.without_gradient);
    let e = zq::zq_ensemble(system, &pulse, &gradient, &opts)?;
    write_ensemble(&mut out, "zq", &e)?;
    if let Some(xi) = &cfg.scan.xi {
        let scan = zq::zq_filter_scan(system, &pulse, &gradient, xi, &opts)?;
        out.csv("zq_scan.csv", &Table::from_scan(&scan))?;
        out.plot("zq_scan.svg", scan_plot("zero-quantum filter", "|g4|", &scan, &["g4_gradient", "g4_no_gradient"]))?;
    }
    out.finish(Some(e.stats()))
}

pub fn demo_psyche(config: &Path, out_dir: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let system = cfg.require_spin()?;
    let saltire = cfg.require_saltire()?;
    let gradient = cfg.require_gradient()?;
    let opts = SimOptions::with_tol(cfg.tol);
    let mut out = Output::new(out_dir, "demo psyche", &cfg)?;
    let e = psyche::psyche_element(system, &saltire.saltire, &gradient, &opts.clone().samples(Samples::Uniform(cfg.samples)))?;
    let end = psyche::PsycheEndpoint::from_ensemble(&e);
    out.summary
        .metric("flip_deg", saltire.flip_deg)
        .metric("g6", end.g6)
        .metric("g8", end.g8)
        .metric("g10", end.g10)
        .metric("g12", end.g12)
        .metric("lambda", end.lambda())
        .metric("lambda_penalized", end.lambda_penalized())
        .metric(
            "zq_dq_abs",
            psyche::ZQ_DQ.iter().map(|&k| e.final_mean(k).norm()).collect::<Vec<_>>(),
        );
    out.csv("psyche_mean.csv", &Table::from_trajectory(&e.ensemble_mean))?;
    out.plot("psyche_mean.svg", magnitude_plot("PSYCHE element, ensemble mean", &e.ensemble_mean))?;
    let stats = e.stats();
    if let Some(alphas) = &cfg.scan.alpha_deg {
        let scan = psyche::psyche_flip_scan(system, &saltire.saltire, &gradient, alphas, &opts)?;
        let best = |name: &str| {
            scan.get(name).and_then(|s| {
                s.defined()
                    .max_by(|a, b| a.1.total_cmp(&b.1))
                    .map(|(i, _)| scan.axis[i])
            })
        };
        out.summary
            .metric("alpha_best_lambda", best("lambda"))
            .metric("alpha_best_lambda_penalized", best("lambda_penalized"));
        out.csv("psyche_flip.csv", &Table::from_scan(&scan))?;
        out.plot("psyche_flip_g.svg", scan_plot("endpoints against flip angle", "|g|", &scan, &["g6", "g8", "g10", "g12"]))?;
        out.plot("psyche_flip_lambda.svg", scan_plot("lambda", "lambda", &scan, &["lambda", "lambda_penalized"]))?;
    }
    if let Some(xi) = &cfg.scan.xi {
        let scan = psyche::psyche_xi_scan(system, &saltire.saltire, &gradient, xi, &opts)?;
        out.csv("psyche_xi.csv", &Table::from_scan(&scan))?;
        out.plot(
            "psyche_xi.svg",
            scan_plot("endpoints against xi", "|g|", &scan, &["g6_gradient", "g8_gradient", "g10_gradient", "g12_gradient"]),
        )?;
    }
    out.finish(Some(stats))
}

pub fn demo_composite(config: &Path, out_dir: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let params = cfg.composite()?;
    let offsets = cfg.require_offsets()?;
    let mut out = Output::new(out_dir, "demo composite", &cfg)?;
    let r = composite::composite_refocus(&params, &offsets, bloch_c0(&cfg, [0.0, 1.0, 0.0]), &wn_options(&cfg))?;
    let ends = r.endpoints();
    let phases = r.end_phases();
    let mut scan = ScanResult::new("offset_hz", offsets.clone())?;
    for (k, name) in ["c1", "c2", "c3"].iter().enumerate() {
        scan.push_dense(*name, ends.iter().map(|c| c[k].re).collect())?;
    }
    scan.push_dense("phase", phases.clone())?;
    let min_c2 = ends.iter().map(|c| c[1].re.abs()).fold(f64::INFINITY, f64::min);
    out.summary
        .metric("min_abs_c2", min_c2)
        .metric("phase_spread_deg", phase_spread(&phases).to_degrees());
    out.csv("composite_profile.csv", &Table::from_scan(&scan))?;
    out.plot("composite_profile.svg", scan_plot("composite refocusing", "c", &scan, &["c1", "c2", "c3"]))?;
    let mut stats = Stats::default();
    for (f, traj) in offsets.iter().zip(&r.trajectories) {
        stats += traj.stats;
        out.csv(&format!("composite_bloch_{f:+.0}Hz.csv"), &Table::from_bloch(traj))?;
    }
    out.finish(Some(stats))
}

fn chorus_offsets(cfg: &RunConfig, params: &chorus::ChorusParams) -> Vec<f64> {
    cfg.scan.offsets_hz.clone().unwrap_or_else(|| {
        central_band(params.delta_f_sweep, cfg.scan.band_fraction.unwrap_or(0.8), cfg.samples)
    })
}

fn profile_metrics(out: &mut Output, prefix: &str, scan: &ScanResult) {
    let phase = scan.values("phase").unwrap_or_default();
    let c2 = scan.values("c2").unwrap_or_default();
    out.summary
        .metric(format!("{prefix}circular_variance"), circular_variance(&phase))
        .metric(format!("{prefix}phase_std_deg"), circular_std(&phase).to_degrees())
        .metric(format!("{prefix}min_abs_c2"), c2.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min));
}

pub fn demo_chorus(config: &Path, out_dir: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let params = cfg.require_chorus()?;
    let offsets = chorus_offsets(&cfg, &params);
    let mut out = Output::new(out_dir, "demo chorus", &cfg)?;
    let scan = chorus::chorus_profile(&params, &offsets, &WnOptions::with_tol(cfg.tol))?;
    profile_metrics(&mut out, "", &scan);
    out.summary.metric("omega1", params.omega1).metric("total_s", params.timing.total());
    out.csv("chorus_profile.csv", &Table::from_scan(&scan))?;
    out.plot("chorus_profile.svg", scan_plot("CHORUS profile", "c", &scan, &["c1", "c2", "c3"]))?;
    out.plot("chorus_phase.svg", scan_plot("CHORUS phase", "rad", &scan, &["phase"]))?;
    let w = params.sequence()?.sample(Sampling::Count(2001))?;
    out.csv("chorus_waveform.csv", &Table::from_waveform(&w))?;
    out.finish(None)
}

pub fn optimize_chorus(config: &Path, out_dir: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let params = cfg.require_chorus()?;
    let offsets = chorus_offsets(&cfg, &params);
    let opts = WnOptions::with_tol(cfg.tol);
    let mut out = Output::new(out_dir, "optimize chorus-phase", &cfg)?;
    let search = chorus::CorrectionSearch::coarse(
        &params,
        cfg.scan.band_fraction.unwrap_or(0.8),
        cfg.scan.optimize_points.unwrap_or(21),
    );
    let r = chorus::chorus_correction(&params, &offsets, &opts, &search)?;
    if r.not_converged {
        eprintln!("warning: simplex stopped at its iteration limit; reporting the best point found");
    }
    out.summary
        .metric("variance_before", r.variance_before)
        .metric("variance_after", r.variance_after)
        .metric("reduction", r.variance_before / r.variance_after)
        .metric("phi0_rad", r.optimized.phi0)
        .metric("delta_f_hz", r.optimized.delta_f)
        .metric("converged", !r.not_converged)
        .metric("iterations", r.minimum.iterations)
        .metric("evaluations", r.minimum.evaluations)
        .metric(
            "corrected_config",
            json!({ "phi0_rad": r.optimized.phi0, "delta_f_hz": r.optimized.delta_f }),
        );
    let before = chorus::chorus_profile(&params, &offsets, &opts)?;
    let after = chorus::chorus_profile(&r.optimized, &offsets, &opts)?;
    profile_metrics(&mut out, "before_", &before);
    profile_metrics(&mut out, "after_", &after);
    out.csv("chorus_before.csv", &Table::from_scan(&before))?;
    out.csv("chorus_after.csv", &Table::from_scan(&after))?;
    let plot = LinePlot::new("phase before and after correction", "offset_hz", "rad")
        .line("before", offsets.clone(), before.values("phase").unwrap_or_default())
        .line("after", offsets, after.values("phase").unwrap_or_default());
    out.plot("chorus_phase_correction.svg", Plot::Lines(plot))?;
    out.finish(None)
}

pub fn map_b1(config: &Path, out_dir: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let params = cfg.require_chorus()?;
    let offsets = chorus_offsets(&cfg, &params);
    let scales = cfg
        .scan
        .b1_scale
        .clone()
        .unwrap_or_else(|| (0..41).map(|i| 0.5 + 0.025 * i as f64).collect());
    let mut out = Output::new(out_dir, "map b1", &cfg)?;
    let grid = chorus::b1_map(&params, &offsets, &scales, &WnOptions::with_tol(cfg.tol))?;
    let centre = offsets
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let column: Vec<f64> = grid.values.iter().map(|row| row[centre]).collect();
    out.summary
        .metric("centre_offset_hz", offsets[centre])
        .metric("b1_scale", scales.clone())
        .metric("c2_at_centre", column);
    out.csv("b1_map.csv", &Table::from_grid(&grid))?;
    out.plot("b1_map.svg", Plot::Heatmap(Heatmap::from_grid("c2 against offset and B1 scale", &grid)))?;
    out.finish(None)
}
