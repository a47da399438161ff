//! The experiment runners behind the CLI subcommands. Each takes a resolved
//! [`ExperimentConfig`], computes, and fills a [`ResultBundle`] in the output
//! directory; stdout gets a short human summary.

use std::fmt::Write as _;

use phaselab::model::ModelSampler;
use phaselab::net;
use phaselab::oracles::{
    empirical_landscape, integrate_ode, rescaled_drift, DriftParams, LikelihoodCoeffs,
    OverlapState,
};
use phaselab::rng::stream;
use phaselab::sgd::{self, Cadence, RecoveryRow, RunTrace, SgdConfig};
use phaselab::stats::{quantile, t_statistic};
use phaselab::surgery::{self, ImagePatch};
use phaselab::validation::{battery_passes, run_battery, write_battery_csv, BatteryConfig};
use phaselab::{Error, Result};

use crate::bundle::ResultBundle;
use crate::config::{ExperimentConfig, ExperimentKind, SpectrumSpec};
use crate::plot::{self, Series};

pub struct RunOutcome {
    pub bundle: ResultBundle,
    /// False only when the validation battery ran and failed (exit code 2).
    pub battery_ok: bool,
}

pub fn run(cfg: &ExperimentConfig, plots: bool) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut bundle = ResultBundle::create(&cfg.out, &cfg.echo())?;
    let battery_ok = match cfg.kind {
        ExperimentKind::ValidateStats => run_validate_stats(cfg, &mut bundle)?,
        ExperimentKind::IsotropicSweep => {
            run_isotropic_sweep(cfg, &mut bundle, plots)?;
            true
        }
        ExperimentKind::PowerlawSweep => {
            run_powerlaw_sweep(cfg, &mut bundle, plots)?;
            true
        }
        ExperimentKind::Landscape => {
            run_landscape(cfg, &mut bundle, plots)?;
            true
        }
        ExperimentKind::OdeCompare => {
            run_ode_compare(cfg, &mut bundle, plots)?;
            true
        }
        ExperimentKind::Surgery => {
            run_surgery(cfg, &mut bundle, plots)?;
            true
        }
        ExperimentKind::TextureTrain => {
            run_texture_train(cfg, &mut bundle, plots)?;
            true
        }
    };
    bundle.finalize()?;
    println!(
        "bundle {} ({} csv, {} plot) hash {}",
        bundle.out_dir.display(),
        bundle.csv_paths.len(),
        bundle.plot_paths.len(),
        bundle.hash
    );
    Ok(RunOutcome { bundle, battery_ok })
}

fn sgd_config(cfg: &ExperimentConfig) -> SgdConfig {
    SgdConfig {
        variant: cfg.variant,
        delta_scale: cfg.delta_scale,
        delta_override: None,
        beta: cfg.beta,
        steps: cfg.steps,
        record_every: Cadence::LogSpaced { per_decade: 20 },
        eta_threshold: cfg.eta,
        ascend: false,
    }
}

fn run_validate_stats(cfg: &ExperimentConfig, bundle: &mut ResultBundle) -> Result<bool> {
    let mut bc = BatteryConfig::new(cfg.n, cfg.epsilon, cfg.k0);
    bc.n_mc = cfg.n_mc;
    bc.seed = cfg.seed_base;
    bc.use_corrector = cfg.use_corrector;
    bc.inject_failure = cfg.inject_failure;
    let rows = run_battery(&bc)?;
    let mut buf = Vec::new();
    write_battery_csv(&mut buf, &rows)?;
    bundle.add_csv("battery.csv", &buf)?;
    for r in &rows {
        println!(
            "{} {:<28} z = {:>8.3} vs {} {}",
            if r.ok { "PASS" } else { "FAIL" },
            r.name,
            r.z,
            if r.expect_exceed { ">" } else { "<" },
            r.threshold
        );
    }
    let ok = battery_passes(&rows);
    println!(
        "battery: {} ({} checks, {} failed)",
        if ok { "PASS" } else { "FAIL" },
        rows.len(),
        rows.iter().filter(|r| !r.ok).count()
    );
    Ok(ok)
}

/// trace.csv + recovery.csv (+ overlap plot); returns the summary rows.
fn emit_sweep_artifacts(
    cfg: &ExperimentConfig,
    bundle: &mut ResultBundle,
    plots: bool,
    traces: &[RunTrace],
) -> Result<Vec<RecoveryRow>> {
    let mut buf = Vec::new();
    sgd::write_trace_csv(traces, &mut buf)?;
    bundle.add_csv("trace.csv", &buf)?;
    let rows = sgd::recovery_summary(traces, cfg.eta)?;
    let mut buf = Vec::new();
    sgd::write_recovery_csv(&rows, &mut buf)?;
    bundle.add_csv("recovery.csv", &buf)?;
    if plots {
        let series = [
            Series {
                label: "median phase overlap".into(),
                points: rows.iter().map(|r| (r.step as f64, r.med_phase_norm)).collect(),
            },
            Series {
                label: "median principal overlap".into(),
                points: rows.iter().map(|r| (r.step as f64, r.med_principal_norm)).collect(),
            },
        ];
        bundle.add_plot(
            "overlap_vs_steps.svg",
            &plot::line_chart("subspace recovery", "steps", "overlap", true, &series),
        )?;
    }
    let last = rows.last().expect("summary has at least the init row");
    println!(
        "steps {}: median phase overlap {:.4}, principal {:.4}, recovered fraction {:.2}",
        last.step, last.med_phase_norm, last.med_principal_norm, last.frac_recovered
    );
    match sgd::first_crossing(&rows, |r| r.med_phase_norm, 0.5) {
        Some(s) => println!("median phase overlap crosses 0.5 at step {s}"),
        None => println!("median phase overlap never crosses 0.5"),
    }
    Ok(rows)
}

fn run_isotropic_sweep(cfg: &ExperimentConfig, bundle: &mut ResultBundle, plots: bool) -> Result<()> {
    if cfg.spectrum != SpectrumSpec::Isotropic {
        return Err(Error::InvalidArgument(
            "isotropic-sweep requires spectrum = isotropic".into(),
        ));
    }
    let (spectrum, principal) = cfg.spectrum.build(cfg.n, cfg.k0, &cfg.principal_modes)?;
    let sampler = ModelSampler::new(spectrum, cfg.plant())?;
    let traces = sgd::run_many(
        &sampler,
        &cfg.activation.activation(),
        &sgd_config(cfg),
        &principal,
        cfg.seed_base,
        cfg.seeds,
    )?;
    emit_sweep_artifacts(cfg, bundle, plots, &traces)?;
    Ok(())
}

fn run_powerlaw_sweep(cfg: &ExperimentConfig, bundle: &mut ResultBundle, plots: bool) -> Result<()> {
    let (spectrum, principal) = cfg.spectrum.build(cfg.n, cfg.k0, &cfg.principal_modes)?;
    if spectrum.eigenvalue(cfg.k0) <= 1.0 {
        return Err(Error::InvalidArgument(
            "powerlaw-sweep needs an extensive eigenvalue at k0".into(),
        ));
    }
    let sampler = ModelSampler::new(spectrum, cfg.plant())?;
    let traces = sgd::run_many(
        &sampler,
        &cfg.activation.activation(),
        &sgd_config(cfg),
        &principal,
        cfg.seed_base,
        cfg.seeds,
    )?;
    let rows = emit_sweep_artifacts(cfg, bundle, plots, &traces)?;

    // rise-then-forget diagnostics over the cross-seed medians
    let sentinel = -1.0;
    let peak_step = sgd::argmax_step(&rows, |r| r.med_principal_norm);
    let peak_val =
        rows.iter().map(|r| r.med_principal_norm).fold(f64::NEG_INFINITY, f64::max);
    let final_val = rows.last().map_or(f64::NAN, |r| r.med_principal_norm);
    let cross = sgd::first_crossing(&rows, |r| r.med_phase_norm, 0.5);
    let peaked_before_cross = match (peak_step, cross) {
        (Some(p), Some(c)) => f64::from(u8::from(p < c)),
        _ => sentinel,
    };
    let decayed_after_peak = f64::from(u8::from(final_val < peak_val));
    let mut csv = String::from("name,value\n");
    let _ = writeln!(csv, "principal_peak_step,{}", peak_step.map_or(sentinel, |s| s as f64));
    let _ = writeln!(csv, "principal_peak_value,{peak_val:.9e}");
    let _ = writeln!(csv, "principal_final_value,{final_val:.9e}");
    let _ = writeln!(csv, "phase_cross_step,{}", cross.map_or(sentinel, |s| s as f64));
    let _ = writeln!(csv, "peaked_before_phase_cross,{peaked_before_cross}");
    let _ = writeln!(csv, "decayed_after_peak,{decayed_after_peak}");
    bundle.add_csv("ordering.csv", csv.as_bytes())?;
    println!(
        "principal overlap peaks at step {} ({:.4}), ends at {:.4}",
        peak_step.map_or(-1i64, |s| s as i64),
        peak_val,
        final_val
    );
    Ok(())
}

fn run_landscape(cfg: &ExperimentConfig, bundle: &mut ResultBundle, plots: bool) -> Result<()> {
    let (spectrum, _) = cfg.spectrum.build(cfg.n, cfg.k0, &cfg.principal_modes)?;
    let land = empirical_landscape(
        &spectrum,
        &cfg.plant(),
        &cfg.activation.activation(),
        cfg.grid,
        cfg.n_mc,
        cfg.seed_base,
    )?;
    let mut buf = Vec::new();
    land.write_csv(&mut buf)?;
    bundle.add_csv("landscape.csv", &buf)?;
    if plots {
        let cells: Vec<(f64, f64, f64)> =
            land.cells.iter().map(|c| (c.alpha_u, c.alpha_v, c.loss_mean)).collect();
        bundle.add_plot(
            "landscape.svg",
            &plot::heatmap("population loss over the phase plane", cfg.grid, &cells),
        )?;
    }
    let min = land
        .cells
        .iter()
        .min_by(|a, b| a.loss_mean.total_cmp(&b.loss_mean))
        .expect("landscape has cells");
    println!(
        "deepest cell at (alpha_u, alpha_v) = ({:.3}, {:.3}), loss {:.4} +- {:.4}",
        min.alpha_u, min.alpha_v, min.loss_mean, min.loss_stderr
    );
    Ok(())
}

fn run_ode_compare(cfg: &ExperimentConfig, bundle: &mut ResultBundle, plots: bool) -> Result<()> {
    let (spectrum, principal) = cfg.spectrum.build(cfg.n, cfg.k0, &cfg.principal_modes)?;
    let sampler = ModelSampler::new(spectrum.clone(), cfg.plant())?;
    let act = cfg.activation.activation();
    let scfg = sgd_config(cfg);
    let traces = sgd::run_many(&sampler, &act, &scfg, &principal, cfg.seed_base, cfg.seeds)?;

    let delta = scfg.effective_delta(cfg.n);
    let sqrt_n = (cfg.n as f64).sqrt();
    let m = principal.len();
    let med = |xs: &[f64]| quantile(xs, 0.5).expect("seeds >= 1");
    let med_at = |f: &dyn Fn(&RunTrace) -> f64| -> f64 {
        med(&traces.iter().map(f).collect::<Vec<f64>>())
    };

    // rescaled empirical medians per checkpoint
    let grid = traces[0].steps.clone();
    struct EmpRow {
        t: f64,
        m_u: f64,
        m_v: f64,
        phase: f64,
        principal: f64,
        omega: f64,
    }
    let emp: Vec<EmpRow> = grid
        .iter()
        .enumerate()
        .map(|(i, &step)| EmpRow {
            t: step as f64 * delta,
            m_u: sqrt_n * med_at(&|tr: &RunTrace| tr.stats[i].alpha_u.abs()),
            m_v: sqrt_n * med_at(&|tr: &RunTrace| tr.stats[i].alpha_v.abs()),
            phase: sqrt_n * med_at(&|tr: &RunTrace| tr.stats[i].phase_norm()),
            principal: sqrt_n * med_at(&|tr: &RunTrace| tr.stats[i].principal_norm()),
            omega: med_at(&|tr: &RunTrace| tr.stats[i].omega_perp),
        })
        .collect();

    // ODE from the empirical initial medians on the same time axis
    let m0 = OverlapState {
        alpha_u: sqrt_n * med_at(&|tr: &RunTrace| tr.stats[0].alpha_u.abs()),
        alpha_v: sqrt_n * med_at(&|tr: &RunTrace| tr.stats[0].alpha_v.abs()),
        alpha_um: (0..m)
            .map(|j| sqrt_n * med_at(&|tr: &RunTrace| tr.stats[0].alpha_um[j].abs()))
            .collect(),
        alpha_vm: (0..m)
            .map(|j| sqrt_n * med_at(&|tr: &RunTrace| tr.stats[0].alpha_vm[j].abs()))
            .collect(),
        omega_perp: med_at(&|tr: &RunTrace| tr.stats[0].omega_perp),
        r: med_at(&|tr: &RunTrace| tr.stats[0].r),
    };
    let lambda_m: Vec<f64> = principal.iter().map(|&k| spectrum.eigenvalue(k)).collect();
    let params = DriftParams::new(
        spectrum.eigenvalue(cfg.k0),
        lambda_m,
        &act,
        LikelihoodCoeffs::from_plant(&cfg.plant()),
        cfg.beta,
    )?;
    let regime = cfg.regime.regime();
    let r0 = m0.r;
    let rhs = |v: &[f64]| -> Vec<f64> {
        let s = OverlapState::from_vec(v, m, r0).expect("fixed dimension");
        let d = rescaled_drift(&s, &params, regime).expect("dimensions agree");
        d.to_vec().iter().map(|a| -a).collect()
    };
    let t_max = cfg.steps as f64 * delta;
    let ode_steps = (t_max / cfg.ode_dt).ceil() as usize;
    let traj = if ode_steps == 0 {
        vec![m0.to_vec()]
    } else {
        integrate_ode(rhs, &m0.to_vec(), cfg.ode_dt, ode_steps)?
    };

    let mut csv = String::from("t,source,m_u,m_v,m_phase_norm,m_principal_norm,omega_perp\n");
    let stride = (traj.len() / 400).max(1);
    for (i, row) in traj.iter().enumerate() {
        if i % stride != 0 && i != traj.len() - 1 {
            continue;
        }
        let s = OverlapState::from_vec(row, m, r0)?;
        let _ = writeln!(
            csv,
            "{:.9e},ode,{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            i as f64 * cfg.ode_dt,
            s.alpha_u,
            s.alpha_v,
            s.phase_norm(),
            s.principal_norm(),
            s.omega_perp
        );
    }
    for r in &emp {
        let _ = writeln!(
            csv,
            "{:.9e},sgd,{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            r.t, r.m_u, r.m_v, r.phase, r.principal, r.omega
        );
    }
    bundle.add_csv("ode_compare.csv", csv.as_bytes())?;

    if plots {
        let ode_phase: Vec<(f64, f64)> = traj
            .iter()
            .enumerate()
            .step_by(stride)
            .map(|(i, row)| {
                (i as f64 * cfg.ode_dt, row[0].hypot(row[1]))
            })
            .collect();
        let series = [
            Series { label: "ode phase m-norm".into(), points: ode_phase },
            Series {
                label: "sgd phase m-norm".into(),
                points: emp.iter().map(|r| (r.t, r.phase)).collect(),
            },
        ];
        bundle.add_plot(
            "ode_compare.svg",
            &plot::line_chart("rescaled dynamics vs drift ODE", "t = step * delta", "sqrt(N) * overlap", false, &series),
        )?;
    }
    let end_ode = traj.last().map(|row| row[0].hypot(row[1])).unwrap_or(f64::NAN);
    let end_sgd = emp.last().map(|r| r.phase).unwrap_or(f64::NAN);
    println!(
        "t = {:.3}: phase m-norm ode {:.4}, sgd median {:.4}",
        t_max, end_ode, end_sgd
    );
    Ok(())
}

/// Load the configured corpus or synthesize the two-class phase corpus.
pub fn acquire_corpus(cfg: &ExperimentConfig) -> Result<(Vec<ImagePatch>, Vec<String>)> {
    if let Some(path) = &cfg.corpus {
        surgery::load_corpus(path)
    } else if cfg.synthesize {
        synth_phase_corpus(cfg)
    } else {
        Err(Error::InvalidArgument(
            "this experiment needs corpus = <dir> or synthesize = true".into(),
        ))
    }
}

/// Two classes of 1-D model signals reshaped to patches: both share the
/// configured covariance spectrum; only the planted class concentrates the
/// mode-k0 phase. Labels: 0 baseline, 1 planted.
pub fn synth_phase_corpus(cfg: &ExperimentConfig) -> Result<(Vec<ImagePatch>, Vec<String>)> {
    let (spectrum, _) = cfg.spectrum.build(cfg.n, cfg.k0, &[])?;
    let sampler = ModelSampler::new(spectrum, cfg.plant())?;
    let (h, w) = (cfg.patch, cfg.n / cfg.patch);
    let mut rng_base = stream(cfg.seed_base, 7001);
    let mut rng_plant = stream(cfg.seed_base, 7002);
    let mut patches = Vec::with_capacity(2 * cfg.per_class);
    for _ in 0..cfg.per_class {
        patches.push(ImagePatch::new(h, w, sampler.sample_baseline(&mut rng_base), 0)?);
        patches.push(ImagePatch::new(h, w, sampler.sample_planted(&mut rng_plant).x, 1)?);
    }
    Ok((patches, vec!["baseline".into(), "planted".into()]))
}

pub struct Variants {
    pub class_names: Vec<String>,
    pub original: Vec<ImagePatch>,
    pub flattened: Vec<ImagePatch>,
    pub transplanted: Vec<ImagePatch>,
}

impl Variants {
    pub fn sets(&self) -> [(&'static str, &Vec<ImagePatch>); 3] {
        [
            ("original", &self.original),
            ("flattened", &self.flattened),
            ("transplanted", &self.transplanted),
        ]
    }
}

/// Normalize the corpus and materialize the three spectral variants. Every
/// variant is renormalized to the common patch norm so the trainer sees
/// amplitude structure, not gross scale.
pub fn build_variants(mut patches: Vec<ImagePatch>, class_names: Vec<String>) -> Result<Variants> {
    if class_names.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "amplitude transplant needs exactly two classes, got {}",
            class_names.len()
        )));
    }
    surgery::normalize_corpus(&mut patches)?;

    let mut flattened: Vec<ImagePatch> = patches.iter().map(surgery::flatten_amplitudes).collect();
    surgery::normalize_corpus(&mut flattened)?;

    let by_class: [Vec<ImagePatch>; 2] = [
        patches.iter().filter(|p| p.class_label == 0).cloned().collect(),
        patches.iter().filter(|p| p.class_label == 1).cloned().collect(),
    ];
    for (label, class) in by_class.iter().enumerate() {
        if class.is_empty() {
            return Err(Error::EmptyClass { label });
        }
    }
    let mut transplanted = Vec::with_capacity(patches.len());
    let mut within = [0usize; 2];
    for p in &patches {
        let donors = &by_class[1 - p.class_label];
        let idx = within[p.class_label] % donors.len();
        within[p.class_label] += 1;
        transplanted.push(surgery::transplant_amplitudes(donors, p, idx)?);
    }
    surgery::normalize_corpus(&mut transplanted)?;

    Ok(Variants { class_names, original: patches, flattened, transplanted })
}

fn run_surgery(cfg: &ExperimentConfig, bundle: &mut ResultBundle, plots: bool) -> Result<()> {
    let (patches, names) = acquire_corpus(cfg)?;
    let variants = build_variants(patches, names)?;
    for (vname, set) in variants.sets() {
        let dir = bundle.out_dir.join(format!("corpus_{vname}"));
        surgery::save_corpus(&dir, set, &variants.class_names)?;
        bundle.register_tree(&dir)?;
        let mut series = Vec::new();
        for (ci, cname) in variants.class_names.iter().enumerate() {
            let class: Vec<ImagePatch> =
                set.iter().filter(|p| p.class_label == ci).cloned().collect();
            let profile = surgery::radial_spectrum(&class)?;
            let csv_name = format!("spectrum_{vname}_{cname}.csv");
            profile.write_csv(&bundle.out_dir.join(&csv_name))?;
            bundle.register_csv(&csv_name);
            series.push(Series {
                label: cname.clone(),
                points: profile
                    .bins
                    .iter()
                    .zip(&profile.mean_sq_amplitude)
                    .map(|(&k, &a)| (k, a))
                    .collect(),
            });
            println!(
                "{vname}/{cname}: {} patches, radial bins {}",
                class.len(),
                profile.bins.len()
            );
        }
        if plots {
            bundle.add_plot(
                &format!("spectrum_{vname}.svg"),
                &plot::line_chart(
                    &format!("radial power spectrum, {vname}"),
                    "|k|",
                    "mean squared amplitude",
                    false,
                    &series,
                ),
            )?;
        }
    }
    Ok(())
}

/// First epoch at which the training loss has given up half its total drop.
pub fn onset_epoch(losses: &[f64]) -> usize {
    let l0 = losses[0];
    let lend = *losses.last().expect("at least the untrained row");
    let target = l0 - 0.5 * (l0 - lend);
    losses
        .iter()
        .position(|&l| l <= target)
        .expect("the final loss always qualifies")
}

fn run_texture_train(cfg: &ExperimentConfig, bundle: &mut ResultBundle, plots: bool) -> Result<()> {
    let (patches, names) = acquire_corpus(cfg)?;
    let variants = build_variants(patches, names)?;
    let act = cfg.activation.activation();

    let mut onset_csv = String::from("variant,seed,onset_epoch,loss_initial,loss_final\n");
    let mut gaps_csv = String::from("variant,seed,gap_first_decile,gap_last_decile\n");
    let mut loss_series = Vec::new();
    let mut onset_medians = Vec::new();
    let mut original_last_gaps = Vec::new();
    for (vname, set) in variants.sets() {
        let reports =
            net::train_many(set, cfg.hidden, act, cfg.lr, cfg.epochs, cfg.seed_base, cfg.seeds)?;
        let csv_name = format!("train_{vname}.csv");
        net::write_train_csv(&bundle.out_dir.join(&csv_name), &reports)?;
        bundle.register_csv(&csv_name);

        let first_decile = (cfg.epochs / 10).max(1);
        let mut onsets = Vec::new();
        for report in &reports {
            let losses: Vec<f64> = report.rows.iter().map(|r| r.eval.loss_orig).collect();
            let onset = onset_epoch(&losses);
            onsets.push(onset as f64);
            let _ = writeln!(
                onset_csv,
                "{vname},{},{onset},{:.9e},{:.9e}",
                report.seed,
                losses[0],
                losses.last().unwrap()
            );
            let gap = |row: &net::EpochStats| row.eval.loss_swapped - row.eval.loss_orig;
            let g1 = gap(&report.rows[first_decile]);
            let g2 = gap(report.rows.last().unwrap());
            let _ = writeln!(gaps_csv, "{vname},{},{:.9e},{:.9e}", report.seed, g1, g2);
            if vname == "original" {
                original_last_gaps.push(g2);
            }
        }
        let med_onset = quantile(&onsets, 0.5)?;
        onset_medians.push((vname, med_onset));
        println!("{vname}: median 50%-drop onset at epoch {med_onset}");

        // median training loss per epoch across seeds
        let pts: Vec<(f64, f64)> = (0..=cfg.epochs)
            .map(|e| {
                let at: Vec<f64> = reports.iter().map(|r| r.rows[e].eval.loss_orig).collect();
                (e as f64, quantile(&at, 0.5).expect("seeds >= 1"))
            })
            .collect();
        loss_series.push(Series { label: vname.to_string(), points: pts });
    }
    bundle.add_csv("onset.csv", onset_csv.as_bytes())?;
    bundle.add_csv("gaps.csv", gaps_csv.as_bytes())?;
    if plots {
        bundle.add_plot(
            "loss_curves.svg",
            &plot::line_chart("median training loss per variant", "epoch", "loss", false, &loss_series),
        )?;
    }
    if original_last_gaps.len() >= 2 {
        println!(
            "original swapped-loss gap, final epoch: t = {:.3} over {} seeds",
            t_statistic(&original_last_gaps)?,
            original_last_gaps.len()
        );
    }
    let by_name = |want: &str| {
        onset_medians.iter().find(|(n, _)| *n == want).map(|(_, v)| *v).unwrap_or(f64::NAN)
    };
    let (orig, flat, trans) = (by_name("original"), by_name("flattened"), by_name("transplanted"));
    println!(
        "onset ordering: original {orig}, transplanted {trans}, flattened {flat} ({})",
        if flat > orig.max(trans) { "flattened latest" } else { "no strict flattened delay" }
    );
    Ok(())
}
