//! The five laboratory workflows behind the CLI subcommands. Each one takes
//! a validated [`RunConfig`], writes its data files into an output
//! directory, and returns a JSON summary (also written to disk) that embeds
//! the hash of the resolved configuration.

use std::path::Path;

use beamslider_core::contact::{
    initial_state_on_branch, simulate_into, ContactModel, SimMode, SimulationSetup, StepSettings,
    SystemState, Trajectory,
};
use beamslider_core::locomotion::{
    inactivity_check, lambda_coefficients, pendulum_table, pitch_limit, pitch_transport,
    slip_per_cycle, stick_slip_predictor, Activity, BranchPhase, CaseConditions,
};
use beamslider_core::rom::{rom_coefficients, BeamParameters, ModeShape, SliderParameters};
use beamslider_core::ssim::{self, BranchLabel, ExcitationParameters};
use serde_json::json;

use crate::config::{InitialConfig, RunConfig, SimConfig, SweepDirection};
use crate::error::{LabError, Result};
use crate::formats::{self, SweepRow};
use crate::signal;

/// Reference vibration states of the three signature-move situations
/// (dimensionless, measured at the slider position).
pub fn reference_case(n: usize) -> CaseConditions {
    match n {
        1 => CaseConditions {
            s: 0.27,
            displacement: 0.0011,
            slope: 0.0053,
            curvature: 0.0086,
            q_hat: 0.0018,
            amplitude_ratio: 1.43,
        },
        2 => CaseConditions {
            s: 0.27,
            displacement: 0.0050,
            slope: 0.0246,
            curvature: 0.0400,
            q_hat: 0.0083,
            amplitude_ratio: 1.43,
        },
        3 => CaseConditions {
            s: 0.33,
            displacement: 0.0090,
            slope: 0.0296,
            curvature: 0.1171,
            q_hat: 0.0117,
            amplitude_ratio: 1.27,
        },
        _ => panic!("reference cases are 1..=3"),
    }
}

fn ensure_outdir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn sim_section(config: &RunConfig) -> Result<&SimConfig> {
    config
        .sim
        .as_ref()
        .ok_or_else(|| LabError::Config("this workflow needs a `sim` section".into()))
}

fn build_model(config: &RunConfig, n_modes: usize) -> Result<ContactModel> {
    Ok(ContactModel::new(
        config.beam.to_core(),
        config.slider.to_core(),
        n_modes,
    )?)
}

fn initial_state(
    model: &ContactModel,
    exc: &ExcitationParameters,
    s0: f64,
    initial: InitialConfig,
) -> Result<SystemState> {
    Ok(match initial {
        InitialConfig::Rest => SystemState::at_rest(model, s0),
        InitialConfig::LowBranch => {
            initial_state_on_branch(model, exc, s0, beamslider_core::contact::BranchSelect::Low)?
        }
        InitialConfig::HighBranch => {
            initial_state_on_branch(model, exc, s0, beamslider_core::contact::BranchSelect::High)?
        }
    })
}

/// Analytical amplitude branches over the slider position.
pub fn run_ssim(config: &RunConfig, out: &Path) -> Result<serde_json::Value> {
    ensure_outdir(out)?;
    let section = config.ssim.clone().unwrap_or_default();
    let beam = config.beam.to_core();
    let slider = config.slider.to_core();
    let exc = config.excitation.to_dimensionless(&beam)?;
    if section.points < 2 || !(section.s_stop > section.s_start) {
        return Err(LabError::Config(
            "ssim grid must have at least 2 increasing points".into(),
        ));
    }
    let grid: Vec<f64> = (0..section.points)
        .map(|i| {
            section.s_start
                + (section.s_stop - section.s_start) * i as f64 / (section.points - 1) as f64
        })
        .collect();
    let sweep = ssim::sweep_ssim(&beam, &slider, &exc, &grid, section.station)?;
    formats::write_branches_csv(&out.join("branches.csv"), &sweep, &beam)?;

    // Qualitative structure for the summary: does a closed low/intermediate
    // bubble exist, and does any stable point touch the backbone?
    let low_branch = sweep.branches.iter().find(|b| b.label == BranchLabel::Low);
    let bubble = low_branch.is_some_and(|b| {
        let s0 = b.points.first().map(|p| p.s).unwrap_or(0.0);
        let s1 = b.points.last().map(|p| p.s).unwrap_or(1.0);
        s0 > grid[0] + 1e-9 && s1 < grid[grid.len() - 1] - 1e-9
    });
    let mut backbone_touches = 0usize;
    for branch in &sweep.branches {
        for p in &branch.points {
            let c = rom_coefficients(&beam, &slider, p.s)?;
            if let Some(bb) = ssim::backbone_amplitude(&c, exc.frequency_ratio) {
                if (p.amplitude - bb).abs() < 1e-9 {
                    backbone_touches += 1;
                }
            }
        }
    }
    let summary = json!({
        "workflow": "ssim",
        "config_sha256": config.hash(),
        "grid_points": grid.len(),
        "branches": sweep.branches.iter().map(|b| json!({
            "label": match b.label {
                BranchLabel::Low => "low",
                BranchLabel::Intermediate => "intermediate",
                BranchLabel::High => "high",
            },
            "points": b.points.len(),
            "s_first": b.points.first().map(|p| p.s),
            "s_last": b.points.last().map(|p| p.s),
        })).collect::<Vec<_>>(),
        "turning_points": sweep.turning_points,
        "isolated_bubble": bubble,
        "backbone_intersections": backbone_touches,
        "station": section.station,
    });
    formats::write_json(&out.join("ssim_summary.json"), &summary)?;
    Ok(summary)
}

/// Shared post-pass over a simulated trajectory.
pub struct TrajectoryAnalysis {
    pub envelope_mean_over_h: f64,
    pub envelope_rel_fluctuation: f64,
    pub mean_ds_per_period: f64,
    pub pitch_hits_per_period: f64,
    pub pitch_hits: usize,
    pub phase_rad: Option<f64>,
    pub spectrum_peaks: Vec<signal::SpectrumPeak>,
    pub modulation_period_periods: Option<f64>,
}

/// Envelope, transport, contact statistics, phase and spectrum of the
/// trajectory tail starting at `skip_s`.
pub fn analyze_trajectory(
    traj: &Trajectory,
    beam: &BeamParameters,
    slider: &SliderParameters,
    skip_s: f64,
) -> Result<TrajectoryAnalysis> {
    let t0 = traj.samples.first().map(|s| s.time).unwrap_or(0.0);
    let skip_idx = traj
        .samples
        .iter()
        .position(|s| s.time >= t0 + skip_s)
        .unwrap_or(0);
    let tail = &traj.samples[skip_idx..];
    if tail.len() < 32 {
        return Err(LabError::Signal("analysis segment too short".into()));
    }
    let times: Vec<f64> = tail.iter().map(|s| s.time).collect();
    let total: Vec<f64> = tail.iter().map(|s| s.elastic + s.base).collect();
    let fs = 1.0 / traj.sample_dt;
    let period = traj.excitation.period();

    // Envelope on the raw analytic magnitude smoothed over ~2 excitation
    // periods: slow enough to drop the carrier, fast enough to resolve the
    // modulation.
    let env = signal::envelope(&total, fs, 2.0 * period)?;
    let margin = (env.len() / 10).max(1);
    let env_core = &env[margin..env.len() - margin];
    let env_mean = env_core.iter().sum::<f64>() / env_core.len() as f64;
    let env_fluct = {
        let var = env_core
            .iter()
            .map(|&v| (v - env_mean) * (v - env_mean))
            .sum::<f64>()
            / env_core.len() as f64;
        var.sqrt() / env_mean
    };

    // Cut the analysis window so the trajectory-based series exist even for
    // short runs.
    let transport = signal::transport_per_period(traj)?;
    let tail_periods = ((times[times.len() - 1] - times[0]) / period).floor() as usize;
    let ds_tail: Vec<f64> = transport
        .ds
        .iter()
        .rev()
        .take(tail_periods.max(1))
        .cloned()
        .collect();
    let mean_ds = ds_tail.iter().sum::<f64>() / ds_tail.len().max(1) as f64;

    let sub = Trajectory {
        samples: tail.to_vec(),
        ..traj.clone()
    };
    let (_eps, stats) =
        signal::classify_contacts(&sub, slider.gap, slider.contact_spacing, beam.thickness)?;

    let phase = signal::phase_relation(&times, &total, traj.excitation.omega).ok();

    let peaks = if total.len() >= signal::SPECTRUM_MIN_SAMPLES {
        signal::spectrum(&total, fs, 0.05)?
    } else {
        Vec::new()
    };
    // Modulation period from the two dominant peaks (carrier and its
    // neighbor): 1 / |f1 - f2| in units of the excitation period.
    let modulation = if peaks.len() >= 2 {
        let df = (peaks[0].frequency - peaks[1].frequency).abs();
        if df > 0.0 {
            Some(1.0 / df / period)
        } else {
            None
        }
    } else {
        None
    };

    Ok(TrajectoryAnalysis {
        envelope_mean_over_h: env_mean / beam.thickness,
        envelope_rel_fluctuation: env_fluct,
        mean_ds_per_period: mean_ds,
        pitch_hits_per_period: stats.pitch_hits_per_period,
        pitch_hits: stats.pitch_hits,
        phase_rad: phase,
        spectrum_peaks: peaks,
        modulation_period_periods: modulation,
    })
}

/// Run the contact simulation configured in `sim` (with optional warm-up
/// continuation) and return the trajectory of the main segment.
pub fn run_simulation(config: &RunConfig) -> Result<(ContactModel, Trajectory)> {
    let sim = sim_section(config)?;
    let model = build_model(config, sim.n_modes)?;
    let beam = config.beam.to_core();
    let exc_dimless = config.excitation.to_dimensionless(&beam)?;
    let excitation = model.excitation_from(&exc_dimless);
    let dt = sim.dt_s.unwrap_or_else(|| config.default_dt());
    let settings = StepSettings::default();

    let warm_s = sim.warmup.first().map(|w| w.s_prescribed);
    let start_s = warm_s.unwrap_or(sim.s_position);
    let mut state = if excitation.amplitude == 0.0 {
        SystemState::at_rest(&model, start_s)
    } else {
        initial_state(&model, &exc_dimless, start_s, sim.initial)?
    };

    for warm in &sim.warmup {
        let setup = SimulationSetup {
            mode: SimMode::Pcs {
                s_prescribed: warm.s_prescribed,
            },
            excitation,
            duration: warm.duration_s,
            stride: sim.stride,
            station: sim.station,
            settings,
        };
        simulate_into(&model, &setup, dt, &mut state)?;
    }
    if !sim.warmup.is_empty() {
        // Re-center the transport diagnostic on the main position.
        let (x_q, _) = state.q_position(&model);
        state.x_com += sim.s_position * model.beam.length - x_q;
    }

    let setup = SimulationSetup {
        mode: sim.mode(),
        excitation,
        duration: sim.duration_s,
        stride: sim.stride,
        station: sim.station,
        settings,
    };
    let traj = simulate_into(&model, &setup, dt, &mut state)?;
    Ok((model, traj))
}

/// Time-domain simulation plus the standard analysis pass.
pub fn run_simulate(config: &RunConfig, out: &Path) -> Result<serde_json::Value> {
    ensure_outdir(out)?;
    let sim = sim_section(config)?.clone();
    let beam = config.beam.to_core();
    let slider = config.slider.to_core();
    let (_model, traj) = run_simulation(config)?;
    formats::write_trajectory_csv(&out.join("trajectory.csv"), &traj, beam.thickness)?;

    let skip = sim.analysis_skip_s.unwrap_or(0.3 * sim.duration_s);
    let analysis = analyze_trajectory(&traj, &beam, &slider, skip)?;

    let times: Vec<f64> = traj.samples.iter().map(|s| s.time).collect();
    let total: Vec<f64> = traj.samples.iter().map(|s| s.elastic + s.base).collect();
    if let Ok(env) = signal::envelope(&total, 1.0 / traj.sample_dt, 2.0 * traj.excitation.period())
    {
        formats::write_envelope_csv(&out.join("envelope.csv"), &times, &env)?;
    }
    if !analysis.spectrum_peaks.is_empty() {
        formats::write_spectrum_csv(&out.join("spectrum.csv"), &analysis.spectrum_peaks)?;
    }
    if let Ok(transport) = signal::transport_per_period(&traj) {
        formats::write_transport_csv(&out.join("transport.csv"), &transport)?;
    }
    let (episodes, _stats) =
        signal::classify_contacts(&traj, slider.gap, slider.contact_spacing, beam.thickness)?;
    formats::write_episodes_csv(&out.join("episodes.csv"), &episodes)?;

    let summary = json!({
        "workflow": "simulate",
        "config_sha256": config.hash(),
        "duration_s": sim.duration_s,
        "n_modes": sim.n_modes,
        "mode": sim.mode,
        "s_position": sim.s_position,
        "envelope_mean_over_h": analysis.envelope_mean_over_h,
        "envelope_rel_fluctuation": analysis.envelope_rel_fluctuation,
        "mean_ds_per_period": analysis.mean_ds_per_period,
        "pitch_hits_per_period": analysis.pitch_hits_per_period,
        "pitch_hits": analysis.pitch_hits,
        "phase_rad": analysis.phase_rad,
        "modulation_period_periods": analysis.modulation_period_periods,
        "spectrum_peaks": analysis.spectrum_peaks.iter().take(6).map(|p| json!({
            "frequency_hz": p.frequency, "amplitude": p.amplitude
        })).collect::<Vec<_>>(),
    });
    formats::write_json(&out.join("analysis.json"), &summary)?;
    Ok(summary)
}

/// Steady-state amplitude at one prescribed position: simulate in
/// window-long chunks until two consecutive envelope means agree within the
/// tolerance (or the budget runs out), carrying the state across chunks.
fn settle_point(
    model: &ContactModel,
    excitation: beamslider_core::contact::Excitation,
    state: &mut SystemState,
    s: f64,
    dt: f64,
    window_s: f64,
    steady_tol: f64,
    cap_s: f64,
    station: f64,
) -> Result<(f64, bool, f64)> {
    let setup = SimulationSetup {
        mode: SimMode::Pcs { s_prescribed: s },
        excitation,
        duration: window_s,
        stride: 8,
        station,
        settings: StepSettings::default(),
    };
    let mut prev_mean: Option<f64> = None;
    let mut simulated = 0.0;
    let mut amplitude = 0.0;
    let mut steady = false;
    while simulated < cap_s - 0.5 * window_s {
        let traj = simulate_into(model, &setup, dt, state)?;
        simulated += window_s;
        let total: Vec<f64> = traj.samples.iter().map(|p| p.elastic + p.base).collect();
        let mag = signal::analytic_magnitude(&total);
        // The chunk boundaries carry spectral-leakage artifacts of the
        // finite analytic-signal transform; statistics use the interior.
        let trim = mag.len() / 10;
        let core = &mag[trim..mag.len() - trim];
        let mean = core.iter().sum::<f64>() / core.len() as f64;
        // The reported amplitude is a robust peak statistic (90th
        // percentile of the analytic magnitude): for an almost periodic
        // response it coincides with the envelope, while for a strongly
        // modulated one it measures the burst level that the balance
        // amplitude describes, which the window mean would understate.
        let mut sorted = core.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        amplitude = sorted[(0.9 * (sorted.len() - 1) as f64) as usize];
        if let Some(prev) = prev_mean {
            if (mean - prev).abs() <= steady_tol * mean.abs().max(1e-30) {
                steady = true;
                break;
            }
        }
        prev_mean = Some(mean);
    }
    Ok((amplitude, steady, simulated))
}

/// Numerical amplitude map by stepwise continuation of the prescribed
/// slider position, forward and/or backward, with homogeneous initial
/// conditions at the very first point.
pub fn run_pcs_sweep(config: &RunConfig, out: &Path) -> Result<serde_json::Value> {
    ensure_outdir(out)?;
    let sweep = config
        .sweep
        .clone()
        .ok_or_else(|| LabError::Config("this workflow needs a `sweep` section".into()))?;
    if sweep.points < 2 {
        return Err(LabError::Config("sweep needs at least two points".into()));
    }
    let beam = config.beam.to_core();
    let exc_dimless = config.excitation.to_dimensionless(&beam)?;
    let model = build_model(config, sweep.n_modes)?;
    let excitation = model.excitation_from(&exc_dimless);
    let dt = config.default_dt();
    let shape = ModeShape::for_mode(1)?;
    let station_ratio = shape.center_ratio(sweep.station)?;

    let grid: Vec<f64> = (0..sweep.points)
        .map(|i| {
            sweep.s_start + (sweep.s_stop - sweep.s_start) * i as f64 / (sweep.points - 1) as f64
        })
        .collect();
    let mut rows: Vec<SweepRow> = Vec::new();
    let mut run_direction = |dir: &'static str, order: Vec<f64>| -> Result<()> {
        let mut state = SystemState::at_rest(&model, order[0]);
        for &s in &order {
            // The transport diagnostic is re-anchored at each grid point.
            let (x_q, _) = state.q_position(&model);
            state.x_com += s * model.beam.length - x_q;
            let (amp, steady, simulated) = settle_point(
                &model,
                excitation,
                &mut state,
                s,
                dt,
                sweep.window_s,
                sweep.steady_rel_tol,
                sweep.max_seconds_per_point,
                sweep.station,
            )?;
            rows.push(SweepRow {
                direction: dir,
                s,
                amplitude_over_h: amp / beam.thickness,
                q_hat_equivalent: amp / (beam.length * station_ratio),
                steady,
                simulated_s: simulated,
            });
        }
        Ok(())
    };
    match sweep.direction {
        SweepDirection::Forward => run_direction("forward", grid.clone())?,
        SweepDirection::Backward => {
            run_direction("backward", grid.iter().rev().cloned().collect())?
        }
        SweepDirection::Both => {
            run_direction("forward", grid.clone())?;
            run_direction("backward", grid.iter().rev().cloned().collect())?;
        }
    }
    formats::write_sweep_csv(&out.join("pcs_sweep.csv"), &rows)?;

    // Largest amplitude jump of the backward pass locates the fold.
    let mut jump: Option<(f64, f64)> = None;
    let backward: Vec<&SweepRow> = rows.iter().filter(|r| r.direction == "backward").collect();
    for pair in backward.windows(2) {
        let d = (pair[1].amplitude_over_h - pair[0].amplitude_over_h).abs();
        if jump.map_or(true, |(_, best)| d > best) {
            jump = Some((0.5 * (pair[0].s + pair[1].s), d));
        }
    }
    let summary = json!({
        "workflow": "pcs-sweep",
        "config_sha256": config.hash(),
        "points": grid.len(),
        "direction": sweep.direction,
        "n_modes": sweep.n_modes,
        "backward_jump_s": jump.map(|(s, _)| s),
        "backward_jump_height_over_h": jump.map(|(_, d)| d),
        "unsteady_points": rows.iter().filter(|r| !r.steady).count(),
    });
    formats::write_json(&out.join("sweep_summary.json"), &summary)?;
    Ok(summary)
}

/// Closed-form locomotion report for the three reference cases.
pub fn run_locomotion_report(config: &RunConfig, out: &Path) -> Result<serde_json::Value> {
    ensure_outdir(out)?;
    let beam = config.beam.to_core();
    let slider = config.slider.to_core();
    let omega_exc = config.excitation.omega();

    let beta_lim = pitch_limit(slider.contact_spacing, slider.gap, beam.thickness)?;
    let transport = pitch_transport(
        slider.contact_spacing,
        slider.gap,
        beam.thickness,
        beam.length,
    )?;
    let (lambda_o, lambda_u) = lambda_coefficients(&slider);
    let pendulums: Vec<_> = pendulum_table(&slider)
        .into_iter()
        .map(|p| {
            json!({
                "contact": format!("P{}", p.contact.index() + 1),
                "length_over_l": p.length / beam.length,
                "sigma_rad": p.sigma,
                "inertia_ratio": p.inertia_ratio,
                "zeta_z": p.zeta_z,
                "zeta_x": p.zeta_x,
            })
        })
        .collect();

    let mut cases = Vec::new();
    for n in 1..=3 {
        let case = reference_case(n);
        let slip = slip_per_cycle(&case, &slider, &beam)?;
        let verdicts = stick_slip_predictor(&slider, &case);
        // Phase convention per branch: case 1 rides the anti-phase branch,
        // cases 2-3 the in-phase branch.
        let phase = if n == 1 {
            BranchPhase::AntiPhase
        } else {
            BranchPhase::InPhase
        };
        let activity = inactivity_check(
            config.excitation.amplitude_m,
            omega_exc,
            case.displacement * beam.length,
            phase,
        );
        cases.push(json!({
            "case": n,
            "s": case.s,
            "q_hat": case.q_hat,
            "ds_slope": slip.slope,
            "ds_rock": slip.rock,
            "slope_ratio": verdicts.slope_ratio,
            "slope_alone": verdicts.slope_alone,
            "rocking_upper": verdicts.rocking_upper,
            "rocking_lower": verdicts.rocking_lower,
            "rocking_enables_slope": verdicts.rocking_enables_slope,
            "gravity_verdict": match activity {
                Activity::Active => "active",
                Activity::Marginal => "marginal",
                Activity::Inactive => "inactive",
            },
        }));
    }
    let summary = json!({
        "workflow": "locomotion-report",
        "config_sha256": config.hash(),
        "pitch_limit_rad": beta_lim,
        "pitch_limit_deg": beta_lim.to_degrees(),
        "ds_pitch_exact": transport.exact,
        "ds_pitch_small_angle": transport.small_angle,
        "lambda_upper": lambda_o,
        "lambda_lower": lambda_u,
        "pendulums": pendulums,
        "cases": cases,
    });
    formats::write_json(&out.join("locomotion_report.json"), &summary)?;
    Ok(summary)
}

/// Long free-slider run reproducing the signature move: outward drift on
/// the low branch, amplitude jump, inward drift, stop near the dynamic
/// equilibrium. Emits `signature.csv` (t, s, envelope/h) and a summary with
/// the phase boundaries; exceeding the budget before the slider stops is
/// flagged as a partial result.
pub fn run_signature_move(config: &RunConfig, out: &Path) -> Result<serde_json::Value> {
    ensure_outdir(out)?;
    let sig = config
        .signature
        .clone()
        .ok_or_else(|| LabError::Config("this workflow needs a `signature` section".into()))?;
    let beam = config.beam.to_core();
    let slider = config.slider.to_core();
    let exc_dimless = config.excitation.to_dimensionless(&beam)?;
    let model = build_model(config, sig.n_modes)?;
    let excitation = model.excitation_from(&exc_dimless);
    let dt = config.default_dt();
    let period = excitation.period();
    let ds_pitch = pitch_transport(
        slider.contact_spacing,
        slider.gap,
        beam.thickness,
        beam.length,
    )?
    .small_angle;

    let chunk_s = 1.0;
    let mut state = SystemState::at_rest(&model, sig.s0);
    let mut times = Vec::new();
    let mut s_series = Vec::new();
    let mut env_series = Vec::new();
    let mut window_means: Vec<(f64, f64, f64)> = Vec::new(); // (t_mid, mean ds/period, env mean)
    let mut stopped_windows = 0usize;
    let mut simulated = 0.0;
    let mut stopped = false;
    while simulated < sig.budget_s {
        let setup = SimulationSetup {
            mode: SimMode::FreeSlider,
            excitation,
            duration: chunk_s,
            stride: 8,
            station: 4.0 / 7.0,
            settings: StepSettings::default(),
        };
        let traj = simulate_into(&model, &setup, dt, &mut state)?;
        simulated += chunk_s;
        let total: Vec<f64> = traj.samples.iter().map(|p| p.elastic + p.base).collect();
        let mag = signal::analytic_magnitude(&total);
        let env_mean = mag.iter().sum::<f64>() / mag.len() as f64;
        let s_start = traj.samples.first().unwrap().s;
        let s_end = traj.samples.last().unwrap().s;
        let ds_per_period = (s_end - s_start) / (chunk_s / period);
        window_means.push((
            traj.samples[0].time + 0.5 * chunk_s,
            ds_per_period,
            env_mean,
        ));
        for p in traj.samples.iter().step_by(4) {
            times.push(p.time);
            s_series.push(p.s);
            env_series.push(env_mean / beam.thickness);
        }
        // Stopped: drift below 5% of the pitching transport for several
        // consecutive windows, at high vibration level.
        if ds_per_period.abs() < 0.05 * ds_pitch && env_mean / beam.thickness > 0.5 {
            stopped_windows += 1;
            if stopped_windows >= sig.stop_windows {
                stopped = true;
                break;
            }
        } else {
            stopped_windows = 0;
        }
    }
    formats::write_signature_csv(&out.join("signature.csv"), &times, &s_series, &env_series)?;

    // Phase boundaries from the window series: the jump is the largest
    // envelope increase; phase 1 is the outward drift before it, phase 2 the
    // inward drift after it, phase 3 from the stop detector.
    let jump_idx = window_means
        .windows(2)
        .enumerate()
        .max_by(|a, b| {
            let da = a.1[1].2 - a.1[0].2;
            let db = b.1[1].2 - b.1[0].2;
            da.partial_cmp(&db).unwrap()
        })
        .map(|(i, _)| i + 1);
    let s_stop = s_series.last().cloned();
    let summary = json!({
        "workflow": "signature-move",
        "config_sha256": config.hash(),
        "s0": sig.s0,
        "n_modes": sig.n_modes,
        "budget_s": sig.budget_s,
        "simulated_s": simulated,
        "stopped": stopped,
        "partial": !stopped,
        "s_stop": s_stop,
        "jump_time_s": jump_idx.map(|i| window_means[i].0),
        "windows": window_means.iter().map(|(t, ds, env)| json!({
            "t_mid_s": t, "ds_per_period": ds, "envelope_over_h": env / beam.thickness
        })).collect::<Vec<_>>(),
    });
    formats::write_json(&out.join("signature_summary.json"), &summary)?;
    Ok(summary)
}

/// Dispatch by subcommand name (the CLI's work horse).
pub fn run_workflow(name: &str, config: &RunConfig, out: &Path) -> Result<serde_json::Value> {
    match name {
        "ssim" => run_ssim(config, out),
        "simulate" => run_simulate(config, out),
        "pcs-sweep" => run_pcs_sweep(config, out),
        "locomotion-report" => run_locomotion_report(config, out),
        "signature-move" => run_signature_move(config, out),
        other => Err(LabError::Config(format!("unknown workflow `{other}`"))),
    }
}
