//! CSV and JSON output. Column orders are fixed and documented in
//! `docs/formats.md`; numeric values carry 12 significant digits so output
//! files can serve as bit-stable regression baselines.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use beamslider_core::contact::Trajectory;
use beamslider_core::rom::{BeamParameters, ModeShape};
use beamslider_core::ssim::{station_amplitude_over_h, BranchLabel, SsimSweep, Stability};

use crate::error::Result;
use crate::signal::{ContactEpisode, EpisodeLabel, SpectrumPeak, TransportSeries};

/// 12 significant digits.
pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.11e}")
    }
}

fn label_str(label: BranchLabel) -> &'static str {
    match label {
        BranchLabel::Low => "low",
        BranchLabel::Intermediate => "intermediate",
        BranchLabel::High => "high",
    }
}

fn stability_str(s: Stability) -> &'static str {
    match s {
        Stability::Stable => "stable",
        Stability::Unstable => "unstable",
    }
}

fn episode_label_str(label: EpisodeLabel) -> String {
    match label {
        EpisodeLabel::FreeFlight => "free_flight".into(),
        EpisodeLabel::Single(p) => format!("single_p{}", p.index() + 1),
        EpisodeLabel::DoubleUpper => "double_upper".into(),
        EpisodeLabel::DoubleLower => "double_lower".into(),
        EpisodeLabel::DiagonalP1P3 => "diagonal_p1p3".into(),
        EpisodeLabel::DiagonalP2P4 => "diagonal_p2p4".into(),
        EpisodeLabel::Multi => "multi".into(),
    }
}

/// Amplitude-branch export: one row per branch point.
pub fn write_branches_csv(path: &Path, sweep: &SsimSweep, beam: &BeamParameters) -> Result<()> {
    let shape = ModeShape::for_mode(1).map_err(crate::error::LabError::from)?;
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "s,q_hat,theta_rad,stability,branch_label,w_hat_over_h_at_station"
    )?;
    for branch in &sweep.branches {
        for p in &branch.points {
            let station = station_amplitude_over_h(&shape, beam, sweep.station, p.amplitude)
                .map_err(crate::error::LabError::from)?;
            writeln!(
                w,
                "{},{},{},{},{},{}",
                fmt(p.s),
                fmt(p.amplitude),
                fmt(p.phase),
                stability_str(p.stability),
                label_str(p.label),
                fmt(station)
            )?;
        }
    }
    Ok(())
}

/// Trajectory export. `ds_per_period` is the rolling difference
/// `s(t) - s(t - T)`; rows earlier than one excitation period carry `nan`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory, thickness: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "t_s,w_station_over_h,beta_rad,beta_rel_rad,s,ds_per_period,\
         g1_m,g2_m,g3_m,g4_m,state1,state2,state3,state4"
    )?;
    let lag = (traj.excitation.period() / traj.sample_dt).round() as usize;
    for (i, s) in traj.samples.iter().enumerate() {
        let ds = if lag > 0 && i >= lag {
            s.s - traj.samples[i - lag].s
        } else {
            f64::NAN
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            fmt(s.time),
            fmt((s.elastic + s.base) / thickness),
            fmt(s.beta),
            fmt(s.beta_rel),
            fmt(s.s),
            fmt(ds),
            fmt(s.frame.gaps[0]),
            fmt(s.frame.gaps[1]),
            fmt(s.frame.gaps[2]),
            fmt(s.frame.gaps[3]),
            s.frame.states[0].code(),
            s.frame.states[1].code(),
            s.frame.states[2].code(),
            s.frame.states[3].code()
        )?;
    }
    Ok(())
}

pub fn write_envelope_csv(path: &Path, times: &[f64], envelope: &[f64]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t_s,envelope")?;
    for (t, e) in times.iter().zip(envelope) {
        writeln!(w, "{},{}", fmt(*t), fmt(*e))?;
    }
    Ok(())
}

pub fn write_spectrum_csv(path: &Path, peaks: &[SpectrumPeak]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "frequency_hz,amplitude")?;
    for p in peaks {
        writeln!(w, "{},{}", fmt(p.frequency), fmt(p.amplitude))?;
    }
    Ok(())
}

pub fn write_episodes_csv(path: &Path, episodes: &[ContactEpisode]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "start_s,end_s,label,pitch_limit_hit,mean_slip_direction")?;
    for e in episodes {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt(e.start),
            fmt(e.end),
            episode_label_str(e.label),
            u8::from(e.pitch_limit_hit),
            fmt(e.mean_slip_direction)
        )?;
    }
    Ok(())
}

pub fn write_transport_csv(path: &Path, series: &TransportSeries) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t_s,ds_per_period")?;
    for (t, d) in series.times.iter().zip(&series.ds) {
        writeln!(w, "{},{}", fmt(*t), fmt(*d))?;
    }
    Ok(())
}

/// Sweep export: one row per grid point and direction.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SweepRow {
    pub direction: &'static str,
    pub s: f64,
    /// Station displacement envelope over thickness.
    pub amplitude_over_h: f64,
    /// Equivalent center amplitude `q_hat`.
    pub q_hat_equivalent: f64,
    pub steady: bool,
    pub simulated_s: f64,
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "direction,s,amplitude_over_h,q_hat_equivalent,steady,simulated_s"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.direction,
            fmt(r.s),
            fmt(r.amplitude_over_h),
            fmt(r.q_hat_equivalent),
            u8::from(r.steady),
            fmt(r.simulated_s)
        )?;
    }
    Ok(())
}

/// Signature-move export.
pub fn write_signature_csv(
    path: &Path,
    times: &[f64],
    s: &[f64],
    envelope_over_h: &[f64],
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "t_s,s,envelope_over_h")?;
    for i in 0..times.len() {
        writeln!(
            w,
            "{},{},{}",
            fmt(times[i]),
            fmt(s[i]),
            fmt(envelope_over_h[i])
        )?;
    }
    Ok(())
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| crate::error::LabError::Io(std::io::Error::other(e)))?;
    w.write_all(b"\n")?;
    Ok(())
}
