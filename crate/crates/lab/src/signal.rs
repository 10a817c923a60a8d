//! Post-processing of simulated trajectories: amplitude envelope, spectra,
//! contact-sequence classification, pitch-limit events and per-period slider
//! transport.

use beamslider_core::contact::{ContactState, Trajectory};
use beamslider_core::locomotion::{pitch_limit, ContactPoint};
use rustfft::{num_complex::Complex, FftPlanner};

use crate::error::{LabError, Result};

/// Amplitude envelope of a uniformly sampled signal.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeSeries {
    /// Sample times [s].
    pub times: Vec<f64>,
    /// Envelope values (non-negative).
    pub envelope: Vec<f64>,
    /// Averaging window [s].
    pub window: f64,
}

impl EnvelopeSeries {
    pub fn mean(&self) -> f64 {
        mean(&self.envelope)
    }

    /// Relative fluctuation: standard deviation over mean.
    pub fn relative_fluctuation(&self) -> f64 {
        let m = self.mean();
        if m == 0.0 {
            return 0.0;
        }
        let var = self
            .envelope
            .iter()
            .map(|&v| (v - m) * (v - m))
            .sum::<f64>()
            / self.envelope.len() as f64;
        var.sqrt() / m
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Magnitude of the analytic signal of `values` (mean removed), built in the
/// frequency domain: negative frequencies zeroed, positive doubled.
pub fn analytic_magnitude(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let offset = mean(values);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = values
        .iter()
        .map(|&v| Complex::new(v - offset, 0.0))
        .collect();
    fft.process(&mut buf);
    // Quadrature construction of the analytic signal.
    let half = n / 2;
    for (k, c) in buf.iter_mut().enumerate() {
        if k == 0 || (n % 2 == 0 && k == half) {
            // DC and Nyquist unchanged.
        } else if k < half || (n % 2 == 1 && k == half) {
            *c *= 2.0;
        } else {
            *c = Complex::new(0.0, 0.0);
        }
    }
    ifft.process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.norm() * scale).collect()
}

/// Centered moving mean with shrinking windows at the edges.
fn moving_mean(values: &[f64], window: usize) -> Vec<f64> {
    let n = values.len();
    let w = window.max(1);
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    for &v in values {
        prefix.push(prefix.last().unwrap() + v);
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(w / 2);
            let hi = (i + w / 2 + 1).min(n);
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

/// Envelope of a uniformly sampled signal: analytic-signal magnitude
/// averaged over a `window_s` moving window.
pub fn envelope(values: &[f64], sample_rate: f64, window_s: f64) -> Result<Vec<f64>> {
    if values.len() < 4 {
        return Err(LabError::Signal("signal too short for an envelope".into()));
    }
    let window = (window_s * sample_rate).round() as usize;
    if window > values.len() {
        return Err(LabError::Signal(format!(
            "window of {window} samples longer than the signal ({})",
            values.len()
        )));
    }
    let mag = analytic_magnitude(values);
    Ok(moving_mean(&mag, window.max(1)))
}

/// Envelope of a trajectory channel with resolved time stamps.
pub fn envelope_series(times: &[f64], values: &[f64], window_s: f64) -> Result<EnvelopeSeries> {
    if times.len() != values.len() || times.len() < 4 {
        return Err(LabError::Signal("times/values length mismatch".into()));
    }
    let dt = times[1] - times[0];
    let env = envelope(values, 1.0 / dt, window_s)?;
    Ok(EnvelopeSeries {
        times: times.to_vec(),
        envelope: env,
        window: window_s,
    })
}

/// One spectral peak.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPeak {
    /// Peak frequency [Hz].
    pub frequency: f64,
    /// Peak amplitude (signal units).
    pub amplitude: f64,
}

/// Minimum sample count for a meaningful spectrum.
pub const SPECTRUM_MIN_SAMPLES: usize = 1 << 14;

/// Hann-windowed amplitude spectrum with local-maximum peak picking.
///
/// Returns peaks above `noise_floor` times the largest peak, sorted by
/// descending amplitude.
pub fn spectrum(values: &[f64], sample_rate: f64, noise_floor: f64) -> Result<Vec<SpectrumPeak>> {
    let n = values.len();
    if n < SPECTRUM_MIN_SAMPLES {
        return Err(LabError::Signal(format!(
            "spectrum needs at least {SPECTRUM_MIN_SAMPLES} samples, got {n}"
        )));
    }
    let offset = mean(values);
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let mut window_sum = 0.0;
    let mut buf: Vec<Complex<f64>> = (0..n)
        .map(|i| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
            window_sum += w;
            Complex::new((values[i] - offset) * w, 0.0)
        })
        .collect();
    fft.process(&mut buf);
    let scale = 2.0 / window_sum;
    let mags: Vec<f64> = buf[..n / 2].iter().map(|c| c.norm() * scale).collect();
    let df = sample_rate / n as f64;
    let max_mag = mags.iter().cloned().fold(0.0, f64::max);
    let floor = noise_floor * max_mag;
    let mut peaks = Vec::new();
    for k in 1..mags.len() - 1 {
        if mags[k] > floor && mags[k] >= mags[k - 1] && mags[k] >= mags[k + 1] {
            // Parabolic interpolation for a sub-bin frequency estimate.
            let (a, b, c) = (mags[k - 1], mags[k], mags[k + 1]);
            let denom = a - 2.0 * b + c;
            let delta = if denom.abs() > 1e-300 {
                (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            peaks.push(SpectrumPeak {
                frequency: (k as f64 + delta) * df,
                amplitude: b,
            });
        }
    }
    peaks.sort_by(|x, y| y.amplitude.partial_cmp(&x.amplitude).unwrap());
    Ok(peaks)
}

/// Contact-pattern label of a trajectory interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpisodeLabel {
    FreeFlight,
    Single(ContactPoint),
    DoubleUpper,
    DoubleLower,
    DiagonalP1P3,
    DiagonalP2P4,
    /// Three or four contacts closed at once.
    Multi,
}

/// One contiguous contact episode; episodes tile the analyzed interval.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ContactEpisode {
    pub start: f64,
    pub end: f64,
    pub label: EpisodeLabel,
    /// A diagonal pair closed or the relative rotation reached the limit.
    pub pitch_limit_hit: bool,
    /// Mean sliding direction over the closed contacts (-1 left, +1 right,
    /// 0 sticking/open).
    pub mean_slip_direction: f64,
}

/// Aggregate contact statistics.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ContactStats {
    /// Fraction of time per label, keyed by a fixed order:
    /// [free, P1, P2, P3, P4, double_upper, double_lower, diag13, diag24, multi].
    pub time_fraction: [f64; 10],
    /// Pitch-limit hit events per excitation period.
    pub pitch_hits_per_period: f64,
    /// Total pitch-limit hit events.
    pub pitch_hits: usize,
    /// Per contact: fraction of closed time spent sticking.
    pub stick_fraction: [f64; 4],
    /// Per contact: fraction of closed time spent slipping.
    pub slip_fraction: [f64; 4],
}

fn label_of(states: &[ContactState; 4]) -> EpisodeLabel {
    let closed: Vec<usize> = (0..4)
        .filter(|&i| states[i] != ContactState::Open)
        .collect();
    match closed.as_slice() {
        [] => EpisodeLabel::FreeFlight,
        [i] => EpisodeLabel::Single(ContactPoint::ALL[*i]),
        [0, 3] => EpisodeLabel::DoubleUpper,
        [1, 2] => EpisodeLabel::DoubleLower,
        [0, 2] => EpisodeLabel::DiagonalP1P3,
        [1, 3] => EpisodeLabel::DiagonalP2P4,
        _ => EpisodeLabel::Multi,
    }
}

fn label_slot(label: EpisodeLabel) -> usize {
    match label {
        EpisodeLabel::FreeFlight => 0,
        EpisodeLabel::Single(p) => 1 + p.index(),
        EpisodeLabel::DoubleUpper => 5,
        EpisodeLabel::DoubleLower => 6,
        EpisodeLabel::DiagonalP1P3 => 7,
        EpisodeLabel::DiagonalP2P4 => 8,
        EpisodeLabel::Multi => 9,
    }
}

fn is_diagonal(states: &[ContactState; 4]) -> bool {
    let closed = |i: usize| states[i] != ContactState::Open;
    (closed(0) && closed(2)) || (closed(1) && closed(3))
}

/// Classify the per-sample contact states into episodes and statistics.
///
/// A contact counts as closed when it carried normal impulse, which is what
/// the recorded states encode. Pitch-limit hits are diagonal closures or
/// samples where the relative rotation reaches 98 % of the geometric limit.
pub fn classify_contacts(
    traj: &Trajectory,
    slider_gap: f64,
    spacing: f64,
    thickness: f64,
) -> Result<(Vec<ContactEpisode>, ContactStats)> {
    if traj.samples.len() < 2 {
        return Err(LabError::Signal("trajectory too short to classify".into()));
    }
    let beta_lim =
        pitch_limit(spacing, slider_gap, thickness).map_err(|e| LabError::Signal(e.to_string()))?;
    let mut episodes: Vec<ContactEpisode> = Vec::new();
    let mut time_in = [0.0f64; 10];
    let mut stick = [0.0f64; 4];
    let mut slip = [0.0f64; 4];
    let mut closed_time = [0.0f64; 4];
    let mut hits = 0usize;
    let mut in_hit = false;
    // Rattling at the limit produces bursts of threshold crossings; the
    // pitching cycle visits the limit twice per period, half a period
    // apart, so crossings closer than a quarter period are one visit.
    let merge_window = 0.25 * traj.excitation.period();
    let mut last_hit = f64::NEG_INFINITY;
    let dt = traj.sample_dt;

    for win in traj.samples.windows(2) {
        let s = &win[0];
        let label = label_of(&s.frame.states);
        let hit_now = is_diagonal(&s.frame.states) || s.beta_rel.abs() >= 0.98 * beta_lim;
        if hit_now && !in_hit && s.time - last_hit >= merge_window {
            hits += 1;
        }
        if hit_now {
            last_hit = s.time;
        }
        in_hit = hit_now;
        time_in[label_slot(label)] += dt;
        let mut dir_sum = 0.0;
        let mut dir_n = 0;
        for i in 0..4 {
            match s.frame.states[i] {
                ContactState::Open => {}
                ContactState::Stick => {
                    stick[i] += dt;
                    closed_time[i] += dt;
                    dir_n += 1;
                }
                ContactState::SlipLeft => {
                    slip[i] += dt;
                    closed_time[i] += dt;
                    dir_sum -= 1.0;
                    dir_n += 1;
                }
                ContactState::SlipRight => {
                    slip[i] += dt;
                    closed_time[i] += dt;
                    dir_sum += 1.0;
                    dir_n += 1;
                }
            }
        }
        let dir = if dir_n > 0 {
            dir_sum / dir_n as f64
        } else {
            0.0
        };
        match episodes.last_mut() {
            Some(ep) if ep.label == label => {
                ep.end = win[1].time;
                ep.pitch_limit_hit |= hit_now;
                ep.mean_slip_direction = 0.5 * (ep.mean_slip_direction + dir);
            }
            _ => episodes.push(ContactEpisode {
                start: s.time,
                end: win[1].time,
                label,
                pitch_limit_hit: hit_now,
                mean_slip_direction: dir,
            }),
        }
    }
    let total: f64 = time_in.iter().sum();
    let mut fractions = [0.0; 10];
    for (f, t) in fractions.iter_mut().zip(&time_in) {
        *f = t / total;
    }
    let periods = total / traj.excitation.period();
    let mut stick_fraction = [0.0; 4];
    let mut slip_fraction = [0.0; 4];
    for i in 0..4 {
        if closed_time[i] > 0.0 {
            stick_fraction[i] = stick[i] / closed_time[i];
            slip_fraction[i] = slip[i] / closed_time[i];
        }
    }
    Ok((
        episodes,
        ContactStats {
            time_fraction: fractions,
            pitch_hits_per_period: hits as f64 / periods,
            pitch_hits: hits,
            stick_fraction,
            slip_fraction,
        },
    ))
}

/// Slider transport per excitation period: `s` sampled at period boundaries,
/// first differences.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportSeries {
    /// Boundary times of each completed period [s].
    pub times: Vec<f64>,
    /// Transport over each period.
    pub ds: Vec<f64>,
}

impl TransportSeries {
    pub fn mean(&self) -> f64 {
        mean(&self.ds)
    }
}

pub fn transport_per_period(traj: &Trajectory) -> Result<TransportSeries> {
    let period = traj.excitation.period();
    let t0 = traj.samples.first().map(|s| s.time).unwrap_or(0.0);
    let t1 = traj.samples.last().map(|s| s.time).unwrap_or(0.0);
    if t1 - t0 < 3.0 * period {
        return Err(LabError::Signal(
            "trajectory shorter than three excitation periods".into(),
        ));
    }
    let s_at = |t: f64| -> f64 {
        // Linear interpolation on the uniform grid.
        let x = (t - t0) / traj.sample_dt;
        let i = (x.floor() as usize).min(traj.samples.len() - 2);
        let frac = x - i as f64;
        traj.samples[i].s * (1.0 - frac) + traj.samples[i + 1].s * frac
    };
    let n_periods = ((t1 - t0) / period).floor() as usize;
    let mut times = Vec::with_capacity(n_periods);
    let mut ds = Vec::with_capacity(n_periods);
    for k in 1..=n_periods {
        let t_hi = t0 + k as f64 * period;
        times.push(t_hi);
        ds.push(s_at(t_hi) - s_at(t_hi - period));
    }
    Ok(TransportSeries { times, ds })
}

/// Fundamental-harmonic phase of `values` relative to `cos(omega t)`,
/// estimated by single-frequency projection over whole periods.
pub fn phase_relation(times: &[f64], values: &[f64], omega: f64) -> Result<f64> {
    if times.len() != values.len() || times.len() < 16 {
        return Err(LabError::Signal(
            "segment too short for a phase estimate".into(),
        ));
    }
    let period = 2.0 * std::f64::consts::PI / omega;
    let span = times[times.len() - 1] - times[0];
    let whole = (span / period).floor() * period;
    if whole < period {
        return Err(LabError::Signal("segment shorter than one period".into()));
    }
    let t_end = times[0] + whole;
    let offset = mean(values);
    let mut re = 0.0;
    let mut im = 0.0;
    let mut count = 0usize;
    for (&t, &v) in times.iter().zip(values) {
        if t > t_end {
            break;
        }
        let (s, c) = (omega * t).sin_cos();
        re += (v - offset) * c;
        im += (v - offset) * s;
        count += 1;
    }
    if count == 0 {
        return Err(LabError::Signal("empty projection segment".into()));
    }
    // v ~ A cos(omega t + theta): projection on cos gives A cos(theta)/2,
    // on sin gives -A sin(theta)/2.
    Ok((-im).atan2(re))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_sinusoid_envelope() {
        let fs = 4096.0;
        let a = 0.7;
        let values: Vec<f64> = (0..16384)
            .map(|i| a * (2.0 * std::f64::consts::PI * 100.0 * i as f64 / fs).cos())
            .collect();
        let env = envelope(&values, fs, 0.05).unwrap();
        // Interior samples: edge effects excluded.
        let core = &env[2048..14336];
        for &v in core {
            assert!((v - a).abs() < 1e-3 * a, "envelope {v} vs {a}");
        }
    }

    #[test]
    fn am_signal_envelope_tracks_modulation() {
        // a (1 + 0.5 cos(wm t)) cos(W t) with wm << W.
        let fs = 8192.0;
        let (a, fm, fc) = (1.3, 4.0, 400.0);
        let n = 1 << 15;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                a * (1.0 + 0.5 * (2.0 * std::f64::consts::PI * fm * t).cos())
                    * (2.0 * std::f64::consts::PI * fc * t).cos()
            })
            .collect();
        let env = envelope(&values, fs, 4.0 / fc).unwrap();
        for i in (n / 8)..(7 * n / 8) {
            let t = i as f64 / fs;
            let expected = a * (1.0 + 0.5 * (2.0 * std::f64::consts::PI * fm * t).cos());
            assert!(
                (env[i] - expected).abs() < 0.02 * a * 1.5,
                "t={t}: {} vs {expected}",
                env[i]
            );
        }
    }

    #[test]
    fn envelope_is_homogeneous() {
        let fs = 2048.0;
        let values: Vec<f64> = (0..8192)
            .map(|i| {
                let t = i as f64 / fs;
                (2.0 * std::f64::consts::PI * 50.0 * t).cos()
                    + 0.3 * (2.0 * std::f64::consts::PI * 130.0 * t).sin()
            })
            .collect();
        let scaled: Vec<f64> = values.iter().map(|&v| 3.5 * v).collect();
        let e1 = envelope(&values, fs, 0.1).unwrap();
        let e2 = envelope(&scaled, fs, 0.1).unwrap();
        for (a, b) in e1.iter().zip(&e2) {
            assert!((b - 3.5 * a).abs() < 1e-9);
        }
    }

    #[test]
    fn envelope_rejects_long_window() {
        let values = vec![0.0; 100];
        assert!(envelope(&values, 100.0, 2.0).is_err());
    }

    #[test]
    fn single_tone_spectrum() {
        let fs = 8192.0;
        let f0 = 440.0;
        let values: Vec<f64> = (0..SPECTRUM_MIN_SAMPLES)
            .map(|i| 2.0 * (2.0 * std::f64::consts::PI * f0 * i as f64 / fs).cos())
            .collect();
        let peaks = spectrum(&values, fs, 0.3).unwrap();
        assert_eq!(peaks.len(), 1);
        let df = fs / SPECTRUM_MIN_SAMPLES as f64;
        assert!((peaks[0].frequency - f0).abs() < df, "{:?}", peaks[0]);
        assert!((peaks[0].amplitude - 2.0).abs() < 0.05);
    }

    #[test]
    fn two_tone_spectrum() {
        let fs = 8192.0;
        let (f1, f2) = (440.0, 523.3);
        let values: Vec<f64> = (0..(SPECTRUM_MIN_SAMPLES * 2))
            .map(|i| {
                let t = i as f64 / fs;
                (2.0 * std::f64::consts::PI * f1 * t).cos()
                    + 0.5 * (2.0 * std::f64::consts::PI * f2 * t).cos()
            })
            .collect();
        let peaks = spectrum(&values, fs, 0.2).unwrap();
        assert_eq!(peaks.len(), 2, "{peaks:?}");
        let df = fs / (2 * SPECTRUM_MIN_SAMPLES) as f64;
        assert!((peaks[0].frequency - f1).abs() < df);
        assert!((peaks[1].frequency - f2).abs() < df);
    }

    #[test]
    fn spectrum_peaks_invariant_under_scaling() {
        let fs = 4096.0;
        let values: Vec<f64> = (0..SPECTRUM_MIN_SAMPLES)
            .map(|i| {
                let t = i as f64 / fs;
                (2.0 * std::f64::consts::PI * 100.0 * t).cos()
                    + 0.4 * (2.0 * std::f64::consts::PI * 321.0 * t).cos()
            })
            .collect();
        let scaled: Vec<f64> = values.iter().map(|&v| 7.0 * v).collect();
        let p1 = spectrum(&values, fs, 0.2).unwrap();
        let p2 = spectrum(&scaled, fs, 0.2).unwrap();
        assert_eq!(p1.len(), p2.len());
        for (a, b) in p1.iter().zip(&p2) {
            assert_eq!(a.frequency, b.frequency);
        }
    }

    #[test]
    fn spectrum_requires_enough_samples() {
        assert!(spectrum(&vec![0.0; 100], 100.0, 0.1).is_err());
    }

    #[test]
    fn synthetic_phase_estimate() {
        let fs = 4096.0;
        let omega = 2.0 * std::f64::consts::PI * 100.0;
        let times: Vec<f64> = (0..8192).map(|i| i as f64 / fs).collect();
        let values: Vec<f64> = times.iter().map(|&t| (omega * t - 1.0).cos()).collect();
        let theta = phase_relation(&times, &values, omega).unwrap();
        assert!((theta + 1.0).abs() < 0.01, "theta = {theta}");
    }
}
