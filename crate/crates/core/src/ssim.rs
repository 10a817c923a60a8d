//! Slow-flow amplitude map of the harmonically forced beam-slider model.
//!
//! For harmonic base motion `w0 = w0_hat cos(Omega t)` the single-term
//! harmonic-balance ansatz `q = q_hat cos(Omega t + theta)` turns the
//! single-mode model into the complex balance equation
//!
//! ```text
//! (-(1+mu) r^2 + 2 i D r + 1 + 3/4 kappa q_hat^2) q_hat e^(i theta)
//!     = gamma r^2 w0_hat / L,          r = Omega/omega,
//! ```
//!
//! whose squared magnitude is a cubic polynomial in `u = q_hat^2`. Depending
//! on the slider position there are one to three positive roots; with three
//! roots the intermediate amplitude is unstable. Sweeping the slider
//! position `s` and connecting roots by amplitude continuity yields the
//! amplitude branches of the slow flow, including the isolated bubble formed
//! by the low and intermediate branches and the high branch that approaches
//! (but does not reach) the backbone curve
//!
//! ```text
//! q_backbone(s) = sqrt( 4/(3 kappa) [ (1 + mu(s)) r^2 - 1 ] ).
//! ```
//!
//! The effective natural frequency at amplitude `q_hat` is
//! `omega_tilde/omega = sqrt((1 + 3/4 kappa q_hat^2) / (1 + mu))`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::rom::{rom_coefficients, BeamParameters, ModeShape, RomCoefficients, SliderParameters};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Two squared-amplitude roots closer than this are treated as a tangency.
pub const TANGENCY_TOL: f64 = 1e-8;

/// Imaginary parts above this threshold disqualify a cubic root.
const IMAG_TOL: f64 = 1e-8;

/// Residual bound every returned balance point must satisfy.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Dimensionless base excitation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExcitationParameters {
    /// Base motion amplitude over beam length, `w0_hat / L`.
    pub base_amplitude: f64,
    /// Excitation over fundamental frequency, `Omega / omega`.
    pub frequency_ratio: f64,
}

impl ExcitationParameters {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_amplitude > 0.0) {
            return Err(Error::InvalidParameter {
                name: "base_amplitude",
                value: self.base_amplitude,
                constraint: "> 0",
            });
        }
        if !(self.frequency_ratio > 0.0) {
            return Err(Error::InvalidParameter {
                name: "frequency_ratio",
                value: self.frequency_ratio,
                constraint: "> 0",
            });
        }
        Ok(())
    }
}

/// Stability of a periodic limit state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Stability {
    Stable,
    Unstable,
}

/// Branch identity over the slider-position sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BranchLabel {
    Low,
    Intermediate,
    High,
}

/// One amplitude solution of the balance equation at slider position `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SsimPoint {
    pub s: f64,
    /// Amplitude `q_hat >= 0`.
    pub amplitude: f64,
    /// Phase lag `theta` in `[-pi, pi]`.
    pub phase: f64,
    pub stability: Stability,
    pub label: BranchLabel,
}

/// All balance solutions at one slider position.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimSolution {
    /// One to three points, sorted by ascending amplitude.
    pub points: Vec<SsimPoint>,
    /// Set when two roots coalesced within [`TANGENCY_TOL`] (a turning point
    /// crosses this `s`); the tangent root is reported once, unstable.
    pub degenerate: bool,
}

/// Magnitude of the complex balance-equation residual at `(q, theta)`.
pub fn balance_residual(
    c: &RomCoefficients,
    exc: &ExcitationParameters,
    q: f64,
    theta: f64,
) -> f64 {
    let r = exc.frequency_ratio;
    let re = 1.0 + 0.75 * c.kappa * q * q - (1.0 + c.mu) * r * r;
    let im = 2.0 * c.damping * r;
    let rhs = c.gamma * r * r * exc.base_amplitude;
    let (st, ct) = theta.sin_cos();
    // (re + i im) q e^{i theta} - rhs
    let real = q * (re * ct - im * st) - rhs;
    let imag = q * (re * st + im * ct);
    (real * real + imag * imag).sqrt()
}

/// Real non-negative roots of the monic-in-`u` magnitude cubic, ascending.
///
/// Closed-form evaluation (trigonometric for three real roots, Cardano
/// otherwise) followed by one Newton polish per root; tiny negative roots
/// are clamped to zero, roots below `-1e-12` or with significant imaginary
/// part are discarded.
fn amplitude_squared_roots(c: &RomCoefficients, exc: &ExcitationParameters) -> Vec<f64> {
    let r = exc.frequency_ratio;
    let k0 = 1.0 - (1.0 + c.mu) * r * r;
    let d2 = 2.0 * c.damping * r;
    let rhs = c.gamma * r * r * exc.base_amplitude;
    let a3 = 0.75 * c.kappa;
    // (k0 + a3 u)^2 u + d2^2 u - rhs^2 = 0
    let (c3, c2, c1, c0) = (a3 * a3, 2.0 * a3 * k0, k0 * k0 + d2 * d2, -rhs * rhs);
    let poly = |u: f64| ((c3 * u + c2) * u + c1) * u + c0;
    let dpoly = |u: f64| (3.0 * c3 * u + 2.0 * c2) * u + c1;

    let mut roots: Vec<f64> = Vec::with_capacity(3);
    if c3 < 1e-300 {
        // Linear restoring force (kappa = 0): the cubic degenerates.
        if c1 > 0.0 {
            roots.push(-c0 / c1);
        }
    } else {
        // Monic u^3 + p u^2 + q u + r0, depressed with u = y - p/3.
        let p = c2 / c3;
        let q = c1 / c3;
        let r0 = c0 / c3;
        let a = q - p * p / 3.0;
        let b = 2.0 * p * p * p / 27.0 - p * q / 3.0 + r0;
        let disc = -4.0 * a * a * a - 27.0 * b * b;
        if disc > 0.0 {
            // Three real roots, trigonometric form.
            let m = 2.0 * (-a / 3.0).sqrt();
            let arg = (3.0 * b / (a * m)).clamp(-1.0, 1.0);
            let t = arg.acos() / 3.0;
            for k in 0..3 {
                let y = m * (t - 2.0 * core::f64::consts::PI * k as f64 / 3.0).cos();
                roots.push(y - p / 3.0);
            }
        } else {
            // One real root, Cardano with cancellation-safe branch.
            let s = (b * b / 4.0 + a * a * a / 27.0).max(0.0).sqrt();
            let t1 = if b >= 0.0 { -b / 2.0 - s } else { -b / 2.0 + s };
            let cb = t1.abs().powf(1.0 / 3.0) * t1.signum();
            let y = if cb.abs() > 1e-300 {
                cb - a / (3.0 * cb)
            } else {
                0.0
            };
            roots.push(y - p / 3.0);
        }
    }
    // Newton polish and filtering.
    let mut out = Vec::with_capacity(3);
    for &u0 in &roots {
        let mut u = u0;
        for _ in 0..3 {
            let d = dpoly(u);
            if d.abs() < 1e-300 {
                break;
            }
            let step = poly(u) / d;
            if !step.is_finite() {
                break;
            }
            u -= step;
        }
        if u < -1e-12 || u.is_nan() {
            continue;
        }
        out.push(u.max(0.0));
    }
    out.sort_by(|x, y| x.partial_cmp(y).expect("roots are finite"));
    out.dedup_by(|x, y| (*x - *y).abs() < 1e-300);
    let _ = IMAG_TOL; // closed form only produces real roots; kept for documentation
    out
}

/// Stability labels for sorted amplitude roots.
///
/// One root is stable; with three roots the intermediate one is unstable.
/// A coalesced pair (two entries closer than [`TANGENCY_TOL`] in squared
/// amplitude, or an input of exactly two roots) marks a degenerate turning
/// point: the outer simple root is stable, the tangent root unstable.
pub fn classify_stability(sorted_amplitudes: &[f64]) -> Result<(Vec<Stability>, bool)> {
    use Stability::{Stable, Unstable};
    match sorted_amplitudes.len() {
        1 => Ok((vec![Stable], false)),
        2 => Ok((vec![Stable, Unstable], true)),
        3 => {
            let (a, b, c) = (
                sorted_amplitudes[0],
                sorted_amplitudes[1],
                sorted_amplitudes[2],
            );
            if (b * b - a * a).abs() < TANGENCY_TOL || (c * c - b * b).abs() < TANGENCY_TOL {
                // Tangency inside a nominal three-root set.
                Ok((vec![Stable, Unstable, Stable], true))
            } else {
                Ok((vec![Stable, Unstable, Stable], false))
            }
        }
        n => Err(Error::OutOfDomain {
            name: "root count",
            value: n as f64,
            lo: 1.0,
            hi: 3.0,
        }),
    }
}

/// Phase lag of the response relative to the base displacement.
///
/// The balance equation's right-hand side is real positive, so
/// `theta = -atan2(2 D r, 1 + 3/4 kappa q_hat^2 - (1+mu) r^2)`, which puts a
/// point exactly on the backbone at `-pi/2`, the high branch near `0^-` and
/// the low branch near `-pi`.
pub fn phase_lag(coeffs: &RomCoefficients, exc: &ExcitationParameters, q_hat: f64) -> f64 {
    let r = exc.frequency_ratio;
    let re = 1.0 + 0.75 * coeffs.kappa * q_hat * q_hat - (1.0 + coeffs.mu) * r * r;
    let im = 2.0 * coeffs.damping * r;
    -im.atan2(re)
}

/// Backbone amplitude at frequency ratio `r`, if the resonance condition
/// `omega_tilde(s, q_hat) = Omega` is attainable.
pub fn backbone_amplitude(coeffs: &RomCoefficients, frequency_ratio: f64) -> Option<f64> {
    let radicand =
        4.0 / (3.0 * coeffs.kappa) * ((1.0 + coeffs.mu) * frequency_ratio * frequency_ratio - 1.0);
    if radicand >= 0.0 {
        Some(radicand.sqrt())
    } else {
        None
    }
}

/// Effective natural frequency over linear frequency at amplitude `q_hat`.
pub fn effective_frequency_ratio(coeffs: &RomCoefficients, q_hat: f64) -> f64 {
    ((1.0 + 0.75 * coeffs.kappa * q_hat * q_hat) / (1.0 + coeffs.mu)).sqrt()
}

/// Solve the balance equation at the coefficients' slider position.
pub fn solve_amplitudes(
    coeffs: &RomCoefficients,
    exc: &ExcitationParameters,
) -> Result<SsimSolution> {
    exc.validate()?;
    let mut u = amplitude_squared_roots(coeffs, exc);
    // Merge tangent pairs.
    let mut degenerate = false;
    if u.len() == 3 {
        if (u[1] - u[0]).abs() < TANGENCY_TOL {
            u.remove(0);
            degenerate = true;
        } else if (u[2] - u[1]).abs() < TANGENCY_TOL {
            u.remove(2);
            degenerate = true;
        }
    }
    let amplitudes: Vec<f64> = u.iter().map(|&v| v.sqrt()).collect();
    let (labels, tangent) = classify_stability(&amplitudes)?;
    degenerate |= tangent;
    let branch = match amplitudes.len() {
        1 => vec![BranchLabel::High],
        2 => vec![BranchLabel::Low, BranchLabel::Intermediate],
        _ => vec![
            BranchLabel::Low,
            BranchLabel::Intermediate,
            BranchLabel::High,
        ],
    };
    let points = amplitudes
        .iter()
        .zip(labels.iter())
        .zip(branch.iter())
        .map(|((&q, &stab), &label)| SsimPoint {
            s: coeffs.slider_position,
            amplitude: q,
            phase: phase_lag(coeffs, exc, q),
            stability: stab,
            label,
        })
        .collect();
    Ok(SsimSolution { points, degenerate })
}

/// Minimum vibration amplitude admitting almost periodic impacts, in units
/// of the clearance `g`: `w_min = g rho / sqrt(1 + rho^2)` with
/// `rho = (2/pi) (1-r)/(1+r)`. Below the threshold the response is expected
/// to be strongly modulated.
pub fn modulation_threshold(restitution: f64, clearance: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&restitution) {
        return Err(Error::OutOfDomain {
            name: "restitution",
            value: restitution,
            lo: 0.0,
            hi: 1.0,
        });
    }
    if !(clearance > 0.0) {
        return Err(Error::InvalidParameter {
            name: "clearance",
            value: clearance,
            constraint: "> 0",
        });
    }
    let rho = 2.0 / core::f64::consts::PI * (1.0 - restitution) / (1.0 + restitution);
    Ok(clearance * rho / (1.0 + rho * rho).sqrt())
}

/// One connected amplitude branch over the sweep grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimBranch {
    pub label: BranchLabel,
    /// Points ordered by ascending `s`.
    pub points: Vec<SsimPoint>,
}

/// Result of sweeping the balance solutions over slider positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SsimSweep {
    pub branches: Vec<SsimBranch>,
    /// Slider positions where the root count changes, located by bisection.
    pub turning_points: Vec<f64>,
    /// Measurement station for derived displacement output, `x_m / L`.
    pub station: f64,
}

/// Normalized displacement at the measurement station for amplitude `q_hat`,
/// in beam thicknesses: `w_hat(x_m)/h = q_hat (phi(x_m)/phi(1/2)) L/h`.
pub fn station_amplitude_over_h(
    shape: &ModeShape,
    beam: &BeamParameters,
    station: f64,
    q_hat: f64,
) -> Result<f64> {
    Ok(q_hat * shape.center_ratio(station)? * beam.length / beam.thickness)
}

/// Default measurement station used in branch output.
pub const DEFAULT_STATION: f64 = 4.0 / 7.0;

struct OpenBranch {
    points: Vec<SsimPoint>,
    rank_votes: [usize; 3],
    last_log_q: f64,
    alive: bool,
}

/// Sweep the balance solutions over a strictly increasing grid of slider
/// positions and connect roots into branches by nearest log-amplitude
/// continuation. Root-count changes are refined by bisection to `ds < 1e-5`
/// and reported as turning points.
pub fn sweep_ssim(
    beam: &BeamParameters,
    slider: &SliderParameters,
    exc: &ExcitationParameters,
    s_grid: &[f64],
    station: f64,
) -> Result<SsimSweep> {
    if s_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NotMonotone { name: "s_grid" });
    }
    exc.validate()?;
    const EPS: f64 = 1e-12;
    let solve = |s: f64| -> Result<SsimSolution> {
        solve_amplitudes(&rom_coefficients(beam, slider, s)?, exc)
    };

    let mut open: Vec<OpenBranch> = Vec::new();
    let mut closed: Vec<OpenBranch> = Vec::new();
    let mut turning: Vec<f64> = Vec::new();
    let mut prev_count = 0usize;

    for (gi, &s) in s_grid.iter().enumerate() {
        let sol = solve(s)?;
        let count = sol.points.len();
        if gi > 0 && count != prev_count {
            // Locate the fold between the previous grid point and this one.
            let (mut lo, mut hi) = (s_grid[gi - 1], s);
            let lo_count = prev_count;
            while hi - lo > 1e-5 {
                let mid = 0.5 * (lo + hi);
                if solve(mid)?.points.len() == lo_count {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            turning.push(0.5 * (lo + hi));
        }
        prev_count = count;

        let logs: Vec<f64> = sol
            .points
            .iter()
            .map(|p| (p.amplitude + EPS).ln())
            .collect();
        let mut taken = vec![false; count];
        let mut assigned: Vec<Option<usize>> = vec![None; open.len()];
        let alive: Vec<usize> = (0..open.len()).filter(|&i| open[i].alive).collect();
        if alive.len() == count {
            // Root branches of a parametric polynomial cannot cross between
            // folds, so with an unchanged root count the matching is by
            // amplitude rank; this avoids spurious swaps where two branches
            // run close together.
            let mut by_rank = alive.clone();
            by_rank.sort_by(|&a, &b| {
                open[a]
                    .last_log_q
                    .partial_cmp(&open[b].last_log_q)
                    .expect("finite")
            });
            for (pi, bi) in by_rank.into_iter().enumerate() {
                assigned[bi] = Some(pi);
                taken[pi] = true;
            }
        } else {
            // Count changed: greedy nearest-neighbor in log amplitude.
            let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
            for &bi in &alive {
                for (pi, &lq) in logs.iter().enumerate() {
                    pairs.push(((lq - open[bi].last_log_q).abs(), bi, pi));
                }
            }
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances"));
            for (_, bi, pi) in pairs {
                if assigned[bi].is_none() && !taken[pi] {
                    assigned[bi] = Some(pi);
                    taken[pi] = true;
                }
            }
        }
        for (bi, slot) in assigned.iter().enumerate() {
            match slot {
                Some(pi) => {
                    let p = sol.points[*pi];
                    open[bi].rank_votes[rank_of(&sol, *pi)] += 1;
                    open[bi].last_log_q = logs[*pi];
                    open[bi].points.push(p);
                }
                None => open[bi].alive = false,
            }
        }
        for (pi, p) in sol.points.iter().enumerate() {
            if !taken[pi] {
                let mut votes = [0usize; 3];
                votes[rank_of(&sol, pi)] += 1;
                open.push(OpenBranch {
                    points: vec![*p],
                    rank_votes: votes,
                    last_log_q: logs[pi],
                    alive: true,
                });
            }
        }
        // Branches that died stay in `open` (marked) until the end; move the
        // dead ones out so matching stays cheap.
        let mut i = 0;
        while i < open.len() {
            if !open[i].alive {
                closed.push(open.swap_remove(i));
            } else {
                i += 1;
            }
        }
    }
    closed.append(&mut open);

    let branches = closed
        .into_iter()
        .map(|b| {
            let label = majority_label(&b.rank_votes);
            let points = b
                .points
                .into_iter()
                .map(|mut p| {
                    p.label = label;
                    p
                })
                .collect();
            SsimBranch { label, points }
        })
        .collect();
    Ok(SsimSweep {
        branches,
        turning_points: turning,
        station,
    })
}

/// Rank of point `pi` among the concurrent roots: 0 = lowest amplitude,
/// 2 = highest; a lone root ranks as high (it continues the main branch).
fn rank_of(sol: &SsimSolution, pi: usize) -> usize {
    match sol.points.len() {
        1 => 2,
        2 => {
            if pi == 0 {
                0
            } else {
                1
            }
        }
        _ => pi,
    }
}

fn majority_label(votes: &[usize; 3]) -> BranchLabel {
    let (mut best, mut arg) = (votes[0], 0);
    for (i, &v) in votes.iter().enumerate() {
        if v > best {
            best = v;
            arg = i;
        }
    }
    match arg {
        0 => BranchLabel::Low,
        1 => BranchLabel::Intermediate,
        _ => BranchLabel::High,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{table_beam, table_excitation, table_slider};

    fn coeffs_at(s: f64) -> RomCoefficients {
        rom_coefficients(&table_beam(), &table_slider(), s).unwrap()
    }

    #[test]
    fn every_root_satisfies_the_balance_equation() {
        let exc = table_excitation();
        for &s in &[0.1, 0.27, 0.305, 0.33, 0.45, 0.5] {
            let c = coeffs_at(s);
            let sol = solve_amplitudes(&c, &exc).unwrap();
            assert!(!sol.points.is_empty());
            for p in &sol.points {
                let r = balance_residual(&c, &exc, p.amplitude, p.phase);
                assert!(r < RESIDUAL_TOL, "s={s}: residual {r:e}");
            }
        }
    }

    #[test]
    fn linear_limit_recovers_the_frf() {
        // kappa = 0, mu = 0, D -> 0 at r = 0.5 must give the plain FRF value.
        let mut c = coeffs_at(0.27);
        c.kappa = 0.0;
        c.mu = 0.0;
        c.damping = 1e-14;
        let exc = ExcitationParameters {
            base_amplitude: 1e-4,
            frequency_ratio: 0.5,
        };
        let sol = solve_amplitudes(&c, &exc).unwrap();
        assert_eq!(sol.points.len(), 1);
        let r = exc.frequency_ratio;
        let expected = c.gamma * r * r * exc.base_amplitude / (1.0 - r * r).abs();
        let got = sol.points[0].amplitude;
        assert!(
            ((got - expected) / expected).abs() < 1e-9,
            "got {got}, expected {expected}"
        );
    }

    #[test]
    fn three_root_region_has_expected_structure() {
        // Inside the coexistence window the low and high roots bracket the
        // unstable intermediate one.
        let exc = table_excitation();
        let sol = solve_amplitudes(&coeffs_at(0.33), &exc).unwrap();
        assert_eq!(sol.points.len(), 3, "expected three roots at s = 0.33");
        assert_eq!(sol.points[0].stability, Stability::Stable);
        assert_eq!(sol.points[1].stability, Stability::Unstable);
        assert_eq!(sol.points[2].stability, Stability::Stable);
        assert!(sol.points[0].amplitude < sol.points[1].amplitude);
        assert!(sol.points[1].amplitude < sol.points[2].amplitude);
    }

    #[test]
    fn stability_rule() {
        let (l, d) = classify_stability(&[0.1]).unwrap();
        assert_eq!(l, vec![Stability::Stable]);
        assert!(!d);
        let (l, d) = classify_stability(&[0.1, 0.2, 0.3]).unwrap();
        assert_eq!(
            l,
            vec![Stability::Stable, Stability::Unstable, Stability::Stable]
        );
        assert!(!d);
        // Exactly two distinct roots: degenerate tangency.
        let (l, d) = classify_stability(&[0.1, 0.2]).unwrap();
        assert_eq!(l, vec![Stability::Stable, Stability::Unstable]);
        assert!(d);
        assert!(classify_stability(&[]).is_err());
    }

    #[test]
    fn backbone_is_the_resonance_locus() {
        let c = coeffs_at(0.5);
        let exc = table_excitation();
        let q = backbone_amplitude(&c, exc.frequency_ratio).expect("radicand positive at center");
        // Defining condition: effective frequency equals the excitation.
        assert!((effective_frequency_ratio(&c, q) - exc.frequency_ratio).abs() < 1e-12);
        // Zero radicand gives zero amplitude (up to rounding in the radicand).
        let r0 = (1.0 / (1.0 + c.mu)).sqrt();
        assert!(backbone_amplitude(&c, r0).unwrap() < 1e-7);
        // Independent bisection oracle on the effective-frequency condition.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if effective_frequency_ratio(&c, mid) < exc.frequency_ratio {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((q - 0.5 * (lo + hi)).abs() < 1e-10);
    }

    #[test]
    fn backbone_absent_below_linear_resonance() {
        let c = coeffs_at(0.02); // lightly loaded: omega_tilde ~ omega > Omega
        assert!(backbone_amplitude(&c, 0.3).is_none());
    }

    #[test]
    fn phase_on_backbone_is_quarter_cycle() {
        let c = coeffs_at(0.4);
        let exc = table_excitation();
        let q = backbone_amplitude(&c, exc.frequency_ratio).unwrap();
        let th = phase_lag(&c, &exc, q);
        assert!((th + core::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn branch_phases_near_zero_and_near_antiphase() {
        let exc = table_excitation();
        let sol = solve_amplitudes(&coeffs_at(0.33), &exc).unwrap();
        let high = sol.points.last().unwrap();
        assert!(
            high.phase > -0.3 && high.phase <= 0.0,
            "high-branch phase {}",
            high.phase
        );
        let low = &sol.points[0];
        assert!(
            low.phase >= -core::f64::consts::PI && low.phase < -core::f64::consts::PI + 0.3,
            "low-branch phase {}",
            low.phase
        );
    }

    #[test]
    fn stable_points_avoid_resonant_phase() {
        // No stable point may sit at -pi/2 unless it lies on the backbone.
        let exc = table_excitation();
        for &s in &[0.1, 0.27, 0.33, 0.45] {
            let c = coeffs_at(s);
            for p in solve_amplitudes(&c, &exc).unwrap().points {
                if p.stability == Stability::Stable {
                    let off_backbone =
                        (effective_frequency_ratio(&c, p.amplitude) - exc.frequency_ratio).abs()
                            > 1e-6;
                    if off_backbone {
                        assert!(
                            (p.phase + core::f64::consts::FRAC_PI_2).abs() > 1e-6,
                            "stable point at resonant phase off the backbone (s={s})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn modulation_threshold_reference_values() {
        assert_eq!(modulation_threshold(1.0, 1.0).unwrap(), 0.0);
        let at_half = modulation_threshold(0.5, 1.0).unwrap();
        assert!((at_half - 0.21).abs() < 0.005, "r=0.5: {at_half}");
        let at_zero = modulation_threshold(0.0, 1.0).unwrap();
        assert!((at_zero - 0.54).abs() < 0.005, "r=0: {at_zero}");
    }

    #[test]
    fn modulation_threshold_monotone_in_restitution() {
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let r = i as f64 / 20.0;
            let v = modulation_threshold(r, 1.0).unwrap();
            assert!(v <= prev + 1e-15, "threshold must decrease with r");
            prev = v;
        }
        assert!(modulation_threshold(1.5, 1.0).is_err());
    }

    #[test]
    fn sweep_finds_isolated_bubble_and_no_backbone_intersection() {
        let beam = table_beam();
        let slider = table_slider();
        let exc = table_excitation();
        let grid: Vec<f64> = (0..=240).map(|i| 0.02 + i as f64 * 0.96 / 240.0).collect();
        let sweep = sweep_ssim(&beam, &slider, &exc, &grid, DEFAULT_STATION).unwrap();
        // Two folds bound the low/intermediate bubble, mirror-symmetric.
        assert_eq!(sweep.turning_points.len(), 2, "{:?}", sweep.turning_points);
        let (t0, t1) = (sweep.turning_points[0], sweep.turning_points[1]);
        assert!(
            (t0 + t1 - 1.0).abs() < 1e-3,
            "folds {t0}, {t1} not mirrored"
        );
        // The low and intermediate branches exist only between the folds.
        let low = sweep
            .branches
            .iter()
            .find(|b| b.label == BranchLabel::Low)
            .expect("low branch");
        let smin = low.points.first().unwrap().s;
        let smax = low.points.last().unwrap().s;
        assert!(smin >= t0 - 0.01 && smax <= t1 + 0.01);
        // The high branch spans the whole grid and stays off the backbone.
        let high = sweep
            .branches
            .iter()
            .find(|b| b.label == BranchLabel::High)
            .expect("high branch");
        assert_eq!(high.points.len(), grid.len());
        for p in &high.points {
            let c = rom_coefficients(&beam, &slider, p.s).unwrap();
            if let Some(bb) = backbone_amplitude(&c, exc.frequency_ratio) {
                assert!(
                    (p.amplitude - bb).abs() > 1e-6,
                    "high branch touches backbone at s={}",
                    p.s
                );
            }
        }
    }

    #[test]
    fn sweep_amplitudes_mirror_symmetric() {
        let beam = table_beam();
        let slider = table_slider();
        let exc = table_excitation();
        for &s in &[0.21, 0.35, 0.44] {
            let a = solve_amplitudes(&rom_coefficients(&beam, &slider, s).unwrap(), &exc).unwrap();
            let b = solve_amplitudes(&rom_coefficients(&beam, &slider, 1.0 - s).unwrap(), &exc)
                .unwrap();
            assert_eq!(a.points.len(), b.points.len());
            for (pa, pb) in a.points.iter().zip(&b.points) {
                assert!((pa.amplitude - pb.amplitude).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn reduced_excitation_creates_second_turning_point() {
        // At strongly reduced excitation the main branch develops a
        // resonance peak and a second fold connecting it to the
        // intermediate branch; with the ideal mode shape this topology
        // appears below roughly 1/30 of the reference level.
        let beam = table_beam();
        let slider = table_slider();
        let mut exc = table_excitation();
        exc.base_amplitude /= 30.0;
        let grid: Vec<f64> = (0..=400).map(|i| 0.02 + i as f64 * 0.48 / 400.0).collect();
        let sweep = sweep_ssim(&beam, &slider, &exc, &grid, DEFAULT_STATION).unwrap();
        assert!(
            sweep.turning_points.len() >= 2,
            "turning points: {:?}",
            sweep.turning_points
        );
        let full = sweep_ssim(&beam, &slider, &table_excitation(), &grid, DEFAULT_STATION).unwrap();
        assert_eq!(full.turning_points.len(), 1, "one fold below the center");
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        let beam = table_beam();
        let slider = table_slider();
        let exc = table_excitation();
        assert!(matches!(
            sweep_ssim(&beam, &slider, &exc, &[], DEFAULT_STATION),
            Err(Error::EmptyGrid)
        ));
        assert!(sweep_ssim(&beam, &slider, &exc, &[0.3, 0.3], DEFAULT_STATION).is_err());
    }

    #[test]
    fn tangency_is_flagged_degenerate() {
        // Sit numerically on a fold: scan for the root-count change, then
        // evaluate right at the bracket midpoint with a tight tolerance.
        let beam = table_beam();
        let slider = table_slider();
        let exc = table_excitation();
        let mut lo = 0.29;
        let mut hi = 0.31;
        let count = |s: f64| {
            solve_amplitudes(&rom_coefficients(&beam, &slider, s).unwrap(), &exc)
                .unwrap()
                .points
                .len()
        };
        assert_eq!(count(lo), 1);
        assert_eq!(count(hi), 3);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if count(mid) == 1 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let sol = solve_amplitudes(&rom_coefficients(&beam, &slider, hi).unwrap(), &exc).unwrap();
        assert!(
            sol.degenerate || count(hi) == 3,
            "fold point neither degenerate nor resolved"
        );
    }
}
