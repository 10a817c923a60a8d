//! Closed-form locomotion machinery of the beam-slider system.
//!
//! Everything here treats the beam as locally straight and harmonic and the
//! slider as a rigid body touching it at one of its four channel corners
//! (P1 upper-left, P2 lower-left, P3 lower-right, P4 upper-right). Three
//! transport mechanisms are quantified:
//!
//! - the *pitching cycle*: alternating rotations about single contacts
//!   between the two pitch limits, transporting the slider without sliding;
//! - *slope-induced sliding*: the beam's transverse acceleration projected
//!   onto the rotated beam axis;
//! - *rocking-induced sliding*: the sliding-pendulum effect of the slider
//!   hinged on one closed contact.
//!
//! Formulas use normalized time `tau = Omega t` (excitation scale) and
//! lengths normalized by the beam length `L`; the conversions happen at the
//! API boundary, all inputs here are already dimensionless unless a unit is
//! stated.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::rom::{BeamParameters, ModeShape, SliderParameters, STANDARD_GRAVITY};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// The four contact corners of the slider channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum ContactPoint {
    /// Upper left.
    P1,
    /// Lower left.
    P2,
    /// Lower right.
    P3,
    /// Upper right.
    P4,
}

impl ContactPoint {
    pub const ALL: [ContactPoint; 4] = [
        ContactPoint::P1,
        ContactPoint::P2,
        ContactPoint::P3,
        ContactPoint::P4,
    ];

    /// `+1` for the upper contacts, `-1` for the lower ones.
    pub fn zeta_z(self) -> f64 {
        match self {
            ContactPoint::P1 | ContactPoint::P4 => 1.0,
            ContactPoint::P2 | ContactPoint::P3 => -1.0,
        }
    }

    /// `-1` for the left contacts, `+1` for the right ones.
    pub fn zeta_x(self) -> f64 {
        match self {
            ContactPoint::P1 | ContactPoint::P2 => -1.0,
            ContactPoint::P3 | ContactPoint::P4 => 1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            ContactPoint::P1 => 0,
            ContactPoint::P2 => 1,
            ContactPoint::P3 => 2,
            ContactPoint::P4 => 3,
        }
    }
}

/// Pendulum abstraction of the slider hinged on one contact corner.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PendulumGeometry {
    pub contact: ContactPoint,
    /// Hinge-to-center-of-mass distance `l_i` [m].
    pub length: f64,
    /// Rest angle `sigma_i = zeta_x asin(B / (2 l_i))` between the hinge-CoM
    /// line and the vertical [rad].
    pub sigma: f64,
    pub zeta_z: f64,
    pub zeta_x: f64,
    /// `m l^2 / (J_C + m l^2)`.
    pub inertia_ratio: f64,
}

/// Pendulum geometry of one contact corner: `l_i = sqrt((B/2)^2 +
/// (d + zeta_z R/2)^2)` with the center of mass a distance `d` below the
/// channel center.
pub fn pendulum_geometry(slider: &SliderParameters, contact: ContactPoint) -> PendulumGeometry {
    let half_b = 0.5 * slider.contact_spacing;
    let vertical = slider.com_offset + contact.zeta_z() * 0.5 * slider.gap;
    let length = (half_b * half_b + vertical * vertical).sqrt();
    let sigma = contact.zeta_x() * (half_b / length).asin();
    let ml2 = slider.mass * length * length;
    PendulumGeometry {
        contact,
        length,
        sigma,
        zeta_z: contact.zeta_z(),
        zeta_x: contact.zeta_x(),
        inertia_ratio: ml2 / (slider.rotary_inertia + ml2),
    }
}

/// Maximum slider-beam relative rotation, reached when a diagonal contact
/// pair closes on a straight beam:
/// `beta_rel = atan(R/B) - asin(h / sqrt(R^2 + B^2))` [rad].
pub fn pitch_limit(contact_spacing: f64, gap: f64, thickness: f64) -> Result<f64> {
    if !(contact_spacing > 0.0) {
        return Err(Error::InvalidParameter {
            name: "contact_spacing",
            value: contact_spacing,
            constraint: "> 0",
        });
    }
    if gap < thickness {
        return Err(Error::InvalidParameter {
            name: "gap",
            value: gap,
            constraint: ">= beam thickness (non-negative clearance)",
        });
    }
    let (b, r, h) = (contact_spacing, gap, thickness);
    Ok((r / b).atan() - (h / (r * r + b * b).sqrt()).asin())
}

/// Horizontal transport per pitching cycle, normalized by the beam length.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PitchTransport {
    /// `2/L (R sin(beta) - B (1 - cos(beta)))`.
    pub exact: f64,
    /// Leading-order form `2 R beta / L`.
    pub small_angle: f64,
}

/// Transport per pitching cycle; four identical rotation segments add up to
/// the returned totals.
pub fn pitch_transport(
    contact_spacing: f64,
    gap: f64,
    thickness: f64,
    beam_length: f64,
) -> Result<PitchTransport> {
    let beta = pitch_limit(contact_spacing, gap, thickness)?;
    let exact = 2.0 / beam_length * (gap * beta.sin() - contact_spacing * (1.0 - beta.cos()));
    let small_angle = 2.0 * gap * beta / beam_length;
    Ok(PitchTransport { exact, small_angle })
}

/// Kinematic inputs to the sliding-pendulum equations, all dimensionless
/// (lengths over `L`, time derivatives with respect to `tau = Omega t`).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PendulumInputs {
    /// Beam slope at the hinge, `w_xi / L`.
    pub slope: f64,
    /// Beam curvature at the hinge, `w_xixi / L`.
    pub curvature: f64,
    /// Slope rate, `w_xitau / L`.
    pub slope_rate: f64,
    /// Total transverse acceleration `(w0_tautau + w_tautau) / L`.
    pub acceleration: f64,
    /// Pendulum angle `psi = sigma + beta` [rad].
    pub psi: f64,
    /// Pendulum angular velocity `psi_tau`.
    pub psi_tau: f64,
    /// Hinge horizontal velocity `p_tau`.
    pub p_tau: f64,
}

/// Accelerations of the sliding pendulum hinged on one contact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumAccelerations {
    pub psi_tautau: f64,
    pub p_tautau: f64,
}

/// Full equations of motion of the frictionless sliding pendulum, solved
/// for the two accelerations. The two equations are linear in
/// `(psi_tautau, p_tautau)`; the 2x2 system is solved directly and rejected
/// when it degenerates.
pub fn pendulum_full_eom(
    geom: &PendulumGeometry,
    beam_length: f64,
    inp: &PendulumInputs,
) -> Result<PendulumAccelerations> {
    if inp.psi.abs() >= core::f64::consts::FRAC_PI_2 {
        return Err(Error::OutOfDomain {
            name: "psi",
            value: inp.psi,
            lo: -core::f64::consts::FRAC_PI_2,
            hi: core::f64::consts::FRAC_PI_2,
        });
    }
    let g = geom.inertia_ratio;
    let l_ratio = beam_length / geom.length;
    let (sp, cp) = inp.psi.sin_cos();
    let tan_p = sp / cp;
    let cot_p = cp / sp;

    // Row 1: rotation balance.
    let a11 = 1.0;
    let a12 = g * l_ratio * (inp.slope * sp - cp);
    let b1 = -g
        * l_ratio
        * (inp.curvature * inp.p_tau * inp.p_tau * sp
            + 2.0 * inp.slope_rate * inp.p_tau * sp
            + inp.acceleration * sp);
    // Row 2: horizontal balance.
    let a21 = -(1.0 / l_ratio) * cp * (1.0 - inp.slope * tan_p);
    let a22 = 1.0 + inp.slope * inp.slope;
    let centrifugal = if inp.psi_tau == 0.0 {
        0.0
    } else {
        (1.0 / l_ratio) * inp.psi_tau * inp.psi_tau * sp * (1.0 + inp.slope * cot_p)
    };
    let b2 = -centrifugal
        - (inp.curvature * inp.p_tau * inp.p_tau
            + 2.0 * inp.slope_rate * inp.p_tau
            + inp.acceleration)
            * inp.slope;

    let det = a11 * a22 - a12 * a21;
    let scale = (a11 * a22).abs().max((a12 * a21).abs()).max(1e-30);
    if det.abs() < 1e-12 * scale {
        return Err(Error::SingularSystem {
            what: "sliding-pendulum accelerations",
            conditioning: det.abs() / scale,
        });
    }
    Ok(PendulumAccelerations {
        psi_tautau: (b1 * a22 - a12 * b2) / det,
        p_tautau: (a11 * b2 - a21 * b1) / det,
    })
}

/// Leading-order accelerations of the hinged slider.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedAccelerations {
    /// `-(w_acc) (L/l) (m l^2/(J_C + m l^2)) sin(sigma)`.
    pub psi_tautau: f64,
    /// Slope-induced part `-(w_acc)(w_xi/L)`.
    pub p_slope: f64,
    /// Rocking-induced part `-(w_acc) (m l^2/(J_C + m l^2)) sin(2 sigma)/2`.
    pub p_rock: f64,
}

/// Dominant acceleration terms for small slope, small relative rotation and
/// negligible hinge velocity.
pub fn reduced_accelerations(
    geom: &PendulumGeometry,
    beam_length: f64,
    acceleration: f64,
    slope: f64,
) -> ReducedAccelerations {
    let g = geom.inertia_ratio;
    ReducedAccelerations {
        psi_tautau: -acceleration * (beam_length / geom.length) * g * geom.sigma.sin(),
        p_slope: -acceleration * slope,
        p_rock: -acceleration * g * (2.0 * geom.sigma).sin() / 2.0,
    }
}

/// Dimensionless rocking coefficients of the upper and lower contacts:
/// `Lambda = (m l^2/(J_C + m l^2)) sin(2|sigma|)/2`, evaluated for P1
/// (upper) and P2 (lower).
pub fn lambda_coefficients(slider: &SliderParameters) -> (f64, f64) {
    let upper = pendulum_geometry(slider, ContactPoint::P1);
    let lower = pendulum_geometry(slider, ContactPoint::P2);
    let lam = |g: &PendulumGeometry| g.inertia_ratio * (2.0 * g.sigma.abs()).sin() / 2.0;
    (lam(&upper), lam(&lower))
}

/// Reference vibration state at one slider position, used by the slip
/// estimates. Amplitudes are magnitudes, normalized by the beam length.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CaseConditions {
    /// Slider position `s`.
    pub s: f64,
    /// Displacement amplitude at the slider, `w_hat(s)/L`.
    pub displacement: f64,
    /// Slope amplitude, `w_hat_xi(s)/L`.
    pub slope: f64,
    /// Curvature amplitude, `w_hat_xixi(s)/L`.
    pub curvature: f64,
    /// Center displacement amplitude `q_hat`.
    pub q_hat: f64,
    /// Displacement ratio right/left contact.
    pub amplitude_ratio: f64,
}

impl CaseConditions {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("displacement", self.displacement),
            ("slope", self.slope),
            ("curvature", self.curvature),
            ("q_hat", self.q_hat),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value: v,
                    constraint: ">= 0 and finite",
                });
            }
        }
        Ok(())
    }
}

/// Slip-per-cycle estimates for one reference state.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SlipPerCycle {
    /// Slope-induced slip `pi^2 (w_hat/L)(w_hat_xi/L)`, toward the center.
    pub slope: f64,
    /// Rocking-induced slip, negative (away from the center) for `s < 1/2`.
    pub rock: f64,
}

/// Fraction of the excitation period each side's contacts are taken to be
/// closed when accumulating rocking slip. The quarter-period sequence of the
/// idealized cycle runs per side, so each side integrates over half a
/// period.
pub const ROCK_DUTY: f64 = 2.0;

/// Estimate the slope- and rocking-induced slider slip per excitation cycle,
/// assuming frictionless sliding.
///
/// The rocking term needs the displacement amplitudes at the left and right
/// contacts; these come from the fundamental mode shape,
/// `w_hat(s +- B/2L) = q_hat L phi(s +- B/2L)/phi(1/2)`.
pub fn slip_per_cycle(
    case: &CaseConditions,
    slider: &SliderParameters,
    beam: &BeamParameters,
) -> Result<SlipPerCycle> {
    case.validate()?;
    let pi = core::f64::consts::PI;
    let slope = pi * pi * case.displacement * case.slope;

    let shape = ModeShape::for_mode(1)?;
    let off = slider.contact_spacing / (2.0 * beam.length);
    let w_right = case.q_hat * shape.center_ratio(case.s + off)?;
    let w_left = case.q_hat * shape.center_ratio(case.s - off)?;
    let (lam_o, lam_u) = lambda_coefficients(slider);
    let rock = -ROCK_DUTY * (w_right - w_left) * (lam_o - lam_u);
    Ok(SlipPerCycle { slope, rock })
}

/// Verdict of the stick/slip comparison for one mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SlipVerdict {
    /// Acceleration ratio clearly exceeds the friction coefficient.
    Slides,
    /// Within 20 % of the friction coefficient.
    Marginal,
    /// Clearly below the friction coefficient: sticks.
    Sticks,
}

fn verdict(ratio: f64, mu: f64) -> SlipVerdict {
    if mu == 0.0 {
        return SlipVerdict::Slides;
    }
    if ratio >= 1.2 * mu {
        SlipVerdict::Slides
    } else if ratio >= 0.8 * mu {
        SlipVerdict::Marginal
    } else {
        SlipVerdict::Sticks
    }
}

/// Stick/slip prediction: the tangential/normal acceleration ratio of each
/// mechanism against the friction coefficient.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct StickSlipReport {
    /// `|w_hat_xi / L|`, the slope mechanism's acceleration ratio.
    pub slope_ratio: f64,
    pub slope_alone: SlipVerdict,
    pub lambda_upper: f64,
    pub lambda_lower: f64,
    pub rocking_upper: SlipVerdict,
    pub rocking_lower: SlipVerdict,
    /// Rocking reaches the friction cone (within 20 %), so sliding windows
    /// exist and the slope mechanism can act during them.
    pub rocking_enables_slope: bool,
}

/// Compare slope- and rocking-induced acceleration ratios against static
/// friction.
pub fn stick_slip_predictor(slider: &SliderParameters, case: &CaseConditions) -> StickSlipReport {
    let mu = slider.friction_coefficient;
    let (lam_o, lam_u) = lambda_coefficients(slider);
    let slope_ratio = case.slope.abs();
    let rocking_upper = verdict(lam_o, mu);
    let rocking_lower = verdict(lam_u, mu);
    StickSlipReport {
        slope_ratio,
        slope_alone: verdict(slope_ratio, mu),
        lambda_upper: lam_o,
        lambda_lower: lam_u,
        rocking_upper,
        rocking_lower,
        rocking_enables_slope: rocking_upper != SlipVerdict::Sticks
            || rocking_lower != SlipVerdict::Sticks,
    }
}

/// Phase of the elastic response relative to the base displacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum BranchPhase {
    InPhase,
    AntiPhase,
}

/// Gravity verdict for vibration-induced locomotion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Activity {
    Active,
    Marginal,
    Inactive,
}

/// Peak total acceleration below which the upper contacts never open.
const INACTIVE_BAND: f64 = 0.8;
/// Peak total acceleration above which contact opening clearly dominates.
const ACTIVE_FACTOR: f64 = 2.0;

/// Can gravity impede locomotion? Compares the peak total transverse
/// acceleration `|w0_acc +- w_acc|` (sign per branch phase) against the
/// gravitational acceleration. When the peak never clearly exceeds gravity
/// the upper contacts stay (mostly) closed and locomotion stalls; the band
/// between `0.8 g` and `2 g` is reported as marginal.
///
/// `base_amplitude` and `response_amplitude` are displacement amplitudes in
/// meters, `frequency` the excitation angular frequency in rad/s.
pub fn inactivity_check(
    base_amplitude: f64,
    frequency: f64,
    response_amplitude: f64,
    phase: BranchPhase,
) -> Activity {
    let base_acc = base_amplitude * frequency * frequency;
    let resp_acc = response_amplitude * frequency * frequency;
    let peak = match phase {
        BranchPhase::InPhase => (base_acc + resp_acc).abs(),
        BranchPhase::AntiPhase => (resp_acc - base_acc).abs(),
    };
    if peak <= INACTIVE_BAND * STANDARD_GRAVITY {
        Activity::Inactive
    } else if peak <= ACTIVE_FACTOR * STANDARD_GRAVITY {
        Activity::Marginal
    } else {
        Activity::Active
    }
}

/// Pendulum table for all four contacts.
pub fn pendulum_table(slider: &SliderParameters) -> Vec<PendulumGeometry> {
    ContactPoint::ALL
        .iter()
        .map(|&c| pendulum_geometry(slider, c))
        .collect()
}
