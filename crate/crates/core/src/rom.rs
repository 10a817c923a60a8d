//! Reduced-order models of the clamped-clamped beam with attached slider.
//!
//! The beam is a uniform Euler-Bernoulli beam of length `L`, rectangular
//! cross section (area `A`, bending moment of inertia `I`), clamped at both
//! ends. Its bending eigenvalues are the roots of
//!
//! ```text
//! cos(lambda) cosh(lambda) = 1
//! ```
//!
//! and the n-th mode shape is
//!
//! ```text
//! phi(xi) = c (sin(lambda xi) - sinh(lambda xi)) + cos(lambda xi) - cosh(lambda xi)
//! c       = (sin(lambda) + sinh(lambda)) / (cos(lambda) - cosh(lambda))
//! ```
//!
//! with `xi = x/L`. This normalization has the convenient property
//! `int phi^2 dxi = 1`. The naive formula above suffers catastrophic
//! cancellation between the hyperbolic terms for `lambda xi >~ 12`, so the
//! evaluation below is rearranged into decaying exponentials
//! `exp(-lambda xi)` and `exp(-lambda (1 - xi))`, which keeps the clamped-end
//! boundary conditions accurate to machine precision for every mode order
//! used here.
//!
//! With the modal coordinate chosen as the normalized center deflection
//! `q = w(1/2)/L`, a slider of mass `m` and rotary inertia `J` rigidly
//! attached at normalized position `s` leads to the single-mode model
//!
//! ```text
//! (1 + mu) q'' + 2 D q' + q + kappa q^3 = -gamma w0''/L
//! ```
//!
//! in normalized time `tau = omega t`, where `mu(s)` and `gamma(s)` collect
//! the slider inertia projections and `kappa` the bending-stretching
//! coupling through the serial axial stiffness `k_ax`. The multi-mode
//! generalization keeps the same scaling and adds the full quartic stretch
//! energy `U = c3/4 (q^T G q)^2` with `G_jk = int phi_j' phi_k' dxi`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quadrature;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Absolute tolerance for the mode-shape quadratures.
pub const QUAD_TOL: f64 = 1e-10;

/// Gravitational acceleration in m/s^2.
pub const STANDARD_GRAVITY: f64 = 9.81;

/// Physical beam description. All quantities in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct BeamParameters {
    /// Free length `L` [m].
    pub length: f64,
    /// Thickness `h` [m].
    pub thickness: f64,
    /// Mass density `rho` [kg/m^3].
    pub density: f64,
    /// Young's modulus `E` [Pa].
    pub youngs_modulus: f64,
    /// Cross-section area `A` [m^2].
    pub cross_section_area: f64,
    /// Area moment of inertia `I` [m^4]; must equal `A h^2 / 12`.
    pub area_moment: f64,
    /// Axial stiffness of the clamping `k_t` [N/m].
    pub axial_clamping_stiffness: f64,
    /// Modal damping ratio `D` [-].
    pub damping_ratio: f64,
    /// Measured fundamental angular frequency [rad/s], if available.
    ///
    /// The analytic frequency from the listed `E`, `I`, `rho A` can differ
    /// from the identified one (e.g. because of finite rotational clamping
    /// stiffness), so the measured value is an explicit, independent input.
    /// When absent the analytic value is used.
    pub modal_frequency_override: Option<f64>,
}

impl BeamParameters {
    /// Check positivity and cross-section consistency (`I = A h^2 / 12`).
    pub fn validate(&self) -> Result<()> {
        let pos: [(&'static str, f64); 7] = [
            ("length", self.length),
            ("thickness", self.thickness),
            ("density", self.density),
            ("youngs_modulus", self.youngs_modulus),
            ("cross_section_area", self.cross_section_area),
            ("area_moment", self.area_moment),
            ("axial_clamping_stiffness", self.axial_clamping_stiffness),
        ];
        for (name, value) in pos {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    value,
                    constraint: "> 0 and finite",
                });
            }
        }
        if !(self.damping_ratio >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "damping_ratio",
                value: self.damping_ratio,
                constraint: ">= 0",
            });
        }
        if let Some(w) = self.modal_frequency_override {
            if !(w > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "modal_frequency_override",
                    value: w,
                    constraint: "> 0",
                });
            }
        }
        let i_rect = self.cross_section_area * self.thickness * self.thickness / 12.0;
        if ((self.area_moment - i_rect) / i_rect).abs() > 1e-12 {
            return Err(Error::InvalidParameter {
                name: "area_moment",
                value: self.area_moment,
                constraint: "I = A h^2 / 12 for a rectangular section (1e-12 relative)",
            });
        }
        Ok(())
    }

    /// Beam mass over the free length, `rho A L` [kg].
    pub fn mass(&self) -> f64 {
        self.density * self.cross_section_area * self.length
    }

    /// Analytic fundamental angular frequency for eigenvalue `lambda` [rad/s].
    pub fn analytic_frequency(&self, lambda: f64) -> f64 {
        let l = self.length;
        (self.youngs_modulus * self.area_moment
            / (self.density * self.cross_section_area * l * l * l * l))
            .sqrt()
            * lambda
            * lambda
    }

    /// Effective fundamental frequency: the override when given, else analytic.
    pub fn fundamental_frequency(&self, lambda: f64) -> f64 {
        self.modal_frequency_override
            .unwrap_or_else(|| self.analytic_frequency(lambda))
    }

    /// Serial axial stiffness `1/k_ax = 1/(EA/L) + 1/k_t` [N/m].
    pub fn axial_stiffness(&self) -> f64 {
        let ea_l = self.youngs_modulus * self.cross_section_area / self.length;
        1.0 / (1.0 / ea_l + 1.0 / self.axial_clamping_stiffness)
    }
}

/// Rigid slider description. All quantities in SI units.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SliderParameters {
    /// Mass `m` [kg].
    pub mass: f64,
    /// Rotary inertia about the center of mass `J_C` [kg m^2].
    pub rotary_inertia: f64,
    /// Horizontal distance between the two contacts on the same side `B` [m].
    pub contact_spacing: f64,
    /// Vertical gap size of the slider channel `R` [m].
    pub gap: f64,
    /// Vertical distance from the geometric center to the center of mass `d` [m].
    pub com_offset: f64,
    /// Coulomb friction coefficient between slider and beam [-].
    pub friction_coefficient: f64,
    /// Newton restitution coefficient for normal impacts [-].
    pub restitution: f64,
}

impl SliderParameters {
    /// Check the slider invariants against the paired beam (`R > h` so the
    /// clearance is positive).
    pub fn validate(&self, beam: &BeamParameters) -> Result<()> {
        if !(self.mass >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "mass",
                value: self.mass,
                constraint: ">= 0",
            });
        }
        if !(self.rotary_inertia > 0.0) {
            return Err(Error::InvalidParameter {
                name: "rotary_inertia",
                value: self.rotary_inertia,
                constraint: "> 0",
            });
        }
        if !(self.contact_spacing > 0.0) {
            return Err(Error::InvalidParameter {
                name: "contact_spacing",
                value: self.contact_spacing,
                constraint: "> 0",
            });
        }
        if self.gap <= beam.thickness {
            return Err(Error::InvalidParameter {
                name: "gap",
                value: self.gap,
                constraint: "> beam thickness (positive clearance)",
            });
        }
        if !(0.0..=1.0).contains(&self.restitution) {
            return Err(Error::InvalidParameter {
                name: "restitution",
                value: self.restitution,
                constraint: "in [0, 1]",
            });
        }
        if !(self.friction_coefficient >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "friction_coefficient",
                value: self.friction_coefficient,
                constraint: ">= 0",
            });
        }
        Ok(())
    }

    /// Radial clearance `(R - h)/2` [m].
    pub fn clearance(&self, beam: &BeamParameters) -> f64 {
        0.5 * (self.gap - beam.thickness)
    }

    /// Rotary inertia about the geometric center, `J_Q = J_C + m d^2`.
    pub fn inertia_about_center(&self) -> f64 {
        self.rotary_inertia + self.mass * self.com_offset * self.com_offset
    }
}

/// Solve `cos(lambda) cosh(lambda) = 1` for the `mode_index`-th positive root.
///
/// The roots approach `(n + 1/2) pi`, so each is bracketed in
/// `[(n + 0.4) pi, (n + 0.6) pi]` and located by bisection on the
/// cancellation-free form `cos(lambda) - 1/cosh(lambda)`, followed by a
/// Newton polish.
pub fn solve_frequency_equation(mode_index: usize) -> Result<f64> {
    if mode_index < 1 {
        return Err(Error::OutOfDomain {
            name: "mode_index",
            value: mode_index as f64,
            lo: 1.0,
            hi: f64::INFINITY,
        });
    }
    let n = mode_index as f64;
    let pi = core::f64::consts::PI;
    let (mut lo, mut hi) = ((n + 0.4) * pi, (n + 0.6) * pi);
    // f(lambda) = cos(lambda) - sech(lambda): same roots as the frequency
    // equation, but O(1) in magnitude so bisection is reliable for any mode.
    let f = |x: f64| x.cos() - 1.0 / x.cosh();
    let (flo, fhi) = (f(lo), f(hi));
    if flo == 0.0 {
        return Ok(lo);
    }
    if flo * fhi > 0.0 {
        return Err(Error::RootSearchFailed {
            lo,
            hi,
            residual: flo.min(fhi),
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    // Newton polish on the same well-scaled form.
    for _ in 0..4 {
        let fx = f(x);
        let dfx = -x.sin() + x.sinh() / (x.cosh() * x.cosh());
        let step = fx / dfx;
        if !step.is_finite() {
            break;
        }
        x -= step;
    }
    let residual = f(x).abs();
    if residual > 1e-12 {
        return Err(Error::RootSearchFailed { lo, hi, residual });
    }
    Ok(x)
}

/// Mode shape value and derivatives at a normalized position.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ModeShapeEval {
    /// Normalized position along the beam.
    pub xi: f64,
    /// Shape value.
    pub phi: f64,
    /// First derivative with respect to `xi`.
    pub dphi: f64,
    /// Second derivative with respect to `xi`.
    pub ddphi: f64,
}

/// Analytic clamped-clamped mode shape for one eigenvalue.
///
/// Construction precomputes the cancellation-free coefficients; evaluation
/// is then a handful of trig/exp calls.
#[derive(Debug, Clone, Copy)]
pub struct ModeShape {
    lambda: f64,
    c: f64,
    one_minus_c: f64,
    /// `2 (sin + cos)(lambda) - 2 exp(-lambda)`; `(c+1) e^(lambda xi)` equals
    /// `num1 e^(-lambda (1-xi)) / denom`.
    num1: f64,
    denom: f64,
}

impl ModeShape {
    /// Build the shape for an eigenvalue from [`solve_frequency_equation`].
    pub fn new(lambda: f64) -> Self {
        let e = (-lambda).exp();
        let denom = 2.0 * lambda.cos() * e - 1.0 - e * e;
        let c = (2.0 * lambda.sin() * e + 1.0 - e * e) / denom;
        let num1 = 2.0 * (lambda.sin() + lambda.cos()) - 2.0 * e;
        ModeShape {
            lambda,
            c,
            one_minus_c: 1.0 - c,
            num1,
            denom,
        }
    }

    /// Convenience constructor solving the frequency equation first.
    pub fn for_mode(mode_index: usize) -> Result<Self> {
        Ok(Self::new(solve_frequency_equation(mode_index)?))
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Evaluate `phi`, `phi_xi`, `phi_xixi` analytically at `xi in [0, 1]`.
    pub fn eval(&self, xi: f64) -> Result<ModeShapeEval> {
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::OutOfDomain {
                name: "xi",
                value: xi,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(self.eval_unchecked(xi))
    }

    /// Evaluation without the domain check, for hot loops that already
    /// guarantee `xi in [0, 1]`.
    pub fn eval_unchecked(&self, xi: f64) -> ModeShapeEval {
        let l = self.lambda;
        let u = l * xi;
        let (su, cu) = (u.sin(), u.cos());
        // p = (c+1) e^u, q = (1-c) e^-u, both evaluated without large terms.
        let p = self.num1 * (-l * (1.0 - xi)).exp() / self.denom;
        let q = self.one_minus_c * (-u).exp();
        let phi = self.c * su + cu - 0.5 * (p + q);
        let dphi = l * (self.c * cu - su - 0.5 * (p - q));
        let ddphi = l * l * (-self.c * su - cu - 0.5 * (p + q));
        ModeShapeEval {
            xi,
            phi,
            dphi,
            ddphi,
        }
    }

    /// `phi(xi) / phi(1/2)`, the deflection relative to the beam center.
    pub fn center_ratio(&self, xi: f64) -> Result<f64> {
        Ok(self.eval(xi)?.phi / self.eval_unchecked(0.5).phi)
    }
}

/// The two mode-shape integrals entering the model coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadratures {
    /// `int_0^1 phi dxi`.
    pub int_phi: f64,
    /// `int_0^1 phi_xi^2 dxi`.
    pub int_dphi_sq: f64,
}

/// Compute the coefficient integrals by adaptive quadrature (abs tol 1e-10).
pub fn integrate_quadratures(shape: &ModeShape) -> Quadratures {
    Quadratures {
        int_phi: quadrature::integrate(|x| shape.eval_unchecked(x).phi, 0.0, 1.0, QUAD_TOL),
        int_dphi_sq: quadrature::integrate(
            |x| {
                let d = shape.eval_unchecked(x).dphi;
                d * d
            },
            0.0,
            1.0,
            QUAD_TOL,
        ),
    }
}

/// Dimensionless coefficients of the single-mode model.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct RomCoefficients {
    /// Eigenvalue of the frequency equation.
    pub lambda: f64,
    /// Fundamental angular frequency used for time normalization [rad/s].
    pub omega: f64,
    /// Added-inertia coefficient `mu(s)`.
    pub mu: f64,
    /// Cubic stiffness coefficient `kappa` (independent of `s`).
    pub kappa: f64,
    /// Base-excitation participation `gamma(s)`.
    pub gamma: f64,
    /// Serial axial stiffness `k_ax` [N/m].
    pub k_ax: f64,
    /// Modal damping ratio `D`.
    pub damping: f64,
    /// Normalized slider position the s-dependent coefficients refer to.
    pub slider_position: f64,
}

/// Coefficients of the single-mode model for a slider rigidly attached at `s`.
///
/// `mu` collects the translational and rotational slider inertia through
/// `phi^2(s)` and `phi_xi^2(s)`, `gamma` the base-excitation participation,
/// and `kappa` the bending-stretching coupling; `kappa` is normalized with
/// the analytic modal stiffness `(EI/L^3) lambda^4`, so it depends only on
/// the listed elastic inputs, while `omega` honors the measured override.
pub fn rom_coefficients(
    beam: &BeamParameters,
    slider: &SliderParameters,
    s: f64,
) -> Result<RomCoefficients> {
    beam.validate()?;
    slider.validate(beam)?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfDomain {
            name: "s",
            value: s,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let lambda = solve_frequency_equation(1)?;
    let shape = ModeShape::new(lambda);
    let quads = integrate_quadratures(&shape);
    let at_s = shape.eval_unchecked(s);
    let phi_c = shape.eval_unchecked(0.5).phi;

    let l = beam.length;
    let beam_mass = beam.mass();
    let mass_ratio = slider.mass / beam_mass;
    let j_q = slider.inertia_about_center();

    let mu = mass_ratio * at_s.phi * at_s.phi + j_q / (beam_mass * l * l) * at_s.dphi * at_s.dphi;
    let gamma = phi_c * (quads.int_phi + mass_ratio * at_s.phi);
    let k_ax = beam.axial_stiffness();
    let modal_stiffness = beam.youngs_modulus * beam.area_moment / (l * l * l) * lambda.powi(4);
    let kappa = k_ax / modal_stiffness * 0.5 * (quads.int_dphi_sq / phi_c).powi(2);

    Ok(RomCoefficients {
        lambda,
        omega: beam.fundamental_frequency(lambda),
        mu,
        kappa,
        gamma,
        k_ax,
        damping: beam.damping_ratio,
        slider_position: s,
    })
}

/// Bare-beam modal basis shared by the multi-mode model and the contact
/// simulation: eigenvalues, shapes, natural frequencies and the coupling
/// integrals `I_n = int phi_n dxi`, `G_jk = int phi_j' phi_k' dxi`.
#[derive(Debug, Clone)]
pub struct ModalBasis {
    shapes: Vec<ModeShape>,
    /// Natural angular frequencies `omega_n = omega_1 (lambda_n/lambda_1)^2`.
    omegas: Vec<f64>,
    int_phi: Vec<f64>,
    grad: Vec<f64>,
    phi_center_1: f64,
}

/// Largest supported modal truncation order.
pub const MAX_MODES: usize = 8;

impl ModalBasis {
    pub fn new(beam: &BeamParameters, n_modes: usize) -> Result<Self> {
        beam.validate()?;
        if !(1..=MAX_MODES).contains(&n_modes) {
            return Err(Error::OutOfDomain {
                name: "n_modes",
                value: n_modes as f64,
                lo: 1.0,
                hi: MAX_MODES as f64,
            });
        }
        let mut shapes = Vec::with_capacity(n_modes);
        for n in 1..=n_modes {
            shapes.push(ModeShape::for_mode(n)?);
        }
        let lambda1 = shapes[0].lambda();
        let omega1 = beam.fundamental_frequency(lambda1);
        let omegas: Vec<f64> = shapes
            .iter()
            .map(|sh| omega1 * (sh.lambda() / lambda1).powi(2))
            .collect();
        let int_phi: Vec<f64> = shapes
            .iter()
            .map(|sh| quadrature::integrate(|x| sh.eval_unchecked(x).phi, 0.0, 1.0, QUAD_TOL))
            .collect();
        let mut grad = vec![0.0; n_modes * n_modes];
        for j in 0..n_modes {
            for k in j..n_modes {
                let v = quadrature::integrate(
                    |x| shapes[j].eval_unchecked(x).dphi * shapes[k].eval_unchecked(x).dphi,
                    0.0,
                    1.0,
                    QUAD_TOL,
                );
                grad[j * n_modes + k] = v;
                grad[k * n_modes + j] = v;
            }
        }
        let phi_center_1 = shapes[0].eval_unchecked(0.5).phi;
        Ok(ModalBasis {
            shapes,
            omegas,
            int_phi,
            grad,
            phi_center_1,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.shapes.len()
    }

    pub fn shapes(&self) -> &[ModeShape] {
        &self.shapes
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn int_phi(&self) -> &[f64] {
        &self.int_phi
    }

    /// `G_jk = int phi_j' phi_k' dxi`.
    pub fn grad_integral(&self, j: usize, k: usize) -> f64 {
        self.grad[j * self.shapes.len() + k]
    }

    /// First-mode center deflection `phi_1(1/2)`.
    pub fn phi_center(&self) -> f64 {
        self.phi_center_1
    }

    /// Fill `phi[n] = phi_n(xi)` for all modes.
    pub fn eval_phi(&self, xi: f64, out: &mut [f64]) {
        for (o, sh) in out.iter_mut().zip(&self.shapes) {
            *o = sh.eval_unchecked(xi).phi;
        }
    }

    /// Fill `dphi[n] = phi_n'(xi)` for all modes.
    pub fn eval_dphi(&self, xi: f64, out: &mut [f64]) {
        for (o, sh) in out.iter_mut().zip(&self.shapes) {
            *o = sh.eval_unchecked(xi).dphi;
        }
    }
}

/// Coefficient set of the multi-mode model with rigidly attached slider.
///
/// Generalized coordinates are `q_n` with `w(xi)/L = sum_n q_n phi_n(xi) /
/// phi_1(1/2)` and normalized time `tau = omega t`, so `n_modes = 1`
/// reproduces [`RomCoefficients`] entry by entry:
///
/// ```text
/// M q'' + C q' + K q + c3 (q^T G q) G q = -gamma w0''/L
/// ```
#[derive(Debug, Clone)]
pub struct MultiModeRom {
    /// Number of retained modes.
    pub n_modes: usize,
    /// Eigenvalues `lambda_n`.
    pub lambdas: Vec<f64>,
    /// Time-normalization frequency (fundamental, override-aware) [rad/s].
    pub omega: f64,
    /// Mass matrix `M_jk = delta_jk + mu_jk(s)`, row-major.
    pub mass: Vec<f64>,
    /// Diagonal stiffness `K_n = (lambda_n / lambda_1)^4`.
    pub stiffness: Vec<f64>,
    /// Diagonal damping `C_n = 2 D (lambda_n / lambda_1)^2`.
    pub damping: Vec<f64>,
    /// Cubic coefficient `c3`; for one mode `c3 G_11^2 = kappa`.
    pub cubic: f64,
    /// Stretch coupling matrix `G_jk`, row-major.
    pub grad: Vec<f64>,
    /// Excitation participation `gamma_n(s)`.
    pub gamma: Vec<f64>,
    /// Slider position the coefficients refer to.
    pub slider_position: f64,
}

/// Galerkin coefficients of the beam with axial-stretch coupling and the
/// slider inertia rigidly attached at `s`, truncated to `n_modes` modes.
pub fn multi_mode_model(
    beam: &BeamParameters,
    slider: &SliderParameters,
    s: f64,
    n_modes: usize,
) -> Result<MultiModeRom> {
    slider.validate(beam)?;
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfDomain {
            name: "s",
            value: s,
            lo: 0.0,
            hi: 1.0,
        });
    }
    let basis = ModalBasis::new(beam, n_modes)?;
    let l = beam.length;
    let beam_mass = beam.mass();
    let mass_ratio = slider.mass / beam_mass;
    let j_q = slider.inertia_about_center();
    let j_term = j_q / (beam_mass * l * l);
    let phi_c = basis.phi_center();

    let mut phi_s = vec![0.0; n_modes];
    let mut dphi_s = vec![0.0; n_modes];
    basis.eval_phi(s, &mut phi_s);
    basis.eval_dphi(s, &mut dphi_s);

    let lambda1 = basis.shapes()[0].lambda();
    let mut mass = vec![0.0; n_modes * n_modes];
    for j in 0..n_modes {
        for k in 0..n_modes {
            let mut v = mass_ratio * phi_s[j] * phi_s[k] + j_term * dphi_s[j] * dphi_s[k];
            if j == k {
                v += 1.0;
            }
            mass[j * n_modes + k] = v;
        }
    }
    let lambdas: Vec<f64> = basis.shapes().iter().map(|sh| sh.lambda()).collect();
    let stiffness: Vec<f64> = lambdas.iter().map(|&ln| (ln / lambda1).powi(4)).collect();
    let damping: Vec<f64> = lambdas
        .iter()
        .map(|&ln| 2.0 * beam.damping_ratio * (ln / lambda1).powi(2))
        .collect();
    let gamma: Vec<f64> = (0..n_modes)
        .map(|n| phi_c * (basis.int_phi()[n] + mass_ratio * phi_s[n]))
        .collect();
    // Normalized with the analytic modal stiffness, matching `kappa`.
    let modal_stiffness = beam.youngs_modulus * beam.area_moment / (l * l * l) * lambda1.powi(4);
    let cubic = beam.axial_stiffness() / modal_stiffness * 0.5 / (phi_c * phi_c);

    let grad: Vec<f64> = (0..n_modes * n_modes)
        .map(|i| basis.grad_integral(i / n_modes, i % n_modes))
        .collect();

    Ok(MultiModeRom {
        n_modes,
        lambdas,
        omega: beam.fundamental_frequency(lambda1),
        mass,
        stiffness,
        damping,
        cubic,
        grad,
        gamma,
        slider_position: s,
    })
}

impl MultiModeRom {
    /// Cubic restoring force `c3 (q^T G q) (G q)` for the current coordinates.
    pub fn cubic_force(&self, q: &[f64], out: &mut [f64]) {
        let n = self.n_modes;
        let mut gq = vec![0.0; n];
        let mut qgq = 0.0;
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += self.grad[j * n + k] * q[k];
            }
            gq[j] = acc;
            qgq += q[j] * acc;
        }
        for j in 0..n {
            out[j] = self.cubic * qgq * gq[j];
        }
    }
}
