//! System parameters and the linear Langevin model built from them.

use nalgebra::{Matrix6, SMatrix};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Reduced Planck constant, J·s.
const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
const K_B: f64 = 1.380_649e-23;

/// Labels of the Langevin state vector, mechanics first.
pub const STATE_ORDERING: [&str; 6] = ["x_m", "p_m", "X+", "Y+", "X-", "Y-"];
/// Labels of the output quadrature vector.
pub const OUTPUT_ORDERING: [&str; 4] = ["X+", "Y+", "X-", "Y-"];

pub const MODEL_DIM: usize = 6;

/// Frame in which the drift matrix is written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Interaction picture with the detunings and mechanical rotation removed;
    /// time independent only when `Δ- = -Δ+ = ω_m`, which it assumes.
    #[default]
    Rwa,
    /// Rotating frame at the pump frequencies, detunings and `ω_m` kept.
    Full,
}

/// Rates and couplings, all in units of the mechanical frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_m: f64,
    /// Amplitude decay rate of the blue-detuned cavity.
    pub kappa_plus: f64,
    /// Amplitude decay rate of the red-detuned cavity.
    pub kappa_minus: f64,
    /// Amplitude decay rate of the mechanics.
    pub gamma_m: f64,
    pub g_plus: f64,
    pub g_minus: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    /// Thermal occupation of the mechanical bath.
    pub n_m: f64,
    pub frame: Frame,
}

impl Default for SystemParams {
    /// κ± = 0.02, G- = 0.15, G+ = 0.2 G-, Q = 1.5×10⁵, n_m = 500, Δ- = -Δ+ = 1.
    fn default() -> Self {
        let g_minus = 0.15;
        Self {
            omega_m: 1.0,
            kappa_plus: 0.02,
            kappa_minus: 0.02,
            gamma_m: 1.0 / 1.5e5,
            g_plus: 0.2 * g_minus,
            g_minus,
            delta_plus: -1.0,
            delta_minus: 1.0,
            n_m: 500.0,
            frame: Frame::Rwa,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_m", self.omega_m),
            ("kappa_plus", self.kappa_plus),
            ("kappa_minus", self.kappa_minus),
            ("gamma_m", self.gamma_m),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, "must be finite and > 0"));
            }
        }
        let non_negative = [
            ("g_plus", self.g_plus),
            ("g_minus", self.g_minus),
            ("n_m", self.n_m),
        ];
        for (name, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::invalid(name, "must be finite and >= 0"));
            }
        }
        for (name, value) in [("delta_plus", self.delta_plus), ("delta_minus", self.delta_minus)] {
            if !value.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Mechanical quality factor `Q = ω_m / γ_m`.
    pub fn quality_factor(&self) -> f64 {
        self.omega_m / self.gamma_m
    }

    /// Red-sideband cooperativity `C- = 4 G-² / (κ- γ_m)`.
    pub fn cooperativity(&self) -> f64 {
        4.0 * self.g_minus * self.g_minus / (self.kappa_minus * self.gamma_m)
    }

    /// Returns a copy with `n_m` taken from the bath temperature.
    pub fn with_temperature(mut self, temperature_k: f64, omega_m_rad_s: f64) -> Result<Self> {
        self.n_m = n_m_from_temperature(temperature_k, omega_m_rad_s)?;
        Ok(self)
    }
}

/// Bose occupation `(e^{ħω/k_B T} - 1)^{-1}` of a mode at angular frequency
/// `omega_m_rad_s` (rad/s) in a bath at `temperature_k` (K).
pub fn n_m_from_temperature(temperature_k: f64, omega_m_rad_s: f64) -> Result<f64> {
    if !(temperature_k.is_finite() && temperature_k > 0.0) {
        return Err(Error::invalid("temperature", "must be finite and > 0 K"));
    }
    if !(omega_m_rad_s.is_finite() && omega_m_rad_s > 0.0) {
        return Err(Error::invalid("omega_m_hz", "must be finite and > 0"));
    }
    let x = HBAR * omega_m_rad_s / (K_B * temperature_k);
    Ok(1.0 / x.exp_m1())
}

/// Linear Langevin system `du = A u dt + L dW`, with white inputs of
/// symmetrized covariance `N`, and outputs `y = B u - Π ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub drift: Matrix6<f64>,
    /// Diagonal rate prefactors `√(2γ_m)`, `√(2κ±)`.
    pub noise_input: Matrix6<f64>,
    /// Unit-rate symmetrized input covariances: `n_m + ½` for the mechanics, ½ for the cavities.
    pub input_diffusion: Matrix6<f64>,
    /// Cavity quadratures scaled by `√(2κ±)`.
    pub output_map: SMatrix<f64, 4, 6>,
    /// Picks the cavity input quadratures reflected at the output port.
    pub output_input_projector: SMatrix<f64, 4, 6>,
    pub frame: Frame,
    pub params: SystemParams,
}

impl LinearModel {
    pub const DIM: usize = MODEL_DIM;

    /// `D = L N Lᵀ`.
    pub fn diffusion(&self) -> Matrix6<f64> {
        self.noise_input * self.input_diffusion * self.noise_input.transpose()
    }

    pub fn ordering(&self) -> [&'static str; 6] {
        STATE_ORDERING
    }
}

/// Builds the model in whichever frame `params.frame` names.
pub fn build_model(params: &SystemParams) -> Result<LinearModel> {
    match params.frame {
        Frame::Rwa => build_rwa_model(params),
        Frame::Full => build_full_model(params),
    }
}

/// Drift matrix with the coupling layout of the interaction-picture equations
/// of motion (mechanics first, detuning-free).
pub fn build_rwa_model(params: &SystemParams) -> Result<LinearModel> {
    if params.frame != Frame::Rwa {
        return Err(Error::invalid("frame", "build_rwa_model needs frame = rwa"));
    }
    params.validate()?;
    Ok(assemble(params, rwa_drift(params), Frame::Rwa))
}

/// Drift of the linearized Hamiltonian with detuning and mechanical rotation
/// blocks. For `Δ- = -Δ+ = ω_m` the rotation part commutes with the rwa drift,
/// so both frames share their decay rates.
pub fn build_full_model(params: &SystemParams) -> Result<LinearModel> {
    if params.frame != Frame::Full {
        return Err(Error::invalid("frame", "build_full_model needs frame = full"));
    }
    params.validate()?;
    let mut drift = rwa_drift(params);
    // H = ω a†a  ->  dX/dt = ω Y, dY/dt = -ω X
    let rotations = [(0, params.omega_m), (2, params.delta_plus), (4, params.delta_minus)];
    for (k, w) in rotations {
        drift[(k, k + 1)] += w;
        drift[(k + 1, k)] -= w;
    }
    Ok(assemble(params, drift, Frame::Full))
}

fn rwa_drift(p: &SystemParams) -> Matrix6<f64> {
    let (gp, gm) = (p.g_plus, p.g_minus);
    let mut a = Matrix6::from_diagonal(&nalgebra::Vector6::new(
        -p.gamma_m,
        -p.gamma_m,
        -p.kappa_plus,
        -p.kappa_plus,
        -p.kappa_minus,
        -p.kappa_minus,
    ));
    a[(0, 3)] = gp;
    a[(0, 5)] = -gm;
    a[(1, 2)] = gp;
    a[(1, 4)] = gm;
    a[(2, 1)] = gp;
    a[(3, 0)] = gp;
    a[(4, 1)] = -gm;
    a[(5, 0)] = gm;
    a
}

fn assemble(p: &SystemParams, drift: Matrix6<f64>, frame: Frame) -> LinearModel {
    let rates = [p.gamma_m, p.gamma_m, p.kappa_plus, p.kappa_plus, p.kappa_minus, p.kappa_minus];
    let noise_input =
        Matrix6::from_diagonal(&nalgebra::Vector6::from_iterator(rates.iter().map(|r| (2.0 * r).sqrt())));
    let thermal = p.n_m + 0.5;
    let input_diffusion =
        Matrix6::from_diagonal(&nalgebra::Vector6::new(thermal, thermal, 0.5, 0.5, 0.5, 0.5));

    let mut output_map = SMatrix::<f64, 4, 6>::zeros();
    let mut output_input_projector = SMatrix::<f64, 4, 6>::zeros();
    for row in 0..4 {
        output_map[(row, row + 2)] = noise_input[(row + 2, row + 2)];
        output_input_projector[(row, row + 2)] = 1.0;
    }

    LinearModel {
        drift,
        noise_input,
        input_diffusion,
        output_map,
        output_input_projector,
        frame,
        params: *p,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn full(p: SystemParams) -> SystemParams {
        SystemParams { frame: Frame::Full, ..p }
    }

    #[test]
    fn uncoupled_drift_is_pure_decay() {
        let p = SystemParams { g_plus: 0.0, g_minus: 0.0, ..Default::default() };
        let m = build_rwa_model(&p).unwrap();
        let expected = Matrix6::from_diagonal(&nalgebra::Vector6::new(
            -p.gamma_m, -p.gamma_m, -0.02, -0.02, -0.02, -0.02,
        ));
        assert_eq!(m.drift, expected);
    }

    #[test]
    fn default_couplings_sit_where_printed() {
        let m = build_rwa_model(&SystemParams::default()).unwrap();
        assert_relative_eq!(m.drift[(0, 3)], 0.03, epsilon = 1e-15);
        assert_relative_eq!(m.drift[(5, 0)], 0.15, epsilon = 1e-15);
        assert_relative_eq!(m.drift[(0, 5)], -0.15, epsilon = 1e-15);
        assert_relative_eq!(m.drift[(4, 1)], -0.15, epsilon = 1e-15);
    }

    #[test]
    fn default_params_match_caption() {
        let p = SystemParams::default();
        assert_relative_eq!(p.quality_factor(), 1.5e5, max_relative = 1e-12);
        assert_relative_eq!(p.g_plus / p.g_minus, 0.2, epsilon = 1e-15);
        assert_eq!((p.delta_minus, p.delta_plus), (1.0, -1.0));
        assert!(p.cooperativity() > 1e5);
    }

    #[test]
    fn zero_temperature_mechanics_is_vacuum() {
        let p = SystemParams { n_m: 0.0, ..Default::default() };
        let m = build_rwa_model(&p).unwrap();
        assert_eq!(m.input_diffusion[(0, 0)], 0.5);
        assert_eq!(m.input_diffusion[(1, 1)], 0.5);
    }

    #[test]
    fn output_map_has_one_entry_per_row() {
        let m = build_rwa_model(&SystemParams { kappa_minus: 0.05, ..Default::default() }).unwrap();
        for row in 0..4 {
            let nonzero: alloc::vec::Vec<_> =
                (0..6).filter(|&c| m.output_map[(row, c)] != 0.0).collect();
            assert_eq!(nonzero, alloc::vec![row + 2]);
        }
        assert_relative_eq!(m.output_map[(2, 4)], 0.1f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_nonpositive_rates() {
        for p in [
            SystemParams { kappa_plus: 0.0, ..Default::default() },
            SystemParams { gamma_m: -1.0, ..Default::default() },
            SystemParams { n_m: f64::NAN, ..Default::default() },
            SystemParams { g_minus: -0.1, ..Default::default() },
        ] {
            assert!(matches!(build_rwa_model(&p), Err(Error::InvalidParameter { .. })));
        }
    }

    #[test]
    fn builders_check_frame() {
        assert!(build_rwa_model(&full(SystemParams::default())).is_err());
        assert!(build_full_model(&SystemParams::default()).is_err());
        assert_eq!(build_model(&full(SystemParams::default())).unwrap().frame, Frame::Full);
    }

    #[test]
    fn full_frame_detuning_block() {
        let m = build_full_model(&full(SystemParams::default())).unwrap();
        // Δ+ = -1
        assert_eq!(m.drift[(2, 3)], -1.0);
        assert_eq!(m.drift[(3, 2)], 1.0);
        assert_eq!(m.drift[(0, 1)], 1.0);
        assert_eq!(m.drift[(1, 0)], -1.0);
    }

    #[test]
    fn full_without_rotation_equals_rwa() {
        let p = SystemParams { delta_plus: 0.0, delta_minus: 0.0, ..Default::default() };
        let rwa = build_rwa_model(&p).unwrap();
        let mut f = build_full_model(&full(p)).unwrap();
        f.drift[(0, 1)] -= p.omega_m;
        f.drift[(1, 0)] += p.omega_m;
        assert_eq!(f.drift, rwa.drift);
        assert_eq!(f.diffusion(), rwa.diffusion());
    }

    #[test]
    fn uncoupled_full_eigenvalues() {
        let p = full(SystemParams {
            g_plus: 0.0,
            g_minus: 0.0,
            kappa_plus: 0.03,
            kappa_minus: 0.05,
            ..Default::default()
        });
        let m = build_full_model(&p).unwrap();
        let mut eig: alloc::vec::Vec<_> = m.drift.complex_eigenvalues().iter().copied().collect();
        eig.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        let expected = [(-0.05, -1.0), (-0.05, 1.0), (-0.03, -1.0), (-0.03, 1.0)];
        for (e, (re, im)) in eig.iter().zip(expected) {
            assert_relative_eq!(e.re, re, epsilon = 1e-12);
            assert_relative_eq!(e.im, im, epsilon = 1e-12);
        }
        assert_relative_eq!(eig[4].re, -p.gamma_m, epsilon = 1e-12);
        assert_relative_eq!(eig[5].im.abs(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn rotation_commutes_with_rwa_drift_at_resonance() {
        let p = SystemParams::default();
        let rwa = build_rwa_model(&p).unwrap().drift;
        let rot = build_full_model(&full(p)).unwrap().drift - rwa;
        let commutator = rot * rwa - rwa * rot;
        assert!(commutator.abs().max() < 1e-15);
    }

    #[test]
    fn bose_factor_limits() {
        // ħω/kT = ln 2  ->  n = 1
        let omega = 1.0e9;
        let t = HBAR * omega / (K_B * core::f64::consts::LN_2);
        assert_relative_eq!(n_m_from_temperature(t, omega).unwrap(), 1.0, max_relative = 1e-12);
        assert!(n_m_from_temperature(1e-6, omega).unwrap() < 1e-100);
        assert!(n_m_from_temperature(0.0, omega).is_err());
        assert!(n_m_from_temperature(-1.0, omega).is_err());
    }

    #[test]
    fn bose_factor_at_quoted_temperature() {
        // 2π × 10 MHz at 25 mK
        let n = n_m_from_temperature(0.025, 2.0 * core::f64::consts::PI * 10e6).unwrap();
        assert!((n - 51.6).abs() < 0.5, "n = {n}");
    }

    proptest! {
        #[test]
        fn rwa_drift_reproduces_layout(
            kp in 1e-4f64..1.0, km in 1e-4f64..1.0, g in 1e-7f64..1e-2,
            gp in 0.0f64..1.0, gm in 0.0f64..1.0, n in 0.0f64..1e4,
        ) {
            let p = SystemParams { kappa_plus: kp, kappa_minus: km, gamma_m: g, g_plus: gp, g_minus: gm, n_m: n, ..Default::default() };
            let m = build_rwa_model(&p).unwrap();
            #[rustfmt::skip]
            let printed = Matrix6::from_row_slice(&[
                -g, 0.0, 0.0, gp, 0.0, -gm,
                0.0, -g, gp, 0.0, gm, 0.0,
                0.0, gp, -kp, 0.0, 0.0, 0.0,
                gp, 0.0, 0.0, -kp, 0.0, 0.0,
                0.0, -gm, 0.0, 0.0, -km, 0.0,
                gm, 0.0, 0.0, 0.0, 0.0, -km,
            ]);
            prop_assert_eq!(m.drift, printed);

            let d = m.diffusion();
            for i in 0..6 {
                for j in 0..6 {
                    if i != j { prop_assert_eq!(d[(i, j)], 0.0); }
                }
            }
            prop_assert!((d[(0, 0)] - 2.0 * g * (n + 0.5)).abs() <= 1e-12 * d[(0, 0)]);
            prop_assert!((d[(2, 2)] - kp).abs() <= 1e-15);
            prop_assert!((d[(5, 5)] - km).abs() <= 1e-15);
        }
    }
}
