//! Output spectra and the steady-state covariance of filtered output quadratures.
//!
//! Fourier convention `f̂(ω) = ∫ f(t) e^{iωt} dt`, so the resolvent is
//! `χ(ω) = (−iω − A)⁻¹`. The outputs are `y = B u − Π ξ`, hence
//! `ŷ = M ξ̂` with `M(ω) = B χ(ω) L − Π`, and the symmetrized output spectrum
//! is `S(ω) = M N M† / 2π`. A filter `f_k = h_k ∗ a_k^out` with
//! `h_k(t) = √(2/τ) Θ(t) e^{−(1/τ + iΩ_k) t}` acts on the quadrature pair of
//! port `k` through the real 2×2 kernel `[[Re h, −Im h], [Im h, Re h]]`, and the
//! filtered covariance is `V = Re ∫ T̂(ω) S(ω) T̂(ω)† dω`.
//!
//! The same covariance follows without any integral by appending the filters
//! to the Langevin state (`d f = Φ f dt + √(2/τ) y dt`) and solving the
//! Lyapunov equation of the enlarged system.

use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{DMatrix, Matrix2, Matrix4, Matrix6, SMatrix};
use serde::{Deserialize, Serialize};

use crate::linalg::{asymmetry, solve_lyapunov, uncertainty_min_eigenvalue};
use crate::model::{Frame, LinearModel, SystemParams};
use crate::quadrature::{integrate_real_line, QuadratureOptions};
use crate::stability::{assess_stability, drift_eigenvalues};
use crate::{Error, Result, C64};

/// Symmetry tolerance of a [`FilteredCovariance`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Tolerance on the smallest eigenvalue of `V + (i/2) Ω`.
pub const UNCERTAINTY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Port {
    Plus,
    Minus,
}

impl Port {
    /// Row of the port's X quadrature in the output ordering.
    pub fn offset(self) -> usize {
        match self {
            Port::Plus => 0,
            Port::Minus => 2,
        }
    }
}

/// Causal exponential filter pair. Centres are in the frame of the model the
/// filter is applied to; see [`FilterSpec::from_lab`] for the lab convention.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    pub tau: f64,
    pub epsilon: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
}

impl FilterSpec {
    pub fn new(epsilon: f64, omega_plus: f64, omega_minus: f64, omega_m: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::invalid("epsilon", "must be finite and > 0"));
        }
        if !(omega_m.is_finite() && omega_m > 0.0) {
            return Err(Error::invalid("omega_m", "must be finite and > 0"));
        }
        if !(omega_plus.is_finite() && omega_minus.is_finite()) {
            return Err(Error::invalid("omega_plus/omega_minus", "must be finite"));
        }
        Ok(Self {
            tau: epsilon / omega_m,
            epsilon,
            omega_plus,
            omega_minus,
        })
    }

    /// Builds the filter from lab-convention centres (the `+` cavity output
    /// sits near −ω_m, the `-` output near +ω_m). In the rwa frame the centres
    /// are demodulated to `Ω+ + ω_m` and `Ω- − ω_m`.
    pub fn from_lab(epsilon: f64, lab_plus: f64, lab_minus: f64, params: &SystemParams) -> Result<Self> {
        let (p, m) = match params.frame {
            Frame::Rwa => (lab_plus + params.omega_m, lab_minus - params.omega_m),
            Frame::Full => (lab_plus, lab_minus),
        };
        Self::new(epsilon, p, m, params.omega_m)
    }

    /// Filters centred on both sidebands, `Ω- = −Ω+ = ω_m`.
    pub fn symmetric(epsilon: f64, params: &SystemParams) -> Result<Self> {
        Self::from_lab(epsilon, -params.omega_m, params.omega_m, params)
    }

    pub fn lab_centers(&self, params: &SystemParams) -> (f64, f64) {
        match params.frame {
            Frame::Rwa => (self.omega_plus - params.omega_m, self.omega_minus + params.omega_m),
            Frame::Full => (self.omega_plus, self.omega_minus),
        }
    }

    pub fn center(&self, port: Port) -> f64 {
        match port {
            Port::Plus => self.omega_plus,
            Port::Minus => self.omega_minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceMethod {
    /// Frequency integral of the filtered output spectrum.
    Quadrature,
    /// Lyapunov equation of the Langevin system with the filters appended.
    Augmented,
    /// Time-domain Monte-Carlo estimate.
    MonteCarlo,
    /// Closed-form high-cooperativity prediction.
    Oracle,
    /// Supplied directly.
    External,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub params: SystemParams,
    pub filter: Option<FilterSpec>,
    pub method: CovarianceMethod,
    /// Achieved absolute error estimate, when the method has one.
    pub error_estimate: Option<f64>,
}

/// Symmetric 4×4 covariance of `[X+, Y+, X-, Y-]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilteredCovariance {
    pub matrix: Matrix4<f64>,
    pub provenance: Option<Provenance>,
}

impl FilteredCovariance {
    /// Wraps a matrix, rejecting asymmetry above [`SYMMETRY_TOLERANCE`].
    /// The matrix is symmetrized exactly.
    pub fn new(matrix: Matrix4<f64>) -> Result<Self> {
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::Unphysical("non-finite entry".into()));
        }
        let asym = asymmetry(&matrix);
        if asym > SYMMETRY_TOLERANCE {
            return Err(Error::Unphysical(alloc::format!("asymmetry {asym:.3e}")));
        }
        Ok(Self {
            matrix: (matrix + matrix.transpose()) * 0.5,
            provenance: None,
        })
    }

    pub fn from_rows(rows: [[f64; 4]; 4]) -> Result<Self> {
        Self::new(Matrix4::from_fn(|i, j| rows[i][j]))
    }

    pub fn rows(&self) -> [[f64; 4]; 4] {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.matrix[(i, j)];
            }
        }
        out
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    /// Smallest eigenvalue of `V + (i/2) Ω`.
    pub fn uncertainty_margin(&self) -> f64 {
        uncertainty_min_eigenvalue(&self.matrix)
    }

    pub fn is_physical(&self) -> bool {
        self.uncertainty_margin() >= -UNCERTAINTY_TOLERANCE
    }

    pub fn check_physical(&self) -> Result<()> {
        let margin = self.uncertainty_margin();
        if margin < -UNCERTAINTY_TOLERANCE {
            return Err(Error::Unphysical(alloc::format!(
                "V + iΩ/2 has eigenvalue {margin:.3e}"
            )));
        }
        Ok(())
    }

    /// Relabels the two modes (`+` ↔ `-`).
    pub fn swap_modes(&self) -> Self {
        let p = [2, 3, 0, 1];
        Self {
            matrix: Matrix4::from_fn(|i, j| self.matrix[(p[i], p[j])]),
            provenance: self.provenance,
        }
    }

    /// Applies independent phase-space rotations by `theta_plus`, `theta_minus`.
    pub fn rotated(&self, theta_plus: f64, theta_minus: f64) -> Self {
        let mut r = Matrix4::zeros();
        for (k, th) in [(0, theta_plus), (2, theta_minus)] {
            let (s, c) = th.sin_cos();
            r[(k, k)] = c;
            r[(k, k + 1)] = -s;
            r[(k + 1, k)] = s;
            r[(k + 1, k + 1)] = c;
        }
        let m = r * self.matrix * r.transpose();
        Self {
            matrix: (m + m.transpose()) * 0.5,
            provenance: self.provenance,
        }
    }
}

/// Resolvent `χ(ω) = (−iω I − A)⁻¹`.
pub fn transfer(model: &LinearModel, omega: f64) -> Result<Matrix6<C64>> {
    let a: Matrix6<C64> = model.drift.map(|x| C64::new(-x, 0.0)) + Matrix6::from_diagonal_element(C64::new(0.0, -omega));
    a.try_inverse().ok_or(Error::Singular("resolvent"))
}

/// `M(ω) = B χ(ω) L − Π`, mapping input noises to output quadratures.
fn noise_to_output(model: &LinearModel, omega: f64) -> Result<SMatrix<C64, 4, 6>> {
    let chi = transfer(model, omega)?;
    let b = model.output_map.map(|x| C64::new(x, 0.0));
    let l = model.noise_input.map(|x| C64::new(x, 0.0));
    let pi = model.output_input_projector.map(|x| C64::new(x, 0.0));
    Ok(b * chi * l - pi)
}

/// Symmetrized output spectral density `S(ω) = M N M† / 2π`, normalized so
/// that `∫ S dω` is the covariance of unit-bandwidth-normalized output modes.
pub fn output_spectral_matrix(model: &LinearModel, omega: f64) -> Result<Matrix4<C64>> {
    let m = noise_to_output(model, omega)?;
    let n = model.input_diffusion.map(|x| C64::new(x, 0.0));
    Ok(m * n * m.adjoint() / C64::new(2.0 * PI, 0.0))
}

/// `h̃_k(ω) = √(τ/π) / (1 − iτ(ω − Ω_k))`, normalized to `∫ |h̃|² dω = 1`.
pub fn filter_fourier(filter: &FilterSpec, port: Port, omega: f64) -> C64 {
    let tau = filter.tau;
    C64::new((tau / PI).sqrt(), 0.0) / C64::new(1.0, -tau * (omega - filter.center(port)))
}

/// Fourier transform of the real 2×2 kernel of one port.
fn filter_kernel(filter: &FilterSpec, port: Port, omega: f64) -> Matrix2<C64> {
    let scale = C64::new((2.0 * PI).sqrt(), 0.0);
    let h_pos = filter_fourier(filter, port, omega) * scale;
    let h_neg = filter_fourier(filter, port, -omega).conj() * scale;
    let h_re = (h_pos + h_neg) * 0.5;
    let h_im = (h_pos - h_neg) / C64::new(0.0, 2.0);
    Matrix2::new(h_re, -h_im, h_im, h_re)
}

fn block_kernel(filter: &FilterSpec, omega: f64) -> Matrix4<C64> {
    let mut t = Matrix4::zeros();
    t.fixed_view_mut::<2, 2>(0, 0).copy_from(&filter_kernel(filter, Port::Plus, omega));
    t.fixed_view_mut::<2, 2>(2, 2).copy_from(&filter_kernel(filter, Port::Minus, omega));
    t
}

const UPPER4: [(usize, usize); 10] = [
    (0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3),
];

/// Filtered-output covariance by adaptive quadrature with default tolerances.
pub fn filtered_covariance(model: &LinearModel, filter: &FilterSpec) -> Result<FilteredCovariance> {
    filtered_covariance_with(model, filter, &QuadratureOptions::default())
}

pub fn filtered_covariance_with(
    model: &LinearModel,
    filter: &FilterSpec,
    opts: &QuadratureOptions,
) -> Result<FilteredCovariance> {
    assess_stability(model)?.require()?;
    let eig = drift_eigenvalues(&model.drift)?;
    let tau = filter.tau;

    let mut breaks = Vec::new();
    for c in [filter.omega_plus, filter.omega_minus] {
        for s in [-1.0, 1.0] {
            for d in [0.0, -1.0, 1.0, -5.0, 5.0] {
                breaks.push(s * c + d / tau);
            }
        }
    }
    push_eigen_breaks(&mut breaks, &eig);

    let p = &model.params;
    let mut window = (10.0 / tau)
        .max(10.0 * (p.kappa_plus + p.kappa_minus + p.gamma_m) + filter.omega_plus.abs() + filter.omega_minus.abs());
    for z in &eig {
        window = window.max(z.im.abs() + 10.0 * z.re.abs());
    }

    let n = model.input_diffusion.map(|x| C64::new(x, 0.0));
    let res = integrate_real_line(
        |omega| {
            let w = block_kernel(filter, omega) * noise_to_output(model, omega)?;
            let v = w * n * w.adjoint();
            let mut out = [0.0; 10];
            for (k, &(i, j)) in UPPER4.iter().enumerate() {
                out[k] = v[(i, j)].re / (2.0 * PI);
            }
            Ok(out)
        },
        window,
        &breaks,
        opts,
    )?;

    let mut matrix = Matrix4::zeros();
    for (k, &(i, j)) in UPPER4.iter().enumerate() {
        matrix[(i, j)] = res.value[k];
        matrix[(j, i)] = res.value[k];
    }
    let cov = FilteredCovariance::new(matrix)?.with_provenance(Provenance {
        params: *p,
        filter: Some(*filter),
        method: CovarianceMethod::Quadrature,
        error_estimate: Some(res.max_error()),
    });
    cov.check_physical()?;
    Ok(cov)
}

fn push_eigen_breaks(breaks: &mut Vec<f64>, eig: &[C64]) {
    for z in eig {
        let width = z.re.abs();
        for s in [-1.0, 1.0] {
            for d in [0.0, -1.0, 1.0, -5.0, 5.0] {
                breaks.push(s * z.im + d * width);
            }
        }
    }
}

/// Drift and noise-input matrices of the Langevin state with the two filters
/// appended: `[u; X+f, Y+f, X-f, Y-f]`, 10-dimensional.
pub(crate) fn augmented_system(model: &LinearModel, filter: &FilterSpec) -> (DMatrix<f64>, DMatrix<f64>) {
    let c = (2.0 / filter.tau).sqrt();
    let mut a = DMatrix::<f64>::zeros(10, 10);
    let mut l = DMatrix::<f64>::zeros(10, 6);
    a.view_mut((0, 0), (6, 6)).copy_from(&model.drift);
    a.view_mut((6, 0), (4, 6)).copy_from(&(model.output_map * c));
    for (k, omega) in [(6, filter.omega_plus), (8, filter.omega_minus)] {
        a[(k, k)] = -1.0 / filter.tau;
        a[(k + 1, k + 1)] = -1.0 / filter.tau;
        a[(k, k + 1)] = omega;
        a[(k + 1, k)] = -omega;
    }
    l.view_mut((0, 0), (6, 6)).copy_from(&model.noise_input);
    l.view_mut((6, 0), (4, 6)).copy_from(&(model.output_input_projector * -c));
    (a, l)
}

/// Filtered-output covariance from the Lyapunov equation of the filter-augmented system.
pub fn filtered_covariance_augmented(model: &LinearModel, filter: &FilterSpec) -> Result<FilteredCovariance> {
    assess_stability(model)?.require()?;
    let (a, l) = augmented_system(model, filter);
    let n = DMatrix::from_fn(6, 6, |i, j| model.input_diffusion[(i, j)]);
    let d = &l * n * l.transpose();
    let v = solve_lyapunov(&a, &d)?;
    let matrix = Matrix4::from_fn(|i, j| v[(i + 6, j + 6)]);
    let cov = FilteredCovariance::new(matrix)?.with_provenance(Provenance {
        params: model.params,
        filter: Some(*filter),
        method: CovarianceMethod::Augmented,
        error_estimate: None,
    });
    cov.check_physical()?;
    Ok(cov)
}

/// Steady-state intracavity covariance from `A V + V Aᵀ + D = 0`.
pub fn intracavity_covariance_lyapunov(model: &LinearModel) -> Result<Matrix6<f64>> {
    assess_stability(model)?.require()?;
    let a = DMatrix::from_fn(6, 6, |i, j| model.drift[(i, j)]);
    let dm = model.diffusion();
    let d = DMatrix::from_fn(6, 6, |i, j| dm[(i, j)]);
    let v = solve_lyapunov(&a, &d)?;
    let v = Matrix6::from_fn(|i, j| v[(i, j)]);
    if v.cholesky().is_none() {
        return Err(Error::Unphysical("intracavity covariance not positive definite".into()));
    }
    Ok(v)
}

/// The same covariance as `(1/2π) ∫ χ(ω) D χ(ω)† dω`.
pub fn intracavity_covariance_spectral(model: &LinearModel, opts: &QuadratureOptions) -> Result<Matrix6<f64>> {
    assess_stability(model)?.require()?;
    let eig = drift_eigenvalues(&model.drift)?;
    let mut breaks = Vec::new();
    push_eigen_breaks(&mut breaks, &eig);
    let window = eig
        .iter()
        .map(|z| z.im.abs() + 20.0 * z.re.abs())
        .fold(0.0, f64::max);
    let d = model.diffusion().map(|x| C64::new(x, 0.0));
    let mut upper = [(0usize, 0usize); 21];
    let mut k = 0;
    for i in 0..6 {
        for j in i..6 {
            upper[k] = (i, j);
            k += 1;
        }
    }
    let res = integrate_real_line(
        |omega| {
            let chi = transfer(model, omega)?;
            let v = chi * d * chi.adjoint();
            let mut out = [0.0; 21];
            for (k, &(i, j)) in upper.iter().enumerate() {
                out[k] = v[(i, j)].re / (2.0 * PI);
            }
            Ok(out)
        },
        window,
        &breaks,
        opts,
    )?;
    let mut v = Matrix6::zeros();
    for (k, &(i, j)) in upper.iter().enumerate() {
        v[(i, j)] = res.value[k];
        v[(j, i)] = res.value[k];
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::build_model;
    use approx::assert_relative_eq;
    use nalgebra::ComplexField;
    use proptest::prelude::*;

    fn vacuum_params() -> SystemParams {
        SystemParams { g_plus: 0.0, g_minus: 0.0, ..Default::default() }
    }

    fn cmax(m: &Matrix4<C64>) -> f64 {
        m.iter().map(|z| z.norm_sqr().sqrt()).fold(0.0, f64::max)
    }

    fn max_dev(a: &Matrix4<f64>, b: &Matrix4<f64>) -> f64 {
        (a - b).abs().max()
    }

    #[test]
    fn scalar_resolvent() {
        let mut m = build_model(&vacuum_params()).unwrap();
        m.drift = Matrix6::identity() * -0.3;
        let chi = transfer(&m, 0.0).unwrap();
        for i in 0..6 {
            assert_relative_eq!(chi[(i, i)].re, 1.0 / 0.3, epsilon = 1e-12);
        }
        let far = transfer(&m, 1e6).unwrap();
        assert!(far.iter().all(|z| z.modulus() < 1.1e-6));
    }

    #[test]
    fn resolvent_largest_in_coupled_rows() {
        let m = build_model(&SystemParams::default()).unwrap();
        let chi = transfer(&m, 1.0).unwrap();
        assert!(chi.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        let (mut best, mut row) = (0.0, 0);
        for i in 0..6 {
            let s: f64 = (0..6).map(|j| chi[(i, j)].modulus()).sum();
            if s > best {
                best = s;
                row = i;
            }
        }
        assert!(row < 2, "largest response in row {row}");
    }

    #[test]
    fn vacuum_spectrum_is_flat() {
        let m = build_model(&vacuum_params()).unwrap();
        for omega in [-3.0, -0.1, 0.0, 0.02, 7.0] {
            let s = output_spectral_matrix(&m, omega).unwrap();
            let expected = Matrix4::<C64>::identity() * C64::new(0.5 / (2.0 * PI), 0.0);
            assert!(cmax(&(s - expected)) < 1e-14);
        }
    }

    #[test]
    fn spectrum_is_hermitian() {
        let m = build_model(&SystemParams::default()).unwrap();
        for omega in [-0.5, -0.146, 0.0, 0.01, 0.3] {
            let s = output_spectral_matrix(&m, omega).unwrap();
            assert!(cmax(&(s - s.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn spectrum_trace_peaks_at_normal_mode() {
        let m = build_model(&SystemParams::default()).unwrap();
        let (mut best, mut at) = (0.0, 0.0);
        for i in 0..=4000 {
            let omega = -0.4 + 0.8 * i as f64 / 4000.0;
            let tr = output_spectral_matrix(&m, omega).unwrap().trace().re;
            if tr > best {
                best = tr;
                at = omega;
            }
        }
        let eig = drift_eigenvalues(&m.drift).unwrap();
        let nearest = eig.iter().map(|z| (z.im.abs() - at.abs()).abs()).fold(f64::INFINITY, f64::min);
        assert!(nearest < 5e-3, "peak at {at}");
    }

    #[test]
    fn filter_peak_and_half_power() {
        let f = FilterSpec::new(10.0, 0.3, -0.2, 1.0).unwrap();
        assert_relative_eq!(filter_fourier(&f, Port::Plus, 0.3).re, (10.0 / PI).sqrt(), epsilon = 1e-14);
        let half = filter_fourier(&f, Port::Minus, -0.2 + 0.1);
        assert_relative_eq!(half.modulus(), (10.0 / PI).sqrt() / 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn filter_is_normalized() {
        let f = FilterSpec::new(37.0, 0.4, 0.0, 1.0).unwrap();
        let res = integrate_real_line(
            |w| Ok([filter_fourier(&f, Port::Plus, w).norm_sqr()]),
            10.0 / f.tau,
            &[0.4],
            &QuadratureOptions::default(),
        )
        .unwrap();
        assert!((res.value[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn vacuum_filtered_covariance_is_half_identity() {
        let p = vacuum_params();
        let m = build_model(&p).unwrap();
        for eps in [1.0, 10.0, 100.0] {
            for (a, b) in [(-1.0, 1.0), (-1.3, 0.7)] {
                let f = FilterSpec::from_lab(eps, a, b, &p).unwrap();
                let v = filtered_covariance(&m, &f).unwrap();
                assert!(max_dev(&v.matrix, &(Matrix4::identity() * 0.5)) < 1e-6, "eps {eps}");
            }
        }
    }

    #[test]
    fn routes_agree_at_default_point() {
        let p = SystemParams::default();
        let m = build_model(&p).unwrap();
        for eps in [1.0, 10.0, 100.0] {
            let f = FilterSpec::symmetric(eps, &p).unwrap();
            let q = filtered_covariance(&m, &f).unwrap();
            let a = filtered_covariance_augmented(&m, &f).unwrap();
            assert!(max_dev(&q.matrix, &a.matrix) < 1e-6, "eps {eps}: {}", max_dev(&q.matrix, &a.matrix));
        }
    }

    #[test]
    fn default_point_squeezed_below_sql() {
        let p = SystemParams::default();
        let m = build_model(&p).unwrap();
        let v = filtered_covariance(&m, &FilterSpec::symmetric(10.0, &p).unwrap()).unwrap();
        let lmin = v.matrix.symmetric_eigen().eigenvalues.min();
        assert!(2.0 * lmin < 1.0, "2 lambda_min = {}", 2.0 * lmin);
    }

    #[test]
    fn correlations_degrade_with_small_mismatch() {
        let p = SystemParams::default();
        let m = build_model(&p).unwrap();
        let mut last = f64::INFINITY;
        for i in 0..=5 {
            let d = 0.02 * i as f64;
            let f = FilterSpec::from_lab(100.0, -1.0 - d, 1.0, &p).unwrap();
            let c = filtered_covariance_augmented(&m, &f).unwrap().matrix[(0, 2)].abs();
            assert!(c < last, "mismatch {d}");
            last = c;
        }
    }

    #[test]
    fn full_frame_matches_rwa() {
        let p = SystemParams { kappa_plus: 0.03, g_minus: 0.05, g_plus: 0.02, ..Default::default() };
        let full = SystemParams { frame: Frame::Full, ..p };
        let f_rwa = FilterSpec::symmetric(10.0, &p).unwrap();
        let f_full = FilterSpec::symmetric(10.0, &full).unwrap();
        let a = filtered_covariance_augmented(&build_model(&p).unwrap(), &f_rwa).unwrap();
        let b = filtered_covariance_augmented(&build_model(&full).unwrap(), &f_full).unwrap();
        // Equal up to local phase rotations, so compare invariants.
        assert_relative_eq!(a.matrix.determinant(), b.matrix.determinant(), max_relative = 1e-6);
        let eig = |v: &Matrix4<f64>| {
            let mut e: Vec<f64> = v.symmetric_eigen().eigenvalues.iter().copied().collect();
            e.sort_by(f64::total_cmp);
            e
        };
        for (x, y) in eig(&a.matrix).iter().zip(eig(&b.matrix)) {
            assert_relative_eq!(*x, y, max_relative = 1e-5);
        }
    }

    #[test]
    fn rejects_unstable_model() {
        let p = SystemParams { g_plus: 0.3, ..Default::default() };
        let m = build_model(&p).unwrap();
        let f = FilterSpec::symmetric(10.0, &p).unwrap();
        assert!(matches!(filtered_covariance(&m, &f), Err(Error::Unstable { .. })));
        assert!(matches!(filtered_covariance_augmented(&m, &f), Err(Error::Unstable { .. })));
    }

    #[test]
    fn intracavity_detailed_balance_and_thermal_mechanics() {
        let p = vacuum_params();
        let v = intracavity_covariance_lyapunov(&build_model(&p).unwrap()).unwrap();
        assert_relative_eq!(v[(0, 0)], 500.5, max_relative = 1e-10);
        assert_relative_eq!(v[(3, 3)], 0.5, max_relative = 1e-10);
        assert!(v.iter().enumerate().all(|(k, x)| k % 7 == 0 || x.abs() < 1e-10));
    }

    #[test]
    fn sideband_cooling_of_mechanics() {
        let p = SystemParams::default();
        let v = intracavity_covariance_lyapunov(&build_model(&p).unwrap()).unwrap();
        assert!(v[(0, 0)] < p.n_m + 0.5);
    }

    #[test]
    fn intracavity_routes_agree() {
        let m = build_model(&SystemParams::default()).unwrap();
        let a = intracavity_covariance_lyapunov(&m).unwrap();
        let b = intracavity_covariance_spectral(&m, &QuadratureOptions { abs_tol: 1e-9, max_intervals: 20_000 }).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let scale = a[(i, i)].max(a[(j, j)]);
                assert!((a[(i, j)] - b[(i, j)]).abs() <= 1e-4 * scale, "({i},{j}) {} vs {}", a[(i, j)], b[(i, j)]);
            }
        }
    }

    #[test]
    fn covariance_wrapper_checks() {
        let mut m = Matrix4::identity() * 0.5;
        m[(0, 1)] = 1e-6;
        assert!(FilteredCovariance::new(m).is_err());
        let v = FilteredCovariance::new(Matrix4::identity() * 0.4).unwrap();
        assert!(!v.is_physical());
        let rows = FilteredCovariance::new(Matrix4::identity() * 0.5).unwrap().rows();
        assert_eq!(FilteredCovariance::from_rows(rows).unwrap().matrix, Matrix4::identity() * 0.5);
    }

    #[test]
    fn lab_centres_round_trip() {
        let p = SystemParams::default();
        let f = FilterSpec::from_lab(10.0, -1.25, 0.9, &p).unwrap();
        let (a, b) = f.lab_centers(&p);
        assert_relative_eq!(a, -1.25, epsilon = 1e-15);
        assert_relative_eq!(b, 0.9, epsilon = 1e-15);
        assert_eq!(FilterSpec::symmetric(10.0, &p).unwrap().omega_plus, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn vacuum_normalization_any_filter(eps in 0.5f64..200.0, op in -2.0f64..0.0, om in 0.0f64..2.0) {
            let p = vacuum_params();
            let f = FilterSpec::from_lab(eps, op, om, &p).unwrap();
            let v = filtered_covariance(&build_model(&p).unwrap(), &f).unwrap();
            prop_assert!(max_dev(&v.matrix, &(Matrix4::identity() * 0.5)) < 1e-6);
        }

        #[test]
        fn computed_covariances_are_physical(
            gm in 0.01f64..0.3, ratio in 0.0f64..0.95, kp in 0.01f64..0.05, eps in 1.0f64..300.0, op in -1.5f64..-0.5,
        ) {
            let p = SystemParams { g_minus: gm, g_plus: ratio * gm, kappa_plus: kp, ..Default::default() };
            let m = build_model(&p).unwrap();
            prop_assume!(assess_stability(&m).unwrap().stable);
            let f = FilterSpec::from_lab(eps, op, 1.0, &p).unwrap();
            let v = filtered_covariance_augmented(&m, &f).unwrap();
            prop_assert!(v.is_physical());
        }
    }
}
