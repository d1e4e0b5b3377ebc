//! Two-mode Gaussian figures of merit from a 4×4 covariance matrix.

use core::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::linalg::block_det;
use crate::spectrum::{CovarianceMethod, FilteredCovariance, Provenance};
use crate::{Error, Result};

/// Clamp window for standard-form quantities that should be non-negative.
pub const DEGENERACY_TOLERANCE: f64 = 1e-10;

/// Weights and phases of the hybrid quadrature
/// `μ+ (cos φ+ X+ + sin φ+ Y+) + μ- (cos φ- X- + sin φ- Y-)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureWeights {
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
}

impl QuadratureWeights {
    pub fn new(mu_plus: f64, mu_minus: f64, phi_plus: f64, phi_minus: f64) -> Result<Self> {
        let w = Self { mu_plus, mu_minus, phi_plus, phi_minus };
        if !(mu_plus >= 0.0 && mu_minus >= 0.0) || !(phi_plus.is_finite() && phi_minus.is_finite()) {
            return Err(Error::invalid("weights", "need mu >= 0 and finite phases"));
        }
        if !(mu_plus * mu_plus + mu_minus * mu_minus > 0.0) {
            return Err(Error::invalid("weights", "mu_plus and mu_minus both vanish"));
        }
        Ok(w)
    }

    /// Reads weights off a real 4-vector `(μ+ cos φ+, μ+ sin φ+, μ- cos φ-, μ- sin φ-)`.
    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self {
            mu_plus: v[0].hypot(v[1]),
            mu_minus: v[2].hypot(v[3]),
            phi_plus: v[1].atan2(v[0]),
            phi_minus: v[3].atan2(v[2]),
        }
    }

    pub fn to_vector(&self) -> Vector4<f64> {
        let (sp, cp) = self.phi_plus.sin_cos();
        let (sm, cm) = self.phi_minus.sin_cos();
        Vector4::new(self.mu_plus * cp, self.mu_plus * sp, self.mu_minus * cm, self.mu_minus * sm)
    }
}

/// Local symplectic invariants of the standard form
/// `[[n, 0, c1, 0], [0, n, 0, c2], [c1, 0, m, 0], [0, c2, 0, m]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardFormInvariants {
    pub n: f64,
    pub m: f64,
    pub c1: f64,
    pub c2: f64,
    pub c_tilde: f64,
    /// Set when a slightly negative quantity was clamped to zero.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMetrics {
    pub s_q_min: f64,
    pub optimal_weights: QuadratureWeights,
    pub purity: f64,
    pub invariants: StandardFormInvariants,
    pub b_max: f64,
    pub entangled_by_sql: bool,
    pub simon_separable: bool,
    /// Smallest symplectic eigenvalue of the partial transpose.
    pub pt_symplectic_min: f64,
}

impl GaussianMetrics {
    pub fn evaluate(v: &FilteredCovariance) -> Result<Self> {
        v.check_physical()?;
        let (s_q_min, optimal_weights) = s_q_min(v);
        let purity = purity(v)?;
        let invariants = standard_invariants(v)?;
        let b_max = b_max_from(purity, &invariants);
        let pt_symplectic_min = pt_min_symplectic_eigenvalue(v);
        Ok(Self {
            s_q_min,
            optimal_weights,
            purity,
            invariants,
            b_max,
            entangled_by_sql: s_q_min < 1.0,
            simon_separable: pt_symplectic_min >= 0.5,
            pt_symplectic_min,
        })
    }
}

/// Hybrid-quadrature variance, written term by term.
pub fn s_q(v: &FilteredCovariance, w: &QuadratureWeights) -> f64 {
    let m = &v.matrix;
    let (mp, mm) = (w.mu_plus, w.mu_minus);
    let (sp, cp) = w.phi_plus.sin_cos();
    let (sm, cm) = w.phi_minus.sin_cos();
    let v11 = m[(0, 0)];
    let v22 = m[(1, 1)];
    let v12 = m[(0, 1)];
    let v33 = m[(2, 2)];
    let v44 = m[(3, 3)];
    let v34 = m[(2, 3)];
    let v31 = m[(2, 0)];
    let v24 = m[(1, 3)];
    let v41 = m[(3, 0)];
    let v23 = m[(1, 2)];
    let bracket = mp * mp * (cp * cp * v11 + sp * sp * v22 + (2.0 * w.phi_plus).sin() * v12)
        + mm * mm * (cm * cm * v33 + sm * sm * v44 + (2.0 * w.phi_minus).sin() * v34)
        + 2.0 * mp * mm * cp * cm * v31
        + 2.0 * mp * mm * sp * sm * v24
        + 2.0 * mp * mm * cp * sm * v41
        + 2.0 * mp * mm * sp * cm * v23;
    2.0 / (mp * mp + mm * mm) * bracket
}

/// Minimum of [`s_q`] over all weights: `2 λ_min(V)`, with the weights read off
/// the corresponding eigenvector.
pub fn s_q_min(v: &FilteredCovariance) -> (f64, QuadratureWeights) {
    let eig = v.matrix.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let vec: Vector4<f64> = eig.eigenvectors.column(k).into_owned();
    (2.0 * eig.eigenvalues[k], QuadratureWeights::from_vector(&vec))
}

/// Minimizes [`s_q`] directly over `(μ+, μ-, φ+, φ-)` with multi-start
/// Nelder–Mead, without using the eigen-decomposition.
pub fn s_q_min_direct(v: &FilteredCovariance) -> (f64, QuadratureWeights) {
    let f = |x: &[f64; 3]| {
        let w = QuadratureWeights {
            mu_plus: x[0].cos(),
            mu_minus: x[0].sin(),
            phi_plus: x[1],
            phi_minus: x[2],
        };
        s_q(v, &w)
    };
    let mut best = ([0.0; 3], f64::INFINITY);
    for i in 0..3 {
        for j in 0..4 {
            for k in 0..4 {
                let start = [
                    (i as f64 + 0.5) * FRAC_PI_2 / 3.0,
                    j as f64 * PI / 4.0,
                    k as f64 * PI / 4.0,
                ];
                let (x, fx) = nelder_mead(&f, start, 0.4);
                if fx < best.1 {
                    best = (x, fx);
                }
            }
        }
    }
    let (x, _) = nelder_mead(&f, best.0, 0.05);
    let (x, fx) = nelder_mead(&f, x, 1e-3);
    let (mut mp, mut mm) = (x[0].cos(), x[0].sin());
    let (mut pp, mut pm) = (x[1], x[2]);
    if mp < 0.0 {
        mp = -mp;
        pp += PI;
    }
    if mm < 0.0 {
        mm = -mm;
        pm += PI;
    }
    let wrap = |a: f64| a - 2.0 * PI * ((a + PI) / (2.0 * PI)).floor();
    (
        fx,
        QuadratureWeights {
            mu_plus: mp,
            mu_minus: mm,
            phi_plus: wrap(pp),
            phi_minus: wrap(pm),
        },
    )
}

fn nelder_mead<F: Fn(&[f64; 3]) -> f64>(f: &F, start: [f64; 3], step: f64) -> ([f64; 3], f64) {
    let mut simplex = [start; 4];
    for (i, p) in simplex.iter_mut().skip(1).enumerate() {
        p[i] += step;
    }
    let mut values = simplex.map(|p| f(&p));
    for _ in 0..2000 {
        let mut order = [0usize, 1, 2, 3];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        if values[3] - values[0] <= 1e-15 * (1.0 + values[0].abs()) {
            let size = (1..4)
                .map(|i| (0..3).map(|d| (simplex[i][d] - simplex[0][d]).abs()).fold(0.0, f64::max))
                .fold(0.0, f64::max);
            if size < 1e-9 {
                break;
            }
        }
        let mut centroid = [0.0; 3];
        for p in &simplex[..3] {
            for d in 0..3 {
                centroid[d] += p[d] / 3.0;
            }
        }
        let along = |t: f64| {
            let mut q = [0.0; 3];
            for d in 0..3 {
                q[d] = centroid[d] + t * (simplex[3][d] - centroid[d]);
            }
            q
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[3] = expanded;
                values[3] = fe;
            } else {
                simplex[3] = reflected;
                values[3] = fr;
            }
        } else if fr < values[2] {
            simplex[3] = reflected;
            values[3] = fr;
        } else {
            let contracted = if fr < values[3] { along(-0.5) } else { along(0.5) };
            let fc = f(&contracted);
            if fc < values[3].min(fr) {
                simplex[3] = contracted;
                values[3] = fc;
            } else {
                for i in 1..4 {
                    for d in 0..3 {
                        simplex[i][d] = simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]);
                    }
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }
    let k = (0..4).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap_or(0);
    (simplex[k], values[k])
}

/// Purity `1 / (4 √det V)`.
pub fn purity(v: &FilteredCovariance) -> Result<f64> {
    let det = v.matrix.determinant();
    if !(det > 0.0) {
        return Err(Error::Unphysical(alloc::format!("det V = {det:.3e} <= 0")));
    }
    Ok(1.0 / (4.0 * det.sqrt()))
}

/// Solves `n² = det V+`, `m² = det V-`, `c1 c2 = det V±`,
/// `(nm − c1²)(nm − c2²) = det V` with `c1 ≥ |c2|`, `sgn c2 = sgn det V±`.
pub fn standard_invariants(v: &FilteredCovariance) -> Result<StandardFormInvariants> {
    let m4 = &v.matrix;
    let det_a = block_det(m4, 0, 0);
    let det_b = block_det(m4, 2, 2);
    let det_c = block_det(m4, 0, 2);
    let det_v = m4.determinant();
    let mut degenerate = false;

    let clamp = |x: f64, scale: f64, what: &str, flag: &mut bool| -> Result<f64> {
        if x >= 0.0 {
            Ok(x)
        } else if x >= -DEGENERACY_TOLERANCE * scale.max(1.0) {
            *flag = true;
            Ok(0.0)
        } else {
            Err(Error::Unphysical(alloc::format!("{what} = {x:.3e} < 0")))
        }
    };

    let n = clamp(det_a, det_a.abs(), "det V+", &mut degenerate)?.sqrt();
    let m = clamp(det_b, det_b.abs(), "det V-", &mut degenerate)?.sqrt();
    let nm = n * m;
    if !(nm > 0.0) {
        return Err(Error::Unphysical("vanishing local determinant".into()));
    }
    let p = det_c;
    let s = (nm * nm + p * p - det_v) / nm;
    let disc = clamp(s * s - 4.0 * p * p, s * s, "standard-form discriminant", &mut degenerate)?.sqrt();
    let c1_sq = clamp(0.5 * (s + disc), s.abs(), "c1²", &mut degenerate)?;
    let c2_sq = clamp(0.5 * (s - disc), s.abs(), "c2²", &mut degenerate)?;
    for c_sq in [c1_sq, c2_sq] {
        clamp(nm - c_sq, nm, "nm − c²", &mut degenerate)?;
    }
    let c1 = c1_sq.sqrt();
    let c2 = if p < 0.0 { -c2_sq.sqrt() } else { c2_sq.sqrt() };
    Ok(StandardFormInvariants {
        n,
        m,
        c1,
        c2,
        c_tilde: c1.max(c2.abs()),
        degenerate,
    })
}

/// Maximum of the Banaszek–Wódkiewicz CHSH function.
pub fn b_max(v: &FilteredCovariance) -> Result<f64> {
    Ok(b_max_from(purity(v)?, &standard_invariants(v)?))
}

fn b_max_from(purity: f64, inv: &StandardFormInvariants) -> f64 {
    let x = (inv.n * inv.m).sqrt();
    let c = inv.c_tilde;
    let base = x / (x + c);
    let exponent = x / (x + 2.0 * c);
    purity * (1.0 + base.powf(exponent) * ((x + 2.0 * c) / (x + c)))
}

/// Smallest symplectic eigenvalue of the covariance with `Y-` mirrored.
pub fn pt_min_symplectic_eigenvalue(v: &FilteredCovariance) -> f64 {
    let m = &v.matrix;
    let delta = block_det(m, 0, 0) + block_det(m, 2, 2) - 2.0 * block_det(m, 0, 2);
    let det = m.determinant();
    let inner = (delta * delta - 4.0 * det).max(0.0);
    (0.5 * (delta - inner.sqrt())).max(0.0).sqrt()
}

/// Peres–Horodecki–Simon test: separable iff the partially transposed
/// covariance has symplectic eigenvalues ≥ ½.
pub fn simon_separable(v: &FilteredCovariance) -> Result<bool> {
    v.check_physical()?;
    Ok(pt_min_symplectic_eigenvalue(v) >= 0.5)
}

/// Pure two-mode squeezed vacuum with anticorrelated `X` quadratures.
pub fn pure_tmsv_covariance(r: f64) -> Result<FilteredCovariance> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::invalid("r", "must be finite and >= 0"));
    }
    let a = (2.0 * r).cosh() / 2.0;
    let c = (2.0 * r).sinh() / 2.0;
    let mut m = Matrix4::from_diagonal_element(a);
    m[(0, 2)] = -c;
    m[(2, 0)] = -c;
    m[(1, 3)] = c;
    m[(3, 1)] = c;
    Ok(FilteredCovariance {
        matrix: m,
        provenance: Some(Provenance {
            params: Default::default(),
            filter: None,
            method: CovarianceMethod::External,
            error_estimate: None,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symplectic_form;
    use approx::assert_relative_eq;
    use nalgebra::Matrix2;
    use nalgebra::ComplexField;
    use proptest::prelude::*;

    const R: f64 = 0.405_465_108_108_164_4; // ln 1.5

    fn cov(m: Matrix4<f64>) -> FilteredCovariance {
        FilteredCovariance::new(m).unwrap()
    }

    fn vacuum() -> FilteredCovariance {
        cov(Matrix4::identity() * 0.5)
    }

    fn standard_form(n: f64, m: f64, c1: f64, c2: f64) -> FilteredCovariance {
        cov(Matrix4::new(n, 0.0, c1, 0.0, 0.0, n, 0.0, c2, c1, 0.0, m, 0.0, 0.0, c2, 0.0, m))
    }

    /// Random physical covariance: local symplectics and a beam splitter
    /// applied to a thermal product state.
    fn random_physical(x: &[f64; 8]) -> FilteredCovariance {
        let nu1 = 0.5 + x[0];
        let nu2 = 0.5 + x[1];
        let base = Matrix4::from_diagonal(&Vector4::new(nu1, nu1, nu2, nu2));
        let sq = |r: f64| Matrix2::new(r.exp(), 0.0, 0.0, (-r).exp());
        let rot = |t: f64| Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos());
        let mut s1 = Matrix4::zeros();
        s1.fixed_view_mut::<2, 2>(0, 0).copy_from(&(rot(x[2]) * sq(x[3])));
        s1.fixed_view_mut::<2, 2>(2, 2).copy_from(&(rot(x[4]) * sq(-x[3])));
        let (c, s) = (x[5].cos(), x[5].sin());
        let bs = Matrix4::new(c, 0.0, s, 0.0, 0.0, c, 0.0, s, -s, 0.0, c, 0.0, 0.0, -s, 0.0, c);
        // two-mode squeeze
        let (ch, sh) = (x[6].cosh(), x[6].sinh());
        let tms = Matrix4::new(ch, 0.0, sh, 0.0, 0.0, ch, 0.0, -sh, sh, 0.0, ch, 0.0, 0.0, -sh, 0.0, ch);
        let mut s2 = Matrix4::zeros();
        s2.fixed_view_mut::<2, 2>(0, 0).copy_from(&rot(x[7]));
        s2.fixed_view_mut::<2, 2>(2, 2).copy_from(&rot(-x[7]));
        let s = s2 * bs * tms * s1;
        let m = s * base * s.transpose();
        cov((m + m.transpose()) * 0.5)
    }

    #[test]
    fn vacuum_metrics() {
        let g = GaussianMetrics::evaluate(&vacuum()).unwrap();
        assert_relative_eq!(g.s_q_min, 1.0, epsilon = 1e-14);
        assert_relative_eq!(g.purity, 1.0, epsilon = 1e-14);
        assert_relative_eq!(g.b_max, 2.0, epsilon = 1e-14);
        assert!(g.simon_separable && !g.entangled_by_sql);
        let inv = g.invariants;
        assert_eq!((inv.n, inv.m, inv.c1, inv.c2), (0.5, 0.5, 0.0, 0.0));
    }

    #[test]
    fn s_q_reductions() {
        let w = QuadratureWeights::new(1.0, 0.7, 0.3, -1.1).unwrap();
        assert_relative_eq!(s_q(&vacuum(), &w), 1.0, epsilon = 1e-14);
        let v = random_physical(&[0.3, 0.1, 0.4, 0.2, -0.3, 0.7, 0.5, 0.2]);
        let single = QuadratureWeights::new(1.0, 0.0, 0.0, 0.0).unwrap();
        assert_relative_eq!(s_q(&v, &single), 2.0 * v.matrix[(0, 0)], epsilon = 1e-14);
    }

    #[test]
    fn tmsv_equal_weights() {
        let v = pure_tmsv_covariance(R).unwrap();
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let w = QuadratureWeights::new(h, h, 0.0, 0.0).unwrap();
        assert_relative_eq!(s_q(&v, &w), (-2.0 * R).exp(), epsilon = 1e-12);
        assert!((s_q(&v, &w) - 0.4444).abs() < 1e-3);
        let (min, _) = s_q_min(&v);
        assert!((min - 0.4445).abs() < 1e-4);
    }

    #[test]
    fn thermal_dressing_shifts_minimum() {
        let v = pure_tmsv_covariance(R).unwrap();
        let d = cov(v.matrix + Matrix4::identity() * 0.1);
        assert_relative_eq!(s_q_min(&d).0 - s_q_min(&v).0, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn purity_values() {
        assert_relative_eq!(purity(&cov(Matrix4::identity())).unwrap(), 0.25, epsilon = 1e-14);
        for r in [0.0, 0.3, 1.0, 3.0] {
            assert_relative_eq!(purity(&pure_tmsv_covariance(r).unwrap()).unwrap(), 1.0, epsilon = 1e-10);
        }
        assert!(purity(&cov(Matrix4::zeros())).is_err());
    }

    #[test]
    fn tmsv_invariants() {
        let r = 0.7;
        let inv = standard_invariants(&pure_tmsv_covariance(r).unwrap()).unwrap();
        assert_relative_eq!(inv.n, (2.0 * r).cosh() / 2.0, epsilon = 1e-12);
        assert_relative_eq!(inv.m, (2.0 * r).cosh() / 2.0, epsilon = 1e-12);
        assert_relative_eq!(inv.c1, (2.0 * r).sinh() / 2.0, max_relative = 1e-6);
        assert_relative_eq!(inv.c2, -inv.c1, max_relative = 1e-6);
    }

    #[test]
    fn bell_values() {
        assert_relative_eq!(b_max(&vacuum()).unwrap(), 2.0, epsilon = 1e-14);
        assert_relative_eq!(b_max(&cov(Matrix4::identity())).unwrap(), 0.5, epsilon = 1e-14);
        let b = b_max(&pure_tmsv_covariance(6.0).unwrap()).unwrap();
        assert!((b - 2.1906).abs() < 1e-3, "b = {b}");
        let mut last = 2.0;
        for i in 1..=24 {
            let r = 0.25 * i as f64;
            let b = b_max(&pure_tmsv_covariance(r).unwrap()).unwrap();
            // rounding the entries perturbs det V by ~eps·e^{4r} relative
            let slack = 1e-12 + 10.0 * f64::EPSILON * (4.0 * r).exp();
            assert!(b >= last - slack, "r = {r}: {b} < {last}");
            last = b;
        }
    }

    #[test]
    fn tmsv_beyond_double_precision_is_rejected() {
        // cosh(20)/2 and sinh(20)/2 round to the same double, so det V = 0.
        assert!(b_max(&pure_tmsv_covariance(10.0).unwrap()).is_err());
    }

    #[test]
    fn simon_cases() {
        assert!(simon_separable(&vacuum()).unwrap());
        let v = pure_tmsv_covariance(R).unwrap();
        assert!(!simon_separable(&v).unwrap());
        assert_relative_eq!(pt_min_symplectic_eigenvalue(&v), (-2.0 * R).exp() / 2.0, epsilon = 1e-12);
        for n in [0.0, 0.5, 10.0, 500.0] {
            assert!(simon_separable(&cov(Matrix4::identity() * (n + 0.5))).unwrap());
        }
    }

    #[test]
    fn pt_eigenvalue_matches_direct_spectrum() {
        let v = random_physical(&[0.2, 0.05, 1.0, 0.3, 0.2, 0.4, 0.6, 0.1]);
        let mut flip = Matrix4::identity();
        flip[(3, 3)] = -1.0;
        let pt = flip * v.matrix * flip;
        let k = symplectic_form() * pt;
        let nu = k.complex_eigenvalues().iter().map(|z| z.modulus()).fold(f64::INFINITY, f64::min);
        assert_relative_eq!(pt_min_symplectic_eigenvalue(&v), nu, max_relative = 1e-8);
    }

    #[test]
    fn optimizer_matches_eigenvalue() {
        let v = random_physical(&[0.2, 0.4, 0.3, -0.2, 1.2, 0.5, 0.8, 0.4]);
        let (a, _) = s_q_min(&v);
        let (b, w) = s_q_min_direct(&v);
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        assert!((s_q(&v, &w) - b).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn returned_weights_reproduce_minimum(x in prop::array::uniform8(-1.0f64..1.0)) {
            let x = x.map(f64::abs);
            let v = random_physical(&x);
            let (min, w) = s_q_min(&v);
            prop_assert!((s_q(&v, &w) - min).abs() < 1e-8);
        }

        #[test]
        fn invariants_round_trip(n in 0.5f64..5.0, m in 0.5f64..5.0, a in 0.0f64..1.0, b in 0.0f64..1.0, neg in any::<bool>()) {
            // draws violating the uncertainty relation are discarded below
            let c1 = a * (n * m).sqrt();
            let c2 = b * c1 * if neg { -1.0 } else { 1.0 };
            let v = FilteredCovariance::new(Matrix4::new(n, 0.0, c1, 0.0, 0.0, n, 0.0, c2, c1, 0.0, m, 0.0, 0.0, c2, 0.0, m)).unwrap();
            prop_assume!(v.uncertainty_margin() > 1e-6);
            let inv = standard_invariants(&v).unwrap();
            prop_assert!((inv.n - n).abs() < 1e-8 && (inv.m - m).abs() < 1e-8);
            prop_assert!((inv.c1 - c1).abs() < 1e-8 * (1.0 + c1), "{} vs {}", inv.c1, c1);
            prop_assert!((inv.c2 - c2).abs() < 1e-7 * (1.0 + c1), "{} vs {}", inv.c2, c2);
            let det = (n * m - inv.c1 * inv.c1) * (n * m - inv.c2 * inv.c2);
            prop_assert!((det - v.matrix.determinant()).abs() <= 1e-8 * v.matrix.determinant().abs());
        }

        #[test]
        fn local_rotations_leave_metrics_unchanged(x in prop::array::uniform8(0.0f64..1.0), tp in -3.0f64..3.0, tm in -3.0f64..3.0) {
            let v = random_physical(&x);
            let a = GaussianMetrics::evaluate(&v).unwrap();
            let b = GaussianMetrics::evaluate(&v.rotated(tp, tm)).unwrap();
            prop_assert!((a.s_q_min - b.s_q_min).abs() < 1e-8);
            prop_assert!((a.purity - b.purity).abs() < 1e-8);
            prop_assert!((a.b_max - b.b_max).abs() < 1e-8);
            prop_assert!((a.invariants.c1 - b.invariants.c1).abs() < 1e-6);
            prop_assert!((a.invariants.n - b.invariants.n).abs() < 1e-8);
        }

        #[test]
        fn implications_hold(x in prop::array::uniform8(0.0f64..1.5)) {
            let g = GaussianMetrics::evaluate(&random_physical(&x)).unwrap();
            prop_assert!(g.purity > 0.0 && g.purity <= 1.0 + 1e-8);
            prop_assert!(g.b_max <= 2.1906 + 1e-3);
            if g.b_max > 2.0 { prop_assert!(!g.simon_separable); }
        }

        /// Local single-mode squeezing beats the SQL on product states, so the
        /// SQL witness is checked on states with phase-insensitive local blocks
        /// (no local squeezing, no beam splitter).
        #[test]
        fn sql_witness_implies_inseparable(mut x in prop::array::uniform8(0.0f64..1.5)) {
            x[3] = 0.0;
            x[5] = 0.0;
            let g = GaussianMetrics::evaluate(&random_physical(&x)).unwrap();
            if g.s_q_min < 1.0 - 1e-9 { prop_assert!(!g.simon_separable); }
        }

        #[test]
        fn standard_form_of_tmsv_any_r(r in 0.0f64..3.0) {
            let v = standard_form((2.0 * r).cosh() / 2.0, (2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0, -(2.0 * r).sinh() / 2.0);
            prop_assert!((purity(&v).unwrap() - 1.0).abs() < 1e-9);
        }
    }
}
