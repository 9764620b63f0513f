//! Volume forms: closed-form densities and Busemann–Hausdorff quadrature.
//!
//! The Busemann–Hausdorff density at a base point x is
//!
//! ```text
//! σ_F(x) = Vol(Bⁿ) / Vol{ y : F(x, y) < 1 },
//! ```
//!
//! and the unit-ball volume is computed in polar form as
//! `(1/n) ∮ r(θ)ⁿ dθ` over Euclidean directions, with `r(θ)` the indicatrix
//! radius. For Randers and Kropina data the density also has closed forms,
//! which the S-curvature pipeline prefers; quadrature is kept independent so
//! the two can cross-check each other.
//!
//! Quadrature design: directions are sampled on the coordinate sphere with a
//! trapezoid rule in the angle for n = 2 (spectrally accurate for smooth
//! integrands, since they are periodic) and a Gauss–Legendre × trapezoid
//! product for n = 3. Node counts double until two successive refinements
//! agree. Kropina metrics integrate `max(β, 0)ⁿ / α²ⁿ`, which is only C¹ at
//! the cone boundary, so their tolerance is relaxed and the node cap raised;
//! everything else converges to a strict 1e-9.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::Scalar;
use crate::jet::{JetSpace, MultiJet};
use crate::linalg;
use crate::metric::{Lowered, Metric};

/// How to obtain the volume density σ_F entering S-curvature and distortion.
#[derive(Debug, Clone, PartialEq)]
pub enum VolumeSpec {
    /// Busemann–Hausdorff density by direction quadrature.
    BusemannHausdorff,
    /// `σ = (1 − ‖β‖²)^{(n+1)/2} √det a` (Randers lowerings only).
    ClosedFormRanders,
    /// `σ = (2/‖β‖)ⁿ √det a` (Kropina lowerings only).
    ClosedFormKropina,
    /// `σ = √det a` (any lowering with an α part).
    RiemannianDensity,
    /// A constant density (σ ≡ c with c > 0).
    ConstantDensity(f64),
}

impl VolumeSpec {
    /// The closed form matching the metric's lowering, quadrature otherwise.
    pub fn preferred(m: &Metric) -> VolumeSpec {
        match m.lowered() {
            Lowered::General { .. } => VolumeSpec::BusemannHausdorff,
            Lowered::Riemannian { .. } => VolumeSpec::RiemannianDensity,
            Lowered::Randers { .. } => VolumeSpec::ClosedFormRanders,
            Lowered::Kropina { .. } => VolumeSpec::ClosedFormKropina,
        }
    }
}

pub fn euclidean_ball_volume(n: usize) -> Result<f64> {
    match n {
        2 => Ok(std::f64::consts::PI),
        3 => Ok(4.0 * std::f64::consts::PI / 3.0),
        _ => Err(Error::UnsupportedDimension {
            dim: n,
            what: "direction quadrature (supported: n = 2, 3)",
        }),
    }
}

// ---------------------------------------------------------------------------
// Quadrature drivers, generic over plain values and jets
// ---------------------------------------------------------------------------

trait QuadValue: Clone {
    fn accum(&mut self, other: &Self);
    fn scale(&self, f: f64) -> Self;
    /// Largest coefficient difference against `other`.
    fn delta(&self, other: &Self) -> f64;
    fn magnitude(&self) -> f64;
}

impl QuadValue for f64 {
    fn accum(&mut self, other: &Self) {
        *self += other;
    }
    fn scale(&self, f: f64) -> Self {
        self * f
    }
    fn delta(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for MultiJet {
    fn accum(&mut self, other: &Self) {
        *self = &*self + other;
    }
    fn scale(&self, f: f64) -> Self {
        MultiJet::scale(self, f)
    }
    fn delta(&self, other: &Self) -> f64 {
        let a = self.coeffs();
        let b = other.coeffs();
        a.iter()
            .zip(b)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max)
    }
    fn magnitude(&self) -> f64 {
        self.coeffs().iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

struct QuadParams {
    tol: f64,
    max_points_2d: usize,
    max_polar: usize,
    max_azimuth: usize,
}

const SMOOTH: QuadParams = QuadParams {
    tol: 1e-9,
    max_points_2d: 4096,
    max_polar: 64,
    max_azimuth: 128,
};

// The Kropina integrand has a kink at the cone boundary; see module docs.
const KINKED: QuadParams = QuadParams {
    tol: 1e-8,
    max_points_2d: 16384,
    max_polar: 128,
    max_azimuth: 256,
};

const KINKED_TOL_3D: f64 = 2e-6;

/// Trapezoid rule over the full circle with doubling; even points are reused.
fn circle_quadrature<T: QuadValue>(
    f: &dyn Fn(f64) -> Result<T>,
    params: &QuadParams,
) -> Result<(T, usize)> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut n = 16usize;
    let mut sum: Option<T> = None; // Σ f(θ_k), not yet scaled by h
    let mut prev: Option<T> = None;
    loop {
        match sum.as_mut() {
            None => {
                let mut s: Option<T> = None;
                for k in 0..n {
                    let v = f(two_pi * k as f64 / n as f64)?;
                    match s.as_mut() {
                        None => s = Some(v),
                        Some(acc) => acc.accum(&v),
                    }
                }
                sum = s;
            }
            Some(acc) => {
                // Points with odd index at the doubled resolution are new.
                for k in (1..n).step_by(2) {
                    let v = f(two_pi * k as f64 / n as f64)?;
                    acc.accum(&v);
                }
            }
        }
        let estimate = sum.as_ref().expect("nonzero node count").scale(two_pi / n as f64);
        if let Some(p) = &prev {
            let d = estimate.delta(p);
            let scale = estimate.magnitude().max(1e-300);
            if d <= params.tol * scale {
                return Ok((estimate, n));
            }
        }
        if n >= params.max_points_2d {
            let d = prev.map(|p| estimate.delta(&p)).unwrap_or(f64::INFINITY);
            return Err(Error::QuadratureNonConvergence {
                last_diff: d,
                points: n,
            });
        }
        prev = Some(estimate);
        n *= 2;
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..(m + 1) / 2 {
        // Chebyshev-like initial guess.
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            // Evaluate P_m(t) and P'_m(t) via the three-term recurrence.
            let mut p0 = 1.0;
            let mut p1 = t;
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = m as f64 * (t * p1 - p0) / (t * t - 1.0);
            let step = p1 / dp;
            t -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        // Recompute P'_m at the converged node for the weight.
        let mut p0 = 1.0;
        let mut p1 = t;
        for k in 2..=m {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = m as f64 * (t * p1 - p0) / (t * t - 1.0);
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        nodes[i] = -t;
        nodes[m - 1 - i] = t;
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Sphere quadrature: Gauss–Legendre in cos(polar) × trapezoid in azimuth.
fn sphere_quadrature<T: QuadValue>(
    f: &dyn Fn(&[f64; 3]) -> Result<T>,
    params: &QuadParams,
    tol: f64,
) -> Result<(T, usize)> {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut m = 8usize; // polar nodes
    let mut n = 16usize; // azimuth nodes
    let mut prev: Option<T> = None;
    loop {
        let (nodes, weights) = gauss_legendre(m);
        let mut total: Option<T> = None;
        for (t, w) in nodes.iter().zip(&weights) {
            let s = (1.0 - t * t).sqrt();
            for k in 0..n {
                let psi = two_pi * k as f64 / n as f64;
                let dir = [s * psi.cos(), s * psi.sin(), *t];
                let v = f(&dir)?.scale(w * two_pi / n as f64);
                match total.as_mut() {
                    None => total = Some(v),
                    Some(acc) => acc.accum(&v),
                }
            }
        }
        let estimate = total.expect("nonzero node count");
        if let Some(p) = &prev {
            let d = estimate.delta(p);
            let scale = estimate.magnitude().max(1e-300);
            if d <= tol * scale {
                return Ok((estimate, m * n));
            }
        }
        if m >= params.max_polar || n >= params.max_azimuth {
            let d = prev.map(|p| estimate.delta(&p)).unwrap_or(f64::INFINITY);
            return Err(Error::QuadratureNonConvergence {
                last_diff: d,
                points: m * n,
            });
        }
        prev = Some(estimate);
        m *= 2;
        n *= 2;
    }
}

// ---------------------------------------------------------------------------
// Indicatrix integrands
// ---------------------------------------------------------------------------

/// `r(θ)ⁿ` where `r` is the indicatrix radius along direction θ, evaluated
/// generically (θ components enter as constants of the scalar type).
fn radial_integrand<T: Scalar>(m: &Metric, x: &[T], dir: &[f64]) -> Result<T> {
    let n = m.dim();
    let proto = &x[0];
    let y: Vec<T> = dir.iter().map(|&d| T::constant_like(proto, d)).collect();
    match m.lowered() {
        Lowered::Kropina { a, b } => {
            // r(θ) = max(β, 0) / α²; the integrand is its n-th power.
            let av = a.eval(x)?;
            let bv = b.eval(x)?;
            let mut alpha2: Option<T> = None;
            let mut beta: Option<T> = None;
            for i in 0..n {
                for j in 0..n {
                    let t = av[i * n + j].mul(&y[i]).mul(&y[j]);
                    alpha2 = Some(match alpha2 {
                        None => t,
                        Some(s) => s.add(&t),
                    });
                }
                let t = bv[i].mul(&y[i]);
                beta = Some(match beta {
                    None => t,
                    Some(s) => s.add(&t),
                });
            }
            let alpha2 = alpha2.expect("dim ≥ 2");
            let beta = beta.expect("dim ≥ 2");
            if beta.value() <= 0.0 {
                // Outside the cone the indicatrix collapses to the origin.
                return Ok(T::constant_like(proto, 0.0));
            }
            beta.div(&alpha2)?.powi(n as i32)
        }
        _ => {
            let f = m.eval_f(x, &y)?;
            if !(f.value() > 0.0) {
                return Err(Error::domain(format!(
                    "indicatrix radius undefined: F = {:.3e} along a direction",
                    f.value()
                )));
            }
            f.powi(-(n as i32))
        }
    }
}

fn quad_params(m: &Metric) -> (&'static QuadParams, f64) {
    match m.lowered() {
        Lowered::Kropina { .. } => (&KINKED, KINKED_TOL_3D),
        _ => (&SMOOTH, SMOOTH.tol),
    }
}

/// `Vol{ y : F(x, y) < 1 }` by direction quadrature.
pub fn unit_ball_volume(m: &Metric, x: &[f64]) -> Result<f64> {
    let n = m.dim();
    euclidean_ball_volume(n)?;
    if x.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.len(),
        });
    }
    let (params, tol3) = quad_params(m);
    let integral = match n {
        2 => {
            let f = |theta: f64| -> Result<f64> {
                radial_integrand(m, x, &[theta.cos(), theta.sin()])
            };
            circle_quadrature(&f, params)?.0
        }
        3 => {
            let f = |dir: &[f64; 3]| -> Result<f64> { radial_integrand(m, x, dir) };
            sphere_quadrature(&f, params, if params.tol < tol3 { tol3 } else { params.tol })?.0
        }
        _ => unreachable!("gated above"),
    };
    Ok(integral / n as f64)
}

/// Busemann–Hausdorff density σ_F(x) by quadrature.
pub fn bh_density_value(m: &Metric, x: &[f64]) -> Result<f64> {
    Ok(euclidean_ball_volume(m.dim())? / unit_ball_volume(m, x)?)
}

/// Busemann–Hausdorff `ln σ_F` as a jet in an n-variable x-space.
///
/// The space must have exactly `dim` variables: directions are constants and
/// only the base point is differentiated. Embed the result into a larger
/// space if the caller works on the full tangent bundle.
pub fn bh_ln_density_jet(
    m: &Metric,
    space: &Arc<JetSpace>,
    x: &[f64],
) -> Result<MultiJet> {
    let n = m.dim();
    assert_eq!(space.num_vars(), n, "density jets live in the x-space");
    let ball = euclidean_ball_volume(n)?;
    let xj: Vec<MultiJet> = (0..n).map(|i| MultiJet::variable(space, i, x[i])).collect();
    let (params, tol3) = quad_params(m);
    let integral = match n {
        2 => {
            let f = |theta: f64| -> Result<MultiJet> {
                radial_integrand(m, &xj, &[theta.cos(), theta.sin()])
            };
            circle_quadrature(&f, params)?.0
        }
        3 => {
            let f = |dir: &[f64; 3]| -> Result<MultiJet> { radial_integrand(m, &xj, dir) };
            sphere_quadrature(&f, params, if params.tol < tol3 { tol3 } else { params.tol })?.0
        }
        _ => unreachable!("gated by euclidean_ball_volume"),
    };
    let vol = integral.scale(1.0 / n as f64);
    MultiJet::constant(space, ball).div(&vol)?.ln()
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

fn closed_form_parts(
    m: &Metric,
    space: &Arc<JetSpace>,
    x: &[f64],
) -> Result<(MultiJet, Option<MultiJet>)> {
    let n = m.dim();
    assert_eq!(space.num_vars(), n, "density jets live in the x-space");
    let (a, b) = m
        .alpha_beta()
        .ok_or_else(|| Error::invalid("closed-form densities need (α, β) data"))?;
    let xj: Vec<MultiJet> = (0..n).map(|i| MultiJet::variable(space, i, x[i])).collect();
    let av = a.eval(&xj)?;
    let det = linalg::jet_det(n, &av)?;
    if det.value() <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            min_eig: det.value(),
        });
    }
    let b2 = match b {
        None => None,
        Some(b) => {
            let bv = b.eval(&xj)?;
            let inv = linalg::jet_inverse(n, &av)?;
            let mut s: Option<MultiJet> = None;
            for i in 0..n {
                for j in 0..n {
                    let t = inv[i * n + j].mul(&bv[i]).mul(&bv[j]);
                    s = Some(match s {
                        None => t,
                        Some(acc) => &acc + &t,
                    });
                }
            }
            Some(s.expect("dim ≥ 2"))
        }
    };
    Ok((det, b2))
}

/// `ln σ_F` for the requested density as a jet in an n-variable x-space.
pub fn ln_density_jet(
    m: &Metric,
    spec: &VolumeSpec,
    space: &Arc<JetSpace>,
    x: &[f64],
) -> Result<MultiJet> {
    let n = m.dim();
    match spec {
        VolumeSpec::BusemannHausdorff => bh_ln_density_jet(m, space, x),
        VolumeSpec::ConstantDensity(c) => {
            if !(*c > 0.0) {
                return Err(Error::invalid("constant density must be positive"));
            }
            Ok(MultiJet::constant(space, f64::ln(*c)))
        }
        VolumeSpec::RiemannianDensity => {
            let (det, _) = closed_form_parts(m, space, x)?;
            Ok(det.ln()?.scale(0.5))
        }
        VolumeSpec::ClosedFormRanders => {
            if !matches!(m.lowered(), Lowered::Randers { .. }) {
                return Err(Error::invalid(format!(
                    "Randers closed-form density on a {} metric",
                    m.kind()
                )));
            }
            let (det, b2) = closed_form_parts(m, space, x)?;
            let b2 = b2.expect("Randers lowering has b");
            let one = MultiJet::constant(space, 1.0);
            let factor = (&one - &b2).ln()?.scale((n as f64 + 1.0) / 2.0);
            Ok(&factor + &det.ln()?.scale(0.5))
        }
        VolumeSpec::ClosedFormKropina => {
            if !matches!(m.lowered(), Lowered::Kropina { .. }) {
                return Err(Error::invalid(format!(
                    "Kropina closed-form density on a {} metric",
                    m.kind()
                )));
            }
            let (det, b2) = closed_form_parts(m, space, x)?;
            let b2 = b2.expect("Kropina lowering has b");
            // ln[(2/‖β‖)ⁿ √det a] = n ln 2 − (n/2) ln b² + ½ ln det a
            let nf = n as f64;
            let t = MultiJet::constant(space, nf * std::f64::consts::LN_2);
            let t = &t - &b2.ln()?.scale(nf / 2.0);
            Ok(&t + &det.ln()?.scale(0.5))
        }
    }
}

/// σ_F(x) as a plain value.
pub fn density_value(m: &Metric, spec: &VolumeSpec, x: &[f64]) -> Result<f64> {
    match spec {
        VolumeSpec::BusemannHausdorff => bh_density_value(m, x),
        _ => {
            let space = crate::jet::space(m.dim());
            Ok(ln_density_jet(m, spec, &space, x)?.value().exp())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet;
    use crate::metric::builtin;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (nodes, weights) = gauss_legendre(8);
        // ∫_{-1}^{1} t^k dt
        for k in [0usize, 2, 4, 8, 14] {
            let num: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(&t, w)| w * f64::powi(t, k as i32))
                .sum();
            assert_relative_eq!(num, 2.0 / (k as f64 + 1.0), epsilon = 1e-13);
        }
        let odd: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(&t, w)| w * f64::powi(t, 3))
            .sum();
        assert!(odd.abs() < 1e-15);
    }

    #[test]
    fn euclidean_density_is_one() {
        for name in ["euclidean2", "euclidean3"] {
            let m = builtin(name).unwrap();
            let x = vec![0.1; m.dim()];
            let sigma = bh_density_value(&m, &x).unwrap();
            assert_relative_eq!(sigma, 1.0, max_relative = 1e-9);
        }
    }

    #[test]
    fn randers_quadrature_matches_closed_form() {
        let m = builtin("randers-const2").unwrap();
        // ‖β‖² = 1/4 ⇒ σ_F = (3/4)^{3/2}.
        let sigma = bh_density_value(&m, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(sigma, 0.75f64.powf(1.5), max_relative = 1e-9);
        let closed = density_value(&m, &VolumeSpec::ClosedFormRanders, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(sigma, closed, max_relative = 1e-8);
    }

    #[test]
    fn kropina_density_closed_and_quadrature() {
        let m = builtin("kropina-const").unwrap();
        // Indicatrix is the disc of radius 1/2 through the origin: area π/4.
        let vol = unit_ball_volume(&m, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(vol, std::f64::consts::PI / 4.0, max_relative = 1e-8);
        let sigma = bh_density_value(&m, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(sigma, 4.0, max_relative = 1e-8);
        let closed = density_value(&m, &VolumeSpec::ClosedFormKropina, &[0.0, 0.0]).unwrap();
        assert_relative_eq!(closed, 4.0, epsilon = 1e-12);

        let m3 = builtin("kropina-const3").unwrap();
        let sigma3 = bh_density_value(&m3, &[0.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(sigma3, 8.0, max_relative = 2e-5);
        let closed3 =
            density_value(&m3, &VolumeSpec::ClosedFormKropina, &[0.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(closed3, 8.0, epsilon = 1e-12);
    }

    #[test]
    fn funk_density_is_identically_one() {
        let m = builtin("funk2").unwrap();
        for x in [[0.0, 0.0], [0.3, 0.1], [-0.2, 0.4]] {
            let sigma = bh_density_value(&m, &x).unwrap();
            assert_relative_eq!(sigma, 1.0, max_relative = 1e-9);
            let closed = density_value(&m, &VolumeSpec::ClosedFormRanders, &x).unwrap();
            assert_relative_eq!(closed, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn density_jets_match_between_quadrature_and_closed_form() {
        let m = builtin("funk2").unwrap();
        let space = jet::space(2);
        let x = [0.25, -0.15];
        let quad = bh_ln_density_jet(&m, &space, &x).unwrap();
        let closed = ln_density_jet(&m, &VolumeSpec::ClosedFormRanders, &space, &x).unwrap();
        assert_relative_eq!(quad.value(), closed.value(), epsilon = 1e-8);
        for v in 0..2 {
            assert_relative_eq!(quad.d1(v), closed.d1(v), epsilon = 1e-6);
            for w in 0..2 {
                let mut idx = [0u8; 2];
                idx[v] += 1;
                idx[w] += 1;
                assert_relative_eq!(
                    quad.derivative(&idx),
                    closed.derivative(&idx),
                    epsilon = 1e-5
                );
            }
        }
    }

    #[test]
    fn riemannian_density_derivatives() {
        // klein2: √det a = (1 − |x|²)^{−3/2}, so ln σ = −(3/2) ln(1 − |x|²).
        let m = builtin("klein2").unwrap();
        let space = jet::space(2);
        let x = [0.3, -0.2];
        let j = ln_density_jet(&m, &VolumeSpec::RiemannianDensity, &space, &x).unwrap();
        let r2: f64 = x.iter().map(|v| v * v).sum();
        assert_relative_eq!(j.value(), -1.5 * (1.0 - r2).ln(), epsilon = 1e-12);
        assert_relative_eq!(j.d1(0), 3.0 * x[0] / (1.0 - r2), epsilon = 1e-12);
        assert_relative_eq!(j.d1(1), 3.0 * x[1] / (1.0 - r2), epsilon = 1e-12);
    }

    #[test]
    fn closed_form_requires_matching_kind() {
        let m = builtin("euclidean2").unwrap();
        assert!(density_value(&m, &VolumeSpec::ClosedFormRanders, &[0.0, 0.0]).is_err());
        let k = builtin("kropina-const").unwrap();
        assert!(density_value(&k, &VolumeSpec::ClosedFormRanders, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn quartic_root_volume_is_finite_and_plausible() {
        let m = builtin("quartic2").unwrap();
        let vol = unit_ball_volume(&m, &[0.0, 0.0]).unwrap();
        // On the unit circle F⁴ = 1 − sin²(2θ)/4 ∈ [3/4, 1], so the unit
        // ball contains the Euclidean disc and sits inside its √(4/3)-dilate:
        // π < vol < (4/3)^{1/2} π ≈ 3.6276.
        let pi = std::f64::consts::PI;
        assert!(vol > pi && vol < pi * (4.0f64 / 3.0).sqrt(), "vol = {vol}");
    }
}
