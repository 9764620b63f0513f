//! Metric specifications and the builtin catalog.
//!
//! A [`MetricSpec`] describes a Finsler metric either directly through an
//! expression for `F(x, y)` or through structured data (a Riemannian metric
//! `a_ij(x)`, a 1-form `b_i(x)`, or one of the named constructions). Every
//! spec is *lowered* at construction time to one of four computational forms
//! (general, Riemannian, Randers, Kropina), which is what the curvature and
//! volume pipelines consume. Lowered data is symbolic — entries are [`Expr`]
//! trees — so the same definition can be evaluated on plain numbers or on
//! truncated jets without duplicating formulas.

use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{self, Coord, Expr, Scalar};
use crate::linalg;

/// A symmetric matrix of x-only expressions: the data of a Riemannian metric.
#[derive(Debug, Clone)]
pub struct RiemannianSpec {
    pub dim: usize,
    entries: Vec<Expr>, // row-major, dim × dim
}

impl RiemannianSpec {
    /// Build from a full row-major entry list (callers are expected to pass
    /// symmetric data; the file loader mirrors the upper triangle).
    pub fn new(dim: usize, entries: Vec<Expr>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        for (k, e) in entries.iter().enumerate() {
            check_x_only(e, dim, || format!("a[{}][{}]", k / dim + 1, k % dim + 1))?;
        }
        Ok(RiemannianSpec { dim, entries })
    }

    pub fn euclidean(dim: usize) -> Self {
        let mut entries = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                entries.push(Expr::lit(if i == j { 1.0 } else { 0.0 }));
            }
        }
        RiemannianSpec { dim, entries }
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.dim + j]
    }

    /// Evaluate all entries at a point (plain values or jets).
    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        let empty: [T; 0] = [];
        let b = expr::Bindings { x, y: &empty };
        self.entries.iter().map(|e| expr::eval(e, &b)).collect()
    }
}

/// A 1-form with x-only expression components.
#[derive(Debug, Clone)]
pub struct OneFormSpec {
    pub dim: usize,
    entries: Vec<Expr>,
}

impl OneFormSpec {
    pub fn new(dim: usize, entries: Vec<Expr>) -> Result<Self> {
        check_dim(dim)?;
        if entries.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: entries.len(),
            });
        }
        for (k, e) in entries.iter().enumerate() {
            check_x_only(e, dim, || format!("b[{}]", k + 1))?;
        }
        Ok(OneFormSpec { dim, entries })
    }

    pub fn entry(&self, i: usize) -> &Expr {
        &self.entries[i]
    }

    pub fn eval<T: Scalar>(&self, x: &[T]) -> Result<Vec<T>> {
        let empty: [T; 0] = [];
        let b = expr::Bindings { x, y: &empty };
        self.entries.iter().map(|e| expr::eval(e, &b)).collect()
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if !(2..=4).contains(&dim) {
        return Err(Error::UnsupportedDimension {
            dim,
            what: "metric dimension (supported: 2..=4)",
        });
    }
    Ok(())
}

fn check_x_only(e: &Expr, dim: usize, what: impl Fn() -> String) -> Result<()> {
    if e.max_index(Coord::Y).is_some() {
        return Err(Error::invalid(format!(
            "{} must depend on x only, found a y variable",
            what()
        )));
    }
    if let Some(max) = e.max_index(Coord::X) {
        if max >= dim {
            return Err(Error::invalid(format!(
                "{} references x{} but dim = {}",
                what(),
                max + 1,
                dim
            )));
        }
    }
    Ok(())
}

/// User-facing metric description.
#[derive(Debug, Clone)]
pub enum MetricSpec {
    /// `F(x, y)` given directly as an expression, positively 1-homogeneous in y.
    GeneralF { dim: usize, f: Expr },
    /// `F = sqrt(a_ij y^i y^j)`.
    Riemannian(RiemannianSpec),
    /// `F = α + β` with `‖β‖_α < 1`.
    Randers { a: RiemannianSpec, b: OneFormSpec },
    /// `F = α²/β` on the cone `β > 0`.
    Kropina { a: RiemannianSpec, b: OneFormSpec },
    /// Flat Euclidean space.
    Euclidean { dim: usize },
    /// The standard Funk metric on the unit ball.
    Funk { dim: usize },
    /// `F = (α₁⁴ + 2c·α₁²α₂² + α₂⁴)^{1/4}` on a product of Euclidean factors
    /// of dimensions `n1` and `n2`.
    QuarticRoot { n1: usize, n2: usize, c: f64 },
    /// A Randers family on the unit domain `‖a‖·|x|² < 1` built from a fixed
    /// Euclidean vector `a`, with isotropic S-curvature.
    CsRanders { a: Vec<f64> },
    /// Randers metrics on the 3-sphere from a one-parameter deformation of
    /// the round metric along a unit Killing field (parameter `rho > 1`).
    BaoShen { rho: f64, plus: bool },
}

/// The computational form a spec lowers to.
#[derive(Debug, Clone)]
pub enum Lowered {
    General { dim: usize, f: Expr },
    Riemannian { a: RiemannianSpec },
    Randers { a: RiemannianSpec, b: OneFormSpec },
    Kropina { a: RiemannianSpec, b: OneFormSpec },
}

/// A validated metric: spec plus lowered form.
#[derive(Debug, Clone)]
pub struct Metric {
    pub name: String,
    pub spec: MetricSpec,
    lowered: Lowered,
}

// ---------------------------------------------------------------------------
// Expression builders for the named constructions
// ---------------------------------------------------------------------------

fn norm2_x(dim: usize) -> Expr {
    let mut s = Expr::x(0).sq();
    for i in 1..dim {
        s = s + Expr::x(i).sq();
    }
    s
}

/// Klein metric on the unit ball: `a_ij = [δ_ij(1−|x|²) + x_i x_j] / (1−|x|²)²`.
fn klein_metric(dim: usize) -> RiemannianSpec {
    let w = Expr::lit(1.0) - norm2_x(dim);
    let mut entries = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let delta = Expr::lit(if i == j { 1.0 } else { 0.0 });
            let num = delta * w.clone() + Expr::x(i) * Expr::x(j);
            entries.push(num / w.clone().sq());
        }
    }
    RiemannianSpec { dim, entries }
}

/// Funk 1-form: `b_i = x_i / (1−|x|²)`.
fn funk_form(dim: usize) -> OneFormSpec {
    let w = Expr::lit(1.0) - norm2_x(dim);
    let entries = (0..dim).map(|i| Expr::x(i) / w.clone()).collect();
    OneFormSpec { dim, entries }
}

/// Round 3-sphere in gnomonic coordinates:
/// `a_ij = [δ_ij(1+|x|²) − x_i x_j] / (1+|x|²)²`.
fn round_sphere_metric(dim: usize) -> RiemannianSpec {
    let w = Expr::lit(1.0) + norm2_x(dim);
    let mut entries = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let delta = Expr::lit(if i == j { 1.0 } else { 0.0 });
            let num = delta * w.clone() - Expr::x(i) * Expr::x(j);
            entries.push(num / w.clone().sq());
        }
    }
    RiemannianSpec { dim, entries }
}

fn cs_randers_data(a: &[f64]) -> (RiemannianSpec, OneFormSpec) {
    let dim = a.len();
    let s = norm2_x(dim);
    let c: Expr = (0..dim)
        .map(|i| Expr::lit(a[i]) * Expr::x(i))
        .reduce(|p, q| p + q)
        .expect("non-empty vector");
    // w_i = 2⟨a,x⟩·x_i − |x|²·a_i,  D = 1 − ‖a‖²|x|⁴. With this orientation
    // of the 1-form, the family has S = (n+1)⟨a,x⟩F and
    // Ric = (n−1)(3⟨a,y⟩F + ρF²); the opposite sign sends a ↦ −a.
    let w: Vec<Expr> = (0..dim)
        .map(|i| Expr::lit(2.0) * c.clone() * Expr::x(i) - Expr::lit(a[i]) * s.clone())
        .collect();
    let a_norm2: f64 = a.iter().map(|v| v * v).sum();
    let d = Expr::lit(1.0) - Expr::lit(a_norm2) * s.clone().sq();
    let mut entries = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        for j in 0..dim {
            let delta = Expr::lit(if i == j { 1.0 } else { 0.0 });
            entries.push(delta / d.clone() + w[i].clone() * w[j].clone() / d.clone().sq());
        }
    }
    let b_entries = (0..dim).map(|i| w[i].clone() / d.clone()).collect();
    (
        RiemannianSpec { dim, entries },
        OneFormSpec {
            dim,
            entries: b_entries,
        },
    )
}

fn bao_shen_data(rho: f64, plus: bool) -> (RiemannianSpec, OneFormSpec) {
    let dim = 3;
    let s = Expr::lit(1.0) + norm2_x(dim);
    // Orthonormal (for the round metric) coframe adapted to a unit Killing
    // field of the 3-sphere, in gnomonic coordinates:
    //   e¹ = (1, −x3,  x2) / (1+|x|²)
    //   e² = (x3,  1, −x1) / (1+|x|²)
    //   e³ = (−x2, x1,  1) / (1+|x|²)
    let frame: [[Expr; 3]; 3] = [
        [Expr::lit(1.0), -Expr::x(2), Expr::x(1)],
        [Expr::x(2), Expr::lit(1.0), -Expr::x(0)],
        [-Expr::x(1), Expr::x(0), Expr::lit(1.0)],
    ];
    let e = |k: usize, i: usize| frame[k][i].clone() / s.clone();
    let mut entries = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            let first = Expr::lit(rho) * e(0, i) * e(0, j);
            entries.push(first + e(1, i) * e(1, j) + e(2, i) * e(2, j));
        }
    }
    let scale = if plus {
        (rho - 1.0).sqrt()
    } else {
        -(rho - 1.0).sqrt()
    };
    let b_entries = (0..3).map(|i| Expr::lit(scale) * e(0, i)).collect();
    (
        RiemannianSpec { dim, entries },
        OneFormSpec {
            dim,
            entries: b_entries,
        },
    )
}

fn quartic_root_f(n1: usize, n2: usize, c: f64) -> Expr {
    let block = |start: usize, len: usize| -> Expr {
        (start..start + len)
            .map(Expr::y)
            .map(Expr::sq)
            .reduce(|p, q| p + q)
            .expect("non-empty block")
    };
    let a1 = block(0, n1);
    let a2 = block(n1, n2);
    let inner =
        a1.clone().sq() + Expr::lit(2.0 * c) * a1 * a2.clone() + a2.sq();
    inner.pow(Expr::lit(0.25))
}

// ---------------------------------------------------------------------------
// Construction and validation
// ---------------------------------------------------------------------------

/// Deterministic probe states used by constructor sanity checks.
fn probe_states(dim: usize, count: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    (0..count)
        .map(|_| {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-0.2..0.2)).collect();
            let y: Vec<f64> = (0..dim)
                .map(|_| {
                    let mag = rng.gen_range(0.5..1.5);
                    if rng.gen_bool(0.5) {
                        mag
                    } else {
                        -mag
                    }
                })
                .collect();
            (x, y)
        })
        .collect()
}

impl MetricSpec {
    fn validate(&self) -> Result<()> {
        match self {
            MetricSpec::GeneralF { dim, f } => {
                check_dim(*dim)?;
                if let Some(max) = f.max_index(Coord::X) {
                    if max >= *dim {
                        return Err(Error::invalid(format!(
                            "F references x{} but dim = {dim}",
                            max + 1
                        )));
                    }
                }
                match f.max_index(Coord::Y) {
                    None => {
                        return Err(Error::invalid(
                            "F must depend on the fiber variables y",
                        ))
                    }
                    Some(max) if max >= *dim => {
                        return Err(Error::invalid(format!(
                            "F references y{} but dim = {dim}",
                            max + 1
                        )));
                    }
                    _ => {}
                }
                // Spot-check positive 1-homogeneity in y: F(x, 2y) = 2·F(x, y).
                let mut checked = 0;
                for (x, y) in probe_states(*dim, 10) {
                    let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
                    let (fa, fb) = match (
                        expr::eval_f64(f, &x, &y),
                        expr::eval_f64(f, &x, &y2),
                    ) {
                        (Ok(a), Ok(b)) => (a, b),
                        _ => continue, // point outside the domain of F
                    };
                    if (fb - 2.0 * fa).abs() > 1e-9 * fa.abs().max(1.0) {
                        return Err(Error::invalid(format!(
                            "F is not positively 1-homogeneous in y: \
                             F(x,2y) = {fb:.6e} vs 2F(x,y) = {:.6e}",
                            2.0 * fa
                        )));
                    }
                    checked += 1;
                }
                if checked == 0 {
                    return Err(Error::invalid(
                        "could not evaluate F at any probe point",
                    ));
                }
                Ok(())
            }
            MetricSpec::Riemannian(a) => check_dim(a.dim),
            MetricSpec::Randers { a, b } => {
                if a.dim != b.dim {
                    return Err(Error::DimensionMismatch {
                        expected: a.dim,
                        found: b.dim,
                    });
                }
                // Probe ‖β‖_α < 1 on a few sample points; failures to
                // evaluate are skipped (the per-sample validation is the
                // authoritative check).
                let mut states = probe_states(a.dim, 5);
                states.insert(0, (vec![0.0; a.dim], vec![1.0; a.dim]));
                for (x, _) in states {
                    if let Some(b2) = b_norm2_at(a, b, &x) {
                        if b2 >= 1.0 {
                            return Err(Error::invalid(format!(
                                "Randers data has ‖β‖²_α = {b2:.6} ≥ 1 at a probe point"
                            )));
                        }
                    }
                }
                Ok(())
            }
            MetricSpec::Kropina { a, b } => {
                if a.dim != b.dim {
                    return Err(Error::DimensionMismatch {
                        expected: a.dim,
                        found: b.dim,
                    });
                }
                let mut seen_positive = false;
                let mut states = probe_states(a.dim, 5);
                states.insert(0, (vec![0.0; a.dim], vec![1.0; a.dim]));
                for (x, _) in states {
                    if let Some(b2) = b_norm2_at(a, b, &x) {
                        if b2 > 1e-12 {
                            seen_positive = true;
                        }
                    }
                }
                if !seen_positive {
                    return Err(Error::invalid(
                        "Kropina data needs a nonvanishing 1-form b",
                    ));
                }
                Ok(())
            }
            MetricSpec::Euclidean { dim } | MetricSpec::Funk { dim } => check_dim(*dim),
            MetricSpec::QuarticRoot { n1, n2, c } => {
                if *n1 == 0 || *n2 == 0 {
                    return Err(Error::invalid("quartic-root factors need n1, n2 ≥ 1"));
                }
                check_dim(n1 + n2)?;
                if !(-1.0 < *c && *c < 3.0) {
                    return Err(Error::InvalidParameter {
                        message: format!(
                            "quartic-root parameter c = {c} outside the convexity range (−1, 3)"
                        ),
                    });
                }
                Ok(())
            }
            MetricSpec::CsRanders { a } => {
                check_dim(a.len())?;
                let norm: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm >= 1.0 {
                    return Err(Error::InvalidParameter {
                        message: format!("constant vector norm ‖a‖ = {norm} must be < 1"),
                    });
                }
                Ok(())
            }
            MetricSpec::BaoShen { rho, .. } => {
                if !(*rho > 1.0) {
                    return Err(Error::InvalidParameter {
                        message: format!("deformation parameter rho = {rho} must be > 1"),
                    });
                }
                Ok(())
            }
        }
    }

    fn lower(&self) -> Lowered {
        match self {
            MetricSpec::GeneralF { dim, f } => Lowered::General {
                dim: *dim,
                f: f.clone(),
            },
            MetricSpec::Riemannian(a) => Lowered::Riemannian { a: a.clone() },
            MetricSpec::Randers { a, b } => Lowered::Randers {
                a: a.clone(),
                b: b.clone(),
            },
            MetricSpec::Kropina { a, b } => Lowered::Kropina {
                a: a.clone(),
                b: b.clone(),
            },
            MetricSpec::Euclidean { dim } => Lowered::Riemannian {
                a: RiemannianSpec::euclidean(*dim),
            },
            MetricSpec::Funk { dim } => Lowered::Randers {
                a: klein_metric(*dim),
                b: funk_form(*dim),
            },
            MetricSpec::QuarticRoot { n1, n2, c } => Lowered::General {
                dim: n1 + n2,
                f: quartic_root_f(*n1, *n2, *c),
            },
            MetricSpec::CsRanders { a } => {
                let (am, bm) = cs_randers_data(a);
                Lowered::Randers { a: am, b: bm }
            }
            MetricSpec::BaoShen { rho, plus } => {
                let (am, bm) = bao_shen_data(*rho, *plus);
                Lowered::Randers { a: am, b: bm }
            }
        }
    }
}

/// `‖β‖²_α = a^{ij} b_i b_j` at a point, if the data evaluates there.
fn b_norm2_at(a: &RiemannianSpec, b: &OneFormSpec, x: &[f64]) -> Option<f64> {
    let av = a.eval(x).ok()?;
    let bv = b.eval(x).ok()?;
    let inv = linalg::invert(a.dim, &av).ok()?;
    let mut s = 0.0;
    for i in 0..a.dim {
        for j in 0..a.dim {
            s += inv[i * a.dim + j] * bv[i] * bv[j];
        }
    }
    Some(s)
}

impl Metric {
    pub fn new(name: impl Into<String>, spec: MetricSpec) -> Result<Metric> {
        spec.validate()?;
        let lowered = spec.lower();
        Ok(Metric {
            name: name.into(),
            spec,
            lowered,
        })
    }

    pub fn dim(&self) -> usize {
        match &self.lowered {
            Lowered::General { dim, .. } => *dim,
            Lowered::Riemannian { a } => a.dim,
            Lowered::Randers { a, .. } | Lowered::Kropina { a, .. } => a.dim,
        }
    }

    pub fn lowered(&self) -> &Lowered {
        &self.lowered
    }

    pub fn kind(&self) -> &'static str {
        match &self.lowered {
            Lowered::General { .. } => "general",
            Lowered::Riemannian { .. } => "riemannian",
            Lowered::Randers { .. } => "randers",
            Lowered::Kropina { .. } => "kropina",
        }
    }

    /// The (α, β) data of the lowered form, when there is one.
    pub fn alpha_beta(&self) -> Option<(&RiemannianSpec, Option<&OneFormSpec>)> {
        match &self.lowered {
            Lowered::General { .. } => None,
            Lowered::Riemannian { a } => Some((a, None)),
            Lowered::Randers { a, b } | Lowered::Kropina { a, b } => Some((a, Some(b))),
        }
    }

    /// Evaluate `F(x, y)` generically over values or jets.
    pub fn eval_f<T: Scalar>(&self, x: &[T], y: &[T]) -> Result<T> {
        match &self.lowered {
            Lowered::General { f, .. } => expr::eval(f, &expr::Bindings { x, y }),
            Lowered::Riemannian { a } => Ok(alpha_of(a, x, y)?.0),
            Lowered::Randers { a, b } => {
                let (alpha, _) = alpha_of(a, x, y)?;
                let beta = beta_of(b, x, y)?;
                Ok(alpha.add(&beta))
            }
            Lowered::Kropina { a, b } => {
                let (_, alpha2) = alpha_of(a, x, y)?;
                let beta = beta_of(b, x, y)?;
                alpha2.div(&beta)
            }
        }
    }

    /// Check that a state `(x, y)` is inside the metric's domain.
    pub fn validate_sample(&self, x: &[f64], y: &[f64]) -> Result<()> {
        let n = self.dim();
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.len(),
            });
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: y.len(),
            });
        }
        if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::domain("coordinates must be finite"));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(Error::domain("y must be nonzero"));
        }
        // Named constructions carry their own base-domain constraints.
        match &self.spec {
            MetricSpec::Funk { .. } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 >= 1.0 {
                    return Err(Error::domain(format!(
                        "|x| = {:.4} outside the unit ball",
                        r2.sqrt()
                    )));
                }
            }
            MetricSpec::CsRanders { a } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                let an: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();
                if an * r2 >= 1.0 {
                    return Err(Error::domain(format!(
                        "‖a‖·|x|² = {:.4} ≥ 1",
                        an * r2
                    )));
                }
            }
            _ => {}
        }
        match &self.lowered {
            Lowered::General { .. } | Lowered::Riemannian { .. } => {}
            Lowered::Randers { a, b } => {
                let b2 = b_norm2_at(a, b, x).ok_or_else(|| {
                    Error::domain("Randers data does not evaluate at this point")
                })?;
                if b2 >= 1.0 {
                    return Err(Error::domain(format!(
                        "Randers norm condition violated: ‖β‖²_α = {b2:.6} ≥ 1"
                    )));
                }
            }
            Lowered::Kropina { a, b } => {
                let b2 = b_norm2_at(a, b, x).ok_or_else(|| {
                    Error::domain("Kropina data does not evaluate at this point")
                })?;
                if b2 <= 0.0 {
                    return Err(Error::domain("Kropina needs b² > 0"));
                }
                let bv = b
                    .eval(x)
                    .map_err(|_| Error::domain("Kropina 1-form does not evaluate"))?;
                let beta: f64 = bv.iter().zip(y).map(|(bi, yi)| bi * yi).sum();
                if beta <= 0.0 {
                    return Err(Error::domain(format!(
                        "y outside the Kropina cone: β = {beta:.6} ≤ 0"
                    )));
                }
            }
        }
        let f = self
            .eval_f(x, y)
            .map_err(|e| Error::domain(format!("F does not evaluate: {e}")))?;
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::domain(format!("F = {f:.6e} is not positive")));
        }
        Ok(())
    }
}

fn alpha_of<T: Scalar>(a: &RiemannianSpec, x: &[T], y: &[T]) -> Result<(T, T)> {
    let av = a.eval(x)?;
    let n = a.dim;
    let mut alpha2: Option<T> = None;
    for i in 0..n {
        for j in 0..n {
            let term = av[i * n + j].mul(&y[i]).mul(&y[j]);
            alpha2 = Some(match alpha2 {
                None => term,
                Some(s) => s.add(&term),
            });
        }
    }
    let alpha2 = alpha2.expect("dim ≥ 2");
    Ok((alpha2.sqrt()?, alpha2))
}

fn beta_of<T: Scalar>(b: &OneFormSpec, x: &[T], y: &[T]) -> Result<T> {
    let bv = b.eval(x)?;
    let mut beta: Option<T> = None;
    for i in 0..b.dim {
        let term = bv[i].mul(&y[i]);
        beta = Some(match beta {
            None => term,
            Some(s) => s.add(&term),
        });
    }
    Ok(beta.expect("dim ≥ 2"))
}

// ---------------------------------------------------------------------------
// Metric files
// ---------------------------------------------------------------------------

/// Load a metric from the `key = value` file format.
///
/// Keys: `dim`, `kind` (`general|riemannian|randers|kropina`), `F`, 1-based
/// `a[i][j]` (either triangle; the mirror entry is implied) and `b[i]`.
/// `#` starts a comment. Unknown or duplicate keys are errors.
pub fn load_metric_file(path: &Path) -> Result<Metric> {
    let src = std::fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "metric".to_string());
    parse_metric_str(&src, &name)
}

pub fn parse_metric_str(src: &str, name: &str) -> Result<Metric> {
    let fail = |line: usize, message: String| Error::MetricFile { line, message };

    let mut dim: Option<(usize, usize)> = None; // (value, line)
    let mut kind: Option<(String, usize)> = None;
    let mut f_expr: Option<(Expr, usize)> = None;
    let mut a_entries: Vec<(usize, usize, Expr, usize)> = Vec::new();
    let mut b_entries: Vec<(usize, Expr, usize)> = Vec::new();

    for (lineno, raw) in src.lines().enumerate() {
        let line = lineno + 1;
        let text = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| fail(line, format!("expected `key = value`, got `{text}`")))?;
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(fail(line, format!("`{key}` has an empty value")));
        }
        if key == "dim" {
            if dim.is_some() {
                return Err(fail(line, "duplicate `dim`".into()));
            }
            let v: usize = value
                .parse()
                .map_err(|_| fail(line, format!("`dim` must be an integer, got `{value}`")))?;
            dim = Some((v, line));
        } else if key == "kind" {
            if kind.is_some() {
                return Err(fail(line, "duplicate `kind`".into()));
            }
            match value {
                "general" | "riemannian" | "randers" | "kropina" => {
                    kind = Some((value.to_string(), line))
                }
                other => {
                    return Err(fail(
                        line,
                        format!(
                            "unknown kind `{other}` (expected general, riemannian, \
                             randers, or kropina)"
                        ),
                    ))
                }
            }
        } else if key == "F" {
            if f_expr.is_some() {
                return Err(fail(line, "duplicate `F`".into()));
            }
            let e = expr::parse(value).map_err(|e| fail(line, format!("in F: {e}")))?;
            f_expr = Some((e, line));
        } else if let Some(idx) = parse_matrix_key(key) {
            let (i, j) = idx.map_err(|m| fail(line, m))?;
            let e = expr::parse(value).map_err(|e| fail(line, format!("in {key}: {e}")))?;
            a_entries.push((i, j, e, line));
        } else if let Some(idx) = parse_form_key(key) {
            let i = idx.map_err(|m| fail(line, m))?;
            let e = expr::parse(value).map_err(|e| fail(line, format!("in {key}: {e}")))?;
            b_entries.push((i, e, line));
        } else {
            return Err(fail(line, format!("unknown key `{key}`")));
        }
    }

    let (dim, _) = dim.ok_or_else(|| fail(0, "missing `dim`".into()))?;
    check_dim(dim).map_err(|e| fail(0, e.to_string()))?;
    let (kind, _) = kind.ok_or_else(|| fail(0, "missing `kind`".into()))?;

    let needs_a = kind != "general";
    let needs_b = kind == "randers" || kind == "kropina";
    if kind == "general" {
        if let Some((_, _, _, line)) = a_entries.first() {
            return Err(fail(*line, "kind = general does not take `a[i][j]`".into()));
        }
        if let Some((_, _, line)) = b_entries.first() {
            return Err(fail(*line, "kind = general does not take `b[i]`".into()));
        }
    } else if f_expr.is_some() {
        let line = f_expr.as_ref().unwrap().1;
        return Err(fail(line, format!("kind = {kind} does not take `F`")));
    }
    if !needs_b {
        if let Some((_, _, line)) = b_entries.first() {
            return Err(fail(*line, format!("kind = {kind} does not take `b[i]`")));
        }
    }

    let a_spec = if needs_a {
        let mut grid: Vec<Option<(Expr, usize)>> = vec![None; dim * dim];
        for (i, j, e, line) in a_entries {
            if i == 0 || j == 0 || i > dim || j > dim {
                return Err(fail(
                    line,
                    format!("a[{i}][{j}] out of range for dim = {dim} (indices are 1-based)"),
                ));
            }
            let (lo, hi) = (i.min(j) - 1, i.max(j) - 1);
            if grid[lo * dim + hi].is_some() {
                return Err(fail(line, format!("duplicate entry a[{i}][{j}]")));
            }
            grid[lo * dim + hi] = Some((e, line));
        }
        let mut entries = vec![Expr::lit(0.0); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let (e, _) = grid[i * dim + j].clone().ok_or_else(|| {
                    fail(0, format!("missing entry a[{}][{}]", i + 1, j + 1))
                })?;
                entries[i * dim + j] = e.clone();
                entries[j * dim + i] = e;
            }
        }
        Some(RiemannianSpec::new(dim, entries).map_err(|e| fail(0, e.to_string()))?)
    } else {
        None
    };

    let b_spec = if needs_b {
        let mut slots: Vec<Option<Expr>> = vec![None; dim];
        for (i, e, line) in b_entries {
            if i == 0 || i > dim {
                return Err(fail(
                    line,
                    format!("b[{i}] out of range for dim = {dim} (indices are 1-based)"),
                ));
            }
            if slots[i - 1].is_some() {
                return Err(fail(line, format!("duplicate entry b[{i}]")));
            }
            slots[i - 1] = Some(e);
        }
        let entries = slots
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| fail(0, format!("missing entry b[{}]", i + 1))))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Some(OneFormSpec::new(dim, entries).map_err(|e| fail(0, e.to_string()))?)
    } else {
        None
    };

    let spec = match kind.as_str() {
        "general" => {
            let (f, _) = f_expr.ok_or_else(|| fail(0, "kind = general requires `F`".into()))?;
            MetricSpec::GeneralF { dim, f }
        }
        "riemannian" => MetricSpec::Riemannian(a_spec.expect("required above")),
        "randers" => MetricSpec::Randers {
            a: a_spec.expect("required above"),
            b: b_spec.expect("required above"),
        },
        "kropina" => MetricSpec::Kropina {
            a: a_spec.expect("required above"),
            b: b_spec.expect("required above"),
        },
        _ => unreachable!(),
    };
    Metric::new(name, spec)
}

fn parse_matrix_key(key: &str) -> Option<std::result::Result<(usize, usize), String>> {
    let rest = key.strip_prefix("a[")?;
    let some = |r: std::result::Result<(usize, usize), String>| Some(r);
    let Some((i_str, rest)) = rest.split_once("][") else {
        return some(Err(format!("malformed matrix key `{key}`")));
    };
    let Some(j_str) = rest.strip_suffix(']') else {
        return some(Err(format!("malformed matrix key `{key}`")));
    };
    match (i_str.trim().parse(), j_str.trim().parse()) {
        (Ok(i), Ok(j)) => some(Ok((i, j))),
        _ => some(Err(format!("malformed matrix key `{key}`"))),
    }
}

fn parse_form_key(key: &str) -> Option<std::result::Result<usize, String>> {
    let rest = key.strip_prefix("b[")?;
    let Some(i_str) = rest.strip_suffix(']') else {
        return Some(Err(format!("malformed form key `{key}`")));
    };
    match i_str.trim().parse() {
        Ok(i) => Some(Ok(i)),
        _ => Some(Err(format!("malformed form key `{key}`"))),
    }
}

// ---------------------------------------------------------------------------
// Builtin catalog
// ---------------------------------------------------------------------------

/// A catalog row: builtin name plus a one-line description.
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: &'static str,
    pub dim: usize,
    pub summary: &'static str,
}

impl fmt::Display for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:24} {:10} n={}  {}",
            self.name, self.kind, self.dim, self.summary
        )
    }
}

pub const CATALOG: &[CatalogEntry] = &[
    CatalogEntry {
        name: "euclidean2",
        kind: "riemannian",
        dim: 2,
        summary: "flat Euclidean plane",
    },
    CatalogEntry {
        name: "euclidean3",
        kind: "riemannian",
        dim: 3,
        summary: "flat Euclidean 3-space",
    },
    CatalogEntry {
        name: "klein2",
        kind: "riemannian",
        dim: 2,
        summary: "Klein metric on the unit disc (constant curvature −1)",
    },
    CatalogEntry {
        name: "round3",
        kind: "riemannian",
        dim: 3,
        summary: "round 3-sphere in gnomonic coordinates",
    },
    CatalogEntry {
        name: "funk2",
        kind: "randers",
        dim: 2,
        summary: "Funk metric on the unit disc",
    },
    CatalogEntry {
        name: "funk3",
        kind: "randers",
        dim: 3,
        summary: "Funk metric on the unit ball",
    },
    CatalogEntry {
        name: "randers-const2",
        kind: "randers",
        dim: 2,
        summary: "flat α with constant b = (1/2, 0)",
    },
    CatalogEntry {
        name: "randers-closed2",
        kind: "randers",
        dim: 2,
        summary: "flat α with closed (gradient) 1-form",
    },
    CatalogEntry {
        name: "randers-curved-closed2",
        kind: "randers",
        dim: 2,
        summary: "conformally flat α with closed 1-form",
    },
    CatalogEntry {
        name: "randers-rot2",
        kind: "randers",
        dim: 2,
        summary: "flat α with rotational (non-closed) 1-form",
    },
    CatalogEntry {
        name: "kropina-const",
        kind: "kropina",
        dim: 2,
        summary: "flat α with constant b = (1, 0)",
    },
    CatalogEntry {
        name: "kropina-const3",
        kind: "kropina",
        dim: 3,
        summary: "flat α with constant b = (1, 0, 0)",
    },
    CatalogEntry {
        name: "kropina-conformal2",
        kind: "kropina",
        dim: 2,
        summary: "flat α with a conformal (non-constant) 1-form",
    },
    CatalogEntry {
        name: "csranders2",
        kind: "randers",
        dim: 2,
        summary: "isotropic-S Randers family on a disc, a = (0.1, 0)",
    },
    CatalogEntry {
        name: "csranders3",
        kind: "randers",
        dim: 3,
        summary: "isotropic-S Randers family on a ball, a = (0.1, 0, 0)",
    },
    CatalogEntry {
        name: "baoshen3",
        kind: "randers",
        dim: 3,
        summary: "Randers deformation of the round 3-sphere (rho = 2)",
    },
    CatalogEntry {
        name: "quartic2",
        kind: "general",
        dim: 2,
        summary: "quartic-root metric on a 1+1 product, c = 1/2",
    },
    CatalogEntry {
        name: "quartic3",
        kind: "general",
        dim: 3,
        summary: "quartic-root metric on a 2+1 product, c = 1/2",
    },
    CatalogEntry {
        name: "general-funk2",
        kind: "general",
        dim: 2,
        summary: "Funk metric entered as a raw F(x, y) expression",
    },
];

/// Construct a builtin metric by catalog name.
pub fn builtin(name: &str) -> Result<Metric> {
    let spec = match name {
        "euclidean2" => MetricSpec::Euclidean { dim: 2 },
        "euclidean3" => MetricSpec::Euclidean { dim: 3 },
        "klein2" => MetricSpec::Riemannian(klein_metric(2)),
        "round3" => MetricSpec::Riemannian(round_sphere_metric(3)),
        "funk2" => MetricSpec::Funk { dim: 2 },
        "funk3" => MetricSpec::Funk { dim: 3 },
        "randers-const2" => MetricSpec::Randers {
            a: RiemannianSpec::euclidean(2),
            b: OneFormSpec {
                dim: 2,
                entries: vec![Expr::lit(0.5), Expr::lit(0.0)],
            },
        },
        "randers-closed2" => MetricSpec::Randers {
            a: RiemannianSpec::euclidean(2),
            // b = ∇(0.2 sin x1 + 0.1 x2²)
            b: OneFormSpec {
                dim: 2,
                entries: vec![
                    Expr::lit(0.2) * Expr::Fun(crate::expr::Func::Cos, Box::new(Expr::x(0))),
                    Expr::lit(0.2) * Expr::x(1),
                ],
            },
        },
        "randers-curved-closed2" => {
            // a = e^{2u} δ with u = 0.1 x1 − 0.05 x2², b = ∇(0.1 x1² + 0.1 x1 x2)
            let u = Expr::lit(0.1) * Expr::x(0) - Expr::lit(0.05) * Expr::x(1).sq();
            let conf = Expr::Fun(
                crate::expr::Func::Exp,
                Box::new(Expr::lit(2.0) * u),
            );
            let zero = Expr::lit(0.0);
            MetricSpec::Randers {
                a: RiemannianSpec {
                    dim: 2,
                    entries: vec![conf.clone(), zero.clone(), zero, conf],
                },
                b: OneFormSpec {
                    dim: 2,
                    entries: vec![
                        Expr::lit(0.2) * Expr::x(0) + Expr::lit(0.1) * Expr::x(1),
                        Expr::lit(0.1) * Expr::x(0),
                    ],
                },
            }
        }
        "randers-rot2" => MetricSpec::Randers {
            a: RiemannianSpec::euclidean(2),
            b: OneFormSpec {
                dim: 2,
                entries: vec![
                    Expr::lit(0.4) * Expr::x(1),
                    -(Expr::lit(0.4) * Expr::x(0)),
                ],
            },
        },
        "kropina-const" => MetricSpec::Kropina {
            a: RiemannianSpec::euclidean(2),
            b: OneFormSpec {
                dim: 2,
                entries: vec![Expr::lit(1.0), Expr::lit(0.0)],
            },
        },
        "kropina-const3" => MetricSpec::Kropina {
            a: RiemannianSpec::euclidean(3),
            b: OneFormSpec {
                dim: 3,
                entries: vec![Expr::lit(1.0), Expr::lit(0.0), Expr::lit(0.0)],
            },
        },
        "kropina-conformal2" => MetricSpec::Kropina {
            a: RiemannianSpec::euclidean(2),
            // b = (1 + x1 + 0.3 x2, x2 − 0.3 x1): r_ij = δ_ij, s_12 = 0.3.
            b: OneFormSpec {
                dim: 2,
                entries: vec![
                    Expr::lit(1.0) + Expr::x(0) + Expr::lit(0.3) * Expr::x(1),
                    Expr::x(1) - Expr::lit(0.3) * Expr::x(0),
                ],
            },
        },
        "csranders2" => MetricSpec::CsRanders { a: vec![0.1, 0.0] },
        "csranders3" => MetricSpec::CsRanders {
            a: vec![0.1, 0.0, 0.0],
        },
        "baoshen3" => MetricSpec::BaoShen {
            rho: 2.0,
            plus: true,
        },
        "quartic2" => MetricSpec::QuarticRoot {
            n1: 1,
            n2: 1,
            c: 0.5,
        },
        "quartic3" => MetricSpec::QuarticRoot {
            n1: 2,
            n2: 1,
            c: 0.5,
        },
        "general-funk2" => MetricSpec::GeneralF {
            dim: 2,
            f: expr::parse(
                "(sqrt((1 - x1^2 - x2^2)*(y1^2 + y2^2) + (x1*y1 + x2*y2)^2) \
                 + (x1*y1 + x2*y2)) / (1 - x1^2 - x2^2)",
            )?,
        },
        other => {
            return Err(Error::InvalidParameter {
                message: format!(
                    "unknown builtin metric `{other}` (see `finsler catalog` for the list)"
                ),
            })
        }
    };
    Metric::new(name, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn states(dim: usize, count: usize, scale: f64) -> Vec<(Vec<f64>, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        (0..count)
            .map(|_| {
                let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-scale..scale)).collect();
                let y: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (x, y)
            })
            .collect()
    }

    #[test]
    fn catalog_metrics_are_positively_homogeneous() {
        for entry in CATALOG {
            let m = builtin(entry.name).unwrap();
            let mut checked = 0;
            for (x, y) in states(m.dim(), 50, 0.4) {
                if m.validate_sample(&x, &y).is_err() {
                    continue;
                }
                let f1 = m.eval_f(&x, &y).unwrap();
                let y2: Vec<f64> = y.iter().map(|v| 2.0 * v).collect();
                let f2 = m.eval_f(&x, &y2).unwrap();
                assert_relative_eq!(f2, 2.0 * f1, max_relative = 1e-12);
                checked += 1;
            }
            assert!(checked > 10, "{}: too few valid samples", entry.name);
        }
    }

    #[test]
    fn funk_metric_is_positive_on_the_ball() {
        let m = builtin("funk2").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x: Vec<f64> = (0..2).map(|_| rng.gen_range(-0.6..0.6)).collect();
            let y: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if y.iter().all(|&v| v.abs() < 1e-3) {
                continue;
            }
            let f = m.eval_f(&x, &y).unwrap();
            assert!(f > 0.0, "F = {f} at x={x:?}, y={y:?}");
        }
    }

    #[test]
    fn funk_reduces_to_euclidean_norm_at_the_origin() {
        let m = builtin("funk2").unwrap();
        let f = m.eval_f(&[0.0, 0.0], &[0.3, 0.4]).unwrap();
        assert_relative_eq!(f, 0.5, epsilon = 1e-14);
    }

    #[test]
    fn general_funk_string_matches_structured_funk() {
        let structured = builtin("funk2").unwrap();
        let general = builtin("general-funk2").unwrap();
        for (x, y) in states(2, 40, 0.5) {
            if structured.validate_sample(&x, &y).is_err() {
                continue;
            }
            let a = structured.eval_f(&x, &y).unwrap();
            let b = general.eval_f(&x, &y).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn quartic_root_value() {
        let m = builtin("quartic2").unwrap();
        // (1 + 2c + 1)^{1/4} = 3^{1/4} at y = (1,1) with c = 1/2.
        let f = m.eval_f(&[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_relative_eq!(f, 3.0f64.powf(0.25), epsilon = 1e-14);
        assert!(matches!(
            Metric::new(
                "bad",
                MetricSpec::QuarticRoot {
                    n1: 1,
                    n2: 1,
                    c: 3.5
                }
            ),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn cs_randers_is_euclidean_at_the_origin() {
        let m = builtin("csranders2").unwrap();
        let f = m.eval_f(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert_relative_eq!(f, 5.0, epsilon = 1e-13);
    }

    #[test]
    fn bao_shen_one_form_has_constant_length() {
        let m = builtin("baoshen3").unwrap();
        let (a, b) = match m.lowered() {
            Lowered::Randers { a, b } => (a, b),
            other => panic!("expected Randers lowering, got {other:?}"),
        };
        for (x, _) in states(3, 20, 0.7) {
            let b2 = b_norm2_at(a, b, &x).unwrap();
            // ‖β‖²_α = (rho − 1)/rho = 1/2 for rho = 2, everywhere.
            assert_relative_eq!(b2, 0.5, epsilon = 1e-12);
            let av = a.eval(&x).unwrap();
            let r2: f64 = x.iter().map(|v| v * v).sum();
            let expected_det = 2.0 / (1.0 + r2).powi(4);
            assert_relative_eq!(linalg::det(3, &av), expected_det, max_relative = 1e-12);
        }
    }

    #[test]
    fn metric_file_round_trip() {
        let src = "
            # flat Randers example
            dim = 2
            kind = randers
            a[1][1] = 1
            a[1][2] = 0
            a[2][2] = 1
            b[1] = 0.5
            b[2] = 0
        ";
        let m = parse_metric_str(src, "example").unwrap();
        assert_eq!(m.kind(), "randers");
        assert_eq!(m.dim(), 2);
        let f = m.eval_f(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_relative_eq!(f, 1.5, epsilon = 1e-14);
    }

    #[test]
    fn metric_file_errors_carry_line_numbers() {
        let bad_key = "dim = 2\nkind = riemannian\nc[1] = 1\n";
        match parse_metric_str(bad_key, "t") {
            Err(Error::MetricFile { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("unknown key"), "{message}");
            }
            other => panic!("expected MetricFile error, got {other:?}"),
        }

        let missing = "dim = 2\nkind = riemannian\na[1][1] = 1\na[2][2] = 1\n";
        assert!(matches!(
            parse_metric_str(missing, "t"),
            Err(Error::MetricFile { .. })
        ));

        let forbidden = "dim = 2\nkind = riemannian\na[1][1]=1\na[1][2]=0\na[2][2]=1\nb[1]=0\nb[2]=0\n";
        match parse_metric_str(forbidden, "t") {
            Err(Error::MetricFile { line, .. }) => assert_eq!(line, 6),
            other => panic!("expected MetricFile error, got {other:?}"),
        }

        let dup = "dim = 2\nkind = riemannian\na[1][2] = 1\na[2][1] = 1\na[1][1]=1\na[2][2]=1\n";
        match parse_metric_str(dup, "t") {
            Err(Error::MetricFile { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("duplicate"), "{message}");
            }
            other => panic!("expected MetricFile error, got {other:?}"),
        }
    }

    #[test]
    fn randers_norm_condition_rejected_at_construction() {
        let src = "dim = 2\nkind = randers\na[1][1]=1\na[1][2]=0\na[2][2]=1\nb[1]=1.1\nb[2]=0\n";
        match parse_metric_str(src, "t") {
            Err(Error::InvalidParameter { message }) => {
                assert!(message.contains("≥ 1"), "{message}");
            }
            other => panic!("expected InvalidParameter, got {other:?}"),
        }
    }

    #[test]
    fn kropina_cone_membership() {
        let m = builtin("kropina-const").unwrap();
        assert!(m.validate_sample(&[0.0, 0.0], &[1.0, 0.2]).is_ok());
        match m.validate_sample(&[0.0, 0.0], &[-1.0, 0.0]) {
            Err(Error::Domain { what }) => assert!(what.contains("cone"), "{what}"),
            other => panic!("expected Domain error, got {other:?}"),
        }
    }

    #[test]
    fn sample_validation_catches_degenerate_input() {
        let m = builtin("euclidean2").unwrap();
        assert!(matches!(
            m.validate_sample(&[0.0, 0.0], &[0.0, 0.0]),
            Err(Error::Domain { .. })
        ));
        assert!(matches!(
            m.validate_sample(&[0.0], &[1.0, 0.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        let funk = builtin("funk2").unwrap();
        assert!(matches!(
            funk.validate_sample(&[0.8, 0.8], &[1.0, 0.0]),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn jet_evaluation_agrees_with_values() {
        use crate::jet;
        let m = builtin("funk2").unwrap();
        let (x, y) = (vec![0.2, -0.1], vec![0.7, 0.4]);
        let sp = jet::space(4);
        let (xj, yj) = expr::lift_state(&sp, &x, &y);
        let fj = m.eval_f(&xj, &yj).unwrap();
        assert_relative_eq!(fj.value(), m.eval_f(&x, &y).unwrap(), epsilon = 1e-14);
        // d/dy1 F via jets matches a finite difference.
        let fd = crate::fd::finite_difference_audit(
            &|s: &[f64]| m.eval_f(&s[..2], &s[2..]),
            &[x[0], x[1], y[0], y[1]],
            &[0, 0, 1, 0],
        )
        .unwrap();
        assert_relative_eq!(fj.d1(2), fd, max_relative = 1e-8);
    }
}
