//! Independent finite-difference audit of jet-carried derivatives.
//!
//! Central differences with one Richardson extrapolation level, step
//! h = ε^(1/3)·max(1, |coordinate|). Deliberately shares no code with the
//! jet engine so the two sides of the audit cannot fail together.

use crate::error::{Error, Result};

/// First or second partial derivative of `f` at `point`, the multi-index
/// `idx` selecting which one (total order 1 or 2).
pub fn finite_difference_audit<F>(f: F, point: &[f64], idx: &[u8]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    if idx.len() > point.len() {
        return Err(Error::DimensionMismatch { expected: point.len(), found: idx.len() });
    }
    let order: u8 = idx.iter().sum();
    let vars: Vec<usize> =
        idx.iter().enumerate().filter(|(_, &e)| e > 0).map(|(v, _)| v).collect();

    // ε^(1/3) balances truncation and roundoff for first differences; second
    // differences divide by h², so they need the larger ε^(1/4) step to stay
    // above the noise floor once Richardson halves it.
    let step = |v: usize, e: f64| e * point[v].abs().max(1.0);
    let e1 = f64::EPSILON.cbrt();
    let e2 = f64::EPSILON.powf(0.25);

    match (order, vars.as_slice()) {
        (1, [v]) => richardson(|h| central1(&f, point, *v, h), step(*v, e1)),
        (2, [v]) if idx[*v] == 2 => richardson(|h| central2(&f, point, *v, h), step(*v, e2)),
        (2, [v, w]) => {
            let h = step(*v, e2).min(step(*w, e2));
            richardson(|h| mixed2(&f, point, *v, *w, h), h)
        }
        _ => Err(Error::invalid("finite differences support derivative order 1 or 2 only")),
    }
}

fn richardson<G>(d: G, h: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    // Central differences carry O(h²) error: one level of extrapolation.
    let coarse = d(h)?;
    let fine = d(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

fn at<F>(f: &F, point: &[f64], moves: &[(usize, f64)]) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut p = point.to_vec();
    for &(v, dv) in moves {
        p[v] += dv;
    }
    f(&p)
}

fn central1<F>(f: &F, point: &[f64], v: usize, h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    Ok((at(f, point, &[(v, h)])? - at(f, point, &[(v, -h)])?) / (2.0 * h))
}

fn central2<F>(f: &F, point: &[f64], v: usize, h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    Ok((at(f, point, &[(v, h)])? - 2.0 * f(point)? + at(f, point, &[(v, -h)])?) / (h * h))
}

fn mixed2<F>(f: &F, point: &[f64], v: usize, w: usize, h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let pp = at(f, point, &[(v, h), (w, h)])?;
    let pm = at(f, point, &[(v, h), (w, -h)])?;
    let mp = at(f, point, &[(v, -h), (w, h)])?;
    let mm = at(f, point, &[(v, -h), (w, -h)])?;
    Ok((pp - pm - mp + mm) / (4.0 * h * h))
}
