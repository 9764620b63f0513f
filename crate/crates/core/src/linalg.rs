//! Dense linear algebra for the small matrices that arise in metric work.
//!
//! Everything here is specialised to the sizes the library actually meets:
//! plain `f64` matrices up to 8×8 (Gauss-Jordan / LU are fine at that size)
//! and jet-valued matrices up to 4×4, where cofactor expansion keeps the
//! operation count small and avoids pivoting on truncated series.
//!
//! Matrices are row-major slices of length `n * n`.

use crate::error::{Error, Result};
use crate::jet::MultiJet;

/// Invert a dense `n × n` matrix by Gauss-Jordan elimination with partial
/// pivoting.
pub(crate) fn invert(n: usize, m: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(m.len(), n * n);
    let mut a = m.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        let p = a[pivot * n + col];
        if p.abs() < 1e-300 {
            return Err(Error::Singular {
                what: "matrix inverse pivot",
                value: p,
            });
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
                inv.swap(col * n + k, pivot * n + k);
            }
        }
        let inv_p = 1.0 / a[col * n + col];
        for k in 0..n {
            a[col * n + k] *= inv_p;
            inv[col * n + k] *= inv_p;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = a[row * n + col];
            if f != 0.0 {
                for k in 0..n {
                    a[row * n + k] -= f * a[col * n + k];
                    inv[row * n + k] -= f * inv[col * n + k];
                }
            }
        }
    }
    Ok(inv)
}

/// Determinant via LU decomposition with partial pivoting.
pub(crate) fn det(n: usize, m: &[f64]) -> f64 {
    assert_eq!(m.len(), n * n);
    let mut a = m.to_vec();
    let mut d = 1.0;
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            d = -d;
        }
        let p = a[col * n + col];
        if p == 0.0 {
            return 0.0;
        }
        d *= p;
        for row in col + 1..n {
            let f = a[row * n + col] / p;
            if f != 0.0 {
                for k in col..n {
                    a[row * n + k] -= f * a[col * n + k];
                }
            }
        }
    }
    d
}

/// Smallest eigenvalue of a symmetric matrix, closed-form for `n ≤ 3`.
///
/// For `n ≥ 4` callers should go through [`check_positive_definite`], which
/// falls back to a Cholesky factorisation.
pub(crate) fn min_eig_sym(n: usize, m: &[f64]) -> Result<f64> {
    assert_eq!(m.len(), n * n);
    match n {
        1 => Ok(m[0]),
        2 => {
            let (a, b, c) = (m[0], m[1], m[3]);
            let t = 0.5 * (a + c);
            let d = (0.25 * (a - c) * (a - c) + b * b).sqrt();
            Ok(t - d)
        }
        3 => {
            // Trigonometric solution of the characteristic cubic.
            let (a11, a12, a13) = (m[0], m[1], m[2]);
            let (a22, a23, a33) = (m[4], m[5], m[8]);
            let p1 = a12 * a12 + a13 * a13 + a23 * a23;
            if p1 == 0.0 {
                return Ok(a11.min(a22).min(a33));
            }
            let q = (a11 + a22 + a33) / 3.0;
            let p2 = (a11 - q).powi(2) + (a22 - q).powi(2) + (a33 - q).powi(2) + 2.0 * p1;
            let p = (p2 / 6.0).sqrt();
            let b = [
                (a11 - q) / p,
                a12 / p,
                a13 / p,
                a12 / p,
                (a22 - q) / p,
                a23 / p,
                a13 / p,
                a23 / p,
                (a33 - q) / p,
            ];
            let r = (0.5 * det(3, &b)).clamp(-1.0, 1.0);
            let phi = r.acos() / 3.0;
            // cos(phi + 2π/3) is the smallest of the three branch values.
            Ok(q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos())
        }
        _ => Err(Error::UnsupportedDimension {
            dim: n,
            what: "closed-form symmetric eigenvalues",
        }),
    }
}

/// Positive-definiteness gate for a symmetric matrix.
///
/// Uses the closed-form smallest eigenvalue for `n ≤ 3`; for larger `n` a
/// Cholesky factorisation is attempted and the first non-positive pivot is
/// reported in the error.
pub(crate) fn check_positive_definite(n: usize, m: &[f64]) -> Result<()> {
    if n <= 3 {
        let min_eig = min_eig_sym(n, m)?;
        if min_eig <= 0.0 {
            return Err(Error::NotPositiveDefinite { min_eig });
        }
        return Ok(());
    }
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = m[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::NotPositiveDefinite { min_eig: s });
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    Ok(())
}

/// Matrix 1-norm (maximum absolute column sum).
pub(crate) fn one_norm(n: usize, m: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for j in 0..n {
        let mut s = 0.0;
        for i in 0..n {
            s += m[i * n + j].abs();
        }
        best = best.max(s);
    }
    best
}

fn jet_minor(n: usize, m: &[MultiJet], skip_row: usize, skip_col: usize) -> MultiJet {
    let rows: Vec<usize> = (0..n).filter(|&r| r != skip_row).collect();
    let cols: Vec<usize> = (0..n).filter(|&c| c != skip_col).collect();
    jet_det_sub(m, n, &rows, &cols)
}

fn jet_det_sub(m: &[MultiJet], stride: usize, rows: &[usize], cols: &[usize]) -> MultiJet {
    let k = rows.len();
    match k {
        1 => m[rows[0] * stride + cols[0]].clone(),
        2 => {
            let a = &m[rows[0] * stride + cols[0]];
            let b = &m[rows[0] * stride + cols[1]];
            let c = &m[rows[1] * stride + cols[0]];
            let d = &m[rows[1] * stride + cols[1]];
            &a.mul(d) - &b.mul(c)
        }
        _ => {
            let sub_rows: Vec<usize> = rows[1..].to_vec();
            let mut acc: Option<MultiJet> = None;
            for (j, &col) in cols.iter().enumerate() {
                let sub_cols: Vec<usize> =
                    cols.iter().copied().filter(|&c| c != col).collect();
                let term = m[rows[0] * stride + col]
                    .mul(&jet_det_sub(m, stride, &sub_rows, &sub_cols));
                let signed = if j % 2 == 0 { term } else { -&term };
                acc = Some(match acc {
                    None => signed,
                    Some(a) => &a + &signed,
                });
            }
            acc.expect("non-empty cofactor expansion")
        }
    }
}

/// Determinant of an `n × n` matrix of jets by cofactor expansion (`n ≤ 4`).
pub(crate) fn jet_det(n: usize, m: &[MultiJet]) -> Result<MultiJet> {
    assert_eq!(m.len(), n * n);
    if n == 0 || n > 4 {
        return Err(Error::UnsupportedDimension {
            dim: n,
            what: "jet determinant",
        });
    }
    let rows: Vec<usize> = (0..n).collect();
    Ok(jet_det_sub(m, n, &rows, &rows))
}

/// Inverse of an `n × n` matrix of jets via the adjugate formula (`n ≤ 4`).
pub(crate) fn jet_inverse(n: usize, m: &[MultiJet]) -> Result<Vec<MultiJet>> {
    let d = jet_det(n, m)?;
    if d.value().abs() < 1e-300 {
        return Err(Error::Singular {
            what: "jet matrix determinant",
            value: d.value(),
        });
    }
    let d_inv = d.recip()?;
    let mut inv = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            // inv[i][j] = cofactor(j, i) / det
            let minor = if n == 1 {
                MultiJet::constant(d.space(), 1.0)
            } else {
                jet_minor(n, m, j, i)
            };
            let signed = if (i + j) % 2 == 0 { minor } else { -&minor };
            inv.push(signed.mul(&d_inv));
        }
    }
    Ok(inv)
}
