//! Closed-form pipeline for metrics built from Riemannian data `a` and a
//! 1-form `b`.
//!
//! Everything here works off x-space jets of `a` and `b` alone: the
//! Levi-Civita connection of α, the covariant derivative ∇b split into its
//! symmetric part `r` and skew part `s`, and the contractions of those with
//! `b` and with the direction vector. The resulting spray and curvature
//! formulas share no code with the generic jet pipeline in [`crate::geom`],
//! which is the point: the two paths cross-validate each other, and the
//! integration tests hold them to ~1e-6 relative agreement.
//!
//! Index conventions (all tensors row-major, `n = dim`):
//! * `christoffel[(i*n + j)*n + k]` is γⁱⱼₖ.
//! * `nabla_b[i*n + j]` is bᵢ;ⱼ; `r` and `s` are its symmetric and skew
//!   parts.
//! * Raised tensors contract the *first* index: `s_up[k*n + i]` is
//!   sᵏᵢ = aᵏᵗ sₜᵢ.
//! * A trailing `0` in the usual shorthand means contraction with y
//!   (r₀₀ = rᵢⱼ yⁱyʲ, s₀ = sᵢ yⁱ, …); those live in [`DirectionalData`].
//! * Second covariant derivatives keep the same layout with the derivative
//!   index last: `r_cov[(i*n + j)*n + k]` is rᵢⱼ;ₖ.
//!
//! Weighted quantities take the α-volume `√det a` as the reference density,
//! matching `geom::curvature_bundle(…, vol, RiemannianDensity, …)` with the
//! closed-form volume of the family at hand.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom;
use crate::jet::{self, MultiJet};
use crate::linalg;
use crate::metric::{Metric, OneFormSpec, RiemannianSpec};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn quad(m: &[f64], y: &[f64]) -> f64 {
    let n = y.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += m[i * n + j] * y[i] * y[j];
        }
    }
    acc
}

fn frob(m: &[f64]) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Point data of an (α, β) pair: connection, ∇b split, contractions, second
/// covariant derivatives, and the curvature/density pieces the spray and
/// Ricci formulas consume. Everything is evaluated at one base point `x`;
/// direction-dependent contractions come from [`AlphaBetaFrame::directional`].
#[derive(Debug, Clone)]
pub struct AlphaBetaFrame {
    pub dim: usize,
    pub x: Vec<f64>,
    /// aᵢⱼ, its inverse, and det a.
    pub a: Vec<f64>,
    pub a_inv: Vec<f64>,
    pub det_a: f64,
    /// γⁱⱼₖ.
    pub christoffel: Vec<f64>,
    pub b: Vec<f64>,
    /// bⁱ = aⁱᵏbₖ and b² = aⁱʲbᵢbⱼ.
    pub b_up: Vec<f64>,
    pub b2: f64,
    /// bᵢ;ⱼ.
    pub nabla_b: Vec<f64>,
    /// rᵢⱼ = ½(bᵢ;ⱼ + bⱼ;ᵢ), sᵢⱼ = ½(bᵢ;ⱼ − bⱼ;ᵢ).
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    /// rᵏᵢ = aᵏᵗrₜᵢ, sᵏᵢ = aᵏᵗsₜᵢ.
    pub r_up: Vec<f64>,
    pub s_up: Vec<f64>,
    /// rᵢ = bᵏrₖᵢ, sᵢ = bᵏsₖᵢ, and the raised versions rⁱ, sⁱ.
    pub r_form: Vec<f64>,
    pub s_form: Vec<f64>,
    pub r_vec: Vec<f64>,
    pub s_vec: Vec<f64>,
    /// r = rᵢⱼbⁱbʲ and the trace aⁱʲrᵢⱼ.
    pub r_scalar: f64,
    pub r_trace: f64,
    /// eᵢⱼ = rᵢⱼ + sᵢbⱼ + sⱼbᵢ.
    pub e: Vec<f64>,
    /// tᵢⱼ = sᵏᵢsₖⱼ, its trace tᵐₘ, tᵢ = sᵏsₖᵢ, and sᵐsₘ.
    pub t: Vec<f64>,
    pub t_trace: f64,
    pub t_form: Vec<f64>,
    pub s2: f64,
    /// qᵢⱼ = rᵏᵢsₖⱼ and qⱼ = bⁱqᵢⱼ.
    pub q: Vec<f64>,
    pub q_form: Vec<f64>,
    /// sᵐrᵢₘ.
    pub sr_form: Vec<f64>,
    /// rᵢⱼ;ₖ and sᵢⱼ;ₖ.
    pub r_cov: Vec<f64>,
    pub s_cov: Vec<f64>,
    /// sᵢ;ⱼ and rᵢ;ⱼ.
    pub s_form_cov: Vec<f64>,
    pub r_form_cov: Vec<f64>,
    /// sᵐⱼ;ₘ (per j) and sᵐ;ₘ.
    pub div_s: Vec<f64>,
    pub div_s_scalar: f64,
    /// Ricci tensor of α.
    pub ric_bar: Vec<f64>,
    /// ρ = ln√(1 − b²) and its gradient; present only when b² < 1.
    pub rho: Option<f64>,
    pub rho_grad: Option<Vec<f64>>,
    /// Gradient and Hessian of b².
    pub b2_grad: Vec<f64>,
    pub b2_hess: Vec<f64>,
    /// σ = (1/n)aⁱʲrᵢⱼ, its gradient, and the relative deviation of rᵢⱼ from
    /// σ·aᵢⱼ (zero exactly when b is conformal at x).
    pub sigma_conf: f64,
    pub sigma_grad: Vec<f64>,
    pub conformality: f64,
    /// θᵢ = −(n/2)(b²)ᵢ/b² and its Jacobian ∂ⱼθᵢ (both zero when b² = 0):
    /// the α-referenced weight 1-form of the Kropina volume ratio.
    pub theta_form: Vec<f64>,
    pub theta_grad: Vec<f64>,
}

/// Direction contractions of frame tensors at a fixed y (trailing-0
/// shorthand).
#[derive(Debug, Clone)]
pub struct DirectionalData {
    pub alpha2: f64,
    pub alpha: f64,
    pub beta: f64,
    pub r00: f64,
    pub s0: f64,
    pub r0: f64,
    /// sⁱ₀ and rⁱ₀.
    pub s_up0: Vec<f64>,
    pub r_up0: Vec<f64>,
    pub q00: f64,
    pub q0: f64,
    pub t00: f64,
    pub t0: f64,
    pub e00: f64,
    /// s₀;₀ = sᵢ;ⱼyⁱyʲ and r₀;₀.
    pub s0_cov0: f64,
    pub r0_cov0: f64,
    /// r₀₀;₀ = rᵢⱼ;ₖyⁱyʲyᵏ.
    pub r00_cov0: f64,
    /// bᵐs₀;ₘ and bᵐr₀₀;ₘ.
    pub s0_covb: f64,
    pub r00_covb: f64,
    /// sᵐ₀;ₘ.
    pub div_s0: f64,
    /// sᵐr₀ₘ.
    pub sr0: f64,
    /// R̄ᵢⱼyⁱyʲ.
    pub ric_bar0: f64,
}

/// Christoffel symbols γⁱⱼₖ of the Riemannian data at x, row-major n³.
pub fn christoffel(a: &RiemannianSpec, x: &[f64]) -> Result<Vec<f64>> {
    let n = a.dim;
    let space = jet::space(n);
    let xj = jet::lift_point(&space, x);
    let aj = a.eval::<MultiJet>(&xj)?;
    let a_inv_j = linalg::jet_inverse(n, &aj)?;
    Ok(christoffel_jets(n, &aj, &a_inv_j)
        .iter()
        .map(MultiJet::value)
        .collect())
}

fn christoffel_jets(n: usize, aj: &[MultiJet], a_inv_j: &[MultiJet]) -> Vec<MultiJet> {
    let space = aj[0].space().clone();
    let mut gamma = Vec::with_capacity(n * n * n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = MultiJet::constant(&space, 0.0);
                for l in 0..n {
                    let sym = &(&aj[l * n + j].deriv_jet(k) + &aj[l * n + k].deriv_jet(j))
                        - &aj[j * n + k].deriv_jet(l);
                    acc = &acc + &a_inv_j[i * n + l].mul(&sym);
                }
                gamma.push(acc.scale(0.5));
            }
        }
    }
    gamma
}

pub fn build_frame(a: &RiemannianSpec, b: &OneFormSpec, x: &[f64]) -> Result<AlphaBetaFrame> {
    let n = a.dim;
    if b.dim != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.dim });
    }
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: x.len() });
    }
    let space = jet::space(n);
    let xj = jet::lift_point(&space, x);
    let aj = a.eval::<MultiJet>(&xj)?;
    let a_vals: Vec<f64> = aj.iter().map(MultiJet::value).collect();
    linalg::check_positive_definite(n, &a_vals)?;
    let a_inv_j = linalg::jet_inverse(n, &aj)?;
    let a_inv_vals: Vec<f64> = a_inv_j.iter().map(MultiJet::value).collect();
    let det_a = linalg::det(n, &a_vals);
    let bj = b.eval::<MultiJet>(&xj)?;

    let gamma_j = christoffel_jets(n, &aj, &a_inv_j);
    let gamma: Vec<f64> = gamma_j.iter().map(MultiJet::value).collect();

    // bᵢ;ⱼ = ∂ⱼbᵢ − bₖ γᵏᵢⱼ
    let mut nabla_b_j = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = bj[i].deriv_jet(j);
            for k in 0..n {
                acc = &acc - &bj[k].mul(&gamma_j[(k * n + i) * n + j]);
            }
            nabla_b_j.push(acc);
        }
    }
    let mut r_j = Vec::with_capacity(n * n);
    let mut s_j = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            r_j.push((&nabla_b_j[i * n + j] + &nabla_b_j[j * n + i]).scale(0.5));
            s_j.push((&nabla_b_j[i * n + j] - &nabla_b_j[j * n + i]).scale(0.5));
        }
    }
    let nabla_b: Vec<f64> = nabla_b_j.iter().map(MultiJet::value).collect();
    let r: Vec<f64> = r_j.iter().map(MultiJet::value).collect();
    let s: Vec<f64> = s_j.iter().map(MultiJet::value).collect();

    // b², with jets for the gradient/Hessian of the squared norm.
    let mut b_up_j = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = MultiJet::constant(&space, 0.0);
        for k in 0..n {
            acc = &acc + &a_inv_j[i * n + k].mul(&bj[k]);
        }
        b_up_j.push(acc);
    }
    let mut b2_j = MultiJet::constant(&space, 0.0);
    for i in 0..n {
        b2_j = &b2_j + &bj[i].mul(&b_up_j[i]);
    }
    let b_vals: Vec<f64> = bj.iter().map(MultiJet::value).collect();
    let b_up: Vec<f64> = b_up_j.iter().map(MultiJet::value).collect();
    let b2 = b2_j.value();
    let mut b2_grad = vec![0.0; n];
    let mut b2_hess = vec![0.0; n * n];
    for m in 0..n {
        b2_grad[m] = b2_j.d1(m);
        let dm = b2_j.deriv_jet(m);
        for k in 0..n {
            b2_hess[m * n + k] = dm.d1(k);
        }
    }

    // Raised tensors and b-contractions (values only).
    let raise = |t: &[f64]| -> Vec<f64> {
        let mut up = vec![0.0; n * n];
        for k in 0..n {
            for i in 0..n {
                up[k * n + i] = (0..n).map(|t_| a_inv_vals[k * n + t_] * t[t_ * n + i]).sum();
            }
        }
        up
    };
    let r_up = raise(&r);
    let s_up = raise(&s);
    let contract_b = |t: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|k| b_up[k] * t[k * n + i]).sum())
            .collect()
    };
    let r_form = contract_b(&r);
    let s_form = contract_b(&s);
    let lift = |f: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|k| a_inv_vals[i * n + k] * f[k]).sum())
            .collect()
    };
    let r_vec = lift(&r_form);
    let s_vec = lift(&s_form);
    let r_scalar = dot(&b_up, &r_form);
    let r_trace: f64 = (0..n)
        .map(|i| (0..n).map(|j| a_inv_vals[i * n + j] * r[i * n + j]).sum::<f64>())
        .sum();

    let mut e = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            e[i * n + j] = r[i * n + j] + s_form[i] * b_vals[j] + s_form[j] * b_vals[i];
        }
    }
    let mut t = vec![0.0; n * n];
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[i * n + j] = (0..n).map(|k| s_up[k * n + i] * s[k * n + j]).sum();
            q[i * n + j] = (0..n).map(|k| r_up[k * n + i] * s[k * n + j]).sum();
        }
    }
    let t_trace: f64 = (0..n)
        .map(|i| (0..n).map(|j| a_inv_vals[i * n + j] * t[i * n + j]).sum::<f64>())
        .sum();
    let t_form: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|k| s_vec[k] * s[k * n + i]).sum())
        .collect();
    let s2 = dot(&s_vec, &s_form);
    let q_form: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| b_up[i] * q[i * n + j]).sum())
        .collect();
    let sr_form: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|m| s_vec[m] * r[i * n + m]).sum())
        .collect();

    // Second covariant derivatives, from the first-order tensor jets plus
    // connection values.
    let cov3 = |tj: &Vec<MultiJet>, tv: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let mut v = tj[i * n + j].d1(k);
                    for l in 0..n {
                        v -= gamma[(l * n + i) * n + k] * tv[l * n + j];
                        v -= gamma[(l * n + j) * n + k] * tv[i * n + l];
                    }
                    out[(i * n + j) * n + k] = v;
                }
            }
        }
        out
    };
    let r_cov = cov3(&r_j, &r);
    let s_cov = cov3(&s_j, &s);

    // sᵢ and rᵢ as jets (only first derivatives are consumed).
    let form_jets = |tj: &Vec<MultiJet>| -> Vec<MultiJet> {
        (0..n)
            .map(|i| {
                let mut acc = MultiJet::constant(&space, 0.0);
                for k in 0..n {
                    acc = &acc + &b_up_j[k].mul(&tj[k * n + i]);
                }
                acc
            })
            .collect()
    };
    let s_form_j = form_jets(&s_j);
    let r_form_j = form_jets(&r_j);
    let cov1 = |fj: &Vec<MultiJet>, fv: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut v = fj[i].d1(j);
                for l in 0..n {
                    v -= gamma[(l * n + i) * n + j] * fv[l];
                }
                out[i * n + j] = v;
            }
        }
        out
    };
    let s_form_cov = cov1(&s_form_j, &s_form);
    let r_form_cov = cov1(&r_form_j, &r_form);

    let div_s: Vec<f64> = (0..n)
        .map(|j| {
            let mut acc = 0.0;
            for m in 0..n {
                for k in 0..n {
                    acc += a_inv_vals[m * n + k] * s_cov[(k * n + j) * n + m];
                }
            }
            acc
        })
        .collect();
    let div_s_scalar: f64 = {
        let mut acc = 0.0;
        for m in 0..n {
            for k in 0..n {
                acc += a_inv_vals[m * n + k] * s_form_cov[k * n + m];
            }
        }
        acc
    };

    // R̄ⱼₖ = ∂ₘγᵐⱼₖ − ∂ₖγᵐⱼₘ + γᵐₘₗγˡⱼₖ − γᵐₖₗγˡⱼₘ, symmetrized.
    let mut ric_bar = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            let mut v = 0.0;
            for m in 0..n {
                v += gamma_j[(m * n + j) * n + k].d1(m);
                v -= gamma_j[(m * n + j) * n + m].d1(k);
                for l in 0..n {
                    v += gamma[(m * n + m) * n + l] * gamma[(l * n + j) * n + k];
                    v -= gamma[(m * n + k) * n + l] * gamma[(l * n + j) * n + m];
                }
            }
            ric_bar[j * n + k] = v;
        }
    }
    for j in 0..n {
        for k in 0..j {
            let sym = 0.5 * (ric_bar[j * n + k] + ric_bar[k * n + j]);
            ric_bar[j * n + k] = sym;
            ric_bar[k * n + j] = sym;
        }
    }

    let (rho, rho_grad) = if b2 < 1.0 {
        let denom = 1.0 - b2;
        (
            Some(0.5 * f64::ln(denom)),
            Some((0..n).map(|m| -b2_grad[m] / (2.0 * denom)).collect()),
        )
    } else {
        (None, None)
    };

    // σ and its gradient from the jet of (1/n)aⁱʲrᵢⱼ.
    let mut sigma_j = MultiJet::constant(&space, 0.0);
    for i in 0..n {
        for j in 0..n {
            sigma_j = &sigma_j + &a_inv_j[i * n + j].mul(&r_j[i * n + j]);
        }
    }
    sigma_j = sigma_j.scale(1.0 / n as f64);
    let sigma_conf = sigma_j.value();
    let sigma_grad: Vec<f64> = (0..n).map(|m| sigma_j.d1(m)).collect();
    let mut dev = 0.0f64;
    let mut mag = 0.0f64;
    for i in 0..n * n {
        dev = dev.max((r[i] - sigma_conf * a_vals[i]).abs());
        mag = mag.max(r[i].abs());
    }
    let conformality = dev / (mag + sigma_conf.abs() * frob(&a_vals) + 1e-15);

    let mut theta_form = vec![0.0; n];
    let mut theta_grad = vec![0.0; n * n];
    if b2 > 1e-14 {
        let nf = n as f64;
        for i in 0..n {
            theta_form[i] = -0.5 * nf * b2_grad[i] / b2;
            for j in 0..n {
                theta_grad[i * n + j] = -0.5
                    * nf
                    * (b2_hess[i * n + j] / b2 - b2_grad[i] * b2_grad[j] / (b2 * b2));
            }
        }
    }

    let frame = AlphaBetaFrame {
        dim: n,
        x: x.to_vec(),
        a: a_vals,
        a_inv: a_inv_vals,
        det_a,
        christoffel: gamma,
        b: b_vals,
        b_up,
        b2,
        nabla_b,
        r,
        s,
        r_up,
        s_up,
        r_form,
        s_form,
        r_vec,
        s_vec,
        r_scalar,
        r_trace,
        e,
        t,
        t_trace,
        t_form,
        s2,
        q,
        q_form,
        sr_form,
        r_cov,
        s_cov,
        s_form_cov,
        r_form_cov,
        div_s,
        div_s_scalar,
        ric_bar,
        rho,
        rho_grad,
        b2_grad,
        b2_hess,
        sigma_conf,
        sigma_grad,
        conformality,
        theta_form,
        theta_grad,
    };
    Ok(frame)
}

impl AlphaBetaFrame {
    /// α² = aᵢⱼyⁱyʲ.
    pub fn alpha2(&self, y: &[f64]) -> f64 {
        quad(&self.a, y)
    }

    pub fn beta(&self, y: &[f64]) -> f64 {
        dot(&self.b, y)
    }

    /// Geodesic coefficients of α: Ḡⁱ = ½γⁱⱼₖyʲyᵏ.
    pub fn bar_spray(&self, y: &[f64]) -> Vec<f64> {
        let n = self.dim;
        (0..n)
            .map(|i| 0.5 * quad(&self.christoffel[i * n * n..(i + 1) * n * n], y))
            .collect()
    }

    /// R̄ᵢⱼyⁱyʲ, the Ricci quadratic form of α.
    pub fn ric_bar_scalar(&self, y: &[f64]) -> f64 {
        quad(&self.ric_bar, y)
    }

    pub fn directional(&self, y: &[f64]) -> Result<DirectionalData> {
        let n = self.dim;
        if y.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: y.len() });
        }
        let alpha2 = self.alpha2(y);
        if alpha2 <= 0.0 {
            return Err(Error::domain("direction must be nonzero"));
        }
        let contract_y3 = |t: &[f64]| -> f64 {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        acc += t[(i * n + j) * n + k] * y[i] * y[j] * y[k];
                    }
                }
            }
            acc
        };
        let contract_y2b = |t: &[f64]| -> f64 {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    for m in 0..n {
                        acc += t[(i * n + j) * n + m] * y[i] * y[j] * self.b_up[m];
                    }
                }
            }
            acc
        };
        let row_contract = |t: &[f64]| -> Vec<f64> {
            (0..n).map(|i| dot(&t[i * n..(i + 1) * n], y)).collect()
        };
        let s0_covb = {
            let mut acc = 0.0;
            for i in 0..n {
                for m in 0..n {
                    acc += self.s_form_cov[i * n + m] * y[i] * self.b_up[m];
                }
            }
            acc
        };
        Ok(DirectionalData {
            alpha2,
            alpha: alpha2.sqrt(),
            beta: self.beta(y),
            r00: quad(&self.r, y),
            s0: dot(&self.s_form, y),
            r0: dot(&self.r_form, y),
            s_up0: row_contract(&self.s_up),
            r_up0: row_contract(&self.r_up),
            q00: quad(&self.q, y),
            q0: dot(&self.q_form, y),
            t00: quad(&self.t, y),
            t0: dot(&self.t_form, y),
            e00: quad(&self.e, y),
            s0_cov0: quad(&self.s_form_cov, y),
            r0_cov0: quad(&self.r_form_cov, y),
            r00_cov0: contract_y3(&self.r_cov),
            s0_covb,
            r00_covb: contract_y2b(&self.r_cov),
            div_s0: dot(&self.div_s, y),
            sr0: dot(&self.sr_form, y),
            ric_bar0: self.ric_bar_scalar(y),
        })
    }
}

// ---------------------------------------------------------------------------
// Randers: F = α + β, with b² < 1.

fn randers_guard(fr: &AlphaBetaFrame) -> Result<()> {
    if fr.b2 >= 1.0 {
        return Err(Error::domain(format!(
            "randers data needs ‖β‖² < 1, got {:.6}",
            fr.b2
        )));
    }
    Ok(())
}

pub fn randers_spray(fr: &AlphaBetaFrame, y: &[f64]) -> Result<Vec<f64>> {
    randers_guard(fr)?;
    let dd = fr.directional(y)?;
    let f = dd.alpha + dd.beta;
    let coef = (dd.r00 - 2.0 * dd.alpha * dd.s0) / (2.0 * f);
    let mut g = fr.bar_spray(y);
    for i in 0..fr.dim {
        g[i] += dd.alpha * dd.s_up0[i] + coef * y[i];
    }
    Ok(g)
}

/// S-curvature of a Randers metric for its closed-form volume density
/// σ = (1 − b²)^((n+1)/2) √det a.
pub fn randers_s_curvature(fr: &AlphaBetaFrame, y: &[f64]) -> Result<f64> {
    randers_guard(fr)?;
    let dd = fr.directional(y)?;
    let n = fr.dim as f64;
    let f = dd.alpha + dd.beta;
    let rho_grad = fr.rho_grad.as_ref().expect("b² < 1 checked above");
    let rho0 = dot(rho_grad, y);
    Ok((n + 1.0) * (dd.e00 / (2.0 * f) - (dd.s0 + rho0)))
}

/// Weighted S-curvature 𝕊 = (r₀₀ − 2αs₀)/(2F) with the α-volume reference.
pub fn randers_sfrak(fr: &AlphaBetaFrame, y: &[f64]) -> Result<f64> {
    randers_guard(fr)?;
    let dd = fr.directional(y)?;
    let f = dd.alpha + dd.beta;
    Ok((dd.r00 - 2.0 * dd.alpha * dd.s0) / (2.0 * f))
}

/// 𝕊₍|ₖ₎yᵏ along the Randers spray (α-volume reference).
pub fn randers_sfrak_horizontal(fr: &AlphaBetaFrame, y: &[f64]) -> Result<f64> {
    randers_guard(fr)?;
    let dd = fr.directional(y)?;
    let f = dd.alpha + dd.beta;
    let x = dd.r00 - 2.0 * dd.alpha * dd.s0;
    let sc0 = (dd.r00_cov0 - 2.0 * dd.alpha * dd.s0_cov0) / (2.0 * f)
        - dd.r00 / (2.0 * f * f) * x;
    let cross = 2.0 * dd.alpha / f * (dd.q00 - dd.alpha * dd.t0)
        - dd.alpha * dd.s0 / (f * f) * x;
    let damp = x * x / (2.0 * f * f);
    Ok(sc0 - cross - damp)
}

pub fn randers_ricci(fr: &AlphaBetaFrame, y: &[f64]) -> Result<f64> {
    randers_guard(fr)?;
    let dd = fr.directional(y)?;
    let n = fr.dim as f64;
    let f = dd.alpha + dd.beta;
    let x = dd.r00 - 2.0 * dd.alpha * dd.s0;
    let base = dd.ric_bar0 + 2.0 * dd.alpha * dd.div_s0
        + 2.0 * dd.t00
        + dd.alpha2 * fr.t_trace;
    let weighted = 3.0 / (4.0 * f * f) * x * x
        + (4.0 * dd.alpha * (dd.q00 - dd.alpha * dd.t0)
            - (dd.r00_cov0 - 2.0 * dd.alpha * dd.s0_cov0))
            / (2.0 * f);
    Ok(base + (n - 1.0) * weighted)
}

/// Weighted projective Ricci curvature of a Randers metric with the α-volume
/// reference. The weighted terms collapse against the Ricci ones, leaving
/// `Ric̄ + 2α sᵐ₀;ₘ + 2t₀₀ + α²tᵐₘ` (with the positive-semidefinite
/// tᵢⱼ = sᵏᵢsₖⱼ stored in the frame).
pub fn randers_wpric(fr: &AlphaBetaFrame, y: &[f64]) -> Result<f64> {
    randers_guard(fr)?;
    let dd = fr.directional(y)?;
    Ok(dd.ric_bar0 + 2.0 * dd.alpha * dd.div_s0 + 2.0 * dd.t00 + dd.alpha2 * fr.t_trace)
}

// ---------------------------------------------------------------------------
// Kropina: F = α²/β on the cone β > 0, with b² > 0.

fn kropina_guard(fr: &AlphaBetaFrame) -> Result<()> {
    if fr.b2 <= 1e-14 {
        return Err(Error::domain("kropina data needs b ≠ 0"));
    }
    Ok(())
}

fn kropina_f(dd: &DirectionalData) -> Result<f64> {
    if dd.beta <= 0.0 {
        return Err(Error::domain(format!(
            "kropina metric needs β > 0, got {:.6}",
            dd.beta
        )));
    }
    Ok(dd.alpha2 / dd.beta)
}

pub fn kropina_spray(fr: &AlphaBetaFrame, y: &[f64]) -> Result<Vec<f64>> {
    kropina_guard(fr)?;
    let dd = fr.directional(y)?;
    let f = kropina_f(&dd)?;
    let coef = (f * dd.s0 + dd.r00) / (2.0 * fr.b2 * f);
    let mut g = fr.bar_spray(y);
    for i in 0..fr.dim {
        g[i] -= 0.5 * f * dd.s_up0[i];
        g[i] -= coef * (2.0 * y[i] - f * fr.b_up[i]);
    }
    Ok(g)
}

/// S-curvature of a Kropina metric for its closed-form volume density
/// σ = (2/b)ⁿ √det a.
pub fn kropina_s_curvature(fr: &AlphaBetaFrame, y: &[f64]) -> Result<f64> {
    kropina_guard(fr)?;
    let dd = fr.directional(y)?;
    let f = kropina_f(&dd)?;
    let n = fr.dim as f64;
    Ok((n + 1.0) * (f * dd.r0 - dd.r00) / (f * fr.b2))
}

/// θ = θᵢyⁱ, the α-referenced volume-ratio weight of the Kropina density.
pub fn kropina_theta(fr: &AlphaBetaFrame, y: &[f64]) -> f64 {
    dot(&fr.theta_form, y)
}

/// θ₍|ₖ₎yᵏ along the Kropina spray.
pub fn kropina_theta_horizontal(fr: &AlphaBetaFrame, y: &[f64]) -> Result<f64> {
    kropina_guard(fr)?;
    let g = kropina_spray(fr, y)?;
    let n = fr.dim;
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += fr.theta_grad[i * n + k] * y[i] * y[k];
        }
    }
    Ok(acc - 2.0 * dot(&g, &fr.theta_form))
}

/// Weighted S-curvature 𝕊 = (S + θ)/(n + 1) with the α-volume reference.
pub fn kropina_sfrak(fr: &AlphaBetaFrame, y: &[f64]) -> Result<f64> {
    let n = fr.dim as f64;
    Ok((kropina_s_curvature(fr, y)? + kropina_theta(fr, y)) / (n + 1.0))
}

/// S₍|ₖ₎yᵏ along the Kropina spray (unweighted S, closed-form volume).
fn kropina_s_h0(fr: &AlphaBetaFrame, dd: &DirectionalData) -> Result<f64> {
    let f = kropina_f(dd)?;
    let n = fr.dim as f64;
    let b2 = fr.b2;
    let bracket = dd.r0_cov0 - dd.r00_cov0 / f + f * dd.q0 - 2.0 * dd.q00
        + 2.0 / (f * b2) * (f * dd.r0 - dd.r00) * (dd.s0 - dd.r0)
        + 4.0 * dd.r0 * dd.r00 / (f * b2)
        - 4.0 * dd.r00 * dd.r00 / (f * f * b2)
        - (f * dd.s0 + dd.r00) * fr.r_scalar / b2;
    Ok((n + 1.0) / b2 * bracket)
}

/// (n − 1)·𝕊₍|ₖ₎yᵏ along the Kropina spray, α-volume reference.
pub fn kropina_s_horizontal(fr: &AlphaBetaFrame, y: &[f64]) -> Result<f64> {
    kropina_guard(fr)?;
    let dd = fr.directional(y)?;
    let n = fr.dim as f64;
    let s_h = kropina_s_h0(fr, &dd)?;
    let th_h = kropina_theta_horizontal(fr, y)?;
    Ok((n - 1.0) * (s_h + th_h) / (n + 1.0))
}

pub fn kropina_ricci(fr: &AlphaBetaFrame, y: &[f64]) -> Result<f64> {
    kropina_guard(fr)?;
    let dd = fr.directional(y)?;
    kropina_f(&dd)?;
    let n = fr.dim as f64;
    let a2 = dd.alpha2;
    let be = dd.beta;
    let b2 = fr.b2;
    let b4 = b2 * b2;
    let t = -a2 / (b4 * be) * dd.s0 * fr.r_scalar
        - fr.r_scalar / b4 * dd.r00
        + a2 / (b2 * be) * dd.s0_covb
        + dd.r00_covb / b2
        + (n - 2.0) / b2 * dd.s0_cov0
        + (n - 1.0) / (b2 * a2) * be * dd.r00_cov0
        + (a2 / be * dd.s0 + dd.r00) * fr.r_trace / b2
        - a2 / be * dd.div_s0
        - dd.r0_cov0 / b2
        - 2.0 * (2.0 * n - 3.0) / b4 * dd.r0 * dd.s0
        - (n - 2.0) / b4 * dd.s0 * dd.s0
        - 4.0 * (n - 1.0) / (b4 * a2) * be * dd.r00 * dd.r0
        + 2.0 * (n - 1.0) / (b4 * a2) * be * dd.r00 * dd.s0
        + 3.0 * (n - 1.0) / (b4 * a2 * a2) * be * be * dd.r00 * dd.r00
        + 2.0 * n / b2 * dd.q00
        + dd.r0 * dd.r0 / b4
        - a2 / (b2 * be) * dd.q0
        + (n - 1.0) / (b2 * be) * a2 * dd.t0
        - a2 * a2 / (2.0 * b2 * be * be) * fr.s2
        - a2 / (b2 * be) * dd.sr0
        + a2 * a2 / (4.0 * be * be) * fr.t_trace;
    Ok(dd.ric_bar0 + t)
}

/// Weighted projective Ricci curvature of a Kropina metric, α-volume
/// reference: Ric + (n−1)(𝕊² + 𝕊₍|ₖ₎yᵏ).
pub fn kropina_wpric(fr: &AlphaBetaFrame, y: &[f64]) -> Result<f64> {
    let n = fr.dim as f64;
    let ric = kropina_ricci(fr, y)?;
    let sfrak = kropina_sfrak(fr, y)?;
    let sfrak_h = kropina_s_horizontal(fr, y)? / (n - 1.0);
    Ok(ric + (n - 1.0) * (sfrak * sfrak + sfrak_h))
}

// Flatness residuals for conformal Kropina data (rᵢⱼ = σaᵢⱼ). For any common
// λ the three pieces below recompose exactly:
//   WPRic₀ = R4(λ) + (α²/(b²β))·Rv(λ) − (α⁴/(2b²β²))·R5,
// so WPRic₀ ≡ 0 iff some λ(x) makes all three vanish (the λ-dependence
// cancels between R4 and Rv, and a vanishing R4 pins λ uniquely).
impl AlphaBetaFrame {
    /// R4(λ): the α²-scale residual.
    pub fn kropina_flat_residual_ric(&self, y: &[f64], lambda: f64) -> Result<f64> {
        kropina_guard(self)?;
        let dd = self.directional(y)?;
        let n = self.dim as f64;
        let b2 = self.b2;
        let sigma = self.sigma_conf;
        let sigma0 = dot(&self.sigma_grad, y);
        let theta = kropina_theta(self, y);
        let theta_h = kropina_theta_horizontal(self, y)?;
        let sb = dd.s0 + sigma * dd.beta;
        Ok(dd.ric_bar0 - lambda * dd.alpha2 / b2
            + (n - 2.0) / (b2 * b2) * (b2 * dd.s0_cov0 - sb * sb + b2 * dd.beta * sigma0)
            + (n - 1.0) / ((n + 1.0) * (n + 1.0)) * (theta * theta + (n + 1.0) * theta_h))
    }

    /// Rv(λ): the α-scale residual.
    pub fn kropina_flat_residual_vec(&self, y: &[f64], lambda: f64) -> Result<f64> {
        kropina_guard(self)?;
        let dd = self.directional(y)?;
        let n = self.dim as f64;
        let sigma = self.sigma_conf;
        let sigma_b = dot(&self.sigma_grad, &self.b_up);
        Ok((n - 3.0) * sigma * dd.s0 + dd.s0_covb - self.b2 * dd.div_s0
            + (n - 1.0) * dd.t0
            + ((n - 2.0) * sigma * sigma + sigma_b + lambda) * dd.beta)
    }

    /// R5 = sᵐsₘ − ½b²tᵐₘ (direction-independent; identically zero when
    /// n = 2, where tᵢⱼ is a multiple of aᵢⱼ).
    pub fn kropina_flat_residual_trace(&self) -> f64 {
        self.s2 - 0.5 * self.b2 * self.t_trace
    }
}

// ---------------------------------------------------------------------------
// Grid checkers.

/// Sampling plan for the flatness/equivalence checkers.
#[derive(Debug, Clone, Serialize)]
pub struct GridSpec {
    pub base_points: usize,
    pub directions: usize,
    pub seed: u64,
    pub tol: f64,
    /// Base points are drawn uniformly from [−radius, radius]ⁿ.
    pub radius: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { base_points: 8, directions: 16, seed: 0xA17A_BE7A, tol: 1e-7, radius: 0.3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub max_rel: f64,
    pub tol: f64,
    pub pass: bool,
}

impl ConditionCheck {
    fn new(name: &'static str, max_rel: f64, tol: f64) -> Self {
        ConditionCheck { name, max_rel, tol, pass: max_rel <= tol }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatnessReport {
    pub flat: bool,
    pub checks: Vec<ConditionCheck>,
}

enum Family {
    Randers,
    Kropina,
}

fn sample_points(
    a: &RiemannianSpec,
    b: &OneFormSpec,
    grid: &GridSpec,
    rng: &mut ChaCha8Rng,
    family: Family,
) -> Result<Vec<AlphaBetaFrame>> {
    let n = a.dim;
    let mut frames = Vec::with_capacity(grid.base_points);
    let cap = 200 * grid.base_points.max(1);
    for attempt in 0..cap {
        if frames.len() == grid.base_points {
            break;
        }
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-grid.radius..grid.radius)).collect();
        let Ok(fr) = build_frame(a, b, &x) else { continue };
        let ok = match family {
            Family::Randers => fr.b2 < 0.98,
            Family::Kropina => fr.b2 > 1e-8,
        };
        if ok {
            frames.push(fr);
        }
        if attempt + 1 == cap && frames.len() < grid.base_points {
            return Err(Error::SamplerExhausted {
                context: "base points for flatness grid".into(),
                attempts: cap,
            });
        }
    }
    if frames.len() < grid.base_points {
        return Err(Error::SamplerExhausted {
            context: "base points for flatness grid".into(),
            attempts: cap,
        });
    }
    Ok(frames)
}

fn sample_direction(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if y.iter().any(|v| v.abs() > 0.2) {
            return y;
        }
    }
}

/// A direction inside the Kropina cone with a margin: β ≥ 0.1·α·b.
fn kropina_direction(fr: &AlphaBetaFrame, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    for _ in 0..100 {
        let mut y = sample_direction(fr.dim, rng);
        let beta = fr.beta(&y);
        if beta < 0.0 {
            for v in &mut y {
                *v = -*v;
            }
        }
        let alpha = fr.alpha2(&y).sqrt();
        if fr.beta(&y) >= 0.1 * alpha * fr.b2.sqrt() {
            return Ok(y);
        }
    }
    Err(Error::SamplerExhausted { context: "kropina cone directions".into(), attempts: 100 })
}

/// Checks the two conditions that characterize vanishing weighted projective
/// Ricci curvature of a Randers metric (α-volume reference):
/// Ric̄ + tᵐₘα² + 2t₀₀ = 0 and sᵐ₀;ₘ = 0.
pub fn check_randers_wpric_flat(
    a: &RiemannianSpec,
    b: &OneFormSpec,
    grid: &GridSpec,
) -> Result<FlatnessReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let frames = sample_points(a, b, grid, &mut rng, Family::Randers)?;
    let mut max1 = 0.0f64;
    let mut max2 = 0.0f64;
    for fr in &frames {
        let div_mag: f64 = fr.div_s.iter().map(|v| v.abs()).sum();
        for _ in 0..grid.directions {
            let y = sample_direction(fr.dim, &mut rng);
            let dd = fr.directional(&y)?;
            let num1 = dd.ric_bar0 + fr.t_trace * dd.alpha2 + 2.0 * dd.t00;
            let scale1 = dd.alpha2
                + dd.ric_bar0.abs()
                + fr.t_trace.abs() * dd.alpha2
                + 2.0 * dd.t00.abs();
            max1 = max1.max(num1.abs() / scale1);
            let scale2 = dd.alpha * (1.0 + div_mag);
            max2 = max2.max(dd.div_s0.abs() / scale2);
        }
    }
    let checks = vec![
        ConditionCheck::new("ricci-matches-t", max1, grid.tol),
        ConditionCheck::new("divergence-free-s", max2, grid.tol),
    ];
    Ok(FlatnessReport { flat: checks.iter().all(|c| c.pass), checks })
}

#[derive(Debug, Clone, Serialize)]
pub struct ReversibilityReport {
    pub reversible: bool,
    pub div_max_rel: f64,
    pub direct_max_rel: f64,
    /// The divergence criterion and the direct WPRic₀(x, ±y) comparison must
    /// come to the same verdict.
    pub agree: bool,
}

/// Decides whether the Randers weighted projective Ricci curvature is
/// reversible (invariant under y ↦ −y), both through the criterion
/// sᵐ₀;ₘ = 0 and by direct comparison.
pub fn check_reversible_wpric(
    a: &RiemannianSpec,
    b: &OneFormSpec,
    grid: &GridSpec,
) -> Result<ReversibilityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let frames = sample_points(a, b, grid, &mut rng, Family::Randers)?;
    let mut div_max = 0.0f64;
    let mut direct_max = 0.0f64;
    for fr in &frames {
        let div_mag: f64 = fr.div_s.iter().map(|v| v.abs()).sum();
        for _ in 0..grid.directions {
            let y = sample_direction(fr.dim, &mut rng);
            let dd = fr.directional(&y)?;
            div_max = div_max.max(dd.div_s0.abs() / (dd.alpha * (1.0 + div_mag)));
            let my: Vec<f64> = y.iter().map(|v| -v).collect();
            let w_plus = randers_wpric(fr, &y)?;
            let w_minus = randers_wpric(fr, &my)?;
            let scale = dd.alpha2 + w_plus.abs() + w_minus.abs();
            direct_max = direct_max.max((w_plus - w_minus).abs() / scale);
        }
    }
    let by_div = div_max <= grid.tol;
    let by_direct = direct_max <= grid.tol;
    Ok(ReversibilityReport {
        reversible: by_div,
        div_max_rel: div_max,
        direct_max_rel: direct_max,
        agree: by_div == by_direct,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KropinaVerdict {
    Flat,
    NotFlat,
    /// The 1-form is not conformal, so the characterization does not apply.
    NotApplicable,
}

#[derive(Debug, Clone, Serialize)]
pub struct KropinaFlatReport {
    pub verdict: KropinaVerdict,
    /// Worst relative deviation of rᵢⱼ from σ·aᵢⱼ over the base points.
    pub conformality_max: f64,
    /// Fitted λ(x) per base point (empty when not applicable).
    pub lambda: Vec<f64>,
    pub checks: Vec<ConditionCheck>,
}

/// Checks the conditions characterizing vanishing weighted projective Ricci
/// curvature of a Kropina metric with conformal 1-form (α-volume reference).
///
/// λ(x) is fitted per base point by least squares on the α²-scale residual
/// over the direction set; flatness requires all three residuals (α², α, and
/// direction-independent scale) to vanish for that common λ.
pub fn check_kropina_wpric_flat(
    a: &RiemannianSpec,
    b: &OneFormSpec,
    grid: &GridSpec,
) -> Result<KropinaFlatReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let frames = sample_points(a, b, grid, &mut rng, Family::Kropina)?;
    let conformality_max =
        frames.iter().map(|fr| fr.conformality).fold(0.0f64, f64::max);
    if conformality_max > 1e-8 {
        return Ok(KropinaFlatReport {
            verdict: KropinaVerdict::NotApplicable,
            conformality_max,
            lambda: Vec::new(),
            checks: Vec::new(),
        });
    }
    let mut lambda = Vec::with_capacity(frames.len());
    let mut max4 = 0.0f64;
    let mut max5 = 0.0f64;
    let mut maxv = 0.0f64;
    for fr in &frames {
        let dirs: Vec<Vec<f64>> = (0..grid.directions)
            .map(|_| kropina_direction(fr, &mut rng))
            .collect::<Result<_>>()?;
        // Fit λ against R4(0) = R4(λ) + λα²/b².
        let mut num = 0.0;
        let mut den = 0.0;
        for y in &dirs {
            let r40 = fr.kropina_flat_residual_ric(y, 0.0)?;
            let a2 = fr.alpha2(y);
            num += r40 * a2;
            den += a2 * a2;
        }
        let lam = fr.b2 * num / den;
        lambda.push(lam);

        let s_frob = frob(&fr.s);
        let r5 = fr.kropina_flat_residual_trace();
        let scale5 = 1e-15 + fr.s2.abs() + 0.5 * fr.b2 * fr.t_trace.abs() + s_frob * s_frob;
        max5 = max5.max(r5.abs() / scale5);

        for y in &dirs {
            let dd = fr.directional(y)?;
            let r4 = fr.kropina_flat_residual_ric(y, lam)?;
            let theta = kropina_theta(fr, y);
            let scale4 = dd.alpha2 * (1.0 + lam.abs() / fr.b2)
                + dd.ric_bar0.abs()
                + dd.s0_cov0.abs()
                + theta * theta;
            max4 = max4.max(r4.abs() / scale4);
            let rv = fr.kropina_flat_residual_vec(y, lam)?;
            let scalev = dd.alpha * (1.0 + s_frob + fr.sigma_conf.abs())
                + dd.s0_covb.abs()
                + fr.b2 * dd.div_s0.abs()
                + dd.beta.abs() * (1.0 + lam.abs());
            maxv = maxv.max(rv.abs() / scalev);
        }
    }
    let checks = vec![
        ConditionCheck::new("ricci-residual", max4, grid.tol),
        ConditionCheck::new("trace-residual", max5, grid.tol),
        ConditionCheck::new("vector-residual", maxv, grid.tol),
    ];
    let flat = checks.iter().all(|c| c.pass);
    Ok(KropinaFlatReport {
        verdict: if flat { KropinaVerdict::Flat } else { KropinaVerdict::NotFlat },
        conformality_max,
        lambda,
        checks,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct IsotropyReport {
    /// S = (n+1)c(x)F for some function c.
    pub isotropic: bool,
    /// r₀₀ = k(x)α² for some function k.
    pub r00_proportional: bool,
    /// S ≡ 0.
    pub s_vanishes: bool,
    /// bᵢ;ⱼ + bⱼ;ᵢ = λ(x)aᵢⱼ.
    pub conformal: bool,
    /// All four equivalent statements agree.
    pub consistent: bool,
    pub checks: Vec<ConditionCheck>,
}

/// Evaluates the four equivalent characterizations of isotropic S-curvature
/// for a Kropina metric independently, and reports whether they agree.
pub fn check_isotropic_s_equivalences(
    a: &RiemannianSpec,
    b: &OneFormSpec,
    grid: &GridSpec,
) -> Result<IsotropyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let frames = sample_points(a, b, grid, &mut rng, Family::Kropina)?;
    let mut dev_c = 0.0f64;
    let mut dev_k = 0.0f64;
    let mut mag_s = 0.0f64;
    let mut conf = 0.0f64;
    for fr in &frames {
        let n = fr.dim as f64;
        let dirs: Vec<Vec<f64>> = (0..grid.directions)
            .map(|_| kropina_direction(fr, &mut rng))
            .collect::<Result<_>>()?;
        let mut vc = Vec::with_capacity(dirs.len());
        let mut vk = Vec::with_capacity(dirs.len());
        let mut scale_c = 1e-12f64;
        for y in &dirs {
            let dd = fr.directional(y)?;
            let f = kropina_f(&dd)?;
            // S/((n+1)F) = r₀/b² − r₀₀/(F b²), the candidate c(x).
            vc.push((f * dd.r0 - dd.r00) / (f * fr.b2));
            scale_c = scale_c
                .max((dd.r0 / fr.b2).abs())
                .max((dd.r00 / (f * fr.b2)).abs());
            vk.push(dd.r00 / dd.alpha2);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let c_hat = mean(&vc);
        let k_hat = mean(&vk);
        for v in &vc {
            dev_c = dev_c.max((v - c_hat).abs() / scale_c);
            mag_s = mag_s.max(v.abs() / scale_c);
        }
        let scale_k = 1e-12 + frob(&fr.r) / frob(&fr.a).max(1e-12) + k_hat.abs();
        for v in &vk {
            dev_k = dev_k.max((v - k_hat).abs() / scale_k);
        }
        conf = conf.max(fr.conformality);
        let _ = n;
    }
    let checks = vec![
        ConditionCheck::new("isotropic-s", dev_c, grid.tol),
        ConditionCheck::new("r00-proportional", dev_k, grid.tol),
        ConditionCheck::new("s-vanishes", mag_s, grid.tol),
        ConditionCheck::new("conformal-form", conf, grid.tol),
    ];
    let flags = [checks[0].pass, checks[1].pass, checks[2].pass, checks[3].pass];
    Ok(IsotropyReport {
        isotropic: flags[0],
        r00_proportional: flags[1],
        s_vanishes: flags[2],
        conformal: flags[3],
        consistent: flags.iter().all(|&f| f == flags[0]),
        checks,
    })
}

// ---------------------------------------------------------------------------
// Projectively flat charts: Gⁱ = P·yⁱ.

/// Extracts the projective factor P and its base derivative P₀ = P₍ₓʲ₎yʲ
/// from the spray. Errors with [`Error::NotProjectivelyFlat`] when the spray
/// is not proportional to y in this chart.
pub fn projective_factor(m: &Metric, x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = m.dim();
    let (g, jac) = geom::spray_with_x_jacobian(m, x, y)?;
    let c = (0..n)
        .max_by(|&i, &j| y[i].abs().partial_cmp(&y[j].abs()).expect("finite"))
        .expect("dim ≥ 1");
    let ymax = y[c].abs();
    if ymax == 0.0 {
        return Err(Error::domain("direction must be nonzero"));
    }
    let p = g[c] / y[c];
    let gmax = g.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let scale = p.abs().max(gmax / ymax).max(1e-12);
    let mut spread = 0.0f64;
    for i in 0..n {
        if y[i].abs() >= 0.1 * ymax {
            spread = spread.max((g[i] / y[i] - p).abs());
        }
    }
    if spread > 1e-8 * scale {
        return Err(Error::NotProjectivelyFlat { spread: spread / scale });
    }
    let p0 = (0..n).map(|j| jac[c * n + j] / y[c] * y[j]).sum();
    Ok((p, p0))
}

/// Ricci curvature of a projectively flat metric from its projective factor:
/// (n−1)(P² − P₀).
pub fn projectively_flat_ricci(m: &Metric, x: &[f64], y: &[f64]) -> Result<f64> {
    let (p, p0) = projective_factor(m, x, y)?;
    Ok((m.dim() as f64 - 1.0) * (p * p - p0))
}

/// Scalar data of a projectively flat metric with isotropic S-curvature and
/// isotropic weighted projective Ricci curvature, at one state (x, y):
/// P and P₀ from the spray, c and c₀ from S = (n+1)cF, the weight 1-form
/// η = θ/(n+1) and its horizontal derivative η₀, and σ from
/// WPRic₀ = (n−1)σF².
#[derive(Debug, Clone, Serialize)]
pub struct ProjectiveData {
    pub p: f64,
    pub p0: f64,
    pub c: f64,
    pub c0: f64,
    pub sigma_iso: f64,
    pub eta: f64,
    pub eta0: f64,
}

/// Collects [`ProjectiveData`] from a metric at one state, extracting c(x)
/// from the S-curvature and σ from WPRic₀. c₀ is the y-directional base
/// derivative of c, taken by finite differences (c is an x-function for the
/// isotropic metrics this is meant for).
pub fn projective_data_from_metric(
    m: &Metric,
    vol: &crate::volume::VolumeSpec,
    ref_vol: &crate::volume::VolumeSpec,
    x: &[f64],
    y: &[f64],
) -> Result<ProjectiveData> {
    let n = m.dim() as f64;
    let bundle = geom::curvature_bundle(m, vol, ref_vol, x, y)?;
    let (p, p0) = projective_factor(m, x, y)?;
    let c = bundle.s / ((n + 1.0) * bundle.f);
    let c_of = |xp: &[f64]| -> Result<f64> {
        let b = geom::curvature_bundle(m, vol, ref_vol, xp, y)?;
        Ok(b.s / ((n + 1.0) * b.f))
    };
    let mut c0 = 0.0;
    for k in 0..m.dim() {
        if y[k] == 0.0 {
            continue;
        }
        let mut idx = vec![0u8; m.dim()];
        idx[k] = 1;
        c0 += y[k] * crate::fd::finite_difference_audit(&c_of, x, &idx)?;
    }
    let eta = bundle.theta / (n + 1.0);
    let eta0 = ((n + 1.0) * bundle.s_frak_h - bundle.s_h) / (n + 1.0);
    let sigma_iso = bundle.wpric0 / ((n - 1.0) * bundle.f * bundle.f);
    Ok(ProjectiveData { p, p0, c, c0, sigma_iso, eta, eta0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyTag {
    Randers,
    Kropina,
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyTag::Randers => write!(f, "randers"),
            FamilyTag::Kropina => write!(f, "kropina"),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Reconstruction {
    /// The metric value F(x, y) recovered from the scalar data.
    pub f: f64,
    /// Which case branch produced it: the degenerate quadratic (kropina) or
    /// the genuine one (randers).
    pub family: FamilyTag,
    /// |A·F² − L·F + C| at the returned root.
    pub residual: f64,
}

/// Recovers F(x, y) from projectively flat isotropic data by solving
/// A·F² − L·F + C = 0 with A = σ − c², L = 2cη + c₀, and
/// C = P₀ − P² − η² − η₀.
///
/// When A vanishes the equation is linear (kropina branch); otherwise the
/// root (L + √(L² − 4AC))/(2A) is preferred, falling back to the other root
/// when it is not positive.
pub fn reconstruct_metric_from_projective_data(pd: &ProjectiveData) -> Result<Reconstruction> {
    let a = pd.sigma_iso - pd.c * pd.c;
    let l = 2.0 * pd.c * pd.eta + pd.c0;
    let cc = pd.p0 - pd.p * pd.p - pd.eta * pd.eta - pd.eta0;
    let scale_a = pd.sigma_iso.abs().max(pd.c * pd.c).max(1.0);
    let finish = |f: f64, family: FamilyTag| -> Result<Reconstruction> {
        if !f.is_finite() || f <= 0.0 {
            return Err(Error::domain(format!(
                "reconstructed metric value is not positive (got {f:.6e})"
            )));
        }
        Ok(Reconstruction { f, family, residual: (a * f * f - l * f + cc).abs() })
    };
    if a.abs() <= 1e-12 * scale_a {
        let scale_l = (pd.c * pd.eta).abs().max(pd.c0.abs()).max(1.0);
        if l.abs() <= 1e-12 * scale_l {
            return Err(Error::domain(
                "degenerate projective data: both quadratic and linear coefficients vanish",
            ));
        }
        return finish(cc / l, FamilyTag::Kropina);
    }
    let mut disc = l * l - 4.0 * a * cc;
    let disc_scale = l * l + 4.0 * (a * cc).abs();
    if disc < 0.0 && disc.abs() <= 1e-12 * disc_scale {
        disc = 0.0;
    }
    if disc < 0.0 {
        return Err(Error::domain(
            "projective data admits no real metric value (negative discriminant)",
        ));
    }
    let sq = disc.sqrt();
    let plus = (l + sq) / (2.0 * a);
    let minus = (l - sq) / (2.0 * a);
    if plus > 0.0 {
        finish(plus, FamilyTag::Randers)
    } else {
        finish(minus, FamilyTag::Randers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;
    use crate::metric::{builtin, parse_metric_str};
    use crate::volume::VolumeSpec;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn frame_of(m: &Metric, x: &[f64]) -> AlphaBetaFrame {
        let (a, b) = m.alpha_beta().expect("alpha-beta metric");
        let b = b.expect("1-form present");
        build_frame(a, b, x).unwrap()
    }

    fn zero_form(dim: usize) -> OneFormSpec {
        OneFormSpec::new(dim, vec![Expr::lit(0.0); dim]).unwrap()
    }

    /// A Kropina lowering with non-conformal, non-closed 1-form: every
    /// tensor in the frame is exercised.
    fn messy_kropina() -> Metric {
        parse_metric_str(
            "dim = 2\nkind = kropina\n\
             a[1][1] = 1 + 0.2*x2^2\na[1][2] = 0.1*x1\na[2][2] = 1 + 0.1*x1^2\n\
             b[1] = 1 + 0.3*x1 + 0.25*x2^2\nb[2] = 0.2*x2 - 0.15*x1*x2\n",
            "messy-kropina",
        )
        .unwrap()
    }

    fn messy_randers() -> Metric {
        parse_metric_str(
            "dim = 2\nkind = randers\n\
             a[1][1] = 1 + 0.2*x2^2\na[1][2] = 0.1*x1\na[2][2] = 1 + 0.1*x1^2\n\
             b[1] = 0.2 + 0.1*x1 + 0.15*x2^2\nb[2] = 0.1*x2 - 0.2*x1\n",
            "messy-randers",
        )
        .unwrap()
    }

    #[test]
    fn christoffel_exponential_diagonal() {
        let a = RiemannianSpec::new(
            2,
            vec![
                crate::expr::parse("exp(2*x1)").unwrap(),
                Expr::lit(0.0),
                Expr::lit(0.0),
                Expr::lit(1.0),
            ],
        )
        .unwrap();
        let g = christoffel(&a, &[0.3, -0.2]).unwrap();
        // γ¹₁₁ = 1, everything else zero for a = diag(e^{2x¹}, 1).
        let n = 2;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let want = if (i, j, k) == (0, 0, 0) { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(g[(i * n + j) * n + k], want, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn christoffel_klein_vanishes_at_origin() {
        let m = builtin("klein2").unwrap();
        let (a, _) = m.alpha_beta().unwrap();
        let g = christoffel(a, &[0.0, 0.0]).unwrap();
        for v in &g {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn constant_form_on_flat_space_has_trivial_frame() {
        let m = builtin("randers-const2").unwrap();
        let fr = frame_of(&m, &[0.2, -0.1]);
        assert_abs_diff_eq!(frob(&fr.nabla_b), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(frob(&fr.r), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(frob(&fr.s), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(frob(&fr.ric_bar), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(fr.t_trace, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fr.b2, 0.25, epsilon = 1e-14);
        assert_abs_diff_eq!(fr.conformality, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn funk_frame_has_closed_form_and_r00() {
        let m = builtin("funk2").unwrap();
        let fr = frame_of(&m, &[0.3, -0.1]);
        assert_abs_diff_eq!(frob(&fr.s), 0.0, epsilon = 1e-12);
        for y in [[1.0, 0.4], [-0.3, 1.0], [0.7, -0.9]] {
            let dd = fr.directional(&y).unwrap();
            assert_relative_eq!(
                dd.r00,
                dd.alpha2 - dd.beta * dd.beta,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn rotational_form_splits_as_expected() {
        // b = κ(x², −x¹) on Euclidean a: pure skew part s₁₂ = κ, r ≡ 0,
        // t = κ²·id with trace 2κ².
        let kappa = 0.4;
        let a = RiemannianSpec::euclidean(2);
        let b = OneFormSpec::new(
            2,
            vec![crate::expr::parse("0.4*x2").unwrap(), crate::expr::parse("-0.4*x1").unwrap()],
        )
        .unwrap();
        let fr = build_frame(&a, &b, &[0.25, -0.15]).unwrap();
        assert_abs_diff_eq!(frob(&fr.r), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(fr.s[0 * 2 + 1], kappa, epsilon = 1e-13);
        assert_abs_diff_eq!(fr.s[1 * 2 + 0], -kappa, epsilon = 1e-13);
        assert_abs_diff_eq!(fr.t_trace, 2.0 * kappa * kappa, epsilon = 1e-13);
        assert_abs_diff_eq!(fr.t[0], kappa * kappa, epsilon = 1e-13);
    }

    #[test]
    fn ricci_bar_matches_generic_pipeline_on_klein() {
        let m = builtin("klein2").unwrap();
        let (a, _) = m.alpha_beta().unwrap();
        let b = zero_form(2);
        let x = [0.3, 0.2];
        let fr = build_frame(a, &b, &x).unwrap();
        for y in [[1.0, 0.3], [0.2, -1.0]] {
            let want = geom::ricci(&m, &x, &y).unwrap();
            assert_relative_eq!(fr.ric_bar_scalar(&y), want, max_relative = 1e-9);
            // Constant curvature −1: R̄₀₀ = −(n−1)α².
            assert_relative_eq!(
                fr.ric_bar_scalar(&y),
                -fr.alpha2(&y),
                max_relative = 1e-9
            );
            let bar = fr.bar_spray(&y);
            let gen = geom::spray(&m, &x, &y).unwrap();
            for i in 0..2 {
                assert_relative_eq!(bar[i], gen[i], max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn squared_norm_gradient_identity() {
        // (b²)ᵢ = 2(rᵢ + sᵢ) for any frame.
        let m = messy_kropina();
        let fr = frame_of(&m, &[0.15, -0.2]);
        for i in 0..2 {
            assert_relative_eq!(
                fr.b2_grad[i],
                2.0 * (fr.r_form[i] + fr.s_form[i]),
                max_relative = 1e-10,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn antisymmetry_and_e_identities() {
        let m = messy_randers();
        let fr = frame_of(&m, &[0.2, 0.1]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let y = sample_direction(2, &mut rng);
            let dd = fr.directional(&y).unwrap();
            // sᵢⱼyⁱyʲ = 0 and e₀₀ = r₀₀ + 2βs₀, both exactly.
            assert_abs_diff_eq!(quad(&fr.s, &y), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(
                dd.e00,
                dd.r00 + 2.0 * dd.beta * dd.s0,
                epsilon = 1e-13
            );
            // sᵐ₀yₘ = 0: the raised-skew contraction is a-orthogonal to y.
            let mut acc = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    acc += fr.a[i * 2 + j] * dd.s_up0[i] * y[j];
                }
            }
            assert_abs_diff_eq!(acc, 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn randers_spray_matches_generic() {
        for (name, x, y) in [
            ("funk2", vec![0.3, -0.1], vec![1.0, 0.4]),
            ("randers-rot2", vec![0.25, 0.1], vec![-0.6, 1.0]),
            ("baoshen3", vec![0.1, -0.2, 0.15], vec![1.0, 0.3, -0.5]),
        ] {
            let m = builtin(name).unwrap();
            let fr = frame_of(&m, &x);
            let ours = randers_spray(&fr, &y).unwrap();
            let want = geom::spray(&m, &x, &y).unwrap();
            for i in 0..m.dim() {
                assert_relative_eq!(ours[i], want[i], max_relative = 1e-8, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn randers_ricci_matches_generic() {
        for (name, x, y) in [
            ("funk2", vec![0.3, -0.1], vec![1.0, 0.4]),
            ("randers-rot2", vec![0.25, 0.1], vec![-0.6, 1.0]),
            ("randers-curved-closed2", vec![0.2, -0.15], vec![0.8, 0.5]),
            ("baoshen3", vec![0.1, -0.2, 0.15], vec![1.0, 0.3, -0.5]),
        ] {
            let m = builtin(name).unwrap();
            let fr = frame_of(&m, &x);
            let ours = randers_ricci(&fr, &y).unwrap();
            let want = geom::ricci(&m, &x, &y).unwrap();
            assert_relative_eq!(ours, want, max_relative = 1e-6, epsilon = 1e-9);
        }
    }

    #[test]
    fn randers_s_curvature_and_sfrak_reduction() {
        for (name, x, y) in [
            ("funk2", vec![0.3, -0.1], vec![1.0, 0.4]),
            ("randers-rot2", vec![0.25, 0.1], vec![-0.6, 1.0]),
            ("baoshen3", vec![0.1, -0.2, 0.15], vec![1.0, 0.3, -0.5]),
        ] {
            let m = builtin(name).unwrap();
            let n = m.dim() as f64;
            let fr = frame_of(&m, &x);
            let s = randers_s_curvature(&fr, &y).unwrap();
            let want = geom::s_curvature(&m, &VolumeSpec::ClosedFormRanders, &x, &y).unwrap();
            assert_relative_eq!(s, want, max_relative = 1e-7, epsilon = 1e-9);
            // 𝕊 = (S + (n+1)ρ₀)/(n+1) must reduce to (r₀₀ − 2αs₀)/(2F).
            let rho0 = dot(fr.rho_grad.as_ref().unwrap(), &y);
            let reduced = (s + (n + 1.0) * rho0 * (n + 1.0) / (n + 1.0)) / (n + 1.0);
            assert_relative_eq!(
                reduced,
                randers_sfrak(&fr, &y).unwrap(),
                max_relative = 1e-10,
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn randers_weighted_quantities_match_generic() {
        for (name, x, y) in [
            ("funk2", vec![0.3, -0.1], vec![1.0, 0.4]),
            ("randers-rot2", vec![0.25, 0.1], vec![-0.6, 1.0]),
            ("randers-curved-closed2", vec![0.2, -0.15], vec![0.8, 0.5]),
            ("baoshen3", vec![0.1, -0.2, 0.15], vec![1.0, 0.3, -0.5]),
        ] {
            let m = builtin(name).unwrap();
            let b = geom::curvature_bundle(
                &m,
                &VolumeSpec::ClosedFormRanders,
                &VolumeSpec::RiemannianDensity,
                &x,
                &y,
            )
            .unwrap();
            let fr = frame_of(&m, &x);
            assert_relative_eq!(
                randers_sfrak(&fr, &y).unwrap(),
                b.s_frak,
                max_relative = 1e-7,
                epsilon = 1e-10
            );
            assert_relative_eq!(
                randers_sfrak_horizontal(&fr, &y).unwrap(),
                b.s_frak_h,
                max_relative = 1e-6,
                epsilon = 1e-9
            );
            assert_relative_eq!(
                randers_wpric(&fr, &y).unwrap(),
                b.wpric0,
                max_relative = 1e-6,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn randers_wpric_composes_from_ricci_and_weight() {
        let m = messy_randers();
        let fr = frame_of(&m, &[0.2, 0.1]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let y = sample_direction(2, &mut rng);
            let ric = randers_ricci(&fr, &y).unwrap();
            let sf = randers_sfrak(&fr, &y).unwrap();
            let sfh = randers_sfrak_horizontal(&fr, &y).unwrap();
            let composed = ric + (2.0 - 1.0) * (sf * sf + sfh);
            let direct = randers_wpric(&fr, &y).unwrap();
            assert_relative_eq!(composed, direct, max_relative = 1e-9, epsilon = 1e-12);
        }
    }

    #[test]
    fn funk_wpric_is_riemannian_ricci_of_alpha() {
        // Closed β: the weighted curvature collapses to Ric̄, which for the
        // Funk metric is the Klein metric's −α².
        let m = builtin("funk2").unwrap();
        let x = [0.3, -0.1];
        let fr = frame_of(&m, &x);
        for y in [[1.0, 0.4], [-0.2, 0.9]] {
            let w = randers_wpric(&fr, &y).unwrap();
            assert_relative_eq!(w, -fr.alpha2(&y), max_relative = 1e-9);
        }
    }

    #[test]
    fn kropina_spray_matches_generic() {
        for (m, x, y) in [
            (builtin("kropina-conformal2").unwrap(), vec![0.1, -0.2], vec![1.0, 0.3]),
            (builtin("kropina-const3").unwrap(), vec![0.1, 0.2, -0.1], vec![1.0, 0.2, 0.3]),
            (messy_kropina(), vec![0.15, -0.2], vec![1.0, 0.25]),
        ] {
            let fr = frame_of(&m, &x);
            let ours = kropina_spray(&fr, &y).unwrap();
            let want = geom::spray(&m, &x, &y).unwrap();
            for i in 0..m.dim() {
                assert_relative_eq!(ours[i], want[i], max_relative = 1e-8, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn kropina_s_curvature_matches_generic() {
        for (m, x, y) in [
            (builtin("kropina-conformal2").unwrap(), vec![0.1, -0.2], vec![1.0, 0.3]),
            (messy_kropina(), vec![0.15, -0.2], vec![1.0, 0.25]),
        ] {
            let fr = frame_of(&m, &x);
            let ours = kropina_s_curvature(&fr, &y).unwrap();
            let want = geom::s_curvature(&m, &VolumeSpec::ClosedFormKropina, &x, &y).unwrap();
            assert_relative_eq!(ours, want, max_relative = 1e-7, epsilon = 1e-9);
        }
    }

    #[test]
    fn kropina_ricci_matches_generic() {
        for (m, x, y) in [
            (builtin("kropina-conformal2").unwrap(), vec![0.1, -0.2], vec![1.0, 0.3]),
            (builtin("kropina-const3").unwrap(), vec![0.1, 0.2, -0.1], vec![1.0, 0.2, 0.3]),
            (messy_kropina(), vec![0.15, -0.2], vec![1.0, 0.25]),
            (messy_kropina(), vec![-0.1, 0.25], vec![0.8, -0.15]),
        ] {
            let fr = frame_of(&m, &x);
            let ours = kropina_ricci(&fr, &y).unwrap();
            let want = geom::ricci(&m, &x, &y).unwrap();
            assert_relative_eq!(ours, want, max_relative = 1e-6, epsilon = 1e-9);
        }
    }

    #[test]
    fn kropina_weighted_quantities_match_generic() {
        for (m, x, y) in [
            (builtin("kropina-conformal2").unwrap(), vec![0.1, -0.2], vec![1.0, 0.3]),
            (messy_kropina(), vec![0.15, -0.2], vec![1.0, 0.25]),
            (messy_kropina(), vec![-0.1, 0.25], vec![0.8, -0.15]),
        ] {
            let n = m.dim() as f64;
            let b = geom::curvature_bundle(
                &m,
                &VolumeSpec::ClosedFormKropina,
                &VolumeSpec::RiemannianDensity,
                &x,
                &y,
            )
            .unwrap();
            let fr = frame_of(&m, &x);
            assert_relative_eq!(
                kropina_sfrak(&fr, &y).unwrap(),
                b.s_frak,
                max_relative = 1e-7,
                epsilon = 1e-10
            );
            assert_relative_eq!(
                kropina_s_horizontal(&fr, &y).unwrap(),
                (n - 1.0) * b.s_frak_h,
                max_relative = 1e-6,
                epsilon = 1e-8
            );
            assert_relative_eq!(
                kropina_wpric(&fr, &y).unwrap(),
                b.wpric0,
                max_relative = 1e-6,
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn kropina_theta_identities_on_conformal_data() {
        let m = builtin("kropina-conformal2").unwrap();
        let x = [0.1, -0.2];
        let fr = frame_of(&m, &x);
        assert!(fr.conformality < 1e-12, "conformality {}", fr.conformality);
        let n = fr.dim as f64;
        for y in [[1.0, 0.3], [0.5, -0.2]] {
            let dd = fr.directional(&y).unwrap();
            // Conformal frames: θ = −n(σβ + s₀)/b².
            let want = -n * (fr.sigma_conf * dd.beta + dd.s0) / fr.b2;
            assert_relative_eq!(kropina_theta(&fr, &y), want, max_relative = 1e-10);
            // And the unweighted S is identically zero, so its horizontal
            // derivative must vanish too.
            let sh = kropina_s_h0(&fr, &dd).unwrap();
            assert_abs_diff_eq!(sh, 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn kropina_flat_residuals_recompose_wpric() {
        // On conformal data the three flatness residuals assemble back into
        // WPRic₀ for any λ (the λ-terms cancel between R4 and Rv).
        let m = builtin("kropina-conformal2").unwrap();
        let x = [0.12, -0.08];
        let fr = frame_of(&m, &x);
        let r5 = fr.kropina_flat_residual_trace();
        for lambda in [0.0, 0.37] {
            for y in [[1.0, 0.3], [0.6, -0.1], [0.9, 0.7]] {
                let dd = fr.directional(&y).unwrap();
                let f = dd.alpha2 / dd.beta;
                let r4 = fr.kropina_flat_residual_ric(&y, lambda).unwrap();
                let rv = fr.kropina_flat_residual_vec(&y, lambda).unwrap();
                let composed = r4 + dd.alpha2 / (fr.b2 * dd.beta) * rv
                    - dd.alpha2 * dd.alpha2 / (2.0 * fr.b2 * dd.beta * dd.beta) * r5;
                let want = kropina_wpric(&fr, &y).unwrap();
                assert_relative_eq!(composed, want, max_relative = 1e-8, epsilon = 1e-10);
                let _ = f;
            }
        }
    }

    #[test]
    fn randers_flatness_checker_verdicts() {
        let grid = GridSpec::default();
        let flat = builtin("randers-const2").unwrap();
        let (a, b) = flat.alpha_beta().unwrap();
        let report = check_randers_wpric_flat(a, b.unwrap(), &grid).unwrap();
        assert!(report.flat, "{report:?}");

        let funk = builtin("funk2").unwrap();
        let (a, b) = funk.alpha_beta().unwrap();
        let report = check_randers_wpric_flat(a, b.unwrap(), &grid).unwrap();
        assert!(!report.flat);
        // The failure is the curvature condition, not the divergence one
        // (β is closed for the Funk metric).
        assert!(!report.checks[0].pass);
        assert!(report.checks[1].pass);

        let rot = builtin("randers-rot2").unwrap();
        let (a, b) = rot.alpha_beta().unwrap();
        let report = check_randers_wpric_flat(a, b.unwrap(), &grid).unwrap();
        assert!(!report.flat);
    }

    #[test]
    fn reversibility_checker_agrees_with_direct_comparison() {
        let grid = GridSpec::default();
        for (name, want) in [("randers-rot2", true), ("randers-curved-closed2", true)] {
            let m = builtin(name).unwrap();
            let (a, b) = m.alpha_beta().unwrap();
            let rep = check_reversible_wpric(a, b.unwrap(), &grid).unwrap();
            assert_eq!(rep.reversible, want, "{name}: {rep:?}");
            assert!(rep.agree, "{name}: {rep:?}");
        }
        // x-dependent skew with nonzero divergence: not reversible, and the
        // two verdicts still agree.
        let m = parse_metric_str(
            "dim = 2\nkind = randers\n\
             a[1][1] = 1\na[1][2] = 0\na[2][2] = 1\n\
             b[1] = 0.3*x2^2\nb[2] = 0\n",
            "randers-div",
        )
        .unwrap();
        let (a, b) = m.alpha_beta().unwrap();
        let rep = check_reversible_wpric(a, b.unwrap(), &grid).unwrap();
        assert!(!rep.reversible, "{rep:?}");
        assert!(rep.agree, "{rep:?}");
    }

    #[test]
    fn kropina_flatness_checker_verdicts_match_generic_wpric() {
        let grid = GridSpec::default();

        // Parallel 1-form on a flat (though curvilinear) metric: flat.
        let flat = parse_metric_str(
            "dim = 2\nkind = kropina\n\
             a[1][1] = 1\na[1][2] = 0\na[2][2] = exp(2*x2)\n\
             b[1] = 1\nb[2] = 0\n",
            "kropina-parallel",
        )
        .unwrap();
        let (a, b) = flat.alpha_beta().unwrap();
        let rep = check_kropina_wpric_flat(a, b.unwrap(), &grid).unwrap();
        assert_eq!(rep.verdict, KropinaVerdict::Flat, "{rep:?}");
        let w = geom::weighted_projective_ricci(
            &flat,
            &VolumeSpec::ClosedFormKropina,
            &VolumeSpec::RiemannianDensity,
            &[0.1, 0.2],
            &[1.0, 0.3],
        )
        .unwrap();
        assert_abs_diff_eq!(w, 0.0, epsilon = 1e-9);

        // Conformal but with nonzero skew part: not flat (the trace
        // condition already fails), and the generic value agrees.
        let conf = builtin("kropina-conformal2").unwrap();
        let (a, b) = conf.alpha_beta().unwrap();
        let rep = check_kropina_wpric_flat(a, b.unwrap(), &grid).unwrap();
        assert_eq!(rep.verdict, KropinaVerdict::NotFlat, "{rep:?}");
        let w = geom::weighted_projective_ricci(
            &conf,
            &VolumeSpec::ClosedFormKropina,
            &VolumeSpec::RiemannianDensity,
            &[0.1, -0.2],
            &[1.0, 0.3],
        )
        .unwrap();
        assert!(w.abs() > 1e-3, "expected nonzero WPRic₀, got {w:.3e}");

        // Non-conformal data: the characterization does not apply.
        let messy = messy_kropina();
        let (a, b) = messy.alpha_beta().unwrap();
        let rep = check_kropina_wpric_flat(a, b.unwrap(), &grid).unwrap();
        assert_eq!(rep.verdict, KropinaVerdict::NotApplicable, "{rep:?}");
    }

    #[test]
    fn isotropy_equivalences_hold_both_ways() {
        let grid = GridSpec::default();
        let conf = builtin("kropina-conformal2").unwrap();
        let (a, b) = conf.alpha_beta().unwrap();
        let rep = check_isotropic_s_equivalences(a, b.unwrap(), &grid).unwrap();
        assert!(rep.consistent, "{rep:?}");
        assert!(rep.isotropic && rep.r00_proportional && rep.s_vanishes && rep.conformal);

        let messy = messy_kropina();
        let (a, b) = messy.alpha_beta().unwrap();
        let rep = check_isotropic_s_equivalences(a, b.unwrap(), &grid).unwrap();
        assert!(rep.consistent, "{rep:?}");
        assert!(!rep.isotropic && !rep.r00_proportional && !rep.s_vanishes && !rep.conformal);
    }

    #[test]
    fn projective_factor_on_funk_is_half_f() {
        let m = builtin("funk2").unwrap();
        let x = [0.2, 0.1];
        for y in [[1.0, 0.4], [-0.3, 0.8]] {
            let f = m.eval_f(&x[..], &y[..]).unwrap();
            let (p, _) = projective_factor(&m, &x, &y).unwrap();
            assert_relative_eq!(p, f / 2.0, max_relative = 1e-9);
            let ric = projectively_flat_ricci(&m, &x, &y).unwrap();
            let want = geom::ricci(&m, &x, &y).unwrap();
            assert_relative_eq!(ric, want, max_relative = 1e-8, epsilon = 1e-11);
        }
    }

    #[test]
    fn projective_factor_rejects_non_projectively_flat_charts() {
        let m = builtin("randers-rot2").unwrap();
        let err = projective_factor(&m, &[0.2, 0.1], &[1.0, 0.5]).unwrap_err();
        assert!(matches!(err, Error::NotProjectivelyFlat { .. }), "{err}");
    }

    #[test]
    fn reconstruction_synthetic_cases() {
        // Quadratic branch: σ − c² = 1, no linear term, constant −1.
        let pd = ProjectiveData {
            p: 1.0,
            p0: 0.0,
            c: 0.0,
            c0: 0.0,
            sigma_iso: 1.0,
            eta: 0.0,
            eta0: 0.0,
        };
        let rec = reconstruct_metric_from_projective_data(&pd).unwrap();
        assert_eq!(rec.family, FamilyTag::Randers);
        assert_relative_eq!(rec.f, 1.0, max_relative = 1e-12);

        // Degenerate branch: σ = c², linear coefficient 2, constant 3.
        let pd = ProjectiveData {
            p: 0.0,
            p0: 4.0,
            c: 1.0,
            c0: 0.0,
            sigma_iso: 1.0,
            eta: 1.0,
            eta0: 0.0,
        };
        let rec = reconstruct_metric_from_projective_data(&pd).unwrap();
        assert_eq!(rec.family, FamilyTag::Kropina);
        assert_relative_eq!(rec.f, 1.5, max_relative = 1e-12);

        // Degenerate data errors out.
        let pd = ProjectiveData {
            p: 0.0,
            p0: 4.0,
            c: 1.0,
            c0: 0.0,
            sigma_iso: 1.0,
            eta: 0.0,
            eta0: 0.0,
        };
        assert!(reconstruct_metric_from_projective_data(&pd).is_err());
    }

    #[test]
    fn reconstruction_round_trips_funk_and_klein() {
        for (name, x, y) in [
            ("funk2", [0.2, 0.1], [1.0, 0.4]),
            ("klein2", [0.15, -0.1], [0.7, 1.0]),
        ] {
            let m = builtin(name).unwrap();
            let vol = VolumeSpec::preferred(&m);
            let pd =
                projective_data_from_metric(&m, &vol, &vol, &x, &y).unwrap();
            let rec = reconstruct_metric_from_projective_data(&pd).unwrap();
            let f = m.eval_f(&x[..], &y[..]).unwrap();
            assert_relative_eq!(rec.f, f, max_relative = 1e-6);
            assert_eq!(rec.family, FamilyTag::Randers);
        }
    }

    #[test]
    fn grid_checkers_are_deterministic() {
        let m = builtin("kropina-conformal2").unwrap();
        let (a, b) = m.alpha_beta().unwrap();
        let grid = GridSpec::default();
        let r1 = check_kropina_wpric_flat(a, b.unwrap(), &grid).unwrap();
        let r2 = check_kropina_wpric_flat(a, b.unwrap(), &grid).unwrap();
        assert_eq!(r1.lambda, r2.lambda);
        for (c1, c2) in r1.checks.iter().zip(&r2.checks) {
            assert_eq!(c1.max_rel.to_bits(), c2.max_rel.to_bits());
        }
    }
}
