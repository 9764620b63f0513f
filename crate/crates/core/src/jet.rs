//! Order-4 truncated multivariate Taylor arithmetic ("jets").
//!
//! A [`MultiJet`] carries every Taylor coefficient of a scalar quantity at a
//! base point through total degree 4, over up to 8 real variables. The
//! curvature pipeline consumes at most fourth derivatives of F², so order 4
//! makes the whole chain exact: no nested numerical differencing anywhere.
//!
//! Coefficients are stored densely, ranked by graded-lexicographic
//! multi-index (≤ 495 per jet at 8 variables). Products use a precomputed
//! pair table, shared per variable count through a global [`JetSpace`] cache.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Truncation order of every jet. Fixed: the generic Riemann-curvature
/// formula needs fourth derivatives of F², nothing needs more.
pub const ORDER: usize = 4;
/// Hard cap on jet variables (x and y of a dimension-4 manifold).
pub const MAX_VARS: usize = 8;

type Idx = [u8; MAX_VARS];

fn idx_degree(idx: &Idx) -> u8 {
    idx.iter().sum()
}

/// Shared per-variable-count tables: index ranking, product pairs,
/// derivative shifts. Obtained through [`space`], never built directly.
pub struct JetSpace {
    num_vars: usize,
    indices: Vec<Idx>,
    rank: HashMap<Idx, u32>,
    /// (left, right, out) coefficient triples covering every product that
    /// survives truncation.
    mul_pairs: Vec<(u32, u32, u32)>,
    /// Per variable v: (src, dst, multiplicity) realizing ∂/∂ξᵥ on Taylor
    /// coefficients.
    deriv: Vec<Vec<(u32, u32, f64)>>,
    first_order: Vec<usize>,
    /// idx! per rank, for turning Taylor coefficients into derivatives.
    idx_factorial: Vec<f64>,
}

impl JetSpace {
    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn rank_of(&self, idx: &Idx) -> Option<u32> {
        self.rank.get(idx).copied()
    }
}

fn enumerate_indices(num_vars: usize) -> Vec<Idx> {
    let mut out = Vec::new();
    let mut idx: Idx = [0; MAX_VARS];
    for degree in 0..=ORDER as u8 {
        fill(&mut out, &mut idx, 0, degree, num_vars);
    }
    return out;

    fn fill(out: &mut Vec<Idx>, idx: &mut Idx, var: usize, left: u8, num_vars: usize) {
        if var + 1 == num_vars {
            idx[var] = left;
            out.push(*idx);
            idx[var] = 0;
            return;
        }
        for e in (0..=left).rev() {
            idx[var] = e;
            fill(out, idx, var + 1, left - e, num_vars);
        }
        idx[var] = 0;
    }
}

fn build_space(num_vars: usize) -> JetSpace {
    assert!(num_vars >= 1 && num_vars <= MAX_VARS);
    let indices = enumerate_indices(num_vars);
    let mut rank = HashMap::with_capacity(indices.len());
    for (r, idx) in indices.iter().enumerate() {
        rank.insert(*idx, r as u32);
    }

    let mut mul_pairs = Vec::new();
    for (i, a) in indices.iter().enumerate() {
        let da = idx_degree(a);
        for (j, b) in indices.iter().enumerate() {
            if da + idx_degree(b) > ORDER as u8 {
                continue;
            }
            let mut sum = *a;
            for (s, bv) in sum.iter_mut().zip(b.iter()) {
                *s += bv;
            }
            let k = rank[&sum];
            mul_pairs.push((i as u32, j as u32, k));
        }
    }
    // Group by output rank so products accumulate cache-locally.
    mul_pairs.sort_by_key(|&(_, _, k)| k);

    let mut deriv = Vec::with_capacity(num_vars);
    for v in 0..num_vars {
        let mut shifts = Vec::new();
        for (r, idx) in indices.iter().enumerate() {
            if idx[v] == 0 {
                continue;
            }
            let mut dst = *idx;
            dst[v] -= 1;
            shifts.push((r as u32, rank[&dst], idx[v] as f64));
        }
        deriv.push(shifts);
    }

    let mut first_order = Vec::with_capacity(num_vars);
    for v in 0..num_vars {
        let mut e: Idx = [0; MAX_VARS];
        e[v] = 1;
        first_order.push(rank[&e] as usize);
    }

    let idx_factorial = indices
        .iter()
        .map(|idx| {
            idx.iter()
                .map(|&e| (1..=e as u64).product::<u64>() as f64)
                .product()
        })
        .collect();

    JetSpace { num_vars, indices, rank, mul_pairs, deriv, first_order, idx_factorial }
}

/// The shared jet space for `num_vars` variables (1 ..= 8).
pub fn space(num_vars: usize) -> Arc<JetSpace> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<JetSpace>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(num_vars).or_insert_with(|| Arc::new(build_space(num_vars))).clone()
}

/// Dense order-4 jet over a shared [`JetSpace`].
#[derive(Clone)]
pub struct MultiJet {
    space: Arc<JetSpace>,
    c: Vec<f64>,
}

impl fmt::Debug for MultiJet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiJet(vars={}, value={})", self.space.num_vars, self.value())
    }
}

impl MultiJet {
    pub fn constant(space: &Arc<JetSpace>, v: f64) -> Self {
        let mut c = vec![0.0; space.len()];
        c[0] = v;
        MultiJet { space: space.clone(), c }
    }

    /// The jet of the coordinate function ξᵥ at base value `v`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, v: f64) -> Self {
        assert!(var < space.num_vars, "variable index out of range");
        let mut c = vec![0.0; space.len()];
        c[0] = v;
        c[space.first_order[var]] = 1.0;
        MultiJet { space: space.clone(), c }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// All Taylor coefficients in graded-lexicographic rank order.
    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Taylor coefficient at a multi-index (≤ order 4).
    pub fn coeff(&self, idx: &[u8]) -> f64 {
        let full = self.pad(idx);
        match self.space.rank_of(&full) {
            Some(r) => self.c[r as usize],
            None => panic!("multi-index beyond jet order"),
        }
    }

    /// Partial derivative ∂^idx f at the base point (coefficient × idx!).
    pub fn derivative(&self, idx: &[u8]) -> f64 {
        let full = self.pad(idx);
        match self.space.rank_of(&full) {
            Some(r) => self.c[r as usize] * self.space.idx_factorial[r as usize],
            None => panic!("multi-index beyond jet order"),
        }
    }

    fn pad(&self, idx: &[u8]) -> Idx {
        assert!(idx.len() <= MAX_VARS);
        let mut full: Idx = [0; MAX_VARS];
        full[..idx.len()].copy_from_slice(idx);
        full
    }

    /// First derivative value along one variable.
    pub fn d1(&self, var: usize) -> f64 {
        self.c[self.space.first_order[var]]
    }

    /// The derivative ∂f/∂ξᵥ as a jet (top-degree coefficients drop out).
    pub fn deriv_jet(&self, var: usize) -> Self {
        let mut c = vec![0.0; self.space.len()];
        for &(src, dst, mult) in &self.space.deriv[var] {
            c[dst as usize] = self.c[src as usize] * mult;
        }
        MultiJet { space: self.space.clone(), c }
    }

    pub fn scale(&self, s: f64) -> Self {
        let c = self.c.iter().map(|v| v * s).collect();
        MultiJet { space: self.space.clone(), c }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }

    /// Re-expresses this jet in a space with more variables; variable k maps
    /// to variable k, and all new-variable coefficients vanish.
    pub fn embed(&self, target: &Arc<JetSpace>) -> Self {
        assert!(target.num_vars >= self.space.num_vars);
        let mut c = vec![0.0; target.len()];
        for (r, idx) in self.space.indices.iter().enumerate() {
            let dst = target.rank_of(idx).expect("embedding preserves indices");
            c[dst as usize] = self.c[r];
        }
        MultiJet { space: target.clone(), c }
    }

    fn assert_same_space(&self, rhs: &Self) {
        assert!(
            Arc::ptr_eq(&self.space, &rhs.space),
            "jets from different spaces cannot be combined"
        );
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        self.assert_same_space(rhs);
        let mut c = vec![0.0; self.space.len()];
        for &(i, j, k) in &self.space.mul_pairs {
            c[k as usize] += self.c[i as usize] * rhs.c[j as usize];
        }
        MultiJet { space: self.space.clone(), c }
    }

    /// Evaluates a univariate Taylor series `t` at this jet: with
    /// u := self − value, returns Σₖ t[k]·uᵏ (exact under truncation since
    /// u has no constant part).
    pub fn compose_series(&self, t: [f64; ORDER + 1]) -> Self {
        let mut u = self.clone();
        u.c[0] = 0.0;
        let mut acc = MultiJet::constant(&self.space, t[ORDER]);
        for k in (0..ORDER).rev() {
            acc = acc.mul(&u);
            acc.c[0] += t[k];
        }
        acc
    }

    pub fn recip(&self) -> Result<Self> {
        let v = self.value();
        if v == 0.0 || !v.is_finite() {
            return Err(Error::Singular { what: "reciprocal", value: v });
        }
        let mut t = [0.0; ORDER + 1];
        let mut p = 1.0 / v;
        for tk in t.iter_mut() {
            *tk = p;
            p *= -1.0 / v;
        }
        Ok(self.compose_series(t))
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(&rhs.recip()?))
    }

    pub fn sqrt(&self) -> Result<Self> {
        let v = self.value();
        if !(v > 0.0) {
            return Err(Error::Singular { what: "sqrt", value: v });
        }
        let s = v.sqrt();
        // √(v+u) = s·Σ binom(1/2,k) (u/v)^k
        let mut t = [0.0; ORDER + 1];
        let mut binom = 1.0;
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = s * binom / v.powi(k as i32);
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
        }
        Ok(self.compose_series(t))
    }

    pub fn exp(&self) -> Result<Self> {
        let e = self.value().exp();
        if !e.is_finite() {
            return Err(Error::NonFinite { what: "exp".into() });
        }
        let mut t = [0.0; ORDER + 1];
        let mut fact = 1.0;
        for (k, tk) in t.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *tk = e / fact;
        }
        Ok(self.compose_series(t))
    }

    pub fn ln(&self) -> Result<Self> {
        let v = self.value();
        if !(v > 0.0) {
            return Err(Error::Singular { what: "ln", value: v });
        }
        let mut t = [0.0; ORDER + 1];
        t[0] = v.ln();
        for (k, tk) in t.iter_mut().enumerate().skip(1) {
            *tk = -(-1.0f64).powi(k as i32) / (k as f64 * v.powi(k as i32));
        }
        Ok(self.compose_series(t))
    }

    pub fn sin(&self) -> Result<Self> {
        Ok(self.compose_series(trig_series(self.value(), true)))
    }

    pub fn cos(&self) -> Result<Self> {
        Ok(self.compose_series(trig_series(self.value(), false)))
    }

    /// Integer power by repeated multiplication; valid for any base value
    /// (negative exponents require a nonzero value).
    pub fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut acc = MultiJet::constant(&self.space, 1.0);
        let mut base = self.clone();
        let mut n = n as u32;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Real power; requires a strictly positive base value.
    pub fn powf(&self, p: f64) -> Result<Self> {
        let v = self.value();
        if !(v > 0.0) {
            return Err(Error::Singular { what: "pow", value: v });
        }
        let mut t = [0.0; ORDER + 1];
        let mut binom = 1.0;
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = binom * v.powf(p - k as f64);
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        Ok(self.compose_series(t))
    }
}

fn trig_series(v: f64, sin_first: bool) -> [f64; ORDER + 1] {
    let (s, c) = v.sin_cos();
    let cycle = if sin_first { [s, c, -s, -c] } else { [c, -s, -c, s] };
    let mut t = [0.0; ORDER + 1];
    let mut fact = 1.0;
    for (k, tk) in t.iter_mut().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        *tk = cycle[k % 4] / fact;
    }
    t
}

impl Add for &MultiJet {
    type Output = MultiJet;
    fn add(self, rhs: &MultiJet) -> MultiJet {
        self.assert_same_space(rhs);
        let c = self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect();
        MultiJet { space: self.space.clone(), c }
    }
}

impl Sub for &MultiJet {
    type Output = MultiJet;
    fn sub(self, rhs: &MultiJet) -> MultiJet {
        self.assert_same_space(rhs);
        let c = self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect();
        MultiJet { space: self.space.clone(), c }
    }
}

impl Mul for &MultiJet {
    type Output = MultiJet;
    fn mul(self, rhs: &MultiJet) -> MultiJet {
        MultiJet::mul(self, rhs)
    }
}

impl Neg for &MultiJet {
    type Output = MultiJet;
    fn neg(self) -> MultiJet {
        self.scale(-1.0)
    }
}

/// Lifts a full coordinate tuple: every entry becomes an active jet variable.
pub fn lift_point(space: &Arc<JetSpace>, values: &[f64]) -> Vec<MultiJet> {
    assert_eq!(values.len(), space.num_vars());
    values.iter().enumerate().map(|(v, &x)| MultiJet::variable(space, v, x)).collect()
}
