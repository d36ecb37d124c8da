//! Closed-form rate expressions: the static and dynamic upper bounds, naive
//! multicast, and the two-receiver two-file achievable and lower curves.
//! Everything is in units of `H(W) = 1` unless `h` is passed explicitly.

use crate::error::{Error, Result};

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundParams {
    pub k: usize,
    pub n: usize,
    /// Cache size in files.
    pub m: f64,
    pub delta: f64,
    pub g_delta: usize,
    /// Update probability, dynamic setting only.
    pub pi: f64,
}

impl BoundParams {
    pub fn new(k: usize, n: usize, m: f64, delta: f64, g_delta: usize) -> Result<Self> {
        let p = Self {
            k,
            n,
            m,
            delta,
            g_delta,
            pi: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_pi(mut self, pi: f64) -> Result<Self> {
        self.pi = pi;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.n == 0 {
            return Err(Error::Bounds("need K >= 1 and N >= 1".into()));
        }
        if self.g_delta == 0 || self.g_delta > self.n {
            return Err(Error::Bounds(format!("G must lie in [1, {}], got {}", self.n, self.g_delta)));
        }
        if !(0.0..=self.n as f64).contains(&self.m) {
            return Err(Error::Bounds(format!("M = {} outside [0, {}]", self.m, self.n)));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::Bounds(format!("delta {} outside [0, 1]", self.delta)));
        }
        if !(0.0..=1.0).contains(&self.pi) {
            return Err(Error::Bounds(format!("pi {} outside [0, 1]", self.pi)));
        }
        Ok(())
    }

    /// Normalized memory `M/N`.
    pub fn mem_ratio(&self) -> f64 {
        self.m / self.n as f64
    }

    fn with_g(&self, g_delta: usize) -> Self {
        Self { g_delta, ..*self }
    }

    fn check_l(&self, l: usize) -> Result<()> {
        if l == 0 || l > self.k {
            return Err(Error::Bounds(format!("l = {l} outside [1, {}]", self.k)));
        }
        Ok(())
    }
}

/// `x^e` with `0^0 = 1`.
fn pow(x: f64, e: usize) -> f64 {
    x.powi(e as i32)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of surjections from a `t`-set onto a `d`-set, which equals the
/// multinomial sum over compositions `t₁ + … + t_d = t` with every `tᵢ ≥ 1`.
pub fn surjections(t: usize, d: usize) -> f64 {
    // s(t, d) = d·(s(t−1, d) + s(t−1, d−1))
    let mut row = vec![0.0; d + 1];
    row[0] = 1.0;
    for _ in 0..t {
        for j in (0..=d).rev() {
            row[j] = if j == 0 { 0.0 } else { j as f64 * (row[j] + row[j - 1]) };
        }
    }
    row[d]
}

/// `Φ(κ, ν) = ν(1 − (1 − 1/ν)^κ)`, the expected number of distinct files
/// among κ uniform requests over ν files. `Φ(0, ·) = 0`.
pub fn phi_naive(kappa: f64, nu: f64) -> Result<f64> {
    if kappa == 0.0 {
        return Ok(0.0);
    }
    if !(nu > 0.0) {
        return Err(Error::Bounds(format!("nu = {nu} must be positive")));
    }
    if !(kappa >= 0.0) {
        return Err(Error::Bounds(format!("kappa = {kappa} must be nonnegative")));
    }
    // for fractional nu < 1 the base is clamped so the value stays real
    Ok(nu * (1.0 - (1.0 - 1.0 / nu).max(0.0).powf(kappa)))
}

pub fn p_l(p: &BoundParams, l: usize) -> Result<f64> {
    p.check_l(l)?;
    let m = p.mem_ratio();
    Ok(pow(1.0 - m, p.k - l) * pow(m, l - 1))
}

pub fn p_hat(p: &BoundParams, l: usize) -> Result<f64> {
    p.check_l(l)?;
    (1..l).map(|i| Ok(binomial(p.k - 1, i - 1) * p_l(p, i)?)).sum()
}

pub fn x_l(p: &BoundParams, l: usize) -> Result<f64> {
    p.check_l(l)?;
    Ok(binomial(p.k - 1, l - 1))
}

pub fn xi(p: &BoundParams, l: usize) -> Result<f64> {
    let (pl, ph) = (p_l(p, l)?, p_hat(p, l)?);
    Ok((1..=l)
        .map(|i| i as f64 * binomial(l, i) * pow(ph, i) * pow(pl, l - i))
        .sum())
}

pub fn alpha(p: &BoundParams, l: usize, t: usize) -> Result<f64> {
    if t == 0 {
        return Err(Error::Bounds("t must be >= 1".into()));
    }
    p.check_l(l)?;
    let x = binomial(p.k - 1, l - 1).round() as usize;
    Ok((1..=t.min(x))
        .map(|d| binomial(x - 1, d - 1) * surjections(t, d) / d as f64)
        .sum())
}

pub fn psi(p: &BoundParams, l: usize, g: usize) -> Result<f64> {
    let (pl, ph) = (p_l(p, l)?, p_hat(p, l)?);
    (1..=g + 1)
        .map(|t| Ok(binomial(g + 1, t) * alpha(p, l, t)? * pow(pl, t) * pow(ph, g + 1 - t)))
        .sum()
}

pub fn delta_psi(p: &BoundParams, l: usize, g: usize) -> Result<f64> {
    let (pl, ph) = (p_l(p, l)?, p_hat(p, l)?);
    (1..=g)
        .map(|t| Ok(binomial(g, t) * alpha(p, l, t)? * pow(pl, t) * pow(ph, g + 1 - t)))
        .sum()
}

/// Probability weight `λ(ℓ, G)` of a root's group joining an independent set
/// of label size ℓ.
pub fn lambda(p: &BoundParams, l: usize) -> Result<f64> {
    let m = p.mem_ratio();
    let g_max = p.g_delta - 1;
    (0..=g_max)
        .map(|g| Ok(binomial(g_max, g) * pow(1.0 - m, g) * pow(m, g_max - g) * psi(p, l, g)?))
        .sum()
}

pub fn delta_lambda(p: &BoundParams, l: usize) -> Result<f64> {
    let m = p.mem_ratio();
    let g_max = p.g_delta - 1;
    (1..=g_max)
        .map(|g| Ok(binomial(g_max, g) * pow(1.0 - m, g) * pow(m, g_max - g) * delta_psi(p, l, g)?))
        .sum()
}

pub fn psi1_static(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let m = p.mem_ratio();
    (1..=p.k)
        .map(|l| {
            let bracket = lambda(p, l)? + p.delta * xi(p, l)? * delta_lambda(p, l)?;
            Ok(binomial(p.k, l) * (1.0 - m) * bracket)
        })
        .sum()
}

pub fn psi2_static(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    if p.n % p.g_delta != 0 {
        return Err(Error::Bounds(format!("G = {} does not divide N = {}", p.g_delta, p.n)));
    }
    let k = p.k as f64;
    let coarse = phi_naive(k, (p.n / p.g_delta) as f64)?;
    Ok(coarse + p.delta * (phi_naive(k, p.n as f64)? - coarse))
}

/// Minimum over the correlation-aware branch (given `G`, δ) and the branch
/// that ignores correlation (`G = 1`).
pub fn theorem1_bound(p: &BoundParams) -> Result<f64> {
    let aware = psi1_static(p)?.min(psi2_static(p)?);
    Ok(aware.min(unaware_static_bound(p)?))
}

/// The `G = 1` branch alone, `min(Ψ₁ˢ, Φ(K, N))` without correlation.
pub fn unaware_static_bound(p: &BoundParams) -> Result<f64> {
    let q = p.with_g(1);
    Ok(psi1_static(&q)?.min(phi_naive(p.k as f64, p.n as f64)?))
}

pub fn psi1_dynamic(p: &BoundParams) -> Result<f64> {
    p.validate()?;
    let m = p.mem_ratio();
    let coded: f64 = (1..=p.k)
        .map(|l| Ok(binomial(p.k, l) * (1.0 - m) * p_l(p, l)?))
        .sum::<Result<f64>>()?;
    let refine = phi_naive(p.pi * p.k as f64, p.pi * p.n as f64)?;
    Ok(coded + p.delta * refine)
}

pub fn theorem2_bound(p: &BoundParams) -> Result<f64> {
    Ok(psi1_dynamic(p)?.min(phi_naive(p.k as f64, p.n as f64)?))
}

fn check_two_file(m: f64, h: f64) -> Result<()> {
    if !(h > 0.0) || !(m >= -TOL && m <= 2.0 * h + TOL) {
        return Err(Error::Bounds(format!("M = {m} outside [0, {}]", 2.0 * h)));
    }
    Ok(())
}

/// Memory-sharing envelope of the two-receiver two-file scheme.
pub fn two_file_rate(m: f64, delta: f64, h: f64) -> Result<f64> {
    check_two_file(m, h)?;
    let c = delta.min(0.5);
    Ok(if m <= h {
        (1.0 + delta / 2.0) * (h - m) + c * m
    } else {
        c * (2.0 * h - m)
    })
}

pub fn two_file_lower_bound(m: f64, delta: f64, h: f64) -> Result<f64> {
    check_two_file(m, h)?;
    Ok(if m < h {
        (1.0 + delta / 2.0) * h - m
    } else if m < (1.0 + delta) * h {
        0.5 * ((1.0 + delta) * h - m)
    } else {
        0.0
    })
}

/// Largest gap `two_file_rate − two_file_lower_bound` over `grid ∩ [lo, hi]`.
pub fn two_file_max_gap(delta: f64, h: f64, grid: &[f64], lo: f64, hi: f64) -> Result<f64> {
    let mut gap = 0.0f64;
    for &m in grid.iter().filter(|&&m| m >= lo - TOL && m <= hi + TOL) {
        gap = gap.max(two_file_rate(m, delta, h)? - two_file_lower_bound(m, delta, h)?);
    }
    Ok(gap)
}

/// Gap to the lower bound stays within `½·min{δ, 1−δ}·h` for `M ≤ h` and
/// within `½(1−δ)h` above.
pub fn theorem3_gap_check(delta: f64, h: f64, grid: &[f64]) -> Result<bool> {
    for &m in grid {
        let gap = two_file_rate(m, delta, h)? - two_file_lower_bound(m, delta, h)?;
        let limit = if m <= h {
            0.5 * delta.min(1.0 - delta) * h
        } else {
            0.5 * (1.0 - delta) * h
        };
        if gap > limit + TOL {
            return Ok(false);
        }
    }
    Ok(true)
}
