//! Scalar special functions used by the spherical vector wave functions.
//!
//! Conventions, frozen here and relied on everywhere else:
//!
//! * `P̄_n^m(cos θ)` is the associated Legendre function *without* the
//!   Condon–Shortley phase, scaled so that `∫_{-1}^{1} [P̄_n^m(x)]² dx = 1`,
//!   i.e. `P̄_n^m = sqrt((2n+1)/2 · (n-m)!/(n+m)!) · P_n^m`. Together with the
//!   `1/sqrt(2π)` and `1/sqrt(n(n+1))` prefactors of the wave functions this
//!   makes the tangential angular functions orthonormal on the unit sphere.
//! * Radial functions follow the `e^{-jωt}` convention: kind 3 (`j_n + j·y_n`)
//!   is the outgoing wave.
//! * `wigner_d(n, μ, m, θ)` is the rotation coefficient that re-expands a
//!   wave function of azimuthal order `m` in a frame rotated by `θ` about the
//!   `y` axis into orders `μ`. In terms of the usual quantum-mechanical
//!   `d^j_{m'm}(β) = <j m'| exp(-iβJ_y) |j m>` it equals `d^n_{mμ}(θ)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the spherical degree accepted by the public entry points.
pub const DEFAULT_MAX_DEGREE: usize = 64;

/// Selects the radial function `z_n^{(c)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RadialKind {
    /// `j_n`, standing wave regular at the origin.
    Regular,
    /// `y_n`, standing wave singular at the origin.
    Irregular,
    /// `h_n^{(1)} = j_n + j y_n`.
    Outward,
    /// `h_n^{(2)} = j_n - j y_n`.
    Inward,
}

impl RadialKind {
    pub fn from_index(c: u8) -> Result<Self> {
        match c {
            1 => Ok(Self::Regular),
            2 => Ok(Self::Irregular),
            3 => Ok(Self::Outward),
            4 => Ok(Self::Inward),
            _ => Err(Error::Domain(format!("radial kind must be 1..=4, got {c}"))),
        }
    }

    pub fn index(self) -> u8 {
        match self {
            Self::Regular => 1,
            Self::Irregular => 2,
            Self::Outward => 3,
            Self::Inward => 4,
        }
    }

    #[inline]
    fn combine(self, j: f64, y: f64) -> Complex64 {
        match self {
            Self::Regular => Complex64::new(j, 0.0),
            Self::Irregular => Complex64::new(y, 0.0),
            Self::Outward => Complex64::new(j, y),
            Self::Inward => Complex64::new(j, -y),
        }
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n > DEFAULT_MAX_DEGREE {
        return Err(Error::Domain(format!(
            "degree {n} exceeds the supported maximum {DEFAULT_MAX_DEGREE}"
        )));
    }
    Ok(())
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(Error::Domain(format!("theta = {theta} outside [0, π]")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Legendre functions
// ---------------------------------------------------------------------------

/// `P̄_n^m` for `n = m..=nmax`, seeded with `sin^{power} θ` in place of
/// `sin^m θ`. With `power = m - 1` this yields `P̄_n^m / sin θ` without ever
/// dividing by `sin θ`.
fn legendre_column(m: usize, nmax: usize, cos: f64, sin: f64, power: i32) -> Vec<f64> {
    let mut out = Vec::with_capacity(nmax + 1 - m);
    // P̄_m^m = sqrt(1/2) · Π_{i=1..m} sqrt((2i+1)/(2i)) · sin^m
    let mut seed = std::f64::consts::FRAC_1_SQRT_2;
    for i in 1..=m {
        let i = i as f64;
        seed *= ((2.0 * i + 1.0) / (2.0 * i)).sqrt();
    }
    seed *= sin.powi(power);
    out.push(seed);
    if nmax == m {
        return out;
    }
    let mf = m as f64;
    out.push((2.0 * mf + 3.0).sqrt() * cos * seed);
    for n in (m + 2)..=nmax {
        let nf = n as f64;
        let a = ((4.0 * nf * nf - 1.0) / (nf * nf - mf * mf)).sqrt();
        let b = (((nf - 1.0) * (nf - 1.0) - mf * mf) / (4.0 * (nf - 1.0) * (nf - 1.0) - 1.0)).sqrt();
        let next = a * (cos * out[n - m - 1] - b * out[n - m - 2]);
        out.push(next);
    }
    out
}

/// Normalized associated Legendre function `P̄_n^m(x)`.
pub fn legendre_norm(n: usize, m: usize, x: f64) -> Result<f64> {
    check_degree(n)?;
    if m > n {
        return Err(Error::Domain(format!("order m = {m} exceeds degree n = {n}")));
    }
    if !(-1.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x = {x} outside [-1, 1]")));
    }
    let sin = (1.0 - x * x).max(0.0).sqrt();
    Ok(*legendre_column(m, n, x, sin, m as i32).last().unwrap())
}

/// `d P̄_n^m(cos θ) / dθ` from the ladder relation in `m`.
pub fn legendre_norm_dtheta(n: usize, m: usize, theta: f64) -> Result<f64> {
    check_degree(n)?;
    check_theta(theta)?;
    if m > n {
        return Err(Error::Domain(format!("order m = {m} exceeds degree n = {n}")));
    }
    let table = AngularTable::new(n, theta);
    Ok(table.dp(n, m))
}

/// `P̄_n^m(cos θ) / sin θ`, finite at the poles.
pub fn legendre_norm_over_sin(n: usize, m: usize, theta: f64) -> Result<f64> {
    check_degree(n)?;
    check_theta(theta)?;
    if m == 0 {
        return Err(Error::Domain(
            "P̄/sinθ is only defined for m ≥ 1; the m = 0 term vanishes".into(),
        ));
    }
    if m > n {
        return Err(Error::Domain(format!("order m = {m} exceeds degree n = {n}")));
    }
    let (sin, cos) = theta.sin_cos();
    Ok(*legendre_column(m, n, cos, sin, m as i32 - 1).last().unwrap())
}

/// All Legendre quantities needed by the wave functions at one polar angle,
/// for degrees `0..=nmax` and orders `0..=n`.
#[derive(Clone, Debug)]
pub(crate) struct AngularTable {
    nmax: usize,
    p: Vec<f64>,
    dp: Vec<f64>,
    p_over_sin: Vec<f64>,
}

impl AngularTable {
    #[inline]
    fn slot(n: usize, m: usize) -> usize {
        n * (n + 1) / 2 + m
    }

    pub(crate) fn new(nmax: usize, theta: f64) -> Self {
        let (sin, cos) = theta.sin_cos();
        let len = (nmax + 1) * (nmax + 2) / 2;
        let mut p = vec![0.0; len];
        let mut p_over_sin = vec![0.0; len];
        for m in 0..=nmax {
            for (i, v) in legendre_column(m, nmax, cos, sin, m as i32).into_iter().enumerate() {
                p[Self::slot(m + i, m)] = v;
            }
            if m >= 1 {
                for (i, v) in legendre_column(m, nmax, cos, sin, m as i32 - 1).into_iter().enumerate() {
                    p_over_sin[Self::slot(m + i, m)] = v;
                }
            }
        }
        let mut dp = vec![0.0; len];
        for n in 0..=nmax {
            let nf = n as f64;
            for m in 0..=n {
                let mf = m as f64;
                let upper = if m < n { p[Self::slot(n, m + 1)] } else { 0.0 };
                dp[Self::slot(n, m)] = if m == 0 {
                    -(nf * (nf + 1.0)).sqrt() * upper
                } else {
                    let lower = p[Self::slot(n, m - 1)];
                    0.5 * (((nf + mf) * (nf - mf + 1.0)).sqrt() * lower
                        - ((nf - mf) * (nf + mf + 1.0)).sqrt() * upper)
                };
            }
        }
        Self { nmax, p, dp, p_over_sin }
    }

    #[inline]
    pub(crate) fn p(&self, n: usize, m: usize) -> f64 {
        debug_assert!(n <= self.nmax && m <= n);
        self.p[Self::slot(n, m)]
    }

    #[inline]
    pub(crate) fn dp(&self, n: usize, m: usize) -> f64 {
        self.dp[Self::slot(n, m)]
    }

    /// Zero for `m = 0`.
    #[inline]
    pub(crate) fn p_over_sin(&self, n: usize, m: usize) -> f64 {
        self.p_over_sin[Self::slot(n, m)]
    }
}

// ---------------------------------------------------------------------------
// Spherical Bessel functions
// ---------------------------------------------------------------------------

/// `j_n(x)` for `n = 0..=nmax`.
///
/// Upward recurrence is used when `x > nmax`; otherwise Miller's downward
/// recurrence normalized against `j_0` or `j_1`, whichever is larger.
pub(crate) fn spherical_j(nmax: usize, x: f64) -> Vec<f64> {
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    let j1 = s / (x * x) - c / x;
    if x > nmax as f64 {
        let mut out = Vec::with_capacity(nmax + 1);
        out.push(j0);
        if nmax >= 1 {
            out.push(j1);
        }
        for n in 1..nmax {
            let next = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
            out.push(next);
        }
        return out;
    }

    let start = nmax + 20 + (x + (40.0 * (nmax as f64 + x)).sqrt()) as usize;
    let mut f = vec![0.0f64; start + 2];
    f[start] = 1e-300;
    for n in (1..=start).rev() {
        f[n - 1] = (2 * n + 1) as f64 / x * f[n] - f[n + 1];
        if f[n - 1].abs() > 1e250 {
            for v in f[n - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let scale = if j0.abs() >= j1.abs() { j0 / f[0] } else { j1 / f[1] };
    f.truncate(nmax + 1);
    for v in f.iter_mut() {
        *v *= scale;
    }
    f
}

/// `y_n(x)` for `n = 0..=nmax` by upward recurrence.
pub(crate) fn spherical_y(nmax: usize, x: f64) -> Vec<f64> {
    let (s, c) = x.sin_cos();
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(-c / x);
    if nmax >= 1 {
        out.push(-c / (x * x) - s / x);
    }
    for n in 1..nmax {
        let next = (2 * n + 1) as f64 / x * out[n] - out[n - 1];
        out.push(next);
    }
    out
}

/// Radial values `z_n(x)` and `(1/x) d/dx[x z_n(x)]` for `n = 0..=nmax`.
#[derive(Clone, Debug)]
pub(crate) struct RadialTable {
    pub(crate) z: Vec<Complex64>,
    /// `d/dx [x z_n(x)]`, not yet divided by `x`.
    pub(crate) dxz: Vec<Complex64>,
    pub(crate) x: f64,
}

impl RadialTable {
    pub(crate) fn new(kind: RadialKind, nmax: usize, x: f64) -> Self {
        let j = spherical_j(nmax, x);
        let y = spherical_y(nmax, x);
        let (s, c) = x.sin_cos();
        // z_{-1}: j_{-1} = cos x / x, y_{-1} = sin x / x
        let mut prev = kind.combine(c / x, s / x);
        let mut z = Vec::with_capacity(nmax + 1);
        let mut dxz = Vec::with_capacity(nmax + 1);
        for n in 0..=nmax {
            let cur = kind.combine(j[n], y[n]);
            dxz.push(prev * x - cur * n as f64);
            z.push(cur);
            prev = cur;
        }
        Self { z, dxz, x }
    }
}

fn check_arg(x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("radial argument must be finite and > 0, got {x}")));
    }
    Ok(())
}

/// `z_n^{(c)}(x)`.
pub fn radial(kind: RadialKind, n: usize, x: f64) -> Result<Complex64> {
    check_degree(n)?;
    check_arg(x)?;
    Ok(RadialTable::new(kind, n, x).z[n])
}

/// `d/dx [x z_n^{(c)}(x)]`, via `x z_{n-1} - n z_n`.
pub fn radial_kr_derivative(kind: RadialKind, n: usize, x: f64) -> Result<Complex64> {
    check_degree(n)?;
    check_arg(x)?;
    Ok(RadialTable::new(kind, n, x).dxz[n])
}

// ---------------------------------------------------------------------------
// Wigner small-d
// ---------------------------------------------------------------------------

fn binomial(n: i64, k: i64) -> f64 {
    if k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn jacobi(k: i64, a: f64, b: f64, x: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = (a + 1.0) + (a + b + 2.0) * (x - 1.0) / 2.0;
    for n in 2..=k {
        let n = n as f64;
        let s = 2.0 * n + a + b;
        let c1 = 2.0 * n * (n + a + b) * (s - 2.0);
        let c2 = (s - 1.0) * (s * (s - 2.0) * x + a * a - b * b);
        let c3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * s;
        let p2 = (c2 * p1 - c3 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// `<j m'| exp(-iβJ_y) |j m>` through the Jacobi-polynomial representation.
fn small_d_quantum(j: i64, mp: i64, m: i64, beta: f64) -> f64 {
    let k = (j + m).min(j - m).min(j + mp).min(j - mp);
    let (a, lambda) = if k == j + m {
        (mp - m, mp - m)
    } else if k == j - m {
        (m - mp, 0)
    } else if k == j + mp {
        (m - mp, 0)
    } else {
        (mp - m, mp - m)
    };
    let b = 2 * j - 2 * k - a;
    let sign = if lambda.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let norm = (binomial(2 * j - k, k + a) / binomial(k + b, b)).sqrt();
    let (sh, ch) = (beta / 2.0).sin_cos();
    sign * norm * sh.powi(a as i32) * ch.powi(b as i32) * jacobi(k, a as f64, b as f64, beta.cos())
}

/// Wigner rotation coefficient `d^n_{μm}(θ)` in the wave-function rotation
/// convention (see module docs).
pub fn wigner_d(n: usize, mu: i32, m: i32, theta: f64) -> Result<f64> {
    check_degree(n)?;
    let ni = n as i32;
    if mu.abs() > ni || m.abs() > ni {
        return Err(Error::Domain(format!("|μ| = {} or |m| = {} exceeds n = {n}", mu.abs(), m.abs())));
    }
    if !theta.is_finite() {
        return Err(Error::Domain("rotation angle must be finite".into()));
    }
    Ok(small_d_quantum(n as i64, m as i64, mu as i64, theta))
}

/// Every `d^n_{μm}(θ)` for `n = 0..=nmax` at one angle.
#[derive(Clone, Debug)]
pub(crate) struct WignerTable {
    nmax: usize,
    offsets: Vec<usize>,
    values: Vec<f64>,
}

impl WignerTable {
    pub(crate) fn new(nmax: usize, theta: f64) -> Self {
        let mut offsets = Vec::with_capacity(nmax + 1);
        let mut values = Vec::new();
        for n in 0..=nmax {
            offsets.push(values.len());
            let ni = n as i64;
            for mu in -ni..=ni {
                for m in -ni..=ni {
                    values.push(small_d_quantum(ni, m, mu, theta));
                }
            }
        }
        Self { nmax, offsets, values }
    }

    #[inline]
    pub(crate) fn get(&self, n: usize, mu: i32, m: i32) -> f64 {
        debug_assert!(n <= self.nmax);
        let ni = n as i32;
        let width = (2 * n + 1) as usize;
        self.values[self.offsets[n] + (mu + ni) as usize * width + (m + ni) as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn legendre_constant_degree_zero() {
        let a = legendre_norm(0, 0, -0.7).unwrap();
        let b = legendre_norm(0, 0, 0.2).unwrap();
        assert_eq!(a, b);
        assert_relative_eq!(a, (0.5f64).sqrt());
    }

    #[test]
    fn legendre_vanishes_at_poles_for_m1() {
        assert_eq!(legendre_norm(1, 1, 1.0).unwrap(), 0.0);
        assert_eq!(legendre_norm(1, 1, -1.0).unwrap(), 0.0);
    }

    #[test]
    fn legendre_rejects_bad_input() {
        assert!(legendre_norm(2, 3, 0.1).is_err());
        assert!(legendre_norm(2, 1, 1.5).is_err());
        assert!(legendre_norm(65, 1, 0.5).is_err());
        assert!(legendre_norm_over_sin(3, 0, 0.3).is_err());
        assert!(legendre_norm_dtheta(3, 1, -0.1).is_err());
    }

    #[test]
    fn dtheta_degree_one() {
        // P̄_1^0 = sqrt(3/2) cos θ
        let v = legendre_norm_dtheta(1, 0, PI / 2.0).unwrap();
        assert_relative_eq!(v, -(1.5f64).sqrt(), epsilon = 1e-15);
        for n in 0..8 {
            assert_eq!(legendre_norm_dtheta(n, 0, 0.0).unwrap().abs(), 0.0);
        }
    }

    #[test]
    fn over_sin_pole_limits() {
        // P̄_1^1 = (√3/2) sin θ
        let v = legendre_norm_over_sin(1, 1, 0.0).unwrap();
        assert_relative_eq!(v, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert_eq!(legendre_norm_over_sin(2, 2, 0.0).unwrap(), 0.0);
        let theta: f64 = 0.7;
        let naive = legendre_norm(3, 1, theta.cos()).unwrap() / theta.sin();
        assert_relative_eq!(legendre_norm_over_sin(3, 1, theta).unwrap(), naive, max_relative = 1e-12);
    }

    #[test]
    fn radial_closed_forms() {
        let x = 2.3f64;
        assert_relative_eq!(radial(RadialKind::Regular, 0, x).unwrap().re, x.sin() / x, epsilon = 1e-15);
        assert_relative_eq!(radial(RadialKind::Irregular, 0, x).unwrap().re, -x.cos() / x, epsilon = 1e-15);
        assert_relative_eq!(
            radial_kr_derivative(RadialKind::Regular, 0, x).unwrap().re,
            x.cos(),
            epsilon = 1e-15
        );
        let h1 = radial_kr_derivative(RadialKind::Outward, 3, x).unwrap();
        let h2 = radial_kr_derivative(RadialKind::Inward, 3, x).unwrap();
        assert_eq!(h1.conj(), h2);
        assert!(radial(RadialKind::Regular, 2, 0.0).is_err());
        assert!(radial(RadialKind::Regular, 2, -1.0).is_err());
        assert!(RadialKind::from_index(5).is_err());
    }

    #[test]
    fn bessel_downward_matches_upward_region() {
        // Both branches agree where they overlap.
        let x = 12.5;
        let up = spherical_j(10, x);
        let down = spherical_j(20, x);
        for n in 0..=10 {
            assert_relative_eq!(up[n], down[n], max_relative = 1e-12);
        }
    }

    #[test]
    fn wigner_identity_and_classical() {
        for n in 0..5usize {
            let ni = n as i32;
            for mu in -ni..=ni {
                for m in -ni..=ni {
                    let d = wigner_d(n, mu, m, 0.0).unwrap();
                    assert_eq!(d, if mu == m { 1.0 } else { 0.0 });
                }
            }
        }
        let t = 0.83f64;
        assert_relative_eq!(wigner_d(1, 0, 0, t).unwrap(), t.cos(), epsilon = 1e-15);
        assert!(wigner_d(2, 3, 0, t).is_err());
    }
}
