//! Spherical vector wave functions, mode bookkeeping, field synthesis,
//! coefficient rotation and numerical mode projection.
//!
//! Modes `(s, m, n)` are stored in the compressed order
//! `j = 2[n(n+1) + m - 1] + s` (1-based), so a truncation degree `N` gives
//! `J = 2N(N+2)` coefficients. `s = 1` is TE, `s = 2` is TM.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::SphereQuadrature;
use crate::specfun::{AngularTable, RadialKind, RadialTable, WignerTable, DEFAULT_MAX_DEGREE};

const J: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub s: u8,
    pub m: i32,
    pub n: usize,
}

impl ModeIndex {
    pub fn new(s: u8, m: i32, n: usize) -> Result<Self> {
        if !(s == 1 || s == 2) {
            return Err(Error::Index(format!("polarization s must be 1 or 2, got {s}")));
        }
        if n == 0 {
            return Err(Error::Index("degree n must be ≥ 1".into()));
        }
        if n > DEFAULT_MAX_DEGREE {
            return Err(Error::Index(format!("degree {n} exceeds {DEFAULT_MAX_DEGREE}")));
        }
        if m.unsigned_abs() as usize > n {
            return Err(Error::Index(format!("|m| = {} exceeds n = {n}", m.abs())));
        }
        Ok(Self { s, m, n })
    }

    /// 1-based compressed index.
    pub fn index(self) -> usize {
        let n = self.n as i64;
        (2 * (n * (n + 1) + self.m as i64 - 1) + self.s as i64) as usize
    }

    /// Zero-based storage slot.
    #[inline]
    pub(crate) fn slot(self) -> usize {
        self.index() - 1
    }

    pub fn from_index(j: usize, max_degree: usize) -> Result<Self> {
        let count = mode_count(max_degree);
        if j == 0 || j > count {
            return Err(Error::Index(format!("index {j} outside 1..={count}")));
        }
        let s = ((j - 1) % 2 + 1) as u8;
        let l = (j - 1) / 2 + 1; // n(n+1) + m
        let mut n = (l as f64).sqrt() as usize;
        while (n + 1) * (n + 1) <= l {
            n += 1;
        }
        while n * n > l {
            n -= 1;
        }
        let m = l as i64 - (n * (n + 1)) as i64;
        Ok(Self { s, m: m as i32, n })
    }
}

/// `J = 2N(N+2)`.
pub fn mode_count(max_degree: usize) -> usize {
    2 * max_degree * (max_degree + 2)
}

pub fn mode_to_index(mode: ModeIndex, max_degree: usize) -> Result<usize> {
    if mode.n > max_degree {
        return Err(Error::Index(format!("degree {} exceeds truncation {max_degree}", mode.n)));
    }
    Ok(mode.index())
}

pub fn index_to_mode(j: usize, max_degree: usize) -> Result<ModeIndex> {
    ModeIndex::from_index(j, max_degree)
}

/// All modes up to `max_degree` in compressed-index order.
pub fn modes(max_degree: usize) -> impl Iterator<Item = ModeIndex> {
    (1..=max_degree).flat_map(|n| {
        let ni = n as i32;
        (-ni..=ni).flat_map(move |m| [1u8, 2].into_iter().map(move |s| ModeIndex { s, m, n }))
    })
}

/// A length-`J` complex coefficient vector in compressed-index order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeCoefficients {
    max_degree: usize,
    values: Vec<Complex64>,
}

impl ModeCoefficients {
    pub fn zeros(max_degree: usize) -> Self {
        Self { max_degree, values: vec![Complex64::new(0.0, 0.0); mode_count(max_degree)] }
    }

    pub fn from_values(max_degree: usize, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != mode_count(max_degree) {
            return Err(Error::Index(format!(
                "expected {} coefficients for N = {max_degree}, got {}",
                mode_count(max_degree),
                values.len()
            )));
        }
        Ok(Self { max_degree, values })
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Zero for modes above the truncation degree.
    pub fn get(&self, mode: ModeIndex) -> Complex64 {
        if mode.n > self.max_degree {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[mode.slot()]
        }
    }

    pub fn set(&mut self, mode: ModeIndex, value: Complex64) -> Result<()> {
        if mode.n > self.max_degree {
            return Err(Error::Index(format!(
                "mode ({}, {}, {}) above truncation {}",
                mode.s, mode.m, mode.n, self.max_degree
            )));
        }
        self.values[mode.slot()] = value;
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        modes(self.max_degree).zip(self.values.iter().copied())
    }

    /// `Σ |c_j|²`.
    pub fn power(&self) -> f64 {
        self.values.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { max_degree: self.max_degree, values: self.values.iter().map(|c| c * factor).collect() }
    }

    /// Same content, padded with zeros or truncated to `max_degree`.
    pub fn resized(&self, max_degree: usize) -> Self {
        let mut out = Self::zeros(max_degree);
        for (mode, c) in self.iter() {
            if mode.n <= max_degree {
                out.values[mode.slot()] = c;
            }
        }
        out
    }

    /// Unit-power copy.
    pub fn normalized(&self) -> Result<Self> {
        let p = self.power();
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::Coefficients("cannot normalize a zero-power coefficient vector".into()));
        }
        Ok(self.scaled(Complex64::new(1.0 / p.sqrt(), 0.0)))
    }
}

/// A point in some local spherical coordinate system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Domain(format!("radius must be > 0, got {r}")));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::Domain(format!("theta = {theta} outside [0, π]")));
        }
        if !phi.is_finite() {
            return Err(Error::Domain("phi must be finite".into()));
        }
        Ok(Self { r, theta, phi: phi.rem_euclid(TAU) })
    }

    /// Azimuth is reported as 0 on the polar axis.
    pub fn from_cartesian(v: Vector3<f64>) -> Result<Self> {
        let r = v.norm();
        if !(r > 0.0) {
            return Err(Error::Domain("cannot take spherical angles of the origin".into()));
        }
        let theta = (v.z / r).clamp(-1.0, 1.0).acos();
        let phi = if v.x == 0.0 && v.y == 0.0 { 0.0 } else { v.y.atan2(v.x).rem_euclid(TAU) };
        Ok(Self { r, theta, phi })
    }

    pub fn to_cartesian(&self) -> Vector3<f64> {
        self.r_hat() * self.r
    }

    pub fn r_hat(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    pub fn theta_hat(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(ct * cp, ct * sp, -st)
    }

    pub fn phi_hat(&self) -> Vector3<f64> {
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(-sp, cp, 0.0)
    }
}

/// Which coordinate system a field sample's unit vectors belong to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Frame {
    Global,
    Transmit,
    Receive,
    Local,
}

/// Complex field components `(E_r, E_θ, E_φ)` at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorFieldSample {
    pub point: SphericalPoint,
    pub frame: Frame,
    pub components: [Complex64; 3],
}

impl VectorFieldSample {
    pub fn zero(point: SphericalPoint, frame: Frame) -> Self {
        Self { point, frame, components: [Complex64::new(0.0, 0.0); 3] }
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn to_cartesian(&self) -> Vector3<Complex64> {
        let c = |v: Vector3<f64>| v.map(|x| Complex64::new(x, 0.0));
        c(self.point.r_hat()) * self.components[0]
            + c(self.point.theta_hat()) * self.components[1]
            + c(self.point.phi_hat()) * self.components[2]
    }

    pub fn from_cartesian(point: SphericalPoint, frame: Frame, v: &Vector3<Complex64>) -> Self {
        let dot = |u: Vector3<f64>| u.x * v.x + u.y * v.y + u.z * v.z;
        Self {
            point,
            frame,
            components: [dot(point.r_hat()), dot(point.theta_hat()), dot(point.phi_hat())],
        }
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

#[inline]
fn mode_prefactor(m: i32, n: usize) -> f64 {
    let nf = n as f64;
    let sign = if m > 0 && m % 2 == 1 { -1.0 } else { 1.0 };
    sign / (TAU * nf * (nf + 1.0)).sqrt()
}

/// Orthonormal tangential angular function `(θ, φ)` components of mode
/// `(s, m, n)`; the SVWF tangential part is this times a radial factor.
#[inline]
fn angular(mode: ModeIndex, table: &AngularTable, phi: f64) -> [Complex64; 2] {
    let ma = mode.m.unsigned_abs() as usize;
    let e = Complex64::from_polar(mode_prefactor(mode.m, mode.n), mode.m as f64 * phi);
    let jm_over_sin = J * (mode.m as f64 * table.p_over_sin(mode.n, ma));
    let dp = Complex64::new(table.dp(mode.n, ma), 0.0);
    match mode.s {
        1 => [e * jm_over_sin, -e * dp],
        _ => [e * dp, e * jm_over_sin],
    }
}

/// Evaluates every SVWF of one radial kind at a fixed point.
pub(crate) struct WaveBasis {
    angular: AngularTable,
    radial: RadialTable,
    phi: f64,
    kr: f64,
}

impl WaveBasis {
    pub(crate) fn new(kind: RadialKind, max_degree: usize, p: &SphericalPoint, k: f64) -> Result<Self> {
        if max_degree > DEFAULT_MAX_DEGREE {
            return Err(Error::Domain(format!("degree {max_degree} exceeds {DEFAULT_MAX_DEGREE}")));
        }
        let kr = k * p.r;
        if !(kr > 0.0) || !kr.is_finite() {
            return Err(Error::Domain(format!("k·r must be > 0, got {kr}")));
        }
        Ok(Self {
            angular: AngularTable::new(max_degree, p.theta),
            radial: RadialTable::new(kind, max_degree, kr),
            phi: p.phi,
            kr,
        })
    }

    #[inline]
    pub(crate) fn eval(&self, mode: ModeIndex) -> [Complex64; 3] {
        let n = mode.n;
        let z = self.radial.z[n];
        let [at, ap] = angular(mode, &self.angular, self.phi);
        match mode.s {
            1 => [Complex64::new(0.0, 0.0), z * at, z * ap],
            _ => {
                let ma = mode.m.unsigned_abs() as usize;
                let nf = n as f64;
                let e = Complex64::from_polar(mode_prefactor(mode.m, n), mode.m as f64 * self.phi);
                let er = e * z * (nf * (nf + 1.0) / self.kr * self.angular.p(n, ma));
                let t = self.radial.dxz[n] / self.kr;
                [er, t * at, t * ap]
            }
        }
    }
}

/// `F^{(c)}_{smn}(r, θ, φ)` in the frame of `p`.
pub fn svwf(kind: RadialKind, mode: ModeIndex, p: &SphericalPoint, k: f64) -> Result<VectorFieldSample> {
    let basis = WaveBasis::new(kind, mode.n, p, k)?;
    Ok(VectorFieldSample { point: *p, frame: Frame::Local, components: basis.eval(mode) })
}

/// `(k v / sqrt(η)) Σ_j c_j F^{(c)}_j(p)`.
pub fn synthesize_field(
    coeffs: &ModeCoefficients,
    kind: RadialKind,
    p: &SphericalPoint,
    k: f64,
    eta: f64,
    v: Complex64,
) -> Result<VectorFieldSample> {
    let basis = WaveBasis::new(kind, coeffs.max_degree(), p, k)?;
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for (mode, c) in coeffs.iter() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let f = basis.eval(mode);
        for i in 0..3 {
            acc[i] += c * f[i];
        }
    }
    let scale = v * (k / eta.sqrt());
    Ok(VectorFieldSample {
        point: *p,
        frame: Frame::Local,
        components: [acc[0] * scale, acc[1] * scale, acc[2] * scale],
    })
}

/// Far-field pattern `(K_θ, K_φ)` of outgoing coefficients, defined by
/// `Σ c_j F^{(3)}_j → e^{jkr}/(kr) · K(θ, φ)` as `kr → ∞`.
pub fn far_field(coeffs: &ModeCoefficients, theta: f64, phi: f64) -> [Complex64; 2] {
    let table = AngularTable::new(coeffs.max_degree(), theta);
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for (mode, c) in coeffs.iter() {
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let exponent = if mode.s == 1 { mode.n + 1 } else { mode.n };
        let phase = (-J).powu(exponent as u32);
        let [at, ap] = angular(mode, &table, phi);
        out[0] += c * phase * at;
        out[1] += c * phase * ap;
    }
    out
}

/// Coefficients of the same field in a frame rotated by `phi` about `z` and
/// then `theta` about the new `y` axis:
/// `T'_{sμn} = Σ_m e^{jmφ} d^n_{μm}(θ) T_{smn}`.
pub fn rotate_coefficients(coeffs: &ModeCoefficients, phi: f64, theta: f64) -> ModeCoefficients {
    let nmax = coeffs.max_degree();
    let table = WignerTable::new(nmax, theta);
    let mut out = ModeCoefficients::zeros(nmax);
    for n in 1..=nmax {
        let ni = n as i32;
        for s in [1u8, 2] {
            for mu in -ni..=ni {
                let mut acc = Complex64::new(0.0, 0.0);
                for m in -ni..=ni {
                    let c = coeffs.get(ModeIndex { s, m, n });
                    if c != Complex64::new(0.0, 0.0) {
                        acc += Complex64::from_polar(table.get(n, mu, m), m as f64 * phi) * c;
                    }
                }
                out.values[ModeIndex { s, m: mu, n }.slot()] = acc;
            }
        }
    }
    out
}

/// Coefficients, in the reference frame, of an antenna whose own frame is
/// the reference frame turned by `alpha` about `z` and then `beta` about the
/// new `y` axis (so its local `z` axis points along azimuth `alpha`,
/// elevation `beta`).
pub fn orient_coefficients(coeffs: &ModeCoefficients, alpha: f64, beta: f64) -> ModeCoefficients {
    let tilted = rotate_coefficients(coeffs, 0.0, -beta);
    rotate_coefficients(&tilted, -alpha, 0.0)
}

/// Radial weight of the tangential part of a regular wave, and the same for
/// the outgoing wave (used as a conditioning envelope).
fn regular_tangential_factor(s: u8, n: usize, regular: &RadialTable, outward: &RadialTable) -> (Complex64, f64) {
    if s == 1 {
        (regular.z[n], outward.z[n].norm())
    } else {
        (regular.dxz[n] / regular.x, (outward.dxz[n] / outward.x).norm())
    }
}

/// Regular-wave (`c = 1`) expansion coefficients of a field sampled on the
/// sphere `r = r_sample`, from tangential components only.
///
/// `order` is the Gauss–Legendre order in θ; `2 * order` azimuths are used.
pub fn project_field_onto_modes<F>(
    mut sampler: F,
    max_degree: usize,
    r_sample: f64,
    k: f64,
    order: usize,
) -> Result<ModeCoefficients>
where
    F: FnMut(&SphericalPoint) -> Result<VectorFieldSample>,
{
    if max_degree == 0 || max_degree > DEFAULT_MAX_DEGREE {
        return Err(Error::Domain(format!("truncation degree {max_degree} out of range")));
    }
    if order < max_degree + 1 {
        return Err(Error::Domain(format!(
            "quadrature order {order} too low for degree {max_degree}"
        )));
    }
    let kr = k * r_sample;
    let regular = RadialTable::new(RadialKind::Regular, max_degree, kr);
    let outward = RadialTable::new(RadialKind::Outward, max_degree, kr);
    for n in 1..=max_degree {
        let oscillatory = kr > ((n * (n + 1)) as f64).sqrt();
        for s in [1u8, 2] {
            let (f, envelope) = regular_tangential_factor(s, n, &regular, &outward);
            let ratio = f.norm() / envelope;
            if f.norm() < 1e-12 || (oscillatory && ratio < 0.02) {
                return Err(Error::Conditioning { kr, n, factor: f.norm() });
            }
        }
    }

    let quad = SphereQuadrature::new(order, 2 * order);
    let mut acc = ModeCoefficients::zeros(max_degree);
    let wphi = quad.phi_weight();
    for &(theta, wt) in &quad.theta {
        let table = AngularTable::new(max_degree, theta);
        for l in 0..quad.n_phi {
            let phi = quad.phi(l);
            let p = SphericalPoint { r: r_sample, theta, phi };
            let sample = sampler(&p)?;
            let (et, ep) = (sample.components[1], sample.components[2]);
            let w = wt * wphi;
            for mode in modes(max_degree) {
                let [xt, xp] = angular(mode, &table, phi);
                acc.values[mode.slot()] += (xt.conj() * et + xp.conj() * ep) * w;
            }
        }
    }
    for mode in modes(max_degree) {
        let (f, _) = regular_tangential_factor(mode.s, mode.n, &regular, &outward);
        acc.values[mode.slot()] /= f;
    }
    Ok(acc)
}
