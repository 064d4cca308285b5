//! Far-field channel between two antennas described by spherical-wave
//! coefficients, and the MIMO/rate utilities built on it.
//!
//! The gain of a link is
//!
//! ```text
//! h = e^{jkd}/(kd) · rᵀ G t
//! G_pq = ½ a(n,ν) e^{-jρφ} Σ_μ e^{jμ(φ-α)} b(μ) d^n_{μm}(-β)
//! a(n,ν) = j^{ν-n-1} √((2n+1)(2ν+1)) / 2
//! b(μ) = (-1)^{s+σ} d^n_{-1,μ}(θ) d^ν_{-1,ρ}(θ) + d^n_{1,μ}(θ) d^ν_{1,ρ}(θ)
//! ```
//!
//! with `q = (s, m, n)` a transmit mode, `p = (σ, ρ, ν)` a receive mode,
//! `(α, β)` the transmit normal and `(φ, θ)` the link direction. Receive
//! antennas keep their local `z` axis along the global one.

use std::f64::consts::PI;
use std::fmt::Write as _;

use log::warn;
use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use serde::Serialize;

use crate::antenna::AntennaModel;
use crate::error::{Error, Result};
use crate::specfun::WignerTable;
use crate::swe::{mode_count, modes, ModeCoefficients};

const J: Complex64 = Complex64::new(0.0, 1.0);

/// Below this value of `k d` the far-field gain is reported with a warning.
pub const FAR_FIELD_KD: f64 = 20.0;

pub const FREE_SPACE_IMPEDANCE: f64 = 376.730313668;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Medium {
    pub k: f64,
    pub eta: f64,
}

impl Medium {
    pub fn new(k: f64, eta: f64) -> Result<Self> {
        if !(k > 0.0 && k.is_finite()) || !(eta > 0.0 && eta.is_finite()) {
            return Err(Error::Domain(format!("medium needs k > 0 and eta > 0, got k={k}, eta={eta}")));
        }
        Ok(Self { k, eta })
    }

    pub fn free_space(wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::Domain(format!("wavelength must be > 0, got {wavelength}")));
        }
        Self::new(2.0 * PI / wavelength, FREE_SPACE_IMPEDANCE)
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k
    }
}

/// Angles and distance of one transmit/receive pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkGeometry {
    alpha: f64,
    beta: f64,
    phi: f64,
    theta: f64,
    d: f64,
}

impl LinkGeometry {
    /// Azimuth of the transmit normal.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Elevation (polar angle) of the transmit normal.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Azimuth of the displacement from transmitter to receiver.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Polar angle of the displacement.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn distance(&self) -> f64 {
        self.d
    }

    pub fn normal(&self) -> Vector3<f64> {
        unit_vector(self.beta, self.alpha)
    }

    /// `rx_pos - tx_pos`.
    pub fn displacement(&self) -> Vector3<f64> {
        unit_vector(self.theta, self.phi) * self.d
    }
}

fn unit_vector(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// `(polar, azimuth)` of a nonzero vector, azimuth 0 on the z axis.
fn angles_of(v: &Vector3<f64>) -> (f64, f64) {
    let rho = v.x.hypot(v.y);
    let theta = rho.atan2(v.z);
    if rho == 0.0 {
        return (theta, 0.0);
    }
    let phi = v.y.atan2(v.x).rem_euclid(2.0 * PI);
    // rem_euclid can round a tiny negative angle up to exactly 2π
    (theta, if phi >= 2.0 * PI { 0.0 } else { phi })
}

pub fn geometry_from_positions(
    tx_pos: &Vector3<f64>,
    tx_normal: &Vector3<f64>,
    rx_pos: &Vector3<f64>,
) -> Result<LinkGeometry> {
    let disp = rx_pos - tx_pos;
    let d = disp.norm();
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::Geometry(format!("transmitter and receiver coincide at {tx_pos:?}")));
    }
    let len = tx_normal.norm();
    if !((len - 1.0).abs() <= 1e-9) {
        return Err(Error::Geometry(format!("transmit normal must be a unit vector, |n| = {len}")));
    }
    let (theta, phi) = angles_of(&disp);
    let (beta, alpha) = angles_of(tx_normal);
    Ok(LinkGeometry { alpha, beta, phi, theta, d })
}

/// Unit vector with azimuth `alpha` and polar angle `beta`.
pub fn normal_from_angles(alpha: f64, beta: f64) -> Vector3<f64> {
    unit_vector(beta, alpha)
}

fn a_factor(n: usize, nu: usize) -> Complex64 {
    let scale = (((2 * n + 1) * (2 * nu + 1)) as f64).sqrt() / 2.0;
    J.powi(nu as i32 - n as i32 - 1) * scale
}

/// `G` with rows indexed by receive modes (degree ≤ `rx_degree`) and
/// columns by transmit modes (degree ≤ `tx_degree`), both in the 1-based
/// `j` order shifted to 0.
pub fn g_matrix(geom: &LinkGeometry, tx_degree: usize, rx_degree: usize) -> DMatrix<Complex64> {
    let mut g = DMatrix::zeros(mode_count(rx_degree), mode_count(tx_degree));
    let nmax = tx_degree.max(rx_degree);
    let dt = WignerTable::new(nmax, geom.theta);
    let db = WignerTable::new(tx_degree, -geom.beta);

    // The μ-sum only depends on the transmit mode and on the ±1 row of the
    // receive-side factor, so it is done once per (n, m).
    let mut sums = vec![[Complex64::new(0.0, 0.0); 2]; mode_count(tx_degree) / 2 + 1];
    for n in 1..=tx_degree {
        let ni = n as i32;
        for m in -ni..=ni {
            let mut lo = Complex64::new(0.0, 0.0);
            let mut hi = Complex64::new(0.0, 0.0);
            for mu in -ni..=ni {
                let w = Complex64::from_polar(db.get(n, mu, m), mu as f64 * (geom.phi - geom.alpha));
                lo += w * dt.get(n, -1, mu);
                hi += w * dt.get(n, 1, mu);
            }
            sums[lm_slot(n, m)] = [lo, hi];
        }
    }

    for q in modes(tx_degree) {
        let [lo, hi] = sums[lm_slot(q.n, q.m)];
        for p in modes(rx_degree) {
            let sign = if (q.s + p.s) % 2 == 0 { 1.0 } else { -1.0 };
            let bracket = lo * (sign * dt.get(p.n, -1, p.m)) + hi * dt.get(p.n, 1, p.m);
            let phase = Complex64::from_polar(0.5, -(p.m as f64) * geom.phi);
            g[(p.index() - 1, q.index() - 1)] = a_factor(q.n, p.n) * phase * bracket;
        }
    }
    g
}

fn lm_slot(n: usize, m: i32) -> usize {
    ((n * (n + 1)) as i32 + m - 1) as usize
}

/// `e^{jkd}/(kd)`.
pub fn distance_factor(kd: f64) -> Complex64 {
    Complex64::from_polar(1.0 / kd, kd)
}

/// Far-field port-to-port gain from `tx` to `rx`.
pub fn channel_gain(tx: &AntennaModel, rx: &AntennaModel, geom: &LinkGeometry, medium: &Medium) -> Complex64 {
    let kd = medium.k * geom.d;
    if kd < FAR_FIELD_KD {
        warn!("k*d = {kd:.3} is below {FAR_FIELD_KD}; the far-field channel formula is inaccurate here");
    }
    let g = g_matrix(geom, tx.max_degree(), rx.max_degree());
    distance_factor(kd) * bilinear(&rx.reception, &g, &tx.radiation)
}

fn bilinear(r: &ModeCoefficients, g: &DMatrix<Complex64>, t: &ModeCoefficients) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, &rp) in r.values().iter().enumerate() {
        if rp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut row = Complex64::new(0.0, 0.0);
        for (q, &tq) in t.values().iter().enumerate() {
            row += g[(p, q)] * tq;
        }
        acc += rp * row;
    }
    acc
}

/// `log₂(1 + P_t |h|² / σ²)` in bit/s/Hz. `noise_power` must be positive.
pub fn achievable_rate(h: Complex64, tx_power: f64, noise_power: f64) -> f64 {
    debug_assert!(noise_power > 0.0);
    (tx_power * h.norm_sqr() / noise_power).ln_1p() / std::f64::consts::LN_2
}

#[derive(Clone, Debug)]
pub struct TxElement {
    pub position: Vector3<f64>,
    /// Unit vector along the antenna's local z axis.
    pub normal: Vector3<f64>,
    pub antenna: AntennaModel,
}

#[derive(Clone, Debug)]
pub struct RxElement {
    pub position: Vector3<f64>,
    pub antenna: AntennaModel,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub medium: Medium,
    pub tx: Vec<TxElement>,
    pub rx: Vec<RxElement>,
    /// Watts.
    pub tx_power: f64,
    /// Watts.
    pub noise_power: f64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if self.tx.is_empty() || self.rx.is_empty() {
            return Err(Error::Geometry("scenario needs at least one transmit and one receive element".into()));
        }
        if !(self.tx_power >= 0.0 && self.tx_power.is_finite()) {
            return Err(Error::Domain(format!("transmit power must be finite and >= 0, got {}", self.tx_power)));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(Error::Domain(format!("noise power must be > 0, got {}", self.noise_power)));
        }
        Ok(())
    }

    pub fn rate(&self, h: Complex64) -> f64 {
        achievable_rate(h, self.tx_power, self.noise_power)
    }
}

/// `N_r × N_t`; entry `(j, i)` is the gain from transmit element `i` to
/// receive element `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelMatrix {
    pub entries: DMatrix<Complex64>,
}

impl ChannelMatrix {
    pub fn rx_count(&self) -> usize {
        self.entries.nrows()
    }

    pub fn tx_count(&self) -> usize {
        self.entries.ncols()
    }

    /// CSV with header `rx_index,tx_index,re,im`, row-major over receivers.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("rx_index,tx_index,re,im\n");
        for j in 0..self.rx_count() {
            for i in 0..self.tx_count() {
                let h = self.entries[(j, i)];
                let _ = writeln!(out, "{j},{i},{:e},{:e}", h.re, h.im);
            }
        }
        out
    }
}

pub fn mimo_matrix(scenario: &Scenario) -> Result<ChannelMatrix> {
    scenario.validate()?;
    let mut entries = DMatrix::zeros(scenario.rx.len(), scenario.tx.len());
    for (i, tx) in scenario.tx.iter().enumerate() {
        for (j, rx) in scenario.rx.iter().enumerate() {
            let geom = geometry_from_positions(&tx.position, &tx.normal, &rx.position)
                .map_err(|e| Error::Geometry(format!("tx {i} -> rx {j}: {e}")))?;
            entries[(j, i)] = channel_gain(&tx.antenna, &rx.antenna, &geom, &scenario.medium);
        }
    }
    Ok(ChannelMatrix { entries })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub param: f64,
    #[serde(skip)]
    pub h: Complex64,
    pub re_h: f64,
    pub im_h: f64,
    pub abs_h2: f64,
    pub rate_bps_hz: f64,
}

impl SweepRow {
    fn new(param: f64, h: Complex64, rate: f64) -> Self {
        Self { param, h, re_h: h.re, im_h: h.im, abs_h2: h.norm_sqr(), rate_bps_hz: rate }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub baseline: SweepRow,
}

impl SweepTable {
    /// Row with the highest rate (first one on ties).
    pub fn peak(&self) -> &SweepRow {
        self.rows
            .iter()
            .fold(None::<&SweepRow>, |best, r| match best {
                Some(b) if b.rate_bps_hz >= r.rate_bps_hz => Some(b),
                _ => Some(r),
            })
            .unwrap_or(&self.baseline)
    }

    /// `(peak rate - baseline rate) / baseline rate`.
    pub fn improvement(&self) -> f64 {
        (self.peak().rate_bps_hz - self.baseline.rate_bps_hz) / self.baseline.rate_bps_hz
    }

    /// Rescales the sweep parameter, e.g. radians to degrees.
    pub fn map_param(mut self, f: impl Fn(f64) -> f64) -> Self {
        for r in &mut self.rows {
            r.param = f(r.param);
        }
        self.baseline.param = f(self.baseline.param);
        self
    }

    /// CSV with header `param,re_h,im_h,abs_h2,rate_bps_hz`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("param,re_h,im_h,abs_h2,rate_bps_hz\n");
        for r in &self.rows {
            let _ = writeln!(out, "{:e},{:e},{:e},{:e},{:e}", r.param, r.re_h, r.im_h, r.abs_h2, r.rate_bps_hz);
        }
        out
    }
}

fn first_link(scenario: &Scenario) -> Result<(&TxElement, &RxElement)> {
    scenario.validate()?;
    Ok((&scenario.tx[0], &scenario.rx[0]))
}

/// Rotates the first transmit element through `betas` at fixed azimuth
/// `alpha` (radians). The baseline is `β = 0`.
pub fn sweep_orientation(scenario: &Scenario, alpha: f64, betas: &[f64]) -> Result<SweepTable> {
    let (tx, rx) = first_link(scenario)?;
    let eval = |beta: f64| -> Result<SweepRow> {
        let normal = normal_from_angles(alpha, beta);
        let geom = geometry_from_positions(&tx.position, &normal, &rx.position)?;
        let h = channel_gain(&tx.antenna, &rx.antenna, &geom, &scenario.medium);
        Ok(SweepRow::new(beta, h, scenario.rate(h)))
    };
    let rows = betas.iter().map(|&b| eval(b)).collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows, baseline: eval(0.0)? })
}

/// Moves the first transmit element by each offset (meters) along `axis`
/// with its normal along `+z`. The baseline is offset 0.
pub fn sweep_position(scenario: &Scenario, axis: &Vector3<f64>, offsets: &[f64]) -> Result<SweepTable> {
    let (tx, rx) = first_link(scenario)?;
    let len = axis.norm();
    if !(len > 0.0) || !len.is_finite() {
        return Err(Error::Geometry("sweep axis must be a nonzero vector".into()));
    }
    let dir = axis / len;
    let normal = Vector3::z();
    let eval = |offset: f64| -> Result<SweepRow> {
        let geom = geometry_from_positions(&(tx.position + dir * offset), &normal, &rx.position)?;
        let h = channel_gain(&tx.antenna, &rx.antenna, &geom, &scenario.medium);
        Ok(SweepRow::new(offset, h, scenario.rate(h)))
    };
    let rows = offsets.iter().map(|&o| eval(o)).collect::<Result<Vec<_>>>()?;
    Ok(SweepTable { rows, baseline: eval(0.0)? })
}

/// `start, start + step, …` up to and including `stop` (with a small
/// tolerance so that e.g. `0..=180` in steps of 1 has 181 points).
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || !step.is_finite() {
        return Err(Error::Domain(format!("grid needs finite bounds and step > 0, got {start}..{stop} step {step}")));
    }
    if stop < start {
        return Err(Error::Domain(format!("grid stop {stop} is below start {start}")));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| start + i as f64 * step).collect())
}
