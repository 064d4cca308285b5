//! Antenna radiation/reception coefficient vectors.
//!
//! Radiation coefficients are normalized to unit power, `Σ|t_j|² = 1`, which
//! models a lossless, matched antenna and makes channel gains dimensionless
//! port-to-port quantities. Absolute gain values depend on this choice.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::quadrature::SphereQuadrature;
use crate::specfun::{legendre_norm_dtheta, DEFAULT_MAX_DEGREE};
use crate::swe::{far_field, ModeCoefficients, ModeIndex};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AntennaKind {
    HertzianDipole,
    HalfWaveDipole,
    Custom,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AntennaModel {
    pub kind: AntennaKind,
    /// Radius of the smallest enclosing sphere in meters, when known.
    pub radius: Option<f64>,
    pub radiation: ModeCoefficients,
    pub reception: ModeCoefficients,
}

impl AntennaModel {
    /// Builds the model and derives reception coefficients by reciprocity.
    pub fn new(kind: AntennaKind, radius: Option<f64>, radiation: ModeCoefficients) -> Self {
        let reception = reception_from_radiation(&radiation);
        Self { kind, radius, radiation, reception }
    }

    pub fn max_degree(&self) -> usize {
        self.radiation.max_degree()
    }

    /// Enclosing radius, or `N/k` when the physical size is unknown.
    pub fn effective_radius(&self, k: f64) -> f64 {
        self.radius.unwrap_or(self.max_degree() as f64 / k)
    }
}

/// `N = ⌈k a⌉`, at least 1.
pub fn truncation_degree(k: f64, radius: f64) -> usize {
    ((k * radius).ceil() as usize).max(1)
}

fn check_wavenumber(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::Domain(format!("wavenumber must be > 0, got {k}")));
    }
    Ok(())
}

/// z-directed elementary electric dipole: a pure TM₁₀ mode.
pub fn hertzian_dipole_coefficients(k: f64) -> Result<AntennaModel> {
    check_wavenumber(k)?;
    let mut t = ModeCoefficients::zeros(1);
    t.set(ModeIndex::new(2, 0, 1)?, Complex64::new(1.0, 0.0))?;
    Ok(AntennaModel::new(AntennaKind::HertzianDipole, Some(0.0), t))
}

/// z-directed, center-fed half-wave dipole.
///
/// The classical far field `E_θ ∝ cos(π/2 · cos θ) / sin θ` is projected on
/// the far-field patterns of the TM, `m = 0` modes. Only odd degrees survive;
/// the truncation is `max(⌈k λ/4⌉, 5)`; at degree 3 the
/// omitted n = 5 term still carries about 0.1% of the pattern.
pub fn half_wave_dipole_coefficients(k: f64) -> Result<AntennaModel> {
    check_wavenumber(k)?;
    let nmax = truncation_degree(k, PI / (2.0 * k)).max(5);
    half_wave_dipole_with_degree(k, nmax)
}

/// Half-wave dipole projected up to an explicit degree (convergence studies).
pub fn half_wave_dipole_with_degree(k: f64, nmax: usize) -> Result<AntennaModel> {
    check_wavenumber(k)?;
    let radius = PI / (2.0 * k);
    if nmax < truncation_degree(k, radius) || nmax > DEFAULT_MAX_DEGREE {
        return Err(Error::Domain(format!("degree {nmax} below ⌈ka⌉ or above the cap")));
    }
    let quad = SphereQuadrature::new(96, 1);
    let pattern = |theta: f64| {
        let s = theta.sin();
        if s < 1e-12 {
            0.0
        } else {
            (PI / 2.0 * theta.cos()).cos() / s
        }
    };
    let mut t = ModeCoefficients::zeros(nmax);
    for n in (1..=nmax).step_by(2) {
        let nf = n as f64;
        let mut integral = 0.0;
        for &(theta, w) in &quad.theta {
            integral += w * legendre_norm_dtheta(n, 0, theta)? * pattern(theta);
        }
        // ∫ conj(K_n)·(f θ̂) dΩ with K_n = (-j)^n X_{2,0,n}
        let value = Complex64::new(0.0, 1.0).powu(n as u32) * (2.0 * PI * integral / (2.0 * PI * nf * (nf + 1.0)).sqrt());
        t.set(ModeIndex::new(2, 0, n)?, value)?;
    }
    // Global phase: TM₁₀ coefficient real and positive, as for the Hertzian dipole.
    let lead = t.get(ModeIndex::new(2, 0, 1)?);
    let t = t.scaled(lead.conj() / lead.norm()).normalized()?;
    Ok(AntennaModel::new(AntennaKind::HalfWaveDipole, Some(radius), t))
}

/// `r_{smn} = (-1)^m t_{s,-m,n}`.
pub fn reception_from_radiation(t: &ModeCoefficients) -> ModeCoefficients {
    let mut r = ModeCoefficients::zeros(t.max_degree());
    for (mode, _) in t.iter() {
        let mirrored = ModeIndex { m: -mode.m, ..mode };
        let sign = if mode.m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        // Same degree, so always in range.
        r.set(mode, t.get(mirrored) * sign).unwrap();
    }
    r
}

#[derive(Debug, Deserialize)]
struct CoefficientRow {
    s: i64,
    m: i64,
    n: i64,
    re: f64,
    im: f64,
}

fn declared_degree(text: &str) -> Result<usize> {
    let mut found = None;
    for line in text.lines() {
        let Some(rest) = line.trim().strip_prefix('#') else { continue };
        let Some(value) = rest.trim().strip_prefix("N=").or_else(|| rest.trim().strip_prefix("N =")) else {
            continue;
        };
        let n: usize = value
            .trim()
            .parse()
            .map_err(|_| Error::Coefficients(format!("bad truncation declaration `{}`", line.trim())))?;
        if found.replace(n).is_some() {
            return Err(Error::Coefficients("truncation declared more than once".into()));
        }
    }
    let n = found.ok_or_else(|| Error::Coefficients("missing `# N=<int>` declaration".into()))?;
    if n == 0 || n > DEFAULT_MAX_DEGREE {
        return Err(Error::Coefficients(format!("declared N = {n} outside 1..={DEFAULT_MAX_DEGREE}")));
    }
    Ok(n)
}

/// Parses a `s,m,n,re,im` coefficient table with a `# N=<int>` line.
///
/// The vector is scaled to unit power unless `raw` is set.
pub fn load_custom_coefficients(text: &str, raw: bool) -> Result<AntennaModel> {
    let nmax = declared_degree(text)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["s", "m", "n", "re", "im"] {
        return Err(Error::Coefficients(format!(
            "expected header `s,m,n,re,im`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut t = ModeCoefficients::zeros(nmax);
    let mut seen = vec![false; t.len()];
    for (line, row) in reader.deserialize::<CoefficientRow>().enumerate() {
        let row = row?;
        let (s, m, n) = (row.s, row.m, row.n);
        let mode = u8::try_from(s)
            .ok()
            .zip(i32::try_from(m).ok())
            .zip(usize::try_from(n).ok())
            .ok_or_else(|| Error::Index(format!("row {}: ({s}, {m}, {n}) is not a mode", line + 1)))
            .and_then(|((s, m), n)| ModeIndex::new(s, m, n))
            .map_err(|e| match e {
                Error::Index(msg) => Error::Index(format!("row {}: {msg}", line + 1)),
                other => other,
            })?;
        if mode.n > nmax {
            return Err(Error::Index(format!("row {}: degree {} exceeds declared N = {nmax}", line + 1, mode.n)));
        }
        if !row.re.is_finite() || !row.im.is_finite() {
            return Err(Error::Coefficients(format!("row {}: non-finite coefficient", line + 1)));
        }
        let slot = mode.index() - 1;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(Error::Coefficients(format!("row {}: duplicate mode ({s}, {m}, {n})", line + 1)));
        }
        t.set(mode, Complex64::new(row.re, row.im))?;
    }
    let power = t.power();
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::Coefficients("coefficient vector has zero power".into()));
    }
    let t = if raw { t } else { t.normalized()? };
    Ok(AntennaModel::new(AntennaKind::Custom, None, t))
}

/// Writes the nonzero coefficients in the table format read by
/// [`load_custom_coefficients`].
pub fn write_coefficients_csv(t: &ModeCoefficients) -> String {
    let mut out = format!("# N={}\ns,m,n,re,im\n", t.max_degree());
    for (mode, c) in t.iter() {
        if c.norm_sqr() > 0.0 {
            // `{:?}` prints the shortest representation that round-trips.
            let _ = writeln!(out, "{},{},{},{:?},{:?}", mode.s, mode.m, mode.n, c.re, c.im);
        }
    }
    out
}

/// Directivity `4π max|K|² / ∫|K|² dΩ` of the far-field pattern.
pub fn directivity(t: &ModeCoefficients) -> f64 {
    let nmax = t.max_degree();
    let quad = SphereQuadrature::for_degree(nmax + 1);
    let intensity = |theta: f64, phi: f64| {
        let [a, b] = far_field(t, theta, phi);
        a.norm_sqr() + b.norm_sqr()
    };
    let total: f64 = quad.nodes().map(|(th, ph, w)| w * intensity(th, ph)).sum();
    let mut peak: f64 = 0.0;
    let (n_theta, n_phi) = (721, 144);
    for i in 0..=n_theta {
        let theta = PI * i as f64 / n_theta as f64;
        for l in 0..n_phi {
            peak = peak.max(intensity(theta, 2.0 * PI * l as f64 / n_phi as f64));
        }
    }
    4.0 * PI * peak / total
}
