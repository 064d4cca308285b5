//! Brute-force received signal: evaluate the transmitted field around the
//! receiver, project it onto regular waves, keep the incoming half and
//! contract with the reception coefficients.
//!
//! Nothing here uses rotation or translation coefficients, so it checks
//! [`crate::channel::channel_gain`] independently.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Rotation3, Vector3};
use num_complex::Complex64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::antenna::AntennaModel;
use crate::channel::{channel_gain, geometry_from_positions, LinkGeometry, Medium};
use crate::error::{Error, Result};
use crate::specfun::RadialKind;
use crate::swe::{project_field_onto_modes, synthesize_field, Frame, SphericalPoint, VectorFieldSample};

/// Rigid change of coordinates, `x_new = rotation · x_old + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl FrameTransform {
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        let ortho = (rotation.transpose() * rotation - Matrix3::identity()).abs().max();
        if !(ortho <= 1e-12) || !((rotation.determinant() - 1.0).abs() <= 1e-12) {
            return Err(Error::Geometry(format!(
                "not a proper rotation (|RᵀR - I| = {ortho:e}, det = {})",
                rotation.determinant()
            )));
        }
        if !translation.iter().all(|x| x.is_finite()) {
            return Err(Error::Geometry("translation must be finite".into()));
        }
        Ok(Self { rotation, translation })
    }

    pub fn identity() -> Self {
        Self { rotation: Matrix3::identity(), translation: Vector3::zeros() }
    }

    /// Coordinates after turning the axes by `angle` about `axis` (a unit
    /// vector of the current frame).
    pub fn rotate_axes(axis: &Vector3<f64>, angle: f64) -> Self {
        let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(*axis), angle);
        Self { rotation: r.into_inner().transpose(), translation: Vector3::zeros() }
    }

    /// Coordinates after moving the origin to `offset` (current frame).
    pub fn shift_origin(offset: &Vector3<f64>) -> Self {
        Self { rotation: Matrix3::identity(), translation: -offset }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Self) -> Self {
        Self {
            rotation: next.rotation * self.rotation,
            translation: next.rotation * self.translation + next.translation,
        }
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation.transpose();
        Self { rotation: rt, translation: -(rt * self.translation) }
    }

    pub fn apply_point(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * x + self.translation
    }

    pub fn apply_vector(&self, v: &Vector3<Complex64>) -> Vector3<Complex64> {
        self.rotation.map(|a| Complex64::new(a, 0.0)) * v
    }
}

/// Transmitter-frame to receiver-frame coordinates, built step by step:
/// undo the transmit tilt (−β about y, −α about z) to reach global axes,
/// point z along the link (φ about z, θ about y), move the origin by `d`
/// along it, and turn back to global axes (−θ about y, −φ about z).
pub fn tx_to_rx_frame(geom: &LinkGeometry) -> FrameTransform {
    let y = Vector3::y();
    let z = Vector3::z();
    [
        FrameTransform::rotate_axes(&y, -geom.beta()),
        FrameTransform::rotate_axes(&z, -geom.alpha()),
        FrameTransform::rotate_axes(&z, geom.phi()),
        FrameTransform::rotate_axes(&y, geom.theta()),
        FrameTransform::shift_origin(&(z * geom.distance())),
        FrameTransform::rotate_axes(&y, -geom.theta()),
        FrameTransform::rotate_axes(&z, -geom.phi()),
    ]
    .iter()
    .fold(FrameTransform::identity(), |acc, step| acc.then(step))
}

/// The same transform written down directly: the transmit axes are
/// `Rz(α) Ry(β)` in global coordinates and the receiver sits at `d`.
pub fn tx_to_rx_frame_direct(geom: &LinkGeometry) -> FrameTransform {
    let axes = Rotation3::from_axis_angle(&Vector3::z_axis(), geom.alpha())
        * Rotation3::from_axis_angle(&Vector3::y_axis(), geom.beta());
    FrameTransform { rotation: axes.into_inner(), translation: -geom.displacement() }
}

/// `max(λ/2, 1.1 a_rx)`.
pub fn default_sample_radius(rx: &AntennaModel, medium: &Medium) -> f64 {
    (medium.wavelength() / 2.0).max(1.1 * rx.effective_radius(medium.k))
}

/// Gauss–Legendre order for a sampling sphere of radius `r_sample`.
pub fn default_quadrature_order(rx: &AntennaModel, medium: &Medium, r_sample: f64) -> usize {
    rx.max_degree() + (medium.k * r_sample).ceil() as usize + 20
}

/// Received port signal `w` for excitation `v`.
pub fn oracle_received_signal(
    tx: &AntennaModel,
    rx: &AntennaModel,
    geom: &LinkGeometry,
    medium: &Medium,
    v: Complex64,
    r_sample: f64,
    quadrature_order: usize,
) -> Result<Complex64> {
    let d = geom.distance();
    if !(r_sample > 0.0) || r_sample >= d {
        return Err(Error::Domain(format!("sampling radius {r_sample} must lie in (0, d = {d})")));
    }
    if let Some(a) = rx.radius {
        if r_sample < a {
            return Err(Error::Domain(format!("sampling radius {r_sample} does not enclose the receiver (a = {a})")));
        }
    }
    let k = medium.k;
    let to_rx = tx_to_rx_frame(geom);
    let to_tx = to_rx.inverse();
    let sampler = |p: &SphericalPoint| -> Result<VectorFieldSample> {
        let x_tx = to_tx.apply_point(&p.to_cartesian());
        let q = SphericalPoint::from_cartesian(x_tx)?;
        let e_tx = synthesize_field(&tx.radiation, RadialKind::Outward, &q, k, medium.eta, v)?.to_cartesian();
        Ok(VectorFieldSample::from_cartesian(*p, Frame::Receive, &to_rx.apply_vector(&e_tx)))
    };
    let regular = project_field_onto_modes(sampler, rx.max_degree(), r_sample, k, quadrature_order)?;
    // Regular waves are the mean of outgoing and incoming ones; the incoming
    // half, without the k/√η field prefactor, is what the port sees.
    let inward = regular.scaled(Complex64::new(medium.eta.sqrt() / (2.0 * k), 0.0));
    Ok(inward.iter().map(|(mode, q)| q * rx.reception.get(mode)).sum())
}

/// `w / v` with default sampling, retrying at ±20% radius if the first
/// sphere is badly conditioned.
pub fn oracle_gain(tx: &AntennaModel, rx: &AntennaModel, geom: &LinkGeometry, medium: &Medium) -> Result<Complex64> {
    let base = default_sample_radius(rx, medium);
    let mut last = None;
    for factor in [1.0, 1.2, 0.8] {
        let r = base * factor;
        if rx.radius.is_some_and(|a| r < a) {
            continue;
        }
        let order = default_quadrature_order(rx, medium, r);
        match oracle_received_signal(tx, rx, geom, medium, Complex64::new(1.0, 0.0), r, order) {
            Err(e @ Error::Conditioning { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.unwrap_or_else(|| Error::Domain("no admissible sampling radius".into())))
}

/// `10 log₁₀(Σ|test − ref|² / Σ|ref|²)`, floored at −300 dB.
pub fn nmse(reference: &[Complex64], test: &[Complex64]) -> Result<f64> {
    if reference.len() != test.len() {
        return Err(Error::Domain(format!("shape mismatch: {} vs {}", reference.len(), test.len())));
    }
    let den: f64 = reference.iter().map(|z| z.norm_sqr()).sum();
    if !(den > 0.0) {
        return Err(Error::Domain("reference has zero energy".into()));
    }
    let num: f64 = reference.iter().zip(test).map(|(r, t)| (t - r).norm_sqr()).sum();
    Ok((10.0 * (num / den).log10()).max(-300.0))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ValidationTrial {
    pub kd: f64,
    #[serde(skip)]
    pub h_formula: Complex64,
    #[serde(skip)]
    pub h_oracle: Complex64,
    pub abs_h_formula: f64,
    pub abs_h_oracle: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub trials: Vec<ValidationTrial>,
    pub max_rel_err: f64,
    pub nmse_db: f64,
}

impl ValidationReport {
    /// One `kd,abs_h_formula,abs_h_oracle,rel_err` line per trial, then a
    /// `# summary` line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kd,abs_h_formula,abs_h_oracle,rel_err\n");
        for t in &self.trials {
            out.push_str(&format!("{:e},{:e},{:e},{:e}\n", t.kd, t.abs_h_formula, t.abs_h_oracle, t.rel_err));
        }
        out.push_str(&format!("# summary trials={} max_rel_err={:e} nmse_db={:.3}\n", self.trials.len(), self.max_rel_err, self.nmse_db));
        out
    }
}

pub fn compare(tx: &AntennaModel, rx: &AntennaModel, geom: &LinkGeometry, medium: &Medium) -> Result<ValidationTrial> {
    let h_formula = channel_gain(tx, rx, geom, medium);
    let h_oracle = oracle_gain(tx, rx, geom, medium)?;
    Ok(ValidationTrial {
        kd: medium.k * geom.distance(),
        h_formula,
        h_oracle,
        abs_h_formula: h_formula.norm(),
        abs_h_oracle: h_oracle.norm(),
        rel_err: (h_formula - h_oracle).norm() / h_oracle.norm(),
    })
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    let z: f64 = rng.random_range(-1.0..1.0);
    let phi: f64 = rng.random_range(0.0..2.0 * PI);
    let rho = (1.0 - z * z).sqrt();
    Vector3::new(rho * phi.cos(), rho * phi.sin(), z)
}

/// Random link directions and transmit orientations with `k d` drawn
/// uniformly from `kd_range`.
pub fn random_geometries(count: usize, seed: u64, medium: &Medium, kd_range: (f64, f64)) -> Result<Vec<LinkGeometry>> {
    let (lo, hi) = kd_range;
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::Domain(format!("invalid kd range {lo}..{hi}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let kd = if hi > lo { rng.random_range(lo..hi) } else { lo };
            let dir = random_unit(&mut rng);
            let normal = random_unit(&mut rng);
            geometry_from_positions(&Vector3::zeros(), &normal, &(dir * (kd / medium.k)))
        })
        .collect()
}

pub fn run_validation(
    tx: &AntennaModel,
    rx: &AntennaModel,
    medium: &Medium,
    geometries: &[LinkGeometry],
) -> Result<ValidationReport> {
    let trials = geometries.iter().map(|g| compare(tx, rx, g, medium)).collect::<Result<Vec<_>>>()?;
    let max_rel_err = trials.iter().map(|t| t.rel_err).fold(0.0, f64::max);
    let reference: Vec<Complex64> = trials.iter().map(|t| t.h_oracle).collect();
    let test: Vec<Complex64> = trials.iter().map(|t| t.h_formula).collect();
    let nmse_db = if trials.is_empty() { f64::NEG_INFINITY } else { nmse(&reference, &test)? };
    Ok(ValidationReport { trials, max_rel_err, nmse_db })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nmse_reference_values() {
        let a = [Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.1)];
        assert_eq!(nmse(&a, &a).unwrap(), -300.0);
        let b: Vec<Complex64> = a.iter().map(|z| z * 2.0).collect();
        assert!(nmse(&a, &b).unwrap().abs() < 1e-12);
        assert!(nmse(&[Complex64::new(0.0, 0.0)], &[Complex64::new(1.0, 0.0)]).is_err());
        assert!(nmse(&a, &a[..1]).is_err());
    }

    #[test]
    fn trivial_transform_is_translation() {
        let g = geometry_from_positions(&Vector3::zeros(), &Vector3::z(), &Vector3::new(0.0, 0.0, 4.0)).unwrap();
        let t = tx_to_rx_frame(&g);
        assert!((t.rotation - Matrix3::identity()).abs().max() < 1e-15);
        assert!((t.translation - Vector3::new(0.0, 0.0, -4.0)).norm() < 1e-15);
    }

    #[test]
    fn rejects_improper_rotation() {
        let mirror = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(FrameTransform::new(mirror, Vector3::zeros()).is_err());
        assert!(FrameTransform::new(Matrix3::identity() * 2.0, Vector3::zeros()).is_err());
    }
}
