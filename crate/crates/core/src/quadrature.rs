//! Product quadrature on the unit sphere: Gauss–Legendre in `cos θ`,
//! uniform trapezoid in `φ`.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    /// `(θ, w)` pairs; `w` already contains the `sin θ dθ` measure.
    pub theta: Vec<(f64, f64)>,
    pub n_phi: usize,
}

impl SphereQuadrature {
    /// `order` Gauss–Legendre nodes in θ and `n_phi` equispaced azimuths.
    pub fn new(order: usize, n_phi: usize) -> Self {
        let order = NonZeroUsize::new(order.max(1)).unwrap();
        let rule = GaussLegendre::new(order);
        let mut theta: Vec<(f64, f64)> = rule
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| (x.clamp(-1.0, 1.0).acos(), w))
            .collect();
        theta.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self { theta, n_phi: n_phi.max(1) }
    }

    /// Exact for band-limited integrands of degree ≤ `2 * max_degree`.
    pub fn for_degree(max_degree: usize) -> Self {
        Self::new(2 * max_degree + 2, 4 * max_degree + 4)
    }

    pub fn phi_weight(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    pub fn phi(&self, l: usize) -> f64 {
        2.0 * PI * l as f64 / self.n_phi as f64
    }

    /// All `(θ, φ, weight)` nodes.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let wphi = self.phi_weight();
        self.theta.iter().flat_map(move |&(t, w)| {
            (0..self.n_phi).map(move |l| (t, self.phi(l), w * wphi))
        })
    }

    pub fn len(&self) -> usize {
        self.theta.len() * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
