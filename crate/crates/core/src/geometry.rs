//! Extrinsic geometry of a star-shaped hypersurface in `H^n` written as a
//! radial graph `theta -> (u(theta), theta)` in the model `dr^2 + sinh^2 r h`.
//!
//! With `v = log tanh(u/2)` (so `dv/du = 1/sinh u`) the shape operator is
//!
//! ```text
//! a = rho/(W rho') Id - (1/(W rho')) h~^{-1} Hess_h v,   W = sqrt(1 + |dv|_h^2)
//! ```
//!
//! For axisymmetric `v(phi)` the Hessian of the round metric has eigenvalue
//! `v''` in the polar direction and `cot(phi) v'` (multiplicity `n - 2`) in the
//! others, and `h~^{phi phi} = 1/W^2`, giving the two principal curvatures
//! computed below. `xi` is the inward unit normal, so spheres have `H > 0`.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::{AxisymField, SphereGrid};

/// A star-shaped hypersurface given by nodal values of the radial function.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGraph {
    grid: SphereGrid,
    u: AxisymField,
}

impl RadialGraph {
    pub fn new(grid: SphereGrid, u: AxisymField) -> Result<Self> {
        if u.len() != grid.len() {
            return Err(LabError::LengthMismatch { expected: grid.len(), actual: u.len() });
        }
        if let Some(node) = u.iter().position(|&x| !(x.is_finite() && x > 0.0)) {
            return Err(LabError::Geometry {
                node,
                reason: format!("radial function must be finite and positive, got {}", u[node]),
            });
        }
        Ok(Self { grid, u })
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub fn u(&self) -> &AxisymField {
        &self.u
    }

    pub fn dimension(&self) -> usize {
        self.grid.dimension()
    }

    pub fn with_u(&self, u: AxisymField) -> Result<Self> {
        Self::new(self.grid.clone(), u)
    }
}

/// Pointwise geometry of a radial graph. Every field is nodal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryFields {
    pub n: usize,
    pub rho: AxisymField,
    pub rho_dot: AxisymField,
    pub v: AxisymField,
    pub dv: AxisymField,
    pub d2v: AxisymField,
    pub w: AxisymField,
    pub kappa_rad: AxisymField,
    pub kappa_ang: AxisymField,
    pub h: AxisymField,
    pub sigma2: AxisymField,
    pub p: AxisymField,
    /// Area density `rho'^{n-1} W` relative to the round measure.
    pub d_sigma: AxisymField,
}

impl GeometryFields {
    /// `|a|^2 = H^2 - 2 sigma_2`.
    pub fn second_fundamental_form_sq(&self) -> AxisymField {
        self.h.zip_map(&self.sigma2, |h, s| h * h - 2.0 * s)
    }

    pub fn min_mean_curvature(&self) -> f64 {
        self.h.min()
    }

    pub fn max_mean_curvature(&self) -> f64 {
        self.h.max()
    }

    /// `max_i |kappa_i - 1|` over both principal directions and all nodes.
    pub fn max_kappa_deviation(&self) -> f64 {
        self.kappa_rad
            .iter()
            .chain(self.kappa_ang.iter())
            .fold(0.0_f64, |acc, k| acc.max((k - 1.0).abs()))
    }

    /// `max |kappa_rad - kappa_ang|`, zero on totally umbilical hypersurfaces.
    pub fn max_umbilicity_defect(&self) -> f64 {
        self.kappa_rad.zip_map(&self.kappa_ang, |a, b| a - b).max_abs()
    }
}

/// Computes all pointwise geometry from the radial graph.
pub fn compute_fields(graph: &RadialGraph) -> Result<GeometryFields> {
    let grid = graph.grid();
    let n = grid.dimension();
    let nf = n as f64;
    let u = graph.u();
    let du = grid.d_dphi(u)?;
    let d2u = grid.d2_dphi2(u)?;
    let len = grid.len();

    let mut rho = Vec::with_capacity(len);
    let mut rho_dot = Vec::with_capacity(len);
    let mut v = Vec::with_capacity(len);
    let mut dv = Vec::with_capacity(len);
    let mut d2v = Vec::with_capacity(len);
    let mut w = Vec::with_capacity(len);
    let mut kappa_rad = Vec::with_capacity(len);
    let mut kappa_ang = Vec::with_capacity(len);
    let mut h = Vec::with_capacity(len);
    let mut sigma2 = Vec::with_capacity(len);
    let mut p = Vec::with_capacity(len);
    let mut d_sigma = Vec::with_capacity(len);

    for i in 0..len {
        let ui = u[i];
        let (c, s) = (ui.cosh(), ui.sinh());
        let v1 = du[i] / s;
        let v2 = d2u[i] / s - du[i] * du[i] * c / (s * s);
        let wi = (1.0 + v1 * v1).sqrt();
        let cot = grid.phi()[i].tan().recip();
        let k_rad = (c - v2 / (wi * wi)) / (wi * s);
        let k_ang = (c - cot * v1) / (wi * s);
        let hi = k_rad + (nf - 2.0) * k_ang;
        let s2 = (nf - 2.0) * k_rad * k_ang + 0.5 * (nf - 2.0) * (nf - 3.0) * k_ang * k_ang;

        let values = [c, s, v1, v2, wi, k_rad, k_ang, hi, s2];
        if values.iter().any(|x| !x.is_finite()) {
            return Err(LabError::Geometry { node: i, reason: "non-finite geometry".into() });
        }
        rho.push(c);
        rho_dot.push(s);
        v.push((0.5 * ui).tanh().ln());
        dv.push(v1);
        d2v.push(v2);
        w.push(wi);
        kappa_rad.push(k_rad);
        kappa_ang.push(k_ang);
        h.push(hi);
        sigma2.push(s2);
        p.push(-s / wi);
        d_sigma.push(s.powi(n as i32 - 1) * wi);
    }

    Ok(GeometryFields {
        n,
        rho: rho.into(),
        rho_dot: rho_dot.into(),
        v: v.into(),
        dv: dv.into(),
        d2v: d2v.into(),
        w: w.into(),
        kappa_rad: kappa_rad.into(),
        kappa_ang: kappa_ang.into(),
        h: h.into(),
        sigma2: sigma2.into(),
        p: p.into(),
        d_sigma: d_sigma.into(),
    })
}

/// Minimum of the mean curvature; positive certifies strict mean convexity.
pub fn min_mean_curvature(fields: &GeometryFields) -> f64 {
    fields.min_mean_curvature()
}

/// Leading terms of the late-time expansion of `rho H`,
/// `(n-1) rho^2/(W rho') - rho/(W rho') Lap_h v`.
pub fn rho_h_expansion(graph: &RadialGraph, fields: &GeometryFields) -> Result<AxisymField> {
    let grid = graph.grid();
    let nf = grid.dimension() as f64;
    let out = (0..grid.len())
        .map(|i| {
            let cot = grid.phi()[i].tan().recip();
            let lap_v = fields.d2v[i] + (nf - 2.0) * cot * fields.dv[i];
            let (r, rd, w) = (fields.rho[i], fields.rho_dot[i], fields.w[i]);
            (nf - 1.0) * r * r / (w * rd) - r / (w * rd) * lap_v
        })
        .collect();
    Ok(AxisymField::new(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sphere(n: usize, m: usize, r: f64) -> RadialGraph {
        let g = SphereGrid::new(n, m).unwrap();
        RadialGraph::new(g, AxisymField::constant(m, r)).unwrap()
    }

    #[test]
    fn centered_sphere_closed_forms() {
        for n in [3, 4, 5] {
            let r = 1.3_f64;
            let f = compute_fields(&sphere(n, 64, r)).unwrap();
            let coth = r.cosh() / r.sinh();
            let nf = n as f64;
            for i in 0..64 {
                assert!((f.kappa_rad[i] - coth).abs() < 1e-13);
                assert!((f.kappa_ang[i] - coth).abs() < 1e-13);
                assert!((f.h[i] - (nf - 1.0) * coth).abs() < 1e-12);
                assert!((f.p[i] + r.sinh()).abs() < 1e-13);
                assert_eq!(f.w[i], 1.0);
                let s2 = 0.5 * (nf - 1.0) * (nf - 2.0) * coth * coth;
                assert!((f.sigma2[i] - s2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn min_mean_curvature_of_spheres() {
        let f = compute_fields(&sphere(3, 32, 1.0)).unwrap();
        let expected = 2.0 / 1.0_f64.tanh();
        assert!((min_mean_curvature(&f) - expected).abs() < 1e-12);
        assert!((expected - 2.626).abs() < 1e-3);
        let far = compute_fields(&sphere(3, 32, 20.0)).unwrap();
        assert!((min_mean_curvature(&far) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_radius() {
        let g = SphereGrid::new(3, 16).unwrap();
        let mut u = vec![1.0; 16];
        u[5] = 0.0;
        match RadialGraph::new(g, u.into()) {
            Err(LabError::Geometry { node, .. }) => assert_eq!(node, 5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rho_minus_rho_dot_is_exponential() {
        let g = SphereGrid::new(3, 32).unwrap();
        let u = g.sample(|p| 1.0 + 0.1 * p.cos().powi(2));
        let graph = RadialGraph::new(g, u).unwrap();
        let f = compute_fields(&graph).unwrap();
        for i in 0..32 {
            let lhs = f.rho[i] - f.rho_dot[i];
            assert!((lhs - (-graph.u()[i]).exp()).abs() < 1e-14);
        }
    }
}
