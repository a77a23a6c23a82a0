//! Reference hypersurfaces with known geometry.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{compute_fields, RadialGraph};
use crate::grid::{unit_sphere_area, AxisymField, SphereGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    /// Geodesic sphere of radius `r` about the origin.
    CenteredSphere { r: f64 },
    /// Geodesic sphere of radius `radius` whose centre lies at distance `d`
    /// from the origin on the symmetry axis.
    OffcenterSphere { d: f64, radius: f64 },
    /// `u = r + eps P_l(cos phi)`.
    PerturbedSphere { r: f64, eps: f64, l: u32 },
}

impl ShapeSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ShapeSpec::CenteredSphere { r } if !(r > 0.0 && r.is_finite()) => {
                Err(LabError::Domain(format!("sphere radius must be positive, got {r}")))
            }
            ShapeSpec::OffcenterSphere { d, radius } if !(0.0 <= d && d < radius && radius.is_finite()) => {
                Err(LabError::Domain(format!(
                    "off-centre sphere needs 0 <= d < R (origin inside), got d = {d}, R = {radius}"
                )))
            }
            ShapeSpec::PerturbedSphere { r, eps, .. } if !(r > 0.0 && r.is_finite() && eps.is_finite()) => {
                Err(LabError::Domain(format!("perturbed sphere needs r > 0, got r = {r}, eps = {eps}")))
            }
            _ => Ok(()),
        }
    }
}

/// Legendre polynomial `P_l(x)` by the three-term recurrence.
pub fn legendre(l: u32, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    if l == 0 {
        return p0;
    }
    for k in 1..l {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Radial distance from the origin to the geodesic sphere of radius `radius`
/// centred at distance `d` on the axis, in direction `phi`. Solves the
/// hyperbolic law of cosines `cosh R = cosh d cosh u - sinh d sinh u cos phi`.
pub fn offcenter_radius(d: f64, radius: f64, phi: f64) -> Result<f64> {
    let target = radius.cosh();
    let (cd, sd, cp) = (d.cosh(), d.sinh(), phi.cos());
    let g = |u: f64| cd * u.cosh() - sd * u.sinh() * cp - target;
    let (mut lo, mut hi) = (radius - d, radius + d);
    let (glo, ghi) = (g(lo), g(hi));
    if glo > 0.0 || ghi < 0.0 {
        return Err(LabError::Construction(format!(
            "law-of-cosines root not bracketed at phi = {phi}: g(lo) = {glo:e}, g(hi) = {ghi:e}"
        )));
    }
    if d == 0.0 {
        return Ok(radius);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 * radius.max(1.0) {
            break;
        }
    }
    let mut u = 0.5 * (lo + hi);
    // Newton polish; the bracket guards against a bad step.
    for _ in 0..3 {
        let dg = cd * u.sinh() - sd * u.cosh() * cp;
        if dg.abs() < 1e-300 {
            break;
        }
        let next = u - g(u) / dg;
        if next > radius - d && next < radius + d {
            u = next;
        }
    }
    Ok(u)
}

/// Builds the radial graph of a reference shape on `grid`.
pub fn build(spec: &ShapeSpec, grid: &SphereGrid) -> Result<RadialGraph> {
    spec.validate()?;
    let u = match *spec {
        ShapeSpec::CenteredSphere { r } => AxisymField::constant(grid.len(), r),
        ShapeSpec::OffcenterSphere { d, radius } => grid
            .phi()
            .iter()
            .map(|&p| offcenter_radius(d, radius, p))
            .collect::<Result<Vec<_>>>()?
            .into(),
        ShapeSpec::PerturbedSphere { r, eps, l } => grid.sample(|p| r + eps * legendre(l, p.cos())),
    };
    let graph = RadialGraph::new(grid.clone(), u)?;
    if let ShapeSpec::PerturbedSphere { .. } = spec {
        let fields = compute_fields(&graph)?;
        let min_h = fields.min_mean_curvature();
        if min_h <= 0.0 {
            return Err(LabError::NotMeanConvex { min_h });
        }
    }
    Ok(graph)
}

/// Exact quantities of a centred geodesic sphere of radius `r` in `H^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormReport {
    pub area: f64,
    pub h: f64,
    pub p: f64,
    pub i: f64,
    pub j: f64,
    pub kq: f64,
    pub l: f64,
    pub m: f64,
}

pub fn sphere_closed_forms(r: f64, n: usize) -> Result<ClosedFormReport> {
    if !(r > 0.0) {
        return Err(LabError::Domain(format!("sphere radius must be positive, got {r}")));
    }
    if n < 3 {
        return Err(LabError::Domain(format!("dimension must be >= 3, got {n}")));
    }
    let omega = unit_sphere_area(n - 1)?;
    let nf = n as f64;
    let (s, c) = (r.sinh(), r.cosh());
    let k = n as i32;
    Ok(ClosedFormReport {
        area: omega * s.powi(k - 1),
        h: (nf - 1.0) * c / s,
        p: -s,
        i: (nf - 1.0) * omega * s.powi(k - 2) * c * c,
        j: omega * s.powi(k),
        kq: omega * s.powi(k),
        l: (nf - 1.0) * omega,
        m: (nf - 1.0) * omega,
    })
}
