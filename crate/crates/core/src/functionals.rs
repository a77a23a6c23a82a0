//! Global quantities of a hypersurface in `H^n` and the residuals of the
//! integral identities and inequalities they satisfy.
//!
//! * `I = int rho H`, `J = -int p`, `K = omega A_n^{n/(n-1)}` with `A_n = A/omega`
//! * `L = (I - (n-1) K) / A_n^{(n-2)/(n-1)}`, `M = (I - (n-1) J) / A_n^{(n-2)/(n-1)}`
//! * Heintze-Karcher deficit `(n-1) int rho/H + int p`
//! * Minkowski residuals `int ((n-1) rho + H p)` and `int ((n-2) rho H + 2 p sigma_2)`,
//!   both zero for closed hypersurfaces.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{GeometryFields, RadialGraph};
use crate::grid::{unit_sphere_area, AxisymField, SphereGrid};

/// Column order of one serialized report row.
pub const CSV_COLUMNS: [&str; 14] = [
    "t",
    "A",
    "I",
    "J",
    "Kq",
    "L",
    "M",
    "hk_deficit",
    "mink1_residual",
    "mink2_residual",
    "af_lhs",
    "af_rhs",
    "minH",
    "maxH",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub n: usize,
    pub area: f64,
    pub area_normalized: f64,
    pub i: f64,
    pub j: f64,
    pub kq: f64,
    pub l: f64,
    pub m: f64,
    /// `None` when `H <= 0` somewhere, since `rho/H` is then undefined.
    pub hk_deficit: Option<f64>,
    pub mink1_residual: f64,
    pub mink2_residual: f64,
    pub af_lhs: f64,
    pub af_rhs: f64,
    pub min_h: f64,
    pub max_h: f64,
}

/// `c_n = 1 / (2 (n-1) omega_{n-1})`.
pub fn c_n(n: usize) -> f64 {
    1.0 / (2.0 * (n as f64 - 1.0) * unit_sphere_area(n - 1).expect("n >= 3"))
}

/// Right side of the hyperbolic Alexandrov-Fenchel (and Penrose) inequality,
/// `(A_n^{(n-2)/(n-1)} + A_n^{n/(n-1)}) / 2` for normalized area `A_n`.
pub fn af_rhs(n: usize, area_normalized: f64) -> f64 {
    let nf = n as f64;
    0.5 * (area_normalized.powf((nf - 2.0) / (nf - 1.0)) + area_normalized.powf(nf / (nf - 1.0)))
}

impl FunctionalReport {
    pub fn evaluate(graph: &RadialGraph, fields: &GeometryFields) -> Result<Self> {
        evaluate(graph.grid(), fields)
    }

    /// `J - K` normalized by `A_n^{n/(n-1)}`; nondecreasing along the inverse
    /// mean curvature flow.
    pub fn normalized_support_gap(&self) -> f64 {
        let nf = self.n as f64;
        (self.j - self.kq) / self.area_normalized.powf(nf / (nf - 1.0))
    }

    pub fn af_margin(&self) -> f64 {
        af_margin(self)
    }

    pub fn bhw_margin(&self) -> f64 {
        bhw_margin(self)
    }

    /// One CSV row in [`CSV_COLUMNS`] order. An undefined deficit prints `NaN`.
    pub fn csv_values(&self, t: f64) -> [f64; 14] {
        [
            t,
            self.area,
            self.i,
            self.j,
            self.kq,
            self.l,
            self.m,
            self.hk_deficit.unwrap_or(f64::NAN),
            self.mink1_residual,
            self.mink2_residual,
            self.af_lhs,
            self.af_rhs,
            self.min_h,
            self.max_h,
        ]
    }
}

/// Evaluates every global quantity on a geometry snapshot.
pub fn evaluate(grid: &SphereGrid, f: &GeometryFields) -> Result<FunctionalReport> {
    let n = f.n;
    let nf = n as f64;
    let omega = grid.sphere_area();
    let ds = &f.d_sigma;
    let weighted = |g: &dyn Fn(usize) -> f64| -> Result<f64> {
        let vals: AxisymField = (0..ds.len()).map(|i| g(i) * ds[i]).collect::<Vec<_>>().into();
        grid.quadrature(&vals)
    };

    let area = grid.quadrature(ds)?;
    let area_normalized = area / omega;
    let i = weighted(&|k| f.rho[k] * f.h[k])?;
    let j = -weighted(&|k| f.p[k])?;
    let kq = omega * area_normalized.powf(nf / (nf - 1.0));
    let denom = area_normalized.powf((nf - 2.0) / (nf - 1.0));
    let min_h = f.min_mean_curvature();
    let hk_deficit = if min_h > 0.0 {
        Some((nf - 1.0) * weighted(&|k| f.rho[k] / f.h[k])? - j)
    } else {
        None
    };
    let mink1_residual = weighted(&|k| (nf - 1.0) * f.rho[k] + f.h[k] * f.p[k])?;
    let mink2_residual =
        weighted(&|k| (nf - 2.0) * f.rho[k] * f.h[k] + 2.0 * f.p[k] * f.sigma2[k])?;

    Ok(FunctionalReport {
        n,
        area,
        area_normalized,
        i,
        j,
        kq,
        l: (i - (nf - 1.0) * kq) / denom,
        m: (i - (nf - 1.0) * j) / denom,
        hk_deficit,
        mink1_residual,
        mink2_residual,
        af_lhs: c_n(n) * i,
        af_rhs: af_rhs(n, area_normalized),
        min_h,
        max_h: f.max_mean_curvature(),
    })
}

/// `c_n I - (A_n^{(n-2)/(n-1)} + A_n^{n/(n-1)})/2`; nonnegative for star-shaped,
/// strictly mean convex hypersurfaces and zero exactly on centred spheres.
pub fn af_margin(report: &FunctionalReport) -> f64 {
    report.af_lhs - report.af_rhs
}

/// `M - (n-1) omega_{n-1}`.
pub fn bhw_margin(report: &FunctionalReport) -> f64 {
    let n = report.n;
    report.m - (n as f64 - 1.0) * unit_sphere_area(n - 1).expect("n >= 3")
}
