//! Rotationally symmetric graphs `t = u(r)` over the slice `{t = 0}` of
//! `R x H^n` with metric `(1 + r^2) dt^2 + dr^2/(1 + r^2) + r^2 h`, their
//! mass computed two ways, and the Penrose inequality.
//!
//! The induced metric is `phi dr^2 + r^2 h` with
//! `phi = 1/(1 + r^2) + (1 + r^2) u'^2`; write `psi = 1/phi`. Its scalar
//! curvature satisfies
//!
//! ```text
//! R + n(n-1) = (n-1)/r^{n-1} * d/dr [ r^{n-2} (1 + r^2 - psi) ]
//! ```
//!
//! so the bulk term of the mass formula integrates to half the jump of the
//! mass aspect `mu = r^{n-2} (1 + r^2 - psi)`. A horizon is a zero of `psi`,
//! where the graph becomes vertical. Near it every table is parametrized by
//! `s` with `r = r_h + s^2`; `w(s) = 2 s u'(r_h + s^2) = du/ds` and
//! `psi/s^2` are smooth there.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::functionals::{af_rhs, c_n, evaluate};
use crate::geometry::{compute_fields, RadialGraph};
use crate::grid::unit_sphere_area;

/// Geodesic radii at which the mass functional is sampled before extrapolation.
pub const DEFAULT_GEODESIC_RADII: [f64; 4] = [6.0, 8.0, 10.0, 12.0];
/// Margins this small count as equality.
pub const EQUALITY_TOL: f64 = 1e-6;
/// Mass aspect derivative below `-MASS_ASPECT_TOL` flags `R < -n(n-1)`.
pub const MASS_ASPECT_TOL: f64 = 1e-8;

/// Positive root of `1 + r^2 = 2 m r^{2-n}`.
pub fn horizon_radius(m: f64, n: usize) -> Result<f64> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(LabError::Domain(format!("mass parameter must be positive, got {m}")));
    }
    if n < 3 {
        return Err(LabError::Domain(format!("dimension must be >= 3, got {n}")));
    }
    let f = |r: f64| 2.0 * m * r.powi(2 - n as i32) - 1.0 - r * r;
    // f decreases from +inf; f(hi) < 0 once hi^2 >= 2m hi^{2-n}.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while f(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Anti-de Sitter-Schwarzschild data, `V(r) = 1 + r^2 - 2 m r^{2-n}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdSSModel {
    pub n: usize,
    pub m: f64,
    pub r_h: f64,
}

impl AdSSModel {
    pub fn new(n: usize, m: f64) -> Result<Self> {
        Ok(Self { n, m, r_h: horizon_radius(m, n)? })
    }

    pub fn potential(&self, r: f64) -> f64 {
        1.0 + r * r - 2.0 * self.m * r.powi(2 - self.n as i32)
    }
}

/// `V(r_h + s^2)/s^2` without cancellation; at `s = 0` this is `V'(r_h)`.
fn potential_over_s2(n: usize, m: f64, r_h: f64, s: f64) -> f64 {
    let k = 2.0 - n as f64;
    let scale = 2.0 * m * r_h.powf(k);
    if s == 0.0 {
        return 2.0 * r_h - scale * k / r_h;
    }
    let s2 = s * s;
    let x = s2 / r_h;
    (2.0 * r_h + s2) - scale * (k * x.ln_1p()).exp_m1() / s2
}

/// Profile families with a minimal horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileFamily {
    /// The anti-de Sitter-Schwarzschild graph of mass `m`.
    Adss { m: f64 },
    /// `u = u_m + eps (r - r_h)^2 e^{-r}`.
    GraphBump { m: f64, eps: f64 },
    /// Mass aspect `mu = 2m + 2 delta_m (1 - exp(-((r - r_h)/width)^2))`; the
    /// horizon is that of mass `m` and the total mass is `m + delta_m`.
    MassShell { m: f64, delta_m: f64, width: f64 },
}

impl ProfileFamily {
    pub fn horizon_mass(&self) -> f64 {
        match *self {
            ProfileFamily::Adss { m } | ProfileFamily::GraphBump { m, .. } | ProfileFamily::MassShell { m, .. } => m,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        horizon_radius(self.horizon_mass(), n)?;
        match *self {
            ProfileFamily::GraphBump { eps, .. } if !eps.is_finite() => {
                Err(LabError::Domain(format!("eps must be finite, got {eps}")))
            }
            ProfileFamily::MassShell { delta_m, width, .. } if !(delta_m.is_finite() && width > 0.0) => Err(
                LabError::Domain(format!("mass shell needs finite delta_m and width > 0, got {delta_m}, {width}")),
            ),
            _ => Ok(()),
        }
    }

    /// `w(s) = 2 s u'(r_h + s^2)`.
    fn scaled_slope(&self, n: usize, r_h: f64, s: f64) -> Result<f64> {
        let r = r_h + s * s;
        let k = 2 - n as i32;
        let radicand = match *self {
            ProfileFamily::Adss { m } | ProfileFamily::GraphBump { m, .. } => {
                2.0 * m * r.powi(k) / potential_over_s2(n, m, r_h, s)
            }
            ProfileFamily::MassShell { m, delta_m, width } => {
                let q = potential_over_s2(n, m, r_h, s) + 2.0 * delta_m * shell_over_s2(s, width) * r.powi(k);
                mass_aspect_shell(m, delta_m, width, s) * r.powi(k) / q
            }
        };
        if !(radicand >= 0.0 && radicand.is_finite()) {
            return Err(LabError::Construction(format!("negative radicand {radicand:e} at r = {r}")));
        }
        let mut w = 2.0 * radicand.sqrt() / (1.0 + r * r);
        if let ProfileFamily::GraphBump { eps, .. } = *self {
            let x = s * s;
            w += 2.0 * s * eps * (2.0 * x - x * x) * (-r).exp();
        }
        Ok(w)
    }

    /// `u'(r)` for `r > r_h`, evaluated directly (used far out, where `s` is large).
    pub fn slope(&self, n: usize, r: f64) -> Result<f64> {
        let r_h = horizon_radius(self.horizon_mass(), n)?;
        if !(r > r_h) {
            return Err(LabError::Domain(format!("slope needs r > r_h = {r_h}, got {r}")));
        }
        let k = 2 - n as i32;
        let base = |mu: f64| {
            let psi = 1.0 + r * r - mu * r.powi(k);
            (mu * r.powi(k) / psi).sqrt() / (1.0 + r * r)
        };
        Ok(match *self {
            ProfileFamily::Adss { m } => base(2.0 * m),
            ProfileFamily::GraphBump { m, eps } => {
                let x = r - r_h;
                base(2.0 * m) + eps * (2.0 * x - x * x) * (-r).exp()
            }
            ProfileFamily::MassShell { m, delta_m, width } => {
                let x = (r - r_h) / width;
                base(2.0 * m + 2.0 * delta_m * (-(-x * x).exp_m1()))
            }
        })
    }
}

/// `(1 - exp(-(s^2/width)^2)) / s^2`, zero at `s = 0`.
fn shell_over_s2(s: f64, width: f64) -> f64 {
    if s == 0.0 {
        return 0.0;
    }
    let x = s * s / width;
    (-x * x).exp_m1() / (s * s)
}

fn mass_aspect_shell(m: f64, delta_m: f64, width: f64, s: f64) -> f64 {
    let x = s * s / width;
    2.0 * m - 2.0 * delta_m * (-x * x).exp_m1()
}

/// Tabulated graph on `r_h = r_0 < ... < r_max`, with `r_k = r_h + s_k^2` for uniform `s_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphProfile {
    pub n: usize,
    pub family: ProfileFamily,
    pub horizon_r: f64,
    pub s_nodes: Vec<f64>,
    pub r_nodes: Vec<f64>,
    pub u: Vec<f64>,
    /// `u'(r)`; infinite at the horizon node.
    pub du: Vec<f64>,
    /// `phi = 1/(1 + r^2) + (1 + r^2) u'^2`; infinite at the horizon node.
    pub phi_rr: Vec<f64>,
    /// `psi/s^2`, smooth and positive up to the horizon.
    pub psi_over_s2: Vec<f64>,
    /// Mass aspect `mu = r^{n-2} (1 + r^2 - psi)`.
    pub mass_aspect: Vec<f64>,
}

impl GraphProfile {
    pub fn len(&self) -> usize {
        self.r_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_nodes.is_empty()
    }

    /// `psi = 1/phi` at every node.
    pub fn psi(&self) -> Vec<f64> {
        self.s_nodes.iter().zip(&self.psi_over_s2).map(|(s, q)| q * s * s).collect()
    }

    /// CSV rows `(r, u, u', phi, R, Theta)`.
    pub fn table(&self) -> Result<Vec<[f64; 6]>> {
        let scal = scalar_curvature_radial(self)?;
        let th = theta(self);
        Ok((0..self.len())
            .map(|i| [self.r_nodes[i], self.u[i], self.du[i], self.phi_rr[i], scal[i], th[i]])
            .collect())
    }
}

pub const PROFILE_CSV_COLUMNS: [&str; 6] = ["r", "u", "du", "phi", "R", "theta"];

pub fn build_adss_profile(model: &AdSSModel, r_max: f64, node_count: usize) -> Result<GraphProfile> {
    build_profile(model.n, ProfileFamily::Adss { m: model.m }, r_max, node_count)
}

/// Tabulates `family` on `node_count` nodes between the horizon and `r_max`.
pub fn build_profile(n: usize, family: ProfileFamily, r_max: f64, node_count: usize) -> Result<GraphProfile> {
    family.validate(n)?;
    let r_h = horizon_radius(family.horizon_mass(), n)?;
    if !(r_max > 2.0 * r_h && r_max.is_finite()) {
        return Err(LabError::Domain(format!("r_max must exceed 2 r_h = {}, got {r_max}", 2.0 * r_h)));
    }
    if node_count < 16 {
        return Err(LabError::Domain(format!("need at least 16 nodes, got {node_count}")));
    }
    let s_max = (r_max - r_h).sqrt();
    let ds = s_max / (node_count - 1) as f64;
    let s_nodes: Vec<f64> = (0..node_count).map(|k| k as f64 * ds).collect();
    let r_nodes: Vec<f64> = s_nodes.iter().map(|s| r_h + s * s).collect();
    let w = s_nodes.iter().map(|&s| family.scaled_slope(n, r_h, s)).collect::<Result<Vec<_>>>()?;

    let gl = GaussLegendre::new(NonZeroUsize::new(10).expect("nonzero"));
    let mut u = Vec::with_capacity(node_count);
    let mut acc = 0.0;
    u.push(0.0);
    for k in 1..node_count {
        let mut failure = None;
        acc += gl.integrate(s_nodes[k - 1], s_nodes[k], |s| match family.scaled_slope(n, r_h, s) {
            Ok(v) => v,
            Err(e) => {
                failure = Some(e);
                0.0
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        u.push(acc);
    }

    let k = n as i32 - 2;
    let mut du = Vec::with_capacity(node_count);
    let mut phi_rr = Vec::with_capacity(node_count);
    let mut psi_over_s2 = Vec::with_capacity(node_count);
    let mut mass_aspect = Vec::with_capacity(node_count);
    for i in 0..node_count {
        let (s, r, wi) = (s_nodes[i], r_nodes[i], w[i]);
        let b = 1.0 + r * r;
        let q = 1.0 / (s * s / b + b * wi * wi / 4.0);
        if !(q > 0.0 && q.is_finite()) {
            return Err(LabError::Construction(format!("psi/s^2 = {q:e} at r = {r}")));
        }
        // 1 + r^2 - psi = psi (1 + r^2)^2 u'^2
        mass_aspect.push(r.powi(k) * b * b * q * wi * wi / 4.0);
        psi_over_s2.push(q);
        if s == 0.0 {
            du.push(f64::INFINITY);
            phi_rr.push(f64::INFINITY);
        } else {
            let d = wi / (2.0 * s);
            du.push(d);
            phi_rr.push(1.0 / b + b * d * d);
        }
    }

    Ok(GraphProfile { n, family, horizon_r: r_h, s_nodes, r_nodes, u, du, phi_rr, psi_over_s2, mass_aspect })
}

/// Finite difference weights for the derivatives `0..=order` at `x0` on
/// arbitrary nodes `xs`; `weights[k][j]` multiplies `f(xs[j])` in the `k`-th derivative.
pub fn fd_weights(x0: f64, xs: &[f64], order: usize) -> Vec<Vec<f64>> {
    let np = xs.len();
    let mut c = vec![vec![0.0; np]; order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..np {
        let mn = i.min(order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] *= c4 / c3;
        }
        c1 = c2;
    }
    c
}

/// First derivative of nodal values on nonuniform nodes with 7-point stencils.
fn derivative(xs: &[f64], f: &[f64]) -> Vec<f64> {
    const WIDTH: usize = 7;
    let len = xs.len();
    (0..len)
        .map(|i| {
            let start = i.saturating_sub(WIDTH / 2).min(len - WIDTH);
            let w = fd_weights(xs[i], &xs[start..start + WIDTH], 1);
            (0..WIDTH).map(|j| w[1][j] * f[start + j]).sum()
        })
        .collect()
}

/// Scalar curvature of `phi dr^2 + r^2 h` from `psi = 1/phi` and `psi'`:
/// `R = (n-1)/r^2 [(n-2)(1 - psi) - r psi']`.
pub fn scalar_curvature_from_psi(n: usize, r: f64, psi: f64, dpsi: f64) -> f64 {
    let nf = n as f64;
    (nf - 1.0) / (r * r) * ((nf - 2.0) * (1.0 - psi) - r * dpsi)
}

/// `R + n(n-1) = (n-1) mu'/r^{n-1}` at every node.
pub fn mass_aspect_density(profile: &GraphProfile) -> Vec<f64> {
    let nf = profile.n as f64;
    let dmu = derivative(&profile.r_nodes, &profile.mass_aspect);
    profile.r_nodes.iter().zip(dmu).map(|(r, d)| (nf - 1.0) * d / r.powi(profile.n as i32 - 1)).collect()
}

/// Scalar curvature of the induced metric at every node.
pub fn scalar_curvature_radial(profile: &GraphProfile) -> Result<Vec<f64>> {
    let nf = profile.n as f64;
    Ok(mass_aspect_density(profile).into_iter().map(|d| d - nf * (nf - 1.0)).collect())
}

/// Scalar curvature from the `psi'` form of the formula, differentiating `psi` directly.
pub fn scalar_curvature_direct(profile: &GraphProfile) -> Vec<f64> {
    let psi = profile.psi();
    let dpsi = derivative(&profile.r_nodes, &psi);
    (0..profile.len()).map(|i| scalar_curvature_from_psi(profile.n, profile.r_nodes[i], psi[i], dpsi[i])).collect()
}

/// `Theta = <N, d/dt> = phi^{-1/2}` with the unnormalized Killing field;
/// zero at the horizon, `sqrt(1 + r^2)` where the graph is flat.
pub fn theta(profile: &GraphProfile) -> Vec<f64> {
    profile.phi_rr.iter().map(|p| p.sqrt().recip()).collect()
}

/// Composite Simpson rule on uniformly spaced samples; an even count ends with the 3/8 rule.
fn simpson(h: f64, f: &[f64]) -> f64 {
    let n = f.len();
    match n {
        0 | 1 => 0.0,
        2 => 0.5 * h * (f[0] + f[1]),
        3 => h / 3.0 * (f[0] + 4.0 * f[1] + f[2]),
        _ => {
            let (body, tail) = if n % 2 == 1 { (n, 0.0) } else {
                let t = &f[n - 4..];
                (n - 3, 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3]))
            };
            let mut s = f[0] + f[body - 1];
            for (i, v) in f.iter().enumerate().take(body - 1).skip(1) {
                s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
            }
            h / 3.0 * s + tail
        }
    }
}

/// Mass functional samples and their extrapolated limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassFunctionalEstimate {
    pub geodesic_radii: Vec<f64>,
    pub samples: Vec<f64>,
    pub limit: f64,
    /// False when the sample differences do not shrink.
    pub converged: bool,
}

/// Mass functional of the graph at geodesic radius `r`:
/// `1/2 rt^{n-2} (1 + rt^2)^2 (phi - 1/(1 + rt^2))` at `rt = sinh r`.
pub fn mass_functional_at(n: usize, family: &ProfileFamily, r: f64) -> Result<f64> {
    let rt = r.sinh();
    let b = 1.0 + rt * rt;
    let du = family.slope(n, rt)?;
    // phi - 1/(1 + rt^2) = (1 + rt^2) u'^2
    Ok(0.5 * rt.powi(n as i32 - 2) * b * b * b * du * du)
}

/// Aitken extrapolation of the last three equally spaced samples.
pub fn aitken(x0: f64, x1: f64, x2: f64) -> f64 {
    let (d1, d2) = (x1 - x0, x2 - x1);
    let denom = d2 - d1;
    let ratio = d2 / d1;
    if denom == 0.0 || !(ratio.abs() < 1.0) || d2.abs() <= 4.0 * f64::EPSILON * x2.abs() {
        return x2;
    }
    x2 - d2 * d2 / denom
}

pub fn mass_functional(profile: &GraphProfile, geodesic_radii: &[f64]) -> Result<MassFunctionalEstimate> {
    mass_functional_of(profile.n, &profile.family, geodesic_radii)
}

pub fn mass_functional_of(n: usize, family: &ProfileFamily, geodesic_radii: &[f64]) -> Result<MassFunctionalEstimate> {
    if geodesic_radii.len() < 3 {
        return Err(LabError::Domain("mass functional needs at least three sample radii".into()));
    }
    let samples = geodesic_radii.iter().map(|&r| mass_functional_at(n, family, r)).collect::<Result<Vec<_>>>()?;
    let k = samples.len();
    let (x0, x1, x2) = (samples[k - 3], samples[k - 2], samples[k - 1]);
    let scale = x2.abs().max(1.0);
    let converged = (x2 - x1).abs() <= (x1 - x0).abs() + 1e-14 * scale;
    Ok(MassFunctionalEstimate { geodesic_radii: geodesic_radii.to_vec(), samples, limit: aitken(x0, x1, x2), converged })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassBreakdown {
    /// `c_n int Theta (R + n(n-1)) dM`.
    pub bulk: f64,
    /// `c_n int_horizon rho H`.
    pub horizon: f64,
    pub mass_formula_total: f64,
    pub mass_functional_limit: f64,
    pub mass_functional_converged: bool,
    /// `(A_n^{(n-2)/(n-1)} + A_n^{n/(n-1)})/2` for the horizon area.
    pub penrose_rhs: f64,
    /// Smallest `R + n(n-1)`.
    pub min_mass_aspect_density: f64,
    /// `R < -n(n-1)` somewhere beyond tolerance.
    pub scalar_curvature_warning: bool,
}

/// Both mass computations. With `Theta dM = omega r^{n-1} dr` the bulk
/// integrand is `c_n omega (n-1) mu'`, integrated in `s`.
pub fn mass_formula(profile: &GraphProfile) -> Result<MassBreakdown> {
    let n = profile.n;
    let omega = unit_sphere_area(n - 1)?;
    let density = mass_aspect_density(profile);
    let integrand: Vec<f64> = (0..profile.len())
        .map(|i| {
            let r = profile.r_nodes[i];
            density[i] * r.powi(n as i32 - 1) * 2.0 * profile.s_nodes[i]
        })
        .collect();
    let ds = profile.s_nodes[1] - profile.s_nodes[0];
    let bulk = c_n(n) * omega * simpson(ds, &integrand);
    let r_h = profile.horizon_r;
    let horizon = 0.5 * r_h.powi(n as i32 - 2) * (1.0 + r_h * r_h);
    let functional = mass_functional(profile, &DEFAULT_GEODESIC_RADII)?;
    let min_density = density.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MassBreakdown {
        bulk,
        horizon,
        mass_formula_total: bulk + horizon,
        mass_functional_limit: functional.limit,
        mass_functional_converged: functional.converged,
        penrose_rhs: af_rhs(n, r_h.powi(n as i32 - 1)),
        min_mass_aspect_density: min_density,
        scalar_curvature_warning: min_density < -MASS_ASPECT_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PenroseVerdict {
    pub breakdown: MassBreakdown,
    /// `mass_functional_limit - penrose_rhs`.
    pub margin: f64,
    /// `mass_formula_total - penrose_rhs`.
    pub margin_formula: f64,
    /// `|mass_functional_limit - mass_formula_total|`.
    pub cross_oracle_gap: f64,
    pub equality: bool,
}

pub fn penrose_check(profile: &GraphProfile) -> Result<PenroseVerdict> {
    if !(profile.horizon_r > 0.0) {
        return Err(LabError::Domain("Penrose check needs a horizon".into()));
    }
    let b = mass_formula(profile)?;
    let margin = b.mass_functional_limit - b.penrose_rhs;
    Ok(PenroseVerdict {
        breakdown: b,
        margin,
        margin_formula: b.mass_formula_total - b.penrose_rhs,
        cross_oracle_gap: (b.mass_functional_limit - b.mass_formula_total).abs(),
        equality: margin.abs() <= EQUALITY_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainReport {
    pub mass: f64,
    /// `c_n int rho H` over the horizon.
    pub horizon_integral: f64,
    pub penrose_rhs: f64,
    /// `mass - c_n int rho H`.
    pub mass_link: f64,
    /// `c_n int rho H - penrose_rhs`.
    pub af_link: f64,
    pub min_h: f64,
    pub mean_convex: bool,
}

impl ChainReport {
    pub fn holds(&self, tol: f64) -> bool {
        self.mean_convex && self.mass_link >= -tol && self.af_link >= -tol
    }
}

/// `mass >= c_n int rho H >= penrose_rhs` link by link for a horizon in the slice.
pub fn af_to_penrose_chain(horizon_graph: &RadialGraph, mass: f64) -> Result<ChainReport> {
    let n = horizon_graph.dimension();
    let fields = compute_fields(horizon_graph)?;
    let report = evaluate(horizon_graph.grid(), &fields)?;
    let horizon_integral = report.af_lhs;
    Ok(ChainReport {
        mass,
        horizon_integral,
        penrose_rhs: af_rhs(n, report.area_normalized),
        mass_link: mass - horizon_integral,
        af_link: horizon_integral - report.af_rhs,
        min_h: report.min_h,
        mean_convex: report.min_h > 0.0,
    })
}

/// `|e|_{g_0}` for `e = alpha dr^2` at geodesic radius `r`, `alpha = (1 + rt^2)^2 u'^2`.
pub fn metric_deviation(n: usize, family: &ProfileFamily, r: f64) -> Result<f64> {
    let rt = r.sinh();
    let b = 1.0 + rt * rt;
    let du = family.slope(n, rt)?;
    Ok(b * b * du * du)
}

/// Least-squares slope of `log |e|` against geodesic radius.
pub fn decay_rate(n: usize, family: &ProfileFamily, geodesic_radii: &[f64]) -> Result<f64> {
    let pts = geodesic_radii
        .iter()
        .map(|&r| metric_deviation(n, family, r).map(|e| (r, e.ln())))
        .collect::<Result<Vec<_>>>()?;
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return Err(LabError::Domain("decay fit needs two radii".into()));
    }
    let mr = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let me = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mr) * (p.1 - me)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mr).powi(2)).sum();
    Ok(sxy / sxx)
}
