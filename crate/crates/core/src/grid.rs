//! Cell-centred discretisation of the polar angle on `S^{n-1}`.
//!
//! Axisymmetric fields are sampled at `phi_i = (i + 1/2) * pi / m`, so no node
//! sits on a pole. Smooth axisymmetric functions extend evenly across both
//! poles; the sixth-order derivative stencils use that reflection for their
//! ghost values.
//!
//! Quadrature integrates `f` against the axisymmetric volume weight
//! `omega_{n-2} sin^{n-2}(phi) dphi`. For even `n` the weighted integrand is a
//! smooth even periodic function and the midpoint rule is spectrally accurate.
//! For odd `n` the integrand is odd about the poles, so the same nodes carry
//! Fejér (first rule) weights in `x = cos phi` instead.

use std::f64::consts::PI;
use std::ops::{Deref, Index};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const MIN_DIMENSION: usize = 3;
pub const MIN_NODES: usize = 16;

/// Nodal samples of an axisymmetric function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisymField(Vec<f64>);

impl AxisymField {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn constant(len: usize, value: f64) -> Self {
        Self(vec![value; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self(self.0.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
    }

    /// Index of the first non-finite value, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.0.iter().position(|x| !x.is_finite())
    }
}

impl Deref for AxisymField {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl Index<usize> for AxisymField {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for AxisymField {
    fn from(values: Vec<f64>) -> Self {
        Self(values)
    }
}

/// Polar-angle grid on `S^{n-1}` for the ambient dimension `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    n: usize,
    m: usize,
    phi: Vec<f64>,
    h_step: f64,
    weights: Vec<f64>,
}

/// Cell centres `(i + 1/2) pi / m` of a uniform partition of `[0, pi]`.
pub fn cell_centers(m: usize) -> Vec<f64> {
    let h = PI / m as f64;
    (0..m).map(|i| (i as f64 + 0.5) * h).collect()
}

/// Area of the unit `k`-sphere, `2 pi^{(k+1)/2} / Gamma((k+1)/2)`.
pub fn unit_sphere_area(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(LabError::Domain("unit sphere dimension must be >= 1".into()));
    }
    let half = (k as f64 + 1.0) / 2.0;
    Ok(2.0 * PI.powf(half) / libm::tgamma(half))
}

impl SphereGrid {
    /// Builds the cell-centred grid for ambient dimension `n` with `m` nodes.
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < MIN_DIMENSION {
            return Err(LabError::Domain(format!(
                "ambient dimension must be >= {MIN_DIMENSION}, got {n}"
            )));
        }
        if m < MIN_NODES {
            return Err(LabError::Domain(format!(
                "node count must be >= {MIN_NODES}, got {m}"
            )));
        }
        let phi = cell_centers(m);
        let h_step = PI / m as f64;
        let weights = quadrature_weights(n, &phi, h_step)?;
        Ok(Self { n, m, phi, h_step, weights })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn h_step(&self) -> f64 {
        self.h_step
    }

    /// Quadrature weights, including `omega_{n-2}` and the `sin^{n-2}` factor.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Samples `f(phi)` at every node.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> AxisymField {
        AxisymField(self.phi.iter().map(|&p| f(p)).collect())
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.m {
            return Err(LabError::LengthMismatch { expected: self.m, actual: f.len() });
        }
        Ok(())
    }

    /// Even reflection across both poles.
    #[inline]
    fn ghost(&self, f: &[f64], j: isize) -> f64 {
        let m = self.m as isize;
        let k = if j < 0 {
            -1 - j
        } else if j >= m {
            2 * m - 1 - j
        } else {
            j
        };
        f[k as usize]
    }

    /// Sixth-order centred first derivative in `phi`.
    pub fn d_dphi(&self, f: &[f64]) -> Result<AxisymField> {
        self.check_len(f)?;
        let scale = 1.0 / (60.0 * self.h_step);
        let out = (0..self.m as isize)
            .map(|i| {
                let g = |k: isize| self.ghost(f, i + k);
                ((g(3) - g(-3)) - 9.0 * (g(2) - g(-2)) + 45.0 * (g(1) - g(-1))) * scale
            })
            .collect();
        Ok(AxisymField(out))
    }

    /// Sixth-order centred second derivative in `phi`.
    pub fn d2_dphi2(&self, f: &[f64]) -> Result<AxisymField> {
        self.check_len(f)?;
        let scale = 1.0 / (180.0 * self.h_step * self.h_step);
        let out = (0..self.m as isize)
            .map(|i| {
                let f0 = f[i as usize];
                // Differences against the centre value keep constants exact.
                let g = |k: isize| self.ghost(f, i + k) - f0;
                (2.0 * (g(3) + g(-3)) - 27.0 * (g(2) + g(-2)) + 270.0 * (g(1) + g(-1))) * scale
            })
            .collect();
        Ok(AxisymField(out))
    }

    /// Integral of an axisymmetric field over `S^{n-1}`.
    pub fn quadrature(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        Ok(self.weights.iter().zip(f).map(|(w, v)| w * v).sum())
    }

    /// Area of the unit sphere this grid discretises, `omega_{n-1}`.
    pub fn sphere_area(&self) -> f64 {
        unit_sphere_area(self.n - 1).expect("n >= 3")
    }
}

fn quadrature_weights(n: usize, phi: &[f64], h_step: f64) -> Result<Vec<f64>> {
    let omega = unit_sphere_area(n - 2)?;
    let m = phi.len();
    let weights = if n % 2 == 0 {
        phi.iter()
            .map(|&p| omega * h_step * p.sin().powi(n as i32 - 2))
            .collect()
    } else {
        // Fejér weights integrate g(cos phi) sin(phi) dphi; the remaining
        // sin^{n-3} factor is a polynomial in cos(phi) for odd n.
        phi.iter()
            .map(|&p| {
                let tail: f64 = (1..=m / 2)
                    .map(|j| {
                        let j = j as f64;
                        (2.0 * j * p).cos() / (4.0 * j * j - 1.0)
                    })
                    .sum();
                let fejer = 2.0 / m as f64 * (1.0 - 2.0 * tail);
                omega * fejer * p.sin().powi(n as i32 - 3)
            })
            .collect()
    };
    Ok(weights)
}
