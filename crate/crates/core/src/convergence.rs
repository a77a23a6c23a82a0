//! Grid refinement studies: the same experiment at `m`, `2m`, `4m` and the
//! empirical order `log2(|F_2m - F_m| / |F_4m - F_2m|)` of every functional.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::flow::{run, FlowOutcome, FlowSpec};
use crate::functionals::{evaluate, FunctionalReport};
use crate::geometry::compute_fields;
use crate::grid::SphereGrid;
use crate::shapes::{build, ShapeSpec};

/// Differences below this multiple of `eps * max(|F|, 1)` are roundoff.
const NOISE_ULPS: f64 = 256.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEntry {
    pub name: String,
    pub values: [f64; 3],
    pub diffs: [f64; 2],
    /// `None` when the finest difference sits at roundoff level.
    pub order: Option<f64>,
}

impl OrderEntry {
    fn new(name: &str, values: [f64; 3]) -> Self {
        let diffs = [(values[1] - values[0]).abs(), (values[2] - values[1]).abs()];
        let floor = NOISE_ULPS * f64::EPSILON * values.iter().fold(1.0_f64, |a, v| a.max(v.abs()));
        // Once the finest difference reaches roundoff no order is measurable.
        let order = (diffs[1] > floor).then(|| (diffs[0] / diffs[1]).log2());
        Self { name: name.to_string(), values, diffs, order }
    }

    pub fn passes(&self, min_order: f64) -> bool {
        self.order.is_none_or(|o| o >= min_order)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub resolutions: [usize; 3],
    pub entries: Vec<OrderEntry>,
}

impl ConvergenceTable {
    pub fn min_order(&self) -> Option<f64> {
        self.entries.iter().filter_map(|e| e.order).reduce(f64::min)
    }

    pub fn passes(&self, min_order: f64) -> bool {
        self.entries.iter().all(|e| e.passes(min_order))
    }
}

fn ladder(m0: usize) -> Result<[usize; 3]> {
    if m0 < 16 {
        return Err(LabError::Domain(format!("base resolution must be >= 16, got {m0}")));
    }
    Ok([m0, 2 * m0, 4 * m0])
}

fn table(resolutions: [usize; 3], reports: [FunctionalReport; 3]) -> ConvergenceTable {
    let pick = |f: fn(&FunctionalReport) -> f64| [f(&reports[0]), f(&reports[1]), f(&reports[2])];
    let mut entries = vec![
        OrderEntry::new("A", pick(|r| r.area)),
        OrderEntry::new("I", pick(|r| r.i)),
        OrderEntry::new("J", pick(|r| r.j)),
        OrderEntry::new("Kq", pick(|r| r.kq)),
        OrderEntry::new("L", pick(|r| r.l)),
        OrderEntry::new("M", pick(|r| r.m)),
    ];
    if reports.iter().all(|r| r.hk_deficit.is_some()) {
        entries.push(OrderEntry::new("hk_deficit", pick(|r| r.hk_deficit.unwrap_or(f64::NAN))));
    }
    ConvergenceTable { resolutions, entries }
}

/// Functionals of `shape` at `m0`, `2 m0`, `4 m0`.
pub fn statics_ladder(n: usize, shape: &ShapeSpec, m0: usize) -> Result<ConvergenceTable> {
    let res = ladder(m0)?;
    let mut reports = Vec::with_capacity(3);
    for &m in &res {
        let grid = SphereGrid::new(n, m)?;
        let graph = build(shape, &grid)?;
        let fields = compute_fields(&graph)?;
        reports.push(evaluate(&grid, &fields)?);
    }
    Ok(table(res, [reports[0], reports[1], reports[2]]))
}

/// Functionals at the end of a flow run at `m0`, `2 m0`, `4 m0`. A fixed
/// step in `spec` is halved with every refinement; its audit tolerance must
/// admit the time discretization error at the coarsest step, or audit halving
/// blurs the ladder.
pub fn flow_ladder(n: usize, shape: &ShapeSpec, spec: &FlowSpec, m0: usize) -> Result<ConvergenceTable> {
    let res = ladder(m0)?;
    let mut reports = Vec::with_capacity(3);
    for (level, &m) in res.iter().enumerate() {
        let grid = SphereGrid::new(n, m)?;
        let graph = build(shape, &grid)?;
        let mut s = *spec;
        s.fixed_dt = spec.fixed_dt.map(|dt| dt / f64::powi(2.0, level as i32));
        let trace = run(&graph, &s)?;
        if let FlowOutcome::Aborted { t, reason } = &trace.outcome {
            return Err(LabError::Diagnostic(format!("run at m = {m} aborted at t = {t}: {reason}")));
        }
        let last = trace.rows.last().ok_or_else(|| LabError::Diagnostic("empty trace".into()))?;
        reports.push(last.report);
    }
    Ok(table(res, [reports[0], reports[1], reports[2]]))
}
