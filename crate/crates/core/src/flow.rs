//! Normal flows of radial graphs: the inverse mean curvature flow (outward
//! speed `1/H`) and the flow with inward speed `rho = cosh r`.
//!
//! A normal speed `F` along the inward normal moves the radial function by
//! `du/dt = -F W`, so the flows read
//!
//! ```text
//! IMCF:     du/dt =  W / H
//! Brendle:  du/dt = -rho W
//! ```
//!
//! Time stepping is classical RK4 with a parabolic step bound. Every accepted
//! inverse mean curvature flow step is audited against the evolution laws of
//! the area, the support integral and the two monotone quantities; a failed
//! audit halves the step and retries.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::functionals::{evaluate, FunctionalReport};
use crate::geometry::{compute_fields, GeometryFields, RadialGraph};
use crate::grid::AxisymField;

pub const MAX_HALVINGS: u32 = 20;
/// Rounding allowance of the audit, in units of `eps` times the compared magnitude.
pub const ROUNDOFF_ULPS: f64 = 64.0;
/// Brendle runs stop once the smallest area density drops below this.
pub const EXTINCTION_DENSITY: f64 = 1e-6;
/// Brendle runs stop once a curvature radius spans fewer than `1/RESOLUTION_LIMIT` cells.
pub const RESOLUTION_LIMIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    Imcf,
    Brendle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub kind: FlowKind,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    pub record_every: f64,
    #[serde(default = "default_tol_monotone")]
    pub tol_monotone: f64,
    /// Heintze-Karcher slack relative to the area.
    #[serde(default = "default_tol_hk")]
    pub tol_hk: f64,
    /// Caps the step; with constant data the step bound is otherwise the only limit.
    #[serde(default)]
    pub max_dt: Option<f64>,
    /// Uses exactly this step, ignoring the step bound; meant for refinement
    /// studies on data whose derivatives vanish, such as centred spheres.
    #[serde(default)]
    pub fixed_dt: Option<f64>,
}

fn default_cfl() -> f64 {
    0.2
}

fn default_tol_monotone() -> f64 {
    1e-8
}

fn default_tol_hk() -> f64 {
    1e-7
}

impl FlowSpec {
    pub fn new(kind: FlowKind, t_end: f64, record_every: f64) -> Self {
        Self {
            kind,
            t_end,
            cfl: default_cfl(),
            record_every,
            tol_monotone: default_tol_monotone(),
            tol_hk: default_tol_hk(),
            max_dt: None,
            fixed_dt: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(LabError::Domain(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 0.5) {
            return Err(LabError::Domain(format!("cfl must lie in (0, 0.5], got {}", self.cfl)));
        }
        if !(self.record_every > 0.0) {
            return Err(LabError::Domain(format!(
                "record_every must be positive, got {}",
                self.record_every
            )));
        }
        if !(self.tol_monotone >= 0.0 && self.tol_hk >= 0.0) {
            return Err(LabError::Domain("tolerances must be nonnegative".into()));
        }
        for (name, v) in [("max_dt", self.max_dt), ("fixed_dt", self.fixed_dt)] {
            if let Some(dt) = v {
                if !(dt > 0.0 && dt.is_finite()) {
                    return Err(LabError::Domain(format!("{name} must be positive, got {dt}")));
                }
            }
        }
        Ok(())
    }
}

/// Graph velocity `du/dt` of the flow.
pub fn velocity(fields: &GeometryFields, kind: FlowKind) -> AxisymField {
    match kind {
        FlowKind::Imcf => fields.w.zip_map(&fields.h, |w, h| w / h),
        FlowKind::Brendle => fields.rho.zip_map(&fields.w, |r, w| -r * w),
    }
}

fn checked_velocity(graph: &RadialGraph, kind: FlowKind, t: f64) -> Result<AxisymField> {
    let fields = compute_fields(graph).map_err(|e| match e {
        LabError::Geometry { node, reason } => LabError::Flow { t, node, reason },
        other => other,
    })?;
    if kind == FlowKind::Imcf {
        if let Some(node) = fields.h.iter().position(|&h| h <= 0.0) {
            return Err(LabError::Flow {
                t,
                node,
                reason: format!("mean curvature {:e} is not positive", fields.h[node]),
            });
        }
    }
    Ok(velocity(&fields, kind))
}

fn shifted(graph: &RadialGraph, k: &AxisymField, scale: f64, t: f64) -> Result<RadialGraph> {
    let u: Vec<f64> = graph.u().iter().zip(k.iter()).map(|(u, k)| u + scale * k).collect();
    graph.with_u(u.into()).map_err(|e| match e {
        LabError::Geometry { node, reason } => LabError::Flow { t, node, reason },
        other => other,
    })
}

/// One classical RK4 step of the graph evolution.
pub fn step(graph: &RadialGraph, kind: FlowKind, dt: f64) -> Result<RadialGraph> {
    step_at(graph, kind, dt, 0.0)
}

fn step_at(graph: &RadialGraph, kind: FlowKind, dt: f64, t: f64) -> Result<RadialGraph> {
    if dt == 0.0 {
        return Ok(graph.clone());
    }
    let k1 = checked_velocity(graph, kind, t)?;
    let k2 = checked_velocity(&shifted(graph, &k1, 0.5 * dt, t)?, kind, t + 0.5 * dt)?;
    let k3 = checked_velocity(&shifted(graph, &k2, 0.5 * dt, t)?, kind, t + 0.5 * dt)?;
    let k4 = checked_velocity(&shifted(graph, &k3, dt, t)?, kind, t + dt)?;
    let u: Vec<f64> = (0..graph.u().len())
        .map(|i| graph.u()[i] + dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]))
        .collect();
    graph.with_u(u.into()).map_err(|e| match e {
        LabError::Geometry { node, reason } => LabError::Flow { t: t + dt, node, reason },
        other => other,
    })
}

/// Step bound: `cfl h^2 min(H rho'^2)` for IMCF, `cfl h^2 / max rho` for Brendle.
pub fn stable_dt(graph: &RadialGraph, fields: &GeometryFields, kind: FlowKind, cfl: f64) -> f64 {
    let h2 = graph.grid().h_step().powi(2);
    match kind {
        FlowKind::Imcf => {
            let m = fields
                .h
                .iter()
                .zip(fields.rho_dot.iter())
                .map(|(h, s)| h * s * s)
                .fold(f64::INFINITY, f64::min);
            cfl * h2 * m
        }
        FlowKind::Brendle => cfl * h2 / fields.rho.max(),
    }
}

/// Outcome of one monotonicity check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub pass: bool,
    /// Signed margin; negative means violated by that amount.
    pub margin: f64,
    pub slack: f64,
    /// False when the check does not apply on this step.
    pub applies: bool,
}

impl Check {
    fn new(margin: f64, slack: f64) -> Self {
        Self { pass: margin >= -slack, margin, slack, applies: true }
    }

    fn skipped() -> Self {
        Self { pass: true, margin: 0.0, slack: 0.0, applies: false }
    }
}

/// Per-step audit of the inverse mean curvature flow laws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditResult {
    /// `d log A/dt = 1`.
    pub area_law: Check,
    /// `(J - K)/A_n^{n/(n-1)}` nondecreasing.
    pub support_gap: Check,
    /// `L` nonincreasing while `J <= K`.
    pub l_monotone: Check,
    /// `dJ/dt >= n/(n-1) J`.
    pub support_growth: Check,
    /// Heintze-Karcher deficit nonnegative.
    pub heintze_karcher: Check,
}

impl AuditResult {
    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.pass)
    }

    pub fn checks(&self) -> [Check; 5] {
        [self.area_law, self.support_gap, self.l_monotone, self.support_growth, self.heintze_karcher]
    }
}

/// Slack for the per-step audit; every entry scales with `dt` except the
/// Heintze-Karcher bound, which is relative to the area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditTolerance {
    pub monotone: f64,
    pub hk: f64,
}

impl Default for AuditTolerance {
    fn default() -> Self {
        Self { monotone: default_tol_monotone(), hk: default_tol_hk() }
    }
}

impl From<&FlowSpec> for AuditTolerance {
    fn from(spec: &FlowSpec) -> Self {
        Self { monotone: spec.tol_monotone, hk: spec.tol_hk }
    }
}

/// Audits an inverse mean curvature flow step of size `dt`.
pub fn audit_step(
    before: &FunctionalReport,
    after: &FunctionalReport,
    dt: f64,
    tol: AuditTolerance,
) -> AuditResult {
    let nf = before.n as f64;
    let omega = before.kq / before.area_normalized.powf(nf / (nf - 1.0));
    let slack = tol.monotone * dt.abs();
    // Differences of O(1) quantities carry rounding error even as dt -> 0.
    let ulp = |scale: f64| ROUNDOFF_ULPS * f64::EPSILON * scale.abs();

    let area_law = {
        let dev = ((after.area / before.area).ln() - dt).abs();
        Check::new(-dev, slack + ulp(1.0))
    };
    let gap_scale = (before.j.abs() + before.kq.abs()) / before.area_normalized.powf(nf / (nf - 1.0));
    let support_gap = Check::new(
        after.normalized_support_gap() - before.normalized_support_gap(),
        slack * omega + ulp(gap_scale),
    );
    let l_monotone = if before.j <= before.kq && after.j <= after.kq {
        Check::new(before.l - after.l, slack * (nf - 1.0) * omega + ulp(before.l))
    } else {
        Check::skipped()
    };
    let support_growth = Check::new(
        (after.j - before.j) - nf / (nf - 1.0) * before.j * dt,
        slack * before.j + ulp(after.j),
    );
    let heintze_karcher = match after.hk_deficit {
        Some(d) => Check::new(d, tol.hk * after.area),
        None => Check { pass: false, margin: f64::NEG_INFINITY, slack: 0.0, applies: true },
    };
    AuditResult { area_law, support_gap, l_monotone, support_growth, heintze_karcher }
}

/// One recorded sample of a flow run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowRow {
    pub t: f64,
    pub report: FunctionalReport,
    pub min_h: f64,
    pub max_h: f64,
    /// `max |kappa_i - 1|`.
    pub max_kappa_dev: f64,
    /// `sup |v'|`.
    pub sup_dv: f64,
    /// `sup |g(t) - g(t_prev)|` with `g = u - t/(n-1)`; zero on the first row.
    pub profile_drift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FlowOutcome {
    Completed,
    /// Brendle flow reached extinction; `t_star` extrapolates the last speed.
    Extinct { t_last: f64, t_star: f64 },
    /// Brendle flow stopped because the geometry stopped being resolvable.
    Unresolved { t_last: f64, reason: String },
    Aborted { t: f64, reason: String },
}

/// Worst audit margins seen over a run, per check.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AuditSummary {
    pub steps: usize,
    pub halvings: usize,
    pub worst_area_law: f64,
    pub worst_support_gap: f64,
    pub worst_l_monotone: f64,
    pub worst_support_growth: f64,
    pub worst_heintze_karcher: f64,
    /// Brendle runs: worst increase of the Heintze-Karcher deficit.
    pub worst_deficit_increase: f64,
}

impl AuditSummary {
    fn absorb(&mut self, a: &AuditResult) {
        let norm = |c: &Check| if c.applies { c.margin } else { f64::INFINITY };
        self.worst_area_law = self.worst_area_law.min(norm(&a.area_law));
        self.worst_support_gap = self.worst_support_gap.min(norm(&a.support_gap));
        self.worst_l_monotone = self.worst_l_monotone.min(norm(&a.l_monotone));
        self.worst_support_growth = self.worst_support_growth.min(norm(&a.support_growth));
        self.worst_heintze_karcher = self.worst_heintze_karcher.min(norm(&a.heintze_karcher));
    }

    fn fresh() -> Self {
        Self {
            steps: 0,
            halvings: 0,
            worst_area_law: f64::INFINITY,
            worst_support_gap: f64::INFINITY,
            worst_l_monotone: f64::INFINITY,
            worst_support_growth: f64::INFINITY,
            worst_heintze_karcher: f64::INFINITY,
            worst_deficit_increase: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub kind: FlowKind,
    pub n: usize,
    pub rows: Vec<FlowRow>,
    /// First time with `J >= K`.
    pub crossing_t0: Option<f64>,
    pub initial_graph: RadialGraph,
    pub final_graph: RadialGraph,
    pub outcome: FlowOutcome,
    pub audit: AuditSummary,
}

impl FlowTrace {
    pub fn is_completed(&self) -> bool {
        !matches!(self.outcome, FlowOutcome::Aborted { .. })
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }
}

struct State {
    graph: RadialGraph,
    fields: GeometryFields,
    report: FunctionalReport,
}

impl State {
    fn new(graph: RadialGraph) -> Result<Self> {
        let fields = compute_fields(&graph)?;
        let report = evaluate(graph.grid(), &fields)?;
        Ok(Self { graph, fields, report })
    }
}

fn make_row(t: f64, s: &State, prev: Option<(&RadialGraph, f64)>) -> FlowRow {
    let nf = s.graph.dimension() as f64;
    let profile_drift = prev
        .map(|(g, tp)| {
            s.graph
                .u()
                .iter()
                .zip(g.u().iter())
                .map(|(a, b)| ((a - t / (nf - 1.0)) - (b - tp / (nf - 1.0))).abs())
                .fold(0.0, f64::max)
        })
        .unwrap_or(0.0);
    FlowRow {
        t,
        report: s.report,
        min_h: s.fields.min_mean_curvature(),
        max_h: s.fields.max_mean_curvature(),
        max_kappa_dev: s.fields.max_kappa_deviation(),
        sup_dv: s.fields.dv.max_abs(),
        profile_drift,
    }
}

/// Largest `|kappa| * (cell arc length)` over the hypersurface.
fn resolution_ratio(graph: &RadialGraph, f: &GeometryFields) -> f64 {
    let h = graph.grid().h_step();
    (0..f.h.len())
        .map(|i| {
            let k = f.kappa_rad[i].abs().max(f.kappa_ang[i].abs());
            k * f.rho_dot[i] * f.w[i] * h
        })
        .fold(0.0, f64::max)
}

/// Evolves `graph` under `spec`, recording a row every `record_every`.
pub fn run(graph: &RadialGraph, spec: &FlowSpec) -> Result<FlowTrace> {
    spec.validate()?;
    let kind = spec.kind;
    let tol = AuditTolerance::from(spec);
    let mut state = State::new(graph.clone())?;
    if kind == FlowKind::Imcf && state.report.min_h <= 0.0 {
        return Err(LabError::NotMeanConvex { min_h: state.report.min_h });
    }

    let mut rows = vec![make_row(0.0, &state, None)];
    let mut last_recorded = state.graph.clone();
    let mut crossing_t0 = (state.report.j >= state.report.kq).then_some(0.0);
    let mut audit = AuditSummary::fresh();
    let mut t = 0.0;
    let mut next_record = spec.record_every;
    let mut outcome = FlowOutcome::Completed;

    'outer: while t < spec.t_end * (1.0 - 1e-14) {
        let mut dt = stable_dt(&state.graph, &state.fields, kind, spec.cfl);
        if let Some(cap) = spec.max_dt {
            dt = dt.min(cap);
        }
        if let Some(fixed) = spec.fixed_dt {
            dt = fixed;
        }
        let target = next_record.min(spec.t_end);
        let hits_record = t + dt >= target * (1.0 - 1e-14);
        if hits_record {
            dt = target - t;
        }

        let mut accepted = None;
        let mut last_reason = String::new();
        for halving in 0..=MAX_HALVINGS {
            let trial_dt = dt / f64::powi(2.0, halving as i32);
            let candidate = match step_at(&state.graph, kind, trial_dt, t).and_then(State::new) {
                Ok(c) => c,
                Err(e) if kind == FlowKind::Brendle => {
                    outcome = FlowOutcome::Unresolved { t_last: t, reason: e.to_string() };
                    break 'outer;
                }
                Err(e) => {
                    last_reason = e.to_string();
                    continue;
                }
            };
            match kind {
                FlowKind::Imcf => {
                    let a = audit_step(&state.report, &candidate.report, trial_dt, tol);
                    if a.passed() {
                        audit.absorb(&a);
                        audit.halvings += halving as usize;
                        accepted = Some((candidate, trial_dt));
                        break;
                    }
                    last_reason = format!("monotonicity audit failed: {a:?}");
                }
                FlowKind::Brendle => {
                    if candidate.report.min_h <= 0.0 {
                        outcome = FlowOutcome::Unresolved {
                            t_last: t,
                            reason: format!("mean curvature reached {:e}", candidate.report.min_h),
                        };
                        break 'outer;
                    }
                    let before = state.report.hk_deficit.unwrap_or(f64::NAN);
                    let after = candidate.report.hk_deficit.unwrap_or(f64::NAN);
                    let increase = after - before;
                    let slack = spec.tol_monotone * trial_dt * state.report.area;
                    if increase <= slack {
                        audit.worst_deficit_increase = audit.worst_deficit_increase.max(increase);
                        audit.halvings += halving as usize;
                        accepted = Some((candidate, trial_dt));
                        break;
                    }
                    last_reason = format!("deficit increased by {increase:e}");
                }
            }
        }

        let Some((next, taken)) = accepted else {
            outcome = FlowOutcome::Aborted { t, reason: last_reason };
            break;
        };
        audit.steps += 1;
        let t_next = if taken == dt && hits_record { target } else { t + taken };

        let gap_before = state.report.j - state.report.kq;
        let gap_after = next.report.j - next.report.kq;
        if crossing_t0.is_none() && gap_before < 0.0 && gap_after >= 0.0 {
            crossing_t0 = Some(t + taken * (-gap_before) / (gap_after - gap_before));
        }

        state = next;
        t = t_next;
        if taken == dt && hits_record {
            let row = make_row(t, &state, Some((&last_recorded, rows.last().map_or(0.0, |r| r.t))));
            rows.push(row);
            last_recorded = state.graph.clone();
            next_record += spec.record_every;
        }

        if kind == FlowKind::Brendle {
            if state.fields.d_sigma.min() < EXTINCTION_DENSITY {
                if rows.last().is_none_or(|r| r.t < t) {
                    rows.push(make_row(t, &state, Some((&last_recorded, rows.last().unwrap().t))));
                }
                let vel = velocity(&state.fields, kind);
                let (imax, umax) = state
                    .graph
                    .u()
                    .iter()
                    .copied()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (i, u)| if u > acc.1 { (i, u) } else { acc });
                let t_star = t + umax / vel[imax].abs();
                outcome = FlowOutcome::Extinct { t_last: t, t_star };
                break;
            }
            let ratio = resolution_ratio(&state.graph, &state.fields);
            if ratio > RESOLUTION_LIMIT {
                if rows.last().is_none_or(|r| r.t < t) {
                    rows.push(make_row(t, &state, Some((&last_recorded, rows.last().unwrap().t))));
                }
                outcome = FlowOutcome::Unresolved {
                    t_last: t,
                    reason: format!("curvature radius below {:.0} cells", 1.0 / RESOLUTION_LIMIT),
                };
                break;
            }
        }
    }

    Ok(FlowTrace {
        kind,
        n: graph.dimension(),
        rows,
        crossing_t0,
        initial_graph: graph.clone(),
        final_graph: state.graph,
        outcome,
        audit,
    })
}

/// Least-squares slope of `log y` against `t` over rows with `t` in `[t_from, t_to]`.
/// Returns `None` when fewer than three rows have positive `y`.
pub fn fit_log_rate(rows: &[FlowRow], t_from: f64, t_to: f64, y: impl Fn(&FlowRow) -> f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.t >= t_from - 1e-12 && r.t <= t_to + 1e-12)
        .map(|r| (r.t, y(r)))
        .filter(|(_, v)| *v > 0.0 && v.is_finite())
        .map(|(t, v)| (t, v.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticsSummary {
    pub n: usize,
    pub t_end: f64,
    pub fit_window: (f64, f64),
    /// Fitted exponential rate of `max |kappa - 1|`.
    pub kappa_rate: Option<f64>,
    /// Fitted exponential rate of `sup |v'|`.
    pub dv_rate: Option<f64>,
    /// `-1/(n-1)`.
    pub reference_rate: f64,
    /// `u(t_end) - t_end/(n-1)` at every node.
    pub limit_profile: Vec<f64>,
    /// Oscillation `max f - min f` of the limit profile.
    pub limit_profile_oscillation: f64,
    /// Drift of the profile between the last two recorded rows.
    pub profile_drift: f64,
    /// `L(t_end) - (n-1) omega`.
    pub l_margin_final: f64,
    /// `min_t L(t) - (n-1) omega` over the trace.
    pub l_margin_min: f64,
    /// Largest increase of `L` between rows where `J <= K` at both ends;
    /// `None` when no such pair of rows exists.
    pub l_max_increase_while_j_le_k: Option<f64>,
}

/// Late-time diagnostics of an inverse mean curvature flow trace; fits use
/// the last half of the recorded time interval.
pub fn asymptotics_report(trace: &FlowTrace) -> Result<AsymptoticsSummary> {
    let t_end = trace.rows.last().map_or(0.0, |r| r.t);
    asymptotics_report_window(trace, 0.5 * t_end, t_end)
}

pub fn asymptotics_report_window(trace: &FlowTrace, t_from: f64, t_to: f64) -> Result<AsymptoticsSummary> {
    if trace.kind != FlowKind::Imcf {
        return Err(LabError::Diagnostic("asymptotics need an inverse mean curvature flow trace".into()));
    }
    let rows = &trace.rows;
    let in_window = rows.iter().filter(|r| r.t >= t_from - 1e-12 && r.t <= t_to + 1e-12).count();
    if rows.len() < 4 || in_window < 3 {
        return Err(LabError::Diagnostic(format!(
            "trace too short: {} rows, {in_window} in the fit window",
            rows.len()
        )));
    }
    let n = trace.n;
    let nf = n as f64;
    let last = rows.last().expect("nonempty");
    let omega = crate::grid::unit_sphere_area(n - 1)?;
    let bound = (nf - 1.0) * omega;
    let limit_profile: Vec<f64> = trace.final_graph.u().iter().map(|u| u - last.t / (nf - 1.0)).collect();
    let osc = limit_profile.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - limit_profile.iter().copied().fold(f64::INFINITY, f64::min);
    let l_max_increase = rows
        .windows(2)
        .filter(|w| w[0].report.j <= w[0].report.kq && w[1].report.j <= w[1].report.kq)
        .map(|w| w[1].report.l - w[0].report.l)
        .reduce(f64::max);
    Ok(AsymptoticsSummary {
        n,
        t_end: last.t,
        fit_window: (t_from, t_to),
        kappa_rate: fit_log_rate(rows, t_from, t_to, |r| r.max_kappa_dev),
        dv_rate: fit_log_rate(rows, t_from, t_to, |r| r.sup_dv),
        reference_rate: -1.0 / (nf - 1.0),
        limit_profile_oscillation: osc,
        limit_profile,
        profile_drift: last.profile_drift,
        l_margin_final: last.report.l - bound,
        l_margin_min: rows.iter().map(|r| r.report.l - bound).fold(f64::INFINITY, f64::min),
        l_max_increase_while_j_le_k: l_max_increase,
    })
}

/// Exact radius of a centred sphere under the inverse mean curvature flow.
pub fn imcf_sphere_radius(r0: f64, n: usize, t: f64) -> f64 {
    (r0.sinh() * (t / (n as f64 - 1.0)).exp()).asinh()
}

/// Gudermannian function `gd(x) = 2 atan(tanh(x/2))`.
pub fn gudermannian(x: f64) -> f64 {
    2.0 * (0.5 * x).tanh().atan()
}

/// Exact radius of a centred sphere under the Brendle flow, `gd(u) = gd(r0) - t`.
pub fn brendle_sphere_radius(r0: f64, t: f64) -> Option<f64> {
    let g = gudermannian(r0) - t;
    // inverse Gudermannian: 2 atanh(tan(g/2))
    (g > 0.0).then(|| 2.0 * (0.5 * g).tan().atanh())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SphereGrid;
    use crate::shapes::{build, ShapeSpec};

    fn sphere(n: usize, m: usize, r: f64) -> RadialGraph {
        build(&ShapeSpec::CenteredSphere { r }, &SphereGrid::new(n, m).unwrap()).unwrap()
    }

    fn perturbed(m: usize) -> RadialGraph {
        build(&ShapeSpec::PerturbedSphere { r: 1.0, eps: 0.05, l: 2 }, &SphereGrid::new(3, m).unwrap()).unwrap()
    }

    #[test]
    fn zero_step_is_identity() {
        let g = perturbed(64);
        assert_eq!(step(&g, FlowKind::Imcf, 0.0).unwrap(), g);
        assert_eq!(step(&g, FlowKind::Brendle, 0.0).unwrap(), g);
    }

    #[test]
    fn sphere_steps_match_closed_forms() {
        let g = sphere(3, 32, 1.0);
        let mut cur = g.clone();
        for _ in 0..10 {
            cur = step(&cur, FlowKind::Imcf, 0.05).unwrap();
        }
        assert!((cur.u()[0] - imcf_sphere_radius(1.0, 3, 0.5)).abs() < 1e-9);
        let mut cur = g;
        for _ in 0..10 {
            cur = step(&cur, FlowKind::Brendle, 0.02).unwrap();
        }
        assert!((cur.u()[0] - brendle_sphere_radius(1.0, 0.2).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn closed_form_solutions_solve_their_odes() {
        // du/dt = tanh(u)/(n-1) and du/dt = -cosh(u), by centred differences.
        let e = 1e-5;
        for t in [0.1, 0.7, 2.0] {
            let d = (imcf_sphere_radius(1.0, 4, t + e) - imcf_sphere_radius(1.0, 4, t - e)) / (2.0 * e);
            assert!((d - imcf_sphere_radius(1.0, 4, t).tanh() / 3.0).abs() < 1e-8);
        }
        for t in [0.1, 0.4, 0.8] {
            let d = (brendle_sphere_radius(1.0, t + e).unwrap() - brendle_sphere_radius(1.0, t - e).unwrap()) / (2.0 * e);
            assert!((d + brendle_sphere_radius(1.0, t).unwrap().cosh()).abs() < 1e-6);
        }
        assert!((gudermannian(1.0) - 0.865_769_483).abs() < 1e-9);
        assert!(brendle_sphere_radius(1.0, 0.9).is_none());
    }

    #[test]
    fn imcf_rejects_non_mean_convex_start() {
        let g = SphereGrid::new(3, 128).unwrap();
        let u = g.sample(|p| 1.0 - 0.6 * (-(p / 0.2).powi(2)).exp());
        let graph = RadialGraph::new(g, u).unwrap();
        let spec = FlowSpec::new(FlowKind::Imcf, 1.0, 0.5);
        assert!(matches!(run(&graph, &spec), Err(LabError::NotMeanConvex { .. })));
    }

    #[test]
    fn audit_detects_time_reversal() {
        let g = perturbed(64);
        let before = State::new(g.clone()).unwrap().report;
        let dt = 1e-3;
        let fwd = State::new(step(&g, FlowKind::Imcf, dt).unwrap()).unwrap().report;
        let back = State::new(step(&g, FlowKind::Imcf, -dt).unwrap()).unwrap().report;
        let tol = AuditTolerance::default();
        assert!(audit_step(&before, &fwd, dt, tol).passed());
        let bad = audit_step(&before, &back, dt, tol);
        assert!(!bad.area_law.pass);
    }

    #[test]
    fn audit_on_sphere_is_equality_case() {
        let g = sphere(3, 64, 1.0);
        let before = State::new(g.clone()).unwrap().report;
        let dt = 1e-3;
        let after = State::new(step(&g, FlowKind::Imcf, dt).unwrap()).unwrap().report;
        let a = audit_step(&before, &after, dt, AuditTolerance::default());
        assert!(a.passed(), "{a:?}");
        assert!(a.support_gap.margin.abs() < 1e-10);
        assert!(a.l_monotone.margin.abs() < 1e-10);
    }

    #[test]
    fn audit_support_gap_strictly_increases_off_umbilic() {
        let g = perturbed(128);
        let before = State::new(g.clone()).unwrap().report;
        let dt = 1e-3;
        let after = State::new(step(&g, FlowKind::Imcf, dt).unwrap()).unwrap().report;
        let a = audit_step(&before, &after, dt, AuditTolerance::default());
        assert!(a.passed(), "{a:?}");
        assert!(a.support_gap.margin > 1e-6, "{}", a.support_gap.margin);
    }

    #[test]
    fn spec_validation() {
        let mut s = FlowSpec::new(FlowKind::Imcf, 1.0, 0.1);
        assert!(s.validate().is_ok());
        s.cfl = 0.6;
        assert!(s.validate().is_err());
        s.cfl = 0.2;
        s.t_end = 0.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn fit_recovers_known_rate() {
        let rows: Vec<FlowRow> = (0..10)
            .map(|k| {
                let t = k as f64;
                let mut row = dummy_row();
                row.t = t;
                row.max_kappa_dev = 3.0 * (-0.7 * t).exp();
                row
            })
            .collect();
        let r = fit_log_rate(&rows, 0.0, 9.0, |r| r.max_kappa_dev).unwrap();
        assert!((r + 0.7).abs() < 1e-12);
        assert!(fit_log_rate(&rows[..2], 0.0, 9.0, |r| r.max_kappa_dev).is_none());
    }

    fn dummy_row() -> FlowRow {
        let g = sphere(3, 16, 1.0);
        let s = State::new(g).unwrap();
        make_row(0.0, &s, None)
    }
}
