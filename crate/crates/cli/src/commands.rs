//! The four experiment commands. Each writes its files into one directory and
//! returns whether every configured tolerance held.

use std::path::{Path, PathBuf};

use imcf_lab::convergence::{flow_ladder, statics_ladder, ConvergenceTable};
use imcf_lab::flow::{asymptotics_report, gudermannian, AsymptoticsSummary, AuditSummary, FlowOutcome};
use imcf_lab::functionals::CSV_COLUMNS;
use imcf_lab::mass::{
    build_profile, decay_rate, mass_functional, penrose_check, MassFunctionalEstimate, PenroseVerdict,
    DEFAULT_GEODESIC_RADII, PROFILE_CSV_COLUMNS,
};
use imcf_lab::shapes::ClosedFormReport;
use imcf_lab::{
    build, compute_fields, evaluate, run, sphere_closed_forms, unit_sphere_area, FlowKind, FlowSpec,
    FunctionalReport, ShapeSpec, SphereGrid,
};
use serde::Serialize;

use crate::config::{ExperimentConfig, LadderKind, PenroseSpec, Tolerances};
use crate::error::CliError;
use crate::output::{fmt_f64, write_csv, write_csv_records, write_json};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyStatics,
    RunFlow,
    Penrose,
    Convergence,
}

/// Settings shared by every experiment of one invocation.
#[derive(Debug, Clone)]
pub struct Context {
    /// Output root; overrides `output_dir` from the config.
    pub out: Option<PathBuf>,
    pub tolerance_scale: f64,
    /// Reserved; no command draws random numbers.
    pub seed: Option<u64>,
}

impl Default for Context {
    fn default() -> Self {
        Self { out: None, tolerance_scale: 1.0, seed: None }
    }
}

impl Context {
    pub fn experiment_dir(&self, cfg: &ExperimentConfig) -> PathBuf {
        let root = self.out.clone().or_else(|| cfg.output_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
        root.join(cfg.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Default)]
struct Checks(Vec<CheckLine>);

impl Checks {
    /// `value <= limit`.
    fn at_most(&mut self, name: &str, value: f64, limit: f64) {
        self.0.push(CheckLine { name: name.into(), value, limit, pass: value <= limit });
    }

    /// `value >= limit`.
    fn at_least(&mut self, name: &str, value: f64, limit: f64) {
        self.0.push(CheckLine { name: name.into(), value, limit, pass: value >= limit });
    }

    fn pass(&self) -> bool {
        self.0.iter().all(|c| c.pass)
    }
}

/// What a command reports back to the driver.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandReport {
    pub pass: bool,
    pub dir: PathBuf,
    pub failed: Vec<String>,
}

impl CommandReport {
    fn new(dir: &Path, checks: &Checks) -> Self {
        Self {
            pass: checks.pass(),
            dir: dir.to_path_buf(),
            failed: checks.0.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect(),
        }
    }
}

pub fn execute(cmd: Command, cfg: &ExperimentConfig, ctx: &Context) -> Result<CommandReport, CliError> {
    if !(ctx.tolerance_scale > 0.0 && ctx.tolerance_scale.is_finite()) {
        return Err(CliError::Invalid(format!("tolerance scale must be positive, got {}", ctx.tolerance_scale)));
    }
    let tol = cfg.tolerances.scaled(ctx.tolerance_scale);
    let dir = ctx.experiment_dir(cfg);
    match cmd {
        Command::VerifyStatics => verify_statics(cfg, &tol, &dir),
        Command::RunFlow => run_flow(cfg, &tol, ctx.tolerance_scale, &dir),
        Command::Penrose => penrose(cfg, &tol, &dir),
        Command::Convergence => convergence(cfg, &tol, ctx.tolerance_scale, &dir),
    }
}

fn scaled_flow(spec: &FlowSpec, factor: f64) -> FlowSpec {
    FlowSpec { tol_monotone: spec.tol_monotone * factor, tol_hk: spec.tol_hk * factor, ..*spec }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

#[derive(Serialize)]
struct StaticsSummary<'a> {
    experiment: &'a str,
    n: usize,
    m: usize,
    shape: &'a ShapeSpec,
    report: FunctionalReport,
    af_margin: f64,
    bhw_margin: f64,
    l_margin: f64,
    umbilicity_defect: f64,
    closed_form: Option<ClosedFormReport>,
    checks: &'a [CheckLine],
    pass: bool,
}

pub fn verify_statics(cfg: &ExperimentConfig, tol: &Tolerances, dir: &Path) -> Result<CommandReport, CliError> {
    let (n, m, shape) = (cfg.n, cfg.grid_size()?, cfg.shape()?);
    let grid = SphereGrid::new(n, m)?;
    let graph = build(shape, &grid)?;
    let fields = compute_fields(&graph)?;
    let r = evaluate(&grid, &fields)?;
    let bound = (n as f64 - 1.0) * unit_sphere_area(n - 1)?;

    let mut c = Checks::default();
    c.at_most("mink1_residual", r.mink1_residual.abs(), tol.identity * r.area);
    c.at_most("mink2_residual", r.mink2_residual.abs(), tol.identity * r.area * r.max_h);
    c.at_least("hk_deficit", r.hk_deficit.unwrap_or(f64::NEG_INFINITY), -tol.hk * r.area);
    c.at_least("af_margin", r.af_margin(), -tol.inequality * r.af_rhs);
    c.at_least("l_margin", r.l - bound, -tol.inequality * bound);
    c.at_least("bhw_margin", r.bhw_margin(), -tol.inequality * bound);

    let closed_form = match *shape {
        ShapeSpec::CenteredSphere { r: radius } => {
            let cf = sphere_closed_forms(radius, n)?;
            for (name, got, want) in [
                ("closed_form_A", r.area, cf.area),
                ("closed_form_I", r.i, cf.i),
                ("closed_form_J", r.j, cf.j),
                ("closed_form_Kq", r.kq, cf.kq),
                ("closed_form_L", r.l, cf.l),
                ("closed_form_M", r.m, cf.m),
            ] {
                c.at_most(name, rel(got, want), tol.closed_form);
            }
            Some(cf)
        }
        ShapeSpec::OffcenterSphere { radius, .. } => {
            let cf = sphere_closed_forms(radius, n)?;
            c.at_most("closed_form_A", rel(r.area, cf.area), tol.closed_form);
            c.at_most("umbilicity_defect", fields.max_umbilicity_defect() / cf.h, tol.closed_form);
            Some(cf)
        }
        ShapeSpec::PerturbedSphere { .. } => None,
    };

    write_csv(&dir.join("statics.csv"), &CSV_COLUMNS, &[r.csv_values(0.0)])?;
    let summary = StaticsSummary {
        experiment: cfg.name(),
        n,
        m,
        shape,
        report: r,
        af_margin: r.af_margin(),
        bhw_margin: r.bhw_margin(),
        l_margin: r.l - bound,
        umbilicity_defect: fields.max_umbilicity_defect(),
        closed_form,
        checks: &c.0,
        pass: c.pass(),
    };
    write_json(&dir.join("statics.json"), &summary)?;
    Ok(CommandReport::new(dir, &c))
}

#[derive(Serialize)]
struct Extinction {
    t_star: f64,
    /// `gd(r0)` for a centred sphere.
    reference: Option<f64>,
    error: Option<f64>,
}

#[derive(Serialize)]
struct FlowSummary<'a> {
    experiment: &'a str,
    n: usize,
    m: usize,
    shape: &'a ShapeSpec,
    flow: FlowSpec,
    outcome: &'a FlowOutcome,
    audit: AuditSummary,
    rows: usize,
    t_last: f64,
    crossing_t0: Option<f64>,
    final_report: FunctionalReport,
    asymptotics: Option<AsymptoticsSummary>,
    extinction: Option<Extinction>,
    /// Heintze-Karcher deficit at the last row over its initial value.
    final_deficit_ratio: Option<f64>,
    checks: &'a [CheckLine],
    pass: bool,
}

pub fn run_flow(cfg: &ExperimentConfig, tol: &Tolerances, scale: f64, dir: &Path) -> Result<CommandReport, CliError> {
    let (n, m, shape) = (cfg.n, cfg.grid_size()?, cfg.shape()?);
    let spec = scaled_flow(cfg.flow()?, scale);
    let grid = SphereGrid::new(n, m)?;
    let graph = build(shape, &grid)?;
    let trace = run(&graph, &spec)?;
    let nf = n as f64;
    let first = trace.rows[0];
    let last = *trace.rows.last().expect("a trace has its initial row");

    let mut c = Checks::default();
    let aborted = matches!(trace.outcome, FlowOutcome::Aborted { .. });
    c.at_most("audit_aborted", if aborted { 1.0 } else { 0.0 }, 0.0);

    let mut diag_header = vec!["t", "min_h", "max_h", "max_kappa_dev", "sup_dv", "profile_drift"];
    let mut diag_rows = Vec::with_capacity(trace.rows.len());
    let mut extinction = None;
    let mut asymptotics = None;
    match spec.kind {
        FlowKind::Imcf => {
            diag_header.extend(["area_law_residual", "k_law_residual", "normalized_support_gap"]);
            let (mut worst_area, mut worst_k, mut worst_hk) = (0.0_f64, 0.0_f64, f64::INFINITY);
            for row in &trace.rows {
                let a = row.report.area / (first.report.area * row.t.exp()) - 1.0;
                let k = row.report.kq / (first.report.kq * (nf * row.t / (nf - 1.0)).exp()) - 1.0;
                worst_area = worst_area.max(a.abs());
                worst_k = worst_k.max(k.abs());
                let hk = row.report.hk_deficit.map_or(f64::NEG_INFINITY, |d| d / row.report.area);
                worst_hk = worst_hk.min(hk);
                diag_rows.push(vec![
                    row.t,
                    row.min_h,
                    row.max_h,
                    row.max_kappa_dev,
                    row.sup_dv,
                    row.profile_drift,
                    a,
                    k,
                    row.report.normalized_support_gap(),
                ]);
            }
            c.at_most("area_law", worst_area, tol.area_law);
            c.at_most("k_law", worst_k, tol.area_law);
            c.at_least("hk_deficit_over_area", worst_hk, -tol.hk);
            asymptotics = asymptotics_report(&trace).ok();
        }
        FlowKind::Brendle => {
            diag_header.push("deficit_ratio");
            let d0 = first.report.hk_deficit.unwrap_or(f64::NAN);
            for row in &trace.rows {
                let d = row.report.hk_deficit.unwrap_or(f64::NAN);
                diag_rows.push(vec![
                    row.t,
                    row.min_h,
                    row.max_h,
                    row.max_kappa_dev,
                    row.sup_dv,
                    row.profile_drift,
                    d / d0,
                ]);
            }
            if let FlowOutcome::Extinct { t_star, .. } = trace.outcome {
                let reference = match *shape {
                    ShapeSpec::CenteredSphere { r } => Some(gudermannian(r)),
                    _ => None,
                };
                let error = reference.map(|g| (t_star - g).abs());
                if let Some(e) = error {
                    c.at_most("extinction_time", e, tol.extinction);
                }
                extinction = Some(Extinction { t_star, reference, error });
            } else if let ShapeSpec::CenteredSphere { .. } = shape {
                c.at_most("extinction_reached", 1.0, 0.0);
            }
        }
    }

    let trace_rows: Vec<[f64; 14]> = trace.rows.iter().map(|r| r.report.csv_values(r.t)).collect();
    write_csv(&dir.join("trace.csv"), &CSV_COLUMNS, &trace_rows)?;
    write_csv(&dir.join("diagnostics.csv"), &diag_header, &diag_rows)?;
    let summary = FlowSummary {
        experiment: cfg.name(),
        n,
        m,
        shape,
        flow: spec,
        outcome: &trace.outcome,
        audit: trace.audit,
        rows: trace.rows.len(),
        t_last: last.t,
        crossing_t0: trace.crossing_t0,
        final_report: last.report,
        asymptotics,
        extinction,
        final_deficit_ratio: match (first.report.hk_deficit, last.report.hk_deficit) {
            (Some(a), Some(b)) if a != 0.0 => Some(b / a),
            _ => None,
        },
        checks: &c.0,
        pass: c.pass(),
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(CommandReport::new(dir, &c))
}

#[derive(Serialize)]
struct PenroseSummary<'a> {
    experiment: &'a str,
    n: usize,
    spec: &'a PenroseSpec,
    horizon_r: f64,
    verdict: PenroseVerdict,
    /// `equality`, `strict` or `violated`.
    classification: &'static str,
    mass_functional: MassFunctionalEstimate,
    /// Fitted exponential decay rate of the metric deviation.
    decay_rate: f64,
    /// `R >= -n(n-1)` everywhere, as the inequality assumes.
    scalar_curvature_hypothesis: bool,
    checks: &'a [CheckLine],
    pass: bool,
}

pub fn penrose(cfg: &ExperimentConfig, tol: &Tolerances, dir: &Path) -> Result<CommandReport, CliError> {
    let spec = cfg.penrose()?;
    let n = cfg.n;
    let profile = build_profile(n, spec.family, spec.r_max, spec.node_count)?;
    let verdict = penrose_check(&profile)?;
    let b = verdict.breakdown;

    let mut c = Checks::default();
    c.at_most("cross_oracle_gap", verdict.cross_oracle_gap, tol.cross_oracle);
    c.at_least("penrose_margin", verdict.margin, -tol.equality);
    if let imcf_lab::mass::ProfileFamily::Adss { m } = spec.family {
        c.at_most("mass_formula_total", (b.mass_formula_total - m).abs(), tol.equality);
        c.at_most("mass_functional_limit", (b.mass_functional_limit - m).abs(), tol.equality);
        c.at_most("equality", verdict.margin.abs(), tol.equality);
    }
    let classification = if verdict.margin.abs() <= tol.equality {
        "equality"
    } else if verdict.margin > 0.0 {
        "strict"
    } else {
        "violated"
    };

    let rows = profile.table()?;
    write_csv(&dir.join("profile.csv"), &PROFILE_CSV_COLUMNS, &rows)?;
    let summary = PenroseSummary {
        experiment: cfg.name(),
        n,
        spec,
        horizon_r: profile.horizon_r,
        verdict,
        classification,
        mass_functional: mass_functional(&profile, &DEFAULT_GEODESIC_RADII)?,
        decay_rate: decay_rate(n, &spec.family, &DEFAULT_GEODESIC_RADII)?,
        scalar_curvature_hypothesis: !b.scalar_curvature_warning,
        checks: &c.0,
        pass: c.pass(),
    };
    write_json(&dir.join("penrose.json"), &summary)?;
    Ok(CommandReport::new(dir, &c))
}

#[derive(Serialize)]
struct ConvergenceSummary<'a> {
    experiment: &'a str,
    n: usize,
    ladder: LadderKind,
    shape: &'a ShapeSpec,
    flow: Option<FlowSpec>,
    table: &'a ConvergenceTable,
    min_order: Option<f64>,
    required_order: f64,
    pass: bool,
}

pub const ORDER_CSV_COLUMNS: [&str; 7] = ["name", "F_m", "F_2m", "F_4m", "diff_coarse", "diff_fine", "order"];

pub fn convergence(cfg: &ExperimentConfig, tol: &Tolerances, scale: f64, dir: &Path) -> Result<CommandReport, CliError> {
    let spec = cfg.convergence()?;
    let m0 = spec.base()?;
    let shape = cfg.shape()?;
    let (table, flow, required) = match spec.experiment {
        LadderKind::Statics => (statics_ladder(cfg.n, shape, m0)?, None, tol.min_order_statics),
        LadderKind::Flow => {
            let f = scaled_flow(cfg.flow()?, scale);
            (flow_ladder(cfg.n, shape, &f, m0)?, Some(f), tol.min_order_flow)
        }
    };

    let mut c = Checks::default();
    for e in &table.entries {
        // an order lost in roundoff counts as converged
        c.at_least(&format!("order_{}", e.name), e.order.unwrap_or(f64::INFINITY), required);
    }
    let records: Vec<Vec<String>> = table
        .entries
        .iter()
        .map(|e| {
            let mut row = vec![e.name.clone()];
            row.extend(e.values.iter().chain(&e.diffs).map(|x| fmt_f64(*x)));
            row.push(fmt_f64(e.order.unwrap_or(f64::NAN)));
            row
        })
        .collect();
    write_csv_records(&dir.join("convergence.csv"), &ORDER_CSV_COLUMNS, &records)?;
    let summary = ConvergenceSummary {
        experiment: cfg.name(),
        n: cfg.n,
        ladder: spec.experiment,
        shape,
        flow,
        table: &table,
        min_order: table.min_order(),
        required_order: required,
        pass: c.pass(),
    };
    write_json(&dir.join("convergence.json"), &summary)?;
    Ok(CommandReport::new(dir, &c))
}
