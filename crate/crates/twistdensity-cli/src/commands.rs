//! The density, predict, compare and zeros runs.

use crate::config::RunConfig;
use crate::emit::{json_string, Table};
use crate::error::CliError;
use serde::Serialize;
use std::sync::OnceLock;
use twistdensity::cache;
use twistdensity::curve::ApTable;
use twistdensity::density::{family_density_with, s_odd_empirical, DensityReport, FamilyParams};
use twistdensity::family::{FamilyWeights, Weighting};
use twistdensity::predict::{self, exponent_rows, katz_sarnak_target, ExponentKind, SymSquare};
use twistdensity::testfn::{build_testfn, build_weight, TestFnKind, TestFunction, WeightFunction, WeightKind};
use twistdensity::zeros::{explicit_formula_check, find_zeros};

/// One output file pair: `<stem>.csv` and/or `<stem>.json`.
pub struct Artifact {
    pub stem: &'static str,
    pub csv: Option<Table>,
    pub json: Option<String>,
}

pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: Vec<String>,
}

pub struct Context {
    pub cfg: RunConfig,
    pub tf: TestFunction,
    pub wf: WeightFunction,
    /// a_p up to the largest cutoff any X or P needs.
    ap: OnceLock<ApTable>,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        let tf = build_testfn(cfg.testfn, cfg.sigma)?;
        let wf = build_weight(cfg.weight.clone(), cfg.curve.conductor())?;
        Ok(Self { cfg, tf, wf, ap: OnceLock::new() })
    }

    fn weighting(&self) -> Weighting {
        if self.cfg.squarefree_only {
            Weighting::Squarefree
        } else {
            Weighting::Repetitions
        }
    }

    fn family(&self, x: f64) -> Result<FamilyWeights, CliError> {
        Ok(FamilyWeights::build(&self.wf, x, self.weighting())?)
    }

    fn table(&self) -> Result<&ApTable, CliError> {
        if let Some(t) = self.ap.get() {
            return Ok(t);
        }
        let mut cutoff = self.cfg.prime_cutoff;
        for &x in &self.cfg.xs {
            cutoff = cutoff.max(FamilyParams::new(&self.cfg.curve, &self.tf, x, self.cfg.squarefree_only)?.prime_cutoff);
        }
        let table = cache::load_or_compute(&self.cfg.curve, cutoff)?;
        Ok(self.ap.get_or_init(|| table))
    }

    fn sym_square(&self) -> Result<SymSquare, CliError> {
        let (primes, a_p) = self.table()?.truncated(self.cfg.prime_cutoff).unzip();
        Ok(SymSquare::new(&self.cfg.curve, &ApTable::from_parts(primes, a_p)))
    }

    /// Error exponent the density bounds attach to this family at σ.
    fn exponent_target(&self) -> Option<f64> {
        let sigma = self.cfg.sigma;
        let kind = match (self.cfg.squarefree_only, sigma < 0.5) {
            (true, _) => ExponentKind::Star,
            (false, true) => ExponentKind::Eta,
            (false, false) => ExponentKind::Theta,
        };
        predict::exponent(kind, sigma).ok()
    }
}

#[derive(Serialize)]
struct Meta {
    version: &'static str,
    curve: String,
    a: i64,
    b: i64,
    conductor: u64,
    root_number: i8,
    sigma: f64,
    testfn: String,
    weight: &'static str,
    squarefree_only: bool,
    sym2_prime_cutoff: u64,
    ratios_regularization: &'static str,
}

fn meta(ctx: &Context) -> Meta {
    let c = &ctx.cfg.curve;
    Meta {
        version: env!("CARGO_PKG_VERSION"),
        curve: c.label(),
        a: c.a(),
        b: c.b(),
        conductor: c.conductor(),
        root_number: c.root_number().sign(),
        sigma: ctx.cfg.sigma,
        testfn: ctx.tf.kind().to_string(),
        weight: match ctx.wf.kind() {
            WeightKind::Gaussian => "gaussian",
            WeightKind::Samples { .. } => "samples",
        },
        squarefree_only: ctx.cfg.squarefree_only,
        sym2_prime_cutoff: ctx.cfg.prime_cutoff,
        ratios_regularization: predict::REGULARIZATION,
    }
}

#[derive(Serialize)]
struct DensityRow {
    x: f64,
    sigma: f64,
    kind: String,
    squarefree_only: bool,
    l: f64,
    prime_cutoff: u64,
    term_log: f64,
    term_integral: f64,
    s_even: f64,
    s_odd: f64,
    s_odd_leading: f64,
    total: f64,
    w_value: f64,
    family_size: usize,
}

impl From<&DensityReport> for DensityRow {
    fn from(r: &DensityReport) -> Self {
        Self {
            x: r.x,
            sigma: r.sigma,
            kind: r.kind.to_string(),
            squarefree_only: r.squarefree_only,
            l: r.l,
            prime_cutoff: r.prime_cutoff,
            term_log: r.term_log,
            term_integral: r.term_integral,
            s_even: r.s_even,
            s_odd: r.s_odd,
            s_odd_leading: r.s_odd_leading,
            total: r.total,
            w_value: r.w_value,
            family_size: r.family_size,
        }
    }
}

fn densities(ctx: &Context) -> Result<Vec<DensityReport>, CliError> {
    ctx.cfg
        .xs
        .iter()
        .map(|&x| Ok(family_density_with(&ctx.cfg.curve, &ctx.tf, &ctx.family(x)?, ctx.table()?)?))
        .collect()
}

pub fn density(ctx: &Context) -> Result<Outcome, CliError> {
    let reports = densities(ctx)?;
    let mut table = Table::new(&[
        "X", "sigma", "kind", "squarefree_only", "L", "prime_cutoff", "term_log", "term_integral", "s_even", "s_odd",
        "s_odd_leading", "total", "W", "family_size",
    ]);
    for r in &reports {
        table.push(vec![
            r.x.into(),
            r.sigma.into(),
            r.kind.to_string().into(),
            r.squarefree_only.to_string().into(),
            r.l.into(),
            (r.prime_cutoff as i64).into(),
            r.term_log.into(),
            r.term_integral.into(),
            r.s_even.into(),
            r.s_odd.into(),
            r.s_odd_leading.into(),
            r.total.into(),
            r.w_value.into(),
            (r.family_size as i64).into(),
        ]);
    }
    let rows: Vec<DensityRow> = reports.iter().map(DensityRow::from).collect();
    let json = json_string(&serde_json::json!({ "meta": meta(ctx), "rows": rows }))?;
    let summary = reports.iter().map(|r| format!("X = {}: D = {:.10}", r.x, r.total)).collect();
    Ok(Outcome { artifacts: vec![Artifact { stem: "density", csv: Some(table), json: Some(json) }], summary })
}

#[derive(Serialize)]
struct PredictRow {
    x: f64,
    log_term: f64,
    integral: f64,
    s_even: f64,
    main_total: f64,
    ratios_integral: f64,
    ratios_phi0_half: f64,
    ratios_total: f64,
    ratios_uncertainty: f64,
    ratios_t_max: f64,
    katz_sarnak: f64,
    eta: Option<f64>,
    theta: Option<f64>,
    star: Option<f64>,
}

fn predictions(ctx: &Context) -> Result<Vec<PredictRow>, CliError> {
    if ctx.cfg.xs.is_empty() {
        return Ok(Vec::new());
    }
    let sym = ctx.sym_square()?;
    let sigma = ctx.cfg.sigma;
    ctx.cfg
        .xs
        .iter()
        .map(|&x| {
            let fam = ctx.family(x)?;
            let main = predict::main_terms(&ctx.cfg.curve, &ctx.tf, &fam, &ctx.wf, ctx.table()?)?;
            let ratios = predict::ratios_density(&ctx.cfg.curve, &ctx.tf, &fam, &ctx.wf, &sym)?;
            Ok(PredictRow {
                x,
                log_term: main.log_term,
                integral: main.integral,
                s_even: main.s_even,
                main_total: main.total,
                ratios_integral: ratios.integral,
                ratios_phi0_half: ratios.phi0_half,
                ratios_total: ratios.total,
                ratios_uncertainty: ratios.uncertainty,
                ratios_t_max: ratios.t_max,
                katz_sarnak: katz_sarnak_target(&ctx.tf),
                eta: predict::eta(sigma).ok(),
                theta: predict::theta(sigma).ok(),
                star: predict::star_exponent(sigma).ok(),
            })
        })
        .collect()
}

pub fn predict(ctx: &Context) -> Result<Outcome, CliError> {
    let rows = predictions(ctx)?;
    let mut table = Table::new(&[
        "X", "sigma", "kind", "log_term", "integral", "s_even", "main_total", "ratios_integral", "ratios_phi0_half",
        "ratios_total", "ratios_uncertainty", "katz_sarnak", "eta", "theta", "star",
    ]);
    for r in &rows {
        table.push(vec![
            r.x.into(),
            ctx.cfg.sigma.into(),
            ctx.tf.kind().to_string().into(),
            r.log_term.into(),
            r.integral.into(),
            r.s_even.into(),
            r.main_total.into(),
            r.ratios_integral.into(),
            r.ratios_phi0_half.into(),
            r.ratios_total.into(),
            r.ratios_uncertainty.into(),
            r.katz_sarnak.into(),
            r.eta.into(),
            r.theta.into(),
            r.star.into(),
        ]);
    }
    let json = json_string(&serde_json::json!({ "meta": meta(ctx), "rows": rows }))?;
    let summary = rows
        .iter()
        .map(|r| format!("X = {}: main terms {:.10}, ratios {:.10} ± {:.2e}", r.x, r.main_total, r.ratios_total, r.ratios_uncertainty))
        .collect();
    Ok(Outcome { artifacts: vec![Artifact { stem: "predict", csv: Some(table), json: Some(json) }], summary })
}

/// σ grid for the exponent curves: a regular grid plus every breakpoint.
pub fn exponent_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (1..200).map(|k| k as f64 / 200.0).collect();
    for m in 1..=10u32 {
        grid.extend([1.0 / (4 * m + 2) as f64, 1.0 / (4 * m + 1) as f64, 1.0 / (4 * m) as f64]);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

pub fn exponent_table() -> Table {
    let mut table = Table::new(&["sigma", "eta", "theta", "star", "ratios"]);
    for r in exponent_rows(&exponent_grid()) {
        table.push(vec![r.sigma.into(), r.eta.into(), r.theta.into(), r.star.into(), r.ratios.into()]);
    }
    table
}

#[derive(Serialize)]
struct CompareRow {
    x: f64,
    total: f64,
    main_total: f64,
    ratios_total: f64,
    predict_uncertainty: f64,
    residual: f64,
    katz_sarnak_residual: f64,
}

pub fn compare(ctx: &Context) -> Result<Outcome, CliError> {
    let reports = densities(ctx)?;
    let preds = predictions(ctx)?;
    let target = ctx.exponent_target();
    let mut table = Table::new(&[
        "X", "sigma", "kind", "term_log", "term_integral", "s_even", "s_odd", "total", "predict_total",
        "predict_uncertainty", "residual", "eta_or_theta_target",
    ]);
    let mut rows = Vec::new();
    for (r, p) in reports.iter().zip(&preds) {
        let residual = r.total - p.main_total;
        table.push(vec![
            r.x.into(),
            r.sigma.into(),
            r.kind.to_string().into(),
            r.term_log.into(),
            r.term_integral.into(),
            r.s_even.into(),
            r.s_odd.into(),
            r.total.into(),
            p.main_total.into(),
            p.ratios_uncertainty.into(),
            residual.into(),
            target.into(),
        ]);
        rows.push(CompareRow {
            x: r.x,
            total: r.total,
            main_total: p.main_total,
            ratios_total: p.ratios_total,
            predict_uncertainty: p.ratios_uncertainty,
            residual,
            katz_sarnak_residual: r.total - p.katz_sarnak,
        });
    }
    let fit = (reports.len() >= 2).then(|| s_odd_empirical(&reports)).transpose()?;
    let exponents = exponent_rows(&exponent_grid());
    let series: Vec<_> = exponents.iter().map(|e| serde_json::json!({ "sigma": e.sigma, "eta": e.eta, "theta": e.theta, "star": e.star, "ratios": e.ratios })).collect();
    let json = json_string(&serde_json::json!({
        "meta": meta(ctx),
        "rows": rows,
        "odd_fit": fit.as_ref().map(|f| serde_json::json!({ "points": f.points, "slope": f.slope })),
        "exponent_target": target,
        "exponents": series,
    }))?;
    let mut summary: Vec<String> = rows.iter().map(|r| format!("X = {}: residual {:.3e}", r.x, r.residual)).collect();
    if let Some(f) = &fit {
        summary.push(match f.slope {
            Some(s) => format!("s_odd decay exponent {s:.4} (target exponent {})", target.map_or("n/a".into(), |t| format!("{t:.4}"))),
            None => "s_odd below the noise floor; no exponent fit".into(),
        });
    }
    Ok(Outcome {
        artifacts: vec![
            Artifact { stem: "compare", csv: Some(table), json: Some(json) },
            Artifact { stem: "exponents", csv: Some(exponent_table()), json: None },
        ],
        summary,
    })
}

#[derive(Serialize)]
struct ZeroReport {
    d: i64,
    conductor: f64,
    gammas: Vec<f64>,
    height: f64,
    count_estimate: f64,
    count_found: usize,
    central_zero: bool,
    refinement_error: f64,
    fe_residual: f64,
    symmetric: bool,
    complete: bool,
    explicit_formula: Vec<serde_json::Value>,
}

pub fn zeros(ctx: &Context) -> Result<Outcome, CliError> {
    let mut table = Table::new(&["d", "gamma", "refinement_error"]);
    let mut reports = Vec::new();
    let mut summary = Vec::new();
    for &d in &ctx.cfg.twists {
        let z = find_zeros(&ctx.cfg.curve, d, ctx.cfg.zeros_height)?;
        for &g in &z.gammas {
            let err = if g == 0.0 && z.central_zero { 0.0 } else { z.refinement_error };
            table.push(vec![d.into(), g.into(), err.into()]);
        }
        let mut checks = Vec::new();
        if z.complete && ctx.tf.kind() == TestFnKind::Fejer {
            for &x in &ctx.cfg.xs {
                let c = explicit_formula_check(&ctx.cfg.curve, &z, &ctx.tf, x)?;
                checks.push(serde_json::json!({ "x": x, "lhs": c.lhs, "rhs": c.rhs, "tail_bound": c.tail_bound, "gap": c.gap }));
            }
        }
        summary.push(format!(
            "d = {d}: {} zeros in (0, {}], estimate {:.2}, {}",
            z.count_found,
            z.height,
            z.count_estimate,
            if z.complete { "complete" } else { "INCOMPLETE" }
        ));
        reports.push(ZeroReport {
            d,
            conductor: z.conductor,
            gammas: z.gammas,
            height: z.height,
            count_estimate: z.count_estimate,
            count_found: z.count_found,
            central_zero: z.central_zero,
            refinement_error: z.refinement_error,
            fe_residual: z.fe_residual,
            symmetric: z.symmetric,
            complete: z.complete,
            explicit_formula: checks,
        });
    }
    let json = json_string(&serde_json::json!({ "meta": meta(ctx), "twists": reports }))?;
    Ok(Outcome { artifacts: vec![Artifact { stem: "zeros", csv: Some(table), json: Some(json) }], summary })
}
