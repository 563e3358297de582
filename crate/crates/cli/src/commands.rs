//! The four subcommands as pure functions from a validated config to output
//! text, plus diagnostics for stderr.

use rfcw::closed_forms::{classical_rate, dichotomous_rate, uniform_g};
use rfcw::field_models::{f_n, sample_fields, FreeEnergy};
use rfcw::gibbs_exact::{ldp_convergence_report, LdpStudy};
use rfcw::numerics::{linspace, median};
use rfcw::output::{fmt_ext, fmt_f64};
use rfcw::phase_diagram::phase_scan;
use rfcw::rate_function::{g_value, RateFunction};
use rfcw::{Execution, ExtReal, FieldModel};

use crate::config::{ConfigError, FieldsConfig, PhaseScanConfig, RateCurveConfig, ScanFormat, VerifyConfig};

/// Output documents (one per case where a command has several) plus stderr
/// notes; `violation` marks a failed acceptance check.
#[derive(Debug, Default)]
pub struct Outcome {
    pub documents: Vec<String>,
    pub notes: Vec<String>,
    pub violation: bool,
}

pub const RATE_CURVE_HEADER: &str = "x,I,G,fstar";
pub const FIELDS_HEADER: &str = "model,n,seed,x,f_n,f_limit,abs_dev";

const CURVE_HALF_WIDTH: f64 = 1.05;

pub fn rate_curve(cfg: &RateCurveConfig) -> Result<Outcome, ConfigError> {
    let rf = RateFunction::new(cfg.model.clone(), cfg.beta)?;
    let xs = linspace(-CURVE_HALF_WIDTH, CURVE_HALF_WIDTH, cfg.points);
    let rows = Execution::Parallel
        .map(&xs, |&x| -> rfcw::Result<String> {
            let i = rf.rate(x)?;
            let fstar = rf.conjugate().conjugate(x)?;
            Ok(format!("{},{},{},{}", fmt_f64(x), fmt_ext(i), fmt_f64(rf.g(x)), fmt_ext(fstar)))
        })
        .into_iter()
        .collect::<rfcw::Result<Vec<_>>>()?;
    let mut doc = String::from(RATE_CURVE_HEADER);
    doc.push('\n');
    for row in rows {
        doc.push_str(&row);
        doc.push('\n');
    }
    let minimizers = rf.global_minimizers().iter().map(|m| format!("{m:.6}")).collect::<Vec<_>>().join(", ");
    Ok(Outcome { documents: vec![doc], notes: vec![format!("zeros of I at [{minimizers}]")], violation: false })
}

pub fn phase(cfg: &PhaseScanConfig) -> Result<Outcome, ConfigError> {
    let scan = phase_scan(
        cfg.family,
        (cfg.beta_range[0], cfg.beta_range[1]),
        (cfg.h_range[0], cfg.h_range[1]),
        (cfg.resolution[0], cfg.resolution[1]),
        Execution::Parallel,
    )?;
    let unclassified = scan.cells.iter().chain(&scan.critical_line).filter(|c| c.phase.is_none()).count();
    let mut notes =
        vec![format!("{} lattice cells, {} critical-line points", scan.cells.len(), scan.critical_line.len())];
    if unclassified > 0 {
        notes.push(format!("warning: {unclassified} cells unclassified"));
    }
    let doc = match cfg.format {
        ScanFormat::Csv => scan.to_csv(),
        ScanFormat::Json => scan.to_json() + "\n",
    };
    Ok(Outcome { documents: vec![doc], notes, violation: false })
}

struct OracleCheck {
    name: &'static str,
    tolerance: f64,
    worst: f64,
}

fn oracle_checks() -> rfcw::Result<Vec<OracleCheck>> {
    let xs = linspace(-0.99, 0.99, 41);
    let finite = |v: ExtReal| v.finite().unwrap_or(f64::INFINITY);
    let mut classical: f64 = 0.0;
    for (beta, h) in [(0.5, 0.0), (2.0, 0.0), (1.0, 0.2), (2.0, 1.0)] {
        let rf = RateFunction::new(FieldModel::constant(h)?, beta)?;
        for &x in &xs {
            classical = classical.max((finite(rf.rate(x)?) - finite(classical_rate(x, beta, h)?)).abs());
        }
    }
    let mut dichotomous: f64 = 0.0;
    for (beta, h) in [(0.6, 0.2), (1.5, 0.439), (3.0, 0.8)] {
        let rf = RateFunction::new(FieldModel::dichotomous(h, 0.5)?, beta)?;
        for &x in &xs {
            dichotomous = dichotomous.max((finite(rf.rate(x)?) - finite(dichotomous_rate(x, beta, h)?)).abs());
        }
    }
    let mut uniform: f64 = 0.0;
    for (beta, h) in [(0.5, 0.3), (2.5, 1.0)] {
        let fe = FreeEnergy::new(FieldModel::uniform(h)?, beta)?;
        for x in linspace(-2.0, 2.0, 81) {
            uniform = uniform.max((g_value(&fe, x) - uniform_g(x, beta, h)?).abs());
        }
    }
    Ok(vec![
        OracleCheck { name: "classical rate", tolerance: 1e-8, worst: classical },
        OracleCheck { name: "dichotomous rate", tolerance: 1e-6, worst: dichotomous },
        OracleCheck { name: "uniform G", tolerance: 1e-9, worst: uniform },
    ])
}

pub fn verify(cfg: &VerifyConfig) -> Result<Outcome, ConfigError> {
    let mut outcome = Outcome::default();
    for (i, case) in cfg.cases.iter().enumerate() {
        let study = LdpStudy {
            model: case.model.clone(),
            beta: case.beta,
            theory_beta: case.theory_beta,
            interval: (case.interval[0], case.interval[1]),
            n_list: case.n_list.clone(),
            seeds: case.seeds.clone(),
        };
        let report = ldp_convergence_report(&study, Execution::Parallel)?;
        outcome.documents.push(report.to_csv());
        for w in &report.warnings {
            outcome.notes.push(format!("case {i}: warning: {w}"));
        }
        let n_max = *case.n_list.last().expect("validated non-empty");
        let worst = report.rows.iter().filter(|r| r.n == n_max).map(|r| r.deviation).fold(0.0, f64::max);
        let within = worst <= case.budget;
        let monotone = report.monotone_tail != Some(false);
        let medians = report.median_deviation.iter().map(|(n, d)| format!("{n}:{d:.3e}")).collect::<Vec<_>>();
        outcome.notes.push(format!(
            "case {i}: median deviation [{}]; max deviation at n={n_max} {worst:.3e} (budget {}){}{}",
            medians.join(", "),
            case.budget,
            if within { "" } else { " VIOLATION" },
            if monotone { "" } else { "; medians not monotone VIOLATION" },
        ));
        outcome.violation |= !(within && monotone);
    }
    if cfg.oracles {
        for check in oracle_checks()? {
            let ok = check.worst <= check.tolerance;
            outcome.notes.push(format!(
                "oracle {}: max error {:.3e} (tolerance {:e}) {}",
                check.name,
                check.worst,
                check.tolerance,
                if ok { "ok" } else { "VIOLATION" }
            ));
            outcome.violation |= !ok;
        }
    }
    Ok(outcome)
}

fn model_label(index: usize, model: &FieldModel) -> String {
    let value = serde_json::to_value(model).expect("field model serializes");
    let variant = value.get("variant").and_then(|v| v.as_str()).unwrap_or("model");
    format!("{index}_{variant}")
}

pub fn fields(cfg: &FieldsConfig) -> Result<Outcome, ConfigError> {
    let xs = linspace(cfg.x_range[0], cfg.x_range[1], cfg.x_points);
    let limits = cfg
        .models
        .iter()
        .map(|m| FreeEnergy::new(m.clone(), cfg.beta).map(|fe| xs.iter().map(|&x| fe.value(x)).collect::<Vec<_>>()))
        .collect::<rfcw::Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize, u64)> = (0..cfg.models.len())
        .flat_map(|m| cfg.n_list.iter().flat_map(move |&n| cfg.seeds.iter().map(move |&s| (m, n, s))))
        .collect();
    let blocks = Execution::Parallel
        .map(&jobs, |&(m, n, seed)| -> rfcw::Result<(String, f64)> {
            let realization = sample_fields(&cfg.models[m], n, seed)?;
            let label = model_label(m, &cfg.models[m]);
            let mut text = String::new();
            let mut worst: f64 = 0.0;
            for (&x, &limit) in xs.iter().zip(&limits[m]) {
                let value = f_n(&realization, x, cfg.beta);
                let dev = (value - limit).abs();
                worst = worst.max(dev);
                text.push_str(&format!(
                    "{label},{n},{seed},{},{},{},{}\n",
                    fmt_f64(x),
                    fmt_f64(value),
                    fmt_f64(limit),
                    fmt_f64(dev)
                ));
            }
            Ok((text, worst))
        })
        .into_iter()
        .collect::<rfcw::Result<Vec<_>>>()?;

    let mut doc = String::from(FIELDS_HEADER);
    doc.push('\n');
    for (text, _) in &blocks {
        doc.push_str(text);
    }
    let mut notes = Vec::new();
    for (m, model) in cfg.models.iter().enumerate() {
        let medians: Vec<f64> = cfg
            .n_list
            .iter()
            .map(|&n| {
                let devs: Vec<f64> = jobs
                    .iter()
                    .zip(&blocks)
                    .filter(|((jm, jn, _), _)| *jm == m && *jn == n)
                    .map(|(_, b)| b.1)
                    .collect();
                median(&devs)
            })
            .collect();
        let monotone = medians.windows(2).all(|w| w[1] <= w[0]);
        let shown = cfg.n_list.iter().zip(&medians).map(|(n, d)| format!("{n}:{d:.3e}")).collect::<Vec<_>>();
        notes.push(format!(
            "{}: median max-deviation [{}]{}",
            model_label(m, model),
            shown.join(", "),
            if monotone { "" } else { " (not monotone)" }
        ));
    }
    Ok(Outcome { documents: vec![doc], notes, violation: false })
}
