use std::path::{Path, PathBuf};

use arraydesign::optimizer::TIE_BREAK_RULE;
use arraydesign::{
    certify, exhaustive_matroid_opt, exhaustive_opt, greedy, lazy_greedy, matroid_greedy, mc_mse, BoundOutcome,
    BoundsReport, Constraint, Design, EpsilonSource, SensingModel,
};

use crate::config::{RunConfig, SolverChoice};
use crate::error::{CliError, CliResult};
use crate::output::{model_meta, num, provenance_meta, write_atomic, CsvDoc, DesignFile, DESIGN_HEADER};

pub const BOUNDS_HEADER: [&str; 7] = ["name", "value_nats", "hypothesis_ok", "epsilon", "delta", "N", "noise_var"];

pub const MSE_HEADER: [&str; 7] = [
    "design_label",
    "design_target_snr_db",
    "eval_snr_db",
    "trials",
    "mean_mse",
    "stderr_mse",
    "trace_posterior_cov",
];

pub fn design_file_name(snr_db: f64) -> String {
    format!("design_snr_{}.csv", num(snr_db))
}

/// Runs the configured solver and attaches its certificate.
pub fn solve(cfg: &RunConfig, model: &SensingModel) -> CliResult<Design> {
    let mut design = match (cfg.constraint(model)?, cfg.solver) {
        (Constraint::Cardinality { budget }, SolverChoice::Greedy) => greedy(model, budget)?,
        (Constraint::Cardinality { budget }, SolverChoice::Lazy) => lazy_greedy(model, budget)?,
        (Constraint::Cardinality { budget }, SolverChoice::Exhaustive) => exhaustive_opt(model, budget)?,
        (Constraint::Matroid(m), SolverChoice::Exhaustive) => exhaustive_matroid_opt(model, &m)?,
        (Constraint::Matroid(m), _) => matroid_greedy(model, &m)?,
    };
    design.certificate = Some(certify(model, &design, cfg.inject_epsilon)?);
    Ok(design)
}

fn outcome<T>(o: &BoundOutcome<T>, f: impl Fn(&T) -> f64) -> String {
    match o {
        BoundOutcome::Value(v) => num(f(v)),
        BoundOutcome::Inapplicable => "inapplicable".into(),
    }
}

fn epsilon_source(r: &BoundsReport) -> &'static str {
    match r.epsilon_source {
        EpsilonSource::Model => "model",
        EpsilonSource::Injected => "injected",
    }
}

pub fn render_design(cfg: &RunConfig, model: &SensingModel, snr_db: f64, design: &Design) -> Vec<u8> {
    let mut doc = CsvDoc::new(&DESIGN_HEADER);
    let mut cumulative = 0.0;
    for (step, ((&i, &p), &g)) in design.indices.iter().zip(&design.positions).zip(&design.gains).enumerate() {
        cumulative += g;
        doc.row([(step + 1).to_string(), i.to_string(), num(p), num(g), num(cumulative)]);
    }
    let cert = design.certificate.as_ref().expect("solve attaches a certificate");
    doc.meta("total_mi_nats", num(design.mi_nats));
    doc.meta("nemhauser_bound_nats", cert.nemhauser_hi().map_or("inapplicable".into(), num));
    doc.meta("approx_factor", num(cert.approx_factor));
    doc.meta("approx_bound_nats", num(cert.approx_hi));
    doc.meta("online_bound_nats", num(cert.online_hi));
    doc.meta("epsilon", num(cert.epsilon));
    doc.meta("epsilon_bracket_lo", num(cert.epsilon - cert.epsilon_half_width));
    doc.meta("epsilon_bracket_hi", num(cert.epsilon + cert.epsilon_half_width));
    doc.meta("epsilon_source", epsilon_source(cert));
    doc.meta("truncation_lo", outcome(&cert.truncation, |v| v.0));
    doc.meta("truncation_hi", outcome(&cert.truncation, |v| v.1));
    doc.meta("discretization_hi", num(cert.discretization_hi));
    doc.meta("combined_penalty", outcome(&cert.combined, |c| c.penalty));
    doc.meta("combined_opt_upper", outcome(&cert.combined, |c| c.opt_upper));
    doc.meta("solver", design.solver.name());
    doc.meta("tie_break", TIE_BREAK_RULE);
    doc.meta("evaluations", design.evaluations.to_string());
    doc.meta("snr_db", num(snr_db));
    doc.meta("budget", cfg.budget.to_string());
    model_meta(&mut doc, cfg, model);
    provenance_meta(&mut doc, cfg);
    doc.into_bytes()
}

/// One design per configured SNR, written as `design_snr_<snr>.csv`.
pub fn cmd_design(cfg: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let snrs = cfg.snrs();
    let mut names: Vec<String> = snrs.iter().map(|&s| design_file_name(s)).collect();
    names.sort();
    names.dedup();
    if names.len() != snrs.len() {
        return Err(CliError::Config("snr_db lists the same SNR twice".into()));
    }
    let base = cfg.model(snrs[0])?;
    let mut rendered = Vec::with_capacity(snrs.len());
    for &snr in &snrs {
        let model = base.at_snr(snr, cfg.budget)?;
        let design = solve(cfg, &model)?;
        println!(
            "snr_db={} solver={} sensors={} mi_nats={} online_bound_nats={}",
            num(snr),
            design.solver.name(),
            design.len(),
            num(design.mi_nats),
            num(design.certificate.as_ref().map_or(f64::NAN, |c| c.online_hi)),
        );
        rendered.push((out.join(design_file_name(snr)), render_design(cfg, &model, snr, &design)));
    }
    for (path, bytes) in &rendered {
        write_atomic(path, bytes)?;
    }
    Ok(rendered.into_iter().map(|(p, _)| p).collect())
}

pub fn render_bounds(cfg: &RunConfig, file: &DesignFile) -> CliResult<Vec<u8>> {
    let snr = file.target_snr()?;
    let model = cfg.model(snr)?;
    let design = file.to_design(cfg, &model)?;
    let r = certify(&model, &design, cfg.inject_epsilon)?;
    let mut doc = CsvDoc::new(&BOUNDS_HEADER);
    let inputs = [num(r.epsilon), num(r.delta), r.n.to_string(), num(r.noise_var)];
    let mut row = |name: &str, value: String, ok: bool| {
        let mut fields = vec![name.to_string(), value, ok.to_string()];
        fields.extend(inputs.iter().cloned());
        doc.row(fields);
    };
    let cardinality = matches!(design.constraint, Constraint::Cardinality { .. });
    let na = || "inapplicable".to_string();
    row("achieved_mi", num(r.achieved_mi), true);
    row("nemhauser_hi", r.nemhauser_hi().map_or_else(na, num), cardinality);
    row("matroid_half_hi", if cardinality { na() } else { num(r.approx_hi) }, !cardinality);
    row("online_hi", num(r.online_hi), true);
    row("truncation_lo", outcome(&r.truncation, |v| v.0), r.truncation.is_applicable());
    row("truncation_hi", outcome(&r.truncation, |v| v.1), r.truncation.is_applicable());
    row("discretization_hi", num(r.discretization_hi), true);
    row("combined_penalty", outcome(&r.combined, |c| c.penalty), r.combined.is_applicable());
    row("combined_opt_upper", outcome(&r.combined, |c| c.opt_upper), r.combined.is_applicable());
    doc.meta("epsilon_source", epsilon_source(&r));
    doc.meta("epsilon_bracket_lo", num(r.epsilon - r.epsilon_half_width));
    doc.meta("epsilon_bracket_hi", num(r.epsilon + r.epsilon_half_width));
    doc.meta("design_label", &file.label);
    doc.meta("snr_db", num(snr));
    provenance_meta(&mut doc, cfg);
    Ok(doc.into_bytes())
}

pub fn cmd_bounds(cfg: &RunConfig, design_file: &Path, out: &Path) -> CliResult<PathBuf> {
    let file = DesignFile::read(design_file)?;
    let bytes = render_bounds(cfg, &file)?;
    let path = out.join("bounds.csv");
    write_atomic(&path, &bytes)?;
    Ok(path)
}

pub fn render_mse(cfg: &RunConfig, files: &[DesignFile]) -> CliResult<Vec<u8>> {
    if files.is_empty() {
        return Err(CliError::Config("mc needs at least one design file".into()));
    }
    let eval = cfg.eval_snrs();
    if eval.is_empty() {
        return Err(CliError::Config("eval_snrs_db must name at least one SNR".into()));
    }
    let model = cfg.model(files[0].target_snr()?)?;
    let designs = files.iter().map(|f| f.to_design(cfg, &model)).collect::<CliResult<Vec<_>>>()?;
    let targets = files.iter().map(DesignFile::target_snr).collect::<CliResult<Vec<_>>>()?;
    let table = mc_mse(&model, &designs, &eval, cfg.trials, cfg.seed)?;
    let mut doc = CsvDoc::new(&MSE_HEADER);
    for row in &table.rows {
        doc.row([
            files[row.design].label.clone(),
            num(targets[row.design]),
            num(row.eval_snr_db),
            row.trials.to_string(),
            num(row.mean_mse),
            num(row.stderr_mse),
            num(row.trace_posterior_cov),
        ]);
    }
    doc.meta("seed", cfg.seed.to_string());
    doc.meta("estimator", "posterior_mean");
    provenance_meta(&mut doc, cfg);
    Ok(doc.into_bytes())
}

pub fn cmd_mc(cfg: &RunConfig, design_files: &[PathBuf], out: &Path) -> CliResult<PathBuf> {
    let files = design_files.iter().map(|p| DesignFile::read(p)).collect::<CliResult<Vec<_>>>()?;
    let bytes = render_mse(cfg, &files)?;
    let path = out.join("mse.csv");
    write_atomic(&path, &bytes)?;
    Ok(path)
}
