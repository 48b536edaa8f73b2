use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::PathBuf;

use fdl_core::engine::{admissible_words, resistance_check};
use fdl_core::measure::{chaos_game, dq_estimate, mesh_moments, AffineIfs, SampleSet};
use fdl_core::pressure::{
    affinity_dimension_with, default_families, discontinuity_scan, perturbed_pair, q_dimension_with, r_bracket, r_n,
    s_bracket, s_n, theorem1_pair, DimensionBracket, PressureBracket, ProbabilityVector, SolverOptions, DEFAULT_TOL,
};
use fdl_core::spectral::{growth_witness, lsr_bracket_with, LsrOptions};
use fdl_core::{Error, ExecConfig, Matrix, MatrixSystem};
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::*;
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// The requested accuracy was not certified.
    Unresolved,
    /// The run was shortened to fit the word budget.
    BudgetExceeded,
}

pub struct Outcome {
    pub status: Status,
    pub result: Value,
    pub text: String,
    /// CSV body and where to write it (stdout when `None` and no --json).
    pub csv: Option<(String, Option<PathBuf>)>,
}

impl Outcome {
    fn new(result: impl Serialize, text: String) -> Result<Outcome, CliError> {
        Ok(Outcome {
            status: Status::Ok,
            result: serde_json::to_value(result).map_err(|e| CliError::Config(e.to_string()))?,
            text,
            csv: None,
        })
    }

    fn with_status(mut self, status: Status) -> Self {
        self.status = status;
        self
    }

    fn with_csv(mut self, csv: String, out: Option<PathBuf>) -> Self {
        self.csv = Some((csv, out));
        self
    }
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing --{flag}")))
}

fn build_system(args: &SystemArgs) -> Result<MatrixSystem, CliError> {
    match args.pair {
        Some(name) => {
            if !args.matrix.is_empty() {
                return Err(CliError::Config("give either --pair or --matrix, not both".into()));
            }
            let lam = need(args.lambda, "lambda")?;
            let delta = need(args.delta, "delta")?;
            Ok(match name {
                PairName::Theorem1 => theorem1_pair(lam, delta)?,
                PairName::Perturbed => perturbed_pair(lam, delta, need(args.k, "k")?)?,
            })
        }
        None if args.matrix.is_empty() => Err(CliError::Config("missing --matrix or --pair".into())),
        None => {
            let maps = args.matrix.iter().map(|r| Matrix::from_rows(&r.0)).collect::<Result<Vec<_>, _>>()?;
            Ok(MatrixSystem::new(maps)?)
        }
    }
}

fn probabilities(p: &[f64], n: usize) -> Result<ProbabilityVector, CliError> {
    Ok(match p {
        [] => ProbabilityVector::uniform(n)?,
        [x] if n == 2 => ProbabilityVector::pair(*x)?,
        _ => ProbabilityVector::new(p.to_vec())?,
    })
}

fn exec(args: &ExecArgs) -> ExecConfig {
    let mut cfg = ExecConfig::default();
    if let Some(t) = args.threads {
        cfg = cfg.with_threads(t);
    }
    if let Some(b) = args.budget {
        cfg = cfg.with_budget(b);
    }
    cfg
}

/// The largest depth `≤ want` the budget allows, and whether it had to shrink.
fn fit_depth(cfg: &ExecConfig, letters: usize, want: usize) -> Result<(usize, Status), CliError> {
    let mut depth = want;
    while depth > 0 {
        match cfg.check(letters, depth) {
            Ok(_) => {
                let status = if depth == want { Status::Ok } else { Status::BudgetExceeded };
                return Ok((depth, status));
            }
            Err(Error::BudgetExceeded { .. }) => depth -= 1,
            Err(e) => return Err(e.into()),
        }
    }
    Err(Error::BudgetExceeded { required: letters as u128, budget: cfg.budget }.into())
}

fn solver(exec: &ExecArgs, tol: Option<f64>, max_depth: Option<usize>) -> SolverOptions {
    SolverOptions { tol: tol.unwrap_or(DEFAULT_TOL), exec: self::exec(exec), max_depth, ..SolverOptions::default() }
}

fn bracket_text(name: &str, b: &DimensionBracket) -> String {
    let mut t = format!(
        "{name} in [{}, {}]\nwidth {} (tol {}, grid step {})\n",
        b.lower,
        b.upper,
        b.width(),
        b.tol,
        b.grid_step
    );
    let _ = writeln!(t, "resolved {}", b.resolved);
    if !b.undetermined.is_empty() {
        let _ = writeln!(t, "undetermined at s = {:?}", b.undetermined);
    }
    let _ = writeln!(t, "{:>12}  {:>12}  {:>5}  {:>14}  {:>14}", "s", "sign", "depth", "lower", "upper");
    for p in &b.trace {
        let _ = writeln!(
            t,
            "{:>12.8}  {:>12}  {:>5}  {:>14.6e}  {:>14.6e}",
            p.s,
            format!("{:?}", p.sign).to_lowercase(),
            p.depth,
            p.pressure_lower,
            p.pressure_upper
        );
    }
    t
}

fn bracket_status(b: &DimensionBracket) -> Status {
    if b.resolved {
        Status::Ok
    } else {
        Status::Unresolved
    }
}

pub fn phi(a: PhiArgs) -> Result<Outcome, CliError> {
    let m = Matrix::from_rows(&need(a.matrix, "matrix")?.0)?;
    let s = need(a.s, "s")?;
    let log_phi = m.log_phi(s)?;
    let phi = log_phi.exp();
    Outcome::new(json!({ "s": s, "phi": phi, "log_phi": log_phi }), format!("phi^{s} = {phi}\nlog phi = {log_phi}\n"))
}

pub fn pressure(a: PressureArgs) -> Result<Outcome, CliError> {
    let sys = build_system(&a.system)?;
    let cfg = exec(&a.exec);
    let s = need(a.s, "s")?;
    let (depth, status) = fit_depth(&cfg, sys.len(), a.depth.unwrap_or(8))?;
    let planar = sys.dim() == 2;
    let b: PressureBracket = match a.q {
        Some(q) => {
            let p = probabilities(&a.p, sys.len())?;
            if planar {
                r_bracket(&sys, &p, q, s, depth, &cfg)?
            } else {
                let lower = r_n(&sys, &p, q, s, depth, &cfg)?;
                PressureBracket {
                    depth,
                    lower,
                    upper: f64::INFINITY,
                    lower_certified: true,
                    upper_certified: false,
                    minorant: None,
                }
            }
        }
        None if planar => s_bracket(&sys, s, depth, &cfg)?,
        None => {
            let upper = s_n(&sys, s, depth, &cfg)?;
            PressureBracket {
                depth,
                lower: f64::NEG_INFINITY,
                upper,
                lower_certified: false,
                upper_certified: true,
                minorant: None,
            }
        }
    };
    let which = if a.q.is_some() { "q-pressure" } else { "singular-value pressure" };
    let mut text = format!("{which} at s = {s}, depth {}\n[{}, {}]\n", b.depth, b.lower, b.upper);
    if let Some(m) = b.minorant {
        let _ = writeln!(text, "surrogate {}", serde_json::to_string(&m).unwrap_or_default().trim_matches('"'));
    }
    Ok(Outcome::new(b, text)?.with_status(status))
}

pub fn qdim(a: QdimArgs) -> Result<Outcome, CliError> {
    let sys = build_system(&a.system)?;
    let p = probabilities(&a.p, sys.len())?;
    let q = need(a.q, "q")?;
    let b = q_dimension_with(&sys, &p, q, &solver(&a.exec, a.tol, a.max_depth))?;
    let status = bracket_status(&b);
    let text = bracket_text("q-dimension", &b);
    Ok(Outcome::new(b, text)?.with_status(status))
}

pub fn sdim(a: SdimArgs) -> Result<Outcome, CliError> {
    let sys = build_system(&a.system)?;
    let b = affinity_dimension_with(&sys, &solver(&a.exec, a.tol, a.max_depth))?;
    let status = bracket_status(&b);
    let text = bracket_text("affinity dimension", &b);
    Ok(Outcome::new(b, text)?.with_status(status))
}

pub fn lsr(a: LsrArgs) -> Result<Outcome, CliError> {
    let sys = build_system(&a.system)?;
    let cfg = exec(&a.exec);
    let (n_max, status) = fit_depth(&cfg, sys.len(), a.nmax.unwrap_or(16))?;
    let opts = LsrOptions { witnesses: default_families(sys.len(), 8), witness_max_exp: 30 };
    let b = lsr_bracket_with(&sys, n_max, &opts, &cfg)?;
    let mut text = format!(
        "lower spectral radius in [{}, {}]\nwidth {}\nbest word {} (length {})\n",
        b.lower,
        b.upper,
        b.width(),
        b.witness,
        b.depth
    );
    let _ = writeln!(text, "{:>4}  {:>14}  {:>12}", "n", "min norm", "rate");
    for r in &b.rates {
        let _ = writeln!(text, "{:>4}  {:>14.6e}  {:>12.8}", r.n, r.min_norm, r.rate);
    }
    Ok(Outcome::new(b, text)?.with_status(status))
}

pub fn resist(a: ResistArgs) -> Result<Outcome, CliError> {
    let sys = build_system(&a.system)?;
    let cfg = exec(&a.exec);
    let c = need(a.c, "c")?;
    let eps = need(a.eps, "eps")?;
    let rate = need(a.rate, "rate")?;
    let want = a.nmax.unwrap_or(12);
    let mut n_max = want;
    if eps > 0.0 && eps < 1.0 {
        while n_max > 0 && admissible_words(n_max, (eps * n_max as f64).floor() as usize) > cfg.budget as u128 {
            n_max -= 1;
        }
    }
    if n_max == 0 {
        return Err(Error::BudgetExceeded { required: 2, budget: cfg.budget }.into());
    }
    let status = if n_max == want { Status::Ok } else { Status::BudgetExceeded };
    let r = resistance_check(&sys, c, eps, rate, n_max, &cfg)?;
    let mut text = format!(
        "resistance with c = {c}, eps = {eps}, rate = {rate}: {}\n",
        if r.verdict() { "holds" } else { "fails" }
    );
    let _ = writeln!(text, "{:>4}  {:>4}  {:>10}  {:>14}  {:>6}  witness", "n", "max", "words", "min ratio", "pass");
    for row in &r.rows {
        let _ = writeln!(
            text,
            "{:>4}  {:>4}  {:>10}  {:>14.6e}  {:>6}  {}",
            row.n, row.max_impurities, row.words, row.min_ratio, row.passes, row.witness
        );
    }
    Ok(Outcome::new(r, text)?.with_status(status))
}

pub fn chaos(a: ChaosArgs) -> Result<Outcome, CliError> {
    let sys = build_system(&a.system)?;
    let out = need(a.out, "out")?;
    let translations = match a.translations {
        Some(t) => t.0,
        None => vec![vec![0.0; sys.dim()]; sys.len()],
    };
    let p = probabilities(&a.p, sys.len())?;
    let ifs = AffineIfs::new(sys, translations)?;
    let samples = chaos_game(&ifs, &p, a.count.unwrap_or(100_000), a.seed.unwrap_or(0), a.burn_in.unwrap_or(1_000))?;
    samples.write_to(BufWriter::new(File::create(&out)?))?;
    let mean = samples.mean();
    let text = format!(
        "{} points (seed {}, burn-in {}) written to {}\nmean {:?}\nbounding radius {}\n",
        samples.count,
        samples.seed,
        samples.burn_in,
        out.display(),
        mean,
        ifs.bounding_radius()
    );
    let result = json!({
        "file": out.display().to_string(),
        "dim": samples.dim,
        "count": samples.count,
        "seed": samples.seed,
        "burn_in": samples.burn_in,
        "mean": mean,
        "bounding_radius": ifs.bounding_radius(),
    });
    Outcome::new(result, text)
}

pub fn moments(a: MomentsArgs) -> Result<Outcome, CliError> {
    let path = need(a.samples, "samples")?;
    let q = need(a.q, "q")?;
    let mut r_list = a.r;
    r_list.extend(a.r_exp.iter().map(|&j| 2f64.powi(-j)));
    if r_list.is_empty() {
        return Err(CliError::Config("missing --r or --r-exp".into()));
    }
    let samples = SampleSet::read_from(BufReader::new(File::open(&path)?))?;
    let series = mesh_moments(&samples, q, &r_list)?;
    let estimate = if series.entries.len() >= 4 { Some(dq_estimate(&series)?) } else { None };
    let csv = series.to_csv();
    let mut text = csv.clone();
    if let Some(e) = &estimate {
        let _ = writeln!(text, "slope {} ± {} (max residual {})", e.slope, e.stderr, e.max_residual);
    }
    Ok(Outcome::new(json!({ "series": series, "estimate": estimate }), text)?.with_csv(csv, a.out))
}

pub fn witness(a: WitnessArgs) -> Result<Outcome, CliError> {
    let sys = build_system(&a.system)?;
    if sys.len() != 2 {
        return Err(CliError::Config(format!("witness needs two maps, got {}", sys.len())));
    }
    let power = match a.power {
        Some(k) => k,
        None => need(a.system.k, "power")? as u64,
    };
    let series = growth_witness(sys.map(0), sys.map(1), power, a.nmax.unwrap_or(40))?;
    let csv = series.to_csv();
    Ok(Outcome::new(&series, csv.clone())?.with_csv(csv, a.out))
}

pub fn scan(a: ScanArgs) -> Result<Outcome, CliError> {
    let lam = need(a.lambda, "lambda")?;
    let delta = need(a.delta, "delta")?;
    let p = need(a.p, "p")?;
    let q = need(a.q, "q")?;
    if a.k.is_empty() {
        return Err(CliError::Config("missing --k".into()));
    }
    let scan = discontinuity_scan(lam, delta, p, q, &a.k, &solver(&a.exec, a.tol, None))?;
    let status = if scan.gaps_positive && scan.diagonal.resolved { Status::Ok } else { Status::Unresolved };
    let csv = scan.to_csv();
    Ok(Outcome::new(&scan, csv.clone())?.with_status(status).with_csv(csv, a.out))
}
