use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use chi2lab::divergence::{bregman, chi2_extended, f_divergence, jensen, Alpha, ScalarFunction};
use chi2lab::lab::{
    demo_first_variable_discontinuity, demo_second_variable_discontinuity, distinguish_from_bregman,
    distinguish_from_f_divergence, distinguish_from_jensen, format_report_table, run_property_suite, total_failures,
    FOutcome, F_SEARCH_BUDGET,
};
use chi2lab::linalg::matrix::op_norm;
use chi2lab::linalg::{matrix_from_json, ComplexMatrix, PdOperator, PsdOperator, Tolerances};
use chi2lab::optim::SphereOptConfig;
use chi2lab::reconstruct::{
    chi2_oracle, k_star_oracle, preserver_decompile, quadratic_form_tomography, spectral_peel, ConjugationMap,
    DecompileConfig, ProbeSchedule, SymmetryKind,
};

mod error;

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "chi2lab", version, about = "Quantum chi-square divergence toolkit")]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[arg(long, global = true, env = "CHI2LAB_SEED", default_value_t = 0)]
    seed: u64,

    /// Tolerance override, e.g. `--tol psd=1e-9` or `--tol decompile.verification=1e-7`.
    #[arg(long = "tol", global = true, value_name = "KEY=VAL", value_parser = parse_tol)]
    tol: Vec<(String, f64)>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a divergence between two matrices stored as matrix JSON.
    Divergence {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, value_enum, default_value_t = Kind::Chi2)]
        kind: Kind,
        /// Generator for the f, Bregman and Jensen divergences.
        #[arg(long, value_enum, default_value_t = Generator::ChiSquare)]
        f: Generator,
    },
    /// Run the property suite.
    Suite {
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.25, 0.5, 0.75, 1.0])]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3, 4])]
        dim: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Discontinuity demonstrations.
    Demo {
        #[arg(long, value_enum)]
        which: DemoKind,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Separate the divergence from f-, Bregman and Jensen divergences.
    Distinguish {
        #[arg(long, value_enum)]
        which: DistinguishKind,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = F_SEARCH_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = 2.0)]
        t: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 1.5, 2.5])]
        grid: Vec<f64>,
    },
    /// Recover a hidden PSD operator from divergence queries.
    Tomography {
        #[arg(long)]
        hidden: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<f64>>,
        /// Standard deviation of additive Gaussian noise on each answer.
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
    },
    /// Recover the spectrum of a hidden PD operator from rank-one queries.
    Peel {
        #[arg(long)]
        hidden: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
    /// Identify the conjugation behind a divergence-preserving map.
    Decompile {
        /// `identity`, `unitary:PATH` or `antiunitary:PATH`.
        #[arg(long)]
        map: String,
        /// Dimension for the identity map.
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Chi2,
    F,
    Bregman,
    Jensen,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Generator {
    ChiSquare,
    Square,
    Xlogx,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DemoKind {
    FirstVar,
    SecondVar,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DistinguishKind {
    F,
    Bregman,
    Jensen,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VAL, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{v:?}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Resolved tolerance overrides.
struct Tols {
    operator: Tolerances,
    check: f64,
    decompile: DecompileConfig,
}

fn resolve_tols(pairs: &[(String, f64)], seed: u64) -> Result<Tols, CliError> {
    let mut t = Tols {
        operator: Tolerances::default(),
        check: 1e-6,
        decompile: DecompileConfig { seed, ..Default::default() },
    };
    for (key, value) in pairs {
        if !(value.is_finite() && *value > 0.0) {
            return Err(CliError::Usage(format!("tolerance {key} must be positive")));
        }
        if let Some(stage) = key.strip_prefix("decompile.") {
            let d = &mut t.decompile;
            let slot = match stage {
                "trace" => &mut d.trace_tol,
                "stability" => &mut d.stability_tol,
                "orthogonality" => &mut d.orthogonality_tol,
                "transition" => &mut d.transition_tol,
                "scale" => &mut d.scale_tol,
                "verification" => &mut d.verification_tol,
                "divergence" => &mut d.divergence_tol,
                "epsilon" => &mut d.epsilon,
                _ => return Err(CliError::Usage(format!("unknown tolerance {key}"))),
            };
            *slot = *value;
        } else if key == "check" {
            t.check = *value;
        } else {
            t.operator.set(key, *value).map_err(|e| CliError::Usage(e.to_string()))?;
        }
    }
    Ok(t)
}

fn alpha(a: f64) -> Result<Alpha, CliError> {
    Alpha::new(a).map_err(|e| CliError::Usage(e.to_string()))
}

fn load_matrix(path: &Path) -> Result<ComplexMatrix, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    matrix_from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load_psd(path: &Path, tol: &Tolerances) -> Result<PsdOperator, CliError> {
    let m = load_matrix(path)?;
    PsdOperator::new_with(m, tol).map_err(|e| CliError::Check(format!("{}: {e}", path.display())))
}

fn load_pd(path: &Path, tol: &Tolerances) -> Result<PdOperator, CliError> {
    let m = load_matrix(path)?;
    PdOperator::new_with(m, tol).map_err(|e| CliError::Check(format!("{}: {e}", path.display())))
}

/// Shortest decimal that survives 12 significant digits, so exact values print as "0" or "10".
fn format_value(x: f64) -> String {
    let s = format!("{:.12e}", x);
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded == 0.0 {
        "0".into()
    } else {
        format!("{rounded}")
    }
}

/// What a subcommand produced: a report for either output mode and whether its checks passed.
struct Outcome {
    json: Value,
    text: String,
    pass: bool,
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serialization")
}

fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let tols = resolve_tols(&cli.tol, cli.seed)?;
    match &cli.command {
        Command::Divergence { a, b, alpha: al, kind, f } => {
            let al = alpha(*al)?;
            let gen = match f {
                Generator::ChiSquare => ScalarFunction::chi_square(),
                Generator::Square => ScalarFunction::square(),
                Generator::Xlogx => ScalarFunction::x_log_x(),
            };
            let tol = &tols.operator;
            let value = match kind {
                Kind::Chi2 => {
                    let v = chi2_extended(&load_psd(a, tol)?, &load_psd(b, tol)?, al)?;
                    v.as_finite().map(format_value).unwrap_or_else(|| "inf".into())
                }
                Kind::F => format_value(f_divergence(&load_psd(a, tol)?, &load_pd(b, tol)?, &gen)?),
                Kind::Bregman => format_value(bregman(&load_pd(a, tol)?, &load_pd(b, tol)?, &gen)?),
                Kind::Jensen => format_value(jensen(&load_psd(a, tol)?, &load_psd(b, tol)?, &gen)?),
            };
            let json_value = value.parse::<f64>().ok().filter(|v| v.is_finite()).map_or(json!("inf"), |v| json!(v));
            Ok(Outcome {
                json: json!({ "kind": format!("{kind:?}").to_lowercase(), "alpha": al.value(), "value": json_value }),
                text: value,
                pass: true,
            })
        }
        Command::Suite { alpha: alphas, dim, trials, out } => {
            let alphas = alphas.iter().map(|&a| alpha(a)).collect::<Result<Vec<_>, _>>()?;
            let reports = run_property_suite(&alphas, dim, *trials, cli.seed)?;
            let failures = total_failures(&reports);
            let json = json!({ "failures": failures, "reports": reports });
            if let Some(path) = out {
                let body = serde_json::to_string_pretty(&json).expect("report serialization");
                std::fs::write(path, body + "\n").map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            }
            let text = format_report_table(&reports).trim_end().to_string();
            Ok(Outcome { json, text, pass: failures == 0 })
        }
        Command::Demo { which, n_max, alpha: al } => match which {
            DemoKind::FirstVar => {
                let demo = demo_first_variable_discontinuity(alpha(*al)?, *n_max)?;
                let pass = demo.rows.iter().all(|r| r.value.is_infinite() && !r.support_contained)
                    && demo.limit_value.as_finite() == Some(0.0);
                Ok(Outcome { json: to_json(&demo), text: demo.to_table().trim_end().into(), pass })
            }
            DemoKind::SecondVar => {
                let demo = demo_second_variable_discontinuity(*n_max)?;
                Ok(Outcome { json: to_json(&demo), text: demo.to_table().trim_end().into(), pass: demo.all_pass })
            }
        },
        Command::Distinguish { which, alpha: al, dim, budget, t, grid } => {
            let al = alpha(*al)?;
            match which {
                DistinguishKind::F => {
                    let r = distinguish_from_f_divergence(al, *dim, *budget, cli.seed)?;
                    let pass = if al.is_endpoint(1e-12) {
                        r.outcome == FOutcome::Equality
                    } else {
                        r.outcome == FOutcome::Witness
                    };
                    let mut text = format!(
                        "alpha = {}, outcome = {:?}, samples = {}, max |S_f - K| = {:.3e}",
                        r.alpha, r.outcome, r.samples, r.max_residual
                    );
                    if let Some(w) = &r.witness {
                        let _ = write!(text, "\nwitness: S_f = {:.6}, K = {:.6}, gap = {:.6}", w.s_f, w.k_alpha, w.gap);
                    }
                    Ok(Outcome { json: to_json(&r), text, pass })
                }
                DistinguishKind::Bregman => {
                    let r = distinguish_from_bregman(al, *t, grid, *dim)?;
                    let text = format!(
                        "alpha = {}, t = {}, grid = {:?}\nvalues = {:?}\nquadratic fit residual = {:.6} (control {:.1e})",
                        r.alpha, r.t, r.grid, r.values, r.max_residual, r.control_residual
                    );
                    Ok(Outcome { json: to_json(&r), text, pass: r.max_residual >= 0.1 })
                }
                DistinguishKind::Jensen => {
                    let r = distinguish_from_jensen(al, *dim)?;
                    let text = format!(
                        "alpha = {}, K(A||B) = {:.12}, K(B||A) = {:.12}, gap = {:.12}, Jensen gap = {}",
                        r.alpha, r.forward, r.backward, r.gap, r.jensen_gap
                    );
                    Ok(Outcome { json: to_json(&r), text, pass: r.gap > 0.0 && r.jensen_gap == 0.0 })
                }
            }
        }
        Command::Tomography { hidden, alpha: al, schedule, noise } => {
            let al = alpha(*al)?;
            let hidden = load_psd(hidden, &tols.operator)?;
            let d = hidden.dim();
            let schedule = match schedule {
                Some(s) => ProbeSchedule::new(s.clone()).map_err(|e| CliError::Usage(e.to_string()))?,
                None => ProbeSchedule::default(),
            };
            let mut oracle = chi2_oracle(hidden.clone(), al);
            if *noise > 0.0 {
                oracle = oracle.with_noise(*noise, cli.seed).map_err(|e| CliError::Usage(e.to_string()))?;
            } else if *noise < 0.0 {
                return Err(CliError::Usage("noise must be nonnegative".into()));
            }
            let rec = quadratic_form_tomography(&oracle, d, al, &schedule)?;
            let error = op_norm(&(rec.matrix() - hidden.matrix()));
            let pass = *noise > 0.0 || error <= tols.check;
            let json = json!({
                "alpha": al.value(),
                "recovered": to_json(&chi2lab::linalg::MatrixJson::from_matrix(rec.matrix())),
                "error": error,
                "queries": oracle.count(),
                "schedule": schedule,
            });
            let text = format!(
                "recovered:\n{}\noperator-norm error = {error:.3e}, queries = {}",
                matrix_rows(rec.matrix()),
                oracle.count()
            );
            Ok(Outcome { json, text, pass })
        }
        Command::Peel { hidden, alpha: al } => {
            let al = alpha(*al)?;
            let hidden = load_pd(hidden, &tols.operator)?;
            let d = hidden.dim();
            let oracle = k_star_oracle(&hidden, al);
            let cfg = SphereOptConfig::default().with_seed(cli.seed);
            let sd = spectral_peel(&oracle, d, &cfg)?;
            let error = op_norm(&(sd.reassemble() - hidden.matrix()));
            let json = json!({
                "alpha": al.value(),
                "eigenvalues": sd.eigenvalues,
                "multiplicities": sd.multiplicities,
                "projections": to_json(&sd)["projections"],
                "reassembly_error": error,
                "queries": oracle.count(),
            });
            let values: Vec<String> = sd.eigenvalues.iter().map(|&l| format_value(l)).collect();
            let text = format!(
                "eigenvalues = ({})\nmultiplicities = {:?}\nreassembly error = {error:.3e}, queries = {}",
                values.join(", "),
                sd.multiplicities,
                oracle.count()
            );
            Ok(Outcome { json, text, pass: error <= tols.check })
        }
        Command::Decompile { map, dim, alpha: al } => {
            let al = alpha(*al)?;
            let phi = match map.split_once(':') {
                None if map == "identity" => {
                    if *dim < 2 {
                        return Err(CliError::Usage("dimension must be at least 2".into()));
                    }
                    ConjugationMap::identity(*dim)
                }
                Some(("unitary", path)) => conjugation(path, SymmetryKind::Unitary)?,
                Some(("antiunitary", path)) => conjugation(path, SymmetryKind::Antiunitary)?,
                _ => {
                    return Err(CliError::Usage(format!(
                        "unknown map {map:?}; expected identity, unitary:PATH or antiunitary:PATH"
                    )))
                }
            };
            let report = preserver_decompile(&phi, phi.dim(), al, &tols.decompile)?;
            let text = decompile_text(&report);
            Ok(Outcome { json: to_json(&report), text, pass: report.passed() })
        }
    }
}

fn conjugation(path: &str, kind: SymmetryKind) -> Result<ConjugationMap, CliError> {
    let u = load_matrix(Path::new(path))?;
    ConjugationMap::new(u, kind).map_err(|e| CliError::Check(format!("{path}: {e}")))
}

fn matrix_rows(m: &ComplexMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| {
                let z = m[(i, j)];
                format!("{:>10.6}{:+.6}i", z.re, z.im)
            })
            .collect();
        let _ = writeln!(out, "  [{}]", row.join(", "));
    }
    out.trim_end().into()
}

fn decompile_text(r: &chi2lab::reconstruct::DecompileReport) -> String {
    let mut rows = BTreeMap::new();
    rows.insert("trace preservation", r.trace_preservation_residual);
    rows.insert("stability", r.stability_residual);
    rows.insert("orthogonality", r.orthogonality_residual);
    rows.insert("transition", r.transition_residual);
    rows.insert("scale consistency", r.scale_consistency_residual);
    rows.insert("divergence", r.divergence_residual);
    rows.insert("verification", r.verification_residual);
    let mut out = String::new();
    let kind = r.kind.map_or("none".to_string(), |k| format!("{k:?}").to_lowercase());
    let _ = writeln!(out, "kind = {kind}");
    if let Some(map) = &r.recovered {
        let _ = writeln!(out, "U =\n{}", matrix_rows(&map.u));
    }
    for (name, v) in rows {
        let _ = writeln!(out, "{name:>20} residual {v:.3e}");
    }
    let _ = writeln!(out, "queries = {}", r.query_count);
    for f in &r.failures {
        let _ = writeln!(out, "FAILED {}: {}", f.stage, f.message);
    }
    out.trim_end().into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&out.json).expect("report serialization"));
            } else {
                println!("{}", out.text);
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
