//! Command-line front end for the `wedderburn` crate: matrix files in,
//! matrices and JSON reports out, plus seeded randomized check suites.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use wedderburn::linalg::pinv_with_tol;
use wedderburn::lowrank::{best_rank_k, cur_decompose, nystrom_sketch, IndexSet};
use wedderburn::projector::{idempotency_tol, join, meet, oblique_projector};
use wedderburn::reduction::{wedderburn_decompose, DecompositionReport};
use wedderburn::{generalized_reduce, penrose_check, svd, Matrix, Projector, Tolerances};

pub mod checks;
pub mod io;
pub mod report;

use checks::Suite;
use io::Format;
use report::JsonReport;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}line {line}, column {column}: {message}", file.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Parse {
        file: Option<PathBuf>,
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Math(#[from] wedderburn::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::Parse {
                line,
                column,
                message,
                ..
            } => CliError::Parse {
                file: Some(path.to_path_buf()),
                line,
                column,
                message,
            },
            CliError::Math(e) => CliError::Parse {
                file: Some(path.to_path_buf()),
                line: 0,
                column: 0,
                message: e.to_string(),
            },
            other => other,
        }
    }

    /// 1 for I/O, parse and shape problems; 2 when the mathematics refused.
    pub fn exit_code(&self) -> u8 {
        use wedderburn::Error as E;
        match self {
            CliError::Math(
                E::NotIdempotent { .. }
                | E::NotOrthogonalProjector { .. }
                | E::NotComplementary { .. }
                | E::NonCommuting { .. }
                | E::DegenerateOmega { .. }
                | E::RankDeficient { .. }
                | E::DegenerateSplit { .. }
                | E::RangeMismatch { .. }
                | E::NotInClass(_)
                | E::NotMetaFactorization { .. }
                | E::ProjectorRankMismatch { .. }
                | E::NotComplementaryPair { .. }
                | E::Disagreement { .. }
                | E::NoConvergence { .. },
            ) => 2,
            _ => 1,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("must be positive, got {v}"))
    }
}

#[derive(Debug, Parser)]
#[command(name = "wedderburn", version, about = "Generalized Wedderburn rank reduction")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Relative factor for residual assertions.
    #[arg(long, global = true, default_value_t = 1e-9, value_parser = positive)]
    pub tol: f64,
    /// Threshold for subspace comparisons.
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = positive)]
    pub tol_sub: f64,
    /// Absolute singular-value threshold for every rank decision
    /// (default: chosen per matrix).
    #[arg(long, global = true, value_parser = positive)]
    pub rank_tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Format of written matrices, and of inputs without a .mtx/.csv extension.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Where to write the result matrix.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Where to write the JSON report (default: stdout).
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
}

impl Common {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            rank: self.rank_tol,
            subspace: self.tol_sub,
            residual: self.tol,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moore-Penrose pseudoinverse.
    Pinv { a: PathBuf },
    /// B = A - (A X)(Y^T A X)^+(Y^T A); Y defaults to X.
    Reduce {
        a: PathBuf,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        y: Option<PathBuf>,
    },
    /// A = (A X)(Y^T A X)^+(Y^T A), requiring rank(Y^T A X) = rank(A);
    /// X and Y default to A^T and A.
    Decompose {
        a: PathBuf,
        #[arg(long)]
        x: Option<PathBuf>,
        #[arg(long)]
        y: Option<PathBuf>,
    },
    /// C U^+ R from 0-based row and column indices.
    Cur {
        a: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        rows: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        cols: Vec<usize>,
    },
    /// Randomized sketch with `sketch` columns and `sketch + oversample` rows.
    Nystrom {
        a: PathBuf,
        #[arg(long)]
        sketch: usize,
        #[arg(long, default_value_t = 0)]
        oversample: usize,
    },
    /// Best rank-k approximation.
    Bestk {
        a: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Oblique projector A (B^T A)^+ B^T.
    Project { a: PathBuf, b: PathBuf },
    /// Meet and join of two commuting projections; the join goes to --out.
    Meetjoin {
        p: PathBuf,
        q: PathBuf,
        #[arg(long)]
        meet_out: Option<PathBuf>,
    },
    /// Randomized property suite.
    Check {
        #[arg(value_enum)]
        suite: Suite,
        #[arg(long, default_value_t = 200)]
        trials: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Pinv { .. } => "pinv",
            Command::Reduce { .. } => "reduce",
            Command::Decompose { .. } => "decompose",
            Command::Cur { .. } => "cur",
            Command::Nystrom { .. } => "nystrom",
            Command::Bestk { .. } => "bestk",
            Command::Project { .. } => "project",
            Command::Meetjoin { .. } => "meetjoin",
            Command::Check { .. } => "check",
        }
    }
}

/// Result matrices produced by a command, with the path each goes to.
type Outputs = Vec<(Option<PathBuf>, Matrix)>;

struct Run<'a> {
    common: &'a Common,
    tol: Tolerances,
    report: JsonReport,
}

impl Run<'_> {
    fn read(&mut self, name: &str, path: &Path) -> Result<Matrix, CliError> {
        let m = io::read_matrix(path, self.common.format)?;
        self.report.shape(name, &m);
        Ok(m)
    }

    fn sigma(&mut self, m: &Matrix) -> Result<(), CliError> {
        self.report.singular_values = Some(svd(m)?.sigma);
        Ok(())
    }
}

/// Exit code and the report, if the run got far enough to produce one.
pub struct Outcome {
    pub code: u8,
    pub report: Option<JsonReport>,
    pub error: Option<CliError>,
}

pub fn run(cli: &Cli) -> Outcome {
    let start = Instant::now();
    let mut run = Run {
        common: &cli.common,
        tol: cli.common.tolerances(),
        report: JsonReport::new(cli.command.name(), cli.common.seed),
    };
    let result = execute(&cli.command, &mut run).and_then(|outputs| {
        for (path, m) in outputs {
            if let Some(path) = path {
                let format = cli.common.format.or_else(|| Format::from_path(&path)).unwrap_or(Format::Mm);
                io::write_matrix(&m, &path, format)?;
            }
        }
        Ok(())
    });
    let mut report = run.report;
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    match result {
        Ok(()) => Outcome {
            code: if report.passed { 0 } else { 2 },
            report: Some(report),
            error: None,
        },
        Err(e) if e.exit_code() == 2 => {
            report.fail(e.to_string());
            Outcome {
                code: 2,
                report: Some(report),
                error: Some(e),
            }
        }
        Err(e) => Outcome {
            code: 1,
            report: None,
            error: Some(e),
        },
    }
}

fn execute(command: &Command, run: &mut Run) -> Result<Outputs, CliError> {
    let out = run.common.out.clone();
    let tol = run.tol;
    match command {
        Command::Pinv { a } => {
            let a = run.read("a", a)?;
            let f = svd(&a)?;
            let rank = f.rank(tol.rank);
            run.report.rank("a", rank);
            run.report.singular_values = Some(f.sigma.clone());
            let a_plus = pinv_with_tol(&a, tol.rank);
            let res = penrose_check(&a, &a_plus)?;
            let (na, np) = (a.frobenius_norm().max(1.0), a_plus.frobenius_norm().max(1.0));
            let r = &mut run.report;
            r.assert_within("penrose_axa", res.axa, tol.residual * na);
            r.assert_within("penrose_xax", res.xax, tol.residual * np);
            r.assert_within("penrose_ax_symmetric", res.ax_symmetric, tol.residual * na * np);
            r.assert_within("penrose_xa_symmetric", res.xa_symmetric, tol.residual * na * np);
            Ok(vec![(out, a_plus)])
        }
        Command::Reduce { a, x, y } => {
            let a = run.read("a", a)?;
            let x = run.read("x", x)?;
            let y = match y {
                Some(y) => run.read("y", y)?,
                None => x.clone(),
            };
            let rep = generalized_reduce(&a, &x, &y, &tol)?;
            let r = &mut run.report;
            r.rank("a", rep.rank_a);
            r.rank("m", rep.k);
            r.rank("b", rep.rank_b);
            r.k = Some(rep.k);
            r.assert_within("rank_deviation", rep.rank_deviation().unsigned_abs() as f64, 0.0);
            // b_noise bounds the rounding carried by B itself
            let bound = tol.residual * a.frobenius_norm().max(1.0) + rep.b_noise;
            r.assert_within("left_projection", rep.residuals["left_projection"], bound);
            r.assert_within("right_projection", rep.residuals["right_projection"], bound);
            r.assert_within("nullspace_split", rep.residuals["nullspace_split"], tol.subspace);
            r.assert_within("nullspace_overlap", rep.residuals["nullspace_overlap"].abs(), 0.0);
            r.residual("rank_b_tol", rep.rank_b_tol);
            r.residual("b_noise", rep.b_noise);
            run.sigma(&rep.b)?;
            Ok(vec![(out, rep.b)])
        }
        Command::Decompose { a, x, y } => {
            let a = run.read("a", a)?;
            let x = match x {
                Some(x) => run.read("x", x)?,
                None => a.transpose(),
            };
            let y = match y {
                Some(y) => run.read("y", y)?,
                None => a.clone(),
            };
            let d = wedderburn_decompose(&a, &x, &y, &tol)?;
            decomposition_report(&mut run.report, &a, &d, &tol);
            Ok(vec![(out, d.approx)])
        }
        Command::Cur { a, rows, cols } => {
            let a = run.read("a", a)?;
            let rep = cur_decompose(&a, &IndexSet::new(rows.clone())?, &IndexSet::new(cols.clone())?, &tol)?;
            let r = &mut run.report;
            r.rank("a", rep.rank_a);
            r.rank("u", rep.rank_u);
            r.k = Some(rep.rank_u);
            let bound = tol.residual * a.frobenius_norm().max(1.0);
            if rep.rank_u == rep.rank_a {
                r.assert_within("residual", rep.residual, bound);
            } else {
                r.residual("residual", rep.residual);
                r.notes.push("rank(U) < rank(A): C U^+ R is an approximation".into());
            }
            Ok(vec![(out, rep.approx)])
        }
        Command::Nystrom { a, sketch, oversample } => {
            let a = run.read("a", a)?;
            let d = nystrom_sketch(&a, *sketch, *oversample, run.common.seed, &tol)?;
            if d.exact_rank() {
                decomposition_report(&mut run.report, &a, &d, &tol);
            } else {
                let r = &mut run.report;
                r.rank("a", d.rank_a);
                r.rank("m", d.rank_m);
                r.k = Some(d.rank_m);
                r.residual("reconstruction", d.reconstruction_residual);
                r.notes.push("sketch rank below rank(A): the result is an approximation".into());
            }
            Ok(vec![(out, d.approx)])
        }
        Command::Bestk { a, k } => {
            let a = run.read("a", a)?;
            let rep = best_rank_k(&a, *k, &tol)?;
            run.sigma(&a)?;
            let sigma_1 = run.report.singular_values.as_ref().and_then(|s| s.first().copied()).unwrap_or(0.0);
            let r = &mut run.report;
            r.k = Some(rep.k_kept);
            r.residual("frobenius_error", rep.frob_error);
            r.residual("spectral_error", rep.spectral_error);
            r.residual("optimal_frobenius_error", rep.optimal_frob_error);
            r.assert_within(
                "optimality_gap",
                (rep.frob_error - rep.optimal_frob_error).abs(),
                tol.residual * sigma_1.max(1.0),
            );
            Ok(vec![(out, rep.approx)])
        }
        Command::Project { a, b } => {
            let a = run.read("a", a)?;
            let b = run.read("b", b)?;
            let p = oblique_projector(&a, &b, &tol)?;
            let rank_core = wedderburn::numerical_rank(&(&b.transpose() * &a), tol.rank);
            let r = &mut run.report;
            r.rank("p", p.rank());
            r.rank("bta", rank_core);
            let pm = p.matrix();
            r.assert_within("idempotency", (pm * pm).distance(pm), idempotency_tol(pm, tol.residual));
            r.assert_within("trace_rank_gap", p.trace_rank().abs_diff(rank_core) as f64, 0.0);
            Ok(vec![(out, p.into_matrix())])
        }
        Command::Meetjoin { p, q, meet_out } => {
            let p = Projector::new(run.read("p", p)?, &tol)?;
            let q = Projector::new(run.read("q", q)?, &tol)?;
            let j = join(&p, &q, &tol)?;
            let m = meet(&p, &q, &tol)?;
            let r = &mut run.report;
            r.rank("p", p.rank());
            r.rank("q", q.rank());
            r.rank("join", j.rank());
            r.rank("meet", m.rank());
            let (pm, qm) = (p.matrix(), q.matrix());
            r.residual("commutator", (pm * qm).distance(&(qm * pm)));
            r.assert_within(
                "dimension_gap",
                (j.rank() + m.rank()).abs_diff(p.rank() + q.rank()) as f64,
                0.0,
            );
            Ok(vec![(out, j.into_matrix()), (meet_out.clone(), m.into_matrix())])
        }
        Command::Check { suite, trials } => {
            checks::run_suite(*suite, *trials, run.common.seed, &tol, &mut run.report);
            Ok(Vec::new())
        }
    }
}

fn decomposition_report(r: &mut JsonReport, a: &Matrix, d: &DecompositionReport, tol: &Tolerances) {
    r.rank("a", d.rank_a);
    r.rank("m", d.rank_m);
    r.k = Some(d.rank_m);
    let pinv_norm = pinv_with_tol(a, tol.rank).frobenius_norm().max(1.0);
    r.assert_within("reconstruction", d.reconstruction_residual, tol.residual * a.frobenius_norm().max(1.0));
    r.assert_within("pinv_factorization", d.pinv_residual, tol.residual * pinv_norm);
}
