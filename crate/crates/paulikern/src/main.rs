//! Command-line front end: builds projector families and toy models, runs
//! the expansion and kernel checks, and emits machine-readable reports.
//!
//! Exit codes: 0 success, 1 verification or invariant failure, 2 usage,
//! parse or schema error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use paulikern::algebra::{
    commutation_check, convergence_report, kernel_basis, sum_projector, verify_expansion_identity,
    verify_kernel_identity, DEFAULT_KERNEL_THRESHOLD,
};
use paulikern::models::{
    build_three_body_toy, equal_overlap_triple, random_ensemble, ForbiddenState, ToyModel,
    ToyModelParams,
};
use paulikern::operator::{hermitian_eig, Operator, ProjectorSet};
use paulikern::opp::{almost_forbidden_report, lambda_sweep, log_grid};
use paulikern::report::{sweep_tsv, ReportEnvelope, Status};
use paulikern::words::{binomial_expansion, expansion_terms, formal_equal, recursion_step};

#[derive(Parser)]
#[command(
    name = "paulikern",
    version,
    about = "Pauli projector algebra: expansions, kernels and pseudopotentials"
)]
struct Cli {
    /// Worker threads for independent eigensolves; falls back to the
    /// PAULIKERN_THREADS environment variable. Results do not depend on
    /// the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the report envelope to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the expansion identity, symbolically or on a random ensemble.
    Verify(VerifyArgs),
    /// Spectrum of the projector sum with convergence diagnostics.
    Spectrum(SpectrumArgs),
    /// Extract the allowed subspace (kernel of the projector sum).
    Kernel(KernelArgs),
    /// Build the three-body toy model and write it to a file.
    Toy(ToyArgs),
    /// Pseudopotential sweep against the projected Hamiltonian.
    Opp(OppArgs),
    /// Validate a JSON input file and check it round-trips.
    Schema(SchemaArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VerifyMode {
    Symbolic,
    Numeric,
}

#[derive(Args)]
struct VerifyArgs {
    /// Number of generators N.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    generators: u32,
    /// Expansion order M (all orders 1..=M are checked).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    order: u32,
    #[arg(long, value_enum)]
    mode: VerifyMode,
    /// Matrix dimension for numeric mode.
    #[arg(long, default_value_t = 40)]
    dim: usize,
    /// Random seed for numeric mode.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Projector ranks for numeric mode, comma separated; defaults to 3
    /// per generator.
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    /// Residual tolerance for numeric mode; defaults to 1e-10 * dim.
    #[arg(long)]
    tolerance: Option<f64>,
}

/// Flags selecting where a projector set comes from.
#[derive(Args)]
struct SetSource {
    /// Projector-set JSON file (or a toy-model file; its set is used).
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Equal-overlap triple with this pairwise overlap.
    #[arg(long, value_name = "C", conflicts_with = "input")]
    triple_overlap: Option<f64>,
    /// Seeded random ensemble.
    #[arg(long, conflicts_with_all = ["input", "triple_overlap"])]
    random: bool,
    /// Three-body toy model.
    #[arg(long, conflicts_with_all = ["input", "triple_overlap", "random"])]
    toy: bool,
    /// Dimension for generated sets.
    #[arg(long, default_value_t = 10)]
    dim: usize,
    /// Number of projectors for --random.
    #[arg(long, default_value_t = 3)]
    nproj: usize,
    /// Ranks for --random, comma separated; defaults to 3 each.
    #[arg(long, value_delimiter = ',')]
    ranks: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Total-quanta cutoff for --toy.
    #[arg(long, default_value_t = 8)]
    nmax: usize,
    /// Forbidden states for --toy, comma separated (0S, 2S).
    #[arg(long, value_delimiter = ',', default_values_t = vec!["0S".to_string()])]
    fs: Vec<String>,
    /// Kinematic rotation cosine for --toy.
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    rotation_cos: f64,
    /// Gaussian depth for --toy.
    #[arg(long, default_value_t = 32.0)]
    depth: f64,
    /// Gaussian range for --toy.
    #[arg(long, default_value_t = 0.3)]
    range: f64,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    source: SetSource,
    /// Kernel eigenvalue cutoff.
    #[arg(long, default_value_t = DEFAULT_KERNEL_THRESHOLD)]
    threshold: f64,
    /// Contraction target used for the predicted power.
    #[arg(long, default_value_t = 1e-9)]
    target: f64,
    /// Fail (exit 1) when the power sequence does not converge.
    #[arg(long)]
    require_convergent: bool,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    source: SetSource,
    #[arg(long, default_value_t = DEFAULT_KERNEL_THRESHOLD)]
    threshold: f64,
    /// Include the kernel basis vectors in the envelope.
    #[arg(long)]
    emit_vectors: bool,
}

#[derive(Args)]
struct ToyArgs {
    #[arg(long, default_value_t = 8)]
    nmax: usize,
    /// Forbidden states, comma separated (0S, 2S).
    #[arg(long, value_delimiter = ',', default_values_t = vec!["0S".to_string()])]
    fs: Vec<String>,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    rotation_cos: f64,
    #[arg(long, default_value_t = 32.0)]
    depth: f64,
    #[arg(long, default_value_t = 0.3)]
    range: f64,
    /// Write the full model (set, Hamiltonian, labels) here.
    #[arg(long, value_name = "PATH")]
    model_out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_KERNEL_THRESHOLD)]
    threshold: f64,
}

#[derive(Args)]
struct OppArgs {
    /// Toy-model JSON file written by `toy --model-out`.
    #[arg(long, value_name = "PATH")]
    input: Option<PathBuf>,
    /// Build the toy model in place instead of reading a file.
    #[arg(long, conflicts_with = "input")]
    toy: bool,
    #[arg(long, default_value_t = 8)]
    nmax: usize,
    #[arg(long, value_delimiter = ',', default_values_t = vec!["0S".to_string()])]
    fs: Vec<String>,
    #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
    rotation_cos: f64,
    #[arg(long, default_value_t = 32.0)]
    depth: f64,
    #[arg(long, default_value_t = 0.3)]
    range: f64,
    /// Penalty grid START:STOP:COUNT, log spaced, in units of the
    /// Frobenius norm of the Hamiltonian.
    #[arg(long, default_value = "1e1:1e6:12")]
    lambdas: String,
    /// Number of allowed levels to track.
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long, default_value_t = DEFAULT_KERNEL_THRESHOLD)]
    threshold: f64,
    /// Almost-forbidden band edges START:STOP:COUNT (log spaced,
    /// absolute); enables the keep-versus-eliminate table.
    #[arg(long, value_name = "GRID")]
    eps: Option<String>,
    /// Penalty strength for the finite-strength reference energy in the
    /// keep-versus-eliminate table; defaults to the top of the grid.
    #[arg(long)]
    lambda_ref: Option<f64>,
    /// Write the sweep table here.
    #[arg(long, value_name = "PATH")]
    tsv: Option<PathBuf>,
}

#[derive(Args)]
struct SchemaArgs {
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
}

/// Errors that terminate a command with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

fn parse_fs(labels: &[String]) -> Result<Vec<ForbiddenState>, UsageError> {
    labels
        .iter()
        .map(|s| {
            s.parse::<ForbiddenState>()
                .map_err(|e| usage(e.to_string()))
        })
        .collect()
}

/// Parses START:STOP:COUNT into a log-spaced grid.
fn parse_grid(text: &str) -> Result<Vec<f64>, UsageError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(usage(format!(
            "grid {text:?} must have the form START:STOP:COUNT"
        )));
    }
    let start: f64 = parts[0]
        .parse()
        .map_err(|_| usage(format!("bad grid start {:?}", parts[0])))?;
    let stop: f64 = parts[1]
        .parse()
        .map_err(|_| usage(format!("bad grid stop {:?}", parts[1])))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| usage(format!("bad grid count {:?}", parts[2])))?;
    log_grid(start, stop, count).map_err(|e| usage(e.to_string()))
}

fn read_text(path: &Path) -> Result<String, UsageError> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

/// Parse failure diagnostics include the byte offset alongside
/// line/column.
fn json_error(path: &Path, text: &str, err: &serde_json::Error) -> UsageError {
    let (line, column) = (err.line(), err.column());
    let offset: usize = text
        .lines()
        .take(line.saturating_sub(1))
        .map(|l| l.len() + 1)
        .sum::<usize>()
        + column.saturating_sub(1);
    usage(format!(
        "{}: {err} (line {line}, column {column}, byte offset {offset})",
        path.display()
    ))
}

fn toy_params(
    nmax: usize,
    fs: &[String],
    rotation_cos: f64,
    depth: f64,
    range: f64,
) -> Result<ToyModelParams, UsageError> {
    Ok(ToyModelParams {
        nmax,
        fs: parse_fs(fs)?,
        rotation_cos,
        potential_depth: depth,
        potential_range: range,
        oscillator_length: 1.0,
    })
}

impl SetSource {
    /// Materializes the projector set and an echo of how it was made.
    fn load(&self) -> Result<(ProjectorSet, Value), UsageError> {
        if let Some(path) = &self.input {
            let text = read_text(path)?;
            let probe: Value =
                serde_json::from_str(&text).map_err(|e| json_error(path, &text, &e))?;
            let set = if probe.get("set").is_some() {
                let model: ToyModel =
                    serde_json::from_str(&text).map_err(|e| json_error(path, &text, &e))?;
                model.set
            } else {
                serde_json::from_str::<ProjectorSet>(&text)
                    .map_err(|e| json_error(path, &text, &e))?
            };
            return Ok((set, json!({"input": path.display().to_string()})));
        }
        if let Some(c) = self.triple_overlap {
            let set = equal_overlap_triple(self.dim, c).map_err(|e| usage(e.to_string()))?;
            return Ok((set, json!({"triple_overlap": c, "dim": self.dim})));
        }
        if self.random {
            let ranks = self.ranks.clone().unwrap_or_else(|| vec![3; self.nproj]);
            let set = random_ensemble(self.dim, self.nproj, &ranks, self.seed)
                .map_err(|e| usage(e.to_string()))?;
            return Ok((
                set,
                json!({
                    "random": true, "dim": self.dim, "nproj": self.nproj,
                    "ranks": ranks, "seed": self.seed
                }),
            ));
        }
        if self.toy {
            let params = toy_params(
                self.nmax,
                &self.fs,
                self.rotation_cos,
                self.depth,
                self.range,
            )?;
            let toy = build_three_body_toy(&params).map_err(|e| usage(e.to_string()))?;
            return Ok((toy.set, serde_json::to_value(&params).expect("params")));
        }
        Err(usage(
            "no set source: pass --input, --triple-overlap, --random or --toy",
        ))
    }
}

fn cmd_verify(args: &VerifyArgs) -> Result<ReportEnvelope, UsageError> {
    let n = args.generators as usize;
    match args.mode {
        VerifyMode::Symbolic => {
            let mut env = ReportEnvelope::new(
                "verify",
                json!({
                    "generators": n, "order": args.order, "mode": "symbolic"
                }),
            );
            let mut checks = Vec::new();
            for m in 1..=args.order as usize {
                let eq = formal_equal(&expansion_terms(n, m), &binomial_expansion(n, m));
                env.check(
                    &format!("expansion_identity_m{m}"),
                    eq.difference.num_terms() as f64,
                    0.0,
                );
                checks.push(json!({"order": m, "equal": eq.equal}));
            }
            for m in 1..args.order as usize {
                let eq = formal_equal(&recursion_step(n, m), &expansion_terms(n, m + 1));
                env.check(
                    &format!("recursion_step_n{m}"),
                    eq.difference.num_terms() as f64,
                    0.0,
                );
            }
            env.results = json!({"checks": checks});
            Ok(env)
        }
        VerifyMode::Numeric => {
            let ranks = args.ranks.clone().unwrap_or_else(|| vec![3; n]);
            let tolerance = args.tolerance.unwrap_or(1e-10 * args.dim as f64);
            let mut env = ReportEnvelope::new(
                "verify",
                json!({
                    "generators": n, "order": args.order, "mode": "numeric",
                    "dim": args.dim, "seed": args.seed, "ranks": ranks,
                    "tolerance": tolerance
                }),
            );
            let set = random_ensemble(args.dim, n, &ranks, args.seed)
                .map_err(|e| usage(e.to_string()))?;
            for m in 1..=args.order {
                let report = verify_expansion_identity(&set, m);
                env.check(
                    &format!("expansion_identity_m{m}"),
                    report.residual,
                    tolerance,
                );
            }
            let t2 = verify_kernel_identity(&set, DEFAULT_KERNEL_THRESHOLD);
            env.check(
                "kernel_identity_dim_difference",
                (t2.kernel_dim_sum as f64 - t2.kernel_dim_complete as f64).abs(),
                0.0,
            );
            env.check(
                "kernel_identity_complete_on_sum",
                t2.complete_on_sum_kernel,
                10.0 * DEFAULT_KERNEL_THRESHOLD,
            );
            env.check(
                "kernel_identity_sum_on_complete",
                t2.sum_on_complete_kernel,
                10.0 * DEFAULT_KERNEL_THRESHOLD,
            );
            let comm = commutation_check(&set, DEFAULT_KERNEL_THRESHOLD);
            env.check("commutation_max", comm.max_residual, comm.tolerance);
            env.results = json!({
                "kernel_identity": t2,
                "commutation": comm,
            });
            Ok(env)
        }
    }
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<ReportEnvelope, UsageError> {
    let (set, source_echo) = args.source.load()?;
    let mut env = ReportEnvelope::new(
        "spectrum",
        json!({
            "source": source_echo,
            "threshold": args.threshold,
            "target": args.target,
            "require_convergent": args.require_convergent
        }),
    );
    let report =
        convergence_report(&set, args.threshold, args.target).map_err(|e| usage(e.to_string()))?;
    if args.require_convergent && (report.divergent || report.stagnant) {
        env.status = Status::Error;
    }
    env.push_residual(
        "lambda_max",
        report.eigenvalues.last().copied().unwrap_or(0.0),
    );
    env.push_residual("contraction_factor", report.contraction_factor);
    env.results = serde_json::to_value(&report).expect("report");
    Ok(env)
}

fn cmd_kernel(args: &KernelArgs) -> Result<ReportEnvelope, UsageError> {
    let (set, source_echo) = args.source.load()?;
    let mut env = ReportEnvelope::new(
        "kernel",
        json!({
            "source": source_echo,
            "threshold": args.threshold,
            "emit_vectors": args.emit_vectors
        }),
    );
    let kb = kernel_basis(&set, args.threshold);
    let sum_residual = kb.sum_residual(&set);
    let per_projector = kb.intersection_residuals(&set);
    env.check("sum_residual", sum_residual, args.threshold.max(1e-12));
    for (i, r) in per_projector.iter().enumerate() {
        env.push_residual(&format!("projector_{i}_residual"), *r);
    }
    let vectors: Option<Vec<Vec<f64>>> = args.emit_vectors.then(|| {
        (0..kb.kernel_dim())
            .map(|k| kb.vector(k).iter().copied().collect())
            .collect()
    });
    env.results = json!({
        "dim": set.dim(),
        "kernel_dim": kb.kernel_dim(),
        "threshold": kb.threshold(),
        "vectors": vectors,
    });
    Ok(env)
}

fn cmd_toy(args: &ToyArgs) -> Result<ReportEnvelope, UsageError> {
    let params = toy_params(
        args.nmax,
        &args.fs,
        args.rotation_cos,
        args.depth,
        args.range,
    )?;
    let toy = build_three_body_toy(&params).map_err(|e| usage(e.to_string()))?;
    let mut env = ReportEnvelope::new(
        "toy",
        json!({
            "params": serde_json::to_value(&params).expect("params"),
            "threshold": args.threshold,
            "model_out": args.model_out.as_ref().map(|p| p.display().to_string())
        }),
    );
    let p = sum_projector(&toy.set);
    let eig = hermitian_eig(&p).map_err(|e| usage(e.to_string()))?;
    let kb = kernel_basis(&toy.set, args.threshold);
    env.push_residual("lambda_max", *eig.eigenvalues.last().expect("nonempty"));
    env.results = json!({
        "dim": toy.set.dim(),
        "ranks": toy.set.iter().map(|p| p.rank()).collect::<Vec<_>>(),
        "kernel_dim": kb.kernel_dim(),
        "eigenvalues": eig.eigenvalues,
        "hamiltonian_fro_norm": toy.hamiltonian.fro_norm(),
    });
    if let Some(path) = &args.model_out {
        let mut text = serde_json::to_string_pretty(&toy).expect("model serializes");
        text.push('\n');
        std::fs::write(path, text)
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(env)
}

fn cmd_opp(args: &OppArgs) -> Result<ReportEnvelope, UsageError> {
    let (toy, source_echo): (ToyModel, Value) = if let Some(path) = &args.input {
        let text = read_text(path)?;
        let model: ToyModel =
            serde_json::from_str(&text).map_err(|e| json_error(path, &text, &e))?;
        (model, json!({"input": path.display().to_string()}))
    } else if args.toy {
        let params = toy_params(
            args.nmax,
            &args.fs,
            args.rotation_cos,
            args.depth,
            args.range,
        )?;
        let toy = build_three_body_toy(&params).map_err(|e| usage(e.to_string()))?;
        let echo = serde_json::to_value(&params).expect("params");
        (toy, echo)
    } else {
        return Err(usage("no model: pass --input or --toy"));
    };

    let h_norm = toy.hamiltonian.fro_norm();
    let grid_units = parse_grid(&args.lambdas)?;
    let grid: Vec<f64> = grid_units.iter().map(|l| l * h_norm).collect();
    let mut env = ReportEnvelope::new(
        "opp",
        json!({
            "source": source_echo,
            "lambdas": args.lambdas,
            "levels": args.levels,
            "threshold": args.threshold,
            "eps": args.eps,
            "lambda_ref": args.lambda_ref,
            "hamiltonian_fro_norm": h_norm
        }),
    );

    let sweep = lambda_sweep(
        &toy.hamiltonian,
        &toy.set,
        &grid,
        args.levels,
        args.threshold,
    )
    .map_err(|e| usage(e.to_string()))?;
    for (k, slope) in sweep.slopes.iter().enumerate() {
        if let Some(s) = slope {
            env.push_residual(&format!("slope_{k}"), *s);
        }
    }
    for k in 0..args.levels {
        let gap =
            (sweep.energies.last().expect("grid nonempty")[k] - sweep.projected_energies[k]).abs();
        env.push_residual(&format!("final_gap_{k}"), gap / h_norm.max(1.0));
    }

    let almost = match &args.eps {
        Some(spec) => {
            let eps_grid = parse_grid(spec)?;
            let lambda_ref = args.lambda_ref.unwrap_or(*grid.last().expect("nonempty"));
            let report = almost_forbidden_report(
                &toy.hamiltonian,
                &toy.set,
                &eps_grid,
                lambda_ref,
                args.threshold,
            )
            .map_err(|e| usage(e.to_string()))?;
            // Variational ordering is a hard contract.
            for row in &report.rows {
                if let (Some(keep), Some(elim)) = (row.e_keep, row.e_elim) {
                    if elim < keep - 1e-10 {
                        env.status = Status::Error;
                        env.push_residual("variational_ordering_violation", keep - elim);
                    }
                }
            }
            Some(report)
        }
        None => None,
    };

    if let Some(path) = &args.tsv {
        std::fs::write(path, sweep_tsv(&sweep))
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    env.results = json!({
        "sweep": sweep,
        "almost_forbidden": almost,
    });
    Ok(env)
}

fn cmd_schema(args: &SchemaArgs) -> Result<ReportEnvelope, UsageError> {
    let path = &args.input;
    let text = read_text(path)?;
    let probe: Value = serde_json::from_str(&text).map_err(|e| json_error(path, &text, &e))?;

    let mut env = ReportEnvelope::new("schema", json!({"input": path.display().to_string()}));

    let kind;
    let canonical_first;
    let canonical_second;
    if probe.get("set").is_some() && probe.get("hamiltonian").is_some() {
        kind = "toy_model";
        let first: ToyModel =
            serde_json::from_str(&text).map_err(|e| json_error(path, &text, &e))?;
        env.check(
            "hamiltonian_symmetry",
            first.hamiltonian.symmetry_residual(),
            first.hamiltonian.symmetry_tolerance(),
        );
        canonical_first = serde_json::to_string(&first).expect("serializes");
        let second: ToyModel =
            serde_json::from_str(&canonical_first).map_err(|e| json_error(path, &text, &e))?;
        canonical_second = serde_json::to_string(&second).expect("serializes");
    } else if probe.get("projectors").is_some() {
        kind = "projector_set";
        let first: ProjectorSet =
            serde_json::from_str(&text).map_err(|e| json_error(path, &text, &e))?;
        for (i, p) in first.iter().enumerate() {
            env.push_residual(
                &format!("projector_{i}_idempotency"),
                paulikern::operator::is_projector(p.op(), 1e-10).idempotency_residual,
            );
        }
        canonical_first = serde_json::to_string(&first).expect("serializes");
        let second: ProjectorSet =
            serde_json::from_str(&canonical_first).map_err(|e| json_error(path, &text, &e))?;
        canonical_second = serde_json::to_string(&second).expect("serializes");
    } else if probe.get("entries").is_some() {
        kind = "operator";
        let first: Operator =
            serde_json::from_str(&text).map_err(|e| json_error(path, &text, &e))?;
        env.check(
            "symmetry",
            first.symmetry_residual(),
            first.symmetry_tolerance(),
        );
        canonical_first = serde_json::to_string(&first).expect("serializes");
        let second: Operator =
            serde_json::from_str(&canonical_first).map_err(|e| json_error(path, &text, &e))?;
        canonical_second = serde_json::to_string(&second).expect("serializes");
    } else {
        return Err(usage(format!(
            "{}: unrecognized schema (expected an operator, projector set or toy model)",
            path.display()
        )));
    }

    let roundtrip_ok = canonical_first == canonical_second;
    if !roundtrip_ok {
        env.status = Status::Error;
    }
    env.results = json!({"kind": kind, "roundtrip": roundtrip_ok});
    Ok(env)
}

fn run(cli: &Cli) -> Result<ReportEnvelope, UsageError> {
    match &cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Spectrum(args) => cmd_spectrum(args),
        Command::Kernel(args) => cmd_kernel(args),
        Command::Toy(args) => cmd_toy(args),
        Command::Opp(args) => cmd_opp(args),
        Command::Schema(args) => cmd_schema(args),
    }
}

fn summary_line(env: &ReportEnvelope) -> String {
    let status = match env.status {
        Status::Ok => "ok",
        Status::Warning => "warning",
        Status::Error => "error",
    };
    let worst = env
        .residuals
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value));
    match worst {
        Some(r) => format!(
            "{}: {status} ({} residuals, worst {} = {:.3e})",
            env.command,
            env.residuals.len(),
            r.name,
            r.value
        ),
        None => format!("{}: {status}", env.command),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let threads = cli.threads.or_else(|| {
        std::env::var("PAULIKERN_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        // Thread count only affects wall time, never results.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global();
    }

    match run(&cli) {
        Ok(env) => {
            let text = env.to_json_string();
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, &text) {
                    eprintln!("paulikern: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else {
                print!("{text}");
            }
            eprintln!("{}", summary_line(&env));
            match env.status {
                Status::Ok | Status::Warning => ExitCode::SUCCESS,
                Status::Error => ExitCode::from(1),
            }
        }
        Err(e) => {
            eprintln!("paulikern: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_parsing() {
        let g = parse_grid("1e1:1e6:12").unwrap();
        assert_eq!(g.len(), 12);
        assert!((g[0] - 10.0).abs() < 1e-12);
        assert!((g[11] - 1e6).abs() < 1e-6);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a:2:3").is_err());
        assert!(parse_grid("2:1:3").is_err());
    }

    #[test]
    fn fs_parsing() {
        let fs = parse_fs(&["0S".into(), "2S".into()]).unwrap();
        assert_eq!(fs, vec![ForbiddenState::ZeroS, ForbiddenState::TwoS]);
        assert!(parse_fs(&["1P".into()]).is_err());
    }

    #[test]
    fn cli_structure_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
