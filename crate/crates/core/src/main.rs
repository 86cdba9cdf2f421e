//! Command-line front end: regenerates the benchmark sweeps as CSV, evaluates
//! bounds on state files, exports witness operators with measurement
//! schedules, and runs the randomized self-verification suites.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use concurrence_bounds::bounds::{
    sum_sq_algebraic_bound, two_copy_bound_valpha_sum, two_copy_bound_vi,
};
use concurrence_bounds::error::Error;
use concurrence_bounds::models::{
    evolve, isotropic_exact_concurrence, isotropic_state, isotropic_valpha_sum_closed_form,
    isotropic_vi_closed_form, max_entangled_state, phi_me, qutrit_initial_state, LindbladModel,
};
use concurrence_bounds::multipartite::multipartite_sum_sq_bound;
use concurrence_bounds::oracle::{
    seeded_corpus, verify_inequality_21, verify_sum_sq_theorem, SearchConfig,
};
use concurrence_bounds::qstate::{read_state_file, write_operator, StateFile};
use concurrence_bounds::twocopy::enumerate_chi;
use concurrence_bounds::witness::{
    build_all_witnesses_alpha, build_witness_sigma, build_witness_sigma_alpha, combined_counts,
    local_decomposition, witness_bound, witness_sq_sum_bound, WitnessOperator,
};
use concurrence_bounds::{
    algebraic_lower_bound, BoundReport, ChiIndex, DensityOperator, HilbertSpace, VWeights,
};

#[derive(Parser)]
#[command(
    name = "concurrence-bounds",
    version,
    about = "Concurrence lower bounds for mixed quantum states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep isotropic states: exact concurrence vs the two closed-form
    /// two-copy bounds.
    Isotropic(IsotropicArgs),
    /// Evolve a two-qutrit pure state under local spontaneous decay and
    /// track the witness bounds.
    QutritDecay(QutritDecayArgs),
    /// Evaluate a bound on a state file.
    Bounds(BoundsArgs),
    /// Export witness operators and their local measurement schedules.
    WitnessExport(WitnessExportArgs),
    /// Run the randomized verification suites.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct IsotropicArgs {
    /// Local dimension (2 to 4).
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0.0)]
    f_min: f64,
    #[arg(long, default_value_t = 1.0)]
    f_max: f64,
    #[arg(long, default_value_t = 200)]
    steps: usize,
    #[arg(long)]
    out: PathBuf,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long, default_value_t = false)]
    emit_plot: bool,
}

#[derive(Args)]
struct QutritDecayArgs {
    /// Schmidt coefficients of the initial state, comma separated.
    #[arg(long, value_delimiter = ',')]
    lambdas: Vec<f64>,
    /// Decay rate.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Final time in 1/gamma units.
    #[arg(long, default_value_t = 3.0)]
    t_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Which single-sided two-copy operator the witnesses derive from.
    #[arg(long, default_value_t = 2)]
    which: u8,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = false)]
    emit_plot: bool,
}

#[derive(Args)]
struct BoundsArgs {
    /// Input state file (qdm/qsv format).
    #[arg(long)]
    state: PathBuf,
    /// alb | sumsq | two-copy | two-copy-alpha | witness | multi
    #[arg(long)]
    method: String,
    /// Reference state for the witness method.
    #[arg(long)]
    sigma: Option<PathBuf>,
    /// Two-copy weights c1,c2 (c1 + c2 = 1).
    #[arg(long, value_delimiter = ',')]
    weights: Option<Vec<f64>>,
    /// Optional CSV with the per-term breakdown.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessExportArgs {
    /// Reference state file.
    #[arg(long)]
    sigma: PathBuf,
    /// "all" or one index as x,y,p,q.
    #[arg(long, default_value = "all")]
    alpha: String,
    /// 1 or 2.
    #[arg(long, default_value_t = 2)]
    which: u8,
    /// Output prefix; files are {prefix}{name}.qop and {prefix}schedule.csv.
    #[arg(long)]
    out_prefix: String,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Reduced sample counts (default).
    #[arg(long, conflicts_with = "full", default_value_t = false)]
    quick: bool,
    /// Full sample counts.
    #[arg(long, default_value_t = false)]
    full: bool,
}

const USAGE_EXIT: u8 = 2;
const FAILURE_EXIT: u8 = 1;

fn main() -> ExitCode {
    configure_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Isotropic(args) => cmd_isotropic(&args),
        Command::QutritDecay(args) => cmd_qutrit_decay(&args),
        Command::Bounds(args) => cmd_bounds(&args),
        Command::WitnessExport(args) => cmd_witness_export(&args),
        Command::Selftest(args) => cmd_selftest(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(FAILURE_EXIT)
        }
    }
}

/// CONCURRENCE_BOUNDS_THREADS caps the worker pool; 0 or unset means auto.
fn configure_threads() {
    if let Ok(v) = std::env::var("CONCURRENCE_BOUNDS_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("usage error: {msg}");
    ExitCode::from(USAGE_EXIT)
}

/// 13 significant digits, plenty for round-tripping the plotted curves.
fn fnum(x: f64) -> String {
    format!("{x:.12e}")
}

fn write_text(path: &Path, content: &str) -> Result<(), Error> {
    std::fs::write(path, content).map_err(Error::from)
}

fn cmd_isotropic(args: &IsotropicArgs) -> Result<ExitCode, Error> {
    if !(2..=4).contains(&args.d) {
        return Ok(usage_error("--d must be between 2 and 4"));
    }
    if !(0.0..=1.0).contains(&args.f_min)
        || !(0.0..=1.0).contains(&args.f_max)
        || args.f_min > args.f_max
        || args.steps < 2
    {
        return Ok(usage_error(
            "need 0 <= f-min <= f-max <= 1 and at least two steps",
        ));
    }
    let mut csv = String::from("F,C_exact,bound_Vi,bound_Valpha_sum\n");
    for k in 0..args.steps {
        let f = args.f_min
            + (args.f_max - args.f_min) * k as f64 / (args.steps - 1) as f64;
        let exact = isotropic_exact_concurrence(args.d, f);
        let vi = isotropic_vi_closed_form(args.d, f).max(0.0).sqrt();
        let va = isotropic_valpha_sum_closed_form(args.d, f).max(0.0).sqrt();
        let _ = writeln!(csv, "{},{},{},{}", fnum(f), fnum(exact), fnum(vi), fnum(va));
    }
    write_text(&args.out, &csv)?;
    if args.emit_plot {
        emit_plot_script(
            &args.out,
            &format!("isotropic states, d = {}", args.d),
            "F",
            &["C_exact", "bound_Vi", "bound_Valpha_sum"],
        )?;
    }
    println!("wrote {} rows to {}", args.steps, args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_qutrit_decay(args: &QutritDecayArgs) -> Result<ExitCode, Error> {
    let [l0, l1, l2] = args.lambdas[..] else {
        return Ok(usage_error("--lambdas needs exactly three values"));
    };
    if args.which != 1 && args.which != 2 {
        return Ok(usage_error("--which must be 1 or 2"));
    }
    let sigma_pure = qutrit_initial_state((l0, l1, l2))?;
    let sigma = sigma_pure.to_density();
    let weights = VWeights::which(args.which)?;

    // The aggregate witness needs C(sigma) > 0 and the per-chi witnesses
    // need a positive algebraic bound; a product initial state has neither
    // and its bound columns are identically zero.
    let aggregate = match build_witness_sigma(&sigma_pure, args.which) {
        Ok(w) => Some(w),
        Err(Error::UnusableWitness(_)) => None,
        Err(e) => return Err(e),
    };
    let per_chi: Vec<WitnessOperator> = match build_all_witnesses_alpha(&sigma, weights) {
        Ok(ws) => ws,
        Err(Error::UnusableWitness(_)) => Vec::new(),
        Err(e) => return Err(e),
    };

    let model = LindbladModel::new(args.gamma)?;
    let trajectory = evolve(&model, &sigma, args.t_max, args.dt)?;

    let mut header = String::from("t,bound_Wsigma,bound_Wsq");
    for w in &per_chi {
        let _ = write!(header, ",raw_{}", w.name());
    }
    let mut csv = header + "\n";
    for (t, rho) in &trajectory {
        let ws = match &aggregate {
            Some(w) => witness_bound(rho, w)?.value,
            None => 0.0,
        };
        let wsq = if per_chi.is_empty() {
            0.0
        } else {
            witness_sq_sum_bound(rho, &per_chi)?.value
        };
        let mut row = format!("{},{},{}", fnum(args.gamma * t), fnum(ws), fnum(wsq));
        for w in &per_chi {
            let _ = write!(row, ",{}", fnum(w.expectation(rho)?));
        }
        csv.push_str(&row);
        csv.push('\n');
    }
    write_text(&args.out, &csv)?;
    if args.emit_plot {
        emit_plot_script(
            &args.out,
            "two-qutrit spontaneous decay",
            "Gamma*t",
            &["bound_Wsigma", "bound_Wsq"],
        )?;
    }
    println!(
        "wrote {} rows to {} ({} per-chi witnesses)",
        trajectory.len(),
        args.out.display(),
        per_chi.len()
    );
    Ok(ExitCode::SUCCESS)
}

fn load_density(path: &Path) -> Result<DensityOperator, Error> {
    match read_state_file(path)? {
        StateFile::Density(rho) => Ok(rho),
        StateFile::Pure(psi) => Ok(psi.to_density()),
        StateFile::Operator { .. } => Err(Error::Format(format!(
            "{} holds a plain operator, not a state",
            path.display()
        ))),
    }
}

fn parse_weights(weights: &Option<Vec<f64>>, default: VWeights) -> Result<VWeights, Error> {
    match weights.as_deref() {
        Some([c1, c2]) => VWeights::mix(*c1, *c2),
        Some(_) => Err(Error::InvalidArgument(
            "--weights expects exactly two values c1,c2".into(),
        )),
        None => Ok(default),
    }
}

fn cmd_bounds(args: &BoundsArgs) -> Result<ExitCode, Error> {
    let rho = load_density(&args.state)?;
    let report: BoundReport = match args.method.as_str() {
        "alb" => {
            // Per-chi algebraic bounds; the reported value is the best one.
            let mut best: Option<BoundReport> = None;
            let mut terms = Vec::new();
            for chi in enumerate_chi(rho.space())? {
                let r = algebraic_lower_bound(&rho, &chi)?;
                terms.extend(r.per_alpha.iter().cloned());
                if best.as_ref().map_or(true, |b| r.value > b.value) {
                    best = Some(r);
                }
            }
            let mut best = best.ok_or_else(|| {
                Error::InvalidArgument("state has no chi vectors (a local dim is 1)".into())
            })?;
            best.per_alpha = terms;
            best
        }
        "sumsq" => sum_sq_algebraic_bound(&rho)?,
        "two-copy" => {
            let which = match args.weights.as_deref() {
                None => 2,
                Some([c1, c2]) if *c1 == 1.0 && *c2 == 0.0 => 1,
                Some([c1, c2]) if *c1 == 0.0 && *c2 == 1.0 => 2,
                Some(_) => {
                    return Ok(usage_error(
                        "method two-copy takes weights 1,0 or 0,1; use two-copy-alpha for mixes",
                    ))
                }
            };
            two_copy_bound_vi(&rho, which)?
        }
        "two-copy-alpha" => {
            let weights = parse_weights(&args.weights, VWeights::v2())?;
            two_copy_bound_valpha_sum(&rho, weights)?
        }
        "witness" => {
            let Some(sigma_path) = &args.sigma else {
                return Ok(usage_error("method witness requires --sigma"));
            };
            let weights = parse_weights(&args.weights, VWeights::v2())?;
            let sigma = load_density(sigma_path)?;
            let witnesses = build_all_witnesses_alpha(&sigma, weights)?;
            witness_sq_sum_bound(&rho, &witnesses)?
        }
        "multi" => multipartite_sum_sq_bound(&rho)?,
        other => return Ok(usage_error(&format!("unknown method '{other}'"))),
    };

    println!("method: {}", report.kind.label());
    println!("value: {}", fnum(report.value));
    println!("raw_value: {}", fnum(report.raw_value));
    println!("terms: {}", report.per_alpha.len());
    if let Some(out) = &args.out {
        let mut csv = String::from("bipartition_mask,x,y,p,q,raw_value\n");
        for t in &report.per_alpha {
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                t.mask,
                t.index.x,
                t.index.y,
                t.index.p,
                t.index.q,
                fnum(t.raw)
            );
        }
        write_text(out, &csv)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_witness_export(args: &WitnessExportArgs) -> Result<ExitCode, Error> {
    if args.which != 1 && args.which != 2 {
        return Ok(usage_error("--which must be 1 or 2"));
    }
    let sigma = load_density(&args.sigma)?;
    let weights = VWeights::which(args.which)?;
    let witnesses: Vec<WitnessOperator> = if args.alpha == "all" {
        build_all_witnesses_alpha(&sigma, weights)?
    } else {
        let parts: Vec<usize> = args
            .alpha
            .split(',')
            .map(|s| s.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|_| Error::InvalidArgument("--alpha expects x,y,p,q or 'all'".into()))?;
        let [x, y, p, q] = parts[..] else {
            return Ok(usage_error("--alpha expects four indices or 'all'"));
        };
        let index = ChiIndex::new(x, y, p, q)?.checked_for(sigma.space())?;
        vec![build_witness_sigma_alpha(&sigma, index, weights)?]
    };

    let mut schedule_csv =
        String::from("witness,term_id,coefficient,obs_a,obs_b,setting_group\n");
    let mut schedules = Vec::new();
    for w in &witnesses {
        let path = PathBuf::from(format!("{}{}.qop", args.out_prefix, w.name()));
        write_operator(w.space(), w.matrix(), &path)?;
        let schedule = local_decomposition(w)?;
        for t in &schedule.terms {
            let _ = writeln!(
                schedule_csv,
                "{},{},{},{},{},{}",
                w.name(),
                t.term_id,
                fnum(t.coefficient),
                t.obs_a.label(),
                t.obs_b.label(),
                t.setting_group
            );
        }
        schedules.push(schedule);
    }
    let schedule_path = PathBuf::from(format!("{}schedule.csv", args.out_prefix));
    write_text(&schedule_path, &schedule_csv)?;
    let (n_obs, n_settings) = combined_counts(&schedules);
    println!(
        "exported {} witnesses; {} distinct observables in {} settings",
        witnesses.len(),
        n_obs,
        n_settings
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_selftest(args: &SelftestArgs) -> Result<ExitCode, Error> {
    let full = args.full;
    let mut failures: Vec<String> = Vec::new();
    let mut transcript = String::new();
    let mut note = |line: String| {
        println!("{line}");
        transcript.push_str(&line);
        transcript.push('\n');
    };

    // Two-copy pointwise inequality plus its amplitude-level proof chain.
    let spaces = [
        HilbertSpace::bipartite(2, 2)?,
        HilbertSpace::bipartite(2, 3)?,
        HilbertSpace::bipartite(3, 3)?,
    ];
    let n_samples = if full { 10_000 } else { 1_000 };
    let ineq = verify_inequality_21(n_samples, &spaces, args.seed)?;
    note(ineq.summary());
    if !ineq.passed() {
        failures.push(ineq.name.to_string());
    }

    // Squared-sum theorem against the randomized decomposition search.
    let corpus_spaces = [HilbertSpace::bipartite(2, 2)?, HilbertSpace::bipartite(3, 3)?];
    let per_space = if full { 100 } else { 20 };
    let corpus = seeded_corpus(&corpus_spaces, per_space, args.seed);
    let theorem = verify_sum_sq_theorem(&corpus, &SearchConfig::quick(args.seed))?;
    note(theorem.summary());
    if !theorem.passed() {
        failures.push(theorem.name.to_string());
    }

    // Closed forms vs matrix traces on the isotropic grid.
    let mut worst = f64::INFINITY;
    for d in 2..=4usize {
        for k in 0..=20 {
            let f = k as f64 / 20.0;
            let rho = isotropic_state(d, f)?;
            let vi = two_copy_bound_vi(&rho, 2)?.raw_value;
            let va = two_copy_bound_valpha_sum(&rho, VWeights::v2())?;
            let closed_va = isotropic_valpha_sum_closed_form(d, f);
            worst = worst.min(1e-10 - (vi - isotropic_vi_closed_form(d, f)).abs());
            // The selective sum keeps only the nonnegative terms, so the
            // closed form is only reproduced where it is nonnegative.
            if closed_va >= 0.0 {
                worst = worst.min(1e-10 - (va.raw_value - closed_va).abs());
            }
        }
    }
    note(format!(
        "isotropic-closed-forms: 63 grid points, worst margin {worst:.6e}"
    ));
    if worst < 0.0 {
        failures.push("isotropic-closed-forms".to_string());
    }

    // Witness exactness on isotropic states.
    let mut worst = f64::INFINITY;
    for d in 2..=4usize {
        let w = build_witness_sigma(&max_entangled_state(d)?, 1)?;
        for k in 0..=20 {
            let f = k as f64 / 20.0;
            let rho = isotropic_state(d, f)?;
            let bound = witness_bound(&rho, &w)?.value;
            worst = worst.min(1e-10 - (bound - isotropic_exact_concurrence(d, f)).abs());
        }
    }
    note(format!(
        "isotropic-witness-exactness: 63 grid points, worst margin {worst:.6e}"
    ));
    if worst < 0.0 {
        failures.push("isotropic-witness-exactness".to_string());
    }

    // Measurement bookkeeping for the symmetric qutrit reference state.
    let sigma = phi_me().to_density();
    let ws = build_all_witnesses_alpha(&sigma, VWeights::v2())?;
    let schedules: Vec<_> = ws
        .iter()
        .map(|w| local_decomposition(w))
        .collect::<Result<_, _>>()?;
    let (n_obs, n_settings) = combined_counts(&schedules);
    note(format!(
        "witness-bookkeeping: {} witnesses, {n_obs} observables, {n_settings} settings",
        ws.len()
    ));
    if ws.len() != 3 || n_obs != 12 || n_settings != 7 {
        failures.push("witness-bookkeeping".to_string());
    }

    if failures.is_empty() {
        note("selftest: all checks passed".to_string());
        Ok(ExitCode::SUCCESS)
    } else {
        note(format!("selftest: FAILED ({})", failures.join(", ")));
        Ok(ExitCode::from(FAILURE_EXIT))
    }
}

/// A minimal gnuplot script that plots every named column against the first.
fn emit_plot_script(
    csv_path: &Path,
    title: &str,
    x_label: &str,
    columns: &[&str],
) -> Result<(), Error> {
    let mut script = String::new();
    let _ = writeln!(script, "set datafile separator ','");
    let _ = writeln!(script, "set key autotitle columnhead");
    let _ = writeln!(script, "set title '{title}'");
    let _ = writeln!(script, "set xlabel '{x_label}'");
    let file = csv_path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let plots: Vec<String> = columns
        .iter()
        .enumerate()
        .map(|(i, _)| format!("'{file}' using 1:{} with lines", i + 2))
        .collect();
    let _ = writeln!(script, "plot {}", plots.join(", \\\n     "));
    let _ = writeln!(script, "pause -1");
    let script_path = csv_path.with_extension("gp");
    write_text(&script_path, &script)
}
