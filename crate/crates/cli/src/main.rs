use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use bures_core::bures::report_residual;
use bures_core::io::{form_json, parse_algebra, parse_element, parse_form, parse_vector, BlocksJson};
use bures_core::properties::{run_suite, SuiteReport};
use bures_core::sweep::{sweep, SweepRow};
use bures_core::{
    bures_distance, commutation_report, minimal_pair, optimal_vector, relative_fibre_survey, relfaser_check,
    skew_information, Algebra, BuresReport, CommutationReport, Error, MembershipReport, NuMode, PsiMode, StandardForm,
    SurveySummary, TolerancePolicy,
};

#[derive(Parser)]
#[command(
    name = "bures",
    version,
    about = "Bures distance, fidelity and minimal pairs for matrix-algebra forms"
)]
struct Cli {
    /// Relative cutoff for numerical rank decisions.
    #[arg(long, global = true, allow_hyphen_values = true, default_value_t = 1e-10)]
    tol_rank: f64,
    /// Absolute floor below which eigenvalues count as zero.
    #[arg(long, global = true, allow_hyphen_values = true, default_value_t = 1e-14)]
    tol_abs: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Defaults to csv for `sweep` and json otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum AMode {
    Projection,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum PsiChoice {
    Uniform,
    RandomPhase,
}

#[derive(Subcommand)]
enum Command {
    /// Fidelity, distance, minimal pair, commutation and skew information.
    Report {
        #[command(flatten)]
        inputs: Inputs,
    },
    /// Truncated family with vanishing orthogonal part.
    Sweep {
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 60)]
        n_max: usize,
        #[arg(long, value_enum, default_value_t = AMode::Projection)]
        a_mode: AMode,
        #[arg(long, value_enum, default_value_t = PsiChoice::Uniform)]
        psi: PsiChoice,
    },
    /// Run a randomized property suite.
    Properties {
        suite: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5")]
        dims: Vec<usize>,
    },
    /// Relative fibre membership, for one isometry or a sampled survey.
    Membership {
        #[command(flatten)]
        inputs: Inputs,
        /// Element file with the isometry `u`; without it the fibre of ν is sampled.
        #[arg(long)]
        u: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        samples: usize,
    },
}

#[derive(clap::Args)]
struct Inputs {
    #[arg(long)]
    algebra: PathBuf,
    #[arg(long)]
    nu: PathBuf,
    #[arg(long)]
    rho: PathBuf,
    /// Reference vector; the trace vector is used when absent.
    #[arg(long)]
    omega: Option<PathBuf>,
}

struct Loaded {
    alg: Algebra,
    std: StandardForm,
    nu: bures_core::PositiveForm,
    rho: bures_core::PositiveForm,
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load(inputs: &Inputs, tol: TolerancePolicy) -> Result<Loaded, Error> {
    let alg = parse_algebra(&read(&inputs.algebra)?, tol)?;
    let nu = parse_form(&read(&inputs.nu)?, &alg)?;
    let rho = parse_form(&read(&inputs.rho)?, &alg)?;
    let std = match &inputs.omega {
        Some(p) => StandardForm::new(parse_vector(&read(p)?, &alg)?)?,
        None => StandardForm::tracial(&alg),
    };
    Ok(Loaded { alg, std, nu, rho })
}

#[derive(Serialize)]
struct MinimalPairJson {
    nu_perp: BlocksJson,
    rho_perp: BlocksJson,
    nu_min: BlocksJson,
    rho_min: BlocksJson,
}

#[derive(Serialize)]
struct Report {
    block_dims: Vec<usize>,
    bures: BuresReport,
    minimal_pair: MinimalPairJson,
    commutation: CommutationReport,
    skew_information: f64,
}

fn inconsistent(what: &str, residual: f64) -> Error {
    Error::InternalInconsistency(format!("{what} residual {residual:.3e}"))
}

fn report(l: &Loaded) -> Result<Report, Error> {
    let bures = bures_distance(&l.nu, &l.rho)?;
    let r = report_residual(&bures);
    if r > 1e-10 {
        return Err(inconsistent("distance reconstruction", r));
    }
    let mp = minimal_pair(&l.nu, &l.rho)?;
    let dm = bures_distance(&mp.nu_min, &mp.rho_min)?.distance;
    let dp = bures_distance(&mp.nu_perp, &mp.rho_perp)?.distance;
    let r = (bures.distance.powi(2) - dm * dm - dp * dp).abs();
    if r > 1e-8 {
        return Err(inconsistent("minimal pair splitting", r));
    }
    let psi = optimal_vector(&l.std, &l.nu, &l.rho)?;
    let r = (psi.dist(&l.std.cone_rep(&l.nu)?)? - bures.distance).abs();
    if r > 1e-8 {
        return Err(inconsistent("attainment", r));
    }
    let commutation = commutation_report(&l.std, &l.nu, &l.rho)?;
    if commutation.commutes != commutation_report(&l.std, &l.rho, &l.nu)?.commutes {
        return Err(Error::InternalInconsistency(
            "commutation verdict is not symmetric".into(),
        ));
    }
    Ok(Report {
        block_dims: l.alg.dims().to_vec(),
        bures,
        minimal_pair: MinimalPairJson {
            nu_perp: form_json(&mp.nu_perp),
            rho_perp: form_json(&mp.rho_perp),
            nu_min: form_json(&mp.nu_min),
            rho_min: form_json(&mp.rho_min),
        },
        commutation,
        skew_information: skew_information(&l.std, &l.nu, &l.rho)?,
    })
}

fn report_csv(r: &Report) -> String {
    let mut s = String::from("quantity,value\n");
    let rows: [(&str, f64); 10] = [
        ("fidelity", r.bures.fidelity),
        ("distance", r.bures.distance),
        ("nu_norm", r.bures.nu_norm),
        ("rho_norm", r.bures.rho_norm),
        ("commutes", f64::from(u8::from(r.commutation.commutes))),
        ("vector_gap", r.commutation.vector_gap),
        ("commutator", r.commutation.commutator),
        ("distance_gap", r.commutation.distance_gap),
        ("skew_information", r.skew_information),
        ("rho_perp_norm", trace_of(&r.minimal_pair.rho_perp)),
    ];
    for (k, v) in rows {
        writeln!(s, "{k},{}", num(v)).unwrap();
    }
    s
}

/// Shortest round-trip form, with an exponent for very small or large values.
fn num(v: f64) -> String {
    serde_json::to_string(&v).expect("f64 serializes")
}

fn trace_of(b: &BlocksJson) -> f64 {
    b.blocks
        .iter()
        .map(|m| (0..m.dim).map(|i| m.re[i][i]).sum::<f64>())
        .sum()
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("n,beta,gamma,gamma_oracle,fidelity,distance\n");
    for r in rows {
        let vals = [r.beta, r.gamma, r.gamma_oracle, r.fidelity, r.distance].map(num);
        writeln!(s, "{},{}", r.n, vals.join(",")).unwrap();
    }
    s
}

fn suite_csv(r: &SuiteReport) -> String {
    let mut s = String::from("name,worst_residual,tolerance,worst_seed,passed\n");
    for p in &r.properties {
        let seed = p.worst_seed.map(|x| x.to_string()).unwrap_or_default();
        writeln!(
            s,
            "{},{},{},{},{}",
            p.name,
            num(p.worst_residual),
            num(p.tolerance),
            seed,
            p.passed
        )
        .unwrap();
    }
    s
}

#[derive(Serialize)]
#[serde(untagged)]
enum Membership {
    Single(MembershipReport),
    Survey(SurveySummary),
}

fn membership_csv(m: &Membership) -> String {
    match m {
        Membership::Single(r) => format!(
            "in_relative_fibre,direct_distance,global_distance,extension_built\n{},{},{},{}\n",
            r.in_relative_fibre,
            num(r.direct_distance),
            num(r.global_distance),
            r.extension_built
        ),
        Membership::Survey(s) => format!(
            "samples,fraction_in,max_excess,max_alignment_gap,disagreements\n{},{},{},{},{}\n",
            s.samples,
            num(s.fraction_in),
            num(s.max_excess),
            num(s.max_alignment_gap),
            s.disagreements
        ),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report types serialize");
    s.push('\n');
    s
}

/// Output text and whether the run counts as a success.
fn run(cli: &Cli) -> Result<(String, bool), Error> {
    let tol = TolerancePolicy::new(cli.tol_rank, cli.tol_abs)?;
    let json = |f: Option<Format>| f.unwrap_or(Format::Json) == Format::Json;
    match &cli.command {
        Command::Report { inputs } => {
            let r = report(&load(inputs, tol)?)?;
            Ok((if json(cli.format) { to_json(&r) } else { report_csv(&r) }, true))
        }
        Command::Sweep {
            beta,
            n_max,
            a_mode,
            psi,
        } => {
            let nu_mode = match a_mode {
                AMode::Projection => NuMode::Projection,
                AMode::Random => NuMode::Random,
            };
            let psi_mode = match psi {
                PsiChoice::Uniform => PsiMode::Uniform,
                PsiChoice::RandomPhase => PsiMode::RandomPhase,
            };
            let rows = sweep(*beta, *n_max, nu_mode, psi_mode, cli.seed, tol)?;
            if let Some(r) = rows.iter().find(|r| !bures_core::sweep::row_matches_oracle(r)) {
                return Err(Error::InternalInconsistency(format!(
                    "row n = {}: gamma {} against oracle {}",
                    r.n, r.gamma, r.gamma_oracle
                )));
            }
            let text = if cli.format.unwrap_or(Format::Csv) == Format::Csv {
                sweep_csv(&rows)
            } else {
                to_json(&rows)
            };
            Ok((text, true))
        }
        Command::Properties { suite, trials, dims } => {
            let r = run_suite(suite, *trials, dims, cli.seed, tol)?;
            Ok((if json(cli.format) { to_json(&r) } else { suite_csv(&r) }, r.passed))
        }
        Command::Membership { inputs, u, samples } => {
            let l = load(inputs, tol)?;
            let m = match u {
                Some(p) => Membership::Single(relfaser_check(
                    &l.std,
                    &l.nu,
                    &l.rho,
                    &parse_element(&read(p)?, &l.alg)?,
                )?),
                None => Membership::Survey(relative_fibre_survey(&l.std, &l.nu, &l.rho, *samples, cli.seed)?),
            };
            Ok((
                if json(cli.format) {
                    to_json(&m)
                } else {
                    membership_csv(&m)
                },
                true,
            ))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::UnknownSuite(_) => 2,
        e if e.is_domain() => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((text, ok)) => {
            let written = match &cli.out {
                Some(p) => fs::write(p, &text).map_err(|e| format!("{}: {e}", p.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: property suite failed");
                ExitCode::from(4)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
