use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use serde::{Deserialize, Serialize};
use seqcert_core::analytic::{delta_threshold_with, ChainCriterion};
use seqcert_core::certify::{
    build_guessing_program, build_shannon_program, guessing_bound_with, max_confidence_sdp, shannon_tradeoff_with,
    BoundKind, EntropyBound, Program, ProgramOptions, Target,
};
use seqcert_core::quantum::{
    build_preparations, honest_stats, max_confidence, post_measurement_ensemble, Ensemble, ObservedStats,
    ScenarioParams,
};
use seqcert_core::sdp::dump::to_text;
use seqcert_core::sdp::{verify_certificate, DualCertificate, SdpProblem, Sense, SolveStatus};

use crate::config::Kind;
use crate::{Failure, Outcome};

#[derive(Args)]
pub struct ConfidenceArgs {
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    r: f64,
}

pub fn confidence(args: &ConfidenceArgs) -> Outcome {
    let params = ScenarioParams::new(args.delta, args.r)?;
    let closed = max_confidence(&params)?;
    let sdp = max_confidence_sdp(&build_preparations(&params)?)?;
    println!("closed_form = {closed:.9}");
    println!("sdp = {sdp:.9}");
    println!("difference = {:.3e}", (closed - sdp).abs());
    Ok(())
}

#[derive(Args)]
pub struct BoundArgs {
    #[arg(long, value_parser = parse_target)]
    target: Target,
    #[arg(long, default_value = "min-entropy")]
    kind: Kind,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    r: f64,
    /// Bob's inconclusive rate; statistics default to the honest chain's
    #[arg(long)]
    q: Option<f64>,
    /// Bob's confidence (Charlie's for charlie-trusted)
    #[arg(long)]
    conf: Option<f64>,
    /// Bob's inconclusive rate (Charlie's for charlie-trusted)
    #[arg(long)]
    inc: Option<f64>,
    #[arg(long)]
    conf_c: Option<f64>,
    #[arg(long)]
    inc_c: Option<f64>,
    /// Gauss–Radau node count for Shannon bounds
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    x_star: usize,
    /// Enter statistics as equalities
    #[arg(long)]
    equality: bool,
    /// Write the problem and its certificate to this file
    #[arg(long)]
    certificate: Option<PathBuf>,
    /// Write a text dump of the problem to this file
    #[arg(long)]
    dump: Option<PathBuf>,
    /// Print the full bound as JSON
    #[arg(long)]
    json: bool,
}

pub fn parse_target(s: &str) -> Result<Target, String> {
    s.parse().map_err(|e: seqcert_core::Error| e.to_string())
}

/// A stored certificate together with the program it certifies.
#[derive(Serialize, Deserialize)]
pub struct CertificateFile {
    pub target: Target,
    pub kind: BoundKind,
    pub problem: SdpProblem,
    pub certificate: DualCertificate,
}

fn resolve_stats(args: &BoundArgs, params: &ScenarioParams) -> Result<ObservedStats, Failure> {
    let base = args.q.map(|q| honest_stats(params, q)).transpose()?;
    let trusted = args.target == Target::CharlieTrusted;
    let pick = |flag: Option<f64>, honest: Option<f64>, name: &str| {
        flag.or(honest).ok_or_else(|| Failure::Usage(anyhow!("--{name} or --q is required")))
    };
    let (conf, inc) = if trusted {
        (pick(args.conf, base.map(|s| s.conf_c), "conf")?, pick(args.inc, base.map(|s| s.inc_c), "inc")?)
    } else {
        (pick(args.conf, base.map(|s| s.conf_b), "conf")?, pick(args.inc, base.map(|s| s.inc_b), "inc")?)
    };
    let stats = match args.target {
        Target::Bob => ObservedStats::bob_only(conf, inc),
        Target::CharlieTrusted => ObservedStats { conf_b: 0.5, inc_b: 1.0, conf_c: conf, inc_c: inc },
        Target::Charlie | Target::Joint => ObservedStats {
            conf_b: conf,
            inc_b: inc,
            conf_c: pick(args.conf_c, base.map(|s| s.conf_c), "conf-c")?,
            inc_c: pick(args.inc_c, base.map(|s| s.inc_c), "inc-c")?,
        },
    };
    stats.validate()?;
    Ok(stats)
}

pub fn ensemble_for(target: Target, params: &ScenarioParams, q: Option<f64>) -> Result<Ensemble, Failure> {
    match target {
        Target::CharlieTrusted => {
            let q = q.ok_or_else(|| Failure::Usage(anyhow!("charlie-trusted needs --q for the post-measurement states")))?;
            Ok(post_measurement_ensemble(params, q)?)
        }
        _ => Ok(build_preparations(params)?),
    }
}

pub fn compute(
    target: Target,
    kind: Kind,
    ensemble: &Ensemble,
    stats: &ObservedStats,
    m: usize,
    x_star: usize,
    opts: &ProgramOptions,
) -> Result<EntropyBound, Failure> {
    Ok(match kind {
        Kind::MinEntropy => guessing_bound_with(target, ensemble, stats, x_star, opts)?,
        Kind::Shannon => shannon_tradeoff_with(target, ensemble, m, stats, x_star, opts)?,
    })
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::NumericalTrouble => "numerical-trouble",
    }
}

pub fn bound(args: &BoundArgs) -> Outcome {
    let params = ScenarioParams::new(args.delta, args.r)?;
    let stats = resolve_stats(args, &params)?;
    let ensemble = ensemble_for(args.target, &params, args.q)?;
    let opts = ProgramOptions { confidence_equality: args.equality, ..Default::default() };
    if args.certificate.is_some() || args.dump.is_some() {
        let program = match args.kind {
            Kind::MinEntropy => build_guessing_program(args.target, &ensemble, &stats, args.x_star, &opts)?,
            Kind::Shannon => build_shannon_program(args.target, &ensemble, args.m, &stats, args.x_star, &opts)?,
        };
        if let Some(path) = &args.dump {
            std::fs::write(path, to_text(&program.problem))?;
        }
        if let Some(path) = &args.certificate {
            let b = compute(args.target, args.kind, &ensemble, &stats, args.m, args.x_star, &opts)?;
            write_certificate(path, &program, &b)?;
            return report(args, &b);
        }
    }
    let b = compute(args.target, args.kind, &ensemble, &stats, args.m, args.x_star, &opts)?;
    report(args, &b)
}

fn write_certificate(path: &PathBuf, program: &Program, b: &EntropyBound) -> Outcome {
    let file = CertificateFile {
        target: b.target,
        kind: b.kind,
        problem: program.problem.clone(),
        certificate: b.certificate.clone(),
    };
    std::fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

fn report(args: &BoundArgs, b: &EntropyBound) -> Outcome {
    if args.json {
        println!("{}", serde_json::to_string_pretty(b)?);
        return Ok(());
    }
    let name = if b.kind == BoundKind::MinEntropy { "hmin" } else { "h" };
    println!("target = {}", b.target.name());
    println!("{name} = {:.9}", b.value_bits);
    if let Some(p) = b.guessing_prob {
        println!("guessing_prob = {p:.9}");
    }
    if let Some(c) = b.tradeoff_coeffs {
        println!(
            "tradeoff = c_m {:.9} g_b {:.9} h_b {:.9} g_c {:.9} h_c {:.9} trace_r {:.9}",
            c.c_m, c.g_b, c.h_b, c.g_c, c.h_c, c.trace_r
        );
    }
    println!("gap = {:.3e}", b.gap);
    println!("certified_gap = {:.3e}", b.certified_gap);
    println!("margin = {:.3e}", b.certificate.slack_margin);
    println!("status = {}", status_name(b.status));
    Ok(())
}

#[derive(Args)]
pub struct ChainArgs {
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    /// Use the recursive rate condition instead of the pass-through one
    #[arg(long)]
    recursive: bool,
    /// Write the CSV here instead of standard output
    #[arg(long)]
    output: Option<PathBuf>,
}

pub fn chain(args: &ChainArgs) -> Outcome {
    if !(2..=12).contains(&args.n_max) {
        return Err(Failure::Usage(anyhow!("--n-max must lie in [2, 12]")));
    }
    let criterion = if args.recursive { ChainCriterion::Recursive } else { ChainCriterion::PassThrough };
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(["n", "delta_max"]).map_err(|e| Failure::Usage(e.into()))?;
    for n in 2..=args.n_max {
        let d = delta_threshold_with(n, criterion)?;
        out.write_record([n.to_string(), format!("{d:.8}")]).map_err(|e| Failure::Usage(e.into()))?;
    }
    let bytes = out.into_inner().map_err(|e| Failure::Usage(anyhow!("{e}")))?;
    match &args.output {
        Some(path) => std::fs::write(path, bytes)?,
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(())
}

#[derive(Args)]
pub struct CheckArgs {
    /// Certificate file written by `bound --certificate`
    #[arg(long)]
    certificate: PathBuf,
}

pub fn certify_check(args: &CheckArgs) -> Outcome {
    let text = std::fs::read_to_string(&args.certificate)?;
    let mut file: CertificateFile = serde_json::from_str(&text)?;
    // The stored multipliers must stand on their own, without repair.
    file.problem.repairs.clear();
    let checked = verify_certificate(&file.problem, &DualCertificate::candidate(file.certificate.multipliers.clone()))?;
    if !checked.valid {
        return Err(Failure::Certificate(anyhow!("dual slack violation {:.3e}", checked.slack_margin)));
    }
    let claimed = file.certificate.certified_value;
    let implied = match file.problem.sense {
        Sense::Maximize => checked.certified_value <= claimed,
        Sense::Minimize => checked.certified_value >= claimed,
    };
    if !implied {
        return Err(Failure::Certificate(anyhow!(
            "stored value {claimed:.12} is tighter than the verified {:.12}",
            checked.certified_value
        )));
    }
    println!("target = {}", file.target.name());
    println!("certified_value = {:.12}", checked.certified_value);
    println!("margin = {:.3e}", checked.slack_margin);
    println!("valid = true");
    Ok(())
}
