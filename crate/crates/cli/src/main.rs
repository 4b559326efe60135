use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mzl_core::config::RunConfig;
use mzl_core::contour::phase_trace;
use mzl_core::domains::{
    bezout_step_bound, build_j_contour, build_wp_contour, count_zeros_j, count_zeros_wp, dec,
    j_count_bound, proposition_bound, verify_bounds_report, wp_count_bound, wp_proof_bound,
    JDomainSpec, WpDomainSpec, ZeroCountReport,
};
use mzl_core::pfaffian::{
    build_hypergeometric_chain, build_ratio_chain, chain_residual, khovanskii_zero_bound,
};
use mzl_core::poly::PerturbedComposite;
use mzl_core::special::hyp::{hyp2f1_with, Hyp2F1Options};
use mzl_core::special::modular::{j_inverse, klein_j, klein_j_bounded, KleinJ};
use mzl_core::special::weierstrass::{wp_invariants, Weierstrass};
use mzl_core::{BivariatePolynomial, Error};
use num_complex::Complex64;
use serde::Serialize;

mod selftest;

#[derive(Parser)]
#[command(
    name = "mzl",
    version,
    about = "Zero counts of P(z, j(z)) and P(z, wp(z)) against their bounds"
)]
struct Cli {
    /// key = value configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Machine-readable output
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    J,
    Wp,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    T1,
    T2,
    Prop,
    Bezout,
    Khov,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalKind {
    J,
    Jinv,
    Wp,
    Wpprime,
    #[value(name = "2f1")]
    Hyp2f1,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChainKind {
    Hyp,
    Ratio,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyTarget {
    All,
}

#[derive(clap::Args)]
struct DomainArgs {
    domain: Domain,
    /// Polynomial as JSON {deg_x, deg_y, coeffs: [[[re, im], ...], ...]}
    #[arg(long)]
    poly: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Height of the top line of the j domain
    #[arg(long = "Y", alias = "y")]
    y: Option<f64>,
    /// Notch radius of the wp cell
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Count zeros in the fundamental domain (j) or period cell (wp)
    CountZeros {
        #[command(flatten)]
        args: DomainArgs,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print a zero bound
    Bound {
        kind: BoundKind,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long)]
        alpha: Option<u32>,
        #[arg(long)]
        beta: Option<u32>,
    },
    /// Randomized count-versus-bound suite
    Verify {
        target: VerifyTarget,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate a special function; CSV `input, re, im, error_bound`
    Eval {
        function: EvalKind,
        /// Single real argument (jinv, or the real part of z)
        #[arg(long)]
        x: Option<f64>,
        /// Points, one `re[,im]` per line; stdin if neither --x nor --input
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        #[arg(long, default_value_t = 1.0 / 6.0)]
        a: f64,
        #[arg(long, default_value_t = 5.0 / 6.0)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
    },
    /// Residual of a Pfaffian chain
    VerifyChain {
        #[arg(long, value_enum, default_value = "hyp")]
        chain: ChainKind,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Phase trace of P along the domain contour as CSV
    Trace {
        #[command(flatten)]
        args: DomainArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Identity and invariant checks
    Selftest,
}

/// Failure kinds mapped to exit codes.
enum Failure {
    Usage(String),
    Runtime(String),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidSpec(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Outcome = std::result::Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Runtime(m)) => {
            eprintln!(
                "{}",
                serde_json::json!({ "error": "runtime", "message": m })
            );
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("{}", serde_json::json!({ "error": "usage", "message": m }));
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let cfg = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::CountZeros { args, report } => count_zeros(
            &cfg,
            &args,
            report.as_deref().or(cfg.report.as_deref().map(Path::new)),
            cli.json,
        ),
        Command::Bound {
            kind,
            d,
            r,
            alpha,
            beta,
        } => bound(kind, d, r, alpha, beta),
        Command::Verify {
            target: VerifyTarget::All,
            trials,
            seed,
            report,
        } => verify_all(
            &cfg,
            trials,
            seed,
            report.as_deref().or(cfg.report.as_deref().map(Path::new)),
            cli.json,
        ),
        Command::Eval {
            function,
            x,
            input,
            tau,
            a,
            b,
            c,
        } => eval(&cfg, function, x, input.as_deref(), tau, (a, b, c)),
        Command::VerifyChain { chain, samples } => verify_chain(&cfg, chain, samples),
        Command::Trace { args, out } => trace(
            &cfg,
            &args,
            out.as_deref().or(cfg.trace.as_deref().map(Path::new)),
        ),
        Command::Selftest => {
            let report = selftest::run(&cfg)?;
            if cli.json {
                println!("{}", to_json(&report));
            } else {
                for c in &report.checks {
                    println!(
                        "{:<32} {:<6} {} (tol {})",
                        c.name,
                        if c.pass { "ok" } else { "FAIL" },
                        c.value,
                        c.tolerance
                    );
                }
                println!(
                    "{}",
                    to_json(&serde_json::json!({ "schema": report.schema, "pass": report.pass }))
                );
            }
            verdict(report.pass)
        }
    }
}

fn verdict(pass: bool) -> Outcome {
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn write_report(path: Option<&Path>, body: &str) -> Outcome {
    if let Some(p) = path {
        std::fs::write(p, format!("{body}\n"))?;
    }
    Ok(())
}

fn load_poly(path: &Path) -> std::result::Result<BivariatePolynomial, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn j_spec(args: &DomainArgs) -> JDomainSpec {
    JDomainSpec {
        y: args.y.unwrap_or(JDomainSpec::default().y),
        ..JDomainSpec::default()
    }
}

fn wp_spec(args: &DomainArgs) -> WpDomainSpec {
    let base = WpDomainSpec::new(args.tau);
    WpDomainSpec {
        delta: args.delta.unwrap_or(base.delta),
        ..base
    }
}

fn count_zeros(cfg: &RunConfig, args: &DomainArgs, report: Option<&Path>, json: bool) -> Outcome {
    let p = load_poly(&args.poly)?;
    let opts = cfg.count_options();
    let r: ZeroCountReport = match args.domain {
        Domain::J => count_zeros_j(&p, &j_spec(args), &opts)?,
        Domain::Wp => count_zeros_wp(&p, &wp_spec(args), &opts)?,
    };
    let body = to_json(&r);
    write_report(report, &body)?;
    if json {
        println!("{body}");
    } else {
        println!("domain        {}", r.domain);
        for (k, v) in &r.parameters {
            println!("{k:<13} {v}");
        }
        println!("count         {}", r.count);
        println!(
            "localized     {} in {} clusters",
            r.localized_total,
            r.localized.len()
        );
        for z in &r.localized {
            println!(
                "  {} {}i  x{}{}",
                z.center[0],
                z.center[1],
                z.multiplicity,
                if z.resolved { "" } else { " (cluster)" }
            );
        }
        println!("bound         {} = {}", r.bound_formula, r.bound);
        if let Some(b) = &r.proof_bound {
            println!("proof bound   {b}");
        }
        println!("pass          {}", r.pass);
    }
    verdict(r.pass)
}

fn bound(
    kind: BoundKind,
    d: Option<u64>,
    r: Option<u32>,
    alpha: Option<u32>,
    beta: Option<u32>,
) -> Outcome {
    let need_d = || match d {
        Some(d) if d >= 1 => Ok(d),
        _ => Err(Failure::Usage("--d D with D >= 1 is required".into())),
    };
    let value = match kind {
        BoundKind::T1 => j_count_bound(need_d()?).to_string(),
        BoundKind::T2 => {
            let d = need_d()?;
            println!("{}", wp_count_bound(d));
            eprintln!("proof constant 8d^2+14d+7 = {}", wp_proof_bound(d));
            return Ok(());
        }
        BoundKind::Prop => proposition_bound(need_d()?).to_string(),
        BoundKind::Bezout => bezout_step_bound(need_d()?).to_string(),
        BoundKind::Khov => match (r, alpha, beta) {
            (Some(r), Some(a), Some(b)) => khovanskii_zero_bound(r, a, b).to_string(),
            _ => return Err(Failure::Usage("khov needs --r, --alpha and --beta".into())),
        },
    };
    println!("{value}");
    Ok(())
}

fn verify_all(
    cfg: &RunConfig,
    trials: Option<usize>,
    seed: Option<u64>,
    report: Option<&Path>,
    json: bool,
) -> Outcome {
    let mut suite = cfg.suite();
    if let Some(n) = trials {
        suite.j_trials = n;
        suite.wp_trials = n;
    }
    if let Some(s) = seed {
        suite.seed = s;
    }
    let r = verify_bounds_report(&suite, &cfg.count_options())?;
    let body = to_json(&r);
    write_report(report, &body)?;
    if json {
        println!("{body}");
    } else {
        println!(
            "{:<6} {:>5} {:>6} {:>9}  {}",
            "domain", "trial", "count", "localized", "pass"
        );
        for t in &r.trials {
            let show = |v: Option<i64>| v.map_or("-".to_string(), |v| v.to_string());
            println!(
                "{:<6} {:>5} {:>6} {:>9}  {}{}",
                t.domain,
                t.index,
                show(t.count),
                show(t.localized_total),
                t.pass,
                t.error
                    .as_deref()
                    .map(|e| format!("  {e}"))
                    .unwrap_or_default()
            );
        }
        for l in &r.ledger {
            println!("ledger {}: {}", l.name, l.holds);
        }
        println!("pass {}", r.pass);
    }
    verdict(r.pass)
}

fn parse_point(line: &str) -> std::result::Result<Complex64, Failure> {
    let parts: Vec<&str> = line.split(',').map(str::trim).collect();
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| Failure::Usage(format!("bad point {line:?}")))
    };
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(Failure::Usage(format!("bad point {line:?}"))),
    }
}

fn eval(
    cfg: &RunConfig,
    f: EvalKind,
    x: Option<f64>,
    input: Option<&Path>,
    tau: f64,
    (a, b, c): (f64, f64, f64),
) -> Outcome {
    let points: Vec<Complex64> = match (x, input) {
        (Some(x), _) => vec![Complex64::new(x, 0.0)],
        (None, Some(p)) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            text.lines()
                .filter(|l| !l.trim().is_empty())
                .map(parse_point)
                .collect::<Result<_, _>>()?
        }
        (None, None) => io::stdin()
            .lock()
            .lines()
            .map_while(|l| l.ok())
            .filter(|l| !l.trim().is_empty())
            .map(|l| parse_point(&l))
            .collect::<Result<_, _>>()?,
    };
    let lattice = match f {
        EvalKind::Wp | EvalKind::Wpprime => Some(wp_invariants(tau)?),
        _ => None,
    };
    let hyp_opts = Hyp2F1Options {
        rel_tol: cfg.series_tol,
        ..Hyp2F1Options::default()
    };
    let mut out = io::stdout().lock();
    writeln!(out, "input_re,input_im,re,im,error_bound")?;
    for z in points {
        let (v, err) = match f {
            EvalKind::J => {
                let b = klein_j_bounded(z)?;
                (b.value, b.error_bound)
            }
            EvalKind::Jinv => {
                let t = j_inverse(z.re)?.value;
                let back = klein_j(Complex64::new(0.0, t))?;
                (Complex64::new(t, 0.0), (back.re - z.re).abs() / z.re)
            }
            EvalKind::Wp | EvalKind::Wpprime => {
                let w = lattice.as_ref().expect("lattice built").evaluate(z, None)?;
                if matches!(f, EvalKind::Wp) {
                    (w.value, w.tail_bound)
                } else {
                    (w.derivative, w.derivative_tail_bound)
                }
            }
            EvalKind::Hyp2f1 => {
                let s = hyp2f1_with(a, b, c, z, &hyp_opts)?;
                (s.value, s.tail_bound)
            }
        };
        writeln!(
            out,
            "{},{},{},{},{}",
            dec(z.re),
            dec(z.im),
            dec(v.re),
            dec(v.im),
            dec(err)
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ChainReport {
    schema: &'static str,
    chain: String,
    order: usize,
    alpha: u32,
    stated_alpha: Option<u32>,
    max_residual: String,
    worst_member: usize,
    worst_x: String,
    tolerance: String,
    pass: bool,
}

fn verify_chain(cfg: &RunConfig, kind: ChainKind, samples: usize) -> Outcome {
    let chain = match kind {
        ChainKind::Hyp => build_hypergeometric_chain(1.0 / 6.0, 5.0 / 6.0, 1.0)?,
        ChainKind::Ratio => build_ratio_chain()?,
    };
    let r = chain_residual(&chain, samples)?;
    let pass = r.max_residual < cfg.residual_tol;
    println!(
        "{}",
        to_json(&ChainReport {
            schema: mzl_core::domains::SCHEMA,
            chain: chain.name.clone(),
            order: chain.order(),
            alpha: chain.alpha(),
            stated_alpha: chain.stated_alpha,
            max_residual: dec(r.max_residual),
            worst_member: r.member,
            worst_x: dec(r.x),
            tolerance: dec(cfg.residual_tol),
            pass,
        })
    );
    verdict(pass)
}

fn trace(cfg: &RunConfig, args: &DomainArgs, out: Option<&Path>) -> Outcome {
    let p = load_poly(&args.poly)?;
    let opts = cfg.count_options().winding;
    let t = match args.domain {
        Domain::J => {
            let contour = build_j_contour(&j_spec(args))?;
            phase_trace(
                &PerturbedComposite::unperturbed(p, KleinJ),
                &contour,
                &opts,
                true,
            )?
        }
        Domain::Wp => {
            let contour = build_wp_contour(&wp_spec(args))?;
            let wp = Weierstrass::new(args.tau)?;
            phase_trace(
                &PerturbedComposite::unperturbed(p, wp),
                &contour,
                &opts,
                true,
            )?
        }
    };
    let mut csv = String::from("t,re_z,im_z,re_f,im_f,arg_f\n");
    for q in &t.points {
        csv.push_str(&format!(
            "{},{},{},{},{},{}\n",
            dec(q.s),
            dec(q.z.re),
            dec(q.z.im),
            dec(q.value.re),
            dec(q.value.im),
            dec(q.arg)
        ));
    }
    match out {
        Some(path) => std::fs::write(path, csv)?,
        None => io::stdout().lock().write_all(csv.as_bytes())?,
    }
    Ok(())
}
