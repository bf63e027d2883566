//! Command-line front end: every audit and evaluator behind reproducible
//! seeds and machine-readable output.
//!
//! Exit codes: 0 success, 1 mathematical invariant violated, 2 validation
//! error, 3 statistically inconclusive audit.

mod config;
mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use martinet::chains::{
    chain_audit, char_chain, classify, monotonicity_audits, nonchar_chain, normalize, CaseLabel,
    ChainConfig, ChainSpec, MonotonicityGrid,
};
use martinet::error::Error as LibError;
use martinet::geometry::{
    ahlfors_audit, ahlfors_surrogate, ball_volume_mc, box_contains, box_volume, mu_ball_mc,
    mu_box_section, AhlforsGrid, AuditStatus, BoxSpec, BoxVariant,
};
use martinet::metric::{delta, delta_plane, BesovParams, FrameParams, SpacePoint, SurfacePoint};
use martinet::oracle::{cc_bracket, equivalence_audit, OracleConfig};
use martinet::trace::{builtin_fields, trace_ratio_detailed, BesovConfig, QuadConfig, TraceConfig};

use config::ConfigMap;
use output::{emit, write_text};

#[derive(Parser)]
#[command(
    name = "martinet",
    version,
    about = "Quasi-metric geometry, path chains, and trace-functional audits"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<String>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Flat key=value file merged under the flags (flags win).
    #[arg(long, global = true)]
    config: Option<String>,
    /// Worker thread cap (0 = all cores). Env fallback: MARTINET_THREADS.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Quasi-distance breakdown and control-distance bracket for a pair.
    Distance(DistanceArgs),
    /// Monte Carlo volume of a quasi-distance ball plus exact box volumes.
    Ball(BallArgs),
    /// Weighted boundary measure of a ball section plus exact box sections.
    Mu(MuArgs),
    /// Two-sided regularity audit of the boundary measure.
    Ahlfors(AhlforsArgs),
    /// Box-union versus max-form membership identity audit.
    BallboxAudit(BallboxArgs),
    /// Explicit horizontal chain for a boundary pair.
    Chain(ChainArgs),
    /// Both sides of the trace inequality on a builtin field.
    Trace(TraceArgs),
    /// Every audit at reduced size, aggregated.
    AuditAll(AuditAllArgs),
}

#[derive(Args)]
struct DistanceArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Start point "x,y,z".
    #[arg(long)]
    from: Option<String>,
    /// Target point "x,y,z".
    #[arg(long)]
    to: Option<String>,
    #[arg(long)]
    segments: Option<usize>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct BallArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Center "x,y,z".
    #[arg(long)]
    center: Option<String>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct MuArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Boundary center "x,y".
    #[arg(long)]
    center: Option<String>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct AhlforsArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Volume samples per grid point.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct BallboxArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Random membership triples.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ChainArgs {
    #[arg(long)]
    alpha: Option<f64>,
    /// Start "x,y".
    #[arg(long)]
    from: Option<String>,
    /// Target "x,y".
    #[arg(long)]
    to: Option<String>,
    /// Case gate: auto, char, or nonchar.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    eps0: Option<f64>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Builtin field: gauss, poly_bump, delta_radial.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta_min_rel: Option<f64>,
    /// Write per-shell contributions to this CSV path.
    #[arg(long)]
    dump_strata: Option<String>,
}

#[derive(Args)]
struct AuditAllArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Scale factor for the sample budgets.
    #[arg(long)]
    scale: Option<f64>,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let cfg = match cli
        .common
        .config
        .as_deref()
        .map(ConfigMap::load)
        .transpose()
    {
        Ok(map) => map.unwrap_or_default(),
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let threads = cli
        .common
        .threads
        .or_else(|| cfg.get_usize("threads"))
        .or_else(|| {
            std::env::var("MARTINET_THREADS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(0);
    setup_threads(threads);
    let format = cli
        .common
        .format
        .unwrap_or_else(|| match cfg.get_str("format").as_deref() {
            Some("csv") => Format::Csv,
            _ => Format::Json,
        });
    let out = cli.common.output.clone().or_else(|| cfg.get_str("output"));

    let result = match cli.command {
        Command::Distance(a) => cmd_distance(a, &cfg, format, out.as_deref(), threads),
        Command::Ball(a) => cmd_ball(a, &cfg, format, out.as_deref(), threads),
        Command::Mu(a) => cmd_mu(a, &cfg, format, out.as_deref(), threads),
        Command::Ahlfors(a) => cmd_ahlfors(a, &cfg, format, out.as_deref(), threads),
        Command::BallboxAudit(a) => cmd_ballbox(a, &cfg, format, out.as_deref(), threads),
        Command::Chain(a) => cmd_chain(a, &cfg, format, out.as_deref(), threads),
        Command::Trace(a) => cmd_trace(a, &cfg, format, out.as_deref(), threads),
        Command::AuditAll(a) => cmd_audit_all(a, &cfg, format, out.as_deref(), threads),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn exit_code_for(e: &LibError) -> i32 {
    match e {
        LibError::InvalidParameter { .. }
        | LibError::Precondition(_)
        | LibError::UnknownField(_) => 2,
        LibError::Inconclusive(_) => 3,
        LibError::Bracketing(_) | LibError::InvariantViolation(_) => 1,
    }
}

fn setup_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    {
        if threads == 1 {
            martinet::exec::set_parallel(false);
        } else if threads > 1 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

fn parse_coord(part: &str) -> Result<f64, LibError> {
    let value: f64 = part
        .trim()
        .parse()
        .map_err(|_| LibError::Precondition(format!("bad coordinate `{part}`")))?;
    if !value.is_finite() {
        return Err(LibError::Precondition(format!(
            "coordinate `{part}` is not finite"
        )));
    }
    Ok(value)
}

fn parse_point3(s: &str) -> Result<SpacePoint, LibError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(LibError::Precondition(format!(
            "expected x,y,z triple, got `{s}`"
        )));
    }
    Ok(SpacePoint::new(
        parse_coord(parts[0])?,
        parse_coord(parts[1])?,
        parse_coord(parts[2])?,
    ))
}

fn parse_point2(s: &str) -> Result<SurfacePoint, LibError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(LibError::Precondition(format!(
            "expected x,y pair, got `{s}`"
        )));
    }
    Ok(SurfacePoint::new(
        parse_coord(parts[0])?,
        parse_coord(parts[1])?,
    ))
}

fn require<T>(value: Option<T>, name: &str) -> Result<T, LibError> {
    value.ok_or_else(|| LibError::Precondition(format!("missing required option --{name}")))
}

/// Full resolved configuration, echoed in every report.
#[derive(Serialize)]
struct Resolved {
    alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps0: Option<f64>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    segments: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    starts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    threads: usize,
    format: &'static str,
}

impl Resolved {
    fn new(alpha: f64, seed: u64, threads: usize, format: Format) -> Self {
        Self {
            alpha,
            p: None,
            eps0: None,
            seed,
            samples: None,
            segments: None,
            starts: None,
            tol: None,
            threads,
            format: match format {
                Format::Json => "json",
                Format::Csv => "csv",
            },
        }
    }
}

fn cmd_distance(
    a: DistanceArgs,
    cfg: &ConfigMap,
    format: Format,
    out: Option<&str>,
    threads: usize,
) -> Result<i32, LibError> {
    let alpha = require(a.alpha.or_else(|| cfg.get_f64("alpha")), "alpha")?;
    let from = parse_point3(&require(a.from.or_else(|| cfg.get_str("from")), "from")?)?;
    let to = parse_point3(&require(a.to.or_else(|| cfg.get_str("to")), "to")?)?;
    let fp = FrameParams::new(alpha)?;
    let oracle_cfg = OracleConfig {
        segments: a
            .segments
            .or_else(|| cfg.get_usize("segments"))
            .unwrap_or(8),
        starts: a.starts.or_else(|| cfg.get_usize("starts")).unwrap_or(16),
        seed: a.seed.or_else(|| cfg.get_u64("seed")).unwrap_or(0),
        tol: a.tol.or_else(|| cfg.get_f64("tol")).unwrap_or(1e-9),
    };
    let breakdown = delta(from, to, fp);
    let bracket = cc_bracket(from, to, fp, &oracle_cfg)?;

    #[derive(Serialize)]
    struct Report {
        config: Resolved,
        from: SpacePoint,
        to: SpacePoint,
        delta: martinet::metric::DeltaBreakdown,
        lower: f64,
        upper: f64,
        endpoint_error: f64,
        certified: bool,
        witness_segments: usize,
    }
    let mut resolved = Resolved::new(alpha, oracle_cfg.seed, threads, format);
    resolved.segments = Some(oracle_cfg.segments);
    resolved.starts = Some(oracle_cfg.starts);
    resolved.tol = Some(oracle_cfg.tol);
    match format {
        Format::Json => {
            let report = Report {
                config: resolved,
                from,
                to,
                delta: breakdown,
                lower: bracket.lower,
                upper: bracket.upper,
                endpoint_error: bracket.endpoint_error,
                certified: bracket.certified,
                witness_segments: bracket.witness.segments.len(),
            };
            emit(&report, out)?;
        }
        Format::Csv => {
            let mut text = String::from("t,x,y,z\n");
            for (t, p) in bracket.witness.sample_rows(fp, 8) {
                text.push_str(&format!("{t},{},{},{}\n", p.x, p.y, p.z));
            }
            write_text(&text, out)?;
        }
    }
    Ok(if bracket.certified { 0 } else { 1 })
}

fn cmd_ball(
    a: BallArgs,
    cfg: &ConfigMap,
    format: Format,
    out: Option<&str>,
    threads: usize,
) -> Result<i32, LibError> {
    let alpha = require(a.alpha.or_else(|| cfg.get_f64("alpha")), "alpha")?;
    let center = parse_point3(&require(
        a.center.or_else(|| cfg.get_str("center")),
        "center",
    )?)?;
    let r = require(a.r.or_else(|| cfg.get_f64("r")), "r")?;
    let samples = a
        .samples
        .or_else(|| cfg.get_u64("samples"))
        .unwrap_or(200_000);
    let seed = a.seed.or_else(|| cfg.get_u64("seed")).unwrap_or(0);
    let fp = FrameParams::new(alpha)?;
    let ball = ball_volume_mc(center, r, fp, samples, seed)?;
    let box1 = if center.x != 0.0 {
        Some(box_volume(&BoxSpec::new(BoxVariant::One, center, r)?, fp))
    } else {
        None
    };
    let box2 = box_volume(&BoxSpec::new(BoxVariant::Two, center, r)?, fp);

    #[derive(Serialize)]
    struct Report {
        config: Resolved,
        center: SpacePoint,
        r: f64,
        ball: martinet::geometry::MeasureEstimate,
        #[serde(skip_serializing_if = "Option::is_none")]
        box1_volume: Option<f64>,
        box2_volume: f64,
    }
    let mut resolved = Resolved::new(alpha, seed, threads, format);
    resolved.samples = Some(samples);
    emit(
        &Report {
            config: resolved,
            center,
            r,
            ball,
            box1_volume: box1,
            box2_volume: box2,
        },
        out,
    )?;
    Ok(0)
}

fn cmd_mu(
    a: MuArgs,
    cfg: &ConfigMap,
    format: Format,
    out: Option<&str>,
    threads: usize,
) -> Result<i32, LibError> {
    let alpha = require(a.alpha.or_else(|| cfg.get_f64("alpha")), "alpha")?;
    let center = parse_point2(&require(
        a.center.or_else(|| cfg.get_str("center")),
        "center",
    )?)?;
    let r = require(a.r.or_else(|| cfg.get_f64("r")), "r")?;
    let samples = a
        .samples
        .or_else(|| cfg.get_u64("samples"))
        .unwrap_or(200_000);
    let seed = a.seed.or_else(|| cfg.get_u64("seed")).unwrap_or(0);
    let fp = FrameParams::new(alpha)?;
    let mu = mu_ball_mc(center, r, fp, samples, seed)?;
    let section1 = if center.x != 0.0 {
        Some(mu_box_section(
            &BoxSpec::new(BoxVariant::One, center.embed(), r)?,
            fp,
        )?)
    } else {
        None
    };
    let section2 = mu_box_section(&BoxSpec::new(BoxVariant::Two, center.embed(), r)?, fp)?;
    let surrogate = ahlfors_surrogate(center, r, fp);

    #[derive(Serialize)]
    struct Report {
        config: Resolved,
        center: SurfacePoint,
        r: f64,
        mu: martinet::geometry::MeasureEstimate,
        #[serde(skip_serializing_if = "Option::is_none")]
        box1_section: Option<f64>,
        box2_section: f64,
        surrogate: f64,
    }
    let mut resolved = Resolved::new(alpha, seed, threads, format);
    resolved.samples = Some(samples);
    emit(
        &Report {
            config: resolved,
            center,
            r,
            mu,
            box1_section: section1,
            box2_section: section2,
            surrogate,
        },
        out,
    )?;
    Ok(0)
}

fn cmd_ahlfors(
    a: AhlforsArgs,
    cfg: &ConfigMap,
    format: Format,
    out: Option<&str>,
    threads: usize,
) -> Result<i32, LibError> {
    let alpha = require(a.alpha.or_else(|| cfg.get_f64("alpha")), "alpha")?;
    let samples = a
        .samples
        .or_else(|| cfg.get_u64("samples"))
        .unwrap_or(200_000);
    let seed = a.seed.or_else(|| cfg.get_u64("seed")).unwrap_or(0);
    let fp = FrameParams::new(alpha)?;
    let report = ahlfors_audit(fp, &AhlforsGrid::default(), samples, samples / 2, seed)?;

    #[derive(Serialize)]
    struct Report {
        config: Resolved,
        #[serde(flatten)]
        audit: martinet::geometry::AhlforsReport,
    }
    let mut resolved = Resolved::new(alpha, seed, threads, format);
    resolved.samples = Some(samples);
    let status = report.status;
    match format {
        Format::Json => emit(
            &Report {
                config: resolved,
                audit: report,
            },
            out,
        )?,
        Format::Csv => {
            let mut text =
                String::from("alpha,r,x,mu_mc,mu_ci,vol_mc,vol_ci,surrogate,ratio_vol,ratio_sur\n");
            for row in &report.rows {
                text.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    row.alpha,
                    row.r,
                    row.x,
                    row.mu_mc,
                    row.mu_ci,
                    row.vol_mc,
                    row.vol_ci,
                    row.surrogate,
                    row.ratio_vol,
                    row.ratio_sur
                ));
            }
            write_text(&text, out)?;
        }
    }
    Ok(match status {
        AuditStatus::Pass => 0,
        AuditStatus::Inconclusive => 3,
        AuditStatus::Fail => 1,
    })
}

fn cmd_ballbox(
    a: BallboxArgs,
    cfg: &ConfigMap,
    format: Format,
    out: Option<&str>,
    threads: usize,
) -> Result<i32, LibError> {
    let alpha = require(a.alpha.or_else(|| cfg.get_f64("alpha")), "alpha")?;
    let samples = a
        .samples
        .or_else(|| cfg.get_u64("samples"))
        .unwrap_or(10_000);
    let seed = a.seed.or_else(|| cfg.get_u64("seed")).unwrap_or(0);
    let fp = FrameParams::new(alpha)?;
    use rand::Rng;
    let mut rng = martinet::exec::stream_rng(seed, 0);
    let mut union_mismatches = 0u64;
    let mut inclusion_violations = 0u64;
    for _ in 0..samples {
        let p = SpacePoint::new(
            6.0 * rng.gen::<f64>() - 3.0,
            6.0 * rng.gen::<f64>() - 3.0,
            6.0 * rng.gen::<f64>() - 3.0,
        );
        let q = SpacePoint::new(
            p.x + 4.0 * (rng.gen::<f64>() - 0.5),
            p.y + 4.0 * (rng.gen::<f64>() - 0.5),
            p.z + 4.0 * (rng.gen::<f64>() - 0.5),
        );
        let r = 0.02 + 2.5 * rng.gen::<f64>();
        let b2 = BoxSpec::new(BoxVariant::Two, p, r)?;
        let in_union = if p.x == 0.0 {
            box_contains(q, &b2, fp)
        } else {
            box_contains(q, &BoxSpec::new(BoxVariant::One, p, r)?, fp) || box_contains(q, &b2, fp)
        };
        let d = delta(p, q, fp);
        if in_union != (d.max_form() < r) {
            union_mismatches += 1;
        }
        // Each box of radius r sits inside the sum-form ball of radius 3r.
        if in_union && d.total >= 3.0 * r {
            inclusion_violations += 1;
        }
    }

    #[derive(Serialize)]
    struct Report {
        config: Resolved,
        triples: u64,
        union_mismatches: u64,
        inclusion_violations: u64,
    }
    let mut resolved = Resolved::new(alpha, seed, threads, format);
    resolved.samples = Some(samples);
    emit(
        &Report {
            config: resolved,
            triples: samples,
            union_mismatches,
            inclusion_violations,
        },
        out,
    )?;
    Ok(if union_mismatches + inclusion_violations > 0 {
        1
    } else {
        0
    })
}

fn cmd_chain(
    a: ChainArgs,
    cfg: &ConfigMap,
    format: Format,
    out: Option<&str>,
    threads: usize,
) -> Result<i32, LibError> {
    let alpha = require(a.alpha.or_else(|| cfg.get_f64("alpha")), "alpha")?;
    let from = parse_point2(&require(a.from.or_else(|| cfg.get_str("from")), "from")?)?;
    let to = parse_point2(&require(a.to.or_else(|| cfg.get_str("to")), "to")?)?;
    let eps0 = a.eps0.or_else(|| cfg.get_f64("eps0")).unwrap_or(0.1);
    let case = a
        .case
        .or_else(|| cfg.get_str("case"))
        .unwrap_or_else(|| "auto".into());
    let fp = FrameParams::new(alpha)?;
    let chain_cfg = ChainConfig::new(eps0, 1e-12)?;

    let (label, chains) = match case.as_str() {
        "char" => {
            let chain = char_chain(from, to, fp)?;
            (CaseLabel::Characteristic, vec![chain])
        }
        "nonchar" => {
            let chain = nonchar_chain(from, to, fp, &chain_cfg)?;
            (CaseLabel::Noncharacteristic, vec![chain])
        }
        "auto" => {
            let label = classify(from, to, fp, &chain_cfg);
            let audit = chain_audit(from, to, fp, &chain_cfg)?;
            (label, audit.chains)
        }
        other => {
            return Err(LibError::Precondition(format!(
                "unknown case `{other}` (expected auto, char, or nonchar)"
            )))
        }
    };
    let endpoint_err = chains
        .iter()
        .map(|c| c.max_replay_error(fp))
        .fold(0.0f64, f64::max);
    let max_z_violation = chains
        .iter()
        .map(|c| (-c.min_z_dense(fp, 32)).max(0.0))
        .fold(0.0f64, f64::max);
    let length: f64 = chains.iter().map(|c| c.cc_length()).sum();
    let d = delta_plane(from, to, fp);

    #[derive(Serialize)]
    struct Report {
        config: Resolved,
        from: SurfacePoint,
        to: SurfacePoint,
        case: CaseLabel,
        normalization_pairs: usize,
        chains: Vec<ChainSpec>,
        endpoint_err: f64,
        max_z_violation: f64,
        length: f64,
        length_over_delta: f64,
    }
    let mut resolved = Resolved::new(alpha, 0, threads, format);
    resolved.eps0 = Some(eps0);
    match format {
        Format::Json => {
            let normalization_pairs = if case == "auto" {
                normalize(from, to, fp, &chain_cfg)?.pairs.len()
            } else {
                chains.len()
            };
            emit(
                &Report {
                    config: resolved,
                    from,
                    to,
                    case: label,
                    normalization_pairs,
                    chains,
                    endpoint_err,
                    max_z_violation,
                    length,
                    length_over_delta: if d > 0.0 { length / d } else { 0.0 },
                },
                out,
            )?;
        }
        Format::Csv => {
            let mut text = String::from("chain,t,x,y,z\n");
            for (ci, chain) in chains.iter().enumerate() {
                let mut t = 0.0;
                let mut cur = chain.points[0];
                text.push_str(&format!("{ci},{t},{},{},{}\n", cur.x, cur.y, cur.z));
                for seg in &chain.segments {
                    let cs = seg.control_segment();
                    for k in 1..=8 {
                        let dt = seg.duration * k as f64 / 8.0;
                        let part = martinet::flows::ControlSegment::new(cs.e1(), cs.e2(), dt);
                        let p = martinet::flows::flow(cur, &part, fp);
                        text.push_str(&format!("{ci},{},{},{},{}\n", t + dt, p.x, p.y, p.z));
                    }
                    cur = martinet::flows::flow(cur, &cs, fp);
                    t += seg.duration;
                }
            }
            write_text(&text, out)?;
        }
    }
    Ok(if endpoint_err > 1e-9 { 1 } else { 0 })
}

fn cmd_trace(
    a: TraceArgs,
    cfg: &ConfigMap,
    format: Format,
    out: Option<&str>,
    threads: usize,
) -> Result<i32, LibError> {
    let alpha = require(a.alpha.or_else(|| cfg.get_f64("alpha")), "alpha")?;
    let p = require(a.p.or_else(|| cfg.get_f64("p")), "p")?;
    let function = a
        .function
        .or_else(|| cfg.get_str("function"))
        .unwrap_or_else(|| "gauss".into());
    let samples = a
        .samples
        .or_else(|| cfg.get_u64("samples"))
        .unwrap_or(200_000);
    let seed = a.seed.or_else(|| cfg.get_u64("seed")).unwrap_or(0);
    let delta_min_rel = a
        .delta_min_rel
        .or_else(|| cfg.get_f64("delta_min_rel"))
        .unwrap_or(1e-3);
    let fp = FrameParams::new(alpha)?;
    let bp = BesovParams::new(p)?;
    let field = builtin_fields(&function, fp)?;
    let trace_cfg = TraceConfig {
        quad: QuadConfig::default(),
        mc: BesovConfig {
            samples,
            seed,
            delta_min_rel,
            ..Default::default()
        },
    };
    let (report, lhs) = trace_ratio_detailed(field.as_ref(), fp, bp, &trace_cfg)?;
    if let Some(path) = a.dump_strata.or_else(|| cfg.get_str("dump_strata")) {
        let mut text = String::from("rho_lo,rho_hi,mean,std_error\n");
        for row in &lhs.strata {
            text.push_str(&format!(
                "{},{},{},{}\n",
                row.rho_lo, row.rho_hi, row.mean, row.std_error
            ));
        }
        write_text(&text, Some(&path))?;
    }

    #[derive(Serialize)]
    struct Report {
        config: Resolved,
        function: String,
        #[serde(flatten)]
        trace: martinet::trace::TraceReport,
    }
    let mut resolved = Resolved::new(alpha, seed, threads, format);
    resolved.p = Some(p);
    resolved.samples = Some(samples);
    let stable = report.cutoff_stable;
    emit(
        &Report {
            config: resolved,
            function,
            trace: report,
        },
        out,
    )?;
    Ok(if stable { 0 } else { 3 })
}

fn cmd_audit_all(
    a: AuditAllArgs,
    cfg: &ConfigMap,
    format: Format,
    out: Option<&str>,
    threads: usize,
) -> Result<i32, LibError> {
    let alpha = require(a.alpha.or_else(|| cfg.get_f64("alpha")), "alpha")?;
    let seed = a.seed.or_else(|| cfg.get_u64("seed")).unwrap_or(0);
    let scale = a.scale.or_else(|| cfg.get_f64("scale")).unwrap_or(1.0);
    let fp = FrameParams::new(alpha)?;
    let n = |base: f64| -> u64 { (base * scale).max(16.0) as u64 };

    // Symmetry spot check.
    use rand::Rng;
    let mut rng = martinet::exec::stream_rng(seed, 100);
    let mut symmetry_worst = 0.0f64;
    for _ in 0..n(10_000.0) {
        let p = SpacePoint::new(
            8.0 * rng.gen::<f64>() - 4.0,
            8.0 * rng.gen::<f64>() - 4.0,
            8.0 * rng.gen::<f64>() - 4.0,
        );
        let q = SpacePoint::new(
            p.x + (0.5 + 4.0 * rng.gen::<f64>()) * if rng.gen::<bool>() { 1.0 } else { -1.0 },
            p.y + (0.5 + 4.0 * rng.gen::<f64>()) * if rng.gen::<bool>() { 1.0 } else { -1.0 },
            p.z + (0.5 + 4.0 * rng.gen::<f64>()) * if rng.gen::<bool>() { 1.0 } else { -1.0 },
        );
        let d0 = delta(p, q, fp).total;
        let refl = martinet::metric::SymmetrySpec {
            reflect_x: true,
            ..Default::default()
        };
        let d1 = delta(
            martinet::metric::symmetry_transforms(p, refl),
            martinet::metric::symmetry_transforms(q, refl),
            fp,
        )
        .total;
        symmetry_worst = symmetry_worst.max((d1 - d0).abs() / d0);
    }

    // Ball-box identity.
    let ballbox = cmd_ballbox_inner(fp, n(10_000.0), seed)?;

    // Bracket ratios on a few pairs.
    let oracle_cfg = OracleConfig {
        segments: 8,
        starts: 8,
        seed,
        tol: 1e-9,
    };
    let equivalence = equivalence_audit(fp, n(12.0) as usize, seed, &oracle_cfg)?;

    // Regularity.
    let ahlfors = ahlfors_audit(fp, &AhlforsGrid::default(), n(100_000.0), n(50_000.0), seed)?;

    // Chains.
    let chain_cfg = ChainConfig::default();
    let mut chain_worst_endpoint = 0.0f64;
    let mut chain_worst_ratio = 0.0f64;
    let mut rng = martinet::exec::stream_rng(seed, 200);
    for _ in 0..n(500.0) {
        let u = SurfacePoint::new(4.0 * rng.gen::<f64>() - 2.0, 4.0 * rng.gen::<f64>() - 2.0);
        let v = SurfacePoint::new(4.0 * rng.gen::<f64>() - 2.0, 4.0 * rng.gen::<f64>() - 2.0);
        if u == v {
            continue;
        }
        let audit = chain_audit(u, v, fp, &chain_cfg)?;
        chain_worst_endpoint = chain_worst_endpoint.max(audit.endpoint_err);
        chain_worst_ratio = chain_worst_ratio.max(audit.length_over_delta);
    }

    // Monotonicity.
    let monotonicity = monotonicity_audits(fp, &MonotonicityGrid::default())?;

    // Trace on the default field.
    let bp = BesovParams::new(2.0)?;
    let field = builtin_fields("gauss", fp)?;
    let trace_cfg = TraceConfig {
        quad: QuadConfig::default(),
        mc: BesovConfig {
            samples: n(200_000.0),
            seed,
            ..Default::default()
        },
    };
    let (trace, _) = trace_ratio_detailed(field.as_ref(), fp, bp, &trace_cfg)?;

    #[derive(Serialize)]
    struct Report {
        config: Resolved,
        symmetry_worst_rel: f64,
        ballbox_union_mismatches: u64,
        ballbox_inclusion_violations: u64,
        equivalence: martinet::oracle::EquivalenceReport,
        ahlfors_status: AuditStatus,
        chain_worst_endpoint: f64,
        chain_worst_length_ratio: f64,
        monotonicity_decreasing: bool,
        trace_ratio: f64,
        trace_cutoff_stable: bool,
    }
    let resolved = Resolved::new(alpha, seed, threads, format);
    let report = Report {
        config: resolved,
        symmetry_worst_rel: symmetry_worst,
        ballbox_union_mismatches: ballbox.0,
        ballbox_inclusion_violations: ballbox.1,
        equivalence: equivalence.clone(),
        ahlfors_status: ahlfors.status,
        chain_worst_endpoint,
        chain_worst_length_ratio: chain_worst_ratio,
        monotonicity_decreasing: monotonicity.tau_slope_decreasing
            && monotonicity.reparam_decreasing,
        trace_ratio: trace.ratio,
        trace_cutoff_stable: trace.cutoff_stable,
    };
    emit(&report, out)?;

    let violation = symmetry_worst > 1e-12
        || ballbox.0 + ballbox.1 > 0
        || !equivalence.ok
        || ahlfors.status == AuditStatus::Fail
        || chain_worst_endpoint > 1e-9
        || chain_worst_ratio > martinet::chains::chain_length_band(alpha)
        || !report.monotonicity_decreasing;
    let inconclusive = ahlfors.status == AuditStatus::Inconclusive || !trace.cutoff_stable;
    Ok(if violation {
        1
    } else if inconclusive {
        3
    } else {
        0
    })
}

fn cmd_ballbox_inner(fp: FrameParams, samples: u64, seed: u64) -> Result<(u64, u64), LibError> {
    use rand::Rng;
    let mut rng = martinet::exec::stream_rng(seed, 300);
    let mut union_mismatches = 0u64;
    let mut inclusion_violations = 0u64;
    for _ in 0..samples {
        let p = SpacePoint::new(
            6.0 * rng.gen::<f64>() - 3.0,
            6.0 * rng.gen::<f64>() - 3.0,
            6.0 * rng.gen::<f64>() - 3.0,
        );
        let q = SpacePoint::new(
            p.x + 4.0 * (rng.gen::<f64>() - 0.5),
            p.y + 4.0 * (rng.gen::<f64>() - 0.5),
            p.z + 4.0 * (rng.gen::<f64>() - 0.5),
        );
        let r = 0.02 + 2.5 * rng.gen::<f64>();
        let b2 = BoxSpec::new(BoxVariant::Two, p, r)?;
        let in_union = if p.x == 0.0 {
            box_contains(q, &b2, fp)
        } else {
            box_contains(q, &BoxSpec::new(BoxVariant::One, p, r)?, fp) || box_contains(q, &b2, fp)
        };
        let d = delta(p, q, fp);
        if in_union != (d.max_form() < r) {
            union_mismatches += 1;
        }
        if in_union && d.total >= 3.0 * r {
            inclusion_violations += 1;
        }
    }
    Ok((union_mismatches, inclusion_violations))
}
