use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use ncc_cq::channel::{example1_channel, example2_channel, example2_noisy, is_3to1, CqChannel, InputDistribution, SplitInputDistribution};
use ncc_cq::classical::{
    capacity_report, simulate, ClassicalDecoder, ClassicalIcInstance, InstanceParams, InterferenceCoding,
};
use ncc_cq::field::PrimeField;
use ncc_cq::linalg::DensityOperator;
use ncc_cq::povm::{ptp_ensemble_error, verify_pinching, PtpEnsembleConfig};
use ncc_cq::region::{
    example_separation_witness, interference_free_tau, theorem1_region, theorem3_region, RegionSpec, SeparationExample,
};
use ncc_cq::spec_file::{parse_channel_spec, DistributionTable};
use ncc_cq::typicality::{Typicality, TypicalityKind};
use ncc_cq::Error;

#[derive(Parser, Debug)]
#[command(name = "ncc-cq", version, about = "Nested coset codes for classical-quantum interference channels")]
struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Upper bound on enumeration sizes.
    #[arg(long, global = true, default_value_t = 1 << 24)]
    budget: u128,
    /// Trace-distance tolerance of the one-interfered-receiver check.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Constraint table and corner points of an achievable region.
    Region(RegionArgs),
    /// Separation example between structured and unstructured coding.
    Separation(SeparationArgs),
    /// Exact decoder error or pinching traces over a blocklength sweep.
    PovmSweep(SweepArgs),
    /// Monte Carlo run on the binary additive interference channel.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum TheoremChoice {
    #[value(name = "1")]
    #[serde(rename = "1")]
    One,
    #[value(name = "3")]
    #[serde(rename = "3")]
    Three,
    Usb,
}

#[derive(Args, Debug, Serialize)]
struct RegionArgs {
    /// Channel-spec file.
    #[arg(long, conflicts_with_all = ["example1", "example2"])]
    spec: Option<PathBuf>,
    #[arg(long, conflicts_with = "example2")]
    example1: bool,
    #[arg(long)]
    example2: bool,
    #[arg(long)]
    delta1: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// User-1 input bias for the examples; defaults to the interference-free value.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum, default_value_t = TheoremChoice::One)]
    theorem: TheoremChoice,
    /// Force W to be trivial in the split region.
    #[arg(long)]
    no_w: bool,
}

#[derive(Args, Debug, Serialize)]
struct SeparationArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    example: u8,
    #[arg(long)]
    delta1: f64,
    #[arg(long)]
    delta: f64,
    /// Defaults to the interference-free bias.
    #[arg(long)]
    tau: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SweepMode {
    Ptp,
    Pinching,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SweepStates {
    Orthogonal,
    Example2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Flavor {
    Entropy,
    Strong,
}

#[derive(Args, Debug, Serialize)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = SweepMode::Ptp)]
    mode: SweepMode,
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 4, 6])]
    n: Vec<usize>,
    /// Typicality parameter of the projectors.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = Flavor::Entropy)]
    flavor: Flavor,
    /// Code pmf over F_2 (ptp mode); entries may be fractions like 2/3.
    #[arg(long, value_delimiter = ',', value_parser = parse_prob, default_values_t = vec![2.0 / 3.0, 1.0 / 3.0])]
    p_v: Vec<f64>,
    /// Inner dimensions per blocklength (default n/2).
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    /// Message dimensions per blocklength (default n/2 - 1).
    #[arg(long, value_delimiter = ',')]
    l: Option<Vec<usize>>,
    /// Random codes averaged per point (ptp mode).
    #[arg(long, default_value_t = 100)]
    codes: usize,
    #[arg(long, value_enum, default_value_t = SweepStates::Orthogonal)]
    states: SweepStates,
    /// Noise of the second example's states.
    #[arg(long, default_value_t = 0.2)]
    channel_delta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CodingChoice {
    Shared,
    Independent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DecoderChoice {
    Typicality,
    MinDistance,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long, default_value_t = 0.05)]
    delta1: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    /// Number of user-1 messages.
    #[arg(long, default_value_t = 4)]
    m1: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 4)]
    l: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, value_enum, default_value_t = CodingChoice::Shared)]
    coding: CodingChoice,
    #[arg(long, value_enum, default_value_t = DecoderChoice::Typicality)]
    decoder: DecoderChoice,
    /// Strong-typicality parameter of the interferers' encoders.
    #[arg(long, default_value_t = 0.5)]
    encoder_delta: f64,
    /// Entropy-typicality parameter of the typicality decoder.
    #[arg(long, default_value_t = 0.25)]
    decoder_delta: f64,
    #[arg(long, default_value_t = 0.1)]
    cost_slack: f64,
}

fn parse_prob(s: &str) -> Result<f64, String> {
    let v = match s.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|e| format!("{e}"))?;
            let b: f64 = b.trim().parse().map_err(|e| format!("{e}"))?;
            a / b
        }
        None => s.trim().parse().map_err(|e| format!("{e}"))?,
    };
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{s} is not a probability"))
    }
}

struct Output {
    csv: String,
    json: Value,
}

fn config_echo(cli: &Cli, name: &str, args: &impl Serialize) -> (String, Value) {
    let args = serde_json::to_value(args).expect("arguments serialize");
    let mut rerun = format!(
        "ncc-cq --seed {} --budget {} --tolerance {:e} --format {} {name}",
        cli.seed,
        cli.budget,
        cli.tolerance,
        if cli.format == Format::Csv { "csv" } else { "json" }
    );
    let mut lines = format!(
        "# ncc-cq {}\n# command: {name}\n# seed: {}\n# budget: {}\n# tolerance: {:e}\n",
        env!("CARGO_PKG_VERSION"),
        cli.seed,
        cli.budget,
        cli.tolerance
    );
    if let Value::Object(map) = &args {
        for (k, v) in map {
            let flag = k.replace('_', "-");
            let text = match v {
                Value::Null => continue,
                Value::Bool(false) => continue,
                Value::Bool(true) => {
                    let _ = write!(rerun, " --{flag}");
                    let _ = writeln!(lines, "# {k}: true");
                    continue;
                }
                Value::String(s) => s.clone(),
                Value::Array(a) => a.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
                other => other.to_string(),
            };
            let _ = write!(rerun, " --{flag} {text}");
            let _ = writeln!(lines, "# {k}: {text}");
        }
    }
    let _ = writeln!(lines, "# rerun: {rerun}");
    let config = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": name,
        "seed": cli.seed,
        "budget": cli.budget.to_string(),
        "tolerance": cli.tolerance,
        "args": args,
        "rerun": rerun,
    });
    (lines, config)
}

fn rule(flavor: Flavor, delta: f64) -> ncc_cq::Result<Typicality> {
    let kind = match flavor {
        Flavor::Entropy => TypicalityKind::Entropy,
        Flavor::Strong => TypicalityKind::Strong,
    };
    Typicality::new(kind, delta)
}

fn need(v: Option<f64>, name: &str) -> ncc_cq::Result<f64> {
    v.ok_or_else(|| Error::InvalidArgument(format!("--{name} is required for the built-in examples")))
}

fn example_distribution(delta1: f64, delta: f64, tau: Option<f64>) -> ncc_cq::Result<(InputDistribution, SplitInputDistribution)> {
    let tau = match tau {
        Some(t) => t,
        None => interference_free_tau(delta1, delta)?,
    };
    let f2 = PrimeField::binary();
    let d = InputDistribution::identity_aux(f2, vec![1.0 - tau, tau], &[0.5, 0.5], &[0.5, 0.5])?;
    let s = SplitInputDistribution::from_ux(f2, vec![1.0 - tau, tau], d.p_vx(2), d.p_vx(3))?;
    Ok((d, s))
}

fn region_cmd(cli: &Cli, a: &RegionArgs) -> ncc_cq::Result<Output> {
    let (channel, dists): (CqChannel, Dists) = if let Some(path) = &a.spec {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        let spec = parse_channel_spec(&text)?;
        let dists = match (&spec.distribution, &spec.example) {
            (Some(t), _) => Dists::Table(t.clone()),
            (None, Some(ex)) => Dists::Example(example_distribution(ex.delta1, ex.delta, a.tau)?),
            (None, None) => return Err(Error::InvalidArgument("spec file has no [distribution] table".into())),
        };
        (spec.channel, dists)
    } else if a.example1 || a.example2 {
        let (d1, d) = (need(a.delta1, "delta1")?, need(a.delta, "delta")?);
        let ch = if a.example1 { example1_channel(d1, d)? } else { example2_channel(d1, d)? };
        (ch, Dists::Example(example_distribution(d1, d, a.tau)?))
    } else {
        return Err(Error::InvalidArgument("give --spec, --example1 or --example2".into()));
    };
    let report = is_3to1(&channel, cli.tolerance)?;
    if !report.holds {
        let w = report.witness.expect("violations carry a witness");
        return Err(Error::ModelViolation(format!(
            "receiver {} output differs between inputs {:?} and {:?} by trace distance {:.3e}",
            w.receiver, w.x, w.x_prime, w.distance
        )));
    }
    let region: RegionSpec = match (a.theorem, a.no_w) {
        (TheoremChoice::One, _) => theorem1_region(&channel, &dists.theorem1()?)?,
        (TheoremChoice::Three, false) => theorem3_region(&channel, &dists.split()?)?,
        (TheoremChoice::Three, true) | (TheoremChoice::Usb, _) => {
            let mut r = theorem3_region(&channel, &dists.split()?.with_trivial_w())?;
            r.label = "usb".into();
            r
        }
    };
    let mut csv = String::new();
    for w in region.warnings() {
        let _ = writeln!(csv, "# warning: {w}");
    }
    csv.push_str(&region.to_csv());
    let json = json!({ "region": region, "corner_points": region.corner_points(), "warnings": region.warnings() });
    Ok(Output { csv, json })
}

enum Dists {
    Table(DistributionTable),
    Example((InputDistribution, SplitInputDistribution)),
}

impl Dists {
    fn theorem1(&self) -> ncc_cq::Result<InputDistribution> {
        match self {
            Dists::Table(t) => t.input_distribution(),
            Dists::Example((d, _)) => Ok(d.clone()),
        }
    }

    fn split(&self) -> ncc_cq::Result<SplitInputDistribution> {
        match self {
            Dists::Table(t) => t.split_distribution(),
            Dists::Example((_, s)) => Ok(s.clone()),
        }
    }
}

fn separation_cmd(a: &SeparationArgs) -> ncc_cq::Result<Output> {
    let tau = match a.tau {
        Some(t) => t,
        None => interference_free_tau(a.delta1, a.delta)?,
    };
    let example = if a.example == 1 { SeparationExample::ClassicalEx1 } else { SeparationExample::QuantumEx2 };
    let r = example_separation_witness(example, a.delta1, a.delta, tau)?;
    let mut csv = String::new();
    let _ = writeln!(csv, "tau: {:.17e}", r.tau);
    let _ = writeln!(csv, "ptp_triple: {:.17e},{:.17e},{:.17e}", r.ptp_triple[0], r.ptp_triple[1], r.ptp_triple[2]);
    let _ = writeln!(csv, "unstructured_lhs: {:.17e}", r.unstructured_lhs);
    let _ = writeln!(csv, "unstructured_rhs: {:.17e}", r.unstructured_rhs);
    let _ = writeln!(csv, "unstructured_violated: {}", r.unstructured_violated);
    let _ = writeln!(csv, "structured_condition: {}", r.structured_condition);
    let _ = writeln!(csv, "interference_decodable: {}", r.interference_decodable);
    let _ = writeln!(csv, "ncc_min_slack: {:.17e}", r.ncc_min_slack);
    let _ = writeln!(csv, "ncc_point_in_region: {}", r.ncc_point_in_region);
    if a.example == 1 {
        let c = capacity_report(a.delta1, a.delta, tau)?;
        let _ = writeln!(csv, "tx1_capacity: {:.17e}", c.tx1_capacity);
        let _ = writeln!(csv, "ptp_capacity: {:.17e}", c.ptp_capacity);
    }
    let _ = writeln!(csv, "separation: {}", r.separation);
    Ok(Output { csv, json: serde_json::to_value(&r).expect("report serializes") })
}

fn sweep_cmd(cli: &Cli, a: &SweepArgs) -> ncc_cq::Result<Output> {
    let rule = rule(a.flavor, a.delta)?;
    let f2 = PrimeField::binary();
    let mut csv = String::from("n,delta,k,l,error_probability,trace_lower,trace_upper\n");
    let mut rows = Vec::new();
    match a.mode {
        SweepMode::Ptp => {
            let states = match a.states {
                SweepStates::Orthogonal => vec![DensityOperator::basis(2, 0), DensityOperator::basis(2, 1)],
                SweepStates::Example2 => vec![example2_noisy(0, a.channel_delta), example2_noisy(1, a.channel_delta)],
            };
            let pick = |v: &Option<Vec<usize>>, i: usize, dflt: usize| -> ncc_cq::Result<usize> {
                match v {
                    Some(list) => list.get(i).copied().ok_or_else(|| Error::InvalidArgument("--k/--l need one entry per n".into())),
                    None => Ok(dflt),
                }
            };
            for (i, &n) in a.n.iter().enumerate() {
                let k = pick(&a.k, i, n / 2)?;
                let l = pick(&a.l, i, (n / 2).saturating_sub(1))?;
                let size = 1u128.checked_shl((n + k + l) as u32).unwrap_or(u128::MAX);
                if size > cli.budget {
                    return Err(Error::ResourceLimit { what: "decoder elements x dimension".into(), required: size, budget: cli.budget });
                }
                let cfg = PtpEnsembleConfig { field: f2, n, k, l, p_v: a.p_v.clone(), rule, codes: a.codes, seed: cli.seed };
                let r = ptp_ensemble_error(&cfg, &states)?;
                let _ = writeln!(csv, "{n},{},{k},{l},{:.17e},{:.17e},{:.17e}", a.delta, r.mean_error, 1.0 - r.max_error, 1.0 - r.min_error);
                rows.push(json!({"n": n, "delta": a.delta, "k": k, "l": l, "error_probability": r.mean_error,
                    "trace_lower": 1.0 - r.max_error, "trace_upper": 1.0 - r.min_error, "encoding_failure_rate": r.encoding_failure_rate}));
            }
        }
        SweepMode::Pinching => {
            let states = vec![example2_noisy(0, a.channel_delta), example2_noisy(1, a.channel_delta)];
            let p_ab = vec![vec![0.5, 0.0], vec![0.0, 0.5]];
            if let Some(&n) = a.n.iter().max() {
                let size = 1u128.checked_shl(n as u32).unwrap_or(u128::MAX);
                if size > cli.budget.min(1 << 12) {
                    return Err(Error::ResourceLimit { what: "tensor-power dimension".into(), required: size, budget: cli.budget.min(1 << 12) });
                }
            }
            let t = verify_pinching(&p_ab, &states, &a.n, rule)?;
            for r in &t.rows {
                let _ = writeln!(csv, "{},{},,,{:.17e},{:.17e},{:.17e}", r.n, a.delta, r.one_minus_trace, r.trace, r.trace);
                rows.push(json!({"n": r.n, "delta": a.delta, "error_probability": r.one_minus_trace,
                    "trace_lower": r.trace, "trace_upper": r.trace, "gentle_lower_bound": r.gentle_lower_bound}));
            }
            let _ = writeln!(csv, "# strictly_decreasing: {}", t.strictly_decreasing);
        }
    }
    Ok(Output { csv, json: json!({ "rows": rows }) })
}

fn simulate_cmd(cli: &Cli, a: &SimulateArgs) -> ncc_cq::Result<Output> {
    let params = InstanceParams {
        n: a.n,
        delta1: a.delta1,
        delta: a.delta,
        tau: a.tau,
        m1_size: a.m1,
        k: a.k,
        l: a.l,
        coding: match a.coding {
            CodingChoice::Shared => InterferenceCoding::SharedCoset,
            CodingChoice::Independent => InterferenceCoding::Independent,
        },
        encoder_rule: Typicality::strong(a.encoder_delta)?,
        cost_slack: a.cost_slack,
    };
    let decoder = match a.decoder {
        DecoderChoice::Typicality => ClassicalDecoder::JointTypicality,
        DecoderChoice::MinDistance => ClassicalDecoder::MinDistance,
    };
    let inst = ClassicalIcInstance::random(params, &mut ChaCha8Rng::seed_from_u64(cli.seed))?;
    let r = simulate(&inst, a.trials, cli.seed, decoder, Typicality::entropy(a.decoder_delta)?, cli.budget)?;
    let mut csv = String::from("receiver,errors,trials,rate,wilson_low,wilson_high\n");
    for (j, e) in r.receivers.iter().enumerate() {
        let _ = writeln!(csv, "{},{},{},{:.17e},{:.17e},{:.17e}", j + 1, e.errors, e.trials, e.rate, e.wilson_low, e.wilson_high);
    }
    let _ = writeln!(csv, "# encoding_failures: {},{}", r.encoding_failures[0], r.encoding_failures[1]);
    let _ = writeln!(csv, "# rx1_candidates: {}", r.rx1_candidates);
    Ok(Output { csv, json: serde_json::to_value(&r).expect("report serializes") })
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse { .. } | Error::InvalidArgument(_) => 2,
        Error::ModelViolation(_) => 3,
        Error::ResourceLimit { .. } => 4,
        Error::InternalConsistency(_) => 1,
    }
}

fn run(cli: &Cli) -> ncc_cq::Result<String> {
    let ((echo, config), out) = match &cli.command {
        Command::Region(a) => (config_echo(cli, "region", a), region_cmd(cli, a)?),
        Command::Separation(a) => (config_echo(cli, "separation", a), separation_cmd(a)?),
        Command::PovmSweep(a) => (config_echo(cli, "povm-sweep", a), sweep_cmd(cli, a)?),
        Command::Simulate(a) => (config_echo(cli, "simulate", a), simulate_cmd(cli, a)?),
    };
    Ok(match cli.format {
        Format::Csv => echo + &out.csv,
        Format::Json => {
            serde_json::to_string_pretty(&json!({ "config": config, "result": out.json })).expect("json serializes") + "\n"
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(text) => {
            let written = match &cli.output {
                Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
