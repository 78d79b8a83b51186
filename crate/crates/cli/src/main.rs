use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};

use regtri::bounds::{badness_bound, bound_sheet, BoundSheet, Regime, Residual};
use regtri::census::{census_report, edge_triangle_table};
use regtri::certify::{run_suite, write_suite, Suite, DEFAULT_SEED};
use regtri::enumerate::{
    count_by_triangles, count_regular_graphs, enumerate_pairings, exact_k_clique_conditioned_count,
    preimage_report, PairingOptions,
};
use regtri::generators::{plant, sample_configuration_model, BlockKind, PlantedSpec};
use regtri::manifest::{to_json_bytes, RunManifest};
use regtri::rational::{self, parse_rational, Rational};
use regtri::reveal::{
    encode_phi, expected_phi_exact, mean_phi_over_permutations, permutation_success_fraction,
    phi_weight_fast, PermutationMode, DEFAULT_EXACT_CAP,
};
use regtri::sampler::{sample_conditioned, ChainConfig, SamplerError, StartKind};
use regtri::structure::{assemble_pseudo_cliques, structure_report};
use regtri::{PortLabeledGraph, RegularGraph, SCHEMA_VERSION};

#[derive(Parser, Debug)]
#[command(name = "regtri", version, about = "Triangle-rich d-regular graphs")]
struct Cli {
    /// Worker threads for sharded enumeration and permutation sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Directory for artifacts and `manifest.json`.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Clique,
    MatchedComplement,
}

impl From<Kind> for BlockKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::Clique => BlockKind::Clique,
            Kind::MatchedComplement => BlockKind::MatchedComplement,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Mode {
    Fixed,
    Growing,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Start {
    Random,
    Planted,
}

#[derive(Args, Debug)]
struct Input {
    /// Edge-list file (`n d` header, then one `u v` pair per line).
    #[arg(long)]
    input: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Configuration-model or planted graph as an edge list.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        seed: u64,
        /// Plant blocks covering this fraction of T_max.
        #[arg(long, value_parser = parse_rational)]
        c: Option<Rational>,
        /// Plant exactly this many blocks.
        #[arg(long, conflicts_with = "c")]
        blocks: Option<usize>,
        #[arg(long, value_enum, default_value_t = Kind::Clique)]
        kind: Kind,
    },
    /// Triangles, k-cliques and the t_e histogram.
    Census {
        #[command(flatten)]
        input: Input,
        #[arg(long = "k")]
        k: Vec<usize>,
    },
    /// Reveal profile under the rank port labeling, plus permutation averages.
    Phi {
        #[command(flatten)]
        input: Input,
        /// Also report the fraction of relabelings reaching T_c - 1.
        #[arg(long, value_parser = parse_rational)]
        c: Option<Rational>,
        /// Monte Carlo over this many relabelings instead of all n!.
        #[arg(long, requires = "seed")]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Lower, exact and upper counts with rates.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_parser = parse_rational)]
        c: Rational,
        #[arg(long, value_parser = parse_rational, requires = "delta")]
        eps: Option<Rational>,
        #[arg(long, value_parser = parse_rational, requires = "eps")]
        delta: Option<Rational>,
        /// Enumerate the exact count and the exact residual count.
        #[arg(long)]
        exact: bool,
    },
    /// Cliques or pseudo-cliques, bad nodes and triangle coverage.
    Structure {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_rational)]
        c: Rational,
        #[arg(long, value_enum, default_value_t = Mode::Fixed)]
        mode: Mode,
        /// Growing mode only: overrides the default delta.
        #[arg(long, value_parser = parse_rational)]
        delta: Option<Rational>,
    },
    /// Annealed swap chain into the set T >= c T_max, then a constrained walk.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_parser = parse_rational)]
        c: Rational,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        chain: u64,
        #[arg(long, value_enum, default_value_t = Start::Random)]
        start: Start,
    },
    /// Exhaustive counts for small (n, d).
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_parser = parse_rational)]
        c: Option<Rational>,
        /// Count by k-cliques instead of triangles (needs --c).
        #[arg(long, requires = "c")]
        k: Option<usize>,
        /// Sweep port-labeled pairings and check every profile preimage.
        #[arg(long, conflicts_with_all = ["c", "k"])]
        pairings: bool,
    },
    /// Runs the certification suite and prints a pass/fail table.
    Certify {
        #[arg(long, default_value = "core")]
        suite: Suite,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
}

/// Usage errors exit with 2; failed checks are reported through `Output::passed`.
#[derive(Debug)]
struct Failure(String);

impl Failure {
    fn usage(e: impl ToString) -> Self {
        Failure(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure(format!("io: {e}"))
    }
}

/// What a subcommand produced: the stdout text, plus named artifact files.
struct Output {
    stdout: String,
    artifacts: Vec<(String, Vec<u8>)>,
    passed: bool,
}

impl Output {
    fn json(name: &str, value: &impl serde::Serialize) -> Self {
        let bytes = to_json_bytes(value);
        Output {
            stdout: String::from_utf8(bytes.clone()).expect("json is utf-8"),
            artifacts: vec![(format!("{name}.json"), bytes)],
            passed: true,
        }
    }

    fn text(name: &str, text: String) -> Self {
        Output {
            artifacts: vec![(name.to_string(), text.clone().into_bytes())],
            stdout: text,
            passed: true,
        }
    }
}

fn read_graph(input: &Input) -> Result<RegularGraph, Failure> {
    let text = fs::read_to_string(&input.input)
        .map_err(|e| Failure(format!("cannot read {}: {e}", input.input.display())))?;
    RegularGraph::parse_edge_list(&text).map_err(Failure::usage)
}

fn rat(v: &Rational) -> Value {
    Value::String(rational::to_string(v))
}

fn generate(
    n: usize,
    d: usize,
    seed: u64,
    c: Option<&Rational>,
    blocks: Option<usize>,
    kind: Kind,
) -> Result<(RegularGraph, Option<PlantedSpec>), Failure> {
    let spec = match (c, blocks) {
        (Some(c), _) => Some(PlantedSpec::for_fraction(n, d, c, kind.into())),
        (None, Some(b)) => Some(PlantedSpec::with_blocks(n, d, b, kind.into())),
        (None, None) => None,
    }
    .transpose()
    .map_err(Failure::usage)?;
    let g = match &spec {
        Some(spec) => plant(spec, seed),
        None => sample_configuration_model(n, d, seed, 10_000),
    }
    .map_err(Failure::usage)?;
    Ok((g, spec))
}

fn run(cli: &Cli) -> Result<Output, Failure> {
    let format = cli.format;
    match &cli.command {
        Command::Generate {
            n,
            d,
            seed,
            c,
            blocks,
            kind,
        } => {
            let (g, spec) = generate(*n, *d, *seed, c.as_ref(), *blocks, *kind)?;
            let mut out = Output::text("graph.edges", g.to_edge_list());
            if let Some(spec) = spec {
                out.artifacts
                    .push(("spec.json".into(), to_json_bytes(&spec)));
            }
            Ok(out)
        }
        Command::Census { input, k } => {
            let g = read_graph(input)?;
            let report = census_report(&g, k).map_err(Failure::usage)?;
            Ok(match format {
                Format::Json => Output::json("census", &report),
                Format::Csv => {
                    let mut text = String::from("t_e,edges\n");
                    for (t, count) in edge_triangle_table(&g).histogram(g.d()).iter().enumerate() {
                        text.push_str(&format!("{t},{count}\n"));
                    }
                    Output::text("t_e_histogram.csv", text)
                }
            })
        }
        Command::Phi {
            input,
            c,
            samples,
            seed,
        } => {
            let g = read_graph(input)?;
            let mode = match (samples, seed) {
                (Some(samples), Some(seed)) => PermutationMode::MonteCarlo {
                    samples: *samples,
                    seed: *seed,
                },
                _ => PermutationMode::Exact {
                    cap: DEFAULT_EXACT_CAP,
                },
            };
            let profile = encode_phi(&PortLabeledGraph::with_rank_ports(g.clone()));
            let mean = mean_phi_over_permutations(&g, mode).map_err(Failure::usage)?;
            let success = c
                .as_ref()
                .map(|c| permutation_success_fraction(&g, c, mode))
                .transpose()
                .map_err(Failure::usage)?;
            let report = json!({
                "schema_version": SCHEMA_VERSION,
                "n": g.n(),
                "d": g.d(),
                "profile": profile.dump(),
                "weight_fast": phi_weight_fast(&g),
                "expected_weight": rat(&expected_phi_exact(&g)),
                "mean_over_permutations": mean,
                "success_fraction": success,
            });
            let mut out = Output::json("phi", &report);
            out.passed = success.is_none_or(|s| s.holds);
            Ok(out)
        }
        Command::Bounds {
            n,
            d,
            c,
            eps,
            delta,
            exact,
        } => {
            let (residual, count) = if *exact {
                let spec = PlantedSpec::for_fraction(*n, *d, c, BlockKind::Clique).ok();
                let residual = match spec.map(|s| s.m) {
                    Some(0) => Residual::Exact(BigUint::from(1u8)),
                    Some(m) => {
                        Residual::Exact(count_regular_graphs(m, *d).map_err(Failure::usage)?.into())
                    }
                    None => Residual::Heuristic,
                };
                let threshold = regtri::census::triangle_threshold(*n, *d, c);
                let by_t = count_by_triangles(*n, *d).map_err(Failure::usage)?;
                let count: u64 = by_t.range(threshold..).map(|(_, v)| v).sum();
                (residual, Some(BigUint::from(count)))
            } else {
                (Residual::Heuristic, None)
            };
            let sheet = bound_sheet(*n, *d, c, &residual, count.as_ref());
            let badness = match (eps, delta) {
                (Some(eps), Some(delta)) => {
                    Some(badness_bound(*n, *d, c, eps, delta).map_err(Failure::usage)?)
                }
                _ => None,
            };
            Ok(match format {
                Format::Json => {
                    let mut value = serde_json::to_value(&sheet).expect("serializable");
                    if let Some(b) = badness {
                        value["badness_bound_log"] = json!(b.ln);
                    }
                    Output::json("bounds", &value)
                }
                Format::Csv => Output::text(
                    "bounds.csv",
                    format!("{}\n{}\n", BoundSheet::csv_header(), sheet.csv_row()),
                ),
            })
        }
        Command::Structure {
            input,
            c,
            mode,
            delta,
        } => {
            let g = read_graph(input)?;
            let report = match (mode, delta) {
                (Mode::Growing, Some(delta)) => assemble_pseudo_cliques(&g, delta),
                (Mode::Growing, None) => structure_report(&g, c, Regime::GrowingD),
                (Mode::Fixed, _) => structure_report(&g, c, Regime::FixedD),
            };
            let mut out = Output::json("structure", &report);
            out.passed = report.checks.all_pass();
            Ok(out)
        }
        Command::Sample {
            n,
            d,
            c,
            seed,
            chain,
            start,
        } => {
            let mut cfg = ChainConfig::new(*n, *d, c.clone(), *seed);
            cfg.chain_id = *chain;
            cfg.start = match start {
                Start::Random => StartKind::Random,
                Start::Planted => StartKind::Planted,
            };
            match sample_conditioned(&cfg) {
                Ok(outcome) => {
                    let mut out = match format {
                        Format::Json => Output::json("trace", &outcome.trace),
                        Format::Csv => Output::text("trace.csv", outcome.trace.to_csv()),
                    };
                    out.artifacts.push((
                        "graph.edges".into(),
                        outcome.graph.to_edge_list().into_bytes(),
                    ));
                    Ok(out)
                }
                Err(SamplerError::Timeout { steps, trace }) => {
                    let mut out = Output::json("trace", &trace);
                    out.stdout = format!(
                        "constraint T >= {} not reached in {steps} steps (best {})\n",
                        trace.threshold, trace.final_triangles
                    );
                    out.passed = false;
                    Ok(out)
                }
                Err(e) => Err(Failure::usage(e)),
            }
        }
        Command::Enumerate {
            n,
            d,
            c,
            k,
            pairings,
        } => {
            if *pairings {
                let result = enumerate_pairings(*n, *d, PairingOptions::default())
                    .map_err(Failure::usage)?;
                let report = preimage_report(&result);
                let mut out = Output::json("pairings", &result);
                out.artifacts
                    .push(("preimages.json".into(), to_json_bytes(&report)));
                out.passed = report.all_hold;
                return Ok(out);
            }
            let by_t = count_by_triangles(*n, *d).map_err(Failure::usage)?;
            let total: u64 = by_t.values().sum();
            let mut report = json!({
                "schema_version": SCHEMA_VERSION,
                "n": n,
                "d": d,
                "total_graphs": total,
                "count_by_triangles": by_t,
            });
            if let Some(c) = c {
                let threshold = regtri::census::triangle_threshold(*n, *d, c);
                let count = match k {
                    Some(k) => {
                        exact_k_clique_conditioned_count(*n, *d, c, *k).map_err(Failure::usage)?
                    }
                    None => by_t.range(threshold..).map(|(_, v)| v).sum(),
                };
                report["c"] = rat(c);
                report["k"] = json!(k.unwrap_or(3));
                report["count"] = json!(count);
            }
            Ok(match format {
                Format::Json => Output::json("enumerate", &report),
                Format::Csv => {
                    let mut text = String::from("T,graphs\n");
                    for (t, count) in &by_t {
                        text.push_str(&format!("{t},{count}\n"));
                    }
                    Output::text("enumerate.csv", text)
                }
            })
        }
        Command::Certify { suite, seed } => {
            let report = run_suite(*suite, *seed);
            if let Some(dir) = &cli.output {
                write_suite(&report, dir)?;
            }
            Ok(Output {
                stdout: report.table(),
                artifacts: Vec::new(),
                passed: report.passed,
            })
        }
    }
}

fn subcommand(command: &Command) -> &'static str {
    match command {
        Command::Generate { .. } => "generate",
        Command::Census { .. } => "census",
        Command::Phi { .. } => "phi",
        Command::Bounds { .. } => "bounds",
        Command::Structure { .. } => "structure",
        Command::Sample { .. } => "sample",
        Command::Enumerate { .. } => "enumerate",
        Command::Certify { .. } => "certify",
    }
}

fn seeds(command: &Command) -> Vec<u64> {
    match command {
        Command::Generate { seed, .. }
        | Command::Sample { seed, .. }
        | Command::Certify { seed, .. } => vec![*seed],
        Command::Phi { seed: Some(s), .. } => vec![*s],
        _ => Vec::new(),
    }
}

fn write_outputs(cli: &Cli, out: &Output, dir: &Path) -> Result<(), Failure> {
    if matches!(cli.command, Command::Certify { .. }) {
        return Ok(());
    }
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let params = BTreeMap::from([("argv".to_string(), json!(argv))]);
    let mut manifest = RunManifest::new(subcommand(&cli.command), params, seeds(&cli.command));
    for (file, bytes) in &out.artifacts {
        manifest.write_artifact(dir, file, bytes)?;
    }
    manifest.write(dir)?;
    Ok(())
}

fn report_error(kind: &str, message: &str) {
    let line = json!({"error": kind, "message": message.trim_end()});
    eprintln!("{line}");
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report_error("usage", &e.render().to_string());
            return ExitCode::from(2);
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build_global()
    {
        report_error("usage", &e.to_string());
        return ExitCode::from(2);
    }
    let result = run(&cli).and_then(|out| {
        if let Some(dir) = &cli.output {
            write_outputs(&cli, &out, dir)?;
        }
        Ok(out)
    });
    match result {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            let _ = stdout.write_all(out.stdout.as_bytes());
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure(message)) => {
            report_error("usage", &message);
            ExitCode::from(2)
        }
    }
}
