mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use urysohn::extension::{generic_space, GrowingSpace, ValueDomain};
use urysohn::group2::{
    exponent3_witness, extend_invariant_metric, generic_invariant_metric, InvariantMetric,
};
use urysohn::isometry::{
    approximate_isometry, back_and_forth_bounded, build_free_pair, build_unbounded,
    compose_dense_free, realize_isometric_copy, reduced_words, Certificate, FreeWord,
    PartialIsometry, TuplePair,
};
use urysohn::orbit::{
    experiment_csv, metric_to_graph, orbit_graph_experiment, targeted_extension,
    IntervalPartition, SeriesSpec,
};
use urysohn::oracle;
use urysohn::rng::SplitMix64;
use urysohn::toeplitz::{
    amalgamation_bounds, cyclic_metric, extend_one, is_admissible, is_toeplitz, prolong,
    prolong_rational, shift_displacement, universal_prefix, VectorEnumeration,
};

use io::{usage, Failure, Outcome, PrefixDocument, Sink};

#[derive(Parser)]
#[command(name = "forge", version, about = "Exact finite-scale constructions in the rational Urysohn space")]
struct Cli {
    /// Seed for every randomized construction.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Dot,
}

#[derive(Subcommand)]
enum Command {
    /// Check that a space document is a metric.
    Validate { file: PathBuf },
    /// Add one point at prescribed distances.
    Extend {
        file: PathBuf,
        /// JSON object `{"point": "p/q", ...}`, or `@file`.
        #[arg(long)]
        spec: String,
        /// Add two points realizing the sphere diameter instead.
        #[arg(long)]
        sphere: bool,
    },
    /// Sample a space by random admissible extensions.
    Generic {
        #[arg(long)]
        n: usize,
        /// `int:D`, `rat:Q:D` or `graph`.
        #[arg(long, default_value = "int:5")]
        domain: String,
    },
    /// Toeplitz distance functions and cyclic metrics.
    #[command(subcommand)]
    Toeplitz(ToeplitzCmd),
    /// Partial isometries built by back-and-forth.
    #[command(subcommand)]
    Iso(IsoCmd),
    /// Invariant metrics on groups of exponent 2 and 3.
    #[command(subcommand)]
    Group2(Group2Cmd),
    /// Graphs from the E/N distance partition.
    #[command(subcommand)]
    Orbit(OrbitCmd),
    /// Run a brute-force oracle suite.
    Oracle(OracleArgs),
}

#[derive(Subcommand)]
enum ToeplitzCmd {
    /// Check positivity and the two-sided triangle condition, and admissibility of `--h` if given.
    Validate {
        #[arg(long)]
        f: String,
        #[arg(long)]
        h: Option<String>,
    },
    /// One two-sided step: append to `f`, prepend to `h`.
    Extend {
        #[arg(long)]
        f: String,
        #[arg(long)]
        h: String,
        /// `lo,hi`
        #[arg(long)]
        clamp: Option<String>,
    },
    /// Bounds for the next value.
    Bounds {
        #[arg(long)]
        f: String,
    },
    /// Prolong `f` until it ends with the window `h`.
    Prolong {
        #[arg(long)]
        f: String,
        #[arg(long)]
        h: String,
    },
    /// Realize enumerated integer vectors as windows of one prefix.
    Universal {
        #[arg(long, default_value_t = 25)]
        steps: usize,
        /// Starting prefix.
        #[arg(long, default_value = "1")]
        from: String,
    },
    /// The cyclic metric `d(i,j) = f(|i-j|)` on `0..=size`.
    Cyclic {
        #[arg(long)]
        f: String,
        #[arg(long)]
        size: Option<usize>,
    },
}

#[derive(Subcommand)]
enum IsoCmd {
    /// Approximate a partial isometry on one more point.
    Approx {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        base: String,
        #[arg(long)]
        images: String,
        #[arg(long)]
        vn: usize,
        #[arg(long)]
        target: usize,
        #[arg(long)]
        eps: String,
    },
    /// Back-and-forth with a displacement bound.
    Bounded {
        #[arg(long)]
        space: PathBuf,
        /// `a:b,c:d`
        #[arg(long)]
        map: String,
        #[arg(long)]
        bound: String,
        #[arg(long, default_value_t = 3)]
        rounds: usize,
    },
    /// Back-and-forth with unbounded displacement certificates.
    Unbounded {
        #[arg(long, default_value_t = 38)]
        stages: usize,
    },
    /// Two isometries on which the listed words are unbounded.
    Free {
        #[arg(long, default_value = "a,b,ab,abAB")]
        words: String,
        #[arg(long, default_value_t = 3)]
        revisits: usize,
    },
    /// Composite generators matching random tuple pairs, with freeness witnesses.
    DenseFree {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value = "rat:2:4")]
        domain: String,
        #[arg(long, default_value_t = 3)]
        pairs: usize,
        #[arg(long, default_value_t = 12)]
        words: usize,
    },
}

#[derive(Subcommand)]
enum Group2Cmd {
    /// Extend an invariant metric one level.
    Extend {
        /// `d(0,x)` for `x = 1..2^L - 1`; empty for the trivial group.
        #[arg(long, default_value = "")]
        delta: String,
        /// `d(0,x)` for the new coset.
        #[arg(long)]
        new: String,
    },
    /// Sample an invariant metric level by level.
    Generic {
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value = "int:4")]
        domain: String,
    },
    /// The exponent-3 obstruction for given alpha and eps.
    Expo3 {
        #[arg(long)]
        alpha: String,
        #[arg(long)]
        eps: String,
    },
}

#[derive(Subcommand)]
enum OrbitCmd {
    /// The E/N cells up to `--cover`.
    Partition {
        #[arg(long, default_value = "harmonic")]
        series: String,
        #[arg(long)]
        cover: String,
    },
    /// The graph of a space under the E/N partition.
    Graph {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value = "harmonic")]
        series: String,
    },
    /// Add a point joined to `U` and not to `V`, then look for a witness.
    ExtendCheck {
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value = "")]
        u: String,
        #[arg(long, default_value = "")]
        v: String,
        #[arg(long, default_value = "harmonic")]
        series: String,
    },
    /// Witness fractions over growing prefixes of one generic space.
    Experiment {
        #[arg(long, default_value = "4,8,12,16")]
        sizes: String,
        #[arg(long, default_value_t = 2)]
        uv_bound: usize,
        #[arg(long, default_value = "rat:2:4")]
        domain: String,
        #[arg(long, default_value = "harmonic")]
        series: String,
    },
}

#[derive(Args)]
struct OracleArgs {
    /// metric, toeplitz, isometry, group2 or orbit.
    suite: String,
    #[arg(long, default_value_t = 3)]
    points: usize,
    #[arg(long, default_value_t = 3)]
    max: i64,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long, default_value_t = 10)]
    spaces: u64,
    #[arg(long, default_value_t = 2)]
    uv_bound: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(v)) => {
            eprintln!("{v}");
            ExitCode::from(2)
        }
    }
}

fn domain(raw: &str) -> Outcome<ValueDomain> {
    Ok(raw.parse::<ValueDomain>()?)
}

fn series(raw: &str) -> Outcome<SeriesSpec> {
    Ok(raw.parse::<SeriesSpec>()?)
}

fn only(format: Format, allowed: &[Format]) -> Outcome<()> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(usage("output format not supported by this command"))
    }
}

fn run(cli: Cli) -> Outcome<()> {
    let sink = Sink { out: cli.out.clone() };
    let fmt = cli.format;
    match cli.command {
        Command::Validate { file } => {
            only(fmt, &[Format::Json])?;
            let gs = io::load_space(&file)?;
            sink.json(&json!({ "points": gs.len(), "valid": true }))
        }
        Command::Extend { file, spec, sphere } => {
            only(fmt, &[Format::Json])?;
            let mut gs = io::load_space(&file)?;
            let spec = io::parse_spec(&spec)?;
            if sphere {
                gs.realize_sphere_pair(&spec)?;
            } else {
                gs.extend_point(&spec)?;
            }
            sink.json(&io::space_document(&gs))
        }
        Command::Generic { n, domain: d } => {
            only(fmt, &[Format::Json])?;
            let gs = generic_space(n, domain(&d)?, cli.seed)?;
            sink.json(&io::space_document(&gs))
        }
        Command::Toeplitz(cmd) => toeplitz(cmd, fmt, &sink),
        Command::Iso(cmd) => {
            only(fmt, &[Format::Json])?;
            iso(cmd, cli.seed, &sink)
        }
        Command::Group2(cmd) => {
            only(fmt, &[Format::Json])?;
            group2(cmd, cli.seed, &sink)
        }
        Command::Orbit(cmd) => orbit(cmd, fmt, cli.seed, &sink),
        Command::Oracle(args) => {
            only(fmt, &[Format::Json])?;
            run_oracle(args, cli.seed, &sink)
        }
    }
}

fn toeplitz(cmd: ToeplitzCmd, fmt: Format, sink: &Sink) -> Outcome<()> {
    if !matches!(cmd, ToeplitzCmd::Universal { .. }) {
        only(fmt, &[Format::Json])?;
    }
    match cmd {
        ToeplitzCmd::Validate { f, h } => {
            let values = io::values_arg(&f)?;
            let report = is_toeplitz(&values);
            let mut out = json!({ "toeplitz": report.is_ok(), "violations": report.violations });
            if let Some(h) = h {
                let f = urysohn::ToeplitzPrefix::new(values)?;
                let adm = is_admissible(&f, &io::values_arg(&h)?);
                out["admissible"] = json!(adm.is_ok());
                out["admissibility_violations"] = json!(adm.violations);
            }
            sink.json(&out)
        }
        ToeplitzCmd::Extend { f, h, clamp } => {
            let f = io::prefix_arg(&f)?;
            let h = io::values_arg(&h)?;
            let clamp = match clamp {
                Some(c) => match io::rationals(&c)?.as_slice() {
                    [lo, hi] => Some((lo.clone(), hi.clone())),
                    _ => return Err(usage("--clamp takes lo,hi")),
                },
                None => None,
            };
            let step = extend_one(&f, &h, clamp)?;
            let mut fv = f.values().to_vec();
            fv.push(step.g1.clone());
            let mut hv = vec![step.g_n.clone()];
            hv.extend(h);
            sink.json(&json!({
                "step": step,
                "f": PrefixDocument::of(&fv),
                "h": PrefixDocument::of(&hv),
            }))
        }
        ToeplitzCmd::Bounds { f } => {
            let b = amalgamation_bounds(&io::prefix_arg(&f)?);
            sink.json(&b)
        }
        ToeplitzCmd::Prolong { f, h } => {
            let f = io::prefix_arg(&f)?;
            let h = io::values_arg(&h)?;
            let p = if f.is_integral() && h.iter().all(|x| x.is_integer()) {
                prolong(&f, &h)?
            } else {
                prolong_rational(&f, &h)?
            };
            let mut doc = serde_json::to_value(PrefixDocument::of(p.prefix.values()))
                .map_err(|e| usage(e.to_string()))?;
            doc["gap"] = json!(p.gap);
            doc["method"] = json!(p.method);
            doc["offset"] = json!(p.window_offset(h.len()));
            sink.json(&doc)
        }
        ToeplitzCmd::Universal { steps, from } => {
            only(fmt, &[Format::Json, Format::Csv])?;
            let seed = io::prefix_arg(&from)?;
            let u = universal_prefix(VectorEnumeration::new(), steps, &seed)?;
            if fmt == Format::Csv {
                return sink.write(&u.table_csv());
            }
            sink.json(&json!({
                "prefix": PrefixDocument::of(u.prefix.values()),
                "table": u.table,
                "skipped": u.skipped,
            }))
        }
        ToeplitzCmd::Cyclic { f, size } => {
            let f = io::prefix_arg(&f)?;
            let m = cyclic_metric(&f, size.unwrap_or(f.len()))?;
            let shift = shift_displacement(&m)?;
            let mut doc = serde_json::to_value(m.to_json()).map_err(|e| usage(e.to_string()))?;
            doc["shift_displacement"] = json!(shift);
            sink.json(&doc)
        }
    }
}

fn iso(cmd: IsoCmd, seed: u64, sink: &Sink) -> Outcome<()> {
    match cmd {
        IsoCmd::Approx { space, base, images, vn, target, eps } => {
            let mut gs = io::load_space(&space)?;
            let a = approximate_isometry(
                &mut gs,
                &io::indices(&base)?,
                &io::indices(&images)?,
                vn,
                target,
                &io::rational(&eps)?,
            )?;
            sink.json(&json!({ "approximation": a, "space": io::space_document(&gs) }))
        }
        IsoCmd::Bounded { space, map, bound, rounds } => {
            let mut gs = io::load_space(&space)?;
            let mut f = PartialIsometry::with_bound(io::rational(&bound)?);
            for (a, b) in io::pairs(&map)? {
                f.insert(a, b)?;
            }
            back_and_forth_bounded(&mut gs, &mut f, rounds)?;
            let displacement = f.max_displacement(gs.space());
            sink.json(&json!({
                "map": f.pairs(),
                "max_displacement": displacement,
                "space": io::space_document(&gs),
            }))
        }
        IsoCmd::Unbounded { stages } => {
            let mut gs = GrowingSpace::new();
            let (_, certs) = build_unbounded(&mut gs, stages)?;
            sink.lines(&certs)
        }
        IsoCmd::Free { words, revisits } => {
            let words = parse_words(&words)?;
            let mut gs = GrowingSpace::new();
            let fp = build_free_pair(&mut gs, &words, revisits)?;
            let certs: Vec<&Certificate> = fp.runs.iter().map(|r| &r.certificate).collect();
            sink.lines(&certs)
        }
        IsoCmd::DenseFree { n, domain: d, pairs, words } => {
            let mut gs = generic_space(n, domain(&d)?, seed)?;
            let mut rng = SplitMix64::new(seed ^ 0x5eed);
            let mut tuples = Vec::new();
            for _ in 0..pairs {
                let size = 1 + rng.below(3.min(n as u64)) as usize;
                let mut alpha = Vec::new();
                while alpha.len() < size {
                    let p = rng.below(n as u64) as usize;
                    if !alpha.contains(&p) {
                        alpha.push(p);
                    }
                }
                let beta = realize_isometric_copy(&mut gs, &alpha)?;
                tuples.push(TuplePair { alpha, beta });
            }
            let ws = reduced_words(pairs, words);
            let out = compose_dense_free(&mut gs, &tuples, &ws)?;
            let certs: Vec<&Certificate> = out
                .homogeneity
                .iter()
                .chain(out.freeness.iter().map(|r| &r.certificate))
                .collect();
            sink.lines(&certs)
        }
    }
}

fn parse_words(raw: &str) -> Outcome<Vec<FreeWord>> {
    raw.split(',')
        .map(|w| w.trim().parse::<FreeWord>().map_err(Failure::from))
        .collect()
}

fn group2(cmd: Group2Cmd, seed: u64, sink: &Sink) -> Outcome<()> {
    let export = |m: &InvariantMetric| -> Outcome<()> {
        let space = m.to_space()?;
        sink.json(&json!({ "level": m.level, "delta": m.delta, "space": space.to_json() }))
    };
    match cmd {
        Group2Cmd::Extend { delta, new } => {
            let delta = io::rationals(&delta)?;
            let level = (delta.len() + 1).trailing_zeros() as usize;
            let m = InvariantMetric::new(level, delta)?;
            export(&extend_invariant_metric(&m, &io::rationals(&new)?)?)
        }
        Group2Cmd::Generic { levels, domain: d } => {
            export(&generic_invariant_metric(levels, domain(&d)?, seed)?)
        }
        Group2Cmd::Expo3 { alpha, eps } => {
            let r = exponent3_witness(&io::rational(&alpha)?, &io::rational(&eps)?)?;
            sink.json(&r)
        }
    }
}

fn orbit(cmd: OrbitCmd, fmt: Format, seed: u64, sink: &Sink) -> Outcome<()> {
    match cmd {
        OrbitCmd::Partition { series: s, cover } => {
            only(fmt, &[Format::Json])?;
            let p = IntervalPartition::build(series(&s)?, &io::rational(&cover)?)?;
            let cells: Vec<_> = p.cells().collect();
            sink.json(&json!({ "series": s, "cells": cells }))
        }
        OrbitCmd::Graph { space, series: s } => {
            let gs = io::load_space(&space)?;
            let p = IntervalPartition::build(series(&s)?, &gs.space().diameter())?;
            let g = metric_to_graph(gs.space(), &p)?;
            match fmt {
                Format::Dot => sink.write(&g.to_dot(Some(gs.space().names()))),
                Format::Csv => sink.write(&g.to_csv()),
                Format::Json => sink.json(&g),
            }
        }
        OrbitCmd::ExtendCheck { space, u, v, series: s } => {
            only(fmt, &[Format::Json])?;
            let gs = io::load_space(&space)?;
            let t = targeted_extension(&gs, &series(&s)?, &io::indices(&u)?, &io::indices(&v)?)?;
            sink.json(&json!({
                "point": t.point,
                "edge_cell": t.edge_cell,
                "gap_cell": t.gap_cell,
                "witness": t.witness,
                "space": io::space_document(&t.space),
            }))
        }
        OrbitCmd::Experiment { sizes, uv_bound, domain: d, series: s } => {
            only(fmt, &[Format::Json, Format::Csv])?;
            let sizes = io::indices(&sizes)?;
            let rows = orbit_graph_experiment(&sizes, domain(&d)?, &series(&s)?, uv_bound, seed)?;
            if fmt == Format::Csv {
                sink.write(&experiment_csv(&rows))
            } else {
                sink.json(&rows)
            }
        }
    }
}

fn run_oracle(args: OracleArgs, seed: u64, sink: &Sink) -> Outcome<()> {
    let report = match args.suite.as_str() {
        "metric" => oracle::metric_suite(args.points, args.max),
        "toeplitz" => oracle::toeplitz_suite(args.n, args.max),
        "isometry" => oracle::isometry_suite(args.points, args.max),
        "group2" => oracle::group2_suite(args.levels, args.max),
        "orbit" => oracle::orbit_suite(args.spaces, args.points, args.uv_bound, seed)?,
        other => {
            return Err(usage(format!(
                "unknown suite {other:?}; expected metric, toeplitz, isometry, group2 or orbit"
            )))
        }
    };
    sink.json(&report)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::Domain(json!({
            "code": "counterexample",
            "message": format!("{} suite found counterexamples", report.suite),
            "context": { "counterexamples": report.counterexamples },
        })))
    }
}
