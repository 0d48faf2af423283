//! Command-line driver: reproducible sampling, persistence, verification and
//! artifact emission. Exit codes: 0 pass, 1 input error, 2 precondition
//! error, 3 verification failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use geopersist::analysis::{self, OrderVerdict};
use geopersist::error::Error;
use geopersist::homology::{persist_h1, FieldP};
use geopersist::loops::{self, NhMode};
use geopersist::pi1;
use geopersist::rips::build_filtration;
use geopersist::sampling::{
    enrich_with_critical_points, restrict_metric, sample_uniform, verify_density, SampleSet,
};
use geopersist::spaces::GeodesicSpaceModel;
use geopersist::svg;

#[derive(Parser)]
#[command(name = "geopersist", version, about = "Intrinsic persistence of geodesic model spaces from finite samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Model description file (JSON)
    #[arg(long)]
    model: PathBuf,
    /// Sample density s
    #[arg(long)]
    s: f64,
    /// Seed for all randomness of the run
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Coefficient field characteristic (prime)
    #[arg(long, default_value_t = 2)]
    field: u32,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Build horizon; defaults to max known death + 2s + margin
    #[arg(long)]
    rmax: Option<f64>,
    /// Probe resolution for density certificates; defaults to s/20
    #[arg(long)]
    resolution: Option<f64>,
    /// Add three equidistant points on every catalogue circle
    #[arg(long)]
    enrich: bool,
    /// Jitter the uniform grid along the parametrizations
    #[arg(long)]
    jitter: bool,
    /// Read the sample from a file instead of generating it
    #[arg(long)]
    sample: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an s-dense sample with a density certificate
    Sample(Common),
    /// Compute the H1 persistence diagram of a sample
    Persist(Common),
    /// Check the three intrinsic stability conditions against the model diagram
    VerifyStability(Common),
    /// Compare the order of two sample persistences
    VerifyOrder(OrderArgs),
    /// Check minimality of the enriched sample among random candidates
    VerifyMinimality(MinimalityArgs),
    /// Build and verify the simplicial nullhomotopy of a snapped circle sample
    Nullhomotopy(NhArgs),
    /// Edge-path presentation of the complex at a parameter
    Presentation(PresentationArgs),
}

#[derive(Args)]
struct OrderArgs {
    #[command(flatten)]
    common: Common,
    /// Seed of the second sample
    #[arg(long)]
    seed_b: Option<u64>,
    /// Build the second sample as a refinement of the first
    #[arg(long)]
    nested: bool,
}

#[derive(Args)]
struct MinimalityArgs {
    #[command(flatten)]
    common: Common,
    /// Number of random s-dense candidate samples
    #[arg(long, default_value_t = 5)]
    candidates: usize,
}

#[derive(Args)]
struct NhArgs {
    #[command(flatten)]
    common: Common,
    /// Rips parameter of the target complex
    #[arg(long)]
    r: f64,
    /// Spacing of the circle sample loop
    #[arg(long)]
    delta: f64,
    /// Which contractibility regime to use
    #[arg(long, value_enum)]
    mode: Mode,
    /// Label of the catalogue circle (defaults to the first)
    #[arg(long)]
    circle: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Dense,
    Equidistant,
}

#[derive(Args)]
struct PresentationArgs {
    #[command(flatten)]
    common: Common,
    /// Rips parameter of the complex
    #[arg(long)]
    r: f64,
    /// Tietze simplification pass budget
    #[arg(long, default_value_t = 100)]
    passes: usize,
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("GEOPERSIST_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_of(&e)
        }
    };
    ExitCode::from(code)
}

fn exit_code_of(e: &Error) -> u8 {
    match e {
        Error::Invalid(_) | Error::Json(_) | Error::Io(_) | Error::Domain(_) | Error::Argument(_) => 1,
        Error::PreconditionFailed(_)
        | Error::DensityViolation { .. }
        | Error::NoAnalyticCatalogue
        | Error::Horizon { .. }
        | Error::NotInitiallyConstant(_)
        | Error::CensoredMismatch
        | Error::ConstructionFailed(_) => 2,
    }
}

fn run(cli: Cli) -> geopersist::Result<u8> {
    match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Persist(args) => cmd_persist(args),
        Command::VerifyStability(args) => cmd_verify_stability(args),
        Command::VerifyOrder(args) => cmd_verify_order(args),
        Command::VerifyMinimality(args) => cmd_verify_minimality(args),
        Command::Nullhomotopy(args) => cmd_nullhomotopy(args),
        Command::Presentation(args) => cmd_presentation(args),
    }
}

fn load_model(path: &Path) -> geopersist::Result<GeodesicSpaceModel> {
    let text = std::fs::read_to_string(path)?;
    GeodesicSpaceModel::from_json(&text)
}

fn obtain_sample(model: &GeodesicSpaceModel, c: &Common) -> geopersist::Result<SampleSet> {
    let mut sample = match &c.sample {
        Some(path) => {
            let s = SampleSet::from_json(&std::fs::read_to_string(path)?)?;
            if s.model.model_id() != model.model_id() {
                return Err(Error::Domain(format!(
                    "sample file was drawn from {}, not from {}",
                    s.model.model_id(),
                    model.model_id()
                )));
            }
            s
        }
        None => sample_uniform(model, c.s, c.seed, c.jitter)?,
    };
    if c.enrich {
        let circles = model.critical_circles()?;
        sample = enrich_with_critical_points(model, &sample, &circles)?;
    }
    Ok(sample)
}

fn resolve_rmax(model: &GeodesicSpaceModel, c: &Common) -> geopersist::Result<f64> {
    if let Some(r) = c.rmax {
        return Ok(r);
    }
    let known = model.known_diagram(c.field()?)?;
    let d_max = known.intervals.last().map(|iv| iv.death).unwrap_or(1.0);
    Ok(d_max + 2.0 * c.s + 0.2 * d_max)
}

impl Common {
    fn field(&self) -> geopersist::Result<FieldP> {
        FieldP::new(self.field)
    }

    fn write(&self, name: &str, contents: &str) -> geopersist::Result<PathBuf> {
        std::fs::create_dir_all(&self.out)?;
        let path = self.out.join(name);
        std::fs::write(&path, contents)?;
        Ok(path)
    }
}

fn cmd_sample(c: Common) -> geopersist::Result<u8> {
    let model = load_model(&c.model)?;
    let sample = obtain_sample(&model, &c)?;
    let resolution = c.resolution.unwrap_or(c.s / 20.0);
    let cert = verify_density(&model, &sample, c.s, resolution)?;
    let dm = restrict_metric(&model, &sample)?;
    c.write("sample.json", &sample.to_json())?;
    c.write("density_certificate.json", &serde_json::to_string_pretty(&cert)?)?;
    c.write("distance_matrix.csv", &dm.to_csv())?;
    println!(
        "sampled {} points of {} (s = {}, seed = {}); max gap {} at resolution {}",
        sample.len(),
        model.model_id(),
        c.s,
        c.seed,
        cert.max_gap_found,
        cert.probe_resolution
    );
    if cert.verdict {
        println!("density certificate: pass");
        Ok(0)
    } else {
        println!("density certificate: FAIL (max gap {} >= s = {})", cert.max_gap_found, c.s);
        Ok(2)
    }
}

fn cmd_persist(c: Common) -> geopersist::Result<u8> {
    let model = load_model(&c.model)?;
    let field = c.field()?;
    let sample = obtain_sample(&model, &c)?;
    let rmax = resolve_rmax(&model, &c)?;
    let dm = restrict_metric(&model, &sample)?;
    let skel = build_filtration(&dm, rmax)?;
    let diagram = persist_h1(&skel, field);
    let known_deaths: Vec<f64> = model
        .known_diagram(field)
        .map(|k| k.intervals.iter().map(|iv| iv.death).collect())
        .unwrap_or_default();
    c.write("diagram.json", &diagram.to_json())?;
    c.write("diagram.svg", &svg::diagram_svg(&diagram, &known_deaths, c.s))?;
    c.write("skeleton.json", &skel.to_json())?;
    println!(
        "persisted {} points at rmax = {rmax} over F_{}: {} interval(s)",
        sample.len(),
        field.p(),
        diagram.intervals.len()
    );
    for iv in &diagram.intervals {
        let tag = if iv.censored { " (censored)" } else { "" };
        println!("  ({:.12}, {:.12}]{tag}", iv.birth, iv.death);
    }
    Ok(0)
}

fn cmd_verify_stability(c: Common) -> geopersist::Result<u8> {
    let model = load_model(&c.model)?;
    let field = c.field()?;
    let known = model.known_diagram(field)?;
    let sample = obtain_sample(&model, &c)?;
    let rmax = resolve_rmax(&model, &c)?;
    let diag_s = analysis::sample_diagram(&model, &sample, field, rmax)?;
    let report = analysis::verify_stability(&known, &diag_s, c.s)?;
    let known_deaths: Vec<f64> = known.intervals.iter().map(|iv| iv.death).collect();
    c.write("stability_report.json", &serde_json::to_string_pretty(&report)?)?;
    c.write("stability_panels.svg", &svg::stability_panels_svg(&known_deaths, &diag_s, c.s))?;
    c.write("diagram.json", &diag_s.to_json())?;
    if report.verdict {
        println!(
            "stability: pass ({} matched, {} diagonal, max birth {}, max spurious lifespan {})",
            report.matched.len(),
            report.diagonal.len(),
            report.max_sample_birth,
            report.max_spurious_lifespan
        );
        Ok(0)
    } else {
        println!("stability: FAIL");
        for v in &report.violations {
            println!("  {v}");
        }
        Ok(3)
    }
}

fn cmd_verify_order(args: OrderArgs) -> geopersist::Result<u8> {
    let c = &args.common;
    let model = load_model(&c.model)?;
    let field = c.field()?;
    let sample_a = sample_uniform(&model, c.s, c.seed, c.jitter)?;
    let seed_b = args.seed_b.unwrap_or(c.seed + 1);
    let sample_b = if args.nested {
        let mut b = sample_a.clone();
        let fine = sample_uniform(&model, c.s / 2.0, seed_b, true)?;
        for p in fine.points {
            if !b.points.iter().any(|q| model.distance(q, &p).unwrap_or(f64::INFINITY) < 1e-12) {
                b.points.push(p);
            }
        }
        b
    } else {
        sample_uniform(&model, c.s, seed_b, true)?
    };
    let r0 = 2.0 * c.s;
    let horizon = resolve_rmax(&model, c)?;
    let grid = [horizon];
    let icp_a = analysis::build_icp(&model, &sample_a, field, r0, &grid)?;
    let icp_b = analysis::build_icp(&model, &sample_b, field, r0, &grid)?;
    let eps = icp_a.eps_h.min(icp_b.eps_h);
    let p = r0 + 0.25 * (eps - r0).max(0.0);
    let cmp = analysis::compare_order(&icp_a, &icp_b, p, &grid)?;
    c.write("order_report.json", &serde_json::to_string_pretty(&cmp)?)?;
    let verdict = match cmp.verdict {
        OrderVerdict::Isomorphic => "isomorphic",
        OrderVerdict::ALeB => "H_A <= H_B",
        OrderVerdict::BLeA => "H_B <= H_A",
        OrderVerdict::Incomparable => "incomparable",
    };
    println!(
        "order at p = {p}: {verdict} (samples of {} and {} points{})",
        sample_a.len(),
        sample_b.len(),
        if args.nested { ", nested" } else { "" }
    );
    Ok(0)
}

fn cmd_verify_minimality(args: MinimalityArgs) -> geopersist::Result<u8> {
    let c = &args.common;
    let model = load_model(&c.model)?;
    let field = c.field()?;
    let circles = model.critical_circles()?;
    let enriched =
        enrich_with_critical_points(&model, &sample_uniform(&model, c.s, c.seed, false)?, &circles)?;
    let candidates: Vec<SampleSet> = (0..args.candidates)
        .map(|i| sample_uniform(&model, c.s, c.seed + 1 + i as u64, true))
        .collect::<geopersist::Result<_>>()?;
    let report = analysis::minimality_check(&model, field, c.s, &candidates, &enriched)?;
    c.write("minimality_report.json", &serde_json::to_string_pretty(&report)?)?;
    for (want, got) in &report.realization {
        println!("  realized death {got:.15} (expected {want:.15})");
    }
    if report.pass {
        println!("minimality: pass ({} candidates)", args.candidates);
        Ok(0)
    } else {
        println!("minimality: FAIL");
        Ok(3)
    }
}

fn cmd_nullhomotopy(args: NhArgs) -> geopersist::Result<u8> {
    let c = &args.common;
    let model = load_model(&c.model)?;
    let mut circles = model.critical_circles()?;
    let circle = match &args.circle {
        Some(label) => circles
            .iter()
            .position(|f| &f.label == label)
            .map(|i| circles.remove(i))
            .ok_or_else(|| Error::Argument(format!("no catalogue circle labelled {label}")))?,
        None => circles.remove(0),
    };
    let mode = match args.mode {
        Mode::Dense => NhMode::Dense,
        Mode::Equidistant => NhMode::Equidistant,
    };
    let sample = obtain_sample(&model, c)?;
    let nh = loops::build_nullhomotopy(&model, &circle, &sample, args.r, c.s, mode, args.delta)?;
    let dm = restrict_metric(&model, &sample)?;
    let verdict = loops::verify_nullhomotopy(&nh, &dm, args.r);
    c.write("nullhomotopy.json", &nh.to_json())?;
    c.write("nullhomotopy_verdict.json", &serde_json::to_string_pretty(&verdict)?)?;
    println!(
        "nullhomotopy of {} ({} triangles over a {}-gon): {}",
        circle.label,
        nh.triangles.len(),
        nh.boundary.indices.len(),
        if verdict.pass { "pass" } else { "FAIL" }
    );
    if let Some(v) = &verdict.first_violation {
        println!("  {v}");
    }
    Ok(if verdict.pass { 0 } else { 3 })
}

fn cmd_presentation(args: PresentationArgs) -> geopersist::Result<u8> {
    let c = &args.common;
    let model = load_model(&c.model)?;
    let sample = obtain_sample(&model, c)?;
    let rmax = c.rmax.unwrap_or(args.r);
    let dm = restrict_metric(&model, &sample)?;
    let skel = build_filtration(&dm, rmax.max(args.r))?;
    let cx = skel.complex_at(args.r)?;
    let component = pi1::component_of(&cx, 0);
    if component.iter().any(|&v| !v) {
        eprintln!(
            "warning: complex is disconnected at r = {}; restricting to the basepoint component",
            args.r
        );
    }
    let pres = pi1::edge_path_presentation(&cx, 0);
    let simplified = pi1::tietze_simplify(&pres, args.passes);
    let rank = pi1::abelianization_rank(&simplified, c.field()?);
    c.write("presentation.json", &simplified.to_json())?;
    c.write("presentation.txt", &format!("{}\n", simplified.to_text()))?;
    println!(
        "pi1(Rips(S, {})) = {} ({} generators, {} relators, abelianization rank {rank})",
        args.r,
        simplified.to_text(),
        simplified.generators.len(),
        simplified.relators.len()
    );
    Ok(0)
}
