use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use mcf_core::acceptance;
use mcf_core::dilog::dt_invariant_check;
use mcf_core::enumeration::{enumerate_mgs, longest_mgs, ExchangeGraph, Parity, DEFAULT_NODE_CAP};
use mcf_core::fans::{configuration_of_state, fan_algebra, fan_wall_set};
use mcf_core::finrep::RepTable;
use mcf_core::render::{
    fan_scene_walls, render_picture, Projection, RenderError, RenderOptions, SceneWall, Style, DEFAULT_POLE,
    DEFAULT_SAMPLES,
};
use mcf_core::{MutationContext, ValuedQuiver};

#[derive(Parser)]
#[command(name = "mcf", version, about = "Slope-graded mutation of m-cluster categories")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exchange graph of m-clusters as JSON.
    Enumerate(Enumerate),
    /// Maximal green sequences.
    Mgs(Mgs),
    /// Horizontal and vertical fan components with their algebras.
    Fans(Fans),
    /// Stability walls of every indecomposable module.
    Walls(Walls),
    /// SVG picture of the walls, or one picture per fan component.
    Render(Render),
    /// Quantum dilogarithm products along maximal green sequences.
    Dilog(Dilog),
    /// Runs the acceptance suite.
    Verify(Verify),
}

#[derive(Args)]
struct Target {
    /// Preset name (a2, a3, a2tilde, d4, b2, g2, aN, a_n:<orientation>) or quiver JSON file.
    #[arg(long)]
    quiver: String,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    m: u32,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum ParityArg {
    Horizontal,
    Vertical,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Horizontal => Parity::Horizontal,
            ParityArg::Vertical => Parity::Vertical,
        }
    }
}

#[derive(Args)]
struct Enumerate {
    #[command(flatten)]
    target: Target,
    #[arg(long, env = "MCF_NODE_CAP", default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct Mgs {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value_t = 20)]
    depth_cap: usize,
    /// Print only the length of the longest sequence.
    #[arg(long)]
    longest: bool,
    #[arg(long, env = "MCF_NODE_CAP", default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct Fans {
    #[command(flatten)]
    target: Target,
    /// Restrict to one parity; both are reported by default.
    #[arg(long, value_enum)]
    parity: Option<ParityArg>,
    #[arg(long, env = "MCF_NODE_CAP", default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct Walls {
    #[command(flatten)]
    target: Target,
}

#[derive(Args)]
struct Render {
    #[command(flatten)]
    target: Target,
    /// Output file, or a directory when --parity is given.
    #[arg(long)]
    out: PathBuf,
    /// Render one picture per fan component of this parity.
    #[arg(long, value_enum)]
    parity: Option<ParityArg>,
    /// Projection pole as "x,y,z".
    #[arg(long)]
    pole: Option<String>,
    #[arg(long, env = "MCF_SAMPLES", default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, env = "MCF_NODE_CAP", default_value_t = DEFAULT_NODE_CAP)]
    node_cap: usize,
}

#[derive(Args)]
struct Dilog {
    #[command(flatten)]
    target: Target,
    #[arg(long, default_value_t = 6)]
    truncate: u32,
    #[arg(long, default_value_t = 20)]
    depth_cap: usize,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct Verify {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

/// Errors in the user's input, reported with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Usage(msg.into()).into())
}

fn context(t: &Target) -> Result<Arc<MutationContext>> {
    let q = match ValuedQuiver::resolve(&t.quiver) {
        Ok(q) => q,
        Err(e) => return usage(e.to_string()),
    };
    MutationContext::new(q, t.m).map_err(|e| Usage(e.to_string()).into())
}

fn table(q: &ValuedQuiver) -> Result<RepTable> {
    RepTable::build(q).map_err(|e| Usage(e.to_string()).into())
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn picture(rank: usize, walls: &[SceneWall], opts: &RenderOptions) -> Result<String> {
    render_picture(rank, walls, opts).map_err(|e| match e {
        RenderError::PoleOnWall(_) => Usage(e.to_string()).into(),
        other => other.into(),
    })
}

fn graph(ctx: &Arc<MutationContext>, cap: usize) -> Result<ExchangeGraph> {
    ExchangeGraph::build(ctx, cap).context("exchange graph")
}

fn enumerate(a: &Enumerate) -> Result<()> {
    let ctx = context(&a.target)?;
    let g = graph(&ctx, a.node_cap)?;
    match a.format {
        Format::Json => print_json(&g.to_json()),
        Format::Text => {
            println!("count: {}", g.node_count());
            println!("edges: {}", g.edges().len());
            println!("terminals: {}", g.terminals().len());
            Ok(())
        }
    }
}

fn mgs(a: &Mgs) -> Result<()> {
    let ctx = context(&a.target)?;
    if a.longest {
        let n = longest_mgs(&ctx, a.node_cap).context("longest sequence")?;
        return match a.format {
            Format::Json => print_json(&json!({ "longest": n })),
            Format::Text => {
                println!("{n}");
                Ok(())
            }
        };
    }
    let res = enumerate_mgs(&ctx, a.depth_cap)?;
    if res.truncated {
        eprintln!("note: some branches exceeded depth cap {}", a.depth_cap);
    }
    match a.format {
        Format::Json => {
            let mut v = serde_json::to_value(res.to_json())?;
            v["count"] = json!(res.records.len());
            print_json(&v)
        }
        Format::Text => {
            println!("count: {}", res.records.len());
            for r in &res.records {
                let ks: Vec<String> = r.mutations.iter().map(|k| (k + 1).to_string()).collect();
                println!("{}", ks.join(","));
            }
            Ok(())
        }
    }
}

fn parities(p: Option<ParityArg>) -> Vec<Parity> {
    match p {
        Some(p) => vec![p.into()],
        None => vec![Parity::Horizontal, Parity::Vertical],
    }
}

fn parity_name(p: Parity) -> &'static str {
    match p {
        Parity::Horizontal => "horizontal",
        Parity::Vertical => "vertical",
    }
}

fn fans(a: &Fans) -> Result<()> {
    let ctx = context(&a.target)?;
    let g = graph(&ctx, a.node_cap)?;
    // fan algebras need module data, which exists only in simply-laced finite type
    let t = RepTable::build(ctx.quiver()).ok();
    let mut out = serde_json::Map::new();
    for p in parities(a.parity) {
        let mut comps = Vec::new();
        for comp in g.fan_components(p) {
            let keys: Vec<&str> = comp.iter().map(|&i| g.nodes()[i].key.as_str()).collect();
            let mut entry = json!({ "size": comp.len(), "nodes": keys });
            if let Some(t) = &t {
                let x = configuration_of_state(t, &g.nodes()[comp[0]].state)?;
                let alg = fan_algebra(t, &x, p)?;
                entry["algebra"] = serde_json::to_value(alg.to_json(t))?;
                entry["label"] = json!(alg.label(t));
            }
            comps.push(entry);
        }
        out.insert(parity_name(p).into(), json!({ "count": comps.len(), "components": comps }));
    }
    match a.format {
        Format::Json => print_json(&Value::Object(out)),
        Format::Text => {
            for (name, v) in &out {
                let sizes: Vec<String> =
                    v["components"].as_array().into_iter().flatten().map(|c| c["size"].to_string()).collect();
                println!("{name}: {} components, sizes {}", v["count"], sizes.join(" "));
            }
            Ok(())
        }
    }
}

fn walls(a: &Walls) -> Result<()> {
    let ctx = context(&a.target)?;
    let t = table(ctx.quiver())?;
    let mut out = Vec::new();
    for i in 0..t.len() {
        let dim = &t.get(i).dim;
        out.push(json!({ "module": t.module_name(dim, "PSI"), "dim": dim, "wall": t.wall_of(i)? }));
    }
    print_json(&out)
}

fn parse_pole(s: &str) -> Result<Projection> {
    let parts: Vec<f64> = match s.split(',').map(|p| p.trim().parse::<f64>()).collect() {
        Ok(v) => v,
        Err(_) => return usage(format!("--pole expects x,y,z, got {s:?}")),
    };
    let Ok(arr) = <[f64; 3]>::try_from(parts) else {
        return usage(format!("--pole expects three coordinates, got {s:?}"));
    };
    Projection::from_pole(arr).map_err(|e| Usage(e.to_string()).into())
}

fn write_svg(path: &Path, svg: &str) -> Result<()> {
    std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))
}

fn render(a: &Render) -> Result<()> {
    let ctx = context(&a.target)?;
    let t = table(ctx.quiver())?;
    let rank = ctx.n();
    let opts = RenderOptions {
        projection: a.pole.as_deref().map(parse_pole).transpose()?.unwrap_or(Projection::from_pole(DEFAULT_POLE)?),
        samples: a.samples,
        markers: Vec::new(),
    };
    let Some(parity) = a.parity else {
        let walls: Vec<SceneWall> = (0..t.len())
            .map(|i| -> Result<SceneWall> {
                Ok(SceneWall {
                    id: i,
                    wall: t.wall_of(i)?,
                    style: Style::Black,
                    label: Some(t.module_name(&t.get(i).dim, "PSI")),
                })
            })
            .collect::<Result<_>>()?;
        write_svg(&a.out, &picture(rank, &walls, &opts)?)?;
        return print_json(&json!({ "out": a.out, "walls": walls.len() }));
    };
    let parity: Parity = parity.into();
    let g = graph(&ctx, a.node_cap)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut files = Vec::new();
    for (i, comp) in g.fan_components(parity).iter().enumerate() {
        let x = configuration_of_state(&t, &g.nodes()[comp[0]].state)?;
        let walls = fan_scene_walls(&t, &fan_wall_set(&t, &x, parity)?);
        let path = a.out.join(format!("{}-{:03}.svg", parity_name(parity), i + 1));
        write_svg(&path, &picture(rank, &walls, &opts)?)?;
        files.push(json!({ "file": path, "label": fan_algebra(&t, &x, parity)?.label(&t), "walls": walls.len() }));
    }
    print_json(&json!({ "parity": parity_name(parity), "pictures": files }))
}

fn dilog(a: &Dilog) -> Result<()> {
    let ctx = context(&a.target)?;
    let res = enumerate_mgs(&ctx, a.depth_cap)?;
    if res.records.is_empty() {
        bail!("no maximal green sequence within depth {}", a.depth_cap);
    }
    let rep = dt_invariant_check(&ctx, &res.records, a.truncate)?;
    match a.format {
        Format::Json => print_json(&json!({
            "sequences": res.records.len(),
            "truncation": a.truncate,
            "consistent": rep.consistent(),
            "classes": rep.classes,
            "series": rep.series.as_ref().map(|s| s.to_json()),
        })),
        Format::Text => {
            println!("sequences: {}", res.records.len());
            println!("classes: {}", rep.classes.len());
            println!("consistent: {}", rep.consistent());
            Ok(())
        }
    }
}

fn verify(a: &Verify) -> Result<bool> {
    let mut results = Vec::new();
    for id in 1..=acceptance::CRITERIA.len() {
        let r = acceptance::run_criterion(id).expect("known criterion");
        if matches!(a.format, Format::Text) {
            println!("{}", r.line());
        }
        results.push(r);
    }
    let passed = results.iter().all(|r| r.passed);
    match a.format {
        Format::Json => print_json(&json!({ "passed": passed, "criteria": results }))?,
        Format::Text => println!("{}/{} criteria passed", results.iter().filter(|r| r.passed).count(), results.len()),
    }
    Ok(passed)
}

fn run(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::Enumerate(a) => enumerate(a)?,
        Command::Mgs(a) => mgs(a)?,
        Command::Fans(a) => fans(a)?,
        Command::Walls(a) => walls(a)?,
        Command::Render(a) => render(a)?,
        Command::Dilog(a) => dilog(a)?,
        Command::Verify(a) => return verify(a),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
