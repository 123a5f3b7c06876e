use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use elastinet::analysis::{desingularize, el_residual, fan_network, train_tracks_network};
use elastinet::classify::{classify_network, square_angle_straightness, stratify, ClassifyOptions};
use elastinet::geometry::{elastic_energy, relaxed_energy, Network};
use elastinet::graph::{AngledGraph, ANGLE_TOL};
use elastinet::io::{self, ClassificationDoc, Loaded, MinimizeSummary, SquareAngleDoc};
use elastinet::optimize::{minimize_fixed_length, minimize_relaxed, MinimizeOptions};

/// Elastic networks on angled graphs: classification, minimization, analysis and constructions.
#[derive(Parser)]
#[command(name = "elastinet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a network (Regular / Degenerate / Inadmissible) or stratify a subgraph of a bare graph.
    Classify(ClassifyArgs),
    /// Minimize the relaxed elastic energy (or the bending energy at fixed lengths) on a graph.
    Minimize(MinimizeArgs),
    /// Energy breakdown and Euler–Lagrange residuals of a network.
    Analyze(AnalyzeArgs),
    /// Build explicit networks.
    Construct {
        #[command(subcommand)]
        kind: Construction,
    },
    /// Draw a network as SVG.
    Render(RenderArgs),
}

#[derive(Args)]
struct ClassifyArgs {
    /// Graph or network document.
    file: PathBuf,
    /// Also run the right-angle straightness test on the singular part (or the subgraph).
    #[arg(long)]
    square_angle: bool,
    /// Edge ids of the subgraph to stratify when the input is a bare graph [default: all edges].
    #[arg(long, value_delimiter = ',')]
    subgraph: Option<Vec<String>>,
    /// Tolerance for tangents measured on polylines.
    #[arg(long, default_value_t = ANGLE_TOL)]
    tangent_tol: f64,
    /// Write the structured report here.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MinimizeArgs {
    /// Graph document.
    file: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    /// Length weight (ignored with --fixed-lengths).
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Prescribed edge lengths, in edge order.
    #[arg(long, value_delimiter = ',')]
    fixed_lengths: Option<Vec<f64>>,
    /// Chords per edge.
    #[arg(long, default_value_t = 64)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    /// Iteration cap per inner quasi-Newton solve.
    #[arg(long, default_value_t = 5000)]
    max_iter: usize,
    /// Closure tolerance.
    #[arg(long, default_value_t = 1e-7)]
    tol_c: f64,
    /// Gradient tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol_g: f64,
    /// Resulting network.
    #[arg(short, long, default_value = "minimized.json")]
    output: PathBuf,
    /// Convergence log (iteration, objective, residual).
    #[arg(long, default_value = "convergence.csv")]
    log: PathBuf,
    /// Also write the summary here (it is always printed).
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Network document.
    file: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Per-edge energy table [default: stdout].
    #[arg(long)]
    energy_csv: Option<PathBuf>,
    /// Euler–Lagrange residual table [default: stdout].
    #[arg(long)]
    el_csv: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Construction {
    /// Two unit arcs joining parallel lines at offset H.
    TrainTracks {
        #[arg(long)]
        h: f64,
        /// Chords per arc.
        #[arg(long, default_value_t = 128)]
        half: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Arc of radius R and half-angle A between two flanking arcs.
    Fan {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 256)]
        samples: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Regular network approximating a degenerate one at scale EPS.
    Desingularize {
        file: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Chords per replaced edge.
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RenderArgs {
    /// Network document.
    file: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
    /// Pixels per unit length.
    #[arg(long, default_value_t = 200.0)]
    scale: f64,
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_network(path: &Path) -> Result<Network> {
    io::read_network(path).with_context(|| format!("{}", path.display()))
}

fn edge_indices(g: &AngledGraph, ids: &[String]) -> Result<Vec<usize>> {
    ids.iter()
        .map(|id| {
            g.edge_index(id)
                .with_context(|| format!("unknown edge {id:?}"))
        })
        .collect()
}

fn classify(args: &ClassifyArgs) -> Result<ExitCode> {
    let loaded =
        io::read_document(&args.file).with_context(|| format!("{}", args.file.display()))?;
    let opts = ClassifyOptions {
        tangent_tol: args.tangent_tol,
        ..Default::default()
    };
    let (mut doc, square_on) = match &loaded {
        Loaded::Network(n) => {
            if args.subgraph.is_some() {
                bail!("--subgraph applies to bare graphs only");
            }
            (
                ClassificationDoc::for_network(n, &classify_network(n, &opts)),
                n.singular_edges(),
            )
        }
        Loaded::Graph(g) => {
            let sub = match &args.subgraph {
                Some(ids) => edge_indices(g, ids)?,
                None => g.all_edges(),
            };
            (ClassificationDoc::for_subgraph(g, &stratify(g, &sub)), sub)
        }
    };
    if args.square_angle {
        let g = loaded.graph();
        let verdict = square_angle_straightness(g, &square_on).context("square-angle test")?;
        doc.square_angle = Some(SquareAngleDoc::new(g, &verdict));
    }
    print!("{}", doc.text());
    if let Some(out) = &args.output {
        write_or_print(Some(out), &io::to_json(&doc))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn minimize(args: &MinimizeArgs) -> Result<ExitCode> {
    let g = io::read_graph(&args.file).with_context(|| format!("{}", args.file.display()))?;
    let opts = MinimizeOptions {
        samples: args.samples,
        max_iter: args.max_iter,
        tol_c: args.tol_c,
        tol_g: args.tol_g,
        seed: args.seed,
        restarts: args.restarts,
        ..Default::default()
    };
    let result = match &args.fixed_lengths {
        Some(l) => minimize_fixed_length(&g, l, args.alpha, &opts)?,
        None => minimize_relaxed(&g, args.alpha, args.beta, &opts)?,
    };
    write_or_print(Some(&args.output), &io::network_json(&result.network))?;
    write_or_print(Some(&args.log), &io::log_csv(&result.log)?)?;
    let summary = io::to_json(&MinimizeSummary::new(&result));
    print!("{summary}");
    if let Some(p) = &args.summary {
        write_or_print(Some(p), &summary)?;
    }
    if result.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "warning: not converged (closure residual {:.3e}); best iterate written",
            result.closure_residual
        );
        Ok(ExitCode::from(2))
    }
}

fn analyze(args: &AnalyzeArgs) -> Result<ExitCode> {
    let n = load_network(&args.file)?;
    let breakdown = elastic_energy(&n, args.alpha, args.beta);
    let relaxed = relaxed_energy(&n, args.alpha, args.beta, &ClassifyOptions::default());
    let el = el_residual(&n, args.alpha, args.beta);
    eprintln!("energy: {}", breakdown.total);
    eprintln!("relaxed energy: {relaxed}");
    eprintln!("max interior EL residual: {}", el.max_interior());
    eprintln!("max junction EL residual: {}", el.max_junction());
    write_or_print(
        args.energy_csv.as_deref(),
        &io::energy_csv(n.graph(), &breakdown)?,
    )?;
    write_or_print(args.el_csv.as_deref(), &io::el_csv(n.graph(), &el)?)?;
    Ok(ExitCode::SUCCESS)
}

fn construct(kind: &Construction) -> Result<ExitCode> {
    let (network, output) = match kind {
        Construction::TrainTracks { h, half, output } => (train_tracks_network(*h, *half)?, output),
        Construction::Fan {
            r,
            a,
            samples,
            output,
        } => (fan_network(*r, *a, *samples)?, output),
        Construction::Desingularize {
            file,
            eps,
            samples,
            output,
        } => (desingularize(&load_network(file)?, *eps, *samples)?, output),
    };
    write_or_print(output.as_deref(), &io::network_json(&network))?;
    Ok(ExitCode::SUCCESS)
}

fn render(args: &RenderArgs) -> Result<ExitCode> {
    if !(args.scale > 0.0 && args.scale.is_finite()) {
        bail!("--scale must be positive");
    }
    let n = load_network(&args.file)?;
    write_or_print(Some(&args.output), &io::render_svg(&n, args.scale))?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            eprintln!("{}", msg.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(1);
        }
    };
    let outcome = match &cli.command {
        Command::Classify(a) => classify(a),
        Command::Minimize(a) => minimize(a),
        Command::Analyze(a) => analyze(a),
        Command::Construct { kind } => construct(kind),
        Command::Render(a) => render(a),
    };
    outcome.unwrap_or_else(|e| {
        // sources are often already embedded in their parent's message
        let mut parts: Vec<String> = Vec::new();
        for cause in e.chain() {
            let msg = cause.to_string().replace('\n', " ");
            if !parts.last().is_some_and(|p| p.contains(&msg)) {
                parts.push(msg);
            }
        }
        eprintln!("error: {}", parts.join(": "));
        ExitCode::from(1)
    })
}
