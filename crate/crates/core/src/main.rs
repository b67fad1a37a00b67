use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use xppkit::analysis::{build_manifold, find_zero_average, get_trj, slow_manifold_projection};
use xppkit::autorepo::{parse_auto, AutoRepo, BifurcationDiagram, LoadOptions};
use xppkit::export::{
    dump, emit_diagram_plot, emit_eig_plot, emit_labeled_points_plot, emit_nullclines_plot, emit_sim_plot,
    write_points, DumpFormat, DumpTarget, PeriodicBranchMode, PlotStyle,
};
use xppkit::expr::parse_expr;
use xppkit::model::{parse_model, Model};
use xppkit::tables::{parse_data, parse_nullclines};

/// Environment variable naming a JSON style file applied before `--style-file`.
const STYLE_ENV: &str = "XPPKIT_STYLE";

#[derive(Parser)]
#[command(name = "xppkit", version, about = "Inspect, analyze and plot XPPAUT files")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the load transcript and one summary line per diagram.
    Info(InfoArgs),
    /// Plot a bifurcation diagram with its labeled points.
    Plot(PlotArgs),
    /// Plot eigenvalue or Floquet multiplier loci.
    Eig(EigArgs),
    /// Plot a nullcline file.
    Nullclines(NullclineArgs),
    /// Plot two columns of a simulation table.
    Sim(SimArgs),
    /// Average an expression over every special trajectory of a diagram.
    Avg(AvgArgs),
    /// Stack the special trajectories of a diagram into a surface.
    Manifold(ManifoldArgs),
    /// Write a freeze file, a JSON dump or CSV tables.
    Export(ExportArgs),
}

#[derive(Args)]
struct RepoArgs {
    /// Model file (.ode).
    #[arg(long)]
    ode: PathBuf,
    /// Continuation file (.auto).
    #[arg(long)]
    auto: PathBuf,
}

#[derive(Args)]
struct BdArgs {
    #[command(flatten)]
    repo: RepoArgs,
    /// Diagram name (BD1_i0) or 1-based ordinal; the last diagram by default.
    /// `plot` accepts a comma-separated list drawn into one figure.
    #[arg(long)]
    bd: Option<String>,
}

#[derive(Args, Default)]
struct StyleArgs {
    /// Style override `key=value`, e.g. `SEQ.color=0,0,1` or `font_size=14`.
    #[arg(long = "style", value_name = "KEY=VALUE")]
    style: Vec<String>,
    /// JSON style document patched over the defaults.
    #[arg(long)]
    style_file: Option<PathBuf>,
}

#[derive(Args)]
struct InfoArgs {
    #[command(flatten)]
    repo: RepoArgs,
    /// Skip labeled points (and with them all orbits).
    #[arg(long)]
    no_labels: bool,
    /// Skip orbits.
    #[arg(long)]
    no_trajectories: bool,
}

#[derive(Args)]
struct PlotArgs {
    #[command(flatten)]
    bd: BdArgs,
    /// Two or three axes: parameters, dynamical variables, L2, T or F.
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
    /// standard, lower, upper, initial or average.
    #[arg(long, default_value = "standard")]
    mode: PeriodicBranchMode,
    /// Keep only these branches (1-based).
    #[arg(long, value_delimiter = ',')]
    branches: Option<Vec<usize>>,
    /// Labeled points to show (1-based), in addition to those of --branches.
    #[arg(long, value_delimiter = ',')]
    points: Option<Vec<usize>>,
    /// Leave out the labeled point markers.
    #[arg(long)]
    no_labels: bool,
    #[command(flatten)]
    style: StyleArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EigArgs {
    #[command(flatten)]
    bd: BdArgs,
    /// Axes, e.g. `i0,EigR,EigI` or `EigR,EigI`.
    #[arg(long, value_delimiter = ',', default_value = "EigR,EigI")]
    vars: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    branches: Option<Vec<usize>>,
    #[command(flatten)]
    style: StyleArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct NullclineArgs {
    /// Nullcline file named `[text]_x_y.dat`.
    #[arg(long)]
    nc: PathBuf,
    /// Put the second variable on the horizontal axis.
    #[arg(long)]
    swap: bool,
    #[command(flatten)]
    style: StyleArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long)]
    ode: PathBuf,
    /// Simulation table (.dat).
    #[arg(long)]
    dat: PathBuf,
    #[arg(long, default_value = "t")]
    x: String,
    #[arg(long)]
    y: String,
    #[command(flatten)]
    style: StyleArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AvgArgs {
    #[command(flatten)]
    bd: BdArgs,
    /// Integrand over orbit samples, hot parameters, T, model parameters and --bind names.
    #[arg(long)]
    expr: String,
    /// Extra binding `name=value`; repeatable.
    #[arg(long, value_name = "NAME=VALUE")]
    bind: Vec<String>,
    /// Parameter reported per trajectory; the main continuation parameter by default.
    #[arg(long)]
    param: Option<String>,
    /// Also write the table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ManifoldArgs {
    #[command(flatten)]
    bd: BdArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    vars: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    pars: Vec<String>,
    /// Keep only the last sample of each trajectory.
    #[arg(long)]
    projection: bool,
    /// `.json` for a JSON document; anything else is a CSV file (projection)
    /// or directory (surface).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    bd: BdArgs,
    /// Axis pair for the freeze file.
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
    /// Freeze file for the selected one-parameter diagram.
    #[arg(long)]
    freeze: Option<PathBuf>,
    /// JSON dump of the whole repository.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Directory of per-branch CSV files for the selected diagram.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// A failure with its exit code: 1 usage, 2 input parsing, 3 analysis or output.
struct Failure {
    code: u8,
    file: Option<String>,
    msg: String,
}

impl Failure {
    fn usage(msg: impl Into<String>) -> Failure {
        Failure { code: 1, file: None, msg: msg.into() }
    }
    fn parse(file: &Path, e: impl std::fmt::Display) -> Failure {
        Failure { code: 2, file: Some(file.display().to_string()), msg: e.to_string() }
    }
    fn analysis(file: Option<&Path>, e: impl std::fmt::Display) -> Failure {
        Failure { code: 3, file: file.map(|f| f.display().to_string()), msg: e.to_string() }
    }
}

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Failure::parse(path, e))
}

fn load_model(path: &Path) -> Res<Model> {
    parse_model(&read(path)?).map_err(|e| Failure::parse(path, e))
}

fn load_repo(args: &RepoArgs, opts: LoadOptions) -> Res<(Model, AutoRepo, xppkit::LoadReport)> {
    let model = load_model(&args.ode)?;
    let (repo, report) = parse_auto(&model, &read(&args.auto)?, opts).map_err(|e| Failure::parse(&args.auto, e))?;
    Ok((model, repo, report))
}

fn pick<'a>(repo: &'a AutoRepo, sel: Option<&str>) -> Res<&'a BifurcationDiagram> {
    repo.diagram(sel).ok_or_else(|| {
        let names: Vec<_> = repo.diagrams.iter().map(|d| d.name.as_str()).collect();
        Failure::usage(format!(
            "no diagram `{}`; available: {}",
            sel.unwrap_or(""),
            if names.is_empty() { "none".to_string() } else { names.join(", ") }
        ))
    })
}

fn load_style(args: &StyleArgs) -> Res<PlotStyle> {
    let mut style = PlotStyle::default();
    let mut files: Vec<PathBuf> = Vec::new();
    if let Some(p) = std::env::var_os(STYLE_ENV).filter(|p| !p.is_empty()) {
        files.push(PathBuf::from(p));
    }
    files.extend(args.style_file.iter().cloned());
    for f in files {
        let v: serde_json::Value = serde_json::from_str(&read(&f)?).map_err(|e| Failure::parse(&f, e))?;
        style.patch_json(&v).map_err(|e| Failure::parse(&f, e))?;
    }
    for kv in &args.style {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure::usage(format!("--style `{}` is not KEY=VALUE", kv)))?;
        style.apply(k.trim(), v.trim()).map_err(|e| Failure::usage(e.to_string()))?;
    }
    Ok(style)
}

fn write_out(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| Failure::analysis(Some(path), e))
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn info(a: InfoArgs) -> Res<()> {
    let opts = LoadOptions { labeled_points: !a.no_labels, trajectories: !a.no_trajectories };
    let (_, repo, report) = load_repo(&a.repo, opts)?;
    print!("{}", report.render(&repo));
    Ok(())
}

fn plot(a: PlotArgs) -> Res<()> {
    let style = load_style(&a.style)?;
    let (model, repo, _) = load_repo(&a.bd.repo, LoadOptions { labeled_points: !a.no_labels, trajectories: false })?;
    // several diagrams may be drawn into one plot: --bd BD1_i0,BD2_i0_gk
    let selectors: Vec<Option<&str>> = match a.bd.bd.as_deref() {
        None => vec![None],
        Some(s) => s.split(',').map(|x| Some(x.trim())).collect(),
    };
    let vars = a.vars.as_deref().map(strs);
    let file = Some(a.bd.repo.auto.as_path());
    let mut plot: Option<xppkit::export::Plot> = None;
    for sel in selectors {
        let bd = pick(&repo, sel)?;
        let mut p = emit_diagram_plot(&model, bd, vars.as_deref(), a.mode, &style, a.branches.as_deref())
            .map_err(|e| Failure::analysis(file, e))?;
        if !a.no_labels {
            let overlay = emit_labeled_points_plot(
                &model,
                bd,
                vars.as_deref(),
                a.mode,
                &style,
                a.branches.as_deref(),
                a.points.as_deref(),
            )
            .map_err(|e| Failure::analysis(file, e))?;
            p.overlay(overlay);
        }
        match &mut plot {
            None => plot = Some(p),
            Some(acc) => {
                acc.title = format!("{} + {}", acc.title, p.title);
                acc.overlay(p);
            }
        }
    }
    write_out(&a.out, &plot.expect("at least one diagram").to_svg(&style))
}

fn eig(a: EigArgs) -> Res<()> {
    let style = load_style(&a.style)?;
    let (model, repo, _) = load_repo(&a.bd.repo, LoadOptions { labeled_points: true, trajectories: false })?;
    let bd = pick(&repo, a.bd.bd.as_deref())?;
    let p = emit_eig_plot(&model, bd, &strs(&a.vars), &style, a.branches.as_deref())
        .map_err(|e| Failure::analysis(Some(&a.bd.repo.auto), e))?;
    write_out(&a.out, &p.to_svg(&style))
}

fn nullclines(a: NullclineArgs) -> Res<()> {
    let style = load_style(&a.style)?;
    let nc = parse_nullclines(&a.nc).map_err(|e| Failure::parse(&a.nc, e))?;
    let axes = a.swap.then_some([nc.y_var.as_str(), nc.x_var.as_str()]);
    let p = emit_nullclines_plot(&nc, axes, &style).map_err(|e| Failure::analysis(Some(&a.nc), e))?;
    write_out(&a.out, &p.to_svg(&style))
}

fn sim(a: SimArgs) -> Res<()> {
    let style = load_style(&a.style)?;
    let model = load_model(&a.ode)?;
    let table = parse_data(&model, &read(&a.dat)?).map_err(|e| Failure::parse(&a.dat, e))?;
    let p = emit_sim_plot(&table, &a.x, &a.y, &style).map_err(|e| Failure::analysis(Some(&a.dat), e))?;
    write_out(&a.out, &p.to_svg(&style))
}

fn avg(a: AvgArgs) -> Res<()> {
    let (model, repo, _) = load_repo(&a.bd.repo, LoadOptions::default())?;
    let bd = pick(&repo, a.bd.bd.as_deref())?;
    let e = parse_expr(&a.expr).map_err(|e| Failure::usage(format!("--expr: {}", e)))?;
    let mut env: HashMap<String, f64> =
        model.parameters.iter().filter(|(k, _)| bd.hot_index(k).is_none()).map(|(k, v)| (k.clone(), *v)).collect();
    for kv in &a.bind {
        let (k, v) = kv.split_once('=').ok_or_else(|| Failure::usage(format!("--bind `{}` is not NAME=VALUE", kv)))?;
        let v: f64 =
            v.trim().parse().map_err(|_| Failure::usage(format!("--bind `{}`: `{}` is not a number", kv, v)))?;
        env.insert(k.trim().to_string(), v);
    }
    let file = Some(a.bd.repo.auto.as_path());
    let trj = get_trj(bd).map_err(|e| Failure::analysis(file, e))?;
    let param = a.param.clone().unwrap_or_else(|| bd.params[0].clone());
    let z = find_zero_average(&trj, &e, &env, &param).map_err(|e| Failure::analysis(file, e))?;
    println!("nTRJ: {}", trj.len());
    println!("{:>8} {:>18} {:>18}  label", "TRJ", param, "J");
    for (k, t) in trj.iter().enumerate() {
        println!("{:>8} {:>18.10e} {:>18.10e}  {}", t.name, z.c[k], z.j[k], t.source_label);
    }
    println!("BZ: {} ({} = {}, J = {:e})", z.bz, param, z.c[z.index], z.j[z.index]);
    if let Some(out) = &a.out {
        dump(DumpTarget::ZeroAverage(&z), DumpFormat::Csv, out).map_err(|e| Failure::analysis(Some(out), e))?;
    }
    Ok(())
}

fn is_json(p: &Path) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

fn manifold(a: ManifoldArgs) -> Res<()> {
    let (_, repo, _) = load_repo(&a.bd.repo, LoadOptions::default())?;
    let bd = pick(&repo, a.bd.bd.as_deref())?;
    let file = Some(a.bd.repo.auto.as_path());
    let trj = get_trj(bd).map_err(|e| Failure::analysis(file, e))?;
    let fmt = if is_json(&a.out) { DumpFormat::Json } else { DumpFormat::Csv };
    let written = if a.projection {
        let p = slow_manifold_projection(&trj, &strs(&a.vars)).map_err(|e| Failure::analysis(file, e))?;
        dump(DumpTarget::Projection(&p), fmt, &a.out)
    } else {
        let s = build_manifold(&trj, &strs(&a.vars), &strs(&a.pars)).map_err(|e| Failure::analysis(file, e))?;
        let (r, c) = s.shape();
        eprintln!("surface: {} x {}", r, c);
        dump(DumpTarget::Surface(&s), fmt, &a.out)
    }
    .map_err(|e| Failure::analysis(Some(&a.out), e))?;
    for w in written {
        println!("{}", w.display());
    }
    Ok(())
}

fn export(a: ExportArgs) -> Res<()> {
    if a.freeze.is_none() && a.json.is_none() && a.csv.is_none() {
        return Err(Failure::usage("nothing to do: give --freeze, --json or --csv"));
    }
    let (model, repo, _) = load_repo(&a.bd.repo, LoadOptions::default())?;
    let bd = pick(&repo, a.bd.bd.as_deref())?;
    if let Some(out) = &a.freeze {
        let pair = match a.vars.as_deref() {
            None => None,
            Some([x, y]) => Some([x.as_str(), y.as_str()]),
            Some(v) => return Err(Failure::usage(format!("--vars takes two names for --freeze, got {}", v.len()))),
        };
        let text = write_points(&model, bd, pair).map_err(|e| Failure::analysis(Some(&a.bd.repo.auto), e))?;
        write_out(out, &text)?;
    }
    if let Some(out) = &a.json {
        dump(DumpTarget::Repo(&repo), DumpFormat::Json, out).map_err(|e| Failure::analysis(Some(out), e))?;
    }
    if let Some(out) = &a.csv {
        dump(DumpTarget::Diagram(bd), DumpFormat::Csv, out).map_err(|e| Failure::analysis(Some(out), e))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();
    let (name, result) = match cli.cmd {
        Cmd::Info(a) => ("info", info(a)),
        Cmd::Plot(a) => ("plot", plot(a)),
        Cmd::Eig(a) => ("eig", eig(a)),
        Cmd::Nullclines(a) => ("nullclines", nullclines(a)),
        Cmd::Sim(a) => ("sim", sim(a)),
        Cmd::Avg(a) => ("avg", avg(a)),
        Cmd::Manifold(a) => ("manifold", manifold(a)),
        Cmd::Export(a) => ("export", export(a)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match f.file {
                Some(file) => eprintln!("xppkit {}: {}: {}", name, file, f.msg),
                None => eprintln!("xppkit {}: {}", name, f.msg),
            }
            ExitCode::from(f.code)
        }
    }
}
