mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use parsets_core::contents::{
    average_content, check_isoperimetric, check_kneser, check_lm34, check_sandwich, check_stacho, check_vw_identity,
    content_bounds, estimate_dimension_in, grid_tolerance, CheckReport, ContentKind, Gauge, Window,
};
use parsets_core::io::{parse_pbm, parse_points, parse_profile, parse_voxels, read_to_string, write_profile};
use parsets_core::selfsimilar::{analyze_ifs, cantor_dust_ifs, gasket_ifs, r_function, AnalyzeOptions, IFSystem};
use parsets_core::stochastic::{asymptotic_table, mean_sausage_surface, mean_sausage_volume, sausage_ensemble, EnsembleOptions};
use parsets_core::{
    exact_edt, geometric_radii, make_grid, mask_from_points, sample_profile, shape_grid, shape_profile, BinaryMask,
    RadialProfile, Shape,
};

use output::{write_csv, write_json, Envelope};

/// Parallel-set volume and surface profiles, content estimates and checks.
#[derive(Parser, Debug)]
#[command(name = "parsets", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Profile of a built-in shape (grid estimate compared with the exact formulas).
    Shape(ShapeArgs),
    /// Profile of a set read from a PBM image, a voxel file or a point list.
    Grid(GridArgs),
    /// Renewal integral and contents of a self-similar set.
    Ifs(IfsArgs),
    /// Wiener sausage ensemble, mean formulas and small-radius asymptotics.
    Wiener(WienerArgs),
    /// Inequality and identity checks on a profile CSV.
    Check(CheckArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct RadiiArgs {
    /// Smallest radius (default depends on the command).
    #[arg(long)]
    rmin: Option<f64>,
    /// Largest radius.
    #[arg(long)]
    rmax: Option<f64>,
    /// Radii per octave.
    #[arg(long, default_value_t = 8)]
    per_octave: usize,
}

#[derive(Args, Debug, Serialize)]
struct ShapeArgs {
    /// `disk:R`, `ball:R`, `square:A`, `segment:L`, `twoseg:L:A`, `point`, `point:3` or `gasket`.
    shape: String,
    /// Cells per axis.
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[command(flatten)]
    radii: RadiiArgs,
    /// Write the exact profile instead of a grid estimate.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct GridArgs {
    /// `.pbm` image, voxel text file (`.vox`/`.txt`) or point list (`.csv`).
    input: PathBuf,
    /// Cells per axis for point lists.
    #[arg(long, default_value_t = 1024)]
    n: usize,
    #[command(flatten)]
    radii: RadiiArgs,
    /// Exponent for the content estimates (default: fitted dimension).
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct IfsArgs {
    /// Function system JSON, or `gasket` / `cantor` for the built-in systems.
    input: String,
    #[arg(long, default_value_t = 4096)]
    n: usize,
    /// Smallest radius relative to the attractor extent (default: 40 cells).
    #[arg(long)]
    rmin: Option<f64>,
    #[arg(long, default_value_t = 8)]
    per_octave: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct WienerArgs {
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 20)]
    replicas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Path steps per replica.
    #[arg(long, default_value_t = 100_000)]
    steps: usize,
    /// Cells per axis of each replica grid.
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[command(flatten)]
    radii: RadiiArgs,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct CheckArgs {
    /// Profile CSV as written by the other commands.
    profile: PathBuf,
    /// Exponent for the gauge, the vw identity and the lm34 check (default: fitted dimension).
    #[arg(long)]
    s: Option<f64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn radii_or(args: &RadiiArgs, rmin: f64, rmax: f64) -> Result<Vec<f64>> {
    let lo = args.rmin.unwrap_or(rmin);
    let hi = args.rmax.unwrap_or(rmax);
    Ok(geometric_radii(lo, hi, args.per_octave)?)
}

fn run_shape(a: &ShapeArgs) -> Result<ExitCode> {
    let shape: Shape = a.shape.parse()?;
    let b = shape.bbox();
    let extent = (0..b.dim()).map(|k| b.max[k] - b.min[k]).fold(0.0, f64::max).max(1.0);
    let r_max = a.radii.rmax.unwrap_or(match shape {
        Shape::TwoSegments { half_gap, .. } => half_gap,
        _ => 0.2 * extent,
    });
    let env = Envelope::new("shape", a);
    if a.exact {
        let radii = radii_or(&a.radii, r_max / 1000.0, r_max)?;
        let p = shape_profile(&shape, &radii)?;
        std::fs::create_dir_all(&a.out)?;
        output::write_text(&a.out.join("profile.csv"), &write_profile(&p))?;
        write_json(&a.out.join("shape.json"), &env.finish(json!({"shape": shape, "source": "analytic"}), json!({})))?;
        return Ok(ExitCode::SUCCESS);
    }
    let grid = shape_grid(&shape, a.n, a.radii.rmax.unwrap_or(r_max))?;
    let radii = radii_or(&a.radii, 4.0 * grid.h(), r_max)?;
    let field = exact_edt(&shape.rasterize(&grid)?)?;
    let mut p = sample_profile(&field, &radii)?;
    if shape.v0() == 0.0 {
        p.v0 = 0.0;
    }
    let mut rows = Vec::new();
    let (mut worst_v, mut worst_s) = (0.0_f64, 0.0_f64);
    for k in 0..p.len() {
        let r = p.radii[k];
        let exact = shape.exact(r).ok();
        let (ev, es) = exact.map_or((f64::NAN, f64::NAN), |(v, s)| (p.volume[k] / v - 1.0, p.surface[k] / s - 1.0));
        if exact.is_some() {
            worst_v = worst_v.max(ev.abs());
            worst_s = worst_s.max(es.abs());
        }
        let (v, s) = exact.unwrap_or((f64::NAN, f64::NAN));
        rows.push(vec![r, p.volume[k], p.surface[k], v, s, ev, es]);
    }
    std::fs::create_dir_all(&a.out)?;
    output::write_text(&a.out.join("profile.csv"), &write_profile(&p))?;
    write_csv(&a.out.join("oracle.csv"), &["r", "V", "S_level", "V_exact", "S_exact", "V_rel_err", "S_rel_err"], &rows)?;
    let result = json!({
        "shape": shape,
        "worst_volume_rel_err": worst_v,
        "worst_surface_rel_err": worst_s,
        "touching_values": shape.touching_values(),
    });
    let meta = json!({"grid": grid, "cell_size": grid.h(), "grid_tolerance": grid_tolerance()});
    write_json(&a.out.join("oracle.json"), &env.finish(result, meta))?;
    Ok(ExitCode::SUCCESS)
}

fn load_mask(a: &GridArgs, r_max: f64) -> Result<BinaryMask> {
    let text = read_to_string(&a.input)?;
    let ext = a.input.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    Ok(match ext.as_str() {
        "pbm" => parse_pbm(&text)?,
        "csv" => {
            let pts = parse_points(&text)?;
            let dim = pts[0].len();
            let mut min = vec![f64::INFINITY; dim];
            let mut max = vec![f64::NEG_INFINITY; dim];
            for p in &pts {
                for k in 0..dim {
                    min[k] = min[k].min(p[k]);
                    max[k] = max[k].max(p[k]);
                }
            }
            let extent = (0..dim).map(|k| max[k] - min[k]).fold(0.0, f64::max);
            let pad = r_max + 4.0 * (extent + 2.0 * r_max) / a.n as f64;
            let bbox = parsets_core::BoundingBox::new(min, max).cubical_hull(pad);
            mask_from_points(&pts, &make_grid(&bbox, a.n, dim)?)?
        }
        _ => parse_voxels(&text)?,
    })
}

/// The parallel set at `r_max` must stay inside the grid box.
fn check_room(mask: &BinaryMask, r_max: f64) -> Result<()> {
    let g = mask.grid();
    let lo = g.origin();
    let top: Vec<f64> = lo.iter().take(g.dim()).map(|o| o + g.n() as f64 * g.h()).collect();
    for idx in mask.occupied() {
        let c = g.center(idx);
        for k in 0..g.dim() {
            if c[k] - r_max < lo[k] || c[k] + r_max > top[k] {
                bail!("parallel set at r = {r_max} leaves the grid box around {:?}; lower --rmax", &c[..g.dim()]);
            }
        }
    }
    Ok(())
}

fn run_grid(a: &GridArgs) -> Result<ExitCode> {
    let r_guess = a.radii.rmax.unwrap_or(0.1);
    let mask = load_mask(a, r_guess)?;
    let h = mask.grid().h();
    let r_max = a.radii.rmax.unwrap_or(r_guess.max(16.0 * h));
    check_room(&mask, r_max)?;
    let radii = radii_or(&a.radii, 2.0 * h, r_max)?;
    let p = sample_profile(&exact_edt(&mask)?, &radii)?;
    let fit = estimate_dimension_in(&p, ContentKind::Volume, Window::Full)?;
    let s = a.s.unwrap_or_else(|| fit.dimension.clamp(0.0, p.dim as f64));
    let estimate = |kind| -> Result<_> {
        let mut est = content_bounds(&p, s, kind, Window::SmallestDecade)?;
        est.average = average_content(&p, s, kind).ok();
        Ok(est)
    };
    let contents = json!({
        "s": s,
        "volume_dimension_fit": fit,
        "volume": estimate(ContentKind::Volume)?,
        "surface": if s < p.dim as f64 { Some(estimate(ContentKind::Surface)?) } else { None },
    });
    std::fs::create_dir_all(&a.out)?;
    output::write_text(&a.out.join("profile.csv"), &write_profile(&p))?;
    let meta = json!({"grid": mask.grid(), "cell_size": h, "occupied_cells": mask.count(), "grid_tolerance": grid_tolerance()});
    write_json(&a.out.join("contents.json"), &Envelope::new("grid", a).finish(contents, meta))?;
    Ok(ExitCode::SUCCESS)
}

fn load_ifs(spec: &str) -> Result<IFSystem> {
    Ok(match spec {
        "gasket" => gasket_ifs(),
        "cantor" => cantor_dust_ifs(),
        path => IFSystem::from_json(&read_to_string(Path::new(path))?).with_context(|| format!("reading {path}"))?,
    })
}

fn run_ifs(a: &IfsArgs) -> Result<ExitCode> {
    let ifs = load_ifs(&a.input)?;
    let opts = AnalyzeOptions { n: a.n, r_min: a.rmin, per_octave: a.per_octave, ..Default::default() };
    let res = analyze_ifs(&ifs, &opts)?;
    let rf = r_function(&res.profile, &ifs.ratios())?;
    std::fs::create_dir_all(&a.out)?;
    output::write_text(&a.out.join("profile.csv"), &write_profile(&res.profile))?;
    let rows: Vec<Vec<f64>> = rf.radii.iter().zip(&rf.values).zip(&rf.scale).map(|((r, v), s)| vec![*r, *v, *s]).collect();
    write_csv(&a.out.join("r_function.csv"), &["r", "R", "scale"], &rows)?;
    let meta = json!({
        "osc_declared": ifs.osc_declared,
        "fine_cell": res.fine_cell,
        "coarse_cell": res.coarse_cell,
        "switch_radius": res.switch_radius,
        "analyze_options": opts,
    });
    write_json(&a.out.join("renewal.json"), &Envelope::new("ifs", a).finish(json!(res), meta))?;
    Ok(ExitCode::SUCCESS)
}

fn run_wiener(a: &WienerArgs) -> Result<ExitCode> {
    let radii = radii_or(&a.radii, 0.1, 0.4)?;
    let opts = EnsembleOptions {
        dim: a.dim,
        t: a.t,
        n_steps: a.steps,
        n_grid: a.n,
        radii: radii.clone(),
        replicas: a.replicas,
        seed: a.seed,
    };
    let ens = sausage_ensemble(&opts)?;
    let rows: Vec<Vec<f64>> = (0..radii.len())
        .map(|k| vec![radii[k], ens.mean_v[k], ens.sd_v[k], ens.mean_s[k], ens.sd_s[k], ens.mean_aux[k], ens.sd_aux[k]])
        .collect();
    let formula: Vec<Vec<f64>> = radii
        .iter()
        .map(|&r| Ok(vec![r, mean_sausage_volume(a.dim, r, a.t)?, mean_sausage_surface(a.dim, r, a.t)?]))
        .collect::<Result<_>>()?;
    let formula_table = asymptotic_table(a.dim, &[1e-3, 1e-4, 1e-5], a.t, None)?;
    let descending: Vec<f64> = radii.iter().rev().copied().collect();
    let mean = ens.mean_profile()?;
    let sim_table = asymptotic_table(a.dim, &descending, a.t, Some(&mean))?;
    std::fs::create_dir_all(&a.out)?;
    write_csv(
        &a.out.join("ensemble.csv"),
        &["r", "mean_V", "sd_V", "mean_S_level", "sd_S_level", "mean_S_deriv", "sd_S_deriv"],
        &rows,
    )?;
    write_csv(&a.out.join("formula.csv"), &["r", "EV", "ES"], &formula)?;
    let meta = json!({"replicas": ens.n_replicas, "max_cell": ens.max_cell, "ensemble_options": opts});
    let result = json!({"formula_asymptotics": formula_table, "ensemble_asymptotics": sim_table});
    write_json(&a.out.join("asymptotics.json"), &Envelope::new("wiener", a).finish(result, meta))?;
    Ok(ExitCode::SUCCESS)
}

fn default_exponent(p: &RadialProfile) -> Result<f64> {
    let fit = estimate_dimension_in(p, ContentKind::Volume, Window::SmallestDecade)
        .or_else(|_| estimate_dimension_in(p, ContentKind::Volume, Window::Full))?;
    Ok(fit.dimension.clamp(0.0, p.dim as f64 - 1e-6))
}

fn run_check(a: &CheckArgs) -> Result<ExitCode> {
    let p = parse_profile(&read_to_string(&a.profile)?)?;
    let s = match a.s {
        Some(s) => s,
        None => default_exponent(&p)?,
    };
    let reports: Vec<CheckReport> = vec![
        check_kneser(&p)?,
        check_sandwich(&p, &Gauge::Power(s))?,
        check_vw_identity(&p, s, p.radii[0])?,
        check_isoperimetric(&p)?,
        check_lm34(&p, s)?,
        check_stacho(&p)?,
    ];
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
    std::fs::create_dir_all(&a.out)?;
    let meta = json!({"s": s, "source": p.source, "cell_size": p.cell_size, "n_samples": p.len(), "grid_tolerance": grid_tolerance()});
    write_json(&a.out.join("checks.json"), &Envelope::new("check", a).finish(json!(reports), meta))?;
    if failed.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failed checks: {}", failed.join(", "));
        Ok(ExitCode::from(2))
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("PARSETS_THREADS") {
        let n: usize = v.parse().with_context(|| format!("PARSETS_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            bail!("PARSETS_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let run = || -> Result<ExitCode> {
        configure_threads()?;
        match &cli.command {
            Command::Shape(a) => run_shape(a),
            Command::Grid(a) => run_grid(a),
            Command::Ifs(a) => run_ifs(a),
            Command::Wiener(a) => run_wiener(a),
            Command::Check(a) => run_check(a),
        }
    };
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
