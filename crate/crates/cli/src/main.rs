use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use steklov_cli::charts::{family_chart, stem_chart};
use steklov_cli::config::{ExperimentConfig, Family, DEPTH_MARGIN};
use steklov_cli::experiments::{
    compare_constants_csv, compare_csv, horseshoe_csv, punctured_csv, run_compare,
    run_horseshoe, run_punctured, run_scaling, scaling_csv, scaling_summary_csv,
};
use steklov_cli::output::{fmt_float, json_envelope, write_file, OutputFormat, Timings};
use steklov_core::{
    ball_subgraph, boundary_length, build_discretization, build_domain, cobblestone_map,
    epsilon_max, generate_tiling, render_discretization, render_domain, render_tiling,
    rough_isometry_constants, steklov_spectrum, CornerMode,
};

#[derive(Parser)]
#[command(
    name = "steklov",
    version,
    about = "Steklov spectra of subgraphs of hyperbolic triangle-group tilings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// First entry of the triangle group signature (p, q, r).
    #[arg(long, default_value_t = 2)]
    p: u32,
    /// Second entry of the signature.
    #[arg(long, default_value_t = 3)]
    q: u32,
    /// Third entry of the signature.
    #[arg(long, default_value_t = 7)]
    r: u32,
    /// Tiling generation depth; defaults to what the command needs.
    #[arg(long)]
    depth: Option<u32>,
    /// Ball radius in the host graph; for family commands, the largest one.
    #[arg(long)]
    radius: Option<u32>,
    /// Smallest family radius.
    #[arg(long)]
    radius_min: Option<u32>,
    /// Eigenvalue index cutoff for tables.
    #[arg(long, default_value_t = 5)]
    k_max: usize,
    /// Sampling scale as a fraction of the largest admissible epsilon.
    #[arg(long, default_value_t = 0.5)]
    epsilon_factor: f64,
    /// Seed for sampled pair checks.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Directory the output files are written to.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Output format.
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a tiling and its dual host graph.
    Tile(Common),
    /// Extract a ball subgraph with boundary around the seed tile.
    Subgraph(Common),
    /// Steklov spectrum of a ball subgraph.
    Spectrum(Common),
    /// Build the smoothed domain of a ball subgraph.
    Domain(Common),
    /// Discretize the domain and report rough-isometry constants.
    Discretize(Common),
    /// Spectra across a family of growing balls.
    Scaling(Common),
    /// Ball versus the same ball punctured at its center.
    Punctured(Common),
    /// Host-adjacent tips that are far apart inside the subgraph.
    Horseshoe(Common),
    /// Subgraph spectra versus discretization spectra.
    Compare(Common),
}

fn build_config(
    common: &Common,
    family: Family,
    def_radius: u32,
    def_min: u32,
    def_depth: Option<u32>,
) -> ExperimentConfig {
    let radius_max = common.radius.unwrap_or(def_radius);
    let radius_min = common.radius_min.unwrap_or_else(|| def_min.min(radius_max));
    let depth = common
        .depth
        .unwrap_or_else(|| def_depth.unwrap_or(radius_max + DEPTH_MARGIN));
    ExperimentConfig {
        p: common.p,
        q: common.q,
        r: common.r,
        family,
        radius_min,
        radius_max,
        depth,
        k_max: common.k_max,
        epsilon_factor: common.epsilon_factor,
        seed: common.seed,
    }
}

fn cmd_tile(common: &Common) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = build_config(common, Family::CustomList, 1, 1, Some(4));
    cfg.validate()?;
    let mut timings = Timings::default();
    let tiling = timings
        .time("tiling", || generate_tiling(cfg.p, cfg.q, cfg.r, cfg.depth))
        .context("generating the tiling")?;
    let host = timings.time("host-graph", || tiling.host_graph());
    println!(
        "tiling ({},{},{}) depth {}: {} tiles, {} dual edges",
        cfg.p,
        cfg.q,
        cfg.r,
        cfg.depth,
        tiling.tiles.len(),
        host.edges.len()
    );
    let (name, text) = match common.format {
        OutputFormat::Csv => {
            let mut out = String::from("id,depth,incenter_x,incenter_y\n");
            for tile in &tiling.tiles {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    tile.id,
                    tile.depth,
                    fmt_float(tile.incenter.x()),
                    fmt_float(tile.incenter.y()),
                ));
            }
            ("tile.csv", out)
        }
        OutputFormat::Json => (
            "tile.json",
            json_envelope("tile", &cfg, &timings, &tiling.to_document())?,
        ),
        OutputFormat::Svg => ("tile.svg", render_tiling(&tiling, &host)),
    };
    Ok(vec![write_file(&common.out_dir, name, &text)?])
}

fn cmd_subgraph(common: &Common) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = build_config(common, Family::Balls, 2, 2, None);
    cfg.validate()?;
    let mut timings = Timings::default();
    let tiling = timings
        .time("tiling", || generate_tiling(cfg.p, cfg.q, cfg.r, cfg.depth))
        .context("generating the tiling")?;
    let host = timings.time("host-graph", || tiling.host_graph());
    let g = ball_subgraph(&host, 0, cfg.radius_max).context("ball subgraph")?;
    println!(
        "ball radius {}: {} interior, {} boundary, {} edges",
        cfg.radius_max,
        g.n_interior(),
        g.n_boundary(),
        g.edges().len()
    );
    let (name, text) = match common.format {
        OutputFormat::Csv => {
            let mut out = String::from("index,host_id,role,degree\n");
            for v in 0..g.n() as u32 {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    v,
                    g.host_id(v).unwrap(),
                    if g.is_interior(v) { "interior" } else { "boundary" },
                    g.degree(v),
                ));
            }
            ("subgraph.csv", out)
        }
        OutputFormat::Json => (
            "subgraph.json",
            json_envelope("subgraph", &cfg, &timings, &g.to_document())?,
        ),
        OutputFormat::Svg => ("subgraph.svg", render_tiling(&tiling, &host)),
    };
    Ok(vec![write_file(&common.out_dir, name, &text)?])
}

fn cmd_spectrum(common: &Common) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = build_config(common, Family::Balls, 2, 2, None);
    cfg.validate()?;
    let mut timings = Timings::default();
    let tiling = timings
        .time("tiling", || generate_tiling(cfg.p, cfg.q, cfg.r, cfg.depth))
        .context("generating the tiling")?;
    let host = timings.time("host-graph", || tiling.host_graph());
    let g = ball_subgraph(&host, 0, cfg.radius_max).context("ball subgraph")?;
    let spec = timings
        .time("spectrum", || steklov_spectrum(&g))
        .context("steklov spectrum")?;
    println!(
        "spectrum of the radius-{} ball: {} eigenvalues, sigma_1 = {:.6}",
        cfg.radius_max,
        spec.eigenvalues.len(),
        spec.eigenvalues[1]
    );
    let (name, text) = match common.format {
        OutputFormat::Csv => {
            let mut out = String::from("k,sigma,residual\n");
            for (k, (&v, &res)) in
                spec.eigenvalues.iter().zip(spec.residuals.iter()).enumerate()
            {
                out.push_str(&format!("{},{},{}\n", k, fmt_float(v), fmt_float(res)));
            }
            ("spectrum.csv", out)
        }
        OutputFormat::Json => (
            "spectrum.json",
            json_envelope("spectrum", &cfg, &timings, &spec.to_document())?,
        ),
        OutputFormat::Svg => (
            "spectrum.svg",
            stem_chart(
                &format!("steklov spectrum, ball radius {}", cfg.radius_max),
                &spec.eigenvalues,
            ),
        ),
    };
    Ok(vec![write_file(&common.out_dir, name, &text)?])
}

fn cmd_domain(common: &Common) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = build_config(common, Family::Balls, 2, 2, None);
    cfg.validate()?;
    let mut timings = Timings::default();
    let tiling = timings
        .time("tiling", || generate_tiling(cfg.p, cfg.q, cfg.r, cfg.depth))
        .context("generating the tiling")?;
    let host = timings.time("host-graph", || tiling.host_graph());
    let g = ball_subgraph(&host, 0, cfg.radius_max).context("ball subgraph")?;
    let domain = timings
        .time("domain", || build_domain(&g, &tiling, CornerMode::Smooth))
        .context("building the domain")?;
    println!(
        "domain of the radius-{} ball: {} pieces, {} boundary curves, |Sigma| = {:.6}",
        cfg.radius_max,
        domain.pieces.len(),
        domain.boundary.len(),
        boundary_length(&domain)
    );
    let (name, text) = match common.format {
        OutputFormat::Csv => {
            let mut out = String::from("section,name,value\n");
            out.push_str(&format!("pieces,triangles,{}\n", domain.n_triangles()));
            out.push_str(&format!("pieces,quads,{}\n", domain.n_quads()));
            out.push_str(&format!("pieces,cycle_gons,{}\n", domain.n_cycle_gons()));
            out.push_str(&format!("balls,removed,{}\n", domain.removed_balls.len()));
            out.push_str(&format!("curves,total,{}\n", domain.boundary.len()));
            out.push_str(&format!("curves,outer,{}\n", domain.n_outer_curves()));
            out.push_str(&format!(
                "length,boundary_total,{}\n",
                fmt_float(boundary_length(&domain))
            ));
            out.push_str(&format!("length,lambda,{}\n", fmt_float(domain.lambda)));
            out.push_str(&format!("length,rho,{}\n", fmt_float(domain.rho)));
            ("domain.csv", out)
        }
        OutputFormat::Json => (
            "domain.json",
            json_envelope("domain", &cfg, &timings, &domain.to_document())?,
        ),
        OutputFormat::Svg => ("domain.svg", render_domain(&domain, &g, &tiling)),
    };
    Ok(vec![write_file(&common.out_dir, name, &text)?])
}

fn cmd_discretize(common: &Common) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = build_config(common, Family::Balls, 2, 2, None);
    cfg.validate()?;
    let mut timings = Timings::default();
    let tiling = timings
        .time("tiling", || generate_tiling(cfg.p, cfg.q, cfg.r, cfg.depth))
        .context("generating the tiling")?;
    let host = timings.time("host-graph", || tiling.host_graph());
    let g = ball_subgraph(&host, 0, cfg.radius_max).context("ball subgraph")?;
    let domain = timings
        .time("domain", || build_domain(&g, &tiling, CornerMode::Smooth))
        .context("building the domain")?;
    let epsilon = cfg.epsilon_factor * epsilon_max(&domain);
    let dg = timings
        .time("discretize", || build_discretization(&domain, epsilon))
        .context("building the discretization")?;
    let phi = cobblestone_map(&dg, &domain, &g).context("cobblestone map")?;
    let constants = timings
        .time("constants", || {
            rough_isometry_constants(&phi, &dg.graph, &g, Some(cfg.seed))
        })
        .context("rough-isometry constants")?;
    println!(
        "discretization at epsilon {:.5}: {} vertices ({} boundary), C1 = {:.3}, C2 = {:.3}, C3 = {:.3}",
        epsilon,
        dg.graph.n(),
        dg.graph.n_boundary(),
        constants.c1,
        constants.c2,
        constants.c3
    );
    match common.format {
        OutputFormat::Csv => {
            let doc = dg.to_document();
            let mut vertices = String::from("index,x,y,role\n");
            for (i, pos) in doc.positions.iter().enumerate() {
                vertices.push_str(&format!(
                    "{},{},{},{}\n",
                    i,
                    fmt_float(pos[0]),
                    fmt_float(pos[1]),
                    doc.roles[i],
                ));
            }
            let mut consts = String::from(
                "epsilon,n_vertices,n_boundary,n_collar_pairs,n_edges,c1,c2,c3,pairs_checked,sampled,boundary_onto\n",
            );
            consts.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{}\n",
                fmt_float(epsilon),
                dg.graph.n(),
                dg.graph.n_boundary(),
                dg.collar_pairs.len(),
                dg.graph.edges().len(),
                fmt_float(constants.c1),
                fmt_float(constants.c2),
                fmt_float(constants.c3),
                constants.pairs_checked,
                constants.sampled,
                constants.boundary_onto,
            ));
            Ok(vec![
                write_file(&common.out_dir, "discretize.csv", &vertices)?,
                write_file(&common.out_dir, "discretize_constants.csv", &consts)?,
            ])
        }
        OutputFormat::Json => {
            let results = serde_json::json!({
                "discretization": dg.to_document(),
                "constants": constants,
            });
            let text = json_envelope("discretize", &cfg, &timings, &results)?;
            Ok(vec![write_file(&common.out_dir, "discretize.json", &text)?])
        }
        OutputFormat::Svg => {
            let text = render_discretization(&domain, &g, &tiling, &dg);
            Ok(vec![write_file(&common.out_dir, "discretize.svg", &text)?])
        }
    }
}

fn cmd_scaling(common: &Common) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = build_config(common, Family::Balls, 5, 1, None);
    let mut timings = Timings::default();
    let report = run_scaling(&cfg, &mut timings)?;
    for &(k, sup) in &report.sup_scaled {
        println!("sup over l of sigma_{k} * |B_l| / {k}^2 = {sup:.6}");
    }
    match common.format {
        OutputFormat::Csv => Ok(vec![
            write_file(&common.out_dir, "scaling.csv", &scaling_csv(&report))?,
            write_file(
                &common.out_dir,
                "scaling_summary.csv",
                &scaling_summary_csv(&report),
            )?,
        ]),
        OutputFormat::Json => {
            let text = json_envelope("scaling", &cfg, &timings, &report)?;
            Ok(vec![write_file(&common.out_dir, "scaling.json", &text)?])
        }
        OutputFormat::Svg => {
            let mut series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
            for l in cfg.radii() {
                let pts: Vec<(f64, f64)> = report
                    .rows
                    .iter()
                    .filter(|row| row.l == l)
                    .filter_map(|row| row.scaled.map(|s| (row.k as f64, s)))
                    .collect();
                if !pts.is_empty() {
                    series.push((format!("l={l}"), pts));
                }
            }
            let text = family_chart("sigma_k |B_l| / k^2 across the family", &series);
            Ok(vec![write_file(&common.out_dir, "scaling.svg", &text)?])
        }
    }
}

fn cmd_punctured(common: &Common) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = build_config(common, Family::PuncturedBalls, 3, 3, None);
    let mut timings = Timings::default();
    let run = run_punctured(&cfg, &mut timings)?;
    println!(
        "punctured radius-{} ball: |B| {} -> {}, boundary curves {} -> {}",
        run.report.radius,
        run.report.ball.n_boundary,
        run.report.punctured.n_boundary,
        run.report.ball.boundary_curves,
        run.report.punctured.boundary_curves
    );
    match common.format {
        OutputFormat::Csv => Ok(vec![write_file(
            &common.out_dir,
            "punctured.csv",
            &punctured_csv(&run.report),
        )?]),
        OutputFormat::Json => {
            let text = json_envelope("punctured", &cfg, &timings, &run.report)?;
            Ok(vec![write_file(&common.out_dir, "punctured.json", &text)?])
        }
        OutputFormat::Svg => {
            let text =
                render_domain(&run.punctured_domain, &run.punctured_graph, &run.tiling);
            Ok(vec![write_file(&common.out_dir, "punctured.svg", &text)?])
        }
    }
}

fn cmd_horseshoe(common: &Common) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = build_config(common, Family::Horseshoe, 1, 1, Some(9));
    let mut timings = Timings::default();
    let run = run_horseshoe(&cfg, &mut timings)?;
    println!(
        "horseshoe tips {} and {}: host distance {}, subgraph distance {}",
        run.report.w1, run.report.w2, run.report.d_host, run.report.d_subgraph
    );
    match common.format {
        OutputFormat::Csv => Ok(vec![write_file(
            &common.out_dir,
            "horseshoe.csv",
            &horseshoe_csv(&run.report),
        )?]),
        OutputFormat::Json => {
            let text = json_envelope("horseshoe", &cfg, &timings, &run.report)?;
            Ok(vec![write_file(&common.out_dir, "horseshoe.json", &text)?])
        }
        OutputFormat::Svg => {
            let text = render_domain(&run.domain, &run.graph, &run.tiling);
            Ok(vec![write_file(&common.out_dir, "horseshoe.svg", &text)?])
        }
    }
}

fn cmd_compare(common: &Common) -> anyhow::Result<Vec<PathBuf>> {
    let cfg = build_config(common, Family::Balls, 4, 2, None);
    let mut timings = Timings::default();
    let run = run_compare(&cfg, &mut timings)?;
    for &(k, spread) in &run.report.ratio_spread {
        println!("sigma_{k} ratio spread across the family: {spread:.3}");
    }
    match common.format {
        OutputFormat::Csv => Ok(vec![
            write_file(&common.out_dir, "compare.csv", &compare_csv(&run.report))?,
            write_file(
                &common.out_dir,
                "compare_constants.csv",
                &compare_constants_csv(&run.report),
            )?,
        ]),
        OutputFormat::Json => {
            let text = json_envelope("compare", &cfg, &timings, &run.report)?;
            Ok(vec![write_file(&common.out_dir, "compare.json", &text)?])
        }
        OutputFormat::Svg => {
            let scene = &run.scenes[0];
            let text = render_discretization(
                &scene.domain,
                &scene.graph,
                &run.tiling,
                &scene.discretization,
            );
            Ok(vec![write_file(&common.out_dir, "compare.svg", &text)?])
        }
    }
}

fn run(command: &Command) -> anyhow::Result<Vec<PathBuf>> {
    match command {
        Command::Tile(c) => cmd_tile(c),
        Command::Subgraph(c) => cmd_subgraph(c),
        Command::Spectrum(c) => cmd_spectrum(c),
        Command::Domain(c) => cmd_domain(c),
        Command::Discretize(c) => cmd_discretize(c),
        Command::Scaling(c) => cmd_scaling(c),
        Command::Punctured(c) => cmd_punctured(c),
        Command::Horseshoe(c) => cmd_horseshoe(c),
        Command::Compare(c) => cmd_compare(c),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(paths) => {
            for path in paths {
                println!("wrote {}", path.display());
            }
        }
        Err(err) => {
            let payload = serde_json::json!({ "error": format!("{err:#}") });
            eprintln!("{payload}");
            std::process::exit(1);
        }
    }
}
