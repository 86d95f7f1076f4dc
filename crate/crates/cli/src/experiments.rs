//! Experiment runners behind the scaling, punctured, horseshoe, and
//! compare commands. Each runner validates its config, builds the host
//! tiling once, fans the family members out over scoped threads, and
//! assembles rows in deterministic (l, k) order.

use anyhow::{anyhow, bail, ensure, Context};
use serde::Serialize;

use steklov_core::domain::EquivalenceReport;
use steklov_core::graphcore::horseshoe_plan;
use steklov_core::{
    ball_subgraph, build_discretization, build_domain, cobblestone_map, epsilon_max,
    generate_tiling, induce_subgraph, punctured_ball, rough_isometry_constants,
    steklov_spectrum, structural_equivalence_check, CornerMode, DiscretizationGraph,
    DomainModel, GraphWithBoundary, HostGraph, PieceKind, RoughIsometryReport,
    SteklovSpectrum, Tiling,
};

use crate::config::ExperimentConfig;
use crate::output::{fmt_float, fmt_opt, Timings};

/// Largest accepted eigenpair residual; rows above this fail the run.
pub const RESIDUAL_BUDGET: f64 = 1e-8;

fn worst_residual(tag: &str, spec: &SteklovSpectrum) -> anyhow::Result<f64> {
    let worst = spec.residuals.iter().cloned().fold(0.0, f64::max);
    ensure!(
        worst <= RESIDUAL_BUDGET,
        "{tag}: eigenpair residual {worst:.3e} exceeds the {RESIDUAL_BUDGET:.0e} budget"
    );
    Ok(worst)
}

// ---------------------------------------------------------------- scaling

/// One (l, k) cell of the scaling table. σ_k is defined only for
/// k < |B_l|; undefined cells keep their row with empty values.
#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub l: u32,
    pub n_interior: usize,
    pub n_boundary: usize,
    pub k: usize,
    pub sigma: Option<f64>,
    /// σ_k · |B_l|
    pub product: Option<f64>,
    /// σ_k · |B_l| / k²
    pub scaled: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Per k: the max over l of σ_k·|B_l|/k², the empirical stand-in for
    /// the existence constant of the bound.
    pub sup_scaled: Vec<(usize, f64)>,
}

struct ScalingMember {
    l: u32,
    n_interior: usize,
    n_boundary: usize,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
}

fn scaling_member(host: &HostGraph, l: u32) -> anyhow::Result<ScalingMember> {
    let g = ball_subgraph(host, 0, l).with_context(|| format!("ball of radius {l}"))?;
    let spec =
        steklov_spectrum(&g).with_context(|| format!("spectrum of the radius-{l} ball"))?;
    Ok(ScalingMember {
        l,
        n_interior: g.n_interior(),
        n_boundary: g.n_boundary(),
        eigenvalues: spec.eigenvalues,
        residuals: spec.residuals,
    })
}

pub fn run_scaling(
    cfg: &ExperimentConfig,
    timings: &mut Timings,
) -> anyhow::Result<ScalingReport> {
    cfg.validate()?;
    let tiling = timings
        .time("tiling", || generate_tiling(cfg.p, cfg.q, cfg.r, cfg.depth))
        .context("generating the tiling")?;
    let host = timings.time("host-graph", || tiling.host_graph());
    let radii: Vec<u32> = cfg.radii().collect();
    let members: Vec<anyhow::Result<ScalingMember>> = timings.time("family-spectra", || {
        std::thread::scope(|scope| {
            let handles: Vec<_> = radii
                .iter()
                .map(|&l| {
                    let host = &host;
                    scope.spawn(move || scaling_member(host, l))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("scaling worker panicked"))
                .collect()
        })
    });

    let mut rows = Vec::new();
    let mut sup: Vec<(usize, f64)> = Vec::new();
    for member in members {
        let m = member?;
        for k in 1..=cfg.k_max {
            let defined = k < m.n_boundary;
            let (sigma, residual) = if defined {
                let r = m.residuals[k];
                ensure!(
                    r <= RESIDUAL_BUDGET,
                    "radius {} k={k}: residual {r:.3e} exceeds the budget",
                    m.l
                );
                (Some(m.eigenvalues[k]), Some(r))
            } else {
                (None, None)
            };
            let product = sigma.map(|s| s * m.n_boundary as f64);
            let scaled = product.map(|p| p / (k * k) as f64);
            if let Some(s) = scaled {
                match sup.iter_mut().find(|(kk, _)| *kk == k) {
                    Some((_, v)) => *v = v.max(s),
                    None => sup.push((k, s)),
                }
            }
            rows.push(ScalingRow {
                l: m.l,
                n_interior: m.n_interior,
                n_boundary: m.n_boundary,
                k,
                sigma,
                product,
                scaled,
                residual,
            });
        }
    }
    sup.sort_unstable_by_key(|&(k, _)| k);
    Ok(ScalingReport { rows, sup_scaled: sup })
}

pub fn scaling_csv(report: &ScalingReport) -> String {
    let mut out =
        String::from("l,n_interior,n_boundary,k,sigma,sigma_times_boundary,sigma_scaled,residual\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.l,
            row.n_interior,
            row.n_boundary,
            row.k,
            fmt_opt(row.sigma),
            fmt_opt(row.product),
            fmt_opt(row.scaled),
            fmt_opt(row.residual),
        ));
    }
    out
}

pub fn scaling_summary_csv(report: &ScalingReport) -> String {
    let mut out = String::from("k,sup_sigma_scaled\n");
    for &(k, v) in &report.sup_scaled {
        out.push_str(&format!("{},{}\n", k, fmt_float(v)));
    }
    out
}

// -------------------------------------------------------------- punctured

#[derive(Debug, Serialize)]
pub struct PuncturedSide {
    pub n_interior: usize,
    pub n_boundary: usize,
    pub boundary_curves: usize,
    pub eigenvalues: Vec<f64>,
    pub max_residual: f64,
}

#[derive(Debug, Serialize)]
pub struct PuncturedReport {
    pub radius: u32,
    /// Host id of the deleted interior vertex (the ball center).
    pub removed: u32,
    pub ball: PuncturedSide,
    pub punctured: PuncturedSide,
}

pub struct PuncturedRun {
    pub report: PuncturedReport,
    pub tiling: Tiling,
    pub punctured_graph: GraphWithBoundary,
    pub punctured_domain: DomainModel,
}

fn side_report(
    tag: &str,
    g: &GraphWithBoundary,
    domain: &DomainModel,
) -> anyhow::Result<PuncturedSide> {
    let spec = steklov_spectrum(g).with_context(|| format!("{tag} spectrum"))?;
    let max_residual = worst_residual(tag, &spec)?;
    ensure!(spec.eigenvalues[0] == 0.0, "{tag}: zero mode not clamped");
    Ok(PuncturedSide {
        n_interior: g.n_interior(),
        n_boundary: g.n_boundary(),
        boundary_curves: domain.boundary.len(),
        eigenvalues: spec.eigenvalues,
        max_residual,
    })
}

/// Ball versus the same ball with its center deleted from the interior.
/// The deleted vertex becomes one more boundary vertex, and the domain
/// gains exactly one boundary circle around it.
pub fn run_punctured(
    cfg: &ExperimentConfig,
    timings: &mut Timings,
) -> anyhow::Result<PuncturedRun> {
    cfg.validate()?;
    let radius = cfg.radius_max;
    let tiling = timings
        .time("tiling", || generate_tiling(cfg.p, cfg.q, cfg.r, cfg.depth))
        .context("generating the tiling")?;
    let host = timings.time("host-graph", || tiling.host_graph());

    let ball = ball_subgraph(&host, 0, radius).context("ball subgraph")?;
    let punct = punctured_ball(&host, 0, radius, 0).with_context(|| {
        format!("puncturing the radius-{radius} ball at its center")
    })?;
    let ball_domain = timings
        .time("ball-domain", || build_domain(&ball, &tiling, CornerMode::Smooth))
        .context("ball domain")?;
    let punct_domain = timings
        .time("punctured-domain", || build_domain(&punct, &tiling, CornerMode::Smooth))
        .context("punctured domain")?;

    let ball_side = timings.time("ball-spectrum", || side_report("ball", &ball, &ball_domain))?;
    let punct_side = timings.time("punctured-spectrum", || {
        side_report("punctured", &punct, &punct_domain)
    })?;

    ensure!(
        punct_side.n_boundary == ball_side.n_boundary + 1,
        "puncturing must add exactly one boundary vertex: {} vs {}",
        punct_side.n_boundary,
        ball_side.n_boundary
    );
    ensure!(
        punct_side.boundary_curves == ball_side.boundary_curves + 1,
        "puncturing must add exactly one boundary circle: {} vs {}",
        punct_side.boundary_curves,
        ball_side.boundary_curves
    );

    Ok(PuncturedRun {
        report: PuncturedReport {
            radius,
            removed: 0,
            ball: ball_side,
            punctured: punct_side,
        },
        tiling,
        punctured_graph: punct,
        punctured_domain: punct_domain,
    })
}

pub fn punctured_csv(report: &PuncturedReport) -> String {
    let mut out = String::from("quantity,ball,punctured\n");
    out.push_str(&format!(
        "n_interior,{},{}\n",
        report.ball.n_interior, report.punctured.n_interior
    ));
    out.push_str(&format!(
        "n_boundary,{},{}\n",
        report.ball.n_boundary, report.punctured.n_boundary
    ));
    out.push_str(&format!(
        "boundary_curves,{},{}\n",
        report.ball.boundary_curves, report.punctured.boundary_curves
    ));
    let shown = report
        .ball
        .eigenvalues
        .len()
        .min(report.punctured.eigenvalues.len())
        .min(4);
    for k in 0..shown {
        out.push_str(&format!(
            "sigma_{},{},{}\n",
            k,
            fmt_float(report.ball.eigenvalues[k]),
            fmt_float(report.punctured.eigenvalues[k]),
        ));
    }
    out.push_str(&format!(
        "max_residual,{},{}\n",
        fmt_float(report.ball.max_residual),
        fmt_float(report.punctured.max_residual),
    ));
    out
}

// -------------------------------------------------------------- horseshoe

#[derive(Debug, Serialize)]
pub struct HorseshoeReport {
    /// Host ids of the two tip boundary vertices.
    pub w1: u32,
    pub w2: u32,
    /// Their distance in the host graph.
    pub d_host: u32,
    /// Their distance inside the subgraph, the long way around the fan.
    pub d_subgraph: u32,
    pub n_interior: usize,
    pub n_boundary: usize,
    /// Whether any connector quadrilateral joins the two tip cobblestones.
    pub connector_between_tips: bool,
    pub equivalence: EquivalenceReport,
    pub sigma_1: f64,
    pub max_residual: f64,
}

pub struct HorseshoeRun {
    pub report: HorseshoeReport,
    pub tiling: Tiling,
    pub graph: GraphWithBoundary,
    pub domain: DomainModel,
}

/// A fan of tiles around a corner, opened by removing one adjacent pair:
/// the removed pair stays adjacent in the host but the subgraph only
/// connects it the long way around.
pub fn run_horseshoe(
    cfg: &ExperimentConfig,
    timings: &mut Timings,
) -> anyhow::Result<HorseshoeRun> {
    cfg.validate()?;
    let tiling = timings
        .time("tiling", || generate_tiling(cfg.p, cfg.q, cfg.r, cfg.depth))
        .context("generating the tiling")?;
    let host = timings.time("host-graph", || tiling.host_graph());
    let plan = horseshoe_plan(&tiling, &host).ok_or_else(|| {
        anyhow!(
            "no horseshoe fits at depth {}: the corner fan and its neighbors \
             must be fully inside the trusted part of the tiling",
            cfg.depth
        )
    })?;
    let g = induce_subgraph(&host, &plan.interior).context("horseshoe subgraph")?;
    let i1 = g
        .index_of_host(plan.w1)
        .ok_or_else(|| anyhow!("tip {} missing from the subgraph boundary", plan.w1))?;
    let i2 = g
        .index_of_host(plan.w2)
        .ok_or_else(|| anyhow!("tip {} missing from the subgraph boundary", plan.w2))?;
    ensure!(!g.is_interior(i1) && !g.is_interior(i2), "tips must be boundary vertices");

    let d_host = host.bfs_distances(plan.w1)[plan.w2 as usize];
    ensure!(d_host == 1, "tip tiles must be host-adjacent, got distance {d_host}");
    let d_subgraph = g.graph_distance(i1, i2);
    ensure!(d_subgraph != u32::MAX, "tips disconnected inside the subgraph");

    let domain = timings
        .time("domain", || build_domain(&g, &tiling, CornerMode::Smooth))
        .context("horseshoe domain")?;
    let connector_between_tips = domain.pieces.iter().any(|piece| match piece.kind {
        PieceKind::Quad { edge } => {
            (edge.0 == i1 && edge.1 == i2) || (edge.0 == i2 && edge.1 == i1)
        }
        _ => false,
    });
    ensure!(
        !connector_between_tips,
        "domain connects the two tips directly; boundary tiles must stay separated"
    );
    let equivalence = structural_equivalence_check(&domain, &g, &tiling)
        .context("horseshoe structural equivalence")?;

    let spec = timings
        .time("spectrum", || steklov_spectrum(&g))
        .context("horseshoe spectrum")?;
    let max_residual = worst_residual("horseshoe", &spec)?;

    Ok(HorseshoeRun {
        report: HorseshoeReport {
            w1: plan.w1,
            w2: plan.w2,
            d_host,
            d_subgraph,
            n_interior: g.n_interior(),
            n_boundary: g.n_boundary(),
            connector_between_tips,
            equivalence,
            sigma_1: spec.eigenvalues[1],
            max_residual,
        },
        tiling,
        graph: g,
        domain,
    })
}

pub fn horseshoe_csv(report: &HorseshoeReport) -> String {
    let mut out = String::from(
        "w1,w2,d_host,d_subgraph,n_interior,n_boundary,connector_between_tips,sigma_1,max_residual\n",
    );
    out.push_str(&format!(
        "{},{},{},{},{},{},{},{},{}\n",
        report.w1,
        report.w2,
        report.d_host,
        report.d_subgraph,
        report.n_interior,
        report.n_boundary,
        report.connector_between_tips,
        fmt_float(report.sigma_1),
        fmt_float(report.max_residual),
    ));
    out
}

// ---------------------------------------------------------------- compare

#[derive(Debug, Serialize)]
pub struct CompareMember {
    pub l: u32,
    pub n_graph_interior: usize,
    pub n_graph_boundary: usize,
    pub epsilon: f64,
    pub n_disc_vertices: usize,
    pub n_disc_boundary: usize,
    /// σ_k of the subgraph and the discretization, k = 0..=k_max shown.
    pub sigma_graph: Vec<f64>,
    pub sigma_disc: Vec<f64>,
    /// (k, σ_k(discretization) / σ_k(subgraph)) for k = 1..=3.
    pub ratios: Vec<(usize, f64)>,
    pub constants: RoughIsometryReport,
    pub max_residual_graph: f64,
    pub max_residual_disc: f64,
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub members: Vec<CompareMember>,
    /// Per k: max ratio divided by min ratio across the family.
    pub ratio_spread: Vec<(usize, f64)>,
}

pub struct CompareScene {
    pub l: u32,
    pub graph: GraphWithBoundary,
    pub domain: DomainModel,
    pub discretization: DiscretizationGraph,
}

pub struct CompareRun {
    pub report: CompareReport,
    pub tiling: Tiling,
    pub scenes: Vec<CompareScene>,
}

fn compare_member(
    host: &HostGraph,
    tiling: &Tiling,
    l: u32,
    epsilon_factor: f64,
    k_max: usize,
    seed: u64,
) -> anyhow::Result<(CompareMember, CompareScene)> {
    let g = ball_subgraph(host, 0, l).with_context(|| format!("ball of radius {l}"))?;
    let spec_graph =
        steklov_spectrum(&g).with_context(|| format!("radius-{l} subgraph spectrum"))?;
    let max_residual_graph = worst_residual(&format!("radius {l} subgraph"), &spec_graph)?;

    let domain = build_domain(&g, tiling, CornerMode::Smooth)
        .with_context(|| format!("radius-{l} domain"))?;
    let epsilon = epsilon_factor * epsilon_max(&domain);
    let dg = build_discretization(&domain, epsilon)
        .with_context(|| format!("radius-{l} discretization at epsilon {epsilon:.4}"))?;
    let spec_disc = steklov_spectrum(&dg.graph)
        .with_context(|| format!("radius-{l} discretization spectrum"))?;
    let max_residual_disc = worst_residual(&format!("radius {l} discretization"), &spec_disc)?;

    let phi = cobblestone_map(&dg, &domain, &g)
        .with_context(|| format!("radius-{l} cobblestone map"))?;
    let mut hit = vec![false; g.n()];
    for &img in &phi {
        hit[img as usize] = true;
    }
    ensure!(
        hit.iter().all(|&h| h),
        "radius {l}: cobblestone map misses part of the subgraph"
    );
    let constants = rough_isometry_constants(&phi, &dg.graph, &g, Some(seed))
        .with_context(|| format!("radius-{l} rough-isometry constants"))?;
    ensure!(
        constants.boundary_onto,
        "radius {l}: boundary samples do not cover the graph boundary"
    );

    let shown = (k_max + 1)
        .min(spec_graph.eigenvalues.len())
        .min(spec_disc.eigenvalues.len());
    let mut ratios = Vec::new();
    for k in 1..=3usize {
        ensure!(
            k < spec_graph.eigenvalues.len() && k < spec_disc.eigenvalues.len(),
            "radius {l}: fewer than four eigenvalues on one side"
        );
        let num = spec_disc.eigenvalues[k];
        let den = spec_graph.eigenvalues[k];
        ensure!(den > 0.0 && num > 0.0, "radius {l}: nonpositive sigma_{k}");
        ratios.push((k, num / den));
    }

    let member = CompareMember {
        l,
        n_graph_interior: g.n_interior(),
        n_graph_boundary: g.n_boundary(),
        epsilon,
        n_disc_vertices: dg.graph.n(),
        n_disc_boundary: dg.graph.n_boundary(),
        sigma_graph: spec_graph.eigenvalues[..shown].to_vec(),
        sigma_disc: spec_disc.eigenvalues[..shown].to_vec(),
        ratios,
        constants,
        max_residual_graph,
        max_residual_disc,
    };
    let scene = CompareScene { l, graph: g, domain, discretization: dg };
    Ok((member, scene))
}

/// Subgraph spectra against the spectra of their domain discretizations,
/// plus the rough-isometry constants of the cobblestone map.
pub fn run_compare(cfg: &ExperimentConfig, timings: &mut Timings) -> anyhow::Result<CompareRun> {
    cfg.validate_for_compare()?;
    let tiling = timings
        .time("tiling", || generate_tiling(cfg.p, cfg.q, cfg.r, cfg.depth))
        .context("generating the tiling")?;
    let host = timings.time("host-graph", || tiling.host_graph());
    let radii: Vec<u32> = cfg.radii().collect();
    let results: Vec<anyhow::Result<(CompareMember, CompareScene)>> =
        timings.time("family", || {
            std::thread::scope(|scope| {
                let handles: Vec<_> = radii
                    .iter()
                    .map(|&l| {
                        let host = &host;
                        let tiling = &tiling;
                        let (factor, k_max, seed) = (cfg.epsilon_factor, cfg.k_max, cfg.seed);
                        scope.spawn(move || {
                            compare_member(host, tiling, l, factor, k_max, seed)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("compare worker panicked"))
                    .collect()
            })
        });

    let mut members = Vec::new();
    let mut scenes = Vec::new();
    for result in results {
        let (member, scene) = result?;
        members.push(member);
        scenes.push(scene);
    }
    let mut ratio_spread = Vec::new();
    for k in 1..=3usize {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for m in &members {
            let &(_, r) = m.ratios.iter().find(|(kk, _)| *kk == k).expect("ratio row");
            lo = lo.min(r);
            hi = hi.max(r);
        }
        ratio_spread.push((k, hi / lo));
    }
    if members.is_empty() {
        bail!("empty comparison family");
    }
    Ok(CompareRun { report: CompareReport { members, ratio_spread }, tiling, scenes })
}

pub fn compare_csv(report: &CompareReport) -> String {
    let mut out = String::from("l,k,sigma_graph,sigma_disc,ratio\n");
    for m in &report.members {
        for &(k, ratio) in &m.ratios {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                m.l,
                k,
                fmt_float(m.sigma_graph[k]),
                fmt_float(m.sigma_disc[k]),
                fmt_float(ratio),
            ));
        }
    }
    out
}

pub fn compare_constants_csv(report: &CompareReport) -> String {
    let mut out = String::from(
        "l,epsilon,n_disc_vertices,n_disc_boundary,c1,c2,c3,pairs_checked,sampled,boundary_onto\n",
    );
    for m in &report.members {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            m.l,
            fmt_float(m.epsilon),
            m.n_disc_vertices,
            m.n_disc_boundary,
            fmt_float(m.constants.c1),
            fmt_float(m.constants.c2),
            fmt_float(m.constants.c3),
            m.constants.pairs_checked,
            m.constants.sampled,
            m.constants.boundary_onto,
        ));
    }
    out
}
