//! Command-line interface: exact ball spectra, decay gauges, covering
//! bounds, embedding verification and composition-operator eigenvalues,
//! with machine-readable CSV/JSON output.

// NaN-rejecting comparison, as in the library crate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use harmonic_spectra::ball::ExactBallSpectrum;
use harmonic_spectra::basis::{OrthonormalBasis, QuadratureConfig};
use harmonic_spectra::covers::{
    cover_from_inner_balls, efficiency, eigenvalue_bound, embedding_bound, greedy_cover,
    validate_cover, RelativeCover,
};
use harmonic_spectra::dims::{h_dim, n_dim, Dimension};
use harmonic_spectra::embedding::{embedding_matrix, verify_concentric};
use harmonic_spectra::expo::{sequence_gauge, FiniteSpectrum};
use harmonic_spectra::galerkin::{
    converged_eigenvalues, decay_report, estimate_k, halfplane_report, ConformalMap,
};
use harmonic_spectra::galerkin::Complex64;
use harmonic_spectra::geometry::{DomainUnion, GeometryFile};

#[derive(Parser)]
#[command(
    name = "harmonic-spectra",
    about = "Singular value spectra, decay gauges and eigenvalue bounds on harmonic Bergman spaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spherical harmonic dimension counts N_d(k) and cumulative h_d(k).
    Dims(DimsArgs),
    /// Exact singular values of the concentric-ball restriction operator.
    Singvals(SingvalsArgs),
    /// Decay-class gauge of a spectrum read from CSV or generated exactly.
    Gauge(GaugeArgs),
    /// Numerically verify embedding singular values against closed forms
    /// and covering bounds.
    VerifyEmbedding(VerifyArgs),
    /// Efficiency and decay bounds of a relative cover for a nested pair.
    CoverBound(CoverBoundArgs),
    /// Reproduce the half-plane composition-operator example.
    HalfplaneExample(HalfplaneArgs),
    /// Galerkin eigenvalues of a catalog conformal map over a disc.
    Compose(ComposeArgs),
}

#[derive(Args)]
struct DimsArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    kmax: u32,
    /// csv (default) or json
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SingvalsArgs {
    #[arg(long)]
    d: u32,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    count: u64,
    /// csv (default) or json; json bundles the rows with the gauge summary
    #[arg(long, default_value = "csv")]
    format: String,
    /// Optional path for the JSON summary when emitting CSV rows
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct GaugeArgs {
    /// CSV file with one spectrum value per line, nonincreasing
    #[arg(long, conflicts_with_all = ["ball_d", "ball_gamma"])]
    input: Option<PathBuf>,
    /// Use the exact concentric-ball spectrum with this dimension
    #[arg(long, requires = "ball_gamma")]
    ball_d: Option<u32>,
    /// ...and this dilation factor
    #[arg(long, requires = "ball_d")]
    ball_gamma: Option<f64>,
    /// Prefix length for the exact spectrum
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    d: u32,
    /// Dilation factor for the concentric case (ignored with --geometry)
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    kmax: u32,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Geometry JSON {"outer": [balls...], "inner": [balls...]}
    #[arg(long)]
    geometry: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CoverBoundArgs {
    #[arg(long)]
    geometry: PathBuf,
    #[arg(long)]
    d: u32,
    /// Operator constant for the eigenvalue bound
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Build the cover greedily from balls of this radius (default: the
    /// inner balls themselves)
    #[arg(long, requires = "grid_step")]
    ball_radius: Option<f64>,
    #[arg(long, requires = "ball_radius")]
    grid_step: Option<f64>,
    /// Rows in the emitted bound table
    #[arg(long, default_value_t = 20)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct HalfplaneArgs {
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    kmax: u32,
    #[arg(long, default_value_t = 4000)]
    samples: usize,
    #[arg(long, default_value_t = 1e-6)]
    conv_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    entry_tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ComposeArgs {
    /// Catalog map: "halfplane", "scale:<rho>" or "scale:<rho>@<cx>,<cy>"
    #[arg(long)]
    map: String,
    /// Geometry JSON; outer[0] is the disc the operator is discretized on,
    /// inner feeds the operator-constant sampling and the cover bound
    #[arg(long)]
    geometry: PathBuf,
    #[arg(long)]
    kmax: u32,
    #[arg(long, default_value_t = 5)]
    step: u32,
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    #[arg(long, default_value_t = 1e-6)]
    conv_tol: f64,
    #[arg(long, default_value_t = 1e-10)]
    entry_tol: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match cli.command {
        Command::Dims(args) => dims(args),
        Command::Singvals(args) => singvals(args),
        Command::Gauge(args) => gauge(args),
        Command::VerifyEmbedding(args) => verify_embedding(args),
        Command::CoverBound(args) => cover_bound(args),
        Command::HalfplaneExample(args) => halfplane(args),
        Command::Compose(args) => compose(args),
    }
}

fn emit(output: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match output {
        Some(path) => fs::write(path, content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(output: &Option<PathBuf>, value: &T) -> Result<(), Box<dyn std::error::Error>> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    emit(output, &text)?;
    Ok(())
}

fn usage(message: String) -> Result<ExitCode, Box<dyn std::error::Error>> {
    eprintln!("error: {message}");
    Ok(ExitCode::from(2))
}

fn dims(args: DimsArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let d = Dimension::new(args.d)?;
    let mut rows = Vec::new();
    for k in 0..=args.kmax {
        rows.push((k, n_dim(d, k)?, h_dim(d, i64::from(k))?));
    }
    match args.format.as_str() {
        "csv" => {
            let mut text = String::from("k,n_dim,h_dim\n");
            for (k, n, h) in &rows {
                text.push_str(&format!("{k},{n},{h}\n"));
            }
            emit(&args.output, &text)?;
        }
        "json" => {
            #[derive(Serialize)]
            struct Row {
                k: u32,
                n_dim: u64,
                h_dim: u64,
            }
            let rows: Vec<Row> = rows
                .into_iter()
                .map(|(k, n, h)| Row { k, n_dim: n, h_dim: h })
                .collect();
            emit_json(&args.output, &rows)?;
        }
        other => return usage(format!("unknown format {other:?}")),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SingvalsSummary {
    c: f64,
    alpha: f64,
    gauge: f64,
    log_rate: f64,
}

fn singvals(args: SingvalsArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let d = Dimension::new(args.d)?;
    let spectrum = ExactBallSpectrum::new(d, args.gamma)?;
    let g = spectrum.gauge();
    let summary = SingvalsSummary {
        c: g.rate,
        alpha: g.alpha,
        gauge: g.value,
        log_rate: spectrum.asymptotic_log_rate(),
    };
    let mut rows = Vec::with_capacity(args.count as usize);
    for n in 1..=args.count {
        rows.push((n, spectrum.degree_of(n)?, spectrum.singular_value(n)?));
    }
    match args.format.as_str() {
        "csv" => {
            let mut text = String::from("n,k,s_n\n");
            for (n, k, s) in &rows {
                text.push_str(&format!("{n},{k},{s}\n"));
            }
            emit(&args.output, &text)?;
            if let Some(path) = &args.summary {
                emit_json(&Some(path.clone()), &summary)?;
            }
        }
        "json" => {
            #[derive(Serialize)]
            struct Row {
                n: u64,
                k: u32,
                s: f64,
            }
            #[derive(Serialize)]
            struct Out {
                rows: Vec<Row>,
                summary: SingvalsSummary,
            }
            let out = Out {
                rows: rows.into_iter().map(|(n, k, s)| Row { n, k, s }).collect(),
                summary,
            };
            emit_json(&args.output, &out)?;
        }
        other => return usage(format!("unknown format {other:?}")),
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct GaugeOut {
    a: f64,
    alpha: f64,
    value: f64,
    certified: bool,
}

fn gauge(args: GaugeArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let spectrum = match (&args.input, args.ball_d, args.ball_gamma) {
        (Some(path), None, None) => {
            let text = fs::read_to_string(path)?;
            let mut values = Vec::new();
            for line in text.lines() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                values.push(line.parse::<f64>()?);
            }
            FiniteSpectrum::new(values, false)?
        }
        (None, Some(bd), Some(bg)) => {
            let d = Dimension::new(bd)?;
            ExactBallSpectrum::new(d, bg)?.prefix(args.count)?
        }
        _ => {
            return usage("provide either --input or --ball-d with --ball-gamma".into());
        }
    };
    let g = sequence_gauge(&spectrum, args.a, args.alpha)?;
    emit_json(
        &args.output,
        &GaugeOut {
            a: g.rate,
            alpha: g.alpha,
            value: g.value,
            certified: g.certified,
        },
    )?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct BoundCheckRow {
    n: usize,
    s: f64,
    bound: f64,
    ok: bool,
}

#[derive(Serialize)]
struct BoundCheck {
    cover_valid: bool,
    cover_size: usize,
    c: f64,
    prefactor: f64,
    checks: Vec<BoundCheckRow>,
    all_ok: bool,
}

#[derive(Serialize)]
struct VerifyOut {
    singular_values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact_values: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_rel_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pass: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bound_check: Option<BoundCheck>,
}

fn verify_embedding(args: VerifyArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    if !(args.tol > 0.0) {
        return usage(format!("--tol must be positive, got {}", args.tol));
    }
    let d = Dimension::new(args.d)?;
    match &args.geometry {
        None => {
            let Some(gamma) = args.gamma else {
                return usage("--gamma is required without --geometry".into());
            };
            let report = verify_concentric(d, gamma, args.kmax, args.tol)?;
            let ok = report.pass;
            let out = VerifyOut {
                singular_values: report.singular_values.clone(),
                exact_values: Some(report.exact_values.clone()),
                max_rel_error: Some(report.max_rel_error),
                pass: Some(report.pass),
                bound_check: None,
            };
            emit_json(&args.output, &out)?;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Some(path) => {
            let file: GeometryFile = serde_json::from_str(&fs::read_to_string(path)?)?;
            let outer = file.outer_union()?;
            let inner = file.inner_union()?;
            let source =
                OrthonormalBasis::build_with(d, &outer, args.kmax, QuadratureConfig::with_tolerance(args.tol))?;
            let embedding =
                embedding_matrix(&source, &inner, QuadratureConfig::with_tolerance(args.tol))?;

            let cover = cover_from_inner_balls(&outer, &inner)?;
            let cover_valid = validate_cover(&cover, 256, args.seed).valid;
            let (bound, _) = embedding_bound(&cover, d)?;
            let checks: Vec<BoundCheckRow> = embedding
                .singular_values
                .iter()
                .enumerate()
                .map(|(i, &s)| {
                    let b = bound.eval((i + 1) as u64);
                    BoundCheckRow {
                        n: i + 1,
                        s,
                        bound: b,
                        ok: s <= b * (1.0 + 1e-9),
                    }
                })
                .collect();
            let all_ok = cover_valid && checks.iter().all(|c| c.ok);
            let out = VerifyOut {
                singular_values: embedding.singular_values.clone(),
                exact_values: None,
                max_rel_error: None,
                pass: None,
                bound_check: Some(BoundCheck {
                    cover_valid,
                    cover_size: cover.size(),
                    c: bound.rate,
                    prefactor: bound.prefactor,
                    checks,
                    all_ok,
                }),
            };
            emit_json(&args.output, &out)?;
            Ok(if all_ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
    }
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct CoverBoundOut {
    N: usize,
    Gamma: Vec<f64>,
    norm_min: f64,
    norm_dminus1: f64,
    c_embedding: f64,
    c_eigen: f64,
    prefactor: f64,
    cover_valid: bool,
    bound_table: Vec<(u64, f64)>,
}

fn cover_bound(args: CoverBoundArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let d = Dimension::new(args.d)?;
    let file: GeometryFile = serde_json::from_str(&fs::read_to_string(&args.geometry)?)?;
    let outer = file.outer_union()?;
    let inner = file.inner_union()?;
    let cover: RelativeCover = match (args.ball_radius, args.grid_step) {
        (Some(r), Some(step)) => greedy_cover(&outer, &inner, r, step)?,
        _ => cover_from_inner_balls(&outer, &inner)?,
    };
    let report = validate_cover(&cover, 256, args.seed);
    let eff = efficiency(&cover, d.get() - 1)?;
    let (_, gauge) = embedding_bound(&cover, d)?;
    let eigen = eigenvalue_bound(&cover, d, args.k)?;
    let bound_table: Vec<(u64, f64)> = (1..=args.count).map(|n| (n, eigen.eval(n))).collect();
    let out = CoverBoundOut {
        N: cover.size(),
        Gamma: eff.gamma_logs.clone(),
        norm_min: eff.norm_min,
        norm_dminus1: eff.norm_k,
        c_embedding: gauge.rate,
        c_eigen: eigen.rate,
        prefactor: eigen.prefactor,
        cover_valid: report.valid,
        bound_table,
    };
    emit_json(&args.output, &out)?;
    Ok(if report.valid {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn halfplane(args: HalfplaneArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    if !(args.conv_tol > 0.0) || !(args.entry_tol > 0.0) {
        return usage("tolerances must be positive".into());
    }
    let report = halfplane_report(
        args.gamma,
        args.kmax,
        args.samples,
        args.conv_tol,
        args.entry_tol,
    )?;
    let pass = report.pass;
    emit_json(&args.output, &report)?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn parse_map(spec: &str, default_center: Complex64) -> Result<ConformalMap, String> {
    if spec == "halfplane" {
        return Ok(ConformalMap::HalfplaneExample);
    }
    if let Some(rest) = spec.strip_prefix("scale:") {
        let (rho_text, center) = match rest.split_once('@') {
            Some((r, c)) => {
                let (cx, cy) = c
                    .split_once(',')
                    .ok_or_else(|| format!("bad center in map spec {spec:?}"))?;
                let cx: f64 = cx.parse().map_err(|e| format!("bad center x: {e}"))?;
                let cy: f64 = cy.parse().map_err(|e| format!("bad center y: {e}"))?;
                (r, Complex64::new(cx, cy))
            }
            None => (rest, default_center),
        };
        let rho: f64 = rho_text
            .parse()
            .map_err(|e| format!("bad scale factor: {e}"))?;
        return ConformalMap::scaling(center, rho).map_err(|e| e.to_string());
    }
    Err(format!(
        "unknown map {spec:?}; expected \"halfplane\" or \"scale:<rho>[@cx,cy]\""
    ))
}

#[derive(Serialize)]
struct ComposeOut {
    k_estimate: f64,
    c: f64,
    prefactor: f64,
    fitted_ratio: Option<f64>,
    violations: usize,
    pass: bool,
    eigenvalues: Vec<harmonic_spectra::galerkin::DecayRow>,
}

fn compose(args: ComposeArgs) -> Result<ExitCode, Box<dyn std::error::Error>> {
    if !(args.conv_tol > 0.0) || !(args.entry_tol > 0.0) {
        return usage("tolerances must be positive".into());
    }
    let d = Dimension::new(2)?;
    let file: GeometryFile = serde_json::from_str(&fs::read_to_string(&args.geometry)?)?;
    let outer = file.outer_union()?;
    let inner = file.inner_union()?;
    let Some(disc) = outer.as_single_ball() else {
        return usage("compose requires a single outer disc in the geometry".into());
    };
    if disc.dim() != 2 {
        return usage("compose is a planar computation; outer disc must be 2-dimensional".into());
    }
    let center = Complex64::new(disc.center[0], disc.center[1]);
    let map = match parse_map(&args.map, center) {
        Ok(m) => m,
        Err(msg) => return usage(msg),
    };
    let omega_prime = DomainUnion::single(disc.clone());

    let k_estimate = estimate_k(&map, &omega_prime, &inner, args.samples)?;
    let cover = cover_from_inner_balls(&outer, &inner)?;
    let bound = eigenvalue_bound(&cover, d, k_estimate)?;
    let (_, eigenvalues) = converged_eigenvalues(
        &map,
        &omega_prime,
        args.kmax,
        args.step,
        args.conv_tol,
        args.entry_tol,
    )?;
    let report = decay_report(&eigenvalues, &bound);
    let pass = report.violations == 0;
    let out = ComposeOut {
        k_estimate,
        c: bound.rate,
        prefactor: bound.prefactor,
        fitted_ratio: report.fitted_ratio,
        violations: report.violations,
        pass,
        eigenvalues: report.rows,
    };
    emit_json(&args.output, &out)?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
