use std::path::PathBuf;

use bernstein_core::bergman::sample_grid;
use bernstein_core::smooth::todd_mu_prime;
use bernstein_core::{
    bernstein_apply, empirical_decay_check, expansion_remainder, order_estimate, rate_closed, rate_legendre,
    BergmanContext, DecayMethod, Error, ExpFamily, ExtendedReal, NewtonConfig, Preset, QuadratureConfig, TestFunction,
    ToddFamily, ToddPowerGrid,
};
use clap::Args;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{CliError, CliResult};
use crate::output::{config_hash, coord_header, coords, num, Csv, VERSION};
use crate::spec::{self, PolytopeSpec};

#[derive(Args, Debug, Clone, Serialize)]
pub struct PolytopeArgs {
    /// Built-in polytope (see `bernstein presets`).
    #[arg(long, conflicts_with = "spec")]
    pub preset: Option<String>,
    /// Polytope-spec JSON file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Newton tolerance on the moment-map residual.
    #[arg(long, default_value_t = 1e-12)]
    pub newton_tol: f64,
    #[arg(long, default_value_t = 200)]
    pub newton_max_iter: usize,
}

impl PolytopeArgs {
    fn resolve(&self) -> CliResult<(PolytopeSpec, ExpFamily)> {
        let spec = spec::load(self.preset.as_deref(), self.spec.as_deref())?;
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            return Err(CliError::Validation("Newton tolerance and iteration cap must be positive".into()));
        }
        let newton = NewtonConfig { tol: self.newton_tol, max_iter: self.newton_max_iter, ..NewtonConfig::default() };
        let fam = spec.family(newton)?;
        Ok((spec, fam))
    }
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub polytope: PolytopeArgs,
    /// Catalog function: one, x<i>, z<exponents>, cos, cos3.
    #[arg(long = "f")]
    pub f: String,
    /// Comma-separated list of N.
    #[arg(long = "N", value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    /// Grid points per axis of the bounding box.
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ExpansionArgs {
    #[command(flatten)]
    pub polytope: PolytopeArgs,
    #[arg(long = "f")]
    pub f: String,
    /// Expansion orders n.
    #[arg(long = "n", value_delimiter = ',', default_value = "1,2")]
    pub orders: Vec<usize>,
    #[arg(long = "N", value_delimiter = ',', default_value = "8,16,32,64")]
    pub n: Vec<usize>,
    /// Evaluation point; defaults to the interior grid points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    #[arg(long, default_value_t = 5)]
    pub grid: usize,
    /// Minimum distance to the boundary for grid points.
    #[arg(long, default_value_t = 1e-3)]
    pub margin: f64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct RateArgs {
    #[command(flatten)]
    pub polytope: PolytopeArgs,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub x: Vec<f64>,
    /// Target point, comma-separated; repeatable. Defaults to the grid.
    #[arg(long, allow_hyphen_values = true)]
    pub y: Vec<String>,
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    /// Also fit the empirical decay slope of P(|S_N/N − y| <= radius).
    #[arg(long)]
    pub decay: bool,
    #[arg(long, default_value_t = 0.02)]
    pub radius: f64,
    #[arg(long = "N", value_delimiter = ',', default_value = "100,110,120,130,140,150,160,170,180,190,200")]
    pub n: Vec<usize>,
    /// Monte-Carlo samples per N; 0 sums the exact convolution power.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Smooth1dArgs {
    #[arg(long = "f")]
    pub f: String,
    #[arg(long = "N", value_delimiter = ',', default_value = "8,16,32,64")]
    pub n: Vec<usize>,
    /// Evaluation points in [0, 1].
    #[arg(long, default_value_t = 11)]
    pub grid: usize,
    /// Density grid size on [0, 1].
    #[arg(long, default_value_t = 4096)]
    pub n_grid: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BergmanArgs {
    #[command(flatten)]
    pub polytope: PolytopeArgs,
    #[arg(long = "N")]
    pub n: usize,
    #[arg(long = "f", default_value = "one")]
    pub f: String,
    /// Grid points per axis for the balance checks.
    #[arg(long, default_value_t = 9)]
    pub per_dim: usize,
    /// Also write Π_N on a grid to this CSV file.
    #[arg(long)]
    pub kernel_csv: Option<PathBuf>,
    #[arg(long, default_value_t = 11)]
    pub kernel_grid: usize,
    #[arg(long, default_value_t = QuadratureConfig::default().order)]
    pub quad_order: usize,
    #[arg(long, default_value_t = QuadratureConfig::default().check_order)]
    pub check_order: usize,
    #[arg(long, default_value_t = QuadratureConfig::default().tol)]
    pub quad_tol: f64,
}

fn check_ns(ns: &[usize]) -> CliResult<()> {
    if ns.is_empty() || ns.contains(&0) {
        return Err(CliError::Validation("N values must be at least 1".into()));
    }
    Ok(())
}

fn check_grid(grid: usize, flag: &str) -> CliResult<()> {
    if grid < 2 {
        return Err(CliError::Validation(format!("{flag} must be at least 2")));
    }
    Ok(())
}

fn catalog(name: &str, dim: usize) -> CliResult<TestFunction> {
    TestFunction::parse(name, dim).map_err(|e| CliError::Validation(e.to_string()))
}

fn point(x: &[f64], fam: &ExpFamily, flag: &str) -> CliResult<Vec<f64>> {
    if x.len() != fam.dim() {
        return Err(CliError::Validation(format!("{flag} needs {} coordinates, got {}", fam.dim(), x.len())));
    }
    Ok(x.to_vec())
}

fn parse_point(text: &str, fam: &ExpFamily, flag: &str) -> CliResult<Vec<f64>> {
    let x = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Validation(format!("{flag} `{text}`: {e}")))?;
    point(&x, fam, flag)
}

/// Runs `f` over `items` in parallel, keeping input order.
fn par_rows<T: Sync>(items: &[T], f: impl Fn(&T) -> CliResult<Vec<Vec<String>>> + Sync + Send) -> CliResult<Vec<Vec<String>>> {
    let blocks: Vec<CliResult<Vec<Vec<String>>>> = items.par_iter().map(f).collect();
    let mut rows = Vec::new();
    for b in blocks {
        rows.extend(b?);
    }
    Ok(rows)
}

pub fn approx(args: &ApproxArgs) -> CliResult<String> {
    check_ns(&args.n)?;
    check_grid(args.grid, "--grid")?;
    let (_, fam) = args.polytope.resolve()?;
    let f = catalog(&args.f, fam.dim())?;
    let mut header = coord_header("x", fam.dim());
    header.extend(["N", "bernstein", "f", "error"].map(String::from));
    let grid = sample_grid(&fam, args.grid);
    let rows = par_rows(&grid, |x| {
        let fx = f.eval(x);
        args.n
            .iter()
            .map(|&n| {
                let b = bernstein_apply(&fam, |z| f.eval(z), n, x)?;
                let mut row = coords(x);
                row.extend([n.to_string(), num(b), num(fx), num(b - fx)]);
                Ok(row)
            })
            .collect()
    })?;
    let mut csv = Csv::new(&header);
    rows.iter().for_each(|r| csv.row(r));
    Ok(csv.into_string())
}

pub fn expansion(args: &ExpansionArgs) -> CliResult<String> {
    check_ns(&args.n)?;
    check_grid(args.grid, "--grid")?;
    if args.orders.is_empty() || args.orders.contains(&0) {
        return Err(CliError::Validation("expansion orders must be at least 1".into()));
    }
    let (_, fam) = args.polytope.resolve()?;
    let f = catalog(&args.f, fam.dim())?;
    let points = match &args.x {
        Some(x) => vec![point(x, &fam, "--x")?],
        None => sample_grid(&fam, args.grid).into_iter().filter(|x| fam.lattice().min_slack(x) >= args.margin).collect(),
    };
    let mut header = coord_header("x", fam.dim());
    header.extend(["n", "N", "remainder", "slope"].map(String::from));
    let rows = par_rows(&points, |x| {
        let mut out = Vec::new();
        for &order in &args.orders {
            let slope = match order_estimate(&fam, &f, x, order, &args.n) {
                Ok(s) => s,
                Err(Error::DegenerateFit(_)) => f64::NAN,
                Err(e) => return Err(e.into()),
            };
            for &n in &args.n {
                let r = expansion_remainder(&fam, &f, x, n, order)?;
                let mut row = coords(x);
                row.extend([order.to_string(), n.to_string(), num(r), num(slope)]);
                out.push(row);
            }
        }
        Ok(out)
    })?;
    let mut csv = Csv::new(&header);
    rows.iter().for_each(|r| csv.row(r));
    Ok(csv.into_string())
}

pub fn rate(args: &RateArgs) -> CliResult<String> {
    check_grid(args.grid, "--grid")?;
    if args.decay {
        check_ns(&args.n)?;
        if !(args.radius > 0.0) {
            return Err(CliError::Validation("--radius must be positive".into()));
        }
    }
    let (_, fam) = args.polytope.resolve()?;
    let x = point(&args.x, &fam, "--x")?;
    let targets: Vec<Vec<f64>> = if args.y.is_empty() {
        sample_grid(&fam, args.grid)
    } else {
        args.y.iter().map(|t| parse_point(t, &fam, "--y")).collect::<CliResult<_>>()?
    };
    let mut header = coord_header("x", fam.dim());
    header.extend(coord_header("y", fam.dim()));
    header.extend(["rate_closed", "rate_legendre", "slope"].map(String::from));
    let indexed: Vec<(usize, &Vec<f64>)> = targets.iter().enumerate().collect();
    let rows = par_rows(&indexed, |&(i, y)| {
        let closed = rate_closed(&fam, &x, y)?;
        let legendre = match closed {
            ExtendedReal::Finite(_) => num(rate_legendre(&fam, &x, y)?),
            ExtendedReal::PosInfinity => "inf".into(),
        };
        let far = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() > args.radius;
        let slope = if args.decay && closed.is_finite() && far {
            let report = if args.samples == 0 {
                empirical_decay_check(&fam, &x, y, args.radius, &args.n, DecayMethod::Exact)?
            } else {
                // one stream per target keeps the output independent of scheduling
                let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
                rng.set_stream(i as u64);
                let method = DecayMethod::MonteCarlo { samples: args.samples, rng: &mut rng };
                empirical_decay_check(&fam, &x, y, args.radius, &args.n, method)?
            };
            num(report.slope)
        } else {
            num(f64::NAN)
        };
        let mut row = coords(&x);
        row.extend(coords(y));
        row.extend([closed.to_string(), legendre, slope]);
        Ok(vec![row])
    })?;
    let mut csv = Csv::new(&header);
    rows.iter().for_each(|r| csv.row(r));
    Ok(csv.into_string())
}

pub fn smooth1d(args: &Smooth1dArgs) -> CliResult<String> {
    check_ns(&args.n)?;
    check_grid(args.grid, "--grid")?;
    check_grid(args.n_grid, "--n-grid")?;
    let f = catalog(&args.f, 1)?;
    let fam = ToddFamily::default();
    let xs: Vec<f64> = (0..args.grid).map(|k| k as f64 / (args.grid - 1) as f64).collect();
    let header = ["x", "N", "bernstein", "f", "scaled_error", "half_a_f2"].map(String::from);
    let mut csv = Csv::new(&header);
    let mut rows: Vec<(usize, usize, Vec<String>)> = Vec::new();
    for (j, &n) in args.n.iter().enumerate() {
        let power = ToddPowerGrid::new(n, args.n_grid)?;
        let block: Vec<CliResult<(usize, usize, Vec<String>)>> = xs
            .par_iter()
            .enumerate()
            .map(|(i, &x)| {
                let fx = f.eval(&[x]);
                let b = power.apply(&fam, |z| f.eval(&[z]), x)?;
                // A vanishes at the endpoints
                let a = if x > 0.0 && x < 1.0 { todd_mu_prime(fam.tau(x)?) } else { 0.0 };
                let row = vec![
                    num(x),
                    n.to_string(),
                    num(b),
                    num(fx),
                    num(n as f64 * (b - fx)),
                    num(0.5 * a * f.derivative_at(&[x], &[2])),
                ];
                Ok((i, j, row))
            })
            .collect();
        for r in block {
            rows.push(r?);
        }
    }
    rows.sort_by_key(|&(i, j, _)| (i, j));
    rows.iter().for_each(|(_, _, r)| csv.row(r));
    Ok(csv.into_string())
}

pub fn bergman(args: &BergmanArgs) -> CliResult<String> {
    check_ns(&[args.n])?;
    check_grid(args.per_dim, "--per-dim")?;
    check_grid(args.kernel_grid, "--kernel-grid")?;
    let (spec, fam) = args.polytope.resolve()?;
    let f = catalog(&args.f, fam.dim())?;
    let cfg = QuadratureConfig { order: args.quad_order, check_order: args.check_order, tol: args.quad_tol };
    let ctx = BergmanContext::new(fam, args.n, cfg)?;
    let report = ctx.balanced_report(args.per_dim)?;
    let riemann = ctx.riemann_identity_check(|z| f.eval(z))?;
    if let Some(path) = &args.kernel_csv {
        let grid = sample_grid(ctx.family(), args.kernel_grid);
        let values: Vec<CliResult<f64>> = grid.par_iter().map(|x| Ok(ctx.kernel(x)?)).collect();
        let mut header = coord_header("x", ctx.family().dim());
        header.push("kernel".into());
        let mut csv = Csv::new(&header);
        for (x, v) in grid.iter().zip(values) {
            let mut row = coords(x);
            row.push(num(v?));
            csv.row(&row);
        }
        crate::output::emit(Some(path), &csv.into_string())?;
    }
    let hashed = json!({ "command": "bergman", "args": args, "polytope": spec });
    let doc = json!({
        "version": VERSION,
        "config_hash": config_hash(&hashed),
        "polytope": spec,
        "N": args.n,
        "function": args.f,
        "quadrature": { "order": cfg.order, "check_order": cfg.check_order, "relative_error": ctx.quadrature_error() },
        "sums": ctx.sums(),
        "path_weights": ctx.path_weights(),
        "norming_constants": ctx.norming_constants(),
        "q_values": ctx.q_values(),
        "balance": {
            "r_spread": report.r_spread,
            "kernel_spread": report.kernel_spread,
            "barycenter_defect": report.barycenter_defect,
            "mass_defect": report.mass_defect,
            "flags": {
                "norming_constant_constant": report.flags[0],
                "kernel_constant": report.flags[1],
                "barycenter_exact": report.flags[2],
                "masses_agree": report.flags[3],
            },
            "all_hold": report.all_hold(),
            "coherent": report.coherent(),
            "bbary_residual": report.bbary_residual,
            "grid_points": report.grid_points,
        },
        "riemann": {
            "lhs": riemann.lhs,
            "rhs": riemann.rhs,
            "abs_error": (riemann.lhs - riemann.rhs).abs(),
            "missing_lattice_points": riemann.missing_lattice_points,
        },
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    Ok(text)
}

pub fn presets() -> String {
    let list: Vec<_> = Preset::all()
        .iter()
        .map(|p| {
            json!({
                "name": p.name,
                "dim": p.dim(),
                "points": p.points,
                "weights": p.weights,
                "description": p.description,
                "provenance": p.provenance,
            })
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&list).expect("preset list serializes");
    text.push('\n');
    text
}
