//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::time::{Duration, Instant};

use bernstein_core::bergman::sample_grid;
use bernstein_core::cumulants::multi_indices;
use bernstein_core::smooth::{smooth_bernstein_apply, todd_mu_prime};
use bernstein_core::*;
use nalgebra::{DMatrix, DVector};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn family(name: &str) -> ExpFamily {
    Preset::by_name(name).unwrap().family().unwrap()
}

fn family_with(points: Vec<Vec<f64>>, weights: Vec<f64>) -> ExpFamily {
    ExpFamily::new(WeightedSupport::new(points, weights).unwrap()).unwrap()
}

/// Grid points of `P` whose distance to every facet is at least `margin`.
fn interior_grid(fam: &ExpFamily, per_dim: usize, margin: f64) -> Vec<Vec<f64>> {
    sample_grid(fam, per_dim).into_iter().filter(|x| fam.lattice().min_slack(x) >= margin).collect()
}

fn vertices(fam: &ExpFamily) -> Vec<Vec<f64>> {
    fam.lattice().vertex_ids().map(|id| fam.support().points()[fam.lattice().faces[id].indices[0]].clone()).collect()
}

fn criterion_1() -> Outcome {
    let fam = family("interval");
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 1..=64 {
        for k in 0..=100 {
            let x = k as f64 / 100.0;
            let b = bernstein_apply(&fam, |z| z[0] * z[0], n, &[x]).unwrap();
            worst = worst.max((b - (x * x + x * (1.0 - x) / n as f64)).abs());
        }
    }
    let t = start.elapsed();
    outcome(worst <= 1e-12 && t < Duration::from_secs(1), format!("max error {worst:.2e}, {:.3} s", t.as_secs_f64()))
}

fn criterion_2() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for name in ["interval", "simplex2", "square"] {
        let fam = family(name);
        for v in vertices(&fam) {
            for fname in TestFunction::names(fam.dim()) {
                let f = TestFunction::parse(&fname, fam.dim()).unwrap();
                for n in [1, 2, 5, 16] {
                    let b = bernstein_apply(&fam, |z| f.eval(z), n, &v).unwrap();
                    checked += 1;
                    if b != f.eval(&v) {
                        bad.push(format!("{name} {fname} N={n} v={v:?}"));
                    }
                }
            }
        }
    }
    let first = bad.first().map(|b| format!(", first {b:?}")).unwrap_or_default();
    outcome(bad.is_empty(), format!("{checked} exact comparisons, {} mismatches{first}", bad.len()))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let ns = [8, 16, 32, 64];
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for name in Preset::names() {
        let fam = family(&name);
        let x: Vec<f64> = match fam.dim() {
            1 if name == "interval2" => vec![0.8],
            1 => vec![0.4],
            2 => vec![0.5, 1.0 / 3.0],
            _ => vec![0.3, 0.35, 0.6],
        };
        let f = TestFunction::parse("cos3", fam.dim()).unwrap();
        for n in 1..=2 {
            let s = order_estimate(&fam, &f, &x, n, &ns).unwrap();
            worst = worst.max((s + n as f64).abs());
            lines.push(format!("{name} n={n}: {s:.3}"));
        }
    }
    let t = start.elapsed();
    outcome(
        worst <= 0.15 && t < Duration::from_secs(30),
        format!("max |slope + n| {worst:.3}, {:.1} s [{}]", t.as_secs_f64(), lines.join("; ")),
    )
}

fn criterion_4() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for name in ["interval", "simplex2", "square", "cube", "weighted-square", "interval2", "square-centered"] {
        let fam = family(&name);
        let m = fam.dim();
        for x in interior_grid(&fam, 7, 1e-3) {
            let table = ExpansionTable::build(&fam, &x, 1).unwrap();
            let a = fam.moment_matrices(&x).unwrap().a;
            for fname in ["cos3", "cos", &format!("z2{}", "1".repeat(m - 1))] {
                let f = TestFunction::parse(fname, m).unwrap();
                let hess = DMatrix::from_fn(m, m, |i, j| {
                    let mut beta = vec![0; m];
                    beta[i] += 1;
                    beta[j] += 1;
                    f.derivative_at(&x, &beta)
                });
                let closed = 0.5 * (&a * hess).trace();
                let l1 = apply_operator(&table, 1, &f).unwrap();
                worst = worst.max((l1 - closed).abs());
                count += 1;
            }
        }
    }
    outcome(worst <= 1e-10, format!("{count} evaluations, max |L_1 f − ½Tr(A∇²f)| {worst:.2e}"))
}

/// Solves the Vandermonde system `I_{N,α} = Σ_l p_l N^l` for `N = 1, …, L+1`.
fn interpolated_coefficients(fam: &ExpFamily, x: &[f64], alpha: &[usize]) -> Vec<f64> {
    let l = alpha.iter().sum::<usize>() / 2;
    let k = l + 1;
    let v = DMatrix::from_fn(k, k, |i, j| ((i + 1) as f64).powi(j as i32));
    let rhs = DVector::from_iterator(k, (1..=k).map(|n| central_moment_direct(fam, x, alpha, n).unwrap()));
    v.lu().solve(&rhs).unwrap().iter().copied().collect()
}

fn criterion_5() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for name in ["interval", "weighted-interval", "interval2", "simplex2", "weighted-simplex2", "square", "weighted-square"] {
        let fam = family(name);
        for x in interior_grid(&fam, 6, 1e-3) {
            let table = single_step_cumulants(&fam, &x, 6).unwrap();
            for order in 0..=6 {
                // coefficients that vanish identically are compared on the scale of their order
                let pairs: Vec<(Vec<f64>, Vec<f64>)> = multi_indices(fam.dim(), order)
                    .iter()
                    .map(|alpha| {
                        (table.expansion_coefficients(alpha).unwrap(), interpolated_coefficients(&fam, &x, alpha))
                    })
                    .collect();
                let scale = pairs
                    .iter()
                    .flat_map(|(p, q)| p.iter().chain(q))
                    .fold(0.0f64, |a, v| a.max(v.abs()))
                    .max(f64::MIN_POSITIVE);
                for (p, q) in &pairs {
                    for (a, b) in p.iter().zip(q) {
                        worst = worst.max((a - b).abs() / scale);
                    }
                    count += 1;
                }
            }
        }
    }
    outcome(worst <= 1e-9, format!("{count} multi-index/point pairs, max relative difference {worst:.2e}"))
}

fn criterion_6() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for name in ["interval", "simplex2", "square", "weighted-simplex2"] {
        let fam = family(name);
        let pts = interior_grid(&fam, 5, 0.05);
        for x in pts.iter().step_by(2) {
            for order in 0..=3 {
                for alpha in multi_indices(fam.dim(), order) {
                    for j in 0..fam.dim() {
                        for n in [1, 2, 5, 8] {
                            worst = worst.max(recursion_check(&fam, x, &alpha, j, n).unwrap());
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    outcome(worst <= 1e-5, format!("{count} residuals, max {worst:.2e}"))
}

fn kl(y: f64, x: f64) -> f64 {
    y * (y / x).ln() + (1.0 - y) * ((1.0 - y) / (1.0 - x)).ln()
}

fn criterion_7() -> Outcome {
    let mut agree: f64 = 0.0;
    let mut pairs = 0;
    for name in Preset::names() {
        let fam = family(&name);
        let pts = interior_grid(&fam, 5, 1e-3);
        for x in &pts {
            for y in &pts {
                let c = rate_closed(&fam, x, y).unwrap().finite().unwrap();
                let l = rate_legendre(&fam, x, y).unwrap();
                agree = agree.max((c - l).abs());
                pairs += 1;
            }
        }
    }
    let fam = family("interval");
    let mut kl_err: f64 = 0.0;
    for i in 1..20 {
        for j in 1..20 {
            let (x, y) = (i as f64 / 20.0, j as f64 / 20.0);
            let c = rate_closed(&fam, &[x], &[y]).unwrap().finite().unwrap();
            kl_err = kl_err.max((c - kl(y, x)).abs());
        }
    }
    let ns: Vec<usize> = (100..=200).step_by(10).collect();
    let rep = empirical_decay_check(&fam, &[0.3], &[0.6], 0.02, &ns, DecayMethod::Exact).unwrap();
    let pass = agree <= 1e-8 && kl_err <= 1e-10 && rep.relative_error.abs() <= 0.10;
    outcome(
        pass,
        format!(
            "{pairs} pairs, max |closed − legendre| {agree:.2e}; max |closed − KL| {kl_err:.2e}; \
             decay slope {:.5} vs KL {:.5} ({:+.2}%)",
            rep.slope,
            rep.rate,
            100.0 * rep.relative_error
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let fam = ToddFamily::default();
    let (mut norm_err, mut bary_err, mut grad_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let h = 1e-5;
    for k in 1..20 {
        let x = k as f64 / 20.0;
        norm_err = norm_err.max((fam.integrate(x, |_| 1.0).unwrap() - 1.0).abs());
        bary_err = bary_err.max((fam.integrate(x, |z| z).unwrap() - x).abs());
        let kx = fam.defining_function(x).unwrap();
        for j in 0..=10 {
            let z = j as f64 / 10.0;
            let fd = ((fam.density(z, x + h).unwrap()).ln() - (fam.density(z, x - h).unwrap()).ln()) / (2.0 * h);
            let exact = kx * (z - x);
            grad_err = grad_err.max((fd - exact).abs() / exact.abs().max(1.0));
        }
    }
    let n = 64;
    let grid = ToddPowerGrid::new(n, 4096).unwrap();
    let f = |z: f64| (3.0 * z).cos();
    let mut vor: f64 = 0.0;
    for &x in &[0.2, 0.35, 0.8] {
        let b = grid.apply(&fam, f, x).unwrap();
        let lhs = n as f64 * (b - f(x));
        let rhs = 0.5 * todd_mu_prime(fam.tau(x).unwrap()) * (-9.0 * f(x));
        vor = vor.max((lhs - rhs).abs() / rhs.abs());
    }
    // the fast path is checked against direct convolution at a smaller size
    let small = ToddPowerGrid::new(6, 1025).unwrap();
    let direct = smooth_bernstein_apply(&fam, f, 6, 0.35, 1025).unwrap();
    let paths = (small.apply(&fam, f, 0.35).unwrap() - direct).abs();
    let t = start.elapsed();
    let pass = norm_err <= 1e-8 && bary_err <= 1e-8 && grad_err <= 1e-4 && vor <= 0.05 && paths < 1e-12
        && t < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "normalization {norm_err:.1e}, barycenter {bary_err:.1e}, gradient law {grad_err:.1e}, \
             Voronovskaya rel {:.2}%, fast vs direct {paths:.1e}, {:.1} s",
            100.0 * vor,
            t.as_secs_f64()
        ),
    )
}

fn criterion_9() -> Outcome {
    let cfg = QuadratureConfig::default();
    let mut lines = Vec::new();
    let mut pass = true;

    let mut balanced_ok = true;
    let mut bbary: f64 = 0.0;
    for name in ["interval", "simplex2", "square"] {
        for n in [2, 5, 8] {
            let ctx = BergmanContext::new(family(name), n, cfg).unwrap();
            let rep = ctx.balanced_report(9).unwrap();
            bbary = bbary.max(rep.bbary_residual);
            if !(rep.r_spread <= 1e-7 && rep.all_hold()) {
                balanced_ok = false;
                lines.push(format!("{name} N={n} not balanced: {rep:?}"));
            }
        }
    }
    lines.push(format!("unit-weight presets balanced: {balanced_ok}"));
    pass &= balanced_ok;

    let weighted = BergmanContext::new(family("weighted-interval"), 2, cfg).unwrap();
    let rep = weighted.balanced_report(21).unwrap();
    bbary = bbary.max(rep.bbary_residual);
    let weighted_ok = rep.all_fail();
    lines.push(format!(
        "weighted interval c=(1,2) N=2 all four false: {weighted_ok} (flags {:?}, R spread {:.1e}, Π spread {:.1e})",
        rep.flags, rep.r_spread, rep.kernel_spread
    ));
    pass &= weighted_ok;

    for name in ["interval2", "weighted-square"] {
        let ctx = BergmanContext::new(family(name), 4, cfg).unwrap();
        let rep = ctx.balanced_report(9).unwrap();
        bbary = bbary.max(rep.bbary_residual);
        lines.push(format!("{name} N=4 flags {:?} (coherent: {})", rep.flags, rep.coherent()));
        pass &= rep.all_fail();
    }
    lines.push(format!("barycenter-defect residual {bbary:.1e}"));
    pass &= bbary <= 1e-5;

    let mut riemann: f64 = 0.0;
    for name in ["interval", "simplex2", "square", "weighted-interval", "interval2", "weighted-square"] {
        for n in 1..=8 {
            let ctx = BergmanContext::new(family(name), n, cfg).unwrap();
            for fname in ["one", "cos3"] {
                let f = TestFunction::parse(fname, ctx.family().dim()).unwrap();
                let chk = ctx.riemann_identity_check(|z| f.eval(z)).unwrap();
                riemann = riemann.max((chk.lhs - chk.rhs).abs());
            }
        }
    }
    lines.push(format!("Riemann identity max error {riemann:.1e}"));
    pass &= riemann <= 1e-8;
    outcome(pass, lines.join("; "))
}

fn criterion_10() -> Outcome {
    let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
    let fams =
        [vec![1.0, 1.0, 1.0], vec![1.0, 2.0, 3.0], vec![0.1, 5.0, 2.0]].map(|w| family_with(tri.clone(), w));
    let mut worst: f64 = 0.0;
    let grid = sample_grid(&fams[0], 21);
    for x in &grid {
        let base = fams[0].measure_at(x).unwrap();
        for f in &fams[1..] {
            let m = f.measure_at(x).unwrap();
            for (a, b) in base.masses.iter().zip(&m.masses) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("{} grid points, max mass difference {worst:.2e}", grid.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("classical identity B_N(z^2)", criterion_1),
        ("vertex interpolation", criterion_2),
        ("expansion order slopes", criterion_3),
        ("L_1 closed form", criterion_4),
        ("coefficient oracle", criterion_5),
        ("moment recursion residual", criterion_6),
        ("rate functions", criterion_7),
        ("smooth measure identities", criterion_8),
        ("Bergman balance", criterion_9),
        ("weight invariance on simplices", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let status = if o.pass { "PASS" } else { "FAIL" };
        println!("{status} criterion {:>2} {name} ({:.2} s): {}", i + 1, start.elapsed().as_secs_f64(), o.detail);
        if !o.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
