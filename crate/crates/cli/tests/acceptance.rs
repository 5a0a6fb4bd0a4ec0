//! Acceptance suite: one PASS / FAIL line per criterion, followed by the
//! per-cell detail behind it.
//!
//! Hard criteria fail the run. Soft criteria (reproduction of printed
//! values whose methodology is not stated) report `SOFT-FAIL (finding)`
//! without failing it, but their hard sub-checks still count.

use std::cell::OnceCell;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;

use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use shortage_cli::output::{write_rows, Check};
use shortage_cli::{run_table1, Format, Table1Options, Table1Row};
use shortage_core::erlang::{
    common_diff_density, common_diff_density_closed_form, r_conditional, r_conditional_closed_form,
    theta_quadrature,
};
use shortage_core::reference::{PublishedSection, PUBLISHED_R, SECTIONS, STOCK_LEVELS};
use shortage_core::rng::{derive_seed, substream};
use shortage_core::stats;
use shortage_core::{
    alpha_probability, mixed_moment, mu11_alpha, resampling_estimate, resampling_variance,
    resampling_variance_mc, theta_exact, theta_mc, validate_sizes, AlphaPair, EventLaw,
    ExponentialPair, QuadratureSettings, ResamplingPlan, Sample, Scenario, Verdict,
};

// Pinned tolerances.
const THETA_PRINTED_TOL: f64 = 5e-5;
const THETA_REDERIVATION_TOL: f64 = 1e-12;
const THETA_QUADRATURE_TOL: f64 = 1e-8;
const THETA_MC_DRAWS: usize = 1_000_000;
const SIGMAS: f64 = 3.0;
const ALPHA_SUM_TOL: f64 = 1e-12;
const MU11_ENDPOINT_TOL: f64 = 1e-8;
/// Quadrature allowance on `μ₁₁(α) ≤ Θ`.
const MU11_BOUND_SLACK: f64 = 1e-9;
const V_MONOTONE_SLACK: f64 = 1e-15;
const V_R_MAX: usize = 5000;
const V_AT_ONE_TOL: f64 = 1e-12;
const VARIANCE_ORACLE_REPLICATIONS: usize = 10_000;
const V_PRINTED_REL_TOL: f64 = 0.25;
const CLASSICAL_REPLICATIONS: usize = 100_000;
const CLASSICAL_REL_TOL: f64 = 0.10;
const MSE_IDENTITY_TOL: f64 = 1e-12;
const PRINTED_IDENTITY_TOL: f64 = 5e-4;
const UNBIASED_REPLICATIONS: usize = 10_000;
const UNBIASED_R: usize = 1000;
const CLOSED_FORM_TOL: f64 = 1e-6;

const MASTER_SEED: u64 = 20_240_601;

#[derive(Default)]
struct Outcome {
    hard_ok: bool,
    /// `None` for hard criteria; for soft ones whether every cell matched.
    soft_ok: Option<bool>,
    summary: String,
    detail: Vec<String>,
}

impl Outcome {
    fn hard(ok: bool, summary: String, detail: Vec<String>) -> Self {
        Self {
            hard_ok: ok,
            soft_ok: None,
            summary,
            detail,
        }
    }
}

fn cells() -> impl Iterator<Item = (&'static PublishedSection, usize)> {
    SECTIONS
        .iter()
        .flat_map(|s| (0..STOCK_LEVELS.len()).map(move |i| (s, i)))
}

fn label(sec: &PublishedSection, i: usize) -> String {
    format!("s{} K={}", sec.section, STOCK_LEVELS[i])
}

fn setup(sec: &PublishedSection, i: usize) -> (ExponentialPair, Scenario) {
    (sec.rates().unwrap(), sec.scenario(STOCK_LEVELS[i]).unwrap())
}

fn rel(value: f64, target: f64) -> f64 {
    (value - target).abs() / target.abs()
}

fn criterion_1() -> Outcome {
    let mut detail = Vec::new();
    let mut passed = 0;
    for (sec, i) in cells() {
        let (p, s) = setup(sec, i);
        let t = theta_exact(&p, &s);
        let printed = sec.theta[i];
        let ok = (t - printed).abs() <= THETA_PRINTED_TOL;
        passed += usize::from(ok);
        let mut line = format!(
            "{}: computed {t:.6} printed {printed:.4} |diff| {:.1e} {}",
            label(sec, i),
            (t - printed).abs(),
            if ok { "ok" } else { "MISMATCH" }
        );
        if !ok {
            let hit = SECTIONS
                .iter()
                .find(|o| o.section != sec.section && (o.theta[i] - t).abs() <= THETA_PRINTED_TOL);
            match hit {
                Some(o) => {
                    line.push_str(&format!(" (matches the row printed under s{})", o.section))
                }
                None => line.push_str(" (matches no printed row)"),
            }
        }
        detail.push(line);
    }
    Outcome::hard(
        passed == 12,
        format!("{passed}/12 printed values within {THETA_PRINTED_TOL:e}"),
        detail,
    )
}

/// `Θ` as the binomial tail `P{Bin(m_x + m_y - 1, ν/(λ+ν)) >= m_y}`: in the
/// merged Poisson stream the `m_y`-th supply precedes the `m_x`-th demand.
fn theta_binomial_tail(p: &ExponentialPair, s: &Scenario) -> f64 {
    let (m_x, m_y) = (s.m_x(), s.m_y());
    if m_y == 0 {
        return 1.0;
    }
    let n = m_x + m_y - 1;
    let q = p.nu() / (p.lambda() + p.nu());
    let mut coeff = 1.0_f64;
    let mut total = 0.0;
    for j in 0..=n {
        if j > 0 {
            coeff *= (n - j + 1) as f64 / j as f64;
        }
        if j >= m_y {
            total += coeff * q.powi(j as i32) * (1.0 - q).powi((n - j) as i32);
        }
    }
    total
}

fn criterion_2() -> Outcome {
    let q = QuadratureSettings::default();
    let mut detail = Vec::new();
    let mut ok_all = true;
    for (n, (sec, i)) in cells().enumerate() {
        let (p, s) = setup(sec, i);
        let t = theta_exact(&p, &s);
        let nb = theta_binomial_tail(&p, &s);
        let quad = theta_quadrature(&p, &s, &q).unwrap().value;
        let x = EventLaw::Exponential(p.lambda());
        let y = EventLaw::Exponential(p.nu());
        let mc = theta_mc(
            &x,
            &y,
            &s,
            THETA_MC_DRAWS,
            derive_seed(MASTER_SEED, &[2, n as u64]),
        )
        .unwrap();
        let z = (mc.estimate - t) / mc.stderr.unwrap();
        let ok = (t - nb).abs() <= THETA_REDERIVATION_TOL
            && (t - quad).abs() <= THETA_QUADRATURE_TOL
            && z.abs() <= SIGMAS;
        ok_all &= ok;
        detail.push(format!(
            "{}: binomial {:.1e} quadrature {:.1e} oracle z {z:+.2} {}",
            label(sec, i),
            (t - nb).abs(),
            (t - quad).abs(),
            if ok { "ok" } else { "FAIL" }
        ));
    }
    Outcome::hard(
        ok_all,
        format!(
            "re-derivation within {THETA_REDERIVATION_TOL:e}, quadrature within {THETA_QUADRATURE_TOL:e}, \
             {THETA_MC_DRAWS} oracle draws within {SIGMAS} sigma"
        ),
        detail,
    )
}

fn criterion_3() -> Outcome {
    let q = QuadratureSettings::default();
    let mut detail = Vec::new();
    let mut ok_all = true;
    for (sec, i) in cells() {
        let (p, s) = setup(sec, i);
        let theta = theta_exact(&p, &s);
        let grid: Vec<AlphaPair> = AlphaPair::grid(&s).collect();
        let p_sum: f64 = grid
            .iter()
            .map(|a| alpha_probability(a, &s, sec.n_x, sec.n_y).unwrap())
            .sum();
        let mu: Vec<f64> = grid
            .par_iter()
            .map(|a| mu11_alpha(a, &p, &s, &q).unwrap())
            .collect();
        let lo = mu[0];
        let hi = *mu.last().unwrap();
        let worst = mu
            .iter()
            .map(|m| m - theta)
            .fold(f64::NEG_INFINITY, f64::max);

        let mm = mixed_moment(&p, &s, sec.n_x, sec.n_y, &q).unwrap();
        let mut monotone = true;
        let mut prev = f64::INFINITY;
        for r in 1..=V_R_MAX {
            let v = mm.variance(r).unwrap();
            monotone &= v <= prev + V_MONOTONE_SLACK;
            prev = v;
        }
        let v1 = mm.variance(1).unwrap();

        let checks = [
            (p_sum - 1.0).abs() <= ALPHA_SUM_TOL,
            (lo - theta * theta).abs() <= MU11_ENDPOINT_TOL,
            (hi - theta).abs() <= MU11_ENDPOINT_TOL,
            worst <= MU11_BOUND_SLACK,
            monotone,
            (v1 - theta * (1.0 - theta)).abs() <= V_AT_ONE_TOL,
        ];
        let ok = checks.iter().all(|c| *c);
        ok_all &= ok;
        detail.push(format!(
            "{}: |sum P - 1| {:.1e}, |mu11(0,0) - T^2| {:.1e}, |mu11(mx,my) - T| {:.1e}, \
             max mu11 - T {worst:+.1e}, V(r) nonincreasing to r={V_R_MAX}: {monotone}, \
             |V(1) - T(1-T)| {:.1e} {}",
            label(sec, i),
            (p_sum - 1.0).abs(),
            (lo - theta * theta).abs(),
            (hi - theta).abs(),
            (v1 - theta * (1.0 - theta)).abs(),
            if ok { "ok" } else { "FAIL" }
        ));
    }
    Outcome::hard(
        ok_all,
        "overlap weights, endpoint moments, bounds and V(r) on all 12 cells".into(),
        detail,
    )
}

fn criterion_4() -> Outcome {
    let q = QuadratureSettings::default();
    let sec = &SECTIONS[0];
    let mut detail = Vec::new();
    let mut ok_all = true;
    for i in 0..STOCK_LEVELS.len() {
        let (p, s) = setup(sec, i);
        let v = resampling_variance(&p, &s, sec.n_x, sec.n_y, PUBLISHED_R, &q)
            .unwrap()
            .variance;
        let plan =
            ResamplingPlan::new(PUBLISHED_R, derive_seed(MASTER_SEED, &[4, i as u64])).unwrap();
        let mc = resampling_variance_mc(
            &p,
            &s,
            sec.n_x,
            sec.n_y,
            &plan,
            VARIANCE_ORACLE_REPLICATIONS,
        )
        .unwrap();
        let z = (mc.variance - v) / mc.variance_stderr;
        let ok = z.abs() <= SIGMAS;
        ok_all &= ok;
        detail.push(format!(
            "{}: analytic {v:.6} oracle {:.6} +- {:.6} z {z:+.2} {}",
            label(sec, i),
            mc.variance,
            mc.variance_stderr,
            if ok { "ok" } else { "FAIL" }
        ));
    }
    Outcome::hard(
        ok_all,
        format!(
            "r={PUBLISHED_R}, {VARIANCE_ORACLE_REPLICATIONS} replications, within {SIGMAS} sigma"
        ),
        detail,
    )
}

fn table() -> Vec<Table1Row> {
    run_table1(&Table1Options {
        classical_replications: CLASSICAL_REPLICATIONS,
        theta_draws: 100_000,
        variance_replications: 200,
        ..Table1Options::new(MASTER_SEED)
    })
}

fn csv_field(row: &Table1Row, column: &str) -> String {
    let mut buf = Vec::new();
    write_rows(std::slice::from_ref(row), Format::Csv, &mut buf).unwrap();
    let mut r = csv::Reader::from_reader(buf.as_slice());
    let idx = r
        .headers()
        .unwrap()
        .iter()
        .position(|h| h == column)
        .unwrap();
    r.records().next().unwrap().unwrap()[idx].to_string()
}

fn criterion_5(rows: &[Table1Row]) -> Outcome {
    let mut detail = Vec::new();
    let mut matched = 0;
    let mut compared = 0;
    let mut hard_ok = true;
    for row in rows {
        let v = row.resampling_variance.expect("analytic variance computed");
        match row.resampling_variance_published {
            Some(published) => {
                compared += 1;
                let ok = rel(v, published) <= V_PRINTED_REL_TOL;
                hard_ok &= row.resampling_variance_check == Some(Check::from_bool(ok));
                matched += usize::from(ok);
                detail.push(format!(
                    "s{} K={}: analytic {v:.4} printed {published:.4} ratio {:.2} {}",
                    row.section,
                    row.k,
                    v / published,
                    if ok { "ok" } else { "finding" }
                ));
            }
            None => {
                let absent = csv_field(row, "resampling_variance_published").is_empty()
                    && csv_field(row, "resampling_variance_published_src").is_empty()
                    && row.resampling_variance_check.is_none();
                hard_ok &= absent;
                detail.push(format!(
                    "s{} K={}: analytic {v:.4} printed --- (rendered absent: {absent})",
                    row.section, row.k
                ));
            }
        }
    }
    Outcome {
        hard_ok,
        soft_ok: Some(matched == compared),
        summary: format!(
            "{matched}/{compared} printed variances within {:.0}% relative",
            V_PRINTED_REL_TOL * 100.0
        ),
        detail,
    }
}

fn criterion_6(rows: &[Table1Row]) -> Outcome {
    let mut detail = Vec::new();
    let mut matched = 0;
    let mut hard_ok = true;
    for row in rows {
        let (b, v, e) = (
            row.classical_bias.unwrap(),
            row.classical_variance.unwrap(),
            row.classical_mse.unwrap(),
        );
        let identity = (e - (v + b * b)).abs() <= MSE_IDENTITY_TOL;
        let printed_identity = (row.classical_mse_published
            - (row.classical_variance_published + row.classical_bias_published.powi(2)))
        .abs()
            <= PRINTED_IDENTITY_TOL;
        hard_ok &= identity && printed_identity;
        let ok = rel(b.abs(), row.classical_bias_published) <= CLASSICAL_REL_TOL
            && rel(v, row.classical_variance_published) <= CLASSICAL_REL_TOL
            && rel(e, row.classical_mse_published) <= CLASSICAL_REL_TOL;
        matched += usize::from(ok);
        detail.push(format!(
            "s{} K={}: B {b:+.4} (printed {:.4}) V {v:.4} (printed {:.4}) ER {e:.4} (printed {:.4}) \
             identity {identity} printed identity {printed_identity} {}",
            row.section,
            row.k,
            row.classical_bias_published,
            row.classical_variance_published,
            row.classical_mse_published,
            if ok { "ok" } else { "finding" }
        ));
    }
    Outcome {
        hard_ok,
        soft_ok: Some(matched == rows.len()),
        summary: format!(
            "{matched}/{} printed (B, V, ER) triples within {:.0}% relative at {CLASSICAL_REPLICATIONS} replications",
            rows.len(),
            CLASSICAL_REL_TOL * 100.0
        ),
        detail,
    }
}

fn exp_sample(rate: f64, n: usize, rng: &mut shortage_core::rng::StreamRng) -> Sample {
    let e = Exp::new(rate).unwrap();
    Sample::new((0..n).map(|_| e.sample(rng)).collect()).unwrap()
}

fn criterion_7() -> Outcome {
    let configs: [(f64, f64, usize, usize, usize, usize); 3] = [
        (0.3, 0.7, 14, 13, 6, 0),
        (0.3, 0.7, 10, 9, 4, 2),
        (0.3, 0.7, 8, 7, 6, 1),
    ];
    let mut detail = Vec::new();
    let mut ok_all = true;
    let mut saw_soft_warn = false;
    for (c, &(lambda, nu, n_x, n_y, m, k)) in configs.iter().enumerate() {
        let p = ExponentialPair::new(lambda, nu).unwrap();
        let s = Scenario::new(m, k).unwrap();
        let verdict = validate_sizes(n_x, n_y, &s);
        let soft = matches!(verdict, Verdict::SoftWarn(_));
        saw_soft_warn |= soft;
        let estimates: Vec<f64> = (0..UNBIASED_REPLICATIONS)
            .into_par_iter()
            .map(|j| {
                let mut rng = substream(derive_seed(MASTER_SEED, &[7, c as u64, j as u64]), 0);
                let hx = exp_sample(lambda, n_x, &mut rng);
                let hy = exp_sample(nu, n_y, &mut rng);
                let plan = ResamplingPlan::new(
                    UNBIASED_R,
                    derive_seed(MASTER_SEED, &[7, c as u64, j as u64, 1]),
                )
                .unwrap();
                resampling_estimate(&hx, &hy, &s, &plan).unwrap().estimate
            })
            .collect();
        let mean = stats::mean(&estimates);
        let se = (stats::sample_variance(&estimates) / estimates.len() as f64).sqrt();
        let theta = theta_exact(&p, &s);
        let z = (mean - theta) / se;
        let ok = z.abs() <= SIGMAS;
        ok_all &= ok;
        detail.push(format!(
            "n=({n_x},{n_y}) m={m} K={k}{}: mean {mean:.5} +- {se:.5} exact {theta:.5} z {z:+.2} {}",
            if soft { " [soft-warn sizes]" } else { "" },
            if ok { "ok" } else { "FAIL" }
        ));
    }
    Outcome::hard(
        ok_all && saw_soft_warn,
        format!("{UNBIASED_REPLICATIONS} fresh-sample replications at r={UNBIASED_R}, within {SIGMAS} sigma"),
        detail,
    )
}

fn criterion_8() -> Outcome {
    let q = QuadratureSettings::default();
    let rates = [(0.3, 0.7), (0.5, 0.7), (1.0, 1.0), (2.0, 0.4)];
    let zs = [-20.0, -5.0, -1.0, -0.1, 0.0, 0.1, 1.0, 5.0, 20.0];
    let scenarios = [(6, 0), (6, 2), (4, 1)];
    let mut cells = 0;
    let mut failing = Vec::new();
    let (mut worst_r, mut worst_f) = (0.0_f64, 0.0_f64);
    for &(lambda, nu) in &rates {
        let p = ExponentialPair::new(lambda, nu).unwrap();
        for &(m, k) in &scenarios {
            let s = Scenario::new(m, k).unwrap();
            for a in AlphaPair::grid(&s) {
                for &z in &zs {
                    cells += 1;
                    let r_q = r_conditional(z, &a, &p, &s, &q).unwrap();
                    let r_c = r_conditional_closed_form(z, &a, &p, &s).unwrap();
                    let f_q = common_diff_density(z, &a, &p, &q).unwrap().density();
                    let f_c = common_diff_density_closed_form(z, &a, &p).density();
                    let dr = (r_q - r_c).abs();
                    let df = match (f_q, f_c) {
                        (Some(x), Some(y)) => (x - y).abs(),
                        (None, None) => 0.0,
                        _ => f64::INFINITY,
                    };
                    worst_r = worst_r.max(dr);
                    worst_f = worst_f.max(df);
                    if dr > CLOSED_FORM_TOL || df > CLOSED_FORM_TOL {
                        failing.push(format!(
                            "lambda={lambda} nu={nu} m={m} K={k} alpha=({},{}) z={z}: |dR| {dr:.1e} |df| {df:.1e}",
                            a.alpha_x, a.alpha_y
                        ));
                    }
                }
            }
        }
    }
    let mut detail = vec![format!(
        "max |R closed - R quadrature| {worst_r:.1e}, max |f closed - f quadrature| {worst_f:.1e}"
    )];
    detail.extend(failing.iter().take(20).cloned());
    Outcome::hard(
        failing.is_empty(),
        format!(
            "{}/{cells} (z, alpha, lambda, nu) cells within {CLOSED_FORM_TOL:e}",
            cells - failing.len()
        ),
        detail,
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: [(&str, &[&str]); 5] = [
        (
            "resample",
            &[
                "resample", "--lambda", "0.3", "--nu", "0.7", "--nx", "14", "--ny", "13", "--m",
                "6", "--k", "0,1,2,3",
            ],
        ),
        (
            "classical",
            &[
                "classical",
                "--lambda",
                "0.5",
                "--nu",
                "0.7",
                "--nx",
                "14",
                "--ny",
                "13",
                "--m",
                "6",
                "--k",
                "0,2",
                "--replications",
                "5000",
            ],
        ),
        (
            "mc-check",
            &[
                "mc-check",
                "--lambda",
                "0.3",
                "--nu",
                "0.7",
                "--nx",
                "10",
                "--ny",
                "9",
                "--m",
                "4",
                "--k",
                "1",
                "--draws",
                "20000",
                "--oracle-replications",
                "200",
                "--r",
                "200",
            ],
        ),
        (
            "table1",
            &[
                "table1",
                "--replications",
                "2000",
                "--draws",
                "20000",
                "--oracle-replications",
                "50",
                "--r",
                "200",
            ],
        ),
        (
            "table1-json",
            &[
                "table1",
                "--replications",
                "2000",
                "--draws",
                "20000",
                "--oracle-replications",
                "50",
                "--r",
                "200",
                "--format",
                "json",
            ],
        ),
    ];
    let mut detail = Vec::new();
    let mut ok_all = true;
    for (name, args) in runs {
        let mut outputs = Vec::new();
        for (attempt, threads) in ["1", "4", "4"].iter().enumerate() {
            let path = dir.path().join(format!("{name}-{attempt}.out"));
            let status = Command::new(env!("CARGO_BIN_EXE_shortage"))
                .args(args)
                .args([
                    "--seed",
                    "42",
                    "--threads",
                    threads,
                    "--output",
                    path.to_str().unwrap(),
                ])
                .env_remove("SHORTAGE_OUTPUT_DIR")
                .status()
                .unwrap();
            assert!(status.success(), "{name} exited with {status}");
            outputs.push(std::fs::read(&path).unwrap());
        }
        let ok = outputs.windows(2).all(|w| w[0] == w[1]) && !outputs[0].is_empty();
        ok_all &= ok;
        detail.push(format!(
            "{name}: {} bytes, identical across threads 1/4/4: {ok}",
            outputs[0].len()
        ));
    }
    Outcome::hard(
        ok_all,
        "seeded subcommands byte-identical across runs and thread counts".into(),
        detail,
    )
}

type Criterion<'a> = Box<dyn FnOnce() -> Outcome + 'a>;

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Outcome::hard(false, format!("panicked: {msg}"), Vec::new())
    })
}

fn main() {
    let rows: OnceCell<Vec<Table1Row>> = OnceCell::new();
    let criteria: Vec<(u8, &str, Criterion<'_>)> = vec![
        (
            1,
            "exact theta reproduces printed values",
            Box::new(criterion_1),
        ),
        (2, "theta triple agreement", Box::new(criterion_2)),
        (3, "overlap machinery properties", Box::new(criterion_3)),
        (
            4,
            "analytic vs oracle resampling variance",
            Box::new(criterion_4),
        ),
        (
            5,
            "printed resampling variance reproduction (soft)",
            Box::new(|| criterion_5(rows.get_or_init(table))),
        ),
        (
            6,
            "printed classical moments reproduction (soft)",
            Box::new(|| criterion_6(rows.get_or_init(table))),
        ),
        (
            7,
            "resampling estimator unbiasedness",
            Box::new(criterion_7),
        ),
        (8, "closed forms vs quadrature", Box::new(criterion_8)),
        (9, "determinism", Box::new(criterion_9)),
    ];

    let mut hard_failures = Vec::new();
    for (id, title, run) in criteria {
        let out = guarded(run);
        let status = match (out.hard_ok, out.soft_ok) {
            (false, _) => "FAIL",
            (true, Some(false)) => "SOFT-FAIL (finding)",
            (true, _) => "PASS",
        };
        println!("criterion {id}: {status} - {title}: {}", out.summary);
        for line in &out.detail {
            println!("    {line}");
        }
        if !out.hard_ok {
            hard_failures.push(id);
        }
    }
    if hard_failures.is_empty() {
        println!("acceptance: all hard criteria passed");
    } else {
        println!("acceptance: hard criteria failed: {hard_failures:?}");
        std::process::exit(1);
    }
}
