use std::path::PathBuf;

use cathub::detector::{
    firstorder_multiplier, lossy_fidelity_exact, lossy_prob, reduction_factor, tradeoff_product,
};
use cathub::oracle::{compare, Comparison, OracleGrid, DEFAULT_CUTOFF};
use cathub::probability::joint_success_prob;
use cathub::{mean_photon, optimal_y, HubConfig, Outcome, Parity};

use crate::args::{BetaGrid, Common, DetectorArgs, OracleArgs, ProbArgs, SweepArgs};
use crate::csv::{join, Cell, Table};
use crate::error::{CliError, Result};
use crate::settings::Settings;

/// What a command produced: CSV for `--out` (or stdout) and summary lines
/// for stderr.
pub struct Output {
    pub out: Option<PathBuf>,
    pub csv: String,
    pub summary: Vec<String>,
    /// Set when the command ran but its check failed.
    pub failure: Option<String>,
}

struct Run {
    out: Option<PathBuf>,
    digits: usize,
    workers: Option<usize>,
}

/// Runs `f` on a pool of `workers` threads, or on the global pool when unset.
#[cfg(feature = "parallel")]
fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    match workers {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| usage(format!("cannot start {n} workers: {e}")))?
            .install(f),
    }
}

#[cfg(not(feature = "parallel"))]
fn with_workers<T: Send>(
    _workers: Option<usize>,
    f: impl FnOnce() -> Result<T> + Send,
) -> Result<T> {
    f()
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn common(st: &mut Settings, c: Common) -> Result<Run> {
    let digits = st.get("precision", c.precision, 12)?;
    if !(1..=17).contains(&digits) {
        return Err(usage(format!(
            "--precision must be between 1 and 17, got {digits}"
        )));
    }
    let workers = st.opt("workers", c.workers)?;
    if workers == Some(0) {
        return Err(usage("--workers must be at least 1"));
    }
    Ok(Run {
        out: st.opt("out", c.out)?,
        digits,
        workers,
    })
}

fn parse_parity(s: &str) -> Result<Parity> {
    match s {
        "even" => Ok(Parity::Even),
        "odd" => Ok(Parity::Odd),
        _ => Err(usage(format!("parity must be `even` or `odd`, got `{s}`"))),
    }
}

fn beta_grid(st: &mut Settings, g: BetaGrid, default: (f64, f64, f64)) -> Result<Vec<f64>> {
    let explicit = st.list("beta", g.beta, vec![])?;
    let lo = st.get("beta-min", g.beta_min, default.0)?;
    let hi = st.get("beta-max", g.beta_max, default.1)?;
    let step = st.get("beta-step", g.beta_step, default.2)?;
    let values = if explicit.is_empty() {
        if !(step > 0.0 && lo.is_finite() && hi >= lo) {
            return Err(usage(format!("invalid beta range {lo}..{hi} step {step}")));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| lo + step * i as f64).collect()
    } else {
        explicit
    };
    if let Some(b) = values.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(usage(format!(
            "beta must be finite and nonnegative, got {b}"
        )));
    }
    Ok(values)
}

fn check_t(ts: &[f64]) -> Result<()> {
    if ts.is_empty() {
        return Err(usage("transmittance list is empty"));
    }
    match ts.iter().find(|t| !(**t > 0.0 && **t <= 1.0)) {
        Some(t) => Err(usage(format!("transmittance must lie in (0, 1], got {t}"))),
        None => Ok(()),
    }
}

struct SweepPlan {
    run: Run,
    parity: Parity,
    points: Vec<(u64, f64)>,
}

fn sweep_plan(a: SweepArgs) -> Result<SweepPlan> {
    let mut st = Settings::load(a.common.config.as_deref())?;
    let run = common(&mut st, a.common)?;
    let parity = parse_parity(&st.get("parity", a.parity, "even".to_string())?)?;
    let default_n = match parity {
        Parity::Even => vec![10, 20, 40, 90],
        Parity::Odd => vec![11, 21, 41, 91],
    };
    let ns = st.list("N", a.n, default_n)?;
    let betas = beta_grid(&mut st, a.beta, (0.5, 7.0, 0.05))?;
    st.finish()?;
    if ns.is_empty() {
        return Err(usage("N list is empty"));
    }
    if let Some(n) = ns.iter().find(|&&n| Parity::of(n) != parity) {
        return Err(usage(format!("N = {n} does not have {parity} parity")));
    }
    let points = ns
        .iter()
        .flat_map(|&n| betas.iter().map(move |&b| (n, b)))
        .collect();
    Ok(SweepPlan {
        run,
        parity,
        points,
    })
}

pub fn fidelity_sweep(a: SweepArgs) -> Result<Output> {
    let plan = sweep_plan(a)?;
    let digits = plan.run.digits;
    let out = plan.run.out.clone();
    with_workers(plan.run.workers, move || {
        let parity = plan.parity;
        let rows = cathub::par::map(&plan.points, |&(n, b)| optimal_y(parity, n, b));
        let mut t = Table::new(
            &["parity", "N", "beta", "y_star", "fidelity", "evaluations"],
            digits,
        );
        for (&(n, b), r) in plan.points.iter().zip(rows) {
            let r = r?;
            t.row(vec![
                parity.as_str().into(),
                n.into(),
                b.into(),
                r.y_star.into(),
                r.fidelity.into(),
                r.evaluations.into(),
            ]);
        }
        Ok(Output {
            out,
            csv: t.into_string(),
            summary: vec![format!("{} points", plan.points.len())],
            failure: None,
        })
    })
}

pub fn meanphoton_sweep(a: SweepArgs) -> Result<Output> {
    let plan = sweep_plan(a)?;
    let digits = plan.run.digits;
    let out = plan.run.out.clone();
    with_workers(plan.run.workers, move || {
        let parity = plan.parity;
        let rows = cathub::par::map(&plan.points, |&(n, b)| -> cathub::Result<(f64, f64)> {
            let y = optimal_y(parity, n, b)?.y_star;
            Ok((y, mean_photon(parity, n, y)?))
        });
        let mut t = Table::new(
            &["parity", "N", "beta", "y_star", "mean_n", "beta_sq"],
            digits,
        );
        let mut peak = (0, 0.0, f64::NEG_INFINITY);
        for (&(n, b), r) in plan.points.iter().zip(rows) {
            let (y, m) = r?;
            if m > peak.2 {
                peak = (n, b, m);
            }
            t.row(vec![
                parity.as_str().into(),
                n.into(),
                b.into(),
                y.into(),
                m.into(),
                (b * b).into(),
            ]);
        }
        Ok(Output {
            out,
            csv: t.into_string(),
            summary: vec![format!(
                "{} points; largest <n> = {:.4} at N = {}, beta = {}",
                plan.points.len(),
                peak.2,
                peak.0,
                peak.1
            )],
            failure: None,
        })
    })
}

pub fn prob_sweep(a: ProbArgs) -> Result<Output> {
    let mut st = Settings::load(a.common.config.as_deref())?;
    let run = common(&mut st, a.common)?;
    let ts = st.list("t", a.t, vec![0.8, 0.77])?;
    let total = st.get("N", a.n, 20)?;
    let betas = beta_grid(&mut st, a.beta, (2.2, 3.0, 0.05))?;
    st.finish()?;
    check_t(&ts)?;
    let parity = Parity::of(total);
    if parity == Parity::Odd && betas.contains(&0.0) {
        return Err(usage("odd N needs beta > 0"));
    }
    let digits = run.digits;
    let out = run.out.clone();
    with_workers(run.workers, move || {
        let ys: Vec<cathub::Result<f64>> =
            cathub::par::map(&betas, |&b| optimal_y(parity, total, b).map(|r| r.y_star));
        let ys: Vec<f64> = ys.into_iter().collect::<cathub::Result<_>>()?;
        let points: Vec<(f64, usize)> = ts
            .iter()
            .flat_map(|&t| (0..betas.len()).map(move |i| (t, i)))
            .collect();
        let blocks = cathub::par::map(&points, |&(t, i)| prob_block(t, ys[i], total));
        let header = [
            "t",
            "beta",
            "n1",
            "n2",
            "y2",
            "s_backsolved",
            "probability",
            "p_single",
            "feasible",
        ];
        let mut tab = Table::new(&header, digits);
        let mut infeasible = 0;
        for (&(t, i), block) in points.iter().zip(blocks) {
            let block = block?;
            if block.s.is_nan() {
                infeasible += 1;
            }
            for (n1, p) in block.probs.iter().enumerate() {
                tab.row(vec![
                    t.into(),
                    betas[i].into(),
                    (n1 as u64).into(),
                    (total - n1 as u64).into(),
                    ys[i].into(),
                    block.s.into(),
                    (*p).into(),
                    block.single.into(),
                    (!block.s.is_nan()).into(),
                ]);
            }
        }
        Ok(Output {
            out,
            csv: tab.into_string(),
            summary: vec![format!(
                "{} (t, beta) points, {infeasible} infeasible",
                points.len()
            )],
            failure: None,
        })
    })
}

struct ProbBlock {
    s: f64,
    single: f64,
    probs: Vec<f64>,
}

fn prob_block(t: f64, y: f64, total: u64) -> cathub::Result<ProbBlock> {
    let single = match HubConfig::with_final_y(y, vec![t]) {
        Ok(cfg) => joint_success_prob(&cfg, &Outcome::new(vec![total])?)?.to_f64(),
        Err(_) => f64::NAN,
    };
    let Ok(cfg) = HubConfig::with_final_y(y, vec![t, t]) else {
        return Ok(ProbBlock {
            s: f64::NAN,
            single,
            probs: vec![f64::NAN; total as usize + 1],
        });
    };
    let probs = (0..=total)
        .map(|n1| Ok(joint_success_prob(&cfg, &Outcome::new(vec![n1, total - n1])?)?.to_f64()))
        .collect::<cathub::Result<_>>()?;
    Ok(ProbBlock {
        s: cfg.s(),
        single,
        probs,
    })
}

/// `total` photons spread as evenly as possible over `k` detectors.
fn balanced(total: u64, k: usize) -> Vec<u64> {
    let k64 = k as u64;
    (0..k64)
        .map(|i| total / k64 + u64::from(i < total % k64))
        .collect()
}

pub fn detector_report(a: DetectorArgs) -> Result<Output> {
    let mut st = Settings::load(a.common.config.as_deref())?;
    let run = common(&mut st, a.common)?;
    let ts = st.list("t", a.t, vec![0.9, 0.95, 0.98])?;
    let ks = st.list("k", a.k, vec![1, 2])?;
    let eta = st.get("eta", a.eta, 0.98)?;
    let mean_n = st.get("mean-n", a.mean_n, 35.0)?;
    let n = st.get("N", a.n, 20)?;
    let beta = st.get("beta", a.beta, 3.0)?;
    st.finish()?;
    check_t(&ts)?;
    if ks.is_empty() || ks.contains(&0) {
        return Err(usage("k values must be at least 1"));
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(usage(format!("eta must lie in (0, 1], got {eta}")));
    }
    if mean_n.is_nan() || mean_n < 0.0 {
        return Err(usage(format!("mean-n must be nonnegative, got {mean_n}")));
    }
    let digits = run.digits;
    let out = run.out.clone();
    with_workers(run.workers, move || {
        let parity = Parity::of(n);
        let opt = optimal_y(parity, n, beta)?;
        let state_n = mean_photon(parity, n, opt.y_star)?;
        let points: Vec<(usize, f64)> = ks
            .iter()
            .flat_map(|&k| ts.iter().map(move |&t| (k, t)))
            .collect();
        let rows = cathub::par::map(&points, |&(k, t)| {
            detector_row(k, t, eta, mean_n, n, beta, opt.y_star, opt.fidelity)
        });
        let header = [
            "k",
            "t",
            "eta",
            "T",
            "mean_n",
            "reduction_factor",
            "fidelity_multiplier",
            "prob_multiplier",
            "N",
            "beta",
            "y_star",
            "mean_n_state",
            "fidelity_multiplier_state",
            "prob_multiplier_state",
            "tradeoff_closed_form",
            "tradeoff_product",
            "fidelity_multiplier_exact",
            "prob_multiplier_exact",
        ];
        let mut tab = Table::new(&header, digits);
        let mut summary = vec![format!(
            "N = {n}, beta = {beta}: y* = {:.6}, F = {:.6}, <n> = {state_n:.4}",
            opt.y_star, opt.fidelity
        )];
        for (&(k, t), row) in points.iter().zip(rows) {
            let r = row?;
            summary.push(format!(
                    "k = {k}, t = {t}: reduction factor {:.4}, fidelity multiplier {:.4} (at <n> = {mean_n})",
                    r[2], r[3]
                ));
            let mut cells: Vec<Cell> =
                vec![k.into(), t.into(), eta.into(), r[0].into(), mean_n.into()];
            cells.extend(r[2..5].iter().map(|&x| Cell::from(x)));
            cells.extend([n.into(), beta.into(), opt.y_star.into(), state_n.into()]);
            cells.extend(r[5..].iter().map(|&x| Cell::from(x)));
            tab.row(cells);
        }
        Ok(Output {
            out,
            csv: tab.into_string(),
            summary,
            failure: None,
        })
    })
}

/// `[T, unused, reduction, f_mult, p_mult, f_state, p_state, closed, product, f_exact, p_exact]`
#[allow(clippy::too_many_arguments)]
fn detector_row(
    k: usize,
    t: f64,
    eta: f64,
    mean_n: f64,
    n: u64,
    beta: f64,
    y: f64,
    fidelity: f64,
) -> cathub::Result<[f64; 11]> {
    let t_product = t.powi(2 * k as i32);
    let parity = Parity::of(n);
    let reduction = reduction_factor(t_product, mean_n);
    let state_n = mean_photon(parity, n, y)?;
    let shift = (1.0 - eta) * reduction_factor(t_product, state_n);
    let mut row = [
        t_product,
        f64::NAN,
        reduction,
        firstorder_multiplier(t_product, mean_n, eta),
        1.0 + (1.0 - eta) * reduction,
        1.0 - shift,
        1.0 + shift,
        f64::NAN,
        f64::NAN,
        f64::NAN,
        f64::NAN,
    ];
    let Ok(cfg) = HubConfig::with_final_y(y, vec![t; k]) else {
        return Ok(row);
    };
    let p_ideal = joint_success_prob(&cfg, &Outcome::new(balanced(n, k))?)?.to_f64();
    let tr = tradeoff_product(t_product, n, parity, eta, y, fidelity, p_ideal)?;
    row[7] = tr.closed_form;
    row[8] = tr.product();
    if k == 1 {
        row[9] = lossy_fidelity_exact(&cfg, n, eta, beta)? / fidelity;
        row[10] = lossy_prob(&cfg, n, eta)?.to_f64() / (eta.powi(n as i32) * p_ideal);
    }
    Ok(row)
}

pub fn oracle_check(a: OracleArgs) -> Result<Output> {
    let mut st = Settings::load(a.common.config.as_deref())?;
    let run = common(&mut st, a.common)?;
    let defaults = OracleGrid::default();
    let grid = OracleGrid {
        max_k: st.get("k", a.k, defaults.max_k)?,
        max_total: st.get("N", a.n, defaults.max_total)?,
        transmittances: st.list("t", a.t, defaults.transmittances)?,
        squeezing: st.list("s", a.s, defaults.squeezing)?,
        cutoff: st.get("cutoff", a.cutoff, DEFAULT_CUTOFF)?,
    };
    let ftol = st.get("fidelity-tol", a.fidelity_tol, 1e-9)?;
    let ptol = st.get("prob-tol", a.prob_tol, 1e-9)?;
    st.finish()?;
    check_t(&grid.transmittances)?;
    if grid.max_k == 0 {
        return Err(usage("k must be at least 1"));
    }
    if grid.squeezing.is_empty() || grid.squeezing.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(usage("squeezing values must be positive"));
    }
    if !(ftol > 0.0 && ptol > 0.0) {
        return Err(usage("tolerances must be positive"));
    }
    let digits = run.digits;
    let out = run.out.clone();
    with_workers(run.workers, move || {
        let cases = grid.cases()?;
        let results: Vec<Comparison> =
            cathub::par::map(&cases, |(cfg, o)| compare(cfg, o, grid.cutoff))
                .into_iter()
                .collect::<cathub::Result<_>>()?;
        let header = [
            "k",
            "s",
            "t",
            "counts",
            "cutoff",
            "fidelity_deficit",
            "prob_rel_error",
            "sign_ok",
            "pass",
        ];
        let mut tab = Table::new(&header, digits);
        let mut failures = Vec::new();
        for c in &results {
            let pass = c.fidelity_deficit <= ftol && c.prob_rel_error <= ptol && c.sign_ok;
            if !pass {
                failures.push(c);
            }
            tab.row(vec![
                c.counts.len().into(),
                c.s.into(),
                join(&c.transmittances).into(),
                join(&c.counts).into(),
                c.cutoff.into(),
                c.fidelity_deficit.into(),
                c.prob_rel_error.into(),
                c.sign_ok.into(),
                pass.into(),
            ]);
        }
        let worst = |key: fn(&Comparison) -> f64| {
            results
                .iter()
                .fold(&results[0], |a, c| if key(c) > key(a) { c } else { a })
        };
        let wf = worst(|c| c.fidelity_deficit);
        let wp = worst(|c| c.prob_rel_error);
        let describe = |c: &Comparison| {
            format!(
                "s = {}, t = {:?}, counts = {:?}",
                c.s, c.transmittances, c.counts
            )
        };
        let mut summary = vec![
            format!("{} cases", results.len()),
            format!(
                "worst fidelity deficit {:.3e} (tolerance {ftol:e}) at {}",
                wf.fidelity_deficit,
                describe(wf)
            ),
            format!(
                "worst probability error {:.3e} (tolerance {ptol:e}) at {}",
                wp.prob_rel_error,
                describe(wp)
            ),
        ];
        for c in failures.iter().take(10) {
            summary.push(format!(
                "FAIL {}: deficit {:.3e}, probability error {:.3e}, sign ok {}",
                describe(c),
                c.fidelity_deficit,
                c.prob_rel_error,
                c.sign_ok
            ));
        }
        let failure = (!failures.is_empty()).then(|| {
            format!(
                "{} of {} cases out of tolerance",
                failures.len(),
                results.len()
            )
        });
        summary.push(if failure.is_some() {
            "FAIL".into()
        } else {
            "PASS".into()
        });
        Ok(Output {
            out,
            csv: tab.into_string(),
            summary,
            failure,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_split() {
        assert_eq!(balanced(20, 2), vec![10, 10]);
        assert_eq!(balanced(7, 3), vec![3, 2, 2]);
        assert_eq!(balanced(1, 2), vec![1, 0]);
    }

    #[test]
    fn detector_row_ideal_detector() {
        let y = optimal_y(Parity::Even, 10, 2.5).unwrap();
        let r = detector_row(1, 0.95, 1.0, 35.0, 10, 2.5, y.y_star, y.fidelity).unwrap();
        for i in [3, 4, 5, 6, 9, 10] {
            assert!((r[i] - 1.0).abs() < 1e-12, "{i}: {}", r[i]);
        }
        assert_eq!(r[7], 0.0);
    }
}
