//! Acceptance suite: ten numbered criteria, one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`). Criteria listed in
//! `EXPECTED_FAIL` are evaluated at full tolerance like the rest; the process
//! only exits nonzero when a criterion outside that list fails, or when a
//! listed one starts passing (so the list cannot go stale).

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cathub::detector::{
    firstorder_multiplier, lossy_fidelity_exact, lossy_fidelity_firstorder, povm_element,
    reduction_factor,
};
use cathub::oracle::{run_grid, simulate_hub, OracleGrid};
use cathub::probability::{
    demux_ratio, demux_ratio_matched, enumerate_outcomes, joint_success_prob, multinomial,
    total_probability,
};
use cathub::{heralded_state_auto, mean_photon, optimal_y, HubConfig, Outcome, Parity};

/// Criteria that fail for reasons documented in the README, with the reason.
const EXPECTED_FAIL: &[(u8, &str)] = &[
    (2, "fidelity at N=90 decreases monotonically in beta, so its maximizer sits at the low end of any grid"),
    (4, "the 0.9162 reference assumes <n> = 8; the optimal state at beta=3 has <n> = 8.97"),
    (5, "the analytic joint probabilities (oracle-certified) are ~1e-15 and ~1e-10"),
    (10, "the first detector sees the larger y, so (12,8) beats (10,10) by t^-4 C(20,12)/C(20,10)"),
];

struct Verdict {
    id: u8,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn beta_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn large_cat_fidelity() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (parity, n) in [(Parity::Even, 90), (Parity::Odd, 91)] {
        let start = Instant::now();
        let r = optimal_y(parity, n, 5.0).unwrap();
        let took = start.elapsed();
        pass &= r.fidelity > 0.99 && took <= Duration::from_secs(120);
        parts.push(format!(
            "{parity} N={n}: F={:.6} at y={:.6} ({:.2?})",
            r.fidelity, r.y_star, took
        ));
    }
    Verdict {
        id: 1,
        name: "large-cat fidelity",
        pass,
        detail: parts.join("; "),
    }
}

fn mean_photon_ceiling() -> Verdict {
    // (a) beta maximizing the optimal fidelity for N=90
    let grid = beta_grid(0.5, 7.0, 0.05);
    let curve: Vec<(f64, f64, f64)> = cathub::par::map(&grid, |&b| {
        let r = optimal_y(Parity::Even, 90, b).unwrap();
        (
            b,
            r.fidelity,
            mean_photon(Parity::Even, 90, r.y_star).unwrap(),
        )
    });
    let best = curve
        .iter()
        .fold(curve[0], |a, &c| if c.1 > a.1 { c } else { a });
    let ceiling_ok = (best.2 - 35.0).abs() <= 2.0;
    let crossing = curve.iter().find(|c| c.2 >= 35.0).copied();

    // (b) <n> tracks beta^2 wherever the optimal fidelity stays high
    let betas = beta_grid(1.5, 7.0, 0.5);
    let mut cases = Vec::new();
    for n in [10u64, 20, 40, 90] {
        for &b in &betas {
            cases.push((n, b));
        }
    }
    let devs: Vec<(u64, f64, f64, f64)> = cathub::par::map(&cases, |&(n, b)| {
        let r = optimal_y(Parity::Even, n, b).unwrap();
        let m = mean_photon(Parity::Even, n, r.y_star).unwrap();
        (n, b, r.fidelity, (m - b * b).abs() / (b * b))
    });
    let plateau: Vec<_> = devs.iter().filter(|d| d.2 >= 0.97).collect();
    let worst = plateau
        .iter()
        .fold(plateau[0], |a, d| if d.3 > a.3 { d } else { a });
    let rule_ok = worst.3 <= 0.1;

    let crossing = crossing.map_or("never".to_string(), |c| {
        format!("beta={:.1} (F={:.4})", c.0, c.1)
    });
    Verdict {
        id: 2,
        name: "mean-photon ceiling",
        pass: ceiling_ok && rule_ok,
        detail: format!(
            "argmax F over beta in [0.5,7]: beta={:.1}, F={:.6}, <n>={:.3} (want 35+-2); <n> reaches 35 at {crossing}; \
             plateau F>=0.97, {} points, worst |<n>-b^2|/b^2={:.4} at N={} beta={}",
            best.0,
            best.1,
            best.2,
            plateau.len(),
            worst.3,
            worst.0,
            worst.1
        ),
    }
}

fn reduction_factors() -> Verdict {
    let cases = [
        (0.9f64, 1, 8.21),
        (0.95, 1, 3.78),
        (0.98, 1, 1.44),
        (0.9, 2, 18.35),
        (0.95, 2, 7.97),
        (0.98, 2, 2.94),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (t, k, want) in cases {
        let got = reduction_factor(t.powi(2 * k), 35.0);
        pass &= rel(got, want) <= 5e-3;
        parts.push(format!("t={t} k={k}: {got:.4}"));
    }
    Verdict {
        id: 3,
        name: "detector reduction factors",
        pass,
        detail: parts.join(", "),
    }
}

fn fidelity_multipliers() -> Verdict {
    let eta = 0.98;
    let mut pass = true;
    let mut parts = Vec::new();
    for (t, k, want) in [
        (0.9f64, 1, 0.8358),
        (0.95, 1, 0.9244),
        (0.98, 1, 0.9712),
        (0.95, 2, 0.8406),
    ] {
        let got = firstorder_multiplier(t.powi(2 * k), 35.0, eta);
        pass &= (got - want).abs() <= 1e-3;
        parts.push(format!("t={t} k={k}: {got:.4}"));
    }
    for (n, beta, t, want) in [(20u64, 3.0, 0.9f64, 0.9162), (10, 2.5, 0.95, 0.9727)] {
        let r = optimal_y(Parity::Even, n, beta).unwrap();
        let m = mean_photon(Parity::Even, n, r.y_star).unwrap();
        let got = lossy_fidelity_firstorder(t.powi(4), n, Parity::Even, eta, r.y_star).unwrap();
        let ok = (got - want).abs() <= 5e-3;
        pass &= ok;
        parts.push(format!(
            "N={n} t={t} pair: <n>={m:.3}, {got:.4} vs {want}{}",
            if ok { "" } else { " OUT" }
        ));
    }
    Verdict {
        id: 4,
        name: "fidelity multipliers at eta=0.98",
        pass,
        detail: parts.join(", "),
    }
}

fn probability_orders() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, beta, t, counts, want) in [
        (20u64, 3.0, 0.9, [10u64, 10], 1e-9f64),
        (10, 2.5, 0.95, [5, 5], 1e-7),
    ] {
        let r = optimal_y(Parity::Even, n, beta).unwrap();
        let cfg = HubConfig::with_final_y(r.y_star, vec![t, t]).unwrap();
        let o = Outcome::new(counts.to_vec()).unwrap();
        let p = joint_success_prob(&cfg, &o).unwrap().to_f64();
        let oracle = simulate_hub(&cfg, &o, 80).unwrap().probability.to_f64();
        let orders = (p.log10() - want.log10()).abs();
        pass &= orders <= 1.0;
        parts.push(format!(
            "{counts:?} t={t} beta={beta}: P={p:.3e} (oracle {oracle:.3e}), {orders:.2} orders from {want:.0e}"
        ));
    }
    Verdict {
        id: 5,
        name: "success-probability orders",
        pass,
        detail: parts.join("; "),
    }
}

fn demux() -> Verdict {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for k in 1..=3 {
        for o in enumerate_outcomes(k, 6) {
            for t in [0.7, 0.8, 0.9] {
                for y in [0.02, 0.05] {
                    let measured = demux_ratio_matched(&o, t, y).unwrap().to_f64();
                    worst = worst.max(rel(measured, demux_ratio(&o, t).to_f64()));
                    cases += 1;
                }
            }
        }
    }
    let m = multinomial(&[10, 10]);
    Verdict {
        id: 6,
        name: "demultiplexing ratio",
        pass: worst <= 1e-10 && m == Some(184_756),
        detail: format!(
            "{cases} partitions, worst relative error {worst:.2e}; 20!/(10!10!) = {m:?}"
        ),
    }
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let report = run_grid(&OracleGrid::default()).unwrap();
    let took = start.elapsed();
    Verdict {
        id: 7,
        name: "oracle equivalence",
        pass: report.passes(1e-9, 1e-9) && took <= Duration::from_secs(300),
        detail: format!(
            "{} cases in {:.1?}: worst deficit {:.2e} at s={} t={:?} n={:?}; worst probability error {:.2e}; sign failures {}",
            report.cases,
            took,
            report.worst_fidelity.fidelity_deficit,
            report.worst_fidelity.s,
            report.worst_fidelity.transmittances,
            report.worst_fidelity.counts,
            report.worst_probability.prob_rel_error,
            report.sign_failures.len()
        ),
    }
}

fn normalization() -> Verdict {
    let mut states = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        for m in 0..=45u64 {
            for i in 1..=9 {
                states.push((parity, m, 0.05 * i as f64));
            }
        }
    }
    let norm_dev = cathub::par::map(&states, |&(p, m, y)| {
        (heralded_state_auto(p, m, y).unwrap().norm_sqr() - 1.0).abs()
    })
    .into_iter()
    .fold(0.0, f64::max);

    let mut min_sum = f64::INFINITY;
    for s in [0.3, 0.6, 0.8] {
        for ts in [vec![0.7], vec![0.9], vec![0.7, 0.9], vec![0.9, 0.8]] {
            let cfg = HubConfig::new(s, ts).unwrap();
            min_sum = min_sum.min(total_probability(&cfg, 120).unwrap());
        }
    }

    let cutoff = 60;
    let mut povm_dev = 0.0f64;
    for eta in [0.5, 0.9, 0.98] {
        let elems: Vec<_> = (0..=cutoff).map(|m| povm_element(m, eta, cutoff)).collect();
        for j in 0..=cutoff {
            let s: f64 = elems.iter().map(|e| e.weight(j)).sum();
            povm_dev = povm_dev.max((s - 1.0).abs());
        }
    }
    Verdict {
        id: 8,
        name: "normalization suites",
        pass: norm_dev <= 1e-10 && min_sum >= 1.0 - 1e-8 && povm_dev <= 1e-12,
        detail: format!(
            "{} heralded states, max |norm-1| {norm_dev:.2e}; min outcome sum {min_sum:.12}; POVM max |sum-1| {povm_dev:.2e}",
            states.len()
        ),
    }
}

fn perturbative_consistency() -> Verdict {
    let (n, beta, t) = (20u64, 3.0, 0.95);
    let r = optimal_y(Parity::Even, n, beta).unwrap();
    let cfg = HubConfig::with_final_y(r.y_star, vec![t]).unwrap();
    let etas = [0.9, 0.95, 0.975, 0.9875];
    let points: Vec<(f64, f64)> = etas
        .iter()
        .map(|&eta| {
            let exact = lossy_fidelity_exact(&cfg, n, eta, beta).unwrap() / r.fidelity;
            let first = lossy_fidelity_firstorder(t * t, n, Parity::Even, eta, r.y_star).unwrap();
            ((1.0 - eta).ln(), (exact - first).abs().ln())
        })
        .collect();
    let mx = points.iter().map(|p| p.0).sum::<f64>() / points.len() as f64;
    let my = points.iter().map(|p| p.1).sum::<f64>() / points.len() as f64;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();

    // product of the first-order shifts against the closed form
    let eta = 0.98;
    let p1 = joint_success_prob(&cfg, &Outcome::new(vec![n]).unwrap())
        .unwrap()
        .to_f64();
    let tr =
        cathub::detector::tradeoff_product(t * t, n, Parity::Even, eta, r.y_star, r.fidelity, p1)
            .unwrap();
    let exact_df = r.fidelity - lossy_fidelity_exact(&cfg, n, eta, beta).unwrap();
    let exact_dp =
        cathub::detector::lossy_prob(&cfg, n, eta).unwrap().to_f64() / eta.powi(n as i32) - p1;
    let exact_rel = rel(exact_df * exact_dp, tr.closed_form);
    let identity = rel(tr.product(), tr.closed_form);
    Verdict {
        id: 9,
        name: "perturbative consistency",
        pass: (slope - 2.0).abs() <= 0.1 && identity <= 1e-12 && exact_rel <= 5.0 * (1.0 - eta),
        detail: format!(
            "N={n} beta={beta} t={t}: log-log slope {slope:.4}; dF*dP identity {identity:.1e}; exact shifts vs closed form {exact_rel:.3} relative"
        ),
    }
}

fn two_detector_structure() -> Verdict {
    let grid = beta_grid(2.2, 3.0, 0.05);
    let rows = cathub::par::map(&grid, |&b| {
        let y = optimal_y(Parity::Even, 20, b).unwrap().y_star;
        let probe = |t: f64| -> Option<Vec<(u64, f64)>> {
            let cfg = HubConfig::with_final_y(y, vec![t, t]).ok()?;
            Some(
                (0..=20u64)
                    .step_by(2)
                    .map(|n1| {
                        let o = Outcome::new(vec![n1, 20 - n1]).unwrap();
                        (n1, joint_success_prob(&cfg, &o).unwrap().to_f64())
                    })
                    .collect(),
            )
        };
        (b, probe(0.8), probe(0.77))
    });
    let mut balanced_ok = true;
    let mut ratio_ok = true;
    let mut argmaxes = std::collections::BTreeSet::new();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut feasible = 0;
    for (_, a, b) in &rows {
        for probs in [a, b].into_iter().flatten() {
            let best = probs
                .iter()
                .fold(probs[0], |x, &p| if p.1 > x.1 { p } else { x });
            argmaxes.insert(best.0);
            balanced_ok &= best.0 == 10;
        }
        if let (Some(a), Some(b)) = (a, b) {
            let r = b[5].1 / a[5].1;
            lo = lo.min(r);
            hi = hi.max(r);
            ratio_ok &= (30.0..=300.0).contains(&r);
            feasible += 1;
        }
    }
    Verdict {
        id: 10,
        name: "two-detector structure",
        pass: balanced_ok && ratio_ok && feasible > 0,
        detail: format!(
            "beta in [2.2,3.0], {feasible} points feasible for both t; argmax n1 over even partitions of 20: {argmaxes:?}; \
             P(t=0.77)/P(t=0.8) at (10,10) in [{lo:.1}, {hi:.1}]"
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [fn() -> Verdict; 10] = [
        large_cat_fidelity,
        mean_photon_ceiling,
        reduction_factors,
        fidelity_multipliers,
        probability_orders,
        demux,
        oracle_equivalence,
        normalization,
        perturbative_consistency,
        two_detector_structure,
    ];
    let mut unexpected = 0;
    for c in criteria {
        let v = c();
        let expected = EXPECTED_FAIL.iter().find(|(id, _)| *id == v.id);
        println!(
            "criterion {:2} {:<30} {}  {}",
            v.id,
            v.name,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        match (v.pass, expected) {
            (false, Some((_, why))) => println!("             expected failure: {why}"),
            (false, None) => unexpected += 1,
            (true, Some(_)) => {
                println!(
                    "             listed as an expected failure but passed; update EXPECTED_FAIL"
                );
                unexpected += 1;
            }
            (true, None) => {}
        }
    }
    if unexpected > 0 {
        println!("{unexpected} unexpected result(s)");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
