//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use aeronet_core::experiment::BaseParameters;
use aeronet_core::timeline::EventKind;
use aeronet_core::{
    build_link_timeline, compute_ctr, compute_ctr_d, compute_ctr_f, connected_with_delay, generate_random_scenario,
    region_based_connectivity, run_experiment, AngularRate, DeploymentArea, ExperimentPlan, ExperimentResult, Metric,
    Rbc, Snapshot, SweepVariable, TopologySequence,
};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ERR: f64 = 0.01;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn timeline_oracle() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut events, mut worst, mut mismatches) = (0, 0.0f64, Vec::new());
    for case in 0..50 {
        let n = rng.gen_range(2..=8);
        let s = random_scenario(&mut rng, n, 200.0, true);
        let tr = rng.gen_range(10.0..150.0);
        let mut ours: Vec<(usize, usize, bool, f64)> = build_link_timeline(&s, tr)
            .events()
            .iter()
            .map(|e| match e.kind {
                EventKind::LinkUp { i, j } => (i, j, true, e.time),
                EventKind::LinkDown { i, j } => (i, j, false, e.time),
                _ => unreachable!(),
            })
            .collect();
        let mut oracle: Vec<(usize, usize, bool, f64)> = sampled_link_events(&s, tr, 1_000_000)
            .into_iter()
            .map(|(t, up, i, j)| (i, j, up, t))
            .collect();
        let order = |a: &(usize, usize, bool, f64), b: &(usize, usize, bool, f64)| {
            (a.0, a.1).cmp(&(b.0, b.1)).then(a.3.total_cmp(&b.3))
        };
        ours.sort_by(order);
        oracle.sort_by(order);
        events += oracle.len();
        if ours.len() != oracle.len() {
            mismatches.push(format!("case {case}: {} events vs {}", ours.len(), oracle.len()));
            continue;
        }
        for (a, b) in ours.iter().zip(&oracle) {
            if (a.0, a.1, a.2) != (b.0, b.1, b.2) {
                mismatches.push(format!("case {case}: {a:?} vs {b:?}"));
            }
            worst = worst.max((a.3 - b.3).abs());
        }
    }
    let elapsed = started.elapsed();
    let pass = mismatches.is_empty() && worst < 1e-6 && elapsed < Duration::from_secs(60);
    verdict(
        pass,
        format!(
            "50 scenarios, {events} events, max |dt| {worst:.2e} h, {:.1} s{}",
            elapsed.as_secs_f64(),
            if mismatches.is_empty() { String::new() } else { format!(", mismatches {mismatches:?}") }
        ),
    )
}

fn ctr_oracle() -> Verdict {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for case in 0..30 {
        let n = rng.gen_range(2..=10);
        let equal = rng.gen_bool(0.5);
        let s = random_scenario(&mut rng, n, 300.0, equal);
        let exact = sampled_ctr(&s, 100_000);
        let grid = grid_ceil(exact, ERR / 4.0);
        let ctr = compute_ctr(&s, ERR).unwrap();
        worst = worst.max((ctr - grid).abs());
        if (ctr - grid).abs() > ERR || ctr < exact - 1e-6 {
            bad.push(format!("case {case}: ctr {ctr}, grid {grid}"));
        }
    }
    let elapsed = started.elapsed();
    verdict(
        bad.is_empty() && elapsed < Duration::from_secs(120),
        format!(
            "30 scenarios, max |ctr - grid| {worst:.4}, {:.1} s{}",
            elapsed.as_secs_f64(),
            if bad.is_empty() { String::new() } else { format!(", {bad:?}") }
        ),
    )
}

fn rbc_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut bad = 0;
    let mut finite = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..=10);
        let density = rng.gen_range(0.1..0.9);
        let mut links = BTreeSet::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.gen_bool(density) {
                    links.insert((i, j));
                }
            }
        }
        let k = rng.gen_range(0..=n.min(5));
        let mut nodes: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.gen_range(i..n);
            nodes.swap(i, j);
        }
        let covered: Vec<usize> = nodes[..k].to_vec();
        let ours = region_based_connectivity(
            &Snapshot::new(n, links.iter().copied()),
            &covered.iter().copied().collect(),
        );
        let oracle = match subset_rbc(n, &links, &covered) {
            Some(c) => Rbc::Finite(c),
            None => Rbc::Infinite,
        };
        if matches!(oracle, Rbc::Finite(_)) {
            finite += 1;
        }
        if ours != oracle {
            bad += 1;
        }
    }
    verdict(bad == 0, format!("200 graphs ({finite} with a finite cut), {bad} mismatches"))
}

fn delay_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut checks, mut bad, mut feasible) = (0, 0, 0);
    for _ in 0..100 {
        let n = rng.gen_range(2..=8);
        let l = rng.gen_range(1..=5);
        let topologies: Vec<(BTreeSet<(usize, usize)>, f64)> = (0..l)
            .map(|_| {
                let mut links = BTreeSet::new();
                for _ in 0..rng.gen_range(0..=n) {
                    let i = rng.gen_range(0..n);
                    let j = rng.gen_range(0..n);
                    if i != j {
                        links.insert((i.min(j), i.max(j)));
                    }
                }
                (links, rng.gen_range(0.1..2.0))
            })
            .collect();
        let ts = TopologySequence::new(
            n,
            topologies
                .iter()
                .map(|(links, d)| (Snapshot::new(n, links.iter().copied()), *d))
                .collect(),
            true,
        )
        .unwrap();
        let period = ts.period();
        for _ in 0..10 {
            let start = rng.gen_range(0..l);
            // Half of the bounds sit exactly on a topology boundary.
            let delay = if rng.gen_bool(0.5) {
                let steps = rng.gen_range(0..(n * l));
                let mut d = 0.0;
                for s in 0..steps {
                    d += topologies[(start + s) % l].1;
                }
                d
            } else {
                rng.gen_range(0.0..(n as f64) * period)
            };
            let ours = connected_with_delay(&ts, delay, start);
            let oracle = time_expanded_connected(n, &topologies, start, delay);
            checks += 1;
            feasible += ours as usize;
            bad += (ours != oracle) as usize;
        }
    }
    verdict(bad == 0, format!("{checks} checks ({feasible} feasible), {bad} mismatches"))
}

fn worked_examples() -> Verdict {
    let seq = |n: usize, parts: &[(&[(usize, usize)], f64)]| {
        TopologySequence::new(
            n,
            parts
                .iter()
                .map(|(links, d)| (Snapshot::new(n, links.iter().copied()), *d))
                .collect(),
            true,
        )
        .unwrap()
    };
    let (a, b, c, d) = (0, 1, 2, 3);
    let (t1, t2, t3) = (1.25, 2.5, 0.75);
    let two = seq(3, &[(&[(a, b)], t1), (&[(b, c)], t2)]);
    let delays = two.earliest_delays(0);
    let three = seq(4, &[(&[(c, d)], t1), (&[(b, c)], t2), (&[(a, b)], t3)]);
    let ad = three.earliest_delays(0)[a][d];
    let pass = delays[a][c] == Some(t1)
        && delays[c][a] == Some(t1 + t2)
        && !connected_with_delay(&two, t1, 0)
        && connected_with_delay(&two, t1 + t2, 0)
        && ad == Some(2.0 * (t1 + t2 + t3));
    verdict(
        pass,
        format!(
            "A->C {:?} (T1 = {t1}), C->A {:?} (T1+T2 = {}), A->D {:?} (2(T1+T2+T3) = {})",
            delays[a][c],
            delays[c][a],
            t1 + t2,
            ad,
            2.0 * (t1 + t2 + t3)
        ),
    )
}

fn ordering() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = Vec::new();
    for case in 0..30 {
        let n = rng.gen_range(4..=10);
        let s = generate_random_scenario(n, 10.0, AngularRate::rational(20, 1), DeploymentArea::square(300.0), rng.gen())
            .unwrap();
        let ctr = compute_ctr(&s, ERR).unwrap();
        for r in [20.0, 60.0] {
            let f = compute_ctr_f(&s, r, ERR).unwrap();
            if ctr > f + ERR {
                bad.push(format!("case {case}: ctr {ctr} > ctr_f(R={r}) {f}"));
            }
        }
        for periods in [0.5, 2.0] {
            let d = compute_ctr_d(&s, periods * s.period(), ERR, true).unwrap();
            if d > ctr + ERR {
                bad.push(format!("case {case}: ctr_d({periods}P) {d} > ctr {ctr}"));
            }
        }
    }
    verdict(
        bad.is_empty(),
        format!("30 scenarios, {} violations{}", bad.len(), if bad.is_empty() { String::new() } else { format!(" {bad:?}") }),
    )
}

fn base(node_count: usize) -> BaseParameters {
    BaseParameters {
        node_count,
        orbit_radius: 10.0,
        omega: AngularRate::rational(20, 1),
        region_radius: 20.0,
        delay_periods: 0.5,
        area: DeploymentArea::square(1000.0),
        err: ERR,
        all_starts: true,
    }
}

/// Positions in `series` where the next mean exceeds the previous one,
/// with the relative increase.
fn rises(series: &[f64]) -> Vec<f64> {
    series
        .windows(2)
        .filter(|w| w[1] > w[0] + ERR)
        .map(|w| (w[1] - w[0]) / w[0])
        .collect()
}

fn means(result: &ExperimentResult, values: &[f64], metric: &str) -> Vec<f64> {
    values.iter().map(|&v| result.mean(v, metric).unwrap_or(f64::NAN)).collect()
}

fn node_count_trend() -> Verdict {
    let started = Instant::now();
    let values = [10.0, 20.0, 35.0];
    let plan = ExperimentPlan {
        sweep: SweepVariable::NodeCount,
        values: values.to_vec(),
        trials_per_value: 10,
        base: base(35),
        metrics: vec![
            Metric::Ctr,
            Metric::CtrF { region_radius: Some(20.0) },
            Metric::CtrF { region_radius: Some(60.0) },
            Metric::CtrD { delay_periods: Some(0.5) },
            Metric::CtrD { delay_periods: Some(2.0) },
        ],
        rng_seed: 7,
    };
    let result = run_experiment(&plan).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for metric in ["ctr", "ctr_f(R=20)", "ctr_f(R=60)", "ctr_d(D=0.5P)", "ctr_d(D=2P)"] {
        let m = means(&result, &values, metric);
        let r = rises(&m);
        let ok = m.iter().all(|x| x.is_finite()) && (r.is_empty() || (r.len() == 1 && r[0] <= 0.02));
        pass &= ok;
        parts.push(format!("{metric} {:.1}/{:.1}/{:.1}", m[0], m[1], m[2]));
    }
    let elapsed = started.elapsed();
    pass &= elapsed < Duration::from_secs(15 * 60);
    verdict(
        pass,
        format!("means at n=10/20/35, 10 trials: {}; {:.1} s", parts.join(", "), elapsed.as_secs_f64()),
    )
}

fn region_and_delay_trend() -> Verdict {
    let radii = [10.0, 20.0, 40.0, 60.0];
    let region = ExperimentPlan {
        sweep: SweepVariable::RegionRadius,
        values: radii.to_vec(),
        trials_per_value: 10,
        base: base(35),
        metrics: vec![Metric::CtrF { region_radius: None }],
        rng_seed: 8,
    };
    let delays = [0.0, 0.5, 1.0, 2.0, 3.0];
    let delay = ExperimentPlan {
        sweep: SweepVariable::Delay,
        values: delays.to_vec(),
        trials_per_value: 10,
        base: base(35),
        metrics: vec![Metric::Ctr, Metric::CtrD { delay_periods: None }],
        rng_seed: 8,
    };
    let fr = run_experiment(&region).unwrap();
    let dr = run_experiment(&delay).unwrap();
    let f = means(&fr, &radii, "ctr_f");
    let d = means(&dr, &delays, "ctr_d");
    let f_ok = f.windows(2).all(|w| w[1] >= w[0] - ERR);
    let d_ok = d[..4].windows(2).all(|w| w[1] <= w[0] + ERR);
    let per_trial = |v: f64, metric: &str| -> Vec<f64> {
        dr.trials
            .iter()
            .filter(|t| t.value == v && t.metric == metric)
            .map(|t| t.result.unwrap_or(f64::NAN))
            .collect()
    };
    let zero_gap = per_trial(0.0, "ctr_d")
        .iter()
        .zip(per_trial(0.0, "ctr"))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let tail = (d[3] - d[4]).abs() / d[3];
    let pass = f_ok && d_ok && zero_gap <= ERR && tail <= 0.01;
    verdict(
        pass,
        format!(
            "ctr_f over R=10/20/40/60: {:.1}/{:.1}/{:.1}/{:.1}; ctr_d over D=0/0.5/1/2/3 P: {:.1}/{:.1}/{:.1}/{:.1}/{:.1}; \
             max |ctr_d(0) - ctr| {zero_gap:.4}; 2P->3P change {:.2}%",
            f[0],
            f[1],
            f[2],
            f[3],
            d[0],
            d[1],
            d[2],
            d[3],
            d[4],
            100.0 * tail
        ),
    )
}

fn speed_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.gen_range(3..=15);
        let s = generate_random_scenario(n, 10.0, AngularRate::rational(20, 1), DeploymentArea::square(400.0), rng.gen())
            .unwrap();
        let fast = s.with_scaled_rates(3).unwrap();
        worst = worst.max((compute_ctr(&s, ERR).unwrap() - compute_ctr(&fast, ERR).unwrap()).abs());
    }
    verdict(worst <= ERR, format!("10 scenarios, max change {worst:.5} (err {ERR})"))
}

fn complexity() -> Verdict {
    let sizes = [20, 40, 80];
    let timings: Vec<f64> = sizes
        .iter()
        .map(|&n| {
            let scenarios: Vec<_> = (0..5)
                .map(|seed| {
                    generate_random_scenario(n, 10.0, AngularRate::rational(20, 1), DeploymentArea::square(1000.0), seed)
                        .unwrap()
                })
                .collect();
            (0..7)
                .map(|_| {
                    let started = Instant::now();
                    for s in &scenarios {
                        std::hint::black_box(build_link_timeline(s, 200.0));
                    }
                    started.elapsed().as_secs_f64()
                })
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let ratios = [timings[1] / timings[0], timings[2] / timings[1]];
    verdict(
        ratios.iter().all(|&r| r <= 5.0),
        format!(
            "best-of-7 times {:.2}/{:.2}/{:.2} ms for n=20/40/80, ratios {:.2}, {:.2}",
            1e3 * timings[0],
            1e3 * timings[1],
            1e3 * timings[2],
            ratios[0],
            ratios[1]
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 10] = [
        ("timeline events match dense sampling", timeline_oracle),
        ("CTR matches grid scan", ctr_oracle),
        ("RBC matches subset enumeration", rbc_oracle),
        ("bounded-delay connectivity matches time-expanded BFS", delay_oracle),
        ("worked delay examples", worked_examples),
        ("CTR_D <= CTR <= CTR_F", ordering),
        ("trends in node count", node_count_trend),
        ("trends in region radius and delay", region_and_delay_trend),
        ("speed invariance", speed_invariance),
        ("timeline build scaling", complexity),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        failed += !v.pass as usize;
        println!(
            "criterion {:>2} {}: {} ({})",
            k + 1,
            if v.pass { "PASS" } else { "FAIL" },
            name,
            v.detail
        );
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
