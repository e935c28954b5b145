//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use railbeam::allocation::{
    allocate_closed_form, allocate_oracle, energy_of, weighted_data, PowerAllocation, Scheme,
};
use railbeam::antenna::{gain_at, max_gain, sidelobe_gain, AntennaPattern};
use railbeam::cli::{run_montecarlo_cmd, Resolved};
use railbeam::geometry::{segment_plan, NetworkGeometry};
use railbeam::limits::{
    closed_form_parts, exact_parts, finite_energy_parts, finite_energy_sum, limit_constants,
    limit_energy, limit_energy_as_printed, limit_energy_exact,
};
use railbeam::link::{LinkBudget, SnrModel};
use railbeam::montecarlo::{run_montecarlo, SchemeConfig, VelocityErrorModel};
use railbeam::schemes::OperatingContext;
use railbeam::traffic::{data_integral_constant_power, data_total_midpoint, RequiredData};
use railbeam::units::{Db, Dbm, Degrees};

const V: f64 = 300.0 / 3.6;
const FOUR: [Scheme; 4] = [Scheme::Mctp, Scheme::Otpa, Scheme::Mtpa, Scheme::OtpaInf];

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn budget() -> LinkBudget {
    LinkBudget::new(
        AntennaPattern::new(Degrees(30.0)).unwrap(),
        Db(10.0),
        2.0,
        0.005,
        2.16e9,
        Db(6.0),
    )
    .unwrap()
}

fn geom(dl: f64, n: usize) -> NetworkGeometry {
    NetworkGeometry::new(20.0, dl, n, V).unwrap()
}

fn ctx(dl: f64, n: usize, v: f64, mode: SnrModel, p: f64) -> OperatingContext {
    let g = NetworkGeometry::new(20.0, dl, n, v).unwrap();
    OperatingContext::new(g, budget(), mode, Dbm(p)).unwrap()
}

fn geometry_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let d0 = rng.random_range(1.0..100.0);
        let dl = rng.random_range(1.0..2000.0);
        let n = rng.random_range(1..=200usize);
        let plan = segment_plan(&NetworkGeometry::new(d0, dl, n, V).unwrap()).unwrap();
        let sum: f64 = plan.widths().iter().sum();
        worst = worst.max(((sum - dl / 2.0) / (dl / 2.0)).abs());
        if plan.widths().windows(2).any(|w| w[1] >= w[0]) {
            return verdict(
                false,
                format!("widths not strictly decreasing at d0={d0} dl={dl} N={n}"),
            );
        }
    }
    verdict(
        worst <= 1e-9,
        format!("worst tiling error {worst:.2e} over 200 triples"),
    )
}

fn antenna_fixtures() -> Verdict {
    // Independent 40-digit evaluation.
    let g0_ref = 15.909977437209966;
    let gsl_ref = -11.977232243601312;
    let g15_ref = 12.899977437209966;
    let p = AntennaPattern::new(Degrees(30.0)).unwrap();
    let errs = [
        (max_gain(Degrees(30.0)).unwrap().0 - g0_ref).abs(),
        (sidelobe_gain(Degrees(30.0)).unwrap().0 - gsl_ref).abs(),
        (gain_at(&p, Degrees(15.0)).unwrap().0 - g15_ref).abs(),
        (gain_at(&p, Degrees(15.0)).unwrap().0 - (p.g0().0 - 3.01)).abs(),
    ];
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    verdict(
        worst < 1e-3,
        format!(
            "G0={:.6} Gsl={:.6} G(15)={:.6} dB, worst error {worst:.1e} dB",
            p.g0().0,
            p.g_sl().0,
            gain_at(&p, Degrees(15.0)).unwrap().0
        ),
    )
}

fn midpoint_convergence() -> Verdict {
    let b = budget();
    let mut worst: f64 = 0.0;
    for mode in [SnrModel::PaperLiteral, SnrModel::Physical] {
        for dl in [60.0, 120.0, 200.0] {
            let g = geom(dl, 64);
            let plan = segment_plan(&g).unwrap();
            let alloc = PowerAllocation::new(vec![Dbm(40.0); 64], Scheme::Mctp, mode);
            let mid = data_total_midpoint(&plan, &b, &alloc).unwrap();
            let exact = data_integral_constant_power(&g, &b, mode, Dbm(40.0)).unwrap();
            worst = worst.max(((mid - exact) / exact).abs());
        }
    }
    verdict(
        worst < 1e-3,
        format!("worst relative gap {worst:.2e} at N=64"),
    )
}

fn constraint_identity() -> Verdict {
    let b = budget();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for k in 0..100 {
        let mode = if k % 2 == 0 {
            SnrModel::PaperLiteral
        } else {
            SnrModel::Physical
        };
        let c = ctx(
            rng.random_range(20.0..300.0),
            rng.random_range(1..=64usize),
            V,
            mode,
            rng.random_range(20.0..60.0),
        );
        let plan = segment_plan(&c.geometry).unwrap();
        let alloc = allocate_closed_form(&plan, &b, &c.d_fixed).unwrap();
        let got = weighted_data(&plan, &b, &alloc).unwrap();
        worst = worst.max(((got - c.d_fixed.value()) / c.d_fixed.value()).abs());
    }
    verdict(
        worst <= 1e-9,
        format!("worst relative residual {worst:.2e} over 100 points"),
    )
}

fn oracle_dominance() -> Verdict {
    let b = budget();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut violations = 0;
    let mut worst_n1: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(1..=32usize);
        let c = ctx(
            rng.random_range(20.0..300.0),
            n,
            V,
            SnrModel::Physical,
            rng.random_range(20.0..60.0),
        );
        let plan = segment_plan(&c.geometry).unwrap();
        let cf = energy_of(&plan, &allocate_closed_form(&plan, &b, &c.d_fixed).unwrap()).unwrap();
        let or = energy_of(&plan, &allocate_oracle(&plan, &b, &c.d_fixed).unwrap()).unwrap();
        if or > cf * (1.0 + 1e-12) {
            violations += 1;
        }
        let g1 = c.geometry.with_segments(1).unwrap();
        let plan1 = segment_plan(&g1).unwrap();
        let req = RequiredData::new(c.d_fixed.value(), SnrModel::Physical).unwrap();
        let cf1 = energy_of(&plan1, &allocate_closed_form(&plan1, &b, &req).unwrap()).unwrap();
        let or1 = energy_of(&plan1, &allocate_oracle(&plan1, &b, &req).unwrap()).unwrap();
        worst_n1 = worst_n1.max(((or1 - cf1) / cf1).abs());
    }
    verdict(
        violations == 0 && worst_n1 <= 1e-9,
        format!("{violations} violations over 100 points; N=1 worst gap {worst_n1:.2e}"),
    )
}

fn limit_convergence() -> Verdict {
    let b = budget();
    let mut pass = true;
    let mut notes = Vec::new();
    for dl in [60.0, 120.0, 200.0] {
        let c = ctx(dl, 2048, V, SnrModel::PaperLiteral, 40.0);
        let g2048 = &c.geometry;
        let e2048 = finite_energy_sum(g2048, &b, &c.d_fixed).unwrap();
        let derived = limit_energy(g2048, &b, &c.d_fixed).unwrap();
        let printed = limit_energy_as_printed(g2048, &b, &c.d_fixed).unwrap();
        let exact = limit_energy_exact(g2048, &b, &c.d_fixed).unwrap();
        let gap = ((e2048 - derived) / derived).abs();
        let gap_printed = ((e2048 - printed) / printed).abs();
        let gap_exact = ((e2048 - exact) / exact).abs();

        let g2000 = g2048.with_segments(2000).unwrap();
        let consts = limit_constants(&g2000, &b, &c.d_fixed).unwrap();
        let finite = finite_energy_parts(&g2000, &b, &c.d_fixed).unwrap();
        let textbook = closed_form_parts(&consts, &g2000, &b);
        let exact_p = exact_parts(&consts, &g2000, &b).unwrap();
        let rel = |a: f64, b: f64| ((a - b) / b).abs();
        let part_gaps = [
            rel(finite.exponential, textbook.exponential),
            rel(finite.floor, textbook.floor),
            rel(finite.distance, textbook.distance),
        ];
        let exact_gaps = [
            rel(finite.exponential, exact_p.exponential),
            rel(finite.floor, exact_p.floor),
            rel(finite.distance, exact_p.distance),
        ];
        let ok = gap <= 5e-3 && part_gaps.iter().all(|&g| g <= 5e-3) && gap_printed > 10.0 * 5e-3;
        pass &= ok;
        notes.push(format!(
            "dl={dl}: E(2048)={e2048:.4} closed={derived:.4} (gap {:.1}%) printed gap {:.1e} exact={exact:.4} (gap {gap_exact:.1e}); parts vs closed {:.1e}/{:.1e}/{:.1e}, vs exact {:.1e}/{:.1e}/{:.1e}",
            100.0 * gap,
            gap_printed,
            part_gaps[0],
            part_gaps[1],
            part_gaps[2],
            exact_gaps[0],
            exact_gaps[1],
            exact_gaps[2],
        ));
    }
    verdict(pass, notes.join("\n    "))
}

fn quantitative_anchor() -> Verdict {
    let target = 1.0 - 0.677;
    let mut best = (0, f64::INFINITY);
    for n in 2..=32 {
        let c = ctx(140.0, n, V, SnrModel::PaperLiteral, 40.0);
        let ratio =
            c.evaluate(Scheme::Otpa).unwrap().energy / c.evaluate(Scheme::Mctp).unwrap().energy;
        if (ratio - target).abs() < (best.1 - target).abs() {
            best = (n, ratio);
        }
    }
    verdict(
        (best.1 - target).abs() <= 0.10,
        format!(
            "closest OTPA/MCTP ratio {:.4} at N={} (target {target:.3} ± 0.10)",
            best.1, best.0
        ),
    )
}

fn figure_trends() -> Verdict {
    let mut failures = Vec::new();
    let energy = |c: &OperatingContext, s: Scheme| c.evaluate(s).unwrap().energy;
    let dls: Vec<f64> = (0..8).map(|k| 60.0 + 20.0 * k as f64).collect();
    let by_dl: Vec<OperatingContext> = dls
        .iter()
        .map(|&dl| ctx(dl, 8, V, SnrModel::PaperLiteral, 40.0))
        .collect();
    for s in FOUR {
        for (k, w) in by_dl.windows(2).enumerate() {
            if energy(&w[1], s) <= energy(&w[0], s) {
                failures.push(format!(
                    "{s} not increasing in dl between {} and {}",
                    dls[k],
                    dls[k + 1]
                ));
            }
        }
    }
    for (c, &dl) in by_dl.iter().zip(&dls) {
        if dl > 100.0 {
            for s in [Scheme::Otpa, Scheme::Mtpa] {
                if energy(c, s) >= energy(c, Scheme::Mctp) {
                    failures.push(format!("{s} not below MCTP at dl={dl}"));
                }
            }
        }
    }
    let vs: Vec<f64> = (0..7).map(|k| (100.0 + 50.0 * k as f64) / 3.6).collect();
    let by_v: Vec<OperatingContext> = vs
        .iter()
        .map(|&v| ctx(60.0, 8, v, SnrModel::PaperLiteral, 40.0))
        .collect();
    for s in FOUR {
        for w in by_v.windows(2) {
            if energy(&w[1], s) >= energy(&w[0], s) {
                failures.push(format!("{s} not decreasing in v at dl=60"));
                break;
            }
        }
    }
    for c in by_dl.iter().chain(&by_v) {
        if energy(c, Scheme::OtpaInf) > energy(c, Scheme::Otpa) {
            failures.push(format!(
                "OTPA_INF above OTPA at dl={} v={}",
                c.geometry.dl(),
                c.geometry.v()
            ));
        }
    }
    if failures.is_empty() {
        verdict(true, "dl 60..200 m and v 100..400 km/h, N=8, P=40 dBm")
    } else {
        verdict(false, failures.join("\n    "))
    }
}

fn montecarlo() -> Verdict {
    let b = budget();
    let mut notes = Vec::new();
    let mut pass = true;

    // Zero spread reproduces the deterministic results bit for bit.
    let cfg = SchemeConfig {
        schemes: FOUR.to_vec(),
        p_ref: Dbm(40.0),
    };
    let zero = VelocityErrorModel::new(0.0, 7, 3).unwrap();
    for dl in [60.0, 120.0, 200.0] {
        let g = geom(dl, 8);
        let det = OperatingContext::new(g, b, SnrModel::PaperLiteral, Dbm(40.0)).unwrap();
        let summary = run_montecarlo(&g, &b, SnrModel::PaperLiteral, &zero, &cfg);
        for agg in &summary.aggregates {
            let r = det.evaluate(agg.scheme).unwrap();
            if (agg.energy.mean, agg.data.mean, agg.energy_efficiency.mean)
                != (r.energy, r.data, r.energy_efficiency)
                || agg.energy.std != 0.0
            {
                pass = false;
                notes.push(format!("{} does not collapse at dl={dl}", agg.scheme));
            }
        }
    }

    // Thread count does not change a single byte.
    let mut r = Resolved::default();
    r.apply_file_text(
        "sweep = dl:100m:140m:20m\np_ref = 40 dBm\nsigma_v = 1 %\ntrials = 200\nseed = 11\n",
    )
    .unwrap();
    let csv_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_montecarlo_cmd(&r.config).text)
    };
    if csv_with(1) != csv_with(8) {
        pass = false;
        notes.push("CSV differs between 1 and 8 threads".to_string());
    }

    // Mean-energy ordering under 1% speed error matches the deterministic one.
    for dl in [100.0, 120.0, 140.0] {
        let g = geom(dl, 8);
        let det = OperatingContext::new(g, b, SnrModel::PaperLiteral, Dbm(40.0)).unwrap();
        let model = VelocityErrorModel::new(0.01 * V, 2024, 10_000).unwrap();
        let summary = run_montecarlo(&g, &b, SnrModel::PaperLiteral, &model, &cfg);
        let mut det_order: Vec<(f64, Scheme)> = FOUR
            .iter()
            .map(|&s| (det.evaluate(s).unwrap().energy, s))
            .collect();
        let mut mc_order: Vec<(f64, Scheme)> = summary
            .aggregates
            .iter()
            .map(|a| (a.energy.mean, a.scheme))
            .collect();
        det_order.sort_by(|a, b| a.0.total_cmp(&b.0));
        mc_order.sort_by(|a, b| a.0.total_cmp(&b.0));
        let det_s: Vec<Scheme> = det_order.iter().map(|x| x.1).collect();
        let mc_s: Vec<Scheme> = mc_order.iter().map(|x| x.1).collect();
        let failures: usize = summary.aggregates.iter().map(|a| a.failures).sum();
        if det_s != mc_s || failures > 0 {
            pass = false;
        }
        notes.push(format!(
            "dl={dl}: deterministic {:?}, mean under 1% error {:?}, failed trials {failures}",
            det_s.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
            mc_s.iter().map(|s| s.as_str()).collect::<Vec<_>>()
        ));
    }
    verdict(pass, notes.join("\n    "))
}

fn main() {
    let criteria: [(&str, Duration, Check); 9] = [
        (
            "1 geometry identity",
            Duration::from_secs(1),
            geometry_identity,
        ),
        (
            "2 antenna fixtures",
            Duration::from_secs(1),
            antenna_fixtures,
        ),
        (
            "3 midpoint convergence",
            Duration::from_secs(5),
            midpoint_convergence,
        ),
        (
            "4 closed-form constraint identity",
            Duration::from_secs(5),
            constraint_identity,
        ),
        (
            "5 oracle dominance",
            Duration::from_secs(30),
            oracle_dominance,
        ),
        (
            "6 limit convergence",
            Duration::from_secs(10),
            limit_convergence,
        ),
        (
            "7 quantitative anchor",
            Duration::from_secs(5),
            quantitative_anchor,
        ),
        ("8 figure trends", Duration::from_secs(10), figure_trends),
        ("9 monte carlo", Duration::from_secs(60), montecarlo),
    ];
    let mut failed = 0;
    for (name, limit, check) in criteria {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed <= limit;
        failed += usize::from(!pass);
        println!(
            "{} criterion {name} ({:.2} s of {} s)\n    {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs(),
            v.detail
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
