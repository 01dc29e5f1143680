//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::time::Instant;

use magdisk::asymptotics::{
    delta_at_crossings_check, eta_star_expansion_check, gamma_sequence, log_log_slope, richardson_table,
};
use magdisk::config::SolverConfig;
use magdisk::degennes::{compute_constants, DeGennesConstants};
use magdisk::diamagnetism::{
    conjecture_scan, crossing_derivatives, derivative_limits_check, eta_prime, lambda_prime, CrossingDerivatives,
};
use magdisk::fd::{fd_disk_eigen, Grid1D};
use magdisk::intersections::{
    crossing_by_curves, crossing_by_phi, crossing_by_system, saint_james_beta, CrossingMethod, CrossingPoint,
};
use magdisk::kummer::{check_recurrences, kummer_m, kummer_m_integral, KummerArgs};
use magdisk::report::compute_crossings;
use magdisk::spectrum::lowest_eigenvalue;

const REFERENCE_CROSSINGS: [(u32, f64, f64); 13] = [
    (0, 3.847538710016439, 0.46188467750410933),
    (1, 6.784689992385673, 0.490953836999826),
    (2, 9.495696565685895, 0.5057893193465876),
    (3, 12.091164794355297, 0.5152514126454681),
    (4, 14.613601105384173, 0.5219883372745205),
    (5, 17.08457097842645, 0.5271130898896494),
    (10, 28.989490930878333, 0.5418512305407657),
    (25, 62.88412636538398, 0.55750340973811),
    (50, 117.3339755112376, 0.5663294771262841),
    (100, 223.66235051600012, 0.5729419029706077),
    (200, 432.6371167436942, 0.5777978340023635),
    (300, 639.5318373766472, 0.5799955549150178),
    (400, 845.3470994716895, 0.5813189732301576),
];

struct Outcome {
    summary: String,
    failures: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            summary: String::new(),
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }
}

type Criterion = (u32, &'static str, fn(&Data) -> Outcome);

struct Data {
    cfg: SolverConfig,
    crossings: Vec<CrossingPoint>,
    derivs: Vec<CrossingDerivatives>,
    constants: DeGennesConstants,
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn criterion_1(d: &Data) -> Outcome {
    let mut o = Outcome::new();
    // single-threaded timing of the table rows
    let start = Instant::now();
    let rows: Vec<CrossingPoint> = REFERENCE_CROSSINGS.iter().map(|&(n, _, _)| crossing_by_curves(n, &d.cfg).unwrap()).collect();
    let elapsed = start.elapsed().as_secs_f64();
    let mut worst = 0f64;
    for (c, &(n, beta, eta)) in rows.iter().zip(&REFERENCE_CROSSINGS) {
        let (eb, ee) = (rel(c.beta_n, beta), rel(c.eta_star, eta));
        worst = worst.max(eb).max(ee);
        o.check(eb < 1e-9 && ee < 1e-9, format!("n={n}: beta rel err {eb:.2e}, eta rel err {ee:.2e}"));
    }
    o.check(elapsed < 120.0, format!("runtime {elapsed:.1}s"));
    o.summary = format!("max rel err {worst:.2e} over 13 rows, {elapsed:.2}s single-threaded");
    o
}

fn criterion_2(d: &Data) -> Outcome {
    let mut o = Outcome::new();
    let (mut sj, mut alt) = (0f64, 0f64);
    for c in &d.crossings {
        let r = (c.beta_n - saint_james_beta(c.n, c.eta_star)).abs() / c.beta_n;
        let a = c.alt_sj_defect().abs();
        sj = sj.max(r);
        alt = alt.max(a);
        o.check(r < 1e-10 && a < 1e-8, format!("n={}: SJ rel residual {r:.2e}, alt form {a:.2e}", c.n));
    }
    o.summary = format!(
        "n=0..{}: max |beta - SJ|/beta {sj:.2e}, max alt-form defect {alt:.2e}",
        d.crossings.len() - 1
    );
    o
}

fn criterion_3(d: &Data) -> Outcome {
    let mut o = Outcome::new();
    let mut worst = 0f64;
    for n in 0..=50u32 {
        let a = d.crossings[n as usize];
        let b = crossing_by_system(n, &d.cfg).unwrap();
        let c = crossing_by_phi(n, &d.cfg).unwrap();
        o.check(b.method == CrossingMethod::KummerSystem, format!("n={n}: Newton fell back to nesting"));
        for (x, y, label) in [(&a, &b, "curves/system"), (&a, &c, "curves/phi"), (&b, &c, "system/phi")] {
            let e = rel(x.beta_n, y.beta_n).max(rel(x.eta_star, y.eta_star));
            worst = worst.max(e);
            o.check(e < 1e-10, format!("n={n} {label}: {e:.2e}"));
        }
    }
    o.summary = format!("n=0..50, max pairwise rel deviation {worst:.2e}");
    o
}

fn criterion_4(d: &Data) -> Outcome {
    let mut o = Outcome::new();
    let k = &d.constants;
    let gap = k.theta0 - k.xi0 * k.xi0;
    o.check((k.theta0 - 0.590106).abs() <= 1e-5, format!("theta0 = {}", k.theta0));
    o.check((k.xi0 + 0.768).abs() <= 1e-3, format!("xi0 = {}", k.xi0));
    o.check((k.c1 - 0.254).abs() <= 1e-3, format!("c1 = {}", k.c1));
    o.check(
        (k.delta0_fit - 0.0975).abs() <= 2e-3,
        format!("delta0 (fit) = {} vs 0.0975", k.delta0_fit),
    );
    o.check(
        (k.delta0_formula - 0.0975).abs() <= 2e-3,
        format!("delta0 (formula) = {} vs 0.0975", k.delta0_formula),
    );
    o.check(gap.abs() <= 1e-5, format!("theta0 - xi0^2 = {gap:e}"));
    o.summary = format!(
        "theta0={:.9} xi0={:.7} c1={:.7} delta0 fit={:.7} formula={:.7} theta0-xi0^2={gap:.1e}",
        k.theta0, k.xi0, k.c1, k.delta0_fit, k.delta0_formula
    );
    o
}

fn criterion_5(d: &Data) -> Outcome {
    let mut o = Outcome::new();
    let gamma = gamma_sequence(&d.crossings).unwrap();
    let g0 = gamma.get(0).unwrap();
    let r4 = richardson_table(&gamma, 4).unwrap()[3].clone();
    let r4_24 = r4.get(24).unwrap();
    o.check((g0 - 2.9371512823692343).abs() <= 1e-10, format!("gamma0 = {g0}"));
    o.check((r4_24 - 2.0000068128960815).abs() <= 1e-8, format!("R4 gamma24 = {r4_24}"));
    let v = gamma.values();
    for w in v.windows(2).filter(|w| w[0].0 >= 1) {
        o.check(w[1].1 < w[0].1, format!("gamma not decreasing at n={}", w[0].0));
    }
    o.summary = format!("gamma0={g0:.16} R4gamma24={r4_24:.16} last index {}", v.last().unwrap().0);
    o
}

fn criterion_6(d: &Data) -> Outcome {
    let mut o = Outcome::new();
    let first = &d.derivs[0];
    let (l0, r0) = (first.left.dlambda, first.right.dlambda);
    o.check((l0 - 0.884743).abs() <= 1e-5, format!("lambda'(0,beta0) = {l0}"));
    o.check((r0 - 0.144907).abs() <= 1e-5, format!("lambda'(1,beta0) = {r0}"));
    let limits = derivative_limits_check(&d.derivs, &d.constants).unwrap();
    let (left, right) = (limits.find("left_limit").unwrap(), limits.find("right_limit").unwrap());
    o.check(left.index == 25 && right.index == 25, format!("R4 read at n={}", left.index));
    o.check((left.value - 0.882863).abs() <= 1e-5, format!("R4 left = {}", left.value));
    o.check((right.value - 0.297350).abs() <= 1e-5, format!("R4 right = {}", right.value));
    o.check(left.passed(), format!("R4 left {} vs {} (2e-3)", left.value, left.target));
    o.check(right.passed(), format!("R4 right {} vs {} (2e-3)", right.value, right.target));
    o.summary = format!(
        "lambda'(0)={l0:.6} lambda'(1)={r0:.6} R4 left={:.6} (limit {:.6}) R4 right={:.6} (limit {:.6})",
        left.value, left.target, right.value, right.target
    );
    o
}

fn criterion_7(d: &Data) -> Outcome {
    let mut o = Outcome::new();
    let grid = Grid1D::new(0.0, 1.0, d.cfg.fd_grid_count).unwrap();
    let mut worst_fd = 0f64;
    for n in [0u32, 1, 2, 5, 10] {
        for beta in [1.0, 5.0, 10.0, 30.0, 100.0] {
            let k = lowest_eigenvalue(n, beta, &d.cfg).unwrap().lambda;
            let f = fd_disk_eigen(n, beta, grid).unwrap().lambda;
            let e = rel(k, f);
            worst_fd = worst_fd.max(e);
            o.check(e < 1e-6, format!("n={n} beta={beta}: {k} vs fd {f}"));
        }
    }
    let mut worst_fh = 0f64;
    let grid_records = (0..=10u32).flat_map(|n| [1.0, 5.0, 10.0, 30.0].map(|b| lambda_prime(n, b, &d.cfg).unwrap()));
    let crossing_records = d.derivs.iter().flat_map(|x| [x.left, x.right]);
    for r in grid_records.chain(crossing_records) {
        worst_fh = worst_fh.max(r.fh_vs_fd_gap);
        o.check(
            r.fh_vs_fd_gap < 1e-5,
            format!("n={} beta={}: derivative gap {:.2e}", r.n, r.beta, r.fh_vs_fd_gap),
        );
    }
    o.summary = format!("max Kummer/FD rel gap {worst_fd:.2e}, max derivative formula/FD gap {worst_fh:.2e}");
    o
}

/// Five-point central difference.
fn dm_dz(a: f64, b: f64, z: f64, cfg: &SolverConfig) -> f64 {
    let h = 1e-3;
    let m = |s: f64| kummer_m(KummerArgs::new(a, b, z + s * h), cfg).unwrap();
    let base = m(0.0);
    let rel = |s: f64| m(s).ratio(base);
    (-rel(2.0) + 8.0 * rel(1.0) - 8.0 * rel(-1.0) + rel(-2.0)) / (12.0 * h)
}

fn criterion_8(d: &Data) -> Outcome {
    let mut o = Outcome::new();
    let cfg = &d.cfg;
    let mut worst_id = 0f64;
    for a in [0.1, 0.37, 0.8] {
        for b in [1.0, 3.0, 11.0] {
            for z in [0.5, 7.0, 60.0, 250.0, 450.0] {
                let args = KummerArgs::new(a, b, z);
                let (r1, r2) = check_recurrences(args, cfg).unwrap();
                let m = kummer_m(args, cfg).unwrap();
                let integral = (m.ratio(kummer_m_integral(args, cfg).unwrap()) - 1.0).abs();
                let exact = kummer_m(KummerArgs::new(a + 1.0, b + 1.0, z), cfg).unwrap().ratio(m) * a / b;
                let deriv = (dm_dz(a, b, z, cfg) / exact - 1.0).abs();
                let e = r1.abs().max(r2.abs()).max(integral).max(deriv);
                worst_id = worst_id.max(e);
                o.check(e < 1e-10, format!("kummer identities at ({a},{b},{z}): {e:.2e}"));
            }
        }
    }
    for c in &d.crossings {
        let left = eta_prime(c.n, c.beta_n, cfg).unwrap();
        let right = eta_prime(c.n + 1, c.beta_n, cfg).unwrap();
        o.check(left > 0.0 && right < 0.0, format!("interlacing signs at n={}: {left}, {right}", c.n));
    }
    for n in 1..=10u32 {
        for beta in [0.5, 1.0, 2.0 * f64::from(n) - 0.5] {
            let dl = lambda_prime(n, beta, cfg).unwrap().dlambda;
            o.check(dl < 0.0, format!("lambda'({n},{beta}) = {dl}"));
        }
    }
    for beta in [0.1, 1.0, 3.0, 10.0, 50.0, 200.0, 900.0] {
        let l = lowest_eigenvalue(0, beta, cfg).unwrap().lambda;
        o.check(l <= beta * beta / 8.0, format!("lambda(0,{beta}) = {l} > beta^2/8"));
    }
    let report = conjecture_scan(&cfg.beta_grid.points(), &d.derivs, d.constants.theta0, cfg).unwrap();
    for item in &report.items {
        o.check(item.passed, format!("scan {} failed: {} at {}", item.label, item.value, item.witness));
    }
    let scans: Vec<String> = report.items.iter().map(|i| format!("{}={:.3e}", i.label, i.value)).collect();
    o.summary = format!("kummer identities max {worst_id:.1e}; {}", scans.join(" "));
    o
}

fn criterion_9(d: &Data) -> Outcome {
    let mut o = Outcome::new();
    let eta = eta_star_expansion_check(&d.crossings, &d.constants).unwrap();
    let s = eta.find("s_limit").unwrap();
    o.check(s.passed(), format!("s_n limit {} vs c1 {}", s.value, s.target));
    let delta = delta_at_crossings_check(&d.crossings, &d.constants).unwrap();
    let dl = delta.find("delta_left_limit").unwrap();
    o.check(dl.passed(), format!("delta(n, beta_n) limit {} vs delta0 - 1/2 = {}", dl.value, dl.target));
    let gamma = gamma_sequence(&d.crossings).unwrap();
    let r4 = richardson_table(&gamma, 4).unwrap()[3].clone();
    let last = r4.last().unwrap().0;
    let slope = log_log_slope(&r4, 2.0, last / 2, last).unwrap();
    o.check((slope + 2.5).abs() <= 0.3, format!("log-log slope of R4 gamma - 2 over n={}..{last}: {slope}", last / 2));
    o.summary = format!(
        "s limit {:.6} (c1 {:.6}); delta limit {:.6} (target {:.6}); R4 gamma slope {slope:.3}",
        s.value, s.target, dl.value, dl.target
    );
    o
}

fn main() {
    let cfg = SolverConfig::default();
    let t = Instant::now();
    let crossings = compute_crossings(CrossingMethod::CurveIntersection, &cfg).expect("crossings");
    let derivs = crossing_derivatives(&crossings, &cfg).expect("derivatives");
    let (constants, _) = compute_constants(&cfg).expect("constants");
    println!("setup: {} crossings, derivatives and constants in {:.1}s", crossings.len(), t.elapsed().as_secs_f64());
    let data = Data {
        cfg,
        crossings,
        derivs,
        constants,
    };

    let criteria: [Criterion; 9] = [
        (1, "reference crossings", criterion_1),
        (2, "Saint-James relation", criterion_2),
        (3, "method triangulation", criterion_3),
        (4, "constants", criterion_4),
        (5, "gap sequence", criterion_5),
        (6, "one-sided derivatives", criterion_6),
        (7, "oracle equivalence", criterion_7),
        (8, "property suites", criterion_8),
        (9, "asymptotic coefficients", criterion_9),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        let t = Instant::now();
        let out = run(&data);
        let status = if out.failures.is_empty() { "PASS" } else { "FAIL" };
        println!("criterion {id} [{status}] {name}: {} ({:.1}s)", out.summary, t.elapsed().as_secs_f64());
        for f in &out.failures {
            println!("    failed: {f}");
        }
        if !out.failures.is_empty() {
            failed += 1;
        }
    }
    println!("{} of 9 criteria passed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
