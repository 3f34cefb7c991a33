//! Acceptance criteria, one line each. Run with
//! `cargo test -p slmdecay-cli --test acceptance`.

use std::f64::consts::PI;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use slmdecay::minkowski::DEFAULT_RANK_TOL;
use slmdecay::prelude::*;
use slmdecay::relations::velocity_pair_from_triple;
use slmdecay::spectra::{DEFAULT_BW_SUPPORT, DEFAULT_GAUSSIAN_SUPPORT, DEFAULT_NODES};

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn check(cond: bool, detail: String) -> Verdict {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn default_bw() -> SpectralDensity {
    make_breit_wigner(1.0, 0.05, DEFAULT_BW_SUPPORT, DEFAULT_NODES).unwrap()
}

fn random_velocity(rng: &mut ChaCha8Rng, max_speed: f64) -> Velocity3 {
    loop {
        let u: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let r2 = u[0] * u[0] + u[1] * u[1] + u[2] * u[2];
        if r2 < 1.0 {
            return Velocity3::from_array(u.map(|c| c * max_speed)).unwrap();
        }
    }
}

fn random_axis(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        if n > 0.1 && n < 1.0 {
            return a.map(|c| c / n);
        }
    }
}

fn shirokov_identity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let tau0 = lifetime_closed_form(&default_bw(), 0.0, 1.0).map_err(|e| e.to_string())?.value;
    let (mut worst_product, mut worst_gap) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let u = random_velocity(&mut rng, 0.999);
        let eta = eta_from_velocity(&u);
        let t_s = shirokov_time(tau0, &u).unwrap();
        let gap = time_gap_between_parallel(&Hyperplane::new(eta, 0.0).unwrap(), &Hyperplane::new(eta, tau0).unwrap())
            .unwrap();
        worst_product = worst_product.max((t_s * eta.gamma() - tau0).abs());
        worst_gap = worst_gap.max((t_s - gap).abs());
    }
    check(
        worst_product <= 1e-12 && worst_gap <= 1e-12,
        format!("max |t_S eta0 - tau0| = {worst_product:.1e}, max |t_S - gap| = {worst_gap:.1e} (tol 1e-12)"),
    )
}

fn coordinate_time_speed_up() -> Verdict {
    let d = default_bw();
    let mut worst = 0.0f64;
    for ux in [0.3, 0.6, 0.9] {
        let u = Velocity3::new(ux, 0.0, 0.0).unwrap();
        let gamma = eta_from_velocity(&u).gamma();
        for k in 0..=200 {
            let t = 0.5 * k as f64;
            let moving = velocity_eigenstate_survival(&d, &u, t, 1.0).unwrap().norm_sqr();
            let rest = survival_amplitude(&d, 0.0, gamma * t, 1.0).unwrap().norm_sqr();
            worst = worst.max((moving - rest).abs());
        }
    }
    check(worst <= 1e-12, format!("max pointwise difference {worst:.1e} over 603 points (tol 1e-12)"))
}

fn lifetime_cross_oracle() -> Verdict {
    let spectra = [
        ("breit-wigner", default_bw()),
        ("gaussian", make_gaussian(1.0, 0.02, DEFAULT_GAUSSIAN_SUPPORT, DEFAULT_NODES).unwrap()),
    ];
    let mut worst = (0.0f64, "", 0.0);
    for (name, d) in &spectra {
        for s in [0.0, 1.0, 3.0] {
            let closed = lifetime_closed_form(d, s, 1.0).map_err(|e| e.to_string())?.value;
            let numeric = lifetime_numeric(d, s, 1.0, 1e-4).map_err(|e| format!("{name} s={s}: {e}"))?.value;
            let rel = (numeric / closed - 1.0).abs();
            if rel >= worst.0 {
                worst = (rel, name, s);
            }
        }
    }
    check(worst.0 < 5e-4, format!("max relative difference {:.2e} ({} at s={}) (tol 5e-4)", worst.0, worst.1, worst.2))
}

fn exponential_benchmark() -> Verdict {
    let d = default_bw();
    let t = lifetime_closed_form(&d, 0.0, 1.0).map_err(|e| e.to_string())?.value;
    let target = 1.0 / 0.05;
    let rel = (t / target - 1.0).abs();
    // Clipping the Lorentzian to [mu_min, mu_max] and renormalizing scales the
    // squared density by 1/(1 - eps)^2, where eps is the discarded mass.
    let eps = 1.0 - (((d.mu_max() - 1.0) / 0.025).atan() - ((d.mu_min() - 1.0) / 0.025).atan()) / PI;
    check(
        rel < 0.01,
        format!(
            "T = {t:.6}, hbar/Gamma = {target}, relative deviation {rel:.4} (tol 0.01); discarded mass eps = {eps:.5} on [{}, {}], 1/(1-eps)^2 - 1 = {:.4}",
            d.mu_min(),
            d.mu_max(),
            1.0 / (1.0 - eps).powi(2) - 1.0
        ),
    )
}

fn classical_limit_dilation() -> Verdict {
    let d = make_gaussian(1.0, 1e-3, DEFAULT_GAUSSIAN_SUPPORT, DEFAULT_NODES).unwrap();
    let t0 = lifetime_closed_form(&d, 0.0, 1.0).map_err(|e| e.to_string())?.value;
    let mut worst = 0.0f64;
    for s in [1.0, 3.0, 8.0] {
        let t = lifetime_closed_form(&d, s, 1.0).unwrap().value;
        worst = worst.max((t / t0 / (1.0 + s).sqrt() - 1.0).abs());
    }
    check(worst < 1e-4, format!("max |T(s)/T(0)/gamma - 1| = {worst:.2e} for s in {{1, 3, 8}} (tol 1e-4)"))
}

fn dilation_monotonicity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..10 {
        let mass = rng.random_range(0.5..2.0);
        let d = if trial % 2 == 0 {
            make_breit_wigner(mass, mass * rng.random_range(0.01..0.1), DEFAULT_BW_SUPPORT, DEFAULT_NODES)
        } else {
            make_gaussian(mass, mass * rng.random_range(1e-3..0.05), DEFAULT_GAUSSIAN_SUPPORT, DEFAULT_NODES)
        }
        .unwrap();
        let t: Vec<f64> =
            (0..20).map(|k| lifetime_closed_form(&d, 0.25 * k as f64 * mass * mass, 1.0).unwrap().value).collect();
        if let Some(k) = t.windows(2).position(|w| w[1] <= w[0]) {
            return Err(format!("spectrum {trial} ({:?}): T not increasing at grid index {k}", d.kind()));
        }
    }
    Ok("10 spectra x 20 values of s, all strictly increasing".into())
}

fn boost_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d = default_bw();
    let (mut worst_s, mut worst_t) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let eta = eta_from_velocity(&random_velocity(&mut rng, 0.9));
        let q: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let label = SlmLabel::from_rest_frame_momentum(eta, q, "alpha").unwrap();
        let axis = random_axis(&mut rng);
        let rapidity = rng.random_range(-3.0..3.0);
        let eta_b = UnitTimelike::normalize(boost(axis, rapidity, &eta.vec()).unwrap()).unwrap();
        let p_b = boost(axis, rapidity, &label.p()).unwrap();
        let boosted = SlmLabel::new(eta_b, p_b, "alpha").map_err(|e| e.to_string())?;
        let (s, s_b) = (label.s(), boosted.s());
        worst_s = worst_s.max((s_b - s).abs() / s.max(1.0));
        let t = lifetime_closed_form(&d, s, 1.0).unwrap().value;
        let t_b = lifetime_closed_form(&d, s_b, 1.0).unwrap().value;
        worst_t = worst_t.max((t_b / t - 1.0).abs());
    }
    check(
        worst_s <= 1e-10 && worst_t <= 1e-10,
        format!("100 boosts, |rapidity| <= 3: max change in s {worst_s:.1e}, in T {worst_t:.1e} (tol 1e-10)"),
    )
}

fn hyperplane_classification() -> Verdict {
    let v = |x: f64, y: f64| eta_from_velocity(&Velocity3::new(x, y, 0.0).unwrap());
    let canonical = [
        ((v(0.0, 0.0), v(0.0, 0.0), v(0.0, 0.0)), CaseId::Case3),
        ((v(0.0, 0.0), v(0.3, 0.0), v(0.6, 0.0)), CaseId::Case2),
        ((v(0.0, 0.0), v(0.6, 0.0), v(0.0, 0.6)), CaseId::Case1),
    ];
    for ((a, b, c), want) in canonical {
        let got = classify_triple(&a, &b, &c, DEFAULT_RANK_TOL).unwrap().case_id;
        if got != want {
            return Err(format!("canonical triple gave {} instead of {}", got.name(), want.name()));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut seen = [0usize; 3];
    let mut worst = 0.0f64;
    for trial in 0..500 {
        let a = random_velocity(&mut rng, 0.95);
        // A third of the triples are coplanar-by-construction (velocities on
        // one line), a sixth coincide, the rest are generic.
        let (b, c) = match trial % 6 {
            0 => (a, a),
            1 | 2 => {
                let dir = random_axis(&mut rng);
                let on_line = |rng: &mut ChaCha8Rng| {
                    let k = rng.random_range(-0.9..0.9);
                    Velocity3::from_array(dir.map(|x| k * x)).unwrap()
                };
                let b = on_line(&mut rng);
                let c = on_line(&mut rng);
                (b, c)
            }
            _ => (random_velocity(&mut rng, 0.95), random_velocity(&mut rng, 0.95)),
        };
        let a = if trial % 6 == 1 || trial % 6 == 2 { Velocity3::ZERO } else { a };
        let etas = [eta_from_velocity(&a), eta_from_velocity(&b), eta_from_velocity(&c)];
        let r = classify_triple(&etas[0], &etas[1], &etas[2], DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
        if r.rank + r.orthogonal_family_dim != 4 {
            return Err(format!("trial {trial}: rank {} + family {} != 4", r.rank, r.orthogonal_family_dim));
        }
        seen[r.rank - 1] += 1;
        for l in &r.relations {
            let combo = etas[0].vec() * l[0] + etas[1].vec() * l[1] + etas[2].vec() * l[2];
            worst = worst.max(combo.components().iter().fold(0.0f64, |m, x| m.max(x.abs())));
        }
    }
    check(
        worst <= 1e-9,
        format!(
            "canonical triples -> Case3/2/1; 500 trials (rank 1/2/3: {}/{}/{}) with rank + family = 4; max relation residual {worst:.1e} (tol 1e-9)",
            seen[0], seen[1], seen[2]
        ),
    )
}

fn velocity_pair_consistency() -> Verdict {
    let u = |x: f64, y: f64, z: f64| Velocity3::new(x, y, z).unwrap();
    let directed = [
        (u(0.0, 0.0, 0.0), u(0.0, 0.0, 0.0), PairCategory::BothZero, true),
        (u(0.4, 0.1, 0.0), u(0.4, 0.1, 0.0), PairCategory::EqualNonzero, false),
        (u(0.2, 0.0, 0.0), u(-0.5, 0.0, 0.0), PairCategory::CollinearUnequal, true),
        (u(0.0, 0.0, 0.0), u(0.0, 0.7, 0.0), PairCategory::CollinearUnequal, true),
        (u(0.3, 0.0, 0.0), u(0.0, 0.3, 0.0), PairCategory::NonCollinear, false),
    ];
    for (a, b, category, time_dependent) in directed {
        let direct = classify_velocity_pair(&a, &b, DEFAULT_RANK_TOL).unwrap();
        let (derived, _) = velocity_pair_from_triple(&a, &b, DEFAULT_RANK_TOL).unwrap();
        if direct.category != category || direct.time_dependent != time_dependent || derived != direct {
            return Err(format!("directed pair {a:?}, {b:?}: {direct:?} / {derived:?}, want {category:?}"));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut counts = [0usize; 4];
    for trial in 0..1000 {
        let a = random_velocity(&mut rng, 0.95);
        let (a, b) = match trial % 4 {
            0 => (Velocity3::ZERO, Velocity3::ZERO),
            1 => (a, a),
            2 => {
                let k = rng.random_range(-1.0..0.9);
                (a, Velocity3::from_array(a.components().map(|x| k * x)).unwrap())
            }
            _ => (a, random_velocity(&mut rng, 0.95)),
        };
        let direct = classify_velocity_pair(&a, &b, DEFAULT_RANK_TOL).unwrap();
        let (derived, _) = velocity_pair_from_triple(&a, &b, DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
        if derived != direct {
            return Err(format!("pair {a:?}, {b:?}: direct {direct:?}, from triple {derived:?}"));
        }
        counts[direct.category as usize] += 1;
    }
    check(
        counts.iter().all(|&c| c > 0),
        format!(
            "5 directed pairs exact; 1000 random pairs agree (BothZero/EqualNonzero/CollinearUnequal/NonCollinear: {}/{}/{}/{})",
            counts[0], counts[1], counts[2], counts[3]
        ),
    )
}

fn normalization() -> Verdict {
    let spectra = [
        ("breit-wigner", default_bw()),
        ("gaussian", make_gaussian(1.0, 0.02, DEFAULT_GAUSSIAN_SUPPORT, DEFAULT_NODES).unwrap()),
        ("tabulated", make_tabulated(vec![(0.8, 0.0), (0.95, 2.0), (1.0, 5.0), (1.2, 0.0)]).unwrap()),
        ("sharp", make_gaussian(1.0, 1e-14, DEFAULT_GAUSSIAN_SUPPORT, DEFAULT_NODES).unwrap()),
    ];
    let taus: Vec<f64> = (0..=400).map(|k| 0.25 * k as f64).collect();
    let (mut worst_one, mut worst_prob) = (0.0f64, 0.0f64);
    for (name, d) in &spectra {
        for s in [0.0, 1.0, 3.0] {
            let i0 = survival_amplitude(d, s, 0.0, 1.0).map_err(|e| format!("{name}: {e}"))?;
            worst_one = worst_one.max((i0 - 1.0).norm());
            let curve = survival_curve(d, s, &taus, 1.0).unwrap();
            for &p in &curve.probabilities {
                if p < 0.0 {
                    return Err(format!("{name} s={s}: negative probability {p}"));
                }
                worst_prob = worst_prob.max(p);
            }
        }
    }
    check(
        worst_one <= 1e-8 && worst_prob <= 1.0 + 1e-8,
        format!("max |I(0) - 1| = {worst_one:.1e}, max probability {worst_prob:.17} over 4 spectra x 3 values of s"),
    )
}

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"spectrum": "breit-wigner", "mass": 1.0, "gamma": 0.05, "hbar": 1.0}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    let commands: [&[&str]; 7] = [
        &["survival", "--t-max", "50", "--n-points", "64", "--s", "1"],
        &["lifetime", "--s-values", "0,3"],
        &["shirokov", "--u-values", "0,0.6,0.9"],
        &["classify", "--u", "0,0,0", "--u2", "0.3,0,0", "--u3", "0.6,0,0"],
        &["classify", "--u", "0,0,0", "--u2", "0.3,0.1,0", "--u3", "0,0,0.6", "--format", "jsonl"],
        &["velocity-pair", "--u", "0.2,0,0", "--u2", "-0.5,0,0"],
        &["expectations", "--u", "0.5,0,0", "--q-values", "0,0.5,1"],
    ];
    for args in commands {
        let run = || Command::new(env!("CARGO_BIN_EXE_slmdecay")).arg("--config").arg(cfg).args(args).output().unwrap();
        let (a, b) = (run(), run());
        if !a.status.success() {
            return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&a.stderr)));
        }
        if a.stdout != b.stdout || a.stdout.is_empty() {
            return Err(format!("{args:?}: outputs differ between runs"));
        }
    }
    Ok("7 invocations across all six commands, byte-identical on repeat".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("shirokov contraction identity", shirokov_identity),
        ("coordinate-time speed-up", coordinate_time_speed_up),
        ("lifetime cross-oracle", lifetime_cross_oracle),
        ("exponential benchmark", exponential_benchmark),
        ("classical-limit dilation", classical_limit_dilation),
        ("dilation monotonicity", dilation_monotonicity),
        ("boost invariance", boost_invariance),
        ("hyperplane classification", hyperplane_classification),
        ("velocity-pair consistency", velocity_pair_consistency),
        ("normalization", normalization),
        ("cli determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let secs = start.elapsed().as_secs_f64();
        let (tag, detail) = match &verdict {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} {:>2} {name}: {detail} [{secs:.2}s]", i + 1);
        failed += verdict.is_err() as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
