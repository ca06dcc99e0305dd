//! Acceptance criteria, one printed line each. Runs without the libtest
//! harness so the lines always appear in `cargo test` output.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_integer::Integer;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reebkit::check::CheckConfig;
use reebkit::contact::{
    classify_system, conformal_bracket_law, independence_rank, involution_table, isotropy_defect,
    reeb_contract, verify_flow_identity,
};
use reebkit::expr::ScalarExpr;
use reebkit::models::{build_model, ModelDescriptor, ModelKey};
use reebkit::random::{random_exp_linear, random_polynomial};
use reebkit::toric::{
    circle_weights, classify, coprime_pairs, exact_minimum, hirzebruch_data, homogeneous_coordinate_check,
    quotient_kahler_data, quotient_reeb_field, reeb_generator, reparametrize_torus, sample_level_set, YpqParams,
};

type Outcome = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn model(key: ModelKey) -> ModelDescriptor {
    build_model(&key).expect("model builds")
}

fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn within_time(start: Instant, limit: Duration, what: &str) -> std::result::Result<Duration, String> {
    let elapsed = start.elapsed();
    ensure!(elapsed < limit, "{what} took {elapsed:?}, limit {limit:?}");
    Ok(elapsed)
}

/// Dossier of `dz − y dx` with `h = −y`, `f = z` against closed forms.
fn criterion_1() -> Outcome {
    let start = Instant::now();
    let m = model(ModelKey::NotCompletelyGood);
    let sys = &m.system;
    let (h, f) = (sys.parse_function("-y").unwrap(), sys.parse_function("z").unwrap());
    let config = CheckConfig::default();
    let mut worst: f64 = 0.0;
    let xh = sys.hamiltonian_field(h.clone());
    let xf = sys.hamiltonian_field(f.clone());
    for p in config.points(sys.chart()).unwrap() {
        let (y, z) = (p[1], p[2]);
        worst = worst.max(max_deviation(&xh.value_at(&p).unwrap(), &[1.0, 0.0, 0.0]));
        worst = worst.max(max_deviation(&xf.value_at(&p).unwrap(), &[0.0, y, z]));
        worst = worst.max((isotropy_defect(sys, &h, &f, &p).unwrap().value - y).abs());
    }
    let at_reference = isotropy_defect(sys, &h, &f, &[1.0, 2.0, 3.0]).unwrap().value;
    ensure!((at_reference - 2.0).abs() < 1e-9, "isotropy defect at (1,2,3) is {at_reference}");
    let lift_h = m.cone.lift_hamiltonian(&h);
    let lift_f = m.cone.lift_hamiltonian(&f);
    let (potential_h, potential_f) = (lift_h.cone_hamiltonian(), lift_f.cone_hamiltonian());
    use reebkit::pointwise::FieldSource;
    for p in config.points(m.cone.chart()).unwrap() {
        let (y, z, r) = (p[1], p[2], p[3]);
        worst = worst.max(max_deviation(&lift_h.jet_at(&p).unwrap().value, &[1.0, 0.0, 0.0, 0.0]));
        worst = worst.max(max_deviation(&lift_f.jet_at(&p).unwrap().value, &[0.0, y, z, -r / 2.0]));
        worst = worst.max((potential_h.eval(&p).unwrap() + r * r * y).abs());
        worst = worst.max((potential_f.eval(&p).unwrap() - r * r * z).abs());
    }
    for lift in [&lift_h, &lift_f] {
        worst = worst.max(lift.cone_hamiltonian_check(&config).unwrap().max_residual);
        worst = worst.max(lift.invariance_check(&config).unwrap().max_residual);
    }
    ensure!(worst < 1e-9, "max residual {worst:e}");
    let elapsed = within_time(start, Duration::from_secs(1), "dossier")?;
    Ok(format!("max residual {worst:.2e}, defect(1,2,3) = {at_reference}, {elapsed:.2?}"))
}

/// `X_h f = R(h) f + {h, f}` for random cubic pairs on four systems.
fn criterion_2() -> Outcome {
    let start = Instant::now();
    let config = CheckConfig::default();
    let mut worst: f64 = 0.0;
    let keys = [ModelKey::Darboux(1), ModelKey::Darboux(2), ModelKey::Heisenberg(1), ModelKey::Heisenberg(2)];
    for (k, key) in keys.iter().enumerate() {
        let m = model(key.clone());
        let chart = m.system.chart().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(200 + k as u64);
        for case in 0..200 {
            let h = random_polynomial(&chart, 3, &mut rng);
            let f = random_polynomial(&chart, 3, &mut rng);
            let r = verify_flow_identity(&m.system, &h, &f, &config).unwrap();
            ensure!(r.max_residual < 1e-8, "{key} case {case}: residual {:e} for h = {h}, f = {f}", r.max_residual);
            worst = worst.max(r.max_residual);
        }
    }
    let elapsed = within_time(start, Duration::from_secs(30), "flow identity suite")?;
    Ok(format!("800 pairs x 128 samples, max residual {worst:.2e}, {elapsed:.2?}"))
}

/// Reeb contract on every family and the cosphere closed form.
fn criterion_3() -> Outcome {
    let config = CheckConfig::default().with_samples(256);
    let keys = [
        ModelKey::Darboux(1),
        ModelKey::Darboux(2),
        ModelKey::Heisenberg(1),
        ModelKey::Heisenberg(2),
        ModelKey::Cosphere(1),
        ModelKey::Cosphere(2),
        ModelKey::NotCompletelyGood,
        ModelKey::SphereWeighted(vec![1, 2]),
        ModelKey::SphereWeighted(vec![2, 3, 5]),
    ];
    let mut worst: f64 = 0.0;
    for key in &keys {
        let r = reeb_contract(&model(key.clone()).system, &config).unwrap();
        ensure!(r.max_residual < 1e-9, "{key}: Reeb residual {:e}", r.max_residual);
        worst = worst.max(r.max_residual);
    }
    let cosphere = model(ModelKey::Cosphere(1));
    let mut closed_form: f64 = 0.0;
    for p in config.points(cosphere.system.chart()).unwrap() {
        let p0 = (1.0 - p[2] * p[2]).sqrt();
        let reeb = cosphere.system.reeb_at(&p).unwrap();
        closed_form = closed_form.max(max_deviation(&reeb, &[p0, p[2], 0.0]));
    }
    ensure!(closed_form < 1e-9, "cosphere Reeb off the closed form by {closed_form:e}");
    Ok(format!(
        "{} systems x 256 samples, max residual {worst:.2e}, cosphere closed form {closed_form:.2e}",
        keys.len()
    ))
}

/// Rank facts on the cosphere chart.
fn criterion_4() -> Outcome {
    let m = model(ModelKey::Cosphere(1));
    let sys = &m.system;
    let f = |s: &str| sys.parse_function(s).unwrap();
    let config = CheckConfig::default();
    let pair = independence_rank(sys, &[f("1"), f("p1")], &config).unwrap();
    let nonzero_p0 = config
        .points(sys.chart())
        .unwrap()
        .iter()
        .filter(|p| 1.0 - p[2] * p[2] > 0.0)
        .count();
    ensure!(
        pair.max_rank == 2 && pair.histogram[2] == nonzero_p0,
        "rank(1, p1): max {} attained on {} of {nonzero_p0} samples",
        pair.max_rank,
        pair.histogram[2]
    );
    let triple = independence_rank(
        sys,
        &[f("1"), f("sqrt(1 - p1^2)"), f("p1")],
        &config.clone().with_samples(1024),
    )
    .unwrap();
    ensure!(triple.max_rank == 2, "rank(1, p0, p1) reached {}", triple.max_rank);
    Ok(format!(
        "rank(1, p1) = 2 on {nonzero_p0}/{nonzero_p0}, rank(1, p0, p1) <= 2 on 1024 samples"
    ))
}

/// Reeb-type Heisenberg systems and the Reeb-type implication fuzz.
fn criterion_5() -> Outcome {
    let config = CheckConfig::default();
    for n in [1, 2] {
        let m = model(ModelKey::Heisenberg(n));
        let c = classify_system(&m.system, &config).unwrap();
        ensure!(
            c.good && c.completely_good && c.reeb_type && c.involution,
            "heisenberg:{n}: good {} completely good {} reeb type {} involution {}",
            c.good,
            c.completely_good,
            c.reeb_type,
            c.involution
        );
        ensure!(
            c.rank.max_rank == n + 1 && c.rank.fraction >= 0.99,
            "heisenberg:{n}: rank {} on {}",
            c.rank.max_rank,
            c.rank.fraction
        );
        let mut family = vec![m.system.hamiltonian().unwrap().clone()];
        family.extend(m.system.integrals().iter().cloned());
        let table = involution_table(&m.system, &family, &config).unwrap();
        ensure!(table.iter().flatten().all(|r| r.passed), "heisenberg:{n}: involution table fails");
    }

    let fuzz = config.clone().with_samples(48);
    let base = model(ModelKey::Heisenberg(1)).system;
    let chart = base.chart().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let (mut reeb_type, mut violations) = (0, 0);
    for _ in 0..500 {
        // Half the corpus uses h = 1 with a z-independent integral so the
        // implication is exercised, not only vacuous.
        let (h, f) = if rng.random_bool(0.5) {
            let f = random_polynomial(&chart, 3, &mut rng);
            let z_free = f.substitute(&[chart.coordinate(0), chart.coordinate(1), chart.constant(0.0)]);
            (chart.constant(1.0), z_free)
        } else {
            (random_polynomial(&chart, 2, &mut rng), random_polynomial(&chart, 2, &mut rng))
        };
        let sys = base.clone().with_hamiltonian(h).with_integrals(vec![f]);
        let c = classify_system(&sys, &fuzz).unwrap();
        if c.reeb_type {
            reeb_type += 1;
            if !c.completely_good {
                violations += 1;
            }
        }
    }
    ensure!(violations == 0, "{violations} Reeb-type systems not completely good");
    Ok(format!("heisenberg:1,2 classified; fuzz 500 cases, {reeb_type} of Reeb type, 0 violations"))
}

/// Conformal rescaling law for brackets on the 3-dimensional Darboux chart.
fn criterion_6() -> Outcome {
    let m = model(ModelKey::Darboux(1));
    let chart = m.system.chart().clone();
    let config = CheckConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut worst: f64 = 0.0;
    for case in 0..50 {
        let factor = random_exp_linear(&chart, &mut rng);
        let g = random_polynomial(&chart, 3, &mut rng);
        let h = random_polynomial(&chart, 3, &mut rng);
        let r = conformal_bracket_law(&m.system, &factor, &g, &h, &config).unwrap();
        ensure!(r.max_residual < 1e-7, "case {case}: residual {:e}", r.max_residual);
        worst = worst.max(r.max_residual);
    }
    Ok(format!("50 triples x 128 samples, max residual {worst:.2e}"))
}

/// Closure, homogeneity and lifted invariance on two cones.
fn criterion_7() -> Outcome {
    let config = CheckConfig::default();
    let mut summary = Vec::new();
    for key in [ModelKey::NotCompletelyGood, ModelKey::Heisenberg(1)] {
        let m = model(key.clone());
        let closure = m.cone.closure_check(&config).unwrap().max_residual;
        let homogeneity = m.cone.homogeneity_check(&config).unwrap().max_residual;
        ensure!(closure < 1e-10, "{key}: closure {closure:e}");
        ensure!(homogeneity < 1e-8, "{key}: homogeneity {homogeneity:e}");
        let mut functions: Vec<ScalarExpr> = m.system.hamiltonian().into_iter().cloned().collect();
        functions.extend(m.system.integrals().iter().cloned());
        let mut lift_worst: f64 = 0.0;
        for f in &functions {
            let r = m.cone.lift_hamiltonian(f).invariance_check(&config).unwrap().max_residual;
            ensure!(r < 1e-8, "{key}: lift of {f} residual {r:e}");
            lift_worst = lift_worst.max(r);
        }
        summary.push(format!("{key} closure {closure:.1e} homogeneity {homogeneity:.1e} lift {lift_worst:.1e}"));
    }
    Ok(summary.join("; "))
}

/// Exact lattice identities for every coprime pair with `p <= 100`.
fn criterion_8() -> Outcome {
    let start = Instant::now();
    let pairs = coprime_pairs(100);
    let expected: usize = (2u64..=100).map(|p| (1..p).filter(|q| q.gcd(&p) == 1).count()).sum();
    ensure!(pairs.len() == expected, "{} pairs, brute force gives {expected}", pairs.len());
    for params in &pairs {
        let (p, q) = (params.p, params.q);
        ensure!(circle_weights(*params).iter().sum::<i64>() == 0, "({p},{q}) weight sum");
        ensure!(reparametrize_torus(*params).holds(), "({p},{q}) W'B != W");
        let h = hirzebruch_data(*params).unwrap();
        if p % 2 == 1 {
            ensure!(h.surface_index == 2 * q && h.surface_index.is_multiple_of(2), "({p},{q}) odd-p index");
            ensure!(homogeneous_coordinate_check(*params).unwrap().passed, "({p},{q}) homogeneous coordinates");
        } else {
            ensure!(q % 2 == 1 && h.surface_index == q && h.ramification == p / 2, "({p},{q}) even-p data");
        }
        let k = quotient_kahler_data(*params).unwrap();
        let g = (p - q).gcd(&(p + q));
        ensure!(g == 1 || g == 2, "({p},{q}) gcd {g}");
        ensure!((g == 2) == (p % 2 == 1 && q % 2 == 1), "({p},{q}) parity characterization");
        ensure!(k.omega == (p, g), "({p},{q}) omega coefficients {:?}", k.omega);
        ensure!(k.weights != (1, 1), "({p},{q}) weighted factor (1,1)");
    }
    let elapsed = within_time(start, Duration::from_secs(5), "toric sweep")?;
    Ok(format!("{} coprime pairs, all identities exact, {elapsed:.2?}", pairs.len()))
}

/// Closed-form vertex minimum of `Σ a_j |z_j|²` for `a3 = a4`.
fn vertex_oracle(p: i64, q: i64, a: [i64; 4]) -> Rational64 {
    let first = Rational64::new(a[0], 2 * (p - q)).min(Rational64::new(a[1], 2 * (p + q)));
    first + Rational64::new(a[2], 2 * p)
}

/// Positivity of the Reeb generators and nullity of the reducing circle.
fn criterion_9() -> Outcome {
    let pairs = coprime_pairs(100);
    let mut null_worst: f64 = 0.0;
    for params in &pairs {
        let (p, q) = (params.p as i64, params.q as i64);
        for a in [reeb_generator(*params), quotient_reeb_field(*params)] {
            let exact = exact_minimum(*params, a);
            ensure!(exact == vertex_oracle(p, q, a), "({p},{q}) vertex minimum {exact} for {a:?}");
            ensure!(exact > Rational64::from_integer(0), "({p},{q}) minimum {exact} for {a:?}");
        }
        let weights = circle_weights(*params).map(|w| w as f64);
        for s in sample_level_set(*params, 128, params.p * 1000 + params.q) {
            let value: f64 = weights.iter().zip(&s.moduli).map(|(w, m)| w * m).sum();
            null_worst = null_worst.max(value.abs());
        }
    }
    ensure!(null_worst < 1e-12, "eta(L) reaches {null_worst:e} on the level set");
    let spot = exact_minimum(YpqParams::new(3, 1).unwrap(), [4, 2, 3, 3]);
    ensure!(spot == Rational64::new(3, 4), "spot value {spot}");
    Ok(format!(
        "{} pairs positive, |eta(L)| <= {null_worst:.1e}, (3,1) minimum {spot}",
        pairs.len()
    ))
}

/// Class table from the binary and the classifier on random pairs.
fn criterion_10() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_reebkit"))
            .args(["ypq", "--enumerate", "30"])
            .output()
            .expect("binary runs")
    };
    let (first, second) = (run(), run());
    ensure!(first.status.success(), "exit status {:?}", first.status.code());
    ensure!(first.stdout == second.stdout, "outputs differ between runs");
    let text = String::from_utf8(first.stdout).unwrap();
    let mut sizes = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<u64> = line.split_whitespace().map(|t| t.parse().unwrap()).collect();
        let (p, size) = (fields[0], fields[2]);
        let totient = (1..=p).filter(|q| q.gcd(&p) == 1).count() as u64;
        ensure!(size == totient && fields.len() - 3 == size as usize, "p = {p}: size {size}, phi {totient}");
        sizes.push((p, size));
    }
    ensure!(sizes.len() == 29, "{} classes listed", sizes.len());
    for (p, phi) in [(5, 4), (12, 4), (30, 8)] {
        ensure!(sizes.contains(&(p, phi)), "class {p} does not have size {phi}");
    }
    let pairs = coprime_pairs(60);
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    for _ in 0..50 {
        let a = pairs[rng.random_range(0..pairs.len())];
        let b = if rng.random_bool(0.3) {
            let same: Vec<_> = pairs.iter().filter(|x| x.p == a.p).collect();
            *same[rng.random_range(0..same.len())]
        } else {
            pairs[rng.random_range(0..pairs.len())]
        };
        ensure!(classify(a, b).unwrap() == (a.p == b.p), "classify({a:?}, {b:?})");
    }
    Ok("29 classes with sizes phi(p), 50 classifier pairs, byte-identical reruns".into())
}

fn main() {
    let criteria: [(u32, fn() -> Outcome); 10] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ];
    let mut failures = 0;
    for (number, criterion) in criteria {
        let outcome = catch_unwind(AssertUnwindSafe(criterion)).unwrap_or_else(|panic| {
            let message = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {message}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {number:>2}: PASS  {detail}"),
            Err(detail) => {
                failures += 1;
                println!("criterion {number:>2}: FAIL  {detail}");
            }
        }
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
