//! Seeded random expressions for fuzzing identities.

use rand::Rng;

use crate::chart::Chart;
use crate::expr::ScalarExpr;

/// Sum of up to six monomials of total degree at most `degree`, with
/// coefficients uniform in `[-1, 1]`.
pub fn random_polynomial(chart: &Chart, degree: u32, rng: &mut impl Rng) -> ScalarExpr {
    let terms = rng.random_range(1..=6);
    (0..terms).fold(chart.constant(0.0), |sum, _| {
        let coefficient = chart.constant(rng.random_range(-1.0..=1.0));
        let total = rng.random_range(0..=degree);
        let monomial = (0..total).fold(coefficient, |m, _| {
            m * chart.coordinate(rng.random_range(0..chart.dim()))
        });
        sum + monomial
    })
}

/// `exp(c₀ + Σ cᵢ xᵢ)` with coefficients uniform in `[-0.5, 0.5]`.
pub fn random_exp_linear(chart: &Chart, rng: &mut impl Rng) -> ScalarExpr {
    let linear = (0..chart.dim()).fold(chart.constant(rng.random_range(-0.5..=0.5)), |sum, i| {
        sum + chart.coordinate(i) * rng.random_range(-0.5..=0.5)
    });
    linear.exp()
}

/// Random expression tree of the given depth built from every operator of
/// the language. Divisors and square-root arguments are shifted away from
/// zero so the result is defined everywhere.
pub fn random_expression(chart: &Chart, depth: u32, rng: &mut impl Rng) -> ScalarExpr {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.7) {
            chart.coordinate(rng.random_range(0..chart.dim()))
        } else {
            chart.constant(rng.random_range(-2.0..=2.0))
        };
    }
    let sub = |rng: &mut _| random_expression(chart, depth - 1, rng);
    match rng.random_range(0..10) {
        0 => sub(rng) + sub(rng),
        1 => sub(rng) - sub(rng),
        2 => sub(rng) * sub(rng),
        3 => {
            let numerator = sub(rng);
            numerator / (sub(rng).powi(2) + 1.0)
        }
        4 => -sub(rng),
        // shallow base keeps nested powers from reaching degrees whose
        // oscillation outruns finite-difference oracles
        5 => random_expression(chart, (depth - 1).min(1), rng).powi(rng.random_range(2..=3)),
        6 => sub(rng).sin(),
        7 => sub(rng).cos(),
        8 => sub(rng).sin().exp(),
        _ => (sub(rng).powi(2) + 1.0).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn generated_expressions_evaluate() {
        let chart = Chart::new("t", &["x", "y"]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let e = random_expression(&chart, 4, &mut rng);
            assert!(e.eval(&[0.3, -1.1]).unwrap().is_finite(), "{e}");
            let p = random_polynomial(&chart, 3, &mut rng);
            assert!(p.eval_jet2(&[1.0, 2.0]).is_ok());
            assert!(random_exp_linear(&chart, &mut rng).eval(&[0.0, 0.0]).unwrap() > 0.0);
        }
    }
}
