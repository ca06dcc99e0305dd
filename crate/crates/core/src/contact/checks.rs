//! Sampled predicates on contact systems.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{ContactSystem, HamiltonianJet, PointFrame};
use crate::check::{max_abs, sampled_check, CheckConfig, CheckResult, ResidualMax};
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::forms::DifferentialForm;

/// Passes iff the scaled contact volume stays above the `contact` threshold.
///
/// The residual is the reciprocal of [`ContactSystem::contact_margin`], so a
/// degenerate point reports an infinite residual and the reported tolerance
/// is the reciprocal of the threshold.
pub fn is_contact_form(sys: &ContactSystem, config: &CheckConfig) -> Result<CheckResult> {
    let points = config.points(sys.chart())?;
    Ok(sampled_check(
        "contact",
        &points,
        1.0 / config.tol("contact"),
        |p| Ok(1.0 / sys.contact_margin(p)?),
    ))
}

/// `|η(R) − 1|` and `|R⌟dη|` from the assembled form values.
pub fn reeb_residual(frame: &PointFrame) -> f64 {
    let reeb = frame.reeb_value();
    let normalization = (frame.eta_of(&reeb) - 1.0).abs();
    normalization.max(max_abs(frame.contract_deta(&reeb)))
}

pub fn reeb_contract(sys: &ContactSystem, config: &CheckConfig) -> Result<CheckResult> {
    let points = config.points(sys.chart())?;
    Ok(sampled_check("reeb", &points, config.tol("reeb"), |p| {
        Ok(reeb_residual(&sys.frame_at(p)?))
    }))
}

/// Residuals of `η(X_h) = h` and of `£_{X_h}η = R(h) η` at one point.
pub fn hamiltonian_residuals(frame: &PointFrame, h: &ScalarExpr) -> Result<(f64, f64)> {
    let h_jet = h.eval_jet2(frame.point())?;
    let xh = frame.solve(&h_jet)?;
    let value = (frame.eta_of(&xh.field.value) - h_jet.value).abs();
    let reeb = frame.reeb_value();
    let rh: f64 = reeb.iter().zip(&h_jet.gradient).map(|(r, g)| r * g).sum();
    let lie = frame.eta_jet().lie_derivative(&xh.field);
    let transformation = max_abs(
        lie.iter()
            .map(|(tuple, v)| v - rh * frame.eta_value(tuple[0])),
    );
    Ok((value, transformation))
}

/// `η(X_h) = h` (tolerance `hamiltonian`) and `£_{X_h}η = R(h)η`
/// (tolerance `transformation`).
pub fn hamiltonian_contract(
    sys: &ContactSystem,
    h: &ScalarExpr,
    config: &CheckConfig,
) -> Result<[CheckResult; 2]> {
    let points = config.points(sys.chart())?;
    let mut value = ResidualMax::new();
    let mut transformation = ResidualMax::new();
    for p in &points {
        match sys.frame_at(p).and_then(|f| hamiltonian_residuals(&f, h)) {
            Ok((a, b)) => {
                value.record(p, Ok(a));
                transformation.record(p, Ok(b));
            }
            Err(e) => {
                value.record(p, Err(e.clone()));
                transformation.record(p, Err(e));
            }
        }
    }
    Ok([
        value.finish("hamiltonian", config.tol("hamiltonian")),
        transformation.finish("transformation", config.tol("transformation")),
    ])
}

/// `R(h)` at one point, from the Reeb field and the gradient of `h`.
pub fn reeb_derivative_at(sys: &ContactSystem, h: &ScalarExpr, point: &[f64]) -> Result<f64> {
    let reeb = sys.reeb_at(point)?;
    let grad = h.eval_jet2(point)?.gradient;
    Ok(reeb.iter().zip(&grad).map(|(r, g)| r * g).sum())
}

/// `h` is invariant under the Reeb flow of the system's own form.
pub fn is_good(sys: &ContactSystem, h: &ScalarExpr, config: &CheckConfig) -> Result<CheckResult> {
    let points = config.points(sys.chart())?;
    Ok(sampled_check("good", &points, config.tol("good"), |p| {
        reeb_derivative_at(sys, h, p)
    }))
}

/// `X_h(f)` at one point.
pub fn flow_derivative_at(
    sys: &ContactSystem,
    h: &ScalarExpr,
    f: &ScalarExpr,
    point: &[f64],
) -> Result<f64> {
    let xh = sys.hamiltonian_field(h.clone()).value_at(point)?;
    let grad = f.eval_jet2(point)?.gradient;
    Ok(xh.iter().zip(&grad).map(|(x, g)| x * g).sum())
}

pub fn is_first_integral(
    sys: &ContactSystem,
    h: &ScalarExpr,
    f: &ScalarExpr,
    config: &CheckConfig,
) -> Result<CheckResult> {
    let points = config.points(sys.chart())?;
    Ok(sampled_check(
        "first_integral",
        &points,
        config.tol("first_integral"),
        |p| flow_derivative_at(sys, h, f, p),
    ))
}

/// Pieces of the flow identity `X_h f = R(h) f + {h, f}` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowTerms {
    pub flow_derivative: f64,
    pub reeb_derivative: f64,
    pub f: f64,
    pub bracket: f64,
}

impl FlowTerms {
    pub fn residual(&self) -> f64 {
        self.flow_derivative - self.reeb_derivative * self.f - self.bracket
    }
}

/// Evaluates both sides of the flow identity with independent routes: the
/// left side from `X_h` and `∇f`, `R(h)` from the Reeb field, the bracket
/// from the commutator of the two Hamiltonian fields.
pub fn flow_terms_at(frame: &PointFrame, h: &ScalarExpr, f: &ScalarExpr) -> Result<FlowTerms> {
    let p = frame.point();
    let h_jet = h.eval_jet2(p)?;
    let f_jet = f.eval_jet2(p)?;
    let xh = frame.solve(&h_jet)?;
    let xf = frame.solve(&f_jet)?;
    let reeb = frame.reeb_value();
    Ok(FlowTerms {
        flow_derivative: xh.field.apply(&f_jet.gradient),
        reeb_derivative: reeb.iter().zip(&h_jet.gradient).map(|(r, g)| r * g).sum(),
        f: f_jet.value,
        bracket: frame.eta_of(&xh.field.bracket(&xf.field)),
    })
}

pub fn verify_flow_identity(
    sys: &ContactSystem,
    h: &ScalarExpr,
    f: &ScalarExpr,
    config: &CheckConfig,
) -> Result<CheckResult> {
    let points = config.points(sys.chart())?;
    Ok(sampled_check(
        "flow_identity",
        &points,
        config.tol("flow_identity"),
        |p| Ok(flow_terms_at(&sys.frame_at(p)?, h, f)?.residual()),
    ))
}

/// `dη(X_h, X_f)` at a point, with the residual of
/// `dη(X_h, X_f) = X_h f − X_f h − {h, f}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsotropyDefect {
    pub value: f64,
    pub identity_residual: f64,
}

pub fn isotropy_defect(
    sys: &ContactSystem,
    h: &ScalarExpr,
    f: &ScalarExpr,
    point: &[f64],
) -> Result<IsotropyDefect> {
    let frame = sys.frame_at(point)?;
    let h_jet = h.eval_jet2(point)?;
    let f_jet = f.eval_jet2(point)?;
    let xh = frame.solve(&h_jet)?;
    let xf = frame.solve(&f_jet)?;
    let value = frame.deta_of(&xh.field.value, &xf.field.value);
    let bracket = frame.eta_of(&xh.field.bracket(&xf.field));
    let rhs = xh.field.apply(&f_jet.gradient) - xf.field.apply(&h_jet.gradient) - bracket;
    Ok(IsotropyDefect {
        value,
        identity_residual: (value - rhs).abs(),
    })
}

/// Sampled `|{f, g} + {g, f}|`.
pub fn bracket_antisymmetry(
    sys: &ContactSystem,
    f: &ScalarExpr,
    g: &ScalarExpr,
    config: &CheckConfig,
) -> Result<CheckResult> {
    let points = config.points(sys.chart())?;
    Ok(sampled_check(
        "antisymmetry",
        &points,
        config.tol("antisymmetry"),
        |p| Ok(sys.jacobi_bracket_at(f, g, p)? + sys.jacobi_bracket_at(g, f, p)?),
    ))
}

fn solve_all(frame: &PointFrame, fns: &[ScalarExpr]) -> Result<Vec<HamiltonianJet>> {
    fns.iter()
        .map(|f| frame.solve(&f.eval_jet2(frame.point())?))
        .collect()
}

/// Pairwise `|{f_i, f_j}|` checks, one row per function.
pub fn involution_table(
    sys: &ContactSystem,
    fns: &[ScalarExpr],
    config: &CheckConfig,
) -> Result<Vec<Vec<CheckResult>>> {
    if fns.len() < 2 {
        return Err(Error::Precondition(
            "an involution table needs at least two functions".into(),
        ));
    }
    let k = fns.len();
    let points = config.points(sys.chart())?;
    let mut acc = vec![vec![ResidualMax::new(); k]; k];
    for p in &points {
        match sys.frame_at(p).and_then(|frame| {
            let jets = solve_all(&frame, fns)?;
            Ok((frame, jets))
        }) {
            Ok((frame, jets)) => {
                for i in 0..k {
                    for j in 0..k {
                        let b = frame.eta_of(&jets[i].field.bracket(&jets[j].field));
                        acc[i][j].record(p, Ok(b));
                    }
                }
            }
            Err(e) => {
                for row in &mut acc {
                    for cell in row.iter_mut() {
                        cell.record(p, Err(e.clone()));
                    }
                }
            }
        }
    }
    let tol = config.tol("involution");
    Ok(acc
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .enumerate()
                .map(|(j, cell)| cell.finish(format!("involution[{i},{j}]"), tol))
                .collect()
        })
        .collect())
}

/// Observed rank statistics of a family of Hamiltonian fields.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankSummary {
    pub max_rank: usize,
    /// Fraction of samples attaining `max_rank`.
    pub fraction: f64,
    pub samples: usize,
    /// `histogram[r]` = number of samples with rank `r`.
    pub histogram: Vec<usize>,
}

/// Numerical rank of the columns `vectors` (all of the same length): the
/// number of singular values above `relative · max(1, σ_max)`.
pub fn numerical_rank(vectors: &[Vec<f64>], relative: f64) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let rows = vectors[0].len();
    let m = DMatrix::from_fn(rows, vectors.len(), |r, c| vectors[c][r]);
    let sv = m.svd(false, false).singular_values;
    let top = sv.iter().copied().fold(0.0, f64::max);
    let cutoff = relative * top.max(1.0);
    sv.iter().filter(|s| **s > cutoff).count()
}

pub fn independence_rank(
    sys: &ContactSystem,
    fns: &[ScalarExpr],
    config: &CheckConfig,
) -> Result<RankSummary> {
    let points = config.points(sys.chart())?;
    let mut ranks = Vec::with_capacity(points.len());
    for p in &points {
        // a point where the system cannot be solved contributes rank 0
        let rank = sys
            .frame_at(p)
            .and_then(|frame| solve_all(&frame, fns))
            .map(|jets| {
                let columns: Vec<Vec<f64>> = jets.into_iter().map(|j| j.field.value).collect();
                numerical_rank(&columns, config.tol("rank"))
            })
            .unwrap_or(0);
        ranks.push(rank);
    }
    Ok(summarize_ranks(&ranks, fns.len()))
}

pub fn summarize_ranks(ranks: &[usize], family_size: usize) -> RankSummary {
    let mut histogram = vec![0; family_size + 1];
    for &r in ranks {
        histogram[r] += 1;
    }
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    let attained = histogram[max_rank];
    RankSummary {
        max_rank,
        fraction: if ranks.is_empty() {
            0.0
        } else {
            attained as f64 / ranks.len() as f64
        },
        samples: ranks.len(),
        histogram,
    }
}

/// Integrability verdicts for `(h, f_1, …, f_n)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub completely_integrable_witnessed: bool,
    pub good: bool,
    pub completely_good: bool,
    pub reeb_type: bool,
    pub involution: bool,
    pub first_integrals: bool,
    pub rank: RankSummary,
    /// Verdict of the equivalent test `£_{X_{f_i}} η = 0` for all `i`.
    pub strict_contact_fields: bool,
    /// Largest residual behind each verdict.
    pub residuals: ClassificationResiduals,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassificationResiduals {
    pub involution: f64,
    pub first_integral: f64,
    pub good_hamiltonian: f64,
    pub good_integrals: f64,
    pub strict_contact: f64,
}

/// Classifies the system's Hamiltonian and integrals.
///
/// Involution, goodness and first-integral verdicts share the `involution`
/// tolerance so that the implication from Reeb type to complete goodness
/// (which passes through `R(f) = {1, f}`) cannot be broken by mismatched
/// thresholds.
pub fn classify_system(sys: &ContactSystem, config: &CheckConfig) -> Result<Classification> {
    let h = sys
        .hamiltonian()
        .ok_or_else(|| Error::Precondition("classification needs a Hamiltonian".into()))?;
    if sys.integrals().len() != sys.n() {
        return Err(Error::Precondition(format!(
            "classification needs exactly {} integrals, got {}",
            sys.n(),
            sys.integrals().len()
        )));
    }
    let mut fns = vec![h.clone()];
    fns.extend(sys.integrals().iter().cloned());
    let k = fns.len();
    let dim = sys.dim();

    let points = config.points(sys.chart())?;
    let mut involution = ResidualMax::new();
    let mut first_integral = ResidualMax::new();
    let mut good_h = ResidualMax::new();
    let mut good_f = ResidualMax::new();
    let mut strict = ResidualMax::new();
    let mut ranks = Vec::with_capacity(points.len());

    for p in &points {
        let solved = sys.frame_at(p).and_then(|frame| {
            let grads = fns
                .iter()
                .map(|f| f.eval_jet2(p))
                .collect::<Result<Vec<_>>>()?;
            let jets = grads
                .iter()
                .map(|g| frame.solve(g))
                .collect::<Result<Vec<_>>>()?;
            Ok((frame, grads, jets))
        });
        let (frame, grads, jets) = match solved {
            Ok(v) => v,
            Err(e) => {
                for acc in [&mut involution, &mut first_integral, &mut good_h, &mut good_f, &mut strict] {
                    acc.record(p, Err(e.clone()));
                }
                ranks.push(0);
                continue;
            }
        };
        let mut worst_bracket: f64 = 0.0;
        for i in 0..k {
            for j in i + 1..k {
                let b = frame.eta_of(&jets[i].field.bracket(&jets[j].field));
                worst_bracket = worst_bracket.max(b.abs());
            }
        }
        involution.record(p, Ok(worst_bracket));

        let xh = &jets[0].field;
        first_integral.record(
            p,
            Ok(max_abs(grads[1..].iter().map(|g| xh.apply(&g.gradient)))),
        );

        let reeb = frame.reeb_value();
        let reeb_of = |g: &[f64]| -> f64 { reeb.iter().zip(g).map(|(r, x)| r * x).sum() };
        good_h.record(p, Ok(reeb_of(&grads[0].gradient)));
        good_f.record(p, Ok(max_abs(grads[1..].iter().map(|g| reeb_of(&g.gradient)))));

        let eta_jet = frame.eta_jet();
        let mut worst_lie: f64 = 0.0;
        for jet in &jets {
            let lie = eta_jet.lie_derivative(&jet.field);
            worst_lie = worst_lie.max(max_abs(lie.values().copied()));
        }
        strict.record(p, Ok(worst_lie));

        let columns: Vec<Vec<f64>> = jets.iter().map(|j| j.field.value.clone()).collect();
        debug_assert!(columns.iter().all(|c| c.len() == dim));
        ranks.push(numerical_rank(&columns, config.tol("rank")));
    }

    let tol = config.tol("involution");
    let rank = summarize_ranks(&ranks, k);
    let independent = rank.max_rank == k && rank.fraction >= config.dense_fraction;
    let in_involution = involution.max() <= tol;
    let integrals_ok = first_integral.max() <= tol;
    let good = good_h.max() <= tol;
    let completely_good = good && good_f.max() <= tol;
    let completely_integrable = in_involution && integrals_ok && independent;
    let has_unit = fns.iter().any(|f| f.constant_value() == Some(1.0));

    Ok(Classification {
        completely_integrable_witnessed: completely_integrable,
        good,
        completely_good,
        reeb_type: completely_integrable && has_unit,
        involution: in_involution,
        first_integrals: integrals_ok,
        strict_contact_fields: strict.max() <= tol,
        residuals: ClassificationResiduals {
            involution: involution.max(),
            first_integral: first_integral.max(),
            good_hamiltonian: good_h.max(),
            good_integrals: good_f.max(),
            strict_contact: strict.max(),
        },
        rank,
    })
}

/// Checks `{g, h}_{F η} = F {g/F, h/F}_η` for a positive factor `F`.
pub fn conformal_bracket_law(
    sys: &ContactSystem,
    factor: &ScalarExpr,
    g: &ScalarExpr,
    h: &ScalarExpr,
    config: &CheckConfig,
) -> Result<CheckResult> {
    let points = config.points(sys.chart())?;
    for p in &points {
        let value = factor.eval(p)?;
        if !(value > 0.0) {
            return Err(Error::Precondition(format!(
                "conformal factor is {value} at {p:?}, expected a positive value"
            )));
        }
    }
    let rescaled = sys.rescaled(factor)?;
    let g_scaled = g / factor;
    let h_scaled = h / factor;
    Ok(sampled_check("conformal", &points, config.tol("conformal"), |p| {
        let left = rescaled.jacobi_bracket_at(g, h, p)?;
        let right = factor.eval(p)? * sys.jacobi_bracket_at(&g_scaled, &h_scaled, p)?;
        Ok(left - right)
    }))
}

/// Coordinate change `φ` with explicit inverse, both as expressions on the
/// same chart.
#[derive(Clone, Debug)]
pub struct CoordinateMap {
    pub forward: Vec<ScalarExpr>,
    pub inverse: Vec<ScalarExpr>,
}

impl CoordinateMap {
    pub fn parse<S: AsRef<str>>(sys: &ContactSystem, forward: &[S], inverse: &[S]) -> Result<Self> {
        let parse_all = |v: &[S]| -> Result<Vec<ScalarExpr>> {
            if v.len() != sys.dim() {
                return Err(Error::PointDimension {
                    expected: sys.dim(),
                    got: v.len(),
                });
            }
            v.iter().map(|s| sys.parse_function(s.as_ref())).collect()
        };
        Ok(Self {
            forward: parse_all(forward)?,
            inverse: parse_all(inverse)?,
        })
    }

    pub fn apply(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.forward.iter().map(|c| c.eval(point)).collect()
    }

    pub fn apply_inverse(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.inverse.iter().map(|c| c.eval(point)).collect()
    }
}

/// Result of moving a system along a coordinate change.
pub struct Transport {
    pub system: ContactSystem,
    /// `h ∘ φ⁻¹`
    pub hamiltonian: ScalarExpr,
    /// Compares `R(h)` at `p` with `R'(h')` at `φ(p)`.
    pub check: CheckResult,
}

/// Transports `(η, h)` to `((φ⁻¹)^*η, h∘φ⁻¹)` and checks that goodness is
/// carried along.
pub fn conjugacy_transport(
    sys: &ContactSystem,
    map: &CoordinateMap,
    h: &ScalarExpr,
    config: &CheckConfig,
) -> Result<Transport> {
    let dim = sys.dim();
    if map.forward.len() != dim || map.inverse.len() != dim {
        return Err(Error::PointDimension {
            expected: dim,
            got: map.forward.len().min(map.inverse.len()),
        });
    }
    let points = config.points(sys.chart())?;
    let inverse_tol = config.tol("inverse");
    for p in &points {
        let there_and_back = map.apply_inverse(&map.apply(p)?)?;
        let back_and_there = map.apply(&map.apply_inverse(p)?)?;
        let err = max_abs(
            there_and_back
                .iter()
                .zip(p)
                .chain(back_and_there.iter().zip(p))
                .map(|(a, b)| a - b),
        );
        if !(err <= inverse_tol) {
            return Err(Error::Precondition(format!(
                "coordinate map and inverse disagree by {err:e} at {p:?}"
            )));
        }
    }

    // ((φ⁻¹)^*η)_j = Σ_i (η_i ∘ φ⁻¹) ∂_j (φ⁻¹)^i
    let eta = sys.eta().one_form_coefficients();
    let pulled: Vec<ScalarExpr> = eta.iter().map(|c| c.substitute(&map.inverse)).collect();
    let coefficients = (0..dim)
        .map(|j| {
            let mut sum = sys.chart().constant(0.0);
            for (i, c) in pulled.iter().enumerate() {
                let d = map.inverse[i].partial(j);
                if !d.is_zero() {
                    sum = &sum + &(c * &d);
                }
            }
            sum
        })
        .collect();
    let transported = ContactSystem::new(DifferentialForm::one_form(sys.chart(), coefficients))?;
    let h_new = h.substitute(&map.inverse);

    let mut acc = ResidualMax::new();
    let mut worst_before: f64 = 0.0;
    let mut worst_after: f64 = 0.0;
    for p in &points {
        let residual = (|| {
            let before = reeb_derivative_at(sys, h, p)?;
            let after = reeb_derivative_at(&transported, &h_new, &map.apply(p)?)?;
            worst_before = worst_before.max(before.abs());
            worst_after = worst_after.max(after.abs());
            Ok(before - after)
        })();
        acc.record(p, residual);
    }
    let good_tol = config.tol("good");
    let check = acc.finish("conjugacy", config.tol("conjugacy")).with_detail(format!(
        "good before: {}, good after: {}",
        worst_before <= good_tol,
        worst_after <= good_tol
    ));
    Ok(Transport {
        system: transported.with_hamiltonian(h_new.clone()),
        hamiltonian: h_new,
        check,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::forms::share;

    fn darboux3() -> ContactSystem {
        let chart = share(Chart::new("R3", &["x", "y", "z"]));
        ContactSystem::parse(&chart, "dz - y*dx").unwrap()
    }

    fn cfg() -> CheckConfig {
        CheckConfig::default().with_samples(64)
    }

    #[test]
    fn goodness_examples() {
        let sys = darboux3();
        let f = |s: &str| sys.parse_function(s).unwrap();
        assert!(is_good(&sys, &f("-y"), &cfg()).unwrap().passed);
        let z = is_good(&sys, &f("z"), &cfg()).unwrap();
        assert!(!z.passed);
        assert!((z.max_residual - 1.0).abs() < 1e-14);
        assert!(is_good(&sys, &f("1"), &cfg()).unwrap().passed);
    }

    #[test]
    fn first_integral_examples() {
        let sys = darboux3();
        let f = |s: &str| sys.parse_function(s).unwrap();
        assert!(is_first_integral(&sys, &f("-y"), &f("z"), &cfg()).unwrap().passed);
        assert!(!is_first_integral(&sys, &f("z"), &f("-y"), &cfg()).unwrap().passed);
        assert!(is_first_integral(&sys, &f("x*z"), &f("5"), &cfg()).unwrap().passed);
    }

    #[test]
    fn flow_identity_examples() {
        let sys = darboux3();
        let f = |s: &str| sys.parse_function(s).unwrap();
        for (h, g) in [("-y", "z"), ("z", "-y"), ("x^2*z - y", "sin(x) + y*z")] {
            let r = verify_flow_identity(&sys, &f(h), &f(g), &cfg()).unwrap();
            assert!(r.passed, "{h}, {g}: {}", r.max_residual);
        }
    }

    #[test]
    fn isotropy_defect_example() {
        let sys = darboux3();
        let f = |s: &str| sys.parse_function(s).unwrap();
        let d = isotropy_defect(&sys, &f("-y"), &f("z"), &[1.0, 2.0, 3.0]).unwrap();
        assert!((d.value - 2.0).abs() < 1e-14);
        assert!(d.identity_residual < 1e-14);
        let d = isotropy_defect(&sys, &f("x*y"), &f("x*y"), &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn involution_and_rank_examples() {
        let sys = darboux3();
        let f = |s: &str| sys.parse_function(s).unwrap();
        let table = involution_table(&sys, &[f("-y"), f("z")], &cfg()).unwrap();
        assert!(table.iter().flatten().all(|c| c.passed));
        assert!(involution_table(&sys, &[f("z")], &cfg()).is_err());
        let rank = independence_rank(&sys, &[f("1")], &cfg()).unwrap();
        assert_eq!((rank.max_rank, rank.fraction), (1, 1.0));
    }

    #[test]
    fn classification_of_the_darboux_pair() {
        let sys = darboux3();
        let f = |s: &str| sys.parse_function(s).unwrap();
        let sys = sys.clone().with_hamiltonian(f("-y")).with_integrals(vec![f("z")]);
        let c = classify_system(&sys, &cfg()).unwrap();
        assert!(c.completely_integrable_witnessed);
        assert!(c.good);
        assert!(!c.completely_good);
        assert!(!c.reeb_type);
        assert_eq!(c.completely_good, c.strict_contact_fields);

        let dup = sys.clone().with_hamiltonian(f("1")).with_integrals(vec![f("1")]);
        let c = classify_system(&dup, &cfg()).unwrap();
        assert_eq!(c.rank.max_rank, 1);
        assert!(!c.completely_integrable_witnessed);
        assert!(!c.reeb_type);

        let wrong = sys.clone().with_integrals(vec![]);
        assert!(matches!(classify_system(&wrong, &cfg()), Err(Error::Precondition(_))));
    }

    #[test]
    fn conformal_law_examples() {
        let sys = darboux3();
        let f = |s: &str| sys.parse_function(s).unwrap();
        for factor in ["2", "exp(x)", "1"] {
            let r = conformal_bracket_law(&sys, &f(factor), &f("-y"), &f("z"), &cfg()).unwrap();
            assert!(r.passed, "{factor}: {}", r.max_residual);
        }
        let r = conformal_bracket_law(&sys, &f("exp(x - 0.5*z)"), &f("x*y^2"), &f("z + y"), &cfg()).unwrap();
        assert!(r.passed, "{}", r.max_residual);
        assert!(conformal_bracket_law(&sys, &f("x"), &f("y"), &f("z"), &cfg()).is_err());
    }

    #[test]
    fn conjugacy_examples() {
        let sys = darboux3();
        let h = sys.parse_function("-y").unwrap();
        let identity = CoordinateMap::parse(&sys, &["x", "y", "z"], &["x", "y", "z"]).unwrap();
        let t = conjugacy_transport(&sys, &identity, &h, &cfg()).unwrap();
        assert!(t.check.passed);
        let p = [0.3, 0.4, 0.5];
        assert_eq!(t.hamiltonian.eval(&p).unwrap(), h.eval(&p).unwrap());
        let a = t.system.eta().eval(&p).unwrap();
        assert_eq!(a, sys.eta().eval(&p).unwrap());

        let shift = CoordinateMap::parse(&sys, &["x", "y", "z + 1"], &["x", "y", "z - 1"]).unwrap();
        let t = conjugacy_transport(&sys, &shift, &h, &cfg()).unwrap();
        assert!(t.check.passed);
        assert_eq!(t.system.eta().eval(&p).unwrap(), sys.eta().eval(&p).unwrap());

        let scale = CoordinateMap::parse(&sys, &["x", "2*y", "2*z"], &["x", "y/2", "z/2"]).unwrap();
        let t = conjugacy_transport(&sys, &scale, &h, &cfg()).unwrap();
        assert!(t.check.passed, "{}", t.check.max_residual);
        assert!(t.check.detail.as_deref().unwrap().contains("good after: true"));

        let broken = CoordinateMap::parse(&sys, &["x", "2*y", "z"], &["x", "y", "z"]).unwrap();
        assert!(matches!(
            conjugacy_transport(&sys, &broken, &h, &cfg()),
            Err(Error::Precondition(_))
        ));
    }
}
