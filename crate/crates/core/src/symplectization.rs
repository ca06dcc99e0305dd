//! The symplectic cone over a contact chart.
//!
//! The cone chart appends a radial coordinate `r > 0` to the base chart and
//! carries `Ω = d(r² η)` and the Liouville field `Ψ = r ∂_r`. A contact field
//! `X` with `£_X η = a η` lifts to `X − (a/2) Ψ`, which preserves `Ω` and has
//! Hamiltonian `r² η(X)`.

use nalgebra::DMatrix;

use crate::chart::{ChartRef, CoordRange};
use crate::check::{max_abs, sampled_check, CheckConfig, CheckResult, ResidualMax};
use crate::contact::{summarize_ranks, numerical_rank, ContactSystem, RankSummary};
use crate::error::{Error, Result};
use crate::expr::{Jet2, ScalarExpr};
use crate::forms::{share, DifferentialForm, VectorField};
use crate::pointwise::{FieldJet, FieldSource};

/// Name of the radial coordinate on cone charts.
pub const RADIUS: &str = "r";

/// Default sampling interval for the radius, drawn log-uniformly.
pub const RADIUS_RANGE: CoordRange = CoordRange::log(0.1, 10.0);

#[derive(Clone)]
pub struct ConeSystem {
    base: ContactSystem,
    chart: ChartRef,
    lifted_eta: DifferentialForm,
    omega: DifferentialForm,
    liouville: VectorField,
}

pub fn build_cone(base: &ContactSystem) -> Result<ConeSystem> {
    build_cone_with_range(base, RADIUS_RANGE)
}

pub fn build_cone_with_range(base: &ContactSystem, radius: CoordRange) -> Result<ConeSystem> {
    if base.chart().index_of(RADIUS).is_some() {
        return Err(Error::InvalidParameter(format!(
            "base chart already has a coordinate named `{RADIUS}`"
        )));
    }
    let chart = base
        .chart()
        .extended(format!("cone({})", base.chart().name()), &[(RADIUS, radius)])
        .with_domain(RADIUS)?;
    let chart = share(chart);
    let r = chart.coordinate(base.dim());
    let lifted_eta = base.eta().extend_to(&chart).scale(&r.powi(2));
    let omega = lifted_eta.exterior_derivative()?;
    let mut components = vec![chart.constant(0.0); chart.dim()];
    components[base.dim()] = r;
    let liouville = VectorField::new(&chart, components);
    Ok(ConeSystem {
        base: base.clone(),
        chart,
        lifted_eta,
        omega,
        liouville,
    })
}

impl ConeSystem {
    pub fn base(&self) -> &ContactSystem {
        &self.base
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    /// `r² η` on the cone chart.
    pub fn potential(&self) -> &DifferentialForm {
        &self.lifted_eta
    }

    pub fn omega(&self) -> &DifferentialForm {
        &self.omega
    }

    pub fn liouville(&self) -> &VectorField {
        &self.liouville
    }

    pub fn radius_index(&self) -> usize {
        self.base.dim()
    }

    pub fn radius(&self) -> ScalarExpr {
        self.chart.coordinate(self.radius_index())
    }

    /// Lifts a base expression to the cone chart.
    pub fn lift_function(&self, f: &ScalarExpr) -> ScalarExpr {
        f.extend_to(self.chart.coords())
    }

    /// Largest coefficient of `dΩ` over the samples.
    pub fn closure_check(&self, config: &CheckConfig) -> Result<CheckResult> {
        let d_omega = self.omega.exterior_derivative()?;
        let points = config.points(&self.chart)?;
        Ok(sampled_check("closure", &points, config.tol("closure"), |p| {
            d_omega.max_abs(p)
        }))
    }

    /// Scaled determinant of the `Ω` matrix, reported like the contact check.
    pub fn nondegeneracy_check(&self, config: &CheckConfig) -> Result<CheckResult> {
        let points = config.points(&self.chart)?;
        let dim = self.chart.dim();
        Ok(sampled_check(
            "nondegenerate",
            &points,
            1.0 / config.tol("contact"),
            |p| {
                let jet = self.omega.jet_at(p)?;
                let m = DMatrix::from_fn(dim, dim, |i, j| jet.value(&[i, j]));
                let det = m.determinant().abs();
                let scale: f64 = m.row_iter().map(|r| r.norm()).product();
                Ok(if scale == 0.0 { f64::INFINITY } else { scale / det })
            },
        ))
    }

    /// `£_Ψ Ω = 2 Ω`
    pub fn homogeneity_check(&self, config: &CheckConfig) -> Result<CheckResult> {
        let points = config.points(&self.chart)?;
        Ok(sampled_check(
            "homogeneity",
            &points,
            config.tol("homogeneity"),
            |p| {
                let omega = self.omega.jet_at(p)?;
                let psi = self.liouville.jet_at(p)?;
                let lie = omega.lie_derivative(&psi);
                Ok(max_abs(lie.iter().map(|(t, v)| v - 2.0 * omega.value(t))))
            },
        ))
    }

    /// `Ω` built from `c η` at `(x, r/√c)` agrees with `Ω` at `(x, r)` once
    /// the `dr` components are rescaled by the chain rule.
    pub fn scale_covariance_check(&self, factor: f64, config: &CheckConfig) -> Result<CheckResult> {
        if !(factor > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        let scaled = build_cone(&self.base.rescaled(&self.base.chart().constant(factor))?)?;
        let root = factor.sqrt();
        let ri = self.radius_index();
        let points = config.points(&self.chart)?;
        Ok(sampled_check(
            format!("scale_covariance[{factor}]"),
            &points,
            config.tol("scale_covariance"),
            |p| {
                let mut q = p.to_vec();
                q[ri] /= root;
                let original = self.omega.eval(p)?;
                let other = scaled.omega.eval(&q)?;
                let mut worst: f64 = 0.0;
                for tuple in original.keys().chain(other.keys()) {
                    let a = original.get(tuple).copied().unwrap_or(0.0);
                    let mut b = other.get(tuple).copied().unwrap_or(0.0);
                    if tuple.contains(&ri) {
                        b /= root;
                    }
                    worst = worst.max((a - b).abs());
                }
                Ok(worst)
            },
        ))
    }

    /// `X − (a_X/2) Ψ` for a base contact field `X` with `η(X) = h`.
    pub fn lift<F: FieldSource>(&self, field: F, hamiltonian: ScalarExpr) -> Result<LiftedField<'_, F>> {
        if field.dim() != self.base.dim() {
            return Err(Error::PointDimension {
                expected: self.base.dim(),
                got: field.dim(),
            });
        }
        Ok(LiftedField {
            cone: self,
            field,
            hamiltonian,
        })
    }

    /// Lift of the Hamiltonian field of `h`.
    pub fn lift_hamiltonian(&self, h: &ScalarExpr) -> LiftedField<'_, crate::contact::HamiltonianField<'_>> {
        LiftedField {
            cone: self,
            field: self.base.hamiltonian_field(h.clone()),
            hamiltonian: h.clone(),
        }
    }

    /// Checks that every lifted field commutes with every other one and
    /// records the rank of the lifted family.
    pub fn commuting_lift_check<F: FieldSource>(
        &self,
        family: &[(F, ScalarExpr)],
        config: &CheckConfig,
    ) -> Result<(CheckResult, RankSummary)> {
        let base_points = config.points(self.base.chart())?;
        let tol = config.tol("lift");
        for p in &base_points {
            let jets = family
                .iter()
                .map(|(f, _)| f.jet_at(p))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..jets.len() {
                for j in i + 1..jets.len() {
                    let b = max_abs(jets[i].bracket(&jets[j]));
                    if !(b <= tol) {
                        return Err(Error::Precondition(format!(
                            "base fields {i} and {j} do not commute at {p:?} (|[X, Y]| = {b:e})"
                        )));
                    }
                }
            }
        }

        let lifts = family
            .iter()
            .map(|(f, h)| self.lift(f, h.clone()))
            .collect::<Result<Vec<_>>>()?;
        let points = config.points(&self.chart)?;
        let mut acc = ResidualMax::new();
        let mut ranks = Vec::with_capacity(points.len());
        for p in &points {
            match lifts.iter().map(|l| l.jet_at(p)).collect::<Result<Vec<_>>>() {
                Ok(jets) => {
                    let mut worst: f64 = 0.0;
                    for i in 0..jets.len() {
                        for j in i + 1..jets.len() {
                            worst = worst.max(max_abs(jets[i].bracket(&jets[j])));
                        }
                    }
                    acc.record(p, Ok(worst));
                    let columns: Vec<Vec<f64>> = jets.into_iter().map(|j| j.value).collect();
                    ranks.push(numerical_rank(&columns, config.tol("rank")));
                }
                Err(e) => {
                    acc.record(p, Err(e));
                    ranks.push(0);
                }
            }
        }
        Ok((
            acc.finish("commuting_lifts", tol),
            summarize_ranks(&ranks, family.len()),
        ))
    }
}

/// Pointwise lift of a base field to the cone.
pub struct LiftedField<'a, F> {
    cone: &'a ConeSystem,
    field: F,
    hamiltonian: ScalarExpr,
}

impl<F: FieldSource> LiftedField<'_, F> {
    /// `a = R(h)` and its gradient at a base point.
    fn conformal_factor(&self, base_point: &[f64]) -> Result<(f64, Vec<f64>)> {
        let frame = self.cone.base.frame_at(base_point)?;
        let dim = base_point.len();
        let reeb = frame.solve(&Jet2::constant(1.0, dim))?.field;
        let h = self.hamiltonian.eval_jet2(base_point)?;
        let a = reeb.apply(&h.gradient);
        let grad = (0..dim)
            .map(|j| {
                (0..dim)
                    .map(|i| reeb.partial(i, j) * h.gradient[i] + reeb.value[i] * h.second(i, j))
                    .sum()
            })
            .collect();
        Ok((a, grad))
    }

    pub fn hamiltonian(&self) -> &ScalarExpr {
        &self.hamiltonian
    }

    /// `r² h` on the cone chart.
    pub fn cone_hamiltonian(&self) -> ScalarExpr {
        &self.cone.radius().powi(2) * &self.cone.lift_function(&self.hamiltonian)
    }

    /// Residuals of `η(X) = h` and `£_X η = R(h) η` for the base field.
    pub fn precondition_check(&self, config: &CheckConfig) -> Result<CheckResult> {
        let base = &self.cone.base;
        let points = config.points(base.chart())?;
        Ok(sampled_check(
            "transformation",
            &points,
            config.tol("transformation"),
            |p| {
                let frame = base.frame_at(p)?;
                let x = self.field.jet_at(p)?;
                let h = self.hamiltonian.eval(p)?;
                let (a, _) = self.conformal_factor(p)?;
                let lie = frame.eta_jet().lie_derivative(&x);
                let contact = max_abs(lie.iter().map(|(t, v)| v - a * frame.eta_value(t[0])));
                Ok(contact.max((frame.eta_of(&x.value) - h).abs()))
            },
        ))
    }

    /// `£_{X̂} Ω = 0` and `[X̂, Ψ] = 0`.
    pub fn invariance_check(&self, config: &CheckConfig) -> Result<CheckResult> {
        let points = config.points(&self.cone.chart)?;
        Ok(sampled_check("lift", &points, config.tol("lift"), |p| {
            let x = self.jet_at(p)?;
            let omega = self.cone.omega.jet_at(p)?;
            let lie = max_abs(omega.lie_derivative(&x).into_values());
            let psi = self.cone.liouville.jet_at(p)?;
            Ok(lie.max(max_abs(x.bracket(&psi))))
        }))
    }

    /// `X̂⌟Ω = −d(r² h)`
    pub fn cone_hamiltonian_check(&self, config: &CheckConfig) -> Result<CheckResult> {
        let potential = self.cone_hamiltonian();
        let points = config.points(&self.cone.chart)?;
        Ok(sampled_check(
            "cone_hamiltonian",
            &points,
            config.tol("cone_hamiltonian"),
            |p| {
                let x = self.jet_at(p)?;
                let contraction = self.cone.omega.jet_at(p)?.contract(&x.value);
                let grad = potential.eval_jet2(p)?.gradient;
                Ok(max_abs(contraction.iter().map(|(t, v)| v + grad[t[0]])))
            },
        ))
    }

    /// Componentwise distance to a closed-form field on the cone chart.
    pub fn matches(&self, expected: &VectorField, config: &CheckConfig) -> Result<CheckResult> {
        self.cone.chart.ensure_same(expected.chart())?;
        let points = config.points(&self.cone.chart)?;
        Ok(sampled_check("lift_value", &points, config.tol("expected"), |p| {
            let got = self.jet_at(p)?.value;
            let want = expected.eval(p)?;
            Ok(max_abs(got.iter().zip(&want).map(|(a, b)| a - b)))
        }))
    }
}

impl<F: FieldSource> FieldSource for LiftedField<'_, F> {
    fn dim(&self) -> usize {
        self.cone.chart.dim()
    }

    fn jet_at(&self, point: &[f64]) -> Result<FieldJet> {
        let dim = self.dim();
        if point.len() != dim {
            return Err(Error::PointDimension {
                expected: dim,
                got: point.len(),
            });
        }
        let base_dim = dim - 1;
        let base_point = &point[..base_dim];
        let r = point[base_dim];
        let x = self.field.jet_at(base_point)?;
        let (a, grad_a) = self.conformal_factor(base_point)?;
        let mut jet = FieldJet::zero(dim);
        for i in 0..base_dim {
            jet.value[i] = x.value[i];
            for j in 0..base_dim {
                jet.jacobian[i * dim + j] = x.partial(i, j);
            }
        }
        // radial component −(a/2) r
        jet.value[base_dim] = -0.5 * a * r;
        for j in 0..base_dim {
            jet.jacobian[base_dim * dim + j] = -0.5 * r * grad_a[j];
        }
        jet.jacobian[base_dim * dim + base_dim] = -0.5 * a;
        Ok(jet)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;

    fn darboux_cone() -> ConeSystem {
        let chart = share(Chart::new("R3", &["x", "y", "z"]));
        build_cone(&ContactSystem::parse(&chart, "dz - y*dx").unwrap()).unwrap()
    }

    #[test]
    fn omega_on_the_darboux_cone() {
        let cone = darboux_cone();
        let expected = DifferentialForm::parse_one_form(cone.chart(), "r^2*(dz - y*dx)")
            .unwrap()
            .exterior_derivative()
            .unwrap();
        let cfg = CheckConfig::default().with_samples(32);
        for p in cfg.points(cone.chart()).unwrap() {
            let diff = cone.omega().sub(&expected).unwrap();
            assert!(diff.max_abs(&p).unwrap() < 1e-12);
        }
        assert!(cone.closure_check(&cfg).unwrap().passed);
        assert!(cone.nondegeneracy_check(&cfg).unwrap().passed);
        assert!(cone.homogeneity_check(&cfg).unwrap().passed);
        for c in [2.0, 5.0] {
            let r = cone.scale_covariance_check(c, &cfg).unwrap();
            assert!(r.passed, "{c}: {}", r.max_residual);
        }
    }

    #[test]
    fn lifts_of_the_darboux_pair() {
        let cone = darboux_cone();
        let cfg = CheckConfig::default().with_samples(32);
        let base = cone.base();
        let h = base.parse_function("-y").unwrap();
        let f = base.parse_function("z").unwrap();
        let lift_h = cone.lift_hamiltonian(&h);
        let lift_f = cone.lift_hamiltonian(&f);
        let want_h = VectorField::parse(cone.chart(), &["1", "0", "0", "0"]).unwrap();
        let want_f = VectorField::parse(cone.chart(), &["0", "y", "z", "-r/2"]).unwrap();
        assert!(lift_h.matches(&want_h, &cfg).unwrap().passed);
        assert!(lift_f.matches(&want_f, &cfg).unwrap().passed);
        for lift in [&lift_h, &lift_f] {
            assert!(lift.precondition_check(&cfg).unwrap().passed);
            assert!(lift.invariance_check(&cfg).unwrap().passed);
            assert!(lift.cone_hamiltonian_check(&cfg).unwrap().passed);
        }
        let p = [0.5, 2.0, 3.0, 1.5];
        assert_eq!(lift_h.cone_hamiltonian().eval(&p).unwrap(), -1.5 * 1.5 * 2.0);
        assert_eq!(lift_f.cone_hamiltonian().eval(&p).unwrap(), 1.5 * 1.5 * 3.0);

        let family = vec![
            (base.hamiltonian_field(h.clone()), h.clone()),
            (base.hamiltonian_field(f.clone()), f.clone()),
        ];
        let (check, rank) = cone.commuting_lift_check(&family, &cfg).unwrap();
        assert!(check.passed);
        assert_eq!(rank.max_rank, 2);
    }

    #[test]
    fn reeb_lift_is_unchanged_and_has_potential_r_squared() {
        let cone = darboux_cone();
        let cfg = CheckConfig::default().with_samples(16);
        let one = cone.base().chart().constant(1.0);
        let lift = cone.lift_hamiltonian(&one);
        let want = VectorField::parse(cone.chart(), &["0", "0", "1", "0"]).unwrap();
        assert!(lift.matches(&want, &cfg).unwrap().passed);
        assert!(lift.cone_hamiltonian_check(&cfg).unwrap().passed);
        assert_eq!(lift.cone_hamiltonian().eval(&[0.0, 0.0, 0.0, 3.0]).unwrap(), 9.0);
    }

    #[test]
    fn non_contact_field_fails_the_precondition() {
        let cone = darboux_cone();
        let cfg = CheckConfig::default().with_samples(16);
        let chart = cone.base().chart().clone();
        let dy = VectorField::basis(&chart, 1);
        let lift = cone.lift(&dy, chart.constant(0.0)).unwrap();
        assert!(!lift.precondition_check(&cfg).unwrap().passed);
    }

    #[test]
    fn noncommuting_family_is_rejected() {
        let cone = darboux_cone();
        let cfg = CheckConfig::default().with_samples(8);
        let base = cone.base();
        let h = base.parse_function("z").unwrap();
        let g = base.parse_function("x").unwrap();
        let family = vec![
            (base.hamiltonian_field(h.clone()), h),
            (base.hamiltonian_field(g.clone()), g),
        ];
        assert!(matches!(
            cone.commuting_lift_check(&family, &cfg),
            Err(Error::Precondition(_))
        ));
    }
}
