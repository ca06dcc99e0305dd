//! Contact forms, Reeb and Hamiltonian fields, Jacobi brackets.
//!
//! Everything pointwise goes through one bordered linear system. For a
//! function `h` the Hamiltonian field `X` and a multiplier `μ` solve
//!
//! ```text
//! X⌟dη + μ η = −dh        (dim equations)
//! η(X)       = h          (1 equation)
//! ```
//!
//! Contracting the first block with the Reeb field shows `μ = −R(h)`, so
//! the system is the usual contact Hamiltonian condition
//! `X⌟dη = R(h) η − dh`. The Reeb field is the solution for `h = 1`. The
//! matrix is invertible exactly where `η ∧ (dη)^n ≠ 0`, and its determinant
//! is the squared Pfaffian of the bordered `dη` block, which is the route
//! used for the contact volume on every chart size.
//!
//! Derivatives of the solution follow by differentiating the system once:
//! `S ∂_j u = ∂_j b − (∂_j S) u`, which needs second derivatives of `η` and
//! `h`, both available exactly from [`Jet2`].

mod checks;

pub use checks::*;

use nalgebra::{DMatrix, DVector, FullPivLU};

use crate::chart::ChartRef;
use crate::check::{CheckConfig, DEFAULT_SEED};
use crate::error::{Error, Result};
use crate::expr::{Jet2, ScalarExpr};
use crate::forms::DifferentialForm;
use crate::pointwise::{FieldJet, FieldSource, FormJet};

/// Samples used by the construction-time contact check.
pub const CONSTRUCTION_SAMPLES: usize = 32;

/// Relative pivot size below which the bordered system counts as singular.
pub const SINGULAR_PIVOT: f64 = 1e-12;

#[derive(Clone)]
pub struct ContactSystem {
    chart: ChartRef,
    eta: DifferentialForm,
    eta_coefficients: Vec<ScalarExpr>,
    deta: DifferentialForm,
    n: usize,
    hamiltonian: Option<ScalarExpr>,
    integrals: Vec<ScalarExpr>,
}

impl std::fmt::Debug for ContactSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ContactSystem")
            .field("chart", &self.chart.name())
            .field("eta", &self.eta)
            .field("hamiltonian", &self.hamiltonian)
            .field("integrals", &self.integrals)
            .finish()
    }
}

impl ContactSystem {
    /// Builds a system and rejects it unless the contact condition holds on
    /// a fixed batch of sample points.
    pub fn new(eta: DifferentialForm) -> Result<Self> {
        let system = Self::unchecked(eta)?;
        let config = CheckConfig::default()
            .with_samples(CONSTRUCTION_SAMPLES)
            .with_seed(DEFAULT_SEED);
        let result = is_contact_form(&system, &config)?;
        if !result.passed {
            return Err(Error::NotContact {
                witness: result.witness.unwrap_or_default(),
            });
        }
        Ok(system)
    }

    /// Builds a system checking only shapes (odd dimension, degree one).
    pub fn unchecked(eta: DifferentialForm) -> Result<Self> {
        let dim = eta.chart().dim();
        if dim.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "contact charts have odd dimension, got {dim}"
            )));
        }
        if eta.degree() != 1 {
            return Err(Error::Degree(format!(
                "a contact form has degree 1, got {}",
                eta.degree()
            )));
        }
        let deta = eta.exterior_derivative()?;
        Ok(Self {
            chart: eta.chart().clone(),
            eta_coefficients: eta.one_form_coefficients(),
            eta,
            deta,
            n: (dim - 1) / 2,
            hamiltonian: None,
            integrals: Vec::new(),
        })
    }

    /// Parses `η` in the `c0*dx + …` syntax.
    pub fn parse(chart: &ChartRef, eta: &str) -> Result<Self> {
        Self::new(DifferentialForm::parse_one_form(chart, eta)?)
    }

    pub fn with_hamiltonian(mut self, h: ScalarExpr) -> Self {
        self.hamiltonian = Some(h);
        self
    }

    pub fn with_integrals(mut self, integrals: Vec<ScalarExpr>) -> Self {
        self.integrals = integrals;
        self
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn eta(&self) -> &DifferentialForm {
        &self.eta
    }

    pub fn deta(&self) -> &DifferentialForm {
        &self.deta
    }

    /// Half of `dim − 1`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn hamiltonian(&self) -> Option<&ScalarExpr> {
        self.hamiltonian.as_ref()
    }

    pub fn integrals(&self) -> &[ScalarExpr] {
        &self.integrals
    }

    pub fn parse_function(&self, source: &str) -> Result<ScalarExpr> {
        self.chart.parse(source)
    }

    /// The system for the rescaled form `factor · η` (not re-checked).
    pub fn rescaled(&self, factor: &ScalarExpr) -> Result<Self> {
        Self::unchecked(self.eta.scale(factor))
    }

    /// Assembles and factors the bordered system at `point`.
    pub fn frame_at(&self, point: &[f64]) -> Result<PointFrame> {
        PointFrame::new(self, point)
    }

    pub fn reeb(&self) -> HamiltonianField<'_> {
        self.hamiltonian_field(self.chart.constant(1.0))
    }

    pub fn hamiltonian_field(&self, h: ScalarExpr) -> HamiltonianField<'_> {
        HamiltonianField { system: self, h }
    }

    /// `det S` of the bordered matrix; `±1` for the standard Darboux form.
    pub fn contact_determinant(&self, point: &[f64]) -> Result<f64> {
        let matrix = self.bordered_matrix(&self.eta_jets(point)?);
        Ok(matrix.determinant())
    }

    /// `|det S|` divided by the product of its row norms, in `[0, 1]`.
    pub fn contact_margin(&self, point: &[f64]) -> Result<f64> {
        let matrix = self.bordered_matrix(&self.eta_jets(point)?);
        let det = matrix.clone().full_piv_lu().determinant().abs();
        let mut scale = 1.0;
        for row in matrix.row_iter() {
            let norm = row.norm();
            if norm == 0.0 {
                return Ok(0.0);
            }
            scale *= norm;
        }
        Ok(det / scale)
    }

    /// Reeb field value at a point.
    pub fn reeb_at(&self, point: &[f64]) -> Result<Vec<f64>> {
        Ok(self.frame_at(point)?.reeb_value())
    }

    /// `{f, g}_η = η([X_f, X_g])` at a point.
    pub fn jacobi_bracket_at(&self, f: &ScalarExpr, g: &ScalarExpr, point: &[f64]) -> Result<f64> {
        let frame = self.frame_at(point)?;
        let xf = frame.solve(&f.eval_jet2(point)?)?;
        let xg = frame.solve(&g.eval_jet2(point)?)?;
        Ok(frame.eta_of(&xf.field.bracket(&xg.field)))
    }

    fn eta_jets(&self, point: &[f64]) -> Result<Vec<Jet2>> {
        if point.len() != self.dim() {
            return Err(Error::PointDimension {
                expected: self.dim(),
                got: point.len(),
            });
        }
        self.eta_coefficients
            .iter()
            .map(|c| c.eval_jet2(point))
            .collect()
    }

    fn bordered_matrix(&self, eta: &[Jet2]) -> DMatrix<f64> {
        let dim = self.dim();
        let mut s = DMatrix::zeros(dim + 1, dim + 1);
        for k in 0..dim {
            for i in 0..dim {
                // ω_ik = ∂_i η_k − ∂_k η_i
                s[(k, i)] = eta[k].gradient[i] - eta[i].gradient[k];
            }
            s[(k, dim)] = eta[k].value;
            s[(dim, k)] = eta[k].value;
        }
        s
    }
}

/// Value, Jacobian and Reeb derivative of a Hamiltonian field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianJet {
    pub field: FieldJet,
    /// `R(h)` at the point.
    pub reeb_derivative: f64,
    /// Gradient of `R(h)`.
    pub reeb_derivative_gradient: Vec<f64>,
}

/// The factored bordered system at one point.
pub struct PointFrame {
    point: Vec<f64>,
    eta: Vec<Jet2>,
    matrix: DMatrix<f64>,
    lu: FullPivLU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl PointFrame {
    fn new(system: &ContactSystem, point: &[f64]) -> Result<Self> {
        let eta = system.eta_jets(point)?;
        let matrix = system.bordered_matrix(&eta);
        let norm = matrix
            .row_iter()
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let lu = matrix.clone().full_piv_lu();
        let min_pivot = lu
            .u()
            .diagonal()
            .iter()
            .map(|v| v.abs())
            .fold(f64::INFINITY, f64::min);
        if !(min_pivot > SINGULAR_PIVOT * norm) {
            return Err(Error::Singular {
                point: point.to_vec(),
            });
        }
        Ok(Self {
            point: point.to_vec(),
            eta,
            matrix,
            lu,
        })
    }

    pub fn dim(&self) -> usize {
        self.eta.len()
    }

    pub fn point(&self) -> &[f64] {
        &self.point
    }

    /// `η_k` at the point.
    pub fn eta_value(&self, k: usize) -> f64 {
        self.eta[k].value
    }

    /// `dη(∂_i, ∂_k) = ∂_i η_k − ∂_k η_i`.
    pub fn deta_value(&self, i: usize, k: usize) -> f64 {
        self.matrix[(k, i)]
    }

    /// `η(v)`
    pub fn eta_of(&self, v: &[f64]) -> f64 {
        self.eta.iter().zip(v).map(|(e, x)| e.value * x).sum()
    }

    /// `dη(u, v)`
    pub fn deta_of(&self, u: &[f64], v: &[f64]) -> f64 {
        let dim = self.dim();
        let mut total = 0.0;
        for i in 0..dim {
            for k in 0..dim {
                total += u[i] * v[k] * self.deta_value(i, k);
            }
        }
        total
    }

    /// Components of `v⌟dη`.
    pub fn contract_deta(&self, v: &[f64]) -> Vec<f64> {
        let dim = self.dim();
        (0..dim)
            .map(|k| (0..dim).map(|i| v[i] * self.deta_value(i, k)).sum())
            .collect()
    }

    /// Values and gradients of the `η` coefficients.
    pub fn eta_jet(&self) -> FormJet {
        let mut jet = FormJet::new(self.dim(), 1);
        for (k, e) in self.eta.iter().enumerate() {
            jet.insert(vec![k], e.value, e.gradient.clone());
        }
        jet
    }

    pub fn determinant(&self) -> f64 {
        self.lu.determinant()
    }

    pub fn reeb_value(&self) -> Vec<f64> {
        let dim = self.dim();
        let mut rhs = DVector::zeros(dim + 1);
        rhs[dim] = 1.0;
        let u = self.lu.solve(&rhs).expect("factorization checked nonsingular");
        u.as_slice()[..dim].to_vec()
    }

    /// Solves for the Hamiltonian field of the function with jet `h`, with
    /// its Jacobian.
    pub fn solve(&self, h: &Jet2) -> Result<HamiltonianJet> {
        let dim = self.dim();
        if h.dim() != dim {
            return Err(Error::PointDimension {
                expected: dim,
                got: h.dim(),
            });
        }
        let mut rhs = DVector::zeros(dim + 1);
        for k in 0..dim {
            rhs[k] = -h.gradient[k];
        }
        rhs[dim] = h.value;
        let u = self.lu.solve(&rhs).expect("factorization checked nonsingular");

        // ∂_j u = S⁻¹ (∂_j b − (∂_j S) u), one column per direction j
        let mut rhs_d = DMatrix::zeros(dim + 1, dim);
        for j in 0..dim {
            for k in 0..dim {
                let mut ds_u = 0.0;
                for i in 0..dim {
                    let ds = self.eta[k].second(i, j) - self.eta[i].second(k, j);
                    ds_u += ds * u[i];
                }
                ds_u += self.eta[k].gradient[j] * u[dim];
                rhs_d[(k, j)] = -h.second(k, j) - ds_u;
            }
            let border: f64 = (0..dim).map(|i| self.eta[i].gradient[j] * u[i]).sum();
            rhs_d[(dim, j)] = h.gradient[j] - border;
        }
        let du = self.lu.solve(&rhs_d).expect("factorization checked nonsingular");

        let mut field = FieldJet::zero(dim);
        for i in 0..dim {
            field.value[i] = u[i];
            for j in 0..dim {
                field.jacobian[i * dim + j] = du[(i, j)];
            }
        }
        Ok(HamiltonianJet {
            field,
            reeb_derivative: -u[dim],
            reeb_derivative_gradient: (0..dim).map(|j| -du[(dim, j)]).collect(),
        })
    }
}

/// Pointwise evaluator for the Hamiltonian field of a function.
#[derive(Clone)]
pub struct HamiltonianField<'a> {
    system: &'a ContactSystem,
    h: ScalarExpr,
}

impl HamiltonianField<'_> {
    pub fn hamiltonian(&self) -> &ScalarExpr {
        &self.h
    }

    pub fn solve_at(&self, point: &[f64]) -> Result<HamiltonianJet> {
        let frame = self.system.frame_at(point)?;
        frame.solve(&self.h.eval_jet2(point)?)
    }

    pub fn value_at(&self, point: &[f64]) -> Result<Vec<f64>> {
        Ok(self.solve_at(point)?.field.value)
    }
}

impl FieldSource for HamiltonianField<'_> {
    fn dim(&self) -> usize {
        self.system.dim()
    }

    fn jet_at(&self, point: &[f64]) -> Result<FieldJet> {
        Ok(self.solve_at(point)?.field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::forms::{share, VectorField};

    fn darboux3() -> ContactSystem {
        let chart = share(Chart::new("R3", &["x", "y", "z"]));
        ContactSystem::parse(&chart, "dz - y*dx").unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn darboux_reeb_and_fields() {
        let sys = darboux3();
        assert!(close(&sys.reeb_at(&[0.3, -1.2, 0.7]).unwrap(), &[0.0, 0.0, 1.0], 1e-15));
        let h = sys.parse_function("-y").unwrap();
        let xh = sys.hamiltonian_field(h).value_at(&[0.5, 1.5, -2.0]).unwrap();
        assert!(close(&xh, &[1.0, 0.0, 0.0], 1e-15));
        let f = sys.parse_function("z").unwrap();
        let xf = sys.hamiltonian_field(f).value_at(&[2.0, 3.0, 5.0]).unwrap();
        assert!(close(&xf, &[0.0, 3.0, 5.0], 1e-14));
    }

    #[test]
    fn darboux_determinant_is_unit() {
        let sys = darboux3();
        for p in sys.chart().sample_points(16, 1).unwrap() {
            assert!((sys.contact_determinant(&p).unwrap().abs() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn determinant_matches_volume_coefficient_in_dimension_three() {
        // for n = 1 the bordered determinant is minus the squared coefficient
        // of η∧dη
        let chart = share(Chart::new("R3", &["x", "y", "z"]));
        let eta = DifferentialForm::parse_one_form(&chart, "(2 + sin(y))*dz + x*z*dy - exp(x)*dx").unwrap();
        let sys = ContactSystem::unchecked(eta.clone()).unwrap();
        let volume = eta.wedge(&eta.exterior_derivative().unwrap()).unwrap();
        for p in chart.sample_points(32, 5).unwrap() {
            let c = volume.coefficient(&[0, 1, 2]).eval(&p).unwrap();
            let det = sys.contact_determinant(&p).unwrap();
            assert!((det + c * c).abs() < 1e-9 * (1.0 + c * c), "{det} vs {c}");
        }
    }

    #[test]
    fn degenerate_form_is_rejected() {
        let chart = share(Chart::new("R3", &["x", "y", "z"]));
        let err = ContactSystem::parse(&chart, "dz").unwrap_err();
        assert!(matches!(err, Error::NotContact { .. }));
        let sys = ContactSystem::unchecked(DifferentialForm::parse_one_form(&chart, "dz").unwrap()).unwrap();
        assert!(matches!(sys.frame_at(&[0.0, 0.0, 0.0]), Err(Error::Singular { .. })));
    }

    #[test]
    fn even_dimension_is_rejected() {
        let chart = share(Chart::new("R2", &["x", "y"]));
        let eta = DifferentialForm::parse_one_form(&chart, "dx").unwrap();
        assert!(matches!(ContactSystem::new(eta), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn field_jacobian_matches_symbolic_closed_form() {
        let chart = share(Chart::new("H3", &["x", "y", "z"]));
        let sys = ContactSystem::parse(&chart, "dz - y*dx").unwrap();
        let h = sys.parse_function("(x^2 + y^2)/2").unwrap();
        let expected = VectorField::parse(&chart, &["-y", "x", "(x^2 - y^2)/2"]).unwrap();
        for p in chart.sample_points(32, 9).unwrap() {
            let got = sys.hamiltonian_field(h.clone()).jet_at(&p).unwrap();
            let want = expected.jet_at(&p).unwrap();
            assert!(close(&got.value, &want.value, 1e-12));
            assert!(close(&got.jacobian, &want.jacobian, 1e-12));
        }
    }

    #[test]
    fn jacobi_brackets() {
        let sys = darboux3();
        let f = |s: &str| sys.parse_function(s).unwrap();
        let p = [1.0, 2.0, 3.0];
        assert!(sys.jacobi_bracket_at(&f("-y"), &f("z"), &p).unwrap().abs() < 1e-15);
        assert!((sys.jacobi_bracket_at(&f("1"), &f("z"), &p).unwrap() - 1.0).abs() < 1e-15);
        let g = f("x*y + z^2");
        assert!(sys.jacobi_bracket_at(&g, &g, &p).unwrap().abs() < 1e-12);
    }
}
