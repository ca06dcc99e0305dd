//! Differential forms and vector fields with symbolic coefficients.
//!
//! Forms are stored sparsely by strictly increasing index tuples. Degrees are
//! capped at [`MAX_DEGREE`]; top-degree quantities on larger charts go through
//! the determinant routes in [`crate::contact`].

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::chart::{Chart, ChartRef};
use crate::error::{Error, Result};
use crate::expr::{self, Node, ScalarExpr};
use crate::pointwise::{FieldJet, FormJet};

pub const MAX_DEGREE: usize = 3;

pub type IndexTuple = Vec<usize>;

/// Sorts `indices` into increasing order and returns the permutation sign, or
/// `None` when an index repeats.
pub fn normalize_tuple(indices: &[usize]) -> Option<(f64, IndexTuple)> {
    let mut sorted = indices.to_vec();
    let mut sign = 1.0;
    // insertion sort, counting transpositions
    for i in 1..sorted.len() {
        let mut j = i;
        while j > 0 && sorted[j - 1] > sorted[j] {
            sorted.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((sign, sorted))
    }
}

#[derive(Clone)]
pub struct DifferentialForm {
    chart: ChartRef,
    degree: usize,
    coefficients: BTreeMap<IndexTuple, ScalarExpr>,
}

impl DifferentialForm {
    pub fn zero(chart: &ChartRef, degree: usize) -> Result<Self> {
        if degree > MAX_DEGREE || degree > chart.dim() {
            return Err(Error::Degree(format!(
                "degree {degree} exceeds the supported range on a {}-dimensional chart",
                chart.dim()
            )));
        }
        Ok(Self {
            chart: chart.clone(),
            degree,
            coefficients: BTreeMap::new(),
        })
    }

    pub fn function(chart: &ChartRef, f: ScalarExpr) -> Self {
        let mut form = Self::zero(chart, 0).expect("degree 0 always fits");
        form.insert(vec![], f);
        form
    }

    /// `Σ coefficients[i] dx_i`
    pub fn one_form(chart: &ChartRef, coefficients: Vec<ScalarExpr>) -> Self {
        assert_eq!(coefficients.len(), chart.dim(), "one coefficient per coordinate");
        let mut form = Self::zero(chart, 1).expect("degree 1 always fits");
        for (i, c) in coefficients.into_iter().enumerate() {
            form.insert(vec![i], c);
        }
        form
    }

    /// `dx_{i_1} ∧ … ∧ dx_{i_k}` for the listed coordinate indices.
    pub fn basis(chart: &ChartRef, indices: &[usize]) -> Result<Self> {
        let mut form = Self::zero(chart, indices.len())?;
        form.add_term(indices, chart.constant(1.0));
        Ok(form)
    }

    /// Parses `c0*dx + c1*dy + …`, where `d<coord>` names the differential of
    /// a chart coordinate. The input must be linear in the differentials.
    pub fn parse_one_form(chart: &ChartRef, source: &str) -> Result<Self> {
        let dim = chart.dim();
        let mut names: Vec<String> = chart.coords().to_vec();
        for c in chart.coords().iter() {
            let differential = format!("d{c}");
            if chart.index_of(&differential).is_some() {
                return Err(Error::InvalidParameter(format!(
                    "coordinate `{differential}` collides with the differential of `{c}`"
                )));
            }
            names.push(differential);
        }
        let extended = expr::coords(&names);
        let parsed = expr::parse(source, &extended)?;
        if !matches!(
            differential_degree(parsed.node(), dim),
            Homogeneity::Any | Homogeneity::Degree(1)
        ) {
            return Err(Error::Syntax {
                offset: 0,
                message: "expected an expression linear in the coordinate differentials".into(),
            });
        }
        let zero_differentials: Vec<ScalarExpr> = (0..2 * dim)
            .map(|i| {
                if i < dim {
                    chart.coordinate(i)
                } else {
                    chart.constant(0.0)
                }
            })
            .collect();
        let coefficients = (0..dim)
            .map(|i| parsed.partial(dim + i).substitute(&zero_differentials))
            .collect();
        Ok(Self::one_form(chart, coefficients))
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficients(&self) -> &BTreeMap<IndexTuple, ScalarExpr> {
        &self.coefficients
    }

    /// Coefficient on a strictly increasing tuple (zero if absent).
    pub fn coefficient(&self, tuple: &[usize]) -> ScalarExpr {
        self.coefficients
            .get(tuple)
            .cloned()
            .unwrap_or_else(|| self.chart.constant(0.0))
    }

    /// Dense coefficient list of a 1-form.
    pub fn one_form_coefficients(&self) -> Vec<ScalarExpr> {
        assert_eq!(self.degree, 1, "not a 1-form");
        (0..self.chart.dim()).map(|i| self.coefficient(&[i])).collect()
    }

    fn insert(&mut self, tuple: IndexTuple, coefficient: ScalarExpr) {
        if coefficient.is_zero() {
            self.coefficients.remove(&tuple);
        } else {
            self.coefficients.insert(tuple, coefficient);
        }
    }

    /// Adds `coefficient · dx_{indices}` for an arbitrary index order.
    fn add_term(&mut self, indices: &[usize], coefficient: ScalarExpr) {
        let Some((sign, tuple)) = normalize_tuple(indices) else {
            return;
        };
        let term = if sign < 0.0 { -coefficient } else { coefficient };
        let sum = match self.coefficients.get(&tuple) {
            Some(existing) => existing + &term,
            None => term,
        };
        self.insert(tuple, sum);
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        self.chart.ensure_same(&other.chart)?;
        if self.degree != other.degree {
            return Err(Error::Degree(format!(
                "cannot combine forms of degree {} and {}",
                self.degree, other.degree
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for (tuple, c) in &other.coefficients {
            out.add_term(tuple, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale_const(-1.0))
    }

    pub fn scale(&self, factor: &ScalarExpr) -> Self {
        let mut out = Self {
            chart: self.chart.clone(),
            degree: self.degree,
            coefficients: BTreeMap::new(),
        };
        for (tuple, c) in &self.coefficients {
            out.insert(tuple.clone(), factor * c);
        }
        out
    }

    pub fn scale_const(&self, factor: f64) -> Self {
        self.scale(&self.chart.constant(factor))
    }

    /// Re-homes the form on a chart whose coordinates extend this one.
    pub fn extend_to(&self, chart: &ChartRef) -> Self {
        let coefficients = self
            .coefficients
            .iter()
            .map(|(t, c)| (t.clone(), c.extend_to(chart.coords())))
            .collect();
        Self {
            chart: chart.clone(),
            degree: self.degree,
            coefficients,
        }
    }

    pub fn exterior_derivative(&self) -> Result<Self> {
        if self.degree >= MAX_DEGREE {
            return Err(Error::Degree(format!(
                "exterior derivative of a degree-{} form is outside the supported range",
                self.degree
            )));
        }
        let mut out = Self::zero(&self.chart, self.degree + 1)?;
        for (tuple, c) in &self.coefficients {
            for j in 0..self.chart.dim() {
                if tuple.contains(&j) {
                    continue;
                }
                let partial = c.partial(j);
                if partial.is_zero() {
                    continue;
                }
                let mut indices = Vec::with_capacity(tuple.len() + 1);
                indices.push(j);
                indices.extend_from_slice(tuple);
                out.add_term(&indices, partial);
            }
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.chart.ensure_same(&other.chart)?;
        let mut out = Self::zero(&self.chart, self.degree + other.degree)?;
        for (a, ca) in &self.coefficients {
            for (b, cb) in &other.coefficients {
                let mut indices = a.clone();
                indices.extend_from_slice(b);
                out.add_term(&indices, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn interior_product(&self, field: &VectorField) -> Result<Self> {
        self.chart.ensure_same(&field.chart)?;
        if self.degree == 0 {
            return Err(Error::Degree("interior product of a function".into()));
        }
        let mut out = Self::zero(&self.chart, self.degree - 1)?;
        for (tuple, c) in &self.coefficients {
            for (slot, &index) in tuple.iter().enumerate() {
                let component = &field.components[index];
                if component.is_zero() {
                    continue;
                }
                let mut rest = tuple.clone();
                rest.remove(slot);
                let term = component * c;
                out.add_term(&rest, if slot % 2 == 0 { term } else { -term });
            }
        }
        Ok(out)
    }

    /// Cartan formula `£_X ω = X⌟dω + d(X⌟ω)`.
    pub fn lie_derivative(&self, field: &VectorField) -> Result<Self> {
        self.chart.ensure_same(&field.chart)?;
        if self.degree > 2 {
            return Err(Error::Degree(format!(
                "Lie derivative of a degree-{} form is outside the supported range",
                self.degree
            )));
        }
        let first = self.exterior_derivative()?.interior_product(field)?;
        if self.degree == 0 {
            return Ok(first);
        }
        first.add(&self.interior_product(field)?.exterior_derivative()?)
    }

    /// Coefficient values at a point, keyed by increasing tuple.
    pub fn eval(&self, point: &[f64]) -> Result<BTreeMap<IndexTuple, f64>> {
        self.coefficients
            .iter()
            .map(|(t, c)| Ok((t.clone(), c.eval(point)?)))
            .collect()
    }

    /// Largest coefficient magnitude at a point.
    pub fn max_abs(&self, point: &[f64]) -> Result<f64> {
        let mut max: f64 = 0.0;
        for c in self.coefficients.values() {
            max = max.max(c.eval(point)?.abs());
        }
        Ok(max)
    }

    /// Values and gradients of the coefficients at a point.
    pub fn jet_at(&self, point: &[f64]) -> Result<FormJet> {
        let mut jet = FormJet::new(self.chart.dim(), self.degree);
        for (tuple, c) in &self.coefficients {
            let j = c.eval_jet2(point)?;
            jet.insert(tuple.clone(), j.value, j.gradient);
        }
        Ok(jet)
    }
}

impl fmt::Debug for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for DifferentialForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coefficients.is_empty() {
            return write!(f, "0");
        }
        let coords = self.chart.coords();
        for (n, (tuple, c)) in self.coefficients.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (k, i) in tuple.iter().enumerate() {
                write!(f, "{}d{}", if k == 0 { "*" } else { "^" }, coords[*i])?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Homogeneity {
    /// Identically zero: compatible with any degree.
    Any,
    Degree(u32),
    Mixed,
}

/// Polynomial degree of a parsed tree in the differential pseudo-coordinates
/// (indices `>= dim`), or `Mixed` if it is not homogeneous.
fn differential_degree(node: &Node, dim: usize) -> Homogeneity {
    use crate::expr::{BinaryOp, UnaryOp};
    use Homogeneity::*;
    match node {
        Node::Const(c) if *c == 0.0 => Any,
        Node::Const(_) => Degree(0),
        Node::Coord(i) => Degree(u32::from(*i >= dim)),
        Node::Unary(UnaryOp::Neg, a) => differential_degree(a, dim),
        Node::Unary(_, a) => match differential_degree(a, dim) {
            Any | Degree(0) => Degree(0),
            _ => Mixed,
        },
        Node::Binary(op, a, b) => {
            let (da, db) = (differential_degree(a, dim), differential_degree(b, dim));
            match op {
                BinaryOp::Add | BinaryOp::Sub => match (da, db) {
                    (Mixed, _) | (_, Mixed) => Mixed,
                    (Any, x) | (x, Any) => x,
                    (x, y) if x == y => x,
                    _ => Mixed,
                },
                BinaryOp::Mul => match (da, db) {
                    (Mixed, _) | (_, Mixed) => Mixed,
                    (Any, _) | (_, Any) => Any,
                    (Degree(x), Degree(y)) => Degree(x + y),
                },
                BinaryOp::Div => match db {
                    Any | Degree(0) => da,
                    _ => Mixed,
                },
            }
        }
        Node::Pow(a, n) => match (differential_degree(a, dim), *n) {
            (_, 0) => Degree(0),
            (Degree(d), n) => Degree(d * n),
            (other, _) => other,
        },
    }
}

#[derive(Clone)]
pub struct VectorField {
    chart: ChartRef,
    components: Vec<ScalarExpr>,
}

impl VectorField {
    pub fn new(chart: &ChartRef, components: Vec<ScalarExpr>) -> Self {
        assert_eq!(components.len(), chart.dim(), "one component per coordinate");
        Self {
            chart: chart.clone(),
            components,
        }
    }

    pub fn zero(chart: &ChartRef) -> Self {
        Self::new(chart, vec![chart.constant(0.0); chart.dim()])
    }

    /// The coordinate field `∂_index`.
    pub fn basis(chart: &ChartRef, index: usize) -> Self {
        let mut field = Self::zero(chart);
        field.components[index] = chart.constant(1.0);
        field
    }

    /// Parses one component expression per coordinate.
    pub fn parse<S: AsRef<str>>(chart: &ChartRef, components: &[S]) -> Result<Self> {
        if components.len() != chart.dim() {
            return Err(Error::PointDimension {
                expected: chart.dim(),
                got: components.len(),
            });
        }
        let components = components
            .iter()
            .map(|s| chart.parse(s.as_ref()))
            .collect::<Result<_>>()?;
        Ok(Self::new(chart, components))
    }

    pub fn chart(&self) -> &ChartRef {
        &self.chart
    }

    pub fn components(&self) -> &[ScalarExpr] {
        &self.components
    }

    /// Derivative of `f` along the field, `Σ X^i ∂_i f`.
    pub fn apply(&self, f: &ScalarExpr) -> ScalarExpr {
        let mut sum = self.chart.constant(0.0);
        for (i, component) in self.components.iter().enumerate() {
            if component.is_zero() {
                continue;
            }
            sum = &sum + &(component * &f.partial(i));
        }
        sum
    }

    pub fn lie_bracket(&self, other: &Self) -> Result<Self> {
        self.chart.ensure_same(&other.chart)?;
        let components = (0..self.chart.dim())
            .map(|i| &self.apply(&other.components[i]) - &other.apply(&self.components[i]))
            .collect();
        Ok(Self::new(&self.chart, components))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.chart.ensure_same(&other.chart)?;
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::new(&self.chart, components))
    }

    pub fn scale(&self, factor: &ScalarExpr) -> Self {
        let components = self.components.iter().map(|c| factor * c).collect();
        Self::new(&self.chart, components)
    }

    pub fn extend_to(&self, chart: &ChartRef) -> Self {
        let mut components: Vec<ScalarExpr> = self
            .components
            .iter()
            .map(|c| c.extend_to(chart.coords()))
            .collect();
        components.resize(chart.dim(), chart.constant(0.0));
        Self::new(chart, components)
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval(point)).collect()
    }

    pub fn jet_at(&self, point: &[f64]) -> Result<FieldJet> {
        let dim = self.chart.dim();
        let mut jet = FieldJet::zero(dim);
        for (i, c) in self.components.iter().enumerate() {
            let j = c.eval_jet2(point)?;
            jet.value[i] = j.value;
            jet.jacobian[i * dim..(i + 1) * dim].copy_from_slice(&j.gradient);
        }
        Ok(jet)
    }
}

impl fmt::Debug for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords = self.chart.coords();
        let parts: Vec<String> = self
            .components
            .iter()
            .zip(coords.iter())
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, name)| format!("({c})*d/d{name}"))
            .collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Convenience: a shared chart handle from a plain chart.
pub fn share(chart: Chart) -> ChartRef {
    Arc::new(chart)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r3() -> ChartRef {
        share(Chart::new("R3", &["x", "y", "z"]))
    }

    fn eta(chart: &ChartRef) -> DifferentialForm {
        DifferentialForm::parse_one_form(chart, "dz - y*dx").unwrap()
    }

    fn approx_form(form: &DifferentialForm, expected: &[(&[usize], f64)], point: &[f64]) {
        let values = form.eval(point).unwrap();
        for (tuple, value) in expected {
            let got = values.get(*tuple).copied().unwrap_or(0.0);
            assert!((got - value).abs() < 1e-12, "{tuple:?}: {got} vs {value}");
        }
        for (tuple, got) in &values {
            if !expected.iter().any(|(t, _)| t == tuple) {
                assert!(got.abs() < 1e-12, "unexpected {tuple:?} = {got}");
            }
        }
    }

    #[test]
    fn one_form_parsing_extracts_coefficients() {
        let chart = r3();
        let form = eta(&chart);
        approx_form(&form, &[(&[0], -2.0), (&[2], 1.0)], &[1.0, 2.0, 3.0]);
        let form = DifferentialForm::parse_one_form(&chart, "(1 + x)*(dy + z*dz) - dx/2").unwrap();
        approx_form(&form, &[(&[0], -0.5), (&[1], 2.0), (&[2], 6.0)], &[1.0, 5.0, 3.0]);
    }

    #[test]
    fn one_form_parsing_rejects_nonlinear_input() {
        let chart = r3();
        for src in ["dx*dy", "x + dx", "sin(dx)", "1/dx", "dx^2"] {
            assert!(DifferentialForm::parse_one_form(&chart, src).is_err(), "{src}");
        }
        assert!(DifferentialForm::parse_one_form(&chart, "dq").is_err());
    }

    #[test]
    fn darboux_differential() {
        let chart = r3();
        let d = eta(&chart).exterior_derivative().unwrap();
        approx_form(&d, &[(&[0, 1], 1.0)], &[0.4, -1.0, 2.0]);
        let dd = d.exterior_derivative().unwrap();
        assert!(dd.coefficients().is_empty());
    }

    #[test]
    fn constant_function_is_closed() {
        let chart = r3();
        let f = DifferentialForm::function(&chart, chart.constant(7.0));
        assert!(f.exterior_derivative().unwrap().coefficients().is_empty());
    }

    #[test]
    fn wedge_of_eta_with_its_differential() {
        let chart = r3();
        let e = eta(&chart);
        let vol = e.wedge(&e.exterior_derivative().unwrap()).unwrap();
        approx_form(&vol, &[(&[0, 1, 2], 1.0)], &[1.0, 2.0, 3.0]);
        assert_eq!(e.wedge(&e).unwrap().max_abs(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        let dxdy = DifferentialForm::basis(&chart, &[1, 0]).unwrap();
        approx_form(&dxdy, &[(&[0, 1], -1.0)], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn wedge_is_graded_antisymmetric() {
        let chart = r3();
        let a = DifferentialForm::parse_one_form(&chart, "x*dy + exp(z)*dx").unwrap();
        let b = DifferentialForm::parse_one_form(&chart, "y^2*dz - dx").unwrap();
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        let p = [0.3, -0.2, 1.1];
        let sum = ab.add(&ba).unwrap();
        assert!(sum.max_abs(&p).unwrap() < 1e-14);
    }

    #[test]
    fn degree_limits() {
        let chart = r3();
        let vol = DifferentialForm::basis(&chart, &[0, 1, 2]).unwrap();
        assert!(matches!(vol.exterior_derivative(), Err(Error::Degree(_))));
        let f = DifferentialForm::function(&chart, chart.coordinate(0));
        assert!(matches!(
            f.interior_product(&VectorField::basis(&chart, 0)),
            Err(Error::Degree(_))
        ));
        let two = DifferentialForm::basis(&chart, &[0, 1]).unwrap();
        assert!(matches!(two.wedge(&two), Err(Error::Degree(_))));
    }

    #[test]
    fn contractions() {
        let chart = r3();
        let dz = VectorField::basis(&chart, 2);
        let c = eta(&chart).interior_product(&dz).unwrap();
        assert_eq!(c.coefficient(&[]).constant_value(), Some(1.0));
        let dxdy = DifferentialForm::basis(&chart, &[0, 1]).unwrap();
        assert!(dxdy.interior_product(&dz).unwrap().coefficients().is_empty());
        let scaling = VectorField::parse(&chart, &["0", "y", "z"]).unwrap();
        approx_form(
            &dxdy.interior_product(&scaling).unwrap(),
            &[(&[0], -2.0)],
            &[1.0, 2.0, 3.0],
        );
    }

    #[test]
    fn brackets() {
        let chart = r3();
        let dx = VectorField::basis(&chart, 0);
        let dz = VectorField::basis(&chart, 2);
        let scaling = VectorField::parse(&chart, &["0", "y", "z"]).unwrap();
        let p = [0.7, -1.3, 2.2];
        assert!(dx.lie_bracket(&scaling).unwrap().eval(&p).unwrap().iter().all(|v| *v == 0.0));
        assert!(scaling.lie_bracket(&scaling).unwrap().eval(&p).unwrap().iter().all(|v| *v == 0.0));
        assert_eq!(dz.lie_bracket(&scaling).unwrap().eval(&p).unwrap(), vec![0.0, 0.0, 1.0]);
    }

    #[test]
    fn lie_derivatives_on_the_darboux_chart() {
        let chart = share(Chart::new("darboux", &["z", "p1", "q1"]));
        let eta = DifferentialForm::parse_one_form(&chart, "dz - p1*dq1").unwrap();
        let dp = VectorField::basis(&chart, 1);
        let lie = eta.lie_derivative(&dp).unwrap();
        approx_form(&lie, &[(&[2], -1.0)], &[0.1, 0.2, 0.3]);
        let contact = VectorField::parse(&chart, &["q1", "1", "0"]).unwrap();
        assert!(eta.lie_derivative(&contact).unwrap().max_abs(&[0.1, 0.2, 0.3]).unwrap() < 1e-15);
        let reeb = VectorField::basis(&chart, 0);
        assert!(eta.lie_derivative(&reeb).unwrap().coefficients().is_empty());
    }

    #[test]
    fn cone_form_differential() {
        let chart = share(Chart::new("cone", &["x", "y", "z", "r"]));
        let lifted = DifferentialForm::parse_one_form(&chart, "r^2*(dz - y*dx)").unwrap();
        let omega = lifted.exterior_derivative().unwrap();
        // r^2 dx^dy + 2r dr^(dz - y dx)
        let (y, r) = (1.5, 0.8);
        approx_form(
            &omega,
            &[(&[0, 1], r * r), (&[2, 3], -2.0 * r), (&[0, 3], 2.0 * r * y)],
            &[0.2, y, -0.4, r],
        );
    }
}
