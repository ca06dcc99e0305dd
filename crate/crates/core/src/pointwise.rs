//! First-order data of fields and forms at a single point.
//!
//! Hamiltonian and lifted fields are only known pointwise (through a linear
//! solve), so brackets and Lie derivatives involving them are evaluated from
//! these jets rather than symbolically.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::forms::{normalize_tuple, IndexTuple, VectorField};

/// Value and Jacobian of a vector field at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldJet {
    pub value: Vec<f64>,
    /// Row-major: `jacobian[i * dim + j] = ∂_j X^i`.
    pub jacobian: Vec<f64>,
}

impl FieldJet {
    pub fn zero(dim: usize) -> Self {
        Self {
            value: vec![0.0; dim],
            jacobian: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.value.len()
    }

    #[inline]
    pub fn partial(&self, component: usize, direction: usize) -> f64 {
        self.jacobian[component * self.dim() + direction]
    }

    /// `X(f)` for a function with gradient `gradient`.
    pub fn apply(&self, gradient: &[f64]) -> f64 {
        self.value.iter().zip(gradient).map(|(x, g)| x * g).sum()
    }

    /// Value of `[self, other]`: `X^j ∂_j Y^i − Y^j ∂_j X^i`.
    pub fn bracket(&self, other: &Self) -> Vec<f64> {
        let dim = self.dim();
        (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| self.value[j] * other.partial(i, j) - other.value[j] * self.partial(i, j))
                    .sum()
            })
            .collect()
    }
}

/// Anything that yields a field jet at chart points.
pub trait FieldSource {
    fn dim(&self) -> usize;
    fn jet_at(&self, point: &[f64]) -> Result<FieldJet>;
}

impl FieldSource for VectorField {
    fn dim(&self) -> usize {
        self.chart().dim()
    }

    fn jet_at(&self, point: &[f64]) -> Result<FieldJet> {
        VectorField::jet_at(self, point)
    }
}

impl<T: FieldSource + ?Sized> FieldSource for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn jet_at(&self, point: &[f64]) -> Result<FieldJet> {
        (**self).jet_at(point)
    }
}

impl<T: FieldSource + ?Sized> FieldSource for Box<T> {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn jet_at(&self, point: &[f64]) -> Result<FieldJet> {
        (**self).jet_at(point)
    }
}

/// Coefficient value and gradient of one form component.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientJet {
    pub value: f64,
    pub gradient: Vec<f64>,
}

/// Coefficient values and gradients of a form at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct FormJet {
    dim: usize,
    degree: usize,
    entries: BTreeMap<IndexTuple, CoefficientJet>,
}

impl FormJet {
    pub fn new(dim: usize, degree: usize) -> Self {
        Self {
            dim,
            degree,
            entries: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Inserts a coefficient on a strictly increasing tuple.
    pub fn insert(&mut self, tuple: IndexTuple, value: f64, gradient: Vec<f64>) {
        debug_assert_eq!(tuple.len(), self.degree);
        self.entries.insert(tuple, CoefficientJet { value, gradient });
    }

    pub fn entries(&self) -> &BTreeMap<IndexTuple, CoefficientJet> {
        &self.entries
    }

    /// Antisymmetric component `ω(∂_{i_1}, …, ∂_{i_k})` for any index order,
    /// with its gradient.
    pub fn component(&self, indices: &[usize]) -> Option<(f64, &CoefficientJet)> {
        let (sign, tuple) = normalize_tuple(indices)?;
        self.entries.get(&tuple).map(|c| (sign, c))
    }

    pub fn value(&self, indices: &[usize]) -> f64 {
        self.component(indices).map_or(0.0, |(s, c)| s * c.value)
    }

    /// Values of `£_X ω` on every increasing tuple:
    /// `X^j ∂_j ω_I + Σ_s Σ_j ω_{I[s→j]} ∂_{I_s} X^j`.
    pub fn lie_derivative(&self, field: &FieldJet) -> BTreeMap<IndexTuple, f64> {
        let mut out = BTreeMap::new();
        for tuple in increasing_tuples(self.dim, self.degree) {
            let mut total = self
                .entries
                .get(&tuple)
                .map_or(0.0, |c| field.apply(&c.gradient));
            for slot in 0..tuple.len() {
                let mut replaced = tuple.clone();
                for j in 0..self.dim {
                    replaced[slot] = j;
                    let coefficient = self.value(&replaced);
                    if coefficient != 0.0 {
                        total += coefficient * field.partial(j, tuple[slot]);
                    }
                }
            }
            out.insert(tuple, total);
        }
        out
    }

    /// Values of `X⌟ω` on every increasing tuple of degree `k - 1`.
    pub fn contract(&self, field: &[f64]) -> BTreeMap<IndexTuple, f64> {
        let mut out = BTreeMap::new();
        if self.degree == 0 {
            return out;
        }
        for tuple in increasing_tuples(self.dim, self.degree - 1) {
            let mut total = 0.0;
            let mut indices = Vec::with_capacity(self.degree);
            for (j, x) in field.iter().enumerate() {
                if *x == 0.0 {
                    continue;
                }
                indices.clear();
                indices.push(j);
                indices.extend_from_slice(&tuple);
                total += x * self.value(&indices);
            }
            out.insert(tuple, total);
        }
        out
    }
}

/// All strictly increasing tuples of length `degree` from `0..dim`.
pub fn increasing_tuples(dim: usize, degree: usize) -> Vec<IndexTuple> {
    fn extend(start: usize, dim: usize, left: usize, prefix: &mut IndexTuple, out: &mut Vec<IndexTuple>) {
        if left == 0 {
            out.push(prefix.clone());
            return;
        }
        for i in start..dim {
            prefix.push(i);
            extend(i + 1, dim, left - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    extend(0, dim, degree, &mut Vec::with_capacity(degree), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::Chart;
    use crate::forms::{share, DifferentialForm};

    #[test]
    fn tuple_enumeration() {
        assert_eq!(increasing_tuples(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(increasing_tuples(4, 0), vec![Vec::<usize>::new()]);
        assert_eq!(increasing_tuples(5, 3).len(), 10);
    }

    #[test]
    fn pointwise_lie_derivative_matches_cartan_formula() {
        let chart = share(Chart::new("R3", &["x", "y", "z"]));
        let form = DifferentialForm::parse_one_form(&chart, "exp(y)*dz - x*y*dx + sin(z)*dy").unwrap();
        let two = form.exterior_derivative().unwrap();
        let field = VectorField::parse(&chart, &["y*z", "x^2 - z", "cos(x*y)"]).unwrap();
        let p = [0.3, -0.8, 1.4];
        let jet = field.jet_at(&p).unwrap();
        for omega in [&form, &two] {
            let symbolic = omega.lie_derivative(&field).unwrap().eval(&p).unwrap();
            let pointwise = omega.jet_at(&p).unwrap().lie_derivative(&jet);
            for (tuple, value) in &pointwise {
                let expected = symbolic.get(tuple).copied().unwrap_or(0.0);
                assert!((value - expected).abs() < 1e-12, "{tuple:?}: {value} vs {expected}");
            }
        }
    }

    #[test]
    fn pointwise_contraction_and_bracket() {
        let chart = share(Chart::new("R3", &["x", "y", "z"]));
        let dxdy = DifferentialForm::basis(&chart, &[0, 1]).unwrap();
        let jet = dxdy.jet_at(&[0.0; 3]).unwrap();
        let c = jet.contract(&[0.0, 2.0, 3.0]);
        assert_eq!(c[&vec![0]], -2.0);
        assert_eq!(c[&vec![1]], 0.0);

        let dz = VectorField::basis(&chart, 2).jet_at(&[1.0, 2.0, 3.0]).unwrap();
        let scaling = VectorField::parse(&chart, &["0", "y", "z"])
            .unwrap()
            .jet_at(&[1.0, 2.0, 3.0])
            .unwrap();
        assert_eq!(dz.bracket(&scaling), vec![0.0, 0.0, 1.0]);
    }
}
