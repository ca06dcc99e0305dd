//! Coordinate charts and deterministic point sampling.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{self, Coords, ScalarExpr};

/// Sampling interval for one coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordRange {
    pub lo: f64,
    pub hi: f64,
    /// Sample `ln x` uniformly instead of `x`; requires `0 < lo`.
    pub log_scale: bool,
}

impl CoordRange {
    pub const fn uniform(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            log_scale: false,
        }
    }

    pub const fn log(lo: f64, hi: f64) -> Self {
        Self {
            lo,
            hi,
            log_scale: true,
        }
    }

    fn draw(&self, rng: &mut impl Rng) -> f64 {
        if self.log_scale {
            rng.random_range(self.lo.ln()..=self.hi.ln()).exp()
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }
}

impl Default for CoordRange {
    fn default() -> Self {
        Self::uniform(-2.0, 2.0)
    }
}

/// Named coordinates, an open domain cut out by strict inequalities, and a
/// seeded sampler for points of that domain.
#[derive(Debug, Clone)]
pub struct Chart {
    name: String,
    coords: Coords,
    domain: Vec<ScalarExpr>,
    ranges: Vec<CoordRange>,
}

/// Upper bound on rejected draws per accepted sample.
const MAX_REJECTIONS_PER_SAMPLE: usize = 1000;

impl Chart {
    pub fn new<S: AsRef<str>>(name: impl Into<String>, names: &[S]) -> Self {
        let coords = expr::coords(names);
        let ranges = vec![CoordRange::default(); coords.len()];
        Self {
            name: name.into(),
            coords,
            domain: Vec::new(),
            ranges,
        }
    }

    /// Adds the constraint `predicate > 0` to the domain.
    pub fn with_domain(mut self, predicate: &str) -> Result<Self> {
        let expr = self.parse(predicate)?;
        self.domain.push(expr);
        Ok(self)
    }

    pub fn with_range(mut self, coord: &str, range: CoordRange) -> Self {
        let index = self
            .index_of(coord)
            .unwrap_or_else(|| panic!("chart `{}` has no coordinate `{coord}`", self.name));
        self.ranges[index] = range;
        self
    }

    pub fn with_all_ranges(mut self, range: CoordRange) -> Self {
        self.ranges.fill(range);
        self
    }

    /// Appends coordinates, keeping existing ones at their indices. Domain
    /// predicates are carried over.
    pub fn extended<S: AsRef<str>>(&self, name: impl Into<String>, extra: &[(S, CoordRange)]) -> Self {
        let mut names: Vec<String> = self.coords.to_vec();
        names.extend(extra.iter().map(|(n, _)| n.as_ref().to_string()));
        let coords: Coords = names.into();
        let mut ranges = self.ranges.clone();
        ranges.extend(extra.iter().map(|(_, r)| *r));
        let domain = self.domain.iter().map(|d| d.extend_to(&coords)).collect();
        Self {
            name: name.into(),
            coords,
            domain,
            ranges,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn domain(&self) -> &[ScalarExpr] {
        &self.domain
    }

    pub fn range(&self, index: usize) -> CoordRange {
        self.ranges[index]
    }

    pub fn index_of(&self, coord: &str) -> Option<usize> {
        self.coords.iter().position(|c| c == coord)
    }

    pub fn coordinate(&self, index: usize) -> ScalarExpr {
        ScalarExpr::coordinate(index, &self.coords)
    }

    pub fn constant(&self, value: f64) -> ScalarExpr {
        ScalarExpr::constant(value, &self.coords)
    }

    pub fn parse(&self, source: &str) -> Result<ScalarExpr> {
        expr::parse(source, &self.coords)
    }

    /// Same coordinate names in the same order.
    pub fn same_as(&self, other: &Chart) -> bool {
        self.coords[..] == other.coords[..]
    }

    pub(crate) fn ensure_same(&self, other: &Chart) -> Result<()> {
        if self.same_as(other) {
            Ok(())
        } else {
            Err(Error::ChartMismatch {
                left: self.name.clone(),
                right: other.name.clone(),
            })
        }
    }

    /// True when every domain predicate is strictly positive at `point`.
    pub fn contains(&self, point: &[f64]) -> Result<bool> {
        for predicate in &self.domain {
            match predicate.eval(point) {
                Ok(v) if v > 0.0 => {}
                Ok(_) | Err(Error::DivisionByZero { .. } | Error::Domain { .. }) => return Ok(false),
                Err(e) => return Err(e),
            }
        }
        Ok(true)
    }

    /// `count` domain points drawn from a ChaCha8 stream seeded with `seed`.
    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, count)
    }

    pub fn sample_with(&self, rng: &mut impl Rng, count: usize) -> Result<Vec<Vec<f64>>> {
        let mut points = Vec::with_capacity(count);
        let mut rejected = 0usize;
        let budget = MAX_REJECTIONS_PER_SAMPLE * count.max(1);
        while points.len() < count {
            let point: Vec<f64> = self.ranges.iter().map(|r| r.draw(rng)).collect();
            if self.contains(&point)? {
                points.push(point);
            } else {
                rejected += 1;
                if rejected > budget {
                    return Err(Error::SamplerExhausted {
                        chart: self.name.clone(),
                    });
                }
            }
        }
        Ok(points)
    }
}

/// Shared handle used by forms and fields.
pub type ChartRef = Arc<Chart>;
