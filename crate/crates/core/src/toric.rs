//! Lattice and moment-map arithmetic for the circle reductions of S⁷ that
//! produce the contact manifolds `Y(p, q)` on S² × S³.
//!
//! Integer data is exact. Floating point only enters level-set sampling.

use std::f64::consts::TAU;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::check::CheckResult;
use crate::error::{Error, Result};

/// Integer pair with `0 < q < p`. Coprimality is checked where freeness
/// matters, not at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct YpqParams {
    pub p: u64,
    pub q: u64,
}

impl YpqParams {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if q == 0 || q >= p {
            return Err(Error::InvalidParameter(format!(
                "toric parameters need 0 < q < p, got p = {p}, q = {q}"
            )));
        }
        Ok(Self { p, q })
    }

    fn signed(&self) -> (i64, i64) {
        (self.p as i64, self.q as i64)
    }

    /// Fails with [`Error::NotFree`] unless `gcd(p, q) = 1`.
    pub fn require_free(&self) -> Result<()> {
        let freeness = is_free(*self);
        if freeness.free {
            Ok(())
        } else {
            Err(Error::NotFree {
                stabilizer: freeness.stabilizer_order,
            })
        }
    }
}

/// Weights of the reducing circle on `(z1, z2, z3, z4)`.
pub fn circle_weights(params: YpqParams) -> [i64; 4] {
    let (p, q) = params.signed();
    [p - q, p + q, -p, -p]
}

/// Coefficients of the Reeb generator `(p+q, p−q, p, p)` in the standard basis.
pub fn reeb_generator(params: YpqParams) -> [i64; 4] {
    let (p, q) = params.signed();
    [p + q, p - q, p, p]
}

/// Coefficients of the Reeb field `(p−q, p+q, p, p)` inducing the quotient
/// Kähler data.
pub fn quotient_reeb_field(params: YpqParams) -> [i64; 4] {
    let (p, q) = params.signed();
    [p - q, p + q, p, p]
}

/// Integer weights of a one- or two-parameter torus on the four coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightMatrix {
    rows: Vec<[i64; 4]>,
}

impl WeightMatrix {
    pub fn new(rows: Vec<[i64; 4]>) -> Result<Self> {
        if !(1..=2).contains(&rows.len()) {
            return Err(Error::InvalidParameter(format!(
                "weight matrix needs 1 or 2 rows, got {}",
                rows.len()
            )));
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[[i64; 4]] {
        &self.rows
    }

    /// Weights per coordinate, one entry per row.
    pub fn column(&self, coordinate: usize) -> Vec<i64> {
        self.rows.iter().map(|r| r[coordinate]).collect()
    }
}

/// Squared moduli `(|z1|², …, |z4|²)`.
pub fn moment_t4(z: &[Complex64; 4]) -> Result<[f64; 4]> {
    if z.iter().all(|c| c.norm_sqr() == 0.0) {
        return Err(Error::InvalidParameter("moment map undefined at z = 0".into()));
    }
    Ok(z.map(|c| c.norm_sqr()))
}

/// Circle moment map: the weights paired with the squared moduli.
pub fn moment_circle(params: YpqParams, z: &[Complex64; 4]) -> Result<f64> {
    let moduli = moment_t4(z)?;
    Ok(pair(&circle_weights(params).map(|w| w as f64), &moduli))
}

fn pair(a: &[f64; 4], moduli: &[f64; 4]) -> f64 {
    a.iter().zip(moduli).map(|(x, m)| x * m).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Freeness {
    pub free: bool,
    /// Largest isotropy order over the level set.
    pub stabilizer_order: u64,
}

impl Freeness {
    pub fn explanation(&self) -> String {
        if self.free {
            "action free".into()
        } else {
            format!("action not free: stabilizer order {}", self.stabilizer_order)
        }
    }
}

/// Freeness of the circle action on the level set.
///
/// A point with support `S` has isotropy of order `gcd(weights on S)`. The
/// level set forces `S` to meet both `{z1, z2}` and `{z3, z4}`, so the largest
/// isotropy occurs on a two-element support.
pub fn is_free(params: YpqParams) -> Freeness {
    let w = circle_weights(params);
    let order = [0, 1]
        .into_iter()
        .flat_map(|i| [2, 3].map(|j| w[i].gcd(&w[j]) as u64))
        .max()
        .expect("four supports");
    Freeness {
        free: order == 1,
        stabilizer_order: order,
    }
}

/// A point on the zero set of the circle moment map with the normalization
/// of the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelSetSample {
    pub moduli: [f64; 4],
    pub phases: [f64; 4],
}

impl LevelSetSample {
    pub fn point(&self) -> [Complex64; 4] {
        std::array::from_fn(|i| Complex64::from_polar(self.moduli[i].sqrt(), self.phases[i]))
    }

    /// Residuals of `(p−q)|z1|² + (p+q)|z2|² = 1/2` and `|z3|² + |z4|² = 1/(2p)`.
    pub fn constraint_residuals(&self, params: YpqParams) -> [f64; 2] {
        let (p, q) = (params.p as f64, params.q as f64);
        let m = &self.moduli;
        [
            ((p - q) * m[0] + (p + q) * m[1] - 0.5).abs(),
            (m[2] + m[3] - 0.5 / p).abs(),
        ]
    }
}

/// Level-set point at segment parameters `t, s ∈ [0, 1]` with zero phases.
pub fn level_set_point(params: YpqParams, t: f64, s: f64) -> LevelSetSample {
    let (p, q) = (params.p as f64, params.q as f64);
    LevelSetSample {
        moduli: [
            (1.0 - t) / (2.0 * (p - q)),
            t / (2.0 * (p + q)),
            s / (2.0 * p),
            (1.0 - s) / (2.0 * p),
        ],
        phases: [0.0; 4],
    }
}

pub fn sample_level_set(params: YpqParams, count: usize, seed: u64) -> Vec<LevelSetSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let (t, s) = (rng.random::<f64>(), rng.random::<f64>());
            LevelSetSample {
                phases: std::array::from_fn(|_| rng.random::<f64>() * TAU),
                ..level_set_point(params, t, s)
            }
        })
        .collect()
}

/// Squared-moduli vertices of the level-set polytope, exact.
fn polytope_vertices(params: YpqParams) -> [[Rational64; 4]; 4] {
    let (p, q) = params.signed();
    let zero = Rational64::from_integer(0);
    let first = [
        [Rational64::new(1, 2 * (p - q)), zero],
        [zero, Rational64::new(1, 2 * (p + q))],
    ];
    let second = [[Rational64::new(1, 2 * p), zero], [zero, Rational64::new(1, 2 * p)]];
    std::array::from_fn(|k| {
        let (a, b) = (first[k / 2], second[k % 2]);
        [a[0], a[1], b[0], b[1]]
    })
}

/// Exact minimum of `Σ a_j |z_j|²` over the level set, attained at a vertex
/// because the functional is linear on a product of segments.
pub fn exact_minimum(params: YpqParams, a: [i64; 4]) -> Rational64 {
    polytope_vertices(params)
        .iter()
        .map(|v| v.iter().zip(a).map(|(m, c)| m * c).sum::<Rational64>())
        .min()
        .expect("four vertices")
}

/// Floating-point counterpart of [`exact_minimum`] for real coefficients.
pub fn vertex_minimum(params: YpqParams, a: [f64; 4]) -> f64 {
    polytope_vertices(params)
        .iter()
        .map(|v| {
            v.iter()
                .zip(a)
                .map(|(m, c)| c * (*m.numer() as f64) / (*m.denom() as f64))
                .sum::<f64>()
        })
        .fold(f64::INFINITY, f64::min)
}

fn rational_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Sampled and exact positivity of `η(ξ)` for an integer generator `ξ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Positivity {
    pub check: CheckResult,
    pub sampled_minimum: f64,
    pub exact_minimum: f64,
}

/// Positivity of `η(a)` on level-set samples.
///
/// The residual is `max(0, −min)`; `passed` additionally requires the sampled
/// minimum to be strictly positive.
pub fn positivity(name: &str, params: YpqParams, a: [i64; 4], count: usize, seed: u64) -> Positivity {
    let coefficients = a.map(|c| c as f64);
    let samples = sample_level_set(params, count, seed);
    let (sampled_minimum, witness) = samples
        .iter()
        .map(|s| (pair(&coefficients, &s.moduli), s.moduli))
        .min_by(|x, y| x.0.total_cmp(&y.0))
        .map_or((f64::INFINITY, None), |(v, m)| (v, Some(m.to_vec())));
    let exact = exact_minimum(params, a);
    let mut check = CheckResult::new(name, (-sampled_minimum).max(0.0), count, 0.0)
        .with_witness(witness)
        .with_detail(format!("sampled minimum {sampled_minimum:e}, exact minimum {exact}"));
    check.passed = sampled_minimum > 0.0;
    Positivity {
        check,
        sampled_minimum,
        exact_minimum: rational_to_f64(exact),
    }
}

/// `η(R)` for the Reeb generator `(p+q, p−q, p, p)`.
pub fn reeb_positivity(params: YpqParams, count: usize, seed: u64) -> Positivity {
    positivity("reeb_positivity", params, reeb_generator(params), count, seed)
}

/// Membership of `a` in the Sasaki cone, decided by the exact vertex minimum.
/// Only generators with `a3 = a4` are accepted.
pub fn sasaki_cone_membership(params: YpqParams, a: [f64; 4]) -> Result<(bool, f64)> {
    if a[2] != a[3] {
        return Err(Error::InvalidParameter(format!(
            "Sasaki cone membership needs a3 = a4, got {} and {}",
            a[2], a[3]
        )));
    }
    let minimum = vertex_minimum(params, a);
    Ok((minimum > 0.0, minimum))
}

/// Change of torus basis from `(φ, θ)` to `(ψ, χ)`.
///
/// Weights are stored per coordinate (rows `z1..z4`, columns the two torus
/// parameters) so that `reduced · basis_change = original`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Reparametrization {
    pub basis_change: [[i64; 2]; 2],
    pub original: [[i64; 2]; 4],
    pub reduced: [[i64; 2]; 4],
}

impl Reparametrization {
    pub fn determinant(&self) -> i64 {
        let b = &self.basis_change;
        b[0][0] * b[1][1] - b[0][1] * b[1][0]
    }

    /// `reduced · basis_change`, exact.
    pub fn product(&self) -> [[i64; 2]; 4] {
        let b = &self.basis_change;
        self.reduced
            .map(|row| [row[0] * b[0][0] + row[1] * b[1][0], row[0] * b[0][1] + row[1] * b[1][1]])
    }

    pub fn holds(&self) -> bool {
        self.product() == self.original
    }

    /// Original weights as a two-row matrix (φ row, θ row).
    pub fn original_matrix(&self) -> WeightMatrix {
        WeightMatrix {
            rows: (0..2).map(|k| self.original.map(|c| c[k])).collect(),
        }
    }
}

/// The `φ` row is the Reeb generator and the `θ` row the circle weights.
pub fn reparametrize_torus(params: YpqParams) -> Reparametrization {
    let (p, q) = params.signed();
    let phi = reeb_generator(params);
    let theta = circle_weights(params);
    Reparametrization {
        basis_change: [[1, -1], [p - q, p + q]],
        original: std::array::from_fn(|i| [phi[i], theta[i]]),
        reduced: [[2 * q, 1], [0, 1], [p, 0], [p, 0]],
    }
}

/// Monomials in `(z1, z2, z3, z4)` used as homogeneous coordinates on the
/// quotient, with their `(τ, ζ)` bidegrees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomogeneousCoordinates {
    /// `(τ, ζ)` weight of each `z_i` under the complexified action.
    pub weights: [[u64; 2]; 4],
    pub y_exponents: [[u64; 4]; 3],
    pub w_exponents: [[u64; 4]; 2],
    pub relation_left: [u64; 4],
    pub relation_right: [u64; 4],
}

fn bidegree(weights: &[[u64; 2]; 4], exponents: &[u64; 4]) -> [u64; 2] {
    let mut out = [0, 0];
    for (w, e) in weights.iter().zip(exponents) {
        out[0] += w[0] * e;
        out[1] += w[1] * e;
    }
    out
}

fn add_exponents(a: [u64; 4], b: [u64; 4], scale_a: u64) -> [u64; 4] {
    std::array::from_fn(|i| scale_a * a[i] + b[i])
}

impl HomogeneousCoordinates {
    pub fn y_bidegrees(&self) -> Vec<[u64; 2]> {
        self.y_exponents.iter().map(|e| bidegree(&self.weights, e)).collect()
    }

    pub fn w_bidegrees(&self) -> Vec<[u64; 2]> {
        self.w_exponents.iter().map(|e| bidegree(&self.weights, e)).collect()
    }
}

/// Homogeneous coordinates for odd `p`.
pub fn homogeneous_coordinates(params: YpqParams) -> Result<HomogeneousCoordinates> {
    let (p, q) = (params.p, params.q);
    if p % 2 == 0 {
        return Err(Error::Precondition(format!(
            "homogeneous coordinates use the odd-p action, got p = {p}"
        )));
    }
    let w_exponents = [[0, 0, 1, 0], [0, 0, 0, 1]];
    let y_exponents = [[0, p, 2 * q, 0], [0, p, 0, 2 * q], [p, 0, 0, 0]];
    Ok(HomogeneousCoordinates {
        weights: [[2 * q, 1], [0, 1], [p, 0], [p, 0]],
        relation_left: add_exponents(w_exponents[0], y_exponents[1], 2 * q),
        relation_right: add_exponents(w_exponents[1], y_exponents[0], 2 * q),
        w_exponents,
        y_exponents,
    })
}

/// Counts failures of bidegree sharing and of the monomial relation.
pub fn homogeneous_coordinate_check(params: YpqParams) -> Result<CheckResult> {
    let coords = homogeneous_coordinates(params)?;
    let uniform = |degrees: Vec<[u64; 2]>| degrees.windows(2).filter(|w| w[0] != w[1]).count();
    let y = coords.y_bidegrees();
    let w = coords.w_bidegrees();
    let failures = uniform(y.clone())
        + uniform(w.clone())
        + usize::from(coords.relation_left != coords.relation_right);
    Ok(CheckResult::new("homogeneous_coordinates", failures as f64, 1, 0.0).with_detail(format!(
        "y bidegree {:?}, w bidegree {:?}, relation exponents {:?}",
        y[0], w[0], coords.relation_left
    )))
}

/// Orbifold Hirzebruch surface `(S_k, Δ_m)` of the quasi-regular quotient.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HirzebruchData {
    pub surface_index: u64,
    pub ramification: u64,
    pub branch: String,
}

pub fn hirzebruch_data(params: YpqParams) -> Result<HirzebruchData> {
    params.require_free()?;
    let (p, q) = (params.p, params.q);
    let (surface_index, ramification) = if p % 2 == 1 {
        (2 * q, p)
    } else {
        assert!(q % 2 == 1, "coprime pair with even p has odd q");
        (q, p / 2)
    };
    Ok(HirzebruchData {
        surface_index,
        ramification,
        branch: format!("(1 - 1/{ramification})(E + F)"),
    })
}

/// Weighted projective factor and the coefficients of the quotient Kähler form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct QuotientKahler {
    pub weights: (u64, u64),
    pub omega: (u64, u64),
}

pub fn quotient_kahler_data(params: YpqParams) -> Result<QuotientKahler> {
    params.require_free()?;
    let (p, q) = (params.p, params.q);
    let (minus, plus) = (p - q, p + q);
    let weights = if minus % 2 == 1 {
        (minus, plus)
    } else {
        (minus / 2, plus / 2)
    };
    let g = minus.gcd(&plus);
    assert!(g == 1 || g == 2, "gcd(p - q, p + q) is 1 or 2 for coprime pairs");
    assert_eq!(g == 2, p % 2 == 1 && q % 2 == 1, "gcd 2 exactly when p and q are odd");
    Ok(QuotientKahler {
        weights,
        omega: (p, g),
    })
}

/// Two coprime pairs give equivalent contact structures iff their `p` agree.
pub fn classify(a: YpqParams, b: YpqParams) -> Result<bool> {
    a.require_free()?;
    b.require_free()?;
    Ok(a.p == b.p)
}

/// Euler totient by trial-division factorization.
pub fn totient(n: u64) -> u64 {
    let mut result = n;
    let mut rest = n;
    let mut factor = 2;
    while factor * factor <= rest {
        if rest.is_multiple_of(factor) {
            while rest.is_multiple_of(factor) {
                rest /= factor;
            }
            result -= result / factor;
        }
        factor += 1;
    }
    if rest > 1 {
        result -= result / rest;
    }
    result
}

/// Everything computed for one coprime pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YpqReport {
    pub p: u64,
    pub q: u64,
    pub circle_weights: [i64; 4],
    pub weight_sum: i64,
    pub free: bool,
    pub reeb_generator: [i64; 4],
    /// Per-coordinate `(ψ, χ)` weights after the basis change.
    pub reparametrized_weights: [[i64; 2]; 4],
    pub basis_change: [[i64; 2]; 2],
    pub hirzebruch: HirzebruchData,
    pub quotient_kahler: QuotientKahler,
    /// Exact minimum of `η(R)` over the level set.
    pub reeb_minimum: f64,
    pub phi_p: u64,
    /// Lower bound on conjugacy classes of maximal tori, equal to the class size.
    pub torus_classes_lower_bound: u64,
    pub equivalence_class_key: u64,
}

pub fn ypq_report(params: YpqParams) -> Result<YpqReport> {
    params.require_free()?;
    let weights = circle_weights(params);
    let reparam = reparametrize_torus(params);
    let phi = totient(params.p);
    Ok(YpqReport {
        p: params.p,
        q: params.q,
        circle_weights: weights,
        weight_sum: weights.iter().sum(),
        free: true,
        reeb_generator: reeb_generator(params),
        reparametrized_weights: reparam.reduced,
        basis_change: reparam.basis_change,
        hirzebruch: hirzebruch_data(params)?,
        quotient_kahler: quotient_kahler_data(params)?,
        reeb_minimum: rational_to_f64(exact_minimum(params, reeb_generator(params))),
        phi_p: phi,
        torus_classes_lower_bound: phi,
        equivalence_class_key: params.p,
    })
}

/// All coprime pairs with a common `p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceClass {
    pub p: u64,
    pub phi_p: u64,
    pub members: Vec<YpqReport>,
}

pub fn enumerate(p_max: u64) -> Result<Vec<EquivalenceClass>> {
    if p_max < 2 {
        return Err(Error::InvalidParameter(format!("enumeration needs p_max >= 2, got {p_max}")));
    }
    (2..=p_max)
        .map(|p| {
            let members = (1..p)
                .filter(|q| q.gcd(&p) == 1)
                .map(|q| ypq_report(YpqParams { p, q }))
                .collect::<Result<Vec<_>>>()?;
            Ok(EquivalenceClass {
                p,
                phi_p: totient(p),
                members,
            })
        })
        .collect()
}

/// Coprime pairs `1 ≤ q < p ≤ p_max`.
pub fn coprime_pairs(p_max: u64) -> Vec<YpqParams> {
    (2..=p_max)
        .flat_map(|p| (1..p).filter(move |q| q.gcd(&p) == 1).map(move |q| YpqParams { p, q }))
        .collect()
}
