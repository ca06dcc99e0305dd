//! Ready-made contact systems with the facts they are expected to satisfy.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::chart::{Chart, CoordRange};
use crate::check::{max_abs, sampled_check, CheckConfig, CheckResult};
use crate::contact::{
    classify_system, hamiltonian_contract, independence_rank, involution_table, is_contact_form,
    is_good, isotropy_defect, reeb_contract, ContactSystem,
};
use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::forms::{share, DifferentialForm, VectorField};
use crate::symplectization::{build_cone, ConeSystem};

/// Addressable model identifiers.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKey {
    /// `dz − Σ p_i dq_i` on `(z, p, q)`.
    Darboux(usize),
    /// `dz − Σ y_i dx_i` on `(x, y, z)` with the rotation integrals.
    Heisenberg(usize),
    /// Canonical form on the unit cosphere bundle of a torus, chart `p_0 > 0`.
    Cosphere(usize),
    /// Darboux pair `h = −y`, `f = z`: integrable, not completely good.
    NotCompletelyGood,
    /// Weighted Reeb field on an odd sphere, one chart.
    SphereWeighted(Vec<u32>),
}

impl ModelKey {
    /// Keys run by `verify all`.
    pub fn all() -> Vec<ModelKey> {
        vec![
            ModelKey::Darboux(1),
            ModelKey::Darboux(2),
            ModelKey::Heisenberg(1),
            ModelKey::Heisenberg(2),
            ModelKey::Cosphere(1),
            ModelKey::Cosphere(2),
            ModelKey::NotCompletelyGood,
            ModelKey::SphereWeighted(vec![1, 2]),
            ModelKey::SphereWeighted(vec![1, 2, 3]),
        ]
    }
}

impl fmt::Display for ModelKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKey::Darboux(n) => write!(f, "darboux:{n}"),
            ModelKey::Heisenberg(n) => write!(f, "heisenberg:{n}"),
            ModelKey::Cosphere(n) => write!(f, "cosphere:{n}"),
            ModelKey::NotCompletelyGood => write!(f, "not_completely_good"),
            ModelKey::SphereWeighted(w) => {
                let parts: Vec<String> = w.iter().map(u32::to_string).collect();
                write!(f, "sphere:{}", parts.join(","))
            }
        }
    }
}

impl FromStr for ModelKey {
    type Err = Error;

    /// Accepts `family:args` or `family(args)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, args) = if let Some((f, a)) = s.split_once(':') {
            (f, Some(a))
        } else if let Some(open) = s.find('(') {
            let inner = s[open + 1..].strip_suffix(')').ok_or_else(|| {
                Error::InvalidParameter(format!("unbalanced parentheses in model key `{s}`"))
            })?;
            (&s[..open], Some(inner))
        } else {
            (s, None)
        };
        let integers = |what: &str| -> Result<Vec<u32>> {
            let a = args.ok_or_else(|| Error::InvalidParameter(format!("model `{what}` needs arguments")))?;
            a.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::InvalidParameter(format!("bad integer `{t}` in model key `{s}`")))
                })
                .collect()
        };
        let dimension = |what: &str| -> Result<usize> {
            match integers(what)?.as_slice() {
                [n] if *n >= 1 => Ok(*n as usize),
                _ => Err(Error::InvalidParameter(format!(
                    "model `{what}` takes one integer n >= 1"
                ))),
            }
        };
        match family {
            "darboux" => Ok(ModelKey::Darboux(dimension(family)?)),
            "heisenberg" => Ok(ModelKey::Heisenberg(dimension(family)?)),
            "cosphere" | "cosphere_torus" => Ok(ModelKey::Cosphere(dimension(family)?)),
            "not_completely_good" if args.is_none() => Ok(ModelKey::NotCompletelyGood),
            "sphere" | "sphere_weighted" => {
                let weights = integers(family)?;
                if weights.len() < 2 || weights.contains(&0) {
                    return Err(Error::InvalidParameter(
                        "sphere weights: at least two positive integers".into(),
                    ));
                }
                Ok(ModelKey::SphereWeighted(weights))
            }
            _ => Err(Error::InvalidParameter(format!("unknown model key `{s}`"))),
        }
    }
}

/// Where an expected fact comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Stated in the reference literature for this model.
    Reference,
    /// Computed by hand or by an independent route.
    Derived,
    /// Follows from definitions alone.
    Elementary,
}

/// Expected integrability verdicts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedClassification {
    pub completely_integrable: bool,
    pub good: bool,
    pub completely_good: bool,
    pub reeb_type: bool,
    /// Required fraction of samples attaining rank `n + 1`, when checked.
    pub min_rank_fraction: Option<f64>,
}

/// A machine-checkable statement about a model.
#[derive(Clone)]
pub enum Expectation {
    Reeb(VectorField),
    HamiltonianField {
        h: ScalarExpr,
        field: VectorField,
    },
    Bracket {
        left: VectorField,
        right: VectorField,
        expected: VectorField,
    },
    LieDerivative {
        field: VectorField,
        expected: DifferentialForm,
    },
    /// `η ∧ £_X η` vanishes nowhere on the samples.
    NotContactTransformation(VectorField),
    IsotropyDefect {
        h: ScalarExpr,
        f: ScalarExpr,
        point: Vec<f64>,
        value: f64,
    },
    JacobiBracket {
        f: ScalarExpr,
        g: ScalarExpr,
        expected: ScalarExpr,
    },
    Good {
        h: ScalarExpr,
        expected: bool,
    },
    Lift {
        h: ScalarExpr,
        expected: VectorField,
    },
    ConeHamiltonian {
        h: ScalarExpr,
        expected: ScalarExpr,
    },
    Omega(DifferentialForm),
    Classification(ExpectedClassification),
    Involution(Vec<ScalarExpr>),
    Rank {
        functions: Vec<ScalarExpr>,
        max_rank: usize,
        min_fraction: f64,
    },
    CommutingLifts {
        functions: Vec<ScalarExpr>,
        rank: usize,
    },
}

#[derive(Clone)]
pub struct ExpectedFact {
    pub name: String,
    pub origin: Origin,
    pub expectation: Expectation,
}

#[derive(Clone)]
pub struct ModelDescriptor {
    pub key: ModelKey,
    pub description: String,
    pub system: ContactSystem,
    pub cone: ConeSystem,
    pub facts: Vec<ExpectedFact>,
}

struct Builder {
    system: ContactSystem,
    cone: ConeSystem,
    facts: Vec<ExpectedFact>,
}

impl Builder {
    fn new(chart: Chart, eta: &str) -> Result<Self> {
        let chart = share(chart);
        let system = ContactSystem::parse(&chart, eta)?;
        let cone = build_cone(&system)?;
        Ok(Self {
            system,
            cone,
            facts: Vec::new(),
        })
    }

    fn f(&self, source: &str) -> ScalarExpr {
        self.system
            .parse_function(source)
            .unwrap_or_else(|e| panic!("model expression `{source}`: {e}"))
    }

    fn field(&self, components: &[String]) -> VectorField {
        VectorField::parse(self.system.chart(), components)
            .unwrap_or_else(|e| panic!("model field {components:?}: {e}"))
    }

    fn cone_field(&self, components: &[String]) -> VectorField {
        VectorField::parse(self.cone.chart(), components)
            .unwrap_or_else(|e| panic!("model cone field {components:?}: {e}"))
    }

    fn basis(&self, coord: &str) -> VectorField {
        let index = self.system.chart().index_of(coord).expect("model coordinate");
        VectorField::basis(self.system.chart(), index)
    }

    fn fact(&mut self, name: impl Into<String>, origin: Origin, expectation: Expectation) {
        self.facts.push(ExpectedFact {
            name: name.into(),
            origin,
            expectation,
        });
    }

    fn finish(self, key: ModelKey, description: String) -> ModelDescriptor {
        let cone = build_cone(&self.system).expect("cone of a checked system");
        ModelDescriptor {
            key,
            description,
            system: self.system,
            cone,
            facts: self.facts,
        }
    }
}

/// Component list with `value` at the named coordinates and `0` elsewhere.
fn components(chart_coords: &[String], entries: &[(&str, String)]) -> Vec<String> {
    chart_coords
        .iter()
        .map(|c| {
            entries
                .iter()
                .find(|(name, _)| name == c)
                .map_or_else(|| "0".to_string(), |(_, v)| v.clone())
        })
        .collect()
}

pub fn build_model(key: &ModelKey) -> Result<ModelDescriptor> {
    match key {
        ModelKey::Darboux(n) => darboux(*n),
        ModelKey::Heisenberg(n) => heisenberg(*n),
        ModelKey::Cosphere(n) => cosphere(*n),
        ModelKey::NotCompletelyGood => not_completely_good(),
        ModelKey::SphereWeighted(weights) => sphere_weighted(weights),
    }
}

fn check_dimension(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("model dimension n must be >= 1".into()));
    }
    Ok(())
}

fn darboux(n: usize) -> Result<ModelDescriptor> {
    check_dimension(n)?;
    let mut names = vec!["z".to_string()];
    names.extend((1..=n).map(|i| format!("p{i}")));
    names.extend((1..=n).map(|i| format!("q{i}")));
    let eta: Vec<String> = (1..=n).map(|i| format!(" - p{i}*dq{i}")).collect();
    let mut b = Builder::new(Chart::new(format!("darboux:{n}"), &names), &format!("dz{}", eta.concat()))?;

    let reeb = b.basis("z");
    b.fact("reeb_closed_form", Origin::Reference, Expectation::Reeb(reeb.clone()));
    for i in 1..=n {
        let (p, q) = (format!("p{i}"), format!("q{i}"));
        let shear = b.field(&components(&names, &[(&p, "1".into()), ("z", q.clone())]));
        let dq = b.basis(&q);
        let minus_reeb = b.field(&components(&names, &[("z", "-1".into())]));
        let zero = VectorField::zero(b.system.chart());
        b.fact(
            format!("bracket[d{p} + {q} dz, d{q}] = -dz"),
            Origin::Reference,
            Expectation::Bracket {
                left: shear.clone(),
                right: dq.clone(),
                expected: minus_reeb,
            },
        );
        b.fact(
            format!("bracket[d{p} + {q} dz, dz] = 0"),
            Origin::Elementary,
            Expectation::Bracket {
                left: shear.clone(),
                right: reeb.clone(),
                expected: zero.clone(),
            },
        );
        b.fact(
            format!("bracket[d{q}, dz] = 0"),
            Origin::Elementary,
            Expectation::Bracket {
                left: dq,
                right: reeb.clone(),
                expected: zero.clone(),
            },
        );
        let dp = b.basis(&p);
        let q_index = b.system.chart().index_of(&q).expect("q coordinate");
        let minus_dq = DifferentialForm::basis(b.system.chart(), &[q_index])?.scale_const(-1.0);
        b.fact(
            format!("lie[d{p}](eta) = -d{q}"),
            Origin::Reference,
            Expectation::LieDerivative {
                field: dp.clone(),
                expected: minus_dq,
            },
        );
        b.fact(
            format!("lie[d{p} + {q} dz](eta) = 0"),
            Origin::Reference,
            Expectation::LieDerivative {
                field: shear,
                expected: DifferentialForm::zero(b.system.chart(), 1)?,
            },
        );
        b.fact(
            format!("eta ^ lie[d{p}](eta) != 0"),
            Origin::Reference,
            Expectation::NotContactTransformation(dp),
        );
    }
    Ok(b.finish(
        ModelKey::Darboux(n),
        format!("standard contact form dz - sum p_i dq_i on R^{}", 2 * n + 1),
    ))
}

fn heisenberg(n: usize) -> Result<ModelDescriptor> {
    check_dimension(n)?;
    let mut names: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    names.extend((1..=n).map(|i| format!("y{i}")));
    names.push("z".into());
    let eta: Vec<String> = (1..=n).map(|i| format!(" - y{i}*dx{i}")).collect();
    let mut b = Builder::new(
        Chart::new(format!("heisenberg:{n}"), &names),
        &format!("dz{}", eta.concat()),
    )?;
    let one = b.f("1");
    let rotations: Vec<ScalarExpr> = (1..=n).map(|i| b.f(&format!("(x{i}^2 + y{i}^2)/2"))).collect();
    b.system = b
        .system
        .clone()
        .with_hamiltonian(one.clone())
        .with_integrals(rotations.clone());

    b.fact("reeb_closed_form", Origin::Reference, Expectation::Reeb(b.basis("z")));
    for (i, h) in rotations.iter().enumerate() {
        let j = i + 1;
        let (x, y) = (format!("x{j}"), format!("y{j}"));
        let field = b.field(&components(
            &names,
            &[
                (&x, format!("-{y}")),
                (&y, x.clone()),
                ("z", format!("({x}^2 - {y}^2)/2")),
            ],
        ));
        b.fact(
            format!("hamiltonian_field[h{j}]"),
            Origin::Derived,
            Expectation::HamiltonianField {
                h: h.clone(),
                field,
            },
        );
    }
    let mut family = vec![one.clone()];
    family.extend(rotations.iter().cloned());
    b.fact("involution[1, h]", Origin::Derived, Expectation::Involution(family.clone()));
    b.fact(
        "classification",
        Origin::Reference,
        Expectation::Classification(ExpectedClassification {
            completely_integrable: true,
            good: true,
            completely_good: true,
            reeb_type: true,
            min_rank_fraction: Some(0.99),
        }),
    );
    let mut degenerate = family.clone();
    degenerate[1] = one.clone();
    b.fact(
        "rank[1, 1, h2..]",
        Origin::Elementary,
        Expectation::Rank {
            functions: degenerate,
            max_rank: n,
            min_fraction: 0.99,
        },
    );
    b.fact(
        "commuting_lifts[1, h]",
        Origin::Derived,
        Expectation::CommutingLifts {
            functions: family,
            rank: n + 1,
        },
    );
    Ok(b.finish(
        ModelKey::Heisenberg(n),
        format!("Heisenberg group of dimension {} with rotation integrals", 2 * n + 1),
    ))
}

fn cosphere(n: usize) -> Result<ModelDescriptor> {
    check_dimension(n)?;
    let mut names: Vec<String> = (0..=n).map(|i| format!("x{i}")).collect();
    names.extend((1..=n).map(|i| format!("p{i}")));
    let squares: Vec<String> = (1..=n).map(|i| format!(" - p{i}^2")).collect();
    let p0 = format!("sqrt(1{})", squares.concat());
    let mut chart = Chart::new(format!("cosphere:{n}"), &names).with_domain(&format!("1{}", squares.concat()))?;
    for name in &names {
        let range = if name.starts_with('x') {
            CoordRange::uniform(-PI, PI)
        } else {
            CoordRange::uniform(-1.0, 1.0)
        };
        chart = chart.with_range(name, range);
    }
    let eta: Vec<String> = (1..=n).map(|i| format!(" + p{i}*dx{i}")).collect();
    let mut b = Builder::new(chart, &format!("{p0}*dx0{}", eta.concat()))?;
    let one = b.f("1");
    let momenta: Vec<ScalarExpr> = (1..=n).map(|i| b.f(&format!("p{i}"))).collect();
    b.system = b
        .system
        .clone()
        .with_hamiltonian(one.clone())
        .with_integrals(momenta.clone());

    let mut reeb = vec![("x0", p0.clone())];
    let xs: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    for (i, x) in xs.iter().enumerate() {
        reeb.push((x.as_str(), format!("p{}", i + 1)));
    }
    let reeb = b.field(&components(&names, &reeb));
    b.fact("reeb_closed_form", Origin::Reference, Expectation::Reeb(reeb));
    b.fact(
        "hamiltonian_field[p0] = dx0",
        Origin::Reference,
        Expectation::HamiltonianField {
            h: b.f(&p0),
            field: b.basis("x0"),
        },
    );
    for (i, p) in momenta.iter().enumerate() {
        b.fact(
            format!("hamiltonian_field[p{}] = dx{}", i + 1, i + 1),
            Origin::Reference,
            Expectation::HamiltonianField {
                h: p.clone(),
                field: b.basis(&format!("x{}", i + 1)),
            },
        );
    }
    let mut family = vec![one.clone()];
    family.extend(momenta.iter().cloned());
    b.fact(
        "rank[1, p1..pn]",
        Origin::Reference,
        Expectation::Rank {
            functions: family.clone(),
            max_rank: n + 1,
            min_fraction: 1.0,
        },
    );
    let mut overfull = vec![one.clone(), b.f(&p0)];
    overfull.extend(momenta.iter().cloned());
    b.fact(
        "rank[1, p0, p1..pn]",
        Origin::Reference,
        Expectation::Rank {
            functions: overfull,
            max_rank: n + 1,
            min_fraction: 1.0,
        },
    );
    b.fact(
        "classification",
        Origin::Derived,
        Expectation::Classification(ExpectedClassification {
            completely_integrable: true,
            good: true,
            completely_good: true,
            reeb_type: true,
            min_rank_fraction: Some(1.0),
        }),
    );
    Ok(b.finish(
        ModelKey::Cosphere(n),
        format!("unit cosphere bundle of T^{}, chart p0 > 0", n + 1),
    ))
}

fn not_completely_good() -> Result<ModelDescriptor> {
    let chart = Chart::new("not_completely_good", &["x", "y", "z"]);
    let mut b = Builder::new(chart, "dz - y*dx")?;
    let h = b.f("-y");
    let f = b.f("z");
    b.system = b.system.clone().with_hamiltonian(h.clone()).with_integrals(vec![f.clone()]);
    let s = |v: &[&str]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>();

    b.fact("reeb_closed_form", Origin::Reference, Expectation::Reeb(b.basis("z")));
    b.fact(
        "hamiltonian_field[-y] = dx",
        Origin::Reference,
        Expectation::HamiltonianField {
            h: h.clone(),
            field: b.basis("x"),
        },
    );
    b.fact(
        "hamiltonian_field[z] = y dy + z dz",
        Origin::Reference,
        Expectation::HamiltonianField {
            h: f.clone(),
            field: b.field(&s(&["0", "y", "z"])),
        },
    );
    b.fact(
        "isotropy_defect(1,2,3) = 2",
        Origin::Reference,
        Expectation::IsotropyDefect {
            h: h.clone(),
            f: f.clone(),
            point: vec![1.0, 2.0, 3.0],
            value: 2.0,
        },
    );
    b.fact(
        "jacobi_bracket{-y, z} = 0",
        Origin::Reference,
        Expectation::JacobiBracket {
            f: h.clone(),
            g: f.clone(),
            expected: b.f("0"),
        },
    );
    b.fact(
        "jacobi_bracket{1, z} = 1",
        Origin::Derived,
        Expectation::JacobiBracket {
            f: b.f("1"),
            g: f.clone(),
            expected: b.f("1"),
        },
    );
    b.fact(
        "good[-y]",
        Origin::Reference,
        Expectation::Good {
            h: h.clone(),
            expected: true,
        },
    );
    b.fact(
        "not_good[z]",
        Origin::Reference,
        Expectation::Good {
            h: f.clone(),
            expected: false,
        },
    );
    b.fact(
        "lift[-y] = dx",
        Origin::Reference,
        Expectation::Lift {
            h: h.clone(),
            expected: b.cone_field(&s(&["1", "0", "0", "0"])),
        },
    );
    b.fact(
        "lift[z] = y dy + z dz - r/2 dr",
        Origin::Reference,
        Expectation::Lift {
            h: f.clone(),
            expected: b.cone_field(&s(&["0", "y", "z", "-r/2"])),
        },
    );
    let cone_chart = b.cone.chart().clone();
    let cone_expr = |src: &str| cone_chart.parse(src).expect("cone expression");
    b.fact(
        "cone_hamiltonian[-y] = -r^2 y",
        Origin::Reference,
        Expectation::ConeHamiltonian {
            h: h.clone(),
            expected: cone_expr("-y*r^2"),
        },
    );
    b.fact(
        "cone_hamiltonian[z] = r^2 z",
        Origin::Reference,
        Expectation::ConeHamiltonian {
            h: f.clone(),
            expected: cone_expr("r^2*z"),
        },
    );
    // r^2 dx^dy + 2r dr^(dz - y dx), assembled from basis forms
    let dx_dy = DifferentialForm::basis(&cone_chart, &[0, 1])?.scale(&cone_expr("r^2"));
    let dr_dz = DifferentialForm::basis(&cone_chart, &[3, 2])?.scale(&cone_expr("2*r"));
    let dr_dx = DifferentialForm::basis(&cone_chart, &[3, 0])?.scale(&cone_expr("-2*r*y"));
    b.fact(
        "omega = r^2 dx^dy + 2r dr^(dz - y dx)",
        Origin::Reference,
        Expectation::Omega(dx_dy.add(&dr_dz)?.add(&dr_dx)?),
    );
    b.fact(
        "classification",
        Origin::Reference,
        Expectation::Classification(ExpectedClassification {
            completely_integrable: true,
            good: true,
            completely_good: false,
            reeb_type: false,
            min_rank_fraction: None,
        }),
    );
    b.fact(
        "commuting_lifts[-y, z]",
        Origin::Derived,
        Expectation::CommutingLifts {
            functions: vec![h, f],
            rank: 2,
        },
    );
    Ok(b.finish(
        ModelKey::NotCompletelyGood,
        "dz - y dx with h = -y and first integral z".into(),
    ))
}

fn sphere_weighted(weights: &[u32]) -> Result<ModelDescriptor> {
    if weights.len() < 2 || weights.contains(&0) {
        return Err(Error::InvalidParameter(
            "sphere weights: at least two positive integers".into(),
        ));
    }
    let n = weights.len() - 1;
    let mut names = vec!["t".to_string()];
    for j in 1..=n {
        names.push(format!("x{j}"));
        names.push(format!("y{j}"));
    }
    let radii: Vec<String> = (1..=n).map(|j| format!("(x{j}^2 + y{j}^2)")).collect();
    let rest = format!("(1 - {})", radii.join(" - "));
    let chart = Chart::new(
        format!("sphere:{}", weights.iter().map(u32::to_string).collect::<Vec<_>>().join(",")),
        &names,
    )
    .with_domain(&rest)?
    .with_all_ranges(CoordRange::uniform(-1.0, 1.0))
    .with_range("t", CoordRange::uniform(-PI, PI));
    let weighted: Vec<String> = (1..=n)
        .map(|j| format!(" + {}*{}", weights[j], radii[j - 1]))
        .collect();
    let denominator = format!("({}*{rest}{})", weights[0], weighted.concat());
    let rotations: Vec<String> = (1..=n).map(|j| format!(" + x{j}*dy{j} - y{j}*dx{j}")).collect();
    let eta = format!("({rest}*dt{})/{denominator}", rotations.concat());
    let mut b = Builder::new(chart, &eta)?;

    let mut entries = vec![("t", weights[0].to_string())];
    let labels: Vec<(String, String)> = (1..=n).map(|j| (format!("x{j}"), format!("y{j}"))).collect();
    for (j, (x, y)) in labels.iter().enumerate() {
        let a = weights[j + 1];
        entries.push((x.as_str(), format!("-{a}*{y}")));
        entries.push((y.as_str(), format!("{a}*{x}")));
    }
    let reeb = b.field(&components(&names, &entries));
    b.fact("reeb_closed_form", Origin::Derived, Expectation::Reeb(reeb));
    let key = ModelKey::SphereWeighted(weights.to_vec());
    Ok(b.finish(
        key,
        format!("weighted Reeb field on S^{} with weights {weights:?}", 2 * n + 1),
    ))
}

impl ModelDescriptor {
    /// Standard suite plus every expected fact, sorted by check name.
    pub fn verify(&self, config: &CheckConfig) -> Result<Vec<CheckResult>> {
        let mut results = vec![
            is_contact_form(&self.system, config)?,
            reeb_contract(&self.system, config)?,
            self.cone.closure_check(config)?,
            self.cone.homogeneity_check(config)?,
            self.cone.nondegeneracy_check(config)?,
        ];
        let mut functions: Vec<ScalarExpr> = self.system.hamiltonian().into_iter().cloned().collect();
        functions.extend(self.system.integrals().iter().cloned());
        for f in &functions {
            for r in hamiltonian_contract(&self.system, f, config)? {
                let name = format!("{}[{f}]", r.name);
                results.push(r.renamed(name));
            }
        }
        for fact in &self.facts {
            results.push(self.verify_fact(fact, config)?);
        }
        results.sort_by(|a, b| a.name.cmp(&b.name));
        Ok(results)
    }

    pub fn fact(&self, name: &str) -> Option<&ExpectedFact> {
        self.facts.iter().find(|f| f.name == name)
    }

    pub fn verify_fact(&self, fact: &ExpectedFact, config: &CheckConfig) -> Result<CheckResult> {
        let sys = &self.system;
        let tol = config.tol("expected");
        let base_points = || config.points(sys.chart());
        let field_distance = |points: &[Vec<f64>], got: &dyn Fn(&[f64]) -> Result<Vec<f64>>, want: &VectorField| {
            sampled_check(fact.name.clone(), points, tol, |p| {
                let g = got(p)?;
                let w = want.eval(p)?;
                Ok(max_abs(g.iter().zip(&w).map(|(a, b)| a - b)))
            })
        };
        let result = match &fact.expectation {
            Expectation::Reeb(field) => field_distance(&base_points()?, &|p| sys.reeb_at(p), field),
            Expectation::HamiltonianField { h, field } => {
                let xh = sys.hamiltonian_field(h.clone());
                field_distance(&base_points()?, &|p| xh.value_at(p), field)
            }
            Expectation::Bracket {
                left,
                right,
                expected,
            } => {
                let bracket = left.lie_bracket(right)?;
                field_distance(&base_points()?, &|p| bracket.eval(p), expected)
            }
            Expectation::LieDerivative { field, expected } => {
                let lie = sys.eta().lie_derivative(field)?;
                let diff = lie.sub(expected)?;
                sampled_check(fact.name.clone(), &base_points()?, tol, |p| diff.max_abs(p))
            }
            Expectation::NotContactTransformation(field) => {
                let lie = sys.eta().lie_derivative(field)?;
                let wedge = sys.eta().wedge(&lie)?;
                sampled_check(
                    fact.name.clone(),
                    &base_points()?,
                    1.0 / config.tol("contact"),
                    |p| Ok(1.0 / wedge.max_abs(p)?),
                )
            }
            Expectation::IsotropyDefect { h, f, point, value } => {
                let d = isotropy_defect(sys, h, f, point)?;
                let residual = (d.value - value).abs().max(d.identity_residual);
                CheckResult::new(fact.name.clone(), residual, 1, tol)
                    .with_witness(Some(point.clone()))
                    .with_detail(format!("value {}", d.value))
            }
            Expectation::JacobiBracket { f, g, expected } => {
                sampled_check(fact.name.clone(), &base_points()?, tol, |p| {
                    Ok(sys.jacobi_bracket_at(f, g, p)? - expected.eval(p)?)
                })
            }
            Expectation::Good { h, expected } => {
                let r = is_good(sys, h, config)?;
                verdict(&fact.name, &[(r.passed, *expected)], r.samples)
                    .with_detail(format!("max |R(h)| = {:e}", r.max_residual))
            }
            Expectation::Lift { h, expected } => {
                let lift = self.cone.lift_hamiltonian(h);
                let mut r = lift.matches(expected, config)?;
                for extra in [lift.invariance_check(config)?, lift.precondition_check(config)?] {
                    if extra.max_residual > r.max_residual {
                        r.max_residual = extra.max_residual;
                        r.witness = extra.witness;
                    }
                    r.passed &= extra.passed;
                }
                r.renamed(fact.name.clone())
            }
            Expectation::ConeHamiltonian { h, expected } => {
                let lift = self.cone.lift_hamiltonian(h);
                let potential = lift.cone_hamiltonian();
                let contraction = lift.cone_hamiltonian_check(config)?;
                let points = config.points(self.cone.chart())?;
                let value = sampled_check(fact.name.clone(), &points, tol, |p| {
                    Ok(potential.eval(p)? - expected.eval(p)?)
                });
                if contraction.max_residual > value.max_residual || !contraction.passed {
                    let mut r = contraction.renamed(fact.name.clone());
                    r.passed &= value.passed;
                    r
                } else {
                    value
                }
            }
            Expectation::Omega(expected) => {
                let diff = self.cone.omega().sub(expected)?;
                let points = config.points(self.cone.chart())?;
                sampled_check(fact.name.clone(), &points, tol, |p| diff.max_abs(p))
            }
            Expectation::Classification(want) => {
                let got = classify_system(sys, config)?;
                let mut pairs = vec![
                    (got.completely_integrable_witnessed, want.completely_integrable),
                    (got.good, want.good),
                    (got.completely_good, want.completely_good),
                    (got.reeb_type, want.reeb_type),
                    (got.strict_contact_fields, want.completely_good),
                ];
                if let Some(fraction) = want.min_rank_fraction {
                    pairs.push((
                        got.rank.max_rank == sys.n() + 1 && got.rank.fraction >= fraction,
                        true,
                    ));
                }
                verdict(&fact.name, &pairs, got.rank.samples).with_detail(format!(
                    "integrable={} good={} completely_good={} reeb_type={} rank={} on {:.4}",
                    got.completely_integrable_witnessed,
                    got.good,
                    got.completely_good,
                    got.reeb_type,
                    got.rank.max_rank,
                    got.rank.fraction
                ))
            }
            Expectation::Involution(functions) => {
                let table = involution_table(sys, functions, config)?;
                let worst = table
                    .iter()
                    .flatten()
                    .max_by(|a, b| a.max_residual.total_cmp(&b.max_residual))
                    .expect("non-empty table");
                CheckResult::new(fact.name.clone(), worst.max_residual, worst.samples, worst.tolerance)
                    .with_witness(worst.witness.clone())
            }
            Expectation::Rank {
                functions,
                max_rank,
                min_fraction,
            } => {
                let got = independence_rank(sys, functions, config)?;
                verdict(
                    &fact.name,
                    &[(got.max_rank == *max_rank && got.fraction >= *min_fraction, true)],
                    got.samples,
                )
                .with_detail(format!("max rank {} on {:.4} of samples", got.max_rank, got.fraction))
            }
            Expectation::CommutingLifts { functions, rank } => {
                let family: Vec<_> = functions
                    .iter()
                    .map(|f| (sys.hamiltonian_field(f.clone()), f.clone()))
                    .collect();
                let (check, summary) = self.cone.commuting_lift_check(&family, config)?;
                let mut r = check.renamed(fact.name.clone());
                if summary.max_rank != *rank {
                    r.passed = false;
                }
                r.with_detail(format!("lifted rank {} on {:.4}", summary.max_rank, summary.fraction))
            }
        };
        Ok(result)
    }
}

/// Verdict comparison reported as a mismatch count against tolerance zero.
fn verdict(name: &str, pairs: &[(bool, bool)], samples: usize) -> CheckResult {
    let mismatches = pairs.iter().filter(|(got, want)| got != want).count();
    CheckResult::new(name, mismatches as f64, samples, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_round_trip() {
        for key in ModelKey::all() {
            let parsed: ModelKey = key.to_string().parse().unwrap();
            assert_eq!(parsed, key);
        }
        assert_eq!("darboux(2)".parse::<ModelKey>().unwrap(), ModelKey::Darboux(2));
        assert_eq!(
            "sphere_weighted(1,2)".parse::<ModelKey>().unwrap(),
            ModelKey::SphereWeighted(vec![1, 2])
        );
        for bad in ["nosuchmodel", "darboux:0", "darboux", "sphere:1", "sphere:0,1", "darboux:x"] {
            assert!(bad.parse::<ModelKey>().is_err(), "{bad}");
        }
    }

    #[test]
    fn every_model_passes_its_own_suite() {
        let cfg = CheckConfig::default().with_samples(32);
        for key in ModelKey::all() {
            let model = build_model(&key).unwrap();
            for r in model.verify(&cfg).unwrap() {
                assert!(r.passed, "{key} {}: residual {:e} ({:?})", r.name, r.max_residual, r.detail);
            }
        }
    }

    #[test]
    fn cosphere_reeb_at_a_reference_point() {
        let model = build_model(&ModelKey::Cosphere(1)).unwrap();
        let reeb = model.system.reeb_at(&[0.1, -0.4, 0.8]).unwrap();
        for (got, want) in reeb.iter().zip([0.6, 0.8, 0.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}
