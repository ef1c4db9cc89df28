//! Search operators and genome repair.
//!
//! Operator constants: BLX alpha 0.5, differential weight 0.8, extended line
//! factor drawn from U(-0.25, 1.25).

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub const BLX_ALPHA: f64 = 0.5;
pub const DE_WEIGHT: f64 = 0.8;
pub const LINE_RANGE: (f64, f64) = (-0.25, 1.25);
/// Share of uniform crossover in the two-operator mix; the rest is mutation.
pub const TWO_OP_CROSSOVER_P: f64 = 0.95;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationError {
    #[error("differential evolution needs a third parent")]
    MissingDonor,
    #[error("parent dimensions differ: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("genome has {got} coordinates but bounds cover {expected}")]
    BoundsMismatch { expected: usize, got: usize },
    #[error("unknown operator `{0}`")]
    UnknownOperator(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorId {
    WrightsHeuristicXover,
    SimpleXover,
    ExtendedLineXover,
    UniformXover,
    BlxAlpha,
    DifferentialEvolution,
    SinglePointMutation,
}

impl OperatorId {
    pub const ALL: [OperatorId; 7] = [
        OperatorId::WrightsHeuristicXover,
        OperatorId::SimpleXover,
        OperatorId::ExtendedLineXover,
        OperatorId::UniformXover,
        OperatorId::BlxAlpha,
        OperatorId::DifferentialEvolution,
        OperatorId::SinglePointMutation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OperatorId::WrightsHeuristicXover => "wrights_heuristic_xover",
            OperatorId::SimpleXover => "simple_xover",
            OperatorId::ExtendedLineXover => "extended_line_xover",
            OperatorId::UniformXover => "uniform_xover",
            OperatorId::BlxAlpha => "blx_alpha",
            OperatorId::DifferentialEvolution => "differential_evolution",
            OperatorId::SinglePointMutation => "single_point_mutation",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, VariationError> {
        Self::ALL.into_iter().find(|o| o.name() == name).ok_or_else(|| VariationError::UnknownOperator(name.into()))
    }

    pub fn needs_donor(self) -> bool {
        self == OperatorId::DifferentialEvolution
    }
}

/// Which operators an engine draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorSet {
    /// Uniform choice among all seven operators.
    Seven,
    /// Uniform crossover with probability 0.95, otherwise single point mutation.
    Two,
}

impl OperatorSet {
    pub fn pick<R: Rng + ?Sized>(self, rng: &mut R) -> OperatorId {
        match self {
            OperatorSet::Seven => OperatorId::ALL[rng.gen_range(0..OperatorId::ALL.len())],
            OperatorSet::Two => {
                if rng.gen::<f64>() < TWO_OP_CROSSOVER_P {
                    OperatorId::UniformXover
                } else {
                    OperatorId::SinglePointMutation
                }
            }
        }
    }

    pub fn count(self) -> usize {
        match self {
            OperatorSet::Seven => 7,
            OperatorSet::Two => 2,
        }
    }
}

/// Per-variable box and integrality.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub bounds: Vec<(f64, f64)>,
    pub integer: Vec<bool>,
}

impl Domain {
    pub fn new(bounds: Vec<(f64, f64)>, integer: Vec<bool>) -> Self {
        assert_eq!(bounds.len(), integer.len());
        Self { bounds, integer }
    }

    pub fn of(problem: crate::problems::Problem) -> Self {
        Self::new(problem.bounds(), problem.integrality())
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    /// Uniform point; integer coordinates drawn uniformly from the integers in range.
    pub fn sample<T: Scalar, R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        (0..self.dim()).map(|i| self.sample_coord(i, rng)).collect()
    }

    fn sample_coord<T: Scalar, R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> T {
        let (lo, hi) = self.bounds[i];
        if self.integer[i] {
            let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
            T::lit(rng.gen_range(a..=b) as f64)
        } else {
            T::lit(lo + (hi - lo) * rng.gen::<f64>())
        }
    }
}

/// Clamp into bounds, round integer coordinates half away from zero, clamp again.
pub fn repair<T: Scalar>(x: &mut [T], domain: &Domain) {
    for (i, v) in x.iter_mut().enumerate() {
        let (lo, hi) = (T::lit(domain.bounds[i].0), T::lit(domain.bounds[i].1));
        // NaN coordinates collapse to the lower bound
        let mut y = if v.is_nan() { lo } else { v.max(lo).min(hi) };
        if domain.integer[i] {
            y = y.round();
            if y < lo {
                y = lo.ceil();
            }
            if y > hi {
                y = hi.floor();
            }
        }
        *v = y;
    }
}

pub fn repaired<T: Scalar>(mut x: Vec<T>, domain: &Domain) -> Vec<T> {
    repair(&mut x, domain);
    x
}

/// Parents handed to an operator. `first` is the focal parent (the node
/// itself in the graph engines); `first_is_better` orients Wright's
/// heuristic crossover.
#[derive(Debug, Clone, Copy)]
pub struct Parents<'a, T> {
    pub first: &'a [T],
    pub second: &'a [T],
    pub donor: Option<&'a [T]>,
    pub first_is_better: bool,
}

/// Applies `op` and returns the child before repair.
pub fn apply_operator<T: Scalar, R: Rng + ?Sized>(
    op: OperatorId,
    parents: &Parents<'_, T>,
    domain: &Domain,
    rng: &mut R,
) -> Result<Vec<T>, VariationError> {
    let (p1, p2) = (parents.first, parents.second);
    if p1.len() != p2.len() {
        return Err(VariationError::DimensionMismatch(p1.len(), p2.len()));
    }
    if p1.len() != domain.dim() {
        return Err(VariationError::BoundsMismatch { expected: domain.dim(), got: p1.len() });
    }
    let n = p1.len();
    let child = match op {
        OperatorId::WrightsHeuristicXover => {
            let (better, worse) = if parents.first_is_better { (p1, p2) } else { (p2, p1) };
            let r = T::lit(rng.gen::<f64>());
            better.iter().zip(worse).map(|(&b, &w)| r * (b - w) + b).collect()
        }
        OperatorId::SimpleXover => {
            if n < 2 {
                if rng.gen::<bool>() { p1.to_vec() } else { p2.to_vec() }
            } else {
                let cut = rng.gen_range(1..n);
                p1[..cut].iter().chain(&p2[cut..]).copied().collect()
            }
        }
        OperatorId::ExtendedLineXover => {
            let a = T::lit(rng.gen_range(LINE_RANGE.0..LINE_RANGE.1));
            p1.iter().zip(p2).map(|(&a1, &a2)| a1 + a * (a2 - a1)).collect()
        }
        OperatorId::UniformXover => {
            p1.iter().zip(p2).map(|(&a1, &a2)| if rng.gen::<bool>() { a1 } else { a2 }).collect()
        }
        OperatorId::BlxAlpha => p1
            .iter()
            .zip(p2)
            .map(|(&a1, &a2)| {
                let (lo, hi) = (a1.min(a2), a1.max(a2));
                let ext = T::lit(BLX_ALPHA) * (hi - lo);
                let u = T::lit(rng.gen::<f64>());
                (lo - ext) + u * ((hi + ext) - (lo - ext))
            })
            .collect(),
        OperatorId::DifferentialEvolution => {
            let p3 = parents.donor.ok_or(VariationError::MissingDonor)?;
            if p3.len() != n {
                return Err(VariationError::DimensionMismatch(n, p3.len()));
            }
            let f = T::lit(DE_WEIGHT);
            p1.iter().zip(p2).zip(p3).map(|((&a, &b), &c)| a + f * (b - c)).collect()
        }
        OperatorId::SinglePointMutation => {
            let mut child = p1.to_vec();
            let i = rng.gen_range(0..n);
            child[i] = resample_other(child[i], i, domain, rng);
            child
        }
    };
    Ok(child)
}

/// A new uniform value for coordinate `i`, distinct from `current` when
/// the domain allows it.
fn resample_other<T: Scalar, R: Rng + ?Sized>(current: T, i: usize, domain: &Domain, rng: &mut R) -> T {
    let (lo, hi) = domain.bounds[i];
    if domain.integer[i] {
        let (a, b) = (lo.ceil() as i64, hi.floor() as i64);
        if a >= b {
            return T::lit(a as f64);
        }
        let cur = current.as_f64();
        let cur_int = cur.fract() == 0.0 && cur >= a as f64 && cur <= b as f64;
        if cur_int {
            let mut v = rng.gen_range(a..b);
            if v >= cur as i64 {
                v += 1;
            }
            T::lit(v as f64)
        } else {
            T::lit(rng.gen_range(a..=b) as f64)
        }
    } else {
        loop {
            let v = T::lit(lo + (hi - lo) * rng.gen::<f64>());
            if v != current {
                return v;
            }
        }
    }
}

/// Applies `op` and repairs the child into the domain.
pub fn create_offspring<T: Scalar, R: Rng + ?Sized>(
    op: OperatorId,
    parents: &Parents<'_, T>,
    domain: &Domain,
    rng: &mut R,
) -> Result<Vec<T>, VariationError> {
    let mut child = apply_operator(op, parents, domain, rng)?;
    repair(&mut child, domain);
    Ok(child)
}
