//! Benchmark problems: six constrained engineering designs and six
//! artificial test functions.
//!
//! Objectives are reported in each problem's own sense (alkylation and the
//! error-correcting-code problem are maximized). Engines minimize
//! [`Evaluation::cost`], which flips the sign for maximization problems.

mod artificial;
mod engineering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

pub use artificial::{ecc_codeword_distance, SYS_LIN_EQ_A, SYS_LIN_EQ_B, ECC_BITS, ECC_WORDS, FM_TARGET};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProblemError {
    #[error("{problem}: expected {expected} variables, got {got}")]
    Dimension { problem: &'static str, expected: usize, got: usize },
    #[error("{problem}: x[{index}] = {value} outside [{lo}, {hi}]")]
    OutOfBounds { problem: &'static str, index: usize, value: f64, lo: f64, hi: f64 },
    #[error("{problem}: x[{index}] = {value} must be integral")]
    NotIntegral { problem: &'static str, index: usize, value: f64 },
    #[error("unknown problem `{0}`")]
    Unknown(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

/// Static description of a problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub name: String,
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    pub integrality: Vec<bool>,
    pub sense: Sense,
    pub n_constraints: usize,
    pub best_known: Option<f64>,
}

/// Objective plus per-constraint violation `max(0, g_i)`.
///
/// `slack` holds the reporting tolerance of each constraint,
/// `1e-6 * max(1, sum of |terms| of g_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub objective: T,
    pub violations: Vec<T>,
    pub slack: Vec<T>,
    pub sense: Sense,
}

impl<T: Scalar> Evaluation<T> {
    pub fn unconstrained(objective: T, sense: Sense) -> Self {
        Self { objective, violations: Vec::new(), slack: Vec::new(), sense }
    }

    /// Objective expressed for minimization.
    #[inline]
    pub fn cost(&self) -> T {
        match self.sense {
            Sense::Minimize => self.objective,
            Sense::Maximize => -self.objective,
        }
    }

    /// Summed violation `phi`.
    #[inline]
    pub fn penalty(&self) -> T {
        self.violations.iter().copied().sum()
    }

    #[inline]
    pub fn is_feasible(&self) -> bool {
        self.violations.iter().all(|v| *v == T::zero())
    }

    /// Feasible up to the per-constraint reporting slack.
    pub fn is_feasible_within_slack(&self) -> bool {
        self.violations.iter().zip(&self.slack).all(|(v, s)| *v <= *s)
    }
}

/// Collects inequality constraints `g(x) <= 0` given as lists of additive terms.
pub(crate) struct ConstraintSet<T> {
    violations: Vec<T>,
    slack: Vec<T>,
}

impl<T: Scalar> ConstraintSet<T> {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Self { violations: Vec::with_capacity(n), slack: Vec::with_capacity(n) }
    }

    pub(crate) fn push(&mut self, terms: &[T]) {
        let value: T = terms.iter().copied().sum();
        let scale: T = terms.iter().map(|t| t.abs()).sum();
        let v = if value > T::zero() { value } else { T::zero() };
        // NaN is treated as maximally violated
        self.violations.push(if value.is_nan() { T::infinity() } else { v });
        self.slack.push(T::lit(1e-6) * scale.max(T::one()));
    }

    pub(crate) fn finish(self, objective: T, sense: Sense) -> Evaluation<T> {
        Evaluation { objective, violations: self.violations, slack: self.slack, sense }
    }
}

/// The twelve benchmark problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    PressureVessel,
    Alkylation,
    HeatExchanger,
    GearTrain,
    Spring,
    WeldedBeam,
    FreqMod,
    Ecc,
    SysLinEq,
    Rastrigin,
    Griewangk,
    Watson,
}

impl Problem {
    pub const ALL: [Problem; 12] = [
        Problem::PressureVessel,
        Problem::Alkylation,
        Problem::HeatExchanger,
        Problem::GearTrain,
        Problem::Spring,
        Problem::WeldedBeam,
        Problem::FreqMod,
        Problem::Ecc,
        Problem::SysLinEq,
        Problem::Rastrigin,
        Problem::Griewangk,
        Problem::Watson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Problem::PressureVessel => "pressure_vessel",
            Problem::Alkylation => "alkylation",
            Problem::HeatExchanger => "heat_exchanger",
            Problem::GearTrain => "gear_train",
            Problem::Spring => "spring",
            Problem::WeldedBeam => "welded_beam",
            Problem::FreqMod => "freq_mod",
            Problem::Ecc => "ecc",
            Problem::SysLinEq => "sys_lin_eq",
            Problem::Rastrigin => "rastrigin",
            Problem::Griewangk => "griewangk",
            Problem::Watson => "watson",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, ProblemError> {
        Self::ALL.into_iter().find(|p| p.name() == name).ok_or_else(|| ProblemError::Unknown(name.to_string()))
    }

    pub fn is_engineering(self) -> bool {
        matches!(
            self,
            Problem::PressureVessel
                | Problem::Alkylation
                | Problem::HeatExchanger
                | Problem::GearTrain
                | Problem::Spring
                | Problem::WeldedBeam
        )
    }

    pub fn sense(self) -> Sense {
        match self {
            Problem::Alkylation | Problem::Ecc => Sense::Maximize,
            _ => Sense::Minimize,
        }
    }

    pub fn dim(self) -> usize {
        self.bounds().len()
    }

    pub fn n_constraints(self) -> usize {
        match self {
            Problem::PressureVessel => 4,
            Problem::Alkylation => 14,
            Problem::HeatExchanger => 3,
            Problem::GearTrain => 0,
            Problem::Spring => 4,
            Problem::WeldedBeam => 7,
            _ => 0,
        }
    }

    pub fn is_constrained(self) -> bool {
        self.n_constraints() > 0
    }

    /// Best published (or, for Watson, best computed) objective value.
    pub fn best_known(self) -> Option<f64> {
        Some(match self {
            Problem::PressureVessel => 5850.37,
            Problem::Alkylation => 1772.77,
            Problem::HeatExchanger => 7049.25,
            Problem::GearTrain => 2.70e-12,
            Problem::Spring => 0.0126652303,
            Problem::WeldedBeam => 1.72485217,
            Problem::FreqMod => 0.0,
            Problem::Ecc => 0.067416,
            Problem::SysLinEq => 0.0,
            Problem::Rastrigin => 0.0,
            Problem::Griewangk => 0.0,
            Problem::Watson => artificial::WATSON_MINIMUM,
        })
    }

    pub fn bounds(self) -> Vec<(f64, f64)> {
        match self {
            Problem::PressureVessel => vec![(1.0, 100.0), (1.0, 400.0), (1.0, 20.0), (1.0, 20.0)],
            Problem::Alkylation => vec![
                (1500.0, 2000.0),
                (1.0, 120.0),
                (3000.0, 3500.0),
                (85.0, 93.0),
                (90.0, 95.0),
                (3.0, 12.0),
                (145.0, 162.0),
            ],
            Problem::HeatExchanger => {
                vec![(100.0, 10000.0), (1000.0, 10000.0), (1000.0, 10000.0), (10.0, 1000.0), (10.0, 1000.0)]
            }
            Problem::GearTrain => vec![(12.0, 60.0); 4],
            Problem::Spring => vec![(0.05, 2.0), (0.25, 1.3), (2.0, 15.0)],
            Problem::WeldedBeam => vec![(0.1, 2.0), (0.1, 10.0), (0.1, 10.0), (0.1, 2.0)],
            Problem::FreqMod => vec![(-6.4, 6.35); 6],
            Problem::Ecc => vec![(0.0, 1.0); ECC_WORDS * ECC_BITS],
            Problem::SysLinEq => vec![(-9.0, 9.0); 10],
            Problem::Rastrigin => vec![(-5.12, 5.12); 20],
            Problem::Griewangk => vec![(-600.0, 600.0); 10],
            Problem::Watson => vec![(-2.0, 2.0); 6],
        }
    }

    pub fn integrality(self) -> Vec<bool> {
        match self {
            Problem::PressureVessel => vec![false, false, true, true],
            Problem::GearTrain => vec![true; 4],
            Problem::Ecc => vec![true; ECC_WORDS * ECC_BITS],
            other => vec![false; other.dim()],
        }
    }

    pub fn spec(self) -> ProblemSpec {
        ProblemSpec {
            name: self.name().to_string(),
            dim: self.dim(),
            bounds: self.bounds(),
            integrality: self.integrality(),
            sense: self.sense(),
            n_constraints: self.n_constraints(),
            best_known: self.best_known(),
        }
    }

    fn validate<T: Scalar>(self, x: &[T]) -> Result<(), ProblemError> {
        let bounds = self.bounds();
        if x.len() != bounds.len() {
            return Err(ProblemError::Dimension { problem: self.name(), expected: bounds.len(), got: x.len() });
        }
        let integer = self.integrality();
        for (i, (&xi, &(lo, hi))) in x.iter().zip(&bounds).enumerate() {
            let v = xi.as_f64();
            // bounds are compared in T so that f32 genomes rounded at the edges pass
            if !(xi >= T::lit(lo) && xi <= T::lit(hi)) {
                return Err(ProblemError::OutOfBounds { problem: self.name(), index: i, value: v, lo, hi });
            }
            if integer[i] && xi.fract() != T::zero() {
                return Err(ProblemError::NotIntegral { problem: self.name(), index: i, value: v });
            }
        }
        Ok(())
    }

    /// Checks preconditions, then evaluates.
    pub fn evaluate<T: Scalar>(self, x: &[T]) -> Result<Evaluation<T>, ProblemError> {
        self.validate(x)?;
        Ok(self.evaluate_unchecked(x))
    }

    /// Evaluates without checking bounds or integrality. The dimension must
    /// still match (indexing panics otherwise).
    pub fn evaluate_unchecked<T: Scalar>(self, x: &[T]) -> Evaluation<T> {
        let sense = self.sense();
        match self {
            Problem::PressureVessel => engineering::pressure_vessel(x),
            Problem::Alkylation => engineering::alkylation(x),
            Problem::HeatExchanger => engineering::heat_exchanger(x),
            Problem::GearTrain => Evaluation::unconstrained(engineering::gear_train(x), sense),
            Problem::Spring => engineering::spring(x),
            Problem::WeldedBeam => engineering::welded_beam(x),
            Problem::FreqMod => Evaluation::unconstrained(artificial::freq_mod(x), sense),
            Problem::Ecc => Evaluation::unconstrained(artificial::ecc(x), sense),
            Problem::SysLinEq => Evaluation::unconstrained(artificial::sys_lin_eq(x), sense),
            Problem::Rastrigin => Evaluation::unconstrained(artificial::rastrigin(x), sense),
            Problem::Griewangk => Evaluation::unconstrained(artificial::griewangk(x), sense),
            Problem::Watson => Evaluation::unconstrained(artificial::watson(x), sense),
        }
    }
}

impl std::fmt::Display for Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Problem {
    type Err = ProblemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::from_name(s)
    }
}

/// All twelve problems with stable names.
pub fn registry() -> Vec<ProblemSpec> {
    Problem::ALL.iter().map(|p| p.spec()).collect()
}
