//! Kraus-operator sets: validation, selective application and composition.
//!
//! A channel `Φ(ρ) = Σ_n K_n ρ K_n†` is trace preserving when
//! `Σ_n K_n†K_n = I`, and incoherent exactly when every column of every `K_n`
//! holds at most one nonzero entry.

use crate::states::{DensityMatrix, PureState};
use crate::tolerance::{COMPARE, NONZERO, PRUNE};
use crate::{CMatrix, Error, Result};

/// A finite list of square Kraus operators with optional outcome labels.
///
/// Construction only checks shapes; completeness is reported by
/// [`KrausSet::completeness`] and enforced by the operations that need it.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausSet {
    operators: Vec<CMatrix>,
    labels: Vec<String>,
}

/// Location of a column with two nonzero entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoherenceWitness {
    pub operator: usize,
    pub column: usize,
    pub rows: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncoherenceReport {
    pub incoherent: bool,
    pub witness: Option<CoherenceWitness>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletenessReport {
    pub complete: bool,
    /// `max_{ij} |(Σ K†K − I)_{ij}|`.
    pub residual: f64,
}

/// One outcome of a selective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch<S> {
    pub probability: f64,
    pub state: S,
    pub label: String,
}

impl KrausSet {
    /// Operators labelled by their index.
    pub fn new(operators: Vec<CMatrix>) -> Result<Self> {
        let labels = (0..operators.len()).map(|n| n.to_string()).collect();
        Self::with_labels(operators, labels)
    }

    pub fn with_labels(operators: Vec<CMatrix>, labels: Vec<String>) -> Result<Self> {
        let first = operators.first().ok_or(Error::Kraus("no operators".into()))?;
        let d = first.nrows();
        if d == 0 {
            return Err(Error::Kraus("zero-dimensional operator".into()));
        }
        for (n, k) in operators.iter().enumerate() {
            if k.shape() != (d, d) {
                return Err(Error::Kraus(format!(
                    "operator {n} has shape {:?}, expected ({d}, {d})",
                    k.shape()
                )));
            }
        }
        if labels.len() != operators.len() {
            return Err(Error::Kraus(format!(
                "{} labels for {} operators",
                labels.len(),
                operators.len()
            )));
        }
        Ok(Self { operators, labels })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            operators: vec![CMatrix::identity(d, d)],
            labels: vec!["0".into()],
        }
    }

    pub fn dim(&self) -> usize {
        self.operators[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Each operator paired with its label.
    pub fn iter(&self) -> impl Iterator<Item = (&CMatrix, &str)> {
        self.operators.iter().zip(self.labels.iter().map(String::as_str))
    }

    /// Checks that every column of every operator has at most one entry with
    /// modulus above `1e-9`; the first offending column is returned as witness.
    pub fn incoherence(&self) -> IncoherenceReport {
        for (n, k) in self.operators.iter().enumerate() {
            for col in 0..k.ncols() {
                let mut nonzero = (0..k.nrows()).filter(|&r| k[(r, col)].norm() > NONZERO);
                if let (Some(a), Some(b)) = (nonzero.next(), nonzero.next()) {
                    return IncoherenceReport {
                        incoherent: false,
                        witness: Some(CoherenceWitness {
                            operator: n,
                            column: col,
                            rows: (a, b),
                        }),
                    };
                }
            }
        }
        IncoherenceReport {
            incoherent: true,
            witness: None,
        }
    }

    pub fn is_incoherent(&self) -> bool {
        self.incoherence().incoherent
    }

    /// Entrywise residual of `Σ K†K = I`; complete iff at most `1e-9`.
    pub fn completeness(&self) -> CompletenessReport {
        let residual = self.completeness_residual();
        CompletenessReport {
            complete: residual <= COMPARE,
            residual,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.completeness().complete
    }

    fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let mut sum = CMatrix::zeros(d, d);
        for k in &self.operators {
            sum += k.adjoint() * k;
        }
        (sum - CMatrix::identity(d, d))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    fn require_complete(&self, tol: f64) -> Result<()> {
        let residual = self.completeness_residual();
        if residual > tol {
            return Err(Error::Incomplete { residual });
        }
        Ok(())
    }

    fn require_dim(&self, d: usize) -> Result<()> {
        if self.dim() != d {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: d,
            });
        }
        Ok(())
    }

    /// Selective measurement on a pure state.
    ///
    /// Branch `n` has probability `‖K_n ψ‖²` and state `K_n ψ / ‖K_n ψ‖`.
    /// Branches with probability at most `1e-12` are dropped; the kept mass
    /// must still sum to one within `1e-9`.
    pub fn apply_selective(&self, psi: &PureState) -> Result<Vec<Branch<PureState>>> {
        self.require_complete(COMPARE)?;
        self.require_dim(psi.dim())?;
        let v = psi.to_vector();
        let mut branches = Vec::with_capacity(self.len());
        for (k, label) in self.iter() {
            let out = k * &v;
            let p = out.norm_squared();
            if p > PRUNE {
                branches.push(Branch {
                    probability: p,
                    state: PureState::from_vector(&out)?,
                    label: label.to_string(),
                });
            }
        }
        check_mass(branches.iter().map(|b| b.probability))?;
        Ok(branches)
    }

    /// Selective measurement on a density matrix: `p_n = tr(K_n ρ K_n†)`.
    pub fn apply_selective_mixed(&self, rho: &DensityMatrix) -> Result<Vec<Branch<DensityMatrix>>> {
        self.require_complete(COMPARE)?;
        self.require_dim(rho.dim())?;
        let mut branches = Vec::with_capacity(self.len());
        for (k, label) in self.iter() {
            let out = k * rho.entries() * k.adjoint();
            let p = out.trace().re;
            if p > PRUNE {
                branches.push(Branch {
                    probability: p,
                    state: DensityMatrix::new(out.unscale(p))?,
                    label: label.to_string(),
                });
            }
        }
        check_mass(branches.iter().map(|b| b.probability))?;
        Ok(branches)
    }

    /// `Φ(ρ) = Σ_n K_n ρ K_n†`.
    pub fn apply_channel(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.require_complete(COMPARE)?;
        self.require_dim(rho.dim())?;
        let d = rho.dim();
        let mut out = CMatrix::zeros(d, d);
        for k in &self.operators {
            out += k * rho.entries() * k.adjoint();
        }
        DensityMatrix::new(out)
    }

    /// Right-multiplies every operator by `u` (the set then acts after `u`).
    pub fn after(&self, u: &CMatrix) -> KrausSet {
        KrausSet {
            operators: self.operators.iter().map(|k| k * u).collect(),
            labels: self.labels.clone(),
        }
    }

    /// Left-multiplies every operator by `u` (`u` acts after the set).
    pub fn then(&self, u: &CMatrix) -> KrausSet {
        KrausSet {
            operators: self.operators.iter().map(|k| u * k).collect(),
            labels: self.labels.clone(),
        }
    }
}

fn check_mass(probabilities: impl Iterator<Item = f64>) -> Result<()> {
    let kept: f64 = probabilities.sum();
    let lost = (1.0 - kept).abs();
    if lost > COMPARE {
        return Err(Error::ProbabilityLeak { lost });
    }
    Ok(())
}

/// Flattens sequential stages (first stage acts first) into one Kraus set.
///
/// Operators are the products `K^{(m)}_{n_m} ⋯ K^{(1)}_{n_1}` over all index
/// choices, with labels joined by `/`. Products with Frobenius norm at most
/// `1e-12` are pruned. Each stage must be complete; the result is checked
/// against an accumulated tolerance of `m·1e-9`.
pub fn compose(stages: &[KrausSet]) -> Result<KrausSet> {
    let first = stages.first().ok_or(Error::Kraus("no stages to compose".into()))?;
    let d = first.dim();
    for stage in stages {
        stage.require_dim(d)?;
        stage.require_complete(COMPARE)?;
    }
    let mut operators = first.operators.clone();
    let mut labels = first.labels.clone();
    for stage in &stages[1..] {
        let mut next_ops = Vec::with_capacity(operators.len() * stage.len());
        let mut next_labels = Vec::with_capacity(operators.len() * stage.len());
        for (k, label) in stage.iter() {
            for (prev, prev_label) in operators.iter().zip(&labels) {
                let product = k * prev;
                if product.norm() > PRUNE {
                    next_ops.push(product);
                    next_labels.push(format!("{prev_label}/{label}"));
                }
            }
        }
        operators = next_ops;
        labels = next_labels;
    }
    let composed = KrausSet::with_labels(operators, labels)?;
    composed.require_complete(stages.len() as f64 * COMPARE)?;
    Ok(composed)
}
