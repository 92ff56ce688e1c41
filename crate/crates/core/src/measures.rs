//! Coherence measures generated by concave, symmetric simplex functions.
//!
//! A function `f` on the probability simplex that
//!
//! 1. vanishes on every vertex,
//! 2. is invariant under permutations of the coordinates, and
//! 3. is concave
//!
//! defines a coherence measure. On a pure state the measure is
//! `C_f(ψ) = f(|ψ_1|², …, |ψ_d|²)`; on a mixed state it is the convex roof
//! `C_f(ρ) = min Σ_j p_j C_f(ψ_j)` over pure-state ensembles of `ρ`.
//! Conversely, every pure-state coherence measure is of this form, and
//! [`extract_functional`] recovers its `f`.
//!
//! Symmetric concave functions are Schur-concave: `x ≺ y` implies
//! `f(x) ≥ f(y)`. That is the property behind monotonicity under incoherent
//! operations.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::random;
use crate::simplex::{sort_desc, ProbVector};
use crate::states::{DensityMatrix, PureState};
use crate::{Error, Result, C64};

/// Which dimensions a functional accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionPolicy {
    Any,
    Fixed(usize),
}

type Eval = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A named function `f: Ω → ℝ⁺`.
#[derive(Clone)]
pub struct CoherenceFunctional {
    name: String,
    policy: DimensionPolicy,
    eval: Arc<Eval>,
}

impl fmt::Debug for CoherenceFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoherenceFunctional")
            .field("name", &self.name)
            .field("policy", &self.policy)
            .finish_non_exhaustive()
    }
}

impl CoherenceFunctional {
    pub fn new<F>(name: impl Into<String>, policy: DimensionPolicy, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            policy,
            eval: Arc::new(f),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn policy(&self) -> DimensionPolicy {
        self.policy
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        match self.policy {
            DimensionPolicy::Fixed(expected) if expected != d => {
                Err(Error::Dimension { expected, found: d })
            }
            _ => Ok(()),
        }
    }

    /// `f(x)`.
    pub fn evaluate(&self, x: &ProbVector) -> Result<f64> {
        self.check_dim(x.dim())?;
        Ok((self.eval)(x.entries()))
    }

    /// `C_f(ψ) = f(|ψ_1|², …, |ψ_d|²)`.
    pub fn coherence_pure(&self, psi: &PureState) -> Result<f64> {
        self.evaluate(&psi.squared_amplitudes())
    }

    /// Samples the three generating conditions; see [`ValidationReport`].
    pub fn validate(&self, d: usize, samples: usize, seed: u64) -> Result<ValidationReport> {
        validate_functional(self, d, samples, seed)
    }
}

/// The functionals discussed alongside the construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    /// `−Σ x_i log₂ x_i`; on pure states this is the relative entropy of coherence.
    Shannon,
    /// `(Σ √x_i)² − 1`; on pure states this is the l1-norm of coherence.
    L1,
    /// `log₂(Σ x_i^α) / (1 − α)` for `0 < α < 1`.
    Alpha(f64),
    /// Ky Fan tail `Σ_{i≥l} x_i^↓` (1-based rank `l ≥ 2`).
    KyFan(usize),
}

impl Builtin {
    pub fn functional(self) -> Result<CoherenceFunctional> {
        match self {
            Builtin::Shannon => Ok(CoherenceFunctional::new("shannon", DimensionPolicy::Any, shannon)),
            Builtin::L1 => Ok(CoherenceFunctional::new("l1", DimensionPolicy::Any, l1)),
            Builtin::Alpha(alpha) => {
                if !(alpha > 0.0 && alpha < 1.0) {
                    return Err(Error::Parameter(format!("alpha must lie in (0, 1), got {alpha}")));
                }
                Ok(CoherenceFunctional::new(
                    format!("alpha({alpha})"),
                    DimensionPolicy::Any,
                    move |x| alpha_entropy(x, alpha),
                ))
            }
            Builtin::KyFan(l) => {
                if l < 2 {
                    return Err(Error::Parameter(format!(
                        "Ky Fan tail needs l ≥ 2 (l = {l} does not vanish on vertices)"
                    )));
                }
                Ok(CoherenceFunctional::new(
                    format!("kyfan({l})"),
                    DimensionPolicy::Any,
                    move |x| ky_fan_tail(x, l),
                ))
            }
        }
    }
}

fn shannon(x: &[f64]) -> f64 {
    let h: f64 = x.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
    h.max(0.0)
}

fn l1(x: &[f64]) -> f64 {
    let s: f64 = x.iter().map(|p| p.max(0.0).sqrt()).sum();
    (s * s - 1.0).max(0.0)
}

fn alpha_entropy(x: &[f64], alpha: f64) -> f64 {
    let s: f64 = x.iter().filter(|&&p| p > 0.0).map(|p| p.powf(alpha)).sum();
    (s.log2() / (1.0 - alpha)).max(0.0)
}

fn ky_fan_tail(x: &[f64], l: usize) -> f64 {
    if l > x.len() {
        return 0.0;
    }
    let mut sorted = x.to_vec();
    sort_desc(&mut sorted);
    sorted[l - 1..].iter().sum()
}

/// Worst observed deviations from the generating conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    pub dim: usize,
    pub samples: usize,
    /// `max |f(vertex)|` over all `d` vertices.
    pub vertex_max: f64,
    /// `max |f(P x) − f(x)|` over sampled points and permutations.
    pub permutation_max: f64,
    /// `max(0, λf(x) + (1−λ)f(y) − f(λx + (1−λ)y))` over sampled triples.
    pub concavity_max: f64,
}

impl ValidationReport {
    pub const THRESHOLD: f64 = 1e-7;

    pub fn passes(&self) -> bool {
        self.vertex_max <= Self::THRESHOLD
            && self.permutation_max <= Self::THRESHOLD
            && self.concavity_max <= Self::THRESHOLD
    }
}

/// Checks vertex vanishing exhaustively, and permutation invariance and
/// concavity on `samples` random draws each.
///
/// Draws mix interior points with sparse points on lower-dimensional faces,
/// where violations of concavity for functions like `Σ x²` are largest.
pub fn validate_functional(
    f: &CoherenceFunctional,
    d: usize,
    samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    if samples == 0 {
        return Err(Error::Parameter("validation needs at least one sample".into()));
    }
    if d == 0 {
        return Err(Error::Empty);
    }
    f.check_dim(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| {
        if rng.random_bool(0.3) {
            random::sparse_prob_vector(d, 0.5, rng)
        } else {
            random::prob_vector(d, rng)
        }
    };

    let mut vertex_max: f64 = 0.0;
    for i in 0..d {
        vertex_max = vertex_max.max(f.evaluate(&ProbVector::vertex(d, i)?)?.abs());
    }

    let mut permutation_max: f64 = 0.0;
    let mut concavity_max: f64 = 0.0;
    for _ in 0..samples {
        let x = draw(&mut rng);
        let perm = random::permutation(d, &mut rng);
        let fx = f.evaluate(&x)?;
        let fpx = f.evaluate(&x.permuted(&perm)?)?;
        permutation_max = permutation_max.max((fpx - fx).abs());

        let y = draw(&mut rng);
        let lambda: f64 = rng.random();
        let fy = f.evaluate(&y)?;
        let fm = f.evaluate(&x.mix(&y, lambda)?)?;
        concavity_max = concavity_max.max(lambda * fx + (1.0 - lambda) * fy - fm);
    }

    Ok(ValidationReport {
        dim: d,
        samples,
        vertex_max,
        permutation_max,
        concavity_max,
    })
}

/// Recovers the generating function of a pure-state measure:
/// `f(x) = μ(Σ √x_i |i⟩)`.
pub fn extract_functional<M>(name: impl Into<String>, d: usize, mu: M) -> CoherenceFunctional
where
    M: Fn(&PureState) -> f64 + Send + Sync + 'static,
{
    CoherenceFunctional::new(name, DimensionPolicy::Fixed(d), move |x| {
        let amps = x.iter().map(|p| C64::new(p.max(0.0).sqrt(), 0.0)).collect();
        let psi = PureState::new(amps).expect("simplex point gives a normalized state");
        mu(&psi)
    })
}

/// Quality label of a convex-roof value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoofQuality {
    /// Value of a feasible ensemble; the true roof is at most this.
    UpperBound,
}

/// A feasible pure-state ensemble and its average measure.
#[derive(Debug, Clone, PartialEq)]
pub struct RoofResult {
    pub value: f64,
    pub ensemble: Vec<(f64, PureState)>,
    pub quality: RoofQuality,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoofOptions {
    /// Independent local searches; restart 0 starts from the eigen-ensemble.
    pub restarts: usize,
    /// Ensemble size; `None` uses `rank²`.
    pub ensemble_size: Option<usize>,
    pub seed: u64,
    /// Cap on full sweeps over member pairs per restart.
    pub max_sweeps: usize,
    /// Initial rotation angle (radians).
    pub initial_step: f64,
    /// The search stops once the rotation angle falls below this.
    pub min_step: f64,
}

impl Default for RoofOptions {
    fn default() -> Self {
        Self {
            restarts: 8,
            ensemble_size: None,
            seed: 0,
            max_sweeps: 400,
            initial_step: 0.5,
            min_step: 1e-7,
        }
    }
}

/// Eigenvalues above this count towards the rank in the roof search.
const RANK_TOL: f64 = 1e-12;

/// The spectral ensemble of `ρ`, or the basis-state ensemble when `ρ` is
/// diagonal.
pub fn eigen_ensemble(rho: &DensityMatrix) -> Vec<(f64, PureState)> {
    let d = rho.dim();
    if rho.max_off_diagonal() <= RANK_TOL {
        return rho
            .populations()
            .entries()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > RANK_TOL)
            .map(|(i, &p)| (p, PureState::basis(d, i).expect("index in range")))
            .collect();
    }
    let (values, vectors) = rho.eigen();
    values
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &l)| l > RANK_TOL)
        .map(|(k, &l)| {
            let v = vectors.column(k).into_owned();
            (l, PureState::from_vector(&v).expect("unit eigenvector"))
        })
        .collect()
}

/// Average of `C_f` over [`eigen_ensemble`].
pub fn eigen_ensemble_value(f: &CoherenceFunctional, rho: &DensityMatrix) -> Result<f64> {
    eigen_ensemble(rho)
        .iter()
        .map(|(p, s)| Ok(p * f.coherence_pure(s)?))
        .sum()
}

/// An upper bound on the convex roof `C_f(ρ)`.
///
/// Every ensemble of `ρ` with `m` members has the form
/// `ψ̃_j = Σ_k U_{jk} √λ_k |e_k⟩` for an `m × rank` isometry `U`. The search
/// moves through isometries by complex Givens rotations between pairs of
/// members, each of which only changes two ensemble members, and accepts a
/// rotation whenever the ensemble average drops. Restart 0 starts from the
/// spectral ensemble, so the result never exceeds its value.
///
/// Pure `ρ` returns `C_f` of its eigenvector and diagonal `ρ` the basis-state
/// ensemble, both without searching.
pub fn convex_roof_upper(
    f: &CoherenceFunctional,
    rho: &DensityMatrix,
    options: &RoofOptions,
) -> Result<RoofResult> {
    let d = rho.dim();
    f.check_dim(d)?;
    let start = eigen_ensemble(rho);
    let rank = start.len();
    if rank <= 1 || rho.max_off_diagonal() <= RANK_TOL {
        let value = start
            .iter()
            .map(|(p, s)| Ok(p * f.coherence_pure(s)?))
            .sum::<Result<f64>>()?;
        return Ok(RoofResult {
            value,
            ensemble: start,
            quality: RoofQuality::UpperBound,
        });
    }

    let m = options.ensemble_size.unwrap_or(rank * rank);
    if m < rank {
        return Err(Error::Parameter(format!(
            "ensemble size {m} is below the rank {rank}"
        )));
    }
    // rows of `base` are √λ_k e_k^T
    let base = DMatrix::from_fn(rank, d, |k, i| {
        let (p, s) = &start[k];
        s.amplitudes()[i] * p.sqrt()
    });

    let restarts = options.restarts.max(1);
    let runs: Vec<(f64, DMatrix<C64>)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            rng.set_stream(r as u64);
            let iso = if r == 0 {
                DMatrix::<C64>::identity(m, rank)
            } else {
                random::unitary(m, &mut rng).columns(0, rank).into_owned()
            };
            let mut members = iso * &base;
            let value = givens_search(f, &mut members, options, &mut rng);
            (value, members)
        })
        .collect();

    let (value, members) = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.0.total_cmp(&b.0).then(ia.cmp(ib)))
        .map(|(_, run)| run)
        .expect("at least one restart");

    let ensemble = (0..m)
        .filter_map(|j| {
            let row = members.row(j);
            let p = row.norm_squared();
            (p > 1e-14).then(|| {
                let amps = row.iter().copied().collect();
                (p, PureState::normalized(amps).expect("nonzero member"))
            })
        })
        .collect();
    Ok(RoofResult {
        value,
        ensemble,
        quality: RoofQuality::UpperBound,
    })
}

fn member_cost(f: &CoherenceFunctional, amps: &[C64]) -> f64 {
    let p: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if p <= 1e-300 {
        return 0.0;
    }
    let x: Vec<f64> = amps.iter().map(|a| a.norm_sqr() / p).collect();
    p * (f.eval)(&x)
}

/// A candidate rotation: combined cost, the two new rows, and their costs.
type Move = (f64, Vec<C64>, Vec<C64>, f64, f64);

fn givens_search(
    f: &CoherenceFunctional,
    members: &mut DMatrix<C64>,
    options: &RoofOptions,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let (m, d) = members.shape();
    let row = |mat: &DMatrix<C64>, j: usize| -> Vec<C64> { mat.row(j).iter().copied().collect() };
    let mut costs: Vec<f64> = (0..m).map(|j| member_cost(f, &row(members, j))).collect();
    let mut step = options.initial_step;

    for _ in 0..options.max_sweeps {
        let mut improved = false;
        for a in 0..m {
            for b in a + 1..m {
                let ra = row(members, a);
                let rb = row(members, b);
                let current = costs[a] + costs[b];
                let offset = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
                let mut best: Option<Move> = None;
                for phase in [offset, offset + std::f64::consts::FRAC_PI_2] {
                    for theta in [step, -step] {
                        let (c, s) = (theta.cos(), theta.sin());
                        let e = C64::from_polar(1.0, phase);
                        let na: Vec<C64> =
                            (0..d).map(|i| ra[i] * c - e * rb[i] * s).collect();
                        let nb: Vec<C64> =
                            (0..d).map(|i| e.conj() * ra[i] * s + rb[i] * c).collect();
                        let ca = member_cost(f, &na);
                        let cb = member_cost(f, &nb);
                        let total = ca + cb;
                        if total < current - 1e-15
                            && best.as_ref().is_none_or(|bst| total < bst.0)
                        {
                            best = Some((total, na, nb, ca, cb));
                        }
                    }
                }
                if let Some((_, na, nb, ca, cb)) = best {
                    for i in 0..d {
                        members[(a, i)] = na[i];
                        members[(b, i)] = nb[i];
                    }
                    costs[a] = ca;
                    costs[b] = cb;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
            if step < options.min_step {
                break;
            }
        }
    }
    costs.iter().sum()
}
