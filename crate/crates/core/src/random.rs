//! Seeded samplers for states, simplex points and incoherent channels.
//!
//! Everything takes an explicit `Rng` so property suites, demos and the
//! convex-roof optimizer stay reproducible for a fixed seed.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::channels::KrausSet;
use crate::simplex::{sort_desc, ProbVector, TTransform};
use crate::states::PureState;
use crate::{CMatrix, C64};

/// A uniformly distributed point of the simplex (flat Dirichlet).
pub fn prob_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ProbVector {
    let w: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(Exp1) + f64::MIN_POSITIVE).collect();
    ProbVector::normalized(w).expect("positive weights")
}

/// A simplex point where each coordinate is zeroed with probability
/// `zero_prob` (at least one coordinate survives).
pub fn sparse_prob_vector<R: Rng + ?Sized>(d: usize, zero_prob: f64, rng: &mut R) -> ProbVector {
    let keep = rng.random_range(0..d);
    let w: Vec<f64> = (0..d)
        .map(|i| {
            if i != keep && rng.random_bool(zero_prob) {
                0.0
            } else {
                rng.sample::<f64, _>(Exp1) + f64::MIN_POSITIVE
            }
        })
        .collect();
    ProbVector::normalized(w).expect("one positive weight")
}

pub fn phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
}

/// Normalized random nonnegative amplitudes dressed with random phases.
pub fn pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> PureState {
    let amps: Vec<C64> = (0..d).map(|_| rng.random::<f64>() * phase(rng)).collect();
    PureState::normalized(amps).unwrap_or_else(|_| PureState::basis(d, 0).expect("d ≥ 1"))
}

/// A random state with squared amplitudes `x`, each amplitude given a random phase.
pub fn state_with_populations<R: Rng + ?Sized>(x: &ProbVector, rng: &mut R) -> PureState {
    let amps = x.entries().iter().map(|p| p.sqrt() * phase(rng)).collect();
    PureState::normalized(amps).expect("probability vector has unit mass")
}

/// A uniformly random permutation of `0..d`.
pub fn permutation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..d).collect();
    p.shuffle(rng);
    p
}

/// A Haar-ish random unitary from the QR factor of a complex Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    g.qr().q()
}

/// A sorted pair `(x, y)` with `x ≺ y`.
///
/// `y` is a random sorted simplex point; `x` is `y` pushed through a random
/// number of random T-transforms, then re-sorted.
pub fn majorized_pair<R: Rng + ?Sized>(d: usize, rng: &mut R) -> (ProbVector, ProbVector) {
    let y = if rng.random_bool(0.3) {
        sparse_prob_vector(d, 0.4, rng)
    } else {
        prob_vector(d, rng)
    }
    .sorted_desc();
    let mut x = y.entries().to_vec();
    if d > 1 {
        for _ in 0..rng.random_range(0..=2 * d) {
            let i = rng.random_range(0..d);
            let mut j = rng.random_range(0..d - 1);
            if j >= i {
                j += 1;
            }
            let t = TTransform::new(i, j, rng.random::<f64>()).expect("valid transform");
            t.apply(&mut x);
        }
    }
    sort_desc(&mut x);
    let x = ProbVector::normalized(x).expect("T-transforms preserve mass");
    (x, y)
}

/// A random complete incoherent Kraus set with `n_ops` operators on `C^d`.
///
/// Operators come in groups sharing a column-to-row map. Within a group, the
/// columns landing on the same row get mutually orthogonal coefficient vectors
/// (columns of a random unitary), so every group contributes a diagonal term to
/// `Σ K†K`. A final diagonal rescaling of the columns makes the set complete
/// without disturbing the one-nonzero-per-column structure.
pub fn incoherent_channel<R: Rng + ?Sized>(d: usize, n_ops: usize, rng: &mut R) -> KrausSet {
    assert!(d >= 1 && n_ops >= 1, "need a positive dimension and operator count");
    let mut operators: Vec<CMatrix> = Vec::with_capacity(n_ops);
    let mut remaining = n_ops;
    while remaining > 0 {
        let first = operators.is_empty();
        let g = rng.random_range(1..=remaining);
        remaining -= g;

        let mut row_of = vec![0; d];
        let mut slot_of = vec![0; d];
        let mut load = vec![0; d];
        for j in 0..d {
            let r = loop {
                let r = rng.random_range(0..d);
                if load[r] < g {
                    break r;
                }
            };
            row_of[j] = r;
            slot_of[j] = load[r];
            load[r] += 1;
        }
        let weights: Vec<f64> = (0..d)
            .map(|_| {
                if !first && rng.random_bool(0.25) {
                    0.0
                } else {
                    rng.random_range(0.2..1.0)
                }
            })
            .collect();
        let row_unitaries: Vec<CMatrix> = (0..d).map(|_| unitary(g, rng)).collect();

        for n in 0..g {
            let mut k = CMatrix::zeros(d, d);
            for j in 0..d {
                k[(row_of[j], j)] = row_unitaries[row_of[j]][(n, slot_of[j])] * weights[j];
            }
            operators.push(k);
        }
    }

    let mut col_norm = vec![0.0; d];
    for k in &operators {
        for (j, norm) in col_norm.iter_mut().enumerate() {
            *norm += k.column(j).norm_squared();
        }
    }
    for k in operators.iter_mut() {
        for (j, norm) in col_norm.iter().enumerate() {
            k.column_mut(j).scale_mut(norm.sqrt().recip());
        }
    }
    KrausSet::new(operators).expect("operators share a shape")
}
