//! Pure states and density matrices in the fixed incoherent basis.
//!
//! Coherence is invariant under two families of incoherent unitaries: diagonal
//! phases and basis permutations. [`PureState::canonicalize`] uses both to bring
//! a state into the form every conversion routine works in: real,
//! nonnegative, non-increasing amplitudes.

use nalgebra::{DVector, SymmetricEigen};

use crate::simplex::ProbVector;
use crate::tolerance::{COMPARE, SUPPORT};
use crate::{CMatrix, Error, Result, C64};

/// Default cap on the number of amplitudes a tensor power may allocate.
pub const TENSOR_CAP: usize = 1_000_000;

/// A normalized pure state `Σ ψ_i |i⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Wraps amplitudes whose squared moduli sum to one within `1e-9`.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Empty);
        }
        let total: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !total.is_finite() || (total - 1.0).abs() > COMPARE {
            return Err(Error::NotNormalized { total });
        }
        Ok(Self { amplitudes })
    }

    /// Rescales nonzero amplitudes to unit norm.
    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let total: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::NotNormalized { total });
        }
        let scale = total.sqrt().recip();
        Self::new(amplitudes.into_iter().map(|a| a * scale).collect())
    }

    /// A state from real amplitudes, normalized.
    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::normalized(amplitudes.iter().map(|&a| C64::new(a, 0.0)).collect())
    }

    /// The state with amplitudes `√x_i`.
    pub fn from_probabilities(x: &ProbVector) -> Self {
        Self {
            amplitudes: x.entries().iter().map(|&p| C64::new(p.sqrt(), 0.0)).collect(),
        }
    }

    /// The maximally coherent state `(1/√d) Σ |i⟩`.
    pub fn maximally_coherent(d: usize) -> Result<Self> {
        Self::from_real(&vec![1.0; d])
    }

    /// The basis state `|index⟩` (0-based).
    pub fn basis(d: usize, index: usize) -> Result<Self> {
        Ok(Self::from_probabilities(&ProbVector::vertex(d, index)?))
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn to_vector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.amplitudes)
    }

    /// Builds a state from `v / ‖v‖`, e.g. the output branch of a Kraus operator.
    pub fn from_vector(v: &DVector<C64>) -> Result<Self> {
        Self::normalized(v.iter().copied().collect())
    }

    /// The vector `(|ψ_1|², …, |ψ_d|²)`.
    pub fn squared_amplitudes(&self) -> ProbVector {
        let p: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        let total: f64 = p.iter().sum();
        // the norm invariant holds to 1e-9; renormalize so downstream sums are tight
        ProbVector::new(p.into_iter().map(|x| x / total).collect())
            .expect("normalized state yields a probability vector")
    }

    /// Number of amplitudes with modulus above `1e-9`.
    pub fn support_size(&self) -> usize {
        self.amplitudes.iter().filter(|a| a.norm() > SUPPORT).count()
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        let overlap: C64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(overlap.norm_sqr())
    }

    /// Embeds into dimension `d ≥ dim` by appending zero amplitudes.
    pub fn padded(&self, d: usize) -> PureState {
        let mut amplitudes = self.amplitudes.clone();
        if d > amplitudes.len() {
            amplitudes.resize(d, C64::new(0.0, 0.0));
        }
        PureState { amplitudes }
    }

    /// `|ψ⟩^{⊗n}` with at most [`TENSOR_CAP`] amplitudes.
    pub fn tensor_power(&self, n: usize) -> Result<PureState> {
        self.tensor_power_capped(n, TENSOR_CAP)
    }

    /// `|ψ⟩^{⊗n}` in row-major multi-index order (the last factor varies fastest).
    pub fn tensor_power_capped(&self, n: usize, cap: usize) -> Result<PureState> {
        if n == 0 {
            return Err(Error::Parameter("tensor power needs n ≥ 1".into()));
        }
        let d = self.dim();
        let requested = u32::try_from(n)
            .ok()
            .and_then(|n| d.checked_pow(n))
            .unwrap_or(usize::MAX);
        if requested > cap {
            return Err(Error::ResourceCap { requested, cap });
        }
        let mut out = self.amplitudes.clone();
        for _ in 1..n {
            out = out
                .iter()
                .flat_map(|&a| self.amplitudes.iter().map(move |&b| a * b))
                .collect();
        }
        PureState::new(out)
    }

    /// Projector `|ψ⟩⟨ψ|`.
    pub fn density_matrix(&self) -> DensityMatrix {
        let v = self.to_vector();
        DensityMatrix { entries: &v * v.adjoint() }
    }

    /// Sorts moduli non-increasingly and strips phases.
    ///
    /// The permutation is stable, so equal moduli keep their order. The phase
    /// of a zero amplitude is taken to be one.
    pub fn canonicalize(&self) -> Canonicalization {
        let mut permutation: Vec<usize> = (0..self.dim()).collect();
        permutation.sort_by(|&a, &b| {
            self.amplitudes[b]
                .norm_sqr()
                .total_cmp(&self.amplitudes[a].norm_sqr())
        });
        let phases: Vec<C64> = self
            .amplitudes
            .iter()
            .map(|a| {
                let r = a.norm();
                if r > 0.0 {
                    a.conj() / r
                } else {
                    C64::new(1.0, 0.0)
                }
            })
            .collect();
        let amplitudes = permutation
            .iter()
            .map(|&p| C64::new(self.amplitudes[p].norm(), 0.0))
            .collect();
        Canonicalization {
            state: PureState { amplitudes },
            permutation,
            phases,
        }
    }
}

/// A state brought to sorted, real, nonnegative form by an incoherent unitary.
///
/// With `D = diag(phases)` and `P` the permutation sending basis vector
/// `permutation[k]` to `k`, the canonical state is `P·D·ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Canonicalization {
    pub state: PureState,
    /// `permutation[k]` is the original index that lands at position `k`.
    pub permutation: Vec<usize>,
    /// Unit-modulus phase applied to each original coordinate.
    pub phases: Vec<C64>,
}

impl Canonicalization {
    /// The incoherent unitary `U = P·D` with `U ψ = canonical`.
    pub fn unitary(&self) -> CMatrix {
        let d = self.permutation.len();
        let mut u = CMatrix::zeros(d, d);
        for (k, &p) in self.permutation.iter().enumerate() {
            u[(k, p)] = self.phases[p];
        }
        u
    }

    /// Applies `U` to a state of the same dimension.
    pub fn apply(&self, psi: &PureState) -> Result<PureState> {
        if psi.dim() != self.permutation.len() {
            return Err(Error::Dimension {
                expected: self.permutation.len(),
                found: psi.dim(),
            });
        }
        let amplitudes = self
            .permutation
            .iter()
            .map(|&p| self.phases[p] * psi.amplitudes[p])
            .collect();
        Ok(PureState { amplitudes })
    }

    /// Applies `U†`, mapping canonical-frame states back to the original frame.
    pub fn restore(&self, canonical: &PureState) -> Result<PureState> {
        let d = self.permutation.len();
        if canonical.dim() != d {
            return Err(Error::Dimension { expected: d, found: canonical.dim() });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); d];
        for (k, &p) in self.permutation.iter().enumerate() {
            amplitudes[p] = self.phases[p].conj() * canonical.amplitudes[k];
        }
        Ok(PureState { amplitudes })
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    entries: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity, each within `1e-9`.
    pub fn new(entries: CMatrix) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols || rows == 0 {
            return Err(Error::DensityMatrix(format!("shape {rows}x{cols} is not square")));
        }
        let asym = (&entries - entries.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if asym > COMPARE {
            return Err(Error::DensityMatrix(format!("not Hermitian (deviation {asym:e})")));
        }
        let trace = entries.trace();
        if (trace.re - 1.0).abs() > COMPARE || trace.im.abs() > COMPARE {
            return Err(Error::DensityMatrix(format!("trace {trace} is not 1")));
        }
        let hermitian = (&entries + entries.adjoint()).scale(0.5);
        let min_eig = SymmetricEigen::new(hermitian.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -COMPARE {
            return Err(Error::DensityMatrix(format!(
                "not positive semidefinite (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { entries: hermitian })
    }

    /// `diag(p_1, …, p_d)`, an incoherent state.
    pub fn diagonal(p: &ProbVector) -> Self {
        let d = p.dim();
        let mut entries = CMatrix::zeros(d, d);
        for (i, &x) in p.entries().iter().enumerate() {
            entries[(i, i)] = C64::new(x, 0.0);
        }
        Self { entries }
    }

    /// `Σ_j p_j |ψ_j⟩⟨ψ_j|`.
    pub fn mixture(ensemble: &[(f64, PureState)]) -> Result<Self> {
        let d = ensemble.first().map(|(_, s)| s.dim()).ok_or(Error::Empty)?;
        let mut entries = CMatrix::zeros(d, d);
        for (w, s) in ensemble {
            if s.dim() != d {
                return Err(Error::Dimension { expected: d, found: s.dim() });
            }
            entries += s.density_matrix().entries.scale(*w);
        }
        Self::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    /// Largest off-diagonal modulus.
    pub fn max_off_diagonal(&self) -> f64 {
        let d = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    m = m.max(self.entries[(i, j)].norm());
                }
            }
        }
        m
    }

    /// The diagonal as a probability vector.
    pub fn populations(&self) -> ProbVector {
        let p: Vec<f64> = (0..self.dim()).map(|i| self.entries[(i, i)].re.max(0.0)).collect();
        ProbVector::normalized(p).expect("density matrix has positive trace")
    }

    /// Eigenvalues (ascending) and orthonormal eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        let eig = SymmetricEigen::new(self.entries.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_columns(
            &order.iter().map(|&k| eig.eigenvectors.column(k).into_owned()).collect::<Vec<_>>(),
        );
        (values, vectors)
    }

    /// Number of eigenvalues above `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        self.eigen().0.iter().filter(|&&l| l > tol).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(matches!(
            PureState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]),
            Err(Error::NotNormalized { .. })
        ));
        assert_eq!(PureState::new(vec![]), Err(Error::Empty));
    }

    #[test]
    fn canonicalize_equal_moduli() {
        let psi = PureState::new(vec![c(0.0, FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2, 0.0)]).unwrap();
        let can = psi.canonicalize();
        assert_eq!(can.permutation, vec![0, 1]);
        assert!((can.phases[0] - c(0.0, -1.0)).norm() < 1e-15);
        assert!((can.phases[1] - c(-1.0, 0.0)).norm() < 1e-15);
        for a in can.state.amplitudes() {
            assert!((a - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn canonicalize_basis_relabel() {
        let psi = PureState::new(vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let can = psi.canonicalize();
        assert_eq!(can.permutation, vec![1, 0]);
        assert_eq!(can.state.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(can.phases[0], c(1.0, 0.0));
    }

    #[test]
    fn canonicalize_three_level() {
        let psi = PureState::new(vec![c(0.3, 0.0), c(0.0, 0.5), c(0.66f64.sqrt(), 0.0)]).unwrap();
        let can = psi.canonicalize();
        assert_eq!(can.permutation, vec![2, 1, 0]);
        let want = [0.66f64.sqrt(), 0.5, 0.3];
        for (a, w) in can.state.amplitudes().iter().zip(want) {
            assert!((a - c(w, 0.0)).norm() < 1e-12);
        }
        let via_matrix = can.unitary() * psi.to_vector();
        for (a, b) in via_matrix.iter().zip(can.state.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
        let back = can.restore(&can.state).unwrap();
        for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn squared_amplitudes_drop_phases() {
        let s = 1.0 / 3f64.sqrt();
        let psi = PureState::new(vec![c(0.0, s), c(-s, 0.0), c(s, 0.0)]).unwrap();
        for p in psi.squared_amplitudes().entries() {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
        let e = PureState::basis(3, 0).unwrap();
        assert_eq!(e.squared_amplitudes().entries(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn tensor_power_examples() {
        let plus = PureState::from_real(&[1.0, 1.0]).unwrap();
        let two = plus.tensor_power(2).unwrap();
        for a in two.amplitudes() {
            assert!((a - c(0.5, 0.0)).norm() < 1e-15);
        }
        assert_eq!(plus.tensor_power(1).unwrap(), plus);

        let psi = PureState::from_real(&[1.0, 1.0, 0.0]).unwrap();
        let sq = psi.tensor_power(2).unwrap();
        assert_eq!(sq.dim(), 9);
        let halves = sq.amplitudes().iter().filter(|a| (a.re - 0.5).abs() < 1e-12).count();
        let zeros = sq.amplitudes().iter().filter(|a| a.norm() == 0.0).count();
        assert_eq!((halves, zeros), (4, 5));
        // row-major: index (i1, i2) -> 3*i1 + i2
        assert!(sq.amplitudes()[1].norm() > 0.4 && sq.amplitudes()[2].norm() == 0.0);
    }

    #[test]
    fn tensor_power_cap_and_zero() {
        let psi = PureState::maximally_coherent(10).unwrap();
        assert_eq!(
            psi.tensor_power_capped(3, 999),
            Err(Error::ResourceCap { requested: 1000, cap: 999 })
        );
        assert!(psi.tensor_power(0).is_err());
        assert!(matches!(psi.tensor_power(7), Err(Error::ResourceCap { .. })));
    }

    #[test]
    fn support_sizes() {
        let psi = PureState::from_real(&[1.0, 1.0, 0.0]).unwrap();
        assert_eq!(psi.support_size(), 2);
        assert_eq!(PureState::maximally_coherent(3).unwrap().support_size(), 3);
        assert_eq!(psi.tensor_power(2).unwrap().support_size(), 4);
    }

    #[test]
    fn density_matrix_validation() {
        let rho = PureState::from_real(&[1.0, 1.0]).unwrap().density_matrix();
        assert!(DensityMatrix::new(rho.entries().clone()).is_ok());
        let mut bad = rho.entries().clone();
        bad[(0, 1)] = c(0.5, 0.1);
        assert!(DensityMatrix::new(bad).is_err());
        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = c(1.5, 0.0);
        neg[(1, 1)] = c(-0.5, 0.0);
        assert!(matches!(DensityMatrix::new(neg), Err(Error::DensityMatrix(_))));
        assert!(DensityMatrix::new(CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn mixture_and_rank() {
        let a = PureState::basis(2, 0).unwrap();
        let b = PureState::from_real(&[1.0, 1.0]).unwrap();
        let rho = DensityMatrix::mixture(&[(0.5, a), (0.5, b)]).unwrap();
        assert_eq!(rho.rank(1e-12), 2);
        assert!((rho.entries()[(0, 0)].re - 0.75).abs() < 1e-15);
        let (vals, _) = rho.eigen();
        assert!(vals[0] <= vals[1]);
    }
}
