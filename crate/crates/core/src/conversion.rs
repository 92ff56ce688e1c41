//! Optimal single-copy conversion of pure states under incoherent operations.
//!
//! With amplitudes sorted by modulus, the greatest probability of turning
//! `ψ` into `φ` is
//!
//! ```text
//! P(ψ → φ) = min_{l ∈ [1, d]}  Σ_{i≥l} |ψ_i|²  /  Σ_{i≥l} |φ_i|²
//! ```
//!
//! Each ratio is bounded by monotonicity of the Ky Fan tail measures, and the
//! bound is attained by a two-step protocol:
//!
//! 1. a deterministic incoherent operation takes `ψ` to a temporary state `γ`
//!    whose squared amplitudes majorize those of `ψ`;
//! 2. a diagonal filter `{M, √(I − M²)}` maps `γ` to `φ` on its first outcome,
//!    which occurs with probability `P(ψ → φ)`.
//!
//! `γ` and `M` come from a [`ConversionLadder`]: breakpoints `l_1 > l_2 > ⋯ >
//! l_k = 1` cut the coordinates into blocks, and on block `j` the state `γ` is
//! `φ` scaled by `√r_j`.

use crate::channels::{Branch, KrausSet};
use crate::simplex::{tail_sums_of_sorted, ttransform_chain, ProbVector};
use crate::states::{Canonicalization, PureState};
use crate::tolerance::{COMPARE, PRUNE, RATIO_TIE, ZERO_TAIL};
use crate::{CMatrix, Error, Result, C64};

/// Label carried by the filter outcome that produces the target state.
pub const SUCCESS: &str = "success";
/// Label of the filter outcome that fails.
pub const FAILURE: &str = "fail";
/// Label of the single operator in the leading change-of-frame stage.
pub const FRAME: &str = "frame";

fn common_frame(psi: &PureState, phi: &PureState) -> (Canonicalization, Canonicalization) {
    let d = psi.dim().max(phi.dim());
    (psi.padded(d).canonicalize(), phi.padded(d).canonicalize())
}

fn sorted_squares(state: &PureState) -> Vec<f64> {
    state.squared_amplitudes().sorted_desc().into_entries()
}

/// Closed-form optimal conversion probability.
///
/// The shorter state is zero-padded. Ranks where the target tail is at most
/// `1e-12` impose no constraint; a rank where the target tail is positive
/// but the source tail vanishes forces the result to zero.
pub fn conversion_probability(psi: &PureState, phi: &PureState) -> Result<f64> {
    let d = psi.dim().max(phi.dim());
    let source = tail_sums_of_sorted(&sorted_squares(&psi.padded(d)));
    let target = tail_sums_of_sorted(&sorted_squares(&phi.padded(d)));
    Ok(probability_from_tails(&source, &target))
}

fn probability_from_tails(source: &[f64], target: &[f64]) -> f64 {
    let mut best: f64 = 1.0;
    for (&s, &t) in source.iter().zip(target).skip(1) {
        if t <= ZERO_TAIL {
            continue;
        }
        if s <= ZERO_TAIL {
            return 0.0;
        }
        best = best.min(s / t);
    }
    best.clamp(0.0, 1.0)
}

/// Breakpoints, block ratios and the temporary state of an optimal conversion,
/// all in the canonical (sorted, nonnegative) frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversionLadder {
    breakpoints: Vec<usize>,
    ratios: Vec<f64>,
    gamma: PureState,
    target: PureState,
}

impl ConversionLadder {
    /// Assembles a ladder from its parts.
    ///
    /// `breakpoints` is `[l_0 = d+1, l_1, …, l_k = 1]` (1-based, strictly
    /// decreasing) and `ratios` is `[r_1, …, r_k]` (positive, strictly
    /// increasing). `target` is the canonical target state; `γ` is built from
    /// it block by block.
    pub fn new(breakpoints: Vec<usize>, ratios: Vec<f64>, target: PureState) -> Result<Self> {
        let d = target.dim();
        if breakpoints.first() != Some(&(d + 1)) || breakpoints.last() != Some(&1) {
            return Err(Error::Ladder(format!(
                "breakpoints must run from {} down to 1, got {breakpoints:?}",
                d + 1
            )));
        }
        if breakpoints.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Ladder(format!("breakpoints {breakpoints:?} are not strictly decreasing")));
        }
        if ratios.len() + 1 != breakpoints.len() {
            return Err(Error::Ladder(format!(
                "{} ratios for {} blocks",
                ratios.len(),
                breakpoints.len() - 1
            )));
        }
        if ratios.iter().any(|&r| !r.is_finite() || r <= 0.0) {
            return Err(Error::Ladder(format!("ratios {ratios:?} must be positive")));
        }
        if ratios.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Ladder(format!("ratios {ratios:?} are not strictly increasing")));
        }
        let mut amps = target.amplitudes().to_vec();
        for (j, r) in ratios.iter().enumerate() {
            let (lo, hi) = (breakpoints[j + 1] - 1, breakpoints[j] - 1);
            for a in &mut amps[lo..hi] {
                *a *= r.sqrt();
            }
        }
        let gamma = PureState::new(amps)?;
        Ok(Self {
            breakpoints,
            ratios,
            gamma,
            target,
        })
    }

    /// `[l_0 = d+1, l_1, …, l_k = 1]`, 1-based.
    pub fn breakpoints(&self) -> &[usize] {
        &self.breakpoints
    }

    /// `[r_1, …, r_k]`.
    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    /// The temporary state `γ`.
    pub fn gamma(&self) -> &PureState {
        &self.gamma
    }

    /// The canonical target `φ`.
    pub fn target(&self) -> &PureState {
        &self.target
    }

    pub fn dim(&self) -> usize {
        self.target.dim()
    }

    /// `r_1`, clamped to `[0, 1]`.
    pub fn success_probability(&self) -> f64 {
        self.ratios[0].clamp(0.0, 1.0)
    }

    /// 0-based coordinate range of block `j` (1-based, `1 ≤ j ≤ k`).
    pub fn block(&self, j: usize) -> std::ops::Range<usize> {
        self.breakpoints[j] - 1..self.breakpoints[j - 1] - 1
    }

    /// Diagonal of the filter `M`: `√(r_1 / r_j)` on block `j`.
    pub fn filter_diagonal(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.dim()];
        for j in 1..=self.ratios.len() {
            let value = (self.ratios[0] / self.ratios[j - 1]).sqrt();
            for i in self.block(j) {
                m[i] = value;
            }
        }
        m
    }
}

/// Builds the ladder for `ψ → φ` in the canonical frame.
///
/// `l_1` is the smallest minimizer of the tail ratio over `[1, d]`; then
/// `l_2` is the smallest minimizer of the block ratio over `[1, l_1 − 1]`,
/// and so on until the breakpoint reaches 1. Ratios within `1e-12` count as
/// ties.
pub fn build_ladder(psi: &PureState, phi: &PureState) -> Result<ConversionLadder> {
    let (source, target) = common_frame(psi, phi);
    let x = sorted_squares(&source.state);
    let y = sorted_squares(&target.state);
    let d = x.len();

    let mut breakpoints = vec![d + 1];
    let mut ratios = Vec::new();
    let mut end = d;
    while end > 0 {
        // candidate blocks [l-1, end) for l = 1..=end
        let mut candidates = Vec::with_capacity(end);
        let (mut sx, mut sy) = (0.0, 0.0);
        for l in (1..=end).rev() {
            sx += x[l - 1];
            sy += y[l - 1];
            if sy <= ZERO_TAIL {
                continue;
            }
            if sx <= ZERO_TAIL {
                return Err(Error::NoLadder);
            }
            let ratio = if l == 1 && end == d { 1.0 } else { sx / sy };
            candidates.push((l, ratio));
        }
        let (l, r) = candidates
            .into_iter()
            .rev()
            .reduce(|best, cand| if cand.1 < best.1 - RATIO_TIE { cand } else { best })
            .ok_or(Error::NoLadder)?;
        breakpoints.push(l);
        ratios.push(r);
        end = l - 1;
    }
    ConversionLadder::new(breakpoints, ratios, target.state)
}

/// The filter `{M, √(I − M²)}` with `M γ = √r_1 φ`.
///
/// When `M = I` (single block) the complement vanishes and only `M` is kept.
pub fn filter_operator(ladder: &ConversionLadder) -> KrausSet {
    let m = ladder.filter_diagonal();
    let d = m.len();
    let diag = |f: &dyn Fn(f64) -> f64| {
        CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            d,
            m.iter().map(|&v| C64::new(f(v), 0.0)),
        ))
    };
    let keep = diag(&|v| v);
    let complement = diag(&|v| (1.0 - v * v).max(0.0).sqrt());
    let (ops, labels) = if complement.norm() <= PRUNE {
        (vec![keep], vec![SUCCESS.to_string()])
    } else {
        (vec![keep, complement], vec![SUCCESS.to_string(), FAILURE.to_string()])
    };
    KrausSet::with_labels(ops, labels).expect("diagonal operators share a shape")
}

fn check_canonical(name: &str, state: &PureState) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(state.dim());
    for a in state.amplitudes() {
        if a.im.abs() > 1e-12 || a.re < -1e-12 {
            return Err(Error::Precondition(format!("{name} is not real and nonnegative")));
        }
        out.push(a.re.max(0.0));
    }
    if out.windows(2).any(|w| w[1] * w[1] > w[0] * w[0] + COMPARE) {
        return Err(Error::Precondition(format!("{name} is not sorted by modulus")));
    }
    Ok(out)
}

/// One two-outcome incoherent measurement realizing a T-transform step.
///
/// `source` has real nonnegative amplitudes. Coordinates `i`, `j` (0-based) are
/// moved to `(c_i, c_j)` with `target_squared = (c_i², c_j²)`; the others stay.
/// Feasibility means `s_i² = p c_i² + (1−p) c_j²` and
/// `s_j² = p c_j² + (1−p) c_i²` for some `p ∈ [0, 1]`.
///
/// The outcomes are `K_1 = diag(a)` and `K_2 = S_{ij} · diag(b)` with `S_{ij}` the
/// transposition; both send `source` to the same output state, with
/// probabilities `p` and `1 − p`.
pub fn two_level_step(
    source: &PureState,
    target_squared: (f64, f64),
    i: usize,
    j: usize,
) -> Result<KrausSet> {
    let d = source.dim();
    if i == j || i >= d || j >= d {
        return Err(Error::Parameter(format!("invalid coordinate pair ({i}, {j}) in dimension {d}")));
    }
    let s: Vec<f64> = source
        .amplitudes()
        .iter()
        .map(|a| {
            if a.im.abs() > 1e-12 || a.re < -1e-12 {
                Err(Error::Precondition("source is not real and nonnegative".into()))
            } else {
                Ok(a.re.max(0.0))
            }
        })
        .collect::<Result<_>>()?;
    let (ci2, cj2) = target_squared;
    if ci2 < -COMPARE || cj2 < -COMPARE {
        return Err(Error::Parameter("target squares must be nonnegative".into()));
    }
    let (ci2, cj2) = (ci2.max(0.0), cj2.max(0.0));
    let (si2, sj2) = (s[i] * s[i], s[j] * s[j]);
    if (si2 + sj2 - ci2 - cj2).abs() > COMPARE {
        return Err(Error::Precondition(format!(
            "pair mass {} cannot become {}",
            si2 + sj2,
            ci2 + cj2
        )));
    }

    let gap = ci2 - cj2;
    let p = if gap.abs() <= 1e-15 {
        if (si2 - ci2).abs() > COMPARE {
            return Err(Error::InfeasibleStep { weight: f64::NAN });
        }
        1.0
    } else {
        let p = (si2 - cj2) / gap;
        if !(-COMPARE..=1.0 + COMPARE).contains(&p) {
            return Err(Error::InfeasibleStep { weight: p });
        }
        p.clamp(0.0, 1.0)
    };
    let q = 1.0 - p;
    let (ci, cj) = (ci2.sqrt(), cj2.sqrt());

    let mut a = vec![p.sqrt(); d];
    let mut b = vec![q.sqrt(); d];
    for (m, own, other) in [(i, ci, cj), (j, cj, ci)] {
        if s[m] > 0.0 {
            a[m] = p.sqrt() * own / s[m];
            b[m] = q.sqrt() * other / s[m];
            // exact column normalization; the pair equations hold to rounding
            let n = (a[m] * a[m] + b[m] * b[m]).sqrt();
            if n > 0.0 {
                a[m] /= n;
                b[m] /= n;
            } else {
                a[m] = 1.0;
            }
        }
    }

    let mut k1 = CMatrix::zeros(d, d);
    let mut k2 = CMatrix::zeros(d, d);
    for m in 0..d {
        k1[(m, m)] = C64::new(a[m], 0.0);
        let row = if m == i {
            j
        } else if m == j {
            i
        } else {
            m
        };
        k2[(row, m)] = C64::new(b[m], 0.0);
    }
    let mut ops = Vec::new();
    let mut labels = Vec::new();
    for (k, label) in [(k1, "keep"), (k2, "swap")] {
        if k.norm() > PRUNE {
            ops.push(k);
            labels.push(label.to_string());
        }
    }
    KrausSet::with_labels(ops, labels)
}

/// Deterministic incoherent protocol taking canonical `ψ` to canonical `γ`.
///
/// Requires `|ψ|² ≺ |γ|²`. The T-transform chain from `|γ|²` down to `|ψ|²`
/// is undone one step at a time; each step is a [`two_level_step`] whose two
/// outcomes land on the same state, so every branch path ends at `γ`.
pub fn deterministic_protocol(psi: &PureState, gamma: &PureState) -> Result<Vec<KrausSet>> {
    if psi.dim() != gamma.dim() {
        return Err(Error::Dimension {
            expected: psi.dim(),
            found: gamma.dim(),
        });
    }
    check_canonical("source", psi)?;
    check_canonical("target", gamma)?;
    let x = psi.squared_amplitudes();
    let y = gamma.squared_amplitudes();
    let chain = ttransform_chain(&x, &y)?;

    // waypoints[m] is the vector before T_{m+1} acts: waypoints[0] ≈ x, waypoints[k] = y
    let k = chain.len();
    let mut waypoints = vec![y.entries().to_vec(); k + 1];
    for m in (0..k).rev() {
        let mut w = waypoints[m + 1].clone();
        chain[m].apply(&mut w);
        waypoints[m] = w;
    }

    let mut current = psi.clone();
    let mut stages = Vec::with_capacity(k);
    for (m, step) in chain.iter().enumerate() {
        let next = &waypoints[m + 1];
        let stage = two_level_step(&current, (next[step.i], next[step.j]), step.i, step.j)?;
        current = advance(&stage, &current)?;
        stages.push(stage);
    }
    Ok(stages)
}

fn advance(stage: &KrausSet, state: &PureState) -> Result<PureState> {
    let branches = stage.apply_selective(state)?;
    let best = branches
        .into_iter()
        .max_by(|a, b| a.probability.total_cmp(&b.probability))
        .ok_or(Error::ProbabilityLeak { lost: 1.0 })?;
    // strip rounding in phase so the next step sees a real nonnegative source
    let amps = best.state.amplitudes().iter().map(|a| C64::new(a.norm(), 0.0)).collect();
    PureState::normalized(amps)
}

/// An explicit optimal protocol in the original (uncanonicalized) frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    /// Stages in application order: change of frame, deterministic steps, filter.
    pub stages: Vec<KrausSet>,
    /// Final-stage label marking success branches.
    pub success_label: String,
    pub source_frame: Canonicalization,
    pub target_frame: Canonicalization,
    /// The closed-form probability the protocol attains.
    pub success_probability: f64,
    pub ladder: Option<ConversionLadder>,
}

/// Outcome of running a protocol on a concrete input, branch by branch.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    /// Every branch path with nonzero probability; labels are joined with `/`.
    pub paths: Vec<Branch<PureState>>,
    pub success_probability: f64,
    /// Fidelity of each success path with the target.
    pub success_fidelities: Vec<f64>,
    pub total_probability: f64,
}

impl Simulation {
    pub fn min_success_fidelity(&self) -> Option<f64> {
        self.success_fidelities.iter().copied().reduce(f64::min)
    }
}

impl Protocol {
    pub fn dim(&self) -> usize {
        self.source_frame.permutation.len()
    }

    /// `true` when conversion is impossible and no stages were produced.
    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn is_success(&self, path_label: &str) -> bool {
        path_label.rsplit('/').next() == Some(self.success_label.as_str())
    }

    /// Applies the stages sequentially, tracking every branch path.
    ///
    /// Inputs shorter than the protocol dimension are zero-padded.
    pub fn simulate(&self, psi: &PureState, phi: &PureState) -> Result<Simulation> {
        let d = self.dim();
        if psi.dim() > d || phi.dim() > d {
            return Err(Error::Dimension {
                expected: d,
                found: psi.dim().max(phi.dim()),
            });
        }
        let target = phi.padded(d);
        let mut paths = vec![Branch {
            probability: 1.0,
            state: psi.padded(d),
            label: String::new(),
        }];
        for stage in &self.stages {
            let mut next = Vec::new();
            for path in &paths {
                for b in stage.apply_selective(&path.state)? {
                    let label = if path.label.is_empty() {
                        b.label
                    } else {
                        format!("{}/{}", path.label, b.label)
                    };
                    let probability = path.probability * b.probability;
                    if probability > PRUNE {
                        next.push(Branch {
                            probability,
                            state: b.state,
                            label,
                        });
                    }
                }
            }
            paths = next;
        }
        let mut success_probability = 0.0;
        let mut success_fidelities = Vec::new();
        if !self.stages.is_empty() {
            for p in &paths {
                if self.is_success(&p.label) {
                    success_probability += p.probability;
                    success_fidelities.push(p.state.fidelity(&target)?);
                }
            }
        }
        let total_probability = paths.iter().map(|p| p.probability).sum();
        Ok(Simulation {
            paths,
            success_probability,
            success_fidelities,
            total_probability,
        })
    }

    /// The protocol flattened into a single Kraus set.
    pub fn compose(&self) -> Result<KrausSet> {
        crate::channels::compose(&self.stages)
    }
}

/// The optimal protocol for `ψ → φ`.
///
/// Stages: the unitary taking `ψ` to canonical form, the deterministic part
/// taking it to `γ`, then the filter followed by the inverse of `φ`'s
/// canonicalizing unitary, so the protocol acts on the original states. When
/// the optimal probability is zero the protocol has no stages.
pub fn optimal_protocol(psi: &PureState, phi: &PureState) -> Result<Protocol> {
    let (source, target) = common_frame(psi, phi);
    let probability = conversion_probability(psi, phi)?;
    if probability <= 0.0 {
        return Ok(Protocol {
            stages: Vec::new(),
            success_label: SUCCESS.into(),
            source_frame: source,
            target_frame: target,
            success_probability: 0.0,
            ladder: None,
        });
    }
    let ladder = build_ladder(psi, phi)?;
    let frame = KrausSet::with_labels(vec![source.unitary()], vec![FRAME.into()])?;
    let mut stages = vec![frame];
    stages.extend(deterministic_protocol(&source.state, ladder.gamma())?);
    let last = filter_operator(&ladder).then(&target.unitary().adjoint());
    stages.push(last);

    Ok(Protocol {
        stages,
        success_label: SUCCESS.into(),
        source_frame: source,
        target_frame: target,
        success_probability: probability,
        ladder: Some(ladder),
    })
}

/// `P(ψ → φ^{⊗n})`, zero-padding whichever side is shorter.
///
/// Source copies are covered by passing `ψ.tensor_power(m)` as `psi`.
pub fn multicopy_probability(psi: &PureState, phi: &PureState, n: usize) -> Result<f64> {
    let target = phi.tensor_power(n)?;
    conversion_probability(psi, &target)
}

/// The sufficient zero condition for `n ≥ 2` target copies:
/// fewer nonzero coefficients in `ψ` than `n_φ²`.
pub fn support_shortcut(psi: &PureState, phi: &PureState, n: usize) -> bool {
    n >= 2 && psi.support_size() < phi.support_size().pow(2)
}

/// One row of [`multicopy_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct MulticopyEntry {
    pub copies: usize,
    /// `None` when `φ^{⊗n}` exceeds the amplitude cap.
    pub probability: Option<f64>,
    pub shortcut_zero: bool,
}

/// `P(ψ → φ^{⊗n})` for `n = 1..=max_copies`, with the support shortcut flag.
///
/// When the shortcut applies for every `n ≥ 2`, the best number of copies is a
/// single one.
pub fn multicopy_table(psi: &PureState, phi: &PureState, max_copies: usize) -> Vec<MulticopyEntry> {
    (1..=max_copies)
        .map(|n| MulticopyEntry {
            copies: n,
            probability: multicopy_probability(psi, phi, n).ok(),
            shortcut_zero: support_shortcut(psi, phi, n),
        })
        .collect()
}

/// Tail-ratio form of the bound, through the Ky Fan measures:
/// `min(1, min_{l≥2, C_{f_l}(φ) > 1e-12} C_{f_l}(ψ) / C_{f_l}(φ))`.
///
/// Agrees with [`conversion_probability`] except that a vanishing source tail
/// enters as the ratio `0 / C_{f_l}(φ)`.
pub fn ky_fan_bound(psi: &PureState, phi: &PureState) -> Result<f64> {
    let d = psi.dim().max(phi.dim());
    let (x, y) = (psi.padded(d).squared_amplitudes(), phi.padded(d).squared_amplitudes());
    let mut best: f64 = 1.0;
    for l in 2..=d {
        let f = crate::measures::Builtin::KyFan(l).functional()?;
        let cy = f.evaluate(&y)?;
        if cy > ZERO_TAIL {
            best = best.min(f.evaluate(&x)? / cy);
        }
    }
    Ok(best)
}

/// Whether `|φ|²` majorizes `|ψ|²` after zero-padding.
pub fn deterministically_convertible(psi: &PureState, phi: &PureState) -> Result<bool> {
    let d = psi.dim().max(phi.dim());
    let x: ProbVector = psi.padded(d).squared_amplitudes();
    let y: ProbVector = phi.padded(d).squared_amplitudes();
    y.majorizes(&x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn real(v: &[f64]) -> PureState {
        PureState::from_real(v).unwrap()
    }

    fn sq(v: &[f64]) -> PureState {
        real(&v.iter().map(|x| x.sqrt()).collect::<Vec<_>>())
    }

    #[test]
    fn two_copy_example() {
        let psi = real(&[1.0, 1.0, 0.0]);
        let phi = PureState::maximally_coherent(3).unwrap();
        assert_eq!(conversion_probability(&psi, &phi).unwrap(), 0.0);
        let two = psi.tensor_power(2).unwrap();
        assert!((conversion_probability(&two, &phi).unwrap() - 1.0).abs() < 1e-12);
        // the same pair with ψ given in two dimensions is padded
        let short = real(&[1.0, 1.0]);
        assert_eq!(conversion_probability(&short, &phi).unwrap(), 0.0);
    }

    #[test]
    fn identical_states_convert_surely() {
        let psi = real(&[0.3, -0.5, 0.8]);
        assert_eq!(conversion_probability(&psi, &psi).unwrap(), 1.0);
    }

    #[test]
    fn worked_probability() {
        let p = conversion_probability(&sq(&[0.8, 0.1, 0.1]), &sq(&[0.4, 0.3, 0.3])).unwrap();
        assert!((p - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn worked_ladder() {
        let ladder = build_ladder(&sq(&[0.8, 0.1, 0.1]), &sq(&[0.4, 0.3, 0.3])).unwrap();
        assert_eq!(ladder.breakpoints(), &[4, 2, 1]);
        assert!((ladder.ratios()[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!((ladder.ratios()[1] - 2.0).abs() < 1e-12);
        let g = ladder.gamma().squared_amplitudes();
        for (a, b) in g.entries().iter().zip([0.8, 0.1, 0.1]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn single_block_ladders() {
        let phi = sq(&[0.5, 0.3, 0.2]);
        let ladder = build_ladder(&sq(&[0.4, 0.4, 0.2]), &phi).unwrap();
        assert_eq!(ladder.breakpoints(), &[4, 1]);
        assert_eq!(ladder.ratios(), &[1.0]);
        assert!((ladder.gamma().fidelity(&phi).unwrap() - 1.0).abs() < 1e-12);

        let same = build_ladder(&phi, &phi).unwrap();
        assert_eq!(same.breakpoints(), &[4, 1]);
        assert_eq!(same.success_probability(), 1.0);
    }

    #[test]
    fn ladder_needs_positive_probability() {
        let psi = real(&[1.0, 1.0, 0.0]);
        let phi = PureState::maximally_coherent(3).unwrap();
        assert_eq!(build_ladder(&psi, &phi), Err(Error::NoLadder));
    }

    #[test]
    fn ladder_constructor_rejects_bad_parts() {
        let phi = sq(&[0.4, 0.3, 0.3]);
        assert!(ConversionLadder::new(vec![4, 2, 1], vec![0.5, 0.5], phi.clone()).is_err());
        assert!(ConversionLadder::new(vec![4, 2, 1], vec![2.0, 0.5], phi.clone()).is_err());
        assert!(ConversionLadder::new(vec![4, 2], vec![1.0], phi.clone()).is_err());
        assert!(ConversionLadder::new(vec![4, 1], vec![1.0, 2.0], phi.clone()).is_err());
        assert!(ConversionLadder::new(vec![4, 1], vec![1.0], phi).is_ok());
    }

    #[test]
    fn worked_filter() {
        let ladder = build_ladder(&sq(&[0.8, 0.1, 0.1]), &sq(&[0.4, 0.3, 0.3])).unwrap();
        let filter = filter_operator(&ladder);
        assert_eq!(filter.len(), 2);
        let m = &filter.operators()[0];
        assert!((m[(0, 0)].re - (1.0f64 / 6.0).sqrt()).abs() < 1e-12);
        assert!((m[(1, 1)].re - 1.0).abs() < 1e-12);
        assert!(filter.is_complete() && filter.is_incoherent());
        let out = m * ladder.gamma().to_vector();
        assert!((out.norm_squared() - 1.0 / 3.0).abs() < 1e-12);
        let scaled = ladder.target().to_vector() * C64::new(ladder.ratios()[0].sqrt(), 0.0);
        assert!((out - scaled).norm() < 1e-9);
    }

    #[test]
    fn single_block_filter_is_identity() {
        let phi = sq(&[0.5, 0.3, 0.2]);
        let filter = filter_operator(&build_ladder(&phi, &phi).unwrap());
        assert_eq!(filter.len(), 1);
        assert_eq!(filter.operators()[0], CMatrix::identity(3, 3));
        assert_eq!(filter.labels(), &[SUCCESS.to_string()]);
    }

    #[test]
    fn worked_two_level_step() {
        let s = real(&[1.0, 1.0]);
        let step = two_level_step(&s, (0.7, 0.3), 0, 1).unwrap();
        assert_eq!(step.len(), 2);
        let (a, b) = (0.7f64.sqrt(), 0.3f64.sqrt());
        let k1 = &step.operators()[0];
        let k2 = &step.operators()[1];
        assert!((k1[(0, 0)].re - a).abs() < 1e-12 && (k1[(1, 1)].re - b).abs() < 1e-12);
        assert!((k2[(0, 1)].re - a).abs() < 1e-12 && (k2[(1, 0)].re - b).abs() < 1e-12);
        assert!(k2[(0, 0)].norm() == 0.0 && k2[(1, 1)].norm() == 0.0);
        let target = sq(&[0.7, 0.3]);
        for br in step.apply_selective(&s).unwrap() {
            assert!((br.probability - 0.5).abs() < 1e-12);
            assert!((br.state.fidelity(&target).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_level_step_trivial_and_embedded() {
        let s = sq(&[0.5, 0.3, 0.2]);
        let same = two_level_step(&s, (0.5, 0.3), 0, 1).unwrap();
        assert_eq!(same.len(), 1);
        assert!((same.operators()[0].clone() - CMatrix::identity(3, 3)).norm() < 1e-12);

        // coordinate 2 is untouched on both branches
        let step = two_level_step(&s, (0.6, 0.2), 0, 1).unwrap();
        assert!(step.is_complete() && step.is_incoherent());
        for br in step.apply_selective(&s).unwrap() {
            assert!((br.state.amplitudes()[2].re - 0.2f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn two_level_step_rejects_infeasible() {
        let s = sq(&[0.5, 0.5]);
        // the source would have to be less mixed than the target
        let r = two_level_step(&sq(&[0.9, 0.1]), (0.6, 0.4), 0, 1);
        assert!(matches!(r, Err(Error::InfeasibleStep { .. })));
        assert!(two_level_step(&s, (0.5, 0.2), 0, 1).is_err());
        assert!(two_level_step(&s, (0.5, 0.5), 0, 0).is_err());
    }

    #[test]
    fn deterministic_examples() {
        let g = sq(&[0.5, 0.3, 0.2]);
        assert!(deterministic_protocol(&g, &g).unwrap().is_empty());

        let stages = deterministic_protocol(&real(&[1.0, 1.0]), &sq(&[0.7, 0.3])).unwrap();
        assert_eq!(stages.len(), 1);
        assert_eq!(stages[0], two_level_step(&real(&[1.0, 1.0]), (0.7, 0.3), 0, 1).unwrap());

        let u = PureState::maximally_coherent(3).unwrap();
        let stages = deterministic_protocol(&u, &g).unwrap();
        assert!(stages.len() <= 2);
        let composed = crate::channels::compose(&stages).unwrap();
        let branches = composed.apply_selective(&u).unwrap();
        let total: f64 = branches.iter().map(|b| b.probability).sum();
        assert!((total - 1.0).abs() < 1e-9);
        for b in branches {
            assert!(b.state.fidelity(&g).unwrap() >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn deterministic_rejects_wrong_direction() {
        let u = PureState::maximally_coherent(3).unwrap();
        let g = sq(&[0.5, 0.3, 0.2]);
        assert!(matches!(deterministic_protocol(&g, &u), Err(Error::Precondition(_))));
        let complex = PureState::new(vec![C64::new(0.0, FRAC_1_SQRT_2), C64::new(FRAC_1_SQRT_2, 0.0)]).unwrap();
        assert!(deterministic_protocol(&complex, &complex).is_err());
    }

    #[test]
    fn worked_protocol() {
        let psi = sq(&[0.8, 0.1, 0.1]);
        let phi = sq(&[0.4, 0.3, 0.3]);
        let protocol = optimal_protocol(&psi, &phi).unwrap();
        assert_eq!(protocol.stages.len(), 2);
        let identity = KrausSet::with_labels(vec![CMatrix::identity(3, 3)], vec![FRAME.into()]).unwrap();
        assert_eq!(protocol.stages[0], identity);
        let sim = protocol.simulate(&psi, &phi).unwrap();
        assert!((sim.success_probability - 1.0 / 3.0).abs() < 1e-12);
        assert!(sim.min_success_fidelity().unwrap() >= 1.0 - 1e-12);
    }

    #[test]
    fn majorized_protocol_is_deterministic() {
        let psi = PureState::maximally_coherent(3).unwrap();
        let phi = sq(&[0.5, 0.3, 0.2]);
        let protocol = optimal_protocol(&psi, &phi).unwrap();
        assert_eq!(protocol.success_probability, 1.0);
        let filter = protocol.stages.last().unwrap();
        assert_eq!(filter.len(), 1);
        let sim = protocol.simulate(&psi, &phi).unwrap();
        assert!((sim.success_probability - 1.0).abs() < 1e-9);
    }

    #[test]
    fn impossible_protocol_is_empty() {
        let psi = real(&[1.0, 1.0, 0.0]);
        let phi = PureState::maximally_coherent(3).unwrap();
        let protocol = optimal_protocol(&psi, &phi).unwrap();
        assert!(protocol.is_empty());
        assert_eq!(protocol.success_probability, 0.0);
        assert_eq!(protocol.simulate(&psi, &phi).unwrap().success_probability, 0.0);
    }

    #[test]
    fn protocol_in_original_frame() {
        let psi = PureState::new(vec![
            C64::new(0.1f64.sqrt(), 0.0),
            C64::new(0.0, 0.8f64.sqrt()),
            C64::new(-(0.1f64.sqrt()), 0.0),
        ])
        .unwrap();
        let phi = PureState::new(vec![
            C64::new(0.0, -(0.3f64.sqrt())),
            C64::from_polar(0.3f64.sqrt(), 1.0),
            C64::new(0.4f64.sqrt(), 0.0),
        ])
        .unwrap();
        let protocol = optimal_protocol(&psi, &phi).unwrap();
        for stage in &protocol.stages {
            assert!(stage.is_complete() && stage.is_incoherent());
        }
        let sim = protocol.simulate(&psi, &phi).unwrap();
        assert!((sim.success_probability - 1.0 / 3.0).abs() < 1e-12);
        assert!(sim.min_success_fidelity().unwrap() >= 1.0 - 1e-9);

        let composed = protocol.compose().unwrap();
        let success: f64 = composed
            .apply_selective(&psi)
            .unwrap()
            .iter()
            .filter(|b| protocol.is_success(&b.label))
            .map(|b| b.probability)
            .sum();
        assert!((success - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn multicopy_examples() {
        let psi = real(&[1.0, 1.0, 0.0]);
        let phi = PureState::maximally_coherent(3).unwrap();
        let two = psi.tensor_power(2).unwrap();
        assert!((multicopy_probability(&two, &phi, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(support_shortcut(&psi, &phi, 2));
        assert!(!support_shortcut(&psi, &phi, 1));
        assert_eq!(multicopy_probability(&psi, &phi, 2).unwrap(), 0.0);
        let a = sq(&[0.8, 0.1, 0.1]);
        let b = sq(&[0.4, 0.3, 0.3]);
        assert_eq!(
            multicopy_probability(&a, &b, 1).unwrap(),
            conversion_probability(&a, &b).unwrap()
        );
        let table = multicopy_table(&psi, &phi, 3);
        assert_eq!(table.len(), 3);
        assert!(table[1].shortcut_zero && table[1].probability == Some(0.0));
    }

    #[test]
    fn ky_fan_bound_matches_worked_example() {
        let a = sq(&[0.8, 0.1, 0.1]);
        let b = sq(&[0.4, 0.3, 0.3]);
        assert!((ky_fan_bound(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }
}
