//! Regression table for the published worked examples.
//!
//! Every check compares an observed number with its expected value under
//! one tolerance, so a corrupted tolerance makes the table fail visibly.

use std::io::Write;

use coherence::conversion::{
    conversion_probability, multicopy_probability, optimal_protocol, support_shortcut,
};
use coherence::measures::validate_functional;
use coherence::{Builtin, CMatrix, KrausSet, ProbVector, PureState, C64};
use serde::Serialize;

use crate::formats::to_json;
use crate::CliError;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub observed: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tolerance: f64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

struct Table {
    tolerance: f64,
    checks: Vec<Check>,
}

impl Table {
    fn check(&mut self, name: &str, expected: f64, observed: f64) {
        self.checks.push(Check {
            name: name.into(),
            expected,
            observed,
            passed: (observed - expected).abs() <= self.tolerance,
        });
    }

    fn flag(&mut self, name: &str, observed: bool) {
        self.check(name, 1.0, f64::from(u8::from(observed)));
    }
}

fn entropy(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter().filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

/// Runs every check; `tolerance` applies to all of them.
pub fn run(tolerance: f64) -> Result<Report, coherence::Error> {
    let mut t = Table {
        tolerance,
        checks: Vec::new(),
    };
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let psi = PureState::from_real(&[h, h, 0.0])?;
    let phi = PureState::maximally_coherent(3)?;

    t.check("(|1>+|2>)/sqrt2 has 2 nonzero coefficients", 2.0, psi.support_size() as f64);
    t.check("uniform 3-level state has 3 nonzero coefficients", 3.0, phi.support_size() as f64);

    let square = psi.tensor_power(2)?;
    let amps = square.amplitudes();
    let count = |pred: &dyn Fn(&C64) -> bool| amps.iter().filter(|a| pred(a)).count() as f64;
    t.check("tensor square has 9 amplitudes", 9.0, amps.len() as f64);
    t.check("tensor square has 4 amplitudes equal to 1/2", 4.0, count(&|a| (a - 0.5).norm() < 1e-12));
    t.check("tensor square has 5 zero amplitudes", 5.0, count(&|a| a.norm() == 0.0));

    t.check("P(psi -> phi) = 0", 0.0, conversion_probability(&psi, &phi)?);
    t.check("P(psi x psi -> phi) = 1", 1.0, conversion_probability(&square, &phi)?);
    t.check("P(psi -> phi x phi) = 0", 0.0, multicopy_probability(&psi, &phi, 2)?);
    t.flag("support shortcut applies to two target copies", support_shortcut(&psi, &phi, 2));

    let impossible = optimal_protocol(&psi, &phi)?;
    t.check("optimal protocol for psi -> phi has no stages", 0.0, impossible.stages.len() as f64);
    let two_copy = optimal_protocol(&square, &phi)?;
    let sim = two_copy.simulate(&square, &phi)?;
    t.check("two-copy protocol succeeds with probability 1", 1.0, sim.success_probability);
    t.check(
        "two-copy protocol reaches phi with fidelity 1",
        1.0,
        sim.min_success_fidelity().unwrap_or(0.0),
    );

    // the diagonal pair splitting a mixture of two distributions
    let x: [f64; 3] = [0.5, 0.3, 0.2];
    let y: [f64; 3] = [0.1, 0.6, 0.3];
    let lambda: f64 = 0.4;
    let mut k1 = CMatrix::zeros(3, 3);
    let mut k2 = CMatrix::zeros(3, 3);
    let mut mixed = Vec::new();
    for i in 0..3 {
        let m = lambda * x[i] + (1.0 - lambda) * y[i];
        k1[(i, i)] = C64::new((lambda * x[i] / m).sqrt(), 0.0);
        k2[(i, i)] = C64::new(((1.0 - lambda) * y[i] / m).sqrt(), 0.0);
        mixed.push(m);
    }
    let pair = KrausSet::new(vec![k1, k2])?;
    t.flag("diagonal mixing pair is incoherent", pair.is_incoherent());
    t.check("diagonal mixing pair is complete (residual)", 0.0, pair.completeness().residual);
    let source = PureState::from_probabilities(&ProbVector::new(mixed)?);
    let branches = pair.apply_selective(&source)?;
    let target_x = PureState::from_probabilities(&ProbVector::new(x.to_vec())?);
    let target_y = PureState::from_probabilities(&ProbVector::new(y.to_vec())?);
    t.check("first outcome has probability lambda", lambda, branches[0].probability);
    t.check("first outcome is sqrt(x)", 1.0, branches[0].state.fidelity(&target_x)?);
    t.check("second outcome has probability 1 - lambda", 1.0 - lambda, branches[1].probability);
    t.check("second outcome is sqrt(y)", 1.0, branches[1].state.fidelity(&target_y)?);

    // named measures, recomputed from the density matrix
    let sample = PureState::new(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.48), C64::new(0.64, 0.0)])?;
    let rho = sample.density_matrix();
    let (eigenvalues, _) = rho.eigen();
    let relative_entropy = entropy(rho.populations().entries().iter().copied()) - entropy(eigenvalues);
    let shannon = Builtin::Shannon.functional()?.coherence_pure(&sample)?;
    t.check("shannon generator gives the relative entropy of coherence", relative_entropy, shannon);
    let e = rho.entries();
    let l1_norm: f64 = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .map(|(i, j)| e[(i, j)].norm())
        .sum();
    let l1 = Builtin::L1.functional()?.coherence_pure(&sample)?;
    t.check("l1 generator gives the l1-norm of coherence", l1_norm, l1);

    for b in [Builtin::Shannon, Builtin::L1, Builtin::Alpha(0.5)] {
        let f = b.functional()?;
        let report = validate_functional(&f, 4, 500, 0)?;
        t.flag(&format!("{} satisfies the generating conditions", f.name()), report.passes());
    }

    let passed = t.checks.iter().all(|c| c.passed);
    Ok(Report {
        tolerance,
        passed,
        checks: t.checks,
    })
}

/// Prints the table (or JSON report); fails when any check fails.
pub fn paper_demo(out: &mut dyn Write, json: bool, tolerance: f64) -> Result<(), CliError> {
    if !tolerance.is_finite() {
        return Err(CliError::Usage(format!("tolerance must be finite, got {tolerance}")));
    }
    let report = run(tolerance)?;
    if json {
        write!(out, "{}", to_json(&report)?)?;
    } else {
        for c in &report.checks {
            writeln!(
                out,
                "{}  {:<58} expected {:<10} observed {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                format!("{}", c.expected),
                c.observed
            )?;
        }
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        writeln!(out, "{} checks, {failed} failed (tolerance {tolerance:e})", report.checks.len())?;
    }
    if report.passed {
        Ok(())
    } else {
        Err(CliError::Failed("some checks failed".into()))
    }
}
