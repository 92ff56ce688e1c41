//! The subcommands, each writing a plain-text report.

use std::io::Write;
use std::path::Path;

use coherence::conversion::{
    build_ladder, conversion_probability, multicopy_table, optimal_protocol,
};
use coherence::measures::{convex_roof_upper, eigen_ensemble_value, RoofOptions};
use coherence::states::TENSOR_CAP;
use coherence::{Builtin, DensityMatrix, KrausSet, Protocol, PureState};

use crate::formats::{
    read_json, write_json, ChannelFile, DensityFile, EnsembleMember, ProtocolFile, ProtocolReport,
    RoofFile, StateFile, INGEST_TOLERANCE,
};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

/// Functional names accepted by `--f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum FunctionalName {
    Shannon,
    L1,
    Alpha,
    Kyfan,
}

/// Resolves `--f` with its parameter flags.
pub fn builtin(name: FunctionalName, alpha: Option<f64>, l: Option<usize>) -> Result<Builtin> {
    let b = match name {
        FunctionalName::Shannon => Builtin::Shannon,
        FunctionalName::L1 => Builtin::L1,
        FunctionalName::Alpha => {
            Builtin::Alpha(alpha.ok_or_else(|| CliError::Usage("--f alpha needs --alpha".into()))?)
        }
        FunctionalName::Kyfan => {
            Builtin::KyFan(l.ok_or_else(|| CliError::Usage("--f kyfan needs --l".into()))?)
        }
    };
    b.functional().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(b)
}

fn warn(path: &Path, warning: Option<String>) {
    if let Some(w) = warning {
        eprintln!("warning: {}: {w}", path.display());
    }
}

pub fn load_state(path: &Path) -> Result<PureState> {
    let file: StateFile = read_json(path)?;
    let (psi, warning) = file.to_state().map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    warn(path, warning);
    Ok(psi)
}

pub fn load_density(path: &Path) -> Result<DensityMatrix> {
    let file: DensityFile = read_json(path)?;
    let (rho, warning) = file.to_density().map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    warn(path, warning);
    Ok(rho)
}

pub fn measure(out: &mut dyn Write, state: &Path, f: Builtin) -> Result<()> {
    let psi = load_state(state)?;
    let value = f.functional()?.coherence_pure(&psi)?;
    writeln!(out, "{value:.12}")?;
    Ok(())
}

/// Options of the `convert` subcommand.
#[derive(Debug, Clone, Default)]
pub struct ConvertOptions<'a> {
    /// Where to write the optimal protocol.
    pub protocol: Option<&'a Path>,
    /// Number of source copies.
    pub copies: usize,
    /// When at least 2, also tabulate target copies `1..=target_copies`.
    pub target_copies: usize,
}

pub fn convert(out: &mut dyn Write, source: &Path, target: &Path, options: &ConvertOptions) -> Result<()> {
    if options.copies == 0 {
        return Err(CliError::Usage("--copies must be at least 1".into()));
    }
    let mut psi = load_state(source)?;
    if options.copies > 1 {
        psi = psi.tensor_power_capped(options.copies, TENSOR_CAP)?;
    }
    let phi = load_state(target)?;
    let p = conversion_probability(&psi, &phi)?;
    writeln!(out, "{p:.12}")?;

    if options.target_copies >= 2 {
        for entry in multicopy_table(&psi, &phi, options.target_copies) {
            let value = match entry.probability {
                Some(p) => format!("{p:.12}"),
                None => "exceeds amplitude cap".into(),
            };
            let flag = if entry.shortcut_zero { " (support shortcut: 0)" } else { "" };
            writeln!(out, "target copies {}: {value}{flag}", entry.copies)?;
        }
    }

    if let Some(path) = options.protocol {
        let protocol = optimal_protocol(&psi, &phi)?;
        let file = protocol_file(&protocol, &psi, &phi)?;
        write_json(path, &file)?;
        writeln!(out, "protocol: {} stages written to {}", file.stages.len(), path.display())?;
    }
    Ok(())
}

/// Largest second-largest column modulus over all operators.
pub fn incoherence_residual(set: &KrausSet) -> f64 {
    let mut worst: f64 = 0.0;
    for k in set.operators() {
        for col in k.column_iter() {
            let mut moduli: Vec<f64> = col.iter().map(|z| z.norm()).collect();
            moduli.sort_by(|a, b| b.total_cmp(a));
            worst = worst.max(moduli.get(1).copied().unwrap_or(0.0));
        }
    }
    worst
}

/// Serializes a protocol with its verification report.
pub fn protocol_file(protocol: &Protocol, psi: &PureState, phi: &PureState) -> Result<ProtocolFile> {
    let d = protocol.dim();
    let mut composed_success_probability = 0.0;
    let mut success_fidelities = Vec::new();
    if !protocol.is_empty() {
        let composed = protocol.compose()?;
        let target = phi.padded(d);
        for b in composed.apply_selective(&psi.padded(d))? {
            if protocol.is_success(&b.label) {
                composed_success_probability += b.probability;
                success_fidelities.push(b.state.fidelity(&target)?);
            }
        }
    }
    Ok(ProtocolFile {
        dim: d,
        success_probability: protocol.success_probability,
        success_label: protocol.success_label.clone(),
        stages: protocol.stages.iter().map(ChannelFile::from_kraus).collect(),
        report: ProtocolReport {
            completeness_residuals: protocol.stages.iter().map(|s| s.completeness().residual).collect(),
            incoherence_residuals: protocol.stages.iter().map(incoherence_residual).collect(),
            composed_success_probability,
            success_fidelities,
        },
    })
}

fn verify_set(out: &mut dyn Write, set: &KrausSet, prefix: &str) -> Result<bool> {
    let residual = set.completeness().residual;
    let complete = residual <= INGEST_TOLERANCE;
    writeln!(
        out,
        "{prefix}completeness residual {residual:.3e}: {}",
        if complete { "pass" } else { "fail" }
    )?;
    let report = set.incoherence();
    match &report.witness {
        None => writeln!(out, "{prefix}incoherent: pass")?,
        Some(w) => writeln!(
            out,
            "{prefix}incoherent: fail (operator {}, column {} has nonzero rows {} and {}; 0-based)",
            w.operator, w.column, w.rows.0, w.rows.1
        )?,
    }
    Ok(complete && report.incoherent)
}

/// Checks a channel file, or every stage of a protocol file.
pub fn verify_channel(out: &mut dyn Write, path: &Path) -> Result<()> {
    let value: serde_json::Value = read_json(path)?;
    let invalid = |e: serde_json::Error| CliError::Invalid(format!("{}: {e}", path.display()));
    let passed = if value.get("stages").is_some() {
        let file: ProtocolFile = serde_json::from_value(value).map_err(invalid)?;
        let mut all = true;
        for (k, stage) in file.stages.iter().enumerate() {
            let set = stage.to_kraus()?;
            all &= verify_set(out, &set, &format!("stage {k}: "))?;
        }
        all
    } else {
        let file: ChannelFile = serde_json::from_value(value).map_err(invalid)?;
        verify_set(out, &file.to_kraus()?, "")?
    };
    writeln!(out, "verdict: {}", if passed { "pass" } else { "fail" })?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Failed(format!("{} is not a complete incoherent channel", path.display())))
    }
}

fn format_amplitude(z: &coherence::C64) -> String {
    if z.im == 0.0 {
        format!("{:.12}", z.re)
    } else {
        format!("{:.12}{:+.12}i", z.re, z.im)
    }
}

/// Prints the breakpoints, ratios and intermediate state, in sorted order.
pub fn ladder(out: &mut dyn Write, source: &Path, target: &Path) -> Result<()> {
    let psi = load_state(source)?;
    let phi = load_state(target)?;
    let ladder = build_ladder(&psi, &phi)?;
    let join = |v: Vec<String>| v.join(" ");
    writeln!(out, "success probability: {:.12}", ladder.success_probability())?;
    writeln!(
        out,
        "breakpoints: {}",
        join(ladder.breakpoints().iter().map(|l| l.to_string()).collect())
    )?;
    writeln!(out, "ratios: {}", join(ladder.ratios().iter().map(|r| format!("{r:.12}")).collect()))?;
    writeln!(
        out,
        "gamma: {}",
        join(ladder.gamma().amplitudes().iter().map(format_amplitude).collect())
    )?;
    Ok(())
}

pub fn roof(
    out: &mut dyn Write,
    density: &Path,
    f: Builtin,
    options: &RoofOptions,
    ensemble_out: Option<&Path>,
) -> Result<()> {
    let rho = load_density(density)?;
    let functional = f.functional()?;
    let result = convex_roof_upper(&functional, &rho, options)?;
    let spectral = eigen_ensemble_value(&functional, &rho)?;
    writeln!(out, "upper bound: {:.12}", result.value)?;
    writeln!(out, "spectral ensemble: {spectral:.12}")?;
    writeln!(out, "ensemble size: {}", result.ensemble.len())?;
    if let Some(path) = ensemble_out {
        let file = RoofFile {
            functional: functional.name().to_string(),
            value: result.value,
            quality: "upper bound".into(),
            ensemble: result
                .ensemble
                .iter()
                .map(|(w, s)| EnsembleMember {
                    weight: *w,
                    state: StateFile::from_state(s),
                })
                .collect(),
        };
        write_json(path, &file)?;
        writeln!(out, "ensemble written to {}", path.display())?;
    }
    Ok(())
}
