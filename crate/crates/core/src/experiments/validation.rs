use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{reduce_full_params, BathParams, EffectiveParams, FullModelParams, HilbertSpace, MAGNON1};
use crate::lindblad::{full_steady_state, g2_zero, numeric_g2, FullModelBath};

/// Required ratio of cavity detuning to detunings, rates and the drive.
pub const DETUNING_MARGIN: f64 = 50.0;
/// Required ratio of cavity detuning to the cavity couplings.
pub const COUPLING_MARGIN: f64 = 10.0;
/// Denominator floor of the relative deviation.
pub const DEVIATION_FLOOR: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticInputs {
    pub bath: BathParams,
    /// Energy decay rate of each cavity; zero matches the elimination.
    pub cavity_decay: f64,
    pub magnon_truncation: usize,
    pub cavity_truncation: usize,
}

impl AdiabaticInputs {
    pub fn new(bath: BathParams) -> Self {
        Self {
            bath,
            cavity_decay: 0.0,
            magnon_truncation: 4,
            cavity_truncation: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub full_g2: f64,
    pub effective_g2: f64,
    pub deviation: f64,
    pub full: FullModelParams,
    pub effective: EffectiveParams,
    pub inputs: AdiabaticInputs,
}

pub fn relative_deviation(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(DEVIATION_FLOOR)
}

/// Rejects parameters outside the far-detuned regime.
pub fn check_regime(full: &FullModelParams, bath: &BathParams) -> Result<()> {
    for (name, d0, gm, gq, dj) in [
        ("delta_c1", full.delta_c1, full.g_m1, full.g_q1, full.delta1_bare),
        ("delta_c2", full.delta_c2, full.g_m2, full.g_q2, full.delta2_bare),
    ] {
        let d0 = d0.abs();
        let slow = [
            full.delta_q_bare.abs(),
            dj.abs(),
            full.omega_drive.abs(),
            bath.kappa,
            bath.gamma,
        ];
        if let Some(worst) = slow.iter().copied().reduce(f64::max) {
            if d0 < DETUNING_MARGIN * worst {
                return Err(Error::RegimeViolation(format!(
                    "|{name}| = {d0} is below {DETUNING_MARGIN}x the largest detuning or rate ({worst})"
                )));
            }
        }
        let coupling = gm.abs().max(gq.abs());
        if d0 < COUPLING_MARGIN * coupling {
            return Err(Error::RegimeViolation(format!(
                "|{name}| = {d0} is below {COUPLING_MARGIN}x the cavity coupling ({coupling})"
            )));
        }
    }
    Ok(())
}

/// Compares the five-mode steady state with the reduced three-mode model.
pub fn adiabatic_validation(full: &FullModelParams, inputs: &AdiabaticInputs) -> Result<ValidationReport> {
    check_regime(full, &inputs.bath)?;
    let effective = reduce_full_params(full, &inputs.bath)?;
    let n = inputs.magnon_truncation;
    let nc = inputs.cavity_truncation;

    let eff_space = HilbertSpace::effective(n, n)?;
    let effective_g2 = numeric_g2(&effective, &eff_space)?;

    let full_space = HilbertSpace::full(n, n, nc, nc)?;
    let bath = FullModelBath {
        kappa: inputs.bath.kappa,
        gamma: inputs.bath.gamma,
        n_th1: inputs.bath.n_th1,
        n_th2: inputs.bath.n_th2,
        cavity_decay: inputs.cavity_decay,
    };
    let rho = full_steady_state(full, &bath, &full_space)?;
    let full_g2 = g2_zero(&rho, MAGNON1)?;

    Ok(ValidationReport {
        full_g2,
        effective_g2,
        deviation: relative_deviation(full_g2, effective_g2),
        full: *full,
        effective,
        inputs: *inputs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub truncation: usize,
    pub g2: f64,
    /// Relative difference to the next larger truncation.
    pub change_to_next: Option<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub params: EffectiveParams,
    pub tolerance: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Smallest truncation that agrees with its successor.
    pub converged_at: Option<usize>,
}

pub const CONVERGENCE_TOLERANCE: f64 = 1e-6;

/// `g²(0)` across magnon truncations. A row is converged when it agrees
/// with the next larger truncation to [`CONVERGENCE_TOLERANCE`].
pub fn convergence_check(p: &EffectiveParams, truncations: &[usize]) -> Result<ConvergenceTable> {
    if truncations.is_empty() {
        return Err(Error::InvalidParameter {
            name: "truncations",
            reason: "empty list".into(),
        });
    }
    if truncations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "truncations",
            reason: "must be increasing".into(),
        });
    }
    if truncations[0] < 3 {
        return Err(Error::TruncationTooSmall {
            what: "magnon",
            dim: truncations[0],
            min: 3,
        });
    }
    let values = truncations
        .iter()
        .map(|&n| numeric_g2(p, &HilbertSpace::effective(n, n)?))
        .collect::<Result<Vec<f64>>>()?;
    let rows: Vec<ConvergenceRow> = truncations
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let change = values.get(k + 1).map(|&next| relative_deviation(values[k], next));
            ConvergenceRow {
                truncation: n,
                g2: values[k],
                change_to_next: change,
                converged: change.is_some_and(|c| c < CONVERGENCE_TOLERANCE),
            }
        })
        .collect();
    let converged_at = rows.iter().find(|r| r.converged).map(|r| r.truncation);
    Ok(ConvergenceTable {
        params: *p,
        tolerance: CONVERGENCE_TOLERANCE,
        rows,
        converged_at,
    })
}
