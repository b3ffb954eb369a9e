use serde::{Deserialize, Serialize};

use crate::analytic::{optimal_delta1, OptimalDelta};
use crate::error::{Error, Result};
use crate::exec;
use crate::hilbert::{EffectiveParams, HilbertSpace};
use crate::lindblad::{numeric_g2, thermal_occupation, Magnon, ThermalConfig};

use super::SweepOptions;

/// `δ₁_opt` for every `(δq = δ₂, g₂/g₁)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalCurve {
    pub base: EffectiveParams,
    pub search: (f64, f64),
    pub ratios: Vec<f64>,
    pub detunings: Vec<f64>,
    /// `rows[d][r]` is the optimum at `detunings[d]`, `ratios[r]`.
    pub rows: Vec<Vec<OptimalDelta>>,
}

impl OptimalCurve {
    pub fn any_at_boundary(&self) -> bool {
        self.rows.iter().flatten().any(|o| o.at_boundary)
    }
}

pub fn optimal_curve(
    ratios: &[f64],
    detunings: &[f64],
    base: &EffectiveParams,
    search: (f64, f64),
    options: &SweepOptions,
) -> Result<OptimalCurve> {
    if ratios.is_empty() || detunings.is_empty() {
        return Err(Error::InvalidParameter {
            name: "ratios",
            reason: "need at least one ratio and one detuning".into(),
        });
    }
    if ratios.iter().chain(detunings).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "ratios",
            reason: "values must be finite".into(),
        });
    }
    let jobs: Vec<(usize, usize)> = (0..detunings.len())
        .flat_map(|d| (0..ratios.len()).map(move |r| (d, r)))
        .collect();
    let found = exec::map(&jobs, options.mode, |&(d, r)| {
        let p = EffectiveParams {
            delta2: detunings[d],
            delta_q: detunings[d],
            ..*base
        }
        .with_ratio(ratios[r]);
        optimal_delta1(&p, search)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let rows = found.chunks(ratios.len()).map(<[_]>::to_vec).collect();
    Ok(OptimalCurve {
        base: *base,
        search,
        ratios: ratios.to_vec(),
        detunings: detunings.to_vec(),
        rows,
    })
}

/// `g²(0)` against bath temperature for one parameter set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalCurve {
    pub label: String,
    pub params: EffectiveParams,
    pub n_th1: Vec<f64>,
    pub n_th2: Vec<f64>,
    pub g2: Vec<f64>,
    /// Temperature where `g²(0)` first reaches 1, linearly interpolated.
    pub crossing: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalSweep {
    pub config: ThermalConfig,
    pub temperatures: Vec<f64>,
    pub curves: Vec<ThermalCurve>,
}

/// Grid spacing used when no temperatures are given, in kelvin.
pub const THERMAL_STEP: f64 = 0.25e-3;

/// `0, 0.25 mK, …, t_max`.
pub fn temperature_grid(t_max: f64) -> Vec<f64> {
    let n = (t_max / THERMAL_STEP).round() as usize;
    (0..=n).map(|k| k as f64 * THERMAL_STEP).collect()
}

/// First upward crossing of `level`, linearly interpolated.
pub fn crossing(xs: &[f64], ys: &[f64], level: f64) -> Option<f64> {
    for k in 1..xs.len().min(ys.len()) {
        let (y0, y1) = (ys[k - 1], ys[k]);
        if y0 < level && y1 >= level {
            return Some(xs[k - 1] + (level - y0) * (xs[k] - xs[k - 1]) / (y1 - y0));
        }
    }
    None
}

pub fn thermal_sweep(
    cfg: &ThermalConfig,
    sets: &[(String, EffectiveParams)],
    temperatures: &[f64],
    options: &SweepOptions,
) -> Result<ThermalSweep> {
    cfg.validate()?;
    if temperatures.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidParameter {
            name: "temperatures",
            reason: "must be non-negative".into(),
        });
    }
    if temperatures.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            name: "temperatures",
            reason: "must be increasing".into(),
        });
    }
    let space = HilbertSpace::effective(options.truncation, options.truncation)?;
    let mut curves = Vec::with_capacity(sets.len());
    for (label, params) in sets {
        let occupations: Vec<(f64, f64)> = temperatures
            .iter()
            .map(|&t| {
                let c = cfg.with_temperature(t);
                (
                    thermal_occupation(&c, Magnon::First),
                    thermal_occupation(&c, Magnon::Second),
                )
            })
            .collect();
        let g2 = exec::map(&occupations, options.mode, |&(n1, n2)| {
            let p = EffectiveParams {
                n_th1: n1,
                n_th2: n2,
                ..*params
            };
            numeric_g2(&p, &space)
        })
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
        curves.push(ThermalCurve {
            label: label.clone(),
            params: *params,
            n_th1: occupations.iter().map(|o| o.0).collect(),
            n_th2: occupations.iter().map(|o| o.1).collect(),
            crossing: crossing(temperatures, &g2, 1.0),
            g2,
        });
    }
    Ok(ThermalSweep {
        config: *cfg,
        temperatures: temperatures.to_vec(),
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn defaults() -> EffectiveParams {
        EffectiveParams::reference()
    }

    #[test]
    fn crossing_interpolates() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(crossing(&xs, &[0.1, 0.5, 1.5, 2.0], 1.0), Some(1.5));
        assert_eq!(crossing(&xs, &[0.1, 0.2, 0.3, 0.4], 1.0), None);
        assert_eq!(crossing(&xs, &[1.0, 2.0, 3.0, 4.0], 1.0), None);
    }

    #[test]
    fn grid_spacing() {
        let t = temperature_grid(10e-3);
        assert_eq!(t.len(), 41);
        assert!((t[16] - 4e-3).abs() < 1e-18);
    }

    #[test]
    fn resonant_row_sits_at_zero() {
        let ratios: Vec<f64> = (0..=10).map(|k| 0.05 * k as f64).collect();
        let c = optimal_curve(&ratios, &[0.0], &defaults(), (-1.0, 1.0), &SweepOptions::default())
            .unwrap();
        for o in &c.rows[0] {
            assert!(o.delta1.abs() <= 1e-3, "{o:?}");
        }
    }

    #[test]
    fn detuned_row_is_monotone() {
        let ratios: Vec<f64> = (0..=50).map(|k| 0.01 * k as f64).collect();
        let c = optimal_curve(&ratios, &[0.1], &defaults(), (-1.0, 1.0), &SweepOptions::default())
            .unwrap();
        let d: Vec<f64> = c.rows[0].iter().map(|o| o.delta1).collect();
        assert!(d.windows(2).all(|w| w[1] > w[0]), "{d:?}");
        let at = ratios.iter().position(|&r| (r - 0.14).abs() < 1e-12).unwrap();
        assert!(d[at] < 0.0);
        assert!(!c.any_at_boundary());
    }

    #[test]
    fn zero_temperature_matches_plain_solve() {
        let cfg = ThermalConfig::yig_defaults(0.0);
        let sets = vec![("resonant".to_string(), defaults())];
        let s = thermal_sweep(&cfg, &sets, &[0.0, 1e-3], &SweepOptions::default()).unwrap();
        let plain = numeric_g2(&defaults(), &HilbertSpace::effective(4, 4).unwrap()).unwrap();
        assert_eq!(s.curves[0].g2[0], plain);
        assert_eq!(s.curves[0].n_th1[0], 0.0);
        assert!(thermal_sweep(&cfg, &sets, &[1e-3, 0.0], &SweepOptions::default()).is_err());
    }
}
