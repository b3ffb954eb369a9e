//! Weak-drive analytics on the nine-state truncation
//! `{|00g⟩, |10g⟩, |00e⟩, |01g⟩, |20g⟩, |10e⟩, |11g⟩, |01e⟩, |02g⟩}`,
//! labelled by (magnon 1, magnon 2, qubit).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::EffectiveParams;
use crate::linalg::DenseLu;
use crate::optimize::golden_section;

const I: Complex64 = Complex64::new(0.0, 1.0);
const SQRT2: f64 = std::f64::consts::SQRT_2;

/// `|C10g|` below this is treated as an unpopulated drive mode.
pub const MIN_SINGLE_AMPLITUDE: f64 = 1e-12;

/// `|A₂B₀ − A₀B₂|` below this makes the analytic `g²(0)` undefined.
pub const DENOMINATOR_FLOOR: f64 = 1e-30;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexDetunings {
    pub delta1: Complex64,
    pub delta2: Complex64,
    pub delta_q: Complex64,
}

/// `Δⱼ = δⱼ − iκ/2`, `Δq = δq − iγ/2`.
pub fn complex_detunings(p: &EffectiveParams) -> ComplexDetunings {
    ComplexDetunings {
        delta1: Complex64::new(p.delta1, -p.kappa / 2.0),
        delta2: Complex64::new(p.delta2, -p.kappa / 2.0),
        delta_q: Complex64::new(p.delta_q, -p.gamma / 2.0),
    }
}

/// Slot of each basis state in an [`AmplitudeVector`].
pub mod slot {
    pub const C00G: usize = 0;
    pub const C10G: usize = 1;
    pub const C00E: usize = 2;
    pub const C01G: usize = 3;
    pub const C20G: usize = 4;
    pub const C10E: usize = 5;
    pub const C11G: usize = 6;
    pub const C01E: usize = 7;
    pub const C02G: usize = 8;
}

/// `(n₁, n₂, qubit excited)` of each slot.
pub const BASIS: [(usize, usize, usize); 9] = [
    (0, 0, 0),
    (1, 0, 0),
    (0, 0, 1),
    (0, 1, 0),
    (2, 0, 0),
    (1, 0, 1),
    (1, 1, 0),
    (0, 1, 1),
    (0, 2, 0),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeVector(pub [Complex64; 9]);

impl AmplitudeVector {
    pub fn zeros() -> Self {
        Self([re(0.0); 9])
    }

    pub fn vacuum() -> Self {
        let mut c = [re(0.0); 9];
        c[slot::C00G] = re(1.0);
        Self(c)
    }

    pub fn get(&self, slot: usize) -> Complex64 {
        self.0[slot]
    }

    pub fn c00g(&self) -> Complex64 {
        self.0[slot::C00G]
    }

    pub fn c10g(&self) -> Complex64 {
        self.0[slot::C10G]
    }

    pub fn c20g(&self) -> Complex64 {
        self.0[slot::C20G]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Rescaled so that `C00g = 1`.
    pub fn relative_to_vacuum(&self) -> Result<Self> {
        let c0 = self.c00g();
        if c0.norm() == 0.0 {
            return Err(Error::DegenerateParameters("vacuum amplitude vanished".into()));
        }
        Ok(Self(self.0.map(|c| c / c0)))
    }

    /// `2|C20g|² / |C10g|⁴`, the weak-drive estimate of `g²(0)`.
    pub fn g2(&self) -> Result<f64> {
        let c1 = self.c10g().norm();
        if c1 < MIN_SINGLE_AMPLITUDE {
            return Err(Error::DegenerateParameters(format!("|C10g| = {c1:e}")));
        }
        Ok(2.0 * self.c20g().norm_sqr() / c1.powi(4))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).norm()))
    }

    fn axpy(&self, h: f64, k: &Self) -> Self {
        let mut out = self.0;
        for (o, d) in out.iter_mut().zip(&k.0) {
            *o += d * h;
        }
        Self(out)
    }
}

/// `i dC/dt = M C` with `M` the nine-state generator.
fn generator(p: &EffectiveParams) -> [[Complex64; 9]; 9] {
    use slot::*;
    let d = complex_detunings(p);
    let (g1, g2, om) = (re(p.g1), re(p.g2), re(p.omega_drive));
    let mut m = [[re(0.0); 9]; 9];
    m[C00G][C10G] = om;

    m[C10G][C10G] = d.delta1;
    m[C10G][C00E] = g1;
    m[C10G][C00G] = om;
    m[C10G][C20G] = om * SQRT2;

    m[C00E][C00E] = d.delta_q;
    m[C00E][C10G] = g1;
    m[C00E][C01G] = g2;
    m[C00E][C10E] = om;

    m[C01G][C01G] = d.delta2;
    m[C01G][C00E] = g2;
    m[C01G][C11G] = om;

    m[C20G][C20G] = d.delta1 * 2.0;
    m[C20G][C10E] = g1 * SQRT2;
    m[C20G][C10G] = om * SQRT2;

    m[C10E][C10E] = d.delta1 + d.delta_q;
    m[C10E][C20G] = g1 * SQRT2;
    m[C10E][C11G] = g2;
    m[C10E][C00E] = om;

    m[C11G][C11G] = d.delta1 + d.delta2;
    m[C11G][C10E] = g2;
    m[C11G][C01E] = g1;
    m[C11G][C01G] = om;

    m[C01E][C01E] = d.delta2 + d.delta_q;
    m[C01E][C02G] = g2 * SQRT2;
    m[C01E][C11G] = g1;

    m[C02G][C02G] = d.delta2 * 2.0;
    m[C02G][C01E] = g2 * SQRT2;
    m
}

/// Time derivatives of the nine amplitudes.
pub fn amplitude_rhs(c: &AmplitudeVector, p: &EffectiveParams) -> AmplitudeVector {
    let m = generator(p);
    let mut out = [re(0.0); 9];
    for (o, row) in out.iter_mut().zip(&m) {
        let s: Complex64 = row.iter().zip(&c.0).map(|(a, b)| a * b).sum();
        *o = -I * s;
    }
    AmplitudeVector(out)
}

/// Fixed-step RK4 from the vacuum up to `t_end` (in units of 1/κ).
pub fn integrate_amplitudes(p: &EffectiveParams, t_end: f64, dt: f64) -> Result<AmplitudeVector> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: "must be positive".into(),
        });
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidParameter {
            name: "t_end",
            reason: "must be finite and non-negative".into(),
        });
    }
    let steps = (t_end / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t_end / steps as f64 };
    let m = generator(p);
    let f = |c: &AmplitudeVector| {
        let mut out = [re(0.0); 9];
        for (o, row) in out.iter_mut().zip(&m) {
            *o = -I * row.iter().zip(&c.0).map(|(a, b)| a * b).sum::<Complex64>();
        }
        AmplitudeVector(out)
    };
    let mut c = AmplitudeVector::vacuum();
    for step in 0..steps {
        let k1 = f(&c);
        let k2 = f(&c.axpy(h / 2.0, &k1));
        let k3 = f(&c.axpy(h / 2.0, &k2));
        let k4 = f(&c.axpy(h, &k3));
        for i in 0..9 {
            c.0[i] += (k1.0[i] + k2.0[i] * 2.0 + k3.0[i] * 2.0 + k4.0[i]) * (h / 6.0);
        }
        if c.0.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Divergence((step + 1) as f64 * h));
        }
    }
    Ok(c)
}

/// Stationary amplitudes with `C00g` pinned to 1.
pub fn steady_amplitudes(p: &EffectiveParams) -> Result<AmplitudeVector> {
    let m = generator(p);
    // unknowns are slots 1..9; slot 0 feeds the right-hand side
    let a = DMatrix::from_fn(8, 8, |r, c| m[r + 1][c + 1]);
    let b = DVector::from_fn(8, |r, _| -m[r + 1][slot::C00G]);
    let scale = a.iter().fold(0.0_f64, |s, v| s.max(v.norm()));
    let lu = DenseLu::factor(a, scale).ok_or_else(|| {
        Error::DegenerateParameters("eight-amplitude system is singular".into())
    })?;
    let mut x = b;
    lu.solve_vec(&mut x);
    let mut out = [re(0.0); 9];
    out[slot::C00G] = re(1.0);
    for (o, v) in out[1..].iter_mut().zip(x.iter()) {
        *o = *v;
    }
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::DegenerateParameters("non-finite amplitudes".into()));
    }
    Ok(AmplitudeVector(out))
}

/// Coefficients of the two-equation reduction
/// `A₀ + A₁C10g + A₂C20g = 0`, `B₀ + B₁C10g + B₂C20g = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffSet {
    pub a0: Complex64,
    pub a1: Complex64,
    pub a2: Complex64,
    pub b0: Complex64,
    pub b1: Complex64,
    pub b2: Complex64,
    pub delta_s: Complex64,
    pub delta1_prime: Complex64,
    pub delta2_prime: Complex64,
    pub delta1_tilde: Complex64,
    pub delta2_tilde: Complex64,
}

impl CoeffSet {
    /// `A₀B₁ − A₁B₀`.
    pub fn blockade_residual(&self) -> Complex64 {
        self.a0 * self.b1 - self.a1 * self.b0
    }

    /// `A₁B₂ − A₂B₁`.
    pub fn determinant(&self) -> Complex64 {
        self.a1 * self.b2 - self.a2 * self.b1
    }

    /// `A₂B₀ − A₀B₂`.
    pub fn single_numerator(&self) -> Complex64 {
        self.a2 * self.b0 - self.a0 * self.b2
    }

    /// `(C10g, C20g)` by Cramer's rule.
    pub fn amplitudes(&self) -> Result<(Complex64, Complex64)> {
        let det = self.determinant();
        if det.norm() == 0.0 {
            return Err(Error::DegenerateParameters("reduced system is singular".into()));
        }
        Ok((self.single_numerator() / det, self.blockade_residual() / det))
    }
}

pub fn coefficient_set(p: &EffectiveParams) -> Result<CoeffSet> {
    let d = complex_detunings(p);
    let (d1, d2, dq) = (d.delta1, d.delta2, d.delta_q);
    if d1.norm() == 0.0 {
        return Err(Error::DivisionByZero("Delta1"));
    }
    if d2.norm() == 0.0 {
        return Err(Error::DivisionByZero("Delta2"));
    }
    let g1s = re(p.g1 * p.g1);
    let g2s = re(p.g2 * p.g2);
    let om = re(p.omega_drive);
    let om2 = om * om;
    let s2 = re(SQRT2);

    let ds = d1 + d2 + dq;
    let d1p = d1 + dq - g1s / d1;
    let d2p = d2 + dq - g2s / d2;
    let d1t = dq + om2 / d1 - g1s / d1;
    let d2t = dq + om2 / d2 - g2s / d2;

    let a0 = om * d2 * d2t;
    let a1 = d1 * d2 * d2t + om2 * ds - g1s * d2;
    let a2 = s2 * om * (d1 * ds + d2 * d2t - g1s);
    let b0 = om2 * (d2p * ds - g1s);
    let b1 = om * (re(2.0) * d1 * (d2p * ds - g1s) + d2p * (d2 * d2t - g1s) - g1s * dq);
    let b2 = s2 * (d1 * d1 + d1 * d1t) * (d2p * (d1 + d2) - g1s) + s2 * om2 * d2p * (d1 + dq)
        - s2 * g2s * d1 * d2p;

    let out = CoeffSet {
        a0,
        a1,
        a2,
        b0,
        b1,
        b2,
        delta_s: ds,
        delta1_prime: d1p,
        delta2_prime: d2p,
        delta1_tilde: d1t,
        delta2_tilde: d2t,
    };
    let finite = [a0, a1, a2, b0, b1, b2]
        .iter()
        .all(|z| z.re.is_finite() && z.im.is_finite());
    if !finite {
        return Err(Error::DegenerateParameters("non-finite coefficients".into()));
    }
    Ok(out)
}

/// Closed-form `g²(0) = 2|A₀B₁ − A₁B₀|²|A₁B₂ − A₂B₁|² / |A₂B₀ − A₀B₂|⁴`.
pub fn g2_analytic(p: &EffectiveParams) -> Result<f64> {
    let c = coefficient_set(p)?;
    let den = c.single_numerator().norm();
    if !(den > DENOMINATOR_FLOOR) {
        return Err(Error::DegenerateParameters(format!(
            "|A2 B0 - A0 B2| = {den:e} below floor"
        )));
    }
    let ratio = c.blockade_residual().norm() * c.determinant().norm() / (den * den);
    Ok(2.0 * ratio * ratio)
}

/// `A₀B₁ − A₁B₀`; complete blockade where it vanishes.
pub fn blockade_residual(p: &EffectiveParams) -> Result<Complex64> {
    Ok(coefficient_set(p)?.blockade_residual())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalDelta {
    pub delta1: f64,
    /// `|A₀B₁ − A₁B₀|` at `delta1`.
    pub residual: f64,
    /// The minimum sits on an end of the search interval.
    pub at_boundary: bool,
}

const COARSE_STEP: f64 = 1e-3;
const FINE_TOL: f64 = 1e-5;

/// `δ₁` in `[lo, hi]` minimizing `|A₀B₁ − A₁B₀|`, with `p.delta1` ignored.
pub fn optimal_delta1(p: &EffectiveParams, search: (f64, f64)) -> Result<OptimalDelta> {
    let (lo, hi) = search;
    if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
        return Err(Error::InvalidParameter {
            name: "search",
            reason: format!("need finite lo < hi, got [{lo}, {hi}]"),
        });
    }
    // Points where the drive mode is empty satisfy the condition trivially.
    let objective = |d1: f64| -> Option<f64> {
        let q = EffectiveParams { delta1: d1, ..*p };
        let c = coefficient_set(&q).ok()?;
        let (c10, _) = c.amplitudes().ok()?;
        if c10.norm() < MIN_SINGLE_AMPLITUDE {
            return None;
        }
        Some(c.blockade_residual().norm())
    };

    let n = ((hi - lo) / COARSE_STEP).round() as usize;
    let xs: Vec<f64> = (0..=n)
        .map(|k| if k == n { hi } else { lo + k as f64 * COARSE_STEP })
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (k, &x) in xs.iter().enumerate() {
        if let Some(v) = objective(x) {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((k, v));
            }
        }
    }
    let (k, v) = best.ok_or_else(|| {
        Error::DegenerateParameters("no occupied point in the search interval".into())
    })?;

    let a = xs[k.saturating_sub(1)];
    let b = xs[(k + 1).min(n)];
    let (x, fx) = golden_section(|x| objective(x).unwrap_or(f64::INFINITY), a, b, FINE_TOL);
    let (delta1, residual) = if fx < v { (x, fx) } else { (xs[k], v) };
    let at_boundary = (delta1 - lo).abs() <= FINE_TOL || (hi - delta1).abs() <= FINE_TOL;
    Ok(OptimalDelta {
        delta1,
        residual,
        at_boundary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_effective_nonhermitian, HilbertSpace};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn defaults() -> EffectiveParams {
        EffectiveParams::reference()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn detuning_examples() {
        let d = complex_detunings(&defaults());
        assert_eq!(d.delta1, Complex64::new(0.0, -0.5));
        let p = EffectiveParams {
            delta_q: 0.1,
            ..defaults()
        };
        assert_eq!(complex_detunings(&p).delta_q, Complex64::new(0.1, -0.555));
        let lossless = EffectiveParams {
            kappa: 0.0,
            delta1: 0.3,
            ..defaults()
        };
        assert_eq!(complex_detunings(&lossless).delta1.im, 0.0);
    }

    #[test]
    fn rhs_examples() {
        let p = defaults();
        assert_eq!(amplitude_rhs(&AmplitudeVector::zeros(), &p), AmplitudeVector::zeros());

        let undriven = EffectiveParams {
            omega_drive: 0.0,
            delta1: 0.4,
            ..p
        };
        let mut c = AmplitudeVector::zeros();
        c.0[slot::C10G] = re(1.0);
        let d = amplitude_rhs(&c, &undriven);
        let delta1 = complex_detunings(&undriven).delta1;
        assert_eq!(d.get(slot::C00G), re(0.0));
        assert!(close(d.get(slot::C10G), -I * delta1, 1e-15));
        assert!(close(d.get(slot::C00E), -I * 0.8, 1e-15));
        assert_eq!(d.get(slot::C20G), re(0.0));
    }

    #[test]
    fn rhs_matches_projected_nonhermitian_hamiltonian() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let space = HilbertSpace::effective(3, 3).unwrap();
        for _ in 0..50 {
            let p = EffectiveParams {
                delta1: rng.random_range(-1.0..1.0),
                delta2: rng.random_range(-1.0..1.0),
                delta_q: rng.random_range(-1.0..1.0),
                g1: rng.random_range(0.0..2.0),
                g2: rng.random_range(0.0..2.0),
                omega_drive: rng.random_range(0.0..0.5),
                kappa: rng.random_range(0.5..2.0),
                gamma: rng.random_range(0.5..2.0),
                ..defaults()
            };
            let h = build_effective_nonhermitian(&p, &space).unwrap();
            let idx: Vec<usize> = BASIS
                .iter()
                .map(|&(n1, n2, q)| space.index_of(&[q, n1, n2]).unwrap())
                .collect();
            let c = AmplitudeVector(std::array::from_fn(|_| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            }));
            let got = amplitude_rhs(&c, &p);
            for (r, &ir) in idx.iter().enumerate() {
                let s: Complex64 = idx
                    .iter()
                    .enumerate()
                    .map(|(k, &ik)| h.matrix().get(ir, ik) * c.0[k])
                    .sum();
                assert!(close(got.0[r], -I * s, 1e-12));
            }
        }
    }

    #[test]
    fn integration_converges_to_steady_state() {
        let p = defaults();
        let end = integrate_amplitudes(&p, 200.0, 0.005).unwrap();
        let ss = steady_amplitudes(&p).unwrap();
        let rel = end.relative_to_vacuum().unwrap();
        assert!(rel.max_abs_diff(&ss) < 1e-6);
        let coarse = integrate_amplitudes(&p, 200.0, 0.01).unwrap();
        assert!(coarse.max_abs_diff(&end) < 1e-8);
        assert!(end.norm_sqr() <= 1.0 + 1e-6);
    }

    #[test]
    fn integration_without_drive_stays_in_vacuum() {
        let p = EffectiveParams {
            omega_drive: 0.0,
            ..defaults()
        };
        let end = integrate_amplitudes(&p, 60.0, 0.01).unwrap();
        assert_eq!(end, AmplitudeVector::vacuum());
        assert!(integrate_amplitudes(&p, 10.0, 0.0).is_err());
    }

    #[test]
    fn steady_amplitudes_residual_and_limits() {
        let p = EffectiveParams {
            delta1: 0.2,
            delta2: 0.1,
            delta_q: -0.3,
            ..defaults()
        };
        let c = steady_amplitudes(&p).unwrap();
        let d = amplitude_rhs(&c, &p);
        for k in 1..9 {
            assert!(d.get(k).norm() < 1e-10);
        }

        let undriven = steady_amplitudes(&EffectiveParams {
            omega_drive: 0.0,
            ..p
        })
        .unwrap();
        assert_eq!(undriven, AmplitudeVector::vacuum());

        let free = EffectiveParams {
            g1: 0.0,
            g2: 0.0,
            ..p
        };
        let c = steady_amplitudes(&free).unwrap();
        let d1 = complex_detunings(&free).delta1;
        assert!(close(c.c10g(), -free.omega_drive / d1, 1e-8));
        let r = c.c20g().norm() / c.c10g().norm_sqr();
        assert!((r - 1.0 / SQRT2).abs() < 1e-5);
        assert!((c.g2().unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn optimum_suppresses_pairs() {
        let c = steady_amplitudes(&defaults()).unwrap();
        let coherent = c.c10g().norm().powi(4) / 2.0;
        assert!(c.c20g().norm_sqr() < 1e-3 * coherent);
    }

    #[test]
    fn closed_form_matches_linear_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let p = EffectiveParams {
                delta1: rng.random_range(-1.0..1.0),
                delta2: rng.random_range(-0.5..0.5),
                delta_q: rng.random_range(-0.5..0.5),
                ..defaults()
            }
            .with_ratio(rng.random_range(0.0..0.5));
            let a = g2_analytic(&p).unwrap();
            let coeffs = coefficient_set(&p).unwrap();
            let (c10, c20) = coeffs.amplitudes().unwrap();
            let reduced = 2.0 * c20.norm_sqr() / c10.norm().powi(4);
            assert!(((a - reduced) / reduced).abs() < 1e-8);
            let full = steady_amplitudes(&p).unwrap();
            assert!(close(full.c10g(), c10, 1e-9 * c10.norm()));
            assert!(close(full.c20g(), c20, 1e-7 * c20.norm()));
        }
    }

    #[test]
    fn coefficient_examples() {
        let undriven = EffectiveParams {
            omega_drive: 0.0,
            ..defaults()
        };
        let c = coefficient_set(&undriven).unwrap();
        assert_eq!((c.a0, c.a2, c.b0, c.b1), (re(0.0), re(0.0), re(0.0), re(0.0)));
        assert_eq!(blockade_residual(&undriven).unwrap(), re(0.0));

        let free = EffectiveParams {
            g1: 0.0,
            g2: 0.0,
            ..defaults()
        };
        let c = coefficient_set(&free).unwrap();
        let d = complex_detunings(&free);
        for z in [d.delta1, d.delta2, d.delta_q] {
            assert_eq!(z.re, 0.0);
        }
        let om2 = re(free.omega_drive.powi(2));
        let expect = d.delta1 * d.delta2 * c.delta2_tilde + om2 * c.delta_s;
        assert!(close(c.a1, expect, 1e-15));

        let lossless = EffectiveParams {
            kappa: 0.0,
            ..defaults()
        };
        assert_eq!(coefficient_set(&lossless), Err(Error::DivisionByZero("Delta1")));
        assert!(g2_analytic(&undriven).is_err());
    }

    #[test]
    fn coherent_limit() {
        let p = EffectiveParams {
            g1: 0.0,
            g2: 0.0,
            ..defaults()
        };
        assert!((g2_analytic(&p).unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn ratio_scan_finds_resonant_optimum() {
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=4500 {
            let ratio = 0.05 + k as f64 * 1e-4;
            let g = g2_analytic(&defaults().with_ratio(ratio)).unwrap();
            if g < best.0 {
                best = (g, ratio);
            }
        }
        assert!((best.1 - 0.161).abs() <= 0.005, "{best:?}");
    }

    #[test]
    fn finite_detuning_optimum() {
        let base = EffectiveParams {
            delta2: 0.1,
            delta_q: 0.1,
            ..defaults()
        };
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=200 {
            let d1 = -0.4 + i as f64 * 1e-3;
            for j in 0..=100 {
                let ratio = 0.1 + j as f64 * 1e-3;
                let p = EffectiveParams { delta1: d1, ..base }.with_ratio(ratio);
                let g = g2_analytic(&p).unwrap();
                if g < best.0 {
                    best = (g, d1, ratio);
                }
            }
        }
        assert!((best.1 + 0.276).abs() <= 0.01, "{best:?}");
        assert!((best.2 - 0.137).abs() <= 0.005, "{best:?}");
    }

    #[test]
    fn residual_is_grid_minimum_at_resonant_optimum() {
        let at = |d1: f64, ratio: f64| {
            blockade_residual(&EffectiveParams { delta1: d1, ..defaults() }.with_ratio(ratio))
                .unwrap()
                .norm()
        };
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..=160 {
            let d1 = -1.0 + i as f64 * 0.0125;
            for j in 0..=160 {
                let ratio = j as f64 * 0.5 / 160.0;
                let v = at(d1, ratio);
                if v < best.0 {
                    best = (v, d1, ratio);
                }
            }
        }
        assert!(best.1.abs() < 1e-12);
        assert!((best.2 - 0.161).abs() <= 0.005);

        let opt = optimal_delta1(&defaults(), (-0.5, 0.5)).unwrap();
        let mut prev = at(opt.delta1, 0.161);
        for k in 1..=100 {
            let v = at(opt.delta1 + k as f64 * 1e-3, 0.161);
            assert!(v > prev);
            prev = v;
        }
        let mut prev = at(opt.delta1, 0.161);
        for k in 1..=100 {
            let v = at(opt.delta1 - k as f64 * 1e-3, 0.161);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn optimal_delta_examples() {
        let opt = optimal_delta1(&defaults(), (-1.0, 1.0)).unwrap();
        assert!(opt.delta1.abs() <= 1e-3);
        assert!(!opt.at_boundary);

        let detuned = EffectiveParams {
            delta2: 0.1,
            delta_q: 0.1,
            ..defaults()
        }
        .with_ratio(0.137);
        let opt = optimal_delta1(&detuned, (-1.0, 1.0)).unwrap();
        assert!((opt.delta1 + 0.276).abs() <= 0.01, "{opt:?}");

        let mut last = f64::INFINITY;
        for dq in [0.1, 0.03, 0.01, 0.003, 0.001] {
            let p = EffectiveParams {
                delta2: dq,
                delta_q: dq,
                ..defaults()
            }
            .with_ratio(0.137);
            let d = optimal_delta1(&p, (-1.0, 1.0)).unwrap().delta1.abs();
            assert!(d < last);
            last = d;
        }

        let edge = optimal_delta1(&detuned, (0.0, 0.5)).unwrap();
        assert!(edge.at_boundary);
        assert_eq!(edge.delta1, 0.0);
        assert!(optimal_delta1(&defaults(), (0.5, -0.5)).is_err());
    }

    #[test]
    fn undriven_points_are_rejected() {
        let p = EffectiveParams {
            omega_drive: 0.0,
            ..defaults()
        };
        assert!(matches!(
            optimal_delta1(&p, (-0.1, 0.1)),
            Err(Error::DegenerateParameters(_))
        ));
    }

    proptest! {
        #[test]
        fn analytic_conjugation_symmetry(
            d1 in -1.0..1.0f64, d2 in -0.5..0.5f64, dq in -0.5..0.5f64, ratio in 0.0..0.5f64,
        ) {
            let p = EffectiveParams { delta1: d1, delta2: d2, delta_q: dq, ..defaults() }.with_ratio(ratio);
            let a = g2_analytic(&p).unwrap();
            let b = g2_analytic(&p.mirrored()).unwrap();
            prop_assert!(((a - b) / a).abs() < 1e-8);
        }
    }
}
