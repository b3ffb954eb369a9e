//! Liouvillian assembly, steady states and correlation functions.
//!
//! Density matrices are vectorized column by column: entry `ρ[i, j]` sits at
//! `j * D + i`, so `A ρ B` becomes `(Bᵀ ⊗ A) vec(ρ)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    annihilation, embed, EffectiveModel, EffectiveParams, FullModel, FullModelParams,
    HilbertSpace, Operator,
};
use crate::linalg::{dense_solve, BlockLu};
use crate::sparse::CsrMatrix;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;

/// `⟨m†m⟩` below this makes `g²(0)` meaningless.
pub const OCCUPATION_FLOOR: f64 = 1e-14;

/// Tolerance on hermiticity, trace and negative eigenvalues of a state.
pub const STATE_TOLERANCE: f64 = 1e-10;

/// Largest system handed to the dense fallback solver.
const DENSE_FALLBACK_MAX: usize = 2048;

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `rate · (2OρO† − O†Oρ − ρO†O)`.
#[derive(Debug, Clone)]
pub struct Dissipator {
    op: Operator,
    rate: f64,
}

impl Dissipator {
    pub fn new(op: Operator, rate: f64) -> Result<Self> {
        if !(rate >= 0.0) || !rate.is_finite() {
            return Err(Error::InvalidParameter {
                name: "rate",
                reason: format!("dissipator rate must be finite and non-negative, got {rate}"),
            });
        }
        Ok(Self { op, rate })
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// Generator `L` with `vec(dρ/dt) = L vec(ρ)`.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    space: HilbertSpace,
    matrix: CsrMatrix,
}

impl Liouvillian {
    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// Hilbert-space dimension `D`; the matrix is `D² × D²`.
    pub fn hilbert_dim(&self) -> usize {
        self.space.total_dim()
    }

    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = self.hilbert_dim();
        assert_eq!(rho.shape(), (d, d));
        let out = self.matrix.mul_vec(rho.as_slice());
        DMatrix::from_column_slice(d, d, &out)
    }

    /// `max |L vec(ρ)|`.
    pub fn residual(&self, rho: &DensityMatrix) -> f64 {
        self.apply(rho.matrix())
            .iter()
            .fold(0.0_f64, |m, v| m.max(v.norm()))
    }
}

fn push_kron(
    out: &mut Vec<(usize, usize, Complex64)>,
    a: &CsrMatrix,
    b: &CsrMatrix,
    coef: Complex64,
) {
    let (br, bc) = (b.nrows(), b.ncols());
    for (r, c, x) in a.triplets() {
        for (s, t, y) in b.triplets() {
            out.push((r * br + s, c * bc + t, coef * x * y));
        }
    }
}

pub fn build_liouvillian(h: &Operator, dissipators: &[Dissipator]) -> Result<Liouvillian> {
    for dis in dissipators {
        h.same_space(&dis.op)?;
    }
    let d = h.dim();
    let id = CsrMatrix::identity(d);
    let i = Complex64::new(0.0, 1.0);
    let mut t = Vec::new();
    push_kron(&mut t, &id, h.matrix(), -i);
    push_kron(&mut t, &h.matrix().transpose(), &id, i);
    for dis in dissipators {
        if dis.rate == 0.0 {
            continue;
        }
        let o = dis.op.matrix();
        let odo = o.adjoint().matmul(o)?;
        push_kron(&mut t, &o.conj(), o, re(2.0 * dis.rate));
        push_kron(&mut t, &id, &odo, re(-dis.rate));
        push_kron(&mut t, &odo.transpose(), &id, re(-dis.rate));
    }
    Ok(Liouvillian {
        space: h.space().clone(),
        matrix: CsrMatrix::from_triplets(d * d, d * d, t),
    })
}

/// Hermitian, unit-trace state on a given space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: DMatrix<Complex64>,
}

/// Deviations of a computed state from a physical one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Physicality {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl Physicality {
    pub fn is_physical(&self, tol: f64) -> bool {
        self.hermiticity <= tol && self.trace_error <= tol && self.min_eigenvalue >= -tol
    }
}

impl DensityMatrix {
    /// Checks hermiticity and trace; positivity is reported by
    /// [`DensityMatrix::physicality`].
    pub fn new(space: HilbertSpace, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = space.total_dim();
        if matrix.shape() != (d, d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows(),
            });
        }
        let rho = Self { space, matrix };
        let herm = rho.hermiticity_defect();
        if herm > STATE_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("not Hermitian (defect {herm:e})"),
            });
        }
        let tr = (rho.trace() - 1.0).abs();
        if tr > STATE_TOLERANCE {
            return Err(Error::InvalidParameter {
                name: "rho",
                reason: format!("trace differs from 1 by {tr:e}"),
            });
        }
        Ok(rho)
    }

    /// Projector onto a basis state.
    pub fn basis_state(space: &HilbertSpace, index: usize) -> Self {
        let d = space.total_dim();
        let mut m = DMatrix::zeros(d, d);
        m[(index, index)] = re(1.0);
        Self {
            space: space.clone(),
            matrix: m,
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|v| v.re).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.matrix.nrows();
        let mut worst = 0.0_f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn physicality(&self) -> Physicality {
        Physicality {
            hermiticity: self.hermiticity_defect(),
            trace_error: (self.trace() - 1.0).abs(),
            min_eigenvalue: self.eigenvalues().first().copied().unwrap_or(0.0),
        }
    }

    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|v| v.re).collect()
    }
}

/// Trace-constrained direct solve for the kernel of `L`.
///
/// The population row with the largest diagonal magnitude (lowest index on
/// ties) is replaced by the trace functional. The result is Hermitized.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let d = l.hilbert_dim();
    let n = d * d;
    let lm = l.matrix();
    let mut row = 0;
    let mut best = -1.0;
    for i in 0..d {
        let p = i * d + i;
        let mag = lm.get(p, p).norm();
        if mag > best {
            best = mag;
            row = p;
        }
    }

    let trace_row = (0..d).map(|i| (row, i * d + i, re(1.0)));
    let a = CsrMatrix::from_triplets(
        n,
        n,
        lm.triplets().filter(|&(r, _, _)| r != row).chain(trace_row),
    );
    let mut b = vec![re(0.0); n];
    b[row] = re(1.0);

    let x = match BlockLu::factor(&a, &[row]) {
        Some(lu) => lu.solve_refined(&a, &b),
        None if n <= DENSE_FALLBACK_MAX => dense_solve(&a, &b).ok_or_else(|| {
            Error::NoUniqueSteadyState("trace-constrained Liouvillian is singular".into())
        })?,
        None => {
            return Err(Error::NoUniqueSteadyState(
                "trace-constrained Liouvillian is singular".into(),
            ))
        }
    };

    if x.iter().any(|v| !v.re.is_finite() || !v.im.is_finite() || v.norm() > 1.0 + 1e-6) {
        return Err(Error::NoUniqueSteadyState(
            "solution is not a bounded density matrix".into(),
        ));
    }
    let raw = DMatrix::from_column_slice(d, d, &x);
    let herm = (&raw + raw.adjoint()).scale(0.5);
    let rho = DensityMatrix::new(l.space().clone(), herm)?;
    let scale = lm.max_abs().max(1.0);
    let res = l.residual(&rho);
    if res > 1e-8 * scale {
        return Err(Error::NoUniqueSteadyState(format!(
            "steady-state residual {res:e} too large"
        )));
    }
    Ok(rho)
}

/// `Tr[ρ op]`.
pub fn expectation(rho: &DensityMatrix, op: &Operator) -> Result<Complex64> {
    if rho.space() != op.space() {
        return Err(Error::SpaceMismatch {
            left: rho.space().dims().to_vec(),
            right: op.space().dims().to_vec(),
        });
    }
    Ok(op
        .matrix()
        .triplets()
        .map(|(r, c, v)| v * rho.matrix[(c, r)])
        .sum())
}

/// `Tr[ρ m†m†mm] / Tr[ρ m†m]²` for the mode at `mode_position`.
pub fn g2_zero(rho: &DensityMatrix, mode_position: usize) -> Result<f64> {
    let space = rho.space();
    let dims = space.dims();
    if mode_position >= dims.len() {
        return Err(Error::PositionOutOfRange {
            position: mode_position,
            len: dims.len(),
        });
    }
    let m = embed(&annihilation(dims[mode_position])?, space, mode_position)?;
    let md = m.adjoint();
    let num_op = md.mul(&m)?;
    let pair_op = md.mul(&md)?.mul(&m)?.mul(&m)?;
    let n = expectation(rho, &num_op)?;
    let pair = expectation(rho, &pair_op)?;
    if !(n.re > OCCUPATION_FLOOR) {
        return Err(Error::UnoccupiedMode {
            position: mode_position,
            occupation: n.re,
        });
    }
    if pair.im.abs() > 1e-10 * pair.norm().max(OCCUPATION_FLOOR * OCCUPATION_FLOOR) {
        return Err(Error::InvalidParameter {
            name: "rho",
            reason: format!("complex two-magnon correlation {pair}"),
        });
    }
    Ok(pair.re / (n.re * n.re))
}

/// Bath temperature and the absolute frequencies it is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalConfig {
    /// rad/s
    pub omega1: f64,
    /// rad/s
    pub omega2: f64,
    /// kelvin
    pub temperature: f64,
    /// Magnon linewidth in rad/s.
    pub kappa_absolute: f64,
}

impl ThermalConfig {
    /// ω₁/2π = 8.2 GHz, ω₂/2π = 8.6 GHz, κ/2π = 1.8 MHz.
    pub fn yig_defaults(temperature: f64) -> Self {
        let two_pi = 2.0 * std::f64::consts::PI;
        Self {
            omega1: two_pi * 8.2e9,
            omega2: two_pi * 8.6e9,
            temperature,
            kappa_absolute: two_pi * 1.8e6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::InvalidParameter {
                name: "temperature",
                reason: "must be finite and non-negative".into(),
            });
        }
        for (name, w) in [("omega1", self.omega1), ("omega2", self.omega2)] {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "must be positive".into(),
                });
            }
        }
        Ok(())
    }

    pub fn with_temperature(self, temperature: f64) -> Self {
        Self {
            temperature,
            ..self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Magnon {
    First,
    Second,
}

/// Bose–Einstein occupation of a mode at angular frequency `omega`.
pub fn bose_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (HBAR * omega / (K_B * temperature)).exp_m1()
}

pub fn thermal_occupation(cfg: &ThermalConfig, which: Magnon) -> f64 {
    let omega = match which {
        Magnon::First => cfg.omega1,
        Magnon::Second => cfg.omega2,
    };
    bose_occupation(omega, cfg.temperature)
}

/// Collapse channels of the effective model: thermal magnon baths and a
/// zero-temperature qubit bath.
pub fn effective_dissipators(model: &EffectiveModel, p: &EffectiveParams) -> Result<Vec<Dissipator>> {
    let mut out = Vec::with_capacity(5);
    for (m, nth) in [(&model.m1, p.n_th1), (&model.m2, p.n_th2)] {
        out.push(Dissipator::new(m.clone(), p.kappa / 2.0 * (nth + 1.0))?);
        if nth > 0.0 {
            out.push(Dissipator::new(m.adjoint(), p.kappa / 2.0 * nth)?);
        }
    }
    out.push(Dissipator::new(model.sigma.clone(), p.gamma / 2.0)?);
    Ok(out)
}

pub fn effective_liouvillian(model: &EffectiveModel, p: &EffectiveParams) -> Result<Liouvillian> {
    p.validate()?;
    build_liouvillian(&model.hamiltonian(p), &effective_dissipators(model, p)?)
}

pub fn effective_steady_state(p: &EffectiveParams, space: &HilbertSpace) -> Result<DensityMatrix> {
    let model = EffectiveModel::new(space)?;
    steady_state(&effective_liouvillian(&model, p)?)
}

/// `g²(0)` of the driven magnon from the Lindblad steady state.
pub fn numeric_g2(p: &EffectiveParams, space: &HilbertSpace) -> Result<f64> {
    g2_zero(&effective_steady_state(p, space)?, crate::hilbert::MAGNON1)
}

/// Loss channels of the five-mode model. Cavity loss is an explicit input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullModelBath {
    pub kappa: f64,
    pub gamma: f64,
    pub n_th1: f64,
    pub n_th2: f64,
    pub cavity_decay: f64,
}

pub fn full_dissipators(model: &FullModel, bath: &FullModelBath) -> Result<Vec<Dissipator>> {
    let mut out = Vec::with_capacity(7);
    for (m, nth) in [(&model.m1, bath.n_th1), (&model.m2, bath.n_th2)] {
        out.push(Dissipator::new(m.clone(), bath.kappa / 2.0 * (nth + 1.0))?);
        if nth > 0.0 {
            out.push(Dissipator::new(m.adjoint(), bath.kappa / 2.0 * nth)?);
        }
    }
    out.push(Dissipator::new(model.sigma.clone(), bath.gamma / 2.0)?);
    if bath.cavity_decay > 0.0 {
        for a in [&model.a1, &model.a2] {
            out.push(Dissipator::new(a.clone(), bath.cavity_decay / 2.0)?);
        }
    }
    Ok(out)
}

pub fn full_steady_state(
    p: &FullModelParams,
    bath: &FullModelBath,
    space: &HilbertSpace,
) -> Result<DensityMatrix> {
    let model = FullModel::new(space)?;
    let l = build_liouvillian(&model.hamiltonian(p)?, &full_dissipators(&model, bath)?)?;
    steady_state(&l)
}
