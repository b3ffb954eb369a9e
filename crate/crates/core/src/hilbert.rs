//! Tensor-product spaces, ladder operators and the model Hamiltonians.
//!
//! Basis order is fixed: qubit first (index 0 = ground, 1 = excited), then
//! magnon 1, magnon 2 and, for the five-mode model, cavity 1 and cavity 2.
//! The first subsystem is the slowest-varying index of the Kronecker product.
//! All rates and frequencies are in units of the magnon linewidth κ.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Slot of each subsystem in the effective three-mode space.
pub const QUBIT: usize = 0;
pub const MAGNON1: usize = 1;
pub const MAGNON2: usize = 2;
/// Extra slots of the five-mode space.
pub const CAVITY1: usize = 3;
pub const CAVITY2: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct HilbertSpace {
    dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDimension(0));
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension(d));
        }
        Ok(Self { dims })
    }

    /// `[qubit, magnon1, magnon2]`.
    pub fn effective(n1: usize, n2: usize) -> Result<Self> {
        Self::new(vec![2, n1, n2])
    }

    /// `[qubit, magnon1, magnon2, cavity1, cavity2]`.
    pub fn full(n1: usize, n2: usize, nc1: usize, nc2: usize) -> Result<Self> {
        Self::new(vec![2, n1, n2, nc1, nc2])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Flat basis index of a product state given per-subsystem occupations.
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: occupations.len(),
            });
        }
        let mut idx = 0;
        for (&n, &d) in occupations.iter().zip(&self.dims) {
            if n >= d {
                return Err(Error::DimensionMismatch { expected: d, found: n });
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.dims.len()];
        for (slot, &d) in occ.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        occ
    }

    /// Total excitation number of a basis state.
    pub fn excitation(&self, index: usize) -> usize {
        self.occupations(index).iter().sum()
    }
}

impl TryFrom<Vec<usize>> for HilbertSpace {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        Self::new(dims)
    }
}

impl From<HilbertSpace> for Vec<usize> {
    fn from(space: HilbertSpace) -> Self {
        space.dims
    }
}

/// A square matrix tagged with the space it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    space: HilbertSpace,
    matrix: CsrMatrix,
}

impl Operator {
    pub fn new(space: HilbertSpace, matrix: CsrMatrix) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    /// Operator on a single subsystem of dimension `matrix.nrows()`.
    pub fn local(matrix: CsrMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Self::new(HilbertSpace::new(vec![matrix.nrows()])?, matrix)
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let n = space.total_dim();
        Self {
            space: space.clone(),
            matrix: CsrMatrix::identity(n),
        }
    }

    pub fn zero(space: &HilbertSpace) -> Self {
        let n = space.total_dim();
        Self {
            space: space.clone(),
            matrix: CsrMatrix::zeros(n, n),
        }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.scale(s),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.add(&other.matrix)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.sub(&other.matrix)?,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: self.matrix.matmul(&other.matrix)?,
        })
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// Matrix element between two product states given as occupations.
    pub fn element(&self, row: &[usize], col: &[usize]) -> Result<Complex64> {
        Ok(self
            .matrix
            .get(self.space.index_of(row)?, self.space.index_of(col)?))
    }

    /// `max |H - H†|` over all entries.
    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix
            .max_abs_diff(&self.matrix.adjoint())
            .expect("square operator")
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        self.matrix.to_dense()
    }

    pub fn same_space(&self, other: &Self) -> Result<()> {
        if self.space != other.space {
            return Err(Error::SpaceMismatch {
                left: self.space.dims().to_vec(),
                right: other.space.dims().to_vec(),
            });
        }
        Ok(())
    }

    fn lin_comb(space: &HilbertSpace, terms: &[(Complex64, &Operator)]) -> Self {
        let n = space.total_dim();
        let entries = terms
            .iter()
            .filter(|(c, _)| *c != ZERO)
            .flat_map(|&(c, op)| op.matrix.triplets().map(move |(r, k, v)| (r, k, c * v)));
        Self {
            space: space.clone(),
            matrix: CsrMatrix::from_triplets(n, n, entries),
        }
    }
}

/// Truncated bosonic annihilation operator with `a[n-1, n] = √n`.
pub fn annihilation(dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let m = CsrMatrix::from_triplets(dim, dim, (1..dim).map(|n| (n - 1, n, re((n as f64).sqrt()))));
    Operator::local(m)
}

/// Qubit lowering operator `σ = |g⟩⟨e|`.
pub fn qubit_lower() -> Operator {
    Operator::local(CsrMatrix::from_triplets(2, 2, [(0, 1, re(1.0))])).expect("2x2")
}

/// Embeds a single-subsystem operator at `position`, with identities elsewhere.
pub fn embed(local: &Operator, space: &HilbertSpace, position: usize) -> Result<Operator> {
    let dims = space.dims();
    if position >= dims.len() {
        return Err(Error::PositionOutOfRange {
            position,
            len: dims.len(),
        });
    }
    if local.dim() != dims[position] {
        return Err(Error::DimensionMismatch {
            expected: dims[position],
            found: local.dim(),
        });
    }
    let left: usize = dims[..position].iter().product();
    let right: usize = dims[position + 1..].iter().product();
    let m = CsrMatrix::identity(left)
        .kron(local.matrix())
        .kron(&CsrMatrix::identity(right));
    Operator::new(space.clone(), m)
}

/// Scalars of the effective three-mode model, in units of κ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    pub delta1: f64,
    pub delta2: f64,
    pub delta_q: f64,
    pub g1: f64,
    pub g2: f64,
    pub omega_drive: f64,
    pub kappa: f64,
    pub gamma: f64,
    pub n_th1: f64,
    pub n_th2: f64,
}

impl EffectiveParams {
    /// Resonant operating point: γ = 1.11, g₁ = 0.8, Ω = 0.001 with
    /// g₂ = 0.161 g₁ and every detuning zero.
    pub fn reference() -> Self {
        Self {
            delta1: 0.0,
            delta2: 0.0,
            delta_q: 0.0,
            g1: 0.8,
            g2: 0.161 * 0.8,
            omega_drive: 1e-3,
            kappa: 1.0,
            gamma: 1.11,
            n_th1: 0.0,
            n_th2: 0.0,
        }
    }

    pub fn with_ratio(mut self, g2_over_g1: f64) -> Self {
        self.g2 = g2_over_g1 * self.g1;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("delta_q", self.delta_q),
            ("g1", self.g1),
            ("g2", self.g2),
            ("omega_drive", self.omega_drive),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("n_th1", self.n_th1),
            ("n_th2", self.n_th2),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} is not finite"),
                });
            }
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: "must be positive".into(),
            });
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: "must be positive".into(),
            });
        }
        for (name, v) in [("n_th1", self.n_th1), ("n_th2", self.n_th2)] {
            if v < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: "thermal occupation must be non-negative".into(),
                });
            }
        }
        Ok(())
    }

    /// Multiplies every rate, coupling, detuning and the drive by `factor`.
    pub fn rescaled(&self, factor: f64) -> Self {
        Self {
            delta1: self.delta1 * factor,
            delta2: self.delta2 * factor,
            delta_q: self.delta_q * factor,
            g1: self.g1 * factor,
            g2: self.g2 * factor,
            omega_drive: self.omega_drive * factor,
            kappa: self.kappa * factor,
            gamma: self.gamma * factor,
            ..*self
        }
    }

    /// Flips the sign of all three detunings.
    pub fn mirrored(&self) -> Self {
        Self {
            delta1: -self.delta1,
            delta2: -self.delta2,
            delta_q: -self.delta_q,
            ..*self
        }
    }
}

impl Default for EffectiveParams {
    fn default() -> Self {
        Self::reference()
    }
}

/// Scalars of the five-mode model with explicit cavities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullModelParams {
    pub delta_c1: f64,
    pub delta_c2: f64,
    pub delta1_bare: f64,
    pub delta2_bare: f64,
    pub delta_q_bare: f64,
    pub g_m1: f64,
    pub g_m2: f64,
    pub g_q1: f64,
    pub g_q2: f64,
    pub omega_drive: f64,
}

impl FullModelParams {
    /// Dispersive parameters whose cavity elimination lands exactly on the
    /// given effective couplings and detunings, with `g_m = g_q` per arm.
    ///
    /// The reduced couplings come out as `-|g_j|`; only the magnitude is
    /// physical.
    pub fn dispersive_for(target: &EffectiveParams, cavity_detuning: f64) -> Result<Self> {
        if cavity_detuning == 0.0 {
            return Err(Error::DivisionByZero("cavity detuning"));
        }
        // g_m g_q / δ0 = |g|, so each equals sqrt(|g| δ0) for δ0 > 0.
        let arm = |g: f64| (g.abs() * cavity_detuning.abs()).sqrt();
        let (gm1, gm2) = (arm(target.g1), arm(target.g2));
        let (gq1, gq2) = (gm1, gm2);
        let sign = cavity_detuning.signum();
        Ok(Self {
            delta_c1: cavity_detuning,
            delta_c2: cavity_detuning,
            delta1_bare: target.delta1 + gm1 * gm1 / cavity_detuning,
            delta2_bare: target.delta2 + gm2 * gm2 / cavity_detuning,
            delta_q_bare: target.delta_q + (gq1 * gq1 + gq2 * gq2) / cavity_detuning,
            g_m1: gm1,
            g_m2: gm2,
            g_q1: gq1 * sign,
            g_q2: gq2 * sign,
            omega_drive: target.omega_drive,
        })
    }
}

/// Dissipative inputs the cavity elimination does not produce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub kappa: f64,
    pub gamma: f64,
    pub n_th1: f64,
    pub n_th2: f64,
}

impl BathParams {
    pub fn from_effective(p: &EffectiveParams) -> Self {
        Self {
            kappa: p.kappa,
            gamma: p.gamma,
            n_th1: p.n_th1,
            n_th2: p.n_th2,
        }
    }
}

/// Adiabatic elimination of the two far-detuned cavities.
pub fn reduce_full_params(p: &FullModelParams, bath: &BathParams) -> Result<EffectiveParams> {
    if p.delta_c1 == 0.0 {
        return Err(Error::DivisionByZero("delta_c1"));
    }
    if p.delta_c2 == 0.0 {
        return Err(Error::DivisionByZero("delta_c2"));
    }
    Ok(EffectiveParams {
        delta_q: p.delta_q_bare - p.g_q1 * p.g_q1 / p.delta_c1 - p.g_q2 * p.g_q2 / p.delta_c2,
        delta1: p.delta1_bare - p.g_m1 * p.g_m1 / p.delta_c1,
        delta2: p.delta2_bare - p.g_m2 * p.g_m2 / p.delta_c2,
        g1: -p.g_m1 * p.g_q1 / p.delta_c1,
        g2: -p.g_m2 * p.g_q2 / p.delta_c2,
        omega_drive: p.omega_drive,
        kappa: bath.kappa,
        gamma: bath.gamma,
        n_th1: bath.n_th1,
        n_th2: bath.n_th2,
    })
}

/// Embedded ladder operators of the qubit and the two magnons, plus the
/// operator products the Hamiltonians are built from.
#[derive(Debug, Clone)]
pub struct EffectiveModel {
    space: HilbertSpace,
    pub sigma: Operator,
    pub m1: Operator,
    pub m2: Operator,
    n_q: Operator,
    n_1: Operator,
    n_2: Operator,
    x_1: Operator,
    x_2: Operator,
    drive: Operator,
}

impl EffectiveModel {
    pub fn new(space: &HilbertSpace) -> Result<Self> {
        let dims = space.dims();
        if dims.len() != 3 || dims[QUBIT] != 2 {
            return Err(Error::Unsupported(format!(
                "effective model needs a [2, N1, N2] space, got {dims:?}"
            )));
        }
        if dims[MAGNON1] < 3 {
            return Err(Error::TruncationTooSmall {
                what: "magnon 1",
                dim: dims[MAGNON1],
                min: 3,
            });
        }
        let sigma = embed(&qubit_lower(), space, QUBIT)?;
        let m1 = embed(&annihilation(dims[MAGNON1])?, space, MAGNON1)?;
        let m2 = embed(&annihilation(dims[MAGNON2])?, space, MAGNON2)?;
        let n_q = sigma.adjoint().mul(&sigma)?;
        let n_1 = m1.adjoint().mul(&m1)?;
        let n_2 = m2.adjoint().mul(&m2)?;
        let x_1 = sigma.adjoint().mul(&m1)?.add(&sigma.mul(&m1.adjoint())?)?;
        let x_2 = sigma.adjoint().mul(&m2)?.add(&sigma.mul(&m2.adjoint())?)?;
        let drive = m1.adjoint().add(&m1)?;
        Ok(Self {
            space: space.clone(),
            sigma,
            m1,
            m2,
            n_q,
            n_1,
            n_2,
            x_1,
            x_2,
            drive,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn hamiltonian(&self, p: &EffectiveParams) -> Operator {
        Operator::lin_comb(
            &self.space,
            &[
                (re(p.delta_q), &self.n_q),
                (re(p.delta1), &self.n_1),
                (re(p.delta2), &self.n_2),
                (re(p.g1), &self.x_1),
                (re(p.g2), &self.x_2),
                (re(p.omega_drive), &self.drive),
            ],
        )
    }

    pub fn nonhermitian_hamiltonian(&self, p: &EffectiveParams) -> Operator {
        let i = Complex64::new(0.0, 1.0);
        Operator::lin_comb(
            &self.space,
            &[
                (re(p.delta_q) - i * (p.gamma / 2.0), &self.n_q),
                (re(p.delta1) - i * (p.kappa / 2.0), &self.n_1),
                (re(p.delta2) - i * (p.kappa / 2.0), &self.n_2),
                (re(p.g1), &self.x_1),
                (re(p.g2), &self.x_2),
                (re(p.omega_drive), &self.drive),
            ],
        )
    }
}

/// Rotating-frame Hamiltonian of the qubit and two magnons.
pub fn build_effective_hamiltonian(p: &EffectiveParams, space: &HilbertSpace) -> Result<Operator> {
    Ok(EffectiveModel::new(space)?.hamiltonian(p))
}

/// `H - iκ/2 (m₁†m₁ + m₂†m₂) - iγ/2 σ†σ`.
pub fn build_effective_nonhermitian(
    p: &EffectiveParams,
    space: &HilbertSpace,
) -> Result<Operator> {
    Ok(EffectiveModel::new(space)?.nonhermitian_hamiltonian(p))
}

/// Ladder operators of the five-mode model.
#[derive(Debug, Clone)]
pub struct FullModel {
    space: HilbertSpace,
    pub sigma: Operator,
    pub m1: Operator,
    pub m2: Operator,
    pub a1: Operator,
    pub a2: Operator,
}

impl FullModel {
    pub fn new(space: &HilbertSpace) -> Result<Self> {
        let dims = space.dims();
        if dims.len() != 5 || dims[QUBIT] != 2 {
            return Err(Error::Unsupported(format!(
                "full model needs a [2, N1, N2, Nc1, Nc2] space, got {dims:?}"
            )));
        }
        Ok(Self {
            space: space.clone(),
            sigma: embed(&qubit_lower(), space, QUBIT)?,
            m1: embed(&annihilation(dims[MAGNON1])?, space, MAGNON1)?,
            m2: embed(&annihilation(dims[MAGNON2])?, space, MAGNON2)?,
            a1: embed(&annihilation(dims[CAVITY1])?, space, CAVITY1)?,
            a2: embed(&annihilation(dims[CAVITY2])?, space, CAVITY2)?,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn hamiltonian(&self, p: &FullModelParams) -> Result<Operator> {
        let hop = |x: &Operator, y: &Operator| -> Result<Operator> {
            x.adjoint().mul(y)?.add(&x.mul(&y.adjoint())?)
        };
        let num = |x: &Operator| x.adjoint().mul(x);
        let terms = [
            (p.delta_c1, num(&self.a1)?),
            (p.delta_c2, num(&self.a2)?),
            (p.delta1_bare, num(&self.m1)?),
            (p.delta2_bare, num(&self.m2)?),
            (p.delta_q_bare, num(&self.sigma)?),
            (p.g_m1, hop(&self.m1, &self.a1)?),
            (p.g_m2, hop(&self.m2, &self.a2)?),
            (p.g_q1, hop(&self.sigma, &self.a1)?),
            (p.g_q2, hop(&self.sigma, &self.a2)?),
            (p.omega_drive, self.m1.adjoint().add(&self.m1)?),
        ];
        let refs: Vec<(Complex64, &Operator)> = terms.iter().map(|(c, op)| (re(*c), op)).collect();
        Ok(Operator::lin_comb(&self.space, &refs))
    }
}

/// Five-mode Hamiltonian with both cavities kept explicitly.
pub fn build_full_hamiltonian(p: &FullModelParams, space: &HilbertSpace) -> Result<Operator> {
    FullModel::new(space)?.hamiltonian(p)
}
