use serde::{Deserialize, Serialize};

use crate::analytic::g2_analytic;
use crate::error::{Error, Result};
use crate::exec::{self, ExecutionMode};
use crate::hilbert::{EffectiveModel, EffectiveParams, HilbertSpace, MAGNON1};
use crate::lindblad::{effective_liouvillian, g2_zero, steady_state, Physicality};
use crate::optimize::{parabolic_offset, quadratic_offset_2d};

/// A parameter that can be swept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    Delta1,
    Delta2,
    DeltaQ,
    /// `g₂/g₁`; sets `g₂` relative to the current `g₁`.
    GRatio,
    G1,
    G2,
    OmegaDrive,
    Gamma,
    NTh1,
    NTh2,
}

impl Axis {
    pub const ALL: [Axis; 10] = [
        Axis::Delta1,
        Axis::Delta2,
        Axis::DeltaQ,
        Axis::GRatio,
        Axis::G1,
        Axis::G2,
        Axis::OmegaDrive,
        Axis::Gamma,
        Axis::NTh1,
        Axis::NTh2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axis::Delta1 => "delta1",
            Axis::Delta2 => "delta2",
            Axis::DeltaQ => "delta_q",
            Axis::GRatio => "g_ratio",
            Axis::G1 => "g1",
            Axis::G2 => "g2",
            Axis::OmegaDrive => "omega_drive",
            Axis::Gamma => "gamma",
            Axis::NTh1 => "n_th1",
            Axis::NTh2 => "n_th2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn apply(self, p: &mut EffectiveParams, value: f64) {
        match self {
            Axis::Delta1 => p.delta1 = value,
            Axis::Delta2 => p.delta2 = value,
            Axis::DeltaQ => p.delta_q = value,
            Axis::GRatio => p.g2 = value * p.g1,
            Axis::G1 => p.g1 = value,
            Axis::G2 => p.g2 = value,
            Axis::OmegaDrive => p.omega_drive = value,
            Axis::Gamma => p.gamma = value,
            Axis::NTh1 => p.n_th1 = value,
            Axis::NTh2 => p.n_th2 = value,
        }
    }
}

/// Strictly monotone sample points of one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub axis: Axis,
    pub values: Vec<f64>,
}

impl AxisSpec {
    pub fn new(axis: Axis, values: Vec<f64>) -> Result<Self> {
        let bad = |reason: &str| Error::InvalidAxis {
            name: axis.name().into(),
            reason: reason.into(),
        };
        if values.len() < 2 {
            return Err(bad("need at least 2 values"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(bad("values must be finite"));
        }
        let inc = values.windows(2).all(|w| w[1] > w[0]);
        let dec = values.windows(2).all(|w| w[1] < w[0]);
        if !inc && !dec {
            return Err(bad("values must be strictly monotone"));
        }
        Ok(Self { axis, values })
    }

    /// `count` evenly spaced points from `min` to `max` inclusive.
    pub fn linspace(axis: Axis, min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidAxis {
                name: axis.name().into(),
                reason: format!("count must be at least 2, got {count}"),
            });
        }
        let step = (max - min) / (count - 1) as f64;
        let values = (0..count)
            .map(|k| if k + 1 == count { max } else { min + k as f64 * step })
            .collect();
        Self::new(axis, values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Interpolated coordinate at fractional offset `off` from index `i`.
    fn at_offset(&self, i: usize, off: f64) -> f64 {
        let v = &self.values;
        if off >= 0.0 && i + 1 < v.len() {
            v[i] + off * (v[i + 1] - v[i])
        } else if off < 0.0 && i > 0 {
            v[i] + off * (v[i] - v[i - 1])
        } else {
            v[i]
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Analytic,
    Numeric,
    Both,
}

impl Channel {
    pub fn numeric(self) -> bool {
        matches!(self, Channel::Numeric | Channel::Both)
    }

    pub fn analytic(self) -> bool {
        matches!(self, Channel::Analytic | Channel::Both)
    }
}

/// Why a cell carries no value in some channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellFlag {
    Ok,
    Unoccupied,
    Degenerate,
    SolverFailure,
}

impl CellFlag {
    fn of(err: &Error) -> Self {
        match err {
            Error::UnoccupiedMode { .. } => CellFlag::Unoccupied,
            Error::DegenerateParameters(_) | Error::DivisionByZero(_) => CellFlag::Degenerate,
            _ => CellFlag::SolverFailure,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CellFlag::Ok => "ok",
            CellFlag::Unoccupied => "unoccupied",
            CellFlag::Degenerate => "degenerate",
            CellFlag::SolverFailure => "solver_failure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Fock truncation of both magnons in the numeric channel.
    pub truncation: usize,
    pub mode: ExecutionMode,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            truncation: 4,
            mode: ExecutionMode::Sequential,
        }
    }
}

/// Result at one grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub numeric: Option<f64>,
    pub analytic: Option<f64>,
    pub flag: CellFlag,
    pub physicality: Option<Physicality>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridMinimum {
    pub channel: Channel,
    /// Grid indices of the smallest sampled value.
    pub index: (usize, usize),
    /// Sampled coordinates at `index`; the second is absent on 1-D grids.
    pub grid_point: (f64, Option<f64>),
    /// Coordinates after local quadratic refinement.
    pub refined: (f64, Option<f64>),
    pub value: f64,
}

/// `g²(0)` over a 1-D or 2-D parameter grid. Cells are stored row-major with
/// the first axis slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub base: EffectiveParams,
    pub channel: Channel,
    pub options: SweepOptions,
    pub axis1: AxisSpec,
    pub axis2: Option<AxisSpec>,
    pub cells: Vec<Cell>,
    pub minima: Vec<GridMinimum>,
}

impl SweepGrid {
    pub fn shape(&self) -> (usize, usize) {
        (
            self.axis1.len(),
            self.axis2.as_ref().map_or(1, AxisSpec::len),
        )
    }

    pub fn cell(&self, i: usize, j: usize) -> &Cell {
        &self.cells[i * self.shape().1 + j]
    }

    pub fn values(&self, channel: Channel) -> Vec<Option<f64>> {
        self.cells
            .iter()
            .map(|c| match channel {
                Channel::Analytic => c.analytic,
                _ => c.numeric,
            })
            .collect()
    }

    pub fn minimum(&self, channel: Channel) -> Option<&GridMinimum> {
        self.minima.iter().find(|m| m.channel == channel)
    }

    pub fn is_2d(&self) -> bool {
        self.axis2.is_some()
    }
}

/// Evaluates one parameter point in the requested channels.
pub fn evaluate_point(p: &EffectiveParams, channel: Channel, truncation: usize) -> Result<Cell> {
    p.validate()?;
    let mut flag = CellFlag::Ok;
    let mut numeric = None;
    let mut physicality = None;
    if channel.numeric() {
        let space = HilbertSpace::effective(truncation, truncation)?;
        let model = EffectiveModel::new(&space)?;
        let outcome = effective_liouvillian(&model, p).and_then(|l| steady_state(&l));
        match outcome {
            Ok(rho) => {
                physicality = Some(rho.physicality());
                match g2_zero(&rho, MAGNON1) {
                    Ok(g) => numeric = Some(g),
                    Err(e) => flag = CellFlag::of(&e),
                }
            }
            Err(e) => flag = CellFlag::of(&e),
        }
    }
    let mut analytic = None;
    if channel.analytic() {
        match g2_analytic(p) {
            Ok(g) => analytic = Some(g),
            Err(e) => {
                if flag == CellFlag::Ok {
                    flag = CellFlag::of(&e);
                }
            }
        }
    }
    Ok(Cell {
        numeric,
        analytic,
        flag,
        physicality,
    })
}

pub fn sweep_2d(
    base: &EffectiveParams,
    axis1: &AxisSpec,
    axis2: &AxisSpec,
    channel: Channel,
    options: &SweepOptions,
) -> Result<SweepGrid> {
    if axis1.axis == axis2.axis {
        return Err(Error::InvalidAxis {
            name: axis2.axis.name().into(),
            reason: "both axes sweep the same parameter".into(),
        });
    }
    run(base, axis1.clone(), Some(axis2.clone()), channel, options)
}

pub fn sweep_1d(
    base: &EffectiveParams,
    axis: &AxisSpec,
    channel: Channel,
    options: &SweepOptions,
) -> Result<SweepGrid> {
    run(base, axis.clone(), None, channel, options)
}

fn point_params(base: &EffectiveParams, a1: &AxisSpec, a2: Option<&AxisSpec>, i: usize, j: usize) -> EffectiveParams {
    let mut p = *base;
    // A ratio axis must see the final g₁, so it is applied last.
    let mut updates = vec![(a1.axis, a1.values[i])];
    if let Some(a2) = a2 {
        updates.push((a2.axis, a2.values[j]));
    }
    updates.sort_by_key(|(a, _)| *a == Axis::GRatio);
    for (a, v) in updates {
        a.apply(&mut p, v);
    }
    p
}

fn run(
    base: &EffectiveParams,
    axis1: AxisSpec,
    axis2: Option<AxisSpec>,
    channel: Channel,
    options: &SweepOptions,
) -> Result<SweepGrid> {
    base.validate()?;
    HilbertSpace::effective(options.truncation, options.truncation)?;
    if options.truncation < 3 {
        return Err(Error::TruncationTooSmall {
            what: "magnon",
            dim: options.truncation,
            min: 3,
        });
    }
    let n2 = axis2.as_ref().map_or(1, AxisSpec::len);
    let points: Vec<EffectiveParams> = (0..axis1.len())
        .flat_map(|i| (0..n2).map(move |j| (i, j)))
        .map(|(i, j)| point_params(base, &axis1, axis2.as_ref(), i, j))
        .collect();
    let cells = exec::map(&points, options.mode, |p| {
        evaluate_point(p, channel, options.truncation)
    })
    .into_iter()
    .collect::<Result<Vec<Cell>>>()?;

    let mut grid = SweepGrid {
        base: *base,
        channel,
        options: *options,
        axis1,
        axis2,
        cells,
        minima: Vec::new(),
    };
    for ch in [Channel::Numeric, Channel::Analytic] {
        let wanted = match ch {
            Channel::Numeric => channel.numeric(),
            _ => channel.analytic(),
        };
        if wanted {
            if let Some(m) = locate_minimum(&grid, ch) {
                grid.minima.push(m);
            }
        }
    }
    Ok(grid)
}

/// Grid argmin (first in row-major order on ties) refined by a quadratic fit
/// on its neighbourhood. Flagged cells never take part.
pub fn locate_minimum(grid: &SweepGrid, channel: Channel) -> Option<GridMinimum> {
    let (n1, n2) = grid.shape();
    let vals = grid.values(channel);
    let usable = |k: usize| -> Option<f64> {
        if grid.cells[k].flag == CellFlag::Ok {
            vals[k]
        } else {
            None
        }
    };
    let mut best: Option<(usize, f64)> = None;
    for k in 0..vals.len() {
        if let Some(v) = usable(k) {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((k, v));
            }
        }
    }
    let (k, value) = best?;
    let (i, j) = (k / n2, k % n2);
    let at = |ii: usize, jj: usize| usable(ii * n2 + jj);

    let x_grid = grid.axis1.values[i];
    let y_grid = grid.axis2.as_ref().map(|a| a.values[j]);

    let along1 = || -> Option<f64> {
        if i == 0 || i + 1 >= n1 {
            return None;
        }
        parabolic_offset([at(i - 1, j)?, value, at(i + 1, j)?])
    };
    let along2 = || -> Option<f64> {
        if j == 0 || j + 1 >= n2 {
            return None;
        }
        parabolic_offset([at(i, j - 1)?, value, at(i, j + 1)?])
    };
    let stencil = || -> Option<(f64, f64)> {
        if i == 0 || j == 0 || i + 1 >= n1 || j + 1 >= n2 {
            return None;
        }
        let mut z = [[0.0; 3]; 3];
        for (a, row) in z.iter_mut().enumerate() {
            for (b, v) in row.iter_mut().enumerate() {
                *v = at(i + a - 1, j + b - 1)?;
            }
        }
        quadratic_offset_2d(z)
    };

    let clamp = |o: f64| o.clamp(-1.0, 1.0);
    let refined = match &grid.axis2 {
        None => {
            let off = along1().map_or(0.0, clamp);
            (grid.axis1.at_offset(i, off), None)
        }
        Some(a2) => {
            let (ox, oy) = stencil()
                .map(|(x, y)| (clamp(x), clamp(y)))
                .unwrap_or_else(|| (along1().map_or(0.0, clamp), along2().map_or(0.0, clamp)));
            (grid.axis1.at_offset(i, ox), Some(a2.at_offset(j, oy)))
        }
    };
    Some(GridMinimum {
        channel,
        index: (i, j),
        grid_point: (x_grid, y_grid),
        refined,
        value,
    })
}
