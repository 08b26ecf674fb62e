use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::barrier::{BarrierProblem, LinearIneq, Lmi, LogDetIneq};
use super::{ConvexError, SolverConfig, MAX_BLOCK_DIM};
use crate::linalg::real_embedding;

/// A PSD matrix variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Symmetric(usize),
    Hermitian(usize),
}

impl BlockKind {
    pub fn dim(&self) -> usize {
        match self {
            BlockKind::Symmetric(d) | BlockKind::Hermitian(d) => *d,
        }
    }

    fn n_vars(&self) -> usize {
        match self {
            BlockKind::Symmetric(d) => d * (d + 1) / 2,
            BlockKind::Hermitian(d) => d * d,
        }
    }
}

/// Coefficient matrix of a trace-linear form `Tr(A X)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Coeff {
    Real(DMatrix<f64>),
    Complex(DMatrix<Complex64>),
}

impl Coeff {
    fn entry(&self, r: usize, c: usize) -> Complex64 {
        match self {
            Coeff::Real(m) => Complex64::new(m[(r, c)], 0.0),
            Coeff::Complex(m) => m[(r, c)],
        }
    }

    fn shape(&self) -> (usize, usize) {
        match self {
            Coeff::Real(m) => m.shape(),
            Coeff::Complex(m) => m.shape(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Eq,
    Ge,
    Le,
}

/// `Σ_b Tr(A_b X_b) {=, ≥, ≤} rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceConstraint {
    pub terms: Vec<(usize, Coeff)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `log det(base + Σ_b S_b X_b S_bᵀ) − Σ_b Tr(L_b X_b) − offset ≥ 0` over
/// symmetric blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct LogDetConstraint {
    pub base: DMatrix<f64>,
    pub congruences: Vec<(usize, DMatrix<f64>)>,
    pub linear: Vec<(usize, DMatrix<f64>)>,
    pub offset: f64,
}

/// Minimize `Σ_b Tr(C_b X_b)` over PSD blocks subject to trace-linear and
/// log-determinant constraints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SemidefiniteProgram {
    pub blocks: Vec<BlockKind>,
    pub objective: Vec<(usize, Coeff)>,
    pub constraints: Vec<TraceConstraint>,
    pub log_det: Vec<LogDetConstraint>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BlockValue {
    Symmetric(DMatrix<f64>),
    Hermitian(DMatrix<Complex64>),
}

impl BlockValue {
    /// The real symmetric value, or the real part of a Hermitian one.
    pub fn real(&self) -> DMatrix<f64> {
        match self {
            BlockValue::Symmetric(m) => m.clone(),
            BlockValue::Hermitian(m) => m.map(|z| z.re),
        }
    }

    pub fn complex(&self) -> DMatrix<Complex64> {
        match self {
            BlockValue::Symmetric(m) => m.map(|v| Complex64::new(v, 0.0)),
            BlockValue::Hermitian(m) => m.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpSolution {
    pub blocks: Vec<BlockValue>,
    pub objective: f64,
    pub dual_bound: f64,
    pub gap: f64,
    /// Phase-1 slack: negative when the returned point is strictly feasible.
    pub slack: f64,
    pub newton_steps: usize,
}

/// One scalar coordinate of a block: its position and the sparse complex
/// basis matrix it multiplies.
struct Coordinate {
    block: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

fn coordinates(blocks: &[BlockKind]) -> (Vec<Coordinate>, Vec<usize>) {
    let mut coords = Vec::new();
    let mut offsets = Vec::new();
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for (b, kind) in blocks.iter().enumerate() {
        offsets.push(coords.len());
        let d = kind.dim();
        for r in 0..d {
            coords.push(Coordinate { block: b, entries: vec![(r, r, one)] });
        }
        for r in 0..d {
            for c in r + 1..d {
                coords.push(Coordinate { block: b, entries: vec![(r, c, one), (c, r, one)] });
            }
        }
        if let BlockKind::Hermitian(_) = kind {
            for r in 0..d {
                for c in r + 1..d {
                    coords.push(Coordinate { block: b, entries: vec![(r, c, i), (c, r, -i)] });
                }
            }
        }
    }
    (coords, offsets)
}

impl SemidefiniteProgram {
    pub fn new(blocks: Vec<BlockKind>) -> Self {
        Self { blocks, ..Default::default() }
    }

    pub fn add_objective(&mut self, block: usize, coeff: Coeff) -> &mut Self {
        self.objective.push((block, coeff));
        self
    }

    pub fn add_constraint(&mut self, terms: Vec<(usize, Coeff)>, sense: Sense, rhs: f64) -> &mut Self {
        self.constraints.push(TraceConstraint { terms, sense, rhs });
        self
    }

    pub fn add_log_det(&mut self, c: LogDetConstraint) -> &mut Self {
        self.log_det.push(c);
        self
    }

    pub fn validate(&self) -> Result<(), ConvexError> {
        let bad = |m: String| Err(ConvexError::InvalidProblem(m));
        for (b, k) in self.blocks.iter().enumerate() {
            if k.dim() == 0 || k.dim() > MAX_BLOCK_DIM {
                return bad(format!("block {b} has dimension {} outside 1..={MAX_BLOCK_DIM}", k.dim()));
            }
        }
        let check = |terms: &[(usize, Coeff)]| -> Result<(), ConvexError> {
            for (b, c) in terms {
                let Some(kind) = self.blocks.get(*b) else {
                    return Err(ConvexError::InvalidProblem(format!("unknown block {b}")));
                };
                let d = kind.dim();
                if c.shape() != (d, d) {
                    return Err(ConvexError::InvalidProblem(format!("coefficient for block {b} is not {d}×{d}")));
                }
                if matches!(kind, BlockKind::Symmetric(_)) && matches!(c, Coeff::Complex(_)) {
                    return Err(ConvexError::InvalidProblem(format!("complex coefficient on real block {b}")));
                }
            }
            Ok(())
        };
        check(&self.objective)?;
        for c in &self.constraints {
            check(&c.terms)?;
        }
        for l in &self.log_det {
            let d = l.base.nrows();
            if l.base.ncols() != d {
                return bad("log-det base must be square".into());
            }
            for (b, s) in &l.congruences {
                match self.blocks.get(*b) {
                    Some(BlockKind::Symmetric(k)) if s.shape() == (d, *k) => {}
                    _ => return bad(format!("log-det congruence on block {b} is malformed")),
                }
            }
            let lin: Vec<(usize, Coeff)> = l.linear.iter().map(|(b, m)| (*b, Coeff::Real(m.clone()))).collect();
            check(&lin)?;
        }
        Ok(())
    }

    fn compile(&self) -> (BarrierProblem, Vec<Coordinate>, Vec<usize>) {
        let (coords, offsets) = coordinates(&self.blocks);
        let n = coords.len();
        let mut p = BarrierProblem::new(n);

        let linear_form = |terms: &[(usize, Coeff)]| -> Vec<(usize, f64)> {
            let mut out = Vec::new();
            for (b, c) in terms {
                let start = offsets[*b];
                let count = self.blocks[*b].n_vars();
                for k in start..start + count {
                    // Tr(A B) = Σ A[c][r]·B[r][c]
                    let v: f64 = coords[k].entries.iter().map(|&(r, col, z)| (c.entry(col, r) * z).re).sum();
                    if v != 0.0 {
                        out.push((k, v));
                    }
                }
            }
            out
        };

        for (k, v) in linear_form(&self.objective) {
            p.objective[k] += v;
        }
        for c in &self.constraints {
            let row = linear_form(&c.terms);
            match c.sense {
                Sense::Eq => p.equalities.push((row, c.rhs)),
                Sense::Le => p.linear.push(LinearIneq { coeffs: row, bound: c.rhs }),
                Sense::Ge => p.linear.push(LinearIneq {
                    coeffs: row.into_iter().map(|(k, v)| (k, -v)).collect(),
                    bound: -c.rhs,
                }),
            }
        }
        for (b, kind) in self.blocks.iter().enumerate() {
            let d = kind.dim();
            let start = offsets[b];
            let terms = (start..start + kind.n_vars())
                .map(|k| {
                    let mut m = DMatrix::<Complex64>::zeros(d, d);
                    for &(r, c, z) in &coords[k].entries {
                        m[(r, c)] += z;
                    }
                    let real = match kind {
                        BlockKind::Symmetric(_) => m.map(|z| z.re),
                        BlockKind::Hermitian(_) => real_embedding(&m),
                    };
                    (k, real)
                })
                .collect();
            let size = match kind {
                BlockKind::Symmetric(_) => d,
                BlockKind::Hermitian(_) => 2 * d,
            };
            p.lmis.push(Lmi { f0: DMatrix::zeros(size, size), terms });
        }
        for l in &self.log_det {
            let mut terms = Vec::new();
            for (b, s) in &l.congruences {
                let start = offsets[*b];
                for k in start..start + self.blocks[*b].n_vars() {
                    let dim = self.blocks[*b].dim();
                    let mut e = DMatrix::zeros(dim, dim);
                    for &(r, c, z) in &coords[k].entries {
                        e[(r, c)] += z.re;
                    }
                    terms.push((k, s * e * s.transpose()));
                }
            }
            let lin: Vec<(usize, Coeff)> = l.linear.iter().map(|(b, m)| (*b, Coeff::Real(m.clone()))).collect();
            p.logdets.push(LogDetIneq {
                a0: l.base.clone(),
                terms,
                linear: linear_form(&lin),
                offset: l.offset,
            });
        }
        (p, coords, offsets)
    }

    fn unpack(&self, x: &DVector<f64>, coords: &[Coordinate], offsets: &[usize]) -> Vec<BlockValue> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(b, kind)| {
                let d = kind.dim();
                let mut m = DMatrix::<Complex64>::zeros(d, d);
                let start = offsets[b];
                for k in start..start + kind.n_vars() {
                    debug_assert_eq!(coords[k].block, b);
                    for &(r, c, z) in &coords[k].entries {
                        m[(r, c)] += z * x[k];
                    }
                }
                match kind {
                    BlockKind::Symmetric(_) => BlockValue::Symmetric(m.map(|z| z.re)),
                    BlockKind::Hermitian(_) => BlockValue::Hermitian(m),
                }
            })
            .collect()
    }
}

/// Solves the SDP to the configured duality gap.
pub fn solve_sdp(sdp: &SemidefiniteProgram, cfg: &SolverConfig) -> Result<SdpSolution, ConvexError> {
    sdp.validate()?;
    let (p, coords, offsets) = sdp.compile();
    let p1 = p.phase_one(cfg, None)?;
    if p1.slack >= 0.0 {
        return Err(ConvexError::Infeasible);
    }
    let sol = p.minimize(cfg, p1.x)?;
    Ok(SdpSolution {
        blocks: sdp.unpack(&sol.x, &coords, &offsets),
        objective: sol.objective,
        dual_bound: sol.dual_bound,
        gap: sol.gap,
        slack: p1.slack,
        newton_steps: p1.newton_steps + sol.newton_steps,
    })
}

/// Phase 1 only. Returns the most-feasible point when the optimal uniform
/// slack is at most `tol_feas`, otherwise `None`.
pub fn find_feasible_sdp(sdp: &SemidefiniteProgram, cfg: &SolverConfig) -> Result<Option<SdpSolution>, ConvexError> {
    sdp.validate()?;
    let (p, coords, offsets) = sdp.compile();
    let p1 = p.phase_one(cfg, None)?;
    if p1.slack > cfg.tol_feas {
        return Ok(None);
    }
    let objective = p.objective.dot(&p1.x);
    Ok(Some(SdpSolution {
        blocks: sdp.unpack(&p1.x, &coords, &offsets),
        objective,
        dual_bound: f64::NEG_INFINITY,
        gap: f64::INFINITY,
        slack: p1.slack,
        newton_steps: p1.newton_steps,
    }))
}
