//! Dense state vectors over named registers.
//!
//! Amplitudes are stored row-major over the register order, first register
//! most significant. Every operation returns a new value; nothing here ever
//! projects or renormalizes a state.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix2, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Amplitude = Complex64;

/// Tolerance on the norm of a constructed state.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Tolerance on `U^dagger U = I` for operators.
pub const UNITARY_TOLERANCE: f64 = 1e-10;
/// Probabilities below this are treated as zero.
pub const ZERO_PROBABILITY: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegisterKind {
    System,
    Apparatus,
    Brain,
}

impl fmt::Display for RegisterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegisterKind::System => "system",
            RegisterKind::Apparatus => "apparatus",
            RegisterKind::Brain => "brain",
        })
    }
}

impl FromStr for RegisterKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "system" => Ok(RegisterKind::System),
            "apparatus" => Ok(RegisterKind::Apparatus),
            "brain" => Ok(RegisterKind::Brain),
            other => Err(format!("unknown register kind `{other}`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Register {
    pub name: String,
    pub dim: usize,
    pub kind: RegisterKind,
}

impl Register {
    pub fn new(name: impl Into<String>, dim: usize, kind: RegisterKind) -> Self {
        Register {
            name: name.into(),
            dim,
            kind,
        }
    }
}

impl<S: Into<String>> From<(S, usize, RegisterKind)> for Register {
    fn from((name, dim, kind): (S, usize, RegisterKind)) -> Self {
        Register::new(name, dim, kind)
    }
}

/// Ordered, uniquely named registers with precomputed strides.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    registers: Vec<Register>,
    strides: Vec<usize>,
    total: usize,
}

impl RegisterLayout {
    pub const DEFAULT_CAP: usize = 1 << 20;

    pub fn new<R: Into<Register>>(registers: impl IntoIterator<Item = R>) -> Result<Self> {
        Self::with_cap(registers, Self::DEFAULT_CAP)
    }

    pub fn with_cap<R: Into<Register>>(
        registers: impl IntoIterator<Item = R>,
        cap: usize,
    ) -> Result<Self> {
        let registers: Vec<Register> = registers.into_iter().map(Into::into).collect();
        let mut total: usize = 1;
        for (i, reg) in registers.iter().enumerate() {
            if reg.dim < 2 {
                return Err(Error::DimensionTooSmall {
                    name: reg.name.clone(),
                    dim: reg.dim,
                });
            }
            if registers[..i].iter().any(|r| r.name == reg.name) {
                return Err(Error::DuplicateRegister(reg.name.clone()));
            }
            total =
                total
                    .checked_mul(reg.dim)
                    .filter(|&t| t <= cap)
                    .ok_or(Error::DimensionCap {
                        needed: registers
                            .iter()
                            .map(|r| r.dim)
                            .fold(1usize, |a, d| a.saturating_mul(d)),
                        cap,
                    })?;
        }
        let mut strides = vec![1; registers.len()];
        for i in (0..registers.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * registers[i + 1].dim;
        }
        Ok(RegisterLayout {
            registers,
            strides,
            total,
        })
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn len(&self) -> usize {
        self.registers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.registers.is_empty()
    }

    /// Number of amplitudes.
    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.registers
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRegister(name.to_string()))
    }

    pub fn register(&self, name: &str) -> Result<&Register> {
        self.position(name).map(|p| &self.registers[p])
    }

    pub fn stride(&self, position: usize) -> usize {
        self.strides[position]
    }

    /// Basis index of register `position` inside flat amplitude index `index`.
    #[inline]
    pub fn digit(&self, index: usize, position: usize) -> usize {
        (index / self.strides[position]) % self.registers[position].dim
    }

    /// Flat index of a computational basis state.
    pub fn flat_index(&self, indices: &[usize]) -> Result<usize> {
        if indices.len() != self.registers.len() {
            return Err(Error::IndexCount {
                expected: self.registers.len(),
                got: indices.len(),
            });
        }
        let mut flat = 0;
        for ((reg, &i), &stride) in self.registers.iter().zip(indices).zip(&self.strides) {
            if i >= reg.dim {
                return Err(Error::IndexOutOfRange {
                    register: reg.name.clone(),
                    index: i,
                    dim: reg.dim,
                });
            }
            flat += i * stride;
        }
        Ok(flat)
    }
}

/// Spin measurement direction given by polar and azimuthal angles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisSpec {
    theta: f64,
    phi: f64,
}

impl AxisSpec {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..TAU).contains(&phi) {
            return Err(Error::AxisOutOfRange { theta, phi });
        }
        Ok(AxisSpec { theta, phi })
    }

    /// Axis in the x-z plane (`phi = 0`).
    pub fn planar(theta: f64) -> Result<Self> {
        Self::new(theta, 0.0)
    }

    pub fn z() -> Self {
        AxisSpec {
            theta: 0.0,
            phi: 0.0,
        }
    }

    pub fn x() -> Self {
        AxisSpec {
            theta: PI / 2.0,
            phi: 0.0,
        }
    }

    pub fn y() -> Self {
        AxisSpec {
            theta: PI / 2.0,
            phi: PI / 2.0,
        }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn unit_vector(&self) -> Vector3<f64> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vector3::new(st * cp, st * sp, ct)
    }

    /// Angle between the two directions.
    pub fn angle_to(&self, other: &AxisSpec) -> f64 {
        self.unit_vector()
            .dot(&other.unit_vector())
            .clamp(-1.0, 1.0)
            .acos()
    }

    /// `n . sigma` for this axis.
    pub fn spin_operator(&self) -> Matrix2<Complex64> {
        let n = self.unit_vector();
        Matrix2::new(
            Complex64::new(n.z, 0.0),
            Complex64::new(n.x, -n.y),
            Complex64::new(n.x, n.y),
            Complex64::new(-n.z, 0.0),
        )
    }

    /// The +1 eigenvector `(cos(theta/2), e^{i phi} sin(theta/2))`.
    pub fn plus_state(&self) -> [Complex64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [Complex64::new(c, 0.0), Complex64::from_polar(s, self.phi)]
    }

    /// The -1 eigenvector `(-e^{-i phi} sin(theta/2), cos(theta/2))`.
    pub fn minus_state(&self) -> [Complex64; 2] {
        let (s, c) = (self.theta / 2.0).sin_cos();
        [-Complex64::from_polar(s, -self.phi), Complex64::new(c, 0.0)]
    }

    /// `R` with `R|axis,+> = |0>` and `R|axis,->  = |1>`.
    pub fn basis_rotation(&self) -> Matrix2<Complex64> {
        let p = self.plus_state();
        let m = self.minus_state();
        Matrix2::new(p[0].conj(), p[1].conj(), m[0].conj(), m[1].conj())
    }
}

/// A square operator acting on an ordered list of target registers.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryOp {
    targets: Vec<String>,
    matrix: DMatrix<Complex64>,
}

impl UnitaryOp {
    pub fn new<S: Into<String>>(
        targets: impl IntoIterator<Item = S>,
        matrix: DMatrix<Complex64>,
    ) -> Result<Self> {
        let targets: Vec<String> = targets.into_iter().map(Into::into).collect();
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return Err(Error::RepeatedTarget(t.clone()));
            }
        }
        if !matrix.is_square() {
            return Err(Error::ShapeMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected: matrix.nrows(),
            });
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARY_TOLERANCE {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(UnitaryOp { targets, matrix })
    }

    /// For operators unitary by construction (permutations, products of checked factors).
    pub(crate) fn trusted(targets: [&str; 2], matrix: DMatrix<Complex64>) -> Result<Self> {
        if targets[0] == targets[1] {
            return Err(Error::RepeatedTarget(targets[0].to_string()));
        }
        Ok(UnitaryOp {
            targets: targets.iter().map(|t| t.to_string()).collect(),
            matrix,
        })
    }

    pub fn single(target: impl Into<String>, matrix: Matrix2<Complex64>) -> Result<Self> {
        Self::new(
            [target.into()],
            DMatrix::from_iterator(2, 2, matrix.iter().copied()),
        )
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> UnitaryOp {
        UnitaryOp {
            targets: self.targets.clone(),
            matrix: self.matrix.adjoint(),
        }
    }
}

/// Max entrywise `|U^dagger U - I|`.
pub fn unitarity_deviation(matrix: &DMatrix<Complex64>) -> f64 {
    let n = matrix.nrows();
    let product = matrix.adjoint() * matrix;
    let mut worst: f64 = 0.0;
    for r in 0..n {
        for c in 0..n {
            let expected = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((product[(r, c)] - Complex64::new(expected, 0.0)).norm());
        }
    }
    worst
}

/// Rotation of the chosen axis into the computational basis, on one qubit register.
pub fn axis_basis_unitary(axis: &AxisSpec, target: impl Into<String>) -> UnitaryOp {
    UnitaryOp::single(target, axis.basis_rotation()).expect("axis rotation is unitary")
}

/// `exp(-i angle/2 n.sigma)`.
pub fn rotation_unitary(axis: &AxisSpec, angle: f64, target: impl Into<String>) -> UnitaryOp {
    let (s, c) = (angle / 2.0).sin_cos();
    let m = Matrix2::identity().map(|z: Complex64| z * c)
        - axis.spin_operator().map(|z| z * Complex64::new(0.0, s));
    UnitaryOp::single(target, m).expect("spin rotation is unitary")
}

pub fn x_flip(target: impl Into<String>) -> UnitaryOp {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    UnitaryOp::single(target, Matrix2::new(o, l, l, o)).expect("x flip is unitary")
}

pub fn z_phase(target: impl Into<String>) -> UnitaryOp {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    UnitaryOp::single(target, Matrix2::new(l, o, o, -l)).expect("z phase is unitary")
}

/// A recorded branch choice: register `register` was found in basis index `outcome`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Commitment {
    pub register: String,
    pub outcome: usize,
    pub event_id: u64,
}

/// Normalized amplitudes over a register layout.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    layout: Arc<RegisterLayout>,
    amps: Vec<Amplitude>,
}

impl StateVector {
    pub fn from_amplitudes(layout: Arc<RegisterLayout>, amps: Vec<Amplitude>) -> Result<Self> {
        if amps.len() != layout.total_dim() {
            return Err(Error::IndexCount {
                expected: layout.total_dim(),
                got: amps.len(),
            });
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm });
        }
        Ok(StateVector { layout, amps })
    }

    /// The computational basis state `|i1>|i2>...`.
    pub fn product(layout: Arc<RegisterLayout>, indices: &[usize]) -> Result<Self> {
        let flat = layout.flat_index(indices)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
        amps[flat] = Complex64::new(1.0, 0.0);
        Ok(StateVector { layout, amps })
    }

    /// `(|01> - |10>)/sqrt(2)` on `(u, v)`, every other register at index 0.
    pub fn singlet(layout: Arc<RegisterLayout>, u: &str, v: &str) -> Result<Self> {
        let pu = layout.position(u)?;
        let pv = layout.position(v)?;
        if pu == pv {
            return Err(Error::RepeatedTarget(u.to_string()));
        }
        for p in [pu, pv] {
            let reg = &layout.registers()[p];
            if reg.dim != 2 {
                return Err(Error::NotQubit {
                    register: reg.name.clone(),
                    dim: reg.dim,
                });
            }
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); layout.total_dim()];
        amps[layout.stride(pv)] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        amps[layout.stride(pu)] = Complex64::new(-FRAC_1_SQRT_2, 0.0);
        Ok(StateVector { layout, amps })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn shared_layout(&self) -> &Arc<RegisterLayout> {
        &self.layout
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Same stored bits in every amplitude.
    pub fn bit_identical(&self, other: &StateVector) -> bool {
        self.layout == other.layout
            && self.amps.len() == other.amps.len()
            && self
                .amps
                .iter()
                .zip(&other.amps)
                .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits())
    }

    pub fn max_deviation(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn apply_unitary(&self, op: &UnitaryOp) -> Result<StateVector> {
        let layout = &*self.layout;
        let positions = op
            .targets
            .iter()
            .map(|t| layout.position(t))
            .collect::<Result<Vec<_>>>()?;
        let block: usize = positions
            .iter()
            .map(|&p| layout.registers()[p].dim)
            .product();
        if op.matrix.nrows() != block {
            return Err(Error::ShapeMismatch {
                rows: op.matrix.nrows(),
                cols: op.matrix.ncols(),
                expected: block,
            });
        }

        // Flat offset of each target sub-index, row-major over the op's target order.
        let mut offsets = vec![0usize; block];
        for (j, off) in offsets.iter_mut().enumerate() {
            let mut rest = j;
            for &p in positions.iter().rev() {
                let d = layout.registers()[p].dim;
                *off += (rest % d) * layout.stride(p);
                rest /= d;
            }
        }
        let rows: Vec<Complex64> = (0..block)
            .flat_map(|r| (0..block).map(move |c| (r, c)))
            .map(|(r, c)| op.matrix[(r, c)])
            .collect();

        // Odometer over the registers the op does not touch.
        let spectators: Vec<(usize, usize)> = (0..layout.len())
            .filter(|p| !positions.contains(p))
            .map(|p| (layout.stride(p), layout.registers()[p].dim))
            .collect();
        let mut digits = vec![0usize; spectators.len()];
        let zero = Complex64::new(0.0, 0.0);
        let mut out = vec![zero; self.amps.len()];
        let mut gathered = vec![zero; block];
        let mut base = 0usize;
        loop {
            let mut occupied = false;
            for (g, off) in gathered.iter_mut().zip(&offsets) {
                *g = self.amps[base + off];
                occupied |= *g != zero;
            }
            if occupied {
                for (r, off) in offsets.iter().enumerate() {
                    let row = &rows[r * block..(r + 1) * block];
                    out[base + off] = row.iter().zip(&gathered).map(|(m, a)| m * a).sum();
                }
            }
            let mut k = spectators.len();
            loop {
                if k == 0 {
                    return Ok(StateVector {
                        layout: Arc::clone(&self.layout),
                        amps: out,
                    });
                }
                k -= 1;
                let (stride, dim) = spectators[k];
                digits[k] += 1;
                base += stride;
                if digits[k] < dim {
                    break;
                }
                digits[k] = 0;
                base -= dim * stride;
            }
        }
    }
    /// `|| prod_c P_c psi ||^2` for projectors onto `(register, outcome)` pairs.
    pub fn projector_weight<'a>(
        &self,
        fixed: impl IntoIterator<Item = (&'a str, usize)>,
    ) -> Result<f64> {
        let constraints = self.resolve(fixed)?;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                constraints
                    .iter()
                    .all(|&(p, o)| self.layout.digit(*i, p) == o)
            })
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Born weight of the branch selected by a set of commitments.
    pub fn commitment_probability(&self, commitments: &[Commitment]) -> Result<f64> {
        self.projector_weight(commitments.iter().map(|c| (c.register.as_str(), c.outcome)))
    }

    /// Weight of each outcome of `register` inside the branch picked out by `fixed`,
    /// accumulated in one pass. Entry `o` equals `projector_weight(fixed + {register = o})`.
    pub fn branch_weights<'a>(
        &self,
        fixed: impl IntoIterator<Item = (&'a str, usize)>,
        register: &str,
    ) -> Result<Vec<f64>> {
        let constraints = self.resolve(fixed)?;
        let target = self.layout.position(register)?;
        let mut weights = vec![0.0; self.layout.registers()[target].dim];
        for (i, a) in self.amps.iter().enumerate() {
            if constraints
                .iter()
                .all(|&(p, o)| self.layout.digit(i, p) == o)
            {
                weights[self.layout.digit(i, target)] += a.norm_sqr();
            }
        }
        Ok(weights)
    }

    fn resolve<'a>(
        &self,
        fixed: impl IntoIterator<Item = (&'a str, usize)>,
    ) -> Result<Vec<(usize, usize)>> {
        let mut out: Vec<(usize, usize)> = Vec::new();
        for (name, outcome) in fixed {
            let p = self.layout.position(name)?;
            let reg = &self.layout.registers()[p];
            if outcome >= reg.dim {
                return Err(Error::IndexOutOfRange {
                    register: reg.name.clone(),
                    index: outcome,
                    dim: reg.dim,
                });
            }
            if out.iter().any(|&(q, _)| q == p) {
                return Err(Error::RepeatedTarget(reg.name.clone()));
            }
            out.push((p, outcome));
        }
        Ok(out)
    }

    /// Project onto `register = outcome` and renormalize. Used only by the collapse oracle.
    pub(crate) fn project(&self, register: &str, outcome: usize) -> Result<StateVector> {
        let weight = self.projector_weight([(register, outcome)])?;
        if weight < ZERO_PROBABILITY {
            return Err(Error::NegligibleBranch(weight));
        }
        let p = self.layout.position(register)?;
        let scale = 1.0 / weight.sqrt();
        let amps = self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                if self.layout.digit(i, p) == outcome {
                    a * scale
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Ok(StateVector {
            layout: Arc::clone(&self.layout),
            amps,
        })
    }
}

pub fn make_product_state(layout: Arc<RegisterLayout>, indices: &[usize]) -> Result<StateVector> {
    StateVector::product(layout, indices)
}

pub fn singlet_state(layout: Arc<RegisterLayout>, u: &str, v: &str) -> Result<StateVector> {
    StateVector::singlet(layout, u, v)
}

pub fn apply_unitary(state: &StateVector, op: &UnitaryOp) -> Result<StateVector> {
    state.apply_unitary(op)
}

pub fn commitment_probability(state: &StateVector, commitments: &[Commitment]) -> Result<f64> {
    state.commitment_probability(commitments)
}
