//! Dense complex statevector simulation.
//!
//! Qubit 0 is the most significant bit of the basis index: on `n` qubits,
//! qubit `q` corresponds to bit `n - 1 - q`, so `|10⟩` (qubit 0 set) is
//! basis index 2.
//!
//! Besides plain execution the module provides two gradient routes for
//! circuits whose rotation angles are affine in a parameter vector: the
//! reverse-sweep adjoint method (used for training) and the parameter-shift
//! rule (kept as an independent check).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;

pub const MAX_QUBITS: usize = 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A single gate acting on a register.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    /// General rotation `RZ(ω) RY(θ) RZ(φ)`, angles stored as `[φ, θ, ω]`.
    Rotation {
        qubit: usize,
        angles: [f64; 3],
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

impl GateOp {
    pub fn rotation(qubit: usize, phi: f64, theta: f64, omega: f64) -> Self {
        GateOp::Rotation {
            qubit,
            angles: [phi, theta, omega],
        }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        GateOp::Cnot { control, target }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        match *self {
            GateOp::Rotation { qubit, .. } => check_qubit(qubit, n_qubits),
            GateOp::Cnot { control, target } => {
                check_qubit(control, n_qubits)?;
                check_qubit(target, n_qubits)?;
                if control == target {
                    return Err(Error::Config(format!(
                        "cnot control and target are both qubit {control}"
                    )));
                }
                Ok(())
            }
        }
    }
}

fn check_qubit(qubit: usize, n_qubits: usize) -> Result<()> {
    if qubit < n_qubits {
        Ok(())
    } else {
        Err(Error::Index {
            index: qubit,
            n_qubits,
        })
    }
}

fn check_register(n_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n_qubits) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "number of qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )))
    }
}

/// The 2x2 matrix of `RZ(ω) RY(θ) RZ(φ)`, row-major.
pub fn rotation_matrix(phi: f64, theta: f64, omega: f64) -> [[Complex64; 2]; 2] {
    let (s, c) = (theta / 2.0).sin_cos();
    let sum = (phi + omega) / 2.0;
    let diff = (phi - omega) / 2.0;
    [
        [
            Complex64::from_polar(c, -sum),
            -Complex64::from_polar(s, diff),
        ],
        [
            Complex64::from_polar(s, -diff),
            Complex64::from_polar(c, sum),
        ],
    ]
}

#[inline]
fn bit_of(n_qubits: usize, qubit: usize) -> usize {
    1 << (n_qubits - 1 - qubit)
}

// Kernels below operate on raw amplitude slices of length 2^n and assume
// validated indices.

fn apply_matrix(amps: &mut [Complex64], n_qubits: usize, qubit: usize, m: &[[Complex64; 2]; 2]) {
    let bit = bit_of(n_qubits, qubit);
    for block in (0..amps.len()).step_by(bit << 1) {
        for i in block..block + bit {
            let a0 = amps[i];
            let a1 = amps[i | bit];
            amps[i] = m[0][0] * a0 + m[0][1] * a1;
            amps[i | bit] = m[1][0] * a0 + m[1][1] * a1;
        }
    }
}

fn apply_rz(amps: &mut [Complex64], n_qubits: usize, qubit: usize, angle: f64) {
    let bit = bit_of(n_qubits, qubit);
    let lo = Complex64::from_polar(1.0, -angle / 2.0);
    let hi = lo.conj();
    for block in (0..amps.len()).step_by(bit << 1) {
        for i in block..block + bit {
            amps[i] *= lo;
            amps[i | bit] *= hi;
        }
    }
}

fn apply_ry(amps: &mut [Complex64], n_qubits: usize, qubit: usize, angle: f64) {
    let bit = bit_of(n_qubits, qubit);
    let (s, c) = (angle / 2.0).sin_cos();
    for block in (0..amps.len()).step_by(bit << 1) {
        for i in block..block + bit {
            let a0 = amps[i];
            let a1 = amps[i | bit];
            amps[i] = a0 * c - a1 * s;
            amps[i | bit] = a0 * s + a1 * c;
        }
    }
}

fn apply_cnot_raw(amps: &mut [Complex64], n_qubits: usize, control: usize, target: usize) {
    let cbit = bit_of(n_qubits, control);
    let tbit = bit_of(n_qubits, target);
    for i in 0..amps.len() {
        if i & cbit != 0 && i & tbit == 0 {
            amps.swap(i, i | tbit);
        }
    }
}

fn apply_gate_raw(amps: &mut [Complex64], n_qubits: usize, gate: &GateOp) {
    match *gate {
        GateOp::Rotation { qubit, angles } => {
            let m = rotation_matrix(angles[0], angles[1], angles[2]);
            apply_matrix(amps, n_qubits, qubit, &m);
        }
        GateOp::Cnot { control, target } => apply_cnot_raw(amps, n_qubits, control, target),
    }
}

fn z_expectation_raw(amps: &[Complex64], n_qubits: usize, qubit: usize) -> f64 {
    let bit = bit_of(n_qubits, qubit);
    amps.iter()
        .enumerate()
        .map(|(i, a)| {
            if i & bit == 0 {
                a.norm_sqr()
            } else {
                -a.norm_sqr()
            }
        })
        .sum()
}

/// Imaginary part of `⟨λ|Z_q|ψ⟩`.
fn im_inner_z(lam: &[Complex64], psi: &[Complex64], n_qubits: usize, qubit: usize) -> f64 {
    let bit = bit_of(n_qubits, qubit);
    lam.iter()
        .zip(psi)
        .enumerate()
        .map(|(i, (l, p))| {
            let v = (l.conj() * p).im;
            if i & bit == 0 {
                v
            } else {
                -v
            }
        })
        .sum()
}

/// Imaginary part of `⟨λ|Y_q|ψ⟩`.
fn im_inner_y(lam: &[Complex64], psi: &[Complex64], n_qubits: usize, qubit: usize) -> f64 {
    let bit = bit_of(n_qubits, qubit);
    let mut acc = Complex64::new(0.0, 0.0);
    for block in (0..psi.len()).step_by(bit << 1) {
        for i in block..block + bit {
            let j = i | bit;
            // (Yψ)_i = -i ψ_j, (Yψ)_j = i ψ_i
            acc += lam[i].conj() * (-Complex64::i() * psi[j]);
            acc += lam[j].conj() * (Complex64::i() * psi[i]);
        }
    }
    acc.im
}

/// An n-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0…0⟩` on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_register(n_qubits)?;
        let mut amps = vec![ZERO; 1 << n_qubits];
        amps[0] = ONE;
        Ok(Self { n_qubits, amps })
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_register(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::Config(format!(
                "expected {} amplitudes for {n_qubits} qubits, got {}",
                1usize << n_qubits,
                amps.len()
            )));
        }
        Ok(Self { n_qubits, amps })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_rotation(&mut self, qubit: usize, phi: f64, theta: f64, omega: f64) -> Result<()> {
        self.apply(&GateOp::rotation(qubit, phi, theta, omega))
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.apply(&GateOp::cnot(control, target))
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        apply_gate_raw(&mut self.amps, self.n_qubits, gate);
        Ok(())
    }

    /// `⟨ψ|Z_q|ψ⟩ = P(q = 0) − P(q = 1)`.
    pub fn z_expectation(&self, qubit: usize) -> Result<f64> {
        check_qubit(qubit, self.n_qubits)?;
        Ok(z_expectation_raw(&self.amps, self.n_qubits, qubit))
    }
}

/// Runs `gates` in order on `|0…0⟩`.
pub fn run_circuit(gates: &[GateOp], n_qubits: usize) -> Result<Statevector> {
    let mut state = Statevector::new(n_qubits)?;
    for g in gates {
        g.validate(n_qubits)?;
    }
    for g in gates {
        apply_gate_raw(&mut state.amps, n_qubits, g);
    }
    Ok(state)
}

/// `B` statevectors stored back to back, batch index outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct StateBatch {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateBatch {
    pub fn len(&self) -> usize {
        self.amps.len() >> self.n_qubits
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn state(&self, index: usize) -> &[Complex64] {
        let dim = 1 << self.n_qubits;
        &self.amps[index * dim..(index + 1) * dim]
    }

    pub fn z_expectation(&self, index: usize, qubit: usize) -> Result<f64> {
        check_qubit(qubit, self.n_qubits)?;
        Ok(z_expectation_raw(self.state(index), self.n_qubits, qubit))
    }
}

/// Runs one gate skeleton with `B` different angle assignments.
///
/// `angle_sets[b]` supplies one `[φ, θ, ω]` triple per rotation of `skeleton`,
/// in order; the angles stored in the skeleton itself are ignored.
pub fn run_circuit_batch(
    skeleton: &[GateOp],
    n_qubits: usize,
    angle_sets: &[Vec<[f64; 3]>],
    exec: Execution,
) -> Result<StateBatch> {
    check_register(n_qubits)?;
    for g in skeleton {
        g.validate(n_qubits)?;
    }
    let n_rot = skeleton
        .iter()
        .filter(|g| matches!(g, GateOp::Rotation { .. }))
        .count();
    if let Some(bad) = angle_sets.iter().position(|a| a.len() != n_rot) {
        return Err(Error::Config(format!(
            "angle set {bad} has {} triples, skeleton has {n_rot} rotations",
            angle_sets[bad].len()
        )));
    }
    let dim = 1usize << n_qubits;
    let mut amps = vec![ZERO; dim * angle_sets.len()];
    exec.for_each_chunk_mut(&mut amps, dim, |b, state| {
        state[0] = ONE;
        let mut angles = angle_sets[b].iter();
        for g in skeleton {
            match *g {
                GateOp::Rotation { qubit, .. } => {
                    let a = angles.next().expect("angle count checked above");
                    let m = rotation_matrix(a[0], a[1], a[2]);
                    apply_matrix(state, n_qubits, qubit, &m);
                }
                GateOp::Cnot { control, target } => {
                    apply_cnot_raw(state, n_qubits, control, target)
                }
            }
        }
    });
    Ok(StateBatch { n_qubits, amps })
}

/// `f = Σ_{s∈S} (1 + ⟨Z_s⟩)/2`, the summed probability of the trash qubits
/// reading `|0⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrashObservable {
    qubits: Vec<usize>,
}

impl TrashObservable {
    pub fn new(qubits: Vec<usize>) -> Self {
        Self { qubits }
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    fn validate(&self, n_qubits: usize) -> Result<()> {
        if self.qubits.is_empty() {
            return Err(Error::Config("observable has no trash qubits".into()));
        }
        self.qubits
            .iter()
            .try_for_each(|&q| check_qubit(q, n_qubits))
    }

    /// Diagonal entry of the observable: number of trash qubits at 0 in `index`.
    fn diagonal(&self, n_qubits: usize, index: usize) -> f64 {
        self.qubits
            .iter()
            .filter(|&&q| index & bit_of(n_qubits, q) == 0)
            .count() as f64
    }

    pub fn expectation(&self, state: &Statevector) -> Result<f64> {
        self.validate(state.n_qubits)?;
        Ok(self.expectation_raw(&state.amps, state.n_qubits))
    }

    fn expectation_raw(&self, amps: &[Complex64], n_qubits: usize) -> f64 {
        self.qubits
            .iter()
            .map(|&q| 0.5 * (1.0 + z_expectation_raw(amps, n_qubits, q)))
            .sum()
    }
}

/// Observable value and `∂f/∂[φ, θ, ω]` for every rotation of `gates`, in
/// rotation order, by one forward pass and one reverse sweep.
pub fn adjoint_angle_gradient(
    gates: &[GateOp],
    n_qubits: usize,
    observable: &TrashObservable,
) -> Result<(f64, Vec<[f64; 3]>)> {
    observable.validate(n_qubits)?;
    let state = run_circuit(gates, n_qubits)?;
    let mut psi = state.amps;
    let value = observable.expectation_raw(&psi, n_qubits);
    let mut lam: Vec<Complex64> = psi
        .iter()
        .enumerate()
        .map(|(i, a)| a * observable.diagonal(n_qubits, i))
        .collect();

    let mut grads = Vec::with_capacity(gates.len());
    for g in gates.iter().rev() {
        match *g {
            GateOp::Cnot { control, target } => {
                apply_cnot_raw(&mut psi, n_qubits, control, target);
                apply_cnot_raw(&mut lam, n_qubits, control, target);
            }
            GateOp::Rotation { qubit, angles } => {
                let [phi, theta, omega] = angles;
                let d_omega = im_inner_z(&lam, &psi, n_qubits, qubit);
                apply_rz(&mut psi, n_qubits, qubit, -omega);
                apply_rz(&mut lam, n_qubits, qubit, -omega);
                let d_theta = im_inner_y(&lam, &psi, n_qubits, qubit);
                apply_ry(&mut psi, n_qubits, qubit, -theta);
                apply_ry(&mut lam, n_qubits, qubit, -theta);
                let d_phi = im_inner_z(&lam, &psi, n_qubits, qubit);
                apply_rz(&mut psi, n_qubits, qubit, -phi);
                apply_rz(&mut lam, n_qubits, qubit, -phi);
                grads.push([d_phi, d_theta, d_omega]);
            }
        }
    }
    grads.reverse();
    Ok((value, grads))
}

/// An angle that is an affine function of the parameter vector:
/// `offset + Σ coefficient · params[index]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AngleBinding {
    pub offset: f64,
    pub terms: Vec<(usize, f64)>,
}

impl AngleBinding {
    pub fn constant(offset: f64) -> Self {
        Self {
            offset,
            terms: Vec::new(),
        }
    }

    pub fn param(index: usize) -> Self {
        Self {
            offset: 0.0,
            terms: vec![(index, 1.0)],
        }
    }

    /// `weight · x + bias`, with `weight` and `bias` both parameters.
    pub fn affine(weight: usize, x: f64, bias: usize) -> Self {
        Self {
            offset: 0.0,
            terms: vec![(weight, x), (bias, 1.0)],
        }
    }

    pub fn eval(&self, params: &[f64]) -> f64 {
        self.offset + self.terms.iter().map(|&(i, c)| c * params[i]).sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamGate {
    Rotation {
        qubit: usize,
        angles: [AngleBinding; 3],
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

/// A gate list whose rotation angles are bound to a parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCircuit {
    pub n_qubits: usize,
    pub n_params: usize,
    pub gates: Vec<ParamGate>,
}

impl ParamCircuit {
    pub fn validate(&self) -> Result<()> {
        check_register(self.n_qubits)?;
        for g in &self.gates {
            match g {
                ParamGate::Rotation { qubit, angles } => {
                    check_qubit(*qubit, self.n_qubits)?;
                    for &(i, _) in angles.iter().flat_map(|a| &a.terms) {
                        if i >= self.n_params {
                            return Err(Error::Config(format!(
                                "angle bound to parameter {i}, circuit has {} parameters",
                                self.n_params
                            )));
                        }
                    }
                }
                ParamGate::Cnot { control, target } => {
                    GateOp::cnot(*control, *target).validate(self.n_qubits)?
                }
            }
        }
        Ok(())
    }

    fn check_params(&self, params: &[f64]) -> Result<()> {
        self.validate()?;
        if params.len() != self.n_params {
            return Err(Error::Config(format!(
                "expected {} parameter values, got {}",
                self.n_params,
                params.len()
            )));
        }
        Ok(())
    }

    /// Concrete gates for the given parameter values.
    pub fn resolve(&self, params: &[f64]) -> Result<Vec<GateOp>> {
        self.check_params(params)?;
        Ok(self.resolve_unchecked(params))
    }

    fn resolve_unchecked(&self, params: &[f64]) -> Vec<GateOp> {
        self.gates
            .iter()
            .map(|g| match g {
                ParamGate::Rotation { qubit, angles } => GateOp::Rotation {
                    qubit: *qubit,
                    angles: [
                        angles[0].eval(params),
                        angles[1].eval(params),
                        angles[2].eval(params),
                    ],
                },
                ParamGate::Cnot { control, target } => GateOp::cnot(*control, *target),
            })
            .collect()
    }

    fn bindings(&self) -> impl Iterator<Item = &[AngleBinding; 3]> {
        self.gates.iter().filter_map(|g| match g {
            ParamGate::Rotation { angles, .. } => Some(angles),
            ParamGate::Cnot { .. } => None,
        })
    }

    pub fn expectation(&self, params: &[f64], observable: &TrashObservable) -> Result<f64> {
        let gates = self.resolve(params)?;
        observable.expectation(&run_circuit(&gates, self.n_qubits)?)
    }
}

/// Exact `∂f/∂params` by the adjoint method, chained through the affine
/// angle bindings. Returns `(f, gradient)`.
pub fn adjoint_gradient(
    circuit: &ParamCircuit,
    params: &[f64],
    observable: &TrashObservable,
) -> Result<(f64, Vec<f64>)> {
    let gates = circuit.resolve(params)?;
    let (value, angle_grads) = adjoint_angle_gradient(&gates, circuit.n_qubits, observable)?;
    let mut grad = vec![0.0; circuit.n_params];
    for (binding, dangle) in circuit.bindings().zip(&angle_grads) {
        for (b, d) in binding.iter().zip(dangle) {
            for &(i, c) in &b.terms {
                grad[i] += c * d;
            }
        }
    }
    Ok((value, grad))
}

/// `∂f/∂params` by the parameter-shift rule.
///
/// Each bound angle is shifted by `±π/2` on its own (the rule is exact for a
/// single Pauli-generated rotation), and the angle derivatives are chained
/// into the parameters through the binding coefficients.
pub fn param_shift_gradient(
    circuit: &ParamCircuit,
    params: &[f64],
    observable: &TrashObservable,
) -> Result<Vec<f64>> {
    circuit.check_params(params)?;
    observable.validate(circuit.n_qubits)?;
    let base = circuit.resolve_unchecked(params);
    let rot_positions: Vec<usize> = base
        .iter()
        .enumerate()
        .filter(|(_, g)| matches!(g, GateOp::Rotation { .. }))
        .map(|(i, _)| i)
        .collect();
    let shifted = |pos: usize, axis: usize, delta: f64| -> f64 {
        let mut gates = base.clone();
        if let GateOp::Rotation { angles, .. } = &mut gates[pos] {
            angles[axis] += delta;
        }
        let mut amps = Statevector::new(circuit.n_qubits)
            .expect("register validated")
            .amps;
        for g in &gates {
            apply_gate_raw(&mut amps, circuit.n_qubits, g);
        }
        observable.expectation_raw(&amps, circuit.n_qubits)
    };

    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut grad = vec![0.0; circuit.n_params];
    for (binding, &pos) in circuit.bindings().zip(&rot_positions) {
        for (axis, b) in binding.iter().enumerate() {
            if b.terms.is_empty() {
                continue;
            }
            let d = 0.5 * (shifted(pos, axis, half_pi) - shifted(pos, axis, -half_pi));
            for &(i, c) in &b.terms {
                grad[i] += c * d;
            }
        }
    }
    Ok(grad)
}
