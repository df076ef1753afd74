//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the simulator kernels or metric code under test.

#![allow(dead_code)]

use num_complex::Complex64;
use qae::simulator::GateOp;
use rand::Rng;

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> Matrix {
    (0..dim)
        .map(|i| (0..dim).map(|j| c((i == j) as u8 as f64, 0.0)).collect())
        .collect()
}

pub fn matmul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).map(|t| a[i][t] * b[t][j]).sum())
                .collect()
        })
        .collect()
}

pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, ca, rb, cb) = (a.len(), a[0].len(), b.len(), b[0].len());
    let mut out = vec![vec![c(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn rz(a: f64) -> Matrix {
    vec![
        vec![Complex64::from_polar(1.0, -a / 2.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), Complex64::from_polar(1.0, a / 2.0)],
    ]
}

pub fn ry(a: f64) -> Matrix {
    let (s, co) = (a / 2.0).sin_cos();
    vec![vec![c(co, 0.0), c(-s, 0.0)], vec![c(s, 0.0), c(co, 0.0)]]
}

/// `RZ(ω)·RY(θ)·RZ(φ)` as an explicit matrix product.
pub fn rot(phi: f64, theta: f64, omega: f64) -> Matrix {
    matmul(&rz(omega), &matmul(&ry(theta), &rz(phi)))
}

/// `I ⊗ … ⊗ U ⊗ … ⊗ I` with qubit 0 as the leftmost (most significant) factor.
pub fn embed(u: &Matrix, qubit: usize, n: usize) -> Matrix {
    let id = identity(2);
    let mut m = identity(1);
    for q in 0..n {
        m = kron(&m, if q == qubit { u } else { &id });
    }
    m
}

/// CNOT as a permutation matrix built from its truth table.
#[allow(clippy::needless_range_loop)]
pub fn cnot_matrix(control: usize, target: usize, n: usize) -> Matrix {
    let dim = 1 << n;
    let bit = |q: usize| 1usize << (n - 1 - q);
    let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
    for i in 0..dim {
        let j = if i & bit(control) != 0 {
            i ^ bit(target)
        } else {
            i
        };
        m[j][i] = c(1.0, 0.0);
    }
    m
}

pub fn gate_matrix(g: &GateOp, n: usize) -> Matrix {
    match *g {
        GateOp::Rotation {
            qubit,
            angles: [p, t, o],
        } => embed(&rot(p, t, o), qubit, n),
        GateOp::Cnot { control, target } => cnot_matrix(control, target, n),
    }
}

/// Final state of `gates` on `|0…0⟩` by multiplying full unitaries.
pub fn dense_run(gates: &[GateOp], n: usize) -> Vec<Complex64> {
    let mut u = identity(1 << n);
    for g in gates {
        u = matmul(&gate_matrix(g, n), &u);
    }
    u.iter().map(|row| row[0]).collect()
}

/// `⟨Z_q⟩` from basis probabilities.
pub fn dense_z(state: &[Complex64], q: usize, n: usize) -> f64 {
    state
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let sign = if i >> (n - 1 - q) & 1 == 0 { 1.0 } else { -1.0 };
            sign * a.norm_sqr()
        })
        .sum()
}

/// A layered circuit: random rotations on every qubit, then a CNOT between
/// a random ordered pair of distinct qubits per layer and the linear chain.
pub fn random_circuit(rng: &mut impl Rng, n: usize, layers: usize) -> Vec<GateOp> {
    let mut gates = Vec::new();
    for _ in 0..layers {
        for q in 0..n {
            let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-4.0..4.0));
            gates.push(GateOp::rotation(q, a[0], a[1], a[2]));
        }
        if n > 1 {
            let control = rng.random_range(0..n);
            let mut target = rng.random_range(0..n - 1);
            if target >= control {
                target += 1;
            }
            gates.push(GateOp::cnot(control, target));
            for q in 0..n - 1 {
                gates.push(GateOp::cnot(q, q + 1));
            }
        }
    }
    gates
}

/// Central difference of `f` along each coordinate.
pub fn finite_difference(x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = p[i];
            p[i] = orig + h;
            let up = f(&p);
            p[i] = orig - h;
            let down = f(&p);
            p[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `‖a − b‖ / ‖b‖`.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    num / den
}

/// AUC by comparing every (anomalous, normal) pair; ties count one half.
pub fn pair_count_auc(labels: &[u8], scores: &[f64]) -> Option<f64> {
    let mut wins = 0.0;
    let mut pairs = 0usize;
    for (i, &li) in labels.iter().enumerate() {
        if li != 1 {
            continue;
        }
        for (j, &lj) in labels.iter().enumerate() {
            if lj != 0 {
                continue;
            }
            pairs += 1;
            if scores[i] > scores[j] {
                wins += 1.0;
            } else if scores[i] == scores[j] {
                wins += 0.5;
            }
        }
    }
    (pairs > 0).then(|| wins / pairs as f64)
}

/// Windows by literal enumeration of start offsets `0, S, 2S, …`.
pub fn naive_windows(values: &[f64], d: usize, len: usize, stride: usize) -> Vec<Vec<f64>> {
    let t = values.len() / d;
    let mut out = Vec::new();
    let mut start = 0;
    while start + len <= t {
        out.push(values[start * d..(start + len) * d].to_vec());
        start += stride;
    }
    out
}

/// Every binary vector of length `n`.
pub fn all_binary(n: usize) -> impl Iterator<Item = Vec<u8>> {
    (0..1u32 << n).map(move |m| (0..n).map(|i| (m >> i & 1) as u8).collect())
}
