//! Multiplexed y-rotations: the chain rule that prepares square-root
//! amplitude states, decomposition of a multiplexor into rotations and
//! CNOTs, and the cosine-sine split of a unitary.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};

/// A family of y-rotations of one target qubit, selected by the basis
/// pattern of the control qubits. Angle index: bit `k` of the index is the
/// state of `controls[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RyMultiplexor {
    pub target: usize,
    pub controls: Vec<usize>,
    pub angles: Vec<f64>,
}

impl RyMultiplexor {
    pub fn new(target: usize, controls: Vec<usize>, angles: Vec<f64>) -> Result<Self> {
        if angles.len() != 1 << controls.len() {
            return Err(Error::Index(format!(
                "{} controls need {} angles, got {}",
                controls.len(),
                1usize << controls.len(),
                angles.len()
            )));
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Index("angle not finite".into()));
        }
        Ok(RyMultiplexor {
            target,
            controls,
            angles,
        })
    }

    pub fn as_gate(&self) -> Gate {
        Gate::mux_roty(self.target, self.controls.clone(), self.angles.clone())
    }

    /// Dense matrix over `n_qubits` qubits built from projector algebra:
    /// the sum over patterns `b` of `R(theta_b)` at the target tensored with
    /// the projector onto `b` at the controls.
    pub fn dense(&self, n_qubits: usize) -> DMatrix<Complex64> {
        let dim = 1usize << n_qubits;
        let mut out = DMatrix::zeros(dim, dim);
        for (b, &theta) in self.angles.iter().enumerate() {
            let mut term = DMatrix::identity(1, 1);
            for q in (0..n_qubits).rev() {
                let factor = if q == self.target {
                    roty_matrix(theta)
                } else if let Some(k) = self.controls.iter().position(|&c| c == q) {
                    let bit = (b >> k) & 1;
                    projector(bit)
                } else {
                    DMatrix::identity(2, 2)
                };
                term = term.kronecker(&factor);
            }
            out += term;
        }
        out
    }
}

pub(crate) fn roty_matrix(theta: f64) -> DMatrix<Complex64> {
    let (c, s) = (theta.cos(), theta.sin());
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(c, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(c, 0.0),
        ],
    )
}

fn projector(bit: usize) -> DMatrix<Complex64> {
    let mut p = DMatrix::zeros(2, 2);
    p[(bit, bit)] = Complex64::new(1.0, 0.0);
    p
}

/// Rotation angles that prepare the square roots of a distribution, one
/// level per bit. Level `k` holds `2^k` angles, indexed by the value of the
/// already-prepared low `k` bits.
#[derive(Clone, Debug, PartialEq)]
pub struct AngleTree {
    levels: Vec<Vec<f64>>,
}

impl AngleTree {
    pub fn n_bits(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k]
    }
}

/// Tolerance for a distribution passed to [`chain_angles`] to sum to one.
pub const DIST_SUM_TOL: f64 = 1e-12;

/// Computes the angle tree for a distribution `q` of length `2^n_bits`.
///
/// Bit `k` of the index into `q` is the state of qubit `k`. At level `k`,
/// the cosine and sine are the square roots of the two conditional marginals
/// of bit `k` given the low bits; a zero marginal yields angle 0 (the branch
/// is unreachable, so any angle would do).
pub fn chain_angles(q: &[f64]) -> Result<AngleTree> {
    if !q.len().is_power_of_two() || q.len() < 2 {
        return Err(Error::Parse(format!(
            "distribution length {} is not a power of two >= 2",
            q.len()
        )));
    }
    if q.iter().any(|&p| p < 0.0 || !p.is_finite()) {
        return Err(Error::Parse("distribution has a negative or non-finite entry".into()));
    }
    let sum: f64 = q.iter().sum();
    if (sum - 1.0).abs() > DIST_SUM_TOL {
        return Err(Error::Parse(format!("distribution sums to {sum}, not 1")));
    }
    let n_bits = q.len().trailing_zeros() as usize;
    // marg[k][v] = probability that the low k bits equal v.
    let mut marg: Vec<Vec<f64>> = Vec::with_capacity(n_bits + 1);
    marg.push(vec![1.0]);
    for k in 1..=n_bits {
        let mut m = vec![0.0; 1 << k];
        for (b, &p) in q.iter().enumerate() {
            m[b & ((1 << k) - 1)] += p;
        }
        marg.push(m);
    }
    let mut levels = Vec::with_capacity(n_bits);
    for k in 0..n_bits {
        let mut angles = vec![0.0; 1 << k];
        for v in 0..1 << k {
            if marg[k][v] == 0.0 {
                continue;
            }
            let c2 = marg[k + 1][v];
            let s2 = marg[k + 1][v | (1 << k)];
            angles[v] = s2.sqrt().atan2(c2.sqrt());
        }
        levels.push(angles);
    }
    Ok(AngleTree { levels })
}

/// Circuit preparing `sum_b sqrt(q_b) |b>` from `|0...0>`: a plain rotation
/// on qubit 0, then one multiplexor per further bit, controls being the bits
/// already set.
pub fn state_prepare_circuit(tree: &AngleTree) -> Circuit {
    let n = tree.n_bits();
    let mut circuit = Circuit::new(n);
    for (k, angles) in tree.levels().iter().enumerate() {
        let gate = if k == 0 {
            Gate::roty(angles[0], 0)
        } else {
            Gate::mux_roty(k, (0..k).collect(), angles.clone())
        };
        circuit.push(gate).expect("qubit indices in range");
    }
    circuit
}

/// Decomposes a multiplexor into `2^k` target rotations alternating with
/// `2^k` CNOTs, `k` the number of controls. Rotation angles are the scaled
/// pattern-parity transform of the multiplexor angles; each CNOT control
/// sits where consecutive Gray codes differ, with the cycle closed back to
/// code 0 so conjugations cancel.
pub fn decompose_multiplexor(m: &RyMultiplexor) -> Circuit {
    let n_qubits = m
        .controls
        .iter()
        .chain(std::iter::once(&m.target))
        .max()
        .unwrap()
        + 1;
    let mut circuit = Circuit::new(n_qubits);
    let k = m.controls.len();
    if k == 0 {
        circuit
            .push(Gate::roty(m.angles[0], m.target))
            .expect("valid");
        return circuit;
    }
    let size = 1usize << k;
    let gray = |j: usize| j ^ (j >> 1);
    for j in 0..size {
        let gj = gray(j);
        let mut phi = 0.0;
        for (b, &theta) in m.angles.iter().enumerate() {
            let sign = if (b & gj).count_ones() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            phi += sign * theta;
        }
        phi /= size as f64;
        circuit.push(Gate::roty(phi, m.target)).expect("valid");
        let flip = if j + 1 < size {
            gj ^ gray(j + 1)
        } else {
            gj // last Gray code is a single bit; closing the cycle to 0
        };
        debug_assert_eq!(flip.count_ones(), 1);
        let control = m.controls[flip.trailing_zeros() as usize];
        circuit
            .push(Gate::cnot(control, m.target))
            .expect("valid");
    }
    circuit
}

// ---------------------------------------------------------------------------
// Cosine-sine decomposition
// ---------------------------------------------------------------------------

/// Result of [`csd_split`]: `U = (L0 (+) L1) D (R0 (+) R1)` with
/// `D = [[C, S], [-S, C]]`, `C = diag(cos theta_i)`, `S = diag(sin theta_i)`,
/// `theta_i` in `[0, pi/2]` and cosines nonincreasing.
#[derive(Clone, Debug)]
pub struct CsdSplit {
    pub l0: DMatrix<Complex64>,
    pub l1: DMatrix<Complex64>,
    pub r0: DMatrix<Complex64>,
    pub r1: DMatrix<Complex64>,
    pub thetas: Vec<f64>,
}

impl CsdSplit {
    /// Rebuilds the full matrix from the blocks and angles.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let n = self.thetas.len();
        let mut d = DMatrix::zeros(2 * n, 2 * n);
        for (i, &t) in self.thetas.iter().enumerate() {
            let (c, s) = (t.cos(), t.sin());
            d[(i, i)] = Complex64::new(c, 0.0);
            d[(i + n, i + n)] = Complex64::new(c, 0.0);
            d[(i, i + n)] = Complex64::new(s, 0.0);
            d[(i + n, i)] = Complex64::new(-s, 0.0);
        }
        let mut left = DMatrix::zeros(2 * n, 2 * n);
        left.view_mut((0, 0), (n, n)).copy_from(&self.l0);
        left.view_mut((n, n), (n, n)).copy_from(&self.l1);
        let mut right = DMatrix::zeros(2 * n, 2 * n);
        right.view_mut((0, 0), (n, n)).copy_from(&self.r0);
        right.view_mut((n, n), (n, n)).copy_from(&self.r1);
        left * d * right
    }
}

/// Tolerance for the unitarity precondition of [`csd_split`].
pub const UNITARY_TOL: f64 = 1e-10;

pub fn unitarity_deviation(u: &DMatrix<Complex64>) -> f64 {
    let gram = u.adjoint() * u;
    let mut dev: f64 = 0.0;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let expect = if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            dev = dev.max((gram[(i, j)] - expect).norm());
        }
    }
    dev
}

/// One level of cosine-sine decomposition of an even-dimensional unitary,
/// via simultaneous SVD of the 2x2 block partition.
///
/// The SVD of the upper-left block fixes `L0`, the cosines and `R0`; a QR
/// factorization of `U10 R0^H` then yields `L1` and the sines; the remaining
/// block determines `R1` row by row, dividing by whichever of sine or cosine
/// is larger so the split stays stable when angles degenerate.
pub fn csd_split(u: &DMatrix<Complex64>) -> Result<CsdSplit> {
    let dim = u.nrows();
    if u.ncols() != dim || dim == 0 || !dim.is_multiple_of(2) {
        return Err(Error::Parse(format!(
            "matrix must be square with even dimension, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let dev = unitarity_deviation(u);
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    let n = dim / 2;
    let u00 = u.view((0, 0), (n, n)).clone_owned();
    let u01 = u.view((0, n), (n, n)).clone_owned();
    let u10 = u.view((n, 0), (n, n)).clone_owned();
    let u11 = u.view((n, n), (n, n)).clone_owned();

    // SVD of the upper-left block, singular values in ascending order so
    // that the triangular factor below is provably diagonal.
    let svd = u00.clone().svd(true, true);
    let l0_raw = svd.u.expect("u requested");
    let vt_raw = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[a]
            .partial_cmp(&svd.singular_values[b])
            .unwrap()
    });
    let mut l0 = DMatrix::zeros(n, n);
    let mut r0 = DMatrix::zeros(n, n);
    let mut c = vec![0.0; n];
    for (pos, &idx) in order.iter().enumerate() {
        l0.set_column(pos, &l0_raw.column(idx));
        r0.set_row(pos, &vt_raw.row(idx));
        c[pos] = svd.singular_values[idx].min(1.0);
    }

    // u10 r0^H = l1 s with s upper triangular; since s^H s = I - c^2 is
    // diagonal with nonincreasing entries, s is diagonal.
    let qr = (u10.clone() * r0.adjoint()).qr();
    let mut l1 = qr.q();
    let r_mat = qr.r();
    let mut s = vec![0.0; n];
    for j in 0..n {
        let mut z = r_mat[(j, j)];
        let r = z.norm();
        if r > 1e-13 && z.im.abs() > 0.0 {
            let w = z.conj() / r;
            z *= w;
            let col = l1.column(j) / w;
            l1.set_column(j, &col);
        }
        let mut val = z.re;
        if val < 0.0 {
            val = -val;
            let col = -l1.column(j);
            l1.set_column(j, &col);
        }
        s[j] = val;
    }

    // r1 from whichever of u01, u11 has the better-conditioned divisor.
    let l0h_u01 = l0.adjoint() * &u01;
    let l1h_u11 = l1.adjoint() * &u11;
    let mut r1 = DMatrix::zeros(n, n);
    for i in 0..n {
        if s[i] > c[i] {
            r1.set_row(i, &(-l0h_u01.row(i) / Complex64::new(s[i], 0.0)));
        } else {
            r1.set_row(i, &(l1h_u11.row(i) / Complex64::new(c[i], 0.0)));
        }
    }

    // The factorization so far is U = (l0 (+) l1) [[c, -s], [s, c]]
    // (r0 (+) r1); flip the sign of l1 and r1 to reach [[c, s], [-s, c]],
    // then reverse the ordering so cosines come out nonincreasing.
    let l1 = -l1;
    let r1 = -r1;
    let perm: Vec<usize> = (0..n).rev().collect();
    let mut out = CsdSplit {
        l0: DMatrix::zeros(n, n),
        l1: DMatrix::zeros(n, n),
        r0: DMatrix::zeros(n, n),
        r1: DMatrix::zeros(n, n),
        thetas: vec![0.0; n],
    };
    for (pos, &idx) in perm.iter().enumerate() {
        out.l0.set_column(pos, &l0.column(idx));
        out.l1.set_column(pos, &l1.column(idx));
        out.r0.set_row(pos, &r0.row(idx));
        out.r1.set_row(pos, &r1.row(idx));
        out.thetas[pos] = s[idx].atan2(c[idx]);
    }
    Ok(out)
}
